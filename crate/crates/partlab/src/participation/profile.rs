//! Edge field profiles and the energy scaling factors derived from them.
//!
//! Near a film edge the field magnitude separates as |E(x,y,z)| = C(y)
//! f(x,z): one 2D profile shape shared along the edge, scaled by a slowly
//! varying amplitude. The profile comes from a finite-thickness
//! cross-section solve; the scaling factors are ratios of f^2 integrals
//! between the full band (0, x0) and its convergent outer half (x0/2, x0),
//! evaluated separately for each surface layer.
//!
//! Conventions: the profiled edge sits at x = 0 with metal on the +x side,
//! and f = 1 at the metal-substrate bisector point (x0, -t/2).

use serde::{Deserialize, Serialize};

use super::ParticipationError;
use crate::geometry::MaterialStack;
use crate::mesh::InterfaceTag;
use crate::solver::FieldSolution;

/// Default normalization distance and perimeter band width (m).
pub const X0_DEFAULT: f64 = 1e-6;

/// One profile cell: squared field over a rectangle, exact-clippable in x.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct ProfilePatch {
    x_lo: f64,
    x_hi: f64,
    /// Cell extent along z (m).
    dz: f64,
    /// Squared normalized field magnitude, constant over the patch.
    f2: f64,
}

/// Integral of f^2 dx dz over the patches clipped to x in (a, b).
fn clipped_integral(patches: &[ProfilePatch], a: f64, b: f64) -> f64 {
    patches
        .iter()
        .map(|p| {
            let lo = p.x_lo.max(a);
            let hi = p.x_hi.min(b);
            if hi > lo {
                p.f2 * p.dz * (hi - lo)
            } else {
                0.0
            }
        })
        .sum()
}

/// Normalized edge field profile with its per-layer squared-field patches.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeProfile {
    /// (x, f) along the metal-substrate layer bisector z = -t/2, x measured
    /// from the edge into the metal.
    pub bisector: Vec<(f64, f64)>,
    /// Half-width of the validity window around the edge (m).
    pub window: f64,
    /// Human-readable normalization convention.
    pub normalization: String,
    /// Metal-substrate layer patches, x in (0, window).
    ms: Vec<ProfilePatch>,
    /// Substrate-air layer patches, x in (-window, 0).
    sa: Vec<ProfilePatch>,
    /// Metal-air top patches over the film, x in (0, window).
    ma_top: Vec<ProfilePatch>,
    /// Metal-air sidewall patches, x in (-t, 0), z in (0, h + t).
    ma_side: Vec<ProfilePatch>,
}

impl EdgeProfile {
    /// Bisector value at `x` by linear interpolation, clamped at the ends.
    pub fn f_at(&self, x: f64) -> f64 {
        let pts = &self.bisector;
        if pts.is_empty() {
            return 0.0;
        }
        if x <= pts[0].0 {
            return pts[0].1;
        }
        if x >= pts[pts.len() - 1].0 {
            return pts[pts.len() - 1].1;
        }
        let i = pts.partition_point(|&(px, _)| px < x);
        let (x0, f0) = pts[i - 1];
        let (x1, f1) = pts[i];
        f0 + (f1 - f0) * (x - x0) / (x1 - x0)
    }

    /// Synthetic x-uniform profile with f = 1 everywhere; used to verify
    /// formula identities (F_MS = 2 exactly) without a field solve.
    pub fn uniform(window: f64, stack: &MaterialStack) -> EdgeProfile {
        let (t, h) = (stack.t_interface, stack.h_film);
        let patch = |x_lo: f64, x_hi: f64, dz: f64| ProfilePatch {
            x_lo,
            x_hi,
            dz,
            f2: 1.0,
        };
        EdgeProfile {
            bisector: vec![(0.0, 1.0), (window, 1.0)],
            window,
            normalization: "uniform synthetic, f = 1 everywhere".into(),
            ms: vec![patch(0.0, window, t)],
            sa: vec![patch(-window, 0.0, t)],
            ma_top: vec![patch(0.0, window, t)],
            ma_side: vec![patch(-t, 0.0, h + t)],
        }
    }
}

/// Band-energy ratios converting the convergent outer half-band integral
/// into the full band value, one per surface layer.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScalingFactors {
    pub f_ms: f64,
    pub f_ma: f64,
    pub f_sa: f64,
    /// Band distance the factors were evaluated for (m).
    pub x0: f64,
}

/// Extracts the normalized edge profile from a finite-thickness
/// cross-section solution.
///
/// The edge is at x = 0 with metal on +x. The validity window is inferred
/// from the solved mesh as half the smaller of the metal run and the gap
/// run adjoining the edge; the profile is collected only inside it.
pub fn edge_profile(sol: &FieldSolution, stack: &MaterialStack) -> crate::Result<EdgeProfile> {
    let mesh = sol.mesh();
    if mesh.dim() != 2 || mesh.tags.is_empty() || !mesh.sheets.is_empty() {
        return Err(ParticipationError::InvalidRequest(
            "edge profiles need a finite-thickness 2D cross-section solution".into(),
        )
        .into());
    }
    let (t, h) = (stack.t_interface, stack.h_film);
    let x_axis = &mesh.axes[0];
    let z_axis = &mesh.axes[1];
    let nx = x_axis.n_cells();

    // The layer row closest to the metal-substrate bisector z = -t/2.
    let zrow = (0..z_axis.n_cells())
        .filter(|&k| z_axis.center(k) > -t && z_axis.center(k) < 0.0)
        .min_by(|&a, &b| {
            let da = (z_axis.center(a) + 0.5 * t).abs();
            let db = (z_axis.center(b) + 0.5 * t).abs();
            da.partial_cmp(&db).expect("finite z coordinates")
        })
        .ok_or_else(|| {
            ParticipationError::InvalidRequest(
                "no interface-layer cells below the metal plane".into(),
            )
        })?;
    let tag_at = |i: usize| mesh.tags[i + nx * zrow];

    // Metal and gap runs adjoining the edge, scanned outward from x = 0.
    let mut metal_end = 0.0f64;
    if let Some(first) = (0..nx).find(|&i| x_axis.center(i) > 0.0) {
        let mut i = first;
        while i < nx && tag_at(i) == InterfaceTag::Ms {
            metal_end = x_axis.coords()[i + 1];
            i += 1;
        }
    }
    let mut gap_end = 0.0f64;
    if let Some(last) = (0..nx).rev().find(|&i| x_axis.center(i) < 0.0) {
        let mut i = last;
        loop {
            if tag_at(i) != InterfaceTag::Sa {
                break;
            }
            gap_end = -x_axis.coords()[i];
            if i == 0 {
                break;
            }
            i -= 1;
        }
    }
    if metal_end <= 0.0 || gap_end <= 0.0 {
        return Err(ParticipationError::InvalidRequest(
            "no metal edge found at x = 0 in the cross-section".into(),
        )
        .into());
    }
    let window = 0.5 * metal_end.min(gap_end);
    if window < X0_DEFAULT {
        return Err(ParticipationError::ProfileWindowTooSmall {
            window,
            needed: X0_DEFAULT,
        }
        .into());
    }

    // Normalization field at the metal-substrate bisector point.
    let e_ref = sol.e_magnitude_at([X0_DEFAULT, -0.5 * t, 0.0])?;
    if !(e_ref > 0.0) || !e_ref.is_finite() {
        return Err(ParticipationError::InvalidRequest(
            "field vanishes at the profile normalization point".into(),
        )
        .into());
    }

    let mut ms = Vec::new();
    let mut sa = Vec::new();
    let mut ma_top = Vec::new();
    let mut ma_side = Vec::new();
    let mut bisector = Vec::new();
    for k in 0..z_axis.n_cells() {
        let zc = z_axis.center(k);
        let dz = z_axis.width(k);
        for i in 0..nx {
            let tag = mesh.tags[i + nx * k];
            if tag == InterfaceTag::None {
                continue;
            }
            let xc = x_axis.center(i);
            if xc.abs() > window {
                continue;
            }
            let idx = i + nx * k;
            let ev = sol.e_field(idx);
            let f = (ev[0] * ev[0] + ev[1] * ev[1]).sqrt() / e_ref;
            if !f.is_finite() {
                return Err(ParticipationError::InvalidRequest(format!(
                    "non-finite profile value at x = {xc:.3e}, z = {zc:.3e}"
                ))
                .into());
            }
            let patch = ProfilePatch {
                x_lo: x_axis.coords()[i],
                x_hi: x_axis.coords()[i + 1],
                dz,
                f2: f * f,
            };
            match tag {
                InterfaceTag::Ms if xc > 0.0 => {
                    ms.push(patch);
                    if k == zrow {
                        bisector.push((xc, f));
                    }
                }
                InterfaceTag::Sa if xc < 0.0 => sa.push(patch),
                InterfaceTag::Ma if xc > 0.0 && zc > h => ma_top.push(patch),
                // The edge's own sidewall strip hugs x in (-t, 0); oxide of
                // other edges lies far outside that and is skipped.
                InterfaceTag::Ma if xc < 0.0 && xc > -t => ma_side.push(patch),
                _ => {}
            }
        }
    }
    bisector.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite x coordinates"));

    Ok(EdgeProfile {
        bisector,
        window,
        normalization: format!(
            "f = 1 at the metal-substrate bisector (x = {X0_DEFAULT:.1e} m, z = -t/2)"
        ),
        ms,
        sa,
        ma_top,
        ma_side,
    })
}

/// Computes the band-energy scaling factors at distance `x0` from the edge.
///
/// F_MS and F_SA are full-band over outer-half-band ratios of the layer f^2
/// integral on their respective sides of the edge; F_MA adds the film
/// sidewall column (x in (-t, 0), z in (0, h + t)) to the top-surface
/// numerator.
pub fn scaling_factors(
    profile: &EdgeProfile,
    x0: f64,
    stack: &MaterialStack,
) -> crate::Result<ScalingFactors> {
    if !(x0 > 0.0) || !x0.is_finite() {
        return Err(
            ParticipationError::InvalidRequest(format!("band distance x0 = {x0:e}")).into(),
        );
    }
    if profile.window < x0 {
        return Err(ParticipationError::ProfileWindowTooSmall {
            window: profile.window,
            needed: x0,
        }
        .into());
    }
    let t = stack.t_interface;
    let ms_full = clipped_integral(&profile.ms, 0.0, x0);
    let ms_outer = clipped_integral(&profile.ms, 0.5 * x0, x0);
    let sa_full = clipped_integral(&profile.sa, -x0, 0.0);
    let sa_outer = clipped_integral(&profile.sa, -x0, -0.5 * x0);
    let top_full = clipped_integral(&profile.ma_top, 0.0, x0);
    let top_outer = clipped_integral(&profile.ma_top, 0.5 * x0, x0);
    let side = clipped_integral(&profile.ma_side, -t, 0.0);
    for (name, denom) in [
        ("metal-substrate", ms_outer),
        ("substrate-air", sa_outer),
        ("metal-air", top_outer),
    ] {
        if !(denom > 0.0) {
            return Err(ParticipationError::InvalidRequest(format!(
                "no {name} profile energy in the outer half band"
            ))
            .into());
        }
    }
    Ok(ScalingFactors {
        f_ms: ms_full / ms_outer,
        f_ma: (top_full + side) / top_outer,
        f_sa: sa_full / sa_outer,
        x0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_stack, CrossSectionSpec, CrossSectionStyle};
    use crate::mesh::{
        build_cross_section, Axis, BoundaryCondition, CellKind, CrossSectionMeshOptions, RectMesh,
    };
    use crate::solver::{solve, SolveOptions};
    use approx::assert_relative_eq;

    /// Identities that hold to round-off.
    const TOL_EXACT: f64 = 1e-12;
    /// Frozen dense-solve oracle values for the 10/10 finger cross-section,
    /// with the tolerance granted to this solver's different discretization.
    const ORACLE_F_1NM: (f64, f64) = (17.375, 0.12);
    const ORACLE_F_10NM: (f64, f64) = (8.716, 0.08);
    const ORACLE_F_100NM: (f64, f64) = (3.055, 0.06);
    const ORACLE_F_MS: (f64, f64) = (8.584, 0.08);
    const ORACLE_F_SA: (f64, f64) = (10.047, 0.10);
    const ORACLE_F_MA: (f64, f64) = (122.3, 0.15);

    /// Hand-built cross-section-like mesh with a uniform vertical field:
    /// uniform permittivity, Dirichlet floor and lid, tags painted as if a
    /// film edge sat at x = 0 with `run` meters of metal and gap.
    fn uniform_field_section(run: f64) -> FieldSolution {
        let stack = MaterialStack::default();
        let (t, h) = (stack.t_interface, stack.h_film);
        let x = Axis::from_cells(
            -run,
            &[run - t, t, 0.5 * run, 0.5 * run],
            vec![-run, -t, 0.0, run],
        );
        let zs = [
            (-1e-6, -t, 1),
            (-t, 0.0, 2),
            (0.0, h, 2),
            (h, h + t, 2),
            (h + t, 1e-6, 1),
        ];
        let mut cells = Vec::new();
        let mut anchors = vec![-1e-6, 1e-6];
        for &(lo, hi, n) in &zs {
            anchors.push(lo);
            for _ in 0..n {
                cells.push((hi - lo) / n as f64);
            }
        }
        let z = Axis::from_cells(-1e-6, &cells, anchors);
        let (nx, nz) = (x.n_cells(), z.n_cells());
        let n = nx * nz;
        let mut tags = vec![InterfaceTag::None; n];
        for k in 0..nz {
            let zc = z.center(k);
            for i in 0..nx {
                let xc = x.center(i);
                tags[i + nx * k] = if zc > -t && zc < 0.0 {
                    if xc > 0.0 {
                        InterfaceTag::Ms
                    } else {
                        InterfaceTag::Sa
                    }
                } else if zc > 0.0 && zc < h + t && ((xc > -t && xc < 0.0) || (zc > h && xc > 0.0))
                {
                    InterfaceTag::Ma
                } else {
                    InterfaceTag::None
                };
            }
        }
        let mesh = RectMesh {
            axes: vec![x, z],
            cell_eps: vec![1.0; n],
            cell_kind: vec![CellKind::Dielectric; n],
            terminals: vec![],
            sheets: vec![],
            boundary: vec![
                BoundaryCondition::Neumann,
                BoundaryCondition::Neumann,
                BoundaryCondition::Dirichlet(0.0),
                BoundaryCondition::Dirichlet(1.0),
            ],
            tags,
            budget: 1 << 20,
        };
        solve(mesh, &SolveOptions::default()).unwrap()
    }

    #[test]
    fn uniform_field_gives_flat_profile_and_exact_factors() {
        let stack = MaterialStack::default();
        let sol = uniform_field_section(4e-6);
        let profile = edge_profile(&sol, &stack).unwrap();
        assert_relative_eq!(profile.window, 2e-6, max_relative = TOL_EXACT);
        assert!(!profile.bisector.is_empty());
        for &(_, f) in &profile.bisector {
            assert_relative_eq!(f, 1.0, max_relative = 1e-9);
        }
        assert_relative_eq!(profile.f_at(0.3e-6), 1.0, max_relative = 1e-9);

        let f = scaling_factors(&profile, X0_DEFAULT, &stack).unwrap();
        assert_relative_eq!(f.f_ms, 2.0, max_relative = 1e-9);
        assert_relative_eq!(f.f_sa, 2.0, max_relative = 1e-9);
        // Uniform f: the sidewall column adds 2 (h + t) / x0 on top of 2.
        let expect_ma = 2.0 + 2.0 * (stack.h_film + stack.t_interface) / X0_DEFAULT;
        assert_relative_eq!(f.f_ma, expect_ma, max_relative = 1e-9);
    }

    #[test]
    fn synthetic_uniform_profile_matches_formula_identities() {
        let stack = MaterialStack::default();
        let profile = EdgeProfile::uniform(3e-6, &stack);
        let f = scaling_factors(&profile, 2e-6, &stack).unwrap();
        assert_relative_eq!(f.f_ms, 2.0, max_relative = TOL_EXACT);
        assert_relative_eq!(f.f_sa, 2.0, max_relative = TOL_EXACT);
        let expect_ma = 2.0 + 2.0 * (stack.h_film + stack.t_interface) / 2e-6;
        assert_relative_eq!(f.f_ma, expect_ma, max_relative = TOL_EXACT);
    }

    #[test]
    fn narrow_section_window_is_rejected() {
        let stack = MaterialStack::default();
        let sol = uniform_field_section(1.5e-6);
        // Runs of 1.5 um give a 0.75 um window, under the 1 um minimum.
        match edge_profile(&sol, &stack) {
            Err(crate::Error::Participation(ParticipationError::ProfileWindowTooSmall {
                window,
                ..
            })) => assert_relative_eq!(window, 0.75e-6, max_relative = 1e-9),
            other => panic!("expected ProfileWindowTooSmall, got {other:?}"),
        }
    }

    #[test]
    fn band_beyond_window_is_rejected() {
        let stack = MaterialStack::default();
        let profile = EdgeProfile::uniform(2e-6, &stack);
        assert!(matches!(
            scaling_factors(&profile, 3e-6, &stack),
            Err(crate::Error::Participation(
                ParticipationError::ProfileWindowTooSmall { .. }
            ))
        ));
    }

    #[test]
    fn sheet_model_sections_are_rejected() {
        let stack = make_stack(None, None, None, None).unwrap();
        let spec = CrossSectionSpec::new(CrossSectionStyle::Idc, 10e-6, 10e-6, stack).unwrap();
        let opts = CrossSectionMeshOptions {
            sheet_metal: true,
            min_cell: 5e-9,
            ..CrossSectionMeshOptions::default()
        };
        let mesh = build_cross_section(&spec, &opts).unwrap();
        let sol = solve(mesh, &SolveOptions::default()).unwrap();
        assert!(matches!(
            edge_profile(&sol, &stack),
            Err(crate::Error::Participation(
                ParticipationError::InvalidRequest(_)
            ))
        ));
    }

    /// Full solve of the 10 um finger / 10 um gap cross-section against the
    /// frozen dense-solve oracle values.
    #[test]
    fn finger_cross_section_matches_dense_oracle() {
        let stack = make_stack(None, None, None, None).unwrap();
        let spec = CrossSectionSpec::new(CrossSectionStyle::Idc, 10e-6, 10e-6, stack).unwrap();
        let mesh = build_cross_section(&spec, &CrossSectionMeshOptions::default()).unwrap();
        let sol = solve(mesh, &SolveOptions::default()).unwrap();
        let profile = edge_profile(&sol, &stack).unwrap();
        assert_relative_eq!(profile.window, 2.5e-6, max_relative = 1e-9);

        for (x, (expect, tol)) in [
            (1e-9, ORACLE_F_1NM),
            (10e-9, ORACLE_F_10NM),
            (100e-9, ORACLE_F_100NM),
        ] {
            let f = profile.f_at(x);
            assert!(
                (f / expect - 1.0).abs() < tol,
                "f({x:.0e}) = {f:.4}, oracle {expect:.4}, tolerance {tol}"
            );
        }

        let factors = scaling_factors(&profile, X0_DEFAULT, &stack).unwrap();
        for (got, (expect, tol), name) in [
            (factors.f_ms, ORACLE_F_MS, "F_MS"),
            (factors.f_sa, ORACLE_F_SA, "F_SA"),
            (factors.f_ma, ORACLE_F_MA, "F_MA"),
        ] {
            assert!(
                (got / expect - 1.0).abs() < tol,
                "{name} = {got:.4}, oracle {expect:.4}, tolerance {tol}"
            );
        }
        // Edge-peaked profile: inner half dominates, so every F exceeds 2.
        assert!(factors.f_ms > 2.0 && factors.f_sa > 2.0 && factors.f_ma > 2.0);
    }
}
