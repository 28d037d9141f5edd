//! Pad-surface participation from the global sheet-model solution.
//!
//! The global solve has no surface layers, so layer energies come from the
//! one-sided fields on the metal plane: continuity converts the sampled
//! normal and tangential components into the thin-layer field, and the
//! layer energy is field energy density times the 3 nm thickness times the
//! region area. Interior regions use the converted integral directly;
//! perimeter bands integrate only the convergent outer half (x0/2, x0) and
//! scale it with the profile-derived factors.

use serde::{Deserialize, Serialize};

use super::{ParticipationError, ScalingFactors};
use crate::geometry::{MaterialStack, PadClass, RegionSet};
use crate::solver::{FieldSolution, PlaneSide, SolveError};
use crate::EPS0;

/// Largest tolerated relative change of the outer band under refinement.
pub const BAND_CONVERGENCE_TOL: f64 = 0.02;

/// Interior pad participation, already divided by the total energy.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PadInterior {
    pub p_ms: f64,
    pub p_ma: f64,
    /// Total field energy the ratios are normalized by (J).
    pub u_tot: f64,
}

/// Perimeter band participation with scaling factors applied.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PadPerimeter {
    pub p_ms: f64,
    pub p_sa: f64,
    pub p_ma: f64,
    pub u_tot: f64,
}

/// Metal-substrate layer energy per area from the substrate-side normal
/// field under the metal (tangential vanishes at the conductor).
fn ms_per_area(e_n: f64, stack: &MaterialStack) -> f64 {
    let e_layer = stack.eps_substrate / stack.eps_interface * e_n;
    0.5 * EPS0 * stack.eps_interface * e_layer * e_layer * stack.t_interface
}

/// Substrate-air layer energy per area from the substrate-side field on
/// exposed substrate: tangential continuous, normal scaled by permittivity.
fn sa_per_area(e_n: f64, e_t: [f64; 2], stack: &MaterialStack) -> f64 {
    let r = stack.eps_substrate / stack.eps_interface;
    let e2 = e_t[0] * e_t[0] + e_t[1] * e_t[1] + (r * e_n) * (r * e_n);
    0.5 * EPS0 * stack.eps_interface * e2 * stack.t_interface
}

/// Metal-air layer energy per area from the vacuum-side normal field over
/// the metal.
fn ma_per_area(e_n: f64, stack: &MaterialStack) -> f64 {
    let e_layer = stack.eps_vacuum / stack.eps_interface * e_n;
    0.5 * EPS0 * stack.eps_interface * e_layer * e_layer * stack.t_interface
}

/// Layer energies (J) accumulated over the pad-derived regions.
#[derive(Debug, Default, Clone, Copy)]
struct BandEnergies {
    ms_interior: f64,
    ma_interior: f64,
    ms_outer: f64,
    sa_outer: f64,
    ma_outer: f64,
}

fn accumulate(
    sol: &FieldSolution,
    regions: &RegionSet,
    stack: &MaterialStack,
) -> crate::Result<BandEnergies> {
    let mesh = sol.mesh();
    if mesh.dim() != 3 || mesh.sheets.is_empty() {
        return Err(ParticipationError::InvalidRequest(
            "pad participation needs a global sheet-model solution".into(),
        )
        .into());
    }
    // Every pad must lie inside the solved plane.
    for pad in regions.pads() {
        let (lo, hi) = pad.bbox();
        let inside = (0..2).all(|a| {
            lo[a] >= mesh.axes[a].start() - 1e-12 && hi[a] <= mesh.axes[a].end() + 1e-12
        });
        if !inside {
            return Err(SolveError::RegionOutsideMesh {
                lo: [lo[0], lo[1], 0.0],
                hi: [hi[0], hi[1], 0.0],
            }
            .into());
        }
    }

    let below = sol.surface_samples(0, PlaneSide::Below)?;
    let above = sol.surface_samples(0, PlaneSide::Above)?;
    let nx = mesh.shape()[0];
    let xs = mesh.axes[0].coords();
    let ys = mesh.axes[1].coords();

    let mut out = BandEnergies::default();
    for (sb, sa) in below.iter().zip(&above) {
        let i = sb.other % nx;
        let j = sb.other / nx;
        let lo = [xs[i], ys[j]];
        let hi = [xs[i + 1], ys[j + 1]];
        for (class, area) in regions.rect_class_areas(lo, hi) {
            match class {
                PadClass::Interior => {
                    out.ms_interior += ms_per_area(sb.e_normal, stack) * area;
                    out.ma_interior += ma_per_area(sa.e_normal, stack) * area;
                }
                PadClass::PerimeterOuter => {
                    out.ms_outer += ms_per_area(sb.e_normal, stack) * area;
                    out.ma_outer += ma_per_area(sa.e_normal, stack) * area;
                }
                PadClass::SaOuter => {
                    out.sa_outer += sa_per_area(sb.e_normal, sb.e_tangent, stack) * area;
                }
                _ => {}
            }
        }
    }
    Ok(out)
}

/// Participation of the pad interiors (both metal faces), per Eq. layer
/// energy over total energy.
pub fn interior_participation(
    sol: &FieldSolution,
    regions: &RegionSet,
    stack: &MaterialStack,
) -> crate::Result<PadInterior> {
    let bands = accumulate(sol, regions, stack)?;
    let u_tot = sol.total_energy();
    Ok(PadInterior {
        p_ms: bands.ms_interior / u_tot,
        p_ma: bands.ma_interior / u_tot,
        u_tot,
    })
}

/// Participation of the pad perimeter bands: outer half-band integral times
/// the scaling factor, per surface layer.
pub fn perimeter_participation(
    sol: &FieldSolution,
    regions: &RegionSet,
    factors: &ScalingFactors,
    stack: &MaterialStack,
) -> crate::Result<PadPerimeter> {
    if (factors.x0 / regions.x0 - 1.0).abs() > 1e-9 {
        return Err(ParticipationError::InvalidRequest(format!(
            "scaling factors at x0 = {:.3e} m do not match the region bands at {:.3e} m",
            factors.x0, regions.x0
        ))
        .into());
    }
    let bands = accumulate(sol, regions, stack)?;
    let u_tot = sol.total_energy();
    Ok(PadPerimeter {
        p_ms: factors.f_ms * bands.ms_outer / u_tot,
        p_sa: factors.f_sa * bands.sa_outer / u_tot,
        p_ma: factors.f_ma * bands.ma_outer / u_tot,
        u_tot,
    })
}

/// Like [`perimeter_participation`], but verifies that the outer band is
/// mesh-converged by comparing against a refined solution of the same
/// device; the returned values come from `sol` so that normalization stays
/// consistent with the other report parts.
pub fn perimeter_participation_checked(
    sol: &FieldSolution,
    sol_finer: &FieldSolution,
    regions: &RegionSet,
    factors: &ScalingFactors,
    stack: &MaterialStack,
) -> crate::Result<PadPerimeter> {
    let coarse = accumulate(sol, regions, stack)?;
    let fine = accumulate(sol_finer, regions, stack)?;
    let (uc, uf) = (sol.total_energy(), sol_finer.total_energy());
    let mut change = 0.0f64;
    for (c, f) in [
        (coarse.ms_outer / uc, fine.ms_outer / uf),
        (coarse.sa_outer / uc, fine.sa_outer / uf),
        (coarse.ma_outer / uc, fine.ma_outer / uf),
    ] {
        if f > 0.0 {
            change = change.max((c / f - 1.0).abs());
        }
    }
    if change > BAND_CONVERGENCE_TOL {
        return Err(ParticipationError::NonConvergentBand {
            change: change * 100.0,
        }
        .into());
    }
    perimeter_participation(sol, regions, factors, stack)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{
        partition_pad_regions, BoxDims, DeviceLayout, Junction, LeadSpec, PadSpec, Polygon,
        PotentialLabel,
    };
    use crate::mesh::{build_global, GlobalMeshOptions};
    use crate::participation::{EdgeProfile, X0_DEFAULT};
    use crate::solver::{solve, SolveOptions};

    const UM: f64 = 1e-6;

    /// Two facing square pads joined by short junction leads.
    fn small_layout(swap: bool) -> DeviceLayout {
        let (top, bot) = if swap {
            (PotentialLabel::Minus, PotentialLabel::Plus)
        } else {
            (PotentialLabel::Plus, PotentialLabel::Minus)
        };
        DeviceLayout::new(
            "squares".into(),
            vec![
                PadSpec {
                    polygon: Polygon::rect(-20.0 * UM, 10.0 * UM, 20.0 * UM, 50.0 * UM).unwrap(),
                    label: top,
                },
                PadSpec {
                    polygon: Polygon::rect(-20.0 * UM, -50.0 * UM, 20.0 * UM, -10.0 * UM).unwrap(),
                    label: bot,
                },
            ],
            vec![
                LeadSpec {
                    width: 1.0 * UM,
                    path: vec![[0.0, 0.5 * UM], [0.0, 10.0 * UM]],
                    label: top,
                },
                LeadSpec {
                    width: 1.0 * UM,
                    path: vec![[0.0, -0.5 * UM], [0.0, -10.0 * UM]],
                    label: bot,
                },
            ],
            Junction {
                point: [0.0, 0.0],
                gap: 1.0 * UM,
            },
            BoxDims::new(
                [-200.0 * UM, -200.0 * UM, -430.0 * UM],
                [200.0 * UM, 200.0 * UM, 0.0],
            )
            .unwrap(),
            BoxDims::new(
                [-500.0 * UM, -500.0 * UM, -500.0 * UM],
                [500.0 * UM, 500.0 * UM, 500.0 * UM],
            )
            .unwrap(),
        )
        .unwrap()
    }

    fn coarse_opts() -> GlobalMeshOptions {
        GlobalMeshOptions {
            min_cell_edge: 1.0 * UM,
            min_cell_z: 0.5 * UM,
            ..GlobalMeshOptions::default()
        }
    }

    fn solve_layout(layout: &DeviceLayout) -> FieldSolution {
        let stack = MaterialStack::default();
        let mesh = build_global(layout, &stack, &coarse_opts()).unwrap();
        solve(mesh, &SolveOptions::default()).unwrap()
    }

    #[test]
    fn potential_swap_leaves_participation_unchanged() {
        let stack = MaterialStack::default();
        let layout = small_layout(false);
        let regions = partition_pad_regions(&layout, X0_DEFAULT).unwrap();
        let a = interior_participation(&solve_layout(&layout), &regions, &stack).unwrap();
        let b = interior_participation(&solve_layout(&small_layout(true)), &regions, &stack)
            .unwrap();
        // Energy is even in E; the swapped solve is the mirror problem.
        assert!((a.p_ms / b.p_ms - 1.0).abs() < 1e-8);
        assert!((a.p_ma / b.p_ma - 1.0).abs() < 1e-8);
        assert!(a.p_ms > 0.0 && a.p_ma > 0.0);
    }

    #[test]
    fn doubled_drive_leaves_participation_unchanged() {
        let stack = MaterialStack::default();
        let layout = small_layout(false);
        let regions = partition_pad_regions(&layout, X0_DEFAULT).unwrap();
        let factors = {
            let profile = EdgeProfile::uniform(2.0 * UM, &stack);
            crate::participation::scaling_factors(&profile, X0_DEFAULT, &stack).unwrap()
        };
        let mut mesh = build_global(&layout, &stack, &coarse_opts()).unwrap();
        let sol1 = solve(mesh.clone(), &SolveOptions::default()).unwrap();
        mesh.terminals = vec![0.0, 1.0, -1.0];
        let sol2 = solve(mesh, &SolveOptions::default()).unwrap();
        let p1 = perimeter_participation(&sol1, &regions, &factors, &stack).unwrap();
        let p2 = perimeter_participation(&sol2, &regions, &factors, &stack).unwrap();
        // Doubling every potential scales fields exactly; ratios cancel.
        assert!((p1.p_ms / p2.p_ms - 1.0).abs() < 1e-12);
        assert!((p1.p_sa / p2.p_sa - 1.0).abs() < 1e-12);
        assert!((p1.p_ma / p2.p_ma - 1.0).abs() < 1e-12);
        assert!(p1.p_ms > 0.0 && p1.p_sa > 0.0 && p1.p_ma > 0.0);
    }

    #[test]
    fn uniform_factor_two_is_formula_identity() {
        // With F = 2 the perimeter values are exactly twice the raw
        // converted outer-band integral.
        let stack = MaterialStack::default();
        let layout = small_layout(false);
        let regions = partition_pad_regions(&layout, X0_DEFAULT).unwrap();
        let sol = solve_layout(&layout);
        let uniform = EdgeProfile::uniform(2.0 * UM, &stack);
        let f2 = crate::participation::scaling_factors(&uniform, X0_DEFAULT, &stack).unwrap();
        let p = perimeter_participation(&sol, &regions, &f2, &stack).unwrap();
        let raw = accumulate(&sol, &regions, &stack).unwrap();
        let u = sol.total_energy();
        assert!((p.p_ms - 2.0 * raw.ms_outer / u).abs() < 1e-18);
        assert!((p.p_sa - 2.0 * raw.sa_outer / u).abs() < 1e-18);
    }

    #[test]
    fn mismatched_band_distance_is_rejected() {
        let stack = MaterialStack::default();
        let layout = small_layout(false);
        let regions = partition_pad_regions(&layout, X0_DEFAULT).unwrap();
        let sol = solve_layout(&layout);
        let uniform = EdgeProfile::uniform(3.0 * UM, &stack);
        let f = crate::participation::scaling_factors(&uniform, 2.0 * UM, &stack).unwrap();
        assert!(matches!(
            perimeter_participation(&sol, &regions, &f, &stack),
            Err(crate::Error::Participation(
                ParticipationError::InvalidRequest(_)
            ))
        ));
    }

    #[test]
    fn pads_outside_mesh_are_rejected() {
        let stack = MaterialStack::default();
        let layout = small_layout(false);
        let sol = solve_layout(&layout);
        // Regions from a much larger device than the solved one.
        let mut big = small_layout(false);
        big.pads[0].polygon = Polygon::rect(-20.0 * UM, 10.0 * UM, 900.0 * UM, 50.0 * UM).unwrap();
        let regions = partition_pad_regions(&big, X0_DEFAULT).unwrap();
        assert!(matches!(
            interior_participation(&sol, &regions, &stack),
            Err(crate::Error::Solve(SolveError::RegionOutsideMesh { .. }))
        ));
    }
}
