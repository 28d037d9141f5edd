//! Solved potentials with derived field and energy accessors.

use rayon::prelude::*;

use super::{FaceProbe, SolveError};
use crate::mesh::{InterfaceTag, RectMesh};
use crate::EPS0;

/// Which side of a sheet plane to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaneSide {
    Below,
    Above,
}

/// One-sided field sample on a cell face of a sheet plane.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceSample {
    /// Index into the sheet's terminal grid (remaining axes, first fastest).
    pub other: usize,
    /// Face center; the sheet-axis coordinate is the plane position.
    pub center: [f64; 3],
    /// Face area (length in 2D).
    pub area: f64,
    /// Normal field in the sampled cell's material, signed along +axis.
    pub e_normal: f64,
    /// Cell-center tangential components, ordered by the remaining axes.
    pub e_tangent: [f64; 2],
    /// True where the plane carries metal at this face.
    pub on_metal: bool,
}

/// A solved electrostatic field on its mesh.
///
/// Owns the mesh, the cell potentials, and precomputed per-cell fields and
/// energies. The electric field in a cell is the average of its two face
/// flux densities per axis divided by the cell permittivity, which is exact
/// wherever the flux is locally one-dimensional.
#[derive(Debug, Clone)]
pub struct FieldSolution {
    mesh: RectMesh,
    phi: Vec<f64>,
    e: Vec<[f64; 3]>,
    cell_u: Vec<f64>,
    total_u: f64,
    iterations: usize,
    residual: f64,
}

impl FieldSolution {
    pub(crate) fn from_phi(
        mesh: RectMesh,
        phi: Vec<f64>,
        iterations: usize,
        residual: f64,
    ) -> FieldSolution {
        let n = mesh.n_cells();
        let probe = FaceProbe::new(&mesh);
        let dim = mesh.dim();
        let e: Vec<[f64; 3]> = (0..n)
            .into_par_iter()
            .map(|idx| {
                if mesh.is_conductor(idx) {
                    return [0.0; 3];
                }
                let mut ev = [0.0; 3];
                let eps = mesh.cell_eps[idx];
                for (axis, e_a) in ev.iter_mut().enumerate().take(dim) {
                    let dm = probe.flux_density(&phi, idx, axis, -1);
                    let dp = probe.flux_density(&phi, idx, axis, 1);
                    *e_a = 0.5 * (dm + dp) / eps;
                }
                ev
            })
            .collect();
        let cell_u: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|idx| {
                if mesh.is_conductor(idx) {
                    return 0.0;
                }
                let ev = e[idx];
                let e2 = ev[0] * ev[0] + ev[1] * ev[1] + ev[2] * ev[2];
                let ijk = mesh.unindex(idx);
                0.5 * EPS0 * mesh.cell_eps[idx] * e2 * mesh.cell_volume(ijk)
            })
            .collect();
        // Deterministic chunked total.
        let total_u = cell_u
            .chunks(8192)
            .map(|c| c.iter().sum::<f64>())
            .sum::<f64>();
        FieldSolution {
            mesh,
            phi,
            e,
            cell_u,
            total_u,
            iterations,
            residual,
        }
    }

    pub fn mesh(&self) -> &RectMesh {
        &self.mesh
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn e_field(&self, idx: usize) -> [f64; 3] {
        self.e[idx]
    }

    /// Field energy of one cell in joules (per meter of depth in 2D).
    pub fn cell_energy(&self, idx: usize) -> f64 {
        self.cell_u[idx]
    }

    pub fn total_energy(&self) -> f64 {
        self.total_u
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Sum of cell energies carrying the given surface-layer tag.
    pub fn energy_tagged(&self, tag: InterfaceTag) -> f64 {
        if self.mesh.tags.is_empty() {
            return 0.0;
        }
        self.mesh
            .tags
            .iter()
            .zip(&self.cell_u)
            .filter(|(&t, _)| t == tag)
            .map(|(_, &u)| u)
            .sum()
    }

    /// Energy inside an axis-aligned box, with cells cut exactly at the box
    /// faces (the field is constant per cell). Unused trailing coordinates
    /// are ignored in 2D.
    pub fn energy_in_box(&self, lo: [f64; 3], hi: [f64; 3]) -> Result<f64, SolveError> {
        let dim = self.mesh.dim();
        let mut ranges: Vec<(usize, usize)> = Vec::with_capacity(dim);
        for (axis, ax) in self.mesh.axes.iter().enumerate() {
            if lo[axis] >= ax.end() || hi[axis] <= ax.start() || lo[axis] >= hi[axis] {
                return Err(SolveError::RegionOutsideMesh { lo, hi });
            }
            let first = ax.coords().partition_point(|&c| c <= lo[axis]).max(1) - 1;
            let last = ax
                .coords()
                .partition_point(|&c| c < hi[axis])
                .min(ax.n_cells());
            ranges.push((first, last));
        }
        let frac = |axis: usize, i: usize| -> f64 {
            let ax = &self.mesh.axes[axis];
            let (a, b) = (ax.coords()[i], ax.coords()[i + 1]);
            let cl = a.max(lo[axis]);
            let ch = b.min(hi[axis]);
            ((ch - cl) / (b - a)).max(0.0)
        };
        let mut total = 0.0;
        let r = |axis: usize| -> (usize, usize) {
            if axis < dim {
                ranges[axis]
            } else {
                (0, 1)
            }
        };
        let (k0, k1) = r(2);
        let (j0, j1) = r(1);
        let (i0, i1) = r(0);
        for k in k0..k1 {
            let fk = if dim >= 3 { frac(2, k) } else { 1.0 };
            for j in j0..j1 {
                let fj = if dim >= 2 { frac(1, j) } else { 1.0 };
                for i in i0..i1 {
                    let fi = frac(0, i);
                    let idx = self.mesh.index([i, j, k]);
                    total += self.cell_u[idx] * fi * fj * fk;
                }
            }
        }
        Ok(total)
    }

    /// One-sided field samples over every face of a sheet plane.
    pub fn surface_samples(
        &self,
        sheet: usize,
        side: PlaneSide,
    ) -> Result<Vec<SurfaceSample>, SolveError> {
        let sh = self
            .mesh
            .sheets
            .get(sheet)
            .ok_or_else(|| SolveError::InvalidQuery(format!("no sheet {sheet} in this mesh")))?;
        let axis = sh.axis;
        let ax = &self.mesh.axes[axis];
        let (cell_along, dir) = match side {
            PlaneSide::Below => {
                if sh.plane == 0 {
                    return Err(SolveError::InvalidQuery(
                        "sheet plane is the domain floor; it has no below side".into(),
                    ));
                }
                (sh.plane - 1, 1)
            }
            PlaneSide::Above => {
                if sh.plane == ax.n_cells() {
                    return Err(SolveError::InvalidQuery(
                        "sheet plane is the domain lid; it has no above side".into(),
                    ));
                }
                (sh.plane, -1)
            }
        };
        let plane_pos = ax.coords()[sh.plane];
        let probe = FaceProbe::new(&self.mesh);
        let dim = self.mesh.dim();
        let others: Vec<usize> = (0..dim).filter(|&a| a != axis).collect();
        let shape = self.mesh.shape();

        let mut out = Vec::with_capacity(sh.term.len());
        for other in 0..sh.term.len() {
            // Decode the terminal-grid index into cell indices of the
            // remaining axes, first fastest.
            let mut ijk = [0usize; 3];
            ijk[axis] = cell_along;
            let mut rem = other;
            for &a in &others {
                ijk[a] = rem % shape[a];
                rem /= shape[a];
            }
            let idx = self.mesh.index(ijk);
            let flux = probe.flux_density(&self.phi, idx, axis, dir);
            let eps = self.mesh.cell_eps[idx];
            let mut center = self.mesh.cell_center(ijk);
            center[axis] = plane_pos;
            let mut area = 1.0;
            let mut e_tangent = [0.0; 2];
            for (slot, &a) in others.iter().enumerate() {
                area *= self.mesh.axes[a].width(ijk[a]);
                e_tangent[slot] = self.e[idx][a];
            }
            out.push(SurfaceSample {
                other,
                center,
                area,
                e_normal: flux / eps,
                e_tangent,
                on_metal: sh.term[other] >= 0,
            });
        }
        Ok(out)
    }

    /// Field magnitude at a point, multilinear over cell-centered |E|.
    ///
    /// Between the domain wall and the first cell center the value clamps
    /// to that cell. Trailing coordinates are ignored in 2D.
    pub fn e_magnitude_at(&self, p: [f64; 3]) -> Result<f64, SolveError> {
        let dim = self.mesh.dim();
        // Per axis: lower cell, upper cell, and the weight of the upper.
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        let mut wt = [0.0f64; 3];
        for (axis, ax) in self.mesh.axes.iter().enumerate() {
            let x = p[axis];
            let span = ax.end() - ax.start();
            if x < ax.start() - 1e-9 * span || x > ax.end() + 1e-9 * span {
                return Err(SolveError::InvalidQuery(format!(
                    "point coordinate {x:e} on axis {axis} is outside the mesh"
                )));
            }
            let i = ax
                .find_cell(x.max(ax.start()).min(ax.end() - 1e-12 * span))
                .unwrap_or(0);
            let c = ax.center(i);
            if x >= c {
                lo[axis] = i;
                hi[axis] = (i + 1).min(ax.n_cells() - 1);
                let step = ax.center(hi[axis]) - c;
                wt[axis] = if step > 0.0 { (x - c) / step } else { 0.0 };
            } else {
                hi[axis] = i;
                lo[axis] = i.saturating_sub(1);
                let step = c - ax.center(lo[axis]);
                wt[axis] = if step > 0.0 { 1.0 - (c - x) / step } else { 1.0 };
            }
        }
        let mag = |ijk: [usize; 3]| -> f64 {
            let ev = self.e[self.mesh.index(ijk)];
            (ev[0] * ev[0] + ev[1] * ev[1] + ev[2] * ev[2]).sqrt()
        };
        let mut acc = 0.0;
        let corners = 1usize << dim;
        for corner in 0..corners {
            let mut ijk = [0usize; 3];
            let mut weight = 1.0;
            for axis in 0..dim {
                if corner >> axis & 1 == 1 {
                    ijk[axis] = hi[axis];
                    weight *= wt[axis];
                } else {
                    ijk[axis] = lo[axis];
                    weight *= 1.0 - wt[axis];
                }
            }
            if weight != 0.0 {
                acc += weight * mag(ijk);
            }
        }
        Ok(acc)
    }

    /// Piecewise-constant transfer of this solution's potential onto
    /// another mesh of the same domain (used to warm-start refinements).
    pub(crate) fn interpolate_onto(&self, target: &RectMesh) -> Vec<f64> {
        let n = target.n_cells();
        (0..n)
            .into_par_iter()
            .map(|idx| {
                let c = target.cell_center(target.unindex(idx));
                let mut ijk = [0usize; 3];
                for (axis, ax) in self.mesh.axes.iter().enumerate() {
                    let x = c[axis]
                        .max(ax.start())
                        .min(ax.end() - 1e-12 * (ax.end() - ax.start()).abs());
                    ijk[axis] = ax.find_cell(x).unwrap_or(0);
                }
                self.phi[self.mesh.index(ijk)]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Axis, BoundaryCondition, CellKind};
    use crate::solver::{solve, SolveOptions};
    use approx::assert_relative_eq;

    const TOL_EXACT: f64 = 1e-9;

    fn uniform_axis(start: f64, end: f64, n: usize) -> Axis {
        let cells = vec![(end - start) / n as f64; n];
        Axis::from_cells(start, &cells, vec![start, end])
    }

    /// Uniform vertical field in a unit-ish box.
    fn uniform_field_solution() -> FieldSolution {
        let mesh = RectMesh {
            axes: vec![uniform_axis(0.0, 2e-6, 5), uniform_axis(0.0, 1e-6, 8)],
            cell_eps: vec![1.0; 40],
            cell_kind: vec![CellKind::Dielectric; 40],
            terminals: vec![],
            sheets: vec![],
            boundary: vec![
                BoundaryCondition::Neumann,
                BoundaryCondition::Neumann,
                BoundaryCondition::Dirichlet(0.0),
                BoundaryCondition::Dirichlet(1.0),
            ],
            tags: vec![],
            budget: 1 << 20,
        };
        solve(mesh, &SolveOptions::default()).unwrap()
    }

    #[test]
    fn box_energy_scales_with_clipped_volume() {
        let sol = uniform_field_solution();
        let all = sol
            .energy_in_box([0.0, 0.0, 0.0], [2e-6, 1e-6, 0.0])
            .unwrap();
        assert_relative_eq!(all, sol.total_energy(), max_relative = TOL_EXACT);
        // A box cutting cells mid-way still integrates exactly.
        let part = sol
            .energy_in_box([0.3e-6, 0.1e-6, 0.0], [1.1e-6, 0.475e-6, 0.0])
            .unwrap();
        let frac = (1.1 - 0.3) / 2.0 * ((0.475 - 0.1) / 1.0);
        assert_relative_eq!(part, sol.total_energy() * frac, max_relative = TOL_EXACT);
    }

    #[test]
    fn disjoint_box_is_an_error() {
        let sol = uniform_field_solution();
        let err = sol
            .energy_in_box([5e-6, 0.0, 0.0], [6e-6, 1e-6, 0.0])
            .unwrap_err();
        assert!(matches!(err, SolveError::RegionOutsideMesh { .. }));
    }

    #[test]
    fn missing_sheet_query_is_an_error() {
        let sol = uniform_field_solution();
        assert!(matches!(
            sol.surface_samples(0, PlaneSide::Below),
            Err(SolveError::InvalidQuery(_))
        ));
    }

    #[test]
    fn point_magnitude_matches_uniform_field() {
        let sol = uniform_field_solution();
        // |E| = V / height everywhere, including clamped rim queries.
        for p in [
            [1.0e-6, 0.5e-6, 0.0],
            [0.05e-6, 0.02e-6, 0.0],
            [2.0e-6, 1.0e-6, 0.0],
        ] {
            let e = sol.e_magnitude_at(p).unwrap();
            assert_relative_eq!(e, 1.0 / 1e-6, max_relative = 1e-9);
        }
        assert!(sol.e_magnitude_at([3e-6, 0.5e-6, 0.0]).is_err());
    }

    #[test]
    fn transfer_onto_same_mesh_is_identity() {
        let sol = uniform_field_solution();
        let copied = sol.interpolate_onto(sol.mesh());
        for (a, b) in copied.iter().zip(sol.phi()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
