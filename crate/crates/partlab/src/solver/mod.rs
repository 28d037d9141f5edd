//! Finite-volume electrostatics on graded rectilinear meshes.
//!
//! Solves div(eps grad phi) = 0 with conductor cells and zero-thickness
//! conductor sheets pinned to terminal potentials and grounded or insulated
//! outer walls. Face couplings use the harmonic mean of the two cell
//! permittivities, so piecewise-linear layered profiles are reproduced
//! exactly. The linear system is symmetric positive definite and is solved
//! by Jacobi-preconditioned conjugate gradients with deterministic
//! reductions: repeated runs produce bit-identical potentials.

mod field;

pub use field::{FieldSolution, PlaneSide, SurfaceSample};

use rayon::prelude::*;
use thiserror::Error;

use crate::mesh::{BoundaryCondition, CellKind, RectMesh};

/// Solver failures.
#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("no convergence after {iterations} iterations, relative residual {residual:.3e}")]
    NoConvergence { iterations: usize, residual: f64 },

    /// Nothing pins the potential anywhere: no conductors, no sheets, no
    /// grounded walls.
    #[error("singular system: no terminal or grounded boundary pins the potential")]
    SingularSystem,

    /// A field query referred to geometry the solution does not have.
    #[error("invalid field query: {0}")]
    InvalidQuery(String),

    /// A requested integration region lies entirely outside the mesh.
    #[error("region [{lo:?}, {hi:?}] lies outside the mesh")]
    RegionOutsideMesh { lo: [f64; 3], hi: [f64; 3] },
}

impl SolveError {
    pub fn exit_code(&self) -> i32 {
        match self {
            SolveError::NoConvergence { .. } | SolveError::SingularSystem => 4,
            SolveError::InvalidQuery(_) | SolveError::RegionOutsideMesh { .. } => 3,
        }
    }
}

/// Iteration controls. `rel_tol` is on the 2-norm of the residual relative
/// to the excitation vector.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub rel_tol: f64,
    pub max_iters: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            rel_tol: 1e-10,
            max_iters: 60_000,
        }
    }
}

/// What a cell sees across one of its faces.
enum Face {
    /// Coupled to the dielectric neighbor cell through resistance `r`
    /// (sum of half-cell distances over permittivities).
    Coupled { neighbor: usize, r: f64 },
    /// The face potential is pinned (conductor, sheet, or grounded wall).
    Fixed { phi: f64, r: f64 },
    /// Insulated (mirror plane or open-approximation wall).
    Insulated,
}

/// Per-cell geometry cached for face lookups.
pub(crate) struct FaceProbe<'m> {
    mesh: &'m RectMesh,
    shape: [usize; 3],
    strides: [usize; 3],
    /// Sheets grouped per axis as (plane, terms).
    sheets: Vec<Vec<(usize, &'m [i16])>>,
}

impl<'m> FaceProbe<'m> {
    pub(crate) fn new(mesh: &'m RectMesh) -> FaceProbe<'m> {
        let shape = mesh.shape();
        let strides = [1, shape[0], shape[0] * shape[1]];
        let mut sheets = vec![Vec::new(); 3];
        for sh in &mesh.sheets {
            sheets[sh.axis].push((sh.plane, sh.term.as_slice()));
        }
        FaceProbe {
            mesh,
            shape,
            strides,
            sheets,
        }
    }

    /// Index into a sheet's terminal grid for the cell `ijk`, skipping the
    /// sheet axis (remaining axes ordered, first fastest).
    fn sheet_other(&self, axis: usize, ijk: [usize; 3]) -> usize {
        match axis {
            0 => ijk[1] + self.shape[1] * ijk[2],
            1 => ijk[0] + self.shape[0] * ijk[2],
            _ => ijk[0] + self.shape[0] * ijk[1],
        }
    }

    /// Sheet terminal on the plane crossed when stepping from `ijk` along
    /// `axis` in direction `dir`, if that plane carries metal there.
    fn sheet_term(&self, axis: usize, dir: i32, ijk: [usize; 3]) -> Option<i16> {
        if self.sheets[axis].is_empty() {
            return None;
        }
        let plane = if dir > 0 { ijk[axis] + 1 } else { ijk[axis] };
        for &(p, terms) in &self.sheets[axis] {
            if p == plane {
                let t = terms[self.sheet_other(axis, ijk)];
                if t >= 0 {
                    return Some(t);
                }
            }
        }
        None
    }

    /// Face description for dielectric cell `idx` along `axis` toward
    /// `dir` (+1 or -1).
    fn face(&self, idx: usize, ijk: [usize; 3], axis: usize, dir: i32) -> Face {
        let mesh = self.mesh;
        let ax = &mesh.axes[axis];
        let half = 0.5 * ax.width(ijk[axis]);
        let eps_p = mesh.cell_eps[idx];

        if let Some(term) = self.sheet_term(axis, dir, ijk) {
            return Face::Fixed {
                phi: mesh.terminals[term as usize],
                r: half / eps_p,
            };
        }

        let at_wall = if dir > 0 {
            ijk[axis] + 1 == self.shape[axis]
        } else {
            ijk[axis] == 0
        };
        if at_wall {
            let side = 2 * axis + usize::from(dir > 0);
            return match mesh.boundary[side] {
                BoundaryCondition::Dirichlet(phi) => Face::Fixed {
                    phi,
                    r: half / eps_p,
                },
                BoundaryCondition::Neumann => Face::Insulated,
            };
        }

        let neighbor = (idx as isize + dir as isize * self.strides[axis] as isize) as usize;
        let mut njk = ijk;
        njk[axis] = (njk[axis] as isize + dir as isize) as usize;
        match mesh.cell_kind[neighbor] {
            CellKind::Conductor(term) => Face::Fixed {
                phi: mesh.terminals[term as usize],
                r: half / eps_p,
            },
            CellKind::Dielectric => {
                let nhalf = 0.5 * ax.width(njk[axis]);
                Face::Coupled {
                    neighbor,
                    r: half / eps_p + nhalf / mesh.cell_eps[neighbor],
                }
            }
        }
    }

    /// Signed normal flux density eps_r * E_n through the face of `idx`
    /// along `axis` toward `dir`, positive pointing in +axis direction.
    pub(crate) fn flux_density(&self, phi: &[f64], idx: usize, axis: usize, dir: i32) -> f64 {
        let ijk = self.mesh.unindex(idx);
        let sign = f64::from(dir);
        match self.face(idx, ijk, axis, dir) {
            Face::Coupled { neighbor, r } => sign * (phi[idx] - phi[neighbor]) / r,
            Face::Fixed { phi: pf, r } => sign * (phi[idx] - pf) / r,
            Face::Insulated => 0.0,
        }
    }

    fn face_area(&self, ijk: [usize; 3], axis: usize) -> f64 {
        let mut a = 1.0;
        for (k, ax) in self.mesh.axes.iter().enumerate() {
            if k != axis {
                a *= ax.width(ijk[k]);
            }
        }
        a
    }
}

/// Assembled sparse system in tensor-product form: `diag` and `rhs` per
/// cell, plus the coupling to the +axis neighbor per axis. Conductor cells
/// carry all-zero rows.
struct System {
    diag: Vec<f64>,
    rhs: Vec<f64>,
    /// Coupling to the i+1 / j+1 / k+1 neighbor, zero where severed.
    tplus: [Vec<f64>; 3],
    strides: [usize; 3],
    dim: usize,
    /// True for cells that participate in the linear system.
    active: Vec<bool>,
}

fn assemble(mesh: &RectMesh) -> Result<System, SolveError> {
    let n = mesh.n_cells();
    let probe = FaceProbe::new(mesh);
    let dim = mesh.dim();
    let mut diag = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut tplus = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut pinned = 0usize;

    for idx in 0..n {
        if mesh.is_conductor(idx) {
            continue;
        }
        let ijk = mesh.unindex(idx);
        for axis in 0..dim {
            let area = probe.face_area(ijk, axis);
            for dir in [-1i32, 1] {
                match probe.face(idx, ijk, axis, dir) {
                    Face::Coupled { r, .. } => {
                        let t = area / r;
                        diag[idx] += t;
                        if dir > 0 {
                            tplus[axis][idx] = t;
                        }
                    }
                    Face::Fixed { phi, r } => {
                        let t = area / r;
                        diag[idx] += t;
                        rhs[idx] += t * phi;
                        pinned += 1;
                    }
                    Face::Insulated => {}
                }
            }
        }
    }

    if pinned == 0 {
        return Err(SolveError::SingularSystem);
    }
    let active: Vec<bool> = (0..n)
        .map(|i| !mesh.is_conductor(i) && diag[i] > 0.0)
        .collect();
    Ok(System {
        diag,
        rhs,
        tplus,
        strides: [1, mesh.shape()[0], mesh.shape()[0] * mesh.shape()[1]],
        dim,
        active,
    })
}

impl System {
    /// y = A x, parallel over slabs of the slowest axis.
    fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let n = x.len();
        let slab = self.strides[self.dim.min(2)].max(1);
        let (tx, ty, tz) = (&self.tplus[0], &self.tplus[1], &self.tplus[2]);
        let (sx, sy, sz) = (self.strides[0], self.strides[1], self.strides[2]);
        let diag = &self.diag;
        let active = &self.active;
        let dim = self.dim;
        y.par_chunks_mut(slab).enumerate().for_each(|(c, out)| {
            let base = c * slab;
            for (o, yo) in out.iter_mut().enumerate() {
                let idx = base + o;
                if !active[idx] {
                    *yo = 0.0;
                    continue;
                }
                let mut acc = diag[idx] * x[idx];
                if idx >= sx && tx[idx - sx] != 0.0 {
                    acc -= tx[idx - sx] * x[idx - sx];
                }
                if tx[idx] != 0.0 {
                    acc -= tx[idx] * x[idx + sx];
                }
                if dim >= 2 {
                    if idx >= sy && ty[idx - sy] != 0.0 {
                        acc -= ty[idx - sy] * x[idx - sy];
                    }
                    if ty[idx] != 0.0 {
                        acc -= ty[idx] * x[idx + sy];
                    }
                }
                if dim >= 3 {
                    if idx >= sz && tz[idx - sz] != 0.0 {
                        acc -= tz[idx - sz] * x[idx - sz];
                    }
                    if tz[idx] != 0.0 {
                        acc -= tz[idx] * x[idx + sz];
                    }
                }
                *yo = acc;
            }
        });
        let _ = n;
    }
}

/// Deterministic dot product: fixed-size chunks reduced in parallel, then
/// summed in chunk order. Independent of thread count and scheduling.
pub(crate) fn det_dot(a: &[f64], b: &[f64]) -> f64 {
    const CHUNK: usize = 8192;
    let partials: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(ca, cb)| ca.iter().zip(cb).map(|(x, y)| x * y).sum::<f64>())
        .collect();
    partials.iter().sum()
}

/// Solves the mesh's electrostatic problem. The mesh is consumed: the
/// returned solution owns it alongside the potential and derived fields.
pub fn solve(mesh: RectMesh, opts: &SolveOptions) -> Result<FieldSolution, SolveError> {
    solve_with_guess(mesh, opts, None)
}

/// Like [`solve`], but seeds the iteration from a previous solution on a
/// coarser or equal mesh of the same domain (piecewise-constant transfer).
pub fn solve_warm(
    mesh: RectMesh,
    opts: &SolveOptions,
    prev: &FieldSolution,
) -> Result<FieldSolution, SolveError> {
    let guess = prev.interpolate_onto(&mesh);
    solve_with_guess(mesh, opts, Some(guess))
}

fn solve_with_guess(
    mesh: RectMesh,
    opts: &SolveOptions,
    guess: Option<Vec<f64>>,
) -> Result<FieldSolution, SolveError> {
    let sys = assemble(&mesh)?;
    let n = mesh.n_cells();

    let bb = det_dot(&sys.rhs, &sys.rhs);
    let mut x = match guess {
        Some(mut g) => {
            for (i, gi) in g.iter_mut().enumerate() {
                if !sys.active[i] {
                    *gi = 0.0;
                }
            }
            g
        }
        None => vec![0.0; n],
    };

    let mut iterations = 0usize;
    let mut rel = 0.0;
    if bb > 0.0 {
        let mut r = vec![0.0; n];
        let mut z = vec![0.0; n];
        let mut p = vec![0.0; n];
        let mut ap = vec![0.0; n];

        sys.matvec(&x, &mut r);
        r.par_iter_mut()
            .zip(&sys.rhs)
            .for_each(|(ri, &bi)| *ri = bi - *ri);
        apply_jacobi(&sys, &r, &mut z);
        p.copy_from_slice(&z);
        let mut rz = det_dot(&r, &z);
        rel = (det_dot(&r, &r) / bb).sqrt();

        while rel > opts.rel_tol {
            if iterations >= opts.max_iters {
                return Err(SolveError::NoConvergence {
                    iterations,
                    residual: rel,
                });
            }
            sys.matvec(&p, &mut ap);
            let pap = det_dot(&p, &ap);
            if !(pap > 0.0) {
                // Round-off exhausted the Krylov space; accept if close.
                if rel <= opts.rel_tol * 100.0 {
                    break;
                }
                return Err(SolveError::NoConvergence {
                    iterations,
                    residual: rel,
                });
            }
            let alpha = rz / pap;
            x.par_iter_mut().zip(&p).for_each(|(xi, &pi)| *xi += alpha * pi);
            r.par_iter_mut()
                .zip(&ap)
                .for_each(|(ri, &api)| *ri -= alpha * api);
            apply_jacobi(&sys, &r, &mut z);
            let rz_new = det_dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            p.par_iter_mut().zip(&z).for_each(|(pi, &zi)| *pi = zi + beta * *pi);
            iterations += 1;
            rel = (det_dot(&r, &r) / bb).sqrt();
        }
    }

    // Stamp terminal potentials into conductor cells for rendering and
    // one-sided gradients.
    for idx in 0..n {
        if let CellKind::Conductor(t) = mesh.cell_kind[idx] {
            x[idx] = mesh.terminals[t as usize];
        }
    }

    Ok(FieldSolution::from_phi(mesh, x, iterations, rel))
}

fn apply_jacobi(sys: &System, r: &[f64], z: &mut [f64]) {
    z.par_iter_mut()
        .zip(r.par_iter())
        .zip(sys.diag.par_iter())
        .zip(sys.active.par_iter())
        .for_each(|(((zi, &ri), &di), &ai)| {
            *zi = if ai { ri / di } else { 0.0 };
        });
}
