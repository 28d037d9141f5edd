//! Graded tensor-product rectilinear meshes.
//!
//! An axis is a strictly increasing list of plane coordinates; a mesh is 2
//! or 3 axes plus per-cell material data. Cells grow geometrically away
//! from declared anchors (metal edges, layer boundaries) so that 0.5 nm
//! resolution at a film edge coexists with millimeter cells at the
//! enclosure wall. All material interfaces land exactly on mesh planes.

mod build;
mod fill;

pub use build::{
    build_cross_section, build_global, build_local_lead, CrossSectionMeshOptions,
    GlobalMeshOptions, LocalLeadSpec,
};

use thiserror::Error;

/// Mesh construction and refinement failures.
#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("anchor at {anchor} lies outside the axis domain [{start}, {end}]")]
    AnchorOutsideDomain { anchor: f64, start: f64, end: f64 },

    #[error("mesh would have {cells} cells, over the budget of {budget}")]
    BudgetExceeded { cells: usize, budget: usize },

    #[error("refinement factor must be 2, 3, or 4, got {factor}")]
    InvalidRefineFactor { factor: usize },

    #[error("invalid mesh spec: {0}")]
    InvalidSpec(String),
}

/// Cell count per axis above which construction logs a size warning.
pub const AXIS_WARN_CELLS: usize = 1_000_000;

/// Default cell budgets by dimensionality.
pub const BUDGET_2D: usize = 4_000_000;
pub const BUDGET_3D: usize = 20_000_000;

/// One mesh axis: n+1 plane coordinates bounding n cells, plus the anchor
/// positions that were required to land on planes.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    coords: Vec<f64>,
    anchors: Vec<f64>,
}

impl Axis {
    /// Assembles an axis from cell widths laid out from `start`.
    pub fn from_cells(start: f64, cells: &[f64], anchors: Vec<f64>) -> Axis {
        let mut coords = Vec::with_capacity(cells.len() + 1);
        let mut x = start;
        coords.push(x);
        for &c in cells {
            x += c;
            coords.push(x);
        }
        Axis { coords, anchors }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn anchors(&self) -> &[f64] {
        &self.anchors
    }

    pub fn n_cells(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn start(&self) -> f64 {
        self.coords[0]
    }

    pub fn end(&self) -> f64 {
        *self.coords.last().expect("axis has coordinates")
    }

    pub fn width(&self, i: usize) -> f64 {
        self.coords[i + 1] - self.coords[i]
    }

    pub fn center(&self, i: usize) -> f64 {
        0.5 * (self.coords[i] + self.coords[i + 1])
    }

    /// Cell index containing `x`, or None outside the axis.
    pub fn find_cell(&self, x: f64) -> Option<usize> {
        if x < self.start() || x > self.end() {
            return None;
        }
        let i = self.coords.partition_point(|&c| c <= x);
        Some(i.saturating_sub(1).min(self.n_cells() - 1))
    }

    /// Index of the plane at coordinate `x`, if one lies within `tol`.
    pub fn plane_index(&self, x: f64, tol: f64) -> Option<usize> {
        let i = self.coords.partition_point(|&c| c < x);
        for cand in [i.wrapping_sub(1), i, i + 1] {
            if cand < self.coords.len() && (self.coords[cand] - x).abs() <= tol {
                return Some(cand);
            }
        }
        None
    }
}

///// Builds a graded axis: geometric growth away from each anchor at the
/// given ratio, cells no larger than `min_cell` at every anchor. The domain
/// endpoints are treated as anchors, so growth from a single interior
/// anchor meets the symmetric front from each wall.
pub fn graded_axis(
    start: f64,
    end: f64,
    anchors: &[f64],
    min_cell: f64,
    ratio: f64,
) -> Result<Axis, MeshError> {
    if !(start < end) {
        return Err(MeshError::InvalidSpec(format!(
            "axis start {} must be below end {}",
            start, end
        )));
    }
    if !(min_cell > 0.0) {
        return Err(MeshError::InvalidSpec(format!(
            "min_cell must be positive, got {}",
            min_cell
        )));
    }
    if !(ratio > 1.0 && ratio <= 1.5) {
        return Err(MeshError::InvalidSpec(format!(
            "grading ratio must be in (1, 1.5], got {}",
            ratio
        )));
    }
    let mut points: Vec<AnchorPoint> = vec![
        AnchorPoint { pos: start, min_cell },
        AnchorPoint { pos: end, min_cell },
    ];
    for &a in anchors {
        if a < start || a > end {
            return Err(MeshError::AnchorOutsideDomain {
                anchor: a,
                start,
                end,
            });
        }
        points.push(AnchorPoint { pos: a, min_cell });
    }
    build_axis(points, ratio, &|_| f64::INFINITY)
}

/// An anchored plane with the cell size required next to it.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AnchorPoint {
    pub pos: f64,
    pub min_cell: f64,
}

/// Assembles an axis from anchor points: consecutive anchors bound segments
/// that are filled independently (two-sided geometric fills), so every
/// anchor position becomes a mesh plane.
pub(crate) fn build_axis(
    mut points: Vec<AnchorPoint>,
    ratio: f64,
    cap_at: &dyn Fn(f64) -> f64,
) -> Result<Axis, MeshError> {
    points.sort_by(|a, b| a.pos.partial_cmp(&b.pos).expect("finite anchors"));
    // Merge coincident anchors, keeping the strictest minimum.
    let mut merged: Vec<AnchorPoint> = Vec::with_capacity(points.len());
    for p in points {
        match merged.last_mut() {
            Some(last) if p.pos == last.pos => last.min_cell = last.min_cell.min(p.min_cell),
            Some(last) if p.pos - last.pos < 1e-15 * p.pos.abs().max(1.0) => {
                last.min_cell = last.min_cell.min(p.min_cell)
            }
            _ => merged.push(p),
        }
    }
    if merged.len() < 2 {
        return Err(MeshError::InvalidSpec(
            "axis needs at least two distinct anchor points".into(),
        ));
    }
    // Accumulate coordinates per segment and pin each anchor exactly, so
    // material interfaces land on planes with no float drift.
    let mut coords = vec![merged[0].pos];
    for w in merged.windows(2) {
        let len = w[1].pos - w[0].pos;
        let cap = cap_at(0.5 * (w[0].pos + w[1].pos));
        let cells = fill::fill_two_sided(
            len,
            w[0].min_cell.min(cap),
            w[1].min_cell.min(cap),
            ratio,
            cap,
        );
        let mut x = w[0].pos;
        for &c in &cells[..cells.len() - 1] {
            x += c;
            coords.push(x);
        }
        coords.push(w[1].pos);
    }
    let anchors = merged.iter().map(|p| p.pos).collect();
    let axis = Axis { coords, anchors };
    if axis.n_cells() > AXIS_WARN_CELLS {
        log::warn!(
            "axis [{}, {}] has {} cells; expect slow solves",
            axis.start(),
            axis.end(),
            axis.n_cells()
        );
    }
    Ok(axis)
}

/// What occupies a cell: dielectric with a permittivity from `cell_eps`,
/// or conductor pinned to a terminal potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Dielectric,
    Conductor(u8),
}

/// Surface-layer tag a builder assigns to cells of explicitly resolved
/// interface layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterfaceTag {
    /// Bulk material, no layer.
    None,
    /// Metal-substrate layer (under metal, just below the film).
    Ms,
    /// Substrate-air layer (exposed substrate surface).
    Sa,
    /// Metal-air layer (film top and sidewalls).
    Ma,
}

/// Zero-thickness conductor sheet occupying cell faces on one mesh plane.
///
/// `plane` indexes a coordinate of `axes[axis]`; `term` holds a terminal id
/// per cell of the plane (indexed over the remaining axes, first fastest),
/// or -1 where the plane is not metalized.
#[derive(Debug, Clone, PartialEq)]
pub struct SheetPlane {
    pub axis: usize,
    pub plane: usize,
    pub term: Vec<i16>,
}

/// Outer boundary condition of one domain side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    Dirichlet(f64),
    Neumann,
}

/// Tensor-product mesh with material assignment.
///
/// Cell storage is row-major with the x index fastest: for a 3D mesh the
/// cell (i, j, k) lives at `i + nx*(j + ny*k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RectMesh {
    pub axes: Vec<Axis>,
    /// Relative permittivity per cell (1.0 placeholder inside conductors).
    pub cell_eps: Vec<f64>,
    pub cell_kind: Vec<CellKind>,
    /// Terminal potentials in volts, indexed by `CellKind::Conductor` ids
    /// and `SheetPlane::term` entries.
    pub terminals: Vec<f64>,
    pub sheets: Vec<SheetPlane>,
    /// Per side, ordered [x-, x+, y-, y+, z-, z+] (first 4 in 2D).
    pub boundary: Vec<BoundaryCondition>,
    /// Surface-layer tags; empty when the mesh has no explicit layers.
    pub tags: Vec<InterfaceTag>,
    /// Cell budget this mesh was built under; refinement re-checks it.
    pub budget: usize,
}

impl RectMesh {
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Cells per axis, padded with 1 for absent axes.
    pub fn shape(&self) -> [usize; 3] {
        let mut s = [1usize; 3];
        for (k, ax) in self.axes.iter().enumerate() {
            s[k] = ax.n_cells();
        }
        s
    }

    pub fn n_cells(&self) -> usize {
        self.axes.iter().map(|a| a.n_cells()).product()
    }

    pub fn index(&self, ijk: [usize; 3]) -> usize {
        let s = self.shape();
        ijk[0] + s[0] * (ijk[1] + s[1] * ijk[2])
    }

    /// Inverse of `index`.
    pub fn unindex(&self, idx: usize) -> [usize; 3] {
        let s = self.shape();
        [idx % s[0], (idx / s[0]) % s[1], idx / (s[0] * s[1])]
    }

    pub fn cell_center(&self, ijk: [usize; 3]) -> [f64; 3] {
        let mut c = [0.0; 3];
        for (k, ax) in self.axes.iter().enumerate() {
            c[k] = ax.center(ijk[k]);
        }
        c
    }

    pub fn cell_volume(&self, ijk: [usize; 3]) -> f64 {
        self.axes
            .iter()
            .enumerate()
            .map(|(k, ax)| ax.width(ijk[k]))
            .product()
    }

    pub fn is_conductor(&self, idx: usize) -> bool {
        matches!(self.cell_kind[idx], CellKind::Conductor(_))
    }

    /// Sheet terminal at a plane cell, if the mesh has a sheet on `axis`
    /// between cells `plane-1` and `plane`.
    pub fn sheet_at(&self, axis: usize, plane: usize, other: usize) -> Option<i16> {
        for sh in &self.sheets {
            if sh.axis == axis && sh.plane == plane {
                let t = sh.term[other];
                return if t >= 0 { Some(t) } else { None };
            }
        }
        None
    }
}

/// Splits every cell `factor` times per axis, resampling materials exactly.
///
/// Factor 4 is performed as two factor-2 passes so the coordinates of
/// `refine(refine(m, 2), 2)` and `refine(m, 4)` are bit-identical.
pub fn refine_mesh(mesh: &RectMesh, factor: usize) -> Result<RectMesh, MeshError> {
    match factor {
        2 | 3 => refine_once(mesh, factor),
        4 => refine_once(&refine_once(mesh, 2)?, 2),
        _ => Err(MeshError::InvalidRefineFactor { factor }),
    }
}

fn refine_once(mesh: &RectMesh, factor: usize) -> Result<RectMesh, MeshError> {
    let new_cells = mesh.n_cells() * factor.pow(mesh.dim() as u32);
    if new_cells > mesh.budget {
        return Err(MeshError::BudgetExceeded {
            cells: new_cells,
            budget: mesh.budget,
        });
    }
    let axes: Vec<Axis> = mesh
        .axes
        .iter()
        .map(|ax| {
            let mut coords = Vec::with_capacity(ax.n_cells() * factor + 1);
            for i in 0..ax.n_cells() {
                let (a, b) = (ax.coords[i], ax.coords[i + 1]);
                coords.push(a);
                for k in 1..factor {
                    coords.push(a + (b - a) * (k as f64) / (factor as f64));
                }
            }
            coords.push(ax.end());
            Axis {
                coords,
                anchors: ax.anchors.clone(),
            }
        })
        .collect();

    let old_shape = mesh.shape();
    let shape: [usize; 3] = {
        let mut s = [1usize; 3];
        for k in 0..mesh.dim() {
            s[k] = old_shape[k] * factor;
        }
        s
    };
    let n = shape[0] * shape[1] * shape[2];
    let mut cell_eps = Vec::with_capacity(n);
    let mut cell_kind = Vec::with_capacity(n);
    let mut tags = Vec::with_capacity(if mesh.tags.is_empty() { 0 } else { n });
    for k in 0..shape[2] {
        for j in 0..shape[1] {
            for i in 0..shape[0] {
                let old = mesh.index([
                    i / factor,
                    if mesh.dim() >= 2 { j / factor } else { j },
                    if mesh.dim() >= 3 { k / factor } else { k },
                ]);
                cell_eps.push(mesh.cell_eps[old]);
                cell_kind.push(mesh.cell_kind[old]);
                if !mesh.tags.is_empty() {
                    tags.push(mesh.tags[old]);
                }
            }
        }
    }

    let sheets = mesh
        .sheets
        .iter()
        .map(|sh| {
            // Terminal grid over the axes other than sh.axis.
            let others: Vec<usize> = (0..mesh.dim()).filter(|&a| a != sh.axis).collect();
            let old_dims: Vec<usize> = others.iter().map(|&a| old_shape[a]).collect();
            let new_dims: Vec<usize> = old_dims.iter().map(|&d| d * factor).collect();
            let mut term = Vec::with_capacity(new_dims.iter().product());
            match new_dims.len() {
                1 => {
                    for i in 0..new_dims[0] {
                        term.push(sh.term[i / factor]);
                    }
                }
                2 => {
                    for j in 0..new_dims[1] {
                        for i in 0..new_dims[0] {
                            term.push(sh.term[(i / factor) + old_dims[0] * (j / factor)]);
                        }
                    }
                }
                _ => unreachable!("meshes are 2D or 3D"),
            }
            SheetPlane {
                axis: sh.axis,
                plane: sh.plane * factor,
                term,
            }
        })
        .collect();

    Ok(RectMesh {
        axes,
        cell_eps,
        cell_kind,
        terminals: mesh.terminals.clone(),
        sheets,
        boundary: mesh.boundary.clone(),
        tags,
        budget: mesh.budget,
    })
}
