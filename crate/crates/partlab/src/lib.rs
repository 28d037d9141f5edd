//! Electrostatic participation-ratio toolkit for planar superconducting circuits.
//!
//! The crate solves Laplace problems on graded rectilinear meshes around
//! thin-film capacitor geometries, decomposes the stored field energy into
//! contributions from nanometer-scale surface dielectric layers (metal-substrate,
//! substrate-air, metal-air), and regresses measured relaxation times against
//! the resulting participation ratios to bound interface loss tangents.
//!
//! Modules follow the pipeline order:
//!
//! * [`geometry`] — material stacks, device layouts, region taxonomy
//! * [`mesh`] — graded tensor-product rectilinear meshes
//! * [`solver`] — finite-volume electrostatics with energy accessors
//! * [`participation`] — edge profiles, scaling factors, per-region p values
//! * [`lossfit`] — weighted linear regression of relaxation rates
//! * [`store`] — layouts, datasets, field maps, and the solve cache on disk

pub mod geometry;
pub mod lossfit;
pub mod mesh;
pub mod participation;
pub mod solver;
pub mod store;

/// Vacuum permittivity in F/m.
pub const EPS0: f64 = 8.8541878128e-12;

pub use geometry::{DeviceLayout, LeadRegions, MaterialStack, RegionSet};
pub use participation::ParticipationReport;
pub use solver::FieldSolution;

use thiserror::Error;

/// Any error the toolkit can produce, tagged by originating stage.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] geometry::GeometryError),
    #[error(transparent)]
    Mesh(#[from] mesh::MeshError),
    #[error(transparent)]
    Solve(#[from] solver::SolveError),
    #[error(transparent)]
    Participation(#[from] participation::ParticipationError),
    #[error(transparent)]
    Fit(#[from] lossfit::FitError),
    #[error(transparent)]
    Store(#[from] store::StoreError),
}

impl Error {
    /// Stable process exit code for batch front ends:
    /// 3 validation, 4 numeric failure, 5 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Geometry(_) => 3,
            Error::Mesh(_) => 3,
            Error::Solve(e) => e.exit_code(),
            Error::Participation(e) => e.exit_code(),
            Error::Fit(e) => e.exit_code(),
            Error::Store(_) => 5,
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
