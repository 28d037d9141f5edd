//! Surface-layer participation ratios from solved fields.
//!
//! The two-step decomposition: a global sheet-model solve supplies pad
//! surface fields and the total energy; fine cross-section and local lead
//! solves supply the edge and junction detail that the global mesh cannot
//! resolve. Edge integrals that diverge with mesh refinement are cut at the
//! band distance x0 and extrapolated with profile-derived scaling factors;
//! lead integrals are stitched to the global scale through a constant
//! measured on the lead centerline.

mod leads;
mod pads;
mod profile;
mod report;
mod weff;

pub use leads::{
    lead_cross_section_factor, lead_participation_far, lead_participation_near_mid,
    stitch_constant, LeadNearMid, Stitch, StitchExtent, FACTOR_SLICE_NEAR, FACTOR_SLICE_FAR,
    LOCAL_BOUNDARY_MIN, SEPARATION_TOL, STITCH_TOL,
};
pub use pads::{
    interior_participation, perimeter_participation, perimeter_participation_checked,
    PadInterior, PadPerimeter, BAND_CONVERGENCE_TOL,
};
pub use profile::{edge_profile, scaling_factors, EdgeProfile, ScalingFactors, X0_DEFAULT};
pub use report::{
    assemble_report, energy_shares, EnergyShares, FarSet, ParticipationReport, Provenance,
    ReportContext, ReportTolerances, U_TOT_MATCH_TOL,
};
pub use weff::{weff_calibrate, weff_lookup, WeffCurve};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Participation-stage failures.
#[derive(Debug, Error, PartialEq)]
pub enum ParticipationError {
    /// Component results were normalized by different total energies.
    #[error("inconsistent normalization across report parts: {0}")]
    InconsistentNormalization(String),

    /// Lead cross-section profiles change along the lead where they were
    /// assumed separable.
    #[error("lead cross-section factor violates separation by {deviation:.1}%")]
    SeparationViolated { deviation: f64 },

    #[error("requested value outside tabulated range: {0}")]
    OutOfRange(String),

    #[error("invalid participation request: {0}")]
    InvalidRequest(String),

    /// The solved cross-section is too small around the edge for the
    /// requested profile or band distance.
    #[error(
        "edge-profile validity window {window:.3e} m is smaller than the \
         required {needed:.3e} m"
    )]
    ProfileWindowTooSmall { window: f64, needed: f64 },

    /// The outer perimeter band has not converged on this mesh.
    #[error("outer perimeter band changed {change:.2}% under refinement")]
    NonConvergentBand { change: f64 },

    /// Global and local fields are not proportional on the stitch extent.
    #[error("stitch ratio deviates {max_dev:.2}% from constant")]
    StitchMismatch { max_dev: f64 },

    /// The local solve box is too small around the junction.
    #[error(
        "local boundary {distance:.2e} m from the junction is closer than \
         the required {required:.2e} m"
    )]
    BoundaryTooClose { distance: f64, required: f64 },

    /// Global centerline samples are unusable for the far integral.
    #[error("lead centerline not resolved in the global solution: {0}")]
    CenterlineDivergent(String),
}

impl ParticipationError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ParticipationError::InconsistentNormalization(_)
            | ParticipationError::SeparationViolated { .. }
            | ParticipationError::NonConvergentBand { .. }
            | ParticipationError::StitchMismatch { .. }
            | ParticipationError::CenterlineDivergent(_) => 4,
            ParticipationError::OutOfRange(_)
            | ParticipationError::InvalidRequest(_)
            | ParticipationError::ProfileWindowTooSmall { .. }
            | ParticipationError::BoundaryTooClose { .. } => 3,
        }
    }
}

/// One value per surface layer kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct InterfaceSet {
    /// Metal-substrate.
    pub ms: f64,
    /// Substrate-air.
    pub sa: f64,
    /// Metal-air.
    pub ma: f64,
}

impl InterfaceSet {
    pub fn plus(self, o: InterfaceSet) -> InterfaceSet {
        InterfaceSet {
            ms: self.ms + o.ms,
            sa: self.sa + o.sa,
            ma: self.ma + o.ma,
        }
    }

    pub fn minus(self, o: InterfaceSet) -> InterfaceSet {
        InterfaceSet {
            ms: self.ms - o.ms,
            sa: self.sa - o.sa,
            ma: self.ma - o.ma,
        }
    }

    pub fn scaled(self, k: f64) -> InterfaceSet {
        InterfaceSet {
            ms: self.ms * k,
            sa: self.sa * k,
            ma: self.ma * k,
        }
    }

    /// Sum over the three layer kinds.
    pub fn sum(self) -> f64 {
        self.ms + self.sa + self.ma
    }

    pub fn as_array(self) -> [f64; 3] {
        [self.ms, self.sa, self.ma]
    }
}
