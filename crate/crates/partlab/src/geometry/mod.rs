//! Material stacks, device layouts, and the region taxonomy.
//!
//! Everything here is plain geometry: no meshes, no fields. Types are
//! immutable after construction and safe to share across threads.

mod cross_section;
mod layout;
mod polygon;
mod regions;
mod stack;

pub use cross_section::{CrossSectionSpec, CrossSectionStyle, SideBoundary};
pub use layout::{BoxDims, DeviceLayout, Junction, LeadSpec, PadSpec, PotentialLabel};
pub use polygon::Polygon;
pub use regions::{
    classify_lead_regions, partition_pad_regions, LeadArc, LeadRegionKind, LeadRegions, PadClass,
    RegionAreas, RegionSet,
};
pub use stack::{make_stack, MaterialStack};

use thiserror::Error;

/// Validation failures for stacks, layouts, and region partitions.
#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    /// A length or thickness that must be positive was zero or negative.
    #[error("{name} must be positive, got {value}")]
    NonPositiveDimension { name: &'static str, value: f64 },

    /// Relative permittivities below 1 are outside the model's regime.
    #[error("{name} must be >= 1, got {value}")]
    PermittivityBelowVacuum { name: &'static str, value: f64 },

    /// Surface layers must be thinner than the metal film they decorate.
    #[error("interface thickness {t_interface} m is not below film thickness {h_film} m")]
    InterfaceThickerThanFilm { t_interface: f64, h_film: f64 },

    /// The perimeter-band width does not fit the smallest pad feature or gap.
    #[error(
        "perimeter width x0 = {x0} m too large for minimum feature {min_feature} m \
         (requires 4*x0 <= min feature, use x0 = min/4 for small pads)"
    )]
    X0TooLarge { x0: f64, min_feature: f64 },

    /// A lead path does not terminate at the junction gap.
    #[error("lead '{label}' does not reach the junction: {reason}")]
    DisconnectedLead { label: String, reason: String },

    /// Structural problems in a layout or polygon definition.
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
}
