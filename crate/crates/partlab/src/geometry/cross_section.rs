//! Two-dimensional edge cross-section specifications.
//!
//! A cross-section slices perpendicular to a long straight metal edge and
//! carries everything a 2D solve needs: the conductor layout along x, the
//! material stack, the window extents, and the outer boundary conditions.
//! The profiled edge always sits at x = 0 with metal on the +x side.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use super::{GeometryError, MaterialStack};

/// Conductor arrangement of a cross-section.
///
/// All styles share the edge-at-origin convention. `w` and `g` are the
/// conductor and gap widths; what sits beyond them differs per style:
///
/// * `Idc`: one cell of an interdigitated capacitor, from a gap center
///   (zero-potential plane at x = -g/2) to a finger center (mirror plane
///   at x = +w/2).
/// * `Cpw`: coplanar waveguide half-cell, center conductor against a
///   ground plane across the gap.
/// * `Cpc`: coplanar capacitor pad of width `w` facing its twin across
///   the gap, open space beyond the outer pad edge.
/// * `SingleEdge`: isolated edge, metal filling x > 0 to the wall and a
///   grounded wall a distance `g` into the gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossSectionStyle {
    Idc,
    Cpw,
    Cpc,
    SingleEdge,
}

impl fmt::Display for CrossSectionStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CrossSectionStyle::Idc => "idc",
            CrossSectionStyle::Cpw => "cpw",
            CrossSectionStyle::Cpc => "cpc",
            CrossSectionStyle::SingleEdge => "single_edge",
        };
        f.write_str(s)
    }
}

impl FromStr for CrossSectionStyle {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, GeometryError> {
        match s.to_ascii_lowercase().as_str() {
            "idc" => Ok(CrossSectionStyle::Idc),
            "cpw" => Ok(CrossSectionStyle::Cpw),
            "cpc" => Ok(CrossSectionStyle::Cpc),
            "single_edge" | "single-edge" | "edge" => Ok(CrossSectionStyle::SingleEdge),
            other => Err(GeometryError::InvalidLayout(format!(
                "unknown cross-section style '{other}' (expected idc, cpw, cpc, or single_edge)"
            ))),
        }
    }
}

/// Outer boundary treatment of one domain side.
///
/// `Symmetry` is a mirror plane (zero normal field), `Ground` a zero-potential
/// wall, and `OpenApprox` truncates open space with a zero-normal-field wall
/// far from the structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideBoundary {
    Symmetry,
    Ground,
    OpenApprox,
}

/// Full description of a 2D edge solve domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionSpec {
    pub style: CrossSectionStyle,
    /// Conductor width in meters.
    pub w: f64,
    /// Gap width in meters.
    pub g: f64,
    pub stack: MaterialStack,
    /// Lateral and vertical extent of the window in meters, measured from
    /// the structure; must be at least 3x the larger of `w` and `g`.
    pub window: f64,
    /// Sides ordered [x-, x+, z-, z+].
    pub boundary: [SideBoundary; 4],
}

impl CrossSectionSpec {
    /// Builds a spec with the style's natural boundaries and a default
    /// window of 4x the larger feature.
    pub fn new(
        style: CrossSectionStyle,
        w: f64,
        g: f64,
        stack: MaterialStack,
    ) -> Result<CrossSectionSpec, GeometryError> {
        let window = 4.0 * w.max(g);
        let spec = CrossSectionSpec {
            style,
            w,
            g,
            stack,
            window,
            boundary: default_boundaries(style),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Replaces the window extent, revalidating.
    pub fn with_window(mut self, window: f64) -> Result<CrossSectionSpec, GeometryError> {
        self.window = window;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.w > 0.0) {
            return Err(GeometryError::NonPositiveDimension {
                name: "w",
                value: self.w,
            });
        }
        if !(self.g > 0.0) {
            return Err(GeometryError::NonPositiveDimension {
                name: "g",
                value: self.g,
            });
        }
        let floor = 3.0 * self.w.max(self.g);
        if self.window < floor {
            return Err(GeometryError::InvalidLayout(format!(
                "cross-section window {} m is below the minimum 3*max(w, g) = {} m",
                self.window, floor
            )));
        }
        Ok(())
    }
}

/// Natural boundary set per style, ordered [x-, x+, z-, z+].
fn default_boundaries(style: CrossSectionStyle) -> [SideBoundary; 4] {
    use SideBoundary::*;
    match style {
        // Gap center is a zero-potential plane, finger center a mirror.
        CrossSectionStyle::Idc => [Ground, Symmetry, Ground, Ground],
        // Ground plane runs into the x- wall; center-conductor mirror at x+.
        CrossSectionStyle::Cpw => [Ground, Symmetry, Ground, Ground],
        // Twin-pad zero plane at x-, open space past the outer pad edge.
        CrossSectionStyle::Cpc => [Ground, OpenApprox, Ground, Ground],
        CrossSectionStyle::SingleEdge => [Ground, Symmetry, Ground, Ground],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_stack;

    fn stack() -> MaterialStack {
        make_stack(None, None, None, None).unwrap()
    }

    #[test]
    fn default_window_satisfies_floor() {
        let s = CrossSectionSpec::new(CrossSectionStyle::Idc, 10e-6, 10e-6, stack()).unwrap();
        assert_eq!(s.window, 40e-6);
        assert!(s.validate().is_ok());
    }

    #[test]
    fn undersized_window_rejected() {
        let s = CrossSectionSpec::new(CrossSectionStyle::Cpw, 10e-6, 5e-6, stack())
            .unwrap()
            .with_window(20e-6);
        assert!(matches!(s, Err(GeometryError::InvalidLayout(_))));
    }

    #[test]
    fn non_positive_widths_rejected() {
        let err =
            CrossSectionSpec::new(CrossSectionStyle::Idc, 0.0, 10e-6, stack()).unwrap_err();
        assert!(matches!(
            err,
            GeometryError::NonPositiveDimension { name: "w", .. }
        ));
        let err =
            CrossSectionSpec::new(CrossSectionStyle::Idc, 10e-6, -1e-6, stack()).unwrap_err();
        assert!(matches!(
            err,
            GeometryError::NonPositiveDimension { name: "g", .. }
        ));
    }

    #[test]
    fn style_names_round_trip() {
        for style in [
            CrossSectionStyle::Idc,
            CrossSectionStyle::Cpw,
            CrossSectionStyle::Cpc,
            CrossSectionStyle::SingleEdge,
        ] {
            let parsed: CrossSectionStyle = style.to_string().parse().unwrap();
            assert_eq!(parsed, style);
        }
        assert!("ring".parse::<CrossSectionStyle>().is_err());
    }

    #[test]
    fn idc_defaults_are_symmetric() {
        let s = CrossSectionSpec::new(CrossSectionStyle::Idc, 10e-6, 10e-6, stack()).unwrap();
        assert_eq!(s.boundary[0], SideBoundary::Ground);
        assert_eq!(s.boundary[1], SideBoundary::Symmetry);
    }
}
