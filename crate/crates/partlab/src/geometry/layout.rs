//! Full device layouts: pads, leads, junction, substrate, and enclosure.

use super::polygon::Polygon;
use super::GeometryError;
use serde::{Deserialize, Serialize};

/// Drive polarity of an electrode. The solver applies +V/2 and -V/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PotentialLabel {
    Plus,
    Minus,
}

impl PotentialLabel {
    /// Electrode potential in volts under the unit-drive convention.
    pub fn potential(self) -> f64 {
        match self {
            PotentialLabel::Plus => 0.5,
            PotentialLabel::Minus => -0.5,
        }
    }
}

/// A capacitor pad: a wide (> 1 um) rectilinear electrode outline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PadSpec {
    pub polygon: Polygon,
    pub label: PotentialLabel,
}

/// A narrow (<= 1 um) trace from the junction region to a pad.
///
/// The path runs tip-first: `path[0]` is the end nearest the junction and
/// the last vertex lies on the pad outline. Arc length along the lead is
/// measured from `path[0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadSpec {
    pub width: f64,
    pub path: Vec<[f64; 2]>,
    pub label: PotentialLabel,
}

impl LeadSpec {
    /// Total arc length of the path.
    pub fn length(&self) -> f64 {
        self.path
            .windows(2)
            .map(|s| (s[1][0] - s[0][0]).abs() + (s[1][1] - s[0][1]).abs())
            .sum()
    }

    /// Point at arc length `y` from the tip, clamped to the path end.
    pub fn point_at(&self, y: f64) -> [f64; 2] {
        let mut remaining = y.max(0.0);
        for s in self.path.windows(2) {
            let seg = (s[1][0] - s[0][0]).abs() + (s[1][1] - s[0][1]).abs();
            if remaining <= seg {
                let f = if seg > 0.0 { remaining / seg } else { 0.0 };
                return [
                    s[0][0] + f * (s[1][0] - s[0][0]),
                    s[0][1] + f * (s[1][1] - s[0][1]),
                ];
            }
            remaining -= seg;
        }
        *self.path.last().expect("lead path is non-empty")
    }

    /// Drawn-metal rectangles: one per segment, inflated to the lead width
    /// perpendicular to the run only (caps are flat, so the tip metal ends
    /// exactly at `path[0]`), plus a width-square patching the outer corner
    /// notch at each bend.
    pub fn footprint(&self) -> Vec<([f64; 2], [f64; 2])> {
        let half = self.width / 2.0;
        let mut rects: Vec<([f64; 2], [f64; 2])> = self
            .path
            .windows(2)
            .map(|s| {
                let cross = usize::from(s[0][1] == s[1][1]);
                let mut lo = [s[0][0].min(s[1][0]), s[0][1].min(s[1][1])];
                let mut hi = [s[0][0].max(s[1][0]), s[0][1].max(s[1][1])];
                lo[cross] -= half;
                hi[cross] += half;
                (lo, hi)
            })
            .collect();
        for v in &self.path[1..self.path.len().saturating_sub(1)] {
            rects.push(([v[0] - half, v[1] - half], [v[0] + half, v[1] + half]));
        }
        rects
    }

    /// Chebyshev distance from a point to the lead footprint (0 inside).
    pub fn linf_distance(&self, p: [f64; 2]) -> f64 {
        let mut best = f64::INFINITY;
        for (lo, hi) in self.footprint() {
            let dx = (lo[0] - p[0]).max(p[0] - hi[0]).max(0.0);
            let dy = (lo[1] - p[1]).max(p[1] - hi[1]).max(0.0);
            best = best.min(dx.max(dy));
        }
        best
    }
}

/// Junction location and the lumped gap left between the lead tips.
///
/// The junction itself is omitted from field models; the two lead tips stop
/// at `gap`/2 on either side of `point`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Junction {
    pub point: [f64; 2],
    pub gap: f64,
}

/// Axis-aligned box in meters, corner to corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxDims {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl BoxDims {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Result<Self, GeometryError> {
        for k in 0..3 {
            if !(max[k] > min[k]) {
                return Err(GeometryError::InvalidLayout(format!(
                    "box extent along axis {} is empty: [{}, {}]",
                    k, min[k], max[k]
                )));
            }
        }
        Ok(BoxDims { min, max })
    }

    pub fn size(&self, axis: usize) -> f64 {
        self.max[axis] - self.min[axis]
    }

    pub fn contains_box(&self, inner: &BoxDims) -> bool {
        (0..3).all(|k| self.min[k] <= inner.min[k] && inner.max[k] <= self.max[k])
    }
}

/// Complete planar device: two driven electrodes (pads plus their leads),
/// a lumped junction gap, the substrate slab, and the grounded enclosure.
///
/// Metal sits on the substrate top face, which is always the z = 0 plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceLayout {
    pub name: String,
    pub pads: Vec<PadSpec>,
    pub leads: Vec<LeadSpec>,
    pub junction: Junction,
    pub substrate: BoxDims,
    pub enclosure: BoxDims,
}

/// Widths at or below this are leads; strictly above are pads.
pub const LEAD_WIDTH_THRESHOLD: f64 = 1e-6;

impl DeviceLayout {
    /// Validates all structural invariants and returns the layout.
    pub fn new(
        name: String,
        pads: Vec<PadSpec>,
        leads: Vec<LeadSpec>,
        junction: Junction,
        substrate: BoxDims,
        enclosure: BoxDims,
    ) -> Result<Self, GeometryError> {
        let layout = DeviceLayout {
            name,
            pads,
            leads,
            junction,
            substrate,
            enclosure,
        };
        layout.validate()?;
        Ok(layout)
    }

    fn validate(&self) -> Result<(), GeometryError> {
        if self.pads.is_empty() {
            return Err(GeometryError::InvalidLayout("no pads defined".into()));
        }
        let has = |l: PotentialLabel| self.pads.iter().any(|p| p.label == l);
        if !(has(PotentialLabel::Plus) && has(PotentialLabel::Minus)) {
            return Err(GeometryError::InvalidLayout(
                "both potential labels (+/-) must appear among the pads".into(),
            ));
        }
        if !(self.junction.gap > 0.0) {
            return Err(GeometryError::NonPositiveDimension {
                name: "junction.gap",
                value: self.junction.gap,
            });
        }
        for pad in &self.pads {
            if pad.polygon.min_edge_length() <= LEAD_WIDTH_THRESHOLD {
                return Err(GeometryError::InvalidLayout(format!(
                    "pad feature width {} m is not above the 1 um pad/lead threshold",
                    pad.polygon.min_edge_length()
                )));
            }
        }
        for (i, lead) in self.leads.iter().enumerate() {
            if !(lead.width > 0.0) {
                return Err(GeometryError::NonPositiveDimension {
                    name: "lead.width",
                    value: lead.width,
                });
            }
            if lead.width > LEAD_WIDTH_THRESHOLD {
                return Err(GeometryError::InvalidLayout(format!(
                    "lead {} width {} m exceeds the 1 um pad/lead threshold",
                    i, lead.width
                )));
            }
            if lead.path.len() < 2 {
                return Err(GeometryError::InvalidLayout(format!(
                    "lead {} path needs at least 2 vertices",
                    i
                )));
            }
            for (k, s) in lead.path.windows(2).enumerate() {
                let horizontal = s[0][1] == s[1][1] && s[0][0] != s[1][0];
                let vertical = s[0][0] == s[1][0] && s[0][1] != s[1][1];
                if !(horizontal || vertical) {
                    return Err(GeometryError::InvalidLayout(format!(
                        "lead {} segment {} is not axis-aligned or has zero length",
                        i, k
                    )));
                }
            }
            // The far end must land on the labeled pad's outline.
            let tail = *lead.path.last().expect("checked non-empty");
            let attached = self
                .pads
                .iter()
                .filter(|p| p.label == lead.label)
                .any(|p| p.polygon.linf_boundary_distance(tail) < 1e-12);
            if !attached {
                return Err(GeometryError::InvalidLayout(format!(
                    "lead {} tail ({}, {}) does not lie on a pad outline with its label",
                    i, tail[0], tail[1]
                )));
            }
        }
        if !self.enclosure.contains_box(&self.substrate) {
            return Err(GeometryError::InvalidLayout(
                "substrate box extends outside the enclosure".into(),
            ));
        }
        if self.substrate.max[2] != 0.0 {
            return Err(GeometryError::InvalidLayout(format!(
                "substrate top face must be the z = 0 plane, got z = {}",
                self.substrate.max[2]
            )));
        }
        for pad in &self.pads {
            let (lo, hi) = pad.polygon.bbox();
            let inside = lo[0] >= self.substrate.min[0]
                && hi[0] <= self.substrate.max[0]
                && lo[1] >= self.substrate.min[1]
                && hi[1] <= self.substrate.max[1];
            if !inside {
                return Err(GeometryError::InvalidLayout(
                    "pad extends beyond the substrate footprint".into(),
                ));
            }
        }
        Ok(())
    }

    /// Chebyshev distance from a point on the metal plane to the nearest lead.
    pub fn lead_distance(&self, p: [f64; 2]) -> f64 {
        self.leads
            .iter()
            .map(|l| l.linf_distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// True if the point lies inside any pad outline.
    pub fn inside_any_pad(&self, p: [f64; 2]) -> bool {
        self.pads.iter().any(|pad| pad.polygon.contains(p))
    }

    /// Electrode potential at a metal-plane point, if it is on metal.
    pub fn metal_potential(&self, p: [f64; 2]) -> Option<f64> {
        for pad in &self.pads {
            if pad.polygon.contains(p) {
                return Some(pad.label.potential());
            }
        }
        for lead in &self.leads {
            for (lo, hi) in lead.footprint() {
                if p[0] > lo[0] && p[0] < hi[0] && p[1] > lo[1] && p[1] < hi[1] {
                    return Some(lead.label.potential());
                }
            }
        }
        None
    }
}
