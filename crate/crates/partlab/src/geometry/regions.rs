//! Region taxonomy: interior/perimeter pad bands and near/mid/far lead spans.
//!
//! Pad surfaces split into an interior and two concentric perimeter bands
//! measured from the pad edge; the exposed substrate around each pad splits
//! into the mirror bands. Distances are Chebyshev (L-infinity), which for
//! rectilinear outlines is exactly the edge-offset construction, so band
//! boundaries are straight lines on a known coordinate grid and all areas
//! are computed exactly rather than sampled.

use super::layout::DeviceLayout;
use super::polygon::Polygon;
use super::GeometryError;
use std::collections::{BTreeMap, BTreeSet};

/// Near/mid boundaries of the lead taxonomy, in meters of arc length.
pub const LEAD_NEAR_MAX: f64 = 1e-6;
pub const LEAD_MID_MAX: f64 = 10e-6;

/// Classification of a point on the metal plane (z = 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PadClass {
    /// On a pad, at least x0 from its edge.
    Interior,
    /// On a pad, between x0/2 and x0 from its edge.
    PerimeterOuter,
    /// On a pad, within x0/2 of its edge.
    PerimeterInner,
    /// Exposed substrate within x0/2 of a pad edge.
    SaInner,
    /// Exposed substrate between x0/2 and x0 from a pad edge.
    SaOuter,
    /// Exposed substrate beyond x0 from every pad edge.
    SaOpen,
    /// On a lead trace.
    LeadMetal,
    /// Exposed substrate within 1 um of a lead edge; owned by the lead
    /// accounting, not the pad accounting.
    LeadSa,
}

/// Exact areas of the bounded pad-derived regions, in m^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionAreas {
    pub interior: f64,
    pub perimeter_inner: f64,
    pub perimeter_outer: f64,
    pub sa_inner: f64,
    pub sa_outer: f64,
}

/// Pad region decomposition at a fixed band width x0.
#[derive(Debug, Clone)]
pub struct RegionSet {
    pads: Vec<Polygon>,
    lead_rects: Vec<([f64; 2], [f64; 2])>,
    /// Inset pad outlines (distance >= x0 from every edge), reconstructed
    /// exactly from the band decomposition.
    pub interior: Vec<Polygon>,
    pub x0: f64,
    areas: RegionAreas,
    crit_x: Vec<f64>,
    crit_y: Vec<f64>,
}

/// Builds the interior/perimeter/SA decomposition of every pad.
///
/// The band width must satisfy 4*x0 <= min(feature width, gap) so that the
/// two bands fit inside each feature from both sides; small-pad callers
/// should fall back to x0 = min/4.
pub fn partition_pad_regions(
    layout: &DeviceLayout,
    x0: f64,
) -> Result<RegionSet, GeometryError> {
    let pads: Vec<Polygon> = layout.pads.iter().map(|p| p.polygon.clone()).collect();
    let min_feature = min_feature_and_gap(&pads);
    if !(x0 > 0.0) || 4.0 * x0 > min_feature {
        return Err(GeometryError::X0TooLarge { x0, min_feature });
    }

    let mut lead_rects = Vec::new();
    for lead in &layout.leads {
        lead_rects.extend(lead.footprint());
    }

    let (crit_x, crit_y) = critical_coords(&pads, &lead_rects, x0);
    let mut set = RegionSet {
        pads,
        lead_rects,
        interior: Vec::new(),
        x0,
        areas: RegionAreas {
            interior: 0.0,
            perimeter_inner: 0.0,
            perimeter_outer: 0.0,
            sa_inner: 0.0,
            sa_outer: 0.0,
        },
        crit_x,
        crit_y,
    };
    let interior_tiles = set.accumulate_tile_areas();
    set.interior = trace_tile_union(&interior_tiles, &set.crit_x, &set.crit_y)?;
    Ok(set)
}

impl RegionSet {
    /// Exact areas of the bounded regions.
    pub fn areas(&self) -> &RegionAreas {
        &self.areas
    }

    pub fn pads(&self) -> &[Polygon] {
        &self.pads
    }

    /// Classifies a metal-plane point. Pad membership wins over lead
    /// membership (relevant only on the attachment overlap), and lead
    /// ownership of nearby substrate wins over the pad SA bands.
    pub fn classify(&self, p: [f64; 2]) -> PadClass {
        let mut inside = None;
        for pad in &self.pads {
            if pad.contains(p) {
                inside = Some(pad);
                break;
            }
        }
        if let Some(pad) = inside {
            let d = pad.linf_boundary_distance(p);
            return if d >= self.x0 {
                PadClass::Interior
            } else if d >= self.x0 / 2.0 {
                PadClass::PerimeterOuter
            } else {
                PadClass::PerimeterInner
            };
        }
        for (lo, hi) in &self.lead_rects {
            if p[0] >= lo[0] && p[0] <= hi[0] && p[1] >= lo[1] && p[1] <= hi[1] {
                return PadClass::LeadMetal;
            }
        }
        let d_lead = self
            .lead_rects
            .iter()
            .map(|(lo, hi)| {
                let dx = (lo[0] - p[0]).max(p[0] - hi[0]).max(0.0);
                let dy = (lo[1] - p[1]).max(p[1] - hi[1]).max(0.0);
                dx.max(dy)
            })
            .fold(f64::INFINITY, f64::min);
        if d_lead <= LEAD_NEAR_MAX {
            return PadClass::LeadSa;
        }
        let d = self
            .pads
            .iter()
            .map(|pad| pad.linf_boundary_distance(p))
            .fold(f64::INFINITY, f64::min);
        if d < self.x0 / 2.0 {
            PadClass::SaInner
        } else if d < self.x0 {
            PadClass::SaOuter
        } else {
            PadClass::SaOpen
        }
    }

    /// Splits an axis-aligned rectangle into per-class exact areas.
    ///
    /// Class boundaries all lie on the critical-coordinate grid, so cutting
    /// the rectangle at interior grid lines yields sub-tiles of uniform
    /// class; each sub-tile is classified by its center.
    pub fn rect_class_areas(&self, lo: [f64; 2], hi: [f64; 2]) -> Vec<(PadClass, f64)> {
        let xs = cuts_within(&self.crit_x, lo[0], hi[0]);
        let ys = cuts_within(&self.crit_y, lo[1], hi[1]);
        let mut out: Vec<(PadClass, f64)> = Vec::new();
        for ix in 0..xs.len() - 1 {
            for iy in 0..ys.len() - 1 {
                let area = (xs[ix + 1] - xs[ix]) * (ys[iy + 1] - ys[iy]);
                if area <= 0.0 {
                    continue;
                }
                let class = self.classify([
                    0.5 * (xs[ix] + xs[ix + 1]),
                    0.5 * (ys[iy] + ys[iy + 1]),
                ]);
                match out.iter_mut().find(|(c, _)| *c == class) {
                    Some((_, a)) => *a += area,
                    None => out.push((class, area)),
                }
            }
        }
        out
    }

    /// Accumulates the exact area of every bounded class over the critical
    /// grid and returns the interior tile indices for outline reconstruction.
    fn accumulate_tile_areas(&mut self) -> BTreeSet<(usize, usize)> {
        let mut interior_tiles = BTreeSet::new();
        for i in 0..self.crit_x.len() - 1 {
            for j in 0..self.crit_y.len() - 1 {
                let cx = 0.5 * (self.crit_x[i] + self.crit_x[i + 1]);
                let cy = 0.5 * (self.crit_y[j] + self.crit_y[j + 1]);
                let area =
                    (self.crit_x[i + 1] - self.crit_x[i]) * (self.crit_y[j + 1] - self.crit_y[j]);
                match self.classify([cx, cy]) {
                    PadClass::Interior => {
                        self.areas.interior += area;
                        interior_tiles.insert((i, j));
                    }
                    PadClass::PerimeterInner => self.areas.perimeter_inner += area,
                    PadClass::PerimeterOuter => self.areas.perimeter_outer += area,
                    PadClass::SaInner => self.areas.sa_inner += area,
                    PadClass::SaOuter => self.areas.sa_outer += area,
                    _ => {}
                }
            }
        }
        interior_tiles
    }
}

/// Minimum of the narrowest pad feature and the narrowest pad-to-pad gap.
fn min_feature_and_gap(pads: &[Polygon]) -> f64 {
    let mut m = f64::INFINITY;
    for pad in pads {
        m = m.min(pad.min_edge_length());
    }
    for (i, a) in pads.iter().enumerate() {
        for b in pads.iter().skip(i + 1) {
            m = m.min(a.linf_distance_to(b));
        }
    }
    m
}

/// Every coordinate where a class membership can change along an axis:
/// pad edge coordinates offset by 0, x0/2, x0; lead rectangle coordinates
/// offset by 0 and the lead-ownership distance.
fn critical_coords(
    pads: &[Polygon],
    lead_rects: &[([f64; 2], [f64; 2])],
    x0: f64,
) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let offsets = [0.0, x0 / 2.0, x0];
    for pad in pads {
        for v in pad.vertices() {
            for o in offsets {
                xs.push(v[0] - o);
                xs.push(v[0] + o);
                ys.push(v[1] - o);
                ys.push(v[1] + o);
            }
        }
    }
    for (lo, hi) in lead_rects {
        for o in [0.0, LEAD_NEAR_MAX] {
            xs.push(lo[0] - o);
            xs.push(hi[0] + o);
            ys.push(lo[1] - o);
            ys.push(hi[1] + o);
        }
    }
    for list in [&mut xs, &mut ys] {
        list.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
        list.dedup();
    }
    (xs, ys)
}

/// Sorted cut positions of `grid` strictly inside (lo, hi), with endpoints.
fn cuts_within(grid: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut out = vec![lo];
    let start = grid.partition_point(|&g| g <= lo);
    for &g in &grid[start..] {
        if g >= hi {
            break;
        }
        out.push(g);
    }
    out.push(hi);
    out
}

/// Reconstructs the union of grid tiles as rectilinear polygons by
/// cancelling shared directed edges and tracing the remainder.
fn trace_tile_union(
    tiles: &BTreeSet<(usize, usize)>,
    xs: &[f64],
    ys: &[f64],
) -> Result<Vec<Polygon>, GeometryError> {
    type V = (usize, usize);
    let mut edges: BTreeSet<(V, V)> = BTreeSet::new();
    let toggle = |a: V, b: V, edges: &mut BTreeSet<(V, V)>| {
        if !edges.remove(&(b, a)) {
            edges.insert((a, b));
        }
    };
    for &(i, j) in tiles {
        // Counterclockwise around the tile.
        toggle((i, j), (i + 1, j), &mut edges);
        toggle((i + 1, j), (i + 1, j + 1), &mut edges);
        toggle((i + 1, j + 1), (i, j + 1), &mut edges);
        toggle((i, j + 1), (i, j), &mut edges);
    }

    let mut outgoing: BTreeMap<V, Vec<V>> = BTreeMap::new();
    for &(a, b) in &edges {
        outgoing.entry(a).or_default().push(b);
    }

    let mut polygons = Vec::new();
    while let Some((&start, _)) = outgoing.iter().find(|(_, v)| !v.is_empty()) {
        let mut loop_verts: Vec<V> = vec![start];
        let mut current = start;
        let mut dir: Option<(i64, i64)> = None;
        loop {
            let nexts = outgoing.get_mut(&current).expect("edge endpoints tracked");
            if nexts.is_empty() {
                return Err(GeometryError::InvalidLayout(
                    "region outline tracing reached a dead end".into(),
                ));
            }
            // Prefer the leftmost turn so touching corners resolve into
            // separate simple loops.
            let pick = match dir {
                None => 0,
                Some(d) => {
                    let mut best = 0;
                    let mut best_rank = i32::MAX;
                    for (k, &n) in nexts.iter().enumerate() {
                        let nd = (
                            n.0 as i64 - current.0 as i64,
                            n.1 as i64 - current.1 as i64,
                        );
                        let rank = turn_rank(d, nd);
                        if rank < best_rank {
                            best_rank = rank;
                            best = k;
                        }
                    }
                    best
                }
            };
            let next = nexts.swap_remove(pick);
            dir = Some((
                next.0 as i64 - current.0 as i64,
                next.1 as i64 - current.1 as i64,
            ));
            current = next;
            if current == start {
                break;
            }
            loop_verts.push(current);
        }
        // Drop collinear run vertices.
        let n = loop_verts.len();
        let mut cleaned = Vec::new();
        for k in 0..n {
            let prev = loop_verts[(k + n - 1) % n];
            let here = loop_verts[k];
            let next = loop_verts[(k + 1) % n];
            let d1 = (here.0 as i64 - prev.0 as i64, here.1 as i64 - prev.1 as i64);
            let d2 = (next.0 as i64 - here.0 as i64, next.1 as i64 - here.1 as i64);
            if d1.0.signum() != d2.0.signum() || d1.1.signum() != d2.1.signum() {
                cleaned.push([xs[here.0], ys[here.1]]);
            }
        }
        if cleaned.len() >= 4 {
            polygons.push(Polygon::new(cleaned)?);
        }
    }
    Ok(polygons)
}

/// Turn preference for boundary tracing: left < straight < right < back.
fn turn_rank(d: (i64, i64), nd: (i64, i64)) -> i32 {
    let left = (-d.1, d.0);
    if nd == left {
        0
    } else if nd == d {
        1
    } else if nd == (-left.0, -left.1) {
        2
    } else {
        3
    }
}

/// Which lead band an arc-length position falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeadRegionKind {
    Near,
    Mid,
    Far,
}

/// Arc-length bookkeeping for one lead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadArc {
    pub lead_index: usize,
    /// Arc length where the lead meets its pad: half the junction gap plus
    /// the path length.
    pub y_far: f64,
}

/// Near/mid/far spans for every lead.
///
/// Arc length is measured from the junction point, so the lead tip sits at
/// gap/2 and the band cutoffs are literal distances from the junction.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadRegions {
    pub leads: Vec<LeadArc>,
}

impl LeadRegions {
    /// Region at arc position `y` of lead `i`; boundary points belong to
    /// the region closer to the junction. None beyond the pad attachment.
    pub fn classify(&self, i: usize, y: f64) -> Option<LeadRegionKind> {
        let arc = &self.leads[i];
        if y < 0.0 || y > arc.y_far {
            return None;
        }
        Some(if y <= LEAD_NEAR_MAX {
            LeadRegionKind::Near
        } else if y <= LEAD_MID_MAX {
            LeadRegionKind::Mid
        } else {
            LeadRegionKind::Far
        })
    }

    /// (region, start, end) spans tiling [0, y_far] for lead `i`;
    /// the far span is absent for leads shorter than the mid boundary.
    pub fn spans(&self, i: usize) -> Vec<(LeadRegionKind, f64, f64)> {
        let y_far = self.leads[i].y_far;
        let mut out = Vec::new();
        let mut mark = 0.0;
        for (kind, limit) in [
            (LeadRegionKind::Near, LEAD_NEAR_MAX),
            (LeadRegionKind::Mid, LEAD_MID_MAX),
            (LeadRegionKind::Far, f64::INFINITY),
        ] {
            let end = y_far.min(limit);
            if end > mark {
                out.push((kind, mark, end));
                mark = end;
            }
        }
        out
    }
}

/// Builds the lead arc taxonomy, checking that each lead actually starts at
/// the lumped junction gap.
pub fn classify_lead_regions(layout: &DeviceLayout) -> Result<LeadRegions, GeometryError> {
    if layout.leads.is_empty() {
        return Err(GeometryError::DisconnectedLead {
            label: "(none)".into(),
            reason: "layout has no leads".into(),
        });
    }
    let half_gap = layout.junction.gap / 2.0;
    let mut arcs = Vec::new();
    for (i, lead) in layout.leads.iter().enumerate() {
        let tip = lead.path[0];
        let d = (tip[0] - layout.junction.point[0]).abs()
            + (tip[1] - layout.junction.point[1]).abs();
        let tol = 1e-9 * half_gap.max(1e-12);
        if (d - half_gap).abs() > tol {
            return Err(GeometryError::DisconnectedLead {
                label: format!("lead {}", i),
                reason: format!(
                    "tip is {:.3e} m from the junction, expected half the {:.3e} m gap",
                    d, layout.junction.gap
                ),
            });
        }
        arcs.push(LeadArc {
            lead_index: i,
            y_far: half_gap + lead.length(),
        });
    }
    Ok(LeadRegions { leads: arcs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::layout::{
        BoxDims, Junction, LeadSpec, PadSpec, PotentialLabel,
    };

    const UM: f64 = 1e-6;

    fn square_pad_layout(pad: f64, gap: f64) -> DeviceLayout {
        let pad_top = Polygon::rect(-pad / 2.0, gap / 2.0, pad / 2.0, gap / 2.0 + pad).unwrap();
        let pad_bot = Polygon::rect(-pad / 2.0, -gap / 2.0 - pad, pad / 2.0, -gap / 2.0).unwrap();
        DeviceLayout::new(
            "squares".into(),
            vec![
                PadSpec { polygon: pad_top, label: PotentialLabel::Plus },
                PadSpec { polygon: pad_bot, label: PotentialLabel::Minus },
            ],
            vec![
                LeadSpec {
                    width: 1.0 * UM,
                    path: vec![[0.0, 0.5 * UM], [0.0, gap / 2.0]],
                    label: PotentialLabel::Plus,
                },
                LeadSpec {
                    width: 1.0 * UM,
                    path: vec![[0.0, -0.5 * UM], [0.0, -gap / 2.0]],
                    label: PotentialLabel::Minus,
                },
            ],
            Junction { point: [0.0, 0.0], gap: 1.0 * UM },
            BoxDims::new([-2000.0 * UM, -2000.0 * UM, -430.0 * UM], [2000.0 * UM, 2000.0 * UM, 0.0])
                .unwrap(),
            BoxDims::new(
                [-6000.0 * UM, -6000.0 * UM, -2000.0 * UM],
                [6000.0 * UM, 6000.0 * UM, 2000.0 * UM],
            )
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn square_pad_band_areas_are_exact() {
        let layout = square_pad_layout(100.0 * UM, 20.0 * UM);
        let set = partition_pad_regions(&layout, 1.0 * UM).unwrap();
        let a = set.areas();
        // Interior of a 100 um square inset by 1 um: 98 x 98.
        let expect_interior = 2.0 * (98.0 * UM) * (98.0 * UM);
        assert!((a.interior - expect_interior).abs() / expect_interior < 1e-12);
        // Both perimeter bands together: 100^2 - 98^2 = 396 um^2 per pad.
        let expect_perim = 2.0 * 396.0 * UM * UM;
        let perim = a.perimeter_inner + a.perimeter_outer;
        assert!((perim - expect_perim).abs() / expect_perim < 1e-12);
        // Interior + bands reproduce the pad area exactly.
        let pad_area: f64 = set.pads().iter().map(|p| p.area()).sum();
        let total = a.interior + perim;
        assert!((total - pad_area).abs() / pad_area < 1e-9);
    }

    #[test]
    fn interior_outlines_are_insets() {
        let layout = square_pad_layout(100.0 * UM, 20.0 * UM);
        let set = partition_pad_regions(&layout, 1.0 * UM).unwrap();
        assert_eq!(set.interior.len(), 2);
        for poly in &set.interior {
            assert!((poly.area() - (98.0 * UM) * (98.0 * UM)).abs() < 1e-22);
        }
    }

    #[test]
    fn classification_matches_distances() {
        let layout = square_pad_layout(100.0 * UM, 20.0 * UM);
        let set = partition_pad_regions(&layout, 1.0 * UM).unwrap();
        // Center of the top pad.
        assert_eq!(set.classify([0.0, 60.0 * UM]), PadClass::Interior);
        // 0.3 um inside the top pad's lower edge, away from the lead.
        assert_eq!(
            set.classify([30.0 * UM, 10.3 * UM]),
            PadClass::PerimeterInner
        );
        // 0.7 um inside.
        assert_eq!(
            set.classify([30.0 * UM, 10.7 * UM]),
            PadClass::PerimeterOuter
        );
        // 0.7 um outside the pad edge.
        assert_eq!(set.classify([30.0 * UM, 9.3 * UM]), PadClass::SaOuter);
        // On the lead.
        assert_eq!(set.classify([0.0, 5.0 * UM]), PadClass::LeadMetal);
        // 0.8 um beside the lead: lead-owned substrate.
        assert_eq!(set.classify([1.3 * UM, 5.0 * UM]), PadClass::LeadSa);
        // Far out in the open.
        assert_eq!(set.classify([500.0 * UM, 0.0]), PadClass::SaOpen);
    }

    #[test]
    fn x0_zero_and_oversized_rejected() {
        let layout = square_pad_layout(100.0 * UM, 20.0 * UM);
        assert!(matches!(
            partition_pad_regions(&layout, 0.0),
            Err(GeometryError::X0TooLarge { .. })
        ));
        // Gap is 20 um but 4 * 6 um exceeds it.
        assert!(matches!(
            partition_pad_regions(&layout, 6.0 * UM),
            Err(GeometryError::X0TooLarge { .. })
        ));
    }

    #[test]
    fn small_feature_forces_smaller_x0() {
        // 3 um wide pads facing over a 3 um gap: x0 = 1 um must be refused
        // and the min/4 fallback accepted.
        let layout = square_pad_layout(3.0 * UM, 3.0 * UM);
        assert!(matches!(
            partition_pad_regions(&layout, 1.0 * UM),
            Err(GeometryError::X0TooLarge { .. })
        ));
        let set = partition_pad_regions(&layout, 0.75 * UM).unwrap();
        let a = set.areas();
        let pad_area: f64 = set.pads().iter().map(|p| p.area()).sum();
        let total = a.interior + a.perimeter_inner + a.perimeter_outer;
        assert!((total - pad_area).abs() / pad_area < 1e-9);
    }

    #[test]
    fn rect_class_areas_cover_rect() {
        let layout = square_pad_layout(100.0 * UM, 20.0 * UM);
        let set = partition_pad_regions(&layout, 1.0 * UM).unwrap();
        // A rectangle straddling the top pad's lower edge and both bands.
        let lo = [20.0 * UM, 8.5 * UM];
        let hi = [25.0 * UM, 12.5 * UM];
        let parts = set.rect_class_areas(lo, hi);
        let total: f64 = parts.iter().map(|(_, a)| a).sum();
        let expect = (hi[0] - lo[0]) * (hi[1] - lo[1]);
        assert!((total - expect).abs() / expect < 1e-12);
        assert!(parts.iter().any(|(c, _)| *c == PadClass::Interior));
        assert!(parts.iter().any(|(c, _)| *c == PadClass::PerimeterInner));
        assert!(parts.iter().any(|(c, _)| *c == PadClass::SaInner));
    }

    #[test]
    fn lead_regions_tile_and_classify() {
        let layout = square_pad_layout(100.0 * UM, 71.0 * UM);
        // Lead metal runs from 0.5 um to 35.5 um from the junction.
        let regions = classify_lead_regions(&layout).unwrap();
        let spans = regions.spans(0);
        assert_eq!(spans.len(), 3);
        assert_eq!(spans[0], (LeadRegionKind::Near, 0.0, LEAD_NEAR_MAX));
        assert_eq!(spans[1], (LeadRegionKind::Mid, LEAD_NEAR_MAX, LEAD_MID_MAX));
        assert_eq!(spans[2].0, LeadRegionKind::Far);
        assert!((spans[2].2 - 35.5 * UM).abs() < 1e-15);
        // Boundary values belong to the inner region.
        assert_eq!(regions.classify(0, LEAD_NEAR_MAX), Some(LeadRegionKind::Near));
        assert_eq!(regions.classify(0, LEAD_MID_MAX), Some(LeadRegionKind::Mid));
    }

    #[test]
    fn short_lead_has_no_far_region() {
        let layout = square_pad_layout(100.0 * UM, 17.0 * UM);
        // Length 8 um: near + mid only.
        let regions = classify_lead_regions(&layout).unwrap();
        let spans = regions.spans(0);
        assert_eq!(spans.len(), 2);
        assert_eq!(spans[1].0, LeadRegionKind::Mid);
    }

    #[test]
    fn tip_away_from_junction_is_disconnected() {
        let mut layout = square_pad_layout(100.0 * UM, 20.0 * UM);
        layout.leads[0].path[0] = [0.0, 2.0 * UM];
        assert!(matches!(
            classify_lead_regions(&layout),
            Err(GeometryError::DisconnectedLead { .. })
        ));
    }

    #[test]
    fn comb_band_areas_sum_to_pad_area() {
        // One comb pad with three 4 um fingers plus a flat counter-electrode,
        // exercising reflex corners in the inset. The minus lead routes
        // around the comb to reach the top pad.
        let comb = Polygon::new(vec![
            [0.0, 0.0],
            [20.0 * UM, 0.0],
            [20.0 * UM, 10.0 * UM],
            [16.0 * UM, 10.0 * UM],
            [16.0 * UM, 4.0 * UM],
            [12.0 * UM, 4.0 * UM],
            [12.0 * UM, 10.0 * UM],
            [8.0 * UM, 10.0 * UM],
            [8.0 * UM, 4.0 * UM],
            [4.0 * UM, 4.0 * UM],
            [4.0 * UM, 10.0 * UM],
            [0.0, 10.0 * UM],
        ])
        .unwrap();
        let other = Polygon::rect(0.0, 14.0 * UM, 20.0 * UM, 24.0 * UM).unwrap();
        let layout = DeviceLayout::new(
            "comb".into(),
            vec![
                PadSpec { polygon: comb, label: PotentialLabel::Plus },
                PadSpec { polygon: other, label: PotentialLabel::Minus },
            ],
            vec![
                LeadSpec {
                    width: 0.5 * UM,
                    path: vec![[10.0 * UM, -20.5 * UM], [10.0 * UM, 0.0]],
                    label: PotentialLabel::Plus,
                },
                LeadSpec {
                    width: 0.5 * UM,
                    path: vec![
                        [10.0 * UM, -21.5 * UM],
                        [10.0 * UM, -30.0 * UM],
                        [40.0 * UM, -30.0 * UM],
                        [40.0 * UM, 19.0 * UM],
                        [20.0 * UM, 19.0 * UM],
                    ],
                    label: PotentialLabel::Minus,
                },
            ],
            Junction { point: [10.0 * UM, -21.0 * UM], gap: 1.0 * UM },
            BoxDims::new(
                [-400.0 * UM, -400.0 * UM, -430.0 * UM],
                [400.0 * UM, 400.0 * UM, 0.0],
            )
            .unwrap(),
            BoxDims::new(
                [-2000.0 * UM, -2000.0 * UM, -1000.0 * UM],
                [2000.0 * UM, 2000.0 * UM, 1000.0 * UM],
            )
            .unwrap(),
        )
        .unwrap();
        let set = partition_pad_regions(&layout, 0.9 * UM).unwrap();
        let a = set.areas();
        let pad_area: f64 = set.pads().iter().map(|p| p.area()).sum();
        let total = a.interior + a.perimeter_inner + a.perimeter_outer;
        assert!(
            (total - pad_area).abs() / pad_area < 1e-9,
            "interior {} + bands {} != pads {}",
            a.interior,
            a.perimeter_inner + a.perimeter_outer,
            pad_area
        );
        // The comb inset keeps one piece per pad here.
        assert_eq!(set.interior.len(), 2);
    }
}
