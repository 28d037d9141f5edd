//! Axis-aligned polygon arithmetic.
//!
//! Every polygon in a device layout is rectilinear: edges alternate between
//! horizontal and vertical runs. That restriction keeps point classification,
//! edge distances, and band areas exact (no floating-point geometry predicates
//! beyond comparisons), and it matches what tensor-product meshes can resolve
//! without staircasing.

use super::GeometryError;
use serde::{Deserialize, Serialize};

/// Closed rectilinear polygon, vertices in order (either orientation),
/// implicit edge from the last vertex back to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    vertices: Vec<[f64; 2]>,
}

impl Polygon {
    /// Validates rectilinearity (every edge parallel to an axis, no
    /// zero-length edges) and non-degeneracy (nonzero area).
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self, GeometryError> {
        if vertices.len() < 4 {
            return Err(GeometryError::InvalidLayout(format!(
                "polygon needs at least 4 vertices, got {}",
                vertices.len()
            )));
        }
        let n = vertices.len();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let horizontal = a[1] == b[1] && a[0] != b[0];
            let vertical = a[0] == b[0] && a[1] != b[1];
            if !(horizontal || vertical) {
                return Err(GeometryError::InvalidLayout(format!(
                    "polygon edge {} from ({}, {}) to ({}, {}) is not axis-aligned or has zero length",
                    i, a[0], a[1], b[0], b[1]
                )));
            }
        }
        let poly = Polygon { vertices };
        if poly.area() == 0.0 {
            return Err(GeometryError::InvalidLayout(
                "polygon has zero area".into(),
            ));
        }
        Ok(poly)
    }

    /// Convenience constructor for an axis-aligned rectangle.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, GeometryError> {
        Polygon::new(vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    /// Edge list including the closing edge.
    pub fn edges(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace area, orientation-independent.
    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        let mut acc = 0.0;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            acc += a[0] * b[1] - b[0] * a[1];
        }
        acc / 2.0
    }

    /// Axis-aligned bounding box as (min corner, max corner).
    pub fn bbox(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    /// Even-odd containment test (horizontal ray cast over vertical edges).
    ///
    /// Edges are treated half-open in y so a crossing at a shared vertex is
    /// counted exactly once. Callers classify points strictly between mesh
    /// planes, so boundary points never arise in the integration paths.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if a[0] != b[0] {
                continue; // horizontal edge, no crossing with a horizontal ray
            }
            let (ylo, yhi) = if a[1] < b[1] { (a[1], b[1]) } else { (b[1], a[1]) };
            if p[1] >= ylo && p[1] < yhi && a[0] > p[0] {
                inside = !inside;
            }
        }
        inside
    }

    /// Chebyshev (L-infinity) distance from a point to the polygon boundary.
    ///
    /// For rectilinear polygons this metric reproduces the edge-offset
    /// construction exactly: the set of interior points at distance >= x0
    /// is the polygon inset by x0.
    pub fn linf_boundary_distance(&self, p: [f64; 2]) -> f64 {
        let mut best = f64::INFINITY;
        for (a, b) in self.edges() {
            best = best.min(linf_point_segment(p, a, b));
        }
        best
    }

    /// Shortest edge length; a proxy for the narrowest feature of the
    /// rectilinear outlines used in device layouts (pad arms and fingers
    /// terminate in an edge as wide as the feature).
    pub fn min_edge_length(&self) -> f64 {
        self.edges()
            .map(|(a, b)| (a[0] - b[0]).abs() + (a[1] - b[1]).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Minimum Chebyshev distance between the boundaries of two polygons.
    pub fn linf_distance_to(&self, other: &Polygon) -> f64 {
        let mut best = f64::INFINITY;
        for (a, b) in self.edges() {
            for q in [a, b] {
                best = best.min(other.linf_boundary_distance(q));
            }
        }
        for (a, b) in other.edges() {
            for q in [a, b] {
                best = best.min(self.linf_boundary_distance(q));
            }
        }
        best
    }
}

/// Chebyshev distance from point `p` to the axis-aligned segment `a`-`b`.
fn linf_point_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    // Along the segment axis the nearest point clamps; across it the offset
    // is fixed. max() of the two residuals is the Chebyshev distance.
    let (along, across) = if a[1] == b[1] { (0, 1) } else { (1, 0) };
    let (lo, hi) = if a[along] < b[along] {
        (a[along], b[along])
    } else {
        (b[along], a[along])
    };
    let clamped = p[along].clamp(lo, hi);
    let d_along = (p[along] - clamped).abs();
    let d_across = (p[across] - a[across]).abs();
    d_along.max(d_across)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Polygon {
        Polygon::rect(0.0, 0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn rect_area_and_bbox() {
        let p = Polygon::rect(-2.0, 1.0, 3.0, 4.0).unwrap();
        assert_eq!(p.area(), 15.0);
        assert_eq!(p.bbox(), ([-2.0, 1.0], [3.0, 4.0]));
    }

    #[test]
    fn diagonal_edge_rejected() {
        let err = Polygon::new(vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 0.0]]);
        assert!(err.is_err());
    }

    #[test]
    fn containment_interior_and_exterior() {
        let p = unit_square();
        assert!(p.contains([0.5, 0.5]));
        assert!(!p.contains([1.5, 0.5]));
        assert!(!p.contains([-0.5, 0.5]));
    }

    #[test]
    fn containment_in_l_shape_notch() {
        // L-shape: unit square with the top-right quadrant removed.
        let p = Polygon::new(vec![
            [0.0, 0.0],
            [1.0, 0.0],
            [1.0, 0.5],
            [0.5, 0.5],
            [0.5, 1.0],
            [0.0, 1.0],
        ])
        .unwrap();
        assert!(p.contains([0.25, 0.75]));
        assert!(!p.contains([0.75, 0.75]));
        assert_eq!(p.area(), 0.75);
    }

    #[test]
    fn linf_distance_inside_square() {
        let p = unit_square();
        assert_eq!(p.linf_boundary_distance([0.5, 0.5]), 0.5);
        assert_eq!(p.linf_boundary_distance([0.1, 0.5]), 0.1);
    }

    #[test]
    fn linf_distance_outside_corner_is_chebyshev() {
        let p = unit_square();
        // Diagonally off the (1,1) corner: Chebyshev distance is the max offset.
        assert!((p.linf_boundary_distance([1.3, 1.2]) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn polygon_pair_distance() {
        let a = unit_square();
        let b = Polygon::rect(1.4, 0.0, 2.4, 1.0).unwrap();
        assert!((a.linf_distance_to(&b) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn min_edge_length_picks_shortest() {
        let p = Polygon::new(vec![
            [0.0, 0.0],
            [10.0, 0.0],
            [10.0, 2.0],
            [0.0, 2.0],
        ])
        .unwrap();
        assert_eq!(p.min_edge_length(), 2.0);
    }
}
