//! Exact-length geometric cell fills for one axis segment.
//!
//! Each segment between two anchor points is filled with cells that start
//! at the anchor minimum size and grow geometrically inward. The growth
//! ratio is then re-solved by bisection so the cells sum to the segment
//! length exactly, which keeps anchors on mesh planes without rescaling
//! tricks that could break the adjacent-ratio bound.

/// Cells for a segment anchored on the left only: first cell at most
/// `min_cell`, geometric growth bounded by `ratio`, sizes capped at `cap`.
/// The returned sizes sum to `len` exactly (to roundoff, absorbed by the
/// final cell).
pub fn fill_one_sided(len: f64, min_cell: f64, ratio: f64, cap: f64) -> Vec<f64> {
    assert!(len > 0.0 && min_cell > 0.0 && ratio > 1.0 && cap >= min_cell);
    if len <= min_cell {
        return vec![len];
    }
    // March at the nominal ratio to pick the cell count.
    let mut n = 0usize;
    let mut sum = 0.0;
    let mut cell = min_cell;
    while sum < len {
        sum += cell.min(cap);
        cell *= ratio;
        n += 1;
    }
    sizes_for_count(len, min_cell, ratio, cap, n)
}

/// Cells for a segment anchored at both ends, possibly with different
/// minimum sizes. The split point between the two geometric fronts is
/// bisected until the meeting cells respect the ratio bound.
pub fn fill_two_sided(
    len: f64,
    min_left: f64,
    min_right: f64,
    ratio: f64,
    cap: f64,
) -> Vec<f64> {
    assert!(len > 0.0 && ratio > 1.0);
    let m = min_left.min(min_right);
    if len <= min_left + min_right {
        // Too short to grade; equal cells below both anchor minima.
        let n = (len / m).ceil().max(1.0) as usize;
        return vec![len / n as f64; n];
    }
    let assemble = |frac: f64| -> (Vec<f64>, usize) {
        let ll = len * frac;
        let lr = len - ll;
        let left = fill_one_sided(ll, min_left, ratio, cap);
        let mut right = fill_one_sided(lr, min_right, ratio, cap);
        right.reverse();
        let split = left.len();
        let mut cells = left;
        cells.extend(right);
        (cells, split)
    };

    // Bisect the split fraction until the two fronts meet within the ratio
    // bound. The meeting-cell ratio grows monotonically with the left share
    // (up to small jumps when a front's cell count changes), so this
    // converges in a few steps.
    let mut lo = 0.05;
    let mut hi = 0.95;
    let mut frac = 0.5;
    let (mut cells, mut split) = assemble(frac);
    for _ in 0..60 {
        let r = (cells[split - 1] / cells[split]).ln();
        if r.abs() <= ratio.ln() * (1.0 + 1e-9) {
            break;
        }
        if r > 0.0 {
            hi = frac; // left meeting cell too large: shrink the left share
        } else {
            lo = frac;
        }
        frac = 0.5 * (lo + hi);
        let (c, s) = assemble(frac);
        cells = c;
        split = s;
    }
    cells
}

/// Solves for the exact growth ratio at a fixed cell count and returns the
/// sizes. Monotone bisection on the (possibly capped) geometric sum.
fn sizes_for_count(len: f64, min_cell: f64, ratio: f64, cap: f64, n: usize) -> Vec<f64> {
    let sum_at = |r: f64| -> f64 {
        let mut s = 0.0;
        let mut cell = min_cell;
        for _ in 0..n {
            s += cell.min(cap);
            cell *= r;
        }
        s
    };
    if n as f64 * min_cell >= len {
        // Count landed above the target even at ratio 1: equal cells.
        let n = (len / min_cell).ceil().max(1.0) as usize;
        return vec![len / n as f64; n];
    }
    let (mut lo, mut hi) = (1.0, ratio);
    for _ in 0..70 {
        let mid = 0.5 * (lo + hi);
        if sum_at(mid) < len {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    let mut cells = Vec::with_capacity(n);
    let mut cell = min_cell;
    for _ in 0..n {
        cells.push(cell.min(cap));
        cell *= r;
    }
    // Absorb the bisection residue in the largest (final) cell.
    let s: f64 = cells.iter().sum();
    let last = cells.len() - 1;
    cells[last] += len - s;
    debug_assert!(cells[last] > 0.0);
    cells
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_fill_ok(cells: &[f64], len: f64, ratio: f64) {
        let s: f64 = cells.iter().sum();
        assert!((s - len).abs() <= 1e-9 * len, "sum {} != {}", s, len);
        for w in cells.windows(2) {
            let r = (w[1] / w[0]).max(w[0] / w[1]);
            assert!(r <= ratio * (1.0 + 1e-6), "ratio {} exceeds {}", r, ratio);
        }
    }

    #[test]
    fn one_sided_first_cell_at_minimum() {
        let cells = fill_one_sided(1e-6, 0.5e-9, 1.3, f64::INFINITY);
        assert!(cells[0] <= 0.5e-9 * (1.0 + 1e-9));
        assert_fill_ok(&cells, 1e-6, 1.3);
    }

    #[test]
    fn one_sided_tiny_segment_single_cell() {
        let cells = fill_one_sided(0.3e-9, 0.5e-9, 1.3, f64::INFINITY);
        assert_eq!(cells.len(), 1);
        assert!((cells[0] - 0.3e-9).abs() < 1e-24);
    }

    #[test]
    fn one_sided_respects_cap() {
        let cells = fill_one_sided(100.0, 0.1, 1.5, 5.0);
        assert!(cells.iter().all(|&c| c <= 5.0 * (1.0 + 1e-9)));
        assert_fill_ok(&cells, 100.0, 1.5);
    }

    #[test]
    fn two_sided_meets_in_ratio_bound() {
        let cells = fill_two_sided(1e-3, 0.5e-9, 0.5e-9, 1.3, f64::INFINITY);
        assert!(cells[0] <= 0.5e-9 * (1.0 + 1e-9));
        assert!(*cells.last().unwrap() <= 0.5e-9 * (1.0 + 1e-9));
        assert_fill_ok(&cells, 1e-3, 1.3);
    }

    #[test]
    fn two_sided_asymmetric_minima() {
        let cells = fill_two_sided(50e-6, 0.5e-9, 2e-6, 1.3, f64::INFINITY);
        assert!(cells[0] <= 0.5e-9 * (1.0 + 1e-9));
        assert!(*cells.last().unwrap() <= 2e-6 * (1.0 + 1e-9));
        assert_fill_ok(&cells, 50e-6, 1.3);
    }

}
