//! Input points, grid snapping, and tours.
//!
//! The approximation pipeline works on an integer grid `{0, …, L}²` with `L`
//! a power of two chosen large enough (relative to `n/ε`) that snapping the
//! input onto the grid perturbs the optimal tour by only an ε-fraction.
//! Costs reported to the user are always measured on the original
//! coordinates; the grid is internal.

use crate::num::bounded_floor;

/// Input-space point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealPoint {
    pub x: f64,
    pub y: f64,
}

/// Grid-space point with coordinates in `{0, …, L}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub fn to_real(self) -> RealPoint {
        RealPoint { x: self.x as f64, y: self.y as f64 }
    }
}

pub fn dist(a: RealPoint, b: RealPoint) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    (dx * dx + dy * dy).sqrt()
}

pub fn grid_dist(a: Point, b: Point) -> f64 {
    dist(a.to_real(), b.to_real())
}

pub fn all_coincident(pts: &[RealPoint]) -> bool {
    pts.windows(2).all(|w| w[0] == w[1])
}

/// Snapped instance. `points[i]` corresponds to `input[i]`; duplicates are
/// kept so the tour index space matches the input.
#[derive(Clone, Debug)]
pub struct GridInstance {
    pub points: Vec<Point>,
    /// Grid extent; a power of two. Points lie in `{0, …, l}²`.
    pub l: u64,
}

/// Smallest power of two `≥ c_l · n / epsilon`.
pub fn grid_extent(n: usize, epsilon: f64, c_l: f64) -> u64 {
    assert!(n >= 1 && epsilon > 0.0 && c_l > 0.0);
    let target = c_l * n as f64 / epsilon;
    assert!(
        target < (1u64 << 40) as f64,
        "grid extent overflows supported range (n too large or epsilon too small)"
    );
    let t = target.ceil() as u64;
    t.max(1).next_power_of_two()
}

/// Snap `input` onto `{0, …, L}²`, preserving order and multiplicity.
///
/// The bounding box is scaled so its longer side spans exactly `L`, then each
/// coordinate is rounded to the nearest grid line. A degenerate input (all
/// points coincident) maps to the origin.
pub fn preprocess(input: &[RealPoint], epsilon: f64, c_l: f64) -> GridInstance {
    assert!(!input.is_empty(), "preprocess requires at least one point");
    let n = input.len();
    let l = grid_extent(n, epsilon, c_l);

    let mut min_x = f64::INFINITY;
    let mut min_y = f64::INFINITY;
    let mut max_x = f64::NEG_INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for p in input {
        assert!(p.x.is_finite() && p.y.is_finite(), "non-finite input coordinate");
        min_x = min_x.min(p.x);
        min_y = min_y.min(p.y);
        max_x = max_x.max(p.x);
        max_y = max_y.max(p.y);
    }
    let extent = (max_x - min_x).max(max_y - min_y);

    let bits = l.trailing_zeros() + 1; // l is a power of two; snapped values stay ≤ l
    let points = if extent == 0.0 {
        vec![Point { x: 0, y: 0 }; n]
    } else {
        let scale = l as f64 / extent;
        input
            .iter()
            .map(|p| {
                let x = bounded_floor(scale * (p.x - min_x) + 0.5, bits).clamp(0, l as i64);
                let y = bounded_floor(scale * (p.y - min_y) + 0.5, bits).clamp(0, l as i64);
                Point { x, y }
            })
            .collect()
    };
    GridInstance { points, l }
}

/// A closed tour given as a visiting order of point indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tour {
    pub order: Vec<usize>,
}

impl Tour {
    pub fn new(order: Vec<usize>) -> Tour {
        Tour { order }
    }

    /// Each of `0..n` appears exactly once.
    pub fn is_permutation(&self, n: usize) -> bool {
        if self.order.len() != n {
            return false;
        }
        let mut seen = vec![false; n];
        for &i in &self.order {
            if i >= n || seen[i] {
                return false;
            }
            seen[i] = true;
        }
        true
    }

    pub fn cost(&self, pts: &[RealPoint]) -> f64 {
        let n = self.order.len();
        if n < 2 {
            return 0.0;
        }
        let mut total = 0.0;
        for i in 0..n {
            let a = pts[self.order[i]];
            let b = pts[self.order[(i + 1) % n]];
            total += dist(a, b);
        }
        total
    }

    pub fn grid_cost(&self, pts: &[Point]) -> f64 {
        let real: Vec<RealPoint> = pts.iter().map(|p| p.to_real()).collect();
        self.cost(&real)
    }

    /// Rotate to start at index 0 and pick the lexicographically smaller of
    /// the two directions, so equal tours serialize identically.
    pub fn canonicalize(&mut self) {
        let n = self.order.len();
        if n == 0 {
            return;
        }
        let start = self.order.iter().position(|&i| i == 0).expect("tour must contain index 0");
        let fwd: Vec<usize> = (0..n).map(|i| self.order[(start + i) % n]).collect();
        let bwd: Vec<usize> = (0..n).map(|i| self.order[(start + n - i) % n]).collect();
        self.order = if fwd <= bwd { fwd } else { bwd };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_snapping() {
        // n = 2, eps = 1, c_l = 4: target 8, so L = 8 and the segment
        // (0,0)-(10,0) lands on (0,0)-(8,0).
        let input = [RealPoint { x: 0.0, y: 0.0 }, RealPoint { x: 10.0, y: 0.0 }];
        let g = preprocess(&input, 1.0, 4.0);
        assert_eq!(g.l, 8);
        assert_eq!(g.points, vec![Point { x: 0, y: 0 }, Point { x: 8, y: 0 }]);
    }

    #[test]
    fn extent_is_power_of_two() {
        assert_eq!(grid_extent(2, 1.0, 4.0), 8);
        assert_eq!(grid_extent(3, 1.0, 8.0), 32);
        assert_eq!(grid_extent(1, 2.0, 1.0), 1);
        for n in [1usize, 2, 7, 100, 1000] {
            for eps in [0.25, 0.5, 1.0, 2.0] {
                let l = grid_extent(n, eps, 8.0);
                assert!(l.is_power_of_two());
                assert!(l as f64 >= 8.0 * n as f64 / eps);
                assert!((l / 2) as f64 == 0.0 || ((l / 2) as f64) < 8.0 * n as f64 / eps);
            }
        }
    }

    #[test]
    fn coincident_points_map_to_origin() {
        let input = vec![RealPoint { x: 3.5, y: -1.0 }; 4];
        let g = preprocess(&input, 0.5, 8.0);
        assert!(g.points.iter().all(|p| *p == Point { x: 0, y: 0 }));
    }

    #[test]
    fn duplicates_survive_snapping() {
        let input = [
            RealPoint { x: 0.0, y: 0.0 },
            RealPoint { x: 5.0, y: 5.0 },
            RealPoint { x: 5.0, y: 5.0 },
        ];
        let g = preprocess(&input, 1.0, 8.0);
        assert_eq!(g.points.len(), 3);
        assert_eq!(g.points[1], g.points[2]);
    }

    #[test]
    fn snapped_points_in_range() {
        let input = [
            RealPoint { x: -7.3, y: 2.2 },
            RealPoint { x: 11.0, y: -4.5 },
            RealPoint { x: 0.1, y: 9.9 },
        ];
        let g = preprocess(&input, 0.7, 8.0);
        for p in &g.points {
            assert!(p.x >= 0 && p.x <= g.l as i64);
            assert!(p.y >= 0 && p.y <= g.l as i64);
        }
    }

    #[test]
    fn tour_cost_and_validation() {
        let pts = [
            RealPoint { x: 0.0, y: 0.0 },
            RealPoint { x: 3.0, y: 0.0 },
            RealPoint { x: 3.0, y: 4.0 },
        ];
        let t = Tour::new(vec![0, 1, 2]);
        assert!(t.is_permutation(3));
        assert!((t.cost(&pts) - 12.0).abs() < 1e-12);
        assert!(!Tour::new(vec![0, 1, 1]).is_permutation(3));
        assert!(!Tour::new(vec![0, 1]).is_permutation(3));
    }

    #[test]
    fn canonical_form_fixes_rotation_and_direction() {
        let mut a = Tour::new(vec![2, 0, 1, 3]);
        a.canonicalize();
        assert_eq!(a.order, vec![0, 1, 3, 2]);
        let mut b = Tour::new(vec![3, 1, 0, 2]);
        b.canonicalize();
        assert_eq!(b.order, vec![0, 1, 3, 2]);
    }
}
