//! Portal grids on cell sides.
//!
//! A tour fragment may only cross a cell side at designated portals. The
//! portal density on a side depends on how often the solution crosses it:
//! a side crossed `k` times uses the power-of-two granularity `g(k)`, which
//! shrinks as `k` grows. This keeps the total portal budget of a cell
//! proportional to `r²` no matter how the crossings distribute over its
//! sides, while every side still offers enough portals that detouring to
//! the nearest one stays cheap.
//!
//! Positions are exact rationals ([`Rat`]); two sides sharing a segment
//! therefore agree on portal positions bit-for-bit, which the dynamic
//! program relies on when gluing cells.

use crate::num::Rat;

/// Power-of-two grid granularity for a side crossed `k` times, at interface
/// parameter `r`: the smallest power of two `≥ ⌈r² / 4k⌉`.
pub fn granularity(r: u32, k: u32) -> u32 {
    assert!(r >= 1 && k >= 1);
    let q = (r * r).div_ceil(4 * k);
    q.next_power_of_two()
}

/// The `m+1` equally spaced positions on `[lo, hi]`, endpoints included.
pub fn grid_positions(lo: Rat, hi: Rat, m: u32) -> Vec<Rat> {
    assert!(m >= 1 && lo < hi);
    let len = hi - lo;
    (0..=m).map(|i| lo + len * Rat::new(i as i128, m as i128)).collect()
}

/// Portal set for a side crossed `k` times: the `g(k)` grid plus the side's
/// designated crossing point (if any), sorted and deduplicated.
pub fn portal_set(lo: Rat, hi: Rat, r: u32, k: u32, crossing: Option<Rat>) -> Vec<Rat> {
    let mut pos = grid_positions(lo, hi, granularity(r, k));
    if let Some(x) = crossing {
        debug_assert!(lo <= x && x <= hi, "crossing point off its side");
        pos.push(x);
    }
    pos.sort();
    pos.dedup();
    pos
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn granularity_examples() {
        // r = 8: k = 1 -> ceil(64/4) = 16; k = 3 -> ceil(64/12) = 6 -> 8;
        // k = 16 -> ceil(64/64) = 1.
        assert_eq!(granularity(8, 1), 16);
        assert_eq!(granularity(8, 3), 8);
        assert_eq!(granularity(8, 16), 1);
    }

    #[test]
    fn granularity_sandwich() {
        // r²/4k ≤ g(k) < r²/2k + 2 for the full parameter range we use.
        for r in 1..=40u32 {
            for k in 1..=2 * r * r {
                let g = granularity(r, k) as f64;
                let rr = (r * r) as f64;
                assert!(g >= rr / (4.0 * k as f64), "lower bound fails r={r} k={k}");
                assert!(g < rr / (2.0 * k as f64) + 2.0, "upper bound fails r={r} k={k}");
            }
        }
    }

    #[test]
    fn granularity_monotone_in_k() {
        for r in 1..=32u32 {
            for k in 1..2 * r * r {
                assert!(granularity(r, k + 1) <= granularity(r, k));
            }
        }
    }

    #[test]
    fn grid_positions_count_and_endpoints() {
        let lo = Rat::half(-3); // -3/2
        let hi = Rat::half(13); // 13/2
        let pos = grid_positions(lo, hi, 4);
        assert_eq!(pos.len(), 5);
        assert_eq!(pos[0], lo);
        assert_eq!(pos[4], hi);
        assert_eq!(pos[2], Rat::new(5, 2));
        // Equal spacing.
        for w in pos.windows(2) {
            assert_eq!(w[1] - w[0], Rat::int(2));
        }
    }

    #[test]
    fn coarser_grids_nest_into_finer() {
        let lo = Rat::int(0);
        let hi = Rat::int(1);
        for r in 5..=24u32 {
            for k in 1..=r {
                for k2 in 1..=k {
                    // Fewer crossings -> coarser grid; it must be a subset.
                    let fine = grid_positions(lo, hi, granularity(r, k));
                    let coarse = grid_positions(lo, hi, granularity(r, k2));
                    assert!(coarse.iter().all(|p| fine.binary_search(p).is_ok()));
                }
            }
        }
    }

    #[test]
    fn portal_set_includes_crossing_once() {
        let lo = Rat::int(0);
        let hi = Rat::int(8);
        let x = Rat::new(3, 7);
        let with = portal_set(lo, hi, 8, 16, Some(x));
        assert!(with.contains(&x));
        // Crossing coinciding with a grid point is not duplicated.
        let dup = portal_set(lo, hi, 8, 16, Some(Rat::int(4)));
        let plain = portal_set(lo, hi, 8, 16, None);
        assert_eq!(dup, plain);
        assert!(with.windows(2).all(|w| w[0] < w[1]));
    }
}
