//! Side-local crossing positions for the dynamic program.
//!
//! Each cell side carries a pool of admissible crossing positions: the
//! interior points of its finest portal lattice plus the side's designated
//! start-tour crossing. A position is encoded relative to its side — a
//! lattice index, or a marker for the off-lattice crossing — so equality,
//! ordering and granularity checks are integer work, while the physical
//! coordinate is recovered exactly as a rational whenever distances or
//! cross-side identification are needed.
//!
//! A side crossed `k` times in total may only use positions of the coarser
//! `g(k)` lattice (plus the designated crossing). The lattices are nested
//! powers of two, so validity is a divisibility test on the index.

use crate::crossing::CrossingIndex;
use crate::geometry::RealPoint;
use crate::num::Rat;
use crate::quadtree::{Axis, Quadtree, SideDir};

/// Position of one crossing on a side.
///
/// `Grid(i)` is the `i`-th point of the side's finest lattice, `0 < i < g1`.
/// `Cross` is the designated start-tour crossing and only exists when that
/// crossing is off-lattice; an on-lattice crossing is canonicalized to its
/// `Grid` code so each physical position has exactly one encoding.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum PosCode {
    Grid(u16),
    Cross,
}

/// Designated crossing of a side, canonicalized against the lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XPos {
    Lattice(u16),
    Off(Rat),
}

/// Geometry and position pool of one cell side, in grid units.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SideInfo {
    pub axis: Axis,
    /// Coordinate of the supporting line.
    pub fixed: Rat,
    /// Varying-axis span.
    pub lo: Rat,
    pub hi: Rat,
    /// Finest lattice granularity; lattice point `i` sits at `lo + span·i/g1`.
    pub g1: u16,
    pub x: Option<XPos>,
}

impl SideInfo {
    pub fn new(tree: &Quadtree, idx: &CrossingIndex, node: u32, dir: SideDir, g1: u16) -> SideInfo {
        let side = tree.node(node).side(dir, tree);
        let lo = Rat::half(side.lo_half as i128);
        let hi = Rat::half(side.hi_half as i128);
        let fixed = Rat::half(side.fixed_half as i128);
        let span = hi - lo;
        let x = idx.get(node, dir).map(|c| {
            debug_assert!(lo < c && c < hi, "designated crossing outside side span");
            let t = (c - lo) * Rat::int(g1 as i128) / span;
            if t.den() == 1 {
                XPos::Lattice(t.num() as u16)
            } else {
                XPos::Off(c)
            }
        });
        SideInfo { axis: side.axis, fixed, lo, hi, g1, x }
    }

    /// Physical coordinate of a position along the varying axis.
    pub fn offset(&self, code: PosCode) -> Rat {
        match code {
            PosCode::Grid(i) => {
                debug_assert!(0 < i && i < self.g1);
                self.lo + (self.hi - self.lo) * Rat::new(i as i128, self.g1 as i128)
            }
            PosCode::Cross => match self.x {
                Some(XPos::Off(c)) => c,
                _ => unreachable!("Cross code on a side without an off-lattice crossing"),
            },
        }
    }

    /// Physical point of a position in the plane.
    pub fn point(&self, code: PosCode) -> RealPoint {
        let off = self.offset(code).to_f64();
        match self.axis {
            Axis::Horizontal => RealPoint { x: off, y: self.fixed.to_f64() },
            Axis::Vertical => RealPoint { x: self.fixed.to_f64(), y: off },
        }
    }

    /// Encode a physical coordinate as a position of this side's pool.
    /// Returns `None` when the coordinate is not in the pool (corners
    /// included: they are never usable positions).
    pub fn code_of(&self, pos: Rat) -> Option<PosCode> {
        if pos <= self.lo || pos >= self.hi {
            return None;
        }
        let t = (pos - self.lo) * Rat::int(self.g1 as i128) / (self.hi - self.lo);
        if t.den() == 1 {
            return Some(PosCode::Grid(t.num() as u16));
        }
        match self.x {
            Some(XPos::Off(c)) if c == pos => Some(PosCode::Cross),
            _ => None,
        }
    }

    /// The designated crossing as a pool code, if the side has one.
    pub fn x_code(&self) -> Option<PosCode> {
        match self.x {
            Some(XPos::Lattice(i)) => Some(PosCode::Grid(i)),
            Some(XPos::Off(_)) => Some(PosCode::Cross),
            None => None,
        }
    }

    /// May `code` appear on this side when the side carries `k` crossings in
    /// total, where `gk` is the lattice granularity admitted for `k`?
    pub fn valid_at(&self, code: PosCode, gk: u16) -> bool {
        match code {
            PosCode::Cross => true,
            PosCode::Grid(i) => {
                debug_assert!(gk >= 1 && gk <= self.g1 && self.g1 % gk == 0);
                let step = self.g1 / gk;
                i % step == 0 || self.x == Some(XPos::Lattice(i))
            }
        }
    }

    /// All pool codes in ascending offset order.
    pub fn pool(&self) -> Vec<PosCode> {
        let mut codes: Vec<PosCode> = (1..self.g1).map(PosCode::Grid).collect();
        if let Some(XPos::Off(c)) = self.x {
            let at = codes
                .iter()
                .position(|&g| self.offset(g) > c)
                .unwrap_or(codes.len());
            codes.insert(at, PosCode::Cross);
        }
        codes
    }

    /// Lattice codes of the coarsest `depth` levels (halves, quarters, …),
    /// coarsest first, each level in ascending index order.
    pub fn coarse(&self, depth: u32) -> Vec<PosCode> {
        let mut out = Vec::new();
        for d in 1..=depth {
            if d > self.g1.trailing_zeros() {
                break;
            }
            let step = self.g1 >> d;
            let mut i = step;
            while i < self.g1 {
                // Only positions new at this level.
                if d == 1 || i % (step << 1) != 0 {
                    out.push(PosCode::Grid(i));
                }
                i += step;
            }
        }
        out
    }

    /// Up to `count` lattice codes nearest to physical coordinate `target`.
    pub fn snapped(&self, target: f64, count: usize) -> Vec<PosCode> {
        if count == 0 || self.g1 < 2 {
            return Vec::new();
        }
        let lo = self.lo.to_f64();
        let hi = self.hi.to_f64();
        let t = ((target - lo) / (hi - lo) * self.g1 as f64).round() as i64;
        let base = t.clamp(1, self.g1 as i64 - 1) as u16;
        let mut out = vec![PosCode::Grid(base)];
        let mut d = 1u16;
        while out.len() < count {
            let mut grew = false;
            if base >= d + 1 {
                out.push(PosCode::Grid(base - d));
                grew = true;
            }
            if out.len() < count && base + d < self.g1 {
                out.push(PosCode::Grid(base + d));
                grew = true;
            }
            if !grew {
                break;
            }
            d += 1;
        }
        out
    }

    pub fn cmp_codes(&self, a: PosCode, b: PosCode) -> std::cmp::Ordering {
        match (a, b) {
            (PosCode::Grid(i), PosCode::Grid(j)) => i.cmp(&j),
            _ => self.offset(a).cmp(&self.offset(b)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::doubled_tree_tour;
    use crate::crossing::build_index;
    use crate::geometry::{GridInstance, Point};
    use crate::quadtree::{Quadtree, Shift, SIDE_DIRS};

    fn tiny_tree() -> (GridInstance, Quadtree, CrossingIndex) {
        let g = GridInstance {
            points: vec![Point { x: 0, y: 0 }, Point { x: 8, y: 0 }],
            l: 8,
        };
        let t = Quadtree::build(&g, Shift { a1: 4, a2: 4 });
        let tour = doubled_tree_tour(&g.points);
        let idx = build_index(&g, &t, &tour);
        (g, t, idx)
    }

    #[test]
    fn offsets_and_roundtrip() {
        let (_, t, idx) = tiny_tree();
        // Root spans [-3.5, 12.5] on both axes.
        let s = SideInfo::new(&t, &idx, t.root, SideDir::South, 8);
        assert_eq!(s.lo, Rat::new(-7, 2));
        assert_eq!(s.hi, Rat::new(25, 2));
        assert_eq!(s.offset(PosCode::Grid(4)), Rat::new(9, 2));
        for i in 1..8 {
            let c = PosCode::Grid(i);
            assert_eq!(s.code_of(s.offset(c)), Some(c));
        }
        assert_eq!(s.code_of(s.lo), None);
        assert_eq!(s.code_of(Rat::new(1, 3)), None);
    }

    #[test]
    fn crossing_canonicalization() {
        let (_, t, idx) = tiny_tree();
        // The SW child's east side is crossed at y = 0 (see crossing tests);
        // its span [-3.5, 4.5] makes 0 an off-lattice point for g1 = 8
        // (lattice step 1, points at -2.5, -1.5, …), so the crossing stays off.
        let crate::quadtree::NodeKind::Internal { children } = &t.node(t.root).kind else {
            panic!()
        };
        let sw = children[crate::quadtree::QUAD_SW];
        let s = SideInfo::new(&t, &idx, sw, SideDir::East, 8);
        assert_eq!(s.x, Some(XPos::Off(Rat::zero())));
        assert_eq!(s.x_code(), Some(PosCode::Cross));
        assert_eq!(s.code_of(Rat::zero()), Some(PosCode::Cross));
        assert_eq!(s.offset(PosCode::Cross), Rat::zero());
        // With g1 = 16 the lattice step is 0.5 and 0 lands on index 7.
        let s16 = SideInfo::new(&t, &idx, sw, SideDir::East, 16);
        assert_eq!(s16.x, Some(XPos::Lattice(7)));
        assert_eq!(s16.x_code(), Some(PosCode::Grid(7)));
        assert_eq!(s16.code_of(Rat::zero()), Some(PosCode::Grid(7)));
    }

    #[test]
    fn granularity_validity() {
        let (_, t, idx) = tiny_tree();
        let mut s = SideInfo::new(&t, &idx, t.root, SideDir::South, 8);
        s.x = Some(XPos::Lattice(3));
        // At gk = 2 only multiples of 4 remain, plus the crossing index.
        assert!(s.valid_at(PosCode::Grid(4), 2));
        assert!(!s.valid_at(PosCode::Grid(2), 2));
        assert!(s.valid_at(PosCode::Grid(3), 2));
        assert!(s.valid_at(PosCode::Grid(2), 4));
        assert!(!s.valid_at(PosCode::Grid(1), 4));
        assert!(s.valid_at(PosCode::Grid(1), 8));
    }

    #[test]
    fn pool_and_coarse_ordering() {
        let (_, t, idx) = tiny_tree();
        let crate::quadtree::NodeKind::Internal { children } = &t.node(t.root).kind else {
            panic!()
        };
        let sw = children[crate::quadtree::QUAD_SW];
        let s = SideInfo::new(&t, &idx, sw, SideDir::East, 8);
        let pool = s.pool();
        assert_eq!(pool.len(), 8);
        for w in pool.windows(2) {
            assert!(s.offset(w[0]) < s.offset(w[1]));
        }
        assert!(pool.contains(&PosCode::Cross));
        let coarse = s.coarse(2);
        assert_eq!(coarse, vec![PosCode::Grid(4), PosCode::Grid(2), PosCode::Grid(6)]);
    }

    #[test]
    fn snapped_codes_near_target() {
        let (_, t, idx) = tiny_tree();
        let s = SideInfo::new(&t, &idx, t.root, SideDir::South, 8);
        // Target 4.5 is exactly lattice index 4.
        assert_eq!(s.snapped(4.5, 3), vec![PosCode::Grid(4), PosCode::Grid(3), PosCode::Grid(5)]);
        // Clamped at the ends.
        assert_eq!(s.snapped(-100.0, 2), vec![PosCode::Grid(1), PosCode::Grid(2)]);
    }

    #[test]
    fn sibling_sides_build_identical_infos() {
        let (_, t, idx) = tiny_tree();
        let crate::quadtree::NodeKind::Internal { children } = &t.node(t.root).kind else {
            panic!()
        };
        let sw = children[crate::quadtree::QUAD_SW];
        let se = children[crate::quadtree::QUAD_SE];
        let a = SideInfo::new(&t, &idx, sw, SideDir::East, 8);
        let b = SideInfo::new(&t, &idx, se, SideDir::West, 8);
        assert_eq!(a, b);
        for dir in SIDE_DIRS {
            let _ = SideInfo::new(&t, &idx, t.root, dir, 8);
        }
    }
}
