//! Randomly shifted dissection and the compressed quadtree over it.
//!
//! The dissection square has side `2L` and is positioned so that a shift
//! `(a₁, a₂) ∈ {1, …, L}²` slides the grid relative to the input: its corner
//! sits at `(−a₁ + ½, −a₂ + ½)`. The half-unit offset puts every dissection
//! line on a half-integer coordinate while input points are integers, so no
//! point ever lies on a cell boundary.
//!
//! Internally all cell coordinates are stored in *half-units* (twice the
//! grid coordinate), which makes them plain `i64`s: points sit on even
//! half-units, boundaries on odd ones. The parity gap is the "points are
//! interior" argument, checked in debug builds.
//!
//! Construction sorts points by Morton key (bit-interleaved shifted
//! coordinates) and recursively splits ranges, creating nodes only where a
//! cell actually separates points — the compressed quadtree. A
//! normalization pass then gives every internal vertex exactly four
//! children, inserting two kinds of dummy vertices:
//!
//! * an *empty leaf* for a quadrant containing no points, and
//! * an *outer dummy* for a quadrant whose occupied sub-cell lies more than
//!   one level deeper; the dummy sits at the quadrant cell and has the deep
//!   node as its only child (the annulus between them is point-free).
//!
//! The result has `O(n)` vertices and depth at most `log₂(2L)`.

use rand::Rng;

use crate::geometry::{GridInstance, Point};

/// Dissection shift, coordinates in `{1, …, L}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shift {
    pub a1: u64,
    pub a2: u64,
}

impl Shift {
    pub fn sample<R: Rng>(l: u64, rng: &mut R) -> Shift {
        let a1 = rng.gen_range(1..=l);
        let a2 = rng.gen_range(1..=l);
        Shift { a1, a2 }
    }
}

/// Quadrant index: bit 0 = east half, bit 1 = north half.
pub const QUAD_SW: usize = 0;
pub const QUAD_SE: usize = 1;
pub const QUAD_NW: usize = 2;
pub const QUAD_NE: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SideDir {
    South,
    East,
    North,
    West,
}

pub const SIDE_DIRS: [SideDir; 4] = [SideDir::South, SideDir::East, SideDir::North, SideDir::West];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    /// Varying x, fixed y.
    Horizontal,
    /// Varying y, fixed x.
    Vertical,
}

/// One side of a cell, in half-units.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Side {
    pub axis: Axis,
    /// Coordinate of the supporting dissection line.
    pub fixed_half: i64,
    pub lo_half: i64,
    pub hi_half: i64,
    /// Level at which the supporting line first appears in the dissection.
    pub line_level: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Internal { children: [u32; 4] },
    /// Quadrant whose occupied sub-cell lies more than one level deeper;
    /// `inner` is that sub-cell's node. The ring between the two boundaries
    /// contains no input points.
    OuterDummy { inner: u32 },
    EmptyLeaf,
    /// All points in this leaf share one grid position (`first..first+count`
    /// index into the tree's Morton-sorted point permutation).
    PointLeaf { first: u32, count: u32 },
}

#[derive(Clone, Debug)]
pub struct Node {
    pub lo_half: [i64; 2],
    pub side_half: i64,
    pub level: u32,
    pub parent: Option<u32>,
    pub kind: NodeKind,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::EmptyLeaf | NodeKind::PointLeaf { .. })
    }

    pub fn contains_half(&self, x_half: i64, y_half: i64) -> bool {
        x_half > self.lo_half[0]
            && x_half < self.lo_half[0] + self.side_half
            && y_half > self.lo_half[1]
            && y_half < self.lo_half[1] + self.side_half
    }

    /// Side of this cell facing `dir`.
    pub fn side(&self, dir: SideDir, tree: &Quadtree) -> Side {
        let [x0, y0] = self.lo_half;
        let s = self.side_half;
        let (axis, fixed, lo, hi) = match dir {
            SideDir::South => (Axis::Horizontal, y0, x0, x0 + s),
            SideDir::North => (Axis::Horizontal, y0 + s, x0, x0 + s),
            SideDir::West => (Axis::Vertical, x0, y0, y0 + s),
            SideDir::East => (Axis::Vertical, x0 + s, y0, y0 + s),
        };
        let root_lo = match axis {
            Axis::Horizontal => tree.nodes[tree.root as usize].lo_half[1],
            Axis::Vertical => tree.nodes[tree.root as usize].lo_half[0],
        };
        let line_level = tree.line_level(fixed - root_lo);
        debug_assert!(line_level <= self.level);
        Side { axis, fixed_half: fixed, lo_half: lo, hi_half: hi, line_level }
    }
}

#[derive(Clone, Debug)]
pub struct Quadtree {
    pub nodes: Vec<Node>,
    pub root: u32,
    pub shift: Shift,
    pub l: u64,
    /// `log₂(4L)`: number of half-unit coordinate bits per axis.
    pub coord_bits: u32,
    /// Point indices sorted by Morton key (leaf ranges index into this).
    pub point_perm: Vec<u32>,
    /// For each input point, the id of its leaf.
    pub leaf_of_point: Vec<u32>,
}

// Spread the 64 bits of v so they occupy the even bit positions of a u128.
fn spread(v: u64) -> u128 {
    let mut x = v as u128;
    x = (x | (x << 32)) & 0x0000_0000_ffff_ffff_0000_0000_ffff_ffff;
    x = (x | (x << 16)) & 0x0000_ffff_0000_ffff_0000_ffff_0000_ffff;
    x = (x | (x << 8)) & 0x00ff_00ff_00ff_00ff_00ff_00ff_00ff_00ff;
    x = (x | (x << 4)) & 0x0f0f_0f0f_0f0f_0f0f_0f0f_0f0f_0f0f_0f0f;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333_3333_3333_3333_3333;
    x = (x | (x << 1)) & 0x5555_5555_5555_5555_5555_5555_5555_5555;
    x
}

fn morton(sx: u64, sy: u64) -> u128 {
    spread(sx) | (spread(sy) << 1)
}

struct Builder {
    shift: Shift,
    nodes: Vec<Node>,
    /// (key, point index), sorted.
    keyed: Vec<(u128, u32)>,
    coord_bits: u32,
}

impl Builder {
    // Shifted half-unit coordinates relative to the root corner; always odd
    // would be the boundary, points land on even offsets in [1, 4L-1].
    fn shifted(&self, p: Point) -> (u64, u64) {
        let sx = 2 * p.x + 2 * self.shift.a1 as i64 - 1;
        let sy = 2 * p.y + 2 * self.shift.a2 as i64 - 1;
        debug_assert!(sx > 0 && sy > 0);
        (sx as u64, sy as u64)
    }

    fn push(&mut self, node: Node) -> u32 {
        let id = self.nodes.len() as u32;
        assert!(id != u32::MAX, "quadtree too large");
        self.nodes.push(node);
        id
    }

    /// Build the compressed subtree for `keyed[range]`, whose points all lie
    /// in the cell at `(origin, side_half, level)`. Returns the id of the
    /// subtree root, which may sit deeper than `level` (compression).
    fn descend(&mut self, range: std::ops::Range<usize>, origin: [i64; 2], side_half: i64, level: u32) -> u32 {
        debug_assert!(!range.is_empty());
        let first_key = self.keyed[range.start].0;
        let all_equal = self.keyed[range.clone()].iter().all(|&(k, _)| k == first_key);
        if all_equal {
            // Identical keys = identical positions: a point leaf, placed at
            // the largest cell in which the set is alone (the current one).
            return self.push(Node {
                lo_half: origin,
                side_half,
                level,
                parent: None,
                kind: NodeKind::PointLeaf { first: range.start as u32, count: range.len() as u32 },
            });
        }
        debug_assert!(side_half > 2, "distinct points in a unit cell");

        // Partition by the quadrant bit pair for this level. Keys are sorted,
        // so each quadrant is a contiguous subrange.
        let bit = 2 * (self.coord_bits - 1 - level);
        let quad_of = |key: u128| ((key >> bit) & 3) as usize;
        let mut bounds = [range.start; 5];
        for q in 0..4 {
            let mut i = bounds[q];
            while i < range.end && quad_of(self.keyed[i].0) == q {
                i += 1;
            }
            bounds[q + 1] = i;
        }
        debug_assert_eq!(bounds[4], range.end);

        let half = side_half / 2;
        let quad_origin = |q: usize| {
            [
                origin[0] + if q & 1 != 0 { half } else { 0 },
                origin[1] + if q & 2 != 0 { half } else { 0 },
            ]
        };
        let occupied: Vec<usize> = (0..4).filter(|&q| bounds[q] < bounds[q + 1]).collect();

        if occupied.len() == 1 {
            // All points in one quadrant: skip this cell entirely.
            let q = occupied[0];
            return self.descend(range, quad_origin(q), half, level + 1);
        }

        let id = self.push(Node {
            lo_half: origin,
            side_half,
            level,
            parent: None,
            kind: NodeKind::Internal { children: [u32::MAX; 4] },
        });
        let mut children = [u32::MAX; 4];
        for &q in &occupied {
            children[q] = self.descend(bounds[q]..bounds[q + 1], quad_origin(q), half, level + 1);
        }
        if let NodeKind::Internal { children: slot } = &mut self.nodes[id as usize].kind {
            *slot = children;
        }
        id
    }
}

impl Quadtree {
    pub fn build(grid: &GridInstance, shift: Shift) -> Quadtree {
        let l = grid.l;
        assert!(shift.a1 >= 1 && shift.a1 <= l && shift.a2 >= 1 && shift.a2 <= l);
        let side_half = 4 * l as i64;
        let coord_bits = side_half.trailing_zeros();
        assert!(coord_bits <= 60, "grid extent out of range");
        let root_lo = [1 - 2 * shift.a1 as i64, 1 - 2 * shift.a2 as i64];

        let mut b = Builder { shift, nodes: Vec::new(), keyed: Vec::new(), coord_bits };
        b.keyed = grid
            .points
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let (sx, sy) = b.shifted(p);
                (morton(sx, sy), i as u32)
            })
            .collect();
        b.keyed.sort();

        let top = b.descend(0..b.keyed.len(), root_lo, side_half, 0);
        let root = if b.nodes[top as usize].level == 0 {
            top
        } else {
            // The whole point set sits in one deep cell: materialize the root
            // so the dissection's outermost square is always represented.
            b.push(Node {
                lo_half: root_lo,
                side_half,
                level: 0,
                parent: None,
                kind: NodeKind::Internal { children: [u32::MAX; 4] },
            })
        };

        let mut tree = Quadtree {
            nodes: b.nodes,
            root,
            shift,
            l,
            coord_bits,
            point_perm: b.keyed.iter().map(|&(_, i)| i).collect(),
            leaf_of_point: vec![u32::MAX; grid.points.len()],
        };
        tree.normalize(top);
        tree.index_leaves();
        tree.set_parents();
        debug_assert!(tree.check_invariants(grid));
        tree
    }

    /// Give every internal vertex exactly four children, adding empty leaves
    /// and outer dummies. `top` is the pre-normalization tree root (which may
    /// lie deeper than the dissection root when the top chain was compressed).
    fn normalize(&mut self, top: u32) {
        // The materialized root may still have the placeholder child array.
        if self.root != top {
            let q = self.quadrant_of(self.root, top);
            let mut children = [u32::MAX; 4];
            children[q] = top;
            self.nodes[self.root as usize].kind = NodeKind::Internal { children };
        }

        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            let node = self.nodes[id as usize].clone();
            let NodeKind::Internal { children } = node.kind else { continue };
            let half = node.side_half / 2;
            let mut filled = [u32::MAX; 4];
            for q in 0..4 {
                let origin = [
                    node.lo_half[0] + if q & 1 != 0 { half } else { 0 },
                    node.lo_half[1] + if q & 2 != 0 { half } else { 0 },
                ];
                let c = children[q];
                filled[q] = if c == u32::MAX {
                    self.alloc(Node {
                        lo_half: origin,
                        side_half: half,
                        level: node.level + 1,
                        parent: None,
                        kind: NodeKind::EmptyLeaf,
                    })
                } else if self.nodes[c as usize].level == node.level + 1 {
                    stack.push(c);
                    c
                } else {
                    debug_assert!(self.nodes[c as usize].level > node.level + 1);
                    stack.push(c);
                    self.alloc(Node {
                        lo_half: origin,
                        side_half: half,
                        level: node.level + 1,
                        parent: None,
                        kind: NodeKind::OuterDummy { inner: c },
                    })
                };
            }
            self.nodes[id as usize].kind = NodeKind::Internal { children: filled };
        }
    }

    fn alloc(&mut self, node: Node) -> u32 {
        let id = self.nodes.len() as u32;
        assert!(id != u32::MAX, "quadtree too large");
        self.nodes.push(node);
        id
    }

    /// Quadrant of ancestor cell `anc` containing node `id`.
    fn quadrant_of(&self, anc: u32, id: u32) -> usize {
        let a = &self.nodes[anc as usize];
        let c = &self.nodes[id as usize];
        let half = a.side_half / 2;
        let qx = (c.lo_half[0] >= a.lo_half[0] + half) as usize;
        let qy = (c.lo_half[1] >= a.lo_half[1] + half) as usize;
        (qy << 1) | qx
    }

    fn index_leaves(&mut self) {
        for id in 0..self.nodes.len() {
            if let NodeKind::PointLeaf { first, count } = self.nodes[id].kind {
                for i in first..first + count {
                    let p = self.point_perm[i as usize];
                    self.leaf_of_point[p as usize] = id as u32;
                }
            }
        }
    }

    fn set_parents(&mut self) {
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            match self.nodes[id as usize].kind.clone() {
                NodeKind::Internal { children } => {
                    for c in children {
                        self.nodes[c as usize].parent = Some(id);
                        stack.push(c);
                    }
                }
                NodeKind::OuterDummy { inner } => {
                    self.nodes[inner as usize].parent = Some(id);
                    stack.push(inner);
                }
                _ => {}
            }
        }
    }

    /// Level at which a dissection line at half-unit offset `m` from the root
    /// corner first appears. Lines at level ℓ sit at multiples of `4L/2^ℓ`.
    pub fn line_level(&self, m: i64) -> u32 {
        debug_assert!((0..=4 * self.l as i64).contains(&m));
        if m == 0 {
            return 0;
        }
        self.coord_bits - (m.trailing_zeros()).min(self.coord_bits)
    }

    pub fn vertex_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: u32) -> &Node {
        &self.nodes[id as usize]
    }

    /// Grid position shared by all points of a point leaf.
    pub fn leaf_point(&self, id: u32, grid: &GridInstance) -> Point {
        match self.nodes[id as usize].kind {
            NodeKind::PointLeaf { first, .. } => grid.points[self.point_perm[first as usize] as usize],
            _ => panic!("not a point leaf"),
        }
    }

    /// Indices of the input points stored in a point leaf.
    pub fn leaf_members(&self, id: u32) -> &[u32] {
        match self.nodes[id as usize].kind {
            NodeKind::PointLeaf { first, count } => {
                &self.point_perm[first as usize..(first + count) as usize]
            }
            _ => &[],
        }
    }

    fn check_invariants(&self, grid: &GridInstance) -> bool {
        for (id, node) in self.nodes.iter().enumerate() {
            match &node.kind {
                NodeKind::Internal { children } => {
                    for &c in children {
                        let ch = &self.nodes[c as usize];
                        assert_eq!(ch.level, node.level + 1, "child level at node {id}");
                        assert_eq!(ch.side_half * 2, node.side_half);
                    }
                }
                NodeKind::OuterDummy { inner } => {
                    let inn = &self.nodes[*inner as usize];
                    assert!(inn.level > node.level + 1, "outer dummy must compress ≥ 2 levels");
                    assert!(
                        inn.lo_half[0] > node.lo_half[0]
                            || inn.lo_half[0] + inn.side_half < node.lo_half[0] + node.side_half
                            || inn.lo_half[1] > node.lo_half[1]
                            || inn.lo_half[1] + inn.side_half < node.lo_half[1] + node.side_half
                            || inn.side_half < node.side_half
                    );
                    assert!(!matches!(inn.kind, NodeKind::EmptyLeaf | NodeKind::OuterDummy { .. }));
                }
                NodeKind::PointLeaf { first, count } => {
                    // All members coincide.
                    let pos = grid.points[self.point_perm[*first as usize] as usize];
                    for i in *first..first + count {
                        assert_eq!(grid.points[self.point_perm[i as usize] as usize], pos);
                    }
                }
                NodeKind::EmptyLeaf => {}
            }
        }
        // Every point is interior to its leaf.
        for (i, &leaf) in self.leaf_of_point.iter().enumerate() {
            assert!(leaf != u32::MAX, "point {i} not assigned to a leaf");
            let p = grid.points[i];
            let (sx, sy) = (2 * p.x - 1 + 2 * self.shift.a1 as i64, 2 * p.y - 1 + 2 * self.shift.a2 as i64);
            // Translate back to absolute half-units.
            let x_half = sx + self.nodes[self.root as usize].lo_half[0];
            let y_half = sy + self.nodes[self.root as usize].lo_half[1];
            assert!(self.nodes[leaf as usize].contains_half(x_half, y_half), "point {i} on or outside leaf boundary");
        }
        true
    }

    /// Indented structural dump for debugging and golden tests.
    pub fn dump(&self) -> String {
        fn fmt_half(v: i64) -> String {
            if v % 2 == 0 {
                format!("{}", v / 2)
            } else {
                format!("{}.5", if v >= 0 { v / 2 } else { v / 2 - 1 })
            }
        }
        fn rec(t: &Quadtree, id: u32, depth: usize, out: &mut String) {
            let n = &t.nodes[id as usize];
            let kind = match &n.kind {
                NodeKind::Internal { .. } => "internal".to_string(),
                NodeKind::OuterDummy { .. } => "outer-dummy".to_string(),
                NodeKind::EmptyLeaf => "empty".to_string(),
                NodeKind::PointLeaf { count, .. } => format!("leaf x{count}"),
            };
            out.push_str(&format!(
                "{}L{} [{},{}]+{} {}\n",
                "  ".repeat(depth),
                n.level,
                fmt_half(n.lo_half[0]),
                fmt_half(n.lo_half[1]),
                fmt_half(n.side_half),
                kind
            ));
            match &n.kind {
                NodeKind::Internal { children } => {
                    for &c in children {
                        rec(t, c, depth + 1, out);
                    }
                }
                NodeKind::OuterDummy { inner } => rec(t, *inner, depth + 1, out),
                _ => {}
            }
        }
        let mut out = String::new();
        rec(self, self.root, 0, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::preprocess;
    use crate::geometry::RealPoint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid_of(points: &[(i64, i64)], l: u64) -> GridInstance {
        GridInstance { points: points.iter().map(|&(x, y)| Point { x, y }).collect(), l }
    }

    #[test]
    fn shift_sampling_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let s = Shift::sample(16, &mut rng);
            assert!((1..=16).contains(&s.a1));
            assert!((1..=16).contains(&s.a2));
        }
    }

    #[test]
    fn single_point_tree_is_one_leaf() {
        let g = grid_of(&[(3, 3)], 8);
        let t = Quadtree::build(&g, Shift { a1: 2, a2: 5 });
        assert_eq!(t.vertex_count(), 1);
        assert!(matches!(t.nodes[t.root as usize].kind, NodeKind::PointLeaf { count: 1, .. }));
        assert_eq!(t.nodes[t.root as usize].level, 0);
    }

    #[test]
    fn coincident_points_form_one_leaf() {
        let g = grid_of(&[(3, 3), (3, 3), (3, 3)], 8);
        let t = Quadtree::build(&g, Shift { a1: 1, a2: 1 });
        assert_eq!(t.vertex_count(), 1);
        assert!(matches!(t.nodes[t.root as usize].kind, NodeKind::PointLeaf { count: 3, .. }));
    }

    #[test]
    fn internal_nodes_have_exactly_four_children() {
        let g = grid_of(&[(0, 0), (7, 0), (0, 7), (7, 7), (3, 4)], 8);
        let t = Quadtree::build(&g, Shift { a1: 4, a2: 3 });
        let mut internals = 0;
        for n in &t.nodes {
            if let NodeKind::Internal { children } = &n.kind {
                internals += 1;
                assert!(children.iter().all(|&c| c != u32::MAX));
            }
        }
        assert!(internals >= 1);
    }

    #[test]
    fn compression_only_at_root() {
        // Points far apart but both in one deep corner: the root chain is
        // compressed into an outer dummy below the root.
        let g = grid_of(&[(0, 0), (1, 1)], 1 << 6);
        let t = Quadtree::build(&g, Shift { a1: 64, a2: 64 });
        // Non-root internal nodes must separate points into ≥ 2 children.
        for (id, n) in t.nodes.iter().enumerate() {
            if id as u32 == t.root {
                continue;
            }
            if let NodeKind::Internal { children } = &n.kind {
                let nonempty = children
                    .iter()
                    .filter(|&&c| !matches!(t.nodes[c as usize].kind, NodeKind::EmptyLeaf))
                    .count();
                assert!(nonempty >= 2, "compressed chain left in tree at node {id}");
            }
        }
    }

    #[test]
    fn outer_dummy_wraps_deeper_cell() {
        let g = grid_of(&[(0, 0), (1, 0)], 1 << 8);
        let t = Quadtree::build(&g, Shift { a1: 256, a2: 256 });
        let mut found = false;
        for n in &t.nodes {
            if let NodeKind::OuterDummy { inner } = n.kind {
                found = true;
                let inn = &t.nodes[inner as usize];
                assert!(inn.level > n.level + 1);
                assert!(inn.lo_half[0] >= n.lo_half[0] && inn.lo_half[1] >= n.lo_half[1]);
                assert!(
                    inn.lo_half[0] + inn.side_half <= n.lo_half[0] + n.side_half
                        && inn.lo_half[1] + inn.side_half <= n.lo_half[1] + n.side_half
                );
            }
        }
        assert!(found, "expected at least one outer dummy");
    }

    #[test]
    fn vertex_count_linear_in_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2usize, 5, 20, 100, 500] {
            let pts: Vec<RealPoint> = (0..n)
                .map(|_| RealPoint { x: rng.gen_range(0.0..1000.0), y: rng.gen_range(0.0..1000.0) })
                .collect();
            let g = preprocess(&pts, 1.0, 8.0);
            let shift = Shift::sample(g.l, &mut rng);
            let t = Quadtree::build(&g, shift);
            assert!(t.vertex_count() <= 16 * n, "n={n}: {} vertices", t.vertex_count());
        }
    }

    #[test]
    fn depth_bounded_by_log() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<RealPoint> =
            (0..64).map(|_| RealPoint { x: rng.gen_range(0.0..100.0), y: rng.gen_range(0.0..100.0) }).collect();
        let g = preprocess(&pts, 1.0, 8.0);
        let t = Quadtree::build(&g, Shift::sample(g.l, &mut rng));
        let max_level = (2 * g.l).trailing_zeros();
        for n in &t.nodes {
            assert!(n.level <= max_level);
            assert!(n.side_half >= 2);
        }
    }

    #[test]
    fn sides_and_line_levels() {
        let g = grid_of(&[(0, 0), (7, 7)], 8);
        let t = Quadtree::build(&g, Shift { a1: 4, a2: 4 });
        let root = &t.nodes[t.root as usize];
        for dir in SIDE_DIRS {
            let s = root.side(dir, &t);
            assert_eq!(s.line_level, 0);
            assert_eq!(s.hi_half - s.lo_half, root.side_half);
        }
        // A level-1 child's inner sides sit on the level-1 center lines.
        if let NodeKind::Internal { children } = &root.kind {
            let sw = &t.nodes[children[QUAD_SW] as usize];
            assert_eq!(sw.side(SideDir::North, &t).line_level, 1);
            assert_eq!(sw.side(SideDir::East, &t).line_level, 1);
            assert_eq!(sw.side(SideDir::South, &t).line_level, 0);
            assert_eq!(sw.side(SideDir::West, &t).line_level, 0);
        } else {
            panic!("root should split");
        }
    }

    #[test]
    fn sibling_cells_share_side_geometry() {
        let g = grid_of(&[(1, 1), (6, 1), (1, 6), (6, 6)], 8);
        let t = Quadtree::build(&g, Shift { a1: 4, a2: 4 });
        let NodeKind::Internal { children } = &t.nodes[t.root as usize].kind else {
            panic!("root should split")
        };
        let sw = &t.nodes[children[QUAD_SW] as usize];
        let se = &t.nodes[children[QUAD_SE] as usize];
        let east_of_sw = sw.side(SideDir::East, &t);
        let west_of_se = se.side(SideDir::West, &t);
        assert_eq!(east_of_sw, west_of_se);
    }

    #[test]
    fn morton_build_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let pts: Vec<RealPoint> =
            (0..50).map(|_| RealPoint { x: rng.gen_range(0.0..50.0), y: rng.gen_range(0.0..50.0) }).collect();
        let g = preprocess(&pts, 0.5, 8.0);
        let t1 = Quadtree::build(&g, Shift { a1: 17, a2: 5 });
        let t2 = Quadtree::build(&g, Shift { a1: 17, a2: 5 });
        assert_eq!(t1.dump(), t2.dump());
        assert_eq!(t1.point_perm, t2.point_perm);
    }

    #[test]
    fn dump_shape() {
        let g = grid_of(&[(0, 0), (7, 7)], 8);
        let t = Quadtree::build(&g, Shift { a1: 4, a2: 4 });
        let d = t.dump();
        assert!(d.starts_with("L0 [-3.5,-3.5]+16 internal\n"));
        assert_eq!(d.lines().count(), t.vertex_count());
    }
}
