//! Designated side crossings of the start tour.
//!
//! For every quadtree cell side that the start tour crosses, the pipeline
//! fixes one *designated* crossing point, which later joins the side's
//! portal set. Recomputing these by scanning all tour edges per side would
//! cost Θ(n) per cell; instead two tree passes attach each tour edge to
//! exactly the cells it can cross:
//!
//! 1. *Bottom-up*: an edge is attached to every cell on the leaf-to-LCA
//!    paths of its two endpoints. Cells strictly below the LCA contain
//!    exactly one endpoint, so the edge crosses their boundary; the LCA
//!    contains both.
//! 2. *Top-down*: a cell passes an attached edge on to each child whose
//!    open cell the edge intersects, so cells the edge merely passes
//!    through inherit it.
//!
//! Afterwards each cell's attached list is a superset of the edges crossing
//! its sides, and it is scanned once per side. Among the crossing edges the
//! one earliest in tour order wins; both cells adjacent to a shared side
//! therefore designate the same point. The crossing coordinate is computed
//! exactly, rounded to the grid `1/n²`, and nudged off side corners.
//!
//! In expectation over the random shift, the total number of attachments is
//! proportional to the number of actual boundary crossings (plus one LCA
//! entry per edge), which keeps this near-linear.

use crate::geometry::{GridInstance, Tour};
use crate::num::Rat;
use crate::quadtree::{Axis, NodeKind, Quadtree, Side, SideDir, SIDE_DIRS};

/// Where the start tour crosses each (cell, side), if it does.
pub struct CrossingIndex {
    /// Indexed by node id; positions are varying-axis coordinates in grid
    /// units, rounded to multiples of `1/n²`.
    designated: Vec<[Option<Rat>; 4]>,
    /// Total number of (edge, cell) attachment entries stored.
    pub attachments: usize,
    /// Total number of proper (attached edge, cell side) crossings.
    pub crossings: usize,
}

impl CrossingIndex {
    pub fn get(&self, node: u32, dir: SideDir) -> Option<Rat> {
        self.designated[node as usize][dir as usize]
    }
}

/// Endpoints of tour edge `i` as absolute half-unit coordinates.
fn edge_half(grid: &GridInstance, tour: &Tour, i: usize) -> ([i64; 2], [i64; 2]) {
    let n = tour.order.len();
    let a = grid.points[tour.order[i]];
    let b = grid.points[tour.order[(i + 1) % n]];
    ([2 * a.x, 2 * a.y], [2 * b.x, 2 * b.y])
}

/// Exact crossing of segment `(a, b)` with a side, as the varying-axis
/// coordinate in half-units. Proper crossings only: the segment endpoints
/// sit on even half-units and the side's line on odd ones, so an endpoint
/// can never lie on the line; touching an endpoint of the side (a cell
/// corner) does not count.
pub fn side_crossing(a: [i64; 2], b: [i64; 2], side: &Side) -> Option<Rat> {
    let (fixed_axis, vary_axis) = match side.axis {
        Axis::Horizontal => (1, 0),
        Axis::Vertical => (0, 1),
    };
    let da = a[fixed_axis] - side.fixed_half;
    let db = b[fixed_axis] - side.fixed_half;
    debug_assert!(da != 0 && db != 0, "tour vertex on a dissection line");
    if (da > 0) == (db > 0) {
        return None;
    }
    // a + t(b-a) hits the line at t = da / (da - db).
    let den = (da - db) as i128;
    let num = a[vary_axis] as i128 * den + da as i128 * (b[vary_axis] - a[vary_axis]) as i128;
    let x = Rat::new(num, den);
    if Rat::int(side.lo_half as i128) < x && x < Rat::int(side.hi_half as i128) {
        Some(x)
    } else {
        None
    }
}

/// Does segment `(a, b)` intersect the open cell of `node`?
fn seg_intersects_open_cell(a: [i64; 2], b: [i64; 2], lo: [i64; 2], side_half: i64) -> bool {
    // Intersect { t ∈ [0,1] } with the open slabs lo < a+t(b-a) < hi per
    // axis; the segment meets the open rectangle iff the result is nonempty.
    let mut t_lo = Rat::zero();
    let mut t_hi = Rat::int(1);
    let mut lo_open = false;
    let mut hi_open = false;
    for axis in 0..2 {
        let d = b[axis] - a[axis];
        let (c0, c1) = (lo[axis], lo[axis] + side_half);
        if d == 0 {
            if a[axis] <= c0 || a[axis] >= c1 {
                return false;
            }
            continue;
        }
        let ta = Rat::new((c0 - a[axis]) as i128, d as i128);
        let tb = Rat::new((c1 - a[axis]) as i128, d as i128);
        let (slab_lo, slab_hi) = if ta <= tb { (ta, tb) } else { (tb, ta) };
        if slab_lo > t_lo {
            t_lo = slab_lo;
            lo_open = true;
        }
        if slab_hi < t_hi {
            t_hi = slab_hi;
            hi_open = true;
        }
    }
    // Slab bounds are open; the [0,1] bounds are closed.
    if lo_open || hi_open {
        t_lo < t_hi
    } else {
        t_lo <= t_hi
    }
}

pub fn build_index(grid: &GridInstance, tree: &Quadtree, tour: &Tour) -> CrossingIndex {
    let n = grid.points.len();
    let node_count = tree.nodes.len();
    let mut attached: Vec<Vec<u32>> = vec![Vec::new(); node_count];

    let num_edges = if n >= 2 { n } else { 0 };

    // Pass 1: attach each edge along both leaf-to-LCA paths.
    for e in 0..num_edges {
        let u = tour.order[e];
        let v = tour.order[(e + 1) % n];
        let (mut x, mut y) = (tree.leaf_of_point[u], tree.leaf_of_point[v]);
        if x == y {
            attached[x as usize].push(e as u32);
            continue;
        }
        let (mut done_x, mut done_y) = (false, false);
        loop {
            if x == y {
                attached[x as usize].push(e as u32); // the LCA
                break;
            }
            if tree.node(x).level >= tree.node(y).level {
                if !done_x {
                    attached[x as usize].push(e as u32);
                }
                match tree.node(x).parent {
                    Some(p) => x = p,
                    None => done_x = true,
                }
            } else {
                if !done_y {
                    attached[y as usize].push(e as u32);
                }
                match tree.node(y).parent {
                    Some(p) => y = p,
                    None => done_y = true,
                }
            }
        }
    }

    // Pass 2: push edges down to children they intersect. Top-down by id
    // order is not valid (dummy nodes are appended out of order), so walk
    // the tree explicitly.
    let mut stack = vec![tree.root];
    while let Some(id) = stack.pop() {
        let node = tree.node(id);
        let children: Vec<u32> = match &node.kind {
            NodeKind::Internal { children } => children.to_vec(),
            NodeKind::OuterDummy { inner } => vec![*inner],
            _ => Vec::new(),
        };
        for &c in &children {
            let ch = tree.node(c);
            let mut inherited: Vec<u32> = Vec::new();
            for &e in &attached[id as usize] {
                let (a, b) = edge_half(grid, tour, e as usize);
                if seg_intersects_open_cell(a, b, ch.lo_half, ch.side_half)
                    && attached[c as usize].binary_search(&e).is_err()
                {
                    inherited.push(e);
                }
            }
            if !inherited.is_empty() {
                attached[c as usize].extend(inherited);
                attached[c as usize].sort();
            }
            stack.push(c);
        }
    }

    let attachments = attached.iter().map(|a| a.len()).sum();

    // Scan each cell's list once per side; earliest tour edge wins.
    let n2 = (n as i128) * (n as i128);
    let mut designated = vec![[None, None, None, None]; node_count];
    let mut crossings = 0usize;
    for id in 0..node_count as u32 {
        for dir in SIDE_DIRS {
            let side = tree.node(id).side(dir, tree);
            let mut first: Option<Rat> = None;
            for &e in &attached[id as usize] {
                let (a, b) = edge_half(grid, tour, e as usize);
                if let Some(x_half) = side_crossing(a, b, &side) {
                    crossings += 1;
                    if first.is_none() {
                        first = Some(x_half);
                    }
                }
            }
            designated[id as usize][dir as usize] = first.map(|x_half| {
                let units = x_half * Rat::half(1);
                round_onto_side(units, &side, n2)
            });
        }
    }

    CrossingIndex { designated, attachments, crossings }
}

/// Round a crossing coordinate (grid units) to the `1/n²` grid, stepping off
/// the side's corners so the point stays strictly interior.
fn round_onto_side(x: Rat, side: &Side, n2: i128) -> Rat {
    let lo = Rat::half(side.lo_half as i128);
    let hi = Rat::half(side.hi_half as i128);
    debug_assert!(lo < x && x < hi);
    let step = Rat::new(1, n2);
    let mut r = x.round_to(n2);
    if r <= lo {
        r = lo + step;
    }
    if r >= hi {
        r = hi - step;
    }
    debug_assert!(lo < r && r < hi);
    r
}
