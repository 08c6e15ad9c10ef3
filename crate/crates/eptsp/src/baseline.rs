//! Constant-factor start tour via minimum-spanning-tree doubling.
//!
//! The dynamic program needs a tour of cost within a constant factor of
//! optimal before it starts: the tour's side crossings seed the designated
//! portal points, and its cost bounds the search. Doubling an MST and
//! shortcutting the Euler walk gives a factor ≤ 2 and is cheap.
//!
//! Two MST paths: dense Prim (exact, O(n²)) for small inputs, and Borůvka
//! rounds with a uniform-bucket nearest-foreign-point search for large ones
//! (also exact; near-linear on non-adversarial inputs). Both break distance
//! ties by vertex index, so the tree — and hence the tour — is deterministic.

use std::collections::BTreeMap;

use crate::geometry::{grid_dist, Point, Tour};

const DENSE_LIMIT: usize = 2048;

/// Edges of a minimum spanning tree on `pts` (n−1 edges, deterministic).
pub fn mst_edges(pts: &[Point]) -> Vec<(u32, u32)> {
    assert!(!pts.is_empty());
    if pts.len() <= DENSE_LIMIT {
        prim_dense(pts)
    } else {
        boruvka_bucketed(pts)
    }
}

fn prim_dense(pts: &[Point]) -> Vec<(u32, u32)> {
    let n = pts.len();
    let mut in_tree = vec![false; n];
    let mut best_d = vec![f64::INFINITY; n];
    let mut best_from = vec![0u32; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    in_tree[0] = true;
    for j in 1..n {
        best_d[j] = grid_dist(pts[0], pts[j]);
    }
    for _ in 1..n {
        // First minimal candidate wins: deterministic tie-break by index.
        let mut pick = usize::MAX;
        for j in 0..n {
            if !in_tree[j] && (pick == usize::MAX || best_d[j] < best_d[pick]) {
                pick = j;
            }
        }
        in_tree[pick] = true;
        edges.push((best_from[pick], pick as u32));
        for j in 0..n {
            if !in_tree[j] {
                let d = grid_dist(pts[pick], pts[j]);
                if d < best_d[j] {
                    best_d[j] = d;
                    best_from[j] = pick as u32;
                }
            }
        }
    }
    edges
}

struct DisjointSets {
    parent: Vec<u32>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n as u32).collect() }
    }
    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }
    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        // Root by smaller index: keeps component ids deterministic.
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
        true
    }
}

struct Buckets {
    cell: f64,
    min: (i64, i64),
    // Bucket -> point indices; BTreeMap for deterministic iteration.
    map: BTreeMap<(i64, i64), Vec<u32>>,
    side: i64,
}

impl Buckets {
    fn build(pts: &[Point]) -> Buckets {
        let n = pts.len();
        let min_x = pts.iter().map(|p| p.x).min().unwrap();
        let min_y = pts.iter().map(|p| p.y).min().unwrap();
        let max_x = pts.iter().map(|p| p.x).max().unwrap();
        let max_y = pts.iter().map(|p| p.y).max().unwrap();
        let extent = ((max_x - min_x).max(max_y - min_y).max(1)) as f64;
        let side = (n as f64).sqrt().ceil() as i64;
        let cell = extent / side as f64;
        let mut map: BTreeMap<(i64, i64), Vec<u32>> = BTreeMap::new();
        for (i, p) in pts.iter().enumerate() {
            map.entry(bucket_of(*p, (min_x, min_y), cell)).or_default().push(i as u32);
        }
        Buckets { cell, min: (min_x, min_y), map, side }
    }

    /// Nearest point to `pts[i]` whose component differs from `comp`.
    /// Exact: rings expand until the closed ring cannot beat the best hit.
    fn nearest_foreign(&self, pts: &[Point], i: u32, comp: u32, sets: &mut DisjointSets) -> Option<(f64, u32)> {
        let p = pts[i as usize];
        let (bx, by) = bucket_of(p, self.min, self.cell);
        let mut best: Option<(f64, u32)> = None;
        let mut ring = 0i64;
        loop {
            if let Some((d, _)) = best {
                // Points in ring r are ≥ (r-1)·cell away.
                if (ring - 1) as f64 * self.cell > d {
                    break;
                }
            } else if ring > 2 * self.side + 2 {
                return None; // no foreign point at all
            }
            for (cx, cy) in ring_coords(bx, by, ring) {
                let Some(members) = self.map.get(&(cx, cy)) else { continue };
                for &j in members {
                    if sets.find(j) == comp {
                        continue;
                    }
                    let d = grid_dist(p, pts[j as usize]);
                    let better = match best {
                        None => true,
                        // Tie-break on index for determinism.
                        Some((bd, bj)) => d < bd || (d == bd && j < bj),
                    };
                    if better {
                        best = Some((d, j));
                    }
                }
            }
            ring += 1;
        }
        best
    }
}

fn bucket_of(p: Point, min: (i64, i64), cell: f64) -> (i64, i64) {
    (((p.x - min.0) as f64 / cell) as i64, ((p.y - min.1) as f64 / cell) as i64)
}

fn ring_coords(bx: i64, by: i64, ring: i64) -> Vec<(i64, i64)> {
    if ring == 0 {
        return vec![(bx, by)];
    }
    let mut out = Vec::with_capacity((8 * ring) as usize);
    for dx in -ring..=ring {
        out.push((bx + dx, by - ring));
        out.push((bx + dx, by + ring));
    }
    for dy in (-ring + 1)..ring {
        out.push((bx - ring, by + dy));
        out.push((bx + ring, by + dy));
    }
    out
}

fn boruvka_bucketed(pts: &[Point]) -> Vec<(u32, u32)> {
    let n = pts.len();
    let buckets = Buckets::build(pts);
    let mut sets = DisjointSets::new(n);
    let mut edges = Vec::with_capacity(n - 1);
    let mut components = n;
    while components > 1 {
        // Cheapest outgoing edge per component, keyed by component root.
        let mut cheapest: BTreeMap<u32, (f64, u32, u32)> = BTreeMap::new();
        for i in 0..n as u32 {
            let comp = sets.find(i);
            if let Some((d, j)) = buckets.nearest_foreign(pts, i, comp, &mut sets) {
                let cand = (d, i, j);
                let better = match cheapest.get(&comp) {
                    None => true,
                    Some(&(bd, bu, bv)) => (d, i, j) < (bd, bu, bv),
                };
                if better {
                    cheapest.insert(comp, cand);
                }
            }
        }
        assert!(!cheapest.is_empty(), "disconnected point set");
        let mut merged_any = false;
        for (_, (_, u, v)) in cheapest {
            if sets.union(u, v) {
                edges.push((u, v));
                components -= 1;
                merged_any = true;
            }
        }
        assert!(merged_any);
    }
    edges
}

/// Total length of an edge list.
pub fn edges_weight(pts: &[Point], edges: &[(u32, u32)]) -> f64 {
    edges.iter().map(|&(u, v)| grid_dist(pts[u as usize], pts[v as usize])).sum()
}

/// Start tour: double the MST, walk it from vertex 0, shortcut repeats.
/// Cost is at most twice the tree weight.
pub fn doubled_tree_tour(pts: &[Point]) -> Tour {
    let n = pts.len();
    assert!(n >= 1);
    if n == 1 {
        return Tour::new(vec![0]);
    }
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in &mst_edges(pts) {
        adj[u as usize].push(v);
        adj[v as usize].push(u);
    }
    for a in &mut adj {
        a.sort();
    }
    // Iterative preorder from 0, children in index order.
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut stack = vec![0u32];
    while let Some(u) = stack.pop() {
        if seen[u as usize] {
            continue;
        }
        seen[u as usize] = true;
        order.push(u as usize);
        for &v in adj[u as usize].iter().rev() {
            if !seen[v as usize] {
                stack.push(v);
            }
        }
    }
    assert_eq!(order.len(), n);
    Tour::new(order)
}
