//! Tables for leaf cells.
//!
//! An empty leaf admits exactly the empty behaviour at cost zero. A point
//! leaf holds one or more coincident input points and admits every single
//! path that enters through one boundary position, visits the point, and
//! leaves through another (possibly the same position used twice); its cost
//! is the two straight connections. Higher cells route multiple passes
//! through a leaf cell by adding chords over it, so one path per entry is
//! fully general.

use crate::geometry::{dist, RealPoint};

use super::slots::SideInfo;
use super::table::{Entry, Prov, Table, TableBuilder, Usage};
use super::DpConfig;

pub fn empty_table() -> Table {
    Table {
        entries: vec![Entry {
            usage: Usage::default(),
            pairing: Vec::new(),
            value: 0.0,
            prov: Prov::Empty,
        }],
    }
}

pub fn point_leaf_table(sides: &[SideInfo; 4], p: RealPoint, cfg: &DpConfig) -> Table {
    let mut b = TableBuilder::new();
    let pools: Vec<Vec<(super::slots::PosCode, RealPoint, f64)>> = sides
        .iter()
        .map(|s| {
            s.pool()
                .into_iter()
                .map(|c| {
                    let q = s.point(c);
                    (c, q, dist(q, p))
                })
                .collect()
        })
        .collect();
    let g2 = cfg.gk(2);
    for d1 in 0..4 {
        for (i1, &(c1, _, w1)) in pools[d1].iter().enumerate() {
            for d2 in d1..4 {
                let start = if d1 == d2 { i1 } else { 0 };
                for &(c2, _, w2) in &pools[d2][start..] {
                    let value = w1 + w2;
                    if let Some(ub) = cfg.ub {
                        if value > ub {
                            continue;
                        }
                    }
                    // Doubled positions and same-side pairs put two crossings
                    // on one side, which restricts them to the coarser grid.
                    if d1 == d2 && !(sides[d1].valid_at(c1, g2) && sides[d1].valid_at(c2, g2)) {
                        continue;
                    }
                    let mut usage = Usage::default();
                    if d1 == d2 && c1 == c2 {
                        usage[d1].push((c1, 2));
                    } else if d1 == d2 {
                        usage[d1].push((c1, 1));
                        usage[d1].push((c2, 1));
                    } else {
                        usage[d1].push((c1, 1));
                        usage[d2].push((c2, 1));
                    }
                    b.insert(Entry { usage, pairing: vec![1, 0], value, prov: Prov::Leaf });
                }
            }
        }
    }
    b.finish(cfg.width)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::doubled_tree_tour;
    use crate::crossing::build_index;
    use crate::dp::slots::PosCode;
    use crate::dp::table::expand_ccw;
    use crate::geometry::{GridInstance, Point};
    use crate::quadtree::{NodeKind, Quadtree, Shift, SideDir, SIDE_DIRS};

    #[test]
    fn point_leaf_entries_are_single_paths() {
        let g = GridInstance {
            points: vec![Point { x: 0, y: 0 }, Point { x: 8, y: 0 }],
            l: 8,
        };
        let t = Quadtree::build(&g, Shift { a1: 4, a2: 4 });
        let tour = doubled_tree_tour(&g.points);
        let idx = build_index(&g, &t, &tour);
        let cfg = DpConfig::exact(5, 5);
        // Find a point leaf.
        let leaf = (0..t.nodes.len() as u32)
            .find(|&id| matches!(t.node(id).kind, NodeKind::PointLeaf { .. }))
            .unwrap();
        let sides: [SideInfo; 4] =
            std::array::from_fn(|d| SideInfo::new(&t, &idx, leaf, SIDE_DIRS[d], cfg.g1));
        let p = t.leaf_point(leaf, &g).to_real();
        let table = point_leaf_table(&sides, p, &cfg);
        assert!(!table.is_empty());
        for e in &table.entries {
            let slots = expand_ccw(&e.usage);
            assert_eq!(slots.len(), 2);
            assert_eq!(e.pairing, vec![1, 0]);
            // Cost is the two connections; both at least the distance from
            // the point to its side.
            assert!(e.value >= 0.0 && e.value.is_finite());
        }
        // The doubled-position entry exists: same code used twice.
        assert!(table
            .entries
            .iter()
            .any(|e| e.usage.iter().any(|s| s.iter().any(|&(_, m)| m == 2))));
    }

    #[test]
    fn leaf_cost_is_exactly_two_connections() {
        let g = GridInstance { points: vec![Point { x: 3, y: 3 }], l: 8 };
        let t = Quadtree::build(&g, Shift { a1: 2, a2: 2 });
        let idx = build_index(&g, &t, &doubled_tree_tour(&g.points));
        let cfg = DpConfig::exact(5, 5);
        let sides: [SideInfo; 4] =
            std::array::from_fn(|d| SideInfo::new(&t, &idx, t.root, SIDE_DIRS[d], cfg.g1));
        let p = t.leaf_point(t.root, &g).to_real();
        let table = point_leaf_table(&sides, p, &cfg);
        for e in &table.entries {
            let slots = expand_ccw(&e.usage);
            let q0 = sides[slots[0].0 as usize].point(slots[0].1);
            let q1 = sides[slots[1].0 as usize].point(slots[1].1);
            let want = dist(q0, p) + dist(q1, p);
            assert!((e.value - want).abs() < 1e-12);
        }
        // South side with g1 = 8 contributes 7 lattice codes; none dropped
        // in exact mode.
        let south_single: Vec<PosCode> = table
            .entries
            .iter()
            .filter(|e| e.usage[0].len() == 1 && e.usage[0][0].1 == 2)
            .map(|e| e.usage[0][0].0)
            .collect();
        // Doubled south entries exist only at the g(2) granularity.
        for c in south_single {
            assert!(sides[0].valid_at(c, cfg.gk(2)));
        }
    }
}
