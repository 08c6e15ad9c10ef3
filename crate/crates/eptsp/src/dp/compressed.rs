//! Tables for ring cells (a quadrant wrapping a much deeper occupied cell).
//!
//! The ring between the two boundaries contains no input points, so a
//! behaviour of the outer cell is an inner behaviour plus straight
//! connectors joining every inner boundary slot to an outer boundary slot.
//! Connectors must not cross each other, which combinatorially means the
//! outer slots, read counterclockwise, align with the inner slots under
//! some cyclic rotation; enumerating the rotation and a ccw-monotone outer
//! position sequence covers exactly the non-crossing alignments.
//!
//! Where the inner boundary lies on the outer boundary the two cells share
//! a physical side segment, and a crossing of that segment is a crossing of
//! both: the outer usage there must replicate the inner usage exactly.

use crate::geometry::{dist, RealPoint};
use crate::quadtree::Axis;

use super::slots::{PosCode, SideInfo};
use super::table::{expand_ccw, Entry, Prov, Table, TableBuilder, Usage, SIDE_COUNT};
use super::DpConfig;

struct RingEnum<'a> {
    /// Candidate outer positions in ccw order: (side, code, point, ccw-unique).
    cands: &'a [(u8, PosCode, RealPoint)],
    /// Inner slot points in ccw expansion order.
    inner_pts: &'a [RealPoint],
    rot: usize,
    k_max: u32,
    ub: f64,
    budget: &'a mut u64,
    hits: Vec<(Vec<(u8, PosCode)>, f64)>,
}

impl RingEnum<'_> {
    fn rec(
        &mut self,
        t: usize,
        cursor: usize,
        used_at_cursor: u8,
        counts: [u8; 4],
        sel: &mut Vec<(u8, PosCode)>,
        cost: f64,
    ) {
        if t == self.inner_pts.len() {
            self.hits.push((sel.clone(), cost));
            return;
        }
        let target = self.inner_pts[(t + self.rot) % self.inner_pts.len()];
        for gi in cursor..self.cands.len() {
            if *self.budget == 0 {
                return;
            }
            *self.budget -= 1;
            let avail = if gi == cursor { 2 - used_at_cursor } else { 2 };
            if avail == 0 {
                continue;
            }
            let (d, code, pt) = self.cands[gi];
            if counts[d as usize] as u32 >= self.k_max {
                continue;
            }
            let step = dist(pt, target);
            if cost + step > self.ub {
                continue;
            }
            let mut counts2 = counts;
            counts2[d as usize] += 1;
            sel.push((d, code));
            let used2 = if gi == cursor { used_at_cursor + 1 } else { 1 };
            self.rec(t + 1, gi, used2, counts2, sel, cost + step);
            sel.pop();
        }
    }
}

pub fn compressed_table(
    outer: &[SideInfo; 4],
    inner: &[SideInfo; 4],
    inner_table: &Table,
    cfg: &DpConfig,
) -> Table {
    // Sides whose supporting lines coincide; there the inner side is a
    // sub-segment of the outer side.
    let shared: [bool; 4] = std::array::from_fn(|d| outer[d].fixed == inner[d].fixed);
    let mut b = TableBuilder::new();

    for (ei, e) in inner_table.entries.iter().enumerate() {
        let inner_slots = expand_ccw(&e.usage);
        let m = inner_slots.len();
        debug_assert!(m >= 2 && m % 2 == 0, "ring around an unvisited cell");
        if m == 0 {
            continue;
        }
        let inner_pts: Vec<RealPoint> = inner_slots
            .iter()
            .map(|&(d, c, _)| inner[d as usize].point(c))
            .collect();

        // Required outer usage on shared segments: the inner usage, mapped.
        // Unmappable positions make the whole inner entry unusable here.
        let mut required: [Vec<(PosCode, u8)>; SIDE_COUNT] = Default::default();
        let mut mappable = true;
        'req: for d in 0..SIDE_COUNT {
            if !shared[d] {
                continue;
            }
            for &(c, mult) in &e.usage[d] {
                match outer[d].code_of(inner[d].offset(c)) {
                    Some(oc) => required[d].push((oc, mult)),
                    None => {
                        mappable = false;
                        break 'req;
                    }
                }
            }
        }
        if !mappable {
            continue;
        }

        // Candidate outer positions, ccw-ordered, shared sub-segments
        // restricted to exactly the required positions.
        let mut cands: Vec<(u8, PosCode, RealPoint)> = Vec::new();
        for d in 0..SIDE_COUNT {
            let side = &outer[d];
            let mut codes: Vec<PosCode> = if cfg.exact() {
                side.pool()
            } else {
                let mut cs: Vec<PosCode> = side.coarse(2).into_iter().collect();
                cs.extend(side.x_code());
                for pt in &inner_pts {
                    let t = match side.axis {
                        Axis::Horizontal => pt.x,
                        Axis::Vertical => pt.y,
                    };
                    cs.extend(side.snapped(t, cfg.snap_cands));
                }
                cs.extend(required[d].iter().map(|&(c, _)| c));
                cs.sort_by(|&a, &b| side.cmp_codes(a, b));
                cs.dedup();
                cs
            };
            if shared[d] {
                // Inside the shared sub-segment only required codes remain.
                codes.retain(|&c| {
                    let off = side.offset(c);
                    off <= inner[d].lo
                        || off >= inner[d].hi
                        || required[d].iter().any(|&(rc, _)| rc == c)
                });
            }
            // ccw traversal: south/east ascending, north/west descending.
            if d >= 2 {
                codes.reverse();
            }
            for c in codes {
                cands.push((d as u8, c, side.point(c)));
            }
        }

        let ub = cfg.ub.map(|u| u - e.value).unwrap_or(f64::INFINITY);
        if ub < 0.0 {
            continue;
        }
        for rot in 0..m {
            let mut budget = cfg.ring_budget;
            let mut re = RingEnum {
                cands: &cands,
                inner_pts: &inner_pts,
                rot,
                k_max: cfg.k_max,
                ub,
                budget: &mut budget,
                hits: Vec::new(),
            };
            re.rec(0, 0, 0, [0; 4], &mut Vec::new(), 0.0);
            let hits = re.hits;
            'hit: for (sel, cost) in hits {
                // Per-side usage in offset order (selection order is ccw).
                let mut usage = Usage::default();
                for &(d, c) in &sel {
                    let list = &mut usage[d as usize];
                    match list.last_mut() {
                        Some(last) if last.0 == c => last.1 += 1,
                        _ => list.push((c, 1)),
                    }
                }
                for d in 2..SIDE_COUNT {
                    usage[d].reverse();
                }
                // Exact replication on shared segments.
                for d in 0..SIDE_COUNT {
                    if !shared[d] {
                        continue;
                    }
                    for &(rc, mult) in &required[d] {
                        let got =
                            usage[d].iter().find(|&&(c, _)| c == rc).map(|&(_, m2)| m2).unwrap_or(0);
                        if got != mult {
                            continue 'hit;
                        }
                    }
                }
                // Own-count granularity validity per side.
                for d in 0..SIDE_COUNT {
                    let k: u8 = usage[d].iter().map(|&(_, m2)| m2).sum();
                    if k == 0 {
                        continue;
                    }
                    let gk = cfg.gk(k as u32);
                    if !usage[d].iter().all(|&(c, _)| outer[d].valid_at(c, gk)) {
                        continue 'hit;
                    }
                }
                debug_assert_eq!(
                    expand_ccw(&usage).iter().map(|&(d, c, _)| (d, c)).collect::<Vec<_>>(),
                    sel
                );
                // Outer slot t pairs with outer slot u when their inner
                // partners (t+rot, u+rot) are paired inside.
                let mut pairing = vec![0u8; m];
                for t in 0..m {
                    let it = (t + rot) % m;
                    let iu = e.pairing[it] as usize;
                    pairing[t] = ((iu + m - rot) % m) as u8;
                }
                b.insert(Entry {
                    usage,
                    pairing,
                    value: e.value + cost,
                    prov: Prov::Compressed { inner: ei as u32, rot: rot as u16 },
                });
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
    use crate::dp::slots::SideInfo;
    use crate::geometry::{GridInstance, Point};
    use crate::quadtree::{NodeKind, Quadtree, Shift, SIDE_DIRS};

    /// Two nearby points far from the grid origin produce an outer dummy.
    fn ring_fixture() -> (GridInstance, Quadtree, crate::crossing::CrossingIndex, u32) {
        let g = GridInstance {
            points: vec![Point { x: 0, y: 0 }, Point { x: 1, y: 1 }],
            l: 64,
        };
        let t = Quadtree::build(&g, Shift { a1: 64, a2: 64 });
        let tour = doubled_tree_tour(&g.points);
        let idx = build_index(&g, &t, &tour);
        let ring = (0..t.nodes.len() as u32)
            .find(|&id| matches!(t.node(id).kind, NodeKind::OuterDummy { .. }))
            .expect("fixture should compress");
        (g, t, idx, ring)
    }

    #[test]
    fn ring_preserves_slot_count_and_pairing_shape() {
        let (g, t, idx, ring) = ring_fixture();
        let cfg = DpConfig::exact(5, 5);
        let NodeKind::OuterDummy { inner } = t.node(ring).kind else { panic!() };
        let outer_sides: [SideInfo; 4] =
            std::array::from_fn(|d| SideInfo::new(&t, &idx, ring, SIDE_DIRS[d], cfg.g1));
        let inner_sides: [SideInfo; 4] =
            std::array::from_fn(|d| SideInfo::new(&t, &idx, inner, SIDE_DIRS[d], cfg.g1));
        // Inner cell: a point leaf or internal; give it a leaf table when a
        // leaf, otherwise build a tiny synthetic table.
        let inner_table = match t.node(inner).kind {
            NodeKind::PointLeaf { .. } => {
                let p = t.leaf_point(inner, &g).to_real();
                crate::dp::leaf::point_leaf_table(&inner_sides, p, &cfg)
            }
            _ => {
                // Use a leaf-style single-pair table anchored at the cell
                // center for shape testing.
                let c = RealPoint {
                    x: (inner_sides[0].lo.to_f64() + inner_sides[0].hi.to_f64()) / 2.0,
                    y: (inner_sides[1].lo.to_f64() + inner_sides[1].hi.to_f64()) / 2.0,
                };
                crate::dp::leaf::point_leaf_table(&inner_sides, c, &cfg)
            }
        };
        let table = compressed_table(&outer_sides, &inner_sides, &inner_table, &cfg);
        assert!(!table.is_empty(), "ring table empty");
        for e in &table.entries {
            let slots = expand_ccw(&e.usage);
            assert_eq!(slots.len() % 2, 0);
            assert_eq!(slots.len(), e.pairing.len());
            for (i, &p) in e.pairing.iter().enumerate() {
                assert_eq!(e.pairing[p as usize] as usize, i);
            }
            // Value covers at least the inner value.
            let min_inner =
                inner_table.entries.iter().map(|x| x.value).fold(f64::INFINITY, f64::min);
            assert!(e.value >= min_inner - 1e-12);
        }
    }

    #[test]
    fn ring_connector_cost_is_positive_when_apart() {
        let (g, t, idx, ring) = ring_fixture();
        let cfg = DpConfig::exact(5, 5);
        let NodeKind::OuterDummy { inner } = t.node(ring).kind else { panic!() };
        // The ring's boundary is strictly outside the inner cell on at least
        // one side, so some connector distance is unavoidable unless the
        // boundaries share segments containing the used positions.
        let outer_sides: [SideInfo; 4] =
            std::array::from_fn(|d| SideInfo::new(&t, &idx, ring, SIDE_DIRS[d], cfg.g1));
        let inner_sides: [SideInfo; 4] =
            std::array::from_fn(|d| SideInfo::new(&t, &idx, inner, SIDE_DIRS[d], cfg.g1));
        let p = match t.node(inner).kind {
            NodeKind::PointLeaf { .. } => t.leaf_point(inner, &g).to_real(),
            _ => return, // fixture-dependent; only test the leaf shape
        };
        let inner_table = crate::dp::leaf::point_leaf_table(&inner_sides, p, &cfg);
        let table = compressed_table(&outer_sides, &inner_sides, &inner_table, &cfg);
        let best_inner = inner_table.entries.iter().map(|e| e.value).fold(f64::INFINITY, f64::min);
        let best_outer = table.entries.iter().map(|e| e.value).fold(f64::INFINITY, f64::min);
        assert!(best_outer >= best_inner);
    }
}
