//! Per-cell solution tables.
//!
//! A table entry describes one boundary behaviour of a cell: which side
//! positions the solution crosses (with multiplicity ≤ 2) and how the
//! crossings pair up into non-crossing paths through the cell, together
//! with the cheapest cost achieving that behaviour and enough provenance to
//! rebuild the actual paths later. Entries are keyed canonically on
//! (usage, pairing); inserting folds duplicates to the minimum, with ties
//! broken on the provenance encoding so results never depend on insertion
//! order. An optional beam bound keeps only the cheapest entries per table,
//! always retaining the single cheapest entry of every per-side crossing
//! count shape so coarser behaviours stay available to ancestors.

use std::collections::HashMap;

use super::slots::PosCode;

pub const SIDE_COUNT: usize = 4;

/// Per-side crossing usage: positions ascending by offset, multiplicity 1..=2.
pub type Usage = [Vec<(PosCode, u8)>; SIDE_COUNT];

#[derive(Clone, Debug)]
pub struct Entry {
    pub usage: Usage,
    /// Partner index per slot of the ccw boundary expansion (see
    /// [`expand_ccw`]); always a non-crossing perfect pairing.
    pub pairing: Vec<u8>,
    pub value: f64,
    pub prov: Prov,
}

/// How an entry was produced, enough to reconstruct its paths.
#[derive(Clone, Debug)]
pub enum Prov {
    /// Single path entering and leaving a point leaf.
    Leaf,
    /// Empty cell, empty behaviour.
    Empty,
    /// Ring cell: inner entry index plus the cyclic connector rotation.
    Compressed { inner: u32, rot: u16 },
    /// Internal cell: chosen child entry indices plus added straight chords.
    Combined { children: [u32; 4], chords: Vec<Chord> },
}

/// Straight connection added while combining children, attributed to child
/// `quad` of the combined cell; both ends lie on that child's boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Chord {
    pub quad: u8,
    pub a: ChordEnd,
    pub b: ChordEnd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChordEnd {
    /// Side of the child cell, as a `SIDE_DIRS` index.
    pub dir: u8,
    pub code: PosCode,
    /// Slot key ordering coinciding ends at one position; entry slots use
    /// keys 0 and 2, chord ends pick odd keys around them.
    pub sub: i8,
}

/// Expand usage into the ccw boundary slot sequence starting at the SW
/// corner: south ascending, east ascending, north descending, west
/// descending. On descending sides the two slots of a doubled position swap
/// too. Each slot is (side index, code, duplicate rank in offset order).
pub fn expand_ccw(usage: &Usage) -> Vec<(u8, PosCode, u8)> {
    let mut out = Vec::new();
    for dir in 0..SIDE_COUNT {
        let fwd = dir < 2;
        if fwd {
            for &(c, m) in &usage[dir] {
                for s in 0..m {
                    out.push((dir as u8, c, s));
                }
            }
        } else {
            for &(c, m) in usage[dir].iter().rev() {
                for s in (0..m).rev() {
                    out.push((dir as u8, c, s));
                }
            }
        }
    }
    out
}

fn push_code(k: &mut Vec<u8>, c: PosCode) {
    match c {
        PosCode::Grid(i) => {
            k.push(0);
            k.extend_from_slice(&i.to_le_bytes());
        }
        PosCode::Cross => k.push(1),
    }
}

/// Canonical byte key of a behaviour; value and provenance excluded.
pub fn entry_key(usage: &Usage, pairing: &[u8]) -> Vec<u8> {
    let mut k = Vec::with_capacity(8 + 4 * pairing.len());
    for side in usage {
        k.push(side.len() as u8);
        for &(c, m) in side {
            push_code(&mut k, c);
            k.push(m);
        }
    }
    k.push(0xff);
    k.extend_from_slice(pairing);
    k
}

/// Deterministic tie-break bytes for equal-value entries.
pub fn prov_key(p: &Prov) -> Vec<u8> {
    let mut k = Vec::new();
    match p {
        Prov::Leaf => k.push(0),
        Prov::Empty => k.push(1),
        Prov::Compressed { inner, rot } => {
            k.push(2);
            k.extend_from_slice(&inner.to_le_bytes());
            k.extend_from_slice(&rot.to_le_bytes());
        }
        Prov::Combined { children, chords } => {
            k.push(3);
            for c in children {
                k.extend_from_slice(&c.to_le_bytes());
            }
            k.push(chords.len() as u8);
            for ch in chords {
                k.push(ch.quad);
                for e in [ch.a, ch.b] {
                    k.push(e.dir);
                    push_code(&mut k, e.code);
                    k.push(e.sub as u8);
                }
            }
        }
    }
    k
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub entries: Vec<Entry>,
}

impl Table {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Accumulates entries with canonical min-folding.
#[derive(Default)]
pub struct TableBuilder {
    map: HashMap<Vec<u8>, Entry>,
    /// Entries offered, including folded duplicates.
    pub offered: u64,
}

impl TableBuilder {
    pub fn new() -> TableBuilder {
        TableBuilder::default()
    }

    pub fn insert(&mut self, e: Entry) {
        debug_assert!(e.value.is_finite());
        debug_assert_eq!(e.pairing.len(), expand_ccw(&e.usage).len());
        self.offered += 1;
        let key = entry_key(&e.usage, &e.pairing);
        match self.map.entry(key) {
            std::collections::hash_map::Entry::Occupied(mut o) => {
                let cur = o.get();
                if (e.value, prov_key(&e.prov)) < (cur.value, prov_key(&cur.prov)) {
                    o.insert(e);
                }
            }
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert(e);
            }
        }
    }

    /// Cheapest value offered so far for any behaviour, if any.
    pub fn best_value(&self) -> Option<f64> {
        self.map.values().map(|e| e.value).fold(None, |acc, v| {
            Some(match acc {
                None => v,
                Some(a) if v < a => v,
                Some(a) => a,
            })
        })
    }

    /// Finalize into a table sorted by canonical key. With a beam width the
    /// cheapest `width` entries are kept (ties on key), plus the cheapest
    /// entry of every per-side count shape, capped at `4·width` total.
    pub fn finish(self, width: Option<usize>) -> Table {
        let mut keyed: Vec<(Vec<u8>, Entry)> = self.map.into_iter().collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = width {
            if keyed.len() > w {
                let mut order: Vec<usize> = (0..keyed.len()).collect();
                order.sort_by(|&i, &j| {
                    keyed[i]
                        .1
                        .value
                        .partial_cmp(&keyed[j].1.value)
                        .unwrap()
                        .then_with(|| keyed[i].0.cmp(&keyed[j].0))
                });
                let mut keep = vec![false; keyed.len()];
                for &i in order.iter().take(w) {
                    keep[i] = true;
                }
                // Count shape: per-side crossing totals clamped at 3.
                let mut shapes: HashMap<[u8; 4], ()> = HashMap::new();
                for &i in &order {
                    let mut shape = [0u8; 4];
                    for (d, side) in keyed[i].1.usage.iter().enumerate() {
                        shape[d] = side.iter().map(|&(_, m)| m).sum::<u8>().min(3);
                    }
                    if let std::collections::hash_map::Entry::Vacant(v) = shapes.entry(shape) {
                        v.insert(());
                        keep[i] = true;
                    }
                }
                let mut kept: Vec<usize> = order.iter().copied().filter(|&i| keep[i]).collect();
                kept.truncate(4 * w);
                let mut kept_sorted = kept;
                kept_sorted.sort();
                let mut out = Vec::with_capacity(kept_sorted.len());
                let mut taken = 0usize;
                for (i, kv) in keyed.into_iter().enumerate() {
                    if kept_sorted.get(taken) == Some(&i) {
                        taken += 1;
                        out.push(kv.1);
                    }
                }
                return Table { entries: out };
            }
        }
        Table { entries: keyed.into_iter().map(|(_, e)| e).collect() }
    }
}

/// All non-crossing perfect pairings of `n` slots on a cycle-free boundary
/// order (n even), as partner arrays. Their count is the Catalan number
/// C(n/2).
pub fn noncrossing_pairings(n: usize) -> Vec<Vec<u8>> {
    assert!(n % 2 == 0 && n <= 64, "pairing enumeration size out of range");
    let mut cur = vec![u8::MAX; n];
    let mut out = Vec::new();
    fn rec(cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        let Some(i) = cur.iter().position(|&p| p == u8::MAX) else {
            out.push(cur.clone());
            return;
        };
        for j in i + 1..cur.len() {
            if cur[j] != u8::MAX || (j - i) % 2 == 0 {
                continue;
            }
            // (i, j) must not cross any placed pair.
            let crosses = (0..cur.len()).any(|a| {
                let b = cur[a] as usize;
                cur[a] != u8::MAX && a < b && ((a < i && i < b && b < j) || (i < a && a < j && j < b))
            });
            if crosses {
                continue;
            }
            cur[i] = j as u8;
            cur[j] = i as u8;
            rec(cur, out);
            cur[i] = u8::MAX;
            cur[j] = u8::MAX;
        }
    }
    rec(&mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn usage_of(sides: [&[(PosCode, u8)]; 4]) -> Usage {
        [sides[0].to_vec(), sides[1].to_vec(), sides[2].to_vec(), sides[3].to_vec()]
    }

    #[test]
    fn ccw_expansion_order() {
        let g = PosCode::Grid;
        let usage = usage_of([
            &[(g(1), 1), (g(3), 2)],
            &[(g(2), 1)],
            &[(g(1), 1), (g(5), 1)],
            &[(g(4), 2)],
        ]);
        let slots = expand_ccw(&usage);
        assert_eq!(
            slots,
            vec![
                (0, g(1), 0),
                (0, g(3), 0),
                (0, g(3), 1),
                (1, g(2), 0),
                (2, g(5), 0),
                (2, g(1), 0),
                (3, g(4), 1),
                (3, g(4), 0),
            ]
        );
    }

    #[test]
    fn folding_keeps_minimum_and_tie_breaks() {
        let g = PosCode::Grid;
        let usage = usage_of([&[(g(1), 1)], &[(g(1), 1)], &[], &[]]);
        let mut b = TableBuilder::new();
        for (v, inner) in [(2.0, 9), (1.0, 7), (1.0, 3), (5.0, 1)] {
            b.insert(Entry {
                usage: usage.clone(),
                pairing: vec![1, 0],
                value: v,
                prov: Prov::Compressed { inner, rot: 0 },
            });
        }
        let t = b.finish(None);
        assert_eq!(t.len(), 1);
        assert_eq!(t.entries[0].value, 1.0);
        // Equal values fold to the smallest provenance encoding.
        let Prov::Compressed { inner, .. } = t.entries[0].prov else { panic!() };
        assert_eq!(inner, 3);
    }

    #[test]
    fn beam_keeps_shape_representatives() {
        let g = PosCode::Grid;
        let mut b = TableBuilder::new();
        // Ten entries of one shape with rising cost…
        for i in 1..=10u16 {
            b.insert(Entry {
                usage: usage_of([&[(g(i), 1)], &[(g(1), 1)], &[], &[]]),
                pairing: vec![1, 0],
                value: i as f64,
                prov: Prov::Leaf,
            });
        }
        // …and one expensive entry of a different shape.
        b.insert(Entry {
            usage: usage_of([&[], &[], &[(g(1), 1)], &[(g(1), 1)]]),
            pairing: vec![1, 0],
            value: 100.0,
            prov: Prov::Leaf,
        });
        let t = b.finish(Some(3));
        assert!(t.len() >= 4);
        assert!(t.entries.iter().any(|e| e.value == 100.0), "shape representative dropped");
        let cheap: Vec<f64> =
            t.entries.iter().map(|e| e.value).filter(|&v| v < 100.0).collect();
        assert!(cheap.contains(&1.0) && cheap.contains(&2.0) && cheap.contains(&3.0));
    }

    #[test]
    fn catalan_counts_small() {
        assert_eq!(noncrossing_pairings(2).len(), 1);
        assert_eq!(noncrossing_pairings(4).len(), 2);
        assert_eq!(noncrossing_pairings(6).len(), 5);
        assert_eq!(noncrossing_pairings(8).len(), 14);
        for p in noncrossing_pairings(6) {
            for (i, &j) in p.iter().enumerate() {
                assert_eq!(p[j as usize] as usize, i);
            }
        }
    }
}
