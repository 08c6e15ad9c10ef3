//! Combining the four child tables of an internal cell.
//!
//! Children are inserted one at a time (SW, SE, NW, NE). Whenever both
//! cells adjacent to one of the four internal faces are present, the face
//! *closes*: the two pending crossing lists are swept in position order and
//! glued one-to-one — every crossing of a shared side is a crossing for
//! both cells. Where one cell demands a crossing the other does not supply,
//! the balance is made up by adding a *chord*: a straight connection
//! attributed to the deficient child, whose far end lands on another
//! position of that child's boundary (the same side further along, the
//! child's other internal face, or the parent boundary). A position where
//! neither cell has a demand may also open a fresh pass-through (both sides
//! add chords), which is how routes cross empty regions.
//!
//! Gluing merges path components. A merge closing a cycle is rejected —
//! except at the outermost cell, where exactly one final cycle consuming
//! the last two live ends is the accepted solution. When a cell's combine
//! finishes, every remaining component must contain at least one child
//! path (chords alone never form a valid route piece), and components
//! emerge as the pairing of the parent entry.
//!
//! Chords attach to a child's boundary without crossing that child's other
//! connections, checked combinatorially on the boundary circle. All
//! positions respect per-position multiplicity (≤ 2), per-side totals
//! (≤ k_max) and the per-count lattice granularity of their side.

use std::collections::HashMap;

use crate::geometry::dist;
use crate::num::Rat;
use crate::quadtree::{QUAD_NE, QUAD_NW, QUAD_SE, QUAD_SW};

use super::slots::{PosCode, SideInfo};
use super::table::{
    entry_key, expand_ccw, prov_key, Chord, ChordEnd, Entry, Prov, Table, TableBuilder, Usage,
    SIDE_COUNT,
};
use super::{DpConfig, DpStats};

const S: usize = 0;
const E: usize = 1;
const N: usize = 2;
const W: usize = 3;

/// Internal faces: (first child, its side, second child, its side).
const FACES: [(usize, usize, usize, usize); 4] = [
    (QUAD_SW, E, QUAD_SE, W),
    (QUAD_SW, N, QUAD_NW, S),
    (QUAD_SE, N, QUAD_NE, S),
    (QUAD_NW, E, QUAD_NE, W),
];

/// Insertion order; after inserting child `INSERT_ORDER[s]`, faces
/// `CLOSE_AFTER[s]` have both cells present and close.
const INSERT_ORDER: [usize; 4] = [QUAD_SW, QUAD_SE, QUAD_NW, QUAD_NE];
const CLOSE_AFTER: [&[usize]; 4] = [&[], &[0], &[1], &[2, 3]];

/// Face id and side index (0 = first child) of an internal child side.
fn face_of(quad: usize, dir: usize) -> Option<(usize, usize)> {
    for (f, &(qa, da, qb, db)) in FACES.iter().enumerate() {
        if qa == quad && da == dir {
            return Some((f, 0));
        }
        if qb == quad && db == dir {
            return Some((f, 1));
        }
    }
    None
}

/// Parent side a child side lies on, when on the parent boundary.
fn parent_dir_of(quad: usize, dir: usize) -> Option<usize> {
    let on = match dir {
        S => quad == QUAD_SW || quad == QUAD_SE,
        N => quad == QUAD_NW || quad == QUAD_NE,
        W => quad == QUAD_SW || quad == QUAD_NW,
        E => quad == QUAD_SE || quad == QUAD_NE,
        _ => false,
    };
    on.then_some(dir)
}

#[derive(Clone, Debug, Default)]
struct Dsu {
    parent: Vec<u16>,
    /// Whether the component contains at least one child path (set on
    /// roots; chords alone leave it false).
    m2: Vec<bool>,
}

impl Dsu {
    fn make(&mut self, m2: bool) -> u16 {
        let id = self.parent.len() as u16;
        assert!(id < u16::MAX, "component overflow");
        self.parent.push(id);
        self.m2.push(m2);
        id
    }

    fn find(&self, mut c: u16) -> u16 {
        while self.parent[c as usize] != c {
            c = self.parent[c as usize];
        }
        c
    }

    /// Join two components; `Err` when they are already one (a cycle).
    fn union(&mut self, a: u16, b: u16) -> Result<u16, u16> {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return Err(ra);
        }
        self.parent[rb as usize] = ra;
        self.m2[ra as usize] = self.m2[ra as usize] || self.m2[rb as usize];
        Ok(ra)
    }
}

#[derive(Clone, Copy, Debug)]
struct Item {
    code: PosCode,
    /// Key ordering coinciding ends at one position (entry slots 0/2,
    /// chord ends odd keys around them).
    sub: i8,
    comp: u16,
}

#[derive(Clone, Debug)]
struct PState {
    /// Pending crossings per internal face and face side, ascending
    /// (offset, sub).
    face: [[Vec<Item>; 2]; 4],
    /// Parent-boundary slots per parent side, in parent code space.
    out: [Vec<Item>; 4],
    dsu: Dsu,
    value: f64,
    children: [u32; 4],
    chords: Vec<Chord>,
}

impl Default for PState {
    fn default() -> PState {
        PState {
            face: Default::default(),
            out: Default::default(),
            dsu: Dsu::default(),
            value: 0.0,
            children: [u32::MAX; 4],
            chords: Vec::new(),
        }
    }
}

fn insert_item(list: &mut Vec<Item>, side: &SideInfo, it: Item) {
    let key = (side.offset(it.code), it.sub);
    let at = list
        .iter()
        .position(|x| (side.offset(x.code), x.sub) > key)
        .unwrap_or(list.len());
    list.insert(at, it);
}

pub struct CombineCtx<'a> {
    pub cfg: &'a DpConfig,
    pub tables: [&'a Table; 4],
    /// Child side infos, `[quad][dir]`.
    pub child_sides: [[SideInfo; 4]; 4],
    pub parent_sides: [SideInfo; 4],
    pub is_root: bool,
}

#[derive(Clone, Debug)]
pub struct RootSolution {
    pub value: f64,
    pub children: [u32; 4],
    pub chords: Vec<Chord>,
}

pub struct CombineOut {
    pub table: Table,
    pub root: Option<RootSolution>,
}

impl CombineCtx<'_> {
    fn shared_side(&self, f: usize) -> &SideInfo {
        let (qa, da, qb, db) = FACES[f];
        debug_assert_eq!(self.child_sides[qa][da], self.child_sides[qb][db]);
        &self.child_sides[qa][da]
    }

    /// Boundary circle coordinate of a child slot, used for the
    /// combinatorial non-crossing test.
    fn ccw_key(&self, quad: usize, dir: usize, code: PosCode, sub: i8) -> (u8, Rat, i8) {
        let off = self.child_sides[quad][dir].offset(code);
        if dir < 2 {
            (dir as u8, off, sub)
        } else {
            (dir as u8, -off, -sub)
        }
    }

    /// All boundary connections of child `quad` in `st` (entry pairing plus
    /// chords), as ccw coordinate pairs.
    fn child_edges(&self, st: &PState, quad: usize) -> Vec<((u8, Rat, i8), (u8, Rat, i8))> {
        let mut edges = Vec::new();
        let ei = st.children[quad];
        if ei != u32::MAX {
            let e = &self.tables[quad].entries[ei as usize];
            let slots = expand_ccw(&e.usage);
            for (i, &(d, c, rank)) in slots.iter().enumerate() {
                let j = e.pairing[i] as usize;
                if j <= i {
                    continue;
                }
                let (d2, c2, rank2) = slots[j];
                edges.push((
                    self.ccw_key(quad, d as usize, c, rank as i8 * 2),
                    self.ccw_key(quad, d2 as usize, c2, rank2 as i8 * 2),
                ));
            }
        }
        for ch in &st.chords {
            if ch.quad as usize == quad {
                edges.push((
                    self.ccw_key(quad, ch.a.dir as usize, ch.a.code, ch.a.sub),
                    self.ccw_key(quad, ch.b.dir as usize, ch.b.code, ch.b.sub),
                ));
            }
        }
        edges
    }

    /// Would a new connection between these two boundary coordinates cross
    /// an existing connection of child `quad`?
    fn chord_crosses(&self, st: &PState, quad: usize, u: (u8, Rat, i8), v: (u8, Rat, i8)) -> bool {
        let (u, v) = if u < v { (u, v) } else { (v, u) };
        for (mut p, mut q) in self.child_edges(st, quad) {
            if q < p {
                std::mem::swap(&mut p, &mut q);
            }
            let crosses = (p < u && u < q && q < v) || (u < p && p < v && v < q);
            if crosses {
                return true;
            }
        }
        false
    }
}

/// One prospective chord end away from the glue position.
#[derive(Clone, Debug)]
enum Target {
    /// Further along the closing face (strictly greater offset).
    Same { code: PosCode, far_sub: i8 },
    /// The child's other internal face.
    Face { f: usize, fside: usize, code: PosCode, far_sub: i8 },
    /// The parent boundary.
    Out { pdir: usize, child_code: PosCode, pcode: PosCode, far_sub: i8 },
}

/// Sub keys for `need` new ends at a position given existing keys.
fn placements(existing: &[i8], need: usize) -> Vec<Vec<i8>> {
    match (existing.len(), need) {
        (_, 0) => vec![Vec::new()],
        (0, 1) => vec![vec![0]],
        (1, 1) => vec![vec![existing[0] - 2], vec![existing[0] + 2]],
        (0, 2) => vec![vec![0, 2]],
        _ => Vec::new(),
    }
}

fn sub_keys_at(list: &[Item], side: &SideInfo, code: PosCode) -> Vec<i8> {
    let off = side.offset(code);
    list.iter().filter(|it| side.offset(it.code) == off).map(|it| it.sub).collect()
}

struct Closer<'a, 'b> {
    ctx: &'a CombineCtx<'b>,
    f: usize,
    quads: [usize; 2],
    dirs: [usize; 2],
    hints: &'a [Vec<PosCode>; 4],
    budget: u64,
    out: Vec<PState>,
    root_best: &'a mut Option<RootSolution>,
    stats: &'a mut DpStats,
}

impl Closer<'_, '_> {
    fn side(&self) -> &SideInfo {
        self.ctx.shared_side(self.f)
    }

    /// Candidate far-end codes for a chord of child `quad` landing on the
    /// closing face beyond `after`.
    fn same_face_cands(&self, a: &[Item], b: &[Item], after: Rat) -> Vec<PosCode> {
        let side = self.side();
        let mut cs: Vec<PosCode> = Vec::new();
        if self.ctx.cfg.exact() {
            cs.extend(side.pool());
        } else {
            cs.extend(a.iter().chain(b.iter()).map(|it| it.code));
            cs.extend(side.coarse(self.ctx.cfg.junction_depth));
            cs.extend(side.x_code());
            cs.extend(self.hints[self.f].iter().copied());
        }
        cs.retain(|&c| side.offset(c) > after);
        cs.sort_by(|&x, &y| side.cmp_codes(x, y));
        cs.dedup();
        cs.truncate(self.ctx.cfg.chord_cands);
        cs
    }

    /// Candidate far-end codes on another face of child `quad`.
    fn other_face_cands(&self, st: &PState, f2: usize) -> Vec<PosCode> {
        let side = self.ctx.shared_side(f2);
        let mut cs: Vec<PosCode> = Vec::new();
        if self.ctx.cfg.exact() {
            cs.extend(side.pool());
        } else {
            cs.extend(st.face[f2][0].iter().chain(st.face[f2][1].iter()).map(|it| it.code));
            cs.extend(side.coarse(self.ctx.cfg.junction_depth));
            cs.extend(side.x_code());
            cs.extend(self.hints[f2].iter().copied());
        }
        cs.sort_by(|&x, &y| side.cmp_codes(x, y));
        cs.dedup();
        cs.truncate(self.ctx.cfg.chord_cands);
        cs
    }

    /// Candidate far-end codes on a parent-boundary side of child `quad`,
    /// in child code space.
    fn out_cands(&self, quad: usize, dir: usize) -> Vec<PosCode> {
        let side = &self.ctx.child_sides[quad][dir];
        let mut cs: Vec<PosCode> = Vec::new();
        if self.ctx.cfg.exact() {
            cs.extend(side.pool());
        } else {
            cs.extend(side.coarse(self.ctx.cfg.junction_depth));
            cs.extend(side.x_code());
        }
        cs.sort_by(|&x, &y| side.cmp_codes(x, y));
        cs.dedup();
        cs.truncate(self.ctx.cfg.chord_cands);
        cs
    }

    /// Enumerate chord target options for one new end of child `quad`
    /// anchored at `pos` on the closing face.
    fn targets(&self, st: &PState, a: &[Item], b: &[Item], si: usize, pos: PosCode) -> Vec<Target> {
        let quad = self.quads[si];
        let glue_dir = self.dirs[si];
        let side = self.side();
        let pos_off = side.offset(pos);
        let mut opts = Vec::new();
        // Same face, strictly further along. Far ends join this child's own
        // pending list, so existing keys there come from the same list.
        let own_list = if si == 0 { a } else { b };
        for code in self.same_face_cands(a, b, pos_off) {
            let keys = sub_keys_at(own_list, side, code);
            if keys.len() >= 2 {
                continue;
            }
            for subs in placements(&keys, 1) {
                opts.push(Target::Same { code, far_sub: subs[0] });
            }
        }
        // The child's other internal face, if it is still open.
        for dir in 0..SIDE_COUNT {
            if dir == glue_dir {
                continue;
            }
            if let Some((f2, fs2)) = face_of(quad, dir) {
                if f2 <= self.f {
                    continue; // already closed (faces close in index order)
                }
                let side2 = self.ctx.shared_side(f2);
                for code in self.other_face_cands(st, f2) {
                    let keys = sub_keys_at(&st.face[f2][fs2], side2, code);
                    if keys.len() >= 2 || st.face[f2][fs2].len() as u32 >= self.ctx.cfg.k_max {
                        continue;
                    }
                    for subs in placements(&keys, 1) {
                        opts.push(Target::Face { f: f2, fside: fs2, code, far_sub: subs[0] });
                    }
                }
            }
        }
        // The parent boundary (never at the outermost cell).
        if !self.ctx.is_root {
            for dir in 0..SIDE_COUNT {
                let Some(pdir) = parent_dir_of(quad, dir) else { continue };
                let child_side = &self.ctx.child_sides[quad][dir];
                let pside = &self.ctx.parent_sides[pdir];
                for child_code in self.out_cands(quad, dir) {
                    let Some(pcode) = pside.code_of(child_side.offset(child_code)) else {
                        continue;
                    };
                    let plist = &st.out[pdir];
                    if plist.len() as u32 >= self.ctx.cfg.k_max {
                        continue;
                    }
                    let keys = sub_keys_at(plist, pside, pcode);
                    if keys.len() >= 2 {
                        continue;
                    }
                    for subs in placements(&keys, 1) {
                        opts.push(Target::Out { pdir, child_code, pcode, far_sub: subs[0] });
                    }
                }
            }
        }
        opts
    }

    /// Attach one chord of child `quads[si]` from (closing face, `pos`,
    /// `near_sub`) to `target`; far items land in the working lists or the
    /// state. Returns the chord's component.
    #[allow(clippy::too_many_arguments)]
    fn apply_chord(
        &self,
        st: &mut PState,
        a: &mut Vec<Item>,
        b: &mut Vec<Item>,
        si: usize,
        pos: PosCode,
        near_sub: i8,
        target: &Target,
    ) -> Option<u16> {
        let quad = self.quads[si];
        let glue_dir = self.dirs[si];
        let side = self.side();
        let near_pt = side.point(pos);
        let (far_dir, far_code, far_sub, far_pt) = match *target {
            Target::Same { code, far_sub } => (glue_dir, code, far_sub, side.point(code)),
            Target::Face { f, fside, code, far_sub } => {
                let _ = fside;
                let s2 = self.ctx.shared_side(f);
                // Identify the child-side dir of face f for this child.
                let (qa, da, _, db) = (FACES[f].0, FACES[f].1, FACES[f].2, FACES[f].3);
                let dir = if qa == quad { da } else { db };
                (dir, code, far_sub, s2.point(code))
            }
            Target::Out { child_code, far_sub, .. } => {
                // Find which dir this child code belongs to via the target.
                let Target::Out { pdir, .. } = *target else { unreachable!() };
                let dir = pdir; // parent dir equals child dir on the boundary
                (dir, child_code, far_sub, self.ctx.child_sides[quad][dir].point(child_code))
            }
        };
        // Combinatorial non-crossing on this child's boundary circle.
        let u = self.ctx.ccw_key(quad, glue_dir, pos, near_sub);
        let v = self.ctx.ccw_key(quad, far_dir, far_code, far_sub);
        if self.ctx.chord_crosses(st, quad, u, v) {
            return None;
        }
        let comp = st.dsu.make(false);
        st.value += dist(near_pt, far_pt);
        st.chords.push(Chord {
            quad: quad as u8,
            a: ChordEnd { dir: glue_dir as u8, code: pos, sub: near_sub },
            b: ChordEnd { dir: far_dir as u8, code: far_code, sub: far_sub },
        });
        let far_item = Item { code: far_code, sub: far_sub, comp };
        match *target {
            Target::Same { .. } => {
                let list = if si == 0 { a } else { b };
                insert_item(list, side, far_item);
            }
            Target::Face { f, fside, .. } => {
                let s2 = self.ctx.shared_side(f).clone();
                insert_item(&mut st.face[f][fside], &s2, far_item);
            }
            Target::Out { pdir, pcode, .. } => {
                let pside = self.ctx.parent_sides[pdir].clone();
                insert_item(&mut st.out[pdir], &pside, Item { code: pcode, ..far_item });
            }
        }
        Some(comp)
    }

    /// Live ends elsewhere in the state (used to recognize the final root
    /// cycle).
    fn live_elsewhere(st: &PState, a: &[Item], b: &[Item]) -> usize {
        let faces: usize = st.face.iter().map(|fs| fs[0].len() + fs[1].len()).sum();
        let outs: usize = st.out.iter().map(|l| l.len()).sum();
        faces + outs + a.len() + b.len()
    }

    fn rec(
        &mut self,
        st: PState,
        a: Vec<Item>,
        b: Vec<Item>,
        jcands: &[PosCode],
        ji: usize,
        consumed: Vec<(PosCode, u8)>,
        total: u32,
    ) {
        if self.budget == 0 {
            return;
        }
        self.budget -= 1;
        self.stats.closure_steps += 1;
        let side = self.side().clone();
        // Next junction candidate not coinciding with pending list items.
        let mut ji = ji;
        let in_lists = |code: PosCode, a: &[Item], b: &[Item]| {
            a.iter().chain(b.iter()).any(|it| it.code == code)
        };
        while ji < jcands.len() && in_lists(jcands[ji], &a, &b) {
            ji += 1;
        }
        let next_off = |items: &[Item]| items.first().map(|it| side.offset(it.code));
        let cand = [
            next_off(&a),
            next_off(&b),
            jcands.get(ji).map(|&c| side.offset(c)),
        ];
        let Some(pos_off) = cand.iter().flatten().min().copied() else {
            // Face exhausted: validate the side's final count and grid.
            if total > 0 {
                let gk = self.ctx.cfg.gk(total);
                if !consumed.iter().all(|&(c, _)| side.valid_at(c, gk)) {
                    return;
                }
            }
            self.out.push(st);
            return;
        };
        let from_j = cand[0] != Some(pos_off) && cand[1] != Some(pos_off);
        let pos = if cand[0] == Some(pos_off) {
            a[0].code
        } else if cand[1] == Some(pos_off) {
            b[0].code
        } else {
            jcands[ji]
        };
        let ji_next = if from_j || jcands.get(ji) == Some(&pos) { ji + 1 } else { ji };

        // Split off the ends at this position.
        let split = |list: &[Item]| {
            let k = list.iter().take_while(|it| side.offset(it.code) == pos_off).count();
            (list[..k].to_vec(), list[k..].to_vec())
        };
        let (a_here, a_rest) = split(&a);
        let (b_here, b_rest) = split(&b);
        let cmin = a_here.len().max(b_here.len());

        if cmin == 0 {
            // Junction position: passing it by is always allowed.
            self.rec(st.clone(), a, b, jcands, ji_next, consumed.clone(), total);
        }
        let cmax = 2usize.min((self.ctx.cfg.k_max - total) as usize);
        let c_lo = cmin.max(1);
        for c in c_lo..=cmax {
            // Place new ends on each deficient side, then enumerate their
            // far targets, then glue the c ends pairwise in sub order.
            let need = [c - a_here.len(), c - b_here.len()];
            let a_keys: Vec<i8> = a_here.iter().map(|it| it.sub).collect();
            let b_keys: Vec<i8> = b_here.iter().map(|it| it.sub).collect();
            for pa in placements(&a_keys, need[0]) {
                for pb in placements(&b_keys, need[1]) {
                    self.chords_for(
                        &st, &a_rest, &b_rest, &a_here, &b_here, &pa, &pb, pos, pos_off, c,
                        jcands, ji_next, &consumed, total,
                    );
                }
            }
        }
    }

    /// Enumerate far targets for all new ends (given their sub keys), apply
    /// chords, glue, and recurse. Targets are enumerated depth-first per
    /// end, A side first.
    #[allow(clippy::too_many_arguments)]
    fn chords_for(
        &mut self,
        st: &PState,
        a_rest: &[Item],
        b_rest: &[Item],
        a_here: &[Item],
        b_here: &[Item],
        pa: &[i8],
        pb: &[i8],
        pos: PosCode,
        pos_off: Rat,
        c: usize,
        jcands: &[PosCode],
        ji: usize,
        consumed: &[(PosCode, u8)],
        total: u32,
    ) {
        // Work items: (side index, sub key) for each new end in order.
        let plan: Vec<(usize, i8)> = pa
            .iter()
            .map(|&k| (0usize, k))
            .chain(pb.iter().map(|&k| (1usize, k)))
            .collect();
        struct Frame {
            st: PState,
            a: Vec<Item>,
            b: Vec<Item>,
            ends: [Vec<Item>; 2],
        }
        let mut stack = vec![Frame {
            st: st.clone(),
            a: a_rest.to_vec(),
            b: b_rest.to_vec(),
            ends: [a_here.to_vec(), b_here.to_vec()],
        }];
        for depth in 0..plan.len() {
            let (si, sub) = plan[depth];
            let mut next = Vec::new();
            for fr in stack {
                let opts = self.targets(&fr.st, &fr.a, &fr.b, si, pos);
                for t in opts {
                    if let Some(ub) = self.ctx.cfg.ub {
                        if fr.st.value > ub {
                            continue;
                        }
                    }
                    let mut st2 = fr.st.clone();
                    let mut a2 = fr.a.clone();
                    let mut b2 = fr.b.clone();
                    if let Some(comp) =
                        self.apply_chord(&mut st2, &mut a2, &mut b2, si, pos, sub, &t)
                    {
                        if let Some(ub) = self.ctx.cfg.ub {
                            if st2.value > ub {
                                continue;
                            }
                        }
                        let mut ends2 = fr.ends.clone();
                        ends2[si].push(Item { code: pos, sub, comp });
                        next.push(Frame { st: st2, a: a2, b: b2, ends: ends2 });
                    }
                }
            }
            stack = next;
            if stack.is_empty() {
                return;
            }
        }
        // Glue the c ends pairwise in sub order and recurse.
        'frames: for mut fr in stack {
            fr.ends[0].sort_by_key(|it| it.sub);
            fr.ends[1].sort_by_key(|it| it.sub);
            debug_assert_eq!(fr.ends[0].len(), c);
            debug_assert_eq!(fr.ends[1].len(), c);
            for i in 0..c {
                let (ca, cb) = (fr.ends[0][i].comp, fr.ends[1][i].comp);
                match fr.st.dsu.union(ca, cb) {
                    Ok(_) => {}
                    Err(root) => {
                        // A cycle: only acceptable as the final closure of
                        // the outermost cell, consuming the last live ends.
                        let live = Self::live_elsewhere(&fr.st, &fr.a, &fr.b)
                            + 2 * (c - 1 - i);
                        if self.ctx.is_root
                            && live == 0
                            && fr.st.dsu.m2[root as usize]
                        {
                            self.stats.root_candidates += 1;
                            let better = match &self.root_best {
                                None => true,
                                Some(best) => {
                                    (fr.st.value, prov_key(&Prov::Combined {
                                        children: fr.st.children,
                                        chords: fr.st.chords.clone(),
                                    })) < (best.value, prov_key(&Prov::Combined {
                                        children: best.children,
                                        chords: best.chords.clone(),
                                    }))
                                }
                            };
                            if better {
                                **(&mut self.root_best) = Some(RootSolution {
                                    value: fr.st.value,
                                    children: fr.st.children,
                                    chords: fr.st.chords.clone(),
                                });
                            }
                        }
                        continue 'frames;
                    }
                }
            }
            let mut consumed2 = consumed.to_vec();
            consumed2.push((pos, c as u8));
            let _ = pos_off;
            self.rec(fr.st, fr.a, fr.b, jcands, ji, consumed2, total + c as u32);
        }
    }
}

fn close_face(
    ctx: &CombineCtx,
    mut st: PState,
    f: usize,
    hints: &[Vec<PosCode>; 4],
    out: &mut Vec<PState>,
    root_best: &mut Option<RootSolution>,
    stats: &mut DpStats,
) {
    let (qa, da, qb, db) = FACES[f];
    let a = std::mem::take(&mut st.face[f][0]);
    let b = std::mem::take(&mut st.face[f][1]);
    let side = ctx.shared_side(f);
    // Junction candidates: positions where a pass-through may start even
    // though neither cell demands one.
    let mut jcands: Vec<PosCode> = if ctx.cfg.exact() {
        side.pool()
    } else {
        let mut cs: Vec<PosCode> = side.coarse(ctx.cfg.junction_depth);
        cs.extend(side.x_code());
        cs.extend(hints[f].iter().copied());
        cs.sort_by(|&x, &y| side.cmp_codes(x, y));
        cs.dedup();
        cs.truncate(ctx.cfg.junction_cands);
        cs
    };
    jcands.sort_by(|&x, &y| side.cmp_codes(x, y));
    let mut closer = Closer {
        ctx,
        f,
        quads: [qa, qb],
        dirs: [da, db],
        hints,
        budget: ctx.cfg.closure_budget,
        out: Vec::new(),
        root_best,
        stats,
    };
    closer.rec(st, a, b, &jcands, 0, Vec::new(), 0);
    out.append(&mut closer.out);
}

fn insert_entry(ctx: &CombineCtx, st: &PState, quad: usize, ei: usize) -> Option<PState> {
    let e = &ctx.tables[quad].entries[ei];
    if let Some(ub) = ctx.cfg.ub {
        if st.value + e.value > ub {
            return None;
        }
    }
    let mut st2 = st.clone();
    st2.children[quad] = ei as u32;
    st2.value += e.value;
    let slots = expand_ccw(&e.usage);
    let mut comp_of = vec![u16::MAX; slots.len()];
    for i in 0..slots.len() {
        if comp_of[i] == u16::MAX {
            let j = e.pairing[i] as usize;
            let comp = st2.dsu.make(true);
            comp_of[i] = comp;
            comp_of[j] = comp;
        }
    }
    for (i, &(d, code, rank)) in slots.iter().enumerate() {
        let d = d as usize;
        let item = Item { code, sub: rank as i8 * 2, comp: comp_of[i] };
        if let Some(pdir) = parent_dir_of(quad, d) {
            if ctx.is_root {
                return None; // the outermost boundary is never crossed
            }
            let child_side = &ctx.child_sides[quad][d];
            let pside = &ctx.parent_sides[pdir];
            let pcode = pside.code_of(child_side.offset(code))?;
            let plist = &mut st2.out[pdir];
            if plist.len() as u32 >= ctx.cfg.k_max
                || plist.iter().filter(|x| x.code == pcode).count() >= 2
            {
                return None;
            }
            insert_item(plist, pside, Item { code: pcode, ..item });
        } else {
            let (f, fside) = face_of(quad, d).expect("internal side");
            let side = ctx.shared_side(f).clone();
            let list = &mut st2.face[f][fside];
            if list.len() as u32 >= ctx.cfg.k_max {
                return None;
            }
            insert_item(list, &side, item);
        }
    }
    Some(st2)
}

/// Canonical bytes of a partial state (component labels by first
/// appearance); equal keys mean equal continuations.
fn partial_key(st: &PState) -> Vec<u8> {
    let mut labels: Vec<(u16, u8)> = Vec::new();
    let mut label_of = |dsu: &Dsu, comp: u16, labels: &mut Vec<(u16, u8)>| -> u8 {
        let root = dsu.find(comp);
        if let Some(&(_, l)) = labels.iter().find(|&&(r, _)| r == root) {
            return l;
        }
        let l = labels.len() as u8;
        labels.push((root, l));
        l
    };
    let mut k = Vec::new();
    for lists in [&st.face as &[[Vec<Item>; 2]; 4]] {
        for fs in lists.iter() {
            for list in fs {
                k.push(list.len() as u8);
                for it in list {
                    match it.code {
                        PosCode::Grid(i) => {
                            k.push(0);
                            k.extend_from_slice(&i.to_le_bytes());
                        }
                        PosCode::Cross => k.push(1),
                    }
                    k.push(it.sub as u8);
                    k.push(label_of(&st.dsu, it.comp, &mut labels));
                }
            }
        }
    }
    for list in &st.out {
        k.push(list.len() as u8);
        for it in list {
            match it.code {
                PosCode::Grid(i) => {
                    k.push(0);
                    k.extend_from_slice(&i.to_le_bytes());
                }
                PosCode::Cross => k.push(1),
            }
            k.push(it.sub as u8);
            k.push(label_of(&st.dsu, it.comp, &mut labels));
        }
    }
    k.push(0xfe);
    for &(root, _) in &labels {
        k.push(st.dsu.m2[root as usize] as u8);
    }
    k
}

fn state_prov_key(st: &PState) -> Vec<u8> {
    prov_key(&Prov::Combined { children: st.children, chords: st.chords.clone() })
}

fn fold_and_beam(ctx: &CombineCtx, states: Vec<PState>, stats: &mut DpStats) -> Vec<PState> {
    stats.states += states.len() as u64;
    let mut map: HashMap<Vec<u8>, PState> = HashMap::new();
    for st in states {
        let key = partial_key(&st);
        match map.entry(key) {
            std::collections::hash_map::Entry::Occupied(mut o) => {
                let cur = o.get();
                if (st.value, state_prov_key(&st)) < (cur.value, state_prov_key(cur)) {
                    o.insert(st);
                }
            }
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert(st);
            }
        }
    }
    let mut folded: Vec<(Vec<u8>, PState)> = map.into_iter().collect();
    if let Some(w) = ctx.cfg.width {
        let cap = 4 * w;
        if folded.len() > cap {
            folded.sort_by(|x, y| {
                x.1.value.partial_cmp(&y.1.value).unwrap().then_with(|| x.0.cmp(&y.0))
            });
            folded.truncate(cap);
        }
    }
    folded.sort_by(|x, y| x.0.cmp(&y.0));
    folded.into_iter().map(|(_, st)| st).collect()
}

/// Positions used on face `f` by the cheapest entries of each adjacent
/// child table; chord and junction enumeration aims at these first.
fn face_hints(ctx: &CombineCtx) -> [Vec<PosCode>; 4] {
    std::array::from_fn(|f| {
        if ctx.cfg.exact() {
            return Vec::new();
        }
        let (qa, da, qb, db) = FACES[f];
        let side = ctx.shared_side(f);
        let mut hints = Vec::new();
        for (q, d) in [(qa, da), (qb, db)] {
            let mut ranked: Vec<&Entry> = ctx.tables[q].entries.iter().collect();
            ranked.sort_by(|x, y| x.value.partial_cmp(&y.value).unwrap());
            for e in ranked.into_iter().take(ctx.cfg.hint_entries) {
                hints.extend(e.usage[d].iter().map(|&(c, _)| c));
            }
        }
        hints.sort_by(|&x, &y| side.cmp_codes(x, y));
        hints.dedup();
        hints
    })
}

fn emit(ctx: &CombineCtx, st: &PState, b: &mut TableBuilder) {
    debug_assert!(st.face.iter().all(|fs| fs[0].is_empty() && fs[1].is_empty()));
    // Every surviving component must contain a child path and surface
    // exactly twice on the parent boundary.
    let mut ends_of: HashMap<u16, Vec<usize>> = HashMap::new();
    let mut slot_count = 0usize;
    for list in &st.out {
        for it in list {
            let root = st.dsu.find(it.comp);
            if !st.dsu.m2[root as usize] {
                return;
            }
            ends_of.entry(root).or_default().push(slot_count);
            slot_count += 1;
        }
    }
    if ends_of.values().any(|v| v.len() != 2) {
        return;
    }
    // Per-side validity on the parent boundary.
    let mut usage = Usage::default();
    for (d, list) in st.out.iter().enumerate() {
        let count = list.len() as u32;
        if count == 0 {
            continue;
        }
        if count > ctx.cfg.k_max {
            return;
        }
        let gk = ctx.cfg.gk(count);
        for it in list {
            if !ctx.parent_sides[d].valid_at(it.code, gk) {
                return;
            }
        }
        for it in list {
            match usage[d].last_mut() {
                Some(last) if last.0 == it.code => last.1 += 1,
                _ => usage[d].push((it.code, 1)),
            }
        }
        if usage[d].iter().any(|&(_, m)| m > 2) {
            return;
        }
    }
    // Per-child validity on child sides that lie on the parent boundary.
    for quad in 0..4 {
        for dir in 0..SIDE_COUNT {
            if parent_dir_of(quad, dir).is_none() {
                continue;
            }
            let mut counts: Vec<(PosCode, u8)> = Vec::new();
            let ei = st.children[quad];
            if ei != u32::MAX {
                counts.extend(ctx.tables[quad].entries[ei as usize].usage[dir].iter().copied());
            }
            for ch in &st.chords {
                if ch.quad as usize != quad {
                    continue;
                }
                for end in [&ch.a, &ch.b] {
                    if end.dir as usize == dir {
                        match counts.iter_mut().find(|(c, _)| *c == end.code) {
                            Some(slot) => slot.1 += 1,
                            None => counts.push((end.code, 1)),
                        }
                    }
                }
            }
            let total: u8 = counts.iter().map(|&(_, m)| m).sum();
            if total == 0 {
                continue;
            }
            if total as u32 > ctx.cfg.k_max || counts.iter().any(|&(_, m)| m > 2) {
                return;
            }
            let gk = ctx.cfg.gk(total as u32);
            if !counts.iter().all(|&(c, _)| ctx.child_sides[quad][dir].valid_at(c, gk)) {
                return;
            }
        }
    }
    // Pairing over the ccw expansion: expansion order matches the out
    // lists, south/east forward and north/west reversed.
    let mut slots_ccw: Vec<u16> = Vec::with_capacity(slot_count);
    for (d, list) in st.out.iter().enumerate() {
        if d < 2 {
            slots_ccw.extend(list.iter().map(|it| st.dsu.find(it.comp)));
        } else {
            slots_ccw.extend(list.iter().rev().map(|it| st.dsu.find(it.comp)));
        }
    }
    let mut pairing = vec![u8::MAX; slots_ccw.len()];
    let mut first_of: HashMap<u16, usize> = HashMap::new();
    for (i, &root) in slots_ccw.iter().enumerate() {
        match first_of.entry(root) {
            std::collections::hash_map::Entry::Occupied(o) => {
                let j = *o.get();
                pairing[i] = j as u8;
                pairing[j] = i as u8;
            }
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert(i);
            }
        }
    }
    debug_assert!(pairing.iter().all(|&p| p != u8::MAX));
    debug_assert_eq!(expand_ccw(&usage).len(), pairing.len());
    b.insert(Entry {
        usage,
        pairing,
        value: st.value,
        prov: Prov::Combined { children: st.children, chords: st.chords.clone() },
    });
}

pub fn combine(ctx: &CombineCtx, stats: &mut DpStats) -> CombineOut {
    let hints = face_hints(ctx);
    let mut root_best: Option<RootSolution> = None;
    let mut states = vec![PState::default()];
    for step in 0..4 {
        let quad = INSERT_ORDER[step];
        let mut next: Vec<PState> = Vec::new();
        for st in &states {
            for ei in 0..ctx.tables[quad].entries.len() {
                if let Some(st2) = insert_entry(ctx, st, quad, ei) {
                    next.push(st2);
                }
            }
        }
        let mut cur = fold_and_beam(ctx, next, stats);
        for &f in CLOSE_AFTER[step] {
            stats.closures += 1;
            let mut after = Vec::new();
            for st in cur {
                close_face(ctx, st, f, &hints, &mut after, &mut root_best, stats);
            }
            cur = fold_and_beam(ctx, after, stats);
        }
        states = cur;
        if states.is_empty() {
            break;
        }
    }
    if ctx.is_root {
        CombineOut { table: Table::default(), root: root_best }
    } else {
        let mut b = TableBuilder::new();
        for st in &states {
            emit(ctx, st, &mut b);
        }
        stats.entries_offered += b.offered;
        let table = b.finish(ctx.cfg.width);
        let _ = entry_key; // canonical keys live in table.rs
        CombineOut { table, root: None }
    }
}
