//! A small CDCL solver: two watched literals, first-UIP learning, VSIDS
//! branching with phase saving, and Luby restarts.
//!
//! Deterministic: no randomness anywhere, so identical clause sets in
//! identical order always produce the same model.

use super::cnf::Lit;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// Value of every solver variable.
    Sat(Vec<bool>),
    Unsat,
    /// The decision budget ran out before the search finished.
    Exhausted,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Stats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
}

const RESTART_UNIT: u64 = 64;
const VAR_DECAY: f64 = 0.95;

pub struct Solver {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    assigns: Vec<Option<bool>>,
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    heap: VarHeap,
    phase: Vec<bool>,
    seen: Vec<bool>,
    ok: bool,
    stats: Stats,
}

fn lit_value(assigns: &[Option<bool>], l: Lit) -> Option<bool> {
    assigns[l.var() as usize].map(|v| v != l.is_negated())
}

impl Solver {
    pub fn new(num_vars: u32) -> Self {
        let n = num_vars as usize;
        let mut heap = VarHeap::new(n);
        let activity = vec![0.0; n];
        for v in 0..n {
            heap.insert(v, &activity);
        }
        Solver {
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            assigns: vec![None; n],
            level: vec![0; n],
            reason: vec![None; n],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity,
            var_inc: 1.0,
            heap,
            phase: vec![false; n],
            seen: vec![false; n],
            ok: true,
            stats: Stats::default(),
        }
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    /// Adds a problem clause. Must be called before [`Solver::solve`].
    pub fn add_clause(&mut self, lits: &[Lit]) {
        if !self.ok {
            return;
        }
        let mut c = lits.to_vec();
        c.sort();
        c.dedup();
        if c.windows(2).any(|w| w[0] == !w[1]) {
            return;
        }
        c.retain(|&l| lit_value(&self.assigns, l) != Some(false));
        if c.iter().any(|&l| lit_value(&self.assigns, l) == Some(true)) {
            return;
        }
        match c.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(c[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                self.attach(c);
            }
        }
    }

    fn attach(&mut self, c: Vec<Lit>) -> usize {
        let ci = self.clauses.len();
        self.watches[c[0].index()].push(ci);
        self.watches[c[1].index()].push(ci);
        self.clauses.push(c);
        ci
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: Option<usize>) {
        let v = l.var() as usize;
        debug_assert!(self.assigns[v].is_none());
        self.assigns[v] = Some(!l.is_negated());
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Unit propagation; returns the index of a falsified clause on conflict.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.index()]);
            let (mut i, mut j) = (0, 0);
            let mut conflict = None;
            while i < ws.len() {
                let ci = ws[i];
                i += 1;
                let c = &mut self.clauses[ci];
                if c[0] == false_lit {
                    c.swap(0, 1);
                }
                if lit_value(&self.assigns, c[0]) == Some(true) {
                    ws[j] = ci;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..c.len() {
                    if lit_value(&self.assigns, c[k]) != Some(false) {
                        c.swap(1, k);
                        self.watches[c[1].index()].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = ci;
                j += 1;
                let first = c[0];
                if lit_value(&self.assigns, first) == Some(false) {
                    conflict = Some(ci);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                } else {
                    self.enqueue(first, Some(ci));
                }
            }
            ws.truncate(j);
            self.watches[false_lit.index()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.update(v, &self.activity);
    }

    /// First-UIP analysis. Returns the learnt clause (asserting literal first,
    /// a literal of the backjump level second) and the backjump level.
    fn analyze(&mut self, mut confl: usize) -> (Vec<Lit>, u32) {
        let mut learnt = vec![Lit::pos(0)];
        let mut pending = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let current = self.decision_level();
        loop {
            let skip = usize::from(p.is_some());
            let lits: Vec<Lit> = self.clauses[confl][skip..].to_vec();
            for q in lits {
                let v = q.var() as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(v);
                    if self.level[v] == current {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var() as usize] {
                    break;
                }
            }
            let lit = self.trail[idx];
            self.seen[lit.var() as usize] = false;
            p = Some(lit);
            pending -= 1;
            if pending == 0 {
                break;
            }
            confl = self.reason[lit.var() as usize].expect("implied literal has a reason");
        }
        learnt[0] = !p.expect("uip");
        for l in &learnt[1..] {
            self.seen[l.var() as usize] = false;
        }
        let mut backjump = 0;
        if learnt.len() > 1 {
            let mut best = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].var() as usize] > self.level[learnt[best].var() as usize] {
                    best = k;
                }
            }
            learnt.swap(1, best);
            backjump = self.level[learnt[1].var() as usize];
        }
        (learnt, backjump)
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let start = self.trail_lim[level as usize];
        for k in (start..self.trail.len()).rev() {
            let l = self.trail[k];
            let v = l.var() as usize;
            self.assigns[v] = None;
            self.reason[v] = None;
            self.phase[v] = !l.is_negated();
            self.heap.insert(v, &self.activity);
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(level as usize);
        self.qhead = start;
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop_max(&self.activity) {
            if self.assigns[v].is_none() {
                return Some(Lit::new(v as u32, !self.phase[v]));
            }
        }
        None
    }

    pub fn solve(&mut self, max_decisions: Option<u64>) -> Outcome {
        if !self.ok || self.propagate().is_some() {
            self.ok = false;
            return Outcome::Unsat;
        }
        let mut restart_index = 0u64;
        let mut restart_limit = luby(restart_index) * RESTART_UNIT;
        let mut conflicts_here = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_here += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Outcome::Unsat;
                }
                let (learnt, backjump) = self.analyze(confl);
                self.cancel_until(backjump);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let first = learnt[0];
                    let ci = self.attach(learnt);
                    self.enqueue(first, Some(ci));
                }
                self.var_inc /= VAR_DECAY;
                continue;
            }
            if conflicts_here >= restart_limit {
                conflicts_here = 0;
                restart_index += 1;
                restart_limit = luby(restart_index) * RESTART_UNIT;
                self.cancel_until(0);
                continue;
            }
            let Some(decision) = self.pick_branch() else {
                let model = self.assigns.iter().map(|v| v.unwrap_or(false)).collect();
                self.cancel_until(0);
                return Outcome::Sat(model);
            };
            if max_decisions.is_some_and(|cap| self.stats.decisions >= cap) {
                self.cancel_until(0);
                return Outcome::Exhausted;
            }
            self.stats.decisions += 1;
            self.trail_lim.push(self.trail.len());
            self.enqueue(decision, None);
        }
    }
}

/// The Luby sequence 1, 1, 2, 1, 1, 2, 4, ... (0-indexed).
fn luby(mut i: u64) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1 << seq
}

/// Indexed binary max-heap of variables ordered by activity; ties broken by
/// lower variable index so branching is reproducible.
struct VarHeap {
    heap: Vec<usize>,
    pos: Vec<Option<usize>>,
}

impl VarHeap {
    fn new(n: usize) -> Self {
        VarHeap {
            heap: Vec::with_capacity(n),
            pos: vec![None; n],
        }
    }

    fn better(a: usize, b: usize, act: &[f64]) -> bool {
        act[a] > act[b] || (act[a] == act[b] && a < b)
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.pos[v].is_some() {
            return;
        }
        self.heap.push(v);
        self.pos[v] = Some(self.heap.len() - 1);
        self.sift_up(self.heap.len() - 1, act);
    }

    fn update(&mut self, v: usize, act: &[f64]) {
        if let Some(i) = self.pos[v] {
            self.sift_up(i, act);
        }
    }

    fn pop_max(&mut self, act: &[f64]) -> Option<usize> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap.swap_remove(0);
        self.pos[top] = None;
        if !self.heap.is_empty() {
            self.pos[self.heap[0]] = Some(0);
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if Self::better(self.heap[i], self.heap[parent], act) {
                self.swap(i, parent);
                i = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        loop {
            let (l, r) = (2 * i + 1, 2 * i + 2);
            let mut best = i;
            if l < self.heap.len() && Self::better(self.heap[l], self.heap[best], act) {
                best = l;
            }
            if r < self.heap.len() && Self::better(self.heap[r], self.heap[best], act) {
                best = r;
            }
            if best == i {
                break;
            }
            self.swap(i, best);
            i = best;
        }
    }

    fn swap(&mut self, i: usize, j: usize) {
        self.heap.swap(i, j);
        self.pos[self.heap[i]] = Some(i);
        self.pos[self.heap[j]] = Some(j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(d: i32) -> Lit {
        Lit::new(d.unsigned_abs() - 1, d < 0)
    }

    fn solve(n: u32, clauses: &[&[i32]]) -> Outcome {
        let mut s = Solver::new(n);
        for c in clauses {
            let lits: Vec<Lit> = c.iter().map(|&d| lit(d)).collect();
            s.add_clause(&lits);
        }
        s.solve(None)
    }

    fn satisfies(model: &[bool], clauses: &[&[i32]]) -> bool {
        clauses.iter().all(|c| {
            c.iter()
                .any(|&d| model[(d.unsigned_abs() - 1) as usize] == (d > 0))
        })
    }

    #[test]
    fn luby_prefix() {
        let seq: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(seq, [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn empty_clause_is_unsat() {
        assert_eq!(solve(1, &[&[]]), Outcome::Unsat);
    }

    #[test]
    fn no_clauses_is_sat() {
        assert!(matches!(solve(2, &[]), Outcome::Sat(_)));
    }

    #[test]
    fn simple_sat_model_checks() {
        let cls: &[&[i32]] = &[&[1, 2], &[-1, 3], &[-3, -2], &[2, 3]];
        match solve(3, cls) {
            Outcome::Sat(m) => assert!(satisfies(&m, cls)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pigeonhole_3_into_2_is_unsat() {
        // p(i,h) = variable 2*i + h + 1
        let p = |i: i32, h: i32| 2 * i + h + 1;
        let mut cls: Vec<Vec<i32>> = (0..3).map(|i| vec![p(i, 0), p(i, 1)]).collect();
        for h in 0..2 {
            for i in 0..3 {
                for j in i + 1..3 {
                    cls.push(vec![-p(i, h), -p(j, h)]);
                }
            }
        }
        let refs: Vec<&[i32]> = cls.iter().map(|c| c.as_slice()).collect();
        assert_eq!(solve(6, &refs), Outcome::Unsat);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let mut s = Solver::new(10);
        for v in 0..9 {
            s.add_clause(&[Lit::pos(v), Lit::pos(v + 1)]);
        }
        assert_eq!(s.solve(Some(0)), Outcome::Exhausted);
    }

    #[test]
    fn random_3sat_agrees_with_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..300 {
            let n = rng.gen_range(3..=10u32);
            let m = rng.gen_range(1..=5 * n as usize);
            let cls: Vec<Vec<i32>> = (0..m)
                .map(|_| {
                    (0..3)
                        .map(|_| {
                            let v = rng.gen_range(1..=n as i32);
                            if rng.gen_bool(0.5) {
                                v
                            } else {
                                -v
                            }
                        })
                        .collect()
                })
                .collect();
            let refs: Vec<&[i32]> = cls.iter().map(|c| c.as_slice()).collect();
            let brute = (0..1u32 << n).any(|bits| {
                let model: Vec<bool> = (0..n).map(|i| (bits >> i) & 1 == 1).collect();
                satisfies(&model, &refs)
            });
            match solve(n, &refs) {
                Outcome::Sat(m) => {
                    assert!(brute);
                    assert!(satisfies(&m, &refs));
                }
                Outcome::Unsat => assert!(!brute),
                Outcome::Exhausted => unreachable!(),
            }
        }
    }
}
