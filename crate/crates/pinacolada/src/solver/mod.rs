//! Incremental CDCL SAT solver.
//!
//! MiniSAT-style core: two-watched-literal propagation with blocker
//! literals, first-UIP conflict analysis (no clause minimization),
//! non-chronological backjumping, exponential VSIDS decision ordering on an
//! indexed max-heap (ties broken toward the lower variable index), phase
//! saving with negative-first default, Luby restarts with base 100 and
//! activity-driven learned-clause reduction every 2000 conflicts.
//!
//! Assumptions follow the MiniSAT discipline: they are forced as the first
//! decisions of a `solve` call, and when one is rejected the solver reports
//! the subset of passed assumptions responsible (`failed_assumptions`).
//! Clauses may be added between `solve` calls; learned clauses and variable
//! activity carry over. Everything is deterministic: the same sequence of
//! calls yields the same verdicts, models and statistics.

pub mod dimacs;

use std::fmt;
use std::ops::Not;

/// Propositional variable, 0-based. DIMACS numbering (1-based, signed) is
/// converted only at the text boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0 + 1)
    }
}

/// Literal, packed as `var * 2 + negated`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(var.0 * 2 + u32::from(!positive))
    }

    pub fn pos(var: Var) -> Lit {
        Lit::new(var, true)
    }

    pub fn neg(var: Var) -> Lit {
        Lit::new(var, false)
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_pos(self) -> bool {
        self.0 & 1 == 0
    }

    fn index(self) -> usize {
        self.0 as usize
    }

    /// DIMACS form: 1-based, negative when the literal is negated.
    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.0 >> 1) + 1;
        if self.is_pos() {
            v
        } else {
            -v
        }
    }

    /// Inverse of [`Lit::to_dimacs`]. Panics on 0.
    pub fn from_dimacs(value: i64) -> Lit {
        assert!(value != 0, "DIMACS literal 0 is a clause terminator");
        let var = Var((value.unsigned_abs() - 1) as u32);
        Lit::new(var, value > 0)
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// Result of a `solve` call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Sat,
    Unsat,
}

/// Cumulative counters; never reset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub solve_calls: u64,
    pub conflicts: u64,
    pub propagations: u64,
}

#[derive(Debug, Clone)]
struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    activity: f64,
    deleted: bool,
}

#[derive(Debug, Clone, Copy)]
struct Watcher {
    cref: u32,
    blocker: Lit,
}

const VAR_DECAY: f64 = 0.95;
const CLA_DECAY: f64 = 0.999;
const RESTART_BASE: u64 = 100;
const REDUCE_INTERVAL: u64 = 2000;

fn lit_value(assigns: &[Option<bool>], l: Lit) -> Option<bool> {
    assigns[l.var().index()].map(|b| b == l.is_pos())
}

/// Reluctant-doubling sequence 1,1,2,1,1,2,4,... (zero-based index).
fn luby(mut x: u64) -> u64 {
    let mut size: u64 = 1;
    let mut seq: u32 = 0;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) / 2;
        seq -= 1;
        x %= size;
    }
    1u64 << seq
}

#[derive(Debug, Clone, Default)]
struct VarHeap {
    heap: Vec<Var>,
    pos: Vec<i32>,
}

impl VarHeap {
    /// Max-heap priority: higher activity wins, lower index breaks ties.
    fn better(act: &[f64], a: Var, b: Var) -> bool {
        let (aa, ab) = (act[a.index()], act[b.index()]);
        aa > ab || (aa == ab && a.0 < b.0)
    }

    fn contains(&self, v: Var) -> bool {
        v.index() < self.pos.len() && self.pos[v.index()] >= 0
    }

    fn insert(&mut self, v: Var, act: &[f64]) {
        if self.pos.len() <= v.index() {
            self.pos.resize(v.index() + 1, -1);
        }
        debug_assert!(self.pos[v.index()] < 0);
        self.pos[v.index()] = self.heap.len() as i32;
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1, act);
    }

    /// Activity only grows, so a bumped entry can only move up.
    fn update(&mut self, v: Var, act: &[f64]) {
        if self.contains(v) {
            self.sift_up(self.pos[v.index()] as usize, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<Var> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.pos[top.index()] = -1;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last.index()] = 0;
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if Self::better(act, self.heap[i], self.heap[parent]) {
                self.swap(i, parent);
                i = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        loop {
            let left = 2 * i + 1;
            let right = left + 1;
            let mut best = i;
            if left < self.heap.len() && Self::better(act, self.heap[left], self.heap[best]) {
                best = left;
            }
            if right < self.heap.len() && Self::better(act, self.heap[right], self.heap[best]) {
                best = right;
            }
            if best == i {
                break;
            }
            self.swap(i, best);
            i = best;
        }
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.heap.swap(a, b);
        self.pos[self.heap[a].index()] = a as i32;
        self.pos[self.heap[b].index()] = b as i32;
    }
}

/// The solver. `Clone` snapshots the entire state (clauses, learned clauses,
/// activities, saved phases), giving two independent solvers.
#[derive(Debug, Clone)]
pub struct Solver {
    clauses: Vec<Clause>,
    learnts: Vec<u32>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<Option<bool>>,
    level: Vec<u32>,
    reason: Vec<Option<u32>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    heap: VarHeap,
    saved_phase: Vec<bool>,
    seen: Vec<bool>,
    ok: bool,
    model: Vec<bool>,
    has_model: bool,
    failed: Vec<Lit>,
    stats: SolverStats,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new()
    }
}

impl Solver {
    pub fn new() -> Solver {
        Solver {
            clauses: Vec::new(),
            learnts: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            cla_inc: 1.0,
            heap: VarHeap::default(),
            saved_phase: Vec::new(),
            seen: Vec::new(),
            ok: true,
            model: Vec::new(),
            has_model: false,
            failed: Vec::new(),
            stats: SolverStats::default(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn new_var(&mut self) -> Var {
        let v = Var(self.assigns.len() as u32);
        self.assigns.push(None);
        self.level.push(0);
        self.reason.push(None);
        self.activity.push(0.0);
        self.saved_phase.push(false);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.heap.insert(v, &self.activity);
        v
    }

    fn ensure_var(&mut self, v: Var) {
        while self.num_vars() <= v.index() {
            self.new_var();
        }
    }

    /// Permanently unsatisfiable (an empty clause was derived)?
    pub fn is_ok(&self) -> bool {
        self.ok
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    /// Model of the last `Sat` answer: one value per variable (total).
    pub fn model(&self) -> Option<&[bool]> {
        if self.has_model {
            Some(&self.model)
        } else {
            None
        }
    }

    /// After `Unsat` under assumptions: the subset of the passed assumptions
    /// that cannot hold together (empty when the clauses alone are unsat).
    pub fn failed_assumptions(&self) -> &[Lit] {
        &self.failed
    }

    /// The current problem database: root-level implied units plus all live
    /// problem clauses (learned clauses excluded) — equisatisfiable with
    /// everything added so far. A permanently unsat solver exports the empty
    /// clause.
    pub fn export_cnf(&self) -> (usize, Vec<Vec<Lit>>) {
        if !self.ok {
            return (self.num_vars(), vec![Vec::new()]);
        }
        let root_len = self.trail_lim.first().copied().unwrap_or(self.trail.len());
        let mut out: Vec<Vec<Lit>> = self.trail[..root_len].iter().map(|&l| vec![l]).collect();
        out.extend(
            self.clauses
                .iter()
                .filter(|c| !c.learnt && !c.deleted)
                .map(|c| c.lits.clone()),
        );
        (self.num_vars(), out)
    }

    /// Add a clause; must be called between `solve`s (decision level 0).
    /// Applies top-level simplification: drops satisfied clauses, duplicate
    /// and falsified literals. Returns `false` once the solver is
    /// permanently unsat.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        debug_assert_eq!(self.decision_level(), 0, "clauses are added between solves");
        if !self.ok {
            return false;
        }
        let mut ps: Vec<Lit> = lits.to_vec();
        for &l in &ps {
            self.ensure_var(l.var());
        }
        ps.sort();
        ps.dedup();
        // Packed encoding puts x right before ¬x, so complements are adjacent.
        if ps.windows(2).any(|w| w[0] == !w[1]) {
            return true;
        }
        if ps.iter().any(|&l| lit_value(&self.assigns, l) == Some(true)) {
            return true;
        }
        ps.retain(|&l| lit_value(&self.assigns, l).is_none());
        match ps.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(ps[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                    false
                } else {
                    true
                }
            }
            _ => {
                let cref = self.clauses.len() as u32;
                self.clauses.push(Clause {
                    lits: ps,
                    learnt: false,
                    activity: 0.0,
                    deleted: false,
                });
                self.attach(cref);
                true
            }
        }
    }

    pub fn solve(&mut self, assumptions: &[Lit]) -> Verdict {
        self.stats.solve_calls += 1;
        self.has_model = false;
        self.failed.clear();
        if !self.ok {
            return Verdict::Unsat;
        }
        for &a in assumptions {
            self.ensure_var(a.var());
        }
        debug_assert_eq!(self.decision_level(), 0);
        let verdict = self.search(assumptions);
        self.cancel_until(0);
        verdict
    }

    // -- search ---------------------------------------------------------------

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn search(&mut self, assumptions: &[Lit]) -> Verdict {
        let mut restarts: u64 = 0;
        let mut budget = RESTART_BASE * luby(restarts);
        let mut conflicts_here: u64 = 0;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_here += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Verdict::Unsat;
                }
                let (learnt, bt_level) = self.analyze(confl);
                self.cancel_until(bt_level);
                self.learn(learnt);
                self.var_inc /= VAR_DECAY;
                self.cla_inc /= CLA_DECAY;
                if self.stats.conflicts.is_multiple_of(REDUCE_INTERVAL) {
                    self.reduce_db();
                }
            } else if conflicts_here >= budget {
                restarts += 1;
                budget = RESTART_BASE * luby(restarts);
                conflicts_here = 0;
                self.cancel_until(0);
            } else if self.decision_level() < assumptions.len() {
                let a = assumptions[self.decision_level()];
                match lit_value(&self.assigns, a) {
                    Some(true) => self.trail_lim.push(self.trail.len()),
                    Some(false) => {
                        self.analyze_final(a);
                        return Verdict::Unsat;
                    }
                    None => {
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(a, None);
                    }
                }
            } else if let Some(v) = self.pick_branch_var() {
                let lit = Lit::new(v, self.saved_phase[v.index()]);
                self.trail_lim.push(self.trail.len());
                self.enqueue(lit, None);
            } else {
                self.model = self.assigns.iter().map(|a| a.expect("total")).collect();
                self.has_model = true;
                return Verdict::Sat;
            }
        }
    }

    fn pick_branch_var(&mut self) -> Option<Var> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v.index()].is_none() {
                return Some(v);
            }
        }
        None
    }

    fn enqueue(&mut self, lit: Lit, reason: Option<u32>) {
        let v = lit.var().index();
        debug_assert!(self.assigns[v].is_none());
        self.assigns[v] = Some(lit.is_pos());
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(lit);
    }

    fn cancel_until(&mut self, target_level: usize) {
        if self.decision_level() <= target_level {
            return;
        }
        let lim = self.trail_lim[target_level];
        for idx in (lim..self.trail.len()).rev() {
            let lit = self.trail[idx];
            let v = lit.var();
            self.saved_phase[v.index()] = lit.is_pos();
            self.assigns[v.index()] = None;
            self.reason[v.index()] = None;
            if !self.heap.contains(v) {
                self.heap.insert(v, &self.activity);
            }
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(target_level);
        self.qhead = lim;
    }

    // -- propagation ------------------------------------------------------------

    fn attach(&mut self, cref: u32) {
        let c = &self.clauses[cref as usize];
        debug_assert!(c.lits.len() >= 2);
        let (l0, l1) = (c.lits[0], c.lits[1]);
        self.watches[l0.index()].push(Watcher { cref, blocker: l1 });
        self.watches[l1.index()].push(Watcher { cref, blocker: l0 });
    }

    fn detach(&mut self, cref: u32) {
        let c = &self.clauses[cref as usize];
        let (l0, l1) = (c.lits[0], c.lits[1]);
        self.watches[l0.index()].retain(|w| w.cref != cref);
        self.watches[l1.index()].retain(|w| w.cref != cref);
    }

    fn propagate(&mut self) -> Option<u32> {
        let mut conflict = None;
        'trail: while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.index()]);
            let mut i = 0;
            let mut keep = 0;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if lit_value(&self.assigns, w.blocker) == Some(true) {
                    ws[keep] = w;
                    keep += 1;
                    continue;
                }
                let c = &mut self.clauses[w.cref as usize];
                if c.lits[0] == false_lit {
                    c.lits.swap(0, 1);
                }
                debug_assert_eq!(c.lits[1], false_lit);
                let first = c.lits[0];
                let watcher = Watcher {
                    cref: w.cref,
                    blocker: first,
                };
                if lit_value(&self.assigns, first) == Some(true) {
                    ws[keep] = watcher;
                    keep += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..c.lits.len() {
                    if lit_value(&self.assigns, c.lits[k]) != Some(false) {
                        c.lits.swap(1, k);
                        let new_watch = c.lits[1];
                        self.watches[new_watch.index()].push(watcher);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                // Unit or conflicting under the current assignment.
                ws[keep] = watcher;
                keep += 1;
                if lit_value(&self.assigns, first) == Some(false) {
                    while i < ws.len() {
                        ws[keep] = ws[i];
                        keep += 1;
                        i += 1;
                    }
                    ws.truncate(keep);
                    self.watches[false_lit.index()] = ws;
                    self.qhead = self.trail.len();
                    conflict = Some(w.cref);
                    break 'trail;
                }
                self.enqueue(first, Some(w.cref));
            }
            ws.truncate(keep);
            self.watches[false_lit.index()] = ws;
        }
        conflict
    }

    // -- conflict analysis ---------------------------------------------------

    /// First-UIP learning. Returns the learned clause (asserting literal in
    /// slot 0, highest-level remaining literal in slot 1) and the backjump
    /// level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, usize) {
        let mut learnt: Vec<Lit> = vec![Lit(0)]; // slot 0 reserved
        let mut counter: u32 = 0;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        let mut to_clear: Vec<Var> = Vec::new();
        loop {
            self.bump_clause(confl);
            let start = usize::from(p.is_some());
            let clen = self.clauses[confl as usize].lits.len();
            for k in start..clen {
                let q = self.clauses[confl as usize].lits[k];
                let v = q.var();
                if !self.seen[v.index()] && self.level[v.index()] > 0 {
                    self.seen[v.index()] = true;
                    to_clear.push(v);
                    self.bump_var(v);
                    if self.level[v.index()] as usize >= self.decision_level() {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().index()] {
                    break;
                }
            }
            let lit = self.trail[index];
            self.seen[lit.var().index()] = false;
            counter -= 1;
            p = Some(lit);
            if counter == 0 {
                break;
            }
            confl = self.reason[lit.var().index()].expect("non-decision on conflict side");
        }
        learnt[0] = !p.unwrap();
        let mut bt_level = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].var().index()] > self.level[learnt[max_i].var().index()] {
                    max_i = k;
                }
            }
            learnt.swap(1, max_i);
            bt_level = self.level[learnt[1].var().index()] as usize;
        }
        for v in to_clear {
            self.seen[v.index()] = false;
        }
        (learnt, bt_level)
    }

    /// Attach the learned clause and assert its first literal. Call after
    /// backjumping to the level `analyze` returned.
    fn learn(&mut self, lits: Vec<Lit>) {
        if lits.len() == 1 {
            self.enqueue(lits[0], None);
            return;
        }
        let cref = self.clauses.len() as u32;
        let first = lits[0];
        self.clauses.push(Clause {
            lits,
            learnt: true,
            activity: 0.0,
            deleted: false,
        });
        self.learnts.push(cref);
        self.bump_clause(cref);
        self.attach(cref);
        self.enqueue(first, Some(cref));
    }

    /// An assumption came up false: collect the subset of assumptions that
    /// together imply its negation (plus the assumption itself).
    fn analyze_final(&mut self, failing: Lit) {
        self.failed.clear();
        self.failed.push(failing);
        if self.decision_level() == 0 {
            return;
        }
        let mut to_clear = vec![failing.var()];
        self.seen[failing.var().index()] = true;
        for idx in (self.trail_lim[0]..self.trail.len()).rev() {
            let x = self.trail[idx].var();
            if !self.seen[x.index()] {
                continue;
            }
            match self.reason[x.index()] {
                None => {
                    // A decision here is necessarily an assumption.
                    debug_assert!(self.level[x.index()] > 0);
                    self.failed.push(self.trail[idx]);
                }
                Some(cr) => {
                    let clen = self.clauses[cr as usize].lits.len();
                    for k in 1..clen {
                        let q = self.clauses[cr as usize].lits[k];
                        if self.level[q.var().index()] > 0 && !self.seen[q.var().index()] {
                            self.seen[q.var().index()] = true;
                            to_clear.push(q.var());
                        }
                    }
                }
            }
        }
        for v in to_clear {
            self.seen[v.index()] = false;
        }
    }

    // -- activities & clause database -----------------------------------------

    fn bump_var(&mut self, v: Var) {
        self.activity[v.index()] += self.var_inc;
        if self.activity[v.index()] > 1e100 {
            // Uniform rescale keeps the heap order intact.
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.update(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: u32) {
        let c = &mut self.clauses[cref as usize];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for &lc in &self.learnts {
                self.clauses[lc as usize].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    fn locked(&self, cref: u32) -> bool {
        let first = self.clauses[cref as usize].lits[0];
        self.reason[first.var().index()] == Some(cref)
    }

    /// Drop the less active half of the learned clauses, keeping reasons of
    /// current assignments and binary clauses.
    fn reduce_db(&mut self) {
        let mut order = self.learnts.clone();
        order.sort_by(|&a, &b| {
            let (ca, cb) = (&self.clauses[a as usize], &self.clauses[b as usize]);
            ca.activity
                .partial_cmp(&cb.activity)
                .expect("activities are finite")
                .then(a.cmp(&b))
        });
        for &cref in &order[..order.len() / 2] {
            let c = &self.clauses[cref as usize];
            if c.lits.len() <= 2 || self.locked(cref) {
                continue;
            }
            self.detach(cref);
            let c = &mut self.clauses[cref as usize];
            c.deleted = true;
            c.lits = Vec::new();
        }
        let clauses = &self.clauses;
        self.learnts.retain(|&cr| !clauses[cr as usize].deleted);
    }
}
