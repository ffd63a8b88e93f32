//! Single-path symbolic exploration with eager infeasibility checks.
//!
//! One symbolic state walks the flat IR instruction by instruction. Straight-
//! line instructions only touch the SSA state; every BRANCH, ASSUME and
//! ASSERT is a query point where the pending definitions are encoded to CNF
//! and the condition's feasibility is decided by the SAT solver before any
//! successor is explored. Infeasible successors are never stepped.
//!
//! Two solver disciplines are supported:
//!
//! * **Partial-incremental (PI)** — each active path owns a solver; path
//!   constraints are committed as unit clauses. A worklist sibling under DFS
//!   carries no solver at all: when popped, a fresh instance is built and the
//!   whole prefix (definitions plus committed units) is re-encoded, with no
//!   queries. Under BFS every forked child keeps a live solver by cloning,
//!   which is memory-hungry — the CLI warns about that combination.
//! * **Full-incremental (FI)** — one global solver for the whole search.
//!   Every query point allocates an activation literal guarding its segment's
//!   clauses; a path is enforced by passing its activation sequence as
//!   assumptions. Retired paths have their exclusively-owned activation
//!   literals negated — as permanent units by default, or kept on a global
//!   abandoned list that is re-assumed negatively on every query when
//!   `fi_strict_assumptions` is set.

use crate::bitblast::{Encoder, Memo};
use crate::frontend::Loc;
use crate::goto::{Expr, GotoFunction, GotoProgram, Instruction, Name, Ty};
use crate::semantics::{const_eval, Value};
use crate::solver::{Lit, Solver, Verdict as SatResult};
use crate::ssa::{PList, PathEvent, SsaName, StepMove, SymbolicState};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Strategy {
    Dfs,
    Bfs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    FullIncremental,
    PartialIncremental,
}

#[derive(Debug, Clone)]
pub struct ExplorerConfig {
    pub width: u32,
    pub strategy: Strategy,
    pub mode: Mode,
    /// Loop unwinding limit; `None` never truncates (may diverge).
    pub unwind: Option<u32>,
    /// Call-stack depth cap; exceeding it truncates the path like an
    /// exhausted unwinding limit (recursion is inlined on the fly).
    pub max_call_depth: usize,
    pub stop_at_first_violation: bool,
    /// FI only: keep abandoned activation literals as negative assumptions
    /// on every query instead of adding permanent negated units.
    pub fi_strict_assumptions: bool,
    pub max_states: Option<u64>,
    pub deadline: Option<Instant>,
    /// FI only: keep the global solver's final clause database on the
    /// verdict (for CNF dumps).
    pub keep_cnf: bool,
}

impl Default for ExplorerConfig {
    fn default() -> ExplorerConfig {
        ExplorerConfig {
            width: 32,
            strategy: Strategy::Dfs,
            mode: Mode::FullIncremental,
            unwind: None,
            max_call_depth: 256,
            stop_at_first_violation: true,
            fi_strict_assumptions: false,
            max_states: None,
            deadline: None,
            keep_cnf: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExploreStats {
    /// Bumped every time a state begins stepping: the initial state plus
    /// every feasible branch successor (continuing or popped).
    pub states_explored: u64,
    pub solver_queries: u64,
    pub solver_instances_created: u64,
    pub max_live_solvers: u64,
    pub max_frontier_size: u64,
    /// CNF clauses emitted by this exploration (encoder output plus
    /// explicit commit/abandonment units).
    pub clauses_added: u64,
    /// Branches decided without the solver because the rewritten condition
    /// was a literal.
    pub folded_decisions: u64,
    pub truncated_paths: u64,
    pub discarded_assumes: u64,
    pub paths_completed: u64,
}

/// One symbolic input along the violating path.
#[derive(Debug, Clone)]
pub struct NondetValue {
    pub ordinal: usize,
    pub var: String,
    pub ty: Ty,
    pub value: Value,
    pub loc: Loc,
}

#[derive(Debug, Clone)]
pub struct BranchTaken {
    pub function: String,
    pub index: usize,
    pub taken: bool,
    pub loc: Loc,
}

/// Everything needed to report and replay an assertion violation.
#[derive(Debug, Clone)]
pub struct Violation {
    pub function: String,
    pub index: usize,
    pub loc: Loc,
    pub inputs: Vec<NondetValue>,
    pub branches: Vec<BranchTaken>,
    /// The inputs as a concrete tape in execution order, ready for replay.
    pub tape: Vec<i64>,
}

#[derive(Debug)]
pub enum Outcome {
    Safe,
    Unsafe(Box<Violation>),
    ResourceLimit(String),
}

#[derive(Debug)]
pub struct Verdict {
    pub outcome: Outcome,
    /// True only for SAFE verdicts where some path was truncated by the
    /// unwinding or call-depth limit: safety holds up to those bounds only.
    pub bounded: bool,
    pub stats: ExploreStats,
    /// Branch-direction strings of every feasible path explored to
    /// completion, in completion order.
    pub complete_paths: Vec<String>,
    /// FI global solver's final clause database, when `keep_cnf` was set.
    pub final_cnf: Option<(usize, Vec<Vec<Lit>>)>,
}

impl Verdict {
    pub fn is_safe(&self) -> bool {
        matches!(self.outcome, Outcome::Safe)
    }

    pub fn violation(&self) -> Option<&Violation> {
        match &self.outcome {
            Outcome::Unsafe(v) => Some(v),
            _ => None,
        }
    }
}

pub fn explore(program: &GotoProgram, cfg: &ExplorerConfig) -> Verdict {
    Engine::new(program, cfg).run()
}

// ---------------------------------------------------------------------------
// engine internals
// ---------------------------------------------------------------------------

/// A path-owned solver in PI mode: solver, its encoder, the SSA-name memo
/// and how many definitions (oldest first) it has already encoded.
#[derive(Clone)]
struct PiSolver {
    solver: Solver,
    encoder: Encoder,
    memo: Memo,
    encoded_defs: usize,
}

/// A condition committed on a path (branch polarity, passed assume, proved
/// assert), kept so a PI backtrack can re-encode the full prefix.
struct Commit {
    cond: Expr<SsaName>,
    polarity: bool,
}

enum ModeCtx {
    Pi {
        /// `None` for a DFS worklist sibling: rebuilt on pop.
        live: Option<Box<PiSolver>>,
        commits: PList<Commit>,
    },
    Fi {
        /// Activation literals enforcing this path, oldest first.
        assumptions: PList<Lit>,
        /// The suffix of `assumptions` owned by no other live state; safe to
        /// disable when this path retires.
        owned: Vec<Lit>,
        memo: Memo,
        encoded_defs: usize,
    },
}

struct PathState {
    sym: SymbolicState,
    ctx: ModeCtx,
}

struct FiGlobal {
    solver: Solver,
    encoder: Encoder,
    /// Strict-assumption mode: activation literals of retired paths, passed
    /// negated on every later query instead of being negated as units.
    abandoned: Vec<Lit>,
}

enum StepResult {
    /// The path ended (completed, discarded, truncated, or dead-ended).
    Retired,
    /// A feasible successor continues in place as a new state identity.
    Continue(PathState),
    Violated(Violation),
    Budget(String),
}

struct Engine<'a> {
    program: &'a GotoProgram,
    cfg: &'a ExplorerConfig,
    stats: ExploreStats,
    worklist: VecDeque<PathState>,
    fi: Option<FiGlobal>,
    live_solvers: u64,
    any_truncated: bool,
    complete_paths: Vec<String>,
    found: Option<Box<Violation>>,
}

impl<'a> Engine<'a> {
    fn new(program: &'a GotoProgram, cfg: &'a ExplorerConfig) -> Engine<'a> {
        Engine {
            program,
            cfg,
            stats: ExploreStats::default(),
            worklist: VecDeque::new(),
            fi: None,
            live_solvers: 0,
            any_truncated: false,
            complete_paths: Vec::new(),
            found: None,
        }
    }

    fn run(mut self) -> Verdict {
        let mut cur = Some(self.initial_state());
        loop {
            if let Some(deadline) = self.cfg.deadline {
                if Instant::now() >= deadline {
                    return self.verdict(Outcome::ResourceLimit("wall-clock limit reached".into()));
                }
            }
            let state = match cur.take() {
                Some(s) => s,
                None => match self.pop_next() {
                    Some(s) => s,
                    None => break,
                },
            };
            if let Some(max) = self.cfg.max_states {
                if self.stats.states_explored >= max {
                    return self.verdict(Outcome::ResourceLimit("state budget exhausted".into()));
                }
            }
            self.stats.states_explored += 1;
            match self.step_path(state) {
                StepResult::Retired => {}
                StepResult::Continue(next) => cur = Some(next),
                StepResult::Budget(why) => return self.verdict(Outcome::ResourceLimit(why)),
                StepResult::Violated(v) => {
                    if self.cfg.stop_at_first_violation {
                        return self.verdict(Outcome::Unsafe(Box::new(v)));
                    }
                    if self.found.is_none() {
                        self.found = Some(Box::new(v));
                    }
                }
            }
        }
        match self.found.take() {
            Some(v) => self.verdict(Outcome::Unsafe(v)),
            None => self.verdict(Outcome::Safe),
        }
    }

    fn verdict(&mut self, outcome: Outcome) -> Verdict {
        let bounded = matches!(outcome, Outcome::Safe) && self.any_truncated;
        let final_cnf = if self.cfg.keep_cnf {
            self.fi.as_ref().map(|fi| fi.solver.export_cnf())
        } else {
            None
        };
        Verdict {
            outcome,
            bounded,
            stats: self.stats.clone(),
            complete_paths: std::mem::take(&mut self.complete_paths),
            final_cnf,
        }
    }

    fn initial_state(&mut self) -> PathState {
        let sym = SymbolicState::start(self.program.main());
        let ctx = match self.cfg.mode {
            Mode::PartialIncremental => {
                let pi = self.fresh_pi_solver();
                ModeCtx::Pi {
                    live: Some(Box::new(pi)),
                    commits: PList::new(),
                }
            }
            Mode::FullIncremental => {
                let mut solver = Solver::new();
                let encoder = Encoder::new(&mut solver, self.cfg.width);
                self.note_new_solver();
                self.stats.clauses_added += encoder.clauses_added;
                self.fi = Some(FiGlobal {
                    solver,
                    encoder,
                    abandoned: Vec::new(),
                });
                ModeCtx::Fi {
                    assumptions: PList::new(),
                    owned: Vec::new(),
                    memo: Memo::new(),
                    encoded_defs: 0,
                }
            }
        };
        PathState { sym, ctx }
    }

    fn note_new_solver(&mut self) {
        self.stats.solver_instances_created += 1;
        self.live_solvers += 1;
        self.stats.max_live_solvers = self.stats.max_live_solvers.max(self.live_solvers);
    }

    fn fresh_pi_solver(&mut self) -> PiSolver {
        let mut solver = Solver::new();
        let encoder = Encoder::new(&mut solver, self.cfg.width);
        self.note_new_solver();
        self.stats.clauses_added += encoder.clauses_added;
        PiSolver {
            solver,
            encoder,
            memo: Memo::new(),
            encoded_defs: 0,
        }
    }

    fn push_state(&mut self, s: PathState) {
        self.worklist.push_back(s);
        self.stats.max_frontier_size = self.stats.max_frontier_size.max(self.worklist.len() as u64);
    }

    /// Next worklist state per strategy; PI siblings parked without a solver
    /// get one rebuilt here — a fresh instance re-encoding the whole prefix,
    /// with zero queries.
    fn pop_next(&mut self) -> Option<PathState> {
        let mut s = match self.cfg.strategy {
            Strategy::Dfs => self.worklist.pop_back()?,
            Strategy::Bfs => self.worklist.pop_front()?,
        };
        if let ModeCtx::Pi { live, commits } = &mut s.ctx {
            if live.is_none() {
                let rebuilt = self.pi_rebuild(&s.sym, commits);
                *live = Some(Box::new(rebuilt));
            }
        }
        Some(s)
    }

    fn pi_rebuild(&mut self, sym: &SymbolicState, commits: &PList<Commit>) -> PiSolver {
        let mut solver = Solver::new();
        let mut encoder = Encoder::new(&mut solver, self.cfg.width);
        let mut memo = Memo::new();
        let defs = sym.defs.collect_oldest_first();
        for def in &defs {
            encoder.encode_def(&mut solver, &mut memo, def);
        }
        for c in commits.collect_oldest_first() {
            let root = encoder.encode_bool(&mut solver, &mut memo, &c.cond);
            let unit = if c.polarity { root } else { !root };
            solver.add_clause(&[unit]);
            self.stats.clauses_added += 1;
        }
        self.stats.clauses_added += encoder.clauses_added;
        self.note_new_solver();
        PiSolver {
            solver,
            encoder,
            memo,
            encoded_defs: defs.len(),
        }
    }

    // -- path retirement ------------------------------------------------------

    fn retire_ctx(&mut self, ctx: ModeCtx) {
        match ctx {
            ModeCtx::Pi { live, .. } => {
                if live.is_some() {
                    self.live_solvers -= 1;
                }
            }
            ModeCtx::Fi { owned, .. } => {
                let strict = self.cfg.fi_strict_assumptions;
                let fi = self.fi.as_mut().expect("FI mode keeps the global solver");
                if strict {
                    fi.abandoned.extend(owned);
                } else {
                    for v in owned {
                        fi.solver.add_clause(&[!v]);
                        self.stats.clauses_added += 1;
                    }
                }
            }
        }
    }

    fn retire_complete(&mut self, state: PathState) {
        self.stats.paths_completed += 1;
        let dirs: String = state
            .sym
            .trace
            .collect_oldest_first()
            .iter()
            .filter_map(|ev| match ev {
                PathEvent::Branch { taken, .. } => Some(if *taken { 'T' } else { 'F' }),
                _ => None,
            })
            .collect();
        self.complete_paths.push(dirs);
        self.retire_ctx(state.ctx);
    }

    fn retire_truncated(&mut self, state: PathState) {
        self.any_truncated = true;
        self.stats.truncated_paths += 1;
        self.retire_ctx(state.ctx);
    }

    fn retire_infeasible(&mut self, state: PathState) {
        self.retire_ctx(state.ctx);
    }

    // -- encoding and queries ---------------------------------------------------

    /// Encode the pending definitions and the condition into the state's
    /// solver context; returns the condition's root literal. In FI mode this
    /// opens a new segment: a fresh activation literal guards everything
    /// emitted here and joins the path assumptions.
    fn encode_cond(&mut self, sym: &SymbolicState, ctx: &mut ModeCtx, cond: &Expr<SsaName>) -> Lit {
        match ctx {
            ModeCtx::Pi { live, .. } => {
                let pi = live.as_mut().expect("stepping PI state has a live solver");
                let defs = sym.defs.collect_oldest_first();
                let before = pi.encoder.clauses_added;
                for def in &defs[pi.encoded_defs..] {
                    pi.encoder.encode_def(&mut pi.solver, &mut pi.memo, def);
                }
                pi.encoded_defs = defs.len();
                let root = pi.encoder.encode_bool(&mut pi.solver, &mut pi.memo, cond);
                self.stats.clauses_added += pi.encoder.clauses_added - before;
                root
            }
            ModeCtx::Fi {
                assumptions,
                owned,
                memo,
                encoded_defs,
            } => {
                let fi = self.fi.as_mut().expect("FI mode keeps the global solver");
                let a_seg = Lit::pos(fi.solver.new_var());
                fi.encoder.set_guard(Some(a_seg));
                let defs = sym.defs.collect_oldest_first();
                let before = fi.encoder.clauses_added;
                for def in &defs[*encoded_defs..] {
                    fi.encoder.encode_def(&mut fi.solver, memo, def);
                }
                *encoded_defs = defs.len();
                let root = fi.encoder.encode_bool(&mut fi.solver, memo, cond);
                fi.encoder.set_guard(None);
                self.stats.clauses_added += fi.encoder.clauses_added - before;
                *assumptions = assumptions.push(a_seg);
                owned.push(a_seg);
                root
            }
        }
    }

    fn fi_base(assumptions: &PList<Lit>, abandoned: &[Lit], strict: bool) -> Vec<Lit> {
        let mut v: Vec<Lit> = assumptions.collect_oldest_first().into_iter().copied().collect();
        if strict {
            v.extend(abandoned.iter().map(|&a| !a));
        }
        v
    }

    /// One feasibility/violation query on top of the path context.
    fn query_one(&mut self, ctx: &mut ModeCtx, extra: Lit) -> bool {
        self.stats.solver_queries += 1;
        match ctx {
            ModeCtx::Pi { live, .. } => {
                let pi = live.as_mut().expect("stepping PI state has a live solver");
                pi.solver.solve(&[extra]) == SatResult::Sat
            }
            ModeCtx::Fi { assumptions, .. } => {
                let strict = self.cfg.fi_strict_assumptions;
                let fi = self.fi.as_mut().expect("FI mode keeps the global solver");
                let mut q = Self::fi_base(assumptions, &fi.abandoned, strict);
                q.push(extra);
                fi.solver.solve(&q) == SatResult::Sat
            }
        }
    }

    /// Commit a condition's polarity to the path context: a unit clause on
    /// the root in PI, a fresh guarded direction literal in FI.
    fn commit_polarity(&mut self, ctx: &mut ModeCtx, cond: Expr<SsaName>, root: Lit, polarity: bool) {
        let unit = if polarity { root } else { !root };
        match ctx {
            ModeCtx::Pi { live, commits } => {
                let pi = live.as_mut().expect("stepping PI state has a live solver");
                pi.solver.add_clause(&[unit]);
                self.stats.clauses_added += 1;
                *commits = commits.push(Commit { cond, polarity });
            }
            ModeCtx::Fi {
                assumptions, owned, ..
            } => {
                let fi = self.fi.as_mut().expect("FI mode keeps the global solver");
                let d = Lit::pos(fi.solver.new_var());
                fi.solver.add_clause(&[!d, unit]);
                self.stats.clauses_added += 1;
                *assumptions = assumptions.push(d);
                owned.push(d);
            }
        }
    }

    // -- stepping ---------------------------------------------------------------

    fn advance_or_retire(
        &mut self,
        mut state: PathState,
        func: &GotoFunction,
        target: usize,
    ) -> Option<PathState> {
        match state.sym.move_to(&func.loop_heads, target, self.cfg.unwind) {
            StepMove::Ok => Some(state),
            StepMove::LoopLimit => {
                self.retire_truncated(state);
                None
            }
        }
    }

    /// Run one state until it retires, forks, or finds a violation.
    fn step_path(&mut self, mut state: PathState) -> StepResult {
        let program = self.program;
        loop {
            if let Some(deadline) = self.cfg.deadline {
                if Instant::now() >= deadline {
                    return StepResult::Budget("wall-clock limit reached".into());
                }
            }
            let func = program.function(state.sym.func_name());
            let pc = state.sym.pc();
            match &func.body[pc] {
                Instruction::Assign { var, expr, loc } => {
                    let rhs = state.sym.rewrite(expr);
                    state.sym.assign(var, rhs, *loc);
                    state = match self.advance_or_retire(state, func, pc + 1) {
                        Some(s) => s,
                        None => return StepResult::Retired,
                    };
                }
                Instruction::Nondet { var, loc, .. } => {
                    state.sym.nondet(var, pc, *loc);
                    state = match self.advance_or_retire(state, func, pc + 1) {
                        Some(s) => s,
                        None => return StepResult::Retired,
                    };
                }
                Instruction::Goto { target, .. } => {
                    state = match self.advance_or_retire(state, func, *target) {
                        Some(s) => s,
                        None => return StepResult::Retired,
                    };
                }
                Instruction::Branch {
                    cond,
                    target_true,
                    target_false,
                    loc,
                } => {
                    let sc = state.sym.rewrite(cond);
                    if !sc.has_vars() {
                        // Decided by constant folding: no query, no fork, the
                        // same state identity keeps stepping.
                        let taken = const_eval(self.cfg.width, &sc)
                            .expect("literal condition evaluates")
                            .as_bool();
                        self.stats.folded_decisions += 1;
                        state.sym.record(PathEvent::Branch {
                            func: func.name.clone(),
                            index: pc,
                            taken,
                            cond: sc,
                            loc: *loc,
                        });
                        let target = if taken { *target_true } else { *target_false };
                        state = match self.advance_or_retire(state, func, target) {
                            Some(s) => s,
                            None => return StepResult::Retired,
                        };
                        continue;
                    }
                    return self.at_branch(state, func, pc, sc, *target_true, *target_false, *loc);
                }
                Instruction::Assume { cond, loc } => {
                    let sc = state.sym.rewrite(cond);
                    let root = self.encode_cond(&state.sym, &mut state.ctx, &sc);
                    if !self.query_one(&mut state.ctx, root) {
                        // No input reaches past this assumption: the path is
                        // silently discarded.
                        self.stats.discarded_assumes += 1;
                        self.retire_infeasible(state);
                        return StepResult::Retired;
                    }
                    self.commit_polarity(&mut state.ctx, sc.clone(), root, true);
                    state.sym.record(PathEvent::Assume {
                        func: func.name.clone(),
                        index: pc,
                        cond: sc,
                        loc: *loc,
                    });
                    state = match self.advance_or_retire(state, func, pc + 1) {
                        Some(s) => s,
                        None => return StepResult::Retired,
                    };
                }
                Instruction::Assert { cond, loc } => {
                    let sc = state.sym.rewrite(cond);
                    let root = self.encode_cond(&state.sym, &mut state.ctx, &sc);
                    if self.query_one(&mut state.ctx, !root) {
                        // Some input drives this path into the violation: the
                        // model is the counterexample.
                        let v = self.build_violation(&state, &func.name, pc, *loc);
                        self.retire_ctx(state.ctx);
                        return StepResult::Violated(v);
                    }
                    // The assertion is entailed here; committing it
                    // strengthens propagation for the rest of the path.
                    self.commit_polarity(&mut state.ctx, sc.clone(), root, true);
                    state.sym.record(PathEvent::Assert {
                        func: func.name.clone(),
                        index: pc,
                        cond: sc,
                        loc: *loc,
                    });
                    state = match self.advance_or_retire(state, func, pc + 1) {
                        Some(s) => s,
                        None => return StepResult::Retired,
                    };
                }
                Instruction::Call {
                    dest,
                    callee,
                    args,
                    loc,
                } => {
                    let argv: Vec<Expr<SsaName>> =
                        args.iter().map(|a| state.sym.rewrite(a)).collect();
                    let callee_fn = program.function(callee);
                    state.sym.enter_call(callee_fn, argv, dest.clone(), pc, *loc);
                    if state.sym.depth() > self.cfg.max_call_depth {
                        self.retire_truncated(state);
                        return StepResult::Retired;
                    }
                }
                Instruction::Return { expr, loc } => {
                    let ret = expr.as_ref().map(|e| state.sym.rewrite(e));
                    if state.sym.exit_call(ret, pc, *loc) {
                        self.retire_complete(state);
                        return StepResult::Retired;
                    }
                    // The caller frame still points at the CALL instruction;
                    // resume just past it.
                    let caller_fn = program.function(state.sym.func_name());
                    let resume = state.sym.pc() + 1;
                    state = match self.advance_or_retire(state, caller_fn, resume) {
                        Some(s) => s,
                        None => return StepResult::Retired,
                    };
                }
                Instruction::Halt { .. } => {
                    self.retire_complete(state);
                    return StepResult::Retired;
                }
            }
        }
    }

    /// Feasibility decision at a branch whose condition needs the solver:
    /// always two queries, true polarity first.
    #[allow(clippy::too_many_arguments)]
    fn at_branch(
        &mut self,
        mut state: PathState,
        func: &GotoFunction,
        pc: usize,
        cond: Expr<SsaName>,
        target_true: usize,
        target_false: usize,
        loc: Loc,
    ) -> StepResult {
        let root = self.encode_cond(&state.sym, &mut state.ctx, &cond);
        let t_sat = self.query_one(&mut state.ctx, root);
        let f_sat = self.query_one(&mut state.ctx, !root);
        match (t_sat, f_sat) {
            (false, false) => {
                // Dead end: the whole subtree is abandoned.
                self.retire_infeasible(state);
                StepResult::Retired
            }
            (true, false) => {
                self.take_single(state, func, pc, cond, root, true, target_true, loc)
            }
            (false, true) => {
                self.take_single(state, func, pc, cond, root, false, target_false, loc)
            }
            (true, true) => {
                self.fork(state, func, pc, cond, root, target_true, target_false, loc)
            }
        }
    }

    /// Exactly one feasible successor: commit its polarity and continue in
    /// place as a new state identity.
    #[allow(clippy::too_many_arguments)]
    fn take_single(
        &mut self,
        mut state: PathState,
        func: &GotoFunction,
        pc: usize,
        cond: Expr<SsaName>,
        root: Lit,
        polarity: bool,
        target: usize,
        loc: Loc,
    ) -> StepResult {
        self.commit_polarity(&mut state.ctx, cond.clone(), root, polarity);
        state.sym.record(PathEvent::Branch {
            func: func.name.clone(),
            index: pc,
            taken: polarity,
            cond,
            loc,
        });
        match self.advance_or_retire(state, func, target) {
            Some(s) => StepResult::Continue(s),
            None => StepResult::Retired,
        }
    }

    /// Both successors feasible: fork. DFS continues into the true child and
    /// parks the false sibling; BFS enqueues both (true first).
    #[allow(clippy::too_many_arguments)]
    fn fork(
        &mut self,
        mut state: PathState,
        func: &GotoFunction,
        pc: usize,
        cond: Expr<SsaName>,
        root: Lit,
        target_true: usize,
        target_false: usize,
        loc: Loc,
    ) -> StepResult {
        // False sibling first: its solver context must be derived before the
        // true polarity is committed into the parent's.
        let mut sib_sym = state.sym.clone();
        sib_sym.record(PathEvent::Branch {
            func: func.name.clone(),
            index: pc,
            taken: false,
            cond: cond.clone(),
            loc,
        });
        let sib_move = sib_sym.move_to(&func.loop_heads, target_false, self.cfg.unwind);

        let sib_ctx = match &mut state.ctx {
            ModeCtx::Pi { live, commits } => {
                let commits_f = commits.push(Commit {
                    cond: cond.clone(),
                    polarity: false,
                });
                match self.cfg.strategy {
                    // The sibling waits without a solver; a backtrack builds
                    // a fresh one and re-encodes the prefix.
                    Strategy::Dfs => ModeCtx::Pi {
                        live: None,
                        commits: commits_f,
                    },
                    // Every BFS child keeps a live solver: clone before the
                    // true commit lands in the parent's instance.
                    Strategy::Bfs => {
                        let mut cloned = live.as_ref().expect("stepping PI state has a live solver").clone();
                        cloned.solver.add_clause(&[!root]);
                        self.stats.clauses_added += 1;
                        self.note_new_solver();
                        ModeCtx::Pi {
                            live: Some(cloned),
                            commits: commits_f,
                        }
                    }
                }
            }
            ModeCtx::Fi {
                assumptions,
                memo,
                encoded_defs,
                ..
            } => {
                let fi = self.fi.as_mut().expect("FI mode keeps the global solver");
                let d_false = Lit::pos(fi.solver.new_var());
                fi.solver.add_clause(&[!d_false, !root]);
                self.stats.clauses_added += 1;
                ModeCtx::Fi {
                    assumptions: assumptions.push(d_false),
                    owned: vec![d_false],
                    memo: memo.clone(),
                    encoded_defs: *encoded_defs,
                }
            }
        };
        let sibling = PathState {
            sym: sib_sym,
            ctx: sib_ctx,
        };

        // Now the continuing true child, reusing the parent's context.
        match &mut state.ctx {
            ModeCtx::Pi { live, commits } => {
                let pi = live.as_mut().expect("stepping PI state has a live solver");
                pi.solver.add_clause(&[root]);
                self.stats.clauses_added += 1;
                *commits = commits.push(Commit {
                    cond: cond.clone(),
                    polarity: true,
                });
            }
            ModeCtx::Fi {
                assumptions, owned, ..
            } => {
                let fi = self.fi.as_mut().expect("FI mode keeps the global solver");
                let d_true = Lit::pos(fi.solver.new_var());
                fi.solver.add_clause(&[!d_true, root]);
                self.stats.clauses_added += 1;
                *assumptions = assumptions.push(d_true);
                // The parent's owned literals are now shared with the
                // sibling; each child starts owning only its direction var.
                *owned = vec![d_true];
            }
        }
        state.sym.record(PathEvent::Branch {
            func: func.name.clone(),
            index: pc,
            taken: true,
            cond,
            loc,
        });
        let cont_move = state.sym.move_to(&func.loop_heads, target_true, self.cfg.unwind);

        match self.cfg.strategy {
            Strategy::Dfs => {
                if sib_move == StepMove::Ok {
                    self.push_state(sibling);
                } else {
                    self.retire_truncated(sibling);
                }
                match cont_move {
                    StepMove::Ok => StepResult::Continue(state),
                    StepMove::LoopLimit => {
                        self.retire_truncated(state);
                        StepResult::Retired
                    }
                }
            }
            Strategy::Bfs => {
                if cont_move == StepMove::Ok {
                    self.push_state(state);
                } else {
                    self.retire_truncated(state);
                }
                if sib_move == StepMove::Ok {
                    self.push_state(sibling);
                } else {
                    self.retire_truncated(sibling);
                }
                StepResult::Retired
            }
        }
    }

    /// Read the model of the SAT violation query into a replayable witness.
    fn build_violation(&self, state: &PathState, func: &Name, index: usize, loc: Loc) -> Violation {
        let (model, memo, encoder): (&[bool], &Memo, &Encoder) = match &state.ctx {
            ModeCtx::Pi { live, .. } => {
                let pi = live.as_ref().expect("stepping PI state has a live solver");
                (
                    pi.solver.model().expect("SAT query has a model"),
                    &pi.memo,
                    &pi.encoder,
                )
            }
            ModeCtx::Fi { memo, .. } => {
                let fi = self.fi.as_ref().expect("FI mode keeps the global solver");
                (
                    fi.solver.model().expect("SAT query has a model"),
                    memo,
                    &fi.encoder,
                )
            }
        };
        let mut inputs = Vec::new();
        let mut tape = Vec::new();
        for (ordinal, (name, source, ty, iloc)) in state.sym.inputs().into_iter().enumerate() {
            // Inputs never mentioned in any encoded expression are
            // unconstrained; zero works for them.
            let value = match memo.get(&name) {
                Some(enc) => encoder.value_from_model(model, enc),
                None => Value::zero_of(ty),
            };
            tape.push(match value {
                Value::Int(v) => v,
                Value::Bool(b) => b as i64,
            });
            inputs.push(NondetValue {
                ordinal,
                var: source.to_string(),
                ty,
                value,
                loc: iloc,
            });
        }
        let branches = state
            .sym
            .trace
            .collect_oldest_first()
            .iter()
            .filter_map(|ev| match ev {
                PathEvent::Branch {
                    func, index, taken, loc, ..
                } => Some(BranchTaken {
                    function: func.to_string(),
                    index: *index,
                    taken: *taken,
                    loc: *loc,
                }),
                _ => None,
            })
            .collect();
        Violation {
            function: func.to_string(),
            index,
            loc,
            inputs,
            branches,
            tape,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_program;
    use crate::goto::lower::lower;
    use crate::oracle;

    fn compile(src: &str) -> GotoProgram {
        let (ast, _) = parse_program(src).unwrap();
        lower(&ast)
    }

    fn cfg(mode: Mode, strategy: Strategy) -> ExplorerConfig {
        ExplorerConfig {
            width: 8,
            mode,
            strategy,
            ..ExplorerConfig::default()
        }
    }

    const ALL: [(Mode, Strategy); 4] = [
        (Mode::FullIncremental, Strategy::Dfs),
        (Mode::FullIncremental, Strategy::Bfs),
        (Mode::PartialIncremental, Strategy::Dfs),
        (Mode::PartialIncremental, Strategy::Bfs),
    ];

    fn replay_ok(program: &GotoProgram, width: u32, v: &Violation) -> bool {
        oracle::confirms_violation(program, width, &v.tape, 100_000, &v.function, v.index)
    }

    const FIG2_SAFE: &str = "int main() {
        int x; int y;
        x = 1;
        y = -1;
        while (x < 3) {
            if (y < 0) { x = x + 1; }
        }
        assert(x == 3);
        return 0;
    }";

    #[test]
    fn loop_program_unrolls_on_the_fly_and_proves_safety() {
        // Two unrollings happen, the third loop-head check is infeasible on
        // its true side; no unwinding limit is needed. Query account:
        // 3 loop-head visits and 2 inner-if visits at 2 queries each, plus
        // the final assertion.
        for (mode, strategy) in ALL {
            let p = compile(FIG2_SAFE);
            let v = explore(&p, &cfg(mode, strategy));
            assert!(v.is_safe(), "{mode:?}/{strategy:?}");
            assert!(!v.bounded);
            assert_eq!(v.stats.solver_queries, 11, "{mode:?}/{strategy:?}");
            assert_eq!(v.stats.states_explored, 6, "{mode:?}/{strategy:?}");
            assert_eq!(v.stats.solver_instances_created, 1, "{mode:?}/{strategy:?}");
            assert_eq!(v.stats.folded_decisions, 0);
            // Exactly two iterations: head taken twice, then exited.
            assert_eq!(v.complete_paths, vec!["TTTTF".to_string()]);
        }
    }

    #[test]
    fn stuck_loop_with_unwind_limit_is_safe_but_bounded() {
        let src = FIG2_SAFE.replace("y = -1;", "y = 2;");
        let p = compile(&src);
        let mut c = cfg(Mode::FullIncremental, Strategy::Dfs);
        c.unwind = Some(10);
        let v = explore(&p, &c);
        assert!(v.is_safe());
        assert!(v.bounded);
        assert_eq!(v.stats.truncated_paths, 1);
    }

    #[test]
    fn stuck_loop_without_unwind_hits_budgets() {
        let src = FIG2_SAFE.replace("y = -1;", "y = 2;");
        let p = compile(&src);
        let mut c = cfg(Mode::FullIncremental, Strategy::Dfs);
        c.max_states = Some(50);
        let v = explore(&p, &c);
        assert!(matches!(v.outcome, Outcome::ResourceLimit(_)));
        assert!(!v.bounded);

        let mut c = cfg(Mode::PartialIncremental, Strategy::Dfs);
        c.deadline = Some(Instant::now());
        let v = explore(&p, &c);
        assert!(matches!(v.outcome, Outcome::ResourceLimit(_)));
    }

    const TWO_DIAMONDS: &str = "int main() {
        int a; int b; int x;
        a = nondet_int();
        b = nondet_int();
        x = 0;
        if (a > 0) { x = x + 1; } else { x = x + 2; }
        if (b > 0) { x = x + 4; } else { x = x + 8; }
        assert(x > 0);
        return 0;
    }";

    #[test]
    fn two_diamonds_pin_instances_queries_and_frontiers() {
        // 4 feasible paths: 2 queries at each of the 3 branch visits, one
        // assert query per path.
        for (mode, strategy) in ALL {
            let p = compile(TWO_DIAMONDS);
            let v = explore(&p, &cfg(mode, strategy));
            assert!(v.is_safe(), "{mode:?}/{strategy:?}");
            assert_eq!(v.stats.solver_queries, 10, "{mode:?}/{strategy:?}");
            assert_eq!(v.stats.states_explored, 7, "{mode:?}/{strategy:?}");
            let expected_instances = match mode {
                // One fresh instance per backtrack under DFS; one clone per
                // fork under BFS. Both land on 4 for this program.
                Mode::PartialIncremental => 4,
                Mode::FullIncremental => 1,
            };
            assert_eq!(
                v.stats.solver_instances_created, expected_instances,
                "{mode:?}/{strategy:?}"
            );
            let expected_frontier = match strategy {
                Strategy::Dfs => 2,
                Strategy::Bfs => 4,
            };
            assert_eq!(
                v.stats.max_frontier_size, expected_frontier,
                "{mode:?}/{strategy:?}"
            );
            if mode == Mode::PartialIncremental {
                let expected_live = match strategy {
                    Strategy::Dfs => 1,
                    Strategy::Bfs => 4,
                };
                assert_eq!(v.stats.max_live_solvers, expected_live, "{strategy:?}");
            }
            let mut paths = v.complete_paths.clone();
            paths.sort();
            assert_eq!(paths, vec!["FF", "FT", "TF", "TT"], "{mode:?}/{strategy:?}");
        }
    }

    #[test]
    fn first_violation_stops_without_stepping_the_diverging_sibling() {
        let p = compile(
            "int main() {
                int x;
                x = nondet_int();
                if (x > 0) { assert(false); } else { while (true) { } }
                return 0;
            }",
        );
        for (mode, strategy) in ALL {
            let v = explore(&p, &cfg(mode, strategy));
            let viol = v.violation().expect("unsafe");
            assert_eq!(v.stats.solver_queries, 3, "{mode:?}/{strategy:?}");
            assert_eq!(v.stats.states_explored, 2, "{mode:?}/{strategy:?}");
            // DFS parks only the sibling; BFS enqueues both children.
            let expected_frontier = match strategy {
                Strategy::Dfs => 1,
                Strategy::Bfs => 2,
            };
            assert_eq!(v.stats.max_frontier_size, expected_frontier, "{strategy:?}");
            // The diverging arm is all constant-folded branches — reaching it
            // would show up here.
            assert_eq!(v.stats.folded_decisions, 0, "{mode:?}/{strategy:?}");
            assert_eq!(viol.inputs.len(), 1);
            assert!(matches!(viol.inputs[0].value, Value::Int(n) if n > 0));
            assert!(replay_ok(&p, 8, viol), "{mode:?}/{strategy:?}");
        }
    }

    #[test]
    fn assert_false_is_one_query_with_an_empty_witness() {
        let p = compile("int main() { assert(false); return 0; }");
        let v = explore(&p, &cfg(Mode::FullIncremental, Strategy::Dfs));
        let viol = v.violation().expect("unsafe");
        assert_eq!(v.stats.solver_queries, 1);
        assert_eq!(v.stats.states_explored, 1);
        assert!(viol.inputs.is_empty());
        assert!(viol.tape.is_empty());
        assert_eq!(viol.function, "main");
        assert_eq!(viol.index, 0);
        assert!(replay_ok(&p, 8, viol));
    }

    #[test]
    fn witness_pins_the_single_violating_input() {
        // At width 4 the only input reaching the violation is x = 5.
        let p = compile(
            "int main() {
                int x;
                x = nondet_int();
                if (x > 0) { assert(x != 5); }
                return 0;
            }",
        );
        for (mode, strategy) in ALL {
            let mut c = cfg(mode, strategy);
            c.width = 4;
            let v = explore(&p, &c);
            let viol = v.violation().expect("unsafe");
            assert_eq!(viol.inputs.len(), 1, "{mode:?}/{strategy:?}");
            assert_eq!(viol.inputs[0].var, "x");
            assert!(matches!(viol.inputs[0].value, Value::Int(5)));
            assert_eq!(viol.tape, vec![5]);
            assert!(replay_ok(&p, 4, viol), "{mode:?}/{strategy:?}");
        }
    }

    #[test]
    fn literal_branches_fold_without_queries() {
        let p = compile(
            "int main() {
                if (1 == 1) { assert(true); } else { assert(false); }
                return 0;
            }",
        );
        let v = explore(&p, &cfg(Mode::FullIncremental, Strategy::Dfs));
        assert!(v.is_safe());
        assert_eq!(v.stats.folded_decisions, 1);
        assert_eq!(v.stats.solver_queries, 1); // only the reachable assert
        assert_eq!(v.stats.states_explored, 1);
        assert_eq!(v.complete_paths, vec!["T".to_string()]);
    }

    #[test]
    fn infeasible_assume_discards_the_path_silently() {
        let p = compile(
            "int main() {
                int x;
                x = nondet_int();
                assume(x > 0);
                assume(x < 0);
                assert(false);
                return 0;
            }",
        );
        for (mode, strategy) in ALL {
            let v = explore(&p, &cfg(mode, strategy));
            assert!(v.is_safe(), "{mode:?}/{strategy:?}");
            assert!(!v.bounded);
            assert_eq!(v.stats.solver_queries, 2);
            assert_eq!(v.stats.discarded_assumes, 1);
            assert_eq!(v.stats.paths_completed, 0);
        }
    }

    #[test]
    fn recursion_inlines_with_one_solver_instance() {
        let p = compile(
            "int fact(int n) {
                if (n <= 1) { return 1; }
                return n * fact(n - 1);
            }
            int main() {
                int r;
                r = fact(4);
                assert(r == 24);
                return 0;
            }",
        );
        for (mode, strategy) in ALL {
            let mut c = cfg(mode, strategy);
            c.width = 16;
            let v = explore(&p, &c);
            assert!(v.is_safe(), "{mode:?}/{strategy:?}");
            // 4 activations of fact, each branch single-feasible (2 queries),
            // plus the assert.
            assert_eq!(v.stats.solver_queries, 9, "{mode:?}/{strategy:?}");
            assert_eq!(v.stats.states_explored, 5);
            assert_eq!(v.stats.solver_instances_created, 1, "{mode:?}/{strategy:?}");
        }

        let bad = compile(
            "int fact(int n) {
                if (n <= 1) { return 1; }
                return n * fact(n - 1);
            }
            int main() {
                int r;
                r = fact(4);
                assert(r == 25);
                return 0;
            }",
        );
        let mut c = cfg(Mode::PartialIncremental, Strategy::Dfs);
        c.width = 16;
        let v = explore(&bad, &c);
        let viol = v.violation().expect("unsafe");
        assert!(viol.tape.is_empty());
        assert!(replay_ok(&bad, 16, viol));
    }

    #[test]
    fn runaway_recursion_truncates_at_the_depth_cap() {
        let p = compile(
            "void f() { f(); }
            int main() { f(); assert(true); return 0; }",
        );
        let mut c = cfg(Mode::FullIncremental, Strategy::Dfs);
        c.max_call_depth = 16;
        let v = explore(&p, &c);
        assert!(v.is_safe());
        assert!(v.bounded);
        assert_eq!(v.stats.truncated_paths, 1);
        assert_eq!(v.stats.solver_queries, 0);
    }

    #[test]
    fn inner_loop_counter_rearms_on_each_outer_iteration() {
        // With unwind = 2 this is only safe if the inner loop's counter is
        // re-armed when the outer loop re-enters it.
        let p = compile(
            "int main() {
                int i; int j; int s;
                i = 0; s = 0;
                while (i < 2) {
                    j = 0;
                    while (j < 2) { s = s + 1; j = j + 1; }
                    i = i + 1;
                }
                assert(s == 4);
                return 0;
            }",
        );
        let mut c = cfg(Mode::FullIncremental, Strategy::Dfs);
        c.unwind = Some(2);
        let v = explore(&p, &c);
        assert!(v.is_safe());
        assert!(!v.bounded, "inner counter must reset on re-entry");
    }

    #[test]
    fn per_activation_loop_counters_for_repeated_calls() {
        let p = compile(
            "int twice(int k) {
                int j;
                j = 0;
                while (j < k) { j = j + 1; }
                return j;
            }
            int main() {
                int a;
                a = twice(2);
                a = a + twice(2);
                assert(a == 4);
                return 0;
            }",
        );
        let mut c = cfg(Mode::PartialIncremental, Strategy::Dfs);
        c.unwind = Some(2);
        let v = explore(&p, &c);
        assert!(v.is_safe());
        assert!(!v.bounded, "each call activation gets its own counters");
    }

    #[test]
    fn globals_are_shared_across_calls() {
        let p = compile(
            "int g;
            void inc() { g = g + 1; }
            int main() {
                int x;
                x = nondet_int();
                if (x > 0) { inc(); }
                assert(g <= 1);
                return 0;
            }",
        );
        for (mode, strategy) in ALL {
            let v = explore(&p, &cfg(mode, strategy));
            assert!(v.is_safe(), "{mode:?}/{strategy:?}");
        }
    }

    #[test]
    fn keep_exploring_after_a_violation_when_configured() {
        let p = compile(
            "int main() {
                int x;
                x = nondet_int();
                if (x > 0) { assert(false); } else { assert(false); }
                return 0;
            }",
        );
        let stop = explore(&p, &cfg(Mode::FullIncremental, Strategy::Dfs));
        assert_eq!(stop.stats.solver_queries, 3);
        let first_loc = stop.violation().unwrap().index;

        let mut c = cfg(Mode::FullIncremental, Strategy::Dfs);
        c.stop_at_first_violation = false;
        let all = explore(&p, &c);
        assert_eq!(all.stats.solver_queries, 4);
        assert_eq!(all.violation().unwrap().index, first_loc);
    }

    #[test]
    fn truncation_on_another_path_does_not_mark_an_unsafe_verdict_bounded() {
        let p = compile(
            "int main() {
                int x;
                x = nondet_int();
                if (x > 0) {
                    int i;
                    i = 0;
                    while (i < 5) { i = i + 1; }
                } else {
                    assert(false);
                }
                return 0;
            }",
        );
        let mut c = cfg(Mode::FullIncremental, Strategy::Dfs);
        c.unwind = Some(2);
        let v = explore(&p, &c);
        assert!(v.violation().is_some());
        assert!(!v.bounded);
        assert_eq!(v.stats.truncated_paths, 1);
    }

    #[test]
    fn boolean_nondet_branches_and_witnesses() {
        let p = compile(
            "int main() {
                bool p;
                p = nondet_bool();
                if (p) { assert(false); }
                return 0;
            }",
        );
        for (mode, strategy) in ALL {
            let v = explore(&p, &cfg(mode, strategy));
            let viol = v.violation().expect("unsafe");
            assert!(matches!(viol.inputs[0].value, Value::Bool(true)));
            assert_eq!(viol.tape, vec![1]);
            assert!(replay_ok(&p, 8, viol), "{mode:?}/{strategy:?}");
        }
    }

    #[test]
    fn strict_assumption_mode_matches_default_fi() {
        for src in [FIG2_SAFE, TWO_DIAMONDS] {
            let p = compile(src);
            for strategy in [Strategy::Dfs, Strategy::Bfs] {
                let plain = explore(&p, &cfg(Mode::FullIncremental, strategy));
                let mut c = cfg(Mode::FullIncremental, strategy);
                c.fi_strict_assumptions = true;
                let strict = explore(&p, &c);
                assert_eq!(plain.is_safe(), strict.is_safe());
                assert_eq!(plain.stats.solver_queries, strict.stats.solver_queries);
                assert_eq!(plain.complete_paths, strict.complete_paths);
            }
        }
    }

    #[test]
    fn straight_line_program_needs_one_instance_and_no_branch_queries() {
        let p = compile("int main() { int x; x = 1; assert(x == 1); return 0; }");
        for (mode, strategy) in ALL {
            let v = explore(&p, &cfg(mode, strategy));
            assert!(v.is_safe());
            assert_eq!(v.stats.solver_queries, 1);
            assert_eq!(v.stats.solver_instances_created, 1);
            assert_eq!(v.stats.max_frontier_size, 0);
        }
    }
}
