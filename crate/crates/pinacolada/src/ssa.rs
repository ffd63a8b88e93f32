//! Per-path single-assignment bookkeeping for symbolic execution.
//!
//! Each explored path renames every program variable to `base#frame.version`
//! on the fly: assignments mint a fresh version, reads resolve to the current
//! one, and each function activation gets its own frame ordinal so recursion
//! never aliases. Version 0 is the never-assigned initial value (reads as
//! zero); a version minted by a `NONDET` instruction has no defining
//! expression and becomes a free symbolic input downstream.
//!
//! States are forked at branches, so the history-shaped data (definitions,
//! the path trace) lives in persistent cons lists that clone in O(1) and
//! share structure between siblings.

use crate::frontend::Loc;
use crate::goto::{Expr, GotoFunction, Name, Ty, VarRef};
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

/// Immutable singly-linked list with O(1) clone-and-extend.
pub struct PList<T>(Option<Arc<PNode<T>>>);

struct PNode<T> {
    item: T,
    next: PList<T>,
}

impl<T> Clone for PList<T> {
    fn clone(&self) -> Self {
        PList(self.0.clone())
    }
}

impl<T> Default for PList<T> {
    fn default() -> Self {
        PList(None)
    }
}

impl<T> PList<T> {
    pub fn new() -> Self {
        PList(None)
    }

    /// A new list with `item` in front; `self` is untouched (shared tail).
    #[must_use]
    pub fn push(&self, item: T) -> Self {
        PList(Some(Arc::new(PNode {
            item,
            next: self.clone(),
        })))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_none()
    }

    /// Newest-first traversal.
    pub fn iter(&self) -> PListIter<'_, T> {
        PListIter(self.0.as_deref())
    }

    /// Chronological (oldest-first) order, the order things were pushed.
    pub fn collect_oldest_first(&self) -> Vec<&T> {
        let mut v: Vec<&T> = self.iter().collect();
        v.reverse();
        v
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }
}

pub struct PListIter<'a, T>(Option<&'a PNode<T>>);

impl<'a, T> Iterator for PListIter<'a, T> {
    type Item = &'a T;
    fn next(&mut self) -> Option<&'a T> {
        let node = self.0?;
        self.0 = node.next.0.as_deref();
        Some(&node.item)
    }
}

impl<T: fmt::Debug> fmt::Debug for PList<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

/// Frame ordinal reserved for globals.
pub const GLOBAL_FRAME: u32 = 0;

/// SSA-renamed variable: `base#frame.version`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SsaName {
    pub base: Name,
    pub frame: u32,
    pub version: u32,
}

impl SsaName {
    /// The initial, never-assigned incarnation (reads as zero/false).
    pub fn is_initial(&self) -> bool {
        self.version == 0
    }
}

impl fmt::Debug for SsaName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SsaName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}.{}", self.base, self.frame, self.version)
    }
}

/// One definition `name := expr`, in path order.
#[derive(Clone, Debug)]
pub struct Def {
    pub name: SsaName,
    pub ty: Ty,
    pub expr: Expr<SsaName>,
    pub loc: Loc,
}

/// What happened along a path, for witnesses and logs. `index` is the
/// instruction index within `func`.
#[derive(Clone, Debug)]
pub enum PathEvent {
    Branch {
        func: Name,
        index: usize,
        taken: bool,
        cond: Expr<SsaName>,
        loc: Loc,
    },
    Assume {
        func: Name,
        index: usize,
        cond: Expr<SsaName>,
        loc: Loc,
    },
    Assert {
        func: Name,
        index: usize,
        cond: Expr<SsaName>,
        loc: Loc,
    },
    Nondet {
        func: Name,
        index: usize,
        name: SsaName,
        source: Name,
        ty: Ty,
        loc: Loc,
    },
    Call {
        func: Name,
        index: usize,
        callee: Name,
        loc: Loc,
    },
    Return {
        func: Name,
        index: usize,
        loc: Loc,
    },
}

#[derive(Clone, Debug)]
pub struct Frame {
    pub func: Name,
    pub ordinal: u32,
    pub pc: usize,
    /// Caller-side variable receiving the return value, if any.
    pub dest: Option<VarRef>,
}

/// Outcome of a control transfer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepMove {
    Ok,
    /// A back edge exceeded the unwinding limit; the path is truncated.
    LoopLimit,
}

/// The symbolic state of one path: call stack, current SSA versions,
/// accumulated definitions and trace. Cloning forks the path.
#[derive(Clone, Debug)]
pub struct SymbolicState {
    frames: Vec<Frame>,
    versions: HashMap<(Name, u32), u32>,
    pub defs: PList<Def>,
    pub trace: PList<PathEvent>,
    loop_counts: HashMap<(u32, usize), u32>,
    next_frame_ordinal: u32,
}

impl SymbolicState {
    pub fn start(main: &GotoFunction) -> SymbolicState {
        SymbolicState {
            frames: vec![Frame {
                func: main.name.clone(),
                ordinal: 1,
                pc: 0,
                dest: None,
            }],
            versions: HashMap::new(),
            defs: PList::new(),
            trace: PList::new(),
            loop_counts: HashMap::new(),
            next_frame_ordinal: 2,
        }
    }

    pub fn frame(&self) -> &Frame {
        self.frames.last().expect("live state has a frame")
    }

    pub fn pc(&self) -> usize {
        self.frame().pc
    }

    pub fn func_name(&self) -> &Name {
        &self.frame().func
    }

    pub fn depth(&self) -> usize {
        self.frames.len()
    }

    fn frame_of(&self, var: &VarRef) -> u32 {
        if var.global {
            GLOBAL_FRAME
        } else {
            self.frame().ordinal
        }
    }

    /// The SSA name a read of `var` resolves to right now.
    pub fn current_name(&self, var: &VarRef) -> SsaName {
        let frame = self.frame_of(var);
        let version = self
            .versions
            .get(&(var.name.clone(), frame))
            .copied()
            .unwrap_or(0);
        SsaName {
            base: var.name.clone(),
            frame,
            version,
        }
    }

    pub fn rewrite(&self, expr: &Expr<VarRef>) -> Expr<SsaName> {
        expr.map_vars(&mut |v| self.current_name(v))
    }

    fn fresh_name(&mut self, var: &VarRef) -> SsaName {
        let frame = self.frame_of(var);
        let v = self.versions.entry((var.name.clone(), frame)).or_insert(0);
        *v += 1;
        SsaName {
            base: var.name.clone(),
            frame,
            version: *v,
        }
    }

    /// `var := rhs` where `rhs` is already rewritten. Returns the minted name.
    pub fn assign(&mut self, var: &VarRef, rhs: Expr<SsaName>, loc: Loc) -> SsaName {
        let name = self.fresh_name(var);
        self.defs = self.defs.push(Def {
            name: name.clone(),
            ty: var.ty,
            expr: rhs,
            loc,
        });
        name
    }

    /// `var := *`: mint a version with no definition — a free symbolic input.
    pub fn nondet(&mut self, var: &VarRef, index: usize, loc: Loc) -> SsaName {
        let name = self.fresh_name(var);
        self.trace = self.trace.push(PathEvent::Nondet {
            func: self.func_name().clone(),
            index,
            name: name.clone(),
            source: var.name.clone(),
            ty: var.ty,
            loc,
        });
        name
    }

    pub fn record(&mut self, event: PathEvent) {
        self.trace = self.trace.push(event);
    }

    /// Transfer control within the active frame. Every pc change goes
    /// through here: reaching a loop head forwards (re-)arms its counter,
    /// a back edge to it counts one more unwinding against `unwind`.
    pub fn move_to(
        &mut self,
        loop_heads: &BTreeSet<usize>,
        target: usize,
        unwind: Option<u32>,
    ) -> StepMove {
        let frame = self.frames.last_mut().expect("live state has a frame");
        if loop_heads.contains(&target) {
            let key = (frame.ordinal, target);
            if target <= frame.pc {
                let count = self.loop_counts.entry(key).or_insert(0);
                *count += 1;
                if let Some(limit) = unwind {
                    if *count > limit {
                        return StepMove::LoopLimit;
                    }
                }
            } else {
                self.loop_counts.insert(key, 0);
            }
        }
        frame.pc = target;
        StepMove::Ok
    }

    /// Push an activation of `callee`, binding parameters to the (already
    /// rewritten) argument expressions.
    pub fn enter_call(
        &mut self,
        callee: &GotoFunction,
        args: Vec<Expr<SsaName>>,
        dest: Option<VarRef>,
        index: usize,
        loc: Loc,
    ) {
        debug_assert_eq!(callee.params.len(), args.len());
        self.trace = self.trace.push(PathEvent::Call {
            func: self.func_name().clone(),
            index,
            callee: callee.name.clone(),
            loc,
        });
        let ordinal = self.next_frame_ordinal;
        self.next_frame_ordinal += 1;
        self.frames.push(Frame {
            func: callee.name.clone(),
            ordinal,
            pc: 0,
            dest,
        });
        for (param, arg) in callee.params.iter().zip(args) {
            self.assign(param, arg, loc);
        }
    }

    /// Pop the active frame, assigning the (already rewritten) return value
    /// to the caller's destination. Returns `true` when the last frame
    /// returned (the path is complete).
    pub fn exit_call(&mut self, ret: Option<Expr<SsaName>>, index: usize, loc: Loc) -> bool {
        self.trace = self.trace.push(PathEvent::Return {
            func: self.func_name().clone(),
            index,
            loc,
        });
        let frame = self.frames.pop().expect("live state has a frame");
        if self.frames.is_empty() {
            return true;
        }
        if let Some(dest) = frame.dest {
            let rhs = ret.expect("checked: value call returns a value");
            self.assign(&dest, rhs, loc);
        }
        false
    }

    /// Nondet inputs recorded so far, oldest first.
    pub fn inputs(&self) -> Vec<(SsaName, Name, Ty, Loc)> {
        let mut out = Vec::new();
        for ev in self.trace.collect_oldest_first() {
            if let PathEvent::Nondet {
                name, source, ty, loc, ..
            } = ev
            {
                out.push((name.clone(), source.clone(), *ty, *loc));
            }
        }
        out
    }
}
