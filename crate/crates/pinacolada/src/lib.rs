//! A bounded verifier for MiniC, a small imperative language with `int`,
//! `bool`, loops, functions and nondeterministic inputs.
//!
//! The pipeline parses a source file, lowers it to a flat branch-explicit
//! instruction list, then symbolically executes one path at a time. Every
//! branch is checked for feasibility with a SAT query before it is explored,
//! so infeasible subtrees are pruned eagerly. Path constraints are
//! bit-blasted to CNF and discharged by the bundled incremental CDCL solver,
//! either one solver per path (partial-incremental) or one solver for the
//! whole search guarded by activation literals (full-incremental).
//!
//! A brute-force concrete interpreter over the same instruction list serves
//! as an independent ground truth for differential testing and for replaying
//! counterexample witnesses.

pub mod bitblast;
pub mod explorer;
pub mod frontend;
pub mod goto;
pub mod oracle;
pub mod semantics;
pub mod solver;
pub mod ssa;
pub mod witness;
