//! Brute-force concrete oracle.
//!
//! Runs the lowered program directly over a finite tape of input values and,
//! for whole-program verdicts, exhaustively enumerates every tape in a
//! `(2^width)^inputs` grid. Slow by design — it is the independent ground
//! truth the symbolic engine is differentially tested against, sharing only
//! the instruction set and the value semantics with it.
//!
//! Grid order is lexicographic over the raw (unsigned) bit patterns of the
//! tape, first input most significant, and the reported counterexample is
//! always the lexicographically first violating tape — regardless of whether
//! the grid was scanned serially or in parallel.

use crate::frontend::Loc;
use crate::goto::{GotoProgram, Instruction, Name, Ty, VarRef};
use crate::semantics::{eval_expr, truncate, Value};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("input grid would have {0} tapes, more than the limit {1}")]
    GridTooLarge(u128, u128),
}

/// Outcome of one concrete run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConcreteOutcome {
    /// Ran to completion (or into a false `assume`) without violations.
    Safe,
    /// An `assert` failed here.
    Violation { func: Name, index: usize, loc: Loc },
    /// Ran out of the step budget.
    StepLimit,
    /// The tape was too short for this run.
    InputsExhausted,
}

/// Run the program on a fixed input tape. Each `NONDET` consumes the next
/// tape entry: ints are truncated to the width, bools take bit 0.
pub fn run_concrete(
    program: &GotoProgram,
    width: u32,
    tape: &[i64],
    step_limit: u64,
) -> ConcreteOutcome {
    let mut globals: HashMap<Name, Value> = HashMap::new();
    let mut stack = vec![Frame::enter(program.main(), None)];
    let mut next_input = 0usize;
    let mut steps = 0u64;

    loop {
        if steps >= step_limit {
            return ConcreteOutcome::StepLimit;
        }
        steps += 1;

        let frame = stack.last_mut().expect("running program has a frame");
        let func = program.function(&frame.func);
        let ins = &func.body[frame.pc];
        match ins {
            Instruction::Assign { var, expr, .. } => {
                let v = eval(width, &globals, &frame.locals, expr);
                write_var(&mut globals, frame, var, v);
                frame.pc += 1;
            }
            Instruction::Nondet { var, ty, .. } => {
                let Some(&raw) = tape.get(next_input) else {
                    return ConcreteOutcome::InputsExhausted;
                };
                next_input += 1;
                let v = match ty {
                    Ty::Int => Value::Int(truncate(width, raw as i128)),
                    Ty::Bool => Value::Bool(raw & 1 == 1),
                };
                write_var(&mut globals, frame, var, v);
                frame.pc += 1;
            }
            Instruction::Branch {
                cond,
                target_true,
                target_false,
                ..
            } => {
                let taken = eval(width, &globals, &frame.locals, cond).as_bool();
                frame.pc = if taken { *target_true } else { *target_false };
            }
            Instruction::Goto { target, .. } => frame.pc = *target,
            Instruction::Assert { cond, loc } => {
                if !eval(width, &globals, &frame.locals, cond).as_bool() {
                    return ConcreteOutcome::Violation {
                        func: frame.func.clone(),
                        index: frame.pc,
                        loc: *loc,
                    };
                }
                frame.pc += 1;
            }
            Instruction::Assume { cond, .. } => {
                if !eval(width, &globals, &frame.locals, cond).as_bool() {
                    // The run is excluded from the search space.
                    return ConcreteOutcome::Safe;
                }
                frame.pc += 1;
            }
            Instruction::Call {
                dest, callee, args, ..
            } => {
                let callee_fn = program.function(callee);
                let argv: Vec<Value> = args
                    .iter()
                    .map(|a| eval(width, &globals, &frame.locals, a))
                    .collect();
                frame.pc += 1;
                let mut inner = Frame::enter(callee_fn, dest.clone());
                for (p, v) in callee_fn.params.iter().zip(argv) {
                    inner.locals.insert(p.name.clone(), v);
                }
                stack.push(inner);
            }
            Instruction::Return { expr, .. } => {
                let v = expr.as_ref().map(|e| eval(width, &globals, &frame.locals, e));
                let done = stack.pop().expect("running program has a frame");
                let Some(caller) = stack.last_mut() else {
                    return ConcreteOutcome::Safe;
                };
                if let Some(dest) = done.dest {
                    let v = v.expect("checked: value call returns a value");
                    write_var(&mut globals, caller, &dest, v);
                }
            }
            Instruction::Halt { .. } => return ConcreteOutcome::Safe,
        }
    }
}

struct Frame {
    func: Name,
    pc: usize,
    locals: HashMap<Name, Value>,
    dest: Option<VarRef>,
}

impl Frame {
    fn enter(func: &crate::goto::GotoFunction, dest: Option<VarRef>) -> Frame {
        Frame {
            func: func.name.clone(),
            pc: 0,
            locals: HashMap::new(),
            dest,
        }
    }
}

fn eval(
    width: u32,
    globals: &HashMap<Name, Value>,
    locals: &HashMap<Name, Value>,
    expr: &crate::goto::Expr<VarRef>,
) -> Value {
    eval_expr(width, expr, &mut |var: &VarRef, ty: Ty| {
        let map = if var.global { globals } else { locals };
        map.get(&var.name).copied().unwrap_or(Value::zero_of(ty))
    })
}

fn write_var(globals: &mut HashMap<Name, Value>, frame: &mut Frame, var: &VarRef, v: Value) {
    if var.global {
        globals.insert(var.name.clone(), v);
    } else {
        frame.locals.insert(var.name.clone(), v);
    }
}

/// Number of `NONDET` instructions in the program: the default tape length.
/// An over-approximation for straight-line input usage; programs drawing
/// inputs inside loops need an explicit larger tape.
pub fn static_input_count(program: &GotoProgram) -> usize {
    program
        .functions
        .values()
        .flat_map(|f| &f.body)
        .filter(|i| matches!(i, Instruction::Nondet { .. }))
        .count()
}

/// Exhaustive verdict over the input grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum OracleReport {
    /// Every tape ran to a safe end.
    Safe { grid: u64 },
    /// No violation, but some runs hit the step budget or exhausted their
    /// tape, so safety is only established up to those bounds.
    Inconclusive {
        grid: u64,
        step_limited: u64,
        inputs_exhausted: u64,
    },
    /// Lexicographically first violating tape.
    Unsafe {
        grid: u64,
        inputs: Vec<i64>,
        function: String,
        index: usize,
        line: u32,
    },
}

#[derive(Clone, Copy)]
struct GridShape {
    width: u32,
    inputs: usize,
    total: u128,
}

fn shape(width: u32, inputs: usize, grid_limit: u128) -> Result<GridShape, OracleError> {
    let base = 1u128 << width;
    let mut total: u128 = 1;
    for _ in 0..inputs {
        total = total
            .checked_mul(base)
            .ok_or(OracleError::GridTooLarge(u128::MAX, grid_limit))?;
        if total > grid_limit {
            return Err(OracleError::GridTooLarge(total, grid_limit));
        }
    }
    Ok(GridShape {
        width,
        inputs,
        total,
    })
}

fn tape_at(shape: GridShape, index: u128) -> Vec<i64> {
    let base = 1u128 << shape.width;
    let mut tape = vec![0i64; shape.inputs];
    let mut rest = index;
    for slot in (0..shape.inputs).rev() {
        tape[slot] = truncate(shape.width, (rest % base) as i128);
        rest /= base;
    }
    tape
}

struct ChunkScan {
    violation: Option<(u128, ConcreteOutcome, Vec<i64>)>,
    step_limited: u64,
    inputs_exhausted: u64,
}

fn scan_range(
    program: &GotoProgram,
    shape: GridShape,
    range: std::ops::Range<u128>,
    step_limit: u64,
) -> ChunkScan {
    let mut out = ChunkScan {
        violation: None,
        step_limited: 0,
        inputs_exhausted: 0,
    };
    for idx in range {
        let tape = tape_at(shape, idx);
        match run_concrete(program, shape.width, &tape, step_limit) {
            ConcreteOutcome::Safe => {}
            ConcreteOutcome::StepLimit => out.step_limited += 1,
            ConcreteOutcome::InputsExhausted => out.inputs_exhausted += 1,
            v @ ConcreteOutcome::Violation { .. } => {
                // Later tapes in this range are lexicographically larger.
                out.violation = Some((idx, v, tape));
                break;
            }
        }
    }
    out
}

fn report_from(shape: GridShape, scans: Vec<ChunkScan>) -> OracleReport {
    let grid = shape.total as u64;
    let best = scans
        .iter()
        .filter_map(|s| s.violation.as_ref())
        .min_by_key(|(idx, _, _)| *idx);
    if let Some((_, ConcreteOutcome::Violation { func, index, loc }, tape)) = best {
        return OracleReport::Unsafe {
            grid,
            inputs: tape.clone(),
            function: func.to_string(),
            index: *index,
            line: loc.line,
        };
    }
    let step_limited: u64 = scans.iter().map(|s| s.step_limited).sum();
    let inputs_exhausted: u64 = scans.iter().map(|s| s.inputs_exhausted).sum();
    if step_limited + inputs_exhausted > 0 {
        OracleReport::Inconclusive {
            grid,
            step_limited,
            inputs_exhausted,
        }
    } else {
        OracleReport::Safe { grid }
    }
}

/// Single-threaded exhaustive scan; stops at the first violation (which is
/// the lexicographic minimum by construction).
pub fn enumerate_serial(
    program: &GotoProgram,
    width: u32,
    inputs: usize,
    step_limit: u64,
    grid_limit: u128,
) -> Result<OracleReport, OracleError> {
    let shape = shape(width, inputs, grid_limit)?;
    let scan = scan_range(program, shape, 0..shape.total, step_limit);
    Ok(report_from(shape, vec![scan]))
}

/// Parallel exhaustive scan over fixed chunks. A found violation lets later
/// chunks be skipped; the merge still picks the lexicographically first one,
/// so the report equals the serial one.
#[cfg(feature = "parallel")]
pub fn enumerate_parallel(
    program: &GotoProgram,
    width: u32,
    inputs: usize,
    step_limit: u64,
    grid_limit: u128,
) -> Result<OracleReport, OracleError> {
    use rayon::prelude::*;
    use std::sync::atomic::{AtomicU64, Ordering};

    const CHUNK: u128 = 1 << 12;
    let shape = shape(width, inputs, grid_limit)?;
    let n_chunks = shape.total.div_ceil(CHUNK) as u64;
    let best_so_far = AtomicU64::new(u64::MAX);

    let scans: Vec<ChunkScan> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            if ci >= best_so_far.load(Ordering::Relaxed) {
                // A lexicographically earlier chunk already violated.
                return ChunkScan {
                    violation: None,
                    step_limited: 0,
                    inputs_exhausted: 0,
                };
            }
            let start = ci as u128 * CHUNK;
            let end = (start + CHUNK).min(shape.total);
            let scan = scan_range(program, shape, start..end, step_limit);
            if scan.violation.is_some() {
                best_so_far.fetch_min(ci, Ordering::Relaxed);
            }
            scan
        })
        .collect();

    Ok(report_from(shape, scans))
}

/// Exhaustive scan using the parallel implementation when built with the
/// `parallel` feature (the default), the serial one otherwise.
pub fn enumerate(
    program: &GotoProgram,
    width: u32,
    inputs: usize,
    step_limit: u64,
    grid_limit: u128,
) -> Result<OracleReport, OracleError> {
    #[cfg(feature = "parallel")]
    {
        enumerate_parallel(program, width, inputs, step_limit, grid_limit)
    }
    #[cfg(not(feature = "parallel"))]
    {
        enumerate_serial(program, width, inputs, step_limit, grid_limit)
    }
}

/// Does this tape really fail that assertion? Used to validate every
/// counterexample before it is reported.
pub fn confirms_violation(
    program: &GotoProgram,
    width: u32,
    tape: &[i64],
    step_limit: u64,
    function: &str,
    index: usize,
) -> bool {
    matches!(
        run_concrete(program, width, tape, step_limit),
        ConcreteOutcome::Violation { func, index: at, .. }
            if func.as_ref() == function && at == index
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_program;
    use crate::goto::lower::lower;

    fn compile(src: &str) -> GotoProgram {
        let (ast, _) = parse_program(src).unwrap();
        lower(&ast)
    }

    const LIMIT: u64 = 100_000;
    const GRID: u128 = 1 << 24;

    #[test]
    fn trivially_safe_and_unsafe() {
        let safe = compile("int main(){assert(1 + 1 == 2); return 0;}");
        assert_eq!(run_concrete(&safe, 8, &[], LIMIT), ConcreteOutcome::Safe);
        let unsafe_p = compile("int main(){assert(false); return 0;}");
        assert!(matches!(
            run_concrete(&unsafe_p, 8, &[], LIMIT),
            ConcreteOutcome::Violation { index: 0, .. }
        ));
    }

    #[test]
    fn assume_false_discards_the_run() {
        let p = compile("int main(){int x; x = 1; assume(x == 2); assert(false); return 0;}");
        assert_eq!(run_concrete(&p, 8, &[], LIMIT), ConcreteOutcome::Safe);
    }

    #[test]
    fn tape_feeds_nondets_in_order() {
        let p = compile(
            "int main(){int x; int y; x = nondet_int(); y = nondet_int(); assert(x <= y); return 0;}",
        );
        assert_eq!(run_concrete(&p, 8, &[3, 5], LIMIT), ConcreteOutcome::Safe);
        assert!(matches!(
            run_concrete(&p, 8, &[5, 3], LIMIT),
            ConcreteOutcome::Violation { .. }
        ));
        assert_eq!(
            run_concrete(&p, 8, &[5], LIMIT),
            ConcreteOutcome::InputsExhausted
        );
    }

    #[test]
    fn ints_truncate_and_bools_take_bit_zero() {
        let p = compile("int main(){int x; x = nondet_int(); assert(x == -8); return 0;}");
        // Pattern 8 at width 4 is -8.
        assert_eq!(run_concrete(&p, 4, &[8], LIMIT), ConcreteOutcome::Safe);
        let b = compile("int main(){bool p; p = nondet_bool(); assert(p); return 0;}");
        assert_eq!(run_concrete(&b, 4, &[3], LIMIT), ConcreteOutcome::Safe);
        assert!(matches!(
            run_concrete(&b, 4, &[2], LIMIT),
            ConcreteOutcome::Violation { .. }
        ));
    }

    #[test]
    fn loops_terminate_or_hit_step_limit() {
        let p = compile(
            "int main(){int i; int s; i = 0; s = 0; while (i < 10){ s = s + i; i = i + 1; } assert(s == 45); return 0;}",
        );
        assert_eq!(run_concrete(&p, 16, &[], LIMIT), ConcreteOutcome::Safe);
        let spin = compile("int main(){while(true){}assert(false);return 0;}");
        assert_eq!(run_concrete(&spin, 8, &[], 500), ConcreteOutcome::StepLimit);
    }

    #[test]
    fn calls_recurse_and_write_globals() {
        let p = compile(
            "int g;
             int fact(int n){ if (n <= 1) { return 1; } return n * fact(n - 1); }
             void bump(){ g = g + 1; }
             int main(){ bump(); bump(); assert(g == 2); assert(fact(5) == 120); return 0; }",
        );
        assert_eq!(run_concrete(&p, 16, &[], LIMIT), ConcreteOutcome::Safe);
    }

    #[test]
    fn division_and_shift_totality() {
        let p = compile(
            "int main(){int x; x = nondet_int(); assert(x / 0 == 0); assert(x % 0 == 0); return 0;}",
        );
        for raw in 0..16 {
            assert_eq!(run_concrete(&p, 4, &[raw], LIMIT), ConcreteOutcome::Safe);
        }
    }

    #[test]
    fn enumerate_finds_lex_first_violation() {
        let p = compile("int main(){int x; x = nondet_int(); assert(x != -4); return 0;}");
        // Patterns 0..11 are fine; pattern 12 is -4 at width 4.
        let r = enumerate_serial(&p, 4, 1, LIMIT, GRID).unwrap();
        let OracleReport::Unsafe { grid, inputs, index, .. } = r else {
            panic!("expected unsafe: {r:?}");
        };
        assert_eq!(grid, 16);
        assert_eq!(inputs, vec![-4]);
        assert_eq!(index, 1);
    }

    #[test]
    fn enumerate_orders_tapes_first_input_major() {
        let p = compile(
            "int main(){int x; int y; x = nondet_int(); y = nondet_int(); assert(x != 1 || y != 2); return 0;}",
        );
        let r = enumerate_serial(&p, 4, 2, LIMIT, GRID).unwrap();
        let OracleReport::Unsafe { inputs, .. } = r else {
            panic!("expected unsafe");
        };
        assert_eq!(inputs, vec![1, 2]);
    }

    #[test]
    fn enumerate_safe_and_inconclusive() {
        let p = compile("int main(){int x; x = nondet_int(); assert(x == x); return 0;}");
        assert_eq!(
            enumerate_serial(&p, 4, 1, LIMIT, GRID).unwrap(),
            OracleReport::Safe { grid: 16 }
        );
        let spin = compile(
            "int main(){int x; x = nondet_int(); while (x == 3) {} assert(true); return 0;}",
        );
        let r = enumerate_serial(&spin, 4, 1, 200, GRID).unwrap();
        assert_eq!(
            r,
            OracleReport::Inconclusive {
                grid: 16,
                step_limited: 1,
                inputs_exhausted: 0
            }
        );
    }

    #[test]
    fn grid_limit_is_enforced() {
        let p = compile("int main(){int x; x = nondet_int(); return x;}");
        assert!(matches!(
            enumerate_serial(&p, 32, 3, LIMIT, 1 << 20),
            Err(OracleError::GridTooLarge(..))
        ));
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_equals_serial() {
        let programs = [
            "int main(){int x; x = nondet_int(); assert(x != -4); return 0;}",
            "int main(){int x; int y; x = nondet_int(); y = nondet_int(); assert(x * y != 6); return 0;}",
            "int main(){int x; x = nondet_int(); assert(x == x); return 0;}",
        ];
        for src in programs {
            let p = compile(src);
            let serial = enumerate_serial(&p, 4, 2, LIMIT, GRID).unwrap();
            let parallel = enumerate_parallel(&p, 4, 2, LIMIT, GRID).unwrap();
            assert_eq!(serial, parallel, "{src}");
        }
    }

    #[test]
    fn static_count_sees_all_nondets() {
        let p = compile(
            "int pick(){ return nondet_int(); } int main(){int x; x = nondet_int(); x = x + pick(); return x;}",
        );
        assert_eq!(static_input_count(&p), 2);
    }

    #[test]
    fn confirms_violation_checks_location() {
        let p = compile("int main(){int x; x = nondet_int(); assert(x != 3); return 0;}");
        assert!(confirms_violation(&p, 8, &[3], LIMIT, "main", 1));
        assert!(!confirms_violation(&p, 8, &[4], LIMIT, "main", 1));
        assert!(!confirms_violation(&p, 8, &[3], LIMIT, "main", 0));
    }

    #[test]
    fn report_serializes_with_verdict_tag() {
        let r = OracleReport::Safe { grid: 16 };
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"verdict\":\"safe\""));
        let u = OracleReport::Unsafe {
            grid: 16,
            inputs: vec![-4],
            function: "main".into(),
            index: 1,
            line: 1,
        };
        let json = serde_json::to_string(&u).unwrap();
        assert!(json.contains("\"verdict\":\"unsafe\""));
        assert_eq!(serde_json::from_str::<OracleReport>(&json).unwrap(), u);
    }
}
