//! Advisory unreachable-code detection on the lowered IR.
//!
//! Per-function BFS from index 0. Branches on literal conditions follow only
//! the taken side, so code after `while(true){}` is reported even though the
//! loop itself is well-formed. Purely advisory: unreachable instructions stay
//! in the body.

use crate::frontend::Warning;
use crate::goto::{GotoFunction, GotoProgram, Instruction};
use crate::semantics::const_eval;
use std::collections::VecDeque;

/// Report instructions no execution can reach, one warning each.
pub fn reachable_check(program: &GotoProgram, width: u32) -> Vec<Warning> {
    let mut warnings = Vec::new();
    for f in program.functions.values() {
        check_function(f, width, &mut warnings);
    }
    warnings
}

fn check_function(f: &GotoFunction, width: u32, warnings: &mut Vec<Warning>) {
    if f.body.is_empty() {
        return;
    }
    let mut seen = vec![false; f.body.len()];
    let mut queue = VecDeque::new();
    seen[0] = true;
    queue.push_back(0usize);
    while let Some(i) = queue.pop_front() {
        for succ in successors(&f.body[i], i, width) {
            if succ < seen.len() && !seen[succ] {
                seen[succ] = true;
                queue.push_back(succ);
            }
        }
    }
    for (i, reached) in seen.iter().enumerate() {
        if !reached {
            warnings.push(Warning {
                loc: f.body[i].loc(),
                message: format!("unreachable code in `{}` ({})", f.name, f.body[i]),
            });
        }
    }
}

fn successors(ins: &Instruction, i: usize, width: u32) -> Vec<usize> {
    match ins {
        Instruction::Branch {
            cond,
            target_true,
            target_false,
            ..
        } => match const_eval(width, cond) {
            Some(v) if v.as_bool() => vec![*target_true],
            Some(_) => vec![*target_false],
            None => vec![*target_true, *target_false],
        },
        Instruction::Goto { target, .. } => vec![*target],
        Instruction::Return { .. } | Instruction::Halt { .. } => vec![],
        // Assume carries on: even `assume(false)` only prunes paths, and the
        // warning is about structural reachability.
        _ => vec![i + 1],
    }
}
