//! Helpers shared by the integration suites.
//!
//! Kept deliberately independent of the engine internals: programs are built
//! from source text, expectations come from file names or brute-force
//! enumeration, and the SAT reference is a truth table.

#![allow(dead_code)]

use pinacolada::frontend::parse_program;
use pinacolada::goto::lower::lower;
use pinacolada::goto::GotoProgram;
use pinacolada::solver::{Lit, Var};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::fs;
use std::path::PathBuf;

pub fn compile(source: &str) -> GotoProgram {
    let (ast, _warnings) = parse_program(source).expect("test program must parse");
    lower(&ast)
}

// --- corpus -----------------------------------------------------------

pub struct CorpusProgram {
    pub name: String,
    pub path: PathBuf,
    pub source: String,
    pub expect_safe: bool,
}

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

/// All corpus programs, sorted by name. The `safe_`/`unsafe_` prefix states
/// the ground truth at width 4; the oracle re-derives it in the tests.
pub fn corpus() -> Vec<CorpusProgram> {
    let mut programs = Vec::new();
    for entry in fs::read_dir(corpus_dir()).expect("corpus directory") {
        let path = entry.expect("corpus entry").path();
        if path.extension().and_then(|e| e.to_str()) != Some("mc") {
            continue;
        }
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        let expect_safe = match name.split('_').next() {
            Some("safe") => true,
            Some("unsafe") => false,
            other => panic!("corpus file {name}: unexpected prefix {other:?}"),
        };
        let source = fs::read_to_string(&path).expect("corpus file readable");
        programs.push(CorpusProgram { name, path, source, expect_safe });
    }
    programs.sort_by(|a, b| a.name.cmp(&b.name));
    assert!(programs.len() >= 60, "corpus holds {} programs", programs.len());
    programs
}

// --- truth-table SAT reference ----------------------------------------

/// Exhaustive satisfiability over at most 24 variables. Slow and obviously
/// correct; the reference the bundled solver is judged against.
pub fn truth_table_sat(num_vars: usize, clauses: &[Vec<Lit>]) -> bool {
    assert!(num_vars <= 24, "truth table limited to 24 variables");
    'outer: for bits in 0u64..(1u64 << num_vars) {
        for clause in clauses {
            let satisfied = clause.iter().any(|lit| {
                let value = bits >> lit.var().index() & 1 == 1;
                value == lit.is_pos()
            });
            if !satisfied {
                continue 'outer;
            }
        }
        return true;
    }
    false
}

/// Truth-table satisfiability under assumptions, by conjoining them as
/// units.
pub fn truth_table_sat_assuming(
    num_vars: usize,
    clauses: &[Vec<Lit>],
    assumptions: &[Lit],
) -> bool {
    let mut all = clauses.to_vec();
    all.extend(assumptions.iter().map(|&a| vec![a]));
    truth_table_sat(num_vars, &all)
}

/// Random k-CNF instance over the given variables: `num_clauses` clauses of
/// `k` distinct variables each.
pub fn random_cnf(
    rng: &mut ChaCha8Rng,
    vars: &[Var],
    num_clauses: usize,
    k: usize,
) -> Vec<Vec<Lit>> {
    let mut clauses = Vec::with_capacity(num_clauses);
    for _ in 0..num_clauses {
        let mut picked = Vec::with_capacity(k);
        while picked.len() < k {
            let v = vars[rng.random_range(0..vars.len())];
            if !picked.contains(&v) {
                picked.push(v);
            }
        }
        clauses.push(
            picked
                .into_iter()
                .map(|v| if rng.random_bool(0.5) { Lit::pos(v) } else { Lit::neg(v) })
                .collect(),
        );
    }
    clauses
}

// --- XML well-formedness ----------------------------------------------

/// A small well-formedness check: tags balance, attributes are quoted, no
/// stray `<`, `>` or unescaped `&` in text. Not a validator, but enough to
/// catch broken emission.
pub fn assert_well_formed_xml(xml: &str) {
    let mut stack: Vec<String> = Vec::new();
    let mut rest = xml;
    while let Some(start) = rest.find('<') {
        let text = &rest[..start];
        assert!(!text.contains('>'), "stray `>` in text: {text:?}");
        if let Some(amp) = text.find('&') {
            let tail = &text[amp..];
            assert!(
                ["&amp;", "&lt;", "&gt;", "&quot;", "&apos;"]
                    .iter()
                    .any(|e| tail.starts_with(e)),
                "unescaped `&` in text: {text:?}"
            );
        }
        rest = &rest[start + 1..];
        let end = rest.find('>').expect("unclosed tag");
        let tag = &rest[..end];
        rest = &rest[end + 1..];
        assert!(!tag.contains('<'), "nested `<` inside tag: {tag:?}");
        assert_eq!(tag.matches('"').count() % 2, 0, "unbalanced quotes: {tag:?}");
        if tag.starts_with('?') || tag.starts_with('!') {
            continue;
        }
        if let Some(name) = tag.strip_prefix('/') {
            let open = stack.pop().unwrap_or_else(|| panic!("close without open: {name}"));
            assert_eq!(open, name.trim(), "mismatched close tag");
        } else if !tag.ends_with('/') {
            let name = tag.split_whitespace().next().expect("tag name");
            stack.push(name.to_string());
        }
    }
    assert!(!rest.contains('>'), "stray `>` after last tag");
    assert!(stack.is_empty(), "unclosed tags: {stack:?}");
}

// --- program fuzzing ---------------------------------------------------

/// Generates a random MiniC program that is valid by construction: at most
/// three nondet inputs, loops with constant bounds and dedicated counters,
/// every operator total. Ground truth comes from exhaustive enumeration.
pub struct ProgramFuzzer<'a> {
    rng: &'a mut ChaCha8Rng,
    lines: Vec<String>,
    indent: usize,
    loop_depth: usize,
    loops_made: usize,
    asserts: usize,
    statements_left: i32,
}

const INT_VARS: [&str; 6] = ["a", "b", "c", "t0", "t1", "t2"];
const BOOL_VARS: [&str; 2] = ["p", "q"];

impl<'a> ProgramFuzzer<'a> {
    pub fn generate(rng: &'a mut ChaCha8Rng) -> String {
        let mut f = ProgramFuzzer {
            rng,
            lines: Vec::new(),
            indent: 1,
            loop_depth: 0,
            loops_made: 0,
            asserts: 0,
            statements_left: 14,
        };
        f.build()
    }

    fn build(&mut self) -> String {
        let nondet_ints = self.rng.random_range(0..=3);
        let nondet_bools = if nondet_ints < 3 { self.rng.random_range(0..=1) } else { 0 };

        for (i, v) in INT_VARS.iter().enumerate() {
            let init = if i < nondet_ints {
                format!("{v} = nondet_int();")
            } else {
                format!("{v} = {};", self.int_const())
            };
            self.push(&format!("int {v}; {init}"));
        }
        for (i, v) in BOOL_VARS.iter().enumerate() {
            let init = if i < nondet_bools {
                format!("{v} = nondet_bool();")
            } else if self.rng.random_bool(0.5) {
                format!("{v} = true;")
            } else {
                format!("{v} = false;")
            };
            self.push(&format!("bool {v}; {init}"));
        }

        let count = self.rng.random_range(3..=6);
        for _ in 0..count {
            self.statement();
        }
        if self.asserts == 0 {
            let cond = self.bool_expr(2);
            self.push(&format!("assert({cond});"));
        }
        self.push("return 0;");

        let mut out = String::from("int main() {\n");
        for line in &self.lines {
            out.push_str(line);
            out.push('\n');
        }
        out.push_str("}\n");
        out
    }

    fn push(&mut self, line: &str) {
        self.lines.push(format!("{}{}", "    ".repeat(self.indent), line));
    }

    fn statement(&mut self) {
        self.statements_left -= 1;
        if self.statements_left < 0 {
            // Degenerate to a plain assignment once the budget runs out.
            let v = INT_VARS[self.rng.random_range(0..INT_VARS.len())];
            let e = self.int_expr(1);
            self.push(&format!("{v} = {e};"));
            return;
        }
        match self.rng.random_range(0..10) {
            0..=2 => {
                let v = INT_VARS[self.rng.random_range(0..INT_VARS.len())];
                let e = self.int_expr(2);
                self.push(&format!("{v} = {e};"));
            }
            3 => {
                let v = BOOL_VARS[self.rng.random_range(0..BOOL_VARS.len())];
                let e = self.bool_expr(2);
                self.push(&format!("{v} = {e};"));
            }
            4..=5 => {
                let cond = self.bool_expr(2);
                self.push(&format!("if ({cond}) {{"));
                self.indent += 1;
                let inner = self.rng.random_range(1..=2);
                for _ in 0..inner {
                    self.statement();
                }
                self.indent -= 1;
                if self.rng.random_bool(0.5) {
                    self.push("} else {");
                    self.indent += 1;
                    self.statement();
                    self.indent -= 1;
                }
                self.push("}");
            }
            6 => {
                if self.loop_depth >= 2 {
                    return self.statement();
                }
                let counter = format!("li{}", self.loops_made);
                self.loops_made += 1;
                let bound = self.rng.random_range(1..=3);
                self.push(&format!("int {counter}; {counter} = 0;"));
                self.push(&format!("while ({counter} < {bound}) {{"));
                self.indent += 1;
                self.loop_depth += 1;
                let inner = self.rng.random_range(1..=2);
                for _ in 0..inner {
                    self.statement();
                }
                self.push(&format!("{counter} = {counter} + 1;"));
                self.loop_depth -= 1;
                self.indent -= 1;
                self.push("}");
            }
            7 => {
                let cond = self.bool_expr(2);
                self.push(&format!("assume({cond});"));
            }
            _ => {
                let cond = self.bool_expr(2);
                self.push(&format!("assert({cond});"));
                self.asserts += 1;
            }
        }
    }

    fn int_const(&mut self) -> i64 {
        self.rng.random_range(-8i64..=7)
    }

    fn int_expr(&mut self, depth: usize) -> String {
        if depth == 0 || self.rng.random_bool(0.35) {
            return if self.rng.random_bool(0.6) {
                INT_VARS[self.rng.random_range(0..INT_VARS.len())].to_string()
            } else {
                let k = self.int_const();
                if k < 0 {
                    format!("({k})")
                } else {
                    k.to_string()
                }
            };
        }
        if self.rng.random_bool(0.15) {
            let op = if self.rng.random_bool(0.5) { "-" } else { "~" };
            let e = self.int_expr(depth - 1);
            return format!("({op}{e})");
        }
        let ops = ["+", "-", "*", "/", "%", "&", "|", "^", "<<", ">>"];
        let op = ops[self.rng.random_range(0..ops.len())];
        let l = self.int_expr(depth - 1);
        let r = self.int_expr(depth - 1);
        format!("({l} {op} {r})")
    }

    fn bool_expr(&mut self, depth: usize) -> String {
        if depth == 0 || self.rng.random_bool(0.25) {
            return match self.rng.random_range(0..4) {
                0 => "true".to_string(),
                1 => "false".to_string(),
                _ => BOOL_VARS[self.rng.random_range(0..BOOL_VARS.len())].to_string(),
            };
        }
        match self.rng.random_range(0..8) {
            0..=4 => {
                let ops = ["==", "!=", "<", "<=", ">", ">="];
                let op = ops[self.rng.random_range(0..ops.len())];
                let l = self.int_expr(depth - 1);
                let r = self.int_expr(depth - 1);
                format!("({l} {op} {r})")
            }
            5 => {
                let e = self.bool_expr(depth - 1);
                format!("(!{e})")
            }
            _ => {
                let op = if self.rng.random_bool(0.5) { "&&" } else { "||" };
                let l = self.bool_expr(depth - 1);
                let r = self.bool_expr(depth - 1);
                format!("({l} {op} {r})")
            }
        }
    }
}
