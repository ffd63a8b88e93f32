//! Exhaustive input-grid enumeration: parallel scan vs. the serial fallback.
//!
//! The grid sizes are chosen so a run finishes in seconds while still being
//! large enough for the chunked parallel scan to amortize its overhead. Both
//! variants must return identical reports; the benchmark asserts that before
//! timing.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pinacolada::frontend::parse_program;
use pinacolada::goto::lower::lower;
use pinacolada::goto::GotoProgram;
use pinacolada::oracle;
use std::time::Duration;

/// Three inputs at width 7: two million short straight-line runs.
const WIDE_SAFE: &str = "int main() {
    int a; int b; int c;
    a = nondet_int();
    b = nondet_int();
    c = nondet_int();
    assert(a + b + c == a + (b + c));
    return 0;
}";

/// A single violating tape mid-grid (index 120*256 + 77 of 65536): the scan
/// really has to cover half the grid, and the parallel version shows off its
/// early-skip once a chunk finds the violation.
const MID_GRID_VIOLATION: &str = "int main() {
    int a; int b;
    a = nondet_int();
    b = nondet_int();
    if (a == 120) {
        if (b == 77) {
            assert(false);
        }
    }
    return 0;
}";

/// Loop work per tape makes individual runs costlier, shifting the balance
/// toward compute and away from scan bookkeeping.
const LOOPY: &str = "int main() {
    int a; int s; int i;
    a = nondet_int();
    s = 0;
    i = 0;
    while (i < 40) {
        s = s + a;
        i = i + 1;
    }
    assert(s == 40 * a);
    return 0;
}";

fn compile(src: &str) -> GotoProgram {
    let (ast, _) = parse_program(src).expect("benchmark program parses");
    lower(&ast)
}

fn bench_enumeration(c: &mut Criterion) {
    let cases: &[(&str, &str, u32)] = &[
        ("wide_safe_w7x3", WIDE_SAFE, 7),
        ("mid_grid_violation_w8x2", MID_GRID_VIOLATION, 8),
        ("loopy_w10x1", LOOPY, 10),
    ];

    let mut group = c.benchmark_group("enumeration");
    group.sample_size(10);
    group.warm_up_time(Duration::from_secs(1));
    group.measurement_time(Duration::from_secs(4));

    for &(name, src, width) in cases {
        let program = compile(src);
        let inputs = oracle::static_input_count(&program);
        let grid_limit = 1 << 30;
        let step_limit = 10_000;

        let serial = oracle::enumerate_serial(&program, width, inputs, step_limit, grid_limit)
            .expect("grid fits");
        #[cfg(feature = "parallel")]
        {
            let parallel =
                oracle::enumerate_parallel(&program, width, inputs, step_limit, grid_limit)
                    .expect("grid fits");
            assert_eq!(
                serde_json::to_string(&serial).unwrap(),
                serde_json::to_string(&parallel).unwrap(),
                "parallel scan must reproduce the serial report"
            );
        }
        let _ = serial;

        group.bench_with_input(BenchmarkId::new("serial", name), &program, |b, p| {
            b.iter(|| oracle::enumerate_serial(p, width, inputs, step_limit, grid_limit).unwrap())
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", name), &program, |b, p| {
            b.iter(|| oracle::enumerate_parallel(p, width, inputs, step_limit, grid_limit).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_enumeration);
criterion_main!(benches);
