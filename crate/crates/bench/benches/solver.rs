//! Solver benchmarks: from-scratch solves, warm-started reoptimization
//! after one new opponent action, and the per-pivot cost.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use shadowlp::rng::SplitMix64;
use shadowlp::{
    canonicalize, iterative_solve, pivot_step, random_column, random_payoff, retains_optimality,
    solve, solve_oracle, ExtensionEvent, PivotOutcome,
};

fn game_10x100(seed: u64) -> shadowlp::CanonicalLp {
    let mut rng = SplitMix64::stream(seed, 0);
    canonicalize(&random_payoff(&mut rng, 10, 100, -100, 100, true))
}

/// First seeded extension event at 10x100 whose old optimum gets cut off.
fn recompute_event() -> ExtensionEvent {
    for trial in 0.. {
        let mut rng = SplitMix64::stream(0xBE, trial);
        let lp = canonicalize(&random_payoff(&mut rng, 10, 100, -100, 100, true));
        let (solution, path) = solve(&lp).expect("solvable");
        let g = random_column(&mut rng, 10, -100, 100, true);
        let event = ExtensionEvent::new(lp, &g, solution, path).expect("well-formed");
        if !retains_optimality(&event.old_solution, &event.new_lp) {
            return event;
        }
    }
    unreachable!()
}

fn bench_solver(c: &mut Criterion) {
    let lp = game_10x100(1);
    c.bench_function("solve/fresh_10x100", |b| b.iter(|| solve(black_box(&lp)).unwrap()));

    let event = recompute_event();
    c.bench_function("extend/iterative_10x100", |b| {
        b.iter(|| iterative_solve(black_box(&event)).unwrap())
    });
    c.bench_function("extend/scratch_10x100", |b| {
        b.iter(|| solve(black_box(&event.new_lp)).unwrap())
    });

    let (table, _) = shadowlp::init_table(&lp).unwrap();
    c.bench_function("pivot/single_step_10x100", |b| {
        b.iter(|| match pivot_step(black_box(&table), black_box(&lp)).unwrap() {
            PivotOutcome::Step { table, .. } => table.qc,
            _ => unreachable!(),
        })
    });

    let mut rng = SplitMix64::stream(0xCE, 0);
    let small = canonicalize(&random_payoff(&mut rng, 4, 6, -10, 10, true));
    c.bench_function("oracle/enumerate_4x6", |b| {
        b.iter(|| solve_oracle(black_box(&small)).unwrap())
    });
}

criterion_group!(benches, bench_solver);
criterion_main!(benches);
