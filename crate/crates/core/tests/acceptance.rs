//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measured numbers (visible under `--nocapture`).
//!
//! Seeds are fixed so every run exercises the identical corpus. All solves
//! run with auditing on: every pivot must strictly raise the objective and
//! tables are re-verified every 10 pivots. A solve that hits a tie the
//! payoff jitter could not break aborts as a degenerate trial; such trials
//! are counted, bounded to a tiny fraction, and excluded from statistics,
//! never silently kept.

use shadowlp::tol::SIGN_EPS;
use shadowlp::rng::SplitMix64;
use shadowlp::{
    add_target, canonicalize, iterative_solve_with, load_graph, random_column, random_payoff,
    retains_optimality, run_growth_experiment, solve_checkpoint_game, solve_oracle, solve_with,
    ExperimentConfig, ExtensionEvent, PayoffMatrix, PersistenceStatus, SecurityGraph,
    SolveError, SolveOptions,
};

const AUDITED: SolveOptions = SolveOptions { audit: true };

/// Largest tolerated fraction of degenerate exclusions in any corpus.
const MAX_EXCLUDED: f64 = 0.01;

/// Degenerate-data aborts: ties the payoff jitter could not break, either
/// as a sub-resolution pivot step or as a numerically rank-deficient active
/// set. Counted and excluded; anything else fails the suite.
fn excludable(e: &SolveError) -> bool {
    matches!(
        e,
        SolveError::DegeneratePivot | SolveError::Lp(shadowlp::LpError::SingularBasis)
    )
}

fn corpus_game(rng: &mut SplitMix64) -> PayoffMatrix {
    let n = rng.int_range(2, 5) as usize;
    let m = rng.int_range(2, 8) as usize;
    random_payoff(rng, n, m, -10, 10, true)
}

fn min_pure_response(payoff: &PayoffMatrix, strategy: &[f64]) -> f64 {
    (0..payoff.opponent_actions())
        .map(|j| (0..payoff.actions()).map(|i| payoff.get(i, j) * strategy[i]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

/// AC-1: on 500 seeded random games the solver value matches the
/// enumeration oracle within 1e-6 and the recovered strategy guarantees at
/// least value - 1e-6 against every pure response.
#[test]
fn ac1_oracle_equivalence() {
    let start = std::time::Instant::now();
    let mut checked = 0usize;
    let mut excluded = 0usize;
    let mut worst_value_gap = 0.0f64;
    let mut worst_guarantee_gap = 0.0f64;
    for trial in 0..500u64 {
        let mut rng = SplitMix64::stream(0xAC01, trial);
        let payoff = corpus_game(&mut rng);
        let lp = canonicalize(&payoff);
        let (solution, _) = match solve_with(&lp, &AUDITED) {
            Ok(v) => v,
            Err(e) if excludable(&e) => {
                excluded += 1;
                continue;
            }
            Err(e) => panic!("trial {trial}: {e}"),
        };
        checked += 1;
        let oracle = solve_oracle(&lp).unwrap();
        let gap = (solution.value - oracle.value).abs();
        assert!(gap <= 1e-6, "trial {trial}: value gap {gap}");
        worst_value_gap = worst_value_gap.max(gap);
        let guarantee = min_pure_response(&payoff, &solution.strategy);
        assert!(
            guarantee >= solution.value - 1e-6,
            "trial {trial}: guarantee {guarantee} below value {}",
            solution.value
        );
        worst_guarantee_gap = worst_guarantee_gap.max(solution.value - guarantee);
    }
    assert!(excluded as f64 <= MAX_EXCLUDED * 500.0, "{excluded} degenerate trials");
    println!(
        "AC-1 PASS: {checked}/500 games checked ({excluded} degenerate ties excluded), \
         worst |value - oracle| {worst_value_gap:.3e}, \
         worst guarantee slack {worst_guarantee_gap:.3e}, {:.2?}",
        start.elapsed()
    );
    assert!(start.elapsed().as_secs() < 30, "runtime budget exceeded");
}

fn seeded_event(trial: u64) -> Result<ExtensionEvent, SolveError> {
    let mut rng = SplitMix64::stream(0xAC02, trial);
    let payoff = corpus_game(&mut rng);
    let n = payoff.actions();
    let lp = canonicalize(&payoff);
    let (solution, path) = solve_with(&lp, &AUDITED)?;
    let g = random_column(&mut rng, n, -10, 10, true);
    Ok(ExtensionEvent::new(lp, &g, solution, path).expect("well-formed event"))
}

/// AC-2: the retention test agrees with the oracle in both directions on
/// 500 seeded extension events. "Unchanged" means the new-LP oracle value
/// equals the old one and the old optimum satisfies the inserted
/// constraint at the same sign tolerance the retention test uses. Whenever
/// retention fails, the inserted constraint is active at the new optimum.
#[test]
fn ac2_retention_iff_oracle_unchanged() {
    let mut recomputes = 0usize;
    let mut retained_count = 0usize;
    let mut excluded = 0usize;
    for trial in 0..500u64 {
        let event = match seeded_event(trial) {
            Ok(e) => e,
            Err(e) if excludable(&e) => {
                excluded += 1;
                continue;
            }
            Err(e) => panic!("event {trial}: {e}"),
        };
        let retained = retains_optimality(&event.old_solution, &event.new_lp);
        let v_old = solve_oracle(&event.old_lp).unwrap().value;
        let new_oracle = solve_oracle(&event.new_lp).unwrap();
        let slack = event.new_lp.slack(event.inserted_row(), &event.old_solution.x);
        let unchanged = (new_oracle.value - v_old).abs() <= 1e-7 && slack >= -SIGN_EPS;
        assert_eq!(retained, unchanged, "event {trial}: retention test disagrees with oracle");
        if retained {
            retained_count += 1;
            assert!(
                (new_oracle.value - v_old).abs() <= 1e-7,
                "event {trial}: retained but value moved"
            );
        } else {
            recomputes += 1;
            let opt_slack = event.new_lp.slack(event.inserted_row(), &new_oracle.x);
            assert!(
                opt_slack.abs() <= 1e-7,
                "event {trial}: new constraint slack {opt_slack} at new optimum"
            );
        }
    }
    assert!(excluded as f64 <= MAX_EXCLUDED * 500.0, "{excluded} degenerate trials");
    println!(
        "AC-2 PASS: {retained_count} retained + {recomputes} recomputed events \
         ({excluded} degenerate ties excluded), zero counterexamples"
    );
}

/// AC-3: every recompute event solves to the same value warm-started as
/// from scratch (1e-9), and the inserted constraint never leaves the active
/// set after entering, on every resume whose prefix-closure premise holds.
#[test]
fn ac3_iterative_equals_scratch() {
    let mut recomputes = 0usize;
    let mut gaps = 0usize;
    let mut excluded = 0usize;
    let mut worst = 0.0f64;
    for trial in 0..500u64 {
        let event = match seeded_event(trial) {
            Ok(e) => e,
            Err(e) if excludable(&e) => {
                excluded += 1;
                continue;
            }
            Err(e) => panic!("event {trial}: {e}"),
        };
        if retains_optimality(&event.old_solution, &event.new_lp) {
            continue;
        }
        let result = match iterative_solve_with(&event, &AUDITED) {
            Ok(r) => r,
            Err(e) if degenerate(&e) => {
                excluded += 1;
                continue;
            }
            Err(e) => panic!("event {trial}: {e}"),
        };
        let (fresh, _) = match solve_with(&event.new_lp, &AUDITED) {
            Ok(v) => v,
            Err(e) if excludable(&e) => {
                excluded += 1;
                continue;
            }
            Err(e) => panic!("event {trial}: {e}"),
        };
        recomputes += 1;
        let gap = (result.solution.value - fresh.value).abs();
        assert!(
            gap <= 1e-9,
            "event {trial}: warm {} vs scratch {}",
            result.solution.value,
            fresh.value
        );
        worst = worst.max(gap);
        if result.persistence == PersistenceStatus::FeasibilityGap {
            gaps += 1;
        }
    }
    assert!(excluded as f64 <= MAX_EXCLUDED * 500.0, "{excluded} degenerate trials");
    println!(
        "AC-3 PASS: {recomputes} recompute events, worst value gap {worst:.3e}, \
         zero persistence violations ({gaps} resumes outside the guarantee's premise, \
         {excluded} degenerate ties excluded)"
    );
}

fn degenerate(e: &shadowlp::IncrementalError) -> bool {
    match e {
        shadowlp::IncrementalError::Solve(inner) => excludable(inner),
        shadowlp::IncrementalError::Lp(shadowlp::LpError::SingularBasis) => true,
        _ => false,
    }
}

/// AC-4: empirical strategy-change frequency within 3 binomial standard
/// errors of the closed form at n = 10, m in {50, 100, 200}, 300 trials
/// each (one miss may fall back to an absolute 0.05 tolerance).
#[test]
fn ac4_change_probability_matches_theory() {
    let start = std::time::Instant::now();
    let cfg = ExperimentConfig {
        n: 10,
        m_list: vec![50, 100, 200],
        trials: 300,
        payoff_low: -100,
        payoff_high: 100,
        seed: 0xAC04,
        perturbation: true,
        audit: true,
    };
    let records = run_growth_experiment(&cfg).unwrap();
    let mut misses = Vec::new();
    for r in &records {
        assert!(
            r.failed_trials as f64 <= MAX_EXCLUDED * 300.0,
            "m={}: {} excluded trials",
            r.m,
            r.failed_trials
        );
        let p = r.theory_change_prob;
        let sigma = (p * (1.0 - p) / r.trials as f64).sqrt();
        let diff = (r.empirical_change_prob - p).abs();
        println!(
            "AC-4 m={}: empirical {:.4} theory {:.4} diff {:.4} (3 sigma {:.4}, \
             {} trials, {} excluded)",
            r.m,
            r.empirical_change_prob,
            p,
            diff,
            3.0 * sigma,
            r.trials,
            r.failed_trials
        );
        if diff > 3.0 * sigma {
            misses.push((r.m, diff));
        }
    }
    match misses.as_slice() {
        [] => {}
        [(m, diff)] => {
            assert!(*diff <= 0.05, "m={m} misses 3 sigma and the 0.05 fallback (diff {diff})")
        }
        more => panic!("multiple sizes outside 3 sigma: {more:?}"),
    }
    println!(
        "AC-4 PASS: {} sizes, {} within 3 sigma, {:.2?}",
        records.len(),
        records.len() - misses.len(),
        start.elapsed()
    );
    assert!(start.elapsed().as_secs() < 600, "runtime budget exceeded");
}

/// AC-5: with at least 200 recompute events accumulated at n = 10, m = 100,
/// the warm-started mean pivot count is strictly below the from-scratch one.
#[test]
fn ac5_iterative_cheaper_on_recompute() {
    let mut recomputes = 0usize;
    let mut excluded = 0usize;
    let mut iter_pivots = 0u64;
    let mut full_pivots = 0u64;
    let mut trial = 0u64;
    while recomputes < 200 {
        assert!(trial < 20_000, "not enough recompute events in 20k trials");
        let mut rng = SplitMix64::stream(0xAC05, trial);
        trial += 1;
        let payoff = random_payoff(&mut rng, 10, 100, -100, 100, true);
        let lp = canonicalize(&payoff);
        let (solution, path) = match solve_with(&lp, &AUDITED) {
            Ok(v) => v,
            Err(e) if excludable(&e) => {
                excluded += 1;
                continue;
            }
            Err(e) => panic!("trial {trial}: {e}"),
        };
        let g = random_column(&mut rng, 10, -100, 100, true);
        let event = ExtensionEvent::new(lp, &g, solution, path).unwrap();
        if retains_optimality(&event.old_solution, &event.new_lp) {
            continue;
        }
        let iterative = iterative_solve_with(&event, &AUDITED);
        let fresh = solve_with(&event.new_lp, &AUDITED);
        match (iterative, fresh) {
            (Ok(result), Ok((_, fresh_path))) => {
                recomputes += 1;
                iter_pivots += result.pivots_used as u64;
                full_pivots += fresh_path.pivot_count() as u64;
            }
            (Err(e), _) if degenerate(&e) => excluded += 1,
            (_, Err(e)) if excludable(&e) => excluded += 1,
            (Err(e), _) => panic!("trial {trial}: {e}"),
            (_, Err(e)) => panic!("trial {trial}: {e}"),
        }
    }
    let mean_iter = iter_pivots as f64 / recomputes as f64;
    let mean_full = full_pivots as f64 / recomputes as f64;
    assert!(excluded as f64 <= MAX_EXCLUDED * trial as f64, "{excluded} degenerate trials");
    assert!(
        mean_iter < mean_full,
        "warm-started mean {mean_iter} not below scratch mean {mean_full}"
    );
    println!(
        "AC-5 PASS: {recomputes} recompute events over {trial} trials \
         ({excluded} degenerate ties excluded), \
         mean pivots warm {mean_iter:.2} < scratch {mean_full:.2}"
    );
}

/// AC-6: every solve in the other criteria ran with auditing on, which
/// fails the solve on any pivot that does not strictly raise the objective
/// by more than 1e-12 (ties the jitter cannot break abort as degenerate
/// trials) and re-verifies every table identity every 10 pivots. This test
/// replays the seeded oracle corpus and the experiment workload, re-checks
/// the recorded paths end to end, and confirms nothing failed an audit.
#[test]
fn ac6_monotonic_pivots_and_sound_tables() {
    let mut solves = 0usize;
    let mut pivots = 0usize;
    let mut excluded = 0usize;
    for trial in 0..500u64 {
        let mut rng = SplitMix64::stream(0xAC01, trial);
        let payoff = corpus_game(&mut rng);
        let lp = canonicalize(&payoff);
        let path = match solve_with(&lp, &AUDITED) {
            Ok((_, path)) => path,
            Err(e) if excludable(&e) => {
                excluded += 1;
                continue;
            }
            Err(e) => panic!("trial {trial}: {e}"),
        };
        solves += 1;
        pivots += path.pivot_count();
        for pair in path.entries.windows(2) {
            let increase = pair[1].table.objective_value() - pair[0].table.objective_value();
            assert!(increase > 1e-12, "trial {trial}: increase {increase}");
        }
        assert!(path.verify(&lp).is_empty(), "trial {trial}: {:?}", path.verify(&lp));
    }
    let cfg = ExperimentConfig {
        n: 10,
        m_list: vec![50, 100, 200],
        trials: 300,
        payoff_low: -100,
        payoff_high: 100,
        seed: 0xAC04,
        perturbation: true,
        audit: true,
    };
    let records = run_growth_experiment(&cfg).unwrap();
    for r in &records {
        assert!(
            r.failed_trials as f64 <= MAX_EXCLUDED * 300.0,
            "m={}: {} excluded trials",
            r.m,
            r.failed_trials
        );
        excluded += r.failed_trials;
        solves += r.trials;
    }
    println!(
        "AC-6 PASS: {solves} audited solves, {pivots} pivots re-checked in the oracle corpus, \
         zero monotonicity or table diagnostics ({excluded} degenerate ties excluded)"
    );
}

fn graph_with_targets(base: &SecurityGraph, extra: &[usize]) -> SecurityGraph {
    let mut g = base.clone();
    for &t in extra {
        g.targets.insert(t);
    }
    g
}

/// AC-7: scenario oracle checks. The diamond graph solves to exactly 0.5,
/// and every tested add-target sequence on graphs with at most 12 edges
/// matches a fresh solve of the final game.
#[test]
fn ac7_scenario_matches_fresh_solves() {
    let diamond = load_graph(
        "nodes 4 budget 1\nedge 0 1\nedge 0 2\nedge 1 3\nedge 2 3\nsource 0\ntarget 3\n",
    )
    .unwrap();
    let state = solve_checkpoint_game(&diamond).unwrap();
    assert!(
        (state.solution.value - 0.5).abs() <= 1e-9,
        "diamond value {}",
        state.solution.value
    );
    let oracle = solve_oracle(&state.lp).unwrap();
    assert!((state.solution.value - oracle.value).abs() <= 1e-9);

    // grid: 2x3 lattice, 7 edges, budget 2
    let grid = "nodes 6 budget 2\n\
                edge 0 1\nedge 1 2\nedge 3 4\nedge 4 5\nedge 0 3\nedge 1 4\nedge 2 5\n\
                source 0\ntarget 5\n";
    // braid: two sources, 8 edges, budget 1
    let braid = "nodes 6 budget 1\n\
                 edge 0 2\nedge 1 2\nedge 2 3\nedge 3 4\nedge 3 5\nedge 2 4\nedge 4 5\nedge 0 3\n\
                 source 0\nsource 1\ntarget 5\n";
    let sequences: Vec<(&str, SecurityGraph, Vec<usize>)> = vec![
        ("diamond", diamond.clone(), vec![1, 2]),
        ("grid", load_graph(grid).unwrap(), vec![2, 4]),
        ("braid", load_graph(braid).unwrap(), vec![4]),
    ];
    let mut sequences_run = 0;
    for (name, base, additions) in sequences {
        assert!(base.edges.len() <= 12);
        let mut state = solve_checkpoint_game(&base).unwrap();
        let mut added = Vec::new();
        for &target in &additions {
            add_target(&mut state, target)
                .unwrap_or_else(|e| panic!("{name}: add target {target}: {e}"));
            added.push(target);
            let fresh = solve_checkpoint_game(&graph_with_targets(&base, &added)).unwrap();
            let gap = (state.solution.value - fresh.solution.value).abs();
            assert!(
                gap <= 1e-6,
                "{name} after adding {added:?}: warm {} vs fresh {}",
                state.solution.value,
                fresh.solution.value
            );
            let mass: f64 = state.solution.strategy.iter().sum();
            assert!((mass - state.graph.budget).abs() <= 1e-9, "{name}: mass {mass}");
            for &p in &state.solution.strategy {
                assert!((-1e-9..=1.0 + 1e-9).contains(&p), "{name}: probability {p}");
            }
        }
        sequences_run += 1;
    }
    println!(
        "AC-7 PASS: diamond exactly 0.5; {sequences_run} add-target sequences match fresh solves"
    );
}
