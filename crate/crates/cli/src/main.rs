//! Command-line front end: solve games, apply action extensions against
//! persisted search paths, run the growth experiment, and drive checkpoint
//! scenarios.
//!
//! Exit codes are stable: 0 success, 2 bad input (flags, files, formats),
//! 3 solver failure, 4 stale or corrupt warm-start state, 5 verification
//! diagnostics found. Numbers print with 10 significant digits.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use shadowlp::persist::parse_column_file;
use shadowlp::util::fmt_sig;
use shadowlp::{
    add_target, canonicalize, iterative_solve, load_graph, run_growth_experiment,
    solve_checkpoint_game, solve_with, write_records_csv, ExperimentConfig, ExtensionEvent,
    LpVariant, PayoffMatrix, PersistedState, ScenarioError, SolveOptions,
};

#[derive(Parser)]
#[command(
    name = "shadowlp",
    version,
    about = "Security strategies for zero-sum matrix games, updated incrementally as the opponent gains actions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a game given a payoff matrix file; optionally persist the
    /// search path for later warm starts
    Solve {
        /// Payoff matrix file: first line "n m", then n rows of m numbers
        matrix: PathBuf,
        /// Write the warm-start state here
        #[arg(long)]
        out_state: Option<PathBuf>,
    },
    /// Update a persisted state with one new opponent payoff column
    Extend {
        /// Warm-start state produced by solve, extend, or scenario
        state: PathBuf,
        /// Column file: n numbers, optionally preceded by "parent <digest>"
        column: PathBuf,
        /// Write the updated warm-start state here
        #[arg(long)]
        out_state: Option<PathBuf>,
    },
    /// Run the growth experiment and write per-m statistics as CSV
    Simulate {
        /// Own action count (rows of the payoff matrix)
        #[arg(long)]
        n: usize,
        /// Opponent action-set sizes, comma separated
        #[arg(long = "m", value_delimiter = ',', num_args = 1..)]
        m: Vec<usize>,
        /// Trials per action-set size
        #[arg(long)]
        trials: usize,
        /// Master seed; all randomness derives from it
        #[arg(long)]
        seed: u64,
        /// Lower payoff bound (integers)
        #[arg(long, default_value_t = -100)]
        low: i64,
        /// Upper payoff bound (integers)
        #[arg(long, default_value_t = 100)]
        high: i64,
        /// Disable the tiny payoff jitter that restores general position
        #[arg(long)]
        no_perturb: bool,
        /// Audit solver invariants in every trial
        #[arg(long)]
        audit: bool,
        /// CSV destination
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a checkpoint-placement game on a road graph
    Scenario {
        /// Graph file: "nodes <N> budget <B>", then edge/source/target lines
        graph: PathBuf,
        /// Add this node as a new target via the warm-started solver
        #[arg(long)]
        add_target: Option<usize>,
        /// Write the warm-start state here
        #[arg(long)]
        out_state: Option<PathBuf>,
    },
    /// Check a persisted state file: digest, tables, path invariants
    Verify {
        state: PathBuf,
    },
}

enum CmdError {
    /// Bad input: missing files, malformed formats, invalid flags.
    Usage(String),
    Solver(String),
    /// Stale or corrupt warm-start state.
    Stale(String),
    /// Verification found diagnostics.
    Diagnostics,
}

impl CmdError {
    fn code(&self) -> u8 {
        match self {
            CmdError::Usage(_) => 2,
            CmdError::Solver(_) => 3,
            CmdError::Stale(_) => 4,
            CmdError::Diagnostics => 5,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve { matrix, out_state } => cmd_solve(&matrix, out_state.as_deref()),
        Command::Extend { state, column, out_state } => {
            cmd_extend(&state, &column, out_state.as_deref())
        }
        Command::Simulate { n, m, trials, seed, low, high, no_perturb, audit, out } => {
            cmd_simulate(n, m, trials, seed, low, high, !no_perturb, audit, &out)
        }
        Command::Scenario { graph, add_target, out_state } => {
            cmd_scenario(&graph, add_target, out_state.as_deref())
        }
        Command::Verify { state } => cmd_verify(&state),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CmdError::Usage(msg) | CmdError::Solver(msg) | CmdError::Stale(msg) => {
                    eprintln!("error: {msg}");
                }
                CmdError::Diagnostics => {}
            }
            ExitCode::from(e.code())
        }
    }
}

fn fmt10(v: f64) -> String {
    fmt_sig(v, 10)
}

fn read_file(path: &Path) -> Result<String, CmdError> {
    std::fs::read_to_string(path)
        .map_err(|e| CmdError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CmdError> {
    std::fs::write(path, contents)
        .map_err(|e| CmdError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn print_strategy(label: &str, strategy: &[f64]) {
    let parts: Vec<String> = strategy.iter().map(|&v| fmt10(v)).collect();
    println!("{label} {}", parts.join(" "));
}

fn cmd_solve(matrix: &Path, out_state: Option<&Path>) -> Result<(), CmdError> {
    let payoff = PayoffMatrix::parse(&read_file(matrix)?)
        .map_err(|e| CmdError::Usage(e.to_string()))?;
    let lp = canonicalize(&payoff);
    let (solution, path) =
        solve_with(&lp, &SolveOptions::default()).map_err(|e| CmdError::Solver(e.to_string()))?;
    println!("value {}", fmt10(solution.value));
    print_strategy("strategy", &solution.strategy);
    if let Some(dest) = out_state {
        let state = PersistedState::new(payoff, LpVariant::Simplex, path)
            .map_err(|e| CmdError::Solver(e.to_string()))?;
        write_file(dest, &state.to_text())?;
    }
    Ok(())
}

fn cmd_extend(state: &Path, column: &Path, out_state: Option<&Path>) -> Result<(), CmdError> {
    let text = read_file(state)?;
    let stored =
        PersistedState::parse(&text).map_err(|e| CmdError::Stale(format!("corrupt state: {e}")))?;
    let lp = stored.checked_lp().map_err(|e| CmdError::Stale(e.to_string()))?;
    let (g, parent) = parse_column_file(&read_file(column)?, lp.n())
        .map_err(|e| CmdError::Usage(e.to_string()))?;
    if let Some(parent) = parent {
        if parent != stored.digest {
            return Err(CmdError::Stale(format!(
                "column targets game {parent:016x}, state holds {:016x}",
                stored.digest
            )));
        }
    }
    let old_solution = stored
        .solution(&lp)
        .map_err(|e| CmdError::Stale(format!("corrupt state: {e}")))?;
    let event = ExtensionEvent::new(lp, &g, old_solution, stored.path)
        .map_err(|e| CmdError::Usage(e.to_string()))?;
    let result = iterative_solve(&event).map_err(|e| CmdError::Solver(e.to_string()))?;
    println!("{}", if result.retained { "retained" } else { "recomputed" });
    println!("pivots {}", result.pivots_used);
    println!("value {}", fmt10(result.solution.value));
    if let Some(dest) = out_state {
        let payoff = stored
            .payoff
            .with_column(&g)
            .map_err(|e| CmdError::Usage(e.to_string()))?;
        let new_state = PersistedState::new(payoff, stored.variant, result.path)
            .map_err(|e| CmdError::Solver(e.to_string()))?;
        write_file(dest, &new_state.to_text())?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    n: usize,
    m_list: Vec<usize>,
    trials: usize,
    seed: u64,
    low: i64,
    high: i64,
    perturbation: bool,
    audit: bool,
    out: &Path,
) -> Result<(), CmdError> {
    let cfg = ExperimentConfig {
        n,
        m_list,
        trials,
        payoff_low: low,
        payoff_high: high,
        seed,
        perturbation,
        audit,
    };
    let records = run_growth_experiment(&cfg).map_err(|e| CmdError::Usage(e.to_string()))?;
    write_records_csv(&records, out).map_err(|e| CmdError::Usage(e.to_string()))?;
    for r in &records {
        println!(
            "m={} trials={} changes={} empirical={} theory={} mean_piv_iter={} mean_piv_full={}",
            r.m,
            r.trials,
            r.change_count,
            fmt10(r.empirical_change_prob),
            fmt10(r.theory_change_prob),
            fmt10(r.mean_pivots_iterative),
            fmt10(r.mean_pivots_full),
        );
        if r.failed_trials > 0 {
            eprintln!("warning: m={}: {} trials failed and were excluded", r.m, r.failed_trials);
        }
    }
    Ok(())
}

fn scenario_error(e: ScenarioError) -> CmdError {
    match e {
        ScenarioError::Lp(_) | ScenarioError::Solve(_) | ScenarioError::Incremental(_) => {
            CmdError::Solver(e.to_string())
        }
        other => CmdError::Usage(other.to_string()),
    }
}

fn cmd_scenario(
    graph: &Path,
    new_target: Option<usize>,
    out_state: Option<&Path>,
) -> Result<(), CmdError> {
    let g = load_graph(&read_file(graph)?).map_err(scenario_error)?;
    let mut state = solve_checkpoint_game(&g).map_err(scenario_error)?;
    println!("value {}", fmt10(state.solution.value));
    for (i, &p) in state.edge_probabilities().iter().enumerate() {
        println!("edge {i} {}", fmt10(p));
    }
    if let Some(node) = new_target {
        let report = add_target(&mut state, node).map_err(scenario_error)?;
        println!("{}", if report.retained_all { "retained" } else { "recomputed" });
        println!("pivots {}", report.pivots_used);
        println!("new_value {}", fmt10(report.value));
        for (i, &p) in state.edge_probabilities().iter().enumerate() {
            println!("edge {i} {}", fmt10(p));
        }
    }
    if let Some(dest) = out_state {
        let persisted = PersistedState::new(
            state.payoff.clone(),
            LpVariant::Budgeted { budget: state.graph.budget },
            state.path.clone(),
        )
        .map_err(|e| CmdError::Solver(e.to_string()))?;
        write_file(dest, &persisted.to_text())?;
    }
    Ok(())
}

fn cmd_verify(state: &Path) -> Result<(), CmdError> {
    let text = read_file(state)?;
    let stored =
        PersistedState::parse(&text).map_err(|e| CmdError::Stale(format!("corrupt state: {e}")))?;
    let lp = stored.checked_lp().map_err(|e| CmdError::Stale(e.to_string()))?;
    let diags = stored.path.verify(&lp);
    if diags.is_empty() {
        println!(
            "ok: {} entries, digest {:016x}, value {}",
            stored.path.entries.len(),
            stored.digest,
            fmt10(
                stored
                    .path
                    .entries
                    .last()
                    .map(|e| e.table.objective_value())
                    .unwrap_or(f64::NAN)
            )
        );
        Ok(())
    } else {
        for d in &diags {
            println!("diagnostic: {d}");
        }
        Err(CmdError::Diagnostics)
    }
}
