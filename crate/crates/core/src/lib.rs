//! Security strategies for zero-sum matrix games via the shadow-vertex
//! simplex method, with warm-started reoptimization when the opponent's
//! action set grows.
//!
//! The row player's security (saddle-point) strategy is the optimum of a
//! canonical LP over the opponent's action columns. When the opponent gains
//! an action, one constraint joins that LP; instead of re-solving from
//! scratch this crate tests whether the old optimum survives
//! ([`incremental::retains_optimality`]) and, when it does not, resumes
//! pivoting from the best still-feasible vertex of the persisted search
//! path ([`incremental::iterative_solve`]).
//!
//! ```
//! use shadowlp::{canonicalize, solve, ExtensionEvent, iterative_solve, PayoffMatrix};
//!
//! let payoff = PayoffMatrix::new(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
//! let lp = canonicalize(&payoff);
//! let (solution, path) = solve(&lp).unwrap();
//! assert!(solution.value.abs() < 1e-9);
//!
//! // the opponent reveals a new action; the old optimum is cut off
//! let event = ExtensionEvent::new(lp, &[-2.0, -0.5], solution, path).unwrap();
//! let updated = iterative_solve(&event).unwrap();
//! assert!((updated.solution.value + 5.0 / 7.0).abs() < 1e-9);
//! ```
//!
//! Module map:
//! - [`lp`]: payoff matrices, canonical forms, strategy recovery, and the
//!   brute-force enumeration oracle tests are anchored to.
//! - [`simplex`]: the shadow-vertex solver and its searching table.
//! - [`incremental`]: retention test, table augmentation, warm-started
//!   solves, and background path repair.
//! - [`analysis`]: strategy-change statistics and the Monte Carlo growth
//!   experiment with CSV output.
//! - [`scenario`]: the checkpoint-placement game on road graphs.
//! - [`persist`]: the versioned text format for warm-start state files.

pub mod analysis;
pub mod exact;
pub mod incremental;
pub mod lp;
pub mod matrix;
pub mod persist;
pub mod rng;
pub mod scenario;
pub mod simplex;
pub mod tol;
pub mod util;

pub use analysis::{
    expected_visit_ratio, prob_change, random_column, random_payoff, run_growth_experiment,
    write_records_csv, AnalysisError, ExperimentConfig, ExperimentRecord,
};
pub use incremental::{
    insert_constraint_row, iterative_solve, iterative_solve_with, repair_path,
    retains_optimality, ExtensionEvent, IncrementalError, IterativeResult, PersistenceStatus,
};
pub use lp::{
    canonicalize, canonicalize_budgeted, extend_with_action, recover_strategy, solve_oracle,
    vertex_from_active_set, CanonicalLp, LpError, LpVariant, PayoffMatrix, Solution, Status,
    Vertex,
};
pub use persist::{PersistedState, PersistError};
pub use scenario::{
    add_target, build_payoff, enumerate_shortest_paths, load_graph, solve_checkpoint_game,
    AddTargetReport, AttackPath, PathSet, ScenarioError, ScenarioState, SecurityGraph,
};
pub use simplex::{
    choose_auxiliary, init_table, init_table_budgeted, pivot_step, solve, solve_with,
    verify_table, AuxiliaryObjective, PathEntry, PathStatus, PivotOutcome, SearchPath,
    SearchTable, SolveError, SolveOptions,
};
