//! Warm-started reoptimization when the opponent gains one action.
//!
//! Adding an action adds a single constraint to the canonical LP. If the old
//! optimum satisfies it, the security strategy is retained outright. If not,
//! the persisted search path is scanned from the front, every still-feasible
//! table is augmented with the new constraint's representation row, and
//! pivoting resumes from the best surviving vertex instead of from scratch.

use std::fmt;

use crate::lp::{vertex_from_active_set, CanonicalLp, LpError, Solution, Status, Vertex};
use crate::simplex::{
    drive_to_optimum, pivot_limit, pivot_step, solve_with, PathEntry, PathStatus, PivotOutcome,
    SearchPath, SearchTable, SolveError, SolveOptions,
};
use crate::matrix::{dot, Lu, Matrix};
use crate::tol::SIGN_EPS;

#[derive(Clone, Debug, PartialEq)]
pub enum IncrementalError {
    /// The vertex behind a stored table violates the new constraint.
    InfeasibleAtVertex,
    /// Path repair requires the old optimum to satisfy the new constraint.
    OptimumCutOff,
    /// The new constraint left the active set after entering it.
    PersistenceViolated,
    Solve(SolveError),
    Lp(LpError),
}

impl fmt::Display for IncrementalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IncrementalError::InfeasibleAtVertex => {
                write!(f, "stored vertex violates the new constraint")
            }
            IncrementalError::OptimumCutOff => {
                write!(f, "old optimum violates the new constraint")
            }
            IncrementalError::PersistenceViolated => {
                write!(f, "new constraint left the active set during resumption")
            }
            IncrementalError::Solve(e) => write!(f, "{e}"),
            IncrementalError::Lp(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for IncrementalError {}

impl From<SolveError> for IncrementalError {
    fn from(e: SolveError) -> Self {
        IncrementalError::Solve(e)
    }
}

impl From<LpError> for IncrementalError {
    fn from(e: LpError) -> Self {
        IncrementalError::Lp(e)
    }
}

/// One opponent-action extension: the LP pair plus the solve artifacts of
/// the old LP.
#[derive(Clone, Debug)]
pub struct ExtensionEvent {
    pub old_lp: CanonicalLp,
    pub new_lp: CanonicalLp,
    pub old_solution: Solution,
    pub old_path: SearchPath,
}

impl ExtensionEvent {
    pub fn new(
        old_lp: CanonicalLp,
        g: &[f64],
        old_solution: Solution,
        old_path: SearchPath,
    ) -> Result<Self, LpError> {
        if old_solution.status != Status::Optimal || old_path.entries.is_empty() {
            return Err(LpError::InvalidInput("extension needs a solved old LP".into()));
        }
        let new_lp = crate::lp::extend_with_action(&old_lp, g)?;
        Ok(Self { old_lp, new_lp, old_solution, old_path })
    }

    /// Index of the inserted constraint row in the new LP.
    pub fn inserted_row(&self) -> usize {
        self.new_lp.normal_count - 1
    }
}

/// The old optimum stays optimal if and only if it satisfies the inserted
/// constraint.
pub fn retains_optimality(old_solution: &Solution, new_lp: &CanonicalLp) -> bool {
    let row = new_lp.normal_count - 1;
    new_lp.slack(row, &old_solution.x) >= -SIGN_EPS
}

/// Augment a stored table with the representation row of the inserted
/// constraint. Indices at or above the insertion point shift up by one;
/// everything else is untouched because the active basis is unchanged.
pub fn insert_constraint_row(
    table: &SearchTable,
    new_lp: &CanonicalLp,
) -> Result<SearchTable, IncrementalError> {
    let n = new_lp.n();
    let new_rows = new_lp.row_count();
    let ins = new_lp.normal_count - 1;
    if table.gamma.rows() + 1 != new_rows {
        return Err(IncrementalError::Lp(LpError::InvalidInput(
            "table does not belong to the pre-extension LP".into(),
        )));
    }
    let active: Vec<usize> =
        table.active_set.iter().map(|&i| if i >= ins { i + 1 } else { i }).collect();

    let sub_t = new_lp.a.select_rows(&active).transpose();
    let lu = Lu::factor(&sub_t).ok_or(IncrementalError::Lp(LpError::SingularBasis))?;
    let gamma_new = lu.solve(new_lp.a.row(ins));
    let b_active: Vec<f64> = active.iter().map(|&i| new_lp.b[i]).collect();
    let phi_new = new_lp.b[ins] - dot(&gamma_new, &b_active);
    if phi_new < -SIGN_EPS {
        return Err(IncrementalError::InfeasibleAtVertex);
    }

    let mut gamma = Matrix::zeros(new_rows, n);
    let mut phi = vec![0.0; new_rows];
    for i in 0..new_rows {
        match i.cmp(&ins) {
            std::cmp::Ordering::Less => {
                gamma.row_mut(i).copy_from_slice(table.gamma.row(i));
                phi[i] = table.phi[i];
            }
            std::cmp::Ordering::Equal => {
                gamma.row_mut(i).copy_from_slice(&gamma_new);
                phi[i] = phi_new;
            }
            std::cmp::Ordering::Greater => {
                gamma.row_mut(i).copy_from_slice(table.gamma.row(i - 1));
                phi[i] = table.phi[i - 1];
            }
        }
    }
    Ok(SearchTable {
        active_set: active,
        alpha: table.alpha.clone(),
        beta: table.beta.clone(),
        qc: table.qc,
        qu: table.qu,
        gamma,
        phi,
    })
}

/// Whether the stay-active guarantee for the inserted constraint applied
/// and held during a resumed solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PersistenceStatus {
    /// No resumption happened (retained optimum or restart from scratch).
    NotApplicable,
    /// Once the inserted row entered the active set it stayed through
    /// termination. Enforced whenever path feasibility was prefix-closed;
    /// a violation in that regime aborts the solve instead.
    Held,
    /// A vertex past the scan stop was still feasible, so the restart
    /// vertex is not the best feasible path vertex and the stay-active
    /// guarantee does not apply. The solve itself remains exact.
    FeasibilityGap,
}

/// Outcome of one incremental solve.
#[derive(Clone, Debug)]
pub struct IterativeResult {
    pub solution: Solution,
    pub path: SearchPath,
    /// Index into the path of the vertex the search resumed from, when it
    /// neither retained the old optimum nor restarted from scratch.
    pub restart_index: Option<usize>,
    pub pivots_used: usize,
    pub retained: bool,
    pub persistence: PersistenceStatus,
}

pub fn iterative_solve(event: &ExtensionEvent) -> Result<IterativeResult, IncrementalError> {
    iterative_solve_with(event, &SolveOptions::default())
}

/// Incremental solve of the extended LP.
///
/// Retention is tested first. Otherwise the old path is scanned from the
/// front; the feasible prefix is kept with augmented tables and pivoting
/// resumes from its last vertex. An empty prefix falls back to a full solve.
pub fn iterative_solve_with(
    event: &ExtensionEvent,
    opts: &SolveOptions,
) -> Result<IterativeResult, IncrementalError> {
    let new_lp = &event.new_lp;
    let ins = event.inserted_row();

    if retains_optimality(&event.old_solution, new_lp) {
        let path = repair_path(&event.old_path, new_lp)?;
        return Ok(IterativeResult {
            solution: event.old_solution.clone(),
            path,
            restart_index: None,
            pivots_used: 0,
            retained: true,
            persistence: PersistenceStatus::NotApplicable,
        });
    }

    let mut entries: Vec<PathEntry> = Vec::new();
    for entry in &event.old_path.entries {
        match insert_constraint_row(&entry.table, new_lp) {
            Ok(table) => entries.push(PathEntry {
                vertex: Vertex { x: entry.vertex.x.clone(), active_set: table.active_set.clone() },
                table,
            }),
            Err(IncrementalError::InfeasibleAtVertex) => break,
            Err(other) => return Err(other),
        }
    }

    if entries.is_empty() {
        // the whole path was cut off
        let (solution, path) = solve_with(new_lp, opts)?;
        let pivots_used = path.pivot_count();
        return Ok(IterativeResult {
            solution,
            path,
            restart_index: None,
            pivots_used,
            retained: false,
            persistence: PersistenceStatus::NotApplicable,
        });
    }

    // the stay-active guarantee presumes the restart vertex is the best
    // feasible path vertex, which the front-to-back scan only delivers when
    // no later vertex is feasible again
    let prefix_closed = event.old_path.entries[entries.len()..]
        .iter()
        .all(|e| new_lp.slack(ins, &e.vertex.x) < -SIGN_EPS);

    let restart_index = entries.len() - 1;
    let start = entries[restart_index].table.clone();
    let driven = drive_to_optimum(new_lp, start, opts, |t| {
        let v = vertex_from_active_set(new_lp, &t.active_set)?;
        entries.push(PathEntry { vertex: v, table: t.clone() });
        Ok(())
    })?;
    if let Some(last) = entries.last_mut() {
        last.table = driven.table;
    }

    // once the inserted constraint becomes active it must stay active
    let mut entered = false;
    let mut left_after_entering = false;
    for entry in &entries[restart_index + 1..] {
        let has = entry.table.active_set.contains(&ins);
        left_after_entering |= entered && !has;
        entered |= has;
    }
    let persistence = if prefix_closed {
        if left_after_entering {
            return Err(IncrementalError::PersistenceViolated);
        }
        PersistenceStatus::Held
    } else {
        PersistenceStatus::FeasibilityGap
    };

    let last = entries.last().expect("nonempty path");
    let (strategy, _) = crate::lp::recover_strategy(new_lp, &last.vertex.x);
    let solution = Solution {
        x: last.vertex.x.clone(),
        value: driven.value,
        strategy,
        status: Status::Optimal,
    };
    Ok(IterativeResult {
        solution,
        path: SearchPath { entries, status: PathStatus::Optimal },
        restart_index: Some(restart_index),
        pivots_used: driven.pivots,
        retained: false,
        persistence,
    })
}

/// Rebuild a search path for the extended LP when the optimum itself
/// survived. Designed to run in the background after the retained solution
/// has already been returned.
///
/// The feasible prefix keeps its (augmented) tables. If the new constraint
/// cut a middle segment, pivots run from the last feasible prefix vertex
/// until they rejoin the old path (matched by active set) or reach the
/// optimum, and the old tail is re-attached with augmented tables.
pub fn repair_path(
    old_path: &SearchPath,
    new_lp: &CanonicalLp,
) -> Result<SearchPath, IncrementalError> {
    let ins = new_lp.normal_count - 1;
    let last = old_path
        .entries
        .last()
        .ok_or_else(|| IncrementalError::Lp(LpError::InvalidInput("empty path".into())))?;
    if new_lp.slack(ins, &last.vertex.x) < -SIGN_EPS {
        return Err(IncrementalError::OptimumCutOff);
    }

    let mut entries: Vec<PathEntry> = Vec::with_capacity(old_path.entries.len());
    let mut cut = None;
    for (i, entry) in old_path.entries.iter().enumerate() {
        match insert_constraint_row(&entry.table, new_lp) {
            Ok(table) => entries.push(PathEntry {
                vertex: Vertex { x: entry.vertex.x.clone(), active_set: table.active_set.clone() },
                table,
            }),
            Err(IncrementalError::InfeasibleAtVertex) => {
                cut = Some(i);
                break;
            }
            Err(other) => return Err(other),
        }
    }
    let Some(cut) = cut else {
        return Ok(SearchPath { entries, status: old_path.status });
    };
    if entries.is_empty() {
        // even the start vertex is gone; rebuild the path from scratch
        let (_, path) = solve_with(new_lp, &SolveOptions::default())?;
        return Ok(path);
    }

    // old active sets in post-insertion numbering, for rejoin detection
    let shifted: Vec<Vec<usize>> = old_path.entries[cut..]
        .iter()
        .map(|e| {
            let mut v: Vec<usize> =
                e.table.active_set.iter().map(|&i| if i >= ins { i + 1 } else { i }).collect();
            v.sort_unstable();
            v
        })
        .collect();

    let mut table = entries.last().expect("nonempty prefix").table.clone();
    let limit = pivot_limit(new_lp);
    let mut pivots = 0usize;
    'search: loop {
        match pivot_step(&table, new_lp)? {
            PivotOutcome::Optimal(_) => break 'search,
            PivotOutcome::NoSolution => return Err(IncrementalError::Solve(SolveError::NoSolution)),
            PivotOutcome::Step { table: next, .. } => {
                pivots += 1;
                if pivots > limit {
                    return Err(IncrementalError::Solve(SolveError::IterationLimit));
                }
                table = next;
                let vertex = vertex_from_active_set(new_lp, &table.active_set)?;
                entries.push(PathEntry { vertex, table: table.clone() });

                let mut key = table.active_set.clone();
                key.sort_unstable();
                if let Some(offset) = shifted.iter().position(|s| *s == key) {
                    let rejoin = cut + offset;
                    let mut attached_all = true;
                    for entry in &old_path.entries[rejoin + 1..] {
                        match insert_constraint_row(&entry.table, new_lp) {
                            Ok(t) => entries.push(PathEntry {
                                vertex: Vertex {
                                    x: entry.vertex.x.clone(),
                                    active_set: t.active_set.clone(),
                                },
                                table: t,
                            }),
                            Err(IncrementalError::InfeasibleAtVertex) => {
                                attached_all = false;
                                break;
                            }
                            Err(other) => return Err(other),
                        }
                    }
                    if attached_all {
                        break 'search;
                    }
                    // part of the tail is also cut; keep pivoting from the
                    // last surviving vertex
                    table = entries.last().expect("nonempty").table.clone();
                }
            }
        }
    }
    Ok(SearchPath { entries, status: PathStatus::Optimal })
}
