//! Shadow-vertex simplex solver.
//!
//! The solver walks vertices of `Ax <= b` whose projections onto the plane
//! spanned by an auxiliary objective `u` and the objective `c` stay extreme,
//! so the number of visited vertices grows slowly with the constraint count.
//! All bookkeeping lives in a searching table holding, for the current
//! ordered active set, the representation of `c` (alpha), of `u` (beta), and
//! of every constraint row (gamma), plus slacks (phi) and the negated
//! objective values `Qc`, `Qu`.
//!
//! Every solve records the sequence of visited vertices with full table
//! snapshots; that search path is the warm-start asset consumed by the
//! incremental machinery.

use std::fmt;

use crate::lp::{vertex_from_active_set, CanonicalLp, LpError, LpVariant, Solution, Status, Vertex};
use crate::matrix::{dot, Lu, Matrix};
use crate::rng::SplitMix64;
use crate::tol::{AUDIT_INTERVAL, MONOTONE_EPS, REFACTOR_INTERVAL, SCREEN_TOL, SIGN_EPS, TABLE_TOL};
use crate::util::binomial_capped;

#[derive(Clone, Debug, PartialEq)]
pub enum SolveError {
    /// No admissible auxiliary objective found after the randomized retries.
    RetryExhausted,
    /// A searching table failed its structural checks.
    InvalidTable(String),
    /// Pivot budget exceeded; indicates cycling on degenerate data.
    IterationLimit,
    /// The LP is unbounded in the search direction (cannot happen for
    /// well-formed game LPs).
    NoSolution,
    /// An audited invariant failed during a solve.
    AuditFailed(String),
    /// An audited solve hit a tie the payoff jitter could not break: the
    /// pivot's own algebra shows a non-negative objective step below the
    /// strict-increase floor. Such trials are excluded from statistics and
    /// counted, never silently kept.
    DegeneratePivot,
    Lp(LpError),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::RetryExhausted => write!(f, "no admissible auxiliary objective found"),
            SolveError::InvalidTable(msg) => write!(f, "invalid searching table: {msg}"),
            SolveError::IterationLimit => write!(f, "pivot iteration limit exceeded"),
            SolveError::NoSolution => write!(f, "no solution"),
            SolveError::AuditFailed(msg) => write!(f, "audit failed: {msg}"),
            SolveError::DegeneratePivot => {
                write!(f, "audited solve hit a degenerate tie below the strict-increase floor")
            }
            SolveError::Lp(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SolveError {}

impl From<LpError> for SolveError {
    fn from(e: LpError) -> Self {
        SolveError::Lp(e)
    }
}

/// Auxiliary objective `u` maximized at the initial vertex, expressed as a
/// strictly positive combination of the initial active rows.
#[derive(Clone, Debug)]
pub struct AuxiliaryObjective {
    pub u: Vec<f64>,
    pub beta0: Vec<f64>,
}

/// The searching table tied to an ordered active set.
#[derive(Clone, Debug)]
pub struct SearchTable {
    pub active_set: Vec<usize>,
    /// Representation of `c` in the active basis.
    pub alpha: Vec<f64>,
    /// Representation of `u` in the active basis.
    pub beta: Vec<f64>,
    /// Negated objective value at the vertex.
    pub qc: f64,
    /// Negated auxiliary objective value at the vertex.
    pub qu: f64,
    /// One row per constraint: its representation in the active basis.
    pub gamma: Matrix,
    /// One slack per constraint (zero on active rows).
    pub phi: Vec<f64>,
}

impl SearchTable {
    /// Build the table for an arbitrary basis by direct solves against the
    /// active rows. Also serves as the periodic refactorization.
    pub fn from_active_set(
        lp: &CanonicalLp,
        active: &[usize],
        u: &[f64],
    ) -> Result<SearchTable, SolveError> {
        let n = lp.n();
        let rows = lp.row_count();
        if active.len() != n {
            return Err(SolveError::InvalidTable(format!("active set must have {n} rows")));
        }
        let sub_t = lp.a.select_rows(active).transpose();
        let lu = Lu::factor(&sub_t).ok_or(SolveError::Lp(LpError::SingularBasis))?;
        let alpha = lu.solve(&lp.c);
        let beta = lu.solve(u);
        let b_active: Vec<f64> = active.iter().map(|&i| lp.b[i]).collect();
        let qc = -dot(&alpha, &b_active);
        let qu = -dot(&beta, &b_active);

        let mut position = vec![usize::MAX; rows];
        for (j, &i) in active.iter().enumerate() {
            position[i] = j;
        }
        let mut gamma = Matrix::zeros(rows, n);
        let mut phi = vec![0.0; rows];
        for i in 0..rows {
            if position[i] != usize::MAX {
                gamma.set(i, position[i], 1.0);
            } else {
                let gi = lu.solve(lp.a.row(i));
                phi[i] = lp.b[i] - dot(&gi, &b_active);
                gamma.row_mut(i).copy_from_slice(&gi);
            }
        }
        Ok(SearchTable { active_set: active.to_vec(), alpha, beta, qc, qu, gamma, phi })
    }

    /// Objective value at the vertex this table describes.
    pub fn objective_value(&self) -> f64 {
        -self.qc
    }

    /// The auxiliary objective is constant along a solve; recover it from
    /// the current representation.
    pub fn reconstruct_u(&self, lp: &CanonicalLp) -> Vec<f64> {
        let n = lp.n();
        let mut u = vec![0.0; n];
        for (j, &row) in self.active_set.iter().enumerate() {
            let a = lp.a.row(row);
            for i in 0..n {
                u[i] += self.beta[j] * a[i];
            }
        }
        u
    }
}

fn normalized_det(rows: &[Vec<f64>]) -> f64 {
    let scaled: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let s = r.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
            r.iter().map(|v| v / s).collect()
        })
        .collect();
    match Lu::factor(&Matrix::from_rows(scaled)) {
        Some(lu) => lu.det().abs(),
        None => 0.0,
    }
}

fn screen_auxiliary(lp: &CanonicalLp, active: &[usize], u: &[f64]) -> bool {
    let c = &lp.c;
    // u must keep a component orthogonal to c
    let cc = dot(c, c);
    let proj = dot(u, c) / cc;
    let mut residual: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..u.len() {
        residual = residual.max((u[i] - proj * c[i]).abs());
        scale = scale.max(u[i].abs());
    }
    if residual <= SCREEN_TOL * scale.max(1.0) {
        return false;
    }
    // the initial basis must be solidly invertible
    let rows: Vec<Vec<f64>> = active.iter().map(|&i| lp.a.row(i).to_vec()).collect();
    normalized_det(&rows) > SCREEN_TOL
}

/// Pick `beta0 > 0` so that `u = sum beta0_j A_active_j` is non-parallel to
/// `c` and passes the general-position screen. The all-ones choice is tried
/// first; up to 10 randomized draws (each entry uniform in [0.5, 1.5])
/// follow, seeded deterministically from the LP content.
pub fn choose_auxiliary(
    lp: &CanonicalLp,
    omega0: &[usize],
) -> Result<AuxiliaryObjective, SolveError> {
    let n = lp.n();
    if omega0.len() != n {
        return Err(SolveError::Lp(LpError::InvalidInput(
            "initial active set has wrong size".into(),
        )));
    }
    let mut rng = SplitMix64::stream(lp.digest(), 0xa0);
    for attempt in 0..=10 {
        let beta0: Vec<f64> = if attempt == 0 {
            vec![1.0; n]
        } else {
            (0..n).map(|_| rng.uniform(0.5, 1.5)).collect()
        };
        let mut u = vec![0.0; n];
        for (j, &row) in omega0.iter().enumerate() {
            let a = lp.a.row(row);
            for i in 0..n {
                u[i] += beta0[j] * a[i];
            }
        }
        if screen_auxiliary(lp, omega0, &u) {
            return Ok(AuxiliaryObjective { u, beta0 });
        }
    }
    Err(SolveError::RetryExhausted)
}

fn is_simplex_game_shape(lp: &CanonicalLp) -> bool {
    let n = lp.n();
    let m = lp.normal_count;
    if lp.row_count() != m + n || m == 0 || n < 2 {
        return false;
    }
    let mut c_ok = lp.c[n - 1] == 1.0;
    for &v in &lp.c[..n - 1] {
        c_ok &= v == 0.0;
    }
    if !c_ok {
        return false;
    }
    let sum_row = lp.a.row(m);
    if lp.b[m] != 1.0 || sum_row[n - 1] != 0.0 || sum_row[..n - 1].iter().any(|&v| v != 1.0) {
        return false;
    }
    for i in 0..n - 1 {
        let r = lp.a.row(m + 1 + i);
        if lp.b[m + 1 + i] != 0.0 {
            return false;
        }
        for (j, &v) in r.iter().enumerate() {
            if v != if j == i { -1.0 } else { 0.0 } {
                return false;
            }
        }
    }
    (0..m).all(|j| lp.a.get(j, n - 1) == 1.0)
}

/// Searching table and start vertex for a simplex-variant game LP.
///
/// The start vertex puts all mass on the last action at its worst payoff:
/// the active set is the normal row achieving `min_j b_j` (lowest index on
/// ties) plus the lower-bound rows, and the table entries follow in closed
/// form without any linear solve.
pub fn init_table(lp: &CanonicalLp) -> Result<(SearchTable, Vertex), SolveError> {
    if !matches!(lp.variant, LpVariant::Simplex) || !is_simplex_game_shape(lp) {
        return Err(SolveError::Lp(LpError::InvalidInput(
            "init_table expects a simplex game LP".into(),
        )));
    }
    let n = lp.n();
    let m = lp.normal_count;
    let rows = lp.row_count();

    let mut l = 0;
    for j in 1..m {
        if lp.b[j] < lp.b[l] {
            l = j;
        }
    }
    let mut omega = Vec::with_capacity(n);
    omega.push(l);
    omega.extend(m + 1..m + n);

    let aux = choose_auxiliary(lp, &omega)?;

    let mut alpha = vec![0.0; n];
    alpha[0] = 1.0;
    for j in 1..n {
        alpha[j] = lp.a.get(l, j - 1);
    }
    let mut gamma = Matrix::zeros(rows, n);
    let mut phi = vec![0.0; rows];
    for i in 0..m {
        if i == l {
            gamma.set(i, 0, 1.0);
            continue;
        }
        gamma.set(i, 0, 1.0);
        for j in 1..n {
            gamma.set(i, j, lp.a.get(l, j - 1) - lp.a.get(i, j - 1));
        }
        phi[i] = lp.b[i] - lp.b[l];
    }
    for j in 1..n {
        gamma.set(m, j, -1.0);
        gamma.set(m + j, j, 1.0);
    }
    phi[m] = lp.b[m];

    let qc = -lp.b[l];
    let qu = -aux.beta0[0] * lp.b[l];
    let mut x = vec![0.0; n];
    x[n - 1] = lp.b[l];
    let vertex = Vertex { x, active_set: omega.clone() };
    let table = SearchTable {
        active_set: omega,
        alpha,
        beta: aux.beta0,
        qc,
        qu,
        gamma,
        phi,
    };
    Ok((table, vertex))
}

/// Start table for a budgeted LP. Saturates whole actions until the budget
/// remainder fits in the last action, then activates the matching box rows;
/// the table comes from direct solves.
pub fn init_table_budgeted(lp: &CanonicalLp) -> Result<(SearchTable, Vertex), SolveError> {
    let LpVariant::Budgeted { budget } = lp.variant else {
        return Err(SolveError::Lp(LpError::InvalidInput(
            "init_table_budgeted expects a budgeted LP".into(),
        )));
    };
    let n = lp.n();
    let m = lp.normal_count;
    let q = (budget - 1.0).ceil().max(0.0) as usize;

    let mut xbar = vec![0.0; n - 1];
    for slot in xbar.iter_mut().take(q) {
        *slot = 1.0;
    }
    let mut level = f64::INFINITY;
    let mut l = 0;
    for j in 0..m {
        let v = lp.b[j] - dot(&lp.a.row(j)[..n - 1], &xbar);
        if v < level {
            level = v;
            l = j;
        }
    }
    let mut omega = Vec::with_capacity(n);
    omega.push(l);
    for i in 0..n - 1 {
        // upper box rows sit after the lower block
        omega.push(if i < q { m + n + i } else { m + 1 + i });
    }
    let aux = choose_auxiliary(lp, &omega)?;
    let table = SearchTable::from_active_set(lp, &omega, &aux.u)?;
    let mut x = xbar;
    x.push(level);
    let vertex = Vertex { x, active_set: table.active_set.clone() };
    Ok((table, vertex))
}

pub(crate) fn init_for(lp: &CanonicalLp) -> Result<(SearchTable, Vertex), SolveError> {
    match lp.variant {
        LpVariant::Simplex => init_table(lp),
        LpVariant::Budgeted { .. } => init_table_budgeted(lp),
    }
}

/// Result of one pivot attempt.
#[derive(Clone, Debug)]
pub enum PivotOutcome {
    /// Every `alpha` entry is non-negative: the vertex maximizes `c`.
    Optimal(f64),
    /// The objective is unbounded along the search direction.
    NoSolution,
    Step {
        table: SearchTable,
        moved_out: usize,
        moved_in: usize,
        /// Exact objective step `phi_l * alpha_k / gamma_lk`, non-negative
        /// by the selection rules.
        increase: f64,
    },
}

fn check_table_shape(table: &SearchTable, lp: &CanonicalLp) -> Result<(), SolveError> {
    let n = lp.n();
    let rows = lp.row_count();
    if table.active_set.len() != n
        || table.alpha.len() != n
        || table.beta.len() != n
        || table.phi.len() != rows
        || table.gamma.rows() != rows
        || table.gamma.cols() != n
    {
        return Err(SolveError::InvalidTable("dimension mismatch".into()));
    }
    let mut seen = vec![false; rows];
    for (j, &i) in table.active_set.iter().enumerate() {
        if i >= rows || seen[i] {
            return Err(SolveError::InvalidTable("bad active set".into()));
        }
        seen[i] = true;
        for jj in 0..n {
            let expect = if jj == j { 1.0 } else { 0.0 };
            if (table.gamma.get(i, jj) - expect).abs() > 1e-6 {
                return Err(SolveError::InvalidTable(format!(
                    "active row {i} lost its unit representation"
                )));
            }
        }
        if table.phi[i].abs() > 1e-6 {
            return Err(SolveError::InvalidTable(format!("active row {i} has nonzero slack")));
        }
    }
    for (i, &p) in table.phi.iter().enumerate() {
        if p < -1e-6 * (1.0 + lp.b[i].abs()) {
            return Err(SolveError::InvalidTable(format!("row {i} infeasible (phi {p})")));
        }
    }
    Ok(())
}

/// One pivot: either certify optimality, detect unboundedness, or exchange
/// one active constraint so the objective strictly improves while staying
/// feasible. Ties break toward the lowest constraint index.
pub fn pivot_step(table: &SearchTable, lp: &CanonicalLp) -> Result<PivotOutcome, SolveError> {
    check_table_shape(table, lp)?;
    let n = lp.n();
    let rows = lp.row_count();

    if table.alpha.iter().all(|&a| a >= -SIGN_EPS) {
        return Ok(PivotOutcome::Optimal(-table.qc));
    }

    // moving-out position: the representation coefficient that hits zero
    // first as the search direction rotates toward c. Strict comparison on
    // an ascending scan keeps the lowest index on exact ties.
    let mut k = usize::MAX;
    let mut best = f64::INFINITY;
    for i in 0..n {
        if table.alpha[i] < -SIGN_EPS {
            let ratio = -table.beta[i] / table.alpha[i];
            if ratio < best {
                best = ratio;
                k = i;
            }
        }
    }
    debug_assert_ne!(k, usize::MAX);

    let mut active = vec![false; rows];
    for &i in &table.active_set {
        active[i] = true;
    }

    // moving-in row: the tightest blocking constraint keeps all slacks
    // non-negative, so the argmax must be exact
    let mut l = usize::MAX;
    let mut best_ratio = f64::NEG_INFINITY;
    for i in 0..rows {
        if active[i] {
            continue;
        }
        let g = table.gamma.get(i, k);
        if g < -SIGN_EPS {
            let ratio = table.phi[i] / g;
            if ratio > best_ratio {
                best_ratio = ratio;
                l = i;
            }
        }
    }
    if l == usize::MAX {
        return Ok(PivotOutcome::NoSolution);
    }

    let out_row = table.active_set[k];
    let denom = table.gamma.get(l, k);
    let pivot_row: Vec<f64> = table.gamma.row(l).to_vec();
    let phi_l = table.phi[l];
    let alpha_k = table.alpha[k];
    let beta_k = table.beta[k];

    let mut next = table.clone();
    next.active_set[k] = l;
    active[out_row] = false;
    active[l] = true;

    for j in 0..n {
        if j == k {
            next.alpha[j] = alpha_k / denom;
            next.beta[j] = beta_k / denom;
        } else {
            next.alpha[j] -= alpha_k * pivot_row[j] / denom;
            next.beta[j] -= beta_k * pivot_row[j] / denom;
        }
    }
    for i in 0..rows {
        if active[i] {
            if i == l {
                let row = next.gamma.row_mut(i);
                row.fill(0.0);
                row[k] = 1.0;
            }
            next.phi[i] = 0.0;
        } else {
            let ratio = table.gamma.get(i, k) / denom;
            for j in 0..n {
                if j == k {
                    next.gamma.set(i, j, ratio);
                } else {
                    next.gamma.set(i, j, table.gamma.get(i, j) - ratio * pivot_row[j]);
                }
            }
            next.phi[i] = table.phi[i] - ratio * phi_l;
        }
    }
    let increase = phi_l * alpha_k / denom;
    next.qc -= increase;
    next.qu -= phi_l * beta_k / denom;

    Ok(PivotOutcome::Step { table: next, moved_out: out_row, moved_in: l, increase })
}

/// Check every representation identity of a searching table. Returns one
/// message per violated identity; empty means the table is sound.
pub fn verify_table(table: &SearchTable, lp: &CanonicalLp) -> Vec<String> {
    let mut diags = Vec::new();
    let n = lp.n();
    let rows = lp.row_count();
    if table.active_set.len() != n
        || table.alpha.len() != n
        || table.beta.len() != n
        || table.phi.len() != rows
        || table.gamma.rows() != rows
        || table.gamma.cols() != n
    {
        diags.push("dimension mismatch".to_string());
        return diags;
    }
    let scale = lp.a.max_abs().max(1.0);
    let tol = TABLE_TOL * scale;
    let b_active: Vec<f64> = table.active_set.iter().map(|&i| lp.b[i]).collect();

    let combine = |coeff: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (j, &row) in table.active_set.iter().enumerate() {
            let a = lp.a.row(row);
            for i in 0..n {
                out[i] += coeff[j] * a[i];
            }
        }
        out
    };

    let c_hat = combine(&table.alpha);
    if c_hat.iter().zip(&lp.c).any(|(a, b)| (a - b).abs() > tol) {
        diags.push("c-representation identity violated".to_string());
    }
    for i in 0..rows {
        let row = table.gamma.row(i);
        let a_hat = combine(row);
        if a_hat.iter().zip(lp.a.row(i)).any(|(x, y)| (x - y).abs() > tol) {
            diags.push(format!("gamma identity violated for row {i}"));
        }
        let phi_expected = lp.b[i] - dot(row, &b_active);
        if (table.phi[i] - phi_expected).abs() > tol * (1.0 + lp.b[i].abs()) {
            diags.push(format!("phi identity violated for row {i}"));
        }
        if table.phi[i] < -SIGN_EPS {
            diags.push(format!("phi feasibility violated for row {i} (phi {})", table.phi[i]));
        }
    }
    for (j, &i) in table.active_set.iter().enumerate() {
        let unit_ok = (0..n)
            .all(|jj| (table.gamma.get(i, jj) - if jj == j { 1.0 } else { 0.0 }).abs() <= tol);
        if !unit_ok || table.phi[i].abs() > tol {
            diags.push(format!("active row {i} is not in unit form"));
        }
    }
    if (table.qc + dot(&table.alpha, &b_active)).abs() > tol * (1.0 + table.qc.abs()) {
        diags.push("Qc identity violated".to_string());
    }
    if (table.qu + dot(&table.beta, &b_active)).abs() > tol * (1.0 + table.qu.abs()) {
        diags.push("Qu identity violated".to_string());
    }
    match vertex_from_active_set(lp, &table.active_set) {
        Ok(v) => {
            if (dot(&lp.c, &v.x) - table.objective_value()).abs() > tol * (1.0 + table.qc.abs()) {
                diags.push("objective value disagrees with the active-set vertex".to_string());
            }
        }
        Err(_) => diags.push("active basis is singular".to_string()),
    }
    diags
}

/// One visited vertex with its table snapshot.
#[derive(Clone, Debug)]
pub struct PathEntry {
    pub vertex: Vertex,
    pub table: SearchTable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathStatus {
    Optimal,
    Truncated,
}

/// The ordered sequence of visited shadow vertices, persisted so later
/// solves of extended games can warm-start.
#[derive(Clone, Debug)]
pub struct SearchPath {
    pub entries: Vec<PathEntry>,
    pub status: PathStatus,
}

impl SearchPath {
    pub fn pivot_count(&self) -> usize {
        self.entries.len().saturating_sub(1)
    }

    pub fn last(&self) -> Option<&PathEntry> {
        self.entries.last()
    }

    /// Structural diagnostics: adjacency of consecutive active sets,
    /// non-decreasing objective, feasibility of every vertex, sound tables,
    /// and one shared auxiliary objective across all snapshots.
    pub fn verify(&self, lp: &CanonicalLp) -> Vec<String> {
        let mut diags = Vec::new();
        if self.entries.is_empty() {
            diags.push("empty path".to_string());
            return diags;
        }
        let n = lp.n();
        for (idx, entry) in self.entries.iter().enumerate() {
            for d in verify_table(&entry.table, lp) {
                diags.push(format!("entry {idx}: {d}"));
            }
            if !lp.is_feasible(&entry.vertex.x, TABLE_TOL) {
                diags.push(format!("entry {idx}: vertex infeasible"));
            }
            if entry.vertex.active_set != entry.table.active_set {
                diags.push(format!("entry {idx}: vertex and table active sets disagree"));
            }
            // the strategy-block rows are collectively dependent, so a
            // sound basis never draws all n members from them
            let block = entry
                .table
                .active_set
                .iter()
                .filter(|&&i| i >= lp.prob_block_start)
                .count();
            if block == n {
                diags.push(format!("entry {idx}: active set lies entirely in the strategy block"));
            }
        }
        for (idx, pair) in self.entries.windows(2).enumerate() {
            let prev: &PathEntry = &pair[0];
            let next: &PathEntry = &pair[1];
            let shared = prev
                .table
                .active_set
                .iter()
                .filter(|i| next.table.active_set.contains(i))
                .count();
            if shared != n - 1 {
                diags.push(format!("entries {idx}-{}: not adjacent", idx + 1));
            }
            if next.table.objective_value() < prev.table.objective_value() - SIGN_EPS {
                diags.push(format!("entries {idx}-{}: objective decreased", idx + 1));
            }
        }
        let u0 = self.entries[0].table.reconstruct_u(lp);
        let scale = u0.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        for (idx, entry) in self.entries.iter().enumerate().skip(1) {
            let ui = entry.table.reconstruct_u(lp);
            if ui.iter().zip(&u0).any(|(a, b)| (a - b).abs() > 1e-6 * scale) {
                diags.push(format!("entry {idx}: auxiliary objective drifted"));
            }
        }
        diags
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SolveOptions {
    /// Check strict objective increase on every pivot and run full table
    /// verification periodically, failing the solve on any violation.
    pub audit: bool,
}

pub(crate) struct Driven {
    pub table: SearchTable,
    pub value: f64,
    pub pivots: usize,
}

pub(crate) fn pivot_limit(lp: &CanonicalLp) -> usize {
    10 * binomial_capped(lp.row_count() as u64, lp.n() as u64, 1_000_000) as usize
}

/// Run pivots to optimality. `visit` sees the table after every accepted
/// step (post-refactorization, so snapshots match the live table).
pub(crate) fn drive_to_optimum(
    lp: &CanonicalLp,
    mut table: SearchTable,
    opts: &SolveOptions,
    mut visit: impl FnMut(&SearchTable) -> Result<(), SolveError>,
) -> Result<Driven, SolveError> {
    let u = table.reconstruct_u(lp);
    let limit = pivot_limit(lp);
    let mut pivots = 0usize;
    let mut prev_value = table.objective_value();
    loop {
        match pivot_step(&table, lp)? {
            PivotOutcome::Optimal(_) => {
                // rebuild from the basis so the reported value carries no
                // drift from the rank-one update chain
                table = SearchTable::from_active_set(lp, &table.active_set, &u)?;
                let value = table.objective_value();
                return Ok(Driven { table, value, pivots });
            }
            PivotOutcome::NoSolution => return Err(SolveError::NoSolution),
            PivotOutcome::Step { table: next, increase, .. } => {
                pivots += 1;
                if pivots > limit {
                    return Err(SolveError::IterationLimit);
                }
                if opts.audit {
                    let measured = next.objective_value() - prev_value;
                    if increase.is_nan() || increase < 0.0 || measured < -MONOTONE_EPS {
                        return Err(SolveError::AuditFailed(format!(
                            "objective moved by {measured:.3e} (step term {increase:.3e}) \
                             at pivot {pivots}"
                        )));
                    }
                    if increase <= MONOTONE_EPS {
                        return Err(SolveError::DegeneratePivot);
                    }
                }
                table = next;
                if pivots % REFACTOR_INTERVAL == 0 {
                    table = SearchTable::from_active_set(lp, &table.active_set, &u)?;
                }
                if opts.audit && pivots % AUDIT_INTERVAL == 0 {
                    let diags = verify_table(&table, lp);
                    if !diags.is_empty() {
                        return Err(SolveError::AuditFailed(diags.join("; ")));
                    }
                }
                prev_value = table.objective_value();
                visit(&table)?;
            }
        }
    }
}

/// Solve a canonical game LP, recording the full search path.
pub fn solve(lp: &CanonicalLp) -> Result<(Solution, SearchPath), SolveError> {
    solve_with(lp, &SolveOptions::default())
}

pub fn solve_with(
    lp: &CanonicalLp,
    opts: &SolveOptions,
) -> Result<(Solution, SearchPath), SolveError> {
    let (table, vertex) = init_for(lp)?;
    let mut entries = vec![PathEntry { vertex, table: table.clone() }];
    let driven = drive_to_optimum(lp, table, opts, |t| {
        let v = vertex_from_active_set(lp, &t.active_set)?;
        entries.push(PathEntry { vertex: v, table: t.clone() });
        Ok(())
    })?;
    // keep the final snapshot identical to the terminating table
    if let Some(last) = entries.last_mut() {
        last.table = driven.table;
    }
    let last = entries.last().expect("nonempty path");
    let (strategy, _) = crate::lp::recover_strategy(lp, &last.vertex.x);
    let solution =
        Solution { x: last.vertex.x.clone(), value: driven.value, strategy, status: Status::Optimal };
    Ok((solution, SearchPath { entries, status: PathStatus::Optimal }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::matches_exact;
    use crate::lp::{
        canonicalize, canonicalize_budgeted, extend_with_action, solve_oracle, PayoffMatrix,
    };

    fn matching_pennies_lp() -> CanonicalLp {
        canonicalize(&PayoffMatrix::new(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap())
    }

    fn zero_game_lp() -> CanonicalLp {
        canonicalize(&PayoffMatrix::new(vec![vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap())
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn auxiliary_all_ones_for_matching_pennies() {
        let lp = matching_pennies_lp();
        let aux = choose_auxiliary(&lp, &[0, 3]).unwrap();
        assert_eq!(aux.beta0, vec![1.0, 1.0]);
        assert_eq!(aux.u, vec![-3.0, 1.0]);
    }

    #[test]
    fn auxiliary_for_zero_game_ignores_c() {
        let lp = zero_game_lp();
        let aux = choose_auxiliary(&lp, &[0, 3]).unwrap();
        assert_eq!(aux.u, vec![-1.0, 1.0]);
    }

    #[test]
    fn auxiliary_retries_when_parallel() {
        // column [0, 1] makes row 0 equal [1, 1]; together with [-1, 0] the
        // all-ones combination collapses onto c
        let g = PayoffMatrix::new(vec![vec![0.0, 5.0], vec![1.0, 2.0]]).unwrap();
        let lp = canonicalize(&g);
        let aux = choose_auxiliary(&lp, &[0, 3]).unwrap();
        assert_ne!(aux.beta0, vec![1.0, 1.0], "retry path not taken");
        let cos = aux.u[1] / (aux.u[0] * aux.u[0] + aux.u[1] * aux.u[1]).sqrt();
        assert!(cos.abs() < 1.0 - 1e-9);
    }

    #[test]
    fn init_table_matching_pennies_closed_form() {
        let lp = matching_pennies_lp();
        let (table, vertex) = init_table(&lp).unwrap();
        assert_eq!(table.active_set, vec![0, 3]);
        assert_eq!(vertex.x, vec![0.0, -1.0]);
        assert_eq!(table.alpha, vec![1.0, -2.0]);
        assert_eq!(table.qc, 1.0);
        assert_eq!(table.gamma.row(1), &[1.0, -4.0]);
        assert_eq!(table.phi[1], 2.0);
        assert_eq!(table.gamma.row(2), &[0.0, -1.0]);
        assert_eq!(table.phi[2], 1.0);
        assert_eq!(table.gamma.row(3), &[0.0, 1.0]);
        assert_eq!(table.phi[3], 0.0);
        assert!(verify_table(&table, &lp).is_empty());

        // closed forms must agree with direct solves
        let direct = SearchTable::from_active_set(&lp, &table.active_set, &table.reconstruct_u(&lp))
            .unwrap();
        for j in 0..2 {
            assert_close(direct.alpha[j], table.alpha[j], 1e-12);
            assert_close(direct.beta[j], table.beta[j], 1e-12);
        }
        for i in 0..lp.row_count() {
            assert_close(direct.phi[i], table.phi[i], 1e-12);
            for j in 0..2 {
                assert_close(direct.gamma.get(i, j), table.gamma.get(i, j), 1e-12);
            }
        }
        assert_close(direct.qc, table.qc, 1e-12);
        assert_close(direct.qu, table.qu, 1e-12);
    }

    #[test]
    fn init_zero_game_already_optimal() {
        let lp = zero_game_lp();
        let (table, _) = init_table(&lp).unwrap();
        assert_eq!(table.active_set[0], 0, "lowest-index tie-break");
        assert_eq!(table.alpha, vec![1.0, 0.0]);
        match pivot_step(&table, &lp).unwrap() {
            PivotOutcome::Optimal(v) => assert_close(v, 0.0, 1e-12),
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn lowest_index_tie_break_on_init() {
        let g = PayoffMatrix::new(vec![vec![3.0, 4.0], vec![1.0, 1.0]]).unwrap();
        let (table, _) = init_table(&canonicalize(&g)).unwrap();
        assert_eq!(table.active_set[0], 0);
    }

    #[test]
    fn pivot_trace_matching_pennies() {
        let lp = matching_pennies_lp();
        let (table, _) = init_table(&lp).unwrap();
        let step = match pivot_step(&table, &lp).unwrap() {
            PivotOutcome::Step { table, moved_out, moved_in, increase } => {
                assert!(increase > 0.0);
                assert_eq!(moved_out, 3);
                assert_eq!(moved_in, 1);
                table
            }
            other => panic!("expected a step, got {other:?}"),
        };
        assert_eq!(step.active_set, vec![0, 1]);
        assert_close(step.qc, 0.0, 1e-12);
        assert_close(step.alpha[0], 0.5, 1e-12);
        assert_close(step.alpha[1], 0.5, 1e-12);
        assert!(verify_table(&step, &lp).is_empty());
        match pivot_step(&step, &lp).unwrap() {
            PivotOutcome::Optimal(v) => assert_close(v, 0.0, 1e-12),
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn unbounded_lp_reports_no_solution() {
        // max x2 subject to -x2 <= 0, -x1 <= 0, x1 <= 1
        let a = Matrix::from_rows(vec![vec![0.0, -1.0], vec![-1.0, 0.0], vec![1.0, 0.0]]);
        let lp = CanonicalLp::from_raw(a, vec![0.0, 0.0, 1.0], vec![0.0, 1.0], 3, LpVariant::Simplex)
            .unwrap();
        let u = vec![-1.0, -1.0];
        let table = SearchTable::from_active_set(&lp, &[0, 1], &u).unwrap();
        match pivot_step(&table, &lp).unwrap() {
            PivotOutcome::NoSolution => {}
            other => panic!("expected no solution, got {other:?}"),
        }
    }

    #[test]
    fn solve_matching_pennies() {
        let lp = matching_pennies_lp();
        let (sol, path) = solve(&lp).unwrap();
        assert_close(sol.value, 0.0, 1e-12);
        assert_close(sol.strategy[0], 0.5, 1e-9);
        assert_close(sol.strategy[1], 0.5, 1e-9);
        assert_eq!(path.entries.len(), 2);
        assert_eq!(path.status, PathStatus::Optimal);
        assert!(path.verify(&lp).is_empty());
    }

    #[test]
    fn solve_zero_game_single_entry_path() {
        let (sol, path) = solve(&zero_game_lp()).unwrap();
        assert_close(sol.value, 0.0, 1e-12);
        assert_eq!(path.entries.len(), 1);
    }

    #[test]
    fn solve_identity_game_matches_oracle() {
        let lp = canonicalize(&PayoffMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap());
        let (sol, _) = solve(&lp).unwrap();
        let oracle = solve_oracle(&lp).unwrap();
        assert_close(sol.value, oracle.value, 1e-9);
        assert_close(sol.value, 0.5, 1e-9);
    }

    #[test]
    fn verify_table_flags_corruption() {
        let lp = matching_pennies_lp();
        let (table, _) = init_table(&lp).unwrap();

        let mut bad = table.clone();
        bad.alpha[0] += 1.0;
        let diags = verify_table(&bad, &lp);
        assert!(diags.iter().any(|d| d.contains("c-representation")), "{diags:?}");

        let mut bad = table.clone();
        bad.phi[1] = -1.0;
        let diags = verify_table(&bad, &lp);
        assert!(diags.iter().any(|d| d.contains("feasibility")), "{diags:?}");
    }

    #[test]
    fn pivot_rejects_corrupt_table() {
        let lp = matching_pennies_lp();
        let (mut table, _) = init_table(&lp).unwrap();
        table.phi[1] = -0.5;
        assert!(matches!(pivot_step(&table, &lp), Err(SolveError::InvalidTable(_))));
    }

    #[test]
    fn budgeted_solves_match_oracle() {
        let ident = PayoffMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        for budget in [1.0, 2.0] {
            let lp = canonicalize_budgeted(&ident, budget).unwrap();
            let (sol, path) = solve(&lp).unwrap();
            let oracle = solve_oracle(&lp).unwrap();
            assert_close(sol.value, oracle.value, 1e-9);
            assert!(path
                .verify(&lp)
                .iter()
                .all(|d| !d.contains("infeasible")), "{:?}", path.verify(&lp));
        }
    }

    #[test]
    fn random_games_agree_with_oracle_and_exact() {
        let mut rng = crate::rng::SplitMix64::new(77);
        let opts = SolveOptions { audit: true };
        for trial in 0..120 {
            let n = rng.int_range(2, 4) as usize;
            let m = rng.int_range(2, 7) as usize;
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    (0..m)
                        .map(|_| rng.int_range(-10, 10) as f64 + rng.uniform(-1e-7, 1e-7))
                        .collect()
                })
                .collect();
            let lp = canonicalize(&PayoffMatrix::new(rows).unwrap());
            let (sol, path) = solve_with(&lp, &opts).unwrap_or_else(|e| panic!("trial {trial}: {e}"));
            let oracle = solve_oracle(&lp).unwrap();
            assert_close(sol.value, oracle.value, 1e-6);
            assert!(path.verify(&lp).is_empty(), "trial {trial}: {:?}", path.verify(&lp));
            if n <= 4 {
                assert!(matches_exact(&lp, sol.value, 1e-9), "trial {trial}");
            }
            // strict increase along the recorded path
            for pair in path.entries.windows(2) {
                assert!(
                    pair[1].table.objective_value() > pair[0].table.objective_value() + 1e-12
                );
            }
        }
    }

    #[test]
    fn extended_lp_full_solve_works() {
        let lp = matching_pennies_lp();
        let ext = extend_with_action(&lp, &[-2.0, -0.5]).unwrap();
        let (sol, _) = solve(&ext).unwrap();
        assert_close(sol.value, -5.0 / 7.0, 1e-9);
        let oracle = solve_oracle(&ext).unwrap();
        assert_close(sol.value, oracle.value, 1e-9);
    }
}
