//! Game payoff matrices, their canonical max-form LPs, strategy recovery,
//! and a brute-force vertex-enumeration oracle used as ground truth by the
//! rest of the crate's tests.
//!
//! A game with payoff matrix `G` (n rows for the maximizing player, m
//! columns for the minimizing player) turns into `max c'x s.t. Ax <= b`
//! over `x = [xbar_1 .. xbar_{n-1}, value]`. The first `normal_count` rows
//! of `A` encode the opponent's columns ("normal constraints"); the
//! remaining rows keep the strategy inside the simplex, or inside the
//! budgeted box for checkpoint games.

use std::fmt;

use crate::matrix::{dot, solve_square, Lu, Matrix};
use crate::tol::SIGN_EPS;
use crate::util::{fmt_f64_exact, fnv1a64};

#[derive(Clone, Debug, PartialEq)]
pub enum LpError {
    /// Malformed input (dimensions, non-finite entries, bad index lists).
    InvalidInput(String),
    /// The selected rows do not form an invertible basis.
    SingularBasis,
    /// Instance exceeds the combinatorial guard of the oracle.
    TooLarge,
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            LpError::SingularBasis => write!(f, "active set has a singular basis"),
            LpError::TooLarge => write!(f, "instance too large for brute-force enumeration"),
        }
    }
}

impl std::error::Error for LpError {}

/// Payoff matrix of a two-player zero-sum game. Rows are the maximizing
/// player's actions (n >= 2), columns the minimizing player's (m >= 1).
#[derive(Clone, Debug, PartialEq)]
pub struct PayoffMatrix {
    entries: Matrix,
}

impl PayoffMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, LpError> {
        let n = rows.len();
        if n < 2 {
            return Err(LpError::InvalidInput("need at least 2 row actions".into()));
        }
        let m = rows[0].len();
        if m < 1 {
            return Err(LpError::InvalidInput("need at least 1 column action".into()));
        }
        for row in &rows {
            if row.len() != m {
                return Err(LpError::InvalidInput("ragged payoff rows".into()));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(LpError::InvalidInput("non-finite payoff entry".into()));
            }
        }
        Ok(Self { entries: Matrix::from_rows(rows) })
    }

    /// Number of row-player actions (n).
    pub fn actions(&self) -> usize {
        self.entries.rows()
    }

    /// Number of column-player actions (m).
    pub fn opponent_actions(&self) -> usize {
        self.entries.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries.get(i, j)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.actions()).map(|i| self.entries.get(i, j)).collect()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.entries
    }

    /// Copy with one extra opponent column appended.
    pub fn with_column(&self, g: &[f64]) -> Result<PayoffMatrix, LpError> {
        if g.len() != self.actions() {
            return Err(LpError::InvalidInput("column length mismatch".into()));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(LpError::InvalidInput("non-finite payoff entry".into()));
        }
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(self.actions());
        for i in 0..self.actions() {
            let mut row: Vec<f64> = self.entries.row(i).to_vec();
            row.push(g[i]);
            rows.push(row);
        }
        PayoffMatrix::new(rows)
    }

    /// Parse the plain-text matrix format: first line `n m`, then n lines of
    /// m space-separated numbers. Lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self, LpError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (lno, header) = lines
            .next()
            .ok_or_else(|| LpError::InvalidInput("empty matrix file".into()))?;
        let dims: Vec<&str> = header.split_whitespace().collect();
        if dims.len() != 2 {
            return Err(LpError::InvalidInput(format!("line {}: expected 'n m'", lno + 1)));
        }
        let n: usize = dims[0]
            .parse()
            .map_err(|_| LpError::InvalidInput(format!("line {}: bad n", lno + 1)))?;
        let m: usize = dims[1]
            .parse()
            .map_err(|_| LpError::InvalidInput(format!("line {}: bad m", lno + 1)))?;
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let (lno, line) = lines
                .next()
                .ok_or_else(|| LpError::InvalidInput(format!("expected {n} payoff rows")))?;
            let row: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse).collect();
            let row = row
                .map_err(|_| LpError::InvalidInput(format!("line {}: bad number", lno + 1)))?;
            if row.len() != m {
                return Err(LpError::InvalidInput(format!(
                    "line {}: expected {m} entries, got {}",
                    lno + 1,
                    row.len()
                )));
            }
            rows.push(row);
        }
        PayoffMatrix::new(rows)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.actions(), self.opponent_actions());
        for i in 0..self.actions() {
            let row: Vec<String> = self.entries.row(i).iter().map(|v| format!("{v}")).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Which canonical shape the LP carries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LpVariant {
    /// Strategy is a probability vector over the row actions.
    Simplex,
    /// Checkpoint game: per-action mass in [0, 1] summing to the budget.
    Budgeted { budget: f64 },
}

impl LpVariant {
    /// Total strategy mass (1 for the simplex shape, the budget otherwise).
    pub fn mass(&self) -> f64 {
        match self {
            LpVariant::Simplex => 1.0,
            LpVariant::Budgeted { budget } => *budget,
        }
    }
}

/// Canonical inequality form `max c'x s.t. Ax <= b` with constraint-block
/// bookkeeping. Rows `0..normal_count` come from opponent columns; rows from
/// `prob_block_start` on keep the recovered strategy feasible.
#[derive(Clone, Debug)]
pub struct CanonicalLp {
    pub a: Matrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub normal_count: usize,
    pub prob_block_start: usize,
    pub variant: LpVariant,
}

impl CanonicalLp {
    /// Number of variables.
    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn row_count(&self) -> usize {
        self.a.rows()
    }

    /// Wrap a raw inequality system. Intended for tests and tools that need
    /// LPs outside the two game shapes.
    pub fn from_raw(
        a: Matrix,
        b: Vec<f64>,
        c: Vec<f64>,
        normal_count: usize,
        variant: LpVariant,
    ) -> Result<Self, LpError> {
        if a.rows() != b.len() || a.cols() != c.len() {
            return Err(LpError::InvalidInput("dimension mismatch".into()));
        }
        if normal_count > a.rows() {
            return Err(LpError::InvalidInput("normal_count exceeds row count".into()));
        }
        Ok(Self { a, b, c, normal_count, prob_block_start: normal_count, variant })
    }

    /// Slack of constraint `i` at `x` (non-negative means satisfied).
    pub fn slack(&self, i: usize, x: &[f64]) -> f64 {
        self.b[i] - dot(self.a.row(i), x)
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        (0..self.row_count()).all(|i| self.slack(i, x) >= -tol * (1.0 + self.b[i].abs()))
    }

    /// Content digest over (A, b, c, variant), used to reject stale
    /// warm-start state.
    pub fn digest(&self) -> u64 {
        let mut text = String::new();
        text.push_str(&format!("{} {} {}", self.row_count(), self.n(), self.normal_count));
        match self.variant {
            LpVariant::Simplex => text.push_str(" simplex"),
            LpVariant::Budgeted { budget } => {
                text.push_str(" budgeted ");
                text.push_str(&fmt_f64_exact(budget));
            }
        }
        for i in 0..self.row_count() {
            for v in self.a.row(i) {
                text.push(' ');
                text.push_str(&fmt_f64_exact(*v));
            }
            text.push(' ');
            text.push_str(&fmt_f64_exact(self.b[i]));
        }
        for v in &self.c {
            text.push(' ');
            text.push_str(&fmt_f64_exact(*v));
        }
        fnv1a64(text.as_bytes())
    }
}

/// Constraint row for one opponent column: `[g_n - g_1, .., g_n - g_{n-1}, 1]`.
fn action_row(column: &[f64]) -> Vec<f64> {
    let n = column.len();
    let mut row = vec![0.0; n];
    for i in 0..n - 1 {
        row[i] = column[n - 1] - column[i];
    }
    row[n - 1] = 1.0;
    row
}

fn build_canonical(payoff: &PayoffMatrix, variant: LpVariant) -> CanonicalLp {
    let n = payoff.actions();
    let m = payoff.opponent_actions();
    let mass = variant.mass();
    let budgeted = matches!(variant, LpVariant::Budgeted { .. });

    let total_rows = if budgeted { m + 2 * n } else { m + n };
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(total_rows);
    let mut b: Vec<f64> = Vec::with_capacity(total_rows);

    for j in 0..m {
        rows.push(action_row(&payoff.column(j)));
        b.push(mass * payoff.get(n - 1, j));
    }
    // mass of the n-th action stays non-negative
    let mut sum_row = vec![1.0; n];
    sum_row[n - 1] = 0.0;
    rows.push(sum_row);
    b.push(mass);
    // lower bounds on the first n-1 actions
    for i in 0..n - 1 {
        let mut r = vec![0.0; n];
        r[i] = -1.0;
        rows.push(r);
        b.push(0.0);
    }
    if budgeted {
        // upper bounds on the first n-1 actions
        for i in 0..n - 1 {
            let mut r = vec![0.0; n];
            r[i] = 1.0;
            rows.push(r);
            b.push(1.0);
        }
        // mass of the n-th action stays at most 1
        let mut r = vec![-1.0; n];
        r[n - 1] = 0.0;
        rows.push(r);
        b.push(1.0 - mass);
    }

    let mut c = vec![0.0; n];
    c[n - 1] = 1.0;
    CanonicalLp { a: Matrix::from_rows(rows), b, c, normal_count: m, prob_block_start: m, variant }
}

/// Canonical LP whose optimum is the game value and (after
/// [`recover_strategy`]) the row player's security strategy.
pub fn canonicalize(payoff: &PayoffMatrix) -> CanonicalLp {
    build_canonical(payoff, LpVariant::Simplex)
}

/// Canonical LP of the budgeted checkpoint game: per-action mass in [0, 1]
/// with total mass `budget`. Accepts 0 <= budget <= n.
pub fn canonicalize_budgeted(payoff: &PayoffMatrix, budget: f64) -> Result<CanonicalLp, LpError> {
    let n = payoff.actions() as f64;
    if !budget.is_finite() || !(0.0..=n).contains(&budget) {
        return Err(LpError::InvalidInput(format!("budget {budget} outside [0, {n}]")));
    }
    Ok(build_canonical(payoff, LpVariant::Budgeted { budget }))
}

/// New LP after the opponent gains the action with payoff column `g`: the
/// corresponding constraint row is inserted directly after the existing
/// normal rows, shifting the strategy block up by one.
pub fn extend_with_action(lp: &CanonicalLp, g: &[f64]) -> Result<CanonicalLp, LpError> {
    if g.len() != lp.n() {
        return Err(LpError::InvalidInput("new column length mismatch".into()));
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(LpError::InvalidInput("non-finite column entry".into()));
    }
    let row = action_row(g);
    let rhs = lp.variant.mass() * g[g.len() - 1];
    let at = lp.normal_count;
    let a = lp.a.with_row_inserted(at, &row);
    let mut b = lp.b.clone();
    b.insert(at, rhs);
    Ok(CanonicalLp {
        a,
        b,
        c: lp.c.clone(),
        normal_count: lp.normal_count + 1,
        prob_block_start: lp.prob_block_start + 1,
        variant: lp.variant,
    })
}

/// Map a canonical-space point back to the mixed strategy and the value:
/// the last strategy entry absorbs the remaining mass.
pub fn recover_strategy(lp: &CanonicalLp, x: &[f64]) -> (Vec<f64>, f64) {
    let n = lp.n();
    assert_eq!(x.len(), n, "point has wrong dimension");
    let mut strategy = Vec::with_capacity(n);
    let mut used = 0.0;
    for &v in &x[..n - 1] {
        strategy.push(v);
        used += v;
    }
    strategy.push(lp.variant.mass() - used);
    (strategy, x[n - 1])
}

/// A vertex of the feasible polytope: the point together with the ordered
/// active set that determines it.
#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub x: Vec<f64>,
    pub active_set: Vec<usize>,
}

/// Solve `A_active x = b_active` for the vertex the active set describes.
pub fn vertex_from_active_set(lp: &CanonicalLp, active: &[usize]) -> Result<Vertex, LpError> {
    let n = lp.n();
    if active.len() != n {
        return Err(LpError::InvalidInput(format!("active set must have {n} rows")));
    }
    if active.iter().any(|&i| i >= lp.row_count()) {
        return Err(LpError::InvalidInput("active index out of range".into()));
    }
    let sub = lp.a.select_rows(active);
    let rhs: Vec<f64> = active.iter().map(|&i| lp.b[i]).collect();
    let x = solve_square(&sub, &rhs).ok_or(LpError::SingularBasis)?;
    Ok(Vertex { x, active_set: active.to_vec() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Optimal,
    NoSolution,
}

/// An optimum of a canonical LP together with the recovered mixed strategy.
#[derive(Clone, Debug)]
pub struct Solution {
    pub x: Vec<f64>,
    pub value: f64,
    pub strategy: Vec<f64>,
    pub status: Status,
}

fn for_each_combination(items: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > items {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        // advance lexicographically
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + items - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Independent ground truth: enumerate every n-subset of constraints, solve
/// each square system, keep the feasible vertices, return the one with the
/// largest objective. Guarded to small instances.
pub fn solve_oracle(lp: &CanonicalLp) -> Result<Solution, LpError> {
    let n = lp.n();
    let rows = lp.row_count();
    if rows > 40 || n > 8 {
        return Err(LpError::TooLarge);
    }
    let mut best: Option<Vertex> = None;
    let mut best_value = f64::NEG_INFINITY;
    for_each_combination(rows, n, |subset| {
        let sub = lp.a.select_rows(subset);
        let lu = match Lu::factor(&sub) {
            Some(lu) => lu,
            None => return,
        };
        let rhs: Vec<f64> = subset.iter().map(|&i| lp.b[i]).collect();
        let x = lu.solve(&rhs);
        if !lp.is_feasible(&x, SIGN_EPS) {
            return;
        }
        let value = x[n - 1];
        if value > best_value {
            best_value = value;
            best = Some(Vertex { x, active_set: subset.to_vec() });
        }
    });
    match best {
        Some(v) => {
            let (strategy, value) = recover_strategy(lp, &v.x);
            Ok(Solution { x: v.x, value, strategy, status: Status::Optimal })
        }
        None => Ok(Solution {
            x: Vec::new(),
            value: f64::NAN,
            strategy: Vec::new(),
            status: Status::NoSolution,
        }),
    }
}
