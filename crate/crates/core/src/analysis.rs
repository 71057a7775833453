//! Strategy-change statistics and the Monte Carlo growth experiment.
//!
//! The closed-form probability that adding one opponent action changes the
//! security strategy is `n / (m + 1 + n - (m+1)/C(m+n, n))`; the same ratio
//! scales the expected number of shadow vertices the warm-started search can
//! visit. The experiment harness samples random games, extends each by one
//! random column, and compares warm-started against from-scratch pivot
//! counts, writing one CSV row per opponent action-set size.

use std::fmt;
use std::io::Write;
use std::path::Path;

use crate::incremental::{iterative_solve_with, retains_optimality, ExtensionEvent};
use crate::lp::{canonicalize, PayoffMatrix};
use crate::rng::SplitMix64;
use crate::simplex::{solve_with, SolveOptions};
use crate::util::{binomial_u128, fmt_sig, ln_binomial};

#[derive(Debug)]
pub enum AnalysisError {
    InvalidInput(String),
    Io(std::io::Error),
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            AnalysisError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for AnalysisError {}

impl From<std::io::Error> for AnalysisError {
    fn from(e: std::io::Error) -> Self {
        AnalysisError::Io(e)
    }
}

/// Correction term `(m+1) / C(m+n, n)`, exact in big integers while the
/// binomial fits, log-gamma beyond.
fn correction(n: usize, m: usize) -> f64 {
    let (n64, m64) = (n as u64, m as u64);
    if n + m <= 120 {
        match binomial_u128(n64 + m64, n64) {
            Some(c) => (m64 + 1) as f64 / c as f64,
            None => 0.0,
        }
    } else {
        (((m64 + 1) as f64).ln() - ln_binomial(n64 + m64, n64)).exp()
    }
}

/// Probability that the security strategy changes when the opponent gains
/// one independent action, for n own actions against m existing ones.
pub fn prob_change(n: usize, m: usize) -> f64 {
    assert!(n >= 2 && m >= 1, "need n >= 2, m >= 1");
    n as f64 / ((m + 1 + n) as f64 - correction(n, m))
}

/// Expected fraction of shadow vertices the warm-started search can visit,
/// relative to a from-scratch search. Shares the factor of [`prob_change`].
pub fn expected_visit_ratio(n: usize, m: usize) -> f64 {
    prob_change(n, m)
}

/// Configuration of the growth experiment.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub n: usize,
    pub m_list: Vec<usize>,
    /// Trials per entry of `m_list`.
    pub trials: usize,
    pub payoff_low: i64,
    pub payoff_high: i64,
    pub seed: u64,
    /// Jitter every payoff entry by a uniform draw in (-1e-7, 1e-7) to
    /// restore general position of integer payoffs.
    pub perturbation: bool,
    /// Run solver-level invariant auditing in every trial.
    pub audit: bool,
}

impl ExperimentConfig {
    fn validate(&self) -> Result<(), AnalysisError> {
        if self.n < 2 {
            return Err(AnalysisError::InvalidInput("n must be at least 2".into()));
        }
        if self.m_list.is_empty() || self.m_list.iter().any(|&m| m == 0) {
            return Err(AnalysisError::InvalidInput("m list must be non-empty, positive".into()));
        }
        if self.trials == 0 {
            return Err(AnalysisError::InvalidInput("trials must be positive".into()));
        }
        if self.payoff_low >= self.payoff_high {
            return Err(AnalysisError::InvalidInput("payoff bounds must satisfy low < high".into()));
        }
        Ok(())
    }
}

/// Aggregated results for one opponent action-set size.
///
/// Unconditional pivot means count retained trials as zero pivots; the
/// `_given_recompute` means divide by the number of recompute events only.
#[derive(Clone, Debug)]
pub struct ExperimentRecord {
    pub m: usize,
    /// Trials that completed without a solver error.
    pub trials: usize,
    pub change_count: usize,
    pub empirical_change_prob: f64,
    pub theory_change_prob: f64,
    pub mean_pivots_iterative: f64,
    pub mean_pivots_full: f64,
    pub mean_pivots_iterative_given_recompute: f64,
    pub mean_pivots_full_given_recompute: f64,
    /// Trials aborted by a solver error (degenerate data); excluded from
    /// every statistic above.
    pub failed_trials: usize,
}

/// Sample an n-by-m payoff matrix with integer entries in [low, high].
pub fn random_payoff(
    rng: &mut SplitMix64,
    n: usize,
    m: usize,
    low: i64,
    high: i64,
    perturb: bool,
) -> PayoffMatrix {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..m)
                .map(|_| {
                    let v = rng.int_range(low, high) as f64;
                    if perturb {
                        v + rng.uniform(-1e-7, 1e-7)
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    PayoffMatrix::new(rows).expect("sampled payoff is valid")
}

/// Sample one new payoff column, independent of the existing matrix.
pub fn random_column(rng: &mut SplitMix64, n: usize, low: i64, high: i64, perturb: bool) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let v = rng.int_range(low, high) as f64;
            if perturb {
                v + rng.uniform(-1e-7, 1e-7)
            } else {
                v
            }
        })
        .collect()
}

/// Run the growth experiment: per trial, solve a random game, reveal one
/// random opponent column, test retention, and on recompute measure both the
/// warm-started and the from-scratch pivot counts. Deterministic given the
/// seed; trial `t` for the `i`-th entry of `m_list` owns the stream
/// `(seed, i << 32 | t)`.
pub fn run_growth_experiment(
    cfg: &ExperimentConfig,
) -> Result<Vec<ExperimentRecord>, AnalysisError> {
    cfg.validate()?;
    let opts = SolveOptions { audit: cfg.audit };
    let mut records = Vec::with_capacity(cfg.m_list.len());
    for (mi, &m) in cfg.m_list.iter().enumerate() {
        let mut completed = 0usize;
        let mut failed = 0usize;
        let mut changes = 0usize;
        let mut iter_pivots = 0u64;
        let mut full_pivots = 0u64;
        for t in 0..cfg.trials {
            let mut rng = SplitMix64::stream(cfg.seed, ((mi as u64) << 32) | t as u64);
            let payoff = random_payoff(
                &mut rng,
                cfg.n,
                m,
                cfg.payoff_low,
                cfg.payoff_high,
                cfg.perturbation,
            );
            let lp = canonicalize(&payoff);
            let Ok((solution, path)) = solve_with(&lp, &opts) else {
                failed += 1;
                continue;
            };
            let g = random_column(&mut rng, cfg.n, cfg.payoff_low, cfg.payoff_high, cfg.perturbation);
            let Ok(event) = ExtensionEvent::new(lp, &g, solution, path) else {
                failed += 1;
                continue;
            };
            if retains_optimality(&event.old_solution, &event.new_lp) {
                // retained solutions must be feasible in the new LP
                if !event.new_lp.is_feasible(&event.old_solution.x, 1e-7) {
                    failed += 1;
                    continue;
                }
                completed += 1;
                continue;
            }
            let fresh = solve_with(&event.new_lp, &opts);
            let iterative = iterative_solve_with(&event, &opts);
            match (fresh, iterative) {
                (Ok((_, fresh_path)), Ok(result)) => {
                    completed += 1;
                    changes += 1;
                    full_pivots += fresh_path.pivot_count() as u64;
                    iter_pivots += result.pivots_used as u64;
                }
                _ => failed += 1,
            }
        }
        let per_trial = |sum: u64| if completed == 0 { 0.0 } else { sum as f64 / completed as f64 };
        let per_change = |sum: u64| if changes == 0 { 0.0 } else { sum as f64 / changes as f64 };
        records.push(ExperimentRecord {
            m,
            trials: completed,
            change_count: changes,
            empirical_change_prob: if completed == 0 {
                0.0
            } else {
                changes as f64 / completed as f64
            },
            theory_change_prob: prob_change(cfg.n, m),
            mean_pivots_iterative: per_trial(iter_pivots),
            mean_pivots_full: per_trial(full_pivots),
            mean_pivots_iterative_given_recompute: per_change(iter_pivots),
            mean_pivots_full_given_recompute: per_change(full_pivots),
            failed_trials: failed,
        });
    }
    Ok(records)
}

pub const CSV_HEADER: &str = "m,trials,changes,empirical_p,theory_p,mean_piv_iter,mean_piv_full,mean_piv_iter_recompute,mean_piv_full_recompute";

/// Render records as CSV, floats with 10 significant digits.
pub fn records_to_csv(records: &[ExperimentRecord]) -> Result<String, AnalysisError> {
    if records.is_empty() {
        return Err(AnalysisError::InvalidInput("no records to write".into()));
    }
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.m,
            r.trials,
            r.change_count,
            fmt_sig(r.empirical_change_prob, 10),
            fmt_sig(r.theory_change_prob, 10),
            fmt_sig(r.mean_pivots_iterative, 10),
            fmt_sig(r.mean_pivots_full, 10),
            fmt_sig(r.mean_pivots_iterative_given_recompute, 10),
            fmt_sig(r.mean_pivots_full_given_recompute, 10),
        ));
    }
    Ok(out)
}

pub fn write_records_csv(
    records: &[ExperimentRecord],
    destination: &Path,
) -> Result<(), AnalysisError> {
    let csv = records_to_csv(records)?;
    let mut file = std::fs::File::create(destination)?;
    file.write_all(csv.as_bytes())?;
    Ok(())
}
