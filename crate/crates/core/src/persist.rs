//! Versioned text persistence for search paths.
//!
//! A state file carries the payoff matrix, the LP variant, a digest of the
//! rebuilt canonical system, and every path entry with its full table
//! snapshot. Numbers are serialized with 17 significant digits so parsing
//! restores the exact bits and re-serializing is byte-stable. The digest
//! lets consumers reject state files that do not belong to the game they
//! are about to extend.

use std::fmt;

use crate::lp::{
    canonicalize, canonicalize_budgeted, recover_strategy, CanonicalLp, LpError, LpVariant,
    PayoffMatrix, Solution, Status, Vertex,
};
use crate::matrix::Matrix;
use crate::simplex::{PathEntry, PathStatus, SearchPath, SearchTable};
use crate::util::fmt_f64_exact;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "shadow-path-state";

#[derive(Debug)]
pub enum PersistError {
    Parse { line: usize, message: String },
    /// Stored digest disagrees with the LP rebuilt from the stored payoff.
    DigestMismatch,
    Lp(LpError),
}

impl fmt::Display for PersistError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PersistError::Parse { line, message } => write!(f, "line {line}: {message}"),
            PersistError::DigestMismatch => write!(f, "state digest does not match its game"),
            PersistError::Lp(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for PersistError {}

impl From<LpError> for PersistError {
    fn from(e: LpError) -> Self {
        PersistError::Lp(e)
    }
}

/// A persisted warm-start state: game, digest, and search path.
#[derive(Clone, Debug)]
pub struct PersistedState {
    pub payoff: PayoffMatrix,
    pub variant: LpVariant,
    pub digest: u64,
    pub path: SearchPath,
}

impl PersistedState {
    pub fn new(
        payoff: PayoffMatrix,
        variant: LpVariant,
        path: SearchPath,
    ) -> Result<Self, LpError> {
        let digest = rebuild_lp(&payoff, variant)?.digest();
        Ok(Self { payoff, variant, digest, path })
    }

    pub fn rebuild_lp(&self) -> Result<CanonicalLp, LpError> {
        rebuild_lp(&self.payoff, self.variant)
    }

    /// Rebuild the LP and verify it against the stored digest.
    pub fn checked_lp(&self) -> Result<CanonicalLp, PersistError> {
        let lp = self.rebuild_lp()?;
        if lp.digest() != self.digest {
            return Err(PersistError::DigestMismatch);
        }
        Ok(lp)
    }

    /// Solution at the end of the stored path.
    pub fn solution(&self, lp: &CanonicalLp) -> Result<Solution, LpError> {
        let last = self
            .path
            .entries
            .last()
            .ok_or_else(|| LpError::InvalidInput("state has an empty path".into()))?;
        let (strategy, _) = recover_strategy(lp, &last.vertex.x);
        Ok(Solution {
            x: last.vertex.x.clone(),
            value: last.table.objective_value(),
            strategy,
            status: Status::Optimal,
        })
    }

    pub fn to_text(&self) -> String {
        let n = self.payoff.actions();
        let m = self.payoff.opponent_actions();
        let mut out = String::new();
        out.push_str(&format!("{MAGIC} {FORMAT_VERSION}\n"));
        out.push_str(&format!("n {n}\n"));
        out.push_str(&format!("m {m}\n"));
        match self.variant {
            LpVariant::Simplex => out.push_str("variant simplex\n"),
            LpVariant::Budgeted { budget } => {
                out.push_str(&format!("variant budgeted {}\n", fmt_f64_exact(budget)));
            }
        }
        out.push_str(&format!("digest {:016x}\n", self.digest));
        out.push_str("payoff\n");
        for i in 0..n {
            let row: Vec<String> =
                (0..m).map(|j| fmt_f64_exact(self.payoff.get(i, j))).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out.push_str(match self.path.status {
            PathStatus::Optimal => "status optimal\n",
            PathStatus::Truncated => "status truncated\n",
        });
        out.push_str(&format!("entries {}\n", self.path.entries.len()));
        for entry in &self.path.entries {
            let t = &entry.table;
            out.push_str("entry\n");
            let active: Vec<String> = t.active_set.iter().map(usize::to_string).collect();
            out.push_str(&format!("active {}\n", active.join(" ")));
            out.push_str(&format!("x {}\n", join_floats(&entry.vertex.x)));
            out.push_str(&format!("alpha {}\n", join_floats(&t.alpha)));
            out.push_str(&format!("beta {}\n", join_floats(&t.beta)));
            out.push_str(&format!("qc {}\n", fmt_f64_exact(t.qc)));
            out.push_str(&format!("qu {}\n", fmt_f64_exact(t.qu)));
            out.push_str("gamma\n");
            for i in 0..t.gamma.rows() {
                out.push_str(&join_floats(t.gamma.row(i)));
                out.push('\n');
            }
            out.push_str(&format!("phi {}\n", join_floats(&t.phi)));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, PersistError> {
        let mut cursor = Cursor::new(text);
        let header = cursor.line()?;
        let tokens: Vec<&str> = header.split_whitespace().collect();
        if tokens.len() != 2 || tokens[0] != MAGIC {
            return cursor.fail("not a search path state file");
        }
        if tokens[1] != FORMAT_VERSION.to_string() {
            return cursor.fail(&format!("unsupported format version {}", tokens[1]));
        }
        let n: usize = cursor.keyed_value("n")?;
        let m: usize = cursor.keyed_value("m")?;
        let variant_line = cursor.line()?;
        let variant = match variant_line.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["variant", "simplex"] => LpVariant::Simplex,
            ["variant", "budgeted", b] => LpVariant::Budgeted {
                budget: b.parse().map_err(|_| cursor.err("bad budget"))?,
            },
            _ => return cursor.fail("expected 'variant simplex|budgeted <B>'"),
        };
        let digest_line = cursor.line()?;
        let digest = match digest_line.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["digest", hex] => u64::from_str_radix(hex, 16)
                .map_err(|_| cursor.err("bad digest"))?,
            _ => return cursor.fail("expected 'digest <hex>'"),
        };
        cursor.expect_line("payoff")?;
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            rows.push(cursor.floats_exact(m, "payoff row")?);
        }
        let payoff = PayoffMatrix::new(rows)?;
        let status_line = cursor.line()?;
        let status = match status_line.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["status", "optimal"] => PathStatus::Optimal,
            ["status", "truncated"] => PathStatus::Truncated,
            _ => return cursor.fail("expected 'status optimal|truncated'"),
        };
        let entry_count: usize = cursor.keyed_value("entries")?;
        let lp_rows = match variant {
            LpVariant::Simplex => m + n,
            LpVariant::Budgeted { .. } => m + 2 * n,
        };
        let mut entries = Vec::with_capacity(entry_count);
        for _ in 0..entry_count {
            cursor.expect_line("entry")?;
            let active = cursor.usizes_keyed("active", n)?;
            let x = cursor.floats_keyed("x", n)?;
            let alpha = cursor.floats_keyed("alpha", n)?;
            let beta = cursor.floats_keyed("beta", n)?;
            let qc = cursor.float_keyed("qc")?;
            let qu = cursor.float_keyed("qu")?;
            cursor.expect_line("gamma")?;
            let mut gamma = Matrix::zeros(lp_rows, n);
            for i in 0..lp_rows {
                let row = cursor.floats_exact(n, "gamma row")?;
                gamma.row_mut(i).copy_from_slice(&row);
            }
            let phi = cursor.floats_keyed("phi", lp_rows)?;
            entries.push(PathEntry {
                vertex: Vertex { x, active_set: active.clone() },
                table: SearchTable { active_set: active, alpha, beta, qc, qu, gamma, phi },
            });
        }
        Ok(PersistedState {
            payoff,
            variant,
            digest,
            path: SearchPath { entries, status },
        })
    }
}

fn rebuild_lp(payoff: &PayoffMatrix, variant: LpVariant) -> Result<CanonicalLp, LpError> {
    match variant {
        LpVariant::Simplex => Ok(canonicalize(payoff)),
        LpVariant::Budgeted { budget } => canonicalize_budgeted(payoff, budget),
    }
}

fn join_floats(values: &[f64]) -> String {
    values.iter().map(|&v| fmt_f64_exact(v)).collect::<Vec<_>>().join(" ")
}

/// Parse an extension column file: whitespace-separated numbers, optionally
/// preceded by a `parent <digest-hex>` line naming the game the column
/// extends. `#` starts a comment line.
pub fn parse_column_file(text: &str, n: usize) -> Result<(Vec<f64>, Option<u64>), PersistError> {
    let mut parent = None;
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("parent ") {
            parent = Some(u64::from_str_radix(rest.trim(), 16).map_err(|_| {
                PersistError::Parse { line: idx + 1, message: "bad parent digest".into() }
            })?);
            continue;
        }
        for token in line.split_whitespace() {
            let v: f64 = token.parse().map_err(|_| PersistError::Parse {
                line: idx + 1,
                message: format!("bad number '{token}'"),
            })?;
            values.push(v);
        }
    }
    if values.len() != n {
        return Err(PersistError::Parse {
            line: 0,
            message: format!("expected {n} column entries, got {}", values.len()),
        });
    }
    Ok((values, parent))
}

struct Cursor<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    current: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Self { lines: text.lines().enumerate(), current: 0 }
    }

    fn err(&self, message: &str) -> PersistError {
        PersistError::Parse { line: self.current, message: message.to_string() }
    }

    fn fail<T>(&self, message: &str) -> Result<T, PersistError> {
        Err(self.err(message))
    }

    fn line(&mut self) -> Result<&'a str, PersistError> {
        match self.lines.next() {
            Some((idx, l)) => {
                self.current = idx + 1;
                Ok(l)
            }
            None => Err(PersistError::Parse {
                line: self.current + 1,
                message: "unexpected end of file".into(),
            }),
        }
    }

    fn expect_line(&mut self, expected: &str) -> Result<(), PersistError> {
        let l = self.line()?;
        if l.trim() != expected {
            return self.fail(&format!("expected '{expected}'"));
        }
        Ok(())
    }

    fn keyed_value<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, PersistError> {
        let l = self.line()?;
        let mut it = l.split_whitespace();
        if it.next() != Some(key) {
            return self.fail(&format!("expected '{key} <value>'"));
        }
        let value = it.next().ok_or_else(|| self.err("missing value"))?;
        if it.next().is_some() {
            return self.fail("trailing tokens");
        }
        value.parse().map_err(|_| self.err(&format!("bad {key} value")))
    }

    fn floats_after(
        &mut self,
        key: &str,
        count: usize,
        line: &str,
    ) -> Result<Vec<f64>, PersistError> {
        let mut it = line.split_whitespace();
        if it.next() != Some(key) {
            return self.fail(&format!("expected '{key} ...'"));
        }
        let values: Result<Vec<f64>, _> = it.map(str::parse).collect();
        let values = values.map_err(|_| self.err(&format!("bad number in {key}")))?;
        if values.len() != count {
            return self.fail(&format!("expected {count} values for {key}"));
        }
        Ok(values)
    }

    fn floats_keyed(&mut self, key: &str, count: usize) -> Result<Vec<f64>, PersistError> {
        let l = self.line()?;
        self.floats_after(key, count, l)
    }

    fn float_keyed(&mut self, key: &str) -> Result<f64, PersistError> {
        Ok(self.floats_keyed(key, 1)?[0])
    }

    fn usizes_keyed(&mut self, key: &str, count: usize) -> Result<Vec<usize>, PersistError> {
        let l = self.line()?;
        let mut it = l.split_whitespace();
        if it.next() != Some(key) {
            return self.fail(&format!("expected '{key} ...'"));
        }
        let values: Result<Vec<usize>, _> = it.map(str::parse).collect();
        let values = values.map_err(|_| self.err(&format!("bad index in {key}")))?;
        if values.len() != count {
            return self.fail(&format!("expected {count} indices for {key}"));
        }
        Ok(values)
    }

    fn floats_exact(&mut self, count: usize, what: &str) -> Result<Vec<f64>, PersistError> {
        let l = self.line()?;
        let values: Result<Vec<f64>, _> = l.split_whitespace().map(str::parse).collect();
        let values = values.map_err(|_| self.err(&format!("bad number in {what}")))?;
        if values.len() != count {
            return self.fail(&format!("expected {count} values in {what}"));
        }
        Ok(values)
    }
}
