//! Exact-rational reference computations.
//!
//! Every `f64` is a dyadic rational, so converting an LP's data to
//! `BigRational` is lossless. The exact oracle here re-runs the same
//! vertex enumeration as [`solve_oracle`](crate::lp::solve_oracle) without
//! any tolerance, and the test suite uses it to validate the float path on
//! small instances.

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::lp::{CanonicalLp, LpError};

pub fn big(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite input")
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("rational within f64 range")
}

/// Exact Gaussian elimination; `None` when the system is singular.
fn solve_exact(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let n = b.len();
    for k in 0..n {
        let pivot_row = (k..n).find(|&i| !a[i][k].is_zero())?;
        a.swap(k, pivot_row);
        b.swap(k, pivot_row);
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &a[k][k];
            for j in k..n {
                let v = &a[k][j] * &f;
                a[i][j] -= v;
            }
            let v = &b[k] * &f;
            b[i] -= v;
        }
    }
    let mut x = vec![BigRational::zero(); n];
    for i in (0..n).rev() {
        let mut s = b[i].clone();
        for j in i + 1..n {
            s -= &a[i][j] * &x[j];
        }
        x[i] = s / &a[i][i];
    }
    Some(x)
}

/// Exact optimum of a canonical LP by vertex enumeration, or `None` when no
/// feasible vertex exists. Guarded to n <= 6 and at most 40 rows.
pub fn oracle_value_exact(lp: &CanonicalLp) -> Result<Option<BigRational>, LpError> {
    let n = lp.n();
    let rows = lp.row_count();
    if rows > 40 || n > 6 {
        return Err(LpError::TooLarge);
    }
    let a: Vec<Vec<BigRational>> =
        (0..rows).map(|i| lp.a.row(i).iter().map(|&v| big(v)).collect()).collect();
    let b: Vec<BigRational> = lp.b.iter().map(|&v| big(v)).collect();

    let mut best: Option<BigRational> = None;
    let mut subset: Vec<usize> = (0..n).collect();
    loop {
        let sub_a: Vec<Vec<BigRational>> = subset.iter().map(|&i| a[i].clone()).collect();
        let sub_b: Vec<BigRational> = subset.iter().map(|&i| b[i].clone()).collect();
        if let Some(x) = solve_exact(sub_a, sub_b) {
            let feasible = (0..rows).all(|i| {
                let lhs: BigRational =
                    a[i].iter().zip(&x).map(|(aij, xj)| aij * xj).sum();
                lhs <= b[i]
            });
            if feasible {
                let value = x[n - 1].clone();
                if best.as_ref().is_none_or(|cur| value > *cur) {
                    best = Some(value);
                }
            }
        }
        // next lexicographic subset
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(best);
            }
            i -= 1;
            if subset[i] != i + rows - n {
                break;
            }
            if i == 0 {
                return Ok(best);
            }
        }
        subset[i] += 1;
        for j in i + 1..n {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

/// Convenience wrapper asserting one sign: `value` must match the exact
/// optimum within `tol`. Used by tests.
pub fn matches_exact(lp: &CanonicalLp, value: f64, tol: f64) -> bool {
    match oracle_value_exact(lp) {
        Ok(Some(exact)) => (to_f64(&exact) - value).abs() <= tol,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{canonicalize, solve_oracle, PayoffMatrix};
    use crate::rng::SplitMix64;
    use num_traits::One;

    #[test]
    fn matching_pennies_is_exactly_zero() {
        let g = PayoffMatrix::new(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let v = oracle_value_exact(&canonicalize(&g)).unwrap().unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn identity_game_is_exactly_one_half() {
        let g = PayoffMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let v = oracle_value_exact(&canonicalize(&g)).unwrap().unwrap();
        let half = BigRational::one() / (BigRational::one() + BigRational::one());
        assert_eq!(v, half);
    }

    #[test]
    fn float_oracle_matches_exact_oracle() {
        let mut rng = SplitMix64::new(3);
        for _ in 0..40 {
            let n = rng.int_range(2, 4) as usize;
            let m = rng.int_range(2, 6) as usize;
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..m).map(|_| rng.int_range(-10, 10) as f64).collect())
                .collect();
            let lp = canonicalize(&PayoffMatrix::new(rows).unwrap());
            let float = solve_oracle(&lp).unwrap();
            assert!(matches_exact(&lp, float.value, 1e-9), "value {}", float.value);
        }
    }
}
