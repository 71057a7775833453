//! Shared helpers: content digests, significant-digit formatting, binomials.

/// FNV-1a 64-bit digest.
pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Format `v` in plain decimal with `sig` significant digits.
///
/// Zero prints as `"0"`. Used for all human-facing numeric output.
pub fn fmt_sig(v: f64, sig: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    let decimals = sig as i32 - 1 - exp;
    if decimals <= 0 {
        let scale = 10f64.powi(-decimals);
        format!("{:.0}", (v / scale).round() * scale)
    } else {
        format!("{:.*}", decimals.min(17) as usize, v)
    }
}

/// Format `v` with 17 significant digits so it parses back bit-exactly.
pub fn fmt_f64_exact(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v }; // normalize -0.0
    format!("{v:.16e}")
}

/// Exact binomial coefficient, or `None` if it overflows `u128`.
pub fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc.checked_mul((n - k + i) as u128)? / i as u128;
    }
    Some(acc)
}

/// Binomial coefficient saturated at `cap`.
pub fn binomial_capped(n: u64, k: u64, cap: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        match acc.checked_mul((n - k + i) as u128) {
            Some(p) => acc = p / i as u128,
            None => return cap,
        }
        if acc >= cap {
            return cap;
        }
    }
    acc
}

/// Natural log of the binomial coefficient, stable for large arguments.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_gamma((n + 1) as f64) - ln_gamma((k + 1) as f64) - ln_gamma((n - k + 1) as f64)
}

/// Stirling's series with argument shift; relative error below 1e-12 here
/// since every call site has x >= 1.
fn ln_gamma(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 12.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    shift + 0.5 * (2.0 * std::f64::consts::PI).ln() + (x - 0.5) * x.ln() - x + series
}
