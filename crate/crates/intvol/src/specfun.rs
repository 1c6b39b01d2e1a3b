//! Log-domain special functions and geometric constants.
//!
//! Zero is represented by `f64::NEG_INFINITY` throughout.

use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

use crate::error::{domain, usage, Result};

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return domain(format!(
            "log_gamma requires a finite positive argument, got {x}"
        ));
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    statrs::function::gamma::ln_gamma(x)
}

/// Rows of Pascal's triangle that fit in `u128`.
const EXACT_BINOMIAL_ROWS: usize = 128;

fn pascal() -> &'static Vec<Vec<u128>> {
    static TABLE: OnceLock<Vec<Vec<u128>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut rows: Vec<Vec<u128>> = vec![vec![1]];
        for n in 1..=EXACT_BINOMIAL_ROWS {
            let prev = &rows[n - 1];
            let mut row = vec![1u128; n + 1];
            for k in 1..n {
                row[k] = prev[k - 1] + prev[k];
            }
            rows.push(row);
        }
        rows
    })
}

/// `ln C(n, k)`; `-inf` when `k > n`. Exact up to the final rounding for `n ≤ 128`.
pub fn log_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    if n <= EXACT_BINOMIAL_ROWS {
        return (pascal()[n][k] as f64).ln();
    }
    ln_gamma_unchecked(n as f64 + 1.0)
        - ln_gamma_unchecked(k as f64 + 1.0)
        - ln_gamma_unchecked((n - k) as f64 + 1.0)
}

/// `ln κ_i`, the log volume of the unit ball in `R^i`; `-inf` for `i < 0`.
pub fn log_kappa(i: i64) -> f64 {
    match i {
        i if i < 0 => f64::NEG_INFINITY,
        0 => 0.0,
        1 => LN_2,
        2 => PI.ln(),
        _ => {
            let h = i as f64 / 2.0;
            h * PI.ln() - ln_gamma_unchecked(1.0 + h)
        }
    }
}

/// `ln ω_i = ln(i κ_i)`, the log surface area of the unit sphere in `R^i`; `-inf` for `i ≤ 0`.
pub fn log_omega(i: i64) -> f64 {
    if i <= 0 {
        f64::NEG_INFINITY
    } else {
        (i as f64).ln() + log_kappa(i)
    }
}

/// `ln Π_k c_{j_k}^{i_k}` with `c_j^i = i! κ_i / (j! κ_j)`.
pub fn log_structure_coeff(i_list: &[i64], j_list: &[i64]) -> Result<f64> {
    if i_list.len() != j_list.len() {
        return usage("structure coefficient index lists differ in length");
    }
    let mut acc = 0.0;
    for (&i, &j) in i_list.iter().zip(j_list) {
        if i < 0 || j < 0 {
            return domain("structure coefficient indices must be nonnegative");
        }
        if i == j {
            continue;
        }
        acc += ln_gamma_unchecked(i as f64 + 1.0) + log_kappa(i)
            - ln_gamma_unchecked(j as f64 + 1.0)
            - log_kappa(j);
    }
    Ok(acc)
}

/// Bennett function `ψ(u) = (1+u) ln(1+u) − u`, with `ψ(−1) = 1` and `+inf` below `−1`.
pub fn psi_tail(u: f64) -> f64 {
    if u.is_nan() {
        return f64::NAN;
    }
    if u < -1.0 {
        return f64::INFINITY;
    }
    if u == -1.0 {
        return 1.0;
    }
    if u == f64::INFINITY {
        return f64::INFINITY;
    }
    if u.abs() < 1e-4 {
        // Σ_{k≥2} (−u)^k / (k(k−1))
        let u2 = u * u;
        return u2 * (0.5 - u / 6.0 + u2 / 12.0 - u2 * u / 20.0 + u2 * u2 / 30.0);
    }
    (1.0 + u) * u.ln_1p() - u
}

/// Probability that a needle of length `L` dropped on planks of width `D` crosses a seam.
pub fn buffon_probability(length: f64, width: f64) -> Result<f64> {
    if !length.is_finite() || !width.is_finite() || length <= 0.0 || width <= 0.0 {
        return domain("buffon lengths must be finite and positive");
    }
    Ok(buffon_from_ratio(length / width))
}

pub(crate) fn buffon_from_ratio(r: f64) -> f64 {
    let two_over_pi = 2.0 / PI;
    if r <= 1.0 {
        two_over_pi * r
    } else {
        let s = 1.0 / r;
        // 1 − √(1 − s²) written without cancellation
        let gap = s * s / (1.0 + (1.0 - s * s).sqrt());
        two_over_pi * (s.acos() + r * gap)
    }
}

/// Checks both ratio thresholds: `L/D ≤ 2α/π ⇒ p ≤ α` and `L/D ≥ (1 − 2/π)/α ⇒ p ≥ 1 − α`.
pub fn buffon_bounds_check(alpha: f64) -> Result<bool> {
    if !(alpha > 0.0 && alpha <= 0.36) {
        return domain(format!("alpha must lie in (0, 0.36], got {alpha}"));
    }
    let short = buffon_from_ratio(2.0 * alpha / PI);
    let long = buffon_from_ratio((1.0 - 2.0 / PI) / alpha);
    Ok(short <= alpha && long >= 1.0 - alpha)
}

/// `ln(e^a + e^b)` with `-inf` as the additive identity.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ e^{x_i}`; `-inf` for an empty or all-zero input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let s: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + s.ln()
}
