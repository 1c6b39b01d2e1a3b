//! Catalog of convex bodies with exact intrinsic volume sequences.

use itertools::Itertools;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Error, Result};
use crate::specfun::{log_add_exp, log_binomial, log_kappa, log_sum_exp};

/// Maximum zonotope generator count accepted by subset enumeration.
pub const MAX_ZONOTOPE_GENERATORS: usize = 20;

/// Gram determinants below this are treated as rank deficient.
pub const GRAM_RANK_TOLERANCE: f64 = 1e-24;

/// Which sequence a [`LogSequence`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Intrinsic,
    Rotation,
    RigidMotion,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Intrinsic => "intrinsic",
            Kind::Rotation => "rotation",
            Kind::RigidMotion => "rigid_motion",
        }
    }
}

/// A length-`n+1` sequence of nonnegative reals stored as logs (`-inf` is zero).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogSequence {
    pub kind: Kind,
    #[serde(with = "crate::logser::vec")]
    pub log_values: Vec<f64>,
}

impl LogSequence {
    pub fn new(kind: Kind, log_values: Vec<f64>) -> Result<Self> {
        if log_values.is_empty() {
            return domain("a sequence needs at least one entry");
        }
        if log_values.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return domain("sequence entries must be finite or -inf");
        }
        Ok(Self { kind, log_values })
    }

    /// Sequence of a single point in `R^n`.
    pub fn point(n: usize) -> Self {
        let mut log_values = vec![f64::NEG_INFINITY; n + 1];
        log_values[0] = 0.0;
        Self {
            kind: Kind::Intrinsic,
            log_values,
        }
    }

    /// Ambient dimension.
    pub fn n(&self) -> usize {
        self.log_values.len() - 1
    }

    /// `ln Σ_i value_i`.
    pub fn log_total(&self) -> f64 {
        log_sum_exp(&self.log_values)
    }

    /// Values in the linear domain.
    pub fn values(&self) -> Vec<f64> {
        self.log_values.iter().map(|v| v.exp()).collect()
    }
}

/// Symbolic description of a convex body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "crate::logser::BodyRepr", into = "crate::logser::BodyRepr")]
pub enum BodySpec {
    /// `λB^n`.
    Ball { n: usize, scale: f64 },
    /// `λQ^n` with `Q = [0,1]^n`.
    Cube { n: usize, scale: f64 },
    /// Axis-aligned box with the given side lengths.
    Parallelotope { sides: Vec<f64> },
    /// Cartesian product.
    Product {
        left: Box<BodySpec>,
        right: Box<BodySpec>,
    },
    /// Minkowski sum of segments `[0, g]` in `R^dim`.
    Zonotope {
        dim: usize,
        generators: Vec<Vec<f64>>,
    },
    /// A precomputed intrinsic volume sequence.
    Explicit { log_values: Vec<f64> },
}

impl BodySpec {
    pub fn ball(n: usize, scale: f64) -> Self {
        BodySpec::Ball { n, scale }
    }

    pub fn cube(n: usize, scale: f64) -> Self {
        BodySpec::Cube { n, scale }
    }

    pub fn parallelotope(sides: Vec<f64>) -> Self {
        BodySpec::Parallelotope { sides }
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        match self {
            BodySpec::Ball { n, .. } | BodySpec::Cube { n, .. } => *n,
            BodySpec::Parallelotope { sides } => sides.len(),
            BodySpec::Product { left, right } => left.dim() + right.dim(),
            BodySpec::Zonotope { dim, .. } => *dim,
            BodySpec::Explicit { log_values } => log_values.len().saturating_sub(1),
        }
    }

    /// Rejects invalid scales or malformed shapes.
    pub fn validate(&self) -> Result<()> {
        match self {
            BodySpec::Ball { scale, .. } | BodySpec::Cube { scale, .. } => check_scale(*scale),
            BodySpec::Parallelotope { sides } => sides.iter().try_for_each(|&s| check_scale(s)),
            BodySpec::Product { left, right } => {
                left.validate()?;
                right.validate()
            }
            BodySpec::Zonotope { dim, generators } => {
                if generators.len() > MAX_ZONOTOPE_GENERATORS {
                    return Err(Error::Size(format!(
                        "{} generators exceed the limit of {MAX_ZONOTOPE_GENERATORS}",
                        generators.len()
                    )));
                }
                if generators.iter().any(|g| g.len() != *dim) {
                    return usage("every zonotope generator must have length dim");
                }
                if generators.iter().flatten().any(|x| !x.is_finite()) {
                    return domain("zonotope generators must be finite");
                }
                Ok(())
            }
            BodySpec::Explicit { log_values } => {
                LogSequence::new(Kind::Intrinsic, log_values.clone()).map(|_| ())
            }
        }
    }

    /// Intrinsic volume sequence.
    pub fn intrinsic(&self) -> Result<LogSequence> {
        self.validate()?;
        match self {
            BodySpec::Ball { n, scale } => Ok(intrinsic_ball(*n, *scale)),
            BodySpec::Cube { n, scale } => Ok(intrinsic_cube(*n, *scale)),
            BodySpec::Parallelotope { sides } => Ok(intrinsic_parallelotope(sides)),
            BodySpec::Product { left, right } => {
                intrinsic_product(&left.intrinsic()?, &right.intrinsic()?)
            }
            BodySpec::Zonotope { dim, generators } => intrinsic_zonotope(*dim, generators),
            BodySpec::Explicit { log_values } => {
                LogSequence::new(Kind::Intrinsic, log_values.clone())
            }
        }
    }
}

fn check_scale(s: f64) -> Result<()> {
    if s.is_finite() && s >= 0.0 {
        Ok(())
    } else {
        domain(format!(
            "scales and side lengths must be finite and nonnegative, got {s}"
        ))
    }
}

/// `V_i(λB^n) = C(n,i) κ_n/κ_{n−i} λ^i`.
pub fn intrinsic_ball(n: usize, scale: f64) -> LogSequence {
    if scale == 0.0 {
        return LogSequence::point(n);
    }
    let ln_scale = scale.ln();
    let log_values = (0..=n)
        .map(|i| {
            log_binomial(n, i) + log_kappa(n as i64) - log_kappa((n - i) as i64)
                + i as f64 * ln_scale
        })
        .collect();
    LogSequence {
        kind: Kind::Intrinsic,
        log_values,
    }
}

/// `V_i(λQ^n) = C(n,i) λ^i`.
pub fn intrinsic_cube(n: usize, scale: f64) -> LogSequence {
    if scale == 0.0 {
        return LogSequence::point(n);
    }
    let ln_scale = scale.ln();
    let log_values = (0..=n)
        .map(|i| log_binomial(n, i) + i as f64 * ln_scale)
        .collect();
    LogSequence {
        kind: Kind::Intrinsic,
        log_values,
    }
}

/// Elementary symmetric polynomials of the side lengths, read off `Π(1 + λ_j t)`.
pub fn intrinsic_parallelotope(sides: &[f64]) -> LogSequence {
    let n = sides.len();
    let log_values = if sides.iter().all(|&s| s <= 1e3) {
        let mut e = vec![0.0; n + 1];
        e[0] = 1.0;
        for (k, &s) in sides.iter().enumerate() {
            for i in (1..=k + 1).rev() {
                e[i] += s * e[i - 1];
            }
        }
        e.into_iter().map(f64::ln).collect()
    } else {
        let mut e = vec![f64::NEG_INFINITY; n + 1];
        e[0] = 0.0;
        for (k, &s) in sides.iter().enumerate() {
            let ls = s.ln();
            for i in (1..=k + 1).rev() {
                e[i] = log_add_exp(e[i], ls + e[i - 1]);
            }
        }
        e
    };
    LogSequence {
        kind: Kind::Intrinsic,
        log_values,
    }
}

/// Sequence of a Cartesian product: the convolution of the factor sequences.
pub fn intrinsic_product(a: &LogSequence, b: &LogSequence) -> Result<LogSequence> {
    if a.kind != Kind::Intrinsic || b.kind != Kind::Intrinsic {
        return usage("products are defined on intrinsic sequences only");
    }
    Ok(LogSequence {
        kind: Kind::Intrinsic,
        log_values: log_convolve(&a.log_values, &b.log_values),
    })
}

pub(crate) fn log_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![f64::NEG_INFINITY; a.len() + b.len() - 1];
    let mut terms = Vec::with_capacity(a.len().min(b.len()));
    for (k, slot) in out.iter_mut().enumerate() {
        terms.clear();
        let lo = k.saturating_sub(b.len() - 1);
        let hi = k.min(a.len() - 1);
        for j in lo..=hi {
            terms.push(a[j] + b[k - j]);
        }
        *slot = log_sum_exp(&terms);
    }
    out
}

/// Intrinsic volumes of the zonotope `Σ [0, g_k]` in `R^dim`.
///
/// `V_i` is the sum over `i`-subsets of generators of the `i`-volume of the spanned parallelepiped.
pub fn intrinsic_zonotope(dim: usize, generators: &[Vec<f64>]) -> Result<LogSequence> {
    let g = generators.len();
    if g > MAX_ZONOTOPE_GENERATORS {
        return Err(Error::Size(format!(
            "{g} generators exceed the limit of {MAX_ZONOTOPE_GENERATORS}"
        )));
    }
    if generators.iter().any(|v| v.len() != dim) {
        return usage("every zonotope generator must have length dim");
    }
    let mut log_values = vec![f64::NEG_INFINITY; dim + 1];
    log_values[0] = 0.0;
    for (i, slot) in log_values.iter_mut().enumerate().skip(1) {
        if i > g {
            break;
        }
        let mut total = 0.0;
        for subset in (0..g).combinations(i) {
            total += parallelepiped_volume(dim, generators, &subset);
        }
        *slot = total.ln();
    }
    Ok(LogSequence {
        kind: Kind::Intrinsic,
        log_values,
    })
}

/// `√det(AᵀA)` for the columns selected by `subset`, via QR.
fn parallelepiped_volume(dim: usize, generators: &[Vec<f64>], subset: &[usize]) -> f64 {
    let a = DMatrix::from_fn(dim, subset.len(), |r, c| generators[subset[c]][r]);
    let r = a.qr().r();
    let vol: f64 = (0..subset.len()).map(|k| r[(k, k)].abs()).product();
    if vol * vol < GRAM_RANK_TOLERANCE {
        0.0
    } else {
        vol
    }
}

/// Total intrinsic volume `ln W(K)`.
pub fn wills(seq: &LogSequence) -> Result<f64> {
    if seq.kind != Kind::Intrinsic {
        return usage("the Wills functional takes an intrinsic sequence");
    }
    Ok(seq.log_total())
}
