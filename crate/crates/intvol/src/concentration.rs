//! Closed-form bounds on volume random variables and the transition widths they imply.
//!
//! Every bound has the Poisson shape `ξ(θ) ≤ v φ(aθ)/a²` with `φ(x) = eˣ − x − 1`, using one
//! scale `a` for upper deviations and another for lower deviations. Tail bounds are returned as
//! natural logs of probabilities.

use serde::{Deserialize, Serialize};

use crate::bodies::Kind;
use crate::error::{domain, usage, Result};
use crate::specfun::psi_tail;
use crate::weighted::VolumeDistribution;

/// Which side of the mean a tail bound controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Upper,
    Lower,
}

/// Which transition-width formula applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthRule {
    /// Random projection, one rotation distribution.
    Projection,
    /// Rotation mean, two rotation distributions.
    RotationMean,
    /// Random slice, one rigid-motion distribution.
    Slice,
    /// Kinematic, two rigid-motion distributions.
    Kinematic,
}

/// Parameters of the concentration bounds for one volume random variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub kind: Kind,
    pub n: usize,
    /// Central volume.
    pub delta: f64,
    /// Variance proxy.
    pub v: f64,
    /// Scale for upper deviations.
    pub a_upper: f64,
    /// Scale for lower deviations (negative for rotation volumes).
    pub a_lower: f64,
}

fn phi(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        let x2 = x * x;
        x2 / 2.0 + x2 * x / 6.0 + x2 * x2 / 24.0
    } else {
        x.exp_m1() - x
    }
}

impl TailBound {
    pub fn new(kind: Kind, n: usize, delta: f64) -> Result<Self> {
        let nf = n as f64;
        if !delta.is_finite() || delta < -1e-9 || delta > nf + 1e-9 {
            return domain(format!("central volume {delta} outside [0, {n}]"));
        }
        let delta = delta.clamp(0.0, nf);
        let (v, a_upper, a_lower) = match kind {
            Kind::Rotation => (delta, 1.0, -1.0),
            Kind::RigidMotion => {
                let n1 = nf + 1.0;
                let co = n1 - delta;
                (2.0 * delta * co / n1, 2.0 * co / n1, 2.0 * delta / n1)
            }
            Kind::Intrinsic if n == 0 => (0.0, 0.0, 0.0),
            Kind::Intrinsic => {
                let co = nf - delta;
                (2.0 * delta * co / nf, 2.0 * co / nf, 2.0 * delta / nf)
            }
        };
        Ok(Self {
            kind,
            n,
            delta,
            v,
            a_upper,
            a_lower,
        })
    }

    pub fn from_distribution(d: &VolumeDistribution) -> Result<Self> {
        Self::new(d.kind, d.n(), d.mean())
    }

    /// Complementary central volume: `n+1 − δ̄` for rigid motions, `n − δ` otherwise.
    pub fn co_delta(&self) -> f64 {
        match self.kind {
            Kind::RigidMotion => self.n as f64 + 1.0 - self.delta,
            _ => self.n as f64 - self.delta,
        }
    }

    /// Upper bound on the variance of the random variable.
    pub fn variance_bound(&self) -> f64 {
        match self.kind {
            Kind::Rotation | Kind::RigidMotion => self.v,
            Kind::Intrinsic => {
                let denom = self.n as f64 + self.delta;
                if denom == 0.0 {
                    0.0
                } else {
                    2.0 * self.delta * self.co_delta() / denom
                }
            }
        }
    }

    /// Variance parameter of the Bernstein form.
    fn bernstein_scale(&self) -> f64 {
        match self.kind {
            Kind::Rotation => self.delta,
            Kind::RigidMotion => self.delta.min(self.co_delta()),
            Kind::Intrinsic => self.v,
        }
    }
}

/// Bound on the centered cgf `ln E e^{θ(I − δ)}`.
pub fn cgf_bound(b: &TailBound, theta: f64) -> f64 {
    if b.v == 0.0 || theta == 0.0 {
        return 0.0;
    }
    let a = if theta >= 0.0 { b.a_upper } else { -b.a_lower };
    if a == 0.0 {
        return b.v * theta * theta / 2.0;
    }
    b.v * phi(a * theta) / (a * a)
}

/// Log of the Poisson tail bound on `P[±(I − δ) ≥ t]`.
pub fn poisson_tail(b: &TailBound, t: f64, side: Side) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return domain(format!("tail deviation must be nonnegative, got {t}"));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    if b.v == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let a = match side {
        Side::Upper => b.a_upper,
        Side::Lower => b.a_lower,
    };
    if a == 0.0 {
        return Ok(-t * t / (2.0 * b.v));
    }
    Ok(-(b.v / (a * a)) * psi_tail(a * t / b.v))
}

/// Log of the two-sided Bernstein bound, one side at a time.
pub fn bernstein_tail(b: &TailBound, t: f64) -> Result<f64> {
    if t == 0.0 || !t.is_finite() {
        return domain("the Bernstein form needs a finite nonzero deviation");
    }
    let s = b.bernstein_scale();
    let t2 = t * t;
    Ok(match b.kind {
        Kind::Rotation => -(t2 / 2.0) / (s + t.abs() / 3.0),
        Kind::RigidMotion => -(t2 / 4.0) / (s + t.abs() / 3.0),
        Kind::Intrinsic => -(t2 / 2.0) / (s + 2.0 * t.abs() / 3.0),
    })
}

/// Log Bernstein bound for the sum of two independent variables of the same kind.
pub fn sum_tail(bk: &TailBound, bm: &TailBound, t: f64) -> Result<f64> {
    if bk.kind != bm.kind {
        return usage("sum bounds need two variables of the same kind");
    }
    if t == 0.0 || !t.is_finite() {
        return domain("the Bernstein form needs a finite nonzero deviation");
    }
    let t2 = t * t;
    let (s1, s2) = (bk.bernstein_scale(), bm.bernstein_scale());
    Ok(match bk.kind {
        Kind::Rotation => -(t2 / 2.0) / (s1 + s2 + t.abs() / 3.0),
        Kind::RigidMotion => -(t2 / 4.0) / (s1 + s2 + t.abs() / 3.0),
        Kind::Intrinsic => -(t2 / 2.0) / (s1 + s2 + 2.0 * t.abs() / 3.0),
    })
}

/// Width `t*(α)` of the transition region under the given rule.
pub fn transition_width(bounds: &[TailBound], alpha: f64, rule: WidthRule) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    let (want_kind, want_len) = match rule {
        WidthRule::Projection => (Kind::Rotation, 1),
        WidthRule::RotationMean => (Kind::Rotation, 2),
        WidthRule::Slice => (Kind::RigidMotion, 1),
        WidthRule::Kinematic => (Kind::RigidMotion, 2),
    };
    if bounds.len() != want_len || bounds.iter().any(|b| b.kind != want_kind) {
        return usage(format!(
            "{rule:?} width takes {want_len} {} bound(s)",
            want_kind.name()
        ));
    }
    let l = (1.0 / alpha).ln();
    Ok(match rule {
        WidthRule::Projection | WidthRule::RotationMean => {
            let d: f64 = bounds.iter().map(|b| b.delta).sum();
            (2.0 * d * l).sqrt() + 2.0 * l / 3.0
        }
        WidthRule::Slice => {
            let b = &bounds[0];
            let s = b.delta.min(b.co_delta());
            (4.0 * s * l).sqrt() + 4.0 * l / 3.0
        }
        WidthRule::Kinematic => {
            let d: f64 = bounds.iter().map(|b| b.delta).sum();
            (4.0 * d * l).sqrt() + 4.0 * l / 3.0
        }
    })
}
