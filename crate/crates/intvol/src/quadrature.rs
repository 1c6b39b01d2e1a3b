//! Composite Gauss–Legendre quadrature with panel doubling, in linear and log domain.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

/// Controls for the one-dimensional integrators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Gauss–Legendre nodes per panel.
    pub nodes: usize,
    /// Stop once successive panel doublings agree to this relative tolerance.
    pub rel_tol: f64,
    /// Integrand mass below `e^{-truncation_log_eps}` of the peak is dropped.
    pub truncation_log_eps: f64,
    /// Doublings performed before convergence is tested.
    pub min_doublings: u32,
    pub max_doublings: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            nodes: 64,
            rel_tol: 1e-10,
            truncation_log_eps: (1e18f64).ln(),
            min_doublings: 2,
            max_doublings: 14,
        }
    }
}

impl QuadratureConfig {
    /// Largest absolute error tolerated in neglected tails, relative to the peak.
    pub fn max_abs_error(&self) -> f64 {
        (-self.truncation_log_eps).exp()
    }
}

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Cached 64-point rule.
    pub fn standard() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(64))
    }

    fn with_nodes(n: usize) -> std::borrow::Cow<'static, GaussLegendre> {
        if n == 64 {
            std::borrow::Cow::Borrowed(Self::standard())
        } else {
            std::borrow::Cow::Owned(Self::new(n))
        }
    }

    /// Sum of `f` over `panels` equal panels of `[a, b]`.
    pub fn composite(&self, f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let lo = a + p as f64 * h;
            let mid = lo + h / 2.0;
            let mut s = 0.0;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                s += w * f(mid + h / 2.0 * x);
            }
            total += s * h / 2.0;
        }
        total
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `∫_a^b f` by panel doubling.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, cfg: &QuadratureConfig) -> f64 {
    let rule = GaussLegendre::with_nodes(cfg.nodes);
    let mut panels = 1usize;
    let mut prev = rule.composite(f, a, b, panels);
    for k in 1..=cfg.max_doublings {
        panels *= 2;
        let cur = rule.composite(f, a, b, panels);
        let converged = (cur - prev).abs() <= cfg.rel_tol * cur.abs() || cur == prev;
        prev = cur;
        if k >= cfg.min_doublings && converged {
            break;
        }
    }
    prev
}

/// `ln ∫_a^b e^{g}` for a log-integrand `g`; the integrand is shifted by its sampled maximum.
pub fn log_integrate(g: &dyn Fn(f64) -> f64, a: f64, b: f64, cfg: &QuadratureConfig) -> f64 {
    const SAMPLES: usize = 1024;
    let mut shift = f64::NEG_INFINITY;
    for k in 0..=SAMPLES {
        // interior sample points avoid singular endpoints
        let x = a + (b - a) * (k as f64 + 0.5) / (SAMPLES as f64 + 1.0);
        let v = g(x);
        if v > shift {
            shift = v;
        }
    }
    if shift == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let f = |x: f64| (g(x) - shift).exp();
    let total = integrate(&f, a, b, cfg);
    shift + total.ln()
}

/// `ln ∫_a^∞ e^{g}` for a unimodal log-integrand with super-exponential or exponential decay.
///
/// The range is truncated where `g` falls `truncation_log_eps` (plus margin) below its peak.
pub fn log_integrate_half_line(g: &dyn Fn(f64) -> f64, a: f64, cfg: &QuadratureConfig) -> f64 {
    let drop = cfg.truncation_log_eps + 5.0;
    let mut peak = g(a);
    let mut prev_x = a;
    let mut upper = None;
    for k in -8..80 {
        let x = a + 2f64.powi(k);
        let v = g(x);
        peak = peak.max(v);
        if k >= 0 && v < peak - drop {
            upper = Some((prev_x, x));
            break;
        }
        prev_x = x;
    }
    let (mut lo, mut hi) = upper.expect("log-integrand does not decay");
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < peak - drop {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    log_integrate(g, a, hi, cfg)
}

/// `ln ∫_0^∞ e^{g(r)} dr` for algebraically decaying integrands, via `r = c t/(1 − t)`.
pub fn log_integrate_algebraic(g: &dyn Fn(f64) -> f64, c: f64, cfg: &QuadratureConfig) -> f64 {
    let lc = c.ln();
    let h = |t: f64| {
        let one_minus = 1.0 - t;
        g(c * t / one_minus) + lc - 2.0 * one_minus.ln()
    };
    log_integrate(&h, 0.0, 1.0, cfg)
}

/// `k ln x` with the convention `0 · ln 0 = 0`.
pub(crate) fn pow_log(k: f64, x: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * x.ln()
    }
}
