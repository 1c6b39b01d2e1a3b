//! Independent oracles: quadrature of integral representations, distance integrals over
//! balls and boxes, and Monte Carlo over the rotation group.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::{intrinsic_zonotope, BodySpec, Kind, LogSequence};
use crate::error::{domain, usage, Error, Result};
use crate::quadrature::{
    log_integrate, log_integrate_algebraic, log_integrate_half_line, pow_log, GaussLegendre,
    QuadratureConfig,
};
use crate::specfun::{log_add_exp, log_kappa, log_omega, log_sum_exp};
use crate::weighted::{reweight, to_rotation};

/// Largest cube dimension accepted by the projection Monte Carlo.
pub const MC_MAX_DIM: usize = 12;

/// Smallest sample count accepted by the projection Monte Carlo.
pub const MC_MIN_SAMPLES: usize = 100;

fn check_ball_args(n: usize, scale: f64) -> Result<()> {
    if n == 0 {
        return domain("quadrature oracles need n ≥ 1");
    }
    if !scale.is_finite() || scale < 0.0 {
        return domain(format!("scale must be finite and nonnegative, got {scale}"));
    }
    Ok(())
}

/// `ln W(λB^n)` from `κ_n λ^n + ω_n ∫_0^∞ (λ+s)^{n−1} e^{−πs²} ds`.
pub fn quad_ball_wills(n: usize, scale: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_ball_args(n, scale)?;
    let k = (n - 1) as f64;
    let g = |s: f64| pow_log(k, scale + s) - PI * s * s;
    let integral = log_omega(n as i64) + log_integrate_half_line(&g, 0.0, cfg);
    let body = log_kappa(n as i64) + pow_log(n as f64, scale);
    Ok(log_add_exp(body, integral))
}

/// `ln W̄(λB^n)` from `ω_n [λ^n/n + ∫_0^{π/2} (λ sin θ + cos θ)^{n−1} dθ]`.
pub fn quad_ball_rm_total(n: usize, scale: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_ball_args(n, scale)?;
    let k = (n - 1) as f64;
    let g = |t: f64| pow_log(k, scale * t.sin() + t.cos());
    let integral = log_integrate(&g, 0.0, PI / 2.0, cfg);
    let cap = pow_log(n as f64, scale) - (n as f64).ln();
    Ok(log_omega(n as i64) + log_add_exp(cap, integral))
}

/// `ln W̊(λQ^n)` or `ln W̄(λQ^n)` from their Gaussian moment integrals.
pub fn quad_cube_totals(n: usize, scale: f64, kind: Kind, cfg: &QuadratureConfig) -> Result<f64> {
    check_ball_args(n, scale)?;
    let nf = n as f64;
    let integral = match kind {
        Kind::Rotation => {
            let g = |s: f64| pow_log(nf, scale + s) - PI * s * s;
            log_integrate_half_line(&g, 0.0, cfg)
        }
        Kind::RigidMotion => {
            let g = |s: f64| nf * (scale * s).ln_1p() - PI * s * s;
            log_integrate_half_line(&g, 0.0, cfg)
        }
        Kind::Intrinsic => return usage("cube totals are computed for rotation or rigid_motion"),
    };
    Ok(log_omega(n as i64 + 1) + integral)
}

/// Bodies with an analytic distance function.
#[derive(Debug, Clone, PartialEq)]
enum MetricBody {
    Ball { n: usize, scale: f64 },
    Box { sides: Vec<f64> },
}

impl MetricBody {
    fn from_spec(body: &BodySpec) -> Result<Self> {
        body.validate()?;
        match body {
            BodySpec::Ball { n, scale } => Ok(MetricBody::Ball {
                n: *n,
                scale: *scale,
            }),
            BodySpec::Cube { n, scale } => Ok(MetricBody::Box {
                sides: vec![*scale; *n],
            }),
            BodySpec::Parallelotope { sides } => Ok(MetricBody::Box {
                sides: sides.clone(),
            }),
            _ => usage("distance integrals need a ball, cube or parallelotope"),
        }
    }

    fn dim(&self) -> usize {
        match self {
            MetricBody::Ball { n, .. } => *n,
            MetricBody::Box { sides } => sides.len(),
        }
    }
}

/// Radial test functions, as log-integrands of the distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    /// `e^{−πr²}`.
    Gaussian,
    /// `e^{−2πr}`.
    Exponential,
    /// `(1 + r²)^{−(n+1)/2}`.
    Algebraic,
}

/// A log-integrand of the distance together with how its tail decays.
struct Radial<'a> {
    log_f: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
    /// Scale of the algebraic map, when the tail is polynomial.
    algebraic: Option<f64>,
}

impl TestFunction {
    fn radial(self, n: usize) -> Radial<'static> {
        match self {
            TestFunction::Gaussian => Radial {
                log_f: Box::new(|r| -PI * r * r),
                algebraic: None,
            },
            TestFunction::Exponential => Radial {
                log_f: Box::new(|r| -2.0 * PI * r),
                algebraic: None,
            },
            TestFunction::Algebraic => {
                let p = (n as f64 + 1.0) / 2.0;
                Radial {
                    log_f: Box::new(move |r| -p * (r * r).ln_1p()),
                    algebraic: Some(1.0),
                }
            }
        }
    }
}

fn radial_integral(rad: &Radial, weight: &dyn Fn(f64) -> f64, cfg: &QuadratureConfig) -> f64 {
    let g = |r: f64| (rad.log_f)(r) + weight(r);
    match rad.algebraic {
        Some(c) => log_integrate_algebraic(&g, c, cfg),
        None => log_integrate_half_line(&g, 0.0, cfg),
    }
}

/// `ln ∫_{R^n} F(dist(x, λB^n)) dx = ln[κ_n λ^n F(0) + ω_n ∫ F(r)(λ+r)^{n−1} dr]`.
fn ball_distance_integral(n: usize, scale: f64, rad: &Radial, cfg: &QuadratureConfig) -> f64 {
    let k = (n as f64) - 1.0;
    let shell = log_omega(n as i64) + radial_integral(rad, &|r| pow_log(k, scale + r), cfg);
    let core = log_kappa(n as i64) + pow_log(n as f64, scale) + (rad.log_f)(0.0);
    log_add_exp(core, shell)
}

/// Graded Gauss–Legendre rule on `t ∈ [0, 1)`, returned as `(t, weight / (1 − t)²)` so that
/// `∫_0^∞ g(u) du ≈ Σ w_j c g(c t_j/(1 − t_j))` for any scale `c > 0`.
fn half_line_rule(levels: u32) -> (Vec<f64>, Vec<f64>) {
    const NEAR_GRADES: i32 = 6;
    const FAR_GRADES: i32 = 12;
    let gl = GaussLegendre::new(12);
    let mut cuts = vec![0.0];
    cuts.extend((1..=NEAR_GRADES).rev().map(|k| 2f64.powi(-k)));
    cuts.extend((2..=FAR_GRADES).map(|k| 1.0 - 2f64.powi(-k)));
    cuts.push(1.0);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let sub = 1usize << levels;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let h = (b - a) / sub as f64;
        for s in 0..sub {
            let mid = a + (s as f64 + 0.5) * h;
            for (x, wt) in gl.nodes.iter().zip(&gl.weights) {
                let t = mid + h / 2.0 * x;
                let om = 1.0 - t;
                nodes.push(t / om);
                weights.push(wt * h / 2.0 / (om * om));
            }
        }
    }
    (nodes, weights)
}

/// Iterated quadrature of `∫_{[0,∞)^k} F(√(ρ² + |u|²)) du`. Each axis is mapped with a scale
/// matched to the radius already accumulated, so algebraic tails keep one shape on every line.
fn iterated_orthant(k: usize, rho2: f64, rule: &(Vec<f64>, Vec<f64>), rad: &Radial) -> f64 {
    if k == 0 {
        return ((rad.log_f)(rho2.sqrt())).exp();
    }
    let c = match rad.algebraic {
        Some(s) => (s * s + rho2).sqrt(),
        None => 1.0,
    };
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(tau, w)| {
            let u = c * tau;
            w * c * iterated_orthant(k - 1, rho2 + u * u, rule, rad)
        })
        .sum()
}

/// `ln ∫_{[0,∞)^k} F(|u|) du`, `k ≤ 3`, refined until two levels agree.
fn orthant_integral(k: usize, rad: &Radial) -> f64 {
    let eval = |levels: u32| iterated_orthant(k, 0.0, &half_line_rule(levels), rad);
    let mut prev = eval(0);
    for level in 1..=2 {
        let cur = eval(level);
        let done = (cur - prev).abs() <= 1e-12 * cur.abs();
        prev = cur;
        if done {
            break;
        }
    }
    prev.ln()
}

/// Orthant integrals `I_0, …, I_n` of a test function in dimension `n`, memoized.
fn orthant_integrals(f: TestFunction, n: usize) -> Vec<f64> {
    type Cache = Mutex<HashMap<(TestFunction, usize), Vec<f64>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&(f, n)) {
        return v.clone();
    }
    let rad = f.radial(n);
    let v: Vec<f64> = (0..=n).map(|k| orthant_integral(k, &rad)).collect();
    cache.lock().unwrap().insert((f, n), v.clone());
    v
}

/// `ln ∫ F(dist(x, box))` for `n ≤ 3`: split each axis into the side and the two outer
/// half-lines; a cell with `k` outer axes contributes `2^k Π(inner sides) I_k`.
fn box_tensor_integral(sides: &[f64], f: TestFunction) -> f64 {
    let n = sides.len();
    let orth = orthant_integrals(f, n);
    let mut terms = Vec::with_capacity(1 << n);
    for mask in 0u32..(1 << n) {
        let k = mask.count_ones() as usize;
        let mut t = k as f64 * 2f64.ln() + orth[k];
        for (j, &s) in sides.iter().enumerate() {
            if mask & (1 << j) == 0 {
                t += s.ln();
            }
        }
        terms.push(t);
    }
    log_sum_exp(&terms)
}

/// `ln[F(0) V_n + Σ_{i<n} (∫ F(r) r^{n−i−1} dr) ω_{n−i} V_i]`.
fn steiner_sum(seq: &LogSequence, rad: &Radial, cfg: &QuadratureConfig) -> f64 {
    let n = seq.n();
    let mut terms = vec![(rad.log_f)(0.0) + seq.log_values[n]];
    for i in 0..n {
        if seq.log_values[i] == f64::NEG_INFINITY {
            continue;
        }
        let k = (n - i - 1) as f64;
        let moment = radial_integral(rad, &|r| pow_log(k, r), cfg);
        terms.push(moment + log_omega((n - i) as i64) + seq.log_values[i]);
    }
    log_sum_exp(&terms)
}

fn metric_function(kind: Kind) -> TestFunction {
    match kind {
        Kind::Intrinsic => TestFunction::Gaussian,
        Kind::Rotation => TestFunction::Exponential,
        Kind::RigidMotion => TestFunction::Algebraic,
    }
}

/// Distance-integral form of the total: `∫ e^{−π d²}`, `(ω_{n+1}/2) ∫ e^{−2πd}` or
/// `∫ (1 + d²)^{−(n+1)/2}`.
///
/// Balls use radial reduction; boxes use tensor quadrature for `n ≤ 3` and the generalized
/// Steiner formula above that.
pub fn metric_total(body: &BodySpec, kind: Kind, cfg: &QuadratureConfig) -> Result<f64> {
    let mb = MetricBody::from_spec(body)?;
    let n = mb.dim();
    let rad = metric_function(kind).radial(n);
    let raw = match &mb {
        MetricBody::Ball { n, scale } => {
            if *n == 0 {
                return domain("distance integrals need n ≥ 1");
            }
            ball_distance_integral(*n, *scale, &rad, cfg)
        }
        MetricBody::Box { sides } if sides.len() <= 3 => {
            box_tensor_integral(sides, metric_function(kind))
        }
        MetricBody::Box { .. } => steiner_sum(&body.intrinsic()?, &rad, cfg),
    };
    Ok(match kind {
        Kind::Rotation => raw + log_omega(n as i64 + 1) - 2f64.ln(),
        _ => raw,
    })
}

/// Relative residual of the generalized Steiner formula for a radial test function.
///
/// The left side integrates over space (radially for balls, by tensor quadrature for boxes with
/// `n ≤ 3`); the right side uses the intrinsic volumes and one-dimensional moments.
pub fn generalized_steiner_check(
    body: &BodySpec,
    f: TestFunction,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let mb = MetricBody::from_spec(body)?;
    let n = mb.dim();
    if n == 0 {
        return domain("distance integrals need n ≥ 1");
    }
    let rad = f.radial(n);
    let lhs = match &mb {
        MetricBody::Ball { n, scale } => ball_distance_integral(*n, *scale, &rad, cfg),
        MetricBody::Box { sides } if sides.len() <= 3 => box_tensor_integral(sides, f),
        MetricBody::Box { .. } => return usage("spatial integration of boxes is limited to n ≤ 3"),
    };
    let rhs = steiner_sum(&body.intrinsic()?, &rad, cfg);
    Ok((lhs - rhs).exp_m1().abs())
}

/// Test function `h` applied to the distance-integral variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentFunction {
    /// `h ≡ 1`.
    One,
    /// `h(s) = s`.
    Identity,
}

impl MomentFunction {
    fn log_h(self, s: f64) -> f64 {
        match self {
            MomentFunction::One => 0.0,
            MomentFunction::Identity => s.ln(),
        }
    }

    /// `E h(X)` given the mean of `X`.
    fn expectation(self, mean: f64) -> f64 {
        match self {
            MomentFunction::One => 1.0,
            MomentFunction::Identity => mean,
        }
    }
}

/// Relative residual of the distance-integral identity for a ball.
///
/// * rotation: `(ω_{n+1} e^{nθ}/2) ∫ h(J) e^{−J}`, `J = 2πe^θ d`, against `Σ E h(G_i) e^{(n−i)θ} V̊_i`
///   with `G_i ~ Gamma(i)`;
/// * rigid motion: `∫ h(1 − J^{−2}) J^{−(n+1)}`, `J² = 1 + e^{−2θ} d²`, against
///   `Σ E h(B_{n−i}) e^{(n−i)θ} V̄_i` with `B_{n−i} ~ Beta((n−i)/2, (i+1)/2)`;
/// * intrinsic: `∫ h(2J) e^{−J}`, `J = π e^{−2θ} d²`, against `Σ E h(X_{n−i}) e^{(n−i)θ} V_i`
///   with `X_{n−i} ~ χ²_{n−i}`.
pub fn moment_identity_check(
    body: &BodySpec,
    kind: Kind,
    theta: f64,
    h: MomentFunction,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let (n, scale) = match body {
        BodySpec::Ball { n, scale } => (*n, *scale),
        _ => return usage("moment identities are evaluated for balls"),
    };
    check_ball_args(n, scale)?;
    if !(-2.0..=2.0).contains(&theta) {
        return domain(format!("theta must lie in [-2, 2], got {theta}"));
    }
    let nf = n as f64;
    let et = theta.exp();
    let rad = match kind {
        Kind::Rotation => Radial {
            log_f: Box::new(move |r| {
                let j = 2.0 * PI * et * r;
                h.log_h(j) - j
            }),
            algebraic: None,
        },
        Kind::RigidMotion => Radial {
            log_f: Box::new(move |r| {
                let x = r * r / (et * et);
                // 1 − J^{−2} = x/(1+x)
                h.log_h(x / (1.0 + x)) - (nf + 1.0) / 2.0 * x.ln_1p()
            }),
            algebraic: Some(et),
        },
        Kind::Intrinsic => Radial {
            log_f: Box::new(move |r| {
                let j = PI * r * r / (et * et);
                h.log_h(2.0 * j) - j
            }),
            algebraic: None,
        },
    };
    let mut lhs = ball_distance_integral(n, scale, &rad, cfg);
    if kind == Kind::Rotation {
        lhs += log_omega(n as i64 + 1) + nf * theta - 2f64.ln();
    }
    let seq = reweight(&body.intrinsic()?, kind)?;
    let terms: Vec<f64> = (0..=n)
        .map(|i| {
            let mean = match kind {
                Kind::Rotation => i as f64,
                Kind::RigidMotion => (n - i) as f64 / (nf + 1.0),
                Kind::Intrinsic => (n - i) as f64,
            };
            h.expectation(mean).ln() + (n - i) as f64 * theta + seq.log_values[i]
        })
        .collect();
    let rhs = log_sum_exp(&terms);
    Ok((lhs - rhs).exp_m1().abs())
}

/// Haar-distributed rotation in `SO(n)`: QR of a Gaussian matrix with sign correction.
pub fn haar_rotation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// Projection Monte Carlo configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub seed: u64,
    pub samples: usize,
    /// Ambient dimension.
    pub n: usize,
    /// Subspace dimension.
    pub m: usize,
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Neumaier compensated summation.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn estimate(values: impl Iterator<Item = f64>, samples: usize) -> McEstimate {
    let values: Vec<f64> = values.collect();
    let mut s = CompensatedSum::default();
    values.iter().for_each(|&v| s.add(v));
    let mean = s.value() / samples as f64;
    let mut ss = CompensatedSum::default();
    values.iter().for_each(|&v| ss.add((v - mean) * (v - mean)));
    let var = ss.value() / (samples as f64 - 1.0);
    McEstimate {
        mean,
        std_error: (var / samples as f64).sqrt(),
        samples,
    }
}

fn check_mc(cfg: &McConfig, scale: f64) -> Result<()> {
    if cfg.n > MC_MAX_DIM {
        return Err(Error::Size(format!(
            "projection Monte Carlo is limited to n ≤ {MC_MAX_DIM}"
        )));
    }
    if cfg.m > cfg.n {
        return domain(format!(
            "subspace dimension {} exceeds n = {}",
            cfg.m, cfg.n
        ));
    }
    if cfg.samples < MC_MIN_SAMPLES {
        return domain(format!("at least {MC_MIN_SAMPLES} samples are required"));
    }
    if !scale.is_finite() || scale < 0.0 {
        return domain("scale must be finite and nonnegative");
    }
    Ok(())
}

/// Rotation volumes `V̊^m_i(λQ^n | L)` of the cube projected onto the span of the first `m` rows
/// of a Haar rotation drawn from substream `index`.
fn projected_rotation_volumes(cfg: &McConfig, scale: f64, index: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let o = haar_rotation(cfg.n, &mut rng);
    let gens: Vec<Vec<f64>> = (0..cfg.n)
        .map(|j| (0..cfg.m).map(|r| scale * o[(r, j)]).collect())
        .collect();
    let z = intrinsic_zonotope(cfg.m, &gens).expect("cube generators are within limits");
    to_rotation(&z)
        .expect("zonotope sequences are intrinsic")
        .values()
}

fn sample_all(cfg: &McConfig, scale: f64) -> Vec<Vec<f64>> {
    (0..cfg.samples as u64)
        .into_par_iter()
        .map(|s| projected_rotation_volumes(cfg, scale, s))
        .collect()
}

/// Monte Carlo estimate of `∫ W̊^m(K|L)/W̊^n(K) ν_m(dL)` for `K = λQ^n`.
pub fn mc_rand_proj(scale: f64, cfg: &McConfig) -> Result<McEstimate> {
    check_mc(cfg, scale)?;
    let total = to_rotation(&BodySpec::cube(cfg.n, scale).intrinsic()?)?.log_total();
    let samples = sample_all(cfg, scale);
    let ratios = samples
        .iter()
        .map(|v| (v.iter().sum::<f64>().ln() - total).exp());
    Ok(estimate(ratios, cfg.samples))
}

/// Monte Carlo means of each `V̊^m_i(K|L)`, `i = 0..=m`, for `K = λQ^n`.
pub fn mc_projection_indices(scale: f64, cfg: &McConfig) -> Result<Vec<McEstimate>> {
    check_mc(cfg, scale)?;
    let samples = sample_all(cfg, scale);
    Ok((0..=cfg.m)
        .map(|i| estimate(samples.iter().map(|v| v[i]), cfg.samples))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::intrinsic_ball;
    use crate::phase::rand_proj;
    use crate::weighted::{distribution, to_rigid_motion};
    use approx::assert_relative_eq;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn ball_wills_fixtures() {
        // n = 1: 2λ + 1
        for lam in [0.0, 0.5, 3.0] {
            assert_relative_eq!(
                quad_ball_wills(1, lam, &cfg()).unwrap(),
                (2.0 * lam + 1.0).ln(),
                epsilon = 1e-12
            );
        }
        // a point has W = 1 whatever n
        for n in [1usize, 4, 17] {
            assert!(quad_ball_wills(n, 0.0, &cfg()).unwrap().abs() < 1e-10);
        }
        for n in [2usize, 9, 40] {
            let exact = intrinsic_ball(n, 1.3).log_total();
            assert!((quad_ball_wills(n, 1.3, &cfg()).unwrap() - exact).abs() < 1e-9);
        }
        assert!(quad_ball_wills(0, 1.0, &cfg()).is_err());
    }

    #[test]
    fn ball_rm_total_fixtures() {
        assert_relative_eq!(
            quad_ball_rm_total(1, 1.0, &cfg()).unwrap(),
            (2.0 * (1.0 + PI / 2.0)).ln(),
            epsilon = 1e-12
        );
        let mut last = f64::NEG_INFINITY;
        for k in 0..10 {
            let lam = 0.25 * k as f64;
            let v = quad_ball_rm_total(5, lam, &cfg()).unwrap();
            let exact = to_rigid_motion(&intrinsic_ball(5, lam))
                .unwrap()
                .log_total();
            assert!((v - exact).abs() < 1e-9);
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn cube_total_fixtures() {
        for n in [1usize, 3, 20] {
            let rot = quad_cube_totals(n, 1.0, Kind::Rotation, &cfg()).unwrap();
            let rig = quad_cube_totals(n, 1.0, Kind::RigidMotion, &cfg()).unwrap();
            assert!((rot - rig).abs() < 1e-10);
            let exact = crate::weighted::to_rotation(&crate::bodies::intrinsic_cube(n, 1.0))
                .unwrap()
                .log_total();
            assert!((rot - exact).abs() < 1e-9);
        }
        // λ = 0 leaves only V̊_n = 1 for the rotation total
        let zero = quad_cube_totals(4, 0.0, Kind::Rotation, &cfg()).unwrap();
        assert!(zero.abs() < 1e-10);
        assert!(quad_cube_totals(3, 1.0, Kind::Intrinsic, &cfg()).is_err());
    }

    #[test]
    fn metric_total_segment() {
        let v = metric_total(&BodySpec::cube(1, 1.0), Kind::Intrinsic, &cfg()).unwrap();
        assert_relative_eq!(v, 2f64.ln(), epsilon = 1e-10);
        let exact = to_rigid_motion(&intrinsic_ball(2, 1.0))
            .unwrap()
            .log_total();
        let rm = metric_total(&BodySpec::ball(2, 1.0), Kind::RigidMotion, &cfg()).unwrap();
        assert!((rm - exact).abs() < 1e-8);
        assert!(metric_total(
            &BodySpec::Explicit {
                log_values: vec![0.0]
            },
            Kind::Intrinsic,
            &cfg()
        )
        .is_err());
    }

    #[test]
    fn metric_total_square_all_kinds() {
        let body = BodySpec::parallelotope(vec![0.5, 2.0]);
        for kind in [Kind::Intrinsic, Kind::Rotation, Kind::RigidMotion] {
            let exact = reweight(&body.intrinsic().unwrap(), kind)
                .unwrap()
                .log_total();
            let got = metric_total(&body, kind, &cfg()).unwrap();
            assert!((got - exact).abs() < 1e-8, "{kind:?}: {got} vs {exact}");
        }
    }

    #[test]
    fn steiner_fixtures() {
        assert!(
            generalized_steiner_check(&BodySpec::ball(2, 1.0), TestFunction::Gaussian, &cfg())
                .unwrap()
                < 1e-8
        );
        assert!(
            generalized_steiner_check(&BodySpec::ball(3, 1.0), TestFunction::Exponential, &cfg())
                .unwrap()
                < 1e-8
        );
        assert!(
            generalized_steiner_check(&BodySpec::ball(3, 0.0), TestFunction::Algebraic, &cfg())
                .unwrap()
                < 1e-8
        );
        assert!(
            generalized_steiner_check(&BodySpec::cube(2, 1.5), TestFunction::Exponential, &cfg())
                .unwrap()
                < 1e-8
        );
        assert!(
            generalized_steiner_check(&BodySpec::cube(5, 1.0), TestFunction::Gaussian, &cfg())
                .is_err()
        );
    }

    #[test]
    fn moment_fixtures() {
        let ball3 = BodySpec::ball(3, 1.0);
        assert!(
            moment_identity_check(&ball3, Kind::Rotation, 0.5, MomentFunction::One, &cfg())
                .unwrap()
                < 1e-7
        );
        assert!(
            moment_identity_check(&ball3, Kind::RigidMotion, -0.5, MomentFunction::One, &cfg())
                .unwrap()
                < 1e-7
        );
        // θ = 0, h ≡ 1 is the metric total
        let intr = moment_identity_check(&ball3, Kind::Intrinsic, 0.0, MomentFunction::One, &cfg())
            .unwrap();
        assert!(intr < 1e-9);
        for kind in [Kind::Intrinsic, Kind::Rotation, Kind::RigidMotion] {
            for theta in [-1.0, 0.3] {
                let r = moment_identity_check(
                    &BodySpec::ball(4, 0.7),
                    kind,
                    theta,
                    MomentFunction::Identity,
                    &cfg(),
                )
                .unwrap();
                assert!(r < 1e-7, "{kind:?} θ={theta}: {r}");
            }
        }
        assert!(moment_identity_check(
            &BodySpec::cube(3, 1.0),
            Kind::Rotation,
            0.0,
            MomentFunction::One,
            &cfg()
        )
        .is_err());
        assert!(
            moment_identity_check(&ball3, Kind::Rotation, 3.0, MomentFunction::One, &cfg())
                .is_err()
        );
    }

    #[test]
    fn haar_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let one = haar_rotation(1, &mut rng);
        assert_eq!(one[(0, 0)], 1.0);
        for n in [2usize, 3, 7] {
            let q = haar_rotation(n, &mut rng);
            let err = (q.transpose() * &q - DMatrix::<f64>::identity(n, n))
                .abs()
                .max();
            assert!(err <= 1e-12);
            assert!((q.determinant() - 1.0).abs() < 1e-12);
            for c in q.column_iter() {
                assert!((c.norm() - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn haar_trace_mean_is_zero() {
        let traces: Vec<f64> = (0..10_000u64)
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(11);
                rng.set_stream(s);
                haar_rotation(3, &mut rng).trace()
            })
            .collect();
        let mean = traces.iter().sum::<f64>() / traces.len() as f64;
        assert!(mean.abs() <= 4.0 / 100.0, "mean trace {mean}");
    }

    #[test]
    fn haar_left_invariance_statistic() {
        // the (0,0) entry of O and of R·O share a law; compare second moments (1/n)
        let mut rng0 = ChaCha8Rng::seed_from_u64(99);
        let r = haar_rotation(4, &mut rng0);
        let (mut a, mut b) = (0.0, 0.0);
        let count = 5000;
        for s in 0..count {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            rng.set_stream(s);
            let o = haar_rotation(4, &mut rng);
            a += o[(0, 0)].powi(2);
            b += (&r * &o)[(0, 0)].powi(2);
        }
        let (a, b) = (a / count as f64, b / count as f64);
        assert!((a - 0.25).abs() < 0.02 && (b - 0.25).abs() < 0.02);
    }

    #[test]
    fn mc_edge_cases() {
        let full = McConfig {
            seed: 1,
            samples: 200,
            n: 4,
            m: 4,
        };
        let e = mc_rand_proj(1.0, &full).unwrap();
        assert!((e.mean - 1.0).abs() < 1e-10);
        let zero = McConfig { m: 0, ..full };
        let e0 = mc_rand_proj(1.0, &zero).unwrap();
        let total = to_rotation(&crate::bodies::intrinsic_cube(4, 1.0))
            .unwrap()
            .log_total();
        assert_relative_eq!(e0.mean, (-total).exp(), max_relative = 1e-12);
        assert!(mc_rand_proj(
            1.0,
            &McConfig {
                n: 13,
                m: 2,
                ..full
            }
        )
        .is_err());
        assert!(mc_rand_proj(
            1.0,
            &McConfig {
                samples: 10,
                ..full
            }
        )
        .is_err());
        assert!(mc_rand_proj(1.0, &McConfig { m: 5, ..full }).is_err());
    }

    #[test]
    fn mc_is_deterministic() {
        let c = McConfig {
            seed: 42,
            samples: 300,
            n: 5,
            m: 2,
        };
        let a = mc_rand_proj(1.0, &c).unwrap();
        let b = mc_rand_proj(1.0, &c).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn mc_matches_exact_projection() {
        let c = McConfig {
            seed: 2024,
            samples: 4000,
            n: 6,
            m: 3,
        };
        let e = mc_rand_proj(1.0, &c).unwrap();
        let exact = rand_proj(
            &distribution(&to_rotation(&crate::bodies::intrinsic_cube(6, 1.0)).unwrap()).unwrap(),
            3,
        )
        .unwrap();
        assert!(
            (e.mean - exact).abs() <= 4.0 * e.std_error,
            "{} vs {exact} ± {}",
            e.mean,
            e.std_error
        );
    }
}
