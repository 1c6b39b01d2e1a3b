//! Weighted volume sequences and the laws of their volume random variables.

use serde::{Deserialize, Serialize};

use crate::bodies::{log_convolve, Kind, LogSequence};
use crate::error::{domain, usage, Result};
use crate::specfun::{log_omega, log_sum_exp};

/// Slack for log-concavity checks in the log domain.
pub const LOG_CONCAVITY_TOLERANCE: f64 = 1e-10;

fn require_intrinsic(seq: &LogSequence) -> Result<()> {
    if seq.kind == Kind::Intrinsic {
        Ok(())
    } else {
        usage(format!(
            "expected an intrinsic sequence, got {}",
            seq.kind.name()
        ))
    }
}

/// `V̊_i = (ω_{n+1}/ω_{i+1}) V_{n−i}`.
pub fn to_rotation(seq: &LogSequence) -> Result<LogSequence> {
    require_intrinsic(seq)?;
    let n = seq.n();
    let top = log_omega(n as i64 + 1);
    let log_values = (0..=n)
        .map(|i| top - log_omega(i as i64 + 1) + seq.log_values[n - i])
        .collect();
    Ok(LogSequence {
        kind: Kind::Rotation,
        log_values,
    })
}

/// `V̄_i = (ω_{n+1}/ω_{i+1}) V_i`.
pub fn to_rigid_motion(seq: &LogSequence) -> Result<LogSequence> {
    require_intrinsic(seq)?;
    let n = seq.n();
    let top = log_omega(n as i64 + 1);
    let log_values = (0..=n)
        .map(|i| top - log_omega(i as i64 + 1) + seq.log_values[i])
        .collect();
    Ok(LogSequence {
        kind: Kind::RigidMotion,
        log_values,
    })
}

/// Reweights an intrinsic sequence to the requested kind.
pub fn reweight(seq: &LogSequence, kind: Kind) -> Result<LogSequence> {
    match kind {
        Kind::Intrinsic => {
            require_intrinsic(seq)?;
            Ok(seq.clone())
        }
        Kind::Rotation => to_rotation(seq),
        Kind::RigidMotion => to_rigid_motion(seq),
    }
}

/// `ln Σ_i t^{n−i} value_i`.
pub fn char_poly(seq: &LogSequence, t: f64) -> Result<f64> {
    if !t.is_finite() || t <= 0.0 {
        return domain(format!("characteristic polynomial needs t > 0, got {t}"));
    }
    let n = seq.n();
    let lt = t.ln();
    let terms: Vec<f64> = seq
        .log_values
        .iter()
        .enumerate()
        .map(|(i, v)| v + (n - i) as f64 * lt)
        .collect();
    Ok(log_sum_exp(&terms))
}

/// Law of a volume random variable on `{0, …, n}`, stored on the value axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeDistribution {
    pub kind: Kind,
    #[serde(with = "crate::logser::vec")]
    pub log_pmf: Vec<f64>,
    pub log_total: f64,
}

/// Builds the normalized law with `P[I = n − i] = value_i / total`.
pub fn distribution(seq: &LogSequence) -> Result<VolumeDistribution> {
    let log_total = seq.log_total();
    if log_total == f64::NEG_INFINITY {
        return domain("the empty body has no volume distribution");
    }
    let log_pmf = seq.log_values.iter().rev().map(|v| v - log_total).collect();
    Ok(VolumeDistribution {
        kind: seq.kind,
        log_pmf,
        log_total,
    })
}

impl VolumeDistribution {
    /// Largest attainable value.
    pub fn n(&self) -> usize {
        self.log_pmf.len() - 1
    }

    pub fn pmf(&self) -> Vec<f64> {
        self.log_pmf.iter().map(|v| v.exp()).collect()
    }

    /// `E[I]`.
    pub fn mean(&self) -> f64 {
        self.pmf()
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum()
    }

    /// `Var[I]`, computed about the mean.
    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.pmf()
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let d = k as f64 - mu;
                d * d * p
            })
            .sum()
    }

    /// `ln E e^{θI}`.
    pub fn cgf(&self, theta: f64) -> f64 {
        let terms: Vec<f64> = self
            .log_pmf
            .iter()
            .enumerate()
            .map(|(k, lp)| lp + theta * k as f64)
            .collect();
        log_sum_exp(&terms)
    }

    /// `ln E e^{θ(I − E I)}`, evaluated stably by shifting inside the sum.
    pub fn centered_cgf(&self, theta: f64) -> f64 {
        let mu = self.mean();
        let terms: Vec<f64> = self
            .log_pmf
            .iter()
            .enumerate()
            .map(|(k, lp)| lp + theta * (k as f64 - mu))
            .collect();
        log_sum_exp(&terms)
    }

    /// `P[I ≤ m]`.
    pub fn cdf(&self, m: usize) -> f64 {
        let upto = m.min(self.n());
        let lower: f64 = self.pmf()[..=upto].iter().sum();
        lower.min(1.0)
    }

    /// `P[|I − E I| ≥ t]`.
    pub fn two_sided_tail(&self, t: f64) -> f64 {
        let mu = self.mean();
        self.pmf()
            .iter()
            .enumerate()
            .filter(|(k, _)| (*k as f64 - mu).abs() >= t)
            .map(|(_, p)| p)
            .sum()
    }
}

/// Central volume `E[I]`.
pub fn central_volume(d: &VolumeDistribution) -> f64 {
    d.mean()
}

/// `Var[I]`.
pub fn exact_variance(d: &VolumeDistribution) -> f64 {
    d.variance()
}

/// `ξ(θ) = ln E e^{θI}`.
pub fn exact_cgf(d: &VolumeDistribution, theta: f64) -> f64 {
    d.cgf(theta)
}

/// Law of the sum of independent variables.
pub fn pmf_convolve(a: &VolumeDistribution, b: &VolumeDistribution) -> Result<VolumeDistribution> {
    if a.kind != b.kind {
        return usage(format!(
            "cannot convolve {} with {} distributions",
            a.kind.name(),
            b.kind.name()
        ));
    }
    let mut log_pmf = log_convolve(&a.log_pmf, &b.log_pmf);
    // renormalize away accumulated rounding
    let z = log_sum_exp(&log_pmf);
    log_pmf.iter_mut().for_each(|v| *v -= z);
    Ok(VolumeDistribution {
        kind: a.kind,
        log_pmf,
        log_total: a.log_total + b.log_total,
    })
}

/// `2 ln v_i ≥ ln v_{i−1} + ln v_{i+1} − tol` at every interior index.
pub fn is_log_concave(seq: &LogSequence) -> bool {
    seq.log_values.windows(3).all(|w| {
        let (a, b, c) = (w[0], w[1], w[2]);
        if a == f64::NEG_INFINITY || c == f64::NEG_INFINITY {
            return true;
        }
        2.0 * b >= a + c - LOG_CONCAVITY_TOLERANCE
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{intrinsic_ball, intrinsic_cube, intrinsic_parallelotope};
    use crate::specfun::log_kappa;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn rotation_of_square() {
        let r = to_rotation(&intrinsic_cube(2, 1.0)).unwrap();
        let v = r.values();
        assert_relative_eq!(v[0], 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(v[1], 4.0, max_relative = 1e-14);
        assert_relative_eq!(v[2], 1.0, max_relative = 1e-14);
        assert_eq!(r.kind, Kind::Rotation);
    }

    #[test]
    fn rigid_motion_of_square() {
        let v = to_rigid_motion(&intrinsic_cube(2, 1.0)).unwrap().values();
        assert_relative_eq!(v[0], 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(v[1], 4.0, max_relative = 1e-14);
        assert_relative_eq!(v[2], 1.0, max_relative = 1e-14);
    }

    #[test]
    fn point_reweightings() {
        let r = to_rotation(&LogSequence::point(4)).unwrap();
        assert!(r.log_values[..4].iter().all(|v| *v == f64::NEG_INFINITY));
        assert_relative_eq!(r.log_values[4], 0.0, epsilon = 1e-15);
        let m = to_rigid_motion(&LogSequence::point(4)).unwrap();
        assert!(m.log_values[1..].iter().all(|v| *v == f64::NEG_INFINITY));
        assert_relative_eq!(
            m.log_values[0],
            log_omega(5) - 2f64.ln(),
            max_relative = 1e-14
        );
        assert!(to_rotation(&r).is_err());
    }

    #[test]
    fn cube_rotation_is_ball_one_dimension_up() {
        for n in 1..=40usize {
            for lam in [0.5, 1.0, 2.0] {
                let r = to_rotation(&intrinsic_cube(n, lam)).unwrap();
                let b = intrinsic_ball(n + 1, lam);
                for i in 0..=n {
                    assert!((r.log_values[i] - b.log_values[n - i]).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn ball_rigid_motion_closed_form() {
        // V̄_i(λB^n)/ω_{n+1} = C(n,i) κ_n / (κ_{n−i} ω_{i+1}) λ^i
        let (n, lam) = (6usize, 1.7f64);
        let r = to_rigid_motion(&intrinsic_ball(n, lam)).unwrap();
        for i in 0..=n {
            let binom: f64 = (0..i).map(|j| (n - j) as f64 / (j + 1) as f64).product();
            let expect = binom.ln() + log_kappa(n as i64)
                - log_kappa((n - i) as i64)
                - log_omega(i as i64 + 1)
                + i as f64 * lam.ln();
            assert_relative_eq!(
                r.log_values[i] - log_omega(n as i64 + 1),
                expect,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn char_poly_fixtures() {
        let c = intrinsic_cube(2, 1.0);
        assert_relative_eq!(
            char_poly(&c, 1.0).unwrap(),
            c.log_total(),
            max_relative = 1e-15
        );
        assert_relative_eq!(char_poly(&c, 2.0).unwrap(), 9f64.ln(), max_relative = 1e-15);
        assert!(char_poly(&c, 0.0).is_err());
        // χ_K(t) = t^n W(t^{-1} K)
        for n in [1usize, 4, 9] {
            for t in [0.5, 1.0, 2.0] {
                for lam in [0.5, 3.0] {
                    let lhs = char_poly(&intrinsic_cube(n, lam), t).unwrap();
                    let rhs = n as f64 * t.ln() + intrinsic_cube(n, lam / t).log_total();
                    assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn square_rotation_distribution() {
        let d = distribution(&to_rotation(&intrinsic_cube(2, 1.0)).unwrap()).unwrap();
        let z = 5.0 + 2.0 * PI;
        let p = d.pmf();
        assert_relative_eq!(p[2], 2.0 * PI / z, max_relative = 1e-14);
        assert_relative_eq!(p[1], 4.0 / z, max_relative = 1e-14);
        assert_relative_eq!(p[0], 1.0 / z, max_relative = 1e-14);
        let mean = (4.0 * PI + 4.0) / z;
        assert_relative_eq!(central_volume(&d), mean, max_relative = 1e-14);
        assert_relative_eq!(
            central_volume(&d),
            1.468_235_268_973_013_4,
            max_relative = 1e-12
        );
        let second = (8.0 * PI + 4.0) / z;
        assert_relative_eq!(
            exact_variance(&d),
            second - mean * mean,
            max_relative = 1e-12
        );
    }

    #[test]
    fn point_distributions() {
        let d = distribution(&LogSequence::point(5)).unwrap();
        assert_relative_eq!(d.pmf()[5], 1.0);
        assert_eq!(exact_variance(&d), 0.0);
        let r = distribution(&to_rotation(&LogSequence::point(5)).unwrap()).unwrap();
        assert_eq!(central_volume(&r), 0.0);
        let empty = LogSequence::new(Kind::Intrinsic, vec![f64::NEG_INFINITY; 3]).unwrap();
        assert!(distribution(&empty).is_err());
    }

    #[test]
    fn cgf_basics() {
        let d = distribution(&to_rigid_motion(&intrinsic_ball(7, 0.8)).unwrap()).unwrap();
        assert!(exact_cgf(&d, 0.0).abs() < 1e-15);
        let h = 1e-5;
        let deriv = (exact_cgf(&d, h) - exact_cgf(&d, -h)) / (2.0 * h);
        assert!((deriv - central_volume(&d)).abs() < 1e-6);
        let second = (exact_cgf(&d, h) - 2.0 * exact_cgf(&d, 0.0) + exact_cgf(&d, -h)) / (h * h);
        assert!((second - exact_variance(&d)).abs() < 1e-3);
    }

    #[test]
    fn convolution_matches_brute_force() {
        let a = distribution(&to_rotation(&intrinsic_ball(3, 1.2)).unwrap()).unwrap();
        let b = distribution(&to_rotation(&intrinsic_cube(4, 0.6)).unwrap()).unwrap();
        let c = pmf_convolve(&a, &b).unwrap();
        let (pa, pb) = (a.pmf(), b.pmf());
        let mut brute = vec![0.0; 8];
        for (j, x) in pa.iter().enumerate() {
            for (k, y) in pb.iter().enumerate() {
                brute[j + k] += x * y;
            }
        }
        for (x, y) in c.pmf().iter().zip(&brute) {
            assert_relative_eq!(*x, *y, max_relative = 1e-12);
        }
        assert_relative_eq!(c.mean(), a.mean() + b.mean(), max_relative = 1e-12);
        for k in -20..=20 {
            let th = k as f64 * 0.25;
            let mut terms = Vec::new();
            for (j, x) in pa.iter().enumerate() {
                for (k, y) in pb.iter().enumerate() {
                    terms.push((x * y).ln() + th * (j + k) as f64);
                }
            }
            assert_relative_eq!(
                c.cgf(th),
                log_sum_exp(&terms),
                max_relative = 1e-12,
                epsilon = 1e-12
            );
            assert_relative_eq!(
                c.cgf(th),
                a.cgf(th) + b.cgf(th),
                max_relative = 1e-12,
                epsilon = 1e-12
            );
        }
        let shifted = pmf_convolve(
            &distribution(&LogSequence::point(2)).unwrap(),
            &distribution(&LogSequence::point(3)).unwrap(),
        )
        .unwrap();
        assert_relative_eq!(shifted.pmf()[5], 1.0);
        let rigid = distribution(&to_rigid_motion(&intrinsic_ball(3, 1.0)).unwrap()).unwrap();
        assert!(pmf_convolve(&a, &rigid).is_err());
    }

    #[test]
    fn log_concavity_fixtures() {
        for n in 1..=10 {
            assert!(is_log_concave(
                &to_rotation(&intrinsic_cube(n, 1.0)).unwrap()
            ));
            for lam in [0.5, 1.0, 2.0] {
                assert!(is_log_concave(
                    &to_rigid_motion(&intrinsic_ball(n, lam)).unwrap()
                ));
            }
        }
        let bad = LogSequence::new(Kind::Intrinsic, vec![0.0, 0.0, 10f64.ln()]).unwrap();
        assert!(!is_log_concave(&bad));
    }

    #[test]
    fn central_volume_monotone_in_scale() {
        for n in [1usize, 3, 8, 20] {
            let scales: Vec<f64> = (-4..=4).map(|k| 2f64.powi(k)).collect();
            let mut last_rot = -1.0;
            let mut last_rig = f64::INFINITY;
            for &lam in &scales {
                let c = intrinsic_cube(n, lam);
                let rot = central_volume(&distribution(&to_rotation(&c).unwrap()).unwrap());
                let rig = central_volume(&distribution(&to_rigid_motion(&c).unwrap()).unwrap());
                assert!(rot >= last_rot - 1e-12 && rig <= last_rig + 1e-12);
                last_rot = rot;
                last_rig = rig;
            }
            let mut last_rot = -1.0;
            let mut last_rig = f64::INFINITY;
            for &lam in &scales {
                let b = intrinsic_ball(n, lam);
                let rot = central_volume(&distribution(&to_rotation(&b).unwrap()).unwrap());
                let rig = central_volume(&distribution(&to_rigid_motion(&b).unwrap()).unwrap());
                assert!(rot >= last_rot - 1e-12 && rig <= last_rig + 1e-12);
                last_rot = rot;
                last_rig = rig;
            }
        }
    }

    #[test]
    fn central_volume_is_log_derivative() {
        for seq in [
            intrinsic_cube(6, 1.3),
            intrinsic_ball(5, 0.4),
            intrinsic_parallelotope(&[0.5, 2.0, 4.0]),
        ] {
            let rot = to_rotation(&seq).unwrap();
            let h = 1e-5;
            let deriv =
                (char_poly(&rot, 1.0 + h).unwrap() - char_poly(&rot, 1.0 - h).unwrap()) / (2.0 * h);
            let d = central_volume(&distribution(&rot).unwrap());
            assert!((deriv - d).abs() < 1e-6);
        }
    }

    proptest! {
        #[test]
        fn distribution_is_normalized_and_reversed(n in 1usize..60, lam in 0.01f64..20.0, which in 0usize..3) {
            let base = intrinsic_ball(n, lam);
            let seq = match which {
                0 => base.clone(),
                1 => to_rotation(&base).unwrap(),
                _ => to_rigid_motion(&base).unwrap(),
            };
            let d = distribution(&seq).unwrap();
            prop_assert!(log_sum_exp(&d.log_pmf).abs() <= 1e-12);
            for i in 0..=n {
                prop_assert!((d.log_pmf[n - i] - (seq.log_values[i] - d.log_total)).abs() <= 1e-12);
            }
            let mu = central_volume(&d);
            prop_assert!((0.0..=n as f64).contains(&mu));
        }

        #[test]
        fn cgf_is_convex(n in 1usize..40, lam in 0.05f64..10.0) {
            let d = distribution(&to_rotation(&intrinsic_cube(n, lam)).unwrap()).unwrap();
            let h = 0.1;
            for k in -50..50 {
                let t = k as f64 * h;
                let second = d.cgf(t + h) - 2.0 * d.cgf(t) + d.cgf(t - h);
                prop_assert!(second >= -1e-9);
            }
        }
    }
}
