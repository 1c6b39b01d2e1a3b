//! Exact integral-geometry functionals and phase-transition classification.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::{BodySpec, Kind};
use crate::concentration::{transition_width, TailBound, WidthRule};
use crate::error::{domain, usage, Error, Result};
use crate::weighted::{distribution, pmf_convolve, reweight, VolumeDistribution};

/// Slack allowed when asserting the theorem implications on computed values.
pub const IMPLICATION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Functional {
    RandProj,
    RandSlice,
    RotMean,
    Kinematic,
}

impl Functional {
    pub fn name(self) -> &'static str {
        match self {
            Functional::RandProj => "randproj",
            Functional::RandSlice => "randslice",
            Functional::RotMean => "rotmean",
            Functional::Kinematic => "kinematic",
        }
    }

    /// Volume kind whose law the functional reads.
    pub fn kind(self) -> Kind {
        match self {
            Functional::RandProj | Functional::RotMean => Kind::Rotation,
            Functional::RandSlice | Functional::Kinematic => Kind::RigidMotion,
        }
    }

    pub fn width_rule(self) -> WidthRule {
        match self {
            Functional::RandProj => WidthRule::Projection,
            Functional::RotMean => WidthRule::RotationMean,
            Functional::RandSlice => WidthRule::Slice,
            Functional::Kinematic => WidthRule::Kinematic,
        }
    }

    /// Whether the functional takes two bodies.
    pub fn is_pair(self) -> bool {
        matches!(self, Functional::RotMean | Functional::Kinematic)
    }
}

impl std::str::FromStr for Functional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "randproj" => Ok(Functional::RandProj),
            "randslice" => Ok(Functional::RandSlice),
            "rotmean" => Ok(Functional::RotMean),
            "kinematic" => Ok(Functional::Kinematic),
            other => usage(format!("unknown functional '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Low,
    Transition,
    High,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::Low => "low",
            Classification::Transition => "transition",
            Classification::High => "high",
        }
    }
}

fn require(d: &VolumeDistribution, kind: Kind) -> Result<()> {
    if d.kind == kind {
        Ok(())
    } else {
        usage(format!(
            "expected a {} distribution, got {}",
            kind.name(),
            d.kind.name()
        ))
    }
}

fn cdf_at(d: &VolumeDistribution, m: usize) -> Result<f64> {
    if m > d.n() {
        return domain(format!("m = {m} exceeds the dimension {}", d.n()));
    }
    Ok(d.cdf(m))
}

/// Random projection functional `P[I̊ ≤ m]`.
pub fn rand_proj(d: &VolumeDistribution, m: usize) -> Result<f64> {
    require(d, Kind::Rotation)?;
    cdf_at(d, m)
}

/// Random slice functional `P[Ī ≤ m]`.
pub fn rand_slice(d: &VolumeDistribution, m: usize) -> Result<f64> {
    require(d, Kind::RigidMotion)?;
    cdf_at(d, m)
}

fn pair_cdf(dk: &VolumeDistribution, dm: &VolumeDistribution, kind: Kind) -> Result<f64> {
    require(dk, kind)?;
    require(dm, kind)?;
    if dk.n() != dm.n() {
        return usage(format!(
            "bodies live in dimensions {} and {}",
            dk.n(),
            dm.n()
        ));
    }
    Ok(pmf_convolve(dk, dm)?.cdf(dk.n()))
}

/// Rotation mean functional `P[I̊_K + I̊_M ≤ n]`.
pub fn rot_mean(dk: &VolumeDistribution, dm: &VolumeDistribution) -> Result<f64> {
    pair_cdf(dk, dm, Kind::Rotation)
}

/// Kinematic functional `P[Ī_K + Ī_M ≤ n]`.
pub fn kinematic(dk: &VolumeDistribution, dm: &VolumeDistribution) -> Result<f64> {
    pair_cdf(dk, dm, Kind::RigidMotion)
}

/// Position of `x` relative to the closed window `[location − width, location + width]`.
///
/// Single-body functionals are cdfs in `m`, so small `m` gives small values. Pair functionals
/// decrease as the summed central volume grows.
pub fn classify_point(functional: Functional, x: f64, location: f64, width: f64) -> Classification {
    let below = x < location - width;
    let above = x > location + width;
    match (functional.is_pair(), below, above) {
        (_, false, false) => Classification::Transition,
        (false, true, _) | (true, _, true) => Classification::Low,
        _ => Classification::High,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    /// `m` for single-body functionals, the summed central volume for pairs.
    pub param: f64,
    pub value: f64,
    pub classification: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub functional: Functional,
    pub n: usize,
    /// Central volume for single-body functionals, `n` for pairs.
    pub location: f64,
    pub alpha: f64,
    pub width: f64,
    pub points: Vec<PhasePoint>,
}

impl PhaseReport {
    /// Points whose value contradicts their classification.
    pub fn violations(&self) -> Vec<&PhasePoint> {
        self.points
            .iter()
            .filter(|p| match p.classification {
                Classification::Low => p.value > self.alpha + IMPLICATION_SLACK,
                Classification::High => p.value < 1.0 - self.alpha - IMPLICATION_SLACK,
                Classification::Transition => false,
            })
            .collect()
    }

    fn checked(self) -> Result<Self> {
        if let Some(p) = self.violations().first() {
            return Err(Error::Numeric(format!(
                "{} at parameter {} has value {} but is classified {}",
                self.functional.name(),
                p.param,
                p.value,
                p.classification.name()
            )));
        }
        Ok(self)
    }
}

/// Law of the volume random variable a functional reads for `body`.
pub fn body_distribution(body: &BodySpec, functional: Functional) -> Result<VolumeDistribution> {
    distribution(&reweight(&body.intrinsic()?, functional.kind())?)
}

/// Evaluates a functional and classifies each point; fails if a theorem implication is violated.
///
/// For single-body functionals `ms` lists the `m` values (default `0..=n`); pairs yield one point.
pub fn classify(
    functional: Functional,
    bodies: &[BodySpec],
    alpha: f64,
    ms: Option<&[usize]>,
) -> Result<PhaseReport> {
    let want = if functional.is_pair() { 2 } else { 1 };
    if bodies.len() != want {
        return usage(format!(
            "{} takes {want} bod{}",
            functional.name(),
            if want == 1 { "y" } else { "ies" }
        ));
    }
    let dists = bodies
        .iter()
        .map(|b| body_distribution(b, functional))
        .collect::<Result<Vec<_>>>()?;
    classify_distributions(functional, &dists, alpha, ms)
}

/// As [`classify`], starting from precomputed laws.
pub fn classify_distributions(
    functional: Functional,
    dists: &[VolumeDistribution],
    alpha: f64,
    ms: Option<&[usize]>,
) -> Result<PhaseReport> {
    let bounds = dists
        .iter()
        .map(TailBound::from_distribution)
        .collect::<Result<Vec<_>>>()?;
    let width = transition_width(&bounds, alpha, functional.width_rule())?;
    let n = dists[0].n();
    let report = if functional.is_pair() {
        let value = match functional {
            Functional::RotMean => rot_mean(&dists[0], &dists[1])?,
            _ => kinematic(&dists[0], &dists[1])?,
        };
        let total = bounds[0].delta + bounds[1].delta;
        let location = n as f64;
        PhaseReport {
            functional,
            n,
            location,
            alpha,
            width,
            points: vec![PhasePoint {
                param: total,
                value,
                classification: classify_point(functional, total, location, width),
            }],
        }
    } else {
        let all: Vec<usize> = (0..=n).collect();
        let ms = ms.unwrap_or(&all);
        let location = bounds[0].delta;
        let points = ms
            .iter()
            .map(|&m| {
                let value = match functional {
                    Functional::RandProj => rand_proj(&dists[0], m)?,
                    _ => rand_slice(&dists[0], m)?,
                };
                Ok(PhasePoint {
                    param: m as f64,
                    value,
                    classification: classify_point(functional, m as f64, location, width),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PhaseReport {
            functional,
            n,
            location,
            alpha,
            width,
            points,
        }
    };
    report.checked()
}

/// One-parameter body families used by sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `λQ^n`.
    Cube,
    /// `ζ√(2n/π) Q^n`.
    CubeZeta,
    /// `λB^n`.
    Ball,
}

impl Family {
    pub fn body(self, n: usize, param: f64) -> BodySpec {
        match self {
            Family::Cube => BodySpec::cube(n, param),
            Family::CubeZeta => BodySpec::cube(n, param * (2.0 * n as f64 / PI).sqrt()),
            Family::Ball => BodySpec::ball(n, param),
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cube" => Ok(Family::Cube),
            "cube-zeta" | "cube_zeta" => Ok(Family::CubeZeta),
            "ball" => Ok(Family::Ball),
            other => usage(format!("unknown family '{other}'")),
        }
    }
}

/// Families with a closed-form large-`n` limit of the normalized central volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AsymptoticFamily {
    /// `δ̊(ζ√(2n/π)Q^n)/n → 2/(1 + √(1 + ζ^{−2}))`.
    ScaledCubeRotation,
    /// `δ̄(λB^n)/n → 1/(1 + λ²)`.
    ScaledBallRigid,
}

pub fn asymptotic_location(family: AsymptoticFamily, param: f64) -> Result<f64> {
    if param.is_nan() || param <= 0.0 {
        return domain(format!(
            "asymptotic family parameter must be positive, got {param}"
        ));
    }
    Ok(match family {
        AsymptoticFamily::ScaledCubeRotation => {
            if param == f64::INFINITY {
                1.0
            } else {
                2.0 / (1.0 + (1.0 + 1.0 / (param * param)).sqrt())
            }
        }
        AsymptoticFamily::ScaledBallRigid => 1.0 / (1.0 + param * param),
    })
}

/// One row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub functional: Functional,
    pub n: usize,
    pub param1: f64,
    pub param2: Option<f64>,
    pub m: Option<usize>,
    pub value: f64,
    pub classification: Classification,
}

/// Overlay row comparing the normalized central volume with its asymptotic limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayRow {
    pub param1: f64,
    pub param2: Option<f64>,
    /// `δ/n` for one body, `(δ_K + δ_M)/n` for pairs.
    pub normalized_location: f64,
    pub asymptotic_location: Option<f64>,
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn asymptotic_for(functional: Functional, family: Family, n: usize, param: f64) -> Option<f64> {
    let zeta = match family {
        Family::CubeZeta => param,
        Family::Cube => param / (2.0 * n as f64 / PI).sqrt(),
        Family::Ball => {
            return (functional.kind() == Kind::RigidMotion)
                .then(|| asymptotic_location(AsymptoticFamily::ScaledBallRigid, param).ok())
                .flatten();
        }
    };
    (functional.kind() == Kind::Rotation)
        .then(|| asymptotic_location(AsymptoticFamily::ScaledCubeRotation, zeta).ok())
        .flatten()
}

/// Exact sweep of a functional over a family.
///
/// Single-body functionals sweep `grid1` (family parameter) × `grid2` (values of `m`);
/// pair functionals sweep `grid1` × `grid2` as the two family parameters. Rows are returned in
/// ascending lexicographic order of the parameters; every row is checked against the theorem.
pub fn sweep(
    functional: Functional,
    family: Family,
    n: usize,
    grid1: &[f64],
    grid2: &[f64],
    alpha: f64,
) -> Result<Vec<SweepRow>> {
    let g1 = sorted(grid1);
    let g2 = sorted(grid2);
    if functional.is_pair() {
        let rows: Vec<Result<Vec<SweepRow>>> = g1
            .par_iter()
            .map(|&p1| {
                let dk = body_distribution(&family.body(n, p1), functional)?;
                g2.iter()
                    .map(|&p2| {
                        let dm = body_distribution(&family.body(n, p2), functional)?;
                        let r = classify_distributions(functional, &[dk.clone(), dm], alpha, None)?;
                        let pt = &r.points[0];
                        Ok(SweepRow {
                            functional,
                            n,
                            param1: p1,
                            param2: Some(p2),
                            m: None,
                            value: pt.value,
                            classification: pt.classification,
                        })
                    })
                    .collect()
            })
            .collect();
        rows.into_iter()
            .collect::<Result<Vec<_>>>()
            .map(|v| v.concat())
    } else {
        let ms = g2
            .iter()
            .map(|&x| {
                if x < 0.0 || x.fract() != 0.0 || x > n as f64 {
                    domain(format!("m grid value {x} is not an integer in [0, {n}]"))
                } else {
                    Ok(x as usize)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let rows: Vec<Result<Vec<SweepRow>>> = g1
            .par_iter()
            .map(|&p1| {
                let d = body_distribution(&family.body(n, p1), functional)?;
                let r = classify_distributions(functional, &[d], alpha, Some(&ms))?;
                Ok(r.points
                    .iter()
                    .zip(&ms)
                    .map(|(pt, &m)| SweepRow {
                        functional,
                        n,
                        param1: p1,
                        param2: None,
                        m: Some(m),
                        value: pt.value,
                        classification: pt.classification,
                    })
                    .collect())
            })
            .collect();
        rows.into_iter()
            .collect::<Result<Vec<_>>>()
            .map(|v| v.concat())
    }
}

/// Normalized central volumes along `grid1` (× `grid2` for pairs) with their asymptotic limits.
pub fn overlay(
    functional: Functional,
    family: Family,
    n: usize,
    grid1: &[f64],
    grid2: &[f64],
) -> Result<Vec<OverlayRow>> {
    let nf = n as f64;
    let norm = |p: f64| -> Result<f64> {
        Ok(body_distribution(&family.body(n, p), functional)?.mean() / nf)
    };
    let g1 = sorted(grid1);
    if functional.is_pair() {
        let g2 = sorted(grid2);
        let mut out = Vec::with_capacity(g1.len() * g2.len());
        for &p1 in &g1 {
            for &p2 in &g2 {
                let asym = asymptotic_for(functional, family, n, p1)
                    .zip(asymptotic_for(functional, family, n, p2))
                    .map(|(a, b)| a + b);
                out.push(OverlayRow {
                    param1: p1,
                    param2: Some(p2),
                    normalized_location: norm(p1)? + norm(p2)?,
                    asymptotic_location: asym,
                });
            }
        }
        Ok(out)
    } else {
        g1.iter()
            .map(|&p1| {
                Ok(OverlayRow {
                    param1: p1,
                    param2: None,
                    normalized_location: norm(p1)?,
                    asymptotic_location: asymptotic_for(functional, family, n, p1),
                })
            })
            .collect()
    }
}
