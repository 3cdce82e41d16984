//! Sequence schemes `(θ_m, η_m)` and limit estimation along them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::value::Value;
use super::NumericError;

/// Number of trailing estimates that must agree within a scheme.
pub const STABILITY_WINDOW: usize = 3;

/// Real sequence `θ_m → 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThetaSequence {
    /// `θ_0 2^{-m}`
    Geometric { theta0: f64 },
    /// `(-1)^m θ_0 2^{-m}`
    Alternating { theta0: f64 },
    /// `(-1)^m θ_0 / (m + 1)`
    Harmonic { theta0: f64 },
}

impl ThetaSequence {
    pub fn at(&self, m: usize) -> f64 {
        let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
        match *self {
            ThetaSequence::Geometric { theta0 } => theta0 * 0.5f64.powi(m as i32),
            ThetaSequence::Alternating { theta0 } => sign * theta0 * 0.5f64.powi(m as i32),
            ThetaSequence::Harmonic { theta0 } => sign * theta0 / (m as f64 + 1.0),
        }
    }

    pub fn alternates(&self) -> bool {
        !matches!(self, ThetaSequence::Geometric { .. })
    }
}

/// Perturbation of the direction, `η_m = η + perturbation(m)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EtaPerturbation {
    None,
    /// `η_m = η + scale · 2^{-m} · u` for a fixed random `u` drawn from `seed`.
    Geometric { scale: f64, seed: u64 },
}

impl EtaPerturbation {
    pub fn is_active(&self) -> bool {
        matches!(self, EtaPerturbation::Geometric { scale, .. } if *scale != 0.0)
    }

    /// The fixed offset direction `u` for each component of the direction tuple.
    fn offsets(&self, directions: &[Value]) -> Vec<Value> {
        match *self {
            EtaPerturbation::None => directions.iter().map(Value::zeros_like).collect(),
            EtaPerturbation::Geometric { scale, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                directions
                    .iter()
                    .map(|d| match d {
                        Value::Scalar(_) => Value::Scalar(scale * rng.gen_range(-1.0..=1.0)),
                        Value::Vector(xs) => Value::Vector(
                            xs.iter().map(|_| scale * rng.gen_range(-1.0..=1.0)).collect(),
                        ),
                    })
                    .collect()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Extrapolation {
    None,
    /// Eliminates the term linear in `θ` using consecutive pairs `(θ_{m-1}, θ_m)`.
    Richardson,
}

/// A pair of sequences `(θ_m, η_m)` plus extrapolation settings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequenceScheme {
    pub name: String,
    pub theta: ThetaSequence,
    pub eta_perturbation: EtaPerturbation,
    pub max_m: usize,
    pub extrapolation: Extrapolation,
}

pub const DEFAULT_THETA0: f64 = 1e-1;
pub const DEFAULT_MAX_M: usize = 20;

impl SequenceScheme {
    pub fn geometric() -> Self {
        SequenceScheme {
            name: "geometric".into(),
            theta: ThetaSequence::Geometric {
                theta0: DEFAULT_THETA0,
            },
            eta_perturbation: EtaPerturbation::None,
            max_m: DEFAULT_MAX_M,
            extrapolation: Extrapolation::Richardson,
        }
    }

    pub fn alternating() -> Self {
        SequenceScheme {
            name: "alternating".into(),
            theta: ThetaSequence::Alternating {
                theta0: DEFAULT_THETA0,
            },
            ..Self::geometric()
        }
    }

    pub fn perturbed(seed: u64) -> Self {
        SequenceScheme {
            name: "perturbed".into(),
            eta_perturbation: EtaPerturbation::Geometric { scale: 1.0, seed },
            ..Self::geometric()
        }
    }

    pub fn harmonic() -> Self {
        SequenceScheme {
            name: "harmonic".into(),
            theta: ThetaSequence::Harmonic {
                theta0: DEFAULT_THETA0,
            },
            ..Self::geometric()
        }
    }

    /// Geometric, alternating-sign, and perturbed-direction schemes.
    pub fn defaults() -> Vec<SequenceScheme> {
        vec![Self::geometric(), Self::alternating(), Self::perturbed(0x5eed)]
    }

    pub fn without_perturbation(&self) -> Self {
        SequenceScheme {
            eta_perturbation: EtaPerturbation::None,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), NumericError> {
        if self.max_m < STABILITY_WINDOW {
            return Err(NumericError::InvalidScheme(format!(
                "scheme `{}` needs max_m >= {STABILITY_WINDOW}",
                self.name
            )));
        }
        if let Some(m) = (0..=self.max_m).find(|&m| {
            let t = self.theta.at(m);
            t == 0.0 || !t.is_finite()
        }) {
            return Err(NumericError::InvalidScheme(format!(
                "scheme `{}` has θ_{m} = 0",
                self.name
            )));
        }
        Ok(())
    }
}

/// Per-scheme outcome.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchemeEstimate {
    pub name: String,
    pub estimate: Value,
    /// Last estimates of the (extrapolated) sequence, oldest first.
    pub tail: Vec<Value>,
    /// Largest distance between any two entries of `tail`.
    pub spread: f64,
}

/// Result of estimating a limit along several sequence schemes.
///
/// `converged` only means no scheme falsified the limit; it is not a proof
/// that the limit exists along every sequence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub estimate: Value,
    pub per_scheme_estimates: Vec<SchemeEstimate>,
    pub max_scheme_disagreement: f64,
    pub converged: bool,
    pub tolerance_used: f64,
}

impl ConvergenceReport {
    /// Re-judges convergence with relative tolerance `rel_tol`.
    pub fn with_tolerance(mut self, rel_tol: f64) -> Self {
        self.tolerance_used = rel_tol * self.estimate.norm().max(1.0);
        self.converged = self.max_scheme_disagreement <= self.tolerance_used;
        self
    }
}

fn max_pairwise(values: &[Value]) -> Result<f64, NumericError> {
    let mut worst: f64 = 0.0;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            let d = a.distance(b)?;
            // NaN must count as disagreement
            worst = if d.is_nan() { f64::INFINITY } else { worst.max(d) };
        }
    }
    Ok(worst)
}

/// Runs every scheme on the difference quotient `quotient(θ_m, η_m)`.
///
/// `directions` is the direction tuple (one component per perturbed slot);
/// each scheme perturbs every component.
pub fn estimate_limit(
    schemes: &[SequenceScheme],
    directions: &[Value],
    rel_tol: f64,
    quotient: impl Fn(f64, &[Value]) -> Result<Value, NumericError>,
) -> Result<ConvergenceReport, NumericError> {
    if schemes.is_empty() {
        return Err(NumericError::InsufficientSchemes("no schemes given".into()));
    }
    let mut per_scheme = Vec::with_capacity(schemes.len());
    for scheme in schemes {
        scheme.validate()?;
        let offsets = scheme.eta_perturbation.offsets(directions);
        let mut thetas = Vec::with_capacity(scheme.max_m + 1);
        let mut raw = Vec::with_capacity(scheme.max_m + 1);
        for m in 0..=scheme.max_m {
            let theta = scheme.theta.at(m);
            let shrink = 0.5f64.powi(m as i32);
            let eta_m = directions
                .iter()
                .zip(&offsets)
                .map(|(d, u)| d.axpy(shrink, u))
                .collect::<Result<Vec<_>, _>>()?;
            raw.push(quotient(theta, &eta_m)?);
            thetas.push(theta);
        }
        let sequence = match scheme.extrapolation {
            Extrapolation::None => raw,
            Extrapolation::Richardson => (1..raw.len())
                .map(|m| {
                    let (t0, t1) = (thetas[m - 1], thetas[m]);
                    raw[m]
                        .scale(t0)
                        .sub(&raw[m - 1].scale(t1))
                        .map(|v| v.scale(1.0 / (t0 - t1)))
                })
                .collect::<Result<Vec<_>, _>>()?,
        };
        let tail = sequence[sequence.len() - STABILITY_WINDOW..].to_vec();
        let spread = max_pairwise(&tail)?;
        per_scheme.push(SchemeEstimate {
            name: scheme.name.clone(),
            estimate: tail[STABILITY_WINDOW - 1].clone(),
            tail,
            spread,
        });
    }
    let finals: Vec<Value> = per_scheme.iter().map(|s| s.estimate.clone()).collect();
    let disagreement = per_scheme
        .iter()
        .map(|s| s.spread)
        .fold(max_pairwise(&finals)?, f64::max);
    let report = ConvergenceReport {
        estimate: finals[0].clone(),
        per_scheme_estimates: per_scheme,
        max_scheme_disagreement: disagreement,
        converged: false,
        tolerance_used: 0.0,
    };
    Ok(report.with_tolerance(rel_tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_sequences() {
        let alt = ThetaSequence::Alternating { theta0: 0.1 };
        assert_eq!(alt.at(0), 0.1);
        assert_eq!(alt.at(1), -0.05);
        let harm = ThetaSequence::Harmonic { theta0: 1.0 };
        assert_eq!(harm.at(3), -0.25);
        for s in SequenceScheme::defaults() {
            s.validate().unwrap();
        }
        let bad = SequenceScheme {
            theta: ThetaSequence::Geometric { theta0: 0.0 },
            ..SequenceScheme::geometric()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn richardson_removes_linear_error() {
        // q(θ) = 2 + 5θ has limit 2 exactly after one extrapolation step
        let report = estimate_limit(&SequenceScheme::defaults()[..2], &[Value::from(1.0)], 1e-12, |t, _| {
            Ok(Value::from(2.0 + 5.0 * t))
        })
        .unwrap();
        assert!(report.converged);
        assert!((report.estimate.scalar().unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn perturbation_shrinks_to_the_direction() {
        let scheme = SequenceScheme::perturbed(7);
        let report = estimate_limit(&[scheme], &[Value::from(vec![1.0, -1.0])], 1e-9, |_, eta| {
            Ok(eta[0].clone())
        })
        .unwrap();
        assert!(report.estimate.distance(&Value::from(vec![1.0, -1.0])).unwrap() < 1e-5);
    }

    #[test]
    fn report_invariant_holds() {
        let report = estimate_limit(&[SequenceScheme::alternating()], &[Value::from(1.0)], 1e-6, |t, _| {
            Ok(Value::from(t.signum()))
        })
        .unwrap();
        assert_eq!(report.converged, report.max_scheme_disagreement <= report.tolerance_used);
        assert!(!report.converged);
    }
}
