use std::f64::consts::PI;

use num_traits::FromPrimitive;
use serde::Serialize;

use crate::analysis::{report_from_hits, GapReport};
use crate::error::{Error, Result};
use crate::par::{map_range, Execution};
use crate::rational::{circle_norm, int, to_f64, Rational};
use crate::torus::Angle;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenReturnReport {
    /// Labels of the angles `θ` with `λ = e(θ)`.
    pub frequencies: Vec<String>,
    /// `(re, im)` of each eigenvalue.
    pub eigenvalues: Vec<(f64, f64)>,
    pub delta: f64,
    pub a: f64,
    /// `δ / (3a)`.
    pub tolerance: f64,
    /// `2π·N·max δ_θ`: bound on how far surrogate phases can move `|λⁿ − 1|`.
    pub phase_drift: f64,
    pub gaps: GapReport,
}

impl EigenReturnReport {
    pub fn hits(&self) -> &[i64] {
        &self.gaps.hits
    }

    pub fn max_gap(&self) -> u64 {
        self.gaps.max_gap
    }
}

/// `|e(nθ) − 1| = 2 sin(π‖nθ‖)` with `‖nθ‖` computed exactly.
pub fn return_distance(theta: &Rational, n: i64) -> f64 {
    2.0 * (PI * to_f64(&circle_norm(&(theta * int(n))))).sin()
}

/// `E = { n ∈ [1, N] : max_j |λ_jⁿ − 1| < δ/(3a) }` with gap statistics.
pub fn eigen_return_times(angles: &[Angle], a: f64, delta: f64, horizon: i64) -> Result<EigenReturnReport> {
    eigen_return_times_with(Execution::default_for_build(), angles, a, delta, horizon)
}

pub fn eigen_return_times_with(
    exec: Execution,
    angles: &[Angle],
    a: f64,
    delta: f64,
    horizon: i64,
) -> Result<EigenReturnReport> {
    if angles.is_empty() {
        return Err(Error::InvalidArgument("empty frequency list".into()));
    }
    if !(delta > 0.0) || !(a > 0.0) || horizon < 1 {
        return Err(Error::InvalidArgument(format!("need δ > 0, a > 0 and N ≥ 1 (got δ={delta}, a={a}, N={horizon})")));
    }
    let tolerance = delta / (3.0 * a);
    let flags = map_range(exec, 1..horizon + 1, |n| {
        let mut hit = true;
        let mut clean = true;
        for w in angles {
            let d = return_distance(&w.surrogate, n);
            hit &= d < tolerance;
            clean &= (d - tolerance).abs() > 2.0 * PI * n as f64 * to_f64(&w.drift);
        }
        (hit, clean)
    });
    let hits: Vec<i64> = flags.iter().enumerate().filter(|(_, &(hit, _))| hit).map(|(i, _)| i as i64 + 1).collect();
    let max_drift = angles.iter().map(|w| to_f64(&w.drift)).fold(0.0, f64::max);
    let threshold = Rational::from_f64(tolerance).unwrap_or_default();
    Ok(EigenReturnReport {
        frequencies: angles.iter().map(|w| w.label.clone()).collect(),
        eigenvalues: angles
            .iter()
            .map(|w| {
                let t = 2.0 * PI * w.to_f64();
                (t.cos(), t.sin())
            })
            .collect(),
        delta,
        a,
        tolerance,
        phase_drift: 2.0 * PI * horizon as f64 * max_drift,
        gaps: GapReport { drift_clean: flags.iter().all(|f| f.1), ..report_from_hits(threshold, hits, horizon) },
    })
}
