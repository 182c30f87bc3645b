use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::{frac, int, to_f64, Rational};
use crate::torus::{Angle, ArcSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseSpace {
    Circle,
    /// Circle × circle; frequencies are `(m, l)` for `e(m·x + l·y)`.
    Torus2,
}

/// Truncated Fourier series. On the circle only `(m, 0)` keys occur.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierObservable {
    pub coeffs: BTreeMap<(i64, i64), Complex64>,
    pub cutoff: i64,
    pub base: BaseSpace,
}

/// `e(t) = exp(2πi t)` with `t` reduced exactly mod 1 first.
pub fn unit_phase(t: &Rational) -> Complex64 {
    let r = to_f64(&frac(t));
    Complex64::from_polar(1.0, 2.0 * PI * r)
}

impl FourierObservable {
    pub fn new(base: BaseSpace, cutoff: i64, coeffs: BTreeMap<(i64, i64), Complex64>) -> Result<Self> {
        for &(m, l) in coeffs.keys() {
            if m.abs() > cutoff || l.abs() > cutoff || (base == BaseSpace::Circle && l != 0) {
                return Err(Error::InvalidArgument(format!("frequency ({m}, {l}) outside cutoff {cutoff}")));
            }
        }
        Ok(Self { coeffs, cutoff, base })
    }

    pub fn coefficient(&self, m: i64, l: i64) -> Complex64 {
        self.coeffs.get(&(m, l)).copied().unwrap_or_else(Complex64::zero)
    }

    /// `‖·‖₂` via Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Checks `c(−m) = conj(c(m))` within `tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|(&(m, l), c)| (self.coefficient(-m, -l) - c.conj()).norm() <= tol)
    }

    pub fn evaluate(&self, x: f64, y: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(&(m, l), c)| c * Complex64::from_polar(1.0, 2.0 * PI * (m as f64 * x + l as f64 * y)))
            .sum()
    }

    /// Real trigonometric polynomial `Σ a cos(2π(m x + l y))`.
    pub fn cosines(base: BaseSpace, terms: &[((i64, i64), f64)]) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        let mut cutoff = 0;
        for &((m, l), a) in terms {
            cutoff = cutoff.max(m.abs()).max(l.abs());
            if (m, l) == (0, 0) {
                *coeffs.entry((0, 0)).or_insert_with(Complex64::zero) += a;
            } else {
                *coeffs.entry((m, l)).or_insert_with(Complex64::zero) += a / 2.0;
                *coeffs.entry((-m, -l)).or_insert_with(Complex64::zero) += a / 2.0;
            }
        }
        Self::new(base, cutoff.max(1), coeffs)
    }
}

/// `∫_A e(−m x) dx` for every `|m| ≤ cutoff`, in closed form.
fn arc_coefficients(s: &ArcSet, cutoff: i64) -> BTreeMap<i64, Complex64> {
    let mut out = BTreeMap::new();
    out.insert(0, Complex64::new(to_f64(&s.measure()), 0.0));
    for m in (-cutoff..=cutoff).filter(|&m| m != 0) {
        let mm = int(m);
        let mut c = Complex64::zero();
        for (a, b) in s.arcs() {
            c += unit_phase(&-(&mm * b)) - unit_phase(&-(&mm * a));
        }
        out.insert(m, c / Complex64::new(0.0, -2.0 * PI * m as f64));
    }
    out
}

/// Fourier coefficients of the indicator of an arc set, up to `cutoff`.
pub fn fourier_indicator(s: &ArcSet, cutoff: i64) -> Result<FourierObservable> {
    if cutoff < 1 {
        return Err(Error::InvalidArgument("cutoff must be at least 1".into()));
    }
    let coeffs = arc_coefficients(s, cutoff)
        .into_iter()
        .filter(|(_, c)| *c != Complex64::zero())
        .map(|(m, c)| ((m, 0), c))
        .collect();
    FourierObservable::new(BaseSpace::Circle, cutoff, coeffs)
}

/// Fourier coefficients of `1_{sx × sy}` on the two-torus.
pub fn fourier_indicator_box(sx: &ArcSet, sy: &ArcSet, cutoff: i64) -> Result<FourierObservable> {
    if cutoff < 1 {
        return Err(Error::InvalidArgument("cutoff must be at least 1".into()));
    }
    let cx = arc_coefficients(sx, cutoff);
    let cy = arc_coefficients(sy, cutoff);
    let mut coeffs = BTreeMap::new();
    for (&m, a) in &cx {
        for (&l, b) in &cy {
            let c = a * b;
            if c != Complex64::zero() {
                coeffs.insert((m, l), c);
            }
        }
    }
    FourierObservable::new(BaseSpace::Torus2, cutoff, coeffs)
}

/// `U^n f = f(· + nω)`: the character `e(m x)` picks up `e(m n ω)`.
pub fn koopman_rotation(angle: &Angle, n: i64, obs: &FourierObservable) -> FourierObservable {
    let step = &angle.surrogate * int(n);
    let coeffs = obs.coeffs.iter().map(|(&(m, l), c)| ((m, l), c * unit_phase(&(&step * int(m))))).collect();
    FourierObservable { coeffs, cutoff: obs.cutoff, base: obs.base }
}

/// Bound on the phase error of [`koopman_rotation`] caused by the surrogate:
/// `|e(mnω) − e(mnω̃)| ≤ 2π·K·|n|·δ`.
pub fn koopman_phase_drift(angle: &Angle, n: i64, cutoff: i64) -> f64 {
    2.0 * PI * cutoff as f64 * n.unsigned_abs() as f64 * to_f64(&angle.drift)
}
