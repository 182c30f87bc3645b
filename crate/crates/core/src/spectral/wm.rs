//! Windowed averages of products `∏ T_iⁿ u_i` on `(x, y) ↦ (x + ω, 2y)`.
//!
//! Observables are trigonometric polynomials. Each iterate is evolved
//! exactly in frequency space and then projected onto cell-constant
//! functions of a dyadic grid; the projection multiplies frequency `f` by
//! `e(f/2R)·sinc(f/R)` and folds it onto `f mod R`. Grid norms are then
//! plain `ℓ²` norms of the folded spectrum.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::fourier::{unit_phase, BaseSpace, FourierObservable};
use super::grid::check_resolution;
use super::vdc::HilbertVector;
use crate::error::{Error, Result};
use crate::par::{compensated_sum, map_range, Execution};
use crate::rational::{int, to_f64};
use crate::torus::Angle;

#[derive(Debug, Clone, PartialEq)]
pub enum ProductMap {
    /// `(x, y) ↦ (x + ω, y)`.
    Rotation(Angle),
    /// `(x, y) ↦ (x, 2y)`.
    Doubling,
    /// `(x, y) ↦ (x + ω, 2y)`.
    RotationDoubling(Angle),
}

impl ProductMap {
    fn angle(&self) -> Option<&Angle> {
        match self {
            ProductMap::Rotation(a) | ProductMap::RotationDoubling(a) => Some(a),
            ProductMap::Doubling => None,
        }
    }

    fn doubles(&self) -> bool {
        !matches!(self, ProductMap::Rotation(_))
    }
}

/// Cell-averaged spectrum on an `R × R` grid, keyed by `(m mod R, l mod R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpectrum {
    res: u64,
    coeffs: BTreeMap<(u64, u64), Complex64>,
}

impl GridSpectrum {
    pub fn zero(res: u64) -> Self {
        Self { res, coeffs: BTreeMap::new() }
    }

    pub fn resolution(&self) -> u64 {
        self.res
    }

    pub fn coeffs(&self) -> &BTreeMap<(u64, u64), Complex64> {
        &self.coeffs
    }

    /// Mean square over grid cells.
    pub fn grid_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Cell values `v[i·R + j]` by direct summation; intended for small grids.
    pub fn cell_values(&self) -> Vec<Complex64> {
        let r = self.res;
        let mut out = vec![Complex64::zero(); (r * r) as usize];
        for (&(k, kp), c) in &self.coeffs {
            for i in 0..r {
                for j in 0..r {
                    let t = ((k * i + kp * j) % r) as f64 / r as f64;
                    out[(i * r + j) as usize] += c * Complex64::from_polar(1.0, 2.0 * PI * t);
                }
            }
        }
        out
    }
}

impl HilbertVector for GridSpectrum {
    fn zero_like(&self) -> Self {
        Self::zero(self.res)
    }

    fn axpy(&mut self, a: f64, x: &Self) {
        for (k, c) in &x.coeffs {
            *self.coeffs.entry(*k).or_insert_with(Complex64::zero) += c * a;
        }
    }

    fn inner(&self, other: &Self) -> Complex64 {
        let terms: Vec<Complex64> =
            self.coeffs.iter().filter_map(|(k, c)| other.coeffs.get(k).map(|d| c * d.conj())).collect();
        Complex64::new(compensated_sum(terms.iter().map(|c| c.re)), compensated_sum(terms.iter().map(|c| c.im)))
    }
}

/// `(f mod R, e(f/2R)·sinc(f/R))` for a cell-averaged character.
fn cell_factor(f: &BigInt, res: u64) -> (u64, Complex64) {
    let r = BigInt::from(res);
    let folded = f.mod_floor(&r).to_u64().unwrap_or(0);
    if f.is_zero() {
        return (0, Complex64::new(1.0, 0.0));
    }
    if folded == 0 {
        return (0, Complex64::zero());
    }
    let s = f.mod_floor(&(BigInt::from(2u8) * &r)).to_f64().unwrap_or(0.0);
    let arg = PI * s / res as f64;
    let scale = PI * f.to_f64().unwrap_or(f64::INFINITY) / res as f64;
    let sinc = if scale.is_finite() { arg.sin() / scale } else { 0.0 };
    (folded, Complex64::from_polar(1.0, arg) * sinc)
}

struct Term {
    m: i64,
    l: BigInt,
    c: Complex64,
}

fn evolve(map: &ProductMap, u: &FourierObservable, n: i64) -> Vec<Term> {
    let step = map.angle().map(|a| &a.surrogate * int(n));
    u.coeffs
        .iter()
        .map(|(&(m, l), c)| {
            let phase = step.as_ref().map_or(Complex64::new(1.0, 0.0), |s| unit_phase(&(s * int(m))));
            let l = if map.doubles() { BigInt::from(l) << n as usize } else { BigInt::from(l) };
            Term { m, l, c: c * phase }
        })
        .collect()
}

fn validate(terms: &[(ProductMap, FourierObservable)], res: usize) -> Result<()> {
    check_resolution(res, 2)?;
    for (map, u) in terms {
        if u.base == BaseSpace::Circle && map.doubles() {
            return Err(Error::InvalidArgument(
                "grid/observable mismatch: doubling acts on y but the observable lives on the circle".into(),
            ));
        }
        if 2 * u.cutoff as u64 >= res as u64 {
            return Err(Error::InvalidArgument(format!(
                "grid/observable mismatch: cutoff {} not resolved by grid {res}",
                u.cutoff
            )));
        }
    }
    Ok(())
}

/// Projection of `∏ T_iⁿ u_i` onto the grid.
pub fn grid_spectrum(terms: &[(ProductMap, FourierObservable)], n: i64, res: usize) -> Result<GridSpectrum> {
    validate(terms, res)?;
    if n < 0 {
        return Err(Error::InvalidArgument("iterates must be non-negative".into()));
    }
    Ok(project(terms, n, res as u64))
}

fn project(terms: &[(ProductMap, FourierObservable)], n: i64, res: u64) -> GridSpectrum {
    let mut product = vec![Term { m: 0, l: BigInt::zero(), c: Complex64::new(1.0, 0.0) }];
    for (map, u) in terms {
        let evolved = evolve(map, u, n);
        let mut next = Vec::with_capacity(product.len() * evolved.len());
        for a in &product {
            for b in &evolved {
                next.push(Term { m: a.m + b.m, l: &a.l + &b.l, c: a.c * b.c });
            }
        }
        product = next;
    }
    let mut out = GridSpectrum::zero(res);
    for t in product {
        let (kx, fx) = cell_factor(&BigInt::from(t.m), res);
        let (ky, fy) = cell_factor(&t.l, res);
        let c = t.c * fx * fy;
        if c != Complex64::zero() {
            *out.coeffs.entry((kx, ky)).or_insert_with(Complex64::zero) += c;
        }
    }
    out
}

/// Projected iterates for `n ∈ [start, end)`.
pub fn grid_spectra(
    exec: Execution,
    terms: &[(ProductMap, FourierObservable)],
    start: i64,
    end: i64,
    res: usize,
) -> Result<Vec<GridSpectrum>> {
    validate(terms, res)?;
    if start < 0 || end < start {
        return Err(Error::InvalidArgument(format!("bad iterate range {start}..{end}")));
    }
    Ok(map_range(exec, start..end, |n| project(terms, n, res as u64)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowNorm {
    pub m: i64,
    pub n: i64,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WmReport {
    pub resolution: usize,
    /// Some `u_i` has zero `y`-mean on every column.
    pub has_wm_factor: bool,
    pub windows: Vec<WindowNorm>,
    pub max_norm: f64,
    /// `2π·K·n·δ` summed over rotation factors at the largest `n` used.
    pub phase_drift: f64,
}

/// Grid `L²` norms of `(1/(N−M)) Σ_{n∈[M,N)} ∏ T_iⁿ u_i`.
pub fn wm_average_vanishing(
    terms: &[(ProductMap, FourierObservable)],
    res: usize,
    windows: &[(i64, i64)],
) -> Result<WmReport> {
    wm_average_vanishing_with(Execution::default_for_build(), terms, res, windows)
}

pub fn wm_average_vanishing_with(
    exec: Execution,
    terms: &[(ProductMap, FourierObservable)],
    res: usize,
    windows: &[(i64, i64)],
) -> Result<WmReport> {
    validate(terms, res)?;
    let mut out = Vec::with_capacity(windows.len());
    for &(m, n) in windows {
        if m < 0 || n <= m {
            return Err(Error::Window { m, n, lo: 0, hi: i64::MAX });
        }
        let spectra = grid_spectra(exec, terms, m, n, res)?;
        let mut sum = GridSpectrum::zero(res as u64);
        for s in &spectra {
            sum.axpy(1.0, s);
        }
        out.push(WindowNorm { m, n, norm: sum.grid_norm() / (n - m) as f64 });
    }
    let has_wm_factor = terms.iter().any(|(_, u)| u.coeffs.iter().all(|(&(_, l), c)| l != 0 || c.norm() <= 1e-15));
    let last = windows.iter().map(|w| w.1).max().unwrap_or(0);
    let phase_drift = terms
        .iter()
        .filter_map(|(map, u)| map.angle().map(|a| 2.0 * PI * u.cutoff as f64 * last as f64 * to_f64(&a.drift.abs())))
        .sum();
    Ok(WmReport {
        resolution: res,
        has_wm_factor,
        max_norm: out.iter().map(|w| w.norm).fold(0.0, f64::max),
        windows: out,
        phase_drift,
    })
}
