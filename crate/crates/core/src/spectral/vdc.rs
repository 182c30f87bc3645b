use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::par::{compensated_sum, map_range, Execution};

/// A vector in a finite-dimensional complex inner-product space.
pub trait HilbertVector: Sync + Send {
    fn zero_like(&self) -> Self
    where
        Self: Sized;
    /// `self += a·x`.
    fn axpy(&mut self, a: f64, x: &Self);
    /// `⟨self, other⟩`, linear in the first slot.
    fn inner(&self, other: &Self) -> Complex64;
    fn norm_sq(&self) -> f64 {
        self.inner(self).re
    }
}

impl HilbertVector for Vec<f64> {
    fn zero_like(&self) -> Self {
        vec![0.0; self.len()]
    }

    fn axpy(&mut self, a: f64, x: &Self) {
        self.iter_mut().zip(x).for_each(|(s, v)| *s += a * v);
    }

    fn inner(&self, other: &Self) -> Complex64 {
        Complex64::new(compensated_sum(self.iter().zip(other).map(|(a, b)| a * b)), 0.0)
    }
}

impl HilbertVector for Vec<Complex64> {
    fn zero_like(&self) -> Self {
        vec![Complex64::new(0.0, 0.0); self.len()]
    }

    fn axpy(&mut self, a: f64, x: &Self) {
        self.iter_mut().zip(x).for_each(|(s, v)| *s += v * a);
    }

    fn inner(&self, other: &Self) -> Complex64 {
        let terms: Vec<Complex64> = self.iter().zip(other).map(|(a, b)| a * b.conj()).collect();
        Complex64::new(compensated_sum(terms.iter().map(|c| c.re)), compensated_sum(terms.iter().map(|c| c.im)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VdcReport {
    pub h: usize,
    pub window: usize,
    /// `max_M ‖(1/W) Σ_{n∈[M,M+W)} x_n‖²`.
    pub lhs: f64,
    /// `(1/H) Σ_{h=1}^{H} max_M (1/W) Σ_{n∈[M,M+W)} Re⟨x_{n+h}, x_n⟩`.
    pub rhs: f64,
    /// `B²·(1/H + H/W)` with `B = max ‖x_n‖`.
    pub slack: f64,
    /// Full-range averages of `Re⟨x_{n+h}, x_n⟩` for `h = 1..=H`.
    pub per_h: Vec<f64>,
    pub holds: bool,
    pub holds_strictly: bool,
}

/// Finite van der Corput comparison on windows of length `W = (|xs| − H)/2`.
pub fn vdc_surrogate<V: HilbertVector>(xs: &[V], h: usize) -> Result<VdcReport> {
    vdc_surrogate_with(Execution::default_for_build(), xs, h)
}

pub fn vdc_surrogate_with<V: HilbertVector>(exec: Execution, xs: &[V], h: usize) -> Result<VdcReport> {
    let len = xs.len();
    if h == 0 || len < 4 * h {
        return Err(Error::InvalidArgument(format!(
            "sequence too short: need at least 4H = {} vectors, got {len}",
            4 * h.max(1)
        )));
    }
    let w = (len - h) / 2;
    let last_start = len - h - w;
    let wf = w as f64;

    let mut sum = xs[0].zero_like();
    for x in &xs[..w] {
        sum.axpy(1.0, x);
    }
    let mut lhs = sum.norm_sq() / (wf * wf);
    for m in 1..=last_start {
        sum.axpy(-1.0, &xs[m - 1]);
        sum.axpy(1.0, &xs[m + w - 1]);
        lhs = lhs.max(sum.norm_sq() / (wf * wf));
    }

    let per_shift = map_range(exec, 1..h as i64 + 1, |s| {
        let s = s as usize;
        let corr: Vec<f64> = (0..len - s).map(|n| xs[n + s].inner(&xs[n]).re).collect();
        let mut prefix = vec![0.0f64; corr.len() + 1];
        let mut comp = 0.0;
        for (i, c) in corr.iter().enumerate() {
            let y = c - comp;
            let t = prefix[i] + y;
            comp = (t - prefix[i]) - y;
            prefix[i + 1] = t;
        }
        let best = (0..=last_start).map(|m| (prefix[m + w] - prefix[m]) / wf).fold(f64::NEG_INFINITY, f64::max);
        let full = compensated_sum(corr[..len - h].iter().copied()) / (len - h) as f64;
        (best, full)
    });
    let rhs = compensated_sum(per_shift.iter().map(|p| p.0)) / h as f64;
    let bound = xs.iter().map(HilbertVector::norm_sq).fold(0.0, f64::max);
    let slack = bound * (1.0 / h as f64 + h as f64 / wf);
    Ok(VdcReport {
        h,
        window: w,
        lhs,
        rhs,
        slack,
        per_h: per_shift.iter().map(|p| p.1).collect(),
        holds: lhs <= rhs + slack,
        holds_strictly: lhs <= rhs,
    })
}
