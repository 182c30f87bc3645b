use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::CorrelationSeries;
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::rational::{self, int, Rational};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowAverage {
    #[serde(rename = "M")]
    pub m: i64,
    #[serde(rename = "N")]
    pub n: i64,
    #[serde(with = "rational::serde_str")]
    pub value: Rational,
    /// Combined confidence half-width for Monte Carlo series.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
}

/// Exact prefix sums `S(n) = Σ_{j<n} value(j)` over a series.
#[derive(Debug, Clone)]
pub struct PrefixSums {
    start: i64,
    sums: Vec<Rational>,
    unavailable: Vec<usize>,
    variance: Vec<f64>,
    has_interval: bool,
}

impl PrefixSums {
    pub fn new(series: &CorrelationSeries) -> Self {
        let len = series.entries().len();
        let mut sums = Vec::with_capacity(len + 1);
        let mut unavailable = Vec::with_capacity(len + 1);
        let mut variance = Vec::with_capacity(len + 1);
        let (mut s, mut u, mut v) = (Rational::zero(), 0usize, 0.0f64);
        let mut has_interval = false;
        sums.push(s.clone());
        unavailable.push(u);
        variance.push(v);
        for e in series.entries() {
            match &e.value {
                super::EntryValue::Exact(x) => s += x,
                super::EntryValue::Interval { estimate, half_width } => {
                    has_interval = true;
                    s += Rational::from_float(*estimate).unwrap_or_else(Rational::zero);
                    v += half_width * half_width;
                }
                super::EntryValue::Unavailable(_) => u += 1,
            }
            sums.push(s.clone());
            unavailable.push(u);
            variance.push(v);
        }
        Self { start: series.start(), sums, unavailable, variance, has_interval }
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    /// Last `n` covered.
    pub fn end(&self) -> i64 {
        self.start + self.sums.len() as i64 - 2
    }

    fn index(&self, m: i64, n: i64) -> Result<(usize, usize)> {
        if m >= n || m < self.start || n - 1 > self.end() {
            return Err(Error::Window { m, n, lo: self.start, hi: self.end() });
        }
        Ok(((m - self.start) as usize, (n - self.start) as usize))
    }

    /// `S(n) − S(m)` over `[m, n)`.
    pub fn window_sum(&self, m: i64, n: i64) -> Result<Rational> {
        let (a, b) = self.index(m, n)?;
        if self.unavailable[b] != self.unavailable[a] {
            let first = (a..b).find(|&i| self.unavailable[i + 1] > self.unavailable[i]).unwrap_or(a);
            return Err(Error::Unavailable(self.start + first as i64));
        }
        Ok(&self.sums[b] - &self.sums[a])
    }

    pub fn average(&self, m: i64, n: i64) -> Result<WindowAverage> {
        let sum = self.window_sum(m, n)?;
        let len = n - m;
        let half_width = self.has_interval.then(|| {
            let (a, b) = self.index(m, n).expect("checked in window_sum");
            (self.variance[b] - self.variance[a]).max(0.0).sqrt() / len as f64
        });
        Ok(WindowAverage { m, n, value: sum / int(len), half_width })
    }
}

/// Arithmetic mean of the series over `[m, n)`.
pub fn window_average(series: &CorrelationSeries, m: i64, n: i64) -> Result<WindowAverage> {
    PrefixSums::new(series).average(m, n)
}

/// Largest `|avg[M, M+len) − target|` over all windows of exactly `len`
/// inside `[lo, series end]`, with the maximising window.
pub fn window_deviation_sup(
    series: &CorrelationSeries,
    target: &Rational,
    len: i64,
    lo: i64,
) -> Result<(Rational, WindowAverage)> {
    let prefix = PrefixSums::new(series);
    let lo = lo.max(prefix.start());
    let last = prefix.end() - len + 1;
    if len < 1 || last < lo {
        return Err(Error::Window { m: lo, n: lo + len, lo: prefix.start(), hi: prefix.end() });
    }
    let mut best: Option<(Rational, WindowAverage)> = None;
    for m in lo..=last {
        let avg = prefix.average(m, m + len)?;
        let dev = (&avg.value - target).abs();
        if best.as_ref().is_none_or(|(d, _)| dev > *d) {
            best = Some((dev, avg));
        }
    }
    Ok(best.expect("at least one window"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceProbe {
    /// Minimum window length.
    pub min_len: i64,
    #[serde(with = "rational::serde_str")]
    pub max_deviation: Rational,
    pub window: (i64, i64),
}

/// Maximum deviation of window averages from `target` over every window of
/// length at least `min_len` inside the series.
///
/// A window of length `≥ 2L` splits into consecutive windows with lengths in
/// `[L, 2L)`, and its average is a convex combination of theirs, so only
/// those lengths are scanned. A floating-point pass locates the maximiser;
/// the reported deviation is recomputed exactly for the leading candidates.
pub fn convergence_probe(series: &CorrelationSeries, target: &Rational, min_len: i64) -> Result<ConvergenceProbe> {
    convergence_probe_with(Execution::default_for_build(), series, target, min_len)
}

pub fn convergence_probe_with(
    exec: Execution,
    series: &CorrelationSeries,
    target: &Rational,
    min_len: i64,
) -> Result<ConvergenceProbe> {
    let prefix = PrefixSums::new(series);
    let (start, end) = (prefix.start(), prefix.end());
    let span = end - start + 1;
    if min_len < 1 || min_len > span {
        return Err(Error::InvalidArgument(format!("window length {min_len} exceeds series span {span}")));
    }
    prefix.window_sum(start, end + 1)?;
    let t = target.to_f64().unwrap_or(f64::NAN);
    let dev_f: Vec<f64> =
        prefix.sums.iter().enumerate().map(|(i, s)| s.to_f64().unwrap_or(f64::NAN) - t * i as f64).collect();
    let max_len = (2 * min_len - 1).min(span);
    let per_start = par::map_range(exec, 0..span, |a| {
        let mut best = (f64::NEG_INFINITY, 0i64);
        for len in min_len..=max_len {
            let b = a + len;
            if b > span {
                break;
            }
            let d = (dev_f[b as usize] - dev_f[a as usize]).abs() / len as f64;
            if d > best.0 {
                best = (d, len);
            }
        }
        (best.0, a, best.1)
    });
    let top = per_start.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max);
    let mut candidates: Vec<_> =
        per_start.into_iter().filter(|(d, _, _)| *d >= top - 1e-9 * (1.0 + top.abs())).collect();
    candidates.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    candidates.truncate(64);
    let mut best: Option<ConvergenceProbe> = None;
    for (_, a, len) in candidates {
        let m = start + a;
        let avg = prefix.average(m, m + len)?;
        let dev = (&avg.value - target).abs();
        if best.as_ref().is_none_or(|b| dev > b.max_deviation) {
            best = Some(ConvergenceProbe { min_len, max_deviation: dev, window: (m, m + len) });
        }
    }
    Ok(best.expect("at least one window"))
}

/// Convergence probes over the dyadic schedule `L = 2^5, …, 2^13` (lengths
/// above half the span are skipped).
pub fn probe_schedule(series: &CorrelationSeries, target: &Rational) -> Result<Vec<ConvergenceProbe>> {
    let span = series.end() - series.start() + 1;
    (5..=13).map(|p| 1i64 << p).filter(|&l| 2 * l <= span).map(|l| convergence_probe(series, target, l)).collect()
}
