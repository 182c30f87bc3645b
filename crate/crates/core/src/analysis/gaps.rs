use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{CorrelationSeries, PrefixSums};
use crate::error::{Error, Result};
use crate::rational::{self, int, Rational};

/// Finite-horizon syndeticity verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Every window of this length inside `[1, N_max]` contains a hit.
    WitnessedSyndetic(u64),
    Empty,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::WitnessedSyndetic(k) => write!(f, "WITNESSED-SYNDETIC({k})"),
            Verdict::Empty => f.write_str("EMPTY"),
            Verdict::Inconclusive => f.write_str("INCONCLUSIVE"),
        }
    }
}

impl std::str::FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "EMPTY" => Ok(Verdict::Empty),
            "INCONCLUSIVE" => Ok(Verdict::Inconclusive),
            _ => s
                .strip_prefix("WITNESSED-SYNDETIC(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|k| k.parse().ok())
                .map(Verdict::WitnessedSyndetic)
                .ok_or_else(|| Error::Parse(format!("unknown verdict {s:?}"))),
        }
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Verdict {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Hit set of a threshold scan with its gap statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapReport {
    #[serde(with = "rational::serde_str")]
    pub threshold: Rational,
    pub horizon: i64,
    pub hits: Vec<i64>,
    /// Smallest `K` such that every length-`K` window of `[1, horizon]`
    /// contains a hit; includes the head gap and the censored tail.
    pub max_gap: u64,
    /// `horizon + 1 − last_hit`; censored by the horizon.
    pub tail_gap: u64,
    #[serde(with = "rational::serde_str")]
    pub hit_density: Rational,
    pub verdict: Verdict,
    /// No entry's classification could flip within its drift bound.
    pub drift_clean: bool,
    pub unavailable: usize,
}

/// Gap statistics of a sorted hit set inside `[1, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GapStats {
    pub max_gap: u64,
    /// Largest gap not involving the horizon (head gap included).
    pub interior_gap: u64,
    pub tail_gap: u64,
}

pub fn gap_stats(hits: &[i64], horizon: i64) -> GapStats {
    let Some(&last) = hits.last() else {
        return GapStats { max_gap: 0, interior_gap: 0, tail_gap: 0 };
    };
    let mut prev = 0;
    let mut interior = 0;
    for &h in hits {
        interior = interior.max((h - prev) as u64);
        prev = h;
    }
    let tail = (horizon + 1 - last) as u64;
    GapStats { max_gap: interior.max(tail), interior_gap: interior, tail_gap: tail }
}

fn verdict_for(hits: &[i64], stats: GapStats, unavailable: usize) -> Verdict {
    if hits.is_empty() {
        return if unavailable > 0 { Verdict::Inconclusive } else { Verdict::Empty };
    }
    if unavailable > 0 || stats.tail_gap > stats.interior_gap {
        return Verdict::Inconclusive;
    }
    Verdict::WitnessedSyndetic(stats.max_gap)
}

/// Builds a report for an explicit hit list (used by non-series scans).
pub fn report_from_hits(threshold: Rational, hits: Vec<i64>, horizon: i64) -> GapReport {
    let stats = gap_stats(&hits, horizon);
    let verdict = verdict_for(&hits, stats, 0);
    let hit_density =
        if horizon > 0 { Rational::new((hits.len() as i64).into(), horizon.into()) } else { Rational::zero() };
    GapReport {
        threshold,
        horizon,
        hits,
        max_gap: stats.max_gap,
        tail_gap: stats.tail_gap,
        hit_density,
        verdict,
        drift_clean: true,
        unavailable: 0,
    }
}

/// `{ n ∈ [1, N_max] : series(n) > threshold }`, where Monte Carlo entries
/// count only when their lower confidence bound exceeds the threshold.
pub fn threshold_scan(series: &CorrelationSeries, threshold: &Rational) -> GapReport {
    let horizon = series.end().max(0);
    let mut hits = Vec::new();
    let mut unavailable = 0;
    let mut drift_clean = true;
    for n in 1..=horizon {
        let Some(entry) = series.get(n) else {
            unavailable += 1;
            continue;
        };
        let Some((lower, centre, _)) = entry.bounds() else {
            unavailable += 1;
            continue;
        };
        if lower > *threshold {
            hits.push(n);
        }
        if !entry.drift.is_zero() && (&centre - threshold).abs() <= entry.drift {
            drift_clean = false;
        }
    }
    let stats = gap_stats(&hits, horizon);
    let verdict = verdict_for(&hits, stats, unavailable);
    let hit_density =
        if horizon > 0 { Rational::new((hits.len() as i64).into(), horizon.into()) } else { Rational::zero() };
    GapReport {
        threshold: threshold.clone(),
        horizon,
        hits,
        max_gap: stats.max_gap,
        tail_gap: stats.tail_gap,
        hit_density,
        verdict,
        drift_clean,
        unavailable,
    }
}

/// Hits above the Khintchine threshold `μ(A)^power − ε`.
pub fn khintchine_scan(
    series: &CorrelationSeries,
    measure: &Rational,
    power: u32,
    eps: &Rational,
) -> Result<GapReport> {
    if !eps.is_positive() {
        return Err(Error::InvalidArgument("ε must be positive".into()));
    }
    let threshold = num_traits::pow(measure.clone(), power as usize) - eps;
    Ok(threshold_scan(series, &threshold))
}

/// Empirical recurrence constant: half the smallest average over windows of
/// `window_len` inside `[1, N_max]`, with the hit set above it.
pub fn fk_scan(series: &CorrelationSeries, window_len: i64) -> Result<(Rational, GapReport)> {
    let horizon = series.end();
    if window_len < 1 || 2 * window_len > horizon {
        return Err(Error::InvalidArgument(format!(
            "window length {window_len} must lie in [1, N_max/2] with N_max = {horizon}"
        )));
    }
    let prefix = PrefixSums::new(series);
    let lo = prefix.start().max(1);
    let mut min_avg: Option<Rational> = None;
    for m in lo..=horizon - window_len + 1 {
        let avg = prefix.window_sum(m, m + window_len)? / int(window_len);
        if min_avg.as_ref().is_none_or(|b| avg < *b) {
            min_avg = Some(avg);
        }
    }
    let min_avg = min_avg.ok_or(Error::Window { m: lo, n: lo + window_len, lo: prefix.start(), hi: horizon })?;
    let c_star = if min_avg.is_positive() { min_avg / int(2) } else { Rational::zero() };
    let mut report = threshold_scan(series, &c_star);
    if c_star.is_zero() {
        report.verdict = if report.hits.is_empty() { Verdict::Empty } else { Verdict::Inconclusive };
    }
    Ok((c_star, report))
}
