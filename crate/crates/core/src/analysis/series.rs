use std::ops::Range;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::ExactBackend;
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::rational::{self, Rational};
use crate::sym::Tref;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesMeta {
    pub system: String,
    pub sets: Vec<String>,
    pub transforms: Vec<String>,
    /// Last `n` in the series.
    pub horizon: i64,
    pub backend: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EntryValue {
    Exact(Rational),
    /// Monte Carlo estimate with a 95% confidence half-width.
    Interval {
        estimate: f64,
        half_width: f64,
    },
    Unavailable(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub n: i64,
    pub value: EntryValue,
    /// Bound on the surrogate error of `value`.
    pub drift: Rational,
}

impl Entry {
    /// `(lower, centre, upper)` as exact rationals; `None` when unavailable.
    pub fn bounds(&self) -> Option<(Rational, Rational, Rational)> {
        match &self.value {
            EntryValue::Exact(v) => Some((v.clone(), v.clone(), v.clone())),
            EntryValue::Interval { estimate, half_width } => {
                let f = |x: f64| Rational::from_float(x).unwrap_or_else(Rational::zero);
                Some((f(estimate - half_width), f(*estimate), f(estimate + half_width)))
            }
            EntryValue::Unavailable(_) => None,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match &self.value {
            EntryValue::Exact(v) => Some(v),
            _ => None,
        }
    }
}

/// `n ↦ μ(∩ T_i^{-n} A_i)` over a contiguous range of `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSeries {
    pub meta: SeriesMeta,
    entries: Vec<Entry>,
}

impl CorrelationSeries {
    pub fn new(meta: SeriesMeta, entries: Vec<Entry>) -> Result<Self> {
        if entries.windows(2).any(|w| w[1].n != w[0].n + 1) {
            return Err(Error::InvalidArgument("series entries must be contiguous in n".into()));
        }
        for e in &entries {
            if let EntryValue::Exact(v) = &e.value {
                if v.is_negative() || *v > Rational::from_integer(1.into()) {
                    return Err(Error::InvariantViolation(format!(
                        "correlation value {} at n={} outside [0,1]",
                        rational::format(v),
                        e.n
                    )));
                }
            }
        }
        Ok(Self { meta, entries })
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn start(&self) -> i64 {
        self.entries.first().map_or(0, |e| e.n)
    }

    /// Last `n` present (the horizon `N_max`).
    pub fn end(&self) -> i64 {
        self.entries.last().map_or(0, |e| e.n)
    }

    pub fn get(&self, n: i64) -> Option<&Entry> {
        let idx = usize::try_from(n - self.start()).ok()?;
        self.entries.get(idx)
    }

    pub fn exact_values(&self) -> Option<Vec<Rational>> {
        self.entries.iter().map(|e| e.exact().cloned()).collect()
    }

    pub fn is_exact(&self) -> bool {
        self.entries.iter().all(|e| matches!(e.value, EntryValue::Exact(_)))
    }

    pub fn max_drift(&self) -> Rational {
        self.entries.iter().map(|e| e.drift.clone()).max().unwrap_or_else(Rational::zero)
    }
}

/// Labels attached to a series; purely descriptive.
#[derive(Debug, Clone, Default)]
pub struct SeriesLabels {
    pub system: String,
    pub sets: Vec<String>,
}

/// Evaluates the correlation sequence of `terms` for every `n` in `range`.
///
/// Backend failures (e.g. the cell limit) mark the entry unavailable; the
/// series is still returned.
pub fn correlation_series<B: ExactBackend>(
    backend: &B,
    terms: &[(Tref, B::Set)],
    range: Range<i64>,
    labels: &SeriesLabels,
) -> Result<CorrelationSeries> {
    correlation_series_with(Execution::default_for_build(), backend, terms, range, labels)
}

pub fn correlation_series_with<B: ExactBackend>(
    exec: Execution,
    backend: &B,
    terms: &[(Tref, B::Set)],
    range: Range<i64>,
    labels: &SeriesLabels,
) -> Result<CorrelationSeries> {
    if terms.is_empty() {
        return Err(Error::InvalidArgument("no correlation terms".into()));
    }
    let mut seen = std::collections::HashSet::new();
    for (t, _) in terms {
        if let Tref::Index(_) = t {
            if !seen.insert(*t) {
                return Err(Error::InvalidArgument(format!("transform {t:?} listed twice")));
            }
        }
    }
    if range.is_empty() {
        return Err(Error::InvalidArgument("empty n range".into()));
    }
    let horizon = range.end - 1;
    let entries = par::map_range(exec, range, |n| {
        let value = match backend.correlation(terms, n) {
            Ok(v) => EntryValue::Exact(v),
            Err(e) => EntryValue::Unavailable(e.to_string()),
        };
        Entry { n, value, drift: backend.drift(terms, n) }
    });
    let meta = SeriesMeta {
        system: labels.system.clone(),
        sets: labels.sets.clone(),
        transforms: terms.iter().map(|(t, _)| tref_label(*t)).collect(),
        horizon,
        backend: backend.tag(),
        seed: None,
        samples: None,
    };
    CorrelationSeries::new(meta, entries)
}

pub fn tref_label(t: Tref) -> String {
    match t {
        Tref::Identity => "id".into(),
        Tref::Index(i) => i.to_string(),
    }
}
