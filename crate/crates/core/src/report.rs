//! JSON report schema shared by the analysis, spectral and Monte Carlo
//! commands.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::analysis::{GapReport, JoiningChecks, JoiningEstimate, SeriesMeta, Verdict, WindowAverage};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::spectral::{SpectralSplit, VdcReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JoiningSection {
    pub shape: Vec<usize>,
    #[serde(with = "rational::serde_vec")]
    pub tensor: Vec<Rational>,
    #[serde(with = "rational::serde_str")]
    pub product_distance: Rational,
    pub checks: JoiningChecks,
}

impl JoiningSection {
    pub fn new(je: &JoiningEstimate, checks: JoiningChecks) -> Self {
        Self {
            shape: je.shape.clone(),
            tensor: je.tensor.clone(),
            product_distance: je.product_distance.clone(),
            checks,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndicatorSection {
    pub min_f: f64,
    pub max_f: f64,
    pub inner_product: f64,
    #[serde(rename = "positivity_on_A")]
    pub positivity_on_a: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VdcSection {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

impl From<&VdcReport> for VdcSection {
    fn from(r: &VdcReport) -> Self {
        Self { lhs: r.lhs, rhs: r.rhs, slack: r.slack }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_residual: Option<f64>,
    #[serde(default, rename = "lemma33", skip_serializing_if = "Option::is_none")]
    pub indicator_checks: Option<IndicatorSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vdc: Option<VdcSection>,
}

impl SpectralSection {
    pub fn from_split(split: &SpectralSplit) -> Self {
        Self {
            split_residual: Some(split.residual_norm),
            indicator_checks: split.indicator_checks.as_ref().map(|l| IndicatorSection {
                min_f: l.min_f,
                max_f: l.max_f,
                inner_product: split.inner_product,
                positivity_on_a: l.positivity_on_a,
            }),
            vdc: None,
        }
    }
}

/// A single command's result. Sections a command does not produce are
/// omitted; `details` carries command-specific values.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series_meta: Option<SeriesMeta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_report: Option<GapReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub averages: Vec<WindowAverage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joining: Option<JoiningSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral: Option<SpectralSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci: Option<f64>,
    /// Marks results that stand in for an asymptotic statement.
    #[serde(default)]
    pub finite_horizon: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, serde_json::Value>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Parses and validates a report.
    pub fn from_json(text: &str) -> Result<Self> {
        let report: Report = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))?;
        report.validate()?;
        Ok(report)
    }

    /// Checks internal consistency beyond the field types.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parse(msg));
        if let Some(g) = &self.gap_report {
            if g.hits.windows(2).any(|w| w[0] >= w[1]) || g.hits.iter().any(|&h| h < 1 || h > g.horizon) {
                return bad("gap_report.hits must be increasing inside [1, horizon]".into());
            }
            match g.verdict {
                Verdict::Empty if !g.hits.is_empty() => return bad("EMPTY verdict with hits".into()),
                Verdict::WitnessedSyndetic(k) if k != g.max_gap || g.hits.is_empty() => {
                    return bad("syndetic verdict disagrees with max_gap".into())
                }
                _ => {}
            }
        }
        for a in &self.averages {
            if a.n <= a.m {
                return bad(format!("average window [{}, {}) is empty", a.m, a.n));
            }
        }
        if let Some(j) = &self.joining {
            let cells: usize = j.shape.iter().product();
            if cells != j.tensor.len() {
                return bad(format!("joining tensor has {} cells, shape needs {cells}", j.tensor.len()));
            }
            let total: Rational = j.tensor.iter().sum();
            if j.tensor.iter().any(|v| *v < Rational::zero()) || total != Rational::one() {
                return bad("joining tensor is not a probability vector".into());
            }
        }
        if let Some(ci) = self.ci {
            if !(ci >= 0.0) {
                return bad("ci must be a non-negative number".into());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::report_from_hits;
    use crate::rational::q;

    fn sample() -> Report {
        Report {
            gap_report: Some(report_from_hits(q(1, 10), vec![2, 4, 6], 7)),
            averages: vec![WindowAverage { m: 0, n: 8, value: q(1, 8), half_width: None }],
            joining: Some(JoiningSection {
                shape: vec![2, 2],
                tensor: vec![q(1, 4); 4],
                product_distance: q(0, 1),
                checks: JoiningChecks {
                    marginals_exact: true,
                    max_marginal_error: q(0, 1),
                    near_invariance: true,
                    max_invariance_gap: q(0, 1),
                    invariance_bound: q(1, 50),
                    tensor_is_probability: true,
                },
            }),
            spectral: Some(SpectralSection {
                split_residual: Some(0.0),
                indicator_checks: Some(IndicatorSection {
                    min_f: 0.0,
                    max_f: 0.5,
                    inner_product: 0.0,
                    positivity_on_a: true,
                }),
                vdc: Some(VdcSection { lhs: 0.1, rhs: 0.2, slack: 0.01 }),
            }),
            seed: Some(7),
            samples: Some(1000),
            ci: Some(0.01),
            finite_horizon: true,
            ..Report::default()
        }
    }

    #[test]
    fn round_trip() {
        let r = sample();
        let text = r.to_json().unwrap();
        assert!(text.contains("\"positivity_on_A\": true"));
        assert!(text.contains("\"M\": 0"));
        assert!(text.contains("\"product_distance\": \"0/1\""));
        assert_eq!(Report::from_json(&text).unwrap(), r);
    }

    #[test]
    fn rejects_unknown_fields_and_inconsistency() {
        assert!(Report::from_json(r#"{"bogus": 1}"#).is_err());
        let mut r = sample();
        r.gap_report.as_mut().unwrap().hits = vec![4, 2];
        assert!(Report::from_json(&r.to_json().unwrap()).is_err());
        let mut r = sample();
        r.joining.as_mut().unwrap().tensor[0] = q(1, 2);
        assert!(Report::from_json(&r.to_json().unwrap()).is_err());
        let mut r = sample();
        r.gap_report.as_mut().unwrap().verdict = Verdict::WitnessedSyndetic(99);
        assert!(r.validate().is_err());
        let err = Report::from_json("{\n  \"seed\": \"x\"\n}").unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }
}
