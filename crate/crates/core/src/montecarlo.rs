//! Orbit-sampling estimators for correlations and window averages.
//!
//! Every sample draws its randomness from a ChaCha stream keyed on
//! `(seed, n, sample index)`, so estimates do not depend on how samples are
//! scheduled across threads. Hit counts are accumulated as integers.

use std::collections::BTreeMap;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{CorrelationSeries, Entry, EntryValue, SeriesLabels, SeriesMeta};
use crate::error::{Error, Result};
use crate::par::{map_range, Execution};
use crate::rational::{frac, int, to_f64, Rational};
use crate::sym::{Cell, ConstraintSet, Symbol, SymbolicSystem, Tref};
use crate::torus::{ArcSet, RotationTuple};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.96;

pub const MIN_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Plain,
    /// Pairs `u` with `1 − u` in every uniform draw.
    Antithetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub seed: u64,
    pub samples: usize,
    /// Leading sample indices skipped in every stream.
    pub burn_in: usize,
    pub estimator: Estimator,
}

impl McConfig {
    pub fn new(seed: u64, samples: usize) -> Result<Self> {
        let cfg = Self { seed, samples, burn_in: 0, estimator: Estimator::Plain };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_estimator(mut self, estimator: Estimator) -> Self {
        self.estimator = estimator;
        self
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            return Err(Error::InvalidArgument(format!(
                "at least {MIN_SAMPLES} samples required, got {}",
                self.samples
            )));
        }
        Ok(())
    }
}

/// Source of uniforms for one sample; mirrored draws give the antithetic twin.
pub struct Uniforms {
    rng: ChaCha8Rng,
    mirrored: bool,
}

impl Uniforms {
    pub fn keyed(seed: u64, n: i64, index: u64, mirrored: bool) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&n.to_le_bytes());
        key[16..24].copy_from_slice(&index.to_le_bytes());
        Self { rng: ChaCha8Rng::from_seed(key), mirrored }
    }

    pub fn next(&mut self) -> f64 {
        let u: f64 = self.rng.random();
        if self.mirrored {
            1.0 - u
        } else {
            u
        }
    }
}

/// Draws a point of the invariant measure and tests `x ∈ ∩ T_i^{-n} A_i`.
pub trait PointSampler: Sync {
    type Set: Sync;
    /// Everything about `(terms, n)` that does not depend on the sample.
    type Plan: Sync;

    fn plan(&self, terms: &[(Tref, Self::Set)], n: i64) -> Result<Self::Plan>;

    fn hit(&self, plan: &Self::Plan, u: &mut Uniforms) -> bool;

    fn tag(&self) -> String;
}

pub struct RotationPlan {
    terms: Vec<(f64, ArcSet)>,
}

impl PointSampler for RotationTuple {
    type Set = ArcSet;
    type Plan = RotationPlan;

    fn plan(&self, terms: &[(Tref, ArcSet)], n: i64) -> Result<RotationPlan> {
        let terms = terms
            .iter()
            .map(|(t, a)| {
                let shift = match t {
                    Tref::Identity => 0.0,
                    Tref::Index(i) => {
                        let angle = self
                            .angles()
                            .get(*i)
                            .ok_or(Error::UnknownTransform { index: *i, count: self.dimension() })?;
                        to_f64(&frac(&(&angle.surrogate * int(n))))
                    }
                };
                Ok((shift, a.clone()))
            })
            .collect::<Result<_>>()?;
        Ok(RotationPlan { terms })
    }

    fn hit(&self, plan: &RotationPlan, u: &mut Uniforms) -> bool {
        let x = u.next();
        plan.terms.iter().all(|(shift, a)| a.contains_f64((x + shift).fract()))
    }

    fn tag(&self) -> String {
        format!("mc-rotation:{}", self.angles().iter().map(|a| a.label.as_str()).collect::<Vec<_>>().join(","))
    }
}

/// One coordinate of `T^n x`: read source `index`, then relabel.
struct Read {
    index: usize,
    relabel: Option<Vec<Symbol>>,
}

pub struct SymbolicPlan {
    /// Cumulative weights of each sampled source cell, in sorted cell order.
    sources: Vec<Vec<f64>>,
    atoms: Vec<(Vec<Read>, std::collections::BTreeSet<Vec<Symbol>>)>,
}

impl PointSampler for SymbolicSystem {
    type Set = ConstraintSet;
    type Plan = SymbolicPlan;

    fn plan(&self, terms: &[(Tref, ConstraintSet)], n: i64) -> Result<SymbolicPlan> {
        let mut cells: Vec<Cell> = Vec::new();
        for (t, a) in terms {
            self.validate_set(a)?;
            cells.extend(self.source_cells(*t, n, a)?);
        }
        cells.sort_unstable();
        cells.dedup();
        let position: BTreeMap<Cell, usize> = cells.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        let cdfs = cumulative(self);
        let mut atoms = Vec::new();
        for (t, a) in terms {
            for atom in a.atoms() {
                let mut reads = Vec::with_capacity(atom.cells().len());
                for &cell in atom.cells() {
                    let src = self.source_cells(*t, n, &ConstraintSet::cylinder(&[(cell, 0)]))?[0];
                    let size = self.components()[cell.0].weights.len();
                    let table: Vec<Symbol> =
                        (0..size as Symbol).map(|s| self.image_symbol(*t, n, cell, |_| s)).collect::<Result<_>>()?;
                    let identity = table.iter().enumerate().all(|(i, &s)| i == s as usize);
                    reads.push(Read { index: position[&src], relabel: (!identity).then_some(table) });
                }
                atoms.push((reads, atom.allowed().clone()));
            }
        }
        Ok(SymbolicPlan { sources: cells.iter().map(|c| cdfs[c.0].clone()).collect(), atoms })
    }

    fn hit(&self, plan: &SymbolicPlan, u: &mut Uniforms) -> bool {
        let x: Vec<Symbol> = plan.sources.iter().map(|cdf| inverse_cdf(cdf, u.next())).collect();
        let mut tuple = Vec::new();
        plan.atoms.iter().all(|(reads, allowed)| {
            tuple.clear();
            tuple.extend(reads.iter().map(|r| {
                let s = x[r.index];
                r.relabel.as_ref().map_or(s, |t| t[s as usize])
            }));
            allowed.contains(&tuple)
        })
    }

    fn tag(&self) -> String {
        format!("mc-symbolic:{}", self.name)
    }
}

fn cumulative(sys: &SymbolicSystem) -> Vec<Vec<f64>> {
    sys.components()
        .iter()
        .map(|c| {
            let mut acc = 0.0;
            c.weights
                .iter()
                .map(|w| {
                    acc += to_f64(w);
                    acc
                })
                .collect()
        })
        .collect()
}

fn inverse_cdf(cdf: &[f64], u: f64) -> Symbol {
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1) as Symbol
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    /// 95% normal-approximation half-width.
    pub half_width: f64,
    pub samples: usize,
    pub seed: u64,
}

impl McEstimate {
    pub fn covers(&self, exact: f64) -> bool {
        (self.estimate - exact).abs() <= self.half_width
    }
}

/// Per-stratum mean and variance of the mean from integer tallies.
fn stratum<S: PointSampler>(
    sampler: &S,
    terms: &[(Tref, S::Set)],
    n: i64,
    cfg: &McConfig,
    count: usize,
    exec: Execution,
) -> Result<(f64, f64, usize)> {
    let plan = sampler.plan(terms, n)?;
    let base = cfg.burn_in as i64;
    match cfg.estimator {
        Estimator::Plain => {
            let flags = map_range(exec, base..base + count as i64, |i| {
                sampler.hit(&plan, &mut Uniforms::keyed(cfg.seed, n, i as u64, false))
            });
            let h = flags.iter().filter(|&&b| b).count() as f64;
            let s = count as f64;
            let mean = h / s;
            let var = (h - h * h / s) / (s - 1.0);
            Ok((mean, var / s, count))
        }
        Estimator::Antithetic => {
            let pairs = count.div_ceil(2).max(2);
            let tallies = map_range(exec, base..base + pairs as i64, |i| {
                let a = sampler.hit(&plan, &mut Uniforms::keyed(cfg.seed, n, i as u64, false));
                let b = sampler.hit(&plan, &mut Uniforms::keyed(cfg.seed, n, i as u64, true));
                a as u8 + b as u8
            });
            let p = pairs as f64;
            let sum: f64 = tallies.iter().map(|&t| t as f64 / 2.0).sum();
            let sum_sq: f64 = tallies.iter().map(|&t| (t as f64 / 2.0).powi(2)).sum();
            let mean = sum / p;
            let var = (sum_sq - sum * sum / p) / (p - 1.0);
            Ok((mean, var.max(0.0) / p, 2 * pairs))
        }
    }
}

/// Estimates `μ(∩_i T_i^{-n}(A_i))`.
pub fn mc_correlation<S: PointSampler>(
    sampler: &S,
    terms: &[(Tref, S::Set)],
    n: i64,
    cfg: &McConfig,
) -> Result<McEstimate> {
    mc_correlation_with(Execution::default_for_build(), sampler, terms, n, cfg)
}

pub fn mc_correlation_with<S: PointSampler>(
    exec: Execution,
    sampler: &S,
    terms: &[(Tref, S::Set)],
    n: i64,
    cfg: &McConfig,
) -> Result<McEstimate> {
    cfg.validate()?;
    let (mean, var, used) = stratum(sampler, terms, n, cfg, cfg.samples, exec)?;
    Ok(McEstimate { estimate: mean, half_width: Z95 * var.sqrt(), samples: used, seed: cfg.seed })
}

/// Estimates `(1/(N−M)) Σ_{n∈[M,N)} μ(∩ T_i^{-n} A_i)`, splitting
/// `cfg.samples` evenly over the `n` (at least two per stratum).
pub fn mc_window_average<S: PointSampler>(
    sampler: &S,
    terms: &[(Tref, S::Set)],
    m: i64,
    n: i64,
    cfg: &McConfig,
) -> Result<McEstimate> {
    mc_window_average_with(Execution::default_for_build(), sampler, terms, m, n, cfg)
}

pub fn mc_window_average_with<S: PointSampler>(
    exec: Execution,
    sampler: &S,
    terms: &[(Tref, S::Set)],
    m: i64,
    n: i64,
    cfg: &McConfig,
) -> Result<McEstimate> {
    cfg.validate()?;
    if n <= m {
        return Err(Error::Window { m, n, lo: m, hi: n });
    }
    let len = (n - m) as usize;
    let per = cfg.samples.div_ceil(len).max(2);
    let strata = map_range(exec, m..n, |k| stratum(sampler, terms, k, cfg, per, Execution::Sequential))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let l = len as f64;
    let mean = strata.iter().map(|s| s.0).sum::<f64>() / l;
    let var = strata.iter().map(|s| s.1).sum::<f64>() / (l * l);
    let used = strata.iter().map(|s| s.2).sum();
    Ok(McEstimate { estimate: mean, half_width: Z95 * var.sqrt(), samples: used, seed: cfg.seed })
}

/// Monte Carlo counterpart of an exact correlation series.
pub fn mc_correlation_series<S: PointSampler>(
    sampler: &S,
    terms: &[(Tref, S::Set)],
    range: Range<i64>,
    cfg: &McConfig,
    labels: &SeriesLabels,
) -> Result<CorrelationSeries> {
    cfg.validate()?;
    let exec = Execution::default_for_build();
    let entries = map_range(exec, range.clone(), |k| {
        let (mean, var, _) = stratum(sampler, terms, k, cfg, cfg.samples, Execution::Sequential)?;
        Ok(Entry {
            n: k,
            value: EntryValue::Interval { estimate: mean, half_width: Z95 * var.sqrt() },
            drift: Rational::default(),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let meta = SeriesMeta {
        system: labels.system.clone(),
        sets: labels.sets.clone(),
        transforms: terms.iter().map(|(t, _)| crate::analysis::tref_label(*t)).collect(),
        horizon: range.end - 1,
        backend: sampler.tag(),
        seed: Some(cfg.seed),
        samples: Some(cfg.samples),
    };
    CorrelationSeries::new(meta, entries)
}

#[cfg(test)]
mod tests;
