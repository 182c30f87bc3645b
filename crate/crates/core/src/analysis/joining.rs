use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::ExactBackend;
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::rational::{self, int, Rational};
use crate::sym::Tref;

/// Finite-window empirical joining restricted to a product of partitions.
///
/// `tensor[j_1, …, j_k] = (1/(N−M)) Σ_{n=M}^{N−1} ν(S_1^{-n}P_{1,j_1} ∩ ⋯ ∩ S_k^{-n}P_{k,j_k})`,
/// stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JoiningEstimate {
    pub m: i64,
    pub n: i64,
    pub shape: Vec<usize>,
    pub tensor: Vec<Rational>,
    /// The same average on the boxes `∏ S_i^{-1} P_{i,j_i}`, computed by
    /// pulling the partitions back first.
    pub shifted_tensor: Vec<Rational>,
    /// `ν(P_{i,j})`, computed directly from the partitions.
    pub partition_measures: Vec<Vec<Rational>>,
    /// Total-variation distance to the product of the marginals.
    pub product_distance: Rational,
}

impl JoiningEstimate {
    pub fn entry(&self, index: &[usize]) -> &Rational {
        &self.tensor[flat_index(&self.shape, index)]
    }
}

fn flat_index(shape: &[usize], index: &[usize]) -> usize {
    index.iter().zip(shape).fold(0, |acc, (&i, &s)| acc * s + i)
}

fn multi_index(shape: &[usize], mut flat: usize) -> Vec<usize> {
    let mut out = vec![0; shape.len()];
    for (slot, &s) in out.iter_mut().zip(shape).rev() {
        *slot = flat % s;
        flat /= s;
    }
    out
}

fn window_tensor<B: ExactBackend>(
    exec: Execution,
    backend: &B,
    maps: &[Tref],
    partitions: &[Vec<B::Set>],
    m: i64,
    n: i64,
) -> Result<Vec<Rational>> {
    let shape: Vec<usize> = partitions.iter().map(Vec::len).collect();
    let cells: usize = shape.iter().product();
    let per_n = par::map_range(exec, m..n, |step| -> Result<Vec<Rational>> {
        let pulled: Vec<Vec<B::Set>> = maps
            .iter()
            .zip(partitions)
            .map(|(&t, p)| p.iter().map(|s| backend.preimage(t, step, s)).collect())
            .collect::<Result<_>>()?;
        (0..cells)
            .map(|flat| {
                let idx = multi_index(&shape, flat);
                let sets: Vec<B::Set> = idx.iter().enumerate().map(|(f, &j)| pulled[f][j].clone()).collect();
                backend.intersection_measure(&sets)
            })
            .collect()
    });
    let mut sums = vec![Rational::zero(); cells];
    for row in per_n {
        for (acc, v) in sums.iter_mut().zip(row?) {
            *acc += v;
        }
    }
    let len = int(n - m);
    Ok(sums.into_iter().map(|s| s / &len).collect())
}

/// Computes `λ_{M,N}` on the product partition plus the data needed for
/// [`joining_exact_checks`].
pub fn empirical_joining<B: ExactBackend>(
    backend: &B,
    maps: &[Tref],
    partitions: &[Vec<B::Set>],
    m: i64,
    n: i64,
) -> Result<JoiningEstimate> {
    empirical_joining_with(Execution::default_for_build(), backend, maps, partitions, m, n)
}

pub fn empirical_joining_with<B: ExactBackend>(
    exec: Execution,
    backend: &B,
    maps: &[Tref],
    partitions: &[Vec<B::Set>],
    m: i64,
    n: i64,
) -> Result<JoiningEstimate> {
    if maps.is_empty() || maps.len() != partitions.len() {
        return Err(Error::InvalidArgument("need one partition per transformation".into()));
    }
    if m >= n {
        return Err(Error::InvalidArgument(format!("empty window [{m}, {n})")));
    }
    let mut partition_measures = Vec::with_capacity(partitions.len());
    for (factor, p) in partitions.iter().enumerate() {
        if p.is_empty() {
            return Err(Error::PartitionNotCovering { factor, total: "0/1".into() });
        }
        let measures = p.iter().map(|s| backend.measure(s)).collect::<Result<Vec<_>>>()?;
        let total: Rational = measures.iter().sum();
        if !total.is_one() {
            return Err(Error::PartitionNotCovering { factor, total: rational::format(&total) });
        }
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                if !backend.intersection_measure(&[p[i].clone(), p[j].clone()])?.is_zero() {
                    return Err(Error::PartitionNotCovering { factor, total: "overlapping cells".into() });
                }
            }
        }
        partition_measures.push(measures);
    }
    let tensor = window_tensor(exec, backend, maps, partitions, m, n)?;
    let shifted_parts: Vec<Vec<B::Set>> = maps
        .iter()
        .zip(partitions)
        .map(|(&t, p)| p.iter().map(|s| backend.preimage(t, 1, s)).collect())
        .collect::<Result<_>>()?;
    let shifted_tensor = window_tensor(exec, backend, maps, &shifted_parts, m, n)?;
    let shape: Vec<usize> = partitions.iter().map(Vec::len).collect();
    let product_distance = tensor
        .iter()
        .enumerate()
        .map(|(flat, v)| {
            let idx = multi_index(&shape, flat);
            let prod: Rational = idx.iter().enumerate().map(|(f, &j)| partition_measures[f][j].clone()).product();
            (v - prod).abs()
        })
        .sum::<Rational>()
        / int(2);
    Ok(JoiningEstimate { m, n, shape, tensor, shifted_tensor, partition_measures, product_distance })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JoiningChecks {
    pub marginals_exact: bool,
    #[serde(with = "rational::serde_str")]
    pub max_marginal_error: Rational,
    pub near_invariance: bool,
    #[serde(with = "rational::serde_str")]
    pub max_invariance_gap: Rational,
    /// `2 / (N − M)`.
    #[serde(with = "rational::serde_str")]
    pub invariance_bound: Rational,
    pub tensor_is_probability: bool,
}

impl JoiningChecks {
    pub fn passed(&self) -> bool {
        self.marginals_exact && self.near_invariance && self.tensor_is_probability
    }

    /// Converts a failed check into a hard error.
    pub fn require(self) -> Result<Self> {
        if self.passed() {
            Ok(self)
        } else {
            Err(Error::InvariantViolation(format!("joining checks failed: {self:?}")))
        }
    }
}

/// Exact self-checks of a joining estimate: every marginal equals the
/// partition measures, and shifting all boxes by the maps moves the
/// estimate by at most `2/(N−M)`.
pub fn joining_exact_checks(je: &JoiningEstimate) -> JoiningChecks {
    let mut max_marginal_error = Rational::zero();
    for (factor, measures) in je.partition_measures.iter().enumerate() {
        let mut marg = vec![Rational::zero(); measures.len()];
        for (flat, v) in je.tensor.iter().enumerate() {
            marg[multi_index(&je.shape, flat)[factor]] += v;
        }
        for (got, want) in marg.iter().zip(measures) {
            let err = (got - want).abs();
            if err > max_marginal_error {
                max_marginal_error = err;
            }
        }
    }
    let max_invariance_gap =
        je.tensor.iter().zip(&je.shifted_tensor).map(|(a, b)| (a - b).abs()).max().unwrap_or_else(Rational::zero);
    let invariance_bound = Rational::new(2.into(), (je.n - je.m).into());
    let total: Rational = je.tensor.iter().sum();
    JoiningChecks {
        marginals_exact: max_marginal_error.is_zero(),
        near_invariance: max_invariance_gap <= invariance_bound,
        tensor_is_probability: total.is_one() && je.tensor.iter().all(|v| !v.is_negative()),
        max_marginal_error,
        max_invariance_gap,
        invariance_bound,
    }
}
