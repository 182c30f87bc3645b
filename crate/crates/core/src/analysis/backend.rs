use num_traits::{One, Zero};

use crate::error::Result;
use crate::rational::{int, Rational};
use crate::sym::{ConstraintSet, SymbolicSystem, Tref};
use crate::torus::{arcs_intersect_measure, rot_preimage, ArcSet, RotationTuple};

/// A system whose set measures and preimages are computed exactly.
///
/// `Tref::Index(i)` selects the system's `i`-th transformation.
pub trait ExactBackend: Sync {
    type Set: Clone + Send + Sync;

    fn measure(&self, set: &Self::Set) -> Result<Rational>;

    fn preimage(&self, map: Tref, n: i64, set: &Self::Set) -> Result<Self::Set>;

    fn intersection_measure(&self, sets: &[Self::Set]) -> Result<Rational>;

    /// Bound on the error of `μ(∩ T_i^{-n} A_i)` caused by surrogate
    /// parameters. Zero for backends without approximation.
    fn drift(&self, _terms: &[(Tref, Self::Set)], _n: i64) -> Rational {
        Rational::zero()
    }

    fn tag(&self) -> String;

    /// `μ(∩_i T_i^{-n}(A_i))`.
    fn correlation(&self, terms: &[(Tref, Self::Set)], n: i64) -> Result<Rational> {
        let sets = terms.iter().map(|(t, a)| self.preimage(*t, n, a)).collect::<Result<Vec<_>>>()?;
        self.intersection_measure(&sets)
    }
}

impl ExactBackend for SymbolicSystem {
    type Set = ConstraintSet;

    fn measure(&self, set: &ConstraintSet) -> Result<Rational> {
        self.exact_measure(set)
    }

    fn preimage(&self, map: Tref, n: i64, set: &ConstraintSet) -> Result<ConstraintSet> {
        self.pullback_ref(map, n, set)
    }

    fn intersection_measure(&self, sets: &[ConstraintSet]) -> Result<Rational> {
        self.exact_measure(&ConstraintSet::intersect(sets))
    }

    fn tag(&self) -> String {
        format!("exact-symbolic:{}", self.name)
    }
}

impl ExactBackend for RotationTuple {
    type Set = ArcSet;

    fn measure(&self, set: &ArcSet) -> Result<Rational> {
        Ok(set.measure())
    }

    fn preimage(&self, map: Tref, n: i64, set: &ArcSet) -> Result<ArcSet> {
        match map {
            Tref::Identity => Ok(set.clone()),
            Tref::Index(i) => {
                let angle =
                    self.angles().get(i).ok_or(crate::Error::UnknownTransform { index: i, count: self.dimension() })?;
                Ok(rot_preimage(angle, n, set))
            }
        }
    }

    fn intersection_measure(&self, sets: &[ArcSet]) -> Result<Rational> {
        if sets.is_empty() {
            return Ok(Rational::one());
        }
        Ok(arcs_intersect_measure(sets))
    }

    /// Each endpoint of `R_i^{-n}A_i` moves by at most `|n|·δ_i`, and the
    /// intersection length is 1-Lipschitz in every endpoint.
    fn drift(&self, terms: &[(Tref, ArcSet)], n: i64) -> Rational {
        let mut total = Rational::zero();
        for (t, a) in terms {
            if let Tref::Index(i) = t {
                if let Some(angle) = self.angles().get(*i) {
                    total += &angle.drift * int(n.abs()) * int(a.endpoint_count() as i64);
                }
            }
        }
        total
    }

    fn tag(&self) -> String {
        let labels: Vec<&str> = self.angles().iter().map(|a| a.label.as_str()).collect();
        format!("exact-rotation:{}", labels.join(","))
    }
}
