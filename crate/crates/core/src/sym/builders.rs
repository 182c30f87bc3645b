use std::collections::{BTreeMap, BTreeSet};

use super::{Atom, Component, Conjugator, ConstraintSet, Permutation, Symbol, SymbolicSystem, TransformSpec};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// One-component Bernoulli shift on `alphabet` symbols with the given weights.
pub fn make_bernoulli(alphabet: usize, weights: Vec<Rational>) -> Result<SymbolicSystem> {
    let component = Component::new(alphabet, weights)?;
    SymbolicSystem::new(format!("bernoulli-{alphabet}"), vec![component], vec![TransformSpec::shift(vec![1])])
}

/// Fair-coin two-sided shift `S` and its flip conjugate `T = ψ⁻¹Sψ`, where
/// `ψ` swaps `0 ↔ 1` at every coordinate except `0`.
pub fn make_flip_pair() -> SymbolicSystem {
    let flip = Permutation::new(vec![1, 0]).expect("swap is a permutation");
    let conj = Conjugator { default: flip, exceptions: BTreeMap::from([(0, Permutation::identity(2))]) };
    let s = TransformSpec::shift(vec![1]);
    let t = TransformSpec { shifts: vec![1], conjugators: vec![Some(conj)] };
    let coin = Component::uniform(2).expect("uniform weights");
    SymbolicSystem::new("flip", vec![coin], vec![s, t]).expect("flip pair is valid")
}

/// `Σ × Σ × Σ` with `Σ` the uniform three-symbol shift and transforms
/// `id×S×S`, `S×id×S`, `S×S×id`.
pub fn make_triple_product() -> SymbolicSystem {
    let c = Component::uniform(3).expect("uniform weights");
    SymbolicSystem::new(
        "triple",
        vec![c.clone(), c.clone(), c],
        vec![
            TransformSpec::shift(vec![0, 1, 1]),
            TransformSpec::shift(vec![1, 0, 1]),
            TransformSpec::shift(vec![1, 1, 0]),
        ],
    )
    .expect("triple product is valid")
}

/// `{ the coordinate-0 symbols of the listed components are pairwise distinct }`.
pub fn make_distinct_tuple_set(components: &[usize], alphabet: usize) -> Result<ConstraintSet> {
    if components.is_empty() {
        return Err(Error::InvalidSet("no components".into()));
    }
    let cells = components.iter().map(|&c| (c, 0)).collect();
    let allowed: BTreeSet<_> = distinct_tuples(components.len(), alphabet).into_iter().collect();
    Ok(ConstraintSet::new(vec![Atom::new(cells, allowed)?]))
}

/// All length-`len` tuples over `0..alphabet` with pairwise distinct entries.
fn distinct_tuples(len: usize, alphabet: usize) -> Vec<Vec<Symbol>> {
    fn rec(len: usize, alphabet: usize, cur: &mut Vec<Symbol>, out: &mut Vec<Vec<Symbol>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for s in 0..alphabet as Symbol {
            if !cur.contains(&s) {
                cur.push(s);
                rec(len, alphabet, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(len, alphabet, &mut Vec::with_capacity(len), &mut out);
    out
}
