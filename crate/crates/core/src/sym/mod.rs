//! Shift-type systems on products of two-sided sequence spaces.
//!
//! A [`SymbolicSystem`] carries a list of components `Σ_c = A_c^ℤ`, each with
//! an i.i.d. product measure, and a list of transforms of the form
//! `T = φ⁻¹ ∘ S^e ∘ φ` where `S^e` shifts component `c` by `e_c` and `φ`
//! permutes the symbol at each coordinate. Measurable sets are relational
//! cylinders ([`ConstraintSet`]); their measures are exact rationals.

mod builders;
mod constraint;
pub mod io;

pub use builders::{make_bernoulli, make_distinct_tuple_set, make_flip_pair, make_triple_product};
pub use constraint::{Atom, ConstraintSet};

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub type Symbol = u16;
/// `(component, coordinate)`.
pub type Cell = (usize, i64);

pub const DEFAULT_HORIZON: i64 = 1 << 40;
pub const DEFAULT_CELL_LIMIT: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub alphabet: usize,
    pub weights: Vec<Rational>,
}

impl Component {
    pub fn new(alphabet: usize, weights: Vec<Rational>) -> Result<Self> {
        if alphabet < 2 {
            return Err(Error::InvalidSystem(format!("alphabet size {alphabet} < 2")));
        }
        if weights.len() != alphabet {
            return Err(Error::InvalidWeights(format!("{} weights for alphabet of size {alphabet}", weights.len())));
        }
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::InvalidWeights("negative weight".into()));
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {} instead of 1",
                crate::rational::format(&total)
            )));
        }
        Ok(Self { alphabet, weights })
    }

    pub fn uniform(alphabet: usize) -> Result<Self> {
        let w = Rational::new(1.into(), (alphabet as i64).into());
        Self::new(alphabet, vec![w; alphabet])
    }
}

/// A permutation of an alphabet with its inverse. Involutions store only
/// the forward table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<Symbol>,
    inverse: Option<Vec<Symbol>>,
}

impl Permutation {
    pub fn new(forward: Vec<Symbol>) -> Result<Self> {
        let n = forward.len();
        let mut inverse = vec![Symbol::MAX; n];
        for (i, &s) in forward.iter().enumerate() {
            let s = s as usize;
            if s >= n || inverse[s] != Symbol::MAX {
                return Err(Error::InvalidSystem(format!("{forward:?} is not a permutation")));
            }
            inverse[s] = i as Symbol;
        }
        let inverse = if inverse == forward { None } else { Some(inverse) };
        Ok(Self { forward, inverse })
    }

    pub fn identity(n: usize) -> Self {
        Self { forward: (0..n as Symbol).collect(), inverse: None }
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn is_involution(&self) -> bool {
        self.inverse.is_none()
    }

    pub fn forward(&self) -> &[Symbol] {
        &self.forward
    }

    pub fn apply(&self, s: Symbol) -> Symbol {
        self.forward[s as usize]
    }

    pub fn apply_inverse(&self, s: Symbol) -> Symbol {
        match &self.inverse {
            Some(inv) => inv[s as usize],
            None => self.forward[s as usize],
        }
    }
}

/// Coordinate-dependent symbol permutation: `default` everywhere except a
/// finite set of coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conjugator {
    pub default: Permutation,
    pub exceptions: BTreeMap<i64, Permutation>,
}

impl Conjugator {
    pub fn at(&self, coordinate: i64) -> &Permutation {
        self.exceptions.get(&coordinate).unwrap_or(&self.default)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformSpec {
    /// Shift exponent per component.
    pub shifts: Vec<i64>,
    /// Optional conjugator per component (`None` means identity).
    pub conjugators: Vec<Option<Conjugator>>,
}

impl TransformSpec {
    pub fn shift(shifts: Vec<i64>) -> Self {
        let conjugators = vec![None; shifts.len()];
        Self { shifts, conjugators }
    }
}

/// Selects one of a system's transforms, or the identity map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tref {
    Identity,
    Index(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicSystem {
    pub name: String,
    components: Vec<Component>,
    transforms: Vec<TransformSpec>,
    pub horizon: i64,
    pub cell_limit: usize,
}

impl SymbolicSystem {
    pub fn new(name: impl Into<String>, components: Vec<Component>, transforms: Vec<TransformSpec>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidSystem("no components".into()));
        }
        for (t, spec) in transforms.iter().enumerate() {
            if spec.shifts.len() != components.len() {
                return Err(Error::InvalidSystem(format!(
                    "transform {t} has {} shift exponents for {} components",
                    spec.shifts.len(),
                    components.len()
                )));
            }
            if spec.conjugators.len() > components.len() {
                return Err(Error::InvalidSystem(format!("transform {t} references undeclared components")));
            }
            for (c, conj) in spec.conjugators.iter().enumerate() {
                let Some(conj) = conj else { continue };
                let comp = &components[c];
                for perm in std::iter::once(&conj.default).chain(conj.exceptions.values()) {
                    if perm.len() != comp.alphabet {
                        return Err(Error::InvalidSystem(format!(
                            "transform {t}: permutation of size {} on alphabet {}",
                            perm.len(),
                            comp.alphabet
                        )));
                    }
                    for s in 0..comp.alphabet {
                        if comp.weights[perm.apply(s as Symbol) as usize] != comp.weights[s] {
                            return Err(Error::InvalidSystem(format!(
                                "transform {t}: permutation does not preserve weights of component {c}"
                            )));
                        }
                    }
                }
            }
        }
        let mut transforms = transforms;
        for spec in &mut transforms {
            spec.conjugators.resize(components.len(), None);
        }
        Ok(Self { name: name.into(), components, transforms, horizon: DEFAULT_HORIZON, cell_limit: DEFAULT_CELL_LIMIT })
    }

    pub fn with_horizon(mut self, horizon: i64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_cell_limit(mut self, limit: usize) -> Self {
        self.cell_limit = limit;
        self
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn transforms(&self) -> &[TransformSpec] {
        &self.transforms
    }

    pub fn transform(&self, t: usize) -> Result<&TransformSpec> {
        self.transforms.get(t).ok_or(Error::UnknownTransform { index: t, count: self.transforms.len() })
    }

    pub fn weight(&self, component: usize, s: Symbol) -> &Rational {
        &self.components[component].weights[s as usize]
    }

    /// Checks that a set only mentions declared components and symbols.
    pub fn validate_set(&self, c: &ConstraintSet) -> Result<()> {
        for atom in c.atoms() {
            for (pos, &(comp, _)) in atom.cells().iter().enumerate() {
                let Some(component) = self.components.get(comp) else {
                    return Err(Error::InvalidSet(format!("unknown component {comp}")));
                };
                if atom.allowed().iter().any(|t| t[pos] as usize >= component.alphabet) {
                    return Err(Error::InvalidSet(format!("symbol outside alphabet of component {comp}")));
                }
            }
        }
        Ok(())
    }

    /// Exact description of `T_t^{-n}(c)`.
    ///
    /// For `T = φ⁻¹ S^e φ`, membership of `x` in `T^{-n}C` constrains cell
    /// `(comp, i + n·e_comp)` to `φ_{i+n·e}⁻¹(φ_i(allowed))`.
    pub fn pullback(&self, t: usize, n: i64, c: &ConstraintSet) -> Result<ConstraintSet> {
        let spec = self.transform(t)?;
        if n == 0 {
            return Ok(c.clone());
        }
        let mut atoms = Vec::with_capacity(c.atoms().len());
        for atom in c.atoms() {
            let mut cells = Vec::with_capacity(atom.cells().len());
            for &(comp, i) in atom.cells() {
                let shift =
                    *spec.shifts.get(comp).ok_or_else(|| Error::InvalidSet(format!("unknown component {comp}")))?;
                let target = i as i128 + n as i128 * shift as i128;
                if target.unsigned_abs() > self.horizon as u128 {
                    return Err(Error::HorizonExceeded { coordinate: target, bound: self.horizon });
                }
                cells.push((comp, target as i64));
            }
            let maps: Vec<Option<(&Permutation, &Permutation)>> = atom
                .cells()
                .iter()
                .zip(&cells)
                .map(|(&(comp, i), &(_, j))| spec.conjugators[comp].as_ref().map(|cj| (cj.at(i), cj.at(j))))
                .collect();
            let allowed = atom
                .allowed()
                .iter()
                .map(|tuple| {
                    tuple
                        .iter()
                        .zip(&maps)
                        .map(|(&s, m)| match m {
                            Some((from, to)) => to.apply_inverse(from.apply(s)),
                            None => s,
                        })
                        .collect()
                })
                .collect();
            atoms.push(Atom::from_parts(cells, allowed));
        }
        Ok(ConstraintSet::from_atoms_unchecked(atoms, c.is_canonical()))
    }

    pub fn pullback_ref(&self, t: Tref, n: i64, c: &ConstraintSet) -> Result<ConstraintSet> {
        match t {
            Tref::Identity => Ok(c.clone()),
            Tref::Index(i) => self.pullback(i, n, c),
        }
    }

    /// Exact product measure of a constraint set.
    pub fn exact_measure(&self, c: &ConstraintSet) -> Result<Rational> {
        let owned;
        let c = if c.is_canonical() {
            c
        } else {
            owned = c.clone().canonicalize();
            &owned
        };
        self.validate_set(c)?;
        let mut total = Rational::one();
        for atom in c.atoms() {
            if atom.cells().len() > self.cell_limit {
                return Err(Error::CellLimit { cells: atom.cells().len(), limit: self.cell_limit });
            }
            let mut mass = Rational::zero();
            for tuple in atom.allowed() {
                let mut w = Rational::one();
                for (&s, &(comp, _)) in tuple.iter().zip(atom.cells()) {
                    w *= self.weight(comp, s);
                }
                mass += w;
            }
            if mass.is_zero() {
                return Ok(mass);
            }
            total *= mass;
        }
        Ok(total)
    }

    /// Evaluates `(T_t^n x)` at a cell, given the coordinates of `x`.
    pub fn image_symbol(&self, t: Tref, n: i64, cell: Cell, x: impl Fn(Cell) -> Symbol) -> Result<Symbol> {
        let Tref::Index(t) = t else { return Ok(x(cell)) };
        let spec = self.transform(t)?;
        let (comp, i) = cell;
        let j = i + n * spec.shifts[comp];
        let s = x((comp, j));
        Ok(match &spec.conjugators[comp] {
            Some(cj) => cj.at(i).apply_inverse(cj.at(j).apply(s)),
            None => s,
        })
    }

    /// Cells of `x` read when evaluating `T_t^n x` on `c`'s cells.
    pub fn source_cells(&self, t: Tref, n: i64, c: &ConstraintSet) -> Result<Vec<Cell>> {
        let shifts = match t {
            Tref::Identity => None,
            Tref::Index(t) => Some(&self.transform(t)?.shifts),
        };
        Ok(c.cells()
            .map(|(comp, i)| match shifts {
                Some(sh) => (comp, i + n * sh[comp]),
                None => (comp, i),
            })
            .collect())
    }
}

#[cfg(test)]
mod tests;
