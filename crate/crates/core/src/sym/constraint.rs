use std::collections::{BTreeSet, HashMap};

use super::{Cell, Symbol};
use crate::error::{Error, Result};

/// A relation over an ordered list of distinct cells.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    cells: Vec<Cell>,
    allowed: BTreeSet<Vec<Symbol>>,
}

impl Atom {
    pub fn new(cells: Vec<Cell>, allowed: BTreeSet<Vec<Symbol>>) -> Result<Self> {
        let distinct: BTreeSet<_> = cells.iter().collect();
        if distinct.len() != cells.len() {
            return Err(Error::InvalidSet(format!("repeated cell in atom {cells:?}")));
        }
        if let Some(t) = allowed.iter().find(|t| t.len() != cells.len()) {
            return Err(Error::InvalidSet(format!("tuple {t:?} does not match {} cells", cells.len())));
        }
        Ok(Self { cells, allowed })
    }

    pub(crate) fn from_parts(cells: Vec<Cell>, allowed: BTreeSet<Vec<Symbol>>) -> Self {
        Self { cells, allowed }
    }

    /// Single-cell atom `x_cell ∈ symbols`.
    pub fn cell_in(cell: Cell, symbols: impl IntoIterator<Item = Symbol>) -> Self {
        Self { cells: vec![cell], allowed: symbols.into_iter().map(|s| vec![s]).collect() }
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn allowed(&self) -> &BTreeSet<Vec<Symbol>> {
        &self.allowed
    }

    pub fn contains(&self, x: impl Fn(Cell) -> Symbol) -> bool {
        let tuple: Vec<Symbol> = self.cells.iter().map(|&c| x(c)).collect();
        self.allowed.contains(&tuple)
    }

    fn sorted(self) -> Self {
        if self.cells.windows(2).all(|w| w[0] < w[1]) {
            return self;
        }
        let mut order: Vec<usize> = (0..self.cells.len()).collect();
        order.sort_by_key(|&i| self.cells[i]);
        let cells = order.iter().map(|&i| self.cells[i]).collect();
        let allowed = self.allowed.iter().map(|t| order.iter().map(|&i| t[i]).collect()).collect();
        Self { cells, allowed }
    }

    /// Natural join on shared cells.
    fn join(&self, other: &Atom) -> Atom {
        let mut cells: Vec<Cell> = self.cells.clone();
        let mut other_pos_new = Vec::new();
        let mut shared = Vec::new();
        for (j, c) in other.cells.iter().enumerate() {
            match self.cells.iter().position(|d| d == c) {
                Some(i) => shared.push((i, j)),
                None => {
                    other_pos_new.push(j);
                    cells.push(*c);
                }
            }
        }
        let mut index: HashMap<Vec<Symbol>, Vec<&Vec<Symbol>>> = HashMap::new();
        for t in &other.allowed {
            let key: Vec<Symbol> = shared.iter().map(|&(_, j)| t[j]).collect();
            index.entry(key).or_default().push(t);
        }
        let mut allowed = BTreeSet::new();
        for r in &self.allowed {
            let key: Vec<Symbol> = shared.iter().map(|&(i, _)| r[i]).collect();
            if let Some(matches) = index.get(&key) {
                for s in matches {
                    let mut t = r.clone();
                    t.extend(other_pos_new.iter().map(|&j| s[j]));
                    allowed.insert(t);
                }
            }
        }
        Atom { cells, allowed }.sorted()
    }
}

/// A finite intersection of relational cylinder constraints.
///
/// No atoms means the whole space; an atom with no allowed tuple means the
/// empty set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConstraintSet {
    atoms: Vec<Atom>,
    canonical: bool,
}

impl ConstraintSet {
    pub fn full() -> Self {
        Self { atoms: Vec::new(), canonical: true }
    }

    pub fn empty() -> Self {
        Self { atoms: vec![Atom { cells: Vec::new(), allowed: BTreeSet::new() }], canonical: true }
    }

    pub fn new(atoms: Vec<Atom>) -> Self {
        Self { atoms, canonical: false }.canonicalize()
    }

    /// Cylinder fixing each listed cell to one symbol.
    pub fn cylinder(fixed: &[(Cell, Symbol)]) -> Self {
        Self::new(fixed.iter().map(|&(c, s)| Atom::cell_in(c, [s])).collect())
    }

    pub(crate) fn from_atoms_unchecked(mut atoms: Vec<Atom>, canonical: bool) -> Self {
        if canonical {
            atoms.sort();
        }
        Self { atoms, canonical }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    pub fn is_empty_set(&self) -> bool {
        self.atoms.iter().any(|a| a.allowed.is_empty())
    }

    pub fn is_full(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.atoms.iter().flat_map(|a| a.cells.iter().copied())
    }

    pub fn contains(&self, x: impl Fn(Cell) -> Symbol) -> bool {
        self.atoms.iter().all(|a| a.contains(&x))
    }

    /// Sorts cells, joins atoms that share cells and orders atoms.
    pub fn canonicalize(self) -> Self {
        if self.canonical {
            return self;
        }
        if self.is_empty_set() {
            return Self::empty();
        }
        let atoms: Vec<Atom> = self.atoms.into_iter().filter(|a| !a.cells.is_empty()).map(Atom::sorted).collect();

        // Union-find over atoms linked by shared cells.
        let mut parent: Vec<usize> = (0..atoms.len()).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        let mut owner: HashMap<Cell, usize> = HashMap::new();
        for (i, a) in atoms.iter().enumerate() {
            for c in &a.cells {
                if let Some(&j) = owner.get(c) {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    parent[ri] = rj;
                } else {
                    owner.insert(*c, i);
                }
            }
        }
        let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
        for i in 0..atoms.len() {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        let mut out = Vec::with_capacity(groups.len());
        let mut roots: Vec<_> = groups.into_iter().collect();
        roots.sort();
        for (_, members) in roots {
            let mut joined = atoms[members[0]].clone();
            // Join in an order that keeps each step connected to the result.
            let mut pending: Vec<usize> = members[1..].to_vec();
            while !pending.is_empty() {
                let pos =
                    pending.iter().position(|&m| atoms[m].cells.iter().any(|c| joined.cells.contains(c))).unwrap_or(0);
                let m = pending.remove(pos);
                joined = joined.join(&atoms[m]);
                if joined.allowed.is_empty() {
                    return Self::empty();
                }
            }
            out.push(joined);
        }
        out.sort();
        Self { atoms: out, canonical: true }
    }
}

/// Intersection of constraint sets, returned in canonical form.
pub fn intersect<'a>(sets: impl IntoIterator<Item = &'a ConstraintSet>) -> ConstraintSet {
    let atoms = sets.into_iter().flat_map(|s| s.atoms.iter().cloned()).collect();
    ConstraintSet { atoms, canonical: false }.canonicalize()
}

impl ConstraintSet {
    pub fn intersect<'a>(sets: impl IntoIterator<Item = &'a ConstraintSet>) -> ConstraintSet {
        intersect(sets)
    }
}
