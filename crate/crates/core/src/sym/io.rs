//! JSON documents describing symbolic systems and named sets.
//!
//! ```json
//! {"components":[{"alphabet":3,"weights":["1/3","1/3","1/3"]}],
//!  "transforms":[{"shifts":[1]}],
//!  "sets":{"A":{"atoms":[{"cells":[[0,0]],"allowed":[[0]]}]}}}
//! ```

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Atom, Component, Conjugator, ConstraintSet, Permutation, Symbol, SymbolicSystem, TransformSpec};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub components: Vec<ComponentDoc>,
    pub transforms: Vec<TransformDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sets: BTreeMap<String, SetDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    pub alphabet: usize,
    #[serde(with = "rational::serde_vec")]
    pub weights: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformDoc {
    pub shifts: Vec<i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conjugators: Vec<ConjugatorDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugatorDoc {
    pub component: usize,
    pub default: Vec<Symbol>,
    /// Coordinate → permutation, for the finitely many exceptional coordinates.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exceptions: Vec<ExceptionDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExceptionDoc {
    pub coordinate: i64,
    pub permutation: Vec<Symbol>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetDoc {
    pub atoms: Vec<AtomDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDoc {
    pub cells: Vec<(usize, i64)>,
    pub allowed: Vec<Vec<Symbol>>,
}

impl SystemDocument {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("{} at line {}, column {}", e, e.line(), e.column())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn system(&self) -> Result<SymbolicSystem> {
        let components = self
            .components
            .iter()
            .map(|c| Component::new(c.alphabet, c.weights.clone()))
            .collect::<Result<Vec<_>>>()?;
        let mut transforms = Vec::with_capacity(self.transforms.len());
        for t in &self.transforms {
            let mut spec = TransformSpec::shift(t.shifts.clone());
            for cj in &t.conjugators {
                if cj.component >= spec.conjugators.len() {
                    return Err(Error::InvalidSystem(format!("conjugator for undeclared component {}", cj.component)));
                }
                let mut exceptions = BTreeMap::new();
                for e in &cj.exceptions {
                    exceptions.insert(e.coordinate, Permutation::new(e.permutation.clone())?);
                }
                spec.conjugators[cj.component] =
                    Some(Conjugator { default: Permutation::new(cj.default.clone())?, exceptions });
            }
            transforms.push(spec);
        }
        SymbolicSystem::new(self.name.clone().unwrap_or_else(|| "custom".into()), components, transforms)
    }

    pub fn set(&self, name: &str, system: &SymbolicSystem) -> Result<ConstraintSet> {
        let doc = self.sets.get(name).ok_or_else(|| Error::InvalidSet(format!("no set named {name:?}")))?;
        let set = doc.to_set()?;
        system.validate_set(&set)?;
        Ok(set)
    }

    pub fn from_system(system: &SymbolicSystem) -> Self {
        let components = system
            .components()
            .iter()
            .map(|c| ComponentDoc { alphabet: c.alphabet, weights: c.weights.clone() })
            .collect();
        let transforms = system
            .transforms()
            .iter()
            .map(|t| TransformDoc {
                shifts: t.shifts.clone(),
                conjugators: t
                    .conjugators
                    .iter()
                    .enumerate()
                    .filter_map(|(c, cj)| {
                        cj.as_ref().map(|cj| ConjugatorDoc {
                            component: c,
                            default: cj.default.forward().to_vec(),
                            exceptions: cj
                                .exceptions
                                .iter()
                                .map(|(&coordinate, p)| ExceptionDoc { coordinate, permutation: p.forward().to_vec() })
                                .collect(),
                        })
                    })
                    .collect(),
            })
            .collect();
        Self { name: Some(system.name.clone()), components, transforms, sets: BTreeMap::new() }
    }
}

impl SetDoc {
    pub fn to_set(&self) -> Result<ConstraintSet> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom::new(a.cells.clone(), a.allowed.iter().cloned().collect::<BTreeSet<_>>()))
            .collect::<Result<Vec<_>>>()?;
        Ok(ConstraintSet::new(atoms))
    }

    pub fn from_set(set: &ConstraintSet) -> Self {
        Self {
            atoms: set
                .atoms()
                .iter()
                .map(|a| AtomDoc { cells: a.cells().to_vec(), allowed: a.allowed().iter().cloned().collect() })
                .collect(),
        }
    }
}
