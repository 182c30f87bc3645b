use std::collections::BTreeSet;

use reclab::rational::{self, Rational};
use reclab::sym::io::SystemDocument;
use reclab::sym::{
    make_distinct_tuple_set, make_flip_pair, make_triple_product, ConstraintSet, Symbol, SymbolicSystem, Tref,
};
use reclab::torus::{parse_angle_list, ArcSet, RotationTuple};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// A resolved `--system` reference.
pub enum Loaded {
    Symbolic { system: SymbolicSystem, document: Option<SystemDocument> },
    Rotation(RotationTuple),
}

pub struct Resolved {
    pub loaded: Loaded,
    pub label: String,
    /// SHA-256 of the canonical JSON description of the system.
    pub hash: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn resolve_system(reference: &str, min_den: i64) -> CliResult<Resolved> {
    let name = reference.strip_prefix("builtin:").unwrap_or(reference);
    let loaded = match name {
        "flip" => Loaded::Symbolic { system: make_flip_pair(), document: None },
        "triple" => Loaded::Symbolic { system: make_triple_product(), document: None },
        _ => {
            if let Some(angles) = name.strip_prefix("rot:") {
                warn_decimals(angles);
                Loaded::Rotation(RotationTuple::new(parse_angle_list(angles, min_den)?)?)
            } else {
                let text = std::fs::read_to_string(reference)
                    .map_err(|source| CliError::Io { path: reference.into(), source })?;
                let document = SystemDocument::parse(&text)?;
                Loaded::Symbolic { system: document.system()?, document: Some(document) }
            }
        }
    };
    let canonical = match &loaded {
        Loaded::Symbolic { system, .. } => SystemDocument::from_system(system).to_json(),
        Loaded::Rotation(r) => rotation_canonical(r),
    };
    Ok(Resolved { hash: sha256_hex(canonical.as_bytes()), label: reference.to_string(), loaded })
}

pub fn rotation_canonical(r: &RotationTuple) -> String {
    let angles: Vec<serde_json::Value> = r
        .angles()
        .iter()
        .map(|a| {
            serde_json::json!({
                "label": a.label,
                "surrogate": rational::format(&a.surrogate),
                "drift": rational::format(&a.drift),
            })
        })
        .collect();
    serde_json::json!({ "rotation": angles }).to_string()
}

/// Parses a map list such as `id,0,1`.
pub fn parse_maps(text: &str) -> CliResult<Vec<Tref>> {
    text.split(',')
        .map(str::trim)
        .map(|t| match t {
            "id" | "identity" => Ok(Tref::Identity),
            _ => t
                .parse::<usize>()
                .map(Tref::Index)
                .map_err(|_| CliError::Usage(format!("bad map {t:?}; expected `id` or an index"))),
        })
        .collect()
}

/// Maps used when `--maps` is absent.
pub fn default_maps(resolved: &Resolved) -> Vec<Tref> {
    let name = resolved.label.strip_prefix("builtin:").unwrap_or(&resolved.label);
    match (&resolved.loaded, name) {
        (Loaded::Symbolic { system, .. }, "triple") => (0..system.transforms().len()).map(Tref::Index).collect(),
        (Loaded::Symbolic { system, .. }, _) => {
            std::iter::once(Tref::Identity).chain((0..system.transforms().len()).map(Tref::Index)).collect()
        }
        (Loaded::Rotation(r), _) => {
            std::iter::once(Tref::Identity).chain((0..r.dimension()).map(Tref::Index)).collect()
        }
    }
}

pub fn parse_rational(text: &str) -> CliResult<Rational> {
    let parsed = rational::parse(text)?;
    if parsed.from_decimal {
        eprintln!("warning: decimal input {:?} converted to exact {}", text.trim(), rational::format(&parsed.value));
    }
    Ok(parsed.value)
}

/// Warns about every decimal literal inside a compound spec such as an arc
/// list or angle list.
pub fn warn_decimals(text: &str) {
    let spaced = text.replace("..", " ");
    for token in spaced.split(|c: char| !(c.is_ascii_digit() || c == '.' || c == '/' || c == '-')) {
        if token.contains('.') && token.bytes().any(|b| b.is_ascii_digit()) {
            if let Ok(p) = rational::parse(token) {
                eprintln!("warning: decimal input {token:?} converted to exact {}", rational::format(&p.value));
            }
        }
    }
}

pub fn parse_arcs(text: &str) -> CliResult<ArcSet> {
    warn_decimals(text);
    Ok(ArcSet::parse(text)?)
}

/// Parses `x<i>` or `c<c>.x<i>` into a cell.
fn parse_cell(text: &str) -> CliResult<(usize, i64)> {
    let bad = || CliError::Usage(format!("bad cell {text:?}; expected x<i> or c<c>.x<i>"));
    let (comp, coord) = match text.split_once('.') {
        Some((c, x)) => (c.strip_prefix('c').ok_or_else(bad)?.parse::<usize>().map_err(|_| bad())?, x),
        None => (0, text),
    };
    let coord = coord.strip_prefix('x').ok_or_else(bad)?.parse::<i64>().map_err(|_| bad())?;
    Ok((comp, coord))
}

pub fn symbolic_set(
    spec: &str,
    system: &SymbolicSystem,
    document: Option<&SystemDocument>,
) -> CliResult<ConstraintSet> {
    let spec = spec.trim();
    if let Some(doc) = document {
        if doc.sets.contains_key(spec) {
            return Ok(doc.set(spec, system)?);
        }
    }
    let set = if spec == "distinct" {
        let components: Vec<usize> = (0..system.components().len()).collect();
        let alphabet = system.components()[0].alphabet;
        make_distinct_tuple_set(&components, alphabet)?
    } else {
        let mut fixed = Vec::new();
        for piece in spec.split(',').map(str::trim) {
            let (cell, symbol) = piece
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("bad set constraint {piece:?}; expected x<i>=<s>")))?;
            let symbol: Symbol =
                symbol.trim().parse().map_err(|_| CliError::Usage(format!("bad symbol in {piece:?}")))?;
            fixed.push((parse_cell(cell.trim())?, symbol));
        }
        ConstraintSet::cylinder(&fixed)
    };
    system.validate_set(&set)?;
    Ok(set)
}

/// Partition of one factor: `x0`/`c1.x2` cylinders, or `equal:k`/`cuts:…` arcs.
pub fn symbolic_partition(spec: &str, system: &SymbolicSystem) -> CliResult<Vec<ConstraintSet>> {
    let (comp, coord) = parse_cell(spec.trim())?;
    let component =
        system.components().get(comp).ok_or_else(|| CliError::Usage(format!("component {comp} does not exist")))?;
    Ok((0..component.alphabet as Symbol).map(|s| ConstraintSet::cylinder(&[((comp, coord), s)])).collect())
}

pub fn arc_partition(spec: &str) -> CliResult<Vec<ArcSet>> {
    let spec = spec.trim();
    let cuts: Vec<Rational> = if let Some(k) = spec.strip_prefix("equal:") {
        let k: i64 = k.parse().map_err(|_| CliError::Usage(format!("bad part count in {spec:?}")))?;
        if k < 1 {
            return Err(CliError::Usage("equal:k needs k >= 1".into()));
        }
        (0..k).map(|i| rational::q(i, k)).collect()
    } else if let Some(list) = spec.strip_prefix("cuts:") {
        list.split(',').map(parse_rational).collect::<CliResult<Vec<_>>>()?
    } else {
        return Err(CliError::Usage(format!("bad arc partition {spec:?}; expected equal:<k> or cuts:<a>,<b>,…")));
    };
    let distinct: BTreeSet<_> = cuts.iter().map(rational::frac).collect();
    let cuts: Vec<Rational> = distinct.into_iter().collect();
    if cuts.len() == 1 {
        return Ok(vec![ArcSet::full()]);
    }
    (0..cuts.len()).map(|i| Ok(ArcSet::interval(cuts[i].clone(), cuts[(i + 1) % cuts.len()].clone())?)).collect()
}

/// Parses an inclusive `a..b` range into a half-open one.
pub fn parse_inclusive(text: &str) -> CliResult<std::ops::Range<i64>> {
    let (a, b) = parse_pair(text)?;
    if b < a {
        return Err(CliError::Usage(format!("empty range {text:?}")));
    }
    Ok(a..b + 1)
}

/// Parses a half-open window `m..n`.
pub fn parse_window(text: &str) -> CliResult<(i64, i64)> {
    let (m, n) = parse_pair(text)?;
    if n <= m {
        return Err(CliError::Usage(format!("empty window {text:?}")));
    }
    Ok((m, n))
}

fn parse_pair(text: &str) -> CliResult<(i64, i64)> {
    let bad = || CliError::Usage(format!("bad range {text:?}; expected a..b"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use reclab::rational::q;

    #[test]
    fn ranges() {
        assert_eq!(parse_inclusive("1..100").unwrap(), 1..101);
        assert!(parse_inclusive("5..4").is_err());
        assert_eq!(parse_window("0..10").unwrap(), (0, 10));
        assert!(parse_window("3..3").is_err());
    }

    #[test]
    fn maps() {
        assert_eq!(parse_maps("id,0,2").unwrap(), vec![Tref::Identity, Tref::Index(0), Tref::Index(2)]);
        assert!(parse_maps("x").is_err());
    }

    #[test]
    fn cylinder_sets() {
        let flip = make_flip_pair();
        let a = symbolic_set("x0=0", &flip, None).unwrap();
        assert_eq!(a, ConstraintSet::cylinder(&[((0, 0), 0)]));
        let triple = make_triple_product();
        let b = symbolic_set("c2.x-1=1", &triple, None).unwrap();
        assert_eq!(b, ConstraintSet::cylinder(&[((2, -1), 1)]));
        assert!(symbolic_set("c9.x0=0", &triple, None).is_err());
        assert!(symbolic_set("y0=0", &triple, None).is_err());
    }

    #[test]
    fn partitions() {
        let p = arc_partition("equal:4").unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.iter().map(ArcSet::measure).sum::<Rational>(), q(1, 1));
        let c = arc_partition("cuts:1/3,0,2/3").unwrap();
        assert_eq!(c[0].measure(), q(1, 3));
        assert_eq!(arc_partition("equal:1").unwrap(), vec![ArcSet::full()]);
        let triple = make_triple_product();
        assert_eq!(symbolic_partition("c1.x3", &triple).unwrap().len(), 3);
    }

    #[test]
    fn hashes_are_stable() {
        let a = resolve_system("builtin:triple", 1000).unwrap();
        let b = resolve_system("triple", 1000).unwrap();
        assert_eq!(a.hash, b.hash);
        assert_eq!(a.hash.len(), 64);
        let r = resolve_system("rot:1/3,2/5", 1000).unwrap();
        assert_ne!(r.hash, a.hash);
    }
}
