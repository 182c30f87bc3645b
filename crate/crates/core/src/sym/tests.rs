use std::collections::{BTreeMap, BTreeSet, HashMap};

use proptest::prelude::*;

use super::*;
use crate::rational::{int, q};

/// Brute force: enumerate every assignment of the referenced cells.
fn brute_measure(system: &SymbolicSystem, set: &ConstraintSet) -> Rational {
    let cells: Vec<Cell> = set.cells().collect::<BTreeSet<_>>().into_iter().collect();
    assert!(cells.len() <= 12, "oracle limited to 12 cells");
    let sizes: Vec<usize> = cells.iter().map(|&(c, _)| system.components()[c].alphabet).collect();
    let mut digits = vec![0usize; cells.len()];
    let mut total = Rational::zero();
    loop {
        let point: HashMap<Cell, Symbol> = cells.iter().zip(&digits).map(|(&c, &d)| (c, d as Symbol)).collect();
        if set.contains(|c| point[&c]) {
            let mut w = Rational::one();
            for (&(comp, _), &d) in cells.iter().zip(&digits) {
                w *= &system.components()[comp].weights[d];
            }
            total += w;
        }
        let mut i = 0;
        loop {
            if i == digits.len() {
                return total;
            }
            digits[i] += 1;
            if digits[i] < sizes[i] {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

fn skewed_system() -> SymbolicSystem {
    let cycle = Permutation::new(vec![1, 2, 0]).unwrap();
    assert!(!cycle.is_involution());
    let conj = Conjugator {
        default: cycle,
        exceptions: BTreeMap::from([(0, Permutation::identity(3)), (2, Permutation::identity(3))]),
    };
    let c0 = Component::uniform(3).unwrap();
    let c1 = Component::new(2, vec![q(1, 3), q(2, 3)]).unwrap();
    SymbolicSystem::new(
        "skewed",
        vec![c0, c1],
        vec![
            TransformSpec { shifts: vec![1, -2], conjugators: vec![Some(conj), None] },
            TransformSpec::shift(vec![0, 1]),
        ],
    )
    .unwrap()
}

fn x0_is(s: Symbol) -> ConstraintSet {
    ConstraintSet::cylinder(&[((0, 0), s)])
}

#[test]
fn flip_pullback_flips_the_symbol() {
    let sys = make_flip_pair();
    let pulled = sys.pullback(1, 3, &x0_is(0)).unwrap();
    assert_eq!(pulled, ConstraintSet::cylinder(&[((0, 3), 1)]));
    // The plain shift does not flip.
    assert_eq!(sys.pullback(0, 3, &x0_is(0)).unwrap(), ConstraintSet::cylinder(&[((0, 3), 0)]));
}

#[test]
fn pullback_by_zero_is_identity() {
    let sys = make_triple_product();
    let a = make_distinct_tuple_set(&[0, 1, 2], 3).unwrap();
    for t in 0..3 {
        assert_eq!(sys.pullback(t, 0, &a).unwrap(), a);
    }
}

#[test]
fn triple_pullback_matches_direct_application() {
    let sys = make_triple_product();
    let a = make_distinct_tuple_set(&[0, 1, 2], 3).unwrap();
    let pulled = sys.pullback(0, 2, &a).unwrap();
    assert_eq!(pulled.atoms().len(), 1);
    assert_eq!(pulled.atoms()[0].cells(), &[(0, 0), (1, 2), (2, 2)]);
    assert_eq!(pulled.atoms()[0].allowed().len(), 6);

    // Enumerate 3^6 assignments of the cells {(c,0),(c,2)} and apply T_0² by hand.
    let cells = [(0, 0), (1, 0), (2, 0), (0, 2), (1, 2), (2, 2)];
    for code in 0..729u32 {
        let mut x = HashMap::new();
        let mut rest = code;
        for &c in &cells {
            x.insert(c, (rest % 3) as Symbol);
            rest /= 3;
        }
        // T_0 = id × S × S: (T_0² x) at (c, 0) is x at (c, 2·e_c).
        let shifts = [0, 1, 1];
        let image = |(c, i): Cell| x[&(c, i + 2 * shifts[c])];
        assert_eq!(pulled.contains(|c| x[&c]), a.contains(image));
    }
}

#[test]
fn unknown_transform_and_horizon_errors() {
    let sys = make_flip_pair();
    assert!(matches!(sys.pullback(5, 1, &x0_is(0)), Err(Error::UnknownTransform { index: 5, count: 2 })));
    let small = make_flip_pair().with_horizon(100);
    assert!(small.pullback(0, 100, &x0_is(0)).is_ok());
    assert!(matches!(small.pullback(0, 101, &x0_is(0)), Err(Error::HorizonExceeded { .. })));
}

#[test]
fn flip_triple_intersection_is_empty() {
    let n = 7;
    let c = ConstraintSet::intersect([
        &x0_is(0),
        &ConstraintSet::cylinder(&[((0, n), 0)]),
        &ConstraintSet::cylinder(&[((0, n), 1)]),
    ]);
    assert!(c.is_empty_set());
    assert_eq!(c, ConstraintSet::empty());
    assert_eq!(make_flip_pair().exact_measure(&c).unwrap(), int(0));
}

#[test]
fn intersect_with_full_space_is_identity() {
    let a = make_distinct_tuple_set(&[0, 1, 2], 3).unwrap();
    assert_eq!(ConstraintSet::intersect([&a, &ConstraintSet::full()]), a);
}

#[test]
fn triple_pullbacks_join_into_one_six_cell_atom() {
    let sys = make_triple_product();
    let a = make_distinct_tuple_set(&[0, 1, 2], 3).unwrap();
    for n in [1, 2, 17, -4] {
        let parts: Vec<_> = (0..3).map(|t| sys.pullback(t, n, &a).unwrap()).collect();
        let joined = ConstraintSet::intersect(&parts);
        assert_eq!(joined.atoms().len(), 1);
        let atom = &joined.atoms()[0];
        assert_eq!(atom.cells().len(), 6);
        assert_eq!(atom.allowed().len(), 6);
        // x_0 = x_n, y_0 = y_n, z_0 = z_n with (x_0, y_0, z_0) distinct.
        for t in atom.allowed() {
            let at = |cell: Cell| t[atom.cells().iter().position(|&c| c == cell).unwrap()];
            for c in 0..3 {
                assert_eq!(at((c, 0)), at((c, n)));
            }
        }
        assert_eq!(sys.exact_measure(&joined).unwrap(), q(2, 243));
    }
}

#[test]
fn exact_measures_of_named_sets() {
    let coin = make_bernoulli(2, vec![q(1, 2), q(1, 2)]).unwrap();
    assert_eq!(coin.exact_measure(&x0_is(0)).unwrap(), q(1, 2));
    assert_eq!(coin.exact_measure(&ConstraintSet::full()).unwrap(), int(1));
    let sys = make_triple_product();
    let a = make_distinct_tuple_set(&[0, 1, 2], 3).unwrap();
    assert_eq!(sys.exact_measure(&a).unwrap(), q(2, 9));
}

#[test]
fn cell_limit_is_a_typed_error() {
    let sys = make_flip_pair().with_cell_limit(3);
    let wide = ConstraintSet::new(vec![Atom::new(
        (0..4).map(|i| (0, i)).collect(),
        BTreeSet::from([vec![0, 0, 0, 0], vec![1, 1, 1, 1]]),
    )
    .unwrap()]);
    assert_eq!(sys.exact_measure(&wide), Err(Error::CellLimit { cells: 4, limit: 3 }));
}

#[test]
fn builders_match_the_constructions() {
    let flip = make_flip_pair();
    assert_eq!(flip.transforms().len(), 2);
    assert!(flip.transforms()[0].conjugators[0].is_none());
    let psi = flip.transforms()[1].conjugators[0].as_ref().unwrap();
    assert_eq!(psi.at(0).apply(0), 0);
    assert_eq!(psi.at(5).apply(0), 1);
    assert!(psi.default.is_involution());

    let triple = make_triple_product();
    let shifts: Vec<_> = triple.transforms().iter().map(|t| t.shifts.clone()).collect();
    assert_eq!(shifts, vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]);
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(matches!(make_bernoulli(2, vec![q(1, 2), q(1, 3)]), Err(Error::InvalidWeights(_))));
    assert!(matches!(make_bernoulli(2, vec![q(3, 2), q(-1, 2)]), Err(Error::InvalidWeights(_))));
    assert!(matches!(Component::uniform(1), Err(Error::InvalidSystem(_))));
    assert!(Permutation::new(vec![0, 0]).is_err());
    // A swap on a biased coin is not measure preserving.
    let biased = Component::new(2, vec![q(1, 3), q(2, 3)]).unwrap();
    let swap = Conjugator { default: Permutation::new(vec![1, 0]).unwrap(), exceptions: BTreeMap::new() };
    let spec = TransformSpec { shifts: vec![1], conjugators: vec![Some(swap)] };
    assert!(SymbolicSystem::new("bad", vec![biased], vec![spec]).is_err());
    assert!(Atom::new(vec![(0, 1), (0, 1)], BTreeSet::new()).is_err());
}

#[test]
fn flip_identity_up_to_1000() {
    let sys = make_flip_pair();
    let a = x0_is(0);
    for n in 1..=1000 {
        let s = sys.pullback(0, n, &a).unwrap();
        let t = sys.pullback(1, n, &a).unwrap();
        assert_eq!(sys.exact_measure(&ConstraintSet::intersect([&a, &s, &t])).unwrap(), int(0));
        assert_eq!(sys.exact_measure(&ConstraintSet::intersect([&a, &s])).unwrap(), q(1, 4));
    }
}

#[test]
fn document_round_trip() {
    let sys = skewed_system();
    let doc = io::SystemDocument::from_system(&sys);
    let back = io::SystemDocument::parse(&doc.to_json()).unwrap();
    assert_eq!(back.system().unwrap(), sys);

    let text = r#"{"components":[{"alphabet":3,"weights":["1/3","1/3","1/3"]},
        {"alphabet":3,"weights":["1/3","1/3","1/3"]},{"alphabet":3,"weights":["1/3","1/3","1/3"]}],
        "transforms":[{"shifts":[0,1,1]},{"shifts":[1,0,1]},{"shifts":[1,1,0]}],
        "sets":{"A":{"atoms":[{"cells":[[0,0],[1,0],[2,0]],
          "allowed":[[0,1,2],[0,2,1],[1,0,2],[1,2,0],[2,0,1],[2,1,0]]}]}}}"#;
    let doc = io::SystemDocument::parse(text).unwrap();
    let sys = doc.system().unwrap();
    let a = doc.set("A", &sys).unwrap();
    assert_eq!(a, make_distinct_tuple_set(&[0, 1, 2], 3).unwrap());
    assert_eq!(sys.exact_measure(&a).unwrap(), q(2, 9));

    let err = io::SystemDocument::parse("{\"components\": [}").unwrap_err();
    assert!(err.to_string().contains("line 1"));
}

fn arb_set(components: Vec<usize>) -> impl Strategy<Value = ConstraintSet> {
    let ncomp = components.len();
    let atom = prop::collection::vec((0..ncomp, -3i64..4), 1..3).prop_flat_map(move |cells| {
        let cells: Vec<Cell> = cells.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let sizes: Vec<usize> = cells.iter().map(|&(c, _)| components[c]).collect();
        let total: usize = sizes.iter().product();
        prop::collection::vec(any::<bool>(), total).prop_map(move |mask| {
            let mut allowed = BTreeSet::new();
            for (code, keep) in mask.iter().enumerate() {
                if *keep {
                    let mut rest = code;
                    let t = sizes
                        .iter()
                        .map(|&s| {
                            let d = rest % s;
                            rest /= s;
                            d as Symbol
                        })
                        .collect();
                    allowed.insert(t);
                }
            }
            Atom::new(cells.clone(), allowed).unwrap()
        })
    });
    prop::collection::vec(atom, 1..4).prop_map(ConstraintSet::new)
}

fn systems() -> Vec<SymbolicSystem> {
    vec![make_flip_pair(), make_triple_product(), skewed_system()]
}

fn arb_case() -> impl Strategy<Value = (usize, ConstraintSet, ConstraintSet)> {
    (0..3usize).prop_flat_map(|k| {
        let sizes: Vec<usize> = systems()[k].components().iter().map(|c| c.alphabet).collect();
        (Just(k), arb_set(sizes.clone()), arb_set(sizes))
    })
}

proptest! {
    #[test]
    fn pullback_preserves_measure((k, c, _) in arb_case(), n in 0i64..=50, t in 0usize..3) {
        let sys = &systems()[k];
        let t = t % sys.transforms().len();
        let pulled = sys.pullback(t, n, &c).unwrap();
        prop_assert_eq!(sys.exact_measure(&pulled).unwrap(), sys.exact_measure(&c).unwrap());
    }

    #[test]
    fn pullback_composes((k, c, _) in arb_case(), m in -20i64..20, n in -20i64..20, t in 0usize..3) {
        let sys = &systems()[k];
        let t = t % sys.transforms().len();
        let direct = sys.pullback(t, m + n, &c).unwrap();
        let stepped = sys.pullback(t, m, &sys.pullback(t, n, &c).unwrap()).unwrap();
        prop_assert_eq!(direct, stepped);
    }

    #[test]
    fn intersection_is_monotone((k, c1, c2) in arb_case()) {
        let sys = &systems()[k];
        let both = sys.exact_measure(&ConstraintSet::intersect([&c1, &c2])).unwrap();
        let m1 = sys.exact_measure(&c1).unwrap();
        let m2 = sys.exact_measure(&c2).unwrap();
        prop_assert!(both <= m1 && both <= m2);
        prop_assert!(check_probability(&both));
    }

    #[test]
    fn agrees_with_enumeration((k, c1, c2) in arb_case(), n in 0i64..3, t in 0usize..3) {
        let sys = &systems()[k];
        let t = t % sys.transforms().len();
        let set = ConstraintSet::intersect([&c1, &sys.pullback(t, n, &c2).unwrap()]);
        prop_assume!(set.cells().collect::<BTreeSet<_>>().len() <= 12);
        prop_assert_eq!(sys.exact_measure(&set).unwrap(), brute_measure(sys, &set));
    }
}

fn check_probability(value: &Rational) -> bool {
    !value.is_negative() && *value <= Rational::one()
}
