use super::*;
use crate::analysis::{correlation_series, threshold_scan, window_average, ExactBackend};
use crate::par::install;
use crate::rational::{q, to_f64};
use crate::sym::{make_bernoulli, make_distinct_tuple_set, make_flip_pair, make_triple_product};
use crate::torus::{Angle, DEFAULT_MIN_DENOMINATOR};

fn flip_terms() -> (SymbolicSystem, Vec<(Tref, ConstraintSet)>) {
    let a = ConstraintSet::cylinder(&[((0, 0), 0)]);
    (make_flip_pair(), vec![(Tref::Identity, a.clone()), (Tref::Index(0), a.clone()), (Tref::Index(1), a)])
}

fn triple_terms() -> (SymbolicSystem, Vec<(Tref, ConstraintSet)>) {
    let a = make_distinct_tuple_set(&[0, 1, 2], 3).unwrap();
    (make_triple_product(), (0..3).map(|t| (Tref::Index(t), a.clone())).collect())
}

fn rotations() -> RotationTuple {
    RotationTuple::new(vec![
        Angle::named("sqrt2-1", DEFAULT_MIN_DENOMINATOR).unwrap(),
        Angle::named("sqrt3-1", DEFAULT_MIN_DENOMINATOR).unwrap(),
    ])
    .unwrap()
}

fn rotation_terms() -> Vec<(Tref, ArcSet)> {
    let a = ArcSet::parse("0..1/2").unwrap();
    vec![(Tref::Identity, a.clone()), (Tref::Index(0), a.clone()), (Tref::Index(1), a)]
}

/// Single-seed check at four standard errors; coverage at the nominal
/// level is tested separately over many seeds.
fn close(est: &McEstimate, exact: f64) -> bool {
    (est.estimate - exact).abs() <= 4.0 / Z95 * est.half_width
}

#[test]
fn config_validation() {
    assert!(McConfig::new(1, 99).is_err());
    let cfg = McConfig::new(1, 100).unwrap();
    assert_eq!(cfg.estimator, Estimator::Plain);
    let (sys, _) = flip_terms();
    let bad = vec![(Tref::Index(7), ConstraintSet::full())];
    assert!(mc_correlation(&sys, &bad, 1, &cfg).is_err());
    assert!(mc_correlation(&rotations(), &[(Tref::Index(2), ArcSet::full())], 1, &cfg).is_err());
    assert!(mc_window_average(&rotations(), &rotation_terms(), 5, 5, &cfg).is_err());
}

#[test]
fn uniform_streams_are_keyed_and_mirrored() {
    let a: Vec<f64> = (0..4)
        .map({
            let mut u = Uniforms::keyed(9, 3, 17, false);
            move |_| u.next()
        })
        .collect();
    let mut again = Uniforms::keyed(9, 3, 17, false);
    let mut twin = Uniforms::keyed(9, 3, 17, true);
    for v in &a {
        assert_eq!(again.next(), *v);
        assert_eq!(twin.next(), 1.0 - v);
    }
    assert_ne!(Uniforms::keyed(9, 4, 17, false).next(), a[0]);
    assert_ne!(Uniforms::keyed(9, 3, 18, false).next(), a[0]);
}

#[test]
fn flip_triple_intersection_is_never_hit() {
    let (sys, terms) = flip_terms();
    let est = mc_correlation(&sys, &terms, 5, &McConfig::new(11, 100_000).unwrap()).unwrap();
    assert_eq!(est.estimate, 0.0);
    assert_eq!(est.half_width, 0.0);
    assert!(est.covers(0.0));
}

#[test]
fn flip_pair_intersection_is_a_quarter() {
    let (sys, terms) = flip_terms();
    let pair = &terms[..2];
    let est = mc_correlation(&sys, pair, 5, &McConfig::new(12, 20_000).unwrap()).unwrap();
    assert!(close(&est, 0.25), "{est:?}");
}

#[test]
fn triple_product_value() {
    let (sys, terms) = triple_terms();
    let est = mc_correlation(&sys, &terms, 3, &McConfig::new(5, 100_000).unwrap()).unwrap();
    assert!(close(&est, 2.0 / 243.0), "{est:?}");
}

#[test]
fn rotation_pair_matches_exact_arcs() {
    let r = rotations();
    let terms = rotation_terms();
    let exact = to_f64(&r.correlation(&terms, 7).unwrap());
    for estimator in [Estimator::Plain, Estimator::Antithetic] {
        let cfg = McConfig::new(3, 50_000).unwrap().with_estimator(estimator);
        let est = mc_correlation(&r, &terms, 7, &cfg).unwrap();
        assert!(close(&est, exact), "{estimator:?}: {est:?} vs {exact}");
    }
}

#[test]
fn biased_symbols_follow_weights() {
    let sys = make_bernoulli(3, vec![q(1, 6), q(1, 3), q(1, 2)]).unwrap();
    let a = ConstraintSet::cylinder(&[((0, 0), 2), ((0, 1), 1)]);
    let terms = vec![(Tref::Identity, a.clone()), (Tref::Index(0), a)];
    for n in [1, 2, 3] {
        let exact = to_f64(&sys.correlation(&terms, n).unwrap());
        let est = mc_correlation(&sys, &terms, n, &McConfig::new(n as u64, 40_000).unwrap()).unwrap();
        assert!(close(&est, exact), "n={n}: {est:?} vs {exact}");
    }
}

#[test]
fn coverage_over_seeded_trials() {
    let (sys, terms) = flip_terms();
    let covered = (0..1000u64)
        .filter(|&seed| {
            mc_correlation(&sys, &terms[..2], 5, &McConfig::new(seed, 2_000).unwrap()).unwrap().covers(0.25)
        })
        .count();
    assert!(covered >= 930, "{covered}/1000");

    let r = rotations();
    let rt = rotation_terms();
    let exact = to_f64(&r.correlation(&rt, 7).unwrap());
    let covered = (0..1000u64)
        .filter(|&seed| mc_correlation(&r, &rt, 7, &McConfig::new(seed, 2_000).unwrap()).unwrap().covers(exact))
        .count();
    assert!(covered >= 930, "{covered}/1000");
}

#[test]
fn results_do_not_depend_on_scheduling() {
    let (sys, terms) = triple_terms();
    let cfg = McConfig::new(77, 20_000).unwrap().with_estimator(Estimator::Antithetic);
    let seq = mc_correlation_with(Execution::Sequential, &sys, &terms, 4, &cfg).unwrap();
    let par = mc_correlation_with(Execution::Parallel, &sys, &terms, 4, &cfg).unwrap();
    assert_eq!(seq, par);
    let one = install(Some(1), || mc_window_average(&rotations(), &rotation_terms(), 0, 300, &cfg).unwrap());
    let four = install(Some(4), || mc_window_average(&rotations(), &rotation_terms(), 0, 300, &cfg).unwrap());
    assert_eq!(one.estimate.to_bits(), four.estimate.to_bits());
    assert_eq!(one.half_width.to_bits(), four.half_width.to_bits());
}

#[test]
fn burn_in_shifts_the_stream() {
    let (sys, terms) = triple_terms();
    let cfg = McConfig::new(1, 1000).unwrap();
    let a = mc_correlation(&sys, &terms[..1], 2, &cfg).unwrap();
    let b = mc_correlation(&sys, &terms[..1], 2, &cfg.with_burn_in(500)).unwrap();
    assert_ne!(a.estimate, b.estimate);
}

#[test]
fn window_average_of_constant_series() {
    let (sys, terms) = triple_terms();
    let est = mc_window_average(&sys, &terms, 1, 201, &McConfig::new(8, 60_000).unwrap()).unwrap();
    assert!(close(&est, 2.0 / 243.0), "{est:?}");
}

#[test]
fn window_average_of_rotations_matches_exact_average() {
    let r = rotations();
    let terms = rotation_terms();
    let series = correlation_series(&r, &terms, 0..2000, &Default::default()).unwrap();
    let exact = to_f64(&window_average(&series, 0, 2000).unwrap().value);
    let est = mc_window_average(&r, &terms, 0, 2000, &McConfig::new(4, 100_000).unwrap()).unwrap();
    assert!(close(&est, exact), "{est:?} vs {exact}");
    assert!((est.estimate - 0.125).abs() < 0.01);
}

#[test]
fn window_average_of_flip_excludes_an_eighth() {
    let (sys, terms) = flip_terms();
    let est = mc_window_average(&sys, &terms, 1, 2001, &McConfig::new(6, 100_000).unwrap()).unwrap();
    assert!(!est.covers(0.125));
    assert_eq!(est.estimate, 0.0);
}

#[test]
fn mc_series_uses_lower_bounds_in_scans() {
    let (sys, terms) = triple_terms();
    let labels = SeriesLabels { system: "triple".into(), sets: vec!["distinct".into()] };
    let s = mc_correlation_series(&sys, &terms, 1..21, &McConfig::new(2, 2_000).unwrap(), &labels).unwrap();
    assert_eq!(s.meta.seed, Some(2));
    assert_eq!(s.meta.samples, Some(2_000));
    assert!(s.meta.backend.starts_with("mc-symbolic"));
    assert!(!s.is_exact());
    // An estimate near 2/243 cannot clear 1/2 with its lower bound.
    assert!(threshold_scan(&s, &q(1, 2)).hits.is_empty());
    let again = mc_correlation_series(&sys, &terms, 1..21, &McConfig::new(2, 2_000).unwrap(), &labels).unwrap();
    assert_eq!(s, again);
}
