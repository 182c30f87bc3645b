use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::rational::{q, Rational};
use crate::torus::{Angle, ArcSet, DEFAULT_MIN_DENOMINATOR};

fn arc(a: (i64, i64), b: (i64, i64)) -> ArcSet {
    ArcSet::interval(q(a.0, a.1), q(b.0, b.1)).unwrap()
}

fn quadrature(s: &ArcSet, m: i64, points: usize) -> Complex64 {
    let h = 1.0 / points as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..points {
        let x = (i as f64 + 0.5) * h;
        if s.contains_f64(x) {
            acc += Complex64::from_polar(h, -2.0 * PI * m as f64 * x);
        }
    }
    acc
}

#[test]
fn indicator_of_full_circle_is_constant() {
    let obs = fourier_indicator(&ArcSet::full(), 6).unwrap();
    assert_eq!(obs.coeffs.len(), 1);
    assert!((obs.coefficient(0, 0).re - 1.0).abs() < 1e-12);
    assert!(fourier_indicator(&ArcSet::empty(), 6).unwrap().coeffs.is_empty());
    assert!(fourier_indicator(&ArcSet::full(), 0).is_err());
}

#[test]
fn half_arc_coefficients_match_quadrature() {
    let s = arc((0, 1), (1, 2));
    let obs = fourier_indicator(&s, 7).unwrap();
    assert!((obs.coefficient(0, 0).re - 0.5).abs() < 1e-12);
    for m in -7..=7i64 {
        let c = obs.coefficient(m, 0);
        if m != 0 && m % 2 == 0 {
            assert!(c.norm() < 1e-12, "m={m}: {c}");
        }
        assert!((c - quadrature(&s, m, 200_000)).norm() < 1e-4, "m={m}");
    }
    assert!(obs.is_hermitian(1e-12));
}

#[test]
fn wrapping_arc_matches_quadrature() {
    let s = ArcSet::parse("5/7..1/5").unwrap();
    let obs = fourier_indicator(&s, 5).unwrap();
    for m in -5..=5 {
        assert!((obs.coefficient(m, 0) - quadrature(&s, m, 200_000)).norm() < 1e-4);
    }
}

#[test]
fn box_coefficients_factor() {
    let sx = arc((0, 1), (1, 3));
    let sy = arc((1, 4), (1, 2));
    let b = fourier_indicator_box(&sx, &sy, 3).unwrap();
    let fx = fourier_indicator(&sx, 3).unwrap();
    let fy = fourier_indicator(&sy, 3).unwrap();
    for m in -3..=3 {
        for l in -3..=3 {
            let want = fx.coefficient(m, 0) * fy.coefficient(l, 0);
            assert!((b.coefficient(m, l) - want).norm() < 1e-15);
        }
    }
    assert!((b.coefficient(0, 0).re - 1.0 / 12.0).abs() < 1e-12);
}

#[test]
fn koopman_trivial_cases() {
    let obs = fourier_indicator(&arc((1, 5), (2, 3)), 8).unwrap();
    let w = Angle::named("sqrt2-1", DEFAULT_MIN_DENOMINATOR).unwrap();
    assert_eq!(koopman_rotation(&w, 0, &obs), obs);
    let moved = koopman_rotation(&w, 12345, &obs);
    assert_eq!(moved.coefficient(0, 0), obs.coefficient(0, 0));

    let r = Angle::rational(q(5, 17));
    let back = koopman_rotation(&r, 17, &obs);
    for (k, c) in &obs.coeffs {
        assert!((back.coeffs[k] - c).norm() < 1e-15);
    }
    assert_eq!(koopman_phase_drift(&r, 17, 8), 0.0);
}

#[test]
fn koopman_matches_shifted_evaluation() {
    let obs = FourierObservable::cosines(BaseSpace::Circle, &[((1, 0), 1.0), ((3, 0), 0.5)]).unwrap();
    let r = Angle::rational(q(3, 11));
    let moved = koopman_rotation(&r, 4, &obs);
    for x in [0.0, 0.1, 0.37, 0.8] {
        let want = obs.evaluate(x + 12.0 / 11.0, 0.0);
        assert!((moved.evaluate(x, 0.0) - want).norm() < 1e-12);
    }
}

proptest! {
    #[test]
    fn koopman_is_unitary(n in -5000i64..5000, a in 0i64..40, b in 1i64..40) {
        let obs = fourier_indicator(&ArcSet::interval(q(a, 41), q((a + b) % 41, 41)).unwrap(), 16).unwrap();
        let w = Angle::named("sqrt3-1", DEFAULT_MIN_DENOMINATOR).unwrap();
        let moved = koopman_rotation(&w, n, &obs);
        prop_assert!((moved.l2_norm() - obs.l2_norm()).abs() < 1e-12);
    }

    #[test]
    fn koopman_composes(a in -300i64..300, b in -300i64..300) {
        let obs = fourier_indicator(&arc((0, 1), (2, 7)), 6).unwrap();
        let w = Angle::named("golden-1", DEFAULT_MIN_DENOMINATOR).unwrap();
        let two = koopman_rotation(&w, a, &koopman_rotation(&w, b, &obs));
        let one = koopman_rotation(&w, a + b, &obs);
        for (k, c) in &one.coeffs {
            prop_assert!((two.coeffs[k] - c).norm() < 1e-12);
        }
    }
}

#[test]
fn split_of_full_space() {
    let g = GridFunction::constant(256, 1.0);
    let s = jdlg_split_product(&g).unwrap();
    assert!(s.compact_part.values().iter().all(|&v| v == 1.0));
    assert!(s.wm_part.values().iter().all(|&v| v == 0.0));
    let l = s.indicator_checks.unwrap();
    assert_eq!(l.integral_af, q(1, 1));
    assert_eq!(l.measure_sq, q(1, 1));
}

#[test]
fn split_of_vertical_strip_is_all_compact() {
    let g = GridFunction::box_indicator(256, &arc((0, 1), (1, 2)), &ArcSet::full());
    let s = jdlg_split_product(&g).unwrap();
    assert_eq!(s.compact_part, g);
    assert!(s.wm_part.values().iter().all(|&v| v == 0.0));
    let l = s.indicator_checks.unwrap();
    assert_eq!(l.integral_af, q(1, 2));
    assert_eq!(l.measure_sq, q(1, 4));
}

#[test]
fn split_of_square() {
    let half = arc((0, 1), (1, 2));
    let g = GridFunction::box_indicator(512, &half, &half);
    let s = jdlg_split_product(&g).unwrap();
    assert!(s.compact_is_y_constant());
    assert_eq!(s.system_tag, SystemTag::RotationDoubling);
    for i in 0..512 {
        let want = if i < 256 { 0.5 } else { 0.0 };
        assert_eq!(s.compact_part.get(i, 0), want);
    }
    // Hand integration: ∫ 1_A f = (1/2)·(1/4), μ(A)² = (1/4)².
    let l = s.indicator_checks.unwrap();
    assert_eq!(l.integral_af, q(1, 8));
    assert_eq!(l.measure_sq, q(1, 16));
    assert!(l.integral_ok && l.bounds_ok && l.positivity_on_a);
    assert_eq!((l.min_f, l.max_f), (0.0, 0.5));
    assert!(s.inner_product.abs() < 1e-10);
}

#[test]
fn split_rejects_bad_grids_and_skips_non_indicators() {
    assert!(jdlg_split_product(&GridFunction::constant(128, 1.0)).is_err());
    assert!(jdlg_split_product(&GridFunction::constant(300, 1.0)).is_err());
    let g = GridFunction::from_fn(256, |x, y| (2.0 * PI * (x + 3.0 * y)).sin());
    assert!(jdlg_split_product(&g).unwrap().indicator_checks.is_none());
}

#[test]
fn rotation_split_keeps_everything() {
    let g = GridFunction::box_indicator(256, &arc((1, 8), (5, 8)), &arc((0, 1), (1, 3)));
    let s = jdlg_split_rotation(&g).unwrap();
    assert_eq!(s.compact_part, g);
    assert_eq!(s.system_tag, SystemTag::Rotation);
    assert!(s.indicator_checks.unwrap().integral_ok);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn split_is_orthogonal_and_exact(seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let vals: Vec<f64> = (0..256 * 256).map(|_| if rng.random::<f64>() < 0.3 { 1.0 } else { 0.0 }).collect();
        let g = GridFunction::new(256, vals).unwrap();
        let s = jdlg_split_product(&g).unwrap();
        prop_assert!(s.compact_is_y_constant());
        prop_assert!(s.inner_product.abs() < 1e-10);
        prop_assert!(s.residual_norm < 1e-12);
        let l = s.indicator_checks.unwrap();
        prop_assert!(l.integral_af >= l.measure_sq);
        prop_assert!(l.bounds_ok && l.positivity_on_a);
    }
}

#[test]
fn grid_csv_round_trip() {
    let g = GridFunction::from_fn(8, |x, y| x - 2.0 * y + 0.1);
    let mut buf = Vec::new();
    g.write_csv(&mut buf).unwrap();
    let back = GridFunction::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back, g);
    assert!(GridFunction::read_csv("1,2\n3\n".as_bytes()).is_err());
    assert!(GridFunction::read_csv("1,x\n3,4\n".as_bytes()).is_err());
}

#[test]
fn eigen_trivial_eigenvalue_returns_always() {
    let r = eigen_return_times(&[Angle::rational(q(0, 1))], 1.0, 0.3, 50).unwrap();
    assert_eq!(r.hits(), (1..=50).collect::<Vec<_>>().as_slice());
    assert!(eigen_return_times(&[], 1.0, 0.3, 50).is_err());
    assert!(eigen_return_times(&[Angle::rational(q(1, 2))], 1.0, 0.0, 50).is_err());
}

#[test]
fn eigen_order_three() {
    let r = eigen_return_times(&[Angle::rational(q(1, 3))], 1.0, 0.3, 1000).unwrap();
    assert!((r.tolerance - 0.1).abs() < 1e-15);
    assert_eq!(r.hits(), (1..=333).map(|k| 3 * k).collect::<Vec<_>>().as_slice());
    assert_eq!(r.max_gap(), 3);
}

proptest! {
    #[test]
    fn eigen_exact_order_gives_multiples(d in 2i64..40, k in 1i64..40, frac in 0.05f64..0.99) {
        prop_assume!(num_integer::gcd(k, d) == 1);
        let threshold = 2.0 * (PI / d as f64).sin();
        let tol = threshold * frac;
        let r = eigen_return_times(&[Angle::rational(q(k, d))], 1.0, 3.0 * tol, 500).unwrap();
        let want: Vec<i64> = (1..=500).filter(|n| n % d == 0).collect();
        prop_assert_eq!(r.hits(), want.as_slice());
    }

    #[test]
    fn eigen_hits_match_complex_powers(p in 1i64..50, qd in 51i64..97, tol in 0.05f64..1.0) {
        let theta = q(p, qd);
        let r = eigen_return_times(&[Angle::rational(theta)], 1.0, 3.0 * tol, 300).unwrap();
        let lambda = Complex64::from_polar(1.0, 2.0 * PI * p as f64 / qd as f64);
        let dists: Vec<f64> = (1..=300).map(|n| (lambda.powi(n) - 1.0).norm()).collect();
        prop_assume!(dists.iter().all(|d| (d - tol).abs() > 1e-9));
        let brute: Vec<i64> = (1..=300).filter(|&n| dists[n as usize - 1] < tol).collect();
        prop_assert_eq!(r.hits(), brute.as_slice());
    }
}

#[test]
fn eigen_independent_surrogates() {
    let angles = vec![
        Angle::named("sqrt2-1", DEFAULT_MIN_DENOMINATOR).unwrap(),
        Angle::named("sqrt3-1", DEFAULT_MIN_DENOMINATOR).unwrap(),
    ];
    let r = eigen_return_times(&angles, 1.0, 0.15, 10_000).unwrap();
    assert!(!r.hits().is_empty());
    assert!(r.max_gap() > 0);
    for &n in r.hits() {
        for w in &angles {
            assert!(return_distance(&w.surrogate, n) < 0.05);
        }
    }
}

fn brute_lhs(xs: &[Vec<f64>], w: usize, last: usize) -> f64 {
    (0..=last)
        .map(|m| {
            let mut s = vec![0.0; xs[0].len()];
            for x in &xs[m..m + w] {
                for (a, b) in s.iter_mut().zip(x) {
                    *a += b;
                }
            }
            s.iter().map(|v| (v / w as f64).powi(2)).sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn vdc_constant_sequence() {
    let xs = vec![vec![3.0, 4.0]; 64];
    let r = vdc_surrogate(&xs, 8).unwrap();
    assert!((r.lhs - 25.0).abs() < 1e-9);
    assert!((r.rhs - 25.0).abs() < 1e-9);
    assert!(r.holds);
    assert!(vdc_surrogate(&xs, 17).is_err());
    assert!(vdc_surrogate(&xs, 0).is_err());
}

#[test]
fn vdc_alternating_sequence() {
    let xs: Vec<Vec<f64>> = (0..200).map(|n| vec![if n % 2 == 0 { 1.0 } else { -1.0 }]).collect();
    let r = vdc_surrogate(&xs, 9).unwrap();
    assert_eq!(r.window, 95);
    assert!(r.lhs <= 1.0 / (95.0 * 95.0) + 1e-12);
    // Σ_{h=1}^{9} (−1)^h = −1, so the right side is −1/9.
    assert!((r.rhs + 1.0 / 9.0).abs() < 1e-12);
    assert!(!r.holds_strictly);
    assert!(r.holds);
    assert!((r.lhs - brute_lhs(&xs, r.window, 200 - 9 - 95)).abs() < 1e-12);
}

#[test]
fn vdc_characters_average_out() {
    let theta = (5f64).sqrt() - 2.0;
    let xs: Vec<Vec<f64>> = (0..4000)
        .map(|n| {
            let t = 2.0 * PI * theta * n as f64;
            vec![t.cos(), t.sin()]
        })
        .collect();
    let r = vdc_surrogate(&xs, 20).unwrap();
    // |Σ_{n<W} e(nθ)| ≤ 1/(2‖θ‖), so lhs ≤ (1/(2‖θ‖W))².
    let bound = (1.0 / (2.0 * theta * r.window as f64)).powi(2);
    assert!(r.lhs <= bound + 1e-12, "{} > {bound}", r.lhs);
    assert!((r.lhs - brute_lhs(&xs, r.window, 4000 - 20 - r.window)).abs() < 1e-9);
    assert!(r.holds);
}

#[test]
fn vdc_complex_vectors_match_real_embedding() {
    let theta = 0.3183;
    let real: Vec<Vec<f64>> = (0..400)
        .map(|n| {
            let t = 2.0 * PI * theta * n as f64;
            vec![t.cos(), t.sin()]
        })
        .collect();
    let complex: Vec<Vec<Complex64>> =
        (0..400).map(|n| vec![Complex64::from_polar(1.0, 2.0 * PI * theta * n as f64)]).collect();
    let a = vdc_surrogate(&real, 10).unwrap();
    let b = vdc_surrogate(&complex, 10).unwrap();
    assert!((a.lhs - b.lhs).abs() < 1e-12);
    assert!((a.rhs - b.rhs).abs() < 1e-12);
}

fn cos_y() -> FourierObservable {
    FourierObservable::cosines(BaseSpace::Torus2, &[((0, 1), 1.0)]).unwrap()
}

fn cos_x() -> FourierObservable {
    FourierObservable::cosines(BaseSpace::Torus2, &[((1, 0), 1.0)]).unwrap()
}

#[test]
fn grid_projection_matches_cell_averages() {
    let u = FourierObservable::cosines(BaseSpace::Torus2, &[((1, 2), 1.0), ((0, 3), 0.5), ((0, 0), 0.25)]).unwrap();
    let w = Angle::rational(q(2, 9));
    let terms = vec![(ProductMap::RotationDoubling(w.clone()), u.clone())];
    let res = 8usize;
    for n in [0i64, 1, 2, 5] {
        let got = grid_spectrum(&terms, n, res).unwrap().cell_values();
        let shift = 2.0 * n as f64 / 9.0;
        let pts = 64;
        for i in 0..res {
            for j in 0..res {
                let mut acc = Complex64::new(0.0, 0.0);
                for a in 0..pts {
                    for b in 0..pts {
                        let x = (i as f64 + (a as f64 + 0.5) / pts as f64) / res as f64;
                        let y = (j as f64 + (b as f64 + 0.5) / pts as f64) / res as f64;
                        acc += u.evaluate(x + shift, y * 2f64.powi(n as i32));
                    }
                }
                acc /= (pts * pts) as f64;
                assert!((got[i * res + j] - acc).norm() < 2e-3, "n={n} cell ({i},{j})");
            }
        }
    }
}

#[test]
fn wm_zero_observable() {
    let zero = FourierObservable::new(BaseSpace::Torus2, 1, BTreeMap::new()).unwrap();
    let r = wm_average_vanishing(&[(ProductMap::Doubling, zero)], 256, &[(0, 64), (10, 50)]).unwrap();
    assert!(r.windows.iter().all(|w| w.norm == 0.0));
    assert!(r.has_wm_factor);
}

#[test]
fn wm_single_doubling_vanishes() {
    let r = wm_average_vanishing(&[(ProductMap::Doubling, cos_y())], 1 << 16, &[(0, 1 << 12)]).unwrap();
    assert!(r.has_wm_factor);
    assert!(r.max_norm <= 0.05, "{}", r.max_norm);
    // Only the first 16 iterates survive the projection, each of norm ≤ 1/√2
    // and mutually orthogonal.
    assert!(r.max_norm <= (16.0f64 * 0.5).sqrt() / 4096.0 + 1e-12);
}

#[test]
fn wm_compact_observable_does_not_vanish() {
    let u = FourierObservable::cosines(BaseSpace::Torus2, &[((0, 0), 0.75), ((1, 0), 0.2)]).unwrap();
    let w = Angle::named("sqrt2-1", DEFAULT_MIN_DENOMINATOR).unwrap();
    let r = wm_average_vanishing(&[(ProductMap::RotationDoubling(w), u)], 1 << 10, &[(0, 2048)]).unwrap();
    assert!(!r.has_wm_factor);
    assert!((r.max_norm - 0.75).abs() < 1e-3, "{}", r.max_norm);
}

#[test]
fn wm_rejects_mismatched_inputs() {
    let circle = FourierObservable::cosines(BaseSpace::Circle, &[((1, 0), 1.0)]).unwrap();
    assert!(wm_average_vanishing(&[(ProductMap::Doubling, circle)], 256, &[(0, 8)]).is_err());
    assert!(wm_average_vanishing(&[(ProductMap::Doubling, cos_y())], 2, &[(0, 8)]).is_err());
    assert!(wm_average_vanishing(&[(ProductMap::Doubling, cos_y())], 256, &[(5, 5)]).is_err());
}

#[test]
fn disjoint_rotation_correlations_factor() {
    let w1 = Angle::named("sqrt2-1", DEFAULT_MIN_DENOMINATOR).unwrap();
    let w2 = Angle::named("sqrt3-1", DEFAULT_MIN_DENOMINATOR).unwrap();
    let terms = vec![(ProductMap::Rotation(w1.clone()), cos_x()), (ProductMap::Rotation(w2.clone()), cos_x())];
    let xs = grid_spectra(crate::par::Execution::default_for_build(), &terms, 0, 4000, 64).unwrap();
    let r = vdc_surrogate(&xs, 12).unwrap();
    assert!(r.holds);
    for (i, got) in r.per_h.iter().enumerate() {
        let h = (i + 1) as f64;
        let want: f64 = [&w1, &w2].iter().map(|w| 0.5 * (2.0 * PI * h * w.to_f64()).cos()).product();
        assert!((got - want).abs() < 0.01, "h={h}: {got} vs {want}");
    }
}

#[test]
fn vdc_on_doubling_data() {
    let w = Angle::named("golden-1", DEFAULT_MIN_DENOMINATOR).unwrap();
    let terms = vec![(ProductMap::RotationDoubling(w), cos_y())];
    let xs = grid_spectra(crate::par::Execution::default_for_build(), &terms, 0, 1024, 1 << 12).unwrap();
    let r = vdc_surrogate(&xs, 16).unwrap();
    assert!(r.holds);
    assert!(r.lhs < 1e-3);
}

#[test]
fn threshold_is_recorded_exactly_enough() {
    let r = eigen_return_times(&[Angle::rational(q(1, 4))], 2.0, 0.6, 20).unwrap();
    assert!((r.tolerance - 0.1).abs() < 1e-15);
    assert!(r.gaps.threshold > Rational::from_integer(0.into()));
}
