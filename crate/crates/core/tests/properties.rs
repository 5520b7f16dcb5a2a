use std::f64::consts::TAU;

use lacunary_core::circle::{norm_l1, norm_linf, TrigPoly};
use lacunary_core::extremality::{
    cofinite_l1_witness, cofinite_linf_witness, linf_feasibility_oracle, periodic_witness, verify_l1_witness,
    verify_linf_witness, ExtremalityCertificate, Exponent, OracleOptions, OracleOutcome, Weight, Witness,
};
use lacunary_core::factorization::{classify_h1_extreme, Verdict as H1Verdict};
use lacunary_core::sampling::{normalize_l1, normalize_linf};
use lacunary_core::spectra::SpectralSet;
use lacunary_core::toeplitz::{kernel_basis, kernel_membership};
use num_complex::Complex64;
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Complex64::new(a, b))
}

/// A polynomial supported on `freqs` with at least one coefficient of size >= 0.1.
fn poly_on(freqs: Vec<i64>) -> impl Strategy<Value = TrigPoly> {
    let n = freqs.len();
    prop::collection::vec(coeff(), n)
        .prop_filter("not too small", |c| c.iter().any(|z| z.norm() >= 0.1))
        .prop_map(move |c| TrigPoly::from_terms(freqs.iter().copied().zip(c)))
}

fn descriptor() -> impl Strategy<Value = String> {
    let atom = prop_oneof![
        Just("Z".to_string()),
        Just("Zplus".to_string()),
        Just("Zminus".to_string()),
        Just("pow2".to_string()),
        Just("negsq".to_string()),
        (1u64..6, -6i64..6).prop_map(|(n, r)| format!("AP({n},{r})")),
        prop::collection::vec(-20i64..20, 0..4).prop_map(|v| format!(
            "{{{}}}",
            v.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",")
        )),
        (-10i64..0, 0i64..10).prop_map(|(a, b)| format!("[{a},{b}]")),
        (2i64..4).prop_map(|b| format!("negpow({b})")),
    ];
    atom.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) | ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) \\ ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) & ({b})")),
            (inner.clone(), -5i64..5).prop_map(|(a, n)| format!("shift({a}, {n})")),
            inner.prop_map(|a| format!("neg({a})")),
        ]
    })
}

/// Mean of |f| from a plain midpoint sum, independent of the library quadrature.
fn midpoint_l1(f: &TrigPoly, n: usize) -> f64 {
    (0..n).map(|j| f.eval(TAU * (j as f64 + 0.5) / n as f64).norm()).sum::<f64>() / n as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn descriptors_round_trip(text in descriptor()) {
        let a: SpectralSet = text.parse().unwrap();
        let canon = a.canonical();
        let b: SpectralSet = canon.parse().unwrap();
        prop_assert_eq!(b.canonical(), canon.clone());
        for k in -70..=70 {
            prop_assert_eq!(a.contains(k), b.contains(k), "k = {} in {} vs {}", k, text, canon);
        }
    }

    #[test]
    fn products_agree_pointwise(f in poly_on(vec![-3, 0, 2, 5]), g in poly_on(vec![-1, 1, 4]), t in 0.0..TAU) {
        let fg = &f * &g;
        let want = f.eval(t) * g.eval(t);
        prop_assert!((fg.eval(t) - want).norm() <= 1e-13 * (1.0 + want.norm()));
        let sum = &f + &g;
        prop_assert!((sum.eval(t) - f.eval(t) - g.eval(t)).norm() <= 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn l1_norm_matches_a_fine_midpoint_sum(f in poly_on(vec![-4, -1, 0, 3, 6])) {
        let q = norm_l1(&f, 16).unwrap();
        let oracle = midpoint_l1(&f, 1 << 17);
        prop_assert!((q.value - oracle).abs() <= 1e-7 * oracle.max(1.0), "{} vs {}", q.value, oracle);
    }

    #[test]
    fn sup_norm_encloses_the_sampled_maximum(f in poly_on(vec![-2, 0, 1, 7])) {
        let s = norm_linf(&f, 14).unwrap();
        let sampled = (0..1 << 16).map(|j| f.eval(TAU * j as f64 / 65536.0).norm()).fold(0.0, f64::max);
        prop_assert!(s.lower <= s.value && s.value <= s.upper);
        prop_assert!(sampled <= s.upper + 1e-12);
        prop_assert!(s.upper - sampled <= 1e-6);
    }

    #[test]
    fn periodic_witnesses_verify(m in 2u64..5, r in 0i64..5, c in prop::collection::vec(coeff(), 3)) {
        let set = SpectralSet::progression(m, r);
        let base = r.rem_euclid(m as i64);
        let freqs = [base - m as i64, base, base + 2 * m as i64];
        prop_assume!(c.iter().any(|z| z.norm() >= 0.1));
        let f = normalize_l1(&TrigPoly::from_terms(freqs.into_iter().zip(c)), 16).unwrap();
        let w = periodic_witness(&f, &set, 16).unwrap();
        let v = verify_l1_witness(&f, &set, &w, 16).unwrap();
        prop_assert!(v.ok, "{:?}", v);
        prop_assert!((v.norm_u - 1.0).abs() <= 1e-8 && (v.norm_v - 1.0).abs() <= 1e-8);
        prop_assert!(v.midpoint_error <= 1e-12);
    }

    #[test]
    fn cofinite_l1_witnesses_verify(f in poly_on(vec![-3, -1, 1, 2, 4])) {
        let set = SpectralSet::integers_without([0, 3]);
        let f = normalize_l1(&f, 16).unwrap();
        let w = cofinite_l1_witness(&f, &set, 16).unwrap();
        let v = verify_l1_witness(&f, &set, &w, 16).unwrap();
        prop_assert!(v.ok, "{:?}", v);
        prop_assert!(w.residual <= 1e-9);
        prop_assert!(v.centered_mass.abs() <= 1e-9);
    }

    #[test]
    fn cofinite_linf_witnesses_verify(f in poly_on(vec![-2, 1, 3])) {
        let set = SpectralSet::integers_without([0]);
        let f = normalize_linf(&f, 16).unwrap();
        // Unimodular f have no witness; the random ones here never are.
        let w = cofinite_linf_witness(&f, &set, 16).unwrap();
        let v = verify_linf_witness(&f, &set, &w).unwrap();
        prop_assert!(v.ok, "{:?}", v);
        prop_assert!(v.sup_plus <= 1.0 + 1e-8 && v.sup_minus <= 1.0 + 1e-8);
        prop_assert!(v.max_residual <= 1e-9);
    }

    /// φ = zbar^m g with g analytic of degree d and g(0) != 0: f is in the kernel iff
    /// g f has degree below m, so the capped kernel has dimension max(0, min(cap, m-1-d) + 1).
    #[test]
    fn toeplitz_kernel_dimension_formula(m in 0i64..7, cap in 0i64..7, g in prop::collection::vec(coeff(), 1..3)) {
        prop_assume!(g[0].norm() >= 0.2);
        let d = g.len() as i64 - 1;
        let g = TrigPoly::from_terms(g.into_iter().enumerate().map(|(k, c)| (k as i64, c)));
        let phi = g.shift(-m);
        let k = kernel_basis(&phi, cap).unwrap();
        let want = (cap.min(m - 1 - d) + 1).max(0) as usize;
        prop_assert_eq!(k.dimension, want);
        for (i, b) in k.basis.iter().enumerate() {
            prop_assert!(kernel_membership(&phi, b).unwrap().member);
            for c in &k.basis[..i] {
                let ip: Complex64 = (0..=cap).map(|j| b.coeff(j) * c.coeff(j).conj()).sum();
                prop_assert!(ip.norm() <= 1e-12);
            }
            prop_assert!((b.l2_coeff_norm() - 1.0).abs() <= 1e-12);
        }
    }

    /// Roots placed by construction decide outerness.
    #[test]
    fn h1_verdict_follows_root_placement(
        radii in prop::collection::vec(prop_oneof![0.2f64..0.9, 1.1f64..3.0], 1..5),
        angles in prop::collection::vec(0.0..TAU, 5),
    ) {
        let mut p = TrigPoly::one();
        for (r, t) in radii.iter().zip(&angles) {
            let root = Complex64::from_polar(*r, *t);
            p = &p * &TrigPoly::from_terms([(0, -root), (1, Complex64::new(1.0, 0.0))]);
        }
        let f = normalize_l1(&p, 16).unwrap();
        let c = classify_h1_extreme(&f, 16).unwrap();
        let inside = radii.iter().filter(|&&r| r < 1.0).count();
        prop_assert_eq!(c.factorization.blaschke_degree, inside);
        let want = if inside == 0 { H1Verdict::Extreme } else { H1Verdict::NonExtreme };
        prop_assert_eq!(c.verdict, want);
    }
}

#[test]
fn certificates_survive_serde() {
    let set = SpectralSet::integers_without([0]);
    let f = normalize_l1(&TrigPoly::from_terms([(1, Complex64::new(0.5, 0.1)), (-2, Complex64::new(0.2, 0.0))]), 16)
        .unwrap();
    let w = cofinite_l1_witness(&f, &set, 16).unwrap();
    let cert = ExtremalityCertificate::non_extreme(Exponent::One, &set, Witness::L1(w), "cofinite");
    let text = serde_json::to_string(&cert).unwrap();
    let back: ExtremalityCertificate = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cert);

    let g = normalize_linf(&f, 16).unwrap();
    let w = cofinite_linf_witness(&g, &set, 16).unwrap();
    let cert = ExtremalityCertificate::non_extreme(Exponent::Infinity, &set, Witness::Linf(w), "cofinite");
    let back: ExtremalityCertificate = serde_json::from_str(&serde_json::to_string(&cert).unwrap()).unwrap();
    assert_eq!(back, cert);
}

#[test]
fn oracle_agrees_with_the_unimodularity_dichotomy() {
    let set = SpectralSet::integers_without([0]);
    let basis = [TrigPoly::one(), TrigPoly::z(1)];
    let opts = OracleOptions {
        weight: Weight::Deficit,
        ..OracleOptions::default()
    };
    // Not unimodular: a witness exists and the oracle must find one.
    let f = normalize_linf(
        &TrigPoly::from_terms([(1, Complex64::new(0.7, 0.0)), (-1, Complex64::new(0.0, 0.3))]),
        16,
    )
    .unwrap();
    match linf_feasibility_oracle(&f, &basis, &set, &opts).unwrap() {
        OracleOutcome::NonExtreme(w) => assert!(w.sup_plus <= 1.0 + 1e-8 && w.sup_minus <= 1.0 + 1e-8),
        other => panic!("{other:?}"),
    }
    // Unimodular: extreme, so no perturbation may be reported.
    for f in [TrigPoly::z(1), TrigPoly::z(-3).scale(Complex64::new(0.0, 1.0))] {
        assert!(!linf_feasibility_oracle(&f, &basis, &set, &opts).unwrap().is_non_extreme());
    }
}
