use dymlab::asymptotics::*;
use dymlab::cli::{fmt_f64, Command, RunConfig, SignatureCfg};
use dymlab::conjugation::*;
use dymlab::direct::compare;
use dymlab::linalg::*;
use dymlab::soliton::*;
use dymlab::spectrum::DiscreteSpectrum;
use proptest::prelude::*;
use std::f64::consts::PI;

fn finite() -> impl Strategy<Value = f64> {
    any::<f64>().prop_filter("finite", |v| v.is_finite())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_floats_round_trip(v in finite()) {
        prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
    }

    #[test]
    fn config_round_trips_and_hash_is_stable(y in -1e3..-1e-3f64, t in 1e-3..1e3f64, a in finite(), b in 1e-300..1e300f64) {
        let cfg = RunConfig::new(Command::Signature(SignatureCfg {
            y, t, re_range: (a.min(0.0), a.min(0.0) + b.min(1e10)), im_range: (-1.0, 1.0), n_re: 10, n_im: 10,
            random_points: 5, agreement_tol: b,
        }));
        let text = cfg.canonical_json();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.canonical_json(), text);
        prop_assert_eq!(back.config_hash(), cfg.config_hash());
    }

    #[test]
    fn beta21_modulus(nu in 1e-4..3.0f64, phase in 0.0..(2.0 * PI)) {
        let r = c((1.0 - (-2.0 * PI * nu).exp()).sqrt(), 0.0) * (I * phase).exp();
        let b = beta21(r, nu).unwrap();
        prop_assert!((b.norm_sqr() - nu).abs() <= 1e-8 * nu.max(1.0));
    }

    #[test]
    fn signature_formula_matches_direct(re in -5.0..5.0f64, im in -5.0..5.0f64, l0 in 0.05..3.0f64) {
        let a = re_2i_theta(c(re, im), l0);
        let b = re_2i_theta_direct(c(re, im), l0);
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn one_pole_rhp_matches_closed_form(eta in 0.2..1.5f64, cabs in 0.1..5.0f64, y in -10.0..10.0f64, t in 0.0..2.0f64) {
        let spec = DiscreteSpectrum::new(vec![c(0.0, eta)], vec![c(0.0, -cabs)]).unwrap();
        let (x, q) = one_soliton_closed_form(eta, cabs, y, t);
        prop_assume!(q.abs() < 1e6);
        let s = soliton_sample(&spec, y, t).unwrap();
        prop_assert!((s.x - x).abs() <= 1e-8 * (1.0 + x.abs()));
        prop_assert!((s.q_hat - q).abs() <= 1e-7 * (1.0 + q.abs()));
    }

    #[test]
    fn multi_pole_symmetry(e1 in 0.2..0.7f64, e2 in 0.8..1.4f64, xi in 0.1..0.6f64, y in -6.0..6.0f64, t in 0.0..1.0f64) {
        // imaginary pair plus a symmetric complex pair
        let spec = DiscreteSpectrum::new(
            vec![c(0.0, e1), c(0.0, e2), c(xi, 0.5), c(-xi, 0.5)],
            vec![c(0.0, -1.0), c(0.0, -2.0), c(0.3, -0.8), c(-0.3, -0.8)],
        ).unwrap();
        let s = soliton_sample(&spec, y, t).unwrap();
        prop_assume!(!s.cusp);
        prop_assert!(s.mu_ratio_err < 1e-8);
        prop_assert!(s.imag_residual < 1e-8 * (1.0 + s.mu1_mu2_at_0.abs()));
    }

    #[test]
    fn delta_is_unimodular(amp in 0.0..0.8f64, l0 in 0.2..1.5f64, re in -2.0..2.0f64, im in 0.05..2.0f64) {
        let ctx = ConjugationContext::new(Reflection::from_fn(move |s| c(amp * (-(s * s)).exp(), 0.0)), &DiscreteSpectrum::empty(), l0).unwrap();
        let z = c(re, im);
        let v = ctx.delta(z).unwrap() * ctx.delta(z.conj()).unwrap().conj();
        prop_assert!((v - ONE).norm() <= 1e-8);
        prop_assert!(ctx.nu >= 0.0);
        prop_assert_eq!(ctx.nu == 0.0, amp == 0.0);
    }

    #[test]
    fn e1_closed_form_matches_quadrature(m in prop::array::uniform8(-0.3..0.3f64), k in prop::array::uniform8(-0.3..0.3f64), l0 in 0.4..1.5f64) {
        let a0 = Mat2::IDENTITY + Mat2::new(c(m[0], m[1]), c(m[2], m[3]), c(m[4], m[5]), c(m[6], m[7]));
        let a1 = Mat2::new(c(k[0], k[1]), c(k[2], k[3]), c(k[4], k[5]), c(k[6], k[7]));
        let coeffs = parabolic_coeffs(c(0.4, 0.1), 0.03, c(0.0, 0.02), c(0.0, -0.01), l0, 30.0).unwrap();
        let mout = move |s: C64| a0 + a1.scale(s);
        let e = error_terms(&mout(c(-l0, 0.0)), &mout(c(l0, 0.0)), &coeffs).unwrap();
        let (q1, _) = error_terms_quadrature(&mout, &coeffs, 0.15 * l0, 256).unwrap();
        prop_assert!((e.e1 - q1).max_abs() <= 1e-10);
    }

    #[test]
    fn compare_is_zero_on_identical_fields(v in prop::collection::vec(-10.0..10.0f64, 8..64)) {
        let x: Vec<f64> = (0..v.len()).map(|i| i as f64).collect();
        let r = compare(&x, &v, &x, &v).unwrap();
        prop_assert_eq!(r.sup, 0.0);
    }
}
