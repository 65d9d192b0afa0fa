use proptest::prelude::*;

use varcvx_core::gallery;
use varcvx_core::moreau::{self, EnvelopeHandle};
use varcvx_core::oracles;
use varcvx_core::{ExtendedFn, NeighborhoodSpec, Objective, SamplingScheme};

fn prox_bounded_fns() -> Vec<ExtendedFn> {
    vec![
        gallery::abs(),
        gallery::l0(),
        gallery::logsum(),
        gallery::step(),
        gallery::dl_counterexample(),
        gallery::quad(2.0),
        gallery::huber_target(),
        gallery::nonpositive_indicator(),
    ]
}

fn pick() -> impl Strategy<Value = ExtendedFn> {
    (0..prox_bounded_fns().len()).prop_map(|k| prox_bounded_fns().swap_remove(k))
}

const LAMBDAS: [f64; 3] = [0.5, 0.25, 0.1];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn envelope_below_function(f in pick(), x in -1.5f64..1.5, k in 0usize..3) {
        let h = EnvelopeHandle::new(f.clone(), LAMBDAS[k], 1).unwrap();
        let fx = f.eval(&[x]).unwrap();
        prop_assert!(h.envelope(&[x]).unwrap() <= fx + 1e-12);
    }

    #[test]
    fn envelope_decreases_in_lambda(f in pick(), x in -1.5f64..1.5) {
        let vals: Vec<f64> = LAMBDAS
            .iter()
            .map(|&l| EnvelopeHandle::new(f.clone(), l, 1).unwrap().envelope(&[x]).unwrap())
            .collect();
        // λ = 0.5, 0.25, 0.1: the envelope grows as λ shrinks
        prop_assert!(vals[0] <= vals[1] + 1e-10 && vals[1] <= vals[2] + 1e-10, "{vals:?}");
    }

    /// In one dimension every selection of the prox is nondecreasing.
    #[test]
    fn prox_is_monotone(f in pick(), a in -1.5f64..1.5, d in 0.0f64..1.0, k in 0usize..3) {
        let h = EnvelopeHandle::new(f, LAMBDAS[k], 1).unwrap();
        let p = h.prox(&[a]).unwrap()[0];
        let q = h.prox(&[a + d]).unwrap()[0];
        prop_assert!(p <= q + 1e-8, "prox({a}) = {p} > prox({}) = {q}", a + d);
    }

    #[test]
    fn envelope_attains_prox_value(f in pick(), x in -1.5f64..1.5, k in 0usize..3) {
        let lam = LAMBDAS[k];
        let h = EnvelopeHandle::new(f.clone(), lam, 1).unwrap();
        let p = h.prox(&[x]).unwrap();
        let direct = f.eval(&p).unwrap() + (p[0] - x) * (p[0] - x) / (2.0 * lam);
        prop_assert!((h.envelope(&[x]).unwrap() - direct).abs() <= 1e-9);
    }

    #[test]
    fn sampled_convexity_is_monotone_in_modulus(sigma in 0.5f64..4.0, mu in 0.0f64..5.0, seed in 0u64..1000) {
        let f = gallery::quad(sigma);
        let region = NeighborhoodSpec::new(vec![0.1, -0.2], 0.5, 24).with_scheme(SamplingScheme::RandomSeeded(seed));
        let at = oracles::sampled_convexity(&f, &region, mu, 200).unwrap();
        let below = oracles::sampled_convexity(&f, &region, mu * 0.5, 200).unwrap();
        prop_assert!(!at.is_holds() || below.is_holds());
        prop_assert_eq!(at.is_holds(), mu <= sigma + 1e-9);
    }

    #[test]
    fn envelope_modulus_formula(sigma in 0.1f64..5.0, lam in 0.05f64..1.0) {
        let em = moreau::envelope_modulus(sigma, lam);
        prop_assert!(em > 0.0 && em < sigma && em < 1.0 / lam);
        let h = EnvelopeHandle::new(gallery::quad(sigma), lam, 1)
            .unwrap()
            .with_analytic(&[vec![0.0], vec![0.5]])
            .unwrap();
        let region = NeighborhoodSpec::new(vec![0.0], 0.3, 15);
        let measured = oracles::estimate_convexity_modulus(&h, &region, 100).unwrap();
        prop_assert!((measured - em).abs() <= 1e-7 * (1.0 + em));
    }
}

#[test]
fn envelope_of_indicator_is_half_squared_distance() {
    let lam = 0.25;
    let h = EnvelopeHandle::new(gallery::nonpositive_indicator(), lam, 2).unwrap();
    for x in [[0.3f64, -0.4], [-1.0, -2.0], [0.5, 0.5]] {
        let d2: f64 = x.iter().map(|t| t.max(0.0).powi(2)).sum();
        assert!((h.envelope(&x).unwrap() - d2 / (2.0 * lam)).abs() < 1e-9);
    }
}
