use proptest::prelude::*;

use mills_core::analysis::{classify, monotonicity_probe, Direction};
use mills_core::distributions::make_gamma;
use mills_core::grid::log_grid;
use mills_core::inequalities::{chain_terms, mills_h, theorem1_chain, ChainDirection, ChainVerdict};
use mills_core::specfun::{gamma_mills, normal_mills, normal_survival, ShapeParam};

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn chain_is_symmetric(x in log_uniform(1e-2, 50.0), y in log_uniform(1e-2, 50.0)) {
        let a = theorem1_chain(x, y).unwrap();
        let b = theorem1_chain(y, x).unwrap();
        prop_assert_eq!(a.term_harmonic, b.term_harmonic);
        prop_assert_eq!(a.term_average, b.term_average);
        prop_assert_eq!(a.term_arithmetic, b.term_arithmetic);
        prop_assert_eq!(a.term_weighted, b.term_weighted);
    }

    #[test]
    fn harmonic_below_arithmetic(x in log_uniform(1e-6, 1e6), y in log_uniform(1e-6, 1e6)) {
        prop_assert!(2.0 * x * y / (x + y) <= (x + y) / 2.0 * (1.0 + 1e-15));
    }

    #[test]
    fn theorem1_chain_holds(x in log_uniform(1e-2, 50.0), y in log_uniform(1e-2, 50.0)) {
        let r = theorem1_chain(x, y).unwrap();
        prop_assert!(r.verdict != ChainVerdict::Violated, "{:?}", r);
        if (x - y).abs() > 1e-2 * (x + y) {
            prop_assert_eq!(r.verdict, ChainVerdict::Holds);
        }
    }

    #[test]
    fn diagonal_is_equality(x in log_uniform(1e-3, 1e3)) {
        let r = chain_terms(&mills_h, x, x, ChainDirection::ConvexChain).unwrap();
        prop_assert_eq!(r.verdict, ChainVerdict::HoldsWithEquality);
    }

    #[test]
    fn normal_mills_identity(x in 0.0f64..37.0) {
        let m = normal_mills(x).unwrap().value;
        let s = normal_survival(x).unwrap().value;
        let phi = (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        prop_assert!(((m * phi - s) / s).abs() < 1e-12);
        prop_assert!(m > 0.0 && m * x < 1.0);
    }

    #[test]
    fn gamma_mills_bounds(a in 0.05f64..20.0, x in log_uniform(1e-3, 400.0)) {
        // m = E(1 + U/x)^{alpha-1} with U ~ Exp(1); Bernoulli's inequality
        // bounds it by 1 and 1 + (alpha-1)/x depending on alpha
        let m = gamma_mills(ShapeParam::new(a).unwrap(), x).unwrap().value;
        let b = 1.0 + (a - 1.0) / x;
        let (lo, hi) = if a >= 2.0 {
            (b, f64::INFINITY)
        } else if a >= 1.0 {
            (1.0, b)
        } else {
            (b, 1.0)
        };
        prop_assert!(m >= lo * (1.0 - 1e-12) && m <= hi * (1.0 + 1e-12), "m = {}", m);
        prop_assert!(m > 0.0);
    }

    #[test]
    fn gamma_model_ode_is_consistent(a in 0.1f64..10.0, x in log_uniform(1e-1, 100.0)) {
        let g = make_gamma(ShapeParam::new(a).unwrap());
        let h = 1e-4 * x;
        let fd = (g.mills(x + h).unwrap() - g.mills(x - h).unwrap()) / (2.0 * h);
        let mp = g.mills_prime(x).unwrap();
        prop_assert!((fd - mp).abs() <= 1e-6 * (1.0 + mp.abs() + g.mills(x).unwrap()));
    }

    #[test]
    fn shape_param_rejects_nonpositive(a in -1e6f64..=0.0) {
        prop_assert!(ShapeParam::new(a).is_err());
    }

    #[test]
    fn increasing_sequences_classified(steps in prop::collection::vec(1e-6f64..1.0, 3..60), start in -10.0f64..10.0) {
        let mut v = start;
        let run: Vec<(f64, f64)> = steps
            .iter()
            .enumerate()
            .map(|(i, s)| {
                v += s;
                (i as f64, v)
            })
            .collect();
        let r = classify(std::slice::from_ref(&run), 0.0);
        prop_assert_eq!(r.direction, Direction::StrictlyIncreasing);
        let flipped: Vec<(f64, f64)> = run.iter().map(|&(x, y)| (x, -y)).collect();
        prop_assert_eq!(classify(&[flipped], 0.0).direction, Direction::StrictlyDecreasing);
    }

    #[test]
    fn not_monotone_iff_both_orientations_violated(values in prop::collection::vec(-5.0f64..5.0, 3..40)) {
        let run: Vec<(f64, f64)> = values.iter().enumerate().map(|(i, &v)| (i as f64, v)).collect();
        let r = classify(&[run], 1e-9);
        let both = r.decreases_beyond_slack > 0 && r.increases_beyond_slack > 0;
        prop_assert_eq!(r.direction == Direction::NotMonotone, both);
        prop_assert_eq!(r.violations.is_empty(), !both);
        if r.direction == Direction::Constant {
            prop_assert_eq!(r.decreases_beyond_slack + r.increases_beyond_slack, 0);
        }
    }

    #[test]
    fn log_grid_is_increasing(lo in log_uniform(1e-6, 1.0), span in 1.01f64..1e6, n in 3usize..500) {
        let g = log_grid(lo, lo * span, n).unwrap();
        prop_assert_eq!(g.len(), n);
        prop_assert_eq!(g[0], lo);
        prop_assert_eq!(g[n - 1], lo * span);
        prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn affine_probe_respects_slack() {
    let g = log_grid(1.0, 2.0, 50).unwrap();
    let r = monotonicity_probe(&|x| Ok(1.0 + 1e-12 * x), &g, 1e-9).unwrap();
    assert_eq!(r.direction, Direction::Constant);
    let r = monotonicity_probe(&|x| Ok(1.0 + 1e-12 * x), &g, 0.0).unwrap();
    assert_eq!(r.direction, Direction::StrictlyIncreasing);
}
