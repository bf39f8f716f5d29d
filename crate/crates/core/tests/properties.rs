use std::f64::consts::PI;

use ahe_eigen::lee_bound::ball_lower_bound;
use ahe_eigen::models::{DomainSpec, RadialFunction, WarpedModel, Warping};
use ahe_eigen::radial_solver::{first_eigenvalue, sweep};
use ahe_eigen::rayleigh::{hyperbolic_upper_bound, rayleigh_quotient};
use proptest::prelude::*;

fn model_strategy() -> impl Strategy<Value = WarpedModel> {
    prop_oneof![
        (1u32..5).prop_map(|n| WarpedModel::new(n, Warping::Sinh).unwrap()),
        (1u32..5).prop_map(|n| WarpedModel::new(n, Warping::Linear).unwrap()),
        (1u32..5).prop_map(|n| WarpedModel::new(n, Warping::Exp).unwrap()),
        Just(WarpedModel::new(2, Warping::Cosh).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // larger domains have smaller first eigenvalues
    #[test]
    fn domain_monotonicity(model in model_strategy(), r in 0.5f64..8.0, grow in 1.05f64..2.0) {
        let small = first_eigenvalue(&model, DomainSpec::new(r).unwrap(), 1e-10).unwrap();
        let large = first_eigenvalue(&model, DomainSpec::new(r * grow).unwrap(), 1e-10).unwrap();
        prop_assert!(large.lambda < small.lambda);
        prop_assert!(large.lambda > 0.0);
    }

    // admissible test functions never undercut λ₁
    #[test]
    fn rayleigh_dominates(model in model_strategy(), r in 0.5f64..8.0, k in 1u32..4, c in -0.9f64..0.9) {
        // (1 − (t/R)²)·(1 + c·sin²(kπt/R)) vanishes at |t| = R for balls and bands
        let kf = f64::from(k);
        let f = RadialFunction::new("wiggled-parabola", move |t| {
            let s = t / r;
            let wig = 1.0 + c * (kf * PI * s).sin().powi(2);
            let dwig = c * kf * PI / r * (2.0 * kf * PI * s).sin();
            ((1.0 - s * s) * wig, -2.0 * s / r * wig + (1.0 - s * s) * dwig)
        });
        let q = rayleigh_quotient(&model, DomainSpec::new(r).unwrap(), &f).unwrap();
        let lam = first_eigenvalue(&model, DomainSpec::new(r).unwrap(), 1e-10).unwrap().lambda;
        prop_assert!(q >= lam - 1e-9, "{q} < {lam}");
    }
}

#[test]
fn sweep_keeps_input_order() {
    let model = WarpedModel::new(3, Warping::Exp).unwrap();
    let radii = [7.0, 2.0, 5.0, 3.0];
    let out = sweep(&model, &radii, 1e-10);
    for (r, est) in radii.iter().zip(out) {
        let exact = 2.25 + PI * PI / (4.0 * r * r);
        assert!((est.unwrap().lambda - exact).abs() < 1e-8);
    }
}

#[test]
fn bounds_tighten_with_radius() {
    let mut prev = f64::INFINITY;
    for r in [10.0, 20.0, 40.0, 80.0] {
        let lower = ball_lower_bound(2, r).unwrap();
        let upper = hyperbolic_upper_bound(2, r).unwrap().quotient_fg;
        let exact = 1.0 + PI * PI / (r * r);
        assert!(lower <= exact && exact <= upper);
        assert!(upper - lower < prev);
        prev = upper - lower;
    }
}
