use intermittency::kernels::special::{erf, rgamma};
use intermittency::kernels::{
    ball_mass, density, heat_density, kernel_fourier, mittag_leffler, BallMassQuery, KernelSpec,
};
use intermittency::Error;
use proptest::prelude::*;

// E_{0.8,0.8}(-x), computed with mpmath at 30 digits.
const ML_08: [(f64, f64); 10] = [
    (0.5, 0.457931498101114373),
    (2.0, 0.092077465517931649),
    (3.0, 0.0399156642515970844),
    (7.0, 0.0052342779709382296),
    (10.0, 0.00227700808569453664),
    (15.0, 0.00092231285154779574),
    (19.0, 0.000553298350630136961),
    (20.0, 0.000495825209592086766),
    (25.0, 0.000308970061891473871),
    (40.0, 0.000116041402054561277),
];

#[test]
fn mittag_leffler_frozen_values() {
    for &(x, want) in &ML_08 {
        let got = mittag_leffler(0.8, 0.8, -x).unwrap();
        assert!(((got - want) / want).abs() < 1e-8, "x = {x}: {got} vs {want}");
    }
}

#[test]
fn mittag_leffler_at_zero_is_rgamma() {
    let want = [0.217824884211667274, 0.450824199194411090, 0.671504972442073335, 0.858937019224667499];
    for (k, w) in want.iter().enumerate() {
        let b = (k + 1) as f64 / 5.0;
        assert!((mittag_leffler(0.9, b, 0.0).unwrap() - w).abs() < 1e-15);
        assert!((rgamma(b) - w).abs() < 1e-15);
    }
}

#[test]
fn mittag_leffler_exp_on_real_line() {
    for i in 0..=44 {
        let z = -10.0 + 0.25 * i as f64;
        let got = mittag_leffler(1.0, 1.0, z).unwrap();
        assert!(((got - z.exp()) / z.exp()).abs() < 1e-10, "z = {z}");
    }
}

#[test]
fn heat_density_examples() {
    let h = heat_density(0.5, &[1.0]).unwrap();
    assert!((h - (-1.0f64).exp() / std::f64::consts::PI.sqrt()).abs() < 1e-15);
    assert_eq!(heat_density(-1.0, &[0.0]), Err(Error::NonpositiveTime(-1.0)));
}

#[test]
fn fracdiff_reduces_to_heat() {
    let f = KernelSpec::FracDiff { d: 1, alpha: 2.0, beta: 1.0 };
    for &x in &[0.0, 0.3, 1.0, 2.5] {
        let got = density(&f, 0.7, &[x]).unwrap();
        let want = heat_density(0.7, &[x]).unwrap();
        assert!((got - want).abs() < 1e-6, "x = {x}: {got} vs {want}");
    }
}

#[test]
fn fracdiff_transform_at_origin() {
    let f = KernelSpec::FracDiff { d: 1, alpha: 1.5, beta: 1.2 };
    let t = 2.0f64;
    let want = t.powf(0.2) * rgamma(1.2);
    assert!((kernel_fourier(&f, t, &[0.0]).unwrap() - want).abs() < 1e-14);
}

#[test]
fn ball_mass_translation_invariant() {
    let h = KernelSpec::Heat { d: 2 };
    let base = ball_mass(&h, &BallMassQuery::new(0.2, vec![0.1, 0.0], vec![0.3, 0.2], 0.4)).unwrap();
    let moved = ball_mass(&h, &BallMassQuery::new(0.2, vec![5.1, -2.0], vec![5.3, -1.8], 0.4)).unwrap();
    assert!((base - moved).abs() <= 1e-10);
}

#[test]
fn ball_mass_rejects_large_radius() {
    let w = KernelSpec::Wave { d: 1 };
    assert_eq!(
        ball_mass(&w, &BallMassQuery::centered(0.5, 1, 2.0)),
        Err(Error::RadiusOutOfRange(2.0))
    );
}

#[test]
fn ball_mass_monotone_in_radius() {
    for spec in [
        KernelSpec::Heat { d: 1 },
        KernelSpec::Heat { d: 3 },
        KernelSpec::Wave { d: 2 },
        KernelSpec::AlphaHeat { d: 1, alpha: 1.5 },
    ] {
        let mut last = 0.0;
        for k in 1..=10 {
            let e = k as f64 / 10.0;
            let m = ball_mass(&spec, &BallMassQuery::centered(0.3, spec.dim(), e)).unwrap();
            assert!(m >= last - 1e-12, "{spec:?} at eps = {e}");
            last = m;
        }
        assert!(last <= spec.total_mass(0.3) + 1e-9);
    }
}

#[test]
fn heat_ball_mass_matches_erf() {
    let h = KernelSpec::Heat { d: 1 };
    let (t, e) = (0.25f64, 0.6f64);
    let want = erf(e / (2.0 * t).sqrt());
    let got = ball_mass(&h, &BallMassQuery::centered(t, 1, e)).unwrap();
    assert!((got - want).abs() < 1e-12);
}

#[test]
fn wave3_has_no_density() {
    assert_eq!(
        density(&KernelSpec::Wave { d: 3 }, 1.0, &[0.1, 0.0, 0.0]),
        Err(Error::MeasureKernelNoDensity)
    );
}

proptest! {
    #[test]
    fn heat_self_similar(t in 0.01f64..10.0, c in 0.1f64..10.0, x in -3.0f64..3.0) {
        let lhs = heat_density(c * t, &[c.sqrt() * x]).unwrap();
        let rhs = heat_density(t, &[x]).unwrap() / c.sqrt();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
    }

    #[test]
    fn heat_symmetric_positive(t in 0.01f64..10.0, x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let a = heat_density(t, &[x, y]).unwrap();
        prop_assert_eq!(a, heat_density(t, &[-x, -y]).unwrap());
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn alpha_heat_transform_bounded(t in 0.01f64..10.0, xi in -50.0f64..50.0, alpha in 0.2f64..2.0) {
        let v = kernel_fourier(&KernelSpec::AlphaHeat { d: 1, alpha }, t, &[xi]).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
    }
}
