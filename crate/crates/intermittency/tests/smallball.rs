use intermittency::kernels::special::erf;
use intermittency::kernels::KernelSpec;
use intermittency::smallball::{
    claim_normalization, exp_lower_claim_check, exponential_form_fit, inf_ball_mass, verify_small_ball,
    verify_small_ball_envelope,
};

fn eps_grid() -> Vec<f64> {
    (0..6).map(|k| 10f64.powf(-k as f64 / 5.0)).collect()
}

fn kernels() -> Vec<KernelSpec> {
    vec![
        KernelSpec::Heat { d: 1 },
        KernelSpec::Heat { d: 2 },
        KernelSpec::Wave { d: 1 },
        KernelSpec::Wave { d: 3 },
        KernelSpec::AlphaHeat { d: 1, alpha: 1.5 },
    ]
}

#[test]
fn natural_exponents_pass() {
    for k in kernels() {
        let (a, b) = k.small_ball_exponents();
        let r = verify_small_ball(&k, a, b, &eps_grid(), 7, 0.1).unwrap();
        assert!(r.passed, "{}: worst {} trend {}", r.kernel, r.worst_ratio, r.trend);
    }
}

#[test]
fn overstated_exponent_is_rejected() {
    for k in kernels() {
        let (a, b) = k.small_ball_exponents();
        let r = verify_small_ball(&k, a + 1.0, b, &eps_grid(), 7, 0.1).unwrap();
        assert!(r.slope_mismatch && !r.passed, "{}", r.kernel);
    }
}

#[test]
fn heat1_worst_ratio() {
    // centered at the boundary with t = eps^2: P(0 <= N(0,1) <= 2)
    let r = verify_small_ball(&KernelSpec::Heat { d: 1 }, 0.0, 2.0, &eps_grid(), 9, 0.1).unwrap();
    let want = 0.5 * erf(2f64.sqrt());
    assert!((r.worst_ratio - want).abs() < 1e-9, "{} vs {want}", r.worst_ratio);
}

#[test]
fn envelope_passes() {
    let r = verify_small_ball_envelope(1, 1.5, 0.0, 1.5, &eps_grid(), 7, 0.1).unwrap();
    assert!(r.passed, "worst {}", r.worst_ratio);
    assert!(verify_small_ball_envelope(1, 2.0, 0.0, 2.0, &eps_grid(), 7, 0.1).is_err());
}

#[test]
fn heat_exponential_form() {
    let h = KernelSpec::Heat { d: 1 };
    let mut rows = Vec::new();
    for eps in [0.1, 0.3, 1.0] {
        for f in [0.1, 0.5, 1.0, 2.0, 4.0] {
            let t = f * eps * eps;
            rows.push((t, eps, inf_ball_mass(&h, t, eps, 9).unwrap()));
        }
    }
    let fit = exponential_form_fit(&h, &rows).unwrap();
    assert!(fit.c2 > 0.0 && fit.residual_rms <= 0.1, "{fit:?}");
    assert!(!fit.informational);
}

#[test]
fn wave3_long_times_are_excluded() {
    let w = KernelSpec::Wave { d: 3 };
    let rows: Vec<(f64, f64, f64)> = [(0.05, 0.1), (0.1, 0.1), (0.5, 0.1), (0.9, 0.1)]
        .iter()
        .map(|&(t, e)| (t, e, inf_ball_mass(&w, t, e, 9).unwrap()))
        .collect();
    let fit = exponential_form_fit(&w, &rows).unwrap();
    assert_eq!(fit.excluded, vec![2, 3]);
    assert!(fit.informational);
}

#[test]
fn claim_known_cases() {
    let grid: Vec<f64> = (0..50).map(|k| 10f64.powf(-2.0 + 4.0 * k as f64 / 49.0)).collect();
    for nu in [1.0, 2.0] {
        let r = exp_lower_claim_check(nu, &grid).unwrap();
        assert!(r.passed && r.c_required < r.c, "nu = {nu}: {r:?}");
    }
    let r = exp_lower_claim_check(2.0 / 3.0, &grid).unwrap();
    assert!((r.c_required - 1.7221).abs() < 1e-3, "{}", r.c_required);
    assert!((claim_normalization(1.0) - 2.0).abs() < 1e-15);
}
