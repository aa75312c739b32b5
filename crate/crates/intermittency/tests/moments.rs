use intermittency::kernels::special::gamma;
use intermittency::kernels::KernelSpec;
use intermittency::moments::{
    diagram_sum, fd_oracle_she, lower_bound_value, phi_n, phi_n_white_heat, pth_moment_truncated,
    restricted_integral_mc, ChaosKernelSpec, FdConfig, LowerBoundPlan,
};
use intermittency::noise::{NoiseSpec, SpaceCovariance, TimeCovariance};
use intermittency::Error;

const SEED: u64 = 7_919;

fn heat1(n: usize, t: f64) -> ChaosKernelSpec {
    ChaosKernelSpec::new(KernelSpec::Heat { d: 1 }, n, t)
}

fn close(got: f64, se: f64, want: f64, what: &str) {
    assert!((got - want).abs() <= 4.0 * se + 1e-12, "{what}: {got} +- {se} vs {want}");
}

#[test]
fn white_white_matches_closed_form() {
    let w = NoiseSpec::white_white();
    for n in 1..=4 {
        let e = phi_n(&heat1(n, 1.0), &w, 200_000, SEED).unwrap();
        close(e.value, e.std_error, phi_n_white_heat(n, 1.0, 1.0), &format!("n = {n}"));
    }
    assert!((phi_n_white_heat(1, 1.0, 1.0) - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-15);
}

// int_0^1 int int G_s(y) G_s(z) |y - z|^{-1/2}: the difference of two
// independent N(0, s) is N(0, 2s), so the inner part is E|N(0,2s)|^{-1/2}.
fn riesz_heat_oracle() -> f64 {
    let c = 2f64.powf(-0.25) * gamma(0.25) / std::f64::consts::PI.sqrt();
    c * 2f64.powf(-0.25) * 4.0 / 3.0
}

// Same with gamma(s - r) = |s - r|^{-1/2}, by two-dimensional quadrature in mpmath.
const RIESZ_POWER_TIME: f64 = 4.87198489361371;

#[test]
fn riesz_white_time() {
    let n = NoiseSpec::new(TimeCovariance::WhiteInTime, SpaceCovariance::riesz(0.5, 1)).unwrap();
    let e = phi_n(&heat1(1, 1.0), &n, 400_000, SEED).unwrap();
    let want = riesz_heat_oracle();
    assert!((want - 1.9285).abs() < 1e-4);
    close(e.value, e.std_error, want, "riesz white");
}

#[test]
fn riesz_power_time() {
    let n = NoiseSpec::new(TimeCovariance::power(0.5), SpaceCovariance::riesz(0.5, 1)).unwrap();
    let e = phi_n(&heat1(1, 1.0), &n, 400_000, SEED).unwrap();
    close(e.value, e.std_error, RIESZ_POWER_TIME, "riesz power");
}

#[test]
fn diagram_sums_reproduce_phi() {
    let w = NoiseSpec::white_white();
    for n in 1..=2 {
        let e = diagram_sum(&[n, n], &heat1(n, 1.0), &w, 200_000, SEED).unwrap();
        close(e.value, e.std_error, phi_n_white_heat(n, 1.0, 1.0), &format!("({n},{n})"));
    }
    assert_eq!(diagram_sum(&[1, 2], &heat1(1, 1.0), &w, 10, SEED).unwrap().value, 0.0);
}

#[test]
fn truncated_moment_edge_cases() {
    let w = NoiseSpec::white_white();
    let mut s = heat1(1, 1.0);
    s.initial_value = 2.0;
    assert_eq!(pth_moment_truncated(1, &s, &w, 3, 10, SEED).unwrap().estimate.value, 2.0);
    assert_eq!(pth_moment_truncated(4, &s, &w, 0, 10, SEED).unwrap().estimate.value, 16.0);
    assert!(matches!(
        pth_moment_truncated(3, &s, &w, 2, 10, SEED),
        Err(Error::UnsupportedParameter(_))
    ));
}

#[test]
fn second_moment_is_sum_of_phi() {
    let w = NoiseSpec::white_white();
    let e = pth_moment_truncated(2, &heat1(1, 1.0), &w, 3, 200_000, SEED).unwrap();
    let want: f64 = 1.0 + (1..=3).map(|n| phi_n_white_heat(n, 1.0, 1.0)).sum::<f64>();
    close(e.estimate.value, e.estimate.std_error, want, "p = 2");
}

#[test]
fn restricted_integral_examples() {
    for (p, m, want) in [(2, 2, (1.0f64 / 12.0).powi(4)), (2, 1, (1.0f64 / 8.0).powi(2))] {
        let plan = LowerBoundPlan::new(p, m, 1.0, 1.0).unwrap();
        let e = restricted_integral_mc(&plan, 1_000_000, SEED).unwrap();
        close(e.value, e.std_error, want, &format!("p = {p}, m = {m}"));
    }
}

#[test]
fn lower_bound_summand() {
    let (a, b, l, g) = (0.0, 2.0, 0.5, 0.5);
    let plan = LowerBoundPlan::new(2, 4, 0.5, 0.2).unwrap();
    let lb = lower_bound_value(&plan, a, b, l, g).unwrap();
    let (t, p, m, e) = (0.2f64, 2.0f64, 4.0f64, 0.5f64);
    let want = 24f64 * e.powf(-m * l) * t.powf(-m * g) * (t * p / m).powf(2.0 * m * (a + 1.0));
    assert!((lb.log_summand - want.ln()).abs() < 1e-12);
    let dd = b * (2.0 * a + 1.0) - l;
    assert!((lb.eps_tp - t.powf(-(1.0 - g) / dd) * p.powf(-1.0 / dd)).abs() < 1e-12);
}

#[test]
fn lower_bound_needs_enough_vertices() {
    let plan = LowerBoundPlan::new(2, 1, 0.1, 1.0).unwrap();
    assert!(matches!(
        lower_bound_value(&plan, 0.0, 2.0, 0.5, 0.5),
        Err(Error::ConstraintViolated(_))
    ));
}

#[test]
fn fd_mean_is_initial_value() {
    let m = fd_oracle_she(&FdConfig::new(0.25, 1.0 / 16.0, 2_000, SEED)).unwrap();
    assert!((m.moments[0] - 1.0).abs() <= 4.0 * m.std_errors[0]);
    assert!(m.moments[1] > 1.0);
}

#[test]
fn estimates_are_reproducible() {
    let w = NoiseSpec::white_white();
    let a = phi_n(&heat1(2, 0.5), &w, 50_000, SEED).unwrap();
    let b = phi_n(&heat1(2, 0.5), &w, 50_000, SEED).unwrap();
    assert_eq!(a, b);
}
