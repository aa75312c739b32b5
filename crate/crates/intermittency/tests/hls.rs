use std::f64::consts::PI;

use intermittency::hls::{fit_hbar, hls_mass_spectral, log_grid, scaling_spread, weighted_mass};
use intermittency::kernels::special::gamma;
use intermittency::kernels::KernelSpec;
use intermittency::noise::{NoiseSpec, SpaceCovariance, TimeCovariance};
use intermittency::Error;

fn riesz(l: f64, d: usize) -> NoiseSpec {
    NoiseSpec::new(TimeCovariance::WhiteInTime, SpaceCovariance::riesz(l, d)).unwrap()
}

#[test]
fn wave_closed_form() {
    // 2 int_0^inf sin^2(u)/u^2 u^{-1/2} du = -2 Gamma(mu) cos(pi mu / 2) / 2^{mu+1}, mu = -3/2
    let mu = -1.5f64;
    let want = -2.0 * gamma(mu) * (PI * mu / 2.0).cos() / 2f64.powf(mu + 1.0);
    assert!((want - 4.7265436024147094).abs() < 1e-12);
    let got = hls_mass_spectral(&KernelSpec::Wave { d: 1 }, &riesz(0.5, 1), 1.0, 0.0).unwrap();
    assert!(((got - want) / want).abs() < 1e-7, "{got} vs {want}");
}

#[test]
fn fracdiff_heat_limit() {
    let f = KernelSpec::FracDiff { d: 1, alpha: 2.0, beta: 1.0 };
    let h = KernelSpec::Heat { d: 1 };
    let n = riesz(0.5, 1);
    for t in [1e-3, 1e-2, 0.1] {
        let a = hls_mass_spectral(&f, &n, t, 0.0).unwrap();
        let b = hls_mass_spectral(&h, &n, t, 0.0).unwrap();
        assert!(((a - b) / b).abs() < 1e-8);
    }
}

#[test]
fn grid_validation() {
    let h = KernelSpec::Heat { d: 1 };
    let n = riesz(0.5, 1);
    let bad = [
        log_grid(1e-3, 1e-1, 5),
        log_grid(1e-2, 1e-1, 12),
        log_grid(1e-3, 1.0, 12),
    ];
    for g in bad {
        assert!(matches!(fit_hbar(&h, &n, &g), Err(Error::InsufficientGrid(_))));
    }
    let g = log_grid(1e-3, 1e-1, 12);
    assert_eq!(g.len(), 12);
    assert_eq!((g[0], g[11]), (1e-3, 1e-1));
}

#[test]
fn fitted_exponents() {
    let g = log_grid(1e-3, 1e-1, 10);
    for (k, d) in [(KernelSpec::Heat { d: 2 }, 2), (KernelSpec::Wave { d: 3 }, 3)] {
        let r = fit_hbar(&k, &riesz(1.0, d), &g).unwrap();
        assert!(r.abs_gap < 1e-6, "{}: {} vs {}", r.kernel, r.fitted_hbar, r.closed_form_hbar);
        assert!(scaling_spread(&k, &riesz(1.0, d), &g).unwrap() < 1e-6);
    }
}

#[test]
fn weighted_mass_heat() {
    // int G_t(y) |y|^{-1/2} dy = E|N(0,t)|^{-1/2} = (2t)^{-1/4} Gamma(1/4) / sqrt(pi)
    let w = weighted_mass(&KernelSpec::Heat { d: 1 }, &riesz(0.5, 1), 0.3).unwrap();
    let want = (0.6f64).powf(-0.25) * gamma(0.25) / PI.sqrt();
    assert!((w.total_mass - 1.0).abs() < 1e-12);
    assert!(((w.weighted_sup - want) / want).abs() < 1e-6, "{} vs {want}", w.weighted_sup);
}
