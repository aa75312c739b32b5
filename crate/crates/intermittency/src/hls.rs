//! The mass quantity `int |G_t^(xi - eta)|^2 mu(d xi)` and the weighted mass
//! `sup_x int G_t(x - y) Lambda(y) dy`, with power-law fits of their `t`
//! dependence.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::special::sphere_area;
use crate::kernels::{kernel_fourier_radial, DensityEval, KernelSpec};
use crate::noise::{spectral_density, total_lambda, NoiseSpec, SpaceCovariance, SpectralKind};
use crate::quad::{integrate_breaks, integrate_to_inf, sum_panels, QuadOptions};

/// Number of shifts tried for the supremum over `eta` of the wave kernel.
pub const WAVE_ETA_POINTS: usize = 32;

const OPTS: QuadOptions = QuadOptions {
    abs_tol: 1e-300,
    rel_tol: 1e-10,
    max_intervals: 8000,
};

fn isotropic(noise: &NoiseSpec) -> bool {
    match &noise.space {
        SpaceCovariance::Riesz { .. } | SpaceCovariance::DeltaD1 => true,
        SpaceCovariance::ProductRL { lambdas } => lambdas.len() == 1,
        SpaceCovariance::Spectral { density } => match density {
            SpectralKind::RieszHat { .. } => true,
            SpectralKind::ProductHat { lambdas } => lambdas.len() == 1,
        },
    }
}

/// Spectral density as a function of `|xi|`.
fn mu_radial(noise: &NoiseSpec, d: usize) -> impl Fn(f64) -> f64 + '_ {
    move |r: f64| {
        let mut xi = vec![0.0; d];
        xi[0] = r.abs();
        spectral_density(&noise.space, &xi).unwrap_or(f64::INFINITY)
    }
}

/// Frequency scale of `G_t`.
fn freq_scale(spec: &KernelSpec, t: f64) -> f64 {
    1.0 / spec.spatial_scale(t)
}

/// `int_a^inf h(u) (1 - cos(2 t (u - eta))) / 2 du` with `a` on a zero of the cosine.
fn wave_tail<H: Fn(f64) -> f64>(h: H, a: f64, t: f64) -> Result<f64> {
    let smooth = integrate_to_inf(|u| 0.5 * h(u), a, OPTS).into_result("wave tail")?;
    let w = PI / (2.0 * t);
    let osc = sum_panels(
        |k| {
            let lo = a + k as f64 * w;
            integrate_breaks(|u| -0.5 * h(u) * (2.0 * t * (u - a) + PI / 2.0).cos(), &[lo, lo + w], OPTS).value
        },
        1e-300,
        1e-11,
        200_000,
    )?;
    Ok(smooth + osc)
}

fn check_spectral(spec: &KernelSpec, noise: &NoiseSpec, t: f64) -> Result<usize> {
    spec.validate()?;
    noise.validate()?;
    if !(t > 0.0) {
        return Err(Error::NonpositiveTime(t));
    }
    let d = spec.dim();
    if noise.space.dim() != d {
        return Err(Error::InvalidParameter("noise and kernel dimensions differ".into()));
    }
    if !isotropic(noise) {
        return Err(Error::UnsupportedParameter(
            "the spectral mass is computed for isotropic spectral densities".into(),
        ));
    }
    Ok(d)
}

/// `int |G_t^(xi - eta)|^2 mu(xi) d xi` for a shift `eta` along the first axis;
/// shifts are supported on the line only.
pub fn hls_mass_spectral(spec: &KernelSpec, noise: &NoiseSpec, t: f64, eta: f64) -> Result<f64> {
    let d = check_spectral(spec, noise, t)?;
    if d > 1 && eta != 0.0 {
        return Err(Error::UnsupportedParameter("frequency shifts need d = 1".into()));
    }
    let mu = mu_radial(noise, d);
    let s = freq_scale(spec, t);
    let wave = matches!(spec, KernelSpec::Wave { .. });
    let err = std::cell::RefCell::new(None);
    let g2 = |u: f64| match kernel_fourier_radial(spec, t, u.abs()) {
        Ok(v) => v * v,
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    // non-oscillatory factor of the wave integrand: |G^|^2 = sin^2 / u^2
    let core_span = if wave { 40.0 * PI / t } else { 60.0 * s };
    let value = if d == 1 {
        let (lo, hi) = (eta.min(0.0) - core_span, eta.max(0.0) + core_span);
        let mut pts = vec![lo, hi, 0.0, eta];
        for k in [-1.0, 1.0] {
            pts.push(k / s);
            pts.push(eta + k / s);
        }
        pts.retain(|p| *p >= lo && *p <= hi);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let core = integrate_breaks(|x| g2(x - eta) * mu(x), &pts, OPTS).into_result("spectral mass")?;
        let tails = if wave {
            // right tail in u = xi, left tail mirrored with eta -> -eta
            let right = align(hi, eta, t);
            let left = align(-lo, -eta, t);
            let mid_r = integrate_breaks(|x| g2(x - eta) * mu(x), &[hi, right], OPTS).value;
            let mid_l = integrate_breaks(|x| g2(-x - eta) * mu(x), &[-lo, left], OPTS).value;
            mid_r
                + mid_l
                + wave_tail(|x| mu(x) / (x - eta).powi(2), right, t)?
                + wave_tail(|x| mu(x) / (x + eta).powi(2), left, t)?
        } else {
            integrate_to_inf(|x| g2(x - eta) * mu(x), hi, OPTS).into_result("spectral tail")?
                + integrate_to_inf(|x| g2(-x - eta) * mu(x), -lo, OPTS).into_result("spectral tail")?
        };
        core + tails
    } else {
        let area = sphere_area(d);
        let dm1 = d as i32 - 1;
        let f = |r: f64| area * r.powi(dm1) * g2(r) * mu(r);
        let hi = core_span;
        let pts: Vec<f64> = [0.0, 0.01 / s, 0.1 / s, 1.0 / s, hi].into_iter().filter(|p| *p <= hi).collect();
        let core = integrate_breaks(f, &pts, OPTS).into_result("spectral mass")?;
        let tail = if wave {
            let right = align(hi, 0.0, t);
            integrate_breaks(f, &[hi, right], OPTS).value
                + wave_tail(|r| area * r.powi(dm1) * mu(r) / (r * r), right, t)?
        } else {
            integrate_to_inf(f, hi, OPTS).into_result("spectral tail")?
        };
        core + tail
    };
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(value)
}

/// Smallest `a >= x` with `cos(2 t (a - eta)) = 0`.
fn align(x: f64, eta: f64, t: f64) -> f64 {
    let k = ((2.0 * t * (x - eta) - PI / 2.0) / PI).ceil();
    (eta + (PI / 2.0 + k * PI) / (2.0 * t)).max(x)
}

/// Supremum over shifts: `eta = 0` for kernels whose transform decreases in
/// `|xi|`, the best of `WAVE_ETA_POINTS` shifts `k t^{-1/b}` for the wave kernel.
pub fn hls_mass_sup(spec: &KernelSpec, noise: &NoiseSpec, t: f64) -> Result<(f64, f64)> {
    if !matches!(spec, KernelSpec::Wave { d: 1 }) {
        return Ok((hls_mass_spectral(spec, noise, t, 0.0)?, 0.0));
    }
    let (_, b) = spec.small_ball_exponents();
    let step = t.powf(-1.0 / b);
    let mut best = (f64::NEG_INFINITY, 0.0);
    for k in 0..WAVE_ETA_POINTS {
        let eta = k as f64 * step;
        let v = hls_mass_spectral(spec, noise, t, eta)?;
        if v > best.0 {
            best = (v, eta);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedMass {
    pub total_mass: f64,
    pub weighted_sup: f64,
    pub argsup: f64,
}

/// `(int G_t, sup_x int G_t(x - y) Lambda(y) dy)`, the supremum over a grid of
/// points `x = k s / 4` on the first axis, `s` the spatial scale of `G_t`.
/// Off the line only `x = 0` is used.
pub fn weighted_mass(spec: &KernelSpec, noise: &NoiseSpec, t: f64) -> Result<WeightedMass> {
    spec.validate()?;
    noise.validate()?;
    if !(t > 0.0) {
        return Err(Error::NonpositiveTime(t));
    }
    let d = spec.dim();
    if noise.space.dim() != d {
        return Err(Error::InvalidParameter("noise and kernel dimensions differ".into()));
    }
    let total_mass = spec.total_mass(t);
    let lambda = match &noise.space {
        SpaceCovariance::Riesz { lambda, .. } => *lambda,
        SpaceCovariance::ProductRL { lambdas } if lambdas.len() == 1 => lambdas[0],
        SpaceCovariance::DeltaD1 => {
            let g = DensityEval::new(spec)?;
            return Ok(WeightedMass {
                total_mass,
                weighted_sup: g.radial(t, 0.0),
                argsup: 0.0,
            });
        }
        _ => return Err(Error::UnsupportedParameter("weighted mass needs a pointwise isotropic covariance".into())),
    };
    if let KernelSpec::Wave { d: 3 } = spec {
        return Ok(WeightedMass {
            total_mass,
            weighted_sup: t.powf(1.0 - lambda),
            argsup: 0.0,
        });
    }
    let g = DensityEval::new(spec)?;
    let s = spec.spatial_scale(t);
    let compact = matches!(spec, KernelSpec::Wave { .. });
    if d > 1 {
        let area = sphere_area(d);
        let dm1 = d as i32 - 1;
        let f = |r: f64| area * r.powi(dm1) * r.powf(-lambda) * g.radial(t, r);
        let v = if compact {
            integrate_breaks(f, &[0.0, 0.5 * t, t], OPTS).into_result("weighted mass")?
        } else {
            integrate_breaks(f, &[0.0, s, 4.0 * s], OPTS).into_result("weighted mass")?
                + integrate_to_inf(f, 4.0 * s, OPTS).into_result("weighted mass tail")?
        };
        return Ok(WeightedMass {
            total_mass,
            weighted_sup: v,
            argsup: 0.0,
        });
    }
    let mut best = (f64::NEG_INFINITY, 0.0);
    for k in 0..=8 {
        let x = k as f64 * s / 4.0;
        let f = |y: f64| y.abs().powf(-lambda) * g.radial(t, (x - y).abs());
        let v = if compact {
            let mut pts = vec![x - t, x + t];
            if 0.0 > x - t && 0.0 < x + t {
                pts.insert(1, 0.0);
            }
            integrate_breaks(f, &pts, OPTS).into_result("weighted mass")?
        } else {
            let span = 8.0 * s;
            let mut pts = vec![x - span, x + span, 0.0, x];
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            integrate_breaks(f, &pts, OPTS).into_result("weighted mass")?
                + integrate_to_inf(f, x + span, OPTS).into_result("weighted mass tail")?
                + integrate_to_inf(|y| f(-y), span - x, OPTS).into_result("weighted mass tail")?
        };
        if v > best.0 {
            best = (v, x);
        }
    }
    Ok(WeightedMass {
        total_mass,
        weighted_sup: best.0,
        argsup: best.1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HlsReport {
    pub kernel: String,
    pub noise: NoiseSpec,
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Shift attaining the supremum at each `t`.
    pub eta_argmax: Vec<f64>,
    pub fitted_hbar: f64,
    pub closed_form_hbar: f64,
    pub abs_gap: f64,
}

/// `n` points spaced evenly in `log t` on `[t_min, t_max]`.
pub fn log_grid(t_min: f64, t_max: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![t_min; n];
    }
    let (a, b) = (t_min.ln(), t_max.ln());
    let mut g: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
    g[0] = t_min;
    g[n - 1] = t_max;
    g
}

/// Least-squares slope of `ln value` against `ln t`.
pub fn fit_hbar(spec: &KernelSpec, noise: &NoiseSpec, t_grid: &[f64]) -> Result<HlsReport> {
    if t_grid.len() < 8 {
        return Err(Error::InsufficientGrid(format!("{} points, need at least 8", t_grid.len())));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || !(t_grid[0] > 0.0) {
        return Err(Error::InsufficientGrid("grid must be positive and strictly increasing".into()));
    }
    let span = (t_grid[t_grid.len() - 1] / t_grid[0]).log10();
    if span < 2.0 - 1e-9 {
        return Err(Error::InsufficientGrid(format!("grid spans {span:.3} decades, need 2")));
    }
    if t_grid.iter().any(|&t| t > 0.1 + 1e-12) {
        return Err(Error::InsufficientGrid("all times must be at most 0.1".into()));
    }
    let mut values = Vec::with_capacity(t_grid.len());
    let mut eta_argmax = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let (v, e) = hls_mass_sup(spec, noise, t)?;
        values.push(v);
        eta_argmax.push(e);
    }
    let xs: Vec<f64> = t_grid.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let fitted = sxy / sxx;
    let closed = spec.hbar(total_lambda(&noise.space));
    Ok(HlsReport {
        kernel: spec.label(),
        noise: noise.clone(),
        t_grid: t_grid.to_vec(),
        values,
        eta_argmax,
        fitted_hbar: fitted,
        closed_form_hbar: closed,
        abs_gap: (fitted - closed).abs(),
    })
}

/// Relative spread `(max - min) / mean` of `value(t) / t^hbar` over the grid.
pub fn scaling_spread(spec: &KernelSpec, noise: &NoiseSpec, t_grid: &[f64]) -> Result<f64> {
    let h = spec.hbar(total_lambda(&noise.space));
    let mut r = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        r.push(hls_mass_spectral(spec, noise, t, 0.0)? / t.powf(h));
    }
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    let (lo, hi) = r.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    Ok((hi - lo) / mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::special::gamma;
    use crate::noise::TimeCovariance;

    fn riesz(l: f64, d: usize) -> NoiseSpec {
        NoiseSpec::new(TimeCovariance::WhiteInTime, SpaceCovariance::riesz(l, d)).unwrap()
    }

    #[test]
    fn heat_gamma_integral() {
        let h = KernelSpec::Heat { d: 1 };
        for &t in &[1e-3, 0.1, 1.0] {
            let v = hls_mass_spectral(&h, &riesz(0.5, 1), t, 0.0).unwrap();
            let want = t.powf(-0.25) * gamma(0.25);
            assert!(((v - want) / want).abs() < 1e-8, "{t}: {v} vs {want}");
        }
    }

    #[test]
    fn wave_scaling() {
        let w = KernelSpec::Wave { d: 1 };
        let n = riesz(0.5, 1);
        let v1 = hls_mass_spectral(&w, &n, 1.0, 0.0).unwrap();
        let vt = hls_mass_spectral(&w, &n, 0.01, 0.0).unwrap();
        assert!((vt / (0.01f64.powf(1.5) * v1) - 1.0).abs() < 1e-6);
    }
}
