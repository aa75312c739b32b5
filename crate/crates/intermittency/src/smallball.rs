//! Numerical checks of the small-ball lower bound
//! `inf_{y in B_eps(x)} int_{B_eps(x)} G_t(z - y) dz >= C t^a` for `t <= eps^b`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{ball_mass, sphere_in_ball, BallMassQuery, KernelSpec};
use crate::quad::{integrate, integrate_breaks, integrate_to_inf, QuadOptions};

/// Fractions of `eps^b` at which `t` is sampled.
pub const T_FRACTIONS: [f64; 3] = [1.0, 0.5, 0.25];

/// Ratio growth across the `t` grid above which the exponent `a` is rejected.
pub const SLOPE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallBallReport {
    pub kernel: String,
    pub a: f64,
    pub b: f64,
    pub grid: Vec<(f64, f64)>,
    /// Infimum over `y` of `mass / t^a` at each grid point.
    pub ratios: Vec<f64>,
    pub worst_ratio: f64,
    /// `(eps, t, |y - x|)` where the worst ratio occurs.
    pub worst_at: (f64, f64, f64),
    /// Ratio at the smallest `t` divided by the ratio at the largest `t`.
    pub trend: f64,
    pub slope_mismatch: bool,
    pub threshold: f64,
    pub passed: bool,
    pub y_samples: usize,
}

fn check_ab(a: f64, b: f64) -> Result<()> {
    if a > -1.0 && b > 0.0 {
        Ok(())
    } else {
        Err(Error::ConstraintViolated(format!("need a > -1 and b > 0, got ({a}, {b})")))
    }
}

/// Offsets `|y - x|` on `[0, eps]`, both ends included. The kernels are
/// isotropic, so the ball mass depends on `y` only through this distance.
fn offsets(eps: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|k| eps * k as f64 / (n - 1) as f64).collect()
}

fn verify_with<M>(label: String, a: f64, b: f64, eps_grid: &[f64], y_per_eps: usize, threshold: f64, mass: M) -> Result<SmallBallReport>
where
    M: Fn(f64, f64, f64) -> Result<f64>,
{
    check_ab(a, b)?;
    if eps_grid.is_empty() || y_per_eps == 0 {
        return Err(Error::InsufficientGrid("empty eps or y grid".into()));
    }
    let mut grid = Vec::new();
    let mut ratios = Vec::new();
    let mut worst = f64::INFINITY;
    let mut worst_at = (0.0, 0.0, 0.0);
    let mut y_samples = 0;
    for &eps in eps_grid {
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps = {eps} must be positive")));
        }
        if eps > 1.0 {
            return Err(Error::RadiusOutOfRange(eps));
        }
        for &s in &T_FRACTIONS {
            let t = eps.powf(b) * s;
            let mut r_min = f64::INFINITY;
            for delta in offsets(eps, y_per_eps) {
                let r = mass(t, delta, eps)? / t.powf(a);
                y_samples += 1;
                if r < r_min {
                    r_min = r;
                }
                if r < worst {
                    worst = r;
                    worst_at = (eps, t, delta);
                }
            }
            grid.push((eps, t));
            ratios.push(r_min);
        }
    }
    let (i_lo, _) = grid
        .iter()
        .enumerate()
        .min_by(|x, y| x.1 .1.total_cmp(&y.1 .1))
        .unwrap();
    let (i_hi, _) = grid
        .iter()
        .enumerate()
        .max_by(|x, y| x.1 .1.total_cmp(&y.1 .1))
        .unwrap();
    let trend = ratios[i_lo] / ratios[i_hi];
    let slope_mismatch = grid[i_lo].1 < grid[i_hi].1 && !(trend <= SLOPE_FACTOR && trend >= 1.0 / SLOPE_FACTOR);
    Ok(SmallBallReport {
        kernel: label,
        a,
        b,
        grid,
        ratios,
        worst_ratio: worst,
        worst_at,
        trend,
        slope_mismatch,
        threshold,
        passed: worst >= threshold && !slope_mismatch,
        y_samples,
    })
}

/// Small-ball check for the ball centered at the origin.
pub fn verify_small_ball(spec: &KernelSpec, a: f64, b: f64, eps_grid: &[f64], y_per_eps: usize, threshold: f64) -> Result<SmallBallReport> {
    verify_small_ball_at(spec, &vec![0.0; spec.dim()], a, b, eps_grid, y_per_eps, threshold)
}

/// Small-ball check for the ball centered at `x`; the offsets `y - x` point
/// along the first axis.
pub fn verify_small_ball_at(
    spec: &KernelSpec,
    x: &[f64],
    a: f64,
    b: f64,
    eps_grid: &[f64],
    y_per_eps: usize,
    threshold: f64,
) -> Result<SmallBallReport> {
    spec.validate()?;
    if x.len() != spec.dim() {
        return Err(Error::InvalidParameter("center dimension mismatch".into()));
    }
    verify_with(spec.label(), a, b, eps_grid, y_per_eps, threshold, |t, delta, eps| {
        let mut y = x.to_vec();
        y[0] += delta;
        ball_mass(spec, &BallMassQuery::new(t, y, x.to_vec(), eps))
    })
}

/// Two-sided stable envelope `min(t^{-d/alpha}, t / |z|^{d+alpha})`.
pub fn nash_envelope(d: usize, alpha: f64, t: f64, r: f64) -> f64 {
    let core = t.powf(-(d as f64) / alpha);
    if r == 0.0 {
        core
    } else {
        core.min(t / r.powf(d as f64 + alpha))
    }
}

/// Small-ball check run on the envelope function instead of the kernel.
pub fn verify_small_ball_envelope(
    d: usize,
    alpha: f64,
    a: f64,
    b: f64,
    eps_grid: &[f64],
    y_per_eps: usize,
    threshold: f64,
) -> Result<SmallBallReport> {
    if d == 0 || d > 3 || !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::UnsupportedParameter(format!("envelope with d = {d}, alpha = {alpha}")));
    }
    let label = format!("nash_envelope(d={d},alpha={alpha})");
    verify_with(label, a, b, eps_grid, y_per_eps, threshold, |t, delta, eps| {
        let lo = (delta - eps).max(0.0);
        let hi = delta + eps;
        let knee = t.powf(1.0 / alpha);
        let mut pts = vec![lo];
        for p in [eps - delta, knee] {
            if p > lo && p < hi {
                pts.push(p);
            }
        }
        pts.push(hi);
        pts.sort_by(f64::total_cmp);
        integrate_breaks(
            |rho| {
                let s = sphere_in_ball(d, rho, delta, eps);
                if s == 0.0 {
                    0.0
                } else {
                    s * nash_envelope(d, alpha, t, rho)
                }
            },
            &pts,
            QuadOptions::tol(1e-15, 1e-11),
        )
        .into_result("envelope ball mass")
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimPoint {
    pub delta: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `(lhs - rhs) / lhs`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimReport {
    pub nu: f64,
    pub c: f64,
    pub c_nu: f64,
    pub points: Vec<ClaimPoint>,
    pub min_margin: f64,
    /// Smallest `c` for which the inequality holds on the whole grid.
    pub c_required: f64,
    pub passed: bool,
}

/// Checks `int_0^delta exp(-r^nu/2) dr >= c_nu^{-1} exp(-c / delta^nu)` with
/// `c = (nu+1)^2/(4 nu) (1 + 1e-6)` and `c_nu int_0^inf exp(-r^nu/2) dr = 1`.
pub fn exp_lower_claim_check(nu: f64, delta_grid: &[f64]) -> Result<ClaimReport> {
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("nu = {nu} must be positive")));
    }
    let f = |r: f64| (-0.5 * r.powf(nu)).exp();
    let opts = QuadOptions::tol(1e-16, 1e-13);
    let knee = 2f64.powf(1.0 / nu);
    let total = integrate(f, 0.0, knee, opts).into_result("claim normalization")?
        + integrate_to_inf(f, knee, opts).into_result("claim normalization tail")?;
    let c_nu = 1.0 / total;
    let c = (nu + 1.0).powi(2) / (4.0 * nu) * (1.0 + 1e-6);
    let mut points = Vec::new();
    for &delta in delta_grid {
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!("delta = {delta} must be positive")));
        }
        // the complement is more accurate once most of the mass is inside
        let lhs = if delta > knee {
            total - integrate_to_inf(f, delta, opts).into_result("claim tail")?
        } else {
            integrate(f, 0.0, delta, opts).into_result("claim integral")?
        };
        let rhs = total * (-c / delta.powf(nu)).exp();
        points.push(ClaimPoint {
            delta,
            lhs,
            rhs,
            margin: (lhs - rhs) / lhs,
        });
    }
    let min_margin = points.iter().map(|p| p.margin).fold(f64::INFINITY, f64::min);
    let c_required = points
        .iter()
        .map(|p| -p.delta.powf(nu) * (p.lhs / total).ln())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ClaimReport {
        nu,
        c,
        c_nu,
        points,
        min_margin,
        c_required,
        passed: min_margin > 0.0,
    })
}

/// Infimum over `y` in the ball of the ball mass, on `y_per_eps` offsets.
pub fn inf_ball_mass(spec: &KernelSpec, t: f64, eps: f64, y_per_eps: usize) -> Result<f64> {
    let d = spec.dim();
    let mut m = f64::INFINITY;
    for delta in offsets(eps, y_per_eps) {
        let mut y = vec![0.0; d];
        y[0] = delta;
        m = m.min(ball_mass(spec, &BallMassQuery::new(t, y, vec![0.0; d], eps))?);
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpFit {
    pub c1: f64,
    pub c2: f64,
    pub residual_rms: f64,
    pub used: usize,
    /// Rows with zero mass, left out of the fit.
    pub excluded: Vec<usize>,
    /// True when the kernel has no such exponential form and the fit is
    /// reported for information only.
    pub informational: bool,
}

/// Least-squares fit of `ln(mass / t^a) = ln C1 - C2 t / eps^b` to rows
/// `(t, eps, mass)`.
pub fn exponential_form_fit(spec: &KernelSpec, table: &[(f64, f64, f64)]) -> Result<ExpFit> {
    let (a, b) = spec.small_ball_exponents();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = Vec::new();
    for (i, &(t, eps, m)) in table.iter().enumerate() {
        if m > 0.0 {
            xs.push(t / eps.powf(b));
            ys.push((m / t.powf(a)).ln());
        } else {
            excluded.push(i);
        }
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::InsufficientGrid(format!("{n} usable rows")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let icept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - icept - slope * x).powi(2)).sum();
    Ok(ExpFit {
        c1: icept.exp(),
        c2: -slope,
        residual_rms: (rss / nf).sqrt(),
        used: n,
        excluded,
        informational: matches!(spec, KernelSpec::Wave { d: 3 }),
    })
}

/// Closed-form `int_0^inf exp(-r^nu/2) dr = 2^{1/nu} Gamma(1 + 1/nu)`.
pub fn claim_normalization(nu: f64) -> f64 {
    2f64.powf(1.0 / nu) * crate::kernels::special::gamma(1.0 + 1.0 / nu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_matches_closed_form() {
        let r = exp_lower_claim_check(2.0, &[1.0]).unwrap();
        assert!((1.0 / r.c_nu - claim_normalization(2.0)).abs() < 1e-12);
    }

    #[test]
    fn wrong_a_is_a_slope_mismatch() {
        let h = KernelSpec::Heat { d: 1 };
        let eps: Vec<f64> = (0..6).map(|k| 10f64.powf(-k as f64 / 5.0)).collect();
        let r = verify_small_ball(&h, 1.0, 2.0, &eps, 5, 0.1).unwrap();
        assert!(r.slope_mismatch && !r.passed);
    }
}
