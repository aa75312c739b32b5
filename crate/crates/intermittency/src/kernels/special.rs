//! Gamma, Mittag-Leffler, Wright and neutral-fractional functions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{integrate_breaks, QuadOptions};

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

/// `(ln |1/Gamma(x)|, sign)`; the sign is 0 at the poles of Gamma.
pub fn ln_rgamma(x: f64) -> (f64, f64) {
    if x <= 0.0 && x == x.floor() {
        return (f64::NEG_INFINITY, 0.0);
    }
    if x > 0.0 {
        return (-ln_gamma(x), 1.0);
    }
    // 1/Gamma(x) = Gamma(1-x) sin(pi x) / pi
    let s = (PI * x).sin();
    (ln_gamma(1.0 - x) + s.abs().ln() - PI.ln(), s.signum())
}

/// `1/Gamma(x)`, exactly 0 at the poles.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x > 0.0 && x < 170.0 {
        return 1.0 / gamma(x);
    }
    let (l, s) = ln_rgamma(x);
    s * l.exp()
}

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

pub fn bessel_j0(x: f64) -> f64 {
    libm::j0(x)
}

/// Surface area of the unit sphere in R^d.
pub fn sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// Constant `c` with `F^{-1}[|xi|^s](x) = c |x|^{-d-s}` in R^d (as a tempered
/// distribution away from the origin). Vanishes when `s` is an even integer.
pub fn riesz_fourier_constant(d: usize, s: f64) -> f64 {
    let df = d as f64;
    2f64.powf(s) * gamma((df + s) / 2.0) * rgamma(-s / 2.0) / PI.powf(df / 2.0)
}

/// Below this modulus the power series is used for negative arguments.
pub fn ml_switch(beta: f64) -> f64 {
    3f64.powf(beta.min(1.0))
}

fn ml_series(beta: f64, beta2: f64, z: f64) -> Result<f64> {
    if z == 0.0 {
        return Ok(rgamma(beta2));
    }
    let lz = z.abs().ln();
    let neg = z < 0.0;
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut max_term: f64 = 0.0;
    let mut quiet = 0;
    for k in 0..20_000usize {
        let (lr, sg) = ln_rgamma(beta * k as f64 + beta2);
        let mag = (k as f64 * lz + lr).exp();
        let term = if neg && k % 2 == 1 { -sg * mag } else { sg * mag };
        // Kahan summation
        let y = term - comp;
        let tsum = sum + y;
        comp = (tsum - sum) - y;
        sum = tsum;
        max_term = max_term.max(mag);
        let past_peak = (beta * k as f64 + beta2) > 2.0 * z.abs().powf(1.0 / beta) + 2.0;
        if past_peak && mag <= 1e-17 * sum.abs().max(1e-300) {
            quiet += 1;
            if quiet >= 3 {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
        if !sum.is_finite() {
            break;
        }
    }
    Err(Error::UnsupportedParameter(format!(
        "Mittag-Leffler series did not converge at z = {z}"
    )))
}

fn ml_residues(beta: f64, beta2: f64, z: f64) -> f64 {
    let rho = z.abs().powf(1.0 / beta);
    let theta = if z > 0.0 { 0.0 } else { PI };
    let mut acc = 0.0;
    for j in -2i32..=2 {
        let a = theta + 2.0 * PI * j as f64;
        if a.abs() < beta * PI {
            let phi = a / beta;
            let mag = rho.powf(1.0 - beta2) * (rho * phi.cos()).exp();
            acc += mag * (phi * (1.0 - beta2) + rho * phi.sin()).cos() / beta;
        }
    }
    acc
}

fn ml_integral(beta: f64, beta2: f64, z: f64) -> Result<f64> {
    let sb2 = (PI * beta2).sin();
    let sbb = (PI * (beta - beta2)).sin();
    let cb = (PI * beta).cos();
    let f = |r: f64| {
        if r == 0.0 {
            return 0.0;
        }
        let rb = r.powf(beta);
        let den = rb * rb - 2.0 * z * rb * cb + z * z;
        (-r).exp() * r.powf(beta - beta2) * (rb * sb2 + z * sbb) / den
    };
    let upper = 80.0;
    let peak = z.abs().powf(1.0 / beta);
    let mut pts = vec![0.0, 1.0f64.min(upper)];
    if peak > 1.0 && peak < upper {
        pts.push(peak);
    }
    pts.push(upper);
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();
    let out = integrate_breaks(
        f,
        &pts,
        QuadOptions {
            abs_tol: 1e-300,
            rel_tol: 1e-13,
            max_intervals: 3000,
        },
    );
    let scale = out.value.abs().max(1e-300);
    if !out.converged && out.error > 1e-10 * scale {
        return Err(Error::QuadratureNonConvergence {
            what: format!("Mittag-Leffler integral at z = {z}"),
            estimate: out.value,
            error: out.error,
        });
    }
    Ok(out.value / PI + ml_residues(beta, beta2, z))
}

/// Algebraic expansion `-sum_k z^{-k} / Gamma(beta2 - beta k)` for large `|z|`;
/// `None` when it cannot reach full double accuracy.
fn ml_asymptotic(beta: f64, beta2: f64, z: f64) -> Option<f64> {
    let rho = z.abs().powf(1.0 / beta);
    if rho < 40.0 {
        return None;
    }
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    let mut converged = false;
    for k in 1..200usize {
        let y = beta2 - beta * k as f64;
        let term = -rgamma(y) * z.powi(-(k as i32));
        // terms vanish near the poles of Gamma, so truncation is decided on
        // the envelope Gamma(1 - y) / pi of |1/Gamma(y)|
        let env = if y <= 0.0 {
            (ln_gamma(1.0 - y) - PI.ln() - k as f64 * z.abs().ln()).exp()
        } else {
            term.abs()
        };
        if env > last {
            break;
        }
        sum += term;
        last = env;
        if env <= 1e-17 * sum.abs() {
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }
    let res = ml_residues(beta, beta2, z);
    if res.abs() > 1e-17 * sum.abs() && res != 0.0 {
        // exponential contributions still visible
        if z > 0.0 {
            return None;
        }
        let rho_cos = rho * (PI / beta).cos();
        if rho_cos > -40.0 {
            return None;
        }
    }
    Some(sum + res)
}

/// Two-parameter Mittag-Leffler function `E_{beta,beta2}(z)` for real `z`.
///
/// Power series near the origin; for larger `|z|` the Hankel-contour integral
/// collapsed onto the negative axis plus the residues at `z^{1/beta}`, and the
/// algebraic expansion once the exponentially small parts are below rounding.
pub fn mittag_leffler(beta: f64, beta2: f64, z: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 2.0) || !(beta2 > 0.0) || !z.is_finite() {
        return Err(Error::UnsupportedParameter(format!(
            "Mittag-Leffler needs 0 < beta < 2 and beta' > 0, got ({beta}, {beta2})"
        )));
    }
    if beta == 1.0 && beta2 == 1.0 {
        return Ok(z.exp());
    }
    if z == 0.0 {
        return Ok(rgamma(beta2));
    }
    let zs = ml_switch(beta);
    if z >= 0.0 && z.powf(1.0 / beta) <= 30.0 || z.abs() <= zs {
        return ml_series(beta, beta2, z);
    }
    if beta2 >= 1.0 + beta {
        // the collapsed contour integral diverges at r = 0; shift down by
        // E_{b,b2}(z) = (E_{b,b2-b}(z) - 1/Gamma(b2-b)) / z
        let lower = mittag_leffler(beta, beta2 - beta, z)?;
        return Ok((lower - rgamma(beta2 - beta)) / z);
    }
    if beta == 1.0 && z < 0.0 {
        // pole on the cut: E_{1,b}(z) = (E_{1,b-1}(z) - 1/Gamma(b-1)) / z down to b in (0,1]
        if beta2 > 1.0 {
            let lower = mittag_leffler(1.0, beta2 - 1.0, z)?;
            return Ok((lower - rgamma(beta2 - 1.0)) / z);
        }
        return Err(Error::UnsupportedParameter(format!(
            "E_(1,{beta2}) at z = {z} is outside the implemented range"
        )));
    }
    if let Some(v) = ml_asymptotic(beta, beta2, z) {
        return Ok(v);
    }
    ml_integral(beta, beta2, z)
}

/// Largest disagreement between the series and the far-field evaluation of
/// `E_{beta,beta2}` on the band `[-zs, -zs/2]`, relative to `max(1, |E|)`.
pub fn mittag_leffler_overlap_gap(beta: f64, beta2: f64) -> Result<f64> {
    let zs = ml_switch(beta);
    let mut gap: f64 = 0.0;
    for i in 0..=8 {
        let z = -zs * (0.5 + 0.5 * i as f64 / 8.0);
        let s = ml_series(beta, beta2, z)?;
        let f = if beta == 1.0 {
            s
        } else {
            ml_integral(beta, beta2, z)?
        };
        gap = gap.max((s - f).abs() / s.abs().max(1e-3));
    }
    Ok(gap)
}

/// Checks the switch point of the Mittag-Leffler evaluation for one parameter pair.
pub fn validate_ml_switch(beta: f64, beta2: f64) -> Result<()> {
    let gap = mittag_leffler_overlap_gap(beta, beta2)?;
    if gap > 1e-7 {
        return Err(Error::SwitchOverlap(gap));
    }
    Ok(())
}

/// Wright function `phi(a, b; z) = sum_k z^k / (k! Gamma(a k + b))`, `a > -1`.
pub fn wright(a: f64, b: f64, z: f64) -> Result<f64> {
    if !(a > -1.0) || !b.is_finite() || !z.is_finite() {
        return Err(Error::UnsupportedParameter(format!(
            "Wright function needs a > -1, got a = {a}"
        )));
    }
    if z == 0.0 {
        return Ok(rgamma(b));
    }
    let lz = z.abs().ln();
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut max_term: f64 = 0.0;
    let mut quiet = 0;
    for k in 0..20_000usize {
        let kf = k as f64;
        let (lr, sg) = ln_rgamma(a * kf + b);
        let mag = if sg == 0.0 {
            0.0
        } else {
            (kf * lz - ln_gamma(kf + 1.0) + lr).exp()
        };
        let sign = if z < 0.0 && k % 2 == 1 { -sg } else { sg };
        let term = sign * mag;
        let y = term - comp;
        let tsum = sum + y;
        comp = (tsum - sum) - y;
        sum = tsum;
        max_term = max_term.max(mag);
        // the log-magnitude of the terms is eventually decreasing
        let (lr_next, _) = ln_rgamma(a * (kf + 1.0) + b);
        let decreasing = lz - (kf + 1.0).ln() + (lr_next - lr).min(50.0) < 0.0;
        if k > 4 && decreasing && mag <= 1e-17 * sum.abs().max(1e-300) {
            quiet += 1;
            if quiet >= 4 {
                if max_term > 1e8 * sum.abs() {
                    return Err(Error::UnsupportedParameter(format!(
                        "Wright series cancels too strongly at z = {z}"
                    )));
                }
                return Ok(sum);
            }
        } else if mag > 0.0 {
            quiet = 0;
        }
    }
    Err(Error::UnsupportedParameter(format!(
        "Wright series did not converge at z = {z}"
    )))
}

/// Density of neutral-fractional diffusion,
/// `(1/pi) |x|^{alpha-1} sin(alpha pi/2) / (1 + 2|x|^alpha cos(alpha pi/2) + |x|^{2 alpha})`.
pub fn neutral_fractional_density(alpha: f64, x: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::UnsupportedParameter(format!(
            "neutral-fractional density needs alpha in (0,2], got {alpha}"
        )));
    }
    if alpha == 2.0 {
        return Ok(0.0);
    }
    let r = x.abs();
    if r == 0.0 {
        if alpha < 1.0 {
            return Err(Error::SingularPoint("x = 0 with alpha < 1".into()));
        }
        if alpha > 1.0 {
            return Ok(0.0);
        }
    }
    let ra = r.powf(alpha);
    let h = alpha * PI / 2.0;
    Ok(r.powf(alpha - 1.0) * h.sin() / (1.0 + 2.0 * ra * h.cos() + ra * ra) / PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rgamma_poles() {
        assert_eq!(rgamma(0.0), 0.0);
        assert_eq!(rgamma(-3.0), 0.0);
        assert!((rgamma(-0.5) - 1.0 / (-2.0 * PI.sqrt())).abs() < 1e-14);
        assert!((rgamma(0.5) - 1.0 / PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ml_exp() {
        assert!((mittag_leffler(1.0, 1.0, -1.0).unwrap() - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn ml_half_is_erfc() {
        // E_{1/2}(-x) = exp(x^2) erfc(x)
        for &x in &[0.5, 1.0, 2.0, 5.0, 10.0] {
            let want = (x * x as f64).exp() * erfc(x);
            let got = mittag_leffler(0.5, 1.0, -x).unwrap();
            assert!((got - want).abs() <= 1e-10 * want, "x = {x}: {got} vs {want}");
        }
    }

    #[test]
    fn ml_two_is_cos() {
        // E_{2}(-x^2) = cos x; beta close to 2 stays close to it
        let got = mittag_leffler(1.999, 1.0, -4.0).unwrap();
        assert!((got - 2f64.cos()).abs() < 5e-3);
    }

    #[test]
    fn overlap_band() {
        for &b in &[0.3, 0.5, 0.8, 0.95, 1.05, 1.2, 1.5, 1.8] {
            let g = mittag_leffler_overlap_gap(b, b).unwrap();
            assert!(g < 1e-7, "beta = {b}: gap {g}");
        }
    }

    #[test]
    fn wright_exp() {
        assert!((wright(0.0, 1.0, 1.0).unwrap() - std::f64::consts::E).abs() < 1e-14);
        assert!((wright(0.7, 1.3, 0.0).unwrap() - rgamma(1.3)).abs() < 1e-15);
    }

    #[test]
    fn neutral_closed_form() {
        let want = (0.5f64.sqrt()) / (2.0 - 2f64.sqrt()) / PI;
        assert!((neutral_fractional_density(1.5, 1.0).unwrap() - want).abs() < 1e-15);
        assert!(neutral_fractional_density(2.0, 0.7).unwrap().abs() < 1e-16);
    }
}
