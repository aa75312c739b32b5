//! Inverse Fourier transforms of radial functions on R^d, d = 1, 2, 3.

use std::f64::consts::PI;

use super::special::bessel_j0;
use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_breaks, integrate_to_inf, sum_panels, QuadOptions};

/// `(2 pi)^{-d} int_{R^d} ghat(|xi|) e^{i xi.x} dxi` for `|x| = r`.
///
/// `scale` is the frequency beyond which `ghat` is essentially in its tail;
/// it only guides where quadrature panels start.
pub fn radial_inverse<F: Fn(f64) -> f64>(ghat: F, d: usize, r: f64, scale: f64) -> Result<f64> {
    if !(1..=3).contains(&d) {
        return Err(Error::UnsupportedParameter(format!(
            "radial Fourier inversion implemented for d <= 3, got {d}"
        )));
    }
    let opts = QuadOptions::tol(1e-300, 1e-12);
    let norm = match d {
        1 => 1.0 / PI,
        2 => 1.0 / (2.0 * PI),
        _ => 1.0 / (2.0 * PI * PI),
    };
    let radial_weight = |xi: f64| match d {
        1 => 1.0,
        2 => xi,
        _ => xi * xi,
    };
    // size of the integrand near the origin, used as the absolute tolerance scale
    let head = integrate(
        |xi| (ghat(xi) * radial_weight(xi)).abs(),
        0.0,
        scale,
        QuadOptions::tol(1e-300, 1e-6),
    );
    let l1 = head.value;
    if r == 0.0 {
        let a = integrate(|xi| ghat(xi) * radial_weight(xi), 0.0, scale, opts)
            .into_result("radial inverse, head")?;
        let b = integrate_to_inf(|xi| ghat(xi) * radial_weight(xi), scale, opts)
            .into_result("radial inverse, tail")?;
        return Ok(norm * (a + b));
    }
    let abs_tol = 2e-13 * l1.max(1e-300);
    let weight = |xi: f64| -> f64 {
        match d {
            1 => (xi * r).cos(),
            2 => bessel_j0(xi * r) * xi,
            _ => {
                let u = xi * r;
                if u == 0.0 {
                    xi * xi
                } else {
                    u.sin() / r * xi
                }
            }
        }
    };
    // zeros of the oscillating weight, in units of 1/r
    let zero = |k: usize| -> f64 {
        let kf = k as f64;
        match d {
            1 => (kf + 0.5) * PI,
            2 => {
                let b = (kf + 0.75) * PI;
                b + 1.0 / (8.0 * b)
            }
            _ => (kf + 1.0) * PI,
        }
    };
    // the first panel covers all zeros below `scale` so that slowly varying
    // parts of ghat are not chopped into many tiny panels
    let mut k0 = 0usize;
    while zero(k0) / r < scale && k0 < 100_000 {
        k0 += 1;
    }
    let first_end = zero(k0) / r;
    let mut breaks: Vec<f64> = vec![0.0];
    let n_inner = k0.min(2000);
    for j in 0..n_inner {
        breaks.push(zero(j * k0 / n_inner.max(1)) / r);
    }
    breaks.push(first_end);
    let mut b = scale / 64.0;
    while b < first_end {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup();
    let first = integrate_breaks(
        |xi| ghat(xi) * weight(xi),
        &breaks,
        QuadOptions {
            abs_tol,
            rel_tol: 1e-13,
            max_intervals: 20_000,
        },
    );
    if !first.converged {
        return Err(Error::QuadratureNonConvergence {
            what: "radial inverse Fourier, first panel".into(),
            estimate: first.value,
            error: first.error,
        });
    }
    let mut err_acc: Option<Error> = None;
    let tail = sum_panels(
        |k| {
            let a = zero(k0 + k) / r;
            let b = zero(k0 + k + 1) / r;
            let out = integrate(
                |xi| ghat(xi) * weight(xi),
                a,
                b,
                QuadOptions::tol(abs_tol * 1e-2, 1e-13),
            );
            if !out.converged && err_acc.is_none() && out.error > abs_tol {
                err_acc = Some(Error::QuadratureNonConvergence {
                    what: "radial inverse Fourier, panel".into(),
                    estimate: out.value,
                    error: out.error,
                });
            }
            out.value
        },
        abs_tol,
        1e-11,
        4000,
    )?;
    if let Some(e) = err_acc {
        return Err(e);
    }
    Ok(norm * (first.value + tail))
}
