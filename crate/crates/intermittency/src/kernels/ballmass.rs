//! Mass of a Green's function over a ball, in spherical coordinates around
//! the kernel center.

use std::f64::consts::PI;

use super::{check_time, norm, DensityEval, KernelSpec};
use crate::error::{Error, Result};
use crate::quad::{integrate_breaks, QuadOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct BallMassQuery {
    pub t: f64,
    pub center_y: Vec<f64>,
    pub ball_center_x: Vec<f64>,
    pub radius_eps: f64,
}

impl BallMassQuery {
    pub fn new(t: f64, center_y: Vec<f64>, ball_center_x: Vec<f64>, radius_eps: f64) -> Self {
        BallMassQuery {
            t,
            center_y,
            ball_center_x,
            radius_eps,
        }
    }

    pub fn centered(t: f64, d: usize, radius_eps: f64) -> Self {
        Self::new(t, vec![0.0; d], vec![0.0; d], radius_eps)
    }
}

/// Measure of the part of the sphere `|z| = rho` in R^d lying within `eps` of
/// a point at distance `delta` from the origin.
pub(crate) fn sphere_in_ball(d: usize, rho: f64, delta: f64, eps: f64) -> f64 {
    if d == 1 {
        let mut c = 0.0;
        if (rho - delta).abs() <= eps {
            c += 1.0;
        }
        if (rho + delta).abs() <= eps {
            c += 1.0;
        }
        return c;
    }
    let full = match d {
        2 => 2.0 * PI * rho,
        _ => 4.0 * PI * rho * rho,
    };
    if delta == 0.0 || rho == 0.0 {
        return if rho.max(delta) <= eps { full } else { 0.0 };
    }
    let c = ((rho * rho + delta * delta - eps * eps) / (2.0 * rho * delta)).clamp(-1.0, 1.0);
    match d {
        2 => 2.0 * rho * c.acos(),
        _ => 2.0 * PI * rho * rho * (1.0 - c),
    }
}

/// `int_{B_eps(x)} G_t(z - y) dz`; for the three-dimensional wave kernel the
/// surface measure `sigma_t / (4 pi t)` of the ball is returned.
pub fn ball_mass(spec: &KernelSpec, q: &BallMassQuery) -> Result<f64> {
    check_time(q.t)?;
    spec.validate()?;
    let d = spec.dim();
    if q.center_y.len() != d || q.ball_center_x.len() != d {
        return Err(Error::InvalidParameter("point dimension mismatch".into()));
    }
    if !(q.radius_eps > 0.0) {
        return Err(Error::InvalidParameter(format!("radius {} must be positive", q.radius_eps)));
    }
    if q.radius_eps > 1.0 {
        return Err(Error::RadiusOutOfRange(q.radius_eps));
    }
    let diff: Vec<f64> = q
        .ball_center_x
        .iter()
        .zip(&q.center_y)
        .map(|(a, b)| a - b)
        .collect();
    let delta = norm(&diff);
    let (t, eps) = (q.t, q.radius_eps);
    let lo = (delta - eps).max(0.0);
    let hi = delta + eps;
    let opts = QuadOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-12,
        max_intervals: 4000,
    };
    match *spec {
        KernelSpec::Wave { d: 1 } => {
            let a = (delta - eps).max(-t);
            let b = (delta + eps).min(t);
            Ok(0.5 * (b - a).max(0.0))
        }
        KernelSpec::Wave { d: 2 } => {
            if lo >= t {
                return Ok(0.0);
            }
            // rho = t sin(phi) turns G drho into dphi / (2 pi)
            let phi = |rho: f64| (rho / t).min(1.0).asin();
            let mut pts = vec![phi(lo), phi(hi.min(t))];
            if eps - delta > lo && eps - delta < t {
                pts.insert(1, phi(eps - delta));
            }
            let out = integrate_breaks(
                |p| sphere_in_ball(2, t * p.sin(), delta, eps) / (2.0 * PI),
                &pts,
                opts,
            );
            out.into_result("wave ball mass")
        }
        KernelSpec::Wave { .. } => Ok(sphere_in_ball(3, t, delta, eps) / (4.0 * PI * t)),
        _ => {
            let g = DensityEval::new(spec)?;
            let mut pts = vec![lo];
            if delta < eps && eps - delta > lo {
                pts.push(eps - delta);
            }
            let mid = 0.5 * (lo + hi);
            if mid > *pts.last().unwrap() {
                pts.push(mid);
            }
            pts.push(hi);
            let out = integrate_breaks(
                |rho| {
                    let a = sphere_in_ball(d, rho, delta, eps);
                    if a == 0.0 {
                        0.0
                    } else {
                        a * g.radial(t, rho)
                    }
                },
                &pts,
                opts,
            );
            out.into_result("ball mass")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wave1_identity() {
        let w = KernelSpec::Wave { d: 1 };
        for &(t, e) in &[(0.2, 0.5), (0.7, 0.3), (0.4, 0.4)] {
            let m = ball_mass(&w, &BallMassQuery::centered(t, 1, e)).unwrap();
            assert!((m - f64::min(t, e)).abs() < 1e-15);
        }
    }

    #[test]
    fn wave3_cases() {
        let w = KernelSpec::Wave { d: 3 };
        let m = ball_mass(&w, &BallMassQuery::centered(0.3, 3, 0.5)).unwrap();
        assert!((m - 0.3).abs() < 1e-15);
        let q = BallMassQuery::new(0.5, vec![0.0; 3], vec![0.5, 0.0, 0.0], 0.5);
        assert!((ball_mass(&w, &q).unwrap() - 0.125).abs() < 1e-14);
    }

    #[test]
    fn heat_d1_matches_erf() {
        let h = KernelSpec::Heat { d: 1 };
        let q = BallMassQuery::new(0.3, vec![0.0], vec![0.4], 0.5);
        let s = (2.0 * 0.3f64).sqrt();
        let want = 0.5 * (super::super::special::erf(0.9 / s) - super::super::special::erf(-0.1 / s));
        assert!((ball_mass(&h, &q).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn heat_d3_centered() {
        // P(|N(0, t I_3)| <= e)
        let h = KernelSpec::Heat { d: 3 };
        let (t, e) = (0.2f64, 0.5f64);
        let s = t.sqrt();
        let z = e / s;
        let want = super::super::special::erf(z / 2f64.sqrt())
            - (2.0 / PI).sqrt() * z * (-z * z / 2.0).exp();
        let got = ball_mass(&h, &BallMassQuery::centered(t, 3, e)).unwrap();
        assert!((got - want).abs() < 1e-11, "{got} vs {want}");
    }

    #[test]
    fn wave2_centered() {
        // int_{|x|<e} dx / (2 pi sqrt(t^2 - |x|^2)) = t - sqrt(t^2 - e^2)
        let w = KernelSpec::Wave { d: 2 };
        let got = ball_mass(&w, &BallMassQuery::centered(0.5, 2, 0.3)).unwrap();
        assert!((got - (0.5 - (0.25f64 - 0.09).sqrt())).abs() < 1e-12);
        let all = ball_mass(&w, &BallMassQuery::centered(0.5, 2, 0.9)).unwrap();
        assert!((all - 0.5).abs() < 1e-12);
    }

    #[test]
    fn radius_cap() {
        let h = KernelSpec::Heat { d: 1 };
        assert_eq!(
            ball_mass(&h, &BallMassQuery::centered(0.1, 1, 1.5)),
            Err(Error::RadiusOutOfRange(1.5))
        );
    }
}
