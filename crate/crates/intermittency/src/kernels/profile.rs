//! Tabulated time-one radial profiles of fractional kernels.
//!
//! `g(r)` is computed by Fourier inversion on a logarithmic grid and
//! interpolated with a clamped cubic spline in `(ln r, ln g)`. Beyond the last
//! grid point the large-`r` expansion is used.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use super::frac_profile_direct;
use super::special::{rgamma, riesz_fourier_constant, sphere_area};
use crate::error::{Error, Result};
use crate::quad::{integrate_breaks, QuadOptions};

const R_LO: f64 = 1e-4;
const PER_DECADE: usize = 32;
const MAX_DECADES: usize = 14;

#[derive(Debug)]
pub struct RadialProfile {
    pub d: usize,
    pub alpha: f64,
    pub beta: f64,
    x0: f64,
    h: f64,
    y: Vec<f64>,
    m: Vec<f64>,
    g0: Option<f64>,
    r_hi: f64,
    power_tail: bool,
}

type Key = (usize, u64, u64);

fn cache() -> &'static Mutex<HashMap<Key, Arc<RadialProfile>>> {
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<RadialProfile>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Large-`r` expansion of the profile; returns the sum, the size of the last
/// retained term and `r d/dr` of the sum.
fn asymptotic(d: usize, alpha: f64, beta: f64, r: f64) -> (f64, f64, f64) {
    let mut sum = 0.0;
    let mut dsum = 0.0;
    let mut last = f64::INFINITY;
    for k in 1..40 {
        let s = alpha * k as f64;
        let term = (-0.5f64).powi(k as i32)
            * rgamma(beta * k as f64 + beta)
            * riesz_fourier_constant(d, s)
            * r.powf(-(d as f64) - s);
        if term == 0.0 {
            continue;
        }
        if term.abs() > last {
            break;
        }
        sum += term;
        dsum -= (d as f64 + s) * term;
        last = term.abs();
    }
    (sum, last, dsum)
}

/// Clamped cubic spline slopes on a uniform grid; a missing end slope is
/// taken from a one-sided difference.
fn spline_slopes(y: &[f64], h: f64, end_slope: Option<f64>) -> Vec<f64> {
    let n = y.len();
    let d0 = (-11.0 * y[0] + 18.0 * y[1] - 9.0 * y[2] + 2.0 * y[3]) / (6.0 * h);
    let dn = end_slope.unwrap_or(
        (11.0 * y[n - 1] - 18.0 * y[n - 2] + 9.0 * y[n - 3] - 2.0 * y[n - 4]) / (6.0 * h),
    );
    // tridiagonal system for the first derivatives
    let mut a = vec![1.0; n];
    let mut b = vec![4.0; n];
    let mut c = vec![1.0; n];
    let mut r = vec![0.0; n];
    b[0] = 1.0;
    c[0] = 0.0;
    r[0] = d0;
    a[n - 1] = 0.0;
    b[n - 1] = 1.0;
    r[n - 1] = dn;
    for i in 1..n - 1 {
        r[i] = 3.0 * (y[i + 1] - y[i - 1]) / h;
    }
    for i in 1..n {
        let w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        r[i] -= w * r[i - 1];
    }
    let mut m = vec![0.0; n];
    m[n - 1] = r[n - 1] / b[n - 1];
    for i in (0..n - 1).rev() {
        m[i] = (r[i] - c[i] * m[i + 1]) / b[i];
    }
    m
}

impl RadialProfile {
    pub fn cached(d: usize, alpha: f64, beta: f64) -> Result<Arc<Self>> {
        let key = (d, alpha.to_bits(), beta.to_bits());
        if let Some(p) = cache().lock().unwrap().get(&key) {
            return Ok(p.clone());
        }
        let p = Arc::new(Self::build(d, alpha, beta)?);
        cache().lock().unwrap().insert(key, p.clone());
        Ok(p)
    }

    pub fn build(d: usize, alpha: f64, beta: f64) -> Result<Self> {
        let power_tail = alpha < 2.0;
        let h = std::f64::consts::LN_10 / PER_DECADE as f64;
        let x0 = R_LO.ln();
        let mut vals: Vec<f64> = Vec::new();
        let mut r_hi = None;
        let mut agree = 0;
        'outer: for dec in 0..MAX_DECADES {
            let idx: Vec<usize> = (dec * PER_DECADE..(dec + 1) * PER_DECADE).collect();
            let batch: Vec<Result<f64>> = idx
                .par_iter()
                .map(|&i| frac_profile_direct(d, alpha, beta, (x0 + h * i as f64).exp()))
                .collect();
            for (j, v) in batch.into_iter().enumerate() {
                let v = v?;
                let i = idx[j];
                let r = (x0 + h * i as f64).exp();
                if !(v > 0.0) {
                    if !power_tail && i > PER_DECADE {
                        r_hi = Some((x0 + h * (i - 1) as f64).exp());
                        break 'outer;
                    }
                    return Err(Error::ParameterOutOfPositivityRange(format!(
                        "profile not positive at r = {r:e}: {v:e}"
                    )));
                }
                vals.push(v);
                if power_tail {
                    if r > 1.0 {
                        let (a, last, _) = asymptotic(d, alpha, beta, r);
                        if (a - v).abs() <= 1e-8 * v && last <= 1e-9 * a.abs() {
                            agree += 1;
                            if agree >= 2 {
                                r_hi = Some(r);
                                break 'outer;
                            }
                        } else {
                            agree = 0;
                        }
                    }
                } else if v < 1e-12 * vals[0] {
                    r_hi = Some(r);
                    break 'outer;
                }
            }
        }
        let Some(r_hi) = r_hi else {
            return Err(Error::InsufficientGrid(format!(
                "radial profile for (d, alpha, beta) = ({d}, {alpha}, {beta}) did not reach its tail"
            )));
        };
        let n = ((r_hi.ln() - x0) / h).round() as usize + 1;
        vals.truncate(n);
        let y: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
        let end_slope = power_tail.then(|| {
            let (a, _, da) = asymptotic(d, alpha, beta, r_hi);
            da / a
        });
        let m = spline_slopes(&y, h, end_slope);
        let g0 = if 2.0 * alpha > d as f64 || beta == 1.0 {
            Some(frac_profile_direct(d, alpha, beta, 0.0)?)
        } else {
            None
        };
        Ok(RadialProfile {
            d,
            alpha,
            beta,
            x0,
            h,
            y,
            m,
            g0,
            r_hi,
            power_tail,
        })
    }

    /// Time-one profile `g(r)`.
    pub fn g(&self, r: f64) -> f64 {
        let n = self.y.len();
        if r >= self.r_hi {
            if !self.power_tail {
                return 0.0;
            }
            return asymptotic(self.d, self.alpha, self.beta, r).0;
        }
        if r <= R_LO {
            if r == 0.0 {
                return self.g0.unwrap_or(f64::INFINITY);
            }
            let ln_g = self.y[0] + self.m[0] * (r.ln() - self.x0);
            let g = ln_g.exp();
            return match self.g0 {
                Some(g0) => g.min(g0),
                None => g,
            };
        }
        let u = (r.ln() - self.x0) / self.h;
        let i = (u.floor() as usize).min(n - 2);
        let s = u - i as f64;
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (m0, m1) = (self.m[i] * self.h, self.m[i + 1] * self.h);
        let s2 = s * s;
        let s3 = s2 * s;
        let ln_g = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1;
        ln_g.exp()
    }

    /// `G_t` at radius `r`.
    pub fn density(&self, t: f64, r: f64) -> f64 {
        let s = t.powf(self.beta / self.alpha);
        t.powf(self.beta - 1.0) * self.g(r / s) / s.powi(self.d as i32)
    }

    /// Largest tabulated radius at time one.
    pub fn r_hi(&self) -> f64 {
        self.r_hi
    }

    /// `int_{R^d} g`, from the table and the analytic tail.
    pub fn total_mass(&self) -> Result<f64> {
        let area = sphere_area(self.d);
        let dm1 = self.d as i32 - 1;
        let mut pts = vec![0.0];
        let mut r = R_LO;
        while r < self.r_hi {
            pts.push(r);
            r *= 10.0;
        }
        pts.push(self.r_hi);
        let body = integrate_breaks(
            |r| area * self.g(r) * r.powi(dm1),
            &pts,
            QuadOptions {
                abs_tol: 1e-14,
                rel_tol: 1e-11,
                max_intervals: 20_000,
            },
        )
        .into_result("radial profile mass")?;
        let mut tail = 0.0;
        if self.power_tail {
            let mut last = f64::INFINITY;
            for k in 1..40 {
                let s = self.alpha * k as f64;
                let c = (-0.5f64).powi(k as i32)
                    * rgamma(self.beta * k as f64 + self.beta)
                    * riesz_fourier_constant(self.d, s);
                let term = area * c * self.r_hi.powf(-s) / s;
                if term == 0.0 {
                    continue;
                }
                if term.abs() > last {
                    break;
                }
                tail += term;
                last = term.abs();
            }
        }
        Ok(body + tail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_one_is_cauchy() {
        // exp(-|xi|/2) inverts to the Cauchy density with scale 1/2
        let p = RadialProfile::build(1, 1.0, 1.0).unwrap();
        for &r in &[1e-4, 0.01, 0.3, 1.0, 7.0, 50.0, 1e3] {
            let want = 0.5 / (std::f64::consts::PI * (0.25 + r * r));
            let got = p.g(r);
            assert!(((got - want) / want).abs() < 1e-6, "r = {r}: {got} vs {want}");
        }
        assert!((p.total_mass().unwrap() - 1.0).abs() < 1e-6);
    }
}
