//! Green's functions of the heat, fractional heat, wave and time-fractional
//! diffusion operators: densities, Fourier transforms and ball masses.

mod ballmass;
pub mod fourier;
mod profile;
pub mod special;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ballmass::{ball_mass, BallMassQuery};
pub(crate) use ballmass::sphere_in_ball;
pub use profile::RadialProfile;
pub use special::{mittag_leffler, neutral_fractional_density, wright};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    Heat { d: usize },
    AlphaHeat { d: usize, alpha: f64 },
    Wave { d: usize },
    #[serde(rename = "frac")]
    FracDiff { d: usize, alpha: f64, beta: f64 },
}

/// Which branch of the positivity conditions a fractional kernel satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FracCase {
    A,
    B,
    C,
}

pub fn frac_case(d: usize, alpha: f64, beta: f64) -> Option<FracCase> {
    if beta > 0.5 && beta <= 1.0 && alpha > 0.0 && alpha <= 2.0 {
        Some(FracCase::A)
    } else if beta > 1.0 && beta < 2.0 && alpha == 2.0 && (d == 2 || d == 3) {
        Some(FracCase::B)
    } else if beta > 1.0 && beta < 2.0 && alpha >= beta && alpha <= 2.0 && d == 1 {
        Some(FracCase::C)
    } else {
        None
    }
}

impl KernelSpec {
    pub fn dim(&self) -> usize {
        match *self {
            KernelSpec::Heat { d }
            | KernelSpec::AlphaHeat { d, .. }
            | KernelSpec::Wave { d }
            | KernelSpec::FracDiff { d, .. } => d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim() == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        match *self {
            KernelSpec::Heat { .. } => Ok(()),
            KernelSpec::AlphaHeat { alpha, .. } => {
                if alpha > 0.0 && alpha < 2.0 {
                    Ok(())
                } else {
                    Err(Error::UnsupportedParameter(format!(
                        "fractional heat needs alpha in (0,2), got {alpha}"
                    )))
                }
            }
            KernelSpec::Wave { d } => {
                if d <= 3 {
                    Ok(())
                } else {
                    Err(Error::ParameterOutOfPositivityRange(format!(
                        "wave kernel in dimension {d} > 3"
                    )))
                }
            }
            KernelSpec::FracDiff { d, alpha, beta } => {
                if !(alpha > 0.0 && alpha <= 2.0 && beta > 0.5 && beta < 2.0) {
                    return Err(Error::UnsupportedParameter(format!(
                        "fractional diffusion needs alpha in (0,2], beta in (1/2,2), got ({alpha}, {beta})"
                    )));
                }
                if frac_case(d, alpha, beta).is_none() {
                    return Err(Error::ParameterOutOfPositivityRange(format!(
                        "(d, alpha, beta) = ({d}, {alpha}, {beta})"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let k: KernelSpec = serde_json::from_str(s)
            .map_err(|e| Error::InvalidParameter(format!("kernel spec: {e}")))?;
        k.validate()?;
        Ok(k)
    }

    /// False for the three-dimensional wave kernel, a surface measure.
    pub fn has_density(&self) -> bool {
        !matches!(self, KernelSpec::Wave { d: 3 })
    }

    /// Small-ball exponents `(a, b)`.
    pub fn small_ball_exponents(&self) -> (f64, f64) {
        match *self {
            KernelSpec::Heat { .. } => (0.0, 2.0),
            KernelSpec::AlphaHeat { alpha, .. } => (0.0, alpha),
            KernelSpec::Wave { .. } => (1.0, 1.0),
            KernelSpec::FracDiff { alpha, beta, .. } => (beta - 1.0, alpha / beta),
        }
    }

    /// Closed-form HLS exponent for a spatial covariance with total exponent `lambda`.
    pub fn hbar(&self, lambda: f64) -> f64 {
        let (a, b) = self.small_ball_exponents();
        2.0 * a - lambda / b
    }

    /// Total mass `int G_t` as a function of `t`.
    pub fn total_mass(&self, t: f64) -> f64 {
        match *self {
            KernelSpec::Heat { .. } | KernelSpec::AlphaHeat { .. } => 1.0,
            KernelSpec::Wave { .. } => t,
            KernelSpec::FracDiff { beta, .. } => t.powf(beta - 1.0) * special::rgamma(beta),
        }
    }

    /// Spatial scale of `G_t`: the kernel at time `t` is the kernel at time 1
    /// dilated by this factor.
    pub fn spatial_scale(&self, t: f64) -> f64 {
        match *self {
            KernelSpec::Heat { .. } => t.sqrt(),
            KernelSpec::AlphaHeat { alpha, .. } => t.powf(1.0 / alpha),
            KernelSpec::Wave { .. } => t,
            KernelSpec::FracDiff { alpha, beta, .. } => t.powf(beta / alpha),
        }
    }

    /// Short label used in reports.
    pub fn label(&self) -> String {
        match *self {
            KernelSpec::Heat { d } => format!("heat(d={d})"),
            KernelSpec::AlphaHeat { d, alpha } => format!("alpha_heat(d={d},alpha={alpha})"),
            KernelSpec::Wave { d } => format!("wave(d={d})"),
            KernelSpec::FracDiff { d, alpha, beta } => {
                format!("frac(d={d},alpha={alpha},beta={beta})")
            }
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NonpositiveTime(t))
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `(2 pi t)^{-d/2} exp(-|x|^2 / 2t)`.
pub fn heat_density(t: f64, x: &[f64]) -> Result<f64> {
    check_time(t)?;
    let d = x.len() as f64;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    Ok((2.0 * PI * t).powf(-d / 2.0) * (-r2 / (2.0 * t)).exp())
}

/// Wave kernel density in d = 1, 2.
pub fn wave_density(t: f64, x: &[f64]) -> Result<f64> {
    check_time(t)?;
    let r = norm(x);
    match x.len() {
        1 => Ok(if r < t { 0.5 } else { 0.0 }),
        2 => {
            if r < t {
                Ok(1.0 / (2.0 * PI * (t * t - r * r).sqrt()))
            } else if r == t {
                Err(Error::OnLightConeSingularity)
            } else {
                Ok(0.0)
            }
        }
        3 => Err(Error::MeasureKernelNoDensity),
        d => Err(Error::UnsupportedParameter(format!("wave kernel in d = {d}"))),
    }
}

/// Fourier transform of `G_t` at frequency `xi`.
pub fn kernel_fourier(spec: &KernelSpec, t: f64, xi: &[f64]) -> Result<f64> {
    check_time(t)?;
    kernel_fourier_radial(spec, t, norm(xi))
}

pub fn kernel_fourier_radial(spec: &KernelSpec, t: f64, r: f64) -> Result<f64> {
    check_time(t)?;
    Ok(match *spec {
        KernelSpec::Heat { .. } => (-t * r * r / 2.0).exp(),
        KernelSpec::AlphaHeat { alpha, .. } => (-t * r.powf(alpha) / 2.0).exp(),
        KernelSpec::Wave { .. } => {
            if r == 0.0 {
                t
            } else {
                (t * r).sin() / r
            }
        }
        KernelSpec::FracDiff { alpha, beta, .. } => {
            t.powf(beta - 1.0) * mittag_leffler(beta, beta, -t.powf(beta) * r.powf(alpha) / 2.0)?
        }
    })
}

/// Frequency beyond which the time-1 transform of `spec` is in its tail.
fn fourier_scale(alpha: f64) -> f64 {
    60f64.powf(1.0 / alpha)
}

/// Time-one profile `g(r)` of an isotropic fractional kernel, by inverse Fourier transform.
pub(crate) fn frac_profile_direct(d: usize, alpha: f64, beta: f64, r: f64) -> Result<f64> {
    let scale = fourier_scale(alpha);
    if beta == 1.0 {
        return fourier::radial_inverse(|xi| (-xi.powf(alpha) / 2.0).exp(), d, r, scale);
    }
    let err = std::cell::RefCell::new(None);
    let v = fourier::radial_inverse(
        |xi| match mittag_leffler(beta, beta, -xi.powf(alpha) / 2.0) {
            Ok(v) => v,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        d,
        r,
        scale,
    );
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    v
}

/// Density of the time-fractional diffusion kernel, by radial inverse Fourier transform.
pub fn fracdiff_density(spec: &KernelSpec, t: f64, x: &[f64]) -> Result<f64> {
    check_time(t)?;
    let KernelSpec::FracDiff { d, alpha, beta } = *spec else {
        return Err(Error::InvalidParameter("expected a fractional diffusion kernel".into()));
    };
    spec.validate()?;
    if x.len() != d {
        return Err(Error::InvalidParameter("point dimension mismatch".into()));
    }
    let s = spec.spatial_scale(t);
    let g = frac_profile_direct(d, alpha, beta, norm(x) / s)?;
    Ok(t.powf(beta - 1.0) * g / s.powi(d as i32))
}

/// Density of the isotropic fractional heat kernel `F^{-1}[exp(-t|xi|^alpha/2)]`.
pub fn alpha_heat_density(t: f64, alpha: f64, x: &[f64]) -> Result<f64> {
    check_time(t)?;
    let d = x.len();
    let s = t.powf(1.0 / alpha);
    let g = frac_profile_direct(d, alpha, 1.0, norm(x) / s)?;
    Ok(g / s.powi(d as i32))
}

/// Pointwise density for every kernel that has one.
pub fn density(spec: &KernelSpec, t: f64, x: &[f64]) -> Result<f64> {
    if x.len() != spec.dim() {
        return Err(Error::InvalidParameter("point dimension mismatch".into()));
    }
    match *spec {
        KernelSpec::Heat { .. } => heat_density(t, x),
        KernelSpec::AlphaHeat { alpha, .. } => alpha_heat_density(t, alpha, x),
        KernelSpec::Wave { .. } => wave_density(t, x),
        KernelSpec::FracDiff { .. } => fracdiff_density(spec, t, x),
    }
}

/// Fast radial density evaluator. Closed forms where they exist, a cached
/// interpolation table otherwise.
#[derive(Clone)]
pub enum DensityEval {
    Heat { d: usize },
    Wave { d: usize },
    Table(std::sync::Arc<RadialProfile>),
}

impl DensityEval {
    pub fn new(spec: &KernelSpec) -> Result<Self> {
        spec.validate()?;
        Ok(match *spec {
            KernelSpec::Heat { d } => DensityEval::Heat { d },
            KernelSpec::Wave { d } => {
                if d == 3 {
                    return Err(Error::MeasureKernelNoDensity);
                }
                DensityEval::Wave { d }
            }
            KernelSpec::AlphaHeat { d, alpha } => DensityEval::Table(RadialProfile::cached(d, alpha, 1.0)?),
            KernelSpec::FracDiff { d, alpha, beta } => {
                if alpha == 2.0 && beta == 1.0 {
                    DensityEval::Heat { d }
                } else {
                    DensityEval::Table(RadialProfile::cached(d, alpha, beta)?)
                }
            }
        })
    }

    /// `G_t` at radius `r`; 0 for `t <= 0`.
    pub fn radial(&self, t: f64, r: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            DensityEval::Heat { d } => (2.0 * PI * t).powf(-(*d as f64) / 2.0) * (-r * r / (2.0 * t)).exp(),
            DensityEval::Wave { d } => {
                if r >= t {
                    0.0
                } else if *d == 1 {
                    0.5
                } else {
                    1.0 / (2.0 * PI * (t * t - r * r).sqrt())
                }
            }
            DensityEval::Table(p) => p.density(t, r),
        }
    }
}
