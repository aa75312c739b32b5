//! Gaussian noise covariances `gamma(t) Lambda(x)` and their spectral side.
//!
//! Every covariance is evaluated through its canonical pure power law; the
//! sandwich constants `(c, C)` are carried only as metadata.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeCovariance {
    #[serde(rename = "power")]
    PowerLaw {
        gamma: f64,
        #[serde(default = "one")]
        lower_c: f64,
        #[serde(default = "one")]
        upper_c: f64,
    },
    #[serde(rename = "white")]
    WhiteInTime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralKind {
    RieszHat { lambda: f64, d: usize },
    ProductHat { lambdas: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceCovariance {
    Riesz { lambda: f64, d: usize },
    #[serde(rename = "product")]
    ProductRL { lambdas: Vec<f64> },
    #[serde(rename = "delta")]
    DeltaD1,
    Spectral { density: SpectralKind },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub time: TimeCovariance,
    pub space: SpaceCovariance,
}

impl TimeCovariance {
    pub fn power(gamma: f64) -> Self {
        TimeCovariance::PowerLaw {
            gamma,
            lower_c: 1.0,
            upper_c: 1.0,
        }
    }

    /// Exponent gamma, with 1 standing for white noise.
    pub fn exponent(&self) -> f64 {
        match self {
            TimeCovariance::PowerLaw { gamma, .. } => *gamma,
            TimeCovariance::WhiteInTime => 1.0,
        }
    }

    /// Hurst parameter through gamma = 2 - 2H.
    pub fn hurst(&self) -> f64 {
        1.0 - 0.5 * self.exponent()
    }

    pub fn is_white(&self) -> bool {
        matches!(self, TimeCovariance::WhiteInTime)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            TimeCovariance::PowerLaw {
                gamma,
                lower_c,
                upper_c,
            } => {
                if !(gamma > 0.0 && gamma < 1.0) {
                    return Err(Error::SingularityNotIntegrable(format!(
                        "time exponent gamma = {gamma} must lie in (0,1)"
                    )));
                }
                if !(lower_c > 0.0 && lower_c <= upper_c) {
                    return Err(Error::InvalidParameter(format!(
                        "need 0 < c <= C, got c = {lower_c}, C = {upper_c}"
                    )));
                }
                Ok(())
            }
            TimeCovariance::WhiteInTime => Ok(()),
        }
    }
}

impl SpaceCovariance {
    pub fn riesz(lambda: f64, d: usize) -> Self {
        SpaceCovariance::Riesz { lambda, d }
    }

    pub fn dim(&self) -> usize {
        match self {
            SpaceCovariance::Riesz { d, .. } => *d,
            SpaceCovariance::ProductRL { lambdas } => lambdas.len(),
            SpaceCovariance::DeltaD1 => 1,
            SpaceCovariance::Spectral { density } => match density {
                SpectralKind::RieszHat { d, .. } => *d,
                SpectralKind::ProductHat { lambdas } => lambdas.len(),
            },
        }
    }

    pub fn is_delta(&self) -> bool {
        matches!(self, SpaceCovariance::DeltaD1)
    }

    pub fn validate(&self) -> Result<()> {
        let check_riesz = |lambda: f64, d: usize| {
            if d == 0 {
                return Err(Error::InvalidParameter("dimension must be positive".into()));
            }
            if !(lambda > 0.0 && lambda < d as f64) {
                return Err(Error::SingularityNotIntegrable(format!(
                    "Riesz exponent lambda = {lambda} must lie in (0,{d})"
                )));
            }
            Ok(())
        };
        let check_product = |lambdas: &[f64]| {
            if lambdas.is_empty() {
                return Err(Error::InvalidParameter("empty exponent list".into()));
            }
            for &l in lambdas {
                if !(l > 0.0 && l < 1.0) {
                    return Err(Error::SingularityNotIntegrable(format!(
                        "product exponent {l} must lie in (0,1)"
                    )));
                }
            }
            Ok(())
        };
        match self {
            SpaceCovariance::Riesz { lambda, d } => check_riesz(*lambda, *d),
            SpaceCovariance::ProductRL { lambdas } => check_product(lambdas),
            SpaceCovariance::DeltaD1 => Ok(()),
            SpaceCovariance::Spectral { density } => match density {
                SpectralKind::RieszHat { lambda, d } => check_riesz(*lambda, *d),
                SpectralKind::ProductHat { lambdas } => check_product(lambdas),
            },
        }
    }
}

impl NoiseSpec {
    pub fn new(time: TimeCovariance, space: SpaceCovariance) -> Result<Self> {
        let spec = NoiseSpec { time, space };
        spec.validate()?;
        Ok(spec)
    }

    /// Space-time white noise on the line.
    pub fn white_white() -> Self {
        NoiseSpec {
            time: TimeCovariance::WhiteInTime,
            space: SpaceCovariance::DeltaD1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.time.validate()?;
        self.space.validate()?;
        if self.space.is_delta() && !self.time.is_white() {
            return Err(Error::InvalidParameter(
                "a delta spatial covariance requires white-in-time noise".into(),
            ));
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: NoiseSpec = serde_json::from_str(s)
            .map_err(|e| Error::InvalidParameter(format!("noise spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Canonical time covariance `|s|^{-gamma}`.
pub fn eval_gamma(tc: &TimeCovariance, s: f64) -> Result<f64> {
    match tc {
        TimeCovariance::WhiteInTime => Err(Error::EvalOfDelta),
        TimeCovariance::PowerLaw { gamma, .. } => {
            if s == 0.0 {
                return Err(Error::SingularPoint("time lag 0".into()));
            }
            Ok(s.abs().powf(-gamma))
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_dim(sc: &SpaceCovariance, x: &[f64]) -> Result<()> {
    if x.len() != sc.dim() {
        return Err(Error::InvalidParameter(format!(
            "point has dimension {}, covariance has {}",
            x.len(),
            sc.dim()
        )));
    }
    Ok(())
}

/// Canonical spatial covariance `|x|^{-lambda}` or `prod |x_j|^{-lambda_j}`.
pub fn eval_lambda(sc: &SpaceCovariance, x: &[f64]) -> Result<f64> {
    check_dim(sc, x)?;
    match sc {
        SpaceCovariance::DeltaD1 => Err(Error::EvalOfDelta),
        SpaceCovariance::Riesz { lambda, .. } => {
            let r = norm(x);
            if r == 0.0 {
                return Err(Error::SingularPoint("x = 0".into()));
            }
            Ok(r.powf(-lambda))
        }
        SpaceCovariance::ProductRL { lambdas } => {
            let mut v = 1.0;
            for (xj, lj) in x.iter().zip(lambdas) {
                if *xj == 0.0 {
                    return Err(Error::SingularPoint("a coordinate is 0".into()));
                }
                v *= xj.abs().powf(-lj);
            }
            Ok(v)
        }
        SpaceCovariance::Spectral { .. } => Err(Error::UnsupportedParameter(
            "a spectral covariance is given on the Fourier side only".into(),
        )),
    }
}

/// Canonical spectral density `|xi|^{lambda-d}` or `prod |xi_j|^{lambda_j-1}`.
pub fn spectral_density(sc: &SpaceCovariance, xi: &[f64]) -> Result<f64> {
    check_dim(sc, xi)?;
    let riesz = |lambda: f64, d: usize| {
        let r = norm(xi);
        let e = lambda - d as f64;
        if r == 0.0 {
            if e < 0.0 {
                return Err(Error::SingularPoint("xi = 0".into()));
            }
            return Ok(if e == 0.0 { 1.0 } else { 0.0 });
        }
        Ok(r.powf(e))
    };
    let product = |lambdas: &[f64]| {
        let mut v = 1.0;
        for (x, l) in xi.iter().zip(lambdas) {
            if *x == 0.0 {
                return Err(Error::SingularPoint("a frequency coordinate is 0".into()));
            }
            v *= x.abs().powf(l - 1.0);
        }
        Ok(v)
    };
    match sc {
        SpaceCovariance::Riesz { lambda, d } => riesz(*lambda, *d),
        SpaceCovariance::ProductRL { lambdas } => product(lambdas),
        SpaceCovariance::Spectral { density } => match density {
            SpectralKind::RieszHat { lambda, d } => riesz(*lambda, *d),
            SpectralKind::ProductHat { lambdas } => product(lambdas),
        },
        SpaceCovariance::DeltaD1 => Ok(1.0),
    }
}

/// Total spatial exponent; the delta covariance counts as `lambda = d = 1`.
pub fn total_lambda(sc: &SpaceCovariance) -> f64 {
    match sc {
        SpaceCovariance::Riesz { lambda, .. } => *lambda,
        SpaceCovariance::ProductRL { lambdas } => lambdas.iter().sum(),
        SpaceCovariance::DeltaD1 => 1.0,
        SpaceCovariance::Spectral { density } => match density {
            SpectralKind::RieszHat { lambda, .. } => *lambda,
            SpectralKind::ProductHat { lambdas } => lambdas.iter().sum(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_examples() {
        let tc = TimeCovariance::power(0.5);
        assert_eq!(eval_gamma(&tc, 4.0).unwrap(), 0.5);
        assert_eq!(eval_gamma(&tc, 1.0).unwrap(), 1.0);
        assert_eq!(
            eval_gamma(&TimeCovariance::WhiteInTime, 0.3),
            Err(Error::EvalOfDelta)
        );
    }

    #[test]
    fn lambda_examples() {
        assert!((eval_lambda(&SpaceCovariance::riesz(1.0, 2), &[3.0, 4.0]).unwrap() - 0.2).abs() < 1e-15);
        let p = SpaceCovariance::ProductRL {
            lambdas: vec![0.5, 0.5],
        };
        assert_eq!(eval_lambda(&p, &[4.0, 1.0]).unwrap(), 0.5);
        assert!(matches!(
            eval_lambda(&SpaceCovariance::riesz(0.5, 1), &[0.0]),
            Err(Error::SingularPoint(_))
        ));
    }

    #[test]
    fn spectral_examples() {
        assert_eq!(spectral_density(&SpaceCovariance::riesz(1.0, 1), &[7.0]).unwrap(), 1.0);
        assert_eq!(spectral_density(&SpaceCovariance::riesz(0.5, 1), &[4.0]).unwrap(), 0.5);
        let p = SpaceCovariance::Spectral {
            density: SpectralKind::ProductHat {
                lambdas: vec![0.5, 0.5],
            },
        };
        assert_eq!(spectral_density(&p, &[1.0, 4.0]).unwrap(), 0.5);
    }

    #[test]
    fn totals() {
        assert_eq!(total_lambda(&SpaceCovariance::riesz(0.7, 3)), 0.7);
        let p = SpaceCovariance::ProductRL {
            lambdas: vec![0.3, 0.4],
        };
        assert!((total_lambda(&p) - 0.7).abs() < 1e-15);
        assert_eq!(total_lambda(&SpaceCovariance::DeltaD1), 1.0);
    }

    #[test]
    fn validation() {
        assert!(NoiseSpec::new(TimeCovariance::power(0.5), SpaceCovariance::DeltaD1).is_err());
        assert!(NoiseSpec::new(TimeCovariance::power(1.0), SpaceCovariance::riesz(0.5, 1)).is_err());
        assert!(NoiseSpec::new(TimeCovariance::power(0.5), SpaceCovariance::riesz(1.0, 1)).is_err());
        assert!(NoiseSpec::new(TimeCovariance::WhiteInTime, SpaceCovariance::riesz(0.5, 1)).is_ok());
    }

    #[test]
    fn json_roundtrip() {
        let s = r#"{"time":{"kind":"power","gamma":0.5},"space":{"kind":"riesz","lambda":0.5,"d":1}}"#;
        let n = NoiseSpec::from_json(s).unwrap();
        assert_eq!(n.time.exponent(), 0.5);
        let w = r#"{"time":{"kind":"white"},"space":{"kind":"delta"}}"#;
        assert_eq!(NoiseSpec::from_json(w).unwrap(), NoiseSpec::white_white());
    }
}
