//! The restricted-diagram lower bound: interval grid, closed-form summand and
//! the optimized choice of `m` and `eps`.

use num_traits::{One, Signed, Zero};
use rand::Rng as _;
use serde::Serialize;

use super::{MomentEstimate, MAX_VERTICES};
use crate::error::{Error, Result};
use crate::exponents::{qi, Q};
use crate::kernels::special::ln_gamma;
use crate::mc;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerBoundPlan {
    pub p: usize,
    pub m: usize,
    pub eps: f64,
    pub t: f64,
}

impl LowerBoundPlan {
    pub fn new(p: usize, m: usize, eps: f64, t: f64) -> Result<Self> {
        if p == 0 || p % 2 == 1 {
            return Err(Error::InvalidParameter(format!("p = {p} must be positive and even")));
        }
        if m == 0 || (2 * m) % p != 0 {
            return Err(Error::InvalidParameter(format!("p = {p} must divide 2m = {}", 2 * m)));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::NonpositiveTime(t));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps = {eps} must be positive")));
        }
        Ok(LowerBoundPlan { p, m, eps, t })
    }

    /// Vertices per row, `2m/p`.
    pub fn m_p(&self) -> usize {
        2 * self.m / self.p
    }

    /// Grid spacing `L = t / (2(m_p + 1))`.
    pub fn spacing(&self) -> f64 {
        self.t / (2.0 * (self.m_p() as f64 + 1.0))
    }

    /// Grid point `t_j = j L`.
    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    /// `I_j = [t_j - L/4, t_j + L/4]`.
    pub fn interval(&self, j: usize) -> (f64, f64) {
        let l = self.spacing();
        (self.node(j) - l / 4.0, self.node(j) + l / 4.0)
    }

    /// Checks `m >= p t / (2 eps^b)` and the resulting gap window.
    pub fn check(&self, b: f64) -> Result<()> {
        let eb = self.eps.powf(b);
        let need = self.p as f64 * self.t / (2.0 * eb);
        if (self.m as f64) < need {
            return Err(Error::ConstraintViolated(format!(
                "m = {} is below p t / (2 eps^b) = {need}",
                self.m
            )));
        }
        let gap_hi = self.t / (self.m_p() as f64 + 1.0);
        if gap_hi > eb * (1.0 + 1e-12) {
            return Err(Error::ConstraintViolated(format!(
                "largest time gap {gap_hi} exceeds eps^b = {eb}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBound {
    /// `ln( m! eps^{-m lambda} t^{-m gamma} (tp/m)^{2m(a+1)} )`.
    pub log_summand: f64,
    /// `(eps^{-lambda} t^{2(a+1)-gamma} p^{2(a+1)})^{1/(2a+1)}`.
    pub m0: f64,
    /// `t^{-(1-gamma)/D} p^{-1/D}`, `D = b(2a+1) - lambda`.
    pub eps_tp: f64,
    /// `m0` evaluated at `eps = eps_tp`.
    pub m0_at_eps_tp: f64,
}

/// Closed-form lower-bound summand for `plan` and the optimizer values.
pub fn lower_bound_value(plan: &LowerBoundPlan, a: f64, b: f64, lambda: f64, gamma: f64) -> Result<LowerBound> {
    let dd = b * (2.0 * a + 1.0) - lambda;
    if !(a > -1.0 && b > 0.0 && dd > 0.0) {
        return Err(Error::ConstraintViolated(format!(
            "need a > -1, b > 0 and b(2a+1) - lambda > 0; got a = {a}, b = {b}, lambda = {lambda}"
        )));
    }
    plan.check(b)?;
    let (t, p, m, eps) = (plan.t, plan.p as f64, plan.m as f64, plan.eps);
    let log_summand = ln_gamma(m + 1.0) - m * lambda * eps.ln() - m * gamma * t.ln()
        + 2.0 * m * (a + 1.0) * (t * p / m).ln();
    let m0_of = |e: f64| {
        ((-lambda * e.ln() + (2.0 * (a + 1.0) - gamma) * t.ln() + 2.0 * (a + 1.0) * p.ln()) / (2.0 * a + 1.0)).exp()
    };
    let eps_tp = (-(1.0 - gamma) / dd * t.ln() - p.ln() / dd).exp();
    Ok(LowerBound {
        log_summand,
        m0: m0_of(eps),
        eps_tp,
        m0_at_eps_tp: m0_of(eps_tp),
    })
}

/// Exact `(t, p)` exponents of `m0` at `eps = eps_{t,p}`.
pub fn optimized_exponents(a: &Q, b: &Q, lambda: &Q, gamma: &Q) -> Result<(Q, Q)> {
    let one = Q::one();
    let two = qi(2);
    let k = &two * a + &one;
    let dd = b * &k - lambda;
    if !(*a > -one.clone() && b.is_positive() && dd.is_positive()) || k.is_zero() {
        return Err(Error::ConstraintViolated("need a > -1, b > 0, b(2a+1) - lambda > 0".into()));
    }
    // ln m0 = [lambda (1-gamma)/D ln t + lambda/D ln p + (2(a+1) - gamma) ln t + 2(a+1) ln p] / (2a+1)
    let aa = &two * (a + &one);
    let t_exp = (lambda * (&one - gamma) / &dd + &aa - gamma) / &k;
    let p_exp = (&aa + lambda / &dd) / &k;
    Ok((t_exp, p_exp))
}

/// Monte Carlo value of the restricted time integral over
/// `prod_{l, j} 1_{I_j}(t^l_j)` on the product of simplices.
pub fn restricted_integral_mc(plan: &LowerBoundPlan, samples: u64, seed: u64) -> Result<MomentEstimate> {
    let m_p = plan.m_p();
    let dim = plan.p * m_p;
    if dim > MAX_VERTICES {
        return Err(Error::DimensionCap(format!("p m_p = {dim} > {MAX_VERTICES}")));
    }
    let l = plan.spacing();
    let ivs: Vec<(f64, f64)> = (1..=m_p).map(|j| plan.interval(j)).collect();
    assert!(ivs.windows(2).all(|w| w[0].1 < w[1].0) && ivs[m_p - 1].1 < plan.t && ivs[0].0 > 0.0);
    let vol = l.powi(dim as i32);
    let st = mc::run(seed, 0x10b, samples, |rng| {
        for _ in 0..plan.p {
            let mut prev = 0.0;
            for (j, iv) in ivs.iter().enumerate() {
                let c = plan.node(j + 1);
                let s = c + l * (rng.random::<f64>() - 0.5);
                if s < iv.0 || s > iv.1 || s <= prev {
                    return 0.0;
                }
                prev = s;
            }
        }
        vol
    });
    Ok(MomentEstimate::from_stats(&st, seed))
}
