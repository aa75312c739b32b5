//! Chaos kernels, second-moment terms, diagram integrals and truncated
//! moments of the mild solution with constant initial data.

mod fd;
mod lower;
mod sampler;

use serde::Serialize;

use crate::diagrams::{enumerate_admissible, Diagram};
use crate::error::{Error, Result};
use crate::kernels::special::ln_gamma;
use crate::kernels::{density, KernelSpec};
use crate::mc;
use crate::noise::{total_lambda, NoiseSpec};

pub use fd::{fd_oracle_she, FdConfig, FdMoments};
pub use lower::{
    lower_bound_value, optimized_exponents, restricted_integral_mc, LowerBound, LowerBoundPlan,
};

use sampler::{Layout, Sampler, P};

/// Largest total vertex count handled by the diagram sampler.
pub const MAX_VERTICES: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChaosKernelSpec {
    pub kernel: KernelSpec,
    pub n: usize,
    pub t: f64,
    pub x: Vec<f64>,
    pub initial_value: f64,
}

impl ChaosKernelSpec {
    pub fn new(kernel: KernelSpec, n: usize, t: f64) -> Self {
        ChaosKernelSpec {
            kernel,
            n,
            t,
            x: vec![0.0; kernel.dim()],
            initial_value: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::NonpositiveTime(self.t));
        }
        if self.x.len() != self.kernel.dim() {
            return Err(Error::InvalidParameter("evaluation point dimension mismatch".into()));
        }
        if !self.initial_value.is_finite() {
            return Err(Error::InvalidParameter("initial value must be finite".into()));
        }
        Ok(())
    }

    fn point(&self) -> P {
        let mut p = [0.0; 3];
        p[..self.x.len()].copy_from_slice(&self.x);
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mc,
    Quadrature,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub method: Method,
}

impl MomentEstimate {
    pub fn exact(value: f64, method: Method) -> Self {
        MomentEstimate {
            value,
            std_error: 0.0,
            n_samples: 0,
            seed: 0,
            method,
        }
    }

    fn from_stats(s: &mc::Stats, seed: u64) -> Self {
        MomentEstimate {
            value: s.mean,
            std_error: s.std_error(),
            n_samples: s.n,
            seed,
            method: Method::Mc,
        }
    }
}

/// `f_n` at the given nodes: the chain of kernel factors from `(t, x)` down to
/// `(t_1, x_1)`, times the initial value; zero off the ordered simplex.
pub fn eval_f_n(spec: &ChaosKernelSpec, times: &[f64], points: &[Vec<f64>]) -> Result<f64> {
    spec.validate()?;
    if !spec.kernel.has_density() {
        return Err(Error::MeasureKernelNoDensity);
    }
    let n = spec.n;
    if times.len() != n || points.len() != n {
        return Err(Error::InvalidParameter(format!(
            "expected {n} times and points, got {} and {}",
            times.len(),
            points.len()
        )));
    }
    if n > 0 && !(times[0] > 0.0) {
        return Ok(0.0);
    }
    let mut v = spec.initial_value;
    for i in 0..n {
        let (t_hi, x_hi) = if i + 1 < n {
            (times[i + 1], &points[i + 1])
        } else {
            (spec.t, &spec.x)
        };
        if !(times[i] < t_hi) {
            return Ok(0.0);
        }
        let z: Vec<f64> = x_hi.iter().zip(&points[i]).map(|(a, b)| a - b).collect();
        match density(&spec.kernel, t_hi - times[i], &z) {
            Ok(g) => v *= g,
            Err(Error::OnLightConeSingularity) => return Ok(f64::INFINITY),
            Err(e) => return Err(e),
        }
    }
    Ok(v)
}

/// Average of `f_n` over all orderings of the nodes.
pub fn eval_f_n_symmetric(spec: &ChaosKernelSpec, times: &[f64], points: &[Vec<f64>]) -> Result<f64> {
    let n = spec.n;
    if n > 8 {
        return Err(Error::DimensionCap(format!("symmetrization over {n}! orderings")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    // only the sorting permutation is nonzero, so the average is f(sorted)/n!
    let ts: Vec<f64> = idx.iter().map(|&i| times[i]).collect();
    let xs: Vec<Vec<f64>> = idx.iter().map(|&i| points[i].clone()).collect();
    let ln_fact = ln_gamma(n as f64 + 1.0);
    if ts.windows(2).any(|w| w[0] == w[1]) {
        return Ok(0.0);
    }
    Ok(eval_f_n(spec, &ts, &xs)? * (-ln_fact).exp())
}

fn check_noise(spec: &ChaosKernelSpec, noise: &NoiseSpec) -> Result<()> {
    noise.validate()?;
    if noise.time.exponent() >= 1.0 && !noise.time.is_white() {
        return Err(Error::SingularityNotIntegrable("gamma must be below 1".into()));
    }
    if noise.space.dim() != spec.kernel.dim() {
        return Err(Error::InvalidParameter("noise and kernel dimensions differ".into()));
    }
    Ok(())
}

/// `E[I_n(f_n)^2]` for the unsymmetrized kernel, by Monte Carlo.
pub fn phi_n(spec: &ChaosKernelSpec, noise: &NoiseSpec, samples: u64, seed: u64) -> Result<MomentEstimate> {
    spec.validate()?;
    check_noise(spec, noise)?;
    let n = spec.n;
    if n == 0 {
        return Ok(MomentEstimate::exact(spec.initial_value.powi(2), Method::ClosedForm));
    }
    if n > MAX_VERTICES {
        return Err(Error::DimensionCap(format!("chaos order {n} > {MAX_VERTICES}")));
    }
    let s = Sampler::new(&spec.kernel, noise)?;
    let x = spec.point();
    let ln_dir = sampler::ln_dirichlet_norm(n, spec.t);
    let st = mc::run(seed, n as u64, samples, |rng| {
        sampler::sample_phi(&s, n, spec.t, &x, spec.initial_value, ln_dir, rng)
    });
    Ok(MomentEstimate::from_stats(&st, seed))
}

/// `E[I_n^2]` for space-time white noise and the heat kernel on the line:
/// `(t/4)^{n/2} / Gamma(n/2 + 1)` times the squared initial value.
pub fn phi_n_white_heat(n: usize, t: f64, initial_value: f64) -> f64 {
    let h = n as f64 / 2.0;
    initial_value * initial_value * (h * (t / 4.0).ln() - ln_gamma(h + 1.0)).exp()
}

/// Monte Carlo value of the diagram integral `F_D`; the row sizes come from
/// the diagram and `t`, `x`, kernel and initial value from `spec`.
pub fn eval_f_d(
    diagram: &Diagram,
    spec: &ChaosKernelSpec,
    noise: &NoiseSpec,
    samples: u64,
    seed: u64,
) -> Result<MomentEstimate> {
    eval_f_d_stream(diagram, spec, noise, samples, seed, 0)
}

fn eval_f_d_stream(
    diagram: &Diagram,
    spec: &ChaosKernelSpec,
    noise: &NoiseSpec,
    samples: u64,
    seed: u64,
    stream: u64,
) -> Result<MomentEstimate> {
    spec.validate()?;
    diagram.validate()?;
    let total = diagram.total();
    if total > MAX_VERTICES {
        return Err(Error::DimensionCap(format!("{total} vertices > {MAX_VERTICES}")));
    }
    check_noise(spec, noise)?;
    let s = Sampler::new(&spec.kernel, noise)?;
    Ok(fd_with(&s, diagram, spec, samples, seed, stream))
}

fn fd_with(s: &Sampler, diagram: &Diagram, spec: &ChaosKernelSpec, samples: u64, seed: u64, stream: u64) -> MomentEstimate {
    let edges: Vec<_> = diagram.edge_factors();
    let lay = Layout::new(&diagram.row_sizes, &edges);
    let x = spec.point();
    let st = mc::run(seed, stream, samples, |rng| {
        sampler::sample_fd(s, &lay, spec.t, &x, spec.initial_value, rng)
    });
    MomentEstimate::from_stats(&st, seed)
}

/// Sum of `F_D` over all admissible diagrams with the given rows; each
/// diagram gets its own stream.
pub fn diagram_sum(
    rows: &[usize],
    spec: &ChaosKernelSpec,
    noise: &NoiseSpec,
    samples: u64,
    seed: u64,
) -> Result<MomentEstimate> {
    spec.validate()?;
    check_noise(spec, noise)?;
    let rows: Vec<usize> = rows.iter().copied().filter(|&n| n > 0).collect();
    let total: usize = rows.iter().sum();
    if total == 0 {
        return Ok(MomentEstimate::exact(1.0, Method::ClosedForm));
    }
    if total % 2 == 1 {
        return Ok(MomentEstimate::exact(0.0, Method::ClosedForm));
    }
    if total > MAX_VERTICES {
        return Err(Error::DimensionCap(format!("{total} vertices > {MAX_VERTICES}")));
    }
    let s = Sampler::new(&spec.kernel, noise)?;
    let mut value = 0.0;
    let mut var = 0.0;
    let mut n_samples = 0;
    let base = stream_base(&rows);
    for (k, dgm) in enumerate_admissible(&rows)?.enumerate() {
        let e = fd_with(&s, &dgm, spec, samples, seed, base + k as u64);
        value += e.value;
        var += e.std_error * e.std_error;
        n_samples += e.n_samples;
    }
    Ok(MomentEstimate {
        value,
        std_error: var.sqrt(),
        n_samples,
        seed,
        method: Method::Mc,
    })
}

fn stream_base(rows: &[usize]) -> u64 {
    let mut h: u64 = 1 << 40;
    for &n in rows {
        h = h.wrapping_mul(31).wrapping_add(n as u64 + 1);
    }
    h << 16
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncatedMoment {
    pub estimate: MomentEstimate,
    /// Heuristic size of the omitted chaos orders.
    pub tail_bound: Option<f64>,
    /// Second moments `E[I_n^2]`, `n = 1..=N_max`, used for the tail.
    pub chaos_second_moments: Vec<f64>,
}

fn multisets(p: usize, nmax: usize) -> Vec<Vec<usize>> {
    fn rec(p: usize, lo: usize, nmax: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for n in lo..=nmax {
            cur.push(n);
            rec(p, n, nmax, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(p, 0, nmax, &mut Vec::new(), &mut out);
    out
}

fn multiplicity(ms: &[usize]) -> f64 {
    let mut m = ln_gamma(ms.len() as f64 + 1.0);
    let mut i = 0;
    while i < ms.len() {
        let j = ms[i..].iter().take_while(|&&v| v == ms[i]).count();
        m -= ln_gamma(j as f64 + 1.0);
        i += j;
    }
    m.exp().round()
}

/// `E[u(t,x)^p]` truncated to chaos orders `<= nmax` per factor, with a
/// heuristic tail estimate fitted from the computed second moments.
pub fn pth_moment_truncated(
    p: usize,
    spec: &ChaosKernelSpec,
    noise: &NoiseSpec,
    nmax: usize,
    samples: u64,
    seed: u64,
) -> Result<TruncatedMoment> {
    spec.validate()?;
    check_noise(spec, noise)?;
    let u0 = spec.initial_value;
    if p == 1 {
        return Ok(TruncatedMoment {
            estimate: MomentEstimate::exact(u0, Method::ClosedForm),
            tail_bound: Some(0.0),
            chaos_second_moments: vec![],
        });
    }
    if !(p == 2 || p == 4) {
        return Err(Error::UnsupportedParameter(format!("p = {p}; supported values are 1, 2 and 4")));
    }
    if nmax == 0 {
        return Ok(TruncatedMoment {
            estimate: MomentEstimate::exact(u0.powi(p as i32), Method::ClosedForm),
            tail_bound: None,
            chaos_second_moments: vec![],
        });
    }
    let mut value = 0.0;
    let mut var = 0.0;
    let mut n_samples = 0;
    let mut a = vec![0.0; nmax];
    for ms in multisets(p, nmax) {
        let total: usize = ms.iter().sum();
        if total % 2 == 1 || total > MAX_VERTICES {
            continue;
        }
        let zeros = ms.iter().filter(|&&n| n == 0).count();
        let mult = multiplicity(&ms) * u0.powi(zeros as i32);
        let e = diagram_sum(&ms, spec, noise, samples, seed)?;
        value += mult * e.value;
        var += (mult * e.std_error).powi(2);
        n_samples += e.n_samples;
        if p == 2 && ms[0] == ms[1] && ms[0] > 0 {
            a[ms[0] - 1] = e.value;
        }
    }
    if p == 4 {
        for (n, an) in a.iter_mut().enumerate() {
            let mut s = spec.clone();
            s.n = n + 1;
            *an = phi_n(&s, noise, samples, seed ^ 0x5eed)?.value;
        }
    }
    let hbar = spec.kernel.hbar(total_lambda(&noise.space));
    let tail = tail_estimate(p, &a, hbar, u0);
    Ok(TruncatedMoment {
        estimate: MomentEstimate {
            value,
            std_error: var.sqrt(),
            n_samples,
            seed,
            method: Method::Mc,
        },
        tail_bound: tail,
        chaos_second_moments: a,
    })
}

/// Fits `a_n ~ K rho^n / (n!)^{hbar+1}` and sums the extrapolated remainder.
fn tail_estimate(p: usize, a: &[f64], hbar: f64, u0: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = a
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(i, v)| {
            let n = (i + 1) as f64;
            (n, v.ln() + (hbar + 1.0) * ln_gamma(n + 1.0))
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|q| q.0).sum();
    let sy: f64 = pts.iter().map(|q| q.1).sum();
    let sxx: f64 = pts.iter().map(|q| q.0 * q.0).sum();
    let sxy: f64 = pts.iter().map(|q| q.0 * q.1).sum();
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    let icept = (sy - slope * sx) / m;
    let ahat = |n: f64| (icept + slope * n - (hbar + 1.0) * ln_gamma(n + 1.0)).exp();
    let nmax = a.len();
    let mut tail_a = Vec::new();
    for n in nmax + 1..nmax + 200 {
        let v = ahat(n as f64);
        tail_a.push(v);
        if v < 1e-18 {
            break;
        }
    }
    if p == 2 {
        return Some(tail_a.iter().sum());
    }
    let c = ((p - 1) as f64).sqrt();
    let head: f64 = u0.abs() + a.iter().enumerate().map(|(i, v)| c.powi(i as i32 + 1) * v.max(0.0).sqrt()).sum::<f64>();
    let rest: f64 = tail_a
        .iter()
        .enumerate()
        .map(|(i, v)| c.powi((nmax + 1 + i) as i32) * v.sqrt())
        .sum();
    Some(p as f64 * rest * (head + rest).powi(p as i32 - 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f1_single_heat_factor() {
        let s = ChaosKernelSpec::new(KernelSpec::Heat { d: 1 }, 1, 1.0);
        let v = eval_f_n(&s, &[0.5], &[vec![0.0]]).unwrap();
        assert!((v - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn unordered_is_zero() {
        let s = ChaosKernelSpec::new(KernelSpec::Heat { d: 1 }, 2, 1.0);
        assert_eq!(eval_f_n(&s, &[0.6, 0.3], &[vec![0.0], vec![0.1]]).unwrap(), 0.0);
    }

    #[test]
    fn multiset_multiplicities() {
        assert_eq!(multiplicity(&[0, 0, 1, 1]), 6.0);
        assert_eq!(multiplicity(&[1, 2]), 2.0);
        let total: f64 = multisets(4, 2).iter().map(|m| multiplicity(m)).sum();
        assert_eq!(total, 81.0);
    }

    #[test]
    fn white_heat_closed_form_n1() {
        let t: f64 = 0.7;
        assert!((phi_n_white_heat(1, t, 1.0) - (t / std::f64::consts::PI).sqrt()).abs() < 1e-15);
    }
}
