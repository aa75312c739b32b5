//! Importance samplers for chains of Green's-function factors joined by
//! noise covariances.

use std::f64::consts::PI;

use rand::Rng as _;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::kernels::special::{ln_gamma, sphere_area};
use crate::kernels::{DensityEval, KernelSpec};
use crate::mc::Rng;
use crate::noise::{NoiseSpec, SpaceCovariance, TimeCovariance};

pub(crate) type P = [f64; 3];

fn norm(z: &P, d: usize) -> f64 {
    z[..d].iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy)]
enum Proposal {
    Gauss,
    Wave1,
    Wave2,
    /// Half Gaussian, half multivariate t with `nu` degrees of freedom.
    Mixture { nu: f64, ln_tc: f64 },
}

#[derive(Debug, Clone, Copy)]
enum Space {
    Delta,
    Riesz(f64),
    Product([f64; 3]),
}

pub(crate) struct Sampler {
    pub d: usize,
    kernel: KernelSpec,
    eval: DensityEval,
    prop: Proposal,
    gamma: Option<f64>,
    space: Space,
}

impl Sampler {
    pub fn new(kernel: &KernelSpec, noise: &NoiseSpec) -> Result<Self> {
        noise.validate()?;
        let eval = DensityEval::new(kernel)?;
        let d = kernel.dim();
        if d > 3 {
            return Err(Error::DimensionCap(format!("spatial dimension {d} > 3")));
        }
        if noise.space.dim() != d {
            return Err(Error::InvalidParameter(format!(
                "noise dimension {} does not match kernel dimension {d}",
                noise.space.dim()
            )));
        }
        let prop = match (*kernel, &eval) {
            (_, DensityEval::Heat { .. }) => Proposal::Gauss,
            (KernelSpec::Wave { d: 1 }, _) => Proposal::Wave1,
            (KernelSpec::Wave { .. }, _) => Proposal::Wave2,
            (KernelSpec::AlphaHeat { alpha, .. }, _) | (KernelSpec::FracDiff { alpha, .. }, _) => {
                let nu = if alpha < 2.0 { alpha / 2.0 } else { 1.0 };
                let df = d as f64;
                let ln_tc = ln_gamma((nu + df) / 2.0) - ln_gamma(nu / 2.0) - 0.5 * df * (nu * PI).ln();
                Proposal::Mixture { nu, ln_tc }
            }
            (KernelSpec::Heat { .. }, _) => Proposal::Gauss,
        };
        let gamma = match noise.time {
            TimeCovariance::WhiteInTime => None,
            TimeCovariance::PowerLaw { gamma, .. } => Some(gamma),
        };
        let space = match &noise.space {
            SpaceCovariance::DeltaD1 => Space::Delta,
            SpaceCovariance::Riesz { lambda, .. } => Space::Riesz(*lambda),
            SpaceCovariance::ProductRL { lambdas } => {
                let mut l = [0.0; 3];
                l[..d].copy_from_slice(lambdas);
                Space::Product(l)
            }
            SpaceCovariance::Spectral { .. } => {
                return Err(Error::UnsupportedParameter(
                    "a spectral covariance has no pointwise form for diagram sampling".into(),
                ))
            }
        };
        Ok(Sampler {
            d,
            kernel: *kernel,
            eval,
            prop,
            gamma,
            space,
        })
    }

    /// `G_dt(z)`, zero for `dt <= 0`.
    pub fn kernel(&self, dt: f64, z: &P) -> f64 {
        self.eval.radial(dt, norm(z, self.d))
    }

    fn scale(&self, dt: f64) -> f64 {
        self.kernel.spatial_scale(dt)
    }

    fn normal(&self, rng: &mut Rng, s: f64) -> P {
        let mut z = [0.0; 3];
        for v in z.iter_mut().take(self.d) {
            let g: f64 = StandardNormal.sample(rng);
            *v = s * g;
        }
        z
    }

    fn direction(&self, rng: &mut Rng) -> P {
        loop {
            let z = self.normal(rng, 1.0);
            let r = norm(&z, self.d);
            if r > 0.0 {
                let mut u = [0.0; 3];
                for i in 0..self.d {
                    u[i] = z[i] / r;
                }
                return u;
            }
        }
    }

    /// Density of the kernel-matched proposal for an increment over time `dt`.
    pub fn prop_pdf(&self, dt: f64, z: &P) -> f64 {
        let d = self.d as f64;
        let r = norm(z, self.d);
        match self.prop {
            Proposal::Gauss => (2.0 * PI * dt).powf(-d / 2.0) * (-r * r / (2.0 * dt)).exp(),
            Proposal::Wave1 | Proposal::Wave2 => self.kernel(dt, z) / dt,
            Proposal::Mixture { nu, ln_tc } => {
                let s = self.scale(dt);
                let g = (2.0 * PI * s * s).powf(-d / 2.0) * (-r * r / (2.0 * s * s)).exp();
                let u = r / s;
                let tt = (ln_tc - (nu + d) / 2.0 * (1.0 + u * u / nu).ln()).exp() / s.powf(d);
                0.5 * g + 0.5 * tt
            }
        }
    }

    /// Draws an increment over time `dt` and returns it with `G_dt(z) / q(z)`.
    pub fn propose(&self, rng: &mut Rng, dt: f64) -> (P, f64) {
        match self.prop {
            Proposal::Gauss => (self.normal(rng, dt.sqrt()), 1.0),
            Proposal::Wave1 => {
                let u: f64 = rng.random();
                ([dt * (2.0 * u - 1.0), 0.0, 0.0], dt)
            }
            Proposal::Wave2 => {
                let u: f64 = rng.random();
                let r = dt * (1.0 - (1.0 - u) * (1.0 - u)).sqrt();
                let th = 2.0 * PI * rng.random::<f64>();
                ([r * th.cos(), r * th.sin(), 0.0], dt)
            }
            Proposal::Mixture { nu, .. } => {
                let s = self.scale(dt);
                let mut z = self.normal(rng, s);
                if rng.random::<bool>() {
                    let chi: f64 = Gamma::new(nu / 2.0, 2.0).unwrap().sample(rng);
                    let f = (nu / chi.max(f64::MIN_POSITIVE)).sqrt();
                    for v in z.iter_mut() {
                        *v *= f;
                    }
                }
                let q = self.prop_pdf(dt, &z);
                let w = if q > 0.0 { self.kernel(dt, &z) / q } else { 0.0 };
                (z, w)
            }
        }
    }

    fn lambda(&self, z: &P) -> f64 {
        match self.space {
            Space::Delta => 1.0,
            Space::Riesz(l) => norm(z, self.d).powf(-l),
            Space::Product(l) => (0..self.d).map(|i| z[i].abs().powf(-l[i])).product(),
        }
    }

    /// Singular proposal `~ Lambda` on a ball (or cube) of radius `r0`.
    fn singular_sample(&self, rng: &mut Rng, r0: f64) -> P {
        match self.space {
            Space::Riesz(l) => {
                let d = self.d as f64;
                let rho = r0 * rng.random::<f64>().powf(1.0 / (d - l));
                let u = self.direction(rng);
                [rho * u[0], rho * u[1], rho * u[2]]
            }
            Space::Product(l) => {
                let mut z = [0.0; 3];
                for i in 0..self.d {
                    let a = r0 * rng.random::<f64>().powf(1.0 / (1.0 - l[i]));
                    z[i] = if rng.random::<bool>() { a } else { -a };
                }
                z
            }
            Space::Delta => [0.0; 3],
        }
    }

    fn singular_pdf(&self, r0: f64, z: &P) -> f64 {
        match self.space {
            Space::Riesz(l) => {
                let r = norm(z, self.d);
                if r >= r0 {
                    return 0.0;
                }
                let d = self.d as f64;
                (d - l) * r.powf(-l) / (sphere_area(self.d) * r0.powf(d - l))
            }
            Space::Product(l) => {
                let mut q = 1.0;
                for i in 0..self.d {
                    let a = z[i].abs();
                    if a >= r0 {
                        return 0.0;
                    }
                    q *= (1.0 - l[i]) * a.powf(-l[i]) / (2.0 * r0.powf(1.0 - l[i]));
                }
                q
            }
            Space::Delta => 0.0,
        }
    }

    /// Time of a vertex whose partner sits at `t_u`, with its weight
    /// `gamma(|t_v - t_u|) / q`.
    pub fn partner_time(&self, rng: &mut Rng, t: f64, t_u: f64) -> (f64, f64) {
        match self.gamma {
            None => (t_u, 1.0),
            Some(g) => {
                let tau = t * rng.random::<f64>().powf(1.0 / (1.0 - g));
                let s = if rng.random::<bool>() { t_u + tau } else { t_u - tau };
                (s, 2.0 * t.powf(1.0 - g) / (1.0 - g))
            }
        }
    }

    /// Position of a vertex with partner at `x_u`, linked by `G_dt` to the
    /// point `above`; returns the point and `Lambda(x_v - x_u) G_dt(above - x_v) / q`.
    pub fn partner_point(&self, rng: &mut Rng, x_u: &P, above: &P, dt: f64) -> (P, f64) {
        let d = self.d;
        let sub = |a: &P, b: &P| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
        if let Space::Delta = self.space {
            return (*x_u, self.kernel(dt, &sub(above, x_u)));
        }
        let r0 = 2.0 * (self.scale(dt) + norm(&sub(above, x_u), d));
        let x_v = if rng.random::<bool>() {
            let z = self.singular_sample(rng, r0);
            [x_u[0] + z[0], x_u[1] + z[1], x_u[2] + z[2]]
        } else {
            let (z, _) = self.propose(rng, dt);
            [above[0] + z[0], above[1] + z[1], above[2] + z[2]]
        };
        let za = sub(&x_v, x_u);
        let zb = sub(&x_v, above);
        let q = 0.5 * self.singular_pdf(r0, &za) + 0.5 * self.prop_pdf(dt, &zb);
        if !(q > 0.0) {
            return (x_v, 0.0);
        }
        let w = self.lambda(&za) * self.kernel(dt, &zb) / q;
        (x_v, if w.is_finite() { w } else { 0.0 })
    }
}

/// Vertex layout of a diagram, in processing order.
pub(crate) struct Layout {
    pub rows: Vec<usize>,
    pub offsets: Vec<usize>,
    pub partner: Vec<usize>,
}

impl Layout {
    pub fn new(rows: &[usize], edges: &[((usize, usize), (usize, usize))]) -> Self {
        let mut offsets = vec![0; rows.len()];
        for k in 1..rows.len() {
            offsets[k] = offsets[k - 1] + rows[k - 1];
        }
        let total: usize = rows.iter().sum();
        let mut partner = vec![0; total];
        for &((r1, c1), (r2, c2)) in edges {
            let a = offsets[r1 - 1] + c1 - 1;
            let b = offsets[r2 - 1] + c2 - 1;
            partner[a] = b;
            partner[b] = a;
        }
        Layout {
            rows: rows.to_vec(),
            offsets,
            partner,
        }
    }
}

/// One weighted sample of `F_D`: rows are chained downward from `(t, x)`.
pub(crate) fn sample_fd(s: &Sampler, lay: &Layout, t: f64, x: &P, u0: f64, rng: &mut Rng) -> f64 {
    let total = lay.partner.len();
    let mut times = [0.0; 16];
    let mut pos = [[0.0; 3]; 16];
    let mut done = [false; 16];
    let mut w = 1.0;
    for (k, &n) in lay.rows.iter().enumerate() {
        let (mut tt, mut xx) = (t, *x);
        for col in (0..n).rev() {
            let i = lay.offsets[k] + col;
            let p = lay.partner[i];
            debug_assert!(i < total);
            if done[p] {
                let (tv, wt) = s.partner_time(rng, t, times[p]);
                if !(tv > 0.0 && tv < tt) {
                    return 0.0;
                }
                let (xv, ws) = s.partner_point(rng, &pos[p], &xx, tt - tv);
                w *= wt * ws;
                tt = tv;
                xx = xv;
            } else {
                let u: f64 = rng.random();
                let dt = tt * u * u;
                if !(dt > 0.0) {
                    return 0.0;
                }
                w *= 2.0 * (tt * dt).sqrt();
                let (z, r) = s.propose(rng, dt);
                w *= r;
                tt -= dt;
                xx = [xx[0] - z[0], xx[1] - z[1], xx[2] - z[2]];
            }
            if w == 0.0 {
                return 0.0;
            }
            times[i] = tt;
            pos[i] = xx;
            done[i] = true;
        }
        w *= u0;
    }
    w
}

/// One weighted sample of `E[I_n^2]` through the unsymmetrized identity
/// `int_{t ordered} int_s f(t, x) f(sort(s, y)) prod gamma Lambda`; the first
/// copy is drawn on a Dirichlet simplex, the second is chained like a diagram row.
pub(crate) fn sample_phi(s: &Sampler, n: usize, t: f64, x: &P, u0: f64, ln_dir: f64, rng: &mut Rng) -> f64 {
    let mut g = [0.0; 9];
    let g0: f64 = Gamma::new(1.0, 1.0).unwrap().sample(rng);
    g[0] = g0;
    let half = Gamma::new(0.5, 1.0).unwrap();
    let mut sum = g0;
    for gi in g.iter_mut().take(n + 1).skip(1) {
        *gi = half.sample(rng);
        sum += *gi;
    }
    let mut ln_q = ln_dir;
    for gi in g.iter_mut().take(n + 1) {
        *gi *= t / sum;
    }
    for gi in g.iter().take(n + 1).skip(1) {
        ln_q -= 0.5 * (gi / t).ln();
    }
    if !ln_q.is_finite() || g[1..=n].iter().any(|v| !(*v > 0.0)) {
        return 0.0;
    }
    let mut w = (-ln_q).exp();
    // times t_1 < ... < t_n and gap above each
    let mut times = [0.0; 8];
    let mut acc = g[0];
    for i in 0..n {
        times[i] = acc;
        acc += g[i + 1];
    }
    let mut pos = [[0.0; 3]; 8];
    let mut xx = *x;
    for i in (0..n).rev() {
        let (z, r) = s.propose(rng, g[i + 1]);
        w *= r;
        xx = [xx[0] - z[0], xx[1] - z[1], xx[2] - z[2]];
        pos[i] = xx;
    }
    if w == 0.0 {
        return 0.0;
    }
    // second copy: times first, then positions chained downward in time order
    let mut st = [(0.0, 0usize); 8];
    for i in 0..n {
        let (si, wt) = s.partner_time(rng, t, times[i]);
        if !(si > 0.0 && si < t) {
            return 0.0;
        }
        w *= wt;
        st[i] = (si, i);
    }
    let c = &mut st[..n];
    c.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (mut tt, mut xx) = (t, *x);
    for &(si, i) in c.iter() {
        let (y, ws) = s.partner_point(rng, &pos[i], &xx, tt - si);
        w *= ws;
        if w == 0.0 {
            return 0.0;
        }
        tt = si;
        xx = y;
    }
    w * u0 * u0
}

/// `ln` of the Dirichlet(1, 1/2, ..., 1/2) normalizing constant on the
/// simplex of total `t`, without the `prod (g_i / t)^{-1/2}` part.
pub(crate) fn ln_dirichlet_norm(n: usize, t: f64) -> f64 {
    ln_gamma(1.0 + n as f64 / 2.0) - n as f64 * ln_gamma(0.5) - n as f64 * t.ln()
}
