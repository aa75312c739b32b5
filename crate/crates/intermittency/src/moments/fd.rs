//! Finite-difference reference solver for the stochastic heat equation with
//! space-time white noise on the line.
//!
//! Explicit Euler on a periodic grid with one Rademacher variable per cell and
//! step. The solution is multilinear in the noise variables, so its first two
//! moments agree with those of the Gaussian scheme.

use rand::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mc::{self, Stats};

const PATHS_PER_BLOCK: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdConfig {
    pub t: f64,
    pub dx: f64,
    pub dt: f64,
    pub n_paths: u64,
    pub seed: u64,
    /// Half-width of the periodic domain.
    pub half_width: f64,
    /// Multiplier of the noise term.
    pub amplitude: f64,
}

impl FdConfig {
    /// Grid step `dx`, the largest stable `dt = dx^2/2` and a domain of
    /// half-width `max(4 sqrt(t), 1)`.
    pub fn new(t: f64, dx: f64, n_paths: u64, seed: u64) -> Self {
        FdConfig {
            t,
            dx,
            dt: dx * dx / 2.0,
            n_paths,
            seed,
            half_width: (4.0 * t.sqrt()).max(1.0),
            amplitude: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdMoments {
    /// `E[u^k]`, `k = 1..=4`, at `x = 0`.
    pub moments: [f64; 4],
    pub std_errors: [f64; 4],
    pub n_paths: u64,
    pub steps: u64,
    pub cells: usize,
}

/// Sample moments of `u(t, 0)` for `du = u_xx/2 dt + u dW`, `u(0) = 1`.
pub fn fd_oracle_she(cfg: &FdConfig) -> Result<FdMoments> {
    let FdConfig {
        t,
        dx,
        dt,
        n_paths,
        seed,
        half_width,
        amplitude,
    } = *cfg;
    if !(t > 0.0) {
        return Err(Error::NonpositiveTime(t));
    }
    if !(dx > 0.0 && dt > 0.0) || n_paths == 0 {
        return Err(Error::InvalidParameter("dx, dt and n_paths must be positive".into()));
    }
    if dt > dx * dx / 2.0 * (1.0 + 1e-12) {
        return Err(Error::UnstableDiscretization(format!(
            "dt = {dt:e} exceeds dx^2/2 = {:e}",
            dx * dx / 2.0
        )));
    }
    if half_width < 4.0 * t.sqrt() {
        return Err(Error::InvalidParameter(format!(
            "domain half-width {half_width} is below 4 sqrt(t) = {}",
            4.0 * t.sqrt()
        )));
    }
    let cells = ((2.0 * half_width / dx).round() as usize).div_ceil(64) * 64;
    let steps = (t / dt).ceil() as u64;
    let dt = t / steps as f64;
    let r = dt / (2.0 * dx * dx);
    let amp = amplitude * (dt / dx).sqrt();
    let (c_lo, c_hi) = (1.0 - 2.0 * r - amp, 1.0 - 2.0 * r + amp);
    let blocks = n_paths.div_ceil(PATHS_PER_BLOCK);
    let parts = mc::map_blocks(seed, 0xfd, blocks, |rng, b| {
        let len = PATHS_PER_BLOCK.min(n_paths - b * PATHS_PER_BLOCK);
        let mut st = [Stats::default(); 4];
        let mut u = vec![1.0f64; cells];
        let mut v = vec![0.0f64; cells];
        let mut bits = vec![0u64; cells / 64];
        for _ in 0..len {
            u.fill(1.0);
            for _ in 0..steps {
                for w in bits.iter_mut() {
                    *w = rng.next_u64();
                }
                step(&u, &mut v, &bits, r, c_lo, c_hi);
                std::mem::swap(&mut u, &mut v);
            }
            let x = u[cells / 2];
            let mut p = 1.0;
            for s in st.iter_mut() {
                p *= x;
                s.push(p);
            }
        }
        st
    });
    let mut tot = [Stats::default(); 4];
    for part in &parts {
        for k in 0..4 {
            tot[k] = tot[k].merge(&part[k]);
        }
    }
    Ok(FdMoments {
        moments: tot.map(|s| s.mean),
        std_errors: tot.map(|s| s.std_error()),
        n_paths,
        steps,
        cells,
    })
}

#[inline]
fn step(u: &[f64], v: &mut [f64], bits: &[u64], r: f64, c_lo: f64, c_hi: f64) {
    let n = u.len();
    let coef = [c_lo, c_hi];
    v[0] = u[0] * coef[(bits[0] & 1) as usize] + r * (u[n - 1] + u[1]);
    v[n - 1] = u[n - 1] * coef[(bits[(n - 1) / 64] >> 63) as usize] + r * (u[n - 2] + u[0]);
    for (wi, &w) in bits.iter().enumerate() {
        let base = wi * 64;
        let lo = if wi == 0 { 1 } else { 0 };
        let hi = if base + 64 == n { 63 } else { 64 };
        for k in lo..hi {
            let i = base + k;
            let c = coef[((w >> k) & 1) as usize];
            v[i] = u[i] * c + r * (u[i - 1] + u[i + 1]);
        }
    }
}
