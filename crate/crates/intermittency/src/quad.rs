//! Adaptive Gauss-Kronrod quadrature and series acceleration.
//!
//! The 21-point Kronrod rule with its embedded 10-point Gauss rule is applied
//! on a global work list that always bisects the interval with the largest
//! error estimate. Error estimates follow the usual QUADPACK heuristics.

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_36,
    0.295_524_224_714_752_87,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_intervals: 4000,
        }
    }
}

impl QuadOptions {
    pub fn tol(abs_tol: f64, rel_tol: f64) -> Self {
        QuadOptions {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOutput {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
    pub converged: bool,
}

impl QuadOutput {
    pub fn into_result(self, what: &str) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::QuadratureNonConvergence {
                what: what.to_string(),
                estimate: self.value,
                error: self.error,
            })
        }
    }
}

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    frozen: bool,
}

fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[10];
    let mut resg = 0.0;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - reskh).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let result = resk * h;
    let resabs = resabs * h.abs();
    let resasc = resasc * h.abs();
    let mut err = ((resk - resg) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (result, err)
}

/// Adaptive integration of `f` over `[a, b]` split at the given interior points.
pub fn integrate_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    opts: QuadOptions,
) -> QuadOutput {
    let mut segs: Vec<Segment> = Vec::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            let (value, error) = gk21(&mut f, w[0], w[1]);
            segs.push(Segment {
                a: w[0],
                b: w[1],
                value,
                error,
                frozen: false,
            });
        }
    }
    loop {
        let total: f64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.error).sum();
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if err <= target || !err.is_finite() && !total.is_finite() {
            return QuadOutput {
                value: total,
                error: err,
                intervals: segs.len(),
                converged: err <= target,
            };
        }
        let worst = segs
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.frozen)
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i);
        let Some(i) = worst else {
            // Every remaining segment is at the resolution limit.
            return QuadOutput {
                value: total,
                error: err,
                intervals: segs.len(),
                converged: err <= 1e3 * target,
            };
        };
        if segs.len() >= opts.max_intervals {
            return QuadOutput {
                value: total,
                error: err,
                intervals: segs.len(),
                converged: false,
            };
        }
        let s = segs[i];
        let m = 0.5 * (s.a + s.b);
        if m <= s.a || m >= s.b || (s.b - s.a) <= 1e-14 * s.a.abs().max(s.b.abs()) {
            segs[i].frozen = true;
            continue;
        }
        let (v1, e1) = gk21(&mut f, s.a, m);
        let (v2, e2) = gk21(&mut f, m, s.b);
        segs[i] = Segment {
            a: s.a,
            b: m,
            value: v1,
            error: e1,
            frozen: false,
        };
        segs.push(Segment {
            a: m,
            b: s.b,
            value: v2,
            error: e2,
            frozen: false,
        });
    }
}

pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> QuadOutput {
    integrate_breaks(f, &[a, b], opts)
}

/// Integral over `[a, inf)` through the map `x = a + u / (1 - u)`.
pub fn integrate_to_inf<F: FnMut(f64) -> f64>(mut f: F, a: f64, opts: QuadOptions) -> QuadOutput {
    integrate(
        |u| {
            let v = 1.0 - u;
            let val = f(a + u / v);
            if val == 0.0 {
                0.0
            } else {
                val / (v * v)
            }
        },
        0.0,
        1.0,
        opts,
    )
}

/// Wynn epsilon extrapolation of a sequence of partial sums.
/// Returns the extrapolated limit and a crude error estimate.
pub fn wynn_epsilon(partial: &[f64]) -> (f64, f64) {
    let n = partial.len();
    if n < 3 {
        let last = *partial.last().unwrap_or(&0.0);
        let prev = if n >= 2 { partial[n - 2] } else { 0.0 };
        return (last, (last - prev).abs());
    }
    // e[k] holds column k of the epsilon table (even columns are estimates).
    let mut prev_col: Vec<f64> = vec![0.0; n + 1];
    let mut col: Vec<f64> = partial.to_vec();
    let mut best = partial[n - 1];
    let mut best_err = (partial[n - 1] - partial[n - 2]).abs();
    let mut k = 0usize;
    while col.len() >= 2 {
        let mut next = Vec::with_capacity(col.len() - 1);
        for i in 0..col.len() - 1 {
            let diff = col[i + 1] - col[i];
            let base = if k == 0 { 0.0 } else { prev_col[i + 1] };
            if diff == 0.0 || !diff.is_finite() {
                next.push(f64::INFINITY);
            } else {
                next.push(base + 1.0 / diff);
            }
        }
        k += 1;
        if k % 2 == 0 && next.len() >= 2 {
            let m = next.len();
            let est = next[m - 1];
            let err = (next[m - 1] - next[m - 2]).abs();
            if est.is_finite() && err < best_err {
                best = est;
                best_err = err;
            }
        }
        prev_col = col;
        col = next;
    }
    (best, best_err)
}

/// Sums `panel(k)` for k = 0, 1, ... until the panels become negligible, or
/// extrapolates the partial sums with the epsilon algorithm when the terms decay
/// slowly. Intended for integrals of slowly decaying amplitudes against
/// oscillating weights, split at (approximate) zeros of the weight.
pub fn sum_panels<P: FnMut(usize) -> f64>(
    mut panel: P,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<f64> {
    let mut partial: Vec<f64> = Vec::new();
    let mut s = 0.0;
    let mut small_run = 0;
    let mut last_est = f64::NAN;
    let mut stable = 0;
    for k in 0..max_panels {
        let v = panel(k);
        s += v;
        partial.push(s);
        let target = abs_tol.max(rel_tol * s.abs());
        if v.abs() <= 0.1 * target {
            small_run += 1;
            if small_run >= 3 {
                return Ok(s);
            }
        } else {
            small_run = 0;
        }
        if partial.len() >= 12 && partial.len() % 2 == 0 {
            let window = &partial[partial.len().saturating_sub(40)..];
            let (est, err) = wynn_epsilon(window);
            let target = abs_tol.max(rel_tol * est.abs());
            if err <= target && (est - last_est).abs() <= target {
                stable += 1;
                if stable >= 2 {
                    return Ok(est);
                }
            } else {
                stable = 0;
            }
            last_est = est;
        }
    }
    Err(Error::QuadratureNonConvergence {
        what: "oscillatory panel sum".into(),
        estimate: s,
        error: partial
            .len()
            .checked_sub(2)
            .map(|i| (partial[i + 1] - partial[i]).abs())
            .unwrap_or(f64::NAN),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let out = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, QuadOptions::default());
        assert!((out.value - 0.0).abs() < 1e-14);
    }

    #[test]
    fn endpoint_singularity() {
        let out = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, QuadOptions::default());
        assert!(out.converged);
        assert!((out.value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn semi_infinite_gaussian() {
        let out = integrate_to_inf(|x| (-x * x).exp(), 0.0, QuadOptions::default());
        assert!((out.value - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn epsilon_alternating_series() {
        // 1 - 1/2 + 1/3 - ... = ln 2
        let mut s = 0.0;
        let mut partial = Vec::new();
        for k in 1..=20 {
            s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
            partial.push(s);
        }
        let (est, _) = wynn_epsilon(&partial);
        assert!((est - std::f64::consts::LN_2).abs() < 1e-10);
    }

    #[test]
    fn dirichlet_integral_by_panels() {
        // int_0^inf sin x / x dx = pi/2
        let pi = std::f64::consts::PI;
        let v = sum_panels(
            |k| {
                let a = k as f64 * pi;
                integrate(
                    |x| if x == 0.0 { 1.0 } else { x.sin() / x },
                    a,
                    a + pi,
                    QuadOptions::default(),
                )
                .value
            },
            1e-12,
            1e-12,
            400,
        )
        .unwrap();
        assert!((v - pi / 2.0).abs() < 1e-9);
    }
}
