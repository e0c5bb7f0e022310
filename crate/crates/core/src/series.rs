//! Exact return and first-return probabilities on the lumped chain, series
//! estimates of `ρ`, and the Rayleigh quotient of the test function
//! `f(x) = g(|x|)`.
//!
//! The DP runs on the symmetrised kernel `S(x,y) = sqrt(q(x,y) q(y,x))`,
//! whose origin-to-origin powers equal those of `q`. The state vector is
//! rescaled to unit maximum every step and the scale kept in log form.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::kernel::{self, QuotientChain};
use crate::math::{abs, exp, log, log_add, sqrt};
use crate::model::{self, GraphModel};
use crate::{Error, Result};

/// `ln p^(n)(o,o)` and `ln f^(n)(o,o)` for `n = 0..=n_max`; zeros are `-inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTable {
    pub n_max: usize,
    pub log_p: Vec<f64>,
    pub log_f: Vec<f64>,
}

impl SeriesTable {
    pub fn p(&self, n: usize) -> f64 {
        exp(self.log_p[n])
    }

    pub fn f(&self, n: usize) -> f64 {
        exp(self.log_f[n])
    }
}

/// Symmetrised rows in compressed form over the first `states` indices.
struct SymmetricKernel {
    start: Vec<usize>,
    target: Vec<usize>,
    weight: Vec<f64>,
}

impl SymmetricKernel {
    fn new(chain: &QuotientChain, states: usize) -> Self {
        let mut start = Vec::with_capacity(states + 1);
        let mut target = Vec::with_capacity(3 * states);
        let mut weight = Vec::with_capacity(3 * states);
        start.push(0);
        for i in 0..states {
            for (t, w) in chain.symmetric_row(chain.state(i)) {
                target.push(chain.index(t));
                weight.push(w);
            }
            start.push(target.len());
        }
        Self { start, target, weight }
    }

    fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.start[i], self.start[i + 1]);
        self.target[a..b].iter().copied().zip(self.weight[a..b].iter().copied())
    }
}

/// One truncated, renormalised step `v ↦ v S` on indices `< live_out`.
/// Returns the log of the rescaling factor.
fn step(
    kernel: &SymmetricKernel,
    v: &[f64],
    live_in: usize,
    out: &mut [f64],
    live_out: usize,
    taboo_origin: bool,
) -> f64 {
    out[..live_out].iter_mut().for_each(|x| *x = 0.0);
    for (i, &mass) in v.iter().enumerate().take(live_in) {
        if mass == 0.0 || (taboo_origin && i == 0) {
            continue;
        }
        for (j, w) in kernel.row(i) {
            if j < live_out {
                out[j] += mass * w;
            }
        }
    }
    let max = out[..live_out].iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        out[..live_out].iter_mut().for_each(|x| *x /= max);
        log(max)
    } else {
        0.0
    }
}

fn safe_log(x: f64) -> f64 {
    if x > 0.0 {
        log(x)
    } else {
        f64::NEG_INFINITY
    }
}

/// Runs the (optionally origin-taboo) DP and returns, per step `n`, the log of
/// the origin-to-origin weight (for `taboo_origin`, the first-return weight).
fn run(chain: &QuotientChain, n_max: usize, taboo_origin: bool) -> Vec<f64> {
    let mut out = vec![f64::NEG_INFINITY; n_max + 1];
    out[0] = if taboo_origin { f64::NEG_INFINITY } else { 0.0 };
    if n_max == 0 {
        return out;
    }
    // a state at level k at step j can only matter if k <= n_max - j
    let states = chain.states_up_to(n_max / 2 + 1);
    let kernel = SymmetricKernel::new(chain, states);
    let mut v = vec![0.0; states];
    let mut next = vec![0.0; states];
    v[0] = 1.0;
    let mut scale = 0.0;
    let mut live = 1;
    for n in 1..=n_max {
        if taboo_origin {
            // mass arriving at the origin now is a first return at step n
            let hit: f64 = (0..live)
                .filter(|&i| i != 0 || n == 1)
                .map(|i| v[i] * kernel.row(i).find(|&(j, _)| j == 0).map_or(0.0, |(_, w)| w))
                .sum();
            out[n] = safe_log(hit) + scale;
        }
        let level_cap = n.min(n_max - n);
        let live_out = chain.states_up_to(level_cap).min(states);
        let taboo = taboo_origin && n > 1;
        scale += step(&kernel, &v, live, &mut next, live_out, taboo);
        core::mem::swap(&mut v, &mut next);
        live = live_out;
        if !taboo_origin {
            out[n] = safe_log(v[0]) + scale;
        }
        if taboo_origin {
            v[0] = 0.0;
        }
    }
    out
}

/// `ln p^(n)(o,o)` for `n = 0..=n_max`.
pub fn p_series(chain: &QuotientChain, n_max: usize) -> Vec<f64> {
    run(chain, n_max, false)
}

/// `ln f^(n)(o,o)` for `n = 0..=n_max`.
pub fn f_series(chain: &QuotientChain, n_max: usize) -> Vec<f64> {
    run(chain, n_max, true)
}

pub fn series_table(chain: &QuotientChain, n_max: usize) -> SeriesTable {
    SeriesTable { n_max, log_p: p_series(chain, n_max), log_f: f_series(chain, n_max) }
}

/// Largest deviation of total mass from 1 over the first `n` steps of the
/// plain forward DP on the lumped kernel.
pub fn max_mass_defect(chain: &QuotientChain, n: usize) -> f64 {
    kernel::quotient_distributions(chain, n).iter().map(|d| abs(d.iter().sum::<f64>() - 1.0)).fold(0.0, f64::max)
}

/// `max_n |p^(n) - Σ_{k=1}^n f^(k) p^(n-k)| / p^(n)` (absolute where `p^(n) = 0`).
pub fn renewal_check(table: &SeriesTable) -> f64 {
    let mut worst: f64 = 0.0;
    for n in 1..=table.n_max {
        let lp = table.log_p[n];
        let mut log_rhs = f64::NEG_INFINITY;
        for k in 1..=n {
            log_rhs = log_add(log_rhs, table.log_f[k] + table.log_p[n - k]);
        }
        let residual = if lp == f64::NEG_INFINITY { exp(log_rhs) } else { abs(1.0 - exp(log_rhs - lp)) };
        worst = worst.max(residual);
    }
    worst
}

/// Series estimate of `ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoEstimate {
    pub rho: f64,
    /// Spread of the corrected ratio over the second half of the table.
    pub error: f64,
    /// Least-squares slope of `ln ρ̂_n` against `1/n`.
    pub slope: f64,
    /// RMS residual of that fit.
    pub residual: f64,
}

/// `ρ̂_n = (p^(n+2) / p^(n))^{1/2} ((n+2)/n)^{3/4}`, i.e. step-2 ratios with
/// the `n^{-3/2}` factor divided out. `period = 2` restricts to even `n`.
pub fn rho_from_series(table: &SeriesTable, period: usize) -> Result<RhoEstimate> {
    if table.n_max < 200 {
        return Err(Error::InsufficientData(format!("need n_max >= 200, got {}", table.n_max)));
    }
    if !(1..=2).contains(&period) {
        return Err(Error::InsufficientData(format!("period must be 1 or 2, got {period}")));
    }
    let mut n_end = table.n_max - 2;
    if period == 2 {
        n_end -= n_end % 2;
    }
    let lo = n_end / 2;
    let points: Vec<(f64, f64)> = (lo..=n_end)
        .filter(|n| n % period == 0 && *n > 0)
        .filter_map(|n| {
            let (a, b) = (table.log_p[n], table.log_p[n + 2]);
            if a.is_finite() && b.is_finite() {
                let nf = n as f64;
                Some((nf, 0.5 * (b - a) + 0.75 * log((nf + 2.0) / nf)))
            } else {
                None
            }
        })
        .collect();
    if points.len() < 10 {
        return Err(Error::InsufficientData(format!("only {} usable ratios in [{lo}, {n_end}]", points.len())));
    }
    let last = points.last().expect("nonempty").1;
    let (min, max) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(_, y)| (a.min(y), b.max(y)));
    let xs: Vec<f64> = points.iter().map(|&(n, _)| 1.0 / n).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, y)| y).collect();
    let (slope, intercept) = linear_fit(&xs, &ys);
    let rms = sqrt(
        xs.iter()
            .zip(&ys)
            .map(|(x, y)| {
                let r = y - (intercept + slope * x);
                r * r
            })
            .sum::<f64>()
            / xs.len() as f64,
    );
    let rho = exp(last);
    Ok(RhoEstimate { rho, error: rho * (max - min), slope, residual: rms })
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// `ln g(k)` for `g(k) = (1 + b k) ((d-1)/λ)^{-k/2}`, `b = (d-1-λ)/(d-1+λ)`.
fn log_g(d: f64, lambda: f64, k: usize) -> f64 {
    let b = (d - 1.0 - lambda) / (d - 1.0 + lambda);
    let k = k as f64;
    log(1.0 + b * k) - 0.5 * k * log((d - 1.0) / lambda)
}

fn check_rayleigh(model: &GraphModel, lambda: f64) -> Result<f64> {
    model.validate()?;
    let d = f64::from(model.degree());
    if !(lambda > 0.0 && lambda < d - 1.0) {
        return Err(Error::DomainError(format!("Rayleigh test function needs λ in (0, {}), got {lambda}", d - 1.0)));
    }
    Ok(d)
}

/// Per-type `(d^+, d^0)` at levels `>= 1`.
fn type_degrees(model: &GraphModel) -> Vec<(f64, f64)> {
    match model {
        GraphModel::RegularTree { d } => vec![(f64::from(d - 1), 0.0)],
        GraphModel::FreeProductComplete { ms } => {
            let m: u32 = ms.iter().sum();
            ms.iter().map(|&mi| (f64::from(m - mi), f64::from(mi - 1))).collect()
        }
    }
}

/// `(P f_n, f_n) / (f_n, f_n)` in `L^2(G, μ)`, with `f_n = g(|x|) 1_{B(n)}`
/// and `d` the common vertex degree.
///
/// Vertices on a sphere with the same type contribute identically, so both
/// inner products are sums over `(level, type)` weighted by sphere counts.
pub fn rayleigh_quotient(model: &GraphModel, lambda: f64, n: usize) -> Result<f64> {
    let d = check_rayleigh(model, lambda)?;
    let counts = model::log_sphere_type_counts(model, n);
    let degrees = type_degrees(model);
    let lg = |k: usize| log_g(d, lambda, k);
    let ln_lambda = log(lambda);
    // origin: μ(o) = d, P f_n(o) = g(1) when n >= 1
    let mut num = if n >= 1 { log(d) + lg(1) + lg(0) } else { f64::NEG_INFINITY };
    let mut den = log(d) + 2.0 * lg(0);
    for k in 1..=n {
        for (t, &(d_plus, d_zero)) in degrees.iter().enumerate() {
            let ln_count = counts[k][t];
            let ln_mu_scale = -(k as f64) * ln_lambda;
            // μ(x) P f_n(x) = λ^{-k} (d^+ g(k+1) 1{k<n} + d^0 g(k) + λ g(k-1))
            let mut inner = log(lambda) + lg(k - 1);
            if d_zero > 0.0 {
                inner = log_add(inner, log(d_zero) + lg(k));
            }
            if k < n && d_plus > 0.0 {
                inner = log_add(inner, log(d_plus) + lg(k + 1));
            }
            num = log_add(num, ln_count + ln_mu_scale + inner + lg(k));
            let mu = log(d_plus + d_zero + lambda);
            den = log_add(den, ln_count + ln_mu_scale + mu + 2.0 * lg(k));
        }
    }
    Ok(exp(num - den))
}

/// The same quotient by direct summation over an enumerated ball.
pub fn rayleigh_quotient_ball(model: &GraphModel, lambda: f64, n: usize) -> Result<f64> {
    let d = check_rayleigh(model, lambda)?;
    let ball = model::enumerate_ball(model, n)?;
    let f: Vec<f64> = ball.vertices.iter().map(|v| exp(log_g(d, lambda, v.level()))).collect();
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, v) in ball.vertices.iter().enumerate() {
        let mu = kernel::stationary_weight(model, lambda, v)?;
        let row = kernel::transition_row(model, lambda, v)?;
        let pf: f64 = row.entries.iter().filter_map(|(u, p)| ball.index_of(u).map(|j| p * f[j])).sum();
        num += pf * f[i] * mu;
        den += f[i] * f[i] * mu;
    }
    Ok(num / den)
}

/// Lower bound `ρ_{T_d}(λ) - (d-1) M_n g(n)^2 λ^{-n} / (f_n, f_n)` on the
/// quotient.
pub fn rayleigh_lower_bound(model: &GraphModel, lambda: f64, n: usize) -> Result<f64> {
    let d = check_rayleigh(model, lambda)?;
    let counts = model::log_sphere_type_counts(model, n);
    let degrees = type_degrees(model);
    let lg = |k: usize| log_g(d, lambda, k);
    let mut den = log(d) + 2.0 * lg(0);
    for k in 1..=n {
        for (t, &(d_plus, d_zero)) in degrees.iter().enumerate() {
            den = log_add(den, counts[k][t] - k as f64 * log(lambda) + log(d_plus + d_zero + lambda) + 2.0 * lg(k));
        }
    }
    let ln_mn = counts[n].iter().fold(f64::NEG_INFINITY, |acc, &c| log_add(acc, c));
    let correction = exp(log(d - 1.0) + ln_mn + 2.0 * lg(n) - n as f64 * log(lambda) - den);
    let rho_t = 2.0 * sqrt((d - 1.0) * lambda) / (d - 1.0 + lambda);
    Ok(rho_t - correction)
}
