//! Bisection solvers for the implicitly defined quantities: growth rates,
//! the first-return generating function `U = F(z, U)` and `ρ(λ)^{-1}` as the
//! smallest `z` with `∂F/∂U (z, U(z)) = 1`.

use alloc::format;
use alloc::vec::Vec;

use crate::math::{abs, sqrt};
use crate::{Error, Result};

pub const GROWTH_TOL: f64 = 1e-12;
pub const Z0_TOL: f64 = 1e-10;
const U_DIVERGENCE: f64 = 1.5;
const PICARD_MAX_ITER: usize = 100_000;
const PRESCAN_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointResult {
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
}

/// Sign-change bisection. `f(lo)` and `f(hi)` must have opposite signs;
/// stops when the bracket is narrower than `tol`.
pub fn bisect(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<FixedPointResult> {
    let (mut lo, mut hi) = (lo, hi);
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(FixedPointResult { value: lo, residual: 0.0, iterations: 0, bracket: (lo, lo) });
    }
    if f_hi == 0.0 {
        return Ok(FixedPointResult { value: hi, residual: 0.0, iterations: 0, bracket: (hi, hi) });
    }
    if f_lo.is_nan() || f_hi.is_nan() || (f_lo > 0.0) == (f_hi > 0.0) {
        return Err(Error::NoRoot(format!("no sign change on [{lo}, {hi}]: f = {f_lo}, {f_hi}")));
    }
    let lo_negative = f_lo < 0.0;
    let mut iterations = 0;
    while hi - lo > tol && iterations < 400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if (fm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let value = 0.5 * (lo + hi);
    Ok(FixedPointResult { value, residual: f(value), iterations, bracket: (lo, hi) })
}

/// A factor of a free product, for growth computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorSpec {
    /// `K_{m+1}`: sphere generating function `ψ(z) = m z`.
    Complete { m: u32 },
    /// The `ℓ`-cycle: `ψ(z) = k_ℓ(z)`.
    Cycle { ell: u32 },
}

impl FactorSpec {
    pub fn psi(&self, z: f64) -> f64 {
        match *self {
            FactorSpec::Complete { m } => f64::from(m) * z,
            FactorSpec::Cycle { ell } => k_ell(ell, z),
        }
    }

    fn is_valid(&self) -> bool {
        match *self {
            FactorSpec::Complete { m } => m >= 1,
            FactorSpec::Cycle { ell } => ell >= 3,
        }
    }
}

/// Sphere generating function of the `ℓ`-cycle:
/// `2z + ... + 2z^{(ℓ-1)/2}` for odd `ℓ`, `2z + ... + 2z^{(ℓ-2)/2} + z^{ℓ/2}` for even `ℓ`.
pub fn k_ell(ell: u32, z: f64) -> f64 {
    let full = (ell - 1) / 2;
    let mut total = 0.0;
    let mut power = 1.0;
    for _ in 0..full {
        power *= z;
        total += 2.0 * power;
    }
    if ell.is_multiple_of(2) {
        total += power * z;
    }
    total
}

/// `h_ℓ(z) = (d-2) z / (1+z) + k_ℓ(z) / (1 + k_ℓ(z))`.
pub fn h_ell(d: u32, ell: u32, z: f64) -> f64 {
    let k = k_ell(ell, z);
    f64::from(d - 2) * z / (1.0 + z) + k / (1.0 + k)
}

/// Root `z_*` of `Σ ψ_i(z) / (1 + ψ_i(z)) = 1`.
pub fn growth_root(factors: &[FactorSpec]) -> Result<FixedPointResult> {
    if factors.len() < 2 || factors.iter().any(|f| !f.is_valid()) {
        return Err(Error::NoRoot(format!("degenerate factor list {factors:?}")));
    }
    let lhs = |z: f64| factors.iter().map(|f| f.psi(z) / (1.0 + f.psi(z))).sum::<f64>() - 1.0;
    // every ψ_i(1) >= 1, so the sum at z = 1 is at least 1
    bisect(lhs, 0.0, 1.0, GROWTH_TOL * 1e-3)
}

/// `gr(G_1 * ... * G_r) = 1 / z_*`.
pub fn gr_free_product(factors: &[FactorSpec]) -> Result<f64> {
    Ok(1.0 / growth_root(factors)?.value)
}

/// `λ_c = sqrt(m1 m2)`.
pub fn lambda_c_two_complete(m1: u32, m2: u32) -> Result<f64> {
    if m1 == 0 || m2 == 0 {
        return Err(Error::InvalidModel(format!("factor sizes must be >= 1, got ({m1}, {m2})")));
    }
    Ok(sqrt(f64::from(m1) * f64::from(m2)))
}

/// `λ_c` of a free product of complete graphs, as its growth rate.
pub fn lambda_c_free_product(ms: &[u32]) -> Result<f64> {
    let factors: Vec<FactorSpec> = ms.iter().map(|&m| FactorSpec::Complete { m }).collect();
    gr_free_product(&factors)
}

/// Growth rate of `𝕏_{d,ℓ}` (`d-2` copies of `K_2` and one `ℓ`-cycle),
/// `1 / z_*` with `h_ℓ(z_*) = 1`. Fails with `ConditionViolated` if
/// `h_ℓ(1/(d-1)) < 1` does not hold.
pub fn gr_x_dl(d: u32, ell: u32) -> Result<f64> {
    if d < 3 || ell < 3 {
        return Err(Error::InvalidModel(format!("need d >= 3 and ℓ >= 3, got ({d}, {ell})")));
    }
    let at = h_ell(d, ell, 1.0 / f64::from(d - 1));
    if at >= 1.0 {
        return Err(Error::ConditionViolated(format!("h_{ell}(1/{}) = {at} is not < 1", d - 1)));
    }
    let root = bisect(|z| h_ell(d, ell, z) - 1.0, 0.0, 1.0, GROWTH_TOL * 1e-3)?;
    Ok(1.0 / root.value)
}

fn check_ms(ms: &[u32]) -> Result<()> {
    if ms.len() < 2 || ms.contains(&0) {
        return Err(Error::InvalidModel(format!("need >= 2 factors with m_i >= 1, got {ms:?}")));
    }
    Ok(())
}

fn phi(m: f64, mi: f64, lambda: f64, z: f64) -> f64 {
    m - 1.0 + lambda - (mi - 1.0) * z
}

/// `F(z, U) = (1/2m) Σ { -(φ_i - mU) + sqrt((φ_i - mU)^2 + 4 λ m_i z^2) }`.
pub fn f_eval(ms: &[u32], lambda: f64, z: f64, u: f64) -> f64 {
    let m = f64::from(ms.iter().sum::<u32>());
    let total: f64 = ms
        .iter()
        .map(|&mi| {
            let mi = f64::from(mi);
            let a = phi(m, mi, lambda, z) - m * u;
            let b = 4.0 * lambda * mi * z * z;
            // -a + sqrt(a^2 + b), rewritten as b / (a + sqrt(a^2+b)) when a > 0
            let root = sqrt(a * a + b);
            if a > 0.0 {
                b / (a + root)
            } else {
                root - a
            }
        })
        .sum();
    total / (2.0 * m)
}

/// `∂F/∂U = r/2 - (1/2) Σ (φ_i - mU) / sqrt((φ_i - mU)^2 + 4 λ m_i z^2)`.
pub fn df_du(ms: &[u32], lambda: f64, z: f64, u: f64) -> f64 {
    let m = f64::from(ms.iter().sum::<u32>());
    let s: f64 = ms
        .iter()
        .map(|&mi| {
            let mi = f64::from(mi);
            let a = phi(m, mi, lambda, z) - m * u;
            let root = sqrt(a * a + 4.0 * lambda * mi * z * z);
            if root == 0.0 {
                0.0
            } else {
                a / root
            }
        })
        .sum();
    0.5 * ms.len() as f64 - 0.5 * s
}

/// Smallest positive fixed point of `U ↦ F(z, U)`.
///
/// `F(z, ·)` is increasing and convex with `∂F/∂U` rising from 0 to `r`, so
/// `F(z, U) - U` has a unique minimiser `U_min` (where `∂F/∂U = 1`). The
/// smallest fixed point exists iff that minimum is `<= 0`, and then lies in
/// `[0, U_min]`.
pub fn solve_u(ms: &[u32], lambda: f64, z: f64) -> Result<FixedPointResult> {
    check_ms(ms)?;
    if lambda <= 0.0 || !lambda.is_finite() {
        return Err(Error::NonpositiveBias(lambda));
    }
    let gap = |u: f64| f_eval(ms, lambda, z, u) - u;
    let slope = |u: f64| df_du(ms, lambda, z, u) - 1.0;
    if slope(0.0) >= 0.0 {
        return Err(Error::NoConvergence(format!(
            "U = F({z}, U) has no fixed point: F - U increasing from F(z,0) > 0"
        )));
    }
    let mut hi = 1.0;
    while slope(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NoConvergence(format!("∂F/∂U stays below 1 at z = {z}")));
        }
    }
    let u_min = bisect(slope, 0.0, hi, 1e-15)?.value;
    if gap(u_min) > 0.0 {
        return Err(Error::NoConvergence(format!("U = F({z}, U) has no fixed point: z is beyond the radius")));
    }
    let root = bisect(gap, 0.0, u_min, 1e-15)?;
    if root.value > U_DIVERGENCE {
        return Err(Error::NoConvergence(format!("fixed point {} exceeds {U_DIVERGENCE}", root.value)));
    }
    Ok(root)
}

/// Picard iterates `U_{k+1} = F(z, U_k)` from `U_0 = 0`, stopping once the
/// step is below `tol`. The sequence is non-decreasing inside the radius.
pub fn solve_u_picard(ms: &[u32], lambda: f64, z: f64, tol: f64) -> Result<Vec<f64>> {
    check_ms(ms)?;
    let mut iterates = alloc::vec![0.0];
    let mut u = 0.0;
    for _ in 0..PICARD_MAX_ITER {
        let next = f_eval(ms, lambda, z, u);
        iterates.push(next);
        if next > U_DIVERGENCE {
            return Err(Error::NoConvergence(format!("iterate {next} exceeds {U_DIVERGENCE}")));
        }
        if abs(next - u) < tol {
            return Ok(iterates);
        }
        u = next;
    }
    Err(Error::NoConvergence(format!("no convergence after {PICARD_MAX_ITER} iterations")))
}

/// `ρ(λ)` of `K_{m1+1} * ... * K_{mr+1}` as `1/z_0`, where `z_0` is the
/// smallest `z` with `∂F/∂U (z, U(z)) = 1`.
pub fn rho_free_product(ms: &[u32], lambda: f64) -> Result<f64> {
    Ok(1.0 / z0_free_product(ms, lambda)?.value)
}

pub fn z0_free_product(ms: &[u32], lambda: f64) -> Result<FixedPointResult> {
    check_ms(ms)?;
    let lambda_c = lambda_c_free_product(ms)?;
    if !(lambda > 0.0 && lambda < lambda_c) {
        return Err(Error::HypothesisViolated(format!("need 0 < λ < λ_c = {lambda_c}, got {lambda}")));
    }
    // g(z) = ∂F/∂U(z, U(z)) - 1; past the radius U(z) does not exist and the
    // point counts as being on the positive side
    let g = |z: f64| match solve_u(ms, lambda, z) {
        Ok(u) => df_du(ms, lambda, z, u.value) - 1.0,
        Err(_) => f64::INFINITY,
    };
    if g(1.0) >= 0.0 {
        return Err(Error::NoConvergence(format!("∂F/∂U(1, U(1)) >= 1 at λ = {lambda}")));
    }
    let mut hi = 1.1;
    while g(hi) < 0.0 {
        hi = 1.0 + (hi - 1.0) * 1.5;
        if hi > 1e3 {
            return Err(Error::NoConvergence("no sign change of ∂F/∂U - 1 below z = 1000".into()));
        }
    }
    let mut changes = 0;
    let mut last = g(1.0) > 0.0;
    for k in 1..=PRESCAN_POINTS {
        let z = 1.0 + (hi - 1.0) * k as f64 / PRESCAN_POINTS as f64;
        let positive = g(z) > 0.0;
        if positive != last {
            changes += 1;
        }
        last = positive;
    }
    if changes > 1 {
        return Err(Error::MultipleRoots { changes, lo: 1.0, hi });
    }
    let mut result = bisect(g, 1.0, hi, Z0_TOL * 1e-2)?;
    // report the residual from the feasible end of the bracket
    result.residual = g(result.bracket.0);
    Ok(result)
}
