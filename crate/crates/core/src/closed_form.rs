//! Closed formulas for the regular tree and for `K_{m1+1} * K_{m2+1}`.

use alloc::format;

use crate::kernel::check_bias;
use crate::math::{abs, exp, lgamma, log, sqrt, PI};
use crate::{Error, Result};

/// Closed forms on `T_d` at a fixed bias.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeClosedForms {
    pub d: u32,
    pub lambda: f64,
}

impl TreeClosedForms {
    pub fn new(d: u32, lambda: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidModel(format!("tree degree must be >= 2, got {d}")));
        }
        check_bias(lambda)?;
        Ok(Self { d, lambda })
    }

    fn dm1(&self) -> f64 {
        f64::from(self.d - 1)
    }

    pub fn lambda_c(&self) -> f64 {
        self.dm1()
    }

    /// `2 sqrt((d-1) λ) / (d-1+λ)` on `[0, d-1]`.
    pub fn rho(&self) -> Result<f64> {
        if self.lambda > self.dm1() {
            return Err(Error::DomainError(format!(
                "tree spectral radius formula holds on [0, {}], got λ = {}",
                self.d - 1,
                self.lambda
            )));
        }
        Ok(2.0 * sqrt(self.dm1() * self.lambda) / (self.dm1() + self.lambda))
    }

    /// Return probability `(λ ∧ (d-1)) / (d-1)`.
    pub fn theta(&self) -> f64 {
        self.lambda.min(self.dm1()) / self.dm1()
    }

    /// `ln f^(2n)(o,o)`.
    pub fn log_f2n(&self, n: u64) -> Result<f64> {
        if self.lambda <= 0.0 {
            return Err(Error::NonpositiveBias(self.lambda));
        }
        if n == 0 {
            return Err(Error::DomainError("first-return index must be >= 1".into()));
        }
        let den = self.dm1() + self.lambda;
        Ok(log_catalan(n - 1) + (n - 1) as f64 * log(self.dm1() / den) + n as f64 * log(self.lambda / den))
    }

    /// `f^(2n)(o,o) = c_{n-1} ((d-1)/(d-1+λ))^{n-1} (λ/(d-1+λ))^n`.
    pub fn f2n(&self, n: u64) -> Result<f64> {
        Ok(exp(self.log_f2n(n)?))
    }

    /// Radius of convergence `(d-1+λ) / (2 sqrt(λ(d-1)))` of `U` and `𝔾`.
    pub fn radius(&self) -> f64 {
        (self.dm1() + self.lambda) / (2.0 * sqrt(self.lambda * self.dm1()))
    }

    /// First-return generating function `U(o,o|z)`.
    pub fn u(&self, z: f64) -> Result<f64> {
        if self.lambda <= 0.0 {
            return Err(Error::NonpositiveBias(self.lambda));
        }
        let radius = self.radius();
        if abs(z) > radius {
            return Err(Error::OutsideRadius { z, radius });
        }
        let s = self.dm1() + self.lambda;
        let disc = (s * s - 4.0 * self.lambda * self.dm1() * z * z).max(0.0);
        Ok((s - sqrt(disc)) / (2.0 * self.dm1()))
    }

    /// Green function `𝔾(o,o|z) = 1 / (1 - U(o,o|z))` for `λ ∈ (0, d-1]`.
    pub fn green(&self, z: f64) -> Result<f64> {
        if self.lambda <= 0.0 || self.lambda > self.dm1() {
            return Err(Error::DomainError(format!(
                "Green function closed form needs λ in (0, {}], got {}",
                self.d - 1,
                self.lambda
            )));
        }
        let radius = self.radius();
        if abs(z) >= radius {
            return Err(Error::OutsideRadius { z, radius });
        }
        let s = self.dm1() + self.lambda;
        let disc = s * s - 4.0 * self.lambda * self.dm1() * z * z;
        Ok(2.0 * self.dm1() / (2.0 * self.dm1() - s + sqrt(disc)))
    }

    fn check_subcritical(&self) -> Result<()> {
        if self.lambda > 0.0 && self.lambda < self.dm1() {
            Ok(())
        } else {
            Err(Error::DomainError(format!("asymptotic constant needs λ in (0, {}), got {}", self.d - 1, self.lambda)))
        }
    }

    /// `c_1(λ) = (d-1-λ)^3 / (2 (d-1) (d-1+λ)^2)`.
    pub fn c1(&self) -> Result<f64> {
        self.check_subcritical()?;
        let (a, s) = (self.dm1() - self.lambda, self.dm1() + self.lambda);
        Ok(a * a * a / (2.0 * self.dm1() * s * s))
    }

    /// `c_2(λ) = 2 ρ (d-1) / (d-1-λ)`.
    pub fn c2(&self) -> Result<f64> {
        self.check_subcritical()?;
        Ok(2.0 * self.rho()? * self.dm1() / (self.dm1() - self.lambda))
    }

    /// The published Darboux constant `(d-1-λ)^2 / (16 sqrt(πλ) (d-1)^{3/2})`
    /// for `p^(2n) ~ C ρ^{2n} n^{-3/2}`.
    pub fn p2n_constant(&self) -> Result<f64> {
        self.check_subcritical()?;
        let a = self.dm1() - self.lambda;
        Ok(a * a / (16.0 * sqrt(PI * self.lambda) * self.dm1() * sqrt(self.dm1())))
    }

    /// The same constant assembled from `c_1`, `c_2`:
    /// `sqrt(c_1 / (2π ρ c_2)) 2^{-3/2}`.
    pub fn p2n_constant_from_c1_c2(&self) -> Result<f64> {
        let (c1, c2, rho) = (self.c1()?, self.c2()?, self.rho()?);
        Ok(sqrt(c1 / (2.0 * PI * rho * c2)) / (2.0 * sqrt(2.0)))
    }

    /// Constant read off the square-root singularity of
    /// `𝔾 = a / (b + sqrt(1 - ρ^2 z^2))`: `a / (2 b^2 sqrt(π))`, i.e.
    /// `(d-1)(d-1+λ) / ((d-1-λ)^2 sqrt(π))`. This is the value the exact
    /// series converges to.
    pub fn p2n_constant_singularity(&self) -> Result<f64> {
        self.check_subcritical()?;
        let (a, s) = (self.dm1() - self.lambda, self.dm1() + self.lambda);
        Ok(self.dm1() * s / (a * a * sqrt(PI)))
    }

    /// Constant of `f^(2n) ~ K ρ^{2n} n^{-3/2}` from the square-root
    /// singularity of `U`: `(d-1+λ) / (4 (d-1) sqrt(π))`.
    pub fn f2n_constant_singularity(&self) -> f64 {
        (self.dm1() + self.lambda) / (4.0 * self.dm1() * sqrt(PI))
    }
}

/// Closed forms on `K_{m1+1} * K_{m2+1}` at a fixed bias.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoCompleteClosedForms {
    pub m1: u32,
    pub m2: u32,
    pub lambda: f64,
}

impl TwoCompleteClosedForms {
    /// Requires `m1 m2 >= 2`.
    pub fn new(m1: u32, m2: u32, lambda: f64) -> Result<Self> {
        if m1 == 0 || m2 == 0 || m1 * m2 < 2 {
            return Err(Error::HypothesisViolated(format!("two-complete formulas need m1*m2 >= 2, got ({m1}, {m2})")));
        }
        Self::with_override(m1, m2, lambda)
    }

    /// Skips the `m1 m2 >= 2` hypothesis so the line `(1, 1)` can be used as
    /// a sanity case.
    pub fn with_override(m1: u32, m2: u32, lambda: f64) -> Result<Self> {
        if m1 == 0 || m2 == 0 {
            return Err(Error::InvalidModel(format!("factor sizes must be >= 1, got ({m1}, {m2})")));
        }
        check_bias(lambda)?;
        Ok(Self { m1, m2, lambda })
    }

    fn m(&self) -> f64 {
        f64::from(self.m1 + self.m2)
    }

    pub fn lambda_c(&self) -> f64 {
        sqrt(f64::from(self.m1) * f64::from(self.m2))
    }

    fn check_at_most_critical(&self) -> Result<()> {
        if self.lambda > self.lambda_c() {
            return Err(Error::HypothesisViolated(format!("λ = {} exceeds λ_c = {}", self.lambda, self.lambda_c())));
        }
        Ok(())
    }

    /// `S(λ) = 2 (m1 m2 - λ^2) / ((2λ + m)(λ + m - 1))` on `[0, λ_c]`.
    pub fn speed(&self) -> Result<f64> {
        self.check_at_most_critical()?;
        let l = self.lambda;
        let num = 2.0 * (f64::from(self.m1 * self.m2) - l * l);
        Ok((num / ((2.0 * l + self.m()) * (l + self.m() - 1.0))).max(0.0))
    }

    fn radicand(&self) -> f64 {
        let (m1, m2) = (f64::from(self.m1), f64::from(self.m2));
        let s = sqrt(m1) + sqrt(m2);
        (m1 - m2) * (m1 - m2) + 4.0 * self.lambda * s * s
    }

    fn check_rho_domain(&self) -> Result<()> {
        if self.lambda <= 0.0 {
            return Err(Error::HypothesisViolated(format!("spectral radius formula needs λ > 0, got {}", self.lambda)));
        }
        self.check_at_most_critical()
    }

    /// `z_0 = 1/ρ = 2(m+λ-1) / (m - 2 + sqrt((m1-m2)^2 + 4λ(√m1+√m2)^2))`.
    pub fn z0(&self) -> Result<f64> {
        self.check_rho_domain()?;
        Ok(2.0 * (self.m() + self.lambda - 1.0) / (self.m() - 2.0 + sqrt(self.radicand())))
    }

    /// `z_0` through the substitution `x = m - 2 + sqrt(...)`:
    /// `[x + 4(m-1+√(m1 m2))^2 / x - 2(m-2)] / (2(√m1+√m2)^2)`.
    pub fn z0_change_of_variables(&self) -> Result<f64> {
        self.check_rho_domain()?;
        let (m1, m2) = (f64::from(self.m1), f64::from(self.m2));
        let s = sqrt(m1) + sqrt(m2);
        let x = self.m() - 2.0 + sqrt(self.radicand());
        let k = self.m() - 1.0 + self.lambda_c();
        Ok((x + 4.0 * k * k / x - 2.0 * (self.m() - 2.0)) / (2.0 * s * s))
    }

    /// `ρ(λ) = (m - 2 + sqrt(...)) / (2(m+λ-1))`.
    pub fn rho(&self) -> Result<f64> {
        self.check_rho_domain()?;
        Ok((self.m() - 2.0 + sqrt(self.radicand())) / (2.0 * (self.m() + self.lambda - 1.0)))
    }

    /// `U(z_0) = (m + λ - 1 - (√(m1 m2) - 1) z_0) / m`.
    pub fn u_at_z0(&self) -> Result<f64> {
        let z0 = self.z0()?;
        Ok((self.m() + self.lambda - 1.0 - (self.lambda_c() - 1.0) * z0) / self.m())
    }

    /// Limiting fraction of time spent on type `i`: `(m_i + λ) / (m + 2λ)`.
    pub fn occupation_limit(&self, i: u32) -> Result<f64> {
        let mi = self.factor(i)?;
        Ok((mi + self.lambda) / (self.m() + 2.0 * self.lambda))
    }

    /// Parameter of the geometric run extension on type `i`:
    /// `p_i = (m_i - 1) / (m - 1 + λ)`.
    pub fn excursion_parameter(&self, i: u32) -> Result<f64> {
        let mi = self.factor(i)?;
        Ok((mi - 1.0) / (self.m() - 1.0 + self.lambda))
    }

    fn factor(&self, i: u32) -> Result<f64> {
        match i {
            1 => Ok(f64::from(self.m1)),
            2 => Ok(f64::from(self.m2)),
            _ => Err(Error::DomainError(format!("type must be 1 or 2, got {i}"))),
        }
    }
}

/// `ln c_n` for the Catalan number `c_n = (2n)! / (n! (n+1)!)`.
pub fn log_catalan(n: u64) -> f64 {
    if n <= 35 {
        return log(catalan_exact(n) as f64);
    }
    let n = n as f64;
    lgamma(2.0 * n + 1.0) - lgamma(n + 1.0) - lgamma(n + 2.0)
}

fn catalan_exact(n: u64) -> u64 {
    // c_{k+1} = c_k * 2(2k+1) / (k+2); exact in u64 through k = 35
    let mut c: u128 = 1;
    for k in 0..u128::from(n) {
        c = c * 2 * (2 * k + 1) / (k + 2);
    }
    c as u64
}

pub fn rho_tree(d: u32, lambda: f64) -> Result<f64> {
    TreeClosedForms::new(d, lambda)?.rho()
}

pub fn theta_tree(d: u32, lambda: f64) -> Result<f64> {
    Ok(TreeClosedForms::new(d, lambda)?.theta())
}

pub fn f2n_tree(d: u32, lambda: f64, n: u64) -> Result<f64> {
    TreeClosedForms::new(d, lambda)?.f2n(n)
}

pub fn u_tree(d: u32, lambda: f64, z: f64) -> Result<f64> {
    TreeClosedForms::new(d, lambda)?.u(z)
}

pub fn green_tree(d: u32, lambda: f64, z: f64) -> Result<f64> {
    TreeClosedForms::new(d, lambda)?.green(z)
}

pub fn p2n_tree_asymptotic_constant(d: u32, lambda: f64) -> Result<f64> {
    TreeClosedForms::new(d, lambda)?.p2n_constant()
}

pub fn speed_two_complete(m1: u32, m2: u32, lambda: f64) -> Result<f64> {
    TwoCompleteClosedForms::new(m1, m2, lambda)?.speed()
}

pub fn rho_two_complete(m1: u32, m2: u32, lambda: f64) -> Result<f64> {
    TwoCompleteClosedForms::new(m1, m2, lambda)?.rho()
}

pub fn occupation_limit(m1: u32, m2: u32, lambda: f64, i: u32) -> Result<f64> {
    TwoCompleteClosedForms::new(m1, m2, lambda)?.occupation_limit(i)
}

/// `ρ(0+) = max_i (m_i - 1) / (m - 1)`.
pub fn rho_zero_limit(ms: &[u32]) -> Result<f64> {
    if ms.len() < 2 || ms.contains(&0) {
        return Err(Error::InvalidModel(format!("need >= 2 factors with m_i >= 1, got {ms:?}")));
    }
    let m: u32 = ms.iter().sum();
    let top = ms.iter().copied().max().unwrap_or(1);
    Ok(f64::from(top - 1) / f64::from(m - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        abs(a - b) <= tol
    }

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn tree_rho_values() {
        assert!(close(rho_tree(4, 1.0).unwrap(), sqrt(3.0) / 2.0, 1e-15));
        assert!(close(rho_tree(2, 1.0).unwrap(), 1.0, 1e-15));
        assert!(close(rho_tree(4, 3.0).unwrap(), 1.0, 1e-15));
        assert_eq!(rho_tree(4, 0.0).unwrap(), 0.0);
        assert!(matches!(rho_tree(4, 3.5), Err(Error::DomainError(_))));
    }

    #[test]
    fn tree_theta_values() {
        assert!(close(theta_tree(4, 1.0).unwrap(), 1.0 / 3.0, 1e-15));
        assert_eq!(theta_tree(4, 3.0).unwrap(), 1.0);
        assert_eq!(theta_tree(4, 5.0).unwrap(), 1.0);
        assert_eq!(theta_tree(4, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn catalan_numbers() {
        let known = [1u64, 1, 2, 5, 14, 42, 132, 429, 1430, 4862];
        for (n, c) in known.iter().enumerate() {
            assert_eq!(catalan_exact(n as u64), *c);
        }
        assert_eq!(catalan_exact(35), 3_116_285_494_907_301_262);
        // lgamma branch agrees with the exact branch where they meet
        let n = 35.0f64;
        let via_gamma = lgamma(2.0 * n + 1.0) - lgamma(n + 1.0) - lgamma(n + 2.0);
        assert!(close(via_gamma, log_catalan(35), 1e-12));
    }

    #[test]
    fn first_return_values() {
        assert!(close(f2n_tree(4, 1.0, 1).unwrap(), 0.25, 1e-16));
        assert!(close(f2n_tree(4, 1.0, 2).unwrap(), 3.0 / 64.0, 1e-16));
        assert!(f2n_tree(4, 1.0, 0).is_err());
        assert!(f2n_tree(4, 0.0, 1).is_err());
    }

    #[test]
    fn first_returns_sum_to_theta() {
        for (d, lambda) in [(3, 0.5), (4, 1.0), (5, 2.0), (4, 3.5)] {
            let t = TreeClosedForms::new(d, lambda).unwrap();
            let total: f64 = (1..=20_000).map(|n| t.f2n(n).unwrap()).sum();
            // at λ > d-1 the walk is recurrent and the tail is geometric;
            // at λ < d-1 the tail is geometric too
            assert!(close(total, t.theta(), 1e-8), "{d} {lambda} {total}");
        }
    }

    #[test]
    fn u_and_green() {
        assert!(close(u_tree(4, 1.0, 1.0).unwrap(), 1.0 / 3.0, 1e-15));
        for z in [-0.9, -0.3, 0.0, 0.5, 0.99] {
            let g = green_tree(4, 3.0, z).unwrap();
            assert!(close(g, 1.0 / sqrt(1.0 - z * z), 1e-12));
        }
        let t = TreeClosedForms::new(4, 1.0).unwrap();
        assert!(close(t.radius(), 2.0 / sqrt(3.0), 1e-15));
        assert!(matches!(t.u(1.2), Err(Error::OutsideRadius { .. })));
        assert!(t.u(t.radius()).is_ok());
        assert!(matches!(t.green(t.radius()), Err(Error::OutsideRadius { .. })));
        assert!(green_tree(4, 3.5, 0.1).is_err());
    }

    #[test]
    fn renewal_relation_inside_radius() {
        for (d, lambda) in [(3, 0.5), (4, 1.0), (5, 2.0), (4, 3.0)] {
            let t = TreeClosedForms::new(d, lambda).unwrap();
            for z in grid(-0.999 * t.radius(), 0.999 * t.radius(), 41) {
                let lhs = t.green(z).unwrap() * (1.0 - t.u(z).unwrap());
                assert!(close(lhs, 1.0, 1e-12));
            }
        }
    }

    #[test]
    fn u_partial_sums() {
        let t = TreeClosedForms::new(4, 1.0).unwrap();
        let z = 0.9 * t.radius();
        let series: f64 = (1..=500u64).map(|n| t.f2n(n).unwrap() * libm::pow(z, 2.0 * n as f64)).sum();
        assert!(close(series, t.u(z).unwrap(), 1e-10));
    }

    #[test]
    fn monotone_on_grids() {
        let mut last = -1.0;
        for l in grid(0.0, 3.0, 1000) {
            let r = rho_tree(4, l).unwrap();
            assert!(r > last);
            last = r;
        }
        let lc = sqrt(2.0);
        let (mut last_rho, mut last_speed) = (-1.0, f64::INFINITY);
        for l in grid(1e-6, lc, 1000) {
            let r = rho_two_complete(2, 1, l).unwrap();
            let s = speed_two_complete(2, 1, l).unwrap();
            assert!(r > last_rho && s < last_speed);
            last_rho = r;
            last_speed = s;
        }
    }

    #[test]
    fn speed_values() {
        assert!(close(speed_two_complete(2, 1, 1.0).unwrap(), 2.0 / 15.0, 1e-15));
        for (m1, m2) in [(2, 1), (3, 3), (5, 2)] {
            let lc = sqrt(f64::from(m1 * m2));
            assert!(close(speed_two_complete(m1, m2, lc).unwrap(), 0.0, 1e-15));
        }
        assert!(matches!(speed_two_complete(1, 1, 0.5), Err(Error::HypothesisViolated(_))));
        assert!(matches!(speed_two_complete(2, 1, 2.0), Err(Error::HypothesisViolated(_))));
        for l in [0.0, 0.25, 0.5, 0.9] {
            let line = TwoCompleteClosedForms::with_override(1, 1, l).unwrap();
            assert!(close(line.speed().unwrap(), (1.0 - l) / (1.0 + l), 1e-15));
        }
    }

    #[test]
    fn rho_two_complete_values() {
        for m0 in 2..6u32 {
            for l in [0.1, 0.7, 1.3] {
                let m = f64::from(m0);
                let want = (m - 1.0 + 2.0 * sqrt(l * m)) / (2.0 * m + l - 1.0);
                assert!(close(rho_two_complete(m0, m0, l).unwrap(), want, 1e-14));
            }
        }
        let pairs = [(2, 1), (1, 2), (3, 1), (2, 2), (3, 2), (4, 1), (5, 3), (7, 2), (6, 6), (10, 1)];
        for (m1, m2) in pairs {
            let lc = sqrt(f64::from(m1 * m2));
            assert!(close(rho_two_complete(m1, m2, lc).unwrap(), 1.0, 1e-12));
        }
        assert!(close(rho_two_complete(2, 1, 1e-12).unwrap(), 0.5, 1e-5));
        assert!(matches!(rho_two_complete(2, 1, 2.0), Err(Error::HypothesisViolated(_))));
        assert!(matches!(rho_two_complete(2, 1, 0.0), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn line_reduces_to_the_two_regular_tree() {
        for l in grid(0.01, 1.0, 50) {
            let line = TwoCompleteClosedForms::with_override(1, 1, l).unwrap();
            assert!(close(line.rho().unwrap(), rho_tree(2, l).unwrap(), 1e-14));
            assert!(close(line.rho().unwrap(), 2.0 * sqrt(l) / (1.0 + l), 1e-14));
        }
    }

    #[test]
    fn z0_two_routes() {
        for (m1, m2) in [(2, 1), (3, 2), (4, 4)] {
            let lc = sqrt(f64::from(m1 * m2));
            for l in grid(0.01, lc, 25) {
                let c = TwoCompleteClosedForms::new(m1, m2, l).unwrap();
                assert!(close(c.z0().unwrap(), c.z0_change_of_variables().unwrap(), 1e-12));
                assert!(close(c.z0().unwrap() * c.rho().unwrap(), 1.0, 1e-14));
            }
        }
    }

    #[test]
    fn zero_limit() {
        assert_eq!(rho_zero_limit(&[2, 1]).unwrap(), 0.5);
        assert_eq!(rho_zero_limit(&[1, 1, 1, 1]).unwrap(), 0.0);
        assert_eq!(rho_zero_limit(&[3, 2]).unwrap(), 0.5);
        assert!(rho_zero_limit(&[2]).is_err());
    }

    #[test]
    fn occupation_and_excursions() {
        assert!(close(occupation_limit(2, 1, 1.0, 1).unwrap(), 0.6, 1e-15));
        assert!(close(occupation_limit(2, 1, 1.0, 2).unwrap(), 0.4, 1e-15));
        assert_eq!(occupation_limit(3, 3, 0.7, 1).unwrap(), 0.5);
        assert!(occupation_limit(2, 1, 1.0, 3).is_err());
        let c = TwoCompleteClosedForms::new(2, 1, 1.0).unwrap();
        assert!(close(c.excursion_parameter(1).unwrap(), 1.0 / 3.0, 1e-15));
        assert_eq!(c.excursion_parameter(2).unwrap(), 0.0);
    }

    #[test]
    fn darboux_constants() {
        let t = TreeClosedForms::new(4, 1.0).unwrap();
        let c = t.p2n_constant().unwrap();
        assert!(close(c, 1.0 / (12.0 * sqrt(3.0 * PI)), 1e-15));
        assert!(close(c, 0.027_144_584, 1e-9));
        assert!(close(t.p2n_constant_from_c1_c2().unwrap(), c, 1e-14));
        assert!(close(t.c1().unwrap(), 1.0 / 12.0, 1e-15));
        assert!(close(t.p2n_constant_singularity().unwrap(), 3.0 / sqrt(PI), 1e-14));
        assert!(TreeClosedForms::new(4, 3.0).unwrap().p2n_constant().is_err());
        let near = TreeClosedForms::new(4, 3.0 - 1e-6).unwrap().p2n_constant().unwrap();
        assert!(near < 1e-12);
        for (d, l) in [(3, 0.3), (5, 1.7), (6, 4.9)] {
            let t = TreeClosedForms::new(d, l).unwrap();
            assert!(close(t.p2n_constant_from_c1_c2().unwrap(), t.p2n_constant().unwrap(), 1e-14));
        }
    }
}
