//! Worker-pool drivers. Results come back in input order regardless of
//! completion order.

use rayon::prelude::*;
use rayon::ThreadPool;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use walkspec_core::montecarlo::{simulate_path, PathSummary, SimConfig};
use walkspec_core::Result;

pub fn pool(jobs: Option<usize>) -> ThreadPool {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs.filter(|&j| j > 0) {
        b = b.num_threads(j);
    }
    b.build().expect("thread pool")
}

/// All replicas of `config`, replica `i` at position `i`.
pub fn simulate_replicas(pool: &ThreadPool, config: &SimConfig) -> Result<Vec<PathSummary>> {
    config.validate()?;
    pool.install(|| (0..config.replicas).into_par_iter().map(|i| simulate_path(config, i)).collect())
}

pub fn map_ordered<T: Sync, U: Send>(pool: &ThreadPool, items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    pool.install(|| items.par_iter().map(f).collect())
}

/// Upper-tail probability of a chi-square statistic.
pub fn chi_square_p_value(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return if statistic == 0.0 { 1.0 } else { 0.0 };
    }
    if !statistic.is_finite() {
        return 0.0;
    }
    ChiSquared::new(dof as f64).map_or(f64::NAN, |d| d.sf(statistic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use walkspec_core::montecarlo::simulate_all;
    use walkspec_core::GraphModel;

    #[test]
    fn parallel_matches_sequential() {
        let c = SimConfig::new(GraphModel::free_product([2, 1]).unwrap(), 1.0, 500, 16, 3);
        assert_eq!(simulate_replicas(&pool(Some(4)), &c).unwrap(), simulate_all(&c).unwrap());
    }

    #[test]
    fn p_values() {
        assert!((chi_square_p_value(3.841458820694124, 1) - 0.05).abs() < 1e-9);
        assert_eq!(chi_square_p_value(0.0, 0), 1.0);
        assert_eq!(chi_square_p_value(f64::INFINITY, 3), 0.0);
    }
}
