//! One row per λ of a parameter sweep.

use rayon::ThreadPool;
use serde::Serialize;
use walkspec_core::asymptotics::lambda_c;
use walkspec_core::closed_form::{TreeClosedForms, TwoCompleteClosedForms};
use walkspec_core::fixed_point::rho_free_product;
use walkspec_core::kernel::build_quotient;
use walkspec_core::montecarlo::{speed_from_summaries, SimConfig, RNG_ID};
use walkspec_core::series::{rho_from_series, series_table};
use walkspec_core::GraphModel;

use crate::export::{Cell, Table};
use crate::parallel::{map_ordered, simulate_replicas};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub model: String,
    pub lambda: f64,
    pub rho_closed: Option<f64>,
    pub rho_solver: Option<f64>,
    pub rho_dp: Option<f64>,
    pub gap_closed_solver: Option<f64>,
    pub gap_closed_dp: Option<f64>,
    pub gap_solver_dp: Option<f64>,
    pub speed_closed: Option<f64>,
    pub speed_mc: Option<f64>,
    pub speed_se: Option<f64>,
    pub n_max: usize,
    pub steps: u64,
    pub replicas: u64,
    pub seed: u64,
    pub rng_id: String,
    pub wall_time_ms: Option<f64>,
}

pub const COLUMNS: [&str; 17] = [
    "model",
    "lambda",
    "rho_closed",
    "rho_solver",
    "rho_dp",
    "gap_closed_solver",
    "gap_closed_dp",
    "gap_solver_dp",
    "speed_closed",
    "speed_mc",
    "speed_se",
    "n_max",
    "steps",
    "replicas",
    "seed",
    "rng_id",
    "wall_time_ms",
];

impl SweepRecord {
    pub fn cells(&self) -> Vec<Cell> {
        vec![
            self.model.clone().into(),
            self.lambda.into(),
            self.rho_closed.into(),
            self.rho_solver.into(),
            self.rho_dp.into(),
            self.gap_closed_solver.into(),
            self.gap_closed_dp.into(),
            self.gap_solver_dp.into(),
            self.speed_closed.into(),
            self.speed_mc.into(),
            self.speed_se.into(),
            self.n_max.into(),
            self.steps.into(),
            self.replicas.into(),
            self.seed.into(),
            self.rng_id.clone().into(),
            self.wall_time_ms.into(),
        ]
    }

    pub fn has_rho(&self) -> bool {
        self.rho_closed.is_some() || self.rho_solver.is_some() || self.rho_dp.is_some()
    }
}

/// What to compute at each point. `n_max = 0` skips the series estimate,
/// `replicas = 0` skips simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub model: GraphModel,
    pub n_max: usize,
    pub steps: u64,
    pub replicas: u64,
    pub seed: u64,
    pub timing: bool,
}

/// Factor sizes whose free product is the model: `T_d` is `K_2 * ... * K_2`.
pub fn solver_factors(model: &GraphModel) -> Vec<u32> {
    match model {
        GraphModel::RegularTree { d } => vec![1; *d as usize],
        GraphModel::FreeProductComplete { ms } => ms.clone(),
    }
}

/// Bipartite models need period-2 ratios.
pub fn series_period(model: &GraphModel) -> usize {
    match model {
        GraphModel::RegularTree { .. } => 2,
        GraphModel::FreeProductComplete { ms } => {
            if ms.iter().all(|&m| m == 1) {
                2
            } else {
                1
            }
        }
    }
}

pub fn rho_closed(model: &GraphModel, lambda: f64) -> Option<f64> {
    match model {
        GraphModel::RegularTree { d } => TreeClosedForms::new(*d, lambda).and_then(|f| f.rho()).ok(),
        GraphModel::FreeProductComplete { ms } if ms.len() == 2 => {
            TwoCompleteClosedForms::with_override(ms[0], ms[1], lambda).and_then(|f| f.rho()).ok()
        }
        _ => None,
    }
}

pub fn rho_dp(model: &GraphModel, lambda: f64, n_max: usize) -> Option<f64> {
    let chain = build_quotient(model, lambda).ok()?;
    rho_from_series(&series_table(&chain, n_max), series_period(model)).ok().map(|e| e.rho)
}

pub fn speed_closed(model: &GraphModel, lambda: f64) -> Option<f64> {
    let (m1, m2) = model.two_factor()?;
    TwoCompleteClosedForms::with_override(m1, m2, lambda).and_then(|f| f.speed()).ok()
}

fn gap(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some((a? - b?).abs())
}

pub fn sweep_point(pool: &ThreadPool, plan: &SweepPlan, lambda: f64) -> SweepRecord {
    let start = std::time::Instant::now();
    let model = &plan.model;
    let rho_c = rho_closed(model, lambda);
    let rho_s = rho_free_product(&solver_factors(model), lambda).ok();
    let rho_d = if plan.n_max > 0 { rho_dp(model, lambda, plan.n_max) } else { None };
    let speed_c = speed_closed(model, lambda);
    let below_critical = lambda_c(model).is_ok_and(|lc| lambda <= lc);
    let (speed_mc, speed_se) = if plan.replicas > 0 && plan.steps > 0 && speed_c.is_some() && below_critical {
        let config = SimConfig::new(model.clone(), lambda, plan.steps, plan.replicas, plan.seed);
        match simulate_replicas(pool, &config) {
            Ok(s) => {
                let e = speed_from_summaries(&s);
                (Some(e.mean), Some(e.se))
            }
            Err(_) => (None, None),
        }
    } else {
        (None, None)
    };
    SweepRecord {
        model: model.to_string(),
        lambda,
        rho_closed: rho_c,
        rho_solver: rho_s,
        rho_dp: rho_d,
        gap_closed_solver: gap(rho_c, rho_s),
        gap_closed_dp: gap(rho_c, rho_d),
        gap_solver_dp: gap(rho_s, rho_d),
        speed_closed: speed_c,
        speed_mc,
        speed_se,
        n_max: plan.n_max,
        steps: plan.steps,
        replicas: plan.replicas,
        seed: plan.seed,
        rng_id: RNG_ID.to_string(),
        wall_time_ms: plan.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    }
}

/// Evenly spaced grid including both ends.
pub fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect(),
    }
}

pub fn run_sweep(pool: &ThreadPool, plan: &SweepPlan, lambdas: &[f64]) -> Vec<SweepRecord> {
    // the inner simulation shares the pool, so points run one at a time when simulating
    if plan.replicas > 0 {
        lambdas.iter().map(|&l| sweep_point(pool, plan, l)).collect()
    } else {
        map_ordered(pool, lambdas, |&l| sweep_point(pool, plan, l))
    }
}

pub fn to_table(records: &[SweepRecord]) -> Table {
    let mut t = Table::new(&COLUMNS);
    for r in records {
        t.push(r.cells());
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parallel::pool;

    fn plan(model: &str) -> SweepPlan {
        SweepPlan { model: model.parse().unwrap(), n_max: 0, steps: 0, replicas: 0, seed: 1, timing: false }
    }

    #[test]
    fn tree_rows() {
        let p = pool(Some(2));
        let rows = run_sweep(&p, &plan("tree:d=4"), &grid(0.05, 3.0, 60));
        assert_eq!(rows.len(), 60);
        assert!(rows.iter().all(SweepRecord::has_rho));
        assert!(rows.windows(2).all(|w| w[1].rho_closed > w[0].rho_closed));
        // the solver needs λ < λ_c, so the endpoint has no solver value
        for r in &rows[..59] {
            assert!(r.gap_closed_solver.unwrap() < 1e-9, "{r:?}");
            assert!(r.gap_closed_dp.is_none());
        }
        assert!(rows[59].rho_solver.is_none());
    }

    #[test]
    fn free_rows_are_monotone() {
        let p = pool(Some(2));
        let lc = 2f64.sqrt();
        let rows = run_sweep(&p, &plan("free:2,1"), &grid(0.05, lc, 30));
        assert!(rows.windows(2).all(|w| w[1].rho_closed > w[0].rho_closed));
        assert!(rows.windows(2).all(|w| w[1].speed_closed < w[0].speed_closed));
        assert!(rows.last().unwrap().rho_solver.is_none());
    }

    #[test]
    fn grid_ends() {
        assert_eq!(grid(1.0, 2.0, 3), vec![1.0, 1.5, 2.0]);
        assert_eq!(grid(1.0, 2.0, 1), vec![1.0]);
    }
}
