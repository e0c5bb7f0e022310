//! Subcommand bodies. Each returns text for the terminal and, where there
//! is tabular data, a [`Table`] for `--out` / `--json`.

use std::fmt::Write as _;

use rayon::ThreadPool;
use walkspec_core::asymptotics::{continuity_sweep, lambda_c};
use walkspec_core::closed_form::{TreeClosedForms, TwoCompleteClosedForms};
use walkspec_core::fixed_point::rho_free_product;
use walkspec_core::kernel::build_quotient;
use walkspec_core::montecarlo::{
    excursions_from_summaries, occupation_from_summaries, speed_from_summaries, SimConfig, RNG_ID,
};
use walkspec_core::series::{renewal_check, rho_from_series, series_table};
use walkspec_core::{Error, GraphModel};

use crate::cli::{Cli, Command, Common, Method};
use crate::config::Config;
use crate::export::{gnuplot_script, shell_quote, Cell, Table, TOOL};
use crate::parallel::{chi_square_p_value, pool, simulate_replicas};
use crate::sweep::{grid, run_sweep, series_period, solver_factors, to_table, SweepPlan};
use crate::verify::{run_suite, Context, Suite};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_NMAX: usize = 2000;
pub const DEFAULT_STEPS: u64 = 100_000;
pub const DEFAULT_REPLICAS: u64 = 200;

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub text: String,
    pub table: Option<Table>,
    /// Extra files to write next to `--out`: (path suffix, contents).
    pub extras: Vec<(String, String)>,
    pub success: bool,
}

/// Flags merged with the config file.
struct Settings {
    common: Common,
    config: Config,
    argv: Vec<String>,
}

impl Settings {
    fn model(&self) -> Result<GraphModel, String> {
        let s: String = self.config.require(self.common.model.clone(), "model")?;
        s.parse().map_err(|e: Error| e.to_string())
    }

    fn lambda(&self) -> Result<f64, String> {
        self.config.require(self.common.lambda, "lambda")
    }

    fn seed(&self) -> Result<u64, String> {
        self.config.resolve_or(self.common.seed, "seed", DEFAULT_SEED)
    }

    fn nmax(&self, default: usize) -> Result<usize, String> {
        self.config.resolve_or(self.common.nmax, "nmax", default)
    }

    fn steps(&self, default: u64) -> Result<u64, String> {
        self.config.resolve_or(self.common.steps, "steps", default)
    }

    fn replicas(&self, default: u64) -> Result<u64, String> {
        self.config.resolve_or(self.common.replicas, "replicas", default)
    }

    fn pool(&self) -> Result<ThreadPool, String> {
        Ok(pool(self.config.resolve(self.common.jobs, "jobs")?))
    }

    fn stamp(&self, table: &mut Table, model: Option<&GraphModel>, seed: Option<u64>) {
        table.meta("tool", TOOL);
        let command: Vec<String> = self.argv.iter().map(|a| shell_quote(a)).collect();
        table.meta("command", command.join(" "));
        if let Some(m) = model {
            table.meta("model", m);
        }
        if let Some(s) = seed {
            table.meta("seed", s);
            table.meta("rng_id", RNG_ID);
        }
    }
}

pub fn run(cli: Cli, argv: Vec<String>) -> Result<Outcome, String> {
    let config = match cli.common.config.as_deref() {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let s = Settings { common: cli.common, config, argv };
    match cli.command {
        Command::Rho { method } => cmd_rho(&s, method),
        Command::Speed => cmd_speed(&s),
        Command::Dp => cmd_dp(&s),
        Command::Simulate { burn_in } => cmd_simulate(&s, burn_in),
        Command::Sweep { lambda_lo, lambda_hi, points, gnuplot_script } => {
            cmd_sweep(&s, lambda_lo, lambda_hi, points, gnuplot_script)
        }
        Command::Verify { suite, fast } => cmd_verify(&s, &suite, fast),
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

fn closed_rho(model: &GraphModel, lambda: f64) -> Result<f64, String> {
    match model {
        GraphModel::RegularTree { d } => TreeClosedForms::new(*d, lambda).and_then(|f| f.rho()).map_err(err),
        GraphModel::FreeProductComplete { ms } if ms.len() == 2 => {
            let forms = if model.is_degenerate_line() {
                TwoCompleteClosedForms::with_override(1, 1, lambda)
            } else {
                TwoCompleteClosedForms::new(ms[0], ms[1], lambda)
            };
            forms.and_then(|f| f.rho()).map_err(err)
        }
        _ => Err(format!("unsupported model: no closed form for {model}, use --method solver or dp")),
    }
}

fn cmd_rho(s: &Settings, method: Method) -> Result<Outcome, String> {
    let model = s.model()?;
    let lambda = s.lambda()?;
    let n_max = s.nmax(DEFAULT_NMAX)?;
    let want = |m: Method| method == Method::All || method == m;
    let mut values: Vec<(&str, f64, Option<f64>)> = Vec::new();
    if want(Method::Closed) {
        values.push(("closed", closed_rho(&model, lambda)?, None));
    }
    if want(Method::Solver) {
        values.push(("solver", rho_free_product(&solver_factors(&model), lambda).map_err(err)?, None));
    }
    if want(Method::Dp) {
        let chain = build_quotient(&model, lambda).map_err(err)?;
        let est = rho_from_series(&series_table(&chain, n_max), series_period(&model)).map_err(err)?;
        values.push(("dp", est.rho, Some(est.error)));
    }
    let mut table = Table::new(&["method", "rho", "error_estimate"]);
    s.stamp(&mut table, Some(&model), None);
    table.meta("lambda", lambda);
    table.meta("n_max", n_max);
    let mut text = format!("model {model}, λ = {lambda}\n");
    for &(name, rho, error) in &values {
        table.push(vec![name.into(), rho.into(), error.into()]);
        let _ = writeln!(text, "  {name:<7}{rho}");
    }
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            let _ = writeln!(text, "  |{} - {}| = {:.3e}", a.0, b.0, (a.1 - b.1).abs());
        }
    }
    Ok(Outcome { text, table: Some(table), extras: Vec::new(), success: true })
}

fn two_factor(model: &GraphModel) -> Result<(u32, u32), String> {
    model.two_factor().ok_or_else(|| {
        format!("hypothesis violated: the speed formula covers free products of two complete graphs, not {model}")
    })
}

fn cmd_speed(s: &Settings) -> Result<Outcome, String> {
    let model = s.model()?;
    let lambda = s.lambda()?;
    let (m1, m2) = two_factor(&model)?;
    let forms = if model.is_degenerate_line() {
        TwoCompleteClosedForms::with_override(m1, m2, lambda)
    } else {
        TwoCompleteClosedForms::new(m1, m2, lambda)
    }
    .map_err(err)?;
    let closed = forms.speed().map_err(err)?;
    let seed = s.seed()?;
    let config = SimConfig::new(model.clone(), lambda, s.steps(DEFAULT_STEPS)?, s.replicas(DEFAULT_REPLICAS)?, seed);
    let est = speed_from_summaries(&simulate_replicas(&s.pool()?, &config).map_err(err)?);
    let z = est.z_score(closed);
    let mut table = Table::new(&["lambda", "speed_closed", "speed_mc", "speed_se", "z_score", "steps", "replicas"]);
    s.stamp(&mut table, Some(&model), Some(seed));
    table.push(vec![
        lambda.into(),
        closed.into(),
        est.mean.into(),
        est.se.into(),
        z.into(),
        config.steps.into(),
        config.replicas.into(),
    ]);
    let text = format!(
        "model {model}, λ = {lambda}\n  closed {closed}\n  mc     {} ± {} ({} x {} steps)\n  z      {z:.3}\n",
        est.mean, est.se, config.replicas, config.steps
    );
    Ok(Outcome { text, table: Some(table), extras: Vec::new(), success: true })
}

fn cmd_dp(s: &Settings) -> Result<Outcome, String> {
    let model = s.model()?;
    let lambda = s.lambda()?;
    let n_max = s.nmax(DEFAULT_NMAX)?;
    let chain = build_quotient(&model, lambda).map_err(err)?;
    let t = series_table(&chain, n_max);
    let mut table = Table::new(&["n", "p", "f", "log_p", "log_f"]);
    s.stamp(&mut table, Some(&model), None);
    table.meta("lambda", lambda);
    for n in 0..=n_max {
        table.push(vec![n.into(), t.p(n).into(), t.f(n).into(), t.log_p[n].into(), t.log_f[n].into()]);
    }
    let mut text = format!("model {model}, λ = {lambda}, n_max = {n_max}\n");
    let _ = writeln!(text, "  renewal residual {:.3e}", renewal_check(&t));
    match rho_from_series(&t, series_period(&model)) {
        Ok(e) => {
            let _ = writeln!(text, "  rho estimate {} (± {:.1e})", e.rho, e.error);
        }
        Err(e) => {
            let _ = writeln!(text, "  rho estimate unavailable: {e}");
        }
    }
    for n in 0..=n_max.min(10) {
        let _ = writeln!(text, "  p({n}) = {}  f({n}) = {}", t.p(n), t.f(n));
    }
    Ok(Outcome { text, table: Some(table), extras: Vec::new(), success: true })
}

fn cmd_simulate(s: &Settings, burn_in: Option<u64>) -> Result<Outcome, String> {
    let model = s.model()?;
    let lambda = s.lambda()?;
    let seed = s.seed()?;
    let mut config =
        SimConfig::new(model.clone(), lambda, s.steps(DEFAULT_STEPS)?, s.replicas(DEFAULT_REPLICAS)?, seed);
    config.burn_in = s.config.resolve_or(burn_in, "burn-in", 0)?;
    config.hypothesis_override = true;
    let summaries = simulate_replicas(&s.pool()?, &config).map_err(err)?;
    let mut table = Table::new(&["quantity", "value", "se"]);
    s.stamp(&mut table, Some(&model), Some(seed));
    table.meta("lambda", lambda);
    table.meta("steps", config.steps);
    table.meta("replicas", config.replicas);
    table.meta("burn_in", config.burn_in);
    let speed = speed_from_summaries(&summaries);
    table.push(vec!["speed".into(), speed.mean.into(), speed.se.into()]);
    let occ = occupation_from_summaries(&summaries);
    table.push(vec!["origin_fraction".into(), occ.origin.mean.into(), occ.origin.se.into()]);
    for (t, e) in occ.by_type.iter().enumerate() {
        table.push(vec![format!("type{}_fraction", t + 1).into(), e.mean.into(), e.se.into()]);
    }
    if model.two_factor().is_some() {
        let stats = excursions_from_summaries(&config, &summaries).map_err(err)?;
        for (t, fit) in stats.fits.iter().enumerate() {
            let i = t + 1;
            table.push(vec![format!("type{i}_runs").into(), fit.samples.into(), None.into()]);
            table.push(vec![format!("type{i}_mean_extension").into(), fit.mean_extension.into(), None.into()]);
            table.push(vec![format!("type{i}_geometric_p").into(), stats.p[t].into(), None.into()]);
            table.push(vec![format!("type{i}_chi2").into(), fit.statistic.into(), None.into()]);
            table.push(vec![format!("type{i}_chi2_dof").into(), fit.dof.into(), None.into()]);
            let pv = chi_square_p_value(fit.statistic, fit.dof);
            table.push(vec![format!("type{i}_chi2_p_value").into(), pv.into(), None.into()]);
        }
    }
    let mut text = format!("model {model}, λ = {lambda}, {} x {} steps, seed {seed}\n", config.replicas, config.steps);
    for row in &table.rows {
        let cell = |c: &Cell| match c {
            Cell::Float(Some(x)) => x.to_string(),
            Cell::Int(n) => n.to_string(),
            Cell::Text(t) => t.clone(),
            _ => String::new(),
        };
        let se = cell(&row[2]);
        let _ = writeln!(
            text,
            "  {:<24}{}{}",
            cell(&row[0]),
            cell(&row[1]),
            if se.is_empty() { se } else { format!(" ± {se}") }
        );
    }
    Ok(Outcome { text, table: Some(table), extras: Vec::new(), success: true })
}

fn cmd_sweep(
    s: &Settings,
    lo: Option<f64>,
    hi: Option<f64>,
    points: Option<usize>,
    gnuplot: bool,
) -> Result<Outcome, String> {
    let model = s.model()?;
    let lc = lambda_c(&model).map_err(err)?;
    let lo = s.config.resolve_or(lo, "lambda-lo", 0.05)?;
    let hi = s.config.resolve_or(hi, "lambda-hi", lc)?;
    let points = s.config.resolve_or(points, "points", 60)?;
    if !(lo > 0.0 && lo <= hi) {
        return Err(format!("need 0 < lambda-lo <= lambda-hi, got {lo}, {hi}"));
    }
    let seed = s.seed()?;
    let plan = SweepPlan {
        model: model.clone(),
        n_max: s.nmax(0)?,
        steps: s.steps(0)?,
        replicas: s.replicas(0)?,
        seed,
        timing: s.common.timing,
    };
    let lambdas = grid(lo, hi, points);
    let records = run_sweep(&s.pool()?, &plan, &lambdas);
    let mut table = to_table(&records);
    s.stamp(&mut table, Some(&model), Some(seed));
    let mut text = format!("model {model}, {points} points on [{lo}, {hi}], λ_c = {lc}\n");
    let inside: Vec<f64> = lambdas.iter().copied().filter(|&l| l <= lc).collect();
    if let Ok(sweep) = continuity_sweep(&model, &inside, 0.02) {
        table.meta("max_rho_jump", sweep.max_jump);
        let _ = writeln!(text, "  max adjacent ρ jump {:.4}", sweep.max_jump);
    }
    for r in &records {
        let f = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.6}"));
        let _ = writeln!(
            text,
            "  λ {:<10.6} ρ {}  speed {}",
            r.lambda,
            f(r.rho_closed.or(r.rho_solver).or(r.rho_dp)),
            f(r.speed_closed)
        );
    }
    let mut extras = Vec::new();
    if gnuplot {
        let data = s
            .common
            .out
            .as_ref()
            .and_then(|p| p.file_name())
            .map_or("sweep.csv".into(), |f| f.to_string_lossy().into_owned());
        extras.push((
            ".gp".to_string(),
            gnuplot_script(&table, &data, &["rho_closed", "rho_solver", "rho_dp", "speed_closed", "speed_mc"]),
        ));
    }
    Ok(Outcome { text, table: Some(table), extras, success: true })
}

fn cmd_verify(s: &Settings, suite: &str, fast: bool) -> Result<Outcome, String> {
    let suite = if suite == "all" { None } else { Some(suite.parse::<Suite>()?) };
    let ctx = Context::new(s.pool()?, fast);
    let results = run_suite(&ctx, suite);
    let mut table = Table::new(&["id", "suite", "title", "passed", "detail"]);
    s.stamp(&mut table, None, None);
    let mut text = String::new();
    for r in &results {
        let _ = writeln!(text, "{r}");
        table.push(vec![
            r.id.into(),
            r.suite.to_string().into(),
            r.title.into(),
            r.passed.into(),
            r.detail.clone().into(),
        ]);
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    let _ = writeln!(text, "{} checks, {failed} failed", results.len());
    Ok(Outcome { text, table: Some(table), extras: Vec::new(), success: failed == 0 })
}
