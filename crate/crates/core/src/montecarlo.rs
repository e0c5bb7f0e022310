//! Path simulation on word addresses and the estimators built on it.
//!
//! Replica `i` of a run with master seed `s` draws from a ChaCha8 stream
//! seeded with `splitmix64(s + (i + 1) * 0x9E3779B97F4A7C15)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::closed_form::TwoCompleteClosedForms;
use crate::kernel::check_bias;
use crate::math::sqrt;
use crate::model::{check_vertex, GraphModel, Letter, LevelDelta, VertexAddr};
use crate::{Error, Result};

pub const RNG_ID: &str = "chacha8";
const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(GOLDEN_GAMMA);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of replica `index` under `master`.
pub fn replica_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn replica_rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(replica_seed(master, index))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub model: GraphModel,
    pub lambda: f64,
    pub steps: u64,
    pub replicas: u64,
    pub seed: u64,
    /// Steps excluded from occupation and excursion statistics.
    pub burn_in: u64,
    /// Accept the line `K_2 * K_2`, which the two-factor theorems exclude.
    pub hypothesis_override: bool,
}

impl SimConfig {
    pub fn new(model: GraphModel, lambda: f64, steps: u64, replicas: u64, seed: u64) -> Self {
        Self { model, lambda, steps, replicas, seed, burn_in: 0, hypothesis_override: false }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        check_bias(self.lambda)?;
        if self.steps == 0 || self.replicas == 0 {
            return Err(Error::InvalidModel(format!(
                "steps and replicas must be >= 1, got {} and {}",
                self.steps, self.replicas
            )));
        }
        if self.burn_in > self.steps {
            return Err(Error::InvalidModel(format!("burn-in {} exceeds steps {}", self.burn_in, self.steps)));
        }
        Ok(())
    }

    /// `(m1, m2)` and the closed forms, when the two-factor results apply.
    fn two_factor_forms(&self) -> Result<TwoCompleteClosedForms> {
        let (m1, m2) = self.model.two_factor().ok_or_else(|| {
            Error::HypothesisViolated(format!("{} is not a free product of two complete graphs", self.model))
        })?;
        let forms = if self.hypothesis_override {
            TwoCompleteClosedForms::with_override(m1, m2, self.lambda)?
        } else {
            TwoCompleteClosedForms::new(m1, m2, self.lambda)?
        };
        Ok(forms)
    }

    fn require_transient_two_factor(&self) -> Result<TwoCompleteClosedForms> {
        let forms = self.two_factor_forms()?;
        if self.lambda >= forms.lambda_c() {
            return Err(Error::HypothesisViolated(format!("need λ < λ_c = {}, got {}", forms.lambda_c(), self.lambda)));
        }
        Ok(forms)
    }
}

/// The walk as a mutable word plus the kernel parameters.
#[derive(Debug, Clone)]
pub struct Walker {
    model: GraphModel,
    lambda: f64,
    word: VertexAddr,
}

impl Walker {
    pub fn new(model: &GraphModel, lambda: f64, start: VertexAddr) -> Result<Self> {
        check_bias(lambda)?;
        check_vertex(model, &start)?;
        Ok(Self { model: model.clone(), lambda, word: start })
    }

    pub fn position(&self) -> &VertexAddr {
        &self.word
    }

    /// One step of the kernel. Down-moves pop, lateral moves rewrite the last
    /// letter, up-moves push; neighbours are ordered as in `model::neighbors`.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> LevelDelta {
        let root = self.word.is_root();
        let kind = self.word.kind();
        let (d_zero, d_plus) = match &self.model {
            GraphModel::RegularTree { d } => (0, if root { *d } else { d - 1 }),
            GraphModel::FreeProductComplete { ms } => {
                let m: u32 = ms.iter().sum();
                if root {
                    (0, m)
                } else {
                    let mi = ms[kind as usize - 1];
                    (mi - 1, m - mi)
                }
            }
        };
        let down_weight = if root { 0.0 } else { self.lambda };
        let total = down_weight + f64::from(d_zero + d_plus);
        let u = rng.random::<f64>() * total;
        if u < down_weight {
            self.word.pop();
            return LevelDelta::Down;
        }
        let mut idx = ((u - down_weight) as u32).min(d_zero + d_plus - 1);
        if idx < d_zero {
            let last = self.word.last().expect("lateral moves need a letter");
            let mut b = idx + 1;
            if b >= last.letter {
                b += 1;
            }
            self.word.set_last(Letter::new(kind, b));
            return LevelDelta::Lateral;
        }
        idx -= d_zero;
        match &self.model {
            GraphModel::RegularTree { .. } => self.word.push(Letter::new(1, idx + 1)),
            GraphModel::FreeProductComplete { ms } => {
                for (j, &mj) in ms.iter().enumerate() {
                    let factor = j as u32 + 1;
                    if factor == kind {
                        continue;
                    }
                    if idx < mj {
                        self.word.push(Letter::new(factor, idx + 1));
                        break;
                    }
                    idx -= mj;
                }
            }
        }
        LevelDelta::Up
    }
}

/// Statistics of one path `X_0, ..., X_steps`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSummary {
    pub steps: u64,
    pub final_level: u64,
    /// Visits to each type (index `t-1`) after burn-in.
    pub type_counts: Vec<u64>,
    /// Visits to the origin after burn-in.
    pub origin_visits: u64,
    /// Per type, histogram of completed run extensions: a run is a maximal
    /// stretch of consecutive times at one (level, type) state, its extension
    /// is its length minus one. The run still open at the end is dropped.
    pub excursions: Vec<Vec<u64>>,
    /// First letter of the final position, if not at the origin.
    pub final_first_letter: Option<Letter>,
}

impl PathSummary {
    pub fn occupation_total(&self) -> u64 {
        self.type_counts.iter().sum::<u64>() + self.origin_visits
    }
}

fn bump(hist: &mut Vec<u64>, j: usize) {
    if hist.len() <= j {
        hist.resize(j + 1, 0);
    }
    hist[j] += 1;
}

/// Runs one path from `start` with the given rng.
pub fn simulate_from<R: Rng + ?Sized>(config: &SimConfig, start: VertexAddr, rng: &mut R) -> Result<PathSummary> {
    config.validate()?;
    let kinds = config.model.kinds() as usize;
    let mut walker = Walker::new(&config.model, config.lambda, start)?;
    let mut type_counts = vec![0u64; kinds];
    let mut origin_visits = 0u64;
    let mut excursions = vec![Vec::new(); kinds];
    let mut run_length = 0usize;
    let record = |w: &VertexAddr, tc: &mut Vec<u64>, ov: &mut u64| match w.kind() {
        0 => *ov += 1,
        t => tc[t as usize - 1] += 1,
    };
    if config.burn_in == 0 {
        record(walker.position(), &mut type_counts, &mut origin_visits);
    }
    for k in 1..=config.steps {
        let kind_before = walker.position().kind();
        let delta = walker.step(rng);
        let counted = k > config.burn_in;
        if kind_before != 0 {
            if delta == LevelDelta::Lateral {
                run_length += 1;
            } else {
                if counted {
                    bump(&mut excursions[kind_before as usize - 1], run_length);
                }
                run_length = 0;
            }
        }
        if counted {
            record(walker.position(), &mut type_counts, &mut origin_visits);
        }
    }
    Ok(PathSummary {
        steps: config.steps,
        final_level: walker.position().level() as u64,
        type_counts,
        origin_visits,
        excursions,
        final_first_letter: walker.position().letters().first().copied(),
    })
}

/// Replica `index` of `config`, started at the origin.
pub fn simulate_path(config: &SimConfig, index: u64) -> Result<PathSummary> {
    simulate_from(config, VertexAddr::root(), &mut replica_rng(config.seed, index))
}

/// All replicas, sequentially.
pub fn simulate_all(config: &SimConfig) -> Result<Vec<PathSummary>> {
    (0..config.replicas).map(|i| simulate_path(config, i)).collect()
}

/// Mean and standard error across replicas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        if xs.len() < 2 {
            return Estimate { mean, se: 0.0 };
        }
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        Estimate { mean, se: sqrt(var / n) }
    }

    /// `(mean - target) / se`.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.se > 0.0 {
            (self.mean - target) / self.se
        } else if self.mean == target {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// `|X_n| / n` averaged over replicas.
pub fn speed_from_summaries(summaries: &[PathSummary]) -> Estimate {
    let xs: Vec<f64> = summaries.iter().map(|s| s.final_level as f64 / s.steps as f64).collect();
    Estimate::from_samples(&xs)
}

/// Speed estimate on a two-factor free product below `λ_c`.
pub fn estimate_speed(config: &SimConfig) -> Result<Estimate> {
    config.require_transient_two_factor()?;
    Ok(speed_from_summaries(&simulate_all(config)?))
}

/// Fractions of time per type and at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Occupation {
    pub by_type: Vec<Estimate>,
    pub origin: Estimate,
}

pub fn occupation_from_summaries(summaries: &[PathSummary]) -> Occupation {
    let kinds = summaries.first().map_or(0, |s| s.type_counts.len());
    let fraction = |s: &PathSummary, c: u64| c as f64 / s.occupation_total() as f64;
    let by_type = (0..kinds)
        .map(|t| {
            let xs: Vec<f64> = summaries.iter().map(|s| fraction(s, s.type_counts[t])).collect();
            Estimate::from_samples(&xs)
        })
        .collect();
    let xs: Vec<f64> = summaries.iter().map(|s| fraction(s, s.origin_visits)).collect();
    Occupation { by_type, origin: Estimate::from_samples(&xs) }
}

pub fn occupation_fractions(config: &SimConfig) -> Result<Occupation> {
    config.require_transient_two_factor()?;
    Ok(occupation_from_summaries(&simulate_all(config)?))
}

/// Pooled run-extension histograms and a chi-square statistic against
/// `Geometric(p_i)`, `P(j) = p_i^j (1 - p_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcursionStats {
    pub histograms: Vec<Vec<u64>>,
    pub p: Vec<f64>,
    pub fits: Vec<ChiSquare>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    /// Degrees of freedom; 0 when the law is degenerate (`p_i = 0`).
    pub dof: usize,
    pub samples: u64,
    pub mean_extension: f64,
}

/// Chi-square of `hist` against `Geometric(p)`. Cells `0..J` plus a tail
/// cell `>= J`, with `J` the largest cut keeping every expected count >= 5.
pub fn chi_square_geometric(hist: &[u64], p: f64) -> ChiSquare {
    let n: u64 = hist.iter().sum();
    let nf = n as f64;
    let mean_extension =
        if n == 0 { 0.0 } else { hist.iter().enumerate().map(|(j, &c)| j as f64 * c as f64).sum::<f64>() / nf };
    if p <= 0.0 {
        // all mass at 0: any nonzero extension is an outright contradiction
        let off: u64 = hist.iter().skip(1).sum();
        let statistic = if off == 0 { 0.0 } else { f64::INFINITY };
        return ChiSquare { statistic, dof: 0, samples: n, mean_extension };
    }
    let mut cut = 0usize;
    while nf * crate::math::pow(p, (cut + 1) as f64) >= 5.0 && nf * crate::math::pow(p, cut as f64) * (1.0 - p) >= 5.0 {
        cut += 1;
    }
    let mut statistic = 0.0;
    for j in 0..cut {
        let expected = nf * crate::math::pow(p, j as f64) * (1.0 - p);
        let observed = hist.get(j).copied().unwrap_or(0) as f64;
        statistic += (observed - expected) * (observed - expected) / expected;
    }
    let expected_tail = nf * crate::math::pow(p, cut as f64);
    let observed_tail = hist.iter().skip(cut).sum::<u64>() as f64;
    statistic += (observed_tail - expected_tail) * (observed_tail - expected_tail) / expected_tail;
    ChiSquare { statistic, dof: cut, samples: n, mean_extension }
}

pub fn excursions_from_summaries(config: &SimConfig, summaries: &[PathSummary]) -> Result<ExcursionStats> {
    let forms = config.two_factor_forms()?;
    let mut histograms = vec![Vec::new(); 2];
    for s in summaries {
        for (t, h) in s.excursions.iter().enumerate() {
            for (j, &c) in h.iter().enumerate() {
                if c > 0 {
                    if histograms[t].len() <= j {
                        histograms[t].resize(j + 1, 0);
                    }
                    histograms[t][j] += c;
                }
            }
        }
    }
    let p = vec![forms.excursion_parameter(1)?, forms.excursion_parameter(2)?];
    let fits = histograms.iter().zip(&p).map(|(h, &pi)| chi_square_geometric(h, pi)).collect();
    Ok(ExcursionStats { histograms, p, fits })
}

pub fn excursion_stats(config: &SimConfig) -> Result<ExcursionStats> {
    config.two_factor_forms()?;
    let summaries = simulate_all(config)?;
    excursions_from_summaries(config, &summaries)
}

/// The marked branch `A`: words starting with the type-2 letter `(2, 1)`.
pub const BRANCH_ROOT: Letter = Letter::new(2, 1);

/// `P_start(X_N ∈ A)`, estimated from replicas.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicEstimate {
    pub start: VertexAddr,
    pub estimate: Estimate,
}

fn in_branch(s: &PathSummary) -> bool {
    s.final_first_letter == Some(BRANCH_ROOT)
}

/// Seed offset per start so that different starts use disjoint streams.
fn start_seed(master: u64, start_index: usize) -> u64 {
    splitmix64(master ^ (start_index as u64).wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Branch-hitting frequency after `config.steps` steps for each start.
pub fn harmonic_split_estimate(config: &SimConfig, starts: &[VertexAddr]) -> Result<Vec<HarmonicEstimate>> {
    config.require_transient_two_factor()?;
    starts
        .iter()
        .enumerate()
        .map(|(k, start)| {
            let seed = start_seed(config.seed, k);
            let xs = (0..config.replicas)
                .map(|i| {
                    let s = simulate_from(config, start.clone(), &mut replica_rng(seed, i))?;
                    Ok(if in_branch(&s) { 1.0 } else { 0.0 })
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(HarmonicEstimate { start: start.clone(), estimate: Estimate::from_samples(&xs) })
        })
        .collect()
}

/// `f̂(o) - f̂(x)` for `x = (1,1)`, its z-score, and the same at twice the
/// horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSplit {
    pub origin: Estimate,
    pub neighbour: Estimate,
    pub z_score: f64,
    pub doubled_origin: Estimate,
    pub doubled_neighbour: Estimate,
    /// Largest shift between horizons `N` and `2N`, in standard errors.
    pub horizon_shift_se: f64,
}

/// Split test from `{o, (1,1)}`. Fails with `Inconclusive` when `z < 3`.
pub fn harmonic_split_test(config: &SimConfig) -> Result<HarmonicSplit> {
    let starts = [VertexAddr::root(), VertexAddr::from_letters([Letter::new(1, 1)])];
    let base = harmonic_split_estimate(config, &starts)?;
    let mut doubled_config = config.clone();
    doubled_config.steps = config.steps.saturating_mul(2);
    let doubled = harmonic_split_estimate(&doubled_config, &starts)?;
    let (o, x) = (base[0].estimate, base[1].estimate);
    let se = sqrt(o.se * o.se + x.se * x.se);
    let z_score = if se > 0.0 { (o.mean - x.mean) / se } else { 0.0 };
    let shift = |a: Estimate, b: Estimate| {
        let s = sqrt(a.se * a.se + b.se * b.se);
        if s > 0.0 {
            crate::math::abs(a.mean - b.mean) / s
        } else {
            0.0
        }
    };
    let horizon_shift_se = shift(o, doubled[0].estimate).max(shift(x, doubled[1].estimate));
    let split = HarmonicSplit {
        origin: o,
        neighbour: x,
        z_score,
        doubled_origin: doubled[0].estimate,
        doubled_neighbour: doubled[1].estimate,
        horizon_shift_se,
    };
    if z_score < 3.0 {
        return Err(Error::Inconclusive { z_score });
    }
    Ok(split)
}
