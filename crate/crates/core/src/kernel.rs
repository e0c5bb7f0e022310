//! The λ-biased kernel, conductances, the reversible measure μ and the
//! lumped (level, type) chain.
//!
//! At the root every neighbour has probability `1/d_o`. Elsewhere the unique
//! down-neighbour gets `λ / (d_v + (λ-1) d_v^-)` and every other neighbour
//! `1 / (d_v + (λ-1) d_v^-)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::pow;
use crate::model::{self, check_vertex, GraphModel, LevelDelta, VertexAddr};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionRow<T> {
    pub entries: Vec<(T, f64)>,
}

impl<T> TransitionRow<T> {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<T: PartialEq> TransitionRow<T> {
    pub fn prob(&self, target: &T) -> f64 {
        self.entries.iter().filter(|(t, _)| t == target).map(|(_, p)| p).sum()
    }
}

pub(crate) fn check_bias(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::NegativeBias(lambda))
    }
}

fn check_positive_bias(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::NonpositiveBias(lambda))
    }
}

/// One-step probability of moving along an edge with the given level change,
/// from a vertex with the given degree split.
pub(crate) fn edge_probability(deg: &model::LevelDegrees, delta: LevelDelta, lambda: f64, at_root: bool) -> f64 {
    if at_root {
        return 1.0 / f64::from(deg.d_v);
    }
    let numerator = if delta == LevelDelta::Down { lambda } else { 1.0 };
    numerator / deg.kernel_denominator(lambda)
}

pub fn transition_row(model: &GraphModel, lambda: f64, v: &VertexAddr) -> Result<TransitionRow<VertexAddr>> {
    check_bias(lambda)?;
    check_vertex(model, v)?;
    let deg = model::level_degrees_unchecked(model, v);
    let entries = model::neighbors_unchecked(model, v)
        .into_iter()
        .map(|nb| {
            let p = edge_probability(&deg, nb.delta, lambda, v.is_root());
            (nb.vertex, p)
        })
        .collect();
    Ok(TransitionRow { entries })
}

/// Conductance `λ^{-n}` of an edge at distance `n` from the root.
pub fn conductance_at_distance(lambda: f64, n: usize) -> Result<f64> {
    check_positive_bias(lambda)?;
    Ok(pow(lambda, -(n as f64)))
}

/// Conductance of the edge `{x, y}`.
pub fn conductance(model: &GraphModel, lambda: f64, x: &VertexAddr, y: &VertexAddr) -> Result<f64> {
    check_positive_bias(lambda)?;
    let adjacent = model::neighbors(model, x)?.iter().any(|nb| &nb.vertex == y);
    if !adjacent {
        return Err(Error::InvalidVertex(format!("{x} and {y} are not adjacent in {model}")));
    }
    conductance_at_distance(lambda, x.level().min(y.level()))
}

/// The reversible measure: `μ(o) = d_o`, `μ(x) = (d_x^+ + d_x^0 + λ d_x^-) λ^{-|x|}`.
pub fn stationary_weight(model: &GraphModel, lambda: f64, v: &VertexAddr) -> Result<f64> {
    check_positive_bias(lambda)?;
    let deg = model::level_degrees(model, v)?;
    if v.is_root() {
        return Ok(f64::from(deg.d_v));
    }
    Ok(deg.kernel_denominator(lambda) * pow(lambda, -(v.level() as f64)))
}

/// A state of the lumped chain `(|X_n|, <X_n>)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QState {
    Origin,
    /// `level >= 1`; `kind` is the 1-based factor of the last letter (1 for trees).
    At {
        level: u32,
        kind: u32,
    },
}

impl QState {
    pub fn level(&self) -> u32 {
        match self {
            QState::Origin => 0,
            QState::At { level, .. } => *level,
        }
    }
}

/// The image of the walk under `v ↦ (|v|, <v>)`. Exact (Markov) for trees
/// and two-factor free products, where the down-neighbour's type is
/// determined by the current type.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientChain {
    model: GraphModel,
    lambda: f64,
}

pub fn build_quotient(model: &GraphModel, lambda: f64) -> Result<QuotientChain> {
    check_bias(lambda)?;
    model.validate()?;
    if let GraphModel::FreeProductComplete { ms } = model {
        if ms.len() != 2 {
            return Err(Error::UnsupportedModel(format!(
                "{model}: the (level, type) lumping is only tabulated for two factors"
            )));
        }
    }
    Ok(QuotientChain { model: model.clone(), lambda })
}

impl QuotientChain {
    pub fn model(&self) -> &GraphModel {
        &self.model
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Types per level: 1 for trees, 2 for two-factor free products.
    pub fn kinds(&self) -> u32 {
        self.model.kinds()
    }

    /// Dense index: origin is 0, `(k, t)` is `1 + (k-1) * kinds + (t-1)`.
    pub fn index(&self, s: QState) -> usize {
        match s {
            QState::Origin => 0,
            QState::At { level, kind } => 1 + (level as usize - 1) * self.kinds() as usize + (kind as usize - 1),
        }
    }

    pub fn state(&self, index: usize) -> QState {
        if index == 0 {
            return QState::Origin;
        }
        let k = self.kinds() as usize;
        QState::At { level: ((index - 1) / k + 1) as u32, kind: ((index - 1) % k + 1) as u32 }
    }

    /// Number of states with level `<= max_level`.
    pub fn states_up_to(&self, max_level: usize) -> usize {
        1 + max_level * self.kinds() as usize
    }

    fn check_state(&self, s: QState) -> Result<()> {
        match s {
            QState::Origin => Ok(()),
            QState::At { level, kind } if level >= 1 && (1..=self.kinds()).contains(&kind) => Ok(()),
            _ => Err(Error::InvalidState(format!("{s:?} is not a state of the chain on {}", self.model))),
        }
    }

    /// Row of the lumped kernel. Zero-probability entries are omitted.
    pub fn row(&self, s: QState) -> Result<TransitionRow<QState>> {
        self.check_state(s)?;
        let lambda = self.lambda;
        let mut entries = Vec::with_capacity(3);
        let mut push = |t: QState, num: f64, den: f64| {
            if num > 0.0 {
                entries.push((t, num / den));
            }
        };
        match (&self.model, s) {
            (GraphModel::RegularTree { d }, QState::Origin) => {
                let _ = d;
                push(QState::At { level: 1, kind: 1 }, 1.0, 1.0);
            }
            (GraphModel::RegularTree { d }, QState::At { level, .. }) => {
                let den = f64::from(d - 1) + lambda;
                let down = if level == 1 { QState::Origin } else { QState::At { level: level - 1, kind: 1 } };
                push(down, lambda, den);
                push(QState::At { level: level + 1, kind: 1 }, f64::from(d - 1), den);
            }
            (GraphModel::FreeProductComplete { ms }, QState::Origin) => {
                let m = f64::from(ms[0] + ms[1]);
                push(QState::At { level: 1, kind: 1 }, f64::from(ms[0]), m);
                push(QState::At { level: 1, kind: 2 }, f64::from(ms[1]), m);
            }
            (GraphModel::FreeProductComplete { ms }, QState::At { level, kind }) => {
                let other = 3 - kind;
                let m_own = ms[kind as usize - 1];
                let m_other = ms[other as usize - 1];
                let den = f64::from(ms[0] + ms[1] - 1) + lambda;
                let down = if level == 1 { QState::Origin } else { QState::At { level: level - 1, kind: other } };
                push(down, lambda, den);
                push(s, f64::from(m_own - 1), den);
                push(QState::At { level: level + 1, kind: other }, f64::from(m_other), den);
            }
        }
        Ok(TransitionRow { entries })
    }

    /// Symmetrised weights `sqrt(q(x,y) q(y,x))` out of `s`, diagonal kept.
    ///
    /// The chain is reversible, so this matrix is similar to the kernel through
    /// `diag(sqrt(π))` and has the same origin-to-origin powers. Its entries
    /// do not drift apart geometrically with the level, which keeps the
    /// renormalised DP well scaled.
    pub(crate) fn symmetric_row(&self, s: QState) -> Vec<(QState, f64)> {
        let row = self.row(s).expect("state produced by the chain");
        row.entries
            .iter()
            .map(|&(t, p)| {
                if t == s {
                    (t, p)
                } else {
                    let back = self.row(t).expect("neighbour state").prob(&s);
                    (t, libm::sqrt(p * back))
                }
            })
            .collect()
    }
}

pub fn quotient_row(chain: &QuotientChain, state: QState) -> Result<TransitionRow<QState>> {
    chain.row(state)
}

/// Lumped distribution of `(|X_n|, <X_n>)` after `n` steps from the origin,
/// by forward DP on the (unsymmetrised) quotient kernel. Returns one vector
/// per step `0..=n`, indexed as [`QuotientChain::index`].
pub fn quotient_distributions(chain: &QuotientChain, n: usize) -> Vec<Vec<f64>> {
    let size = chain.states_up_to(n);
    let rows: Vec<TransitionRow<QState>> =
        (0..chain.states_up_to(n.saturating_sub(1))).map(|i| chain.row(chain.state(i)).expect("valid state")).collect();
    let mut current = vec![0.0; size];
    current[0] = 1.0;
    let mut out = vec![current.clone()];
    for step in 1..=n {
        let mut next = vec![0.0; size];
        for (i, row) in rows.iter().enumerate().take(chain.states_up_to(step - 1)) {
            let mass = current[i];
            if mass == 0.0 {
                continue;
            }
            for &(t, p) in &row.entries {
                next[chain.index(t)] += mass * p;
            }
        }
        out.push(next.clone());
        current = next;
    }
    out
}

/// Full-graph lumped distribution of `(|X_k|, <X_k>)` for `k = 0..=n`, by
/// propagating the exact kernel over every vertex of `B(n)`. Brute-force
/// oracle for the quotient chain.
pub fn ball_distributions(model: &GraphModel, lambda: f64, n: usize) -> Result<Vec<Vec<f64>>> {
    check_bias(lambda)?;
    let chain_kinds = model.kinds() as usize;
    let ball = model::enumerate_ball(model, n)?;
    let rows: Vec<Vec<(usize, f64)>> = ball
        .vertices
        .iter()
        .map(|v| {
            let row = transition_row(model, lambda, v)?;
            Ok(row.entries.into_iter().filter_map(|(u, p)| ball.index_of(&u).map(|j| (j, p))).collect())
        })
        .collect::<Result<_>>()?;
    let lump = |v: &VertexAddr| -> usize {
        if v.is_root() {
            0
        } else {
            1 + (v.level() - 1) * chain_kinds + (v.kind() as usize - 1)
        }
    };
    let size = 1 + n * chain_kinds;
    let mut current = vec![0.0; ball.len()];
    current[0] = 1.0;
    let mut out = Vec::with_capacity(n + 1);
    for step in 0..=n {
        let mut lumped = vec![0.0; size];
        for (i, &mass) in current.iter().enumerate() {
            if mass != 0.0 {
                lumped[lump(&ball.vertices[i])] += mass;
            }
        }
        out.push(lumped);
        if step == n {
            break;
        }
        let mut next = vec![0.0; ball.len()];
        for (i, &mass) in current.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for &(j, p) in &rows[i] {
                next[j] += mass * p;
            }
        }
        current = next;
    }
    Ok(out)
}

/// Origin return probabilities `p^(k)(o,o)`, `k = 0..=n`, from the ball oracle.
pub fn ball_return_probabilities(model: &GraphModel, lambda: f64, n: usize) -> Result<Vec<f64>> {
    Ok(ball_distributions(model, lambda, n)?.into_iter().map(|d| d[0]).collect())
}

impl core::fmt::Display for QState {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            QState::Origin => f.write_str("(0,0)"),
            QState::At { level, kind } => write!(f, "({level},{kind})"),
        }
    }
}
