//! The two graph families and a local adjacency oracle on word addresses.
//!
//! Vertices of both families are reduced words. A free product
//! `K_{m_1+1} * ... * K_{m_r+1}` has letters `(factor, letter)` with
//! `letter` in `1..=m_factor`, no two consecutive letters from the same
//! factor. The regular tree `T_d` uses a single pseudo-factor `1`; the first
//! letter ranges over `1..=d`, every later one over `1..=d-1`. In both cases
//! the graph distance to the root equals the word length.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::math::log_add;
use crate::{Error, Result};

/// Ball enumeration refuses to build more vertices than this.
pub const DEFAULT_BALL_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GraphModel {
    /// The `d`-regular tree `T_d`.
    RegularTree { d: u32 },
    /// Free product of the complete graphs `K_{m_i + 1}`.
    FreeProductComplete { ms: Vec<u32> },
}

impl GraphModel {
    pub fn tree(d: u32) -> Result<Self> {
        let model = GraphModel::RegularTree { d };
        model.validate()?;
        Ok(model)
    }

    pub fn free_product(ms: impl Into<Vec<u32>>) -> Result<Self> {
        let model = GraphModel::FreeProductComplete { ms: ms.into() };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<&Self> {
        match self {
            GraphModel::RegularTree { d } if *d < 2 => {
                Err(Error::InvalidModel(format!("tree degree d = {d} must be >= 2")))
            }
            GraphModel::RegularTree { .. } => Ok(self),
            GraphModel::FreeProductComplete { ms } => {
                if ms.len() < 2 {
                    return Err(Error::InvalidModel(format!("free product needs r >= 2 factors, got {}", ms.len())));
                }
                if let Some(pos) = ms.iter().position(|&m| m == 0) {
                    return Err(Error::InvalidModel(format!("factor {} has m = 0, every m_i must be >= 1", pos + 1)));
                }
                Ok(self)
            }
        }
    }

    /// Common vertex degree: `d` for trees, `m = sum m_i` for free products.
    pub fn degree(&self) -> u32 {
        match self {
            GraphModel::RegularTree { d } => *d,
            GraphModel::FreeProductComplete { ms } => ms.iter().sum(),
        }
    }

    /// Number of vertex types away from the root.
    pub fn kinds(&self) -> u32 {
        match self {
            GraphModel::RegularTree { .. } => 1,
            GraphModel::FreeProductComplete { ms } => ms.len() as u32,
        }
    }

    /// `m_i` for free products.
    pub fn factor_size(&self, factor: u32) -> Option<u32> {
        match self {
            GraphModel::RegularTree { .. } => None,
            GraphModel::FreeProductComplete { ms } => ms.get((factor as usize).checked_sub(1)?).copied(),
        }
    }

    /// `K_2 * K_2`, the two-sided line. Accepted as a model, but theorems
    /// requiring `m_1 m_2 >= 2` reject it.
    pub fn is_degenerate_line(&self) -> bool {
        matches!(self, GraphModel::FreeProductComplete { ms } if ms.as_slice() == [1, 1])
    }

    /// `(m_1, m_2)` of a two-factor free product, any `m_1 m_2`.
    pub fn two_factor(&self) -> Option<(u32, u32)> {
        match self {
            GraphModel::FreeProductComplete { ms } if ms.len() == 2 => Some((ms[0], ms[1])),
            _ => None,
        }
    }

    /// `(m_1, m_2)` when the two-complete-graph theorems apply (`m_1 m_2 >= 2`).
    pub fn two_complete(&self) -> Result<(u32, u32)> {
        match self.two_factor() {
            Some((m1, m2)) if m1 * m2 >= 2 => Ok((m1, m2)),
            Some(_) => Err(Error::HypothesisViolated(
                "two-complete results require m1*m2 >= 2 (the line K2*K2 is excluded)".to_string(),
            )),
            None => Err(Error::HypothesisViolated(format!("{self} is not a free product of two complete graphs"))),
        }
    }
}

pub fn validate_model(model: &GraphModel) -> Result<&GraphModel> {
    model.validate()
}

impl fmt::Display for GraphModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphModel::RegularTree { d } => write!(f, "tree:d={d}"),
            GraphModel::FreeProductComplete { ms } => {
                f.write_str("free:")?;
                for (i, m) in ms.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{m}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for GraphModel {
    type Err = Error;

    /// `tree:d=4` or `free:2,1`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidModel(format!("cannot parse model {s:?}: {why}"));
        let (kind, rest) = s.trim().split_once(':').ok_or_else(|| bad("missing ':'"))?;
        match kind {
            "tree" => {
                let d = rest
                    .strip_prefix("d=")
                    .ok_or_else(|| bad("expected tree:d=<degree>"))?
                    .parse::<u32>()
                    .map_err(|_| bad("degree is not an integer"))?;
                GraphModel::tree(d)
            }
            "free" => {
                let ms = rest
                    .split(',')
                    .map(|t| t.trim().parse::<u32>())
                    .collect::<core::result::Result<Vec<_>, _>>()
                    .map_err(|_| bad("factor sizes must be comma-separated integers"))?;
                GraphModel::free_product(ms)
            }
            _ => Err(bad("model kind must be 'tree' or 'free'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    /// 1-based factor index; always 1 for trees.
    pub factor: u32,
    /// 1-based letter within the factor.
    pub letter: u32,
}

impl Letter {
    pub const fn new(factor: u32, letter: u32) -> Self {
        Letter { factor, letter }
    }
}

/// Word address of a vertex. The empty word is the root `o`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexAddr(Vec<Letter>);

impl VertexAddr {
    pub fn root() -> Self {
        VertexAddr(Vec::new())
    }

    pub fn from_letters(letters: impl Into<Vec<Letter>>) -> Self {
        VertexAddr(letters.into())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// Graph distance to the root.
    pub fn level(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    /// Type of the vertex: factor of the last letter, 0 at the root.
    pub fn kind(&self) -> u32 {
        self.last().map_or(0, |l| l.factor)
    }

    pub fn push(&mut self, letter: Letter) {
        self.0.push(letter);
    }

    pub fn pop(&mut self) -> Option<Letter> {
        self.0.pop()
    }

    /// Replace the last letter in place (a lateral move inside a cell).
    pub fn set_last(&mut self, letter: Letter) {
        if let Some(l) = self.0.last_mut() {
            *l = letter;
        }
    }

    pub fn with(&self, letter: Letter) -> Self {
        let mut out = self.clone();
        out.push(letter);
        out
    }

    pub fn parent(&self) -> Option<Self> {
        let mut out = self.clone();
        out.pop()?;
        Some(out)
    }
}

impl fmt::Display for VertexAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("o");
        }
        for l in &self.0 {
            write!(f, "[{}.{}]", l.factor, l.letter)?;
        }
        Ok(())
    }
}

pub fn check_vertex(model: &GraphModel, v: &VertexAddr) -> Result<()> {
    let bad = |why: String| Err(Error::InvalidVertex(format!("{v} in {model}: {why}")));
    match model {
        GraphModel::RegularTree { d } => {
            for (i, l) in v.letters().iter().enumerate() {
                let arity = if i == 0 { *d } else { d - 1 };
                if l.factor != 1 {
                    return bad(format!("tree letters use factor 1, found {}", l.factor));
                }
                if l.letter == 0 || l.letter > arity {
                    return bad(format!("letter {} at position {i} not in 1..={arity}", l.letter));
                }
            }
        }
        GraphModel::FreeProductComplete { ms } => {
            let mut prev = 0;
            for (i, l) in v.letters().iter().enumerate() {
                let Some(&m) = ms.get((l.factor as usize).wrapping_sub(1)) else {
                    return bad(format!("factor {} not in 1..={}", l.factor, ms.len()));
                };
                if l.letter == 0 || l.letter > m {
                    return bad(format!("letter {} of factor {} not in 1..={m}", l.letter, l.factor));
                }
                if l.factor == prev {
                    return bad(format!("letters {} and {} share factor {prev}", i - 1, i));
                }
                prev = l.factor;
            }
        }
    }
    Ok(())
}

/// Split of `d_v` into edges towards spheres `|v|-1`, `|v|`, `|v|+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelDegrees {
    pub d_v: u32,
    pub d_minus: u32,
    pub d_zero: u32,
    pub d_plus: u32,
}

impl LevelDegrees {
    /// Denominator `d_v + (λ-1) d_v^-` of the kernel, formed as
    /// `(d_v - d_v^-) + λ d_v^-` to avoid cancellation.
    pub fn kernel_denominator(&self, lambda: f64) -> f64 {
        f64::from(self.d_plus + self.d_zero) + lambda * f64::from(self.d_minus)
    }
}

pub fn level_degrees(model: &GraphModel, v: &VertexAddr) -> Result<LevelDegrees> {
    check_vertex(model, v)?;
    Ok(level_degrees_unchecked(model, v))
}

pub(crate) fn level_degrees_unchecked(model: &GraphModel, v: &VertexAddr) -> LevelDegrees {
    let d_v = model.degree();
    match (model, v.last()) {
        (_, None) => LevelDegrees { d_v, d_minus: 0, d_zero: 0, d_plus: d_v },
        (GraphModel::RegularTree { d }, Some(_)) => LevelDegrees { d_v, d_minus: 1, d_zero: 0, d_plus: d - 1 },
        (GraphModel::FreeProductComplete { ms }, Some(l)) => {
            let mi = ms[l.factor as usize - 1];
            LevelDegrees { d_v, d_minus: 1, d_zero: mi - 1, d_plus: d_v - mi }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LevelDelta {
    Down,
    Lateral,
    Up,
}

impl LevelDelta {
    pub fn as_i32(self) -> i32 {
        match self {
            LevelDelta::Down => -1,
            LevelDelta::Lateral => 0,
            LevelDelta::Up => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neighbor {
    pub vertex: VertexAddr,
    pub delta: LevelDelta,
}

/// All `d_v` neighbours of `v`: down first, then lateral, then up.
pub fn neighbors(model: &GraphModel, v: &VertexAddr) -> Result<Vec<Neighbor>> {
    check_vertex(model, v)?;
    Ok(neighbors_unchecked(model, v))
}

pub(crate) fn neighbors_unchecked(model: &GraphModel, v: &VertexAddr) -> Vec<Neighbor> {
    let mut out = Vec::with_capacity(model.degree() as usize);
    if let Some(parent) = v.parent() {
        out.push(Neighbor { vertex: parent, delta: LevelDelta::Down });
    }
    let up = |out: &mut Vec<Neighbor>, letter: Letter| {
        out.push(Neighbor { vertex: v.with(letter), delta: LevelDelta::Up });
    };
    match model {
        GraphModel::RegularTree { d } => {
            let arity = if v.is_root() { *d } else { d - 1 };
            for a in 1..=arity {
                up(&mut out, Letter::new(1, a));
            }
        }
        GraphModel::FreeProductComplete { ms } => {
            let kind = v.kind();
            if let Some(last) = v.last() {
                let parent = v.parent().unwrap_or_default();
                for b in (1..=ms[kind as usize - 1]).filter(|&b| b != last.letter) {
                    out.push(Neighbor { vertex: parent.with(Letter::new(kind, b)), delta: LevelDelta::Lateral });
                }
            }
            for (j, &mj) in ms.iter().enumerate() {
                let factor = j as u32 + 1;
                if factor == kind {
                    continue;
                }
                for c in 1..=mj {
                    up(&mut out, Letter::new(factor, c));
                }
            }
        }
    }
    out
}

/// Sphere sizes `M_0..=M_n`, saturating at `u128::MAX`.
pub fn sphere_sizes(model: &GraphModel, n: usize) -> Vec<u128> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1u128);
    if n == 0 {
        return out;
    }
    match model {
        GraphModel::RegularTree { d } => {
            let mut size = u128::from(*d);
            for _ in 1..=n {
                out.push(size);
                size = size.saturating_mul(u128::from(d - 1));
            }
        }
        GraphModel::FreeProductComplete { ms } => {
            let mut by_type: Vec<u128> = ms.iter().map(|&m| u128::from(m)).collect();
            for _ in 1..=n {
                out.push(by_type.iter().fold(0u128, |a, &b| a.saturating_add(b)));
                let total = by_type.iter().fold(0u128, |a, &b| a.saturating_add(b));
                by_type = ms
                    .iter()
                    .zip(&by_type)
                    .map(|(&m, &own)| u128::from(m).saturating_mul(total.saturating_sub(own)))
                    .collect();
            }
        }
    }
    out
}

/// `ln` of the number of type-`t` vertices on each sphere. Row 0 is the root
/// alone; row `k >= 1` has one entry per type (a single entry for trees).
pub fn log_sphere_type_counts(model: &GraphModel, n: usize) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![0.0]];
    if n == 0 {
        return rows;
    }
    match model {
        GraphModel::RegularTree { d } => {
            for k in 1..=n {
                let ln = libm::log(f64::from(*d)) + (k - 1) as f64 * libm::log(f64::from(d - 1));
                rows.push(vec![ln]);
            }
        }
        GraphModel::FreeProductComplete { ms } => {
            let ln_m: Vec<f64> = ms.iter().map(|&m| libm::log(f64::from(m))).collect();
            rows.push(ln_m.clone());
            for _ in 2..=n {
                let prev = rows.last().expect("row 1 exists");
                let next = (0..ms.len())
                    .map(|j| {
                        let others = prev
                            .iter()
                            .enumerate()
                            .filter(|&(i, _)| i != j)
                            .fold(f64::NEG_INFINITY, |acc, (_, &x)| log_add(acc, x));
                        ln_m[j] + others
                    })
                    .collect();
                rows.push(next);
            }
        }
    }
    rows
}

/// The induced subgraph on `B(n)` with neighbours indexed into `vertices`.
#[derive(Debug, Clone)]
pub struct Ball {
    pub radius: usize,
    /// Vertices in level order, canonical (lexicographic) within a sphere.
    pub vertices: Vec<VertexAddr>,
    /// Neighbours inside the ball with their level change.
    pub adjacency: Vec<Vec<(usize, LevelDelta)>>,
    /// `M_0..=M_n`.
    pub sphere_sizes: Vec<usize>,
    index: BTreeMap<VertexAddr, usize>,
}

impl Ball {
    pub fn index_of(&self, v: &VertexAddr) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

pub fn enumerate_ball(model: &GraphModel, n: usize) -> Result<Ball> {
    enumerate_ball_with_cap(model, n, DEFAULT_BALL_CAP)
}

pub fn enumerate_ball_with_cap(model: &GraphModel, n: usize, cap: usize) -> Result<Ball> {
    model.validate()?;
    let count = sphere_sizes(model, n).iter().fold(0u128, |a, &b| a.saturating_add(b));
    if count > cap as u128 {
        return Err(Error::BallTooLarge { radius: n, count, cap });
    }
    let mut vertices = vec![VertexAddr::root()];
    let mut sizes = vec![1usize];
    let mut start = 0;
    for _ in 1..=n {
        let end = vertices.len();
        for i in start..end {
            let children: Vec<VertexAddr> = neighbors_unchecked(model, &vertices[i])
                .into_iter()
                .filter(|nb| nb.delta == LevelDelta::Up)
                .map(|nb| nb.vertex)
                .collect();
            vertices.extend(children);
        }
        sizes.push(vertices.len() - end);
        start = end;
    }
    let index: BTreeMap<VertexAddr, usize> = vertices.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
    let adjacency = vertices
        .iter()
        .map(|v| {
            neighbors_unchecked(model, v)
                .into_iter()
                .filter_map(|nb| index.get(&nb.vertex).map(|&j| (j, nb.delta)))
                .collect()
        })
        .collect();
    Ok(Ball { radius: n, vertices, adjacency, sphere_sizes: sizes, index })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3k2() -> GraphModel {
        GraphModel::free_product([2, 1]).unwrap()
    }

    #[test]
    fn validation() {
        assert!(GraphModel::tree(4).is_ok());
        assert!(matches!(GraphModel::tree(1), Err(Error::InvalidModel(_))));
        assert!(matches!(GraphModel::free_product([3]), Err(Error::InvalidModel(_))));
        assert!(matches!(GraphModel::free_product([2, 0]), Err(Error::InvalidModel(_))));
        let line = GraphModel::free_product([1, 1]).unwrap();
        assert!(line.is_degenerate_line());
        assert!(matches!(line.two_complete(), Err(Error::HypothesisViolated(_))));
        assert_eq!(k3k2().two_complete().unwrap(), (2, 1));
    }

    #[test]
    fn parse_and_display() {
        let t: GraphModel = "tree:d=4".parse().unwrap();
        assert_eq!(t, GraphModel::RegularTree { d: 4 });
        let f: GraphModel = "free:2,1".parse().unwrap();
        assert_eq!(f, k3k2());
        assert_eq!(f.to_string(), "free:2,1");
        assert_eq!(t.to_string(), "tree:d=4");
        for bad in ["tree:4", "free:", "free:2,x", "cycle:3", "tree:d=1", "free:2"] {
            assert!(matches!(bad.parse::<GraphModel>(), Err(Error::InvalidModel(_))), "{bad}");
        }
    }

    #[test]
    fn degrees_at_root_and_levels() {
        let t4 = GraphModel::tree(4).unwrap();
        let root = VertexAddr::root();
        assert_eq!(level_degrees(&t4, &root).unwrap(), LevelDegrees { d_v: 4, d_minus: 0, d_zero: 0, d_plus: 4 });
        let a1 = VertexAddr::from_letters([Letter::new(1, 1)]);
        assert_eq!(level_degrees(&k3k2(), &a1).unwrap(), LevelDegrees { d_v: 3, d_minus: 1, d_zero: 1, d_plus: 1 });
        let b1 = VertexAddr::from_letters([Letter::new(2, 1)]);
        assert_eq!(level_degrees(&k3k2(), &b1).unwrap(), LevelDegrees { d_v: 3, d_minus: 1, d_zero: 0, d_plus: 2 });
    }

    #[test]
    fn invalid_vertices() {
        let bad = VertexAddr::from_letters([Letter::new(1, 1), Letter::new(1, 2)]);
        assert!(matches!(neighbors(&k3k2(), &bad), Err(Error::InvalidVertex(_))));
        let bad = VertexAddr::from_letters([Letter::new(2, 2)]);
        assert!(matches!(level_degrees(&k3k2(), &bad), Err(Error::InvalidVertex(_))));
        let t4 = GraphModel::tree(4).unwrap();
        let ok = VertexAddr::from_letters([Letter::new(1, 4)]);
        assert!(check_vertex(&t4, &ok).is_ok());
        let bad = VertexAddr::from_letters([Letter::new(1, 4), Letter::new(1, 4)]);
        assert!(check_vertex(&t4, &bad).is_err());
    }

    #[test]
    fn neighbor_lists() {
        let t4 = GraphModel::tree(4).unwrap();
        let nb = neighbors(&t4, &VertexAddr::root()).unwrap();
        assert_eq!(nb.len(), 4);
        assert!(nb.iter().all(|n| n.delta == LevelDelta::Up));

        let a1 = VertexAddr::from_letters([Letter::new(1, 1)]);
        let nb = neighbors(&k3k2(), &a1).unwrap();
        let expect = [
            (VertexAddr::root(), LevelDelta::Down),
            (VertexAddr::from_letters([Letter::new(1, 2)]), LevelDelta::Lateral),
            (a1.with(Letter::new(2, 1)), LevelDelta::Up),
        ];
        assert_eq!(nb.len(), expect.len());
        for (n, (v, d)) in nb.iter().zip(expect.iter()) {
            assert_eq!((&n.vertex, n.delta), (v, *d));
        }
    }

    #[test]
    fn ball_sizes() {
        let ball = enumerate_ball(&k3k2(), 2).unwrap();
        assert_eq!(ball.sphere_sizes, vec![1, 3, 4]);
        let t = GraphModel::tree(5).unwrap();
        let ball = enumerate_ball(&t, 2).unwrap();
        assert_eq!(ball.sphere_sizes[2], 5 * 4);
        assert_eq!(sphere_sizes(&k3k2(), 4), vec![1, 3, 4, 6, 8]);
    }

    #[test]
    fn ball_cap_is_an_error() {
        let t4 = GraphModel::tree(4).unwrap();
        assert!(matches!(enumerate_ball(&t4, 12), Err(Error::BallTooLarge { .. })));
        assert!(matches!(enumerate_ball_with_cap(&t4, 3, 10), Err(Error::BallTooLarge { count: 53, .. })));
    }

    #[test]
    fn ball_adjacency_is_consistent() {
        for model in [GraphModel::tree(3).unwrap(), k3k2(), GraphModel::free_product([2, 2, 1]).unwrap()] {
            let ball = enumerate_ball(&model, 5).unwrap();
            for (i, v) in ball.vertices.iter().enumerate() {
                check_vertex(&model, v).unwrap();
                for &(j, delta) in &ball.adjacency[i] {
                    assert!(ball.adjacency[j].iter().any(|&(k, _)| k == i), "asymmetric");
                    let diff = ball.vertices[j].level() as i32 - v.level() as i32;
                    assert_eq!(diff, delta.as_i32());
                }
                if v.level() < ball.radius {
                    let deg = level_degrees(&model, v).unwrap();
                    let count = |d: LevelDelta| ball.adjacency[i].iter().filter(|&&(_, x)| x == d).count() as u32;
                    assert_eq!(count(LevelDelta::Down), deg.d_minus);
                    assert_eq!(count(LevelDelta::Lateral), deg.d_zero);
                    assert_eq!(count(LevelDelta::Up), deg.d_plus);
                }
            }
        }
    }

    #[test]
    fn sphere_growth_for_k3_k2() {
        let sizes = sphere_sizes(&k3k2(), 80);
        for n in 2..78 {
            assert_eq!(sizes[n + 2], 2 * sizes[n]);
        }
        // M_{2k} = 2^{k+1}, so (log M_n)/n - log sqrt 2 = log 2 / n.
        let gap = |n: usize| libm::log(sizes[n] as f64) / n as f64 - 0.5 * core::f64::consts::LN_2;
        assert!(gap(70) < 0.01);
        assert!(gap(20) > 0.03);
        let logs = log_sphere_type_counts(&k3k2(), 30);
        for (k, row) in logs.iter().enumerate() {
            let total = row.iter().fold(f64::NEG_INFINITY, |a, &b| log_add(a, b));
            assert!((libm::exp(total) - sizes[k] as f64).abs() < 1e-6 * sizes[k] as f64);
        }
    }
}
