//! THeLMa temporal random graphs: a Chung-Lu base with per-step density
//! multipliers and temporally correlated evolution.
//!
//! Parameters are a weight vector `w` (expected-degree scale), per-step
//! multipliers `tau_t > 0`, and a masking probability `alpha`. The first
//! graph samples each pair `{u,v}` with probability
//! `min(1, tau_1 w_u w_v / rho)` where `rho = sum(w)`. At each later step a
//! pair is *masked* independently with probability `alpha`; masked pairs are
//! resampled with the step-`t` probability while unmasked pairs carry their
//! edge state forward:
//!
//! ```text
//! P({u,v} in G_{t+1}) = 1 - alpha + alpha * min(1, tau_{t+1} w_u w_v / rho)   if {u,v} in G_t
//!                     =             alpha * min(1, tau_{t+1} w_u w_v / rho)   otherwise
//! ```
//!
//! `alpha = 0` freezes the first graph; `alpha = 1` resamples every step
//! independently. Every decision is keyed by `(seed, step, pair)`, so
//! generation is order independent and bit-reproducible.

use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::TemporalGraphSequence;
use crate::graph::Graph;
use crate::rng;

const SALT_MASK: u64 = 0x6d61_736b; // "mask"
const SALT_EDGE: u64 = 0x6564_6765; // "edge"

#[derive(Debug, Error)]
pub enum ThelmaError {
    #[error("weight vector must have positive sum")]
    ZeroWeight,
    #[error("alpha {0} outside [0, 1]")]
    BadAlpha(f64),
    #[error("tau[{0}] must be positive")]
    BadTau(usize),
    #[error("weights must be non-negative (w[{0}] < 0)")]
    NegativeWeight(usize),
    #[error("need at least one timestep")]
    NoSteps,
    #[error("timestep {t} outside 1..={steps}")]
    StepOutOfRange { t: usize, steps: usize },
    #[error("self-pair ({0}, {0}) has no edge probability")]
    SelfPair(usize),
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("empty snapshot sequence")]
    EmptySequence,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad sequence directory: {0}")]
    BadSequenceDir(String),
}

/// Generator parameters; `rho = sum(w)` is cached at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThelmaParams {
    w: Vec<f64>,
    tau: Vec<f64>,
    alpha: f64,
    rho: f64,
}

impl ThelmaParams {
    pub fn new(w: Vec<f64>, tau: Vec<f64>, alpha: f64) -> Result<ThelmaParams, ThelmaError> {
        if tau.is_empty() {
            return Err(ThelmaError::NoSteps);
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(ThelmaError::BadAlpha(alpha));
        }
        if let Some(i) = w.iter().position(|&x| x < 0.0 || !x.is_finite()) {
            return Err(ThelmaError::NegativeWeight(i));
        }
        if let Some(i) = tau.iter().position(|&x| x <= 0.0 || !x.is_finite()) {
            return Err(ThelmaError::BadTau(i));
        }
        let rho: f64 = w.iter().sum();
        if rho <= 0.0 {
            return Err(ThelmaError::ZeroWeight);
        }
        Ok(ThelmaParams { w, tau, alpha, rho })
    }

    pub fn vertex_count(&self) -> usize {
        self.w.len()
    }

    pub fn steps(&self) -> usize {
        self.tau.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// Clamped Chung-Lu pair probability `min(1, tau_t w_u w_v / rho)` at
/// 1-based step `t`.
pub fn edge_probability(
    params: &ThelmaParams,
    u: usize,
    v: usize,
    t: usize,
) -> Result<f64, ThelmaError> {
    let n = params.vertex_count();
    if u == v {
        return Err(ThelmaError::SelfPair(u));
    }
    if u >= n || v >= n {
        return Err(ThelmaError::VertexOutOfRange(u.max(v)));
    }
    if t == 0 || t > params.steps() {
        return Err(ThelmaError::StepOutOfRange {
            t,
            steps: params.steps(),
        });
    }
    Ok(clamped(params, u, v, t))
}

fn clamped(params: &ThelmaParams, u: usize, v: usize, t: usize) -> f64 {
    (params.tau[t - 1] * params.w[u] * params.w[v] / params.rho).min(1.0)
}

/// Closed-form marginal presence probability of a pair at step `t`,
/// accumulated with the same per-term clamping the generator applies:
/// `m_1 = p_1`, `m_t = (1 - alpha) m_{t-1} + alpha p_t`.
pub fn marginal_edge_probability(
    params: &ThelmaParams,
    u: usize,
    v: usize,
    t: usize,
) -> Result<f64, ThelmaError> {
    let mut m = edge_probability(params, u, v, 1)?;
    if t == 0 || t > params.steps() {
        return Err(ThelmaError::StepOutOfRange {
            t,
            steps: params.steps(),
        });
    }
    for i in 2..=t {
        m = (1.0 - params.alpha) * m + params.alpha * clamped(params, u, v, i);
    }
    Ok(m)
}

/// Pure per-pair step decision: given the pair's edge state at `t-1`,
/// whether it is an edge at 1-based step `t`. Shared by the generator and
/// its test oracle, keyed entirely by `(seed, t, u, v)`.
pub(crate) fn pair_step(
    params: &ThelmaParams,
    seed: u64,
    t: usize,
    u: usize,
    v: usize,
    was_edge: bool,
) -> bool {
    let (a, b) = (u.min(v) as u64, u.max(v) as u64);
    if t == 1 {
        return rng::uniform(seed, &[SALT_EDGE, 1, a, b]) < clamped(params, u, v, 1);
    }
    if rng::uniform(seed, &[SALT_MASK, t as u64, a, b]) < params.alpha {
        rng::uniform(seed, &[SALT_EDGE, t as u64, a, b]) < clamped(params, u, v, t)
    } else {
        was_edge
    }
}

/// Generates the full sequence `G_1, ..., G_T`. All `n` vertices are present
/// in every step (isolated ones included), labeled by their decimal index;
/// window starts are the step numbers `1..=T`.
pub fn generate(params: &ThelmaParams, seed: u64) -> TemporalGraphSequence {
    use rayon::prelude::*;
    let n = params.vertex_count();
    let t_total = params.steps();
    let mut graphs: Vec<Graph> = Vec::with_capacity(t_total);

    // First step: straight clamped Chung-Lu scan.
    let first_edges: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|u| {
            let params = &params;
            ((u + 1)..n)
                .filter(move |&v| {
                    params.w[u] > 0.0
                        && params.w[v] > 0.0
                        && pair_step(params, seed, 1, u, v, false)
                })
                .map(move |v| (u, v))
        })
        .collect();
    graphs.push(Graph::from_index_edges(n, &first_edges));

    for t in 2..=t_total {
        let prev = graphs.last().unwrap();
        // Surviving previous edges.
        let mut edges: Vec<(usize, usize)> = prev
            .edges()
            .filter(|&(u, v)| pair_step(params, seed, t, u, v, true))
            .collect();
        // Newly masked-in pairs; the mask test runs first so only ~alpha of
        // the pair scan ever computes an edge draw.
        let additions: Vec<(usize, usize)> = (0..n)
            .into_par_iter()
            .flat_map_iter(|u| {
                let prev = &*prev;
                let params = &params;
                ((u + 1)..n)
                    .filter(move |&v| {
                        params.w[u] > 0.0
                            && params.w[v] > 0.0
                            && !prev.has_edge(u, v)
                            && pair_step(params, seed, t, u, v, false)
                    })
                    .map(move |v| (u, v))
            })
            .collect();
        edges.extend(additions);
        graphs.push(Graph::from_index_edges(n, &edges));
    }

    TemporalGraphSequence::new((1..=t_total as u64).collect(), graphs)
}

/// Estimates the weight vector from snapshots: per label, the ceiling of
/// its mean degree across all snapshots, counting absence as degree 0.
/// Labels are returned in first-seen order.
pub fn estimate_weights(seq: &TemporalGraphSequence) -> Result<Vec<(String, f64)>, ThelmaError> {
    if seq.is_empty() {
        return Err(ThelmaError::EmptySequence);
    }
    let universe = seq.label_universe();
    let snapshots = seq.len() as f64;
    Ok(universe
        .into_iter()
        .map(|label| {
            let total: usize = seq
                .iter()
                .map(|(_, g)| g.index_of(&label).map(|v| g.degree(v)).unwrap_or(0))
                .sum();
            let w = (total as f64 / snapshots).ceil();
            (label, w)
        })
        .collect())
}

/// Integer weights sampled from the truncated discrete power law
/// `P(w) proportional to w^-exponent` on `{1, ..., max_weight}`,
/// deterministic in the seed. A common degree profile for flow graphs:
/// mostly weight-1 leaves with a thin heavy tail.
pub fn power_law_weights(n: usize, exponent: f64, max_weight: usize, seed: u64) -> Vec<f64> {
    assert!(max_weight >= 1);
    let mut cdf = Vec::with_capacity(max_weight);
    let mut acc = 0.0;
    for w in 1..=max_weight {
        acc += (w as f64).powf(-exponent);
        cdf.push(acc);
    }
    let total = acc;
    (0..n)
        .map(|i| {
            let u = rng::uniform(seed, &[0x7765_6967, i as u64]) * total; // "weig"
            let idx = cdf.partition_point(|&c| c < u);
            (idx.min(max_weight - 1) + 1) as f64
        })
        .collect()
}

/// `T` equally spaced evaluations of `(3 - cos(x)) / 2` over
/// `[0, cycles * 2 pi]`, endpoints included: a smooth day/night density
/// profile ranging over `[1, 2]`.
pub fn circadian_tau(t: usize, cycles: f64) -> Vec<f64> {
    assert!(t >= 2, "need at least two evaluation points");
    let span = cycles * 2.0 * std::f64::consts::PI;
    (0..t)
        .map(|i| {
            let x = span * i as f64 / (t - 1) as f64;
            (3.0 - x.cos()) / 2.0
        })
        .collect()
}

/// On-disk manifest for a generated sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceManifest {
    pub params: ThelmaParams,
    pub seed: u64,
    pub starts: Vec<u64>,
}

/// Writes a sequence as `sequence.json` (params, seed, window starts) plus
/// one edge-list file per step (`step_00001.edges`, ...).
pub fn write_sequence(
    dir: impl AsRef<Path>,
    seq: &TemporalGraphSequence,
    params: &ThelmaParams,
    seed: u64,
) -> Result<(), ThelmaError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let manifest = SequenceManifest {
        params: params.clone(),
        seed,
        starts: (0..seq.len()).map(|i| seq.start(i)).collect(),
    };
    let mut f = std::fs::File::create(dir.join("sequence.json"))?;
    serde_json::to_writer_pretty(&mut f, &manifest).map_err(std::io::Error::other)?;
    writeln!(f)?;
    for (i, (_, g)) in seq.iter().enumerate() {
        let mut f = std::fs::File::create(dir.join(format!("step_{:05}.edges", i + 1)))?;
        g.write_edge_list(&mut f)?;
    }
    Ok(())
}

/// Reads a sequence written by [`write_sequence`]. Vertices absent from a
/// step's edge list are restored as isolated vertices, so every step has the
/// manifest's full vertex count.
pub fn read_sequence(
    dir: impl AsRef<Path>,
) -> Result<(TemporalGraphSequence, SequenceManifest), ThelmaError> {
    let dir = dir.as_ref();
    let manifest: SequenceManifest =
        serde_json::from_reader(std::fs::File::open(dir.join("sequence.json"))?)
            .map_err(|e| ThelmaError::BadSequenceDir(format!("sequence.json: {e}")))?;
    let n = manifest.params.vertex_count();
    let mut graphs = Vec::with_capacity(manifest.starts.len());
    for i in 0..manifest.starts.len() {
        let path = dir.join(format!("step_{:05}.edges", i + 1));
        let text = std::fs::read_to_string(&path)?;
        let mut pairs = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(a), Some(b)) = (it.next(), it.next()) else {
                return Err(ThelmaError::BadSequenceDir(format!(
                    "{}: bad line",
                    path.display()
                )));
            };
            let u: usize = a.parse().map_err(|_| {
                ThelmaError::BadSequenceDir(format!("{}: bad vertex {a}", path.display()))
            })?;
            let v: usize = b.parse().map_err(|_| {
                ThelmaError::BadSequenceDir(format!("{}: bad vertex {b}", path.display()))
            })?;
            if u >= n || v >= n {
                return Err(ThelmaError::BadSequenceDir(format!(
                    "{}: vertex out of range",
                    path.display()
                )));
            }
            pairs.push((u, v));
        }
        graphs.push(Graph::from_index_edges(n, &pairs));
    }
    Ok((
        TemporalGraphSequence::new(manifest.starts.clone(), graphs),
        manifest,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_params(n: usize, t: usize, alpha: f64) -> ThelmaParams {
        ThelmaParams::new(vec![1.0; n], vec![1.0; t], alpha).unwrap()
    }

    #[test]
    fn edge_probability_formula() {
        let p = ThelmaParams::new(vec![1.0; 10], vec![1.0], 0.5).unwrap();
        assert!((edge_probability(&p, 0, 1, 1).unwrap() - 0.1).abs() < 1e-15);

        let p = ThelmaParams::new(vec![3.0, 2.0], vec![2.5], 0.5).unwrap();
        // 2.5 * 3 * 2 / 5 = 3 -> clamped to 1
        assert_eq!(edge_probability(&p, 0, 1, 1).unwrap(), 1.0);

        let p = ThelmaParams::new(vec![0.0, 1.0, 1.0], vec![1.0], 0.5).unwrap();
        assert_eq!(edge_probability(&p, 0, 1, 1).unwrap(), 0.0);

        assert!(matches!(
            edge_probability(&p, 1, 1, 1),
            Err(ThelmaError::SelfPair(1))
        ));
    }

    #[test]
    fn params_validation() {
        assert!(matches!(
            ThelmaParams::new(vec![0.0], vec![1.0], 0.5),
            Err(ThelmaError::ZeroWeight)
        ));
        assert!(matches!(
            ThelmaParams::new(vec![1.0], vec![1.0], 1.5),
            Err(ThelmaError::BadAlpha(_))
        ));
        assert!(matches!(
            ThelmaParams::new(vec![1.0], vec![0.0], 0.5),
            Err(ThelmaError::BadTau(0))
        ));
        assert!(matches!(
            ThelmaParams::new(vec![1.0], vec![], 0.5),
            Err(ThelmaError::NoSteps)
        ));
    }

    #[test]
    fn alpha_zero_freezes_sequence() {
        let p = uniform_params(12, 6, 0.0);
        let seq = generate(&p, 7);
        for i in 1..seq.len() {
            assert_eq!(seq.graph(i), seq.graph(0));
        }
    }

    #[test]
    fn alpha_one_matches_independent_sampling() {
        // with alpha = 1 every pair at every step is an independent draw
        // with the step's own probability; check that the step function
        // ignores the previous state
        let p = uniform_params(8, 4, 1.0);
        for t in 2..=4 {
            for u in 0..8 {
                for v in (u + 1)..8 {
                    assert_eq!(
                        pair_step(&p, 3, t, u, v, true),
                        pair_step(&p, 3, t, u, v, false)
                    );
                }
            }
        }
    }

    #[test]
    fn generate_is_deterministic() {
        let p = ThelmaParams::new(vec![1.0, 1.0, 1.0], vec![1.0; 5], 0.5).unwrap();
        let a = generate(&p, 99);
        let b = generate(&p, 99);
        for i in 0..a.len() {
            assert_eq!(a.graph(i), b.graph(i));
        }
        let c = generate(&p, 100);
        let differs = (0..a.len()).any(|i| a.graph(i) != c.graph(i));
        assert!(differs, "different seeds should give different sequences");
    }

    #[test]
    fn generate_matches_naive_oracle() {
        // re-derive every step pair-by-pair from the pure step function
        let p = ThelmaParams::new(vec![2.0, 1.0, 1.0, 0.5, 1.5], vec![1.0, 1.3, 0.7, 1.0], 0.4)
            .unwrap();
        let seed = 1234;
        let seq = generate(&p, seed);
        let n = p.vertex_count();
        let mut state = vec![vec![false; n]; n];
        for t in 1..=p.steps() {
            for u in 0..n {
                for v in (u + 1)..n {
                    state[u][v] = pair_step(&p, seed, t, u, v, state[u][v]);
                }
            }
            let g = seq.graph(t - 1);
            for u in 0..n {
                for v in (u + 1)..n {
                    assert_eq!(g.has_edge(u, v), state[u][v], "t={t} pair=({u},{v})");
                }
            }
        }
    }

    #[test]
    fn marginal_base_cases() {
        let p = ThelmaParams::new(vec![1.0; 6], vec![1.0, 2.0, 0.5, 1.0], 0.0).unwrap();
        for t in 1..=4 {
            let m = marginal_edge_probability(&p, 0, 1, t).unwrap();
            assert!((m - edge_probability(&p, 0, 1, 1).unwrap()).abs() < 1e-15);
        }
        let p = ThelmaParams::new(vec![1.0; 6], vec![1.0, 2.0, 0.5, 1.0], 1.0).unwrap();
        for t in 1..=4 {
            let m = marginal_edge_probability(&p, 0, 1, t).unwrap();
            assert!((m - edge_probability(&p, 0, 1, t).unwrap()).abs() < 1e-15);
        }
        let p = ThelmaParams::new(vec![1.0; 6], vec![1.0, 2.0], 0.3).unwrap();
        let m1 = marginal_edge_probability(&p, 0, 1, 1).unwrap();
        assert!((m1 - edge_probability(&p, 0, 1, 1).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn estimate_weights_rules() {
        let g1 = Graph::from_edge_list([("a", "b")]); // degrees a=1 b=1
        let g2 = Graph::from_edge_list([("a", "b"), ("a", "c")]); // a=2 b=1 c=1
        let g3 = Graph::from_edge_list([("a", "b"), ("a", "c"), ("a", "d")]); // a=3
        let seq = TemporalGraphSequence::new(vec![1, 2, 3], vec![g1, g2, g3]);
        let w = estimate_weights(&seq).unwrap();
        let get = |l: &str| w.iter().find(|(x, _)| x == l).unwrap().1;
        assert_eq!(get("a"), 2.0, "ceil(mean(1,2,3))");
        assert_eq!(get("b"), 1.0);
        assert_eq!(get("c"), 1.0, "ceil(mean(0,1,1)) = ceil(2/3)");
        assert_eq!(get("d"), 1.0, "ceil(mean(0,0,1))");
    }

    #[test]
    fn estimate_weights_empty_errors() {
        let seq = TemporalGraphSequence::new(vec![], vec![]);
        assert!(matches!(
            estimate_weights(&seq),
            Err(ThelmaError::EmptySequence)
        ));
    }

    #[test]
    fn power_law_weights_shape() {
        let w = power_law_weights(4000, 2.18, 10, 5);
        assert!(w.iter().all(|&x| (1.0..=10.0).contains(&x)));
        let ones = w.iter().filter(|&&x| x == 1.0).count() as f64 / w.len() as f64;
        // P(w = 1) = 1 / sum(w^-2.18) ~ 0.65 for this truncation
        assert!((ones - 0.65).abs() < 0.05, "P(w=1) ~ {ones}");
        assert_eq!(w, power_law_weights(4000, 2.18, 10, 5));
        assert_ne!(w, power_law_weights(4000, 2.18, 10, 6));
    }

    #[test]
    fn circadian_tau_shape() {
        let tau = circadian_tau(500, 2.0);
        assert_eq!(tau.len(), 500);
        assert!((tau[0] - 1.0).abs() < 1e-15);
        let min = tau.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = tau.iter().cloned().fold(0.0f64, f64::max);
        assert!((min - 1.0).abs() < 1e-12);
        assert!(
            (max - 2.0).abs() < 1e-4,
            "sampled max within grid resolution"
        );

        let two = circadian_tau(2, 1.0);
        assert!((two[0] - 1.0).abs() < 1e-15);
        assert!((two[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sequence_roundtrip_on_disk() {
        let p = ThelmaParams::new(vec![1.0; 6], vec![1.0, 1.5, 0.8], 0.5).unwrap();
        let seq = generate(&p, 5);
        let dir = tempfile::tempdir().unwrap();
        write_sequence(dir.path(), &seq, &p, 5).unwrap();
        let (back, manifest) = read_sequence(dir.path()).unwrap();
        assert_eq!(manifest.seed, 5);
        assert_eq!(manifest.params, p);
        assert_eq!(back.len(), seq.len());
        for i in 0..seq.len() {
            assert_eq!(back.graph(i), seq.graph(i), "step {i}");
        }
    }

    #[test]
    fn alpha_one_degree_scaling() {
        // With full resampling the mean degree of v at step t matches the
        // exact pair-sum expectation sum_u min(1, tau_t w_v w_u / rho),
        // which is tau_t * w_v up to the self-exclusion correction.
        let w = vec![1.0, 2.0, 1.0, 1.0, 3.0, 1.0, 1.0, 2.0, 1.0, 1.0];
        let p = ThelmaParams::new(w.clone(), vec![0.8, 1.6], 1.0).unwrap();
        let trials = 4000u64;
        let n = p.vertex_count();
        let mut degree_sums = vec![vec![0usize; n]; p.steps()];
        for trial in 0..trials {
            let seq = generate(&p, rng::mix(11, &[trial]));
            for t in 0..p.steps() {
                for v in 0..n {
                    degree_sums[t][v] += seq.graph(t).degree(v);
                }
            }
        }
        for t in 1..=p.steps() {
            for v in 0..n {
                let expect: f64 = (0..n)
                    .filter(|&u| u != v)
                    .map(|u| edge_probability(&p, u, v, t).unwrap())
                    .sum();
                let got = degree_sums[t - 1][v] as f64 / trials as f64;
                // variance of the degree is the sum of Bernoulli variances
                let var: f64 = (0..n)
                    .filter(|&u| u != v)
                    .map(|u| {
                        let q = edge_probability(&p, u, v, t).unwrap();
                        q * (1.0 - q)
                    })
                    .sum();
                let se = (var / trials as f64).sqrt();
                assert!(
                    (got - expect).abs() <= 4.0 * se.max(1e-9),
                    "t={t} v={v}: got {got}, want {expect}"
                );
            }
        }
    }

    #[test]
    fn monte_carlo_marginal_small() {
        // light version of the acceptance check: n = 6, T = 4, 4000 trials
        let p = ThelmaParams::new(vec![1.0; 6], vec![1.0, 1.4, 0.6, 1.0], 0.25).unwrap();
        let trials = 4000;
        let t_check = 4;
        let mut present = vec![0usize; 6 * 6];
        for trial in 0..trials {
            let seed = rng::mix(777, &[trial as u64]);
            let mut state = [false; 6 * 6];
            for t in 1..=t_check {
                for u in 0..6 {
                    for v in (u + 1)..6 {
                        state[u * 6 + v] = pair_step(&p, seed, t, u, v, state[u * 6 + v]);
                    }
                }
            }
            for i in 0..36 {
                present[i] += usize::from(state[i]);
            }
        }
        for u in 0..6 {
            for v in (u + 1)..6 {
                let want = marginal_edge_probability(&p, u, v, t_check).unwrap();
                let got = present[u * 6 + v] as f64 / trials as f64;
                let se = (want * (1.0 - want) / trials as f64).sqrt().max(1e-9);
                assert!(
                    (got - want).abs() <= 4.0 * se,
                    "pair ({u},{v}): got {got}, want {want}, se {se}"
                );
            }
        }
    }
}
