//! Anomaly-injection experiments.
//!
//! Three experiment families, all seeded and bit-reproducible:
//!
//! * **Ordered injection** grows a star or clique over the least-important
//!   vertices of a static graph and tracks how the participants' percentile
//!   rises with the anomaly size.
//! * **Random star injection** connects a random root to a random `k%`
//!   vertex subset, many trials, and reports mean score/percentile before
//!   and after.
//! * **Temporal injection** plants one fixed star into every step of an
//!   evolving graph sequence and compares each anomaly vertex against its
//!   *cohort*: vertices whose percentile at the previous step was within a
//!   small width of its own, and that are still scored at the current step.
//!   Reported gaps are percentile differences, with-vs-without the anomaly
//!   and vs the previous step.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::centrality::{percentile_of_value, CentralityError, Measure, ScoreTable};
use crate::flow::TemporalGraphSequence;
use crate::graph::{Graph, GraphError, VertexId};
use crate::rng;

const SALT_RANDOM_STAR: u64 = 0x7261_6e64; // "rand"
const SALT_CORE_PICK: u64 = 0x636f_7265; // "core"

/// Cohort half-width in percentile points.
pub const DEFAULT_COHORT_WIDTH: f64 = 2.5;

#[derive(Debug, Error)]
pub enum AnomalyError {
    #[error("anomaly size {size} out of range 2..={max}")]
    SizeOutOfRange { size: usize, max: usize },
    #[error("k = {0}% of {1} vertices rounds to zero edges")]
    KTooSmall(f64, usize),
    #[error("need at least one trial")]
    NoTrials,
    #[error("empty snapshot sequence")]
    EmptySequence,
    #[error("only {candidates} core candidates for {needed} anomaly vertices")]
    NotEnoughCandidates { candidates: usize, needed: usize },
    #[error("vertex {0:?} not scored at the reference step")]
    NotScored(String),
    #[error(transparent)]
    Centrality(#[from] CentralityError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Injected pattern shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnomalyKind {
    Star,
    Clique,
}

/// One point of the ordered-injection curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderedInjectionRow {
    /// Total vertices in the anomaly (root plus leaves for a star).
    pub size: usize,
    /// Percentile of the star root after injection (`None` for cliques,
    /// which have no distinguished vertex).
    pub root_percentile: Option<f64>,
    /// Percentile of the participants' mean score after injection; scores
    /// are averaged before the percentile lookup.
    pub participant_percentile: f64,
}

/// Ordered low-importance injection: rank vertices by importance in the
/// base graph (ascending, ties by index), then for each requested size
/// build the anomaly over the least important vertices, rescore, and report
/// percentiles. Star participants are the leaves; clique participants are
/// all members.
pub fn inject_ordered(
    g: &Graph,
    measure: &Measure,
    kind: AnomalyKind,
    sizes: &[usize],
) -> Result<Vec<OrderedInjectionRow>, AnomalyError> {
    let n = g.vertex_count();
    for &size in sizes {
        if size < 2 || size > n {
            return Err(AnomalyError::SizeOutOfRange { size, max: n });
        }
    }
    let base = measure.score(g)?;
    let mut order: Vec<VertexId> = (0..n).collect();
    order.sort_by(|&a, &b| base.score(a).total_cmp(&base.score(b)).then(a.cmp(&b)));

    sizes
        .par_iter()
        .map(|&size| {
            let (injected, root, participants): (Graph, Option<VertexId>, &[VertexId]) = match kind
            {
                AnomalyKind::Star => {
                    let root = order[0];
                    let leaves = &order[1..size];
                    (g.add_star(root, leaves)?, Some(root), leaves)
                }
                AnomalyKind::Clique => {
                    let members = &order[..size];
                    (g.add_clique(members)?, None, members)
                }
            };
            let table = measure.score(&injected)?;
            let mean_score: f64 = participants.iter().map(|&v| table.score(v)).sum::<f64>()
                / participants.len() as f64;
            Ok(OrderedInjectionRow {
                size,
                root_percentile: root.map(|r| table.percentile(r)),
                participant_percentile: percentile_of_value(table.scores(), mean_score),
            })
        })
        .collect()
}

/// Every size from 2 through `max_size`.
pub fn inject_ordered_up_to(
    g: &Graph,
    measure: &Measure,
    kind: AnomalyKind,
    max_size: usize,
) -> Result<Vec<OrderedInjectionRow>, AnomalyError> {
    let sizes: Vec<usize> = (2..=max_size).collect();
    inject_ordered(g, measure, kind, &sizes)
}

/// Mean before/after row for one `k%` level of the random-star experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub k_percent: f64,
    /// Star edges drawn per trial: `k% of n`, rounded half-up.
    pub edges: usize,
    pub before_score: f64,
    pub before_percentile: f64,
    pub after_score: f64,
    pub after_percentile: f64,
    pub score_change: f64,
    pub percentile_change: f64,
}

/// Aggregated random-star experiment results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub measure: String,
    pub trials: usize,
    pub rows: Vec<TrialRow>,
}

impl TrialSummary {
    pub fn write_csv(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(
            out,
            "measure,k_percent,edges,trials,before_score,before_percentile,after_score,after_percentile,score_change,percentile_change"
        )?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                self.measure,
                crate::centrality::fmt_float(r.k_percent),
                r.edges,
                self.trials,
                crate::centrality::fmt_float(r.before_score),
                crate::centrality::fmt_float(r.before_percentile),
                crate::centrality::fmt_float(r.after_score),
                crate::centrality::fmt_float(r.after_percentile),
                crate::centrality::fmt_float(r.score_change),
                crate::centrality::fmt_float(r.percentile_change),
            )?;
        }
        Ok(())
    }
}

/// Random star injection: per trial, pick a root `v` uniformly, pick a
/// subset `S` of the remaining vertices with `k%` of the graph's vertex
/// count (rounded half-up), connect `v` to every vertex of `S` it is not
/// already adjacent to, and rescore. Reports per-`k` means over all trials.
pub fn inject_random_star(
    g: &Graph,
    measure: &Measure,
    k_percents: &[f64],
    trials: usize,
    seed: u64,
) -> Result<TrialSummary, AnomalyError> {
    let n = g.vertex_count();
    if trials == 0 {
        return Err(AnomalyError::NoTrials);
    }
    let mut edge_counts = Vec::with_capacity(k_percents.len());
    for &k in k_percents {
        let count = (k * n as f64 / 100.0 + 0.5).floor() as usize;
        if count < 1 {
            return Err(AnomalyError::KTooSmall(k, n));
        }
        edge_counts.push(count.min(n - 1));
    }
    let before = measure.score(g)?;

    let jobs: Vec<(usize, usize)> = (0..k_percents.len())
        .flat_map(|ki| (0..trials).map(move |t| (ki, t)))
        .collect();
    let outcomes: Vec<Result<(usize, [f64; 4]), AnomalyError>> = jobs
        .par_iter()
        .map(|&(ki, trial)| {
            let mut r = rng::stream(seed, &[SALT_RANDOM_STAR, ki as u64, trial as u64]);
            let v = r.gen_range(0..n);
            let mut others: Vec<VertexId> = (0..n).filter(|&u| u != v).collect();
            others.shuffle(&mut r);
            others.truncate(edge_counts[ki]);
            let injected = g.add_star(v, &others)?;
            let after = measure.score(&injected)?;
            Ok((
                ki,
                [
                    before.score(v),
                    before.percentile(v),
                    after.score(v),
                    after.percentile(v),
                ],
            ))
        })
        .collect();

    let mut sums = vec![[0.0f64; 4]; k_percents.len()];
    for outcome in outcomes {
        let (ki, vals) = outcome?;
        for (acc, v) in sums[ki].iter_mut().zip(vals) {
            *acc += v;
        }
    }
    let rows = k_percents
        .iter()
        .enumerate()
        .map(|(ki, &k)| {
            let m = sums[ki].map(|x| x / trials as f64);
            TrialRow {
                k_percent: k,
                edges: edge_counts[ki],
                before_score: m[0],
                before_percentile: m[1],
                after_score: m[2],
                after_percentile: m[3],
                score_change: m[2] - m[0],
                percentile_change: m[3] - m[1],
            }
        })
        .collect();
    Ok(TrialSummary {
        measure: measure.name(),
        trials,
        rows,
    })
}

/// A fixed star anomaly selected from the core of a temporal sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreAnomaly {
    pub root: String,
    pub leaves: Vec<String>,
}

impl CoreAnomaly {
    /// Root first, then leaves.
    pub fn vertices(&self) -> impl Iterator<Item = &String> {
        std::iter::once(&self.root).chain(self.leaves.iter())
    }
}

/// Selects the anomaly vertices for the temporal experiment: candidates are
/// the vertices present in the giant component of *every* step, minus the
/// top 20% by weight (given weights, e.g. the generator's, by label) or by
/// mean degree otherwise. Root and leaves are drawn uniformly without
/// replacement, deterministically in the seed.
pub fn select_core_anomaly(
    seq: &TemporalGraphSequence,
    weights: Option<&[(String, f64)]>,
    leaves: usize,
    seed: u64,
) -> Result<CoreAnomaly, AnomalyError> {
    if seq.is_empty() {
        return Err(AnomalyError::EmptySequence);
    }
    let mut always_giant: Option<HashSet<String>> = None;
    for (_, g) in seq.iter() {
        let step_set: HashSet<String> = if g.vertex_count() == 0 {
            HashSet::new()
        } else {
            let (giant, _) = g.giant_component()?;
            giant.labels().iter().cloned().collect()
        };
        always_giant = Some(match always_giant {
            None => step_set,
            Some(acc) => acc.intersection(&step_set).cloned().collect(),
        });
    }
    let always_giant = always_giant.unwrap_or_default();
    // Deterministic candidate order: the sequence's first-seen label order.
    let mut candidates: Vec<String> = seq
        .label_universe()
        .into_iter()
        .filter(|l| always_giant.contains(l))
        .collect();

    let weight_of: HashMap<&str, f64> = match weights {
        Some(w) => w.iter().map(|(l, x)| (l.as_str(), *x)).collect(),
        None => {
            let snapshots = seq.len() as f64;
            candidates
                .iter()
                .map(|l| {
                    let total: usize = seq
                        .iter()
                        .map(|(_, g)| g.index_of(l).map(|v| g.degree(v)).unwrap_or(0))
                        .sum();
                    (l.as_str(), total as f64 / snapshots)
                })
                .collect::<Vec<_>>()
                .into_iter()
                .map(|(l, w)| {
                    // reborrow as candidate-owned strs
                    (
                        candidates
                            .iter()
                            .find(|c| c.as_str() == l)
                            .unwrap()
                            .as_str(),
                        w,
                    )
                })
                .collect()
        }
    };

    // Trim the heaviest fifth (ties by label for determinism).
    let mut by_weight = candidates.clone();
    by_weight.sort_by(|a, b| {
        let wa = weight_of.get(a.as_str()).copied().unwrap_or(0.0);
        let wb = weight_of.get(b.as_str()).copied().unwrap_or(0.0);
        wb.total_cmp(&wa).then(a.cmp(b))
    });
    let trim = candidates.len() / 5;
    let trimmed: HashSet<&str> = by_weight[..trim].iter().map(|s| s.as_str()).collect();
    candidates.retain(|l| !trimmed.contains(l.as_str()));

    let needed = leaves + 1;
    if candidates.len() < needed {
        return Err(AnomalyError::NotEnoughCandidates {
            candidates: candidates.len(),
            needed,
        });
    }
    let mut r = rng::stream(seed, &[SALT_CORE_PICK]);
    candidates.shuffle(&mut r);
    candidates.truncate(needed);
    let root = candidates.remove(0);
    Ok(CoreAnomaly {
        root,
        leaves: candidates,
    })
}

/// The cohort of `v`: vertices scored at the reference step whose
/// percentile differs from `v`'s by at most `width`, excluding `v` itself,
/// and that have a nonzero score at the following step.
pub fn cohort(
    scores_t: &ScoreTable,
    scores_t1: &ScoreTable,
    v: &str,
    width: f64,
) -> Result<Vec<String>, AnomalyError> {
    let pv = scores_t
        .percentile_of_label(v)
        .ok_or_else(|| AnomalyError::NotScored(v.to_string()))?;
    let next_scores: HashMap<&str, f64> = scores_t1
        .labels()
        .iter()
        .zip(scores_t1.scores())
        .map(|(l, &s)| (l.as_str(), s))
        .collect();
    Ok(scores_t
        .labels()
        .iter()
        .zip(scores_t.percentiles())
        .filter(|(label, &p)| {
            label.as_str() != v
                && (p - pv).abs() <= width
                && next_scores.get(label.as_str()).is_some_and(|&s| s != 0.0)
        })
        .map(|(label, _)| label.clone())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexGroup {
    Root,
    Leaf,
    Cohort,
}

impl VertexGroup {
    pub fn name(&self) -> &'static str {
        match self {
            VertexGroup::Root => "root",
            VertexGroup::Leaf => "leaf",
            VertexGroup::Cohort => "cohort",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapKind {
    /// Percentile with the anomaly minus percentile without, same step.
    WithWithout,
    /// Percentile with the anomaly minus the previous step's percentile.
    PrevStep,
}

impl GapKind {
    pub fn name(&self) -> &'static str {
        match self {
            GapKind::WithWithout => "with_without",
            GapKind::PrevStep => "prev_step",
        }
    }
}

/// One observed percentile gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSample {
    pub step: u64,
    pub measure: String,
    pub group: VertexGroup,
    pub label: String,
    pub kind: GapKind,
    pub gap: f64,
}

/// Empirical CDF of one (measure, group, kind) slice on the fixed grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCurve {
    pub measure: String,
    pub group: VertexGroup,
    pub kind: GapKind,
    pub cdf: Vec<f64>,
}

/// Gap samples plus empirical CDFs on a fixed 201-point grid over
/// `[-100, 100]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub grid: Vec<f64>,
    pub samples: Vec<GapSample>,
    pub cdfs: Vec<GapCurve>,
    /// Mean cohort size per measure name.
    pub mean_cohort_size: Vec<(String, f64)>,
}

impl GapReport {
    pub fn write_samples_csv(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "step,measure,group,label,gap_kind,gap")?;
        for s in &self.samples {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                s.step,
                s.measure,
                s.group.name(),
                crate::centrality::csv_escape(&s.label),
                s.kind.name(),
                crate::centrality::fmt_float(s.gap)
            )?;
        }
        Ok(())
    }

    pub fn write_cdf_csv(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "measure,group,gap_kind,grid,cdf")?;
        for c in &self.cdfs {
            for (x, y) in self.grid.iter().zip(&c.cdf) {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    c.measure,
                    c.group.name(),
                    c.kind.name(),
                    crate::centrality::fmt_float(*x),
                    crate::centrality::fmt_float(*y)
                )?;
            }
        }
        Ok(())
    }

    /// Median gap over the given groups for one measure and gap kind.
    pub fn median_gap(&self, measure: &str, groups: &[VertexGroup], kind: GapKind) -> Option<f64> {
        let mut vals: Vec<f64> = self
            .samples
            .iter()
            .filter(|s| s.measure == measure && s.kind == kind && groups.contains(&s.group))
            .map(|s| s.gap)
            .collect();
        if vals.is_empty() {
            return None;
        }
        vals.sort_by(f64::total_cmp);
        let mid = vals.len() / 2;
        Some(if vals.len() % 2 == 1 {
            vals[mid]
        } else {
            0.5 * (vals[mid - 1] + vals[mid])
        })
    }
}

/// Runs the temporal injection experiment: for each consecutive step pair
/// `(G_t, G_{t+1})`, scores the giant component of `G_{t+1}` with and
/// without the star anomaly and records percentile gaps for the root, the
/// leaves, and each anomaly vertex's cohort (built from `G_t`'s scores).
pub fn temporal_experiment(
    seq: &TemporalGraphSequence,
    anomaly: &CoreAnomaly,
    measures: &[Measure],
    width: f64,
) -> Result<GapReport, AnomalyError> {
    if seq.len() < 2 {
        return Err(AnomalyError::EmptySequence);
    }
    let steps = seq.len();
    let mut samples = Vec::new();
    let mut mean_cohort_size = Vec::new();

    for measure in measures {
        // Giant-component score tables for every step, then injected tables
        // for steps 2..T, all independent solves.
        let base_tables: Vec<ScoreTable> = (0..steps)
            .into_par_iter()
            .map(|i| {
                let (giant, _) = seq.graph(i).giant_component()?;
                Ok(measure.score(&giant)?)
            })
            .collect::<Result<_, AnomalyError>>()?;
        let injected_tables: Vec<ScoreTable> = (1..steps)
            .into_par_iter()
            .map(|i| {
                let g = seq.graph(i);
                let root = g
                    .index_of(&anomaly.root)
                    .expect("anomaly root is present at every step by construction");
                let leaf_ids: Vec<VertexId> = anomaly
                    .leaves
                    .iter()
                    .map(|l| {
                        g.index_of(l)
                            .expect("anomaly leaf is present at every step by construction")
                    })
                    .collect();
                let injected = g.add_star(root, &leaf_ids)?;
                let (giant, _) = injected.giant_component()?;
                Ok(measure.score(&giant)?)
            })
            .collect::<Result<_, AnomalyError>>()?;

        let mut cohort_total = 0usize;
        let mut cohort_calls = 0usize;
        for t in 0..steps - 1 {
            let prev = &base_tables[t];
            let base = &base_tables[t + 1];
            let injected = &injected_tables[t];
            let step = seq.start(t + 1);
            let pct = |table: &ScoreTable, label: &str| -> f64 {
                table.percentile_of_label(label).unwrap_or_else(|| {
                    panic!("anomaly vertex {label:?} left the giant component; impossible by construction")
                })
            };
            for (i, label) in anomaly.vertices().enumerate() {
                let group = if i == 0 {
                    VertexGroup::Root
                } else {
                    VertexGroup::Leaf
                };
                let with = pct(injected, label);
                let without = pct(base, label);
                let previous = pct(prev, label);
                samples.push(GapSample {
                    step,
                    measure: measure.name(),
                    group,
                    label: label.clone(),
                    kind: GapKind::WithWithout,
                    gap: with - without,
                });
                samples.push(GapSample {
                    step,
                    measure: measure.name(),
                    group,
                    label: label.clone(),
                    kind: GapKind::PrevStep,
                    gap: with - previous,
                });

                let members = cohort(prev, base, label, width)?;
                cohort_total += members.len();
                cohort_calls += 1;
                for member in members {
                    // Cohort members are scored at t and t+1 by definition;
                    // the injected giant contains the base giant, so the
                    // injected percentile exists too.
                    let m_with = pct(injected, &member);
                    let m_without = pct(base, &member);
                    let m_prev = pct(prev, &member);
                    samples.push(GapSample {
                        step,
                        measure: measure.name(),
                        group: VertexGroup::Cohort,
                        label: member.clone(),
                        kind: GapKind::WithWithout,
                        gap: m_with - m_without,
                    });
                    samples.push(GapSample {
                        step,
                        measure: measure.name(),
                        group: VertexGroup::Cohort,
                        label: member,
                        kind: GapKind::PrevStep,
                        gap: m_with - m_prev,
                    });
                }
            }
        }
        mean_cohort_size.push((
            measure.name(),
            cohort_total as f64 / cohort_calls.max(1) as f64,
        ));
    }

    let grid: Vec<f64> = (0..=200).map(|i| -100.0 + i as f64).collect();
    let mut cdfs = Vec::new();
    for measure in measures {
        for group in [VertexGroup::Root, VertexGroup::Leaf, VertexGroup::Cohort] {
            for kind in [GapKind::WithWithout, GapKind::PrevStep] {
                let vals: Vec<f64> = samples
                    .iter()
                    .filter(|s| s.measure == measure.name() && s.group == group && s.kind == kind)
                    .map(|s| s.gap)
                    .collect();
                if vals.is_empty() {
                    continue;
                }
                let cdf = grid
                    .iter()
                    .map(|&x| vals.iter().filter(|&&v| v <= x).count() as f64 / vals.len() as f64)
                    .collect();
                cdfs.push(GapCurve {
                    measure: measure.name(),
                    group,
                    kind,
                    cdf,
                });
            }
        }
    }
    Ok(GapReport {
        grid,
        samples,
        cdfs,
        mean_cohort_size,
    })
}
