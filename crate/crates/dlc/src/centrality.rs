//! Vertex importance measures.
//!
//! The directional measures score a vertex by the rate of change of selected
//! Laplacian eigenvalues when all edges at that vertex are infinitesimally
//! up-weighted. For an eigenpair `(lambda, v)` of `L` the derivative in the
//! direction of vertex `x` is
//!
//! ```text
//!     sum_{y ~ x} (v_x - v_y)^2
//! ```
//!
//! and for the normalized Laplacian
//!
//! ```text
//!     (1 - lambda) * sum_{y ~ x} (v_x/sqrt(d_x) - v_y/sqrt(d_y))^2
//!         - lambda * sum_{y ~ x} 2 v_x v_y / sqrt(d_x d_y).
//! ```
//!
//! A degenerate eigenvalue has no distinguished eigenvector, so its
//! derivative is defined on the whole eigenspace: the `1/k`-average of the
//! per-vector derivative over any orthonormal basis, which is basis
//! independent. `S-DLC` and `S-nDLC` sum these (eigenspace-averaged)
//! derivatives over a chosen set `S` of eigen indices; `k`-bottom and
//! `k`-top selections skip the null space, whose derivative is identically
//! zero.
//!
//! Shortest-path, walk-based, and energy-drop baselines live here too, so
//! rankings can be compared through [`spearman_rho`].

use std::collections::BTreeSet;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, VertexId};
use crate::spectra::{
    self, combinatorial_laplacian, eigendecompose, normalized_laplacian, EigenSystem,
    LanczosOptions, LaplacianKind, SpectrumEnd,
};

/// Graphs at or below this order (and every explicit index set) use the
/// dense full-spectrum path; larger top/bottom selections use the sparse
/// extremal solver, falling back to dense if it fails to converge.
pub const DENSE_LIMIT: usize = 800;

#[derive(Debug, Error)]
pub enum CentralityError {
    #[error(
        "graph is disconnected ({components} components); restrict to the giant component first"
    )]
    Disconnected { components: usize },
    #[error("eigen index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("index set exceeds nontrivial spectrum (k = {k}, nontrivial = {available})")]
    IndexSetTooLarge { k: usize, available: usize },
    #[error("empty index set")]
    EmptyIndexSet,
    #[error("isolated vertex {0} in nDLC")]
    IsolatedVertex(VertexId),
    #[error("zero energy: graph has no edges")]
    ZeroEnergy,
    #[error("attenuation {alpha} is not below the spectral-radius bound 1/{lambda_max}")]
    AttenuationTooLarge { alpha: f64, lambda_max: f64 },
    #[error("score tables cover different vertex sets")]
    MismatchedTables,
    #[error(transparent)]
    Spectra(#[from] spectra::SpectraError),
}

/// Selection of eigen indices (1-based ranks in the ascending spectrum).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum IndexSet {
    /// The `k` smallest indices above the null space: `{t+1, ..., t+k}`
    /// where `t` is the null dimension.
    Bottom(usize),
    /// The `k` largest indices: `{n-k+1, ..., n}`.
    Top(usize),
    /// Explicit 1-based indices.
    Explicit(BTreeSet<usize>),
}

impl IndexSet {
    /// Resolves to 0-based indices against a spectrum of order `n` with
    /// null dimension `t`.
    pub fn resolve(&self, n: usize, null_dim: usize) -> Result<Vec<usize>, CentralityError> {
        match self {
            IndexSet::Bottom(k) | IndexSet::Top(k) => {
                if *k == 0 {
                    return Err(CentralityError::EmptyIndexSet);
                }
                let available = n - null_dim;
                if *k > available {
                    return Err(CentralityError::IndexSetTooLarge { k: *k, available });
                }
                Ok(match self {
                    IndexSet::Bottom(_) => (null_dim..null_dim + k).collect(),
                    IndexSet::Top(_) => (n - k..n).collect(),
                    IndexSet::Explicit(_) => unreachable!(),
                })
            }
            IndexSet::Explicit(set) => {
                if set.is_empty() {
                    return Err(CentralityError::EmptyIndexSet);
                }
                set.iter()
                    .map(|&i| {
                        if i == 0 || i > n {
                            Err(CentralityError::IndexOutOfRange { index: i, n })
                        } else {
                            Ok(i - 1)
                        }
                    })
                    .collect()
            }
        }
    }
}

/// Per-vertex scores with percentiles and ordinal ranks derived from them.
///
/// Percentiles use the midrank convention
/// `100 * (#below + 0.5 * (#ties incl. self)) / n`; ranks are ordinal with
/// 1 for the highest score and midranks for ties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    labels: Vec<String>,
    scores: Vec<f64>,
    percentiles: Vec<f64>,
    ranks: Vec<f64>,
}

impl ScoreTable {
    pub fn from_scores(labels: Vec<String>, scores: Vec<f64>) -> ScoreTable {
        assert_eq!(labels.len(), scores.len());
        let percentiles = scores
            .iter()
            .map(|&s| percentile_of_value(&scores, s))
            .collect();
        let ranks = midranks_descending(&scores);
        ScoreTable {
            labels,
            scores,
            percentiles,
            ranks,
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn percentiles(&self) -> &[f64] {
        &self.percentiles
    }

    pub fn ranks(&self) -> &[f64] {
        &self.ranks
    }

    pub fn score(&self, v: VertexId) -> f64 {
        self.scores[v]
    }

    pub fn percentile(&self, v: VertexId) -> f64 {
        self.percentiles[v]
    }

    pub fn rank(&self, v: VertexId) -> f64 {
        self.ranks[v]
    }

    pub fn index_of_label(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn score_of_label(&self, label: &str) -> Option<f64> {
        self.index_of_label(label).map(|i| self.scores[i])
    }

    pub fn percentile_of_label(&self, label: &str) -> Option<f64> {
        self.index_of_label(label).map(|i| self.percentiles[i])
    }

    /// Vertex indices of the `count` best-ranked entries (rank ascending,
    /// ties by vertex index).
    pub fn top(&self, count: usize) -> Vec<VertexId> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.ranks[a].total_cmp(&self.ranks[b]).then(a.cmp(&b)));
        order.truncate(count);
        order
    }

    /// CSV with header `label,score,percentile,rank`.
    pub fn write_csv(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "label,score,percentile,rank")?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{},{},{},{}",
                csv_escape(&self.labels[i]),
                fmt_float(self.scores[i]),
                fmt_float(self.percentiles[i]),
                fmt_float(self.ranks[i])
            )?;
        }
        Ok(())
    }

    /// JSON object mirroring the CSV columns.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "labels": self.labels,
            "scores": self.scores,
            "percentiles": self.percentiles,
            "ranks": self.ranks,
        })
    }
}

pub(crate) fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub(crate) fn fmt_float(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{x:.1}")
    } else {
        // Shortest round-trip representation; deterministic across runs.
        format!("{x}")
    }
}

/// Midrank percentile of `value` within `scores`:
/// `100 * (#strictly below + 0.5 * #equal) / n`, where `#equal` counts every
/// entry equal to `value` (for a score drawn from the table this includes
/// the vertex itself; a value absent from the table still gets the half
/// weight it would have if inserted).
pub fn percentile_of_value(scores: &[f64], value: f64) -> f64 {
    let n = scores.len();
    if n == 0 {
        return 0.0;
    }
    let below = scores.iter().filter(|&&s| s < value).count() as f64;
    let equal = scores.iter().filter(|&&s| s == value).count() as f64;
    let ties = equal.max(1.0);
    100.0 * (below + 0.5 * ties) / n as f64
}

/// Ordinal ranks, 1 = highest score, ties resolved to midranks.
fn midranks_descending(scores: &[f64]) -> Vec<f64> {
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &v in &order[i..=j] {
            ranks[v] = mid;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's rank correlation between two tables over the same label set,
/// computed as the Pearson correlation of midranks.
pub fn spearman_rho(a: &ScoreTable, b: &ScoreTable) -> Result<f64, CentralityError> {
    if a.len() != b.len() || a.is_empty() {
        return Err(CentralityError::MismatchedTables);
    }
    let mut rb = Vec::with_capacity(a.len());
    for label in a.labels() {
        let i = b
            .index_of_label(label)
            .ok_or(CentralityError::MismatchedTables)?;
        rb.push(b.ranks[i]);
    }
    let ra = &a.ranks;
    let n = ra.len() as f64;
    let mean_a = ra.iter().sum::<f64>() / n;
    let mean_b = rb.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - mean_a) * (y - mean_b);
        var_a += (x - mean_a).powi(2);
        var_b += (y - mean_b).powi(2);
    }
    if var_a == 0.0 || var_b == 0.0 {
        // All-tied rankings carry no order; call them perfectly correlated
        // only with each other.
        return Ok(if var_a == var_b { 1.0 } else { 0.0 });
    }
    Ok(cov / (var_a * var_b).sqrt())
}

/// Derivative of the `i`-th (1-based, ascending) eigenvalue of `L` in the
/// direction of vertex `x`; requires `es` built from the combinatorial
/// Laplacian of `g`. Always non-negative.
pub fn dlc_eigvec_derivative(
    es: &EigenSystem,
    g: &Graph,
    i: usize,
    x: VertexId,
) -> Result<f64, CentralityError> {
    let n = es.order();
    if i == 0 || i > n {
        return Err(CentralityError::IndexOutOfRange { index: i, n });
    }
    Ok(combinatorial_vertex_derivative(g, es.vector(i - 1), x))
}

/// Derivative of the `i`-th (1-based) eigenvalue of the normalized
/// Laplacian in the direction of `x`; may be negative. Errors on an
/// isolated vertex, where `1/sqrt(d)` is undefined.
pub fn ndlc_eigvec_derivative(
    es: &EigenSystem,
    g: &Graph,
    i: usize,
    x: VertexId,
) -> Result<f64, CentralityError> {
    let n = es.order();
    if i == 0 || i > n {
        return Err(CentralityError::IndexOutOfRange { index: i, n });
    }
    if g.degree(x) == 0 {
        return Err(CentralityError::IsolatedVertex(x));
    }
    Ok(normalized_vertex_derivative(
        g,
        es.eigenvalues[i - 1],
        es.vector(i - 1),
        x,
    ))
}

fn combinatorial_vertex_derivative(g: &Graph, v: ArrayView1<'_, f64>, x: VertexId) -> f64 {
    g.neighbors(x).iter().map(|&y| (v[x] - v[y]).powi(2)).sum()
}

fn normalized_vertex_derivative(
    g: &Graph,
    lambda: f64,
    v: ArrayView1<'_, f64>,
    x: VertexId,
) -> f64 {
    let ux = v[x] / (g.degree(x) as f64).sqrt();
    let mut smooth = 0.0;
    let mut cross = 0.0;
    for &y in g.neighbors(x) {
        let uy = v[y] / (g.degree(y) as f64).sqrt();
        smooth += (ux - uy).powi(2);
        cross += 2.0 * ux * uy;
    }
    (1.0 - lambda) * smooth - lambda * cross
}

/// Eigenspace directional derivative: the `1/k`-averaged per-vector
/// derivative over the stored orthonormal basis of one grouped eigenspace
/// (`space` as returned in [`EigenSystem::eigenspaces`]). Basis independent,
/// so the solver's arbitrary basis choice is harmless.
pub fn eigenspace_derivative(
    es: &EigenSystem,
    g: &Graph,
    space: std::ops::Range<usize>,
    x: VertexId,
    kind: LaplacianKind,
) -> Result<f64, CentralityError> {
    let dim = space.len().max(1) as f64;
    let mut total = 0.0;
    for i in space {
        total += match kind {
            LaplacianKind::Combinatorial => dlc_eigvec_derivative(es, g, i + 1, x)?,
            LaplacianKind::Normalized => ndlc_eigvec_derivative(es, g, i + 1, x)?,
        };
    }
    Ok(total / dim)
}

/// S-directional Laplacian centrality: for every vertex, the sum over
/// selected eigen indices of that index's eigenspace-averaged derivative.
pub fn s_dlc(g: &Graph, sel: &IndexSet) -> Result<ScoreTable, CentralityError> {
    directional_scores(g, sel, LaplacianKind::Combinatorial)
}

/// S-directional normalized Laplacian centrality.
pub fn s_ndlc(g: &Graph, sel: &IndexSet) -> Result<ScoreTable, CentralityError> {
    directional_scores(g, sel, LaplacianKind::Normalized)
}

fn directional_scores(
    g: &Graph,
    sel: &IndexSet,
    kind: LaplacianKind,
) -> Result<ScoreTable, CentralityError> {
    let n = g.vertex_count();
    let parts = g.connected_components();
    if parts.sizes.len() != 1 {
        return Err(CentralityError::Disconnected {
            components: parts.sizes.len(),
        });
    }

    if n > DENSE_LIMIT && matches!(sel, IndexSet::Bottom(_) | IndexSet::Top(_)) {
        match sparse_directional_scores(g, sel, kind) {
            Ok(t) => return Ok(t),
            // The iterative solver gave up; the dense route below is always
            // available, just slower.
            Err(CentralityError::Spectra(_)) => {}
            Err(e) => return Err(e),
        }
    }

    let matrix = match kind {
        LaplacianKind::Combinatorial => combinatorial_laplacian(g),
        LaplacianKind::Normalized => normalized_laplacian(g),
    };
    let es = eigendecompose(&matrix)?;
    let indices = sel.resolve(n, es.null_dim)?;
    let scores = grouped_scores(
        g,
        kind,
        &es.eigenvalues,
        &es.eigenvectors,
        &es.eigenspaces,
        &indices,
    );
    Ok(ScoreTable::from_scores(g.labels().to_vec(), scores))
}

fn sparse_directional_scores(
    g: &Graph,
    sel: &IndexSet,
    kind: LaplacianKind,
) -> Result<ScoreTable, CentralityError> {
    let n = g.vertex_count();
    // Connected graph: the null space is one-dimensional.
    let null_dim = 1usize;
    let (end, k) = match sel {
        IndexSet::Bottom(k) => (SpectrumEnd::SmallestNontrivial, *k),
        IndexSet::Top(k) => (SpectrumEnd::Largest, *k),
        IndexSet::Explicit(_) => unreachable!("sparse path only handles Top/Bottom"),
    };
    if k == 0 {
        return Err(CentralityError::EmptyIndexSet);
    }
    if k > n - null_dim {
        return Err(CentralityError::IndexSetTooLarge {
            k,
            available: n - null_dim,
        });
    }
    let spec =
        spectra::extremal_eigenpairs(g, kind, end, k, &LanczosOptions::default()).map_err(|e| {
            CentralityError::Spectra(spectra::SpectraError::SolverFailed {
                order: n,
                info: match e {
                    spectra::LanczosError::Inner(i) => i,
                    _ => -1,
                },
            })
        })?;
    // Local positions of the selected slice within the returned block.
    let len = spec.eigenvalues.len();
    let local: Vec<usize> = match end {
        SpectrumEnd::SmallestNontrivial => (0..k).collect(),
        SpectrumEnd::Largest => (len - k..len).collect(),
    };
    let scores = grouped_scores(
        g,
        kind,
        &spec.eigenvalues,
        &spec.eigenvectors,
        &spec.eigenspaces,
        &local,
    );
    Ok(ScoreTable::from_scores(g.labels().to_vec(), scores))
}

/// Sums eigenspace-averaged derivative vectors over the selected (local)
/// indices: a space containing `c` selected indices contributes `c/dim`
/// times its total per-vector derivative.
fn grouped_scores(
    g: &Graph,
    kind: LaplacianKind,
    eigenvalues: &[f64],
    eigenvectors: &Array2<f64>,
    eigenspaces: &[std::ops::Range<usize>],
    selected: &[usize],
) -> Vec<f64> {
    let n = g.vertex_count();
    let mut scores = vec![0.0; n];
    for space in eigenspaces {
        let chosen = selected.iter().filter(|i| space.contains(i)).count();
        if chosen == 0 {
            continue;
        }
        let weight = chosen as f64 / space.len() as f64;
        for i in space.clone() {
            let v = eigenvectors.column(i);
            match kind {
                LaplacianKind::Combinatorial => {
                    for x in 0..n {
                        scores[x] += weight * combinatorial_vertex_derivative(g, v, x);
                    }
                }
                LaplacianKind::Normalized => {
                    for x in 0..n {
                        scores[x] += weight * normalized_vertex_derivative(g, eigenvalues[i], v, x);
                    }
                }
            }
        }
    }
    scores
}

/// Laplacian centrality: fractional drop in the Laplacian energy
/// `sum(d^2 + d)` caused by deleting the vertex. The drop has the closed
/// form `d_v^2 + d_v + 2 * sum_{u ~ v} d_u`, so no eigensolve is needed.
pub fn qi_laplacian_centrality(g: &Graph) -> Result<ScoreTable, CentralityError> {
    let energy = spectra::laplacian_energy(g);
    if energy <= 0.0 {
        return Err(CentralityError::ZeroEnergy);
    }
    let scores = (0..g.vertex_count())
        .map(|v| {
            let d = g.degree(v) as f64;
            let neighbor_degrees: f64 = g.neighbors(v).iter().map(|&u| g.degree(u) as f64).sum();
            (d * d + d + 2.0 * neighbor_degrees) / energy
        })
        .collect();
    Ok(ScoreTable::from_scores(g.labels().to_vec(), scores))
}

/// Normalized Laplacian centrality: fractional change of the normalized
/// Laplacian energy when the vertex is deleted (recomputed per deletion).
/// Values may be negative.
pub fn qi_normalized_laplacian_centrality(g: &Graph) -> Result<ScoreTable, CentralityError> {
    let energy = spectra::normalized_laplacian_energy(g);
    if energy <= 0.0 {
        return Err(CentralityError::ZeroEnergy);
    }
    let n = g.vertex_count();
    let mut scores = Vec::with_capacity(n);
    for v in 0..n {
        // Degrees after deleting v; the remaining energy is one per
        // surviving positive-degree vertex plus 2/(d_u d_w) per surviving
        // edge.
        let deg_after = |u: VertexId| g.degree(u) - usize::from(g.has_edge(u, v));
        let mut remaining = 0.0;
        for u in 0..n {
            if u != v && deg_after(u) > 0 {
                remaining += 1.0;
            }
        }
        for (a, b) in g.edges() {
            if a != v && b != v {
                remaining += 2.0 / (deg_after(a) as f64 * deg_after(b) as f64);
            }
        }
        scores.push((energy - remaining) / energy);
    }
    Ok(ScoreTable::from_scores(g.labels().to_vec(), scores))
}

/// PageRank by power iteration with uniform teleport; stops when the L1
/// change drops below 1e-10 (or after 1000 rounds). Scores sum to 1.
pub fn pagerank(g: &Graph, damping: f64) -> ScoreTable {
    let n = g.vertex_count();
    if n == 0 {
        return ScoreTable::from_scores(Vec::new(), Vec::new());
    }
    let nf = n as f64;
    let mut p = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    for _ in 0..1000 {
        let dangling: f64 = (0..n).filter(|&v| g.degree(v) == 0).map(|v| p[v]).sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        next.fill(base);
        for u in 0..n {
            let d = g.degree(u);
            if d > 0 {
                let share = damping * p[u] / d as f64;
                for &v in g.neighbors(u) {
                    next[v] += share;
                }
            }
        }
        let change: f64 = p.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut p, &mut next);
        if change < 1e-10 {
            break;
        }
    }
    ScoreTable::from_scores(g.labels().to_vec(), p)
}

/// Spectral radius of the adjacency matrix via shifted power iteration
/// (the shift keeps bipartite graphs from oscillating).
pub fn adjacency_spectral_radius(g: &Graph) -> f64 {
    let n = g.vertex_count();
    if n == 0 || g.edge_count() == 0 {
        return 0.0;
    }
    let shift = (0..n).map(|v| g.degree(v)).max().unwrap() as f64;
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut w = vec![0.0; n];
    let mut theta = 0.0;
    for _ in 0..2000 {
        for x in 0..n {
            let mut acc = shift * v[x];
            for &y in g.neighbors(x) {
                acc += v[y];
            }
            w[x] = acc;
        }
        let norm: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        w.iter_mut().for_each(|x| *x /= norm);
        let next = norm - shift;
        let done = (next - theta).abs() <= 1e-13 * (1.0 + next.abs());
        theta = next;
        std::mem::swap(&mut v, &mut w);
        if done {
            break;
        }
    }
    theta
}

/// Katz centrality: solves `(I - alpha A) x = 1` by conjugate gradients.
/// `alpha` defaults to `1 / (2 lambda_max)` and must stay below
/// `1 / lambda_max` for the system to be positive definite.
pub fn katz(g: &Graph, attenuation: Option<f64>) -> Result<ScoreTable, CentralityError> {
    let n = g.vertex_count();
    let lambda_max = adjacency_spectral_radius(g);
    let alpha = attenuation.unwrap_or(if lambda_max > 0.0 {
        0.5 / lambda_max
    } else {
        0.0
    });
    if lambda_max > 0.0 && alpha >= 1.0 / lambda_max {
        return Err(CentralityError::AttenuationTooLarge { alpha, lambda_max });
    }
    let apply = |x: &[f64], y: &mut [f64]| {
        for u in 0..n {
            let mut acc = x[u];
            for &v in g.neighbors(u) {
                acc -= alpha * x[v];
            }
            y[u] = acc;
        }
    };
    let mut x = vec![0.0; n];
    let mut r = vec![1.0; n];
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rs: f64 = r.iter().map(|v| v * v).sum();
    let target = 1e-24 * (n as f64);
    for _ in 0..(4 * n + 64) {
        if rs <= target {
            break;
        }
        apply(&p, &mut ap);
        let denom: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if denom <= 0.0 {
            break;
        }
        let step = rs / denom;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        let rs_next: f64 = r.iter().map(|v| v * v).sum();
        let beta = rs_next / rs;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rs = rs_next;
    }
    Ok(ScoreTable::from_scores(g.labels().to_vec(), x))
}

/// Closeness centrality `(n-1) / sum of distances`; requires a connected
/// graph.
pub fn closeness(g: &Graph) -> Result<ScoreTable, CentralityError> {
    let n = g.vertex_count();
    let parts = g.connected_components();
    if parts.sizes.len() > 1 {
        return Err(CentralityError::Disconnected {
            components: parts.sizes.len(),
        });
    }
    let mut scores = Vec::with_capacity(n);
    let mut dist = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    for s in 0..n {
        dist.fill(usize::MAX);
        dist[s] = 0;
        queue.push_back(s);
        let mut total = 0usize;
        while let Some(u) = queue.pop_front() {
            total += dist[u];
            for &v in g.neighbors(u) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        scores.push(if total > 0 {
            (n as f64 - 1.0) / total as f64
        } else {
            0.0
        });
    }
    Ok(ScoreTable::from_scores(g.labels().to_vec(), scores))
}

/// Betweenness centrality (Brandes), unnormalized, endpoints excluded.
pub fn betweenness(g: &Graph) -> ScoreTable {
    let n = g.vertex_count();
    let mut scores = vec![0.0; n];
    let mut stack: Vec<usize> = Vec::with_capacity(n);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![i64::MAX; n];
    let mut delta = vec![0.0f64; n];
    let mut queue = std::collections::VecDeque::new();
    for s in 0..n {
        stack.clear();
        for v in 0..n {
            preds[v].clear();
            sigma[v] = 0.0;
            dist[v] = i64::MAX;
            delta[v] = 0.0;
        }
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            stack.push(u);
            for &v in g.neighbors(u) {
                if dist[v] == i64::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
                if dist[v] == dist[u] + 1 {
                    sigma[v] += sigma[u];
                    preds[v].push(u);
                }
            }
        }
        while let Some(w) = stack.pop() {
            for &u in &preds[w] {
                delta[u] += sigma[u] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                scores[w] += delta[w];
            }
        }
    }
    // Each unordered pair was counted from both endpoints.
    scores.iter_mut().for_each(|x| *x /= 2.0);
    ScoreTable::from_scores(g.labels().to_vec(), scores)
}

/// A named, parameterized centrality measure, as selected on a command line
/// or in an experiment config.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "measure", rename_all = "snake_case")]
pub enum Measure {
    Dlc { k: usize, top: bool },
    Ndlc { k: usize, top: bool },
    LaplacianCentrality,
    NormalizedLaplacianCentrality,
    Pagerank,
    Katz,
    Closeness,
    Betweenness,
}

impl Measure {
    /// Canonical short name, used in file names and report columns.
    pub fn name(&self) -> String {
        match self {
            Measure::Dlc { k, top } => {
                format!("{}{}-dlc", k, if *top { "top" } else { "bottom" })
            }
            Measure::Ndlc { k, top } => {
                format!("{}{}-ndlc", k, if *top { "top" } else { "bottom" })
            }
            Measure::LaplacianCentrality => "lc".into(),
            Measure::NormalizedLaplacianCentrality => "nlc".into(),
            Measure::Pagerank => "pagerank".into(),
            Measure::Katz => "katz".into(),
            Measure::Closeness => "closeness".into(),
            Measure::Betweenness => "betweenness".into(),
        }
    }

    pub fn score(&self, g: &Graph) -> Result<ScoreTable, CentralityError> {
        match self {
            Measure::Dlc { k, top } => {
                let sel = if *top {
                    IndexSet::Top(*k)
                } else {
                    IndexSet::Bottom(*k)
                };
                s_dlc(g, &sel)
            }
            Measure::Ndlc { k, top } => {
                let sel = if *top {
                    IndexSet::Top(*k)
                } else {
                    IndexSet::Bottom(*k)
                };
                s_ndlc(g, &sel)
            }
            Measure::LaplacianCentrality => qi_laplacian_centrality(g),
            Measure::NormalizedLaplacianCentrality => qi_normalized_laplacian_centrality(g),
            Measure::Pagerank => Ok(pagerank(g, 0.85)),
            Measure::Katz => katz(g, None),
            Measure::Closeness => closeness(g),
            Measure::Betweenness => Ok(betweenness(g)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array1;

    fn k(n: usize) -> Graph {
        let mut pairs = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                pairs.push((u, v));
            }
        }
        Graph::from_index_edges(n, &pairs)
    }

    fn path(n: usize) -> Graph {
        let pairs: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        Graph::from_index_edges(n, &pairs)
    }

    fn cycle(n: usize) -> Graph {
        let pairs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_index_edges(n, &pairs)
    }

    fn petersen() -> Graph {
        let mut pairs: Vec<(usize, usize)> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        pairs.extend((0..5).map(|i| (i, i + 5)));
        pairs.extend((0..5).map(|i| (5 + i, 5 + (i + 2) % 5)));
        Graph::from_index_edges(10, &pairs)
    }

    fn random_connected(n: usize, extra: usize, seed: u64) -> Graph {
        let mut s = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            s
        };
        let mut pairs = Vec::new();
        for v in 1..n {
            let u = (next() % v as u64) as usize;
            pairs.push((u, v));
        }
        for _ in 0..extra {
            let u = (next() % n as u64) as usize;
            let v = (next() % n as u64) as usize;
            if u != v {
                pairs.push((u.min(v), u.max(v)));
            }
        }
        Graph::from_index_edges(n, &pairs)
    }

    #[test]
    fn dlc_derivative_p3_values() {
        let g = path(3);
        let es = eigendecompose(&combinatorial_laplacian(&g)).unwrap();
        // index 3 is the eigenvalue 3
        assert!((dlc_eigvec_derivative(&es, &g, 3, 1).unwrap() - 3.0).abs() < 1e-10);
        assert!((dlc_eigvec_derivative(&es, &g, 3, 0).unwrap() - 1.5).abs() < 1e-10);
    }

    #[test]
    fn null_space_derivative_is_zero() {
        for g in [path(4), k(4), cycle(5)] {
            let es = eigendecompose(&combinatorial_laplacian(&g)).unwrap();
            for x in 0..g.vertex_count() {
                assert!(dlc_eigvec_derivative(&es, &g, 1, x).unwrap().abs() < 1e-18);
            }
            let es = eigendecompose(&normalized_laplacian(&g)).unwrap();
            for x in 0..g.vertex_count() {
                assert!(ndlc_eigvec_derivative(&es, &g, 1, x).unwrap().abs() < 1e-15);
            }
        }
    }

    #[test]
    fn ndlc_derivative_k2_is_zero() {
        // The normalized Laplacian is invariant under uniform edge scaling.
        let g = k(2);
        let es = eigendecompose(&normalized_laplacian(&g)).unwrap();
        for x in 0..2 {
            assert!(ndlc_eigvec_derivative(&es, &g, 2, x).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn ndlc_derivative_k3_pinned_vector() {
        // For v = (1,-1,0)/sqrt(2) at lambda = 3/2 and x = 2, the value
        // equals d/dt of v' NL(t) v = 1 + 1/(2+t), i.e. -1/4. Cross-checked
        // against a matrix finite difference below.
        let g = k(3);
        let mut es = eigendecompose(&normalized_laplacian(&g)).unwrap();
        let s = 1.0 / 2.0f64.sqrt();
        es.eigenvectors
            .column_mut(1)
            .assign(&Array1::from(vec![s, -s, 0.0]));
        es.eigenvalues[1] = 1.5;
        let got = ndlc_eigvec_derivative(&es, &g, 2, 2).unwrap();
        assert!((got + 0.25).abs() < 1e-12, "got {got}");

        // finite difference of v' NL(t) v in the direction of vertex 2
        let h = 1e-6;
        let v = [s, -s, 0.0];
        let quad = |t: f64| {
            let d = [2.0 + t, 2.0 + t, 2.0 + 2.0 * t];
            let w = |i: usize, j: usize| {
                let a: f64 = if (i, j) == (0, 1) || (i, j) == (1, 0) {
                    1.0
                } else {
                    1.0 + t
                };
                -a / (d[i] * d[j]).sqrt()
            };
            let mut q = 0.0;
            for i in 0..3 {
                q += v[i] * v[i]; // diagonal of NL is 1
                for j in 0..3 {
                    if i != j {
                        q += v[i] * w(i, j) * v[j];
                    }
                }
            }
            q
        };
        let fd = (quad(h) - quad(-h)) / (2.0 * h);
        assert!((got - fd).abs() < 1e-8, "analytic {got} vs fd {fd}");
    }

    #[test]
    fn eigenspace_derivative_matches_simple_index() {
        let g = path(3);
        let es = eigendecompose(&combinatorial_laplacian(&g)).unwrap();
        let space = es.eigenspace_of(2);
        assert_eq!(space, 2..3);
        let a = eigenspace_derivative(&es, &g, space, 1, LaplacianKind::Combinatorial).unwrap();
        let b = dlc_eigvec_derivative(&es, &g, 3, 1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn eigenspace_derivative_k3_top_space() {
        let g = k(3);
        let es = eigendecompose(&combinatorial_laplacian(&g)).unwrap();
        let space = es.eigenspace_of(1);
        assert_eq!(space.len(), 2);
        for x in 0..3 {
            let d = eigenspace_derivative(&es, &g, space.clone(), x, LaplacianKind::Combinatorial)
                .unwrap();
            assert!((d - 2.0).abs() < 1e-10, "vertex {x}: {d}");
        }
    }

    #[test]
    fn eigenspace_derivative_is_basis_invariant() {
        let g = k(3);
        let mut es = eigendecompose(&combinatorial_laplacian(&g)).unwrap();
        let space = es.eigenspace_of(1);
        let before: Vec<f64> = (0..3)
            .map(|x| {
                eigenspace_derivative(&es, &g, space.clone(), x, LaplacianKind::Combinatorial)
                    .unwrap()
            })
            .collect();
        // rotate the 2-dim basis by 37 degrees
        let (c, s) = (37f64.to_radians().cos(), 37f64.to_radians().sin());
        let v1 = es.eigenvectors.column(1).to_owned();
        let v2 = es.eigenvectors.column(2).to_owned();
        es.eigenvectors.column_mut(1).assign(&(&v1 * c + &v2 * s));
        es.eigenvectors.column_mut(2).assign(&(&v2 * c - &v1 * s));
        for (x, want) in before.iter().enumerate() {
            let got =
                eigenspace_derivative(&es, &g, space.clone(), x, LaplacianKind::Combinatorial)
                    .unwrap();
            assert!((got - want).abs() < 1e-9);
        }
    }

    #[test]
    fn s_dlc_p3_single_index() {
        let g = path(3);
        let t = s_dlc(&g, &IndexSet::Explicit([3].into())).unwrap();
        let expect = [1.5, 3.0, 1.5];
        for (got, want) in t.scores().iter().zip(expect) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn s_dlc_sum_rule_all_nontrivial() {
        for seed in 0..5u64 {
            let g = random_connected(24, 30, seed);
            let n = g.vertex_count();
            let es = eigendecompose(&combinatorial_laplacian(&g)).unwrap();
            let t = es.null_dim;
            let table = s_dlc(&g, &IndexSet::Bottom(n - t)).unwrap();
            let total: f64 = table.scores().iter().sum();
            let expect: f64 = 2.0 * es.eigenvalues[t..].iter().sum::<f64>();
            assert!((total - expect).abs() <= 1e-9 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn s_ndlc_k2_and_sum_rule() {
        let table = s_ndlc(&k(2), &IndexSet::Explicit([2].into())).unwrap();
        for &s in table.scores() {
            assert!(s.abs() < 1e-12);
        }
        for seed in 5..10u64 {
            let g = random_connected(20, 28, seed);
            let n = g.vertex_count();
            for sel in [IndexSet::Bottom(5), IndexSet::Top(5), IndexSet::Bottom(19)] {
                let table = s_ndlc(&g, &sel).unwrap();
                let total: f64 = table.scores().iter().sum();
                let scale: f64 = table.scores().iter().map(|s| s.abs()).sum();
                // For S = all nontrivial indices every individual score is
                // itself zero (the derivative matrix is traceless), so the
                // relative bound needs a machine-noise floor.
                let bound = (1e-8 * scale).max(1e-12 * n as f64);
                assert!(total.abs() <= bound, "{total} vs {scale}");
            }
        }
    }

    #[test]
    fn s_ndlc_k3_symmetric() {
        let table = s_ndlc(&k(3), &IndexSet::Explicit([2, 3].into())).unwrap();
        let first = table.score(0);
        for &s in table.scores() {
            assert!((s - first).abs() < 1e-12);
        }
    }

    #[test]
    fn directional_rejects_disconnected() {
        let g = Graph::from_index_edges(4, &[(0, 1), (2, 3)]);
        assert!(matches!(
            s_dlc(&g, &IndexSet::Top(1)),
            Err(CentralityError::Disconnected { components: 2 })
        ));
    }

    #[test]
    fn index_set_errors() {
        let g = path(3);
        assert!(matches!(
            s_dlc(&g, &IndexSet::Bottom(3)),
            Err(CentralityError::IndexSetTooLarge { k: 3, available: 2 })
        ));
        assert!(matches!(
            s_dlc(&g, &IndexSet::Explicit([4].into())),
            Err(CentralityError::IndexOutOfRange { index: 4, n: 3 })
        ));
    }

    #[test]
    fn null_only_selection_is_zero_table() {
        let g = random_connected(12, 14, 3);
        let table = s_dlc(&g, &IndexSet::Explicit([1].into())).unwrap();
        for &s in table.scores() {
            assert!(s.abs() < 1e-16);
        }
    }

    #[test]
    fn qi_laplacian_centrality_values() {
        let star3 = Graph::from_index_edges(4, &[(0, 1), (0, 2), (0, 3)]);
        let t = qi_laplacian_centrality(&star3).unwrap();
        assert!((t.score(0) - 1.0).abs() < 1e-15);
        assert!((t.score(1) - 4.0 / 9.0).abs() < 1e-15);

        let t2 = qi_laplacian_centrality(&k(2)).unwrap();
        assert!((t2.score(0) - 1.0).abs() < 1e-15);

        assert!(matches!(
            qi_laplacian_centrality(&Graph::from_index_edges(3, &[])),
            Err(CentralityError::ZeroEnergy)
        ));
    }

    #[test]
    fn qi_identity_degree_vs_eigen_route() {
        for seed in 0..5u64 {
            let g = random_connected(18, 22, seed);
            let fast = qi_laplacian_centrality(&g).unwrap();
            let energy: f64 = eigendecompose(&combinatorial_laplacian(&g))
                .unwrap()
                .eigenvalues
                .iter()
                .map(|l| l * l)
                .sum();
            for v in 0..g.vertex_count() {
                let deleted = g.delete_vertex(v);
                let energy_minus: f64 = eigendecompose(&combinatorial_laplacian(&deleted))
                    .unwrap()
                    .eigenvalues
                    .iter()
                    .map(|l| l * l)
                    .sum();
                let via_eigs = (energy - energy_minus) / energy;
                let got = fast.score(v);
                assert!((got - via_eigs).abs() <= 1e-9 * via_eigs.abs().max(1.0));
                assert!(got >= 0.0);
            }
        }
    }

    #[test]
    fn qi_normalized_values() {
        let t = qi_normalized_laplacian_centrality(&k(2)).unwrap();
        assert!((t.score(0) - 1.0).abs() < 1e-15);
        let t3 = qi_normalized_laplacian_centrality(&k(3)).unwrap();
        for v in 0..3 {
            assert!((t3.score(v) - 1.0 / 9.0).abs() < 1e-12);
        }
        // vertex-transitive: all equal
        let tc = qi_normalized_laplacian_centrality(&cycle(6)).unwrap();
        for &s in tc.scores() {
            assert!((s - tc.score(0)).abs() < 1e-12);
        }
    }

    #[test]
    fn pagerank_cases() {
        let t = pagerank(&k(2), 0.85);
        assert!((t.score(0) - 0.5).abs() < 1e-9);
        let t = pagerank(&cycle(4), 0.85);
        for &s in t.scores() {
            assert!((s - 0.25).abs() < 1e-9);
        }
        let t = pagerank(&path(3), 0.85);
        assert!(t.score(1) > t.score(0));
        assert!(t.score(1) > t.score(2));
        let total: f64 = t.scores().iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn katz_cases() {
        let t = katz(&cycle(5), None).unwrap();
        for &s in t.scores() {
            assert!((s - t.score(0)).abs() < 1e-9);
        }
        let t = katz(&path(3), None).unwrap();
        assert!(t.score(1) > t.score(0));
        let t = katz(&path(3), Some(0.0)).unwrap();
        for &s in t.scores() {
            assert!((s - 1.0).abs() < 1e-12);
        }
        let err = katz(&k(3), Some(0.51));
        assert!(matches!(
            err,
            Err(CentralityError::AttenuationTooLarge { .. })
        ));
    }

    #[test]
    fn closeness_and_betweenness() {
        let t = betweenness(&path(3));
        assert_eq!(t.scores(), &[0.0, 1.0, 0.0]);

        let t = closeness(&k(3)).unwrap();
        for &s in t.scores() {
            assert!((s - 1.0).abs() < 1e-12);
        }

        let star = Graph::from_index_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let t = betweenness(&star);
        assert_eq!(t.score(1), 0.0, "degree-1 vertex lies on no shortest path");
        assert_eq!(t.score(0), 6.0, "center routes all C(4,2) pairs");

        assert!(closeness(&Graph::from_index_edges(4, &[(0, 1), (2, 3)])).is_err());
    }

    #[test]
    fn betweenness_matches_pair_enumeration() {
        // independent oracle: count shortest paths through each vertex by
        // BFS per pair on a small random graph
        let g = random_connected(9, 8, 11);
        let n = g.vertex_count();
        let t = betweenness(&g);
        let mut expect = vec![0.0; n];
        for s in 0..n {
            for target in (s + 1)..n {
                // enumerate all shortest paths with a BFS-layered DFS
                let mut dist = vec![usize::MAX; n];
                dist[s] = 0;
                let mut q = std::collections::VecDeque::from([s]);
                while let Some(u) = q.pop_front() {
                    for &v in g.neighbors(u) {
                        if dist[v] == usize::MAX {
                            dist[v] = dist[u] + 1;
                            q.push_back(v);
                        }
                    }
                }
                let mut paths: Vec<Vec<usize>> = Vec::new();
                let mut stack = vec![vec![target]];
                while let Some(path) = stack.pop() {
                    let head = *path.last().unwrap();
                    if head == s {
                        paths.push(path);
                        continue;
                    }
                    for &u in g.neighbors(head) {
                        if dist[u] + 1 == dist[head] {
                            let mut next = path.clone();
                            next.push(u);
                            stack.push(next);
                        }
                    }
                }
                let total = paths.len() as f64;
                for path in paths {
                    for &v in &path[1..path.len() - 1] {
                        expect[v] += 1.0 / total;
                    }
                }
            }
        }
        for v in 0..n {
            assert!((t.score(v) - expect[v]).abs() < 1e-9, "vertex {v}");
        }
    }

    #[test]
    fn percentile_convention() {
        let t = ScoreTable::from_scores(
            vec!["a".into(), "b".into(), "c".into()],
            vec![1.0, 2.0, 3.0],
        );
        let expect = [100.0 / 6.0, 50.0, 500.0 / 6.0];
        for (got, want) in t.percentiles().iter().zip(expect) {
            assert!((got - want).abs() < 1e-9);
        }
        assert_eq!(t.ranks(), &[3.0, 2.0, 1.0]);
    }

    #[test]
    fn percentile_ties_midrank() {
        let t = ScoreTable::from_scores(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            vec![1.0, 2.0, 2.0, 3.0],
        );
        // ties at 2.0: below=1, ties=2 -> 100*(1+1)/4 = 50
        assert!((t.percentile(1) - 50.0).abs() < 1e-12);
        assert!((t.percentile(2) - 50.0).abs() < 1e-12);
        assert_eq!(t.rank(1), 2.5);
    }

    #[test]
    fn spearman_cases() {
        let labels: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let x = ScoreTable::from_scores(labels.clone(), vec![1.0, 2.0, 3.0]);
        let same = ScoreTable::from_scores(labels.clone(), vec![10.0, 20.0, 30.0]);
        let rev = ScoreTable::from_scores(labels.clone(), vec![3.0, 2.0, 1.0]);
        let swapped = ScoreTable::from_scores(labels.clone(), vec![1.0, 3.0, 2.0]);
        assert!((spearman_rho(&x, &same).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman_rho(&x, &rev).unwrap() + 1.0).abs() < 1e-12);
        assert!((spearman_rho(&x, &swapped).unwrap() - 0.5).abs() < 1e-12);

        let other = ScoreTable::from_scores(vec!["z".into()], vec![1.0]);
        assert!(spearman_rho(&x, &other).is_err());
    }

    #[test]
    fn spearman_alignment_is_by_label() {
        let a = ScoreTable::from_scores(
            vec!["u".into(), "v".into(), "w".into()],
            vec![1.0, 2.0, 3.0],
        );
        let b = ScoreTable::from_scores(
            vec!["w".into(), "u".into(), "v".into()],
            vec![30.0, 10.0, 20.0],
        );
        assert!((spearman_rho(&a, &b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn convergence_top_equals_bottom_at_full_k() {
        for g in [petersen(), random_connected(16, 20, 2)] {
            let n = g.vertex_count();
            let bottom = s_dlc(&g, &IndexSet::Bottom(n - 1)).unwrap();
            let top = s_dlc(&g, &IndexSet::Top(n - 1)).unwrap();
            for v in 0..n {
                assert!((bottom.score(v) - top.score(v)).abs() < 1e-9);
            }
            assert!((spearman_rho(&bottom, &top).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sign_flip_leaves_scores_unchanged() {
        let g = random_connected(14, 18, 9);
        let mut es = eigendecompose(&combinatorial_laplacian(&g)).unwrap();
        let before: Vec<f64> = (0..g.vertex_count())
            .map(|x| dlc_eigvec_derivative(&es, &g, 5, x).unwrap())
            .collect();
        let flipped = es.eigenvectors.column(4).mapv(|v| -v);
        es.eigenvectors.column_mut(4).assign(&flipped);
        for (x, want) in before.iter().enumerate() {
            let got = dlc_eigvec_derivative(&es, &g, 5, x).unwrap();
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn derivative_of_trace_identity() {
        // sum_i 2 lambda_i * (per-vector derivative at x) equals the
        // derivative of trace(L(t)^2) for the family with edges at x scaled
        // by (1 + t), estimated here by central differences on the matrix.
        let g = random_connected(12, 16, 21);
        let n = g.vertex_count();
        let es = eigendecompose(&combinatorial_laplacian(&g)).unwrap();
        let trace_sq = |t: f64, x: usize| -> f64 {
            let weight = |i: usize, j: usize| -> f64 {
                if !g.has_edge(i, j) {
                    0.0
                } else if i == x || j == x {
                    1.0 + t
                } else {
                    1.0
                }
            };
            let mut total = 0.0;
            for i in 0..n {
                let d: f64 = (0..n).map(|j| weight(i, j)).sum();
                total += d * d;
                for j in 0..n {
                    if i != j {
                        total += weight(i, j) * weight(i, j);
                    }
                }
            }
            total
        };
        let h = 1e-6;
        for x in 0..n {
            let analytic: f64 = (1..=n)
                .map(|i| {
                    2.0 * es.eigenvalues[i - 1] * dlc_eigvec_derivative(&es, &g, i, x).unwrap()
                })
                .sum();
            let fd = (trace_sq(h, x) - trace_sq(-h, x)) / (2.0 * h);
            assert!(
                (analytic - fd).abs() <= 1e-5 * (1.0 + analytic.abs()),
                "vertex {x}: {analytic} vs {fd}"
            );
        }
    }

    #[test]
    fn sparse_path_matches_dense_scores() {
        // Same graph scored through both routes must agree: build one above
        // the dense limit and one just below, compare directly.
        let g = random_connected(DENSE_LIMIT + 60, DENSE_LIMIT + 300, 4);
        for (sel, kind) in [
            (IndexSet::Top(5), LaplacianKind::Combinatorial),
            (IndexSet::Bottom(5), LaplacianKind::Normalized),
        ] {
            let sparse = directional_scores(&g, &sel, kind).unwrap();
            let matrix = match kind {
                LaplacianKind::Combinatorial => combinatorial_laplacian(&g),
                LaplacianKind::Normalized => normalized_laplacian(&g),
            };
            let es = eigendecompose(&matrix).unwrap();
            let indices = sel.resolve(g.vertex_count(), es.null_dim).unwrap();
            let dense = grouped_scores(
                &g,
                kind,
                &es.eigenvalues,
                &es.eigenvectors,
                &es.eigenspaces,
                &indices,
            );
            for v in 0..g.vertex_count() {
                assert!(
                    (sparse.score(v) - dense[v]).abs() <= 1e-7 * (1.0 + dense[v].abs()),
                    "vertex {v}: sparse {} dense {}",
                    sparse.score(v),
                    dense[v]
                );
            }
        }
    }

    #[test]
    fn measure_names_and_serde() {
        let m = Measure::Dlc { k: 5, top: true };
        assert_eq!(m.name(), "5top-dlc");
        let json = serde_json::to_string(&m).unwrap();
        let back: Measure = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }

    proptest::proptest! {
        // percentiles and ranks are order statistics: invariant under any
        // positive affine rescaling of the scores
        #[test]
        fn score_table_invariant_under_affine_rescale(
            raw in proptest::collection::vec(-500i32..500, 1..40),
            scale in 0.1f64..20.0,
            shift in -100.0f64..100.0,
        ) {
            // lattice-valued scores so rescaling cannot create new ties
            let scores: Vec<f64> = raw.iter().map(|&x| x as f64 / 10.0).collect();
            let labels: Vec<String> = (0..scores.len()).map(|i| i.to_string()).collect();
            let a = ScoreTable::from_scores(labels.clone(), scores.clone());
            let rescaled: Vec<f64> = scores.iter().map(|s| scale * s + shift).collect();
            let b = ScoreTable::from_scores(labels, rescaled);
            for v in 0..a.len() {
                proptest::prop_assert!((a.percentile(v) - b.percentile(v)).abs() < 1e-9);
                proptest::prop_assert_eq!(a.rank(v), b.rank(v));
            }
            proptest::prop_assert!((spearman_rho(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
