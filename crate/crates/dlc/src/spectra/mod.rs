//! Laplacian matrices, dense eigendecompositions, eigenspace grouping, and
//! small-graph combinatorial oracles.
//!
//! Two matrices are associated with a graph here: the combinatorial
//! Laplacian `L = D - A` and the normalized Laplacian
//! `NL = D^{-1/2} L D^{-1/2}`. Both are symmetric positive semidefinite;
//! the multiplicity of their eigenvalue 0 equals the number of connected
//! components, and the eigenvalues of `NL` lie in `[0, 2]`.

use ndarray::{Array2, ArrayView1};
use thiserror::Error;

use crate::graph::{Graph, GraphError};

mod lanczos;
mod lapack;

pub use lanczos::{
    extremal_eigenpairs, ExtremalSpectrum, LanczosError, LanczosOptions, LaplacianKind, SpectrumEnd,
};
pub use lapack::set_blas_threads;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("eigensolver failed to converge on matrix of order {order} (lapack info {info})")]
    SolverFailed { order: usize, info: i32 },
    #[error("cheeger oracle limited to small graphs (n = {0} > {1})")]
    OracleTooLarge(usize, usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Dense real symmetric matrix; entries are written symmetrically at
/// construction so `entry(i, j) == entry(j, i)` holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    data: Array2<f64>,
}

impl SymmetricMatrix {
    /// Builds from the strict upper triangle plus diagonal of `f`; the lower
    /// triangle is mirrored rather than evaluated.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> SymmetricMatrix {
        let mut data = Array2::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let x = f(i, j);
                data[[i, j]] = x;
                data[[j, i]] = x;
            }
        }
        SymmetricMatrix { data }
    }

    pub fn order(&self) -> usize {
        self.data.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[[i, j]]
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.data
    }
}

/// `L = D - A`: degrees on the diagonal, `-1` on edges.
pub fn combinatorial_laplacian(g: &Graph) -> SymmetricMatrix {
    SymmetricMatrix::from_fn(g.vertex_count(), |i, j| {
        if i == j {
            g.degree(i) as f64
        } else if g.has_edge(i, j) {
            -1.0
        } else {
            0.0
        }
    })
}

/// `NL = D^{-1/2} L D^{-1/2}` on vertices of positive degree; rows and
/// columns of isolated vertices are identically zero (each contributes one
/// zero eigenvalue, matching its role as a singleton component).
pub fn normalized_laplacian(g: &Graph) -> SymmetricMatrix {
    SymmetricMatrix::from_fn(g.vertex_count(), |i, j| {
        if i == j {
            if g.degree(i) > 0 {
                1.0
            } else {
                0.0
            }
        } else if g.has_edge(i, j) {
            -1.0 / ((g.degree(i) as f64) * (g.degree(j) as f64)).sqrt()
        } else {
            0.0
        }
    })
}

/// A full symmetric eigendecomposition with eigenvalues ascending and
/// eigenvalues grouped into (numerically) degenerate eigenspaces.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Ascending eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors; column `j` pairs with `eigenvalues[j]`.
    pub eigenvectors: Array2<f64>,
    /// Half-open index ranges `[start, end)` of eigenvalues grouped within
    /// the grouping tolerance, covering `0..n` in order.
    pub eigenspaces: Vec<std::ops::Range<usize>>,
    /// Multiplicity of eigenvalue 0 under the grouping tolerance.
    pub null_dim: usize,
    /// Tolerance used for the grouping.
    pub grouping_tolerance: f64,
}

impl EigenSystem {
    /// Eigenspace (as an index range) containing the 0-based eigen index.
    pub fn eigenspace_of(&self, index: usize) -> std::ops::Range<usize> {
        self.eigenspaces
            .iter()
            .find(|r| r.contains(&index))
            .expect("index within 0..n")
            .clone()
    }

    pub fn order(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvector column `j` as a view.
    pub fn vector(&self, j: usize) -> ArrayView1<'_, f64> {
        self.eigenvectors.column(j)
    }
}

/// Grouping tolerance for degenerate eigenspaces.
pub fn grouping_tolerance(max_abs_eigenvalue: f64) -> f64 {
    1e-8 * max_abs_eigenvalue.abs().max(1.0)
}

/// Residual tolerance scale for solver sanity checks on order-`n` systems.
pub fn solver_tolerance(n: usize) -> f64 {
    1e-9 * n.max(1) as f64
}

/// Groups ascending eigenvalues into eigenspaces: consecutive eigenvalues
/// whose gap is below `tol` share a space.
pub(crate) fn group_eigenvalues(values: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut spaces = Vec::new();
    let mut start = 0usize;
    for i in 1..values.len() {
        if values[i] - values[i - 1] >= tol {
            spaces.push(start..i);
            start = i;
        }
    }
    if !values.is_empty() {
        spaces.push(start..values.len());
    }
    spaces
}

/// Full dense symmetric eigendecomposition, ascending order, with
/// eigenspace grouping at tolerance `1e-8 * max(1, |lambda_n|)`.
pub fn eigendecompose(m: &SymmetricMatrix) -> Result<EigenSystem, SpectraError> {
    let n = m.order();
    let mut flat: Vec<f64> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            flat.push(m.entry(i, j));
        }
    }
    let eigenvalues = lapack::eigh_inplace(n, &mut flat)
        .map_err(|info| SpectraError::SolverFailed { order: n, info })?;
    let eigenvectors = Array2::from_shape_fn((n, n), |(i, j)| flat[j * n + i]);
    let max_abs = eigenvalues.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
    let tol = grouping_tolerance(max_abs);
    let eigenspaces = group_eigenvalues(&eigenvalues, tol);
    let null_dim = null_dimension(&eigenvalues, &eigenspaces, tol);
    Ok(EigenSystem {
        eigenvalues,
        eigenvectors,
        eigenspaces,
        null_dim,
        grouping_tolerance: tol,
    })
}

fn null_dimension(values: &[f64], spaces: &[std::ops::Range<usize>], tol: f64) -> usize {
    // The eigenspace whose representative is nearest zero, if it is zero up
    // to the grouping tolerance. For PSD matrices this is the first space.
    spaces
        .iter()
        .find(|r| values[r.start].abs() < tol)
        .map(|r| r.len())
        .unwrap_or(0)
}

/// Laplacian energy `sum(lambda_i^2) = trace(L^2)`, computed through the
/// exact degree identity `sum_v d_v^2 + d_v`.
pub fn laplacian_energy(g: &Graph) -> f64 {
    (0..g.vertex_count())
        .map(|v| {
            let d = g.degree(v) as f64;
            d * d + d
        })
        .sum()
}

/// Normalized Laplacian energy `sum(lambda_i(NL)^2) = trace(NL^2)`. Since
/// `NL` is symmetric, `trace(NL^2)` is the sum of squared entries: one per
/// positive-degree vertex plus `2/(d_u d_v)` per edge.
pub fn normalized_laplacian_energy(g: &Graph) -> f64 {
    let diag = (0..g.vertex_count()).filter(|&v| g.degree(v) > 0).count() as f64;
    let off: f64 = g
        .edges()
        .map(|(u, v)| 2.0 / ((g.degree(u) as f64) * (g.degree(v) as f64)))
        .sum();
    diag + off
}

/// Largest graph order accepted by [`cheeger_constant_bruteforce`].
pub const CHEEGER_ORACLE_LIMIT: usize = 20;

/// Exhaustive Cheeger constant: the minimum over nonempty proper vertex
/// subsets `X` of `e(X, X-bar) / min(vol X, vol X-bar)`. Exponential in `n`,
/// intended as a test oracle only.
pub fn cheeger_constant_bruteforce(g: &Graph) -> Result<f64, SpectraError> {
    let n = g.vertex_count();
    if n > CHEEGER_ORACLE_LIMIT {
        return Err(SpectraError::OracleTooLarge(n, CHEEGER_ORACLE_LIMIT));
    }
    let parts = g.connected_components();
    if parts.sizes.len() != 1 {
        return Err(GraphError::Disconnected {
            components: parts.sizes.len(),
        }
        .into());
    }
    let total_volume = g.volume();
    let mut best = f64::INFINITY;
    // Fix vertex 0 on one side to halve the enumeration.
    for mask in 1u32..(1 << (n - 1)) {
        let in_x = |v: usize| v > 0 && (mask >> (v - 1)) & 1 == 1;
        let mut vol_x = 0usize;
        let mut boundary = 0usize;
        for v in 0..n {
            if !in_x(v) {
                continue;
            }
            vol_x += g.degree(v);
            for &w in g.neighbors(v) {
                if !in_x(w) {
                    boundary += 1;
                }
            }
        }
        let vol_rest = total_volume - vol_x;
        let denom = vol_x.min(vol_rest);
        if denom == 0 {
            continue;
        }
        best = best.min(boundary as f64 / denom as f64);
    }
    Ok(best)
}
