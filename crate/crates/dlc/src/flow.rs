//! Flow-record ingestion and windowed dynamic graphs.
//!
//! A flow record is `(time, duration, source, destination, metadata)`. A
//! record belongs to the window `[a, a + len)` when its closed activity
//! interval `[time, time + duration]` intersects it; overlapping or
//! disjoint windows both work (`step <= window_len` is allowed). Each
//! window's records collapse to one simple undirected graph.

use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::spectra::{
    self, combinatorial_laplacian, eigendecompose, normalized_laplacian, LanczosOptions,
    LaplacianKind, SpectrumEnd,
};

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("missing mapped column {0:?}")]
    MissingColumn(String),
    #[error("window_len and step must be positive")]
    BadWindowSpec,
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// One network flow record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowRecord {
    /// Start time, seconds (non-negative).
    pub time: u64,
    /// Duration, seconds.
    pub duration: u64,
    pub src: String,
    pub dst: String,
    /// Unmapped columns as `(column name or "col<i>", value)`.
    pub metadata: Vec<(String, String)>,
}

/// Reference to a CSV column, positional or by header name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

/// Column mapping for flow CSV files. The default follows the common flow
/// log layout `time, duration, src device, src port, dst device, dst port,
/// protocol, packets, bytes`; every position is remappable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowSchema {
    pub time: ColumnRef,
    pub duration: ColumnRef,
    pub src: ColumnRef,
    pub dst: ColumnRef,
    #[serde(default = "default_delimiter")]
    pub delimiter: u8,
    #[serde(default)]
    pub has_header: bool,
}

fn default_delimiter() -> u8 {
    b','
}

impl Default for FlowSchema {
    fn default() -> Self {
        FlowSchema {
            time: ColumnRef::Index(0),
            duration: ColumnRef::Index(1),
            src: ColumnRef::Index(2),
            dst: ColumnRef::Index(4),
            delimiter: b',',
            has_header: false,
        }
    }
}

/// Outcome counters from a parse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ParseSummary {
    pub parsed: usize,
    pub skipped: usize,
}

/// Streaming CSV parse. Malformed rows (missing fields, non-numeric time or
/// duration, empty endpoints) are counted and skipped; a mapped column that
/// cannot be resolved at all is an error naming it.
pub fn parse_flow_csv(
    reader: impl Read,
    schema: &FlowSchema,
) -> Result<(Vec<FlowRecord>, ParseSummary), FlowError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(schema.has_header)
        .flexible(true)
        .from_reader(reader);

    let headers: Vec<String> = if schema.has_header {
        rdr.headers()?
            .iter()
            .map(|s| s.trim().to_string())
            .collect()
    } else {
        Vec::new()
    };

    let resolve = |col: &ColumnRef, what: &str| -> Result<usize, FlowError> {
        match col {
            ColumnRef::Index(i) => Ok(*i),
            ColumnRef::Name(name) => {
                if !schema.has_header {
                    return Err(FlowError::MissingColumn(format!(
                        "{what} = {name:?} (no header row to resolve names)"
                    )));
                }
                headers
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| FlowError::MissingColumn(format!("{what} = {name:?}")))
            }
        }
    };
    let time_col = resolve(&schema.time, "time")?;
    let dur_col = resolve(&schema.duration, "duration")?;
    let src_col = resolve(&schema.src, "src")?;
    let dst_col = resolve(&schema.dst, "dst")?;
    if schema.has_header {
        for (col, what) in [
            (time_col, "time"),
            (dur_col, "duration"),
            (src_col, "src"),
            (dst_col, "dst"),
        ] {
            if col >= headers.len() {
                return Err(FlowError::MissingColumn(format!("{what} = column {col}")));
            }
        }
    }
    let mapped = [time_col, dur_col, src_col, dst_col];

    let mut records = Vec::new();
    let mut summary = ParseSummary::default();
    for row in rdr.records() {
        let row = row?;
        let field = |i: usize| row.get(i).map(str::trim);
        let parsed = (|| {
            let time: u64 = field(time_col)?.parse().ok()?;
            let duration: u64 = field(dur_col)?.parse().ok()?;
            let src = field(src_col)?;
            let dst = field(dst_col)?;
            if src.is_empty() || dst.is_empty() {
                return None;
            }
            let metadata = row
                .iter()
                .enumerate()
                .filter(|(i, _)| !mapped.contains(i))
                .map(|(i, v)| {
                    let key = headers.get(i).cloned().unwrap_or_else(|| format!("col{i}"));
                    (key, v.to_string())
                })
                .collect();
            Some(FlowRecord {
                time,
                duration,
                src: src.to_string(),
                dst: dst.to_string(),
                metadata,
            })
        })();
        match parsed {
            Some(r) => {
                records.push(r);
                summary.parsed += 1;
            }
            None => summary.skipped += 1,
        }
    }
    Ok((records, summary))
}

/// Windowing parameters: length, step, and the half-open time range
/// `[start, end)` of window starts (derived from the records when absent).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub window_len: u64,
    pub step: u64,
    pub range: Option<(u64, u64)>,
}

impl WindowSpec {
    pub fn new(window_len: u64, step: u64) -> WindowSpec {
        WindowSpec {
            window_len,
            step,
            range: None,
        }
    }
}

/// A time-ordered sequence of graphs, one per window.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalGraphSequence {
    starts: Vec<u64>,
    graphs: Vec<Graph>,
}

impl TemporalGraphSequence {
    /// Builds from `(window start, graph)` pairs; starts must be strictly
    /// increasing.
    pub fn new(starts: Vec<u64>, graphs: Vec<Graph>) -> TemporalGraphSequence {
        assert_eq!(starts.len(), graphs.len());
        assert!(
            starts.windows(2).all(|w| w[0] < w[1]),
            "window starts must increase"
        );
        TemporalGraphSequence { starts, graphs }
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn start(&self, i: usize) -> u64 {
        self.starts[i]
    }

    pub fn graph(&self, i: usize) -> &Graph {
        &self.graphs[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &Graph)> {
        self.starts.iter().copied().zip(self.graphs.iter())
    }

    /// Union of vertex labels across all windows, in first-seen order.
    pub fn label_universe(&self) -> Vec<String> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for g in &self.graphs {
            for label in g.labels() {
                if seen.insert(label.clone()) {
                    out.push(label.clone());
                }
            }
        }
        out
    }
}

/// Buckets records into windows and builds one deduplicated graph per
/// window. A record lands in every window whose half-open interval meets
/// the record's closed interval `[time, time + duration]`.
pub fn window_graphs(
    records: &[FlowRecord],
    spec: &WindowSpec,
) -> Result<TemporalGraphSequence, FlowError> {
    if spec.window_len == 0 || spec.step == 0 {
        return Err(FlowError::BadWindowSpec);
    }
    let (start, end) = match spec.range {
        Some(r) => r,
        None => {
            if records.is_empty() {
                return Ok(TemporalGraphSequence::new(Vec::new(), Vec::new()));
            }
            let lo = records.iter().map(|r| r.time).min().unwrap();
            let hi = records.iter().map(|r| r.time + r.duration).max().unwrap();
            (lo, hi + 1)
        }
    };
    if start >= end {
        return Ok(TemporalGraphSequence::new(Vec::new(), Vec::new()));
    }
    let window_count = ((end - 1 - start) / spec.step + 1) as usize;
    let mut edges_per_window: Vec<Vec<(&str, &str)>> = vec![Vec::new(); window_count];
    for r in records {
        let lo = r.time;
        let hi = r.time + r.duration;
        // window i (start + i*step) intersects [lo, hi] iff
        // start + i*step <= hi  and  start + i*step + len > lo
        if hi < start {
            continue;
        }
        let i_max = ((hi - start) / spec.step) as usize;
        let i_min = if lo < start + spec.window_len {
            0usize
        } else {
            // smallest i with start + i*step + len > lo
            ((lo - spec.window_len - start) / spec.step + 1) as usize
        };
        for i in i_min..=i_max.min(window_count - 1) {
            edges_per_window[i].push((r.src.as_str(), r.dst.as_str()));
        }
    }
    let starts: Vec<u64> = (0..window_count)
        .map(|i| start + i as u64 * spec.step)
        .collect();
    let graphs: Vec<Graph> = edges_per_window
        .into_iter()
        .map(Graph::from_edge_list)
        .collect();
    Ok(TemporalGraphSequence::new(starts, graphs))
}

/// Which vertex set each window's spectrum is computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimelineScope {
    Giant,
    Full,
}

/// Per-window extremal eigenvalues; missing values (graphs with fewer than
/// `k` available eigenvalues) are NaN sentinels, never zero.
#[derive(Debug, Clone)]
pub struct SpectralTimeline {
    pub starts: Vec<u64>,
    pub k: usize,
    /// `rows[w][j]` is the j-th reported eigenvalue of window `w`.
    pub rows: Vec<Vec<f64>>,
}

impl SpectralTimeline {
    /// CSV with header `window_start,lambda_1,...,lambda_k`; NaN cells are
    /// written as `NaN`.
    pub fn write_csv(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        write!(out, "window_start")?;
        for j in 1..=self.k {
            write!(out, ",lambda_{j}")?;
        }
        writeln!(out)?;
        for (start, row) in self.starts.iter().zip(&self.rows) {
            write!(out, "{start}")?;
            for &x in row {
                if x.is_nan() {
                    write!(out, ",NaN")?;
                } else {
                    write!(out, ",{}", crate::centrality::fmt_float(x))?;
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// JSON mirror; NaN becomes `null`.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&x| {
                        if x.is_nan() {
                            serde_json::Value::Null
                        } else {
                            serde_json::json!(x)
                        }
                    })
                    .collect()
            })
            .collect();
        serde_json::json!({ "window_starts": self.starts, "k": self.k, "rows": rows })
    }
}

/// Computes the per-window spectral timeline: the `k` largest (or, with
/// `largest = false`, the `k` smallest nontrivial) eigenvalues of the chosen
/// Laplacian on the chosen scope.
pub fn spectral_timeline(
    seq: &TemporalGraphSequence,
    k: usize,
    kind: LaplacianKind,
    scope: TimelineScope,
    largest: bool,
) -> SpectralTimeline {
    use rayon::prelude::*;
    let rows: Vec<Vec<f64>> = seq
        .graphs
        .par_iter()
        .map(|g| window_spectrum_row(g, k, kind, scope, largest))
        .collect();
    SpectralTimeline {
        starts: seq.starts.clone(),
        k,
        rows,
    }
}

fn window_spectrum_row(
    g: &Graph,
    k: usize,
    kind: LaplacianKind,
    scope: TimelineScope,
    largest: bool,
) -> Vec<f64> {
    let mut row = vec![f64::NAN; k];
    if g.vertex_count() == 0 {
        return row;
    }
    let scoped;
    let g = match scope {
        TimelineScope::Giant => {
            scoped = g.giant_component().expect("nonempty graph").0;
            &scoped
        }
        TimelineScope::Full => g,
    };
    let n = g.vertex_count();

    // Large connected windows can use the sparse extremal solver; everything
    // else goes dense.
    if n > crate::centrality::DENSE_LIMIT && g.is_connected() {
        let end = if largest {
            SpectrumEnd::Largest
        } else {
            SpectrumEnd::SmallestNontrivial
        };
        let want = k.min(n - 1);
        if want > 0 {
            if let Ok(spec) =
                spectra::extremal_eigenpairs(g, kind, end, want, &LanczosOptions::default())
            {
                let len = spec.eigenvalues.len();
                for j in 0..want {
                    row[j] = if largest {
                        spec.eigenvalues[len - 1 - j]
                    } else {
                        spec.eigenvalues[j]
                    };
                }
                return row;
            }
        }
    }

    let matrix = match kind {
        LaplacianKind::Combinatorial => combinatorial_laplacian(g),
        LaplacianKind::Normalized => normalized_laplacian(g),
    };
    let es = match eigendecompose(&matrix) {
        Ok(es) => es,
        Err(_) => return row,
    };
    if largest {
        for j in 0..k.min(n) {
            row[j] = es.eigenvalues[n - 1 - j];
        }
    } else {
        let t = es.null_dim;
        for j in 0..k.min(n - t) {
            row[j] = es.eigenvalues[t + j];
        }
    }
    row
}
