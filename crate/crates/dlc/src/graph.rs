//! Simple undirected graphs with external string labels.
//!
//! Vertices are contiguous indices `0..n`; every vertex carries an opaque
//! label (an IP address, a character name, a generated id). Graph values are
//! immutable once built: the structural-edit operations ([`Graph::add_star`],
//! [`Graph::add_clique`]) return new graphs so experiments can hold the
//! before/after pair side by side.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{self, BufRead};
use std::path::Path;

use thiserror::Error;

/// Vertex index, contiguous in `0..n`.
pub type VertexId = usize;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("empty graph")]
    EmptyGraph,
    #[error("vertex index {0} out of range (n = {1})")]
    VertexOutOfRange(VertexId, usize),
    #[error("self-loop requested at vertex {0}")]
    SelfLoop(VertexId),
    #[error("degenerate clique: need at least 2 vertices, got {0}")]
    DegenerateClique(usize),
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

/// Simple undirected graph: no self-loops, no parallel edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    /// Sorted neighbor lists; `adj[u]` contains `v` iff `adj[v]` contains `u`.
    adj: Vec<Vec<VertexId>>,
    /// Vertex index to external label.
    labels: Vec<String>,
}

impl Graph {
    /// Builds a graph from labeled edges, interning labels to indices in
    /// first-seen order. Self-pairs are dropped and duplicate edges collapse.
    pub fn from_edge_list<I, S>(edges: I) -> Graph
    where
        I: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        let mut labels: Vec<String> = Vec::new();
        let mut index: HashMap<String, VertexId> = HashMap::new();
        let mut pairs: Vec<(VertexId, VertexId)> = Vec::new();
        let intern =
            |label: String, labels: &mut Vec<String>, index: &mut HashMap<String, VertexId>| {
                if let Some(&i) = index.get(&label) {
                    return i;
                }
                let i = labels.len();
                index.insert(label.clone(), i);
                labels.push(label);
                i
            };
        for (a, b) in edges {
            let u = intern(a.into(), &mut labels, &mut index);
            let v = intern(b.into(), &mut labels, &mut index);
            if u != v {
                pairs.push((u, v));
            }
        }
        Self::build(labels, &pairs)
    }

    /// Builds a graph on `n` vertices labeled by their decimal indices.
    /// Out-of-range pairs panic; self-pairs are dropped.
    pub fn from_index_edges(n: usize, edges: &[(VertexId, VertexId)]) -> Graph {
        let labels = (0..n).map(|i| i.to_string()).collect();
        for &(u, v) in edges {
            assert!(u < n && v < n, "edge ({u},{v}) out of range for n={n}");
        }
        Self::build(labels, edges)
    }

    fn build(labels: Vec<String>, pairs: &[(VertexId, VertexId)]) -> Graph {
        let n = labels.len();
        let mut adj: Vec<Vec<VertexId>> = vec![Vec::new(); n];
        for &(u, v) in pairs {
            if u == v {
                continue;
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Graph { adj, labels }
    }

    /// Reads the edge-list text format: one edge per line, two
    /// whitespace-separated labels; lines starting with `#` (and blank
    /// lines) are ignored.
    pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Graph, GraphError> {
        let file = std::fs::File::open(path)?;
        Self::read_edge_list_from(io::BufReader::new(file))
    }

    /// As [`Graph::read_edge_list`], from any reader.
    pub fn read_edge_list_from(reader: impl BufRead) -> Result<Graph, GraphError> {
        let mut pairs: Vec<(String, String)> = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(a), Some(b)) = (it.next(), it.next()) else {
                return Err(io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("edge line needs two labels: {line:?}"),
                )
                .into());
            };
            pairs.push((a.to_string(), b.to_string()));
        }
        Ok(Graph::from_edge_list(pairs))
    }

    /// Writes the edge-list text format (each edge once, `u v` with `u < v`
    /// by vertex index).
    pub fn write_edge_list(&self, out: &mut impl io::Write) -> io::Result<()> {
        for (u, v) in self.edges() {
            writeln!(out, "{} {}", self.labels[u], self.labels[v])?;
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Index of the vertex carrying `label`, if present.
    pub fn index_of(&self, label: &str) -> Option<VertexId> {
        self.labels.iter().position(|l| l == label)
    }

    /// Iterates edges as `(u, v)` pairs with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// Sum of all vertex degrees (`2|E|`), the volume of the full vertex set.
    pub fn volume(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    /// Partitions vertices into connected components via breadth-first
    /// search. Component ids are assigned in order of the smallest contained
    /// vertex index, so numbering is deterministic.
    pub fn connected_components(&self) -> ComponentPartition {
        let n = self.vertex_count();
        let mut component_id = vec![usize::MAX; n];
        let mut sizes = Vec::new();
        let mut queue = std::collections::VecDeque::new();
        for start in 0..n {
            if component_id[start] != usize::MAX {
                continue;
            }
            let id = sizes.len();
            let mut size = 0usize;
            component_id[start] = id;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                size += 1;
                for &v in &self.adj[u] {
                    if component_id[v] == usize::MAX {
                        component_id[v] = id;
                        queue.push_back(v);
                    }
                }
            }
            sizes.push(size);
        }
        ComponentPartition {
            component_id,
            sizes,
        }
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count() <= 1 || self.connected_components().sizes.len() == 1
    }

    /// Induced subgraph on the largest connected component, reindexed
    /// contiguously. Ties are broken toward the component containing the
    /// smallest original vertex index. Also returns the old-index to
    /// new-index map (`None` for vertices outside the giant component).
    pub fn giant_component(&self) -> Result<(Graph, Vec<Option<VertexId>>), GraphError> {
        if self.vertex_count() == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let parts = self.connected_components();
        // Component ids are ordered by smallest contained vertex, so the
        // first maximal-size component wins ties.
        let giant = parts
            .sizes
            .iter()
            .enumerate()
            .max_by(|(ia, sa), (ib, sb)| sa.cmp(sb).then(ib.cmp(ia)))
            .map(|(i, _)| i)
            .expect("nonempty graph has at least one component");
        let mut old_to_new = vec![None; self.vertex_count()];
        let mut keep = Vec::new();
        for v in 0..self.vertex_count() {
            if parts.component_id[v] == giant {
                old_to_new[v] = Some(keep.len());
                keep.push(v);
            }
        }
        let labels = keep.iter().map(|&v| self.labels[v].clone()).collect();
        let mut pairs = Vec::new();
        for &v in &keep {
            for &w in &self.adj[v] {
                if v < w {
                    pairs.push((old_to_new[v].unwrap(), old_to_new[w].unwrap()));
                }
            }
        }
        Ok((Graph::build(labels, &pairs), old_to_new))
    }

    /// Returns a new graph with every missing root-leaf edge added.
    pub fn add_star(&self, root: VertexId, leaves: &[VertexId]) -> Result<Graph, GraphError> {
        let n = self.vertex_count();
        if root >= n {
            return Err(GraphError::VertexOutOfRange(root, n));
        }
        for &leaf in leaves {
            if leaf >= n {
                return Err(GraphError::VertexOutOfRange(leaf, n));
            }
            if leaf == root {
                return Err(GraphError::SelfLoop(root));
            }
        }
        let mut next = self.clone();
        for &leaf in leaves {
            next.insert_edge(root, leaf);
        }
        Ok(next)
    }

    /// Returns a new graph with every pair inside `s` connected.
    pub fn add_clique(&self, s: &[VertexId]) -> Result<Graph, GraphError> {
        let n = self.vertex_count();
        if s.len() < 2 {
            return Err(GraphError::DegenerateClique(s.len()));
        }
        for &v in s {
            if v >= n {
                return Err(GraphError::VertexOutOfRange(v, n));
            }
        }
        let mut next = self.clone();
        for (i, &u) in s.iter().enumerate() {
            for &v in &s[i + 1..] {
                if u != v {
                    next.insert_edge(u, v);
                }
            }
        }
        Ok(next)
    }

    fn insert_edge(&mut self, u: VertexId, v: VertexId) {
        debug_assert_ne!(u, v);
        if let Err(pos) = self.adj[u].binary_search(&v) {
            self.adj[u].insert(pos, v);
            let pos = self.adj[v].binary_search(&u).unwrap_err();
            self.adj[v].insert(pos, u);
        }
    }

    /// Graph with vertex `v` and all its edges removed, preserving the
    /// relative order (and labels) of the remaining vertices.
    pub fn delete_vertex(&self, v: VertexId) -> Graph {
        let n = self.vertex_count();
        assert!(v < n, "vertex {v} out of range");
        let remap = |u: VertexId| if u > v { u - 1 } else { u };
        let labels = (0..n)
            .filter(|&u| u != v)
            .map(|u| self.labels[u].clone())
            .collect();
        let mut pairs = Vec::new();
        for (a, b) in self.edges() {
            if a != v && b != v {
                pairs.push((remap(a), remap(b)));
            }
        }
        Graph::build(labels, &pairs)
    }

    /// Edge list rendered as text (the on-disk format).
    pub fn to_edge_list_string(&self) -> String {
        let mut s = String::new();
        for (u, v) in self.edges() {
            let _ = writeln!(s, "{} {}", self.labels[u], self.labels[v]);
        }
        s
    }
}

/// Assignment of vertices to connected components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentPartition {
    /// `component_id[v]` is the component index of vertex `v`, contiguous
    /// from 0 in order of smallest contained vertex.
    pub component_id: Vec<usize>,
    /// Vertex count per component; sums to `n`.
    pub sizes: Vec<usize>,
}
