//! Graph representation, symmetric renormalization, dataset I/O, and
//! synthetic generators.
//!
//! Graphs are undirected and stored in CSR form with each undirected edge
//! kept as two directed entries. Self-loops never appear in stored edges;
//! they are introduced only by [`normalize`] / [`identity_view`].

use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::tensor::Tensor;

#[derive(Error, Debug)]
pub enum GraphError {
    #[error("missing dataset file: {0}")]
    MissingFile(String),
    #[error("{file}:{line}: non-numeric field `{field}`")]
    NonNumeric { file: String, line: usize, field: String },
    #[error("{file}:{line}: expected {expected} fields, got {got}")]
    FieldCount { file: String, line: usize, expected: usize, got: usize },
    #[error("node id {id} out of range for {num_nodes} feature rows")]
    NodeIdOutOfRange { id: usize, num_nodes: usize },
    #[error("labels.csv has {got} rows; expected {expected} (nodes) or number of graphs")]
    LabelCount { expected: usize, got: usize },
    #[error("graph_ids.csv has {got} rows; expected {expected}")]
    GraphIdCount { expected: usize, got: usize },
    #[error("dataset has no feature rows")]
    EmptyFeatures,
    #[error("stochastic block model spec has zero total nodes")]
    EmptySbm,
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("batch of zero graphs")]
    EmptyBatch,
    #[error("feature dim mismatch in batch: {0} vs {1}")]
    FeatureDimMismatch(usize, usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Immutable undirected graph with CSR adjacency and node features.
#[derive(Debug, Clone)]
pub struct Graph {
    num_nodes: usize,
    num_edges: usize,
    csr_row_ptr: Vec<usize>,
    csr_col_idx: Vec<usize>,
    features: Tensor,
    labels: Option<Vec<i64>>,
    graph_ids: Option<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an undirected edge list. Duplicates and self-loops
    /// are dropped; each surviving edge is stored in both directions.
    pub fn from_edges(
        edges: &[(usize, usize)],
        features: Tensor,
        labels: Option<Vec<i64>>,
        graph_ids: Option<Vec<usize>>,
    ) -> Result<Self, GraphError> {
        let n = features.rows();
        if n == 0 {
            return Err(GraphError::EmptyFeatures);
        }
        let mut directed: Vec<(usize, usize)> = Vec::with_capacity(edges.len() * 2);
        for &(u, v) in edges {
            if u >= n {
                return Err(GraphError::NodeIdOutOfRange { id: u, num_nodes: n });
            }
            if v >= n {
                return Err(GraphError::NodeIdOutOfRange { id: v, num_nodes: n });
            }
            if u == v {
                continue;
            }
            directed.push((u, v));
            directed.push((v, u));
        }
        directed.sort_unstable();
        directed.dedup();

        let mut row_ptr = vec![0usize; n + 1];
        for &(u, _) in &directed {
            row_ptr[u + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx: Vec<usize> = directed.iter().map(|&(_, v)| v).collect();
        debug_assert_eq!(col_idx.len() % 2, 0);

        if let Some(ids) = &graph_ids {
            if ids.len() != n {
                return Err(GraphError::GraphIdCount { expected: n, got: ids.len() });
            }
        }
        Ok(Self {
            num_nodes: n,
            num_edges: col_idx.len() / 2,
            csr_row_ptr: row_ptr,
            csr_col_idx: col_idx,
            features,
            labels,
            graph_ids,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.csr_row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.csr_col_idx
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.csr_col_idx[self.csr_row_ptr[v]..self.csr_row_ptr[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.csr_row_ptr[v + 1] - self.csr_row_ptr[v]
    }

    pub fn features(&self) -> &Tensor {
        &self.features
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    pub fn graph_ids(&self) -> Option<&[usize]> {
        self.graph_ids.as_deref()
    }

    /// Number of graphs in a batch (1 when graph_ids is absent).
    pub fn num_graphs(&self) -> usize {
        match &self.graph_ids {
            Some(ids) => ids.iter().copied().max().map_or(1, |m| m + 1),
            None => 1,
        }
    }

    /// Undirected edge list (u < v), in CSR order.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.num_edges);
        for u in 0..self.num_nodes {
            for &v in self.neighbors(u) {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }
}

/// CSR skeleton shared by the propagation operator: includes self-loop
/// entries, per-entry coefficients, and index maps used by backward passes.
#[derive(Debug)]
pub(crate) struct AdjData {
    pub num_nodes: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    /// 1/sqrt(d_u d_v) with degrees taken in A + I; 1.0 for identity views.
    pub coeffs: Vec<f64>,
    /// Per entry: index into the edge-weight vector, `usize::MAX` for self-loops.
    pub weight_pos: Vec<usize>,
    /// Per entry: index of the transposed entry ((u,v) <-> (v,u)); self for loops.
    pub mirror: Vec<usize>,
    /// Number of weighted (non-self-loop) directed entries = 2M.
    pub num_weighted: usize,
    /// Per weight index: (row, col) of its entry.
    pub weighted_uv: Vec<(usize, usize)>,
    /// Per weight index: position of its entry in the CSR arrays.
    pub weighted_entry: Vec<usize>,
}

/// Symmetric renormalized adjacency D^{-1/2}(A+I)D^{-1/2}, or the pure
/// self-loop identity view. Cheap to clone; the payload is shared.
#[derive(Debug, Clone)]
pub struct NormalizedAdjacency {
    data: Arc<AdjData>,
}

impl NormalizedAdjacency {
    pub(crate) fn data(&self) -> &AdjData {
        &self.data
    }

    pub fn num_nodes(&self) -> usize {
        self.data.num_nodes
    }

    /// Number of directed non-self-loop entries (length of a weight vector).
    pub fn num_weighted_entries(&self) -> usize {
        self.data.num_weighted
    }

    /// Endpoints (row, col) of the weighted entry at weight index `wi`.
    pub fn weighted_endpoints(&self, wi: usize) -> (usize, usize) {
        self.data.weighted_uv[wi]
    }

    /// Coefficient of the stored entry (v, u), if present.
    pub fn coeff(&self, v: usize, u: usize) -> Option<f64> {
        let d = &self.data;
        let lo = d.row_ptr[v];
        let hi = d.row_ptr[v + 1];
        d.col_idx[lo..hi]
            .iter()
            .position(|&c| c == u)
            .map(|k| d.coeffs[lo + k])
    }

    /// Materializes the operator as a dense matrix (tests and small graphs).
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let d = &self.data;
        let n = d.num_nodes;
        let mut m = vec![vec![0.0; n]; n];
        for v in 0..n {
            for k in d.row_ptr[v]..d.row_ptr[v + 1] {
                m[v][d.col_idx[k]] = d.coeffs[k];
            }
        }
        m
    }
}

/// Builds D^{-1/2}(A+I)D^{-1/2} over the graph's CSR skeleton plus one
/// self-loop per node. Degrees are taken in A + I.
pub fn normalize(g: &Graph) -> NormalizedAdjacency {
    let n = g.num_nodes();
    let deg_hat: Vec<f64> = (0..n).map(|v| (g.degree(v) + 1) as f64).collect();
    build_adjacency(n, g, &deg_hat)
}

/// Pure self-loop view: one entry per node with coefficient exactly 1, so a
/// propagation step is the identity and the encoder degenerates into an MLP.
pub fn identity_view(g: &Graph) -> NormalizedAdjacency {
    let n = g.num_nodes();
    let data = AdjData {
        num_nodes: n,
        row_ptr: (0..=n).collect(),
        col_idx: (0..n).collect(),
        coeffs: vec![1.0; n],
        weight_pos: vec![usize::MAX; n],
        mirror: (0..n).collect(),
        num_weighted: 0,
        weighted_uv: Vec::new(),
        weighted_entry: Vec::new(),
    };
    NormalizedAdjacency { data: Arc::new(data) }
}

fn build_adjacency(n: usize, g: &Graph, deg_hat: &[f64]) -> NormalizedAdjacency {
    // Row v holds its neighbors plus the self-loop, columns sorted ascending.
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(g.col_idx().len() + n);
    row_ptr.push(0);
    for v in 0..n {
        let nbrs = g.neighbors(v);
        let mut inserted = false;
        for &u in nbrs {
            if !inserted && u > v {
                col_idx.push(v);
                inserted = true;
            }
            col_idx.push(u);
        }
        if !inserted {
            col_idx.push(v);
        }
        row_ptr.push(col_idx.len());
    }

    let entries = col_idx.len();
    let mut coeffs = vec![0.0; entries];
    let mut weight_pos = vec![usize::MAX; entries];
    let mut mirror = vec![0usize; entries];
    let mut weighted_uv = Vec::with_capacity(entries - n);
    let mut weighted_entry = Vec::with_capacity(entries - n);
    // coeff(u,v) must equal coeff(v,u) bitwise: compute both from the same
    // product ordering dhat[min] * dhat[max].
    let mut num_weighted = 0usize;
    for v in 0..n {
        for k in row_ptr[v]..row_ptr[v + 1] {
            let u = col_idx[k];
            let (lo, hi) = if u < v { (u, v) } else { (v, u) };
            coeffs[k] = 1.0 / (deg_hat[lo] * deg_hat[hi]).sqrt();
            if u != v {
                weight_pos[k] = num_weighted;
                weighted_uv.push((v, u));
                weighted_entry.push(k);
                num_weighted += 1;
            }
            mirror[k] = find_entry(&row_ptr, &col_idx, u, v);
        }
    }

    NormalizedAdjacency {
        data: Arc::new(AdjData {
            num_nodes: n,
            row_ptr,
            col_idx,
            coeffs,
            weight_pos,
            mirror,
            num_weighted,
            weighted_uv,
            weighted_entry,
        }),
    }
}

fn find_entry(row_ptr: &[usize], col_idx: &[usize], row: usize, col: usize) -> usize {
    let lo = row_ptr[row];
    let hi = row_ptr[row + 1];
    let k = col_idx[lo..hi]
        .binary_search(&col)
        .expect("symmetric CSR: mirrored entry must exist");
    lo + k
}

/// Stochastic block model spec for desk-scale benchmarks.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SbmSpec {
    pub block_sizes: Vec<usize>,
    pub p_in: f64,
    pub p_out: f64,
    pub feature_dim: usize,
    /// Magnitude of the per-community feature mean shift.
    pub feature_signal: f64,
    pub seed: u64,
}

impl SbmSpec {
    pub fn total_nodes(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        for &p in &[self.p_in, self.p_out] {
            if !(0.0..=1.0).contains(&p) {
                return Err(GraphError::BadProbability(p));
            }
        }
        if self.total_nodes() == 0 || self.block_sizes.iter().any(|&b| b == 0) {
            return Err(GraphError::EmptySbm);
        }
        Ok(())
    }
}

/// Samples an SBM graph: community labels, Bernoulli edges, and Gaussian
/// features centered on a random unit direction per community scaled by
/// `feature_signal`. Deterministic under the spec's seed.
pub fn generate_sbm(spec: &SbmSpec) -> Result<Graph, GraphError> {
    spec.validate()?;
    let n = spec.total_nodes();
    let f = spec.feature_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut community = Vec::with_capacity(n);
    for (c, &size) in spec.block_sizes.iter().enumerate() {
        community.extend(std::iter::repeat(c).take(size));
    }

    // Community means: random unit directions scaled by feature_signal.
    let mut means = Vec::with_capacity(spec.block_sizes.len());
    for _ in 0..spec.block_sizes.len() {
        let mut dir: Vec<f64> = (0..f).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        dir.iter_mut().for_each(|x| *x *= spec.feature_signal / norm);
        means.push(dir);
    }

    let mut values = Vec::with_capacity(n * f);
    for v in 0..n {
        let mean = &means[community[v]];
        for j in 0..f {
            values.push(mean[j] + rng.sample::<f64, _>(StandardNormal));
        }
    }
    let features = Tensor::from_vec(n, f, values).expect("finite gaussian features");

    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if community[u] == community[v] { spec.p_in } else { spec.p_out };
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }

    let labels: Vec<i64> = community.iter().map(|&c| c as i64).collect();
    Graph::from_edges(&edges, features, Some(labels), None)
}

/// Two-class synthetic graph-classification dataset: cycle-rich graphs
/// (label 0) versus star-rich graphs (label 1), with 1-dimensional unit
/// node features. Returns the per-graph list and graph labels.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct GraphMixSpec {
    pub num_graphs: usize,
    pub nodes_min: usize,
    pub nodes_max: usize,
    /// Extra uniformly random edges added to every graph.
    pub noise_edges: usize,
    pub seed: u64,
}

pub fn generate_graph_mix(spec: &GraphMixSpec) -> Result<(Vec<Graph>, Vec<i64>), GraphError> {
    if spec.num_graphs == 0 || spec.nodes_min < 6 || spec.nodes_max < spec.nodes_min {
        return Err(GraphError::EmptySbm);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut graphs = Vec::with_capacity(spec.num_graphs);
    let mut labels = Vec::with_capacity(spec.num_graphs);
    for gi in 0..spec.num_graphs {
        let n = rng.gen_range(spec.nodes_min..=spec.nodes_max);
        let label = (gi % 2) as i64;
        let mut edges = Vec::new();
        if label == 0 {
            // Cycle-rich: partition the nodes into cycles of length >= 3.
            let mut start = 0;
            while start < n {
                let remaining = n - start;
                let len = if remaining < 6 { remaining } else { rng.gen_range(3..=remaining.min(6)) };
                let len = len.max(3).min(remaining);
                for i in 0..len {
                    edges.push((start + i, start + (i + 1) % len));
                }
                start += len;
            }
        } else {
            // Star-rich: partition the nodes into stars of >= 3 leaves.
            let mut start = 0;
            while start < n {
                let remaining = n - start;
                let size = if remaining < 8 { remaining } else { rng.gen_range(4..=remaining.min(7)) };
                let size = size.max(4).min(remaining);
                for leaf in 1..size {
                    edges.push((start, start + leaf));
                }
                start += size;
            }
        }
        for _ in 0..spec.noise_edges {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u != v {
                edges.push((u, v));
            }
        }
        let features = Tensor::filled(n, 1, 1.0);
        graphs.push(Graph::from_edges(&edges, features, None, None)?);
        labels.push(label);
    }
    Ok((graphs, labels))
}

/// Disjoint union with node-id offsets; populates graph_ids and collects
/// per-graph labels when every input carries exactly one label set.
pub fn batch_graphs(graphs: &[Graph]) -> Result<Graph, GraphError> {
    if graphs.is_empty() {
        return Err(GraphError::EmptyBatch);
    }
    let f = graphs[0].feature_dim();
    for g in graphs {
        if g.feature_dim() != f {
            return Err(GraphError::FeatureDimMismatch(f, g.feature_dim()));
        }
    }
    let total_nodes: usize = graphs.iter().map(|g| g.num_nodes()).sum();
    let mut edges = Vec::new();
    let mut values = Vec::with_capacity(total_nodes * f);
    let mut graph_ids = Vec::with_capacity(total_nodes);
    let mut offset = 0usize;
    for (gi, g) in graphs.iter().enumerate() {
        for (u, v) in g.undirected_edges() {
            edges.push((u + offset, v + offset));
        }
        values.extend_from_slice(g.features().data());
        graph_ids.extend(std::iter::repeat(gi).take(g.num_nodes()));
        offset += g.num_nodes();
    }
    let features = Tensor::from_vec(total_nodes, f, values).expect("finite batched features");
    Graph::from_edges(&edges, features, None, Some(graph_ids))
}

/// Splits a batched graph back into its member graphs (inverse of
/// [`batch_graphs`] up to node-id offsets). A graph without graph_ids is
/// returned whole.
pub fn split_graphs(batched: &Graph) -> Vec<Graph> {
    let Some(ids) = batched.graph_ids() else {
        return vec![batched.clone()];
    };
    let num_graphs = batched.num_graphs();
    let f = batched.feature_dim();
    let mut node_lists: Vec<Vec<usize>> = vec![Vec::new(); num_graphs];
    for (v, &gi) in ids.iter().enumerate() {
        node_lists[gi].push(v);
    }
    let mut local = vec![0usize; batched.num_nodes()];
    for nodes in &node_lists {
        for (i, &v) in nodes.iter().enumerate() {
            local[v] = i;
        }
    }
    let mut out = Vec::with_capacity(num_graphs);
    for nodes in &node_lists {
        let mut values = Vec::with_capacity(nodes.len() * f);
        for &v in nodes {
            values.extend_from_slice(batched.features().row(v));
        }
        let mut edges = Vec::new();
        for &v in nodes {
            for &u in batched.neighbors(v) {
                if v < u {
                    edges.push((local[v], local[u]));
                }
            }
        }
        let features = Tensor::from_vec(nodes.len(), f, values).expect("finite features");
        out.push(Graph::from_edges(&edges, features, None, None).expect("valid subgraph"));
    }
    out
}

// ---------------------------------------------------------------------------
// Dataset directory I/O: edges.csv, features.csv, labels.csv, graph_ids.csv
// ---------------------------------------------------------------------------

fn read_lines(path: &Path) -> Result<Vec<String>, GraphError> {
    let text = std::fs::read_to_string(path)
        .map_err(|_| GraphError::MissingFile(path.display().to_string()))?;
    Ok(text
        .lines()
        .map(|l| l.trim_end_matches('\r').to_string())
        .filter(|l| !l.trim().is_empty())
        .collect())
}

fn parse_field<T: std::str::FromStr>(
    field: &str,
    file: &str,
    line: usize,
) -> Result<T, GraphError> {
    field.trim().parse::<T>().map_err(|_| GraphError::NonNumeric {
        file: file.to_string(),
        line,
        field: field.trim().to_string(),
    })
}

/// Loads a dataset directory. `features.csv` defines N; edges are
/// deduplicated and symmetrized; file self-loops are dropped.
pub fn load_graph(dir: &Path) -> Result<Graph, GraphError> {
    let feat_path = dir.join("features.csv");
    let feat_lines = read_lines(&feat_path)?;
    if feat_lines.is_empty() {
        return Err(GraphError::EmptyFeatures);
    }
    let f = feat_lines[0].split(',').count();
    let mut values = Vec::with_capacity(feat_lines.len() * f);
    for (i, line) in feat_lines.iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != f {
            return Err(GraphError::FieldCount {
                file: "features.csv".into(),
                line: i + 1,
                expected: f,
                got: fields.len(),
            });
        }
        for field in fields {
            values.push(parse_field::<f64>(field, "features.csv", i + 1)?);
        }
    }
    let n = feat_lines.len();
    let features = Tensor::from_vec(n, f, values)
        .map_err(|_| GraphError::NonNumeric {
            file: "features.csv".into(),
            line: 0,
            field: "non-finite value".into(),
        })?;

    let edge_lines = read_lines(&dir.join("edges.csv"))?;
    let mut edges = Vec::with_capacity(edge_lines.len());
    for (i, line) in edge_lines.iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            return Err(GraphError::FieldCount {
                file: "edges.csv".into(),
                line: i + 1,
                expected: 2,
                got: fields.len(),
            });
        }
        let u: usize = parse_field(fields[0], "edges.csv", i + 1)?;
        let v: usize = parse_field(fields[1], "edges.csv", i + 1)?;
        edges.push((u, v));
    }

    let graph_ids = {
        let path = dir.join("graph_ids.csv");
        if path.exists() {
            let lines = read_lines(&path)?;
            if lines.len() != n {
                return Err(GraphError::GraphIdCount { expected: n, got: lines.len() });
            }
            let mut ids = Vec::with_capacity(n);
            for (i, line) in lines.iter().enumerate() {
                ids.push(parse_field::<usize>(line, "graph_ids.csv", i + 1)?);
            }
            Some(ids)
        } else {
            None
        }
    };

    let labels = {
        let path = dir.join("labels.csv");
        if path.exists() {
            let lines = read_lines(&path)?;
            let num_graphs = graph_ids
                .as_ref()
                .map(|ids| ids.iter().copied().max().map_or(1, |m| m + 1));
            let ok = lines.len() == n || num_graphs == Some(lines.len());
            if !ok {
                return Err(GraphError::LabelCount { expected: n, got: lines.len() });
            }
            let mut ls = Vec::with_capacity(lines.len());
            for (i, line) in lines.iter().enumerate() {
                ls.push(parse_field::<i64>(line, "labels.csv", i + 1)?);
            }
            Some(ls)
        } else {
            None
        }
    };

    Graph::from_edges(&edges, features, labels, graph_ids)
}

/// Writes a dataset directory in the layout [`load_graph`] reads.
pub fn save_graph(g: &Graph, labels: Option<&[i64]>, dir: &Path) -> Result<(), GraphError> {
    std::fs::create_dir_all(dir)?;
    let mut edges = String::new();
    for (u, v) in g.undirected_edges() {
        edges.push_str(&format!("{},{}\n", u, v));
    }
    std::fs::write(dir.join("edges.csv"), edges)?;

    let mut feats = String::new();
    for v in 0..g.num_nodes() {
        let row: Vec<String> = g.features().row(v).iter().map(|x| x.to_string()).collect();
        feats.push_str(&row.join(","));
        feats.push('\n');
    }
    std::fs::write(dir.join("features.csv"), feats)?;

    let label_rows = labels.or(g.labels());
    if let Some(ls) = label_rows {
        let body: String = ls.iter().map(|l| format!("{}\n", l)).collect();
        std::fs::write(dir.join("labels.csv"), body)?;
    }
    if let Some(ids) = g.graph_ids() {
        let body: String = ids.iter().map(|i| format!("{}\n", i)).collect();
        std::fs::write(dir.join("graph_ids.csv"), body)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        // 0 - 1 - 2
        let features = Tensor::identity(3);
        Graph::from_edges(&[(0, 1), (1, 2)], features, None, None).unwrap()
    }

    #[test]
    fn path_graph_csr_matches_hand_construction() {
        let g = path3();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.num_edges(), 2);
        assert_eq!(g.row_ptr(), &[0, 1, 3, 4]);
        assert_eq!(g.col_idx(), &[1, 0, 2, 1]);
    }

    #[test]
    fn duplicate_and_reversed_edges_dedup() {
        let features = Tensor::identity(2);
        let g = Graph::from_edges(&[(0, 1), (1, 0), (0, 1)], features, None, None).unwrap();
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn self_loops_dropped_on_construction() {
        let features = Tensor::identity(2);
        let g = Graph::from_edges(&[(0, 0), (0, 1)], features, None, None).unwrap();
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.neighbors(0), &[1]);
    }

    #[test]
    fn degree_equals_col_idx_occurrences() {
        let spec = SbmSpec {
            block_sizes: vec![5, 5],
            p_in: 0.8,
            p_out: 0.3,
            feature_dim: 3,
            feature_signal: 1.0,
            seed: 11,
        };
        let g = generate_sbm(&spec).unwrap();
        for u in 0..g.num_nodes() {
            let occurrences = g.col_idx().iter().filter(|&&c| c == u).count();
            assert_eq!(g.degree(u), occurrences);
        }
    }

    #[test]
    fn normalize_path_coefficients() {
        let g = path3();
        let adj = normalize(&g);
        // d_hat = (2, 3, 2)
        let c01 = adj.coeff(0, 1).unwrap();
        assert!((c01 - 1.0 / 6.0f64.sqrt()).abs() < 1e-15);
        assert!((c01 - 0.408248).abs() < 1e-6);
        assert_eq!(adj.coeff(1, 0).unwrap().to_bits(), c01.to_bits());
        assert!((adj.coeff(1, 1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn normalize_matches_dense_formula() {
        // Dense oracle: D^{-1/2} (A+I) D^{-1/2} assembled explicitly.
        let spec = SbmSpec {
            block_sizes: vec![4, 4],
            p_in: 0.9,
            p_out: 0.2,
            feature_dim: 2,
            feature_signal: 0.5,
            seed: 3,
        };
        let g = generate_sbm(&spec).unwrap();
        let n = g.num_nodes();
        let mut a = vec![vec![0.0; n]; n];
        for u in 0..n {
            a[u][u] = 1.0;
            for &v in g.neighbors(u) {
                a[u][v] = 1.0;
            }
        }
        let deg: Vec<f64> = (0..n).map(|u| a[u].iter().sum()).collect();
        let mut expected = vec![vec![0.0; n]; n];
        for u in 0..n {
            for v in 0..n {
                expected[u][v] = a[u][v] / (deg[u] * deg[v]).sqrt();
            }
        }
        let dense = normalize(&g).to_dense();
        for u in 0..n {
            for v in 0..n {
                assert!((dense[u][v] - expected[u][v]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn normalize_is_pure() {
        let g = path3();
        let a = normalize(&g);
        let b = normalize(&g);
        for (x, y) in a.data().coeffs.iter().zip(&b.data().coeffs) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn isolated_node_self_loop_coeff_is_one() {
        let features = Tensor::identity(1);
        let g = Graph::from_edges(&[], features, None, None).unwrap();
        let adj = normalize(&g);
        assert_eq!(adj.coeff(0, 0), Some(1.0));
    }

    #[test]
    fn edgeless_graph_normalizes_to_identity() {
        let features = Tensor::identity(4);
        let g = Graph::from_edges(&[], features, None, None).unwrap();
        let dense = normalize(&g).to_dense();
        for u in 0..4 {
            for v in 0..4 {
                assert_eq!(dense[u][v], if u == v { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn identity_view_is_all_unit_self_loops() {
        let g = path3();
        let idv = identity_view(&g);
        assert_eq!(idv.data().col_idx, vec![0, 1, 2]);
        assert_eq!(idv.data().coeffs, vec![1.0, 1.0, 1.0]);
        assert_eq!(idv.num_weighted_entries(), 0);
    }

    #[test]
    fn sbm_extreme_probabilities() {
        let spec = SbmSpec {
            block_sizes: vec![3, 3],
            p_in: 1.0,
            p_out: 0.0,
            feature_dim: 2,
            feature_signal: 1.0,
            seed: 5,
        };
        let g = generate_sbm(&spec).unwrap();
        assert_eq!(g.num_edges(), 6); // two disjoint triangles
        let edgeless = generate_sbm(&SbmSpec { p_in: 0.0, ..spec.clone() }).unwrap();
        assert_eq!(edgeless.num_edges(), 0);
    }

    #[test]
    fn sbm_is_deterministic() {
        let spec = SbmSpec {
            block_sizes: vec![6, 6],
            p_in: 0.5,
            p_out: 0.1,
            feature_dim: 4,
            feature_signal: 1.0,
            seed: 42,
        };
        let a = generate_sbm(&spec).unwrap();
        let b = generate_sbm(&spec).unwrap();
        assert_eq!(a.col_idx(), b.col_idx());
        assert_eq!(a.features().data(), b.features().data());
        assert_eq!(a.labels(), b.labels());
    }

    #[test]
    fn batch_two_small_graphs() {
        let g1 = Graph::from_edges(&[(0, 1)], Tensor::identity(2), None, None).unwrap();
        let g2 = Graph::from_edges(&[(0, 1)], Tensor::identity(2), None, None).unwrap();
        let b = batch_graphs(&[g1.clone(), g2]).unwrap();
        assert_eq!(b.num_nodes(), 4);
        assert_eq!(b.graph_ids(), Some(&[0, 0, 1, 1][..]));
        assert_eq!(b.num_edges(), 2);

        let single = batch_graphs(&[g1.clone()]).unwrap();
        assert_eq!(single.col_idx(), g1.col_idx());
        assert_eq!(single.graph_ids(), Some(&[0, 0][..]));
    }

    #[test]
    fn batch_triangle_and_path() {
        let tri =
            Graph::from_edges(&[(0, 1), (1, 2), (0, 2)], Tensor::identity(3), None, None).unwrap();
        let path = path3();
        let b = batch_graphs(&[tri, path]).unwrap();
        assert_eq!(b.num_edges(), 5);
        assert_eq!(b.row_ptr().len(), 7);
        // Hand-built CSR of the disjoint union.
        assert_eq!(b.row_ptr(), &[0, 2, 4, 6, 7, 9, 10]);
        assert_eq!(b.col_idx(), &[1, 2, 0, 2, 0, 1, 4, 3, 5, 4]);
    }

    #[test]
    fn batch_errors() {
        assert!(matches!(batch_graphs(&[]), Err(GraphError::EmptyBatch)));
        let g1 = Graph::from_edges(&[], Tensor::identity(2), None, None).unwrap();
        let g2 = Graph::from_edges(&[], Tensor::identity(3), None, None).unwrap();
        assert!(matches!(
            batch_graphs(&[g1, g2]),
            Err(GraphError::FeatureDimMismatch(2, 3))
        ));
    }

    #[test]
    fn split_inverts_batch() {
        let g1 = Graph::from_edges(&[(0, 1), (1, 2)], Tensor::identity(3), None, None).unwrap();
        let g2 = Graph::from_edges(&[(0, 1)], Tensor::filled(2, 3, 0.5), None, None).unwrap();
        let b = batch_graphs(&[g1.clone(), g2.clone()]).unwrap();
        let parts = split_graphs(&b);
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].col_idx(), g1.col_idx());
        assert_eq!(parts[1].features().data(), g2.features().data());
    }

    #[test]
    fn load_graph_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("edges.csv"), "0,1\n1,2\n").unwrap();
        std::fs::write(dir.path().join("features.csv"), "1.0,0.0\n0.0,1.0\n1.0,1.0\n").unwrap();
        std::fs::write(dir.path().join("labels.csv"), "0\n0\n1\n").unwrap();
        let g = load_graph(dir.path()).unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.num_edges(), 2);
        assert_eq!(g.row_ptr(), &[0, 1, 3, 4]);
        assert_eq!(g.labels(), Some(&[0, 0, 1][..]));
    }

    #[test]
    fn load_graph_single_node_no_edges() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("edges.csv"), "").unwrap();
        std::fs::write(dir.path().join("features.csv"), "0.5\n").unwrap();
        let g = load_graph(dir.path()).unwrap();
        assert_eq!(g.num_nodes(), 1);
        assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn load_graph_symmetrization_dedups() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("edges.csv"), "0,1\n1,0\n").unwrap();
        std::fs::write(dir.path().join("features.csv"), "1.0\n2.0\n").unwrap();
        let g = load_graph(dir.path()).unwrap();
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn load_graph_errors() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_graph(dir.path()), Err(GraphError::MissingFile(_))));

        std::fs::write(dir.path().join("features.csv"), "1.0\n2.0\n").unwrap();
        std::fs::write(dir.path().join("edges.csv"), "0,5\n").unwrap();
        assert!(matches!(
            load_graph(dir.path()),
            Err(GraphError::NodeIdOutOfRange { id: 5, num_nodes: 2 })
        ));

        std::fs::write(dir.path().join("edges.csv"), "0,x\n").unwrap();
        assert!(matches!(load_graph(dir.path()), Err(GraphError::NonNumeric { .. })));
    }

    #[test]
    fn save_then_load_preserves_structure() {
        let spec = SbmSpec {
            block_sizes: vec![4, 4],
            p_in: 0.7,
            p_out: 0.1,
            feature_dim: 3,
            feature_signal: 1.0,
            seed: 9,
        };
        let g = generate_sbm(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_graph(&g, None, dir.path()).unwrap();
        let loaded = load_graph(dir.path()).unwrap();
        assert_eq!(loaded.col_idx(), g.col_idx());
        assert_eq!(loaded.labels(), g.labels());
        for (a, b) in loaded.features().data().iter().zip(g.features().data()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn graph_mix_generates_both_classes() {
        let spec = GraphMixSpec {
            num_graphs: 10,
            nodes_min: 10,
            nodes_max: 14,
            noise_edges: 1,
            seed: 7,
        };
        let (graphs, labels) = generate_graph_mix(&spec).unwrap();
        assert_eq!(graphs.len(), 10);
        assert_eq!(labels.iter().filter(|&&l| l == 0).count(), 5);
        for g in &graphs {
            assert_eq!(g.feature_dim(), 1);
            assert!(g.num_edges() > 0);
            assert!(g.features().data().iter().all(|&x| x == 1.0));
        }
        let (again, _) = generate_graph_mix(&spec).unwrap();
        assert_eq!(graphs[3].col_idx(), again[3].col_idx());
    }
}
