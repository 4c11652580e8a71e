//! CSR graph representation, loaders, synthetic generators and batching.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::Deserialize;

use crate::error::{Error, Result};

/// Adjacency structure in compressed sparse row form plus the feature
/// dimension of the vertex feature matrix.
///
/// `vertex_array` has length `V + 1`, `vertex_array[0] == 0` and
/// `vertex_array[V] == E`. The neighbors of vertex `v` live in
/// `edge_array[vertex_array[v]..vertex_array[v + 1]]`, sorted and
/// deduplicated. Edge values are implicitly 1; aggregation is unweighted
/// addition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrGraph {
    num_vertices: usize,
    vertex_array: Vec<usize>,
    edge_array: Vec<u32>,
    num_features: u64,
}

impl CsrGraph {
    /// Builds a graph from per-vertex neighbor lists. Neighbors are sorted
    /// and deduplicated; out-of-range neighbor ids are rejected.
    pub fn from_adjacency(adjacency: Vec<Vec<u32>>, num_features: u64) -> Result<Self> {
        let num_vertices = adjacency.len();
        let mut vertex_array = Vec::with_capacity(num_vertices + 1);
        let mut edge_array = Vec::new();
        vertex_array.push(0);
        for mut neighbors in adjacency {
            neighbors.sort_unstable();
            neighbors.dedup();
            for &n in &neighbors {
                if n as usize >= num_vertices {
                    return Err(Error::VertexRange {
                        id: n as u64,
                        num_vertices: num_vertices as u64,
                    });
                }
            }
            edge_array.extend_from_slice(&neighbors);
            vertex_array.push(edge_array.len());
        }
        Ok(Self {
            num_vertices,
            vertex_array,
            edge_array,
            num_features,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edge_array.len()
    }

    pub fn num_features(&self) -> u64 {
        self.num_features
    }

    pub fn vertex_array(&self) -> &[usize] {
        &self.vertex_array
    }

    pub fn edge_array(&self) -> &[u32] {
        &self.edge_array
    }

    pub fn degree(&self, v: usize) -> usize {
        self.vertex_array[v + 1] - self.vertex_array[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.num_vertices).map(|v| self.degree(v)).collect()
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.edge_array[self.vertex_array[v]..self.vertex_array[v + 1]]
    }

    /// Returns a copy with an edge `(v, v)` present for every vertex.
    /// Idempotent: self loops already present are not duplicated.
    pub fn with_self_loops(&self) -> Self {
        let adjacency: Vec<Vec<u32>> = (0..self.num_vertices)
            .map(|v| {
                let mut ns: Vec<u32> = self.neighbors(v).to_vec();
                ns.push(v as u32);
                ns
            })
            .collect();
        Self::from_adjacency(adjacency, self.num_features)
            .expect("self-loop insertion preserves validity")
    }

    pub fn with_num_features(&self, num_features: u64) -> Self {
        let mut g = self.clone();
        g.num_features = num_features;
        g
    }
}

/// Degree statistics of a graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeStats {
    pub min_degree: usize,
    pub max_degree: usize,
    pub avg_degree: f64,
    pub total_edges: usize,
}

pub fn degree_stats(g: &CsrGraph) -> DegreeStats {
    if g.num_vertices() == 0 {
        return DegreeStats {
            min_degree: 0,
            max_degree: 0,
            avg_degree: 0.0,
            total_edges: 0,
        };
    }
    let mut min = usize::MAX;
    let mut max = 0;
    for v in 0..g.num_vertices() {
        let d = g.degree(v);
        min = min.min(d);
        max = max.max(d);
    }
    let total = g.num_edges();
    DegreeStats {
        min_degree: min,
        max_degree: max,
        avg_degree: total as f64 / g.num_vertices() as f64,
        total_edges: total,
    }
}

/// Loads a whitespace-separated "src dst" edge list. `#`-prefixed lines are
/// comments. Vertex ids are renumbered to a dense 0-based range (CSR needs
/// dense indexing); duplicate edges are deduplicated.
pub fn load_edge_list<P: AsRef<Path>>(
    path: P,
    num_features: u64,
    add_self_loops: bool,
) -> Result<CsrGraph> {
    let text = std::fs::read_to_string(path)?;
    parse_edge_list(&text, num_features, add_self_loops)
}

pub fn parse_edge_list(text: &str, num_features: u64, add_self_loops: bool) -> Result<CsrGraph> {
    let mut edges: Vec<(u64, u64)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let src = it.next().ok_or_else(|| Error::EdgeList {
            line: line_no,
            msg: "missing source vertex".into(),
        })?;
        let dst = it.next().ok_or_else(|| Error::EdgeList {
            line: line_no,
            msg: "missing destination vertex".into(),
        })?;
        if it.next().is_some() {
            return Err(Error::EdgeList {
                line: line_no,
                msg: "expected exactly two fields".into(),
            });
        }
        let src: u64 = src.parse().map_err(|_| Error::EdgeList {
            line: line_no,
            msg: format!("invalid vertex id `{src}`"),
        })?;
        let dst: u64 = dst.parse().map_err(|_| Error::EdgeList {
            line: line_no,
            msg: format!("invalid vertex id `{dst}`"),
        })?;
        if src > u32::MAX as u64 || dst > u32::MAX as u64 {
            return Err(Error::VertexRange {
                id: src.max(dst),
                num_vertices: u32::MAX as u64,
            });
        }
        edges.push((src, dst));
    }

    // Renumber to dense ids in sorted order of the ids seen.
    let mut id_map: BTreeMap<u64, u32> = BTreeMap::new();
    for &(s, d) in &edges {
        id_map.entry(s).or_insert(0);
        id_map.entry(d).or_insert(0);
    }
    for (next, (_, v)) in id_map.iter_mut().enumerate() {
        *v = next as u32;
    }
    let num_vertices = id_map.len();
    let mut adjacency = vec![Vec::new(); num_vertices];
    for (s, d) in edges {
        adjacency[id_map[&s] as usize].push(id_map[&d]);
    }
    let g = CsrGraph::from_adjacency(adjacency, num_features)?;
    Ok(if add_self_loops { g.with_self_loops() } else { g })
}

/// Degree model for synthetic graph generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticModel {
    UniformRandom,
    FixedDegree,
    Skewed,
}

impl std::str::FromStr for SyntheticModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-random" => Ok(Self::UniformRandom),
            "fixed-degree" => Ok(Self::FixedDegree),
            "skewed" => Ok(Self::Skewed),
            other => Err(Error::Config(format!("unknown synthetic model `{other}`"))),
        }
    }
}

/// Generates a synthetic graph with the requested average degree.
/// Deterministic for a given seed.
///
/// `fixed-degree` gives every vertex exactly `round(avg_degree)` neighbors.
/// `uniform-random` draws per-vertex degrees from Poisson(avg_degree).
/// `skewed` draws from a truncated power law with exponent 2.0 rescaled to
/// the requested mean, producing a heavy tail of high-degree vertices.
pub fn generate_synthetic(
    num_vertices: usize,
    num_features: u64,
    avg_degree: f64,
    model: SyntheticModel,
    seed: u64,
) -> Result<CsrGraph> {
    if num_vertices == 0 {
        return Err(Error::Infeasible("V must be at least 1".into()));
    }
    if avg_degree > num_vertices as f64 {
        return Err(Error::Infeasible(format!(
            "avg_degree {avg_degree} exceeds num_vertices {num_vertices}"
        )));
    }
    if avg_degree < 0.0 {
        return Err(Error::Infeasible("avg_degree must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let degrees: Vec<usize> = match model {
        SyntheticModel::FixedDegree => {
            let d = avg_degree.round() as usize;
            vec![d; num_vertices]
        }
        SyntheticModel::UniformRandom => {
            if avg_degree == 0.0 {
                vec![0; num_vertices]
            } else {
                let poisson = Poisson::new(avg_degree)
                    .map_err(|e| Error::Infeasible(format!("bad avg_degree: {e}")))?;
                (0..num_vertices)
                    .map(|_| (poisson.sample(&mut rng) as usize).min(num_vertices))
                    .collect()
            }
        }
        SyntheticModel::Skewed => skewed_degrees(num_vertices, avg_degree, &mut rng),
    };
    let adjacency: Vec<Vec<u32>> = degrees
        .iter()
        .map(|&d| sample_distinct(num_vertices, d, &mut rng))
        .collect();
    CsrGraph::from_adjacency(adjacency, num_features)
}

/// Truncated power law with exponent 2.0: raw weights xm/u (u uniform),
/// truncated at V, then rescaled to the requested mean and rounded.
fn skewed_degrees(num_vertices: usize, avg_degree: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let raw: Vec<f64> = (0..num_vertices)
        .map(|_| {
            let u: f64 = rng.gen_range(1e-6..1.0);
            (1.0 / u).min(num_vertices as f64)
        })
        .collect();
    let sum: f64 = raw.iter().sum();
    if sum == 0.0 || avg_degree == 0.0 {
        return vec![0; num_vertices];
    }
    let scale = avg_degree * num_vertices as f64 / sum;
    raw.iter()
        .map(|w| ((w * scale).round() as usize).min(num_vertices))
        .collect()
}

/// Samples `k` distinct neighbor ids from `0..n` (self edges allowed).
fn sample_distinct(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<u32> {
    debug_assert!(k <= n);
    if k * 4 >= n {
        let mut all: Vec<u32> = (0..n as u32).collect();
        all.shuffle(rng);
        all.truncate(k);
        all
    } else {
        let mut picked = std::collections::HashSet::with_capacity(k);
        let mut out = Vec::with_capacity(k);
        while out.len() < k {
            let v = rng.gen_range(0..n) as u32;
            if picked.insert(v) {
                out.push(v);
            }
        }
        out
    }
}

/// Block-diagonal union of the first `batch_size` graphs. Vertices of graph
/// `i` are offset by the total vertex count of the preceding graphs; no
/// cross-graph edges are introduced.
pub fn batch_graphs(graphs: &[CsrGraph], batch_size: usize) -> Result<CsrGraph> {
    let take = batch_size.min(graphs.len());
    if take == 0 {
        return CsrGraph::from_adjacency(Vec::new(), 0);
    }
    let num_features = graphs[0].num_features();
    for g in &graphs[..take] {
        if g.num_features() != num_features {
            return Err(Error::Shape(format!(
                "feature count mismatch: {} vs {}",
                g.num_features(),
                num_features
            )));
        }
    }
    let mut adjacency = Vec::new();
    let mut offset: u32 = 0;
    for g in &graphs[..take] {
        for v in 0..g.num_vertices() {
            adjacency.push(g.neighbors(v).iter().map(|&n| n + offset).collect());
        }
        offset += g.num_vertices() as u32;
    }
    CsrGraph::from_adjacency(adjacency, num_features)
}

/// One row of the shipped dataset registry.
#[derive(Debug, Clone, Deserialize, PartialEq)]
pub struct DatasetDescriptor {
    pub name: String,
    pub num_graphs: u64,
    pub avg_nodes: f64,
    pub avg_edges: f64,
    pub num_features: u64,
}

#[derive(Deserialize)]
struct Registry {
    dataset: Vec<DatasetDescriptor>,
}

const REGISTRY_TOML: &str = include_str!("../../../data/datasets.toml");

/// The shipped dataset registry.
pub fn dataset_registry() -> Vec<DatasetDescriptor> {
    let reg: Registry = toml::from_str(REGISTRY_TOML).expect("bundled registry parses");
    reg.dataset
}

pub fn lookup_dataset(name: &str) -> Option<DatasetDescriptor> {
    dataset_registry()
        .into_iter()
        .find(|d| d.name.eq_ignore_ascii_case(name))
}

/// Builds a synthetic graph matching a registry row's statistics.
/// Multi-graph datasets are batched block-diagonally (`batch_size` graphs);
/// self loops are added, matching the GCN convention.
pub fn graph_from_descriptor(
    desc: &DatasetDescriptor,
    batch_size: usize,
    seed: u64,
) -> Result<CsrGraph> {
    let v = desc.avg_nodes.round().max(1.0) as usize;
    let d = (desc.avg_edges / desc.avg_nodes).min(v as f64);
    if desc.num_graphs > 1 {
        let n = batch_size.min(desc.num_graphs as usize).max(1);
        let graphs: Vec<CsrGraph> = (0..n)
            .map(|i| {
                generate_synthetic(
                    v,
                    desc.num_features,
                    d,
                    SyntheticModel::UniformRandom,
                    seed.wrapping_add(i as u64),
                )
                .map(|g| g.with_self_loops())
            })
            .collect::<Result<_>>()?;
        batch_graphs(&graphs, n)
    } else {
        generate_synthetic(v, desc.num_features, d, SyntheticModel::UniformRandom, seed)
            .map(|g| g.with_self_loops())
    }
}

/// A small five-vertex example graph with eleven edges counting the self
/// loop on every vertex. Handy as a known fixture in tests and docs.
pub fn example_graph(num_features: u64) -> CsrGraph {
    let adjacency = vec![
        vec![0, 1, 2],
        vec![1, 3],
        vec![0, 2, 4],
        vec![3],
        vec![2, 4],
    ];
    CsrGraph::from_adjacency(adjacency, num_features).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_csr_invariants(g: &CsrGraph) {
        let v = g.num_vertices();
        assert_eq!(g.vertex_array().len(), v + 1);
        assert_eq!(g.vertex_array()[0], 0);
        assert_eq!(g.vertex_array()[v], g.num_edges());
        for w in g.vertex_array().windows(2) {
            assert!(w[0] <= w[1]);
        }
        for &e in g.edge_array() {
            assert!((e as usize) < v);
        }
    }

    #[test]
    fn edge_list_with_self_loops() {
        let g = parse_edge_list("0 1\n1 0\n", 4, true).unwrap();
        assert_eq!(g.num_vertices(), 2);
        assert_eq!(g.vertex_array(), &[0, 2, 4]);
        assert_eq!(g.edge_array(), &[0, 1, 0, 1]);
        assert_csr_invariants(&g);
    }

    #[test]
    fn empty_edge_list() {
        let g = parse_edge_list("", 4, false).unwrap();
        assert_eq!(g.num_vertices(), 0);
        assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn comments_and_dedup() {
        let g = parse_edge_list("# header\n0 1\n0 1\n1 2\n", 4, false).unwrap();
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.num_edges(), 2);
    }

    #[test]
    fn malformed_line_reports_number() {
        let err = parse_edge_list("0 1\nx y\n", 4, false).unwrap_err();
        match err {
            Error::EdgeList { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn sparse_ids_are_renumbered() {
        let g = parse_edge_list("0 10\n10 20\n", 4, false).unwrap();
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.num_edges(), 2);
    }

    #[test]
    fn example_graph_has_eleven_edges() {
        let g = example_graph(8);
        let stats = degree_stats(&g);
        assert_eq!(stats.total_edges, 11);
        assert!((stats.avg_degree - 2.2).abs() < 1e-12);
        assert_csr_invariants(&g);
    }

    #[test]
    fn self_loop_insertion_is_idempotent() {
        let g = example_graph(8);
        assert_eq!(g.with_self_loops(), g);
    }

    #[test]
    fn fixed_degree_generation() {
        let g = generate_synthetic(10_000, 32, 1.0, SyntheticModel::FixedDegree, 1).unwrap();
        let stats = degree_stats(&g);
        assert_eq!(stats.min_degree, 1);
        assert_eq!(stats.max_degree, 1);
        assert_eq!(stats.total_edges, 10_000);
        assert_csr_invariants(&g);
    }

    #[test]
    fn uniform_random_hits_target_and_is_deterministic() {
        let g1 = generate_synthetic(1024, 512, 10.0, SyntheticModel::UniformRandom, 7).unwrap();
        let g2 = generate_synthetic(1024, 512, 10.0, SyntheticModel::UniformRandom, 7).unwrap();
        assert_eq!(g1, g2);
        let e = g1.num_edges() as f64;
        assert!((e - 10_240.0).abs() <= 0.05 * 10_240.0, "E = {e}");
    }

    #[test]
    fn infeasible_average_degree() {
        let err = generate_synthetic(5, 4, 6.0, SyntheticModel::FixedDegree, 0).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn skewed_has_heavy_tail() {
        let g = generate_synthetic(1024, 8, 4.0, SyntheticModel::Skewed, 3).unwrap();
        let stats = degree_stats(&g);
        assert!(stats.max_degree > 4 * stats.avg_degree.ceil() as usize);
        assert_csr_invariants(&g);
    }

    #[test]
    fn block_diagonal_batching() {
        let a = CsrGraph::from_adjacency(vec![vec![1], vec![0, 2], vec![1]], 4).unwrap();
        let b = CsrGraph::from_adjacency(vec![vec![1], vec![0]], 4).unwrap();
        let batched = batch_graphs(&[a.clone(), b], 2).unwrap();
        assert_eq!(batched.num_vertices(), 5);
        assert_eq!(batched.num_edges(), 6);
        assert_eq!(batched.neighbors(3), &[4]);
        assert_csr_invariants(&batched);

        let single = batch_graphs(std::slice::from_ref(&a), 1).unwrap();
        assert_eq!(single, a);
    }

    #[test]
    fn batching_64_copies() {
        let graphs: Vec<CsrGraph> = (0..64).map(|_| example_graph(8)).collect();
        let batched = batch_graphs(&graphs, 64).unwrap();
        assert_eq!(batched.num_vertices(), 320);
        assert_eq!(degree_stats(&batched).total_edges, 704);
    }

    #[test]
    fn batching_rejects_feature_mismatch() {
        let a = CsrGraph::from_adjacency(vec![vec![0]], 4).unwrap();
        let b = CsrGraph::from_adjacency(vec![vec![0]], 8).unwrap();
        assert!(matches!(batch_graphs(&[a, b], 2), Err(Error::Shape(_))));
    }

    #[test]
    fn registry_has_seven_rows() {
        let reg = dataset_registry();
        assert_eq!(reg.len(), 7);
        let citeseer = lookup_dataset("citeseer").unwrap();
        assert_eq!(citeseer.avg_nodes, 3327.0);
        assert_eq!(citeseer.num_features, 3703);
        let collab = lookup_dataset("collab").unwrap();
        assert_eq!(collab.num_graphs, 5000);
    }

    #[test]
    fn degree_stats_zero_graph() {
        let g = CsrGraph::from_adjacency(Vec::new(), 0).unwrap();
        let s = degree_stats(&g);
        assert_eq!(s.total_edges, 0);
        assert_eq!(s.avg_degree, 0.0);
    }
}
