//! Approximate k-nearest-neighbor graph construction.
//!
//! A forest of random-projection trees seeds per-node candidate lists,
//! which iterative neighbor-of-neighbor rounds then refine. The final
//! graph is the undirected union: edge (p,q) exists iff q is in knn(p)
//! or p is in knn(q). An exact O(n^2) builder and a recall metric serve
//! as the quality oracle for the approximate path.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rayon::prelude::*;

use crate::dataset_io::{format_g9, Dataset};
use crate::error::{Error, Result};
use crate::{derive_seed, splitmix64};

/// One node of a random-projection tree.
#[derive(Debug)]
pub enum TreeNode {
    Internal {
        /// Normalized split direction in data space.
        direction: Vec<f64>,
        /// Midpoint of the two central projections; points with projection
        /// below go left (ties resolved by id order at build time).
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf(Vec<u32>),
}

/// One built tree plus a flat id -> leaf index for O(1) co-member lookup.
#[derive(Debug)]
pub struct RpTree {
    pub root: TreeNode,
    leaves: Vec<Vec<u32>>,
    leaf_of: Vec<u32>,
}

/// Forest of random-projection trees over one dataset.
#[derive(Debug)]
pub struct RpForest {
    pub trees: Vec<RpTree>,
    pub leaf_capacity: usize,
}

fn dot(direction: &[f64], v: &[f32]) -> f64 {
    direction.iter().zip(v).map(|(d, x)| d * f64::from(*x)).sum()
}

/// Pick a normalized difference direction from two sampled points.
/// Falls back to the first axis when the node's points coincide.
fn sample_direction(data: &Dataset, ids: &[u32], rng: &mut ChaCha8Rng) -> Vec<f64> {
    for _ in 0..8 {
        let a = ids[rng.random_range(0..ids.len())];
        let b = ids[rng.random_range(0..ids.len())];
        if a == b {
            continue;
        }
        let va = data.vector(a as usize);
        let vb = data.vector(b as usize);
        let mut dir: Vec<f64> =
            va.iter().zip(vb).map(|(x, y)| f64::from(*x) - f64::from(*y)).collect();
        let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        if norm > 1e-12 {
            dir.iter_mut().for_each(|d| *d /= norm);
            return dir;
        }
    }
    let mut dir = vec![0.0; data.dim()];
    dir[0] = 1.0;
    dir
}

fn build_node(
    data: &Dataset,
    mut ids: Vec<u32>,
    leaf_capacity: usize,
    rng: &mut ChaCha8Rng,
    leaves: &mut Vec<Vec<u32>>,
    leaf_of: &mut [u32],
) -> TreeNode {
    if ids.len() <= leaf_capacity {
        let leaf_idx = leaves.len() as u32;
        for &id in &ids {
            leaf_of[id as usize] = leaf_idx;
        }
        leaves.push(ids.clone());
        return TreeNode::Leaf(ids);
    }
    let direction = sample_direction(data, &ids, rng);
    let mut projected: Vec<(f64, u32)> =
        ids.iter().map(|&id| (dot(&direction, data.vector(id as usize)), id)).collect();
    // Median split on (projection, id); the id tiebreak keeps the split
    // balanced even when many projections coincide.
    projected.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = projected.len() / 2;
    let threshold = (projected[mid - 1].0 + projected[mid].0) * 0.5;
    ids.clear();
    let left_ids: Vec<u32> = projected[..mid].iter().map(|p| p.1).collect();
    let right_ids: Vec<u32> = projected[mid..].iter().map(|p| p.1).collect();
    let left = build_node(data, left_ids, leaf_capacity, rng, leaves, leaf_of);
    let right = build_node(data, right_ids, leaf_capacity, rng, leaves, leaf_of);
    TreeNode::Internal { direction, threshold, left: Box::new(left), right: Box::new(right) }
}

/// Build `n_t` random-projection trees over the dataset.
///
/// Deterministic for a fixed seed and independent of worker count: each
/// tree draws from its own seed-derived RNG stream.
pub fn build_forest(data: &Dataset, n_t: usize, leaf_capacity: usize, rng_seed: u64) -> Result<RpForest> {
    if n_t < 1 {
        return Err(Error::Param("n_t must be >= 1".into()));
    }
    if leaf_capacity < 2 {
        return Err(Error::Param("leaf_capacity must be >= 2".into()));
    }
    let n = data.len();
    let trees: Vec<RpTree> = (0..n_t)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(rng_seed ^ t as u64));
            let mut leaves = Vec::new();
            let mut leaf_of = vec![0u32; n];
            let ids: Vec<u32> = (0..n as u32).collect();
            let root = build_node(data, ids, leaf_capacity, &mut rng, &mut leaves, &mut leaf_of);
            RpTree { root, leaves, leaf_of }
        })
        .collect();
    Ok(RpForest { trees, leaf_capacity })
}

impl RpTree {
    pub fn leaves(&self) -> &[Vec<u32>] {
        &self.leaves
    }

    pub fn leaf_co_members(&self, id: u32) -> &[u32] {
        &self.leaves[self.leaf_of[id as usize] as usize]
    }
}

/// Up to k nearest entries for one node, ascending by (distance, id).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NeighborList {
    entries: Vec<(u32, f64)>,
}

impl NeighborList {
    /// Keep the k smallest of `candidates` by (distance, id); candidates
    /// must not contain the owner itself.
    pub fn from_unsorted(mut candidates: Vec<(u32, f64)>, k: usize) -> Self {
        candidates.sort_by(|a, b| (a.1, a.0).partial_cmp(&(b.1, b.0)).unwrap());
        candidates.truncate(k);
        NeighborList { entries: candidates }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    /// Distance of the k-th (= worst stored) neighbor.
    pub fn worst_distance(&self) -> f64 {
        self.entries.last().map_or(f64::INFINITY, |e| e.1)
    }
}

/// Initial candidates for `id`: leaf co-members across all trees, minus
/// self, keeping the k closest.
pub fn forest_candidates(forest: &RpForest, data: &Dataset, id: u32, k: usize) -> NeighborList {
    let mut seen: HashSet<u32> = HashSet::new();
    let mut candidates = Vec::new();
    for tree in &forest.trees {
        for &other in tree.leaf_co_members(id) {
            if other != id && seen.insert(other) {
                candidates.push((other, data.distance(id as usize, other as usize)));
            }
        }
    }
    NeighborList::from_unsorted(candidates, k)
}

/// One neighbor-of-neighbor refinement round.
///
/// For each node the candidate pool is its current neighbors plus their
/// neighbors; the k closest survive. Retaining the current neighbors makes
/// the per-node k-th distance non-increasing across rounds.
pub fn nn_descent_round(data: &Dataset, knn_old: &[NeighborList], k: usize) -> Vec<NeighborList> {
    (0..knn_old.len())
        .into_par_iter()
        .map(|i| {
            let mut seen: HashSet<u32> = HashSet::new();
            let mut candidates: Vec<(u32, f64)> = Vec::new();
            for &(j, dist_ij) in knn_old[i].entries() {
                if seen.insert(j) {
                    candidates.push((j, dist_ij));
                }
                for &(p, _) in knn_old[j as usize].entries() {
                    if p as usize != i && seen.insert(p) {
                        candidates.push((p, data.distance(i, p as usize)));
                    }
                }
            }
            NeighborList::from_unsorted(candidates, k)
        })
        .collect()
}

/// Undirected k-nearest-neighbor graph.
///
/// Adjacency lists are sorted by (distance, id) ascending, so the nearest
/// co-member of a vertex is always `adjacency(v)[0]`.
#[derive(Debug, Clone)]
pub struct KnnGraph {
    k: usize,
    adj: Vec<Vec<(u32, f64)>>,
}

impl KnnGraph {
    /// Union of directed neighbor lists: edge (p,q) exists iff q in knn(p)
    /// or p in knn(q).
    pub fn from_neighbor_lists(lists: &[NeighborList], k: usize) -> Self {
        let n = lists.len();
        let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        let mut present: Vec<HashSet<u32>> = vec![HashSet::new(); n];
        for (i, list) in lists.iter().enumerate() {
            for &(j, d) in list.entries() {
                let (p, q) = (i as u32, j);
                if present[p as usize].insert(q) {
                    adj[p as usize].push((q, d));
                }
                if present[q as usize].insert(p) {
                    adj[q as usize].push((p, d));
                }
            }
        }
        for list in &mut adj {
            list.sort_by(|a, b| (a.1, a.0).partial_cmp(&(b.1, b.0)).unwrap());
        }
        KnnGraph { k, adj }
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    /// Neighbors of `v` sorted nearest-first.
    pub fn adjacency(&self, v: u32) -> &[(u32, f64)] {
        &self.adj[v as usize]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    /// Undirected edges with p < q, ascending.
    pub fn edges(&self) -> Vec<(u32, u32, f64)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (p, list) in self.adj.iter().enumerate() {
            for &(q, d) in list {
                if (p as u32) < q {
                    out.push((p as u32, q, d));
                }
            }
        }
        out.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        out
    }
}

/// Build the approximate KNN graph: forest seeding plus `it` refinement
/// rounds. Deterministic for a fixed seed, independent of worker count.
pub fn build_knng(data: &Dataset, n_t: usize, k: usize, it: usize, rng_seed: u64) -> Result<KnnGraph> {
    if k < 1 {
        return Err(Error::Param("k must be >= 1".into()));
    }
    if k >= data.len() {
        return Err(Error::Param(format!("k must be < n (k={k}, n={})", data.len())));
    }
    let leaf_capacity = (2 * k).max(32);
    let forest = build_forest(data, n_t, leaf_capacity, derive_seed(rng_seed, "forest"))?;
    let mut knn: Vec<NeighborList> = (0..data.len() as u32)
        .into_par_iter()
        .map(|id| forest_candidates(&forest, data, id, k))
        .collect();
    for _ in 0..it {
        knn = nn_descent_round(data, &knn, k);
    }
    Ok(KnnGraph::from_neighbor_lists(&knn, k))
}

/// Exact k-NN graph by full pairwise scan; ties broken by smaller id.
/// Intended as the oracle for modest n.
pub fn exact_knng(data: &Dataset, k: usize) -> Result<KnnGraph> {
    if k < 1 || k >= data.len() {
        return Err(Error::Param(format!("k must be in [1, n) (k={k}, n={})", data.len())));
    }
    let n = data.len();
    let lists: Vec<NeighborList> = (0..n)
        .into_par_iter()
        .map(|i| {
            let candidates: Vec<(u32, f64)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (j as u32, data.distance(i, j)))
                .collect();
            NeighborList::from_unsorted(candidates, k)
        })
        .collect();
    Ok(KnnGraph::from_neighbor_lists(&lists, k))
}

/// Mean over vertices of |adj_approx(v) ∩ adj_exact(v)| / k, capped at 1
/// per vertex. Operates on the symmetrized adjacency so that graphs
/// loaded from an edge dump compare identically to in-memory ones.
pub fn recall(approx: &KnnGraph, exact: &KnnGraph) -> f64 {
    assert_eq!(approx.vertex_count(), exact.vertex_count());
    let n = approx.vertex_count();
    if n == 0 {
        return 1.0;
    }
    let k = exact.k() as f64;
    let mut total = 0.0;
    for v in 0..n as u32 {
        let exact_ids: HashSet<u32> = exact.adjacency(v).iter().map(|e| e.0).collect();
        let hits = approx.adjacency(v).iter().filter(|e| exact_ids.contains(&e.0)).count();
        total += (hits as f64 / k).min(1.0);
    }
    total / n as f64
}

const GRAPH_DUMP_VERSION: &str = "knng-v1";

/// Write the graph as tsv `p<TAB>q<TAB>distance`, one undirected edge per
/// line with p < q, preceded by a version/header comment line.
pub fn write_graph(graph: &KnnGraph, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "# {GRAPH_DUMP_VERSION}\tn={}\tk={}", graph.vertex_count(), graph.k())
        .map_err(|e| Error::io(path, e))?;
    for (p, q, d) in graph.edges() {
        writeln!(w, "{p}\t{q}\t{}", format_g9(d)).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Read a graph dump written by [`write_graph`].
pub fn read_graph(path: &Path) -> Result<KnnGraph> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty graph file"))?;
    let header = header.map_err(|e| Error::io(path, e))?;
    let mut n: Option<usize> = None;
    let mut k: Option<usize> = None;
    let mut version_ok = false;
    if let Some(rest) = header.strip_prefix("# ") {
        for field in rest.split('\t') {
            if field == GRAPH_DUMP_VERSION {
                version_ok = true;
            } else if let Some(v) = field.strip_prefix("n=") {
                n = v.parse().ok();
            } else if let Some(v) = field.strip_prefix("k=") {
                k = v.parse().ok();
            }
        }
    }
    let (n, k) = match (version_ok, n, k) {
        (true, Some(n), Some(k)) => (n, k),
        _ => {
            return Err(Error::parse(
                path,
                1,
                format!("missing or incompatible graph header (expected '# {GRAPH_DUMP_VERSION}\\tn=..\\tk=..')"),
            ))
        }
    };
    let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for (idx, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = idx + 1;
        let mut fields = line.split('\t');
        let parse_err = || Error::parse(path, lineno, "expected 'p<TAB>q<TAB>distance'");
        let p: u32 = fields.next().and_then(|f| f.parse().ok()).ok_or_else(parse_err)?;
        let q: u32 = fields.next().and_then(|f| f.parse().ok()).ok_or_else(parse_err)?;
        let d: f64 = fields.next().and_then(|f| f.parse().ok()).ok_or_else(parse_err)?;
        if p >= q {
            return Err(Error::parse(path, lineno, format!("edges must satisfy p < q, got {p} >= {q}")));
        }
        if q as usize >= n {
            return Err(Error::parse(path, lineno, format!("vertex {q} out of range for n={n}")));
        }
        adj[p as usize].push((q, d));
        adj[q as usize].push((p, d));
    }
    for list in &mut adj {
        list.sort_by(|a, b| (a.1, a.0).partial_cmp(&(b.1, b.0)).unwrap());
    }
    Ok(KnnGraph { k, adj })
}
