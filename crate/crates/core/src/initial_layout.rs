//! Initial 2D layout of the KNN graph.
//!
//! A stochastic optimizer samples graph edges, pulls endpoints together
//! under the heavy-tailed affinity w(a, b) = 1 / (1 + ||a - b||^2), and
//! pushes degree-sampled negative vertices apart. This seeds the grid
//! assignment stage; an externally computed layout file can be used
//! instead via [`load_or_fit`].

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset_io::{read_layout, Layout};
use crate::error::{Error, Result};
use crate::knn_graph::KnnGraph;
use crate::{derive_seed, splitmix64};

/// O(1) sampler over vertices with probability proportional to
/// deg(v)^(3/4) (Walker alias table). Isolated vertices get a tiny
/// epsilon weight so sampling stays well-defined.
#[derive(Debug, Clone)]
pub struct DegreeSampler {
    weights: Vec<f64>,
    prob: Vec<f64>,
    alias: Vec<u32>,
    rng: ChaCha8Rng,
}

const ISOLATED_WEIGHT: f64 = 1e-12;

impl DegreeSampler {
    /// Build from explicit degrees.
    pub fn from_degrees(degrees: &[usize], rng_seed: u64) -> Self {
        let weights: Vec<f64> = degrees
            .iter()
            .map(|&d| if d == 0 { ISOLATED_WEIGHT } else { (d as f64).powf(0.75) })
            .collect();
        Self::from_weights(weights, rng_seed)
    }

    fn from_weights(weights: Vec<f64>, rng_seed: u64) -> Self {
        let n = weights.len();
        assert!(n > 0, "sampler needs at least one vertex");
        let total: f64 = weights.iter().sum();
        // Vose alias construction.
        let mut prob: Vec<f64> = weights.iter().map(|w| w * n as f64 / total).collect();
        let mut alias = vec![0u32; n];
        let mut small: Vec<u32> = Vec::new();
        let mut large: Vec<u32> = Vec::new();
        for (i, p) in prob.iter().enumerate() {
            if *p < 1.0 {
                small.push(i as u32);
            } else {
                large.push(i as u32);
            }
        }
        while let (Some(s), Some(l)) = (small.pop(), large.pop()) {
            alias[s as usize] = l;
            prob[l as usize] = (prob[l as usize] + prob[s as usize]) - 1.0;
            if prob[l as usize] < 1.0 {
                small.push(l);
            } else {
                large.push(l);
            }
        }
        // Leftovers are 1.0 up to rounding.
        for i in small.into_iter().chain(large) {
            prob[i as usize] = 1.0;
        }
        DegreeSampler { weights, prob, alias, rng: ChaCha8Rng::seed_from_u64(rng_seed) }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Draw one vertex (with replacement) from the internal RNG stream.
    pub fn sample(&mut self) -> u32 {
        let i = self.rng.random_range(0..self.weights.len());
        if self.rng.random::<f64>() < self.prob[i] {
            i as u32
        } else {
            self.alias[i]
        }
    }

    /// Draw one vertex using the provided RNG.
    pub fn sample_with(&self, rng: &mut impl Rng) -> u32 {
        let i = rng.random_range(0..self.weights.len());
        if rng.random::<f64>() < self.prob[i] {
            i as u32
        } else {
            self.alias[i]
        }
    }
}

/// Build the deg^(3/4) sampler for a graph.
pub fn build_degree_sampler(graph: &KnnGraph, rng_seed: u64) -> DegreeSampler {
    let degrees: Vec<usize> = (0..graph.vertex_count() as u32).map(|v| graph.degree(v)).collect();
    DegreeSampler::from_degrees(&degrees, rng_seed)
}

/// Parameters of the stochastic layout optimizer.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct LayoutParams {
    /// Total number of edge samples; `None` means 100 * |E|.
    pub total_samples: Option<u64>,
    /// Initial learning rate.
    pub rho0: f64,
    /// Negative samples per edge sample.
    pub neg_samples: usize,
    /// Unified weight of negative edges.
    pub gamma: f64,
    pub rng_seed: u64,
    /// Worker threads; only 1 is bit-deterministic.
    pub workers: usize,
}

impl Default for LayoutParams {
    fn default() -> Self {
        LayoutParams { total_samples: None, rho0: 1.0, neg_samples: 5, gamma: 7.0, rng_seed: 0, workers: 1 }
    }
}

impl LayoutParams {
    fn validate(&self) -> Result<()> {
        if self.rho0 <= 0.0 {
            return Err(Error::Param("rho0 must be > 0".into()));
        }
        if self.gamma < 0.0 {
            return Err(Error::Param("gamma must be >= 0".into()));
        }
        if let Some(t) = self.total_samples {
            if t < 1 {
                return Err(Error::Param("total sample count must be >= 1".into()));
            }
        }
        Ok(())
    }
}

/// Learning-rate schedule: rho_t = rho0 * (1 - t/T).
pub fn learning_rate(rho0: f64, t: u64, total: u64) -> f64 {
    rho0 * (1.0 - t as f64 / total as f64)
}

const GRADIENT_CLIP: f64 = 5.0;

fn clip(g: f64) -> f64 {
    g.clamp(-GRADIENT_CLIP, GRADIENT_CLIP)
}

/// One optimizer step: pull `mover` toward `anchor`, push it away from
/// up to `neg_samples` degree-sampled non-neighbors of `anchor`.
#[inline]
fn layout_step<F, G>(
    read: &F,
    write: &G,
    graph: &KnnGraph,
    sampler: &DegreeSampler,
    anchor: u32,
    mover: u32,
    params: &LayoutParams,
    rho: f64,
    rng: &mut ChaCha8Rng,
) where
    F: Fn(usize) -> [f64; 2],
    G: Fn(usize, [f64; 2]),
{
    let pa = read(anchor as usize);
    let pm = read(mover as usize);
    let dx = pm[0] - pa[0];
    let dy = pm[1] - pa[1];
    let r2 = dx * dx + dy * dy;
    // Attraction: gradient of -log w with w = 1/(1+r^2).
    let g = 2.0 / (1.0 + r2);
    let mut mx = pm[0] - rho * clip(g * dx);
    let mut my = pm[1] - rho * clip(g * dy);

    let adjacency = graph.adjacency(anchor);
    for _ in 0..params.neg_samples {
        let mut neg = None;
        for _ in 0..32 {
            let candidate = sampler.sample_with(rng);
            if candidate == anchor || candidate == mover {
                continue;
            }
            if adjacency.iter().any(|e| e.0 == candidate) {
                continue;
            }
            neg = Some(candidate);
            break;
        }
        let Some(neg) = neg else { continue };
        let pn = read(neg as usize);
        let nx = mx - pn[0];
        let ny = my - pn[1];
        let nr2 = nx * nx + ny * ny;
        if nr2 < 1e-12 {
            // Coincident points give no direction; skip.
            continue;
        }
        // Repulsion: gradient of -gamma * log(1 - w).
        let g = 2.0 * params.gamma / (nr2 * (1.0 + nr2));
        mx += rho * clip(g * nx);
        my += rho * clip(g * ny);
    }
    write(mover as usize, [mx, my]);
}

/// Fit the initial layout by stochastic edge sampling.
///
/// With `workers == 1` the result is a pure function of the seed. With
/// more workers the updates run hogwild over shared positions and
/// run-to-run output may differ; every coordinate is still finite.
pub fn fit_initial_layout(graph: &KnnGraph, params: &LayoutParams) -> Result<Layout> {
    params.validate()?;
    let n = graph.vertex_count();
    if n == 0 {
        return Err(Error::Param("graph has no vertices".into()));
    }
    let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(params.rng_seed, "layout-init"));
    let mut positions: Vec<[f64; 2]> = (0..n)
        .map(|_| [init_rng.random_range(-1.0..1.0), init_rng.random_range(-1.0..1.0)])
        .collect();

    let mut directed_edges: Vec<(u32, u32)> = Vec::with_capacity(2 * graph.edge_count());
    for (p, q, _) in graph.edges() {
        directed_edges.push((p, q));
        directed_edges.push((q, p));
    }
    if directed_edges.is_empty() {
        // No edges to sample; initialization is the layout.
        return Ok(positions.iter().enumerate().map(|(i, p)| (i as u32, *p)).collect());
    }

    let total = params.total_samples.unwrap_or(100 * graph.edge_count() as u64).max(1);
    let sampler = build_degree_sampler(graph, derive_seed(params.rng_seed, "layout-negatives"));

    if params.workers <= 1 {
        let cell = std::cell::RefCell::new(positions);
        {
            let read = |v: usize| cell.borrow()[v];
            let write = |v: usize, p: [f64; 2]| cell.borrow_mut()[v] = p;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.rng_seed, "layout-steps"));
            for t in 1..=total {
                let rho = learning_rate(params.rho0, t, total);
                let (anchor, mover) = directed_edges[rng.random_range(0..directed_edges.len())];
                layout_step(&read, &write, graph, &sampler, anchor, mover, params, rho, &mut rng);
            }
        }
        positions = cell.into_inner();
    } else {
        hogwild_fit(&mut positions, graph, &sampler, &directed_edges, params, total);
    }

    for p in &positions {
        debug_assert!(p[0].is_finite() && p[1].is_finite());
    }
    Ok(positions.iter().enumerate().map(|(i, p)| (i as u32, *p)).collect())
}

/// Asynchronous multi-worker updates over shared coordinates. Races on
/// individual f64 loads/stores are tolerated (relaxed atomics); the
/// stochastic objective does not need exact reads.
fn hogwild_fit(
    positions: &mut [[f64; 2]],
    graph: &KnnGraph,
    sampler: &DegreeSampler,
    directed_edges: &[(u32, u32)],
    params: &LayoutParams,
    total: u64,
) {
    use std::sync::atomic::{AtomicU64, Ordering};

    let shared: Vec<[AtomicU64; 2]> = positions
        .iter()
        .map(|p| [AtomicU64::new(p[0].to_bits()), AtomicU64::new(p[1].to_bits())])
        .collect();
    let workers = params.workers;
    std::thread::scope(|scope| {
        for w in 0..workers {
            let shared = &shared;
            let steps = total / workers as u64 + u64::from((w as u64) < total % workers as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(
                derive_seed(params.rng_seed, "layout-steps") ^ w as u64,
            ));
            scope.spawn(move || {
                let read = |v: usize| -> [f64; 2] {
                    [
                        f64::from_bits(shared[v][0].load(Ordering::Relaxed)),
                        f64::from_bits(shared[v][1].load(Ordering::Relaxed)),
                    ]
                };
                let write = |v: usize, p: [f64; 2]| {
                    shared[v][0].store(p[0].to_bits(), Ordering::Relaxed);
                    shared[v][1].store(p[1].to_bits(), Ordering::Relaxed);
                };
                for t in 1..=steps {
                    let rho = learning_rate(params.rho0, t, steps);
                    let (anchor, mover) = directed_edges[rng.random_range(0..directed_edges.len())];
                    layout_step(&read, &write, graph, &sampler, anchor, mover, params, rho, &mut rng);
                }
            });
        }
    });
    for (p, s) in positions.iter_mut().zip(&shared) {
        p[0] = f64::from_bits(s[0].load(std::sync::atomic::Ordering::Relaxed));
        p[1] = f64::from_bits(s[1].load(std::sync::atomic::Ordering::Relaxed));
    }
}

/// Load a layout file covering every graph vertex, or fit one.
pub fn load_or_fit(graph: &KnnGraph, layout_path: Option<&Path>, params: &LayoutParams) -> Result<Layout> {
    match layout_path {
        Some(path) => {
            let layout = read_layout(path)?;
            let missing = layout.missing_ids(graph.vertex_count());
            if !missing.is_empty() {
                return Err(Error::MissingIds(missing));
            }
            Ok(layout)
        }
        None => fit_initial_layout(graph, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset_io::{write_layout, Dataset};
    use crate::knn_graph::{build_knng, KnnGraph, NeighborList};

    fn line_graph(n: usize) -> KnnGraph {
        // n points on a line; the 1-NN graph chains them.
        let values: Vec<f32> = (0..n).map(|i| i as f32).collect();
        let data = Dataset::new(n, 1, values).unwrap();
        build_knng(&data, 1, 1, 0, 1).unwrap()
    }

    /// Two k-cliques joined by a single bridge edge.
    fn two_cliques(k: usize) -> KnnGraph {
        let lists: Vec<NeighborList> = (0..2 * k)
            .map(|i| {
                let mut cands: Vec<(u32, f64)> = (0..2 * k)
                    .filter(|&j| j != i && j / k == i / k)
                    .map(|j| (j as u32, 1.0))
                    .collect();
                if i == 0 {
                    cands.push((k as u32, 10.0));
                }
                NeighborList::from_unsorted(cands, 2 * k)
            })
            .collect();
        KnnGraph::from_neighbor_lists(&lists, k - 1)
    }

    #[test]
    fn degree_powers() {
        let s = DegreeSampler::from_degrees(&[1, 16], 0);
        assert_eq!(s.weights(), &[1.0, 8.0]);
    }

    #[test]
    fn equal_degrees_sample_uniformly() {
        let mut s = DegreeSampler::from_degrees(&[4, 4, 4, 4], 7);
        let mut counts = [0usize; 4];
        for _ in 0..40_000 {
            counts[s.sample() as usize] += 1;
        }
        for c in counts {
            assert!((c as f64 / 40_000.0 - 0.25).abs() < 0.02, "{counts:?}");
        }
    }

    #[test]
    fn million_draws_match_weights() {
        let mut s = DegreeSampler::from_degrees(&[1, 16], 12345);
        let mut count1 = 0u64;
        let total = 1_000_000u64;
        for _ in 0..total {
            if s.sample() == 1 {
                count1 += 1;
            }
        }
        let f1 = count1 as f64 / total as f64;
        assert!((f1 - 8.0 / 9.0).abs() <= 0.005, "observed {f1}");
        // Chi-square with 1 dof at alpha = 0.01.
        let e0 = total as f64 / 9.0;
        let e1 = total as f64 * 8.0 / 9.0;
        let o0 = (total - count1) as f64;
        let o1 = count1 as f64;
        let chi2 = (o0 - e0).powi(2) / e0 + (o1 - e1).powi(2) / e1;
        assert!(chi2 < 6.634896601, "chi2 {chi2}");
    }

    #[test]
    fn chi_square_over_degree_profiles() {
        // Wilson-Hilferty critical value at alpha = 0.01.
        fn chi2_crit(dof: f64) -> f64 {
            let z = 2.3263478740408408;
            dof * (1.0 - 2.0 / (9.0 * dof) + z * (2.0 / (9.0 * dof)).sqrt()).powi(3)
        }
        for (seed, degrees) in [(1u64, vec![1usize, 2, 3, 4, 5]), (2, vec![10, 10, 1]), (3, vec![7; 8])] {
            let mut s = DegreeSampler::from_degrees(&degrees, seed);
            let total = 1_000_000u64;
            let mut counts = vec![0u64; degrees.len()];
            for _ in 0..total {
                counts[s.sample() as usize] += 1;
            }
            let wsum: f64 = s.weights().iter().sum();
            let chi2: f64 = counts
                .iter()
                .zip(s.weights())
                .map(|(&o, &w)| {
                    let e = total as f64 * w / wsum;
                    (o as f64 - e).powi(2) / e
                })
                .sum();
            assert!(chi2 < chi2_crit(degrees.len() as f64 - 1.0), "profile {degrees:?}: chi2 {chi2}");
        }
    }

    #[test]
    fn isolated_vertices_get_epsilon_weight() {
        let s = DegreeSampler::from_degrees(&[0, 4], 3);
        assert_eq!(s.weights()[0], ISOLATED_WEIGHT);
        assert!(s.weights()[1] > 0.0);
    }

    #[test]
    fn rate_schedule_midpoint() {
        let total = 1000;
        assert_eq!(learning_rate(1.0, total / 2, total), 0.5);
        assert_eq!(learning_rate(2.0, 500, 1000), 1.0);
    }

    #[test]
    fn single_vertex_layout_is_initialization_only() {
        let graph = KnnGraph::from_neighbor_lists(&[NeighborList::default()], 1);
        let params = LayoutParams { rng_seed: 5, ..Default::default() };
        let a = fit_initial_layout(&graph, &params).unwrap();
        let b = fit_initial_layout(&graph, &params).unwrap();
        assert_eq!(a, b);
        let p = a.get(0).unwrap();
        assert!(p[0] >= -1.0 && p[0] <= 1.0 && p[1] >= -1.0 && p[1] <= 1.0);
    }

    #[test]
    fn deterministic_single_worker() {
        let graph = line_graph(40);
        let params = LayoutParams { total_samples: Some(5_000), rng_seed: 11, ..Default::default() };
        let a = fit_initial_layout(&graph, &params).unwrap();
        let b = fit_initial_layout(&graph, &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn coordinates_stay_finite() {
        let graph = line_graph(60);
        for workers in [1usize, 4] {
            let params = LayoutParams {
                total_samples: Some(20_000),
                rho0: 1.0,
                gamma: 7.0,
                rng_seed: 3,
                workers,
                ..Default::default()
            };
            let layout = fit_initial_layout(&graph, &params).unwrap();
            for (_, [x, y]) in layout.iter() {
                assert!(x.is_finite() && y.is_finite());
            }
        }
    }

    #[test]
    fn cliques_separate() {
        let k = 50;
        let graph = two_cliques(k);
        let n = graph.vertex_count();
        let mut ok = 0;
        for seed in 0..30u64 {
            let params = LayoutParams {
                total_samples: Some(50 * n as u64),
                rng_seed: seed,
                ..Default::default()
            };
            let layout = fit_initial_layout(&graph, &params).unwrap();
            let pos: Vec<[f64; 2]> = (0..n as u32).map(|v| layout.get(v).unwrap()).collect();
            let mut intra = 0.0;
            let mut intra_n = 0u32;
            let mut inter = 0.0;
            let mut inter_n = 0u32;
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = ((pos[i][0] - pos[j][0]).powi(2) + (pos[i][1] - pos[j][1]).powi(2)).sqrt();
                    if i / k == j / k {
                        intra += d;
                        intra_n += 1;
                    } else {
                        inter += d;
                        inter_n += 1;
                    }
                }
            }
            if intra / f64::from(intra_n) < inter / f64::from(inter_n) {
                ok += 1;
            }
        }
        assert!(ok >= 28, "cliques separated in only {ok}/30 runs");
    }

    #[test]
    fn load_or_fit_prefers_file() {
        let graph = line_graph(5);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ext.tsv");
        let external: Layout = (0..5u32).map(|i| (i, [f64::from(i), 0.5])).collect();
        write_layout(&external, &path).unwrap();
        let params = LayoutParams::default();
        let loaded = load_or_fit(&graph, Some(&path), &params).unwrap();
        assert_eq!(loaded, external);
    }

    #[test]
    fn load_or_fit_reports_missing_ids() {
        let graph = line_graph(9);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ext.tsv");
        let partial: Layout = (0..9u32).filter(|&i| i != 7).map(|i| (i, [f64::from(i), 0.0])).collect();
        write_layout(&partial, &path).unwrap();
        let err = load_or_fit(&graph, Some(&path), &LayoutParams::default()).unwrap_err();
        match err {
            Error::MissingIds(ids) => assert_eq!(ids, vec![7]),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn load_or_fit_without_path_fits() {
        let graph = line_graph(12);
        let params = LayoutParams { total_samples: Some(500), rng_seed: 21, ..Default::default() };
        let fitted = fit_initial_layout(&graph, &params).unwrap();
        let via = load_or_fit(&graph, None, &params).unwrap();
        assert_eq!(fitted, via);
    }
}
