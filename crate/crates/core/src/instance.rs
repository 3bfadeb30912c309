//! Assignment sub-instance construction.
//!
//! Seeds are drawn without replacement with probability proportional to
//! deg^(3/4); a seed and its graph neighbors induce a 50x50 grid over
//! their bounding box in the initial layout; static flows come from
//! mutual reachability distances (the max of both endpoints' core
//! distances and their layout distance). A completion pass over vertices
//! missed by the first round guarantees full coverage.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset_io::Layout;
use crate::error::{Error, Result};
use crate::initial_layout::DegreeSampler;
use crate::knn_graph::KnnGraph;
use crate::mqap::{dist2, static_flow, GridSpec, MqapInstance, GRID_SIDE};

/// Core-distance neighbor rank and per-object context for flow building.
#[derive(Debug, Clone)]
pub struct FlowContext {
    pub k_star: usize,
    /// Initial layout position per object (instance index order).
    pub positions: Vec<[f64; 2]>,
    /// Distance from each object to its k*-th nearest object within the
    /// instance; the farthest available one when fewer exist.
    pub core_distances: Vec<f64>,
}

pub const DEFAULT_K_STAR: usize = 5;

/// Mutual reachability distance with explicit core distances.
pub fn mutual_reachability(core_p: f64, core_q: f64, layout_distance: f64) -> f64 {
    core_p.max(core_q).max(layout_distance)
}

/// Draw `round(p_s * |V|)` distinct seed vertices, degree-biased.
///
/// Sampling without replacement is realized as an exponential race over
/// the sampler's weights: vertex v gets key Exp(1) / w_v and the smallest
/// keys win, which reproduces sequential degree-biased draws without the
/// unbounded rejection loop (isolated vertices carry epsilon weight, so
/// literal rejection sampling could stall for p_s near 1).
pub fn sample_seed_vertices(
    graph: &KnnGraph,
    p_s: f64,
    sampler: &DegreeSampler,
    rng_seed: u64,
) -> Result<Vec<u32>> {
    if !(p_s > 0.0 && p_s <= 1.0) {
        return Err(Error::Param(format!("p_s must be in (0, 1], got {p_s}")));
    }
    let n = graph.vertex_count();
    if sampler.len() != n {
        return Err(Error::Param("sampler size does not match graph".into()));
    }
    let target = (p_s * n as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut keys: Vec<(f64, u32)> = sampler
        .weights()
        .iter()
        .enumerate()
        .map(|(v, &w)| {
            let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
            (-u.ln() / w, v as u32)
        })
        .collect();
    keys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(keys.into_iter().take(target).map(|(_, v)| v).collect())
}

/// 50x50 grid over the bounding box of the seed's neighborhood in the
/// initial layout. 49 gaps span each axis; a degenerate axis falls back
/// to the other axis' spacing, floored at 1e-3.
pub fn induce_grid(layout: &Layout, seed: u32, neighbors: &[u32]) -> Result<GridSpec> {
    let gaps = f64::from(GRID_SIDE - 1);
    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    for &v in std::iter::once(&seed).chain(neighbors) {
        let p = layout
            .get(v)
            .ok_or_else(|| Error::Contract(format!("vertex {v} missing from the initial layout")))?;
        for axis in 0..2 {
            min[axis] = min[axis].min(p[axis]);
            max[axis] = max[axis].max(p[axis]);
        }
    }
    let width = max[0] - min[0];
    let height = max[1] - min[1];
    let sx_raw = width / gaps;
    let sy_raw = height / gaps;
    let sx = if width > 0.0 { sx_raw } else { sy_raw.max(1e-3) };
    let sy = if height > 0.0 { sy_raw } else { sx_raw.max(1e-3) };
    GridSpec::new(min[0], min[1], sx, sy, GRID_SIDE, GRID_SIDE)
}

/// Static flow matrix and per-object flow context for one object set.
///
/// Core distances are measured within the instance's object set, so the
/// cost is O(n_o^2) regardless of dataset size.
pub fn compute_flows(
    objects: &[u32],
    layout: &Layout,
    k_star: usize,
) -> Result<(Vec<f64>, FlowContext)> {
    if objects.len() < 2 {
        return Err(Error::Param("flow computation needs at least 2 objects".into()));
    }
    if k_star < 1 {
        return Err(Error::Param("k_star must be >= 1".into()));
    }
    let n = objects.len();
    let positions: Vec<[f64; 2]> = objects
        .iter()
        .map(|&v| {
            layout
                .get(v)
                .ok_or_else(|| Error::Contract(format!("vertex {v} missing from the initial layout")))
        })
        .collect::<Result<_>>()?;

    let mut pair_dist = vec![0.0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist2(positions[i], positions[j]);
            pair_dist[i * n + j] = d;
            pair_dist[j * n + i] = d;
        }
    }

    let mut core_distances = vec![0.0f64; n];
    let mut row: Vec<f64> = Vec::with_capacity(n - 1);
    for i in 0..n {
        row.clear();
        row.extend((0..n).filter(|&j| j != i).map(|j| pair_dist[i * n + j]));
        row.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let rank = k_star.min(row.len());
        core_distances[i] = row[rank - 1];
    }

    let mut flow = vec![0.0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d_mr = mutual_reachability(core_distances[i], core_distances[j], pair_dist[i * n + j]);
            let f = static_flow(d_mr);
            flow[i * n + j] = f;
            flow[j * n + i] = f;
        }
    }
    Ok((flow, FlowContext { k_star, positions, core_distances }))
}

/// Largest neighbor count per instance; the seed takes the remaining
/// grid cell.
pub const NEIGHBOR_CAP: usize = (GRID_SIDE * GRID_SIDE - 1) as usize;

/// Build the instance induced by `seed`: the seed plus its graph
/// adjacency (nearest-first, capped so everything fits the grid).
///
/// An isolated seed yields a singleton instance, which the solver stage
/// places directly at its layout position without an evolutionary run.
pub fn build_instance(
    graph: &KnnGraph,
    layout: &Layout,
    seed: u32,
    k_star: usize,
) -> Result<MqapInstance> {
    if (seed as usize) >= graph.vertex_count() {
        return Err(Error::Param(format!("seed {seed} out of range")));
    }
    let neighbors: Vec<u32> =
        graph.adjacency(seed).iter().take(NEIGHBOR_CAP).map(|e| e.0).collect();
    let grid = induce_grid(layout, seed, &neighbors)?;

    let mut objects = Vec::with_capacity(neighbors.len() + 1);
    objects.push(seed);
    objects.extend_from_slice(&neighbors);

    if objects.len() == 1 {
        let pos = layout
            .get(seed)
            .ok_or_else(|| Error::Contract(format!("vertex {seed} missing from the initial layout")))?;
        return MqapInstance::new(seed, objects, grid, vec![0.0], vec![pos], vec![0.0]);
    }

    let (flow, ctx) = compute_flows(&objects, layout, k_star)?;
    MqapInstance::new(seed, objects, grid, flow, ctx.positions, ctx.core_distances)
}

/// Vertices that appear in none of the given object sets, ascending.
pub fn missing_vertices<'a, I>(covered_sets: I, vertex_count: usize) -> Vec<u32>
where
    I: IntoIterator<Item = &'a [u32]>,
{
    let mut covered = vec![false; vertex_count];
    for set in covered_sets {
        for &v in set {
            covered[v as usize] = true;
        }
    }
    covered
        .iter()
        .enumerate()
        .filter_map(|(v, &c)| if c { None } else { Some(v as u32) })
        .collect()
}
