//! Bi-objective quadratic assignment instances over grid layouts.
//!
//! An instance holds a set of objects, a rectangular grid of candidate
//! cells, a static flow matrix derived from mutual reachability distances
//! in the seeding layout, and the cached data needed to evaluate the
//! dynamic flow, which depends on where the candidate assignment actually
//! places each object. Costs are summed over unordered object pairs; with
//! symmetric flows this is half the ordered double sum, which leaves
//! dominance relations and minimizer sets unchanged.

use crate::error::{Error, Result};

/// Rectangular grid of candidate cells.
///
/// Cell `i` sits at `(x0 + (i % cols) * sx, y0 + (i / cols) * sy)`.
/// Production instances use 50x50; tests may use smaller grids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x0: f64,
    pub y0: f64,
    pub sx: f64,
    pub sy: f64,
    pub rows: u32,
    pub cols: u32,
}

/// Standard sub-instance grid side; 50x50 = 2500 cells.
pub const GRID_SIDE: u32 = 50;

impl GridSpec {
    pub fn new(x0: f64, y0: f64, sx: f64, sy: f64, rows: u32, cols: u32) -> Result<Self> {
        if sx <= 0.0 || sy <= 0.0 {
            return Err(Error::Param(format!("grid spacing must be > 0, got sx={sx}, sy={sy}")));
        }
        if rows == 0 || cols == 0 {
            return Err(Error::Param("grid must have rows >= 1 and cols >= 1".into()));
        }
        Ok(GridSpec { x0, y0, sx, sy, rows, cols })
    }

    pub fn cell_count(&self) -> u32 {
        self.rows * self.cols
    }

    pub fn cell_coord(&self, cell: u32) -> [f64; 2] {
        let col = cell % self.cols;
        let row = cell / self.cols;
        [self.x0 + f64::from(col) * self.sx, self.y0 + f64::from(row) * self.sy]
    }

    /// Cell whose coordinate is closest to `p`, via clamped rounding.
    pub fn nearest_cell(&self, p: [f64; 2]) -> u32 {
        let col = ((p[0] - self.x0) / self.sx).round().clamp(0.0, f64::from(self.cols - 1)) as u32;
        let row = ((p[1] - self.y0) / self.sy).round().clamp(0.0, f64::from(self.rows - 1)) as u32;
        row * self.cols + col
    }
}

pub(crate) fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// Static flow from a mutual reachability distance: 1 / (1 + exp(d)).
/// Range (0, 0.5] with the maximum at d = 0.
pub fn static_flow(mutual_reachability: f64) -> f64 {
    1.0 / (1.0 + mutual_reachability.exp())
}

/// Dynamic flow from the average of the four involved distances:
/// 1 / (1 + avg). Range (0, 1] with the maximum when all four are 0.
pub fn dynamic_flow(d1: f64, d2: f64, dx: f64, dy: f64) -> f64 {
    1.0 / (1.0 + (d1 + d2 + dx + dy) / 4.0)
}

/// One assignment sub-problem.
#[derive(Debug, Clone)]
pub struct MqapInstance {
    /// Seed vertex id; always `objects[0]`.
    pub seed: u32,
    /// Object ids, seed first, then neighbors nearest-first.
    pub objects: Vec<u32>,
    pub grid: GridSpec,
    /// Static flow matrix, row-major n_o x n_o, symmetric, zero diagonal.
    flow: Vec<f64>,
    /// Initial layout position per object.
    init_pos: Vec<[f64; 2]>,
    /// Cached pairwise distances between initial positions, n_o x n_o.
    init_dist: Vec<f64>,
    /// Core distance per object (distance to its k*-th nearest object
    /// within the instance, measured in the initial layout).
    core: Vec<f64>,
}

impl MqapInstance {
    /// Assemble an instance from its parts, validating invariants.
    pub fn new(
        seed: u32,
        objects: Vec<u32>,
        grid: GridSpec,
        flow: Vec<f64>,
        init_pos: Vec<[f64; 2]>,
        core: Vec<f64>,
    ) -> Result<Self> {
        let n = objects.len();
        if n == 0 {
            return Err(Error::Param("instance needs at least one object".into()));
        }
        if n as u32 > grid.cell_count() {
            return Err(Error::Param(format!(
                "{n} objects cannot fit a grid of {} cells",
                grid.cell_count()
            )));
        }
        if objects[0] != seed {
            return Err(Error::Param("objects[0] must be the seed vertex".into()));
        }
        if flow.len() != n * n || init_pos.len() != n || core.len() != n {
            return Err(Error::Param("instance buffers disagree on object count".into()));
        }
        for i in 0..n {
            if flow[i * n + i] != 0.0 {
                return Err(Error::Param("flow diagonal must be zero".into()));
            }
            for j in (i + 1)..n {
                let f = flow[i * n + j];
                if f != flow[j * n + i] {
                    return Err(Error::Param("flow matrix must be symmetric".into()));
                }
                if !(f > 0.0 && f <= 0.5) {
                    return Err(Error::Param(format!("flow value {f} outside (0, 0.5]")));
                }
            }
        }
        let mut init_dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = dist2(init_pos[i], init_pos[j]);
                init_dist[i * n + j] = d;
                init_dist[j * n + i] = d;
            }
        }
        Ok(MqapInstance { seed, objects, grid, flow, init_pos, init_dist, core })
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    /// Instances of one object skip the solver and place directly.
    pub fn is_singleton(&self) -> bool {
        self.objects.len() == 1
    }

    pub fn flow_between(&self, i: usize, j: usize) -> f64 {
        self.flow[i * self.objects.len() + j]
    }

    pub fn init_position(&self, i: usize) -> [f64; 2] {
        self.init_pos[i]
    }

    pub fn init_distance(&self, i: usize, j: usize) -> f64 {
        self.init_dist[i * self.objects.len() + j]
    }

    pub fn core_distance(&self, i: usize) -> f64 {
        self.core[i]
    }
}

/// Injective map from object index to grid cell.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridAssignment {
    cells: Vec<u32>,
}

impl GridAssignment {
    pub fn new(cells: Vec<u32>, grid: &GridSpec) -> Result<Self> {
        let assignment = GridAssignment { cells };
        assignment.validate(grid)?;
        Ok(assignment)
    }

    /// For callers that maintain injectivity themselves.
    pub fn from_cells_unchecked(cells: Vec<u32>) -> Self {
        GridAssignment { cells }
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        let mut seen = vec![false; grid.cell_count() as usize];
        for &c in &self.cells {
            if c >= grid.cell_count() {
                return Err(Error::Contract(format!("cell index {c} out of range")));
            }
            if seen[c as usize] {
                return Err(Error::Contract(format!("cell {c} assigned twice (non-injective)")));
            }
            seen[c as usize] = true;
        }
        Ok(())
    }

    pub fn cells(&self) -> &[u32] {
        &self.cells
    }

    pub fn cell_of(&self, obj: usize) -> u32 {
        self.cells[obj]
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn set_cell(&mut self, obj: usize, cell: u32) {
        self.cells[obj] = cell;
    }

    pub fn swap_objects(&mut self, a: usize, b: usize) {
        self.cells.swap(a, b);
    }
}

/// Cost under the static flow (c1) and the dynamic flow (c2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostVector {
    pub c1: f64,
    pub c2: f64,
}

impl CostVector {
    pub const ZERO: CostVector = CostVector { c1: 0.0, c2: 0.0 };

    pub fn is_finite(&self) -> bool {
        self.c1.is_finite() && self.c2.is_finite()
    }
}

impl std::ops::Add for CostVector {
    type Output = CostVector;
    fn add(self, rhs: CostVector) -> CostVector {
        CostVector { c1: self.c1 + rhs.c1, c2: self.c2 + rhs.c2 }
    }
}

impl std::ops::Sub for CostVector {
    type Output = CostVector;
    fn sub(self, rhs: CostVector) -> CostVector {
        CostVector { c1: self.c1 - rhs.c1, c2: self.c2 - rhs.c2 }
    }
}

/// Minimization dominance: `u` dominates `v` iff u <= v componentwise
/// with at least one strict inequality.
pub fn dominates(u: CostVector, v: CostVector) -> bool {
    u.c1 <= v.c1 && u.c2 <= v.c2 && (u.c1 < v.c1 || u.c2 < v.c2)
}

/// Contribution of the unordered pair (i, j) given the assigned cell
/// distance `d` and each endpoint's displacement from its initial
/// position.
#[inline]
fn pair_cost_terms(instance: &MqapInstance, i: usize, j: usize, d: f64, disp_i: f64, disp_j: f64) -> CostVector {
    let c1 = d * instance.flow_between(i, j);
    let c2 = d * dynamic_flow(disp_i, disp_j, instance.init_distance(i, j), d);
    CostVector { c1, c2 }
}

/// Full cost of an assignment, summed over unordered pairs.
pub fn evaluate_costs(instance: &MqapInstance, assignment: &GridAssignment) -> CostVector {
    debug_assert_eq!(assignment.len(), instance.object_count());
    let n = instance.object_count();
    let coords: Vec<[f64; 2]> =
        (0..n).map(|i| instance.grid.cell_coord(assignment.cell_of(i))).collect();
    let disp: Vec<f64> = (0..n).map(|i| dist2(instance.init_position(i), coords[i])).collect();
    let mut total = CostVector::ZERO;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist2(coords[i], coords[j]);
            total = total + pair_cost_terms(instance, i, j, d, disp[i], disp[j]);
        }
    }
    total
}

/// A candidate local-search move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    /// Exchange the cells of two objects.
    Swap { a: usize, b: usize },
    /// Send one object to an empty cell.
    Relocate { obj: usize, cell: u32 },
}

/// Exact cost change if `mv` were applied, in O(n_o): only pairs touching
/// the moved objects are re-evaluated (their c2 terms change because the
/// moved endpoints' displacement and mutual distance change).
pub fn delta_move(instance: &MqapInstance, assignment: &GridAssignment, mv: Move) -> CostVector {
    let n = instance.object_count();
    match mv {
        Move::Swap { a, b } => {
            if a == b {
                return CostVector::ZERO;
            }
            let ca_old = instance.grid.cell_coord(assignment.cell_of(a));
            let cb_old = instance.grid.cell_coord(assignment.cell_of(b));
            let (ca_new, cb_new) = (cb_old, ca_old);
            let disp_a_old = dist2(instance.init_position(a), ca_old);
            let disp_a_new = dist2(instance.init_position(a), ca_new);
            let disp_b_old = dist2(instance.init_position(b), cb_old);
            let disp_b_new = dist2(instance.init_position(b), cb_new);
            let mut delta = CostVector::ZERO;
            for o in 0..n {
                if o == a || o == b {
                    continue;
                }
                let co = instance.grid.cell_coord(assignment.cell_of(o));
                let disp_o = dist2(instance.init_position(o), co);
                let dao = dist2(ca_old, co);
                let dan = dist2(ca_new, co);
                delta = delta + pair_cost_terms(instance, a, o, dan, disp_a_new, disp_o)
                    - pair_cost_terms(instance, a, o, dao, disp_a_old, disp_o);
                let dbo = dist2(cb_old, co);
                let dbn = dist2(cb_new, co);
                delta = delta + pair_cost_terms(instance, b, o, dbn, disp_b_new, disp_o)
                    - pair_cost_terms(instance, b, o, dbo, disp_b_old, disp_o);
            }
            let dab = dist2(ca_old, cb_old);
            delta + pair_cost_terms(instance, a, b, dab, disp_a_new, disp_b_new)
                - pair_cost_terms(instance, a, b, dab, disp_a_old, disp_b_old)
        }
        Move::Relocate { obj, cell } => {
            if assignment.cell_of(obj) == cell {
                return CostVector::ZERO;
            }
            debug_assert!(
                !assignment.cells().contains(&cell),
                "relocation target cell {cell} is occupied"
            );
            let c_old = instance.grid.cell_coord(assignment.cell_of(obj));
            let c_new = instance.grid.cell_coord(cell);
            let disp_old = dist2(instance.init_position(obj), c_old);
            let disp_new = dist2(instance.init_position(obj), c_new);
            let mut delta = CostVector::ZERO;
            for o in 0..n {
                if o == obj {
                    continue;
                }
                let co = instance.grid.cell_coord(assignment.cell_of(o));
                let disp_o = dist2(instance.init_position(o), co);
                let d_old = dist2(c_old, co);
                let d_new = dist2(c_new, co);
                delta = delta + pair_cost_terms(instance, obj, o, d_new, disp_new, disp_o)
                    - pair_cost_terms(instance, obj, o, d_old, disp_old, disp_o);
            }
            delta
        }
    }
}

/// Exact change in (c1, c2) if objects `a` and `b` swapped cells.
pub fn delta_swap(instance: &MqapInstance, assignment: &GridAssignment, a: usize, b: usize) -> CostVector {
    delta_move(instance, assignment, Move::Swap { a, b })
}

/// Apply a move to an assignment (the caller keeps any occupancy map
/// in sync).
pub fn apply_move(assignment: &mut GridAssignment, mv: Move) {
    match mv {
        Move::Swap { a, b } => assignment.swap_objects(a, b),
        Move::Relocate { obj, cell } => assignment.set_cell(obj, cell),
    }
}

/// Capacity-bounded set of mutually non-dominating solutions.
#[derive(Debug, Clone)]
pub struct ParetoArchive {
    members: Vec<(GridAssignment, CostVector)>,
    capacity: usize,
}

pub const DEFAULT_ARCHIVE_CAPACITY: usize = 64;

impl Default for ParetoArchive {
    fn default() -> Self {
        ParetoArchive::new(DEFAULT_ARCHIVE_CAPACITY)
    }
}

impl ParetoArchive {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1);
        ParetoArchive { members: Vec::new(), capacity }
    }

    pub fn members(&self) -> &[(GridAssignment, CostVector)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Whether no current member dominates `cost`. A cheap screen for
    /// callers tracking costs incrementally: only candidates passing it
    /// are worth an exact re-evaluation before [`ParetoArchive::insert`].
    pub fn would_accept(&self, cost: CostVector) -> bool {
        self.members.iter().all(|(_, m)| !dominates(*m, cost))
    }

    /// Insert a candidate; returns whether it is a member afterwards.
    ///
    /// Candidates dominated by a member, and exact duplicates (equal cost
    /// and equal assignment), are rejected. Members dominated by the
    /// candidate are removed. Over capacity, the member with the smallest
    /// crowding distance is dropped (boundary members are never dropped).
    pub fn insert(&mut self, assignment: GridAssignment, cost: CostVector) -> bool {
        debug_assert!(cost.is_finite());
        for (m_assign, m_cost) in &self.members {
            if dominates(*m_cost, cost) {
                return false;
            }
            if *m_cost == cost && *m_assign == assignment {
                return false;
            }
        }
        self.members.retain(|(_, m_cost)| !dominates(cost, *m_cost));
        self.members.push((assignment, cost));
        if self.members.len() > self.capacity {
            let drop_idx = self.smallest_crowding_index();
            let dropped_new = drop_idx == self.members.len() - 1;
            self.members.remove(drop_idx);
            return !dropped_new;
        }
        true
    }

    /// Index of the member with the smallest crowding distance. Ties are
    /// broken by dropping the entry that sorts latest under
    /// (c1 asc, c2 desc, assignment), independent of insertion history.
    fn smallest_crowding_index(&self) -> usize {
        let costs: Vec<CostVector> = self.members.iter().map(|m| m.1).collect();
        let crowding = crowding_distances(&costs);
        let mut best = 0usize;
        for i in 1..self.members.len() {
            let key = |idx: usize| {
                let (a, c) = (&self.members[idx].0, &self.members[idx].1);
                (crowding[idx], std::cmp::Reverse((c.c1, -c.c2, a.clone())))
            };
            // Smaller crowding loses; on equal crowding the later-sorting
            // entry loses (Reverse of the order key).
            let (bc, bk) = key(best);
            let (ic, ik) = key(i);
            if ic < bc || (ic == bc && ik < bk) {
                best = i;
            }
        }
        best
    }

    /// O(|A|^2) invariant check used by tests.
    pub fn is_mutually_non_dominating(&self) -> bool {
        for (i, (_, u)) in self.members.iter().enumerate() {
            for (j, (_, v)) in self.members.iter().enumerate() {
                if i != j && dominates(*u, *v) {
                    return false;
                }
            }
        }
        true
    }
}

/// NSGA-II style crowding distances over a set of cost vectors; boundary
/// points (extreme c1 or c2) get infinity.
pub fn crowding_distances(costs: &[CostVector]) -> Vec<f64> {
    let n = costs.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let mut crowding = vec![0.0f64; n];
    for objective in 0..2 {
        let value = |c: &CostVector| if objective == 0 { c.c1 } else { c.c2 };
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| value(&costs[a]).partial_cmp(&value(&costs[b])).unwrap());
        let lo = value(&costs[order[0]]);
        let hi = value(&costs[order[n - 1]]);
        let range = if hi > lo { hi - lo } else { 1.0 };
        crowding[order[0]] = f64::INFINITY;
        crowding[order[n - 1]] = f64::INFINITY;
        for w in 1..n - 1 {
            let gap = (value(&costs[order[w + 1]]) - value(&costs[order[w - 1]])) / range;
            crowding[order[w]] += gap;
        }
    }
    crowding
}
