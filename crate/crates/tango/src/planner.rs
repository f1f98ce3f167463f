//! Shortest paths through a graph of safe convex sets.
//!
//! Vertices carry the pruned safe polytopes; an edge exists wherever two
//! polytopes intersect with nonempty interior, and the stacked intersection
//! is stored with the edge. Queries run in two stages: a best-first
//! enumeration of loopless region sequences ordered by a sound lower bound
//! (set-to-set distances never exceed true segment costs), followed by
//! convex refinement of each candidate — one free waypoint per traversed
//! edge, constrained to the edge's intersection polytope. Squared-length
//! refinement is a single QP; path-length refinement wraps the same QP in
//! iteratively reweighted least squares.

use crate::geom::{solve_qp, Polytope, QpOptions, QpStatus};
use crate::grid::Grid;
use crate::tt::TensorTrain;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

#[derive(Debug, Clone)]
pub struct GraphEdge {
    pub u: usize,
    pub v: usize,
    pub intersection: Polytope,
}

/// Undirected graph over safe convex sets; traversal treats every edge
/// symmetrically.
#[derive(Debug, Clone)]
pub struct RegionGraph {
    vertices: Vec<Polytope>,
    edges: Vec<GraphEdge>,
    adjacency: Vec<Vec<(usize, usize)>>, // vertex -> [(neighbor, edge index)]
}

impl RegionGraph {
    pub fn vertices(&self) -> &[Polytope] {
        &self.vertices
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }
}

/// Builds the region graph: an edge (u, v) exists iff the stacked system
/// `A_u x ≤ b_u, A_v x ≤ b_v` admits an interior ball of radius 1e-9.
pub fn build_graph(regions: &[Polytope]) -> RegionGraph {
    let n = regions.len();
    let mut edges = Vec::new();
    let mut adjacency = vec![Vec::new(); n];
    for u in 0..n {
        for v in u + 1..n {
            let inter = regions[u].intersect(&regions[v]);
            if inter.certified_nonempty(1e-9) {
                let ei = edges.len();
                edges.push(GraphEdge {
                    u,
                    v,
                    intersection: inter,
                });
                adjacency[u].push((v, ei));
                adjacency[v].push((u, ei));
            }
        }
    }
    RegionGraph {
        vertices: regions.to_vec(),
        edges,
        adjacency,
    }
}

/// Rebuilds a graph from persisted edge pairs without re-running the
/// feasibility LPs; intersections are reconstructed by stacking.
pub fn graph_from_edges(regions: &[Polytope], pairs: &[(usize, usize)]) -> RegionGraph {
    let mut edges = Vec::with_capacity(pairs.len());
    let mut adjacency = vec![Vec::new(); regions.len()];
    for &(u, v) in pairs {
        let ei = edges.len();
        edges.push(GraphEdge {
            u,
            v,
            intersection: regions[u].intersect(&regions[v]),
        });
        adjacency[u].push((v, ei));
        adjacency[v].push((u, ei));
    }
    RegionGraph {
        vertices: regions.to_vec(),
        edges,
        adjacency,
    }
}

/// All vertices whose polytope contains `q`. Inequalities are inclusive
/// with a small tolerance so refined waypoints sitting on shared facets
/// always locate.
pub fn locate(graph: &RegionGraph, q: &[f64]) -> Vec<usize> {
    let qv = DVector::from_row_slice(q);
    graph
        .vertices
        .iter()
        .enumerate()
        .filter(|(_, p)| p.contains(&qv, 1e-7))
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostKind {
    PathLength,
    SquaredLength,
}

#[derive(Debug, Clone)]
pub struct PlanQuery {
    pub q_start: Vec<f64>,
    pub q_goal: Vec<f64>,
    pub cost_kind: CostKind,
    pub max_discrete_paths: usize,
}

impl PlanQuery {
    pub fn new(q_start: Vec<f64>, q_goal: Vec<f64>) -> Self {
        Self {
            q_start,
            q_goal,
            cost_kind: CostKind::PathLength,
            max_discrete_paths: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanStatus {
    Ok,
    NoRegionContainsEndpoint,
    Disconnected,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PlanDiagnostics {
    /// Discrete candidates refined.
    pub candidates: usize,
    /// Lower bound of the winning candidate.
    pub lower_bound: f64,
    /// Iterations spent in the winning refinement.
    pub refine_iterations: usize,
    /// KKT residual proxy of the winning refinement (primal/dual residuals
    /// plus, for path-length costs, the IRLS weight drift).
    pub kkt_residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanResult {
    pub status: PlanStatus,
    pub waypoints: Vec<Vec<f64>>,
    pub region_path: Vec<usize>,
    pub cost: f64,
    /// Worst-case density along the path; filled by [`pdf_score`].
    pub pdf_score: Option<f64>,
    pub diagnostics: PlanDiagnostics,
}

impl PlanResult {
    fn failure(status: PlanStatus) -> Self {
        Self {
            status,
            waypoints: Vec::new(),
            region_path: Vec::new(),
            cost: f64::INFINITY,
            pdf_score: None,
            diagnostics: PlanDiagnostics::default(),
        }
    }
}

// Best-first enumeration state: either a partial region path ending at a
// vertex, or a completed start-to-goal sequence awaiting emission.
#[derive(Debug, Clone, PartialEq)]
struct SearchState {
    bound: f64,
    complete: bool,
    path: Vec<usize>,
    edges: Vec<usize>,
}

impl Eq for SearchState {}

impl Ord for SearchState {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap: invert so the smallest bound pops first;
        // ties resolved lexicographically for determinism
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.path.cmp(&self.path))
            .then_with(|| other.complete.cmp(&self.complete))
    }
}

impl PartialOrd for SearchState {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const MAX_EXPANSIONS: usize = 200_000;

/// Two-stage shortest path: discrete enumeration in increasing lower-bound
/// order, then convex refinement of each candidate. Endpoint or connectivity
/// failures are reported through `status`, not errors.
pub fn shortest_path(graph: &RegionGraph, query: &PlanQuery) -> PlanResult {
    let start = DVector::from_row_slice(&query.q_start);
    let goal = DVector::from_row_slice(&query.q_goal);
    let sources = locate(graph, &query.q_start);
    let sinks = locate(graph, &query.q_goal);
    if sources.is_empty() || sinks.is_empty() {
        return PlanResult::failure(PlanStatus::NoRegionContainsEndpoint);
    }

    let seg_cost = |d: f64| match query.cost_kind {
        CostKind::PathLength => d,
        CostKind::SquaredLength => d * d,
    };

    // lazily cached set-to-set distances
    let mut edge_pair_dist: HashMap<(usize, usize), f64> = HashMap::new();
    let mut start_to_edge: HashMap<usize, f64> = HashMap::new();
    let mut goal_to_edge: HashMap<usize, f64> = HashMap::new();

    let point_edge_dist = |point: &DVector<f64>,
                               ei: usize,
                               cache: &mut HashMap<usize, f64>|
     -> f64 {
        *cache.entry(ei).or_insert_with(|| {
            let inter = &graph.edges[ei].intersection;
            (inter.project(point) - point).norm()
        })
    };

    let mut heap: BinaryHeap<SearchState> = BinaryHeap::new();
    for &s in &sources {
        heap.push(SearchState {
            bound: 0.0,
            complete: false,
            path: vec![s],
            edges: Vec::new(),
        });
    }

    let mut best: Option<(PlanResult, Vec<usize>)> = None;
    let mut candidates = 0usize;
    let mut expansions = 0usize;

    while let Some(state) = heap.pop() {
        expansions += 1;
        if expansions > MAX_EXPANSIONS {
            break;
        }
        // prune against the current best refined cost
        if let Some((ref b, _)) = best {
            if state.bound >= b.cost {
                break; // all following bounds are larger
            }
        }

        if state.complete {
            candidates += 1;
            if let Some(mut refined) = refine_candidate(graph, query, &start, &goal, &state) {
                refined.diagnostics.lower_bound = state.bound;
                refined.diagnostics.candidates = candidates;
                let replace = match &best {
                    None => true,
                    Some((b, path)) => {
                        refined.cost < b.cost - 1e-12
                            || ((refined.cost - b.cost).abs() <= 1e-12
                                && state.path < *path)
                    }
                };
                if replace {
                    best = Some((refined, state.path.clone()));
                }
            }
            if candidates >= query.max_discrete_paths {
                break;
            }
            continue;
        }

        let here = *state.path.last().expect("nonempty path");

        // completing at a sink region
        if sinks.contains(&here) {
            let total = if let Some(&ei) = state.edges.last() {
                state.bound + seg_cost(point_edge_dist(&goal, ei, &mut goal_to_edge))
            } else {
                state.bound + seg_cost((&goal - &start).norm())
            };
            heap.push(SearchState {
                bound: total,
                complete: true,
                path: state.path.clone(),
                edges: state.edges.clone(),
            });
        }

        // expansion to unvisited neighbors
        for &(next, ei) in graph.neighbors(here) {
            if state.path.contains(&next) {
                continue;
            }
            let step = if let Some(&prev_ei) = state.edges.last() {
                let key = (prev_ei.min(ei), prev_ei.max(ei));
                let d = *edge_pair_dist.entry(key).or_insert_with(|| {
                    let (a, b) = (&graph.edges[prev_ei], &graph.edges[ei]);
                    a.intersection.distance_to(&b.intersection).0
                });
                seg_cost(d)
            } else {
                seg_cost(point_edge_dist(&start, ei, &mut start_to_edge))
            };
            let mut path = state.path.clone();
            path.push(next);
            let mut edges = state.edges.clone();
            edges.push(ei);
            heap.push(SearchState {
                bound: state.bound + step,
                complete: false,
                path,
                edges,
            });
        }
    }

    match best {
        Some((result, _)) => result,
        None => PlanResult::failure(PlanStatus::Disconnected),
    }
}

/// Convex refinement of one discrete candidate. Returns `None` when the
/// underlying QP stalls, which skips to the next candidate.
fn refine_candidate(
    graph: &RegionGraph,
    query: &PlanQuery,
    start: &DVector<f64>,
    goal: &DVector<f64>,
    state: &SearchState,
) -> Option<PlanResult> {
    let n = start.len();
    let m = state.edges.len();

    if m == 0 {
        let d = (goal - start).norm();
        let cost = match query.cost_kind {
            CostKind::PathLength => d,
            CostKind::SquaredLength => d * d,
        };
        return Some(PlanResult {
            status: PlanStatus::Ok,
            waypoints: vec![start.iter().copied().collect(), goal.iter().copied().collect()],
            region_path: state.path.clone(),
            cost,
            pdf_score: None,
            diagnostics: PlanDiagnostics::default(),
        });
    }

    // stacked constraint blocks: waypoint k lives in its edge intersection
    let total_rows: usize = state
        .edges
        .iter()
        .map(|&ei| graph.edges[ei].intersection.num_facets())
        .sum();
    let mut a = DMatrix::zeros(total_rows, m * n);
    let mut b = DVector::zeros(total_rows);
    let mut row = 0;
    for (k, &ei) in state.edges.iter().enumerate() {
        let inter = &graph.edges[ei].intersection;
        let rows = inter.num_facets();
        a.view_mut((row, k * n), (rows, n)).copy_from(inter.a());
        b.rows_mut(row, rows).copy_from(inter.b());
        row += rows;
    }

    let scale = (goal - start).norm().max(1.0);
    let opts = QpOptions::default();

    // weighted chain QP: minimize Σ w_k ‖x_{k+1} − x_k‖², endpoints fixed
    let solve_chain = |weights: &[f64]| -> Option<(Vec<DVector<f64>>, crate::geom::QpResult)> {
        let mut p = DMatrix::zeros(m * n, m * n);
        let mut q = DVector::zeros(m * n);
        for k in 0..m {
            let (w_prev, w_next) = (weights[k], weights[k + 1]);
            for d in 0..n {
                p[(k * n + d, k * n + d)] += 2.0 * (w_prev + w_next);
            }
            if k + 1 < m {
                for d in 0..n {
                    p[(k * n + d, (k + 1) * n + d)] -= 2.0 * w_next;
                    p[((k + 1) * n + d, k * n + d)] -= 2.0 * w_next;
                }
            }
        }
        for d in 0..n {
            q[d] -= 2.0 * weights[0] * start[d];
            q[(m - 1) * n + d] -= 2.0 * weights[m] * goal[d];
        }
        let res = solve_qp(&p, &q, &a, &b, &opts);
        if res.status != QpStatus::Solved {
            return None;
        }
        let xs = (0..m)
            .map(|k| res.x.rows(k * n, n).into_owned())
            .collect();
        Some((xs, res))
    };

    let (waypoints, iterations, kkt) = match query.cost_kind {
        CostKind::SquaredLength => {
            let (xs, res) = solve_chain(&vec![1.0; m + 1])?;
            let kkt = res.primal_residual.max(res.dual_residual);
            (xs, res.iterations, kkt)
        }
        CostKind::PathLength => {
            // IRLS: weights 1/‖segment‖ recover the sum-of-norms objective
            let mut weights = vec![1.0; m + 1];
            let mut xs;
            let mut res;
            let mut iterations = 0;
            let delta = 1e-10 * scale;
            loop {
                let out = solve_chain(&weights)?;
                xs = out.0;
                res = out.1;
                iterations += 1;
                let mut chain = Vec::with_capacity(m + 2);
                chain.push(start.clone());
                chain.extend(xs.iter().cloned());
                chain.push(goal.clone());
                let mut new_weights = vec![0.0; m + 1];
                let mut drift: f64 = 0.0;
                for k in 0..=m {
                    let len = (&chain[k + 1] - &chain[k]).norm();
                    new_weights[k] = 0.5 / len.max(delta);
                    if len > delta {
                        drift = drift.max((weights[k] * 2.0 * len - 1.0).abs());
                    }
                }
                let done = drift < 1e-8 || iterations >= 100;
                weights = new_weights;
                if done {
                    let kkt = res
                        .primal_residual
                        .max(res.dual_residual)
                        .max(drift * scale * 1e-3);
                    break (xs, iterations, kkt);
                }
            }
        }
    };

    let mut chain = Vec::with_capacity(m + 2);
    chain.push(start.clone());
    chain.extend(waypoints);
    chain.push(goal.clone());
    let cost = chain
        .windows(2)
        .map(|w| {
            let d = (&w[1] - &w[0]).norm();
            match query.cost_kind {
                CostKind::PathLength => d,
                CostKind::SquaredLength => d * d,
            }
        })
        .sum();

    Some(PlanResult {
        status: PlanStatus::Ok,
        waypoints: chain.iter().map(|x| x.iter().copied().collect()).collect(),
        region_path: state.path.clone(),
        cost,
        pdf_score: None,
        diagnostics: PlanDiagnostics {
            candidates: 0,
            lower_bound: 0.0,
            refine_iterations: iterations,
            kkt_residual: kkt,
        },
    })
}

/// Worst-case density along the plan: the minimum of the TT over the grid
/// cells visited by linear interpolation at `samples_per_segment` points per
/// segment. A zero-length plan scores the density at its start cell.
pub fn pdf_score(
    plan: &PlanResult,
    pdf: &TensorTrain,
    grid: &Grid,
    samples_per_segment: usize,
) -> Option<f64> {
    if plan.status != PlanStatus::Ok || plan.waypoints.is_empty() {
        return None;
    }
    let mut min_val = f64::INFINITY;
    let eval_at = |q: &[f64], min_val: &mut f64| {
        let vidx = grid.value_to_virtual(q).ok()?;
        let v = pdf.eval(&vidx).ok()?;
        *min_val = min_val.min(v);
        Some(())
    };
    if plan.waypoints.len() == 1 {
        eval_at(&plan.waypoints[0], &mut min_val)?;
        return Some(min_val);
    }
    for w in plan.waypoints.windows(2) {
        for s in 0..=samples_per_segment {
            let t = s as f64 / samples_per_segment.max(1) as f64;
            let q: Vec<f64> = w[0]
                .iter()
                .zip(&w[1])
                .map(|(a, b)| a + t * (b - a))
                .collect();
            eval_at(&q, &mut min_val)?;
        }
    }
    Some(min_val)
}

/// True iff every interpolated path point lies in at least one graph vertex.
pub fn path_in_safe_sets(
    plan: &PlanResult,
    graph: &RegionGraph,
    samples_per_segment: usize,
) -> bool {
    if plan.status != PlanStatus::Ok {
        return false;
    }
    if plan.waypoints.len() == 1 {
        return !locate(graph, &plan.waypoints[0]).is_empty();
    }
    for w in plan.waypoints.windows(2) {
        for s in 0..=samples_per_segment {
            let t = s as f64 / samples_per_segment.max(1) as f64;
            let q: Vec<f64> = w[0]
                .iter()
                .zip(&w[1])
                .map(|(a, b)| a + t * (b - a))
                .collect();
            if locate(graph, &q).is_empty() {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boxes_graph(boxes: &[(&[f64], &[f64])]) -> RegionGraph {
        let regions: Vec<Polytope> = boxes
            .iter()
            .map(|(lo, hi)| Polytope::from_box(lo, hi))
            .collect();
        build_graph(&regions)
    }

    #[test]
    fn overlapping_boxes_share_an_edge() {
        let g = boxes_graph(&[
            (&[0.0, 0.0], &[1.1, 1.0]),
            (&[0.9, 0.0], &[2.0, 1.0]),
        ]);
        assert_eq!(g.edges().len(), 1);
        let inter = &g.edges()[0].intersection;
        assert!(inter.contains(&DVector::from_row_slice(&[1.0, 0.5]), 1e-9));
    }

    #[test]
    fn disjoint_boxes_have_no_edge() {
        let g = boxes_graph(&[
            (&[0.0, 0.0], &[1.0, 1.0]),
            (&[2.0, 0.0], &[3.0, 1.0]),
        ]);
        assert!(g.edges().is_empty());
    }

    #[test]
    fn chain_has_exactly_two_edges() {
        let g = boxes_graph(&[
            (&[0.0, 0.0], &[1.1, 1.0]),
            (&[0.9, 0.0], &[2.1, 1.0]),
            (&[1.9, 0.0], &[3.0, 1.0]),
        ]);
        assert_eq!(g.edges().len(), 2);
    }

    #[test]
    fn locate_reports_all_containers() {
        let g = boxes_graph(&[
            (&[0.0, 0.0], &[1.1, 1.0]),
            (&[0.9, 0.0], &[2.0, 1.0]),
        ]);
        assert_eq!(locate(&g, &[0.5, 0.5]), vec![0]);
        assert_eq!(locate(&g, &[1.0, 0.5]), vec![0, 1]);
        assert!(locate(&g, &[5.0, 5.0]).is_empty());
    }

    #[test]
    fn same_region_straight_line() {
        let g = boxes_graph(&[(&[0.0, 0.0], &[1.0, 1.0])]);
        let plan = shortest_path(&g, &PlanQuery::new(vec![0.1, 0.1], vec![0.9, 0.9]));
        assert_eq!(plan.status, PlanStatus::Ok);
        assert_eq!(plan.waypoints.len(), 2);
        let d = (0.8f64 * 0.8 + 0.8 * 0.8).sqrt();
        assert!((plan.cost - d).abs() < 1e-9);
    }

    #[test]
    fn two_box_fixture_straight_segment() {
        // overlap slab x ∈ [0.9, 1.1]: the straight line is feasible
        let g = boxes_graph(&[
            (&[0.0, 0.0], &[1.1, 1.0]),
            (&[0.9, 0.0], &[2.0, 1.0]),
        ]);
        let plan = shortest_path(&g, &PlanQuery::new(vec![0.1, 0.5], vec![1.9, 0.5]));
        assert_eq!(plan.status, PlanStatus::Ok);
        assert_eq!(plan.region_path, vec![0, 1]);
        assert_eq!(plan.waypoints.len(), 3);
        assert!((plan.cost - 1.8).abs() < 1e-6, "cost = {}", plan.cost);
        // intermediate waypoint on the overlap slab
        let w = &plan.waypoints[1];
        assert!(w[0] >= 0.9 - 1e-7 && w[0] <= 1.1 + 1e-7);
        assert!(plan.diagnostics.kkt_residual <= 1e-6);
        assert!(plan.diagnostics.lower_bound <= plan.cost + 1e-6);
    }

    #[test]
    fn disconnected_reports_status() {
        let g = boxes_graph(&[
            (&[0.0, 0.0], &[1.0, 1.0]),
            (&[2.0, 0.0], &[3.0, 1.0]),
        ]);
        let plan = shortest_path(&g, &PlanQuery::new(vec![0.5, 0.5], vec![2.5, 0.5]));
        assert_eq!(plan.status, PlanStatus::Disconnected);
        assert!(plan.waypoints.is_empty());
    }

    #[test]
    fn endpoint_outside_regions_reports_status() {
        let g = boxes_graph(&[(&[0.0, 0.0], &[1.0, 1.0])]);
        let plan = shortest_path(&g, &PlanQuery::new(vec![0.5, 0.5], vec![5.0, 5.0]));
        assert_eq!(plan.status, PlanStatus::NoRegionContainsEndpoint);
    }

    #[test]
    fn detour_around_gap_via_third_region() {
        // two lower boxes joined only through an upper corridor
        let g = boxes_graph(&[
            (&[0.0, 0.0], &[1.0, 1.0]),
            (&[2.0, 0.0], &[3.0, 1.0]),
            (&[0.0, 0.8], &[3.0, 1.5]),
        ]);
        let plan = shortest_path(&g, &PlanQuery::new(vec![0.5, 0.1], vec![2.5, 0.1]));
        assert_eq!(plan.status, PlanStatus::Ok);
        assert_eq!(plan.region_path, vec![0, 2, 1]);
        assert!(path_in_safe_sets(&plan, &g, 100));
        // must rise into the corridor: cost strictly above the straight line
        assert!(plan.cost > 2.0 + 0.5);
    }

    #[test]
    fn squared_and_length_costs_agree_on_single_region() {
        let g = boxes_graph(&[(&[0.0, 0.0], &[2.0, 2.0])]);
        let mut q = PlanQuery::new(vec![0.2, 0.2], vec![1.8, 1.4]);
        let plan_len = shortest_path(&g, &q);
        q.cost_kind = CostKind::SquaredLength;
        let plan_sq = shortest_path(&g, &q);
        assert!((plan_sq.cost - plan_len.cost * plan_len.cost).abs() < 1e-9);
        for (a, b) in plan_len.waypoints.iter().zip(&plan_sq.waypoints) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn refined_cost_monotone_in_candidate_budget() {
        let g = boxes_graph(&[
            (&[0.0, 0.0], &[1.1, 1.0]),
            (&[0.9, 0.0], &[2.1, 1.0]),
            (&[0.0, 0.8], &[2.1, 1.8]),
            (&[1.9, 0.0], &[3.0, 1.8]),
        ]);
        let mut costs = Vec::new();
        for budget in [1, 2, 5, 20] {
            let mut q = PlanQuery::new(vec![0.2, 0.5], vec![2.8, 0.5]);
            q.max_discrete_paths = budget;
            let plan = shortest_path(&g, &q);
            assert_eq!(plan.status, PlanStatus::Ok);
            costs.push(plan.cost);
        }
        for w in costs.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
    }

    #[test]
    fn zero_length_query_is_ok() {
        let g = boxes_graph(&[(&[0.0, 0.0], &[1.0, 1.0])]);
        let plan = shortest_path(&g, &PlanQuery::new(vec![0.4, 0.4], vec![0.4, 0.4]));
        assert_eq!(plan.status, PlanStatus::Ok);
        assert!(plan.cost.abs() < 1e-12);
    }

    #[test]
    fn safe_set_verdict_stable_across_sampling_density() {
        let g = boxes_graph(&[
            (&[0.0, 0.0], &[1.1, 1.0]),
            (&[0.9, 0.0], &[2.0, 1.0]),
        ]);
        let plan = shortest_path(&g, &PlanQuery::new(vec![0.1, 0.5], vec![1.9, 0.5]));
        assert!(path_in_safe_sets(&plan, &g, 10));
        assert!(path_in_safe_sets(&plan, &g, 1000));
        // hand-built path exiting all regions
        let bad = PlanResult {
            status: PlanStatus::Ok,
            waypoints: vec![vec![0.5, 0.5], vec![5.0, 5.0]],
            region_path: vec![0],
            cost: 1.0,
            pdf_score: None,
            diagnostics: PlanDiagnostics::default(),
        };
        assert!(!path_in_safe_sets(&bad, &g, 10));
    }

    #[test]
    fn pdf_score_constant_density() {
        let g = boxes_graph(&[(&[0.0, 0.0], &[1.0, 1.0])]);
        let plan = shortest_path(&g, &PlanQuery::new(vec![0.1, 0.1], vec![0.9, 0.9]));
        let grid = Grid::new(vec![
            crate::grid::GridDim::new(0.0, 1.0, 16),
            crate::grid::GridDim::new(0.0, 1.0, 16),
        ])
        .unwrap();
        let tt = TensorTrain::constant(&grid.virtual_mode_sizes(), 0.42).unwrap();
        let score = pdf_score(&plan, &tt, &grid, 25).unwrap();
        assert!((score - 0.42).abs() < 1e-12);
    }

    #[test]
    fn pdf_score_finds_low_cell_on_segment() {
        let grid = Grid::new(vec![crate::grid::GridDim::new(0.0, 1.0, 4)]).unwrap();
        // density per cell: [1.0, 0.2, 0.7, 1.0]
        let tt = TensorTrain::rank_one(&[vec![1.0, 0.2, 0.7, 1.0]]).unwrap();
        let plan = PlanResult {
            status: PlanStatus::Ok,
            waypoints: vec![vec![0.1], vec![0.9]],
            region_path: vec![0],
            cost: 0.8,
            pdf_score: None,
            diagnostics: PlanDiagnostics::default(),
        };
        let score = pdf_score(&plan, &tt, &grid, 50).unwrap();
        assert!((score - 0.2).abs() < 1e-12);
    }

    #[test]
    fn pdf_score_zero_length_path() {
        let grid = Grid::new(vec![crate::grid::GridDim::new(0.0, 1.0, 4)]).unwrap();
        let tt = TensorTrain::rank_one(&[vec![1.0, 0.2, 0.7, 0.9]]).unwrap();
        let plan = PlanResult {
            status: PlanStatus::Ok,
            waypoints: vec![vec![0.6], vec![0.6]],
            region_path: vec![0],
            cost: 0.0,
            pdf_score: None,
            diagnostics: PlanDiagnostics::default(),
        };
        let score = pdf_score(&plan, &tt, &grid, 10).unwrap();
        assert!((score - 0.7).abs() < 1e-12);
    }
}
