//! Benchmark harness comparing graph-of-convex-sets planning against the
//! RRT baseline on identical seeded queries.
//!
//! Queries are rejection-sampled inside the joint-limit box until both
//! endpoints fall in safe regions and their joint-space distance clears a
//! floor, so both planners solve the same instances. Per-query RNG streams
//! derive from (seed, query id), keeping record tables reproducible.
//! Geometric path length stands in for execution time: trajectory
//! time-parameterization is out of scope here, so timing comparisons against
//! refined trajectories are not attempted.

use crate::geom::Polytope;
use crate::grid::Grid;
use crate::planner::{self, PlanQuery, PlanStatus, RegionGraph};
use crate::rrt::{rrt_plan, RrtConfig};
use crate::tt::TensorTrain;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid benchmark config: {0}")]
    InvalidConfig(String),
    #[error("could not sample a valid query after {0} attempts")]
    QuerySampling(usize),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchConfig {
    pub n_queries: usize,
    pub rng_seed: u64,
    /// Joint-space L2 floor between sampled start and goal.
    pub min_start_goal_distance: f64,
    pub rrt_step: f64,
    pub rrt_max_iters: usize,
    pub samples_per_segment: usize,
    pub max_discrete_paths: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            n_queries: 100,
            rng_seed: 0,
            min_start_goal_distance: 3.0,
            rrt_step: 0.2,
            rrt_max_iters: 5000,
            samples_per_segment: 50,
            max_discrete_paths: 20,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.n_queries == 0 {
            return Err(BenchError::InvalidConfig("n_queries must be >= 1".into()));
        }
        if !(self.rrt_step > 0.0) {
            return Err(BenchError::InvalidConfig("rrt_step must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Planner {
    Tango,
    Rrt,
}

impl std::fmt::Display for Planner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Planner::Tango => write!(f, "TANGO"),
            Planner::Rrt => write!(f, "RRT"),
        }
    }
}

/// One benchmark row. `pdf_score` is only present on success.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRecord {
    pub planner: String,
    pub query_id: usize,
    pub success: bool,
    pub waypoint_count: usize,
    pub path_cost: f64,
    pub pdf_score: Option<f64>,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlannerSummary {
    pub planner: String,
    pub successes: usize,
    pub queries: usize,
    pub mean_waypoints: f64,
    pub median_waypoints: f64,
    pub mean_pdf_score: f64,
    pub mean_cost: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchSummary {
    pub schema_version: u32,
    pub n_queries: usize,
    /// Queries where both planners succeeded (summary statistics use these).
    pub joint_successes: usize,
    pub tango: PlannerSummary,
    pub rrt: PlannerSummary,
}

/// Everything the benchmark needs from the preprocessing pipeline.
pub struct BenchArtifacts<'a> {
    pub density: &'a TensorTrain,
    pub grid: &'a Grid,
    pub graph: &'a RegionGraph,
    pub obstacles: &'a [Polytope],
    pub limits: &'a Polytope,
}

/// Runs both planners on each seeded query and aggregates the comparison.
pub fn run_benchmark(
    artifacts: &BenchArtifacts<'_>,
    cfg: &BenchConfig,
) -> Result<(Vec<BenchRecord>, BenchSummary), BenchError> {
    cfg.validate()?;
    let (lo, hi) = artifacts
        .limits
        .bounding_box()
        .ok_or_else(|| BenchError::InvalidConfig("joint limits must be bounded".into()))?;
    let n = lo.len();

    let mut records = Vec::with_capacity(2 * cfg.n_queries);
    for qid in 0..cfg.n_queries {
        // per-query stream: parallel execution could not change the draws
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed ^ (qid as u64).wrapping_mul(0x9e3779b97f4a7c15));
        let (start, goal) = sample_query(artifacts, cfg, &mut rng, n, &lo, &hi)?;

        let t0 = Instant::now();
        let mut tango_plan = planner::shortest_path(
            artifacts.graph,
            &PlanQuery {
                q_start: start.clone(),
                q_goal: goal.clone(),
                cost_kind: planner::CostKind::PathLength,
                max_discrete_paths: cfg.max_discrete_paths,
            },
        );
        let tango_ms = t0.elapsed().as_secs_f64() * 1e3;
        if tango_plan.status == PlanStatus::Ok {
            tango_plan.pdf_score = planner::pdf_score(
                &tango_plan,
                artifacts.density,
                artifacts.grid,
                cfg.samples_per_segment,
            );
        }
        records.push(BenchRecord {
            planner: Planner::Tango.to_string(),
            query_id: qid,
            success: tango_plan.status == PlanStatus::Ok,
            waypoint_count: tango_plan.waypoints.len(),
            path_cost: tango_plan.cost,
            pdf_score: tango_plan.pdf_score,
            wall_time_ms: tango_ms,
        });

        let t1 = Instant::now();
        let rrt_cfg = RrtConfig {
            step: cfg.rrt_step,
            max_iters: cfg.rrt_max_iters,
            seed: cfg.rng_seed ^ (qid as u64).wrapping_mul(0xd1b54a32d192ed03),
        };
        let mut rrt_result = rrt_plan(
            &start,
            &goal,
            artifacts.obstacles,
            artifacts.limits,
            &rrt_cfg,
        )
        .unwrap_or_else(|_| planner::PlanResult {
            status: PlanStatus::Disconnected,
            waypoints: Vec::new(),
            region_path: Vec::new(),
            cost: f64::INFINITY,
            pdf_score: None,
            diagnostics: Default::default(),
        });
        let rrt_ms = t1.elapsed().as_secs_f64() * 1e3;
        if rrt_result.status == PlanStatus::Ok {
            rrt_result.pdf_score = planner::pdf_score(
                &rrt_result,
                artifacts.density,
                artifacts.grid,
                cfg.samples_per_segment,
            );
        }
        records.push(BenchRecord {
            planner: Planner::Rrt.to_string(),
            query_id: qid,
            success: rrt_result.status == PlanStatus::Ok,
            waypoint_count: rrt_result.waypoints.len(),
            path_cost: rrt_result.cost,
            pdf_score: rrt_result.pdf_score,
            wall_time_ms: rrt_ms,
        });
    }

    let summary = summarize(&records, cfg.n_queries);
    Ok((records, summary))
}

fn sample_query(
    artifacts: &BenchArtifacts<'_>,
    cfg: &BenchConfig,
    rng: &mut ChaCha8Rng,
    n: usize,
    lo: &[f64],
    hi: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), BenchError> {
    const MAX_ATTEMPTS: usize = 200_000;
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n).map(|k| rng.gen_range(lo[k]..=hi[k])).collect()
    };
    let in_safe = |q: &[f64]| !planner::locate(artifacts.graph, q).is_empty();
    for _ in 0..MAX_ATTEMPTS {
        let start = draw(rng);
        if !in_safe(&start) {
            continue;
        }
        let goal = draw(rng);
        if !in_safe(&goal) {
            continue;
        }
        let dist: f64 = start
            .iter()
            .zip(&goal)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if dist >= cfg.min_start_goal_distance {
            return Ok((start, goal));
        }
    }
    Err(BenchError::QuerySampling(MAX_ATTEMPTS))
}

fn summarize(records: &[BenchRecord], n_queries: usize) -> BenchSummary {
    let both_ok: Vec<usize> = (0..n_queries)
        .filter(|qid| {
            records
                .iter()
                .filter(|r| r.query_id == *qid)
                .all(|r| r.success)
        })
        .collect();

    let planner_summary = |name: &str| -> PlannerSummary {
        let rows: Vec<&BenchRecord> = records
            .iter()
            .filter(|r| r.planner == name && both_ok.contains(&r.query_id))
            .collect();
        let successes = records
            .iter()
            .filter(|r| r.planner == name && r.success)
            .count();
        let mut waypoints: Vec<f64> = rows.iter().map(|r| r.waypoint_count as f64).collect();
        waypoints.sort_by(f64::total_cmp);
        let mean = |v: &[f64]| {
            if v.is_empty() {
                f64::NAN
            } else {
                v.iter().sum::<f64>() / v.len() as f64
            }
        };
        let median = |v: &[f64]| {
            if v.is_empty() {
                f64::NAN
            } else if v.len() % 2 == 1 {
                v[v.len() / 2]
            } else {
                0.5 * (v[v.len() / 2 - 1] + v[v.len() / 2])
            }
        };
        let scores: Vec<f64> = rows.iter().filter_map(|r| r.pdf_score).collect();
        let costs: Vec<f64> = rows.iter().map(|r| r.path_cost).collect();
        PlannerSummary {
            planner: name.to_string(),
            successes,
            queries: n_queries,
            mean_waypoints: mean(&waypoints),
            median_waypoints: median(&waypoints),
            mean_pdf_score: mean(&scores),
            mean_cost: mean(&costs),
        }
    };

    BenchSummary {
        schema_version: 1,
        n_queries,
        joint_successes: both_ok.len(),
        tango: planner_summary("TANGO"),
        rrt: planner_summary("RRT"),
    }
}

/// One CSV row per record, schema-versioned via a leading comment line.
pub fn write_records_csv(path: &std::path::Path, records: &[BenchRecord]) -> Result<(), BenchError> {
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "# schema_version=1")?;
    let mut w = csv::Writer::from_writer(file);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_json(path: &std::path::Path, summary: &BenchSummary) -> Result<(), BenchError> {
    let text = serde_json::to_string_pretty(summary).expect("serializable summary");
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::build_graph;

    fn toy_artifacts() -> (TensorTrain, Grid, RegionGraph, Vec<Polytope>, Polytope) {
        let limits = Polytope::from_box(&[-2.0, -2.0], &[2.0, 2.0]);
        let regions = vec![
            Polytope::from_box(&[-2.0, -2.0], &[0.2, 2.0]),
            Polytope::from_box(&[-0.2, -2.0], &[2.0, 2.0]),
        ];
        let graph = build_graph(&regions);
        let obstacles = vec![];
        let grid = Grid::new(vec![
            crate::grid::GridDim::new(-2.0, 2.0, 16),
            crate::grid::GridDim::new(-2.0, 2.0, 16),
        ])
        .unwrap();
        let tt = TensorTrain::constant(&grid.virtual_mode_sizes(), 0.8).unwrap();
        (tt, grid, graph, obstacles, limits)
    }

    #[test]
    fn single_query_produces_two_consistent_records() {
        let (tt, grid, graph, obstacles, limits) = toy_artifacts();
        let artifacts = BenchArtifacts {
            density: &tt,
            grid: &grid,
            graph: &graph,
            obstacles: &obstacles,
            limits: &limits,
        };
        let cfg = BenchConfig {
            n_queries: 1,
            rng_seed: 3,
            min_start_goal_distance: 2.0,
            rrt_step: 0.4,
            rrt_max_iters: 4000,
            samples_per_segment: 20,
            max_discrete_paths: 10,
        };
        let (records, summary) = run_benchmark(&artifacts, &cfg).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].query_id, records[1].query_id);
        assert!(records.iter().all(|r| r.success));
        assert_eq!(summary.joint_successes, 1);
    }

    #[test]
    fn identical_seed_reproduces_record_table() {
        let (tt, grid, graph, obstacles, limits) = toy_artifacts();
        let artifacts = BenchArtifacts {
            density: &tt,
            grid: &grid,
            graph: &graph,
            obstacles: &obstacles,
            limits: &limits,
        };
        let cfg = BenchConfig {
            n_queries: 4,
            rng_seed: 9,
            min_start_goal_distance: 2.0,
            rrt_step: 0.4,
            rrt_max_iters: 4000,
            samples_per_segment: 20,
            max_discrete_paths: 10,
        };
        let (a, _) = run_benchmark(&artifacts, &cfg).unwrap();
        let (b, _) = run_benchmark(&artifacts, &cfg).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.planner, y.planner);
            assert_eq!(x.success, y.success);
            assert_eq!(x.waypoint_count, y.waypoint_count);
            assert_eq!(x.path_cost, y.path_cost);
            assert_eq!(x.pdf_score, y.pdf_score);
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = BenchConfig {
            n_queries: 0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
