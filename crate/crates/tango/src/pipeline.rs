//! Pipeline stages with persistent intermediate artifacts.
//!
//! Each command reads a TOML config plus the artifacts of earlier stages
//! from the output directory, and writes its own artifact:
//!
//! - `approximate` → `density_tt.json`, `inverse_tt.json`, `approx_report.json`
//! - `sample`      → `samples.json`
//! - `regions`     → `regions.json` (safe sets, obstacles, graph edges)
//! - `plan`        → `plan.json`
//! - `bench`       → `bench_records.csv`, `bench_summary.json`
//! - `export-plot` → CSV tables for external plotting
//!
//! All artifacts are schema-versioned and reproducible: re-running a command
//! with the same config and seed writes byte-identical files (bench wall
//! times excepted). The expensive preprocessing therefore runs once and is
//! reused by every later planning query.

use crate::bench::{
    run_benchmark, write_records_csv, write_summary_json, BenchArtifacts, BenchConfig, BenchError,
    BenchRecord, BenchSummary,
};
use crate::geom::{GeomError, Polytope};
use crate::grid::{Grid, GridDim, GridError};
use crate::kinematics::{
    self, density_value, KinematicsError, Manipulator, MetricConfig, RobotFile,
};
use crate::planner::{
    self, build_graph, graph_from_edges, path_in_safe_sets, pdf_score, CostKind, PlanQuery,
    PlanResult, PlanStatus, RegionGraph,
};
use crate::regions::{
    cluster_to_polytope, iris_batch, monte_carlo_volume, prune_indices, rnn_dbscan, RegionError,
    Sample, SampleSets,
};
use crate::tt::{tt_cross, tt_sample, CrossOptions, TensorTrain, TtError};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error("missing artifact {0}; run the earlier pipeline stage first")]
    MissingArtifact(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("artifact parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Tt(#[from] TtError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("unsupported plot kind: {0}")]
    UnsupportedPlot(String),
}

impl PipelineError {
    /// Process exit code: 1 usage/config, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_)
            | PipelineError::MissingArtifact(_)
            | PipelineError::Io(_)
            | PipelineError::Toml(_)
            | PipelineError::Json(_)
            | PipelineError::UnsupportedPlot(_) => 1,
            _ => 3,
        }
    }
}

pub const CONFIG_VERSION: u32 = 1;
pub const ARTIFACT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSettings {
    /// Bins per active joint.
    pub bins: Vec<usize>,
    /// Optional per-joint factorization into virtual dimensions.
    #[serde(default)]
    pub reshape: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossSettings {
    pub max_rank: usize,
    /// Number of cross iterations (full sweep pairs).
    pub n_nswp: usize,
    /// Early-exit tolerance on the held-out error.
    pub tol: f64,
    #[serde(default = "default_kick")]
    pub kick: usize,
    #[serde(default = "default_holdout")]
    pub holdout: usize,
}

fn default_kick() -> usize {
    1
}

fn default_holdout() -> usize {
    1000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSettings {
    /// Initial configurations drawn from the density.
    pub k_c: usize,
    /// Best configurations kept as IRIS seeds.
    pub k_c_best: usize,
    /// Obstacle configurations drawn from the inverse density.
    pub n_o: usize,
    /// Best obstacle configurations kept for clustering.
    pub n_o_best: usize,
    /// Capsule clearance for self-collision reclassification (serial arms).
    #[serde(default)]
    pub self_collision_radius: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSettings {
    pub k: usize,
    #[serde(default)]
    pub inflation: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IrisSettings {
    pub n_iris: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PruneSettings {
    pub coverage_threshold: f64,
    pub volume_samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerSettings {
    pub cost: CostKind,
    pub max_discrete_paths: usize,
    pub samples_per_segment: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSettings {
    pub n_queries: usize,
    pub min_start_goal_distance: f64,
    pub rrt_step: f64,
    pub rrt_max_iters: usize,
    pub samples_per_segment: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub version: u32,
    /// Robot description file, relative to the config file location.
    pub robot: String,
    pub seed: u64,
    /// Metric override; falls back to the robot file's metric section.
    #[serde(default)]
    pub metric: Option<MetricConfig>,
    pub grid: GridSettings,
    pub cross: CrossSettings,
    pub sampling: SamplingSettings,
    pub clustering: ClusterSettings,
    pub iris: IrisSettings,
    pub pruning: PruneSettings,
    pub planner: PlannerSettings,
    pub bench: BenchSettings,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let err = |msg: String| Err(PipelineError::Config(msg));
        if self.version != CONFIG_VERSION {
            return err(format!("version: unsupported config version {}", self.version));
        }
        if self.grid.bins.is_empty() || self.grid.bins.iter().any(|&b| b < 2) {
            return err("grid.bins: every joint needs at least 2 bins".into());
        }
        if self.cross.max_rank == 0 {
            return err("cross.max_rank: must be >= 1".into());
        }
        if self.cross.n_nswp == 0 {
            return err("cross.n_nswp: must be >= 1".into());
        }
        for (name, v) in [
            ("sampling.k_c", self.sampling.k_c),
            ("sampling.k_c_best", self.sampling.k_c_best),
            ("sampling.n_o", self.sampling.n_o),
            ("sampling.n_o_best", self.sampling.n_o_best),
            ("clustering.k", self.clustering.k),
            ("iris.n_iris", self.iris.n_iris),
            ("pruning.volume_samples", self.pruning.volume_samples),
            ("planner.max_discrete_paths", self.planner.max_discrete_paths),
            ("planner.samples_per_segment", self.planner.samples_per_segment),
        ] {
            if v == 0 {
                return err(format!("{name}: must be >= 1"));
            }
        }
        if self.sampling.k_c_best > self.sampling.k_c {
            return err("sampling.k_c_best: must not exceed sampling.k_c".into());
        }
        if self.sampling.n_o_best > self.sampling.n_o {
            return err("sampling.n_o_best: must not exceed sampling.n_o".into());
        }
        if !(self.pruning.coverage_threshold > 0.0 && self.pruning.coverage_threshold <= 1.0) {
            return err("pruning.coverage_threshold: must be in (0, 1]".into());
        }
        if let Some(reshape) = &self.grid.reshape {
            if reshape.len() != self.grid.bins.len() {
                return err(format!(
                    "grid.reshape: {} factorizations for {} joints",
                    reshape.len(),
                    self.grid.bins.len()
                ));
            }
            for (j, (fs, &bins)) in reshape.iter().zip(&self.grid.bins).enumerate() {
                let product: usize = fs.iter().product();
                if product != bins {
                    return err(format!(
                        "grid.reshape[{j}]: factors {fs:?} multiply to {product}, expected {bins}"
                    ));
                }
            }
        }
        Ok(())
    }
}

/// A loaded pipeline: config, robot, metric and grid resolved and validated.
pub struct Pipeline {
    pub config: PipelineConfig,
    pub robot: Manipulator,
    pub metric: MetricConfig,
    pub grid: Grid,
    pub out_dir: PathBuf,
}

// fixed stream offsets so stages draw independent random streams
const STREAM_FEASIBLE: u64 = 0x5eed_0001;
const STREAM_OBSTACLE: u64 = 0x5eed_0002;
const STREAM_PRUNE: u64 = 0x5eed_0003;

impl Pipeline {
    pub fn load(
        config_path: &Path,
        out_dir: &Path,
        seed_override: Option<u64>,
    ) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(config_path)?;
        let mut config: PipelineConfig = toml::from_str(&text)?;
        if let Some(seed) = seed_override {
            config.seed = seed;
        }
        config.validate()?;
        let base = config_path.parent().unwrap_or_else(|| Path::new("."));
        let robot_file = RobotFile::load(&base.join(&config.robot))?;
        let metric = config
            .metric
            .clone()
            .or(robot_file.metric.clone())
            .ok_or_else(|| {
                PipelineError::Config(
                    "metric: set it in the config or the robot file".into(),
                )
            })?;
        metric.validate()?;
        let robot = robot_file.manipulator;
        let limits = robot.active_limits();
        if limits.len() != config.grid.bins.len() {
            return Err(PipelineError::Config(format!(
                "grid.bins: {} entries for {} active joints",
                config.grid.bins.len(),
                limits.len()
            )));
        }
        let dims: Vec<GridDim> = limits
            .iter()
            .zip(&config.grid.bins)
            .map(|(&(lo, hi), &bins)| GridDim::new(lo, hi, bins))
            .collect();
        let grid = match &config.grid.reshape {
            Some(factors) => Grid::with_reshape(dims, factors.clone())?,
            None => Grid::new(dims)?,
        };
        std::fs::create_dir_all(out_dir)?;
        Ok(Self {
            config,
            robot,
            metric,
            grid,
            out_dir: out_dir.to_path_buf(),
        })
    }

    fn artifact(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn require(&self, name: &str) -> Result<PathBuf, PipelineError> {
        let p = self.artifact(name);
        if !p.exists() {
            return Err(PipelineError::MissingArtifact(name.to_string()));
        }
        Ok(p)
    }

    fn domain(&self) -> Polytope {
        let limits = self.robot.active_limits();
        let lo: Vec<f64> = limits.iter().map(|&(l, _)| l).collect();
        let hi: Vec<f64> = limits.iter().map(|&(_, h)| h).collect();
        Polytope::from_box(&lo, &hi)
    }

    /// Approximate the density and its inverse in TT form and persist both.
    pub fn cmd_approximate(&self) -> Result<ApproxReport, PipelineError> {
        let field = kinematics::density(&self.robot, &self.metric, &self.grid)?;
        let opts = CrossOptions {
            max_rank: self.config.cross.max_rank,
            n_sweeps: self.config.cross.n_nswp,
            tol: self.config.cross.tol,
            seed: self.config.seed,
            kick: self.config.cross.kick,
            holdout: self.config.cross.holdout,
        };
        let (density_tt, cross_report) = tt_cross(&field, &opts)?;
        // inverse density 1 − p, rounded to keep the added rank in check
        let inverse_tt = density_tt.scale_shift(-1.0, 1.0).round(1e-10);

        density_tt.save_json(&self.artifact("density_tt.json"))?;
        inverse_tt.save_json(&self.artifact("inverse_tt.json"))?;
        let report = ApproxReport {
            schema_version: ARTIFACT_VERSION,
            holdout_rel_error: cross_report.holdout_rel_error,
            sweeps: cross_report.sweeps,
            evaluations: cross_report.evaluations,
            parameter_count: density_tt.parameter_count(),
            inverse_parameter_count: inverse_tt.parameter_count(),
            interior_ranks: density_tt.interior_ranks(),
        };
        write_json(&self.artifact("approx_report.json"), &report)?;
        Ok(report)
    }

    /// Draw feasible and obstacle configurations from the persisted TTs,
    /// rank them by the exact metric and persist the sample sets.
    pub fn cmd_sample(&self) -> Result<SampleSets, PipelineError> {
        let density_tt = TensorTrain::load_json(&self.require("density_tt.json")?)?;
        let inverse_tt = TensorTrain::load_json(&self.require("inverse_tt.json")?)?;
        let s = &self.config.sampling;

        let make_samples = |tt: &TensorTrain, count: usize, stream: u64| -> Result<Vec<Sample>, PipelineError> {
            let idx = tt_sample(tt, count, self.config.seed ^ stream)?;
            idx.iter()
                .map(|vidx| {
                    let q = self.grid.virtual_to_value(vidx)?;
                    let density = density_value(&self.robot, &self.metric, &q)?;
                    Ok(Sample { q, density })
                })
                .collect()
        };

        let mut feasible = make_samples(&density_tt, s.k_c, STREAM_FEASIBLE)?;
        let mut obstacle = make_samples(&inverse_tt, s.n_o, STREAM_OBSTACLE)?;

        // serial arms: self-colliding feasible samples become obstacles
        if let Some(radius) = s.self_collision_radius {
            let mut kept = Vec::with_capacity(feasible.len());
            for sample in feasible {
                if self.robot.self_collides(&sample.q, radius)? {
                    obstacle.push(sample);
                } else {
                    kept.push(sample);
                }
            }
            feasible = kept;
        }

        let mut feasible_best = feasible.clone();
        feasible_best.sort_by(|a, b| b.density.total_cmp(&a.density));
        feasible_best.truncate(s.k_c_best);
        let mut obstacle_best = obstacle.clone();
        obstacle_best.sort_by(|a, b| a.density.total_cmp(&b.density));
        obstacle_best.truncate(s.n_o_best);

        let sets = SampleSets {
            feasible,
            feasible_best,
            obstacle,
            obstacle_best,
        };
        write_json(
            &self.artifact("samples.json"),
            &SamplesFile {
                schema_version: ARTIFACT_VERSION,
                sets: sets.clone(),
            },
        )?;
        Ok(sets)
    }

    /// Cluster obstacles, build convex hulls, grow IRIS regions from the
    /// best feasible seeds, prune, and persist regions plus graph edges.
    pub fn cmd_regions(&self) -> Result<RegionsFile, PipelineError> {
        let samples: SamplesFile = read_json(&self.require("samples.json")?)?;
        let sets = samples.sets;
        let domain = self.domain();

        let obstacle_points: Vec<DVector<f64>> = sets
            .obstacle_best
            .iter()
            .map(|s| DVector::from_row_slice(&s.q))
            .collect();
        let (clusters, noise_count) = if obstacle_points.len() > self.config.clustering.k {
            let clustering = rnn_dbscan(&obstacle_points, self.config.clustering.k)?;
            (clustering.clusters, clustering.noise.len())
        } else {
            (Vec::new(), obstacle_points.len())
        };
        let mut obstacles = Vec::with_capacity(clusters.len());
        for cluster in &clusters {
            let pts: Vec<DVector<f64>> =
                cluster.iter().map(|&i| obstacle_points[i].clone()).collect();
            obstacles.push(cluster_to_polytope(&pts, self.config.clustering.inflation)?);
        }

        // seeds in density-descending order (feasible_best is sorted)
        let seeds: Vec<DVector<f64>> = sets
            .feasible_best
            .iter()
            .map(|s| DVector::from_row_slice(&s.q))
            .collect();
        let batch = iris_batch(&seeds, &obstacles, &domain, self.config.iris.n_iris);

        let polytopes: Vec<Polytope> =
            batch.regions.iter().map(|r| r.polytope.clone()).collect();
        let kept = prune_indices(
            &polytopes,
            self.config.pruning.coverage_threshold,
            self.config.pruning.volume_samples,
            self.config.seed ^ STREAM_PRUNE,
        );

        let mut entries = Vec::with_capacity(kept.len());
        for &i in &kept {
            let region = &batch.regions[i];
            entries.push(RegionEntry {
                polytope: PolyData::from_polytope(&region.polytope),
                ellipsoid_shape: matrix_rows(region.ellipsoid.shape()),
                ellipsoid_center: region.ellipsoid.center().iter().copied().collect(),
                seed: region.seed.iter().copied().collect(),
                volume_estimate: monte_carlo_volume(
                    &region.polytope,
                    self.config.pruning.volume_samples,
                    self.config.seed ^ STREAM_PRUNE,
                ),
            });
        }
        let kept_polys: Vec<Polytope> = kept.iter().map(|&i| polytopes[i].clone()).collect();
        let graph = build_graph(&kept_polys);
        let edges: Vec<(usize, usize)> = graph.edges().iter().map(|e| (e.u, e.v)).collect();

        let file = RegionsFile {
            schema_version: ARTIFACT_VERSION,
            regions: entries,
            obstacles: obstacles.iter().map(PolyData::from_polytope).collect(),
            edges,
            diagnostics: RegionsDiagnostics {
                clusters: clusters.len(),
                noise_points: noise_count,
                candidates_before_prune: batch.regions.len(),
                regions_after_prune: kept.len(),
                seeds_skipped_covered: batch.skipped_covered.len(),
                seeds_skipped_in_obstacle: batch.skipped_in_obstacle.len(),
                seed_failures: batch
                    .failures
                    .iter()
                    .map(|(i, msg)| format!("seed {i}: {msg}"))
                    .collect(),
            },
        };
        write_json(&self.artifact("regions.json"), &file)?;
        Ok(file)
    }

    /// Load the persisted region graph (intersections reconstructed from
    /// the stored edge pairs).
    pub fn load_graph(&self) -> Result<(RegionGraph, Vec<Polytope>), PipelineError> {
        let file: RegionsFile = read_json(&self.require("regions.json")?)?;
        let regions: Vec<Polytope> = file
            .regions
            .iter()
            .map(|e| e.polytope.to_polytope())
            .collect::<Result<_, _>>()?;
        let obstacles: Vec<Polytope> = file
            .obstacles
            .iter()
            .map(PolyData::to_polytope)
            .collect::<Result<_, _>>()?;
        Ok((graph_from_edges(&regions, &file.edges), obstacles))
    }

    /// Plan between two configurations through the persisted region graph.
    pub fn cmd_plan(&self, q_start: &[f64], q_goal: &[f64]) -> Result<PlanFile, PipelineError> {
        let (graph, _) = self.load_graph()?;
        let density_tt = TensorTrain::load_json(&self.require("density_tt.json")?)?;
        let query = PlanQuery {
            q_start: q_start.to_vec(),
            q_goal: q_goal.to_vec(),
            cost_kind: self.config.planner.cost,
            max_discrete_paths: self.config.planner.max_discrete_paths,
        };
        let mut plan = planner::shortest_path(&graph, &query);
        let mut in_safe = None;
        if plan.status == PlanStatus::Ok {
            plan.pdf_score = pdf_score(
                &plan,
                &density_tt,
                &self.grid,
                self.config.planner.samples_per_segment,
            );
            in_safe = Some(path_in_safe_sets(
                &plan,
                &graph,
                self.config.planner.samples_per_segment,
            ));
        }
        let file = PlanFile {
            schema_version: ARTIFACT_VERSION,
            plan,
            path_in_safe_sets: in_safe,
        };
        write_json(&self.artifact("plan.json"), &file)?;
        Ok(file)
    }

    /// Run the planner comparison; builds missing artifacts on demand.
    pub fn cmd_bench(&self) -> Result<(Vec<BenchRecord>, BenchSummary), PipelineError> {
        if !self.artifact("density_tt.json").exists() {
            self.cmd_approximate()?;
        }
        if !self.artifact("samples.json").exists() {
            self.cmd_sample()?;
        }
        if !self.artifact("regions.json").exists() {
            self.cmd_regions()?;
        }
        let (graph, obstacles) = self.load_graph()?;
        let density_tt = TensorTrain::load_json(&self.require("density_tt.json")?)?;
        let limits = self.domain();
        let artifacts = BenchArtifacts {
            density: &density_tt,
            grid: &self.grid,
            graph: &graph,
            obstacles: &obstacles,
            limits: &limits,
        };
        let bench_cfg = BenchConfig {
            n_queries: self.config.bench.n_queries,
            rng_seed: self.config.seed,
            min_start_goal_distance: self.config.bench.min_start_goal_distance,
            rrt_step: self.config.bench.rrt_step,
            rrt_max_iters: self.config.bench.rrt_max_iters,
            samples_per_segment: self.config.bench.samples_per_segment,
            max_discrete_paths: self.config.planner.max_discrete_paths,
        };
        let (records, summary) = run_benchmark(&artifacts, &bench_cfg)?;
        write_records_csv(&self.artifact("bench_records.csv"), &records)?;
        write_summary_json(&self.artifact("bench_summary.json"), &summary)?;
        Ok((records, summary))
    }

    /// Export plotting tables. Kinds: `density-slice` (TT),
    /// `density-slice-exact` (direct metric evaluation), `regions`
    /// (2-D vertex lists) and `plan-waypoints`.
    pub fn cmd_export_plot(
        &self,
        kind: &str,
        dims: (usize, usize),
        out: Option<&Path>,
    ) -> Result<PathBuf, PipelineError> {
        match kind {
            "density-slice" => {
                let tt = TensorTrain::load_json(&self.require("density_tt.json")?)?;
                let path = out
                    .map(Path::to_path_buf)
                    .unwrap_or_else(|| self.artifact(&format!("density_slice_{}_{}.csv", dims.0, dims.1)));
                self.write_slice_csv(&path, dims, |phys| {
                    let vidx = self.grid.physical_to_virtual(phys);
                    tt.eval(&vidx).unwrap_or(f64::NAN)
                })?;
                Ok(path)
            }
            "density-slice-exact" => {
                let path = out
                    .map(Path::to_path_buf)
                    .unwrap_or_else(|| self.artifact(&format!("density_slice_exact_{}_{}.csv", dims.0, dims.1)));
                self.write_slice_csv(&path, dims, |phys| {
                    let q = self.grid.index_to_value(phys).expect("index in range");
                    density_value(&self.robot, &self.metric, &q).unwrap_or(f64::NAN)
                })?;
                Ok(path)
            }
            "regions" => {
                let file: RegionsFile = read_json(&self.require("regions.json")?)?;
                let path = out
                    .map(Path::to_path_buf)
                    .unwrap_or_else(|| self.artifact("region_vertices.csv"));
                let mut lines = vec!["region,x,y".to_string()];
                for (ri, entry) in file.regions.iter().enumerate() {
                    let poly = entry.polytope.to_polytope()?;
                    if poly.dim() != 2 {
                        return Err(PipelineError::UnsupportedPlot(
                            "regions export needs 2-D polytopes".into(),
                        ));
                    }
                    for v in polytope_vertices_2d(&poly) {
                        lines.push(format!("{ri},{},{}", v[0], v[1]));
                    }
                }
                std::fs::write(&path, lines.join("\n") + "\n")?;
                Ok(path)
            }
            "plan-waypoints" => {
                let file: PlanFile = read_json(&self.require("plan.json")?)?;
                let path = out
                    .map(Path::to_path_buf)
                    .unwrap_or_else(|| self.artifact("plan_waypoints.csv"));
                let n = file.plan.waypoints.first().map(Vec::len).unwrap_or(0);
                let header: Vec<String> = (0..n).map(|k| format!("q{k}")).collect();
                let mut lines = vec![header.join(",")];
                for w in &file.plan.waypoints {
                    lines.push(
                        w.iter()
                            .map(f64::to_string)
                            .collect::<Vec<_>>()
                            .join(","),
                    );
                }
                std::fs::write(&path, lines.join("\n") + "\n")?;
                Ok(path)
            }
            other => Err(PipelineError::UnsupportedPlot(other.to_string())),
        }
    }

    /// Density slice over two free physical dimensions, remaining joints
    /// fixed at their middle bin. One CSV row per bin of the first free
    /// dimension.
    fn write_slice_csv(
        &self,
        path: &Path,
        dims: (usize, usize),
        eval: impl Fn(&[usize]) -> f64,
    ) -> Result<(), PipelineError> {
        let bins = self.grid.physical_bins();
        let np = bins.len();
        if dims.0 >= np || dims.1 >= np || dims.0 == dims.1 {
            return Err(PipelineError::Config(format!(
                "slice dims {dims:?} invalid for {np} joints"
            )));
        }
        let mut phys: Vec<usize> = bins.iter().map(|&b| b / 2).collect();
        let mut rows = Vec::with_capacity(bins[dims.0]);
        for i in 0..bins[dims.0] {
            phys[dims.0] = i;
            let mut row = Vec::with_capacity(bins[dims.1]);
            for j in 0..bins[dims.1] {
                phys[dims.1] = j;
                row.push(eval(&phys).to_string());
            }
            rows.push(row.join(","));
        }
        std::fs::write(path, rows.join("\n") + "\n")?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApproxReport {
    pub schema_version: u32,
    pub holdout_rel_error: f64,
    pub sweeps: usize,
    pub evaluations: u64,
    pub parameter_count: usize,
    pub inverse_parameter_count: usize,
    pub interior_ranks: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplesFile {
    pub schema_version: u32,
    pub sets: SampleSets,
}

/// Plain-array H-representation for artifacts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyData {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl PolyData {
    pub fn from_polytope(p: &Polytope) -> Self {
        Self {
            a: matrix_rows(p.a()),
            b: p.b().iter().copied().collect(),
        }
    }

    pub fn to_polytope(&self) -> Result<Polytope, GeomError> {
        let m = self.a.len();
        let n = self.a.first().map(Vec::len).unwrap_or(0);
        let a = DMatrix::from_fn(m, n, |i, j| self.a[i][j]);
        Polytope::new(a, DVector::from_row_slice(&self.b))
    }
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionEntry {
    pub polytope: PolyData,
    pub ellipsoid_shape: Vec<Vec<f64>>,
    pub ellipsoid_center: Vec<f64>,
    pub seed: Vec<f64>,
    pub volume_estimate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionsDiagnostics {
    pub clusters: usize,
    pub noise_points: usize,
    pub candidates_before_prune: usize,
    pub regions_after_prune: usize,
    pub seeds_skipped_covered: usize,
    pub seeds_skipped_in_obstacle: usize,
    pub seed_failures: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionsFile {
    pub schema_version: u32,
    pub regions: Vec<RegionEntry>,
    pub obstacles: Vec<PolyData>,
    /// Region-graph edges over the pruned regions.
    pub edges: Vec<(usize, usize)>,
    pub diagnostics: RegionsDiagnostics,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanFile {
    pub schema_version: u32,
    pub plan: PlanResult,
    pub path_in_safe_sets: Option<bool>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text)?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, PipelineError> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Vertices of a bounded 2-D H-polytope: intersect facet pairs, keep points
/// satisfying all constraints, order them around the centroid.
pub fn polytope_vertices_2d(poly: &Polytope) -> Vec<[f64; 2]> {
    let a = poly.a();
    let b = poly.b();
    let m = poly.num_facets();
    let mut verts: Vec<[f64; 2]> = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let det = a[(i, 0)] * a[(j, 1)] - a[(i, 1)] * a[(j, 0)];
            if det.abs() < 1e-12 {
                continue;
            }
            let x = (b[i] * a[(j, 1)] - b[j] * a[(i, 1)]) / det;
            let y = (a[(i, 0)] * b[j] - a[(j, 0)] * b[i]) / det;
            let p = DVector::from_row_slice(&[x, y]);
            if poly.contains(&p, 1e-7) && !verts.iter().any(|v| {
                (v[0] - x).abs() < 1e-9 && (v[1] - y).abs() < 1e-9
            }) {
                verts.push([x, y]);
            }
        }
    }
    if verts.len() > 2 {
        let cx = verts.iter().map(|v| v[0]).sum::<f64>() / verts.len() as f64;
        let cy = verts.iter().map(|v| v[1]).sum::<f64>() / verts.len() as f64;
        verts.sort_by(|p, q| {
            (p[1] - cy)
                .atan2(p[0] - cx)
                .total_cmp(&(q[1] - cy).atan2(q[0] - cx))
        });
    }
    verts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertices_of_unit_box() {
        let p = Polytope::from_box(&[0.0, 0.0], &[1.0, 1.0]);
        let verts = polytope_vertices_2d(&p);
        assert_eq!(verts.len(), 4);
    }

    #[test]
    fn config_validation_messages_carry_field_names() {
        let toml_text = r#"
            version = 1
            robot = "robot.toml"
            seed = 1
            [grid]
            bins = [8, 8]
            [cross]
            max_rank = 4
            n_nswp = 2
            tol = 1e-3
            [sampling]
            k_c = 10
            k_c_best = 20
            n_o = 10
            n_o_best = 5
            [clustering]
            k = 3
            [iris]
            n_iris = 1
            [pruning]
            coverage_threshold = 0.9
            volume_samples = 100
            [planner]
            cost = "path_length"
            max_discrete_paths = 5
            samples_per_segment = 10
            [bench]
            n_queries = 2
            min_start_goal_distance = 0.5
            rrt_step = 0.1
            rrt_max_iters = 100
            samples_per_segment = 10
        "#;
        let cfg: PipelineConfig = toml::from_str(toml_text).unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("k_c_best"), "{err}");
    }

    #[test]
    fn bad_reshape_is_rejected_with_message() {
        let toml_text = r#"
            version = 1
            robot = "robot.toml"
            seed = 1
            [grid]
            bins = [128]
            reshape = [[8, 8, 3]]
            [cross]
            max_rank = 4
            n_nswp = 2
            tol = 1e-3
            [sampling]
            k_c = 10
            k_c_best = 5
            n_o = 10
            n_o_best = 5
            [clustering]
            k = 3
            [iris]
            n_iris = 1
            [pruning]
            coverage_threshold = 0.9
            volume_samples = 100
            [planner]
            cost = "path_length"
            max_discrete_paths = 5
            samples_per_segment = 10
            [bench]
            n_queries = 2
            min_start_goal_distance = 0.5
            rrt_step = 0.1
            rrt_max_iters = 100
            samples_per_segment = 10
        "#;
        let cfg: PipelineConfig = toml::from_str(toml_text).unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("reshape"), "{err}");
        assert!(err.to_string().contains("128"), "{err}");
    }
}
