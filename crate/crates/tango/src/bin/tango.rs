//! Thin command-line front end over the pipeline stages.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use tango::pipeline::{Pipeline, PipelineError};
use tango::planner::PlanStatus;

#[derive(Parser)]
#[command(name = "tango", about = "TT-compressed configuration-space planning pipeline")]
struct Cli {
    /// Pipeline config (TOML).
    #[arg(short, long, global = true, default_value = "configs/planar_3dof.toml")]
    config: PathBuf,
    /// Directory for pipeline artifacts.
    #[arg(short, long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print progress details.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Approximate the density (and its inverse) with TT-Cross.
    Approximate,
    /// Draw feasible and obstacle configurations from the TTs.
    Sample,
    /// Cluster obstacles, grow IRIS regions, prune, build the graph.
    Regions,
    /// Plan between two configurations (comma-separated joint values).
    Plan {
        #[arg(long, value_delimiter = ',', num_args = 1.., allow_hyphen_values = true)]
        start: Vec<f64>,
        #[arg(long, value_delimiter = ',', num_args = 1.., allow_hyphen_values = true)]
        goal: Vec<f64>,
    },
    /// Compare the pipeline planner against the RRT baseline.
    Bench,
    /// Emit CSV tables for external plotting.
    ExportPlot {
        /// density-slice | density-slice-exact | regions | plan-waypoints
        #[arg(long)]
        kind: String,
        /// Two free physical dimensions for density slices (comma-separated).
        #[arg(long, value_delimiter = ',', num_args = 1..=2, default_value = "0,1")]
        dims: Vec<usize>,
        /// Output path (defaults into the artifact directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: &Cli) -> Result<i32, PipelineError> {
    let pipeline = Pipeline::load(&cli.config, &cli.out_dir, cli.seed)?;
    match &cli.command {
        Command::Approximate => {
            let t0 = std::time::Instant::now();
            let report = pipeline.cmd_approximate()?;
            eprintln!(
                "approximate: held-out error {:.3e}, {} parameters, {} sweeps, {} evaluations ({:.2}s)",
                report.holdout_rel_error,
                report.parameter_count,
                report.sweeps,
                report.evaluations,
                t0.elapsed().as_secs_f64()
            );
            Ok(0)
        }
        Command::Sample => {
            let sets = pipeline.cmd_sample()?;
            eprintln!(
                "sample: {} feasible ({} best), {} obstacle ({} best)",
                sets.feasible.len(),
                sets.feasible_best.len(),
                sets.obstacle.len(),
                sets.obstacle_best.len()
            );
            Ok(0)
        }
        Command::Regions => {
            let t0 = std::time::Instant::now();
            let file = pipeline.cmd_regions()?;
            let d = &file.diagnostics;
            eprintln!(
                "regions: {} clusters (+{} noise), {} candidates -> {} regions, {} edges ({:.2}s)",
                d.clusters,
                d.noise_points,
                d.candidates_before_prune,
                d.regions_after_prune,
                file.edges.len(),
                t0.elapsed().as_secs_f64()
            );
            if cli.verbose {
                for msg in &d.seed_failures {
                    eprintln!("  warning: {msg}");
                }
            }
            Ok(0)
        }
        Command::Plan { start, goal } => {
            let file = pipeline.cmd_plan(start, goal)?;
            match file.plan.status {
                PlanStatus::Ok => {
                    eprintln!(
                        "plan: cost {:.4}, {} waypoints, pdf score {:?}, in safe sets: {:?}",
                        file.plan.cost,
                        file.plan.waypoints.len(),
                        file.plan.pdf_score,
                        file.path_in_safe_sets
                    );
                    Ok(0)
                }
                PlanStatus::NoRegionContainsEndpoint => {
                    eprintln!("plan: an endpoint lies outside every safe region");
                    Ok(2)
                }
                PlanStatus::Disconnected => {
                    eprintln!("plan: start and goal regions are not connected");
                    Ok(2)
                }
            }
        }
        Command::Bench => {
            let (records, summary) = pipeline.cmd_bench()?;
            eprintln!(
                "bench: {} records; TANGO pdf {:.4} wp median {:.1} | RRT pdf {:.4} wp median {:.1}",
                records.len(),
                summary.tango.mean_pdf_score,
                summary.tango.median_waypoints,
                summary.rrt.mean_pdf_score,
                summary.rrt.median_waypoints
            );
            Ok(0)
        }
        Command::ExportPlot { kind, dims, out } => {
            if dims.len() != 2 {
                return Err(PipelineError::Config("--dims needs two indices".into()));
            }
            let path = pipeline.cmd_export_plot(kind, (dims[0], dims[1]), out.as_deref())?;
            eprintln!("export-plot: wrote {}", path.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
