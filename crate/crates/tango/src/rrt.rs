//! Single-tree RRT baseline in configuration space.
//!
//! Uniform sampling inside the joint-limit box, nearest-node extension by a
//! fixed step, collision checking against obstacle polytopes at a quarter
//! of the step size, and a goal connection attempt whenever a new node lands
//! within one step of the goal. Raw tree paths are returned without
//! shortcutting so waypoint counts reflect the unrefined tree.

use crate::geom::Polytope;
use crate::planner::{PlanDiagnostics, PlanResult, PlanStatus};
use nalgebra::DVector;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RrtError {
    #[error("start configuration lies inside an obstacle")]
    StartInObstacle,
    #[error("goal configuration lies inside an obstacle")]
    GoalInObstacle,
    #[error("endpoint outside joint limits")]
    EndpointOutsideLimits,
}

#[derive(Debug, Clone)]
pub struct RrtConfig {
    pub step: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for RrtConfig {
    fn default() -> Self {
        Self {
            step: 0.2,
            max_iters: 5000,
            seed: 0,
        }
    }
}

fn in_collision(q: &DVector<f64>, obstacles: &[Polytope]) -> bool {
    obstacles.iter().any(|o| o.contains(q, 0.0))
}

fn segment_collides(
    a: &DVector<f64>,
    b: &DVector<f64>,
    obstacles: &[Polytope],
    resolution: f64,
) -> bool {
    let len = (b - a).norm();
    let steps = (len / resolution).ceil().max(1.0) as usize;
    for s in 0..=steps {
        let t = s as f64 / steps as f64;
        let p = a + (b - a) * t;
        if in_collision(&p, obstacles) {
            return true;
        }
    }
    false
}

/// Standard single-tree RRT. Fails with `Disconnected` status after
/// `max_iters` samples without a goal connection. Deterministic for a fixed
/// seed.
pub fn rrt_plan(
    q_start: &[f64],
    q_goal: &[f64],
    obstacles: &[Polytope],
    limits: &Polytope,
    cfg: &RrtConfig,
) -> Result<PlanResult, RrtError> {
    let start = DVector::from_row_slice(q_start);
    let goal = DVector::from_row_slice(q_goal);
    if !limits.contains(&start, 1e-9) || !limits.contains(&goal, 1e-9) {
        return Err(RrtError::EndpointOutsideLimits);
    }
    if in_collision(&start, obstacles) {
        return Err(RrtError::StartInObstacle);
    }
    if in_collision(&goal, obstacles) {
        return Err(RrtError::GoalInObstacle);
    }

    let (lo, hi) = limits
        .bounding_box()
        .expect("joint-limit polytope is bounded");
    let n = lo.len();
    let resolution = cfg.step / 4.0;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut nodes: Vec<DVector<f64>> = vec![start.clone()];
    let mut parents: Vec<usize> = vec![usize::MAX];

    // trivial case: the straight connection already fits within one step
    if (&goal - &start).norm() <= cfg.step
        && !segment_collides(&start, &goal, obstacles, resolution)
    {
        return Ok(path_result(vec![start, goal]));
    }

    for _ in 0..cfg.max_iters {
        let sample = DVector::from_fn(n, |k, _| rng.gen_range(lo[k]..=hi[k]));
        // nearest node
        let (mut nearest, mut best_d) = (0usize, f64::INFINITY);
        for (i, node) in nodes.iter().enumerate() {
            let d = (&sample - node).norm();
            if d < best_d {
                best_d = d;
                nearest = i;
            }
        }
        if best_d < 1e-12 {
            continue;
        }
        let dir = (&sample - &nodes[nearest]) / best_d;
        let new = &nodes[nearest] + dir * cfg.step.min(best_d);
        if !limits.contains(&new, 0.0) || in_collision(&new, obstacles) {
            continue;
        }
        if segment_collides(&nodes[nearest], &new, obstacles, resolution) {
            continue;
        }
        nodes.push(new.clone());
        parents.push(nearest);

        // goal connection attempt within one step
        if (&goal - &new).norm() <= cfg.step
            && !segment_collides(&new, &goal, obstacles, resolution)
        {
            let mut path = vec![goal];
            let mut cursor = nodes.len() - 1;
            while cursor != usize::MAX {
                path.push(nodes[cursor].clone());
                cursor = parents[cursor];
            }
            path.reverse();
            return Ok(path_result(path));
        }
    }

    Ok(PlanResult {
        status: PlanStatus::Disconnected,
        waypoints: Vec::new(),
        region_path: Vec::new(),
        cost: f64::INFINITY,
        pdf_score: None,
        diagnostics: PlanDiagnostics::default(),
    })
}

fn path_result(path: Vec<DVector<f64>>) -> PlanResult {
    let cost = path
        .windows(2)
        .map(|w| (&w[1] - &w[0]).norm())
        .sum();
    PlanResult {
        status: PlanStatus::Ok,
        waypoints: path.iter().map(|p| p.iter().copied().collect()).collect(),
        region_path: Vec::new(),
        cost,
        pdf_score: None,
        diagnostics: PlanDiagnostics::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_obstacles_reaches_goal() {
        let limits = Polytope::from_box(&[-1.0, -1.0], &[1.0, 1.0]);
        let cfg = RrtConfig {
            step: 0.3,
            max_iters: 4000,
            seed: 5,
        };
        let plan = rrt_plan(&[-0.8, -0.8], &[0.8, 0.8], &[], &limits, &cfg).unwrap();
        assert_eq!(plan.status, PlanStatus::Ok);
        let straight = (1.6f64 * 1.6 + 1.6 * 1.6).sqrt();
        assert!(plan.cost >= straight - 1e-9);
    }

    #[test]
    fn impassable_wall_fails_after_budget() {
        let limits = Polytope::from_box(&[-1.0, -1.0], &[1.0, 1.0]);
        // wall spanning the entire box
        let wall = Polytope::from_box(&[-0.05, -1.0], &[0.05, 1.0]);
        let cfg = RrtConfig {
            step: 0.2,
            max_iters: 500,
            seed: 1,
        };
        let plan = rrt_plan(&[-0.8, 0.0], &[0.8, 0.0], &[wall], &limits, &cfg).unwrap();
        assert_eq!(plan.status, PlanStatus::Disconnected);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let limits = Polytope::from_box(&[-1.0, -1.0], &[1.0, 1.0]);
        let obstacle = Polytope::from_box(&[-0.3, -0.4], &[0.3, 0.4]);
        let cfg = RrtConfig {
            step: 0.25,
            max_iters: 4000,
            seed: 42,
        };
        let a = rrt_plan(&[-0.8, 0.0], &[0.8, 0.0], &[obstacle.clone()], &limits, &cfg).unwrap();
        let b = rrt_plan(&[-0.8, 0.0], &[0.8, 0.0], &[obstacle], &limits, &cfg).unwrap();
        assert_eq!(a.status, b.status);
        assert_eq!(a.waypoints, b.waypoints);
        assert_eq!(a.cost, b.cost);
    }

    #[test]
    fn rejects_endpoint_in_obstacle() {
        let limits = Polytope::from_box(&[-1.0, -1.0], &[1.0, 1.0]);
        let obstacle = Polytope::from_box(&[-0.3, -0.3], &[0.3, 0.3]);
        assert!(matches!(
            rrt_plan(&[0.0, 0.0], &[0.8, 0.8], &[obstacle], &limits, &RrtConfig::default()),
            Err(RrtError::StartInObstacle)
        ));
    }

    #[test]
    fn path_avoids_obstacles_at_check_resolution() {
        let limits = Polytope::from_box(&[-1.0, -1.0], &[1.0, 1.0]);
        let obstacle = Polytope::from_box(&[-0.25, -0.6], &[0.25, 0.6]);
        let cfg = RrtConfig {
            step: 0.2,
            max_iters: 8000,
            seed: 11,
        };
        let plan = rrt_plan(&[-0.8, 0.0], &[0.8, 0.0], &[obstacle.clone()], &limits, &cfg).unwrap();
        assert_eq!(plan.status, PlanStatus::Ok);
        for w in plan.waypoints.windows(2) {
            let a = DVector::from_row_slice(&w[0]);
            let b = DVector::from_row_slice(&w[1]);
            assert!(!segment_collides(&a, &b, &[obstacle.clone()], cfg.step / 4.0));
        }
    }
}
