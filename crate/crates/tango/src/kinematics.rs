//! Manipulator models, Jacobians, manipulability metrics and the density
//! construction used to drive TT-Cross.
//!
//! Two chain types are supported: planar N-link arms moving in a 2D
//! workspace, and fixed-base spatial serial chains given by modified DH
//! rows (used for the Panda with joints 5–7 locked). Locked joints keep a
//! constant value and are excluded from the active configuration.

use crate::grid::Grid;
use crate::tt::BlackBoxField;
use nalgebra::{DMatrix, DVector, Matrix3, Matrix4, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KinematicsError {
    #[error("expected {expected} active joint values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid robot description: {0}")]
    InvalidRobot(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("robot file parse error: {0}")]
    Parse(#[from] toml::de::Error),
}

/// Modified-DH row (Craig convention): `a` and `alpha` describe the link
/// preceding the joint, `d` the offset along the joint axis, `theta_offset`
/// a fixed addition to the joint variable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DhRow {
    pub a: f64,
    pub alpha: f64,
    pub d: f64,
    #[serde(default)]
    pub theta_offset: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Chain {
    /// Revolute joints in the plane, one link length per joint.
    Planar { link_lengths: Vec<f64> },
    /// Spatial serial chain of revolute joints, one modified-DH row per
    /// joint, plus an optional fixed flange transform appended at the end.
    Serial {
        dh: Vec<DhRow>,
        #[serde(default)]
        flange: Option<DhRow>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manipulator {
    #[serde(flatten)]
    pub chain: Chain,
    /// Per-joint (min, max) in radians, covering all joints (locked ones
    /// included).
    pub joint_limits: Vec<(f64, f64)>,
    /// (joint index, fixed value) pairs.
    #[serde(default)]
    pub locked_joints: Vec<(usize, f64)>,
}

impl Manipulator {
    pub fn planar(link_lengths: Vec<f64>, joint_limits: Vec<(f64, f64)>) -> Self {
        Self {
            chain: Chain::Planar { link_lengths },
            joint_limits,
            locked_joints: Vec::new(),
        }
    }

    /// Franka Panda arm with joints 5–7 locked at zero, leaving a 4-DoF
    /// configuration space. DH values follow the published Panda parameters.
    pub fn panda_4dof() -> Self {
        let dh = vec![
            DhRow { a: 0.0, alpha: 0.0, d: 0.333, theta_offset: 0.0 },
            DhRow { a: 0.0, alpha: -std::f64::consts::FRAC_PI_2, d: 0.0, theta_offset: 0.0 },
            DhRow { a: 0.0, alpha: std::f64::consts::FRAC_PI_2, d: 0.316, theta_offset: 0.0 },
            DhRow { a: 0.0825, alpha: std::f64::consts::FRAC_PI_2, d: 0.0, theta_offset: 0.0 },
            DhRow { a: -0.0825, alpha: -std::f64::consts::FRAC_PI_2, d: 0.384, theta_offset: 0.0 },
            DhRow { a: 0.0, alpha: std::f64::consts::FRAC_PI_2, d: 0.0, theta_offset: 0.0 },
            DhRow { a: 0.088, alpha: std::f64::consts::FRAC_PI_2, d: 0.0, theta_offset: 0.0 },
        ];
        let flange = Some(DhRow { a: 0.0, alpha: 0.0, d: 0.107, theta_offset: 0.0 });
        Self {
            chain: Chain::Serial { dh, flange },
            joint_limits: vec![
                (-2.8973, 2.8973),
                (-1.7628, 1.7628),
                (-2.8973, 2.8973),
                (-3.0718, -0.0698),
                (-2.8973, 2.8973),
                (-0.0175, 3.7525),
                (-2.8973, 2.8973),
            ],
            locked_joints: vec![(4, 0.0), (5, 0.0), (6, 0.0)],
        }
    }

    pub fn num_joints(&self) -> usize {
        match &self.chain {
            Chain::Planar { link_lengths } => link_lengths.len(),
            Chain::Serial { dh, .. } => dh.len(),
        }
    }

    pub fn num_active(&self) -> usize {
        self.num_joints() - self.locked_joints.len()
    }

    /// Indices of the unlocked joints, in order.
    pub fn active_indices(&self) -> Vec<usize> {
        (0..self.num_joints())
            .filter(|j| !self.locked_joints.iter().any(|(l, _)| l == j))
            .collect()
    }

    /// Limits of the active joints only.
    pub fn active_limits(&self) -> Vec<(f64, f64)> {
        self.active_indices()
            .iter()
            .map(|&j| self.joint_limits[j])
            .collect()
    }

    pub fn validate(&self) -> Result<(), KinematicsError> {
        let n = self.num_joints();
        if self.joint_limits.len() != n {
            return Err(KinematicsError::InvalidRobot(format!(
                "{} joint limits for {} joints",
                self.joint_limits.len(),
                n
            )));
        }
        for (j, (lo, hi)) in self.joint_limits.iter().enumerate() {
            if !(lo < hi) {
                return Err(KinematicsError::InvalidRobot(format!(
                    "joint {j}: min {lo} must be below max {hi}"
                )));
            }
        }
        for (j, _) in &self.locked_joints {
            if *j >= n {
                return Err(KinematicsError::InvalidRobot(format!(
                    "locked joint {j} out of range"
                )));
            }
        }
        if self.num_active() == 0 {
            return Err(KinematicsError::InvalidRobot("no active joints".into()));
        }
        if let Chain::Planar { link_lengths } = &self.chain {
            if link_lengths.iter().any(|&l| l <= 0.0) {
                return Err(KinematicsError::InvalidRobot(
                    "link lengths must be positive".into(),
                ));
            }
        }
        Ok(())
    }

    /// Expand an active-joint vector to the full joint vector, inserting the
    /// locked values.
    fn full_config(&self, q: &[f64]) -> Result<Vec<f64>, KinematicsError> {
        let active = self.active_indices();
        if q.len() != active.len() {
            return Err(KinematicsError::DimensionMismatch {
                expected: active.len(),
                got: q.len(),
            });
        }
        let mut full = vec![0.0; self.num_joints()];
        for (&j, &v) in active.iter().zip(q) {
            full[j] = v;
        }
        for &(j, v) in &self.locked_joints {
            full[j] = v;
        }
        Ok(full)
    }

    /// End-effector position: 2D for planar chains, 3D for serial chains.
    /// `q` holds the active joints only.
    pub fn forward_kinematics(&self, q: &[f64]) -> Result<DVector<f64>, KinematicsError> {
        let full = self.full_config(q)?;
        match &self.chain {
            Chain::Planar { link_lengths } => {
                let (mut x, mut y, mut angle) = (0.0, 0.0, 0.0);
                for (l, th) in link_lengths.iter().zip(&full) {
                    angle += th;
                    x += l * angle.cos();
                    y += l * angle.sin();
                }
                Ok(DVector::from_vec(vec![x, y]))
            }
            Chain::Serial { .. } => {
                let frames = self.serial_frames(&full);
                let p = frames.last().expect("at least one frame").1;
                Ok(DVector::from_vec(vec![p.x, p.y, p.z]))
            }
        }
    }

    /// Positional task Jacobian over the active joints: 2×N for planar
    /// chains, 3×N for serial ones. Analytic; agrees with central finite
    /// differences of `forward_kinematics`.
    pub fn jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>, KinematicsError> {
        let full = self.full_config(q)?;
        let active = self.active_indices();
        match &self.chain {
            Chain::Planar { link_lengths } => {
                let n = link_lengths.len();
                let mut cum = vec![0.0; n];
                let mut angle = 0.0;
                for (k, th) in full.iter().enumerate() {
                    angle += th;
                    cum[k] = angle;
                }
                let mut j = DMatrix::zeros(2, active.len());
                for (col, &jt) in active.iter().enumerate() {
                    let mut dx = 0.0;
                    let mut dy = 0.0;
                    for i in jt..n {
                        dx -= link_lengths[i] * cum[i].sin();
                        dy += link_lengths[i] * cum[i].cos();
                    }
                    j[(0, col)] = dx;
                    j[(1, col)] = dy;
                }
                Ok(j)
            }
            Chain::Serial { .. } => {
                let frames = self.serial_frames(&full);
                let p_e = frames.last().expect("frames").1;
                let mut j = DMatrix::zeros(3, active.len());
                for (col, &jt) in active.iter().enumerate() {
                    // joint jt rotates about the z-axis of frame jt
                    let (rot, origin) = &frames[jt];
                    let z = rot.column(2).into_owned();
                    let v = z.cross(&(p_e - origin));
                    j[(0, col)] = v.x;
                    j[(1, col)] = v.y;
                    j[(2, col)] = v.z;
                }
                Ok(j)
            }
        }
    }

    /// Rotation and origin of every joint frame (frame k is the frame whose
    /// z-axis carries joint k) plus the end-effector frame as the last entry.
    fn serial_frames(&self, full: &[f64]) -> Vec<(Matrix3<f64>, Vector3<f64>)> {
        let (dh, flange) = match &self.chain {
            Chain::Serial { dh, flange } => (dh, flange),
            _ => unreachable!(),
        };
        let mut t = Matrix4::<f64>::identity();
        let mut frames = Vec::with_capacity(dh.len() + 1);
        for (row, th) in dh.iter().zip(full) {
            // modified DH: rotate/translate about x_{i-1}, then about z_i
            let pre = dh_transform(row.a, row.alpha, 0.0, 0.0);
            t *= pre;
            // the joint axis lives in this intermediate frame
            frames.push((
                t.fixed_view::<3, 3>(0, 0).into_owned(),
                t.fixed_view::<3, 1>(0, 3).into_owned(),
            ));
            let post = dh_transform(0.0, 0.0, row.d, th + row.theta_offset);
            t *= post;
        }
        if let Some(fl) = flange {
            t *= dh_transform(fl.a, fl.alpha, fl.d, fl.theta_offset);
        }
        frames.push((
            t.fixed_view::<3, 3>(0, 0).into_owned(),
            t.fixed_view::<3, 1>(0, 3).into_owned(),
        ));
        frames
    }

    /// Joint-frame origins along the chain (base first, end-effector last),
    /// used by the capsule self-collision approximation.
    pub fn link_points(&self, q: &[f64]) -> Result<Vec<Vector3<f64>>, KinematicsError> {
        let full = self.full_config(q)?;
        match &self.chain {
            Chain::Planar { link_lengths } => {
                let mut pts = vec![Vector3::zeros()];
                let (mut x, mut y, mut angle) = (0.0, 0.0, 0.0);
                for (l, th) in link_lengths.iter().zip(&full) {
                    angle += th;
                    x += l * angle.cos();
                    y += l * angle.sin();
                    pts.push(Vector3::new(x, y, 0.0));
                }
                Ok(pts)
            }
            Chain::Serial { .. } => {
                let frames = self.serial_frames(&full);
                Ok(frames.into_iter().map(|(_, p)| p).collect())
            }
        }
    }

    /// Sphere-capsule self-collision approximation over link segments
    /// (consecutive joint-frame origins). A pair is tested only when the
    /// links are mechanically separated (more than two apart) and some joint
    /// between them is active — joint-hardware proximities at the elbow and
    /// rigidly locked wrist assemblies would otherwise always trigger.
    pub fn self_collides(&self, q: &[f64], radius: f64) -> Result<bool, KinematicsError> {
        let pts = self.link_points(q)?;
        let locked: Vec<usize> = self.locked_joints.iter().map(|&(j, _)| j).collect();
        // link k spans pts[k] → pts[k+1]; keep original link indices
        let mut segments = Vec::new();
        for (k, w) in pts.windows(2).enumerate() {
            if (w[1] - w[0]).norm() > 1e-9 {
                segments.push((k, w[0], w[1]));
            }
        }
        let n_joints = self.num_joints();
        for a in 0..segments.len() {
            for b in a + 1..segments.len() {
                let (i, p1, q1) = &segments[a];
                let (j, p2, q2) = &segments[b];
                if j - i <= 2 {
                    continue;
                }
                // relative motion between links i and j is driven by the
                // joints strictly after i up to j
                let bridging_active = (*i + 1..=*j)
                    .filter(|k| *k < n_joints)
                    .any(|k| !locked.contains(&k));
                if !bridging_active {
                    continue;
                }
                if segment_distance(&(*p1, *q1), &(*p2, *q2)) < radius {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
}

fn dh_transform(a: f64, alpha: f64, d: f64, theta: f64) -> Matrix4<f64> {
    let (sa, ca) = (alpha.sin(), alpha.cos());
    let (st, ct) = (theta.sin(), theta.cos());
    // screw along x (a, alpha) followed by screw along z (d, theta)
    Matrix4::new(
        ct, -st, 0.0, a, //
        st * ca, ct * ca, -sa, -d * sa, //
        st * sa, ct * sa, ca, d * ca, //
        0.0, 0.0, 0.0, 1.0,
    )
}

fn segment_distance(s1: &(Vector3<f64>, Vector3<f64>), s2: &(Vector3<f64>, Vector3<f64>)) -> f64 {
    // closest distance between two segments, clamped projections
    let (p1, q1) = (s1.0, s1.1);
    let (p2, q2) = (s2.0, s2.1);
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);
    let c = d1.dot(&r);
    let b = d1.dot(&d2);
    let denom = a * e - b * b;
    let mut s = if denom.abs() > 1e-12 {
        ((b * f - c * e) / denom).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mut t = if e > 1e-12 { (b * s + f) / e } else { 0.0 };
    if t < 0.0 {
        t = 0.0;
        s = if a > 1e-12 { (-c / a).clamp(0.0, 1.0) } else { 0.0 };
    } else if t > 1.0 {
        t = 1.0;
        s = if a > 1e-12 { ((b - c) / a).clamp(0.0, 1.0) } else { 0.0 };
    }
    ((p1 + d1 * s) - (p2 + d2 * t)).norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Yoshikawa,
    Riemannian,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricConfig {
    pub kind: MetricKind,
    /// Density sharpness γ in `exp(-γ·cost)`.
    pub gamma: f64,
    /// Radius of the reference hypersphere Σ for the Riemannian index.
    pub sigma_radius: f64,
    /// Regularization added to J·Jᵀ before the matrix logarithm.
    pub regularization_eps: f64,
}

impl MetricConfig {
    pub fn riemannian(gamma: f64) -> Self {
        Self {
            kind: MetricKind::Riemannian,
            gamma,
            sigma_radius: 1.0,
            regularization_eps: 1e-9,
        }
    }

    pub fn yoshikawa(gamma: f64) -> Self {
        Self {
            kind: MetricKind::Yoshikawa,
            gamma,
            sigma_radius: 1.0,
            regularization_eps: 1e-9,
        }
    }

    pub fn validate(&self) -> Result<(), KinematicsError> {
        if !(self.gamma > 0.0) {
            return Err(KinematicsError::InvalidRobot("gamma must be > 0".into()));
        }
        if !(self.sigma_radius > 0.0) {
            return Err(KinematicsError::InvalidRobot(
                "sigma_radius must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Yoshikawa manipulability `√det(J·Jᵀ)`: volume of the velocity ellipsoid,
/// exactly zero at kinematic singularities.
pub fn yoshikawa(m: &Manipulator, q: &[f64]) -> Result<f64, KinematicsError> {
    let j = m.jacobian(q)?;
    let jjt = &j * j.transpose();
    Ok(jjt.determinant().max(0.0).sqrt())
}

/// Squared affine-invariant distance between an SPD matrix and the sphere
/// `sigma_radius²·I`: `‖log(Σ^{-1/2} M Σ^{-1/2})‖_F²`. With a spherical Σ
/// this is the sum of squared log-eigenvalues of `M / sigma_radius²`.
pub fn spd_log_distance_sq(m: &DMatrix<f64>, sigma_radius: f64) -> f64 {
    let scaled = m / (sigma_radius * sigma_radius);
    let eig = scaled.symmetric_eigen();
    eig.eigenvalues
        .iter()
        .map(|&l| l.max(1e-300).ln().powi(2))
        .sum()
}

/// Geometry-aware singularity index ξ(q): Riemannian distance between the
/// manipulability ellipsoid J·Jᵀ (regularized by ε·I so the logarithm exists
/// at singularities) and the reference hypersphere.
pub fn riemannian_index(
    m: &Manipulator,
    q: &[f64],
    cfg: &MetricConfig,
) -> Result<f64, KinematicsError> {
    let j = m.jacobian(q)?;
    let mut jjt = &j * j.transpose();
    for i in 0..jjt.nrows() {
        jjt[(i, i)] += cfg.regularization_eps;
    }
    Ok(spd_log_distance_sq(&jjt, cfg.sigma_radius))
}

/// Density value in [0, 1] for a single configuration.
///
/// Riemannian: `p = exp(-γ·ξ)` — low index means well-conditioned, so high
/// density. Yoshikawa manipulability is a quality measure rather than a
/// cost, so it maps through `p = 1 - exp(-γ·C_Y)`: singular configurations
/// get zero density, dexterous ones approach one.
pub fn density_value(m: &Manipulator, cfg: &MetricConfig, q: &[f64]) -> Result<f64, KinematicsError> {
    match cfg.kind {
        MetricKind::Riemannian => {
            let xi = riemannian_index(m, q, cfg)?;
            Ok((-cfg.gamma * xi).exp())
        }
        MetricKind::Yoshikawa => {
            let c = yoshikawa(m, q)?;
            Ok(1.0 - (-cfg.gamma * c).exp())
        }
    }
}

/// Black-box density field over the grid, ready for TT-Cross.
pub fn density(
    m: &Manipulator,
    cfg: &MetricConfig,
    grid: &Grid,
) -> Result<BlackBoxField<impl Fn(&[f64]) -> f64 + Sync>, KinematicsError> {
    if grid.num_physical() != m.num_active() {
        return Err(KinematicsError::DimensionMismatch {
            expected: m.num_active(),
            got: grid.num_physical(),
        });
    }
    m.validate()?;
    cfg.validate()?;
    let robot = m.clone();
    let metric = cfg.clone();
    Ok(BlackBoxField::new(grid.clone(), move |q: &[f64]| {
        density_value(&robot, &metric, q).expect("grid arity checked")
    }))
}

/// Robot description file: chain parameters, joint limits, locked joints and
/// (optionally) the metric settings that go with the robot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobotFile {
    pub version: u32,
    #[serde(flatten)]
    pub manipulator: Manipulator,
    pub metric: Option<MetricConfig>,
}

pub const ROBOT_FILE_VERSION: u32 = 1;

impl RobotFile {
    pub fn load(path: &std::path::Path) -> Result<Self, KinematicsError> {
        let text = std::fs::read_to_string(path)?;
        let file: RobotFile = toml::from_str(&text)?;
        if file.version != ROBOT_FILE_VERSION {
            return Err(KinematicsError::InvalidRobot(format!(
                "unsupported robot file version {}",
                file.version
            )));
        }
        file.manipulator.validate()?;
        Ok(file)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), KinematicsError> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| KinematicsError::InvalidRobot(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn unit_planar3() -> Manipulator {
        Manipulator::planar(vec![1.0, 1.0, 1.0], vec![(-PI, PI); 3])
    }

    fn fd_jacobian(m: &Manipulator, q: &[f64], h: f64) -> DMatrix<f64> {
        let fk0 = m.forward_kinematics(q).unwrap();
        let mut j = DMatrix::zeros(fk0.len(), q.len());
        for k in 0..q.len() {
            let mut qp = q.to_vec();
            let mut qm = q.to_vec();
            qp[k] += h;
            qm[k] -= h;
            let fp = m.forward_kinematics(&qp).unwrap();
            let fm = m.forward_kinematics(&qm).unwrap();
            for r in 0..fk0.len() {
                j[(r, k)] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        j
    }

    #[test]
    fn planar_fk_fixtures() {
        let m = unit_planar3();
        let p = m.forward_kinematics(&[0.0, 0.0, 0.0]).unwrap();
        assert!((p[0] - 3.0).abs() < 1e-12 && p[1].abs() < 1e-12);
        let p = m.forward_kinematics(&[FRAC_PI_2, -FRAC_PI_2, 0.0]).unwrap();
        assert!((p[0] - 2.0).abs() < 1e-12 && (p[1] - 1.0).abs() < 1e-12);
        let p = m.forward_kinematics(&[FRAC_PI_2, 0.0, 0.0]).unwrap();
        assert!(p[0].abs() < 1e-12 && (p[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn fk_rejects_dimension_mismatch() {
        let m = unit_planar3();
        assert!(matches!(
            m.forward_kinematics(&[0.0, 0.0]),
            Err(KinematicsError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn jacobian_matches_finite_differences_planar() {
        let m = unit_planar3();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let q: Vec<f64> = (0..3).map(|_| rng.gen_range(-PI..PI)).collect();
            let j = m.jacobian(&q).unwrap();
            let jfd = fd_jacobian(&m, &q, 1e-5);
            assert!((j - jfd).amax() <= 1e-6);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences_panda() {
        let m = Manipulator::panda_4dof();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let limits = m.active_limits();
        for _ in 0..50 {
            let q: Vec<f64> = limits
                .iter()
                .map(|&(lo, hi)| rng.gen_range(lo..hi))
                .collect();
            let j = m.jacobian(&q).unwrap();
            let jfd = fd_jacobian(&m, &q, 1e-5);
            assert!((j - jfd).amax() <= 1e-6, "mismatch at {q:?}");
        }
    }

    #[test]
    fn stretched_planar_arm_is_singular() {
        let m = unit_planar3();
        let j = m.jacobian(&[0.3, 0.0, 0.0]).unwrap();
        // collinear links: rank 1
        let svd = j.svd(false, false);
        let s = svd.singular_values;
        assert!(s[0] > 1e-6);
        assert!(s[1] < 1e-12);
        // fully stretched along x: first Jacobian row is exactly zero
        assert_eq!(yoshikawa(&m, &[0.0, 0.0, 0.0]).unwrap(), 0.0);
        // rotated stretch: determinant round-off only
        assert!(yoshikawa(&m, &[0.3, 0.0, 0.0]).unwrap() < 1e-6);
    }

    #[test]
    fn single_link_jacobian() {
        let m = Manipulator::planar(vec![0.7], vec![(-PI, PI)]);
        let j = m.jacobian(&[0.0]).unwrap();
        assert!((j[(0, 0)] - 0.0).abs() < 1e-12);
        assert!((j[(1, 0)] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn yoshikawa_two_link_right_angle() {
        // symbolic 2-link Jacobian at q = (0, π/2): |det J| = l1·l2·|sin q2| = 1
        let m = Manipulator::planar(vec![1.0, 1.0], vec![(-PI, PI); 2]);
        let c = yoshikawa(&m, &[0.0, FRAC_PI_2]).unwrap();
        assert!((c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn yoshikawa_equals_product_of_singular_values() {
        let m = unit_planar3();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let q: Vec<f64> = (0..3).map(|_| rng.gen_range(-PI..PI)).collect();
            let c = yoshikawa(&m, &q).unwrap();
            let svd = m.jacobian(&q).unwrap().svd(false, false);
            let prod: f64 = svd.singular_values.iter().product();
            assert!((c - prod).abs() < 1e-9);
        }
    }

    #[test]
    fn riemannian_index_zero_at_sphere() {
        let m = DMatrix::identity(2, 2);
        assert!(spd_log_distance_sq(&m, 1.0) < 1e-18);
    }

    #[test]
    fn riemannian_index_isotropic_closed_form() {
        // M = c·Σ in task dimension 2 → ξ = 2·(ln c)²
        let c = 3.7;
        let m = DMatrix::identity(2, 2) * c;
        let xi = spd_log_distance_sq(&m, 1.0);
        assert!((xi - 2.0 * c.ln().powi(2)).abs() < 1e-10);
    }

    #[test]
    fn riemannian_index_affine_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = DMatrix::from_fn(2, 2, |_, _| rng.gen_range(-1.0..1.0));
            let m = &a * a.transpose() + DMatrix::identity(2, 2) * 0.1;
            let c: f64 = rng.gen_range(0.2..5.0);
            let base = spd_log_distance_sq(&m, 1.0);
            let scaled = spd_log_distance_sq(&(&m * c), c.sqrt());
            assert!((base - scaled).abs() < 1e-10);
        }
    }

    #[test]
    fn riemannian_grows_towards_stretch_singularity() {
        let m = unit_planar3();
        let cfg = MetricConfig::riemannian(1.0);
        // straighten the arm along a 1-D slice: ξ should increase monotonically
        let mut last = -1.0;
        for t in (1..=10).rev() {
            let q2 = t as f64 * 0.2;
            let xi = riemannian_index(&m, &[0.4, q2, q2], &cfg).unwrap();
            assert!(xi > last, "xi {xi} not increasing at q2 {q2}");
            last = xi;
        }
    }

    #[test]
    fn density_fixtures() {
        let m = unit_planar3();
        let riem = MetricConfig::riemannian(1.0);
        // a configuration where M ≈ Σ would give p ≈ 1; check the pointwise map
        let q = [0.4, 1.2, -0.9];
        let xi = riemannian_index(&m, &q, &riem).unwrap();
        let p = density_value(&m, &riem, &q).unwrap();
        assert!((p - (-xi).exp()).abs() < 1e-12);

        let yosh = MetricConfig::yoshikawa(1.0);
        let p_sing = density_value(&m, &yosh, &[0.0, 0.0, 0.0]).unwrap();
        assert!(p_sing.abs() < 1e-12);
    }

    #[test]
    fn density_stays_in_unit_interval() {
        let m = unit_planar3();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for cfg in [MetricConfig::riemannian(0.5), MetricConfig::yoshikawa(2.0)] {
            for _ in 0..200 {
                let q: Vec<f64> = (0..3).map(|_| rng.gen_range(-PI..PI)).collect();
                let p = density_value(&m, &cfg, &q).unwrap();
                assert!((0.0..=1.0).contains(&p), "p = {p}");
            }
        }
    }

    #[test]
    fn panda_self_collision_at_folded_configuration() {
        let m = Manipulator::panda_4dof();
        // q4 near its lower limit folds the forearm back towards the upper arm
        let folded = m.self_collides(&[0.0, 0.0, 0.0, -3.0], 0.11).unwrap();
        let open = m.self_collides(&[0.0, -0.5, 0.0, -1.5], 0.11).unwrap();
        assert!(folded);
        assert!(!open);
    }

    #[test]
    fn robot_file_round_trip() {
        let file = RobotFile {
            version: ROBOT_FILE_VERSION,
            manipulator: unit_planar3(),
            metric: Some(MetricConfig::riemannian(1.0)),
        };
        let dir = std::env::temp_dir().join("tango_robot_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("robot.toml");
        file.save(&path).unwrap();
        let back = RobotFile::load(&path).unwrap();
        assert_eq!(back.manipulator.num_joints(), 3);
        assert!(back.metric.is_some());
    }
}


