//! Convex geometry: H-polytopes, ellipsoids and the dense solvers behind
//! feasibility checks, projections and inscribed-ellipsoid maximization.

pub mod hull;
pub mod linprog;
pub mod mvie;
pub mod qp;

use nalgebra::{Cholesky, DMatrix, DVector};
use thiserror::Error;

pub use hull::{affine_frame, convex_hull_halfspaces, HullFacet};
pub use linprog::{solve_lp, LpResult, LpStatus};
pub use qp::{
    min_norm_point, polytope_pair_distance, project_polytope, solve_qp, QpOptions, QpResult,
    QpStatus,
};

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("facet normal has zero length (row {0})")]
    ZeroNormal(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("shape matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// H-representation polytope `{x : Ax ≤ b}` with unit-normalized rows.
#[derive(Debug, Clone)]
pub struct Polytope {
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl Polytope {
    /// Normalizes every row to unit length; rejects zero normals.
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self, GeomError> {
        if a.nrows() != b.len() {
            return Err(GeomError::DimensionMismatch(a.nrows(), b.len()));
        }
        let mut a = a;
        let mut b = b;
        for i in 0..a.nrows() {
            let norm = a.row(i).norm();
            if norm < 1e-14 {
                return Err(GeomError::ZeroNormal(i));
            }
            for j in 0..a.ncols() {
                a[(i, j)] /= norm;
            }
            b[i] /= norm;
        }
        Ok(Self { a, b })
    }

    /// Axis-aligned box `lo ≤ x ≤ hi`.
    pub fn from_box(lo: &[f64], hi: &[f64]) -> Self {
        let n = lo.len();
        let mut a = DMatrix::zeros(2 * n, n);
        let mut b = DVector::zeros(2 * n);
        for k in 0..n {
            a[(2 * k, k)] = 1.0;
            b[2 * k] = hi[k];
            a[(2 * k + 1, k)] = -1.0;
            b[2 * k + 1] = -lo[k];
        }
        Self { a, b }
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn num_facets(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        let ax = &self.a * x;
        (0..self.num_facets()).all(|i| ax[i] <= self.b[i] + tol)
    }

    pub fn contains_slice(&self, x: &[f64], tol: f64) -> bool {
        self.contains(&DVector::from_row_slice(x), tol)
    }

    /// Stacked H-representation of the intersection.
    pub fn intersect(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        let m = self.num_facets() + other.num_facets();
        let mut a = DMatrix::zeros(m, self.dim());
        a.view_mut((0, 0), (self.num_facets(), self.dim()))
            .copy_from(&self.a);
        a.view_mut((self.num_facets(), 0), (other.num_facets(), self.dim()))
            .copy_from(&other.a);
        let mut b = DVector::zeros(m);
        b.rows_mut(0, self.num_facets()).copy_from(&self.b);
        b.rows_mut(self.num_facets(), other.num_facets())
            .copy_from(&other.b);
        Self { a, b }
    }

    pub fn push_facet(&mut self, normal: &DVector<f64>, offset: f64) {
        let norm = normal.norm();
        debug_assert!(norm > 1e-14);
        let m = self.num_facets();
        let mut a = DMatrix::zeros(m + 1, self.dim());
        a.view_mut((0, 0), (m, self.dim())).copy_from(&self.a);
        for j in 0..self.dim() {
            a[(m, j)] = normal[j] / norm;
        }
        let mut b = DVector::zeros(m + 1);
        b.rows_mut(0, m).copy_from(&self.b);
        b[m] = offset / norm;
        self.a = a;
        self.b = b;
    }

    /// Chebyshev center and radius: `max r  s.t.  Ax + r·1 ≤ b` (rows are
    /// unit-normalized). `None` when the polytope is empty. For unbounded
    /// feasible polytopes the radius is reported as `f64::INFINITY`.
    pub fn chebyshev(&self) -> Option<(DVector<f64>, f64)> {
        let n = self.dim();
        let m = self.num_facets();
        if m == 0 {
            return Some((DVector::zeros(n), f64::INFINITY));
        }
        let mut a = DMatrix::zeros(m, n + 1);
        a.view_mut((0, 0), (m, n)).copy_from(&self.a);
        for i in 0..m {
            a[(i, n)] = 1.0;
        }
        let mut c = DVector::zeros(n + 1);
        c[n] = 1.0;
        let res = solve_lp(&c, &a, &self.b);
        match res.status {
            // a negative optimal radius certifies emptiness
            LpStatus::Optimal if res.x[n] >= 0.0 => {
                let center = res.x.rows(0, n).into_owned();
                Some((center, res.x[n]))
            }
            LpStatus::Unbounded => Some((DVector::zeros(n), f64::INFINITY)),
            _ => None,
        }
    }

    /// True when an interior ball of radius ≥ `margin` exists.
    pub fn certified_nonempty(&self, margin: f64) -> bool {
        match self.chebyshev() {
            Some((_, r)) => r >= margin,
            None => false,
        }
    }

    /// Maximize a linear objective; `None` when empty or unbounded.
    pub fn max_linear(&self, c: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
        let res = solve_lp(c, &self.a, &self.b);
        match res.status {
            LpStatus::Optimal => Some((res.x, res.objective)),
            _ => None,
        }
    }

    /// Tight axis-aligned bounds, via 2·dim LPs. `None` for empty or
    /// unbounded polytopes.
    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let n = self.dim();
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        for k in 0..n {
            let mut c = DVector::zeros(n);
            c[k] = 1.0;
            hi[k] = self.max_linear(&c)?.1;
            c[k] = -1.0;
            lo[k] = -self.max_linear(&c)?.1;
        }
        Some((lo, hi))
    }

    /// Exact containment `inner ⊆ self`: every facet bound of `self` holds
    /// when maximized over `inner` (one LP per facet). An empty `inner` is
    /// contained by convention.
    pub fn contains_polytope(&self, inner: &Self, tol: f64) -> bool {
        for i in 0..self.num_facets() {
            let c = self.a.row(i).transpose();
            match solve_lp(&c, &inner.a, &inner.b) {
                LpResult {
                    status: LpStatus::Optimal,
                    objective,
                    ..
                } => {
                    if objective > self.b[i] + tol {
                        return false;
                    }
                }
                LpResult {
                    status: LpStatus::Infeasible,
                    ..
                } => return true,
                _ => return false,
            }
        }
        true
    }

    /// Euclidean projection (QP).
    pub fn project(&self, point: &DVector<f64>) -> DVector<f64> {
        project_polytope(point, &self.a, &self.b, &QpOptions::default()).x
    }

    /// Distance between two polytopes with the attaining points.
    pub fn distance_to(&self, other: &Self) -> (f64, DVector<f64>, DVector<f64>) {
        polytope_pair_distance(
            &self.a,
            &self.b,
            &other.a,
            &other.b,
            &QpOptions::default(),
        )
    }

    /// Maximum-volume inscribed ellipsoid. Requires a nonempty interior.
    pub fn inscribed_ellipsoid(&self) -> Result<Ellipsoid, GeomError> {
        let (center, radius) = self
            .chebyshev()
            .ok_or_else(|| GeomError::Numerical("polytope is empty".into()))?;
        if radius <= 1e-12 {
            return Err(GeomError::Numerical(
                "polytope has no interior for ellipsoid fitting".into(),
            ));
        }
        if !radius.is_finite() {
            return Err(GeomError::Numerical(
                "polytope is unbounded; inscribed ellipsoid undefined".into(),
            ));
        }
        let res = mvie::max_volume_ellipsoid(&self.a, &self.b, &center, 0.5 * radius)
            .ok_or_else(|| GeomError::Numerical("ellipsoid solve failed".into()))?;
        Ellipsoid::new(res.shape, res.center)
    }
}

/// Ellipsoid `{C·u + d : ‖u‖ ≤ 1}` with C symmetric positive definite.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    shape: DMatrix<f64>,
    center: DVector<f64>,
}

impl Ellipsoid {
    pub fn new(shape: DMatrix<f64>, center: DVector<f64>) -> Result<Self, GeomError> {
        if shape.nrows() != shape.ncols() || shape.nrows() != center.len() {
            return Err(GeomError::DimensionMismatch(shape.nrows(), center.len()));
        }
        if Cholesky::new(shape.clone()).is_none() {
            return Err(GeomError::NotPositiveDefinite);
        }
        Ok(Self { shape, center })
    }

    pub fn ball(center: DVector<f64>, radius: f64) -> Self {
        let n = center.len();
        Self {
            shape: DMatrix::identity(n, n) * radius,
            center,
        }
    }

    pub fn shape(&self) -> &DMatrix<f64> {
        &self.shape
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }
}
