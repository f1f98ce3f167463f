//! Incremental convex hull in low dimension (2–4), producing facet
//! halfspaces directly.
//!
//! Points are added one at a time: facets visible from the new point are
//! removed, and every horizon ridge (a ridge belonging to exactly one
//! visible facet) is joined with the point to form a new facet. Facet
//! normals are oriented away from an interior reference point. A final pass
//! pushes each facet offset out to the farthest input point, so the returned
//! halfspace intersection is guaranteed to contain every input despite the
//! epsilon tolerancing.

use nalgebra::{DMatrix, DVector};
use std::collections::HashMap;

#[derive(Debug, Clone)]
pub struct HullFacet {
    /// Unit outward normal.
    pub normal: DVector<f64>,
    /// Offset: the facet halfspace is `normal·x ≤ offset`.
    pub offset: f64,
}

/// Orthonormal affine frame of a point cloud: centroid, spanning directions
/// and the tolerance-rank of the span.
pub struct AffineFrame {
    pub centroid: DVector<f64>,
    /// Orthonormal basis of the affine span.
    pub basis: Vec<DVector<f64>>,
}

/// Affine span of the points, detected with a relative tolerance on the
/// singular values of the centered cloud.
pub fn affine_frame(points: &[DVector<f64>], rel_tol: f64) -> AffineFrame {
    let n = points[0].len();
    let m = points.len();
    let mut centroid = DVector::zeros(n);
    for p in points {
        centroid += p;
    }
    centroid /= m as f64;
    let centered = DMatrix::from_fn(m, n, |i, j| points[i][j] - centroid[j]);
    let svd = centered.svd(false, true);
    let vt = svd.v_t.expect("requested v_t");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = smax * rel_tol;
    let mut basis = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > tol && s > 1e-300 {
            basis.push(vt.row(k).transpose());
        }
    }
    AffineFrame { centroid, basis }
}

/// Halfspace representation of the convex hull of a full-dimensional point
/// set. Returns `None` when the points do not span the ambient dimension
/// (use [`affine_frame`] to detect and handle that case).
pub fn convex_hull_halfspaces(points: &[DVector<f64>]) -> Option<Vec<HullFacet>> {
    let dim = points[0].len();
    if points.len() < dim + 1 {
        return None;
    }
    let diameter = estimate_diameter(points);
    if diameter <= 0.0 {
        return None;
    }
    let eps = 1e-9 * diameter;

    let simplex = initial_simplex(points, eps)?;
    let mut interior = DVector::zeros(dim);
    for &v in &simplex {
        interior += &points[v];
    }
    interior /= simplex.len() as f64;

    // initial facets: all dim-subsets of the simplex
    let mut facets: Vec<Facet> = Vec::new();
    for skip in 0..simplex.len() {
        let verts: Vec<usize> = simplex
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != skip)
            .map(|(_, &v)| v)
            .collect();
        if let Some(f) = Facet::from_vertices(&verts, points, &interior, eps) {
            facets.push(f);
        }
    }
    if facets.len() != dim + 1 {
        return None;
    }

    // insert the remaining points
    for (pi, p) in points.iter().enumerate() {
        if simplex.contains(&pi) {
            continue;
        }
        let visible: Vec<usize> = facets
            .iter()
            .enumerate()
            .filter(|(_, f)| f.normal.dot(p) - f.offset > eps)
            .map(|(k, _)| k)
            .collect();
        if visible.is_empty() {
            continue;
        }
        // horizon ridges: (dim−1)-subsets occurring in exactly one visible facet
        let mut ridge_count: HashMap<Vec<usize>, usize> = HashMap::new();
        for &fi in &visible {
            for ridge in facets[fi].ridges() {
                *ridge_count.entry(ridge).or_insert(0) += 1;
            }
        }
        let mut new_facets = Vec::new();
        for (ridge, count) in &ridge_count {
            if *count != 1 {
                continue;
            }
            let mut verts = ridge.clone();
            verts.push(pi);
            if let Some(f) = Facet::from_vertices(&verts, points, &interior, eps) {
                new_facets.push(f);
            }
        }
        let mut keep: Vec<Facet> = facets
            .into_iter()
            .enumerate()
            .filter(|(k, _)| !visible.contains(k))
            .map(|(_, f)| f)
            .collect();
        keep.extend(new_facets);
        facets = keep;
    }

    // push offsets out to cover every input point exactly
    let mut out = Vec::with_capacity(facets.len());
    for f in facets {
        let offset = points
            .iter()
            .map(|p| f.normal.dot(p))
            .fold(f64::NEG_INFINITY, f64::max);
        out.push(HullFacet {
            normal: f.normal,
            offset,
        });
    }
    Some(out)
}

struct Facet {
    vertices: Vec<usize>, // sorted
    normal: DVector<f64>,
    offset: f64,
}

impl Facet {
    fn from_vertices(
        verts: &[usize],
        points: &[DVector<f64>],
        interior: &DVector<f64>,
        eps: f64,
    ) -> Option<Self> {
        let dim = points[0].len();
        debug_assert_eq!(verts.len(), dim);
        let p0 = &points[verts[0]];
        let span = DMatrix::from_fn(dim - 1, dim, |i, j| points[verts[i + 1]][j] - p0[j]);
        // generalized cross product: cofactor expansion gives the null
        // direction of the (dim−1)×dim span exactly
        let mut normal = DVector::zeros(dim);
        for j in 0..dim {
            let minor = DMatrix::from_fn(dim - 1, dim - 1, |r, c| {
                span[(r, if c < j { c } else { c + 1 })]
            });
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            normal[j] = sign * minor.determinant();
        }
        let n_norm = normal.norm();
        if n_norm < 1e-14 {
            return None;
        }
        normal /= n_norm;
        let mut offset = normal.dot(p0);
        let side = normal.dot(interior) - offset;
        if side > 0.0 {
            normal = -normal;
            offset = -offset;
        }
        if (normal.dot(interior) - offset).abs() < eps {
            // interior point on the facet plane: unreliable orientation
            return None;
        }
        let mut vertices = verts.to_vec();
        vertices.sort_unstable();
        Some(Self {
            vertices,
            normal,
            offset,
        })
    }

    fn ridges(&self) -> Vec<Vec<usize>> {
        (0..self.vertices.len())
            .map(|skip| {
                self.vertices
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != skip)
                    .map(|(_, &v)| v)
                    .collect()
            })
            .collect()
    }
}

fn estimate_diameter(points: &[DVector<f64>]) -> f64 {
    let first = &points[0];
    let mut d = 0.0;
    for p in points {
        d = f64::max(d, (p - first).norm());
    }
    2.0 * d
}

/// Greedy affinely-independent seed simplex (dim+1 vertices), or `None` if
/// the cloud is degenerate at the given tolerance.
fn initial_simplex(points: &[DVector<f64>], eps: f64) -> Option<Vec<usize>> {
    let dim = points[0].len();
    let mut chosen = vec![0usize];
    // farthest from the first point
    let (mut best, mut best_d) = (0usize, -1.0);
    for (i, p) in points.iter().enumerate() {
        let d = (p - &points[0]).norm();
        if d > best_d {
            best_d = d;
            best = i;
        }
    }
    if best_d <= eps {
        return None;
    }
    chosen.push(best);

    // grow by maximizing the residual to the current affine span
    let mut basis: Vec<DVector<f64>> = vec![
        (&points[chosen[1]] - &points[chosen[0]]).normalize(),
    ];
    while chosen.len() < dim + 1 {
        let origin = &points[chosen[0]];
        let (mut best, mut best_r) = (usize::MAX, eps);
        for (i, p) in points.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let mut v = p - origin;
            for b in &basis {
                let proj = v.dot(b);
                v -= b * proj;
            }
            let r = v.norm();
            if r > best_r {
                best_r = r;
                best = i;
            }
        }
        if best == usize::MAX {
            return None;
        }
        let origin = points[chosen[0]].clone();
        let mut v = &points[best] - origin;
        for b in &basis {
            let proj = v.dot(b);
            v -= b * proj;
        }
        basis.push(v.normalize());
        chosen.push(best);
    }
    Some(chosen)
}
