//! From samples to convex sets: reverse-nearest-neighbor clustering, convex
//! obstacle construction, IRIS region inflation and volume-sorted pruning.

use crate::geom::{
    affine_frame, convex_hull_halfspaces, min_norm_point, Ellipsoid, GeomError, Polytope,
    QpOptions, QpStatus,
};
use nalgebra::{Cholesky, DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RegionError {
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("seed lies outside the domain")]
    SeedOutsideDomain,
    #[error("seed lies inside obstacle {0}")]
    SeedInsideObstacle(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Geometry(#[from] GeomError),
}

/// One sampled configuration with its exact density value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sample {
    pub q: Vec<f64>,
    pub density: f64,
}

/// Feasible/obstacle sample pools and their metric-ranked subsets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleSets {
    /// All drawn feasible configurations with density values.
    pub feasible: Vec<Sample>,
    /// Top configurations, sorted by density descending.
    pub feasible_best: Vec<Sample>,
    /// All drawn obstacle configurations.
    pub obstacle: Vec<Sample>,
    /// Top obstacle configurations, sorted by inverse density descending.
    pub obstacle_best: Vec<Sample>,
}

/// Result of RNN-DBSCAN: clusters as index lists plus the noise set.
#[derive(Debug, Clone)]
pub struct Clustering {
    pub clusters: Vec<Vec<usize>>,
    pub noise: Vec<usize>,
}

/// Reverse-nearest-neighbor DBSCAN. Core points are those appearing in the
/// k-NN lists of at least `k` other points; clusters are the connected
/// components reached from cores through k-NN/reverse-core links, and
/// non-core members join without expanding.
pub fn rnn_dbscan(points: &[DVector<f64>], k: usize) -> Result<Clustering, RegionError> {
    let n = points.len();
    if k == 0 {
        return Err(RegionError::Numerical("k must be >= 1".into()));
    }
    if n < k + 1 {
        return Err(RegionError::TooFewPoints { need: k + 1, got: n });
    }

    // k nearest neighbors per point; ties broken by index for determinism
    let mut knn: Vec<Vec<usize>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut dists: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| ((&points[i] - &points[j]).norm(), j))
            .collect();
        dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        knn.push(dists.iter().take(k).map(|&(_, j)| j).collect());
    }

    let mut reverse_count = vec![0usize; n];
    let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, nbrs) in knn.iter().enumerate() {
        for &j in nbrs {
            reverse_count[j] += 1;
            reverse[j].push(i);
        }
    }
    let is_core: Vec<bool> = reverse_count.iter().map(|&c| c >= k).collect();

    let mut assignment = vec![usize::MAX; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if !is_core[start] || assignment[start] != usize::MAX {
            continue;
        }
        let cid = clusters.len();
        let mut members = Vec::new();
        let mut queue = vec![start];
        assignment[start] = cid;
        while let Some(u) = queue.pop() {
            members.push(u);
            if !is_core[u] {
                continue;
            }
            // mutual reachability: forward k-NN and reverse k-NN links
            let mut nbrs: Vec<usize> = knn[u].clone();
            nbrs.extend(reverse[u].iter().copied());
            for v in nbrs {
                if assignment[v] == usize::MAX {
                    assignment[v] = cid;
                    queue.push(v);
                }
            }
        }
        members.sort_unstable();
        clusters.push(members);
    }
    let noise = (0..n).filter(|&i| assignment[i] == usize::MAX).collect();
    Ok(Clustering { clusters, noise })
}

/// Convex-hull H-representation of a cluster, inflated outward by
/// `inflation` along each facet normal. Clusters that do not span the
/// ambient dimension are thickened to full dimension: slab constraints of
/// half-width `inflation` along the missing directions, extent bounds along
/// the spanned ones. A single point becomes an axis-aligned box of
/// half-width `inflation`.
pub fn cluster_to_polytope(
    cluster: &[DVector<f64>],
    inflation: f64,
) -> Result<Polytope, RegionError> {
    if cluster.is_empty() {
        return Err(RegionError::TooFewPoints { need: 1, got: 0 });
    }
    let dim = cluster[0].len();
    let frame = affine_frame(cluster, 1e-9);
    let spanned = frame.basis.len();

    if spanned == dim {
        if let Some(facets) = convex_hull_halfspaces(cluster) {
            let m = facets.len();
            let a = DMatrix::from_fn(m, dim, |i, j| facets[i].normal[j]);
            let b = DVector::from_fn(m, |i, _| facets[i].offset + inflation);
            return Ok(Polytope::new(a, b)?);
        }
        // fall through to the degenerate treatment if the hull failed
    }

    // degenerate: orthonormal frame of the span, completed to the full space
    let basis = frame.basis.clone();
    let mut null_dirs: Vec<DVector<f64>> = Vec::new();
    for k in 0..dim {
        let mut v = DVector::zeros(dim);
        v[k] = 1.0;
        for b in basis.iter().chain(null_dirs.iter()) {
            let proj = v.dot(b);
            v -= b * proj;
        }
        if v.norm() > 1e-9 {
            null_dirs.push(v.normalize());
        }
    }

    let mut rows: Vec<(DVector<f64>, f64)> = Vec::new();
    for u in &null_dirs {
        let c = u.dot(&frame.centroid);
        rows.push((u.clone(), c + inflation));
        rows.push((-u, -c + inflation));
    }
    if spanned == 1 {
        let dir = &basis[0];
        let coords: Vec<f64> = cluster.iter().map(|p| dir.dot(p)).collect();
        let lo = coords.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = coords.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        rows.push((dir.clone(), hi + inflation));
        rows.push((-dir.clone(), -lo + inflation));
    } else if spanned >= 2 {
        // hull inside the affine span, mapped back to ambient coordinates
        let bmat = DMatrix::from_fn(dim, spanned, |i, j| basis[j][i]);
        let projected: Vec<DVector<f64>> = cluster
            .iter()
            .map(|p| bmat.transpose() * (p - &frame.centroid))
            .collect();
        let facets = convex_hull_halfspaces(&projected).ok_or_else(|| {
            RegionError::Numerical("hull of projected degenerate cluster failed".into())
        })?;
        for f in facets {
            let normal = &bmat * &f.normal;
            let offset = f.offset + normal.dot(&frame.centroid);
            rows.push((normal, offset + inflation));
        }
    }
    let m = rows.len();
    let a = DMatrix::from_fn(m, dim, |i, j| rows[i].0[j]);
    let b = DVector::from_fn(m, |i, _| rows[i].1);
    Ok(Polytope::new(a, b)?)
}

/// A grown safe region: the polytope, its inscribed ellipsoid and the seed.
#[derive(Debug, Clone)]
pub struct IrisRegion {
    pub polytope: Polytope,
    pub ellipsoid: Ellipsoid,
    pub seed: DVector<f64>,
}

/// IRIS alternation around one seed. Each iteration adds, per obstacle, the
/// hyperplane tangent at the obstacle's closest point to the current
/// ellipsoid (computed in the ellipsoid's unit-ball coordinates), then fits
/// the maximum-volume inscribed ellipsoid of the clipped polytope. Domain
/// facets are always kept. If an iteration would exclude the seed the
/// previous iterate is returned.
pub fn iris(
    seed: &DVector<f64>,
    obstacles: &[Polytope],
    domain: &Polytope,
    n_iter: usize,
) -> Result<IrisRegion, RegionError> {
    if !domain.contains(seed, -1e-9) {
        return Err(RegionError::SeedOutsideDomain);
    }
    for (oi, obs) in obstacles.iter().enumerate() {
        if obs.contains(seed, 0.0) {
            return Err(RegionError::SeedInsideObstacle(oi));
        }
    }
    let (lo, hi) = domain
        .bounding_box()
        .ok_or_else(|| RegionError::Numerical("domain is unbounded or empty".into()))?;
    let scale: f64 = lo
        .iter()
        .zip(&hi)
        .map(|(l, h)| (h - l) * (h - l))
        .sum::<f64>()
        .sqrt();
    let mut ellipsoid = Ellipsoid::ball(seed.clone(), 1e-3 * scale);
    let mut best: Option<(Polytope, Ellipsoid)> = None;

    for iter in 0..n_iter.max(1) {
        let mut poly = domain.clone();
        let shape = ellipsoid.shape().clone();
        let center = ellipsoid.center().clone();
        let chol = Cholesky::new(shape.clone())
            .ok_or_else(|| RegionError::Numerical("ellipsoid shape lost definiteness".into()))?;
        for (oi, obs) in obstacles.iter().enumerate() {
            // obstacle in unit-ball coordinates: A(B·u + d) ≤ b
            let a_ball = obs.a() * &shape;
            let b_ball = obs.b() - obs.a() * &center;
            let qp = min_norm_point(&a_ball, &b_ball, &QpOptions::default());
            if qp.status != QpStatus::Solved {
                return Err(RegionError::Numerical(format!(
                    "closest-point QP stalled on obstacle {oi} at iteration {iter}; \
                     center {center:?}"
                )));
            }
            let u = qp.x;
            if u.norm() < 1e-12 {
                return Err(RegionError::Numerical(format!(
                    "ellipsoid center entered obstacle {oi} at iteration {iter}"
                )));
            }
            // tangent plane of the scaled ellipsoid through x* = B·u + d:
            // normal B⁻ᵀu, offset at x*
            let x_star = &shape * &u + &center;
            let normal = chol.solve(&u); // B symmetric: B⁻ᵀ = B⁻¹
            let offset = normal.dot(&x_star);
            poly.push_facet(&normal, offset);
        }
        if !poly.contains(seed, 1e-12) {
            // ellipsoid drift would cut the seed off: keep the last iterate
            break;
        }
        match poly.inscribed_ellipsoid() {
            Ok(e) => {
                ellipsoid = e;
                best = Some((poly, ellipsoid.clone()));
            }
            Err(err) => {
                if best.is_some() {
                    break;
                }
                return Err(RegionError::Numerical(format!(
                    "inscribed ellipsoid failed at iteration {iter}: {err}; \
                     polytope rows {}",
                    poly.num_facets()
                )));
            }
        }
    }
    let (polytope, ellipsoid) =
        best.ok_or_else(|| RegionError::Numerical("no valid IRIS iterate".into()))?;
    Ok(IrisRegion {
        polytope,
        ellipsoid,
        seed: seed.clone(),
    })
}

/// Outcome of a batched IRIS run.
#[derive(Debug)]
pub struct IrisBatch {
    pub regions: Vec<IrisRegion>,
    /// Seed indices skipped because an earlier region already covers them.
    pub skipped_covered: Vec<usize>,
    /// Seed indices skipped with a warning because they lie in an obstacle.
    pub skipped_in_obstacle: Vec<usize>,
    /// (seed index, message) for per-seed numerical failures.
    pub failures: Vec<(usize, String)>,
}

/// Processes seeds in the given order (callers pass them density-descending)
/// and skips any seed already contained in a previously grown region.
pub fn iris_batch(
    seeds: &[DVector<f64>],
    obstacles: &[Polytope],
    domain: &Polytope,
    n_iter: usize,
) -> IrisBatch {
    let mut out = IrisBatch {
        regions: Vec::new(),
        skipped_covered: Vec::new(),
        skipped_in_obstacle: Vec::new(),
        failures: Vec::new(),
    };
    'seeds: for (si, seed) in seeds.iter().enumerate() {
        for region in &out.regions {
            if region.polytope.contains(seed, 1e-9) {
                out.skipped_covered.push(si);
                continue 'seeds;
            }
        }
        match iris(seed, obstacles, domain, n_iter) {
            Ok(region) => out.regions.push(region),
            Err(RegionError::SeedInsideObstacle(_)) => out.skipped_in_obstacle.push(si),
            Err(err) => out.failures.push((si, err.to_string())),
        }
    }
    out
}

/// Monte-Carlo volume estimate together with the sample points that landed
/// inside the region.
fn estimate_volume(
    poly: &Polytope,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> (f64, Vec<DVector<f64>>) {
    let Some((lo, hi)) = poly.bounding_box() else {
        return (0.0, Vec::new());
    };
    let box_vol: f64 = lo.iter().zip(&hi).map(|(l, h)| (h - l).max(0.0)).product();
    if box_vol <= 0.0 {
        return (0.0, Vec::new());
    }
    let mut hits = Vec::new();
    for _ in 0..samples {
        let p = DVector::from_fn(poly.dim(), |k, _| rng.gen_range(lo[k]..=hi[k]));
        if poly.contains(&p, 1e-12) {
            hits.push(p);
        }
    }
    let vol = box_vol * hits.len() as f64 / samples as f64;
    (vol, hits)
}

/// Deterministic content hash so that a region receives the same Monte-Carlo
/// draws regardless of its position in the list (keeps pruning idempotent
/// and independent of the process hash seed).
fn content_hash(poly: &Polytope, seed: u64) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ seed;
    let mut mix = |bits: u64| {
        h ^= bits;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    };
    for v in poly.a().iter() {
        mix(v.to_bits());
    }
    for v in poly.b().iter() {
        mix(v.to_bits());
    }
    h
}

/// Survivor indices after volume-sorted pruning, in descending estimated
/// volume. A region is dropped when it is exactly contained in a kept larger
/// region (LP certificate per facet) or when at least `coverage_threshold`
/// of its Monte-Carlo volume samples fall inside a single kept larger
/// region.
pub fn prune_indices(
    regions: &[Polytope],
    coverage_threshold: f64,
    volume_samples: usize,
    seed: u64,
) -> Vec<usize> {
    assert!(
        coverage_threshold > 0.0 && coverage_threshold <= 1.0,
        "coverage threshold must be in (0, 1]"
    );
    let est: Vec<(f64, Vec<DVector<f64>>)> = regions
        .iter()
        .map(|p| {
            let mut rng = ChaCha8Rng::seed_from_u64(content_hash(p, seed));
            estimate_volume(p, volume_samples, &mut rng)
        })
        .collect();
    let mut order: Vec<usize> = (0..regions.len()).collect();
    order.sort_by(|&i, &j| est[j].0.partial_cmp(&est[i].0).unwrap().then(i.cmp(&j)));

    let mut kept: Vec<usize> = Vec::new();
    'outer: for &i in &order {
        for &j in &kept {
            if regions[j].contains_polytope(&regions[i], 1e-7) {
                continue 'outer;
            }
            let hits = &est[i].1;
            if !hits.is_empty() {
                let covered = hits
                    .iter()
                    .filter(|p| regions[j].contains(p, 1e-12))
                    .count();
                if covered as f64 / hits.len() as f64 >= coverage_threshold {
                    continue 'outer;
                }
            }
        }
        kept.push(i);
    }
    kept
}

/// Standalone Monte-Carlo volume estimate using the same content-derived
/// draws as pruning.
pub fn monte_carlo_volume(poly: &Polytope, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(content_hash(poly, seed));
    estimate_volume(poly, samples, &mut rng).0
}

/// Pruned region list (see [`prune_indices`]), preserving volume order.
pub fn prune(
    regions: &[Polytope],
    coverage_threshold: f64,
    volume_samples: usize,
    seed: u64,
) -> Vec<Polytope> {
    prune_indices(regions, coverage_threshold, volume_samples, seed)
        .into_iter()
        .map(|i| regions[i].clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(coords: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(coords)
    }

    fn blob(center: &[f64], spread: f64, count: usize, rng: &mut ChaCha8Rng) -> Vec<DVector<f64>> {
        (0..count)
            .map(|_| {
                DVector::from_fn(center.len(), |k, _| {
                    center[k] + rng.gen_range(-spread..spread)
                })
            })
            .collect()
    }

    fn gaussian_blob(
        center: &[f64],
        sigma: f64,
        count: usize,
        rng: &mut ChaCha8Rng,
    ) -> Vec<DVector<f64>> {
        (0..count)
            .map(|_| {
                DVector::from_fn(center.len(), |k, _| {
                    // Box-Muller
                    let u1: f64 = rng.gen_range(1e-12..1.0);
                    let u2: f64 = rng.gen_range(0.0..1.0);
                    let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
                    center[k] + sigma * z
                })
            })
            .collect()
    }

    #[test]
    fn two_separated_blobs_give_two_clusters() {
        // Gaussian blobs separated by 10 sigma
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sigma = 0.4;
        let mut points = gaussian_blob(&[0.0, 0.0], sigma, 80, &mut rng);
        points.extend(gaussian_blob(&[10.0 * sigma, 10.0 * sigma], sigma, 80, &mut rng));
        let res = rnn_dbscan(&points, 5).unwrap();
        assert_eq!(res.clusters.len(), 2, "sizes {:?}", res.clusters.iter().map(|c| c.len()).collect::<Vec<_>>());
        let assigned: usize = res.clusters.iter().map(|c| c.len()).sum();
        assert!(assigned as f64 >= 0.95 * points.len() as f64);
        // no cluster mixes the two blobs
        for c in &res.clusters {
            let xs: Vec<f64> = c.iter().map(|&i| points[i][0]).collect();
            let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(hi - lo < 5.0 * sigma);
        }
    }

    #[test]
    fn identical_points_form_one_cluster() {
        let points = vec![pt(&[1.0, 2.0]); 12];
        let res = rnn_dbscan(&points, 3).unwrap();
        assert_eq!(res.clusters.len(), 1);
        assert!(res.noise.is_empty());
        assert_eq!(res.clusters[0].len(), 12);
    }

    #[test]
    fn large_k_is_deterministic_on_small_scatter() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let points = blob(&[0.0, 0.0], 1.0, 16, &mut rng);
        let a = rnn_dbscan(&points, 15).unwrap();
        let b = rnn_dbscan(&points, 15).unwrap();
        assert_eq!(a.clusters, b.clusters);
        assert_eq!(a.noise, b.noise);
        // with k = n−1 every point has n−1 reverse neighbors: one cluster
        assert!(a.clusters.len() <= 1);
    }

    #[test]
    fn too_few_points_is_an_error() {
        let points = vec![pt(&[0.0, 0.0]); 4];
        assert!(matches!(
            rnn_dbscan(&points, 4),
            Err(RegionError::TooFewPoints { .. })
        ));
    }

    #[test]
    fn single_point_cluster_becomes_box() {
        let poly = cluster_to_polytope(&[pt(&[1.0, -2.0])], 0.05).unwrap();
        assert!(poly.contains_slice(&[1.0, -2.0], 1e-12));
        assert!(poly.contains_slice(&[1.04, -1.96], 1e-12));
        assert!(!poly.contains_slice(&[1.06, -2.0], 1e-9));
        assert_eq!(poly.num_facets(), 4);
    }

    #[test]
    fn unit_square_corners_hull() {
        let cluster = vec![
            pt(&[0.0, 0.0]),
            pt(&[1.0, 0.0]),
            pt(&[0.0, 1.0]),
            pt(&[1.0, 1.0]),
        ];
        let poly = cluster_to_polytope(&cluster, 0.0).unwrap();
        assert_eq!(poly.num_facets(), 4);
        assert!(poly.contains_slice(&[0.5, 0.5], 1e-12));
    }

    #[test]
    fn collinear_points_become_full_dimensional_slab() {
        let cluster = vec![pt(&[0.0, 0.0]), pt(&[1.0, 1.0]), pt(&[2.0, 2.0])];
        let poly = cluster_to_polytope(&cluster, 0.1).unwrap();
        assert!(poly.contains_slice(&[1.0, 1.0], 1e-12));
        // off the line but within the thickening
        let off = 0.05 / (2.0f64).sqrt();
        assert!(poly.contains_slice(&[1.0 + off, 1.0 - off], 1e-9));
        // clearly off the line: outside
        assert!(!poly.contains_slice(&[1.0, 0.5], 1e-9));
        assert!(poly.certified_nonempty(1e-6));
    }

    #[test]
    fn iris_without_obstacles_returns_domain() {
        let domain = Polytope::from_box(&[-1.0, -2.0], &[1.0, 2.0]);
        let seed = pt(&[0.2, 0.3]);
        let region = iris(&seed, &[], &domain, 3).unwrap();
        assert!(region.polytope.contains_polytope(&domain, 1e-7));
        assert!(domain.contains_polytope(&region.polytope, 1e-7));
        let e = &region.ellipsoid;
        assert!((e.shape()[(0, 0)] - 1.0).abs() < 1e-4);
        assert!((e.shape()[(1, 1)] - 2.0).abs() < 1e-4);
    }

    #[test]
    fn iris_excludes_square_obstacle() {
        let domain = Polytope::from_box(&[-2.0, -2.0], &[2.0, 2.0]);
        let obstacle = Polytope::from_box(&[0.5, -0.5], &[1.5, 0.5]);
        let seed = pt(&[-1.0, 0.0]);
        let region = iris(&seed, &[obstacle.clone()], &domain, 3).unwrap();
        assert!(region.polytope.contains(&seed, 1e-9));
        // Monte-Carlo emptiness: no region sample may fall in the obstacle
        let (lo, hi) = region.polytope.bounding_box().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut n_inside_region = 0;
        for _ in 0..100_000 {
            let p = DVector::from_fn(2, |k, _| rng.gen_range(lo[k]..=hi[k]));
            if region.polytope.contains(&p, 0.0) {
                n_inside_region += 1;
                assert!(!obstacle.contains(&p, 1e-9), "region point inside obstacle");
            }
        }
        assert!(n_inside_region > 0);
        // LP certificate: the stacked system has no interior
        let inter = region.polytope.intersect(&obstacle);
        assert!(!inter.certified_nonempty(1e-9));
    }

    #[test]
    fn obstacle_outside_domain_is_redundant() {
        let domain = Polytope::from_box(&[0.0, 0.0], &[1.0, 1.0]);
        let obstacle = Polytope::from_box(&[5.0, 5.0], &[6.0, 6.0]);
        let region = iris(&pt(&[0.5, 0.5]), &[obstacle], &domain, 2).unwrap();
        assert!(region.polytope.contains_polytope(&domain, 1e-7));
        assert!(domain.contains_polytope(&region.polytope, 1e-7));
    }

    #[test]
    fn iris_rejects_seed_in_obstacle() {
        let domain = Polytope::from_box(&[-2.0, -2.0], &[2.0, 2.0]);
        let obstacle = Polytope::from_box(&[-0.5, -0.5], &[0.5, 0.5]);
        assert!(matches!(
            iris(&pt(&[0.0, 0.0]), &[obstacle], &domain, 2),
            Err(RegionError::SeedInsideObstacle(0))
        ));
    }

    #[test]
    fn batch_covers_second_seed() {
        let domain = Polytope::from_box(&[-1.0, -1.0], &[1.0, 1.0]);
        let seeds = vec![pt(&[0.0, 0.0]), pt(&[0.1, 0.1])];
        let batch = iris_batch(&seeds, &[], &domain, 2);
        assert_eq!(batch.regions.len(), 1);
        assert_eq!(batch.skipped_covered, vec![1]);
    }

    #[test]
    fn batch_separate_chambers() {
        let domain = Polytope::from_box(&[-2.0, -1.0], &[2.0, 1.0]);
        // wall splitting the domain at x ∈ [-0.1, 0.1]
        let wall = Polytope::from_box(&[-0.1, -1.0], &[0.1, 1.0]);
        let seeds = vec![pt(&[-1.0, 0.0]), pt(&[1.0, 0.0])];
        let batch = iris_batch(&seeds, &[wall], &domain, 3);
        assert_eq!(batch.regions.len(), 2, "failures: {:?}", batch.failures);
    }

    #[test]
    fn batch_empty_seed_list() {
        let domain = Polytope::from_box(&[0.0], &[1.0]);
        let batch = iris_batch(&[], &[], &domain, 1);
        assert!(batch.regions.is_empty());
    }

    #[test]
    fn prune_drops_contained_box() {
        let big = Polytope::from_box(&[0.0, 0.0], &[4.0, 4.0]);
        let small = Polytope::from_box(&[1.0, 1.0], &[2.0, 2.0]);
        let kept = prune_indices(&[small, big], 0.9, 2000, 0);
        assert_eq!(kept, vec![1]);
    }

    #[test]
    fn prune_keeps_disjoint_boxes_in_volume_order() {
        let a = Polytope::from_box(&[0.0, 0.0], &[1.0, 1.0]);
        let b = Polytope::from_box(&[3.0, 3.0], &[6.0, 6.0]);
        let kept = prune_indices(&[a, b], 0.9, 2000, 0);
        assert_eq!(kept, vec![1, 0]);
    }

    #[test]
    fn prune_threshold_controls_overlap_decision() {
        // 80% overlapping boxes (analytic overlap fraction 0.8)
        let a = Polytope::from_box(&[0.0, 0.0], &[1.0, 1.0]);
        let b = Polytope::from_box(&[0.2, 0.0], &[1.2, 1.0]);
        let regions = vec![a, b];
        let kept_loose = prune_indices(&regions, 0.9, 10_000, 0);
        assert_eq!(kept_loose.len(), 2);
        let kept_tight = prune_indices(&regions, 0.7, 10_000, 0);
        assert_eq!(kept_tight.len(), 1);
    }

    #[test]
    fn prune_is_idempotent() {
        let regions = vec![
            Polytope::from_box(&[0.0, 0.0], &[2.0, 2.0]),
            Polytope::from_box(&[0.5, 0.5], &[2.5, 2.5]),
            Polytope::from_box(&[5.0, 5.0], &[6.0, 6.0]),
            Polytope::from_box(&[5.1, 5.1], &[5.9, 5.9]),
        ];
        let once = prune(&regions, 0.9, 5000, 7);
        let twice = prune(&once, 0.9, 5000, 7);
        assert_eq!(once.len(), twice.len());
        for (p, q) in once.iter().zip(&twice) {
            assert!((p.a() - q.a()).amax() < 1e-15);
            assert!((p.b() - q.b()).amax() < 1e-15);
        }
    }

    #[test]
    fn prune_decisions_stable_under_more_samples() {
        let regions = vec![
            Polytope::from_box(&[0.0, 0.0], &[2.0, 2.0]),
            Polytope::from_box(&[0.1, 0.1], &[1.9, 1.9]),
            Polytope::from_box(&[4.0, 0.0], &[5.0, 2.0]),
        ];
        let a = prune_indices(&regions, 0.9, 10_000, 3);
        let b = prune_indices(&regions, 0.9, 20_000, 3);
        assert_eq!(a, b);
    }
}
