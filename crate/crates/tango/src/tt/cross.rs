//! Cross approximation of black-box tensors.
//!
//! The approximation alternates left-to-right and right-to-left sweeps.
//! At each bond it samples the supercore fibers selected by the current
//! row/column index sets, picks quasi-maximum-volume pivots (maxvol) from a
//! column-pivoted QR basis, and rebuilds the core as an interpolation
//! matrix. Ranks adapt upward by enriching the column index sets with random
//! candidates whenever the held-out error is still above tolerance, capped
//! at `max_rank`. A held-out validation set, drawn independently of the
//! pivot stream, tracks the relative error reported alongside the result.

use super::{Core, TensorTrain, TtError};
use crate::grid::Grid;
use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// A scalar field defined on a multi-index grid, evaluated pointwise.
pub trait TensorField: Sync {
    fn mode_sizes(&self) -> Vec<usize>;
    fn eval_index(&self, idx: &[usize]) -> f64;
}

/// Field given directly as a function of the multi-index.
pub struct IndexField<F: Fn(&[usize]) -> f64 + Sync> {
    sizes: Vec<usize>,
    f: F,
}

impl<F: Fn(&[usize]) -> f64 + Sync> IndexField<F> {
    pub fn new(sizes: Vec<usize>, f: F) -> Self {
        Self { sizes, f }
    }
}

impl<F: Fn(&[usize]) -> f64 + Sync> TensorField for IndexField<F> {
    fn mode_sizes(&self) -> Vec<usize> {
        self.sizes.clone()
    }

    fn eval_index(&self, idx: &[usize]) -> f64 {
        (self.f)(idx)
    }
}

/// Field over joint vectors: virtual indices are mapped through the grid to
/// cell-center joint values before evaluation. Evaluation is deterministic
/// for a fixed index.
pub struct BlackBoxField<F: Fn(&[f64]) -> f64 + Sync> {
    grid: Grid,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> BlackBoxField<F> {
    pub fn new(grid: Grid, f: F) -> Self {
        Self { grid, f }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn eval_joints(&self, q: &[f64]) -> f64 {
        (self.f)(q)
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> TensorField for BlackBoxField<F> {
    fn mode_sizes(&self) -> Vec<usize> {
        self.grid.virtual_mode_sizes()
    }

    fn eval_index(&self, idx: &[usize]) -> f64 {
        let q = self
            .grid
            .virtual_to_value(idx)
            .expect("index arity matches grid");
        (self.f)(&q)
    }
}

#[derive(Debug, Clone)]
pub struct CrossOptions {
    /// Cap on every interior rank.
    pub max_rank: usize,
    /// Maximum number of full (left-right plus right-left) sweeps.
    pub n_sweeps: usize,
    /// Early-exit tolerance on the held-out relative error.
    pub tol: f64,
    /// Seed for index-set initialization, enrichment and validation draws.
    pub seed: u64,
    /// Ranks added per bond and sweep while the error is above `tol`.
    pub kick: usize,
    /// Validation set size.
    pub holdout: usize,
}

impl Default for CrossOptions {
    fn default() -> Self {
        Self {
            max_rank: 32,
            n_sweeps: 30,
            tol: 1e-6,
            seed: 0,
            kick: 1,
            holdout: 1000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossReport {
    /// Relative RMS error on the held-out validation indices.
    pub holdout_rel_error: f64,
    /// Full sweeps actually run.
    pub sweeps: usize,
    /// Number of black-box evaluations (cache misses).
    pub evaluations: u64,
}

/// Memoizes field evaluations by linearized index. Capped so that very large
/// runs degrade to plain evaluation instead of exhausting memory.
struct EvalCache {
    map: HashMap<u128, f64>,
    strides: Vec<u128>,
    cap: usize,
    evaluations: u64,
}

const CACHE_CAP: usize = 1 << 22;

impl EvalCache {
    fn new(sizes: &[usize]) -> Self {
        let mut strides = vec![1u128; sizes.len()];
        for k in (0..sizes.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * sizes[k + 1] as u128;
        }
        Self {
            map: HashMap::new(),
            strides,
            cap: CACHE_CAP,
            evaluations: 0,
        }
    }

    fn key(&self, idx: &[usize]) -> u128 {
        idx.iter()
            .zip(&self.strides)
            .map(|(&i, &s)| i as u128 * s)
            .sum()
    }

    /// Evaluate a batch of indices, reusing cached values and running the
    /// misses in parallel (order-preserving, hence deterministic).
    fn eval_batch<F: TensorField + ?Sized>(
        &mut self,
        f: &F,
        indices: &[Vec<usize>],
    ) -> Result<Vec<f64>, TtError> {
        let keys: Vec<u128> = indices.iter().map(|i| self.key(i)).collect();
        let mut out = vec![0.0f64; indices.len()];
        let mut missing: Vec<usize> = Vec::new();
        for (pos, key) in keys.iter().enumerate() {
            if let Some(&v) = self.map.get(key) {
                out[pos] = v;
            } else {
                missing.push(pos);
            }
        }
        let values: Vec<f64> = missing
            .par_iter()
            .map(|&pos| f.eval_index(&indices[pos]))
            .collect();
        self.evaluations += values.len() as u64;
        for (&pos, &v) in missing.iter().zip(&values) {
            if !v.is_finite() {
                return Err(TtError::NonFinite {
                    index: indices[pos].clone(),
                });
            }
            out[pos] = v;
            if self.map.len() < self.cap {
                self.map.insert(keys[pos], v);
            }
        }
        Ok(out)
    }
}

/// Approximate a black-box field in TT form.
pub fn tt_cross<F: TensorField + ?Sized>(
    f: &F,
    opts: &CrossOptions,
) -> Result<(TensorTrain, CrossReport), TtError> {
    let sizes = f.mode_sizes();
    let d = sizes.len();
    if d == 0 {
        return Err(TtError::InvalidArgument("field has no modes".into()));
    }
    if sizes.iter().any(|&n| n < 2) {
        return Err(TtError::InvalidArgument(format!(
            "all mode sizes must be >= 2, got {sizes:?}"
        )));
    }
    if opts.n_sweeps == 0 {
        return Err(TtError::InvalidArgument("n_sweeps must be >= 1".into()));
    }
    if opts.max_rank == 0 {
        return Err(TtError::InvalidArgument("max_rank must be >= 1".into()));
    }

    let mut cache = EvalCache::new(&sizes);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    // Validation indices drawn up front, independent of the pivot stream.
    let mut holdout_rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x9e37_79b9_7f4a_7c15);
    let holdout_idx: Vec<Vec<usize>> = (0..opts.holdout.max(1))
        .map(|_| sizes.iter().map(|&n| holdout_rng.gen_range(0..n)).collect())
        .collect();
    let holdout_vals = cache.eval_batch(f, &holdout_idx)?;
    let holdout_norm_sq: f64 = holdout_vals.iter().map(|v| v * v).sum();

    if d == 1 {
        // Single mode: read the fiber directly.
        let idx: Vec<Vec<usize>> = (0..sizes[0]).map(|i| vec![i]).collect();
        let vals = cache.eval_batch(f, &idx)?;
        let tt = TensorTrain::rank_one(&[vals])?;
        let err = holdout_error(&tt, &holdout_idx, &holdout_vals, holdout_norm_sq);
        return Ok((
            tt,
            CrossReport {
                holdout_rel_error: err,
                sweeps: 1,
                evaluations: cache.evaluations,
            },
        ));
    }

    // Column index sets per bond b (between cores b and b+1): suffixes over
    // modes b+1..d. Start at rank 1 with random suffixes.
    let mut right_sets: Vec<Vec<Vec<usize>>> = (0..d - 1)
        .map(|b| {
            vec![sizes[b + 1..]
                .iter()
                .map(|&n| rng.gen_range(0..n))
                .collect::<Vec<usize>>()]
        })
        .collect();
    let mut left_sets: Vec<Vec<Vec<usize>>> = vec![Vec::new(); d - 1];
    let mut cores: Vec<Option<Core>> = vec![None; d];

    let empty: Vec<Vec<usize>> = vec![Vec::new()];
    let mut report = CrossReport {
        holdout_rel_error: f64::INFINITY,
        sweeps: 0,
        evaluations: 0,
    };

    for sweep in 1..=opts.n_sweeps {
        // Left-to-right: refresh row sets.
        for k in 0..d {
            let prefixes = if k == 0 {
                empty.clone()
            } else {
                left_sets[k - 1].clone()
            };
            let suffixes = if k == d - 1 {
                empty.clone()
            } else {
                right_sets[k].clone()
            };
            let c = supercore_left(f, &mut cache, &prefixes, &suffixes, sizes[k])?;
            if k < d - 1 {
                let (rows, g) = interpolate_rows(&c);
                left_sets[k] = rows
                    .iter()
                    .map(|&row| {
                        let a = row / sizes[k];
                        let i = row % sizes[k];
                        let mut p = prefixes[a].clone();
                        p.push(i);
                        p
                    })
                    .collect();
                cores[k] = Some(Core::from_left_unfold(&g, prefixes.len(), sizes[k]));
            } else {
                cores[k] = Some(Core::from_left_unfold(&c, prefixes.len(), sizes[k]));
            }
        }

        // Right-to-left: refresh column sets.
        for k in (0..d).rev() {
            let prefixes = if k == 0 {
                empty.clone()
            } else {
                left_sets[k - 1].clone()
            };
            let suffixes = if k == d - 1 {
                empty.clone()
            } else {
                right_sets[k].clone()
            };
            let c = supercore_right(f, &mut cache, &prefixes, &suffixes, sizes[k])?;
            if k > 0 {
                let (cols, g) = interpolate_rows(&c.transpose());
                let n_suffix = suffixes.len();
                right_sets[k - 1] = cols
                    .iter()
                    .map(|&col| {
                        let i = col / n_suffix;
                        let b = col % n_suffix;
                        let mut s = Vec::with_capacity(1 + suffixes[b].len());
                        s.push(i);
                        s.extend_from_slice(&suffixes[b]);
                        s
                    })
                    .collect();
                cores[k] = Some(Core::from_right_unfold(&g.transpose(), sizes[k]));
            } else {
                cores[k] = Some(Core::from_right_unfold(&c, sizes[k]));
            }
        }

        let tt = TensorTrain::new(cores.iter().map(|c| c.clone().expect("built")).collect())?;
        let err = holdout_error(&tt, &holdout_idx, &holdout_vals, holdout_norm_sq);
        report.holdout_rel_error = err;
        report.sweeps = sweep;
        report.evaluations = cache.evaluations;

        if err <= opts.tol {
            return Ok((tt, report));
        }
        if sweep == opts.n_sweeps {
            return Ok((tt, report));
        }

        // Enrich column sets with random candidates to let ranks grow.
        for b in 0..d - 1 {
            let mut added = 0;
            let mut attempts = 0;
            while added < opts.kick && right_sets[b].len() < opts.max_rank && attempts < 64 {
                attempts += 1;
                let cand: Vec<usize> = sizes[b + 1..]
                    .iter()
                    .map(|&n| rng.gen_range(0..n))
                    .collect();
                if !right_sets[b].contains(&cand) {
                    right_sets[b].push(cand);
                    added += 1;
                }
            }
        }
    }

    unreachable!("loop always returns on the last sweep");
}

fn holdout_error(
    tt: &TensorTrain,
    idx: &[Vec<usize>],
    vals: &[f64],
    norm_sq: f64,
) -> f64 {
    let err_sq: f64 = idx
        .iter()
        .zip(vals)
        .map(|(i, &v)| {
            let e = tt.eval(i).expect("holdout index in range") - v;
            e * e
        })
        .sum();
    if norm_sq > 0.0 {
        (err_sq / norm_sq).sqrt()
    } else {
        err_sq.sqrt()
    }
}

/// Sample the supercore as a `(|prefixes|·n) × |suffixes|` matrix with rows
/// ordered `(a, i)` a-major (matching the left unfolding).
fn supercore_left<F: TensorField + ?Sized>(
    f: &F,
    cache: &mut EvalCache,
    prefixes: &[Vec<usize>],
    suffixes: &[Vec<usize>],
    n: usize,
) -> Result<DMatrix<f64>, TtError> {
    let rows = prefixes.len() * n;
    let cols = suffixes.len();
    let mut indices = Vec::with_capacity(rows * cols);
    for a in 0..prefixes.len() {
        for i in 0..n {
            for s in suffixes {
                let mut idx = Vec::with_capacity(prefixes[a].len() + 1 + s.len());
                idx.extend_from_slice(&prefixes[a]);
                idx.push(i);
                idx.extend_from_slice(s);
                indices.push(idx);
            }
        }
    }
    let vals = cache.eval_batch(f, &indices)?;
    Ok(DMatrix::from_fn(rows, cols, |r, c| vals[r * cols + c]))
}

/// Sample the supercore as a `|prefixes| × (n·|suffixes|)` matrix with
/// columns ordered `(i, b)` i-major (matching the right unfolding).
fn supercore_right<F: TensorField + ?Sized>(
    f: &F,
    cache: &mut EvalCache,
    prefixes: &[Vec<usize>],
    suffixes: &[Vec<usize>],
    n: usize,
) -> Result<DMatrix<f64>, TtError> {
    let rows = prefixes.len();
    let cols = n * suffixes.len();
    let mut indices = Vec::with_capacity(rows * cols);
    for p in prefixes {
        for i in 0..n {
            for s in suffixes {
                let mut idx = Vec::with_capacity(p.len() + 1 + s.len());
                idx.extend_from_slice(p);
                idx.push(i);
                idx.extend_from_slice(s);
                indices.push(idx);
            }
        }
    }
    let vals = cache.eval_batch(f, &indices)?;
    Ok(DMatrix::from_fn(rows, cols, |r, c| vals[r * cols + c]))
}

/// Pick quasi-maxvol pivot rows of `c` and return them together with the
/// interpolation matrix `G` satisfying `G[rows] = I` and `C ≈ G · C[rows]`.
/// The effective rank comes from a column-pivoted QR of `c`, so redundant
/// columns never inflate the bond rank.
fn interpolate_rows(c: &DMatrix<f64>) -> (Vec<usize>, DMatrix<f64>) {
    let m = c.nrows();
    let qr = c.clone().col_piv_qr();
    let q = qr.q();
    let r = qr.r();
    let diag_max = (0..r.nrows().min(r.ncols()))
        .map(|i| r[(i, i)].abs())
        .fold(0.0, f64::max);
    let rank_tol = diag_max * 1e-12 * (c.nrows().max(c.ncols()) as f64);
    let mut rank = (0..r.nrows().min(r.ncols()))
        .take_while(|&i| r[(i, i)].abs() > rank_tol)
        .count();
    if rank == 0 {
        // zero (or numerically zero) supercore: keep a single zero column
        return (vec![0], DMatrix::zeros(m, 1));
    }
    rank = rank.min(m);
    let q = q.columns(0, rank).into_owned();
    let rows = maxvol(&q);
    let sub = select_rows(&q, &rows);
    let lu = sub.transpose().lu();
    let g_t = lu
        .solve(&q.transpose())
        .unwrap_or_else(|| DMatrix::zeros(rank, m));
    (rows, g_t.transpose())
}

fn select_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |r, c| m[(rows[r], c)])
}

/// Quasi-maximum-volume row selection on a tall full-column-rank matrix.
/// Starts from Gaussian-elimination pivots and swaps rows while some
/// coefficient of `Q·Q[rows]^{-1}` exceeds 1 in magnitude.
fn maxvol(q: &DMatrix<f64>) -> Vec<usize> {
    let (m, r) = q.shape();
    debug_assert!(m >= r);

    // Initial rows: partial-pivoted elimination on a working copy.
    let mut work = q.clone();
    let mut rows: Vec<usize> = Vec::with_capacity(r);
    let mut used = vec![false; m];
    for j in 0..r {
        let mut best = usize::MAX;
        let mut best_val = -1.0;
        for i in 0..m {
            if used[i] {
                continue;
            }
            let v = work[(i, j)].abs();
            if v > best_val {
                best_val = v;
                best = i;
            }
        }
        let piv = if best == usize::MAX { j } else { best };
        used[piv] = true;
        rows.push(piv);
        let pv = work[(piv, j)];
        if pv.abs() > 0.0 {
            for i in 0..m {
                if used[i] {
                    continue;
                }
                let factor = work[(i, j)] / pv;
                for jj in 0..r {
                    let delta = factor * work[(piv, jj)];
                    work[(i, jj)] -= delta;
                }
            }
        }
    }

    for _ in 0..100 {
        let sub = select_rows(q, &rows);
        let lu = sub.transpose().lu();
        let b_t = match lu.solve(&q.transpose()) {
            Some(x) => x,
            None => break,
        };
        // b = q · sub⁻¹, b_t = r × m
        let mut best = (0usize, 0usize);
        let mut best_val = 0.0;
        for i in 0..m {
            for j in 0..r {
                let v = b_t[(j, i)].abs();
                if v > best_val {
                    best_val = v;
                    best = (i, j);
                }
            }
        }
        if best_val <= 1.0 + 1e-2 {
            break;
        }
        rows[best.1] = best.0;
    }
    rows.sort_unstable();
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_is_rank_one() {
        let field = IndexField::new(vec![5, 6, 4], |_: &[usize]| 2.5);
        let opts = CrossOptions {
            max_rank: 8,
            n_sweeps: 4,
            tol: 1e-10,
            seed: 1,
            ..Default::default()
        };
        let (tt, report) = tt_cross(&field, &opts).unwrap();
        assert!(report.holdout_rel_error <= 1e-10);
        for idx in crate::tt::MultiIndexIter::new(&[5, 6, 4]) {
            assert!((tt.eval(&idx).unwrap() - 2.5).abs() < 1e-10);
        }
    }

    #[test]
    fn separable_density_converges_to_rank_one() {
        let g1 = |i: usize| (i as f64 / 3.0 - 0.8).powi(2);
        let g2 = |i: usize| (i as f64 / 5.0).sqrt();
        let g3 = |i: usize| 0.3 * i as f64;
        let field = IndexField::new(vec![8, 8, 8], move |idx: &[usize]| {
            (-(g1(idx[0]) + g2(idx[1]) + g3(idx[2]))).exp()
        });
        let opts = CrossOptions {
            max_rank: 6,
            n_sweeps: 10,
            tol: 1e-8,
            seed: 3,
            ..Default::default()
        };
        let (tt, report) = tt_cross(&field, &opts).unwrap();
        assert!(
            report.holdout_rel_error <= 1e-6,
            "error {}",
            report.holdout_rel_error
        );
        assert!(tt.interior_ranks().iter().all(|&r| r == 1));
    }

    #[test]
    fn exact_low_rank_recovery_with_slack() {
        // Rank-3 tensor: sum of three separable terms.
        let field = IndexField::new(vec![6, 6, 6, 6], |idx: &[usize]| {
            let x: Vec<f64> = idx.iter().map(|&i| i as f64 / 5.0).collect();
            (x[0] + x[1] + x[2] + x[3]).sin()
                + 0.5 * (x[0] * x[1] * x[2] * x[3])
                + (x[0] - x[3]).cos()
        });
        let opts = CrossOptions {
            max_rank: 10,
            n_sweeps: 20,
            tol: 1e-9,
            seed: 7,
            ..Default::default()
        };
        let (tt, report) = tt_cross(&field, &opts).unwrap();
        assert!(
            report.holdout_rel_error <= 1e-6,
            "error {}",
            report.holdout_rel_error
        );
        // structural validity + bounded ranks
        let ranks = tt.ranks();
        assert_eq!(ranks[0], 1);
        assert_eq!(ranks[ranks.len() - 1], 1);
    }

    #[test]
    fn reports_offending_index_on_nan() {
        let field = IndexField::new(vec![4, 4], |idx: &[usize]| {
            if idx == [2, 3] {
                f64::NAN
            } else {
                1.0
            }
        });
        let opts = CrossOptions {
            max_rank: 4,
            n_sweeps: 3,
            tol: 1e-10,
            seed: 5,
            holdout: 4000,
            ..Default::default()
        };
        let err = tt_cross(&field, &opts);
        assert!(matches!(err, Err(TtError::NonFinite { .. })));
    }

    #[test]
    fn rejects_degenerate_arguments() {
        let field = IndexField::new(vec![1, 4], |_: &[usize]| 1.0);
        assert!(tt_cross(&field, &CrossOptions::default()).is_err());
        let field2 = IndexField::new(vec![4, 4], |_: &[usize]| 1.0);
        let opts = CrossOptions {
            n_sweeps: 0,
            ..Default::default()
        };
        assert!(tt_cross(&field2, &opts).is_err());
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let field = IndexField::new(vec![6, 6, 6], |idx: &[usize]| {
            ((idx[0] * 7 + idx[1] * 3 + idx[2]) as f64).sin().abs()
        });
        let opts = CrossOptions {
            max_rank: 5,
            n_sweeps: 6,
            tol: 1e-12,
            seed: 11,
            ..Default::default()
        };
        let (a, ra) = tt_cross(&field, &opts).unwrap();
        let (b, rb) = tt_cross(&field, &opts).unwrap();
        assert_eq!(ra.holdout_rel_error, rb.holdout_rel_error);
        assert_eq!(a.ranks(), b.ranks());
        for (ca, cb) in a.cores().iter().zip(b.cores()) {
            for (sa, sb) in ca.slices().iter().zip(cb.slices()) {
                assert_eq!(sa, sb);
            }
        }
    }
}
