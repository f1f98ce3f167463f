//! Tensor-train (TT) representation of discretized scalar fields.
//!
//! A d-dimensional tensor `A[i_1, .., i_d]` is stored as a chain of 3-mode
//! cores `G_k` of shape `(r_{k-1}, n_k, r_k)` with `r_0 = r_d = 1`, so that
//! an entry is the product of matrix slices `G_1[:,i_1,:] ... G_d[:,i_d,:]`.
//! Storage scales linearly in d and quadratically in the ranks, which is
//! what makes dense joint-space grids tractable.
//!
//! The module provides exact evaluation, elementwise addition (rank-additive
//! block construction), affine scaling, TT-SVD construction from small dense
//! tensors, rounding (rank re-compression with a relative Frobenius bound),
//! cross approximation of black-box fields ([`cross`]) and conditional
//! sampling ([`sample`]).

pub mod cross;
pub mod sample;

use nalgebra::{DMatrix, RowDVector};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

pub use cross::{tt_cross, BlackBoxField, CrossOptions, CrossReport, IndexField, TensorField};
pub use sample::sample as tt_sample;

#[derive(Debug, Error)]
pub enum TtError {
    #[error("index {index:?} out of range for mode sizes {modes:?}")]
    IndexOutOfRange { index: Vec<usize>, modes: Vec<usize> },
    #[error("mode sizes mismatch: {0:?} vs {1:?}")]
    ModeMismatch(Vec<usize>, Vec<usize>),
    #[error("invalid tensor train: {0}")]
    Invalid(String),
    #[error("non-finite value encountered at index {index:?}")]
    NonFinite { index: Vec<usize> },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("density is zero (or fully clamped) — cannot sample")]
    DegenerateDistribution,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

/// One TT core: `n` slices, each an `r_left × r_right` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Core {
    slices: Vec<DMatrix<f64>>,
}

impl Core {
    pub fn new(slices: Vec<DMatrix<f64>>) -> Self {
        debug_assert!(!slices.is_empty());
        debug_assert!(slices
            .windows(2)
            .all(|w| w[0].shape() == w[1].shape()));
        Self { slices }
    }

    pub fn mode_size(&self) -> usize {
        self.slices.len()
    }

    pub fn rank_left(&self) -> usize {
        self.slices[0].nrows()
    }

    pub fn rank_right(&self) -> usize {
        self.slices[0].ncols()
    }

    pub fn slice(&self, i: usize) -> &DMatrix<f64> {
        &self.slices[i]
    }

    pub fn slices(&self) -> &[DMatrix<f64>] {
        &self.slices
    }

    /// `(r_left · n) × r_right` unfolding; slice `i` of the core occupies
    /// rows `{a·n + i}` (row-major over `(a, i)`).
    pub fn left_unfold(&self) -> DMatrix<f64> {
        let (rl, n, rr) = (self.rank_left(), self.mode_size(), self.rank_right());
        DMatrix::from_fn(rl * n, rr, |row, col| {
            let a = row / n;
            let i = row % n;
            self.slices[i][(a, col)]
        })
    }

    /// `r_left × (n · r_right)` unfolding; slice `i` occupies columns
    /// `{i·r_right + b}` (row-major over `(i, b)`).
    pub fn right_unfold(&self) -> DMatrix<f64> {
        let (rl, n, rr) = (self.rank_left(), self.mode_size(), self.rank_right());
        DMatrix::from_fn(rl, n * rr, |row, col| {
            let i = col / rr;
            let b = col % rr;
            self.slices[i][(row, b)]
        })
    }

    pub fn from_left_unfold(m: &DMatrix<f64>, rank_left: usize, mode_size: usize) -> Self {
        debug_assert_eq!(m.nrows(), rank_left * mode_size);
        let rr = m.ncols();
        let slices = (0..mode_size)
            .map(|i| DMatrix::from_fn(rank_left, rr, |a, b| m[(a * mode_size + i, b)]))
            .collect();
        Self { slices }
    }

    pub fn from_right_unfold(m: &DMatrix<f64>, mode_size: usize) -> Self {
        debug_assert_eq!(m.ncols() % mode_size, 0);
        let rl = m.nrows();
        let rr = m.ncols() / mode_size;
        let slices = (0..mode_size)
            .map(|i| DMatrix::from_fn(rl, rr, |a, b| m[(a, i * rr + b)]))
            .collect();
        Self { slices }
    }
}

/// Tensor train over `d` modes. Immutable after construction; cheap to share
/// across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorTrain {
    cores: Vec<Core>,
}

impl TensorTrain {
    /// Build from cores, validating the chain structure: boundary ranks 1
    /// and adjacent cores agreeing on the shared rank.
    pub fn new(cores: Vec<Core>) -> Result<Self, TtError> {
        if cores.is_empty() {
            return Err(TtError::Invalid("no cores".into()));
        }
        if cores[0].rank_left() != 1 {
            return Err(TtError::Invalid(format!(
                "first core has left rank {}, expected 1",
                cores[0].rank_left()
            )));
        }
        if cores[cores.len() - 1].rank_right() != 1 {
            return Err(TtError::Invalid(format!(
                "last core has right rank {}, expected 1",
                cores[cores.len() - 1].rank_right()
            )));
        }
        for k in 0..cores.len() - 1 {
            if cores[k].rank_right() != cores[k + 1].rank_left() {
                return Err(TtError::Invalid(format!(
                    "rank mismatch between cores {} and {}: {} vs {}",
                    k,
                    k + 1,
                    cores[k].rank_right(),
                    cores[k + 1].rank_left()
                )));
            }
        }
        Ok(Self { cores })
    }

    /// Rank-1 TT from per-mode factor vectors: evaluates to the product
    /// `f_1[i_1] · ... · f_d[i_d]`.
    pub fn rank_one(factors: &[Vec<f64>]) -> Result<Self, TtError> {
        if factors.is_empty() || factors.iter().any(|f| f.is_empty()) {
            return Err(TtError::Invalid("empty factor list".into()));
        }
        let cores = factors
            .iter()
            .map(|f| Core::new(f.iter().map(|&v| DMatrix::from_element(1, 1, v)).collect()))
            .collect();
        Ok(Self { cores })
    }

    /// Constant TT evaluating to `value` at every index.
    pub fn constant(mode_sizes: &[usize], value: f64) -> Result<Self, TtError> {
        let factors: Vec<Vec<f64>> = mode_sizes
            .iter()
            .enumerate()
            .map(|(k, &n)| vec![if k == 0 { value } else { 1.0 }; n])
            .collect();
        Self::rank_one(&factors)
    }

    pub fn ndims(&self) -> usize {
        self.cores.len()
    }

    pub fn cores(&self) -> &[Core] {
        &self.cores
    }

    pub fn mode_sizes(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.mode_size()).collect()
    }

    /// All ranks `r_0 .. r_d` (first and last are 1).
    pub fn ranks(&self) -> Vec<usize> {
        let mut r = Vec::with_capacity(self.cores.len() + 1);
        r.push(self.cores[0].rank_left());
        for c in &self.cores {
            r.push(c.rank_right());
        }
        r
    }

    /// Ranks `r_1 .. r_{d-1}` between cores.
    pub fn interior_ranks(&self) -> Vec<usize> {
        let r = self.ranks();
        r[1..r.len() - 1].to_vec()
    }

    pub fn max_rank(&self) -> usize {
        self.ranks().into_iter().max().unwrap_or(1)
    }

    /// Total number of stored scalars, `Σ_k r_{k-1}·n_k·r_k`.
    pub fn parameter_count(&self) -> usize {
        self.cores
            .iter()
            .map(|c| c.rank_left() * c.mode_size() * c.rank_right())
            .sum()
    }

    /// Evaluate a single entry as the product of core slices.
    pub fn eval(&self, idx: &[usize]) -> Result<f64, TtError> {
        let modes = self.mode_sizes();
        if idx.len() != modes.len() || idx.iter().zip(&modes).any(|(&i, &n)| i >= n) {
            return Err(TtError::IndexOutOfRange {
                index: idx.to_vec(),
                modes,
            });
        }
        let mut v = RowDVector::from_element(1, 1.0);
        for (core, &i) in self.cores.iter().zip(idx) {
            v *= core.slice(i);
        }
        Ok(v[0])
    }

    /// Elementwise sum. Boundary cores are concatenated, interior cores are
    /// stacked block-diagonally, so interior ranks add.
    pub fn add(&self, other: &Self) -> Result<Self, TtError> {
        let (ma, mb) = (self.mode_sizes(), other.mode_sizes());
        if ma != mb {
            return Err(TtError::ModeMismatch(ma, mb));
        }
        let d = self.ndims();
        if d == 1 {
            let slices = self.cores[0]
                .slices()
                .iter()
                .zip(other.cores[0].slices())
                .map(|(a, b)| a + b)
                .collect();
            return Self::new(vec![Core::new(slices)]);
        }
        let mut cores = Vec::with_capacity(d);
        for k in 0..d {
            let (ca, cb) = (&self.cores[k], &other.cores[k]);
            let n = ca.mode_size();
            let slices: Vec<DMatrix<f64>> = (0..n)
                .map(|i| {
                    let (sa, sb) = (ca.slice(i), cb.slice(i));
                    if k == 0 {
                        // horizontal concatenation [A | B]
                        let mut m = DMatrix::zeros(1, sa.ncols() + sb.ncols());
                        m.view_mut((0, 0), (1, sa.ncols())).copy_from(sa);
                        m.view_mut((0, sa.ncols()), (1, sb.ncols())).copy_from(sb);
                        m
                    } else if k == d - 1 {
                        // vertical concatenation [A; B]
                        let mut m = DMatrix::zeros(sa.nrows() + sb.nrows(), 1);
                        m.view_mut((0, 0), (sa.nrows(), 1)).copy_from(sa);
                        m.view_mut((sa.nrows(), 0), (sb.nrows(), 1)).copy_from(sb);
                        m
                    } else {
                        // block diagonal
                        let (ra, ca_) = sa.shape();
                        let (rb, cb_) = sb.shape();
                        let mut m = DMatrix::zeros(ra + rb, ca_ + cb_);
                        m.view_mut((0, 0), (ra, ca_)).copy_from(sa);
                        m.view_mut((ra, ca_), (rb, cb_)).copy_from(sb);
                        m
                    }
                })
                .collect();
            cores.push(Core::new(slices));
        }
        Self::new(cores)
    }

    /// Affine map `alpha·A + beta`, the shift realized by adding a rank-1
    /// constant TT. With `alpha = -1, beta = 1` this is the inverse-density
    /// construction.
    pub fn scale_shift(&self, alpha: f64, beta: f64) -> Self {
        let mut scaled = self.clone();
        for s in &mut scaled.cores[0].slices {
            *s *= alpha;
        }
        if beta == 0.0 {
            return scaled;
        }
        let shift = Self::constant(&self.mode_sizes(), beta).expect("valid mode sizes");
        scaled.add(&shift).expect("identical mode sizes")
    }

    /// Frobenius norm computed by core contraction (no densification).
    pub fn frobenius_norm(&self) -> f64 {
        let mut phi = DMatrix::from_element(1, 1, 1.0);
        for core in &self.cores {
            let rr = core.rank_right();
            let mut next = DMatrix::zeros(rr, rr);
            for s in core.slices() {
                next += s.transpose() * &phi * s;
            }
            phi = next;
        }
        phi[(0, 0)].max(0.0).sqrt()
    }

    /// Re-compress ranks while keeping the relative Frobenius error below
    /// `tol`. Interior ranks never increase.
    pub fn round(&self, tol: f64) -> Self {
        let d = self.ndims();
        if d == 1 {
            return self.clone();
        }
        let mut cores = self.cores.clone();

        // Right-to-left orthogonalization: make cores 1..d row-orthonormal,
        // absorbing the triangular factors leftwards.
        for k in (1..d).rev() {
            let m = cores[k].right_unfold(); // r_{k-1} × (n·r_k)
            let qr = m.transpose().qr();
            let q = qr.q(); // (n·r_k) × r'
            let r = qr.r(); // r' × r_{k-1}
            let n = cores[k].mode_size();
            cores[k] = Core::from_right_unfold(&q.transpose(), n);
            let carry = r.transpose(); // r_{k-1} × r'
            let prev_slices = cores[k - 1]
                .slices()
                .iter()
                .map(|s| s * &carry)
                .collect();
            cores[k - 1] = Core::new(prev_slices);
        }

        // After orthogonalization the full Frobenius norm sits in core 0.
        let norm: f64 = cores[0]
            .slices()
            .iter()
            .map(|s| s.iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            .sqrt();
        let delta = if norm > 0.0 {
            tol * norm / ((d - 1) as f64).sqrt()
        } else {
            0.0
        };

        // Left-to-right SVD truncation.
        for k in 0..d - 1 {
            let unf = cores[k].left_unfold(); // (r_{k-1}·n) × r_k
            let rank_in = unf.ncols();
            let svd = unf.svd(true, true);
            let s = &svd.singular_values;
            let total: f64 = s.iter().map(|v| v * v).sum();
            let mut keep = s.len();
            let mut tail = 0.0;
            while keep > 1 {
                let cand = s[keep - 1] * s[keep - 1];
                if tail + cand <= delta * delta + 1e-300 * total {
                    tail += cand;
                    keep -= 1;
                } else {
                    break;
                }
            }
            // drop exactly-zero singular values even at tol = 0
            while keep > 1 && s[keep - 1] == 0.0 {
                keep -= 1;
            }
            let keep = keep.min(rank_in);
            let u = svd.u.as_ref().expect("requested u");
            let vt = svd.v_t.as_ref().expect("requested v_t");
            let u_r = u.columns(0, keep).into_owned();
            let n = cores[k].mode_size();
            let rl = cores[k].rank_left();
            cores[k] = Core::from_left_unfold(&u_r, rl, n);
            // carry = diag(s)·V^T into the next core
            let mut carry = vt.rows(0, keep).into_owned();
            for (j, mut row) in carry.row_iter_mut().enumerate() {
                row *= s[j];
            }
            let next_slices = cores[k + 1]
                .slices()
                .iter()
                .map(|sl| &carry * sl)
                .collect();
            cores[k + 1] = Core::new(next_slices);
        }

        Self { cores }
    }

    /// TT-SVD of a small dense tensor given in row-major order. Intended for
    /// test-scale oracles and fixtures.
    pub fn from_dense(data: &[f64], shape: &[usize], tol: f64) -> Result<Self, TtError> {
        if shape.is_empty() || shape.iter().any(|&n| n == 0) {
            return Err(TtError::InvalidArgument(format!(
                "invalid shape {shape:?}"
            )));
        }
        let total: usize = shape.iter().product();
        if data.len() != total {
            return Err(TtError::InvalidArgument(format!(
                "data length {} does not match shape {:?}",
                data.len(),
                shape
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(TtError::NonFinite {
                index: unravel(pos, shape),
            });
        }
        let norm: f64 = data.iter().map(|v| v * v).sum::<f64>().sqrt();
        let d = shape.len();
        if norm == 0.0 {
            let factors: Vec<Vec<f64>> = shape.iter().map(|&n| vec![0.0; n]).collect();
            return Self::rank_one(&factors);
        }
        let delta = tol * norm / ((d.max(2) - 1) as f64).sqrt();

        let mut cores = Vec::with_capacity(d);
        let mut c = data.to_vec();
        let mut r = 1usize;
        for k in 0..d - 1 {
            let n_k = shape[k];
            let rows = r * n_k;
            let cols = c.len() / rows;
            let m = DMatrix::from_row_slice(rows, cols, &c);
            let svd = m.svd(true, true);
            let s = &svd.singular_values;
            let mut keep = s.len();
            let mut tail = 0.0;
            while keep > 1 {
                let cand = s[keep - 1] * s[keep - 1];
                if tail + cand <= delta * delta {
                    tail += cand;
                    keep -= 1;
                } else {
                    break;
                }
            }
            while keep > 1 && s[keep - 1] == 0.0 {
                keep -= 1;
            }
            let u = svd.u.as_ref().expect("requested u");
            let vt = svd.v_t.as_ref().expect("requested v_t");
            let u_r = u.columns(0, keep).into_owned();
            cores.push(Core::from_left_unfold(&u_r, r, n_k));
            let mut carry = vt.rows(0, keep).into_owned();
            for (j, mut row) in carry.row_iter_mut().enumerate() {
                row *= s[j];
            }
            // carry is keep × cols, row-major flatten for the next step
            c = (0..keep * cols)
                .map(|p| carry[(p / cols, p % cols)])
                .collect();
            r = keep;
        }
        let n_d = shape[d - 1];
        let last = DMatrix::from_row_slice(r, n_d, &c);
        let slices = (0..n_d)
            .map(|i| DMatrix::from_fn(r, 1, |a, _| last[(a, i)]))
            .collect();
        cores.push(Core::new(slices));
        if d == 1 {
            // single-mode tensor: the loop above never ran
            let slices = c.iter().map(|&v| DMatrix::from_element(1, 1, v)).collect();
            return Self::new(vec![Core::new(slices)]);
        }
        Self::new(cores)
    }

    /// Densify (row-major). Test-scale only; panics on absurdly large grids
    /// is avoided by the caller keeping shapes small.
    pub fn to_dense(&self) -> (Vec<f64>, Vec<usize>) {
        let shape = self.mode_sizes();
        let total: usize = shape.iter().product();
        let mut out = Vec::with_capacity(total);
        for idx in MultiIndexIter::new(&shape) {
            out.push(self.eval(&idx).expect("in-range index"));
        }
        (out, shape)
    }

    pub fn save_json(&self, path: &Path) -> Result<(), TtError> {
        let file = TtFile::from_tt(self);
        let s = serde_json::to_string(&file)?;
        std::fs::write(path, s)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self, TtError> {
        let s = std::fs::read_to_string(path)?;
        let file: TtFile = serde_json::from_str(&s)?;
        file.into_tt()
    }
}

/// Serialized container: version, shape metadata and core values in
/// row-major `(r_left, n, r_right)` order. JSON float round-trips are exact
/// for finite f64, so core values survive bit-exactly.
#[derive(Debug, Serialize, Deserialize)]
pub struct TtFile {
    pub version: u32,
    pub mode_sizes: Vec<usize>,
    pub ranks: Vec<usize>,
    pub cores: Vec<Vec<f64>>,
}

pub const TT_FILE_VERSION: u32 = 1;

impl TtFile {
    pub fn from_tt(tt: &TensorTrain) -> Self {
        let cores = tt
            .cores()
            .iter()
            .map(|c| {
                let (rl, n, rr) = (c.rank_left(), c.mode_size(), c.rank_right());
                let mut v = Vec::with_capacity(rl * n * rr);
                for a in 0..rl {
                    for i in 0..n {
                        for b in 0..rr {
                            v.push(c.slice(i)[(a, b)]);
                        }
                    }
                }
                v
            })
            .collect();
        Self {
            version: TT_FILE_VERSION,
            mode_sizes: tt.mode_sizes(),
            ranks: tt.ranks(),
            cores,
        }
    }

    pub fn into_tt(self) -> Result<TensorTrain, TtError> {
        if self.version != TT_FILE_VERSION {
            return Err(TtError::Invalid(format!(
                "unsupported TT file version {}",
                self.version
            )));
        }
        if self.ranks.len() != self.mode_sizes.len() + 1 || self.cores.len() != self.mode_sizes.len()
        {
            return Err(TtError::Invalid("inconsistent TT file metadata".into()));
        }
        let mut cores = Vec::with_capacity(self.cores.len());
        for (k, data) in self.cores.iter().enumerate() {
            let (rl, n, rr) = (self.ranks[k], self.mode_sizes[k], self.ranks[k + 1]);
            if data.len() != rl * n * rr {
                return Err(TtError::Invalid(format!("core {k} has wrong length")));
            }
            let slices = (0..n)
                .map(|i| DMatrix::from_fn(rl, rr, |a, b| data[a * n * rr + i * rr + b]))
                .collect();
            cores.push(Core::new(slices));
        }
        TensorTrain::new(cores)
    }
}

/// Iterate all multi-indices of a shape in row-major order.
pub struct MultiIndexIter {
    shape: Vec<usize>,
    current: Vec<usize>,
    done: bool,
}

impl MultiIndexIter {
    pub fn new(shape: &[usize]) -> Self {
        Self {
            shape: shape.to_vec(),
            current: vec![0; shape.len()],
            done: shape.is_empty() || shape.contains(&0),
        }
    }
}

impl Iterator for MultiIndexIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        for k in (0..self.shape.len()).rev() {
            self.current[k] += 1;
            if self.current[k] < self.shape[k] {
                return Some(out);
            }
            self.current[k] = 0;
        }
        self.done = true;
        Some(out)
    }
}

fn unravel(mut pos: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for k in (0..shape.len()).rev() {
        idx[k] = pos % shape[k];
        pos /= shape[k];
    }
    idx
}
