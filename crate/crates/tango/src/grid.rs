//! Joint-space discretization.
//!
//! A [`Grid`] maps between joint vectors, per-joint bin indices and the
//! virtual multi-indices a tensor train operates on. Each physical joint may
//! optionally be factorized into several virtual dimensions (for example
//! 128 bins split as 8·4·4) so that the TT sees many short modes instead of
//! a few long ones. Virtual dimensions of one joint stay contiguous and are
//! little-endian: the first factor is the least significant digit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("dimension {0}: bins must be positive")]
    ZeroBins(usize),
    #[error("dimension {0}: min {1} must be below max {2}")]
    EmptyRange(usize, f64, f64),
    #[error("dimension {dim}: reshape factors {factors:?} multiply to {product}, expected {bins}")]
    BadReshape {
        dim: usize,
        factors: Vec<usize>,
        product: usize,
        bins: usize,
    },
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// One physical joint axis: closed interval `[min, max]` split into `bins`
/// equal cells. Values map to the cell containing them; indices map back to
/// cell centers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridDim {
    pub min: f64,
    pub max: f64,
    pub bins: usize,
}

impl GridDim {
    pub fn new(min: f64, max: f64, bins: usize) -> Self {
        Self { min, max, bins }
    }

    pub fn width(&self) -> f64 {
        (self.max - self.min) / self.bins as f64
    }

    fn value_to_bin(&self, v: f64) -> usize {
        let t = (v - self.min) / self.width();
        (t.floor() as isize).clamp(0, self.bins as isize - 1) as usize
    }

    fn bin_center(&self, i: usize) -> f64 {
        self.min + (i as f64 + 0.5) * self.width()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Grid {
    dims: Vec<GridDim>,
    /// Per physical dimension: little-endian virtual factors. `None` means
    /// one virtual dimension per physical dimension.
    reshape: Option<Vec<Vec<usize>>>,
}

impl Grid {
    pub fn new(dims: Vec<GridDim>) -> Result<Self, GridError> {
        Self::validate_dims(&dims)?;
        Ok(Self {
            dims,
            reshape: None,
        })
    }

    /// Grid whose physical dimensions are factorized into virtual ones.
    /// `factors[d]` must multiply to `dims[d].bins`.
    pub fn with_reshape(dims: Vec<GridDim>, factors: Vec<Vec<usize>>) -> Result<Self, GridError> {
        Self::validate_dims(&dims)?;
        if factors.len() != dims.len() {
            return Err(GridError::DimensionMismatch {
                expected: dims.len(),
                got: factors.len(),
            });
        }
        for (d, (dim, fs)) in dims.iter().zip(&factors).enumerate() {
            let product: usize = fs.iter().product();
            if fs.is_empty() || product != dim.bins || fs.iter().any(|&f| f == 0) {
                return Err(GridError::BadReshape {
                    dim: d,
                    factors: fs.clone(),
                    product,
                    bins: dim.bins,
                });
            }
        }
        Ok(Self {
            dims,
            reshape: Some(factors),
        })
    }

    fn validate_dims(dims: &[GridDim]) -> Result<(), GridError> {
        for (d, dim) in dims.iter().enumerate() {
            if dim.bins == 0 {
                return Err(GridError::ZeroBins(d));
            }
            if !(dim.min < dim.max) {
                return Err(GridError::EmptyRange(d, dim.min, dim.max));
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> &[GridDim] {
        &self.dims
    }

    pub fn num_physical(&self) -> usize {
        self.dims.len()
    }

    pub fn physical_bins(&self) -> Vec<usize> {
        self.dims.iter().map(|d| d.bins).collect()
    }

    /// Mode sizes the tensor train sees.
    pub fn virtual_mode_sizes(&self) -> Vec<usize> {
        match &self.reshape {
            None => self.physical_bins(),
            Some(factors) => factors.iter().flatten().copied().collect(),
        }
    }

    pub fn num_virtual(&self) -> usize {
        self.virtual_mode_sizes().len()
    }

    /// Total number of grid cells.
    pub fn cell_count(&self) -> u128 {
        self.dims.iter().map(|d| d.bins as u128).product()
    }

    pub fn lower_bounds(&self) -> Vec<f64> {
        self.dims.iter().map(|d| d.min).collect()
    }

    pub fn upper_bounds(&self) -> Vec<f64> {
        self.dims.iter().map(|d| d.max).collect()
    }

    /// Bin index per physical dimension for a joint vector. Out-of-range
    /// coordinates clamp to the boundary cell.
    pub fn value_to_index(&self, q: &[f64]) -> Result<Vec<usize>, GridError> {
        if q.len() != self.dims.len() {
            return Err(GridError::DimensionMismatch {
                expected: self.dims.len(),
                got: q.len(),
            });
        }
        Ok(q.iter()
            .zip(&self.dims)
            .map(|(&v, d)| d.value_to_bin(v))
            .collect())
    }

    /// Cell-center joint vector for a physical multi-index.
    pub fn index_to_value(&self, idx: &[usize]) -> Result<Vec<f64>, GridError> {
        if idx.len() != self.dims.len() {
            return Err(GridError::DimensionMismatch {
                expected: self.dims.len(),
                got: idx.len(),
            });
        }
        Ok(idx
            .iter()
            .zip(&self.dims)
            .map(|(&i, d)| d.bin_center(i.min(d.bins - 1)))
            .collect())
    }

    /// Expand a physical multi-index into the virtual multi-index,
    /// little-endian within each joint.
    pub fn physical_to_virtual(&self, idx: &[usize]) -> Vec<usize> {
        match &self.reshape {
            None => idx.to_vec(),
            Some(factors) => {
                let mut out = Vec::with_capacity(self.num_virtual());
                for (&i, fs) in idx.iter().zip(factors) {
                    let mut rem = i;
                    for &f in fs {
                        out.push(rem % f);
                        rem /= f;
                    }
                }
                out
            }
        }
    }

    /// Collapse a virtual multi-index back to per-joint bin indices.
    pub fn virtual_to_physical(&self, vidx: &[usize]) -> Vec<usize> {
        match &self.reshape {
            None => vidx.to_vec(),
            Some(factors) => {
                let mut out = Vec::with_capacity(self.dims.len());
                let mut pos = 0;
                for fs in factors {
                    let mut value = 0usize;
                    let mut stride = 1usize;
                    for &f in fs {
                        value += vidx[pos] * stride;
                        stride *= f;
                        pos += 1;
                    }
                    out.push(value);
                }
                out
            }
        }
    }

    /// Joint vector (cell center) for a virtual multi-index.
    pub fn virtual_to_value(&self, vidx: &[usize]) -> Result<Vec<f64>, GridError> {
        self.index_to_value(&self.virtual_to_physical(vidx))
    }

    /// Virtual multi-index of the cell containing a joint vector.
    pub fn value_to_virtual(&self, q: &[f64]) -> Result<Vec<usize>, GridError> {
        Ok(self.physical_to_virtual(&self.value_to_index(q)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid3() -> Grid {
        Grid::new(vec![
            GridDim::new(-PI, PI, 128),
            GridDim::new(-PI, PI, 128),
            GridDim::new(-PI, PI, 128),
        ])
        .unwrap()
    }

    #[test]
    fn value_index_round_trip_within_half_bin() {
        let g = grid3();
        let half = g.dims()[0].width() / 2.0;
        let qs = [
            vec![0.0, 0.1, -0.2],
            vec![-PI + 1e-9, PI - 1e-9, 1.234],
            vec![2.5, -2.5, 0.77],
        ];
        for q in &qs {
            let idx = g.value_to_index(q).unwrap();
            let back = g.index_to_value(&idx).unwrap();
            for (a, b) in q.iter().zip(&back) {
                assert!((a - b).abs() <= half + 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn reshape_round_trip_and_sizes() {
        let g = Grid::with_reshape(
            vec![GridDim::new(-1.0, 1.0, 128), GridDim::new(-1.0, 1.0, 128)],
            vec![vec![8, 4, 4], vec![8, 4, 4]],
        )
        .unwrap();
        assert_eq!(g.virtual_mode_sizes(), vec![8, 4, 4, 8, 4, 4]);
        for phys in [[0usize, 0], [127, 127], [37, 101], [64, 1]] {
            let v = g.physical_to_virtual(&phys);
            assert_eq!(g.virtual_to_physical(&v), phys.to_vec());
        }
    }

    #[test]
    fn reshape_product_must_match() {
        let err = Grid::with_reshape(
            vec![GridDim::new(0.0, 1.0, 128)],
            vec![vec![8, 8, 3]],
        );
        assert!(matches!(err, Err(GridError::BadReshape { .. })));
    }

    #[test]
    fn out_of_range_values_clamp() {
        let g = grid3();
        let idx = g.value_to_index(&[-10.0, 10.0, 0.0]).unwrap();
        assert_eq!(idx[0], 0);
        assert_eq!(idx[1], 127);
    }
}
