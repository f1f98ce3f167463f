//! Drawing i.i.d. multi-indices from a TT-encoded unnormalized density.
//!
//! Sampling runs mode by mode: the marginal over `i_1` is formed by closing
//! the chain with right partial sums, one bin is drawn, the prefix vector is
//! contracted with the chosen slice and the next conditional follows the
//! same way. Approximation noise can push values slightly negative; those
//! weights are clamped to zero during marginalization (raw values are used
//! otherwise — sampling from the squared TT would be the alternative).

use super::{TensorTrain, TtError};
use nalgebra::{DVector, RowDVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Draw `count` multi-indices from the distribution induced by the
/// (entrywise non-negative, up to approximation error) tensor train.
/// Deterministic for a fixed seed.
pub fn sample(
    pdf: &TensorTrain,
    count: usize,
    rng_seed: u64,
) -> Result<Vec<Vec<usize>>, TtError> {
    if count == 0 {
        return Err(TtError::InvalidArgument("count must be >= 1".into()));
    }
    let d = pdf.ndims();
    let sizes = pdf.mode_sizes();

    // Right partial sums: suffix[k] ∈ R^{r_k} closes the chain over modes
    // k..d. suffix[d] = [1].
    let mut suffix: Vec<DVector<f64>> = vec![DVector::zeros(0); d + 1];
    suffix[d] = DVector::from_element(1, 1.0);
    for k in (0..d).rev() {
        let core = &pdf.cores()[k];
        let mut acc = DVector::zeros(core.rank_left());
        for s in core.slices() {
            acc += s * &suffix[k + 1];
        }
        suffix[k] = acc;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut out = Vec::with_capacity(count);
    let mut weights: Vec<f64> = Vec::new();

    for _ in 0..count {
        let mut prefix = RowDVector::from_element(1, 1.0);
        let mut idx = Vec::with_capacity(d);
        for k in 0..d {
            let core = &pdf.cores()[k];
            weights.clear();
            weights.extend(
                (0..sizes[k])
                    .map(|i| (&prefix * core.slice(i) * &suffix[k + 1])[(0, 0)].max(0.0)),
            );
            let total: f64 = weights.iter().sum();
            let choice = if total > 0.0 {
                let mut u = rng.gen::<f64>() * total;
                let mut chosen = sizes[k] - 1;
                for (i, &w) in weights.iter().enumerate() {
                    if u < w {
                        chosen = i;
                        break;
                    }
                    u -= w;
                }
                chosen
            } else if k == 0 {
                return Err(TtError::DegenerateDistribution);
            } else {
                // all conditional mass clamped away: fall back to uniform
                rng.gen_range(0..sizes[k])
            };
            idx.push(choice);
            prefix *= core.slice(choice);
        }
        out.push(idx);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_density_always_returns_its_index() {
        // 1 at index (2, 1, 3), 0 elsewhere
        let mut factors = vec![vec![0.0; 4], vec![0.0; 4], vec![0.0; 4]];
        factors[0][2] = 1.0;
        factors[1][1] = 1.0;
        factors[2][3] = 1.0;
        let tt = TensorTrain::rank_one(&factors).unwrap();
        let samples = sample(&tt, 50, 42).unwrap();
        assert!(samples.iter().all(|s| s == &[2, 1, 3]));
    }

    #[test]
    fn uniform_density_passes_chi_square() {
        let tt = TensorTrain::constant(&[8, 8], 1.0).unwrap();
        let n = 10_000usize;
        let samples = sample(&tt, n, 7).unwrap();
        let mut counts = [[0usize; 8]; 8];
        for s in &samples {
            counts[s[0]][s[1]] += 1;
        }
        let expected = n as f64 / 64.0;
        let chi2: f64 = counts
            .iter()
            .flatten()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        // 63 degrees of freedom, significance 0.01
        assert!(chi2 < 92.01, "chi2 = {chi2}");
    }

    #[test]
    fn product_density_marginals_match() {
        let p1 = vec![0.1, 0.4, 0.3, 0.2];
        let p2 = vec![0.25, 0.05, 0.5, 0.2];
        let tt = TensorTrain::rank_one(&[p1.clone(), p2.clone()]).unwrap();
        let n = 100_000usize;
        let samples = sample(&tt, n, 99).unwrap();
        let mut m1 = [0.0f64; 4];
        let mut m2 = [0.0f64; 4];
        for s in &samples {
            m1[s[0]] += 1.0;
            m2[s[1]] += 1.0;
        }
        let tv1: f64 = m1
            .iter()
            .zip(&p1)
            .map(|(c, p)| (c / n as f64 - p).abs())
            .sum::<f64>()
            / 2.0;
        let tv2: f64 = m2
            .iter()
            .zip(&p2)
            .map(|(c, p)| (c / n as f64 - p).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv1 <= 0.02, "tv1 = {tv1}");
        assert!(tv2 <= 0.02, "tv2 = {tv2}");
    }

    #[test]
    fn all_zero_density_is_an_error() {
        let tt = TensorTrain::constant(&[4, 4], 0.0).unwrap();
        assert!(matches!(
            sample(&tt, 5, 0),
            Err(TtError::DegenerateDistribution)
        ));
    }

    #[test]
    fn reproducible_for_fixed_seed() {
        let mut rng_factors = Vec::new();
        for n in [5usize, 3, 6] {
            rng_factors.push((0..n).map(|i| 0.1 + (i as f64 * 1.7).fract()).collect());
        }
        let tt = TensorTrain::rank_one(&rng_factors).unwrap();
        let a = sample(&tt, 200, 1234).unwrap();
        let b = sample(&tt, 200, 1234).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn negative_noise_is_clamped() {
        // density with small negative entries still samples the positive mass
        let tt = TensorTrain::rank_one(&[vec![1.0, -1e-9], vec![1.0, 1.0]]).unwrap();
        let samples = sample(&tt, 100, 5).unwrap();
        assert!(samples.iter().all(|s| s[0] == 0));
    }
}
