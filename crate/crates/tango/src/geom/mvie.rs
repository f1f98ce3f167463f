//! Maximum-volume inscribed ellipsoid of an H-polytope.
//!
//! The ellipsoid `{B·u + d : ‖u‖ ≤ 1}` (B symmetric positive definite) sits
//! inside `{x : Ax ≤ b}` iff `‖B aᵢ‖ + aᵢᵀd ≤ bᵢ` for every row. Maximizing
//! `log det B` under those convex constraints is solved here with a standard
//! log-barrier interior-point method: damped Newton steps on
//!
//!   φ_t(B, d) = −t·log det B − Σᵢ log(bᵢ − aᵢᵀd − ‖B aᵢ‖)
//!
//! with analytic gradient and Hessian over `vech(B)` and `d`, and a
//! geometric schedule on t until the duality-gap proxy m/t is negligible.

use nalgebra::{Cholesky, DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct MvieResult {
    /// SPD shape matrix.
    pub shape: DMatrix<f64>,
    /// Center.
    pub center: DVector<f64>,
    /// Final gradient norm of the barrier objective at the last t stage.
    pub gradient_norm: f64,
    pub newton_iterations: usize,
}

/// Symmetric parameter basis: diagonal matrices `e_k e_kᵀ` followed by
/// `e_k e_lᵀ + e_l e_kᵀ` for k < l, so `B = Σ θ_α E_α`.
fn sym_basis(n: usize) -> Vec<DMatrix<f64>> {
    let mut basis = Vec::with_capacity(n * (n + 1) / 2);
    for k in 0..n {
        let mut e = DMatrix::zeros(n, n);
        e[(k, k)] = 1.0;
        basis.push(e);
    }
    for k in 0..n {
        for l in k + 1..n {
            let mut e = DMatrix::zeros(n, n);
            e[(k, l)] = 1.0;
            e[(l, k)] = 1.0;
            basis.push(e);
        }
    }
    basis
}

fn unpack(theta: &DVector<f64>, basis: &[DMatrix<f64>], n: usize) -> (DMatrix<f64>, DVector<f64>) {
    let nb = basis.len();
    let mut b = DMatrix::zeros(n, n);
    for (alpha, e) in basis.iter().enumerate() {
        b += e * theta[alpha];
    }
    let d = DVector::from_fn(n, |i, _| theta[nb + i]);
    (b, d)
}

struct Objective<'a> {
    a: &'a DMatrix<f64>,
    b: &'a DVector<f64>,
    basis: Vec<DMatrix<f64>>,
    n: usize,
    t: f64,
}

impl<'a> Objective<'a> {
    /// Value, or None when (B, d) is outside the domain (B not PD or some
    /// slack nonpositive).
    fn value(&self, theta: &DVector<f64>) -> Option<f64> {
        let (bm, d) = unpack(theta, &self.basis, self.n);
        let chol = Cholesky::new(bm.clone())?;
        let logdet = 2.0 * (0..self.n)
            .map(|i| chol.l()[(i, i)].ln())
            .sum::<f64>();
        let mut val = -self.t * logdet;
        for i in 0..self.a.nrows() {
            let ai = self.a.row(i).transpose();
            let u = (&bm * &ai).norm();
            let s = self.b[i] - ai.dot(&d) - u;
            if s <= 0.0 {
                return None;
            }
            val -= s.ln();
        }
        Some(val)
    }

    /// Analytic gradient and Hessian over θ = (vech(B), d).
    fn grad_hess(&self, theta: &DVector<f64>) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let nb = self.basis.len();
        let dim = nb + self.n;
        let (bm, d) = unpack(theta, &self.basis, self.n);
        let chol = Cholesky::new(bm.clone())?;
        let binv = chol.inverse();

        let mut grad = DVector::zeros(dim);
        let mut hess = DMatrix::zeros(dim, dim);

        // −t·log det B part
        for alpha in 0..nb {
            grad[alpha] = -self.t * (&binv * &self.basis[alpha]).trace();
        }
        let binv_e: Vec<DMatrix<f64>> = self.basis.iter().map(|e| &binv * e).collect();
        for alpha in 0..nb {
            for beta in alpha..nb {
                let v = self.t * (&binv_e[alpha] * &binv_e[beta]).trace();
                hess[(alpha, beta)] += v;
                if alpha != beta {
                    hess[(beta, alpha)] += v;
                }
            }
        }

        // barrier terms
        for i in 0..self.a.nrows() {
            let ai = self.a.row(i).transpose();
            let q = &bm * &ai;
            let u = q.norm();
            let s = self.b[i] - ai.dot(&d) - u;
            if s <= 0.0 {
                return None;
            }
            // w_α = E_α·aᵢ; ∂u/∂θ_α = (q·w_α)/u
            let w: Vec<DVector<f64>> = self.basis.iter().map(|e| e * &ai).collect();
            let mut grad_s_tilde = DVector::zeros(dim); // gradient of aᵢᵀd + u
            if u > 1e-300 {
                for alpha in 0..nb {
                    grad_s_tilde[alpha] = q.dot(&w[alpha]) / u;
                }
            }
            for j in 0..self.n {
                grad_s_tilde[nb + j] = ai[j];
            }
            // ∇(−log s) = (1/s)·∇s̃
            grad.axpy(1.0 / s, &grad_s_tilde, 1.0);
            // ∇²(−log s) = (1/s²)·∇s̃ ∇s̃ᵀ + (1/s)·∇²u
            let inv_s2 = 1.0 / (s * s);
            for r in 0..dim {
                let gr = grad_s_tilde[r];
                if gr == 0.0 {
                    continue;
                }
                for c in 0..dim {
                    hess[(r, c)] += inv_s2 * gr * grad_s_tilde[c];
                }
            }
            if u > 1e-300 {
                for alpha in 0..nb {
                    for beta in alpha..nb {
                        let h = (w[alpha].dot(&w[beta])) / u
                            - (q.dot(&w[alpha]) * q.dot(&w[beta])) / (u * u * u);
                        let v = h / s;
                        hess[(alpha, beta)] += v;
                        if alpha != beta {
                            hess[(beta, alpha)] += v;
                        }
                    }
                }
            }
        }
        Some((grad, hess))
    }
}

/// Solve for the maximum-volume inscribed ellipsoid. `start` must be a
/// strictly interior point (e.g. the Chebyshev center) and `radius` a ball
/// radius around it that stays strictly inside.
pub fn max_volume_ellipsoid(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    start: &DVector<f64>,
    radius: f64,
) -> Option<MvieResult> {
    let n = a.ncols();
    let m = a.nrows();
    let basis = sym_basis(n);
    let nb = basis.len();
    let dim = nb + n;

    let mut theta = DVector::zeros(dim);
    for k in 0..n {
        theta[k] = radius; // B = radius·I
    }
    for j in 0..n {
        theta[nb + j] = start[j];
    }

    let mut t = 1.0;
    let t_final = (m.max(1) as f64) * 1e9;
    let mut total_newton = 0usize;
    let mut last_grad_norm = f64::INFINITY;

    while t <= t_final {
        let obj = Objective {
            a,
            b,
            basis: basis.clone(),
            n,
            t,
        };
        let mut value = obj.value(&theta)?;
        for _ in 0..120 {
            total_newton += 1;
            let (grad, hess) = obj.grad_hess(&theta)?;
            last_grad_norm = grad.norm();
            // Levenberg fallback if the Hessian loses definiteness numerically
            let mut step = None;
            let mut damping = 0.0;
            for _ in 0..8 {
                let mut h = hess.clone();
                if damping > 0.0 {
                    for i in 0..dim {
                        h[(i, i)] += damping;
                    }
                }
                if let Some(ch) = Cholesky::new(h) {
                    step = Some(ch.solve(&(-&grad)));
                    break;
                }
                damping = if damping == 0.0 { 1e-8 } else { damping * 100.0 };
            }
            let step = step?;
            let decrement = -grad.dot(&step);
            if decrement <= 1e-12 * (1.0 + value.abs()) {
                break;
            }
            // backtracking line search staying in the domain
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let cand = &theta + &step * alpha;
                if let Some(v) = obj.value(&cand) {
                    if v <= value - 0.25 * alpha * decrement {
                        theta = cand;
                        value = v;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        t *= 20.0;
    }

    let (shape, center) = unpack(&theta, &basis, n);
    Cholesky::new(shape.clone())?;
    Some(MvieResult {
        shape,
        center,
        gradient_norm: last_grad_norm,
        newton_iterations: total_newton,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_gives_axis_aligned_ellipsoid() {
        // box [-1, 2] × [-0.5, 0.5]: semi-axes (1.5, 0.5), center (0.5, 0)
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
        let b = DVector::from_vec(vec![2.0, 1.0, 0.5, 0.5]);
        let res = max_volume_ellipsoid(&a, &b, &DVector::from_vec(vec![0.4, 0.0]), 0.2).unwrap();
        assert!((res.center[0] - 0.5).abs() < 1e-6, "center {}", res.center);
        assert!(res.center[1].abs() < 1e-6);
        assert!((res.shape[(0, 0)] - 1.5).abs() < 1e-5, "shape {}", res.shape);
        assert!((res.shape[(1, 1)] - 0.5).abs() < 1e-5);
        assert!(res.shape[(0, 1)].abs() < 1e-5);
    }

    #[test]
    fn simplex_ellipsoid_stays_inside() {
        // triangle x ≥ 0, y ≥ 0, x + y ≤ 1
        let s = (0.5f64).sqrt();
        let a = DMatrix::from_row_slice(3, 2, &[-1.0, 0.0, 0.0, -1.0, s, s]);
        let b = DVector::from_vec(vec![0.0, 0.0, s]);
        let res = max_volume_ellipsoid(&a, &b, &DVector::from_vec(vec![0.25, 0.25]), 0.1).unwrap();
        // inscribed ellipsoid constraint: ‖B aᵢ‖ + aᵢᵀ d ≤ bᵢ
        for i in 0..3 {
            let ai = a.row(i).transpose();
            let lhs = (&res.shape * &ai).norm() + ai.dot(&res.center);
            assert!(lhs <= b[i] + 1e-7, "row {i}: {lhs} vs {}", b[i]);
        }
        // for the unit simplex the inscribed circle has radius (2−√2)/2·(1/(1+√2))…
        // just check the ellipsoid is non-trivial
        assert!(res.shape.determinant() > 1e-4);
    }

    #[test]
    fn three_dimensional_box() {
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for k in 0..3 {
            for s in [1.0f64, -1.0] {
                let mut r = [0.0; 3];
                r[k] = s;
                rows.extend_from_slice(&r);
                rhs.push(if s > 0.0 { 1.0 + k as f64 } else { 1.0 + k as f64 });
            }
        }
        let a = DMatrix::from_row_slice(6, 3, &rows);
        let b = DVector::from_vec(rhs);
        let res = max_volume_ellipsoid(&a, &b, &DVector::zeros(3), 0.5).unwrap();
        for k in 0..3 {
            assert!((res.shape[(k, k)] - (1.0 + k as f64)).abs() < 1e-5);
        }
        assert!(res.center.norm() < 1e-6);
    }
}
