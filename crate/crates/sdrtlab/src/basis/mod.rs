//! Solution and Raviart-Thomas flux bases with their Vandermonde matrices,
//! plus the correction-divergence tables used by the FR schemes.

pub mod correction;
pub mod jacobi;
pub mod modal;
pub mod rt;

pub use correction::{correction_divergence, CorrectionTable};
pub use modal::ModalBasis;
pub use rt::{build_rt_basis, RTBasis};

use nalgebra::DMatrix;

use crate::error::Error;
use crate::linalg::inverse_with_cond;
use crate::refelem::ReferenceElement;

/// Solution basis: orthonormal modal basis plus the nodal link through the
/// Vandermonde matrix at the solution points.
#[derive(Debug, Clone)]
pub struct SolutionBasis {
    pub modal: ModalBasis,
    /// V[m, s] = psi_m(x_s).
    pub vandermonde: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    pub condition: f64,
}

impl SolutionBasis {
    /// Nodal basis values at a point: l_r(x) for all r.
    pub fn nodal_eval(&self, x: &[f64]) -> Vec<f64> {
        let psi = self.modal.eval(x);
        let n = self.inverse.nrows();
        (0..n)
            .map(|r| (0..n).map(|m| self.inverse[(r, m)] * psi[m]).sum())
            .collect()
    }

    /// Interpolation matrix from solution points to arbitrary points:
    /// out[q, r] = l_r(x_q).
    pub fn interp_matrix(&self, pts: &[Vec<f64>]) -> DMatrix<f64> {
        let n = self.inverse.nrows();
        let mut m = DMatrix::zeros(pts.len(), n);
        for (q, x) in pts.iter().enumerate() {
            let l = self.nodal_eval(x);
            for r in 0..n {
                m[(q, r)] = l[r];
            }
        }
        m
    }

    /// Gradient matrices: out[d][q, r] = d l_r / d x_d at x_q.
    pub fn grad_matrices(&self, pts: &[Vec<f64>], dim: usize) -> Vec<DMatrix<f64>> {
        let n = self.inverse.nrows();
        let mut out = vec![DMatrix::zeros(pts.len(), n); dim];
        for (q, x) in pts.iter().enumerate() {
            let g = self.modal.grad(x);
            for r in 0..n {
                for d in 0..dim {
                    let mut s = 0.0;
                    for m in 0..n {
                        s += self.inverse[(r, m)] * g[m][d];
                    }
                    out[d][(q, r)] = s;
                }
            }
        }
        out
    }
}

/// Build the solution basis for a reference element.
pub fn build_solution_basis(re: &ReferenceElement) -> Result<SolutionBasis, Error> {
    let modal = ModalBasis::new(re.kind, re.degree);
    assert_eq!(modal.len(), re.counts.n_sol);
    let n = modal.len();
    let mut v = DMatrix::zeros(n, n);
    for (s, x) in re.sol_pts.iter().enumerate() {
        let vals = modal.eval(x);
        for (m, val) in vals.iter().enumerate() {
            v[(m, s)] = *val;
        }
    }
    let (inverse, condition) = inverse_with_cond(&v)?;
    // With V[m, s] = psi_m(x_s), the nodal functions are
    // l_r(x) = sum_m (V^{-1})[r, m] psi_m(x), since (V^{-1} V)[r, s] = delta.
    Ok(SolutionBasis {
        modal,
        vandermonde: v,
        inverse,
        condition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refelem::{build_reference, ElementKind};

    #[test]
    fn nodal_property_all_elements() {
        for kind in ElementKind::all() {
            for p in 1..=3 {
                let re = build_reference(kind, p).unwrap();
                let sb = build_solution_basis(&re).unwrap();
                for (s, x) in re.sol_pts.iter().enumerate() {
                    let l = sb.nodal_eval(x);
                    for (r, lv) in l.iter().enumerate() {
                        let expect = if r == s { 1.0 } else { 0.0 };
                        assert!(
                            (lv - expect).abs() < 1e-12,
                            "{kind:?} p={p}: l_{r}(x_{s}) = {lv}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn reproduces_random_degree_p_polynomials() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for kind in ElementKind::all() {
            let p = 3;
            let dim = kind.dim();
            let re = build_reference(kind, p).unwrap();
            let sb = build_solution_basis(&re).unwrap();
            // Random polynomial as random modal coefficients.
            let coeffs: Vec<f64> = (0..sb.modal.len())
                .map(|_| rng.random::<f64>() - 0.5)
                .collect();
            let field = |x: &[f64]| -> f64 {
                sb.modal
                    .eval(x)
                    .iter()
                    .zip(&coeffs)
                    .map(|(v, c)| v * c)
                    .sum()
            };
            let nodal: Vec<f64> = re.sol_pts.iter().map(|x| field(x)).collect();
            // 50 random interior evaluation points.
            for _ in 0..50 {
                let x: Vec<f64> = match kind {
                    ElementKind::Quad | ElementKind::Hex => {
                        (0..dim).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()
                    }
                    _ => {
                        // Rejection-sample inside the simplex part.
                        loop {
                            let cand: Vec<f64> =
                                (0..dim).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
                            let sum2 = cand[0] + cand[1];
                            let ok = match kind {
                                ElementKind::Tri => sum2 <= 0.0,
                                ElementKind::Tet => cand.iter().sum::<f64>() <= -1.0,
                                ElementKind::Pri => sum2 <= 0.0,
                                _ => unreachable!(),
                            };
                            if ok {
                                break cand;
                            }
                        }
                    }
                };
                let l = sb.nodal_eval(&x);
                let interp: f64 = l.iter().zip(&nodal).map(|(a, b)| a * b).sum();
                let exact = field(&x);
                assert!(
                    (interp - exact).abs() < 1e-11 * (1.0 + exact.abs()),
                    "{kind:?}: {interp} vs {exact}"
                );
            }
        }
    }
}
