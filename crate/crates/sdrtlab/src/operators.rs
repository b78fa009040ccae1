//! Per-(element, degree, scheme) operator sets: interpolation to flux points,
//! divergence of the interior flux degrees of freedom, and the external
//! (common-flux) divergence or correction tables, plus the shared gradient
//! machinery.
//!
//! SDRT populates the tables from the RT nodal basis divergence; the FR
//! schemes use the solution-basis gradient for the discontinuous part and a
//! correction table for the interface contribution (the same correction is
//! applied to gradients). Every interior flux degree of freedom carries a
//! canonical axis normal, so normal-flux extraction reduces to picking one
//! flux component per dof.

use nalgebra::DMatrix;

use crate::basis::{build_rt_basis, build_solution_basis, correction_divergence, SolutionBasis};
use crate::error::Error;
use crate::refelem::ReferenceElement;
use crate::Scheme;

/// Interior flux degree of freedom: unique point index plus axis.
#[derive(Debug, Clone, Copy)]
pub struct IntDof {
    pub unique: u32,
    pub axis: u8,
}

#[derive(Debug)]
pub struct OperatorSet {
    pub scheme: Scheme,
    pub dim: usize,
    pub n_sol: usize,
    pub n_ext: usize,
    /// Number of unique interior flux evaluation points (solution points for
    /// the FR schemes).
    pub n_int_unique: usize,
    pub int_dofs: Vec<IntDof>,
    /// External interpolation: [n_ext, n_sol].
    pub m0: DMatrix<f64>,
    /// Unique-interior interpolation: [n_int_unique, n_sol]; identity for FR.
    pub m12: Option<DMatrix<f64>>,
    /// Per-axis interior divergence tables: [n_sol, n_int_unique]. Column u
    /// of table d acts on the d-th transformed flux component at unique
    /// interior point u (zero column when that point has no d-dof).
    pub int_div: Vec<DMatrix<f64>>,
    /// External divergence (SDRT) or correction (FR) table: [n_sol, n_ext].
    pub m14: DMatrix<f64>,
    /// Per-axis external gradient tables: m14 weighted by the reference
    /// normal components: [n_sol, n_ext].
    pub ext_grad: Vec<DMatrix<f64>>,
    /// FR schemes feed (common - own) jumps to m14/ext_grad; SDRT feeds the
    /// common values directly.
    pub ext_is_jump: bool,
    /// Solution basis kept for interpolation to arbitrary points.
    pub basis: SolutionBasis,
    /// Condition numbers for the build report: (solution, flux) Vandermonde.
    pub cond_solution: f64,
    pub cond_flux: f64,
    pub warnings: Vec<String>,
}

/// Assemble the operator set for a scheme on a reference element.
pub fn assemble(re: &ReferenceElement, scheme: Scheme) -> Result<OperatorSet, Error> {
    let dim = re.dim();
    let n_sol = re.counts.n_sol;
    let n_ext = re.counts.n_ext;
    let basis = build_solution_basis(re)?;
    let rt = build_rt_basis(re)?;
    let mut warnings = Vec::new();
    if let Some(w) = &rt.warning {
        warnings.push(w.clone());
    }

    let ext_pts: Vec<Vec<f64>> = re.ext_fpts.iter().map(|f| f.coords.clone()).collect();
    let m0 = basis.interp_matrix(&ext_pts);

    let set = match scheme {
        Scheme::Sdrt => {
            let m12 = basis.interp_matrix(&re.int_unique);
            // Full nodal divergence table over ext + int flux points.
            let full = rt.nodal_div_matrix(&re.sol_pts);
            let m14 = full.columns(0, n_ext).clone_owned();
            let n_u = re.counts.n_int_unique;
            let mut int_div = vec![DMatrix::zeros(n_sol, n_u); dim];
            let mut int_dofs = Vec::with_capacity(re.int_fpts.len());
            for (i, fp) in re.int_fpts.iter().enumerate() {
                let axis = fp
                    .normal
                    .iter()
                    .position(|&v| (v - 1.0).abs() < 1e-12)
                    .expect("interior dof normal must be a canonical axis");
                let uq = re.unique_int_map[i];
                int_dofs.push(IntDof {
                    unique: uq as u32,
                    axis: axis as u8,
                });
                for s in 0..n_sol {
                    int_div[axis][(s, uq)] = full[(s, n_ext + i)];
                }
            }
            let mut ext_grad = vec![DMatrix::zeros(n_sol, n_ext); dim];
            for (g, grad_d) in ext_grad.iter_mut().enumerate() {
                for (r, fp) in re.ext_fpts.iter().enumerate() {
                    for s in 0..n_sol {
                        grad_d[(s, r)] = fp.normal[g] * m14[(s, r)];
                    }
                }
            }
            OperatorSet {
                scheme,
                dim,
                n_sol,
                n_ext,
                n_int_unique: n_u,
                int_dofs,
                m0,
                m12: Some(m12),
                int_div,
                m14,
                ext_grad,
                ext_is_jump: false,
                cond_solution: basis.condition,
                cond_flux: rt.condition,
                basis,
                warnings,
            }
        }
        Scheme::FrDg | Scheme::FrSdrt => {
            let corr = correction_divergence(re, &basis, &rt, scheme)?;
            // Interior dofs: all flux components at the solution points; the
            // divergence tables are the nodal derivative matrices.
            let grads = basis.grad_matrices(&re.sol_pts, dim);
            let mut int_dofs = Vec::with_capacity(n_sol * dim);
            for s in 0..n_sol {
                for d in 0..dim {
                    int_dofs.push(IntDof {
                        unique: s as u32,
                        axis: d as u8,
                    });
                }
            }
            let m14 = corr.div_at_sol;
            let mut ext_grad = vec![DMatrix::zeros(n_sol, n_ext); dim];
            for (g, grad_d) in ext_grad.iter_mut().enumerate() {
                for (r, fp) in re.ext_fpts.iter().enumerate() {
                    for s in 0..n_sol {
                        grad_d[(s, r)] = fp.normal[g] * m14[(s, r)];
                    }
                }
            }
            OperatorSet {
                scheme,
                dim,
                n_sol,
                n_ext,
                n_int_unique: n_sol,
                int_dofs,
                m0,
                m12: None,
                int_div: grads,
                m14,
                ext_grad,
                ext_is_jump: true,
                cond_solution: basis.condition,
                cond_flux: rt.condition,
                basis,
                warnings,
            }
        }
    };
    Ok(set)
}

impl OperatorSet {
    /// Interpolate solution-point data to external flux points.
    pub fn interp_ext(&self, u: &DMatrix<f64>, out: &mut DMatrix<f64>) {
        out.gemm(1.0, &self.m0, u, 0.0);
    }

    /// Interpolate solution-point data to the unique interior points.
    pub fn interp_int(&self, u: &DMatrix<f64>, out: &mut DMatrix<f64>) {
        match &self.m12 {
            Some(m12) => out.gemm(1.0, m12, u, 0.0),
            None => out.copy_from(u),
        }
    }

    /// Transformed divergence at solution points from the d-indexed interior
    /// transformed flux components and the external inputs (common fluxes for
    /// SDRT, common-minus-own jumps for FR).
    pub fn divergence(
        &self,
        flux_axis: &[DMatrix<f64>],
        ext: &DMatrix<f64>,
        out: &mut DMatrix<f64>,
    ) {
        out.gemm(1.0, &self.m14, ext, 0.0);
        for d in 0..self.dim {
            out.gemm(1.0, &self.int_div[d], &flux_axis[d], 1.0);
        }
    }

    /// Transformed gradient components at solution points. `u_int` holds the
    /// scalar state at unique interior points; `ext` the common values
    /// (SDRT) or jumps (FR) at external flux points.
    pub fn gradient(&self, u_int: &DMatrix<f64>, ext: &DMatrix<f64>, out: &mut [DMatrix<f64>]) {
        for d in 0..self.dim {
            out[d].gemm(1.0, &self.ext_grad[d], ext, 0.0);
            out[d].gemm(1.0, &self.int_div[d], u_int, 1.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refelem::{build_reference, ElementKind};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dimensions_quad_p2() {
        let re = build_reference(ElementKind::Quad, 2).unwrap();
        let ops = assemble(&re, Scheme::Sdrt).unwrap();
        assert_eq!(ops.m0.nrows(), 12);
        assert_eq!(ops.m0.ncols(), 9);
        assert_eq!(ops.m14.nrows(), 9);
        assert_eq!(ops.m14.ncols(), 12);
        assert_eq!(ops.int_dofs.len(), 12);
        assert_eq!(ops.n_int_unique, 12);
    }

    #[test]
    fn interpolation_reproduces_constants() {
        for kind in ElementKind::all() {
            let re = build_reference(kind, 2).unwrap();
            for scheme in [Scheme::Sdrt, Scheme::FrDg] {
                let ops = assemble(&re, scheme).unwrap();
                let u = DMatrix::from_element(ops.n_sol, 1, 1.0);
                let mut ext = DMatrix::zeros(ops.n_ext, 1);
                ops.interp_ext(&u, &mut ext);
                for v in ext.iter() {
                    assert!((v - 1.0).abs() < 1e-12, "{kind:?} {scheme:?}");
                }
                let mut int = DMatrix::zeros(ops.n_int_unique, 1);
                ops.interp_int(&u, &mut int);
                for v in int.iter() {
                    assert!((v - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    /// Exercise the full reference-space pipeline for a random linear
    /// transformed flux: SDRT and FR-SDRT residuals must agree, and both must
    /// reproduce the analytic transformed divergence (polynomial exactness).
    #[test]
    fn linear_flux_divergence_and_equivalence() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for kind in ElementKind::all() {
            for p in [1usize, 3] {
                let re = build_reference(kind, p).unwrap();
                let dim = kind.dim();
                let sdrt = assemble(&re, Scheme::Sdrt).unwrap();
                let frsdrt = assemble(&re, Scheme::FrSdrt).unwrap();

                // Random affine vector flux f_d(x) = a_d + B_d . x.
                let a: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
                let b: Vec<Vec<f64>> = (0..dim)
                    .map(|_| (0..dim).map(|_| rng.random::<f64>() - 0.5).collect())
                    .collect();
                let flux = |x: &[f64], d: usize| -> f64 {
                    a[d] + (0..dim).map(|k| b[d][k] * x[k]).sum::<f64>()
                };
                let div_exact: f64 = (0..dim).map(|d| b[d][d]).sum();

                // SDRT: interior normal fluxes at unique points per axis,
                // common ext values = own trace (single element, exact data).
                let mut fax = vec![DMatrix::zeros(sdrt.n_int_unique, 1); dim];
                for (d, f) in fax.iter_mut().enumerate() {
                    for (u, x) in re.int_unique.iter().enumerate() {
                        f[(u, 0)] = flux(x, d);
                    }
                }
                let mut ext = DMatrix::zeros(sdrt.n_ext, 1);
                for (r, fp) in re.ext_fpts.iter().enumerate() {
                    let mut v = 0.0;
                    for d in 0..dim {
                        v += flux(&fp.coords, d) * fp.normal[d];
                    }
                    ext[(r, 0)] = v;
                }
                let mut r_sdrt = DMatrix::zeros(sdrt.n_sol, 1);
                sdrt.divergence(&fax, &ext, &mut r_sdrt);

                // FR-SDRT: interior data at solution points, jump = 0.
                let mut fax_fr = vec![DMatrix::zeros(frsdrt.n_int_unique, 1); dim];
                for (d, f) in fax_fr.iter_mut().enumerate() {
                    for (s, x) in re.sol_pts.iter().enumerate() {
                        f[(s, 0)] = flux(x, d);
                    }
                }
                let jump = DMatrix::zeros(frsdrt.n_ext, 1);
                let mut r_fr = DMatrix::zeros(frsdrt.n_sol, 1);
                frsdrt.divergence(&fax_fr, &jump, &mut r_fr);

                for s in 0..sdrt.n_sol {
                    assert!(
                        (r_sdrt[(s, 0)] - div_exact).abs() < 1e-11,
                        "{kind:?} p={p} SDRT divergence {} vs {div_exact}",
                        r_sdrt[(s, 0)]
                    );
                    assert!(
                        (r_sdrt[(s, 0)] - r_fr[(s, 0)]).abs() < 1e-11,
                        "{kind:?} p={p}: SDRT vs FR-SDRT disagree"
                    );
                }
            }
        }
    }

    /// Gradient operators recover the exact gradient of degree-p data when
    /// the external values are the own traces.
    #[test]
    fn gradient_exact_for_polynomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for kind in ElementKind::all() {
            let p = 2;
            let re = build_reference(kind, p).unwrap();
            let dim = kind.dim();
            for scheme in [Scheme::Sdrt, Scheme::FrDg, Scheme::FrSdrt] {
                let ops = assemble(&re, scheme).unwrap();
                // Random linear scalar field (exact for any p >= 1).
                let a: f64 = rng.random::<f64>() - 0.5;
                let g: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
                let field = |x: &[f64]| a + (0..dim).map(|k| g[k] * x[k]).sum::<f64>();

                let mut u_int = DMatrix::zeros(ops.n_int_unique, 1);
                if ops.m12.is_some() {
                    for (u, x) in re.int_unique.iter().enumerate() {
                        u_int[(u, 0)] = field(x);
                    }
                } else {
                    for (s, x) in re.sol_pts.iter().enumerate() {
                        u_int[(s, 0)] = field(x);
                    }
                }
                let mut ext = DMatrix::zeros(ops.n_ext, 1);
                if !ops.ext_is_jump {
                    for (r, fp) in re.ext_fpts.iter().enumerate() {
                        ext[(r, 0)] = field(&fp.coords);
                    }
                }
                let mut q = vec![DMatrix::zeros(ops.n_sol, 1); dim];
                ops.gradient(&u_int, &ext, &mut q);
                for d in 0..dim {
                    for s in 0..ops.n_sol {
                        assert!(
                            (q[d][(s, 0)] - g[d]).abs() < 1e-11,
                            "{kind:?} {scheme:?} grad[{d}] = {} vs {}",
                            q[d][(s, 0)],
                            g[d]
                        );
                    }
                }
            }
        }
    }

    /// Constant state: zero gradient and zero divergence for zero flux.
    #[test]
    fn zero_paths() {
        let re = build_reference(ElementKind::Tet, 2).unwrap();
        let ops = assemble(&re, Scheme::Sdrt).unwrap();
        let fax = vec![DMatrix::zeros(ops.n_int_unique, 2); 3];
        let ext = DMatrix::zeros(ops.n_ext, 2);
        let mut out = DMatrix::zeros(ops.n_sol, 2);
        ops.divergence(&fax, &ext, &mut out);
        assert!(out.amax() < 1e-14);
    }
}
