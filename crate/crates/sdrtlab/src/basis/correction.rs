//! Correction-divergence tables for the FR schemes.
//!
//! FR-SDRT uses the divergence of the external-point RT nodal functions.
//! FR-DG uses the weak-form lifting operator of the nodal DG scheme: the
//! column for external point nu on face F is
//!     div g_nu (x) = sum_m psi_m(x) * Int_F psi_m l_nu dS
//! with the face integrals evaluated by exact quadrature (the orthonormal
//! modal basis makes the mass matrix the identity).

use nalgebra::DMatrix;

use super::rt::RTBasis;
use super::SolutionBasis;
use crate::error::Error;
use crate::linalg::inverse_with_cond;
use crate::refelem::cubature::{tensor_rule, tri_rule};
use crate::refelem::gauss_legendre;
use crate::refelem::{Face, ReferenceElement};
use crate::Scheme;

/// Correction-divergence table: columns are external flux points, rows are
/// solution points.
#[derive(Debug, Clone)]
pub struct CorrectionTable {
    pub scheme: Scheme,
    pub div_at_sol: DMatrix<f64>,
}

pub fn correction_divergence(
    re: &ReferenceElement,
    sol: &SolutionBasis,
    rt: &RTBasis,
    scheme: Scheme,
) -> Result<CorrectionTable, Error> {
    match scheme {
        Scheme::FrSdrt => {
            let full = rt.nodal_div_matrix(&re.sol_pts);
            let div_at_sol = full.columns(0, re.counts.n_ext).clone_owned();
            Ok(CorrectionTable { scheme, div_at_sol })
        }
        Scheme::FrDg => {
            let n_sol = re.counts.n_sol;
            let n_ext = re.counts.n_ext;
            let mut div_at_sol = DMatrix::zeros(n_sol, n_ext);
            // psi at solution points.
            let psi_sol: Vec<Vec<f64>> = re.sol_pts.iter().map(|x| sol.modal.eval(x)).collect();
            for face in &re.faces {
                let lift = face_lift(re, sol, face)?;
                for (local, nu) in (face.fpt_begin..face.fpt_end).enumerate() {
                    for s in 0..n_sol {
                        let mut v = 0.0;
                        for m in 0..sol.modal.len() {
                            v += psi_sol[s][m] * lift[(m, local)];
                        }
                        div_at_sol[(s, nu)] = v;
                    }
                }
            }
            Ok(CorrectionTable { scheme, div_at_sol })
        }
        Scheme::Sdrt => Err(Error::Config(
            "correction tables exist only for the FR schemes".into(),
        )),
    }
}

/// Face lifting matrix: lift[(m, local)] = Int_F psi_m l_local dS in
/// reference coordinates.
fn face_lift(
    re: &ReferenceElement,
    sol: &SolutionBasis,
    face: &Face,
) -> Result<DMatrix<f64>, Error> {
    let p = re.degree;
    let dim = re.dim();
    let n_face_pts = face.fpt_end - face.fpt_begin;

    // Parameterize the face, collect the face points in parameter space.
    let param_of = |x: &[f64]| -> Vec<f64> { face_param(face, x, dim) };
    let fpts_param: Vec<Vec<f64>> = (face.fpt_begin..face.fpt_end)
        .map(|i| param_of(&re.ext_fpts[i].coords))
        .collect();

    // Face modal basis, Vandermonde and cubature in parameter space.
    let (modal_dim, eval_modal): (usize, Box<dyn Fn(&[f64]) -> Vec<f64>>) = if dim == 2 {
        let n = p + 1;
        (
            n,
            Box::new(move |t: &[f64]| (0..n).map(|k| super::jacobi::legendre(k, t[0])).collect()),
        )
    } else if face.is_tri {
        let tri = super::modal::ModalBasis::new(crate::refelem::ElementKind::Tri, p);
        (tri.len(), Box::new(move |t: &[f64]| tri.eval(t)))
    } else {
        let n = p + 1;
        (
            n * n,
            Box::new(move |t: &[f64]| {
                let mut out = Vec::with_capacity(n * n);
                for j in 0..n {
                    for i in 0..n {
                        out.push(
                            super::jacobi::legendre(i, t[0]) * super::jacobi::legendre(j, t[1]),
                        );
                    }
                }
                out
            }),
        )
    };
    assert_eq!(modal_dim, n_face_pts, "face point count vs face modal size");

    let mut vf = DMatrix::zeros(modal_dim, n_face_pts);
    for (s, t) in fpts_param.iter().enumerate() {
        let vals = eval_modal(t);
        for (m, v) in vals.iter().enumerate() {
            vf[(m, s)] = *v;
        }
    }
    let (vf_inv, _) = inverse_with_cond(&vf)?;

    // Cubature in parameter space with the area scale of the affine face map.
    let (qpts, qwts): (Vec<Vec<f64>>, Vec<f64>) = if dim == 2 {
        let (x, w) = gauss_legendre(p + 2)?;
        (x.into_iter().map(|t| vec![t]).collect(), w)
    } else if face.is_tri {
        let r = tri_rule(2 * p + 2)?;
        (r.points, r.weights)
    } else {
        let r = tensor_rule(2, 2 * p + 2)?;
        (r.points, r.weights)
    };
    let scale = face_area_scale(face, dim);

    let n_modes = sol.modal.len();
    let mut lift = DMatrix::zeros(n_modes, n_face_pts);
    for (q, t) in qpts.iter().enumerate() {
        let x = face_unparam(face, t, dim);
        let psi = sol.modal.eval(&x);
        let face_modal = eval_modal(t);
        // l_local(t_q) = sum_m vf_inv[(local, m)] face_modal[m]
        for local in 0..n_face_pts {
            let mut lv = 0.0;
            for m in 0..modal_dim {
                lv += vf_inv[(local, m)] * face_modal[m];
            }
            let wq = qwts[q] * scale * lv;
            for m in 0..n_modes {
                lift[(m, local)] += wq * psi[m];
            }
        }
    }
    Ok(lift)
}

/// Parameter coordinates of a point on a face.
fn face_param(face: &Face, x: &[f64], dim: usize) -> Vec<f64> {
    if dim == 2 {
        let a = &face.vertices[0];
        let b = &face.vertices[1];
        let len2: f64 = (0..2).map(|d| (b[d] - a[d]).powi(2)).sum();
        let t: f64 = (0..2).map(|d| (x[d] - a[d]) * (b[d] - a[d])).sum::<f64>() / len2;
        vec![2.0 * t - 1.0]
    } else if face.is_tri {
        // x = A + (r+1)/2 (B-A) + (s+1)/2 (C-A)
        let a = &face.vertices[0];
        let b = &face.vertices[1];
        let c = &face.vertices[2];
        let eb: Vec<f64> = (0..3).map(|d| (b[d] - a[d]) / 2.0).collect();
        let ec: Vec<f64> = (0..3).map(|d| (c[d] - a[d]) / 2.0).collect();
        let dx: Vec<f64> = (0..3).map(|d| x[d] - a[d]).collect();
        // Least squares through the normal equations of [eb ec].
        let m00: f64 = eb.iter().map(|v| v * v).sum();
        let m01: f64 = eb.iter().zip(&ec).map(|(u, v)| u * v).sum();
        let m11: f64 = ec.iter().map(|v| v * v).sum();
        let r0: f64 = eb.iter().zip(&dx).map(|(u, v)| u * v).sum();
        let r1: f64 = ec.iter().zip(&dx).map(|(u, v)| u * v).sum();
        let det = m00 * m11 - m01 * m01;
        let u = (m11 * r0 - m01 * r1) / det;
        let v = (m00 * r1 - m01 * r0) / det;
        vec![u - 1.0, v - 1.0]
    } else {
        // Quad face with vertices ordered around the perimeter.
        let a = &face.vertices[0];
        let b = &face.vertices[1];
        let d = &face.vertices[3];
        let ea: Vec<f64> = (0..3).map(|k| (b[k] - a[k]) / 2.0).collect();
        let eb: Vec<f64> = (0..3).map(|k| (d[k] - a[k]) / 2.0).collect();
        let center: Vec<f64> = (0..3).map(|k| (a[k] + face.vertices[2][k]) / 2.0).collect();
        let dx: Vec<f64> = (0..3).map(|k| x[k] - center[k]).collect();
        let la: f64 = ea.iter().map(|v| v * v).sum();
        let lb: f64 = eb.iter().map(|v| v * v).sum();
        let s: f64 = ea.iter().zip(&dx).map(|(u, v)| u * v).sum::<f64>() / la;
        let t: f64 = eb.iter().zip(&dx).map(|(u, v)| u * v).sum::<f64>() / lb;
        vec![s, t]
    }
}

/// Reference coordinates of a parameter point on a face.
fn face_unparam(face: &Face, t: &[f64], dim: usize) -> Vec<f64> {
    if dim == 2 {
        let a = &face.vertices[0];
        let b = &face.vertices[1];
        (0..2)
            .map(|d| a[d] + (t[0] + 1.0) / 2.0 * (b[d] - a[d]))
            .collect()
    } else if face.is_tri {
        let a = &face.vertices[0];
        let b = &face.vertices[1];
        let c = &face.vertices[2];
        (0..3)
            .map(|d| a[d] + (t[0] + 1.0) / 2.0 * (b[d] - a[d]) + (t[1] + 1.0) / 2.0 * (c[d] - a[d]))
            .collect()
    } else {
        let a = &face.vertices[0];
        let b = &face.vertices[1];
        let d = &face.vertices[3];
        let center: Vec<f64> = (0..3).map(|k| (a[k] + face.vertices[2][k]) / 2.0).collect();
        (0..3)
            .map(|k| center[k] + t[0] * (b[k] - a[k]) / 2.0 + t[1] * (d[k] - a[k]) / 2.0)
            .collect()
    }
}

/// Area element of the affine face parameterization.
fn face_area_scale(face: &Face, dim: usize) -> f64 {
    if dim == 2 {
        let a = &face.vertices[0];
        let b = &face.vertices[1];
        ((0..2).map(|d| (b[d] - a[d]).powi(2)).sum::<f64>()).sqrt() / 2.0
    } else {
        let a = &face.vertices[0];
        let b = &face.vertices[1];
        let c = if face.is_tri {
            &face.vertices[2]
        } else {
            &face.vertices[3]
        };
        let u: Vec<f64> = (0..3).map(|d| (b[d] - a[d]) / 2.0).collect();
        let v: Vec<f64> = (0..3).map(|d| (c[d] - a[d]) / 2.0).collect();
        let cx = u[1] * v[2] - u[2] * v[1];
        let cy = u[2] * v[0] - u[0] * v[2];
        let cz = u[0] * v[1] - u[1] * v[0];
        (cx * cx + cy * cy + cz * cz).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_rt_basis, build_solution_basis};
    use crate::refelem::{build_reference, ElementKind};

    /// Both schemes: glue the table onto the normal fluxes of a linear flux
    /// field; together with the discontinuous part the divergence of a
    /// constant flux must vanish. Here we check the weaker row-sum identity:
    /// applying the table to the interpolated own normal fluxes of a constant
    /// field must reproduce what the discontinuous path removes, i.e. the
    /// columns must sum against constant normal fluxes to zero divergence.
    #[test]
    fn constant_flux_consistency() {
        for kind in ElementKind::all() {
            for scheme in [Scheme::FrDg, Scheme::FrSdrt] {
                let p = 2;
                let re = build_reference(kind, p).unwrap();
                let sol = build_solution_basis(&re).unwrap();
                let rt = build_rt_basis(&re).unwrap();
                let tab = correction_divergence(&re, &sol, &rt, scheme).unwrap();
                let dim = kind.dim();
                // Constant vector flux f = e_0; jump inputs are
                // (f . n) at external points. The discontinuous divergence
                // is zero, so applying the correction table to (f.n - f.n)=0
                // is trivial; instead check the table against the full FR
                // divergence of the constant flux: grad(l) part is zero and
                // correction input (F_common - f.n) with F_common = f.n is
                // zero. The meaningful identity: table applied to f.n values
                // equals the divergence of the RT interpolant of f, which is
                // zero for FR-SDRT columns summed with interior
                // contributions. For FR-DG, lifting of the exact boundary
                // trace of a divergence-free field integrates to zero against
                // constants. Check: sum_s w_s? Simpler: the lifted column
                // combination with f.n weights must have zero mean.
                let mut mean = 0.0;
                let rule = crate::refelem::cubature::volume_rule(kind, 2 * p + 2).unwrap();
                let interp = sol.interp_matrix(&rule.points);
                for (q, w) in rule.weights.iter().enumerate() {
                    let mut val = 0.0;
                    for nu in 0..re.counts.n_ext {
                        let fdotn = re.ext_fpts[nu].normal[0];
                        let mut corr_q = 0.0;
                        for s in 0..re.counts.n_sol {
                            corr_q += interp[(q, s)] * tab.div_at_sol[(s, nu)];
                        }
                        val += fdotn * corr_q;
                    }
                    mean += w * val;
                    let _ = dim;
                }
                // Int div = boundary integral of f.n = 0 for constant f on a
                // closed reference boundary.
                assert!(
                    mean.abs() < 1e-11,
                    "{kind:?} {scheme:?}: lifted constant-flux mean {mean}"
                );
            }
        }
    }

    /// FR-DG on the quad: the 1D factor of the correction divergence at Gauss
    /// points must match the right/left Radau polynomial derivative.
    #[test]
    fn frdg_quad_matches_radau_derivative() {
        let p = 2;
        let re = build_reference(ElementKind::Quad, p).unwrap();
        let sol = build_solution_basis(&re).unwrap();
        let rt = build_rt_basis(&re).unwrap();
        let tab = correction_divergence(&re, &sol, &rt, Scheme::FrDg).unwrap();
        // 1D lifting at Gauss points: g_L'(x) = sum_k P~_k(x) P~_k(-1)
        // which equals the derivative of the left Radau polynomial
        // R(x) = (-1)^p (P_{p+1} - P_p)/2.
        let (gl, _) = gauss_legendre(p + 1).unwrap();
        let radau_deriv = |x: f64| -> f64 {
            // Unnormalized Legendre from the orthonormal one.
            let leg = |n: usize, x: f64| {
                super::super::jacobi::legendre(n, x) / ((2 * n + 1) as f64 / 2.0).sqrt()
            };
            let h = 1e-7;
            let r =
                |x: f64| (if p % 2 == 0 { 1.0 } else { -1.0 }) * (leg(p + 1, x) - leg(p, x)) / 2.0;
            (r(x + h) - r(x - h)) / (2.0 * h)
        };
        // Face 3 is x = -1. The lifting is separable: the column of face
        // point nu equals dRadau(x_s) when the solution point shares nu's y
        // coordinate and vanishes otherwise (face points sit at the same
        // Gauss y-lines as the solution points).
        let face = &re.faces[3];
        for nu in face.fpt_begin..face.fpt_end {
            let ynu = re.ext_fpts[nu].coords[1];
            for (s, xs) in re.sol_pts.iter().enumerate() {
                let got = tab.div_at_sol[(s, nu)];
                let expect = if (xs[1] - ynu).abs() < 1e-12 {
                    radau_deriv(xs[0])
                } else {
                    0.0
                };
                assert!(
                    (got - expect).abs() < 1e-5 * (1.0 + expect.abs()),
                    "nu={nu} s={s}: {got} vs {expect}"
                );
            }
        }
        let _ = gl;
    }

    /// FR-SDRT and FR-DG must be distinct schemes on simplexes.
    #[test]
    fn tables_differ_on_simplexes() {
        for kind in [ElementKind::Tri, ElementKind::Tet] {
            let re = build_reference(kind, 2).unwrap();
            let sol = build_solution_basis(&re).unwrap();
            let rt = build_rt_basis(&re).unwrap();
            let a = correction_divergence(&re, &sol, &rt, Scheme::FrDg).unwrap();
            let b = correction_divergence(&re, &sol, &rt, Scheme::FrSdrt).unwrap();
            let dist = (&a.div_at_sol - &b.div_at_sol).norm();
            assert!(dist > 1e-6, "{kind:?}: tables coincide, dist = {dist:e}");
        }
    }
}
