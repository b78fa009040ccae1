//! Method-of-lines driver: the residual pipeline (interpolate, exchange
//! common values, gradients, fluxes, divergence), explicit Runge-Kutta
//! integrators with an embedded-pair PI controller, and the buffers that make
//! the residual allocation-free in steady state.
//!
//! State layout: one matrix of shape [n_sol, n_cells * n_vars], column
//! cell * n_vars + var. Stacked gradient/flux buffers put axis d in rows
//! d * n_rows .. (d+1) * n_rows.

use nalgebra::{DMatrix, DMatrixViewMut};
use rayon::prelude::*;

use crate::error::Error;
use crate::mesh::{Mesh, Partner};
use crate::operators::{assemble, OperatorSet};
use crate::physics::{
    common_convective, common_value, common_viscous, convective_flux, viscous_flux, EquationSet,
};
use crate::refelem::{build_reference, ElementKind, ReferenceElement};
use crate::Scheme;

/// Everything fixed for one (mesh, scheme, equation) combination.
pub struct Discretization {
    pub re: ReferenceElement,
    pub ops: OperatorSet,
    pub mesh: Mesh,
    pub eq: EquationSet,
    pub scheme: Scheme,
    pub beta: f64,
    pub eta: f64,
    pub n_vars: usize,
    /// Far-field state used as the ghost value on boundary faces.
    pub farfield: Option<Vec<f64>>,
}

/// Solution state: nodal values and time.
#[derive(Clone)]
pub struct State {
    pub u: DMatrix<f64>,
    pub t: f64,
}

/// Preallocated residual buffers.
pub struct Workspace {
    u_ext: DMatrix<f64>,
    u_int: DMatrix<f64>,
    ext_in: DMatrix<f64>,
    q_tilde: DMatrix<f64>,
    /// Physical gradients at solution points, axis-stacked rows; valid after
    /// a viscous residual call or `compute_gradients`.
    pub q_phys: DMatrix<f64>,
    q_ext: DMatrix<f64>,
    q_int: DMatrix<f64>,
    fax: DMatrix<f64>,
    fext: DMatrix<f64>,
    rtilde: DMatrix<f64>,
    /// RK stage registers, allocated on demand by the integrators.
    pub stages: Vec<DMatrix<f64>>,
    pub accum: DMatrix<f64>,
    pub utmp: DMatrix<f64>,
    pub n_residual_evals: u64,
}

impl Discretization {
    pub fn new(
        kind: ElementKind,
        degree: usize,
        scheme: Scheme,
        n: usize,
        h: f64,
        periodic: [bool; 3],
        eq: EquationSet,
        beta: f64,
        eta: f64,
        farfield: Option<Vec<f64>>,
    ) -> Result<Self, Error> {
        let re = build_reference(kind, degree)?;
        let ops = assemble(&re, scheme)?;
        let mesh = crate::mesh::build_uniform(&re, n, h, periodic)?;
        let n_vars = eq.n_vars(kind.dim());
        Ok(Discretization {
            re,
            ops,
            mesh,
            eq,
            scheme,
            beta,
            eta,
            n_vars,
            farfield,
        })
    }

    pub fn n_cols(&self) -> usize {
        self.mesh.n_cells() * self.n_vars
    }

    pub fn workspace(&self) -> Workspace {
        let nc = self.n_cols();
        let dim = self.ops.dim;
        Workspace {
            u_ext: DMatrix::zeros(self.ops.n_ext, nc),
            u_int: DMatrix::zeros(self.ops.n_int_unique, nc),
            ext_in: DMatrix::zeros(self.ops.n_ext, nc),
            q_tilde: DMatrix::zeros(dim * self.ops.n_sol, nc),
            q_phys: DMatrix::zeros(dim * self.ops.n_sol, nc),
            q_ext: DMatrix::zeros(dim * self.ops.n_ext, nc),
            q_int: DMatrix::zeros(dim * self.ops.n_int_unique, nc),
            fax: DMatrix::zeros(dim * self.ops.n_int_unique, nc),
            fext: DMatrix::zeros(dim * self.ops.n_ext, nc),
            rtilde: DMatrix::zeros(self.ops.n_sol, nc),
            stages: Vec::new(),
            accum: DMatrix::zeros(self.ops.n_sol, nc),
            utmp: DMatrix::zeros(self.ops.n_sol, nc),
            n_residual_evals: 0,
        }
    }

    /// Initialize nodal state from a function of physical position.
    pub fn project(&self, f: impl Fn(&[f64; 3], usize) -> f64) -> State {
        let mut u = DMatrix::zeros(self.ops.n_sol, self.n_cols());
        for cell in 0..self.mesh.n_cells() {
            for s in 0..self.ops.n_sol {
                let x = self.mesh.sol_point(cell, s);
                for alpha in 0..self.n_vars {
                    u[(s, cell * self.n_vars + alpha)] = f(&x, alpha);
                }
            }
        }
        State { u, t: 0.0 }
    }

    /// du/dt = -J^{-1} (transformed divergence). Errors surface nonphysical
    /// states as divergence.
    pub fn residual(
        &self,
        u: &DMatrix<f64>,
        ws: &mut Workspace,
        out: &mut DMatrix<f64>,
    ) -> Result<(), Error> {
        ws.n_residual_evals += 1;
        let nv = self.n_vars;
        let dim = self.ops.dim;
        let n_sol = self.ops.n_sol;
        let n_ext = self.ops.n_ext;
        let n_iu = self.ops.n_int_unique;

        par_gemm(&self.ops.m0, u, &mut ws.u_ext);
        match &self.ops.m12 {
            Some(m12) => par_gemm(m12, u, &mut ws.u_int),
            None => ws.u_int.copy_from(u),
        }

        if self.eq.has_viscous() {
            // Common values at external points, canonical (left, right) order.
            self.exchange_values(&ws.u_ext, &mut ws.ext_in)?;
            if self.ops.ext_is_jump {
                ws.ext_in -= &ws.u_ext;
            }
            // Transformed gradients, then physical per cell.
            for d in 0..dim {
                let mut qrows = ws.q_tilde.rows_mut(d * n_sol, n_sol);
                qrows.gemm(1.0, &self.ops.ext_grad[d], &ws.ext_in, 0.0);
                qrows.gemm(1.0, &self.ops.int_div[d], &ws.u_int, 1.0);
            }
            self.transform_gradients(&ws.q_tilde, &mut ws.q_phys);
            for d in 0..dim {
                let src = ws.q_phys.rows(d * n_sol, n_sol).clone_owned();
                par_gemm_into(&self.ops.m0, &src, &mut ws.q_ext.rows_mut(d * n_ext, n_ext));
                match &self.ops.m12 {
                    Some(m12) => par_gemm_into(m12, &src, &mut ws.q_int.rows_mut(d * n_iu, n_iu)),
                    None => ws.q_int.rows_mut(d * n_iu, n_iu).copy_from(&src),
                }
            }
        }

        self.interior_fluxes(ws)?;
        if self.ops.ext_is_jump {
            for d in 0..dim {
                let src = ws.fax.rows(d * n_iu, n_iu).clone_owned();
                par_gemm_into(&self.ops.m0, &src, &mut ws.fext.rows_mut(d * n_ext, n_ext));
            }
        }
        self.common_fluxes(ws)?;

        ws.rtilde.gemm(1.0, &self.ops.m14, &ws.ext_in, 0.0);
        for d in 0..dim {
            let rows = ws.fax.rows(d * n_iu, n_iu).clone_owned();
            par_gemm_acc(&self.ops.int_div[d], &rows, &mut ws.rtilde);
        }

        // out = -J^{-1} rtilde.
        let n_sub = self.mesh.n_sub();
        let dets: Vec<f64> = (0..n_sub).map(|s| self.mesh.shapes[s].det).collect();
        out.copy_from(&ws.rtilde);
        let ncols = self.n_cols();
        let slice = out.as_mut_slice();
        slice
            .par_chunks_mut(n_sol * nv)
            .enumerate()
            .for_each(|(cell, chunk)| {
                let inv = -1.0 / dets[cell % n_sub];
                for v in chunk.iter_mut() {
                    *v *= inv;
                }
            });
        let _ = ncols;
        Ok(())
    }

    /// Run only the gradient half of the pipeline, leaving the physical
    /// gradients at solution points in `ws.q_phys` (axis-stacked rows).
    pub fn compute_gradients(&self, u: &DMatrix<f64>, ws: &mut Workspace) -> Result<(), Error> {
        let dim = self.ops.dim;
        let n_sol = self.ops.n_sol;
        par_gemm(&self.ops.m0, u, &mut ws.u_ext);
        match &self.ops.m12 {
            Some(m12) => par_gemm(m12, u, &mut ws.u_int),
            None => ws.u_int.copy_from(u),
        }
        self.exchange_values(&ws.u_ext, &mut ws.ext_in)?;
        if self.ops.ext_is_jump {
            ws.ext_in -= &ws.u_ext;
        }
        for d in 0..dim {
            let mut qrows = ws.q_tilde.rows_mut(d * n_sol, n_sol);
            qrows.gemm(1.0, &self.ops.ext_grad[d], &ws.ext_in, 0.0);
            qrows.gemm(1.0, &self.ops.int_div[d], &ws.u_int, 1.0);
        }
        self.transform_gradients(&ws.q_tilde, &mut ws.q_phys);
        Ok(())
    }

    /// LDG common values of the conserved variables at external points.
    fn exchange_values(&self, u_ext: &DMatrix<f64>, out: &mut DMatrix<f64>) -> Result<(), Error> {
        let nv = self.n_vars;
        let n_ext = self.ops.n_ext;
        let beta = self.beta;
        let partners = &self.mesh.partners;
        let far = self.farfield.as_deref();
        let n_sol_rows = n_ext;
        out.as_mut_slice()
            .par_chunks_mut(n_sol_rows * nv)
            .enumerate()
            .for_each(|(cell, chunk)| {
                for fpt in 0..n_ext {
                    match partners[cell * n_ext + fpt] {
                        Partner::Interior {
                            cell: oc,
                            fpt: of,
                            left,
                        } => {
                            for alpha in 0..nv {
                                let own = u_ext[(fpt, cell * nv + alpha)];
                                let other = u_ext[(of as usize, oc as usize * nv + alpha)];
                                let (ul, ur) = if left { (own, other) } else { (other, own) };
                                chunk[alpha * n_sol_rows + fpt] = common_value(ul, ur, beta);
                            }
                        }
                        Partner::Boundary => {
                            let farv = far.expect("boundary face without far-field state");
                            for alpha in 0..nv {
                                let own = u_ext[(fpt, cell * nv + alpha)];
                                chunk[alpha * n_sol_rows + fpt] =
                                    common_value(own, farv[alpha], beta);
                            }
                        }
                    }
                }
            });
        Ok(())
    }

    /// q_phys = J^{-T} q_tilde per cell.
    fn transform_gradients(&self, q_tilde: &DMatrix<f64>, q_phys: &mut DMatrix<f64>) {
        let nv = self.n_vars;
        let dim = self.ops.dim;
        let n_sol = self.ops.n_sol;
        let n_sub = self.mesh.n_sub();
        let jts: Vec<[[f64; 3]; 3]> = (0..n_sub).map(|s| self.mesh.shapes[s].jac_inv_t).collect();
        let total_rows = dim * n_sol;
        q_phys
            .as_mut_slice()
            .par_chunks_mut(total_rows * nv)
            .enumerate()
            .for_each(|(cell, chunk)| {
                let jt = &jts[cell % n_sub];
                for alpha in 0..nv {
                    let col = cell * nv + alpha;
                    for s in 0..n_sol {
                        for d in 0..dim {
                            let mut v = 0.0;
                            for k in 0..dim {
                                v += jt[d][k] * q_tilde[(k * n_sol + s, col)];
                            }
                            chunk[alpha * total_rows + d * n_sol + s] = v;
                        }
                    }
                }
            });
    }

    /// Physical fluxes at the interior evaluation points, transformed.
    fn interior_fluxes(&self, ws: &mut Workspace) -> Result<(), Error> {
        let nv = self.n_vars;
        let dim = self.ops.dim;
        let n_iu = self.ops.n_int_unique;
        let n_sub = self.mesh.n_sub();
        let viscous = self.eq.has_viscous();
        let shapes: Vec<([[f64; 3]; 3], f64)> = (0..n_sub)
            .map(|s| (self.mesh.shapes[s].jac_inv, self.mesh.shapes[s].det))
            .collect();
        let eq = &self.eq;
        let u_int = &ws.u_int;
        let q_int = &ws.q_int;
        let total_rows = dim * n_iu;
        let err = std::sync::Mutex::new(None::<Error>);
        ws.fax
            .as_mut_slice()
            .par_chunks_mut(total_rows * nv)
            .enumerate()
            .for_each(|(cell, chunk)| {
                let (jinv, det) = &shapes[cell % n_sub];
                let mut uvec = [0.0f64; 5];
                let mut grad = [[0.0f64; 5]; 3];
                let mut fphys = [[0.0f64; 5]; 3];
                let mut fvisc = [[0.0f64; 5]; 3];
                for p in 0..n_iu {
                    for alpha in 0..nv {
                        uvec[alpha] = u_int[(p, cell * nv + alpha)];
                    }
                    if viscous {
                        for d in 0..dim {
                            for alpha in 0..nv {
                                grad[d][alpha] = q_int[(d * n_iu + p, cell * nv + alpha)];
                            }
                        }
                    }
                    if let Err(e) = convective_flux(eq, &uvec[..nv], dim, &mut fphys) {
                        let mut guard = err.lock().unwrap();
                        if guard.is_none() {
                            *guard = Some(Error::Diverged {
                                time: f64::NAN,
                                cell: Some(cell),
                            });
                            let _ = e;
                        }
                        return;
                    }
                    if viscous {
                        viscous_flux(eq, &uvec[..nv], &grad, dim, &mut fvisc);
                        for d in 0..dim {
                            for alpha in 0..nv {
                                fphys[d][alpha] += fvisc[d][alpha];
                            }
                        }
                    }
                    // Transformed flux: det * J^{-1} f.
                    for d in 0..dim {
                        for alpha in 0..nv {
                            let mut v = 0.0;
                            for k in 0..dim {
                                v += jinv[d][k] * fphys[k][alpha];
                            }
                            chunk[alpha * total_rows + d * n_iu + p] = det * v;
                        }
                    }
                }
            });
        match err.into_inner().unwrap() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Common interface fluxes (transformed) into ws.ext_in; FR schemes get
    /// the common-minus-own jump.
    fn common_fluxes(&self, ws: &mut Workspace) -> Result<(), Error> {
        let nv = self.n_vars;
        let dim = self.ops.dim;
        let n_ext = self.ops.n_ext;
        let n_sub = self.mesh.n_sub();
        let viscous = self.eq.has_viscous();
        let jump = self.ops.ext_is_jump;
        let eq = &self.eq;
        let beta = self.beta;
        let eta = self.eta;
        let partners = &self.mesh.partners;
        let far = self.farfield.as_deref();
        let u_ext = &ws.u_ext;
        let q_ext = &ws.q_ext;
        let fext = &ws.fext;
        let shapes = &self.mesh.shapes;
        let re_ext = &self.re.ext_fpts;
        let err = std::sync::Mutex::new(None::<Error>);
        ws.ext_in
            .as_mut_slice()
            .par_chunks_mut(n_ext * nv)
            .enumerate()
            .for_each(|(cell, chunk)| {
                let shape = &shapes[cell % n_sub];
                let mut ul = [0.0f64; 5];
                let mut ur = [0.0f64; 5];
                let mut gl = [[0.0f64; 5]; 3];
                let mut gr = [[0.0f64; 5]; 3];
                let mut flux = [0.0f64; 5];
                for fpt in 0..n_ext {
                    let (left, ocell, ofpt, is_boundary) = match partners[cell * n_ext + fpt] {
                        Partner::Interior {
                            cell: oc,
                            fpt: of,
                            left,
                        } => (left, oc as usize, of as usize, false),
                        Partner::Boundary => (true, 0, 0, true),
                    };
                    // Own values become (uL, uR) in canonical order so that
                    // both sides evaluate the identical expression.
                    for alpha in 0..nv {
                        let own = u_ext[(fpt, cell * nv + alpha)];
                        let other = if is_boundary {
                            far.expect("boundary face without far-field state")[alpha]
                        } else {
                            u_ext[(ofpt, ocell * nv + alpha)]
                        };
                        if left {
                            ul[alpha] = own;
                            ur[alpha] = other;
                        } else {
                            ul[alpha] = other;
                            ur[alpha] = own;
                        }
                    }
                    // Left-side unit physical normal.
                    let own_n = shape.phys_normal[fpt];
                    let nl = if left {
                        own_n
                    } else {
                        [-own_n[0], -own_n[1], -own_n[2]]
                    };
                    if viscous {
                        for d in 0..dim {
                            for alpha in 0..nv {
                                let own = q_ext[(d * n_ext + fpt, cell * nv + alpha)];
                                let other = if is_boundary {
                                    own
                                } else {
                                    q_ext[(d * n_ext + ofpt, ocell * nv + alpha)]
                                };
                                if left {
                                    gl[d][alpha] = own;
                                    gr[d][alpha] = other;
                                } else {
                                    gl[d][alpha] = other;
                                    gr[d][alpha] = own;
                                }
                            }
                        }
                    }
                    if let Err(e) =
                        common_convective(eq, &ul[..nv], &ur[..nv], &nl, dim, &mut flux[..nv])
                    {
                        let mut guard = err.lock().unwrap();
                        if guard.is_none() {
                            *guard = Some(Error::Diverged {
                                time: f64::NAN,
                                cell: Some(cell),
                            });
                            let _ = e;
                        }
                        return;
                    }
                    if viscous {
                        common_viscous(
                            eq,
                            &ul[..nv],
                            &ur[..nv],
                            &gl,
                            &gr,
                            &nl,
                            dim,
                            beta,
                            eta,
                            &mut flux[..nv],
                        );
                    }
                    // Orient back to this cell and transform.
                    let sign = if left { 1.0 } else { -1.0 };
                    let scale = shape.face_scale[fpt] * sign;
                    for alpha in 0..nv {
                        let mut v = scale * flux[alpha];
                        if jump {
                            // Subtract the own interpolated transformed
                            // normal flux.
                            let mut own_nf = 0.0;
                            for d in 0..dim {
                                own_nf += fext[(d * n_ext + fpt, cell * nv + alpha)]
                                    * re_ext[fpt].normal[d];
                            }
                            v -= own_nf;
                        }
                        chunk[alpha * n_ext + fpt] = v;
                    }
                }
            });
        match err.into_inner().unwrap() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Cubature integral of each conserved variable over the mesh.
    pub fn integrals(&self, u: &DMatrix<f64>, interp: &DMatrix<f64>, wts: &[f64]) -> Vec<f64> {
        let nv = self.n_vars;
        let mut out = vec![0.0; nv];
        let vals = interp * u;
        for cell in 0..self.mesh.n_cells() {
            let det = self.mesh.shape_of(cell).det;
            for alpha in 0..nv {
                let col = cell * nv + alpha;
                let mut s = 0.0;
                for (q, w) in wts.iter().enumerate() {
                    s += w * vals[(q, col)];
                }
                out[alpha] += det * s;
            }
        }
        out
    }
}

/// Parallel gemm helpers chunking the wide right-hand factor.
fn par_gemm(a: &DMatrix<f64>, b: &DMatrix<f64>, out: &mut DMatrix<f64>) {
    let nrows = out.nrows();
    let ncols = out.ncols();
    let threads = rayon::current_num_threads().max(1);
    let chunk_cols = ncols.div_ceil(threads * 2).max(1);
    out.as_mut_slice()
        .par_chunks_mut(chunk_cols * nrows)
        .enumerate()
        .for_each(|(ci, chunk)| {
            let c0 = ci * chunk_cols;
            let cols = chunk.len() / nrows;
            let mut view = DMatrixViewMut::from_slice(chunk, nrows, cols);
            view.gemm(1.0, a, &b.columns(c0, cols), 0.0);
        });
}

fn par_gemm_acc(a: &DMatrix<f64>, b: &DMatrix<f64>, out: &mut DMatrix<f64>) {
    let nrows = out.nrows();
    let ncols = out.ncols();
    let threads = rayon::current_num_threads().max(1);
    let chunk_cols = ncols.div_ceil(threads * 2).max(1);
    out.as_mut_slice()
        .par_chunks_mut(chunk_cols * nrows)
        .enumerate()
        .for_each(|(ci, chunk)| {
            let c0 = ci * chunk_cols;
            let cols = chunk.len() / nrows;
            let mut view = DMatrixViewMut::from_slice(chunk, nrows, cols);
            view.gemm(1.0, a, &b.columns(c0, cols), 1.0);
        });
}

fn par_gemm_into(a: &DMatrix<f64>, b: &DMatrix<f64>, out: &mut DMatrixViewMut<f64>) {
    // Row views are strided; fall back to plain gemm (the dominant cost is
    // covered by the chunked paths above).
    out.gemm(1.0, a, b, 0.0);
}

/// y += a * x elementwise (matrix axpy).
fn maxpy(y: &mut DMatrix<f64>, a: f64, x: &DMatrix<f64>) {
    y.as_mut_slice()
        .iter_mut()
        .zip(x.as_slice())
        .for_each(|(yy, xx)| *yy += a * xx);
}

// ---------------------------------------------------------------------------
// Time integration.
// ---------------------------------------------------------------------------

/// Explicit integrator selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Integrator {
    /// Kutta's three-stage, third-order scheme.
    Rk3,
    /// Classical four-stage, fourth-order scheme.
    Rk4,
    /// Five-stage fourth-order low-storage (two-register) scheme.
    Rk54,
}

impl Integrator {
    pub fn name(self) -> &'static str {
        match self {
            Integrator::Rk3 => "rk3",
            Integrator::Rk4 => "rk4",
            Integrator::Rk54 => "rk54",
        }
    }

    /// Stability polynomial coefficients: sum c_k z^k.
    pub fn stability_coeffs(self) -> Vec<f64> {
        match self {
            Integrator::Rk3 => vec![1.0, 1.0, 0.5, 1.0 / 6.0],
            Integrator::Rk4 => vec![1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0],
            Integrator::Rk54 => vec![1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0, 1.0 / 200.0],
        }
    }

    pub fn n_stages(self) -> usize {
        match self {
            Integrator::Rk3 => 3,
            Integrator::Rk4 => 4,
            Integrator::Rk54 => 5,
        }
    }
}

impl std::str::FromStr for Integrator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "rk3" => Ok(Integrator::Rk3),
            "rk4" => Ok(Integrator::Rk4),
            "rk54" => Ok(Integrator::Rk54),
            other => Err(Error::Config(format!(
                "unknown integrator `{other}` (expected rk3, rk4 or rk54)"
            ))),
        }
    }
}

/// Carpenter-Kennedy five-stage two-register coefficients; the associated
/// stability polynomial is 1 + z + z^2/2 + z^3/6 + z^4/24 + z^5/200.
const CK54_A: [f64; 5] = [
    0.0,
    -567301805773.0 / 1357537059087.0,
    -2404267990393.0 / 2016746695238.0,
    -3550918686646.0 / 2091501179385.0,
    -1275806237668.0 / 842570457699.0,
];
const CK54_B: [f64; 5] = [
    1432997174477.0 / 9575080441755.0,
    5161836677717.0 / 13612068292357.0,
    1720146321549.0 / 2090206949498.0,
    3134564353537.0 / 4481467310338.0,
    2277821191437.0 / 14882151754819.0,
];

/// Five-stage fourth-order scheme with an embedded third-order companion
/// (two-register family); used by the adaptive controller.
pub const RK54_EMBED_A: [f64; 4] = [
    970286171893.0 / 4311952581923.0,
    6584761158862.0 / 12103376702013.0,
    2251764453980.0 / 15575788980749.0,
    26877169314380.0 / 34165994151039.0,
];
pub const RK54_EMBED_B: [f64; 5] = [
    1153189308089.0 / 22510343858157.0,
    1772645290293.0 / 4653164025191.0,
    -1672844663538.0 / 4480602732383.0,
    2114624349019.0 / 3568978502595.0,
    5198255086312.0 / 14908931495163.0,
];
pub const RK54_EMBED_BHAT: [f64; 5] = [
    1016888040809.0 / 7410784769900.0,
    11231460423587.0 / 58533540763752.0,
    -1563879915014.0 / 6823010717585.0,
    606302364029.0 / 971179775848.0,
    1097981568119.0 / 3980877426909.0,
];

fn ensure_stage_buffers(ws_len: &mut Vec<DMatrix<f64>>, count: usize, rows: usize, cols: usize) {
    while ws_len.len() < count {
        ws_len.push(DMatrix::zeros(rows, cols));
    }
}

/// One fixed step of the chosen integrator.
pub fn step(
    disc: &Discretization,
    integrator: Integrator,
    state: &mut State,
    dt: f64,
    ws: &mut Workspace,
) -> Result<(), Error> {
    let rows = state.u.nrows();
    let cols = state.u.ncols();
    match integrator {
        Integrator::Rk3 => {
            // k1, k2 at u + dt/2 k1, k3 at u - dt k1 + 2 dt k2.
            ensure_stage_buffers(&mut ws.stages, 3, rows, cols);
            let mut k1 = std::mem::replace(&mut ws.stages[0], DMatrix::zeros(0, 0));
            let mut k2 = std::mem::replace(&mut ws.stages[1], DMatrix::zeros(0, 0));
            let mut k3 = std::mem::replace(&mut ws.stages[2], DMatrix::zeros(0, 0));
            disc.residual(&state.u, ws, &mut k1)
                .map_err(|e| at_time(e, state.t))?;
            ws.utmp.copy_from(&state.u);
            maxpy(&mut ws.utmp, 0.5 * dt, &k1);
            disc.residual(&ws.utmp.clone(), ws, &mut k2)
                .map_err(|e| at_time(e, state.t))?;
            ws.utmp.copy_from(&state.u);
            maxpy(&mut ws.utmp, -dt, &k1);
            maxpy(&mut ws.utmp, 2.0 * dt, &k2);
            disc.residual(&ws.utmp.clone(), ws, &mut k3)
                .map_err(|e| at_time(e, state.t))?;
            maxpy(&mut state.u, dt / 6.0, &k1);
            maxpy(&mut state.u, 2.0 * dt / 3.0, &k2);
            maxpy(&mut state.u, dt / 6.0, &k3);
            ws.stages[0] = k1;
            ws.stages[1] = k2;
            ws.stages[2] = k3;
        }
        Integrator::Rk4 => {
            ensure_stage_buffers(&mut ws.stages, 2, rows, cols);
            let mut k = std::mem::replace(&mut ws.stages[0], DMatrix::zeros(0, 0));
            let mut acc = std::mem::replace(&mut ws.stages[1], DMatrix::zeros(0, 0));
            // Classical tableau, accumulating b-weighted stages.
            disc.residual(&state.u, ws, &mut k)
                .map_err(|e| at_time(e, state.t))?;
            acc.copy_from(&k);
            ws.utmp.copy_from(&state.u);
            maxpy(&mut ws.utmp, 0.5 * dt, &k);
            disc.residual(&ws.utmp.clone(), ws, &mut k)
                .map_err(|e| at_time(e, state.t))?;
            maxpy(&mut acc, 2.0, &k);
            ws.utmp.copy_from(&state.u);
            maxpy(&mut ws.utmp, 0.5 * dt, &k);
            disc.residual(&ws.utmp.clone(), ws, &mut k)
                .map_err(|e| at_time(e, state.t))?;
            maxpy(&mut acc, 2.0, &k);
            ws.utmp.copy_from(&state.u);
            maxpy(&mut ws.utmp, dt, &k);
            disc.residual(&ws.utmp.clone(), ws, &mut k)
                .map_err(|e| at_time(e, state.t))?;
            maxpy(&mut acc, 1.0, &k);
            maxpy(&mut state.u, dt / 6.0, &acc);
            ws.stages[0] = k;
            ws.stages[1] = acc;
        }
        Integrator::Rk54 => {
            // Two-register form: du = A_i du + dt f(u); u += B_i du.
            ensure_stage_buffers(&mut ws.stages, 2, rows, cols);
            let mut du = std::mem::replace(&mut ws.stages[0], DMatrix::zeros(0, 0));
            let mut k = std::mem::replace(&mut ws.stages[1], DMatrix::zeros(0, 0));
            du.fill(0.0);
            for i in 0..5 {
                disc.residual(&state.u, ws, &mut k)
                    .map_err(|e| at_time(e, state.t))?;
                // du = A_i du + dt k
                du *= CK54_A[i];
                maxpy(&mut du, dt, &k);
                maxpy(&mut state.u, CK54_B[i], &du);
            }
            ws.stages[0] = du;
            ws.stages[1] = k;
        }
    }
    state.t += dt;
    if state.u.iter().any(|v| !v.is_finite()) {
        return Err(Error::Diverged {
            time: state.t,
            cell: None,
        });
    }
    Ok(())
}

fn at_time(e: Error, t: f64) -> Error {
    match e {
        Error::Diverged { cell, .. } => Error::Diverged { time: t, cell },
        other => other,
    }
}

/// PI step-size controller state for the embedded RK54 pair.
#[derive(Debug, Clone)]
pub struct PiController {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub safety: f64,
    pub order: f64,
    pub err_prev: f64,
    pub min_factor: f64,
    pub max_factor: f64,
}

impl PiController {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Self {
        PiController {
            rel_tol,
            abs_tol,
            safety: 0.9,
            order: 4.0,
            err_prev: 1.0,
            min_factor: 0.3,
            max_factor: 2.5,
        }
    }

    /// Next step factor from the current error estimate.
    pub fn factor(&self, err: f64) -> f64 {
        let e = err.max(1e-300);
        let fac = self.safety * e.powf(-0.7 / self.order) * self.err_prev.powf(0.4 / self.order);
        fac.clamp(self.min_factor, self.max_factor)
    }
}

/// One adaptive step with the embedded five-stage pair. Returns the accepted
/// step size actually taken; `dt` is updated to the proposed next step.
pub fn adaptive_step(
    disc: &Discretization,
    state: &mut State,
    dt: &mut f64,
    ctrl: &mut PiController,
    ws: &mut Workspace,
    t_char: f64,
) -> Result<f64, Error> {
    let rows = state.u.nrows();
    let cols = state.u.ncols();
    ensure_stage_buffers(&mut ws.stages, 6, rows, cols);
    loop {
        if *dt < 1e-12 * t_char {
            return Err(Error::Diverged {
                time: state.t,
                cell: None,
            });
        }
        let h = *dt;
        // Full-storage evaluation of the 2R tableau: A[i][j] = b[j] for
        // j <= i-2, A[i][i-1] = a_{i-1}.
        let mut failed = false;
        for i in 0..5 {
            ws.utmp.copy_from(&state.u);
            for j in 0..i {
                let aij = if j + 1 == i {
                    RK54_EMBED_A[i - 1]
                } else {
                    RK54_EMBED_B[j]
                };
                let kj = std::mem::replace(&mut ws.stages[j], DMatrix::zeros(0, 0));
                maxpy(&mut ws.utmp, h * aij, &kj);
                ws.stages[j] = kj;
            }
            let mut ki = std::mem::replace(&mut ws.stages[i], DMatrix::zeros(0, 0));
            let r = disc.residual(&ws.utmp.clone(), ws, &mut ki);
            ws.stages[i] = ki;
            if r.is_err() {
                failed = true;
                break;
            }
        }
        if failed {
            *dt *= 0.5;
            continue;
        }
        // Candidate update and error estimate.
        ws.accum.copy_from(&state.u);
        for i in 0..5 {
            maxpy(&mut ws.accum, h * RK54_EMBED_B[i], &ws.stages[i]);
        }
        let mut err: f64 = 0.0;
        let un = &ws.accum;
        let uo = &state.u;
        for idx in 0..rows * cols {
            let mut ev = 0.0;
            for i in 0..5 {
                ev += (RK54_EMBED_B[i] - RK54_EMBED_BHAT[i]) * ws.stages[i].as_slice()[idx];
            }
            ev *= h;
            let scale = ctrl.abs_tol
                + ctrl.rel_tol * uo.as_slice()[idx].abs().max(un.as_slice()[idx].abs());
            let e = (ev / scale).abs();
            if e > err {
                err = e;
            }
        }
        if !err.is_finite() {
            *dt *= 0.5;
            continue;
        }
        if err <= 1.0 {
            state.u.copy_from(&ws.accum);
            state.t += h;
            if state.u.iter().any(|v| !v.is_finite()) {
                return Err(Error::Diverged {
                    time: state.t,
                    cell: None,
                });
            }
            let fac = ctrl.factor(err);
            ctrl.err_prev = err.max(1e-4);
            *dt = h * fac;
            return Ok(h);
        }
        *dt = h * ctrl.factor(err).min(1.0);
    }
}

/// Write a solution snapshot as CSV with a self-describing header. Columns
/// follow the state layout: cell index, solution point index, physical
/// coordinates, then one column per conserved variable.
pub fn write_snapshot(
    disc: &Discretization,
    state: &State,
    path: &std::path::Path,
) -> Result<(), Error> {
    use std::io::Write;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        f,
        "# etype={} p={} n={} time={} layout=cell,point,x,y,z,vars",
        disc.re.kind.name(),
        disc.re.degree,
        disc.mesh.cells_per_axis,
        state.t
    )?;
    write!(f, "cell,point,x,y,z")?;
    for alpha in 0..disc.n_vars {
        write!(f, ",u{alpha}")?;
    }
    writeln!(f)?;
    for cell in 0..disc.mesh.n_cells() {
        for s in 0..disc.ops.n_sol {
            let x = disc.mesh.sol_point(cell, s);
            write!(f, "{cell},{s},{},{},{}", x[0], x[1], x[2])?;
            for alpha in 0..disc.n_vars {
                write!(f, ",{}", state.u[(s, cell * disc.n_vars + alpha)])?;
            }
            writeln!(f)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linadv_disc(kind: ElementKind, p: usize, scheme: Scheme, n: usize) -> Discretization {
        let dim = kind.dim();
        let mut velocity = [0.0; 3];
        let ang: f64 = 0.5235987755982988; // pi/6
        velocity[0] = ang.cos();
        velocity[1] = ang.sin();
        if dim == 3 {
            velocity[2] = 0.0;
        }
        Discretization::new(
            kind,
            p,
            scheme,
            n,
            1.0,
            [true, true, true],
            EquationSet::LinAdv { velocity },
            0.0,
            0.0,
            None,
        )
        .unwrap()
    }

    #[test]
    fn constant_state_zero_residual() {
        for kind in ElementKind::all() {
            for scheme in [Scheme::Sdrt, Scheme::FrDg, Scheme::FrSdrt] {
                let disc = linadv_disc(kind, 2, scheme, 3);
                let state = disc.project(|_, _| 1.7);
                let mut ws = disc.workspace();
                let mut dudt = DMatrix::zeros(disc.ops.n_sol, disc.n_cols());
                disc.residual(&state.u, &mut ws, &mut dudt).unwrap();
                assert!(
                    dudt.amax() < 1e-12,
                    "{kind:?} {scheme:?}: free stream violated: {:.2e}",
                    dudt.amax()
                );
            }
        }
    }

    #[test]
    fn global_linear_field_advects_exactly() {
        // du/dt = -c . grad(u) for smooth u; a global linear field on a
        // periodic mesh is not periodic, so use one with c . grad = const
        // only through the local test: residual at interior cells of a
        // linear-in-x field equals -c_x (checked on the center cell where
        // periodicity does not disturb the stencil).
        let disc = linadv_disc(ElementKind::Quad, 2, Scheme::Sdrt, 5);
        let state = disc.project(|x, _| x[0]);
        let mut ws = disc.workspace();
        let mut dudt = DMatrix::zeros(disc.ops.n_sol, disc.n_cols());
        disc.residual(&state.u, &mut ws, &mut dudt).unwrap();
        // Center cell of the 5x5 grid.
        let cell = 2 * 5 + 2;
        let cx = 0.5235987755982988f64.cos();
        for s in 0..disc.ops.n_sol {
            let v = dudt[(s, cell)];
            assert!((v + cx).abs() < 1e-11, "advective residual {v} vs {}", -cx);
        }
    }

    #[test]
    fn diffusion_quadratic_field_exact() {
        // u = x^2 + 2 y^2 has mu lap(u) = 6 mu for p >= 2 (checked away from
        // the periodic seam).
        let mu = 0.3;
        let disc = Discretization::new(
            ElementKind::Tri,
            2,
            Scheme::Sdrt,
            5,
            1.0,
            [true, true, false],
            EquationSet::LinDiff { diffusivity: mu },
            0.0,
            0.0,
            None,
        )
        .unwrap();
        let state = disc.project(|x, _| x[0] * x[0] + 2.0 * x[1] * x[1]);
        let mut ws = disc.workspace();
        let mut dudt = DMatrix::zeros(disc.ops.n_sol, disc.n_cols());
        disc.residual(&state.u, &mut ws, &mut dudt).unwrap();
        for sub in 0..2 {
            let cell = (2 * 5 + 2) * 2 + sub;
            for s in 0..disc.ops.n_sol {
                let v = dudt[(s, cell)];
                assert!((v - 6.0 * mu).abs() < 1e-10, "lap residual {v}");
            }
        }
    }

    #[test]
    fn residual_linear_in_state() {
        let disc = linadv_disc(ElementKind::Tri, 2, Scheme::FrDg, 3);
        let mut ws = disc.workspace();
        let s1 = disc.project(|x, _| (x[0] * 2.0).sin());
        let s2 = disc.project(|x, _| (x[1] * 3.0).cos());
        let mut r1 = DMatrix::zeros(disc.ops.n_sol, disc.n_cols());
        let mut r2 = r1.clone();
        let mut r12 = r1.clone();
        disc.residual(&s1.u, &mut ws, &mut r1).unwrap();
        disc.residual(&s2.u, &mut ws, &mut r2).unwrap();
        let combo = 0.3 * &s1.u + 1.7 * &s2.u;
        disc.residual(&combo, &mut ws, &mut r12).unwrap();
        let expect = 0.3 * r1 + 1.7 * r2;
        assert!((&r12 - &expect).amax() < 1e-12 * (1.0 + expect.amax()));
    }

    #[test]
    fn rk_amplification_matches_stability_polynomial() {
        // Scalar ODE u' = lambda u through a 1-cell-wide trick is awkward;
        // instead check on a diagonal linear map via direct stage algebra:
        // apply the integrators to a 1x1 "residual" closure implemented by a
        // tiny discretization-free路 replica of the stage updates.
        let lambda = -0.7;
        let dt = 0.31;
        let z = lambda * dt;
        // RK4 classical on u' = lambda u.
        let mut u = 1.0f64;
        let k1 = lambda * u;
        let k2 = lambda * (u + 0.5 * dt * k1);
        let k3 = lambda * (u + 0.5 * dt * k2);
        let k4 = lambda * (u + dt * k3);
        u += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let poly4 = 1.0 + z + z * z / 2.0 + z.powi(3) / 6.0 + z.powi(4) / 24.0;
        assert!((u - poly4).abs() < 1e-15);
        // RK54 two-register form.
        let mut u = 1.0f64;
        let mut du = 0.0f64;
        for i in 0..5 {
            du = CK54_A[i] * du + dt * lambda * u;
            u += CK54_B[i] * du;
        }
        let poly5 = poly4 + z.powi(5) / 200.0;
        assert!((u - poly5).abs() < 1e-15, "{u} vs {poly5}");
    }

    #[test]
    fn embedded_pair_order_conditions() {
        // Build the full tableau of the embedded scheme and verify fourth
        // order for b and third order for bhat.
        let mut am = [[0.0f64; 5]; 5];
        for i in 1..5usize {
            for j in 0..i.saturating_sub(1) {
                am[i][j] = RK54_EMBED_B[j];
            }
            am[i][i - 1] = RK54_EMBED_A[i - 1];
        }
        let c: Vec<f64> = (0..5).map(|i| am[i].iter().sum()).collect();
        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(u, v)| u * v).sum::<f64>();
        let ac: Vec<f64> = (0..5).map(|i| dot(&am[i], &c)).collect();
        let checks = [
            (RK54_EMBED_B.iter().sum::<f64>(), 1.0),
            (dot(&RK54_EMBED_B, &c), 0.5),
            (
                RK54_EMBED_B
                    .iter()
                    .zip(&c)
                    .map(|(b, cc)| b * cc * cc)
                    .sum::<f64>(),
                1.0 / 3.0,
            ),
            (dot(&RK54_EMBED_B, &ac), 1.0 / 6.0),
            (RK54_EMBED_BHAT.iter().sum::<f64>(), 1.0),
            (dot(&RK54_EMBED_BHAT, &c), 0.5),
        ];
        for (got, want) in checks {
            assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        }
    }

    #[test]
    fn pi_controller_step_sequence_monotone() {
        // u' = -u with tolerances 1e-8: after the transient the accepted
        // step sequence must grow monotonically (smooth problem).
        // Integrate the scalar problem with the embedded pair directly.
        let mut ctrl = PiController::new(1e-8, 1e-8);
        let mut u = 1.0f64;
        let mut t = 0.0;
        let mut dt = 1e-3;
        let mut steps: Vec<f64> = Vec::new();
        while t < 5.0 {
            let mut k = [0.0f64; 5];
            for i in 0..5 {
                let mut ui = u;
                for j in 0..i {
                    let aij = if j + 1 == i {
                        RK54_EMBED_A[i - 1]
                    } else {
                        RK54_EMBED_B[j]
                    };
                    ui += dt * aij * k[j];
                }
                k[i] = -ui;
            }
            let unew = u + dt * dot(&RK54_EMBED_B, &k);
            let e = dt
                * (0..5)
                    .map(|i| (RK54_EMBED_B[i] - RK54_EMBED_BHAT[i]) * k[i])
                    .sum::<f64>();
            let err = (e / (1e-8 + 1e-8 * u.abs().max(unew.abs()))).abs();
            if err <= 1.0 {
                u = unew;
                t += dt;
                steps.push(dt);
                let fac = ctrl.factor(err);
                ctrl.err_prev = err.max(1e-4);
                dt *= fac;
            } else {
                dt *= ctrl.factor(err).min(1.0);
            }
        }
        // Skip the transient; allow the clamp plateau.
        let tail = &steps[3..steps.len() - 1];
        for w in tail.windows(2) {
            assert!(w[1] >= w[0] * 0.999, "step sequence not monotone: {w:?}");
        }
        fn dot(x: &[f64], y: &[f64]) -> f64 {
            x.iter().zip(y).map(|(u, v)| u * v).sum()
        }
    }

    #[test]
    fn conservation_under_advection_steps() {
        use crate::refelem::cubature::volume_rule;
        let disc = linadv_disc(ElementKind::Tri, 2, Scheme::Sdrt, 4);
        let mut state = disc.project(|x, _| (x[0] * std::f64::consts::PI / 2.0).sin() + 1.3);
        let mut ws = disc.workspace();
        let rule = volume_rule(ElementKind::Tri, 6).unwrap();
        let interp = disc.ops.basis.interp_matrix(&rule.points);
        let before = disc.integrals(&state.u, &interp, &rule.weights)[0];
        for _ in 0..5 {
            step(&disc, Integrator::Rk4, &mut state, 0.02, &mut ws).unwrap();
        }
        let after = disc.integrals(&state.u, &interp, &rule.weights)[0];
        assert!(
            (after - before).abs() < 1e-10 * before.abs().max(1.0),
            "conservation drift {before} -> {after}"
        );
    }
}
