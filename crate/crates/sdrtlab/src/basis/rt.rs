//! Raviart-Thomas flux bases: the per-element modal dictionaries, their
//! orthonormalization, the flux Vandermonde matrix and nodal divergence
//! tables.
//!
//! The RT space per element kind:
//! * quad/hex: per-component tensor spaces with one degree raised,
//! * tri/tet: vector polynomials of degree p plus the radial extension by
//!   homogeneous degree-p scalars,
//! * prisms: the triangle RT construction tensorized with Legendre factors
//!   in the extrusion direction.
//!
//! Tensor dictionaries are orthonormal as written; the simplex and prism
//! dictionaries are orthonormalized by modified Gram-Schmidt (with one
//! re-orthogonalization pass) under the vector L2 inner product.

use nalgebra::DMatrix;

use super::jacobi::{legendre, legendre_deriv};
use super::modal::ModalBasis;
use crate::error::Error;
use crate::linalg::inverse_with_cond;
use crate::refelem::cubature::volume_rule;
use crate::refelem::{ElementKind, ReferenceElement};

/// One dictionary member with analytic value and divergence.
#[derive(Debug, Clone)]
enum Atom {
    /// scalar(x) times the canonical axis vector.
    Axis { scalar: Scalar, axis: usize },
    /// Position vector times a homogeneous monomial (simplexes), or the
    /// in-plane position times an in-plane monomial times a Legendre factor
    /// in z (prisms, in_plane = true).
    Radial {
        exps: [usize; 3],
        legz: Option<usize>,
        in_plane: bool,
    },
}

#[derive(Debug, Clone)]
enum Scalar {
    /// Product of normalized Legendre factors per coordinate.
    TensorLeg([usize; 3]),
    /// Triangle Dubiner mode (i, j), optional normalized Legendre in z.
    TriDub {
        i: usize,
        j: usize,
        legz: Option<usize>,
    },
    /// Tetrahedron Dubiner mode.
    TetDub { i: usize, j: usize, k: usize },
}

impl Scalar {
    fn eval(&self, x: &[f64], tri: &ModalBasis, tet: Option<&ModalBasis>) -> f64 {
        match self {
            Scalar::TensorLeg(d) => {
                let mut v = 1.0;
                for (axis, deg) in d.iter().enumerate().take(x.len()) {
                    v *= legendre(*deg, x[axis]);
                }
                v
            }
            Scalar::TriDub { i, j, legz } => {
                let v = tri_mode_value(tri, *i, *j, x);
                match legz {
                    Some(k) => v * legendre(*k, x[2]),
                    None => v,
                }
            }
            Scalar::TetDub { i, j, k } => tet_mode_value(tet.unwrap(), *i, *j, *k, x),
        }
    }

    fn grad(&self, x: &[f64], tri: &ModalBasis, tet: Option<&ModalBasis>) -> [f64; 3] {
        match self {
            Scalar::TensorLeg(d) => {
                let dim = x.len();
                let vals: Vec<f64> = (0..dim).map(|a| legendre(d[a], x[a])).collect();
                let ders: Vec<f64> = (0..dim).map(|a| legendre_deriv(d[a], x[a])).collect();
                let mut g = [0.0; 3];
                for a in 0..dim {
                    let mut t = ders[a];
                    for b in 0..dim {
                        if b != a {
                            t *= vals[b];
                        }
                    }
                    g[a] = t;
                }
                g
            }
            Scalar::TriDub { i, j, legz } => {
                let (v2, g2) = tri_mode_value_grad(tri, *i, *j, x);
                match legz {
                    Some(k) => {
                        let lz = legendre(*k, x[2]);
                        [g2[0] * lz, g2[1] * lz, v2 * legendre_deriv(*k, x[2])]
                    }
                    None => [g2[0], g2[1], 0.0],
                }
            }
            Scalar::TetDub { i, j, k } => tet_mode_grad3(tet.unwrap(), *i, *j, *k, x),
        }
    }
}

// Helpers that reach into ModalBasis orderings for single-mode evaluation.
fn tri_index(p: usize, i: usize, j: usize) -> usize {
    // Ordering in ModalBasis::new for tri: for i { for j in 0..=(p-i) }.
    let mut idx = 0;
    for ii in 0..i {
        idx += p - ii + 1;
    }
    idx + j
}

fn tri_mode_value(tri: &ModalBasis, i: usize, j: usize, x: &[f64]) -> f64 {
    tri.eval(&x[..2])[tri_index(tri.p, i, j)]
}

fn tri_mode_value_grad(tri: &ModalBasis, i: usize, j: usize, x: &[f64]) -> (f64, [f64; 2]) {
    let idx = tri_index(tri.p, i, j);
    let v = tri.eval(&x[..2])[idx];
    let g = tri.grad(&x[..2]);
    (v, [g[idx][0], g[idx][1]])
}

fn tet_index(p: usize, i: usize, j: usize, k: usize) -> usize {
    let mut idx = 0;
    for ii in 0..=p {
        for jj in 0..=(p - ii) {
            for kk in 0..=(p - ii - jj) {
                if (ii, jj, kk) == (i, j, k) {
                    return idx;
                }
                idx += 1;
            }
        }
    }
    unreachable!()
}

fn tet_mode_value(tet: &ModalBasis, i: usize, j: usize, k: usize, x: &[f64]) -> f64 {
    tet.eval(x)[tet_index(tet.p, i, j, k)]
}

fn tet_mode_grad3(tet: &ModalBasis, i: usize, j: usize, k: usize, x: &[f64]) -> [f64; 3] {
    let g = &tet.grad(x)[tet_index(tet.p, i, j, k)];
    [g[0], g[1], g[2]]
}

fn mono_eval(exps: &[usize; 3], x: &[f64], dims: usize) -> f64 {
    let mut v = 1.0;
    for d in 0..dims {
        for _ in 0..exps[d] {
            v *= x[d];
        }
    }
    v
}

impl Atom {
    fn eval(&self, x: &[f64], dim: usize, tri: &ModalBasis, tet: Option<&ModalBasis>) -> [f64; 3] {
        match self {
            Atom::Axis { scalar, axis } => {
                let mut v = [0.0; 3];
                v[*axis] = scalar.eval(x, tri, tet);
                v
            }
            Atom::Radial {
                exps,
                legz,
                in_plane,
            } => {
                let rdim = if *in_plane { 2 } else { dim };
                let m = mono_eval(exps, x, rdim);
                let lz = match legz {
                    Some(k) => legendre(*k, x[2]),
                    None => 1.0,
                };
                let mut v = [0.0; 3];
                for d in 0..rdim {
                    v[d] = x[d] * m * lz;
                }
                v
            }
        }
    }

    fn div(&self, x: &[f64], dim: usize, tri: &ModalBasis, tet: Option<&ModalBasis>) -> f64 {
        match self {
            Atom::Axis { scalar, axis } => scalar.grad(x, tri, tet)[*axis],
            Atom::Radial {
                exps,
                legz,
                in_plane,
            } => {
                let rdim = if *in_plane { 2 } else { dim };
                let deg: usize = exps.iter().take(rdim).sum();
                let m = mono_eval(exps, x, rdim);
                let lz = match legz {
                    Some(k) => legendre(*k, x[2]),
                    None => 1.0,
                };
                // div(x m) = (rdim + deg) m for homogeneous m; any Legendre
                // factor rides along since the radial part has no z component.
                (rdim + deg) as f64 * m * lz
            }
        }
    }
}

fn dictionary(kind: ElementKind, p: usize) -> Vec<Atom> {
    let mut atoms = Vec::new();
    match kind {
        ElementKind::Quad => {
            for axis in 0..2usize {
                let (di, dj) = if axis == 0 { (p + 1, p) } else { (p, p + 1) };
                for j in 0..=dj {
                    for i in 0..=di {
                        atoms.push(Atom::Axis {
                            scalar: Scalar::TensorLeg([i, j, 0]),
                            axis,
                        });
                    }
                }
            }
        }
        ElementKind::Hex => {
            for axis in 0..3usize {
                let mut degs = [p, p, p];
                degs[axis] = p + 1;
                for k in 0..=degs[2] {
                    for j in 0..=degs[1] {
                        for i in 0..=degs[0] {
                            atoms.push(Atom::Axis {
                                scalar: Scalar::TensorLeg([i, j, k]),
                                axis,
                            });
                        }
                    }
                }
            }
        }
        ElementKind::Tri => {
            for axis in 0..2usize {
                for i in 0..=p {
                    for j in 0..=(p - i) {
                        atoms.push(Atom::Axis {
                            scalar: Scalar::TriDub { i, j, legz: None },
                            axis,
                        });
                    }
                }
            }
            for t in 0..=p {
                atoms.push(Atom::Radial {
                    exps: [t, p - t, 0],
                    legz: None,
                    in_plane: false,
                });
            }
        }
        ElementKind::Tet => {
            for axis in 0..3usize {
                for i in 0..=p {
                    for j in 0..=(p - i) {
                        for k in 0..=(p - i - j) {
                            atoms.push(Atom::Axis {
                                scalar: Scalar::TetDub { i, j, k },
                                axis,
                            });
                        }
                    }
                }
            }
            for a in 0..=p {
                for b in 0..=(p - a) {
                    atoms.push(Atom::Radial {
                        exps: [a, b, p - a - b],
                        legz: None,
                        in_plane: false,
                    });
                }
            }
        }
        ElementKind::Pri => {
            // In-plane components: triangle degree-p vector modes and the
            // radial extension, tensorized with P_p(z).
            for axis in 0..2usize {
                for k in 0..=p {
                    for i in 0..=p {
                        for j in 0..=(p - i) {
                            atoms.push(Atom::Axis {
                                scalar: Scalar::TriDub {
                                    i,
                                    j,
                                    legz: Some(k),
                                },
                                axis,
                            });
                        }
                    }
                }
            }
            for k in 0..=p {
                for t in 0..=p {
                    atoms.push(Atom::Radial {
                        exps: [t, p - t, 0],
                        legz: Some(k),
                        in_plane: true,
                    });
                }
            }
            // Extrusion component: triangle scalar modes times P_{p+1}(z).
            for k in 0..=(p + 1) {
                for i in 0..=p {
                    for j in 0..=(p - i) {
                        atoms.push(Atom::Axis {
                            scalar: Scalar::TriDub {
                                i,
                                j,
                                legz: Some(k),
                            },
                            axis: 2,
                        });
                    }
                }
            }
        }
    }
    atoms
}

/// Raviart-Thomas flux basis for one reference element.
#[derive(Debug)]
pub struct RTBasis {
    pub kind: ElementKind,
    pub degree: usize,
    atoms: Vec<Atom>,
    /// Modal coefficients over the dictionary: mode m = sum_a coef[(m, a)] atom_a.
    coef: DMatrix<f64>,
    tri_helper: ModalBasis,
    tet_helper: Option<ModalBasis>,
    /// Flux Vandermonde V[(m, s)] = psi_m(x_s) . n_s over ext then int points.
    pub vandermonde: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    pub condition: f64,
    /// Condition number above 1e8 recorded as a warning for the build report.
    pub warning: Option<String>,
}

impl RTBasis {
    pub fn n_modes(&self) -> usize {
        self.coef.nrows()
    }

    /// Vector values of every modal member at x: (n_modes, dim).
    pub fn modal_eval(&self, x: &[f64]) -> Vec<[f64; 3]> {
        let dim = self.kind.dim();
        let avals: Vec<[f64; 3]> = self
            .atoms
            .iter()
            .map(|a| a.eval(x, dim, &self.tri_helper, self.tet_helper.as_ref()))
            .collect();
        (0..self.n_modes())
            .map(|m| {
                let mut v = [0.0; 3];
                for (a, av) in avals.iter().enumerate() {
                    let c = self.coef[(m, a)];
                    if c != 0.0 {
                        for d in 0..dim {
                            v[d] += c * av[d];
                        }
                    }
                }
                v
            })
            .collect()
    }

    /// Divergence of every modal member at x.
    pub fn modal_div(&self, x: &[f64]) -> Vec<f64> {
        let dim = self.kind.dim();
        let adivs: Vec<f64> = self
            .atoms
            .iter()
            .map(|a| a.div(x, dim, &self.tri_helper, self.tet_helper.as_ref()))
            .collect();
        (0..self.n_modes())
            .map(|m| {
                let mut v = 0.0;
                for (a, ad) in adivs.iter().enumerate() {
                    v += self.coef[(m, a)] * ad;
                }
                v
            })
            .collect()
    }

    /// Divergence of the *nodal* functions at the given points:
    /// out[(q, r)] = div l_r(x_q), with r indexing ext then int flux points.
    pub fn nodal_div_matrix(&self, pts: &[Vec<f64>]) -> DMatrix<f64> {
        let n = self.n_modes();
        let mut dm = DMatrix::zeros(pts.len(), n);
        for (q, x) in pts.iter().enumerate() {
            let divs = self.modal_div(x);
            for (m, dv) in divs.iter().enumerate() {
                dm[(q, m)] = *dv;
            }
        }
        // l_r = sum_m inv[(r, m)] psi_m  =>  div table = D * inv^T.
        &dm * self.inverse.transpose()
    }
}

/// Build the RT basis: dictionary, orthonormalization, flux Vandermonde.
pub fn build_rt_basis(re: &ReferenceElement) -> Result<RTBasis, Error> {
    let kind = re.kind;
    let p = re.degree;
    let dim = kind.dim();
    let atoms = dictionary(kind, p);
    let n = atoms.len();
    assert_eq!(
        n, re.counts.n_flux,
        "RT dictionary size vs flux point count"
    );

    let tri_helper = ModalBasis::new(ElementKind::Tri, p);
    let tet_helper = match kind {
        ElementKind::Tet => Some(ModalBasis::new(ElementKind::Tet, p)),
        _ => None,
    };

    // Orthonormalize the dictionary where it is not orthonormal already.
    let coef = match kind {
        ElementKind::Quad | ElementKind::Hex => DMatrix::identity(n, n),
        _ => {
            let rule = volume_rule(kind, 2 * p + 6)?;
            // Atom Gram matrix under the vector L2 inner product.
            let mut gram = DMatrix::zeros(n, n);
            let mut avals: Vec<Vec<[f64; 3]>> = Vec::with_capacity(rule.len());
            for x in &rule.points {
                avals.push(
                    atoms
                        .iter()
                        .map(|a| a.eval(x, dim, &tri_helper, tet_helper.as_ref()))
                        .collect(),
                );
            }
            for a in 0..n {
                for b in a..n {
                    let mut s = 0.0;
                    for (q, w) in rule.weights.iter().enumerate() {
                        let va = &avals[q][a];
                        let vb = &avals[q][b];
                        s += w * (va[0] * vb[0] + va[1] * vb[1] + va[2] * vb[2]);
                    }
                    gram[(a, b)] = s;
                    gram[(b, a)] = s;
                }
            }
            // Modified Gram-Schmidt on coefficient rows with one
            // re-orthogonalization pass, inner products via the Gram matrix.
            let mut c = DMatrix::<f64>::identity(n, n);
            let ip = |u: &nalgebra::DVector<f64>, v: &nalgebra::DVector<f64>, g: &DMatrix<f64>| {
                (u.transpose() * g * v)[(0, 0)]
            };
            for m in 0..n {
                let mut v = c.row(m).transpose().clone_owned();
                for _pass in 0..2 {
                    for k in 0..m {
                        let uk = c.row(k).transpose().clone_owned();
                        let proj = ip(&v, &uk, &gram);
                        v -= uk * proj;
                    }
                }
                let norm = ip(&v, &v, &gram).sqrt();
                if norm < 1e-13 {
                    return Err(Error::Numerical(format!(
                        "RT dictionary member {m} linearly dependent for {kind:?} p={p}"
                    )));
                }
                v /= norm;
                c.set_row(m, &v.transpose());
            }
            c
        }
    };

    let mut basis = RTBasis {
        kind,
        degree: p,
        atoms,
        coef,
        tri_helper,
        tet_helper,
        vandermonde: DMatrix::zeros(n, n),
        inverse: DMatrix::zeros(n, n),
        condition: 0.0,
        warning: None,
    };

    // Flux Vandermonde over ext then int flux points.
    let mut v = DMatrix::zeros(n, n);
    let all_pts: Vec<(&Vec<f64>, &Vec<f64>)> = re
        .ext_fpts
        .iter()
        .map(|f| (&f.coords, &f.normal))
        .chain(re.int_fpts.iter().map(|f| (&f.coords, &f.normal)))
        .collect();
    for (s, (x, nrm)) in all_pts.iter().enumerate() {
        let vals = basis.modal_eval(x);
        for (m, val) in vals.iter().enumerate() {
            let mut dot = 0.0;
            for d in 0..dim {
                dot += val[d] * nrm[d];
            }
            v[(m, s)] = dot;
        }
    }
    let (inv, cond) = inverse_with_cond(&v)?;
    if cond > 1e12 {
        return Err(Error::Numerical(format!(
            "flux Vandermonde condition number {cond:.3e} for {kind:?} p={p}"
        )));
    }
    let warning = if cond > 1e8 {
        Some(format!(
            "flux Vandermonde condition number {cond:.3e} for {kind:?} p={p}"
        ))
    } else {
        None
    };
    basis.vandermonde = v;
    basis.inverse = inv;
    basis.condition = cond;
    basis.warning = warning;
    Ok(basis)
}
