//! Hierarchical orthonormal modal bases: tensor Legendre on quad/hex,
//! collapsed-coordinate (Dubiner-type) bases on tri/tet, and the
//! triangle-times-Legendre product on prisms. All derivatives are analytic.

use super::jacobi::{jacobi, jacobi_deriv, legendre, legendre_deriv};
use crate::refelem::ElementKind;

/// Orthonormal modal basis of total/tensor degree `p` on a reference element.
#[derive(Debug, Clone)]
pub struct ModalBasis {
    pub kind: ElementKind,
    pub p: usize,
    modes: Vec<Mode>,
}

#[derive(Debug, Clone, Copy)]
struct Mode {
    i: usize,
    j: usize,
    k: usize,
}

impl ModalBasis {
    pub fn new(kind: ElementKind, p: usize) -> Self {
        let mut modes = Vec::new();
        match kind {
            ElementKind::Quad => {
                for j in 0..=p {
                    for i in 0..=p {
                        modes.push(Mode { i, j, k: 0 });
                    }
                }
            }
            ElementKind::Hex => {
                for k in 0..=p {
                    for j in 0..=p {
                        for i in 0..=p {
                            modes.push(Mode { i, j, k });
                        }
                    }
                }
            }
            ElementKind::Tri => {
                for i in 0..=p {
                    for j in 0..=(p - i) {
                        modes.push(Mode { i, j, k: 0 });
                    }
                }
            }
            ElementKind::Tet => {
                for i in 0..=p {
                    for j in 0..=(p - i) {
                        for k in 0..=(p - i - j) {
                            modes.push(Mode { i, j, k });
                        }
                    }
                }
            }
            ElementKind::Pri => {
                for k in 0..=p {
                    for i in 0..=p {
                        for j in 0..=(p - i) {
                            modes.push(Mode { i, j, k });
                        }
                    }
                }
            }
        }
        ModalBasis { kind, p, modes }
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Values of all modes at a reference point.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.modes.iter().map(|m| self.eval_mode(m, x)).collect()
    }

    /// Gradients of all modes: row per mode, `dim` entries each.
    pub fn grad(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.modes.iter().map(|m| self.grad_mode(m, x)).collect()
    }

    fn eval_mode(&self, m: &Mode, x: &[f64]) -> f64 {
        match self.kind {
            ElementKind::Quad => legendre(m.i, x[0]) * legendre(m.j, x[1]),
            ElementKind::Hex => legendre(m.i, x[0]) * legendre(m.j, x[1]) * legendre(m.k, x[2]),
            ElementKind::Tri => tri_mode(m.i, m.j, x[0], x[1]),
            ElementKind::Tet => tet_mode(m.i, m.j, m.k, x),
            ElementKind::Pri => tri_mode(m.i, m.j, x[0], x[1]) * legendre(m.k, x[2]),
        }
    }

    fn grad_mode(&self, m: &Mode, x: &[f64]) -> Vec<f64> {
        match self.kind {
            ElementKind::Quad => vec![
                legendre_deriv(m.i, x[0]) * legendre(m.j, x[1]),
                legendre(m.i, x[0]) * legendre_deriv(m.j, x[1]),
            ],
            ElementKind::Hex => vec![
                legendre_deriv(m.i, x[0]) * legendre(m.j, x[1]) * legendre(m.k, x[2]),
                legendre(m.i, x[0]) * legendre_deriv(m.j, x[1]) * legendre(m.k, x[2]),
                legendre(m.i, x[0]) * legendre(m.j, x[1]) * legendre_deriv(m.k, x[2]),
            ],
            ElementKind::Tri => {
                let g = tri_mode_grad(m.i, m.j, x[0], x[1]);
                vec![g[0], g[1]]
            }
            ElementKind::Tet => tet_mode_grad(m.i, m.j, m.k, x),
            ElementKind::Pri => {
                let v2 = tri_mode(m.i, m.j, x[0], x[1]);
                let g2 = tri_mode_grad(m.i, m.j, x[0], x[1]);
                let lz = legendre(m.k, x[2]);
                vec![g2[0] * lz, g2[1] * lz, v2 * legendre_deriv(m.k, x[2])]
            }
        }
    }
}

/// Collapsed coordinate for the triangle: a = 2(1+x)/(1-y) - 1.
fn tri_collapse(x: f64, y: f64) -> f64 {
    if (1.0 - y).abs() > 1e-12 {
        2.0 * (1.0 + x) / (1.0 - y) - 1.0
    } else {
        -1.0
    }
}

fn tri_norm(i: usize) -> f64 {
    2f64.sqrt() * 2f64.powi(i as i32)
}

fn tri_mode(i: usize, j: usize, x: f64, y: f64) -> f64 {
    let a = tri_collapse(x, y);
    let b = y;
    let fa = jacobi(i, 0.0, 0.0, a);
    let gb = jacobi(j, 2.0 * i as f64 + 1.0, 0.0, b);
    tri_norm(i) * fa * gb * (0.5 * (1.0 - b)).powi(i as i32)
}

fn tri_mode_grad(i: usize, j: usize, x: f64, y: f64) -> [f64; 2] {
    let a = tri_collapse(x, y);
    let b = y;
    let alpha = 2.0 * i as f64 + 1.0;
    let fa = jacobi(i, 0.0, 0.0, a);
    let dfa = jacobi_deriv(i, 0.0, 0.0, a);
    let gb = jacobi(j, alpha, 0.0, b);
    let dgb = jacobi_deriv(j, alpha, 0.0, b);
    let hpow = |e: i32| -> f64 {
        if e < 0 {
            0.0
        } else {
            (0.5 * (1.0 - b)).powi(e)
        }
    };
    let s2 = tri_norm(i);
    // d/dx = dfa * (2/(1-b)) * gb * ((1-b)/2)^i; the pole cancels since
    // dfa = 0 for i = 0.
    let ddx = if i == 0 {
        0.0
    } else {
        s2 * dfa * gb * hpow(i as i32 - 1)
    };
    let mut ddy = if i == 0 {
        0.0
    } else {
        s2 * dfa * gb * 0.5 * (1.0 + a) * hpow(i as i32 - 1)
    };
    let tmp = dgb * hpow(i as i32)
        - if i == 0 {
            0.0
        } else {
            0.5 * i as f64 * gb * hpow(i as i32 - 1)
        };
    ddy += s2 * fa * tmp;
    [ddx, ddy]
}

/// Collapsed coordinates for the tetrahedron.
fn tet_collapse(x: &[f64]) -> (f64, f64, f64) {
    let (r, s, t) = (x[0], x[1], x[2]);
    let denom_a = -(s + t);
    let a = if denom_a.abs() > 1e-12 {
        2.0 * (1.0 + r) / denom_a - 1.0
    } else {
        -1.0
    };
    let b = if (1.0 - t).abs() > 1e-12 {
        2.0 * (1.0 + s) / (1.0 - t) - 1.0
    } else {
        -1.0
    };
    (a, b, t)
}

fn tet_norm(i: usize, j: usize) -> f64 {
    2.0 * 2f64.sqrt() * 2f64.powi((2 * i + j) as i32)
}

fn tet_mode(i: usize, j: usize, k: usize, x: &[f64]) -> f64 {
    let (a, b, c) = tet_collapse(x);
    let fa = jacobi(i, 0.0, 0.0, a);
    let gb = jacobi(j, 2.0 * i as f64 + 1.0, 0.0, b);
    let hc = jacobi(k, 2.0 * (i + j) as f64 + 2.0, 0.0, c);
    tet_norm(i, j)
        * fa
        * gb
        * hc
        * (0.5 * (1.0 - b)).powi(i as i32)
        * (0.5 * (1.0 - c)).powi((i + j) as i32)
}

fn tet_mode_grad(i: usize, j: usize, k: usize, x: &[f64]) -> Vec<f64> {
    let (a, b, c) = tet_collapse(x);
    let ai = 2.0 * i as f64 + 1.0;
    let aij = 2.0 * (i + j) as f64 + 2.0;
    let fa = jacobi(i, 0.0, 0.0, a);
    let dfa = jacobi_deriv(i, 0.0, 0.0, a);
    let gb = jacobi(j, ai, 0.0, b);
    let dgb = jacobi_deriv(j, ai, 0.0, b);
    let hc = jacobi(k, aij, 0.0, c);
    let dhc = jacobi_deriv(k, aij, 0.0, c);
    let powb = |e: i32| -> f64 {
        if e < 0 {
            0.0
        } else {
            (0.5 * (1.0 - b)).powi(e)
        }
    };
    let powc = |e: i32| -> f64 {
        if e < 0 {
            0.0
        } else {
            (0.5 * (1.0 - c)).powi(e)
        }
    };
    let n = tet_norm(i, j);
    let ii = i as i32;
    let ij = (i + j) as i32;

    // With Pb = (1-b)/2, Pc = (1-c)/2 the chain factors are
    // da/dx = 1/(Pb Pc), da/dy = da/dz = (1+a)/(2 Pb Pc),
    // db/dy = 1/Pc, db/dz = (1+b)/(2 Pc), dc/dz = 1.
    // Each 1/Pb, 1/Pc pole is cancelled by the Pb^i Pc^{i+j} factors;
    // the guarded powers keep every expression polynomial.

    let ddx = if i == 0 {
        0.0
    } else {
        n * dfa * gb * hc * powb(ii - 1) * powc(ij - 1)
    };

    let a_chain = if i == 0 {
        0.0
    } else {
        n * dfa * gb * hc * 0.5 * (1.0 + a) * powb(ii - 1) * powc(ij - 1)
    };
    let b_chain = if ij == 0 {
        0.0
    } else {
        let tmp_b = dgb * powb(ii)
            - if i == 0 {
                0.0
            } else {
                0.5 * i as f64 * gb * powb(ii - 1)
            };
        n * fa * hc * tmp_b * powc(ij - 1)
    };
    let ddy = a_chain + b_chain;

    let tmp_c = dhc * powc(ij)
        - if ij == 0 {
            0.0
        } else {
            0.5 * ij as f64 * hc * powc(ij - 1)
        };
    let ddz = a_chain + b_chain * 0.5 * (1.0 + b) + n * fa * gb * powb(ii) * tmp_c;

    vec![ddx, ddy, ddz]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refelem::cubature::volume_rule;

    #[test]
    fn gram_identity_all_elements() {
        for kind in ElementKind::all() {
            for p in 1..=3 {
                let basis = ModalBasis::new(kind, p);
                let rule = volume_rule(kind, 2 * p + 2).unwrap();
                let n = basis.len();
                let mut gram = vec![vec![0.0f64; n]; n];
                for (pt, w) in rule.points.iter().zip(&rule.weights) {
                    let v = basis.eval(pt);
                    for a in 0..n {
                        for b in 0..n {
                            gram[a][b] += w * v[a] * v[b];
                        }
                    }
                }
                for a in 0..n {
                    for b in 0..n {
                        let expect = if a == b { 1.0 } else { 0.0 };
                        assert!(
                            (gram[a][b] - expect).abs() < 1e-10,
                            "{kind:?} p={p} gram[{a}][{b}] = {}",
                            gram[a][b]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn quad_constant_mode_is_half() {
        let basis = ModalBasis::new(ElementKind::Quad, 1);
        let v = basis.eval(&[0.3, -0.4]);
        assert!((v[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let h = 1e-6;
        for kind in ElementKind::all() {
            let dim = kind.dim();
            let basis = ModalBasis::new(kind, 3);
            let pt: Vec<f64> = match kind {
                ElementKind::Quad | ElementKind::Hex => vec![0.21, -0.37, 0.11][..dim].to_vec(),
                ElementKind::Tri => vec![-0.42, -0.31],
                ElementKind::Tet => vec![-0.55, -0.47, -0.52],
                ElementKind::Pri => vec![-0.42, -0.31, 0.25],
            };
            let grads = basis.grad(&pt);
            for m in 0..basis.len() {
                for d in 0..dim {
                    let mut xp = pt.clone();
                    xp[d] += h;
                    let mut xm = pt.clone();
                    xm[d] -= h;
                    let fd = (basis.eval(&xp)[m] - basis.eval(&xm)[m]) / (2.0 * h);
                    assert!(
                        (grads[m][d] - fd).abs() < 2e-5 * (1.0 + fd.abs()),
                        "{kind:?} mode {m} dir {d}: {} vs fd {fd}",
                        grads[m][d]
                    );
                }
            }
        }
    }
}
