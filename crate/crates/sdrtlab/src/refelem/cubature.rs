//! Exact cubature on the reference elements via tensor Gauss rules, using
//! collapsed (Duffy) coordinates with Gauss-Jacobi weights on simplexes.
//!
//! `volume_rule(kind, degree)` integrates polynomials of the requested total
//! degree exactly; the same machinery supplies face rules for the lifting
//! operators and interface checks.

use super::gauss::{gauss_jacobi, gauss_legendre};
use super::ElementKind;
use crate::error::Error;

/// Cubature rule: points in reference coordinates and weights summing to the
/// reference element measure.
#[derive(Debug, Clone)]
pub struct Cubature {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl Cubature {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(x))
            .sum()
    }
}

fn n_for(degree: usize) -> usize {
    degree / 2 + 1
}

/// Triangle rule exact for total degree `degree`, on x,y >= -1, x + y <= 0.
pub fn tri_rule(degree: usize) -> Result<Cubature, Error> {
    let n = n_for(degree);
    let (xa, wa) = gauss_legendre(n)?;
    let (xb, wb) = gauss_jacobi(n, 1.0, 0.0)?;
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (b, wbj) in xb.iter().zip(&wb) {
        for (a, wal) in xa.iter().zip(&wa) {
            // x = (1+a)(1-b)/2 - 1, y = b; dx dy = (1-b)/2 da db and the
            // Jacobi weight (1-b) absorbs the area factor with a half left.
            let x = (1.0 + a) * (1.0 - b) / 2.0 - 1.0;
            points.push(vec![x, *b]);
            weights.push(wal * wbj * 0.5);
        }
    }
    Ok(Cubature { points, weights })
}

/// Tetrahedron rule on x_i >= -1, sum x_i <= 0.
pub fn tet_rule(degree: usize) -> Result<Cubature, Error> {
    let n = n_for(degree);
    let (xa, wa) = gauss_legendre(n)?;
    let (xb, wb) = gauss_jacobi(n, 1.0, 0.0)?;
    let (xc, wc) = gauss_jacobi(n, 2.0, 0.0)?;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (c, wcj) in xc.iter().zip(&wc) {
        for (b, wbj) in xb.iter().zip(&wb) {
            for (a, waj) in xa.iter().zip(&wa) {
                let x = (1.0 + a) * (1.0 - b) * (1.0 - c) / 4.0 - 1.0;
                let y = (1.0 + b) * (1.0 - c) / 2.0 - 1.0;
                let z = *c;
                points.push(vec![x, y, z]);
                // Jacobian (1-b)(1-c)^2 / 8; the Jacobi weights carry
                // (1-b)(1-c)^2 already.
                weights.push(waj * wbj * wcj / 8.0);
            }
        }
    }
    Ok(Cubature { points, weights })
}

/// Tensor-product rule on [-1,1]^dim.
pub fn tensor_rule(dim: usize, degree: usize) -> Result<Cubature, Error> {
    let n = n_for(degree);
    let (x, w) = gauss_legendre(n)?;
    let mut points = vec![vec![]];
    let mut weights = vec![1.0f64];
    for _ in 0..dim {
        let mut np = Vec::new();
        let mut nw = Vec::new();
        for (p, pw) in points.iter().zip(&weights) {
            for (xi, wi) in x.iter().zip(&w) {
                let mut q = p.clone();
                q.push(*xi);
                np.push(q);
                nw.push(pw * wi);
            }
        }
        points = np;
        weights = nw;
    }
    Ok(Cubature { points, weights })
}

/// Prism rule: triangle in (x, y) times [-1, 1] in z.
pub fn pri_rule(degree: usize) -> Result<Cubature, Error> {
    let tri = tri_rule(degree)?;
    let n = n_for(degree);
    let (xz, wz) = gauss_legendre(n)?;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (zp, zw) in xz.iter().zip(&wz) {
        for (tp, tw) in tri.points.iter().zip(&tri.weights) {
            points.push(vec![tp[0], tp[1], *zp]);
            weights.push(tw * zw);
        }
    }
    Ok(Cubature { points, weights })
}

/// Volume rule for any reference element, exact at the given total degree.
pub fn volume_rule(kind: ElementKind, degree: usize) -> Result<Cubature, Error> {
    match kind {
        ElementKind::Quad => tensor_rule(2, degree),
        ElementKind::Hex => tensor_rule(3, degree),
        ElementKind::Tri => tri_rule(degree),
        ElementKind::Tet => tet_rule(degree),
        ElementKind::Pri => pri_rule(degree),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measures() {
        assert!((tri_rule(4).unwrap().integrate(|_| 1.0) - 2.0).abs() < 1e-13);
        assert!((tet_rule(4).unwrap().integrate(|_| 1.0) - 4.0 / 3.0).abs() < 1e-13);
        assert!((pri_rule(4).unwrap().integrate(|_| 1.0) - 4.0).abs() < 1e-13);
        assert!((tensor_rule(3, 5).unwrap().integrate(|_| 1.0) - 8.0).abs() < 1e-13);
    }

    #[test]
    fn tri_monomials_exact() {
        let deg = 7;
        let rule = tri_rule(deg).unwrap();
        for i in 0..=deg {
            for j in 0..=(deg - i) {
                let got = rule.integrate(|x| x[0].powi(i as i32) * x[1].powi(j as i32));
                // Reference: map to unit simplex u,v >= 0, u+v <= 1 with
                // x = 2u - 1, y = 2v - 1 and integrate by the factorial formula.
                let exact = unit_tri_monomial(i, j);
                assert!((got - exact).abs() < 1e-12, "x^{i} y^{j}: {got} vs {exact}");
            }
        }
    }

    fn unit_tri_monomial(i: usize, j: usize) -> f64 {
        // ∫ over reference triangle of x^i y^j via binomial expansion of
        // x = 2u-1, y = 2v-1 against ∫ u^p v^q = p! q! / (p+q+2)! and the
        // Jacobian (area 2 vs 1/2) factor of 4.
        let mut total = 0.0;
        for p in 0..=i {
            for q in 0..=j {
                let cb = binom(i, p) * binom(j, q);
                let sign = if (i - p + j - q) % 2 == 0 { 1.0 } else { -1.0 };
                let coeff = cb * sign * 2f64.powi((p + q) as i32);
                total += coeff * fact(p) * fact(q) / fact(p + q + 2);
            }
        }
        4.0 * total
    }

    fn binom(n: usize, k: usize) -> f64 {
        fact(n) / (fact(k) * fact(n - k))
    }

    fn fact(n: usize) -> f64 {
        (1..=n).map(|v| v as f64).product::<f64>().max(1.0)
    }

    #[test]
    fn tet_monomials_exact() {
        let deg = 6;
        let rule = tet_rule(deg).unwrap();
        // Spot-check a few monomials against high-degree recursive reference.
        let refrule = tet_rule(deg + 6).unwrap();
        for (i, j, k) in [(2, 2, 2), (3, 1, 2), (6, 0, 0), (1, 2, 3)] {
            let f = |x: &[f64]| x[0].powi(i) * x[1].powi(j) * x[2].powi(k);
            let got = rule.integrate(f);
            let reference = refrule.integrate(f);
            assert!((got - reference).abs() < 1e-12);
        }
    }
}
