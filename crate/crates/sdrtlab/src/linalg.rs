//! Dense linear algebra helpers: pivoted inversion with condition reporting,
//! eigendecomposition of general complex matrices and a scaling-and-squaring
//! matrix exponential.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::Error;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;
pub type RMat = DMatrix<f64>;

/// Inverse through full-pivot LU together with the 2-norm condition number.
pub fn inverse_with_cond(a: &RMat) -> Result<(RMat, f64), Error> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "inverse of a non-square matrix");
    let svd = a.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    let inv = a
        .clone()
        .full_piv_lu()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular matrix in basis construction".into()))?;
    Ok((inv, cond))
}

/// Eigenvalues of a general complex matrix via the Schur decomposition.
pub fn complex_eigenvalues(a: &CMat) -> Result<Vec<Complex64>, Error> {
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite entries in eigen input".into()));
    }
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), 1e-15, 100_000)
        .ok_or_else(|| Error::Numerical("Schur iteration failed to converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..a.nrows()).map(|i| t[(i, i)]).collect())
}

/// Full eigendecomposition (values and right eigenvectors) of a general
/// complex matrix. Columns of the returned matrix are unit-norm eigenvectors.
///
/// The Schur form `A = Q T Q^H` with complex arithmetic is genuinely upper
/// triangular, so eigenvectors come from triangular back-substitution on `T`.
pub fn complex_eigen(a: &CMat) -> Result<(Vec<Complex64>, CMat), Error> {
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite entries in eigen input".into()));
    }
    let n = a.nrows();
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), 1e-15, 100_000)
        .ok_or_else(|| Error::Numerical("Schur iteration failed to converge".into()))?;
    let (q, t) = schur.unpack();
    let tnorm = t
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let small = tnorm * 1e-300_f64.max(f64::EPSILON);

    let mut vects = CMat::zeros(n, n);
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        let lambda = t[(k, k)];
        for item in y.iter_mut().take(n) {
            *item = Complex64::new(0.0, 0.0);
        }
        y[k] = Complex64::new(1.0, 0.0);
        // Solve (T[0..k,0..k] - lambda I) y = -T[0..k,k] backwards.
        for i in (0..k).rev() {
            let mut rhs = -t[(i, k)];
            for j in (i + 1)..k {
                rhs -= t[(i, j)] * y[j];
            }
            let mut diag = t[(i, i)] - lambda;
            if diag.norm() < small {
                // Perturb near-defective pivots the way triangular eigenvector
                // solvers conventionally do.
                diag = Complex64::new(small, 0.0);
            }
            y[i] = rhs / diag;
        }
        let mut v = CVec::zeros(n);
        for (i, yi) in y.iter().enumerate().take(k + 1) {
            v += q.column(i) * *yi;
        }
        let norm = v.norm();
        if norm > 0.0 {
            v /= Complex64::new(norm, 0.0);
        }
        vects.set_column(k, &v);
    }
    let values = (0..n).map(|i| t[(i, i)]).collect();
    Ok((values, vects))
}

/// Matrix exponential by scaling and squaring with a Padé(13,13) approximant.
pub fn expm(a: &CMat) -> Result<CMat, Error> {
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical(
            "NaN entries passed to matrix exponential".into(),
        ));
    }
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    const THETA13: f64 = 5.371920351148152;
    let norm1 = one_norm(a);
    let s = if norm1 > THETA13 {
        (norm1 / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * Complex64::new(0.5f64.powi(s), 0.0);

    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let c = |x: f64| Complex64::new(x, 0.0);
    let id = CMat::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let u_inner = &a6 * (&a6 * c(B[13]) + &a4 * c(B[11]) + &a2 * c(B[9]))
        + &a6 * c(B[7])
        + &a4 * c(B[5])
        + &a2 * c(B[3])
        + &id * c(B[1]);
    let u = &a * &u_inner;
    let v = &a6 * (&a6 * c(B[12]) + &a4 * c(B[10]) + &a2 * c(B[8]))
        + &a6 * c(B[6])
        + &a4 * c(B[4])
        + &a2 * c(B[2])
        + &id * c(B[0]);

    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut x = lhs
        .full_piv_lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("singular Padé denominator in expm".into()))?;
    for _ in 0..s {
        x = &x * &x;
    }
    Ok(x)
}

fn one_norm(a: &CMat) -> f64 {
    let mut best = 0.0f64;
    for j in 0..a.ncols() {
        let s: f64 = a.column(j).iter().map(|z| z.norm()).sum();
        best = best.max(s);
    }
    best
}

/// `m`-th power of a complex matrix by binary powering.
pub fn matrix_power(a: &CMat, m: u64) -> CMat {
    let n = a.nrows();
    let mut result = CMat::identity(n, n);
    let mut base = a.clone();
    let mut e = m;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_cmat(n: usize, seed: u64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMat::from_fn(n, n, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    #[test]
    fn eigen_reconstructs_action() {
        let a = random_cmat(14, 7);
        let (vals, vecs) = complex_eigen(&a).unwrap();
        let anorm = a.norm();
        for (k, lambda) in vals.iter().enumerate() {
            let v = vecs.column(k).clone_owned();
            let resid = (&a * &v - &v * *lambda).norm();
            assert!(
                resid <= 1e-10 * anorm,
                "eigenpair {k} residual {resid:.3e} exceeds 1e-10*|A|"
            );
        }
    }

    #[test]
    fn expm_zero_is_identity() {
        let z = CMat::zeros(5, 5);
        let e = expm(&z).unwrap();
        assert!((e - CMat::identity(5, 5)).norm() < 1e-15);
    }

    #[test]
    fn expm_diagonal_phases() {
        let n = 6;
        let mut a = CMat::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = Complex64::new(0.0, 0.3 * i as f64);
        }
        let e = expm(&a).unwrap();
        for i in 0..n {
            let expect = Complex64::new(0.0, 0.3 * i as f64).exp();
            assert!((e[(i, i)] - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn expm_matches_eigen_oracle() {
        // Random contraction: compare against W exp(D) W^{-1}.
        let mut a = random_cmat(10, 3);
        a *= Complex64::new(0.4, 0.0);
        let e = expm(&a).unwrap();
        let (vals, w) = complex_eigen(&a).unwrap();
        let winv = w.clone().full_piv_lu().try_inverse().unwrap();
        let mut d = CMat::zeros(10, 10);
        for (i, v) in vals.iter().enumerate() {
            d[(i, i)] = v.exp();
        }
        let oracle = &w * d * winv;
        let err = (&e - &oracle).norm() / e.norm();
        assert!(err < 1e-11, "expm vs eigen oracle mismatch {err:.3e}");
    }

    #[test]
    fn expm_rejects_nan() {
        let mut a = CMat::zeros(3, 3);
        a[(0, 0)] = Complex64::new(f64::NAN, 0.0);
        assert!(expm(&a).is_err());
    }

    #[test]
    fn matrix_power_matches_repeated_multiplication() {
        let a = random_cmat(8, 11) * Complex64::new(0.3, 0.0);
        let mut expect = CMat::identity(8, 8);
        for _ in 0..13 {
            expect = &expect * &a;
        }
        let got = matrix_power(&a, 13);
        assert!((got - expect).norm() < 1e-12);
    }
}
