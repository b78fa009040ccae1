//! One-dimensional Gauss quadrature on [-1, 1].

use crate::error::Error;

/// Legendre polynomial value and derivative at `x`.
fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0f64;
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p1 = x;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss-Legendre nodes and weights, nodes strictly increasing.
///
/// Newton iteration from the Chebyshev-based initial guess; fails if any root
/// has not converged to |P_n(x)| < 1e-14 after 100 iterations.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>), Error> {
    assert!(n >= 1, "gauss_legendre requires n >= 1");
    if n == 1 {
        return Ok((vec![0.0], vec![2.0]));
    }
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut converged = false;
        for _ in 0..100 {
            let (p, dp) = legendre_with_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if p.abs() < 1e-14 && dx.abs() < 1e-15 {
                converged = true;
                break;
            }
        }
        let (p, dp) = legendre_with_deriv(n, x);
        if !converged && p.abs() >= 1e-14 {
            return Err(Error::Numerical(format!(
                "Gauss-Legendre Newton iteration failed for n = {n}, root {i}"
            )));
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        weights[i] = w;
        nodes[n - 1 - i] = -x;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, dp) = legendre_with_deriv(n, 0.0);
        weights[n / 2] = 2.0 / (dp * dp);
    }
    Ok((nodes, weights))
}

fn gamma_int(k: f64) -> f64 {
    // Positive integer arguments only.
    let mut acc = 1.0f64;
    let mut v = k;
    while v > 1.0 + 1e-12 {
        v -= 1.0;
        acc *= v;
    }
    acc
}

/// Gauss-Jacobi nodes and weights for the weight (1-x)^alpha (1+x)^beta,
/// by the Golub-Welsch eigenvalue method on the Jacobi recurrence matrix.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<(Vec<f64>, Vec<f64>), Error> {
    assert!(n >= 1);
    let ab = alpha + beta;
    let mut diag = vec![0.0f64; n];
    let mut off = vec![0.0f64; n.saturating_sub(1)];
    diag[0] = (beta - alpha) / (ab + 2.0);
    for k in 1..n {
        let kf = k as f64;
        diag[k] = (beta * beta - alpha * alpha) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0));
        let b = if k == 1 {
            4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab)
                / ((2.0 * kf + ab).powi(2) * (2.0 * kf + ab + 1.0) * (2.0 * kf + ab - 1.0))
        };
        off[k - 1] = b.sqrt();
    }
    let mut j = nalgebra::DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        j[(k, k)] = diag[k];
        if k + 1 < n {
            j[(k, k + 1)] = off[k];
            j[(k + 1, k)] = off[k];
        }
    }
    let eig = nalgebra::SymmetricEigen::new(j);
    let mu0 =
        2f64.powf(ab + 1.0) * gamma_int(alpha + 1.0) * gamma_int(beta + 1.0) / gamma_int(ab + 2.0);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let x = eig.eigenvalues[k];
            let v0 = eig.eigenvectors[(0, k)];
            (x, mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let (nodes, weights): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let s: f64 = weights.iter().sum();
    if (s - mu0).abs() > 1e-10 * mu0 {
        return Err(Error::Numerical(format!(
            "Gauss-Jacobi weights inconsistent for n = {n}, alpha = {alpha}: sum {s} vs {mu0}"
        )));
    }
    Ok((nodes, weights))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_small_rules() {
        let (x, w) = gauss_legendre(1).unwrap();
        assert_eq!(x, vec![0.0]);
        assert_eq!(w, vec![2.0]);
        let (x, _) = gauss_legendre(2).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!((x[0] + r).abs() < 1e-15 && (x[1] - r).abs() < 1e-15);
    }

    #[test]
    fn gl5_integrates_x8() {
        // Exact monomial integral of x^8 over [-1,1] is 2/9.
        let (x, w) = gauss_legendre(5).unwrap();
        let s: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(8)).sum();
        assert!((s - 2.0 / 9.0).abs() < 1e-14, "got {s}");
    }

    #[test]
    fn gl_weights_positive_and_sum_two() {
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n).unwrap();
            assert!(w.iter().all(|&wi| wi > 0.0));
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13);
            for i in 1..n {
                assert!(x[i] > x[i - 1]);
            }
        }
    }

    #[test]
    fn gauss_jacobi_monomials() {
        // weight (1-x)^1: integrate x^k (1-x) exactly for k within 2n-1.
        let (x, w) = gauss_jacobi(6, 1.0, 0.0).unwrap();
        for k in 0..=9u32 {
            let got: f64 = x
                .iter()
                .zip(&w)
                .map(|(xi, wi)| wi * xi.powi(k as i32))
                .sum();
            // Analytic: ∫_{-1}^1 x^k (1-x) dx
            let int_xk = if k % 2 == 0 {
                2.0 / (k as f64 + 1.0)
            } else {
                0.0
            };
            let int_xk1 = if (k + 1) % 2 == 0 {
                2.0 / (k as f64 + 2.0)
            } else {
                0.0
            };
            let expect = int_xk - int_xk1;
            assert!((got - expect).abs() < 1e-13, "k={k}: {got} vs {expect}");
        }
    }

    #[test]
    fn gauss_jacobi_alpha2() {
        let (x, w) = gauss_jacobi(7, 2.0, 0.0).unwrap();
        // ∫ (1-x)^2 dx = 8/3
        let s: f64 = w.iter().sum();
        assert!((s - 8.0 / 3.0).abs() < 1e-12);
        let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi * xi).sum();
        // ∫ x^2 (1-x)^2 = ∫ x^2 - 2x^3 + x^4 = 2/3 + 2/5
        assert!((got - (2.0 / 3.0 + 2.0 / 5.0)).abs() < 1e-12, "{got}");
    }
}
