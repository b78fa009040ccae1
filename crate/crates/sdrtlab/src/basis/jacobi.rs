//! Orthonormal Jacobi polynomials on [-1, 1] and their derivatives.
//!
//! `jacobi(n, alpha, beta, x)` is normalized so that
//! ∫ (1-x)^alpha (1+x)^beta P̃_m P̃_n dx = δ_mn. Alpha and beta are
//! nonnegative integers throughout this crate.

fn gamma_int(v: f64) -> f64 {
    let mut acc = 1.0f64;
    let mut k = v;
    while k > 1.0 + 1e-12 {
        k -= 1.0;
        acc *= k;
    }
    acc
}

/// Orthonormal Jacobi polynomial value.
pub fn jacobi(n: usize, alpha: f64, beta: f64, x: f64) -> f64 {
    let gamma0 = 2f64.powf(alpha + beta + 1.0) / (alpha + beta + 1.0)
        * gamma_int(alpha + 1.0)
        * gamma_int(beta + 1.0)
        / gamma_int(alpha + beta + 1.0);
    let p0 = 1.0 / gamma0.sqrt();
    if n == 0 {
        return p0;
    }
    let gamma1 = (alpha + 1.0) * (beta + 1.0) / (alpha + beta + 3.0) * gamma0;
    let p1 = ((alpha + beta + 2.0) * x / 2.0 + (alpha - beta) / 2.0) / gamma1.sqrt();
    if n == 1 {
        return p1;
    }
    let mut aold =
        2.0 / (2.0 + alpha + beta) * ((alpha + 1.0) * (beta + 1.0) / (alpha + beta + 3.0)).sqrt();
    let mut pm1 = p0;
    let mut p = p1;
    for i in 1..n {
        let i = i as f64;
        let h1 = 2.0 * i + alpha + beta;
        let anew = 2.0 / (h1 + 2.0)
            * ((i + 1.0) * (i + 1.0 + alpha + beta) * (i + 1.0 + alpha) * (i + 1.0 + beta)
                / ((h1 + 1.0) * (h1 + 3.0)))
                .sqrt();
        let bnew = -(alpha * alpha - beta * beta) / (h1 * (h1 + 2.0));
        let pnext = ((x - bnew) * p - aold * pm1) / anew;
        pm1 = p;
        p = pnext;
        aold = anew;
    }
    p
}

/// Derivative of the orthonormal Jacobi polynomial.
pub fn jacobi_deriv(n: usize, alpha: f64, beta: f64, x: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    (n as f64 * (n as f64 + alpha + beta + 1.0)).sqrt() * jacobi(n - 1, alpha + 1.0, beta + 1.0, x)
}

/// Orthonormal Legendre polynomial (alpha = beta = 0).
pub fn legendre(n: usize, x: f64) -> f64 {
    jacobi(n, 0.0, 0.0, x)
}

pub fn legendre_deriv(n: usize, x: f64) -> f64 {
    jacobi_deriv(n, 0.0, 0.0, x)
}
