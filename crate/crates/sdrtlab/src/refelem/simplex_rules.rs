//! Symmetric quadrature point families on the reference triangle and
//! tetrahedron (Williams-Shunn style rules indexed by point count).
//!
//! Each rule is pinned by its symmetry-orbit structure and its cubature
//! degree. The orbit parameters and weights are recovered at first use by a
//! Gauss-Newton solve of the exact moment conditions for the symmetric
//! invariants, starting from close-packed-lattice seeds (or tabulated seeds
//! where the family has a free parameter). The moment residual of the final
//! rule is verified below 1e-13, which is also re-checked against brute-force
//! monomial integration when reference elements are built.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimplexKind {
    Tri,
    Tet,
}

impl SimplexKind {
    fn dim(self) -> usize {
        match self {
            SimplexKind::Tri => 2,
            SimplexKind::Tet => 3,
        }
    }
}

/// Symmetry orbit classes in barycentric coordinates.
#[derive(Debug, Clone)]
enum Orbit {
    /// Centroid (1 point, no parameters).
    Centroid,
    /// (a, a, 1-2a) permutations, 3 points.
    S21(f64),
    /// (a, b, 1-a-b) permutations, 6 points.
    S111(f64, f64),
    /// Tet (a, a, a, 1-3a) permutations, 4 points.
    S31(f64),
    /// Tet (a, a, 1/2-a, 1/2-a) permutations, 6 points.
    S22(f64),
    /// Tet (a, a, b, 1-2a-b) permutations, 12 points.
    S211(f64, f64),
}

impl Orbit {
    fn n_params(&self) -> usize {
        match self {
            Orbit::Centroid => 0,
            Orbit::S21(_) | Orbit::S31(_) | Orbit::S22(_) => 1,
            Orbit::S111(..) | Orbit::S211(..) => 2,
        }
    }

    fn params(&self) -> Vec<f64> {
        match *self {
            Orbit::Centroid => vec![],
            Orbit::S21(a) | Orbit::S31(a) | Orbit::S22(a) => vec![a],
            Orbit::S111(a, b) | Orbit::S211(a, b) => vec![a, b],
        }
    }

    fn with_params(&self, p: &[f64]) -> Orbit {
        match *self {
            Orbit::Centroid => Orbit::Centroid,
            Orbit::S21(_) => Orbit::S21(p[0]),
            Orbit::S31(_) => Orbit::S31(p[0]),
            Orbit::S22(_) => Orbit::S22(p[0]),
            Orbit::S111(..) => Orbit::S111(p[0], p[1]),
            Orbit::S211(..) => Orbit::S211(p[0], p[1]),
        }
    }

    /// Barycentric points of the orbit (for tri the 4th coordinate is unused).
    fn points(&self, kind: SimplexKind) -> Vec<[f64; 4]> {
        let gens: Vec<[f64; 4]> = match *self {
            Orbit::Centroid => match kind {
                SimplexKind::Tri => {
                    vec![[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]]
                }
                SimplexKind::Tet => vec![[0.25, 0.25, 0.25, 0.25]],
            },
            Orbit::S21(a) => vec![[a, a, 1.0 - 2.0 * a, 0.0]],
            Orbit::S111(a, b) => vec![[a, b, 1.0 - a - b, 0.0]],
            Orbit::S31(a) => vec![[a, a, a, 1.0 - 3.0 * a]],
            Orbit::S22(a) => vec![[a, a, 0.5 - a, 0.5 - a]],
            Orbit::S211(a, b) => vec![[a, a, b, 1.0 - 2.0 * a - b]],
        };
        let d = kind.dim() + 1;
        let mut out: Vec<[f64; 4]> = Vec::new();
        for g in gens {
            let mut idx: Vec<usize> = (0..d).collect();
            permute_all(&mut idx, 0, &mut |perm| {
                let mut pt = [0.0f64; 4];
                for (slot, &src) in perm.iter().enumerate() {
                    pt[slot] = g[src];
                }
                if !out
                    .iter()
                    .any(|q| q.iter().zip(pt.iter()).all(|(x, y)| (x - y).abs() < 1e-13))
                {
                    out.push(pt);
                }
            });
        }
        out
    }
}

fn permute_all(idx: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == idx.len() {
        f(idx);
        return;
    }
    for i in k..idx.len() {
        idx.swap(k, i);
        permute_all(idx, k + 1, f);
        idx.swap(k, i);
    }
}

/// A fully constructed symmetric rule: barycentric points and unit-sum weights.
#[derive(Debug, Clone)]
pub struct SimplexRule {
    pub kind: SimplexKind,
    pub degree: usize,
    /// Barycentric coordinates (dim+1 entries used).
    pub points: Vec<[f64; 4]>,
    /// Weights normalized so they sum to one.
    pub weights: Vec<f64>,
}

impl SimplexRule {
    /// Map barycentric points to reference-simplex coordinates
    /// (x_i >= -1, sum x_i <= 0).
    pub fn reference_points(&self) -> Vec<Vec<f64>> {
        let verts: Vec<Vec<f64>> = match self.kind {
            SimplexKind::Tri => vec![vec![-1.0, -1.0], vec![1.0, -1.0], vec![-1.0, 1.0]],
            SimplexKind::Tet => vec![
                vec![-1.0, -1.0, -1.0],
                vec![1.0, -1.0, -1.0],
                vec![-1.0, 1.0, -1.0],
                vec![-1.0, -1.0, 1.0],
            ],
        };
        let dim = self.kind.dim();
        self.points
            .iter()
            .map(|lam| {
                (0..dim)
                    .map(|d| {
                        lam.iter()
                            .take(dim + 1)
                            .zip(&verts)
                            .map(|(l, v)| l * v[d])
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Sparse multivariate polynomials in barycentric coordinates.
// ---------------------------------------------------------------------------

type Poly = BTreeMap<[u8; 4], f64>;

fn poly_one() -> Poly {
    BTreeMap::from([([0u8; 4], 1.0)])
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let mut e = *ea;
            for i in 0..4 {
                e[i] += eb[i];
            }
            *out.entry(e).or_insert(0.0) += ca * cb;
        }
    }
    out
}

fn poly_pow(p: &Poly, n: usize) -> Poly {
    let mut out = poly_one();
    for _ in 0..n {
        out = poly_mul(&out, p);
    }
    out
}

fn elementary_symmetric(nvars: usize, k: usize) -> Poly {
    // Sum over k-subsets of the product of variables.
    let mut out = Poly::new();
    let mut subset = vec![0usize; k];
    fn rec(
        start: usize,
        pos: usize,
        nvars: usize,
        k: usize,
        subset: &mut Vec<usize>,
        out: &mut Poly,
    ) {
        if pos == k {
            let mut e = [0u8; 4];
            for &v in subset.iter() {
                e[v] = 1;
            }
            *out.entry(e).or_insert(0.0) += 1.0;
            return;
        }
        for v in start..nvars {
            subset[pos] = v;
            rec(v + 1, pos + 1, nvars, k, subset, out);
        }
    }
    rec(0, 0, nvars, k, &mut subset, &mut out);
    out
}

/// Exact unit-measure integral of a barycentric monomial over the d-simplex:
/// d! * prod(alpha_i!) / (|alpha| + d)!.
fn monomial_integral(dim: usize, e: &[u8; 4]) -> f64 {
    let total: u32 = e.iter().map(|&x| x as u32).sum();
    let mut num = 1.0f64;
    for &ei in e.iter() {
        for k in 2..=ei as u64 {
            num *= k as f64;
        }
    }
    for k in 2..=dim as u64 {
        num *= k as f64;
    }
    let mut den = 1.0f64;
    for k in 2..=(total as u64 + dim as u64) {
        den *= k as f64;
    }
    num / den
}

fn poly_integral(dim: usize, p: &Poly) -> f64 {
    p.iter().map(|(e, c)| c * monomial_integral(dim, e)).sum()
}

fn poly_eval(p: &Poly, lam: &[f64; 4]) -> f64 {
    p.iter()
        .map(|(e, c)| {
            let mut v = *c;
            for i in 0..4 {
                for _ in 0..e[i] {
                    v *= lam[i];
                }
            }
            v
        })
        .sum()
}

/// Invariant monomials e2^a e3^b (e4^c) with weighted degree <= deg.
fn invariant_basis(kind: SimplexKind, deg: usize) -> Vec<Poly> {
    let nvars = kind.dim() + 1;
    let e2 = elementary_symmetric(nvars, 2);
    let e3 = elementary_symmetric(nvars, 3);
    let e4 = if nvars == 4 {
        elementary_symmetric(nvars, 4)
    } else {
        Poly::new()
    };
    let mut out = Vec::new();
    for a in 0..=deg / 2 {
        for b in 0..=deg / 3 {
            let cmax = if nvars == 4 { deg / 4 } else { 0 };
            for c in 0..=cmax {
                if 2 * a + 3 * b + 4 * c > deg {
                    continue;
                }
                let mut p = poly_pow(&e2, a);
                if b > 0 {
                    p = poly_mul(&p, &poly_pow(&e3, b));
                }
                if c > 0 {
                    p = poly_mul(&p, &poly_pow(&e4, c));
                }
                out.push(p);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Rule construction.
// ---------------------------------------------------------------------------

struct RuleSpec {
    kind: SimplexKind,
    degree: usize,
    orbits: Vec<Orbit>,
    weights: Vec<f64>,
    /// Run the secondary next-degree optimization (families with free
    /// parameters seeded from the lattice rather than tabulated values).
    optimize: bool,
    /// Pin the first orbit's parameter during the solve: selects one member
    /// of an underdetermined family deterministically.
    freeze_first_param: bool,
}

fn pack(spec: &RuleSpec) -> Vec<f64> {
    let mut p = Vec::new();
    for (i, (o, w)) in spec.orbits.iter().zip(&spec.weights).enumerate() {
        p.push(*w);
        let mut params = o.params();
        if i == 0 && spec.freeze_first_param && !params.is_empty() {
            params.remove(0);
        }
        p.extend(params);
    }
    p
}

fn unpack(spec: &RuleSpec, p: &[f64]) -> (Vec<Orbit>, Vec<f64>) {
    let mut orbits = Vec::new();
    let mut weights = Vec::new();
    let mut i = 0;
    for (oi, o) in spec.orbits.iter().enumerate() {
        weights.push(p[i]);
        i += 1;
        let frozen = oi == 0 && spec.freeze_first_param;
        let np = o.n_params() - if frozen { 1 } else { 0 };
        let mut params: Vec<f64> = Vec::with_capacity(o.n_params());
        if frozen {
            params.push(o.params()[0]);
        }
        params.extend_from_slice(&p[i..i + np]);
        orbits.push(o.with_params(&params));
        i += np;
    }
    (orbits, weights)
}

/// Parameters are feasible when every orbit point stays strictly inside the
/// simplex and all weights are positive.
fn feasible(spec: &RuleSpec, p: &[f64]) -> bool {
    let (orbits, weights) = unpack(spec, p);
    if weights.iter().any(|&w| w <= 0.0) {
        return false;
    }
    let d = spec.kind.dim() + 1;
    for o in &orbits {
        for pt in o.points(spec.kind) {
            for &l in pt.iter().take(d) {
                if !(l > 1e-4 && l < 1.0 - 1e-4) {
                    return false;
                }
            }
        }
    }
    true
}

fn residual(spec: &RuleSpec, invariants: &[Poly], exact: &[f64], p: &[f64]) -> DVector<f64> {
    let (orbits, weights) = unpack(spec, p);
    let mut r = DVector::zeros(invariants.len());
    for (j, inv) in invariants.iter().enumerate() {
        let mut s = 0.0;
        for (o, w) in orbits.iter().zip(&weights) {
            for pt in o.points(spec.kind) {
                s += w * poly_eval(inv, &pt);
            }
        }
        r[j] = s - exact[j];
    }
    r
}

fn numeric_jacobian(
    spec: &RuleSpec,
    invariants: &[Poly],
    exact: &[f64],
    p: &[f64],
) -> DMatrix<f64> {
    let m = invariants.len();
    let n = p.len();
    let mut jac = DMatrix::zeros(m, n);
    let h = 1e-7;
    for col in 0..n {
        let mut pp = p.to_vec();
        pp[col] += h;
        let rp = residual(spec, invariants, exact, &pp);
        pp[col] -= 2.0 * h;
        let rm = residual(spec, invariants, exact, &pp);
        for row in 0..m {
            jac[(row, col)] = (rp[row] - rm[row]) / (2.0 * h);
        }
    }
    jac
}

fn gauss_newton(
    spec: &RuleSpec,
    invariants: &[Poly],
    exact: &[f64],
    p: &mut Vec<f64>,
) -> Result<(), Error> {
    for _ in 0..200 {
        let r = residual(spec, invariants, exact, p);
        let rnorm = r.amax();
        if rnorm < 1e-15 {
            return Ok(());
        }
        let jac = numeric_jacobian(spec, invariants, exact, p);
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let step = svd
            .solve(&r, smax * 1e-12)
            .map_err(|e| Error::Numerical(format!("quadrature rule solve: {e}")))?;
        // Damped update with backtracking, rejecting infeasible iterates.
        let mut lambda = 1.0;
        let base: Vec<f64> = p.clone();
        loop {
            for (pi, (b, s)) in p.iter_mut().zip(base.iter().zip(step.iter())) {
                *pi = b - lambda * s;
            }
            let rn = residual(spec, invariants, exact, p).amax();
            if (feasible(spec, p) && rn < rnorm) || lambda < 1e-6 {
                if lambda < 1e-6 && !feasible(spec, p) {
                    *p = base;
                }
                break;
            }
            lambda *= 0.5;
        }
    }
    let rfinal = residual(spec, invariants, exact, p).amax();
    if rfinal < 1e-13 {
        Ok(())
    } else {
        Err(Error::Numerical(format!(
            "quadrature rule moment solve stalled at residual {rfinal:.3e}"
        )))
    }
}

/// Secondary objective on the exact-moment manifold: reduce the residual of
/// the next-degree invariants, re-projecting after every descent step.
fn optimize_next_degree(
    spec: &RuleSpec,
    invariants: &[Poly],
    exact: &[f64],
    next_inv: &[Poly],
    next_exact: &[f64],
    p: &mut Vec<f64>,
) -> Result<(), Error> {
    let objective = |p: &[f64]| -> f64 {
        let (orbits, weights) = unpack(spec, p);
        next_inv
            .iter()
            .zip(next_exact)
            .map(|(inv, ex)| {
                let mut s = 0.0;
                for (o, w) in orbits.iter().zip(&weights) {
                    for pt in o.points(spec.kind) {
                        s += w * poly_eval(inv, &pt);
                    }
                }
                (s - ex) * (s - ex)
            })
            .sum()
    };
    let mut eta = 0.05;
    let mut best = objective(p);
    for _ in 0..300 {
        // Numeric gradient of the secondary objective.
        let mut grad = vec![0.0; p.len()];
        let h = 1e-7;
        for i in 0..p.len() {
            let mut pp = p.clone();
            pp[i] += h;
            let fp = objective(&pp);
            pp[i] -= 2.0 * h;
            let fm = objective(&pp);
            grad[i] = (fp - fm) / (2.0 * h);
        }
        let gnorm: f64 = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < 1e-14 {
            break;
        }
        let mut trial: Vec<f64> = p
            .iter()
            .zip(&grad)
            .map(|(pi, g)| pi - eta * g / gnorm)
            .collect();
        if gauss_newton(spec, invariants, exact, &mut trial).is_err() || !feasible(spec, &trial) {
            eta *= 0.5;
            if eta < 1e-6 {
                break;
            }
            continue;
        }
        let f = objective(&trial);
        if f < best {
            best = f;
            *p = trial;
            eta *= 1.1;
        } else {
            eta *= 0.5;
            if eta < 1e-6 {
                break;
            }
        }
    }
    Ok(())
}

fn build_rule(mut spec: RuleSpec) -> Result<SimplexRule, Error> {
    let invariants = invariant_basis(spec.kind, spec.degree);
    let exact: Vec<f64> = invariants
        .iter()
        .map(|p| poly_integral(spec.kind.dim(), p))
        .collect();
    let mut params = pack(&spec);
    gauss_newton(&spec, &invariants, &exact, &mut params)?;
    if spec.optimize {
        let all_next = invariant_basis(spec.kind, spec.degree + 1);
        let next: Vec<Poly> = all_next
            .into_iter()
            .filter(|p| {
                let deg: u32 = p
                    .keys()
                    .map(|e| e.iter().map(|&x| x as u32).sum())
                    .max()
                    .unwrap_or(0);
                deg as usize > spec.degree
            })
            .collect();
        let next_exact: Vec<f64> = next
            .iter()
            .map(|p| poly_integral(spec.kind.dim(), p))
            .collect();
        optimize_next_degree(&spec, &invariants, &exact, &next, &next_exact, &mut params)?;
    }
    let (orbits, weights) = unpack(&spec, &params);
    spec.orbits = orbits;
    spec.weights = weights;

    let mut points = Vec::new();
    let mut wts = Vec::new();
    for (o, w) in spec.orbits.iter().zip(&spec.weights) {
        for pt in o.points(spec.kind) {
            for (i, l) in pt.iter().take(spec.kind.dim() + 1).enumerate() {
                if !(*l > 1e-8 && *l < 1.0) {
                    return Err(Error::Numerical(format!(
                        "quadrature point escaped the simplex interior (coord {i} = {l})"
                    )));
                }
            }
            points.push(pt);
            wts.push(*w);
        }
    }
    if wts.iter().any(|&w| w <= 0.0) {
        return Err(Error::Numerical("negative quadrature weight".into()));
    }
    let rule = SimplexRule {
        kind: spec.kind,
        degree: spec.degree,
        points,
        weights: wts,
    };
    verify_rule(&rule)?;
    Ok(rule)
}

/// Brute-force monomial exactness check of a constructed rule.
pub fn verify_rule(rule: &SimplexRule) -> Result<(), Error> {
    let dim = rule.kind.dim();
    let nvars = dim + 1;
    // All barycentric monomials of total degree <= rule.degree in the first
    // `dim` coordinates (the remaining one is dependent).
    let mut exps: Vec<[u8; 4]> = Vec::new();
    collect_exponents(dim, rule.degree, &mut [0u8; 4], 0, &mut exps);
    for e in exps {
        let exact = monomial_integral(dim, &e);
        let got: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(lam, w)| {
                let mut v = *w;
                for i in 0..nvars {
                    for _ in 0..e[i] {
                        v *= lam[i];
                    }
                }
                v
            })
            .sum();
        if (got - exact).abs() > 1e-13 {
            return Err(Error::Numerical(format!(
                "cubature exactness violated for exponent {e:?}: {got} vs {exact}"
            )));
        }
    }
    Ok(())
}

fn collect_exponents(
    dim: usize,
    deg: usize,
    cur: &mut [u8; 4],
    pos: usize,
    out: &mut Vec<[u8; 4]>,
) {
    if pos == dim {
        out.push(*cur);
        return;
    }
    let used: usize = cur.iter().take(pos).map(|&x| x as usize).sum();
    for e in 0..=(deg - used) {
        cur[pos] = e as u8;
        collect_exponents(dim, deg, cur, pos + 1, out);
        cur[pos] = 0;
    }
}

// ---------------------------------------------------------------------------
// Rule catalogue.
// ---------------------------------------------------------------------------

fn spec_for(kind: SimplexKind, n: usize) -> Option<RuleSpec> {
    // Lattice-derived seeds: vertices/edges shrunk toward the centroid.
    match (kind, n) {
        (SimplexKind::Tri, 1) => Some(RuleSpec {
            kind,
            degree: 1,
            orbits: vec![Orbit::Centroid],
            weights: vec![1.0],
            optimize: false,
            freeze_first_param: false,
        }),
        (SimplexKind::Tri, 3) => Some(RuleSpec {
            kind,
            degree: 2,
            orbits: vec![Orbit::S21(0.16)],
            weights: vec![1.0 / 3.0],
            optimize: false,
            freeze_first_param: false,
        }),
        (SimplexKind::Tri, 6) => Some(RuleSpec {
            kind,
            degree: 4,
            orbits: vec![Orbit::S21(0.09), Orbit::S21(0.44)],
            weights: vec![0.11, 0.22],
            optimize: false,
            freeze_first_param: false,
        }),
        (SimplexKind::Tri, 10) => Some(RuleSpec {
            kind,
            degree: 5,
            orbits: vec![Orbit::Centroid, Orbit::S21(0.07), Orbit::S111(0.18, 0.75)],
            weights: vec![0.16, 0.04, 0.06],
            optimize: true,
            freeze_first_param: false,
        }),
        (SimplexKind::Tri, 15) => Some(RuleSpec {
            kind,
            degree: 7,
            orbits: vec![
                Orbit::S21(0.045),
                Orbit::S21(0.46),
                Orbit::S21(0.22),
                Orbit::S111(0.12, 0.74),
            ],
            weights: vec![0.02, 0.08, 0.1, 0.06],
            optimize: true,
            freeze_first_param: false,
        }),
        (SimplexKind::Tri, 21) => Some(RuleSpec {
            kind,
            degree: 8,
            orbits: vec![
                Orbit::S21(0.03),
                Orbit::S21(0.42),
                Orbit::S21(0.27),
                Orbit::S111(0.08, 0.75),
                Orbit::S111(0.25, 0.65),
            ],
            weights: vec![0.015, 0.06, 0.07, 0.035, 0.05],
            optimize: true,
            freeze_first_param: false,
        }),
        (SimplexKind::Tet, 1) => Some(RuleSpec {
            kind,
            degree: 1,
            orbits: vec![Orbit::Centroid],
            weights: vec![1.0],
            optimize: false,
            freeze_first_param: false,
        }),
        (SimplexKind::Tet, 4) => Some(RuleSpec {
            kind,
            degree: 2,
            orbits: vec![Orbit::S31(0.14)],
            weights: vec![0.25],
            optimize: false,
            freeze_first_param: false,
        }),
        (SimplexKind::Tet, 10) => Some(RuleSpec {
            kind,
            degree: 3,
            // Seeded from the published close-packed 10-point rule.
            orbits: vec![
                Orbit::S31(0.0738349017262234),
                Orbit::S22(0.0937556561049114),
            ],
            weights: vec![0.0476331348432089, 0.1349112434378610],
            optimize: false,
            freeze_first_param: false,
        }),
        (SimplexKind::Tet, 20) => Some(RuleSpec {
            kind,
            degree: 5,
            // The 20-point family has one degree of freedom; pinning the
            // near-vertex orbit at the published close-packed coordinate
            // makes the moment system square and selects the stable member
            // (the family goes spatially unstable inside the staggered
            // scheme not far above this value).
            orbits: vec![
                Orbit::S31(0.0323525947272439),
                Orbit::S31(0.31),
                Orbit::S211(0.0585, 0.257),
            ],
            weights: vec![0.005, 0.1, 0.047],
            optimize: false,
            freeze_first_param: true,
        }),
        (SimplexKind::Tet, 35) => Some(RuleSpec {
            kind,
            degree: 6,
            orbits: vec![
                Orbit::Centroid,
                Orbit::S31(0.04),
                Orbit::S22(0.06),
                Orbit::S211(0.06, 0.44),
                Orbit::S211(0.22, 0.04),
            ],
            weights: vec![0.05, 0.01, 0.03, 0.04, 0.03],
            optimize: true,
            freeze_first_param: false,
        }),
        _ => None,
    }
}

/// Walk the one-parameter family of the 20-point tetrahedron rule by
/// pinning the near-vertex orbit coordinate and solving the remaining
/// six unknowns (the moment system is then square).
pub fn tet20_family(a1: f64) -> Result<SimplexRule, Error> {
    let spec = RuleSpec {
        kind: SimplexKind::Tet,
        degree: 5,
        orbits: vec![Orbit::S31(a1), Orbit::S31(0.31), Orbit::S211(0.0585, 0.257)],
        weights: vec![0.005, 0.1, 0.047],
        optimize: false,
        freeze_first_param: true,
    };
    build_rule(spec)
}

/// Same walk for the 15-point triangle rule keyed by its near-vertex orbit.
pub fn tri15_family(a1: f64) -> Result<SimplexRule, Error> {
    let spec = RuleSpec {
        kind: SimplexKind::Tri,
        degree: 7,
        orbits: vec![
            Orbit::S21(a1),
            Orbit::S21(0.474),
            Orbit::S21(0.242),
            Orbit::S111(0.048, 0.744),
        ],
        weights: vec![0.024, 0.072, 0.127, 0.055],
        optimize: false,
        freeze_first_param: true,
    };
    build_rule(spec)
}

fn rule_cache() -> &'static std::sync::Mutex<BTreeMap<(u8, usize), SimplexRule>> {
    static CACHE: OnceLock<std::sync::Mutex<BTreeMap<(u8, usize), SimplexRule>>> = OnceLock::new();
    CACHE.get_or_init(|| std::sync::Mutex::new(BTreeMap::new()))
}

/// Replace the cached n-point rule with an explicitly constructed family
/// member (experimental knob for point-set studies).
pub fn override_rule(rule: SimplexRule) {
    let key = (
        if rule.kind == SimplexKind::Tri {
            0u8
        } else {
            1
        },
        rule.points.len(),
    );
    rule_cache().lock().unwrap().insert(key, rule);
}

/// Retrieve (building on first use) the n-point symmetric rule.
pub fn simplex_rule(kind: SimplexKind, n: usize) -> Result<SimplexRule, Error> {
    let key = (if kind == SimplexKind::Tri { 0u8 } else { 1 }, n);
    if let Some(r) = rule_cache().lock().unwrap().get(&key) {
        return Ok(r.clone());
    }
    let spec = spec_for(kind, n).ok_or_else(|| {
        let supported = match kind {
            SimplexKind::Tri => "1, 3, 6, 10, 15, 21",
            SimplexKind::Tet => "1, 4, 10, 20, 35",
        };
        Error::Config(format!(
            "unsupported symmetric rule size {n} for {kind:?}; supported sizes: {supported}"
        ))
    })?;
    let rule = build_rule(spec)?;
    assert_eq!(
        rule.points.len(),
        n,
        "orbit structure does not produce {n} points"
    );
    rule_cache().lock().unwrap().insert(key, rule.clone());
    Ok(rule)
}

/// Reference-coordinate point set of the n-point rule.
pub fn simplex_points(kind: SimplexKind, n: usize) -> Result<Vec<Vec<f64>>, Error> {
    Ok(simplex_rule(kind, n)?.reference_points())
}
