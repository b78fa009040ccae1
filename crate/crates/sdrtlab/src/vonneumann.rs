//! Von Neumann analysis on the pattern unit: the reduced RHS Jacobian from
//! block-circulant probing of the real residual pipeline, combined-mode
//! dissipation/dispersion measures, eigenmode diagnostics, aliasing limits
//! and temporal stability bounds.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Error;
use crate::linalg::{complex_eigen, expm, CMat, CVec};
use crate::physics::EquationSet;
use crate::refelem::cubature::volume_rule;
use crate::refelem::ElementKind;
use crate::solver::{Discretization, Integrator};
use crate::Scheme;

/// Linear equation kind for the analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VnEquation {
    Advection,
    Diffusion,
}

impl VnEquation {
    pub fn name(self) -> &'static str {
        match self {
            VnEquation::Advection => "advection",
            VnEquation::Diffusion => "diffusion",
        }
    }
}

/// Unit propagation direction from the two wave angles.
pub fn unit_direction(theta0: f64, theta1: f64, dim: usize) -> [f64; 3] {
    if dim == 2 {
        [theta0.cos(), theta0.sin(), 0.0]
    } else {
        [
            theta0.cos() * theta1.cos(),
            theta0.sin(),
            theta0.cos() * theta1.sin(),
        ]
    }
}

/// Wavenumber beyond which the discrete mode aliases: min over the nonzero
/// direction components of pi / |1_k,i|.
pub fn aliasing_limit(theta0: f64, theta1: f64, dim: usize) -> f64 {
    let dir = unit_direction(theta0, theta1, dim);
    let mut lim = f64::INFINITY;
    for d in dir.iter().take(dim) {
        if d.abs() > 1e-12 {
            lim = lim.min(std::f64::consts::PI / d.abs());
        }
    }
    lim
}

/// Reduced RHS Jacobian: neighbor blocks keyed by pattern offset.
pub struct ReducedJacobian {
    pub scheme: Scheme,
    pub kind: ElementKind,
    pub degree: usize,
    pub equation: VnEquation,
    pub theta0: f64,
    pub theta1: f64,
    /// Block size: solution points per pattern.
    pub n: usize,
    pub blocks: Vec<([i64; 3], DMatrix<f64>)>,
    /// Pattern-relative solution point coordinates (h = 1).
    pub sol_coords: Vec<[f64; 3]>,
    /// Interpolation of pattern dofs to the degree-10 cubature points of each
    /// subcell, with det-weighted cubature weights, for the norm integrals.
    norm_interp: Vec<DMatrix<f64>>,
    norm_wts: Vec<f64>,
    dets: Vec<f64>,
    n_sub: usize,
    n_sol: usize,
}

/// Probe the per-pattern-offset blocks of a linear residual by applying unit
/// impulses on the root pattern. The probing mesh must keep distinct
/// neighbor layers (5+ patterns per axis for single-pass equations, 7+ for
/// two-pass ones). Scalar equations only.
pub fn probe_blocks(disc: &Discretization) -> Result<Vec<([i64; 3], DMatrix<f64>)>, Error> {
    assert!(disc.eq.is_linear() && disc.n_vars == 1);
    let dim = disc.mesh.dim;
    let n_mesh = disc.mesh.cells_per_axis;
    let n_sub = disc.mesh.n_sub();
    let n_sol = disc.ops.n_sol;
    let n = n_sub * n_sol;
    let n_cells = disc.mesh.n_cells();
    let mut ws = disc.workspace();
    let mut dudt = DMatrix::zeros(n_sol, n_cells);
    let mut u = DMatrix::zeros(n_sol, n_cells);

    // The root pattern is lattice (0,0,0): cells 0..n_sub.
    let mut blocks: std::collections::BTreeMap<[i64; 3], DMatrix<f64>> =
        std::collections::BTreeMap::new();
    let half = n_mesh as i64 / 2;
    let scale_guard = 1e-14 / disc.mesh.h.max(1e-6);
    for sub in 0..n_sub {
        for s in 0..n_sol {
            u.fill(0.0);
            u[(s, sub)] = 1.0;
            disc.residual(&u, &mut ws, &mut dudt)?;
            let col = sub * n_sol + s;
            for cell in 0..n_cells {
                let pat = disc.mesh.pattern_index(cell);
                // An impulse at the root responds at pattern p; the block
                // J[a] describing the influence of neighbor a on the root is,
                // by translation invariance, the response at p = -a.
                let mut offset = [0i64; 3];
                for d in 0..dim {
                    let mut o = pat[d] as i64;
                    if o > half {
                        o -= n_mesh as i64;
                    }
                    offset[d] = -o;
                }
                let subc = cell % n_sub;
                for row_s in 0..n_sol {
                    let v = dudt[(row_s, cell)];
                    if v.abs() > scale_guard {
                        let block = blocks.entry(offset).or_insert_with(|| DMatrix::zeros(n, n));
                        block[(subc * n_sol + row_s, col)] = v;
                    }
                }
            }
        }
    }
    Ok(blocks.into_iter().collect())
}

/// Probe the reduced Jacobian by applying the residual to unit impulses on
/// the root pattern of a small periodic mesh (5 patterns per axis for
/// advection, 7 for diffusion so that both neighbor layers stay distinct).
pub fn probe_reduced_jacobian(
    scheme: Scheme,
    kind: ElementKind,
    degree: usize,
    equation: VnEquation,
    theta0: f64,
    theta1: f64,
) -> Result<ReducedJacobian, Error> {
    let dim = kind.dim();
    let (eq, n_mesh) = match equation {
        VnEquation::Advection => (
            EquationSet::LinAdv {
                velocity: unit_direction(theta0, theta1, dim),
            },
            5usize,
        ),
        VnEquation::Diffusion => (EquationSet::LinDiff { diffusivity: 1.0 }, 7usize),
    };
    let disc = Discretization::new(
        kind,
        degree,
        scheme,
        n_mesh,
        1.0,
        [true, true, true],
        eq,
        0.0,
        0.0,
        None,
    )?;
    let n_sub = disc.mesh.n_sub();
    let n_sol = disc.ops.n_sol;
    let n = n_sub * n_sol;
    let blocks = probe_blocks(&disc)?;
    // Validate the neighbor-layer structure.
    let max_layer = match equation {
        VnEquation::Advection => 1,
        VnEquation::Diffusion => 2,
    };
    for (off, block) in &blocks {
        let reach = off.iter().map(|o| o.abs()).max().unwrap();
        if reach > max_layer && block.amax() > 1e-11 {
            return Err(Error::Numerical(format!(
                "unexpected coupling at pattern offset {off:?} (|block| = {:.2e})",
                block.amax()
            )));
        }
    }

    let sol_coords: Vec<[f64; 3]> = (0..n_sub)
        .flat_map(|sub| (0..n_sol).map(move |s| (sub, s)))
        .map(|(sub, s)| disc.mesh.sol_point(sub, s))
        .collect();

    // Norm machinery: degree-10 cubature per subcell.
    let rule = volume_rule(kind, 10)?;
    let interp = disc.ops.basis.interp_matrix(&rule.points);
    let dets: Vec<f64> = (0..n_sub).map(|sub| disc.mesh.shapes[sub].det).collect();
    Ok(ReducedJacobian {
        scheme,
        kind,
        degree,
        equation,
        theta0,
        theta1,
        n,
        blocks,
        sol_coords,
        norm_interp: vec![interp],
        norm_wts: rule.weights,
        dets,
        n_sub,
        n_sol,
    })
}

impl ReducedJacobian {
    /// Assemble G(kappa h) for the configured angles.
    pub fn assemble(&self, kappa_h: f64) -> CMat {
        let dim = self.kind.dim();
        let dir = unit_direction(self.theta0, self.theta1, dim);
        let mut kvec = [0.0; 3];
        for d in 0..dim {
            kvec[d] = kappa_h * dir[d];
        }
        self.assemble_vec(&kvec)
    }

    /// Assemble G for an arbitrary wave vector (h = 1 units).
    pub fn assemble_vec(&self, kvec: &[f64; 3]) -> CMat {
        let dim = self.kind.dim();
        let mut g = CMat::zeros(self.n, self.n);
        for (off, block) in &self.blocks {
            let phase: f64 = (0..dim).map(|d| kvec[d] * off[d] as f64).sum();
            let f = Complex64::new(0.0, phase).exp();
            for c in 0..self.n {
                for r in 0..self.n {
                    let v = block[(r, c)];
                    if v != 0.0 {
                        g[(r, c)] += f * v;
                    }
                }
            }
        }
        g
    }

    /// Fourier-mode projection vector at the pattern solution points.
    pub fn initial_condition(&self, kappa_h: f64) -> CVec {
        let dim = self.kind.dim();
        let dir = unit_direction(self.theta0, self.theta1, dim);
        CVec::from_iterator(
            self.n,
            self.sol_coords.iter().map(|x| {
                let phase: f64 = (0..dim).map(|d| kappa_h * dir[d] * x[d]).sum();
                Complex64::new(0.0, phase).exp()
            }),
        )
    }

    /// Pattern-integral L2 norm of a dof vector (degree-10 cubature).
    pub fn norm(&self, u: &CVec) -> f64 {
        let interp = &self.norm_interp[0];
        let nq = self.norm_wts.len();
        let mut total = 0.0;
        for sub in 0..self.n_sub {
            for q in 0..nq {
                let mut v = Complex64::new(0.0, 0.0);
                for s in 0..self.n_sol {
                    v += Complex64::new(interp[(q, s)], 0.0) * u[sub * self.n_sol + s];
                }
                total += self.dets[sub] * self.norm_wts[q] * v.norm_sqr();
            }
        }
        total.sqrt()
    }

    /// Pattern-integral inner product <a, b>.
    pub fn inner(&self, a: &CVec, b: &CVec) -> Complex64 {
        let interp = &self.norm_interp[0];
        let nq = self.norm_wts.len();
        let mut total = Complex64::new(0.0, 0.0);
        for sub in 0..self.n_sub {
            for q in 0..nq {
                let mut va = Complex64::new(0.0, 0.0);
                let mut vb = Complex64::new(0.0, 0.0);
                for s in 0..self.n_sol {
                    let w = Complex64::new(interp[(q, s)], 0.0);
                    va += w * a[sub * self.n_sol + s];
                    vb += w * b[sub * self.n_sol + s];
                }
                total += Complex64::new(self.dets[sub] * self.norm_wts[q], 0.0) * va * vb.conj();
            }
        }
        total
    }
}

/// Time integration used by the analysis: the exact exponential or the
/// stability-polynomial approximants of the RK schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalysisIntegrator {
    Exponential,
    Rk(Integrator),
}

impl AnalysisIntegrator {
    pub fn name(self) -> String {
        match self {
            AnalysisIntegrator::Exponential => "exponential".into(),
            AnalysisIntegrator::Rk(i) => i.name().into(),
        }
    }
}

/// Apply the stability polynomial to tau * lambda.
pub fn rk_amplification(integrator: Integrator, z: Complex64) -> Complex64 {
    let coeffs = integrator.stability_coeffs();
    let mut acc = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc * z + Complex64::new(*c, 0.0);
    }
    acc
}

/// Combined-mode dissipation/dispersion measures after m iterations.
#[derive(Debug, Clone, Copy)]
pub struct CombinedMode {
    pub kappa_h: f64,
    pub m: u64,
    pub tau: f64,
    /// Numerical temporal wavenumber (combined-mode).
    pub re_omega: f64,
    pub im_omega: f64,
    /// Error estimator components |Re(w - w_ex)|/|w_ex|, |Im(w - w_ex)|/|w_ex|.
    pub re_err: f64,
    pub im_err: f64,
}

/// Propagate the Fourier mode m steps and measure dissipation/dispersion.
pub fn combined_mode(
    rj: &ReducedJacobian,
    kappa_h: f64,
    integrator: AnalysisIntegrator,
    tau: f64,
    m: u64,
) -> Result<CombinedMode, Error> {
    let g = rj.assemble(kappa_h);
    let u0 = rj.initial_condition(kappa_h);
    let um: CVec = match integrator {
        AnalysisIntegrator::Exponential => {
            let e = expm(&(&g * Complex64::new(m as f64 * tau, 0.0)))?;
            &e * &u0
        }
        AnalysisIntegrator::Rk(rk) => {
            let (vals, w) = complex_eigen(&g)?;
            let winv = w
                .clone()
                .full_piv_lu()
                .try_inverse()
                .ok_or_else(|| Error::Numerical("eigenvector matrix singular".into()))?;
            let gamma = &winv * &u0;
            let mut um = CVec::zeros(rj.n);
            for (k, lambda) in vals.iter().enumerate() {
                let amp = rk_amplification(rk, Complex64::new(tau, 0.0) * lambda).powu(m as u32);
                um += w.column(k) * (gamma[k] * amp);
            }
            um
        }
    };

    let n0 = rj.norm(&u0);
    let nm = rj.norm(&um);
    if nm == 0.0 {
        return Err(Error::Numerical(
            "propagated mode vanished; measure undefined".into(),
        ));
    }
    let mt = m as f64 * tau;
    // Exact temporal wavenumber in reduced units.
    let dim = rj.kind.dim();
    let dir = unit_direction(rj.theta0, rj.theta1, dim);
    let dir_dot: f64 = (0..dim).map(|d| dir[d] * dir[d]).sum();
    let (omega_re, omega_im) = match rj.equation {
        VnEquation::Advection => (kappa_h * dir_dot, 0.0),
        VnEquation::Diffusion => (0.0, kappa_h * kappa_h),
    };
    let im_omega = -(nm / n0).ln() / mt;
    // arg <U(m) e^{i omega m tau}, U0>
    let phase = Complex64::new(0.0, omega_re * mt).exp();
    let um_shifted = &um * phase;
    let ip = rj.inner(&um_shifted, &u0);
    let re_omega = omega_re - ip.arg() / mt;
    let omega_mag = (omega_re * omega_re + omega_im * omega_im).sqrt();
    Ok(CombinedMode {
        kappa_h,
        m,
        tau,
        re_omega,
        im_omega,
        re_err: (re_omega - omega_re).abs() / omega_mag,
        im_err: (im_omega - omega_im).abs() / omega_mag,
    })
}

/// Eigenmode diagnostics at one wavenumber.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub kappa_h: f64,
    pub eigenvalues: Vec<Complex64>,
    /// Modal energies gamma = W^{-1} U(0).
    pub energies: Vec<Complex64>,
    /// Index of the physical mode (largest |gamma|).
    pub physical: usize,
    /// Indices tied (within 1e-12) for the largest propagator magnitude.
    pub radius_modes: Vec<usize>,
    /// Largest propagator magnitude.
    pub spectral_radius: f64,
    /// True when the physical mode attains the spectral radius.
    pub physical_is_radius: bool,
}

pub fn eigen_diagnostics(
    rj: &ReducedJacobian,
    kappa_h: f64,
    integrator: AnalysisIntegrator,
    tau: f64,
) -> Result<SpectralResult, Error> {
    let g = rj.assemble(kappa_h);
    let u0 = rj.initial_condition(kappa_h);
    let (vals, w) = complex_eigen(&g)?;
    let winv = w
        .clone()
        .full_piv_lu()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("eigenvector matrix singular".into()))?;
    let gamma = &winv * &u0;
    // Invariant: W gamma reconstructs U0.
    let recon = &w * &gamma;
    let err = (&recon - &u0).norm();
    if err > 1e-8 * u0.norm().max(1.0) {
        return Err(Error::Numerical(format!(
            "eigenvector reconstruction error {err:.2e}"
        )));
    }
    let prop_mag: Vec<f64> = vals
        .iter()
        .map(|l| match integrator {
            AnalysisIntegrator::Exponential => (tau * l.re).exp(),
            AnalysisIntegrator::Rk(rk) => rk_amplification(rk, Complex64::new(tau, 0.0) * l).norm(),
        })
        .collect();
    let radius = prop_mag.iter().cloned().fold(0.0f64, f64::max);
    let radius_modes: Vec<usize> = prop_mag
        .iter()
        .enumerate()
        .filter(|(_, &m)| (radius - m).abs() <= 1e-12 * radius.max(1.0))
        .map(|(i, _)| i)
        .collect();
    let physical = gamma
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let physical_is_radius = radius_modes.contains(&physical)
        || (radius - prop_mag[physical]).abs() <= 1e-9 * radius.max(1.0);
    Ok(SpectralResult {
        kappa_h,
        eigenvalues: vals,
        energies: gamma.iter().cloned().collect(),
        physical,
        radius_modes,
        spectral_radius: radius,
        physical_is_radius,
    })
}

/// Outcome of the temporal stability search.
#[derive(Debug, Clone, Copy)]
pub enum TauMax {
    Stable(f64),
    /// Spatially unstable: the largest real part found over the sweep.
    SpatiallyUnstable(f64),
}

/// Largest real part of lambda(G) over the standard wavenumber grid.
pub fn spatial_stability(rj: &ReducedJacobian, kappa_points: usize) -> Result<f64, Error> {
    let grid = kappa_grid(rj, kappa_points);
    let worst = grid
        .par_iter()
        .map(|&kh| {
            let g = rj.assemble(kh);
            crate::linalg::complex_eigenvalues(&g)
                .map(|vals| vals.iter().map(|l| l.re).fold(f64::MIN, f64::max))
        })
        .try_reduce(|| f64::MIN, |a, b| Ok(a.max(b)))?;
    Ok(worst)
}

fn kappa_grid(rj: &ReducedJacobian, kappa_points: usize) -> Vec<f64> {
    let lim = aliasing_limit(rj.theta0, rj.theta1, rj.kind.dim());
    let mut grid: Vec<f64> = (1..=kappa_points)
        .map(|j| 2.0 * lim * j as f64 / kappa_points as f64)
        .collect();
    grid.push(lim);
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    grid
}

/// Largest temporally stable tau for an RK integrator: bisection on the
/// spectral radius of the amplification over the wavenumber grid.
pub fn tau_max(
    rj: &ReducedJacobian,
    integrator: Integrator,
    kappa_points: usize,
) -> Result<TauMax, Error> {
    let grid = kappa_grid(rj, kappa_points);
    // Eigenvalues once per wavenumber; the bisection then only re-evaluates
    // the stability polynomial.
    let eigs: Vec<Vec<Complex64>> = grid
        .par_iter()
        .map(|&kh| crate::linalg::complex_eigenvalues(&rj.assemble(kh)))
        .collect::<Result<_, _>>()?;
    let max_re = eigs
        .iter()
        .flat_map(|v| v.iter().map(|l| l.re))
        .fold(f64::MIN, f64::max);
    if max_re > 1e-8 {
        return Ok(TauMax::SpatiallyUnstable(max_re));
    }
    let stable = |tau: f64| -> bool {
        let limit = 1.0 + 1e-10;
        eigs.iter().all(|vals| {
            vals.iter()
                .all(|l| rk_amplification(integrator, Complex64::new(tau, 0.0) * l).norm() <= limit)
        })
    };
    let mut lo = 0.0f64;
    let mut hi = 0.05f64;
    let mut grow = 0;
    while stable(hi) {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > 40 {
            return Err(Error::Numerical(
                "temporal stability bound not found below tau = 5e10".into(),
            ));
        }
    }
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if stable(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(TauMax::Stable(0.5 * (lo + hi)))
}

/// One row of the sweep CSV.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub kind: ElementKind,
    pub degree: usize,
    pub equation: VnEquation,
    pub theta0: f64,
    pub theta1: f64,
    pub kappa_h: f64,
    pub m: u64,
    pub tau: f64,
    pub integrator: String,
    pub re_omega_err: f64,
    pub im_omega_err: f64,
    pub spectral_radius: f64,
    pub physical_eq_radius: bool,
}

/// Dissipation/dispersion sweep over a wavenumber list.
pub fn sweep(
    rj: &ReducedJacobian,
    kappas: &[f64],
    integrator: AnalysisIntegrator,
    tau: f64,
    m: u64,
) -> Result<Vec<SweepRow>, Error> {
    kappas
        .par_iter()
        .map(|&kh| {
            let cm = combined_mode(rj, kh, integrator, tau, m)?;
            let diag = eigen_diagnostics(rj, kh, integrator, tau)?;
            Ok(SweepRow {
                scheme: rj.scheme,
                kind: rj.kind,
                degree: rj.degree,
                equation: rj.equation,
                theta0: rj.theta0,
                theta1: rj.theta1,
                kappa_h: kh,
                m,
                tau,
                integrator: integrator.name(),
                re_omega_err: cm.re_err,
                im_omega_err: cm.im_err,
                spectral_radius: diag.spectral_radius,
                physical_eq_radius: diag.physical_is_radius,
            })
        })
        .collect()
}

/// Least-squares slope of log(err) against log(lambda/h) over resolved
/// wavelengths; used by the order-of-accuracy checks.
pub fn fit_order_slope(samples: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, e)| *e > 0.0 && e.is_finite())
        .map(|(loh, e)| (loh.ln(), e.ln()))
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    // err ~ (lambda/h)^(-slope): report the positive order.
    -((n * sxy - sx * sy) / (n * sxx - sx * sx))
}
