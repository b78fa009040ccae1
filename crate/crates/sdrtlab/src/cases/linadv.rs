//! Linear advection-diffusion benchmark: order-of-accuracy tables and the
//! FR-SDRT/SDRT equivalence check.
//!
//! The domain is [0, 2 pi L]^dim, periodic, with initial condition
//! sin(sum x_i / L), all advection velocity components equal to c0 and the
//! diffusivity set by the Peclet number Pe = |c| / (mu L).
//!
//! Two propagation paths produce the same numbers: real time stepping, and
//! an exact block-circulant fast path (the initial condition is a single
//! Fourier-mode pair, so the discrete evolution reduces to powers of the
//! stepped reduced operator at that wave vector). The fast path makes the
//! 3D rows desk-tractable; the equivalence of the two paths is covered by a
//! dedicated test.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::Error;
use crate::linalg::{matrix_power, CMat, CVec};
use crate::physics::EquationSet;
use crate::refelem::cubature::volume_rule;
use crate::refelem::ElementKind;
use crate::solver::{step, Discretization, Integrator};
use crate::vonneumann::{probe_blocks, rk_amplification};
use crate::Scheme;

#[derive(Debug, Clone)]
pub struct LinAdvDiffConfig {
    pub kind: ElementKind,
    pub degree: usize,
    pub scheme: Scheme,
    /// Patterns per axis.
    pub n: usize,
    /// None runs pure advection; Some(pe) sets mu = |c| / (pe * length_scale).
    pub peclet: Option<f64>,
    /// Advection velocity component (all axes equal).
    pub c0: f64,
    /// Length scale L of the domain [0, 2 pi L]^dim.
    pub length_scale: f64,
    /// CFL number fixing the step size (advective and diffusive both below).
    pub tau: f64,
    pub integrator: Integrator,
    /// Periods to integrate.
    pub m_periods: u64,
    pub spectral: bool,
}

impl LinAdvDiffConfig {
    pub fn benchmark_defaults(kind: ElementKind, scheme: Scheme, n: usize) -> Self {
        LinAdvDiffConfig {
            kind,
            degree: 3,
            scheme,
            n,
            peclet: Some(10.0),
            c0: 1.0,
            length_scale: 1.0,
            tau: 2.5e-3,
            integrator: Integrator::Rk54,
            m_periods: 1,
            spectral: kind.dim() == 3,
        }
    }

    pub fn speed(&self) -> f64 {
        self.c0 * (self.kind.dim() as f64).sqrt()
    }

    pub fn diffusivity(&self) -> f64 {
        match self.peclet {
            Some(pe) => self.speed() / (pe * self.length_scale),
            None => 0.0,
        }
    }

    /// Mesh spacing.
    pub fn h(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.length_scale / self.n as f64
    }

    /// Step size from the CFL number: both the advective and diffusive
    /// numbers stay at or below tau.
    pub fn dt(&self) -> f64 {
        let h = self.h();
        let dt_adv = self.tau * h / self.speed();
        let mu = self.diffusivity();
        if mu > 0.0 {
            dt_adv.min(self.tau * h * h / mu)
        } else {
            dt_adv
        }
    }

    /// One period: the initial field translates back onto itself.
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.length_scale / self.c0
    }

    fn equation(&self) -> EquationSet {
        let velocity = [
            self.c0,
            self.c0,
            if self.kind.dim() == 3 { self.c0 } else { 0.0 },
        ];
        match self.peclet {
            Some(_) => EquationSet::LinAdvDiff {
                velocity,
                diffusivity: self.diffusivity(),
            },
            None => EquationSet::LinAdv { velocity },
        }
    }
}

#[derive(Debug, Clone)]
pub struct LinAdvDiffResult {
    /// L2 error against the analytic solution after m periods (Peclet mode),
    /// or the self-referenced m-period norm (pure advection mode).
    pub l2: f64,
    pub n_steps: u64,
    pub dt: f64,
}

pub fn run_linadvdiff(cfg: &LinAdvDiffConfig) -> Result<LinAdvDiffResult, Error> {
    if cfg.spectral {
        run_spectral(cfg)
    } else {
        run_timestepping(cfg)
    }
}

/// Exact decay rate and phase speed of the analytic solution.
fn analytic_factors(cfg: &LinAdvDiffConfig, t: f64) -> (f64, f64) {
    let dim = cfg.kind.dim() as f64;
    let l = cfg.length_scale;
    let decay = (-cfg.diffusivity() * dim * t / (l * l)).exp();
    // Phase advance of sin(sum (x_i - c0 t)/L) relative to sin(sum x_i/L).
    let phase = dim * cfg.c0 * t / l;
    (decay, phase)
}

fn run_timestepping(cfg: &LinAdvDiffConfig) -> Result<LinAdvDiffResult, Error> {
    let disc = Discretization::new(
        cfg.kind,
        cfg.degree,
        cfg.scheme,
        cfg.n,
        cfg.h(),
        [true, true, true],
        cfg.equation(),
        0.0,
        0.0,
        None,
    )?;
    let l = cfg.length_scale;
    let mut state = disc.project(|x, _| ((x[0] + x[1] + x[2]) / l).sin());
    let mut ws = disc.workspace();
    let period = cfg.period();
    let dt_nom = cfg.dt();
    let steps_per_period = (period / dt_nom).ceil() as u64;
    let dt = period / steps_per_period as f64;

    let rule = volume_rule(cfg.kind, 2 * cfg.degree + 4)?;
    let interp = disc.ops.basis.interp_matrix(&rule.points);

    let l2_against = |u: &DMatrix<f64>, reference: &dyn Fn(&[f64; 3]) -> f64| -> f64 {
        let vals = &interp * u;
        let mut total = 0.0;
        let mut vol = 0.0;
        for cell in 0..disc.mesh.n_cells() {
            let det = disc.mesh.shape_of(cell).det;
            for (q, w) in rule.weights.iter().enumerate() {
                let xq = cubature_point(&disc, cell, &rule.points[q]);
                let diff = vals[(q, cell)] - reference(&xq);
                total += det * w * diff * diff;
                vol += det * w;
            }
        }
        (total / vol).sqrt()
    };

    match cfg.peclet {
        Some(_) => {
            // Analytic-reference norm after m periods.
            for _ in 0..cfg.m_periods * steps_per_period {
                step(&disc, cfg.integrator, &mut state, dt, &mut ws)?;
            }
            let (decay, phase) = analytic_factors(cfg, state.t);
            let reference = move |x: &[f64; 3]| decay * ((x[0] + x[1] + x[2]) / l - phase).sin();
            Ok(LinAdvDiffResult {
                l2: l2_against(&state.u, &reference),
                n_steps: cfg.m_periods * steps_per_period,
                dt,
            })
        }
        None => {
            // Self-referenced norm between periods m-1 and m.
            for _ in 0..(cfg.m_periods - 1) * steps_per_period {
                step(&disc, cfg.integrator, &mut state, dt, &mut ws)?;
            }
            let prev = state.u.clone();
            for _ in 0..steps_per_period {
                step(&disc, cfg.integrator, &mut state, dt, &mut ws)?;
            }
            let vals_prev = &interp * &prev;
            let vals_now = &interp * &state.u;
            let mut total = 0.0;
            let mut vol = 0.0;
            for cell in 0..disc.mesh.n_cells() {
                let det = disc.mesh.shape_of(cell).det;
                for (q, w) in rule.weights.iter().enumerate() {
                    let diff = vals_now[(q, cell)] - vals_prev[(q, cell)];
                    total += det * w * diff * diff;
                    vol += det * w;
                }
            }
            Ok(LinAdvDiffResult {
                l2: (total / vol).sqrt(),
                n_steps: cfg.m_periods * steps_per_period,
                dt,
            })
        }
    }
}

fn cubature_point(disc: &Discretization, cell: usize, xref: &[f64]) -> [f64; 3] {
    let shape = disc.mesh.shape_of(cell);
    let o = disc.mesh.origins[cell];
    let mut out = [0.0f64; 3];
    for d in 0..3 {
        out[d] = o[d] + shape.offset[d];
        for (k, xr) in xref.iter().enumerate() {
            out[d] += shape.jac[d][k] * xr;
        }
    }
    out
}

/// Spectral fast path: probe the physical-scale blocks on a 7-pattern mesh,
/// power the stepped reduced operator at the initial wave vector, and
/// evaluate the norms on one pattern.
fn run_spectral(cfg: &LinAdvDiffConfig) -> Result<LinAdvDiffResult, Error> {
    let h = cfg.h();
    let l = cfg.length_scale;
    let probe_n = 7usize;
    let disc = Discretization::new(
        cfg.kind,
        cfg.degree,
        cfg.scheme,
        probe_n,
        h,
        [true, true, true],
        cfg.equation(),
        0.0,
        0.0,
        None,
    )?;
    let blocks = probe_blocks(&disc)?;
    let dim = cfg.kind.dim();
    let n_sub = disc.mesh.n_sub();
    let n_sol = disc.ops.n_sol;
    let n = n_sub * n_sol;

    // Wave vector of the initial condition: kappa = (1,..,1)/L.
    let kvec_h = [h / l, h / l, if dim == 3 { h / l } else { 0.0 }];
    let mut g = CMat::zeros(n, n);
    for (off, block) in &blocks {
        let phase: f64 = (0..dim).map(|d| kvec_h[d] * off[d] as f64).sum();
        let f = Complex64::new(0.0, phase).exp();
        for c in 0..n {
            for r in 0..n {
                let v = block[(r, c)];
                if v != 0.0 {
                    g[(r, c)] += f * v;
                }
            }
        }
    }

    let period = cfg.period();
    let dt_nom = cfg.dt();
    let steps_per_period = (period / dt_nom).ceil() as u64;
    let dt = period / steps_per_period as f64;

    // Stepped operator: the stability polynomial of the integrator applied
    // to dt G (exact for linear autonomous systems), powered over the run.
    let coeffs = cfg.integrator.stability_coeffs();
    let mut estep = CMat::zeros(n, n);
    let mut power = CMat::identity(n, n);
    for c in coeffs {
        estep += &power * Complex64::new(c, 0.0);
        power = &power * &g * Complex64::new(dt, 0.0);
    }

    // Initial nodal values of e^{i kappa x} on the root pattern.
    let mut u0 = CVec::zeros(n);
    for sub in 0..n_sub {
        for s in 0..n_sol {
            let x = disc.mesh.sol_point(sub, s);
            let phase: f64 = (0..dim).map(|d| x[d] / l).sum();
            u0[sub * n_sol + s] = Complex64::new(0.0, phase).exp();
        }
    }

    let rule = volume_rule(cfg.kind, 2 * cfg.degree + 4)?;
    let interp = disc.ops.basis.interp_matrix(&rule.points);
    // Complex pattern-norm of nodal dofs against an analytic complex field.
    let pattern_norm = |u: &CVec, reference: &dyn Fn(&[f64; 3]) -> Complex64| -> f64 {
        let mut total = 0.0;
        let mut vol = 0.0;
        for sub in 0..n_sub {
            let det = disc.mesh.shape_of(sub).det;
            for (q, w) in rule.weights.iter().enumerate() {
                let mut v = Complex64::new(0.0, 0.0);
                for s in 0..n_sol {
                    v += Complex64::new(interp[(q, s)], 0.0) * u[sub * n_sol + s];
                }
                let xq = cubature_point(&disc, sub, &rule.points[q]);
                let diff = v - reference(&xq);
                total += det * w * diff.norm_sqr();
                vol += det * w;
            }
        }
        // Real-field L2 over the full domain: |Im(e^{i th_n} d)|^2 summed
        // over patterns averages to half the complex norm.
        (total / (2.0 * vol)).sqrt()
    };

    match cfg.peclet {
        Some(_) => {
            let a = matrix_power(&estep, cfg.m_periods * steps_per_period);
            let um = &a * &u0;
            let t = cfg.m_periods as f64 * period;
            let (decay, phase) = analytic_factors(cfg, t);
            let factor = Complex64::new(decay, 0.0) * Complex64::new(0.0, -phase).exp();
            let reference = move |x: &[f64; 3]| {
                let ph: f64 = x.iter().take(dim).map(|v| v / l).sum();
                factor * Complex64::new(0.0, ph).exp()
            };
            Ok(LinAdvDiffResult {
                l2: pattern_norm(&um, &reference),
                n_steps: cfg.m_periods * steps_per_period,
                dt,
            })
        }
        None => {
            let a_prev = matrix_power(&estep, (cfg.m_periods - 1) * steps_per_period);
            let u_prev = &a_prev * &u0;
            let a_one = matrix_power(&estep, steps_per_period);
            let u_now = &a_one * &u_prev;
            let d = &u_now - &u_prev;
            let zero = |_: &[f64; 3]| Complex64::new(0.0, 0.0);
            Ok(LinAdvDiffResult {
                l2: pattern_norm(&d, &zero),
                n_steps: cfg.m_periods * steps_per_period,
                dt,
            })
        }
    }
}

/// Observed order between two resolutions.
pub fn observed_order(l2_coarse: f64, l2_fine: f64, n_coarse: usize, n_fine: usize) -> f64 {
    (l2_coarse / l2_fine).ln() / (n_fine as f64 / n_coarse as f64).ln()
}

// ---------------------------------------------------------------------------
// FR-SDRT vs SDRT equivalence.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct EquivalenceConfig {
    pub kind: ElementKind,
    pub degree: usize,
    pub n: usize,
    pub peclet: f64,
    pub tau: f64,
    pub integrator: Integrator,
}

/// Run the same linear problem with SDRT and FR-SDRT and report the largest
/// absolute solution-point difference after one period.
pub fn run_equivalence(cfg: &EquivalenceConfig) -> Result<f64, Error> {
    let base = LinAdvDiffConfig {
        kind: cfg.kind,
        degree: cfg.degree,
        scheme: Scheme::Sdrt,
        n: cfg.n,
        peclet: Some(cfg.peclet),
        c0: 1.0,
        length_scale: 1.0,
        tau: cfg.tau,
        integrator: cfg.integrator,
        m_periods: 1,
        spectral: false,
    };
    let mut states = Vec::new();
    for scheme in [Scheme::Sdrt, Scheme::FrSdrt] {
        let disc = Discretization::new(
            cfg.kind,
            cfg.degree,
            scheme,
            cfg.n,
            base.h(),
            [true, true, true],
            base.equation(),
            0.0,
            0.0,
            None,
        )?;
        let mut state = disc.project(|x, _| ((x[0] + x[1] + x[2]) / base.length_scale).sin());
        let mut ws = disc.workspace();
        let period = base.period();
        let steps = (period / base.dt()).ceil() as u64;
        let dt = period / steps as f64;
        for _ in 0..steps {
            step(&disc, cfg.integrator, &mut state, dt, &mut ws)?;
        }
        states.push(state.u);
    }
    Ok((&states[0] - &states[1]).amax())
}

/// Spectral variant of the equivalence check for quick sweeps: compares the
/// stepped reduced operators directly.
pub fn equivalence_operator_distance(
    kind: ElementKind,
    degree: usize,
    n: usize,
    peclet: f64,
) -> Result<f64, Error> {
    let cfg = LinAdvDiffConfig {
        kind,
        degree,
        scheme: Scheme::Sdrt,
        n,
        peclet: Some(peclet),
        c0: 1.0,
        length_scale: 1.0,
        tau: 2.5e-3,
        integrator: Integrator::Rk54,
        m_periods: 1,
        spectral: true,
    };
    let h = cfg.h();
    let mut gs = Vec::new();
    for scheme in [Scheme::Sdrt, Scheme::FrSdrt] {
        let disc = Discretization::new(
            kind,
            degree,
            scheme,
            7,
            h,
            [true, true, true],
            cfg.equation(),
            0.0,
            0.0,
            None,
        )?;
        let blocks = probe_blocks(&disc)?;
        let dim = kind.dim();
        let n_dof = disc.mesh.n_sub() * disc.ops.n_sol;
        let kvec_h = [h, h, if dim == 3 { h } else { 0.0 }];
        let mut g = CMat::zeros(n_dof, n_dof);
        for (off, block) in &blocks {
            let phase: f64 = (0..dim).map(|d| kvec_h[d] * off[d] as f64).sum();
            let f = Complex64::new(0.0, phase).exp();
            for c in 0..n_dof {
                for r in 0..n_dof {
                    if block[(r, c)] != 0.0 {
                        g[(r, c)] += f * block[(r, c)];
                    }
                }
            }
        }
        gs.push(g);
    }
    let scale = gs[0].iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    Ok((&gs[0] - &gs[1])
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max)
        / scale)
}

/// The amplification polynomial shared by both propagation paths.
pub fn step_amplification(integrator: Integrator, z: Complex64) -> Complex64 {
    rk_amplification(integrator, z)
}
