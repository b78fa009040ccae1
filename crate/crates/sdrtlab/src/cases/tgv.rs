//! Periodic vortex-decay benchmark on [-pi L, pi L]^3 under the compressible
//! Navier-Stokes equations, with the kinetic-energy dissipation budget:
//! kinetic-energy rate (eps1), deviatoric-strain dissipation (eps2),
//! pressure-dilatation (eps3) and the numerical remainder eps1 - eps2 - eps3.

use nalgebra::DMatrix;

use crate::error::Error;
use crate::physics::EquationSet;
use crate::refelem::cubature::volume_rule;
use crate::refelem::ElementKind;
use crate::solver::{adaptive_step, Discretization, PiController};
use crate::Scheme;

#[derive(Debug, Clone)]
pub struct TgvConfig {
    pub kind: ElementKind,
    pub degree: usize,
    pub scheme: Scheme,
    /// Patterns per axis (cells = n^3 * N_p).
    pub n: usize,
    pub reynolds: f64,
    pub mach: f64,
    pub prandtl: f64,
    pub gamma: f64,
    pub beta: f64,
    pub eta: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_end_star: f64,
    pub sample_interval: f64,
    /// Abort threshold on accepted steps.
    pub max_steps: u64,
    /// Write the final state as a snapshot CSV.
    pub snapshot: Option<std::path::PathBuf>,
}

impl TgvConfig {
    pub fn desk(kind: ElementKind, scheme: Scheme, degree: usize) -> Self {
        TgvConfig {
            kind,
            degree,
            scheme,
            n: 16,
            reynolds: 1600.0,
            mach: 0.1,
            prandtl: 0.71,
            gamma: 1.4,
            beta: 0.5,
            eta: 0.1,
            rel_tol: 1e-8,
            abs_tol: 1e-8,
            t_end_star: 10.0,
            sample_interval: 0.05,
            max_steps: 2_000_000,
            snapshot: None,
        }
    }

    pub fn p_inf(&self) -> f64 {
        1.0 / (self.gamma * self.mach * self.mach)
    }

    /// Gas constant making the free-stream temperature unity.
    pub fn gas_constant(&self) -> f64 {
        self.p_inf()
    }

    pub fn viscosity(&self) -> f64 {
        1.0 / self.reynolds
    }

    /// Conserved initial state at a point (L = rho_inf = v_inf = 1).
    pub fn initial_state(&self, x: f64, y: f64, z: f64) -> [f64; 5] {
        let p = self.p_inf() + ((2.0 * x).cos() + (2.0 * y).cos()) * ((2.0 * z).cos() + 2.0) / 16.0;
        let rho = p / self.gas_constant(); // Theta_inf = 1
        let vx = x.sin() * y.cos() * z.cos();
        let vy = -x.cos() * y.sin() * z.cos();
        let rhoe = p / (self.gamma - 1.0) + 0.5 * rho * (vx * vx + vy * vy);
        [rho, rho * vx, rho * vy, 0.0, rhoe]
    }

    /// Analytic velocity gradient dv[m][d] at t = 0.
    fn initial_velocity_gradient(&self, x: f64, y: f64, z: f64) -> [[f64; 3]; 3] {
        let (sx, cx) = x.sin_cos();
        let (sy, cy) = y.sin_cos();
        let (sz, cz) = z.sin_cos();
        let mut dv = [[0.0f64; 3]; 3];
        dv[0][0] = cx * cy * cz;
        dv[0][1] = -sx * sy * cz;
        dv[0][2] = -sx * cy * sz;
        dv[1][0] = sx * sy * cz;
        dv[1][1] = -cx * cy * cz;
        dv[1][2] = cx * sy * sz;
        dv
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TgvSample {
    pub t_star: f64,
    /// <E*> with E* = rho v.v / (2 rho_inf v_inf^2).
    pub kinetic: f64,
    pub eps2: f64,
    pub eps3: f64,
    pub dt: f64,
}

#[derive(Debug, Clone)]
pub struct TgvResult {
    pub samples: Vec<TgvSample>,
    /// Central-difference -d<E*>/dt* on interior samples: (t*, eps1).
    pub eps1: Vec<(f64, f64)>,
    /// eps1 - eps2 - eps3 on the same schedule.
    pub eps_delta: Vec<(f64, f64)>,
    pub mean_dt: f64,
    pub n_steps: u64,
    /// Divergence time (t*) when the run blew up.
    pub diverged: Option<f64>,
    /// eps2 at t* = 0 evaluated from the analytic field by cubature.
    pub eps2_analytic0: f64,
    /// Closed form 2 mu t_c <S:S> = 2 mu (3/8).
    pub eps2_closed_form: f64,
    pub wall_seconds: f64,
}

pub fn run_tgv(cfg: &TgvConfig) -> Result<TgvResult, Error> {
    let start = std::time::Instant::now();
    assert!(cfg.kind.dim() == 3, "three-dimensional benchmark");
    let length = 2.0 * std::f64::consts::PI;
    let h = length / cfg.n as f64;
    let eq = EquationSet::NavierStokes {
        gamma: cfg.gamma,
        mu: cfg.viscosity(),
        prandtl: cfg.prandtl,
        gas_constant: cfg.gas_constant(),
    };
    let disc = Discretization::new(
        cfg.kind,
        cfg.degree,
        cfg.scheme,
        cfg.n,
        h,
        [true, true, true],
        eq,
        cfg.beta,
        cfg.eta,
        None,
    )?;
    // Mesh on [0, 2 pi]^3; the initial field shifts by -pi (periodic).
    let pi = std::f64::consts::PI;
    let mut state =
        disc.project(|x, alpha| cfg.initial_state(x[0] - pi, x[1] - pi, x[2] - pi)[alpha]);
    let mut ws = disc.workspace();

    let rule = volume_rule(cfg.kind, 10)?;
    let interp = disc.ops.basis.interp_matrix(&rule.points);

    // eps2 at t*=0 from the analytic initial field (cubature oracle).
    let mu = cfg.viscosity();
    let mut eps2_analytic0 = 0.0;
    let mut vol_total = 0.0;
    for cell in 0..disc.mesh.n_cells() {
        let shape = disc.mesh.shape_of(cell);
        let o = disc.mesh.origins[cell];
        for (q, w) in rule.weights.iter().enumerate() {
            let mut x = [0.0f64; 3];
            for d in 0..3 {
                x[d] = o[d] + shape.offset[d] - pi;
                for (k, xr) in rule.points[q].iter().enumerate() {
                    x[d] += shape.jac[d][k] * xr;
                }
            }
            let dv = cfg.initial_velocity_gradient(x[0], x[1], x[2]);
            let mut divv = 0.0;
            for d in 0..3 {
                divv += dv[d][d];
            }
            let mut ss = 0.0;
            for m in 0..3 {
                for d in 0..3 {
                    let sd = 0.5 * (dv[m][d] + dv[d][m]) - if m == d { divv / 3.0 } else { 0.0 };
                    ss += sd * sd;
                }
            }
            eps2_analytic0 += shape.det * w * 2.0 * mu * ss;
            vol_total += shape.det * w;
        }
    }
    eps2_analytic0 /= vol_total;
    let eps2_closed_form = 2.0 * mu * 3.0 / 8.0;

    let sample_budget = |disc: &Discretization,
                         ws: &mut crate::solver::Workspace,
                         u: &DMatrix<f64>|
     -> Result<(f64, f64, f64), Error> {
        disc.compute_gradients(u, ws)?;
        let nv = disc.n_vars;
        let n_sol = disc.ops.n_sol;
        let vals = &interp * u;
        // Gradient values at cubature points per axis.
        let mut gvals = Vec::with_capacity(3);
        for d in 0..3 {
            let rows = ws.q_phys.rows(d * n_sol, n_sol).clone_owned();
            gvals.push(&interp * rows);
        }
        let mut e_kin = 0.0;
        let mut eps2 = 0.0;
        let mut eps3 = 0.0;
        let mut vol = 0.0;
        let gamma = cfg.gamma;
        for cell in 0..disc.mesh.n_cells() {
            let det = disc.mesh.shape_of(cell).det;
            for (q, w) in rule.weights.iter().enumerate() {
                let mut uvec = [0.0f64; 5];
                for alpha in 0..nv {
                    uvec[alpha] = vals[(q, cell * nv + alpha)];
                }
                let rho = uvec[0];
                let inv_rho = 1.0 / rho;
                let v = [uvec[1] * inv_rho, uvec[2] * inv_rho, uvec[3] * inv_rho];
                let ke = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                let p = (gamma - 1.0) * (uvec[4] - 0.5 * rho * ke);
                // dv[m][d] from conserved gradients.
                let mut dv = [[0.0f64; 3]; 3];
                for d in 0..3 {
                    let g_rho = gvals[d][(q, cell * nv)];
                    for m in 0..3 {
                        let g_mom = gvals[d][(q, cell * nv + 1 + m)];
                        dv[m][d] = (g_mom - v[m] * g_rho) * inv_rho;
                    }
                }
                let divv = dv[0][0] + dv[1][1] + dv[2][2];
                let mut ss = 0.0;
                for m in 0..3 {
                    for d in 0..3 {
                        let sd =
                            0.5 * (dv[m][d] + dv[d][m]) - if m == d { divv / 3.0 } else { 0.0 };
                        ss += sd * sd;
                    }
                }
                e_kin += det * w * 0.5 * rho * ke;
                eps2 += det * w * 2.0 * mu * ss;
                eps3 -= det * w * p * divv;
                vol += det * w;
            }
        }
        Ok((e_kin / vol, eps2 / vol, eps3 / vol))
    };

    let mut samples: Vec<TgvSample> = Vec::new();
    let mut ctrl = PiController::new(cfg.rel_tol, cfg.abs_tol);
    let mut dt: f64 = 1e-4;
    let mut n_steps: u64 = 0;
    let mut sum_dt = 0.0;
    let mut diverged = None;
    let (k0, e20, e30) = sample_budget(&disc, &mut ws, &state.u)?;
    samples.push(TgvSample {
        t_star: 0.0,
        kinetic: k0,
        eps2: e20,
        eps3: e30,
        dt: 0.0,
    });

    let mut next_sample = cfg.sample_interval;
    'outer: while state.t < cfg.t_end_star - 1e-12 {
        // March to the next sample time, clipping the final step.
        while state.t < next_sample - 1e-12 {
            let mut dt_try = dt.min(next_sample - state.t);
            match adaptive_step(&disc, &mut state, &mut dt_try, &mut ctrl, &mut ws, 1.0) {
                Ok(taken) => {
                    n_steps += 1;
                    sum_dt += taken;
                    // Keep the controller's unclipped proposal for later.
                    if dt_try > dt || taken >= dt * 0.99 {
                        dt = dt_try;
                    }
                    if n_steps > cfg.max_steps {
                        return Err(Error::Numerical(
                            "step budget exhausted before reaching t_end".into(),
                        ));
                    }
                }
                Err(Error::Diverged { time, .. }) => {
                    diverged = Some(time);
                    break 'outer;
                }
                Err(e) => return Err(e),
            }
        }
        if diverged.is_some() {
            break;
        }
        match sample_budget(&disc, &mut ws, &state.u) {
            Ok((k, e2, e3)) => samples.push(TgvSample {
                t_star: state.t,
                kinetic: k,
                eps2: e2,
                eps3: e3,
                dt,
            }),
            Err(_) => {
                diverged = Some(state.t);
                break;
            }
        }
        next_sample += cfg.sample_interval;
    }

    if let Some(path) = &cfg.snapshot {
        crate::solver::write_snapshot(&disc, &state, path)?;
    }

    // eps1 by second-order central differences on the sample schedule.
    let mut eps1 = Vec::new();
    let mut eps_delta = Vec::new();
    for i in 1..samples.len().saturating_sub(1) {
        let dtstar = samples[i + 1].t_star - samples[i - 1].t_star;
        let e1 = -(samples[i + 1].kinetic - samples[i - 1].kinetic) / dtstar;
        eps1.push((samples[i].t_star, e1));
        eps_delta.push((samples[i].t_star, e1 - samples[i].eps2 - samples[i].eps3));
    }

    Ok(TgvResult {
        samples,
        eps1,
        eps_delta,
        mean_dt: if n_steps > 0 {
            sum_dt / n_steps as f64
        } else {
            0.0
        },
        n_steps,
        diverged,
        eps2_analytic0,
        eps2_closed_form,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}
