//! Flux functions and interface solvers for the supported equation sets:
//! linear advection, linear diffusion, linear advection-diffusion, Euler and
//! compressible Navier-Stokes.

use crate::error::Error;

/// Equation set with its physical parameters.
#[derive(Debug, Clone)]
pub enum EquationSet {
    LinAdv {
        /// Advection velocity vector.
        velocity: [f64; 3],
    },
    LinDiff {
        diffusivity: f64,
    },
    LinAdvDiff {
        velocity: [f64; 3],
        diffusivity: f64,
    },
    Euler {
        gamma: f64,
    },
    NavierStokes {
        gamma: f64,
        /// Dynamic viscosity.
        mu: f64,
        prandtl: f64,
        /// Gas constant fixing the temperature scale.
        gas_constant: f64,
    },
}

impl EquationSet {
    pub fn n_vars(&self, dim: usize) -> usize {
        match self {
            EquationSet::LinAdv { .. }
            | EquationSet::LinDiff { .. }
            | EquationSet::LinAdvDiff { .. } => 1,
            _ => dim + 2,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(
            self,
            EquationSet::LinAdv { .. }
                | EquationSet::LinDiff { .. }
                | EquationSet::LinAdvDiff { .. }
        )
    }

    pub fn has_viscous(&self) -> bool {
        matches!(
            self,
            EquationSet::LinDiff { .. }
                | EquationSet::LinAdvDiff { .. }
                | EquationSet::NavierStokes { .. }
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            EquationSet::LinAdv { .. } => "advection",
            EquationSet::LinDiff { .. } => "diffusion",
            EquationSet::LinAdvDiff { .. } => "advection-diffusion",
            EquationSet::Euler { .. } => "euler",
            EquationSet::NavierStokes { .. } => "navier-stokes",
        }
    }
}

/// Pressure from conserved variables; error when the state leaves the
/// physical region.
pub fn pressure(gamma: f64, u: &[f64], dim: usize) -> Result<f64, Error> {
    let rho = u[0];
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Numerical(format!("nonphysical density {rho}")));
    }
    let mut ke = 0.0;
    for d in 0..dim {
        ke += u[1 + d] * u[1 + d];
    }
    ke /= 2.0 * rho;
    let p = (gamma - 1.0) * (u[1 + dim] - ke);
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Numerical(format!("nonphysical pressure {p}")));
    }
    Ok(p)
}

/// Convective flux: out[d][alpha].
pub fn convective_flux(
    eq: &EquationSet,
    u: &[f64],
    dim: usize,
    out: &mut [[f64; 5]; 3],
) -> Result<(), Error> {
    match eq {
        EquationSet::LinAdv { velocity } | EquationSet::LinAdvDiff { velocity, .. } => {
            for d in 0..dim {
                out[d][0] = velocity[d] * u[0];
            }
        }
        EquationSet::LinDiff { .. } => {
            for item in out.iter_mut().take(dim) {
                item[0] = 0.0;
            }
        }
        EquationSet::Euler { gamma } | EquationSet::NavierStokes { gamma, .. } => {
            let p = pressure(*gamma, u, dim)?;
            let rho = u[0];
            for d in 0..dim {
                let vd = u[1 + d] / rho;
                out[d][0] = u[1 + d];
                for m in 0..dim {
                    out[d][1 + m] = u[1 + m] * vd;
                }
                out[d][1 + d] += p;
                out[d][1 + dim] = (u[1 + dim] + p) * vd;
            }
        }
    }
    Ok(())
}

/// Viscous flux from state and physical gradients grad[d][alpha] = d u_alpha / d x_d.
pub fn viscous_flux(
    eq: &EquationSet,
    u: &[f64],
    grad: &[[f64; 5]; 3],
    dim: usize,
    out: &mut [[f64; 5]; 3],
) {
    for item in out.iter_mut().take(dim) {
        for v in item.iter_mut() {
            *v = 0.0;
        }
    }
    match eq {
        EquationSet::LinDiff { diffusivity } | EquationSet::LinAdvDiff { diffusivity, .. } => {
            for d in 0..dim {
                out[d][0] = -diffusivity * grad[d][0];
            }
        }
        EquationSet::LinAdv { .. } | EquationSet::Euler { .. } => {}
        EquationSet::NavierStokes {
            gamma,
            mu,
            prandtl,
            gas_constant,
        } => {
            let rho = u[0];
            let inv_rho = 1.0 / rho;
            let mut v = [0.0f64; 3];
            for d in 0..dim {
                v[d] = u[1 + d] * inv_rho;
            }
            // dv[m][d] = d v_m / d x_d
            let mut dv = [[0.0f64; 3]; 3];
            for m in 0..dim {
                for d in 0..dim {
                    dv[m][d] = (grad[d][1 + m] - v[m] * grad[d][0]) * inv_rho;
                }
            }
            let mut divv = 0.0;
            for d in 0..dim {
                divv += dv[d][d];
            }
            // Newtonian stress under the Stokes hypothesis.
            let mut tau = [[0.0f64; 3]; 3];
            for m in 0..dim {
                for d in 0..dim {
                    tau[m][d] = mu * (dv[m][d] + dv[d][m]);
                }
                tau[m][m] -= 2.0 / 3.0 * mu * divv;
            }
            let cp = gamma * gas_constant / (gamma - 1.0);
            let mut ke = 0.0;
            for d in 0..dim {
                ke += v[d] * v[d];
            }
            let p = (gamma - 1.0) * (u[1 + dim] - 0.5 * rho * ke);
            let mut grad_theta = [0.0f64; 3];
            for d in 0..dim {
                let mut vdotdv = 0.0;
                for m in 0..dim {
                    vdotdv += v[m] * dv[m][d];
                }
                let dp = (gamma - 1.0) * (grad[d][1 + dim] - 0.5 * ke * grad[d][0] - rho * vdotdv);
                grad_theta[d] = (dp - p * inv_rho * grad[d][0]) * inv_rho / gas_constant;
            }
            for d in 0..dim {
                for m in 0..dim {
                    out[d][1 + m] = -tau[m][d];
                }
                let mut tauv = 0.0;
                for m in 0..dim {
                    tauv += tau[d][m] * v[m];
                }
                out[d][1 + dim] = -mu * cp / prandtl * grad_theta[d] - tauv;
            }
        }
    }
}

/// Common convective flux at an interface: exact upwind for scalar advection,
/// Rusanov for Euler/Navier-Stokes.
pub fn common_convective(
    eq: &EquationSet,
    ul: &[f64],
    ur: &[f64],
    normal: &[f64; 3],
    dim: usize,
    out: &mut [f64],
) -> Result<(), Error> {
    match eq {
        EquationSet::LinAdv { velocity } | EquationSet::LinAdvDiff { velocity, .. } => {
            let cn: f64 = (0..dim).map(|d| velocity[d] * normal[d]).sum();
            out[0] = 0.5 * cn * (ul[0] + ur[0]) + 0.5 * cn.abs() * (ul[0] - ur[0]);
        }
        EquationSet::LinDiff { .. } => {
            out[0] = 0.0;
        }
        EquationSet::Euler { gamma } | EquationSet::NavierStokes { gamma, .. } => {
            let nv = dim + 2;
            let mut fl = [[0.0f64; 5]; 3];
            let mut fr = [[0.0f64; 5]; 3];
            convective_flux(eq, ul, dim, &mut fl)?;
            convective_flux(eq, ur, dim, &mut fr)?;
            let pl = pressure(*gamma, ul, dim)?;
            let pr = pressure(*gamma, ur, dim)?;
            let al = (gamma * pl / ul[0]).sqrt();
            let ar = (gamma * pr / ur[0]).sqrt();
            let mut vnl = 0.0;
            let mut vnr = 0.0;
            for d in 0..dim {
                vnl += ul[1 + d] / ul[0] * normal[d];
                vnr += ur[1 + d] / ur[0] * normal[d];
            }
            let phi = (vnl.abs() + al).max(vnr.abs() + ar);
            for alpha in 0..nv {
                let mut fn_avg = 0.0;
                for d in 0..dim {
                    fn_avg += 0.5 * (fl[d][alpha] + fr[d][alpha]) * normal[d];
                }
                out[alpha] = fn_avg + 0.5 * phi * (ul[alpha] - ur[alpha]);
            }
        }
    }
    Ok(())
}

/// LDG common value for the gradient pass: (1/2 - beta) uL + (1/2 + beta) uR.
pub fn common_value(ul: f64, ur: f64, beta: f64) -> f64 {
    (0.5 - beta) * ul + (0.5 + beta) * ur
}

/// Common viscous flux with mirrored LDG weights and interface penalty:
/// n . [(1/2 + beta) fL + (1/2 - beta) fR] + eta (uL - uR), accumulated into
/// `out`.
#[allow(clippy::too_many_arguments)]
pub fn common_viscous(
    eq: &EquationSet,
    ul: &[f64],
    ur: &[f64],
    gl: &[[f64; 5]; 3],
    gr: &[[f64; 5]; 3],
    normal: &[f64; 3],
    dim: usize,
    beta: f64,
    eta: f64,
    out: &mut [f64],
) {
    let nv = eq.n_vars(dim);
    let mut fl = [[0.0f64; 5]; 3];
    let mut fr = [[0.0f64; 5]; 3];
    viscous_flux(eq, ul, gl, dim, &mut fl);
    viscous_flux(eq, ur, gr, dim, &mut fr);
    for alpha in 0..nv {
        let mut v = 0.0;
        for d in 0..dim {
            v += ((0.5 + beta) * fl[d][alpha] + (0.5 - beta) * fr[d][alpha]) * normal[d];
        }
        out[alpha] += v + eta * (ul[alpha] - ur[alpha]);
    }
}
