//! Structured run configuration: TOML files with [case]/[sweep], [scheme],
//! [integrator] and [output] sections. Unknown keys are rejected and every
//! parse error carries the file path.

use serde::Deserialize;

use crate::error::Error;
use crate::refelem::ElementKind;
use crate::solver::Integrator;
use crate::Scheme;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub case: Option<CaseSection>,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub scheme: SchemeSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseSection {
    pub kind: String,
    pub etype: ElementKind,
    pub p: usize,
    pub n: usize,
    /// Peclet number for the linear case; omit for pure advection.
    pub peclet: Option<f64>,
    /// Periods (linear cases) or convective times (vortex).
    pub m: Option<u64>,
    // Vortex parameters; standard benchmark defaults filled when omitted.
    pub mach: Option<f64>,
    pub strength: Option<f64>,
    pub vortex_radius: Option<f64>,
    pub radius_ratio: Option<f64>,
    // Decaying-vortex (3D) parameters.
    pub reynolds: Option<f64>,
    pub prandtl: Option<f64>,
    pub t_end: Option<f64>,
    pub sample_interval: Option<f64>,
    /// Expected-divergence runs exit with status 2 instead of failing.
    #[serde(default)]
    pub allow_divergence: bool,
    /// Use the block-circulant fast path for linear cases.
    pub spectral: Option<bool>,
    /// Write a final-state snapshot CSV.
    #[serde(default)]
    pub snapshot: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub equation: String,
    pub etype: ElementKind,
    pub p: usize,
    pub theta0: Option<f64>,
    pub theta1: Option<f64>,
    pub kappa_points: Option<usize>,
    /// Iteration preset: "mc", "10mc", "400mc" or a number.
    pub m: Option<String>,
    pub tau: Option<f64>,
    /// Wavenumber list for the measures (lambda/h values).
    pub lambda_over_h: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub kind: Option<Scheme>,
    pub beta: Option<f64>,
    pub eta: Option<f64>,
}

impl Default for SchemeSection {
    fn default() -> Self {
        SchemeSection {
            kind: Some(Scheme::Sdrt),
            beta: None,
            eta: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub kind: Option<String>,
    pub tau: Option<f64>,
    pub dt: Option<f64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<String>,
    #[serde(default)]
    pub csv: Option<bool>,
}

impl RunConfig {
    pub fn from_path(path: &std::path::Path) -> Result<RunConfig, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate(path)?;
        Ok(cfg)
    }

    pub fn validate(&self, path: &std::path::Path) -> Result<(), Error> {
        let at = |msg: String| Error::Config(format!("{}: {msg}", path.display()));
        if self.case.is_some() == self.sweep.is_some() {
            return Err(at("exactly one of [case] or [sweep] is required".into()));
        }
        if let Some(case) = &self.case {
            match case.kind.as_str() {
                "linadvdiff" | "advection" | "equivalence" | "euler_vortex" | "tgv" => {}
                other => {
                    return Err(at(format!(
                        "[case].kind: unknown case `{other}` (expected linadvdiff, advection, \
                         equivalence, euler_vortex or tgv)"
                    )))
                }
            }
            if case.p == 0 || case.p > 5 {
                return Err(at(format!("[case].p: unsupported degree {}", case.p)));
            }
        }
        if let Some(sweep) = &self.sweep {
            match sweep.equation.as_str() {
                "advection" | "diffusion" => {}
                other => return Err(at(format!("[sweep].equation: unknown equation `{other}`"))),
            }
            if sweep.p == 0 || sweep.p > 5 {
                return Err(at(format!("[sweep].p: unsupported degree {}", sweep.p)));
            }
        }
        if let Some(kind) = &self.integrator.kind {
            match kind.as_str() {
                "rk3" | "rk4" | "rk54" | "rk54pi" | "exponential" => {}
                other => {
                    return Err(at(format!(
                        "[integrator].kind: unknown integrator `{other}`"
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn integrator(&self) -> Result<Integrator, Error> {
        match self.integrator.kind.as_deref() {
            None | Some("rk54") | Some("rk54pi") => Ok(Integrator::Rk54),
            Some(other) => other.parse(),
        }
    }
}
