//! Build reports, run manifests and the CSV writers shared by the sweep and
//! case runners. CSV output is deterministic: fixed column order, rows sorted
//! by key, shortest-roundtrip float formatting.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Error;
use crate::operators::assemble;
use crate::refelem::{build_reference, ElementKind};
use crate::vonneumann::SweepRow;
use crate::Scheme;

/// Condition numbers of the solution and flux Vandermonde matrices per
/// (element, degree), with any conditioning warnings.
#[derive(Debug, Clone, Serialize)]
pub struct BasisReportEntry {
    pub etype: String,
    pub p: usize,
    pub cond_solution: f64,
    pub cond_flux: f64,
    pub warnings: Vec<String>,
}

pub fn basis_report(
    kinds: &[ElementKind],
    degrees: &[usize],
) -> Result<Vec<BasisReportEntry>, Error> {
    let mut entries = Vec::new();
    for &kind in kinds {
        for &p in degrees {
            let re = build_reference(kind, p)?;
            let ops = assemble(&re, Scheme::Sdrt)?;
            entries.push(BasisReportEntry {
                etype: kind.name().to_string(),
                p,
                cond_solution: ops.cond_solution,
                cond_flux: ops.cond_flux,
                warnings: ops.warnings.clone(),
            });
        }
    }
    Ok(entries)
}

/// Reproducibility manifest written next to every run's outputs; written
/// even when the run diverges.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    pub config_echo: String,
    pub seed: u64,
    pub threads: usize,
    pub basis_report: Vec<BasisReportEntry>,
    pub wall_seconds: f64,
    pub outputs: Vec<String>,
    pub diverged_at: Option<f64>,
}

impl RunManifest {
    pub fn new(command: &str, config_echo: String, seed: u64, threads: usize) -> Self {
        RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_echo,
            seed,
            threads,
            basis_report: Vec::new(),
            wall_seconds: 0.0,
            outputs: Vec::new(),
            diverged_at: None,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, Error> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("manifest serialization: {e}")))?;
        std::fs::write(&path, text)?;
        Ok(path)
    }
}

/// Dissipation/dispersion sweep CSV.
pub fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<(), Error> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        f,
        "scheme,etype,p,equation,theta0,theta1,kappa_h,lambda_over_h,m,tau,integrator,\
         re_omega_err,im_omega_err,spectral_radius,physical_eq_radius_flag"
    )?;
    let tau_pi = std::f64::consts::TAU;
    for r in rows {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scheme.name(),
            r.kind.name(),
            r.degree,
            r.equation.name(),
            r.theta0,
            r.theta1,
            r.kappa_h,
            tau_pi / r.kappa_h,
            r.m,
            r.tau,
            r.integrator,
            r.re_omega_err,
            r.im_omega_err,
            r.spectral_radius,
            if r.physical_eq_radius { 1 } else { 0 }
        )?;
    }
    Ok(())
}

/// One row of the temporal-stability table CSV.
#[derive(Debug, Clone)]
pub struct TauMaxRow {
    pub scheme: Scheme,
    pub kind: ElementKind,
    pub degree: usize,
    pub integrator: String,
    pub equation: String,
    pub theta0: f64,
    pub theta1: f64,
    /// None encodes a spatially unstable configuration.
    pub tau_max: Option<f64>,
}

pub fn write_taumax_csv(rows: &[TauMaxRow], path: &Path) -> Result<(), Error> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        f,
        "scheme,etype,p,integrator,equation,theta0,theta1,tau_max"
    )?;
    for r in rows {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{}",
            r.scheme.name(),
            r.kind.name(),
            r.degree,
            r.integrator,
            r.equation,
            r.theta0,
            r.theta1,
            match r.tau_max {
                Some(t) => format!("{t}"),
                None => "spatially_unstable".to_string(),
            }
        )?;
    }
    Ok(())
}

/// Generic key-value CSV for the case runners (one row per record).
pub fn write_records_csv(header: &str, rows: &[Vec<String>], path: &Path) -> Result<(), Error> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{header}")?;
    for row in rows {
        writeln!(f, "{}", row.join(","))?;
    }
    Ok(())
}
