//! Config-driven orchestration for the `sdrtlab` binary: dispatches to the
//! Von Neumann sweeps and the benchmark case runners, writes CSV outputs and
//! a reproducibility manifest, and maps divergence to exit status 2.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::cases::{
    run_equivalence, run_euler_vortex, run_linadvdiff, run_tgv, EquivalenceConfig,
    LinAdvDiffConfig, TgvConfig, VortexConfig,
};
use crate::config::RunConfig;
use crate::error::Error;
use crate::refelem::ElementKind;
use crate::report::{
    basis_report, write_records_csv, write_sweep_csv, write_taumax_csv, RunManifest, TauMaxRow,
};
use crate::solver::Integrator;
use crate::vonneumann::{
    aliasing_limit, probe_reduced_jacobian, sweep, tau_max, AnalysisIntegrator, TauMax, VnEquation,
};
use crate::Scheme;

#[derive(Parser)]
#[command(
    name = "sdrtlab",
    version,
    about = "Spectral difference Raviart-Thomas and flux reconstruction solver laboratory"
)]
pub struct Cli {
    /// TOML configuration file ([case]/[sweep], [scheme], [integrator], [output]).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (the SDRTLAB_OUT environment variable overrides this).
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for the parallel sweeps.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed recorded in the manifest and used by randomized diagnostics.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Dissipation/dispersion sweep at one configuration; also prints the
    /// temporal stability bound.
    Analyze(AnalyzeArgs),
    /// Temporal stability tables over degrees and schemes.
    Taumax(TaumaxArgs),
    /// Benchmark case runner (linadvdiff, advection, equivalence,
    /// euler_vortex, tgv).
    Case(CaseArgs),
    /// FR-SDRT vs SDRT equivalence shortcut.
    Equivalence(EquivalenceArgs),
    /// Basis build report (condition numbers) as JSON.
    Report(ReportArgs),
}

#[derive(Args)]
pub struct AnalyzeArgs {
    #[arg(long, default_value = "sdrt")]
    pub scheme: Scheme,
    #[arg(long, default_value = "quad")]
    pub etype: ElementKind,
    #[arg(short, long, default_value_t = 1)]
    pub p: usize,
    #[arg(long, default_value = "advection")]
    pub equation: String,
    #[arg(long, default_value = "rk3")]
    pub integrator: String,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_6)]
    pub theta0: f64,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
    pub theta1: f64,
    /// Iteration preset: mc, 10mc, 400mc or an integer.
    #[arg(long, default_value = "mc")]
    pub m: String,
    #[arg(long, default_value_t = 0.05)]
    pub tau: f64,
    /// Wavenumber samples across (0, 2 aliasing-limit].
    #[arg(long, default_value_t = 48)]
    pub kappa_points: usize,
}

#[derive(Args)]
pub struct TaumaxArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![Scheme::Sdrt, Scheme::FrDg])]
    pub schemes: Vec<Scheme>,
    #[arg(long, default_value = "quad")]
    pub etype: ElementKind,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 3, 4])]
    pub degrees: Vec<usize>,
    #[arg(long, default_value = "advection")]
    pub equation: String,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_6)]
    pub theta0: f64,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
    pub theta1: f64,
    #[arg(long, default_value_t = 200)]
    pub kappa_points: usize,
}

#[derive(Args)]
pub struct CaseArgs {
    /// Case kind when no config file is given.
    pub kind: Option<String>,
    #[arg(long, default_value = "quad")]
    pub etype: ElementKind,
    #[arg(short, long, default_value_t = 3)]
    pub p: usize,
    #[arg(short, long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value = "sdrt")]
    pub scheme: Scheme,
    #[arg(long)]
    pub peclet: Option<f64>,
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long)]
    pub allow_divergence: bool,
}

#[derive(Args)]
pub struct EquivalenceArgs {
    #[arg(long, default_value = "quad")]
    pub etype: ElementKind,
    #[arg(short, long, default_value_t = 3)]
    pub p: usize,
    #[arg(short, long, default_value_t = 10)]
    pub n: usize,
}

#[derive(Args)]
pub struct ReportArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 3, 4])]
    pub degrees: Vec<usize>,
}

fn parse_m(preset: &str, tau: f64) -> Result<u64, Error> {
    let mc = (1.0 / tau).round().max(1.0) as u64;
    match preset {
        "mc" => Ok(mc),
        "10mc" => Ok(10 * mc),
        "400mc" => Ok(400 * mc),
        other => other
            .parse::<u64>()
            .map_err(|_| Error::Config(format!("bad iteration preset `{other}`"))),
    }
}

fn vn_equation(name: &str) -> Result<VnEquation, Error> {
    match name {
        "advection" => Ok(VnEquation::Advection),
        "diffusion" => Ok(VnEquation::Diffusion),
        other => Err(Error::Config(format!("unknown equation `{other}`"))),
    }
}

fn analysis_integrator(name: &str) -> Result<AnalysisIntegrator, Error> {
    match name {
        "exponential" => Ok(AnalysisIntegrator::Exponential),
        other => Ok(AnalysisIntegrator::Rk(other.parse()?)),
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn out_dir(cli_out: &std::path::Path) -> PathBuf {
    match std::env::var_os("SDRTLAB_OUT") {
        Some(v) => PathBuf::from(v),
        None => cli_out.to_path_buf(),
    }
}

fn execute(cli: Cli) -> Result<i32, Error> {
    if let Some(threads) = cli.threads {
        // A failure here only means a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let out = out_dir(&cli.out);
    let start = std::time::Instant::now();
    let threads = rayon::current_num_threads();

    match cli.command {
        Command::Analyze(args) => {
            let equation = vn_equation(&args.equation)?;
            let integ = analysis_integrator(&args.integrator)?;
            let theta1 = if args.etype.dim() == 3 {
                args.theta1
            } else {
                0.0
            };
            let rj = probe_reduced_jacobian(
                args.scheme,
                args.etype,
                args.p,
                equation,
                args.theta0,
                theta1,
            )?;
            let m = parse_m(&args.m, args.tau)?;
            let lim = aliasing_limit(args.theta0, theta1, args.etype.dim());
            let kappas: Vec<f64> = (1..=args.kappa_points)
                .map(|j| 2.0 * lim * j as f64 / args.kappa_points as f64)
                .collect();
            let rows = sweep(&rj, &kappas, integ, args.tau, m)?;
            let csv = out.join("sweep.csv");
            write_sweep_csv(&rows, &csv)?;
            // Temporal stability for the RK integrators.
            let mut tau_line = String::from("exponential integration: stable iff spatially stable");
            if let AnalysisIntegrator::Rk(rk) = integ {
                match tau_max(&rj, rk, 200)? {
                    TauMax::Stable(t) => {
                        tau_line = format!(
                            "tau_max {} {} p{} {} {}: {:.4}",
                            args.scheme.name(),
                            args.etype.name(),
                            args.p,
                            equation.name(),
                            rk.name(),
                            t
                        )
                    }
                    TauMax::SpatiallyUnstable(re) => {
                        tau_line = format!("spatially unstable: max Re lambda = {re:.3e}")
                    }
                }
            }
            println!("{tau_line}");
            println!("wrote {}", csv.display());
            let mut manifest = RunManifest::new("analyze", String::new(), cli.seed, threads);
            manifest.outputs.push(csv.display().to_string());
            manifest.wall_seconds = start.elapsed().as_secs_f64();
            manifest.write(&out)?;
            Ok(0)
        }
        Command::Taumax(args) => {
            let equation = vn_equation(&args.equation)?;
            let theta1 = if args.etype.dim() == 3 {
                args.theta1
            } else {
                0.0
            };
            let mut rows = Vec::new();
            for &scheme in &args.schemes {
                for &p in &args.degrees {
                    let rj = probe_reduced_jacobian(
                        scheme,
                        args.etype,
                        p,
                        equation,
                        args.theta0,
                        theta1,
                    )?;
                    for rk in [Integrator::Rk3, Integrator::Rk4, Integrator::Rk54] {
                        let value = match tau_max(&rj, rk, args.kappa_points)? {
                            TauMax::Stable(t) => Some(t),
                            TauMax::SpatiallyUnstable(_) => None,
                        };
                        println!(
                            "{} {} p{} {}: {}",
                            scheme.name(),
                            args.etype.name(),
                            p,
                            rk.name(),
                            value
                                .map(|t| format!("{t:.4}"))
                                .unwrap_or("unstable".into())
                        );
                        rows.push(TauMaxRow {
                            scheme,
                            kind: args.etype,
                            degree: p,
                            integrator: rk.name().to_string(),
                            equation: equation.name().to_string(),
                            theta0: args.theta0,
                            theta1,
                            tau_max: value,
                        });
                    }
                }
            }
            let csv = out.join("taumax.csv");
            write_taumax_csv(&rows, &csv)?;
            println!("wrote {}", csv.display());
            let mut manifest = RunManifest::new("taumax", String::new(), cli.seed, threads);
            manifest.outputs.push(csv.display().to_string());
            manifest.wall_seconds = start.elapsed().as_secs_f64();
            manifest.write(&out)?;
            Ok(0)
        }
        Command::Case(args) => run_case(cli.config, args, &out, cli.seed, threads, start),
        Command::Equivalence(args) => {
            let cfg = EquivalenceConfig {
                kind: args.etype,
                degree: args.p,
                n: args.n,
                peclet: 10.0,
                tau: 0.01,
                integrator: Integrator::Rk54,
            };
            let diff = run_equivalence(&cfg)?;
            println!(
                "equivalence {} p{} n{}: L_inf(SDRT - FR-SDRT) = {:.3e}",
                args.etype.name(),
                args.p,
                args.n,
                diff
            );
            Ok(0)
        }
        Command::Report(args) => {
            let entries = basis_report(&ElementKind::all(), &args.degrees)?;
            let text = serde_json::to_string_pretty(&entries)
                .map_err(|e| Error::Config(format!("{e}")))?;
            std::fs::create_dir_all(&out)?;
            let path = out.join("basis_report.json");
            std::fs::write(&path, &text)?;
            println!("{text}");
            println!("wrote {}", path.display());
            Ok(0)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_case(
    config: Option<PathBuf>,
    args: CaseArgs,
    out: &std::path::Path,
    seed: u64,
    threads: usize,
    start: std::time::Instant,
) -> Result<i32, Error> {
    // Flags provide a quick path; a config file overrides them.
    let (case, scheme, config_echo) = match &config {
        Some(path) => {
            let cfg = RunConfig::from_path(path)?;
            let case = cfg
                .case
                .clone()
                .ok_or_else(|| Error::Config("config file lacks a [case] section".into()))?;
            let scheme = cfg.scheme.kind.unwrap_or(Scheme::Sdrt);
            let echo = std::fs::read_to_string(path)?;
            (case, scheme, echo)
        }
        None => {
            let kind = args
                .kind
                .clone()
                .ok_or_else(|| Error::Config("case kind required (or provide --config)".into()))?;
            let case = crate::config::CaseSection {
                kind,
                etype: args.etype,
                p: args.p,
                n: args.n,
                peclet: args.peclet,
                m: args.m,
                mach: None,
                strength: None,
                vortex_radius: None,
                radius_ratio: None,
                reynolds: None,
                prandtl: None,
                t_end: None,
                sample_interval: None,
                allow_divergence: args.allow_divergence,
                spectral: None,
                snapshot: false,
            };
            (case, args.scheme, String::new())
        }
    };
    let (kind_name, etype, p, n) = (case.kind.clone(), case.etype, case.p, case.n);
    let (peclet, m, allow_divergence, snapshot) =
        (case.peclet, case.m, case.allow_divergence, case.snapshot);

    let mut manifest = RunManifest::new("case", config_echo, seed, threads);
    manifest.basis_report = basis_report(&[etype], &[p])?;
    std::fs::create_dir_all(out)?;

    let status = match kind_name.as_str() {
        "linadvdiff" | "advection" => {
            let mut cfg = LinAdvDiffConfig::benchmark_defaults(etype, scheme, n);
            cfg.degree = p;
            cfg.peclet = if kind_name == "advection" {
                None
            } else {
                Some(peclet.unwrap_or(10.0))
            };
            cfg.m_periods = m.unwrap_or(1);
            if let Some(spectral) = case.spectral {
                cfg.spectral = spectral;
            }
            let res = run_linadvdiff(&cfg)?;
            println!(
                "linadvdiff {} {} p{p} n{n}: L2 = {:.6e} ({} steps of dt {:.3e})",
                scheme.name(),
                etype.name(),
                res.l2,
                res.n_steps,
                res.dt
            );
            let csv = out.join("linadvdiff.csv");
            write_records_csv(
                "scheme,etype,p,n,peclet,m,l2",
                &[vec![
                    scheme.name().into(),
                    etype.name().into(),
                    p.to_string(),
                    n.to_string(),
                    cfg.peclet.map(|v| v.to_string()).unwrap_or_default(),
                    cfg.m_periods.to_string(),
                    format!("{}", res.l2),
                ]],
                &csv,
            )?;
            manifest.outputs.push(csv.display().to_string());
            0
        }
        "equivalence" => {
            let cfg = EquivalenceConfig {
                kind: etype,
                degree: p,
                n,
                peclet: peclet.unwrap_or(10.0),
                tau: 0.01,
                integrator: Integrator::Rk54,
            };
            let diff = run_equivalence(&cfg)?;
            println!(
                "equivalence {} p{p} n{n}: L_inf(SDRT - FR-SDRT) = {diff:.3e}",
                etype.name()
            );
            0
        }
        "euler_vortex" => {
            let mut cfg = VortexConfig {
                degree: p,
                scheme,
                n,
                m: m.unwrap_or(2),
                snapshot: snapshot.then(|| out.join("snapshot.csv")),
                ..Default::default()
            };
            if let Some(v) = case.mach {
                cfg.mach = v;
            }
            if let Some(v) = case.strength {
                cfg.strength = v;
            }
            if let Some(v) = case.vortex_radius {
                cfg.radius = v;
            }
            if let Some(v) = case.radius_ratio {
                cfg.radius_ratio = v;
            }
            let res = run_euler_vortex(&cfg)?;
            println!(
                "euler_vortex {} p{p} n{n}: density L2 = {:.6e} ({} steps, {:.1}s)",
                scheme.name(),
                res.l2_density,
                res.n_steps,
                res.wall_seconds
            );
            let csv = out.join("euler_vortex.csv");
            write_records_csv(
                "scheme,p,n,m,l2_density",
                &[vec![
                    scheme.name().into(),
                    p.to_string(),
                    n.to_string(),
                    cfg.m.to_string(),
                    format!("{}", res.l2_density),
                ]],
                &csv,
            )?;
            manifest.outputs.push(csv.display().to_string());
            0
        }
        "tgv" => {
            let mut cfg = TgvConfig::desk(etype, scheme, p);
            cfg.n = n;
            cfg.snapshot = snapshot.then(|| out.join("snapshot.csv"));
            if let Some(v) = case.reynolds {
                cfg.reynolds = v;
            }
            if let Some(v) = case.prandtl {
                cfg.prandtl = v;
            }
            if let Some(v) = case.mach {
                cfg.mach = v;
            }
            if let Some(v) = case.t_end {
                cfg.t_end_star = v;
            }
            if let Some(v) = case.sample_interval {
                cfg.sample_interval = v;
            }
            let res = run_tgv(&cfg)?;
            let csv = out.join("tgv.csv");
            let mut rows = Vec::new();
            for s in &res.samples {
                let eps1 = res
                    .eps1
                    .iter()
                    .find(|(t, _)| (t - s.t_star).abs() < 1e-9)
                    .map(|(_, v)| format!("{v}"))
                    .unwrap_or_default();
                let epsd = res
                    .eps_delta
                    .iter()
                    .find(|(t, _)| (t - s.t_star).abs() < 1e-9)
                    .map(|(_, v)| format!("{v}"))
                    .unwrap_or_default();
                rows.push(vec![
                    format!("{}", s.t_star),
                    format!("{}", s.kinetic),
                    eps1,
                    format!("{}", s.eps2),
                    format!("{}", s.eps3),
                    epsd,
                    format!("{}", s.dt),
                ]);
            }
            write_records_csv("t_star,kinetic,eps1,eps2,eps3,eps_delta,dt", &rows, &csv)?;
            manifest.outputs.push(csv.display().to_string());
            match res.diverged {
                Some(t) => {
                    manifest.diverged_at = Some(t);
                    println!(
                        "tgv {} {} p{p} n{n}: diverged at t* = {t:.3} ({} steps)",
                        scheme.name(),
                        etype.name(),
                        res.n_steps
                    );
                    if allow_divergence {
                        2
                    } else {
                        1
                    }
                }
                None => {
                    println!(
                        "tgv {} {} p{p} n{n}: reached t* = {:.1}, mean dt {:.3e} ({} steps, {:.1}s)",
                        scheme.name(),
                        etype.name(),
                        cfg.t_end_star,
                        res.mean_dt,
                        res.n_steps,
                        res.wall_seconds
                    );
                    0
                }
            }
        }
        other => return Err(Error::Config(format!("unknown case `{other}`"))),
    };
    manifest.wall_seconds = start.elapsed().as_secs_f64();
    manifest.write(out)?;
    Ok(status)
}
