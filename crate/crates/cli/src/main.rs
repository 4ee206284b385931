//! `relaxlab`: runs, convergence sweeps, symbol spectra and Littlewood–Paley
//! checks driven by a TOML config.
//!
//! Exit codes: 0 success, 1 blow-up or partial results, 2 invalid input.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use relaxlab_core::experiments::{pressure_relaxation_sweep, synthetic_sweep, time_relaxation_sweep, SweepReport};
use relaxlab_core::io::{config_hash, fmt_f64, sweep_csv, write_file, write_run_outputs};
use relaxlab_core::lp::{j_tau, property_suite, SuiteReport};
use relaxlab_core::solver::{integrate, System};
use relaxlab_core::spectral::{landscape, log_grid, overdamping_curve};
use relaxlab_core::{Error, Grid};
use serde::Serialize;

use config::ConfigFile;

#[derive(Parser)]
#[command(name = "relaxlab", version, about = "Relaxation-limit experiments for two-phase flow models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `out` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Overrides the initial-condition seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    snapshots: Option<Toggle>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Integrate one system and write the manifest, ledger and snapshots.
    Run,
    /// BN against K over a sequence of pressure-relaxation times.
    SweepPressure,
    /// Rescaled K against PM over a sequence of friction times.
    SweepTime,
    /// Symbol eigenvalues over frequency and the overdamping curve.
    Spectrum,
    /// Littlewood–Paley property suite on one grid.
    LpCheck,
}

/// Failure carrying its exit status.
struct Fail {
    code: u8,
    msg: String,
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParams(_)
            | Error::Resolution(_)
            | Error::Precondition(_)
            | Error::Unsupported(_)
            | Error::Shape(_)
            | Error::Range(_)
            | Error::Domain(_)
            | Error::Config(_) => 2,
            _ => 1,
        };
        Fail { code, msg: e.to_string() }
    }
}

type Outcome = Result<(), Fail>;

struct Ctx {
    cfg: ConfigFile,
    out: Option<PathBuf>,
    workers: usize,
    seed: Option<u64>,
    snapshots: bool,
}

impl Ctx {
    fn out_dir(&self) -> Result<&Path, Fail> {
        let dir = self.out.as_deref().ok_or_else(|| Fail {
            code: 2,
            msg: "no output directory: pass --out or set `out` in the config".into(),
        })?;
        std::fs::create_dir_all(dir).map_err(|e| Fail { code: 1, msg: format!("{}: {e}", dir.display()) })?;
        Ok(dir)
    }
}

fn cmd_run(ctx: &Ctx) -> Outcome {
    let cfg = ctx.cfg.run_config(ctx.seed, None)?;
    let dir = ctx.out_dir()?;
    let (traj, failure) = match integrate(&cfg) {
        Ok(t) => (t, None),
        Err(f) => (f.partial.clone(), Some(f)),
    };
    let status = if failure.is_some() { "blow-up" } else { "ok" };
    let hash = write_run_outputs(dir, &cfg, cfg.ic.seed, &traj, status, ctx.snapshots)?;
    println!("{} run: {} samples, config {}", cfg.system.as_str(), traj.len(), &hash[..12]);
    match failure {
        Some(f) => Err(Fail { code: 1, msg: format!("{f}; partial outputs in {}", dir.display()) }),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct SweepEcho<'a, S: Serialize> {
    config_hash: &'a str,
    config: S,
    report: &'a SweepReport,
}

fn cmd_sweep(ctx: &Ctx, kind: &str) -> Outcome {
    let section = ctx.cfg.sweep.as_ref().ok_or_else(|| Fail::from(Error::Config("missing required section [sweep]".into())))?;
    let fallback = if kind == "pressure" { System::BN } else { System::PM };
    let (report, hash, failure) = if let Some(syn) = section.synthetic {
        let hash = config_hash(section)?;
        let r = synthetic_sweep(kind, section.vary, &section.values, syn.coefficient, syn.exponent);
        let (r, f) = match r {
            Ok(r) => (r, None),
            Err(f) => (f.partial.clone(), Some(f.error)),
        };
        write_sweep(ctx, kind, section, &hash, &r)?;
        (r, hash, f)
    } else {
        let spec = ctx.cfg.sweep_spec(ctx.seed, fallback)?;
        let hash = config_hash(&spec)?;
        let r = if kind == "pressure" {
            pressure_relaxation_sweep(&spec, ctx.workers)
        } else {
            time_relaxation_sweep(&spec, ctx.workers)
        };
        let (r, f) = match r {
            Ok(r) => (r, None),
            Err(f) => (f.partial.clone(), Some(f.error)),
        };
        write_sweep(ctx, kind, &spec, &hash, &r)?;
        (r, hash, f)
    };
    for row in &report.rows {
        println!("{:>12.5e}  {} = {:.6e}", row.value, report.fit_column, row.errors[&report.fit_column]);
    }
    if let Some(fit) = &report.fit {
        println!("slope {:.4}  r2 {:.5}  config {}", fit.slope, fit.r_squared, &hash[..12]);
        for (p, e) in &fit.excluded {
            println!("excluded from fit: {p:.5e} ({e:.6e})");
        }
    }
    match failure {
        Some(e) => Err(Fail { code: 1, msg: format!("sweep incomplete: {e}") }),
        None => Ok(()),
    }
}

fn write_sweep<S: Serialize>(ctx: &Ctx, kind: &str, config: S, hash: &str, report: &SweepReport) -> Outcome {
    let dir = ctx.out_dir()?;
    let echo = SweepEcho { config_hash: hash, config, report };
    let json = serde_json::to_string_pretty(&echo).map_err(|e| Error::Io(e.to_string()))?;
    write_file(&dir.join(format!("sweep_{kind}.json")), &json)?;
    write_file(&dir.join(format!("sweep_{kind}.csv")), &sweep_csv(report, hash))?;
    Ok(())
}

fn cmd_spectrum(ctx: &Ctx) -> Outcome {
    let s = ctx.cfg.spectrum.ok_or_else(|| Fail::from(Error::Config("missing required section [spectrum]".into())))?;
    let od = s.overdamping;
    if !(s.xi_min > 0.0 && s.xi_max >= s.xi_min && s.xi_points >= 1) {
        return Err(Error::Config("spectrum needs 0 < xi_min <= xi_max and xi_points >= 1".into()).into());
    }
    if !(od.xi > 0.0 && od.friction_min > 0.0 && od.friction_max > od.friction_min && od.points >= 2) {
        return Err(Error::Config("overdamping needs xi > 0, 0 < friction_min < friction_max and points >= 2".into()).into());
    }
    let hash = config_hash(&s)?;
    let mut xis = log_grid(s.xi_min, s.xi_max, s.xi_points);
    if s.include_zero {
        xis.insert(0, 0.0);
    }
    let rows = landscape(s.epsilon, s.tau, s.gamma_gap, &xis, s.ratio_threshold)?;
    let mut csv = String::from("epsilon,tau,xi,re1,im1,re2,im2,re3,im3,max_re,regime,config_hash\n");
    let mut worst = f64::NEG_INFINITY;
    for r in &rows {
        let max_re = r.roots.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max(max_re);
        let mut cells = vec![fmt_f64(r.epsilon), fmt_f64(r.tau), fmt_f64(r.xi)];
        for z in &r.roots {
            cells.push(fmt_f64(z.re));
            cells.push(fmt_f64(z.im));
        }
        cells.push(fmt_f64(max_re));
        cells.push(r.regime.as_str().to_string());
        cells.push(hash.clone());
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }
    let curve = overdamping_curve(od.xi, od.friction_min, od.friction_max, od.points);
    let mut ocsv = String::from("friction,rate,peak,config_hash\n");
    for r in &curve {
        ocsv.push_str(&format!("{},{},{},{hash}\n", fmt_f64(r.friction), fmt_f64(r.rate), u8::from(r.peak)));
    }
    let dir = ctx.out_dir()?;
    write_file(&dir.join("landscape.csv"), &csv)?;
    write_file(&dir.join("overdamping.csv"), &ocsv)?;
    let peak = curve.iter().find(|r| r.peak).expect("curve always carries its peak");
    println!("{} frequencies, max Re lambda {worst:.3e}", rows.len());
    println!("overdamping peak at friction {} with rate {}", peak.friction, peak.rate);
    Ok(())
}

fn cmd_lp_check(ctx: &Ctx) -> Outcome {
    let s = ctx.cfg.lp.ok_or_else(|| Fail::from(Error::Config("missing required section [lp]".into())))?;
    let grid = Grid::new(s.dim, s.n)?;
    let seed = ctx.seed.unwrap_or(s.seed);
    let r = property_suite(grid, s.fields, seed)?;
    let checks = [
        ("partition of unity", r.unity_residual, format!("< {:e}", SuiteReport::UNITY_TOL), r.unity_residual < SuiteReport::UNITY_TOL),
        ("block reconstruction", r.reconstruction, format!("< {:e}", SuiteReport::RECONSTRUCTION_TOL), r.reconstruction < SuiteReport::RECONSTRUCTION_TOL),
        ("Bernstein lower", r.bernstein_min, ">= 0.75".into(), r.bernstein_min >= 0.75),
        ("Bernstein upper", r.bernstein_max, "<= 8/3".into(), r.bernstein_max <= 8.0 / 3.0),
    ];
    println!("grid d={} N={}, {} Bernstein fields, seed {seed}", s.dim, s.n, s.fields);
    for (name, v, bound, ok) in &checks {
        println!("{:<22} {v:<12.3e} {bound:<10} {}", name, if *ok { "PASS" } else { "FAIL" });
    }
    println!("J_tau threshold (tau = {}, k = {}) = {}", s.tau, s.k, j_tau(s.tau, s.k));
    if r.passed() {
        Ok(())
    } else {
        Err(Fail { code: 1, msg: "Littlewood-Paley property failure".into() })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = (|| {
        let path = cli.config.as_deref().ok_or_else(|| Fail { code: 2, msg: "--config is required".into() })?;
        let cfg = config::load(path)?;
        let ctx = Ctx {
            out: cli.out.clone().or_else(|| cfg.out.clone()),
            workers: cli.workers.or(cfg.workers).unwrap_or(0),
            seed: cli.seed,
            snapshots: match cli.snapshots {
                Some(t) => matches!(t, Toggle::On),
                None => cfg.snapshots.unwrap_or(false),
            },
            cfg,
        };
        match cli.command {
            Command::Run => cmd_run(&ctx),
            Command::SweepPressure => cmd_sweep(&ctx, "pressure"),
            Command::SweepTime => cmd_sweep(&ctx, "time"),
            Command::Spectrum => cmd_spectrum(&ctx),
            Command::LpCheck => cmd_lp_check(&ctx),
        }
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
