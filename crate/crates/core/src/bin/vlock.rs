use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vlock_core::commands::run;
use vlock_core::config::{Command, RunConfig};
use vlock_core::Result;

#[derive(Parser)]
#[command(
    name = "vlock",
    version,
    about = "Locked invasion fronts: bands, profiles, spectra and simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,

    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Simulated speed along an m sweep at fixed (r, c)
    Staircase,
    /// Band edges c_min(m), c_max(m) for every speed with q <= q_max
    Regions,
    /// Simulation versus band membership on an (m, c) grid
    Compare,
    /// Front profile and construction report
    Front,
    /// Envelope speed curve and linear spreading speed
    Slin,
    /// Essential-spectrum curve and point-spectrum scan
    Spectrum,
    /// Width exponent of a band at small m
    Widths,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Staircase => Command::Staircase,
            Sub::Regions => Command::Regions,
            Sub::Compare => Command::Compare,
            Sub::Front => Command::Front,
            Sub::Slin => Command::Slin,
            Sub::Spectrum => Command::Spectrum,
            Sub::Widths => Command::Widths,
        }
    }
}

#[derive(Args)]
struct Overrides {
    /// TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Growth rate (> 1)
    #[arg(long, global = true)]
    r: Option<f64>,
    /// Migration rate
    #[arg(long, global = true)]
    m: Option<f64>,
    /// Allee threshold (rc <= 1)
    #[arg(long, global = true)]
    c: Option<f64>,
    /// Speed numerator
    #[arg(long, global = true)]
    p: Option<u32>,
    /// Speed denominator
    #[arg(long, global = true)]
    q: Option<u32>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps
    #[arg(long, global = true, env = "VLOCK_THREADS")]
    threads: Option<usize>,
    /// Grid bounds and point counts; unset ones fall back to per-command defaults
    #[arg(long, global = true)]
    m_min: Option<f64>,
    #[arg(long, global = true)]
    m_max: Option<f64>,
    #[arg(long, global = true)]
    m_count: Option<usize>,
    #[arg(long, global = true)]
    c_min: Option<f64>,
    #[arg(long, global = true)]
    c_max: Option<f64>,
    #[arg(long, global = true)]
    c_count: Option<usize>,
    /// Largest speed denominator for `regions`
    #[arg(long, global = true)]
    q_max: Option<u32>,
    /// Tolerance overrides, one per named tolerance
    #[arg(long, global = true)]
    tol_residual: Option<f64>,
    #[arg(long, global = true)]
    tol_count_slack: Option<f64>,
    #[arg(long, global = true)]
    tol_modulus_gap: Option<f64>,
    #[arg(long, global = true)]
    tol_pairing: Option<f64>,
    #[arg(long, global = true)]
    tol_zeta_identity: Option<f64>,
    #[arg(long, global = true)]
    tol_zeta_separation: Option<f64>,
    #[arg(long, global = true)]
    tol_coefficient_agreement: Option<f64>,
    #[arg(long, global = true)]
    tol_imag_residue: Option<f64>,
    #[arg(long, global = true)]
    tol_normalization: Option<f64>,
    #[arg(long, global = true)]
    tol_radius_slack: Option<f64>,
    #[arg(long, global = true)]
    tol_separation: Option<f64>,
    #[arg(long, global = true)]
    tol_classify: Option<f64>,
}

fn set<T>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        set(&mut cfg.params.r, self.r);
        set(&mut cfg.params.m, self.m);
        set(&mut cfg.params.c, self.c);
        set(&mut cfg.speed.p, self.p);
        set(&mut cfg.speed.q, self.q);
        set(&mut cfg.out, self.out.clone());
        set(&mut cfg.threads, self.threads);
        set(&mut cfg.grid.m_min, self.m_min);
        set(&mut cfg.grid.m_max, self.m_max);
        set(&mut cfg.grid.m_count, self.m_count);
        set(&mut cfg.grid.c_min, self.c_min);
        set(&mut cfg.grid.c_max, self.c_max);
        set(&mut cfg.grid.c_count, self.c_count);
        set(&mut cfg.grid.q_max, self.q_max);
        let tols = [
            ("residual", self.tol_residual),
            ("count_slack", self.tol_count_slack),
            ("modulus_gap", self.tol_modulus_gap),
            ("pairing", self.tol_pairing),
            ("zeta_identity", self.tol_zeta_identity),
            ("zeta_separation", self.tol_zeta_separation),
            ("coefficient_agreement", self.tol_coefficient_agreement),
            ("imag_residue", self.tol_imag_residue),
            ("normalization", self.tol_normalization),
            ("radius_slack", self.tol_radius_slack),
            ("separation", self.tol_separation),
            ("classify", self.tol_classify),
        ];
        for (name, value) in tols {
            if let Some(v) = value {
                cfg.tolerances.set(name, v)?;
            }
        }
        Ok(())
    }
}

fn execute(cli: &Cli) -> Result<usize> {
    let mut cfg = match &cli.overrides.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cli.overrides.apply(&mut cfg)?;
    let cmd = Command::from(cli.command);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| vlock_core::Error::Config(format!("thread pool: {e}")))?;
    let report = pool.install(|| run(cmd, &cfg))?;
    for line in &report.summary {
        println!("{line}");
    }
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    Ok(report.soft_failures)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("{n} point(s) failed; see the error/flags columns");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
