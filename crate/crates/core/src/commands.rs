//! Subcommand bodies: compute, then write CSV files into the output directory.
//!
//! Every file starts with `#` lines holding the resolved configuration (as
//! TOML, so stripping the prefix gives a config that reproduces the run),
//! followed by a column header row.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use crate::config::{Command, RunConfig};
use crate::error::{Error, Result};
use crate::farey::farey_speeds;
use crate::front::{build_front_with, fixed_point_residual, positivity_certificate, WindowSpec};
use crate::linear::{decay_rates_for_speed, envelope_speed, linear_spreading_speed};
use crate::model::{LinearParams, RationalSpeed};
use crate::regions::{c_bounds_from, log_log_slope, region_sweep_with, width_samples};
use crate::spectral::{
    default_ring, essential_spectrum_curve, lambda_max, point_spectrum_scan_with,
    stability_margin_from, WeightedSpace,
};
use crate::sweeps::{compare_grid, linspace, staircase};

/// What a command produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    /// Per-point failures recorded in the output instead of aborting.
    pub soft_failures: usize,
    /// Human-readable lines for the terminal.
    pub summary: Vec<String>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

struct CsvFile {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvFile {
    fn create(
        dir: &Path,
        name: &str,
        cfg: &RunConfig,
        cmd: Command,
        columns: &[&str],
    ) -> Result<Self> {
        let path = dir.join(name);
        let mut out = BufWriter::new(File::create(&path)?);
        writeln!(out, "# vlock {} {cmd}", env!("CARGO_PKG_VERSION"))?;
        for line in cfg.to_toml().lines().filter(|l| !l.is_empty()) {
            writeln!(out, "# {line}")?;
        }
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(columns)?;
        Ok(Self { path, writer })
    }

    fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    /// Flush, append `#` footer lines, and hand back the path.
    fn finish(self, footer: &[String]) -> Result<PathBuf> {
        let mut out = self
            .writer
            .into_inner()
            .map_err(|e| Error::Io(e.into_error()))?;
        for line in footer {
            writeln!(out, "# {line}")?;
        }
        out.flush()?;
        Ok(self.path)
    }
}

/// Resolve the config for `cmd`, create the output directory and run.
pub fn run(cmd: Command, cfg: &RunConfig) -> Result<RunReport> {
    let cfg = cfg.resolve(cmd)?;
    let dir = cfg.out_dir();
    std::fs::create_dir_all(&dir)?;
    match cmd {
        Command::Staircase => cmd_staircase(&cfg, &dir),
        Command::Regions => cmd_regions(&cfg, &dir),
        Command::Compare => cmd_compare(&cfg, &dir),
        Command::Front => cmd_front(&cfg, &dir),
        Command::Slin => cmd_slin(&cfg, &dir),
        Command::Spectrum => cmd_spectrum(&cfg, &dir),
        Command::Widths => cmd_widths(&cfg, &dir),
    }
}

// Fields below are filled by `resolve`; missing ones are a bug there.
fn resolved<T>(v: Option<T>) -> T {
    v.expect("field filled in by RunConfig::resolve")
}

fn speed_tag(s: RationalSpeed) -> String {
    format!("{}_{}", s.p(), s.q())
}

fn cmd_staircase(cfg: &RunConfig, dir: &Path) -> Result<RunReport> {
    let cmd = Command::Staircase;
    let (r, c) = (resolved(cfg.params.r), resolved(cfg.params.c));
    let grid = linspace(
        resolved(cfg.grid.m_min),
        resolved(cfg.grid.m_max),
        resolved(cfg.grid.m_count),
    );
    let points = staircase(r, c, &grid, &cfg.sim);
    let mut file = CsvFile::create(
        dir,
        "staircase.csv",
        cfg,
        cmd,
        &["m", "measured_speed", "shift_count", "error"],
    )?;
    let mut report = RunReport::default();
    for p in &points {
        let shifts = p
            .measurement
            .map(|x| x.shift_count.to_string())
            .unwrap_or_default();
        file.row([
            p.m.to_string(),
            fmt_opt(p.speed()),
            shifts,
            p.error.clone().unwrap_or_default(),
        ])?;
        report.soft_failures += p.error.is_some() as usize;
    }
    report.files.push(file.finish(&[])?);
    report.summary.push(format!(
        "{} m points, {} failed",
        points.len(),
        report.soft_failures
    ));
    Ok(report)
}

fn cmd_regions(cfg: &RunConfig, dir: &Path) -> Result<RunReport> {
    let cmd = Command::Regions;
    let r = resolved(cfg.params.r);
    let m_count = resolved(cfg.grid.m_count);
    let tol = cfg.tolerances.front();
    let mut report = RunReport::default();
    for speed in farey_speeds(resolved(cfg.grid.q_max))? {
        let band = match region_sweep_with(r, speed, m_count, &tol) {
            Ok(b) => b,
            Err(e) if e.is_point_failure() => {
                report.soft_failures += 1;
                report.summary.push(format!("band {speed} skipped: {e}"));
                continue;
            }
            Err(e) => return Err(e),
        };
        let name = format!("band_{}.csv", speed_tag(speed));
        let mut file = CsvFile::create(
            dir,
            &name,
            cfg,
            cmd,
            &["m", "c_min", "c_max", "c_max_admissible", "flags"],
        )?;
        for p in &band.points {
            let adm = p.admissible(r);
            file.row([
                p.m.to_string(),
                fmt_opt(p.bounds.map(|b| b.c_min)),
                fmt_opt(p.bounds.map(|b| b.c_max)),
                fmt_opt(adm.map(|b| b.c_max)),
                p.flags(),
            ])?;
        }
        let failures = band.failures();
        report.soft_failures += failures;
        let footer = [format!(
            "speed = {speed}, m_star = {}, saturated = {}",
            band.m_star.m, band.m_star.saturated
        )];
        report.files.push(file.finish(&footer)?);
        report.summary.push(format!(
            "band {speed}: m* = {:.6}, {failures} failed points",
            band.m_star.m
        ));
    }
    Ok(report)
}

fn cmd_compare(cfg: &RunConfig, dir: &Path) -> Result<RunReport> {
    let cmd = Command::Compare;
    let r = resolved(cfg.params.r);
    let speed = cfg.rational_speed(cmd)?;
    let g = &cfg.grid;
    let m_grid = linspace(resolved(g.m_min), resolved(g.m_max), resolved(g.m_count));
    let c_grid = linspace(resolved(g.c_min), resolved(g.c_max), resolved(g.c_count));
    let cmp = compare_grid(
        r,
        speed,
        &m_grid,
        &c_grid,
        &cfg.sim,
        resolved(cfg.tolerances.classify),
        &cfg.tolerances.front(),
    )?;
    let name = format!("compare_{}.csv", speed_tag(speed));
    let columns = [
        "m",
        "c",
        "measured_speed",
        "locked",
        "theory_inside",
        "boundary_adjacent",
        "error",
    ];
    let mut file = CsvFile::create(dir, &name, cfg, cmd, &columns)?;
    let mut report = RunReport::default();
    for cell in &cmp.cells {
        file.row([
            cell.m.to_string(),
            cell.c.to_string(),
            fmt_opt(cell.measured_speed),
            cell.locked.to_string(),
            cell.theory_inside.to_string(),
            cell.boundary_adjacent.to_string(),
            cell.error.clone().unwrap_or_default(),
        ])?;
        report.soft_failures += cell.error.is_some() as usize;
    }
    let total = cmp.cells.len();
    let agree = cmp.cells.iter().filter(|c| c.agrees()).count();
    let off_boundary = cmp.disagreements().filter(|c| !c.boundary_adjacent).count();
    let line = format!(
        "agreement = {agree}/{total} ({:.4}), disagreements away from band edges = {off_boundary}",
        cmp.agreement()
    );
    report.files.push(file.finish(std::slice::from_ref(&line))?);
    report.summary.push(line);
    Ok(report)
}

#[derive(Serialize)]
struct FrontReport {
    speed: String,
    r: f64,
    m: f64,
    c: f64,
    c_min: Option<f64>,
    c_max: Option<f64>,
    inside_band: bool,
    gamma_s: f64,
    gamma_w: f64,
    ell1: u32,
    ell2: u32,
    sum_k: Complex64,
    k: Vec<Complex64>,
    gamma: Vec<Complex64>,
    zeta: Vec<Complex64>,
    /// Γ_1 ..= Γ_{2q}.
    gamma_sums: Vec<f64>,
    vandermonde_agreement: f64,
    vandermonde_condition: Option<f64>,
    modulus_gap: f64,
    fixed_point_residual: f64,
    positive: bool,
    i_star: Option<u64>,
    tail_certified: bool,
    stability_margin: Option<f64>,
    notes: Vec<String>,
}

fn cmd_front(cfg: &RunConfig, dir: &Path) -> Result<RunReport> {
    let cmd = Command::Front;
    let lp = cfg.linear_params(cmd)?;
    let speed = cfg.rational_speed(cmd)?;
    let params = lp.with_threshold(resolved(cfg.params.c))?;
    let profile = build_front_with(&lp, speed, WindowSpec::default(), &cfg.tolerances.front())?;
    let sol = &profile.solution;
    let mut notes = Vec::new();
    let bounds = c_bounds_from(sol)
        .map_err(|e| notes.push(format!("band: {e}")))
        .ok();
    let residual = fixed_point_residual(&profile, &params, speed)?;
    let cert = positivity_certificate(&profile);
    if !cert.tail_certified {
        notes.push("positivity checked on the window only".into());
    }
    let margin = decay_rates_for_speed(&lp, speed)
        .and_then(|pair| stability_margin_from(&lp, speed, &pair))
        .map_err(|e| notes.push(format!("stability: {e}")))
        .ok();
    let q = speed.q() as usize;
    let report_data = FrontReport {
        speed: speed.to_string(),
        r: lp.r(),
        m: lp.m(),
        c: params.c(),
        c_min: bounds.map(|b| b.c_min),
        c_max: bounds.map(|b| b.c_max),
        inside_band: bounds.is_some_and(|b| b.contains(params.c())),
        gamma_s: sol.roots.gamma_s,
        gamma_w: sol.roots.gamma_w,
        ell1: sol.roots.ell1,
        ell2: sol.roots.ell2,
        sum_k: sol.coefficients.ks.iter().sum(),
        k: sol.coefficients.ks.clone(),
        gamma: sol.roots.gammas.clone(),
        zeta: sol.roots.zetas.clone(),
        gamma_sums: profile.gamma_sums[1..=2 * q].to_vec(),
        vandermonde_agreement: sol.coefficients.agreement,
        vandermonde_condition: sol.coefficients.condition,
        modulus_gap: sol.roots.modulus_gap,
        fixed_point_residual: residual,
        positive: cert.positive,
        i_star: cert.i_star,
        tail_certified: cert.tail_certified,
        stability_margin: margin,
        notes,
    };

    let tag = speed_tag(speed);
    let mut file = CsvFile::create(dir, &format!("front_{tag}.csv"), cfg, cmd, &["i", "phi"])?;
    for (i, v) in profile.sites() {
        file.row([i.to_string(), v.to_string()])?;
    }
    let mut report = RunReport::default();
    report.files.push(file.finish(&[])?);

    let report_path = dir.join(format!("front_{tag}_report.toml"));
    let body = toml::to_string(&report_data).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(&report_path, body)?;
    report.files.push(report_path);
    report.summary.push(format!(
        "front {speed}: residual {residual:.3e}, positive {}, inside band {}",
        cert.positive, report_data.inside_band
    ));
    Ok(report)
}

fn cmd_slin(cfg: &RunConfig, dir: &Path) -> Result<RunReport> {
    let cmd = Command::Slin;
    let lp = cfg.linear_params(cmd)?;
    let lin = linear_spreading_speed(&lp)?;
    let mut report = RunReport::default();

    let n = resolved(cfg.grid.gamma_count);
    let mut file = CsvFile::create(dir, "slin_envelope.csv", cfg, cmd, &["gamma", "s_env"])?;
    for i in 1..=n {
        let g = i as f64 / (n + 1) as f64;
        file.row([g.to_string(), envelope_speed(g, &lp)?.to_string()])?;
    }
    report.files.push(file.finish(&[])?);

    let mut file = CsvFile::create(dir, "slin_marker.csv", cfg, cmd, &["gamma_lin", "s_lin"])?;
    file.row([lin.gamma_lin.to_string(), lin.s_lin.to_string()])?;
    report.files.push(file.finish(&[])?);

    let grid = linspace(
        resolved(cfg.grid.m_min),
        resolved(cfg.grid.m_max),
        resolved(cfg.grid.m_count),
    );
    let mut file = CsvFile::create(dir, "slin_sweep.csv", cfg, cmd, &["m", "s_lin", "error"])?;
    for m in grid {
        match LinearParams::new(lp.r(), m).and_then(|p| linear_spreading_speed(&p)) {
            Ok(x) => file.row([m.to_string(), x.s_lin.to_string(), String::new()])?,
            Err(e) => {
                report.soft_failures += 1;
                file.row([m.to_string(), String::new(), e.to_string()])?
            }
        }
    }
    report.files.push(file.finish(&[])?);
    report.summary.push(format!(
        "s_lin = {} at gamma_lin = {}",
        lin.s_lin, lin.gamma_lin
    ));
    Ok(report)
}

fn cmd_spectrum(cfg: &RunConfig, dir: &Path) -> Result<RunReport> {
    let cmd = Command::Spectrum;
    let lp = cfg.linear_params(cmd)?;
    let speed = cfg.rational_speed(cmd)?;
    let space = WeightedSpace::new(resolved(cfg.grid.weight))?;
    let curve = essential_spectrum_curve(&lp, speed, space, resolved(cfg.grid.k_count))?;
    let pair = decay_rates_for_speed(&lp, speed)?;
    let tag = speed_tag(speed);
    let mut report = RunReport::default();

    let mut file = CsvFile::create(
        dir,
        &format!("spectrum_{tag}.csv"),
        cfg,
        cmd,
        &["k", "re", "im", "modulus"],
    )?;
    for (k, l) in curve.k_samples.iter().zip(&curve.lambda_values) {
        file.row([
            k.to_string(),
            l.re.to_string(),
            l.im.to_string(),
            l.norm().to_string(),
        ])?;
    }
    report.files.push(file.finish(&[])?);

    let lmax = lambda_max(&lp, speed, space.weight_rate());
    let margin = stability_margin_from(&lp, speed, &pair);
    let columns = [
        "weight",
        "gamma_s",
        "gamma_w",
        "lambda_max",
        "curve_max_modulus",
        "margin_at_mean_weight",
        "error",
    ];
    let mut file = CsvFile::create(
        dir,
        &format!("spectrum_{tag}_summary.csv"),
        cfg,
        cmd,
        &columns,
    )?;
    file.row([
        space.weight_rate().to_string(),
        pair.gamma_s.to_string(),
        pair.gamma_w.to_string(),
        lmax.to_string(),
        curve.lambda_max_modulus.to_string(),
        margin.as_ref().map(|m| m.to_string()).unwrap_or_default(),
        margin
            .as_ref()
            .err()
            .map(|e| e.to_string())
            .unwrap_or_default(),
    ])?;
    report.files.push(file.finish(&[])?);

    let verdicts = point_spectrum_scan_with(&lp, speed, &default_ring(), &cfg.tolerances.scan())?;
    let columns = [
        "lambda_re",
        "lambda_im",
        "inside",
        "min_separation",
        "excluded",
        "note",
    ];
    let mut file = CsvFile::create(
        dir,
        &format!("point_spectrum_{tag}.csv"),
        cfg,
        cmd,
        &columns,
    )?;
    for v in &verdicts {
        file.row([
            v.lambda.re.to_string(),
            v.lambda.im.to_string(),
            v.inside.to_string(),
            v.min_separation.to_string(),
            v.excluded.to_string(),
            v.note.clone().unwrap_or_default(),
        ])?;
    }
    let excluded = verdicts.iter().filter(|v| v.excluded).count();
    report.soft_failures += verdicts.len() - excluded;
    report.files.push(file.finish(&[])?);
    report.summary.push(format!(
        "lambda_max = {lmax} at weight {}; {excluded}/{} point-spectrum samples excluded",
        space.weight_rate(),
        verdicts.len()
    ));
    Ok(report)
}

fn cmd_widths(cfg: &RunConfig, dir: &Path) -> Result<RunReport> {
    let cmd = Command::Widths;
    let r = resolved(cfg.params.r);
    let speed = cfg.rational_speed(cmd)?;
    let range = (resolved(cfg.grid.m_min), resolved(cfg.grid.m_max));
    let samples = width_samples(
        r,
        speed,
        range,
        resolved(cfg.grid.m_count),
        &cfg.tolerances.front(),
    )?;
    let name = format!("widths_{}.csv", speed_tag(speed));
    let mut file = CsvFile::create(dir, &name, cfg, cmd, &["m", "c_min", "c_max", "width"])?;
    for (m, b) in &samples {
        file.row([
            m.to_string(),
            b.c_min.to_string(),
            b.c_max.to_string(),
            b.width().to_string(),
        ])?;
    }
    let widths: Vec<(f64, f64)> = samples.iter().map(|(m, b)| (*m, b.width())).collect();
    let line = format!("width exponent = {}", log_log_slope(&widths));
    let mut report = RunReport::default();
    report.files.push(file.finish(std::slice::from_ref(&line))?);
    report.summary.push(line);
    Ok(report)
}
