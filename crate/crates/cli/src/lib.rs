//! Front end for the `nlss` binary: configuration, solves, sweeps and output files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod csv;
pub mod svg;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use nlss_core::levels::{assemble_report, EnergyReport};
use nlss_core::thresholds::{compute_thresholds, Thresholds};
use rayon::prelude::*;

use config::{ConfigError, Format, RunConfig, Scale, SweepSpec, SweepVar};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Io(String),
    Solve(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Solve(m) => write!(f, "solver error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solve(_) => EXIT_PARTIAL,
            _ => EXIT_CONFIG,
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

/// Worker count from `NLSS_THREADS`; `None` means rayon's default.
pub fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var("NLSS_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(ConfigError::Invalid(format!("NLSS_THREADS must be a positive integer, got `{v}`")).into()),
        },
    }
}

fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        b = b.num_threads(n);
    }
    let pool = b.build().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(pool.install(f))
}

/// Solve one configuration and write `report.json` / `report.csv`.
pub fn cmd_solve(config_path: &Path, out: Option<&Path>) -> Result<i32, CliError> {
    let cfg = RunConfig::load(config_path)?;
    let setup = cfg.setup()?;
    let dir: PathBuf = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.dir.clone());
    let report = with_pool(|| assemble_report(&setup.params, &setup.grid, &setup.spectrum, &cfg.solver))?
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;

    ensure_dir(&dir)?;
    if cfg.output.formats.contains(&Format::Json) {
        write_file(&dir.join("report.json"), &report_json(&report)?)?;
    }
    if cfg.output.formats.contains(&Format::Csv) {
        write_file(&dir.join("report.csv"), &format!("{}\n{}\n", csv::HEADER, csv::report_row(None, &report)))?;
    }
    for f in &report.failures {
        eprintln!("partial report: {f}");
    }
    Ok(if report.is_partial() { EXIT_PARTIAL } else { EXIT_OK })
}

pub fn report_json(r: &EnergyReport) -> Result<String, CliError> {
    serde_json::to_string_pretty(r).map(|s| s + "\n").map_err(|e| CliError::Io(e.to_string()))
}

/// Outcome of one sweep point.
pub struct SweepPoint {
    pub value: f64,
    pub report: Result<EnergyReport, String>,
}

/// Run every point of a sweep. Point `i` uses seed `seed ^ i`; results come back in index order.
pub fn run_sweep(cfg: &RunConfig, spec: &SweepSpec) -> Result<Vec<SweepPoint>, CliError> {
    spec.validate(cfg)?;
    let setup = cfg.setup()?;
    let values = spec.points();
    with_pool(|| {
        values
            .par_iter()
            .enumerate()
            .map(|(i, &v)| {
                let p = spec.vary.apply(&setup.params, v);
                let opts = cfg.solver.with_seed(cfg.solver.seed ^ i as u64);
                let report = assemble_report(&p, &setup.grid, &setup.spectrum, &opts).map_err(|e| e.to_string());
                SweepPoint { value: v, report }
            })
            .collect()
    })
}

pub fn sweep_csv(cfg: &RunConfig, spec: &SweepSpec, points: &[SweepPoint]) -> Result<String, CliError> {
    let base = cfg.setup()?.params;
    let mut s = String::from(csv::HEADER);
    s.push('\n');
    for pt in points {
        match &pt.report {
            Ok(r) => s.push_str(&csv::report_row(Some(pt.value), r)),
            Err(_) => s.push_str(&csv::failed_row(pt.value, &spec.vary.apply(&base, pt.value))),
        }
        s.push('\n');
    }
    Ok(s)
}

pub fn sweep_svg(cfg: &RunConfig, spec: &SweepSpec, points: &[SweepPoint]) -> String {
    let pick = |f: fn(&EnergyReport) -> Option<f64>| -> Vec<f64> {
        points.iter().map(|p| p.report.as_ref().ok().and_then(f).unwrap_or(f64::NAN)).collect()
    };
    let mut markers = Vec::new();
    if spec.vary == SweepVar::Beta {
        let th: Option<&Thresholds> = points.iter().find_map(|p| p.report.as_ref().ok()?.thresholds.as_ref());
        if let Some(t) = th {
            markers.push(svg::Marker { label: "Λ", x: t.lambda_cap });
            markers.push(svg::Marker { label: "3√(μ₁μ₂)", x: t.three_sqrt });
            markers.push(svg::Marker { label: "max μ", x: t.mu_max });
        } else {
            let p = &cfg.params;
            markers.push(svg::Marker { label: "3√(μ₁μ₂)", x: 3.0 * (p.mu1 * p.mu2).sqrt() });
            markers.push(svg::Marker { label: "max μ", x: p.mu1.max(p.mu2) });
        }
    }
    svg::Plot {
        title: format!("energy levels vs {}", spec.vary.name()),
        x_label: spec.vary.name(),
        x: points.iter().map(|p| p.value).collect(),
        log_x: spec.scale == Scale::Log,
        series: vec![
            svg::Series { name: "e_est", color: "#1f77b4", y: pick(|r| r.e_est) },
            svg::Series { name: "c_prime_est", color: "#d62728", y: pick(|r| r.c_prime_est) },
            svg::Series { name: "c_sem", color: "#2ca02c", y: pick(|r| r.c_sem) },
        ],
        markers,
    }
    .render()
}

/// Sweep one parameter and write `sweep.csv` / `sweep.svg`.
pub fn cmd_sweep(config_path: &Path, spec: &SweepSpec, out: Option<&Path>) -> Result<i32, CliError> {
    let cfg = RunConfig::load(config_path)?;
    let points = run_sweep(&cfg, spec)?;
    let dir: PathBuf = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.dir.clone());
    ensure_dir(&dir)?;
    write_file(&dir.join("sweep.csv"), &sweep_csv(&cfg, spec, &points)?)?;
    write_file(&dir.join("sweep.svg"), &sweep_svg(&cfg, spec, &points))?;

    let mut failed = false;
    for (i, pt) in points.iter().enumerate() {
        let name = spec.vary.name();
        match &pt.report {
            Err(e) => {
                failed = true;
                eprintln!("point {i} ({name} = {}): {e}", csv::num(pt.value));
            }
            Ok(r) if r.is_partial() => {
                failed = true;
                for f in &r.failures {
                    eprintln!("point {i} ({name} = {}): {f}", csv::num(pt.value));
                }
            }
            Ok(_) => {}
        }
    }
    Ok(if failed { EXIT_PARTIAL } else { EXIT_OK })
}

pub fn thresholds_text(lambda1: f64, t: &Thresholds) -> String {
    let rows = [
        ("lambda1_h", lambda1),
        ("Lambda", t.lambda_cap),
        ("beta_hat_1", t.beta_hat_1),
        ("beta_hat_2", t.beta_hat_2),
        ("three_sqrt_mu1_mu2", t.three_sqrt),
        ("mu_max", t.mu_max),
    ];
    rows.iter().map(|(k, v)| format!("{k:<20}{}\n", csv::num(*v))).collect()
}

/// Print the coupling thresholds of a configuration.
pub fn cmd_thresholds(config_path: &Path, json: bool) -> Result<(i32, String), CliError> {
    let cfg = RunConfig::load(config_path)?;
    let setup = cfg.setup()?;
    let t = with_pool(|| compute_thresholds(&setup.params, &setup.grid, &setup.spectrum, &cfg.solver))?
        .map_err(|e| CliError::Solve(e.to_string()))?;
    let text = if json {
        serde_json::to_string_pretty(&t).map_err(|e| CliError::Io(e.to_string()))? + "\n"
    } else {
        thresholds_text(setup.spectrum.lambda1(), &t)
    };
    Ok((EXIT_OK, text))
}
