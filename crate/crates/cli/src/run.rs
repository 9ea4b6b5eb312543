//! Command-line surface and task drivers.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lgcorr::detection::render_mask_pgm;
use lgcorr::source::{optimal_waist, phase_matching_b, schmidt_k, schmidt_k_azimuthal, schmidt_k_radial};
use lgcorr::{Estimator, Exec, MatrixRun, ModeIndex};

use crate::config::{load_config, EstimatorChoice, RunConfig};
use crate::error::CliError;
use crate::output::{key_value_csv, normalized_matrix_csv, raw_matrix_csv, sweep_csv, AxisLabel, OutputSet};

pub const THREADS_ENV: &str = "LGCORR_THREADS";

#[derive(Debug, Parser)]
#[command(name = "lgcorr", version, about = "Coincidence matrices of SPDC pairs in the LG basis")]
pub struct Cli {
    /// JSON run configuration; omitted keys take the built-in defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Replaces the UTC timestamp in output file names.
    #[arg(long, global = true)]
    pub tag: Option<String>,

    /// Worker threads; also read from LGCORR_THREADS.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Run the sequential code path.
    #[arg(long, global = true)]
    pub serial: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Svd,
    Diagonal,
}

#[derive(Debug, Args, Default)]
pub struct DetectionArgs {
    /// Detection waist at the crystal, µm.
    #[arg(long, allow_hyphen_values = true)]
    pub waist: Option<f64>,

    /// Model SLM pixelation.
    #[arg(long, value_enum)]
    pub pixelation: Option<Switch>,

    #[arg(long, value_enum)]
    pub estimator: Option<EstimatorArg>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// (P+1)×(P+1) matrix over radial indices at fixed l.
    RadialMatrix {
        #[arg(long, allow_hyphen_values = true)]
        ell: Option<i32>,
        #[arg(long)]
        pmax: Option<u32>,
        #[command(flatten)]
        det: DetectionArgs,
    },
    /// (2L+1)×(2L+1) matrix over l at fixed p.
    AzimuthalMatrix {
        #[arg(long)]
        p: Option<u32>,
        #[arg(long)]
        ell_max: Option<u32>,
        #[command(flatten)]
        det: DetectionArgs,
    },
    /// Radial matrices over a list of detection waists.
    WaistSweep {
        /// Comma-separated waists in µm.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        waists: Option<Vec<f64>>,
        #[arg(long, allow_hyphen_values = true)]
        ell: Option<i32>,
        #[arg(long)]
        pmax: Option<u32>,
        #[command(flatten)]
        det: DetectionArgs,
    },
    /// Closed-form Schmidt numbers and optimal waist.
    Schmidt {
        /// Pump angular width σ in µm⁻¹.
        #[arg(long, allow_hyphen_values = true)]
        sigma: Option<f64>,
    },
    /// SLM phase mask as a binary PGM.
    EmitMask {
        #[arg(long, allow_hyphen_values = true)]
        ell: Option<i32>,
        #[arg(long)]
        p: Option<u32>,
        #[arg(long, allow_hyphen_values = true)]
        waist: Option<f64>,
        #[arg(long)]
        pixels: Option<usize>,
    },
}

impl DetectionArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(w) = self.waist {
            cfg.detection.mode_waist_um = w;
        }
        if let Some(s) = self.pixelation {
            cfg.detection.pixelation = s == Switch::On;
        }
        if let Some(e) = self.estimator {
            cfg.detection.estimator = match e {
                EstimatorArg::Svd => EstimatorChoice::Svd,
                EstimatorArg::Diagonal => EstimatorChoice::Diagonal,
            };
        }
    }
}

/// Applies command-line overrides on top of the file (or default) config.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    let t = &mut cfg.task;
    match &cli.command {
        Command::RadialMatrix { ell, pmax, det } => {
            t.ell = ell.unwrap_or(t.ell);
            t.p_max = pmax.unwrap_or(t.p_max);
            det.apply(&mut cfg);
        }
        Command::AzimuthalMatrix { p, ell_max, det } => {
            t.p = p.unwrap_or(t.p);
            t.ell_max = ell_max.unwrap_or(t.ell_max);
            det.apply(&mut cfg);
        }
        Command::WaistSweep { waists, ell, pmax, det } => {
            if let Some(ws) = waists {
                t.waists_um = ws.clone();
            }
            t.ell = ell.unwrap_or(t.ell);
            t.p_max = pmax.unwrap_or(t.p_max);
            det.apply(&mut cfg);
        }
        Command::Schmidt { sigma } => {
            if sigma.is_some() {
                cfg.source.sigma_per_um = *sigma;
            }
        }
        Command::EmitMask { ell, p, waist, pixels } => {
            t.ell = ell.unwrap_or(t.ell);
            t.p = p.unwrap_or(t.p);
            t.mask_pixels = pixels.unwrap_or(t.mask_pixels);
            if let Some(w) = waist {
                cfg.detection.mode_waist_um = *w;
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn thread_count(cli: &Cli) -> Result<Option<usize>, CliError> {
    if let Some(n) = cli.threads {
        return if n == 0 {
            Err(CliError::validation("--threads", "must be >= 1"))
        } else {
            Ok(Some(n))
        };
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::validation(THREADS_ENV, format!("must be a positive integer (got {v:?})"))),
        },
        Err(_) => Ok(None),
    }
}

fn stamp(cli: &Cli) -> String {
    match &cli.tag {
        Some(t) => t.clone(),
        None => chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string(),
    }
}

fn base_meta(task: &str, cfg: &RunConfig, exec: Exec, threads: usize) -> Result<Value, CliError> {
    let source = cfg.source_params()?;
    Ok(json!({
        "task": task,
        "version": env!("CARGO_PKG_VERSION"),
        "created_utc": chrono::Utc::now().to_rfc3339(),
        "execution": { "parallel": exec.is_parallel(), "threads": threads },
        "config": cfg,
        "physics": {
            "phase_matching_b_um": phase_matching_b(&source),
            "sigma_per_um": cfg.sigma()?,
            "working_pump_waist_um": source.pump_waist_um() * cfg.optics.magnification,
            "fiber_waist_slm_um": cfg.optics.fiber_waist_slm_um,
            "pixel_pitch_um": cfg.optics()?.pixel_pitch(),
        },
    }))
}

fn run_meta(run: &MatrixRun) -> Result<Value, CliError> {
    let stats = run.stats()?;
    let fields: Vec<Value> = run
        .fields
        .iter()
        .map(|f| {
            json!({
                "ell": f.mode.ell,
                "p": f.mode.p,
                "pmax_used": f.pmax_used,
                "weighted_tail": f.weighted_tail,
                "raw_tail_fraction": f.raw_tail_fraction,
            })
        })
        .collect();
    Ok(json!({
        "gamma": run.gamma,
        "mode_waist_um": run.mode_waist,
        "r_max_um": run.r_max,
        "quadrature_nodes": run.quadrature_nodes,
        "weight_normalization": run.weight_normalization,
        "total_rate": run.matrix.total(),
        "max_rate": run.matrix.max_rate(),
        "stats": {
            "W": stats.w_diag,
            "schmidt_estimate_svd": stats.schmidt_estimate,
            "diagonal_participation": stats.diagonal_participation,
        },
        "fields": fields,
    }))
}

fn selected_estimate(cfg: &RunConfig, run: &MatrixRun) -> Result<f64, CliError> {
    Ok(Estimator::from(cfg.detection.estimator).estimate(&run.matrix)?)
}

fn write_matrix(
    task: &str,
    cfg: &RunConfig,
    run: &MatrixRun,
    axis: AxisLabel,
    stamp: &str,
    meta: &mut Value,
) -> Result<Vec<PathBuf>, CliError> {
    let mut out = OutputSet::new(&cfg.output_dir, task, stamp)?;
    out.write(".csv", normalized_matrix_csv(&run.matrix, axis).as_bytes())?;
    out.write(".raw.csv", raw_matrix_csv(&run.matrix, axis).as_bytes())?;
    meta["run"] = run_meta(run)?;
    meta["estimator"] = json!(cfg.detection.estimator);
    meta["schmidt_estimate"] = json!(selected_estimate(cfg, run)?);
    meta["files"] = json!({ "normalized": out.file_name(".csv"), "raw": out.file_name(".raw.csv") });
    out.write_json(".meta.json", meta)?;
    Ok(out.written().to_vec())
}

/// Runs one subcommand and returns the files it wrote.
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let cfg = resolve_config(cli)?;
    let threads = thread_count(cli)?;
    let exec = if cli.serial { Exec::Serial } else { Exec::Parallel };
    let stamp = stamp(cli);
    let run_in_pool = |f: &(dyn Fn() -> Result<Vec<PathBuf>, CliError> + Sync)| match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::validation("threads", e.to_string()))?
            .install(f),
        None => f(),
    };
    let n_threads = threads.unwrap_or_else(rayon::current_num_threads);
    run_in_pool(&|| dispatch(&cli.command, &cfg, exec, n_threads, &stamp))
}

fn dispatch(command: &Command, cfg: &RunConfig, exec: Exec, threads: usize, stamp: &str) -> Result<Vec<PathBuf>, CliError> {
    let model = cfg.model()?.with_exec(exec);
    let t = &cfg.task;
    match command {
        Command::RadialMatrix { .. } => {
            let template = cfg.detection_template(ModeIndex::new(t.ell, 0))?;
            let run = model.radial_matrix(t.ell, t.p_max, &template)?;
            let mut meta = base_meta("radial_matrix", cfg, exec, threads)?;
            write_matrix("radial_matrix", cfg, &run, AxisLabel::Radial, stamp, &mut meta)
        }
        Command::AzimuthalMatrix { .. } => {
            let template = cfg.detection_template(ModeIndex::new(0, t.p))?;
            let run = model.azimuthal_matrix(t.p, t.ell_max, &template)?;
            let mut meta = base_meta("azimuthal_matrix", cfg, exec, threads)?;
            write_matrix("azimuthal_matrix", cfg, &run, AxisLabel::Azimuthal, stamp, &mut meta)
        }
        Command::WaistSweep { .. } => {
            let template = cfg.detection_template(ModeIndex::new(t.ell, 0))?;
            let rows = model.waist_sweep(&t.waists_um, t.ell, t.p_max, &template)?;
            let mut out = OutputSet::new(&cfg.output_dir, "waist_sweep", stamp)?;
            out.write(".csv", sweep_csv(&rows).as_bytes())?;
            let mut meta = base_meta("waist_sweep", cfg, exec, threads)?;
            meta["files"] = json!({ "sweep": out.file_name(".csv") });
            out.write_json(".meta.json", &meta)?;
            Ok(out.written().to_vec())
        }
        Command::Schmidt { .. } => {
            let source = cfg.source_params()?;
            let b = phase_matching_b(&source);
            let sigma = cfg.sigma()?;
            let k = schmidt_k(b * sigma)?;
            let pairs = [
                ("phase_matching_b_um", b),
                ("sigma_per_um", sigma),
                ("b_sigma", b * sigma),
                ("K", k),
                ("K_azimuthal", schmidt_k_azimuthal(k)?),
                ("K_radial", schmidt_k_radial(k)?),
                ("optimal_waist_um", optimal_waist(b, sigma)?),
            ];
            let mut out = OutputSet::new(&cfg.output_dir, "schmidt", stamp)?;
            out.write(".csv", key_value_csv(&pairs).as_bytes())?;
            let mut meta = base_meta("schmidt", cfg, exec, threads)?;
            meta["results"] = pairs.iter().map(|(k, v)| (k.to_string(), json!(v))).collect::<serde_json::Map<_, _>>().into();
            meta["files"] = json!({ "table": out.file_name(".csv") });
            out.write_json(".meta.json", &meta)?;
            Ok(out.written().to_vec())
        }
        Command::EmitMask { .. } => {
            let mode = ModeIndex::new(t.ell, t.p);
            let pitch = cfg.optics.pixel_pitch_um;
            let working_waist = cfg.detection.mode_waist_um * cfg.optics.magnification;
            let pgm = render_mask_pgm(mode, working_waist, t.mask_pixels, pitch)?;
            let task = format!("mask_l{}_p{}", t.ell, t.p);
            let mut out = OutputSet::new(&cfg.output_dir, &task, stamp)?;
            out.write(".pgm", &pgm)?;
            let mut meta = base_meta("emit_mask", cfg, exec, threads)?;
            meta["mask"] = json!({
                "ell": t.ell,
                "p": t.p,
                "working_waist_um": working_waist,
                "pixels": t.mask_pixels,
                "pixel_pitch_um": pitch,
            });
            meta["files"] = json!({ "mask": out.file_name(".pgm") });
            out.write_json(".meta.json", &meta)?;
            Ok(out.written().to_vec())
        }
    }
}
