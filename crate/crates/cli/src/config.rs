//! Run configuration: a JSON file with unit-suffixed keys. Every section and
//! key is optional; omitted values take the reference-apparatus defaults.
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use lgcorr::detection::PAPER_PIXEL_PITCH_UM;
use lgcorr::source::WeightNormalization;
use lgcorr::{DetectionConfig, Estimator, ExpansionPolicy, GridConfig, ModeIndex, Model, OpticsConfig, SourceParams};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceSection {
    pub crystal_length_mm: f64,
    pub pump_wavelength_nm: f64,
    pub pump_waist_um: f64,
    /// Overrides the default `√2 / w_p`.
    pub sigma_per_um: Option<f64>,
}

impl Default for SourceSection {
    fn default() -> Self {
        SourceSection {
            crystal_length_mm: 2.0,
            pump_wavelength_nm: 413.0,
            pump_waist_um: 325.0,
            sigma_per_um: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpticsSection {
    pub magnification: f64,
    pub fiber_waist_slm_um: f64,
    pub pixel_pitch_um: f64,
}

impl Default for OpticsSection {
    fn default() -> Self {
        OpticsSection {
            magnification: 7.5,
            fiber_waist_slm_um: 1275.0,
            pixel_pitch_um: PAPER_PIXEL_PITCH_UM,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorChoice {
    #[default]
    Svd,
    Diagonal,
}

impl From<EstimatorChoice> for Estimator {
    fn from(e: EstimatorChoice) -> Self {
        match e {
            EstimatorChoice::Svd => Estimator::Svd,
            EstimatorChoice::Diagonal => Estimator::Diagonal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionSection {
    pub mode_waist_um: f64,
    pub expansion_pmax: usize,
    pub expansion_cap: usize,
    pub tail_tolerance: f64,
    pub pixelation: bool,
    pub estimator: EstimatorChoice,
    pub weight_norm_pmax: usize,
    pub weight_norm_ell_max: u32,
}

impl Default for DetectionSection {
    fn default() -> Self {
        let policy = ExpansionPolicy::default();
        let norm = WeightNormalization::default();
        DetectionSection {
            mode_waist_um: 1000.0,
            expansion_pmax: 60,
            expansion_cap: policy.cap,
            tail_tolerance: policy.tolerance,
            pixelation: false,
            estimator: EstimatorChoice::Svd,
            weight_norm_pmax: norm.pmax,
            weight_norm_ell_max: norm.ell_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub r_max_factor: f64,
    pub n_nodes: usize,
    pub subdivisions: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        let g = GridConfig::default();
        GridSection {
            r_max_factor: g.r_max_factor,
            n_nodes: g.n_nodes,
            subdivisions: g.subdivisions,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskSection {
    pub ell: i32,
    pub p_max: u32,
    pub p: u32,
    pub ell_max: u32,
    pub waists_um: Vec<f64>,
    pub mask_pixels: usize,
}

impl Default for TaskSection {
    fn default() -> Self {
        TaskSection {
            ell: 0,
            p_max: 10,
            p: 0,
            ell_max: 5,
            waists_um: vec![1275.0, 1000.0, 812.5, 650.0, 500.0, 400.0, 300.0],
            mask_pixels: 600,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub source: SourceSection,
    pub optics: OpticsSection,
    pub detection: DetectionSection,
    pub grid: GridSection,
    pub task: TaskSection,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            source: SourceSection::default(),
            optics: OpticsSection::default(),
            detection: DetectionSection::default(),
            grid: GridSection::default(),
            task: TaskSection::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::validation(field, format!("must be a finite number > 0 (got {v})")))
    }
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    parse_config(&text, path)
}

pub fn parse_config(text: &str, path: &Path) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        positive("source.crystal_length_mm", self.source.crystal_length_mm)?;
        positive("source.pump_wavelength_nm", self.source.pump_wavelength_nm)?;
        positive("source.pump_waist_um", self.source.pump_waist_um)?;
        if let Some(s) = self.source.sigma_per_um {
            positive("source.sigma_per_um", s)?;
        }
        positive("optics.magnification", self.optics.magnification)?;
        positive("optics.fiber_waist_slm_um", self.optics.fiber_waist_slm_um)?;
        positive("optics.pixel_pitch_um", self.optics.pixel_pitch_um)?;
        positive("detection.mode_waist_um", self.detection.mode_waist_um)?;
        positive("detection.tail_tolerance", self.detection.tail_tolerance)?;
        if self.detection.expansion_pmax == 0 {
            return Err(CliError::validation("detection.expansion_pmax", "must be >= 1"));
        }
        if self.detection.expansion_cap < self.detection.expansion_pmax {
            return Err(CliError::validation(
                "detection.expansion_cap",
                format!("must be >= detection.expansion_pmax ({})", self.detection.expansion_pmax),
            ));
        }
        positive("grid.r_max_factor", self.grid.r_max_factor)?;
        if self.grid.n_nodes < 2 {
            return Err(CliError::validation("grid.n_nodes", "must be >= 2"));
        }
        if self.grid.subdivisions == 0 {
            return Err(CliError::validation("grid.subdivisions", "must be >= 1"));
        }
        if self.task.waists_um.is_empty() {
            return Err(CliError::validation("task.waists_um", "must not be empty"));
        }
        for (k, &w) in self.task.waists_um.iter().enumerate() {
            positive(&format!("task.waists_um[{k}]"), w)?;
        }
        if self.task.mask_pixels == 0 {
            return Err(CliError::validation("task.mask_pixels", "must be >= 1"));
        }
        Ok(())
    }

    pub fn source_params(&self) -> Result<SourceParams, CliError> {
        Ok(SourceParams::new(
            self.source.crystal_length_mm,
            self.source.pump_wavelength_nm,
            self.source.pump_waist_um,
        )?)
    }

    pub fn sigma(&self) -> Result<f64, CliError> {
        Ok(match self.source.sigma_per_um {
            Some(s) => s,
            None => self.source_params()?.default_sigma(),
        })
    }

    pub fn optics(&self) -> Result<OpticsConfig, CliError> {
        let pitch = self.detection.pixelation.then_some(self.optics.pixel_pitch_um);
        Ok(OpticsConfig::new(
            self.optics.magnification,
            self.optics.fiber_waist_slm_um,
            pitch,
        )?)
    }

    pub fn detection_template(&self, mode: ModeIndex) -> Result<DetectionConfig, CliError> {
        Ok(DetectionConfig::new(
            mode,
            self.detection.mode_waist_um,
            self.detection.expansion_pmax.max(mode.p as usize),
            self.optics()?,
        )?)
    }

    pub fn model(&self) -> Result<Model, CliError> {
        let mut model = Model::new(self.source_params()?);
        model.grid = GridConfig {
            r_max_factor: self.grid.r_max_factor,
            n_nodes: self.grid.n_nodes,
            subdivisions: self.grid.subdivisions,
        };
        model.expansion = ExpansionPolicy {
            cap: self.detection.expansion_cap,
            tolerance: self.detection.tail_tolerance,
        };
        model.weight_norm = WeightNormalization {
            pmax: self.detection.weight_norm_pmax,
            ell_max: self.detection.weight_norm_ell_max,
        };
        Ok(model)
    }
}
