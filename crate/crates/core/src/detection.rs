//! Advanced-wave model of an SLM + single-mode-fiber mode projector.
//!
//! A detector set to `(l, p)` is back-propagated to the crystal plane as the
//! fiber Gaussian carrying the SLM's binary radial phase, expanded in LG
//! modes, re-weighted by the SPDC pair weights and re-summed. All of this
//! happens in the SLM plane, onto which the crystal is imaged.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{domain, structural, Error, Result};
use crate::modes::{laguerre_unchecked, laguerre_zeros, ComplexRadialField, LgBasis, ModeIndex, QuadratureRule};
use crate::source::SourceParams;

/// SLM pixel pitch of the reference apparatus (16 mm / 800 px), µm.
pub const PAPER_PIXEL_PITCH_UM: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticsConfig {
    magnification: f64,
    fiber_waist_slm: f64,
    pixel_pitch: Option<f64>,
}

impl OpticsConfig {
    pub fn new(magnification: f64, fiber_waist_slm: f64, pixel_pitch: Option<f64>) -> Result<Self> {
        if !(magnification.is_finite() && magnification > 0.0) {
            return Err(domain("OpticsConfig", format!("magnification must be > 0, got {magnification}")));
        }
        if !(fiber_waist_slm.is_finite() && fiber_waist_slm > 0.0) {
            return Err(domain("OpticsConfig", format!("fiber_waist_slm must be > 0, got {fiber_waist_slm}")));
        }
        if let Some(p) = pixel_pitch {
            if !(p.is_finite() && p > 0.0) {
                return Err(domain("OpticsConfig", format!("pixel_pitch must be > 0, got {p}")));
            }
        }
        Ok(OpticsConfig {
            magnification,
            fiber_waist_slm,
            pixel_pitch,
        })
    }

    /// 7.5× imaging, 1275 µm fiber waist at the SLM, continuous (unpixelated) SLM.
    pub fn paper_defaults() -> Self {
        OpticsConfig {
            magnification: 7.5,
            fiber_waist_slm: 1275.0,
            pixel_pitch: None,
        }
    }

    pub fn with_pixel_pitch(mut self, pitch: Option<f64>) -> Result<Self> {
        self.pixel_pitch = pitch;
        Self::new(self.magnification, self.fiber_waist_slm, self.pixel_pitch)
    }

    pub fn magnification(&self) -> f64 {
        self.magnification
    }

    pub fn fiber_waist_slm(&self) -> f64 {
        self.fiber_waist_slm
    }

    pub fn pixel_pitch(&self) -> Option<f64> {
        self.pixel_pitch
    }
}

/// One detector setting. `mode_waist` is the projected LG waist in the SLM plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionConfig {
    pub mode: ModeIndex,
    pub mode_waist: f64,
    pub expansion_pmax: usize,
    pub optics: OpticsConfig,
}

impl DetectionConfig {
    pub fn new(mode: ModeIndex, mode_waist: f64, expansion_pmax: usize, optics: OpticsConfig) -> Result<Self> {
        if !(mode_waist.is_finite() && mode_waist > 0.0) {
            return Err(domain("DetectionConfig", format!("mode_waist must be > 0, got {mode_waist}")));
        }
        if expansion_pmax < mode.p as usize {
            return Err(domain(
                "DetectionConfig",
                format!("expansion_pmax {expansion_pmax} is below the detected p = {}", mode.p),
            ));
        }
        Ok(DetectionConfig {
            mode,
            mode_waist,
            expansion_pmax,
            optics,
        })
    }

    /// Same detector geometry, different projected mode.
    pub fn with_mode(&self, mode: ModeIndex) -> Result<Self> {
        Self::new(mode, self.mode_waist, self.expansion_pmax.max(mode.p as usize), self.optics)
    }

    /// Pump-to-detection waist ratio in the SLM plane.
    pub fn gamma(&self, source: &SourceParams) -> f64 {
        to_working_plane(source.pump_waist_um(), &self.optics) / self.mode_waist
    }

    pub fn phase_profile(&self) -> PhaseProfile {
        let mask = PhaseProfile::Mask {
            mode: self.mode,
            waist: self.mode_waist,
        };
        match self.optics.pixel_pitch {
            Some(pitch) => PhaseProfile::Staircase {
                base: Box::new(mask),
                pitch,
            },
            None => mask,
        }
    }
}

/// Maps a crystal-plane waist into the SLM plane.
pub fn to_working_plane(waist_at_crystal: f64, optics: &OpticsConfig) -> f64 {
    waist_at_crystal * optics.magnification
}

/// Radial part of `arg LG_p^l`: 0 where `L_p^|l|(2r²/w²) >= 0`, π elsewhere.
pub fn mask_phase(mode: ModeIndex, w: f64, r: f64) -> f64 {
    let x = 2.0 * r * r / (w * w);
    if laguerre_unchecked(mode.p, f64::from(mode.abs_ell()), x) >= 0.0 {
        0.0
    } else {
        PI
    }
}

/// A radial phase function with a known, finite set of jump radii.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseProfile {
    Constant(f64),
    /// The SLM phase for an LG mode at the given waist.
    Mask { mode: ModeIndex, waist: f64 },
    /// `base` sampled at annulus midpoints, constant on `[k·pitch, (k+1)·pitch)`.
    Staircase { base: Box<PhaseProfile>, pitch: f64 },
}

impl PhaseProfile {
    pub fn at(&self, r: f64) -> f64 {
        match self {
            PhaseProfile::Constant(v) => *v,
            PhaseProfile::Mask { mode, waist } => mask_phase(*mode, *waist, r),
            PhaseProfile::Staircase { base, pitch } => base.at(((r / pitch).floor() + 0.5) * pitch),
        }
    }

    /// Radii in `(0, r_max)` where the phase jumps, ascending.
    pub fn jumps(&self, r_max: f64) -> Vec<f64> {
        match self {
            PhaseProfile::Constant(_) => Vec::new(),
            PhaseProfile::Mask { mode, waist } => laguerre_zeros(mode.p, mode.abs_ell())
                .into_iter()
                .map(|x| waist * (0.5 * x).sqrt())
                .filter(|&r| r < r_max)
                .collect(),
            PhaseProfile::Staircase { base, pitch } => {
                let annuli = (r_max / pitch).ceil() as usize;
                let mut out = Vec::new();
                let mut prev = base.at(0.5 * pitch);
                for k in 1..annuli {
                    let cur = base.at((k as f64 + 0.5) * pitch);
                    if cur != prev {
                        out.push(k as f64 * pitch);
                    }
                    prev = cur;
                }
                out
            }
        }
    }
}

/// Staircases a radial phase profile onto annuli of width `pitch`.
pub fn pixelate(profile: PhaseProfile, pitch: f64) -> Result<PhaseProfile> {
    if !(pitch.is_finite() && pitch > 0.0) {
        return Err(domain("pixelate", format!("pitch must be > 0, got {pitch}")));
    }
    Ok(match profile {
        PhaseProfile::Constant(v) => PhaseProfile::Constant(v),
        other => PhaseProfile::Staircase {
            base: Box::new(other),
            pitch,
        },
    })
}

fn unit_phasor(phase: f64) -> Complex64 {
    if phase == 0.0 {
        Complex64::new(1.0, 0.0)
    } else if phase == PI {
        Complex64::new(-1.0, 0.0)
    } else {
        Complex64::from_polar(1.0, phase)
    }
}

/// Fiber-mode amplitude `exp(-r²/w_SMF²)` at the SLM.
pub fn fiber_amplitude(r: f64, fiber_waist: f64) -> f64 {
    (-(r * r) / (fiber_waist * fiber_waist)).exp()
}

/// Detector field at the crystal before any SPDC weighting: fiber Gaussian
/// times the (optionally pixelated) SLM phase.
pub fn detection_field_raw(cfg: &DetectionConfig, rule: &QuadratureRule) -> ComplexRadialField {
    let profile = cfg.phase_profile();
    let wf = cfg.optics.fiber_waist_slm;
    ComplexRadialField::from_fn(cfg.mode.ell, rule, |r| unit_phasor(profile.at(r)) * fiber_amplitude(r, wf))
}

/// LG expansion coefficients of a detector field.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    pub ell: i32,
    pub alphas: Vec<Complex64>,
    /// `‖u‖² − Σ|α|²` (clamped at 0): energy beyond the cutoff.
    pub tail_energy: f64,
    /// `‖u‖²` of the decomposed field.
    pub field_norm_sqr: f64,
}

impl DecompositionResult {
    pub fn pmax(&self) -> usize {
        self.alphas.len() - 1
    }
}

/// `α_p' = ⟨LG_p'^l(w)|u⟩` for `p' = 0..=pmax`.
pub fn decompose(u: &ComplexRadialField, w: f64, pmax: usize, rule: &QuadratureRule) -> Result<DecompositionResult> {
    let basis = LgBasis::new(u.ell(), w, pmax)?;
    let alphas = basis.project(u, rule)?;
    let field_norm_sqr = u.norm_sqr(rule)?;
    let captured: f64 = alphas.iter().map(Complex64::norm_sqr).sum();
    Ok(DecompositionResult {
        ell: u.ell(),
        alphas,
        tail_energy: (field_norm_sqr - captured).max(0.0),
        field_norm_sqr,
    })
}

/// `α'_p' = sqrt(C_p') α_p'`.
pub fn reweight(d: &DecompositionResult, weights: &[f64]) -> Result<DecompositionResult> {
    if weights.len() != d.alphas.len() {
        return Err(structural(
            "reweight",
            format!("{} weights for {} coefficients", weights.len(), d.alphas.len()),
        ));
    }
    if weights.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
        return Err(domain("reweight", "weights must be finite and >= 0"));
    }
    Ok(DecompositionResult {
        alphas: d.alphas.iter().zip(weights).map(|(a, c)| a * c.sqrt()).collect(),
        ..d.clone()
    })
}

/// `u_det = Σ_p' α'_p' LG_p'^l(w)`.
pub fn effective_detection_field(d: &DecompositionResult, w: f64, rule: &QuadratureRule) -> Result<ComplexRadialField> {
    LgBasis::new(d.ell, w, d.pmax())?.synthesize(&d.alphas, rule)
}

/// When to stop growing the LG expansion of a detector field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionPolicy {
    /// Largest admissible `p'_max`.
    pub cap: usize,
    /// Bound on the re-weighted tail fraction, see [`weighted_tail_fraction`].
    pub tolerance: f64,
}

impl Default for ExpansionPolicy {
    fn default() -> Self {
        ExpansionPolicy {
            cap: 4000,
            tolerance: 1e-4,
        }
    }
}

/// Upper estimate of the share of the re-weighted field lying beyond the
/// cutoff: the raw tail is weighted by the first weight past the cutoff
/// (weights fall off in `p'`), relative to the total re-weighted energy.
pub fn weighted_tail_fraction(raw: &DecompositionResult, weights: &[f64]) -> f64 {
    let pmax = raw.pmax();
    let next = weights.get(pmax + 1).copied().unwrap_or(weights[pmax]);
    let tail = next * raw.tail_energy;
    let kept: f64 = raw
        .alphas
        .iter()
        .zip(weights)
        .map(|(a, c)| c * a.norm_sqr())
        .sum();
    if kept + tail == 0.0 {
        0.0
    } else {
        tail / (kept + tail)
    }
}

/// Effective detection field plus its convergence record.
#[derive(Debug, Clone)]
pub struct DetectionOutcome {
    pub mode: ModeIndex,
    pub field: ComplexRadialField,
    /// Re-weighted coefficients `α'`.
    pub weighted: DecompositionResult,
    pub pmax_used: usize,
    pub weighted_tail: f64,
}

/// Builds `u_det` for `cfg`, doubling the expansion cutoff from
/// `cfg.expansion_pmax` until the re-weighted tail meets the policy.
///
/// `weights` must hold the normalized pair weights of `cfg.mode.ell` for
/// `p' = 0..=policy.cap + 1` (or more).
pub fn build_detection_field(
    cfg: &DetectionConfig,
    weights: &[f64],
    rule: &QuadratureRule,
    policy: &ExpansionPolicy,
) -> Result<DetectionOutcome> {
    if weights.len() < cfg.expansion_pmax.max(policy.cap) + 2 {
        return Err(structural(
            "build_detection_field",
            format!("weight table of length {} is shorter than cap + 2", weights.len()),
        ));
    }
    let raw = detection_field_raw(cfg, rule);
    let mut pmax = cfg.expansion_pmax.max(cfg.mode.p as usize).max(1);
    loop {
        let d = decompose(&raw, cfg.mode_waist, pmax, rule)?;
        let tail = weighted_tail_fraction(&d, &weights[..pmax + 2]);
        if tail <= policy.tolerance {
            let weighted = reweight(&d, &weights[..=pmax])?;
            let field = effective_detection_field(&weighted, cfg.mode_waist, rule)?;
            return Ok(DetectionOutcome {
                mode: cfg.mode,
                field,
                weighted,
                pmax_used: pmax,
                weighted_tail: tail,
            });
        }
        if pmax >= policy.cap {
            return Err(Error::Convergence {
                ell: cfg.mode.ell,
                p: cfg.mode.p,
                cutoff: pmax,
                tail,
                tolerance: policy.tolerance,
            });
        }
        pmax = (2 * pmax).min(policy.cap);
    }
}

/// Longest composite-rule panel that still resolves LG modes up to
/// `pmax` at waist `w`: a 16-point panel spans about two oscillations of
/// `LG_pmax²` near the axis.
pub fn resolving_panel(w: f64, pmax: usize) -> f64 {
    2.0 * w / (2.0 * pmax as f64 + 1.0).sqrt()
}

/// Binary (P5) PGM of the SLM phase for `mode`, including the azimuthal
/// `l φ`, on a `pixels × pixels` grid of the given pitch centred on the
/// axis. Phase `[0, 2π)` maps linearly onto gray levels `0..=255`.
pub fn render_mask_pgm(mode: ModeIndex, waist: f64, pixels: usize, pitch: f64) -> Result<Vec<u8>> {
    if pixels == 0 {
        return Err(domain("render_mask_pgm", "image needs at least one pixel"));
    }
    if !(pitch.is_finite() && pitch > 0.0 && waist.is_finite() && waist > 0.0) {
        return Err(domain("render_mask_pgm", "pitch and waist must be > 0"));
    }
    let header = format!("P5\n{pixels} {pixels}\n255\n");
    let mut out = Vec::with_capacity(header.len() + pixels * pixels);
    out.extend_from_slice(header.as_bytes());
    let c = 0.5 * pixels as f64;
    for row in 0..pixels {
        // image rows run top to bottom, y axis points up
        let y = (c - row as f64 - 0.5) * pitch;
        for col in 0..pixels {
            let x = (col as f64 + 0.5 - c) * pitch;
            let r = x.hypot(y);
            let phase = (mask_phase(mode, waist, r) + f64::from(mode.ell) * y.atan2(x)).rem_euclid(TAU);
            out.push(((phase / TAU * 256.0).floor() as i64).clamp(0, 255) as u8);
        }
    }
    Ok(out)
}
