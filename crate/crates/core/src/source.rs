//! Two-photon source: pump field, thin-crystal SPDC mode weights, and the
//! closed-form Schmidt-number estimates.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, structural, Result};
use crate::modes::{ComplexRadialField, LgBasis, QuadratureRule};

/// Crystal and pump geometry. Stored in the units quoted by the apparatus;
/// accessors convert to µm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceParams {
    crystal_length_mm: f64,
    pump_wavelength_nm: f64,
    pump_waist_um: f64,
}

impl SourceParams {
    pub fn new(crystal_length_mm: f64, pump_wavelength_nm: f64, pump_waist_um: f64) -> Result<Self> {
        for (name, v) in [
            ("crystal_length_mm", crystal_length_mm),
            ("pump_wavelength_nm", pump_wavelength_nm),
            ("pump_waist_um", pump_waist_um),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(domain("SourceParams", format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(SourceParams {
            crystal_length_mm,
            pump_wavelength_nm,
            pump_waist_um,
        })
    }

    /// L = 2 mm, λ_p = 413 nm, w_p = 325 µm.
    pub fn paper_defaults() -> Self {
        SourceParams {
            crystal_length_mm: 2.0,
            pump_wavelength_nm: 413.0,
            pump_waist_um: 325.0,
        }
    }

    pub fn crystal_length_mm(&self) -> f64 {
        self.crystal_length_mm
    }

    pub fn pump_wavelength_nm(&self) -> f64 {
        self.pump_wavelength_nm
    }

    pub fn crystal_length_um(&self) -> f64 {
        self.crystal_length_mm * 1e3
    }

    pub fn pump_wavelength_um(&self) -> f64 {
        self.pump_wavelength_nm * 1e-3
    }

    pub fn pump_waist_um(&self) -> f64 {
        self.pump_waist_um
    }

    /// Default σ convention: field momentum-space width `√2 / w_p` (µm⁻¹).
    pub fn default_sigma(&self) -> f64 {
        2f64.sqrt() / self.pump_waist_um
    }
}

/// Relative Schmidt weights `λ_k`, each ≥ 0, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    lambdas: Vec<f64>,
}

impl SchmidtSpectrum {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(structural("SchmidtSpectrum", "empty spectrum"));
        }
        if lambdas.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(domain("SchmidtSpectrum", "weights must be finite and >= 0"));
        }
        let total: f64 = lambdas.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(domain("SchmidtSpectrum", format!("weights sum to {total}, not 1")));
        }
        Ok(SchmidtSpectrum { lambdas })
    }

    /// Normalizes arbitrary nonnegative weights to unit sum.
    pub fn from_unnormalized(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(domain("SchmidtSpectrum", format!("weights must have positive sum, got {total}")));
        }
        if weights.iter().any(|w| *w < 0.0) {
            return Err(domain("SchmidtSpectrum", "weights must be >= 0"));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }
}

/// Phase-matching length `b = sqrt(L λ_p / 8π)` in µm.
pub fn phase_matching_b(params: &SourceParams) -> f64 {
    (params.crystal_length_um() * params.pump_wavelength_um() / (8.0 * PI)).sqrt()
}

/// `K = (x + 1/x)² / 4` with `x = bσ`.
pub fn schmidt_k(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(domain("schmidt_k", format!("b·sigma must be > 0, got {x}")));
    }
    let s = x + x.recip();
    Ok(0.25 * s * s)
}

fn check_k(op: &'static str, k: f64) -> Result<()> {
    if !(k.is_finite() && k >= 1.0) {
        return Err(domain(op, format!("Schmidt number must be >= 1, got {k}")));
    }
    Ok(())
}

/// Azimuthal (p = 0) Schmidt number for large K: `2√K`.
pub fn schmidt_k_azimuthal(k: f64) -> Result<f64> {
    check_k("schmidt_k_azimuthal", k)?;
    Ok(2.0 * k.sqrt())
}

/// Radial (single l) Schmidt number for large K: `√K`.
pub fn schmidt_k_radial(k: f64) -> Result<f64> {
    check_k("schmidt_k_radial", k)?;
    Ok(k.sqrt())
}

/// Detection waist at which radial LG modes become Schmidt modes: `sqrt(4b/σ)`.
pub fn optimal_waist(b: f64, sigma: f64) -> Result<f64> {
    if !(b.is_finite() && b > 0.0 && sigma.is_finite() && sigma > 0.0) {
        return Err(domain("optimal_waist", format!("need b > 0 and sigma > 0, got b={b}, sigma={sigma}")));
    }
    Ok((4.0 * b / sigma).sqrt())
}

/// Participation ratio `1 / Σ λ_k²`.
pub fn schmidt_number_from_spectrum(s: &SchmidtSpectrum) -> f64 {
    s.lambdas.iter().map(|l| l * l).sum::<f64>().recip()
}

/// LG_0^0 pump amplitude `exp(-r²/W²)` at the working-plane waist `W`
/// (unnormalized, l = 0).
pub fn pump_field(working_waist: f64, rule: &QuadratureRule) -> Result<ComplexRadialField> {
    if !(working_waist.is_finite() && working_waist > 0.0) {
        return Err(domain("pump_field", format!("working waist must be > 0, got {working_waist}")));
    }
    let inv = (working_waist * working_waist).recip();
    Ok(ComplexRadialField::from_fn(0, rule, |r| Complex64::new((-r * r * inv).exp(), 0.0)))
}

fn check_pump(op: &'static str, pump: &ComplexRadialField) -> Result<()> {
    if pump.ell() != 0 {
        return Err(domain(op, format!("pump must carry l = 0, got l = {}", pump.ell())));
    }
    Ok(())
}

/// Unnormalized thin-crystal weight `|2π ∫ r pump LG_p^l LG_p^{-l} dr|²` of the
/// mode pair `(l, p), (-l, p)`.
pub fn spdc_weight(p: u32, ell: i32, pump: &ComplexRadialField, mode_waist: f64, rule: &QuadratureRule) -> Result<f64> {
    check_pump("spdc_weight", pump)?;
    let amp = LgBasis::new(ell, mode_waist, p as usize)?.pair_amplitudes(pump, rule)?;
    Ok(amp[p as usize].norm_sqr())
}

/// Index set over which weights are normalized to unit sum:
/// `p = 0..=pmax`, `l = -ell_max..=ell_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightNormalization {
    pub pmax: usize,
    pub ell_max: u32,
}

impl Default for WeightNormalization {
    fn default() -> Self {
        WeightNormalization { pmax: 60, ell_max: 10 }
    }
}

/// Normalized SPDC weights for one pump and one detection-mode waist.
#[derive(Debug, Clone)]
pub struct SpdcWeights<'a> {
    pump: &'a ComplexRadialField,
    rule: &'a QuadratureRule,
    mode_waist: f64,
    norm: f64,
}

impl<'a> SpdcWeights<'a> {
    pub fn new(
        pump: &'a ComplexRadialField,
        mode_waist: f64,
        rule: &'a QuadratureRule,
        set: WeightNormalization,
    ) -> Result<Self> {
        check_pump("SpdcWeights", pump)?;
        let mut norm = 0.0;
        for a in 0..=set.ell_max {
            let amp = LgBasis::new(a as i32, mode_waist, set.pmax)?.pair_amplitudes(pump, rule)?;
            let s: f64 = amp.iter().map(Complex64::norm_sqr).sum();
            norm += if a == 0 { s } else { 2.0 * s };
        }
        if !(norm.is_finite() && norm > 0.0) {
            return Err(domain("SpdcWeights", format!("weight normalization is {norm}")));
        }
        Ok(SpdcWeights {
            pump,
            rule,
            mode_waist,
            norm,
        })
    }

    pub fn mode_waist(&self) -> f64 {
        self.mode_waist
    }

    /// Sum of unnormalized weights over the normalization set.
    pub fn normalization(&self) -> f64 {
        self.norm
    }

    /// Normalized weights `C_{p',p'}^{l,-l}` for `p' = 0..=pmax`.
    pub fn table(&self, ell: i32, pmax: usize) -> Result<Vec<f64>> {
        let amp = LgBasis::new(ell, self.mode_waist, pmax)?.pair_amplitudes(self.pump, self.rule)?;
        Ok(amp.iter().map(|a| a.norm_sqr() / self.norm).collect())
    }
}
