//! Coincidence amplitudes, correlation matrices and their summary statistics.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::detection::{build_detection_field, resolving_panel, to_working_plane, DetectionConfig, DetectionOutcome, ExpansionPolicy};
use crate::error::{domain, structural, Result};
use crate::exec::Exec;
use crate::modes::{mode_support_radius, overlap_plain, ComplexRadialField, ModeIndex, QuadratureRule, PANEL_ORDER};
use crate::source::{pump_field, schmidt_number_from_spectrum, SchmidtSpectrum, SourceParams, SpdcWeights, WeightNormalization};

/// Coincidence amplitude `C' = ∫ u_s u_i d²r`.
pub fn coincidence_amplitude(u_s: &ComplexRadialField, u_i: &ComplexRadialField, rule: &QuadratureRule) -> Result<Complex64> {
    overlap_plain(u_s, u_i, rule)
}

/// Rates `Γ = |C'|²` over signal (rows) × idler (columns) modes, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceMatrix {
    signal_modes: Vec<ModeIndex>,
    idler_modes: Vec<ModeIndex>,
    amplitudes: Vec<Complex64>,
    rates: Vec<f64>,
}

impl CoincidenceMatrix {
    pub fn from_amplitudes(signal_modes: Vec<ModeIndex>, idler_modes: Vec<ModeIndex>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != signal_modes.len() * idler_modes.len() {
            return Err(structural(
                "CoincidenceMatrix",
                format!(
                    "{} amplitudes for a {}x{} grid",
                    amplitudes.len(),
                    signal_modes.len(),
                    idler_modes.len()
                ),
            ));
        }
        let rates = amplitudes.iter().map(Complex64::norm_sqr).collect();
        Ok(CoincidenceMatrix {
            signal_modes,
            idler_modes,
            amplitudes,
            rates,
        })
    }

    /// Real, nonnegative amplitude grid; convenient for tests.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(structural("CoincidenceMatrix", "ragged rows"));
        }
        let modes = |n: usize| (0..n).map(|p| ModeIndex::new(0, p as u32)).collect();
        let amps = rows.iter().flatten().map(|&a| Complex64::new(a, 0.0)).collect();
        Self::from_amplitudes(modes(rows.len()), modes(n_cols), amps)
    }

    pub fn signal_modes(&self) -> &[ModeIndex] {
        &self.signal_modes
    }

    pub fn idler_modes(&self) -> &[ModeIndex] {
        &self.idler_modes
    }

    pub fn n_rows(&self) -> usize {
        self.signal_modes.len()
    }

    pub fn n_cols(&self) -> usize {
        self.idler_modes.len()
    }

    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.rates[i * self.n_cols() + j]
    }

    pub fn amplitude(&self, i: usize, j: usize) -> Complex64 {
        self.amplitudes[i * self.n_cols() + j]
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn total(&self) -> f64 {
        self.rates.iter().sum()
    }

    pub fn max_rate(&self) -> f64 {
        self.rates.iter().copied().fold(0.0, f64::max)
    }

    /// Rates divided by their maximum (all zeros if the matrix is empty of counts).
    pub fn normalized_rates(&self) -> Vec<f64> {
        let m = self.max_rate();
        if m > 0.0 {
            self.rates.iter().map(|r| r / m).collect()
        } else {
            vec![0.0; self.rates.len()]
        }
    }

    fn require_square(&self, op: &'static str) -> Result<usize> {
        if self.n_rows() != self.n_cols() {
            return Err(structural(op, format!("matrix is {}x{}, not square", self.n_rows(), self.n_cols())));
        }
        Ok(self.n_rows())
    }

    fn diagonal(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_rows().min(self.n_cols())).map(|k| self.rate(k, k))
    }
}

/// Fraction of all counts on the diagonal: `Σ_p Γ(p,p) / Σ Γ`.
pub fn w_metric(m: &CoincidenceMatrix) -> Result<f64> {
    m.require_square("w_metric")?;
    let total = m.total();
    if !(total > 0.0) {
        return Err(domain("w_metric", "matrix has no counts"));
    }
    Ok(m.diagonal().sum::<f64>() / total)
}

/// Participation ratio `(Σd)² / Σd²` of the diagonal rates.
pub fn diagonal_participation(m: &CoincidenceMatrix) -> Result<f64> {
    m.require_square("diagonal_participation")?;
    let (s, s2) = m.diagonal().fold((0.0, 0.0), |(s, s2), d| (s + d, s2 + d * d));
    if !(s2 > 0.0) {
        return Err(domain("diagonal_participation", "diagonal is zero"));
    }
    Ok(s * s / s2)
}

/// Schmidt number of the amplitude grid read as a two-photon state:
/// singular values `s_k`, weights `λ_k = s_k² / Σ s²`, `K = 1/Σλ²`.
pub fn schmidt_estimate(m: &CoincidenceMatrix) -> Result<f64> {
    if m.amplitudes.iter().all(|a| a.norm_sqr() == 0.0) {
        return Err(domain("schmidt_estimate", "all amplitudes are zero"));
    }
    let grid = DMatrix::from_row_slice(m.n_rows(), m.n_cols(), &m.amplitudes);
    let sv = grid.singular_values();
    let weights: Vec<f64> = sv.iter().map(|s| s * s).collect();
    Ok(schmidt_number_from_spectrum(&SchmidtSpectrum::from_unnormalized(&weights)?))
}

/// Which matrix-level Schmidt estimator a run reports as primary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Estimator {
    #[default]
    Svd,
    Diagonal,
}

impl Estimator {
    pub fn estimate(self, m: &CoincidenceMatrix) -> Result<f64> {
        match self {
            Estimator::Svd => schmidt_estimate(m),
            Estimator::Diagonal => diagonal_participation(m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationStats {
    pub w_diag: f64,
    pub schmidt_estimate: f64,
    pub diagonal_participation: f64,
}

pub fn correlation_stats(m: &CoincidenceMatrix) -> Result<CorrelationStats> {
    Ok(CorrelationStats {
        w_diag: w_metric(m)?,
        schmidt_estimate: schmidt_estimate(m)?,
        diagonal_participation: diagonal_participation(m)?,
    })
}

/// Radial grid sizing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    /// `r_max` in units of the largest of pump, mode and fiber waists.
    pub r_max_factor: f64,
    /// Minimum node count.
    pub n_nodes: usize,
    /// Every panel is split into this many equal pieces (1 = none).
    pub subdivisions: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            r_max_factor: 6.0,
            n_nodes: 2000,
            subdivisions: 1,
        }
    }
}

/// Per-field convergence record kept alongside a matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldDiagnostics {
    pub mode: ModeIndex,
    pub pmax_used: usize,
    pub weighted_tail: f64,
    pub raw_tail_fraction: f64,
}

impl From<&DetectionOutcome> for FieldDiagnostics {
    fn from(o: &DetectionOutcome) -> Self {
        let d = &o.weighted;
        FieldDiagnostics {
            mode: o.mode,
            pmax_used: o.pmax_used,
            weighted_tail: o.weighted_tail,
            raw_tail_fraction: if d.field_norm_sqr > 0.0 {
                d.tail_energy / d.field_norm_sqr
            } else {
                0.0
            },
        }
    }
}

/// A coincidence matrix with everything needed to reproduce it.
#[derive(Debug, Clone)]
pub struct MatrixRun {
    pub matrix: CoincidenceMatrix,
    pub gamma: f64,
    pub mode_waist: f64,
    pub r_max: f64,
    pub quadrature_nodes: usize,
    pub weight_normalization: f64,
    pub fields: Vec<FieldDiagnostics>,
}

impl MatrixRun {
    pub fn stats(&self) -> Result<CorrelationStats> {
        correlation_stats(&self.matrix)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub waist: f64,
    pub gamma: f64,
    pub w: f64,
    pub schmidt_estimate: f64,
    pub diagonal_participation: f64,
    pub max_pmax_used: usize,
}

/// Everything shared by the matrix tasks: source, grid, expansion policy
/// and evaluation strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    pub source: SourceParams,
    pub grid: GridConfig,
    pub expansion: ExpansionPolicy,
    pub weight_norm: WeightNormalization,
    pub exec: Exec,
}

impl Model {
    pub fn new(source: SourceParams) -> Self {
        Model {
            source,
            grid: GridConfig::default(),
            expansion: ExpansionPolicy::default(),
            weight_norm: WeightNormalization::default(),
            exec: Exec::default(),
        }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn working_pump_waist(&self, template: &DetectionConfig) -> f64 {
        to_working_plane(self.source.pump_waist_um(), &template.optics)
    }

    /// Composite rule for a set of detector modes at the template waist:
    /// panel edges at every phase jump of every mask, panels short enough to
    /// resolve the expansion cap.
    pub fn rule_for(&self, template: &DetectionConfig, modes: &[ModeIndex]) -> Result<QuadratureRule> {
        let largest = self
            .working_pump_waist(template)
            .max(template.mode_waist)
            .max(template.optics.fiber_waist_slm());
        let support = modes
            .iter()
            .map(|&m| mode_support_radius(m, template.mode_waist))
            .fold(0.0, f64::max);
        let r_max = (self.grid.r_max_factor * largest).max(support);
        let base_panel = r_max * PANEL_ORDER as f64 / self.grid.n_nodes.max(PANEL_ORDER) as f64;
        let panel = base_panel.min(resolving_panel(template.mode_waist, self.expansion.cap));
        let mut breaks = Vec::new();
        for &m in modes {
            breaks.extend(template.with_mode(m)?.phase_profile().jumps(r_max));
        }
        QuadratureRule::composite_refined(r_max, panel, &breaks, self.grid.subdivisions)
    }

    /// Builds every distinct detector field once, then fills the cells.
    fn fill(&self, template: &DetectionConfig, signal: Vec<ModeIndex>, idler: Vec<ModeIndex>) -> Result<MatrixRun> {
        let mut distinct: Vec<ModeIndex> = signal.iter().chain(&idler).copied().collect();
        distinct.sort();
        distinct.dedup();
        let rule = self.rule_for(template, &distinct)?;
        let pump = pump_field(self.working_pump_waist(template), &rule)?;
        let weights = SpdcWeights::new(&pump, template.mode_waist, &rule, self.weight_norm)?;

        let table_len = self.expansion.cap.max(template.expansion_pmax) + 1;
        let mut abs_ells: Vec<u32> = distinct.iter().map(ModeIndex::abs_ell).collect();
        abs_ells.dedup();
        abs_ells.sort();
        abs_ells.dedup();
        let tables: BTreeMap<u32, Vec<f64>> = abs_ells
            .iter()
            .copied()
            .zip(self.exec.try_map(&abs_ells, |&a| weights.table(a as i32, table_len))?)
            .collect();

        let outcomes = self.exec.try_map(&distinct, |&m| {
            let cfg = template.with_mode(m)?;
            build_detection_field(&cfg, &tables[&m.abs_ell()], &rule, &self.expansion)
        })?;
        let cache: BTreeMap<ModeIndex, &DetectionOutcome> = distinct.iter().copied().zip(&outcomes).collect();

        let cells: Vec<(ModeIndex, ModeIndex)> = signal
            .iter()
            .flat_map(|&s| idler.iter().map(move |&i| (s, i)))
            .collect();
        let amplitudes = self
            .exec
            .try_map(&cells, |(s, i)| coincidence_amplitude(&cache[s].field, &cache[i].field, &rule))?;

        Ok(MatrixRun {
            matrix: CoincidenceMatrix::from_amplitudes(signal, idler, amplitudes)?,
            gamma: template.gamma(&self.source),
            mode_waist: template.mode_waist,
            r_max: rule.r_max(),
            quadrature_nodes: rule.len(),
            weight_normalization: weights.normalization(),
            fields: outcomes.iter().map(FieldDiagnostics::from).collect(),
        })
    }

    /// `(P+1)×(P+1)` matrix over `p_s, p_i = 0..=P` with signal `l` and idler `-l`.
    pub fn radial_matrix(&self, ell: i32, pmax: u32, template: &DetectionConfig) -> Result<MatrixRun> {
        let signal = (0..=pmax).map(|p| ModeIndex::new(ell, p)).collect();
        let idler = (0..=pmax).map(|p| ModeIndex::new(-ell, p)).collect();
        self.fill(template, signal, idler)
    }

    /// `(2L+1)×(2L+1)` matrix over `l_s, l_i = -L..=L`, both photons at radial index `p`.
    pub fn azimuthal_matrix(&self, p: u32, ell_max: u32, template: &DetectionConfig) -> Result<MatrixRun> {
        let l = ell_max as i32;
        let modes: Vec<ModeIndex> = (-l..=l).map(|ell| ModeIndex::new(ell, p)).collect();
        self.fill(template, modes.clone(), modes)
    }

    /// One radial matrix per detection waist, summarized.
    pub fn waist_sweep(&self, waists: &[f64], ell: i32, pmax: u32, template: &DetectionConfig) -> Result<Vec<SweepRow>> {
        if waists.is_empty() {
            return Err(domain("waist_sweep", "no waists given"));
        }
        if let Some(w) = waists.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(domain("waist_sweep", format!("waists must be > 0, got {w}")));
        }
        waists
            .iter()
            .map(|&w| {
                let t = DetectionConfig::new(template.mode, w, template.expansion_pmax, template.optics)?;
                let run = self.radial_matrix(ell, pmax, &t)?;
                let stats = run.stats()?;
                Ok(SweepRow {
                    waist: w,
                    gamma: run.gamma,
                    w: stats.w_diag,
                    schmidt_estimate: stats.schmidt_estimate,
                    diagonal_participation: stats.diagonal_participation,
                    max_pmax_used: run.fields.iter().map(|f| f.pmax_used).max().unwrap_or(0),
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn w_metric_cases() {
        let diag = CoincidenceMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(w_metric(&diag).unwrap(), 1.0);
        let n = 5;
        let uniform = CoincidenceMatrix::from_real_rows(&vec![vec![1.0; n]; n]).unwrap();
        assert_relative_eq!(w_metric(&uniform).unwrap(), 0.2, max_relative = 1e-15);
        let d123 = CoincidenceMatrix::from_real_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 2f64.sqrt(), 0.0],
            vec![0.0, 0.0, 3f64.sqrt()],
        ])
        .unwrap();
        assert_relative_eq!(w_metric(&d123).unwrap(), 1.0, max_relative = 1e-15);
        let zero = CoincidenceMatrix::from_real_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(w_metric(&zero), Err(crate::Error::Domain { .. })));
        let rect = CoincidenceMatrix::from_real_rows(&[vec![1.0, 0.0, 1.0]]).unwrap();
        assert!(matches!(w_metric(&rect), Err(crate::Error::Structural { .. })));
    }

    #[test]
    fn schmidt_estimate_cases() {
        let rank1 = CoincidenceMatrix::from_real_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0], vec![0.5, 1.0, 1.5]]).unwrap();
        assert_relative_eq!(schmidt_estimate(&rank1).unwrap(), 1.0, max_relative = 1e-12);
        let n = 7;
        let eye: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let eye = CoincidenceMatrix::from_real_rows(&eye).unwrap();
        assert_relative_eq!(schmidt_estimate(&eye).unwrap(), n as f64, max_relative = 1e-12);
        let zero = CoincidenceMatrix::from_real_rows(&[vec![0.0]]).unwrap();
        assert!(schmidt_estimate(&zero).is_err());
    }

    #[test]
    fn diagonal_participation_cases() {
        let n = 4;
        let eye: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 0.3 } else { 0.1 }).collect()).collect();
        let m = CoincidenceMatrix::from_real_rows(&eye).unwrap();
        assert_relative_eq!(diagonal_participation(&m).unwrap(), 4.0, max_relative = 1e-14);
        let single = CoincidenceMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert_eq!(diagonal_participation(&single).unwrap(), 1.0);
        let offdiag = CoincidenceMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(diagonal_participation(&offdiag).is_err());
    }

    #[test]
    fn rates_are_squared_amplitudes_and_normalize() {
        let modes = vec![ModeIndex::new(0, 0), ModeIndex::new(0, 1)];
        let m = CoincidenceMatrix::from_amplitudes(
            modes.clone(),
            modes,
            vec![Complex64::new(1.0, 1.0), Complex64::new(0.0, -0.5), Complex64::new(0.2, 0.0), Complex64::new(3.0, 0.0)],
        )
        .unwrap();
        assert_eq!(m.rate(0, 0), 2.0);
        assert_eq!(m.rate(0, 1), 0.25);
        let n = m.normalized_rates();
        assert_eq!(n.iter().copied().fold(0.0, f64::max), 1.0);
        assert!(n.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(CoincidenceMatrix::from_amplitudes(vec![], vec![], vec![Complex64::new(1.0, 0.0)]).is_err());
    }
}
