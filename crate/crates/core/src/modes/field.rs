use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::laguerre::{for_each_laguerre_function, laguerre_function};
use super::quadrature::QuadratureRule;
use crate::error::{domain, structural, Result};

/// Azimuthal index `ell` (OAM in units of ħ) and radial index `p` of an LG mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex {
    pub ell: i32,
    pub p: u32,
}

impl ModeIndex {
    pub const fn new(ell: i32, p: u32) -> Self {
        ModeIndex { ell, p }
    }

    pub fn abs_ell(&self) -> u32 {
        self.ell.unsigned_abs()
    }
}

/// Radial samples of a field `f(r) e^{i ell phi}` on the nodes of a
/// [`QuadratureRule`]. Samples carry units of µm⁻¹ for unit-norm fields.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexRadialField {
    ell: i32,
    samples: Vec<Complex64>,
}

impl ComplexRadialField {
    pub fn new(ell: i32, samples: Vec<Complex64>) -> Self {
        ComplexRadialField { ell, samples }
    }

    /// Samples `f` at every node of `rule`.
    pub fn from_fn(ell: i32, rule: &QuadratureRule, f: impl Fn(f64) -> Complex64) -> Self {
        ComplexRadialField {
            ell,
            samples: rule.nodes().iter().map(|&r| f(r)).collect(),
        }
    }

    pub fn ell(&self) -> i32 {
        self.ell
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// `2π Σ w_k r_k |f_k|²`.
    pub fn norm_sqr(&self, rule: &QuadratureRule) -> Result<f64> {
        check_len("ComplexRadialField::norm_sqr", self, rule)?;
        Ok(TAU
            * self
                .samples
                .iter()
                .zip(rule.nodes().iter().zip(rule.weights()))
                .map(|(f, (&r, &w))| w * r * f.norm_sqr())
                .sum::<f64>())
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        ComplexRadialField {
            ell: self.ell,
            samples: self.samples.iter().map(|v| v * s).collect(),
        }
    }
}

impl std::ops::Add for &ComplexRadialField {
    type Output = ComplexRadialField;

    /// Pointwise sum; both fields must share `ell` and sample count.
    fn add(self, rhs: Self) -> ComplexRadialField {
        assert_eq!(self.ell, rhs.ell, "adding fields with different ell");
        assert_eq!(self.samples.len(), rhs.samples.len());
        ComplexRadialField {
            ell: self.ell,
            samples: self.samples.iter().zip(&rhs.samples).map(|(a, b)| a + b).collect(),
        }
    }
}

fn check_len(op: &'static str, f: &ComplexRadialField, rule: &QuadratureRule) -> Result<()> {
    if f.samples.len() != rule.len() {
        return Err(structural(
            op,
            format!("field has {} samples, rule has {} nodes", f.samples.len(), rule.len()),
        ));
    }
    Ok(())
}

fn check_waist(op: &'static str, w: f64) -> Result<()> {
    if !(w.is_finite() && w > 0.0) {
        return Err(domain(op, format!("waist must be > 0, got {w}")));
    }
    Ok(())
}

/// Normalized LG radial profile
///
/// `sqrt(2 p!/(π (p+|l|)!)) (1/w) (√2 r/w)^|l| L_p^|l|(2r²/w²) e^(-r²/w²)`.
///
/// Together with the implied `e^{i l φ}` the mode has unit norm under
/// `∫|·|² r dr dφ`.
pub fn lg_radial(idx: ModeIndex, w: f64, r: f64) -> Result<f64> {
    check_waist("lg_radial", w)?;
    if !(r.is_finite() && r >= 0.0) {
        return Err(domain("lg_radial", format!("radius must be >= 0, got {r}")));
    }
    Ok(lg_radial_unchecked(idx, w, r))
}

pub(crate) fn lg_radial_unchecked(idx: ModeIndex, w: f64, r: f64) -> f64 {
    let x = 2.0 * r * r / (w * w);
    (2.0 / PI).sqrt() / w * laguerre_function(idx.p, idx.abs_ell(), x)
}

/// Radius beyond which `|LG_p^l|²` carries negligible energy:
/// `x = 2r²/w²` runs past the outer turning point `4p + 2|l| + 2` by a
/// margin that grows with the mode order.
pub fn mode_support_radius(idx: ModeIndex, w: f64) -> f64 {
    let turning = f64::from(4 * idx.p + 2 * idx.abs_ell() + 2);
    let x = (turning.sqrt() + 8.0).powi(2);
    w * (0.5 * x).sqrt()
}

/// An LG mode sampled on `rule`.
pub fn lg_field(idx: ModeIndex, w: f64, rule: &QuadratureRule) -> Result<ComplexRadialField> {
    check_waist("lg_field", w)?;
    Ok(ComplexRadialField::from_fn(idx.ell, rule, |r| {
        Complex64::new(lg_radial_unchecked(idx, w, r), 0.0)
    }))
}

fn radial_sum(
    op: &'static str,
    f: &ComplexRadialField,
    g: &ComplexRadialField,
    rule: &QuadratureRule,
    conj: bool,
) -> Result<Complex64> {
    check_len(op, f, rule)?;
    check_len(op, g, rule)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for ((a, b), (&r, &w)) in f.samples.iter().zip(&g.samples).zip(rule.nodes().iter().zip(rule.weights())) {
        let prod = if conj { a * b.conj() } else { a * b };
        acc += prod * (w * r);
    }
    Ok(acc * TAU)
}

/// `⟨g|f⟩ = ∫ f ḡ d²r`; zero unless `f.ell == g.ell`.
pub fn overlap_conj(f: &ComplexRadialField, g: &ComplexRadialField, rule: &QuadratureRule) -> Result<Complex64> {
    let s = radial_sum("overlap_conj", f, g, rule, true)?;
    Ok(if f.ell == g.ell { s } else { Complex64::new(0.0, 0.0) })
}

/// `∫ f g d²r` without conjugation; zero unless `f.ell + g.ell == 0`.
pub fn overlap_plain(f: &ComplexRadialField, g: &ComplexRadialField, rule: &QuadratureRule) -> Result<Complex64> {
    let s = radial_sum("overlap_plain", f, g, rule, false)?;
    // a*b == b*a bit-for-bit, so this is exactly symmetric in (f, g)
    Ok(if f.ell + g.ell == 0 { s } else { Complex64::new(0.0, 0.0) })
}

/// LG modes `p' = 0..=pmax` at one `ell` and waist, evaluated together by
/// streaming the Laguerre recurrence node by node (no mode table is stored).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LgBasis {
    pub ell: i32,
    pub waist: f64,
    pub pmax: usize,
}

impl LgBasis {
    pub fn new(ell: i32, waist: f64, pmax: usize) -> Result<Self> {
        check_waist("LgBasis", waist)?;
        Ok(LgBasis { ell, waist, pmax })
    }

    fn each_node(&self, r: f64, sink: impl FnMut(usize, f64)) {
        let x = 2.0 * r * r / (self.waist * self.waist);
        let c = (2.0 / PI).sqrt() / self.waist;
        let mut sink = sink;
        for_each_laguerre_function(self.ell.unsigned_abs(), x, self.pmax, |p, v| sink(p, c * v));
    }

    /// Coefficients `α_p' = ⟨LG_p'|u⟩`, `p' = 0..=pmax`.
    pub fn project(&self, u: &ComplexRadialField, rule: &QuadratureRule) -> Result<Vec<Complex64>> {
        check_len("LgBasis::project", u, rule)?;
        let mut alpha = vec![Complex64::new(0.0, 0.0); self.pmax + 1];
        if u.ell != self.ell {
            return Ok(alpha);
        }
        for ((&r, &w), s) in rule.nodes().iter().zip(rule.weights()).zip(&u.samples) {
            let ws = s * (TAU * w * r);
            self.each_node(r, |p, lg| alpha[p] += ws * lg);
        }
        Ok(alpha)
    }

    /// `Σ_p' coeffs[p'] LG_p'` sampled on `rule`.
    pub fn synthesize(&self, coeffs: &[Complex64], rule: &QuadratureRule) -> Result<ComplexRadialField> {
        if coeffs.len() != self.pmax + 1 {
            return Err(structural(
                "LgBasis::synthesize",
                format!("{} coefficients for {} modes", coeffs.len(), self.pmax + 1),
            ));
        }
        let samples = rule
            .nodes()
            .iter()
            .map(|&r| {
                let mut acc = Complex64::new(0.0, 0.0);
                self.each_node(r, |p, lg| acc += coeffs[p] * lg);
                acc
            })
            .collect();
        Ok(ComplexRadialField::new(self.ell, samples))
    }

    /// `2π ∫ r s(r) LG_p'^l(r) LG_p'^{-l}(r) dr` for every `p'`: the
    /// thin-crystal two-photon amplitude of the mode pair `(l,p'),(-l,p')`
    /// for a source field `s` with zero OAM.
    pub fn pair_amplitudes(&self, source: &ComplexRadialField, rule: &QuadratureRule) -> Result<Vec<Complex64>> {
        check_len("LgBasis::pair_amplitudes", source, rule)?;
        let mut amp = vec![Complex64::new(0.0, 0.0); self.pmax + 1];
        if source.ell != 0 {
            return Ok(amp);
        }
        for ((&r, &w), s) in rule.nodes().iter().zip(rule.weights()).zip(&source.samples) {
            let ws = s * (TAU * w * r);
            self.each_node(r, |p, lg| amp[p] += ws * (lg * lg));
        }
        Ok(amp)
    }
}
