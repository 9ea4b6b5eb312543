//! Randomized invariants of the mode engine, source and detection model.

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use lgcorr::detection::{
    decompose, detection_field_raw, effective_detection_field, fiber_amplitude, mask_phase, pixelate, reweight,
    DecompositionResult, PhaseProfile,
};
use lgcorr::modes::{lg_field, make_quadrature, overlap_conj, overlap_plain, ComplexRadialField, ModeIndex, QuadratureRule};
use lgcorr::source::{pump_field, schmidt_k, spdc_weight};
use lgcorr::{CoincidenceMatrix, DetectionConfig, Model, OpticsConfig, SourceParams};

fn paper_rule(w: f64, modes: &[ModeIndex]) -> QuadratureRule {
    let model = Model::new(SourceParams::paper_defaults());
    let t = DetectionConfig::new(ModeIndex::new(0, 0), w, 60, OpticsConfig::paper_defaults()).unwrap();
    model.rule_for(&t, modes).unwrap()
}

fn corner_modes() -> Vec<ModeIndex> {
    vec![ModeIndex::new(10, 15), ModeIndex::new(0, 15)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lg_modes_orthonormal(w in 500.0..2500.0f64, ell in -10i32..=10) {
        let rule = paper_rule(w, &corner_modes());
        let fields: Vec<_> = (0..=15).map(|p| lg_field(ModeIndex::new(ell, p), w, &rule).unwrap()).collect();
        for (i, f) in fields.iter().enumerate() {
            for (j, g) in fields.iter().enumerate() {
                let v = overlap_conj(f, g, &rule).unwrap();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((v - want).norm() < 1e-8, "w={w} l={ell} p1={i} p2={j}: {v}");
            }
        }
    }

    #[test]
    fn doubling_nodes_leaves_overlaps_unchanged(w in 500.0..2500.0f64, ell in -10i32..=10, p1 in 0u32..=15, p2 in 0u32..=15) {
        let r_max = 6.0 * 2437.5f64.max(w);
        let r_max = r_max.max(lgcorr::modes::mode_support_radius(ModeIndex::new(10, 15), w));
        let coarse = make_quadrature(r_max, 2000).unwrap();
        let fine = make_quadrature(r_max, 4000).unwrap();
        let ov = |rule: &QuadratureRule| {
            let f = lg_field(ModeIndex::new(ell, p1), w, rule).unwrap();
            let g = lg_field(ModeIndex::new(ell, p2), w, rule).unwrap();
            overlap_conj(&f, &g, rule).unwrap()
        };
        prop_assert!((ov(&coarse) - ov(&fine)).norm() < 1e-9);
    }

    #[test]
    fn overlap_plain_commutes(
        re in prop::collection::vec(-1e3..1e3f64, 64),
        im in prop::collection::vec(-1e3..1e3f64, 64),
        ell in -5i32..=5,
    ) {
        let rule = make_quadrature(100.0, 64).unwrap();
        let f = ComplexRadialField::new(ell, re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect());
        let g = ComplexRadialField::new(-ell, im.iter().zip(re.iter().rev()).map(|(a, b)| Complex64::new(*a, *b)).collect());
        prop_assert_eq!(overlap_plain(&f, &g, &rule).unwrap(), overlap_plain(&g, &f, &rule).unwrap());
    }

    #[test]
    fn schmidt_k_symmetric_and_minimal_at_one(x in 0.01..100.0f64, y in 0.01..100.0f64) {
        let k = schmidt_k(x).unwrap();
        let ki = schmidt_k(1.0 / x).unwrap();
        prop_assert!((k - ki).abs() <= 1e-12 * k);
        prop_assert!(k >= 1.0);
        let (lx, ly) = (x.ln().abs(), y.ln().abs());
        if lx < ly * (1.0 - 1e-9) {
            prop_assert!(k < schmidt_k(y).unwrap());
        }
    }

    #[test]
    fn weights_even_in_ell(p in 0u32..=20, ell in 1i32..=10, w in 300.0..1500.0f64) {
        let rule = paper_rule(w, &[ModeIndex::new(ell, p)]);
        let pump = pump_field(2437.5, &rule).unwrap();
        prop_assert_eq!(
            spdc_weight(p, ell, &pump, w, &rule).unwrap(),
            spdc_weight(p, -ell, &pump, w, &rule).unwrap()
        );
    }

    #[test]
    fn parseval_holds_for_masks(p in 0u32..=10, ell in -10i32..=10, w in 300.0..1500.0f64, pixelated in any::<bool>()) {
        let pitch = pixelated.then_some(20.0);
        let optics = OpticsConfig::paper_defaults().with_pixel_pitch(pitch).unwrap();
        let cfg = DetectionConfig::new(ModeIndex::new(ell, p), w, 60, optics).unwrap();
        let rule = Model::new(SourceParams::paper_defaults()).rule_for(&cfg, &[cfg.mode]).unwrap();
        let u = detection_field_raw(&cfg, &rule);
        let d = decompose(&u, w, 60, &rule).unwrap();
        let captured: f64 = d.alphas.iter().map(Complex64::norm_sqr).sum();
        prop_assert!((captured + d.tail_energy - d.field_norm_sqr).abs() < 1e-9 * d.field_norm_sqr);
        let d20 = decompose(&u, w, 20, &rule).unwrap();
        prop_assert!(d.tail_energy <= d20.tail_energy);
    }

    #[test]
    fn raw_field_is_phase_only(p in 0u32..=15, ell in -10i32..=10, w in 50.0..2000.0f64, pitch in prop::option::of(1.0..100.0f64)) {
        let optics = OpticsConfig::paper_defaults().with_pixel_pitch(pitch).unwrap();
        let cfg = DetectionConfig::new(ModeIndex::new(ell, p), w, 60, optics).unwrap();
        let rule = make_quadrature(8000.0, 300).unwrap();
        let u = detection_field_raw(&cfg, &rule);
        prop_assert_eq!(u.ell(), ell);
        for (s, r) in u.samples().iter().zip(rule.nodes()) {
            prop_assert_eq!(s.norm(), fiber_amplitude(*r, 1275.0));
        }
    }

    #[test]
    fn pixelation_never_adds_flips(p in 0u32..=15, a in 0u32..=10, w in 20.0..2000.0f64, pitch in 1.0..100.0f64) {
        let mode = ModeIndex::new(a as i32, p);
        let r_max = 40.0 * w;
        let continuous = PhaseProfile::Mask { mode, waist: w };
        prop_assert_eq!(continuous.jumps(r_max).len(), p as usize);
        let stair = pixelate(continuous.clone(), pitch).unwrap();
        prop_assert!(stair.jumps(r_max).len() <= p as usize);
        for r in stair.jumps(r_max) {
            prop_assert!(mask_phase(mode, w, r - 0.5 * pitch) != mask_phase(mode, w, r + 0.5 * pitch));
        }
    }

    #[test]
    fn decaying_weights_suppress_high_orders(w in 400.0..1300.0f64, p in 1u32..=6, cut in 0usize..60) {
        let optics = OpticsConfig::paper_defaults();
        let cfg = DetectionConfig::new(ModeIndex::new(0, p), w, 60, optics).unwrap();
        let rule = Model::new(SourceParams::paper_defaults()).rule_for(&cfg, &[cfg.mode]).unwrap();
        let d = decompose(&detection_field_raw(&cfg, &rule), w, 60, &rule).unwrap();
        let weights: Vec<f64> = (0..=60).map(|k| 1.0 / (1.0 + k as f64)).collect();
        let dw = reweight(&d, &weights).unwrap();
        let frac = |x: &DecompositionResult| {
            let e: Vec<f64> = x.alphas.iter().map(Complex64::norm_sqr).collect();
            e[cut + 1..].iter().sum::<f64>() / e.iter().sum::<f64>()
        };
        prop_assert!(frac(&dw) <= frac(&d));
    }

    #[test]
    fn synthesis_linear_and_invertible(
        a in prop::collection::vec(-1.0..1.0f64, 12),
        b in prop::collection::vec(-1.0..1.0f64, 12),
        ell in -4i32..=4,
    ) {
        let w = 700.0;
        let rule = paper_rule(w, &[ModeIndex::new(ell, 11)]);
        let mk = |v: &[f64]| DecompositionResult {
            ell,
            alphas: v.iter().map(|x| Complex64::new(*x, 0.5 * x)).collect(),
            tail_energy: 0.0,
            field_norm_sqr: 0.0,
        };
        let (da, db) = (mk(&a), mk(&b));
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let fa = effective_detection_field(&da, w, &rule).unwrap();
        let fb = effective_detection_field(&db, w, &rule).unwrap();
        let fs = effective_detection_field(&mk(&sum), w, &rule).unwrap();
        for ((s, x), y) in fs.samples().iter().zip((&fa + &fb).samples()).zip(fa.samples()) {
            prop_assert!((s - x).norm() <= 1e-12 * (1.0 + y.norm()) / w);
        }
        let back = decompose(&fa, w, 11, &rule).unwrap();
        for (x, y) in back.alphas.iter().zip(&da.alphas) {
            prop_assert!((x - y).norm() < 1e-9);
        }
    }

    #[test]
    fn matrix_metrics_bounded(n in 1usize..8, k in 1usize..8, a in prop::collection::vec(-1.0..1.0f64, 64), d in prop::collection::vec(0.0..1.0f64, 8)) {
        // C' = Aᵀ diag(d) A, the form a weighted LG expansion produces
        let gram: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| (0..k).map(|q| a[q * 8 + i] * d[q] * a[q * 8 + j]).sum::<f64>() + if i == j { 1e-3 } else { 0.0 }).collect())
            .collect();
        let m = CoincidenceMatrix::from_real_rows(&gram).unwrap();
        for (r, amp) in m.rates().iter().zip(m.amplitudes()) {
            prop_assert!((r - amp.norm_sqr()).abs() <= 1e-12 * r);
        }
        let w = lgcorr::w_metric(&m).unwrap();
        prop_assert!(w >= 1.0 / n as f64 - 1e-12 && w <= 1.0 + 1e-12);
        let ks = lgcorr::schmidt_estimate(&m).unwrap();
        prop_assert!(ks >= 1.0 - 1e-12 && ks <= n as f64 + 1e-9);
        let dp = lgcorr::diagonal_participation(&m).unwrap();
        prop_assert!(dp >= 1.0 - 1e-12 && dp <= n as f64 + 1e-9);
        let norm = m.normalized_rates();
        prop_assert_eq!(norm.iter().cloned().fold(0.0, f64::max), 1.0);
        prop_assert!(norm.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}

#[test]
fn p1_flip_sits_on_first_root() {
    let w = 1000.0;
    let rule = make_quadrature(6000.0, 2000).unwrap();
    let cfg = DetectionConfig::new(ModeIndex::new(0, 1), w, 60, OpticsConfig::paper_defaults()).unwrap();
    let u = detection_field_raw(&cfg, &rule);
    let r0 = w / 2f64.sqrt();
    for (s, r) in u.samples().iter().zip(rule.nodes()) {
        let sign = if *r < r0 { 1.0 } else { -1.0 };
        assert_eq!(s.re.signum(), sign, "r={r}");
        assert_eq!(s.im, 0.0);
    }
    assert_eq!(PhaseProfile::Constant(PI).jumps(100.0), Vec::<f64>::new());
}
