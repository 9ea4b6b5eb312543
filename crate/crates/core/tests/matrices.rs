//! Model-level invariants of coincidence matrices at the reference geometry.

use lgcorr::source::{pump_field, SpdcWeights, WeightNormalization};
use lgcorr::{DetectionConfig, Error, Exec, ExpansionPolicy, MatrixRun, ModeIndex, Model, OpticsConfig, SourceParams};

fn model() -> Model {
    Model::new(SourceParams::paper_defaults())
}

fn template(w: f64, pitch: Option<f64>) -> DetectionConfig {
    let optics = OpticsConfig::paper_defaults().with_pixel_pitch(pitch).unwrap();
    DetectionConfig::new(ModeIndex::new(0, 0), w, 60, optics).unwrap()
}

fn max_abs_diff(a: &MatrixRun, b: &MatrixRun) -> f64 {
    a.matrix
        .normalized_rates()
        .iter()
        .zip(b.matrix.normalized_rates())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn single_cell_matrix() {
    let run = model().radial_matrix(0, 0, &template(1000.0, None)).unwrap();
    assert_eq!(run.matrix.normalized_rates(), vec![1.0]);
}

#[test]
fn radial_matrix_is_symmetric_and_normalized() {
    for ell in [0, 2] {
        let run = model().radial_matrix(ell, 4, &template(1000.0, Some(20.0))).unwrap();
        let m = &run.matrix;
        let n = m.n_rows();
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (m.rate(i, j), m.rate(j, i));
                assert!((a - b).abs() <= 1e-10 * a.max(b), "l={ell} ({i},{j}): {a} vs {b}");
                assert!((m.rate(i, j) - m.amplitude(i, j).norm_sqr()).abs() <= 1e-12 * m.rate(i, j));
            }
        }
        let norm = m.normalized_rates();
        assert_eq!(norm.iter().cloned().fold(0.0, f64::max), 1.0);
        assert!(norm.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(run.fields.iter().all(|f| f.weighted_tail <= 1e-3));
    }
}

#[test]
fn ground_azimuthal_antidiagonal_decays_in_ell() {
    let run = model().azimuthal_matrix(0, 5, &template(1000.0, None)).unwrap();
    let m = &run.matrix;
    let n = m.n_rows();
    for i in 0..n {
        for j in 0..n {
            if i + j != n - 1 {
                assert_eq!(m.rate(i, j), 0.0);
            }
        }
    }
    let anti: Vec<f64> = (0..=5).map(|a| m.rate(5 + a, 5 - a)).collect();
    assert!(anti.iter().all(|&v| v > 0.0));
    for k in 1..anti.len() {
        assert!(anti[k] < anti[k - 1], "{anti:?}");
        assert_eq!(m.rate(5 - k, 5 + k), anti[k]);
    }
}

#[test]
fn one_waist_sweep_equals_direct_run() {
    let t = template(812.5, None);
    let rows = model().waist_sweep(&[812.5], 1, 3, &t).unwrap();
    assert_eq!(rows.len(), 1);
    let run = model().radial_matrix(1, 3, &t).unwrap();
    let s = run.stats().unwrap();
    assert_eq!(rows[0].w, s.w_diag);
    assert_eq!(rows[0].schmidt_estimate, s.schmidt_estimate);
    assert_eq!(rows[0].diagonal_participation, s.diagonal_participation);
    assert_eq!(rows[0].gamma, run.gamma);
    assert_eq!(rows[0].waist, 812.5);
}

#[test]
fn scheduling_does_not_change_bits() {
    let t = template(900.0, Some(20.0));
    let serial = model().with_exec(Exec::Serial).azimuthal_matrix(2, 2, &t).unwrap();
    for threads in [1, 3] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let par = pool.install(|| model().with_exec(Exec::Parallel).azimuthal_matrix(2, 2, &t).unwrap());
        let bits = |r: &MatrixRun| r.matrix.rates().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&serial), bits(&par), "{threads} threads");
    }
}

#[test]
fn convergence_failure_names_mode() {
    let mut m = model();
    m.expansion = ExpansionPolicy { cap: 60, tolerance: 1e-3 };
    match m.radial_matrix(0, 3, &template(300.0, None)) {
        Err(Error::Convergence { ell, p, cutoff, tail, .. }) => {
            assert_eq!(ell, 0);
            assert!(p >= 1);
            assert_eq!(cutoff, 60);
            assert!(tail > 1e-3);
        }
        other => panic!("expected a convergence error, got {other:?}"),
    }
}

#[test]
fn doubling_quadrature_nodes_is_stable() {
    let t = template(1000.0, None);
    let base = model().radial_matrix(0, 10, &t).unwrap();
    let mut fine_model = model();
    fine_model.grid.subdivisions = 2;
    let fine = fine_model.radial_matrix(0, 10, &t).unwrap();
    assert_eq!(fine.quadrature_nodes, 2 * base.quadrature_nodes);
    let d = max_abs_diff(&base, &fine);
    assert!(d < 1e-4, "max |ΔΓ| = {d:.3e}");
}

#[test]
fn raising_expansion_cutoff_is_stable() {
    let t = template(1000.0, None);
    let m = model();
    let base = m.radial_matrix(0, 10, &t).unwrap();
    let used = base.fields.iter().map(|f| f.pmax_used).max().unwrap();
    let mut deep_model = model();
    deep_model.expansion.cap = 2 * used;
    let deep_t = DetectionConfig::new(t.mode, t.mode_waist, 2 * used, t.optics).unwrap();
    let deep = deep_model.radial_matrix(0, 10, &deep_t).unwrap();
    let d = max_abs_diff(&base, &deep);
    assert!(d < 1e-4, "p'max {used} -> {}: max |ΔΓ| = {d:.3e}", 2 * used);
}

#[test]
#[ignore = "the truncated weight sum grows like ln(p) at this geometry; 60 -> 80 changes it by about 7%"]
fn weight_sum_saturates_by_sixty() {
    let t = template(1000.0, None);
    let m = model();
    let rule = m.rule_for(&t, &[ModeIndex::new(10, 80)]).unwrap();
    let pump = pump_field(m.working_pump_waist(&t), &rule).unwrap();
    let sum = |pmax| {
        SpdcWeights::new(&pump, t.mode_waist, &rule, WeightNormalization { pmax, ell_max: 10 })
            .unwrap()
            .normalization()
    };
    let (s60, s80) = (sum(60), sum(80));
    assert!(s60.is_finite());
    assert!(((s80 - s60) / s60).abs() < 1e-6, "relative change {:.3e}", (s80 - s60) / s60);
}
