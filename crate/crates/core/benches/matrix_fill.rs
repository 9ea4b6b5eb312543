use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use lgcorr::{DetectionConfig, Exec, ExpansionPolicy, ModeIndex, Model, OpticsConfig, SourceParams};

fn matrix_fill(c: &mut Criterion) {
    let t = DetectionConfig::new(ModeIndex::new(0, 0), 1000.0, 60, OpticsConfig::paper_defaults()).unwrap();
    let mut group = c.benchmark_group("radial_matrix_l0_p5");
    group.sample_size(10);
    for (name, exec) in [("serial", Exec::Serial), ("parallel", Exec::Parallel)] {
        let mut model = Model::new(SourceParams::paper_defaults()).with_exec(exec);
        model.expansion = ExpansionPolicy { cap: 240, tolerance: 1e-2 };
        group.bench_with_input(BenchmarkId::from_parameter(name), &model, |b, m| {
            b.iter(|| m.radial_matrix(0, 5, &t).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, matrix_fill);
criterion_main!(benches);
