use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lclr_bench::circular_ladder;
use lclr_core::encode_ab::{decode_ab, encode_ab, AbScheme};
use lclr_core::gadget_bd::{auto_edge_coloring, gadget_bd};
use lclr_core::io::{Formalism, ProblemJson};
use lclr_core::pipeline::{instance_fixture, run_pipeline, PipelineConfig};

const SCHEME: AbScheme = AbScheme { max_degree: 3, max_label: 2 };

fn encoding(c: &mut Criterion) {
    let mut group = c.benchmark_group("encode_ab");
    for n in [4, 16, 64] {
        let g = circular_ladder(n);
        group.bench_with_input(BenchmarkId::from_parameter(2 * n), &g, |b, g| b.iter(|| encode_ab(g, &SCHEME).unwrap()));
    }
    group.finish();

    let mut group = c.benchmark_group("decode_ab");
    for n in [4, 16, 64] {
        let enc = encode_ab(&circular_ladder(n), &SCHEME).unwrap().graph;
        group.bench_with_input(BenchmarkId::from_parameter(2 * n), &enc, |b, g| b.iter(|| decode_ab(g, &SCHEME)));
    }
    group.finish();
}

fn gadgeting(c: &mut Criterion) {
    let mut group = c.benchmark_group("gadget_bd");
    for n in [4, 16] {
        let g = circular_ladder(n);
        group.bench_with_input(BenchmarkId::from_parameter(2 * n), &g, |b, g| {
            b.iter(|| {
                let x = auto_edge_coloring(g, 1).unwrap();
                gadget_bd(g, &x, 1).unwrap()
            })
        });
    }
    group.finish();
}

fn pipeline(c: &mut Criterion) {
    let coloring = ProblemJson::builtin(Formalism::Lcl, "coloring", &[("colors", 4)]);
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    let ab = PipelineConfig::new(coloring.clone(), "A-B").unwrap();
    let prism = instance_fixture("prism", 0).unwrap();
    group.bench_function("A-B prism", |b| b.iter(|| run_pipeline(&ab, &prism).unwrap()));
    let be = PipelineConfig::new(coloring, "B-E").unwrap();
    let k4 = instance_fixture("k4", 0).unwrap();
    group.bench_function("B-E k4", |b| b.iter(|| run_pipeline(&be, &k4).unwrap()));
    group.finish();
}

criterion_group!(benches, encoding, gadgeting, pipeline);
criterion_main!(benches);
