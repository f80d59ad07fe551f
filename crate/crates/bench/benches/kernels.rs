use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use osveta_core::attack::decimate;
use osveta_core::ranking::compute_feature_table;
use osveta_core::{build_adjacency, shapes, LdpcCode};
use std::hint::black_box;

fn feature_table(c: &mut Criterion) {
    let mesh = shapes::bumpy_sphere(1.0, 4, 24, 1);
    let adj = build_adjacency(&mesh);
    c.bench_function("feature_table/2562", |b| {
        b.iter(|| compute_feature_table(black_box(&mesh), &adj))
    });
}

fn decimation(c: &mut Criterion) {
    let mesh = shapes::bumpy_sphere(1.0, 4, 24, 1);
    let mut group = c.benchmark_group("decimate/2562");
    for keep in [0.6, 0.1] {
        group.bench_function(format!("keep_{keep}"), |b| {
            b.iter(|| decimate(black_box(&mesh), keep).unwrap())
        });
    }
    group.finish();
}

fn ldpc_decode(c: &mut Criterion) {
    let code = LdpcCode::quasi_cyclic(16).unwrap();
    let message: Vec<u8> = (0..code.k).map(|i| (i * 7 % 3 == 0) as u8).collect();
    let word = code.encode(&message).unwrap();
    c.bench_function("ldpc_decode/n128_two_flips", |b| {
        b.iter_batched(
            || {
                let mut w = word.clone();
                w[5] ^= 1;
                w[77] ^= 1;
                w
            },
            |w| code.decode(&w, 50).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, feature_table, decimation, ldpc_decode);
criterion_main!(benches);
