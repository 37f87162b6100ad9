use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use jlres::{linking, tame_transfer, Execution, FieldLevel, TowerParams};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn partitions(c: &mut Criterion) {
    let mut group = c.benchmark_group("linked_partition");
    group.sample_size(10);
    for (q, n) in [(3u64, 6u64), (2, 12)] {
        let level = FieldLevel::new(q, n).unwrap();
        for (name, exec) in MODES {
            group.bench_with_input(
                BenchmarkId::new(name, format!("{q}^{n}")),
                &level,
                |b, l| b.iter(|| linking::linked_partition(l, exec).unwrap()),
            );
        }
    }
    group.finish();
}

fn tables(c: &mut Criterion) {
    let mut group = c.benchmark_group("transfer_table");
    group.sample_size(10);
    // M = 3^8 − 1 and 5^6 − 1
    for params in [
        TowerParams::new(3, 3, 2, 1, 1, 16).unwrap(),
        TowerParams::new(5, 5, 1, 1, 3, 2).unwrap(),
    ] {
        let label = format!("{}^{}", params.big_q, params.n_prime);
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, &label), &params, |b, p| {
                b.iter(|| tame_transfer::transfer_table(p, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, partitions, tables);
criterion_main!(benches);
