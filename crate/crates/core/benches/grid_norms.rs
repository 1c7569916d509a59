//! Grid-norm benchmarks: the data-parallel sup against the sequential
//! fallback, on the workloads the acceptance suite leans on.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ultraflow::mahler::{norm_ct, norm_ct_seq, CtIndex, MahlerSeries};
use ultraflow::padic::{PadicNumber, Val};

const P: u64 = 3;
const N: u32 = 12;

fn series(deg: usize) -> MahlerSeries {
    let coeffs: Vec<PadicNumber> = (0..=deg)
        .map(|m| PadicNumber::from_integer(P, (m as i64 % 7) * 9 + 3, N))
        .collect();
    MahlerSeries::new(P, N, coeffs, Val::Infinite)
}

fn bench_grid_norms(c: &mut Criterion) {
    let mut group = c.benchmark_group("norm_ct");
    // (order, level, degree): the last row is the heavy grid where the
    // data-parallel sup pays for itself
    for (t, level, deg) in [(0u32, 4u32, 16usize), (1, 2, 16), (1, 3, 24)] {
        let f = series(deg);
        group.bench_with_input(
            BenchmarkId::new("parallel", format!("t{t}_L{level}_d{deg}")),
            &(t, level),
            |b, &(t, level)| b.iter(|| norm_ct(&f, CtIndex(t), level).unwrap()),
        );
        group.bench_with_input(
            BenchmarkId::new("sequential", format!("t{t}_L{level}_d{deg}")),
            &(t, level),
            |b, &(t, level)| b.iter(|| norm_ct_seq(&f, CtIndex(t), level).unwrap()),
        );
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default()
        .sample_size(10)
        .warm_up_time(std::time::Duration::from_millis(500))
        .measurement_time(std::time::Duration::from_secs(2));
    targets = bench_grid_norms
}
criterion_main!(benches);
