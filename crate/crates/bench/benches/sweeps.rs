use std::hint::black_box;

use awmc::fixtures::{trade_hms, trade_klm};
use awmc::logic::{axiom_sweep, derived_theorem_sweep};
use awmc::transforms::{check_equivalence_h, check_equivalence_l, h_transform, l_transform};
use awmc_bench::{hms_corpus, klm_corpus, trade_formulas};
use criterion::{criterion_group, criterion_main, Criterion};

fn evaluation(c: &mut Criterion) {
    let klm = trade_klm();
    let hms = trade_hms();
    let formulas = trade_formulas();
    c.bench_function("klm extension, 507 formulas", |b| {
        b.iter(|| {
            formulas
                .iter()
                .map(|f| klm.eval(black_box(f)).unwrap())
                .collect::<Vec<_>>()
        })
    });
    c.bench_function("hms extension, 507 formulas", |b| {
        b.iter(|| {
            formulas
                .iter()
                .map(|f| hms.extension(black_box(f)).unwrap())
                .collect::<Vec<_>>()
        })
    });
}

fn transforms(c: &mut Criterion) {
    let hms = trade_hms();
    let klms = klm_corpus(10);
    c.bench_function("l_transform trade", |b| {
        b.iter(|| l_transform(black_box(&hms)).unwrap())
    });
    c.bench_function("h_transform 10 models", |b| {
        b.iter(|| {
            klms.iter()
                .map(|m| h_transform(black_box(m)).unwrap())
                .collect::<Vec<_>>()
        })
    });
}

fn sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweeps");
    group.sample_size(10);
    let hms = hms_corpus(5);
    let klms = klm_corpus(5);
    let base = klms[0].lattice().base().clone();
    group.bench_function("equivalence l depth 2, trade", |b| {
        b.iter(|| check_equivalence_l(black_box(&trade_hms()), 2).unwrap())
    });
    group.bench_function("equivalence l depth 2, 5 models", |b| {
        b.iter(|| {
            hms.iter()
                .map(|m| check_equivalence_l(m, 2).unwrap().pairs)
                .sum::<usize>()
        })
    });
    group.bench_function("equivalence h depth 2, 5 models", |b| {
        b.iter(|| {
            klms.iter()
                .map(|m| check_equivalence_h(m, 2).unwrap().pairs)
                .sum::<usize>()
        })
    });
    group.bench_function("axiom sweep depth 1, 5 models", |b| {
        b.iter(|| axiom_sweep(black_box(&klms), base.atoms(), base.agents(), 1))
    });
    group.bench_function("derived sweep depth 1, 5 models", |b| {
        b.iter(|| derived_theorem_sweep(black_box(&klms), 1))
    });
    group.finish();
}

criterion_group!(benches, evaluation, transforms, sweeps);
criterion_main!(benches);
