use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use beaverlab::games::{game1_run, game2_run, lemma_weight, BobKind, Game1Config, Game2Config};
use beaverlab::seqkit::SeqSpec;
use beaverlab::{Dyadic, WeightMap};

fn game1(c: &mut Criterion) {
    let mut cfg = Game1Config::new(SeqSpec::Const(0), 2);
    cfg.record = false;
    c.bench_function("game1_const0_d2_greedy", |b| {
        b.iter(|| game1_run(&cfg, &mut BobKind::Greedy.build()).unwrap())
    });
}

fn game2(c: &mut Criterion) {
    let mut cfg = Game2Config::new(SeqSpec::Const(0), 1);
    cfg.record = false;
    c.bench_function("game2_const0_d1_greedy", |b| {
        b.iter(|| game2_run(&cfg, &mut BobKind::Greedy.build()).unwrap())
    });
    let mut combined = Game2Config::combined(SeqSpec::Const(0), 3);
    combined.record = false;
    c.bench_function("game2_combined_d3_random", |b| {
        b.iter(|| game2_run(&combined, &mut BobKind::Random(1).build()).unwrap())
    });
}

fn lemma(c: &mut Criterion) {
    let mut w = WeightMap::new();
    for i in 0..2000u64 {
        w.add(i, &Dyadic::pow2_neg(12 + i % 40));
    }
    c.bench_function("lemma_weight_2000", |b| b.iter(|| lemma_weight(black_box(&w))));
}

criterion_group!(benches, game1, game2, lemma);
criterion_main!(benches);
