use criterion::{criterion_group, criterion_main, Criterion};

use polyprov::corpus::load_corpus;
use polyprov::kernel::{check_script, parse_script};
use polyprov::par::{maybe_par_map, seq_map};
use polyprov::tm::{bundled_machines, decide_membership, Budget};

fn corpus_texts() -> Vec<&'static str> {
    load_corpus()
        .iter()
        .flat_map(|e| e.variants.iter().map(|v| v.text))
        .collect()
}

fn check_one(text: &str) -> bool {
    check_script(&parse_script(text).unwrap()).is_ok()
}

fn bench_corpus(c: &mut Criterion) {
    let texts = corpus_texts();
    c.bench_function("corpus/parallel-or-default", |b| {
        b.iter(|| {
            let oks = maybe_par_map(texts.clone(), check_one);
            assert!(oks.iter().all(|&ok| ok));
        })
    });
    c.bench_function("corpus/sequential", |b| {
        b.iter(|| {
            let oks = seq_map(texts.clone(), check_one);
            assert!(oks.iter().all(|&ok| ok));
        })
    });
}

fn bench_range_sweep(c: &mut Criterion) {
    let machines = bundled_machines().unwrap();
    let (_, parity) = machines.into_iter().find(|(k, _)| *k == "parity").unwrap();
    let budget = Budget::default();
    let ns: Vec<u64> = (0..=24).collect();
    c.bench_function("sweep/parallel-or-default", |b| {
        b.iter(|| {
            maybe_par_map(ns.clone(), |n| {
                decide_membership(&parity, n, &budget).unwrap()
            })
        })
    });
    c.bench_function("sweep/sequential", |b| {
        b.iter(|| seq_map(ns.clone(), |n| decide_membership(&parity, n, &budget).unwrap()))
    });
}

criterion_group!(benches, bench_corpus, bench_range_sweep);
criterion_main!(benches);
