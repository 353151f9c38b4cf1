use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tsplab::analysis::{colored_cell_centers, find_aligned_copies};
use tsplab::bnb::{hk_one_tree_bound, run_bfs_bnb, BnBConfig, DEFAULT_ITERS};
use tsplab::exact::held_karp_tour;
use tsplab::gadgets::nn_gadget;
use tsplab::heuristics::run;
use tsplab::instance::{gen_uniform, plant, PlantOptions};
use tsplab::{EdgeConstraints, Heuristic, Topology};

fn held_karp(c: &mut Criterion) {
    let mut g = c.benchmark_group("held_karp");
    g.sample_size(10);
    for n in [10, 13, 16] {
        let inst = gen_uniform(n, 2, 1, Topology::Torus).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &inst, |b, inst| b.iter(|| held_karp_tour(black_box(inst))));
    }
    g.finish();
}

fn heuristics(c: &mut Criterion) {
    let mut g = c.benchmark_group("heuristics");
    g.sample_size(10);
    let inst = gen_uniform(1024, 2, 2, Topology::Torus).unwrap();
    for h in Heuristic::ALL {
        g.bench_with_input(BenchmarkId::new(h.name(), 1024), &inst, |b, inst| b.iter(|| run(h, black_box(inst))));
    }
    g.finish();
}

fn one_tree(c: &mut Criterion) {
    let mut g = c.benchmark_group("one_tree");
    g.sample_size(10);
    for n in [64, 256] {
        let inst = gen_uniform(n, 2, 3, Topology::Torus).unwrap();
        let cons = EdgeConstraints::new();
        g.bench_with_input(BenchmarkId::from_parameter(n), &inst, |b, inst| {
            b.iter(|| hk_one_tree_bound(black_box(inst), &cons, DEFAULT_ITERS, None))
        });
    }
    g.finish();
}

fn bnb(c: &mut Criterion) {
    let mut g = c.benchmark_group("bnb");
    g.sample_size(10);
    for n in [10, 14] {
        let inst = gen_uniform(n, 2, 4, Topology::Cube).unwrap();
        let cfg = BnBConfig { record_trace: false, ..BnBConfig::default() };
        g.bench_with_input(BenchmarkId::from_parameter(n), &inst, |b, inst| b.iter(|| run_bfs_bnb(black_box(inst), &cfg)));
    }
    g.finish();
}

fn copy_detection(c: &mut Criterion) {
    let r = 0.3;
    let gadget = nn_gadget().scaled(0.05);
    let mut inst = gen_uniform(16384, 2, 5, Topology::Torus).unwrap();
    for (j, ctr) in colored_cell_centers(&inst.domain, r).iter().take(8).enumerate() {
        inst = plant(&inst, &gadget.points, ctr, &PlantOptions::new(&format!("nn{j}"), 0.5)).unwrap().0;
    }
    let mut g = c.benchmark_group("copy_detection");
    g.sample_size(10);
    g.bench_function("nn_16384", |b| b.iter(|| find_aligned_copies(black_box(&inst), &gadget.points, 1e-6, r)));
    g.finish();
}

criterion_group!(benches, held_karp, heuristics, one_tree, bnb, copy_detection);
criterion_main!(benches);
