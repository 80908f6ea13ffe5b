//! Sequential against parallel execution of the three heavy stages.

use std::sync::Arc;
use std::time::Duration;

use affcell::celldata::{descriptors_for, Zone};
use affcell::cells::CellGraph;
use affcell::cellular::{verify_theorem, CellContext};
use affcell::hecke::HeckeAlgebra;
use affcell::klbasis::KLCache;
use affcell::{Ball, CoxeterSystem, Exec, GroupType};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn algebra(r: usize) -> Arc<HeckeAlgebra> {
    let sys = CoxeterSystem::new(GroupType::G2, &[5, 2]).unwrap();
    Arc::new(HeckeAlgebra::new(Arc::new(Ball::new(sys, r))))
}

fn kl_build(c: &mut Criterion) {
    let mut g = c.benchmark_group("kl_build");
    g.sample_size(10).measurement_time(Duration::from_secs(10));
    for r in [12, 16] {
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, r), &r, |b, &r| {
                b.iter(|| KLCache::build(algebra(r), exec).unwrap());
            });
        }
    }
    g.finish();
}

fn cell_graph(c: &mut Criterion) {
    let kl = KLCache::build(algebra(16), Exec::Parallel).unwrap();
    let mut g = c.benchmark_group("cell_graph");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| CellGraph::build(&kl, exec).unwrap().two_sided_cells()));
    }
    g.finish();
}

fn verify(c: &mut Criterion) {
    let kl = KLCache::build(algebra(14), Exec::Parallel).unwrap();
    let table = descriptors_for(GroupType::G2, Zone::RAbove2).unwrap();
    let desc = table.descriptor("c1").unwrap();
    let mut g = c.benchmark_group("verify_c1");
    g.sample_size(10).measurement_time(Duration::from_secs(10));
    for (name, exec) in MODES {
        // a fresh context each time so memoized P elements are not reused
        g.bench_function(name, |b| {
            b.iter(|| {
                let ctx = CellContext::new(&kl, &table, exec).unwrap();
                assert!(verify_theorem(&ctx, desc, 14, 500).passed());
            })
        });
    }
    g.finish();
}

criterion_group!(benches, kl_build, cell_graph, verify);
criterion_main!(benches);
