use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use emq_core::bench::build_benchmark;
use emq_core::desk::{Desk, DeskConfig};
use emq_core::dsl::{fixtures::random_stack, layer_scores, sample_genome, Structure};
use emq_core::netzoo::Arch;
use emq_core::Exec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn benchmark_build(c: &mut Criterion) {
    let mut cfg = DeskConfig::new(Arch::MlpS, 0);
    cfg.n_per_class = 160;
    cfg.train.epochs = 5;
    let desk = Desk::build(cfg).unwrap();
    let mut group = c.benchmark_group("benchmark_build_27");
    group.sample_size(10);
    for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
        group.bench_function(name, |b| b.iter(|| build_benchmark(black_box(&desk), 27, &[2, 3, 4], 0, exec).unwrap()));
    }
    group.finish();
}

fn genome_scoring(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let stats = random_stack(&mut rng, 8);
    let genomes: Vec<_> = (0..256).map(|_| sample_genome(Structure::Branched, true, &mut rng)).collect();
    let mut group = c.benchmark_group("score_256_genomes");
    for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
        group.bench_function(name, |b| b.iter(|| exec.map(&genomes, |g| layer_scores(g, black_box(&stats)))));
    }
    group.finish();
}

criterion_group!(benches, benchmark_build, genome_scoring);
criterion_main!(benches);
