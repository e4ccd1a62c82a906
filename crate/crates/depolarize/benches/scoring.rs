use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use depolarize::generators::{generate, GraphModel, OpinionModel};
use depolarize::planner::{best_scored, best_scored_sequential, score_pairs, Heuristic};
use depolarize::CandidateMode;

/// Compares the default (parallel when the `parallel` feature is on) candidate
/// scan against the always-sequential path on one full scoring pass.
fn bench_scoring(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (g, s) = generate(
        &GraphModel::ErdosRenyi { n: 400, p: 0.02 },
        &OpinionModel::Uniform01,
        &mut rng,
    )
    .expect("valid generator spec");

    let mut group = c.benchmark_group("full_candidate_scan");
    for h in [
        Heuristic::DisagreementSeeking,
        Heuristic::CoordinateDescent,
        Heuristic::FiedlerDifference,
    ] {
        let score = score_pairs(&g, Some(&s), h).expect("scorable heuristic");
        group.bench_with_input(BenchmarkId::new("default", h.name()), &score, |b, score| {
            b.iter(|| best_scored(&g, CandidateMode::NonEdges, score))
        });
        group.bench_with_input(
            BenchmarkId::new("sequential", h.name()),
            &score,
            |b, score| {
                b.iter(|| best_scored_sequential(&g, CandidateMode::NonEdges, score))
            },
        );
    }
    group.finish();
}

criterion_group!(benches, bench_scoring);
criterion_main!(benches);
