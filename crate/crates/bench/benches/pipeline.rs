use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use planwatch_core::collector::{lookup, CardinalityCache, EstimationContext, Estimator, EstimatorSpec, RecencyPolicy};
use planwatch_core::fixtures::{s3_family_templates, star_schema};
use planwatch_core::harness::{label_query, synthetic_separable, SyntheticConfig};
use planwatch_core::l1error::{l1_report, query_position_vectors, L1Weights};
use planwatch_core::model::{forward, init_model, loss_and_gradients, ModelConfig, ModelParams};
use planwatch_core::planspace::{optimize, PlanShape};
use planwatch_core::workloadgen::{scale_workload, DomainStore, MutationPolicy};
use planwatch_core::{generate_catalog, infer_join_closure, SubOptConfig};

fn planning(c: &mut Criterion) {
    let catalog = generate_catalog(&star_schema(1)).unwrap();
    let queries = scale_workload(
        &s3_family_templates(),
        &catalog,
        20,
        7,
        &MutationPolicy::default(),
        &mut DomainStore::new(),
    )
    .unwrap()
    .queries;
    let estimator = Estimator::new(EstimatorSpec::perturbed_truth(101, 0.5), &catalog);
    let cfg = SubOptConfig::new(1.0).unwrap();
    let q = queries.iter().max_by_key(|q| q.tables.len()).unwrap();
    let graph = infer_join_closure(q, catalog.spec()).unwrap();
    let labeled = label_query(&catalog, q, &estimator, &cfg).unwrap();

    c.bench_function("true_cardinality_all_subplans", |b| {
        b.iter(|| catalog.true_assignment(&graph, graph.connected_subsets()).unwrap())
    });
    c.bench_function("label_query", |b| {
        b.iter(|| label_query(&catalog, black_box(q), &estimator, &cfg).unwrap())
    });
    c.bench_function("optimize_bushy", |b| {
        b.iter(|| optimize(&graph, black_box(&labeled.est), PlanShape::Bushy).unwrap())
    });
    let weights = L1Weights::default();
    c.bench_function("l1_report", |b| {
        b.iter(|| {
            let pairs = query_position_vectors(&labeled.space, &labeled.truth, &labeled.est).unwrap();
            l1_report(&pairs, &weights)
        })
    });

    let mut cache = CardinalityCache::new(RecencyPolicy::Unweighted);
    for q in &queries {
        let g = infer_join_closure(q, catalog.spec()).unwrap();
        for set in g.connected_subsets() {
            let sp = g.subplan(set).unwrap();
            cache.observe(&sp, catalog.true_cardinality(&sp).unwrap());
        }
    }
    let surrogate = Estimator::new(EstimatorSpec::independence(), &catalog);
    let ctx = EstimationContext::new(&q.id);
    let subplans: Vec<_> = graph.connected_subsets().into_iter().map(|s| graph.subplan(s).unwrap()).collect();
    c.bench_function("cache_lookup_query", |b| {
        b.iter(|| {
            for sp in &subplans {
                black_box(lookup(&cache, sp, &surrogate, &ctx).unwrap());
            }
        })
    });
}

fn model(c: &mut Criterion) {
    let data = synthetic_separable(&SyntheticConfig {
        train_queries: 64,
        test_queries: 0,
        ..SyntheticConfig::default()
    })
    .unwrap();
    let cfg = ModelConfig::small(data.vocab.size(), data.max_len);
    let params: ModelParams<f32> = init_model(&cfg).unwrap();
    let example = &data.train[0];
    c.bench_function("forward", |b| b.iter(|| forward(&params, black_box(example).into()).unwrap()));
    let batch: Vec<_> = data.train.iter().take(32).collect();
    c.bench_function("loss_and_gradients_batch32", |b| {
        b.iter_batched(|| batch.clone(), |batch| loss_and_gradients(&params, &batch).unwrap(), BatchSize::SmallInput)
    });
}

criterion_group!(benches, planning, model);
criterion_main!(benches);
