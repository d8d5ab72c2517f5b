//! Pipeline benchmarks: channel drop generation, the two beam-search
//! strategies, predictor inference, and one training epoch. Run with
//! `cargo bench -p beamsim-bench`.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use beamsim_core::beamforming::{sweep_rsrp, RxMode};
use beamsim_core::beamsearch::{exhaustive_search, hierarchical_search};
use beamsim_core::channel::{generate_drop, ChannelProfile, DropConfig};
use beamsim_core::config::SimParams;
use beamsim_core::dataset::{Dataset, FeatureStats, Sample, Split};
use beamsim_core::ml::{train, FcNetwork, LinearSoftmaxModel, Predictor, TrainConfig};
use beamsim_core::{ProfileName, Sector};

fn drop_config(params: &SimParams) -> DropConfig {
    DropConfig {
        profile: ChannelProfile::preset_d(),
        ue_distance_m: 50.0,
        ue_azimuth: 0.2,
        ue_elevation: std::f64::consts::FRAC_PI_2,
        carrier_hz: params.carrier_hz,
        bs: params.bs,
        ue: params.ue,
        sector: Sector::default(),
        seed: 11,
    }
}

fn bench_drop_generation(c: &mut Criterion) {
    let params = SimParams::default();
    let config = drop_config(&params);
    c.bench_function("channel_drop_8x8", |b| {
        b.iter(|| generate_drop(black_box(&config)).expect("drop generates"))
    });
}

fn bench_beam_search(c: &mut Criterion) {
    let params = SimParams::default();
    let channel = generate_drop(&drop_config(&params)).expect("drop generates");
    let tx = params.tx_structure().expect("tx codebook");
    let rx = params.rx_structure().expect("rx codebook");
    let budget = params.budget;

    let mut group = c.benchmark_group("beam_search");
    group.bench_function("exhaustive_512_pairs", |b| {
        b.iter(|| {
            let report = sweep_rsrp(
                black_box(&channel),
                &tx.child,
                RxMode::Codebook(&rx.child),
                &budget,
                1,
                7,
            )
            .expect("sweep");
            exhaustive_search(&report).expect("search")
        })
    });
    group.bench_function("hierarchical_48_pairs", |b| {
        b.iter(|| {
            hierarchical_search(black_box(&channel), &tx, &rx, &budget, 1, 7).expect("search")
        })
    });
    group.finish();
}

fn unit_stats(n: usize) -> FeatureStats {
    FeatureStats {
        mean: vec![0.0; n],
        std: vec![1.0; n],
    }
}

fn bench_inference(c: &mut Criterion) {
    let features: Vec<f64> = (0..16).map(|i| -70.0 - i as f64).collect();
    let linear = Predictor::LinearSoftmax(LinearSoftmaxModel::zeros(
        16,
        64,
        unit_stats(16),
        "bench".into(),
    ));
    let fc = Predictor::FcNetwork(
        FcNetwork::zeros(&[16, 64, 64, 64, 64, 64], unit_stats(16), "bench".into())
            .expect("valid widths"),
    );

    let mut group = c.benchmark_group("inference");
    group.bench_function("linear_softmax_16_to_64", |b| {
        b.iter(|| linear.predict_raw(black_box(&features)).expect("forward"))
    });
    group.bench_function("fc_baseline_16_to_64", |b| {
        b.iter(|| fc.predict_raw(black_box(&features)).expect("forward"))
    });
    group.finish();
}

/// Synthetic classification set shaped like the real one (16 → 64).
fn synthetic_dataset(n: usize) -> Dataset {
    let (f_p, f) = (16, 64);
    let samples: Vec<Sample> = (0..n)
        .map(|i| {
            let label = i % f;
            let parent_rsrp_dbm: Vec<f64> = (0..f_p)
                .map(|p| if p == label % f_p { -70.0 } else { -80.0 })
                .collect();
            let mut child_rsrp_dbm = vec![-95.0; f];
            child_rsrp_dbm[label] = -65.0;
            Sample {
                seed: i as u64,
                scenario: ProfileName::D,
                ue_distance_m: 50.0,
                ue_azimuth: 0.0,
                parent_rsrp_dbm,
                label,
                child_rsrp_dbm,
                genie_rsrp_dbm: -65.0,
            }
        })
        .collect();
    let splits: Vec<Split> = (0..n)
        .map(|i| if i % 5 == 4 { Split::Val } else { Split::Train })
        .collect();
    let feature_stats = FeatureStats::from_rows(
        samples
            .iter()
            .zip(&splits)
            .filter(|(_, &s)| s == Split::Train)
            .map(|(s, _)| s.parent_rsrp_dbm.as_slice()),
    )
    .expect("stats");
    Dataset {
        samples,
        splits,
        feature_stats,
        codebook_fingerprint: "bench".into(),
    }
}

fn bench_training_epoch(c: &mut Criterion) {
    let dataset = synthetic_dataset(512);
    let config = TrainConfig {
        epochs: 1,
        ..TrainConfig::default()
    };
    c.bench_function("train_epoch_512x16x64", |b| {
        b.iter_batched(
            || dataset.clone(),
            |data| train(&data, black_box(&config)).expect("train"),
            BatchSize::LargeInput,
        )
    });
}

criterion_group!(
    benches,
    bench_drop_generation,
    bench_beam_search,
    bench_inference,
    bench_training_epoch
);
criterion_main!(benches);
