use std::time::Instant;

use krop::codebook::{krop_params, krop_row, ThetaScheme};
use krop::experiments::{
    run, ExperimentConfig, ExperimentKind, ExperimentReport, Family, MemoryShape, OutputFormat,
    CAPACITY_HEADER, MUTABLE_HEADER, TIMING_HEADER,
};
use krop::memory::CleanupStrategy;

fn small_timing() -> ExperimentConfig {
    ExperimentConfig {
        seed: 1,
        k_max: 8,
        reps: 5,
        warmup: 1,
        ..ExperimentConfig::timing()
    }
}

#[test]
fn timing_emits_two_rows_per_rep_and_k() {
    let report = run(&small_timing()).unwrap();
    let csv = report.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(TIMING_HEADER));
    assert_eq!(lines.count(), 2 * 5 * 8);
    assert!(report
        .timing_records()
        .all(|r| r.index_agreement.as_str() == "true"));
}

#[test]
fn timing_above_the_dense_cap_is_skipped() {
    let config = ExperimentConfig {
        k_min: 5,
        k_max: 6,
        reps: 2,
        direct_k_max: 5,
        ..small_timing()
    };
    let report = run(&config).unwrap();
    let skipped: Vec<_> = report
        .timing_records()
        .filter(|r| r.index_agreement.as_str() == "skipped")
        .collect();
    assert_eq!(skipped.len(), 4);
    assert!(skipped.iter().all(|r| r.k == 6));
    assert!(skipped
        .iter()
        .filter(|r| r.method.as_str() == "direct")
        .all(|r| r.seconds.is_none()));
    assert!(report.to_csv().contains(",direct,,skipped"));
}

#[test]
fn capacity_respects_the_family_filter() {
    let config = ExperimentConfig {
        seed: 2,
        k_min: 2,
        k_max: 7,
        trials: 3,
        families: vec![Family::Krop],
        ..ExperimentConfig::capacity()
    };
    let report = run(&config).unwrap();
    let csv = report.to_csv();
    assert_eq!(csv.lines().next(), Some(CAPACITY_HEADER));
    assert!(report.capacity_records().all(|r| r.family == Family::Krop));
    // J runs over 2..=K-2, so K = 2, 3 contribute nothing.
    let cells: usize = (4..=7).map(|k| k - 3).sum();
    assert_eq!(report.capacity_records().count(), cells * 3);
    for r in report.capacity_records() {
        assert_eq!(r.m, 1 << r.j);
        assert_eq!(r.n, 1 << r.k);
        assert_eq!(r.success, r.retrieval_rate == 1.0);
    }
}

#[test]
fn dense_families_stop_at_their_cap() {
    let config = ExperimentConfig {
        seed: 3,
        k_min: 6,
        k_max: 7,
        trials: 2,
        dense_k_max: 6,
        families: vec![Family::Normal, Family::Binary, Family::Sylvester],
        ..ExperimentConfig::capacity()
    };
    let report = run(&config).unwrap();
    assert!(report
        .capacity_records()
        .all(|r| r.k == 6 || r.family == Family::Sylvester));
    assert!(report
        .notes
        .iter()
        .any(|n| n.contains("normal K=7: skipped")));
}

#[test]
fn mutable_rows_cover_every_step() {
    let config = ExperimentConfig {
        seed: 4,
        trials: 2,
        steps: 5,
        shapes: vec![MemoryShape { m: 4, k: 7 }],
        ..ExperimentConfig::mutable()
    };
    let report = run(&config).unwrap();
    let csv = report.to_csv();
    assert_eq!(csv.lines().next(), Some(MUTABLE_HEADER));
    assert_eq!(report.mutable_records().count(), 3 * 2 * 5);
    let steps: Vec<usize> = report
        .mutable_records()
        .filter(|r| r.strategy == CleanupStrategy::Krop && r.trial == 0)
        .map(|r| r.step)
        .collect();
    assert_eq!(steps, vec![1, 2, 3, 4, 5]);
}

#[test]
fn strategies_replay_the_same_workload() {
    let config = |strategies| ExperimentConfig {
        seed: 9,
        trials: 2,
        steps: 4,
        shapes: vec![MemoryShape { m: 4, k: 8 }],
        strategies,
        ..ExperimentConfig::mutable()
    };
    let alone = run(&config(vec![CleanupStrategy::Krop])).unwrap();
    let mixed = run(&config(vec![CleanupStrategy::Sign, CleanupStrategy::Krop])).unwrap();
    let krop_rows = |r: &ExperimentReport| -> Vec<String> {
        r.to_csv()
            .lines()
            .filter(|l| l.starts_with("mutable,krop,"))
            .map(str::to_string)
            .collect()
    };
    assert_eq!(krop_rows(&alone), krop_rows(&mixed));
}

#[test]
fn report_json_round_trips_and_files_are_written() {
    let config = ExperimentConfig {
        seed: 6,
        k_min: 4,
        k_max: 6,
        trials: 2,
        ..ExperimentConfig::capacity()
    };
    let report = run(&config).unwrap();
    let back = ExperimentReport::from_json(&report.to_json()).unwrap();
    assert_eq!(back.to_csv(), report.to_csv());
    assert_eq!(back.config, config);

    let dir = tempfile::tempdir().unwrap();
    let written = report.write(dir.path(), OutputFormat::Both).unwrap();
    assert_eq!(written.len(), 2);
    let csv = std::fs::read_to_string(dir.path().join("capacity.csv")).unwrap();
    assert_eq!(csv, report.to_csv());
    assert!(dir.path().join("capacity.json").exists());
}

#[test]
fn wrong_kind_is_rejected() {
    let config = ExperimentConfig::capacity();
    assert!(krop::experiments::run_timing(&config).is_err());
    assert_eq!(
        ExperimentConfig::for_kind(ExperimentKind::Mutable).experiment,
        ExperimentKind::Mutable
    );
}

/// Materializing one row is linear in N: 16x the dimension should cost
/// roughly 16x the time. The band is wide to absorb timer noise.
#[test]
fn row_materialization_scales_linearly() {
    let time = |k: usize| {
        let params = krop_params(k, ThetaScheme::EvenlySpaced, None).unwrap();
        (0..5)
            .map(|i| {
                let start = Instant::now();
                std::hint::black_box(krop_row(&params, (1 << k) - 1 - i).unwrap());
                start.elapsed().as_secs_f64()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let ratio = time(20) / time(16);
    assert!((4.0..=64.0).contains(&ratio), "ratio {ratio}");
}
