use rayon::prelude::*;

use super::report::{summarize_capacity, CapacityRecord, Record, Summary};
use super::{
    check_kind, params_for, thread_pool, Environment, ExperimentConfig, ExperimentKind,
    ExperimentReport, Family,
};
use crate::codebook::{sample_binary_codebook, sample_normal_codebook, KropParams};
use crate::error::Result;
use crate::memory::{AssociativeStore, CleanupStrategy, ValueCodebook};
use crate::rng::SeededRng;

const TAG: u64 = 2;

fn family_code(family: Family) -> u64 {
    Family::ALL
        .iter()
        .position(|f| *f == family)
        .expect("known family") as u64
}

fn value_codebook(
    config: &ExperimentConfig,
    family: Family,
    k: usize,
    rng: &mut SeededRng,
) -> Result<(ValueCodebook, CleanupStrategy)> {
    let n = 1 << k;
    Ok(match family {
        Family::Normal => (
            ValueCodebook::Explicit(sample_normal_codebook(n, n, rng)?),
            CleanupStrategy::Direct,
        ),
        Family::Binary => (
            ValueCodebook::Explicit(sample_binary_codebook(n, n, rng)?),
            CleanupStrategy::Direct,
        ),
        Family::Sylvester => (
            ValueCodebook::Krop(KropParams::sylvester(k)?),
            CleanupStrategy::Krop,
        ),
        Family::Krop => (
            ValueCodebook::Krop(params_for(config, k, rng)?),
            CleanupStrategy::Krop,
        ),
    })
}

/// One trial of one `(family, K)` cell across all its `J` values.
///
/// The value codebook is drawn once per trial. Keys and stored value
/// indices are drawn per `(K, J, trial)` from a stream that does not depend
/// on the family, so every family sees the same pairs.
fn run_trial(
    config: &ExperimentConfig,
    root: &SeededRng,
    family: Family,
    k: usize,
    trial: usize,
) -> Result<Vec<CapacityRecord>> {
    let n = 1usize << k;
    let mut cb_rng = root.substream(&[TAG, 0, family_code(family), k as u64, trial as u64]);
    let (values, strategy) = value_codebook(config, family, k, &mut cb_rng)?;
    let first_keys = sample_normal_codebook(n, 1, &mut cb_rng)?;
    let mut store = AssociativeStore::new(first_keys, values, strategy)?;

    let mut out = Vec::new();
    for j in config.j_values(k) {
        let m = 1usize << j;
        let mut pair_rng = root.substream(&[TAG, 1, k as u64, j as u64, trial as u64]);
        let keys = sample_normal_codebook(n, m, &mut pair_rng)?;
        store.reset_with_keys(keys)?;
        for key in 0..m {
            store.write(key, pair_rng.below(n))?;
        }
        let retrieval_rate = store.retrieval_rate()?;
        out.push(CapacityRecord {
            family,
            k,
            n,
            j,
            m,
            trial,
            retrieval_rate,
            success: retrieval_rate == 1.0,
        });
    }
    Ok(out)
}

/// Measures retrieval rate for `M = 2^J` random pairs stored in one trace,
/// per codebook family, size and trial.
///
/// Keys are fresh i.i.d. `N(0, 1/N)` vectors; values are drawn uniformly
/// with replacement from the family's `N`-row codebook. Normal and binary
/// codebooks are cleaned up by dense scan, Sylvester and krop by the
/// butterfly.
pub fn run_capacity(config: &ExperimentConfig) -> Result<ExperimentReport> {
    check_kind(config, ExperimentKind::Capacity)?;
    let root = SeededRng::new(config.seed);
    let mut notes = vec![
        "success: retrieval_rate == 1; capacity: largest M whose success rate is 1".to_string(),
        "keys and value indices are shared across families for a given (K, J, trial)".to_string(),
    ];

    let mut tasks = Vec::new();
    for &family in &config.families {
        for k in config.k_values() {
            if family.is_dense() && k > config.dense_k_max {
                notes.push(format!(
                    "{family} K={k}: skipped (above dense_k_max = {})",
                    config.dense_k_max
                ));
                continue;
            }
            if config.j_values(k).is_empty() {
                continue;
            }
            tasks.extend((0..config.trials).map(|trial| (family, k, trial)));
        }
    }

    let threads = config.effective_threads();
    let batches = thread_pool(threads)?.install(|| {
        tasks
            .par_iter()
            .map(|&(family, k, trial)| run_trial(config, &root, family, k, trial))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut capacity_records: Vec<CapacityRecord> = batches.into_iter().flatten().collect();
    let family_rank = |f: Family| config.families.iter().position(|g| *g == f);
    capacity_records.sort_by_key(|r| (family_rank(r.family), r.k, r.j, r.trial));

    let (success, capacity) = summarize_capacity(&capacity_records);
    Ok(ExperimentReport {
        config: config.clone(),
        environment: Environment::capture(threads),
        notes,
        records: capacity_records.into_iter().map(Record::Capacity).collect(),
        summary: Summary::Capacity { success, capacity },
    })
}
