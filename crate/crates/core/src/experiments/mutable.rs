use rayon::prelude::*;

use super::report::{summarize_mutable, MutableRecord, Record, Summary};
use super::{
    check_kind, params_for, thread_pool, Environment, ExperimentConfig, ExperimentKind,
    ExperimentReport, MemoryShape,
};
use crate::codebook::{sample_binary_codebook, sample_normal_codebook};
use crate::error::Result;
use crate::memory::{AssociativeStore, CleanupStrategy, ValueCodebook};
use crate::rng::SeededRng;

const TAG: u64 = 3;

fn strategy_code(strategy: CleanupStrategy) -> u64 {
    match strategy {
        CleanupStrategy::Krop => 0,
        CleanupStrategy::Sign => 1,
        CleanupStrategy::None => 2,
        CleanupStrategy::Direct => 3,
    }
}

/// One trial: fill `M` keys, then overwrite one random pair per step and
/// grade every key against the reference after each step.
///
/// The key codebook and the sequence of writes depend only on
/// `(M, K, trial)`, so all strategies replay the same workload.
fn run_trial(
    config: &ExperimentConfig,
    root: &SeededRng,
    strategy: CleanupStrategy,
    shape: MemoryShape,
    trial: usize,
) -> Result<Vec<MutableRecord>> {
    let (m, k) = (shape.m, shape.k);
    let n = 1usize << k;
    let cell = [m as u64, k as u64, trial as u64];

    let keys = sample_normal_codebook(n, m, &mut root.substream(&[&[TAG, 0][..], &cell].concat()))?;
    let mut value_rng = root.substream(&[&[TAG, 1, strategy_code(strategy)][..], &cell].concat());
    let values = match strategy {
        CleanupStrategy::Krop => ValueCodebook::Krop(params_for(config, k, &mut value_rng)?),
        CleanupStrategy::Sign => {
            ValueCodebook::Explicit(sample_binary_codebook(n, n, &mut value_rng)?)
        }
        _ => ValueCodebook::Explicit(sample_normal_codebook(n, n, &mut value_rng)?),
    };
    let mut store = AssociativeStore::new(keys, values, strategy)?;

    let mut workload = root.substream(&[&[TAG, 2][..], &cell].concat());
    for key in 0..m {
        store.write(key, workload.below(n))?;
    }

    let mut out = Vec::with_capacity(config.steps);
    for step in 1..=config.steps {
        let key = workload.below(m);
        let value = workload.below(n);
        store.overwrite(key, value)?;
        out.push(MutableRecord {
            strategy,
            m,
            n,
            trial,
            step,
            retrieval_rate: store.retrieval_rate()?,
        });
    }
    Ok(out)
}

/// Overwrites associations in a full memory for `config.steps` steps and
/// tracks retrieval rate after each, per strategy, size and trial.
///
/// Value codebooks follow the strategy: krop rows for krop, `+-1/sqrt(N)`
/// rows for sign, `N(0, 1/N)` rows for none. Keys are `M` fixed
/// `N(0, 1/N)` rows. Random overwrites may target a key's current value.
pub fn run_mutable(config: &ExperimentConfig) -> Result<ExperimentReport> {
    check_kind(config, ExperimentKind::Mutable)?;
    let root = SeededRng::new(config.seed);
    let notes = vec![
        "grading: krop compares indices; sign requires the cleaned vector to equal the stored row; \
         none takes the argmax of dot products of the raw read with every value row"
            .to_string(),
        "overwrites are drawn uniformly from A x V, including no-op rewrites of a key's current value"
            .to_string(),
        "step t is graded after the t-th overwrite".to_string(),
    ];

    let shapes = config.memory_shapes();
    let mut tasks = Vec::new();
    for &strategy in &config.strategies {
        for &shape in &shapes {
            tasks.extend((0..config.trials).map(|trial| (strategy, shape, trial)));
        }
    }

    let threads = config.effective_threads();
    let batches = thread_pool(threads)?.install(|| {
        tasks
            .par_iter()
            .map(|&(strategy, shape, trial)| run_trial(config, &root, strategy, shape, trial))
            .collect::<Result<Vec<_>>>()
    })?;

    let records: Vec<MutableRecord> = batches.into_iter().flatten().collect();
    let (per_step, averaged) = summarize_mutable(&records);
    Ok(ExperimentReport {
        config: config.clone(),
        environment: Environment::capture(threads),
        notes,
        records: records.into_iter().map(Record::Mutable).collect(),
        summary: Summary::Mutable { per_step, averaged },
    })
}
