use std::hint::black_box;
use std::time::Instant;

use super::report::{Agreement, MaterializeTime, Method, Record, Summary, TimingRecord};
use super::{
    check_kind, params_for, Environment, ExperimentConfig, ExperimentKind, ExperimentReport,
};
use crate::cleanup::{direct_cleanup, krop_cleanup, top_two_margin};
use crate::codebook::krop_materialize;
use crate::error::Result;
use crate::hrr::HyperVector;
use crate::rng::SeededRng;

const TAG: u64 = 1;
pub(super) const NEAR_TIE: f64 = 1e-9;

fn noise(rng: &mut SeededRng, n: usize) -> HyperVector {
    HyperVector::new((0..n).map(|_| rng.normal(1.0)).collect()).expect("finite normals")
}

/// Times dense matrix-vector clean-up against krop clean-up on the same
/// `N(0, 1)` noise vectors.
///
/// Only the clean-up calls are timed. Materializing the dense matrix is
/// timed separately and reported in the summary. Above
/// `config.direct_k_max`, or when the matrix cannot be allocated, the dense
/// rows are emitted with no time and agreement `skipped`.
pub fn run_timing(config: &ExperimentConfig) -> Result<ExperimentReport> {
    check_kind(config, ExperimentKind::Timing)?;
    let root = SeededRng::new(config.seed);
    let mut records = Vec::new();
    let mut notes = vec![
        "timed region: clean-up call only (scores + argmax + row); dense matrix built outside it"
            .to_string(),
        format!("near-tie margin {NEAR_TIE:e} on the top two dense scores"),
    ];
    let mut materialize = Vec::new();

    for k in config.k_values() {
        let n = 1usize << k;
        let params = params_for(config, k, &mut root.substream(&[TAG, 0, k as u64]))?;

        let dense = if k <= config.direct_k_max {
            let start = Instant::now();
            match krop_materialize(&params) {
                Ok(h) => {
                    materialize.push(MaterializeTime {
                        k,
                        seconds: start.elapsed().as_secs_f64(),
                    });
                    Some(h)
                }
                Err(e) => {
                    notes.push(format!("K={k}: dense baseline skipped ({e})"));
                    None
                }
            }
        } else {
            notes.push(format!(
                "K={k}: dense baseline skipped (above direct_k_max)"
            ));
            None
        };

        for w in 0..config.warmup {
            let u = noise(&mut root.substream(&[TAG, 1, k as u64, w as u64]), n);
            black_box(krop_cleanup(&params, &u)?);
            if let Some(h) = &dense {
                black_box(direct_cleanup(h, &u)?);
            }
        }

        for rep in 0..config.reps {
            let u = noise(&mut root.substream(&[TAG, 2, k as u64, rep as u64]), n);

            let (direct_seconds, direct) = match &dense {
                Some(h) => {
                    let start = Instant::now();
                    let result = black_box(direct_cleanup(h, &u)?);
                    (Some(start.elapsed().as_secs_f64()), Some(result))
                }
                None => (None, None),
            };

            let start = Instant::now();
            let fast = black_box(krop_cleanup(&params, &u)?);
            let krop_seconds = start.elapsed().as_secs_f64();

            let agreement = match direct {
                None => Agreement::Skipped,
                Some(d) if d.index == fast.index => Agreement::True,
                Some(d) => {
                    let margin = top_two_margin(d.scores.as_deref().unwrap_or_default());
                    let verdict = if margin <= NEAR_TIE {
                        Agreement::NearTie
                    } else {
                        Agreement::False
                    };
                    notes.push(format!(
                        "K={k} rep={rep}: direct {:?} vs krop {:?}, margin {margin:e} ({})",
                        d.index,
                        fast.index,
                        verdict.as_str()
                    ));
                    verdict
                }
            };

            for (method, seconds) in [
                (Method::Direct, direct_seconds),
                (Method::Krop, Some(krop_seconds)),
            ] {
                records.push(Record::Timing(TimingRecord {
                    k,
                    n,
                    rep,
                    method,
                    seconds,
                    index_agreement: agreement,
                }));
            }
        }
    }

    Ok(ExperimentReport {
        config: config.clone(),
        environment: Environment::capture(1),
        notes,
        records,
        summary: Summary::Timing { materialize },
    })
}
