//! Key-value memory on top of a single HRR trace.
//!
//! Pairs are stored by binding a key row to a value row and adding the result
//! to the trace. Reading correlates the key with the trace and cleans up the
//! noisy result. Overwriting first reads the current value, subtracts its
//! binding, then adds the new one; how well the old association cancels
//! depends entirely on the clean-up strategy.
//!
//! A symbolic [`ReferenceMemory`] tracks the value index last written under
//! each key so retrieval can be graded.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cleanup::{
    argmax, direct_cleanup, direct_cleanup_indices, krop_cleanup, krop_transform, sign_cleanup,
    CleanupResult,
};
use crate::codebook::{krop_row, ExplicitCodebook, KropParams};
use crate::error::{Error, Result};
use crate::hrr::{HyperVector, MemoryTrace};

/// How a noisy read is turned into a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CleanupStrategy {
    /// Butterfly clean-up against a krop codebook.
    Krop,
    /// Round to `sign(u) / sqrt(N)`.
    Sign,
    /// No clean-up: the raw unbound vector is returned.
    None,
    /// Dot product against every row of an explicit codebook.
    Direct,
}

impl CleanupStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            CleanupStrategy::Krop => "krop",
            CleanupStrategy::Sign => "sign",
            CleanupStrategy::None => "none",
            CleanupStrategy::Direct => "direct",
        }
    }
}

impl fmt::Display for CleanupStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CleanupStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "krop" => Ok(CleanupStrategy::Krop),
            "sign" => Ok(CleanupStrategy::Sign),
            "none" => Ok(CleanupStrategy::None),
            "direct" => Ok(CleanupStrategy::Direct),
            other => Err(Error::InvalidParameter(format!(
                "unknown strategy {other:?}"
            ))),
        }
    }
}

/// Value embeddings, either implicit (krop angles) or explicit rows.
#[derive(Debug, Clone)]
pub enum ValueCodebook {
    Krop(KropParams),
    Explicit(ExplicitCodebook),
}

impl ValueCodebook {
    pub fn dim(&self) -> usize {
        match self {
            ValueCodebook::Krop(p) => p.dim(),
            ValueCodebook::Explicit(cb) => cb.dim(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ValueCodebook::Krop(p) => p.dim(),
            ValueCodebook::Explicit(cb) => cb.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, index: usize) -> Result<HyperVector> {
        match self {
            ValueCodebook::Krop(p) => krop_row(p, index),
            ValueCodebook::Explicit(cb) => cb.row_vector(index),
        }
    }
}

/// Symbolic ground truth: the latest value index written under each key.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceMemory {
    entries: BTreeMap<usize, usize>,
}

impl ReferenceMemory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: usize, value: usize) {
        self.entries.insert(key, value);
    }

    pub fn get(&self, key: usize) -> Option<usize> {
        self.entries.get(&key).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(key, value)` pairs in key order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }
}

/// An HRR key-value store with a fixed clean-up strategy.
#[derive(Debug, Clone)]
pub struct AssociativeStore {
    trace: MemoryTrace,
    keys: ExplicitCodebook,
    values: ValueCodebook,
    strategy: CleanupStrategy,
    reference: ReferenceMemory,
}

impl AssociativeStore {
    /// An empty store. Krop clean-up needs a krop value codebook and direct
    /// clean-up an explicit one; sign and none accept either.
    pub fn new(
        keys: ExplicitCodebook,
        values: ValueCodebook,
        strategy: CleanupStrategy,
    ) -> Result<Self> {
        if keys.dim() != values.dim() {
            return Err(Error::DimensionMismatch {
                expected: keys.dim(),
                actual: values.dim(),
            });
        }
        match (strategy, &values) {
            (CleanupStrategy::Krop, ValueCodebook::Explicit(_)) => {
                return Err(Error::InvalidParameter(
                    "krop clean-up needs a krop value codebook".into(),
                ))
            }
            (CleanupStrategy::Direct, ValueCodebook::Krop(_)) => {
                return Err(Error::InvalidParameter(
                    "direct clean-up needs an explicit value codebook".into(),
                ))
            }
            _ => {}
        }
        Ok(AssociativeStore {
            trace: MemoryTrace::empty(keys.dim())?,
            keys,
            values,
            strategy,
            reference: ReferenceMemory::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.trace.dim()
    }

    pub fn strategy(&self) -> CleanupStrategy {
        self.strategy
    }

    pub fn trace(&self) -> &MemoryTrace {
        &self.trace
    }

    pub fn reference(&self) -> &ReferenceMemory {
        &self.reference
    }

    pub fn keys(&self) -> &ExplicitCodebook {
        &self.keys
    }

    pub fn values(&self) -> &ValueCodebook {
        &self.values
    }

    pub fn key(&self, index: usize) -> Result<HyperVector> {
        self.keys.row_vector(index)
    }

    pub fn value(&self, index: usize) -> Result<HyperVector> {
        self.values.row(index)
    }

    /// Swaps in a new key codebook and empties the store, keeping the value
    /// codebook.
    pub fn reset_with_keys(&mut self, keys: ExplicitCodebook) -> Result<()> {
        if keys.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: keys.dim(),
            });
        }
        self.keys = keys;
        self.trace.clear();
        self.reference = ReferenceMemory::new();
        Ok(())
    }

    /// Zeroes the trace, leaving the reference memory untouched.
    pub fn clear_trace(&mut self) {
        self.trace.clear();
    }

    /// Adds `key (*) value` to the trace and records the pair.
    pub fn write(&mut self, key_idx: usize, value_idx: usize) -> Result<()> {
        let key = self.key(key_idx)?;
        let value = self.value(value_idx)?;
        self.trace.bind_add(&key, &value)?;
        self.reference.set(key_idx, value_idx);
        Ok(())
    }

    /// Unbinds `key_idx` from the trace and applies the store's clean-up.
    pub fn read(&self, key_idx: usize) -> Result<CleanupResult> {
        let noisy = self.trace.unbind(&self.key(key_idx)?)?;
        self.clean(noisy)
    }

    fn clean(&self, noisy: HyperVector) -> Result<CleanupResult> {
        match (self.strategy, &self.values) {
            (CleanupStrategy::Krop, ValueCodebook::Krop(p)) => krop_cleanup(p, &noisy),
            (CleanupStrategy::Direct, ValueCodebook::Explicit(cb)) => direct_cleanup(cb, &noisy),
            (CleanupStrategy::Sign, _) => sign_cleanup(&noisy),
            (CleanupStrategy::None, _) => Ok(CleanupResult {
                index: None,
                vector: noisy,
                scores: None,
            }),
            _ => unreachable!("strategy and codebook are checked in new()"),
        }
    }

    /// Replaces the value stored under `key_idx`.
    ///
    /// The current value is estimated with [`read`](Self::read), its binding
    /// subtracted, and the new binding added.
    pub fn overwrite(&mut self, key_idx: usize, new_value_idx: usize) -> Result<()> {
        if self.reference.get(key_idx).is_none() {
            self.key(key_idx)?;
            return Err(Error::UnwrittenKey(key_idx));
        }
        let key = self.key(key_idx)?;
        let new_value = self.value(new_value_idx)?;
        let old_value = self.read(key_idx)?.vector;
        self.trace.bind_sub(&key, &old_value)?;
        self.trace.bind_add(&key, &new_value)?;
        self.reference.set(key_idx, new_value_idx);
        Ok(())
    }

    /// Fraction of the store's own written pairs that are read back
    /// correctly. See [`retrieval_rate`].
    pub fn retrieval_rate(&self) -> Result<f64> {
        retrieval_rate(self, &self.reference)
    }
}

/// Fraction of `reference` pairs that `store` reads back correctly.
///
/// Grading depends on the strategy:
///
/// * krop and direct: the clean-up index equals the reference value index;
/// * sign: the cleaned vector equals the reference value row exactly;
/// * none: the value row with the largest dot product against the raw read
///   is the reference value (lowest index on ties).
///
/// Direct and none grading score all reads with one batched matrix product.
pub fn retrieval_rate(store: &AssociativeStore, reference: &ReferenceMemory) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::InvalidParameter("reference memory is empty".into()));
    }
    let mut correct = 0usize;
    match (store.strategy, &store.values) {
        (CleanupStrategy::Krop, _) | (CleanupStrategy::Sign, _) => {
            for (key, value) in reference.iter() {
                let result = store.read(key)?;
                let hit = match result.index {
                    Some(index) => index == value,
                    None => result.vector == store.value(value)?,
                };
                correct += usize::from(hit);
            }
        }
        (CleanupStrategy::None, ValueCodebook::Krop(p)) => {
            for (key, value) in reference.iter() {
                let noisy = store.trace.unbind(&store.key(key)?)?;
                let scores = krop_transform(p, &noisy)?.into_inner();
                correct += usize::from(argmax(&scores) == Some(value));
            }
        }
        (CleanupStrategy::None, ValueCodebook::Explicit(cb))
        | (CleanupStrategy::Direct, ValueCodebook::Explicit(cb)) => {
            let (keys, expected): (Vec<usize>, Vec<usize>) = reference.iter().unzip();
            let noisy = keys
                .iter()
                .map(|&k| store.trace.unbind(&store.key(k)?))
                .collect::<Result<Vec<_>>>()?;
            let found = direct_cleanup_indices(cb, &noisy)?;
            correct = found.iter().zip(&expected).filter(|(a, b)| a == b).count();
        }
        (CleanupStrategy::Direct, ValueCodebook::Krop(_)) => {
            unreachable!("strategy and codebook are checked in new()")
        }
    }
    Ok(correct as f64 / reference.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::{
        krop_params, sample_binary_codebook, sample_normal_codebook, CodebookFamily, ThetaScheme,
    };
    use crate::hrr::circular_convolve;
    use crate::rng::SeededRng;

    fn krop_store(k: usize, keys: usize, seed: u64) -> AssociativeStore {
        let mut rng = SeededRng::new(seed);
        let n = 1 << k;
        let key_cb = sample_normal_codebook(n, keys, &mut rng).unwrap();
        let params = krop_params(k, ThetaScheme::EvenlySpaced, None).unwrap();
        AssociativeStore::new(key_cb, ValueCodebook::Krop(params), CleanupStrategy::Krop).unwrap()
    }

    fn store_with(strategy: CleanupStrategy, k: usize, keys: usize, seed: u64) -> AssociativeStore {
        let mut rng = SeededRng::new(seed);
        let n = 1 << k;
        let key_cb = sample_normal_codebook(n, keys, &mut rng).unwrap();
        let values = match strategy {
            CleanupStrategy::Krop => {
                ValueCodebook::Krop(krop_params(k, ThetaScheme::EvenlySpaced, None).unwrap())
            }
            CleanupStrategy::Sign => {
                ValueCodebook::Explicit(sample_binary_codebook(n, n, &mut rng).unwrap())
            }
            _ => ValueCodebook::Explicit(sample_normal_codebook(n, n, &mut rng).unwrap()),
        };
        AssociativeStore::new(key_cb, values, strategy).unwrap()
    }

    #[test]
    fn one_write_is_one_binding() {
        let mut s = krop_store(6, 2, 1);
        s.write(0, 5).unwrap();
        let expected = circular_convolve(&s.key(0).unwrap(), &s.value(5).unwrap()).unwrap();
        assert_eq!(s.trace().vector(), &expected);

        s.write(1, 9).unwrap();
        let mut both = expected.clone();
        both += &circular_convolve(&s.key(1).unwrap(), &s.value(9).unwrap()).unwrap();
        assert_eq!(s.trace().vector(), &both);
    }

    /// Keys that are shifted deltas are unitary: correlating with one
    /// exactly inverts binding with it, so a single pair is noise-free.
    fn delta_keys(n: usize, shift: usize) -> ExplicitCodebook {
        let mut e = vec![0.0; n];
        e[shift % n] = 1.0;
        ExplicitCodebook::from_rows(CodebookFamily::Custom, &[HyperVector::new(e).unwrap()])
            .unwrap()
    }

    #[test]
    fn single_noise_free_pair_is_recovered_at_every_size() {
        let mut rng = SeededRng::new(21);
        for k in 2..=12 {
            let n = 1 << k;
            let keys = delta_keys(n, rng.below(n));
            let params = krop_params(k, ThetaScheme::EvenlySpaced, None).unwrap();
            let mut s = AssociativeStore::new(
                keys.clone(),
                ValueCodebook::Krop(params),
                CleanupStrategy::Krop,
            )
            .unwrap();
            let v = rng.below(n);
            s.write(0, v).unwrap();
            assert_eq!(s.read(0).unwrap().index, Some(v), "K = {k}");
            assert_eq!(s.retrieval_rate().unwrap(), 1.0);

            let values = ValueCodebook::Explicit(sample_normal_codebook(n, n, &mut rng).unwrap());
            let mut d = AssociativeStore::new(keys, values, CleanupStrategy::Direct).unwrap();
            d.write(0, rng.below(n)).unwrap();
            assert_eq!(d.retrieval_rate().unwrap(), 1.0, "K = {k}");
        }
    }

    #[test]
    fn single_random_key_pair_is_recovered() {
        for k in 8..=12 {
            let mut s = krop_store(k, 1, k as u64);
            let v = (1 << k) - 1;
            s.write(0, v).unwrap();
            assert_eq!(s.read(0).unwrap().index, Some(v), "K = {k}");

            let mut d = store_with(CleanupStrategy::Direct, k, 1, k as u64);
            d.write(0, 1).unwrap();
            assert_eq!(d.retrieval_rate().unwrap(), 1.0, "K = {k}");
        }
    }

    #[test]
    fn small_memory_round_trip() {
        let mut s = krop_store(10, 4, 2);
        for (key, value) in [(0, 17), (1, 400), (2, 17), (3, 1023)] {
            s.write(key, value).unwrap();
        }
        for (key, value) in [(0, 17), (1, 400), (2, 17), (3, 1023)] {
            assert_eq!(s.read(key).unwrap().index, Some(value));
        }
    }

    #[test]
    fn raw_read_correlates_with_value() {
        let mut s = store_with(CleanupStrategy::None, 10, 1, 3);
        s.write(0, 7).unwrap();
        let r = s.read(0).unwrap();
        assert_eq!(r.index, None);
        let d = r.vector.dot(&s.value(7).unwrap()).unwrap();
        assert!((d - 1.0).abs() < 0.25, "dot = {d}");
    }

    #[test]
    fn empty_trace_reads_index_zero() {
        let s = krop_store(5, 1, 4);
        assert_eq!(s.read(0).unwrap().index, Some(0));
    }

    #[test]
    fn reads_have_no_side_effects() {
        let mut s = krop_store(8, 8, 5);
        for key in 0..8 {
            s.write(key, key * 3).unwrap();
        }
        let before = s.trace().clone();
        let first: Vec<_> = (0..8).map(|k| s.read(k).unwrap()).collect();
        for _ in 0..3 {
            let again: Vec<_> = (0..8).map(|k| s.read(k).unwrap()).collect();
            assert_eq!(first, again);
        }
        assert_eq!(&before, s.trace());
    }

    #[test]
    fn krop_overwrite_cancels_exactly() {
        let mut s = krop_store(8, 1, 6);
        s.write(0, 10).unwrap();
        s.overwrite(0, 200).unwrap();
        let fresh = circular_convolve(&s.key(0).unwrap(), &s.value(200).unwrap()).unwrap();
        assert!(s.trace().vector().max_abs_diff(&fresh).unwrap() < 1e-9);
        assert_eq!(s.reference().get(0), Some(200));
    }

    #[test]
    fn overwrite_matches_fresh_build_when_cleanup_is_right() {
        let mut s = krop_store(10, 6, 7);
        for key in 0..6 {
            s.write(key, 100 + key).unwrap();
        }
        s.overwrite(2, 999).unwrap();
        let mut fresh = krop_store(10, 6, 7);
        for key in 0..6 {
            fresh
                .write(key, if key == 2 { 999 } else { 100 + key })
                .unwrap();
        }
        let diff = s
            .trace()
            .vector()
            .max_abs_diff(fresh.trace().vector())
            .unwrap();
        assert!(diff < 1e-9, "diff {diff}");
    }

    #[test]
    fn no_cleanup_overwrite_leaves_residue() {
        let mut s = store_with(CleanupStrategy::None, 8, 1, 8);
        s.write(0, 3).unwrap();
        s.overwrite(0, 4).unwrap();
        let target = circular_convolve(&s.key(0).unwrap(), &s.value(4).unwrap()).unwrap();
        let mut residual = s.trace().vector().clone();
        residual -= &target;
        assert!(residual.norm() > 1e-3, "residual {}", residual.norm());
    }

    #[test]
    fn overwrite_errors() {
        let mut s = krop_store(4, 2, 9);
        assert!(matches!(s.overwrite(1, 0), Err(Error::UnwrittenKey(1))));
        assert!(matches!(
            s.overwrite(5, 0),
            Err(Error::IndexOutOfRange { .. })
        ));
        s.write(0, 0).unwrap();
        assert!(matches!(
            s.overwrite(0, 16),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(s.write(2, 0).is_err());
        assert!(s.write(0, 16).is_err());
        assert!(s.read(2).is_err());
    }

    #[test]
    fn zeroed_trace_gives_chance_rate() {
        let m = 16;
        let mut s = krop_store(10, m, 10);
        let mut rng = SeededRng::new(11);
        for key in 0..m {
            s.write(key, rng.below(1024)).unwrap();
        }
        s.clear_trace();
        let rate = s.retrieval_rate().unwrap();
        assert!(rate <= 1.0 / m as f64 + 0.1, "rate {rate}");
    }

    #[test]
    fn sign_grading_requires_exact_row() {
        let mut s = store_with(CleanupStrategy::Sign, 8, 1, 12);
        s.write(0, 3).unwrap();
        let r = s.read(0).unwrap();
        let expected = f64::from(u8::from(r.vector == s.value(3).unwrap()));
        assert_eq!(s.retrieval_rate().unwrap(), expected);
    }

    #[test]
    fn none_grading_on_krop_values() {
        let mut rng = SeededRng::new(13);
        let keys = sample_normal_codebook(256, 2, &mut rng).unwrap();
        let params = krop_params(8, ThetaScheme::EvenlySpaced, None).unwrap();
        let mut s = AssociativeStore::new(keys, ValueCodebook::Krop(params), CleanupStrategy::None)
            .unwrap();
        s.write(0, 12).unwrap();
        s.write(1, 99).unwrap();
        assert_eq!(s.retrieval_rate().unwrap(), 1.0);
    }

    #[test]
    fn construction_checks() {
        let mut rng = SeededRng::new(14);
        let keys = sample_normal_codebook(16, 2, &mut rng).unwrap();
        let normal = sample_normal_codebook(16, 16, &mut rng).unwrap();
        let params = krop_params(4, ThetaScheme::EvenlySpaced, None).unwrap();
        assert!(AssociativeStore::new(
            keys.clone(),
            ValueCodebook::Explicit(normal),
            CleanupStrategy::Krop
        )
        .is_err());
        assert!(AssociativeStore::new(
            keys.clone(),
            ValueCodebook::Krop(params),
            CleanupStrategy::Direct
        )
        .is_err());
        let small = krop_params(3, ThetaScheme::EvenlySpaced, None).unwrap();
        assert!(matches!(
            AssociativeStore::new(keys, ValueCodebook::Krop(small), CleanupStrategy::Krop),
            Err(Error::DimensionMismatch { .. })
        ));

        let s = krop_store(4, 1, 15);
        assert!(s.retrieval_rate().is_err());
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in [
            CleanupStrategy::Krop,
            CleanupStrategy::Sign,
            CleanupStrategy::None,
            CleanupStrategy::Direct,
        ] {
            assert_eq!(s.as_str().parse::<CleanupStrategy>().unwrap(), s);
        }
        assert!("fuzzy".parse::<CleanupStrategy>().is_err());
    }
}
