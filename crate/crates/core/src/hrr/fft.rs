//! Iterative radix-2 decimation-in-time FFT.
//!
//! Bit-reversal permutations and twiddle factors are computed once per
//! length and cached process-wide behind an `RwLock`, so repeated binds at a
//! fixed dimension only pay for the butterflies.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Precomputed tables for one transform length.
#[derive(Debug)]
pub struct FftPlan {
    len: usize,
    bit_reverse: Vec<usize>,
    /// `exp(-2 pi i k / len)` for `k < len / 2`.
    twiddles: Vec<Complex64>,
}

impl FftPlan {
    fn build(len: usize) -> Self {
        let bits = len.trailing_zeros();
        let bit_reverse = (0..len)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (usize::BITS - bits)
                }
            })
            .collect();
        // Each twiddle is evaluated directly rather than by repeated
        // multiplication, which would accumulate rounding error at large N.
        let twiddles = (0..len / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / len as f64))
            .collect();
        FftPlan {
            len,
            bit_reverse,
            twiddles,
        }
    }

    /// Returns the shared plan for `len`, building it on first use.
    pub fn for_len(len: usize) -> Result<Arc<FftPlan>> {
        if !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        static CACHE: OnceLock<RwLock<HashMap<usize, Arc<FftPlan>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(plan) = cache.read().unwrap_or_else(|e| e.into_inner()).get(&len) {
            return Ok(Arc::clone(plan));
        }
        let mut guard = cache.write().unwrap_or_else(|e| e.into_inner());
        let plan = guard
            .entry(len)
            .or_insert_with(|| Arc::new(FftPlan::build(len)));
        Ok(Arc::clone(plan))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Transforms `data` in place. The inverse includes the `1/N` factor.
    pub fn process(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.len, "buffer length does not match plan");
        let n = self.len;
        for (i, &j) in self.bit_reverse.iter().enumerate() {
            if i < j {
                data.swap(i, j);
            }
        }

        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for block in data.chunks_exact_mut(2 * half) {
                let (lo, hi) = block.split_at_mut(half);
                for (k, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                    let w = self.twiddles[k * stride];
                    let w = if inverse { w.conj() } else { w };
                    let t = *b * w;
                    *b = *a - t;
                    *a += t;
                }
            }
            half *= 2;
        }

        if inverse {
            let scale = 1.0 / n as f64;
            data.iter_mut().for_each(|x| *x *= scale);
        }
    }
}

/// Discrete Fourier transform of a power-of-two length sequence.
///
/// The forward transform uses the `exp(-2 pi i jk / N)` kernel; the inverse
/// applies the conjugate kernel and divides by `N`, so `fft(fft(x), true)`
/// reproduces `x`.
///
/// ```
/// use krop::hrr::fft;
/// use num_complex::Complex64;
///
/// let delta = [1.0, 0.0, 0.0, 0.0].map(|re| Complex64::new(re, 0.0));
/// let spectrum = fft(&delta, false).unwrap();
/// assert!(spectrum.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
/// ```
pub fn fft(x: &[Complex64], inverse: bool) -> Result<Vec<Complex64>> {
    let plan = FftPlan::for_len(x.len())?;
    let mut out = x.to_vec();
    plan.process(&mut out, inverse);
    Ok(out)
}
