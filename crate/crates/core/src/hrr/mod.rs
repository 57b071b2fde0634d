//! Holographic reduced representation operators.
//!
//! Binding is circular convolution, unbinding is circular correlation and
//! superposition is element-wise addition. Both convolution and correlation
//! run through the power-of-two FFT in [`fft`](self::fft()), so they cost
//! `O(N log N)`.

mod fft;

use std::ops::{AddAssign, Neg, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fft::{fft, FftPlan};

/// Dense real vector whose length is a power of two (at least 2) and whose
/// entries are all finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct HyperVector(Vec<f64>);

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if n >= 2 && n.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::NotPowerOfTwo(n))
    }
}

impl HyperVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        check_dim(entries.len())?;
        if let Some(pos) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(HyperVector(entries))
    }

    /// Wraps entries the caller has already validated.
    pub(crate) fn from_trusted(entries: Vec<f64>) -> Self {
        debug_assert!(check_dim(entries.len()).is_ok());
        debug_assert!(entries.iter().all(|x| x.is_finite()));
        HyperVector(entries)
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(HyperVector(vec![0.0; dim]))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &HyperVector) -> Result<f64> {
        same_dim(self, other)?;
        Ok(dot(&self.0, &other.0))
    }

    pub fn norm(&self) -> f64 {
        dot(&self.0, &self.0).sqrt()
    }

    pub fn scaled(&self, factor: f64) -> HyperVector {
        HyperVector(self.0.iter().map(|x| x * factor).collect())
    }

    /// Largest absolute entry-wise difference.
    pub fn max_abs_diff(&self, other: &HyperVector) -> Result<f64> {
        same_dim(self, other)?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

impl TryFrom<Vec<f64>> for HyperVector {
    type Error = Error;

    fn try_from(entries: Vec<f64>) -> Result<Self> {
        HyperVector::new(entries)
    }
}

impl From<HyperVector> for Vec<f64> {
    fn from(v: HyperVector) -> Self {
        v.0
    }
}

impl AsRef<[f64]> for HyperVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl Neg for &HyperVector {
    type Output = HyperVector;

    fn neg(self) -> HyperVector {
        HyperVector(self.0.iter().map(|x| -x).collect())
    }
}

/// Panics on dimension mismatch, like slice zips elsewhere in std.
impl AddAssign<&HyperVector> for HyperVector {
    fn add_assign(&mut self, rhs: &HyperVector) {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        self.0.iter_mut().zip(&rhs.0).for_each(|(a, b)| *a += b);
    }
}

impl SubAssign<&HyperVector> for HyperVector {
    fn sub_assign(&mut self, rhs: &HyperVector) {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        self.0.iter_mut().zip(&rhs.0).for_each(|(a, b)| *a -= b);
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four accumulators let the compiler vectorize without reassociating.
    let mut acc = [0.0f64; 4];
    let chunks_a = a.chunks_exact(4);
    let chunks_b = b.chunks_exact(4);
    let tail: f64 = chunks_a
        .remainder()
        .iter()
        .zip(chunks_b.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (ca, cb) in chunks_a.zip(chunks_b) {
        for j in 0..4 {
            acc[j] += ca[j] * cb[j];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn same_dim(a: &HyperVector, b: &HyperVector) -> Result<()> {
    if a.dim() == b.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        })
    }
}

fn spectrum(x: &[f64], plan: &FftPlan) -> Vec<Complex64> {
    let mut z: Vec<Complex64> = x.iter().map(|&re| Complex64::new(re, 0.0)).collect();
    plan.process(&mut z, false);
    z
}

/// Spectra of both operands. They are transformed separately, so an
/// all-zero operand gives an exactly zero spectrum.
fn spectra(a: &[f64], b: &[f64]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let plan = FftPlan::for_len(a.len())?;
    Ok((spectrum(a, &plan), spectrum(b, &plan)))
}

fn real_inverse(mut spectrum: Vec<Complex64>) -> Result<HyperVector> {
    let plan = FftPlan::for_len(spectrum.len())?;
    plan.process(&mut spectrum, true);
    #[cfg(debug_assertions)]
    {
        let norm = spectrum.iter().map(|z| z.re * z.re).sum::<f64>().sqrt();
        let residue = spectrum.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        debug_assert!(
            residue <= 1e-6 * norm.max(f64::MIN_POSITIVE),
            "imaginary residue {residue} too large for real convolution"
        );
    }
    Ok(HyperVector::from_trusted(
        spectrum.into_iter().map(|z| z.re).collect(),
    ))
}

/// Binds `a` and `b`: `t[l] = sum_k a[k] * b[(l - k) mod N]`.
///
/// ```
/// use krop::hrr::{circular_convolve, HyperVector};
///
/// let shift = HyperVector::new(vec![0.0, 1.0, 0.0, 0.0]).unwrap();
/// let b = HyperVector::new(vec![3.0, 1.0, 4.0, 1.0]).unwrap();
/// let t = circular_convolve(&shift, &b).unwrap();
/// let rounded: Vec<f64> = t.as_slice().iter().map(|x| x.round()).collect();
/// assert_eq!(rounded, vec![1.0, 3.0, 1.0, 4.0]);
/// ```
pub fn circular_convolve(a: &HyperVector, b: &HyperVector) -> Result<HyperVector> {
    same_dim(a, b)?;
    let (fa, fb) = spectra(&a.0, &b.0)?;
    real_inverse(fa.iter().zip(&fb).map(|(x, y)| x * y).collect())
}

/// Unbinds with key `a`: `u[i] = sum_j a[j] * t[(i + j) mod N]`.
///
/// This is the adjoint of binding with `a`, so for a key with i.i.d.
/// `N(0, 1/N)` entries it recovers the bound value in expectation.
pub fn circular_correlate(a: &HyperVector, t: &HyperVector) -> Result<HyperVector> {
    same_dim(a, t)?;
    let (fa, ft) = spectra(&a.0, &t.0)?;
    real_inverse(fa.iter().zip(&ft).map(|(x, y)| x.conj() * y).collect())
}

/// Element-wise sum of one or more vectors.
pub fn superpose<'a, I>(vs: I) -> Result<HyperVector>
where
    I: IntoIterator<Item = &'a HyperVector>,
{
    let mut iter = vs.into_iter();
    let mut sum = iter.next().ok_or(Error::Empty)?.clone();
    for v in iter {
        same_dim(&sum, v)?;
        sum += v;
    }
    Ok(sum)
}

/// Superposition of bound key-value pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryTrace {
    trace: HyperVector,
}

impl MemoryTrace {
    pub fn empty(dim: usize) -> Result<Self> {
        Ok(MemoryTrace {
            trace: HyperVector::zeros(dim)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.trace.dim()
    }

    pub fn vector(&self) -> &HyperVector {
        &self.trace
    }

    /// Adds `key (*) value` to the trace.
    pub fn bind_add(&mut self, key: &HyperVector, value: &HyperVector) -> Result<()> {
        let bound = self.checked_bind(key, value)?;
        self.trace += &bound;
        Ok(())
    }

    /// Subtracts `key (*) value` from the trace.
    pub fn bind_sub(&mut self, key: &HyperVector, value: &HyperVector) -> Result<()> {
        let bound = self.checked_bind(key, value)?;
        self.trace -= &bound;
        Ok(())
    }

    /// Noisy value bound to `key`.
    pub fn unbind(&self, key: &HyperVector) -> Result<HyperVector> {
        circular_correlate(key, &self.trace)
    }

    /// Resets every entry to zero.
    pub fn clear(&mut self) {
        self.trace.0.iter_mut().for_each(|x| *x = 0.0);
    }

    fn checked_bind(&self, key: &HyperVector, value: &HyperVector) -> Result<HyperVector> {
        same_dim(&self.trace, key)?;
        circular_convolve(key, value)
    }
}
