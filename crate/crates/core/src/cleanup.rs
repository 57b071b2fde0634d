//! Clean-up: mapping a noisy vector to its closest codebook entry.
//!
//! Three strategies are provided:
//!
//! * [`krop_cleanup`] computes every score `H u` for a krop codebook with a
//!   Walsh-Hadamard-style butterfly in `O(N log N)` and never materializes
//!   the codebook.
//! * [`direct_cleanup`] scores each row of an explicit codebook with a dot
//!   product, `O(N |V|)`.
//! * [`sign_cleanup`] rounds to the nearest `+-1/sqrt(N)` vector in `O(N)`.
//!   It does not consult a codebook and so reports no index.
//!
//! Index-producing strategies break argmax ties toward the lowest index.
//!
//! # Buffer layout of the krop transform
//!
//! The butterfly works in place on one flat buffer of length `N`. At level
//! `k` (running from `K` down to 1) the buffer holds `N / 2^k` sub-problems
//! of `2^k` entries each, laid out contiguously in order. Each sub-problem
//! `[x_a | x_b]` (first and second halves) is replaced by
//! `[c x_a + s x_b | s x_a - c x_b]` with `(c, s)` taken from
//! `theta_{k-1}`; the two halves are exactly the two child sub-problems of
//! the next level, so no reindexing or second buffer is needed. After level
//! 1 the buffer holds the scores.

use ndarray::{ArrayView2, Axis};

use crate::codebook::{krop_row, ExplicitCodebook, KropParams};
use crate::error::{Error, Result};
use crate::hrr::{dot, HyperVector};

/// Outcome of a clean-up.
#[derive(Debug, Clone, PartialEq)]
pub struct CleanupResult {
    /// Winning row, `None` for sign clean-up.
    pub index: Option<usize>,
    /// Cleaned vector; equals the codebook row at `index` when present.
    pub vector: HyperVector,
    /// Similarity of `u` to every codebook row, when computed.
    pub scores: Option<Vec<f64>>,
}

fn check_params_dim(params: &KropParams, u: &HyperVector) -> Result<()> {
    if u.dim() == params.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: params.dim(),
            actual: u.dim(),
        })
    }
}

/// Applies the krop matrix to `buf` in place. `buf.len()` must be `2^K`.
pub fn krop_transform_in_place(params: &KropParams, buf: &mut [f64]) {
    assert_eq!(buf.len(), params.dim(), "buffer length must be 2^K");
    let (cos, sin) = (params.cos(), params.sin());
    for level in (1..=params.k()).rev() {
        let half = 1 << (level - 1);
        let (c, s) = (cos[level - 1], sin[level - 1]);
        for block in buf.chunks_exact_mut(2 * half) {
            let (first, second) = block.split_at_mut(half);
            for (x, y) in first.iter_mut().zip(second.iter_mut()) {
                let (a, b) = (*x, *y);
                *x = c * a + s * b;
                *y = s * a - c * b;
            }
        }
    }
}

/// The full score vector `H u` for the krop codebook given by `params`.
///
/// The krop matrix is symmetric and orthogonal, so applying this twice
/// returns `u`.
pub fn krop_transform(params: &KropParams, u: &HyperVector) -> Result<HyperVector> {
    check_params_dim(params, u)?;
    let mut buf = u.as_slice().to_vec();
    krop_transform_in_place(params, &mut buf);
    Ok(HyperVector::from_trusted(buf))
}

/// Index of the largest score, lowest index on ties.
pub fn argmax(scores: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i)
}

/// Gap between the largest and second-largest score.
pub fn top_two_margin(scores: &[f64]) -> f64 {
    let mut first = f64::NEG_INFINITY;
    let mut second = f64::NEG_INFINITY;
    for &s in scores {
        if s > first {
            second = first;
            first = s;
        } else if s > second {
            second = s;
        }
    }
    first - second
}

/// Closest krop codebook row to `u` by dot product, in `O(N log N)`.
///
/// ```
/// use krop::cleanup::krop_cleanup;
/// use krop::codebook::{krop_params, krop_row, ThetaScheme};
///
/// let params = krop_params(10, ThetaScheme::EvenlySpaced, None).unwrap();
/// let row = krop_row(&params, 321).unwrap();
/// assert_eq!(krop_cleanup(&params, &row).unwrap().index, Some(321));
/// ```
pub fn krop_cleanup(params: &KropParams, u: &HyperVector) -> Result<CleanupResult> {
    let scores = krop_transform(params, u)?.into_inner();
    let index = argmax(&scores).expect("scores are nonempty");
    Ok(CleanupResult {
        index: Some(index),
        vector: krop_row(params, index)?,
        scores: Some(scores),
    })
}

fn check_codebook_dim(codebook: &ExplicitCodebook, u: &HyperVector) -> Result<()> {
    if u.dim() == codebook.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: codebook.dim(),
            actual: u.dim(),
        })
    }
}

/// Closest row of an explicit codebook by dot product.
pub fn direct_cleanup(codebook: &ExplicitCodebook, u: &HyperVector) -> Result<CleanupResult> {
    check_codebook_dim(codebook, u)?;
    let scores: Vec<f64> = codebook.rows().map(|row| dot(row, u.as_slice())).collect();
    let index = argmax(&scores).expect("codebook is nonempty");
    Ok(CleanupResult {
        index: Some(index),
        vector: codebook.row_vector(index)?,
        scores: Some(scores),
    })
}

/// Winning row indices for many queries at once.
///
/// Scores come from one matrix product, which is much faster than repeated
/// [`direct_cleanup`] calls on large codebooks. Accumulation order differs
/// from [`direct_cleanup`], so results may disagree on near-ties.
pub fn direct_cleanup_indices(
    codebook: &ExplicitCodebook,
    queries: &[HyperVector],
) -> Result<Vec<usize>> {
    if queries.is_empty() {
        return Ok(Vec::new());
    }
    let dim = codebook.dim();
    let mut flat = Vec::with_capacity(dim * queries.len());
    for q in queries {
        check_codebook_dim(codebook, q)?;
        flat.extend_from_slice(q.as_slice());
    }
    let q = ArrayView2::from_shape((queries.len(), dim), &flat).expect("shape matches");
    let v =
        ArrayView2::from_shape((codebook.len(), dim), codebook.as_flat()).expect("shape matches");
    let scores = q.dot(&v.t());
    Ok(scores
        .axis_iter(Axis(0))
        .map(|row| argmax(row.as_slice().expect("standard layout")).expect("nonempty"))
        .collect())
}

/// Rounds `u` to `sign(u) / sqrt(N)`, with `sign(0) = +1`.
///
/// ```
/// use krop::cleanup::sign_cleanup;
/// use krop::hrr::HyperVector;
///
/// let u = HyperVector::new(vec![0.3, -0.2]).unwrap();
/// let cleaned = sign_cleanup(&u).unwrap();
/// let r = 1.0 / 2f64.sqrt();
/// assert_eq!(cleaned.vector.as_slice(), &[r, -r]);
/// assert_eq!(cleaned.index, None);
/// ```
pub fn sign_cleanup(u: &HyperVector) -> Result<CleanupResult> {
    let mag = 1.0 / (u.dim() as f64).sqrt();
    let entries = u
        .as_slice()
        .iter()
        .map(|&x| if x >= 0.0 { mag } else { -mag })
        .collect();
    Ok(CleanupResult {
        index: None,
        vector: HyperVector::from_trusted(entries),
        scores: None,
    })
}
