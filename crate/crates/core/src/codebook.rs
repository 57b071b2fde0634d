//! Codebook construction: sampled HRR codebooks (normal, binary), the
//! Sylvester Hadamard matrix and the Kronecker rotation product (krop).
//!
//! A krop codebook of dimension `N = 2^K` is the Kronecker product of `K`
//! two-by-two rotation-reflection factors
//!
//! ```text
//! F(theta) = | cos theta   sin theta |
//!            | sin theta  -cos theta |
//! ```
//!
//! with `F(theta_{K-1})` outermost and `F(theta_0)` innermost. It is
//! symmetric and orthogonal, and is fully described by its `K` angles
//! ([`KropParams`]). Bit `k` of a row index (counting from the least
//! significant bit) selects which row of `F(theta_k)` contributes to that
//! codebook row.

use std::f64::consts::{FRAC_PI_4, TAU};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hrr::{check_dim, HyperVector};
use crate::rng::SeededRng;

/// Largest `K` for which a dense `2^K x 2^K` matrix may be built.
pub const MAX_MATERIALIZE_K: usize = 14;

/// How krop angles are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaScheme {
    /// `theta_k = (k + 1) * 2 pi / (K + 1)`: the interior points of a uniform
    /// grid on `[0, 2 pi]`.
    EvenlySpaced,
    /// i.i.d. uniform on the open interval `(0, 2 pi)`.
    UniformRandom,
}

impl ThetaScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            ThetaScheme::EvenlySpaced => "evenly-spaced",
            ThetaScheme::UniformRandom => "uniform-random",
        }
    }
}

impl fmt::Display for ThetaScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ThetaScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "evenly-spaced" => Ok(ThetaScheme::EvenlySpaced),
            "uniform-random" => Ok(ThetaScheme::UniformRandom),
            other => Err(Error::InvalidParameter(format!(
                "unknown theta scheme {other:?}"
            ))),
        }
    }
}

/// The `K` angles that define a `2^K`-dimensional krop codebook.
///
/// Cosines and sines are computed once at construction.
#[derive(Debug, Clone)]
pub struct KropParams {
    thetas: Vec<f64>,
    cos: Vec<f64>,
    sin: Vec<f64>,
    scheme: Option<ThetaScheme>,
    seed: Option<u64>,
}

impl PartialEq for KropParams {
    fn eq(&self, other: &Self) -> bool {
        self.thetas == other.thetas && self.scheme == other.scheme && self.seed == other.seed
    }
}

impl KropParams {
    /// Params from explicit angles. Each angle must lie strictly inside
    /// `(0, 2 pi)`.
    pub fn from_thetas(thetas: Vec<f64>) -> Result<Self> {
        Self::with_provenance(thetas, None, None)
    }

    fn with_provenance(
        thetas: Vec<f64>,
        scheme: Option<ThetaScheme>,
        seed: Option<u64>,
    ) -> Result<Self> {
        if thetas.is_empty() {
            return Err(Error::InvalidParameter("K must be at least 1".into()));
        }
        if thetas.len() >= usize::BITS as usize {
            return Err(Error::InvalidParameter(format!(
                "K = {} does not fit a row index",
                thetas.len()
            )));
        }
        if let Some((k, t)) = thetas
            .iter()
            .enumerate()
            .find(|(_, &t)| !(t > 0.0 && t < TAU))
        {
            return Err(Error::InvalidParameter(format!(
                "theta_{k} = {t} is outside the open interval (0, 2 pi)"
            )));
        }
        Ok(KropParams {
            cos: thetas.iter().map(|t| t.cos()).collect(),
            sin: thetas.iter().map(|t| t.sin()).collect(),
            thetas,
            scheme,
            seed,
        })
    }

    /// All angles `pi / 4`: the row-normalized Sylvester Hadamard matrix.
    pub fn sylvester(k: usize) -> Result<Self> {
        Self::from_thetas(vec![FRAC_PI_4; k])
    }

    pub fn k(&self) -> usize {
        self.thetas.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.k()
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub(crate) fn cos(&self) -> &[f64] {
        &self.cos
    }

    pub(crate) fn sin(&self) -> &[f64] {
        &self.sin
    }

    /// Scheme the angles were generated with, `None` for explicit angles.
    pub fn scheme(&self) -> Option<ThetaScheme> {
        self.scheme
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        save_params(self, path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        load_params(path)
    }
}

/// Generates krop angles for a `2^k`-dimensional codebook.
///
/// `rng` is required for [`ThetaScheme::UniformRandom`] and must be absent
/// for [`ThetaScheme::EvenlySpaced`].
pub fn krop_params(
    k: usize,
    scheme: ThetaScheme,
    rng: Option<&mut SeededRng>,
) -> Result<KropParams> {
    if k == 0 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    match (scheme, rng) {
        (ThetaScheme::EvenlySpaced, None) => {
            let step = TAU / (k + 1) as f64;
            let thetas = (0..k).map(|i| (i + 1) as f64 * step).collect();
            KropParams::with_provenance(thetas, Some(scheme), None)
        }
        (ThetaScheme::UniformRandom, Some(rng)) => {
            let thetas = (0..k)
                .map(|_| loop {
                    let t = TAU * rng.open_unit();
                    if t < TAU {
                        break t;
                    }
                })
                .collect();
            KropParams::with_provenance(thetas, Some(scheme), Some(rng.seed()))
        }
        (ThetaScheme::EvenlySpaced, Some(_)) => Err(Error::InvalidParameter(
            "evenly-spaced angles take no random stream".into(),
        )),
        (ThetaScheme::UniformRandom, None) => Err(Error::InvalidParameter(
            "uniform-random angles need a random stream".into(),
        )),
    }
}

/// Row `index` of the krop codebook, built in `O(N)` time by iterated
/// scaled concatenation.
///
/// ```
/// use krop::codebook::{krop_row, KropParams};
///
/// let params = KropParams::from_thetas(vec![std::f64::consts::FRAC_PI_3]).unwrap();
/// let row = krop_row(&params, 0).unwrap();
/// assert!((row.as_slice()[0] - 0.5).abs() < 1e-15);
/// assert!((row.as_slice()[1] - 3f64.sqrt() / 2.0).abs() < 1e-15);
/// ```
pub fn krop_row(params: &KropParams, index: usize) -> Result<HyperVector> {
    let n = params.dim();
    if index >= n {
        return Err(Error::IndexOutOfRange { index, len: n });
    }
    let mut v = Vec::with_capacity(n);
    v.push(1.0);
    for k in 0..params.k() {
        let (c, s) = (params.cos[k], params.sin[k]);
        let (first, second) = if (index >> k) & 1 == 0 {
            (c, s)
        } else {
            (s, -c)
        };
        let len = v.len();
        v.resize(2 * len, 0.0);
        let (lo, hi) = v.split_at_mut(len);
        for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
            *y = second * *x;
            *x *= first;
        }
    }
    Ok(HyperVector::from_trusted(v))
}

/// Which construction produced an [`ExplicitCodebook`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodebookFamily {
    Normal,
    Binary,
    Sylvester,
    KropMaterialized,
    /// Rows supplied by the caller.
    Custom,
}

/// A codebook held in memory as a dense row-major matrix.
///
/// Row `i` is the embedding of symbol `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitCodebook {
    family: CodebookFamily,
    dim: usize,
    data: Vec<f64>,
}

impl ExplicitCodebook {
    pub fn from_rows(family: CodebookFamily, rows: &[HyperVector]) -> Result<Self> {
        let dim = rows.first().ok_or(Error::Empty)?.dim();
        let mut data = Vec::with_capacity(dim * rows.len());
        for row in rows {
            if row.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: row.dim(),
                });
            }
            data.extend_from_slice(row.as_slice());
        }
        Ok(ExplicitCodebook { family, dim, data })
    }

    pub fn family(&self) -> CodebookFamily {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of rows.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, index: usize) -> Result<&[f64]> {
        let len = self.len();
        if index >= len {
            return Err(Error::IndexOutOfRange { index, len });
        }
        Ok(&self.data[index * self.dim..(index + 1) * self.dim])
    }

    pub fn row_vector(&self, index: usize) -> Result<HyperVector> {
        Ok(HyperVector::from_trusted(self.row(index)?.to_vec()))
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// Row-major entries.
    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Entry at (row, column); panics when out of range.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        assert!(col < self.dim);
        self.data[row * self.dim + col]
    }
}

fn square_buffer(k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    if k > MAX_MATERIALIZE_K {
        return Err(Error::TooLarge {
            k,
            max: MAX_MATERIALIZE_K,
        });
    }
    let entries = 1usize << (2 * k);
    let mut data = Vec::new();
    data.try_reserve_exact(entries)
        .map_err(|_| Error::Allocation {
            bytes: entries * std::mem::size_of::<f64>(),
        })?;
    data.resize(entries, 0.0);
    Ok(data)
}

/// Grows the `m x m` block in the top-left corner of an `n x n` row-major
/// buffer into the `2m x 2m` block
/// `[[A * a, A * b], [A * b, A * d]]`.
fn expand_block(data: &mut [f64], n: usize, m: usize, a: f64, b: f64, d: f64) {
    for r in 0..m {
        let (top, bottom) = data.split_at_mut((r + m) * n);
        let src = &mut top[r * n..r * n + 2 * m];
        let dst = &mut bottom[..2 * m];
        for c in 0..m {
            let x = src[c];
            src[m + c] = x * b;
            dst[c] = x * b;
            dst[m + c] = x * d;
            src[c] = x * a;
        }
    }
}

/// The full krop matrix, built by the block recursion
/// `H(k+1) = [[H(k) c_k, H(k) s_k], [H(k) s_k, -H(k) c_k]]`.
///
/// Intended for tests and dense baselines; `K` is capped at
/// [`MAX_MATERIALIZE_K`].
pub fn krop_materialize(params: &KropParams) -> Result<ExplicitCodebook> {
    let k = params.k();
    let mut data = square_buffer(k)?;
    let n = 1 << k;
    data[0] = 1.0;
    for level in 0..k {
        let (c, s) = (params.cos[level], params.sin[level]);
        expand_block(&mut data, n, 1 << level, c, s, -c);
    }
    Ok(ExplicitCodebook {
        family: CodebookFamily::KropMaterialized,
        dim: n,
        data,
    })
}

/// Rows of the Sylvester Hadamard matrix `H(K)`, scaled to unit norm.
pub fn sylvester_codebook(k: usize) -> Result<ExplicitCodebook> {
    let mut data = square_buffer(k)?;
    let n = 1 << k;
    data[0] = 1.0;
    for level in 0..k {
        expand_block(&mut data, n, 1 << level, 1.0, 1.0, -1.0);
    }
    let scale = 1.0 / (n as f64).sqrt();
    data.iter_mut().for_each(|x| *x *= scale);
    Ok(ExplicitCodebook {
        family: CodebookFamily::Sylvester,
        dim: n,
        data,
    })
}

fn sampled(dim: usize, count: usize, mut entry: impl FnMut() -> f64) -> Result<Vec<f64>> {
    check_dim(dim)?;
    if count == 0 {
        return Err(Error::InvalidParameter(
            "codebook needs at least one row".into(),
        ));
    }
    let entries = dim
        .checked_mul(count)
        .ok_or(Error::Allocation { bytes: usize::MAX })?;
    let mut data = Vec::new();
    data.try_reserve_exact(entries)
        .map_err(|_| Error::Allocation {
            bytes: entries.saturating_mul(8),
        })?;
    data.extend((0..entries).map(|_| entry()));
    Ok(data)
}

/// `count` rows with i.i.d. `N(0, 1/dim)` entries, filled row-major.
pub fn sample_normal_codebook(
    dim: usize,
    count: usize,
    rng: &mut SeededRng,
) -> Result<ExplicitCodebook> {
    let std_dev = (1.0 / dim as f64).sqrt();
    let data = sampled(dim, count, || rng.normal(std_dev))?;
    Ok(ExplicitCodebook {
        family: CodebookFamily::Normal,
        dim,
        data,
    })
}

/// `count` rows with entries `+1/sqrt(dim)` or `-1/sqrt(dim)`, equiprobable.
pub fn sample_binary_codebook(
    dim: usize,
    count: usize,
    rng: &mut SeededRng,
) -> Result<ExplicitCodebook> {
    let mag = 1.0 / (dim as f64).sqrt();
    let data = sampled(dim, count, || if rng.coin() { mag } else { -mag })?;
    Ok(ExplicitCodebook {
        family: CodebookFamily::Binary,
        dim,
        data,
    })
}

#[derive(Serialize, Deserialize)]
struct ParamsFile {
    #[serde(rename = "K")]
    k: i64,
    thetas: Vec<f64>,
    scheme: String,
    seed: Option<u64>,
}

const CUSTOM_SCHEME: &str = "custom";

/// Writes params as JSON. Angles are written in shortest round-trip decimal
/// form, so loading reproduces them bit for bit.
pub fn save_params(params: &KropParams, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, params_to_json(params)).map_err(|e| Error::io(path, e))
}

/// The text [`save_params`] writes.
pub fn params_to_json(params: &KropParams) -> String {
    let file = ParamsFile {
        k: params.k() as i64,
        thetas: params.thetas.clone(),
        scheme: params
            .scheme
            .map_or(CUSTOM_SCHEME, ThetaScheme::as_str)
            .to_string(),
        seed: params.seed,
    };
    let mut text = serde_json::to_string_pretty(&file).expect("params serialize");
    text.push('\n');
    text
}

pub fn load_params(path: impl AsRef<Path>) -> Result<KropParams> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let malformed = |message: String| Error::Malformed {
        path: path.to_path_buf(),
        message,
    };
    let file: ParamsFile = serde_json::from_str(&text).map_err(|e| malformed(e.to_string()))?;
    if file.k < 1 {
        return Err(Error::InvalidParameter(format!(
            "K = {} must be at least 1",
            file.k
        )));
    }
    if file.k as usize != file.thetas.len() {
        return Err(malformed(format!(
            "K = {} but {} angles given",
            file.k,
            file.thetas.len()
        )));
    }
    let scheme = match file.scheme.as_str() {
        CUSTOM_SCHEME => None,
        s => Some(s.parse()?),
    };
    KropParams::with_provenance(file.thetas, scheme, file.seed)
}
