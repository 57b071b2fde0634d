//! Reference implementations used as oracles. Each one follows the
//! textbook definition directly and shares no code with the library.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// i.i.d. entries uniform on `[-1, 1)`.
pub fn uniform_vec(rng: &mut ChaCha20Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// `c[i] = sum_j a[j] * b[(i - j) mod n]`.
pub fn naive_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| a[j] * b[(i + n - j) % n]).sum())
        .collect()
}

/// `c[i] = sum_j a[j] * t[(i + j) mod n]`.
pub fn naive_correlate(a: &[f64], t: &[f64]) -> Vec<f64> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| a[j] * t[(i + j) % n]).sum())
        .collect()
}

/// Dense Kronecker product of square row-major matrices.
pub fn kron(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (na, nb) = (a.len(), b.len());
    let mut out = vec![vec![0.0; na * nb]; na * nb];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = a[i / nb][j / nb] * b[i % nb][j % nb];
        }
    }
    out
}

/// `F(theta_{K-1}) (x) ... (x) F(theta_0)` with `F = [[c, s], [s, -c]]`.
pub fn kron_matrix(thetas: &[f64]) -> Vec<Vec<f64>> {
    let mut h = vec![vec![1.0]];
    for &t in thetas {
        let f = vec![vec![t.cos(), t.sin()], vec![t.sin(), -t.cos()]];
        h = kron(&f, &h);
    }
    h
}

/// Unnormalized Sylvester Hadamard matrix by `H <- [[H, H], [H, -H]]`.
pub fn hadamard(k: usize) -> Vec<Vec<f64>> {
    let mut h = vec![vec![1.0]];
    for _ in 0..k {
        let n = h.len();
        let mut next = vec![vec![0.0; 2 * n]; 2 * n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = h[i][j];
                next[i][j + n] = h[i][j];
                next[i + n][j] = h[i][j];
                next[i + n][j + n] = -h[i][j];
            }
        }
        h = next;
    }
    h
}

pub fn matvec(h: &[Vec<f64>], u: &[f64]) -> Vec<f64> {
    h.iter()
        .map(|row| row.iter().zip(u).map(|(a, b)| a * b).sum())
        .collect()
}

/// First index of the maximum.
pub fn first_argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Log-log least-squares slope of `ys` against `xs`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}
