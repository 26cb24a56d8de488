//! Discrete Fourier transforms at arbitrary (prime) lengths, plus cyclic
//! convolution.
//!
//! Everything downstream is phrased in terms of the positive-sign,
//! unnormalized transform
//!
//! ```text
//! F+[k] = sum_n x[n] e^{+2 pi i n k / N},
//! ```
//!
//! which evaluates a complete exponential sum at every parameter a = k
//! simultaneously. Prime lengths go through a Bluestein (chirp-z) embedding
//! into a power-of-two convolution; below [`NAIVE_THRESHOLD`] a quadratic
//! loop is cheaper than the embedding and doubles as the oracle
//! implementation for the transform tests.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::par;

/// Below this length the O(N^2) loop outruns Bluestein setup.
pub const NAIVE_THRESHOLD: usize = 4096;

/// Positive-sign unnormalized DFT; dispatches on length.
pub fn dft_pos(x: &[Complex64]) -> Vec<Complex64> {
    if x.len() < NAIVE_THRESHOLD {
        dft_pos_naive(x)
    } else {
        let mut buf = x.to_vec();
        FftPlanner::new()
            .plan_fft_inverse(x.len())
            .process(&mut buf);
        buf
    }
}

/// Negative-sign unnormalized DFT.
pub fn dft_neg(x: &[Complex64]) -> Vec<Complex64> {
    if x.len() < NAIVE_THRESHOLD {
        dft_neg_naive(x)
    } else {
        let mut buf = x.to_vec();
        FftPlanner::new()
            .plan_fft_forward(x.len())
            .process(&mut buf);
        buf
    }
}

/// Quadratic-time positive-sign DFT. Oracle for the transform tests and the
/// production path at small N; parallel over output bins.
pub fn dft_pos_naive(x: &[Complex64]) -> Vec<Complex64> {
    dft_naive_impl(x, 1.0)
}

pub fn dft_neg_naive(x: &[Complex64]) -> Vec<Complex64> {
    dft_naive_impl(x, -1.0)
}

fn dft_naive_impl(x: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    // one table of e^{sign 2 pi i t / N}; index n*k reduced mod N stays exact
    let step = sign * std::f64::consts::TAU / n as f64;
    let table: Vec<Complex64> = (0..n)
        .map(|t| {
            let (s, c) = (step * t as f64).sin_cos();
            Complex64::new(c, s)
        })
        .collect();
    par::map_indexed(n, |k| {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut idx = 0usize;
        for &v in x.iter() {
            acc += v * table[idx];
            idx += k;
            if idx >= n {
                idx -= n;
            }
        }
        acc
    })
}

/// Cyclic convolution `(a (*) b)[m] = sum_n a[n] b[(m - n) mod N]`.
///
/// Computed as F-(F+(a) . F+(b)) / N, so it inherits the fast path of the
/// transforms above.
pub fn cyclic_convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(a.len(), b.len(), "cyclic convolution needs equal lengths");
    let n = a.len();
    let fa = dft_pos(a);
    let fb = dft_pos(b);
    let prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    let mut out = dft_neg(&prod);
    let scale = 1.0 / n as f64;
    for v in out.iter_mut() {
        *v *= scale;
    }
    out
}
