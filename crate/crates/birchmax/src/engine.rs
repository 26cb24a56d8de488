//! Complete-sum tables, checkpointed partial sums, max profiles, empirical
//! distributions, and the Fourier-cutoff machinery connecting them.
//!
//! Conventions fixed here once and used everywhere:
//!
//! * Partial sums are (1/sqrt p) sum_{0 <= n <= x} e_p(phase(a, n)) for
//!   integer cutoffs x in [0, p-1]; Kloosterman terms start at n = 1.
//! * The max profile takes the maximum of |partial sum| over x = 0..p-1.
//! * Checkpoint cutoffs are x_0 = 1, x_l = round(l p / L), x_L = p, with the
//!   effective summation range capped at n <= p-1, so row L is exactly the
//!   complete-sum row.
//! * gamma_coefficient(h; x) carries the 1/sqrt(p) normalization of the
//!   general Plancherel expansion. The half-interval coefficients gamma_half
//!   carry an extra 1/sqrt(p) (total 1/p), matching the normalization under
//!   which gamma_half(0) = 1/2 + 1/(2p); the bridge is exactly
//!   gamma_half(h) = gamma_coefficient(h, (p-1)/2) / sqrt(p).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dft;
use crate::error::{Error, Result};
use crate::field::{FieldContext, TraceFamily};
use crate::par;

/// Resource guards for table builders. The defaults fit desk-scale runs;
/// callers with more memory raise them explicitly.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    /// Largest p for the O(p^2) exact max profile.
    pub exact_profile_max_p: u64,
    /// Largest p for a complete-sum table (O(p) complex values).
    pub max_table_p: u64,
    /// Largest (L+1) * p for a checkpoint matrix.
    pub max_matrix_cells: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            exact_profile_max_p: 10_000,
            max_table_p: 1 << 24,
            max_matrix_cells: 1 << 26,
        }
    }
}

/// All complete sums at one prime: values[a] = (1/sqrt p) Re sum_n e_p(phase(a, n)).
///
/// The pre-projection complex sums are kept alongside the real values; the
/// Plancherel reconstruction and the cached binary format need them, and the
/// imaginary residue is the standard health diagnostic (reality follows from
/// the n <-> -n pairing, so a large residue means a broken transform).
#[derive(Debug, Clone)]
pub struct CompleteSumTable {
    pub family: TraceFamily,
    pub p: u64,
    pub values: Vec<f64>,
    pub complex: Vec<Complex64>,
    pub max_imag: f64,
}

/// Normalized partial sums at the checkpoint cutoffs, all residues at once.
#[derive(Debug, Clone)]
pub struct CheckpointMatrix {
    pub family: TraceFamily,
    pub p: u64,
    pub l: u32,
    /// x_0 = 1, x_l = round(l p / L) for 0 < l < L, x_L = p.
    pub cutoffs: Vec<u64>,
    /// rows[l][a], l = 0..=L.
    pub rows: Vec<Vec<Complex64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileMode {
    Exact,
    Checkpointed { l: u32 },
}

/// M[a] = max over the scanned cutoffs of |partial sum|.
#[derive(Debug, Clone)]
pub struct MaxProfile {
    pub family: TraceFamily,
    pub p: u64,
    pub mode: ProfileMode,
    pub m: Vec<f64>,
}

/// Sorted sample set evaluated as a complementary CDF (fraction strictly
/// above a threshold).
#[derive(Debug, Clone)]
pub struct EmpiricalCCDF {
    sorted: Vec<f64>,
}

/// Least-squares fit of log(-log ccdf) against the threshold.
#[derive(Debug, Clone, Copy)]
pub struct LoglogFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

impl EmpiricalCCDF {
    pub fn new(mut samples: Vec<f64>) -> Self {
        assert!(!samples.is_empty(), "empty sample set");
        assert!(samples.iter().all(|v| v.is_finite()), "non-finite sample");
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        EmpiricalCCDF { sorted: samples }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        *self.sorted.last().unwrap()
    }

    pub fn median(&self) -> f64 {
        self.sorted[(self.sorted.len() - 1) / 2]
    }

    /// Fraction of samples strictly above v.
    pub fn eval(&self, v: f64) -> f64 {
        let above = self.sorted.len() - self.sorted.partition_point(|&s| s <= v);
        above as f64 / self.sorted.len() as f64
    }

    /// Slope of log(-log ccdf) vs threshold over the ccdf window
    /// [lo_q, hi_q]: thresholds are 25 uniform points between the empirical
    /// (1-hi_q)- and (1-lo_q)-quantiles, points outside the window dropped.
    /// None when fewer than 3 points survive.
    pub fn loglog_slope(&self, lo_q: f64, hi_q: f64) -> Option<LoglogFit> {
        let n = self.sorted.len();
        let v_lo = self.sorted[(n as f64 * (1.0 - hi_q)) as usize];
        let idx_hi = (n as f64 * (1.0 - lo_q)) as usize;
        let v_hi = self.sorted[idx_hi.saturating_sub(1)];
        if !(v_hi > v_lo) {
            return None;
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..25 {
            let v = v_lo + (v_hi - v_lo) * i as f64 / 24.0;
            let c = self.eval(v);
            if c >= lo_q && c <= hi_q {
                xs.push(v);
                ys.push((-c.ln()).ln());
            }
        }
        if xs.len() < 3 {
            return None;
        }
        let k = xs.len() as f64;
        let sx: f64 = xs.iter().sum();
        let sy: f64 = ys.iter().sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
        let denom = k * sxx - sx * sx;
        if denom == 0.0 {
            return None;
        }
        let slope = (k * sxy - sx * sy) / denom;
        let intercept = (sy - slope * sx) / k;
        Some(LoglogFit {
            slope,
            intercept,
            points: xs.len(),
        })
    }
}

/// (1/sqrt p) DFT of the weight vector truncated to n <= cutoff.
fn truncated_row(ctx: &FieldContext, weights: &[Complex64], cutoff: u64) -> Vec<Complex64> {
    let p = ctx.p();
    let effective = cutoff.min(p - 1) as usize;
    let mut w = vec![Complex64::new(0.0, 0.0); p as usize];
    w[..=effective].copy_from_slice(&weights[..=effective]);
    let scale = 1.0 / ctx.sqrt_p();
    let mut row = dft::dft_pos(&w);
    for v in row.iter_mut() {
        *v *= scale;
    }
    row
}

pub fn complete_sums(family: &TraceFamily, ctx: &FieldContext) -> Result<CompleteSumTable> {
    complete_sums_limited(family, ctx, &Limits::default())
}

pub fn complete_sums_limited(
    family: &TraceFamily,
    ctx: &FieldContext,
    limits: &Limits,
) -> Result<CompleteSumTable> {
    let p = ctx.p();
    if p > limits.max_table_p {
        return Err(Error::ResourceLimit(format!(
            "complete-sum table at p = {p} needs about {} MB, above the configured cap (max_table_p = {})",
            p * 16 / (1 << 20),
            limits.max_table_p
        )));
    }
    let weights = ctx.weight_vector(family);
    let complex = truncated_row(ctx, &weights, p - 1);
    let values: Vec<f64> = complex.iter().map(|z| z.re).collect();
    let max_imag = complex.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(CompleteSumTable {
        family: family.clone(),
        p,
        values,
        complex,
        max_imag,
    })
}

/// Paper-mirroring default: L = max(8, round(p^{1/8})).
pub fn default_checkpoint_count(p: u64) -> u32 {
    let l = (p as f64).powf(0.125).round() as u32;
    l.max(8)
}

pub fn checkpoint_matrix(family: &TraceFamily, ctx: &FieldContext, l: u32) -> Result<CheckpointMatrix> {
    checkpoint_matrix_limited(family, ctx, l, &Limits::default())
}

pub fn checkpoint_matrix_limited(
    family: &TraceFamily,
    ctx: &FieldContext,
    l: u32,
    limits: &Limits,
) -> Result<CheckpointMatrix> {
    let p = ctx.p();
    if l < 2 || l as u64 > p {
        return Err(Error::InvalidParam(format!(
            "checkpoint count L = {l} outside 2..=p (p = {p})"
        )));
    }
    let cells = (l as u64 + 1) * p;
    if cells > limits.max_matrix_cells {
        return Err(Error::ResourceLimit(format!(
            "checkpoint matrix needs {cells} cells, above the configured cap (max_matrix_cells = {})",
            limits.max_matrix_cells
        )));
    }
    let cutoffs = checkpoint_cutoffs(p, l);
    let weights = ctx.weight_vector(family);
    let rows = par::map_indexed(l as usize + 1, |i| truncated_row(ctx, &weights, cutoffs[i]));
    Ok(CheckpointMatrix {
        family: family.clone(),
        p,
        l,
        cutoffs,
        rows,
    })
}

pub fn checkpoint_cutoffs(p: u64, l: u32) -> Vec<u64> {
    let l64 = l as u64;
    (0..=l64)
        .map(|step| {
            if step == 0 {
                1
            } else if step == l64 {
                p
            } else {
                // round(step * p / L), half away from zero
                (2 * step * p + l64) / (2 * l64)
            }
        })
        .collect()
}

/// Direct O(x) partial sum; the oracle for every transform-based row.
pub fn partial_sum(family: &TraceFamily, ctx: &FieldContext, a: u64, x: u64) -> Result<Complex64> {
    let p = ctx.p();
    if x >= p {
        return Err(Error::Domain(format!("cutoff x = {x} outside 0..p (p = {p})")));
    }
    let start = if family.includes_zero() { 0 } else { 1 };
    let mut acc = Complex64::new(0.0, 0.0);
    for n in start..=x {
        acc += ctx.unity(ctx.eval_phase(family, a, n)?);
    }
    Ok(acc / ctx.sqrt_p())
}

pub fn max_profile_exact(family: &TraceFamily, ctx: &FieldContext) -> Result<MaxProfile> {
    max_profile_exact_limited(family, ctx, &Limits::default())
}

/// Exact max profile: for every a, the running partial sums over all cutoffs
/// x = 0..p-1. O(p^2), guarded by `exact_profile_max_p`.
pub fn max_profile_exact_limited(
    family: &TraceFamily,
    ctx: &FieldContext,
    limits: &Limits,
) -> Result<MaxProfile> {
    let p = ctx.p();
    if p > limits.exact_profile_max_p {
        return Err(Error::ResourceLimit(format!(
            "exact profile is O(p^2); p = {p} is above the cap {} (use the checkpointed mode)",
            limits.exact_profile_max_p
        )));
    }
    // base phase (a-independent part), cubes / inverses / f(n)
    let base: Vec<u64> = match family {
        TraceFamily::Kloosterman => ctx.inverse_table(),
        _ => (0..p)
            .map(|n| ctx.eval_phase(family, 0, n).expect("total phase"))
            .collect(),
    };
    let start = if family.includes_zero() { 0 } else { 1 };
    let inv_sqrt_p = 1.0 / ctx.sqrt_p();
    let m = par::map_indexed(p as usize, |a| {
        let a = a as u64;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut best_sq = 0.0f64;
        let mut an = 0u64; // a*n mod p, updated incrementally
        for n in 0..p {
            if n >= start {
                let mut t = base[n as usize] + an;
                if t >= p {
                    t -= p;
                }
                acc += ctx.unity(t);
            }
            best_sq = best_sq.max(acc.norm_sqr());
            an += a;
            if an >= p {
                an -= p;
            }
        }
        best_sq.sqrt() * inv_sqrt_p
    });
    Ok(MaxProfile {
        family: family.clone(),
        p,
        mode: ProfileMode::Exact,
        m,
    })
}

/// Max over the checkpoint rows; a pointwise lower bound for the exact profile.
pub fn max_profile_checkpointed(matrix: &CheckpointMatrix) -> MaxProfile {
    let p = matrix.p as usize;
    let m = par::map_indexed(p, |a| {
        matrix
            .rows
            .iter()
            .map(|row| row[a].norm())
            .fold(0.0, f64::max)
    });
    MaxProfile {
        family: matrix.family.clone(),
        p: matrix.p,
        mode: ProfileMode::Checkpointed { l: matrix.l },
        m,
    }
}

/// Pointwise exact-minus-checkpointed gap summary.
#[derive(Debug, Clone, Copy)]
pub struct GapReport {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

pub fn profile_gap(exact: &MaxProfile, checkpointed: &MaxProfile) -> GapReport {
    assert_eq!(exact.p, checkpointed.p, "profiles at different primes");
    let mut sum = 0.0;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for (e, c) in exact.m.iter().zip(&checkpointed.m) {
        let gap = e - c;
        sum += gap;
        min = min.min(gap);
        max = max.max(gap);
    }
    GapReport {
        mean: sum / exact.m.len() as f64,
        min,
        max,
    }
}

/// Empirical tail distribution of the profile over a in F_p^x (a = 0 dropped).
pub fn phi_distribution(profile: &MaxProfile) -> EmpiricalCCDF {
    EmpiricalCCDF::new(profile.m[1..].to_vec())
}

/// gamma_p(h; x) = (1/sqrt p) sum_{0 <= m <= x} e_p(m h), exact geometric form.
///
/// Requires |h| < p/2 and x in [0, p-1].
pub fn gamma_coefficient(ctx: &FieldContext, h: i64, x: u64) -> Complex64 {
    let p = ctx.p();
    assert!((h.unsigned_abs()) < p.div_ceil(2), "|h| below p/2 required");
    assert!(x < p, "cutoff x below p required");
    let sqrt_p = ctx.sqrt_p();
    if h == 0 {
        return Complex64::new((x + 1) as f64 / sqrt_p, 0.0);
    }
    let v = h.rem_euclid(p as i64) as u64;
    let u = ((x + 1) % p) * v % p;
    // e_p(t) - 1 = 2 i sin(pi t / p) e^{i pi t / p}; the ratio below is the
    // closed geometric sum with both halves in that cancellation-free form.
    // sin(pi k/p) is evaluated at min(k, p-k), where the argument stays in
    // [0, pi/2]: full relative accuracy, and the h <-> -h conjugation
    // symmetry holds bit for bit.
    let pi_over_p = std::f64::consts::PI / p as f64;
    let sin_frac = |k: u64| (pi_over_p * k.min(p - k) as f64).sin();
    let mag = sin_frac(u) / sin_frac(v);
    let phase = pi_over_p * (u as f64 - v as f64);
    Complex64::from_polar(mag / sqrt_p, phase)
}

/// Half-interval coefficient gamma_half(h) = gamma_p(h; (p-1)/2) / sqrt(p),
/// the 1/p-normalized quantity with gamma_half(0) = 1/2 + 1/(2p).
pub fn gamma_half(ctx: &FieldContext, h: i64) -> Complex64 {
    gamma_coefficient(ctx, h, (ctx.p() - 1) / 2) / ctx.sqrt_p()
}

pub fn gamma_half_im(ctx: &FieldContext, h: i64) -> f64 {
    gamma_half(ctx, h).im
}

/// Plancherel reconstruction of a partial sum from the complete-sum table:
/// (1/sqrt p) sum_{|h| < p/2} gamma_p(h; x) T(a - h). Exact identity, so any
/// deviation beyond float error is a bug in either side.
pub fn plancherel_reconstruct(
    ctx: &FieldContext,
    table: &CompleteSumTable,
    a: u64,
    x: u64,
) -> Result<Complex64> {
    let p = ctx.p();
    if x >= p {
        return Err(Error::Domain(format!("cutoff x = {x} outside 0..p (p = {p})")));
    }
    let half = ((p - 1) / 2) as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for h in -half..=half {
        let idx = (a as i64 - h).rem_euclid(p as i64) as usize;
        acc += gamma_coefficient(ctx, h, x) * table.complex[idx];
    }
    Ok(acc / ctx.sqrt_p())
}

/// Half-interval partial sums (cutoff (p-1)/2) for every a, via one
/// truncated transform.
pub fn half_sums(family: &TraceFamily, ctx: &FieldContext) -> Result<Vec<Complex64>> {
    let p = ctx.p();
    if p <= 7 {
        return Err(Error::Domain(format!(
            "half-sum statistics need p > 7, got {p}"
        )));
    }
    let weights = ctx.weight_vector(family);
    Ok(truncated_row(ctx, &weights, (p - 1) / 2))
}

/// Imaginary parts of the half-interval partial sums for every a.
pub fn imag_half_sums(family: &TraceFamily, ctx: &FieldContext) -> Result<Vec<f64>> {
    Ok(half_sums(family, ctx)?.iter().map(|z| z.im).collect())
}

/// Max deviation, over the sampled residues, between the transform-computed
/// imaginary half sums and the gamma-weighted convolution of the (real)
/// complete sums. The two routes are mathematically identical.
pub fn half_sum_identity_gap(
    ctx: &FieldContext,
    table: &CompleteSumTable,
    im_half: &[f64],
    sample_count: usize,
    seed: u64,
) -> f64 {
    let p = ctx.p();
    let half = ((p - 1) / 2) as i64;
    let gammas: Vec<f64> = (-half..=half).map(|h| gamma_half_im(ctx, h)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..sample_count {
        let a = rng.gen_range(0..p) as i64;
        let mut acc = 0.0;
        for (j, h) in (-half..=half).enumerate() {
            let idx = (a - h).rem_euclid(p as i64) as usize;
            acc += gammas[j] * table.values[idx];
        }
        worst = worst.max((acc - im_half[a as usize]).abs());
    }
    worst
}

/// Tail distribution of the signed imaginary half sums over F_p^x.
pub fn nu_distribution(im_half: &[f64]) -> EmpiricalCCDF {
    EmpiricalCCDF::new(im_half[1..].to_vec())
}

#[derive(Debug, Clone)]
pub struct ShortScanReport {
    pub family: TraceFamily,
    pub p: u64,
    pub interval_length: u64,
    pub samples: u32,
    /// |sum over the interval| / reference envelope, worst case and mean.
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub max_abs_sum: f64,
}

/// Samples random (a, interval) pairs and reports the unnormalized interval
/// sums against the square-root-cancellation envelope: |I|^{0.30} p^{1/4}
/// for polynomial phases (Weyl regime, epsilon = 0.05), |I|^{0.95} for
/// Kloosterman (conjectural, report-only).
pub fn short_interval_scan(
    family: &TraceFamily,
    ctx: &FieldContext,
    interval_length: u64,
    samples: u32,
    seed: u64,
) -> Result<ShortScanReport> {
    let p = ctx.p();
    if interval_length == 0 || interval_length > p - 1 {
        return Err(Error::InvalidParam(format!(
            "interval length {interval_length} outside 1..p"
        )));
    }
    let envelope = match family {
        TraceFamily::Kloosterman => (interval_length as f64).powf(0.95),
        _ => (interval_length as f64).powf(0.30) * (p as f64).powf(0.25),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio = 0.0f64;
    let mut sum_ratio = 0.0f64;
    let mut max_abs = 0.0f64;
    for _ in 0..samples {
        let a = rng.gen_range(0..p);
        let start = rng.gen_range(1..=p - interval_length);
        let mut acc = Complex64::new(0.0, 0.0);
        for n in start..start + interval_length {
            acc += ctx.unity(ctx.eval_phase(family, a, n)?);
        }
        let modulus = acc.norm();
        max_abs = max_abs.max(modulus);
        let ratio = modulus / envelope;
        max_ratio = max_ratio.max(ratio);
        sum_ratio += ratio;
    }
    Ok(ShortScanReport {
        family: family.clone(),
        p,
        interval_length,
        samples,
        max_ratio,
        mean_ratio: sum_ratio / samples as f64,
        max_abs_sum: max_abs,
    })
}
