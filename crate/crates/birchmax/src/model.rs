//! The independent Sato-Tate random model: sampling, closed-form moments and
//! MGF, the truncated random Fourier series M, model-side Laplace transforms,
//! and the exact mixed-moment oracle.
//!
//! M(alpha) = alpha X(0) + sum_{0 < |h| <= H} ((e(alpha h) - 1)/(2 pi i h)) X(h)
//! with all X(h) independent Sato-Tate draws; the simulated statistic is
//! sup_{alpha in [0,1)} |M(alpha)|.

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::dft;
use crate::engine::EmpiricalCCDF;
use crate::error::{Error, Result};
use crate::par;
use crate::quad;

// ---------------------------------------------------------------------------
// Sato-Tate law: density (1/(2 pi)) sqrt(4 - x^2) on [-2, 2]

/// CDF of the Sato-Tate law, derived by the theta substitution x = 2 cos
/// theta: F(x) = 1 - arccos(x/2)/pi + x sqrt(4 - x^2) / (4 pi).
pub fn st_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        return 0.0;
    }
    if x >= 2.0 {
        return 1.0;
    }
    1.0 - (x / 2.0).acos() / PI + x * (4.0 - x * x).sqrt() / (4.0 * PI)
}

/// theta-CDF G(t) = (t - sin t cos t)/pi for theta in [0, pi]; X = 2 cos theta.
fn theta_cdf(t: f64) -> f64 {
    (t - t.sin() * t.cos()) / PI
}

/// 1025-entry quantile table for Newton starting points.
static THETA_TABLE: Lazy<Vec<f64>> = Lazy::new(|| {
    (0..=1024)
        .map(|i| theta_cdf(PI * i as f64 / 1024.0))
        .collect()
});

/// Inverts G(theta) = u by bracketed Newton; the derivative is
/// G'(theta) = 2 sin^2(theta) / pi.
fn theta_quantile(u: f64) -> f64 {
    let table = &THETA_TABLE;
    let j = table.partition_point(|&g| g <= u).clamp(1, 1024);
    let mut lo = PI * (j - 1) as f64 / 1024.0;
    let mut hi = PI * j as f64 / 1024.0;
    let (glo, ghi) = (table[j - 1], table[j]);
    let mut t = if ghi > glo {
        lo + (hi - lo) * (u - glo) / (ghi - glo)
    } else {
        0.5 * (lo + hi)
    };
    for _ in 0..64 {
        let g = theta_cdf(t) - u;
        if g.abs() < 1e-15 {
            break;
        }
        if g > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let s = t.sin();
        let deriv = 2.0 * s * s / PI;
        let step = g / deriv;
        let next = t - step;
        t = if deriv < 1e-18 || next <= lo || next >= hi {
            0.5 * (lo + hi)
        } else {
            next
        };
    }
    t
}

pub fn st_sample_inverse(rng: &mut ChaCha8Rng) -> f64 {
    2.0 * theta_quantile(rng.gen::<f64>()).cos()
}

/// Rejection from the uniform envelope on [-2, 2]; acceptance rate pi/4.
/// Variable uniform consumption, so this is the cross-check method only.
pub fn st_sample_rejection(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let x = -2.0 + 4.0 * rng.gen::<f64>();
        if rng.gen::<f64>() <= (4.0 - x * x).sqrt() / 2.0 {
            return x;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMethod {
    InverseCdf,
    Rejection,
}

/// Seeded Sato-Tate stream with the method recorded. Inverse-CDF is the
/// default everywhere reproducibility matters: it consumes exactly one
/// uniform per sample.
#[derive(Debug, Clone)]
pub struct SatoTateSampler {
    rng: ChaCha8Rng,
    pub method: SampleMethod,
}

impl SatoTateSampler {
    pub fn new(seed: u64, method: SampleMethod) -> Self {
        SatoTateSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            method,
        }
    }

    pub fn sample(&mut self) -> f64 {
        match self.method {
            SampleMethod::InverseCdf => st_sample_inverse(&mut self.rng),
            SampleMethod::Rejection => st_sample_rejection(&mut self.rng),
        }
    }
}

/// E[X^l]: the Catalan number C_n for l = 2n, zero for odd l. Exact integer
/// arithmetic; C_n fits u128 far beyond the l <= 12 the oracle needs.
pub fn st_moment(l: u32) -> f64 {
    if l % 2 == 1 {
        return 0.0;
    }
    let n = (l / 2) as u128;
    let mut binom: u128 = 1;
    for i in 0..n {
        binom = binom * (2 * n - i) / (i + 1);
    }
    (binom / (n + 1)) as f64
}

/// st_mgf(t) - 1 = sum_{n >= 1} t^{2n} / (n! (n+1)!), kept separate so the
/// log of the MGF stays accurate near t = 0.
pub fn st_mgf_m1(t: f64) -> f64 {
    let t2 = t * t;
    let mut term = 1.0f64;
    let mut acc = 0.0f64;
    for n in 1..400 {
        term *= t2 / ((n * (n + 1)) as f64);
        let next = acc + term;
        if next == acc && n > 2 {
            break;
        }
        acc = next;
    }
    acc
}

/// E[e^{tX}] = I_1(2t)/t (1 at t = 0), by the absolutely convergent series.
/// Overflows to infinity a little past |t| = 350.
pub fn st_mgf(t: f64) -> f64 {
    1.0 + st_mgf_m1(t)
}

pub fn log_st_mgf(t: f64) -> f64 {
    st_mgf_m1(t).ln_1p()
}

/// Independent quadrature route for the MGF: the theta substitution turns
/// the semicircle integral into the smooth (2/pi) int_0^pi e^{2t cos u}
/// sin^2 u du, which composite Gauss panels nail geometrically.
pub fn st_mgf_quadrature(t: f64) -> Result<f64> {
    let f = |u: f64| (2.0 * t * u.cos()).exp() * u.sin() * u.sin();
    let mut prev = f64::NAN;
    let mut panels = 8;
    while panels <= 4096 {
        let v = 2.0 / PI * quad::composite_gl16(&f, 0.0, PI, panels);
        if (v - prev).abs() <= 1e-12 * v.abs().max(1.0) {
            return Ok(v);
        }
        prev = v;
        panels *= 2;
    }
    Err(Error::Quadrature(format!(
        "MGF quadrature did not stabilize at t = {t}, last value {prev}"
    )))
}

/// The rate function driving the analytic constants: log E e^{tX} below
/// t = 1, log E e^{tX} - 2t from t = 1 on. The jump at t = 1 is part of the
/// definition, not a bug.
pub fn f_of_t(t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::Domain(format!("f(t) needs t >= 0, got {t}")));
    }
    let base = log_st_mgf(t);
    Ok(if t < 1.0 { base } else { base - 2.0 * t })
}

// ---------------------------------------------------------------------------
// The random series M

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelConfig {
    /// Series truncation: |h| <= H.
    pub h: u32,
    /// Equispaced alpha-grid size before refinement.
    pub alpha_grid: u32,
    pub trials: u32,
    pub seed: u64,
}

impl ModelConfig {
    /// Grid height that keeps the per-cell refinement brackets narrow and the
    /// transform length a power of two.
    pub fn default_alpha_grid(h: u32) -> u32 {
        (4 * h).next_power_of_two().max(4096)
    }

    pub fn new(h: u32, trials: u32, seed: u64) -> Self {
        ModelConfig {
            h,
            alpha_grid: Self::default_alpha_grid(h),
            trials,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.h < 1 {
            return Err(Error::InvalidParam("H >= 1 required".into()));
        }
        if self.alpha_grid < 4 {
            return Err(Error::InvalidParam("alpha_grid >= 4 required".into()));
        }
        if self.trials < 1 {
            return Err(Error::InvalidParam("trials >= 1 required".into()));
        }
        Ok(())
    }

    /// First-order bound on the sup-vs-grid error before refinement:
    /// derivative bound 2 pi (2H+1) * 2 over one grid spacing.
    pub fn grid_error_bound(&self) -> f64 {
        4.0 * PI * (2 * self.h + 1) as f64 / self.alpha_grid as f64
    }
}

/// One trial's draws: X(0), then X(h), X(-h) for h = 1..=H in that order.
/// The order is part of the reproducibility contract.
#[derive(Debug, Clone)]
pub struct TrialDraw {
    pub x0: f64,
    pub pos: Vec<f64>,
    pub neg: Vec<f64>,
}

pub fn draw_trial(config: &ModelConfig, trial: u32) -> TrialDraw {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(trial as u64 + 1);
    let x0 = st_sample_inverse(&mut rng);
    let h = config.h as usize;
    let mut pos = Vec::with_capacity(h);
    let mut neg = Vec::with_capacity(h);
    for _ in 0..h {
        pos.push(st_sample_inverse(&mut rng));
        neg.push(st_sample_inverse(&mut rng));
    }
    TrialDraw { x0, pos, neg }
}

/// Truncated series at one alpha, by incremental phase rotation: two trig
/// calls total, never one per term.
pub fn model_series(draw: &TrialDraw, alpha: f64) -> Complex64 {
    let r = Complex64::from_polar(1.0, 2.0 * PI * alpha);
    let mut w = r;
    let mut acc = Complex64::new(alpha * draw.x0, 0.0);
    for (i, (&xp, &xn)) in draw.pos.iter().zip(&draw.neg).enumerate() {
        let h = (i + 1) as f64;
        // (e(alpha h) - 1)/(2 pi i h) = -i (w - 1)/(2 pi h); mirror term
        // uses conj(w) and -h
        let scale = 1.0 / (2.0 * PI * h);
        let wp = w - Complex64::new(1.0, 0.0);
        let wn = w.conj() - Complex64::new(1.0, 0.0);
        acc += Complex64::new(0.0, -scale) * wp * xp;
        acc += Complex64::new(0.0, scale) * wn * xn;
        w *= r;
    }
    acc
}

/// Series values on the equispaced grid alpha_j = j/n via one transform.
/// Exactly model_series at each grid point, up to transform rounding.
fn grid_values(draw: &TrialDraw, n: usize) -> Vec<Complex64> {
    let h = draw.pos.len();
    debug_assert!(n >= 2 * h + 2);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut constant = Complex64::new(0.0, 0.0);
    for (i, (&xp, &xn)) in draw.pos.iter().zip(&draw.neg).enumerate() {
        let freq = i + 1;
        let scale = 1.0 / (2.0 * PI * freq as f64);
        let bp = Complex64::new(0.0, -scale * xp);
        let bn = Complex64::new(0.0, scale * xn);
        buf[freq] = bp;
        buf[n - freq] = bn;
        constant -= bp + bn;
    }
    let mut grid = dft::dft_pos(&buf);
    for (j, v) in grid.iter_mut().enumerate() {
        *v += constant + Complex64::new(j as f64 / n as f64 * draw.x0, 0.0);
    }
    grid
}

fn golden_max(draw: &TrialDraw, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let eval = |alpha: f64| model_series(draw, alpha).norm();
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    for _ in 0..40 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d);
        }
    }
    fc.max(fd)
}

/// One trial: grid scan, then golden-section refinement inside the cells
/// around the two strongest well-separated grid peaks. Two cells because the
/// runner-up lobe occasionally carries the true sup.
fn trial_max(config: &ModelConfig, trial: u32) -> f64 {
    let draw = draw_trial(config, trial);
    let n = config.alpha_grid as usize;
    let moduli: Vec<f64> = if n >= 2 * config.h as usize + 2 {
        grid_values(&draw, n).iter().map(|z| z.norm()).collect()
    } else {
        (0..n)
            .map(|j| model_series(&draw, j as f64 / n as f64).norm())
            .collect()
    };
    let mut best = 0usize;
    for (j, &m) in moduli.iter().enumerate() {
        if m > moduli[best] {
            best = j;
        }
    }
    let circ_dist = |a: usize, b: usize| {
        let d = a.abs_diff(b);
        d.min(n - d)
    };
    let mut second: Option<usize> = None;
    for (j, &m) in moduli.iter().enumerate() {
        if circ_dist(j, best) > 1 && second.map_or(true, |s| m > moduli[s]) {
            second = Some(j);
        }
    }
    let mut value = moduli[best];
    for j in std::iter::once(best).chain(second) {
        let lo = ((j as f64 - 1.0) / n as f64).max(0.0);
        let hi = ((j as f64 + 1.0) / n as f64).min(1.0 - 1e-12);
        value = value.max(golden_max(&draw, lo, hi));
    }
    value
}

/// Simulated distribution of sup|M| with truncation diagnostics attached.
#[derive(Debug, Clone)]
pub struct ModelDistribution {
    pub ccdf: EmpiricalCCDF,
    pub config: ModelConfig,
    /// Tail second moment bound 4/(pi^2 H) for the discarded |h| > H part.
    pub tail_bound_k2: f64,
    /// sqrt of the above: the tail's standard-deviation scale.
    pub tail_std: f64,
}

pub fn simulate_m(config: &ModelConfig) -> Result<ModelDistribution> {
    config.validate()?;
    let maxima = par::map_indexed(config.trials as usize, |t| trial_max(config, t as u32));
    let h = config.h as f64;
    Ok(ModelDistribution {
        ccdf: EmpiricalCCDF::new(maxima),
        config: *config,
        tail_bound_k2: 4.0 / (PI * PI * h),
        tail_std: (2.0 / (PI * PI * h)).sqrt(),
    })
}

// ---------------------------------------------------------------------------
// Model-side Laplace transform and mixed moments

/// log E exp(s sum_h c_h X(h)) = sum_h log st_mgf(s c_h), exact by
/// independence. Always finite while each factor is.
pub fn model_laplace_log(s: f64, coeffs: &[f64]) -> f64 {
    coeffs.iter().map(|&c| log_st_mgf(s * c)).sum()
}

/// Exponentiated form; errors rather than returning infinity, carrying the
/// log value for callers that can keep working in log space.
pub fn model_laplace(s: f64, coeffs: &[f64]) -> Result<f64> {
    let log = model_laplace_log(s, coeffs);
    if log > 709.0 {
        return Err(Error::Overflow(format!(
            "model Laplace transform exceeds float range; log value {log}"
        )));
    }
    Ok(log.exp())
}

const MOMENT_ORDER_CAP: u32 = 12;
const MOMENT_SUPPORT_CAP: usize = 4096;

/// Exact E[(sum c(h) X(h))^k (conj sum)^l] for independent Sato-Tate X(h).
///
/// One pass over the support: with S_t the partial sum over the first t
/// coefficients, E[S_t^i conj(S_t)^j] expands binomially in the new term,
/// and odd powers of a single X vanish. Exact up to float rounding, no
/// sampling anywhere.
pub fn moment_oracle(coeffs: &[Complex64], k: u32, l: u32) -> Result<Complex64> {
    if k + l > MOMENT_ORDER_CAP {
        return Err(Error::ResourceLimit(format!(
            "mixed moment order k + l = {} above cap {MOMENT_ORDER_CAP}",
            k + l
        )));
    }
    if coeffs.len() > MOMENT_SUPPORT_CAP {
        return Err(Error::ResourceLimit(format!(
            "coefficient support {} above cap {MOMENT_SUPPORT_CAP}",
            coeffs.len()
        )));
    }
    let (k, l) = (k as usize, l as usize);
    let mut binom = [[0f64; 13]; 13];
    binom[0][0] = 1.0;
    for i in 1..=12 {
        binom[i][0] = 1.0;
        for j in 1..=i {
            // binom[i-1][j] is zero-initialized when j = i
            binom[i][j] = binom[i - 1][j - 1] + binom[i - 1][j];
        }
    }
    let moments: Vec<f64> = (0..=(k + l) as u32).map(st_moment).collect();
    let zero = Complex64::new(0.0, 0.0);
    let mut dp = vec![vec![zero; l + 1]; k + 1];
    dp[0][0] = Complex64::new(1.0, 0.0);
    for &c in coeffs {
        let cc = c.conj();
        let mut cpow = vec![Complex64::new(1.0, 0.0); k + 1];
        for u in 1..=k {
            cpow[u] = cpow[u - 1] * c;
        }
        let mut ccpow = vec![Complex64::new(1.0, 0.0); l + 1];
        for v in 1..=l {
            ccpow[v] = ccpow[v - 1] * cc;
        }
        let mut next = vec![vec![zero; l + 1]; k + 1];
        for i in 0..=k {
            for j in 0..=l {
                let mut acc = zero;
                for u in 0..=i {
                    for v in 0..=j {
                        if (u + v) % 2 == 1 {
                            continue;
                        }
                        let m = moments[u + v];
                        if m == 0.0 && u + v > 0 {
                            continue;
                        }
                        acc += dp[i - u][j - v]
                            * cpow[u]
                            * ccpow[v]
                            * (binom[i][u] * binom[j][v] * m);
                    }
                }
                next[i][j] = acc;
            }
        }
        dp = next;
    }
    Ok(dp[k][l])
}
