//! The analytic layer: the piecewise envelope function g, its Fourier
//! coefficients, the G(H) maximization with its lemma bound, major/minor arc
//! asymptotics for sum g(2 pi alpha h)/h, the rate-function integral I, the
//! derived constants A0 / B0 / delta, and saddle-point tail predictions.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model;
use crate::par;
use crate::quad;

/// Euler-Mascheroni constant, 20 digits.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

/// The 2 pi periodic envelope: sin t on [0, pi/2], 1 - cos t on (pi/2, 3 pi/2],
/// -sin t on (3 pi/2, 2 pi). Continuous, non-negative, even.
pub fn g_eval(t: f64) -> f64 {
    let r = t.rem_euclid(2.0 * PI);
    if r <= PI / 2.0 {
        r.sin()
    } else if r <= 3.0 * PI / 2.0 {
        1.0 - r.cos()
    } else {
        -r.sin()
    }
}

/// Closed-form Fourier coefficients of g: g(t) = a_0/2 + sum a_n cos(nt).
pub fn fourier_a(n: u32) -> f64 {
    match n {
        0 => 1.0 + 4.0 / PI,
        1 => -1.0 / PI - 0.5,
        _ => {
            let nf = n as f64;
            match n % 4 {
                0 => -4.0 / ((nf * nf - 1.0) * PI),
                1 => -2.0 / (nf * (nf + 1.0) * PI),
                2 => 0.0,
                _ => -2.0 / (nf * (nf - 1.0) * PI),
            }
        }
    }
}

/// Quadrature route for the same coefficient: (2/pi) int_0^pi g(t) cos(nt) dt,
/// split at the pi/2 branch point so each panel sees a smooth integrand.
pub fn fourier_a_quadrature(n: u32) -> f64 {
    let f = |t: f64| g_eval(t) * (n as f64 * t).cos();
    let panels = (n as usize / 4 + 8).max(8);
    let left = quad::composite_gl16(&f, 0.0, PI / 2.0, panels);
    let right = quad::composite_gl16(&f, PI / 2.0, PI, panels);
    2.0 / PI * (left + right)
}

#[derive(Debug, Clone, Copy)]
pub struct EnvelopeViolation {
    pub beta: f64,
    pub x: f64,
    pub y: f64,
    pub lhs: f64,
    pub rhs: f64,
}

/// |(e^{i beta} - 1) x + (1 - e^{-i beta}) y| <= 4 g(beta): the pointwise
/// envelope behind the lemma bound. Returns the offending numbers on failure.
pub fn envelope_check(beta: f64, x: f64, y: f64) -> std::result::Result<(), EnvelopeViolation> {
    assert!((-2.0..=2.0).contains(&x) && (-2.0..=2.0).contains(&y));
    let e = Complex64::from_polar(1.0, beta);
    let lhs = ((e - 1.0) * x + (1.0 - e.conj()) * y).norm();
    let rhs = 4.0 * g_eval(beta);
    if lhs <= rhs + 1e-12 {
        Ok(())
    } else {
        Err(EnvelopeViolation { beta, x, y, lhs, rhs })
    }
}

// ---------------------------------------------------------------------------
// G(H): sup over alpha and extreme coefficient values

#[derive(Debug, Clone, Copy)]
pub struct GhEstimate {
    pub value: f64,
    pub argmax_alpha: f64,
}

/// For fixed alpha, max over theta of
/// sum_{1 <= |h| <= H} 2 |Re(e^{-i theta} c_h)|, c_h = (e(alpha h) - 1)/h.
///
/// Pairing h with -h and writing t = frac(alpha h) turns the objective into
/// sum_h 2 m_h (|sin(theta - pi t)| + |sin(theta + pi t)|), m_h = 2 sin(pi t)/h:
/// a sum of |Re(e^{-i theta} v)| terms over 2H fixed vectors. The sweep walks
/// theta across the kink angles keeping W = sum s_j v_j updated, so each arc's
/// max is read off a single cosine. Exact up to rounding, O(H log H).
fn theta_sweep_max(alpha: f64, h_max: u32) -> f64 {
    // generators: (flip angle in [0, pi), vector)
    let mut gens: Vec<(f64, Complex64)> = Vec::with_capacity(2 * h_max as usize);
    let mut t = 0.0f64;
    for h in 1..=h_max {
        t = (t + alpha).fract();
        let s = (PI * t).sin();
        if s == 0.0 {
            continue;
        }
        let m = 4.0 * s / h as f64;
        let (st, ct) = (PI * t).sin_cos();
        gens.push((PI * t, Complex64::new(-m * st, m * ct)));
        gens.push(((PI * (1.0 - t)) % PI, Complex64::new(m * st, m * ct)));
    }
    if gens.is_empty() {
        return 0.0;
    }
    gens.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // signs on the first arc [0, first flip): fixed at its midpoint
    let theta_mid = gens[0].0 * 0.5;
    let e_mid = Complex64::from_polar(1.0, -theta_mid);
    let mut signs: Vec<f64> = Vec::with_capacity(gens.len());
    let mut w = Complex64::new(0.0, 0.0);
    for &(_, v) in &gens {
        let s = if (e_mid * v).re >= 0.0 { 1.0 } else { -1.0 };
        signs.push(s);
        w += v * s;
    }
    let mut best = 0.0f64;
    let mut arc_start = 0.0f64;
    let consider = |w: Complex64, a: f64, b: f64| {
        let fa = (Complex64::from_polar(1.0, -a) * w).re;
        let fb = (Complex64::from_polar(1.0, -b) * w).re;
        let mut m = fa.max(fb);
        // interior peak at theta = arg W when it lands inside the arc
        if (w.arg() - a).rem_euclid(2.0 * PI) <= b - a {
            m = m.max(w.norm());
        }
        m
    };
    for j in 0..gens.len() {
        let (flip, v) = gens[j];
        if flip > arc_start {
            best = best.max(consider(w, arc_start, flip));
            arc_start = flip;
        }
        w -= v * (2.0 * signs[j]);
        signs[j] = -signs[j];
    }
    best.max(consider(w, arc_start, PI))
}

/// Literal theta-grid evaluation of the same objective, straight from the
/// definition; the cross-check oracle for the sweep.
fn theta_grid_max(alpha: f64, h_max: u32, n_theta: u32) -> f64 {
    let coeffs: Vec<Complex64> = (1..=h_max)
        .map(|h| {
            (Complex64::from_polar(1.0, 2.0 * PI * alpha * h as f64) - 1.0) / h as f64
        })
        .collect();
    let mut best = 0.0f64;
    for j in 0..n_theta {
        let theta = PI * j as f64 / n_theta as f64;
        let (s, c) = theta.sin_cos();
        let mut f = 0.0;
        for ch in &coeffs {
            // |Re(e^{-i theta} c_h)| + |Re(e^{-i theta} c_{-h})|, with
            // c_{-h} = -conj(c_h)
            f += 2.0 * ((c * ch.re + s * ch.im).abs() + (c * ch.re - s * ch.im).abs());
        }
        best = best.max(f);
    }
    best
}

fn golden_argmax(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: u32) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Lower-bound estimate of G(H) = sup_alpha max_extreme-values |series|:
/// alpha-grid scan (default 64 H points) of the exact per-alpha theta
/// maximum, then one golden-section refinement around the best cell.
/// `theta_grid: Some(m)` switches the per-alpha evaluation to the literal
/// m-point theta scan (always <= the exact sweep).
pub fn estimate_gh(h: u32, alpha_grid: Option<u32>, theta_grid: Option<u32>) -> Result<GhEstimate> {
    if h < 1 {
        return Err(Error::InvalidParam("H >= 1 required".into()));
    }
    let n_alpha = alpha_grid.unwrap_or(64 * h).max(4);
    let eval = |alpha: f64| match theta_grid {
        None => theta_sweep_max(alpha, h),
        Some(m) => theta_grid_max(alpha, h, m),
    };
    let vals = par::map_indexed(n_alpha as usize, |j| eval(j as f64 / n_alpha as f64));
    let (mut best_j, mut best) = (0usize, 0.0f64);
    for (j, &v) in vals.iter().enumerate() {
        if v > best {
            best = v;
            best_j = j;
        }
    }
    let lo = (best_j as f64 - 1.0) / n_alpha as f64;
    let hi = (best_j as f64 + 1.0) / n_alpha as f64;
    let (arg, refined) = golden_argmax(eval, lo.max(0.0), hi.min(1.0), 32);
    if refined > best {
        Ok(GhEstimate {
            value: refined,
            argmax_alpha: arg,
        })
    } else {
        Ok(GhEstimate {
            value: best,
            argmax_alpha: best_j as f64 / n_alpha as f64,
        })
    }
}

/// Lemma upper bound: 4 max_alpha sum_{h <= H} g(2 pi alpha h)/h on the same
/// grid-plus-refinement scheme.
pub fn gh_lemma_bound(h: u32, alpha_grid: Option<u32>) -> Result<f64> {
    if h < 1 {
        return Err(Error::InvalidParam("H >= 1 required".into()));
    }
    let n_alpha = alpha_grid.unwrap_or(64 * h).max(4);
    let eval = |alpha: f64| {
        let mut acc = 0.0;
        for hh in 1..=h {
            acc += g_eval(2.0 * PI * alpha * hh as f64) / hh as f64;
        }
        4.0 * acc
    };
    let vals = par::map_indexed(n_alpha as usize, |j| eval(j as f64 / n_alpha as f64));
    let (mut best_j, mut best) = (0usize, 0.0f64);
    for (j, &v) in vals.iter().enumerate() {
        if v > best {
            best = v;
            best_j = j;
        }
    }
    let lo = (best_j as f64 - 1.0) / n_alpha as f64;
    let hi = (best_j as f64 + 1.0) / n_alpha as f64;
    let (_, refined) = golden_argmax(eval, lo.max(0.0), hi.min(1.0), 32);
    Ok(best.max(refined))
}

// ---------------------------------------------------------------------------
// Major/minor arc asymptotics of sum_{h <= H} g(2 pi alpha h)/h

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcKind {
    /// alpha within 1/(l H) of the reduced fraction b/l with l <= R.
    Major { b: i64, l: u32 },
    Minor,
}

#[derive(Debug, Clone, Copy)]
pub struct SumGReport {
    pub direct: f64,
    pub main_terms: f64,
    pub residual: f64,
    pub arc: ArcKind,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// |1 - e(x)| = 2 |sin(pi x)|.
fn log_dist_to_one(x: f64) -> f64 {
    (2.0 * (PI * x).sin().abs()).ln()
}

/// Direct sum against the R = floor(log H) main-term prediction. Rational
/// alpha near b/l with small l takes the major-arc form (the r = multiple-of-l
/// Fourier terms all contribute log H); everything else the minor-arc form.
/// Denominators are found by scanning l <= R for the best rounding, which at
/// these R agrees with the continued-fraction convergents.
pub fn sum_g_asymptotic(alpha: f64, h: u32) -> Result<SumGReport> {
    if h < 16 {
        return Err(Error::InvalidParam(format!(
            "asymptotic comparison needs H >= 16, got {h}"
        )));
    }
    let log_h = (h as f64).ln();
    let r_max = log_h as u32;
    let mut direct = 0.0;
    for hh in 1..=h {
        direct += g_eval(2.0 * PI * alpha * hh as f64) / hh as f64;
    }
    // detect a close rational with denominator <= R
    let mut arc = ArcKind::Minor;
    for l in 1..=r_max {
        let b = (alpha * l as f64).round() as i64;
        if (alpha - b as f64 / l as f64).abs() <= 1.0 / (l as f64 * h as f64) {
            let g = gcd(b.unsigned_abs(), l as u64).max(1);
            arc = ArcKind::Major {
                b: b / g as i64,
                l: l / g as u32,
            };
            break;
        }
    }
    let main_terms = match arc {
        ArcKind::Major { b, l } => {
            let mut log_coeff = fourier_a(0) / 2.0;
            let mut m = l;
            while m <= r_max {
                log_coeff += fourier_a(m);
                m += l;
            }
            let mut corr = 0.0;
            for r in 1..=r_max {
                if r % l != 0 {
                    corr -= fourier_a(r) * log_dist_to_one(r as f64 * b as f64 / l as f64);
                }
            }
            log_coeff * log_h + corr
        }
        ArcKind::Minor => {
            let mut corr = 0.0;
            for r in 1..=r_max {
                corr -= fourier_a(r) * log_dist_to_one(r as f64 * alpha);
            }
            fourier_a(0) / 2.0 * log_h + corr
        }
    };
    Ok(SumGReport {
        direct,
        main_terms,
        residual: direct - main_terms,
        arc,
    })
}

// ---------------------------------------------------------------------------
// The integral I = int_0^infty f(u)/u^2 du and the derived constants

#[derive(Debug, Clone, Copy)]
pub struct FIntegralResult {
    pub value: f64,
    /// Last panel-doubling difference.
    pub error_estimate: f64,
    pub panels: u32,
    pub tail_start: f64,
}

const TAIL_START: f64 = 300.0;

/// Analytic tail int_T^infty f(u)/u^2 du from the large-u expansion
/// f(u) = -(3/2) log u - (1/2) log(4 pi) + s1/u + c2/u^2 + c3/u^3 + ...
/// (Bessel asymptotics of the MGF minus 2u), integrated termwise.
fn f_tail_integral(t: f64) -> f64 {
    let s1 = -3.0 / 16.0;
    let c2 = -3.0 / 64.0;
    let c3 = -21.0 / 1024.0;
    let eps = 1.0 / t;
    -1.5 * (t.ln() + 1.0) * eps - (4.0 * PI).ln() / 2.0 * eps
        + s1 * eps * eps / 2.0
        + c2 * eps.powi(3) / 3.0
        + c3 * eps.powi(4) / 4.0
}

fn f_over_u_sq(u: f64) -> f64 {
    // near zero, log(1 + mgf_m1)/u^2 -> 1/2 is already stable via ln_1p
    model::f_of_t(u).expect("u >= 0") / (u * u)
}

/// One panel configuration: [0,1] gets panels/4 (the integrand is mild
/// there), [1, T] gets the full count; both sides of the u = 1 jump are
/// integrated separately.
pub fn f_integral_with_panels(panels: usize) -> f64 {
    let left = quad::composite_gl16(&f_over_u_sq, 0.0, 1.0, (panels / 4).max(8));
    let right = quad::composite_gl16(&f_over_u_sq, 1.0, TAIL_START, panels);
    left + right + f_tail_integral(TAIL_START)
}

pub fn f_integral() -> Result<FIntegralResult> {
    let mut panels = 64usize;
    let mut prev = f_integral_with_panels(panels);
    while panels <= 4096 {
        panels *= 2;
        let next = f_integral_with_panels(panels);
        let diff = (next - prev).abs();
        if diff <= 1e-10 {
            return Ok(FIntegralResult {
                value: next,
                error_estimate: diff,
                panels: panels as u32,
                tail_start: TAIL_START,
            });
        }
        prev = next;
    }
    Err(Error::Quadrature(format!(
        "rate-function integral did not stabilize; last value {prev} at {panels} panels"
    )))
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantsReport {
    /// I = int_0^infty f(u)/u^2 du.
    pub i_integral: f64,
    pub i_error: f64,
    pub a0: f64,
    pub b0: f64,
    pub delta: f64,
}

pub fn constants() -> Result<ConstantsReport> {
    let i = f_integral()?;
    let a0 = (-EULER_GAMMA - 1.0 - i.value / 2.0).exp();
    let b0 = 2.0 / PI * (EULER_GAMMA + 2.0f64.ln() - PI.ln() + i.value / 2.0);
    let delta = (4.0 * PI - PI * PI) / (2.0 * PI + 8.0);
    // the two report invariants are algebra; a violation is a formula bug
    let identity = 2.0 / PI * (-PI / 2.0 * b0 - 1.0).exp();
    assert!(
        (a0 - identity).abs() <= 1e-10,
        "A0 consistency broke: {a0} vs {identity}"
    );
    assert!(((PI / 2.0 - delta) * (1.0 / PI + 4.0 / (PI * PI)) - 1.0).abs() <= 1e-12);
    Ok(ConstantsReport {
        i_integral: i.value,
        i_error: i.error_estimate,
        a0,
        b0,
        delta,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SaddleTail {
    pub s: f64,
    pub predicted_tail: f64,
    /// log of the predicted tail, always finite.
    pub log_tail: f64,
}

/// Saddle point s = exp(pi V/2 - pi B0/2 - 1) and the predicted extreme tail
/// exp(-A0 e^{pi V / 2}).
pub fn saddle_and_tail(report: &ConstantsReport, v: f64) -> Result<SaddleTail> {
    if v <= 0.0 {
        return Err(Error::Domain(format!("saddle point needs V > 0, got {v}")));
    }
    let s = (PI * v / 2.0 - PI * report.b0 / 2.0 - 1.0).exp();
    let log_tail = -report.a0 * (PI * v / 2.0).exp();
    Ok(SaddleTail {
        s,
        predicted_tail: log_tail.exp(),
        log_tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // frozen from two independent high-precision evaluations of the integral
    const I_FROZEN: f64 = -2.3968765280407238;

    #[test]
    fn g_branch_anchors() {
        assert_eq!(g_eval(0.0), 0.0);
        assert!((g_eval(PI) - 2.0).abs() < 1e-15);
        assert!((g_eval(PI / 2.0) - 1.0).abs() < 1e-15);
        // continuity across both branch points
        for &b in &[PI / 2.0, 3.0 * PI / 2.0] {
            assert!((g_eval(b - 1e-9) - g_eval(b + 1e-9)).abs() < 1e-8);
        }
        // periodic, even, non-negative
        for i in 0..200 {
            let t = -7.0 + 14.0 * i as f64 / 199.0;
            assert!(g_eval(t) >= 0.0);
            assert!((g_eval(t) - g_eval(t + 2.0 * PI)).abs() < 1e-12);
            assert!((g_eval(t) - g_eval(-t)).abs() < 1e-12);
        }
    }

    #[test]
    fn fourier_closed_forms() {
        assert!((fourier_a(0) - (1.0 + 4.0 / PI)).abs() < 1e-15);
        assert!((fourier_a(1) - (-1.0 / PI - 0.5)).abs() < 1e-15);
        assert_eq!(fourier_a(2), 0.0);
        assert_eq!(fourier_a(6), 0.0);
        assert!((fourier_a(4) - (-4.0 / (15.0 * PI))).abs() < 1e-15);
        for n in 0..=16 {
            let q = fourier_a_quadrature(n);
            assert!(
                (fourier_a(n) - q).abs() < 1e-10,
                "n = {n}: closed {} vs quad {q}",
                fourier_a(n)
            );
        }
        for n in 1..=10_000 {
            assert!(fourier_a(n) <= 0.0, "a_{n} positive");
        }
    }

    #[test]
    fn fourier_reconstruction_converges_uniformly() {
        let n_max = 10_000u32;
        // explicit tail bound: |a_n| <= 4/((n^2-1) pi) for every class
        let tail: f64 = 4.0 / (PI * (n_max as f64 - 1.0));
        let mut sup_err = 0.0f64;
        for i in 0..=2000 {
            let t = 2.0 * PI * i as f64 / 2000.0;
            let ct = t.cos();
            let (mut c_prev, mut c_cur) = (1.0, ct);
            let mut acc = fourier_a(0) / 2.0 + fourier_a(1) * ct;
            for n in 2..=n_max {
                let c_next = 2.0 * ct * c_cur - c_prev;
                c_prev = c_cur;
                c_cur = c_next;
                acc += fourier_a(n) * c_cur;
            }
            sup_err = sup_err.max((acc - g_eval(t)).abs());
        }
        assert!(sup_err <= 10.0 * tail, "sup err {sup_err}, tail {tail}");
    }

    #[test]
    fn envelope_cases() {
        assert!(envelope_check(0.0, 1.5, -1.5).is_ok());
        // beta = pi, x = 2, y = -2 saturates: |(-2)(2) + (2)(-2)| = 8 = 4 g(pi)
        assert!(envelope_check(PI, 2.0, -2.0).is_ok());
        let e = Complex64::from_polar(1.0, PI);
        let lhs = ((e - 1.0) * 2.0 + (1.0 - e.conj()) * -2.0).norm();
        assert!((lhs - 8.0).abs() < 1e-12);
        // course random sweep; the heavy randomized pass lives in the
        // property suite
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..2000 {
            let beta = next() * 20.0 - 10.0;
            let x = next() * 4.0 - 2.0;
            let y = next() * 4.0 - 2.0;
            assert!(envelope_check(beta, x, y).is_ok(), "beta {beta} x {x} y {y}");
        }
    }

    #[test]
    fn gh_h1_is_eight() {
        // hand value: alpha = 1/2 gives |e(1/2) - 1| = 2 on both h = 1 terms
        let est = estimate_gh(1, None, None).unwrap();
        assert!((est.value - 8.0).abs() < 1e-9, "value {}", est.value);
        assert!((est.argmax_alpha - 0.5).abs() < 0.01);
        let lemma = gh_lemma_bound(1, None).unwrap();
        assert!((lemma - 8.0).abs() < 1e-9);
    }

    #[test]
    fn sweep_matches_definition_scan() {
        // dense literal theta scan vs the kink sweep at awkward alphas
        for &(alpha, h) in &[(0.37, 7u32), (0.61803398875, 9), (0.125, 8), (0.5, 4)] {
            let sweep = theta_sweep_max(alpha, h);
            let scan = theta_grid_max(alpha, h, 20_001);
            // Lipschitz constant of the theta objective
            let lip: f64 = 4.0 * (1..=h).map(|k| 4.0 / k as f64).sum::<f64>();
            assert!(sweep >= scan - 1e-9, "alpha {alpha}: {sweep} < {scan}");
            assert!(
                sweep <= scan + lip * PI / 20_001.0 + 1e-9,
                "alpha {alpha}: {sweep} vs {scan}"
            );
        }
    }

    #[test]
    fn gh_oracle_mode_agrees() {
        for &h in &[2u32, 5, 9] {
            let exact = estimate_gh(h, Some(256), None).unwrap().value;
            let grid = estimate_gh(h, Some(256), Some(512)).unwrap().value;
            assert!(exact >= grid - 1e-9);
            assert!(exact - grid < 0.05, "H = {h}: {exact} vs {grid}");
        }
    }

    #[test]
    fn gh_sandwich_h256() {
        let est = estimate_gh(256, None, None).unwrap().value;
        let log_h = 256f64.ln();
        assert!(est >= 4.0 * log_h - 8.0, "est {est}");
        assert!(est <= 8.0 * log_h + 8.0, "est {est}");
        assert!(est <= (2.0 + 8.0 / PI) * log_h + 8.0, "est {est}");
        let lemma = gh_lemma_bound(256, None).unwrap();
        assert!(est <= lemma + 0.1, "est {est}, lemma {lemma}");
    }

    #[test]
    fn gh_lemma_dominates_at_h64() {
        let est = estimate_gh(64, None, None).unwrap().value;
        let lemma = gh_lemma_bound(64, None).unwrap();
        assert!(lemma >= est - 0.1);
    }

    #[test]
    fn sum_g_arc_detection() {
        let third = sum_g_asymptotic(1.0 / 3.0, 1000).unwrap();
        assert_eq!(third.arc, ArcKind::Major { b: 1, l: 3 });
        let golden = sum_g_asymptotic(0.6180339887498949, 1000).unwrap();
        assert_eq!(golden.arc, ArcKind::Minor);
        let half = sum_g_asymptotic(0.5, 1000).unwrap();
        assert_eq!(half.arc, ArcKind::Major { b: 1, l: 2 });
    }

    #[test]
    fn sum_g_residuals_within_calibrated_band() {
        // residual band frozen at build time over H in {1e2, 1e3, 1e4}
        for &h in &[100u32, 1000, 10_000] {
            let major = sum_g_asymptotic(0.5, h).unwrap();
            assert!(major.residual.abs() <= 2.0, "H = {h}: {}", major.residual);
            let minor = sum_g_asymptotic(0.6180339887498949, h).unwrap();
            assert!(minor.residual.abs() <= 2.0, "H = {h}: {}", minor.residual);
        }
        // O(1) drift monitor
        let lo = sum_g_asymptotic(0.5, 100).unwrap().residual;
        let hi = sum_g_asymptotic(0.5, 10_000).unwrap().residual;
        assert!((hi - lo).abs() <= 3.0);
    }

    #[test]
    fn integral_value_and_stability() {
        let i = f_integral().unwrap();
        assert!((i.value - I_FROZEN).abs() < 2e-9, "I = {}", i.value);
        assert!(i.error_estimate <= 1e-8);
        // doubling stability, the acceptance phrasing
        let a = f_integral_with_panels(512);
        let b = f_integral_with_panels(1024);
        assert!((a - b).abs() <= 1e-8);
        // integrand limit at zero
        assert!((f_over_u_sq(1e-6) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn constants_and_identities() {
        let c = constants().unwrap();
        // frozen independent evaluations
        assert!((c.a0 - 0.6846980088774583).abs() < 1e-8, "A0 = {}", c.a0);
        assert!((c.b0 - -0.6829690686871359).abs() < 1e-8, "B0 = {}", c.b0);
        // the paper displays delta truncated to 0.18880...
        assert!(c.delta >= 0.18880 && c.delta < 0.18881);
        let closed = (4.0 * PI - PI * PI) / (2.0 * PI + 8.0);
        assert!((c.delta - closed).abs() < 1e-15);
    }

    #[test]
    fn saddle_identity_and_monotone_tail() {
        let c = constants().unwrap();
        let mut prev_log = f64::INFINITY;
        for i in 1..=30 {
            let v = 0.2 * i as f64;
            let st = saddle_and_tail(&c, v).unwrap();
            // (2/pi) s = A0 e^{pi V/2}, the saddle identity
            let rhs = c.a0 * (PI * v / 2.0).exp();
            assert!(
                (2.0 / PI * st.s - rhs).abs() <= 1e-10 * rhs,
                "V = {v}"
            );
            assert!(st.log_tail < prev_log);
            prev_log = st.log_tail;
            assert!(st.log_tail.is_finite());
        }
        assert!(saddle_and_tail(&c, 0.0).is_err());
        assert!(saddle_and_tail(&c, -1.0).is_err());
    }
}
