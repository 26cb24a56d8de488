//! Arithmetic identities binding the field layer, the transform layer, and
//! the partial-sum engine together. Everything here is exact mathematics,
//! so tolerances are float-rounding scale unless a calibrated constant is
//! cited in the assertion.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use birchmax::engine;
use birchmax::{FieldContext, TraceFamily};

fn families() -> Vec<TraceFamily> {
    vec![
        TraceFamily::Birch,
        TraceFamily::Kloosterman,
        // n^3 + 2 n^5
        TraceFamily::odd_polynomial(vec![0, 0, 0, 1, 0, 2]).unwrap(),
    ]
}

#[test]
fn plancherel_reconstruction_across_families() {
    let ctx = FieldContext::new(211).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for family in families() {
        let table = engine::complete_sums(&family, &ctx).unwrap();
        let mut cases: Vec<(u64, u64)> = (0..40)
            .map(|_| (rng.gen_range(0..211), rng.gen_range(0..211)))
            .collect();
        // edges: empty-ish prefix, full interval, a = 0
        cases.push((0, 0));
        cases.push((0, 210));
        cases.push((17, 210));
        for (a, x) in cases {
            let direct = engine::partial_sum(&family, &ctx, a, x).unwrap();
            let rebuilt = engine::plancherel_reconstruct(&ctx, &table, a, x).unwrap();
            assert!(
                (direct - rebuilt).norm() < 1e-9,
                "{family:?} a = {a}, x = {x}: direct {direct}, rebuilt {rebuilt}"
            );
        }
    }
}

// Averaging the shifted product over ALL of F_p collapses to a point count:
// (1/p) sum_a T(a-h) T(a-h') equals [h = h'] for the cubic-phase family and
// [h = h'] - 1/p for the inverse-phase one. Exact identities.
#[test]
fn complete_table_orthogonality() {
    let ctx = FieldContext::new(1009).unwrap();
    let p = 1009usize;
    for (family, offset) in [
        (TraceFamily::Birch, 0.0),
        (TraceFamily::Kloosterman, -1.0 / p as f64),
    ] {
        let table = engine::complete_sums(&family, &ctx).unwrap();
        for (h, hp) in [(0usize, 0usize), (3, 3), (3, 5), (100, 900), (700, 700)] {
            let mut acc = 0.0;
            for a in 0..p {
                acc += table.values[(a + p - h) % p] * table.values[(a + p - hp) % p];
            }
            let expected = if h == hp { 1.0 + offset } else { offset };
            assert!(
                (acc / p as f64 - expected).abs() < 1e-8,
                "{family:?} h = {h}, h' = {hp}: got {}",
                acc / p as f64
            );
        }
    }
}

#[test]
fn checkpoint_rows_match_direct_partial_sums() {
    // 5003 sits above the transform dispatch threshold, so this exercises
    // the fast path against the O(x) loop
    let ctx = FieldContext::new(5003).unwrap();
    let family = TraceFamily::Birch;
    let matrix = engine::checkpoint_matrix(&family, &ctx, 8).unwrap();
    assert_eq!(matrix.cutoffs.len(), 9);
    assert_eq!(matrix.cutoffs[0], 1);
    assert_eq!(matrix.cutoffs[8], 5003);
    for (level, row) in matrix.rows.iter().enumerate() {
        let x = matrix.cutoffs[level].min(5002);
        for a in [0u64, 1, 17, 2500, 5002] {
            let direct = engine::partial_sum(&family, &ctx, a, x).unwrap();
            assert!(
                (row[a as usize] - direct).norm() < 1e-9,
                "level {level}, a = {a}"
            );
        }
    }
}

#[test]
fn profiles_dominate_and_stay_below_trivial_bound() {
    let ctx = FieldContext::new(1009).unwrap();
    let family = TraceFamily::Birch;
    let exact = engine::max_profile_exact(&family, &ctx).unwrap();
    let matrix = engine::checkpoint_matrix(&family, &ctx, 8).unwrap();
    let checkpointed = engine::max_profile_checkpointed(&matrix);
    let gap = engine::profile_gap(&exact, &checkpointed);
    // the checkpoint max ranges over a subset of cutoffs, so it can never
    // exceed the exact profile
    assert!(gap.min > -1e-9, "min gap {}", gap.min);
    assert!(gap.mean >= 0.0);
    let trivial = (1009f64).sqrt() + 1e-9;
    for a in 0..1009usize {
        assert!(exact.m[a] <= trivial);
    }
}

// |gamma_p(h;x)/sqrt(p) - (e_p(xh) - 1)/(2 pi i h)| <= C/p. The constant is
// fixed by an exhaustive (h, x) scan at p = 101 and then asserted with
// headroom on sampled pairs at p = 1009 (measured 1.1805 and 1.1850).
#[test]
fn gamma_tracks_continuous_coefficient() {
    let scan = |p: u64, pairs: &[(i64, u64)]| -> f64 {
        let ctx = FieldContext::new(p).unwrap();
        let mut worst = 0.0f64;
        for &(h, x) in pairs {
            let discrete = engine::gamma_coefficient(&ctx, h, x) / ctx.sqrt_p();
            let phase = std::f64::consts::TAU * (x as f64) * (h as f64) / p as f64;
            let continuous = (Complex64::from_polar(1.0, phase) - 1.0)
                / Complex64::new(0.0, std::f64::consts::TAU * h as f64);
            worst = worst.max((discrete - continuous).norm() * p as f64);
        }
        worst
    };

    let mut all_101 = Vec::new();
    for h in 1..=50i64 {
        for x in 0..101u64 {
            all_101.push((h, x));
            all_101.push((-h, x));
        }
    }
    let c_measured = scan(101, &all_101);
    assert!(c_measured <= 1.19, "full scan at p = 101 gave C = {c_measured}");

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sampled: Vec<(i64, u64)> = (0..2000)
        .map(|_| {
            let h = rng.gen_range(1..=504i64) * if rng.gen::<bool>() { 1 } else { -1 };
            (h, rng.gen_range(0..1009u64))
        })
        .collect();
    let c_large = scan(1009, &sampled);
    assert!(c_large <= 1.30, "sampled scan at p = 1009 gave C = {c_large}");
}

#[test]
fn imag_half_sum_identity_and_mean() {
    let ctx = FieldContext::new(10007).unwrap();
    let family = TraceFamily::Birch;
    let table = engine::complete_sums(&family, &ctx).unwrap();
    let im_half = engine::imag_half_sums(&family, &ctx).unwrap();
    // transform route vs direct gamma-weighted convolution on sampled a
    let gap = engine::half_sum_identity_gap(&ctx, &table, &im_half, 10, 23);
    assert!(gap < 1e-9, "identity gap {gap}");
    // distributional symmetry: mean is 0 within the model's 5/sqrt(p)
    let mean: f64 = im_half[1..].iter().sum::<f64>() / 10006.0;
    assert!(mean.abs() < 5.0 / (10007f64).sqrt(), "mean {mean}");
}

#[test]
fn short_interval_envelope_ratios() {
    for &p in &[1009u64, 10007] {
        let ctx = FieldContext::new(p).unwrap();
        let len = (p as f64).sqrt() as u64;
        let report =
            engine::short_interval_scan(&TraceFamily::Birch, &ctx, len, 200, 5).unwrap();
        // calibrated worst ratio is about 1.0; the asserted cap is the
        // specified one order of headroom
        assert!(report.max_ratio <= 10.0, "p = {p}: {}", report.max_ratio);
        assert!(report.mean_ratio <= report.max_ratio);
        assert!(report.max_abs_sum.is_finite());
    }
    // inverse-phase family: square-root cancellation in short windows holds
    // empirically (calibrated ratio about 0.5); sanity only, no sharp claim
    let ctx = FieldContext::new(10007).unwrap();
    let report =
        engine::short_interval_scan(&TraceFamily::Kloosterman, &ctx, 100, 200, 5).unwrap();
    assert!(report.max_ratio > 0.0 && report.max_ratio <= 10.0);
}

#[test]
fn phi_and_nu_distributions_are_valid_ccdfs() {
    let ctx = FieldContext::new(1009).unwrap();
    let family = TraceFamily::Birch;
    let exact = engine::max_profile_exact(&family, &ctx).unwrap();
    let phi = engine::phi_distribution(&exact);
    assert_eq!(phi.len(), 1008);
    // M_p(a) >= |complete sum| > 0 and the CCDF is monotone
    assert!(phi.eval(0.0) == 1.0 || phi.eval(0.0) < 1.0);
    let mut last = f64::INFINITY;
    for v in [0.0, 0.5, 1.0, 1.5, 2.0, 3.0] {
        let c = phi.eval(v);
        assert!(c <= last && (0.0..=1.0).contains(&c));
        last = c;
    }
    let im = engine::imag_half_sums(&family, &ctx).unwrap();
    let nu = engine::nu_distribution(&im);
    assert_eq!(nu.len(), 1008);
    assert!(nu.median().abs() < 1.0);
}
