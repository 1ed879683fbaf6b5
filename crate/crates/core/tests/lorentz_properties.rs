//! Property tests for the rearrangement module: the Lorentz norm inequality
//! suite on random piecewise-constant functions, equimeasurability, and the
//! dilation scaling law.

use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use reglab_core::rearrange::{
    decreasing_rearrangement, distribution_function, lebesgue_norm, lorentz_norm,
    lorentz_norm_radial_sampled, QIndex, RadialDomain, WeightedSampleSet,
};

/// Shared partition plus one value list per function.
fn sample_set(values: &[f64], weights: &[f64]) -> WeightedSampleSet {
    let entries: Vec<(f64, f64)> =
        values.iter().zip(weights).map(|(&v, &w)| (v, w)).collect();
    WeightedSampleSet::new(entries).unwrap()
}

fn partition_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..10).prop_flat_map(|m| {
        (
            proptest::collection::vec(0.0f64..10.0, m),
            proptest::collection::vec(0.01f64..5.0, m),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// ||f||_p <= ||f||_{p,p} <= p/(p-1) ||f||_p on piecewise-constant
    /// functions, with the Lebesgue norm computed by exact summation.
    #[test]
    fn sandwich_inequality((values, weights) in partition_strategy()) {
        prop_assume!(values.iter().any(|&v| v > 1e-6));
        let samples = sample_set(&values, &weights);
        let curve = decreasing_rearrangement(&samples).unwrap();
        for p in [1.5, 2.0, 3.0] {
            let lp = lebesgue_norm(&samples, p);
            let lpp = lorentz_norm(&curve, p, QIndex::Finite(p)).unwrap();
            let v = lpp.value().unwrap();
            let slack = lpp.error_bound() + 1e-9 * lp.max(1.0);
            prop_assert!(lp <= v + slack, "p={p}: {lp} > {v}");
            prop_assert!(v <= p / (p - 1.0) * lp + slack, "p={p}: {v} vs bound");
        }
    }

    /// || f ||_{p,s} <= (q/p)^(1/q - 1/s) || f ||_{p,q} for q < s, including
    /// s = infinity.
    #[test]
    fn nesting_inequality((values, weights) in partition_strategy()) {
        prop_assume!(values.iter().any(|&v| v > 1e-6));
        let samples = sample_set(&values, &weights);
        let curve = decreasing_rearrangement(&samples).unwrap();
        let p = 2.0;
        for (q, s) in [(1.5, 3.0), (1.0, 2.0)] {
            let nq = lorentz_norm(&curve, p, QIndex::Finite(q)).unwrap();
            let ns = lorentz_norm(&curve, p, QIndex::Finite(s)).unwrap();
            let factor = (q / p).powf(1.0 / q - 1.0 / s);
            let slack = nq.error_bound() + ns.error_bound() + 1e-9;
            prop_assert!(
                ns.value().unwrap() <= factor * nq.value().unwrap() + slack,
                "(q,s)=({q},{s})"
            );
        }
        // embedding into weak-L^p: ||f||_{p,inf} <= (q/p)^(1/q) ||f||_{p,q}
        for q in [1.0, 2.0, 3.0] {
            let nq = lorentz_norm(&curve, p, QIndex::Finite(q)).unwrap();
            let ninf = lorentz_norm(&curve, p, QIndex::Infinity).unwrap();
            let factor = (q / p).powf(1.0 / q);
            let slack = nq.error_bound() + 1e-9;
            prop_assert!(
                ninf.value().unwrap() <= factor * nq.value().unwrap() + slack,
                "q={q}"
            );
        }
    }

    /// ||fg||_{p,q} <= p/(p-1) ||f||_{p1,q1} ||g||_{p2,q2} with
    /// 1/p = 1/p1 + 1/p2 < 1 and 1/q <= 1/q1 + 1/q2, for functions on a
    /// common partition.
    ///
    /// The p/(p-1) factor is the correct constant for norms built from the
    /// averaged rearrangement f**: already for squares of power laws,
    /// ||f^2|| / ||f||^2 = (p1-1)^2/(p1 (p1-2)) > 1, so no constant-1
    /// version of the product inequality can hold for these norms.
    #[test]
    fn hoelder_inequality(
        (f_values, weights) in partition_strategy(),
        seed in 0u64..1000,
    ) {
        prop_assume!(f_values.iter().any(|&v| v > 1e-6));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g_values: Vec<f64> = f_values.iter().map(|_| rng.random_range(0.0..10.0)).collect();
        prop_assume!(g_values.iter().any(|&v| v > 1e-6));
        let fg: Vec<f64> = f_values.iter().zip(&g_values).map(|(a, b)| a * b).collect();

        let f = decreasing_rearrangement(&sample_set(&f_values, &weights)).unwrap();
        let g = decreasing_rearrangement(&sample_set(&g_values, &weights)).unwrap();
        let prod = decreasing_rearrangement(&sample_set(&fg, &weights)).unwrap();

        // (p1, q1) = (p2, q2) = (3, 2) gives (p, q) = (1.5, 1)
        let p = 1.5;
        let constant = p / (p - 1.0);
        let nf = lorentz_norm(&f, 3.0, QIndex::Finite(2.0)).unwrap();
        let ng = lorentz_norm(&g, 3.0, QIndex::Finite(2.0)).unwrap();
        let nfg = lorentz_norm(&prod, p, QIndex::Finite(1.0)).unwrap();
        let bound = constant * nf.value().unwrap() * ng.value().unwrap();
        let slack = nfg.error_bound()
            + nf.error_bound() * ng.value().unwrap()
            + ng.error_bound() * nf.value().unwrap();
        prop_assert!(
            nfg.value().unwrap() <= bound + slack + 1e-9 * bound.max(1.0),
            "{} vs {bound}",
            nfg.value().unwrap()
        );

        // weak-norm variant: q1 = q2 = q = infinity
        let nf = lorentz_norm(&f, 3.0, QIndex::Infinity).unwrap();
        let ng = lorentz_norm(&g, 3.0, QIndex::Infinity).unwrap();
        let nfg = lorentz_norm(&prod, p, QIndex::Infinity).unwrap();
        let bound = constant * nf.value().unwrap() * ng.value().unwrap();
        prop_assert!(
            nfg.value().unwrap() <= bound + 1e-9 * bound.max(1.0),
            "{} vs {bound} (weak)",
            nfg.value().unwrap()
        );
    }

    /// The rearrangement is nonincreasing and f** dominates f*.
    #[test]
    fn rearrangement_monotonicity((values, weights) in partition_strategy()) {
        let samples = sample_set(&values, &weights);
        let curve = decreasing_rearrangement(&samples).unwrap();
        let total = curve.total_measure();
        let probes: Vec<f64> = (1..40).map(|i| total * i as f64 / 40.0).collect();
        let mut prev_star = f64::INFINITY;
        let mut prev_star2 = f64::INFINITY;
        for &t in &probes {
            let fs = curve.fstar_at(t);
            let fss = curve.fstarstar_at(t);
            prop_assert!(fs <= prev_star + 1e-12);
            prop_assert!(fss <= prev_star2 + 1e-12);
            prop_assert!(fss >= fs - 1e-12);
            prev_star = fs;
            prev_star2 = fss;
        }
    }
}

/// Equimeasurability on 50 random sample sets at 20 probe levels: the
/// distribution function of the rearrangement equals D_f exactly (both are
/// finite sums).
#[test]
fn equimeasurability_of_random_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..50 {
        let m = rng.random_range(1..30usize);
        let entries: Vec<(f64, f64)> = (0..m)
            .map(|_| (rng.random_range(0.0..5.0), rng.random_range(0.01..2.0)))
            .collect();
        let samples = WeightedSampleSet::new(entries).unwrap();
        let curve = decreasing_rearrangement(&samples).unwrap();
        for i in 0..20 {
            let lambda = 5.0 * i as f64 / 19.0;
            assert_eq!(
                curve.distribution(lambda),
                distribution_function(&samples, lambda),
                "level {lambda}"
            );
        }
    }
}

/// Dilation law: the empirical norm of f(lambda .) equals lambda^(-n/p)
/// times the norm of f, for f = |x|^(-s) truncated consistently.
#[test]
fn dilation_scaling_of_power_law() {
    let (n, s) = (4usize, 2.0f64);
    let p = n as f64 / s;
    for lambda in [0.5f64, 2.0] {
        let base = lorentz_norm_radial_sampled(
            &|r: f64| r.powf(-s),
            RadialDomain::Ball { radius: 1.0 },
            n,
            1 << 13,
            1e-12,
            p,
            QIndex::Infinity,
        )
        .unwrap();
        // f(lambda x) = lambda^-s |x|^-s on the ball of radius 1/lambda
        let scaled = lorentz_norm_radial_sampled(
            &|r: f64| (lambda * r).powf(-s),
            RadialDomain::Ball { radius: 1.0 / lambda },
            n,
            1 << 13,
            1e-12,
            p,
            QIndex::Infinity,
        )
        .unwrap();
        let predicted = lambda.powf(-(n as f64) / p) * base.value().unwrap();
        let got = scaled.value().unwrap();
        let slack = base.error_bound() + scaled.error_bound() + 1e-3 * predicted;
        assert!(
            (got - predicted).abs() <= slack,
            "lambda={lambda}: {got} vs {predicted}"
        );
    }
}

/// The gradient norm of the doubly logarithmic map on an annulus: the
/// empirical L^4 norm matches direct 1-D quadrature of the closed-form
/// integrand to half a percent.
#[test]
fn annulus_l4_norm_against_quadrature() {
    let field = reglab_core::field::FieldSpec::log_log_4d();
    let lo = (-8.0f64).exp();
    let hi = (-2.0f64).exp();
    let fieldc = field.clone();
    let scalar = move |r: f64| fieldc.radial_derived(r, 1).unwrap().grad_norm;
    let norm = lorentz_norm_radial_sampled(
        &scalar,
        RadialDomain::Annulus { inner: lo, outer: hi },
        4,
        1 << 14,
        1e-12,
        4.0,
        QIndex::Finite(4.0),
    )
    .unwrap();

    // oracle: (int |grad u|^4 dx)^(1/4) by direct quadrature of 1/(r f)^4
    let h = |r: f64| {
        let f = -r.ln();
        (r * f).powi(-4)
    };
    let oracle = reglab_core::quadrature::integrate_radial(
        &h,
        lo,
        hi,
        4,
        reglab_core::quadrature::Tol::abs(1e-12),
        0.0,
    )
    .unwrap()
    .value()
    .unwrap()
    .powf(0.25);

    // the L^{4,4} norm with f** dominates the plain L^4 norm but the
    // comparison target here is the sampled value stability: check the
    // exact-summation L^4 of the sample set against the oracle instead
    let samples = reglab_core::rearrange::sample_radial(
        &scalar,
        RadialDomain::Annulus { inner: lo, outer: hi },
        4,
        1 << 14,
        1e-12,
    )
    .unwrap();
    let l4 = lebesgue_norm(&samples, 4.0);
    assert!(
        ((l4 - oracle) / oracle).abs() < 5e-3,
        "sampled {l4} vs quadrature {oracle}"
    );
    assert!(norm.value().unwrap() >= l4 * (1.0 - 1e-9));
}
