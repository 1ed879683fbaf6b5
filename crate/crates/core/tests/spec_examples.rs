//! Remaining worked examples: sampling oracles on off-center balls, decay
//! exponents of the fundamental kernels, degenerate-field guards, and the
//! potential-norm chain.

use reglab_core::field::{comparison_corpus, fundamental_solution, CorpusKind, FieldSpec};
use reglab_core::lab::harmonic_decay_constant;
use reglab_core::rearrange::{
    decreasing_rearrangement, lorentz_norm, lorentz_norm_grid_sampled, lorentz_norm_radial_sampled,
    QIndex, RadialDomain, WeightedSampleSet,
};
use reglab_core::residual::{
    growth_constant, newton_potential, GrowthEstimate, SystemKind, SystemSpec,
};
use reglab_core::special::unit_ball_volume;

/// |x|^-1 on B_0.2((0.5, 0, 0)) in R^3: the Halton-sampled weak-L^3 norm
/// agrees with a dense deterministic lattice oracle within 2%.
#[test]
fn offcenter_norm_against_dense_lattice() {
    let center = [0.5, 0.0, 0.0];
    let radius = 0.2;
    let scalar = |x: &[f64]| 1.0 / x.iter().map(|v| v * v).sum::<f64>().sqrt();

    let halton =
        lorentz_norm_grid_sampled(&scalar, &center, radius, 6000, 3.0, QIndex::Infinity).unwrap();

    // oracle: regular lattice over the bounding cube, points inside the ball
    let steps = 40;
    let mut entries = Vec::new();
    for i in 0..steps {
        for j in 0..steps {
            for k in 0..steps {
                let p = [
                    center[0] + radius * (2.0 * (i as f64 + 0.5) / steps as f64 - 1.0),
                    center[1] + radius * (2.0 * (j as f64 + 0.5) / steps as f64 - 1.0),
                    center[2] + radius * (2.0 * (k as f64 + 0.5) / steps as f64 - 1.0),
                ];
                let d: f64 = p
                    .iter()
                    .zip(&center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if d <= radius {
                    entries.push((scalar(&p), 1.0));
                }
            }
        }
    }
    let volume = unit_ball_volume(3) * radius.powi(3);
    let w = volume / entries.len() as f64;
    let entries: Vec<(f64, f64)> = entries.into_iter().map(|(v, _)| (v, w)).collect();
    let oracle_curve =
        decreasing_rearrangement(&WeightedSampleSet::new(entries).unwrap()).unwrap();
    let oracle = lorentz_norm(&oracle_curve, 3.0, QIndex::Infinity).unwrap();

    let a = halton.value().unwrap();
    let b = oracle.value().unwrap();
    assert!(((a - b) / b).abs() < 0.02, "halton {a} vs lattice {b}");
}

/// The order-2 kernel decays like |x|^(2-n): value ratio across one octave
/// is 2^(n-2).
#[test]
fn fundamental_kernel_decay_exponent() {
    let phi = fundamental_solution(5, 2).unwrap();
    let v1 = phi.radial_jets(0.1, 0).unwrap()[0].value();
    let v2 = phi.radial_jets(0.2, 0).unwrap()[0].value();
    assert!(((v1 / v2) - 2.0f64.powi(3)).abs() < 1e-12);
}

/// Degree-0 corpus entries are constant fields with zero gradient.
#[test]
fn corpus_contains_constant_with_zero_gradient() {
    let corpus = comparison_corpus(CorpusKind::Harmonic, 4, 1).unwrap();
    let constant = corpus
        .iter()
        .find(|f| f.poly_components().unwrap()[0].poly.degree() == 0)
        .expect("degree-0 entry");
    let jet = constant.eval_jet(&[0.3, -0.1, 0.2, 0.4], 1).unwrap();
    assert!(jet.grad_norm_sq() == 0.0);
}

/// A field scaled to zero has vanishing denominators everywhere: the growth
/// estimate reports NotApplicable rather than dividing.
#[test]
fn growth_constant_of_zero_field() {
    let field = FieldSpec::sin_log_second_order(4)
        .unwrap()
        .with_component_scaled(0, 0.0)
        .with_component_scaled(1, 0.0);
    let system = SystemSpec::new(SystemKind::SecondOrderSphere);
    let radii = [1e-4, 1e-3, 1e-2];
    let estimate = growth_constant(&system, &field, &radii).unwrap();
    assert_eq!(estimate, GrowthEstimate::NotApplicable);
}

/// The zero-gradient-only corpus is rejected by the decay-constant
/// experiment (norm-zero denominators).
#[test]
fn decay_constant_rejects_zero_corpus() {
    let corpus = comparison_corpus(CorpusKind::Harmonic, 4, 0).unwrap();
    let err = harmonic_decay_constant(&corpus, &[0.1], &[vec![0.0; 4]], 512, false);
    assert!(err.is_err());
}

/// The potential chain: a source normalized to unit weak-L^{n/2} norm has a
/// gradient with finite weak-L^n norm, reported through the sampling
/// pipeline.
#[test]
fn potential_gradient_weak_norm_is_finite() {
    let n = 5usize;
    let nf = n as f64;
    // || A r^-2 ||_{L^{n/2,inf}} on a ball attains A (n/(n-2)) b_n^(2/n)
    let plateau = nf / (nf - 2.0) * unit_ball_volume(n).powf(2.0 / nf);
    let amplitude = 1.0 / plateau;
    let source_curve =
        reglab_core::rearrange::RearrangementCurve::power_law(amplitude, 2.0, n, Some(1.0))
            .unwrap();
    let source_norm = lorentz_norm(&source_curve, nf / 2.0, QIndex::Infinity).unwrap();
    assert!((source_norm.value().unwrap() - 1.0).abs() < 1e-12);

    let solve = newton_potential(
        move |r: f64| if r < 1.0 { amplitude * r.powi(-2) } else { 0.0 },
        1.0,
        n,
        2,
    )
    .unwrap();
    let field = solve.field;
    let grad = move |r: f64| field.radial_jets(r, 1).unwrap()[0].deriv(1).abs();
    let norm = lorentz_norm_radial_sampled(
        &grad,
        RadialDomain::Ball { radius: 2.0 },
        n,
        1 << 12,
        1e-9,
        nf,
        QIndex::Infinity,
    )
    .unwrap();
    let v = norm.value().unwrap();
    assert!(v.is_finite() && v > 0.0, "gradient norm {v}");
}
