//! Regularity diagnostics: Morrey subnorm scans, Lorentz ball-decay
//! experiments, oscillation analysis, Sobolev membership at the critical
//! exponent, and the harmonic/biharmonic decay-constant experiment.

use crate::error::{Error, Result};
use crate::field::{Family, FieldSpec};
use crate::quadrature::{integrate_radial, integrate_offcenter_ball, DivergenceEvidence, Tol};
use crate::rearrange::{
    lorentz_norm_grid_sampled, lorentz_norm_radial_sampled, QIndex, RadialDomain,
};
use crate::report::{FitOutcome, ScanReport};
use crate::special::fit_log_log;
use crate::tol;

/// Inner cutoff used by deep membership integrations; far below the default
/// evaluation guard but still clear of f64 underflow in every integrand the
/// catalog produces.
pub const DEEP_CUTOFF: f64 = 1e-45;

// ---------------------------------------------------------------------------
// Morrey subnorms
// ---------------------------------------------------------------------------

/// M_p(x0, r) = r^(p-n) int_{B_r(x0)} |grad u|^p dx for a radial field.
pub fn morrey_subnorm(field: &FieldSpec, center_norm: f64, r: f64, p: f64) -> Result<f64> {
    let n = field.dim_n;
    if !(p >= 2.0 && p <= n as f64) {
        return Err(Error::Config(format!("Morrey index p={p} must lie in [2, n]")));
    }
    let integral = morrey_integral(field, center_norm, r, p)?;
    Ok(r.powf(p - n as f64) * integral)
}

/// Checks that the closed ball B_r(x0) with |x0| = center_norm lies inside
/// the field's domain of evaluation.
fn check_ball_in_domain(field: &FieldSpec, center_norm: f64, r: f64) -> Result<()> {
    if let Some(r_max) = field.r_max {
        if center_norm + r > r_max * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "ball of radius {r} at distance {center_norm} exceeds the domain radius {r_max}"
            )));
        }
    }
    Ok(())
}

fn morrey_integral(field: &FieldSpec, center_norm: f64, r: f64, p: f64) -> Result<f64> {
    let n = field.dim_n;
    check_ball_in_domain(field, center_norm, r)?;
    if field.is_radial() {
        let deep = field.with_inner_cutoff(field.r_min.min(DEEP_CUTOFF));
        let h = move |rho: f64| deep.radial_derived(rho, 1).expect("in domain").grad_norm.powf(p);
        let tol = Tol::rel(1e-9);
        let res = if center_norm <= 1e-12 * r {
            integrate_radial(&h, 0.0, r, n, tol, DEEP_CUTOFF)?
        } else {
            integrate_offcenter_ball(&h, center_norm, r, n, tol, DEEP_CUTOFF)?
        };
        res.value()
    } else {
        // polynomial gradients are not radial: sampled mean times volume
        let scalar = {
            let field = field.clone();
            move |x: &[f64]| field.eval_jet(x, 1).expect("polynomial jets").grad_norm_sq().sqrt().powf(p)
        };
        let mut center = vec![0.0; n];
        center[0] = center_norm;
        let samples = crate::rearrange::sample_grid(&scalar, &center, r, 4096)?;
        Ok(samples.entries().iter().map(|&(v, w)| v * w).sum())
    }
}

/// Outcome of a Morrey scan: either M_p at each radius, or (when the
/// full-ball integral diverges at the origin) the per-annulus increments of
/// the critical integral between consecutive scan radii.
#[derive(Debug, Clone, PartialEq)]
pub struct MorreyScan {
    pub report: ScanReport,
    pub fit: FitOutcome,
    /// true when values are annulus increments rather than subnorm values
    pub increments_mode: bool,
}

/// Scans M_p(x0, r) over a descending radius list. When the origin integral
/// diverges the scan switches to annulus increments, which stay finite and
/// expose the no-decay signature.
pub fn morrey_scan(field: &FieldSpec, center_norm: f64, radii: &[f64], p: f64) -> Result<MorreyScan> {
    let n = field.dim_n;
    if !(p >= 2.0 && p <= n as f64) {
        return Err(Error::Config(format!("Morrey index p={p} must lie in [2, n]")));
    }
    let mut sorted: Vec<f64> = radii.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    // reject out-of-domain balls before any closure evaluates the field
    check_ball_in_domain(field, center_norm, sorted[0])?;

    let probe = morrey_integral(field, center_norm, sorted[0], p);
    match probe {
        Ok(first) => {
            let mut values = vec![sorted[0].powf(p - n as f64) * first];
            for &r in &sorted[1..] {
                values.push(morrey_subnorm(field, center_norm, r, p)?);
            }
            let fit = fit_outcome(&sorted, &values);
            Ok(MorreyScan {
                report: ScanReport {
                    quantity: format!("morrey_subnorm(p={p})"),
                    center: vec![center_norm],
                    radii: sorted,
                    values,
                    fit: fit.fit().copied(),
                },
                fit,
                increments_mode: false,
            })
        }
        Err(Error::Config(_)) if field.is_radial() && center_norm == 0.0 => {
            // divergent at the origin: report annulus increments instead
            let deep = field.with_inner_cutoff(field.r_min.min(DEEP_CUTOFF));
            let h =
                move |rho: f64| deep.radial_derived(rho, 1).expect("in domain").grad_norm.powf(p);
            let mut values = Vec::with_capacity(sorted.len() - 1);
            let mut ann_radii = Vec::with_capacity(sorted.len() - 1);
            for pair in sorted.windows(2) {
                let (outer, inner) = (pair[0], pair[1]);
                let res = integrate_radial(&h, inner, outer, n, Tol::rel(1e-10), DEEP_CUTOFF)?;
                values.push(res.value()?);
                ann_radii.push(outer);
            }
            Ok(MorreyScan {
                report: ScanReport {
                    quantity: format!("morrey_annulus_increment(p={p})"),
                    center: vec![center_norm],
                    radii: ann_radii,
                    values,
                    fit: None,
                },
                fit: FitOutcome::None,
                increments_mode: true,
            })
        }
        Err(e) => Err(e),
    }
}

fn fit_outcome(radii: &[f64], values: &[f64]) -> FitOutcome {
    if radii.len() < 2 || values.iter().any(|&v| !(v > 0.0)) {
        return FitOutcome::None;
    }
    FitOutcome::classify(fit_log_log(radii, values))
}

// ---------------------------------------------------------------------------
// ball-decay scans
// ---------------------------------------------------------------------------

/// Quantity measured along a geometric radius grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanQuantity {
    /// Lorentz L^{p,q} norm of |grad u| (grad_order 1) or the paired sum
    /// with the L^{p/2,q} norm of |grad^2 u| (grad_order 2)
    Lorentz { p: f64, q: QIndex, grad_order: usize },
    Morrey { p: f64 },
    Oscillation,
}

/// Geometric ball-decay scan configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayScanConfig {
    pub center: Vec<f64>,
    pub r0: f64,
    pub theta: f64,
    pub count: usize,
    pub quantity: ScanQuantity,
    /// radial cells (origin-centered radial fields) or ball samples
    pub resolution: usize,
    pub fit: bool,
    /// smallness threshold (the epsilon_0 role): scan rows at or below it
    /// are flagged in the result
    pub smallness_threshold: Option<f64>,
}

impl DecayScanConfig {
    fn validate(&self, field: &FieldSpec) -> Result<()> {
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::Config(format!("ratio theta={} must lie in (0,1)", self.theta)));
        }
        if self.count < 2 {
            return Err(Error::Config("scan needs at least two radii".into()));
        }
        let d = norm(&self.center);
        if let Some(r_max) = field.r_max {
            if d + self.r0 > r_max * (1.0 + 1e-12) {
                return Err(Error::Config(format!(
                    "ball of radius {} at distance {d} exceeds the domain radius {r_max}",
                    self.r0
                )));
            }
        }
        Ok(())
    }

    fn radii(&self) -> Vec<f64> {
        (0..self.count).map(|l| self.r0 * self.theta.powi(l as i32)).collect()
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Comparison of a decay scan against the halving-iteration exponent
/// alpha_0 = log 2 / log(1/theta).
#[derive(Debug, Clone, PartialEq)]
pub struct HalvingCheck {
    pub alpha0: f64,
    /// consecutive value ratios v_{l+1}/v_l
    pub ratios: Vec<f64>,
    /// true when every consecutive ratio is at most 1/2 (up to 10%)
    pub halving_observed: bool,
}

/// Result of a ball-decay scan.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayScan {
    pub report: ScanReport,
    pub fit: FitOutcome,
    pub halving: HalvingCheck,
    /// per-row flags against the smallness threshold, when one was set
    pub below_threshold: Option<Vec<bool>>,
}

/// Measures the configured quantity on the balls B_{theta^l r0}(center) and
/// optionally fits a log-log slope. The halving check compares the observed
/// decay against the exponent alpha_0 = log 2 / log theta^{-1} that a
/// norm-halving iteration would produce.
pub fn decay_scan(field: &FieldSpec, config: &DecayScanConfig) -> Result<DecayScan> {
    config.validate(field)?;
    let radii = config.radii();
    let d = norm(&config.center);

    let mut values = Vec::with_capacity(radii.len());
    for &r in &radii {
        let v = match config.quantity {
            ScanQuantity::Lorentz { p, q, grad_order } => {
                ball_lorentz_value(field, &config.center, r, p, q, grad_order, config.resolution)?
            }
            ScanQuantity::Morrey { p } => morrey_subnorm(field, d, r, p)?,
            ScanQuantity::Oscillation => oscillation_value(field, d, r)?,
        };
        values.push(v);
    }

    let quantity = match config.quantity {
        ScanQuantity::Lorentz { p, q, grad_order } => {
            format!("lorentz_ball_norm(p={p},q={q},grad_order={grad_order})")
        }
        ScanQuantity::Morrey { p } => format!("morrey_subnorm(p={p})"),
        ScanQuantity::Oscillation => "oscillation".into(),
    };
    let fit = if config.fit { fit_outcome(&radii, &values) } else { FitOutcome::None };
    let ratios: Vec<f64> = values.windows(2).map(|w| w[1] / w[0]).collect();
    let halving = HalvingCheck {
        alpha0: 2.0f64.ln() / (1.0 / config.theta).ln(),
        halving_observed: !ratios.is_empty() && ratios.iter().all(|&r| r <= 0.55),
        ratios,
    };
    let below_threshold = config
        .smallness_threshold
        .map(|eps| values.iter().map(|&v| v <= eps).collect());

    Ok(DecayScan {
        report: ScanReport {
            quantity,
            center: config.center.clone(),
            radii,
            values,
            fit: fit.fit().copied(),
        },
        fit,
        halving,
        below_threshold,
    })
}

/// Lorentz norm of |grad u| on one ball; grad_order 2 adds the paired
/// L^{p/2,q} norm of |grad^2 u|.
pub fn ball_lorentz_value(
    field: &FieldSpec,
    center: &[f64],
    r: f64,
    p: f64,
    q: QIndex,
    grad_order: usize,
    resolution: usize,
) -> Result<f64> {
    if grad_order != 1 && grad_order != 2 {
        return Err(Error::Config("grad_order must be 1 or 2".into()));
    }
    let d = norm(center);
    check_ball_in_domain(field, d, r)?;
    let radial_path = field.is_radial() && d == 0.0;
    let mut total = 0.0;
    for order in 1..=grad_order {
        let (p_eff, q_eff) = if order == 1 { (p, q) } else { (p / 2.0, q) };
        let norm_result = if radial_path {
            let deep = field.with_inner_cutoff(field.r_min.min(DEEP_CUTOFF));
            let floor = (r * 1e-9).max(deep.r_min);
            let scalar = move |rho: f64| {
                let derived = deep.radial_derived(rho, order).expect("in domain");
                if order == 1 {
                    derived.grad_norm
                } else {
                    derived.hess_norm
                }
            };
            lorentz_norm_radial_sampled(
                &scalar,
                RadialDomain::Ball { radius: r },
                field.dim_n,
                resolution,
                floor,
                p_eff,
                q_eff,
            )?
        } else {
            let fieldc = field.clone();
            let scalar = move |x: &[f64]| {
                let jet = fieldc.eval_jet(x, order).expect("in domain");
                if order == 1 {
                    jet.grad_norm_sq().sqrt()
                } else {
                    jet.hess_norm_sq().sqrt()
                }
            };
            lorentz_norm_grid_sampled(&scalar, center, r, resolution, p_eff, q_eff)?
        };
        total += norm_result.value()?;
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// oscillation
// ---------------------------------------------------------------------------

fn oscillation_value(field: &FieldSpec, center_norm: f64, r: f64) -> Result<f64> {
    let profiles = field
        .profiles()
        .ok_or_else(|| Error::Config("oscillation scans need radial fields".into()))?;
    // radii swept inside B_r(c): the mathematical domain reaches the origin
    // even when numerical evaluation is cut off, so ranges use lo = 0
    let lo = (center_norm - r).max(0.0);
    let hi = center_norm + r;
    let hi = match field.r_max {
        Some(r_max) => hi.min(r_max),
        None => hi,
    };
    let mut osc = 0.0f64;
    for profile in profiles {
        match profile.range(lo, hi) {
            Some((a, b)) => osc = osc.max(b - a),
            None => {
                // numeric profiles: dense sampling fallback
                let steps = 512;
                let mut min = f64::INFINITY;
                let mut max = f64::NEG_INFINITY;
                let lo_eff = lo.max(field.r_min).max(hi * 1e-12);
                for i in 0..=steps {
                    let rho = lo_eff + (hi - lo_eff) * i as f64 / steps as f64;
                    let v = profile.jet(rho.max(lo_eff), 0)?.value();
                    min = min.min(v);
                    max = max.max(v);
                }
                osc = osc.max(max - min);
            }
        }
    }
    Ok(osc)
}

/// Oscillation of the field over balls B_r(center): the max over components
/// of sup minus inf. Exact for composition-chain profiles (trig ranges are
/// computed from argument intervals, not sampled).
pub fn oscillation_scan(field: &FieldSpec, center_norm: f64, radii: &[f64]) -> Result<ScanReport> {
    let mut values = Vec::with_capacity(radii.len());
    for &r in radii {
        values.push(oscillation_value(field, center_norm, r)?);
    }
    let fit = fit_outcome(radii, &values);
    Ok(ScanReport {
        quantity: "oscillation".into(),
        center: vec![center_norm],
        radii: radii.to_vec(),
        values,
        fit: fit.fit().copied(),
    })
}

// ---------------------------------------------------------------------------
// Sobolev membership
// ---------------------------------------------------------------------------

/// One integral entering a membership decision.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedIntegral {
    pub name: String,
    pub value: f64,
    pub error: f64,
}

/// Membership verdict for W^{k,p} on the field's domain.
#[derive(Debug, Clone, PartialEq)]
pub enum MembershipVerdict {
    Member { integrals: Vec<NamedIntegral> },
    NotMember {
        failing: String,
        evidence: DivergenceEvidence,
        converged: Vec<NamedIntegral>,
    },
    Inconclusive { reason: String },
}

impl MembershipVerdict {
    pub fn is_member(&self) -> bool {
        matches!(self, MembershipVerdict::Member { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            MembershipVerdict::Member { .. } => "Member",
            MembershipVerdict::NotMember { .. } => "NotMember",
            MembershipVerdict::Inconclusive { .. } => "Inconclusive",
        }
    }
}

/// Decides membership of the field in W^{k,p}(Omega) by integrating the
/// k-th derivative magnitudes over the domain and classifying the dyadic
/// descent at the origin.
///
/// k = 1 integrates |grad u|^p; k = 2 integrates |grad u|^(2p) together
/// with |grad^2 u|^p, using the closed f-bound components for the doubly
/// logarithmic family and exact jets otherwise. Tail certification is
/// relative at [`tol::MEMBERSHIP_TAIL_REL`]: the doubly logarithmic
/// integrands decay only polynomially per dyadic annulus, which bounds how
/// tightly a finite descent can certify the remainder.
pub fn sobolev_membership(field: &FieldSpec, k: usize, p: f64) -> Result<MembershipVerdict> {
    if k != 1 && k != 2 {
        return Err(Error::Config(format!("membership order k={k} must be 1 or 2")));
    }
    if !(p >= 1.0) {
        return Err(Error::Config(format!("membership index p={p} must be at least 1")));
    }
    if !field.is_radial() {
        return Err(Error::Config(
            "membership scans cover the radial catalog; polynomial fields are smooth".into(),
        ));
    }
    let n = field.dim_n;
    let outer = field.r_max.unwrap_or(1.0);
    let deep = field.with_inner_cutoff(field.r_min.min(DEEP_CUTOFF));

    type Integrand = Box<dyn Fn(f64) -> f64>;
    let mut integrands: Vec<(String, Integrand)> = Vec::new();
    if k == 1 {
        let f = deep.clone();
        integrands.push((
            format!("grad^{p}"),
            Box::new(move |rho: f64| f.radial_derived(rho, 1).expect("in domain").grad_norm.powf(p)),
        ));
    } else if field.family == Family::LogLog4D {
        // |grad u|^(2p) = (1/(r f))^(2p) and the f-bound Hessian component
        // (|grad^2 f|/f)^p = (2/(r^2 f))^p, f = log(1/r)
        integrands.push((
            format!("grad^{}", 2.0 * p),
            Box::new(move |rho: f64| {
                let f = -rho.ln();
                (1.0 / (rho * f)).powf(2.0 * p)
            }),
        ));
        integrands.push((
            format!("hess_bound^{p}"),
            Box::new(move |rho: f64| {
                let f = -rho.ln();
                (2.0 / (rho * rho * f)).powf(p)
            }),
        ));
    } else {
        let f1 = deep.clone();
        integrands.push((
            format!("grad^{}", 2.0 * p),
            Box::new(move |rho: f64| {
                f1.radial_derived(rho, 1).expect("in domain").grad_norm.powf(2.0 * p)
            }),
        ));
        let f2 = deep.clone();
        integrands.push((
            format!("hess^{p}"),
            Box::new(move |rho: f64| {
                f2.radial_derived(rho, 2).expect("in domain").hess_norm.powf(p)
            }),
        ));
    }

    let mut converged = Vec::new();
    for (name, h) in integrands {
        match integrate_radial(&h, 0.0, outer, n, Tol::rel(tol::MEMBERSHIP_TAIL_REL), DEEP_CUTOFF) {
            Ok(res) => {
                if let Some(ev) = res.divergence() {
                    return Ok(MembershipVerdict::NotMember {
                        failing: name,
                        evidence: ev.clone(),
                        converged,
                    });
                }
                converged.push(NamedIntegral {
                    name,
                    value: res.value()?,
                    error: res.error_estimate(),
                });
            }
            Err(Error::ToleranceNotMet { tail, .. }) => {
                return Ok(MembershipVerdict::Inconclusive {
                    reason: format!("integral {name} undecided at floor (tail {tail:.3e})"),
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(MembershipVerdict::Member { integrals: converged })
}

// ---------------------------------------------------------------------------
// harmonic decay constants
// ---------------------------------------------------------------------------

/// One measured ratio of the decay-constant experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayRatioRow {
    pub field_index: usize,
    pub theta: f64,
    pub center: Vec<f64>,
    pub ratio: f64,
}

/// Result of the decay-constant experiment over a corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayConstantScan {
    pub max_ratio: f64,
    pub rows: Vec<DecayRatioRow>,
}

/// Measures sup over corpus x thetas x centers of
/// ||grad phi||_{L^{n,inf}(B_theta(x))} / (theta ||grad phi||_{L^{n,inf}(B_1)}),
/// optionally paired with the L^{n/2,inf} norm of the Hessian (the
/// biharmonic variant). The assertion carried by the experiment is
/// finiteness and sampling stability of the maximum, not a particular value.
pub fn harmonic_decay_constant(
    corpus: &[FieldSpec],
    thetas: &[f64],
    centers: &[Vec<f64>],
    sample_count: usize,
    paired: bool,
) -> Result<DecayConstantScan> {
    if corpus.is_empty() {
        return Err(Error::Config("empty corpus".into()));
    }
    for &theta in thetas {
        if !(theta > 0.0 && theta < 0.25) {
            return Err(Error::Config(format!("theta={theta} must lie in (0, 1/4)")));
        }
    }
    for c in centers {
        if norm(c) > 0.25 {
            return Err(Error::Config("centers must lie in B_{1/4}".into()));
        }
    }
    let grad_order = if paired { 2 } else { 1 };
    let mut rows = Vec::new();
    let mut max_ratio = 0.0f64;
    let origin = vec![0.0; corpus[0].dim_n];
    for (idx, field) in corpus.iter().enumerate() {
        let n = field.dim_n as f64;
        let denom =
            ball_lorentz_value(field, &origin, 1.0, n, QIndex::Infinity, grad_order, sample_count)?;
        if denom <= 1e-12 {
            // zero-gradient entries have no ratio (guard case)
            continue;
        }
        for &theta in thetas {
            for center in centers {
                let num = ball_lorentz_value(
                    field,
                    center,
                    theta,
                    n,
                    QIndex::Infinity,
                    grad_order,
                    sample_count,
                )?;
                let ratio = num / (theta * denom);
                max_ratio = max_ratio.max(ratio);
                rows.push(DecayRatioRow {
                    field_index: idx,
                    theta,
                    center: center.clone(),
                    ratio,
                });
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Config("corpus contains only zero-gradient fields".into()));
    }
    Ok(DecayConstantScan { max_ratio, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{comparison_corpus, CorpusKind};
    use crate::special::unit_ball_volume;

    #[test]
    fn morrey_of_linear_field_is_exact() {
        // u = x1 => |grad u| = 1: M_2(x0, r) = b_4 r^2 in n = 4
        let poly = crate::field::Poly::monomial(vec![1, 0, 0, 0], 1.0);
        let field = FieldSpec::polynomial(poly, Family::HarmonicPoly);
        let m = morrey_subnorm(&field, 0.3, 0.2, 2.0).unwrap();
        let want = unit_ball_volume(4) * 0.2f64.powi(2);
        assert!(((m - want) / want).abs() < 2e-3, "{m} vs {want}");
    }

    #[test]
    fn morrey_power_law_slope() {
        // u = |x|^alpha: log M_p(0, r) has slope p alpha
        let n = 4;
        for (alpha, p) in [(0.3, 2.0), (0.7, 3.0)] {
            let field = FieldSpec::power_law(1.0, alpha, n);
            let radii: Vec<f64> = (0..8).map(|l| 0.5 * 0.6f64.powi(l)).collect();
            let scan = morrey_scan(&field, 0.0, &radii, p).unwrap();
            let fit = scan.fit.clean().expect("clean exponent");
            assert!(
                (fit.slope - p * alpha).abs() < 0.05,
                "alpha={alpha} p={p}: slope {}",
                fit.slope
            );
        }
    }

    #[test]
    fn morrey_critical_sinlog_increments_are_constant() {
        // at p = n the integral diverges; per-decade annulus increments are
        // (n b_n)(n-2)^n ln 10
        let n = 4;
        let field = FieldSpec::sin_log_second_order(n).unwrap();
        let radii: Vec<f64> = (0..6).map(|j| (-2.0f64).exp() * 10f64.powi(-j)).collect();
        let scan = morrey_scan(&field, 0.0, &radii, n as f64).unwrap();
        assert!(scan.increments_mode);
        let want = n as f64 * unit_ball_volume(n) * 2.0f64.powi(n as i32) * 10.0f64.ln();
        for v in &scan.report.values {
            assert!(((v - want) / want).abs() < 1e-9, "{v} vs {want}");
        }
    }

    #[test]
    fn decay_scan_constant_gradient_slope_one() {
        // harmonic phi = x1: norm on B_rho is b_n^(1/n) rho, slope exactly 1
        let poly = crate::field::Poly::monomial(vec![1, 0, 0, 0, 0], 1.0);
        let field = FieldSpec::polynomial(poly, Family::HarmonicPoly);
        let config = DecayScanConfig {
            center: vec![0.0; 5],
            r0: 0.2,
            theta: 0.5,
            count: 5,
            quantity: ScanQuantity::Lorentz { p: 5.0, q: QIndex::Infinity, grad_order: 1 },
            resolution: 3000,
            fit: true,
            smallness_threshold: None,
        };
        let scan = decay_scan(&field, &config).unwrap();
        let fit = scan.fit.clean().expect("clean slope");
        assert!((fit.slope - 1.0).abs() < 0.02, "slope {}", fit.slope);
        let want = unit_ball_volume(5).powf(0.2) * 0.2;
        assert!(((scan.report.values[0] - want) / want).abs() < 0.02);
    }

    #[test]
    fn decay_scan_critical_family_has_flat_norms() {
        // |grad u| = (n-2)/|x| is scale invariant at p = n: slope ~ 0
        let field = FieldSpec::sin_log_second_order(4).unwrap();
        let config = DecayScanConfig {
            center: vec![0.0; 4],
            r0: 0.1,
            theta: 0.1,
            count: 5,
            quantity: ScanQuantity::Lorentz { p: 4.0, q: QIndex::Infinity, grad_order: 1 },
            resolution: 1 << 13,
            fit: true,
            smallness_threshold: None,
        };
        let scan = decay_scan(&field, &config).unwrap();
        let first = scan.report.values[0];
        for v in &scan.report.values {
            assert!(((v - first) / first).abs() < 0.02, "{v} vs {first}");
        }
        if let Some(fit) = scan.fit.fit() {
            assert!(fit.slope.abs() < 0.02, "slope {}", fit.slope);
        }
        assert!(!scan.halving.halving_observed);
    }

    #[test]
    fn paired_fourth_order_decay_is_flat_for_the_critical_family() {
        // |grad u| ~ 1/r and |grad^2 u| ~ 1/r^2 are scale invariant at the
        // paired indices (n, inf) and (n/2, inf): the summed norm is flat
        let field = FieldSpec::sin_log_fourth_order(6).unwrap();
        let config = DecayScanConfig {
            center: vec![0.0; 6],
            r0: 0.1,
            theta: 0.2,
            count: 4,
            quantity: ScanQuantity::Lorentz { p: 6.0, q: QIndex::Infinity, grad_order: 2 },
            resolution: 1 << 12,
            fit: true,
            smallness_threshold: None,
        };
        let scan = decay_scan(&field, &config).unwrap();
        let first = scan.report.values[0];
        for v in &scan.report.values {
            assert!(((v - first) / first).abs() < 0.02, "{v} vs {first}");
        }
    }

    #[test]
    fn decay_scan_power_law_slope_matches_dilation() {
        // grad |x|^1.5 ~ |x|^0.5: norm on B_rho scales like rho^(0.5 + n/p),
        // at p = n = 4 the analytic slope is 1.5
        let field = FieldSpec::power_law(1.0, 1.5, 4);
        let config = DecayScanConfig {
            center: vec![0.0; 4],
            r0: 0.5,
            theta: 0.5,
            count: 6,
            quantity: ScanQuantity::Lorentz { p: 4.0, q: QIndex::Infinity, grad_order: 1 },
            resolution: 4096,
            fit: true,
            smallness_threshold: None,
        };
        let scan = decay_scan(&field, &config).unwrap();
        let fit = scan.fit.clean().expect("clean slope");
        assert!((fit.slope - 1.5).abs() < 0.03, "slope {}", fit.slope);
    }

    #[test]
    fn oscillation_of_loglog_is_two() {
        let field = FieldSpec::log_log_4d();
        let radii = [1e-8, 1e-6, 1e-4, (-4.0f64).exp()];
        let report = oscillation_scan(&field, 0.0, &radii).unwrap();
        for v in &report.values {
            assert!((v - 2.0).abs() < 1e-12, "osc {v}");
        }
    }

    #[test]
    fn oscillation_of_power_law_decays() {
        let field = FieldSpec::power_law(1.0, 0.5, 4);
        let radii = [1e-4, 1e-3, 1e-2, 0.1];
        let report = oscillation_scan(&field, 0.0, &radii).unwrap();
        for (r, v) in radii.iter().zip(&report.values) {
            assert!((v - r.sqrt()).abs() < 1e-12);
        }
        let fit = report.fit.expect("fit");
        assert!((fit.slope - 0.5).abs() < 1e-9);
    }

    #[test]
    fn oscillation_of_constant_is_zero() {
        let field = FieldSpec::constant(3.0, 4);
        let report = oscillation_scan(&field, 0.0, &[0.1, 0.2]).unwrap();
        assert!(report.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn oscillation_off_center_uses_the_radius_interval() {
        // |x|^0.5 over B_0.1(c) with |c| = 0.5: radii sweep [0.4, 0.6]
        let field = FieldSpec::power_law(1.0, 0.5, 3);
        let report = oscillation_scan(&field, 0.5, &[0.1]).unwrap();
        let want = 0.6f64.sqrt() - 0.4f64.sqrt();
        assert!((report.values[0] - want).abs() < 1e-14);
    }

    #[test]
    fn membership_table_sinlog_second_order() {
        let field = FieldSpec::sin_log_second_order(4).unwrap();
        for p in [2.0, 3.0, 3.9] {
            let verdict = sobolev_membership(&field, 1, p).unwrap();
            assert!(verdict.is_member(), "p={p}: {}", verdict.label());
        }
        let verdict = sobolev_membership(&field, 1, 4.0).unwrap();
        match verdict {
            MembershipVerdict::NotMember { evidence, .. } => {
                // per-annulus increment (n b_n)(n-2)^n log 2
                let want = 4.0 * unit_ball_volume(4) * 16.0 * 2.0f64.ln();
                for inc in &evidence.increments {
                    assert!(((inc - want) / want).abs() < 1e-10, "{inc} vs {want}");
                }
            }
            other => panic!("expected NotMember, got {}", other.label()),
        }
    }

    #[test]
    fn membership_table_loglog() {
        let field = FieldSpec::log_log_4d();
        let verdict = sobolev_membership(&field, 2, 2.0).unwrap();
        assert!(verdict.is_member(), "{:?}", verdict.label());
        if let MembershipVerdict::Member { integrals } = &verdict {
            assert_eq!(integrals.len(), 2);
            assert!(integrals.iter().all(|i| i.value.is_finite() && i.value > 0.0));
        }
    }

    #[test]
    fn membership_table_sinlog_fourth_order() {
        let field = FieldSpec::sin_log_fourth_order(6).unwrap();
        for p in [2.0, 2.9] {
            let verdict = sobolev_membership(&field, 2, p).unwrap();
            assert!(verdict.is_member(), "p={p}: {}", verdict.label());
        }
        let verdict = sobolev_membership(&field, 2, 3.0).unwrap();
        assert!(matches!(verdict, MembershipVerdict::NotMember { .. }));
    }

    #[test]
    fn membership_monotone_in_p() {
        // Member at p implies Member at p' < p on the bounded domain
        let field = FieldSpec::sin_log_second_order(5).unwrap();
        let grid = [2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 4.9, 5.0];
        let verdicts: Vec<bool> = grid
            .iter()
            .map(|&p| sobolev_membership(&field, 1, p).unwrap().is_member())
            .collect();
        for w in verdicts.windows(2) {
            assert!(w[0] || !w[1], "membership not monotone: {verdicts:?}");
        }
        assert!(verdicts[0]);
        assert!(!verdicts[grid.len() - 1]);
    }

    #[test]
    fn harmonic_decay_linear_field_ratio_is_one() {
        // phi = x1: both norms closed-form, ratio exactly 1 for all theta, x
        let poly = crate::field::Poly::monomial(vec![1, 0, 0, 0, 0], 1.0);
        let corpus = vec![FieldSpec::polynomial(poly, Family::HarmonicPoly)];
        let scan = harmonic_decay_constant(
            &corpus,
            &[0.1, 0.2],
            &[vec![0.0; 5], vec![0.1, 0.05, 0.0, 0.0, 0.0]],
            2048,
            false,
        )
        .unwrap();
        assert!((scan.max_ratio - 1.0).abs() < 0.05, "ratio {}", scan.max_ratio);
    }

    #[test]
    fn harmonic_decay_corpus_is_stable_under_refinement() {
        let corpus: Vec<FieldSpec> = comparison_corpus(CorpusKind::Harmonic, 5, 2)
            .unwrap()
            .into_iter()
            .take(8)
            .collect();
        let centers = vec![vec![0.0; 5], vec![0.12, -0.08, 0.0, 0.0, 0.05]];
        let coarse = harmonic_decay_constant(&corpus, &[0.1, 0.2], &centers, 1500, false).unwrap();
        let fine = harmonic_decay_constant(&corpus, &[0.1, 0.2], &centers, 3000, false).unwrap();
        assert!(coarse.max_ratio.is_finite() && fine.max_ratio.is_finite());
        let rel = (fine.max_ratio - coarse.max_ratio).abs() / fine.max_ratio;
        assert!(rel < 0.1, "refinement moved the max ratio by {rel:.3}");
    }

    #[test]
    fn config_validation() {
        let field = FieldSpec::log_log_4d();
        let bad = DecayScanConfig {
            center: vec![0.0; 4],
            r0: 0.2, // exceeds the domain radius e^-2
            theta: 0.5,
            count: 3,
            quantity: ScanQuantity::Oscillation,
            resolution: 64,
            fit: false,
            smallness_threshold: None,
        };
        assert!(decay_scan(&field, &bad).is_err());
    }
}
