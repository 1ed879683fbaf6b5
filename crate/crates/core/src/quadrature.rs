//! Adaptive 1-D quadrature with origin-singularity handling.
//!
//! The panel rule is 15-point Gauss–Kronrod with the embedded 7-point Gauss
//! estimate; integrals with a singular endpoint at the origin are summed over
//! dyadic annuli [2^(-k-1) b, 2^(-k) b] and the sequence of annulus increments
//! is classified by [`detect_divergence`]: geometric decay converges with a
//! certified tail bound, non-decaying increments are flagged divergent, and
//! polynomial decay k^(-sigma) is resolved by a log-log fit of the increments.

use crate::error::{Error, Result};
use crate::special::{fit_line, pairwise_sum, sphere_cap_fraction, unit_ball_volume};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// 15-point Kronrod abscissae on [0, 1] (positive half).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

/// 7-point Gauss weights embedded in the Kronrod rule.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod panel: value, error estimate, integral of |f|.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut res_kronrod = f_center * WGK[7];
    let mut res_gauss = f_center * WG[3];
    let mut res_abs = res_kronrod.abs();

    let mut fv = [0.0f64; 15];
    fv[7] = f_center;
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv[j] = f1;
        fv[14 - j] = f2;
        let sum = f1 + f2;
        res_kronrod += WGK[j] * sum;
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * sum;
        }
    }

    let mean = res_kronrod * 0.5;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }

    let err = ((res_kronrod - res_gauss) * half).abs();
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();

    // QUADPACK-style error rescaling
    let mut scaled = err;
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }

    (res_kronrod * half, scaled)
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    err: f64,
    a: f64,
    b: f64,
    value: f64,
    id: u64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.id == other.id
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| self.id.cmp(&other.id))
    }
}

/// Globally adaptive integration of `f` over [a, b].
///
/// Bisects the panel with the largest error estimate until the summed
/// estimate drops below `tol` or the panel budget is exhausted. Returns
/// (value, error_estimate, panels_used).
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, budget: usize) -> (f64, f64, usize) {
    if a == b {
        return (0.0, 0.0, 0);
    }
    let (v, e) = gk15(f, a, b);
    let mut heap = BinaryHeap::new();
    let mut next_id = 0u64;
    heap.push(Segment { err: e, a, b, value: v, id: next_id });
    let mut total_err = e;
    let mut panels = 1usize;

    while total_err > tol && panels < budget {
        let worst = heap.pop().expect("heap nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval at floating-point resolution; keep as-is
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(f, worst.a, mid);
        let (v2, e2) = gk15(f, mid, worst.b);
        total_err += e1 + e2 - worst.err;
        next_id += 1;
        heap.push(Segment { err: e1, a: worst.a, b: mid, value: v1, id: next_id });
        next_id += 1;
        heap.push(Segment { err: e2, a: mid, b: worst.b, value: v2, id: next_id });
        panels += 1;
    }

    let mut segs: Vec<Segment> = heap.into_vec();
    segs.sort_by(|s, t| s.a.total_cmp(&t.a));
    let values: Vec<f64> = segs.iter().map(|s| s.value).collect();
    (pairwise_sum(&values), total_err, panels)
}

/// Absolute plus relative tolerance for an integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tol {
    pub abs: f64,
    pub rel: f64,
}

impl Tol {
    pub fn abs(tol: f64) -> Self {
        Tol { abs: tol, rel: 0.0 }
    }

    pub fn rel(tol: f64) -> Self {
        Tol { abs: 0.0, rel: tol }
    }

    fn effective(&self, scale: f64) -> f64 {
        (self.abs + self.rel * scale.abs()).max(1e-300)
    }
}

/// Thresholds for classifying dyadic-annulus increment sequences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceConfig {
    /// increments with consecutive ratios at or below this are geometric decay
    pub geo_ratio: f64,
    /// increments with consecutive ratios at or above this do not decay
    pub growth_ratio: f64,
    /// number of trailing increments examined
    pub window: usize,
    /// partial sums beyond this are flagged divergent outright
    pub ceiling: f64,
    /// number of trailing increments used for the polynomial-decay fit
    pub poly_window: usize,
    /// half-width of the indeterminate band around decay exponent 1
    pub poly_margin: f64,
    /// maximum RMS residual (in log space) for the fit to be trusted
    pub poly_fit_residual: f64,
}

impl Default for DivergenceConfig {
    fn default() -> Self {
        DivergenceConfig {
            geo_ratio: 0.95,
            growth_ratio: 0.999,
            window: 5,
            ceiling: 1e12,
            poly_window: 8,
            poly_margin: 0.2,
            poly_fit_residual: 0.05,
        }
    }
}

/// Outcome of classifying an increment sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum DivergenceVerdict {
    /// The series converges; `tail_bound` bounds the omitted remainder.
    Converged { tail_bound: f64 },
    Divergent { description: String },
    Inconclusive { reason: String },
}

/// Classifies dyadic-annulus increments as convergent, divergent or
/// inconclusive.
///
/// Geometric decay (window ratios <= `geo_ratio`) converges once the
/// geometric tail bound drops below `tol`; windows of non-decaying
/// increments (ratios >= `growth_ratio`) or partial sums beyond `ceiling`
/// are divergent; power-law decay k^(-sigma) detected by a log-log fit
/// converges for sigma well above 1 and diverges for sigma well below 1.
pub fn detect_divergence(increments: &[f64], tol: f64, cfg: &DivergenceConfig) -> DivergenceVerdict {
    if increments.len() < 8 {
        return DivergenceVerdict::Inconclusive {
            reason: format!("only {} increments (need 8)", increments.len()),
        };
    }
    let mags: Vec<f64> = increments.iter().map(|i| i.abs()).collect();
    let window = cfg.window.max(2);
    let tail_window = &mags[mags.len() - window..];

    if tail_window.iter().all(|&m| m == 0.0) {
        return DivergenceVerdict::Converged { tail_bound: 0.0 };
    }

    let partial = pairwise_sum(increments);
    if partial.abs() > cfg.ceiling && *tail_window.last().unwrap() > 0.0 {
        return DivergenceVerdict::Divergent {
            description: format!(
                "partial sum {partial:.6e} exceeded ceiling {:.3e} with nonvanishing increments",
                cfg.ceiling
            ),
        };
    }

    // consecutive ratios over the trailing window (window ratios need window+1 terms)
    let start = mags.len().saturating_sub(window + 1);
    let ratios: Vec<f64> = mags[start..]
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .collect();
    let geo_tail = if ratios.len() >= window.min(2) && ratios.iter().all(|&r| r <= cfg.geo_ratio) {
        let rho = ratios.iter().cloned().fold(0.0f64, f64::max);
        Some(mags.last().unwrap() * rho / (1.0 - rho))
    } else {
        None
    };

    // polynomial fit: increments ~ C k^(-sigma). Constant increments are the
    // sigma = 0 case; slow polynomial decay has window ratios creeping toward
    // 1, which a fixed ratio threshold cannot tell from constancy, so the fit
    // must run before any non-decay test on ratios. Where both the geometric
    // and the polynomial model fit, the certificate takes the larger tail:
    // a slowly creeping ratio sequence satisfies the geometric window test
    // long before its geometric bound is valid.
    let pw = cfg.poly_window.max(4).min(mags.len());
    let seg = &mags[mags.len() - pw..];
    let poly_fit = if seg.iter().all(|&m| m > 0.0) {
        let k0 = mags.len() - pw;
        let xs: Vec<f64> = (0..pw).map(|j| ((k0 + j + 1) as f64).ln()).collect();
        let ys: Vec<f64> = seg.iter().map(|m| m.ln()).collect();
        let fit = fit_line(&xs, &ys);
        (fit.residual <= cfg.poly_fit_residual).then_some(fit)
    } else {
        None
    };

    match (geo_tail, poly_fit) {
        (Some(geo), Some(fit)) => {
            let sigma = -fit.slope;
            if sigma >= 1.0 + cfg.poly_margin {
                let poly = 2.0 * mags.last().unwrap() * mags.len() as f64 / (sigma - 1.0);
                let tail = geo.max(poly);
                if tail <= tol {
                    return DivergenceVerdict::Converged { tail_bound: tail };
                }
                return DivergenceVerdict::Inconclusive {
                    reason: format!("tail bound {tail:.3e} above tolerance {tol:.3e}"),
                };
            }
            // decaying ratios but a near-or-sub-harmonic fit: contradictory
            DivergenceVerdict::Inconclusive {
                reason: format!("geometric window but decay exponent sigma={sigma:.3}"),
            }
        }
        (Some(geo), None) => {
            if geo <= tol {
                return DivergenceVerdict::Converged { tail_bound: geo };
            }
            DivergenceVerdict::Inconclusive {
                reason: format!("geometric decay but tail bound {geo:.3e} above tolerance {tol:.3e}"),
            }
        }
        (None, Some(fit)) => {
            let sigma = -fit.slope;
            let k_last = mags.len() as f64;
            if sigma >= 1.0 + cfg.poly_margin {
                // remainder of sum C k^-sigma beyond k_last, with safety factor 2
                let tail = 2.0 * mags.last().unwrap() * k_last / (sigma - 1.0);
                if tail <= tol {
                    return DivergenceVerdict::Converged { tail_bound: tail };
                }
                return DivergenceVerdict::Inconclusive {
                    reason: format!(
                        "power decay sigma={sigma:.3} but tail estimate {tail:.3e} above tolerance"
                    ),
                };
            }
            if sigma <= 1.0 - cfg.poly_margin {
                return DivergenceVerdict::Divergent {
                    description: format!(
                        "last {pw} increments are bounded below (decay exponent sigma={sigma:.3} < 1)"
                    ),
                };
            }
            DivergenceVerdict::Inconclusive {
                reason: format!("decay exponent sigma={sigma:.3} too close to 1"),
            }
        }
        (None, None) => {
            // no clean power law: flag clear growth, otherwise try the
            // envelope of an oscillating-sign integrand before giving up
            if ratios.len() >= window.min(2) && ratios.iter().all(|&r| r >= cfg.growth_ratio) {
                return DivergenceVerdict::Divergent {
                    description: format!(
                        "last {} increments grow (min ratio {:.6})",
                        window,
                        ratios.iter().cloned().fold(f64::INFINITY, f64::min)
                    ),
                };
            }
            // sign-alternating integrands dip through zero, which defeats the
            // ratio and fit tests; compare window maxima of |increment|
            // instead: a halving envelope certifies a geometric tail
            if mags.len() >= 2 * window {
                let env_new = mags[mags.len() - window..].iter().cloned().fold(0.0f64, f64::max);
                let env_old = mags[mags.len() - 2 * window..mags.len() - window]
                    .iter()
                    .cloned()
                    .fold(0.0f64, f64::max);
                if env_old > 0.0 && env_new <= 0.5 * env_old {
                    let q = (env_new / env_old).powf(1.0 / window as f64);
                    let tail = 2.0 * env_new * q / (1.0 - q);
                    if tail <= tol {
                        return DivergenceVerdict::Converged { tail_bound: tail };
                    }
                    return DivergenceVerdict::Inconclusive {
                        reason: format!("decaying envelope but tail bound {tail:.3e} above tolerance"),
                    };
                }
            }
            DivergenceVerdict::Inconclusive {
                reason: "no geometric, growth or power-law pattern in trailing increments".into(),
            }
        }
    }
}

/// Per-annulus record of a dyadic integration.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DivergenceEvidence {
    /// annulus increments, outermost first
    pub increments: Vec<f64>,
    /// running partial sums
    pub partial_sums: Vec<f64>,
    pub description: String,
}

/// Verdict of a quadrature with possible origin singularity.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Converged { value: f64, error_estimate: f64 },
    Divergent(DivergenceEvidence),
}

/// Result of a radial integration.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureResult {
    pub verdict: Verdict,
    pub subdivisions: usize,
}

impl QuadratureResult {
    /// The converged value, or an error describing the divergence.
    pub fn value(&self) -> Result<f64> {
        match &self.verdict {
            Verdict::Converged { value, .. } => Ok(*value),
            Verdict::Divergent(ev) => Err(Error::Config(format!("integral divergent: {}", ev.description))),
        }
    }

    pub fn error_estimate(&self) -> f64 {
        match &self.verdict {
            Verdict::Converged { error_estimate, .. } => *error_estimate,
            Verdict::Divergent(_) => f64::INFINITY,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self.verdict, Verdict::Divergent(_))
    }

    pub fn divergence(&self) -> Option<&DivergenceEvidence> {
        match &self.verdict {
            Verdict::Divergent(ev) => Some(ev),
            _ => None,
        }
    }
}

/// Default panel budget (2^20).
pub const DEFAULT_BUDGET: usize = 1 << 20;

/// Maximum number of dyadic annuli descended toward the origin.
const MAX_ANNULI: usize = 1200;

/// Integrates h(|x|) over the annulus a <= |x| <= b in R^n, i.e.
/// the 1-D integral of h(r) n b_n r^(n-1) dr.
///
/// With a = 0 the integrand may be singular at the origin: dyadic
/// subintervals are accumulated from b inward until the tail is certified
/// below tolerance or divergence is flagged. `floor` is the smallest radius
/// the integrand may be evaluated at (0 descends to the floating-point
/// limit); failing to reach a verdict by the floor is a `ToleranceNotMet`
/// error.
pub fn integrate_radial<F: Fn(f64) -> f64>(
    h: &F,
    a: f64,
    b: f64,
    n: usize,
    tol: Tol,
    floor: f64,
) -> Result<QuadratureResult> {
    integrate_radial_cfg(h, a, b, n, tol, floor, &DivergenceConfig::default())
}

/// As [`integrate_radial`] with explicit divergence-detection thresholds.
pub fn integrate_radial_cfg<F: Fn(f64) -> f64>(
    h: &F,
    a: f64,
    b: f64,
    n: usize,
    tol: Tol,
    floor: f64,
    cfg: &DivergenceConfig,
) -> Result<QuadratureResult> {
    if !(a >= 0.0 && b > a) {
        return Err(Error::Config(format!("invalid radial interval [{a}, {b}]")));
    }
    let weight = unit_sphere_weight(n);
    let integrand = |r: f64| h(r) * weight * r.powi(n as i32 - 1);

    if a > 0.0 {
        let (value, err, panels) = adaptive(&integrand, a, b, tol.effective(1.0) * 0.5, DEFAULT_BUDGET);
        let (value, err, panels) = if tol.rel > 0.0 && err > tol.effective(value) {
            adaptive(&integrand, a, b, tol.effective(value) * 0.5, DEFAULT_BUDGET)
        } else {
            (value, err, panels)
        };
        if err > tol.effective(value) {
            return Err(Error::ToleranceNotMet { tol: tol.effective(value), panels, tail: err });
        }
        return Ok(QuadratureResult {
            verdict: Verdict::Converged { value, error_estimate: err },
            subdivisions: panels,
        });
    }

    // dyadic descent toward the origin
    let mut increments: Vec<f64> = Vec::new();
    let mut partials: Vec<f64> = Vec::new();
    let mut panel_errors: Vec<f64> = Vec::new();
    let mut panels_total = 0usize;
    let mut hi = b;
    let floor = floor.max(1e-306);

    for k in 0..MAX_ANNULI {
        let lo = hi * 0.5;
        // never evaluate the integrand below the floor: bail before touching
        // an annulus that straddles it
        if lo < floor || panels_total >= DEFAULT_BUDGET {
            return Err(Error::ToleranceNotMet {
                tol: tol.effective(partials.last().copied().unwrap_or(0.0)),
                panels: panels_total,
                tail: increments.last().map(|i| i.abs()).unwrap_or(f64::INFINITY),
            });
        }
        let scale_hint = increments.last().map(|i: &f64| i.abs()).unwrap_or(1.0);
        // the floor must sit above the 50-eps resabs floor of the panel rule,
        // or a stalled annulus burns its whole budget
        let panel_tol = (tol.effective(scale_hint) / 2f64.powi((k as i32 + 2).min(40)))
            .max(1e-12 * scale_hint)
            .max(1e-302);
        let (inc, err, panels) = adaptive(&integrand, lo, hi, panel_tol, 2048);
        increments.push(inc);
        panel_errors.push(err);
        panels_total += panels;
        let partial = pairwise_sum(&increments);
        partials.push(partial);

        if increments.len() >= 8 {
            // panel errors are tracked separately, so the full budget minus
            // what panels consumed is available for the tail certificate
            let remaining_tol =
                (tol.effective(partial.abs()) - pairwise_sum(&panel_errors)).max(0.0);
            match detect_divergence(&increments, remaining_tol, cfg) {
                DivergenceVerdict::Converged { tail_bound } => {
                    let err_total = pairwise_sum(&panel_errors) + tail_bound;
                    return Ok(QuadratureResult {
                        verdict: Verdict::Converged { value: partial, error_estimate: err_total },
                        subdivisions: panels_total,
                    });
                }
                DivergenceVerdict::Divergent { description } => {
                    return Ok(QuadratureResult {
                        verdict: Verdict::Divergent(DivergenceEvidence {
                            increments,
                            partial_sums: partials,
                            description,
                        }),
                        subdivisions: panels_total,
                    });
                }
                DivergenceVerdict::Inconclusive { .. } => {}
            }
        }
        hi = lo;
    }

    Err(Error::ToleranceNotMet {
        tol: tol.abs,
        panels: panels_total,
        tail: increments.last().map(|i| i.abs()).unwrap_or(0.0),
    })
}

fn unit_sphere_weight(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

/// Integrates a decaying function g over [tau0, infinity) by dyadic blocks
/// [tau0 2^k, tau0 2^(k+1)] with the same increment classification as the
/// radial origin descent. Used for log-substituted singular integrals.
pub fn integrate_log_tail<F: Fn(f64) -> f64>(g: &F, tau0: f64, tol: Tol) -> Result<QuadratureResult> {
    assert!(tau0 > 0.0);
    let cfg = DivergenceConfig::default();
    let mut increments = Vec::new();
    let mut partials = Vec::new();
    let mut panel_errors = Vec::new();
    let mut panels_total = 0usize;
    let mut lo = tau0;

    for k in 0..256 {
        let hi = lo * 2.0;
        let scale_hint = increments.last().map(|i: &f64| i.abs()).unwrap_or(1.0);
        let panel_tol = (tol.effective(scale_hint) / 2f64.powi((k + 2).min(40)))
            .max(1e-12 * scale_hint)
            .max(1e-302);
        let (inc, err, panels) = adaptive(g, lo, hi, panel_tol, 2048);
        increments.push(inc);
        panel_errors.push(err);
        panels_total += panels;
        let partial = pairwise_sum(&increments);
        partials.push(partial);

        if increments.len() >= 8 {
            // panel errors are tracked separately, so the full budget minus
            // what panels consumed is available for the tail certificate
            let remaining_tol =
                (tol.effective(partial.abs()) - pairwise_sum(&panel_errors)).max(0.0);
            match detect_divergence(&increments, remaining_tol, &cfg) {
                DivergenceVerdict::Converged { tail_bound } => {
                    let err_total = pairwise_sum(&panel_errors) + tail_bound;
                    return Ok(QuadratureResult {
                        verdict: Verdict::Converged { value: partial, error_estimate: err_total },
                        subdivisions: panels_total,
                    });
                }
                DivergenceVerdict::Divergent { description } => {
                    return Ok(QuadratureResult {
                        verdict: Verdict::Divergent(DivergenceEvidence {
                            increments,
                            partial_sums: partials,
                            description,
                        }),
                        subdivisions: panels_total,
                    });
                }
                DivergenceVerdict::Inconclusive { .. } => {}
            }
        }
        lo = hi;
    }

    Err(Error::ToleranceNotMet {
        tol: tol.abs,
        panels: panels_total,
        tail: increments.last().map(|i| i.abs()).unwrap_or(0.0),
    })
}

/// Integrates the radial function h(|y|) over the off-center ball B_r(x0)
/// with |x0| = center_norm, reducing to a 1-D integral through the fraction
/// of each sphere |y| = rho inside the ball (spherical-cap solid angle).
pub fn integrate_offcenter_ball<F: Fn(f64) -> f64>(
    h: &F,
    center_norm: f64,
    r: f64,
    n: usize,
    tol: Tol,
    floor: f64,
) -> Result<QuadratureResult> {
    assert!(r > 0.0 && center_norm >= 0.0);
    let d = center_norm;
    if d <= 1e-12 * r {
        return integrate_radial(h, 0.0, r, n, tol, floor);
    }
    let weight = unit_sphere_weight(n);
    let band_integrand =
        |rho: f64| h(rho) * weight * rho.powi(n as i32 - 1) * sphere_cap_fraction(n, rho, d, r);

    let mut subdivisions = 0usize;
    let mut value = 0.0;
    let mut error = 0.0;

    if d < r {
        // spheres below r - d lie entirely inside the ball
        let inner = integrate_radial(h, 0.0, r - d, n, Tol { abs: tol.abs * 0.5, rel: tol.rel * 0.5 }, floor)?;
        subdivisions += inner.subdivisions;
        match inner.verdict {
            Verdict::Converged { value: v, error_estimate: e } => {
                value += v;
                error += e;
            }
            Verdict::Divergent(ev) => {
                return Ok(QuadratureResult {
                    verdict: Verdict::Divergent(ev),
                    subdivisions,
                })
            }
        }
    }

    let band_lo = (r - d).abs();
    let band_hi = r + d;
    let (v, e, panels) = adaptive(&band_integrand, band_lo, band_hi, tol.effective(value.abs().max(1.0)) * 0.25, DEFAULT_BUDGET);
    subdivisions += panels;
    value += v;
    error += e;

    if error > tol.effective(value.abs().max(1e-12)) {
        return Err(Error::ToleranceNotMet { tol: tol.effective(value), panels: subdivisions, tail: error });
    }
    Ok(QuadratureResult {
        verdict: Verdict::Converged { value, error_estimate: error },
        subdivisions,
    })
}

/// Integrates w(|x|, |x - c|, cos(theta)) over R^n for a center c with
/// |c| = d, where theta is the polar angle of x from the direction of c:
///
///   integral = omega_(n-2) int rho^(n-1) int_0^pi w(rho, dist, cos)
///              sin^(n-2)(theta) dtheta drho
///
/// with dist = sqrt(rho^2 + d^2 - 2 rho d cos). Radial range [rho_lo, rho_hi]
/// must contain the support. Used for weak-form pairings of a field radial
/// about the origin against a bump radial about c.
pub fn integrate_bicentric<W: Fn(f64, f64, f64) -> f64>(
    w: &W,
    d: f64,
    n: usize,
    rho_lo: f64,
    rho_hi: f64,
    tol: Tol,
) -> Result<QuadratureResult> {
    assert!(n >= 2);
    assert!(d > 0.0, "bicentric reduction needs an off-center weight");
    let omega = (n as f64 - 1.0) * unit_ball_volume(n - 1);
    let span = (rho_hi - rho_lo).max(1e-300);

    let run = |abs_target: f64| {
        let theta_tol = abs_target / (8.0 * span);
        let outer = |rho: f64| {
            let inner = |theta: f64| {
                let cos_t = theta.cos();
                let dist2 = rho * rho + d * d - 2.0 * rho * d * cos_t;
                let dist = dist2.max(0.0).sqrt();
                w(rho, dist, cos_t) * theta.sin().powi(n as i32 - 2)
            };
            let local_tol = theta_tol / (omega * rho.powi(n as i32 - 1)).max(1e-30);
            let (v, _e, _p) = adaptive(&inner, 0.0, std::f64::consts::PI, local_tol, 4096);
            omega * rho.powi(n as i32 - 1) * v
        };
        adaptive(&outer, rho_lo, rho_hi, abs_target * 0.5, 1 << 12)
    };

    // first pass establishes the scale, second pass meets a relative target
    let (probe, _e, _p) = run(tol.effective(1.0));
    let abs_target = tol.effective(probe.abs().max(1e-12));
    let (value, err, panels) = run(abs_target);
    if err > tol.effective(value.abs().max(1e-12)) {
        return Err(Error::ToleranceNotMet { tol: tol.effective(value), panels, tail: err });
    }
    Ok(QuadratureResult {
        verdict: Verdict::Converged { value, error_estimate: err },
        subdivisions: panels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_integrand_gives_ball_volume() {
        // h = 1 on [0,1], n = 4: value = b_4 = pi^2/2
        let res = integrate_radial(&|_r| 1.0, 0.0, 1.0, 4, Tol::abs(1e-12), 0.0).unwrap();
        let v = res.value().unwrap();
        assert!((v - PI * PI / 2.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn annulus_integral_is_plain_adaptive() {
        // integral of r^2 weight over [1, 2] in n = 3: 4 pi int r^4 = 4pi(32-1)/5
        let res = integrate_radial(&|r| r * r, 1.0, 2.0, 3, Tol::abs(1e-12), 0.0).unwrap();
        let want = 4.0 * PI * 31.0 / 5.0;
        assert!((res.value().unwrap() - want).abs() < 1e-9);
    }

    #[test]
    fn log_log_integrand_converges() {
        // h(r) = 1/(r^2 (log 1/r)^2) on [0, e^-2], n = 4: the reduced 1-D
        // integrand is n b_4 r / (log 1/r)^2. Oracle: substitution
        // tau = log 1/r gives n b_4 int_2^inf e^(-2 tau)/tau^2 dtau.
        let h = |r: f64| {
            let f = -r.ln();
            1.0 / (r * r * f * f)
        };
        let res = integrate_radial(&h, 0.0, (-2.0f64).exp(), 4, Tol::rel(1e-8), 0.0).unwrap();
        let v = res.value().unwrap();
        let weight = 4.0 * (PI * PI / 2.0);
        let (oracle, _e, _p) = adaptive(
            &|tau: f64| (-2.0 * tau).exp() / (tau * tau),
            2.0,
            45.0,
            1e-15,
            4096,
        );
        let exact = weight * oracle;
        assert!(
            (v - exact).abs() < 1e-7 * exact + res.error_estimate(),
            "{v} vs {exact}"
        );
    }

    #[test]
    fn slow_log_tail_converges_by_power_fit() {
        // h(r) = 1/(r^4 (log 1/r)^2) in n = 4 reduces to n b_4 / (r (log 1/r)^2),
        // whose dyadic increments decay like k^-2: the substitution oracle
        // tau = log 1/r gives n b_4 (1/2) for the full integral.
        let h = |r: f64| {
            let f = -r.ln();
            1.0 / (r.powi(4) * f * f)
        };
        let res = integrate_radial(&h, 0.0, (-2.0f64).exp(), 4, Tol::rel(0.05), 1e-60).unwrap();
        let v = res.value().unwrap();
        let exact = 4.0 * (PI * PI / 2.0) * 0.5;
        assert!(
            (v - exact).abs() <= res.error_estimate() + 0.01 * exact,
            "{v} vs {exact} (err {})",
            res.error_estimate()
        );
        // the certified tail really does cover the analytic remainder
        assert!(res.error_estimate() < 0.06 * exact);
    }

    #[test]
    fn critical_power_is_divergent_with_constant_increments() {
        // h = r^-n: per-annulus increment n b_n log 2 exactly
        let n = 4;
        let res = integrate_radial(&|r: f64| r.powi(-(n as i32)), 0.0, 1.0, n, Tol::abs(1e-10), 0.0).unwrap();
        let ev = res.divergence().expect("should diverge");
        let want = n as f64 * unit_ball_volume(n) * 2.0f64.ln();
        for inc in &ev.increments {
            assert!((inc - want).abs() < 1e-10 * want, "{inc} vs {want}");
        }
    }

    #[test]
    fn supercritical_power_converges_quickly() {
        // h = r^-2 in n = 4 on [0,1]: integral = 4 b_4 / 2 = 2 b_4
        let res = integrate_radial(&|r: f64| r.powi(-2), 0.0, 1.0, 4, Tol::abs(1e-10), 0.0).unwrap();
        let want = 2.0 * unit_ball_volume(4);
        assert!((res.value().unwrap() - want).abs() < 1e-8);
    }

    #[test]
    fn near_critical_power_converges_geometrically() {
        // |grad u|^p with p = 3.9 in n = 4: integrand 2^3.9 r^(-0.9) weight
        let p = 3.9;
        let h = move |r: f64| (2.0 / r).powf(p);
        let res = integrate_radial(&h, 0.0, (-2.0f64).exp(), 4, Tol::rel(0.01), 1e-45).unwrap();
        let weight = 4.0 * unit_ball_volume(4);
        let exact = weight * 2.0f64.powf(p) * (-2.0f64).exp().powf(4.0 - p) / (4.0 - p);
        let v = res.value().unwrap();
        assert!(
            (v - exact).abs() < 0.02 * exact + res.error_estimate(),
            "{v} vs {exact}"
        );
    }

    #[test]
    fn detector_examples() {
        let cfg = DivergenceConfig::default();
        // geometric 2^-k: converged
        let incs: Vec<f64> = (0..20).map(|k| 2.0f64.powi(-k)).collect();
        match detect_divergence(&incs, 1e-4, &cfg) {
            DivergenceVerdict::Converged { tail_bound } => assert!(tail_bound <= 1e-4),
            v => panic!("expected convergence, got {v:?}"),
        }
        // constant increments: divergent
        let incs = vec![3.0; 12];
        assert!(matches!(
            detect_divergence(&incs, 1e-6, &cfg),
            DivergenceVerdict::Divergent { .. }
        ));
        // harmonic increments at small budget: inconclusive
        let incs: Vec<f64> = (1..=12).map(|k| 1.0 / k as f64).collect();
        assert!(matches!(
            detect_divergence(&incs, 1e-6, &cfg),
            DivergenceVerdict::Inconclusive { .. }
        ));
        // harmonic with an extended budget and a configured ceiling: the
        // partial-sum oracle sum(1/k) ~ ln K crosses the ceiling
        let incs: Vec<f64> = (1..=200_000).map(|k| 1.0 / k as f64).collect();
        let low_ceiling = DivergenceConfig { ceiling: 12.0, ..cfg };
        assert!(matches!(
            detect_divergence(&incs, 1e-6, &low_ceiling),
            DivergenceVerdict::Divergent { .. }
        ));
        // k^-2 decay: converged by the power-law fit once the tail is small
        let incs: Vec<f64> = (1..=4000).map(|k| 1.0 / (k as f64 * k as f64)).collect();
        match detect_divergence(&incs, 1e-2, &cfg) {
            DivergenceVerdict::Converged { tail_bound } => {
                // true tail is ~ 1/4000
                assert!((1.0 / 4000.0..=1e-2).contains(&tail_bound));
            }
            v => panic!("expected convergence, got {v:?}"),
        }
        // k^-1/2 decay: divergent by the power-law fit
        let incs: Vec<f64> = (1..=64).map(|k| 1.0 / (k as f64).sqrt()).collect();
        assert!(matches!(
            detect_divergence(&incs, 1e-6, &cfg),
            DivergenceVerdict::Divergent { .. }
        ));
    }

    #[test]
    fn detector_requires_eight_increments() {
        let incs = vec![1.0, 0.5, 0.25];
        assert!(matches!(
            detect_divergence(&incs, 1e-6, &DivergenceConfig::default()),
            DivergenceVerdict::Inconclusive { .. }
        ));
    }

    #[test]
    fn offcenter_constant_gives_ball_volume() {
        for n in [3usize, 4, 5] {
            for (d, r) in [(0.5, 0.25), (0.1, 0.4), (0.0, 0.3), (2.0, 0.5)] {
                let res = integrate_offcenter_ball(&|_| 1.0, d, r, n, Tol::abs(1e-10), 0.0).unwrap();
                let want = unit_ball_volume(n) * r.powi(n as i32);
                let v = res.value().unwrap();
                assert!((v - want).abs() < 1e-8 * want.max(1.0), "n={n} d={d} r={r}: {v} vs {want}");
            }
        }
    }

    #[test]
    fn offcenter_center_limit_matches_radial() {
        let h = |r: f64| (1.0 + r * r).ln() + r;
        let centered = integrate_radial(&h, 0.0, 0.7, 5, Tol::abs(1e-12), 0.0)
            .unwrap()
            .value()
            .unwrap();
        let off = integrate_offcenter_ball(&h, 1e-14, 0.7, 5, Tol::abs(1e-12), 0.0)
            .unwrap()
            .value()
            .unwrap();
        assert!(((centered - off) / centered).abs() < 1e-10, "{centered} vs {off}");
    }

    #[test]
    fn bicentric_reduces_to_ball_volume() {
        // w = indicator of dist <= R via a smooth-enough plateau: use the
        // exact cap identity with w = 1 inside B_R(c): integral = b_n R^n
        let n = 4;
        let (d, rr) = (0.5, 0.3);
        let w = |_rho: f64, dist: f64, _c: f64| if dist <= rr { 1.0 } else { 0.0 };
        let res = integrate_bicentric(&w, d, n, d - rr, d + rr, Tol::abs(1e-6)).unwrap();
        let want = unit_ball_volume(n) * rr.powi(n as i32);
        let v = res.value().unwrap();
        // discontinuous integrand: only a loose check
        assert!((v - want).abs() < 1e-3 * want, "{v} vs {want}");
    }

    #[test]
    fn tolerance_contract_halving() {
        let h = |r: f64| (3.0 * r).sin().exp();
        let r1 = integrate_radial(&h, 0.2, 1.0, 3, Tol::abs(1e-6), 0.0).unwrap();
        let r2 = integrate_radial(&h, 0.2, 1.0, 3, Tol::abs(5e-7), 0.0).unwrap();
        assert!(r2.error_estimate() <= r1.error_estimate());
        let d = (r1.value().unwrap() - r2.value().unwrap()).abs();
        assert!(d <= r1.error_estimate() + r2.error_estimate());
    }

    #[test]
    fn log_tail_integration() {
        // int_2^inf tau^-2 dtau = 1/2
        let res = integrate_log_tail(&|t: f64| t.powi(-2), 2.0, Tol::abs(1e-9)).unwrap();
        assert!((res.value().unwrap() - 0.5).abs() < 1e-7);
        // int_2^inf tau^-1: divergent (constant dyadic-block increments)
        let res = integrate_log_tail(&|t: f64| 1.0 / t, 2.0, Tol::abs(1e-9)).unwrap();
        assert!(res.is_divergent());
    }
}
