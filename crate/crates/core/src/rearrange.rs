//! Distribution functions, decreasing rearrangements and Lorentz norms.
//!
//! Exact arithmetic on weighted sample sets (the empirical route) plus
//! closed forms for power-law profiles (the exact-radial route). The q = inf
//! norm of a piecewise-constant rearrangement is attained at a knot, so the
//! empirical supremum is exact for the sampled function; grid-refinement
//! error is estimated by comparing against a half-resolution resample.

use crate::error::{Error, Result};
use crate::quadrature::{adaptive, DivergenceEvidence};
use crate::special::{pairwise_sum, unit_ball_volume};

/// Pairs (value, measure weight) describing the value distribution of |f|.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSampleSet {
    entries: Vec<(f64, f64)>,
    total_measure: f64,
}

impl WeightedSampleSet {
    pub fn new(entries: Vec<(f64, f64)>) -> Result<Self> {
        if entries.iter().any(|&(v, w)| !(v >= 0.0) || !(w > 0.0) || !v.is_finite() || !w.is_finite()) {
            return Err(Error::Config(
                "sample entries need nonnegative finite values and positive weights".into(),
            ));
        }
        let weights: Vec<f64> = entries.iter().map(|e| e.1).collect();
        let total_measure = pairwise_sum(&weights);
        Ok(WeightedSampleSet { entries, total_measure })
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn total_measure(&self) -> f64 {
        self.total_measure
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Keeps every other entry; used for grid-refinement error estimates.
    pub fn coarsened(&self) -> WeightedSampleSet {
        let entries: Vec<(f64, f64)> = self
            .entries
            .iter()
            .enumerate()
            .filter(|(i, _)| i % 2 == 0)
            .map(|(_, &(v, w))| (v, 2.0 * w))
            .collect();
        let weights: Vec<f64> = entries.iter().map(|e| e.1).collect();
        let total_measure = pairwise_sum(&weights);
        WeightedSampleSet { entries, total_measure }
    }
}

/// D_f(lambda): total weight of entries with value strictly above lambda.
///
/// Accumulated over entries sorted by descending value — the same order the
/// rearrangement uses — so the equimeasurability identity with the curve's
/// own distribution function holds bit-exactly, not just up to rounding.
pub fn distribution_function(samples: &WeightedSampleSet, lambda: f64) -> f64 {
    assert!(lambda >= 0.0, "levels are nonnegative");
    let mut sorted: Vec<(f64, f64)> = samples.entries.clone();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut acc = 0.0;
    for &(v, w) in &sorted {
        if v > lambda {
            acc += w;
        } else {
            break;
        }
    }
    acc
}

/// How a rearrangement curve was produced.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveSource {
    Empirical,
    /// f = amplitude |x|^(-s) on a ball of measure `total` (or all of R^n),
    /// for which f*(t) = amplitude (b_n / t)^(s/n) exactly.
    PowerLaw { amplitude: f64, s: f64, n: usize, unbounded: bool },
}

/// Sampled decreasing rearrangement: f* is the right-continuous generalized
/// inverse of D_f, constant on each knot interval; f** is its running
/// average, computed from exact prefix sums.
#[derive(Debug, Clone, PartialEq)]
pub struct RearrangementCurve {
    /// strictly increasing cumulative measures W_1 < ... < W_m = total
    knots: Vec<f64>,
    /// value of f* on the segment ending at each knot
    fstar: Vec<f64>,
    /// prefix integrals C_k = int_0^{W_k} f*
    cumulative: Vec<f64>,
    total_measure: f64,
    source: CurveSource,
}

/// Sort-based construction of f* and f** for a weighted sample set.
pub fn decreasing_rearrangement(samples: &WeightedSampleSet) -> Result<RearrangementCurve> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted: Vec<(f64, f64)> = samples.entries.clone();
    // stable sort, descending by value; ties form contiguous flat segments
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut knots = Vec::with_capacity(sorted.len());
    let mut fstar = Vec::with_capacity(sorted.len());
    let mut cumulative = Vec::with_capacity(sorted.len());
    let mut w_acc = 0.0;
    let mut c_acc = 0.0;
    for &(v, w) in &sorted {
        w_acc += w;
        c_acc += v * w;
        if let Some(last) = fstar.last() {
            if *last == v {
                // merge the tie into the previous segment
                *knots.last_mut().unwrap() = w_acc;
                *cumulative.last_mut().unwrap() = c_acc;
                continue;
            }
        }
        knots.push(w_acc);
        fstar.push(v);
        cumulative.push(c_acc);
    }
    Ok(RearrangementCurve {
        knots,
        fstar,
        cumulative,
        total_measure: samples.total_measure,
        source: CurveSource::Empirical,
    })
}

impl RearrangementCurve {
    /// Closed-form curve of amplitude * |x|^(-s) on B_radius in R^n
    /// (`radius = None` for the whole space), 0 < s < n.
    pub fn power_law(amplitude: f64, s: f64, n: usize, radius: Option<f64>) -> Result<Self> {
        if !(s > 0.0 && s < n as f64) {
            return Err(Error::Config(format!("power-law exponent s={s} must lie in (0, n)")));
        }
        let bn = unit_ball_volume(n);
        let (total, unbounded) = match radius {
            Some(r) => (bn * r.powi(n as i32), false),
            None => (f64::INFINITY, true),
        };
        Ok(RearrangementCurve {
            knots: Vec::new(),
            fstar: Vec::new(),
            cumulative: Vec::new(),
            total_measure: total,
            source: CurveSource::PowerLaw { amplitude, s, n, unbounded },
        })
    }

    pub fn total_measure(&self) -> f64 {
        self.total_measure
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn source(&self) -> &CurveSource {
        &self.source
    }

    /// f*(t) for t > 0.
    pub fn fstar_at(&self, t: f64) -> f64 {
        assert!(t > 0.0);
        match &self.source {
            CurveSource::PowerLaw { amplitude, s, n, .. } => {
                if t > self.total_measure {
                    return 0.0;
                }
                let bn = unit_ball_volume(*n);
                amplitude * (bn / t).powf(s / *n as f64)
            }
            CurveSource::Empirical => {
                // first knot with W_k >= t
                match self.knots.binary_search_by(|w| w.total_cmp(&t)) {
                    Ok(k) => self.fstar[k],
                    Err(k) => {
                        if k >= self.knots.len() {
                            0.0
                        } else {
                            self.fstar[k]
                        }
                    }
                }
            }
        }
    }

    /// f**(t) = (1/t) int_0^t f*.
    pub fn fstarstar_at(&self, t: f64) -> f64 {
        assert!(t > 0.0);
        match &self.source {
            CurveSource::PowerLaw { amplitude, s, n, .. } => {
                let nf = *n as f64;
                let bn = unit_ball_volume(*n);
                let t_eff = t.min(self.total_measure);
                // int_0^T f* = A b_n^(s/n) T^(1-s/n) n/(n-s)
                let integral = amplitude * bn.powf(s / nf) * t_eff.powf(1.0 - s / nf) * nf / (nf - s);
                integral / t
            }
            CurveSource::Empirical => {
                let k = match self.knots.binary_search_by(|w| w.total_cmp(&t)) {
                    Ok(k) => k,
                    Err(k) => k,
                };
                if k >= self.knots.len() {
                    return self.cumulative.last().copied().unwrap_or(0.0) / t;
                }
                let (w_prev, c_prev) = if k == 0 {
                    (0.0, 0.0)
                } else {
                    (self.knots[k - 1], self.cumulative[k - 1])
                };
                (c_prev + self.fstar[k] * (t - w_prev)) / t
            }
        }
    }

    /// Distribution function of the rearrangement itself (Lebesgue measure on
    /// (0, total]); equals D_f of the source samples at every level.
    pub fn distribution(&self, lambda: f64) -> f64 {
        match &self.source {
            CurveSource::PowerLaw { amplitude, s, n, .. } => {
                let bn = unit_ball_volume(*n);
                (bn * (amplitude / lambda).powf(*n as f64 / s)).min(self.total_measure)
            }
            CurveSource::Empirical => {
                // largest knot whose segment value exceeds lambda
                let mut measure = 0.0;
                for (w, v) in self.knots.iter().zip(&self.fstar) {
                    if *v > lambda {
                        measure = *w;
                    } else {
                        break;
                    }
                }
                measure
            }
        }
    }

    /// CSV export with columns t,fstar,fstarstar at the knots.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,fstar,fstarstar\n");
        for (k, w) in self.knots.iter().enumerate() {
            let fss = self.cumulative[k] / w;
            out.push_str(&format!("{w},{},{fss}\n", self.fstar[k]));
        }
        out
    }
}

/// Secondary Lorentz index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QIndex {
    Finite(f64),
    Infinity,
}

impl QIndex {
    pub fn parse(text: &str) -> Result<QIndex> {
        if text.eq_ignore_ascii_case("inf") || text.eq_ignore_ascii_case("infinity") {
            return Ok(QIndex::Infinity);
        }
        let q: f64 = text
            .parse()
            .map_err(|_| Error::Config(format!("cannot parse Lorentz index q from {text:?}")))?;
        if q < 1.0 {
            return Err(Error::Config(format!("q = {q} must be at least 1")));
        }
        Ok(QIndex::Finite(q))
    }
}

impl std::fmt::Display for QIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            QIndex::Finite(q) => write!(f, "{q}"),
            QIndex::Infinity => write!(f, "inf"),
        }
    }
}

/// How a Lorentz norm was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMethod {
    ExactRadial,
    Empirical,
}

/// Value of a Lorentz norm, or divergence evidence when the defining
/// integral is genuinely infinite.
#[derive(Debug, Clone, PartialEq)]
pub enum NormOutcome {
    Finite { value: f64, error_bound: f64 },
    Divergent(DivergenceEvidence),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LorentzNormResult {
    pub p: f64,
    pub q: QIndex,
    pub outcome: NormOutcome,
    pub method: NormMethod,
}

impl LorentzNormResult {
    pub fn value(&self) -> Result<f64> {
        match &self.outcome {
            NormOutcome::Finite { value, .. } => Ok(*value),
            NormOutcome::Divergent(ev) => {
                Err(Error::Config(format!("Lorentz norm divergent: {}", ev.description)))
            }
        }
    }

    pub fn error_bound(&self) -> f64 {
        match &self.outcome {
            NormOutcome::Finite { error_bound, .. } => *error_bound,
            NormOutcome::Divergent(_) => f64::INFINITY,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self.outcome, NormOutcome::Divergent(_))
    }
}

/// Lorentz norm of a rearrangement curve:
/// sup t^(1/p) f**(t) for q = inf, else the (dt/t) integral of
/// (t^(1/p) f**)^q, both exact for the curve as a function.
pub fn lorentz_norm(curve: &RearrangementCurve, p: f64, q: QIndex) -> Result<LorentzNormResult> {
    if !(p > 1.0) {
        return Err(Error::Index { p });
    }
    if let QIndex::Finite(qv) = q {
        if qv < 1.0 {
            return Err(Error::Config(format!("q = {qv} must be at least 1")));
        }
    }
    match &curve.source {
        CurveSource::PowerLaw { .. } => power_law_norm(curve, p, q),
        CurveSource::Empirical => empirical_norm(curve, p, q),
    }
}

fn power_law_norm(curve: &RearrangementCurve, p: f64, q: QIndex) -> Result<LorentzNormResult> {
    let CurveSource::PowerLaw { amplitude, s, n, unbounded } = curve.source else {
        unreachable!()
    };
    let nf = n as f64;
    let bn = unit_ball_volume(n);
    // plateau constant of t^(s/n) f**: A n/(n-s) b_n^(s/n)
    let plateau = amplitude * nf / (nf - s) * bn.powf(s / nf);
    let gamma = 1.0 / p - s / nf;

    match q {
        QIndex::Infinity => {
            // t^(1/p) f** = plateau * t^gamma on (0, total]; beyond, f** = C/t
            let value = if gamma > 0.0 {
                if unbounded {
                    return Ok(divergent_result(
                        p,
                        q,
                        NormMethod::ExactRadial,
                        "sup t^(1/p) f** grows like t^gamma with gamma > 0 on the whole space",
                        plateau,
                        gamma,
                    ));
                }
                plateau * curve.total_measure.powf(gamma)
            } else if gamma == 0.0 {
                plateau
            } else {
                // supremum at t -> 0 diverges
                return Ok(divergent_result(
                    p,
                    q,
                    NormMethod::ExactRadial,
                    "sup t^(1/p) f** blows up as t -> 0 (p below the critical index n/s)",
                    plateau,
                    gamma,
                ));
            };
            Ok(LorentzNormResult {
                p,
                q,
                outcome: NormOutcome::Finite { value, error_bound: 0.0 },
                method: NormMethod::ExactRadial,
            })
        }
        QIndex::Finite(qv) => {
            if unbounded {
                // the integrand plateau^q t^(q gamma - 1) fails to be
                // integrable at one end (or both, logarithmically at gamma=0)
                return Ok(divergent_result(
                    p,
                    q,
                    NormMethod::ExactRadial,
                    "q < inf Lorentz integral of a global power law diverges",
                    plateau,
                    gamma,
                ));
            }
            let total = curve.total_measure;
            if gamma <= 0.0 {
                return Ok(divergent_result(
                    p,
                    q,
                    NormMethod::ExactRadial,
                    "q < inf Lorentz integral diverges at t = 0 for p >= n/s",
                    plateau,
                    gamma,
                ));
            }
            // int_0^total (plateau t^gamma)^q dt/t = plateau^q total^(q gamma)/(q gamma)
            let head = plateau.powf(qv) * total.powf(qv * gamma) / (qv * gamma);
            // beyond total: f** = c/t with c = int_0^total f*
            let c = amplitude * bn.powf(s / nf) * total.powf(1.0 - s / nf) * nf / (nf - s);
            let tail_exp = qv / p - qv;
            let tail = c.powf(qv) * total.powf(tail_exp) / (-tail_exp);
            let value = (head + tail).powf(1.0 / qv);
            Ok(LorentzNormResult {
                p,
                q,
                outcome: NormOutcome::Finite { value, error_bound: 1e-14 * value },
                method: NormMethod::ExactRadial,
            })
        }
    }
}

/// Dyadic evidence table for an analytically divergent Lorentz integral.
fn divergent_result(
    p: f64,
    q: QIndex,
    method: NormMethod,
    description: &str,
    plateau: f64,
    gamma: f64,
) -> LorentzNormResult {
    let qv = match q {
        QIndex::Finite(qv) => qv,
        QIndex::Infinity => 1.0,
    };
    // increments of int (plateau t^gamma)^q dt/t over dyadic spans toward the
    // divergent end; at the critical index they are exactly constant
    let mut increments = Vec::new();
    let mut partial_sums = Vec::new();
    let mut acc = 0.0;
    for k in 0..12 {
        let inc = if gamma.abs() < 1e-300 {
            plateau.powf(qv) * 2.0f64.ln()
        } else {
            let e = qv * gamma;
            let hi = 2.0f64.powi(-k);
            let lo = hi * 0.5;
            (plateau.powf(qv) * (hi.powf(e) - lo.powf(e)) / e).abs()
        };
        acc += inc;
        increments.push(inc);
        partial_sums.push(acc);
    }
    LorentzNormResult {
        p,
        q,
        outcome: NormOutcome::Divergent(DivergenceEvidence {
            increments,
            partial_sums,
            description: description.into(),
        }),
        method,
    }
}

fn empirical_norm(curve: &RearrangementCurve, p: f64, q: QIndex) -> Result<LorentzNormResult> {
    if curve.knots.is_empty() {
        return Err(Error::EmptyInput);
    }
    match q {
        QIndex::Infinity => {
            // on each segment t^(1/p) f** is the sum of an increasing and a
            // decreasing term with a single interior minimum, so the segment
            // maximum sits at a knot; the supremum over (0, total] is the
            // maximum over knots
            let mut best = 0.0f64;
            for (k, &w) in curve.knots.iter().enumerate() {
                let g = w.powf(1.0 / p) * curve.cumulative[k] / w;
                best = best.max(g);
            }
            Ok(LorentzNormResult {
                p,
                q,
                outcome: NormOutcome::Finite { value: best, error_bound: 0.0 },
                method: NormMethod::Empirical,
            })
        }
        QIndex::Finite(qv) => {
            // head segment (0, W_1]: f** = f*(0+) constant, closed form
            let w1 = curve.knots[0];
            let v1 = curve.fstar[0];
            let mut acc = v1.powf(qv) * w1.powf(qv / p) * p / qv;
            let mut err = 0.0;

            // interior segments: integrand t^(q/p - q - 1) (a + v t)^q
            for k in 1..curve.knots.len() {
                let (w_prev, c_prev) = (curve.knots[k - 1], curve.cumulative[k - 1]);
                let w_k = curve.knots[k];
                let v_k = curve.fstar[k];
                let a = c_prev - v_k * w_prev;
                let exponent = qv / p - qv - 1.0;
                let integrand = |t: f64| t.powf(exponent) * (a + v_k * t).powf(qv);
                let (val, e, _panels) = adaptive(&integrand, w_prev, w_k, f64::EPSILON * acc.abs(), 64);
                acc += val;
                err += e;
            }

            // tail beyond the last knot: f** = C/t
            let total = *curve.knots.last().unwrap();
            let c = *curve.cumulative.last().unwrap();
            let tail_exp = qv / p - qv;
            acc += c.powf(qv) * total.powf(tail_exp) / (-tail_exp);

            let value = acc.powf(1.0 / qv);
            // propagate the integral error through the 1/q power
            let error_bound = if value > 0.0 {
                value / qv * (err / acc.max(1e-300))
            } else {
                0.0
            };
            Ok(LorentzNormResult {
                p,
                q,
                outcome: NormOutcome::Finite { value, error_bound },
                method: NormMethod::Empirical,
            })
        }
    }
}

/// Exact Lebesgue norm of a weighted sample set: (sum v^p w)^(1/p).
pub fn lebesgue_norm(samples: &WeightedSampleSet, p: f64) -> f64 {
    let terms: Vec<f64> = samples.entries.iter().map(|&(v, w)| v.powf(p) * w).collect();
    pairwise_sum(&terms).powf(1.0 / p)
}

/// Origin-centered domain of a radial sampler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialDomain {
    Ball { radius: f64 },
    Annulus { inner: f64, outer: f64 },
}

impl RadialDomain {
    fn bounds(&self, inner_floor: f64) -> Result<(f64, f64)> {
        match *self {
            RadialDomain::Ball { radius } => {
                if radius <= 0.0 {
                    return Err(Error::Config("ball radius must be positive".into()));
                }
                Ok((inner_floor.max(1e-300), radius))
            }
            RadialDomain::Annulus { inner, outer } => {
                if !(inner > 0.0 && outer > inner) {
                    return Err(Error::Config("annulus needs 0 < inner < outer".into()));
                }
                Ok((inner, outer))
            }
        }
    }
}

/// Samples a radial scalar on log-spaced cells of an origin-centered domain:
/// one entry per cell [r_i, r_(i+1)] with the value at the geometric midpoint
/// and weight b_n (r_(i+1)^n - r_i^n). For a ball the innermost cell starts
/// at `inner_floor` (mass below it is dropped; with the default 1e-12 cutoff
/// the omission is far below sampling error).
pub fn sample_radial<F: Fn(f64) -> f64>(
    scalar: &F,
    domain: RadialDomain,
    n: usize,
    cells: usize,
    inner_floor: f64,
) -> Result<WeightedSampleSet> {
    if cells < 2 {
        return Err(Error::Config("need at least 2 radial cells".into()));
    }
    let (lo, hi) = domain.bounds(inner_floor)?;
    let bn = unit_ball_volume(n);
    let log_lo = lo.ln();
    let step = (hi.ln() - log_lo) / cells as f64;
    let mut entries = Vec::with_capacity(cells);
    for i in 0..cells {
        let r0 = (log_lo + step * i as f64).exp();
        let r1 = (log_lo + step * (i + 1) as f64).exp();
        let mid = (r0 * r1).sqrt();
        let weight = bn * (r1.powi(n as i32) - r0.powi(n as i32));
        if weight <= 0.0 {
            continue;
        }
        let value = scalar(mid).abs();
        entries.push((value, weight));
    }
    WeightedSampleSet::new(entries)
}

/// Samples a scalar on an arbitrary (possibly off-center) ball with
/// low-discrepancy points and equal weights summing to the ball volume.
pub fn sample_grid<F: Fn(&[f64]) -> f64>(
    scalar: &F,
    center: &[f64],
    radius: f64,
    sample_count: usize,
) -> Result<WeightedSampleSet> {
    let n = center.len();
    if !(radius > 0.0) || sample_count == 0 {
        return Err(Error::Config("sample_grid needs a positive radius and count".into()));
    }
    let volume = unit_ball_volume(n) * radius.powi(n as i32);
    let weight = volume / sample_count as f64;
    let mut entries = Vec::with_capacity(sample_count);
    let mut halton = crate::special::Halton::new(n);
    while entries.len() < sample_count {
        let u = halton.next().expect("halton is infinite");
        let sq: f64 = u.iter().map(|c| (2.0 * c - 1.0) * (2.0 * c - 1.0)).sum();
        if sq > 1.0 {
            continue;
        }
        let x: Vec<f64> = u
            .iter()
            .zip(center)
            .map(|(c, ctr)| ctr + radius * (2.0 * c - 1.0))
            .collect();
        entries.push((scalar(&x).abs(), weight));
    }
    WeightedSampleSet::new(entries)
}

/// Full pipeline for radial scalars: sample, rearrange, take the norm, and
/// estimate the grid error by redoing the norm at half resolution.
pub fn lorentz_norm_radial_sampled<F: Fn(f64) -> f64>(
    scalar: &F,
    domain: RadialDomain,
    n: usize,
    cells: usize,
    inner_floor: f64,
    p: f64,
    q: QIndex,
) -> Result<LorentzNormResult> {
    let fine = sample_radial(scalar, domain, n, cells, inner_floor)?;
    let coarse = sample_radial(scalar, domain, n, cells / 2, inner_floor)?;
    let norm_fine = lorentz_norm(&decreasing_rearrangement(&fine)?, p, q)?;
    let norm_coarse = lorentz_norm(&decreasing_rearrangement(&coarse)?, p, q)?;
    combine_refinement(norm_fine, &norm_coarse)
}

/// As [`lorentz_norm_radial_sampled`] for grid-sampled scalars on a ball.
pub fn lorentz_norm_grid_sampled<F: Fn(&[f64]) -> f64>(
    scalar: &F,
    center: &[f64],
    radius: f64,
    sample_count: usize,
    p: f64,
    q: QIndex,
) -> Result<LorentzNormResult> {
    let fine = sample_grid(scalar, center, radius, sample_count)?;
    let coarse = sample_grid(scalar, center, radius, sample_count / 2)?;
    let norm_fine = lorentz_norm(&decreasing_rearrangement(&fine)?, p, q)?;
    let norm_coarse = lorentz_norm(&decreasing_rearrangement(&coarse)?, p, q)?;
    combine_refinement(norm_fine, &norm_coarse)
}

fn combine_refinement(
    mut fine: LorentzNormResult,
    coarse: &LorentzNormResult,
) -> Result<LorentzNormResult> {
    if let (
        NormOutcome::Finite { value, error_bound },
        NormOutcome::Finite { value: vc, .. },
    ) = (&mut fine.outcome, &coarse.outcome)
    {
        *error_bound += (*value - vc).abs();
    }
    Ok(fine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn two_step() -> WeightedSampleSet {
        // value 3 on measure 1, value 1 on measure 2
        WeightedSampleSet::new(vec![(1.0, 2.0), (3.0, 1.0)]).unwrap()
    }

    #[test]
    fn distribution_function_two_step() {
        let s = two_step();
        assert_eq!(distribution_function(&s, 2.0), 1.0);
        assert_eq!(distribution_function(&s, 0.5), 3.0);
        assert_eq!(distribution_function(&s, 3.0), 0.0);
    }

    #[test]
    fn zero_function_distribution() {
        let s = WeightedSampleSet::new(vec![(0.0, PI)]).unwrap();
        assert_eq!(distribution_function(&s, 0.5), 0.0);
        assert_eq!(distribution_function(&s, 1e-12), 0.0);
    }

    #[test]
    fn rearrangement_two_step() {
        let curve = decreasing_rearrangement(&two_step()).unwrap();
        // f* = 3 on (0,1], 1 on (1,3]
        assert!((curve.fstar_at(0.5) - 3.0).abs() < 1e-15);
        assert!((curve.fstar_at(1.0) - 3.0).abs() < 1e-15);
        assert!((curve.fstar_at(1.5) - 1.0).abs() < 1e-15);
        assert!((curve.fstar_at(3.0) - 1.0).abs() < 1e-15);
        assert_eq!(curve.fstar_at(3.5), 0.0);
        // f**(2) = (3 + 1)/2 = 2
        assert!((curve.fstarstar_at(2.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rearrangement_constant() {
        let s = WeightedSampleSet::new(vec![(2.5, 0.7), (2.5, 0.9)]).unwrap();
        let curve = decreasing_rearrangement(&s).unwrap();
        assert_eq!(curve.knots().len(), 1);
        assert!((curve.fstar_at(1.0) - 2.5).abs() < 1e-15);
        assert!((curve.total_measure() - 1.6).abs() < 1e-15);
    }

    #[test]
    fn empty_input_is_an_error() {
        let s = WeightedSampleSet::new(vec![]).unwrap();
        assert!(matches!(decreasing_rearrangement(&s), Err(Error::EmptyInput)));
    }

    #[test]
    fn power_law_curve_matches_formulas() {
        // f = |x|^(-s): f*(t) = (b_n/t)^(s/n), t^(s/n) f** = n/(n-s) b_n^(s/n)
        let (n, s) = (4usize, 2.0);
        let curve = RearrangementCurve::power_law(1.0, s, n, None).unwrap();
        let bn = unit_ball_volume(n);
        for t in [0.1, 1.0, 7.3] {
            let want = (bn / t).powf(s / n as f64);
            assert!((curve.fstar_at(t) - want).abs() < 1e-14 * want);
            let plateau = n as f64 / (n as f64 - s) * bn.powf(s / n as f64);
            assert!((t.powf(s / n as f64) * curve.fstarstar_at(t) - plateau).abs() < 1e-13);
        }
    }

    #[test]
    fn weak_lp_constant_of_inverse_square_in_r4() {
        // || |x|^-2 ||_{L^{2,inf}(R^4)} = (n/(n-s)) b_n^(s/n) = pi sqrt(2)
        let curve = RearrangementCurve::power_law(1.0, 2.0, 4, None).unwrap();
        let norm = lorentz_norm(&curve, 2.0, QIndex::Infinity).unwrap();
        let want = PI * 2.0f64.sqrt();
        assert!((norm.value().unwrap() - want).abs() < 1e-12);
        assert_eq!(norm.method, NormMethod::ExactRadial);
    }

    #[test]
    fn constant_on_ball_qinf_norm() {
        // constant 1 on B_theta in R^n: norm = b_n^(1/n) theta
        let (n, theta) = (5usize, 0.3f64);
        let bn = unit_ball_volume(n);
        let measure = bn * theta.powi(n as i32);
        let s = WeightedSampleSet::new(vec![(1.0, measure)]).unwrap();
        let curve = decreasing_rearrangement(&s).unwrap();
        let norm = lorentz_norm(&curve, n as f64, QIndex::Infinity).unwrap();
        let want = bn.powf(1.0 / n as f64) * theta;
        assert!((norm.value().unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn zero_function_norm_is_zero() {
        let s = WeightedSampleSet::new(vec![(0.0, 1.0)]).unwrap();
        let curve = decreasing_rearrangement(&s).unwrap();
        for q in [QIndex::Infinity, QIndex::Finite(2.0)] {
            let norm = lorentz_norm(&curve, 2.0, q).unwrap();
            assert_eq!(norm.value().unwrap(), 0.0);
        }
    }

    #[test]
    fn index_error_for_small_p() {
        let curve = decreasing_rearrangement(&two_step()).unwrap();
        assert!(matches!(
            lorentz_norm(&curve, 1.0, QIndex::Infinity),
            Err(Error::Index { .. })
        ));
    }

    #[test]
    fn critical_q_finite_integral_diverges() {
        // || |x|^-s ||_{L^{n/s,q}} with q < inf diverges even on a ball
        let curve = RearrangementCurve::power_law(1.0, 2.0, 4, Some(1.0)).unwrap();
        let norm = lorentz_norm(&curve, 2.0, QIndex::Finite(2.0)).unwrap();
        assert!(norm.is_divergent());
        if let NormOutcome::Divergent(ev) = &norm.outcome {
            // constant dyadic increments at the critical index
            let first = ev.increments[0];
            assert!(ev.increments.iter().all(|i| (i - first).abs() < 1e-12 * first));
        }
    }

    #[test]
    fn subcritical_q_finite_norm_is_finite() {
        // p < n/s: the curve is in L^{p,q} on a ball
        let curve = RearrangementCurve::power_law(1.0, 2.0, 4, Some(1.0)).unwrap();
        let norm = lorentz_norm(&curve, 1.5, QIndex::Finite(2.0)).unwrap();
        assert!(norm.value().unwrap().is_finite());
    }

    #[test]
    fn empirical_inverse_square_on_ball_matches_constant() {
        // |x|^-2 on B_1 in R^4 sampled on 2^14 log cells: within 1% of pi sqrt(2)
        let scalar = |r: f64| r.powi(-2);
        let norm = lorentz_norm_radial_sampled(
            &scalar,
            RadialDomain::Ball { radius: 1.0 },
            4,
            1 << 14,
            1e-12,
            2.0,
            QIndex::Infinity,
        )
        .unwrap();
        let want = PI * 2.0f64.sqrt();
        let v = norm.value().unwrap();
        assert!(((v - want) / want).abs() < 0.01, "{v} vs {want}");
    }

    #[test]
    fn sample_radial_total_measure() {
        let s = sample_radial(&|_| 1.0, RadialDomain::Ball { radius: 1.0 }, 4, 256, 1e-12).unwrap();
        let want = unit_ball_volume(4);
        assert!((s.total_measure() - want).abs() < 1e-12 * want);
    }

    #[test]
    fn sample_grid_total_measure_and_constant_norm() {
        let center = [0.5, 0.0, 0.0];
        let s = sample_grid(&|_x| 1.0, &center, 0.1, 2000).unwrap();
        let want = unit_ball_volume(3) * 0.1f64.powi(3);
        assert!(((s.total_measure() - want) / want).abs() < 1e-3);
        // |grad x1| = 1: L^{n,inf} norm of the constant 1 on B_0.1 is b_n^(1/n)/10
        let norm = lorentz_norm_grid_sampled(&|_x| 1.0, &center, 0.1, 4000, 3.0, QIndex::Infinity).unwrap();
        let exact = unit_ball_volume(3).powf(1.0 / 3.0) * 0.1;
        assert!(((norm.value().unwrap() - exact) / exact).abs() < 0.02);
    }

    #[test]
    fn equimeasurability_exact() {
        let entries = vec![(0.3, 0.5), (2.0, 0.25), (1.1, 1.5), (2.0, 0.75), (0.0, 1.0)];
        let samples = WeightedSampleSet::new(entries).unwrap();
        let curve = decreasing_rearrangement(&samples).unwrap();
        for lambda in [0.0, 0.2, 0.3, 0.9, 1.1, 1.9, 2.0, 5.0] {
            assert_eq!(
                curve.distribution(lambda),
                distribution_function(&samples, lambda),
                "level {lambda}"
            );
        }
    }

    #[test]
    fn lpp_sandwich_on_two_step() {
        // ||f||_p <= ||f||_{p,p} <= p/(p-1) ||f||_p
        let samples = two_step();
        let curve = decreasing_rearrangement(&samples).unwrap();
        for p in [1.5, 2.0, 3.0] {
            let lp = lebesgue_norm(&samples, p);
            let lpp = lorentz_norm(&curve, p, QIndex::Finite(p)).unwrap().value().unwrap();
            assert!(lp <= lpp * (1.0 + 1e-12), "p={p}: {lp} vs {lpp}");
            assert!(lpp <= p / (p - 1.0) * lp * (1.0 + 1e-12), "p={p}");
        }
    }

    #[test]
    fn curve_csv_has_header_and_rows() {
        let curve = decreasing_rearrangement(&two_step()).unwrap();
        let csv = curve.to_csv();
        assert!(csv.starts_with("t,fstar,fstarstar\n"));
        assert_eq!(csv.lines().count(), 3);
    }
}
