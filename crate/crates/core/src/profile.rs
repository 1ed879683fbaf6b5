//! Univariate radial profiles with exact derivative stacks to order four.
//!
//! Component profiles are composition chains of a handful of primitives
//! (log, sin, cos, power, affine, reciprocal) with hand-derived derivative
//! rules, not a general symbolic engine. A second representation covers even
//! polynomials in r (the compactly supported test bumps), and a trait object
//! escape hatch covers numerically defined profiles (Newton potentials).

use crate::error::{Error, Result};
use std::f64::consts::PI;
use std::sync::Arc;

/// Value and first four radial derivatives of a scalar profile at radius r.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialJet {
    pub r: f64,
    /// `d[0]` is the value, `d[k]` the k-th derivative.
    pub d: [f64; 5],
    /// Highest derivative order that is valid in `d`.
    pub order: usize,
}

impl RadialJet {
    pub fn value(&self) -> f64 {
        self.d[0]
    }

    pub fn deriv(&self, k: usize) -> f64 {
        assert!(k <= self.order, "derivative order {k} beyond jet order");
        self.d[k]
    }

    pub fn is_finite(&self) -> bool {
        self.r.is_finite() && self.d[..=self.order].iter().all(|v| v.is_finite())
    }
}

/// One step of a composition chain, applied outermost-last.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Prim {
    /// natural logarithm; input must be positive
    Log,
    Sin,
    Cos,
    /// t^p on positive input
    Power(f64),
    /// scale * t + shift
    Affine { scale: f64, shift: f64 },
    /// 1/t on positive input
    Recip,
}

impl Prim {
    /// First four derivatives of the primitive at t.
    fn stack(&self, t: f64) -> Result<[f64; 5]> {
        match *self {
            Prim::Log => {
                if t <= 0.0 {
                    return Err(Error::Domain {
                        radius: t,
                        reason: "log of non-positive value".into(),
                    });
                }
                let inv = 1.0 / t;
                Ok([t.ln(), inv, -inv * inv, 2.0 * inv.powi(3), -6.0 * inv.powi(4)])
            }
            Prim::Sin => {
                let (s, c) = t.sin_cos();
                Ok([s, c, -s, -c, s])
            }
            Prim::Cos => {
                let (s, c) = t.sin_cos();
                Ok([c, -s, -c, s, c])
            }
            Prim::Power(p) => {
                if t <= 0.0 {
                    return Err(Error::Domain {
                        radius: t,
                        reason: format!("power {p} of non-positive value"),
                    });
                }
                let mut out = [0.0; 5];
                let mut coeff = 1.0;
                for (k, slot) in out.iter_mut().enumerate() {
                    *slot = coeff * t.powf(p - k as f64);
                    coeff *= p - k as f64;
                }
                Ok(out)
            }
            Prim::Affine { scale, shift } => Ok([scale * t + shift, scale, 0.0, 0.0, 0.0]),
            Prim::Recip => {
                if t == 0.0 {
                    return Err(Error::Domain {
                        radius: t,
                        reason: "reciprocal of zero".into(),
                    });
                }
                let inv = 1.0 / t;
                Ok([
                    inv,
                    -inv * inv,
                    2.0 * inv.powi(3),
                    -6.0 * inv.powi(4),
                    24.0 * inv.powi(5),
                ])
            }
        }
    }

    /// Exact range of the primitive over the input interval [lo, hi].
    /// Intervals may be half-infinite; callers keep lo <= hi.
    fn map_interval(&self, lo: f64, hi: f64) -> (f64, f64) {
        match *self {
            Prim::Log => (lo.ln(), hi.ln()),
            Prim::Sin => trig_range(lo, hi, false),
            Prim::Cos => trig_range(lo, hi, true),
            Prim::Power(p) => {
                if p == 0.0 {
                    (1.0, 1.0)
                } else if p > 0.0 {
                    (lo.powf(p), hi.powf(p))
                } else {
                    (hi.powf(p), if lo <= 0.0 { f64::INFINITY } else { lo.powf(p) })
                }
            }
            Prim::Affine { scale, shift } => {
                let a = scale * lo + shift;
                let b = scale * hi + shift;
                (a.min(b), a.max(b))
            }
            Prim::Recip => (1.0 / hi, if lo <= 0.0 { f64::INFINITY } else { 1.0 / lo }),
        }
    }
}

/// Range of sin (or cos when `shifted`) over [lo, hi].
fn trig_range(lo: f64, hi: f64, cos: bool) -> (f64, f64) {
    if !(hi - lo).is_finite() || hi - lo >= 2.0 * PI {
        return (-1.0, 1.0);
    }
    let eval = |t: f64| if cos { t.cos() } else { t.sin() };
    let mut min = eval(lo).min(eval(hi));
    let mut max = eval(lo).max(eval(hi));
    // critical points: sin at pi/2 + k pi, cos at k pi
    let offset = if cos { 0.0 } else { PI / 2.0 };
    let k_lo = ((lo - offset) / PI).ceil() as i64;
    let k_hi = ((hi - offset) / PI).floor() as i64;
    for k in k_lo..=k_hi {
        let t = offset + k as f64 * PI;
        let v = eval(t);
        min = min.min(v);
        max = max.max(v);
    }
    (min, max)
}

/// Composition chain applied to r, innermost primitive first.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Chain {
    prims: Vec<Prim>,
}

impl Chain {
    pub fn new(prims: Vec<Prim>) -> Self {
        Chain { prims }
    }

    /// sin(kappa * log r) and cos(kappa * log r)
    pub fn sin_log(kappa: f64) -> Self {
        Chain::new(vec![Prim::Log, Prim::Affine { scale: kappa, shift: 0.0 }, Prim::Sin])
    }

    pub fn cos_log(kappa: f64) -> Self {
        Chain::new(vec![Prim::Log, Prim::Affine { scale: kappa, shift: 0.0 }, Prim::Cos])
    }

    /// sin(log(log(1/r))) — the doubly logarithmic profile.
    pub fn sin_log_log_inv() -> Self {
        Chain::new(vec![
            Prim::Log,
            Prim::Affine { scale: -1.0, shift: 0.0 },
            Prim::Log,
            Prim::Sin,
        ])
    }

    pub fn cos_log_log_inv() -> Self {
        Chain::new(vec![
            Prim::Log,
            Prim::Affine { scale: -1.0, shift: 0.0 },
            Prim::Log,
            Prim::Cos,
        ])
    }

    /// amplitude * r^exponent
    pub fn power_law(amplitude: f64, exponent: f64) -> Self {
        Chain::new(vec![
            Prim::Power(exponent),
            Prim::Affine { scale: amplitude, shift: 0.0 },
        ])
    }

    pub fn constant(value: f64) -> Self {
        Chain::new(vec![Prim::Affine { scale: 0.0, shift: value }])
    }

    /// Applies `scale * . + shift` after the existing chain.
    pub fn with_outer_affine(mut self, scale: f64, shift: f64) -> Self {
        self.prims.push(Prim::Affine { scale, shift });
        self
    }

    pub fn jet(&self, r: f64, order: usize) -> Result<RadialJet> {
        if r <= 0.0 {
            return Err(Error::Domain {
                radius: r,
                reason: "chain profiles require r > 0".into(),
            });
        }
        // identity jet of r itself
        let mut g = [r, 1.0, 0.0, 0.0, 0.0];
        for prim in &self.prims {
            let f = prim.stack(g[0])?;
            g = compose(&f, &g);
        }
        let jet = RadialJet { r, d: g, order: order.min(4) };
        if !jet.is_finite() {
            return Err(Error::Domain {
                radius: r,
                reason: "profile evaluation overflowed".into(),
            });
        }
        Ok(jet)
    }

    /// Exact range of the profile over radii in [lo, hi] (hi may be infinite
    /// only through upstream interval maps; radii themselves are finite).
    pub fn range(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut interval = (lo, hi);
        for prim in &self.prims {
            interval = prim.map_interval(interval.0, interval.1);
        }
        interval
    }
}

/// Faà di Bruno to order four: outer stack f (derivatives at g[0]) composed
/// with inner jet g.
fn compose(f: &[f64; 5], g: &[f64; 5]) -> [f64; 5] {
    let (g1, g2, g3, g4) = (g[1], g[2], g[3], g[4]);
    [
        f[0],
        f[1] * g1,
        f[2] * g1 * g1 + f[1] * g2,
        f[3] * g1.powi(3) + 3.0 * f[2] * g1 * g2 + f[1] * g3,
        f[4] * g1.powi(4)
            + 6.0 * f[3] * g1 * g1 * g2
            + f[2] * (3.0 * g2 * g2 + 4.0 * g1 * g3)
            + f[1] * g4,
    ]
}

/// Even polynomial in r: sum of `coeffs[k]` * (r/scale)^(2k).
///
/// Covers the C^4 test bumps (1 - (r/R)^2)^5 exactly; well-defined at r = 0.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EvenPoly {
    /// coefficient of s^k where s = (r/scale)^2
    pub coeffs: Vec<f64>,
    pub scale: f64,
}

impl EvenPoly {
    /// (1 - (r/radius)^2)^5, extended by zero outside its support.
    pub fn bump(radius: f64) -> Self {
        assert!(radius > 0.0);
        // binomial expansion of (1 - s)^5
        let coeffs = vec![1.0, -5.0, 10.0, -10.0, 5.0, -1.0];
        EvenPoly { coeffs, scale: radius }
    }

    pub fn support_radius(&self) -> f64 {
        self.scale
    }

    fn inside(&self, r: f64) -> bool {
        r < self.scale
    }

    pub fn jet(&self, r: f64, order: usize) -> RadialJet {
        let mut d = [0.0; 5];
        if self.inside(r) {
            // g(r) = sum a_k r^(2k) / scale^(2k); differentiate monomial-wise
            for (k, &a) in self.coeffs.iter().enumerate() {
                let m = 2 * k as i32;
                let c = a / self.scale.powi(m);
                let mut fall = 1.0;
                for (j, slot) in d.iter_mut().enumerate() {
                    let e = m - j as i32;
                    if e >= 0 {
                        *slot += c * fall * r.powi(e);
                        fall *= e as f64;
                    }
                }
            }
        }
        RadialJet { r, d, order: order.min(4) }
    }

    /// Exact Laplacian in R^n at any r >= 0 (including the origin).
    pub fn laplacian(&self, r: f64, n: usize) -> f64 {
        if !self.inside(r) {
            return 0.0;
        }
        let mut acc = 0.0;
        for (k, &a) in self.coeffs.iter().enumerate() {
            if k == 0 {
                continue;
            }
            let m = 2.0 * k as f64;
            acc += a / self.scale.powi(2 * k as i32) * m * (m + n as f64 - 2.0)
                * r.powi(2 * k as i32 - 2);
        }
        acc
    }

    /// Exact bilaplacian in R^n at any r >= 0.
    pub fn bilaplacian(&self, r: f64, n: usize) -> f64 {
        if !self.inside(r) {
            return 0.0;
        }
        let nf = n as f64;
        let mut acc = 0.0;
        for (k, &a) in self.coeffs.iter().enumerate() {
            if k < 2 {
                continue;
            }
            let m = 2.0 * k as f64;
            let first = m * (m + nf - 2.0);
            let second = (m - 2.0) * (m - 4.0 + nf);
            acc += a / self.scale.powi(2 * k as i32) * first * second
                * r.powi(2 * k as i32 - 4);
        }
        acc
    }

    /// Range over radii in [lo, hi] by scanning the s-polynomial for interior
    /// extrema (derivative sign changes refined by bisection).
    pub fn range(&self, lo: f64, hi: f64) -> (f64, f64) {
        let value_at = |r: f64| self.jet(r, 0).value();
        let mut min = value_at(lo).min(value_at(hi));
        let mut max = value_at(lo).max(value_at(hi));
        let deriv_at = |r: f64| self.jet(r.min(self.scale), 1).deriv(1);
        let steps = 1024;
        let mut prev_r = lo;
        let mut prev_d = deriv_at(lo);
        for i in 1..=steps {
            let r = lo + (hi - lo) * i as f64 / steps as f64;
            let dv = deriv_at(r);
            if prev_d == 0.0 || prev_d.signum() != dv.signum() {
                let (mut a, mut b) = (prev_r, r);
                for _ in 0..60 {
                    let mid = 0.5 * (a + b);
                    if deriv_at(a).signum() == deriv_at(mid).signum() {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                let v = value_at(0.5 * (a + b));
                min = min.min(v);
                max = max.max(v);
            }
            prev_r = r;
            prev_d = dv;
        }
        (min, max)
    }
}

/// Numerically defined radial profile (e.g. a Newton potential). Jets are
/// available up to `max_order` only.
pub trait ProfileFn: Send + Sync {
    fn jet(&self, r: f64, order: usize) -> Result<RadialJet>;
    fn max_order(&self) -> usize;
}

/// A scalar radial profile in one of three representations.
#[derive(Clone)]
pub enum Profile {
    Chain(Chain),
    EvenPoly(EvenPoly),
    Dynamic(Arc<dyn ProfileFn>),
}

impl std::fmt::Debug for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Profile::Chain(c) => f.debug_tuple("Chain").field(c).finish(),
            Profile::EvenPoly(p) => f.debug_tuple("EvenPoly").field(p).finish(),
            Profile::Dynamic(_) => f.write_str("Dynamic(..)"),
        }
    }
}

impl Profile {
    pub fn jet(&self, r: f64, order: usize) -> Result<RadialJet> {
        match self {
            Profile::Chain(c) => c.jet(r, order),
            Profile::EvenPoly(p) => Ok(p.jet(r, order)),
            Profile::Dynamic(d) => {
                if order > d.max_order() {
                    return Err(Error::Order { requested: order, max: d.max_order() });
                }
                d.jet(r, order)
            }
        }
    }

    pub fn max_order(&self) -> usize {
        match self {
            Profile::Chain(_) | Profile::EvenPoly(_) => 4,
            Profile::Dynamic(d) => d.max_order(),
        }
    }

    /// Exact range over [lo, hi] when the representation supports it.
    pub fn range(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        match self {
            Profile::Chain(c) => Some(c.range(lo, hi)),
            Profile::EvenPoly(p) => Some(p.range(lo, hi)),
            Profile::Dynamic(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 4th-order central difference of the k-1 jet entry, used as the
    /// independent check of the k-th entry, one level at a time.
    fn fd_first_deriv(f: impl Fn(f64) -> f64, r: f64, h: f64) -> f64 {
        (-f(r + 2.0 * h) + 8.0 * f(r + h) - 8.0 * f(r - h) + f(r - 2.0 * h)) / (12.0 * h)
    }

    fn assert_jet_cascade(chain: &Chain, r: f64) {
        let h = 1e-5 * r;
        for k in 1..=4usize {
            let lower = |x: f64| chain.jet(x, 4).unwrap().deriv(k - 1);
            let fd = fd_first_deriv(lower, r, h);
            let exact = chain.jet(r, 4).unwrap().deriv(k);
            let scale = exact.abs().max(fd.abs()).max(1e-30);
            assert!(
                ((fd - exact) / scale).abs() < 1e-5,
                "order {k} at r={r}: fd={fd} exact={exact}"
            );
        }
    }

    #[test]
    fn chain_derivatives_match_finite_differences() {
        for chain in [
            Chain::sin_log(-2.0),
            Chain::cos_log(3.0),
            Chain::sin_log_log_inv(),
            Chain::cos_log_log_inv(),
            Chain::power_law(1.7, -1.5),
            Chain::power_law(1.0, 2.0),
        ] {
            for r in [0.01, 0.05, 0.1] {
                assert_jet_cascade(&chain, r);
            }
        }
    }

    #[test]
    fn power_law_jet_is_exact() {
        let chain = Chain::power_law(3.0, 2.0);
        let jet = chain.jet(1.5, 4).unwrap();
        assert!((jet.value() - 3.0 * 2.25).abs() < 1e-14);
        assert!((jet.deriv(1) - 9.0).abs() < 1e-14);
        assert!((jet.deriv(2) - 6.0).abs() < 1e-14);
        assert!((jet.deriv(3)).abs() < 1e-14);
        assert!((jet.deriv(4)).abs() < 1e-14);
    }

    #[test]
    fn log_log_profile_value() {
        // sin(log(log(1/r))) at r = e^{-4}: log(1/r) = 4
        let chain = Chain::sin_log_log_inv();
        let r = (-4.0f64).exp();
        let jet = chain.jet(r, 0).unwrap();
        assert!((jet.value() - 4.0f64.ln().sin()).abs() < 1e-14);
    }

    #[test]
    fn chain_rejects_nonpositive_radius() {
        let chain = Chain::sin_log(1.0);
        assert!(matches!(chain.jet(0.0, 2), Err(Error::Domain { .. })));
        assert!(matches!(chain.jet(-1.0, 2), Err(Error::Domain { .. })));
    }

    #[test]
    fn bump_is_c4_at_support_edge() {
        // every derivative up to order 4 carries a factor (1 - (r/R)^2), so
        // all of them vanish continuously at the support boundary
        let bump = EvenPoly::bump(0.5);
        let jet = bump.jet(0.5 - 1e-9, 4);
        for k in 0..=4 {
            assert!(jet.deriv(k).abs() < 1e-3, "order {k}: {}", jet.deriv(k));
        }
        let outside = bump.jet(0.7, 4);
        for k in 0..=4 {
            assert_eq!(outside.deriv(k), 0.0);
        }
    }

    #[test]
    fn bump_laplacian_matches_jet_formula_away_from_origin() {
        let bump = EvenPoly::bump(1.0);
        let n = 4;
        for r in [0.1, 0.3, 0.7, 0.95] {
            let jet = bump.jet(r, 2);
            let from_jet = jet.deriv(2) + (n as f64 - 1.0) * jet.deriv(1) / r;
            let exact = bump.laplacian(r, n);
            assert!((from_jet - exact).abs() < 1e-12 * exact.abs().max(1.0));
        }
        // at the origin the closed form must equal n * g''(0)
        let g2 = bump.jet(0.0, 2).deriv(2);
        assert!((bump.laplacian(0.0, n) - n as f64 * g2).abs() < 1e-13);
    }

    #[test]
    fn bump_bilaplacian_matches_repeated_laplacian() {
        // Delta^2 of r^4: Delta r^4 = 4(n+2) r^2, Delta^2 r^4 = 8n(n+2).
        let quartic = EvenPoly { coeffs: vec![0.0, 0.0, 1.0], scale: 1.0 };
        for n in [3usize, 5, 6] {
            let v = quartic.bilaplacian(0.3, n);
            let want = 8.0 * n as f64 * (n as f64 + 2.0);
            assert!((v - want).abs() < 1e-11, "n={n}: {v} vs {want}");
        }
    }

    #[test]
    fn trig_range_full_and_partial() {
        assert_eq!(trig_range(0.0, 10.0, false), (-1.0, 1.0));
        assert_eq!(trig_range(2.0, f64::INFINITY, false), (-1.0, 1.0));
        let (lo, hi) = trig_range(0.1, 1.0, false);
        assert!((lo - 0.1f64.sin()).abs() < 1e-15);
        assert!((hi - 1.0f64.sin()).abs() < 1e-15);
        // interval containing the maximum of sin; the minimum is at the left
        // endpoint since sin(1) < sin(2)
        let (lo, hi) = trig_range(1.0, 2.0, false);
        assert!((hi - 1.0).abs() < 1e-15);
        assert!((lo - 1.0f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn chain_range_is_exact_for_log_log() {
        // over (0, r] the argument log log(1/.) sweeps [loglog(1/r), inf),
        // so the sine range is the full [-1, 1]
        let chain = Chain::sin_log_log_inv();
        let (lo, hi) = chain.range(1e-300, (-4.0f64).exp());
        assert_eq!((lo, hi), (-1.0, 1.0));
        // over a thin annulus the argument is short and the range partial
        let (lo, hi) = chain.range(0.01, 0.0101);
        assert!(hi - lo < 0.01);
    }

    #[test]
    fn monotone_power_range() {
        let chain = Chain::power_law(1.0, 0.5);
        let (lo, hi) = chain.range(0.04, 0.25);
        assert!((lo - 0.2).abs() < 1e-15);
        assert!((hi - 0.5).abs() < 1e-15);
    }
}
