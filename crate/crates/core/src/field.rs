//! Catalog of fields with exact jets to order four.
//!
//! Three singular sphere-valued maps (doubly logarithmic in n = 4,
//! sin/cos of (2-n) log|x| for second-order systems, of (4-n) log|x| for
//! fourth-order ones), fundamental solutions of the Laplacian and the
//! bilaplacian, harmonic/biharmonic polynomial corpora, and power-law
//! comparison fields. Radial components are profile chains; polynomial
//! components carry multi-index coefficient maps differentiated symbolically.

use crate::error::{Error, Result};
use crate::profile::{Chain, EvenPoly, Profile, RadialJet};
use crate::quadrature::{integrate_radial, Tol};
use crate::special::{ball_monomial_integral, unit_ball_volume};
use std::collections::BTreeMap;

/// Radius of the singular catalog domain: those fields live on
/// 0 < |x| <= exp(-2).
pub fn omega_radius() -> f64 {
    (-2.0f64).exp()
}

/// Default inner evaluation cutoff guarding against floating-point
/// underflow in the nested logarithms.
pub const DEFAULT_INNER_CUTOFF: f64 = 1e-12;

// ---------------------------------------------------------------------------
// symmetric tensors
// ---------------------------------------------------------------------------

fn binomial(m: u64, k: u64) -> u64 {
    if k > m {
        return 0;
    }
    let k = k.min(m - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (m - i) / (i + 1);
    }
    acc
}

/// Number of nondecreasing tuples of length `t` over `m` symbols.
fn multiset_count(m: usize, t: usize) -> usize {
    binomial((m + t - 1) as u64, t as u64) as usize
}

/// Dense symmetric tensor of order 3 or 4, indexed by sorted multi-indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor {
    pub n: usize,
    pub order: usize,
    data: Vec<f64>,
}

impl SymTensor {
    pub fn zeros(n: usize, order: usize) -> Self {
        assert!(order == 3 || order == 4);
        SymTensor { n, order, data: vec![0.0; multiset_count(n, order)] }
    }

    /// Lexicographic rank of the sorted tuple among nondecreasing tuples.
    fn rank(&self, sorted: &[usize]) -> usize {
        let t = sorted.len();
        let mut rank = 0usize;
        let mut prev = 0usize;
        for (pos, &a) in sorted.iter().enumerate() {
            for v in prev..a {
                rank += multiset_count(self.n - v, t - pos - 1);
            }
            prev = a;
        }
        rank
    }

    pub fn get(&self, indices: &[usize]) -> f64 {
        let mut idx: Vec<usize> = indices.to_vec();
        idx.sort_unstable();
        self.data[self.rank(&idx)]
    }

    pub fn set_sorted(&mut self, sorted: &[usize], value: f64) {
        let r = self.rank(sorted);
        self.data[r] = value;
    }

    /// Iterates over sorted index tuples.
    pub fn sorted_indices(n: usize, order: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut tuple = vec![0usize; order];
        loop {
            out.push(tuple.clone());
            // advance the nondecreasing tuple
            let mut pos = order;
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                if tuple[pos] < n - 1 {
                    tuple[pos] += 1;
                    for later in pos + 1..order {
                        tuple[later] = tuple[pos];
                    }
                    break;
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// jet bundle
// ---------------------------------------------------------------------------

/// Values and derivative tensors of a K-component field at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct JetBundle {
    pub point: Vec<f64>,
    pub dim_n: usize,
    pub order: usize,
    values: Vec<f64>,
    gradient: Vec<f64>,
    hessian: Vec<f64>,
    third: Vec<SymTensor>,
    fourth: Vec<SymTensor>,
}

impl JetBundle {
    pub fn components(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, comp: usize) -> f64 {
        self.values[comp]
    }

    pub fn grad(&self, comp: usize) -> &[f64] {
        &self.gradient[comp * self.dim_n..(comp + 1) * self.dim_n]
    }

    pub fn hess(&self, comp: usize, i: usize, j: usize) -> f64 {
        assert!(self.order >= 2, "hessian needs order >= 2");
        self.hessian[comp * self.dim_n * self.dim_n + i * self.dim_n + j]
    }

    pub fn third(&self, comp: usize, i: usize, j: usize, k: usize) -> f64 {
        assert!(self.order >= 3);
        self.third[comp].get(&[i, j, k])
    }

    pub fn fourth(&self, comp: usize, i: usize, j: usize, k: usize, l: usize) -> f64 {
        assert!(self.order >= 4);
        self.fourth[comp].get(&[i, j, k, l])
    }

    /// |grad u|^2 summed over components.
    pub fn grad_norm_sq(&self) -> f64 {
        self.gradient.iter().map(|g| g * g).sum()
    }

    /// Frobenius |grad^2 u|^2 summed over components.
    pub fn hess_norm_sq(&self) -> f64 {
        assert!(self.order >= 2);
        self.hessian.iter().map(|h| h * h).sum()
    }

    /// Trace of the Hessian of one component.
    pub fn laplacian(&self, comp: usize) -> f64 {
        assert!(self.order >= 2);
        (0..self.dim_n).map(|i| self.hess(comp, i, i)).sum()
    }

    /// Bilaplacian of one component from the fourth-order tensor.
    pub fn bilaplacian(&self, comp: usize) -> f64 {
        assert!(self.order >= 4);
        let mut acc = 0.0;
        for i in 0..self.dim_n {
            for j in 0..self.dim_n {
                acc += self.fourth(comp, i, i, j, j);
            }
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// polynomials
// ---------------------------------------------------------------------------

/// Polynomial in n variables as a multi-index coefficient map.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Poly {
    pub n: usize,
    pub terms: BTreeMap<Vec<u32>, f64>,
}

impl Poly {
    pub fn zero(n: usize) -> Self {
        Poly { n, terms: BTreeMap::new() }
    }

    pub fn monomial(alpha: Vec<u32>, coeff: f64) -> Self {
        let n = alpha.len();
        let mut terms = BTreeMap::new();
        if coeff != 0.0 {
            terms.insert(alpha, coeff);
        }
        Poly { n, terms }
    }

    pub fn add_term(&mut self, alpha: Vec<u32>, coeff: f64) {
        if coeff == 0.0 {
            return;
        }
        match self.terms.entry(alpha) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                *slot.get_mut() += coeff;
                if *slot.get() == 0.0 {
                    slot.remove();
                }
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (alpha, &c) in &self.terms {
            let mut term = c;
            for (xi, &a) in x.iter().zip(alpha) {
                term *= xi.powi(a as i32);
            }
            acc += term;
        }
        acc
    }

    /// Symbolic partial derivative in direction i.
    pub fn partial(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.n);
        for (alpha, &c) in &self.terms {
            if alpha[i] == 0 {
                continue;
            }
            let mut beta = alpha.clone();
            beta[i] -= 1;
            out.add_term(beta, c * alpha[i] as f64);
        }
        out
    }

    /// Symbolic Laplacian.
    pub fn laplacian(&self) -> Poly {
        let mut out = Poly::zero(self.n);
        for i in 0..self.n {
            let second = self.partial(i).partial(i);
            for (alpha, &c) in &second.terms {
                out.add_term(alpha.clone(), c);
            }
        }
        out
    }

    pub fn bilaplacian(&self) -> Poly {
        self.laplacian().laplacian()
    }

    pub fn multiply(&self, other: &Poly) -> Poly {
        assert_eq!(self.n, other.n);
        let mut out = Poly::zero(self.n);
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                let alpha: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(alpha, ca * cb);
            }
        }
        out
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|a| a.iter().sum()).max().unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// Exact integral over the ball B_R centered at the origin.
    pub fn ball_integral(&self, radius: f64) -> f64 {
        let mut acc = 0.0;
        for (alpha, &c) in &self.terms {
            acc += c * ball_monomial_integral(alpha, self.n, radius);
        }
        acc
    }

    pub fn scaled(&self, factor: f64) -> Poly {
        let mut out = Poly::zero(self.n);
        for (alpha, &c) in &self.terms {
            out.add_term(alpha.clone(), c * factor);
        }
        out
    }
}

/// Polynomial component with precomputed derivative polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyComponent {
    pub poly: Poly,
    grad: Vec<Poly>,
    hess: Vec<Poly>, // row-major n x n
}

impl PolyComponent {
    pub fn new(poly: Poly) -> Self {
        let n = poly.n;
        let grad: Vec<Poly> = (0..n).map(|i| poly.partial(i)).collect();
        let mut hess = Vec::with_capacity(n * n);
        for gi in &grad {
            for j in 0..n {
                hess.push(gi.partial(j));
            }
        }
        PolyComponent { poly, grad, hess }
    }
}

// ---------------------------------------------------------------------------
// field specification
// ---------------------------------------------------------------------------

/// Catalog family tags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// u = (sin, cos) of log log |x|^-1 in dimension 4
    LogLog4D,
    /// u = (sin, cos) of (2-n) log |x|
    SinLogSecondOrder,
    /// u = (sin, cos) of (4-n) log |x|
    SinLogFourthOrder,
    FundamentalLaplace,
    FundamentalBilap,
    HarmonicPoly,
    BiharmonicPoly,
    PowerLaw(f64),
    Custom,
}

impl Family {
    pub fn name(&self) -> String {
        match self {
            Family::LogLog4D => "loglog4".into(),
            Family::SinLogSecondOrder => "sinlog2nd".into(),
            Family::SinLogFourthOrder => "sinlog4th".into(),
            Family::FundamentalLaplace => "fundamental-laplace".into(),
            Family::FundamentalBilap => "fundamental-bilap".into(),
            Family::HarmonicPoly => "harmonic-poly".into(),
            Family::BiharmonicPoly => "biharmonic-poly".into(),
            Family::PowerLaw(_) => "power-law".into(),
            Family::Custom => "custom".into(),
        }
    }
}

/// Radial or polynomial component structure.
#[derive(Debug, Clone)]
pub enum FieldKind {
    Radial(Vec<Profile>),
    Polynomial(Vec<PolyComponent>),
}

/// Result of the one-time numerical normalization of the bilaplacian kernel.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KernelCalibration {
    pub constant: f64,
    /// relative defect of the weak identity on the held-out bump
    pub residual: f64,
}

/// A vector field R^n -> R^K with exact jets to order four.
#[derive(Debug, Clone)]
pub struct FieldSpec {
    pub dim_n: usize,
    pub dim_k: usize,
    pub kind: FieldKind,
    pub family: Family,
    /// evaluation permitted on r_min <= |x| <= r_max (r_max None = all of R^n);
    /// r_min = 0 only for fields defined at the origin (polynomials)
    pub r_min: f64,
    pub r_max: Option<f64>,
    pub calibration: Option<KernelCalibration>,
}

impl FieldSpec {
    // -- constructors -------------------------------------------------------

    /// The doubly logarithmic sphere-valued map in dimension four:
    /// u1 = sin(log log |x|^-1), u2 = cos(log log |x|^-1) on 0 < |x| <= e^-2.
    pub fn log_log_4d() -> FieldSpec {
        FieldSpec {
            dim_n: 4,
            dim_k: 2,
            kind: FieldKind::Radial(vec![
                Profile::Chain(Chain::sin_log_log_inv()),
                Profile::Chain(Chain::cos_log_log_inv()),
            ]),
            family: Family::LogLog4D,
            r_min: DEFAULT_INNER_CUTOFF,
            r_max: Some(omega_radius()),
            calibration: None,
        }
    }

    /// u1 = sin((2-n) log|x|), u2 = cos((2-n) log|x|) for n >= 3.
    pub fn sin_log_second_order(n: usize) -> Result<FieldSpec> {
        if n < 3 {
            return Err(Error::UnsupportedDimension { n, operator_order: 2 });
        }
        let kappa = 2.0 - n as f64;
        Ok(FieldSpec {
            dim_n: n,
            dim_k: 2,
            kind: FieldKind::Radial(vec![
                Profile::Chain(Chain::sin_log(kappa)),
                Profile::Chain(Chain::cos_log(kappa)),
            ]),
            family: Family::SinLogSecondOrder,
            r_min: DEFAULT_INNER_CUTOFF,
            r_max: Some(omega_radius()),
            calibration: None,
        })
    }

    /// u1 = sin((4-n) log|x|), u2 = cos((4-n) log|x|) for n >= 5.
    pub fn sin_log_fourth_order(n: usize) -> Result<FieldSpec> {
        if n < 5 {
            return Err(Error::UnsupportedDimension { n, operator_order: 4 });
        }
        let kappa = 4.0 - n as f64;
        Ok(FieldSpec {
            dim_n: n,
            dim_k: 2,
            kind: FieldKind::Radial(vec![
                Profile::Chain(Chain::sin_log(kappa)),
                Profile::Chain(Chain::cos_log(kappa)),
            ]),
            family: Family::SinLogFourthOrder,
            r_min: DEFAULT_INNER_CUTOFF,
            r_max: Some(omega_radius()),
            calibration: None,
        })
    }

    /// Scalar field amplitude * |x|^exponent on r > 0.
    pub fn power_law(amplitude: f64, exponent: f64, n: usize) -> FieldSpec {
        FieldSpec {
            dim_n: n,
            dim_k: 1,
            kind: FieldKind::Radial(vec![Profile::Chain(Chain::power_law(amplitude, exponent))]),
            family: Family::PowerLaw(exponent),
            r_min: 0.0,
            r_max: None,
            calibration: None,
        }
    }

    /// Constant scalar field.
    pub fn constant(value: f64, n: usize) -> FieldSpec {
        FieldSpec {
            dim_n: n,
            dim_k: 1,
            kind: FieldKind::Radial(vec![Profile::Chain(Chain::constant(value))]),
            family: Family::Custom,
            r_min: 0.0,
            r_max: None,
            calibration: None,
        }
    }

    /// Scalar polynomial field.
    pub fn polynomial(poly: Poly, family: Family) -> FieldSpec {
        let n = poly.n;
        FieldSpec {
            dim_n: n,
            dim_k: 1,
            kind: FieldKind::Polynomial(vec![PolyComponent::new(poly)]),
            family,
            r_min: 0.0,
            r_max: None,
            calibration: None,
        }
    }

    /// Radial field from explicit component profiles.
    pub fn radial(profiles: Vec<Profile>, n: usize, family: Family) -> FieldSpec {
        let k = profiles.len();
        FieldSpec {
            dim_n: n,
            dim_k: k,
            kind: FieldKind::Radial(profiles),
            family,
            r_min: 0.0,
            r_max: None,
            calibration: None,
        }
    }

    /// Copy with a different inner evaluation cutoff (deep scans need to
    /// descend far below the default underflow guard).
    pub fn with_inner_cutoff(&self, r_min: f64) -> FieldSpec {
        let mut copy = self.clone();
        copy.r_min = r_min;
        copy
    }

    /// Copy with component `comp` multiplied by `factor`.
    pub fn with_component_scaled(&self, comp: usize, factor: f64) -> FieldSpec {
        let mut copy = self.clone();
        match &mut copy.kind {
            FieldKind::Radial(profiles) => {
                let scaled = match &profiles[comp] {
                    Profile::Chain(c) => Profile::Chain(c.clone().with_outer_affine(factor, 0.0)),
                    Profile::EvenPoly(p) => {
                        let mut p = p.clone();
                        for c in &mut p.coeffs {
                            *c *= factor;
                        }
                        Profile::EvenPoly(p)
                    }
                    Profile::Dynamic(_) => panic!("cannot scale a numeric profile"),
                };
                profiles[comp] = scaled;
            }
            FieldKind::Polynomial(comps) => {
                comps[comp] = PolyComponent::new(comps[comp].poly.scaled(factor));
            }
        }
        copy
    }

    pub fn is_radial(&self) -> bool {
        matches!(self.kind, FieldKind::Radial(_))
    }

    pub fn profiles(&self) -> Option<&[Profile]> {
        match &self.kind {
            FieldKind::Radial(p) => Some(p),
            FieldKind::Polynomial(_) => None,
        }
    }

    pub fn poly_components(&self) -> Option<&[PolyComponent]> {
        match &self.kind {
            FieldKind::Polynomial(c) => Some(c),
            FieldKind::Radial(_) => None,
        }
    }

    // -- evaluation ---------------------------------------------------------

    fn check_radius(&self, r: f64) -> Result<()> {
        if self.is_radial() && r <= 0.0 {
            return Err(Error::Domain { radius: r, reason: "singular at the origin".into() });
        }
        if r < self.r_min {
            return Err(Error::Domain {
                radius: r,
                reason: format!("below inner cutoff {:.3e}", self.r_min),
            });
        }
        if let Some(r_max) = self.r_max {
            if r > r_max {
                return Err(Error::Domain {
                    radius: r,
                    reason: format!("outside domain radius {r_max:.6e}"),
                });
            }
        }
        Ok(())
    }

    /// Radial jets of all component profiles at radius r.
    pub fn radial_jets(&self, r: f64, order: usize) -> Result<Vec<RadialJet>> {
        if order > 4 {
            return Err(Error::Order { requested: order, max: 4 });
        }
        self.check_radius(r)?;
        match &self.kind {
            FieldKind::Radial(profiles) => {
                profiles.iter().map(|p| p.jet(r, order)).collect()
            }
            FieldKind::Polynomial(_) => Err(Error::Config(
                "radial jets are only defined for radial fields".into(),
            )),
        }
    }

    /// Evaluates values and derivative tensors up to `order` at a point.
    pub fn eval_jet(&self, x: &[f64], order: usize) -> Result<JetBundle> {
        if order > 4 {
            return Err(Error::Order { requested: order, max: 4 });
        }
        assert_eq!(x.len(), self.dim_n, "point dimension mismatch");
        let n = self.dim_n;
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();

        let mut bundle = JetBundle {
            point: x.to_vec(),
            dim_n: n,
            order,
            values: Vec::with_capacity(self.dim_k),
            gradient: vec![0.0; self.dim_k * n],
            hessian: if order >= 2 { vec![0.0; self.dim_k * n * n] } else { Vec::new() },
            third: Vec::new(),
            fourth: Vec::new(),
        };

        match &self.kind {
            FieldKind::Radial(profiles) => {
                self.check_radius(r)?;
                for (comp, profile) in profiles.iter().enumerate() {
                    let jet = profile.jet(r, order)?;
                    fill_radial_tensors(&mut bundle, comp, &jet, x, r, order);
                }
            }
            FieldKind::Polynomial(comps) => {
                for (comp, pc) in comps.iter().enumerate() {
                    bundle.values.push(pc.poly.eval(x));
                    for i in 0..n {
                        bundle.gradient[comp * n + i] = pc.grad[i].eval(x);
                    }
                    if order >= 2 {
                        for i in 0..n {
                            for j in 0..n {
                                bundle.hessian[comp * n * n + i * n + j] = pc.hess[i * n + j].eval(x);
                            }
                        }
                    }
                    if order >= 3 {
                        let mut t3 = SymTensor::zeros(n, 3);
                        for idx in SymTensor::sorted_indices(n, 3) {
                            let p = pc.hess[idx[0] * n + idx[1]].partial(idx[2]);
                            t3.set_sorted(&idx, p.eval(x));
                        }
                        bundle.third.push(t3);
                    }
                    if order >= 4 {
                        let mut t4 = SymTensor::zeros(n, 4);
                        for idx in SymTensor::sorted_indices(n, 4) {
                            let p = pc.hess[idx[0] * n + idx[1]].partial(idx[2]).partial(idx[3]);
                            t4.set_sorted(&idx, p.eval(x));
                        }
                        bundle.fourth.push(t4);
                    }
                }
            }
        }
        Ok(bundle)
    }

    /// Scalar quantities derived from radial jets at radius r: values,
    /// per-component Laplacians/bilaplacians, |grad u| and Frobenius
    /// |grad^2 u|. Cheaper and more stable than assembling full tensors.
    pub fn radial_derived(&self, r: f64, order: usize) -> Result<RadialDerived> {
        let jets = self.radial_jets(r, order)?;
        let n = self.dim_n as f64;
        let mut values = Vec::with_capacity(jets.len());
        let mut laplacians = Vec::with_capacity(jets.len());
        let mut bilaplacians = Vec::with_capacity(jets.len());
        let mut grad_sq = 0.0;
        let mut hess_sq = 0.0;
        for jet in &jets {
            values.push(jet.value());
            if order >= 1 {
                grad_sq += jet.deriv(1) * jet.deriv(1);
            }
            if order >= 2 {
                let lap = jet.deriv(2) + (n - 1.0) * jet.deriv(1) / r;
                laplacians.push(lap);
                // |Hess|^2 = B2^2 r^4 + 2 B1 B2 r^2 + n B1^2
                let b1 = jet.deriv(1) / r;
                let b2 = jet.deriv(2) / (r * r) - jet.deriv(1) / (r * r * r);
                hess_sq += b2 * b2 * r.powi(4) + 2.0 * b1 * b2 * r * r + n * b1 * b1;
            }
            if order >= 4 {
                bilaplacians.push(radial_bilaplacian_from_jet(jet, self.dim_n));
            }
        }
        Ok(RadialDerived {
            r,
            values,
            laplacians,
            bilaplacians,
            grad_norm: grad_sq.sqrt(),
            hess_norm: hess_sq.sqrt(),
        })
    }
}

/// Scalar radial diagnostics at one radius.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialDerived {
    pub r: f64,
    pub values: Vec<f64>,
    pub laplacians: Vec<f64>,
    pub bilaplacians: Vec<f64>,
    pub grad_norm: f64,
    pub hess_norm: f64,
}

/// Laplacian of a radial profile from its jet: g'' + (n-1) g'/r.
pub fn radial_laplacian_from_jet(jet: &RadialJet, n: usize) -> f64 {
    assert!(jet.order >= 2, "laplacian needs a jet of order >= 2");
    jet.deriv(2) + (n as f64 - 1.0) * jet.deriv(1) / jet.r
}

/// Bilaplacian of a radial profile from an order-4 jet, obtained by applying
/// the radial Laplacian identity twice: with L = g'' + (n-1) g'/r,
/// Delta^2 g = L'' + (n-1) L'/r.
pub fn radial_bilaplacian_from_jet(jet: &RadialJet, n: usize) -> f64 {
    assert!(jet.order >= 4, "bilaplacian needs a jet of order >= 4");
    let r = jet.r;
    let nf = n as f64 - 1.0;
    let l1 = jet.deriv(3) + nf * (jet.deriv(2) / r - jet.deriv(1) / (r * r));
    let l2 = jet.deriv(4)
        + nf * (jet.deriv(3) / r - 2.0 * jet.deriv(2) / (r * r) + 2.0 * jet.deriv(1) / (r * r * r));
    l2 + nf * l1 / r
}

/// Fills gradient/hessian/third/fourth tensors of one radial component using
/// B_m = (d/r dr)^m g:
///   grad_i    = B1 x_i
///   hess_ij   = B2 x_i x_j + B1 delta_ij
///   third_ijk = B3 x_i x_j x_k + B2 (delta_ij x_k + delta_ik x_j + delta_jk x_i)
///   fourth    = B4 xxxx + B3 (six delta-xx terms) + B2 (three delta-delta terms)
fn fill_radial_tensors(
    bundle: &mut JetBundle,
    comp: usize,
    jet: &RadialJet,
    x: &[f64],
    r: f64,
    order: usize,
) {
    let n = x.len();
    bundle.values.push(jet.value());
    let b1 = jet.d[1] / r;
    if order >= 1 {
        for (i, xi) in x.iter().enumerate() {
            bundle.gradient[comp * n + i] = b1 * xi;
        }
    }
    if order >= 2 {
        let b2 = jet.d[2] / (r * r) - jet.d[1] / (r * r * r);
        for i in 0..n {
            for j in 0..n {
                let mut h = b2 * x[i] * x[j];
                if i == j {
                    h += b1;
                }
                bundle.hessian[comp * n * n + i * n + j] = h;
            }
        }
        if order >= 3 {
            let b3 = jet.d[3] / r.powi(3) - 3.0 * jet.d[2] / r.powi(4) + 3.0 * jet.d[1] / r.powi(5);
            let mut t3 = SymTensor::zeros(n, 3);
            for idx in SymTensor::sorted_indices(n, 3) {
                let (i, j, k) = (idx[0], idx[1], idx[2]);
                let mut v = b3 * x[i] * x[j] * x[k];
                if i == j {
                    v += b2 * x[k];
                }
                if i == k {
                    v += b2 * x[j];
                }
                if j == k {
                    v += b2 * x[i];
                }
                t3.set_sorted(&idx, v);
            }
            bundle.third.push(t3);
            if order >= 4 {
                let b4 = jet.d[4] / r.powi(4) - 6.0 * jet.d[3] / r.powi(5)
                    + 15.0 * jet.d[2] / r.powi(6)
                    - 15.0 * jet.d[1] / r.powi(7);
                let mut t4 = SymTensor::zeros(n, 4);
                for idx in SymTensor::sorted_indices(n, 4) {
                    let (i, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
                    let mut v = b4 * x[i] * x[j] * x[k] * x[l];
                    let pairs = [
                        (i == j, k, l),
                        (i == k, j, l),
                        (i == l, j, k),
                        (j == k, i, l),
                        (j == l, i, k),
                        (k == l, i, j),
                    ];
                    for (eq, a, b) in pairs {
                        if eq {
                            v += b3 * x[a] * x[b];
                        }
                    }
                    let deltas = [(i == j && k == l), (i == k && j == l), (i == l && j == k)];
                    for eq in deltas {
                        if eq {
                            v += b2;
                        }
                    }
                    t4.set_sorted(&idx, v);
                }
                bundle.fourth.push(t4);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// fundamental solutions
// ---------------------------------------------------------------------------

/// Fundamental solution of the Laplacian (operator order 2, n >= 3,
/// normalized so that -Delta Phi = delta) or of the bilaplacian
/// (operator order 4, n >= 5, normalized so that Delta^2 Psi = delta).
///
/// The bilaplacian constant is fixed by a one-time numerical calibration:
/// integral of Psi Delta^2 phi over R^n must equal phi(0) for a reference
/// C^4 bump supported in the unit ball; the calibration residual on a
/// held-out bump is stored with the field.
pub fn fundamental_solution(n: usize, operator_order: usize) -> Result<FieldSpec> {
    match operator_order {
        2 => {
            if n < 3 {
                return Err(Error::UnsupportedDimension { n, operator_order });
            }
            let bn = unit_ball_volume(n);
            let amplitude = 1.0 / (n as f64 * (n as f64 - 2.0) * bn);
            let mut field = FieldSpec::power_law(amplitude, 2.0 - n as f64, n);
            field.family = Family::FundamentalLaplace;
            Ok(field)
        }
        4 => {
            if n < 5 {
                return Err(Error::UnsupportedDimension { n, operator_order });
            }
            let calibration = calibrate_bilaplacian_constant(n)?;
            let mut field = FieldSpec::power_law(calibration.constant, 4.0 - n as f64, n);
            field.family = Family::FundamentalBilap;
            field.calibration = Some(calibration);
            Ok(field)
        }
        _ => Err(Error::UnsupportedDimension { n, operator_order }),
    }
}

/// One-time calibration of c_n: the pairing of r^(4-n) against Delta^2 of a
/// reference bump is linear in c_n, so c_n = phi(0) / integral. The residual
/// reported is the relative defect on a held-out bump of different radius.
fn calibrate_bilaplacian_constant(n: usize) -> Result<KernelCalibration> {
    let pairing = |bump: &EvenPoly| -> Result<f64> {
        let h = |r: f64| r.powf(4.0 - n as f64) * bump.bilaplacian(r, n);
        integrate_radial(&h, 0.0, bump.support_radius(), n, Tol::abs(1e-12), 0.0)?.value()
    };
    let reference = EvenPoly::bump(1.0);
    let phi0 = reference.jet(0.0, 0).value();
    let integral = pairing(&reference)?;
    let constant = phi0 / integral;

    let held_out = EvenPoly::bump(0.8);
    let check = constant * pairing(&held_out)?;
    let residual = (check - held_out.jet(0.0, 0).value()).abs() / held_out.jet(0.0, 0).value();
    Ok(KernelCalibration { constant, residual })
}

// ---------------------------------------------------------------------------
// polynomial corpora
// ---------------------------------------------------------------------------

/// Which kernel the comparison corpus annihilates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusKind {
    Harmonic,
    Biharmonic,
}

/// Polynomial fields with Delta phi = 0 (or Delta^2 phi = 0) exactly, one
/// scalar field per kernel-basis element, degrees 0..=max_degree.
///
/// Each entry is verified by the symbolic Laplacian (bilaplacian) of its
/// coefficients at construction time.
pub fn comparison_corpus(kind: CorpusKind, n: usize, max_degree: u32) -> Result<Vec<FieldSpec>> {
    if max_degree > 4 {
        return Err(Error::Config("corpus degree capped at 4".into()));
    }
    let mut out = Vec::new();
    for degree in 0..=max_degree {
        for poly in operator_kernel_basis(kind, n, degree) {
            let verified = match kind {
                CorpusKind::Harmonic => poly.laplacian(),
                CorpusKind::Biharmonic => poly.bilaplacian(),
            };
            let scale = poly.max_abs_coeff().max(1.0);
            assert!(
                verified.max_abs_coeff() <= 1e-10 * scale,
                "corpus entry failed symbolic verification"
            );
            let family = match kind {
                CorpusKind::Harmonic => Family::HarmonicPoly,
                CorpusKind::Biharmonic => Family::BiharmonicPoly,
            };
            out.push(FieldSpec::polynomial(poly, family));
        }
    }
    Ok(out)
}

/// Multi-indices of total degree d over n variables, lexicographic.
fn multi_indices(n: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 1 {
            let mut alpha = prefix.clone();
            alpha.push(d);
            out.push(alpha);
            return;
        }
        for a in (0..=d).rev() {
            prefix.push(a);
            rec(n - 1, d - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, d, &mut Vec::new(), &mut out);
    out
}

/// Basis of homogeneous degree-d polynomials annihilated by Delta (or
/// Delta^2), via the kernel of the operator matrix on monomial coefficients.
fn operator_kernel_basis(kind: CorpusKind, n: usize, degree: u32) -> Vec<Poly> {
    let drop = match kind {
        CorpusKind::Harmonic => 2,
        CorpusKind::Biharmonic => 4,
    };
    let domain = multi_indices(n, degree);
    if degree < drop {
        // the operator vanishes identically on low degrees
        return domain
            .into_iter()
            .map(|alpha| Poly::monomial(alpha, 1.0))
            .collect();
    }
    let image = multi_indices(n, degree - drop);
    let image_index: BTreeMap<Vec<u32>, usize> =
        image.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();

    // rows = image monomials, cols = domain monomials
    let rows = image.len();
    let cols = domain.len();
    let mut matrix = vec![0.0f64; rows * cols];
    for (col, alpha) in domain.iter().enumerate() {
        let mono = Poly::monomial(alpha.clone(), 1.0);
        let applied = match kind {
            CorpusKind::Harmonic => mono.laplacian(),
            CorpusKind::Biharmonic => mono.bilaplacian(),
        };
        for (beta, c) in &applied.terms {
            let row = image_index[beta];
            matrix[row * cols + col] = *c;
        }
    }

    let kernel = nullspace(&mut matrix, rows, cols);
    kernel
        .into_iter()
        .map(|coeffs| {
            let mut poly = Poly::zero(n);
            for (alpha, c) in domain.iter().zip(coeffs) {
                if c.abs() > 1e-12 {
                    poly.add_term(alpha.clone(), c);
                }
            }
            poly
        })
        .collect()
}

/// Nullspace basis of a dense row-major matrix by Gauss-Jordan elimination
/// with partial pivoting.
fn nullspace(matrix: &mut [f64], rows: usize, cols: usize) -> Vec<Vec<f64>> {
    let mut pivot_cols = Vec::new();
    let mut row = 0usize;
    for col in 0..cols {
        if row >= rows {
            break;
        }
        // partial pivot
        let (best_row, best_val) = (row..rows)
            .map(|r| (r, matrix[r * cols + col].abs()))
            .fold((row, 0.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if best_val < 1e-9 {
            continue;
        }
        matrix.swap_range(best_row, row, cols);
        let pivot = matrix[row * cols + col];
        for c in 0..cols {
            matrix[row * cols + c] /= pivot;
        }
        for r in 0..rows {
            if r != row {
                let factor = matrix[r * cols + col];
                if factor != 0.0 {
                    for c in 0..cols {
                        matrix[r * cols + c] -= factor * matrix[row * cols + c];
                    }
                }
            }
        }
        pivot_cols.push(col);
        row += 1;
    }

    let pivot_set: std::collections::BTreeSet<usize> = pivot_cols.iter().cloned().collect();
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![0.0; cols];
        v[free] = 1.0;
        for (pr, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -matrix[pr * cols + free];
        }
        basis.push(v);
    }
    basis
}

trait SwapRange {
    fn swap_range(&mut self, r1: usize, r2: usize, cols: usize);
}

impl SwapRange for [f64] {
    fn swap_range(&mut self, r1: usize, r2: usize, cols: usize) {
        if r1 == r2 {
            return;
        }
        for c in 0..cols {
            self.swap(r1 * cols + c, r2 * cols + c);
        }
    }
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

/// Exchange format: {"family": string, "n": int, "K": int, "params": {...}}.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FieldDescriptor {
    pub family: String,
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub params: serde_json::Value,
}

impl FieldSpec {
    pub fn to_descriptor(&self) -> Result<FieldDescriptor> {
        use serde_json::json;
        let params = match (&self.family, &self.kind) {
            (Family::LogLog4D, _)
            | (Family::SinLogSecondOrder, _)
            | (Family::SinLogFourthOrder, _) => {
                json!({ "r_min": self.r_min, "r_max": self.r_max })
            }
            (Family::PowerLaw(e), _) => {
                // amplitude recovered from the profile value at r = 1
                let amplitude = self.radial_jets(1.0, 0)?[0].value();
                json!({ "exponent": e, "amplitude": amplitude })
            }
            (Family::FundamentalLaplace, _) => json!({}),
            (Family::FundamentalBilap, _) => {
                let cal = self.calibration.expect("bilaplacian kernel is calibrated");
                json!({ "constant": cal.constant, "residual": cal.residual })
            }
            (Family::HarmonicPoly | Family::BiharmonicPoly | Family::Custom, FieldKind::Polynomial(comps)) => {
                let components: Vec<serde_json::Value> = comps
                    .iter()
                    .map(|pc| {
                        let terms: Vec<serde_json::Value> = pc
                            .poly
                            .terms
                            .iter()
                            .map(|(alpha, c)| json!({ "alpha": alpha, "coeff": c }))
                            .collect();
                        json!(terms)
                    })
                    .collect();
                json!({ "components": components })
            }
            _ => {
                return Err(Error::Config(format!(
                    "family {} has no serialized form",
                    self.family.name()
                )))
            }
        };
        Ok(FieldDescriptor {
            family: self.family.name(),
            n: self.dim_n,
            k: self.dim_k,
            params,
        })
    }

    pub fn from_descriptor(desc: &FieldDescriptor) -> Result<FieldSpec> {
        match desc.family.as_str() {
            "loglog4" => {
                if desc.n != 4 {
                    return Err(Error::Config("loglog4 is fixed to n = 4".into()));
                }
                Ok(FieldSpec::log_log_4d())
            }
            "sinlog2nd" => FieldSpec::sin_log_second_order(desc.n),
            "sinlog4th" => FieldSpec::sin_log_fourth_order(desc.n),
            "fundamental-laplace" => fundamental_solution(desc.n, 2),
            "fundamental-bilap" => fundamental_solution(desc.n, 4),
            "power-law" => {
                let e = desc.params.get("exponent").and_then(|v| v.as_f64()).ok_or_else(|| {
                    Error::Config("power-law descriptor needs an exponent".into())
                })?;
                let amplitude =
                    desc.params.get("amplitude").and_then(|v| v.as_f64()).unwrap_or(1.0);
                Ok(FieldSpec::power_law(amplitude, e, desc.n))
            }
            "harmonic-poly" | "biharmonic-poly" | "custom" => {
                let comps = desc
                    .params
                    .get("components")
                    .and_then(|v| v.as_array())
                    .ok_or_else(|| Error::Config("polynomial descriptor needs components".into()))?;
                let mut fields = Vec::new();
                for comp in comps {
                    let mut poly = Poly::zero(desc.n);
                    for term in comp.as_array().unwrap_or(&Vec::new()) {
                        let alpha: Vec<u32> = term
                            .get("alpha")
                            .and_then(|a| serde_json::from_value(a.clone()).ok())
                            .ok_or_else(|| Error::Config("bad alpha".into()))?;
                        let coeff = term
                            .get("coeff")
                            .and_then(|c| c.as_f64())
                            .ok_or_else(|| Error::Config("bad coeff".into()))?;
                        poly.add_term(alpha, coeff);
                    }
                    fields.push(PolyComponent::new(poly));
                }
                let family = match desc.family.as_str() {
                    "harmonic-poly" => Family::HarmonicPoly,
                    "biharmonic-poly" => Family::BiharmonicPoly,
                    _ => Family::Custom,
                };
                Ok(FieldSpec {
                    dim_n: desc.n,
                    dim_k: fields.len(),
                    kind: FieldKind::Polynomial(fields),
                    family,
                    r_min: 0.0,
                    r_max: None,
                    calibration: None,
                })
            }
            other => Err(Error::Config(format!("unknown family {other}"))),
        }
    }
}
