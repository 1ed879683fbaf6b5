//! Geometric constants and small special functions: unit-ball volumes,
//! sphere areas, half-integer gamma values, the regularized incomplete beta
//! function (spherical-cap solid angles), exact monomial integrals over balls,
//! Halton low-discrepancy sequences and least-squares fitting in log space.

use std::f64::consts::PI;

/// Gamma(k/2) for positive integer k, computed exactly by the recursion
/// Gamma(x+1) = x Gamma(x) from Gamma(1/2) = sqrt(pi) and Gamma(1) = 1.
pub fn gamma_half(k: u32) -> f64 {
    assert!(k >= 1, "gamma_half requires k >= 1");
    let mut value = if k.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut two_x = if k.is_multiple_of(2) { 2 } else { 1 };
    while two_x + 2 <= k {
        value *= two_x as f64 / 2.0;
        two_x += 2;
    }
    value
}

/// ln Gamma(k/2) for positive integer k.
pub fn ln_gamma_half(k: u32) -> f64 {
    assert!(k >= 1);
    let mut value = if k.is_multiple_of(2) { 0.0 } else { 0.5 * PI.ln() };
    let mut two_x = if k.is_multiple_of(2) { 2 } else { 1 };
    while two_x + 2 <= k {
        value += (two_x as f64 / 2.0).ln();
        two_x += 2;
    }
    value
}

/// Volume b_n of the unit ball in R^n: pi^(n/2) / Gamma(n/2 + 1).
pub fn unit_ball_volume(n: usize) -> f64 {
    assert!(n >= 1);
    let n = n as u32;
    PI.powf(n as f64 / 2.0) / gamma_half(n + 2)
}

/// Surface area of the unit sphere S^(n-1) in R^n, equal to n * b_n.
pub fn unit_sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

/// Regularized incomplete beta function I_x(a, b) for a, b > 0 and x in [0, 1].
///
/// Continued-fraction evaluation (Lentz's method) with the usual symmetry
/// switch at x = (a+1)/(a+b+2) for convergence.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "beta parameters must be positive");
    assert!((0.0..=1.0).contains(&x), "x must lie in [0, 1]");
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    // ln of x^a (1-x)^b / (a B(a,b)); gamma arguments here are half-integers
    // in every caller, but ln_gamma below covers the general case.
    let ln_front = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        (ln_front.exp() / a) * beta_cf(a, b, x)
    } else {
        1.0 - reg_inc_beta(b, a, 1.0 - x)
    }
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// ln Gamma for positive arguments. Half-integers are exact via the recursion;
/// other arguments use the Lanczos approximation (g = 7, 9 coefficients).
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0);
    let doubled = 2.0 * x;
    if doubled.fract() == 0.0 && doubled <= 2.0e6 {
        return ln_gamma_half(doubled as u32);
    }
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507343278686905,
        -0.13857109526572012,
        9.984_369_578_019_572e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // reflection, not needed by callers but kept for completeness
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = 0.999_999_999_998_099_3;
    for (i, c) in COEFFS.iter().enumerate() {
        acc += c / (z + i as f64 + 1.0);
    }
    let t = z + 7.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Fraction of the sphere |y| = rho lying inside the ball B_r(x0) with
/// |x0| = d, via the spherical-cap solid-angle formula in R^n.
///
/// Equals 1 when the sphere is entirely inside the ball, 0 when entirely
/// outside, and the regularized incomplete beta of the cap angle in between.
pub fn sphere_cap_fraction(n: usize, rho: f64, d: f64, r: f64) -> f64 {
    assert!(n >= 2 && rho > 0.0 && r > 0.0 && d >= 0.0);
    if rho <= r - d {
        return 1.0;
    }
    if rho >= r + d || rho <= d - r {
        return 0.0;
    }
    // polar angle gamma (from the x0 direction) of the cap boundary
    let cos_gamma = ((rho * rho + d * d - r * r) / (2.0 * rho * d)).clamp(-1.0, 1.0);
    let sin2 = (1.0 - cos_gamma * cos_gamma).max(0.0);
    let half = 0.5 * reg_inc_beta((n as f64 - 1.0) / 2.0, 0.5, sin2);
    if cos_gamma >= 0.0 {
        half
    } else {
        1.0 - half
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Exact integral of the monomial x^alpha over the ball B_R in R^n.
///
/// Zero unless every exponent is even; otherwise
/// R^(n+|a|)/(n+|a|) * 2 prod Gamma((a_i+1)/2) / Gamma((|a|+n)/2).
pub fn ball_monomial_integral(alpha: &[u32], n: usize, radius: f64) -> f64 {
    assert_eq!(alpha.len(), n);
    if alpha.iter().any(|&a| !a.is_multiple_of(2)) {
        return 0.0;
    }
    let total: u32 = alpha.iter().sum();
    let mut ln_sphere = 0.0;
    for &a in alpha {
        ln_sphere += ln_gamma_half(a + 1);
    }
    ln_sphere -= ln_gamma_half(total + n as u32);
    let sphere_factor = 2.0 * ln_sphere.exp();
    let deg = (n as u32 + total) as f64;
    radius.powf(deg) / deg * sphere_factor
}

/// Halton low-discrepancy sequence in [0,1)^dim, bases 2, 3, 5, ...
///
/// Deterministic; `index` starts at 0 (the index-0 point is skipped internally
/// because it is the origin in every coordinate).
pub struct Halton {
    dim: usize,
    index: u64,
}

const HALTON_BASES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

impl Halton {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1 && dim <= HALTON_BASES.len(), "dim must be 1..=8");
        Halton { dim, index: 1 }
    }

    fn radical_inverse(mut i: u64, base: u64) -> f64 {
        let mut inv = 0.0;
        let mut denom = 1.0;
        while i > 0 {
            denom *= base as f64;
            inv += (i % base) as f64 / denom;
            i /= base;
        }
        inv
    }
}

impl Iterator for Halton {
    type Item = Vec<f64>;
    fn next(&mut self) -> Option<Vec<f64>> {
        let point = HALTON_BASES[..self.dim]
            .iter()
            .map(|&b| Self::radical_inverse(self.index, b))
            .collect();
        self.index += 1;
        Some(point)
    }
}

/// Pairwise summation for reproducible, low-error accumulation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        len => {
            let mid = len / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Least-squares line fit y = intercept + slope * x with RMS residual.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

/// Fits a line through (x_i, y_i) by least squares. Needs at least two
/// distinct abscissae.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "need at least two points to fit a line");
    let m = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / m;
    let mean_y = ys.iter().sum::<f64>() / m;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    assert!(sxx > 0.0, "degenerate abscissae");
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut ss = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let e = y - intercept - slope * x;
        ss += e * e;
    }
    LineFit {
        slope,
        intercept,
        residual: (ss / m).sqrt(),
    }
}

/// Fits log(y) against log(x); inputs must be strictly positive.
pub fn fit_log_log(radii: &[f64], values: &[f64]) -> LineFit {
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    fit_line(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes_match_closed_forms() {
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
        assert!((unit_ball_volume(5) - 8.0 * PI * PI / 15.0).abs() < 1e-14);
        assert!((unit_ball_volume(6) - PI.powi(3) / 6.0).abs() < 1e-14);
    }

    #[test]
    fn gamma_half_values() {
        assert!((gamma_half(1) - PI.sqrt()).abs() < 1e-15);
        assert!((gamma_half(2) - 1.0).abs() < 1e-15);
        assert!((gamma_half(3) - 0.5 * PI.sqrt()).abs() < 1e-15);
        assert!((gamma_half(8) - 6.0).abs() < 1e-14);
        assert!((ln_gamma(4.5) - gamma_half(9).ln()).abs() < 1e-12);
    }

    #[test]
    fn lanczos_matches_half_integers() {
        // exercises the non-half-integer path against interpolation quality
        let g = ln_gamma(3.25);
        // Gamma(3.25) = 2.25 * 1.25 * 0.25 * Gamma(0.25); reference value
        let reference = 2.549256966718529_f64.ln();
        assert!((g - reference).abs() < 1e-10, "got {g}, want {reference}");
    }

    #[test]
    fn incomplete_beta_endpoints_and_symmetry() {
        assert_eq!(reg_inc_beta(2.0, 0.5, 0.0), 0.0);
        assert_eq!(reg_inc_beta(2.0, 0.5, 1.0), 1.0);
        let x = 0.37;
        let v = reg_inc_beta(1.5, 0.5, x) + reg_inc_beta(0.5, 1.5, 1.0 - x);
        assert!((v - 1.0).abs() < 1e-12);
        // I_x(1, 1) = x
        assert!((reg_inc_beta(1.0, 1.0, 0.42) - 0.42).abs() < 1e-12);
    }

    #[test]
    fn cap_fraction_limits_and_halfspace() {
        // sphere bisected by a ball boundary through its center: take d = r,
        // rho small: cos gamma = rho/(2d) -> fraction just under 1/2
        for n in [3usize, 4, 5] {
            assert_eq!(sphere_cap_fraction(n, 0.5, 0.2, 1.0), 1.0);
            assert_eq!(sphere_cap_fraction(n, 3.0, 0.2, 1.0), 0.0);
            let f = sphere_cap_fraction(n, 1e-9, 1.0, 1.0);
            assert!((f - 0.5).abs() < 1e-6, "n={n}: {f}");
        }
    }

    #[test]
    fn cap_fraction_monotone_in_rho() {
        // with the origin inside the ball (|x0| < r) the fraction is 1 below
        // r - |x0|, 0 above r + |x0|, and nonincreasing in between
        let n = 4;
        let (d, r) = (0.25, 0.6);
        assert_eq!(sphere_cap_fraction(n, 0.3, d, r), 1.0);
        assert_eq!(sphere_cap_fraction(n, 0.9, d, r), 0.0);
        let mut prev = 1.0;
        let mut rho = 0.3;
        while rho < 0.9 {
            let f = sphere_cap_fraction(n, rho, d, r);
            assert!(f <= prev + 1e-12, "not nonincreasing at rho={rho}");
            prev = f;
            rho += 0.01;
        }
    }

    #[test]
    fn monomial_ball_integrals() {
        // integral of 1 over B_R is b_n R^n
        for n in [2usize, 4, 5] {
            let alpha = vec![0u32; n];
            let v = ball_monomial_integral(&alpha, n, 1.3);
            let want = unit_ball_volume(n) * 1.3f64.powi(n as i32);
            assert!((v - want).abs() < 1e-12 * want);
        }
        // integral of x1^2 over B_1 in R^n is b_n / (n + 2)
        for n in [3usize, 5] {
            let mut alpha = vec![0u32; n];
            alpha[0] = 2;
            let v = ball_monomial_integral(&alpha, n, 1.0);
            let want = unit_ball_volume(n) / (n as f64 + 2.0);
            assert!((v - want).abs() < 1e-13, "n={n}: {v} vs {want}");
        }
        // odd exponent vanishes
        assert_eq!(ball_monomial_integral(&[1, 2, 0], 3, 1.0), 0.0);
    }

    #[test]
    fn halton_covers_unit_cube() {
        let pts: Vec<Vec<f64>> = Halton::new(3).take(1000).collect();
        let mean: f64 = pts.iter().map(|p| p[0]).sum::<f64>() / 1000.0;
        assert!((mean - 0.5).abs() < 0.01);
        assert!(pts.iter().all(|p| p.iter().all(|&c| (0.0..1.0).contains(&c))));
    }

    #[test]
    fn pairwise_sum_matches_naive_on_small_input() {
        let xs: Vec<f64> = (1..=100).map(|k| 1.0 / k as f64).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-12);
    }

    #[test]
    fn line_fit_recovers_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        let fit = fit_line(&xs, &ys);
        assert!((fit.slope + 2.0).abs() < 1e-12);
        assert!((fit.intercept - 3.0).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
    }
}
