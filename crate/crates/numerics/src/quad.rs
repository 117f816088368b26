//! Adaptive Gauss–Kronrod (7/15) quadrature and principal-value integrals.

use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::NumericsError;

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
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Values that can be integrated: a vector space with a norm.
pub trait QuadValue: Copy + Send + Sync {
    fn zero() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn scale(&self, f: f64) -> Self;
    fn norm(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, f: f64) -> Self {
        self * f
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, f: f64) -> Self {
        self * f
    }
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
}

impl<T: QuadValue, const N: usize> QuadValue for [T; N] {
    fn zero() -> Self {
        [T::zero(); N]
    }
    fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        for (o, b) in out.iter_mut().zip(other) {
            *o = o.add(b);
        }
        out
    }
    fn scale(&self, f: f64) -> Self {
        let mut out = *self;
        for o in out.iter_mut() {
            *o = o.scale(f);
        }
        out
    }
    fn norm(&self) -> f64 {
        self.iter().map(QuadValue::norm).fold(0.0, f64::max)
    }
}

/// Tolerances and subdivision limit for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-14, rel_tol: 1e-10, max_intervals: 4000 }
    }
}

impl QuadOptions {
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }
}

/// Result of a quadrature with its error estimate and the number of evaluations.
#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

fn gk15<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc.scale(WGK[7]);
    let mut gauss = fc.scale(WG[3]);
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x).add(&f(c + x));
        kron = kron.add(&s.scale(WGK[j]));
        if j % 2 == 1 {
            gauss = gauss.add(&s.scale(WG[j / 2]));
        }
    }
    let kron = kron.scale(h);
    let gauss = gauss.scale(h);
    let diff = kron.add(&gauss.scale(-1.0)).norm();
    (kron, diff)
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// `breaks` lists interior points where the integrand has kinks or rapid
/// variation; each sub-interval is seeded separately.
pub fn integrate_with_breaks<T, F>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<Estimate<T>, NumericsError>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(NumericsError::InvalidInterval { a, b });
    }
    if a == b {
        return Ok(Estimate { value: T::zero(), error: 0.0, evaluations: 0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut edges = vec![lo];
    let mut interior: Vec<f64> = breaks.iter().copied().filter(|x| *x > lo && *x < hi).collect();
    interior.sort_by(f64::total_cmp);
    interior.dedup();
    edges.extend(interior);
    edges.push(hi);

    let mut heap = BinaryHeap::new();
    let mut total = T::zero();
    let mut err_total = 0.0;
    let mut evaluations = 0;
    for w in edges.windows(2) {
        let (v, e) = gk15(&f, w[0], w[1]);
        evaluations += 15;
        total = total.add(&v);
        err_total += e;
        heap.push(Panel { a: w[0], b: w[1], value: v, error: e });
    }
    let target = |total: &T| opts.abs_tol.max(opts.rel_tol * total.norm());
    while err_total > target(&total) {
        if heap.len() >= opts.max_intervals {
            return Err(NumericsError::NotConverged {
                achieved: err_total,
                requested: target(&total),
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(NumericsError::NotConverged {
                achieved: err_total,
                requested: target(&total),
            });
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        evaluations += 30;
        total = total.add(&worst.value.scale(-1.0)).add(&v1).add(&v2);
        err_total += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }
    let value = heap.iter().fold(T::zero(), |acc, p| acc.add(&p.value));
    let error = heap.iter().map(|p| p.error).sum();
    Ok(Estimate { value: value.scale(sign), error, evaluations })
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
pub fn integrate<T, F>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<Estimate<T>, NumericsError>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    integrate_with_breaks(f, a, b, &[], opts)
}

/// Principal value of `∫_a^b g(ν)/(x − ν) dν`.
///
/// The pole is excised with a symmetric window of half-width `window`
/// (shrunk to fit inside the interval), where the integrand is folded into
/// the regular form `[g(x − u) − g(x + u)]/u`.
pub fn pv_inverse_difference<F>(
    g: F,
    x: f64,
    a: f64,
    b: f64,
    window: f64,
    opts: QuadOptions,
) -> Result<Estimate<f64>, NumericsError>
where
    F: Fn(f64) -> f64,
{
    if x <= a || x >= b {
        return integrate(|nu| g(nu) / (x - nu), a, b, opts);
    }
    let w = window.min(0.5 * (x - a)).min(0.5 * (b - x));
    let left = integrate(|nu| g(nu) / (x - nu), a, x - w, opts)?;
    let right = integrate(|nu| g(nu) / (x - nu), x + w, b, opts)?;
    let core = integrate(|u| (g(x - u) - g(x + u)) / u, 0.0, w, opts)?;
    Ok(Estimate {
        value: left.value + right.value + core.value,
        error: left.error + right.error + core.error,
        evaluations: left.evaluations + right.evaluations + core.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x: f64| x.powi(5) - 3.0 * x * x, 0.0, 2.0, QuadOptions::default()).unwrap();
        assert!((r.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_complex() {
        let w = 37.0;
        let r = integrate(
            |x: f64| Complex64::new(0.0, w * x).exp(),
            0.0,
            3.0,
            QuadOptions::default(),
        )
        .unwrap();
        let exact = (Complex64::new(0.0, 3.0 * w).exp() - 1.0) / Complex64::new(0.0, w);
        assert!((r.value - exact).norm() < 1e-11);
    }

    #[test]
    fn reversed_interval_changes_sign() {
        let f = |x: f64| x.exp();
        let a = integrate(f, 0.0, 1.0, QuadOptions::default()).unwrap().value;
        let b = integrate(f, 1.0, 0.0, QuadOptions::default()).unwrap().value;
        assert!((a + b).abs() < 1e-15);
    }

    #[test]
    fn pv_of_constant() {
        let r = pv_inverse_difference(|_| 1.0, 0.3, 0.0, 1.0, 1e-3, QuadOptions::default()).unwrap();
        assert!((r.value - (0.3f64 / 0.7).ln()).abs() < 1e-12);
    }

    #[test]
    fn pv_of_linear_function() {
        // PV ∫_0^1 ν/(x−ν) dν = −1 + x ln(x/(1−x))
        let x = 0.62;
        let r = pv_inverse_difference(|nu| nu, x, 0.0, 1.0, 1e-3, QuadOptions::default()).unwrap();
        assert!((r.value - (-1.0 + x * (x / (1.0 - x)).ln())).abs() < 1e-12);
    }

    #[test]
    fn vector_integrand() {
        let r = integrate(|x: f64| [x, x * x], 0.0, 1.0, QuadOptions::default()).unwrap();
        assert!((r.value[0] - 0.5).abs() < 1e-15 && (r.value[1] - 1.0 / 3.0).abs() < 1e-15);
    }
}
