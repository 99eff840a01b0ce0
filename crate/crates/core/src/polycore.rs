//! Complex polynomials in coefficient and root form, and rational sums.
//!
//! Two interchangeable representations are used throughout: a dense
//! [`Polynomial`] (ascending coefficients) and a [`RootSet`] (the multiset of
//! zeros of a monic polynomial). Above a few hundred degrees the root form is
//! the only one that stays accurate, so log-magnitudes and logarithmic
//! derivatives are evaluated directly from it.

use std::ops::{Add, Deref, DerefMut};

use num_complex::Complex64 as Complex;
use serde::{Deserialize, Serialize};

use crate::dd::DdComplex;
use crate::{Error, Result};

/// Unit roundoff for `f64`.
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// Above this degree [`poly_from_roots`] switches to double-double accumulation.
pub const COMPENSATED_EXPANSION_DEGREE: usize = 4096;

/// Multiset of complex atoms. Order carries no meaning; multiplicity is
/// expressed by repetition.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RootSet(pub Vec<Complex>);

impl RootSet {
    pub fn new(atoms: Vec<Complex>) -> Self {
        RootSet(atoms)
    }

    pub fn into_inner(self) -> Vec<Complex> {
        self.0
    }

    pub fn centroid(&self) -> Option<Complex> {
        if self.0.is_empty() {
            return None;
        }
        let sum = pairwise_sum(self.0.len(), |k| self.0[k]);
        Some(sum / self.0.len() as f64)
    }

    /// Atom-wise complex conjugate.
    pub fn conj(&self) -> RootSet {
        RootSet(self.0.iter().map(|z| z.conj()).collect())
    }

    pub fn max_modulus(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Deref for RootSet {
    type Target = Vec<Complex>;

    fn deref(&self) -> &Vec<Complex> {
        &self.0
    }
}

impl DerefMut for RootSet {
    fn deref_mut(&mut self) -> &mut Vec<Complex> {
        &mut self.0
    }
}

impl From<Vec<Complex>> for RootSet {
    fn from(atoms: Vec<Complex>) -> Self {
        RootSet(atoms)
    }
}

impl FromIterator<Complex> for RootSet {
    fn from_iter<I: IntoIterator<Item = Complex>>(iter: I) -> Self {
        RootSet(iter.into_iter().collect())
    }
}

/// Dense polynomial `Σ coeffs[k] z^k`.
///
/// The coefficient vector is trimmed so that the last entry is nonzero; the
/// zero polynomial is stored as `[0]` and has degree 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<Complex>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Complex>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == Complex::new(0.0, 0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex::new(0.0, 0.0));
        }
        Polynomial { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Polynomial::new(coeffs.iter().map(|&c| Complex::new(c, 0.0)).collect())
    }

    pub fn constant(c: Complex) -> Self {
        Polynomial::new(vec![c])
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> Complex {
        *self.coeffs.last().unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == Complex::new(0.0, 0.0)
    }

    /// `p(z) - c`.
    pub fn sub_constant(&self, c: Complex) -> Polynomial {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] -= c;
        Polynomial::new(coeffs)
    }

    pub fn scale(&self, s: Complex) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// `Σ |a_k| r^k`, the absolute polynomial used for condition numbers and
    /// backward-error bounds.
    pub fn abs_eval(&self, r: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    /// Plain Horner evaluation.
    pub fn horner(&self, z: Complex) -> Complex {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(0.0, 0.0), |acc, &c| acc * z + c)
    }
}

/// Accumulation used when expanding a root set into coefficients.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionMode {
    /// Plain `f64` up to [`COMPENSATED_EXPANSION_DEGREE`], double-double above.
    #[default]
    Auto,
    Standard,
    Compensated,
}

/// Monic polynomial with the given zeros, built by multiplying in one linear
/// factor at a time.
pub fn poly_from_roots(roots: &RootSet) -> Polynomial {
    poly_from_roots_with(roots, ExpansionMode::Auto)
}

pub fn poly_from_roots_with(roots: &RootSet, mode: ExpansionMode) -> Polynomial {
    let compensated = match mode {
        ExpansionMode::Auto => roots.len() > COMPENSATED_EXPANSION_DEGREE,
        ExpansionMode::Standard => false,
        ExpansionMode::Compensated => true,
    };
    if compensated {
        return expand_double_double(roots);
    }
    let n = roots.len();
    let mut c = vec![Complex::new(0.0, 0.0); n + 1];
    c[0] = Complex::new(1.0, 0.0);
    for (m, &r) in roots.iter().enumerate() {
        // multiply the degree-m polynomial c[0..=m] by (z - r)
        c[m + 1] = c[m];
        for k in (1..=m).rev() {
            c[k] = c[k - 1] - r * c[k];
        }
        c[0] = -r * c[0];
    }
    Polynomial::new(c)
}

fn expand_double_double(roots: &RootSet) -> Polynomial {
    let n = roots.len();
    let mut c = vec![DdComplex::ZERO; n + 1];
    c[0] = DdComplex::from(Complex::new(1.0, 0.0));
    for (m, &r) in roots.iter().enumerate() {
        c[m + 1] = c[m];
        for k in (1..=m).rev() {
            c[k] = c[k - 1].sub(c[k].mul_f64c(r));
        }
        c[0] = c[0].mul_f64c(-r);
    }
    Polynomial::new(c.into_iter().map(DdComplex::to_complex).collect())
}

/// Formal derivative. The derivative of a constant is the zero polynomial.
pub fn derivative(p: &Polynomial) -> Polynomial {
    if p.degree() == 0 {
        return Polynomial::constant(Complex::new(0.0, 0.0));
    }
    Polynomial::new(
        p.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect(),
    )
}

/// Result of a compensated Horner evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub value: Complex,
    /// `Σ|a_k||z|^k / |p(z)|`; infinite at an exact zero.
    pub condition: f64,
    /// A-priori bound on `|value - p(z)|`.
    pub error_bound: f64,
}

/// Compensated Horner scheme: the rounding errors of every step are captured
/// with error-free transformations and folded back in through a second Horner
/// recurrence, giving a result as accurate as if computed in twice the working
/// precision.
pub fn evaluate(p: &Polynomial, z: Complex) -> Evaluation {
    let n = p.degree();
    let mut s = p.leading();
    let mut corr = Complex::new(0.0, 0.0);
    for &a in p.coeffs.iter().rev().skip(1) {
        let (prod, e1, e2, e3) = eft::two_prod_complex(s, z);
        let (sum, e4) = eft::two_sum_complex(prod, a);
        s = sum;
        corr = corr * z + (e1 + e2 + e3 + e4);
    }
    let value = s + corr;
    let abs = p.abs_eval(z.norm());
    let gamma = gamma(4 * n + 2);
    let error_bound = UNIT_ROUNDOFF * value.norm() + 2.0 * gamma * gamma * abs;
    let condition = if value.norm() == 0.0 {
        f64::INFINITY
    } else {
        abs / value.norm()
    };
    Evaluation {
        value,
        condition,
        error_bound,
    }
}

fn gamma(k: usize) -> f64 {
    let ku = k as f64 * UNIT_ROUNDOFF;
    ku / (1.0 - ku)
}

/// `Σ_k log|z - ξ_k|` = `log|P(z)|` for the monic polynomial with zeros `roots`,
/// without forming the product. Returns `-∞` when `z` is one of the atoms.
pub fn log_abs_prod(roots: &[Complex], z: Complex) -> f64 {
    pairwise_sum(roots.len(), |k| (z - roots[k]).norm().ln())
}

/// `log_+ x = max(log x, 0)`.
pub fn log_plus(x: f64) -> f64 {
    if x > 1.0 {
        x.ln()
    } else {
        0.0
    }
}

/// `log_- x = max(-log x, 0)`.
pub fn log_minus(x: f64) -> f64 {
    if x < 1.0 {
        -x.ln()
    } else {
        0.0
    }
}

/// The rational function `L(z) = Σ a_k / (z - z_k)`.
///
/// With all weights equal to one this is the logarithmic derivative `P'/P` of
/// the polynomial with zeros `z_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalSum {
    weights: Vec<Complex>,
    poles: Vec<Complex>,
    distinct_poles: bool,
}

impl RationalSum {
    pub fn new(weights: Vec<Complex>, poles: Vec<Complex>) -> Result<Self> {
        if weights.len() != poles.len() {
            return Err(Error::SizeMismatch {
                left: weights.len(),
                right: poles.len(),
            });
        }
        let distinct_poles = all_distinct(&poles);
        Ok(RationalSum {
            weights,
            poles,
            distinct_poles,
        })
    }

    /// Unit weights: the logarithmic derivative of `Π (z - z_k)`.
    pub fn classical(poles: &[Complex]) -> Self {
        RationalSum::new(vec![Complex::new(1.0, 0.0); poles.len()], poles.to_vec())
            .expect("lengths agree")
    }

    pub fn weights(&self) -> &[Complex] {
        &self.weights
    }

    pub fn poles(&self) -> &[Complex] {
        &self.poles
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    /// False when two poles coincide, in which case their weights add up.
    pub fn distinct_poles(&self) -> bool {
        self.distinct_poles
    }

    pub fn total_weight(&self) -> Complex {
        pairwise_sum(self.weights.len(), |k| self.weights[k])
    }

    /// Numerator `N` of `L = N / Π(z - z_k)`, i.e. `Σ_k a_k Π_{j≠k} (z - z_j)`.
    pub fn numerator(&self) -> Polynomial {
        let n = self.len();
        let mut acc = vec![Complex::new(0.0, 0.0); n.max(1)];
        for k in 0..n {
            let others: RootSet = self
                .poles
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &z)| z)
                .collect();
            let q = poly_from_roots(&others);
            for (slot, &c) in acc.iter_mut().zip(q.coeffs()) {
                *slot += self.weights[k] * c;
            }
        }
        Polynomial::new(acc)
    }
}

fn all_distinct(points: &[Complex]) -> bool {
    let mut sorted: Vec<(f64, f64)> = points.iter().map(|z| (z.re, z.im)).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    sorted.windows(2).all(|w| w[0] != w[1])
}

/// `S1 = Σ a_k/(z - z_k)` and `S2 = Σ a_k/(z - z_k)^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RationalEval {
    pub s1: Complex,
    pub s2: Complex,
}

/// Evaluates `L(z)` and its companion second-order sum with pairwise summation.
pub fn eval_rational(l: &RationalSum, z: Complex) -> Result<RationalEval> {
    if let Some(index) = l.poles.iter().position(|&p| p == z) {
        return Err(Error::PoleHit { index });
    }
    let sums = pairwise_sum(l.len(), |k| {
        let inv = (z - l.poles[k]).inv();
        let t = l.weights[k] * inv;
        Pair(t, t * inv)
    });
    Ok(RationalEval {
        s1: sums.0,
        s2: sums.1,
    })
}

#[derive(Clone, Copy, Default)]
struct Pair(Complex, Complex);

impl Add for Pair {
    type Output = Pair;
    fn add(self, o: Pair) -> Pair {
        Pair(self.0 + o.0, self.1 + o.1)
    }
}

/// Pairwise (cascade) summation of `term(0) + ... + term(n-1)`. The error grows
/// like `O(log n)` instead of `O(n)` for a left fold.
pub fn pairwise_sum<T, F>(n: usize, term: F) -> T
where
    T: Add<Output = T> + Default,
    F: Fn(usize) -> T,
{
    fn rec<T: Add<Output = T> + Default, F: Fn(usize) -> T>(lo: usize, hi: usize, f: &F) -> T {
        const BLOCK: usize = 16;
        if hi - lo <= BLOCK {
            let mut acc = T::default();
            for k in lo..hi {
                acc = acc + f(k);
            }
            acc
        } else {
            let mid = lo + (hi - lo) / 2;
            rec(lo, mid, f) + rec(mid, hi, f)
        }
    }
    rec(0, n, &term)
}

/// Error-free transformations.
pub(crate) mod eft {
    use num_complex::Complex64 as Complex;

    #[inline]
    pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        (s, err)
    }

    #[inline]
    pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
        let p = a * b;
        (p, a.mul_add(b, -p))
    }

    #[inline]
    pub fn two_sum_complex(a: Complex, b: Complex) -> (Complex, Complex) {
        let (re, ere) = two_sum(a.re, b.re);
        let (im, eim) = two_sum(a.im, b.im);
        (Complex::new(re, im), Complex::new(ere, eim))
    }

    /// `x * y = p + e + f + g` exactly.
    #[inline]
    pub fn two_prod_complex(x: Complex, y: Complex) -> (Complex, Complex, Complex, Complex) {
        let (p1, e1) = two_prod(x.re, y.re);
        let (p2, e2) = two_prod(x.im, y.im);
        let (p3, e3) = two_prod(x.re, y.im);
        let (p4, e4) = two_prod(x.im, y.re);
        let (s1, f1) = two_sum(p1, -p2);
        let (s2, f2) = two_sum(p3, p4);
        (
            Complex::new(s1, s2),
            Complex::new(e1, e3),
            Complex::new(-e2, e4),
            Complex::new(f1, f2),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn unity_roots(n: usize) -> RootSet {
        (0..n)
            .map(|k| Complex::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
            .collect()
    }

    fn close(a: Complex, b: Complex, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn expansion_examples() {
        let p = poly_from_roots(&RootSet::new(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        assert_eq!(p.coeffs(), &[c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);

        let one = poly_from_roots(&RootSet::default());
        assert_eq!(one.coeffs(), &[c(1.0, 0.0)]);
        assert_eq!(one.degree(), 0);

        let p = poly_from_roots(&unity_roots(4));
        let want = [c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        for (a, b) in p.coeffs().iter().zip(want) {
            assert!(close(*a, b, 1e-15), "{a} vs {b}");
        }
    }

    #[test]
    fn compensated_expansion_agrees_with_standard() {
        let roots: RootSet = (0..40)
            .map(|k| Complex::from_polar(0.3 + 0.01 * k as f64, 1.7 * k as f64))
            .collect();
        let a = poly_from_roots_with(&roots, ExpansionMode::Standard);
        let b = poly_from_roots_with(&roots, ExpansionMode::Compensated);
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            assert!(close(*x, *y, 1e-12));
        }
    }

    #[test]
    fn derivative_examples() {
        let p = poly_from_roots(&unity_roots(4));
        let d = derivative(&p);
        assert_eq!(d.degree(), 3);
        assert!(close(d.coeffs()[3], c(4.0, 0.0), 1e-14));
        for k in 0..3 {
            assert!(d.coeffs()[k].norm() < 1e-14);
        }

        let d = derivative(&Polynomial::from_real(&[7.0]));
        assert!(d.is_zero());
    }

    /// For Q_n = (z^{n+1} - 1)/(z - 1) = 1 + z + ... + z^n, the identity
    /// (z - 1)^2 Q_n'(z) = n z^{n+1} - (n + 1) z^n + 1 holds coefficient-wise.
    #[test]
    fn removed_root_derivative_identity() {
        let n = 5usize;
        let q = Polynomial::from_real(&vec![1.0; n + 1]);
        let dq = derivative(&q);
        let square = Polynomial::from_real(&[1.0, -2.0, 1.0]);
        let mut prod = vec![c(0.0, 0.0); dq.degree() + square.degree() + 1];
        for (i, a) in dq.coeffs().iter().enumerate() {
            for (j, b) in square.coeffs().iter().enumerate() {
                prod[i + j] += a * b;
            }
        }
        let mut want = vec![0.0; n + 2];
        want[0] = 1.0;
        want[n] = -(n as f64 + 1.0);
        want[n + 1] = n as f64;
        for (got, w) in prod.iter().zip(&want) {
            assert!(close(*got, c(*w, 0.0), 1e-12), "{got} vs {w}");
        }
    }

    #[test]
    fn evaluate_examples() {
        let p = Polynomial::from_real(&[-1.0, 0.0, 1.0]);
        assert_eq!(evaluate(&p, c(2.0, 0.0)).value, c(3.0, 0.0));
        let q = poly_from_roots(&unity_roots(4));
        let e = evaluate(&q, c(0.0, 1.0));
        assert!(e.value.norm() <= 1e-15);
    }

    #[test]
    fn evaluate_at_origin_matches_product_of_roots() {
        // 100 roots spread over the circle by golden-angle stepping.
        let roots: RootSet = (0..100)
            .map(|k| Complex::from_polar(1.0, 2.399_963_229_728_653 * k as f64))
            .collect();
        let p = poly_from_roots(&roots);
        let direct = roots.iter().fold(c(1.0, 0.0), |acc, r| acc * (-r));
        let e = evaluate(&p, c(0.0, 0.0));
        assert!(close(e.value, direct, 1e-9), "{} vs {}", e.value, direct);
    }

    #[test]
    fn compensated_horner_beats_plain_near_a_cluster() {
        // (z - 1)^9 expanded; evaluation near 1 suffers massive cancellation.
        let p = poly_from_roots(&RootSet::new(vec![c(1.0, 0.0); 9]));
        let z = c(1.001, 0.0);
        let exact = 1e-27_f64;
        let comp = evaluate(&p, z);
        let plain = p.horner(z);
        assert!((comp.value.re - exact).abs() <= comp.error_bound.max(1e-30) * 10.0);
        assert!((comp.value.re - exact).abs() < (plain.re - exact).abs());
        assert!(comp.condition > 1e10);
    }

    #[test]
    fn log_abs_prod_examples() {
        assert!((log_abs_prod(&[c(0.0, 0.0)], c(std::f64::consts::E, 0.0)) - 1.0).abs() < 1e-15);
        assert_eq!(
            log_abs_prod(&[c(1.0, 0.0), c(-1.0, 0.0)], c(1.0, 0.0)),
            f64::NEG_INFINITY
        );
    }

    /// 512 roots of unity at z = 2: log|2^512 - 1|, computed independently by a
    /// compensated (two-sum) accumulation of the individual logs.
    #[test]
    fn log_abs_prod_avoids_overflow() {
        let roots = unity_roots(512);
        let z = c(5.0, 0.0);
        let naive = roots.iter().fold(c(1.0, 0.0), |acc, r| acc * (z - r));
        assert!(!naive.norm().is_finite());

        let (mut s, mut e) = (0.0, 0.0);
        for r in roots.iter() {
            let (t, err) = eft::two_sum(s, (z - r).norm().ln());
            s = t;
            e += err;
        }
        let oracle = s + e;
        let closed = 512.0 * 5f64.ln() + (-(5f64.powi(-512))).ln_1p();
        assert!((oracle - closed).abs() < 1e-11);
        let got = log_abs_prod(&roots, z);
        assert!((got - oracle).abs() < 1e-11, "{got} vs {oracle}");
    }

    #[test]
    fn eval_rational_examples() {
        let l = RationalSum::classical(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        let e = eval_rational(&l, c(2.0, 0.0)).unwrap();
        assert!(close(e.s1, c(4.0 / 3.0, 0.0), 1e-15));
        let e = eval_rational(&l, c(0.0, 0.0)).unwrap();
        assert_eq!(e.s1, c(0.0, 0.0));
        assert!(matches!(
            eval_rational(&l, c(-1.0, 0.0)),
            Err(Error::PoleHit { index: 1 })
        ));
    }

    #[test]
    fn eval_rational_matches_closed_form_for_unity_roots() {
        let n = 16;
        let l = RationalSum::classical(&unity_roots(n));
        let e = eval_rational(&l, c(2.0, 0.0)).unwrap();
        let want = n as f64 * 2f64.powi(n as i32 - 1) / (2f64.powi(n as i32) - 1.0);
        assert!((e.s1.re - want).abs() < 1e-13 * want);
        assert!(e.s1.im.abs() < 1e-13);
    }

    #[test]
    fn rational_sum_flags_duplicate_poles() {
        let l = RationalSum::classical(&[c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        assert!(!l.distinct_poles());
        assert!(RationalSum::new(vec![c(1.0, 0.0)], vec![]).is_err());
    }

    #[test]
    fn numerator_matches_derivative_for_unit_weights() {
        let roots = RootSet::new(vec![c(0.5, 0.1), c(-0.2, 0.7), c(0.9, -0.4), c(0.0, 0.0)]);
        let l = RationalSum::classical(&roots);
        let d = derivative(&poly_from_roots(&roots));
        for (a, b) in l.numerator().coeffs().iter().zip(d.coeffs()) {
            assert!(close(*a, *b, 1e-14));
        }
    }

    #[test]
    fn log_plus_minus_inequalities() {
        let vals = [0.01, 0.5, 1.0, 1.5, 30.0];
        for &a in &vals {
            for &b in &vals {
                assert!(log_plus(a * b) <= log_plus(a) + log_plus(b) + 1e-15);
                assert!(log_minus(a * b) <= log_minus(a) + log_minus(b) + 1e-15);
                assert!(log_plus(a + b) <= log_plus(a) + log_plus(b) + 2f64.ln() + 1e-15);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn disk_roots(max: usize) -> impl Strategy<Value = RootSet> {
            prop::collection::vec((0.0f64..1.0, 0.0f64..(2.0 * PI)), 1..max).prop_map(|v| {
                v.into_iter()
                    .map(|(r, t)| Complex::from_polar(r, t))
                    .collect()
            })
        }

        proptest! {
            #[test]
            fn derivative_degree_drops_by_one(roots in disk_roots(64)) {
                let d = derivative(&poly_from_roots(&roots));
                prop_assert_eq!(d.degree(), roots.len() - 1);
            }

            #[test]
            fn log_abs_prod_matches_coefficient_form(
                roots in disk_roots(40),
                zr in -2.0f64..2.0, zi in -2.0f64..2.0,
            ) {
                let z = c(zr, zi);
                let p = poly_from_roots(&roots);
                let v = evaluate(&p, z).value.norm();
                prop_assume!(v > 1e-200 && v.is_finite());
                let l = log_abs_prod(&roots, z);
                prop_assert!((l - v.ln()).abs() <= 1e-9 * (1.0 + l.abs()));
            }

            #[test]
            fn rational_sum_matches_derivative_ratio(
                roots in disk_roots(24),
                t in 0.0f64..(2.0 * PI),
            ) {
                // far enough out that the coefficient route is well conditioned
                let z = Complex::from_polar(3.0, t);
                let l = RationalSum::classical(&roots);
                let s1 = eval_rational(&l, z).unwrap().s1;
                let p = poly_from_roots(&roots);
                let ratio = evaluate(&derivative(&p), z).value / evaluate(&p, z).value;
                prop_assert!((s1 - ratio).norm() <= 1e-9 * ratio.norm().max(1e-300));
            }
        }
    }
}
