//! q-numbers, q-factorials, Gaussian binomials and q-Pochhammer symbols.
//!
//! Two arithmetic backends share the integer-exponent routines through
//! [`QScalar`]: exact big rationals (used when q and every exponent are
//! rational) and `Complex64`. Non-integer exponents exist only on the float
//! side, where `q^x = exp(x log q)` with the principal logarithm.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Denominators with magnitude below this are treated as poles in float mode.
pub const DENOMINATOR_GUARD: f64 = 1e-12;

/// Scalar field usable by the integer-exponent q-routines and closed forms.
pub trait QScalar:
    Clone + PartialEq + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn from_i64(v: i64) -> Self;

    fn checked_inv(&self) -> Option<Self>;

    /// True when a denominator is too close to zero to divide by safely.
    fn is_negligible(&self) -> bool;

    /// Magnitude used for guard reporting.
    fn magnitude(&self) -> f64;
}

impl QScalar for Complex64 {
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }

    fn checked_inv(&self) -> Option<Self> {
        if self.norm() == 0.0 {
            None
        } else {
            Some(self.inv())
        }
    }

    fn is_negligible(&self) -> bool {
        self.norm() < DENOMINATOR_GUARD
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl QScalar for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn checked_inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }

    fn is_negligible(&self) -> bool {
        self.is_zero()
    }

    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }
}

/// `q^e` for an integer exponent; negative exponents need an invertible `q`.
pub fn pow_int<S: QScalar>(q: &S, e: i64) -> Result<S> {
    let base = if e < 0 {
        q.checked_inv().ok_or_else(|| Error::InvalidQ("q = 0 raised to a negative power".into()))?
    } else {
        q.clone()
    };
    let mut exp = e.unsigned_abs();
    let mut acc = S::one();
    let mut sq = base;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * sq.clone();
        }
        exp >>= 1;
        if exp > 0 {
            sq = sq.clone() * sq;
        }
    }
    Ok(acc)
}

/// `[n]_q` for integer `n`, computed without dividing by `1 - q`.
///
/// For `n >= 0` this is `1 + q + ... + q^{n-1}`; for `n < 0` it uses
/// `[-m]_q = -q^{-m} [m]_q`.
pub fn bracket_int<S: QScalar>(n: i64, q: &S) -> Result<S> {
    if n >= 0 {
        let mut acc = S::zero();
        let mut p = S::one();
        for _ in 0..n {
            acc = acc + p.clone();
            p = p * q.clone();
        }
        Ok(acc)
    } else {
        let m = -n;
        let pos = bracket_int(m, q)?;
        Ok(-(pow_int(q, n)? * pos))
    }
}

/// `[n]_q! = [n]_q [n-1]_q ... [1]_q`; the empty product is 1.
pub fn factorial<S: QScalar>(n: u32, q: &S) -> S {
    let mut acc = S::one();
    let mut bracket = S::zero();
    let mut p = S::one();
    for _ in 0..n {
        bracket = bracket + p.clone();
        p = p * q.clone();
        acc = acc * bracket.clone();
    }
    acc
}

/// Gaussian binomial `C(n, k)_q`, zero outside `0 <= k <= n`.
///
/// Built from the q-Pascal rule `C(n,k) = C(n-1,k-1) + q^k C(n-1,k)`, so no
/// division is performed in any backend.
pub fn binomial<S: QScalar>(n: i64, k: i64, q: &S) -> S {
    if n < 0 || k < 0 || k > n {
        return S::zero();
    }
    let k = k as usize;
    let n = n as usize;
    // row[j] = C(i, j)_q for the current i
    let mut row = vec![S::zero(); k + 1];
    row[0] = S::one();
    let mut qpow = vec![S::one(); k + 1];
    for j in 1..=k {
        qpow[j] = qpow[j - 1].clone() * q.clone();
    }
    for i in 1..=n {
        let upper = k.min(i);
        for j in (1..=upper).rev() {
            row[j] = row[j - 1].clone() + qpow[j].clone() * row[j].clone();
        }
    }
    row[k].clone()
}

/// `(b; q)_n = (1 - b)(1 - bq) ... (1 - bq^{n-1})`.
pub fn pochhammer<S: QScalar>(b: &S, q: &S, n: u32) -> S {
    let mut acc = S::one();
    let mut term = b.clone();
    for _ in 0..n {
        acc = acc * (S::one() - term.clone());
        term = term * q.clone();
    }
    acc
}

/// Complex deformation parameter with `|q| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexQ {
    value: Complex64,
    precision: u32,
}

impl ComplexQ {
    pub const DEFAULT_PRECISION: u32 = 15;

    pub fn new(value: Complex64) -> Result<Self> {
        Self::with_precision(value, Self::DEFAULT_PRECISION)
    }

    pub fn real(q: f64) -> Result<Self> {
        Self::new(Complex64::new(q, 0.0))
    }

    /// `precision` is the number of significant decimal digits requested of
    /// float evaluations; at least 15.
    pub fn with_precision(value: Complex64, precision: u32) -> Result<Self> {
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::InvalidQ(format!("{value} is not finite")));
        }
        if value.norm() >= 1.0 {
            return Err(Error::InvalidQ(format!("|q| = {} is not below 1", value.norm())));
        }
        if precision < Self::DEFAULT_PRECISION {
            return Err(Error::InvalidQ(format!("precision {precision} is below {} digits", Self::DEFAULT_PRECISION)));
        }
        Ok(Self { value, precision })
    }

    pub fn value(&self) -> Complex64 {
        self.value
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Real mode: `q` in `(0, 1)`, where every closed-form denominator is
    /// nonzero.
    pub fn is_real_mode(&self) -> bool {
        self.value.im == 0.0 && self.value.re > 0.0
    }

    /// `q^x` with the principal logarithm.
    pub fn pow(&self, x: Complex64) -> Complex64 {
        qpow(self.value, x)
    }

    /// `q^f` as a new parameter (used by distribution relations).
    pub fn power_of(&self, f: u32) -> Result<ComplexQ> {
        ComplexQ::with_precision(self.value.powi(f as i32), self.precision)
    }
}

/// Principal-branch power `base^x`, exact for integer exponents and real
/// positive bases.
pub(crate) fn qpow(base: Complex64, x: Complex64) -> Complex64 {
    // -0.0 imaginary parts would select the -pi branch of the logarithm
    let base = Complex64::new(base.re, base.im + 0.0);
    if x.im == 0.0 && x.re.fract() == 0.0 && x.re.abs() < 2f64.powi(31) {
        return base.powi(x.re as i32);
    }
    if base.im == 0.0 && base.re > 0.0 && x.im == 0.0 {
        return Complex64::new(base.re.powf(x.re), 0.0);
    }
    if base.norm() == 0.0 {
        return if x.re > 0.0 { Complex64::zero() } else { Complex64::new(f64::INFINITY, 0.0) };
    }
    (x * base.ln()).exp()
}

/// Exponent `x` appearing in `q^x` and `[x]_q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QExponent(pub Complex64);

impl From<f64> for QExponent {
    fn from(x: f64) -> Self {
        QExponent(Complex64::new(x, 0.0))
    }
}

impl From<i64> for QExponent {
    fn from(x: i64) -> Self {
        QExponent(Complex64::new(x as f64, 0.0))
    }
}

impl From<Complex64> for QExponent {
    fn from(x: Complex64) -> Self {
        QExponent(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketSign {
    /// `[x]_q = (1 - q^x) / (1 - q)`
    Plus,
    /// `[x]_{-q} = (1 - (-q)^x) / (1 + q)`
    Minus,
}

pub fn q_bracket(x: QExponent, q: &ComplexQ, sign: BracketSign) -> Complex64 {
    let one = Complex64::one();
    match sign {
        BracketSign::Plus => (one - q.pow(x.0)) / (one - q.value),
        BracketSign::Minus => (one - qpow(-q.value, x.0)) / (one + q.value),
    }
}

pub fn q_factorial(n: u32, q: &ComplexQ) -> Complex64 {
    factorial(n, &q.value)
}

pub fn q_binomial(n: i64, k: i64, q: &ComplexQ) -> Complex64 {
    binomial(n, k, &q.value)
}

pub fn q_pochhammer(b: Complex64, q: &ComplexQ, n: u32) -> Complex64 {
    pochhammer(&b, &q.value, n)
}

/// Truncated right-hand side of the reciprocal q-binomial formula,
/// `sum_{i=0}^{terms-1} C(n+i-1, i)_q b^i`, together with a bound on the
/// neglected tail.
///
/// The tail bound uses `|C(n+i-1, i)_q| <= C(n+i-1, i)` evaluated at
/// `|q|` (coefficients of `1/(x;q)_n` are nonnegative), summed as a
/// geometric majorant once the term ratio falls below one.
pub fn reciprocal_pochhammer_series(b: Complex64, q: &ComplexQ, n: u32, terms: usize) -> (Complex64, f64) {
    let qv = q.value;
    let rho = qv.norm();
    let mut sum = Complex64::zero();
    let mut bpow = Complex64::one();
    let mut coeff = Complex64::one();
    let mut coeff_abs = 1.0f64;
    let n = n as i64;
    for i in 0..terms as i64 {
        if i > 0 {
            // C(n+i-1, i) = C(n+i-2, i-1) * (1 - q^{n+i-1}) / (1 - q^i)
            coeff = coeff * (Complex64::one() - qv.powi((n + i - 1) as i32)) / (Complex64::one() - qv.powi(i as i32));
            coeff_abs *= (1.0 - rho.powi((n + i - 1) as i32)) / (1.0 - rho.powi(i as i32));
        }
        sum += coeff * bpow;
        bpow *= b;
    }
    // majorant coefficients are nondecreasing in i and bounded by 1/(|q|;|q|)_{n-1}
    let cap: f64 = (1..n).map(|j| 1.0 / (1.0 - rho.powi(j as i32))).product();
    let bb = b.norm();
    let tail = if bb < 1.0 { cap.max(coeff_abs) * bb.powi(terms as i32) / (1.0 - bb) } else { f64::INFINITY };
    (sum, tail)
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::binomial as int_binomial;

    fn half() -> ComplexQ {
        ComplexQ::real(0.5).unwrap()
    }

    #[test]
    fn bracket_examples() {
        let q = half();
        assert_eq!(q_bracket(0i64.into(), &q, BracketSign::Plus), Complex64::zero());
        let v = q_bracket(3i64.into(), &q, BracketSign::Plus);
        assert!((v - Complex64::new(1.75, 0.0)).norm() < 1e-15);
        let near_one = ComplexQ::real(1.0 - 1e-8).unwrap();
        let v = q_bracket(5i64.into(), &near_one, BracketSign::Plus);
        assert!((v.re - 5.0).abs() < 1e-6);
    }

    #[test]
    fn minus_bracket_at_integers() {
        // [2]_{-q} = (1 - q^2) / (1 + q) = 1 - q
        let q = half();
        let v = q_bracket(2i64.into(), &q, BracketSign::Minus);
        assert!((v.re - 0.5).abs() < 1e-15);
        // non-integer exponent uses the principal branch of (-q)^x
        let v = q_bracket(0.5.into(), &q, BracketSign::Minus);
        let expect = (Complex64::one() - (0.5 * Complex64::new(-0.5, 0.0).ln()).exp()) / 1.5;
        assert!((v - expect).norm() < 1e-15);
    }

    #[test]
    fn factorial_examples() {
        let q = rational(1, 2);
        assert_eq!(factorial(0, &q), BigRational::one());
        assert_eq!(factorial(2, &q), rational(3, 2));
        assert_eq!(factorial(3, &q), rational(21, 8));
        assert!((q_factorial(3, &half()).re - 21.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn binomial_examples() {
        let q = rational(1, 2);
        assert_eq!(binomial(4, 0, &q), BigRational::one());
        assert_eq!(binomial(2, 1, &q), rational(3, 2));
        assert_eq!(binomial(4, 2, &q), rational(35, 16));
        assert_eq!(binomial(4, 5, &q), BigRational::zero());
        assert_eq!(binomial(4, -1, &q), BigRational::zero());
    }

    #[test]
    fn binomial_matches_factorial_quotient() {
        let q = rational(2, 7);
        for n in 0..9u32 {
            for k in 0..=n {
                let quotient = factorial(n, &q) / (factorial(n - k, &q) * factorial(k, &q));
                assert_eq!(binomial(n as i64, k as i64, &q), quotient, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn binomial_symmetry_exact() {
        let q = rational(3, 5);
        for n in 0..12i64 {
            for k in 0..=n {
                assert_eq!(binomial(n, k, &q), binomial(n, n - k, &q));
            }
        }
    }

    #[test]
    fn pochhammer_examples() {
        let q = rational(1, 2);
        assert_eq!(pochhammer(&rational(1, 3), &q, 0), BigRational::one());
        assert_eq!(pochhammer(&rational(1, 3), &q, 2), rational(5, 9));
        assert_eq!(pochhammer(&BigRational::one(), &rational(1, 7), 3), BigRational::zero());
    }

    #[test]
    fn bracket_int_negative() {
        // [-2]_q = (1 - q^{-2}) / (1 - q) = -q^{-2}(1 + q)
        let q = rational(1, 3);
        assert_eq!(bracket_int(-2, &q).unwrap(), -(rational(9, 1) * rational(4, 3)));
    }

    #[test]
    fn q_to_one_binomial_degenerates() {
        for &(n, k) in &[(5i64, 2i64), (8, 3), (6, 6)] {
            let exact = int_binomial(n, k) as f64;
            let e1 = (q_binomial(n, k, &ComplexQ::real(1.0 - 1e-3).unwrap()).re - exact).abs();
            let e2 = (q_binomial(n, k, &ComplexQ::real(1.0 - 1e-4).unwrap()).re - exact).abs();
            if exact > 1.0 {
                assert!(e2 < e1 / 5.0, "n={n} k={k}: {e1} {e2}");
            }
            assert!(e2 < 1e-2 * exact);
        }
    }

    #[test]
    fn rejects_outside_disk() {
        assert!(ComplexQ::real(1.0).is_err());
        assert!(ComplexQ::new(Complex64::new(0.8, 0.7)).is_err());
        assert!(ComplexQ::with_precision(Complex64::new(0.5, 0.0), 10).is_err());
    }
}
