//! Truncated formal power series over big rationals.
//!
//! Coefficients are stored plain: `coeffs[n]` is the coefficient of `t^n`.
//! The `n! [t^n]` extraction used by exponential generating functions
//! happens only at the API boundary.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Largest degree the generating-function evaluators expand to by default.
pub const DEFAULT_ORDER: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct FormalSeries {
    coeffs: Vec<BigRational>,
}

impl FormalSeries {
    /// Series `c_0 + c_1 t + ... + c_M t^M`; the order is `coeffs.len() - 1`.
    ///
    /// Panics on an empty coefficient list.
    pub fn new(coeffs: Vec<BigRational>) -> Self {
        assert!(!coeffs.is_empty(), "a formal series needs at least one coefficient");
        Self { coeffs }
    }

    pub fn from_integers(coeffs: &[i64], order: usize) -> Self {
        let mut c: Vec<BigRational> =
            coeffs.iter().take(order + 1).map(|&v| BigRational::from_integer(BigInt::from(v))).collect();
        c.resize(order + 1, BigRational::zero());
        Self::new(c)
    }

    pub fn one(order: usize) -> Self {
        Self::from_integers(&[1], order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> &BigRational {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// `n! [t^n]`, the exponential-generating-function coefficient.
    pub fn egf_coeff(&self, n: usize) -> Result<BigRational> {
        if n > self.order() {
            return Err(Error::OrderExceeded { requested: n, order: self.order() });
        }
        Ok(&self.coeffs[n] * factorial(n))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Cauchy product truncated to the smaller operand order.
    pub fn product(&self, other: &Self) -> Self {
        let m = self.order().min(other.order());
        let mut out = vec![BigRational::zero(); m + 1];
        for (i, a) in self.coeffs.iter().take(m + 1).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(m + 1 - i).enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// `B` with `A B = 1 + O(t^{M+1})`.
    pub fn reciprocal(&self) -> Result<Self> {
        let c0 = &self.coeffs[0];
        if c0.is_zero() {
            return Err(Error::ZeroConstantTerm);
        }
        let inv0 = c0.recip();
        let m = self.order();
        let mut out: Vec<BigRational> = Vec::with_capacity(m + 1);
        out.push(inv0.clone());
        for n in 1..=m {
            let mut acc = BigRational::zero();
            for k in 1..=n {
                if !self.coeffs[k].is_zero() {
                    acc += &self.coeffs[k] * &out[n - k];
                }
            }
            out.push(-acc * &inv0);
        }
        Ok(Self::new(out))
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::new(self.coeffs.iter().take(order + 1).cloned().collect())
    }
}

pub(crate) fn factorial(n: usize) -> BigRational {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    BigRational::from_integer(acc)
}

/// `exp(c t) = sum c^n t^n / n!` to order `order`.
pub fn exp_series(c: &BigRational, order: usize) -> FormalSeries {
    let mut coeffs = Vec::with_capacity(order + 1);
    let mut term = BigRational::one();
    coeffs.push(term.clone());
    for n in 1..=order {
        term = term * c / BigRational::from_integer(BigInt::from(n));
        coeffs.push(term.clone());
    }
    FormalSeries::new(coeffs)
}

/// `(exp(c t) - 1) / t = sum c^{n+1} t^n / (n+1)!`.
fn expm1_over_t(c: &BigRational, order: usize) -> FormalSeries {
    let e = exp_series(c, order + 1);
    FormalSeries::new(e.coeffs[1..].to_vec())
}

fn check_order(n: usize, order: usize) -> Result<()> {
    if n > order {
        Err(Error::OrderExceeded { requested: n, order })
    } else {
        Ok(())
    }
}

/// Barnes-type multiple Euler polynomial
/// `E_n^{(r)}(x | w) = n! [t^n] 2^r e^{xt} / prod_j (e^{w_j t} + 1)`.
///
/// With `w = [1]` this is the classical Euler polynomial `E_n(x)`.
pub fn euler_multi_classical(n: usize, x: &BigRational, w: &[BigRational]) -> Result<BigRational> {
    euler_multi_classical_with_order(n, x, w, DEFAULT_ORDER)
}

pub fn euler_multi_classical_with_order(
    n: usize,
    x: &BigRational,
    w: &[BigRational],
    order: usize,
) -> Result<BigRational> {
    check_order(n, order)?;
    if w.is_empty() {
        return Err(Error::InvalidSpec("at least one weight is required".into()));
    }
    let m = n;
    let mut denom = FormalSeries::one(m);
    let two = BigRational::from_integer(BigInt::from(2));
    for wj in w {
        // (e^{w t} + 1) / 2 has constant term 1
        let mut e = exp_series(wj, m);
        e.coeffs[0] += BigRational::one();
        denom = denom.product(&e.scale(&two.recip()));
    }
    let series = exp_series(x, m).product(&denom.reciprocal()?);
    series.egf_coeff(n)
}

/// Barnes multiple Bernoulli polynomial
/// `B_n(x, r | a) = n! [t^n] t^r e^{xt} / prod_j (e^{a_j t} - 1)`.
///
/// The `t^r` factor is cancelled against `prod_j (e^{a_j t} - 1) / t`
/// before reciprocation, so the divisor has constant term `prod a_j`.
pub fn barnes_bernoulli(n: usize, x: &BigRational, a: &[BigRational]) -> Result<BigRational> {
    barnes_bernoulli_with_order(n, x, a, DEFAULT_ORDER)
}

pub fn barnes_bernoulli_with_order(n: usize, x: &BigRational, a: &[BigRational], order: usize) -> Result<BigRational> {
    check_order(n, order)?;
    if a.iter().any(|aj| aj <= &BigRational::zero()) {
        return Err(Error::InvalidSpec("Barnes parameters must be positive".into()));
    }
    let m = n;
    let mut denom = FormalSeries::one(m);
    for aj in a {
        denom = denom.product(&expm1_over_t(aj, m));
    }
    let series = exp_series(x, m).product(&denom.reciprocal()?);
    series.egf_coeff(n)
}
