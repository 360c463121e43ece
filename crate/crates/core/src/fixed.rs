//! Complex fixed-point numbers with 224 fractional bits, used as the
//! extended-precision backend of the closed forms when q is real.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::qcore::QScalar;

const FRAC_BITS: u32 = 224;

fn unit() -> BigInt {
    BigInt::one() << FRAC_BITS
}

/// `m * 2^-FRAC_BITS`, rounding to nearest.
fn shift_round(v: BigInt, bits: u32) -> BigInt {
    if bits == 0 {
        return v;
    }
    let half = BigInt::one() << (bits - 1);
    if v.is_negative() {
        -((-v + half) >> bits)
    } else {
        (v + half) >> bits
    }
}

fn fmul(a: &BigInt, b: &BigInt) -> BigInt {
    shift_round(a * b, FRAC_BITS)
}

fn fdiv(a: &BigInt, b: &BigInt) -> BigInt {
    let num = a << FRAC_BITS;
    // round to nearest
    let twice: BigInt = (&num << 1u32) / b;
    if twice.is_negative() {
        -((-twice + 1u32) >> 1u32)
    } else {
        (twice + 1u32) >> 1u32
    }
}

fn from_f64_fixed(v: f64) -> BigInt {
    let (mant, exp, sign) = num_traits::float::FloatCore::integer_decode(v);
    let m = BigInt::from(mant) * BigInt::from(sign);
    let shift = exp as i64 + FRAC_BITS as i64;
    if shift >= 0 {
        m << shift as u32
    } else {
        shift_round(m, (-shift) as u32)
    }
}

fn to_f64_fixed(v: &BigInt) -> f64 {
    // keep 64 significant bits before converting
    let bits = v.bits() as i64;
    let drop = (bits - 64).max(0);
    let top = (v >> drop as u32).to_f64().unwrap_or(0.0);
    top * 2f64.powi((drop - FRAC_BITS as i64) as i32)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtComplex {
    re: BigInt,
    im: BigInt,
}

impl ExtComplex {
    pub fn from_complex(v: Complex64) -> Self {
        Self { re: from_f64_fixed(v.re), im: from_f64_fixed(v.im) }
    }

    pub fn from_f64(v: f64) -> Self {
        Self { re: from_f64_fixed(v), im: BigInt::zero() }
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(to_f64_fixed(&self.re), to_f64_fixed(&self.im))
    }

    /// `q^x` for real `q > 0` and real `x`.
    pub fn real_pow(q: f64, x: f64) -> Self {
        assert!(q > 0.0, "real_pow needs q > 0");
        let ln_q = ln_fixed(&from_f64_fixed(q));
        Self { re: exp_fixed(&fmul(&ln_q, &from_f64_fixed(x))), im: BigInt::zero() }
    }
}

/// `ln v` for `v > 0` via `2 atanh((v - 1)/(v + 1))` after halving the
/// argument into `[1/2, 2)` by powers of two.
fn ln_fixed(v: &BigInt) -> BigInt {
    let one = unit();
    let mut v = v.clone();
    let mut k: i64 = 0;
    let two = &one << 1;
    let half = &one >> 1;
    while v >= two {
        v >>= 1;
        k += 1;
    }
    while v < half {
        v <<= 1;
        k -= 1;
    }
    let z = fdiv(&(&v - &one), &(&v + &one));
    let z2 = fmul(&z, &z);
    let mut term = z.clone();
    let mut acc = BigInt::zero();
    let mut j: u32 = 1;
    while !term.is_zero() {
        acc += &term / BigInt::from(j);
        term = fmul(&term, &z2);
        j += 2;
    }
    acc <<= 1;
    if k != 0 {
        acc += ln2_fixed() * BigInt::from(k);
    }
    acc
}

fn ln2_fixed() -> BigInt {
    // ln 2 = 2 atanh(1/3)
    let one = unit();
    let z = &one / BigInt::from(3);
    let z2 = fmul(&z, &z);
    let mut term = z;
    let mut acc = BigInt::zero();
    let mut j: u32 = 1;
    while !term.is_zero() {
        acc += &term / BigInt::from(j);
        term = fmul(&term, &z2);
        j += 2;
    }
    acc << 1
}

/// `e^v` by Taylor series after scaling the argument below 2^-16.
fn exp_fixed(v: &BigInt) -> BigInt {
    let one = unit();
    let squarings = (v.abs().bits() as i64 - FRAC_BITS as i64 + 16).max(0) as u32;
    let y = shift_round(v.clone(), squarings);
    let mut acc = one.clone();
    let mut term = one;
    let mut j = 1u32;
    while !term.is_zero() {
        term = fmul(&term, &y) / BigInt::from(j);
        acc += &term;
        j += 1;
    }
    for _ in 0..squarings {
        acc = fmul(&acc, &acc);
    }
    acc
}

impl Add for ExtComplex {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for ExtComplex {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Mul for ExtComplex {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        if self.im.is_zero() && o.im.is_zero() {
            return Self { re: fmul(&self.re, &o.re), im: BigInt::zero() };
        }
        Self {
            re: shift_round(&self.re * &o.re - &self.im * &o.im, FRAC_BITS),
            im: shift_round(&self.re * &o.im + &self.im * &o.re, FRAC_BITS),
        }
    }
}

impl Neg for ExtComplex {
    type Output = Self;
    fn neg(self) -> Self {
        Self { re: -self.re, im: -self.im }
    }
}

impl Zero for ExtComplex {
    fn zero() -> Self {
        Self { re: BigInt::zero(), im: BigInt::zero() }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for ExtComplex {
    fn one() -> Self {
        Self { re: unit(), im: BigInt::zero() }
    }
}

impl QScalar for ExtComplex {
    fn from_i64(v: i64) -> Self {
        Self { re: BigInt::from(v) << FRAC_BITS, im: BigInt::zero() }
    }

    fn checked_inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if self.im.is_zero() {
            return Some(Self { re: fdiv(&unit(), &self.re), im: BigInt::zero() });
        }
        let den = shift_round(&self.re * &self.re + &self.im * &self.im, FRAC_BITS);
        Some(Self { re: fdiv(&self.re, &den), im: fdiv(&-self.im.clone(), &den) })
    }

    fn is_negligible(&self) -> bool {
        self.magnitude() < 1e-40
    }

    fn magnitude(&self) -> f64 {
        self.to_complex().norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_and_arithmetic() {
        let a = ExtComplex::from_complex(Complex64::new(0.75, -2.5));
        assert_eq!(a.to_complex(), Complex64::new(0.75, -2.5));
        let inv = a.checked_inv().unwrap();
        let p = (a * inv).to_complex();
        assert!((p - Complex64::new(1.0, 0.0)).norm() < 1e-60);
    }

    #[test]
    fn real_powers() {
        let v = ExtComplex::real_pow(0.5, 2.0).to_complex().re;
        assert!((v - 0.25).abs() < 1e-17);
        let v = ExtComplex::real_pow(0.9, 0.25).to_complex().re;
        assert!((v - 0.9f64.powf(0.25)).abs() < 1e-16);
        let v = ExtComplex::real_pow(7.0, -1.5).to_complex().re;
        assert!((v - 7f64.powf(-1.5)).abs() < 1e-16);
        // (q^{1/4})^4 = q far beyond double precision
        let r = ExtComplex::real_pow(0.3, 0.25);
        let sq = r.clone() * r;
        let err = sq.clone() * sq - ExtComplex::from_f64(0.3);
        assert!(err.magnitude() < 1e-60);
    }
}
