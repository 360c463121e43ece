//! Fixed-precision p-adic integers and the fermionic p-adic integral.
//!
//! The integral is realized as its defining Riemann-sum limit: level `N`
//! sums over `0 <= x < p^N` (or `f p^N` for character twists, which is the
//! finite decomposition of an integral over `X = lim Z/(f p^N)`), and the
//! levels are swept until two consecutive values agree modulo `p^K`.
//!
//! All §2-style integrals use the `q = 1` fermionic measure with the
//! q-dependence carried by the integrand; the q-measure `mu_q` is available
//! for single integrals through [`Measure::Q`].

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::chars::DirichletChar;
use crate::error::{Error, Result};

/// Default p-adic precision in digits.
pub const DEFAULT_PRECISION: u32 = 12;
/// Extra digits carried by intermediate arithmetic.
pub const GUARD_DIGITS: u32 = 4;
/// Default ceiling on summation terms per Riemann sum.
pub const DEFAULT_WORK_BOUND: u64 = 1 << 24;

/// Residue ring `Z / p^k` with `p^k < 2^63`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Zmod {
    pub p: u64,
    pub k: u32,
    pub m: u64,
}

impl Zmod {
    pub fn new(p: u64, k: u32) -> Result<Self> {
        let m = checked_prime_power(p, k)?;
        Ok(Self { p, k, m })
    }

    #[inline]
    pub fn reduce(&self, v: i128) -> u64 {
        v.rem_euclid(self.m as i128) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.m as u128) as u64
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + self.m as u128 - b as u128) % self.m as u128) as u64
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.m as u128) as u64
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.m - a
        }
    }

    pub fn pow(&self, base: u64, mut e: u64) -> u64 {
        let mut acc = 1 % self.m;
        let mut b = base % self.m;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    /// `base^e` for a signed exponent; `base` must be a unit when `e < 0`.
    pub fn pow_signed(&self, base: u64, e: i64) -> Result<u64> {
        if e >= 0 {
            Ok(self.pow(base, e as u64))
        } else {
            Ok(self.pow(self.inv(base)?, e.unsigned_abs()))
        }
    }

    pub fn inv(&self, a: u64) -> Result<u64> {
        let g = (a as i128).extended_gcd(&(self.m as i128));
        if g.gcd != 1 {
            return Err(Error::NonUnitInverse { valuation: self.valuation(a).unwrap_or(self.k) });
        }
        Ok(self.reduce(g.x))
    }

    /// `v_p(a)` capped at `k`; `None` for zero.
    pub fn valuation(&self, a: u64) -> Option<u32> {
        if a.is_multiple_of(self.m) {
            return None;
        }
        let mut v = 0;
        let mut a = a;
        while a.is_multiple_of(self.p) {
            a /= self.p;
            v += 1;
        }
        Some(v)
    }

    /// Integer `[n]_q` for `q` given as a residue, without division by `1 - q`.
    pub fn bracket(&self, n: i64, q: u64) -> Result<u64> {
        let positive = |n: u64| {
            let mut acc = 0u64;
            let mut p = 1 % self.m;
            for _ in 0..n {
                acc = self.add(acc, p);
                p = self.mul(p, q);
            }
            acc
        };
        if n >= 0 {
            Ok(positive(n as u64))
        } else {
            let pos = positive(n.unsigned_abs());
            Ok(self.neg(self.mul(self.pow_signed(q, n)?, pos)))
        }
    }
}

pub(crate) fn is_odd_prime(p: u64) -> bool {
    if p < 3 || p.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn checked_prime_power(p: u64, k: u32) -> Result<u64> {
    if !is_odd_prime(p) {
        return Err(Error::InvalidPrime(p));
    }
    if k == 0 {
        return Err(Error::InvalidPrecision(k));
    }
    let mut m: u64 = 1;
    for _ in 0..k {
        m = m.checked_mul(p).filter(|&v| v < (1u64 << 62)).ok_or(Error::InvalidPrecision(k))?;
    }
    Ok(m)
}

/// Element of `Z_p` known modulo `p^K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicNum {
    p: u64,
    prec: u32,
    residue: u64,
    valuation: Option<u32>,
}

impl PadicNum {
    pub fn new(p: u64, prec: u32, value: i128) -> Result<Self> {
        let ring = Zmod::new(p, prec)?;
        Ok(Self::from_residue(&ring, ring.reduce(value)))
    }

    pub(crate) fn from_residue(ring: &Zmod, residue: u64) -> Self {
        let residue = residue % ring.m;
        Self { p: ring.p, prec: ring.k, residue, valuation: ring.valuation(residue) }
    }

    pub fn from_i64(p: u64, prec: u32, v: i64) -> Result<Self> {
        Self::new(p, prec, v as i128)
    }

    pub fn zero(p: u64, prec: u32) -> Result<Self> {
        Self::new(p, prec, 0)
    }

    pub fn one(p: u64, prec: u32) -> Result<Self> {
        Self::new(p, prec, 1)
    }

    /// Reduction of a p-integral rational `a / b` (`p` does not divide `b`).
    pub fn from_rational(r: &BigRational, p: u64, prec: u32) -> Result<Self> {
        let ring = Zmod::new(p, prec)?;
        let m = BigInt::from(ring.m);
        let den = r.denom();
        if (den % BigInt::from(p)).is_zero() {
            return Err(Error::NotPadicIntegral(r.to_string()));
        }
        let reduce = |v: &BigInt| -> u64 {
            let mut x = v % &m;
            if x.is_negative() {
                x += &m;
            }
            x.to_u64().expect("residue fits in u64")
        };
        let num = reduce(r.numer());
        let den = ring.inv(reduce(den))?;
        Ok(Self::from_residue(&ring, ring.mul(num, den)))
    }

    pub(crate) fn ring(&self) -> Zmod {
        Zmod { p: self.p, k: self.prec, m: self.p.pow(self.prec) }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    /// `v_p`, or `None` for zero (valuation infinity at this precision).
    pub fn valuation(&self) -> Option<u32> {
        self.valuation
    }

    pub fn is_zero(&self) -> bool {
        self.residue == 0
    }

    pub fn is_unit(&self) -> bool {
        self.valuation == Some(0)
    }

    /// `|a|_p = p^{-v_p(a)}`, zero for zero.
    pub fn norm(&self) -> f64 {
        match self.valuation {
            None => 0.0,
            Some(v) => (self.p as f64).powi(-(v as i32)),
        }
    }

    /// Base-`p` digits, least significant first, `K` of them.
    pub fn digits(&self) -> Vec<u64> {
        let mut r = self.residue;
        (0..self.prec)
            .map(|_| {
                let d = r % self.p;
                r /= self.p;
                d
            })
            .collect()
    }

    /// Same number at a different precision; widening uses the canonical
    /// integer lift `0 <= residue < p^K`.
    pub fn with_precision(&self, prec: u32) -> Result<Self> {
        Self::new(self.p, prec, self.residue as i128)
    }

    fn check_compatible(&self, other: &Self) -> (Zmod, u64, u64) {
        assert_eq!(self.p, other.p, "p-adic numbers over different primes");
        let prec = self.prec.min(other.prec);
        let ring = Zmod { p: self.p, k: prec, m: self.p.pow(prec) };
        (ring, self.residue % ring.m, other.residue % ring.m)
    }

    pub fn add(&self, other: &Self) -> Self {
        let (ring, a, b) = self.check_compatible(other);
        Self::from_residue(&ring, ring.add(a, b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        let (ring, a, b) = self.check_compatible(other);
        Self::from_residue(&ring, ring.sub(a, b))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (ring, a, b) = self.check_compatible(other);
        Self::from_residue(&ring, ring.mul(a, b))
    }

    pub fn neg(&self) -> Self {
        let ring = self.ring();
        Self::from_residue(&ring, ring.neg(self.residue))
    }

    pub fn inv(&self) -> Result<Self> {
        let ring = self.ring();
        Ok(Self::from_residue(&ring, ring.inv(self.residue)?))
    }

    pub fn pow(&self, e: u64) -> Self {
        let ring = self.ring();
        Self::from_residue(&ring, ring.pow(self.residue, e))
    }
}

impl std::fmt::Display for PadicNum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (mod {}^{})", self.residue, self.p, self.prec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PadicOp {
    Add,
    Mul,
    Neg,
    Inv,
}

/// Arithmetic modulo `p^K`; binary operations need `b`.
pub fn padic_arith(op: PadicOp, a: &PadicNum, b: Option<&PadicNum>) -> Result<PadicNum> {
    let need_b = || b.ok_or_else(|| Error::InvalidSpec("binary operation needs two operands".into()));
    match op {
        PadicOp::Add => Ok(a.add(need_b()?)),
        PadicOp::Mul => Ok(a.mul(need_b()?)),
        PadicOp::Neg => Ok(a.neg()),
        PadicOp::Inv => a.inv(),
    }
}

/// p-adic deformation parameter with `v_p(q - 1) >= 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicQ(PadicNum);

impl PadicQ {
    pub fn new(q: PadicNum) -> Result<Self> {
        let ring = q.ring();
        let dq = ring.sub(q.residue, 1);
        if ring.valuation(dq) == Some(0) {
            return Err(Error::InvalidPadicQ);
        }
        Ok(Self(q))
    }

    pub fn from_i64(p: u64, prec: u32, q: i64) -> Result<Self> {
        Self::new(PadicNum::from_i64(p, prec, q)?)
    }

    pub fn value(&self) -> &PadicNum {
        &self.0
    }

    /// The integer representative `0 <= q < p^K`.
    pub fn residue(&self) -> u64 {
        self.0.residue
    }
}

/// `q^x = sum_k C(x, k) (q - 1)^k` for `x` in `Z_p`, to precision `prec`.
///
/// `x` enters through its canonical integer lift. Binomial coefficients are
/// tracked as `p^e * unit` so the division by `k!` never loses digits; the
/// series stops once `k v(q-1) - v_p(k!) >= prec` for this and every later
/// `k`.
pub fn padic_qpow(q: &PadicQ, x: &PadicNum, prec: u32) -> Result<PadicNum> {
    let p = q.0.p;
    let ring = Zmod::new(p, prec)?;
    let qres = q.0.residue % ring.m;
    let d = ring.sub(qres, 1);
    let Some(vd) = ring.valuation(d) else {
        // q = 1 to this precision
        return Ok(PadicNum::from_residue(&ring, 1));
    };
    let dunit = d / p.pow(vd);
    let xlift = x.residue as i128;

    let mut sum = 1 % ring.m;
    // term_k = p^e * u
    let mut e: i64 = 0;
    let mut u: u64 = 1;
    let pf = p as f64;
    let mut k: i64 = 1;
    loop {
        let factor = xlift - (k - 1) as i128;
        if factor == 0 {
            break;
        }
        let (vf, uf) = split_p(factor, p);
        let (vk, uk) = split_p(k as i128, p);
        e += vf as i64 + vd as i64 - vk as i64;
        u = ring.mul(ring.mul(u, ring.reduce(uf)), dunit);
        u = ring.mul(u, ring.inv(ring.reduce(uk))?);
        if e < prec as i64 {
            let term = ring.mul(u, ring.pow(p, e as u64));
            sum = ring.add(sum, term);
        }
        let lower = k as f64 * vd as f64 - (k as f64 - 1.0) / (pf - 1.0);
        if lower >= prec as f64 && (vd as f64) > 1.0 / (pf - 1.0) {
            break;
        }
        k += 1;
    }
    Ok(PadicNum::from_residue(&ring, sum))
}

fn split_p(mut v: i128, p: u64) -> (u32, i128) {
    let mut e = 0;
    while v != 0 && v % p as i128 == 0 {
        v /= p as i128;
        e += 1;
    }
    (e, v)
}

/// Fermionic measure: `mu_1` or the q-deformed `mu_q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Measure {
    One,
    Q(PadicQ),
}

/// What is being integrated, evaluated at `x + offset`.
#[derive(Debug, Clone, PartialEq)]
pub enum IntegrandKind {
    /// `sum_i coeffs[i] y^i`
    Polynomial(Vec<i64>),
    /// `chi(y) q^{twist y} [y + shift]_q^degree`
    QBracket { q: PadicQ, shift: i64, degree: u32, twist: i64, chi: Option<DirichletChar> },
    /// `values[y mod len]`
    Table(Vec<i64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrandSpec {
    pub kind: IntegrandKind,
    pub offset: i64,
}

impl IntegrandSpec {
    pub fn polynomial(coeffs: Vec<i64>) -> Self {
        Self { kind: IntegrandKind::Polynomial(coeffs), offset: 0 }
    }

    pub fn q_bracket(q: PadicQ, shift: i64, degree: u32) -> Self {
        Self { kind: IntegrandKind::QBracket { q, shift, degree, twist: 0, chi: None }, offset: 0 }
    }

    pub fn twisted(q: PadicQ, chi: DirichletChar, twist: i64, shift: i64, degree: u32) -> Result<Self> {
        if !chi.is_real() {
            return Err(Error::NonRealCharacter);
        }
        Ok(Self { kind: IntegrandKind::QBracket { q, shift, degree, twist, chi: Some(chi) }, offset: 0 })
    }

    pub fn table(values: Vec<i64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSpec("empty integrand table".into()));
        }
        Ok(Self { kind: IntegrandKind::Table(values), offset: 0 })
    }

    /// `f_n(x) = f(x + n)`.
    pub fn shifted(&self, n: i64) -> Self {
        Self { kind: self.kind.clone(), offset: self.offset + n }
    }

    /// `f(x)` modulo `p^K` for a single integer argument.
    pub fn eval(&self, x: i64, p: u64, prec: u32) -> Result<PadicNum> {
        let ring = Zmod::new(p, prec)?;
        let mut it = self.values(&ring, x)?;
        Ok(PadicNum::from_residue(&ring, it.next_value()?))
    }

    fn values(&self, ring: &Zmod, start: i64) -> Result<IntegrandIter> {
        let y0 = start + self.offset;
        Ok(match &self.kind {
            IntegrandKind::Polynomial(c) => IntegrandIter::Poly { coeffs: c.clone(), y: y0, ring: *ring },
            IntegrandKind::Table(v) => IntegrandIter::Table { values: v.clone(), y: y0, ring: *ring },
            IntegrandKind::QBracket { q, shift, degree, twist, chi } => {
                let qr = q.residue() % ring.m;
                IntegrandIter::Bracket {
                    ring: *ring,
                    q: qr,
                    bracket: ring.bracket(y0 + shift, qr)?,
                    twist_pow: ring.pow_signed(qr, twist * y0)?,
                    twist_step: ring.pow_signed(qr, *twist)?,
                    degree: *degree,
                    chi: chi.clone(),
                    y: y0,
                }
            }
        })
    }
}

enum IntegrandIter {
    Poly {
        coeffs: Vec<i64>,
        y: i64,
        ring: Zmod,
    },
    Table {
        values: Vec<i64>,
        y: i64,
        ring: Zmod,
    },
    Bracket {
        ring: Zmod,
        q: u64,
        bracket: u64,
        twist_pow: u64,
        twist_step: u64,
        degree: u32,
        chi: Option<DirichletChar>,
        y: i64,
    },
}

impl IntegrandIter {
    fn next_value(&mut self) -> Result<u64> {
        match self {
            IntegrandIter::Poly { coeffs, y, ring } => {
                let yr = ring.reduce(*y as i128);
                let mut acc = 0u64;
                for &c in coeffs.iter().rev() {
                    acc = ring.add(ring.mul(acc, yr), ring.reduce(c as i128));
                }
                *y += 1;
                Ok(acc)
            }
            IntegrandIter::Table { values, y, ring } => {
                let v = values[y.rem_euclid(values.len() as i64) as usize];
                *y += 1;
                Ok(ring.reduce(v as i128))
            }
            IntegrandIter::Bracket { ring, q, bracket, twist_pow, twist_step, degree, chi, y } => {
                let c = match chi {
                    None => 1,
                    Some(chi) => chi.eval_real(*y)?,
                };
                let v = if c == 0 {
                    0
                } else {
                    let v = ring.mul(ring.pow(*bracket, *degree as u64), *twist_pow);
                    if c < 0 {
                        ring.neg(v)
                    } else {
                        v
                    }
                };
                // [z + 1]_q = 1 + q [z]_q
                *bracket = ring.add(1 % ring.m, ring.mul(*q, *bracket));
                *twist_pow = ring.mul(*twist_pow, *twist_step);
                *y += 1;
                Ok(v)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntegralConfig {
    /// Target precision `K`.
    pub precision: u32,
    pub guard_digits: u32,
    /// Highest level tried; `None` means `K + guard_digits`.
    pub max_level: Option<u32>,
    /// Ceiling on the number of summation terms.
    pub work_bound: u64,
    /// Largest order accepted by multivariate integrals.
    pub max_order: usize,
}

impl Default for IntegralConfig {
    fn default() -> Self {
        Self {
            precision: DEFAULT_PRECISION,
            guard_digits: GUARD_DIGITS,
            max_level: None,
            work_bound: DEFAULT_WORK_BOUND,
            max_order: 2,
        }
    }
}

impl IntegralConfig {
    pub fn with_precision(precision: u32) -> Self {
        Self { precision, ..Self::default() }
    }

    fn max_level(&self) -> u32 {
        self.max_level.unwrap_or(self.precision + self.guard_digits)
    }
}

/// Stabilized integral value with its convergence report.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralValue {
    /// The level-`level` Riemann sum reduced to precision `K`.
    pub value: PadicNum,
    pub level: u32,
    /// `diff_valuations[i]` is `v_p(S_{i+2} - S_{i+1})` at working
    /// precision; `None` when the two levels agree exactly.
    pub diff_valuations: Vec<Option<u32>>,
}

impl IntegralValue {
    /// Two consecutive level differences divisible by `p^K`; a single one
    /// can vanish by coincidence at low levels.
    fn stabilized(&self, k: u32) -> bool {
        let d = &self.diff_valuations;
        d.len() >= 2 && d[d.len() - 2..].iter().all(|v| v.is_none_or(|v| v >= k))
    }
}

/// Level-`N` Riemann sum
/// `((1 + q)/(1 + q^{p^N})) sum_{x < p^N} f(x) (-q)^x` modulo `p^prec`.
pub fn riemann_sum(
    f: &IntegrandSpec,
    measure: &Measure,
    p: u64,
    level: u32,
    prec: u32,
    work_bound: u64,
) -> Result<PadicNum> {
    let ring = Zmod::new(p, prec)?;
    let terms = level_size(p, level, 1, work_bound)?;
    let mut sum = 0u64;
    let mut sweep = Sweep::new(f, measure, &ring)?;
    for _ in 0..terms {
        sum = ring.add(sum, sweep.step()?);
    }
    Ok(PadicNum::from_residue(&ring, sweep.finish(sum, terms)?))
}

fn level_size(p: u64, level: u32, stride: u64, work_bound: u64) -> Result<u64> {
    let size = p.checked_pow(level).and_then(|v| v.checked_mul(stride)).unwrap_or(u64::MAX);
    if size > work_bound {
        return Err(Error::LevelTooSmall { level, bound: work_bound });
    }
    Ok(size)
}

/// Running state of `f(x) (-q)^x`.
struct Sweep {
    ring: Zmod,
    values: IntegrandIter,
    /// `(-q)^x` for the measure (1 or -1 alternation for `mu_1`)
    weight: u64,
    step_weight: u64,
    q: Option<u64>,
}

impl Sweep {
    fn new(f: &IntegrandSpec, measure: &Measure, ring: &Zmod) -> Result<Self> {
        let q = match measure {
            Measure::One => None,
            Measure::Q(q) => Some(q.residue() % ring.m),
        };
        let step_weight = ring.neg(q.unwrap_or(1 % ring.m));
        Ok(Self { ring: *ring, values: f.values(ring, 0)?, weight: 1 % ring.m, step_weight, q })
    }

    fn step(&mut self) -> Result<u64> {
        let v = self.ring.mul(self.values.next_value()?, self.weight);
        self.weight = self.ring.mul(self.weight, self.step_weight);
        Ok(v)
    }

    /// Applies the prefactor `(1 + q)/(1 + q^{terms})`.
    fn finish(&self, sum: u64, terms: u64) -> Result<u64> {
        match self.q {
            None => Ok(sum),
            Some(q) => {
                let ring = &self.ring;
                let den = ring.add(1, ring.pow(q, terms));
                // 1 + q^{p^N} = 2 mod p, a unit for odd p
                debug_assert_eq!(den % ring.p, 2 % ring.p);
                Ok(ring.mul(ring.mul(sum, ring.add(1, q)), ring.inv(den)?))
            }
        }
    }
}

/// Sweeps levels `N = 1, 2, ...` until `S_N = S_{N-1}` modulo `p^K`.
pub fn fermionic_integral(f: &IntegrandSpec, measure: &Measure, p: u64, cfg: &IntegralConfig) -> Result<IntegralValue> {
    let work = Zmod::new(p, cfg.precision + cfg.guard_digits)?;
    let target = Zmod::new(p, cfg.precision)?;
    let mut sweep = Sweep::new(f, measure, &work)?;
    let mut sum = 0u64;
    let mut done: u64 = 0;
    let mut prev: Option<u64> = None;
    let mut diffs = Vec::new();
    for level in 1..=cfg.max_level() {
        let size = level_size(p, level, 1, cfg.work_bound)?;
        while done < size {
            sum = work.add(sum, sweep.step()?);
            done += 1;
        }
        let value = sweep.finish(sum, size)?;
        if let Some(pv) = prev {
            diffs.push(work.valuation(work.sub(value, pv)));
        }
        prev = Some(value);
        let out =
            IntegralValue { value: PadicNum::from_residue(&target, value), level, diff_valuations: diffs.clone() };
        if out.stabilized(cfg.precision) {
            return Ok(out);
        }
    }
    Err(Error::NotStabilized { level: cfg.max_level(), valuation: diffs.last().copied().flatten().unwrap_or(0) })
}

/// `I_1(f_n) - (-1)^n I_1(f) - 2 sum_{l<n} (-1)^{n-1-l} f(l)`, which vanishes
/// for every integrand.
///
/// Both integrals are taken as Riemann sums at the same level `N = K`; the
/// telescoped difference is then `sum_l +-(f(p^N + l) - f(l))`, which is
/// `0 mod p^K` for integral-valued polynomials.
pub fn functional_equation_residual(f: &IntegrandSpec, n: u32, p: u64, cfg: &IntegralConfig) -> Result<PadicNum> {
    let level = cfg.precision;
    let shifted = riemann_sum(&f.shifted(n as i64), &Measure::One, p, level, cfg.precision, cfg.work_bound)?;
    let base = riemann_sum(f, &Measure::One, p, level, cfg.precision, cfg.work_bound)?;
    let ring = Zmod::new(p, cfg.precision)?;
    let mut rhs = if n.is_multiple_of(2) { base.residue } else { ring.neg(base.residue) };
    for l in 0..n {
        let fl = f.eval(l as i64, p, cfg.precision)?.residue;
        let term = ring.add(fl, fl);
        rhs = if (n - 1 - l).is_multiple_of(2) { ring.add(rhs, term) } else { ring.sub(rhs, term) };
    }
    Ok(PadicNum::from_residue(&ring, ring.sub(shifted.residue, rhs)))
}

/// Multivariate integrand
/// `prod_j chi(x_j) q^{sum_j a_j x_j} [x + sum_j w_j x_j]_q^degree`.
///
/// With `chi` set, each variable ranges over `X` and level `N` sums over
/// `0 <= x_j < f p^N`; otherwise over `Z_p` with `0 <= x_j < p^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeIntegrand {
    pub q: PadicQ,
    pub x: i64,
    pub w: Vec<i64>,
    pub a: Vec<i64>,
    pub degree: u32,
    pub chi: Option<DirichletChar>,
}

impl LatticeIntegrand {
    pub fn order(&self) -> usize {
        self.w.len()
    }

    fn validate(&self, p: u64, cfg: &IntegralConfig) -> Result<()> {
        if self.w.is_empty() || self.w.len() != self.a.len() {
            return Err(Error::InvalidSpec("w and a must have the same positive length".into()));
        }
        if self.order() > cfg.max_order {
            return Err(Error::InvalidSpec(format!(
                "order {} exceeds the configured maximum {}",
                self.order(),
                cfg.max_order
            )));
        }
        if let Some(chi) = &self.chi {
            if !chi.is_real() {
                return Err(Error::NonRealCharacter);
            }
            if chi.modulus() % p == 0 {
                return Err(Error::InvalidSpec("character modulus must be coprime to p".into()));
            }
        }
        Ok(())
    }

    fn stride(&self) -> u64 {
        self.chi.as_ref().map_or(1, |c| c.modulus())
    }
}

/// Per-axis moment table
/// `A[k][s] = sum_{y < R} (-1)^y chi(y) q^{a y} [w y]_q^k q^{w y s}`, `k + s <= n`.
struct AxisMoments {
    ring: Zmod,
    n: usize,
    w_bracket: u64,
    qw: u64,
    qa: u64,
    chi: Option<DirichletChar>,
    // running state at y
    y: u64,
    bracket: u64,
    qwy: u64,
    qay: u64,
    acc: Vec<Vec<u64>>,
}

impl AxisMoments {
    fn new(ring: &Zmod, q: u64, w: i64, a: i64, n: usize, chi: Option<DirichletChar>) -> Result<Self> {
        Ok(Self {
            ring: *ring,
            n,
            w_bracket: ring.bracket(w, q)?,
            qw: ring.pow_signed(q, w)?,
            qa: ring.pow_signed(q, a)?,
            chi,
            y: 0,
            bracket: 0,
            qwy: 1 % ring.m,
            qay: 1 % ring.m,
            acc: vec![vec![0; n + 1]; n + 1],
        })
    }

    fn advance_to(&mut self, end: u64) -> Result<()> {
        let ring = self.ring;
        let n = self.n;
        let mut bpow = vec![0u64; n + 1];
        let mut qpow = vec![0u64; n + 1];
        while self.y < end {
            let c = match &self.chi {
                None => 1,
                Some(chi) => chi.eval_real(self.y as i64)?,
            };
            if c != 0 {
                let sign_neg = (self.y % 2 == 1) != (c < 0);
                bpow[0] = 1 % ring.m;
                qpow[0] = 1 % ring.m;
                for i in 1..=n {
                    bpow[i] = ring.mul(bpow[i - 1], self.bracket);
                    qpow[i] = ring.mul(qpow[i - 1], self.qwy);
                }
                for k in 0..=n {
                    let bk = ring.mul(bpow[k], self.qay);
                    for s in 0..=(n - k) {
                        let t = ring.mul(bk, qpow[s]);
                        let cell = &mut self.acc[k][s];
                        *cell = if sign_neg { ring.sub(*cell, t) } else { ring.add(*cell, t) };
                    }
                }
            }
            // [w(y+1)]_q = [wy]_q + q^{wy} [w]_q
            self.bracket = ring.add(self.bracket, ring.mul(self.qwy, self.w_bracket));
            self.qwy = ring.mul(self.qwy, self.qw);
            self.qay = ring.mul(self.qay, self.qa);
            self.y += 1;
        }
        Ok(())
    }
}

fn multinomial_rows(n: usize, r: usize) -> Vec<Vec<usize>> {
    // all (k_0, k_1, ..., k_r) with sum n
    let mut out = Vec::new();
    let mut cur = vec![0usize; r + 1];
    fn rec(pos: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur[pos] = k;
            rec(pos + 1, left - k, cur, out);
        }
    }
    rec(0, n, &mut cur, &mut out);
    out
}

fn multinomial(ks: &[usize]) -> u128 {
    let mut acc: u128 = 1;
    let mut total = 0u128;
    for &k in ks {
        for i in 1..=k as u128 {
            total += 1;
            acc = acc * total / i;
        }
    }
    acc
}

/// Combines per-axis moment tables into the level sum using
/// `[x + Y_1 + ... + Y_r]_q = [x]_q + sum_j q^{x + Y_1 + ... + Y_{j-1}} [Y_j]_q`
/// and the multinomial theorem; every factor depends on one axis only.
fn combine_axes(ring: &Zmod, f: &LatticeIntegrand, q: u64, axes: &[AxisMoments]) -> Result<u64> {
    let n = f.degree as usize;
    let r = axes.len();
    let xb = ring.bracket(f.x, q)?;
    let qx = ring.pow_signed(q, f.x)?;
    let mut total = 0u64;
    for ks in multinomial_rows(n, r) {
        let coeff = ring.reduce((multinomial(&ks) % ring.m as u128) as i128);
        let mut term = ring.mul(coeff, ring.pow(xb, ks[0] as u64));
        term = ring.mul(term, ring.pow(qx, (n - ks[0]) as u64));
        for j in 0..r {
            let s: usize = ks[j + 2..].iter().sum();
            term = ring.mul(term, axes[j].acc[ks[j + 1]][s]);
        }
        total = ring.add(total, term);
    }
    Ok(total)
}

/// Level-`N` r-fold Riemann sum of a [`LatticeIntegrand`], evaluated through
/// the separable expansion of the q-bracket (cost linear in the axis range).
pub fn riemann_sum_multi(
    f: &LatticeIntegrand,
    p: u64,
    level: u32,
    prec: u32,
    cfg: &IntegralConfig,
) -> Result<PadicNum> {
    f.validate(p, cfg)?;
    let ring = Zmod::new(p, prec)?;
    let range = level_size(p, level, f.stride(), cfg.work_bound / f.order() as u64)?;
    let q = f.q.residue() % ring.m;
    let mut axes = Vec::with_capacity(f.order());
    for j in 0..f.order() {
        let mut ax = AxisMoments::new(&ring, q, f.w[j], f.a[j], f.degree as usize, f.chi.clone())?;
        ax.advance_to(range)?;
        axes.push(ax);
    }
    Ok(PadicNum::from_residue(&ring, combine_axes(&ring, f, q, &axes)?))
}

/// The same level sum as [`riemann_sum_multi`] by direct r-fold nesting;
/// cost `(range)^r`, bounded by the work bound.
pub fn riemann_sum_multi_nested(
    f: &LatticeIntegrand,
    p: u64,
    level: u32,
    prec: u32,
    cfg: &IntegralConfig,
) -> Result<PadicNum> {
    f.validate(p, cfg)?;
    let ring = Zmod::new(p, prec)?;
    let range = level_size(p, level, f.stride(), u64::MAX)?;
    let r = f.order();
    let required = range.checked_pow(r as u32).unwrap_or(u64::MAX);
    if required > cfg.work_bound {
        return Err(Error::WorkBoundExceeded { required, bound: cfg.work_bound });
    }
    let q = f.q.residue() % ring.m;
    let mut total = 0u64;
    let mut idx = vec![0u64; r];
    for _ in 0..required {
        let mut arg = f.x;
        let mut twist = 0i64;
        let mut sign = 1i64;
        for j in 0..r {
            let xj = idx[j] as i64;
            arg += f.w[j] * xj;
            twist += f.a[j] * xj;
            if xj % 2 == 1 {
                sign = -sign;
            }
            if let Some(chi) = &f.chi {
                sign *= chi.eval_real(xj)?;
            }
        }
        if sign != 0 {
            let v = ring.mul(ring.pow(ring.bracket(arg, q)?, f.degree as u64), ring.pow_signed(q, twist)?);
            total = if sign > 0 { ring.add(total, v) } else { ring.sub(total, v) };
        }
        for j in 0..r {
            idx[j] += 1;
            if idx[j] < range {
                break;
            }
            idx[j] = 0;
        }
    }
    Ok(PadicNum::from_residue(&ring, total))
}

/// Multivariate fermionic integral with the level sweep of
/// [`fermionic_integral`].
pub fn fermionic_integral_multi(f: &LatticeIntegrand, p: u64, cfg: &IntegralConfig) -> Result<IntegralValue> {
    f.validate(p, cfg)?;
    let work = Zmod::new(p, cfg.precision + cfg.guard_digits)?;
    let target = Zmod::new(p, cfg.precision)?;
    let q = f.q.residue() % work.m;
    let per_axis_bound = cfg.work_bound / f.order() as u64;
    let mut axes = Vec::with_capacity(f.order());
    for j in 0..f.order() {
        axes.push(AxisMoments::new(&work, q, f.w[j], f.a[j], f.degree as usize, f.chi.clone())?);
    }
    let mut prev: Option<u64> = None;
    let mut diffs = Vec::new();
    for level in 1..=cfg.max_level() {
        let range = level_size(p, level, f.stride(), per_axis_bound)?;
        for ax in axes.iter_mut() {
            ax.advance_to(range)?;
        }
        let value = combine_axes(&work, f, q, &axes)?;
        if let Some(pv) = prev {
            diffs.push(work.valuation(work.sub(value, pv)));
        }
        prev = Some(value);
        let out =
            IntegralValue { value: PadicNum::from_residue(&target, value), level, diff_valuations: diffs.clone() };
        if out.stabilized(cfg.precision) {
            return Ok(out);
        }
    }
    Err(Error::NotStabilized { level: cfg.max_level(), valuation: diffs.last().copied().flatten().unwrap_or(0) })
}

/// Reduces an exact rational to the residue ring, as used by cross-checks.
pub fn reduce_rational(r: &BigRational, p: u64, prec: u32) -> Result<PadicNum> {
    PadicNum::from_rational(r, p, prec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chars::characters_mod;
    use crate::qcore::rational;

    fn cfg(k: u32) -> IntegralConfig {
        IntegralConfig::with_precision(k)
    }

    /// Inverse by brute-force search, independent of the extended gcd.
    fn brute_inverse(a: u64, m: u64) -> u64 {
        (1..m).find(|&b| a * b % m == 1).unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        let one = PadicNum::one(3, 4).unwrap();
        assert_eq!(one.inv().unwrap(), one);
        let two = PadicNum::from_i64(3, 4, 2).unwrap();
        assert_eq!(two.inv().unwrap().residue(), 41);
        assert_eq!(brute_inverse(2, 81), 41);
        let x = PadicNum::from_i64(3, 4, 50).unwrap();
        assert!(padic_arith(PadicOp::Add, &x, Some(&x.neg())).unwrap().is_zero());
        assert!(padic_arith(PadicOp::Add, &x, None).is_err());
        let three = PadicNum::from_i64(3, 4, 3).unwrap();
        assert_eq!(three.inv(), Err(Error::NonUnitInverse { valuation: 1 }));
        assert_eq!(three.norm(), 1.0 / 3.0);
        assert_eq!(three.valuation(), Some(1));
        assert_eq!(PadicNum::zero(3, 4).unwrap().valuation(), None);
    }

    #[test]
    fn inverse_matches_brute_force() {
        for p in [3u64, 5, 7] {
            let m = p.pow(3);
            for a in (1..m).filter(|a| a % p != 0) {
                let inv = PadicNum::from_i64(p, 3, a as i64).unwrap().inv().unwrap();
                assert_eq!(inv.residue(), brute_inverse(a, m));
            }
        }
    }

    #[test]
    fn digits_least_significant_first() {
        let x = PadicNum::from_i64(3, 4, 5).unwrap();
        assert_eq!(x.digits(), vec![2, 1, 0, 0]);
        let minus_one = PadicNum::from_i64(3, 3, -1).unwrap();
        assert_eq!(minus_one.digits(), vec![2, 2, 2]);
    }

    #[test]
    fn rational_reduction() {
        let r = PadicNum::from_rational(&rational(-1, 5), 3, 8).unwrap();
        assert_eq!(r.mul(&PadicNum::from_i64(3, 8, 5).unwrap()).residue(), 3u64.pow(8) - 1);
        assert!(PadicNum::from_rational(&rational(1, 3), 3, 8).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(PadicNum::new(4, 3, 1), Err(Error::InvalidPrime(4)));
        assert_eq!(PadicNum::new(2, 3, 1), Err(Error::InvalidPrime(2)));
        assert!(PadicNum::new(3, 60, 1).is_err());
        assert_eq!(PadicQ::from_i64(3, 5, 2), Err(Error::InvalidPadicQ));
        assert!(PadicQ::from_i64(3, 5, 4).is_ok());
    }

    #[test]
    fn qpow_examples() {
        let q = PadicQ::from_i64(3, 10, 4).unwrap();
        let zero = PadicNum::zero(3, 10).unwrap();
        assert_eq!(padic_qpow(&q, &zero, 10).unwrap().residue(), 1);
        let two = PadicNum::from_i64(3, 10, 2).unwrap();
        assert_eq!(padic_qpow(&q, &two, 10).unwrap(), q.value().mul(q.value()));
        let half = two.inv().unwrap();
        let root = padic_qpow(&q, &half, 10).unwrap();
        assert_eq!(root.mul(&root).residue(), 4);
    }

    #[test]
    fn qpow_agrees_with_repeated_multiplication() {
        for (p, q) in [(3u64, 4i64), (3, 10), (5, 6), (5, 26), (7, 8)] {
            let qq = PadicQ::from_i64(p, 8, q).unwrap();
            for x in 0..40i64 {
                let xn = PadicNum::from_i64(p, 8, x).unwrap();
                let expect = qq.value().pow(x as u64);
                assert_eq!(padic_qpow(&qq, &xn, 8).unwrap(), expect, "p={p} q={q} x={x}");
            }
        }
    }

    #[test]
    fn qpow_of_negative_exponent_is_inverse() {
        let q = PadicQ::from_i64(5, 9, 6).unwrap();
        let x = PadicNum::from_i64(5, 9, -3).unwrap();
        let v = padic_qpow(&q, &x, 9).unwrap();
        assert_eq!(v.mul(&q.value().pow(3)).residue(), 1);
    }

    #[test]
    fn constant_integrand_is_one() {
        let one = IntegrandSpec::polynomial(vec![1]);
        for p in [3u64, 5, 7] {
            for n in 1..4 {
                assert_eq!(riemann_sum(&one, &Measure::One, p, n, 6, 1 << 20).unwrap().residue(), 1);
            }
        }
        let q = PadicQ::from_i64(3, 8, 4).unwrap();
        let v = fermionic_integral(&one, &Measure::Q(q), 3, &cfg(8)).unwrap();
        assert_eq!(v.value.residue(), 1);
    }

    #[test]
    fn q_bracket_integral_is_minus_one_over_one_plus_q() {
        let q = PadicQ::from_i64(3, 8, 4).unwrap();
        let f = IntegrandSpec::q_bracket(q, 0, 1);
        let v = fermionic_integral(&f, &Measure::One, 3, &cfg(8)).unwrap();
        let expect = PadicNum::from_rational(&rational(-1, 5), 3, 8).unwrap();
        assert_eq!(v.value, expect);
        let inv5 = PadicNum::from_i64(3, 8, 5).unwrap().inv().unwrap();
        assert_eq!(v.value, inv5.neg());
    }

    #[test]
    fn functional_equation_first_shift() {
        let f = IntegrandSpec::polynomial(vec![0, 0, 1]);
        let c = cfg(8);
        let lhs = fermionic_integral(&f.shifted(1), &Measure::One, 3, &c).unwrap().value;
        let base = fermionic_integral(&f, &Measure::One, 3, &c).unwrap().value;
        // f(0) = 0, so I(f_1) + I(f) = 0
        assert!(lhs.add(&base).is_zero());
        assert!(functional_equation_residual(&f, 1, 3, &c).unwrap().is_zero());
    }

    #[test]
    fn stabilization_is_monotone_for_polynomials() {
        for deg in 0..=6usize {
            let mut coeffs = vec![0i64; deg + 1];
            coeffs[deg] = 1;
            coeffs[0] = 3;
            let f = IntegrandSpec::polynomial(coeffs);
            let v = fermionic_integral(&f, &Measure::One, 3, &cfg(12)).unwrap();
            let vals: Vec<u32> = v.diff_valuations.iter().map(|d| d.unwrap_or(u32::MAX)).collect();
            assert!(vals.windows(2).all(|w| w[0] <= w[1]), "deg={deg}: {vals:?}");
            assert!(*vals.last().unwrap() >= 12);
        }
    }

    #[test]
    fn level_beyond_work_bound_is_rejected() {
        let f = IntegrandSpec::polynomial(vec![1]);
        assert_eq!(
            riemann_sum(&f, &Measure::One, 3, 20, 4, 1000),
            Err(Error::LevelTooSmall { level: 20, bound: 1000 })
        );
        let tight = IntegralConfig { work_bound: 100, ..cfg(10) };
        assert!(matches!(
            fermionic_integral(&IntegrandSpec::polynomial(vec![0, 1]), &Measure::One, 3, &tight),
            Err(Error::LevelTooSmall { .. })
        ));
    }

    #[test]
    fn table_integrand_is_periodic() {
        let f = IntegrandSpec::table(vec![1, 2, 3]).unwrap();
        assert_eq!(f.eval(4, 5, 3).unwrap().residue(), 2);
        assert_eq!(f.shifted(2).eval(0, 5, 3).unwrap().residue(), 3);
    }

    fn lattice(w: Vec<i64>, a: Vec<i64>, x: i64, n: u32, chi: Option<DirichletChar>) -> LatticeIntegrand {
        LatticeIntegrand { q: PadicQ::from_i64(3, 12, 4).unwrap(), x, w, a, degree: n, chi }
    }

    #[test]
    fn separable_sum_equals_nested_sum() {
        let c = IntegralConfig { work_bound: 1 << 22, ..cfg(9) };
        let quad = characters_mod(5).unwrap().into_iter().find(|c| c.order() == 2).unwrap();
        let cases = vec![
            lattice(vec![1, 1], vec![0, 0], 0, 3, None),
            lattice(vec![1, 2], vec![1, -1], 2, 4, None),
            lattice(vec![2, 3], vec![-2, 0], -1, 2, None),
            lattice(vec![1, 2], vec![0, 1], 1, 3, Some(quad.clone())),
            lattice(vec![3], vec![2], 1, 4, Some(quad)),
        ];
        for f in cases {
            for level in 1..=3 {
                let fast = riemann_sum_multi(&f, 3, level, 9, &c).unwrap();
                let slow = riemann_sum_multi_nested(&f, 3, level, 9, &c).unwrap();
                assert_eq!(fast, slow, "{f:?} level {level}");
            }
        }
    }

    #[test]
    fn multi_constant_integrand() {
        let f = lattice(vec![1, 1], vec![0, 0], 0, 0, None);
        let v = fermionic_integral_multi(&f, 3, &cfg(10)).unwrap();
        assert_eq!(v.value.residue(), 1);
    }

    #[test]
    fn multi_rejects_complex_character_and_large_order() {
        let quartic = characters_mod(5).unwrap().into_iter().find(|c| c.order() == 4).unwrap();
        let f = lattice(vec![1], vec![0], 0, 1, Some(quartic));
        assert_eq!(fermionic_integral_multi(&f, 3, &cfg(6)), Err(Error::NonRealCharacter));
        let g = lattice(vec![1, 1, 1], vec![0, 0, 0], 0, 1, None);
        assert!(fermionic_integral_multi(&g, 3, &cfg(6)).is_err());
        let h = lattice(vec![1, 1], vec![0, 0], 0, 6, None);
        let tight = IntegralConfig { work_bound: 9, ..cfg(6) };
        assert!(matches!(riemann_sum_multi_nested(&h, 3, 2, 6, &tight), Err(Error::WorkBoundExceeded { .. })));
    }
}
