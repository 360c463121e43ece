//! Classical Barnes multiple zeta, the Barnes-type multiple q-zeta and q-l
//! functions, and the numerical checks tying them to the q-Euler family.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::powerseries::{barnes_bernoulli, factorial};
use crate::qcore::ComplexQ;
use crate::qeuler::{
    direct_terms, lattice_series, q_euler_closed, q_euler_closed_extended, relative_deviation, BarnesSpec, Method,
    PowerKind, SumConfig,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaPoint {
    pub s: Complex64,
    pub value: Complex64,
    pub method: Method,
    /// Certified for DIRECT, an estimate otherwise.
    pub error: f64,
    pub certified: bool,
    pub terms_used: u64,
}

// B_2, B_4, ..., B_20
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Euler–Maclaurin correction terms used per level.
const EM_TERMS: usize = 8;

/// `zeta_N(s, w | a) = sum_{m >= 0} (w + m.a)^{-s}`, `Re(s) > N`.
///
/// Evaluated by peeling off the last axis with Euler–Maclaurin:
/// `zeta_N(s, w) = sum_{m<M} zeta_{N-1}(s, w + m a_N)
///     + zeta_{N-1}(s-1, W) / ((s-1) a_N) + zeta_{N-1}(s, W)/2
///     + sum_k B_{2k}/(2k)! (s)_{2k-1} a_N^{2k-1} zeta_{N-1}(s+2k-1, W)`
/// with `W = w + M a_N`, using `d/dw zeta_{N-1}(s, w) = -s zeta_{N-1}(s+1, w)`.
///
/// The reported error is the size of the first omitted correction, an
/// estimate.
pub fn barnes_zeta_classical(s: Complex64, w: f64, a: &[f64]) -> Result<ZetaPoint> {
    let n = a.len();
    if !(w > 0.0) || a.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidSpec("w and a must be positive".into()));
    }
    if s.re <= n as f64 {
        return Err(Error::OutsideConvergenceRegion { re_s: s.re, order: n });
    }
    let mut terms = 0u64;
    let (value, error) = em_level(s, w, a, &mut terms);
    Ok(ZetaPoint {
        s,
        value,
        method: if n == 0 { Method::Direct } else { Method::EulerMaclaurin },
        error,
        certified: n == 0,
        terms_used: terms,
    })
}

fn em_level(s: Complex64, w: f64, a: &[f64], terms: &mut u64) -> (Complex64, f64) {
    let Some((&last, rest)) = a.split_last() else {
        *terms += 1;
        return ((-s * w.ln()).exp(), 0.0);
    };
    // shift far enough that the asymptotic corrections shrink quickly
    let target = 12.0 + 2.0 * s.norm();
    let m = ((target - w) / last).ceil().max(0.0) as u64;
    let mut acc = Complex64::zero();
    let mut err = 0.0;
    for i in 0..m {
        let (v, e) = em_level(s, w + i as f64 * last, rest, terms);
        acc += v;
        err += e;
    }
    let big_w = w + m as f64 * last;
    let (v, e) = em_level(s - 1.0, big_w, rest, terms);
    acc += v / ((s - 1.0) * last);
    err += e / ((s - 1.0) * last).norm();
    let (v, e) = em_level(s, big_w, rest, terms);
    acc += v * 0.5;
    err += 0.5 * e;
    // (s)_{2k-1} a^{2k-1} / (2k)!
    let mut poch = s;
    let mut apow = last;
    let mut fact = 2.0;
    let mut last_term = 0.0;
    for (k, b) in BERNOULLI_EVEN.iter().take(EM_TERMS + 1).enumerate() {
        let (v, e) = em_level(s + (2 * k + 1) as f64, big_w, rest, terms);
        let c = poch * apow * (*b / fact);
        if k == EM_TERMS {
            last_term = (c * v).norm();
            break;
        }
        acc += c * v;
        err += c.norm() * e;
        let kf = (2 * k + 1) as f64;
        poch = poch * (s + kf) * (s + kf + 1.0);
        apow *= last * last;
        fact *= (kf + 2.0) * (kf + 3.0);
    }
    (acc, err + last_term)
}

/// `zeta_N(-m, w | a) = (-1)^N m! / (N+m)! B_{N+m}(w, N | a)`, exact.
///
/// The relation is stated for `m >= 1`; `m = 0` is accepted as an
/// extension.
pub fn barnes_zeta_negative(m: u32, w: &BigRational, a: &[BigRational]) -> Result<BigRational> {
    let n = a.len();
    if a.iter().any(|v| v <= &BigRational::zero()) {
        return Err(Error::InvalidSpec("a must be positive".into()));
    }
    if n == 0 {
        return crate::qcore::pow_int(w, m as i64);
    }
    let b = barnes_bernoulli(n + m as usize, w, a)?;
    let sign = if n.is_multiple_of(2) { BigRational::one() } else { -BigRational::one() };
    Ok(sign * factorial(m as usize) / factorial(n + m as usize) * b)
}

/// The Barnes-type multiple q-zeta function (trivial character) or q-l
/// function (with character) of `spec` at `s`.
pub fn q_zeta(s: Complex64, spec: &BarnesSpec, q: &ComplexQ, cfg: &SumConfig) -> Result<ZetaPoint> {
    Ok(q_zeta_many(&[s], spec, q, cfg)?[0])
}

/// Several arguments from one sweep.
pub fn q_zeta_many(ss: &[Complex64], spec: &BarnesSpec, q: &ComplexQ, cfg: &SumConfig) -> Result<Vec<ZetaPoint>> {
    let kinds: Vec<_> = ss.iter().map(|&s| PowerKind::Power(-s)).collect();
    let vals = lattice_series(&kinds, spec, q, cfg)?;
    Ok(ss
        .iter()
        .zip(vals)
        .map(|(&s, v)| ZetaPoint {
            s,
            value: v.value,
            method: v.method,
            error: v.error,
            certified: v.certified,
            terms_used: v.terms_used,
        })
        .collect())
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `Gamma(s)` by the Lanczos approximation (`g = 7`), with reflection for
/// `Re(s) < 1/2`.
pub fn complex_gamma(s: Complex64) -> Result<Complex64> {
    if s.im == 0.0 && s.re <= 0.0 && s.re.fract() == 0.0 {
        return Err(Error::PoleOfGamma(s.re));
    }
    if s.re < 0.5 {
        let sin = (s * PI).sin();
        return Ok(Complex64::new(PI, 0.0) / (sin * complex_gamma(Complex64::one() - s)?));
    }
    let z = s - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        x += *c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Ok((2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    /// Absolute tolerance for the whole integral.
    pub tolerance: f64,
    pub max_panels: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_panels: 20_000 }
    }
}

// Gauss–Kronrod 7/15 nodes on [-1, 1] (non-negative half).
const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const G_WEIGHTS: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15(f: &mut impl FnMut(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = Complex64::zero();
    let mut gauss = Complex64::zero();
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let sum = f(c - x) + f(c + x);
        kron += sum * GK_WEIGHTS[i];
        if i % 2 == 1 {
            gauss += sum * G_WEIGHTS[i / 2];
        }
    }
    let mid = f(c);
    kron += mid * GK_WEIGHTS[7];
    gauss += mid * G_WEIGHTS[3];
    (kron * h, ((kron - gauss) * h).norm())
}

/// Adaptive Gauss–Kronrod on `[a, b]`; returns the integral and the summed
/// panel error estimates.
pub fn integrate(mut f: impl FnMut(f64) -> Complex64, a: f64, b: f64, cfg: &QuadConfig) -> Result<(Complex64, f64)> {
    let mut stack = vec![(a, b, cfg.tolerance)];
    let mut total = Complex64::zero();
    let mut err = 0.0;
    let mut panels = 0usize;
    while let Some((lo, hi, tol)) = stack.pop() {
        panels += 1;
        if panels > cfg.max_panels {
            return Err(Error::QuadratureBudgetExceeded(cfg.max_panels));
        }
        let (v, e) = gk15(&mut f, lo, hi);
        if e <= tol || hi - lo < 1e-12 * (b - a) {
            total += v;
            err += e;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, tol / 2.0));
            stack.push((mid, hi, tol / 2.0));
        }
    }
    Ok((total, err))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MellinReport {
    /// `(1/Gamma(s)) int_0^inf t^{s-1} F(-t) dt`
    pub transform: Complex64,
    pub zeta: Complex64,
    pub residual: f64,
    /// Bound for everything the quadrature does not see (cut-off lattice
    /// points and the integral beyond `T`), after dividing by `|Gamma(s)|`.
    pub tail_bound: f64,
}

/// Compares the Mellin transform of the generating function with the
/// lattice q-zeta value.
pub fn mellin_check(s: Complex64, spec: &BarnesSpec, q: &ComplexQ, quad: &QuadConfig) -> Result<MellinReport> {
    if s.re <= 0.0 {
        return Err(Error::InvalidSpec("the Mellin integral needs Re(s) > 0".into()));
    }
    if spec.x.re <= 0.0 {
        return Err(Error::InvalidSpec("the Mellin integral needs Re(x) > 0".into()));
    }
    let tol = quad.tolerance;
    // every bracket has real part at least beta
    let beta = crate::qcore::q_bracket(spec.x.into(), q, crate::qcore::BracketSign::Plus).re;
    if !(beta > 0.0) || !q.is_real_mode() {
        return Err(Error::InvalidSpec("the Mellin check needs real q in (0, 1)".into()));
    }
    let sigma = s.re;
    let gamma = complex_gamma(s)?;
    // lattice truncation: the dropped weight mass times int t^{sigma-1} e^{-beta t}
    let lattice_tail =
        |mass: f64| mass * complex_gamma(Complex64::new(sigma, 0.0)).map_or(f64::INFINITY, |g| g.re) / beta.powf(sigma);
    let mut level = 16;
    let (terms, mass) = loop {
        let (terms, mass) = direct_terms(spec, q, level)?;
        if lattice_tail(mass) < tol / 10.0 || level > 4096 {
            break (terms, mass);
        }
        level *= 2;
    };
    let weight: f64 = terms.iter().map(|(w, _)| w.norm()).sum();
    // int_T^inf t^{sigma-1} e^{-beta t} <= T^{sigma-1} e^{-beta T} / (beta - (sigma-1)/T)
    let cut_tail = |t: f64| {
        let rate = beta - (sigma - 1.0).max(0.0) / t;
        if rate <= 0.0 {
            return f64::INFINITY;
        }
        weight * t.powf(sigma - 1.0) * (-beta * t).exp() / rate
    };
    let mut cut = (10.0 / tol).ln() / beta;
    while cut_tail(cut) > tol / 10.0 {
        cut *= 1.25;
    }
    let integrand = |t: f64| {
        if t == 0.0 {
            return Complex64::zero();
        }
        let mut f = Complex64::zero();
        for (w, b) in &terms {
            f += w * (-b * t).exp();
        }
        f * Complex64::new(t, 0.0).powc(s - 1.0)
    };
    let (integral, _) = integrate(integrand, 0.0, cut, &QuadConfig { tolerance: tol / 10.0, ..*quad })?;
    let transform = integral / gamma;
    let zeta = q_zeta(s, spec, q, &SumConfig::default())?.value;
    Ok(MellinReport {
        transform,
        zeta,
        residual: (transform - zeta).norm(),
        tail_bound: (lattice_tail(mass) + cut_tail(cut)) / gamma.norm(),
    })
}

/// One spec/q/n cell of the interpolation sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationCell {
    pub spec: BarnesSpec,
    pub q: f64,
    pub n: u32,
    pub zeta: Option<Complex64>,
    pub closed: Option<Complex64>,
    pub method: Option<Method>,
    pub deviation: Option<f64>,
    /// Name of the error that stopped this cell, if any.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InterpolationReport {
    pub cells: Vec<InterpolationCell>,
    pub max_direct: f64,
    pub max_abel: f64,
    pub failures: usize,
}

/// Evaluates `q_zeta(-n)` and the closed form for every spec, q value and
/// `n <= n_max`; a failing cell is recorded and the sweep continues.
pub fn interpolation_suite(n_max: u32, specs: &[BarnesSpec], qs: &[f64], cfg: &SumConfig) -> InterpolationReport {
    let jobs: Vec<_> = specs.iter().flat_map(|sp| qs.iter().map(move |&qv| (sp, qv))).collect();
    let cells: Vec<InterpolationCell> =
        jobs.par_iter().flat_map_iter(|&(spec, qv)| interpolation_cells(n_max, spec, qv, cfg)).collect();
    let mut report = InterpolationReport::default();
    for c in &cells {
        match (c.deviation, c.method) {
            (Some(d), Some(Method::Direct)) => report.max_direct = report.max_direct.max(d),
            (Some(d), Some(_)) => report.max_abel = report.max_abel.max(d),
            _ => report.failures += 1,
        }
    }
    report.cells = cells;
    report
}

fn interpolation_cells(n_max: u32, spec: &BarnesSpec, qv: f64, cfg: &SumConfig) -> Vec<InterpolationCell> {
    let ns: Vec<u32> = (0..=n_max).collect();
    let ss: Vec<_> = ns.iter().map(|&n| Complex64::new(-(n as f64), 0.0)).collect();
    let blank = |n: u32, err: &Error| InterpolationCell {
        spec: spec.clone(),
        q: qv,
        n,
        zeta: None,
        closed: None,
        method: None,
        deviation: None,
        error: Some(err.name().to_string()),
    };
    let q = match ComplexQ::real(qv) {
        Ok(q) => q,
        Err(e) => return ns.iter().map(|&n| blank(n, &e)).collect(),
    };
    let zetas = match q_zeta_many(&ss, spec, &q, cfg) {
        Ok(z) => z,
        Err(e) => return ns.iter().map(|&n| blank(n, &e)).collect(),
    };
    ns.iter()
        .zip(zetas)
        .map(|(&n, z)| {
            let closed = q_euler_closed_extended(n, spec, &q).or_else(|_| q_euler_closed(n, spec, &q));
            match closed {
                Ok(c) => InterpolationCell {
                    spec: spec.clone(),
                    q: qv,
                    n,
                    zeta: Some(z.value),
                    closed: Some(c),
                    method: Some(z.method),
                    deviation: Some(relative_deviation(z.value, c)),
                    error: None,
                },
                Err(e) => blank(n, &e),
            }
        })
        .collect()
}

/// `a_j` as rationals for the Bernoulli route, from small integers.
pub fn rational_params(v: &[i64]) -> Vec<BigRational> {
    v.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect()
}
