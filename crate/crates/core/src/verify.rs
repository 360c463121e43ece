//! Executable identity checks, grouped into the suites run by `verify`.
//!
//! Every check compares two independent evaluation paths and names the
//! identity it exercises.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::chars::{characters_mod, DirichletChar};
use crate::padic::{fermionic_integral, functional_equation_residual, IntegralConfig, IntegrandSpec, Measure, PadicQ};
use crate::powerseries::euler_multi_classical;
use crate::qcore::{binomial, q_binomial, q_pochhammer, rational, reciprocal_pochhammer_series, ComplexQ};
use crate::qeuler::{
    distribution_extended, distribution_twisted, generalized_recurrence_check, q_euler_closed_exact,
    q_euler_closed_padic, q_euler_closed_precise, q_euler_integral, q_euler_series_many, relative_deviation,
    BarnesSpec, Method, SumConfig,
};
use crate::tolerances as tol;
use crate::zeta::{barnes_zeta_classical, barnes_zeta_negative, interpolation_suite, mellin_check, QuadConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    /// The identity and the parameters it was checked at.
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self { name: name.into(), residual, tolerance, passed: residual <= tolerance, detail: String::new() }
    }

    fn failed(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self { name: name.into(), residual: f64::INFINITY, tolerance: 0.0, passed: false, detail: detail.into() }
    }

    fn exact(name: impl Into<String>, equal: bool) -> Self {
        Self::new(name, if equal { 0.0 } else { 1.0 }, 0.0)
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Distribution,
    Interpolation,
    Mellin,
    PadicConsistency,
}

impl Suite {
    pub const ALL: [Suite; 5] =
        [Suite::Identities, Suite::Distribution, Suite::Interpolation, Suite::Mellin, Suite::PadicConsistency];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Distribution => "distribution",
            Suite::Interpolation => "interpolation",
            Suite::Mellin => "mellin",
            Suite::PadicConsistency => "padic-consistency",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL.iter().copied().find(|x| x.as_str() == s).ok_or_else(|| format!("unknown suite '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub n_max: u32,
    pub cfg: SumConfig,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { n_max: 6, cfg: SumConfig::default() }
    }
}

pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> SuiteReport {
    let checks = match suite {
        Suite::Identities => {
            let mut v = qcore_checks();
            v.extend(series_checks(opts.n_max, &opts.cfg));
            v.extend(recurrence_checks());
            v.extend(classical_zeta_checks());
            v.extend(q_to_one_checks());
            v
        }
        Suite::Distribution => distribution_checks(),
        Suite::Interpolation => interpolation_checks(opts.n_max, &opts.cfg),
        Suite::Mellin => mellin_checks(),
        Suite::PadicConsistency => {
            let mut v = padic_integral_checks();
            v.extend(functional_equation_checks());
            v
        }
    };
    SuiteReport { suite, checks }
}

/// Short label for a parameter set, e.g. `x=1 w=(1,2) a=(1,0) chi=5:2`.
pub fn describe(spec: &BarnesSpec) -> String {
    let join = |v: Vec<String>| v.join(",");
    let x = if spec.x.im == 0.0 { format!("{}", spec.x.re) } else { format!("{}", spec.x) };
    let mut s = format!(
        "x={} w=({}) a=({})",
        x,
        join(spec.w.iter().map(|v| v.to_string()).collect()),
        join(spec.a.iter().map(|v| v.to_string()).collect())
    );
    if let Some(c) = &spec.chi {
        s.push_str(&format!(" chi={}:{}", c.modulus(), c.index()));
    }
    s
}

fn quadratic(f: u64) -> DirichletChar {
    characters_mod(f).unwrap().into_iter().find(|c| c.order() == 2).expect("quadratic character")
}

fn quartic5() -> DirichletChar {
    characters_mod(5).unwrap().into_iter().find(|c| c.order() == 4).expect("quartic character mod 5")
}

// ---------------------------------------------------------------------------

/// Parameter grid for closed form against lattice series.
pub fn series_grid() -> Vec<(BarnesSpec, f64)> {
    let chis = [None, Some(quadratic(3)), Some(quartic5())];
    let mut out = Vec::new();
    for r in 1..=3usize {
        let ri = r as i64;
        let mut weights = vec![(1..=r).map(|j| j as f64).collect::<Vec<_>>()];
        if r > 1 {
            weights.push(vec![1.0; r]);
        }
        let mut twists = vec![vec![0; r], vec![1; r]];
        // h - j for h = r + 1 and h = r; h = 0 makes the terms grow and is
        // replaced by r + 1
        for h in [ri + 1, ri] {
            let a: Vec<i64> = (1..=ri).map(|j| h - j).collect();
            if !twists.contains(&a) {
                twists.push(a);
            }
        }
        for w in &weights {
            for a in &twists {
                for x in [0.25, 1.0, 2.0] {
                    for chi in &chis {
                        let mut spec = BarnesSpec::new(x, w.clone(), a.clone()).unwrap();
                        if let Some(c) = chi {
                            spec = spec.with_chi(c.clone());
                        }
                        for q in [0.3, 0.5, 0.9] {
                            out.push((spec.clone(), q));
                        }
                    }
                }
            }
        }
    }
    out
}

/// One check per grid cell and degree.
pub fn series_checks(n_max: u32, cfg: &SumConfig) -> Vec<Check> {
    let ns: Vec<u32> = (0..=n_max).collect();
    series_grid()
        .par_iter()
        .flat_map_iter(|(spec, qv)| {
            let label = format!("closed form = lattice series, {} q={}", describe(spec), qv);
            let q = ComplexQ::real(*qv).unwrap();
            match q_euler_series_many(&ns, spec, &q, cfg) {
                Err(e) => vec![Check::failed(label, e.to_string())],
                Ok(vals) => ns
                    .iter()
                    .zip(vals)
                    .map(|(&n, v)| {
                        let limit = if v.method == Method::Direct { tol::SERIES_DIRECT } else { tol::SERIES_ABEL };
                        match q_euler_closed_precise(n, spec, &q) {
                            Ok(c) => Check::new(format!("{label} n={n}"), relative_deviation(c, v.value), limit)
                                .with_detail(v.method.as_str()),
                            Err(e) => Check::failed(format!("{label} n={n}"), e.to_string()),
                        }
                    })
                    .collect(),
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------

pub fn interpolation_grid() -> (Vec<BarnesSpec>, Vec<f64>) {
    let mut specs = Vec::new();
    for r in 1..=3usize {
        for x in [0.5, 1.0, 2.0] {
            specs.push(BarnesSpec::new(x, (1..=r).map(|j| j as f64).collect(), vec![1; r]).unwrap());
            specs.push(BarnesSpec::new(x, vec![1.0; r], vec![1; r]).unwrap());
        }
    }
    // q-l function cells
    for chi in [quadratic(3), quadratic(5), quartic5()] {
        for x in [0.5, 1.0] {
            specs.push(BarnesSpec::new(x, vec![1.0], vec![1]).unwrap().with_chi(chi.clone()));
            specs.push(BarnesSpec::new(x, vec![1.0, 2.0], vec![1, 1]).unwrap().with_chi(chi.clone()));
        }
    }
    // Abel-regularized cells
    for x in [0.5, 1.0, 2.0] {
        specs.push(BarnesSpec::q_euler(x));
        specs.push(BarnesSpec::q_euler(x).with_chi(quadratic(3)));
    }
    (specs, vec![0.3, 0.5, 0.9])
}

pub fn interpolation_checks(n_max: u32, cfg: &SumConfig) -> Vec<Check> {
    let (specs, qs) = interpolation_grid();
    let report = interpolation_suite(n_max, &specs, &qs, cfg);
    report
        .cells
        .iter()
        .map(|c| {
            let label = format!("q-zeta at -n = q-Euler closed form, {} q={} n={}", describe(&c.spec), c.q, c.n);
            match (c.deviation, c.method) {
                (Some(d), Some(m)) => {
                    let limit = if m == Method::Direct { tol::INTERPOLATION_DIRECT } else { tol::INTERPOLATION_ABEL };
                    Check::new(label, d, limit).with_detail(m.as_str())
                }
                _ => Check::failed(label, c.error.clone().unwrap_or_default()),
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------

pub fn distribution_checks() -> Vec<Check> {
    let mut jobs: Vec<Box<dyn Fn() -> Check + Send + Sync>> = Vec::new();
    for f in [3u64, 5] {
        for chi in characters_mod(f).unwrap() {
            for n in 0..=6u32 {
                for x in [0.5, 1.0, 2.0] {
                    for qv in [0.3, 0.5, 0.9] {
                        let chi = chi.clone();
                        jobs.push(Box::new(move || {
                            let label =
                                format!("twisted distribution relation, chi={}:{} x={x} q={qv} n={n}", f, chi.index());
                            let q = ComplexQ::real(qv).unwrap();
                            match distribution_twisted(n, &chi, Complex64::new(x, 0.0), &q) {
                                Ok(d) => Check::new(label, d, tol::DISTRIBUTION),
                                Err(e) => Check::failed(label, e.to_string()),
                            }
                        }));
                    }
                }
            }
        }
        for r in 1..=2usize {
            for h in 0..=3i64 {
                for n in 0..=6u32 {
                    for x in [0.5, 2.0] {
                        for qv in [0.3, 0.9] {
                            jobs.push(Box::new(move || {
                                let label =
                                    format!("(h,r) distribution relation, f={f} h={h} r={r} x={x} q={qv} n={n}");
                                let q = ComplexQ::real(qv).unwrap();
                                match distribution_extended(n, h, r, f, Complex64::new(x, 0.0), &q) {
                                    Ok(d) => Check::new(label, d, tol::DISTRIBUTION),
                                    Err(e) => Check::failed(label, e.to_string()),
                                }
                            }));
                        }
                    }
                }
            }
        }
    }
    jobs.par_iter().map(|j| j()).collect()
}

pub fn recurrence_checks() -> Vec<Check> {
    let mut out = Vec::new();
    for f in [3u64, 5] {
        for chi in characters_mod(f).unwrap() {
            for m in 0..=4u32 {
                for n in 1..=3u32 {
                    for qv in [0.3, 0.5, 0.9] {
                        let label = format!("character recurrence, chi={}:{} m={m} n={n} q={qv}", f, chi.index());
                        let q = ComplexQ::real(qv).unwrap();
                        out.push(match generalized_recurrence_check(m, n, &chi, &q) {
                            Ok(r) => Check::new(label, r, tol::CHARACTER_RECURRENCE),
                            Err(e) => Check::failed(label, e.to_string()),
                        });
                    }
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------

/// Bernoulli polynomial `B_n(x)` from the numbers
/// `sum_{k<=m} C(m+1, k) B_k = 0`, independent of the generating-function
/// code in `powerseries`.
fn bernoulli_poly(n: usize, x: &BigRational) -> BigRational {
    let mut b: Vec<BigRational> = vec![rational(1, 1)];
    let binom = |n: usize, k: usize| -> BigRational {
        let mut acc = BigInt::from(1);
        for i in 0..k {
            acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
        }
        BigRational::from_integer(acc)
    };
    for m in 1..=n {
        let mut acc = BigRational::zero();
        for (k, bk) in b.iter().enumerate() {
            acc += binom(m + 1, k) * bk;
        }
        b.push(-acc / BigRational::from_integer(BigInt::from(m + 1)));
    }
    let mut out = BigRational::zero();
    let mut xp = rational(1, 1);
    for k in (0..=n).rev() {
        out += binom(n, k) * &b[k] * &xp;
        xp *= x;
    }
    out
}

pub fn classical_zeta_checks() -> Vec<Check> {
    let mut out = Vec::new();
    let s2 = Complex64::new(2.0, 0.0);
    out.push(match barnes_zeta_classical(s2, 1.0, &[1.0]) {
        Ok(z) => Check::new(
            "classical Barnes zeta_1(2, 1 | 1) = pi^2/6",
            (z.value.re - std::f64::consts::PI.powi(2) / 6.0).abs() + z.value.im.abs(),
            tol::CLASSICAL_ZETA,
        ),
        Err(e) => Check::failed("classical Barnes zeta_1(2, 1 | 1) = pi^2/6", e.to_string()),
    });
    out.push(match barnes_zeta_classical(s2, 3.0, &[]) {
        Ok(z) => Check::new("classical Barnes zeta_0(2, 3) = 1/9", (z.value - 1.0 / 9.0).norm(), 1e-15),
        Err(e) => Check::failed("classical Barnes zeta_0(2, 3) = 1/9", e.to_string()),
    });
    let s = Complex64::new(3.5, 0.0);
    for (w, a) in [(1.0, vec![1.0, 2.0]), (0.5, vec![1.0, 3.0]), (2.0, vec![1.5, 0.5])] {
        let label = format!("classical Barnes recurrence at s=3.5, w={w} a={a:?}");
        let res = (|| -> crate::Result<f64> {
            let hi = barnes_zeta_classical(s, w + a[1], &a)?.value;
            let lo = barnes_zeta_classical(s, w, &a)?.value;
            let one = barnes_zeta_classical(s, w, &a[..1])?.value;
            Ok((hi - lo + one).norm())
        })();
        out.push(match res {
            Ok(r) => Check::new(label, r, tol::CLASSICAL_ZETA),
            Err(e) => Check::failed(label, e.to_string()),
        });
    }
    // exact recurrence at negative integers
    for (w, a) in [((1, 1), vec![(1, 1), (2, 1)]), ((1, 2), vec![(1, 1), (3, 2)]), ((2, 1), vec![(2, 1), (1, 3)])] {
        let w = rational(w.0, w.1);
        let a: Vec<_> = a.iter().map(|&(n, d)| rational(n, d)).collect();
        for m in 1..=4u32 {
            let label = format!("classical Barnes recurrence at s=-{m}, w={w} a=({},{})", a[0], a[1]);
            let res = (|| -> crate::Result<bool> {
                let hi = barnes_zeta_negative(m, &(&w + &a[1]), &a)?;
                let lo = barnes_zeta_negative(m, &w, &a)?;
                let one = barnes_zeta_negative(m, &w, &a[..1])?;
                Ok((hi - lo + one).is_zero())
            })();
            out.push(match res {
                Ok(eq) => Check::exact(label, eq),
                Err(e) => Check::failed(label, e.to_string()),
            });
        }
    }
    // one axis: a^m times the Hurwitz value -B_{m+1}(w/a)/(m+1)
    for (w, a) in
        [((1, 1), (1, 1)), ((1, 2), (1, 1)), ((3, 4), (1, 1)), ((2, 1), (1, 1)), ((1, 1), (2, 1)), ((1, 3), (1, 2))]
    {
        let w = rational(w.0, w.1);
        let a = rational(a.0, a.1);
        for m in 0..=6u32 {
            let label = format!("zeta_1(-{m}, {w} | {a}) = -a^m B_(m+1)(w/a)/(m+1)");
            let expect = -crate::qcore::pow_int(&a, m as i64).unwrap() * bernoulli_poly(m as usize + 1, &(&w / &a))
                / BigRational::from_integer(BigInt::from(m + 1));
            out.push(match barnes_zeta_negative(m, &w, std::slice::from_ref(&a)) {
                Ok(v) => Check::exact(label, v == expect),
                Err(e) => Check::failed(label, e.to_string()),
            });
        }
    }
    out
}

// ---------------------------------------------------------------------------

pub fn mellin_specs() -> Vec<BarnesSpec> {
    vec![
        BarnesSpec::new(1.0, vec![1.0], vec![1]).unwrap(),
        BarnesSpec::new(1.0, vec![1.0, 2.0], vec![1, 1]).unwrap(),
        BarnesSpec::new(1.0, vec![1.0], vec![1]).unwrap().with_chi(quadratic(3)),
    ]
}

pub fn mellin_checks() -> Vec<Check> {
    let q = ComplexQ::real(0.5).unwrap();
    let jobs: Vec<_> =
        mellin_specs().into_iter().flat_map(|sp| [2.0, 3.0, 3.5].into_iter().map(move |s| (sp.clone(), s))).collect();
    let mut out: Vec<Check> = jobs
        .par_iter()
        .map(|(spec, s)| {
            let label = format!("Mellin transform of the generating function = q-zeta, {} q=0.5 s={s}", describe(spec));
            match mellin_check(Complex64::new(*s, 0.0), spec, &q, &QuadConfig::default()) {
                Ok(r) => Check::new(label, r.residual, tol::MELLIN)
                    .with_detail(format!("transform={} zeta={} tail<={:.1e}", r.transform.re, r.zeta.re, r.tail_bound)),
                Err(e) => Check::failed(label, e.to_string()),
            }
        })
        .collect();
    // a single exponential: int t e^{-t} dt = Gamma(2)
    let (v, _) = crate::zeta::integrate(|t| Complex64::new(t * (-t).exp(), 0.0), 0.0, 60.0, &QuadConfig::default())
        .unwrap_or((Complex64::new(f64::NAN, 0.0), 0.0));
    out.push(Check::new("Gamma integral int_0^inf t e^(-t) dt = 1", (v - 1.0).norm(), 1e-10));
    out
}

// ---------------------------------------------------------------------------

const PADIC_P: u64 = 3;
const PADIC_Q: i64 = 4;
const PADIC_K: u32 = 10;

/// The integrand families: single variable, higher order, `(h,r)`,
/// weighted, weighted with twists, and character-twisted.
pub fn padic_specs() -> Vec<(&'static str, BarnesSpec)> {
    let mut out = Vec::new();
    for x in [0.0, 1.0, 2.0] {
        out.push(("higher-order q-Euler", BarnesSpec::higher_order(2, x).unwrap()));
        for h in 0..=3 {
            for r in 1..=2 {
                out.push(("(h,r) q-Euler", BarnesSpec::extended(h, r, x).unwrap()));
            }
        }
        for w in [vec![2.0], vec![1.0, 2.0], vec![3.0, 1.0]] {
            out.push(("Barnes q-Euler", BarnesSpec::barnes(x, w).unwrap()));
        }
        for (w, a) in [(vec![1.0, 2.0], vec![1, 3]), (vec![2.0, 1.0], vec![2, -1]), (vec![3.0], vec![2])] {
            out.push(("Barnes q-Euler with twists", BarnesSpec::new(x, w, a).unwrap()));
        }
        out.push(("generalized q-Euler", BarnesSpec::q_euler(x).with_chi(quadratic(5))));
        out.push(("generalized q-Euler", BarnesSpec::q_euler(x).with_chi(quadratic(7))));
    }
    out
}

pub fn padic_integral_checks() -> Vec<Check> {
    let q = PadicQ::from_i64(PADIC_P, PADIC_K + 4, PADIC_Q).unwrap();
    let cfg = IntegralConfig::with_precision(PADIC_K);
    let mut jobs: Vec<(String, Option<BarnesSpec>, i64, u32)> = Vec::new();
    for x in [0i64, 1, 2] {
        for n in 0..=4 {
            jobs.push((format!("fermionic integral = closed form, q-Euler x={x} n={n}"), None, x, n));
        }
    }
    for (family, spec) in padic_specs() {
        for n in 0..=4 {
            jobs.push((
                format!("fermionic integral = closed form, {family} {} n={n}", describe(&spec)),
                Some(spec.clone()),
                0,
                n,
            ));
        }
    }
    jobs.par_iter()
        .map(|(label, spec, x, n)| {
            let res = (|| -> crate::Result<bool> {
                let (integral, closed) = match spec {
                    None => {
                        let f = IntegrandSpec::q_bracket(q.clone(), *x, *n);
                        let v = fermionic_integral(&f, &Measure::One, PADIC_P, &cfg)?.value;
                        (v, q_euler_closed_padic(*n, &BarnesSpec::q_euler(*x as f64), &q, PADIC_K)?)
                    }
                    Some(spec) => {
                        let v = q_euler_integral(*n, spec, &q, &cfg)?.value;
                        (v, q_euler_closed_padic(*n, spec, &q, PADIC_K)?)
                    }
                };
                Ok(integral == closed)
            })();
            match res {
                Ok(eq) => Check::exact(format!("{label} (mod 3^10)"), eq),
                Err(e) => Check::failed(label.clone(), e.to_string()),
            }
        })
        .collect()
}

pub fn functional_equation_checks() -> Vec<Check> {
    let polys: [&[i64]; 5] = [&[1], &[0, 1], &[1, -2, 3], &[0, 0, 0, 1], &[2, 0, -1, 0, 5]];
    let mut out = Vec::new();
    for p in [3u64, 5] {
        let cfg = IntegralConfig::with_precision(PADIC_K);
        for poly in polys {
            for n in 1..=4u32 {
                let label = format!("fermionic functional equation, p={p} f={poly:?} n={n}");
                let f = IntegrandSpec::polynomial(poly.to_vec());
                out.push(match functional_equation_residual(&f, n, p, &cfg) {
                    Ok(r) => Check::exact(label, r.is_zero()),
                    Err(e) => Check::failed(label, e.to_string()),
                });
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------

/// q-Euler values (exact rationals, `a = 0`) at `q = 1 - eps` against the
/// classical multiple Euler polynomials, for `eps = 1e-3` and `1e-4`.
pub fn q_to_one_checks() -> Vec<Check> {
    let eps = [rational(1, 1000), rational(1, 10000)];
    let mut jobs = Vec::new();
    for x in [0i64, 1, 2] {
        for w in [vec![1i64], vec![2], vec![1, 1], vec![1, 2]] {
            for n in 0..=6u32 {
                jobs.push((x, w.clone(), n));
            }
        }
    }
    jobs.par_iter()
        .map(|(x, w, n)| {
            let label = format!("q -> 1 limit of the Barnes q-Euler polynomial, x={x} w={w:?} n={n}");
            let res = (|| -> crate::Result<(f64, f64)> {
                let spec = BarnesSpec::barnes(*x as f64, w.iter().map(|&v| v as f64).collect())?;
                let wr: Vec<_> = w.iter().map(|&v| rational(v, 1)).collect();
                let classical = euler_multi_classical(*n as usize, &rational(*x, 1), &wr)?;
                let errs: Vec<f64> = eps
                    .iter()
                    .map(|e| {
                        let v = q_euler_closed_exact(*n, &spec, &(rational(1, 1) - e))?;
                        Ok((v - &classical).abs().to_f64().unwrap_or(f64::INFINITY))
                    })
                    .collect::<crate::Result<_>>()?;
                Ok((errs[0], errs[1]))
            })();
            match res {
                Err(e) => Check::failed(label, e.to_string()),
                // identically equal for every q
                Ok((e1, e2)) if e1 == 0.0 && e2 == 0.0 => {
                    Check::new(label, 0.0, tol::Q_TO_ONE_ORDER).with_detail("exact")
                }
                Ok((e1, e2)) => {
                    // observed order of convergence in 1 - q; 2 when the
                    // linear term happens to vanish
                    let order = (e1 / e2).log10();
                    let dist = (order - order.round().clamp(1.0, 2.0)).abs();
                    Check::new(label, dist, tol::Q_TO_ONE_ORDER)
                        .with_detail(format!("err(1e-3)={e1:.3e} err(1e-4)={e2:.3e} ratio={:.3}", e1 / e2))
                }
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------

/// q-binomial formula, its reciprocal, and exact symmetry of the Gaussian
/// binomials.
pub fn qcore_checks() -> Vec<Check> {
    let mut out = Vec::new();
    for qv in [0.5, 0.9] {
        let q = ComplexQ::real(qv).unwrap();
        for b in [Complex64::new(1.0 / 3.0, 0.0), Complex64::new(0.5, 0.25)] {
            for n in 0..=8u32 {
                let lhs = q_pochhammer(b, &q, n);
                let mut rhs = Complex64::zero();
                for i in 0..=n as i64 {
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    rhs += q_binomial(n as i64, i, &q) * qv.powi((i * (i - 1) / 2) as i32) * b.powi(i as i32) * sign;
                }
                out.push(Check::new(
                    format!("q-binomial formula, b={b} q={qv} n={n}"),
                    relative_deviation(lhs, rhs),
                    tol::Q_BINOMIAL,
                ));
            }
        }
        for b in
            [Complex64::new(0.5, 0.0), Complex64::new(-0.5, 0.0), Complex64::new(0.3, 0.4), Complex64::new(0.25, 0.0)]
        {
            for n in 1..=5u32 {
                let (sum, tail) = reciprocal_pochhammer_series(b, &q, n, 400);
                let exact = q_pochhammer(b, &q, n).inv();
                out.push(
                    Check::new(
                        format!("reciprocal q-binomial formula, b={b} q={qv} n={n}"),
                        relative_deviation(exact, sum),
                        tol::Q_BINOMIAL,
                    )
                    .with_detail(format!("tail<={tail:.1e}")),
                );
            }
        }
    }
    for q in [rational(1, 2), rational(2, 3), rational(3, 1), rational(-5, 7)] {
        for n in 0..=10i64 {
            for k in 0..=n {
                let eq = binomial(n, k, &q) == binomial(n, n - k, &q);
                out.push(Check::exact(format!("q-binomial symmetry (exact), q={q} n={n} k={k}"), eq));
            }
        }
    }
    out
}
