//! Evaluation of one family at one parameter point.

use barnesq_core::chars::DirichletChar;
use barnesq_core::padic::{IntegralConfig, PadicNum, PadicQ};
use barnesq_core::powerseries::barnes_bernoulli;
use barnesq_core::qcore::ComplexQ;
use barnesq_core::qeuler::{
    q_euler_closed_exact, q_euler_closed_padic, q_euler_closed_precise, q_euler_integral, q_euler_series, BarnesSpec,
    Method, SumConfig,
};
use barnesq_core::zeta::{barnes_zeta_classical, barnes_zeta_negative, mellin_check, q_zeta, MellinReport, QuadConfig};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::parse;
use crate::{Backend, Family, FamilyArgs, MethodArg, UsageError};

pub const DEFAULT_PADIC_PRECISION: u32 = 10;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Complex(Complex64),
    Rational(BigRational),
    Padic { p: u64, k: u32, digits: Vec<u64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: Value,
    pub method: &'static str,
    pub error: Option<f64>,
    pub certified: bool,
    pub terms_used: Option<u64>,
}

impl Evaluation {
    fn exact(value: Value, method: Method) -> Self {
        Self { value, method: method.as_str(), error: Some(0.0), certified: true, terms_used: None }
    }
}

/// Everything needed for evaluation, validated before any computation.
#[derive(Debug, Clone)]
pub struct Job {
    pub family: Family,
    pub backend: Backend,
    pub method: MethodArg,
    spec: Option<BarnesSpec>,
    q: Option<QInput>,
    /// Rational shift and parameters for the classical families.
    classical: Option<(String, Vec<String>)>,
    pub cfg: SumConfig,
    pub integral_cfg: IntegralConfig,
}

#[derive(Debug, Clone)]
enum QInput {
    Complex(ComplexQ),
    Rational(BigRational),
    Padic(PadicQ, u32),
}

fn need<'a>(v: &'a Option<String>, flag: &str, family: Family) -> Result<&'a str, UsageError> {
    v.as_deref().ok_or_else(|| UsageError(format!("--{flag} is required for family {}", family.name())))
}

fn character(args: &FamilyArgs) -> Result<Option<DirichletChar>, UsageError> {
    match (&args.chi, &args.chi_values) {
        (Some(_), Some(_)) => Err(UsageError("--chi and --chi-values are mutually exclusive".into())),
        (Some(c), None) => parse::chi_index(c).map(Some),
        (None, Some(v)) => parse::chi_values(v).map(Some),
        (None, None) => Ok(None),
    }
}

fn reject(family: Family, flags: &[(&str, bool)]) -> Result<(), UsageError> {
    match flags.iter().find(|(_, present)| *present) {
        Some((flag, _)) => Err(UsageError(format!("--{flag} does not apply to family {}", family.name()))),
        None => Ok(()),
    }
}

impl Job {
    pub fn new(args: &FamilyArgs, cfg: SumConfig, integral_cfg: IntegralConfig) -> Result<Self, UsageError> {
        let family = args.family;
        let chi = character(args)?;
        let method = args.method.unwrap_or(match args.backend {
            Backend::Padic => MethodArg::Closed,
            _ if family.is_zeta() && family.is_q() => MethodArg::Series,
            _ => MethodArg::Closed,
        });
        let mut job =
            Job { family, backend: args.backend, method, spec: None, q: None, classical: None, cfg, integral_cfg };
        let x = || -> Result<Complex64, UsageError> { parse::complex(args.x.as_deref().unwrap_or("0")) };
        let with_chi = |s: BarnesSpec| match &chi {
            Some(c) => s.with_chi(c.clone()),
            None => s,
        };
        let core = |e: barnesq_core::Error| UsageError(e.to_string());
        match family {
            Family::QEuler => {
                reject(family, &[("w", args.w.is_some()), ("a", args.a.is_some()), ("s", args.s.is_some())])?;
                job.spec = Some(with_chi(BarnesSpec::q_euler(x()?)));
            }
            Family::QEulerHr => {
                reject(family, &[("w", args.w.is_some()), ("a", args.a.is_some()), ("s", args.s.is_some())])?;
                let h = args.h.ok_or_else(|| UsageError("--h is required for family q-euler-hr".into()))?;
                let r = args.r.ok_or_else(|| UsageError("--r is required for family q-euler-hr".into()))?;
                job.spec = Some(with_chi(BarnesSpec::extended(h, r, x()?).map_err(core)?));
            }
            Family::BarnesQEuler | Family::QZeta | Family::QL => {
                if family == Family::BarnesQEuler {
                    reject(family, &[("s", args.s.is_some())])?;
                }
                if family == Family::QL && chi.is_none() {
                    return Err(UsageError("family q-l needs --chi or --chi-values".into()));
                }
                let w = match &args.w {
                    Some(w) => parse::list(w, parse::real)?,
                    None if family == Family::BarnesQEuler => {
                        return Err(UsageError("--w is required for family barnes-q-euler".into()))
                    }
                    None => vec![1.0],
                };
                let a = match &args.a {
                    Some(a) => parse::list(a, parse::integer)?,
                    None => vec![0; w.len()],
                };
                job.spec = Some(with_chi(BarnesSpec::new(x()?, w, a).map_err(core)?));
            }
            Family::BarnesClassical => {
                reject(family, &[("x", args.x.is_some()), ("q", args.q.is_some()), ("chi", chi.is_some())])?;
                need(&args.s, "s", family)?;
                let w = need(&args.w, "w", family)?.to_string();
                let a =
                    args.a.as_deref().map(|a| a.split(',').map(|v| v.trim().to_string()).collect()).unwrap_or_default();
                job.classical = Some((w, a));
            }
            Family::BernoulliMulti => {
                reject(family, &[("q", args.q.is_some()), ("chi", chi.is_some()), ("s", args.s.is_some())])?;
                let x = args.x.clone().unwrap_or_else(|| "0".into());
                let a = need(&args.a, "a", family)?.split(',').map(|v| v.trim().to_string()).collect();
                job.classical = Some((x, a));
            }
        }
        if family.is_q() {
            let q = need(&args.q, "q", family)?;
            job.q = Some(match args.backend {
                Backend::Complex => QInput::Complex(ComplexQ::new(parse::complex(q)?).map_err(core)?),
                Backend::Rational => QInput::Rational(parse::rational(q)?),
                Backend::Padic => {
                    let p = args.p.ok_or_else(|| UsageError("--p is required for the padic backend".into()))?;
                    let k = args.precision.unwrap_or(DEFAULT_PADIC_PRECISION);
                    let qv = PadicNum::from_rational(&parse::rational(q)?, p, k + 4).map_err(core)?;
                    job.integral_cfg.precision = k;
                    QInput::Padic(PadicQ::new(qv).map_err(core)?, k)
                }
            });
        } else if args.backend == Backend::Padic {
            return Err(UsageError(format!("family {} has no p-adic backend", family.name())));
        }
        if family.is_zeta() && family != Family::BarnesClassical && args.backend != Backend::Complex {
            return Err(UsageError(format!("family {} is evaluated in the complex backend only", family.name())));
        }
        match (method, args.backend) {
            (MethodArg::Integral, Backend::Padic) | (MethodArg::Closed, _) => {}
            (MethodArg::Series, Backend::Complex) if family.is_q() => {}
            (MethodArg::Integral, _) => return Err(UsageError("--method integral needs the padic backend".into())),
            (MethodArg::Series, _) => {
                return Err(UsageError("--method series needs the complex backend and a q-family".into()))
            }
        }
        if family.is_zeta() && family != Family::BarnesClassical && method == MethodArg::Closed {
            return Err(UsageError("q-zeta families are evaluated by series; drop --method closed".into()));
        }
        Ok(job)
    }

    /// `n` for the polynomial families, `s` for the zeta families.
    pub fn eval(&self, point: Point) -> barnesq_core::Result<Evaluation> {
        match (self.family, point) {
            (Family::BarnesClassical, Point::S(s)) => self.classical_zeta(s),
            (Family::BernoulliMulti, Point::N(n)) => {
                let (x, a) = self.classical.as_ref().expect("validated");
                let x = parse::rational(x).map_err(usage)?;
                let a = a.iter().map(|v| parse::rational(v)).collect::<Result<Vec<_>, _>>().map_err(usage)?;
                let v = barnes_bernoulli(n as usize, &x, &a)?;
                Ok(self.rational_value(v, Method::Exact))
            }
            (Family::QZeta | Family::QL, Point::S(s)) => {
                let Some(QInput::Complex(q)) = &self.q else { unreachable!("validated") };
                let z = q_zeta(s, self.spec.as_ref().expect("validated"), q, &self.cfg)?;
                Ok(Evaluation {
                    value: Value::Complex(z.value),
                    method: z.method.as_str(),
                    error: Some(z.error),
                    certified: z.certified,
                    terms_used: Some(z.terms_used),
                })
            }
            (_, Point::N(n)) => self.q_euler(n),
            (f, p) => {
                Err(barnesq_core::Error::InvalidSpec(format!("family {} cannot be evaluated at {p:?}", f.name())))
            }
        }
    }

    fn q_euler(&self, n: u32) -> barnesq_core::Result<Evaluation> {
        let spec = self.spec.as_ref().expect("validated");
        match (self.q.as_ref().expect("validated"), self.method) {
            (QInput::Complex(q), MethodArg::Closed) => Ok(Evaluation {
                value: Value::Complex(q_euler_closed_precise(n, spec, q)?),
                method: Method::Closed.as_str(),
                error: None,
                certified: false,
                terms_used: None,
            }),
            (QInput::Complex(q), _) => {
                let v = q_euler_series(n, spec, q, &self.cfg)?;
                Ok(Evaluation {
                    value: Value::Complex(v.value),
                    method: v.method.as_str(),
                    error: Some(v.error),
                    certified: v.certified,
                    terms_used: Some(v.terms_used),
                })
            }
            (QInput::Rational(q), _) => {
                Ok(Evaluation::exact(Value::Rational(q_euler_closed_exact(n, spec, q)?), Method::Exact))
            }
            (QInput::Padic(q, k), MethodArg::Integral) => {
                let v = q_euler_integral(n, spec, q, &self.integral_cfg)?;
                let mut e = Evaluation::exact(padic_value(&v.value), Method::PadicIntegral);
                e.terms_used = q.value().prime().checked_pow(v.level);
                debug_assert_eq!(v.value.precision(), *k);
                Ok(e)
            }
            (QInput::Padic(q, k), _) => {
                Ok(Evaluation::exact(padic_value(&q_euler_closed_padic(n, spec, q, *k)?), Method::Padic))
            }
        }
    }

    /// Mellin transform of the generating function against the lattice sum.
    pub fn mellin(&self, point: Point) -> barnesq_core::Result<MellinReport> {
        match (point, &self.q, &self.spec) {
            (Point::S(s), Some(QInput::Complex(q)), Some(spec)) => mellin_check(s, spec, q, &QuadConfig::default()),
            _ => Err(barnesq_core::Error::InvalidSpec("the Mellin check needs a q-zeta family".into())),
        }
    }

    fn classical_zeta(&self, s: Complex64) -> barnesq_core::Result<Evaluation> {
        let (w, a) = self.classical.as_ref().expect("validated");
        if let Some(m) = parse::nonpositive_integer(s) {
            let w = parse::rational(w).map_err(usage)?;
            let a = a.iter().map(|v| parse::rational(v)).collect::<Result<Vec<_>, _>>().map_err(usage)?;
            let v = barnes_zeta_negative(m, &w, &a)?;
            return Ok(self.rational_value(v, Method::Bernoulli));
        }
        if self.backend == Backend::Rational {
            return Err(barnesq_core::Error::InvalidSpec(
                "the rational backend needs s to be a nonpositive integer".into(),
            ));
        }
        let w = parse::real(w).map_err(usage)?;
        let a = a.iter().map(|v| parse::real(v)).collect::<Result<Vec<_>, _>>().map_err(usage)?;
        let z = barnes_zeta_classical(s, w, &a)?;
        Ok(Evaluation {
            value: Value::Complex(z.value),
            method: z.method.as_str(),
            error: Some(z.error),
            certified: z.certified,
            terms_used: Some(z.terms_used),
        })
    }

    fn rational_value(&self, v: BigRational, method: Method) -> Evaluation {
        match self.backend {
            Backend::Rational => Evaluation::exact(Value::Rational(v), method),
            _ => {
                let f = v.to_f64().unwrap_or(f64::NAN);
                let mut e = Evaluation::exact(Value::Complex(Complex64::new(f, 0.0)), method);
                e.error = Some(f.abs() * f64::EPSILON);
                e
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    N(u32),
    S(Complex64),
}

fn usage(e: UsageError) -> barnesq_core::Error {
    barnesq_core::Error::InvalidSpec(e.0)
}

fn padic_value(v: &PadicNum) -> Value {
    Value::Padic { p: v.prime(), k: v.precision(), digits: v.digits() }
}
