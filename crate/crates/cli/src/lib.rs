//! Command-line front end: evaluate a family at a point, sweep a range into
//! a table, or run one of the verification suites.

use std::fmt;
use std::path::PathBuf;

use barnesq_core::padic::IntegralConfig;
use barnesq_core::qeuler::SumConfig;
use barnesq_core::verify::{run_suite, Suite, SuiteOptions};
use clap::{Args, Parser, Subcommand, ValueEnum};

mod eval;
mod output;
pub mod parse;

use eval::{Job, Point};
use output::{Doc, Format};

/// Caps the summation work budget and the p-adic level work bound.
pub const WORK_BUDGET_ENV: &str = "BARNESQ_WORK_BUDGET";

#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "barnesq",
    version,
    about = "q-Euler polynomials, fermionic p-adic integrals and Barnes-type q-zeta functions"
)]
struct Cli {
    /// key = value file overriding summation settings
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    output: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a family at one point
    Eval(FamilyArgs),
    /// Run a verification suite
    Verify(VerifyArgs),
    /// Sweep n (polynomial families) or s (zeta families) over a range
    Table(TableArgs),
    /// Evaluate a zeta function; the family is inferred when omitted
    Zeta(ZetaArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    #[value(name = "q-euler")]
    QEuler,
    #[value(name = "q-euler-hr")]
    QEulerHr,
    #[value(name = "barnes-q-euler")]
    BarnesQEuler,
    #[value(name = "q-zeta")]
    QZeta,
    #[value(name = "q-l")]
    QL,
    #[value(name = "barnes-classical")]
    BarnesClassical,
    #[value(name = "bernoulli-multi")]
    BernoulliMulti,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::QEuler => "q-euler",
            Family::QEulerHr => "q-euler-hr",
            Family::BarnesQEuler => "barnes-q-euler",
            Family::QZeta => "q-zeta",
            Family::QL => "q-l",
            Family::BarnesClassical => "barnes-classical",
            Family::BernoulliMulti => "bernoulli-multi",
        }
    }

    /// Evaluated at `s` rather than `n`.
    pub fn is_zeta(&self) -> bool {
        matches!(self, Family::QZeta | Family::QL | Family::BarnesClassical)
    }

    /// Depends on `q`.
    pub fn is_q(&self) -> bool {
        !matches!(self, Family::BarnesClassical | Family::BernoulliMulti)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Complex,
    Rational,
    Padic,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// closed form
    Closed,
    /// lattice series (DIRECT or ABEL)
    Series,
    /// fermionic p-adic integral
    Integral,
}

#[derive(Args, Debug, Clone)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// degree of the polynomial families
    #[arg(long)]
    pub n: Option<u32>,
    /// complex argument of the zeta families, e.g. 2 or 2.5+1i
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<String>,
    /// q: complex, rational (1/2) or, for the padic backend, an integer
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<String>,
    /// polynomial variable
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    /// weights, comma separated (the shift for barnes-classical)
    #[arg(long, allow_hyphen_values = true)]
    pub w: Option<String>,
    /// integer twists, comma separated (periods for the classical families)
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    /// h of the (h,r) family
    #[arg(long, allow_hyphen_values = true)]
    pub h: Option<i64>,
    /// order
    #[arg(long)]
    pub r: Option<usize>,
    /// character as f:index in the enumeration of characters mod f
    #[arg(long)]
    pub chi: Option<String>,
    /// character values chi(0),...,chi(f-1)
    #[arg(long = "chi-values", allow_hyphen_values = true)]
    pub chi_values: Option<String>,
    #[arg(long, value_enum, default_value = "complex")]
    pub backend: Backend,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// prime for the padic backend
    #[arg(long)]
    pub p: Option<u64>,
    /// p-adic precision K
    #[arg(long = "precision", visible_alias = "K")]
    pub precision: Option<u32>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// identities, distribution, interpolation, mellin or padic-consistency
    #[arg(long)]
    suite: Suite,
    /// largest degree in the grids
    #[arg(long = "n-max", default_value_t = 6)]
    n_max: u32,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// start:end[:step], inclusive
    #[arg(long, allow_hyphen_values = true)]
    range: String,
}

#[derive(Args, Debug)]
struct ZetaArgs {
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long, allow_hyphen_values = true)]
    s: String,
    #[arg(long, allow_hyphen_values = true)]
    q: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    w: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long)]
    chi: Option<String>,
    #[arg(long = "chi-values", allow_hyphen_values = true)]
    chi_values: Option<String>,
    #[arg(long, value_enum, default_value = "complex")]
    backend: Backend,
    /// also compare against the Mellin transform of the generating function
    #[arg(long)]
    mellin: bool,
}

/// Outcome of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn usage(msg: impl fmt::Display) -> Self {
        Self { code: 2, stdout: String::new(), stderr: format!("error: {msg}\n") }
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code: 2, stdout: String::new(), stderr: text }
            };
        }
    };
    match dispatch(cli) {
        Ok(o) => o,
        Err(e) => Outcome::usage(e),
    }
}

fn settings(path: &Option<PathBuf>) -> Result<(SumConfig, IntegralConfig), UsageError> {
    let mut cfg = SumConfig::default();
    if let Some(p) = path {
        let text = std::fs::read_to_string(p).map_err(|e| UsageError(format!("cannot read {}: {e}", p.display())))?;
        cfg = parse::config(&text, cfg)?;
    }
    let mut integral = IntegralConfig::default();
    if let Ok(v) = std::env::var(WORK_BUDGET_ENV) {
        let cap: u64 = v.trim().parse().map_err(|_| UsageError(format!("{WORK_BUDGET_ENV} must be an integer")))?;
        cfg.work_budget = cfg.work_budget.min(cap);
        integral.work_bound = integral.work_bound.min(cap);
    }
    Ok((cfg, integral))
}

fn dispatch(cli: Cli) -> Result<Outcome, UsageError> {
    let (cfg, integral) = settings(&cli.config)?;
    match cli.command {
        Command::Eval(args) => {
            let job = Job::new(&args, cfg, integral)?;
            let point = point_of(&args)?;
            let doc = Doc::eval(&args, job.eval(point));
            Ok(doc.finish(cli.output.unwrap_or(Format::Json)))
        }
        Command::Table(t) => {
            let job = Job::new(&t.family, cfg, integral)?;
            let pts = parse::range(&t.range)?;
            let points: Vec<Point> = if t.family.family.is_zeta() {
                if t.family.s.is_some() {
                    return Err(UsageError("--s is swept by --range in a table".into()));
                }
                pts.iter().map(|&s| Point::S(s.into())).collect()
            } else {
                if t.family.n.is_some() {
                    return Err(UsageError("--n is swept by --range in a table".into()));
                }
                if pts.iter().any(|v| v.fract() != 0.0 || *v < 0.0) {
                    return Err(UsageError("n ranges need nonnegative integer points".into()));
                }
                pts.iter().map(|&n| Point::N(n as u32)).collect()
            };
            let rows: Vec<_> = points.iter().map(|&p| (p, job.eval(p))).collect();
            Ok(Doc::table(&t.family, rows).finish(cli.output.unwrap_or(Format::Csv)))
        }
        Command::Zeta(z) => {
            let family = z.family.unwrap_or(match (&z.q, &z.chi, &z.chi_values) {
                (None, _, _) => Family::BarnesClassical,
                (Some(_), None, None) => Family::QZeta,
                _ => Family::QL,
            });
            if !family.is_zeta() {
                return Err(UsageError(format!("family {} is not a zeta function", family.name())));
            }
            let args = FamilyArgs {
                family,
                n: None,
                s: Some(z.s.clone()),
                q: z.q.clone(),
                x: z.x.clone(),
                w: z.w.clone(),
                a: z.a.clone(),
                h: None,
                r: None,
                chi: z.chi.clone(),
                chi_values: z.chi_values.clone(),
                backend: z.backend,
                method: None,
                p: None,
                precision: None,
            };
            let job = Job::new(&args, cfg, integral)?;
            let point = point_of(&args)?;
            let mut doc = Doc::eval(&args, job.eval(point));
            if z.mellin {
                if family == Family::BarnesClassical {
                    return Err(UsageError("--mellin applies to the q-zeta families".into()));
                }
                doc.add_mellin(job.mellin(point));
            }
            Ok(doc.finish(cli.output.unwrap_or(Format::Json)))
        }
        Command::Verify(v) => {
            let report = run_suite(v.suite, &SuiteOptions { n_max: v.n_max, cfg });
            Ok(Doc::verify(&report).finish(cli.output.unwrap_or(Format::Json)))
        }
    }
}

fn point_of(args: &FamilyArgs) -> Result<Point, UsageError> {
    if args.family.is_zeta() {
        if args.n.is_some() {
            return Err(UsageError(format!("family {} takes --s, not --n", args.family.name())));
        }
        let s = args
            .s
            .as_deref()
            .ok_or_else(|| UsageError(format!("--s is required for family {}", args.family.name())))?;
        Ok(Point::S(parse::complex(s)?))
    } else {
        args.n.map(Point::N).ok_or_else(|| UsageError(format!("--n is required for family {}", args.family.name())))
    }
}
