//! JSON, CSV and text renderings. Field order is fixed and floats carry 17
//! significant digits, so identical invocations give identical bytes.

use std::str::FromStr;

use barnesq_core::tolerances;
use barnesq_core::verify::{Check, SuiteReport};
use barnesq_core::zeta::MellinReport;
use clap::ValueEnum;
use serde_json::{json, Map, Number, Value as Json};

use crate::eval::{Evaluation, Point, Value};
use crate::{FamilyArgs, Outcome};

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

type Computed = barnesq_core::Result<Evaluation>;

pub struct Doc {
    family: &'static str,
    params: Vec<(&'static str, Json)>,
    body: Body,
}

enum Body {
    Eval { result: Computed, mellin: Option<barnesq_core::Result<MellinReport>> },
    Table { rows: Vec<(Point, Computed)> },
    Verify { report: SuiteReport },
}

/// `f64` with 17 significant digits; non-finite values become `null`.
pub fn float(v: f64) -> Json {
    if v.is_finite() {
        Json::Number(Number::from_str(&format!("{v:.16e}")).expect("valid number"))
    } else {
        Json::Null
    }
}

fn float_text(v: f64) -> String {
    format!("{v:.16e}")
}

fn bigint(v: &num_bigint::BigInt) -> Json {
    Json::Number(Number::from_str(&v.to_string()).expect("integer"))
}

fn params(args: &FamilyArgs) -> Vec<(&'static str, Json)> {
    let mut out = Vec::new();
    let mut text = |k: &'static str, v: &Option<String>| {
        if let Some(v) = v {
            out.push((k, Json::String(v.clone())));
        }
    };
    text("s", &args.s);
    text("x", &args.x);
    text("q", &args.q);
    text("w", &args.w);
    text("a", &args.a);
    text("chi", &args.chi);
    text("chiValues", &args.chi_values);
    if let Some(n) = args.n {
        out.insert(0, ("n", json!(n)));
    }
    if let Some(h) = args.h {
        out.push(("h", json!(h)));
    }
    if let Some(r) = args.r {
        out.push(("r", json!(r)));
    }
    out.push(("backend", json!(format!("{:?}", args.backend).to_lowercase())));
    if let Some(m) = args.method {
        out.push(("method", json!(format!("{m:?}").to_lowercase())));
    }
    if let Some(p) = args.p {
        out.push(("p", json!(p)));
    }
    if let Some(k) = args.precision {
        out.push(("K", json!(k)));
    }
    out
}

fn value_json(v: &Value) -> Json {
    match v {
        Value::Complex(z) => json!({ "re": float(z.re), "im": float(z.im) }),
        Value::Rational(r) => json!({ "num": bigint(r.numer()), "den": bigint(r.denom()) }),
        Value::Padic { p, k, digits } => json!({ "p": p, "K": k, "residue": digits }),
    }
}

fn value_columns(v: &Value) -> Vec<String> {
    match v {
        Value::Complex(z) => vec![float_text(z.re), float_text(z.im)],
        Value::Rational(r) => vec![r.numer().to_string(), r.denom().to_string()],
        Value::Padic { p, k, digits } => {
            vec![p.to_string(), k.to_string(), digits.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ")]
        }
    }
}

fn value_header(backend: &str) -> &'static [&'static str] {
    match backend {
        "rational" => &["num", "den"],
        "padic" => &["p", "K", "residue"],
        _ => &["re", "im"],
    }
}

fn value_text(v: &Value) -> String {
    match v {
        Value::Complex(z) if z.im == 0.0 => float_text(z.re),
        Value::Complex(z) => {
            format!("{} {} {}i", float_text(z.re), if z.im < 0.0 { '-' } else { '+' }, float_text(z.im.abs()))
        }
        Value::Rational(r) => r.to_string(),
        Value::Padic { p, k, digits } => format!(
            "{} (p={p}, K={k}, base-{p} digits, least significant first)",
            digits.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ")
        ),
    }
}

fn eval_fields(e: &Evaluation) -> Vec<(&'static str, Json)> {
    vec![
        ("value", value_json(&e.value)),
        ("method", json!(e.method)),
        ("certifiedError", e.error.filter(|_| e.certified).map_or(Json::Null, float)),
        ("errorEstimate", e.error.filter(|_| !e.certified).map_or(Json::Null, float)),
        ("termsUsed", e.terms_used.map_or(Json::Null, |t| json!(t))),
    ]
}

fn error_json(e: &barnesq_core::Error) -> Json {
    json!({ "name": e.name(), "message": e.to_string() })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_line(fields: &[String]) -> String {
    let mut line = fields.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(",");
    line.push('\n');
    line
}

fn opt_text(v: Option<f64>) -> String {
    v.map_or(String::new(), float_text)
}

fn point_text(p: &Point) -> String {
    match p {
        Point::N(n) => n.to_string(),
        Point::S(s) if s.im == 0.0 => s.re.to_string(),
        Point::S(s) => s.to_string(),
    }
}

fn mellin_passed(m: &barnesq_core::Result<MellinReport>) -> bool {
    m.as_ref().is_ok_and(|r| r.residual <= tolerances::MELLIN)
}

impl Doc {
    pub fn eval(args: &FamilyArgs, result: Computed) -> Self {
        Self { family: args.family.name(), params: params(args), body: Body::Eval { result, mellin: None } }
    }

    pub fn table(args: &FamilyArgs, rows: Vec<(Point, Computed)>) -> Self {
        Self { family: args.family.name(), params: params(args), body: Body::Table { rows } }
    }

    pub fn verify(report: &SuiteReport) -> Self {
        Self { family: "", params: Vec::new(), body: Body::Verify { report: report.clone() } }
    }

    pub fn add_mellin(&mut self, m: barnesq_core::Result<MellinReport>) {
        if let Body::Eval { mellin, .. } = &mut self.body {
            *mellin = Some(m);
        }
    }

    fn failed(&self) -> bool {
        match &self.body {
            Body::Eval { result, mellin } => result.is_err() || mellin.as_ref().is_some_and(|m| !mellin_passed(m)),
            Body::Table { rows } => rows.iter().any(|(_, r)| r.is_err()),
            Body::Verify { report } => !report.passed(),
        }
    }

    fn backend(&self) -> &str {
        self.params.iter().find(|(k, _)| *k == "backend").and_then(|(_, v)| v.as_str()).unwrap_or("complex")
    }

    pub fn finish(&self, format: Format) -> Outcome {
        let stdout = match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json()).expect("serializable");
                s.push('\n');
                s
            }
            Format::Csv => self.csv(),
            Format::Text => self.text(),
        };
        Outcome { code: if self.failed() { 1 } else { 0 }, stdout, stderr: String::new() }
    }

    fn head(&self) -> Map<String, Json> {
        let mut m = Map::new();
        m.insert("family".into(), json!(self.family));
        m.insert("params".into(), Json::Object(self.params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()));
        m
    }

    fn json(&self) -> Json {
        match &self.body {
            Body::Eval { result, mellin } => {
                let mut m = self.head();
                match result {
                    Ok(e) => m.extend(eval_fields(e).into_iter().map(|(k, v)| (k.to_string(), v))),
                    Err(e) => {
                        m.insert("error".into(), error_json(e));
                    }
                }
                if let Some(r) = mellin {
                    let v = match r {
                        Ok(r) => json!({
                            "transform": { "re": float(r.transform.re), "im": float(r.transform.im) },
                            "residual": float(r.residual),
                            "tailBound": float(r.tail_bound),
                            "tolerance": float(tolerances::MELLIN),
                            "passed": mellin_passed(mellin.as_ref().unwrap()),
                        }),
                        Err(e) => json!({ "error": error_json(e) }),
                    };
                    m.insert("mellin".into(), v);
                }
                Json::Object(m)
            }
            Body::Table { rows } => {
                let mut m = self.head();
                let rows: Vec<Json> = rows
                    .iter()
                    .map(|(p, r)| {
                        let mut row = Map::new();
                        match p {
                            Point::N(n) => row.insert("n".into(), json!(n)),
                            Point::S(s) => row.insert("s".into(), json!({ "re": float(s.re), "im": float(s.im) })),
                        };
                        match r {
                            Ok(e) => row.extend(eval_fields(e).into_iter().map(|(k, v)| (k.to_string(), v))),
                            Err(e) => {
                                row.insert("error".into(), error_json(e));
                            }
                        }
                        Json::Object(row)
                    })
                    .collect();
                m.insert("rows".into(), Json::Array(rows));
                Json::Object(m)
            }
            Body::Verify { report } => {
                let check = |c: &Check| {
                    json!({
                        "name": c.name,
                        "residual": float(c.residual),
                        "tolerance": float(c.tolerance),
                        "detail": c.detail,
                    })
                };
                let worst = report.checks.iter().max_by(|a, b| severity(a).total_cmp(&severity(b)));
                json!({
                    "suite": report.suite.as_str(),
                    "passed": report.passed(),
                    "checks": report.checks.len(),
                    "failed": report.failures().count(),
                    "worst": worst.map_or(Json::Null, check),
                    "failures": report.failures().map(check).collect::<Vec<_>>(),
                })
            }
        }
    }

    fn csv(&self) -> String {
        let tail = ["method", "certifiedError", "errorEstimate", "termsUsed"];
        let eval_cols = |e: &Evaluation| {
            let mut v = value_columns(&e.value);
            v.push(e.method.to_string());
            v.push(opt_text(e.error.filter(|_| e.certified)));
            v.push(opt_text(e.error.filter(|_| !e.certified)));
            v.push(e.terms_used.map_or(String::new(), |t| t.to_string()));
            v
        };
        let header = |first: &str| -> Vec<String> {
            std::iter::once(first)
                .chain(value_header(self.backend()).iter().copied())
                .chain(tail)
                .chain(["error"])
                .map(String::from)
                .collect()
        };
        let blanks = 2 + value_header(self.backend()).len() + tail.len() - 2;
        let row = |first: String, r: &Computed| -> Vec<String> {
            let mut v = vec![first];
            match r {
                Ok(e) => {
                    v.extend(eval_cols(e));
                    v.push(String::new());
                }
                Err(e) => {
                    v.extend(std::iter::repeat_n(String::new(), blanks));
                    v.push(format!("{}: {e}", e.name()));
                }
            }
            v
        };
        match &self.body {
            Body::Eval { result, .. } => csv_line(&header("family")) + &csv_line(&row(self.family.to_string(), result)),
            Body::Table { rows } => {
                let first = if matches!(rows.first(), Some((Point::S(_), _))) { "s" } else { "n" };
                let mut out = csv_line(&header(first));
                for (p, r) in rows {
                    out += &csv_line(&row(point_text(p), r));
                }
                out
            }
            Body::Verify { report } => {
                let mut out = csv_line(&["name", "residual", "tolerance", "passed", "detail"].map(String::from));
                for c in &report.checks {
                    out += &csv_line(&[
                        c.name.clone(),
                        float_text(c.residual),
                        float_text(c.tolerance),
                        c.passed.to_string(),
                        c.detail.clone(),
                    ]);
                }
                out
            }
        }
    }

    fn text(&self) -> String {
        let params = self
            .params
            .iter()
            .filter(|(k, _)| *k != "backend")
            .map(|(k, v)| format!("{k}={}", v.as_str().map_or_else(|| v.to_string(), String::from)))
            .collect::<Vec<_>>()
            .join(" ");
        let describe = |r: &Computed| match r {
            Ok(e) => {
                let mut s = format!("{} [{}]", value_text(&e.value), e.method);
                if let Some(err) = e.error {
                    let kind = if e.certified { "certified error" } else { "estimated error" };
                    s.push_str(&format!(" {kind} {err:.3e}"));
                }
                s
            }
            Err(e) => format!("error {}: {e}", e.name()),
        };
        match &self.body {
            Body::Eval { result, mellin } => {
                let mut out = format!("{} {params}\n  {}\n", self.family, describe(result));
                match mellin {
                    Some(Ok(m)) => out.push_str(&format!(
                        "  Mellin transform {} residual {:.3e} ({})\n",
                        float_text(m.transform.re),
                        m.residual,
                        if m.residual <= tolerances::MELLIN { "ok" } else { "above tolerance" }
                    )),
                    Some(Err(e)) => out.push_str(&format!("  Mellin check error {}: {e}\n", e.name())),
                    None => {}
                }
                out
            }
            Body::Table { rows } => {
                let mut out = format!("{} {params}\n", self.family);
                for (p, r) in rows {
                    out.push_str(&format!("  {:>6}  {}\n", point_text(p), describe(r)));
                }
                out
            }
            Body::Verify { report } => {
                let worst = report.checks.iter().max_by(|a, b| severity(a).total_cmp(&severity(b)));
                let mut out = format!(
                    "suite {}: {} ({} checks, {} failed)\n",
                    report.suite,
                    if report.passed() { "PASS" } else { "FAIL" },
                    report.checks.len(),
                    report.failures().count()
                );
                if let Some(w) = worst {
                    out.push_str(&format!(
                        "  worst: {} residual {:.3e} tolerance {:.1e}\n",
                        w.name, w.residual, w.tolerance
                    ));
                }
                for c in report.failures() {
                    out.push_str(&format!(
                        "  FAILED {} residual {:.3e} tolerance {:.1e} {}\n",
                        c.name, c.residual, c.tolerance, c.detail
                    ));
                }
                out
            }
        }
    }
}

/// Residual relative to tolerance; exact checks count as 0 or infinity.
fn severity(c: &Check) -> f64 {
    if c.tolerance > 0.0 {
        c.residual / c.tolerance
    } else if c.residual == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}
