//! Parsers for the textual parameter forms accepted on the command line.

use std::str::FromStr;

use barnesq_core::chars::DirichletChar;
use barnesq_core::qeuler::SumConfig;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Pow, Zero};

use crate::UsageError;

/// `2`, `-0.5`, `1.5+2i`, `3-i`, `2i`.
pub fn complex(s: &str) -> Result<Complex64, UsageError> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || UsageError(format!("'{s}' is not a complex number"));
    let Some(body) = t.strip_suffix('i') else {
        return f64::from_str(&t).map(|v| Complex64::new(v, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not leading and not part of an exponent
    let bytes = body.as_bytes();
    let split =
        (1..bytes.len()).rev().find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |v: &str| -> Result<f64, UsageError> {
        match v {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => f64::from_str(v).map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => Ok(Complex64::new(f64::from_str(&body[..k]).map_err(|_| bad())?, imag(&body[k..])?)),
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

pub fn real(s: &str) -> Result<f64, UsageError> {
    let z = complex(s)?;
    if z.im != 0.0 {
        return Err(UsageError(format!("'{s}' must be real")));
    }
    Ok(z.re)
}

/// `3`, `-7/4`, `0.125` (decimals are read exactly).
pub fn rational(s: &str) -> Result<BigRational, UsageError> {
    let t = s.trim();
    let bad = || UsageError(format!("'{s}' is not a rational number"));
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (neg, digits) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let num = BigInt::from_str(&format!("0{int}{frac}")).map_err(|_| bad())?;
    let den: BigInt = Pow::pow(BigInt::from(10), frac.len());
    let v = BigRational::new(num, den);
    Ok(if neg { -v } else { v })
}

pub fn list<T>(s: &str, item: impl Fn(&str) -> Result<T, UsageError>) -> Result<Vec<T>, UsageError> {
    s.split(',').map(|v| item(v.trim())).collect()
}

pub fn integer(s: &str) -> Result<i64, UsageError> {
    i64::from_str(s.trim()).map_err(|_| UsageError(format!("'{s}' is not an integer")))
}

/// `f:index` in the deterministic enumeration of characters mod `f`.
pub fn chi_index(s: &str) -> Result<DirichletChar, UsageError> {
    let bad = || UsageError(format!("'{s}' is not of the form f:index"));
    let (f, i) = s.split_once(':').ok_or_else(bad)?;
    let f = u64::from_str(f.trim()).map_err(|_| bad())?;
    let i = usize::from_str(i.trim()).map_err(|_| bad())?;
    DirichletChar::from_index(f, i).map_err(|e| UsageError(e.to_string()))
}

/// Values `chi(0), ..., chi(f-1)`, complex entries allowed.
pub fn chi_values(s: &str) -> Result<DirichletChar, UsageError> {
    DirichletChar::from_values(list(s, complex)?).map_err(|e| UsageError(e.to_string()))
}

/// `key = value` lines overriding summation defaults; `#` starts a comment.
pub fn config(text: &str, mut cfg: SumConfig) -> Result<SumConfig, UsageError> {
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| UsageError(format!("config line {}: {what}", lineno + 1));
        let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key = value"))?;
        let (key, value) = (key.trim(), value.trim());
        let num = |v: &str| u64::from_str(v).map_err(|_| bad("expected a nonnegative integer"));
        match key {
            "tolerance" => cfg.tolerance = real(value).map_err(|_| bad("expected a number"))?,
            "work_budget" => cfg.work_budget = num(value)?,
            "max_terms_per_axis" => cfg.max_terms_per_axis = num(value)?,
            "richardson_order" => cfg.richardson_order = num(value)? as usize,
            "cvz_terms" => cfg.cvz_terms = num(value)? as usize,
            "collapse" => {
                cfg.collapse = bool::from_str(value).map_err(|_| bad("expected true or false"))?;
            }
            "abel_schedule" => {
                let pts = list(value, real).map_err(|_| bad("expected a comma-separated list"))?;
                if pts.len() < cfg.richardson_order + 2 || pts.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(bad("abel_schedule must increase and have richardson_order + 2 points"));
                }
                cfg.abel_schedule = pts;
            }
            _ => return Err(bad(&format!("unknown key '{key}'"))),
        }
    }
    Ok(cfg)
}

/// `start:end[:step]`, inclusive.
pub fn range(s: &str) -> Result<Vec<f64>, UsageError> {
    let bad = || UsageError(format!("'{s}' is not a range start:end[:step]"));
    let parts = list(&s.replace(':', ","), real).map_err(|_| bad())?;
    let (start, end, step) = match parts[..] {
        [a, b] => (a, b, 1.0),
        [a, b, c] => (a, b, c),
        _ => return Err(bad()),
    };
    if step <= 0.0 || end < start {
        return Err(bad());
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(UsageError("range has too many points".into()));
    }
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

/// The integer value of `z` if it is a nonpositive integer.
pub fn nonpositive_integer(z: Complex64) -> Option<u32> {
    (z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0 && z.re > -1e6).then(|| (-z.re) as u32)
}
