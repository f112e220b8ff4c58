//! Key-value description of a custom distribution.
//!
//! ```text
//! # comment
//! name = shifted
//! omega = -x + 0.5/x
//! probe_min = 1e-3
//! probe_max = 1e3
//! probe_points = 2000
//! ```
//!
//! `omega` is a Laurent polynomial: a sum of terms `c`, `c*x`, `c*x^k`,
//! `c/x`, `c/x^k` with integer `k`. The density is exp of its antiderivative,
//! normalised to 1 at x = 1 (not to unit mass).

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::distributions::{CustomSpec, SupportHint};
use crate::error::{Error, Result};

/// Σ c_k x^k.
#[derive(Debug, Clone, PartialEq)]
pub struct Laurent {
    pub terms: BTreeMap<i32, f64>,
}

impl Laurent {
    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|(&k, &c)| c * x.powi(k)).sum()
    }

    pub fn derivative(&self) -> Laurent {
        Laurent {
            terms: self
                .terms
                .iter()
                .filter(|(&k, _)| k != 0)
                .map(|(&k, &c)| (k - 1, c * k as f64))
                .collect(),
        }
    }

    /// Antiderivative, with c_{-1}/x integrating to c_{-1} ln x.
    pub fn integral(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&k, &c)| {
                if k == -1 {
                    c * x.ln()
                } else {
                    c * x.powi(k + 1) / (k + 1) as f64
                }
            })
            .sum()
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn parse_term(term: &str, sign: f64) -> Result<(i32, f64)> {
    let t: String = term.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(usage("empty term in omega"));
    }
    let bad = || usage(format!("cannot parse omega term '{term}'"));
    let (coef_part, power) = if let Some(i) = t.find('x') {
        let (head, tail) = t.split_at(i);
        let tail = &tail[1..];
        let k: i32 = if tail.is_empty() {
            1
        } else if let Some(p) = tail.strip_prefix('^') {
            p.trim_start_matches('(').trim_end_matches(')').parse().map_err(|_| bad())?
        } else {
            return Err(bad());
        };
        if let Some(c) = head.strip_suffix('/') {
            (c.to_string(), -k)
        } else {
            (head.trim_end_matches('*').to_string(), k)
        }
    } else {
        (t.clone(), 0)
    };
    let coef = match coef_part.as_str() {
        "" => 1.0,
        "-" => -1.0,
        "+" => 1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    if !coef.is_finite() {
        return Err(bad());
    }
    Ok((power, sign * coef))
}

pub fn parse_laurent(src: &str) -> Result<Laurent> {
    let mut terms = BTreeMap::new();
    let mut current = String::new();
    let mut sign = 1.0;
    let mut prev: Option<char> = None;
    let mut flush = |current: &mut String, sign: f64| -> Result<()> {
        if current.trim().is_empty() {
            return Ok(());
        }
        let (k, c) = parse_term(current, sign)?;
        *terms.entry(k).or_insert(0.0) += c;
        current.clear();
        Ok(())
    };
    for ch in src.chars() {
        // a sign splits terms unless it belongs to an exponent or a float exponent
        let splits = (ch == '+' || ch == '-')
            && !matches!(prev, Some('^') | Some('e') | Some('E') | Some('('))
            && !current.trim().is_empty();
        if splits {
            flush(&mut current, sign)?;
            sign = if ch == '-' { -1.0 } else { 1.0 };
        } else if (ch == '+' || ch == '-') && current.trim().is_empty() {
            if ch == '-' {
                sign = -sign;
            }
        } else {
            current.push(ch);
        }
        if !ch.is_whitespace() {
            prev = Some(ch);
        }
    }
    flush(&mut current, sign)?;
    if terms.is_empty() {
        return Err(usage("omega has no terms"));
    }
    Ok(Laurent { terms })
}

pub fn parse_spec(src: &str) -> Result<CustomSpec> {
    let mut kv = BTreeMap::new();
    for (n, line) in src.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("line {}: expected key = value", n + 1)))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let mut hint = SupportHint::default();
    let mut name = "custom".to_string();
    let mut omega = None;
    for (k, v) in &kv {
        let num = || v.parse::<f64>().map_err(|_| usage(format!("{k}: not a number: {v}")));
        match k.as_str() {
            "name" => name = v.clone(),
            "omega" => omega = Some(parse_laurent(v)?),
            "probe_min" => hint.probe_min = num()?,
            "probe_max" => hint.probe_max = num()?,
            "probe_points" => {
                hint.probe_points = v.parse().map_err(|_| usage(format!("probe_points: not a count: {v}")))?
            }
            other => return Err(usage(format!("unknown key '{other}'"))),
        }
    }
    let omega = Arc::new(omega.ok_or_else(|| usage("spec file needs an 'omega = ...' line"))?);
    let omega_prime = Arc::new(omega.derivative());
    let l1 = omega.integral(1.0);
    let (w, wp, lf, ld) = (omega.clone(), omega_prime, omega.clone(), omega);
    Ok(CustomSpec::new(
        name,
        Arc::new(move |x| w.eval(x)),
        Arc::new(move |x| wp.eval(x)),
        Arc::new(move |x| (lf.integral(x) - l1).exp()),
    )
    .with_log_density(Arc::new(move |x| ld.integral(x) - l1))
    .with_support(hint))
}
