//! Analysis reports: exact fields with decimal renderings alongside.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::coderivative::SquaredBound;
use crate::geometry::rational::{decimal, format_rat, sqrt_bounds};
use crate::geometry::{ConeUnion, PolyCone, QVector, Rat};

/// Fractional digits in decimal renderings.
pub const DECIMAL_DIGITS: usize = 15;

/// A modulus as squared rational bounds plus decimal renderings of its square roots.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Modulus {
    pub name: String,
    pub bounded: bool,
    pub exact: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squared_lo: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squared_hi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decimal_lo: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decimal_hi: Option<String>,
}

impl Modulus {
    pub fn from_squared(name: &str, lo: &Rat, hi: &Rat) -> Modulus {
        let bits = (DECIMAL_DIGITS as f64 * 3.33).ceil() as u32 + 8;
        Modulus {
            name: name.to_string(),
            bounded: true,
            exact: lo == hi,
            squared_lo: Some(format_rat(lo)),
            squared_hi: Some(format_rat(hi)),
            decimal_lo: Some(decimal(&sqrt_bounds(lo, bits).0, DECIMAL_DIGITS)),
            decimal_hi: Some(round_up(&sqrt_bounds(hi, bits).1)),
        }
    }

    pub fn unbounded(name: &str) -> Modulus {
        Modulus {
            name: name.to_string(),
            bounded: false,
            exact: false,
            squared_lo: None,
            squared_hi: None,
            decimal_lo: None,
            decimal_hi: None,
        }
    }

    pub fn from_bound(name: &str, b: &SquaredBound) -> Modulus {
        match (b.lower(), b.upper()) {
            (Some(lo), Some(hi)) => Modulus::from_squared(name, lo, hi),
            _ => Modulus::unbounded(name),
        }
    }

    fn render(&self) -> String {
        if !self.bounded {
            return "unbounded".into();
        }
        let (lo, hi) = (self.decimal_lo.as_deref().unwrap_or("?"), self.decimal_hi.as_deref().unwrap_or("?"));
        let (slo, shi) = (self.squared_lo.as_deref().unwrap_or("?"), self.squared_hi.as_deref().unwrap_or("?"));
        if self.exact {
            format!("{lo} (squared {slo})")
        } else {
            format!("[{lo}, {hi}] (squared [{slo}, {shi}])")
        }
    }
}

/// Upward rounding so that the rendering stays an upper bound.
fn round_up(q: &Rat) -> String {
    let down = decimal(q, DECIMAL_DIGITS);
    let back = crate::geometry::rational::parse_rat(&down).expect("decimal renderings parse");
    if &back == q {
        return down;
    }
    let ulp = Rat::new(1.into(), num_bigint::BigInt::from(10u32).pow(DECIMAL_DIGITS as u32));
    decimal(&(back + ulp), DECIMAL_DIGITS)
}

/// Points, covectors and residuals of a witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessEntry {
    pub kind: String,
    pub satisfied: bool,
    pub points: Vec<Vec<String>>,
    pub covectors: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
    pub residuals: Vec<ResidualEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualEntry {
    pub condition: String,
    pub value: String,
    pub bound: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
    /// Resolved inputs and parameters.
    pub task: Value,
    pub hypotheses_met: bool,
    pub verdicts: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub moduli: Vec<Modulus>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<WitnessEntry>,
    /// Which reductions and assumptions applied.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Wall-clock milliseconds; only present when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

impl AnalysisReport {
    pub fn new(command: &str, problem: Option<String>, task: Value) -> AnalysisReport {
        AnalysisReport {
            command: command.to_string(),
            problem,
            task,
            hypotheses_met: true,
            verdicts: BTreeMap::new(),
            moduli: Vec::new(),
            witnesses: Vec::new(),
            notes: Vec::new(),
            timing_ms: None,
        }
    }

    pub fn verdict(&mut self, key: &str, value: impl Into<Value>) {
        self.verdicts.insert(key.to_string(), value.into());
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let title = self.problem.as_deref().unwrap_or("problem");
        let _ = writeln!(out, "{} on {}", self.command, title);
        let _ = writeln!(out, "  hypotheses met: {}", self.hypotheses_met);
        for (k, v) in &self.verdicts {
            let _ = writeln!(out, "  {k}: {}", compact(v));
        }
        for m in &self.moduli {
            let _ = writeln!(out, "  modulus {}: {}", m.name, m.render());
        }
        for w in &self.witnesses {
            let _ = writeln!(out, "  witness {} (satisfied: {})", w.kind, w.satisfied);
            for (i, (p, c)) in w.points.iter().zip(&w.covectors).enumerate() {
                let _ = writeln!(out, "    point {}: ({})  covector: ({})", i + 1, p.join(", "), c.join(", "));
            }
            if let Some(l) = &w.lambda {
                let _ = writeln!(out, "    lambda: {l}");
            }
            for r in &w.residuals {
                let _ = writeln!(out, "    {}: {} <= {}", r.condition, r.value, r.bound);
            }
        }
        for n in &self.notes {
            let _ = writeln!(out, "  note: {n}");
        }
        if let Some(t) = self.timing_ms {
            let _ = writeln!(out, "  time: {t} ms");
        }
        out
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn rat_value(q: &Rat) -> Value {
    Value::String(format_rat(q))
}

pub fn vector_strings(v: &QVector) -> Vec<String> {
    v.iter().map(format_rat).collect()
}

pub fn vector_value(v: &QVector) -> Value {
    Value::from(vector_strings(v))
}

/// Generators of a cone as `{"rays": [...], "lines": [...]}`.
pub fn cone_value(c: &PolyCone) -> Value {
    match c.generators() {
        Ok(g) => serde_json::json!({
            "rays": g.rays.iter().map(vector_strings).collect::<Vec<_>>(),
            "lines": g.lines.iter().map(vector_strings).collect::<Vec<_>>(),
        }),
        Err(e) => Value::String(e.to_string()),
    }
}

pub fn cone_union_value(u: &ConeUnion) -> Value {
    Value::from(u.pieces().iter().map(cone_value).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rational::{rat, ratio};

    #[test]
    fn decimal_renderings_bracket_the_root() {
        let m = Modulus::from_squared("half", &ratio(1, 2), &ratio(1, 2));
        assert_eq!(m.decimal_lo.as_deref(), Some("0.707106781186547"));
        assert_eq!(m.decimal_hi.as_deref(), Some("0.707106781186548"));
        let one = Modulus::from_squared("one", &rat(1), &rat(1));
        assert_eq!(one.decimal_hi.as_deref(), Some("1.000000000000000"));
        assert!(one.exact);
    }

    #[test]
    fn reports_round_trip() {
        let mut r = AnalysisReport::new("lipschitz", Some("inst-id".into()), serde_json::json!({"eps": "1/4"}));
        r.verdict("pointbased", true);
        r.moduli.push(Modulus::from_squared("norm", &rat(1), &rat(1)));
        r.moduli.push(Modulus::unbounded("oracle"));
        let back: AnalysisReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_table().contains("modulus oracle: unbounded"));
    }
}
