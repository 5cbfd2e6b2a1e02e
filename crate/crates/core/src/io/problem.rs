//! Problem files: JSON documents with exact rationals and named objects.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::ToPrimitive;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::calculus::{ChainVariant, SumVariant};
use crate::error::{Error, Result};
use crate::geometry::rational::{format_rat, parse_rat};
use crate::geometry::{Constraint, ConvexPolyhedron, QVector, Rat};
use crate::local::PLSet;
use crate::multifunction::PLMultifunction;

/// A rational written as an integer or a `"p/q"` string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Q(pub Rat);

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0.is_integer().then(|| self.0.numer().to_i64()).flatten() {
            Some(i) => s.serialize_i64(i),
            None => s.serialize_str(&format_rat(&self.0)),
        }
    }
}

struct QVisitor;

impl Visitor<'_> for QVisitor {
    type Value = Q;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer or a rational string such as \"3/4\"")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Q, E> {
        Ok(Q(Rat::from_integer(v.into())))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Q, E> {
        Ok(Q(Rat::from_integer(v.into())))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Q, E> {
        Err(E::custom(format!("inexact number {v}; write it as a \"p/q\" string")))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Q, E> {
        parse_rat(v).map(Q).map_err(|e| match e {
            Error::InvalidParameter(msg) => E::custom(msg),
            other => E::custom(other),
        })
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        d.deserialize_any(QVisitor)
    }
}

fn vector(v: &[Q]) -> QVector {
    QVector::new(v.iter().map(|q| q.0.clone()).collect())
}

pub fn to_q(v: &QVector) -> Vec<Q> {
    v.iter().cloned().map(Q).collect()
}

/// `a·x <= b` or `a·x = b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Row {
    pub a: Vec<Q>,
    pub b: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PolyhedronSpec {
    /// The whole space of the given dimension.
    Full(usize),
    Point(Vec<Q>),
    /// `null` bounds are infinite.
    Box { lo: Vec<Option<Q>>, hi: Vec<Option<Q>> },
    Halfspaces {
        dim: usize,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        le: Vec<Row>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        eq: Vec<Row>,
    },
}

impl PolyhedronSpec {
    pub fn build(&self) -> Result<ConvexPolyhedron> {
        match self {
            PolyhedronSpec::Full(d) => Ok(ConvexPolyhedron::full(*d)),
            PolyhedronSpec::Point(p) => Ok(ConvexPolyhedron::point(&vector(p))),
            PolyhedronSpec::Box { lo, hi } => {
                if lo.len() != hi.len() {
                    return Err(Error::DimensionMismatch { expected: lo.len(), found: hi.len() });
                }
                let bound = |v: &[Option<Q>]| v.iter().map(|b| b.as_ref().map(|q| q.0.clone())).collect::<Vec<_>>();
                Ok(ConvexPolyhedron::boxed(&bound(lo), &bound(hi)))
            }
            PolyhedronSpec::Halfspaces { dim, le, eq } => {
                let rows = |rs: &[Row]| -> Result<Vec<Constraint>> {
                    rs.iter()
                        .map(|r| {
                            if r.a.len() != *dim {
                                return Err(Error::DimensionMismatch { expected: *dim, found: r.a.len() });
                            }
                            Ok(Constraint::new(vector(&r.a), r.b.0.clone()))
                        })
                        .collect()
                };
                ConvexPolyhedron::new(*dim, rows(le)?, rows(eq)?)
            }
        }
    }

    pub fn from_polyhedron(p: &ConvexPolyhedron) -> PolyhedronSpec {
        let row = |c: &Constraint| Row {
            a: to_q(&c.normal),
            b: Q(c.offset.clone()),
        };
        PolyhedronSpec::Halfspaces {
            dim: p.dim(),
            le: p.inequalities().iter().map(row).collect(),
            eq: p.equalities().iter().map(row).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MappingSpec {
    /// Graph pieces in `(x, y)` coordinates.
    Graph {
        input: usize,
        output: usize,
        pieces: Vec<PolyhedronSpec>,
    },
    /// `x ↦ {A x + c}` on `domain` (the whole space when omitted); `rows` are the rows of `A`.
    Affine {
        rows: Vec<Vec<Q>>,
        shift: Vec<Q>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        domain: Option<PolyhedronSpec>,
    },
}

impl MappingSpec {
    pub fn build(&self) -> Result<PLMultifunction> {
        match self {
            MappingSpec::Graph { input, output, pieces } => PLMultifunction::from_pieces(
                *input,
                *output,
                pieces.iter().map(PolyhedronSpec::build).collect::<Result<Vec<_>>>()?,
            ),
            MappingSpec::Affine { rows, shift, domain } => {
                let Some(first) = rows.first() else {
                    return Err(Error::InvalidParameter("affine map needs at least one row".into()));
                };
                let n = first.len();
                if rows.len() != shift.len() {
                    return Err(Error::DimensionMismatch { expected: rows.len(), found: shift.len() });
                }
                let rows: Vec<QVector> = rows
                    .iter()
                    .map(|r| {
                        if r.len() == n {
                            Ok(vector(r))
                        } else {
                            Err(Error::DimensionMismatch { expected: n, found: r.len() })
                        }
                    })
                    .collect::<Result<_>>()?;
                let domain = match domain {
                    Some(d) => d.build()?,
                    None => ConvexPolyhedron::full(n),
                };
                PLMultifunction::affine(&rows, &vector(shift), &domain)
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dims {
    pub n: usize,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
}

/// Numeric parameters; command-line flags take precedence.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Q>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_table: Option<Vec<Q>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Q>,
    /// Oracle grid step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Q>,
    /// Oracle neighborhood radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<Q>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<Q>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim_cap: Option<usize>,
}

/// A named set and a named point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeTask {
    pub set: String,
    pub point: String,
}

/// A mapping with base point `(x, y)`, relative to `omega`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointTask {
    pub mapping: String,
    pub x: String,
    pub y: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainTask {
    pub s1: String,
    pub s2: String,
    pub x: String,
    pub y: String,
    pub z: String,
    pub variant: ChainVariant,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SumTask {
    pub s1: String,
    pub s2: String,
    pub x: String,
    pub y: String,
    pub y1: String,
    pub y2: String,
    pub variant: SumVariant,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtremalTask {
    pub l1: String,
    pub l2: String,
    pub point: String,
    pub shifts: Vec<Vec<Q>>,
    /// Half-width of the neighborhood box `U`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_radius: Option<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuzzyTask {
    pub t1: String,
    pub t2: String,
    pub point: String,
    pub covector: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tasks {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone: Option<ConeTask>,
    /// Used by `coderivative` and `lipschitz`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<PointTask>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainTask>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sum: Option<SumTask>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extremal: Option<ExtremalTask>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fuzzy: Option<FuzzyTask>,
}

/// The document as written.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub dims: Dims,
    /// Constraint set in `X`; the whole space when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<PolyhedronSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub mappings: BTreeMap<String, MappingSpec>,
    /// Piecewise-polyhedral sets as lists of pieces.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sets: BTreeMap<String, Vec<PolyhedronSpec>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub points: BTreeMap<String, Vec<Q>>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub params: Params,
    #[serde(default, skip_serializing_if = "is_default")]
    pub tasks: Tasks,
}

fn is_default<T: Default + PartialEq>(t: &T) -> bool {
    t == &T::default()
}

/// A validated problem with every named object built.
#[derive(Clone, Debug)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub omega: ConvexPolyhedron,
    pub mappings: BTreeMap<String, PLMultifunction>,
    pub sets: BTreeMap<String, PLSet>,
    pub points: BTreeMap<String, QVector>,
}

/// Line and column (both 1-based) of the first occurrence of `"needle"` in `text`.
fn locate(text: &str, needle: &str) -> (usize, usize) {
    let quoted = format!("\"{needle}\"");
    let Some(offset) = text.find(&quoted) else {
        return (1, 1);
    };
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(offset, |i| offset - i - 1) + 1;
    (line, column)
}

fn at(text: &str, key: &str, e: Error) -> Error {
    let (line, column) = locate(text, key);
    Error::Parse {
        line,
        column,
        message: e.to_string(),
    }
}

pub fn parse_problem(text: &str) -> Result<Problem> {
    let spec: ProblemSpec = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string().split(" at line ").next().unwrap_or_default().to_string(),
    })?;
    Problem::from_spec(spec, text)
}

impl Problem {
    /// Builds every object; error positions are looked up in `text` by name.
    pub fn from_spec(spec: ProblemSpec, text: &str) -> Result<Problem> {
        let n = spec.dims.n;
        let omega = match &spec.omega {
            Some(o) => o.build().map_err(|e| at(text, "omega", e))?,
            None => ConvexPolyhedron::full(n),
        };
        if omega.dim() != n {
            return Err(at(text, "omega", Error::DimensionMismatch { expected: n, found: omega.dim() }));
        }
        let mut mappings = BTreeMap::new();
        for (name, m) in &spec.mappings {
            mappings.insert(name.clone(), m.build().map_err(|e| at(text, name, e))?);
        }
        let mut sets = BTreeMap::new();
        for (name, pieces) in &spec.sets {
            let built = pieces.iter().map(PolyhedronSpec::build).collect::<Result<Vec<_>>>();
            let dim = pieces.first().map_or(n + spec.dims.m, |p| match p {
                PolyhedronSpec::Full(d) | PolyhedronSpec::Halfspaces { dim: d, .. } => *d,
                PolyhedronSpec::Point(v) => v.len(),
                PolyhedronSpec::Box { lo, .. } => lo.len(),
            });
            let set = built.and_then(|ps| PLSet::new(dim, ps)).map_err(|e| at(text, name, e))?;
            sets.insert(name.clone(), set);
        }
        let points = spec.points.iter().map(|(k, v)| (k.clone(), vector(v))).collect();
        let problem = Problem {
            spec,
            omega,
            mappings,
            sets,
            points,
        };
        problem.check_tasks(text)?;
        Ok(problem)
    }

    fn check_tasks(&self, text: &str) -> Result<()> {
        let t = &self.spec.tasks;
        let mut maps: Vec<&String> = Vec::new();
        let mut sets: Vec<&String> = Vec::new();
        let mut pts: Vec<&String> = Vec::new();
        if let Some(c) = &t.cone {
            if !self.has_set(&c.set) {
                return Err(at(text, &c.set, unknown("set", &c.set)));
            }
            pts.push(&c.point);
        }
        if let Some(p) = &t.point {
            maps.push(&p.mapping);
            pts.extend([&p.x, &p.y]);
        }
        if let Some(c) = &t.chain {
            maps.extend([&c.s1, &c.s2]);
            pts.extend([&c.x, &c.y, &c.z]);
        }
        if let Some(s) = &t.sum {
            maps.extend([&s.s1, &s.s2]);
            pts.extend([&s.x, &s.y, &s.y1, &s.y2]);
        }
        if let Some(e) = &t.extremal {
            sets.extend([&e.l1, &e.l2]);
            pts.push(&e.point);
        }
        if let Some(f) = &t.fuzzy {
            sets.extend([&f.t1, &f.t2]);
            pts.extend([&f.point, &f.covector]);
        }
        for m in maps {
            if !self.mappings.contains_key(m) {
                return Err(at(text, m, unknown("mapping", m)));
            }
        }
        for s in sets {
            if !self.sets.contains_key(s) {
                return Err(at(text, s, unknown("set", s)));
            }
        }
        for p in pts {
            if !self.points.contains_key(p) {
                return Err(at(text, p, unknown("point", p)));
            }
        }
        Ok(())
    }

    fn has_set(&self, name: &str) -> bool {
        name == "omega" || self.sets.contains_key(name) || self.mappings.contains_key(name)
    }

    pub fn mapping(&self, name: &str) -> Result<&PLMultifunction> {
        self.mappings.get(name).ok_or_else(|| unknown("mapping", name))
    }

    pub fn set(&self, name: &str) -> Result<&PLSet> {
        self.sets.get(name).ok_or_else(|| unknown("set", name))
    }

    pub fn point(&self, name: &str) -> Result<&QVector> {
        self.points.get(name).ok_or_else(|| unknown("point", name))
    }

    /// A named set, the graph of a named mapping, or `omega`.
    pub fn any_set(&self, name: &str) -> Result<PLSet> {
        if name == "omega" {
            return Ok(PLSet::single(self.omega.clone()));
        }
        if let Some(s) = self.sets.get(name) {
            return Ok(s.clone());
        }
        Ok(self.mapping(name)?.graph().clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.spec).expect("problem specs always serialize")
    }
}

fn unknown(kind: &'static str, name: &str) -> Error {
    Error::UnknownName {
        kind,
        name: name.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rational::ratio;

    const INST_ID: &str = r#"{
  "name": "inst-id",
  "dims": {"n": 1, "m": 1},
  "omega": {"box": {"lo": [0], "hi": [1]}},
  "mappings": {"S": {"affine": {"rows": [[1]], "shift": [0]}}},
  "points": {"o": [0]},
  "params": {"eps": "1/4"},
  "tasks": {"point": {"mapping": "S", "x": "o", "y": "o"}}
}"#;

    #[test]
    fn parses_identity_fixture() {
        let p = parse_problem(INST_ID).unwrap();
        assert_eq!((p.spec.dims.n, p.spec.dims.m), (1, 1));
        assert_eq!(p.spec.params.eps, Some(Q(ratio(1, 4))));
        let s = p.mapping("S").unwrap();
        assert!(s.contains(&QVector::from_ints(&[1]), &QVector::from_ints(&[1])).unwrap());
        assert!(p.omega.contains(&QVector::from_ints(&[1])).unwrap());
        assert!(!p.omega.contains(&QVector::from_ints(&[2])).unwrap());
    }

    #[test]
    fn zero_denominator_is_located() {
        let text = INST_ID.replace("\"1/4\"", "\"1/0\"");
        match parse_problem(&text) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 7);
                assert!(message.contains("zero denominator"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_mapping_is_named() {
        let text = INST_ID.replace("\"mapping\": \"S\"", "\"mapping\": \"T\"");
        match parse_problem(&text) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 8);
                assert!(message.contains("mapping `T`"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn floats_and_mismatches_are_rejected() {
        let text = INST_ID.replace("\"1/4\"", "0.25");
        assert!(matches!(parse_problem(&text), Err(Error::Parse { .. })));
        let text = INST_ID.replace("\"hi\": [1]", "\"hi\": [1, 2]");
        assert!(matches!(parse_problem(&text), Err(Error::Parse { .. })));
    }

    #[test]
    fn round_trip() {
        let p = parse_problem(INST_ID).unwrap();
        let again = parse_problem(&p.to_json()).unwrap();
        assert_eq!(p.spec, again.spec);
    }
}
