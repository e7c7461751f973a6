//! Problem files and JSON reports.
//!
//! All numbers are rational strings such as `"3/4"`; plain JSON integers are
//! accepted as well. Problems may give a lattice basis; everything is
//! converted to lattice coordinates on load and converted back for output.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::domains::{DomainKind, DomainPolicy};
use crate::error::{Error, Result};
use crate::linalg::{format_rational, is_integral, parse_rational, GeometryContext, RatMat, RatVec, Rational};
use crate::mu::{gram_from_group, LocalFormulaReport};
use crate::polytope::Polytope;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Options {
    pub t: Option<u64>,
    pub t_max: Option<u64>,
    pub seed: Option<u64>,
}

/// A parsed problem, in lattice coordinates.
#[derive(Clone, Debug)]
pub struct Problem {
    pub ctx: GeometryContext,
    pub polytope: Polytope,
    pub policy: DomainPolicy,
    pub options: Options,
    /// Lattice basis as columns, for converting results back.
    pub basis: RatMat,
    /// Group generators in lattice coordinates, when the Gram matrix was
    /// given by a group.
    pub group: Option<Vec<RatMat>>,
}

impl Problem {
    /// Ambient coordinates of a lattice-coordinate point.
    pub fn to_ambient(&self, y: &[Rational]) -> RatVec {
        self.basis.mul_vec(y)
    }
}

pub fn parse_problem(path: &Path) -> Result<Problem> {
    let text = std::fs::read_to_string(path)?;
    parse_problem_str(&text)
}

pub fn parse_problem_str(text: &str) -> Result<Problem> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    let obj = v.as_object().ok_or_else(|| Error::input("$", "expected an object"))?;
    let n = obj
        .get("dim")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::input("dim", "expected a positive integer"))? as usize;
    if n == 0 {
        return Err(Error::input("dim", "expected a positive integer"));
    }
    let basis = match obj.get("basis") {
        None | Some(Value::Null) => RatMat::identity(n),
        Some(b) => {
            let cols = parse_vectors(b, "basis", n)?;
            if cols.len() != n {
                return Err(Error::input("basis", format!("expected {n} vectors")));
            }
            let m = RatMat::from_cols(n, &cols);
            if m.det() == Rational::from_integer(0.into()) {
                return Err(Error::input("basis", "vectors are linearly dependent"));
            }
            m
        }
    };
    let binv = basis.inverse().expect("checked nonsingular");
    let mut group = None;
    let gram = match obj.get("gram") {
        None | Some(Value::Null) => RatMat::identity(n),
        Some(Value::Object(g)) => {
            let gens = g.get("group").ok_or_else(|| Error::input("gram", "expected a matrix or {\"group\": [...]}"))?;
            let list = gens.as_array().ok_or_else(|| Error::input("gram.group", "expected a list of matrices"))?;
            let mats = list
                .iter()
                .enumerate()
                .map(|(i, m)| parse_matrix(m, &format!("gram.group[{i}]"), n))
                .collect::<Result<Vec<_>>>()?;
            let g = gram_from_group(n, &mats).map_err(|e| Error::input("gram.group", e.to_string()))?;
            group = Some(mats);
            // group generators already act on lattice coordinates
            basis.transpose().inverse().expect("nonsingular").mul(&g).mul(&binv)
        }
        Some(m) => parse_matrix(m, "gram", n)?,
    };
    let ambient = GeometryContext::new(basis.clone(), gram).map_err(|e| Error::input("gram", e.to_string()))?;
    let ctx = ambient.lattice_coordinates();

    let raw = parse_vectors(obj.get("vertices").ok_or_else(|| Error::input("vertices", "missing"))?, "vertices", n)?;
    if raw.is_empty() {
        return Err(Error::input("vertices", "expected at least one vertex"));
    }
    let mut local = Vec::with_capacity(raw.len());
    for (i, x) in raw.iter().enumerate() {
        let y = binv.mul_vec(x);
        if !is_integral(&y) {
            return Err(Error::input(format!("vertices[{i}]"), "non-lattice vertex"));
        }
        if !local.contains(&y) {
            local.push(y);
        }
    }
    let polytope = Polytope::new(n, &local)?;

    let policy = match obj.get("policy") {
        None | Some(Value::Null) => DomainPolicy::voronoi(),
        Some(Value::String(s)) => DomainPolicy { kind: parse_kind(s, "policy")?, shift: None },
        Some(Value::Object(p)) => {
            let kind = match p.get("kind") {
                None => DomainKind::Voronoi,
                Some(Value::String(s)) => parse_kind(s, "policy.kind")?,
                Some(_) => return Err(Error::input("policy.kind", "expected \"voronoi\" or \"box\"")),
            };
            let shift = match p.get("shift") {
                None | Some(Value::Null) => None,
                Some(s) => Some(binv.mul_vec(&parse_vector(s, "policy.shift", n)?)),
            };
            DomainPolicy { kind, shift }
        }
        Some(_) => return Err(Error::input("policy", "expected a string or an object")),
    };

    let mut options = Options::default();
    if let Some(o) = obj.get("options") {
        let o = o.as_object().ok_or_else(|| Error::input("options", "expected an object"))?;
        let get = |k: &str| -> Result<Option<u64>> {
            match o.get(k) {
                None | Some(Value::Null) => Ok(None),
                Some(v) => v.as_u64().map(Some).ok_or_else(|| Error::input(format!("options.{k}"), "expected a nonnegative integer")),
            }
        };
        options.t = get("t")?;
        options.t_max = get("t_max")?;
        options.seed = get("seed")?;
    }
    Ok(Problem { ctx, polytope, policy, options, basis, group })
}

fn parse_kind(s: &str, field: &str) -> Result<DomainKind> {
    match s {
        "voronoi" => Ok(DomainKind::Voronoi),
        "box" => Ok(DomainKind::Box),
        _ => Err(Error::input(field, format!("unknown policy {s:?}"))),
    }
}

fn parse_number(v: &Value, field: &str) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s).map_err(|_| Error::input(field, format!("malformed rational {s:?}"))),
        Value::Number(x) => match x.as_i64() {
            Some(i) => Ok(Rational::from_integer(i.into())),
            None => Err(Error::input(field, "non-integer JSON number; write rationals as strings")),
        },
        _ => Err(Error::input(field, "expected a rational string")),
    }
}

/// A vector, either as a list or as a comma-separated string like `"1/2, 0"`.
fn parse_vector(v: &Value, field: &str, n: usize) -> Result<RatVec> {
    let out: RatVec = match v {
        Value::Array(xs) => {
            xs.iter().enumerate().map(|(i, x)| parse_number(x, &format!("{field}[{i}]"))).collect::<Result<_>>()?
        }
        Value::String(s) => s
            .split(',')
            .enumerate()
            .map(|(i, p)| {
                parse_rational(p.trim()).map_err(|_| Error::input(format!("{field}[{i}]"), format!("malformed rational {p:?}")))
            })
            .collect::<Result<_>>()?,
        _ => return Err(Error::input(field, "expected a vector")),
    };
    if out.len() != n {
        return Err(Error::input(field, format!("expected {n} entries, found {}", out.len())));
    }
    Ok(out)
}

fn parse_vectors(v: &Value, field: &str, n: usize) -> Result<Vec<RatVec>> {
    let xs = v.as_array().ok_or_else(|| Error::input(field, "expected a list of vectors"))?;
    xs.iter().enumerate().map(|(i, x)| parse_vector(x, &format!("{field}[{i}]"), n)).collect()
}

fn parse_matrix(v: &Value, field: &str, n: usize) -> Result<RatMat> {
    let rows = parse_vectors(v, field, n)?;
    if rows.len() != n {
        return Err(Error::input(field, format!("expected {n} rows")));
    }
    Ok(RatMat::from_rows(&rows))
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

fn parse_strings(v: &[String]) -> Result<RatVec> {
    v.iter().map(|s| parse_rational(s)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceJson {
    pub dim: usize,
    pub vertices: Vec<Vec<String>>,
    pub mu: String,
    pub vol: String,
    pub contribution: String,
}

/// Serialized local-formula report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportJson {
    pub faces: Vec<FaceJson>,
    /// `e_0, e_1, …`
    pub coefficients: Vec<String>,
    pub policy: String,
    pub gram: Vec<Vec<String>>,
}

impl ReportJson {
    pub fn from_report(problem: &Problem, report: &LocalFormulaReport) -> Self {
        let faces = report
            .faces
            .iter()
            .map(|f| FaceJson {
                dim: f.dim,
                vertices: f.vertices.iter().map(|v| strings(&problem.to_ambient(v))).collect(),
                mu: format_rational(&f.mu),
                vol: format_rational(&f.vol),
                contribution: format_rational(&f.contribution),
            })
            .collect();
        ReportJson {
            faces,
            coefficients: strings(&report.coefficients),
            policy: problem.policy.label(),
            gram: problem.ctx.gram.rows_vec().iter().map(|r| strings(r)).collect(),
        }
    }

    pub fn coefficients(&self) -> Result<RatVec> {
        parse_strings(&self.coefficients)
    }

    /// μ values by face, in order.
    pub fn mu_values(&self) -> Result<RatVec> {
        self.faces.iter().map(|f| parse_rational(&f.mu)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EhrhartJson {
    /// `e_0, e_1, …`
    pub coefficients: Vec<String>,
    /// `|tP ∩ Λ|` for `t = 0..=d`.
    pub counts: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyJson {
    pub ok: bool,
    pub local_formula: Vec<String>,
    pub ehrhart: Vec<String>,
    /// Indices of mismatching coefficients.
    pub mismatches: Vec<usize>,
}

impl VerifyJson {
    pub fn new(local: &[Rational], ehrhart: &[Rational]) -> Self {
        let m = local.len().max(ehrhart.len());
        let mismatches = (0..m).filter(|&i| local.get(i) != ehrhart.get(i)).collect::<Vec<_>>();
        VerifyJson { ok: mismatches.is_empty(), local_formula: strings(local), ehrhart: strings(ehrhart), mismatches }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilingJson {
    pub ok: bool,
    pub t: u64,
    pub pieces: usize,
    /// Pieces per face dimension.
    pub pieces_by_dim: Vec<usize>,
    pub failure: Option<String>,
    pub witness: Option<Vec<String>>,
}

pub fn format_vector(v: &[Rational]) -> Vec<String> {
    strings(v)
}
