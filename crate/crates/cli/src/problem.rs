//! Problem files and their conversion into core objects.

use std::fmt;

use nilclose_core::closure::MonomialCurve;
use nilclose_core::equi::NumericCurve;
use nilclose_core::expr::{self, Context, Expr};
use nilclose_core::field::{parse_rational, Field, FieldSpec, Rational};
use nilclose_core::linalg::{Subspace, Vector};
use nilclose_core::matrix::{position_count, size_for_positions, Matrix};
use nilclose_core::nilcore::{GroupSpec, PolyMatrix, Shape};
use nilclose_core::poly::Poly;
use nilclose_core::Error;
use serde::Deserialize;

/// Failure of a command, carrying its exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Malformed input: exit 2.
    Input(String),
    /// Mathematical precondition failed: exit 4.
    Math(String),
    /// Filesystem trouble: exit 1.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Math(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Math(m) => write!(f, "precondition failed: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::BadRational(_) => CliError::Input(e.to_string()),
            _ => CliError::Math(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default)]
    pub format: Option<u32>,
    /// Free text for humans; ignored by every command.
    #[serde(default)]
    #[allow(dead_code)]
    pub description: Option<String>,
    #[serde(default)]
    pub field: Option<FieldSpec>,
    #[serde(default)]
    pub group: Option<GroupInput>,
    #[serde(default)]
    pub map: Option<MapInput>,
    #[serde(default)]
    pub subalgebra: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub curve: Option<Vec<String>>,
    #[serde(default)]
    pub monomial_curve: Option<MonomialCurveInput>,
    #[serde(default)]
    pub options: Options,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GroupInput {
    Named(GroupName),
    Explicit(ExplicitGroup),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupName {
    FullUt,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitGroup {
    pub n: usize,
    pub algebra_basis: Vec<Vec<String>>,
}

/// Polynomial map `R^d -> UT(n)`, either as a matrix or as `exp(X_1) exp(X_2) ...`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapInput {
    pub vars: Vec<String>,
    #[serde(default)]
    pub matrix: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub exp: Option<Vec<Vec<Vec<String>>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialCurveInput {
    pub dim: usize,
    pub terms: Vec<MonomialTerm>,
}

/// `coefficient * t^exponent`; the exponent is a rational string.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialTerm {
    pub exponent: String,
    pub coefficient: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyName {
    Grid,
    LowDiscrepancy,
    Random,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxInput {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesInput {
    pub containment: Option<f64>,
    pub density: Option<f64>,
    pub delta: Option<f64>,
    pub min_coverage: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Options {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub samples: Option<usize>,
    pub strategy: Option<StrategyName>,
    pub parameter_box: Option<BoxInput>,
    pub predicted_samples: Option<usize>,
    pub tolerances: Option<TolerancesInput>,
    pub frequencies: Option<Vec<Vec<i64>>>,
    pub frequency_count: Option<usize>,
    pub horizons: Option<Vec<f64>>,
}

/// A parsed problem file together with its source text, used to point at
/// the offending string when an expression fails to parse.
pub struct Session<'a> {
    text: &'a str,
    pub problem: ProblemFile,
    pub field: Field,
}

impl<'a> Session<'a> {
    pub fn new(text: &'a str) -> CliResult<Self> {
        let problem: ProblemFile = serde_json::from_str(text).map_err(|e| CliError::Input(e.to_string()))?;
        if let Some(v) = problem.format {
            if v != 1 {
                return Err(CliError::Input(format!("unsupported format {v}, expected 1")));
            }
        }
        let spec = problem.field.clone().unwrap_or_else(FieldSpec::rationals);
        let field = Field::new(&spec)?;
        Ok(Session { text, problem, field })
    }

    fn located(&self, src: &str, e: Error) -> CliError {
        match e {
            Error::Parse { pos, msg } => match locate(self.text, src, pos) {
                Some((line, col)) => CliError::Input(format!("line {line} column {col}: {msg} in {src:?}")),
                None => CliError::Input(format!("{msg} at offset {pos} of {src:?}")),
            },
            other => other.into(),
        }
    }

    pub fn vector(&self, v: &[String], len: usize) -> CliResult<Vector> {
        if v.len() != len {
            return Err(CliError::Input(format!("vector has {} entries, expected {len}", v.len())));
        }
        v.iter().map(|s| expr::parse_scalar(s, &self.field).map_err(|e| self.located(s, e))).collect()
    }

    fn rational(&self, s: &str) -> CliResult<Rational> {
        parse_rational(s).map_err(|_| {
            let at = locate(self.text, s, 0).map(|(l, c)| format!("line {l} column {c}: ")).unwrap_or_default();
            CliError::Input(format!("{at}malformed rational {s:?}"))
        })
    }

    /// Ambient group; `n` comes from the payload when the group is `"full_ut"`.
    pub fn group(&self, n: usize) -> CliResult<GroupSpec> {
        match &self.problem.group {
            None | Some(GroupInput::Named(GroupName::FullUt)) => Ok(GroupSpec::full(&self.field, n)),
            Some(GroupInput::Explicit(g)) => {
                if g.n != n {
                    return Err(CliError::Input(format!("group has n = {}, payload has n = {n}", g.n)));
                }
                let m = position_count(n);
                let vs = g.algebra_basis.iter().map(|v| self.vector(v, m)).collect::<CliResult<Vec<_>>>()?;
                Ok(GroupSpec::new(n, Subspace::span(&self.field, m, &vs)?)?)
            }
        }
    }

    /// The `subalgebra` payload as a group and the spanned subspace.
    pub fn subalgebra(&self) -> CliResult<(GroupSpec, Subspace)> {
        let vs = self.problem.subalgebra.as_ref().ok_or_else(|| missing("subalgebra"))?;
        let n = match (vs.first(), &self.problem.group) {
            (_, Some(GroupInput::Explicit(g))) => g.n,
            (Some(v), _) => size_for_positions(v.len())
                .filter(|&n| n >= 2)
                .ok_or_else(|| CliError::Input(format!("vector length {} is not n(n-1)/2 for any n >= 2", v.len())))?,
            (None, _) => return Err(CliError::Input("subalgebra needs at least one vector or an explicit group".into())),
        };
        let m = position_count(n);
        let vs = vs.iter().map(|v| self.vector(v, m)).collect::<CliResult<Vec<_>>>()?;
        let group = self.group(n)?;
        Ok((group, Subspace::span(&self.field, m, &vs)?))
    }

    pub fn polymap(&self) -> CliResult<(GroupSpec, PolyMatrix)> {
        let map = self.problem.map.as_ref().ok_or_else(|| missing("map"))?;
        for v in &map.vars {
            match expr::parse(v, Context::Polynomial) {
                Ok(Expr::Var(name)) if &name == v => {}
                _ => return Err(CliError::Input(format!("{v:?} is not a variable name (x1, x2, ..., t or s)"))),
            }
        }
        let names: Vec<&str> = map.vars.iter().map(String::as_str).collect();
        let f = match (&map.matrix, &map.exp) {
            (Some(m), None) => PolyMatrix::new(self.poly_matrix(m, &names)?, Shape::Unipotent)?,
            (None, Some(factors)) if !factors.is_empty() => {
                let fs = factors
                    .iter()
                    .map(|m| Ok(PolyMatrix::new(self.poly_matrix(m, &names)?, Shape::Nilpotent)?))
                    .collect::<CliResult<Vec<_>>>()?;
                PolyMatrix::exp_product(&fs)?
            }
            _ => return Err(CliError::Input("map needs exactly one of \"matrix\" or a nonempty \"exp\"".into())),
        };
        Ok((self.group(f.size())?, f))
    }

    fn poly_matrix(&self, rows: &[Vec<String>], names: &[&str]) -> CliResult<Matrix<Poly>> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(CliError::Input("map matrix must be square and nonempty".into()));
        }
        let data = rows
            .iter()
            .flatten()
            .map(|s| expr::parse_poly(s, &self.field, names).map_err(|e| self.located(s, e)))
            .collect::<CliResult<Vec<_>>>()?;
        Ok(Matrix::from_data(n, data))
    }

    /// The exact curve: the `monomial_curve` payload, or a polynomial `curve`.
    pub fn monomial_curve(&self) -> CliResult<Option<MonomialCurve>> {
        if let Some(mc) = &self.problem.monomial_curve {
            let terms = mc
                .terms
                .iter()
                .map(|t| Ok((self.rational(&t.exponent)?, self.vector(&t.coefficient, mc.dim)?)))
                .collect::<CliResult<Vec<_>>>()?;
            return Ok(Some(MonomialCurve::new(&self.field, mc.dim, terms)?));
        }
        let Some(comps) = &self.problem.curve else { return Ok(None) };
        let mut polys = Vec::new();
        for s in comps {
            let e = expr::parse(s, Context::NumericCurve).map_err(|e| self.located(s, e))?;
            check_curve_vars(&e, s)?;
            match e.to_poly(&self.field, &["t"]) {
                Ok(p) => polys.push(p),
                Err(_) => return Ok(None),
            }
        }
        let dim = polys.len();
        let mut exponents: Vec<u32> = polys.iter().flat_map(|p| p.terms().keys().map(|e| e[0])).collect();
        exponents.sort_unstable();
        exponents.dedup();
        let terms = exponents
            .into_iter()
            .map(|a| {
                let key = vec![a];
                let v = polys.iter().map(|p| p.terms().get(&key).cloned().unwrap_or_else(|| self.field.zero())).collect();
                (Rational::from_integer(a.into()), v)
            })
            .collect();
        Ok(Some(MonomialCurve::new(&self.field, dim, terms)?))
    }

    /// Float curve for Weyl sums, when one can be built.
    pub fn numeric_curve(&self) -> CliResult<Option<NumericCurve>> {
        if let Some(comps) = &self.problem.curve {
            let mut exprs = Vec::new();
            for s in comps {
                let e = expr::parse(s, Context::NumericCurve).map_err(|e| self.located(s, e))?;
                check_curve_vars(&e, s)?;
                exprs.push(e);
            }
            return Ok(Some(NumericCurve::from_exprs(exprs, self.field.theta_f64())?));
        }
        match self.monomial_curve()? {
            Some(mc) if mc.is_polynomial() => Ok(Some(NumericCurve::from_monomial(&mc)?)),
            _ => Ok(None),
        }
    }
}

fn check_curve_vars(e: &Expr, src: &str) -> CliResult<()> {
    match e.vars().into_iter().find(|v| v != "t") {
        Some(v) => Err(CliError::Input(format!("curve component {src:?} uses {v:?}; curves are functions of t"))),
        None => Ok(()),
    }
}

fn missing(what: &str) -> CliError {
    CliError::Input(format!("problem file has no \"{what}\" payload"))
}

/// Line and column (1-based) of byte `pos` inside the first JSON string literal equal to `src`.
pub fn locate(text: &str, src: &str, pos: usize) -> Option<(usize, usize)> {
    let lit = serde_json::to_string(src).ok()?;
    let at = text.find(&lit)? + 1 + pos.min(src.len());
    let before = &text[..at];
    let line = before.matches('\n').count() + 1;
    let col = before[before.rfind('\n').map_or(0, |i| i + 1)..].chars().count() + 1;
    Some((line, col))
}
