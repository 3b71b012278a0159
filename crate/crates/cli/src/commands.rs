//! One function per subcommand. Each returns the JSON for stdout plus side files.

use nilclose_core::closure::{abelian_nearest_coset, orbit_closure, polymap_closure, render_basis, ClosureReport};
use nilclose_core::equi::{cud_numeric, cud_verdict_polynomial, nonzero_frequencies, NumericVerdict, PolynomialVerdict, DEFAULT_TOL};
use nilclose_core::malcev::weak_malcev_through;
use nilclose_core::subalg::{rational_closure, Subalgebra};
use nilclose_core::verify::{samples_csv, verify_polymap, PredictedModel, SamplePlan, Strategy, Tolerances, VerifyReport};
use serde::Serialize;
use serde_json::Value;

use crate::problem::{CliError, CliResult, Session, StrategyName};

pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_PARAMETER_RANGE: f64 = 1e4;
pub const DEFAULT_HORIZONS: [f64; 3] = [1e2, 1e3, 1e4];
pub const DEFAULT_FREQUENCY_COUNT: usize = 8;

pub struct Output {
    pub json: Value,
    /// `(file name, contents)` pairs written under `--out-dir`.
    pub files: Vec<(String, String)>,
    pub code: i32,
}

impl Output {
    fn json<T: Serialize>(v: &T) -> CliResult<Self> {
        let json = serde_json::to_value(v).map_err(|e| CliError::Io(e.to_string()))?;
        Ok(Output { json, files: Vec::new(), code: 0 })
    }
}

fn subalgebra(s: &Session) -> CliResult<Subalgebra> {
    let (group, space) = s.subalgebra()?;
    Ok(Subalgebra::new(&group, space)?)
}

pub fn closure_orbit(s: &Session) -> CliResult<Output> {
    let report: ClosureReport = orbit_closure(&subalgebra(s)?)?.report();
    Output::json(&report)
}

pub fn closure_polymap(s: &Session) -> CliResult<Output> {
    let (group, f) = s.polymap()?;
    Output::json(&polymap_closure(&f, &group)?.report())
}

#[derive(Serialize)]
struct RationalizeReport {
    format: u32,
    input_basis: Vec<Vec<String>>,
    basis: Vec<Vec<String>>,
    dims: DimsPair,
    whole: bool,
}

#[derive(Serialize)]
struct DimsPair {
    input: usize,
    closed: usize,
}

pub fn rationalize(s: &Session) -> CliResult<Output> {
    let h = subalgebra(s)?;
    let r = rational_closure(&h)?;
    Output::json(&RationalizeReport {
        format: 1,
        input_basis: render_basis(h.basis()),
        basis: render_basis(r.basis()),
        dims: DimsPair { input: h.dim(), closed: r.dim() },
        whole: r.is_whole(),
    })
}

#[derive(Serialize)]
struct MalcevReport {
    format: u32,
    through_rank: usize,
    elements: Vec<Vec<String>>,
}

pub fn malcev(s: &Session) -> CliResult<Output> {
    let b = weak_malcev_through(&subalgebra(s)?)?;
    Output::json(&MalcevReport { format: 1, through_rank: b.through_rank(), elements: render_basis(b.elements()) })
}

#[derive(Serialize)]
struct NearestCoset {
    point: Vec<String>,
    direction: Vec<Vec<String>>,
}

#[derive(Serialize)]
struct EquiReport {
    format: u32,
    numeric: Option<NumericVerdict>,
    polynomial: Option<PolynomialVerdict>,
    nearest_coset: Option<NearestCoset>,
}

pub fn equi(s: &Session) -> CliResult<Output> {
    let opts = &s.problem.options;
    let exact = s.monomial_curve()?;
    let numeric = s.numeric_curve()?;
    if exact.is_none() && numeric.is_none() {
        return Err(CliError::Input("problem file has no \"curve\" or \"monomial_curve\" payload".into()));
    }
    let mut files = Vec::new();
    let numeric_verdict = match &numeric {
        Some(curve) => {
            let ms = match &opts.frequencies {
                Some(ms) => {
                    if let Some(m) = ms.iter().find(|m| m.len() != curve.dim()) {
                        return Err(CliError::Input(format!("frequency {m:?} does not have {} entries", curve.dim())));
                    }
                    ms.clone()
                }
                None => nonzero_frequencies(curve.dim(), opts.frequency_count.unwrap_or(DEFAULT_FREQUENCY_COUNT)),
            };
            let ts = opts.horizons.clone().unwrap_or_else(|| DEFAULT_HORIZONS.to_vec());
            if ts.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
                return Err(CliError::Input("horizons must be positive and finite".into()));
            }
            let report = cud_numeric(curve, &ms, &ts, opts.tol.unwrap_or(DEFAULT_TOL))?;
            files.push(("weyl.csv".to_string(), report.csv()));
            Some(report.verdict)
        }
        None => None,
    };
    let polynomial = match &exact {
        Some(mc) if mc.is_polynomial() => Some(cud_verdict_polynomial(mc)?),
        _ => None,
    };
    let nearest_coset = match &exact {
        Some(mc) => {
            let c = abelian_nearest_coset(mc)?;
            Some(NearestCoset {
                point: c.point.iter().map(ToString::to_string).collect(),
                direction: render_basis(c.direction.basis()),
            })
        }
        None => None,
    };
    let mut out = Output::json(&EquiReport { format: 1, numeric: numeric_verdict, polynomial, nearest_coset })?;
    out.files = files;
    Ok(out)
}

pub fn verify(s: &Session) -> CliResult<Output> {
    let opts = &s.problem.options;
    let (group, f) = s.polymap()?;
    let result = polymap_closure(&f, &group)?;
    let model = PredictedModel::from_result(&result)?;
    let strategy = match opts.strategy.unwrap_or(StrategyName::LowDiscrepancy) {
        StrategyName::Grid => Strategy::Grid,
        StrategyName::LowDiscrepancy => Strategy::LowDiscrepancy,
        StrategyName::Random => Strategy::Random { seed: opts.seed.unwrap_or(0) },
    };
    let samples = opts.samples.unwrap_or(DEFAULT_SAMPLES);
    let d = f.nvars();
    let (lo, hi) = match &opts.parameter_box {
        Some(b) => (b.lo.clone(), b.hi.clone()),
        None => (vec![0.0; d], vec![DEFAULT_PARAMETER_RANGE; d]),
    };
    if lo.len() != d || hi.len() != d {
        return Err(CliError::Input(format!("parameter_box must have {d} entries per bound")));
    }
    let orbit_plan = SamplePlan::new(lo, hi, strategy, samples).map_err(|e| CliError::Input(e.to_string()))?;
    let predicted_plan = model
        .default_plan(strategy, opts.predicted_samples.unwrap_or(samples))
        .map_err(|e| CliError::Input(e.to_string()))?;
    let mut tol = Tolerances::default();
    if let Some(t) = &opts.tolerances {
        tol.containment = t.containment.unwrap_or(tol.containment);
        tol.density = t.density.unwrap_or(tol.density);
        tol.delta = t.delta.unwrap_or(tol.delta);
        tol.min_coverage = t.min_coverage.or(tol.min_coverage);
    }
    if let Some(t) = opts.tol {
        tol.containment = t;
    }
    let (report, orbit): (VerifyReport, _) = verify_polymap(&f, &result, &orbit_plan, &predicted_plan, &tol)?;
    let mut out = Output::json(&report)?;
    out.files.push(("samples.csv".to_string(), samples_csv(f.size(), &orbit)));
    out.code = if report.pass { 0 } else { 3 };
    Ok(out)
}
