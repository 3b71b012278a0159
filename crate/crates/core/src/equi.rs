//! Weyl sums along curves in the torus and c.u.d. verdicts.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::closure::{torus_curve_closure, MonomialCurve};
use crate::error::{Error, Result};
use crate::expr::{parse, Compiled, Context, Expr};

/// Evaluation budget per `(m, T)` cell.
pub const EVAL_BUDGET: u64 = 10_000_000;
pub const DEFAULT_TOL: f64 = 1e-6;
/// Numeric verdict bar on `|W(m, T_max)|`.
pub const DECAY_THRESHOLD: f64 = 0.02;

const MAX_PANEL_PHASE: f64 = PI / 4.0;
const MAX_DEPTH: u32 = 40;

/// Curve `t -> R^n` for `t >= 0`, with its symbolic derivative.
#[derive(Clone, Debug)]
pub struct NumericCurve {
    sources: Vec<Expr>,
    components: Vec<Compiled>,
    derivatives: Vec<Compiled>,
}

impl NumericCurve {
    /// Components in the expression grammar in the variable `t`; `ln1p(t)` is allowed.
    pub fn parse(components: &[&str], theta: f64) -> Result<Self> {
        let sources = components
            .iter()
            .map(|s| parse(s, Context::NumericCurve))
            .collect::<Result<Vec<_>>>()?;
        Self::from_exprs(sources, theta)
    }

    pub fn from_exprs(sources: Vec<Expr>, theta: f64) -> Result<Self> {
        if sources.is_empty() {
            return Err(Error::InvalidCurve("curve has no components".into()));
        }
        let components = sources
            .iter()
            .map(|e| e.compile(theta, &["t"]))
            .collect::<Result<Vec<_>>>()?;
        let derivatives = components.iter().map(|c| c.derivative(0)).collect();
        Ok(NumericCurve { sources, components, derivatives })
    }

    /// Polynomial curve `sum_a c_a t^a` with nonnegative integer exponents.
    pub fn from_monomial(sigma: &MonomialCurve) -> Result<Self> {
        if !sigma.is_polynomial() {
            return Err(Error::NonPolynomialCurve);
        }
        let components = (0..sigma.dim())
            .map(|i| {
                let mut acc = Compiled::Const(0.0);
                for (a, c) in sigma.terms() {
                    let k = a.to_integer().to_string().parse::<i32>().map_err(|_| Error::NonPolynomialCurve)?;
                    let term = Compiled::Mul(
                        Box::new(Compiled::Const(c[i].to_f64())),
                        Box::new(Compiled::Pow(Box::new(Compiled::Var(0)), k)),
                    );
                    acc = Compiled::Add(Box::new(acc), Box::new(term));
                }
                Ok(acc.simplify())
            })
            .collect::<Result<Vec<_>>>()?;
        let derivatives = components.iter().map(|c| c.derivative(0)).collect();
        Ok(NumericCurve { sources: Vec::new(), components, derivatives })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn sources(&self) -> &[Expr] {
        &self.sources
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        self.components.iter().map(|c| c.eval(&[t])).collect()
    }

    pub fn derivative(&self, t: f64) -> Vec<f64> {
        self.derivatives.iter().map(|c| c.eval(&[t])).collect()
    }

    /// `<m, sigma(t)>`.
    pub fn phase(&self, m: &[i64], t: f64) -> f64 {
        dot(m, &self.components, t)
    }

    pub fn phase_derivative(&self, m: &[i64], t: f64) -> f64 {
        dot(m, &self.derivatives, t)
    }
}

fn dot(m: &[i64], cs: &[Compiled], t: f64) -> f64 {
    m.iter()
        .zip(cs)
        .filter(|(&k, _)| k != 0)
        .map(|(&k, c)| k as f64 * c.eval(&[t]))
        .sum()
}

struct Integrator<'a> {
    curve: &'a NumericCurve,
    m: &'a [i64],
    evals: u64,
    error: f64,
}

impl Integrator<'_> {
    fn f(&mut self, t: f64) -> Complex64 {
        self.evals += 1;
        Complex64::from_polar(1.0, 2.0 * PI * self.curve.phase(self.m, t))
    }

    fn simpson(a: f64, b: f64, fa: Complex64, fm: Complex64, fb: Complex64) -> Complex64 {
        (fa + fm * 4.0 + fb) * ((b - a) / 6.0)
    }

    /// Richardson-extrapolated adaptive Simpson on `[a, b]` with absolute tolerance `eps`.
    #[allow(clippy::too_many_arguments)]
    fn adapt(&mut self, a: f64, b: f64, fa: Complex64, fm: Complex64, fb: Complex64, whole: Complex64, eps: f64, depth: u32) -> Result<Complex64> {
        if self.evals > EVAL_BUDGET {
            return Err(Error::Quadrature { budget: EVAL_BUDGET, achieved: self.error });
        }
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = self.f(lm);
        let frm = self.f(rm);
        let left = Self::simpson(a, m, fa, flm, fm);
        let right = Self::simpson(m, b, fm, frm, fb);
        let diff = left + right - whole;
        let est = diff.norm() / 15.0;
        if (est <= eps && depth > 0) || depth >= MAX_DEPTH {
            if depth >= MAX_DEPTH {
                self.error += est;
            }
            return Ok(left + right + diff / 15.0);
        }
        Ok(self.adapt(a, m, fa, flm, fm, left, eps / 2.0, depth + 1)? + self.adapt(m, b, fm, frm, fb, right, eps / 2.0, depth + 1)?)
    }
}

/// `(1/T) int_0^T exp(2 pi i <m, sigma(t)>) dt` to absolute error `tol`.
pub fn weyl_sum(curve: &NumericCurve, m: &[i64], t_max: f64, tol: f64) -> Result<Complex64> {
    if m.len() != curve.dim() {
        return Err(Error::DimensionMismatch { expected: curve.dim(), got: m.len() });
    }
    if m.iter().all(|&k| k == 0) {
        return Err(Error::InvalidCurve("frequency vector must be nonzero".into()));
    }
    if !(t_max > 0.0 && t_max.is_finite()) || !(tol > 0.0) {
        return Err(Error::InvalidCurve("need T > 0 and tol > 0".into()));
    }
    let mut q = Integrator { curve, m, evals: 0, error: 0.0 };
    // Error density per unit length keeps the total integral error below tol * T.
    let density = tol;
    let mut total = Complex64::new(0.0, 0.0);
    let mut a = 0.0;
    let mut fa = q.f(a);
    while a < t_max {
        let speed = 2.0 * PI * curve.phase_derivative(m, a).abs();
        let mut h = if speed > 0.0 { MAX_PANEL_PHASE / speed } else { t_max };
        h = h.min(t_max - a).min(1.0 + a);
        // Shrink until the phase change across the panel is below the bar at both ends.
        loop {
            let b = a + h;
            let dphase = 2.0 * PI * (curve.phase(m, b) - curve.phase(m, a)).abs();
            let end_speed = 2.0 * PI * curve.phase_derivative(m, b).abs();
            if (dphase <= MAX_PANEL_PHASE && end_speed * h <= 2.0 * MAX_PANEL_PHASE) || h < 1e-12 {
                break;
            }
            h *= 0.5;
        }
        let b = if t_max - (a + h) < 1e-12 * t_max { t_max } else { a + h };
        let fm = q.f(0.5 * (a + b));
        let fb = q.f(b);
        let whole = Integrator::simpson(a, b, fa, fm, fb);
        total += q.adapt(a, b, fa, fm, fb, whole, density * (b - a), 0)?;
        a = b;
        fa = fb;
        if q.evals > EVAL_BUDGET {
            return Err(Error::Quadrature { budget: EVAL_BUDGET, achieved: q.error / t_max });
        }
    }
    if q.error / t_max > tol {
        return Err(Error::Quadrature { budget: EVAL_BUDGET, achieved: q.error / t_max });
    }
    Ok(total / t_max)
}

/// Exact verdict for polynomial curves, where c.u.d., density and the
/// vanishing of all Weyl limits coincide.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolynomialVerdict {
    pub cud: bool,
    pub dense: bool,
    pub witnesses: Vec<Vec<String>>,
}

pub fn cud_verdict_polynomial(sigma: &MonomialCurve) -> Result<PolynomialVerdict> {
    let closure = torus_curve_closure(sigma)?;
    let witnesses = closure.witnesses();
    Ok(PolynomialVerdict { cud: closure.dense, dense: closure.dense, witnesses })
}

pub fn witness_integers(v: &PolynomialVerdict) -> Vec<Vec<BigInt>> {
    v.witnesses.iter().map(|w| w.iter().map(|x| x.parse().expect("integer witness")).collect()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeylRow {
    pub m: Vec<i64>,
    pub t: f64,
    pub w: Option<(f64, f64)>,
    pub error: Option<String>,
}

impl WeylRow {
    pub fn modulus(&self) -> Option<f64> {
        self.w.map(|(re, im)| re.hypot(im))
    }
}

/// `t <m, sigma'(t)>` at one sample point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeRow {
    pub m: Vec<i64>,
    pub t: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumericVerdict {
    pub format: u32,
    pub cud_consistent: bool,
    pub decay_threshold: f64,
    pub tol: f64,
    /// Frequencies whose `t <m, sigma'>` probe looks bounded.
    pub bounded_probes: Vec<Vec<i64>>,
    pub probe: Vec<ProbeRow>,
    pub failed_cells: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeylReport {
    pub rows: Vec<WeylRow>,
    pub verdict: NumericVerdict,
}

impl WeylReport {
    pub fn csv(&self) -> String {
        let mut out = String::from("m,T,re,im,abs\n");
        for r in &self.rows {
            let m: Vec<String> = r.m.iter().map(i64::to_string).collect();
            match r.w {
                Some((re, im)) => {
                    let _ = writeln!(out, "{},{},{:e},{:e},{:e}", m.join(";"), r.t, re, im, re.hypot(im));
                }
                None => {
                    let _ = writeln!(out, "{},{},,,", m.join(";"), r.t);
                }
            }
        }
        out
    }
}

/// Tabulate Weyl sums over `ms x ts` and give the heuristic verdict.
pub fn cud_numeric(curve: &NumericCurve, ms: &[Vec<i64>], ts: &[f64], tol: f64) -> Result<WeylReport> {
    if ms.is_empty() || ts.is_empty() {
        return Err(Error::InvalidCurve("need at least one frequency and one horizon".into()));
    }
    let mut ts = ts.to_vec();
    ts.sort_by(f64::total_cmp);
    let cells: Vec<(Vec<i64>, f64)> = ms.iter().flat_map(|m| ts.iter().map(move |&t| (m.clone(), t))).collect();
    let rows: Vec<WeylRow> = cells
        .par_iter()
        .map(|(m, t)| match weyl_sum(curve, m, *t, tol) {
            Ok(w) => WeylRow { m: m.clone(), t: *t, w: Some((w.re, w.im)), error: None },
            Err(e) => WeylRow { m: m.clone(), t: *t, w: None, error: Some(e.to_string()) },
        })
        .collect();
    let failed_cells = rows.iter().filter(|r| r.w.is_none()).count();

    let mut cud_consistent = failed_cells == 0;
    for chunk in rows.chunks(ts.len()) {
        let mods: Vec<f64> = chunk.iter().filter_map(WeylRow::modulus).collect();
        if mods.len() != chunk.len() {
            continue;
        }
        if mods[mods.len() - 1] >= DECAY_THRESHOLD {
            cud_consistent = false;
        }
        // Decreasing up to quadrature noise, or already below the bar.
        for w in mods.windows(2) {
            if w[1] > w[0] + tol && w[0].max(w[1]) >= DECAY_THRESHOLD {
                cud_consistent = false;
            }
        }
    }

    let last = ts[ts.len() - 1].max(1.0);
    let kmax = last.log10().floor() as i32;
    let mut probe = Vec::new();
    let mut bounded_probes = Vec::new();
    for m in ms {
        let vals: Vec<f64> = (0..=kmax)
            .map(|k| {
                let t = 10f64.powi(k);
                let value = t * curve.phase_derivative(m, t);
                probe.push(ProbeRow { m: m.clone(), t, value });
                value.abs()
            })
            .collect();
        let half = vals.len() / 2;
        let early = vals[..half.max(1)].iter().cloned().fold(0.0, f64::max);
        let late = vals[half..].iter().cloned().fold(0.0, f64::max);
        if late <= 2.0 * early + 1e-12 {
            bounded_probes.push(m.clone());
        }
    }

    Ok(WeylReport {
        rows,
        verdict: NumericVerdict {
            format: 1,
            cud_consistent,
            decay_threshold: DECAY_THRESHOLD,
            tol,
            bounded_probes,
            probe,
            failed_cells,
        },
    })
}

/// The first `count` nonzero integer vectors ordered by Euclidean norm, then lexicographically.
pub fn nonzero_frequencies(dim: usize, count: usize) -> Vec<Vec<i64>> {
    let mut r = 1i64;
    loop {
        let side = (2 * r + 1) as usize;
        let mut all: Vec<Vec<i64>> = Vec::new();
        for idx in 0..side.pow(dim as u32) {
            let mut v = Vec::with_capacity(dim);
            let mut k = idx;
            for _ in 0..dim {
                v.push((k % side) as i64 - r);
                k /= side;
            }
            if v.iter().any(|&x| x != 0) {
                all.push(v);
            }
        }
        all.sort_by_key(|v| (v.iter().map(|x| x * x).sum::<i64>(), v.clone()));
        // Everything of norm at most r is inside the box, so the prefix is final.
        let complete = all.iter().take_while(|v| v.iter().map(|x| x * x).sum::<i64>() <= r * r).count();
        if complete >= count {
            all.truncate(count);
            return all;
        }
        r += 1;
    }
}
