//! Numerical comparison of sampled orbits with predicted closures in `G / Gamma`.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::closure::{distance_to_span, orthonormal, ClosureResult};
use crate::error::{Error, Result};
use crate::linalg::Subspace;
use crate::malcev::{reduce_mod_lattice, group_support, LatticeBall, ReducedPoint};
use crate::matrix::{positions, position_index, Matrix};
use crate::nilcore::{GroupSpec, NilMatrix, PolyMatrix, Shape};

/// Matrix entries beyond this are reported as overflow.
pub const OVERFLOW_LIMIT: f64 = 1e300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Grid,
    LowDiscrepancy,
    Random { seed: u64 },
}

/// Parameter box and point-selection rule.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePlan {
    lo: Vec<f64>,
    hi: Vec<f64>,
    strategy: Strategy,
    count: usize,
}

impl SamplePlan {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, strategy: Strategy, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidPlan("sample count must be positive".into()));
        }
        if lo.len() != hi.len() {
            return Err(Error::InvalidPlan("box bounds differ in dimension".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidPlan("empty or unbounded box".into()));
        }
        Ok(SamplePlan { lo, hi, strategy, count })
    }

    pub fn cube(dim: usize, lo: f64, hi: f64, strategy: Strategy, count: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim], strategy, count)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn with_count(&self, count: usize) -> Result<Self> {
        Self::new(self.lo.clone(), self.hi.clone(), self.strategy, count)
    }

    /// Parameter points. A grid in dimension `d > 1` uses `floor(N^(1/d))` points per axis.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        if d == 0 {
            return vec![Vec::new(); self.count];
        }
        let unit: Vec<Vec<f64>> = match self.strategy {
            Strategy::Grid => {
                let k = if d == 1 { self.count } else { ((self.count as f64).powf(1.0 / d as f64) + 1e-9).floor().max(1.0) as usize };
                let step = |i: usize| if k == 1 { 0.0 } else { i as f64 / (k - 1) as f64 };
                (0..k.pow(d as u32))
                    .map(|mut idx| {
                        (0..d)
                            .map(|_| {
                                let i = idx % k;
                                idx /= k;
                                step(i)
                            })
                            .collect()
                    })
                    .collect()
            }
            Strategy::LowDiscrepancy => {
                let bases = primes(d);
                (1..=self.count).map(|i| bases.iter().map(|&b| radical_inverse(i, b)).collect()).collect()
            }
            Strategy::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..self.count).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect()
            }
        };
        unit.into_iter()
            .map(|u| u.iter().enumerate().map(|(i, x)| self.lo[i] + x * (self.hi[i] - self.lo[i])).collect())
            .collect()
    }
}

fn primes(k: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(k);
    let mut c = 2u64;
    while out.len() < k {
        if out.iter().all(|p| !c.is_multiple_of(*p)) {
            out.push(c);
        }
        c += 1;
    }
    out
}

/// Van der Corput radical inverse of `i` in base `b`.
fn radical_inverse(mut i: usize, b: u64) -> f64 {
    let mut inv = 1.0 / b as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i as u64 % b) as f64 * inv;
        i /= b as usize;
        inv /= b as f64;
    }
    out
}

/// Evaluate a float map at every plan point and reduce modulo `UT(n, Z)`.
pub fn sample_map<F>(f: F, plan: &SamplePlan) -> Result<Vec<ReducedPoint<f64>>>
where
    F: Fn(&[f64]) -> Result<Matrix<f64>> + Sync,
{
    let pts = plan.points();
    let out: Vec<Result<ReducedPoint<f64>>> = pts
        .par_iter()
        .map(|x| {
            let g = f(x)?;
            if g.data().iter().any(|v| !v.is_finite() || v.abs() > OVERFLOW_LIMIT) {
                return Err(Error::Overflow { param: x.clone() });
            }
            Ok(reduce_mod_lattice(&g))
        })
        .collect();
    out.into_iter().collect()
}

/// Orbit samples `pi(F(x))` for `x` drawn from the plan.
pub fn sample_orbit(f: &PolyMatrix, plan: &SamplePlan) -> Result<Vec<ReducedPoint<f64>>> {
    if f.shape() != Shape::Unipotent {
        return Err(Error::Shape("unipotent"));
    }
    if f.nvars() != plan.dim() {
        return Err(Error::DimensionMismatch { expected: f.nvars(), got: plan.dim() });
    }
    let ff = f.to_float();
    sample_map(|x| ff.eval(x), plan)
}

/// Float description of `c exp(h^Gamma)`.
#[derive(Clone, Debug)]
pub struct PredictedModel {
    n: usize,
    base: Matrix<f64>,
    base_inv: Matrix<f64>,
    generators: Vec<Matrix<f64>>,
    onb: Vec<Vec<f64>>,
    ambient_full: bool,
    abelian: bool,
}

impl PredictedModel {
    pub fn from_result(result: &ClosureResult) -> Result<Self> {
        let alg = result.coset.algebra();
        let group = alg.group();
        let n = group.n();
        let field = group.field();
        let space = alg.space();
        let ints = space.integer_basis().ok_or(Error::IrrationalStructure)?;
        let generators: Vec<Matrix<f64>> = ints
            .iter()
            .map(|v| {
                let entries: Vec<f64> = v.iter().map(crate::malcev::bigint_to_f64).collect();
                Matrix::from_upper(n, &entries, &0.0)
            })
            .collect();
        let abelian = space.basis().iter().all(|a| {
            space.basis().iter().all(|b| {
                let x = NilMatrix::from_vector(field, n, a).expect("basis vector");
                let y = NilMatrix::from_vector(field, n, b).expect("basis vector");
                crate::nilcore::bracket(&x, &y).is_zero()
            })
        });
        let base = result.coset.base().to_f64();
        Ok(PredictedModel {
            n,
            base_inv: base.inv_unipotent(),
            base,
            onb: orthonormal(&space.to_f64_basis()),
            ambient_full: space.dim() == positions(n).len(),
            generators,
            abelian,
        })
    }

    pub fn dim(&self) -> usize {
        if self.ambient_full {
            positions(self.n).len()
        } else {
            self.generators.len()
        }
    }

    /// Box of Malcev-type coordinates that covers the sub-nilmanifold.
    pub fn default_plan(&self, strategy: Strategy, count: usize) -> Result<SamplePlan> {
        let hi = if self.ambient_full || self.abelian { 1.0 } else { 3.0 };
        SamplePlan::cube(self.dim(), 0.0, hi, strategy, count)
    }

    /// Point of the model at coordinates `s`.
    pub fn point(&self, s: &[f64]) -> Result<Matrix<f64>> {
        if s.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: s.len() });
        }
        if self.ambient_full {
            return Ok(Matrix::from_upper(self.n, s, &0.0));
        }
        let mut g = self.base.clone();
        for (x, si) in self.generators.iter().zip(s) {
            g = g.mul(&x.scale(si).exp_nilpotent());
        }
        Ok(g)
    }

    /// Distance from `log(c^-1 rep gamma)` to `h^Gamma`: zero exactly when the
    /// lifted sample lies on the predicted coset.
    pub fn residual(&self, p: &ReducedPoint<f64>) -> f64 {
        let x = self.base_inv.mul(&p.rep).mul(&p.gamma);
        distance_to_span(&x.log_unipotent().upper(), &self.onb)
    }
}

/// Uniform-in-coordinates samples of the predicted sub-nilmanifold.
pub fn sample_predicted(result: &ClosureResult, plan: &SamplePlan) -> Result<Vec<ReducedPoint<f64>>> {
    let model = PredictedModel::from_result(result)?;
    sample_map(|s| model.point(s), plan)
}

/// Subgroup of `UT(n)` spanned by the unit matrices on the support of `G`.
pub fn support_group(group: &GroupSpec) -> GroupSpec {
    let n = group.n();
    let field = group.field();
    let m = positions(n).len();
    let basis: Vec<_> = group_support(group)
        .into_iter()
        .map(|(i, j)| crate::linalg::unit_vector(field, m, position_index(n, i, j)))
        .collect();
    GroupSpec::new(n, Subspace::span(field, m, &basis).expect("unit vectors")).expect("support is closed")
}

/// Lattice ball for distances between reduced samples of `G`.
pub fn chart_ball(group: &GroupSpec) -> LatticeBall {
    LatticeBall::new(&support_group(group))
}

fn chart(ball: &LatticeBall) -> Vec<usize> {
    let n = ball.size();
    ball.support().iter().map(|&(i, j)| position_index(n, i, j)).collect()
}

fn chart_coords(m: &Matrix<f64>, idx: &[usize]) -> Vec<f64> {
    let u = m.upper();
    idx.iter().map(|&k| u[k]).collect()
}

const LIFT_MARGIN: f64 = 0.5;

/// Depth-first enumeration of the integral `gamma` supported on the chart with
/// every chart entry of `rep gamma` in `[-margin, 1 + margin]`. Entries are
/// fixed by increasing distance from the diagonal, so each one only depends on
/// entries of `gamma` already chosen.
fn lifts(
    rep: &Matrix<f64>,
    order: &[(usize, usize)],
    slots: &[usize],
    depth: usize,
    gamma: &mut Matrix<f64>,
    coords: &mut Vec<f64>,
    out: &mut Vec<Vec<f64>>,
) {
    let Some(&(i, j)) = order.get(depth) else {
        out.push(coords.clone());
        return;
    };
    let base = rep.get(i, j) + (i + 1..j).map(|k| rep.get(i, k) * gamma.get(k, j)).sum::<f64>();
    let lo = (-LIFT_MARGIN - base).ceil() as i64;
    let hi = (1.0 + LIFT_MARGIN - base).floor() as i64;
    for v in lo..=hi {
        gamma.set(i, j, v as f64);
        coords[slots[depth]] = base + v as f64;
        lifts(rep, order, slots, depth + 1, gamma, coords, out);
    }
    gamma.set(i, j, 0.0);
}

/// Uniform grid over the lifted cloud `{ p gamma }` restricted to `[-1/2, 3/2]^d`.
struct CloudIndex {
    d: usize,
    cell: f64,
    k: usize,
    starts: Vec<usize>,
    coords: Vec<f64>,
}

impl CloudIndex {
    fn build(points: &[ReducedPoint<f64>], ball: &LatticeBall) -> Self {
        let idx = chart(ball);
        let d = idx.len();
        let n = ball.size();
        let mut order: Vec<(usize, usize)> = ball.support().to_vec();
        order.sort_by_key(|&(i, j)| (j - i, i));
        let slots: Vec<usize> = order.iter().map(|p| ball.support().iter().position(|q| q == p).unwrap()).collect();
        let lifted: Vec<Vec<f64>> = points
            .par_iter()
            .flat_map_iter(|p| {
                let mut out = Vec::new();
                let mut gamma = Matrix::identity(n, &0.0);
                let mut coords = vec![0.0; d];
                lifts(&p.rep, &order, &slots, 0, &mut gamma, &mut coords, &mut out);
                out
            })
            .collect();
        let span = 1.0 + 2.0 * LIFT_MARGIN;
        let per_cell = 4.0;
        let cell = if d == 0 || lifted.is_empty() {
            span
        } else {
            (span.powi(d as i32) * per_cell / lifted.len() as f64).powf(1.0 / d as f64).min(span)
        };
        let k = ((span / cell).ceil() as usize).max(1);
        let cell_of = |c: &[f64]| -> usize {
            c.iter().fold(0usize, |acc, x| acc * k + (((x + LIFT_MARGIN) / cell).floor() as usize).min(k - 1))
        };
        let mut keyed: Vec<(usize, &Vec<f64>)> = lifted.iter().map(|c| (cell_of(c), c)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.partial_cmp(b.1).expect("finite")));
        let ncells = k.pow(d as u32);
        let mut starts = vec![0usize; ncells + 1];
        for (c, _) in &keyed {
            starts[c + 1] += 1;
        }
        for i in 0..ncells {
            starts[i + 1] += starts[i];
        }
        let coords = keyed.iter().flat_map(|(_, c)| c.iter().copied()).collect();
        CloudIndex { d, cell, k, starts, coords }
    }

    fn cell_points(&self, cell: usize) -> impl Iterator<Item = &[f64]> {
        let d = self.d.max(1);
        self.coords[self.starts[cell] * self.d..self.starts[cell + 1] * self.d].chunks(d)
    }

    /// Euclidean distance from `q` to the nearest lifted point.
    fn nearest(&self, q: &[f64]) -> f64 {
        if self.coords.is_empty() && self.d > 0 {
            return f64::INFINITY;
        }
        if self.d == 0 {
            return if self.starts[1] > 0 { 0.0 } else { f64::INFINITY };
        }
        let home: Vec<i64> = q.iter().map(|x| ((x + LIFT_MARGIN) / self.cell).floor() as i64).collect();
        let mut best = f64::INFINITY;
        for r in 0..=self.k as i64 {
            self.visit_shell(&home, r, &mut |cell| {
                for p in self.cell_points(cell) {
                    let dist = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
                    if dist < best {
                        best = dist;
                    }
                }
            });
            // Unvisited cells are at least r cells away in some coordinate.
            if best.sqrt() <= r as f64 * self.cell {
                break;
            }
        }
        best.sqrt()
    }

    fn visit_shell(&self, home: &[i64], r: i64, f: &mut impl FnMut(usize)) {
        let side = 2 * r + 1;
        let total = side.pow(self.d as u32);
        for idx in 0..total {
            let mut rem = idx;
            let mut on_shell = false;
            let mut cell = 0usize;
            let mut inside = true;
            for h in home {
                let off = rem % side - r;
                rem /= side;
                on_shell |= off.abs() == r;
                let c = h + off;
                if c < 0 || c >= self.k as i64 {
                    inside = false;
                    break;
                }
                cell = cell * self.k + c as usize;
            }
            if inside && on_shell {
                f(cell);
            }
        }
    }
}

/// How the containment direction is measured.
pub enum Containment<'a> {
    /// Residual of each orbit sample against the predicted coset.
    Exact(&'a PredictedModel),
    /// Nearest-neighbor distance to the predicted samples.
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub containment: f64,
    pub density: f64,
    pub delta: f64,
    pub min_coverage: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { containment: 1e-6, density: 0.2, delta: 0.125, min_coverage: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub format: u32,
    pub orbit_samples: usize,
    pub predicted_samples: usize,
    pub containment_mode: &'static str,
    pub max_orbit_to_predicted: f64,
    pub max_predicted_to_orbit: f64,
    pub coverage: f64,
    pub tolerances: Tolerances,
    pub containment_pass: bool,
    pub density_pass: bool,
    pub coverage_pass: bool,
    pub pass: bool,
}

/// Cells of side `delta` in the chart cube hit by the samples.
pub fn occupied_cells(points: &[ReducedPoint<f64>], idx: &[usize], delta: f64) -> HashSet<Vec<u32>> {
    let k = (1.0 / delta).ceil().max(1.0) as u32;
    points
        .iter()
        .map(|p| {
            let u = p.rep.upper();
            idx.iter().map(|&i| ((u[i].clamp(0.0, 1.0) / delta).floor() as u32).min(k - 1)).collect()
        })
        .collect()
}

/// Fraction of predicted cells that the orbit also hits.
pub fn coverage(orbit: &[ReducedPoint<f64>], predicted: &[ReducedPoint<f64>], ball: &LatticeBall, delta: f64) -> f64 {
    let idx = chart(ball);
    let p = occupied_cells(predicted, &idx, delta);
    let o = occupied_cells(orbit, &idx, delta);
    if p.is_empty() {
        return 1.0;
    }
    p.intersection(&o).count() as f64 / p.len() as f64
}

/// Max over `queries` of the distance to the nearest point of `targets` in `G / Gamma`.
pub fn directed_max(queries: &[ReducedPoint<f64>], targets: &[ReducedPoint<f64>], ball: &LatticeBall) -> f64 {
    let index = CloudIndex::build(targets, ball);
    let idx = chart(ball);
    queries
        .par_iter()
        .map(|q| index.nearest(&chart_coords(&q.rep, &idx)))
        .reduce(|| 0.0, f64::max)
}

pub fn hausdorff_check(
    orbit: &[ReducedPoint<f64>],
    predicted: &[ReducedPoint<f64>],
    ball: &LatticeBall,
    containment: Containment<'_>,
    tol: &Tolerances,
) -> Result<VerifyReport> {
    if orbit.is_empty() || predicted.is_empty() {
        return Err(Error::InvalidPlan("sample sets must be nonempty".into()));
    }
    let (mode, contain) = match containment {
        Containment::Exact(model) => ("exact", orbit.par_iter().map(|p| model.residual(p)).reduce(|| 0.0, f64::max)),
        Containment::Sampled => ("sampled", directed_max(orbit, predicted, ball)),
    };
    let density = directed_max(predicted, orbit, ball);
    let cov = coverage(orbit, predicted, ball, tol.delta);
    let containment_pass = contain <= tol.containment;
    let density_pass = density <= tol.density;
    let coverage_pass = tol.min_coverage.is_none_or(|c| cov >= c);
    Ok(VerifyReport {
        format: 1,
        orbit_samples: orbit.len(),
        predicted_samples: predicted.len(),
        containment_mode: mode,
        max_orbit_to_predicted: contain,
        max_predicted_to_orbit: density,
        coverage: cov,
        tolerances: tol.clone(),
        containment_pass,
        density_pass,
        coverage_pass,
        pass: containment_pass && density_pass && coverage_pass,
    })
}

/// Samples and report for a polynomial map against its computed closure.
pub fn verify_polymap(
    f: &PolyMatrix,
    result: &ClosureResult,
    orbit_plan: &SamplePlan,
    predicted_plan: &SamplePlan,
    tol: &Tolerances,
) -> Result<(VerifyReport, Vec<ReducedPoint<f64>>)> {
    let model = PredictedModel::from_result(result)?;
    let orbit = sample_orbit(f, orbit_plan)?;
    let predicted = sample_map(|s| model.point(s), predicted_plan)?;
    let ball = chart_ball(result.coset.algebra().group());
    let report = hausdorff_check(&orbit, &predicted, &ball, Containment::Exact(&model), tol)?;
    Ok((report, orbit))
}

/// CSV of reduced representatives, one row per sample.
pub fn samples_csv(n: usize, points: &[ReducedPoint<f64>]) -> String {
    let header: Vec<String> = positions(n).iter().map(|(i, j)| format!("x{}{}", i + 1, j + 1)).collect();
    let mut out = header.join(",");
    out.push('\n');
    for p in points {
        out.push_str(&p.csv_row());
        out.push('\n');
    }
    out
}
