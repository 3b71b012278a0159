//! Closures of polynomial images, subgroup orbits and abelian curves.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{format_rational, Field, Rational, Scalar};
use crate::linalg::{integer_kernel, Subspace, Vector};
use crate::malcev::split_coset;
use crate::matrix::Matrix;
use crate::nilcore::{nonconstant_span, polymap_eval, symbolic_log_translate, GroupSpec, PolyMatrix, UnipotentElement};
use crate::subalg::{bracket_closure, rational_closure, Subalgebra};

/// Left coset `c exp(h)` with `c` the canonical section representative.
#[derive(Clone, Debug, PartialEq)]
pub struct Coset {
    base: UnipotentElement,
    algebra: Subalgebra,
}

impl Coset {
    pub fn new(point: &UnipotentElement, algebra: Subalgebra) -> Result<Self> {
        let (base, _) = split_coset(point, &algebra)?;
        Ok(Coset { base, algebra })
    }

    pub fn base(&self) -> &UnipotentElement {
        &self.base
    }

    pub fn algebra(&self) -> &Subalgebra {
        &self.algebra
    }

    pub fn contains(&self, g: &UnipotentElement) -> bool {
        let x = self.base.inv().mul(g);
        self.algebra.contains(&x.log().to_vector())
    }
}

/// Closure of `pi(X)` as `pi(c H^Gamma)`, with the pre-rationalization coset.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosureResult {
    pub coset: Coset,
    pub raw_coset: Coset,
}

impl ClosureResult {
    pub fn dense_in_group(&self) -> bool {
        self.coset.algebra.is_whole()
    }

    pub fn report(&self) -> ClosureReport {
        let base = self.coset.base.matrix();
        let n = base.size();
        ClosureReport {
            format: 1,
            base: (0..n).map(|i| (0..n).map(|j| base.get(i, j).to_string()).collect()).collect(),
            algebra_basis: render_basis(self.raw_coset.algebra.basis()),
            algebra_rational_basis: render_basis(self.coset.algebra.basis()),
            dims: Dims { raw: self.raw_coset.algebra.dim(), closed: self.coset.algebra.dim() },
            dense_in_group: self.dense_in_group(),
        }
    }
}

pub fn render_basis(basis: &[Vector]) -> Vec<Vec<String>> {
    basis.iter().map(|v| v.iter().map(Scalar::to_string).collect()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Dims {
    pub raw: usize,
    pub closed: usize,
}

/// Serialized form of a [`ClosureResult`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosureReport {
    pub format: u32,
    pub base: Vec<Vec<String>>,
    pub algebra_basis: Vec<Vec<String>>,
    pub algebra_rational_basis: Vec<Vec<String>>,
    pub dims: Dims,
    pub dense_in_group: bool,
}

fn check_image_in_group(f: &PolyMatrix, group: &GroupSpec) -> Result<()> {
    if f.size() != group.n() {
        return Err(Error::DimensionMismatch { expected: group.n(), got: f.size() });
    }
    let log = symbolic_log_translate(f, &UnipotentElement::identity(f.field(), f.size()))?;
    for e in log.monomials() {
        if !group.algebra().contains(&log.coefficient_vector(&e))? {
            return Err(Error::ImageNotInGroup);
        }
    }
    Ok(())
}

/// Smallest coset `c exp(h)` containing `F(R^d)`, with base point `F(0)`.
pub fn smallest_coset_polymap(f: &PolyMatrix, group: &GroupSpec) -> Result<Coset> {
    let origin = vec![f.field().zero(); f.nvars()];
    smallest_coset_polymap_at(f, group, &origin)
}

/// As [`smallest_coset_polymap`], translating by `F(x0)` instead of `F(0)`.
pub fn smallest_coset_polymap_at(f: &PolyMatrix, group: &GroupSpec, x0: &[Scalar]) -> Result<Coset> {
    check_image_in_group(f, group)?;
    let c = polymap_eval(f, x0)?;
    let p = symbolic_log_translate(f, &c)?;
    // log(c^-1 F) vanishes at x0, so its value span is the non-constant coefficient span.
    let h = bracket_closure(group, &nonconstant_span(&p)?)?;
    Coset::new(&c, h)
}

/// Orbit closure of a subgroup: `exp(h)` closes up to `exp(h^Gamma)`.
pub fn orbit_closure(h: &Subalgebra) -> Result<ClosureResult> {
    let e = UnipotentElement::identity(h.group().field(), h.group().n());
    let raw = Coset::new(&e, h.clone())?;
    let closed = Coset::new(&e, rational_closure(h)?)?;
    Ok(ClosureResult { coset: closed, raw_coset: raw })
}

/// Closure of the projected image of a polynomial map.
pub fn polymap_closure(f: &PolyMatrix, group: &GroupSpec) -> Result<ClosureResult> {
    let raw = smallest_coset_polymap(f, group)?;
    let closed_alg = rational_closure(&raw.algebra)?;
    let coset = Coset::new(&raw.base, closed_alg)?;
    Ok(ClosureResult { coset, raw_coset: raw })
}

// --- abelian curves ---------------------------------------------------------

/// `sigma(t) = sum_a c_a t^a` in `R^n` for `t > 0`, exponents distinct and sorted descending.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialCurve {
    field: Field,
    dim: usize,
    terms: Vec<(Rational, Vector)>,
}

impl MonomialCurve {
    pub fn new(field: &Field, dim: usize, terms: Vec<(Rational, Vector)>) -> Result<Self> {
        let mut terms = terms;
        for (_, c) in &terms {
            if c.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: c.len() });
            }
        }
        terms.retain(|(_, c)| c.iter().any(|x| !x.is_zero()));
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        if terms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidCurve("exponents must be pairwise distinct".into()));
        }
        Ok(MonomialCurve { field: field.clone(), dim, terms })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(Rational, Vector)] {
        &self.terms
    }

    pub fn is_polynomial(&self) -> bool {
        self.terms.iter().all(|(a, _)| a.is_integer() && !a.is_negative())
    }

    pub fn eval_f64(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (a, c) in &self.terms {
            let p = t.powf(crate::field::rational_to_f64(a));
            for (o, x) in out.iter_mut().zip(c) {
                *o += x.to_f64() * p;
            }
        }
        out
    }

    fn coefficient(&self, pred: impl Fn(&Rational) -> bool) -> Vec<Vector> {
        self.terms.iter().filter(|(a, _)| pred(a)).map(|(_, c)| c.clone()).collect()
    }
}

/// Affine subspace `point + direction` of `R^n`, `point` reduced against the direction's pivots.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineCoset {
    pub point: Vector,
    pub direction: Subspace,
}

impl AffineCoset {
    pub fn new(point: Vector, direction: Subspace) -> Self {
        let point = direction.reduce(&point);
        AffineCoset { point, direction }
    }

    /// Euclidean distance from a float point, via least squares on the direction.
    pub fn distance_f64(&self, x: &[f64]) -> f64 {
        let p: Vec<f64> = self.point.iter().map(Scalar::to_f64).collect();
        let d: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a - b).collect();
        distance_to_span(&d, &orthonormal(&self.direction.to_f64_basis()))
    }
}

/// Gram-Schmidt on float vectors, dropping near-dependent ones.
pub fn orthonormal(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for q in &out {
            let dot: f64 = w.iter().zip(q).map(|(a, b)| a * b).sum();
            for (x, y) in w.iter_mut().zip(q) {
                *x -= dot * y;
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            out.push(w.into_iter().map(|x| x / norm).collect());
        }
    }
    out
}

pub fn distance_to_span(v: &[f64], onb: &[Vec<f64>]) -> f64 {
    let mut w = v.to_vec();
    for q in onb {
        let dot: f64 = w.iter().zip(q).map(|(a, b)| a * b).sum();
        for (x, y) in w.iter_mut().zip(q) {
            *x -= dot * y;
        }
    }
    w.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Nearest affine coset to a monomial curve as `t -> infinity`: the constant
/// term plus the span of the growing coefficients.
pub fn abelian_nearest_coset(sigma: &MonomialCurve) -> Result<AffineCoset> {
    let f = &sigma.field;
    let point = sigma
        .coefficient(|a| a.is_zero())
        .into_iter()
        .next()
        .unwrap_or_else(|| vec![f.zero(); sigma.dim]);
    let direction = Subspace::span(f, sigma.dim, &sigma.coefficient(|a| a.is_positive()))?;
    Ok(AffineCoset::new(point, direction))
}

/// Closure of a polynomial curve in the torus `R^n / Z^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusClosure {
    /// Constant term `a`.
    pub point: Vector,
    /// `L = { x : <m, x> = 0 for all m in M }`.
    pub subspace: Subspace,
    /// Integer relations `M` annihilating the non-constant coefficients.
    pub relations: Subspace,
    pub dense: bool,
}

impl TorusClosure {
    pub fn witnesses(&self) -> Vec<Vec<String>> {
        self.relations
            .integer_basis()
            .unwrap_or_default()
            .into_iter()
            .map(|v| v.iter().map(|x| x.to_string()).collect())
            .collect()
    }
}

pub fn torus_curve_closure(sigma: &MonomialCurve) -> Result<TorusClosure> {
    if !sigma.is_polynomial() {
        return Err(Error::NonPolynomialCurve);
    }
    let f = &sigma.field;
    let moving = sigma.coefficient(|a| a.is_positive());
    let relations = integer_kernel(f, sigma.dim, &moving)?;
    let subspace = relations.annihilator();
    let point = sigma
        .coefficient(|a| a.is_zero())
        .into_iter()
        .next()
        .unwrap_or_else(|| vec![f.zero(); sigma.dim]);
    Ok(TorusClosure { point, dense: relations.is_zero(), subspace, relations })
}

/// Float matrix of a torus point embedded in the first row of `UT(n + 1)`.
pub fn torus_embed(x: &[f64]) -> Matrix<f64> {
    let n = x.len() + 1;
    let mut m = Matrix::identity(n, &0.0);
    for (j, v) in x.iter().enumerate() {
        m.set(0, j + 1, *v);
    }
    m
}

/// Abelian group `R^k` as the first row of `UT(k + 1)`.
pub fn torus_group(field: &Field, k: usize) -> GroupSpec {
    let n = k + 1;
    let m = n * (n - 1) / 2;
    let basis: Vec<Vector> = (0..k).map(|j| crate::linalg::unit_vector(field, m, j)).collect();
    GroupSpec::new(n, Subspace::span(field, m, &basis).expect("unit vectors")).expect("abelian first row")
}

pub fn exponent_string(a: &Rational) -> String {
    format_rational(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{rat, FieldSpec};
    use crate::matrix::Matrix;
    use crate::matrix::Ring;
    use crate::nilcore::{NilMatrix, Shape};
    use crate::poly::Poly;

    fn sqrt2() -> Field {
        Field::new(&FieldSpec::sqrt(2)).unwrap()
    }

    fn e(f: &Field, n: usize, i: usize, j: usize) -> NilMatrix {
        NilMatrix::unit(f, n, i - 1, j - 1)
    }

    fn span(f: &Field, n: usize, xs: &[NilMatrix]) -> Subspace {
        let vs: Vec<Vector> = xs.iter().map(NilMatrix::to_vector).collect();
        Subspace::span(f, n * (n - 1) / 2, &vs).unwrap()
    }

    /// `exp(sum_k p_k(t) X_k)` factor list for a one-variable map.
    fn nil_poly(f: &Field, n: usize, entries: &[((usize, usize), Poly)]) -> PolyMatrix {
        let zero = Poly::zero(f, 1);
        let mut m = Matrix::zeros(n, &zero);
        for ((i, j), p) in entries {
            m.set(i - 1, j - 1, p.clone());
        }
        PolyMatrix::new(m, Shape::Nilpotent).unwrap()
    }

    #[test]
    fn subgroup_image() {
        let f = Field::rationals();
        let g = GroupSpec::full(&f, 3);
        let t = Poly::var(&f, 1, 0);
        let fmap = PolyMatrix::exp_product(&[nil_poly(&f, 3, &[((1, 2), t)])]).unwrap();
        let c = smallest_coset_polymap(&fmap, &g).unwrap();
        assert!(c.base().is_identity());
        assert_eq!(c.algebra().space(), &span(&f, 3, &[e(&f, 3, 1, 2)]));
    }

    #[test]
    fn quadratic_central_image() {
        let f = Field::rationals();
        let g = GroupSpec::full(&f, 3);
        let t = Poly::var(&f, 1, 0);
        let fmap = PolyMatrix::exp_product(&[
            nil_poly(&f, 3, &[((1, 2), t.clone())]),
            nil_poly(&f, 3, &[((1, 3), t.mul(&t))]),
        ])
        .unwrap();
        let c = smallest_coset_polymap(&fmap, &g).unwrap();
        assert_eq!(c.algebra().space(), &span(&f, 3, &[e(&f, 3, 1, 2), e(&f, 3, 1, 3)]));
    }

    #[test]
    fn translated_subgroup() {
        let f = Field::rationals();
        let g = GroupSpec::full(&f, 3);
        let t = Poly::var(&f, 1, 0);
        let g0 = e(&f, 3, 1, 2).add(&e(&f, 3, 1, 3).scale(&f.from_int(2))).exp();
        let fmap = PolyMatrix::exp_product(&[nil_poly(&f, 3, &[((2, 3), t)])]).unwrap().left_mul(&g0);
        let c = smallest_coset_polymap(&fmap, &g).unwrap();
        let h = Subalgebra::new(&g, span(&f, 3, &[e(&f, 3, 2, 3)])).unwrap();
        assert_eq!(c.algebra(), &h);
        assert_eq!(c.base(), &split_coset(&g0, &h).unwrap().0);
        assert!(c.contains(&g0));
    }

    #[test]
    fn image_outside_group_rejected() {
        let f = Field::rationals();
        let g = GroupSpec::new(3, span(&f, 3, &[e(&f, 3, 1, 2), e(&f, 3, 1, 3)])).unwrap();
        let t = Poly::var(&f, 1, 0);
        let fmap = PolyMatrix::exp_product(&[nil_poly(&f, 3, &[((2, 3), t)])]).unwrap();
        assert_eq!(smallest_coset_polymap(&fmap, &g), Err(Error::ImageNotInGroup));
    }

    #[test]
    fn irrational_line_orbit_is_dense() {
        let f = sqrt2();
        let g = GroupSpec::full(&f, 3);
        let h = Subalgebra::new(&g, span(&f, 3, &[e(&f, 3, 1, 2).add(&e(&f, 3, 2, 3).scale(&f.theta()))])).unwrap();
        let r = orbit_closure(&h).unwrap();
        assert!(r.dense_in_group());
        assert_eq!(r.raw_coset.algebra().dim(), 1);

        let tilt = Subalgebra::new(&g, span(&f, 3, &[e(&f, 3, 1, 2).add(&e(&f, 3, 1, 3).scale(&f.theta()))])).unwrap();
        let r = orbit_closure(&tilt).unwrap();
        assert_eq!(r.coset.algebra().space(), &span(&f, 3, &[e(&f, 3, 1, 2), e(&f, 3, 1, 3)]));

        let rational = Subalgebra::new(&g, span(&f, 3, &[e(&f, 3, 2, 3)])).unwrap();
        let r = orbit_closure(&rational).unwrap();
        assert_eq!(r.coset, r.raw_coset);
    }

    #[test]
    fn polymap_closures() {
        let f = sqrt2();
        let g = GroupSpec::full(&f, 3);
        let t = Poly::var(&f, 1, 0);
        let th = Poly::constant(f.theta(), 1);
        let line = PolyMatrix::exp_product(&[nil_poly(&f, 3, &[((1, 2), t.clone()), ((2, 3), th.mul(&t))])]).unwrap();
        let r = polymap_closure(&line, &g).unwrap();
        assert!(r.dense_in_group());
        assert_eq!(r.report().dims, Dims { raw: 1, closed: 3 });

        let circle = PolyMatrix::exp_product(&[nil_poly(&f, 3, &[((1, 2), t)])]).unwrap();
        let r = polymap_closure(&circle, &g).unwrap();
        assert_eq!(r.coset.algebra().dim(), 1);
        assert!(!r.dense_in_group());

        let g0 = e(&f, 3, 1, 2).scale(&f.theta()).exp();
        let constant = PolyMatrix::constant(&g0, 1);
        let r = polymap_closure(&constant, &g).unwrap();
        assert_eq!(r.coset.algebra().dim(), 0);
        assert_eq!(r.coset.base(), &g0);
    }

    #[test]
    fn hrushovski_curve_nearest_coset() {
        let f = Field::rationals();
        let sigma = MonomialCurve::new(
            &f,
            2,
            vec![(rat(1), vec![f.one(), f.zero()]), (rat(-1), vec![f.zero(), f.one()])],
        )
        .unwrap();
        let c = abelian_nearest_coset(&sigma).unwrap();
        assert!(c.point.iter().all(Scalar::is_zero));
        assert_eq!(c.direction, Subspace::span(&f, 2, &[vec![f.one(), f.zero()]]).unwrap());
        assert!(torus_curve_closure(&sigma).is_err());
    }

    #[test]
    fn bounded_and_linear_curves() {
        let f = sqrt2();
        let bounded = MonomialCurve::new(
            &f,
            2,
            vec![(rat(0), vec![f.from_int(3), f.from_int(5)]), (rat(-2), vec![f.one(), f.one()])],
        )
        .unwrap();
        let c = abelian_nearest_coset(&bounded).unwrap();
        assert_eq!(c.point, vec![f.from_int(3), f.from_int(5)]);
        assert!(c.direction.is_zero());

        let ray = MonomialCurve::new(&f, 2, vec![(rat(1), vec![f.one(), f.theta()])]).unwrap();
        let c = abelian_nearest_coset(&ray).unwrap();
        assert_eq!(c.direction.basis(), &[vec![f.one(), f.theta()]]);
    }

    #[test]
    fn torus_closures() {
        let f = sqrt2();
        let kron = MonomialCurve::new(&f, 2, vec![(rat(1), vec![f.one(), f.theta()])]).unwrap();
        let r = torus_curve_closure(&kron).unwrap();
        assert!(r.dense);
        assert!(r.subspace.is_full());

        let rational = MonomialCurve::new(&f, 2, vec![(rat(1), vec![f.one(), f.from_int(2)])]).unwrap();
        let r = torus_curve_closure(&rational).unwrap();
        assert!(!r.dense);
        assert_eq!(r.witnesses(), vec![vec!["2".to_string(), "-1".to_string()]]);
        assert_eq!(r.subspace, Subspace::span(&f, 2, &[vec![f.one(), f.from_int(2)]]).unwrap());

        let point = MonomialCurve::new(&f, 2, vec![(rat(0), vec![f.theta(), f.one()])]).unwrap();
        let r = torus_curve_closure(&point).unwrap();
        assert!(r.relations.is_full());
        assert!(r.subspace.is_zero());
        assert_eq!(r.point, vec![f.theta(), f.one()]);
    }

    #[test]
    fn repeated_exponent_rejected() {
        let f = Field::rationals();
        let res = MonomialCurve::new(&f, 1, vec![(rat(1), vec![f.one()]), (rat(1), vec![f.from_int(2)])]);
        assert!(matches!(res, Err(Error::InvalidCurve(_))));
    }
}
