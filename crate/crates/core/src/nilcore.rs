//! Strictly upper triangular Lie algebra elements, unipotent group elements and
//! polynomial maps into `UT(n)`.

use crate::error::{Error, Result};
use crate::field::{rational_components, Field, Scalar};
use crate::linalg::{Subspace, Vector};
use crate::matrix::{position_count, positions, Matrix, Ring};
use crate::poly::{FloatPoly, Monomial, Poly};

/// Default bound on the total degree of input polynomial entries.
pub const DEFAULT_DEGREE_CAP: u32 = 16;

/// Element of `ut(n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NilMatrix(Matrix<Scalar>);

/// Element of `UT(n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnipotentElement(Matrix<Scalar>);

impl NilMatrix {
    pub fn new(m: Matrix<Scalar>) -> Result<Self> {
        if !m.is_strictly_upper() {
            return Err(Error::Shape("strictly upper triangular"));
        }
        Ok(NilMatrix(m))
    }

    pub fn zero(field: &Field, n: usize) -> Self {
        NilMatrix(Matrix::zeros(n, &field.zero()))
    }

    /// `E_ij` with zero-based indices.
    pub fn unit(field: &Field, n: usize, i: usize, j: usize) -> Self {
        assert!(i < j && j < n, "unit matrix position must be above the diagonal");
        let mut m = Matrix::zeros(n, &field.zero());
        m.set(i, j, field.one());
        NilMatrix(m)
    }

    pub fn from_vector(field: &Field, n: usize, v: &[Scalar]) -> Result<Self> {
        if v.len() != position_count(n) {
            return Err(Error::DimensionMismatch { expected: position_count(n), got: v.len() });
        }
        Ok(NilMatrix(Matrix::from_upper(n, v, &field.zero())))
    }

    pub fn to_vector(&self) -> Vector {
        self.0.upper()
    }

    pub fn matrix(&self) -> &Matrix<Scalar> {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.size()
    }

    pub fn add(&self, o: &Self) -> Self {
        NilMatrix(self.0.add(&o.0))
    }

    pub fn sub(&self, o: &Self) -> Self {
        NilMatrix(self.0.sub(&o.0))
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        NilMatrix(self.0.scale(s))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn exp(&self) -> UnipotentElement {
        exp_nil(self)
    }
}

impl UnipotentElement {
    pub fn new(m: Matrix<Scalar>) -> Result<Self> {
        if !m.is_unipotent() {
            return Err(Error::Shape("unipotent"));
        }
        Ok(UnipotentElement(m))
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        UnipotentElement(Matrix::identity(n, &field.zero()))
    }

    pub fn matrix(&self) -> &Matrix<Scalar> {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.size()
    }

    pub fn is_identity(&self) -> bool {
        self.0.upper().iter().all(Scalar::is_zero)
    }

    pub fn mul(&self, o: &Self) -> Self {
        group_mul(self, o)
    }

    pub fn inv(&self) -> Self {
        group_inv(self)
    }

    pub fn log(&self) -> NilMatrix {
        log_unip(self)
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.0.to_f64()
    }
}

/// `sum_{k < n} N^k / k!`.
pub fn exp_nil(n: &NilMatrix) -> UnipotentElement {
    UnipotentElement(n.0.exp_nilpotent())
}

/// `sum_{k=1}^{n-1} (-1)^(k+1) (U - I)^k / k`.
pub fn log_unip(u: &UnipotentElement) -> NilMatrix {
    NilMatrix(u.0.log_unipotent())
}

pub fn bracket(a: &NilMatrix, b: &NilMatrix) -> NilMatrix {
    NilMatrix(a.0.commutator(&b.0))
}

/// Bracket of two flattened `ut(n)` vectors.
pub fn bracket_vectors(field: &Field, n: usize, a: &[Scalar], b: &[Scalar]) -> Vector {
    let ma = Matrix::from_upper(n, a, &field.zero());
    let mb = Matrix::from_upper(n, b, &field.zero());
    ma.commutator(&mb).upper()
}

pub fn group_mul(g: &UnipotentElement, h: &UnipotentElement) -> UnipotentElement {
    UnipotentElement(g.0.mul(&h.0))
}

pub fn group_inv(g: &UnipotentElement) -> UnipotentElement {
    UnipotentElement(g.0.inv_unipotent())
}

/// `h^-1 g h`.
pub fn conjugate(g: &UnipotentElement, h: &UnipotentElement) -> UnipotentElement {
    group_mul(&group_mul(&group_inv(h), g), h)
}

// --- polynomial maps --------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Nilpotent,
    Unipotent,
}

/// Matrix of polynomials in `d` variables, either nilpotent or unipotent shaped.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMatrix {
    field: Field,
    nvars: usize,
    shape: Shape,
    entries: Matrix<Poly>,
}

impl PolyMatrix {
    pub fn new(entries: Matrix<Poly>, shape: Shape) -> Result<Self> {
        let n = entries.size();
        let first = entries.data().first().ok_or(Error::Shape("nonempty"))?;
        let (field, nvars) = (first.field().clone(), first.nvars());
        for p in entries.data() {
            if p.nvars() != nvars {
                return Err(Error::DimensionMismatch { expected: nvars, got: p.nvars() });
            }
        }
        let diag_ok = |p: &Poly| match shape {
            Shape::Nilpotent => p.is_zero(),
            Shape::Unipotent => p.is_constant() && p.constant_term().is_one(),
        };
        for i in 0..n {
            if !diag_ok(entries.get(i, i)) || (0..i).any(|j| !entries.get(i, j).is_zero()) {
                return Err(Error::Shape(match shape {
                    Shape::Nilpotent => "strictly upper triangular",
                    Shape::Unipotent => "unipotent",
                }));
            }
        }
        Ok(PolyMatrix { field, nvars, shape, entries })
    }

    /// The constant map `x -> g`.
    pub fn constant(g: &UnipotentElement, nvars: usize) -> Self {
        let entries = g.matrix().map(|s| Poly::constant(s.clone(), nvars));
        PolyMatrix { field: g.matrix().get(0, 0).field().clone(), nvars, shape: Shape::Unipotent, entries }
    }

    /// `exp(X_1(x)) exp(X_2(x)) ...` for nilpotent polynomial matrices `X_k`.
    pub fn exp_product(factors: &[PolyMatrix]) -> Result<Self> {
        let first = factors.first().ok_or(Error::Shape("nonempty product"))?;
        let n = first.size();
        let mut acc = Matrix::identity(n, &Poly::zero(&first.field, first.nvars));
        for f in factors {
            if f.shape != Shape::Nilpotent {
                return Err(Error::Shape("strictly upper triangular"));
            }
            if f.size() != n {
                return Err(Error::DimensionMismatch { expected: n, got: f.size() });
            }
            acc = acc.mul(&f.entries.exp_nilpotent());
        }
        PolyMatrix::new(acc, Shape::Unipotent)
    }

    /// Left multiplication by a constant group element.
    pub fn left_mul(&self, g: &UnipotentElement) -> Self {
        let gm = g.matrix().map(|s| Poly::constant(s.clone(), self.nvars));
        PolyMatrix { entries: gm.mul(&self.entries), ..self.clone() }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn size(&self) -> usize {
        self.entries.size()
    }

    pub fn entries(&self) -> &Matrix<Poly> {
        &self.entries
    }

    pub fn degree(&self) -> u32 {
        self.entries.data().iter().map(Poly::degree).max().unwrap_or(0)
    }

    pub fn check_degree(&self, cap: u32) -> Result<()> {
        let degree = self.degree();
        if degree > cap {
            return Err(Error::DegreeCap { degree, cap });
        }
        Ok(())
    }

    /// All monomials appearing in some entry, in increasing order.
    pub fn monomials(&self) -> Vec<Monomial> {
        let mut set = std::collections::BTreeSet::new();
        for p in self.entries.data() {
            set.extend(p.terms().keys().cloned());
        }
        set.into_iter().collect()
    }

    /// Entry-wise coefficient matrix of one monomial, flattened in position order.
    pub fn coefficient_vector(&self, e: &Monomial) -> Vector {
        positions(self.size())
            .into_iter()
            .map(|(i, j)| self.entries.get(i, j).terms().get(e).cloned().unwrap_or_else(|| self.field.zero()))
            .collect()
    }

    pub fn eval(&self, x: &[Scalar]) -> Result<Matrix<Scalar>> {
        if x.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: x.len() });
        }
        let data = self.entries.data().iter().map(|p| p.eval(x)).collect::<Result<Vec<_>>>()?;
        Ok(Matrix::from_data(self.size(), data))
    }

    pub fn to_float(&self) -> FloatPolyMatrix {
        FloatPolyMatrix {
            n: self.size(),
            nvars: self.nvars,
            entries: positions(self.size())
                .into_iter()
                .map(|(i, j)| ((i, j), self.entries.get(i, j).to_float()))
                .collect(),
            unipotent: self.shape == Shape::Unipotent,
        }
    }
}

/// Numeric evaluator for a [`PolyMatrix`].
#[derive(Clone, Debug)]
pub struct FloatPolyMatrix {
    n: usize,
    nvars: usize,
    entries: Vec<((usize, usize), FloatPoly)>,
    unipotent: bool,
}

impl FloatPolyMatrix {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn eval(&self, x: &[f64]) -> Result<Matrix<f64>> {
        if x.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: x.len() });
        }
        let mut m = if self.unipotent { Matrix::identity(self.n, &0.0) } else { Matrix::zeros(self.n, &0.0) };
        for ((i, j), p) in &self.entries {
            m.set(*i, *j, p.eval(x));
        }
        Ok(m)
    }
}

/// Exact evaluation of a unipotent polynomial map at a point.
pub fn polymap_eval(f: &PolyMatrix, x: &[Scalar]) -> Result<UnipotentElement> {
    if f.shape != Shape::Unipotent {
        return Err(Error::Shape("unipotent"));
    }
    UnipotentElement::new(f.eval(x)?)
}

/// `P(x) = log(c^-1 F(x))` as a nilpotent polynomial matrix.
pub fn symbolic_log_translate(f: &PolyMatrix, c: &UnipotentElement) -> Result<PolyMatrix> {
    if f.shape != Shape::Unipotent {
        return Err(Error::Shape("unipotent"));
    }
    if c.size() != f.size() {
        return Err(Error::DimensionMismatch { expected: f.size(), got: c.size() });
    }
    let translated = f.left_mul(&group_inv(c));
    let log = translated.entries.log_unipotent();
    PolyMatrix::new(log, Shape::Nilpotent)
}

/// Span of the non-constant coefficient matrices of a nilpotent polynomial map
/// that vanishes at the origin.
pub fn coefficient_span(p: &PolyMatrix) -> Result<Subspace> {
    if p.shape != Shape::Nilpotent {
        return Err(Error::Shape("strictly upper triangular"));
    }
    if p.coefficient_vector(&vec![0; p.nvars]).iter().any(|s| !s.is_zero()) {
        return Err(Error::NonzeroConstant);
    }
    nonconstant_span(p)
}

/// Span of the non-constant coefficients. For a map vanishing at some point
/// this equals the span of its values.
pub fn nonconstant_span(p: &PolyMatrix) -> Result<Subspace> {
    if p.shape != Shape::Nilpotent {
        return Err(Error::Shape("strictly upper triangular"));
    }
    let zero = vec![0; p.nvars];
    let vectors: Vec<Vector> = p
        .monomials()
        .into_iter()
        .filter(|e| *e != zero)
        .map(|e| p.coefficient_vector(&e))
        .collect();
    Subspace::span(&p.field, position_count(p.size()), &vectors)
}

// --- ambient group ----------------------------------------------------------

/// A real unipotent group `G <= UT(n)` given by its Lie algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupSpec {
    n: usize,
    algebra: Subspace,
}

impl GroupSpec {
    pub fn new(n: usize, algebra: Subspace) -> Result<Self> {
        if algebra.ambient_dim() != position_count(n) {
            return Err(Error::DimensionMismatch { expected: position_count(n), got: algebra.ambient_dim() });
        }
        let field = algebra.field().clone();
        let basis = algebra.basis();
        for (a, x) in basis.iter().enumerate() {
            for y in &basis[a + 1..] {
                let br = bracket_vectors(&field, n, x, y);
                // Echelon coordinates of the bracket are its entries at the pivot columns.
                let coords = algebra.coordinates(&br).ok_or(Error::NotSubalgebra)?;
                if !coords.iter().all(Scalar::is_rational) {
                    return Err(Error::IrrationalStructure);
                }
            }
        }
        Ok(GroupSpec { n, algebra })
    }

    /// The full group `UT(n)`.
    pub fn full(field: &Field, n: usize) -> Self {
        GroupSpec { n, algebra: Subspace::full(field, position_count(n)) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn algebra(&self) -> &Subspace {
        &self.algebra
    }

    pub fn field(&self) -> &Field {
        self.algebra.field()
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn contains(&self, g: &UnipotentElement) -> bool {
        g.size() == self.n && self.algebra.contains(&log_unip(g).to_vector()).unwrap_or(false)
    }

    /// Whether the algebra has a basis of rational vectors.
    pub fn is_rational(&self) -> bool {
        self.algebra.basis().iter().all(|v| rational_components(v).len() <= 1 && v.iter().all(Scalar::is_rational))
    }
}
