//! Weak Malcev bases, coordinates of the second kind, reduction to the
//! fundamental domain of `UT(n, Z)` and the quotient distance on `G / Gamma`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::field::{Field, Rational, Scalar};
use crate::linalg::{Subspace, Vector};
use crate::matrix::{positions, Matrix, Ring};
use crate::nilcore::{exp_nil, group_inv, group_mul, log_unip, GroupSpec, NilMatrix, UnipotentElement};
use crate::subalg::{normalizer, subalgebra_intersect, Subalgebra};

/// Ordered basis `xi_1..xi_m` of `g` whose every prefix spans a subalgebra; the
/// first `through_rank` elements span the designated subalgebra.
#[derive(Clone, Debug)]
pub struct MalcevBasis {
    group: GroupSpec,
    xs: Vec<Vector>,
    through_rank: usize,
    pivots: Vec<usize>,
    /// Inverse of the square matrix `xs[.][pivots]`, used to read off coordinates.
    dual: Vec<Vec<Scalar>>,
}

impl MalcevBasis {
    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn elements(&self) -> &[Vector] {
        &self.xs
    }

    pub fn through_rank(&self) -> usize {
        self.through_rank
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn element_matrix(&self, i: usize) -> NilMatrix {
        NilMatrix::from_vector(self.group.field(), self.group.n(), &self.xs[i]).expect("basis vectors have ambient length")
    }

    /// Coefficients of `v` in the basis `xi`; `v` must lie in `g`.
    fn expand(&self, v: &[Scalar]) -> Vec<Scalar> {
        let field = self.group.field();
        let picked: Vec<&Scalar> = self.pivots.iter().map(|&p| &v[p]).collect();
        (0..self.xs.len())
            .map(|j| picked.iter().zip(&self.dual).fold(field.zero(), |acc, (x, row)| acc.add(&x.mul(&row[j]))))
            .collect()
    }

    /// `exp(s_1 xi_1) ... exp(s_m xi_m)`.
    pub fn psi(&self, s: &[Scalar]) -> Result<UnipotentElement> {
        if s.len() != self.xs.len() {
            return Err(Error::DimensionMismatch { expected: self.xs.len(), got: s.len() });
        }
        let field = self.group.field();
        let mut acc = UnipotentElement::identity(field, self.group.n());
        for (si, xi) in s.iter().zip(&self.xs) {
            if si.is_zero() {
                continue;
            }
            let x: Vector = xi.iter().map(|a| a.mul(si)).collect();
            acc = group_mul(&acc, &exp_nil(&NilMatrix::from_vector(field, self.group.n(), &x)?));
        }
        Ok(acc)
    }

    /// Float version of [`MalcevBasis::psi`].
    pub fn psi_f64(&self, s: &[f64]) -> Matrix<f64> {
        let n = self.group.n();
        let mut acc = Matrix::identity(n, &0.0);
        for (si, xi) in s.iter().zip(&self.xs) {
            let x: Vec<f64> = xi.iter().map(|a| a.to_f64() * si).collect();
            acc = acc.mul(&Matrix::from_upper(n, &x, &0.0).exp_nilpotent());
        }
        acc
    }
}

/// Weak Malcev basis of `g` through `h`.
///
/// Grows a chain of subalgebras from zero, first inside `h` and then inside
/// `g`, each step adding the first normalizer basis vector not already in the
/// span, echelon-reduced against it. Each prefix is thus an ideal of the next.
pub fn weak_malcev_through(h: &Subalgebra) -> Result<MalcevBasis> {
    let group = h.group().clone();
    let field = group.field().clone();
    let whole = Subalgebra::whole(&group);
    let mut xs: Vec<Vector> = Vec::new();
    let mut current = Subalgebra::zero(&group);
    for target in [h, &whole] {
        while current.dim() < target.dim() {
            let norm = subalgebra_intersect(&normalizer(&current)?, target)?;
            let next = norm
                .basis()
                .iter()
                .map(|v| current.space().reduce(v))
                .find(|v| v.iter().any(|x| !x.is_zero()))
                .expect("normalizer strictly contains a proper subalgebra");
            let lead = next.iter().find(|x| !x.is_zero()).unwrap().inv()?;
            let next: Vector = next.iter().map(|x| x.mul(&lead)).collect();
            xs.push(next.clone());
            let space = current.space().with_vectors(&[next])?;
            current = Subalgebra::new(&group, space)?;
        }
    }

    // Pick pivot columns making the basis matrix square and invertible.
    let echelon = Subspace::span(&field, group.algebra().ambient_dim(), &xs)?;
    let pivots = echelon.pivots().to_vec();
    let square: Vec<Vec<Scalar>> = pivots.iter().map(|&p| xs.iter().map(|x| x[p].clone()).collect()).collect();
    let dual = invert(&field, &square)?;
    Ok(MalcevBasis { group, xs, through_rank: h.dim(), pivots, dual })
}

/// Inverse of a square matrix (rows of `a`); `a[p][j]` = entry `p` of basis vector `j`.
fn invert(field: &Field, a: &[Vec<Scalar>]) -> Result<Vec<Vec<Scalar>>> {
    let m = a.len();
    let mut aug: Vec<Vec<Scalar>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..m).map(|j| if i == j { field.one() } else { field.zero() }));
            r
        })
        .collect();
    for col in 0..m {
        let pr = (col..m).find(|&r| !aug[r][col].is_zero()).ok_or(Error::DivisionByZero)?;
        aug.swap(col, pr);
        let inv = aug[col][col].inv()?;
        for x in aug[col].iter_mut() {
            *x = x.mul(&inv);
        }
        let prow = aug[col].clone();
        for (r, row) in aug.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let c = row[col].clone();
                for (x, p) in row.iter_mut().zip(&prow) {
                    *x = x.sub(&c.mul(p));
                }
            }
        }
    }
    // aug = [I | A^-1]; we need rows indexed by pivot, columns by basis index:
    // A[p][j] maps basis coefficients to pivot entries, so coefficients = A^-1 * entries.
    // expand() computes sum_p v[p] * dual[p][j], i.e. dual = (A^-1)^T.
    let inv: Vec<Vec<Scalar>> = aug.into_iter().map(|r| r[m..].to_vec()).collect();
    Ok((0..m).map(|p| (0..m).map(|j| inv[j][p].clone()).collect()).collect())
}

/// Coordinates of the second kind: the unique `s` with `g = psi(s)`.
///
/// Peels factors from the right: the prefix `span{xi_1..xi_(i-1)}` is an ideal
/// of the next prefix, so `s_i` is the `xi_i`-coefficient of `log g'`.
pub fn second_kind_coords(g: &UnipotentElement, basis: &MalcevBasis) -> Result<Vec<Scalar>> {
    let group = &basis.group;
    if !group.contains(g) {
        return Err(Error::NotInGroup);
    }
    let field = group.field();
    let m = basis.xs.len();
    let mut s = vec![field.zero(); m];
    let mut cur = g.clone();
    for i in (0..m).rev() {
        let log = log_unip(&cur).to_vector();
        let si = basis.expand(&log)[i].clone();
        if !si.is_zero() {
            let x: Vector = basis.xs[i].iter().map(|a| a.mul(&si).neg()).collect();
            cur = group_mul(&cur, &exp_nil(&NilMatrix::from_vector(field, group.n(), &x)?));
        }
        s[i] = si;
    }
    debug_assert!(cur.is_identity());
    Ok(s)
}

/// Factorization `g = a * h_part` with `h_part in exp(h)` and `a` the canonical
/// representative of the coset `g H`.
pub fn split_coset(g: &UnipotentElement, h: &Subalgebra) -> Result<(UnipotentElement, UnipotentElement)> {
    let basis = weak_malcev_through(h)?;
    split_with_basis(g, &basis)
}

pub fn split_with_basis(g: &UnipotentElement, basis: &MalcevBasis) -> Result<(UnipotentElement, UnipotentElement)> {
    let field = basis.group.field();
    let k = basis.through_rank;
    // Coordinates of g^-1 = (h-part)(complement part); invert both sides.
    let s = second_kind_coords(&group_inv(g), basis)?;
    let mut head = s.clone();
    for x in head[k..].iter_mut() {
        *x = field.zero();
    }
    let mut tail = s;
    for x in tail[..k].iter_mut() {
        *x = field.zero();
    }
    let a = group_inv(&basis.psi(&tail)?);
    let h_part = group_inv(&basis.psi(&head)?);
    Ok((a, h_part))
}

// --- fundamental domain ---------------------------------------------------

/// Snap tolerance for float-mode floors.
pub const SNAP_TOL: f64 = 1e-9;

/// Rings admitting an integer floor, for lattice reduction.
pub trait Floor: Ring {
    /// `floor(self)` as an element of the same ring.
    fn floor_elem(&self) -> Self;
}

impl Floor for f64 {
    fn floor_elem(&self) -> f64 {
        let r = self.round();
        if (self - r).abs() <= SNAP_TOL {
            r
        } else {
            self.floor()
        }
    }
}

impl Floor for Scalar {
    fn floor_elem(&self) -> Scalar {
        self.field().from_rational(Rational::from_integer(self.floor()))
    }
}

/// `g = rep * gamma` with `rep` in the fundamental domain and `gamma in UT(n, Z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedPoint<R> {
    pub rep: Matrix<R>,
    pub gamma: Matrix<R>,
}

impl ReducedPoint<f64> {
    /// Above-diagonal entries of the representative in position order.
    pub fn coords(&self) -> Vec<f64> {
        self.rep.upper()
    }

    pub fn csv_row(&self) -> String {
        self.coords().iter().map(|x| format!("{x:.17e}")).collect::<Vec<_>>().join(",")
    }
}

impl ReducedPoint<Scalar> {
    pub fn gamma_integers(&self) -> Option<Vec<BigInt>> {
        self.gamma.upper().iter().map(|s| s.to_rational().filter(|q| q.is_integer()).map(|q| q.to_integer())).collect()
    }
}

/// Reduces a unipotent matrix into the cube of off-diagonal entries in `[0, 1)`.
pub fn reduce_mod_lattice<R: Floor>(g: &Matrix<R>) -> ReducedPoint<R> {
    let n = g.size();
    let proto = g.get(0, 0).zero_like();
    let mut rep = g.clone();
    let mut gamma = Matrix::identity(n, &proto);
    for d in 1..n {
        for i in 0..n - d {
            let j = i + d;
            let k = rep.get(i, j).floor_elem();
            if k.is_zero() {
                continue;
            }
            // rep <- rep (I - k E_ij): column j picks up -k * column i.
            for a in 0..=i {
                let v = rep.get(a, j).sub(&rep.get(a, i).mul(&k));
                rep.set(a, j, v);
            }
            // gamma <- (I + k E_ij) gamma: row i picks up k * row j.
            for b in j..n {
                let v = gamma.get(i, b).add(&k.mul(gamma.get(j, b)));
                gamma.set(i, b, v);
            }
        }
    }
    ReducedPoint { rep, gamma }
}

// --- quotient distance ------------------------------------------------------

/// Positions that can be nonzero for elements of `G`: the support of `g` closed
/// under matrix multiplication.
pub fn group_support(group: &GroupSpec) -> BTreeSet<(usize, usize)> {
    let n = group.n();
    let pos = positions(n);
    let mut s: BTreeSet<(usize, usize)> = pos
        .iter()
        .enumerate()
        .filter(|(k, _)| group.algebra().basis().iter().any(|v| !v[*k].is_zero()))
        .map(|(_, &p)| p)
        .collect();
    loop {
        let extra: Vec<(usize, usize)> = s
            .iter()
            .flat_map(|&(i, k)| s.iter().filter(move |&&(k2, _)| k2 == k).map(move |&(_, j)| (i, j)))
            .filter(|p| !s.contains(p))
            .collect();
        if extra.is_empty() {
            return s;
        }
        s.extend(extra);
    }
}

/// Lattice elements `gamma in G cap UT(n, Z)` that move the fundamental cube to
/// within distance 1 of itself, coordinate-wise.
#[derive(Clone, Debug)]
pub struct LatticeBall {
    n: usize,
    support: Vec<(usize, usize)>,
    gammas: Vec<Matrix<f64>>,
}

impl LatticeBall {
    pub fn new(group: &GroupSpec) -> Self {
        let n = group.n();
        let support: BTreeSet<(usize, usize)> = group_support(group);
        let mut order: Vec<(usize, usize)> = support.iter().copied().collect();
        order.sort_by_key(|&(i, j)| (j - i, i));
        let mut found = Vec::new();
        let mut gamma = Matrix::identity(n, &0.0f64);
        enumerate_ball(&order, 0, &support, &mut gamma, &mut found);
        let full = group.dim() == positions(n).len();
        let field = group.field().clone();
        let gammas = found
            .into_iter()
            .filter(|g| {
                full || {
                    let exact = g.map(|x| field.from_int(*x as i64));
                    UnipotentElement::new(exact).map(|u| group.contains(&u)).unwrap_or(false)
                }
            })
            .collect();
        let mut support: Vec<(usize, usize)> = support.into_iter().collect();
        support.sort();
        LatticeBall { n, support, gammas }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Chart positions (the group support) in position order.
    pub fn support(&self) -> &[(usize, usize)] {
        &self.support
    }

    pub fn gammas(&self) -> &[Matrix<f64>] {
        &self.gammas
    }

    /// `min_gamma |a - b gamma|_F`.
    pub fn directed_distance(&self, a: &Matrix<f64>, b: &Matrix<f64>) -> f64 {
        self.gammas.iter().map(|g| a.frobenius_distance(&b.mul(g))).fold(f64::INFINITY, f64::min)
    }
}

fn enumerate_ball(
    order: &[(usize, usize)],
    idx: usize,
    support: &BTreeSet<(usize, usize)>,
    gamma: &mut Matrix<f64>,
    out: &mut Vec<Matrix<f64>>,
) {
    let Some(&(i, j)) = order.get(idx) else {
        out.push(gamma.clone());
        return;
    };
    // (rep gamma)_ij = rep_ij + gamma_ij + sum_k rep_ik gamma_kj with rep entries in [0, 1].
    let (mut lo, mut hi) = (0.0, if support.contains(&(i, j)) { 1.0 } else { 0.0 });
    for k in i + 1..j {
        if support.contains(&(i, k)) {
            let c = *gamma.get(k, j);
            lo += c.min(0.0);
            hi += c.max(0.0);
        }
    }
    // need gamma_ij + [lo, hi] to meet [-1, 2]
    let gmin = (-1.0 - hi).ceil() as i64;
    let gmax = (2.0 - lo).floor() as i64;
    for v in gmin..=gmax {
        gamma.set(i, j, v as f64);
        enumerate_ball(order, idx + 1, support, gamma, out);
    }
    gamma.set(i, j, 0.0);
}

/// Distance between two points of `G / Gamma` given by representatives.
///
/// Symmetrized minimum over the lattice ball of `|g1 - g2 gamma|_F`.
pub fn quotient_distance(g1: &Matrix<f64>, g2: &Matrix<f64>, ball: &LatticeBall) -> f64 {
    ball.directed_distance(g1, g2).min(ball.directed_distance(g2, g1))
}

pub fn rational_from_i64(x: i64) -> Rational {
    Rational::from_integer(BigInt::from(x))
}

pub fn bigint_to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
