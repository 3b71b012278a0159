//! Exact linear algebra over `Q(theta)`.
//!
//! Subspaces are kept in reduced row-echelon form, which makes equality of
//! subspaces a plain comparison of their bases.

use std::fmt;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::field::{clear_denominators, rational_components, Field, Rational, Scalar};

pub type Vector = Vec<Scalar>;

/// Linear subspace of `K^m` with a canonical reduced row-echelon basis.
#[derive(Clone)]
pub struct Subspace {
    field: Field,
    ambient: usize,
    basis: Vec<Vector>,
    pivots: Vec<usize>,
}

impl PartialEq for Subspace {
    fn eq(&self, other: &Self) -> bool {
        self.ambient == other.ambient && self.basis == other.basis
    }
}

impl Eq for Subspace {}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Subspace")
            .field("ambient", &self.ambient)
            .field("basis", &self.basis)
            .finish()
    }
}

/// Gauss-Jordan elimination in place. Returns the pivot columns; `rows` is
/// truncated to the nonzero rows.
fn eliminate(rows: &mut Vec<Vector>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pr) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pr);
        let inv = rows[rank][col].inv().expect("pivot is nonzero in a field");
        if !inv.is_one() {
            for x in rows[rank].iter_mut() {
                *x = x.mul(&inv);
            }
        }
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == rank || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                if !p.is_zero() {
                    *x = x.sub(&factor.mul(p));
                }
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rows.truncate(rank);
    pivots
}

fn check_dims(vectors: &[Vector], m: usize) -> Result<()> {
    for v in vectors {
        if v.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: v.len() });
        }
    }
    Ok(())
}

impl Subspace {
    pub fn zero(field: &Field, ambient: usize) -> Subspace {
        Subspace { field: field.clone(), ambient, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(field: &Field, ambient: usize) -> Subspace {
        let basis = (0..ambient).map(|i| unit_vector(field, ambient, i)).collect();
        Subspace { field: field.clone(), ambient, basis, pivots: (0..ambient).collect() }
    }

    /// Canonical echelon basis of the span of `vectors`.
    pub fn span(field: &Field, ambient: usize, vectors: &[Vector]) -> Result<Subspace> {
        check_dims(vectors, ambient)?;
        let mut rows: Vec<Vector> = vectors.iter().filter(|v| v.iter().any(|x| !x.is_zero())).cloned().collect();
        let pivots = eliminate(&mut rows, ambient);
        Ok(Subspace { field: field.clone(), ambient, basis: rows, pivots })
    }

    pub fn from_rational(field: &Field, ambient: usize, vectors: &[Vec<Rational>]) -> Result<Subspace> {
        let lifted: Vec<Vector> = vectors
            .iter()
            .map(|v| v.iter().map(|q| field.from_rational(q.clone())).collect())
            .collect();
        Subspace::span(field, ambient, &lifted)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() == self.ambient
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// `v` minus its echelon projection onto the pivots of this subspace.
    pub fn reduce(&self, v: &[Scalar]) -> Vector {
        let mut out = v.to_vec();
        for (row, &p) in self.basis.iter().zip(&self.pivots) {
            if out[p].is_zero() {
                continue;
            }
            let c = out[p].clone();
            for (x, r) in out.iter_mut().zip(row) {
                if !r.is_zero() {
                    *x = x.sub(&c.mul(r));
                }
            }
        }
        out
    }

    pub fn contains(&self, v: &[Scalar]) -> Result<bool> {
        if v.len() != self.ambient {
            return Err(Error::DimensionMismatch { expected: self.ambient, got: v.len() });
        }
        Ok(self.reduce(v).iter().all(|x| x.is_zero()))
    }

    /// Coefficients of `v` with respect to the echelon basis, if `v` lies in the span.
    pub fn coordinates(&self, v: &[Scalar]) -> Option<Vec<Scalar>> {
        if !self.contains(v).ok()? {
            return None;
        }
        Some(self.pivots.iter().map(|&p| v[p].clone()).collect())
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis.iter().all(|v| self.contains(v).unwrap_or(false))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        if other.ambient != self.ambient {
            return Err(Error::DimensionMismatch { expected: self.ambient, got: other.ambient });
        }
        let mut rows = self.basis.clone();
        rows.extend(other.basis.iter().cloned());
        Subspace::span(&self.field, self.ambient, &rows)
    }

    pub fn with_vectors(&self, vectors: &[Vector]) -> Result<Subspace> {
        let mut rows = self.basis.clone();
        rows.extend(vectors.iter().cloned());
        Subspace::span(&self.field, self.ambient, &rows)
    }

    /// `{ y : <y, v> = 0 for every v in self }` under the coordinate pairing.
    pub fn annihilator(&self) -> Subspace {
        kernel(&self.field, self.ambient, &self.basis).expect("basis rows have ambient length")
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        if other.ambient != self.ambient {
            return Err(Error::DimensionMismatch { expected: self.ambient, got: other.ambient });
        }
        let mut eqs = self.annihilator().basis;
        eqs.extend(other.annihilator().basis);
        kernel(&self.field, self.ambient, &eqs)
    }

    pub fn is_rational(&self) -> bool {
        self.basis.iter().all(|v| v.iter().all(Scalar::is_rational))
    }

    /// The `Q`-span of all rational components of the basis, as a subspace over the field.
    ///
    /// This is the smallest subspace with a rational basis containing `self`.
    pub fn rational_hull(&self) -> Subspace {
        let comps: Vec<Vec<Rational>> = self.basis.iter().flat_map(|v| rational_components(v)).collect();
        Subspace::from_rational(&self.field, self.ambient, &comps).expect("component lengths match")
    }

    /// Primitive integer basis, for a subspace with rational basis.
    pub fn integer_basis(&self) -> Option<Vec<Vec<BigInt>>> {
        self.basis
            .iter()
            .map(|v| {
                let q: Option<Vec<Rational>> = v.iter().map(Scalar::to_rational).collect();
                q.map(|q| clear_denominators(&q))
            })
            .collect()
    }

    pub fn to_f64_basis(&self) -> Vec<Vec<f64>> {
        self.basis.iter().map(|v| v.iter().map(Scalar::to_f64).collect()).collect()
    }
}

pub fn unit_vector(field: &Field, m: usize, i: usize) -> Vector {
    let mut v = vec![field.zero(); m];
    v[i] = field.one();
    v
}

/// Solution space of `M v = 0`, where `rows` are the rows of `M`.
pub fn kernel(field: &Field, ncols: usize, rows: &[Vector]) -> Result<Subspace> {
    check_dims(rows, ncols)?;
    let mut r = rows.to_vec();
    let pivots = eliminate(&mut r, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let vectors: Vec<Vector> = free
        .iter()
        .map(|&f| {
            let mut v = vec![field.zero(); ncols];
            v[f] = field.one();
            for (row, &p) in r.iter().zip(&pivots) {
                v[p] = row[f].neg();
            }
            v
        })
        .collect();
    Subspace::span(field, ncols, &vectors)
}

/// All `m in Q^n` with `<m, v_j> = 0` for every rational component `v_j` of every input.
pub fn integer_kernel(field: &Field, n: usize, vectors: &[Vector]) -> Result<Subspace> {
    check_dims(vectors, n)?;
    let comps: Vec<Vector> = vectors
        .iter()
        .flat_map(|v| rational_components(v))
        .map(|c| c.into_iter().map(|q| field.from_rational(q)).collect())
        .collect();
    kernel(field, n, &comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{rat, FieldSpec};

    fn sqrt2() -> Field {
        Field::new(&FieldSpec::sqrt(2)).unwrap()
    }

    fn ints(f: &Field, xs: &[i64]) -> Vector {
        xs.iter().map(|&x| f.from_int(x)).collect()
    }

    #[test]
    fn rref_drops_dependent_rows() {
        let f = Field::rationals();
        let s = Subspace::span(&f, 2, &[ints(&f, &[1, 0]), ints(&f, &[2, 0])]).unwrap();
        assert_eq!(s.basis(), &[ints(&f, &[1, 0])]);
    }

    #[test]
    fn rref_over_sqrt2() {
        let f = sqrt2();
        let t = f.theta();
        let s = Subspace::span(&f, 2, &[vec![f.one(), t.clone()], vec![t.clone(), f.from_int(2)]]).unwrap();
        assert_eq!(s.dim(), 1);
        assert_eq!(s.basis()[0], vec![f.one(), t.clone()]);
        assert!(s.contains(&[t, f.from_int(2)]).unwrap());
    }

    #[test]
    fn empty_span_is_zero() {
        let f = Field::rationals();
        let s = Subspace::span(&f, 3, &[]).unwrap();
        assert!(s.is_zero());
        assert_eq!(s, Subspace::zero(&f, 3));
    }

    #[test]
    fn intersect_plane_with_line() {
        let f = Field::rationals();
        let plane = Subspace::full(&f, 2);
        let line = Subspace::span(&f, 2, &[ints(&f, &[1, 1])]).unwrap();
        assert_eq!(plane.intersect(&line).unwrap(), line);
        let other = Subspace::span(&f, 2, &[ints(&f, &[1, -1])]).unwrap();
        assert!(line.intersect(&other).unwrap().is_zero());
    }

    #[test]
    fn kernel_of_row() {
        let f = Field::rationals();
        let k = kernel(&f, 2, &[ints(&f, &[2, -1])]).unwrap();
        assert_eq!(k, Subspace::span(&f, 2, &[ints(&f, &[1, 2])]).unwrap());
    }

    #[test]
    fn dimension_mismatch_reported() {
        let f = Field::rationals();
        assert!(matches!(
            Subspace::span(&f, 2, &[ints(&f, &[1, 2, 3])]),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
        let a = Subspace::full(&f, 2);
        let b = Subspace::full(&f, 3);
        assert!(a.intersect(&b).is_err());
        assert!(a.sum(&b).is_err());
    }

    #[test]
    fn integer_kernel_cases() {
        let f = sqrt2();
        let k = integer_kernel(&f, 2, &[vec![f.one(), f.theta()]]).unwrap();
        assert!(k.is_zero());

        let k = integer_kernel(&f, 2, &[ints(&f, &[1, 2])]).unwrap();
        assert_eq!(k.integer_basis().unwrap(), vec![vec![BigInt::from(2), BigInt::from(-1)]]);

        let k = integer_kernel(&f, 3, &[]).unwrap();
        assert!(k.is_full());
    }

    #[test]
    fn rational_hull_of_irrational_line() {
        let f = sqrt2();
        let s = Subspace::span(&f, 2, &[vec![f.one(), f.theta()]]).unwrap();
        assert!(!s.is_rational());
        assert!(s.rational_hull().is_full());
        let r = Subspace::from_rational(&f, 2, &[vec![rat(1), rat(2)]]).unwrap();
        assert_eq!(r.rational_hull(), r);
    }
}
