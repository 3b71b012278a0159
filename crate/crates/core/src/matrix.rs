//! Dense square matrices over a commutative ring, with the finite exp/log
//! series used for strictly upper triangular matrices.

use std::fmt;

use crate::field::{rat, rational_to_f64, Rational, Scalar};

/// Minimal ring interface shared by scalars, polynomials and floats.
///
/// Constants are produced from an existing element so that context (the
/// number field, the number of variables) carries over.
pub trait Ring: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn scale_q(&self, q: &Rational) -> Self;
}

impl Ring for Scalar {
    fn zero_like(&self) -> Self {
        self.field().zero()
    }
    fn one_like(&self) -> Self {
        self.field().one()
    }
    fn add(&self, o: &Self) -> Self {
        Scalar::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Scalar::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Scalar::mul(self, o)
    }
    fn neg(&self) -> Self {
        Scalar::neg(self)
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
    fn scale_q(&self, q: &Rational) -> Self {
        self.scale(q)
    }
}

impl Ring for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn one_like(&self) -> Self {
        1.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn scale_q(&self, q: &Rational) -> Self {
        self * rational_to_f64(q)
    }
}

/// Above-diagonal positions `(i, j)`, `i < j`, in row-major order.
pub fn positions(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

pub fn position_count(n: usize) -> usize {
    n * (n.saturating_sub(1)) / 2
}

/// Index of `(i, j)` in [`positions`].
pub fn position_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Matrix size for a given number of above-diagonal positions.
pub fn size_for_positions(m: usize) -> Option<usize> {
    (1..64).find(|&n| position_count(n) == m)
}

#[derive(Clone, PartialEq)]
pub struct Matrix<R> {
    n: usize,
    data: Vec<R>,
}

impl<R: fmt::Debug> fmt::Debug for Matrix<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[R]> = self.data.chunks(self.n.max(1)).collect();
        f.debug_list().entries(rows).finish()
    }
}

impl<R: Ring> Matrix<R> {
    pub fn zeros(n: usize, proto: &R) -> Self {
        Matrix { n, data: vec![proto.zero_like(); n * n] }
    }

    pub fn identity(n: usize, proto: &R) -> Self {
        let mut m = Self::zeros(n, proto);
        for i in 0..n {
            m.data[i * n + i] = proto.one_like();
        }
        m
    }

    /// Row-major entries; `data.len()` must be `n * n`.
    pub fn from_data(n: usize, data: Vec<R>) -> Self {
        assert_eq!(data.len(), n * n, "matrix data length");
        Matrix { n, data }
    }

    /// Strictly upper triangular matrix from above-diagonal entries in position order.
    pub fn from_upper(n: usize, entries: &[R], proto: &R) -> Self {
        let mut m = Self::zeros(n, proto);
        for (k, (i, j)) in positions(n).into_iter().enumerate() {
            m.data[i * n + j] = entries[k].clone();
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &R {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: R) {
        self.data[i * self.n + j] = v;
    }

    pub fn data(&self) -> &[R] {
        &self.data
    }

    pub fn upper(&self) -> Vec<R> {
        positions(self.n).into_iter().map(|(i, j)| self.get(i, j).clone()).collect()
    }

    pub fn map<S, F: Fn(&R) -> S>(&self, f: F) -> Matrix<S> {
        Matrix { n: self.n, data: self.data.iter().map(f).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        Matrix { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Matrix { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn neg(&self) -> Self {
        self.map(Ring::neg)
    }

    pub fn scale_q(&self, q: &Rational) -> Self {
        self.map(|x| x.scale_q(q))
    }

    pub fn scale(&self, s: &R) -> Self {
        self.map(|x| x.mul(s))
    }

    /// Product exploiting upper triangularity when present.
    pub fn mul(&self, o: &Self) -> Self {
        let n = self.n;
        assert_eq!(n, o.n, "matrix sizes");
        let mut data = Vec::with_capacity(n * n);
        let upper = self.is_upper() && o.is_upper();
        for i in 0..n {
            for j in 0..n {
                let (lo, hi) = if upper { (i, j + 1) } else { (0, n) };
                let mut acc: Option<R> = None;
                for k in lo..hi.max(lo) {
                    let a = &self.data[i * n + k];
                    let b = &o.data[k * n + j];
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    let p = a.mul(b);
                    acc = Some(match acc {
                        Some(x) => x.add(&p),
                        None => p,
                    });
                }
                data.push(acc.unwrap_or_else(|| self.data[0].zero_like()));
            }
        }
        Matrix { n, data }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Ring::is_zero)
    }

    pub fn is_upper(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j).is_zero()))
    }

    pub fn is_strictly_upper(&self) -> bool {
        (0..self.n).all(|i| (0..=i).all(|j| self.get(i, j).is_zero()))
    }

    pub fn is_unipotent(&self) -> bool {
        self.is_upper() && (0..self.n).all(|i| {
            let d = self.get(i, i);
            d.sub(&d.one_like()).is_zero()
        })
    }

    fn proto(&self) -> R {
        self.data.first().map(Ring::zero_like).expect("nonempty matrix")
    }

    /// `sum_{k < n} N^k / k!` for nilpotent `N`.
    pub fn exp_nilpotent(&self) -> Self {
        let proto = self.proto();
        let id = Self::identity(self.n, &proto);
        let mut acc = id.clone();
        let mut term = id;
        for k in 1..self.n.max(1) {
            term = term.mul(self).scale_q(&Rational::new(1.into(), k.into()));
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term);
        }
        acc
    }

    /// `sum_{k=1}^{n-1} (-1)^(k+1) (U - I)^k / k` for unipotent `U`.
    pub fn log_unipotent(&self) -> Self {
        let proto = self.proto();
        let m = self.sub(&Self::identity(self.n, &proto));
        let mut acc = Self::zeros(self.n, &proto);
        let mut power = m.clone();
        for k in 1..self.n.max(1) {
            if power.is_zero() {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            acc = acc.add(&power.scale_q(&Rational::new(sign.into(), k.into())));
            power = power.mul(&m);
        }
        acc
    }

    /// Inverse of a unipotent matrix by the finite Neumann series.
    pub fn inv_unipotent(&self) -> Self {
        let proto = self.proto();
        let id = Self::identity(self.n, &proto);
        let m = self.sub(&id).neg();
        let mut acc = id;
        let mut power = m.clone();
        for _ in 1..self.n.max(1) {
            if power.is_zero() {
                break;
            }
            acc = acc.add(&power);
            power = power.mul(&m);
        }
        acc
    }

    /// `A B - B A`.
    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }
}

impl Matrix<f64> {
    pub fn frobenius_distance(&self, o: &Self) -> f64 {
        self.data.iter().zip(&o.data).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }
}

impl Matrix<Scalar> {
    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(Scalar::to_f64)
    }
}

/// `1 / k!` as a rational.
pub fn inv_factorial(k: usize) -> Rational {
    (1..=k).fold(rat(1), |acc, i| acc / rat(i as i64))
}
