#![allow(dead_code)]

use nilclose_core::field::{rat_frac, Field, FieldSpec, Scalar};
use nilclose_core::linalg::{Subspace, Vector};
use nilclose_core::matrix::{positions, Matrix};
use nilclose_core::nilcore::{GroupSpec, NilMatrix, PolyMatrix, Shape, UnipotentElement};
use nilclose_core::poly::Poly;
use nilclose_core::subalg::{bracket_closure, Subalgebra};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn sqrt2() -> Field {
    Field::new(&FieldSpec::sqrt(2)).unwrap()
}

pub fn e(f: &Field, n: usize, i: usize, j: usize) -> NilMatrix {
    NilMatrix::unit(f, n, i - 1, j - 1)
}

pub fn span(f: &Field, n: usize, xs: &[NilMatrix]) -> Subspace {
    let vs: Vec<Vector> = xs.iter().map(NilMatrix::to_vector).collect();
    Subspace::span(f, n * (n - 1) / 2, &vs).unwrap()
}

pub fn rand_rational(rng: &mut ChaCha8Rng, f: &Field) -> Scalar {
    f.from_rational(rat_frac(rng.gen_range(-9..=9), rng.gen_range(1..=6)))
}

/// `a + b theta` with small rational `a, b`; rational only when the field is `Q`.
pub fn rand_scalar(rng: &mut ChaCha8Rng, f: &Field) -> Scalar {
    let a = rand_rational(rng, f);
    if f.degree() == 1 || rng.gen_bool(0.5) {
        return a;
    }
    a.add(&f.theta().mul(&rand_rational(rng, f)))
}

/// Sparse random vector in `ut(n)` coordinates.
pub fn rand_vector(rng: &mut ChaCha8Rng, f: &Field, n: usize, irrational: bool) -> Vector {
    let m = positions(n).len();
    let density = rng.gen_range(0.2..0.8);
    (0..m)
        .map(|_| {
            if rng.gen_bool(density) {
                if irrational {
                    rand_scalar(rng, f)
                } else {
                    rand_rational(rng, f)
                }
            } else {
                f.zero()
            }
        })
        .collect()
}

pub fn rand_subalgebra(rng: &mut ChaCha8Rng, g: &GroupSpec, max_gens: usize) -> Subalgebra {
    let k = rng.gen_range(1..=max_gens);
    let vs: Vec<Vector> = (0..k).map(|_| rand_vector(rng, g.field(), g.n(), true)).collect();
    bracket_closure(g, &Subspace::span(g.field(), g.algebra().ambient_dim(), &vs).unwrap()).unwrap()
}

pub fn rand_unipotent(rng: &mut ChaCha8Rng, f: &Field, n: usize, irrational: bool) -> UnipotentElement {
    let v = rand_vector(rng, f, n, irrational);
    UnipotentElement::new(Matrix::from_upper(n, &v, &f.zero()).add(&Matrix::identity(n, &f.zero()))).unwrap()
}

/// Random polynomial of degree at most `deg` with a few terms.
pub fn rand_poly(rng: &mut ChaCha8Rng, f: &Field, nvars: usize, deg: u32) -> Poly {
    let terms = rng.gen_range(0..=3);
    let mut out = Vec::new();
    for _ in 0..terms {
        let mut e = vec![0u32; nvars];
        let mut budget = rng.gen_range(0..=deg);
        while budget > 0 {
            e[rng.gen_range(0..nvars)] += 1;
            budget -= 1;
        }
        out.push((e, rand_scalar(rng, f)));
    }
    Poly::from_terms(f, nvars, out).unwrap()
}

/// Unipotent polynomial map `R^d -> UT(n)` with entries of degree at most `deg`.
pub fn rand_polymap(rng: &mut ChaCha8Rng, f: &Field, n: usize, nvars: usize, deg: u32) -> PolyMatrix {
    let zero = Poly::zero(f, nvars);
    let mut m = Matrix::zeros(n, &zero);
    for i in 0..n {
        m.set(i, i, Poly::constant(f.one(), nvars));
    }
    for (i, j) in positions(n) {
        if rng.gen_bool(0.6) {
            m.set(i, j, rand_poly(rng, f, nvars, deg));
        }
    }
    PolyMatrix::new(m, Shape::Unipotent).unwrap()
}
