//! Sparse multivariate polynomials with coefficients in `Q(theta)`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Field, Rational, Scalar};
use crate::matrix::Ring;

/// Exponent vector, one entry per variable.
pub type Monomial = Vec<u32>;

#[derive(Clone, PartialEq)]
pub struct Poly {
    field: Field,
    nvars: usize,
    terms: BTreeMap<Monomial, Scalar>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(&default_names(self.nvars)))
    }
}

pub fn default_names(nvars: usize) -> Vec<String> {
    match nvars {
        1 => vec!["t".into()],
        2 => vec!["t".into(), "s".into()],
        _ => (1..=nvars).map(|i| format!("x{i}")).collect(),
    }
}

impl Poly {
    pub fn zero(field: &Field, nvars: usize) -> Poly {
        Poly { field: field.clone(), nvars, terms: BTreeMap::new() }
    }

    pub fn constant(c: Scalar, nvars: usize) -> Poly {
        let mut p = Poly::zero(c.field(), nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn var(field: &Field, nvars: usize, i: usize) -> Poly {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Poly::zero(field, nvars);
        p.terms.insert(e, field.one());
        p
    }

    pub fn from_terms(field: &Field, nvars: usize, terms: impl IntoIterator<Item = (Monomial, Scalar)>) -> Result<Poly> {
        let mut p = Poly::zero(field, nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch { expected: nvars, got: e.len() });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(x) => {
                *x = x.add(&c);
                if x.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Scalar> {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn constant_term(&self) -> Scalar {
        self.terms.get(&vec![0; self.nvars]).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    pub fn eval(&self, x: &[Scalar]) -> Result<Scalar> {
        if x.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: x.len() });
        }
        let mut acc = self.field.zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    term = term.mul(xi);
                }
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    pub fn to_float(&self) -> FloatPoly {
        FloatPoly {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.to_f64())).collect(),
        }
    }

    pub fn render(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts: Vec<String> = Vec::new();
        for (e, c) in self.terms.iter().rev() {
            let mono: Vec<String> = e
                .iter()
                .zip(names)
                .filter(|(&k, _)| k > 0)
                .map(|(&k, n)| if k == 1 { n.clone() } else { format!("{n}^{k}") })
                .collect();
            let coef = c.to_string();
            let simple_coef = !coef.contains(' ');
            let term = if mono.is_empty() {
                if simple_coef { coef } else { format!("({coef})") }
            } else if c.is_one() {
                mono.join("*")
            } else if simple_coef {
                format!("{coef}*{}", mono.join("*"))
            } else {
                format!("({coef})*{}", mono.join("*"))
            };
            parts.push(term);
        }
        parts.join(" + ")
    }
}

impl Ring for Poly {
    fn zero_like(&self) -> Self {
        Poly::zero(&self.field, self.nvars)
    }

    fn one_like(&self) -> Self {
        Poly::constant(self.field.one(), self.nvars)
    }

    fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    fn sub(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.neg());
        }
        out
    }

    fn mul(&self, o: &Self) -> Self {
        let mut out = self.zero_like();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Monomial = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1.mul(c2));
            }
        }
        out
    }

    fn neg(&self) -> Self {
        Poly {
            field: self.field.clone(),
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect(),
        }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn scale_q(&self, q: &Rational) -> Self {
        let mut out = self.zero_like();
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.scale(q));
        }
        out
    }
}

/// Float shadow of a [`Poly`] for fast numeric evaluation.
#[derive(Clone, Debug)]
pub struct FloatPoly {
    terms: Vec<(Monomial, f64)>,
}

impl FloatPoly {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| e.iter().zip(x).fold(*c, |acc, (&k, xi)| acc * xi.powi(k as i32)))
            .sum()
    }
}
