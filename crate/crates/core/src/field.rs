//! Exact arithmetic in a real number field `Q(theta)`.
//!
//! A [`Field`] is fixed by a monic squarefree integer polynomial together with
//! an isolating interval for one of its real roots. [`Scalar`]s are stored as
//! coordinate vectors with respect to `1, theta, ..., theta^(D-1)`.

use std::cmp::Ordering;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Upper bound on bisection steps when separating an algebraic number from zero.
/// Reaching it means the number is zero in a reducible extension.
const MAX_REFINEMENTS: usize = 4096;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"`, `"p"` or `"-p/q"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::BadRational(s.to_string());
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Very large numerators or denominators: scale through the bit lengths.
        let nb = q.numer().bits() as i64;
        let db = q.denom().bits() as i64;
        let shift = nb.max(db) - 1000;
        let n = if shift > 0 { q.numer() >> shift as usize } else { q.numer().clone() };
        let d = if shift > 0 { q.denom() >> shift as usize } else { q.denom().clone() };
        n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
    })
}

// --- dense univariate polynomials over Q, lowest degree first -------------

fn trim(p: &mut Vec<Rational>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn peval(p: &[Rational], x: &Rational) -> Rational {
    p.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

fn pderiv(p: &[Rational]) -> Vec<Rational> {
    let mut d: Vec<Rational> = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * rat(i as i64))
        .collect();
    trim(&mut d);
    d
}

fn pdivrem(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lead = &b[db];
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![Rational::zero(); r.len() - db];
    while r.len() >= b.len() {
        let k = r.len() - 1 - db;
        let c = r.last().unwrap() / lead;
        for (i, bc) in b.iter().enumerate() {
            r[k + i] -= &c * bc;
        }
        q[k] = c;
        trim(&mut r);
    }
    (q, r)
}

fn psub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] -= c;
    }
    trim(&mut out);
    out
}

fn pmul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

fn pmonic(mut p: Vec<Rational>) -> Vec<Rational> {
    if let Some(lead) = p.last().cloned() {
        for c in p.iter_mut() {
            *c /= &lead;
        }
    }
    p
}

fn pgcd(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let (_, r) = pdivrem(&x, &y);
        x = y;
        y = r;
    }
    pmonic(x)
}

/// Returns `(g, s)` with `s * a = g (mod m)`, `g` monic gcd of `a` and `m`.
fn pinv_mod(a: &[Rational], m: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let (mut r0, mut r1) = (m.to_vec(), a.to_vec());
    trim(&mut r1);
    let (mut s0, mut s1): (Vec<Rational>, Vec<Rational>) = (Vec::new(), vec![Rational::one()]);
    while !r1.is_empty() {
        let (q, r) = pdivrem(&r0, &r1);
        let s = psub(&s0, &pmul(&q, &s1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    let lead = r0.last().cloned().unwrap_or_else(Rational::one);
    let g = pmonic(r0);
    let s = s0.into_iter().map(|c| c / &lead).collect();
    (g, s)
}

fn sign_of(q: &Rational) -> i32 {
    if q.is_zero() {
        0
    } else if q.is_positive() {
        1
    } else {
        -1
    }
}

/// Number of distinct real roots of a squarefree `p` in the half-open interval `(lo, hi]`.
fn sturm_count(p: &[Rational], lo: &Rational, hi: &Rational) -> usize {
    let mut seq = vec![p.to_vec(), pderiv(p)];
    loop {
        let k = seq.len();
        if seq[k - 1].is_empty() {
            seq.pop();
            break;
        }
        let (_, r) = pdivrem(&seq[k - 2], &seq[k - 1]);
        if r.is_empty() {
            break;
        }
        seq.push(r.into_iter().map(|c| -c).collect());
    }
    let variations = |x: &Rational| {
        let signs: Vec<i32> = seq.iter().map(|s| sign_of(&peval(s, x))).filter(|&s| s != 0).collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    };
    variations(lo).saturating_sub(variations(hi))
}

fn poly_string(p: &[Rational]) -> String {
    let parts: Vec<String> = p.iter().map(format_rational).collect();
    format!("[{}]", parts.join(", "))
}

// --- field ------------------------------------------------------------------

/// Input description of a number field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    /// Integer coefficients, constant term first; the last entry must be 1.
    pub min_poly: Vec<i64>,
    #[serde(with = "rational_pair")]
    pub root_interval: (Rational, Rational),
}

/// Serde adapter for rationals written as `"p/q"` strings.
pub mod rational_str {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

mod rational_pair {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &(Rational, Rational), s: S) -> std::result::Result<S::Ok, S::Error> {
        [format_rational(&p.0), format_rational(&p.1)].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<(Rational, Rational), D::Error> {
        let [lo, hi] = <[String; 2]>::deserialize(d)?;
        let lo = parse_rational(&lo).map_err(serde::de::Error::custom)?;
        let hi = parse_rational(&hi).map_err(serde::de::Error::custom)?;
        Ok((lo, hi))
    }
}

impl FieldSpec {
    pub fn rationals() -> Self {
        FieldSpec { min_poly: vec![0, 1], root_interval: (rat(-1), rat(1)) }
    }

    /// `Q(sqrt(k))` with the positive root.
    pub fn sqrt(k: i64) -> Self {
        let hi = rat(k.max(1) + 1);
        FieldSpec { min_poly: vec![-k, 0, 1], root_interval: (rat(0), hi) }
    }
}

struct FieldInner {
    min_poly: Vec<Rational>,
    degree: usize,
    /// `theta^(D + k)` reduced, for `k < D - 1`.
    reduction: Vec<Vec<Rational>>,
    interval: Mutex<(Rational, Rational)>,
    theta: f64,
}

/// Context for `Q(theta)`. Cheap to clone.
#[derive(Clone)]
pub struct Field(Arc<FieldInner>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field(min_poly={}, theta~{})", poly_string(&self.0.min_poly), self.0.theta)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.min_poly == other.0.min_poly && (self.0.theta - other.0.theta).abs() < 1e-9)
    }
}

impl Field {
    pub fn new(spec: &FieldSpec) -> Result<Field> {
        let coeffs = &spec.min_poly;
        if coeffs.len() < 2 {
            return Err(Error::InvalidField("minimal polynomial must have degree >= 1".into()));
        }
        if *coeffs.last().unwrap() != 1 {
            return Err(Error::InvalidField("minimal polynomial must be monic".into()));
        }
        let min_poly: Vec<Rational> = coeffs.iter().map(|&c| rat(c)).collect();
        let degree = min_poly.len() - 1;
        let g = pgcd(&min_poly, &pderiv(&min_poly));
        if g.len() > 1 {
            return Err(Error::NotSquarefree(poly_string(&g)));
        }
        let (lo, hi) = spec.root_interval.clone();
        if lo >= hi {
            return Err(Error::InvalidField("root interval must satisfy lo < hi".into()));
        }
        let count = sturm_count(&min_poly, &lo, &hi);
        let hi_root = peval(&min_poly, &hi).is_zero();
        let lo_root = peval(&min_poly, &lo).is_zero();
        if count != 1 || hi_root || lo_root {
            let count = count + usize::from(lo_root);
            return Err(Error::RootCount {
                lo: format_rational(&lo),
                hi: format_rational(&hi),
                count,
            });
        }

        let mut reduction = Vec::new();
        if degree > 1 {
            // theta^D = -(c0 + c1 theta + ... + c_{D-1} theta^{D-1})
            let mut cur: Vec<Rational> = min_poly[..degree].iter().map(|c| -c).collect();
            reduction.push(cur.clone());
            for _ in 1..degree - 1 {
                let top = cur[degree - 1].clone();
                let mut next = vec![Rational::zero(); degree];
                for k in 1..degree {
                    next[k] = cur[k - 1].clone();
                }
                for k in 0..degree {
                    next[k] += &top * &reduction[0][k];
                }
                cur = next;
                reduction.push(cur.clone());
            }
        }

        let inner = FieldInner {
            min_poly,
            degree,
            reduction,
            interval: Mutex::new((lo, hi)),
            theta: 0.0,
        };
        let mut field = Field(Arc::new(inner));
        let eps = rat_frac(1, 1 << 20) * rat_frac(1, 1 << 30);
        let (lo, hi) = field.refine_to(&eps);
        let theta = rational_to_f64(&((lo + hi) / rat(2)));
        Arc::get_mut(&mut field.0).expect("fresh field").theta = theta;
        Ok(field)
    }

    pub fn rationals() -> Field {
        Field::new(&FieldSpec::rationals()).expect("Q is a valid field")
    }

    pub fn degree(&self) -> usize {
        self.0.degree
    }

    pub fn theta_f64(&self) -> f64 {
        self.0.theta
    }

    pub fn min_poly(&self) -> Vec<Rational> {
        self.0.min_poly.clone()
    }

    pub fn zero(&self) -> Scalar {
        Scalar { field: self.clone(), coords: vec![Rational::zero(); self.0.degree] }
    }

    pub fn one(&self) -> Scalar {
        self.from_rational(Rational::one())
    }

    pub fn from_int(&self, n: i64) -> Scalar {
        self.from_rational(rat(n))
    }

    pub fn from_rational(&self, q: Rational) -> Scalar {
        let mut s = self.zero();
        s.coords[0] = q;
        s
    }

    /// The generator theta (for `D = 1` this is the rational root itself).
    pub fn theta(&self) -> Scalar {
        if self.0.degree == 1 {
            return self.from_rational(-self.0.min_poly[0].clone());
        }
        let mut s = self.zero();
        s.coords[1] = Rational::one();
        s
    }

    pub fn from_coords(&self, coords: Vec<Rational>) -> Result<Scalar> {
        if coords.len() != self.0.degree {
            return Err(Error::DimensionMismatch { expected: self.0.degree, got: coords.len() });
        }
        Ok(Scalar { field: self.clone(), coords })
    }

    /// Current isolating interval, refined until narrower than `width`.
    fn refine_to(&self, width: &Rational) -> (Rational, Rational) {
        let mut guard = self.0.interval.lock().expect("interval lock");
        while &guard.1 - &guard.0 > *width {
            bisect(&self.0.min_poly, &mut guard);
        }
        guard.clone()
    }

    fn interval(&self) -> (Rational, Rational) {
        self.0.interval.lock().expect("interval lock").clone()
    }

    fn refine_once(&self) {
        let mut guard = self.0.interval.lock().expect("interval lock");
        bisect(&self.0.min_poly, &mut guard);
    }
}

fn bisect(p: &[Rational], iv: &mut (Rational, Rational)) {
    if iv.0 == iv.1 {
        return;
    }
    let mid = (&iv.0 + &iv.1) / rat(2);
    let fm = sign_of(&peval(p, &mid));
    if fm == 0 {
        *iv = (mid.clone(), mid);
        return;
    }
    let flo = sign_of(&peval(p, &iv.0));
    if flo == fm {
        iv.0 = mid;
    } else {
        iv.1 = mid;
    }
}

// --- scalars ----------------------------------------------------------------

/// Element of `Q(theta)`.
#[derive(Clone)]
pub struct Scalar {
    field: Field,
    coords: Vec<Rational>,
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.coords == other.coords
    }
}

impl Eq for Scalar {}

impl std::hash::Hash for Scalar {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.coords.hash(state);
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Scalar {
    /// Renders in the expression grammar, e.g. `1/2 + 3*theta^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (j, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mono = match j {
                0 => String::new(),
                1 => "theta".to_string(),
                _ => format!("theta^{j}"),
            };
            let coef = format_rational(c);
            let term = if j == 0 {
                coef
            } else if c.is_one() {
                mono
            } else if (-c).is_one() {
                format!("-{mono}")
            } else {
                format!("{coef}*{mono}")
            };
            parts.push(term);
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        let mut out = parts[0].clone();
        for p in &parts[1..] {
            if let Some(rest) = p.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(p);
            }
        }
        write!(f, "{out}")
    }
}

impl Scalar {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.coords[0].is_one() && self.coords[1..].iter().all(|c| c.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        self.coords[1..].iter().all(|c| c.is_zero())
    }

    /// The rational value, if this scalar lies in `Q`.
    pub fn to_rational(&self) -> Option<Rational> {
        self.is_rational().then(|| self.coords[0].clone())
    }

    pub fn add(&self, o: &Scalar) -> Scalar {
        let coords = self.coords.iter().zip(&o.coords).map(|(a, b)| a + b).collect();
        Scalar { field: self.field.clone(), coords }
    }

    pub fn sub(&self, o: &Scalar) -> Scalar {
        let coords = self.coords.iter().zip(&o.coords).map(|(a, b)| a - b).collect();
        Scalar { field: self.field.clone(), coords }
    }

    pub fn neg(&self) -> Scalar {
        let coords = self.coords.iter().map(|a| -a).collect();
        Scalar { field: self.field.clone(), coords }
    }

    pub fn scale(&self, q: &Rational) -> Scalar {
        let coords = self.coords.iter().map(|a| a * q).collect();
        Scalar { field: self.field.clone(), coords }
    }

    pub fn mul(&self, o: &Scalar) -> Scalar {
        let d = self.field.0.degree;
        if d == 1 {
            return Scalar { field: self.field.clone(), coords: vec![&self.coords[0] * &o.coords[0]] };
        }
        let mut prod = vec![Rational::zero(); 2 * d - 1];
        for (i, a) in self.coords.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coords.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        let mut coords: Vec<Rational> = prod[..d].to_vec();
        for (k, c) in prod[d..].iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (i, r) in self.field.0.reduction[k].iter().enumerate() {
                coords[i] += c * r;
            }
        }
        Scalar { field: self.field.clone(), coords }
    }

    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_rational() {
            return Ok(self.field.from_rational(self.coords[0].recip()));
        }
        let mut a = self.coords.clone();
        trim(&mut a);
        let (g, s) = pinv_mod(&a, &self.field.0.min_poly);
        if g.len() > 1 {
            return Err(Error::ZeroDivisor { factor: poly_string(&g) });
        }
        let mut coords = vec![Rational::zero(); self.field.0.degree];
        for (i, c) in s.into_iter().enumerate() {
            coords[i] = c;
        }
        Ok(Scalar { field: self.field.clone(), coords })
    }

    pub fn div(&self, o: &Scalar) -> Result<Scalar> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn to_f64(&self) -> f64 {
        let t = self.field.0.theta;
        self.coords.iter().rev().fold(0.0, |acc, c| acc * t + rational_to_f64(c))
    }

    /// Rational enclosure of the value from the current isolating interval.
    fn enclosure(&self) -> (Rational, Rational) {
        let (lo, hi) = self.field.interval();
        let mut acc = (Rational::zero(), Rational::zero());
        for c in self.coords.iter().rev() {
            let cands = [&acc.0 * &lo, &acc.0 * &hi, &acc.1 * &lo, &acc.1 * &hi];
            let mn = cands.iter().min().unwrap().clone();
            let mx = cands.iter().max().unwrap().clone();
            acc = (mn + c, mx + c);
        }
        acc
    }

    /// Exact sign, `-1`, `0` or `1`.
    pub fn signum(&self) -> i32 {
        if self.is_rational() {
            return sign_of(&self.coords[0]);
        }
        for _ in 0..MAX_REFINEMENTS {
            let (lo, hi) = self.enclosure();
            if lo.is_positive() {
                return 1;
            }
            if hi.is_negative() {
                return -1;
            }
            if lo == hi {
                return 0;
            }
            self.field.refine_once();
        }
        0
    }

    pub fn compare(&self, o: &Scalar) -> Ordering {
        if self == o {
            return Ordering::Equal;
        }
        match self.sub(o).signum() {
            1 => Ordering::Greater,
            -1 => Ordering::Less,
            _ => Ordering::Equal,
        }
    }

    /// The integer `k` with `k <= self < k + 1`.
    pub fn floor(&self) -> BigInt {
        if let Some(q) = self.to_rational() {
            return q.floor().to_integer();
        }
        for _ in 0..MAX_REFINEMENTS {
            let (lo, hi) = self.enclosure();
            let (fl, fh) = (lo.floor(), hi.floor());
            if fl == fh {
                return fl.to_integer();
            }
            self.field.refine_once();
        }
        let (lo, _) = self.enclosure();
        lo.floor().to_integer()
    }
}

/// Splits a vector of scalars into rational components: `v = sum_j theta^j v_j`.
///
/// Zero components are dropped.
pub fn rational_components(v: &[Scalar]) -> Vec<Vec<Rational>> {
    let Some(first) = v.first() else { return Vec::new() };
    let d = first.field.degree();
    (0..d)
        .map(|j| v.iter().map(|s| s.coords[j].clone()).collect::<Vec<_>>())
        .filter(|c| c.iter().any(|x| !x.is_zero()))
        .collect()
}

/// Least common multiple of the denominators, used to clear a rational vector to integers.
pub fn clear_denominators(v: &[Rational]) -> Vec<BigInt> {
    let l = v.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let ints: Vec<BigInt> = v.iter().map(|q| (q * Rational::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        ints
    } else {
        ints.into_iter().map(|x| x / &g).collect()
    }
}
