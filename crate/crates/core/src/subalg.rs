//! Subalgebra operators inside a fixed ambient algebra `g <= ut(n)`.

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::linalg::{kernel, Subspace, Vector};
use crate::nilcore::{bracket_vectors, GroupSpec};

/// A Lie subalgebra `h` of the ambient group's algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct Subalgebra {
    group: GroupSpec,
    space: Subspace,
}

impl Subalgebra {
    /// Validates containment in the ambient algebra and bracket closure.
    pub fn new(group: &GroupSpec, space: Subspace) -> Result<Self> {
        if !group.algebra().contains_subspace(&space) {
            return Err(Error::NotContained);
        }
        let basis = space.basis();
        for (a, x) in basis.iter().enumerate() {
            for y in &basis[a + 1..] {
                if !space.contains(&bracket_vectors(group.field(), group.n(), x, y))? {
                    return Err(Error::NotSubalgebra);
                }
            }
        }
        Ok(Subalgebra { group: group.clone(), space })
    }

    pub fn zero(group: &GroupSpec) -> Self {
        Subalgebra { group: group.clone(), space: Subspace::zero(group.field(), group.algebra().ambient_dim()) }
    }

    pub fn whole(group: &GroupSpec) -> Self {
        Subalgebra { group: group.clone(), space: group.algebra().clone() }
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn space(&self) -> &Subspace {
        &self.space
    }

    pub fn basis(&self) -> &[Vector] {
        self.space.basis()
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn is_whole(&self) -> bool {
        self.space.dim() == self.group.dim()
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        self.space.contains(v).unwrap_or(false)
    }

    pub fn contains_subalgebra(&self, o: &Subalgebra) -> bool {
        self.space.contains_subspace(&o.space)
    }
}

fn br(group: &GroupSpec, a: &[Scalar], b: &[Scalar]) -> Vector {
    bracket_vectors(group.field(), group.n(), a, b)
}

fn check_inside(group: &GroupSpec, v: &Subspace) -> Result<()> {
    if v.ambient_dim() != group.algebra().ambient_dim() {
        return Err(Error::DimensionMismatch { expected: group.algebra().ambient_dim(), got: v.ambient_dim() });
    }
    if !group.algebra().contains_subspace(v) {
        return Err(Error::NotContained);
    }
    Ok(())
}

/// Smallest subalgebra containing `v`.
pub fn bracket_closure(group: &GroupSpec, v: &Subspace) -> Result<Subalgebra> {
    check_inside(group, v)?;
    let mut space = v.clone();
    loop {
        let basis = space.basis();
        let mut extra = Vec::new();
        for (a, x) in basis.iter().enumerate() {
            for y in &basis[a + 1..] {
                let b = br(group, x, y);
                if !space.contains(&b)? {
                    extra.push(b);
                }
            }
        }
        if extra.is_empty() {
            return Ok(Subalgebra { group: group.clone(), space });
        }
        space = space.with_vectors(&extra)?;
    }
}

/// Smallest subalgebra with a rational basis containing `h`.
///
/// Alternates rational hull and bracket closure until neither changes the space.
pub fn rational_closure(h: &Subalgebra) -> Result<Subalgebra> {
    let group = &h.group;
    let mut cur = h.space.clone();
    loop {
        let hull = cur.rational_hull();
        if !group.algebra().contains_subspace(&hull) {
            return Err(Error::ClosureExceedsGroup);
        }
        let closed = bracket_closure(group, &hull)?.space;
        if closed == cur {
            return Ok(Subalgebra { group: group.clone(), space: closed });
        }
        cur = closed;
    }
}

/// `{ x in g : [x, y] in w for every y in targets }`.
fn bracket_preimage(group: &GroupSpec, targets: &[Vector], w: &Subspace) -> Result<Subspace> {
    let field = group.field();
    let gbasis = group.algebra().basis();
    let ann = w.annihilator();
    let mut rows: Vec<Vector> = Vec::new();
    for y in targets {
        let images: Vec<Vector> = gbasis.iter().map(|g| br(group, g, y)).collect();
        for phi in ann.basis() {
            let row: Vector = images
                .iter()
                .map(|img| img.iter().zip(phi).fold(field.zero(), |acc, (a, b)| acc.add(&a.mul(b))))
                .collect();
            if row.iter().any(|x| !x.is_zero()) {
                rows.push(row);
            }
        }
    }
    let coeffs = kernel(field, gbasis.len(), &rows)?;
    let m = group.algebra().ambient_dim();
    let vectors: Vec<Vector> = coeffs
        .basis()
        .iter()
        .map(|a| {
            let mut v = vec![field.zero(); m];
            for (ai, g) in a.iter().zip(gbasis) {
                if ai.is_zero() {
                    continue;
                }
                for (x, gi) in v.iter_mut().zip(g) {
                    *x = x.add(&ai.mul(gi));
                }
            }
            v
        })
        .collect();
    Subspace::span(field, m, &vectors)
}

/// `{ x in g : [x, h] <= h }`.
pub fn normalizer(h: &Subalgebra) -> Result<Subalgebra> {
    let space = bracket_preimage(&h.group, h.space.basis(), &h.space)?;
    debug_assert!(h.is_whole() || space.dim() > h.dim(), "normalizer grows in a nilpotent algebra");
    Ok(Subalgebra { group: h.group.clone(), space })
}

/// Smallest ideal of `g` containing `v`.
pub fn normal_closure(group: &GroupSpec, v: &Subspace) -> Result<Subalgebra> {
    check_inside(group, v)?;
    let gbasis = group.algebra().basis();
    let mut space = v.clone();
    loop {
        let mut extra = Vec::new();
        for x in space.basis() {
            for g in gbasis {
                let b = br(group, g, x);
                if !space.contains(&b)? {
                    extra.push(b);
                }
            }
        }
        if extra.is_empty() {
            return Ok(Subalgebra { group: group.clone(), space });
        }
        space = space.with_vectors(&extra)?;
    }
}

pub struct CentralSeries {
    /// `0 = Z_0 <= Z_1 <= ... <= g`.
    pub ascending: Vec<Subalgebra>,
    /// `g = C_0 >= C_1 = [g, g] >= ... >= 0`.
    pub descending: Vec<Subalgebra>,
}

pub fn central_series(group: &GroupSpec) -> Result<CentralSeries> {
    let field = group.field();
    let m = group.algebra().ambient_dim();
    let gbasis = group.algebra().basis().to_vec();

    let mut descending = vec![Subalgebra::whole(group)];
    loop {
        let last = descending.last().unwrap();
        if last.space.is_zero() {
            break;
        }
        let brackets: Vec<Vector> =
            gbasis.iter().flat_map(|g| last.basis().iter().map(move |c| (g, c))).map(|(g, c)| br(group, g, c)).collect();
        let next = Subspace::span(field, m, &brackets)?;
        descending.push(Subalgebra { group: group.clone(), space: next });
    }

    let mut ascending = vec![Subalgebra::zero(group)];
    loop {
        let last = ascending.last().unwrap();
        if last.dim() == group.dim() {
            break;
        }
        let next = bracket_preimage(group, &gbasis, &last.space)?;
        ascending.push(Subalgebra { group: group.clone(), space: next });
    }
    Ok(CentralSeries { ascending, descending })
}

pub fn subalgebra_intersect(a: &Subalgebra, b: &Subalgebra) -> Result<Subalgebra> {
    let space = a.space.intersect(&b.space)?;
    Ok(Subalgebra { group: a.group.clone(), space })
}
