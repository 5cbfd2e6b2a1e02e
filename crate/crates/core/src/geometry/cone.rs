//! Polyhedral cones in both representations, and finite unions of them.

use std::sync::OnceLock;

use num_traits::{Signed, Zero};

use super::lp::{self, LpOutcome};
use super::polyhedron::{Constraint, ConvexPolyhedron};
use super::rational::{nullspace, rank, solve, QVector, Rat};
use super::{check_cap, rational::rat};
use crate::error::{check_dim, Result};

/// V-representation: the cone is `cone(rays) + span(lines)`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Generators {
    pub rays: Vec<QVector>,
    pub lines: Vec<QVector>,
}

impl Generators {
    /// Rays followed by both orientations of every line.
    pub fn all(&self) -> Vec<QVector> {
        let mut out = self.rays.clone();
        for l in &self.lines {
            out.push(l.clone());
            out.push(-l);
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty() && self.lines.is_empty()
    }
}

/// Convex polyhedral cone `{d : a . d <= 0 for every halfspace a}`.
#[derive(Debug)]
pub struct PolyCone {
    dim: usize,
    halfspaces: Vec<QVector>,
    generators: OnceLock<Generators>,
}

impl Clone for PolyCone {
    fn clone(&self) -> Self {
        PolyCone {
            dim: self.dim,
            halfspaces: self.halfspaces.clone(),
            generators: self.generators.clone(),
        }
    }
}

impl PartialEq for PolyCone {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.halfspaces == other.halfspaces
    }
}

impl Eq for PolyCone {}

fn canonical_rows(rows: impl IntoIterator<Item = QVector>) -> Vec<QVector> {
    let mut out: Vec<QVector> = rows
        .into_iter()
        .filter(|r| !r.is_zero())
        .map(|r| r.primitive())
        .collect();
    out.sort();
    out.dedup();
    out
}

impl PolyCone {
    pub fn from_halfspaces(dim: usize, halfspaces: Vec<QVector>) -> Result<PolyCone> {
        for h in &halfspaces {
            check_dim(dim, h.dim())?;
        }
        Ok(PolyCone {
            dim,
            halfspaces: canonical_rows(halfspaces),
            generators: OnceLock::new(),
        })
    }

    /// Cone with inequalities `a . d <= 0` and equalities `e . d = 0`.
    pub fn from_constraints(dim: usize, ineqs: Vec<QVector>, eqs: Vec<QVector>) -> Result<PolyCone> {
        let mut rows = ineqs;
        for e in eqs {
            rows.push(-&e);
            rows.push(e);
        }
        Self::from_halfspaces(dim, rows)
    }

    /// Conic hull of the given vectors.
    pub fn from_generators(dim: usize, gens: Vec<QVector>) -> Result<PolyCone> {
        for g in &gens {
            check_dim(dim, g.dim())?;
        }
        let polar = double_description(dim, &gens)?;
        let mut rows = polar.rays;
        for l in polar.lines {
            rows.push(-&l);
            rows.push(l);
        }
        let cone = PolyCone {
            dim,
            halfspaces: canonical_rows(rows),
            generators: OnceLock::new(),
        };
        let rays = canonical_rows(gens);
        let _ = cone.generators.set(Generators {
            rays,
            lines: Vec::new(),
        });
        Ok(cone)
    }

    pub fn full(dim: usize) -> PolyCone {
        let cone = PolyCone {
            dim,
            halfspaces: Vec::new(),
            generators: OnceLock::new(),
        };
        let _ = cone.generators.set(Generators {
            rays: Vec::new(),
            lines: (0..dim).map(|i| QVector::unit(dim, i)).collect(),
        });
        cone
    }

    pub fn zero(dim: usize) -> PolyCone {
        let rows = (0..dim)
            .flat_map(|i| {
                let e = QVector::unit(dim, i);
                [-&e, e]
            })
            .collect::<Vec<_>>();
        let cone = PolyCone {
            dim,
            halfspaces: canonical_rows(rows),
            generators: OnceLock::new(),
        };
        let _ = cone.generators.set(Generators::default());
        cone
    }

    pub fn ray(v: QVector) -> Result<PolyCone> {
        let dim = v.dim();
        Self::from_generators(dim, vec![v])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[QVector] {
        &self.halfspaces
    }

    pub fn generators(&self) -> Result<&Generators> {
        if let Some(g) = self.generators.get() {
            return Ok(g);
        }
        let g = double_description(self.dim, &self.halfspaces)?;
        let _ = self.generators.set(g);
        Ok(self.generators.get().expect("generators were just set"))
    }

    pub fn contains(&self, d: &QVector) -> Result<bool> {
        check_dim(self.dim, d.dim())?;
        Ok(self.halfspaces.iter().all(|a| !a.dot(d).is_positive()))
    }

    pub fn is_zero(&self) -> Result<bool> {
        Ok(self.generators()?.is_empty())
    }

    pub fn is_full(&self) -> bool {
        self.halfspaces.is_empty()
    }

    /// `{v : v . d <= 0 for all d in self}`
    pub fn polar(&self) -> Result<PolyCone> {
        let gens = self.generators()?;
        let cone = PolyCone::from_halfspaces(self.dim, gens.all())?;
        let _ = cone.generators.set(Generators {
            rays: self.halfspaces.clone(),
            lines: Vec::new(),
        });
        Ok(cone)
    }

    pub fn intersect(&self, other: &PolyCone) -> Result<PolyCone> {
        check_dim(self.dim, other.dim)?;
        let mut rows = self.halfspaces.clone();
        rows.extend(other.halfspaces.iter().cloned());
        PolyCone::from_halfspaces(self.dim, rows)
    }

    pub fn is_subset(&self, other: &PolyCone) -> Result<bool> {
        check_dim(self.dim, other.dim)?;
        for g in self.generators()?.all() {
            if !other.contains(&g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn set_eq(&self, other: &PolyCone) -> Result<bool> {
        Ok(self.is_subset(other)? && other.is_subset(self)?)
    }

    /// Places coordinate `i` at position `map[i]` of a larger space; other coordinates are free.
    pub fn embed(&self, new_dim: usize, map: &[usize]) -> Result<PolyCone> {
        check_dim(self.dim, map.len())?;
        let rows = self
            .halfspaces
            .iter()
            .map(|h| h.embed(new_dim, map))
            .collect();
        PolyCone::from_halfspaces(new_dim, rows)
    }

    /// `self x other` in the concatenated space.
    pub fn product(&self, other: &PolyCone) -> Result<PolyCone> {
        let n = self.dim + other.dim;
        let left: Vec<usize> = (0..self.dim).collect();
        let right: Vec<usize> = (self.dim..n).collect();
        self.embed(n, &left)?.intersect(&other.embed(n, &right)?)
    }

    /// Image under the coordinate projection onto `keep`.
    pub fn eliminate(&self, keep: &[usize]) -> Result<PolyCone> {
        let gens = self.generators()?;
        let projected: Vec<QVector> = gens.all().iter().map(|g| g.select(keep)).collect();
        PolyCone::from_generators(keep.len(), projected)
    }

    /// Image under `d -> M d`, where `rows` are the rows of `M`.
    pub fn linear_image(&self, rows: &[QVector]) -> Result<PolyCone> {
        let gens = self.generators()?;
        let image: Vec<QVector> = gens
            .all()
            .iter()
            .map(|g| rows.iter().map(|r| r.dot(g)).collect())
            .collect();
        PolyCone::from_generators(rows.len(), image)
    }

    pub fn to_polyhedron(&self) -> ConvexPolyhedron {
        ConvexPolyhedron::from_parts(
            self.dim,
            self.halfspaces
                .iter()
                .map(|h| Constraint::new(h.clone(), Rat::zero()))
                .collect(),
            Vec::new(),
        )
    }

    /// Euclidean projection of `v` onto the cone and its squared norm.
    pub fn project(&self, v: &QVector) -> Result<(QVector, Rat)> {
        check_dim(self.dim, v.dim())?;
        if self.contains(v)? {
            return Ok((v.clone(), v.norm_sq()));
        }
        let gens = self.generators()?.all();
        let p = nnls(&gens, v, self.dim);
        let n = p.norm_sq();
        Ok((p, n))
    }
}

fn nnls(gens: &[QVector], v: &QVector, dim: usize) -> QVector {
    let mut p = QVector::zeros(dim);
    for (g, l) in gens.iter().zip(nnls_coefficients(gens, v, dim)) {
        if !l.is_zero() {
            p = p.add_scaled(&l, g);
        }
    }
    p
}

/// Lawson-Hanson nonnegative least squares in exact arithmetic; returns `lambda >= 0`
/// minimizing `|G lambda - v|`.
pub(crate) fn nnls_coefficients(gens: &[QVector], v: &QVector, dim: usize) -> Vec<Rat> {
    let m = gens.len();
    let mut lambda = vec![Rat::zero(); m];
    let mut passive = vec![false; m];
    let combo = |lambda: &[Rat]| -> QVector {
        let mut p = QVector::zeros(dim);
        for (g, l) in gens.iter().zip(lambda) {
            if !l.is_zero() {
                p = p.add_scaled(l, g);
            }
        }
        p
    };
    loop {
        let r = v - &combo(&lambda);
        let mut enter: Option<(usize, Rat)> = None;
        for (j, g) in gens.iter().enumerate() {
            if passive[j] {
                continue;
            }
            let w = g.dot(&r);
            if w.is_positive() && enter.as_ref().map_or(true, |(_, bw)| &w > bw) {
                enter = Some((j, w));
            }
        }
        let Some((j, _)) = enter else {
            return lambda;
        };
        passive[j] = true;
        loop {
            let idx: Vec<usize> = (0..m).filter(|&i| passive[i]).collect();
            let gram: Vec<Vec<Rat>> = idx
                .iter()
                .map(|&a| idx.iter().map(|&b| gens[a].dot(&gens[b])).collect())
                .collect();
            let rhs: Vec<Rat> = idx.iter().map(|&a| gens[a].dot(v)).collect();
            let z = solve(gram, rhs).expect("passive columns stay linearly independent");
            if z.iter().all(Signed::is_positive) {
                for (k, &i) in idx.iter().enumerate() {
                    lambda[i] = z[k].clone();
                }
                break;
            }
            let mut alpha: Option<Rat> = None;
            for (k, &i) in idx.iter().enumerate() {
                if !z[k].is_positive() {
                    let a = &lambda[i] / (&lambda[i] - &z[k]);
                    if alpha.as_ref().map_or(true, |b| &a < b) {
                        alpha = Some(a);
                    }
                }
            }
            let alpha = alpha.expect("some coefficient is nonpositive");
            for (k, &i) in idx.iter().enumerate() {
                let step = &z[k] - &lambda[i];
                lambda[i] += &alpha * step;
                if !lambda[i].is_positive() {
                    lambda[i] = Rat::zero();
                    passive[i] = false;
                }
            }
        }
    }
}

#[derive(Clone, Default)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Bits {
        Bits(vec![0; len.div_ceil(64).max(1)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn subset_of(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
}

/// Generators of `{d : r . d <= 0 for every row r}` by the double description method.
pub fn double_description(dim: usize, rows: &[QVector]) -> Result<Generators> {
    check_cap(dim)?;
    let rows: Vec<QVector> = canonical_rows(rows.iter().cloned());
    let lines = nullspace(&rows, dim);
    if lines.len() == dim {
        return Ok(Generators {
            rays: Vec::new(),
            lines: canonical_lines(lines),
        });
    }
    // restrict to the orthogonal complement of the lineality space to get a pointed cone
    let mut work = rows.clone();
    for l in &lines {
        work.push(l.clone());
        work.push(-l);
    }
    let mut basis_rows: Vec<usize> = Vec::new();
    let mut chosen: Vec<QVector> = Vec::new();
    for (i, r) in work.iter().enumerate() {
        chosen.push(r.clone());
        if rank(&chosen, dim) == chosen.len() {
            basis_rows.push(i);
            if basis_rows.len() == dim {
                break;
            }
        } else {
            chosen.pop();
        }
    }
    debug_assert_eq!(basis_rows.len(), dim);
    let nrows = work.len();
    // initial simplicial cone: rays are the columns of -M^{-1}
    let mut rays: Vec<(QVector, Bits)> = Vec::new();
    for k in 0..dim {
        let a: Vec<Vec<Rat>> = basis_rows
            .iter()
            .map(|&i| work[i].coords().to_vec())
            .collect();
        let mut b = vec![Rat::zero(); dim];
        b[k] = rat(-1);
        let r = QVector::new(solve(a, b).expect("basis rows are independent")).primitive();
        let mut z = Bits::new(nrows);
        for (kk, &i) in basis_rows.iter().enumerate() {
            if kk != k {
                z.set(i);
            }
        }
        rays.push((r, z));
    }
    for (i, a) in work.iter().enumerate() {
        if basis_rows.contains(&i) {
            continue;
        }
        let vals: Vec<Rat> = rays.iter().map(|(r, _)| a.dot(r)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_positive()).collect();
        if pos.is_empty() {
            for (k, (_, z)) in rays.iter_mut().enumerate() {
                if vals[k].is_zero() {
                    z.set(i);
                }
            }
            continue;
        }
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_negative()).collect();
        let mut next: Vec<(QVector, Bits)> = Vec::new();
        for &p in &pos {
            for &q in &neg {
                let common = rays[p].1.and(&rays[q].1);
                if common.count() + 2 < dim {
                    continue;
                }
                let adjacent = (0..rays.len())
                    .all(|k| k == p || k == q || !common.subset_of(&rays[k].1));
                if !adjacent {
                    continue;
                }
                let r = rays[q]
                    .0
                    .scale(&vals[p])
                    .add_scaled(&-vals[q].clone(), &rays[p].0)
                    .primitive();
                let mut z = common;
                z.set(i);
                next.push((r, z));
            }
        }
        for (k, (r, z)) in rays.iter().enumerate() {
            if !vals[k].is_positive() {
                let mut z = z.clone();
                if vals[k].is_zero() {
                    z.set(i);
                }
                next.push((r.clone(), z));
            }
        }
        rays = next;
    }
    let mut out: Vec<QVector> = rays.into_iter().map(|(r, _)| r).collect();
    out.sort();
    out.dedup();
    Ok(Generators {
        rays: out,
        lines: canonical_lines(lines),
    })
}

fn canonical_lines(lines: Vec<QVector>) -> Vec<QVector> {
    let mut out: Vec<QVector> = lines.iter().map(QVector::line_key).collect();
    out.sort();
    out
}

/// Exact supremum data of `<v, d>` over unit directions `d` of a cone union.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Support {
    /// `max_C |proj_C v|^2`; the supremum itself is its square root when positive.
    pub squared: Rat,
    /// Set when every projection vanishes, i.e. the supremum is at most zero.
    pub nonpositive: bool,
}

/// Finite union of polyhedral cones of a common dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeUnion {
    dim: usize,
    pieces: Vec<PolyCone>,
}

impl ConeUnion {
    pub fn new(dim: usize, pieces: Vec<PolyCone>) -> Result<ConeUnion> {
        for p in &pieces {
            check_dim(dim, p.dim())?;
        }
        let mut pieces = pieces;
        pieces.sort_by(|a, b| a.halfspaces.cmp(&b.halfspaces));
        pieces.dedup();
        Ok(ConeUnion { dim, pieces })
    }

    pub fn single(cone: PolyCone) -> ConeUnion {
        ConeUnion {
            dim: cone.dim(),
            pieces: vec![cone],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[PolyCone] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn contains(&self, d: &QVector) -> Result<bool> {
        check_dim(self.dim, d.dim())?;
        for p in &self.pieces {
            if p.contains(d)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn support_on_ball(&self, v: &QVector) -> Result<Support> {
        check_dim(self.dim, v.dim())?;
        let mut best = Rat::zero();
        for p in &self.pieces {
            let (_, n) = p.project(v)?;
            if n > best {
                best = n;
            }
        }
        Ok(Support {
            nonpositive: best.is_zero(),
            squared: best,
        })
    }

    /// Every generator of every piece.
    pub fn generators(&self) -> Result<Vec<QVector>> {
        let mut out = Vec::new();
        for p in &self.pieces {
            out.extend(p.generators()?.all());
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    pub fn union(&self, other: &ConeUnion) -> Result<ConeUnion> {
        check_dim(self.dim, other.dim)?;
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.iter().cloned());
        ConeUnion::new(self.dim, pieces)
    }

    pub fn intersect_cone(&self, cone: &PolyCone) -> Result<ConeUnion> {
        let pieces = self
            .pieces
            .iter()
            .map(|p| p.intersect(cone))
            .collect::<Result<Vec<_>>>()?;
        ConeUnion::new(self.dim, pieces)
    }

    /// Pairwise intersections of pieces.
    pub fn intersect(&self, other: &ConeUnion) -> Result<ConeUnion> {
        check_dim(self.dim, other.dim)?;
        let mut pieces = Vec::new();
        for a in &self.pieces {
            for b in &other.pieces {
                pieces.push(a.intersect(b)?);
            }
        }
        ConeUnion::new(self.dim, pieces)
    }

    /// A direction of `self` outside `other`, or `None` when `self` is covered by `other`.
    pub fn uncovered_direction(&self, other: &ConeUnion) -> Result<Option<QVector>> {
        check_dim(self.dim, other.dim)?;
        for piece in &self.pieces {
            for g in piece.generators()?.all() {
                if !other.contains(&g)? {
                    return Ok(Some(g));
                }
            }
        }
        let mut bs: Vec<Vec<QVector>> = other.pieces.iter().map(|p| p.halfspaces.clone()).collect();
        bs.sort_by_key(Vec::len);
        for piece in &self.pieces {
            if bs.is_empty() {
                return Ok(Some(QVector::zeros(self.dim)));
            }
            let mut strict = Vec::new();
            if let Some(w) = uncovered(self.dim, &piece.halfspaces, &mut strict, &bs, 0) {
                return Ok(Some(w));
            }
        }
        Ok(None)
    }

    pub fn is_subset(&self, other: &ConeUnion) -> Result<bool> {
        Ok(self.uncovered_direction(other)?.is_none())
    }

    pub fn set_eq(&self, other: &ConeUnion) -> Result<bool> {
        Ok(self.is_subset(other)? && other.is_subset(self)?)
    }
}

/// Searches `{d : closed . d <= 0, strict . d > 0}` minus `bs[j..]` for a point.
fn uncovered(
    dim: usize,
    closed: &[QVector],
    strict: &mut Vec<QVector>,
    bs: &[Vec<QVector>],
    j: usize,
) -> Option<QVector> {
    let witness = strict_region_point(dim, closed, strict)?;
    if j == bs.len() {
        return Some(witness);
    }
    let mut closed_more = closed.to_vec();
    for h in &bs[j] {
        strict.push(h.clone());
        let found = uncovered(dim, &closed_more, strict, bs, j + 1);
        strict.pop();
        if found.is_some() {
            return found;
        }
        closed_more.push(h.clone());
    }
    None
}

/// A point of `{d : closed . d <= 0, strict . d > 0}` when that set is nonempty.
pub(crate) fn strict_region_point(dim: usize, closed: &[QVector], strict: &[QVector]) -> Option<QVector> {
    if strict.is_empty() {
        return Some(QVector::zeros(dim));
    }
    let n = dim + 1;
    let mut ineqs: Vec<lp::Row> = closed
        .iter()
        .map(|a| (a.concat(&QVector::zeros(1)), Rat::zero()))
        .collect();
    for s in strict {
        ineqs.push(((-s).concat(&QVector::from_ints(&[1])), Rat::zero()));
    }
    ineqs.push((QVector::unit(n, dim), rat(1)));
    match lp::maximize(n, &QVector::unit(n, dim), &ineqs, &[]) {
        LpOutcome::Optimal { point, value } if value.is_positive() => Some(point.slice(0..dim)),
        _ => None,
    }
}
