//! Convex polyhedra in H-representation.

use std::sync::OnceLock;

use num_traits::{One, Signed, Zero};

use super::cone::{double_description, Generators, PolyCone};
use super::lp::{self, LpOutcome};
use super::rational::{rank, solve, QVector, Rat};
use crate::error::{check_dim, Error, Result};

/// `normal . x <= offset` (or `=` when stored as an equality).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constraint {
    pub normal: QVector,
    pub offset: Rat,
}

impl Constraint {
    pub fn new(normal: QVector, offset: Rat) -> Constraint {
        Constraint { normal, offset }
    }

    pub fn slack(&self, x: &QVector) -> Rat {
        &self.offset - self.normal.dot(x)
    }

    /// Positive rescaling with a primitive integer normal.
    fn canonical_inequality(&self) -> Constraint {
        match self.normal.iter().position(|c| !c.is_zero()) {
            None => self.clone(),
            Some(i) => {
                let p = self.normal.primitive();
                let s = &p[i] / &self.normal[i];
                Constraint::new(p, &self.offset * s)
            }
        }
    }

    /// Rescaling with primitive normal whose first nonzero coordinate is positive.
    fn canonical_equality(&self) -> Constraint {
        let c = self.canonical_inequality();
        match c.normal.iter().find(|x| !x.is_zero()) {
            Some(x) if x.is_negative() => Constraint::new(-&c.normal, -c.offset),
            _ => c,
        }
    }

    fn row(&self) -> lp::Row {
        (self.normal.clone(), self.offset.clone())
    }
}

/// `{x : A x <= b, E x = f}` over Q^dim.
#[derive(Debug)]
pub struct ConvexPolyhedron {
    dim: usize,
    inequalities: Vec<Constraint>,
    equalities: Vec<Constraint>,
    nonempty: OnceLock<bool>,
}

impl Clone for ConvexPolyhedron {
    fn clone(&self) -> Self {
        ConvexPolyhedron {
            dim: self.dim,
            inequalities: self.inequalities.clone(),
            equalities: self.equalities.clone(),
            nonempty: self.nonempty.clone(),
        }
    }
}

impl PartialEq for ConvexPolyhedron {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.inequalities == other.inequalities
            && self.equalities == other.equalities
    }
}

impl Eq for ConvexPolyhedron {}

impl PartialOrd for ConvexPolyhedron {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ConvexPolyhedron {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.dim, &self.equalities, &self.inequalities).cmp(&(
            other.dim,
            &other.equalities,
            &other.inequalities,
        ))
    }
}

impl ConvexPolyhedron {
    pub fn new(
        dim: usize,
        inequalities: Vec<Constraint>,
        equalities: Vec<Constraint>,
    ) -> Result<ConvexPolyhedron> {
        for c in inequalities.iter().chain(&equalities) {
            check_dim(dim, c.normal.dim())?;
        }
        Ok(Self::from_parts(dim, inequalities, equalities))
    }

    /// Builds without dimension checks; rows are canonicalized and deduplicated.
    pub(crate) fn from_parts(
        dim: usize,
        inequalities: Vec<Constraint>,
        equalities: Vec<Constraint>,
    ) -> ConvexPolyhedron {
        let mut infeasible = false;
        let mut ineqs: Vec<Constraint> = Vec::new();
        for c in inequalities {
            if c.normal.is_zero() {
                infeasible |= c.offset.is_negative();
            } else {
                ineqs.push(c.canonical_inequality());
            }
        }
        let mut eqs: Vec<Constraint> = Vec::new();
        for c in equalities {
            if c.normal.is_zero() {
                infeasible |= !c.offset.is_zero();
            } else {
                eqs.push(c.canonical_equality());
            }
        }
        if infeasible {
            return Self::empty(dim);
        }
        eqs.sort();
        eqs.dedup();
        ineqs.sort();
        // keep only the tightest offset for parallel inequalities
        let mut tight: Vec<Constraint> = Vec::new();
        for c in ineqs {
            match tight.last_mut() {
                Some(last) if last.normal == c.normal => {
                    if c.offset < last.offset {
                        last.offset = c.offset;
                    }
                }
                _ => tight.push(c),
            }
        }
        ConvexPolyhedron {
            dim,
            inequalities: tight,
            equalities: eqs,
            nonempty: OnceLock::new(),
        }
    }

    pub fn full(dim: usize) -> ConvexPolyhedron {
        Self::from_parts(dim, Vec::new(), Vec::new())
    }

    /// Canonical empty polyhedron `0 <= -1`.
    pub fn empty(dim: usize) -> ConvexPolyhedron {
        let p = ConvexPolyhedron {
            dim,
            inequalities: vec![Constraint::new(QVector::zeros(dim), -Rat::one())],
            equalities: Vec::new(),
            nonempty: OnceLock::new(),
        };
        let _ = p.nonempty.set(false);
        p
    }

    pub fn point(p: &QVector) -> ConvexPolyhedron {
        let dim = p.dim();
        let eqs = (0..dim)
            .map(|i| Constraint::new(QVector::unit(dim, i), p[i].clone()))
            .collect();
        Self::from_parts(dim, Vec::new(), eqs)
    }

    /// Axis-aligned box; `None` bounds are absent.
    pub fn boxed(lo: &[Option<Rat>], hi: &[Option<Rat>]) -> ConvexPolyhedron {
        let dim = lo.len();
        let mut ineqs = Vec::new();
        for i in 0..dim {
            if let Some(l) = &lo[i] {
                ineqs.push(Constraint::new(-&QVector::unit(dim, i), -l.clone()));
            }
            if let Some(h) = &hi[i] {
                ineqs.push(Constraint::new(QVector::unit(dim, i), h.clone()));
            }
        }
        Self::from_parts(dim, ineqs, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inequalities(&self) -> &[Constraint] {
        &self.inequalities
    }

    pub fn equalities(&self) -> &[Constraint] {
        &self.equalities
    }

    fn ineq_rows(&self) -> Vec<lp::Row> {
        self.inequalities.iter().map(Constraint::row).collect()
    }

    fn eq_rows(&self) -> Vec<lp::Row> {
        self.equalities.iter().map(Constraint::row).collect()
    }

    pub fn contains(&self, x: &QVector) -> Result<bool> {
        check_dim(self.dim, x.dim())?;
        Ok(self.inequalities.iter().all(|c| !c.slack(x).is_negative())
            && self.equalities.iter().all(|c| c.slack(x).is_zero()))
    }

    pub fn is_empty(&self) -> bool {
        !*self
            .nonempty
            .get_or_init(|| self.feasible_point().is_some())
    }

    pub fn feasible_point(&self) -> Option<QVector> {
        if self.nonempty.get() == Some(&false) {
            return None;
        }
        lp::feasible_point(self.dim, &self.ineq_rows(), &self.eq_rows())
    }

    pub fn maximize(&self, c: &QVector) -> LpOutcome {
        lp::maximize(self.dim, c, &self.ineq_rows(), &self.eq_rows())
    }

    /// A point in the relative interior (strict on every inequality that is not an implicit equality).
    pub fn relative_interior_point(&self) -> Option<QVector> {
        let base = self.feasible_point()?;
        let n = self.dim + 1;
        // indices of inequalities that can be strict
        let mut loose: Vec<usize> = Vec::new();
        let mut tight: Vec<usize> = Vec::new();
        for (i, c) in self.inequalities.iter().enumerate() {
            match self.maximize(&-&c.normal) {
                LpOutcome::Optimal { ref value, .. } if -value.clone() == c.offset => tight.push(i),
                _ => loose.push(i),
            }
        }
        if loose.is_empty() {
            return Some(base);
        }
        let mut ineqs: Vec<lp::Row> = Vec::new();
        for &i in &loose {
            let c = &self.inequalities[i];
            ineqs.push((c.normal.concat(&QVector::from_ints(&[1])), c.offset.clone()));
        }
        ineqs.push((QVector::unit(n, self.dim), Rat::one()));
        let mut eqs: Vec<lp::Row> = self
            .equalities
            .iter()
            .map(|c| (c.normal.concat(&QVector::zeros(1)), c.offset.clone()))
            .collect();
        for &i in &tight {
            let c = &self.inequalities[i];
            eqs.push((c.normal.concat(&QVector::zeros(1)), c.offset.clone()));
        }
        match lp::maximize(n, &QVector::unit(n, self.dim), &ineqs, &eqs) {
            LpOutcome::Optimal { point, .. } => Some(point.slice(0..self.dim)),
            _ => Some(base),
        }
    }

    pub fn intersect(&self, other: &ConvexPolyhedron) -> Result<ConvexPolyhedron> {
        check_dim(self.dim, other.dim)?;
        let mut ineqs = self.inequalities.clone();
        ineqs.extend(other.inequalities.iter().cloned());
        let mut eqs = self.equalities.clone();
        eqs.extend(other.equalities.iter().cloned());
        Ok(Self::from_parts(self.dim, ineqs, eqs))
    }

    pub fn with_constraints(
        &self,
        ineqs: Vec<Constraint>,
        eqs: Vec<Constraint>,
    ) -> Result<ConvexPolyhedron> {
        let extra = ConvexPolyhedron::new(self.dim, ineqs, eqs)?;
        self.intersect(&extra)
    }

    /// Indices of inequalities tight at `x`.
    pub fn active_indices(&self, x: &QVector) -> Vec<usize> {
        self.inequalities
            .iter()
            .enumerate()
            .filter(|(_, c)| c.slack(x).is_zero())
            .map(|(i, _)| i)
            .collect()
    }

    /// Tangent cone at a member point: active inequalities and all equalities.
    pub fn active_tangent_cone(&self, x: &QVector) -> Result<PolyCone> {
        if !self.contains(x)? {
            return Err(Error::PointNotInSet);
        }
        let ineqs = self
            .active_indices(x)
            .into_iter()
            .map(|i| self.inequalities[i].normal.clone())
            .collect();
        let eqs = self.equalities.iter().map(|c| c.normal.clone()).collect();
        PolyCone::from_constraints(self.dim, ineqs, eqs)
    }

    /// Places coordinate `i` at position `map[i]` of Q^new_dim; other coordinates are free.
    pub fn embed(&self, new_dim: usize, map: &[usize]) -> Result<ConvexPolyhedron> {
        check_dim(self.dim, map.len())?;
        let lift = |c: &Constraint| Constraint::new(c.normal.embed(new_dim, map), c.offset.clone());
        Ok(Self::from_parts(
            new_dim,
            self.inequalities.iter().map(lift).collect(),
            self.equalities.iter().map(lift).collect(),
        ))
    }

    /// `self x other` in the concatenated space.
    pub fn product(&self, other: &ConvexPolyhedron) -> Result<ConvexPolyhedron> {
        let n = self.dim + other.dim;
        let left: Vec<usize> = (0..self.dim).collect();
        let right: Vec<usize> = (self.dim..n).collect();
        self.embed(n, &left)?.intersect(&other.embed(n, &right)?)
    }

    /// Fixes the coordinates `coords` to `values`; the result lives on the remaining coordinates.
    pub fn slice(&self, coords: &[usize], values: &QVector) -> Result<ConvexPolyhedron> {
        check_dim(coords.len(), values.dim())?;
        let rest: Vec<usize> = (0..self.dim).filter(|i| !coords.contains(i)).collect();
        let cut = |c: &Constraint| {
            let mut b = c.offset.clone();
            for (k, &i) in coords.iter().enumerate() {
                b -= &c.normal[i] * &values[k];
            }
            Constraint::new(c.normal.select(&rest), b)
        };
        Ok(Self::from_parts(
            rest.len(),
            self.inequalities.iter().map(cut).collect(),
            self.equalities.iter().map(cut).collect(),
        ))
    }

    /// `self + v`
    pub fn translate(&self, v: &QVector) -> Result<ConvexPolyhedron> {
        check_dim(self.dim, v.dim())?;
        let shift = |c: &Constraint| Constraint::new(c.normal.clone(), &c.offset + c.normal.dot(v));
        Ok(Self::from_parts(
            self.dim,
            self.inequalities.iter().map(shift).collect(),
            self.equalities.iter().map(shift).collect(),
        ))
    }

    /// Exact shadow on the coordinates `keep` (in the given order).
    pub fn eliminate(&self, keep: &[usize]) -> Result<ConvexPolyhedron> {
        for &k in keep {
            if k >= self.dim {
                return Err(Error::InvalidParameter(format!(
                    "coordinate {k} outside dimension {}",
                    self.dim
                )));
            }
        }
        if self.is_empty() {
            return Ok(Self::empty(keep.len()));
        }
        let mut ineqs = self.inequalities.clone();
        let mut eqs = self.equalities.clone();
        for j in (0..self.dim).filter(|j| !keep.contains(j)) {
            if let Some(k) = eqs.iter().position(|e| !e.normal[j].is_zero()) {
                let e = eqs.remove(k);
                let sub = |c: &Constraint| {
                    if c.normal[j].is_zero() {
                        return c.clone();
                    }
                    let f = &c.normal[j] / &e.normal[j];
                    Constraint::new(c.normal.add_scaled(&-f.clone(), &e.normal), &c.offset - &f * &e.offset)
                };
                ineqs = ineqs.iter().map(sub).collect();
                eqs = eqs.iter().map(sub).collect();
            } else {
                let mut next = Vec::new();
                let (mut pos, mut neg) = (Vec::new(), Vec::new());
                for c in ineqs {
                    if c.normal[j].is_positive() {
                        pos.push(c);
                    } else if c.normal[j].is_negative() {
                        neg.push(c);
                    } else {
                        next.push(c);
                    }
                }
                for p in &pos {
                    for q in &neg {
                        let sp = p.normal[j].recip();
                        let sq = -q.normal[j].recip();
                        let normal = p.normal.scale(&sp).add_scaled(&sq, &q.normal);
                        let offset = &p.offset * &sp + &q.offset * &sq;
                        next.push(Constraint::new(normal, offset));
                    }
                }
                let reduced = Self::from_parts(self.dim, next, eqs.clone());
                ineqs = if reduced.inequalities.len() > 16 {
                    reduced.without_redundancy().inequalities
                } else {
                    reduced.inequalities
                };
                eqs = reduced.equalities;
            }
        }
        let project = |c: &Constraint| Constraint::new(c.normal.select(keep), c.offset.clone());
        let out = Self::from_parts(
            keep.len(),
            ineqs.iter().map(project).collect(),
            eqs.iter().map(project).collect(),
        );
        Ok(out.without_redundancy())
    }

    /// Drops inequalities implied by the remaining rows.
    pub fn without_redundancy(&self) -> ConvexPolyhedron {
        if self.is_empty() {
            return Self::empty(self.dim);
        }
        let mut keep: Vec<bool> = vec![true; self.inequalities.len()];
        for i in 0..self.inequalities.len() {
            let others: Vec<lp::Row> = self
                .inequalities
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i && keep[k])
                .map(|(_, c)| c.row())
                .collect();
            let c = &self.inequalities[i];
            if let LpOutcome::Optimal { value, .. } =
                lp::maximize(self.dim, &c.normal, &others, &self.eq_rows())
            {
                if value <= c.offset {
                    keep[i] = false;
                }
            }
        }
        let ineqs = self
            .inequalities
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(c, _)| c.clone())
            .collect();
        let out = Self::from_parts(self.dim, ineqs, self.equalities.clone());
        let _ = out.nonempty.set(true);
        out
    }

    pub fn is_subset(&self, other: &ConvexPolyhedron) -> Result<bool> {
        check_dim(self.dim, other.dim)?;
        if self.is_empty() {
            return Ok(true);
        }
        for c in &other.inequalities {
            match self.maximize(&c.normal) {
                LpOutcome::Optimal { value, .. } if value <= c.offset => {}
                _ => return Ok(false),
            }
        }
        for c in &other.equalities {
            for sign in [Rat::one(), -Rat::one()] {
                match self.maximize(&c.normal.scale(&sign)) {
                    LpOutcome::Optimal { value, .. } if value <= &c.offset * &sign => {}
                    _ => return Ok(false),
                }
            }
        }
        Ok(true)
    }

    pub fn set_eq(&self, other: &ConvexPolyhedron) -> Result<bool> {
        Ok(self.is_subset(other)? && other.is_subset(self)?)
    }

    /// Vertices (or, without vertices, one point per minimal face) and recession generators.
    pub fn vertices_and_rays(&self) -> Result<(Vec<QVector>, Generators)> {
        if self.is_empty() {
            return Ok((Vec::new(), Generators::default()));
        }
        let n = self.dim + 1;
        let mut rows: Vec<QVector> = Vec::new();
        for c in &self.inequalities {
            rows.push(c.normal.concat(&QVector::new(vec![-c.offset.clone()])));
        }
        for c in &self.equalities {
            let r = c.normal.concat(&QVector::new(vec![-c.offset.clone()]));
            rows.push(-&r);
            rows.push(r);
        }
        rows.push(-&QVector::unit(n, self.dim));
        let g = double_description(n, &rows)?;
        let mut points = Vec::new();
        let mut rays = Vec::new();
        for r in g.rays {
            let t = r[self.dim].clone();
            let head = r.slice(0..self.dim);
            if t.is_positive() {
                points.push(head.scale(&t.recip()));
            } else {
                rays.push(head);
            }
        }
        let lines: Vec<QVector> = g.lines.iter().map(|l| l.slice(0..self.dim)).collect();
        if points.is_empty() {
            // lines present and no pointed part: any feasible point represents the minimal face
            points.push(self.feasible_point().expect("nonempty"));
        }
        points.sort();
        points.dedup();
        rays.sort();
        Ok((points, Generators { rays, lines }))
    }

    pub fn is_bounded(&self) -> Result<bool> {
        let (_, g) = self.vertices_and_rays()?;
        Ok(g.is_empty())
    }

    /// Euclidean projection of `v` and the squared distance; `None` when empty.
    pub fn project_point(&self, v: &QVector) -> Result<Option<(QVector, Rat)>> {
        check_dim(self.dim, v.dim())?;
        if self.is_empty() {
            return Ok(None);
        }
        if self.contains(v)? {
            return Ok(Some((v.clone(), Rat::zero())));
        }
        // independent subset of the equalities
        let mut eq_rows: Vec<&Constraint> = Vec::new();
        let mut normals: Vec<QVector> = Vec::new();
        for c in &self.equalities {
            normals.push(c.normal.clone());
            if rank(&normals, self.dim) == normals.len() {
                eq_rows.push(c);
            } else {
                normals.pop();
            }
        }
        let free = self.dim - eq_rows.len();
        let m = self.inequalities.len();
        for size in 0..=free.min(m) {
            let mut subset: Vec<usize> = (0..size).collect();
            loop {
                if let Some(res) = self.kkt_candidate(v, &eq_rows, &subset) {
                    return Ok(Some(res));
                }
                if !next_subset(&mut subset, m) {
                    break;
                }
            }
        }
        Err(Error::Undecided("projection active set not found".into()))
    }

    fn kkt_candidate(
        &self,
        v: &QVector,
        eq_rows: &[&Constraint],
        subset: &[usize],
    ) -> Option<(QVector, Rat)> {
        let rows: Vec<&Constraint> = eq_rows
            .iter()
            .copied()
            .chain(subset.iter().map(|&i| &self.inequalities[i]))
            .collect();
        let k = rows.len();
        let x = if k == 0 {
            v.clone()
        } else {
            let gram: Vec<Vec<Rat>> = rows
                .iter()
                .map(|a| rows.iter().map(|b| a.normal.dot(&b.normal)).collect())
                .collect();
            let rhs: Vec<Rat> = rows.iter().map(|c| c.normal.dot(v) - &c.offset).collect();
            let lambda = solve(gram, rhs)?;
            if lambda[eq_rows.len()..].iter().any(Signed::is_negative) {
                return None;
            }
            let mut x = v.clone();
            for (c, l) in rows.iter().zip(&lambda) {
                x = x.add_scaled(&-l.clone(), &c.normal);
            }
            x
        };
        if !self.contains(&x).ok()? {
            return None;
        }
        let d = (v - &x).norm_sq();
        Some((x, d))
    }

    pub fn distance_sq(&self, v: &QVector) -> Result<Option<Rat>> {
        Ok(self.project_point(v)?.map(|(_, d)| d))
    }
}

/// Advances a sorted index subset of `{0..m}` to the next one of equal size.
pub(crate) fn next_subset(subset: &mut [usize], m: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < m - k + i {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rational::{rat, ratio};

    fn v(c: &[i64]) -> QVector {
        QVector::from_ints(c)
    }

    fn unit_interval() -> ConvexPolyhedron {
        ConvexPolyhedron::boxed(&[Some(rat(0))], &[Some(rat(1))])
    }

    #[test]
    fn membership() {
        let p = unit_interval();
        assert!(p.contains(&v(&[0])).unwrap());
        assert!(!p.contains(&v(&[2])).unwrap());
        let empty = ConvexPolyhedron::new(
            1,
            vec![
                Constraint::new(v(&[-1]), rat(0)),
                Constraint::new(v(&[-1]), rat(-1)),
                Constraint::new(v(&[1]), rat(-1)),
            ],
            vec![],
        )
        .unwrap();
        assert!(!empty.contains(&v(&[0])).unwrap());
        assert!(empty.is_empty());
        assert!(p.contains(&v(&[0, 0])).is_err());
    }

    #[test]
    fn tangent_cones() {
        let p = unit_interval();
        let t = p.active_tangent_cone(&v(&[0])).unwrap();
        assert!(t.contains(&v(&[1])).unwrap() && !t.contains(&v(&[-1])).unwrap());
        let t = p.active_tangent_cone(&QVector::new(vec![ratio(1, 2)])).unwrap();
        assert!(t.is_full());
        let sq = ConvexPolyhedron::boxed(&[Some(rat(0)), Some(rat(0))], &[Some(rat(1)), Some(rat(1))]);
        let t = sq.active_tangent_cone(&v(&[0, 0])).unwrap();
        assert_eq!(t.generators().unwrap().rays, vec![v(&[0, 1]), v(&[1, 0])]);
        assert_eq!(p.active_tangent_cone(&v(&[3])).unwrap_err(), Error::PointNotInSet);
    }

    #[test]
    fn elimination_examples() {
        // y = x, z = 2y keep (x, z)
        let p = ConvexPolyhedron::new(
            3,
            vec![],
            vec![
                Constraint::new(v(&[1, -1, 0]), rat(0)),
                Constraint::new(v(&[0, 2, -1]), rat(0)),
            ],
        )
        .unwrap();
        let e = p.eliminate(&[0, 2]).unwrap();
        let expected =
            ConvexPolyhedron::new(2, vec![], vec![Constraint::new(v(&[2, -1]), rat(0))]).unwrap();
        assert!(e.set_eq(&expected).unwrap());
        let tri = ConvexPolyhedron::new(
            2,
            vec![
                Constraint::new(v(&[1, 1]), rat(1)),
                Constraint::new(v(&[-1, 0]), rat(0)),
                Constraint::new(v(&[0, -1]), rat(0)),
            ],
            vec![],
        )
        .unwrap();
        let e = tri.eliminate(&[0]).unwrap();
        assert_eq!(e, unit_interval());
    }

    #[test]
    fn vertices_of_triangle() {
        let tri = ConvexPolyhedron::new(
            2,
            vec![
                Constraint::new(v(&[1, 1]), rat(1)),
                Constraint::new(v(&[-1, 0]), rat(0)),
                Constraint::new(v(&[0, -1]), rat(0)),
            ],
            vec![],
        )
        .unwrap();
        let (pts, g) = tri.vertices_and_rays().unwrap();
        assert_eq!(pts, vec![v(&[0, 0]), v(&[0, 1]), v(&[1, 0])]);
        assert!(g.is_empty());
        let half = ConvexPolyhedron::boxed(&[Some(rat(0))], &[None]);
        let (pts, g) = half.vertices_and_rays().unwrap();
        assert_eq!(pts, vec![v(&[0])]);
        assert_eq!(g.rays, vec![v(&[1])]);
    }

    #[test]
    fn point_projection() {
        let tri = ConvexPolyhedron::new(
            2,
            vec![
                Constraint::new(v(&[1, 1]), rat(1)),
                Constraint::new(v(&[-1, 0]), rat(0)),
                Constraint::new(v(&[0, -1]), rat(0)),
            ],
            vec![],
        )
        .unwrap();
        let (p, d) = tri.project_point(&v(&[1, 1])).unwrap().unwrap();
        assert_eq!(p, QVector::new(vec![ratio(1, 2), ratio(1, 2)]));
        assert_eq!(d, ratio(1, 2));
        let (p, d) = tri.project_point(&v(&[3, -1])).unwrap().unwrap();
        assert_eq!(p, v(&[1, 0]));
        assert_eq!(d, rat(5));
    }

    #[test]
    fn subsets_enumerate() {
        let mut s = vec![0, 1];
        let mut all = vec![s.clone()];
        while next_subset(&mut s, 4) {
            all.push(s.clone());
        }
        assert_eq!(all.len(), 6);
    }

    #[test]
    fn relative_interior() {
        let seg = ConvexPolyhedron::new(
            2,
            vec![
                Constraint::new(v(&[-1, 0]), rat(0)),
                Constraint::new(v(&[1, 0]), rat(1)),
                Constraint::new(v(&[1, -1]), rat(0)),
                Constraint::new(v(&[-1, 1]), rat(0)),
            ],
            vec![],
        )
        .unwrap();
        let p = seg.relative_interior_point().unwrap();
        assert!(p[0].is_positive() && p[0] < rat(1) && p[0] == p[1]);
    }
}
