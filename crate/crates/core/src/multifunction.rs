//! Piecewise-linear set-valued mappings given by polyhedral graphs.

use num_traits::{Signed, Zero};

use crate::error::{check_dim, Error, Result};
use crate::geometry::rational::rat;
use crate::geometry::{Constraint, ConvexPolyhedron, QVector, Rat};
use crate::local::PLSet;

/// `S : Q^n ⇉ Q^m` with graph a finite union of convex polyhedra in `Q^(n+m)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PLMultifunction {
    in_dim: usize,
    out_dim: usize,
    graph: PLSet,
}

impl PLMultifunction {
    pub fn new(in_dim: usize, out_dim: usize, graph: PLSet) -> Result<PLMultifunction> {
        check_dim(in_dim + out_dim, graph.dim())?;
        Ok(PLMultifunction {
            in_dim,
            out_dim,
            graph,
        })
    }

    pub fn from_pieces(
        in_dim: usize,
        out_dim: usize,
        pieces: Vec<ConvexPolyhedron>,
    ) -> Result<PLMultifunction> {
        Self::new(in_dim, out_dim, PLSet::new(in_dim + out_dim, pieces)?)
    }

    /// `x -> M x + c` on the polyhedron `domain`.
    pub fn affine(rows: &[QVector], shift: &QVector, domain: &ConvexPolyhedron) -> Result<PLMultifunction> {
        let n = domain.dim();
        let m = rows.len();
        check_dim(m, shift.dim())?;
        let mut eqs = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            check_dim(n, r.dim())?;
            let normal = r.concat(&(-&QVector::unit(m, i)));
            eqs.push(Constraint::new(normal, -shift[i].clone()));
        }
        let left: Vec<usize> = (0..n).collect();
        let piece = domain
            .embed(n + m, &left)?
            .with_constraints(Vec::new(), eqs)?;
        Self::from_pieces(n, m, vec![piece])
    }

    pub fn identity(dim: usize) -> PLMultifunction {
        let rows: Vec<QVector> = (0..dim).map(|i| QVector::unit(dim, i)).collect();
        Self::affine(&rows, &QVector::zeros(dim), &ConvexPolyhedron::full(dim))
            .expect("dimensions agree")
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn graph(&self) -> &PLSet {
        &self.graph
    }

    fn input_coords(&self) -> Vec<usize> {
        (0..self.in_dim).collect()
    }

    fn output_coords(&self) -> Vec<usize> {
        (self.in_dim..self.in_dim + self.out_dim).collect()
    }

    /// Graph intersected with `omega x Q^m`.
    pub fn restrict(&self, omega: &ConvexPolyhedron) -> Result<PLMultifunction> {
        check_dim(self.in_dim, omega.dim())?;
        let lifted = omega.embed(self.in_dim + self.out_dim, &self.input_coords())?;
        Self::new(self.in_dim, self.out_dim, self.graph.intersect_polyhedron(&lifted)?)
    }

    /// Swaps the roles of inputs and outputs.
    pub fn invert(&self) -> PLMultifunction {
        let (n, m) = (self.in_dim, self.out_dim);
        let map: Vec<usize> = (0..n).map(|i| m + i).chain(0..m).collect();
        let graph = self.graph.embed(n + m, &map).expect("permutation keeps dimension");
        PLMultifunction {
            in_dim: m,
            out_dim: n,
            graph,
        }
    }

    /// `x -> S1(x) + S2(x)`
    pub fn sum(&self, other: &PLMultifunction) -> Result<PLMultifunction> {
        check_dim(self.in_dim, other.in_dim)?;
        check_dim(self.out_dim, other.out_dim)?;
        let (n, m) = (self.in_dim, self.out_dim);
        let total = n + 3 * m;
        let xs: Vec<usize> = (0..n).collect();
        let y1: Vec<usize> = (n..n + m).collect();
        let y2: Vec<usize> = (n + m..n + 2 * m).collect();
        let ys: Vec<usize> = (n + 2 * m..total).collect();
        let map1: Vec<usize> = xs.iter().chain(&y1).copied().collect();
        let map2: Vec<usize> = xs.iter().chain(&y2).copied().collect();
        let link: Vec<Constraint> = (0..m)
            .map(|i| {
                let mut normal = QVector::unit(total, ys[i]).into_coords();
                normal[y1[i]] = rat(-1);
                normal[y2[i]] = rat(-1);
                Constraint::new(QVector::new(normal), Rat::zero())
            })
            .collect();
        let keep: Vec<usize> = xs.iter().chain(&ys).copied().collect();
        let mut pieces = Vec::new();
        for a in self.graph.pieces() {
            for b in other.graph.pieces() {
                let joint = a
                    .embed(total, &map1)?
                    .intersect(&b.embed(total, &map2)?)?
                    .with_constraints(Vec::new(), link.clone())?;
                if !joint.is_empty() {
                    pieces.push(joint.eliminate(&keep)?);
                }
            }
        }
        Self::from_pieces(n, m, pieces)
    }

    /// `x -> S2(S1(x))` where `self` is `S1`.
    pub fn compose(&self, outer: &PLMultifunction) -> Result<PLMultifunction> {
        check_dim(self.out_dim, outer.in_dim)?;
        let (n, m, p) = (self.in_dim, self.out_dim, outer.out_dim);
        let total = n + m + p;
        let map1: Vec<usize> = (0..n + m).collect();
        let map2: Vec<usize> = (n..total).collect();
        let keep: Vec<usize> = (0..n).chain(n + m..total).collect();
        let mut pieces = Vec::new();
        for a in self.graph.pieces() {
            for b in outer.graph.pieces() {
                let joint = a.embed(total, &map1)?.intersect(&b.embed(total, &map2)?)?;
                if !joint.is_empty() {
                    pieces.push(joint.eliminate(&keep)?);
                }
            }
        }
        Self::from_pieces(n, p, pieces)
    }

    /// `S(x)` as a subset of `Q^m`.
    pub fn evaluate(&self, x: &QVector) -> Result<PLSet> {
        check_dim(self.in_dim, x.dim())?;
        self.graph.slice(&self.input_coords(), x)
    }

    pub fn domain(&self) -> Result<PLSet> {
        self.graph.eliminate(&self.input_coords())
    }

    pub fn range(&self) -> Result<PLSet> {
        self.graph.eliminate(&self.output_coords())
    }

    pub fn contains(&self, x: &QVector, y: &QVector) -> Result<bool> {
        check_dim(self.in_dim, x.dim())?;
        check_dim(self.out_dim, y.dim())?;
        self.graph.contains(&x.concat(y))
    }
}

/// `G(x, z) = S1(x) ∩ S2^{-1}(z)`
pub fn chain_intermediate(
    s1: &PLMultifunction,
    s2: &PLMultifunction,
    x: &QVector,
    z: &QVector,
) -> Result<PLSet> {
    check_dim(s1.out_dim(), s2.in_dim())?;
    s1.evaluate(x)?.intersect(&s2.invert().evaluate(z)?)
}

/// `G(x, y) = {(y1, y2) : y1 ∈ S1(x), y2 ∈ S2(x), y1 + y2 = y}`
pub fn sum_intermediate(
    s1: &PLMultifunction,
    s2: &PLMultifunction,
    x: &QVector,
    y: &QVector,
) -> Result<PLSet> {
    check_dim(s1.out_dim(), s2.out_dim())?;
    let m = s1.out_dim();
    check_dim(m, y.dim())?;
    let a = s1.evaluate(x)?;
    let b = s2.evaluate(x)?;
    let link: Vec<Constraint> = (0..m)
        .map(|i| {
            let normal = QVector::unit(2 * m, i).add_scaled(&rat(1), &QVector::unit(2 * m, m + i));
            Constraint::new(normal, y[i].clone())
        })
        .collect();
    let mut pieces = Vec::new();
    for p in a.pieces() {
        for q in b.pieces() {
            pieces.push(p.product(q)?.with_constraints(Vec::new(), link.clone())?);
        }
    }
    PLSet::new(2 * m, pieces)
}

/// Outcome of the grid probe for inner semicontinuity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InnerProbe {
    pub verdict: bool,
    /// Largest squared ratio `dist(ȳ, G(x))² / |x − x̄|²` on the grid.
    pub slope_sq: Rat,
    /// Same ratio restricted to the inner half of the ball.
    pub inner_slope_sq: Rat,
    pub points: usize,
}

/// Grid probe: `dist(ȳ, G(x))` must shrink linearly as `x -> x̄` within the constraint set.
///
/// A numerical indication only; the property quantifies over all sequences.
pub fn inner_semicontinuity_probe(
    slice: impl Fn(&QVector) -> Result<PLSet> + Sync,
    constraint: &ConvexPolyhedron,
    base: &QVector,
    ybar: &QVector,
    step: &Rat,
    radius: &Rat,
) -> Result<InnerProbe> {
    if !step.is_positive() || step > radius {
        return Err(Error::InvalidParameter("grid step must lie in (0, radius]".into()));
    }
    let d = base.dim();
    let mut k = (radius / step).floor().to_integer();
    let max_per_axis = num_bigint::BigInt::from(match d {
        0 | 1 => 400,
        2 => 20,
        _ => 4,
    });
    let mut h = step.clone();
    if k > max_per_axis {
        h = radius / Rat::from_integer(max_per_axis.clone());
        k = max_per_axis;
    }
    let k: i64 = k.try_into().unwrap_or(1);
    let offsets = grid_offsets(d, k);
    let half_sq = radius * radius / rat(4);
    let results: Vec<Option<(Rat, Rat)>> = {
        use rayon::prelude::*;
        offsets
            .par_iter()
            .map(|off| -> Result<Option<(Rat, Rat)>> {
                let dx = off.scale(&h);
                if dx.is_zero() {
                    return Ok(None);
                }
                let x = base + &dx;
                if !constraint.contains(&x)? {
                    return Ok(None);
                }
                let g = slice(&x)?;
                match g.distance_sq(ybar)? {
                    None => Ok(None),
                    Some(dist) => Ok(Some((dist / dx.norm_sq(), dx.norm_sq()))),
                }
            })
            .collect::<Result<Vec<_>>>()?
    };
    let mut slope = Rat::zero();
    let mut inner = Rat::zero();
    let mut outer = Rat::zero();
    let mut points = 0;
    for (ratio, r2) in results.into_iter().flatten() {
        points += 1;
        if ratio > slope {
            slope = ratio.clone();
        }
        if r2 <= half_sq {
            if ratio > inner {
                inner = ratio;
            }
        } else if ratio > outer {
            outer = ratio;
        }
    }
    if points == 0 {
        return Ok(InnerProbe {
            verdict: true,
            slope_sq: Rat::zero(),
            inner_slope_sq: Rat::zero(),
            points,
        });
    }
    let verdict = inner <= rat(4) * &outer || inner.is_zero();
    Ok(InnerProbe {
        verdict,
        slope_sq: slope,
        inner_slope_sq: inner,
        points,
    })
}

/// Integer offsets in `{-k..k}^d`.
pub(crate) fn grid_offsets(d: usize, k: i64) -> Vec<QVector> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        let mut next = Vec::with_capacity(out.len() * (2 * k as usize + 1));
        for prefix in &out {
            for i in -k..=k {
                let mut p: Vec<i64> = prefix.clone();
                p.push(i);
                next.push(p);
            }
        }
        out = next;
    }
    out.into_iter().map(|p| QVector::from_ints(&p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rational::ratio;

    fn v(c: &[i64]) -> QVector {
        QVector::from_ints(c)
    }

    fn q(n: i64, d: i64) -> QVector {
        QVector::new(vec![ratio(n, d)])
    }

    fn unit_interval() -> ConvexPolyhedron {
        ConvexPolyhedron::boxed(&[Some(rat(0))], &[Some(rat(1))])
    }

    fn scale(c: i64) -> PLMultifunction {
        PLMultifunction::affine(&[v(&[c])], &v(&[0]), &ConvexPolyhedron::full(1)).unwrap()
    }

    fn abs_inverse() -> PLMultifunction {
        // graph {(x, y) : x = |y|}
        let branch = |s: i64| {
            ConvexPolyhedron::new(
                2,
                vec![Constraint::new(v(&[-1, 0]), rat(0))],
                vec![Constraint::new(v(&[1, -s]), rat(0))],
            )
            .unwrap()
        };
        PLMultifunction::from_pieces(1, 1, vec![branch(1), branch(-1)]).unwrap()
    }

    #[test]
    fn restrict_identity() {
        let s = PLMultifunction::identity(1).restrict(&unit_interval()).unwrap();
        assert!(s.contains(&v(&[1]), &v(&[1])).unwrap());
        assert!(!s.contains(&v(&[2]), &v(&[2])).unwrap());
        let same = PLMultifunction::identity(1).restrict(&ConvexPolyhedron::full(1)).unwrap();
        assert_eq!(same, PLMultifunction::identity(1));
        let s = abs_inverse().restrict(&ConvexPolyhedron::boxed(&[None], &[Some(rat(-1))])).unwrap();
        assert!(s.graph().is_empty());
    }

    #[test]
    fn inversion() {
        let inv = scale(2).invert();
        let y = inv.evaluate(&v(&[1])).unwrap();
        assert!(y.contains(&q(1, 2)).unwrap());
        assert_eq!(inv.invert(), scale(2));
        assert_eq!(PLMultifunction::identity(1).invert(), PLMultifunction::identity(1));
    }

    #[test]
    fn sums() {
        let id = PLMultifunction::identity(1);
        let two = id.sum(&id).unwrap();
        assert!(two.graph().set_eq_convex_pieces(scale(2).graph()).unwrap());
        let zero = id.sum(&scale(-1)).unwrap();
        assert!(zero.graph().set_eq_convex_pieces(scale(0).graph()).unwrap());
        let same = id.sum(&scale(0)).unwrap();
        assert!(same.graph().set_eq_convex_pieces(id.graph()).unwrap());
    }

    #[test]
    fn compositions() {
        let id = PLMultifunction::identity(1);
        let c = scale(3).compose(&id).unwrap();
        assert!(c.graph().set_eq_convex_pieces(scale(3).graph()).unwrap());
        let s1 = id.restrict(&unit_interval()).unwrap();
        let c = s1.compose(&scale(2)).unwrap();
        assert!(c.graph().set_eq_convex_pieces(scale(2).restrict(&unit_interval()).unwrap().graph()).unwrap());
        // |.| after the inverse of |.| is the identity on [0, inf)
        let abs = abs_inverse().invert();
        let c = abs_inverse().compose(&abs).unwrap();
        let half_line = ConvexPolyhedron::boxed(&[Some(rat(0))], &[None]);
        let expected = id.restrict(&half_line).unwrap();
        let target = &expected.graph().pieces()[0];
        assert!(c.graph().pieces().iter().all(|p| p.is_subset(target).unwrap()));
        assert!(c.graph().pieces().iter().any(|p| p.set_eq(target).unwrap()));
    }

    #[test]
    fn evaluation() {
        let id = PLMultifunction::identity(1);
        assert!(id.evaluate(&q(1, 3)).unwrap().contains(&q(1, 3)).unwrap());
        let s = abs_inverse();
        let y = s.evaluate(&q(1, 2)).unwrap();
        assert!(y.contains(&q(1, 2)).unwrap() && y.contains(&q(-1, 2)).unwrap());
        assert_eq!(y.pieces().len(), 2);
        assert!(s.evaluate(&v(&[-1])).unwrap().is_empty());
    }

    #[test]
    fn intermediates() {
        let id = PLMultifunction::identity(1);
        let g = chain_intermediate(&id, &id, &q(1, 4), &q(1, 4)).unwrap();
        assert!(g.contains(&q(1, 4)).unwrap());
        assert!(chain_intermediate(&id, &id, &q(1, 4), &q(1, 3)).unwrap().is_empty());
        // S1(x) = [0, x] on [0, 1]
        let cone = ConvexPolyhedron::new(
            2,
            vec![
                Constraint::new(v(&[0, -1]), rat(0)),
                Constraint::new(v(&[-1, 1]), rat(0)),
                Constraint::new(v(&[1, 0]), rat(1)),
            ],
            vec![],
        )
        .unwrap();
        let s1 = PLMultifunction::from_pieces(1, 1, vec![cone]).unwrap();
        let g = chain_intermediate(&s1, &id, &v(&[1]), &q(1, 2)).unwrap();
        assert_eq!(g.pieces().len(), 1);
        assert!(g.contains(&q(1, 2)).unwrap());
        let g = sum_intermediate(&id, &scale(-1), &v(&[3]), &v(&[0])).unwrap();
        assert!(g.contains(&v(&[3, -3])).unwrap());
        assert!(sum_intermediate(&id, &scale(-1), &v(&[3]), &v(&[1])).unwrap().is_empty());
        let g = sum_intermediate(&id, &scale(0), &v(&[2]), &v(&[2])).unwrap();
        assert!(g.contains(&v(&[2, 0])).unwrap());
    }

    #[test]
    fn inner_probe_examples() {
        let id = PLMultifunction::identity(1);
        let base = v(&[0, 0]);
        let slice = |p: &QVector| chain_intermediate(&id, &id, &p.slice(0..1), &p.slice(1..2));
        let r = inner_semicontinuity_probe(slice, &ConvexPolyhedron::full(2), &base, &v(&[0]), &ratio(1, 100), &ratio(1, 10)).unwrap();
        assert!(r.verdict);
        assert!(r.slope_sq <= rat(1));
        // jump: S1(x) = {0} for x <= 0 and {1} for x > 0 (closed at 0 with both values)
        let left = ConvexPolyhedron::new(2, vec![Constraint::new(v(&[1, 0]), rat(0))], vec![Constraint::new(v(&[0, 1]), rat(0))]).unwrap();
        let right = ConvexPolyhedron::new(2, vec![Constraint::new(v(&[-1, 0]), rat(0))], vec![Constraint::new(v(&[0, 1]), rat(1))]).unwrap();
        let jump = PLMultifunction::from_pieces(1, 1, vec![left, right]).unwrap();
        let r = inner_semicontinuity_probe(|x: &QVector| jump.evaluate(x), &ConvexPolyhedron::full(1), &v(&[0]), &v(&[0]), &ratio(1, 1000), &ratio(1, 10)).unwrap();
        assert!(!r.verdict);
        let constant = scale(0);
        let r = inner_semicontinuity_probe(|x: &QVector| constant.evaluate(x), &ConvexPolyhedron::full(1), &v(&[0]), &v(&[0]), &ratio(1, 100), &ratio(1, 10)).unwrap();
        assert!(r.verdict && r.slope_sq.is_zero());
    }
}
