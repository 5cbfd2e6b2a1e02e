//! Conic contingent coderivatives of piecewise-linear mappings.
//!
//! Coderivative graphs are stored in applied coordinates `(x*, y*)`: a pair
//! belongs to the graph when `(x*, -y*)` is a normal to the mapping's graph.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::geometry::cone::strict_region_point;
use crate::geometry::rational::rat;
use crate::geometry::{ConeUnion, ConvexPolyhedron, PolyCone, QVector, Rat};
use crate::local::{
    contingent_cone, eps_cone_member_model, normal_cone_of, pull_toward, LocalConeModel, PLSet,
};
use crate::multifunction::PLMultifunction;

/// A mapping, a convex constraint set on its inputs, and a point of the restricted graph.
#[derive(Clone, Debug)]
pub struct ConstrainedPoint {
    pub mapping: PLMultifunction,
    pub omega: ConvexPolyhedron,
    pub x: QVector,
    pub y: QVector,
    restricted: PLMultifunction,
}

impl ConstrainedPoint {
    pub fn new(
        mapping: PLMultifunction,
        omega: ConvexPolyhedron,
        x: QVector,
        y: QVector,
    ) -> Result<ConstrainedPoint> {
        check_dim(mapping.in_dim(), omega.dim())?;
        check_dim(mapping.in_dim(), x.dim())?;
        check_dim(mapping.out_dim(), y.dim())?;
        if !omega.contains(&x)? || !mapping.contains(&x, &y)? {
            return Err(Error::PointNotInSet);
        }
        let restricted = mapping.restrict(&omega)?;
        Ok(ConstrainedPoint {
            mapping,
            omega,
            x,
            y,
            restricted,
        })
    }

    pub fn n(&self) -> usize {
        self.mapping.in_dim()
    }

    pub fn m(&self) -> usize {
        self.mapping.out_dim()
    }

    pub fn base(&self) -> QVector {
        self.x.concat(&self.y)
    }

    /// `S|Ω`
    pub fn restricted(&self) -> &PLMultifunction {
        &self.restricted
    }

    pub fn restricted_graph(&self) -> &PLSet {
        self.restricted.graph()
    }
}

/// One relatively open cell of the local face structure.
#[derive(Clone, Debug)]
pub struct Stratum {
    pub point: QVector,
    /// Sign of each arrangement hyperplane on the cell.
    pub signs: Vec<i8>,
    pub graph_model: LocalConeModel,
    /// Tangent cone of the input constraint set at the input part, when one is attached.
    pub omega_tangent: Option<PolyCone>,
}

#[derive(Clone, Debug)]
pub struct StratumCatalog {
    pub base: QVector,
    pub base_model: LocalConeModel,
    pub strata: Vec<Stratum>,
    /// Radius used for representatives; `None` when the local model is exact everywhere.
    pub delta: Option<Rat>,
    /// Set when the requested radius exceeded the exactness radius and was reduced.
    pub shrunk: bool,
    pub closure_flags: Vec<bool>,
}

/// Cells of the hyperplane arrangement of the local tangent structure that meet the tangent union.
pub fn stratify_set(
    set: &PLSet,
    base: &QVector,
    extra: &[QVector],
    delta: Option<&Rat>,
) -> Result<StratumCatalog> {
    let base_model = contingent_cone(set, base)?;
    let dim = set.dim();
    let (delta, shrunk) = effective_delta(delta, base_model.conical_radius.as_ref())?;
    let mut planes: Vec<QVector> = Vec::new();
    for piece in base_model.tangent.pieces() {
        planes.extend(piece.halfspaces().iter().map(QVector::line_key));
    }
    planes.extend(extra.iter().filter(|h| !h.is_zero()).map(QVector::line_key));
    planes.sort();
    planes.dedup();
    let mut cells: BTreeMap<Vec<i8>, QVector> = BTreeMap::new();
    for piece in base_model.tangent.pieces() {
        let mut allowed: Vec<Vec<i8>> = vec![vec![-1, 0, 1]; planes.len()];
        for a in piece.halfspaces() {
            let key = a.line_key();
            let j = planes.binary_search(&key).expect("plane collected above");
            let s: i8 = if &key == a { 1 } else { -1 };
            allowed[j].retain(|&sg| sg == 0 || sg == -s);
        }
        let mut signs = Vec::new();
        enumerate_cells(dim, &planes, &allowed, &mut signs, &mut cells);
    }
    let reach = delta.clone().unwrap_or_else(|| rat(1));
    let strata = cells
        .into_iter()
        .map(|(signs, w)| -> Result<Stratum> {
            let scaled = pull_toward(&QVector::zeros(dim), &w, Some(&reach));
            let scaled = if scaled == w && !w.is_zero() {
                // always place representatives strictly inside the reach
                let l1 = w.norm_l1();
                w.scale(&(&reach / (rat(2) * l1)))
            } else {
                scaled
            };
            let point = base + &scaled;
            let graph_model = contingent_cone(set, &point)?;
            Ok(Stratum {
                point,
                signs,
                graph_model,
                omega_tangent: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let closure_flags = vec![true; strata.len()];
    Ok(StratumCatalog {
        base: base.clone(),
        base_model,
        strata,
        delta,
        shrunk,
        closure_flags,
    })
}

fn effective_delta(requested: Option<&Rat>, radius: Option<&Rat>) -> Result<(Option<Rat>, bool)> {
    if let Some(d) = requested {
        if !d.is_positive() {
            return Err(Error::InvalidParameter("delta must be positive".into()));
        }
    }
    Ok(match (requested, radius) {
        (Some(d), Some(r)) if d > r => (Some(r.clone()), true),
        (Some(d), _) => (Some(d.clone()), false),
        (None, Some(r)) => (Some(r / rat(2)), false),
        (None, None) => (None, false),
    })
}

fn enumerate_cells(
    dim: usize,
    planes: &[QVector],
    allowed: &[Vec<i8>],
    signs: &mut Vec<i8>,
    out: &mut BTreeMap<Vec<i8>, QVector>,
) {
    let point = {
        let mut closed = Vec::new();
        let mut strict = Vec::new();
        for (h, &s) in planes.iter().zip(signs.iter()) {
            match s {
                0 => {
                    closed.push(h.clone());
                    closed.push(-h);
                }
                1 => strict.push(h.clone()),
                _ => strict.push(-h),
            }
        }
        strict_region_point(dim, &closed, &strict)
    };
    let Some(point) = point else {
        return;
    };
    let j = signs.len();
    if j == planes.len() {
        out.entry(signs.clone()).or_insert(point);
        return;
    }
    for &s in &allowed[j] {
        signs.push(s);
        enumerate_cells(dim, planes, allowed, signs, out);
        signs.pop();
    }
}

/// Strata of `gph S|Ω` near the base point, with the tangent cone of `Ω` at each input part.
pub fn stratify(pt: &ConstrainedPoint, delta: Option<&Rat>) -> Result<StratumCatalog> {
    let n = pt.n();
    let dim = n + pt.m();
    let xs: Vec<usize> = (0..n).collect();
    let extra: Vec<QVector> = pt
        .omega
        .active_indices(&pt.x)
        .into_iter()
        .map(|i| pt.omega.inequalities()[i].normal.embed(dim, &xs))
        .collect();
    let mut catalog = stratify_set(pt.restricted_graph(), &pt.base(), &extra, delta)?;
    for s in catalog.strata.iter_mut() {
        let x = s.point.slice(0..n);
        s.omega_tangent = Some(pt.omega.active_tangent_cone(&x)?);
    }
    Ok(catalog)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoderivativeKind {
    EpsRegular(Rat),
    LimitingNormal,
    LimitingMixed,
    Mirror,
}

/// A coderivative as a cone union in applied coordinates `(x*, y*)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoderivativeGraph {
    pub in_dim: usize,
    pub out_dim: usize,
    pub cones: ConeUnion,
    pub kind: CoderivativeKind,
    pub base: QVector,
}

/// Squared value of a norm: exact, bracketed, or infinite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SquaredBound {
    Exact(Rat),
    Interval { lo: Rat, hi: Rat },
    Unbounded,
}

impl SquaredBound {
    pub fn is_bounded(&self) -> bool {
        !matches!(self, SquaredBound::Unbounded)
    }

    pub fn upper(&self) -> Option<&Rat> {
        match self {
            SquaredBound::Exact(v) => Some(v),
            SquaredBound::Interval { hi, .. } => Some(hi),
            SquaredBound::Unbounded => None,
        }
    }

    pub fn lower(&self) -> Option<&Rat> {
        match self {
            SquaredBound::Exact(v) => Some(v),
            SquaredBound::Interval { lo, .. } => Some(lo),
            SquaredBound::Unbounded => None,
        }
    }
}

/// Cone with the output block of every halfspace negated: `(a, b) -> (a, -b)`.
pub fn flip_output(cone: &PolyCone, n: usize) -> Result<PolyCone> {
    let rows = cone
        .halfspaces()
        .iter()
        .map(|h| {
            h.iter()
                .enumerate()
                .map(|(i, c)| if i < n { c.clone() } else { -c.clone() })
                .collect()
        })
        .collect();
    PolyCone::from_halfspaces(cone.dim(), rows)
}

impl CoderivativeGraph {
    pub fn dim(&self) -> usize {
        self.in_dim + self.out_dim
    }

    pub fn contains(&self, xstar: &QVector, ystar: &QVector) -> Result<bool> {
        self.cones.contains(&xstar.concat(ystar))
    }

    /// `D(y*)` as a union of polyhedra in `X*`.
    pub fn apply(&self, ystar: &QVector) -> Result<PLSet> {
        check_dim(self.out_dim, ystar.dim())?;
        let coords: Vec<usize> = (self.in_dim..self.dim()).collect();
        let pieces = self
            .cones
            .pieces()
            .iter()
            .map(|c| c.to_polyhedron().slice(&coords, ystar))
            .collect::<Result<Vec<_>>>()?;
        PLSet::new(self.in_dim, pieces)
    }

    /// `D(0)` as a cone union in `X*`.
    pub fn zero_slice(&self) -> Result<ConeUnion> {
        let pieces = self
            .cones
            .pieces()
            .iter()
            .map(|c| {
                let rows = c.halfspaces().iter().map(|h| h.slice(0..self.in_dim)).collect();
                PolyCone::from_halfspaces(self.in_dim, rows)
            })
            .collect::<Result<Vec<_>>>()?;
        ConeUnion::new(self.in_dim, pieces)
    }

    /// `sup{|x*|² : x* ∈ D(y*), |y*| <= 1}`
    pub fn norm(&self) -> Result<SquaredBound> {
        cone_union_norm(self.in_dim, self.out_dim, self.cones.pieces())
    }

    pub fn set_eq(&self, other: &CoderivativeGraph) -> Result<bool> {
        self.cones.set_eq(&other.cones)
    }
}

/// Norm of the positively homogeneous map whose graph is the union of `pieces`.
///
/// Exact for one output; for several outputs the unit box stands in for the unit ball and
/// the result brackets the value.
pub(crate) fn cone_union_norm(n: usize, m: usize, pieces: &[PolyCone]) -> Result<SquaredBound> {
    for piece in pieces {
        let rows = piece.halfspaces().iter().map(|h| h.slice(0..n)).collect();
        if !PolyCone::from_halfspaces(n, rows)?.is_zero()? {
            return Ok(SquaredBound::Unbounded);
        }
    }
    let mut lo = Rat::zero();
    let mut hi = Rat::zero();
    let unit_box = ConvexPolyhedron::boxed(&vec![Some(rat(-1)); m], &vec![Some(rat(1)); m])
        .embed(n + m, &(n..n + m).collect::<Vec<_>>())?;
    for piece in pieces {
        let body = piece.to_polyhedron().intersect(&unit_box)?;
        let (vertices, rays) = body.vertices_and_rays()?;
        if !rays.is_empty() {
            return Ok(SquaredBound::Unbounded);
        }
        for v in vertices {
            let xs = v.slice(0..n).norm_sq();
            let ys = v.slice(n..n + m).norm_sq();
            if xs > hi {
                hi = xs.clone();
            }
            if !ys.is_zero() {
                let r = xs / ys;
                if r > lo {
                    lo = r;
                }
            }
        }
    }
    Ok(if lo == hi {
        SquaredBound::Exact(hi)
    } else {
        SquaredBound::Interval { lo, hi }
    })
}

/// `(x*, -y*)` is an ε-regular normal to `gph S|Ω` at the base and `x* ∈ T(x̄; Ω)`.
pub fn eps_conic_coderivative_member(
    pt: &ConstrainedPoint,
    xstar: &QVector,
    ystar: &QVector,
    eps: &Rat,
) -> Result<bool> {
    check_dim(pt.n(), xstar.dim())?;
    check_dim(pt.m(), ystar.dim())?;
    if eps.is_negative() {
        return Err(Error::InvalidParameter("eps must be nonnegative".into()));
    }
    if !pt.omega.active_tangent_cone(&pt.x)?.contains(xstar)? {
        return Ok(false);
    }
    let model = contingent_cone(pt.restricted_graph(), &pt.base())?;
    eps_cone_member_model(&model, &xstar.concat(&(-ystar)), eps)
}

/// Coderivative piece contributed by one stratum.
pub(crate) fn stratum_piece(n: usize, dim: usize, s: &Stratum) -> Result<PolyCone> {
    let normal = normal_cone_of(&s.graph_model.tangent)?;
    let mut piece = flip_output(&normal, n)?;
    if let Some(t) = &s.omega_tangent {
        let xs: Vec<usize> = (0..n).collect();
        piece = piece.intersect(&t.embed(dim, &xs)?)?;
    }
    Ok(piece)
}

/// Limiting conic contingent coderivative (normal or mixed; they coincide here).
pub fn limiting_coderivative(pt: &ConstrainedPoint, kind: CoderivativeKind) -> Result<CoderivativeGraph> {
    if !matches!(kind, CoderivativeKind::LimitingNormal | CoderivativeKind::LimitingMixed) {
        return Err(Error::InvalidParameter("expected a limiting kind".into()));
    }
    let catalog = stratify(pt, None)?;
    limiting_from_catalog(pt, &catalog, kind)
}

pub fn limiting_from_catalog(
    pt: &ConstrainedPoint,
    catalog: &StratumCatalog,
    kind: CoderivativeKind,
) -> Result<CoderivativeGraph> {
    let (n, m) = (pt.n(), pt.m());
    let pieces = catalog
        .strata
        .par_iter()
        .zip(&catalog.closure_flags)
        .filter(|(_, &adheres)| adheres)
        .map(|(s, _)| stratum_piece(n, n + m, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(CoderivativeGraph {
        in_dim: n,
        out_dim: m,
        cones: ConeUnion::new(n + m, pieces)?,
        kind,
        base: pt.base(),
    })
}

/// The ε = 0 regular coderivative at the base point itself.
pub fn regular_coderivative(pt: &ConstrainedPoint) -> Result<CoderivativeGraph> {
    let (n, m) = (pt.n(), pt.m());
    let model = contingent_cone(pt.restricted_graph(), &pt.base())?;
    let s = Stratum {
        point: pt.base(),
        signs: Vec::new(),
        graph_model: model,
        omega_tangent: Some(pt.omega.active_tangent_cone(&pt.x)?),
    };
    Ok(CoderivativeGraph {
        in_dim: n,
        out_dim: m,
        cones: ConeUnion::single(stratum_piece(n, n + m, &s)?),
        kind: CoderivativeKind::EpsRegular(Rat::zero()),
        base: pt.base(),
    })
}

/// Mirror coderivative of `S` relative to an output set `theta`.
///
/// A pair `(x*, y*)` belongs to the graph when `(x*, -y*)` is normal to
/// `gph(S(·) ∩ Θ)` on some stratum and `-y*` is tangent to `Θ` there.
pub fn mirror_coderivative(
    s: &PLMultifunction,
    theta: &PLSet,
    x: &QVector,
    y: &QVector,
) -> Result<CoderivativeGraph> {
    let (n, m) = (s.in_dim(), s.out_dim());
    check_dim(m, theta.dim())?;
    let dim = n + m;
    let ys: Vec<usize> = (n..dim).collect();
    let lifted_theta = theta.embed(dim, &ys)?;
    let graph = s.graph().intersect(&lifted_theta)?;
    let base = x.concat(y);
    if !graph.contains(&base)? {
        return Err(Error::PointNotInSet);
    }
    let theta_model = contingent_cone(theta, y)?;
    let mut extra = Vec::new();
    for piece in theta_model.tangent.pieces() {
        extra.extend(piece.halfspaces().iter().map(|h| h.embed(dim, &ys)));
    }
    let catalog = stratify_set(&graph, &base, &extra, None)?;
    let mut pieces = Vec::new();
    for st in &catalog.strata {
        let normal = flip_output(&normal_cone_of(&st.graph_model.tangent)?, n)?;
        let tmodel = contingent_cone(theta, &st.point.slice(n..dim))?;
        for t in tmodel.tangent.pieces() {
            let side: Vec<QVector> = t.halfspaces().iter().map(|h| (-h).embed(dim, &ys)).collect();
            pieces.push(normal.intersect(&PolyCone::from_halfspaces(dim, side)?)?);
        }
    }
    Ok(CoderivativeGraph {
        in_dim: n,
        out_dim: m,
        cones: ConeUnion::new(dim, pieces)?,
        kind: CoderivativeKind::Mirror,
        base,
    })
}

/// Outcome of the normality comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalityVerdict {
    pub normal: bool,
    pub note: String,
}

/// Compares the limiting normal and mixed constructions.
pub fn coderivative_normality_check(pt: &ConstrainedPoint) -> Result<NormalityVerdict> {
    let normal = limiting_coderivative(pt, CoderivativeKind::LimitingNormal)?;
    let mixed = limiting_coderivative(pt, CoderivativeKind::LimitingMixed)?;
    if !normal.set_eq(&mixed)? {
        return Err(Error::Undecided("normal and mixed coderivatives differ".into()));
    }
    let same = normal.norm()? == mixed.norm()?;
    Ok(NormalityVerdict {
        normal: same,
        note: "dual convergence modes coincide in finite dimensions; both graphs agree".into(),
    })
}

/// Partial sequential normal compactness, automatic in finite dimensions.
pub fn psnc_verdict(_pt: &ConstrainedPoint) -> NormalityVerdict {
    NormalityVerdict {
        normal: true,
        note: "weak* and norm convergence agree in finite dimensions".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::geometry::rational::ratio;

    fn v(c: &[i64]) -> QVector {
        QVector::from_ints(c)
    }

    fn q(n: i64, d: i64) -> QVector {
        QVector::new(vec![ratio(n, d)])
    }

    #[test]
    fn eps_member_examples() {
        let pt = fixtures::inst_id();
        assert!(eps_conic_coderivative_member(&pt, &v(&[1]), &v(&[1]), &rat(0)).unwrap());
        assert!(!eps_conic_coderivative_member(&pt, &v(&[-1]), &v(&[0]), &ratio(1, 2)).unwrap());
        assert!(eps_conic_coderivative_member(&pt, &v(&[0]), &v(&[0]), &rat(0)).unwrap());
    }

    #[test]
    fn stratum_counts() {
        let pt = fixtures::inst_id();
        assert_eq!(stratify(&pt, Some(&ratio(1, 2))).unwrap().strata.len(), 2);
        let abs = fixtures::inst_abs_full();
        assert_eq!(stratify(&abs, None).unwrap().strata.len(), 3);
        let full = PLSet::single(ConvexPolyhedron::full(2));
        assert_eq!(stratify_set(&full, &v(&[1, 1]), &[], None).unwrap().strata.len(), 1);
    }

    #[test]
    fn delta_is_shrunk() {
        let pt = fixtures::inst_id();
        let c = stratify(&pt, Some(&rat(5))).unwrap();
        assert!(c.shrunk);
        assert_eq!(c.delta, Some(ratio(1, 2)));
    }

    #[test]
    fn inst_id_slices() {
        let d = limiting_coderivative(&fixtures::inst_id(), CoderivativeKind::LimitingMixed).unwrap();
        let s = d.apply(&v(&[1])).unwrap();
        assert!(s.contains(&v(&[0])).unwrap() && s.contains(&q(1, 2)).unwrap() && s.contains(&v(&[1])).unwrap());
        assert!(!s.contains(&q(11, 10)).unwrap() && !s.contains(&q(-1, 10)).unwrap());
        let s = d.apply(&v(&[0])).unwrap();
        assert!(s.contains(&v(&[0])).unwrap() && !s.contains(&q(1, 10)).unwrap() && !s.contains(&q(-1, 10)).unwrap());
        let s = d.apply(&v(&[-1])).unwrap();
        assert!(s.contains(&v(&[-1])).unwrap());
        assert!(!s.contains(&q(-9, 10)).unwrap() && !s.contains(&q(-11, 10)).unwrap());
    }

    #[test]
    fn norms() {
        let d = limiting_coderivative(&fixtures::inst_id(), CoderivativeKind::LimitingNormal).unwrap();
        assert_eq!(d.norm().unwrap(), SquaredBound::Exact(rat(1)));
        let c = limiting_coderivative(&fixtures::constant_zero(), CoderivativeKind::LimitingNormal).unwrap();
        assert_eq!(c.norm().unwrap(), SquaredBound::Exact(rat(0)));
        let a = limiting_coderivative(&fixtures::inst_abs_full(), CoderivativeKind::LimitingNormal).unwrap();
        assert_eq!(a.norm().unwrap(), SquaredBound::Unbounded);
        assert!(a.apply(&v(&[0])).unwrap().contains(&v(&[-1])).unwrap());
        let h = limiting_coderivative(&fixtures::inst_abs_half(), CoderivativeKind::LimitingNormal).unwrap();
        assert_eq!(h.norm().unwrap(), SquaredBound::Exact(rat(1)));
    }

    #[test]
    fn normality_and_psnc() {
        for pt in [fixtures::inst_id(), fixtures::constant_zero(), fixtures::inst_abs_full()] {
            assert!(coderivative_normality_check(&pt).unwrap().normal);
            assert!(psnc_verdict(&pt).normal);
        }
    }

    #[test]
    fn mirror_examples() {
        let id = PLMultifunction::identity(1);
        let full = PLSet::single(ConvexPolyhedron::full(1));
        let o = v(&[0]);
        let m = mirror_coderivative(&id, &full, &o, &o).unwrap();
        let pt = ConstrainedPoint::new(id.clone(), ConvexPolyhedron::full(1), o.clone(), o.clone()).unwrap();
        let l = limiting_coderivative(&pt, CoderivativeKind::LimitingNormal).unwrap();
        assert!(m.set_eq(&l).unwrap());
        let unit = PLSet::single(ConvexPolyhedron::boxed(&[Some(rat(0))], &[Some(rat(1))]));
        let m = mirror_coderivative(&id, &unit, &o, &o).unwrap();
        let s = m.apply(&v(&[1])).unwrap();
        assert!(s.contains(&v(&[1])).unwrap());
        assert!(!s.contains(&v(&[0])).unwrap());
        assert!(m.apply(&v(&[0])).unwrap().contains(&v(&[0])).unwrap());
    }
}
