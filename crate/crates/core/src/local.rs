//! Tangent and normal structures of piecewise-polyhedral sets at a point.

use num_traits::{Signed, Zero};

use crate::error::{check_dim, Error, Result};
use crate::geometry::rational::sqrt_lower_positive;
use crate::geometry::{ConeUnion, ConvexPolyhedron, PolyCone, QVector, Rat};

/// Finite union of convex polyhedra of a common dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PLSet {
    dim: usize,
    pieces: Vec<ConvexPolyhedron>,
}

impl PLSet {
    /// Empty pieces are dropped and duplicates removed.
    pub fn new(dim: usize, pieces: Vec<ConvexPolyhedron>) -> Result<PLSet> {
        for p in &pieces {
            check_dim(dim, p.dim())?;
        }
        let mut pieces: Vec<ConvexPolyhedron> =
            pieces.into_iter().filter(|p| !p.is_empty()).collect();
        pieces.sort();
        pieces.dedup();
        Ok(PLSet { dim, pieces })
    }

    pub fn single(p: ConvexPolyhedron) -> PLSet {
        let dim = p.dim();
        PLSet::new(dim, vec![p]).expect("dimensions agree")
    }

    pub fn empty(dim: usize) -> PLSet {
        PLSet {
            dim,
            pieces: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[ConvexPolyhedron] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn contains(&self, x: &QVector) -> Result<bool> {
        check_dim(self.dim, x.dim())?;
        for p in &self.pieces {
            if p.contains(x)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn map_pieces(
        &self,
        dim: usize,
        f: impl Fn(&ConvexPolyhedron) -> Result<ConvexPolyhedron>,
    ) -> Result<PLSet> {
        let pieces = self.pieces.iter().map(f).collect::<Result<Vec<_>>>()?;
        PLSet::new(dim, pieces)
    }

    pub fn intersect_polyhedron(&self, p: &ConvexPolyhedron) -> Result<PLSet> {
        self.map_pieces(self.dim, |q| q.intersect(p))
    }

    /// Pairwise intersections of pieces.
    pub fn intersect(&self, other: &PLSet) -> Result<PLSet> {
        check_dim(self.dim, other.dim)?;
        let mut pieces = Vec::new();
        for a in &self.pieces {
            for b in &other.pieces {
                pieces.push(a.intersect(b)?);
            }
        }
        PLSet::new(self.dim, pieces)
    }

    pub fn union(&self, other: &PLSet) -> Result<PLSet> {
        check_dim(self.dim, other.dim)?;
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.iter().cloned());
        PLSet::new(self.dim, pieces)
    }

    pub fn slice(&self, coords: &[usize], values: &QVector) -> Result<PLSet> {
        let dim = self.dim - coords.len();
        self.map_pieces(dim, |p| p.slice(coords, values))
    }

    pub fn eliminate(&self, keep: &[usize]) -> Result<PLSet> {
        self.map_pieces(keep.len(), |p| p.eliminate(keep))
    }

    pub fn embed(&self, new_dim: usize, map: &[usize]) -> Result<PLSet> {
        self.map_pieces(new_dim, |p| p.embed(new_dim, map))
    }

    pub fn translate(&self, v: &QVector) -> Result<PLSet> {
        self.map_pieces(self.dim, |p| p.translate(v))
    }

    /// Nearest point and squared distance; `None` for the empty set.
    pub fn project_point(&self, v: &QVector) -> Result<Option<(QVector, Rat)>> {
        check_dim(self.dim, v.dim())?;
        let mut best: Option<(QVector, Rat)> = None;
        for p in &self.pieces {
            if let Some((x, d)) = p.project_point(v)? {
                if best.as_ref().map_or(true, |(_, b)| &d < b) {
                    best = Some((x, d));
                }
            }
        }
        Ok(best)
    }

    pub fn distance_sq(&self, v: &QVector) -> Result<Option<Rat>> {
        Ok(self.project_point(v)?.map(|(_, d)| d))
    }

    /// Piecewise equality: every piece equals some piece of the other set.
    pub fn set_eq_convex_pieces(&self, other: &PLSet) -> Result<bool> {
        if self.pieces.len() != other.pieces.len() {
            return Ok(false);
        }
        for a in &self.pieces {
            let mut found = false;
            for b in &other.pieces {
                if a.set_eq(b)? {
                    found = true;
                    break;
                }
            }
            if !found {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Exact local picture of a set near a point: `S ∩ B(x, r) = (x + T) ∩ B(x, r)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalConeModel {
    pub base_point: QVector,
    pub tangent: ConeUnion,
    /// Rational lower bound for the radius of exactness; `None` when exact everywhere.
    pub conical_radius: Option<Rat>,
    /// Squared distance to the nearest inactive constraint or non-containing piece.
    pub slack_sq: Option<Rat>,
}

impl LocalConeModel {
    /// Membership of `y` in `base_point + tangent`.
    pub fn model_contains(&self, y: &QVector) -> Result<bool> {
        self.tangent.contains(&(y - &self.base_point))
    }
}

/// Contingent cone and its radius of exactness.
pub fn contingent_cone(s: &PLSet, x: &QVector) -> Result<LocalConeModel> {
    check_dim(s.dim(), x.dim())?;
    let mut cones = Vec::new();
    let mut min_sq: Option<Rat> = None;
    let mut consider = |d: Rat| {
        if min_sq.as_ref().map_or(true, |m| &d < m) {
            min_sq = Some(d);
        }
    };
    for p in s.pieces() {
        if p.contains(x)? {
            cones.push(p.active_tangent_cone(x)?);
            for c in p.inequalities() {
                let slack = c.slack(x);
                if slack.is_positive() {
                    consider(&slack * &slack / c.normal.norm_sq());
                }
            }
        } else if let Some(d) = p.distance_sq(x)? {
            consider(d);
        }
    }
    if cones.is_empty() {
        return Err(Error::PointNotInSet);
    }
    let conical_radius = min_sq
        .as_ref()
        .map(|m| sqrt_lower_positive(&(m / Rat::from_integer(4.into()))));
    Ok(LocalConeModel {
        base_point: x.clone(),
        tangent: ConeUnion::new(s.dim(), cones)?,
        conical_radius,
        slack_sq: min_sq,
    })
}

/// The duality mapping of a Euclidean space.
pub fn duality_map(v: &QVector) -> QVector {
    v.clone()
}

fn check_eps(eps: &Rat) -> Result<()> {
    if eps.is_negative() {
        Err(Error::InvalidParameter("eps must be nonnegative".into()))
    } else {
        Ok(())
    }
}

/// `v` in the ε-regular normal cone: `sup <v, d> <= eps |v|` over unit tangent directions.
pub fn eps_regular_normal_member(s: &PLSet, x: &QVector, v: &QVector, eps: &Rat) -> Result<bool> {
    check_eps(eps)?;
    let model = contingent_cone(s, x)?;
    eps_cone_member_model(&model, v, eps)
}

pub fn eps_cone_member_model(model: &LocalConeModel, v: &QVector, eps: &Rat) -> Result<bool> {
    let sup = model.tangent.support_on_ball(v)?;
    Ok(sup.nonpositive || sup.squared <= eps * eps * v.norm_sq())
}

/// `v` in the ε-normal set: `sup <v, d> <= eps` over unit tangent directions.
pub fn eps_normal_set_member(s: &PLSet, x: &QVector, v: &QVector, eps: &Rat) -> Result<bool> {
    check_eps(eps)?;
    let model = contingent_cone(s, x)?;
    eps_set_member_model(&model, v, eps)
}

pub fn eps_set_member_model(model: &LocalConeModel, v: &QVector, eps: &Rat) -> Result<bool> {
    let sup = model.tangent.support_on_ball(v)?;
    Ok(sup.nonpositive || sup.squared <= eps * eps)
}

/// Intersection of the polars of the tangent pieces.
pub fn regular_normal_cone(s: &PLSet, x: &QVector) -> Result<PolyCone> {
    let model = contingent_cone(s, x)?;
    normal_cone_of(&model.tangent)
}

pub fn normal_cone_of(tangent: &ConeUnion) -> Result<PolyCone> {
    let mut out = PolyCone::full(tangent.dim());
    for piece in tangent.pieces() {
        out = out.intersect(&piece.polar()?)?;
    }
    Ok(out)
}

/// Outcome of the tangent-stability check for a convex set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JtReport {
    /// Radius on which `T(xbar) ⊆ T(x)`; `None` means every radius works.
    pub delta: Option<Rat>,
    /// Number of faces through `xbar` checked.
    pub faces_checked: usize,
}

/// Radius `δ` such that `T(xbar; Ω) ⊆ T(x; Ω)` for every `x ∈ Ω` within `δ` of `xbar`.
pub fn jt_stability_check(omega: &ConvexPolyhedron, xbar: &QVector, eps: &Rat) -> Result<JtReport> {
    if !eps.is_positive() {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let model = contingent_cone(&PLSet::single(omega.clone()), xbar)?;
    let t_bar = omega.active_tangent_cone(xbar)?;
    let active = omega.active_indices(xbar);
    let mut checked = 0;
    for mask in 0u64..(1u64 << active.len().min(20)) {
        let tight: Vec<usize> = (0..active.len())
            .filter(|k| mask & (1 << k) != 0)
            .map(|k| active[k])
            .collect();
        let Some(p) = face_point(omega, &active, &tight)? else {
            continue;
        };
        checked += 1;
        let rep = pull_toward(xbar, &p, model.conical_radius.as_ref());
        let t = omega.active_tangent_cone(&rep)?;
        if !t_bar.is_subset(&t)? {
            return Err(Error::Undecided(format!(
                "tangent inclusion fails at {rep}"
            )));
        }
    }
    Ok(JtReport {
        delta: model.conical_radius,
        faces_checked: checked,
    })
}

/// A point of `omega` where exactly the constraints `tight` among `active` hold with equality.
fn face_point(
    omega: &ConvexPolyhedron,
    active: &[usize],
    tight: &[usize],
) -> Result<Option<QVector>> {
    let ineqs = omega.inequalities();
    let eqs = tight.iter().map(|&i| ineqs[i].clone()).collect();
    let face = omega.with_constraints(Vec::new(), eqs)?;
    let Some(p) = face.relative_interior_point() else {
        return Ok(None);
    };
    let exact = active
        .iter()
        .all(|i| tight.contains(i) == ineqs[*i].slack(&p).is_zero());
    Ok(exact.then_some(p))
}

/// Moves `p` toward `base` so that the result is within `radius / 2` (l1 bound).
pub(crate) fn pull_toward(base: &QVector, p: &QVector, radius: Option<&Rat>) -> QVector {
    let d = p - base;
    let l1 = d.norm_l1();
    match radius {
        Some(r) if !l1.is_zero() && &l1 >= r => {
            let t = r / (Rat::from_integer(2.into()) * &l1);
            base.add_scaled(&t, &d)
        }
        _ => p.clone(),
    }
}
