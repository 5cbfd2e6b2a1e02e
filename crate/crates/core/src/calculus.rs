//! Chain and sum rules, inverse images, extremal systems and fuzzy intersections.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::coderivative::{
    limiting_coderivative, mirror_coderivative, stratify_set, CoderivativeGraph, CoderivativeKind,
    ConstrainedPoint,
};
use crate::error::{check_dim, Error, Result};
use crate::geometry::cone::nnls_coefficients;
use crate::geometry::rational::{rat, ratio, solve, sqrt_bounds};
use crate::geometry::sphere::{rational_unit_near, SphereNet};
use crate::geometry::{ConeUnion, Constraint, ConvexPolyhedron, PolyCone, QVector, Rat};
use crate::local::{contingent_cone, eps_cone_member_model, eps_regular_normal_member, regular_normal_cone, PLSet};
use crate::multifunction::{chain_intermediate, inner_semicontinuity_probe, sum_intermediate, InnerProbe, PLMultifunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainVariant {
    Mixed,
    Normal,
    StrictDerivative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SumVariant {
    Mixed,
    Normal,
}

/// Grid used by the inner semicontinuity probe of a rule check.
#[derive(Clone, Debug)]
pub struct ProbeOptions {
    pub step: Rat,
    pub radius: Rat,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            step: ratio(1, 50),
            radius: ratio(1, 10),
        }
    }
}

/// Outcome of a chain or sum rule check.
#[derive(Clone, Debug)]
pub struct RuleVerdict {
    pub qualification: bool,
    pub probe: Option<InnerProbe>,
    /// Qualification holds and the probe observed inner semicontinuity.
    pub hypotheses_met: bool,
    pub lhs: CoderivativeGraph,
    /// Right-hand side as a cone union in the same coordinates as `lhs`.
    pub rhs: ConeUnion,
    pub included: bool,
    /// A pair `(x*, w*)` of the left side outside the right side.
    pub counterexample: Option<QVector>,
}

fn kind_of(normal: bool) -> CoderivativeKind {
    if normal {
        CoderivativeKind::LimitingNormal
    } else {
        CoderivativeKind::LimitingMixed
    }
}

fn negated(c: &PolyCone) -> Result<PolyCone> {
    PolyCone::from_halfspaces(c.dim(), c.halfspaces().iter().map(|h| -h).collect())
}

/// `A ∩ (-B) = {0}`
fn meets_negation_only_at_zero(a: &ConeUnion, b: &ConeUnion) -> Result<bool> {
    let neg = ConeUnion::new(b.dim(), b.pieces().iter().map(negated).collect::<Result<Vec<_>>>()?)?;
    for piece in a.intersect(&neg)?.pieces() {
        if !piece.is_zero()? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Limiting coderivative of `s` with no constraint on its inputs.
pub fn unconstrained_coderivative(s: &PLMultifunction, x: &QVector, y: &QVector, kind: CoderivativeKind) -> Result<CoderivativeGraph> {
    let pt = ConstrainedPoint::new(s.clone(), ConvexPolyhedron::full(s.in_dim()), x.clone(), y.clone())?;
    limiting_coderivative(&pt, kind)
}

/// `D*S2(ȳ|z̄)(0) ∩ (-D^{*-1}_Ω S1^{-1}(ȳ|x̄)(0)) = {0}`
pub fn chain_qualification(
    s1: &PLMultifunction,
    s2: &PLMultifunction,
    omega: &ConvexPolyhedron,
    xbar: &QVector,
    ybar: &QVector,
    zbar: &QVector,
) -> Result<bool> {
    let outer = unconstrained_coderivative(s2, ybar, zbar, CoderivativeKind::LimitingMixed)?.zero_slice()?;
    let mirror = mirror_coderivative(&s1.invert(), &PLSet::single(omega.clone()), ybar, xbar)?.zero_slice()?;
    meets_negation_only_at_zero(&outer, &mirror)
}

/// `{(x*, z*) : x* ∈ D1(y*) for some y* ∈ D2(z*)}` from graphs in `(x*, y*)` and `(y*, z*)`.
fn compose_graphs(n: usize, q: usize, p: usize, d1: &ConeUnion, d2: &ConeUnion) -> Result<ConeUnion> {
    let dim = n + q + p;
    let left: Vec<usize> = (0..n + q).collect();
    let right: Vec<usize> = (n..dim).collect();
    let keep: Vec<usize> = (0..n).chain(n + q..dim).collect();
    let mut pieces = Vec::new();
    for a in d1.pieces() {
        let a = a.embed(dim, &left)?;
        for b in d2.pieces() {
            pieces.push(a.intersect(&b.embed(dim, &right)?)?.eliminate(&keep)?);
        }
    }
    ConeUnion::new(n + p, pieces)
}

/// Rows of the Jacobian of `s` at `y`, which must be affine and single-valued nearby.
pub fn affine_jacobian(s: &PLMultifunction, y: &QVector, z: &QVector) -> Result<Vec<QVector>> {
    let (q, p) = (s.in_dim(), s.out_dim());
    let model = contingent_cone(s.graph(), &y.concat(z))?;
    let kink = || Error::HypothesesUnmet("outer map is not affine and single-valued at the base point".into());
    let [piece] = model.tangent.pieces() else {
        return Err(kink());
    };
    let gens = piece.generators()?;
    if !gens.rays.is_empty() || gens.lines.len() != q {
        return Err(kink());
    }
    let mut rows = vec![vec![Rat::zero(); q]; p];
    for i in 0..q {
        let a: Vec<Vec<Rat>> = (0..q).map(|r| gens.lines.iter().map(|l| l[r].clone()).collect()).collect();
        let coeffs = solve(a, QVector::unit(q, i).into_coords()).ok_or_else(kink)?;
        for (r, row) in rows.iter_mut().enumerate() {
            row[i] = gens.lines.iter().zip(&coeffs).map(|(l, c)| &l[q + r] * c).sum();
        }
    }
    Ok(rows.into_iter().map(QVector::new).collect())
}

/// Checks `D_Ω S(x̄|z̄)(z*) ⊂ D̃_Ω S1(x̄|ȳ) ∘ D*S2(ȳ|z̄)(z*)` for `S = S2 ∘ S1`, or the
/// strict-derivative form `D_Ω S1(x̄|ȳ)(∇f(ȳ)* z*)`.
#[allow(clippy::too_many_arguments)]
pub fn chain_rule_check(
    s1: &PLMultifunction,
    s2: &PLMultifunction,
    omega: &ConvexPolyhedron,
    xbar: &QVector,
    ybar: &QVector,
    zbar: &QVector,
    variant: ChainVariant,
    probe: &ProbeOptions,
) -> Result<RuleVerdict> {
    check_dim(s1.out_dim(), s2.in_dim())?;
    if !chain_intermediate(s1, s2, xbar, zbar)?.contains(ybar)? {
        return Err(Error::PointNotInSet);
    }
    let (n, q, p) = (s1.in_dim(), s1.out_dim(), s2.out_dim());
    let kind = kind_of(variant == ChainVariant::Normal);
    let composite = s1.compose(s2)?;
    let lhs = limiting_coderivative(&ConstrainedPoint::new(composite, omega.clone(), xbar.clone(), zbar.clone())?, kind.clone())?;
    let d1 = limiting_coderivative(&ConstrainedPoint::new(s1.clone(), omega.clone(), xbar.clone(), ybar.clone())?, kind.clone())?;
    let rhs = match variant {
        ChainVariant::StrictDerivative => {
            let jac = affine_jacobian(s2, ybar, zbar)?;
            let pieces = d1
                .cones
                .pieces()
                .iter()
                .map(|c| {
                    let rows = c
                        .halfspaces()
                        .iter()
                        .map(|h| {
                            let hy = h.slice(n..n + q);
                            h.slice(0..n).concat(&jac.iter().map(|r| r.dot(&hy)).collect())
                        })
                        .collect();
                    PolyCone::from_halfspaces(n + p, rows)
                })
                .collect::<Result<Vec<_>>>()?;
            ConeUnion::new(n + p, pieces)?
        }
        _ => {
            let d2 = unconstrained_coderivative(s2, ybar, zbar, kind)?;
            compose_graphs(n, q, p, &d1.cones, &d2.cones)?
        }
    };
    let qualification = chain_qualification(s1, s2, omega, xbar, ybar, zbar)?;
    let constraint = omega.product(&ConvexPolyhedron::full(p))?;
    let inner = inner_semicontinuity_probe(
        |xz| chain_intermediate(s1, s2, &xz.slice(0..n), &xz.slice(n..n + p)),
        &constraint,
        &xbar.concat(zbar),
        ybar,
        &probe.step,
        &probe.radius,
    )?;
    let counterexample = lhs.cones.uncovered_direction(&rhs)?;
    Ok(RuleVerdict {
        qualification,
        hypotheses_met: qualification && inner.verdict,
        probe: Some(inner),
        lhs,
        rhs,
        included: counterexample.is_none(),
        counterexample,
    })
}

/// `D_Ω S1(x̄|ȳ1)(0) ∩ (-D_Ω S2(x̄|ȳ2)(0)) = {0}`
pub fn sum_qualification(
    s1: &PLMultifunction,
    s2: &PLMultifunction,
    omega: &ConvexPolyhedron,
    xbar: &QVector,
    y1: &QVector,
    y2: &QVector,
) -> Result<bool> {
    let d1 = limiting_coderivative(&ConstrainedPoint::new(s1.clone(), omega.clone(), xbar.clone(), y1.clone())?, CoderivativeKind::LimitingMixed)?;
    let d2 = limiting_coderivative(&ConstrainedPoint::new(s2.clone(), omega.clone(), xbar.clone(), y2.clone())?, CoderivativeKind::LimitingMixed)?;
    meets_negation_only_at_zero(&d1.zero_slice()?, &d2.zero_slice()?)
}

/// `{(x1* + x2*, y*) : (xi*, y*) ∈ Di}`
fn sum_graphs(n: usize, m: usize, d1: &ConeUnion, d2: &ConeUnion) -> Result<ConeUnion> {
    let dim = 2 * n + m;
    let first: Vec<usize> = (0..n).chain(2 * n..dim).collect();
    let second: Vec<usize> = (n..dim).collect();
    let rows: Vec<QVector> = (0..n)
        .map(|i| QVector::unit(dim, i).add_scaled(&rat(1), &QVector::unit(dim, n + i)))
        .chain((0..m).map(|j| QVector::unit(dim, 2 * n + j)))
        .collect();
    let mut pieces = Vec::new();
    for a in d1.pieces() {
        let a = a.embed(dim, &first)?;
        for b in d2.pieces() {
            pieces.push(a.intersect(&b.embed(dim, &second)?)?.linear_image(&rows)?);
        }
    }
    ConeUnion::new(n + m, pieces)
}

/// Checks `D_Ω(S1 + S2)(x̄|ȳ)(y*) ⊂ D_Ω S1(x̄|ȳ1)(y*) + D_Ω S2(x̄|ȳ2)(y*)`.
#[allow(clippy::too_many_arguments)]
pub fn sum_rule_check(
    s1: &PLMultifunction,
    s2: &PLMultifunction,
    omega: &ConvexPolyhedron,
    xbar: &QVector,
    ybar: &QVector,
    split: (&QVector, &QVector),
    variant: SumVariant,
    probe: &ProbeOptions,
) -> Result<RuleVerdict> {
    let (y1, y2) = split;
    if !sum_intermediate(s1, s2, xbar, ybar)?.contains(&y1.concat(y2))? {
        return Err(Error::PointNotInSet);
    }
    let (n, m) = (s1.in_dim(), s1.out_dim());
    let kind = kind_of(variant == SumVariant::Normal);
    let at = |s: &PLMultifunction, y: &QVector| -> Result<CoderivativeGraph> {
        limiting_coderivative(&ConstrainedPoint::new(s.clone(), omega.clone(), xbar.clone(), y.clone())?, kind.clone())
    };
    let lhs = at(&s1.sum(s2)?, ybar)?;
    let rhs = sum_graphs(n, m, &at(s1, y1)?.cones, &at(s2, y2)?.cones)?;
    let qualification = sum_qualification(s1, s2, omega, xbar, y1, y2)?;
    let constraint = omega.product(&ConvexPolyhedron::full(m))?;
    let inner = inner_semicontinuity_probe(
        |xy| sum_intermediate(s1, s2, &xy.slice(0..n), &xy.slice(n..n + m)),
        &constraint,
        &xbar.concat(ybar),
        &y1.concat(y2),
        &probe.step,
        &probe.radius,
    )?;
    let counterexample = lhs.cones.uncovered_direction(&rhs)?;
    Ok(RuleVerdict {
        qualification,
        hypotheses_met: qualification && inner.verdict,
        probe: Some(inner),
        lhs,
        rhs,
        included: counterexample.is_none(),
        counterexample,
    })
}

/// Result of checking the ε-regular normal cone of an inverse image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InclusionCheck {
    pub holds: bool,
    pub directions: usize,
    pub counterexample: Option<QVector>,
}

/// The single value of `f` at `x`.
fn single_value(f: &PLMultifunction, x: &QVector) -> Result<QVector> {
    let values = f.evaluate(x)?;
    let mut found: Option<QVector> = None;
    for piece in values.pieces() {
        let (verts, rays) = piece.vertices_and_rays()?;
        if !rays.is_empty() || verts.len() != 1 {
            return Err(Error::HypothesesUnmet("map is not single-valued at the base point".into()));
        }
        match &found {
            Some(v) if v != &verts[0] => {
                return Err(Error::HypothesesUnmet("map is not single-valued at the base point".into()))
            }
            _ => found = Some(verts[0].clone()),
        }
    }
    found.ok_or(Error::PointNotInSet)
}

/// `x* ∈ N̂_ε(x̄; f^{-1}(Θ))` implies `(x*, 0) ∈ N̂_ε((x̄, f(x̄)); (X × Θ) ∩ gph f)`,
/// checked on generator directions and a sphere net (all directions when `n = 1`).
pub fn inverse_image_inclusion_check(
    f: &PLMultifunction,
    theta: &PLSet,
    xbar: &QVector,
    eps: &Rat,
    budget: usize,
) -> Result<InclusionCheck> {
    let (n, m) = (f.in_dim(), f.out_dim());
    check_dim(m, theta.dim())?;
    if !eps.is_positive() {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let ybar = single_value(f, xbar)?;
    if !theta.contains(&ybar)? {
        return Err(Error::PointNotInSet);
    }
    let ys: Vec<usize> = (n..n + m).collect();
    let joint = f.graph().intersect(&theta.embed(n + m, &ys)?)?;
    let preimage = joint.eliminate(&(0..n).collect::<Vec<_>>())?;
    let lhs = contingent_cone(&preimage, xbar)?;
    let rhs = contingent_cone(&joint, &xbar.concat(&ybar))?;
    let mut dirs: Vec<QVector> = Vec::new();
    for piece in lhs.tangent.pieces() {
        dirs.extend(piece.generators()?.all());
        dirs.extend(piece.polar()?.generators()?.all());
    }
    let negatives: Vec<QVector> = dirs.iter().map(|d| -d).collect();
    dirs.extend(negatives);
    if n == 1 {
        dirs.push(QVector::from_ints(&[1]));
        dirs.push(QVector::from_ints(&[-1]));
    } else {
        dirs.extend(SphereNet::with_budget(n, budget).points);
    }
    dirs.retain(|d| !d.is_zero());
    dirs.sort();
    dirs.dedup();
    let zeros = QVector::zeros(m);
    for d in &dirs {
        if eps_cone_member_model(&lhs, d, eps)? && !eps_cone_member_model(&rhs, &d.concat(&zeros), eps)? {
            return Ok(InclusionCheck {
                holds: false,
                directions: dirs.len(),
                counterexample: Some(d.clone()),
            });
        }
    }
    Ok(InclusionCheck {
        holds: true,
        directions: dirs.len(),
        counterexample: None,
    })
}

/// Emptiness of the shifted intersections of an extremal system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtremalDetection {
    pub extremal: bool,
    /// `(L1 + (0, b_k)) ∩ L2 ∩ U = ∅` for each shift.
    pub empty: Vec<bool>,
}

fn lift_shift(n: usize, m: usize, b: &QVector) -> Result<QVector> {
    if b.dim() == m {
        return Ok(QVector::zeros(n).concat(b));
    }
    check_dim(n + m, b.dim())?;
    if !b.slice(0..n).is_zero() {
        return Err(Error::InvalidParameter("shifts act on the output coordinates only".into()));
    }
    Ok(b.clone())
}

fn neighborhood_box(point: &QVector, radius: &Rat) -> ConvexPolyhedron {
    ConvexPolyhedron::boxed(
        &point.iter().map(|c| Some(c - radius)).collect::<Vec<_>>(),
        &point.iter().map(|c| Some(c + radius)).collect::<Vec<_>>(),
    )
}

fn check_system(l1: &PLSet, l2: &PLSet, omega: &ConvexPolyhedron, point: &QVector) -> Result<(usize, usize)> {
    check_dim(l1.dim(), l2.dim())?;
    check_dim(l1.dim(), point.dim())?;
    let n = omega.dim();
    if n > l1.dim() {
        return Err(Error::DimensionMismatch { expected: l1.dim(), found: n });
    }
    if !l1.contains(point)? || !l2.contains(point)? {
        return Err(Error::PointNotInSet);
    }
    Ok((n, l1.dim() - n))
}

fn check_projection(sets: [&PLSet; 2], omega: &ConvexPolyhedron) -> Result<()> {
    let xs: Vec<usize> = (0..omega.dim()).collect();
    for set in sets {
        for piece in set.eliminate(&xs)?.pieces() {
            if !piece.is_subset(omega)? {
                return Err(Error::HypothesesUnmet("projection of the sets onto X leaves the constraint set".into()));
            }
        }
    }
    Ok(())
}

/// Decides emptiness for each shift; extremal when the empty shifts form a tail covering
/// at least the later half of the sequence.
pub fn extremal_detect(
    l1: &PLSet,
    l2: &PLSet,
    omega: &ConvexPolyhedron,
    point: &QVector,
    shifts: &[QVector],
    radius: Option<&Rat>,
) -> Result<ExtremalDetection> {
    let (n, m) = check_system(l1, l2, omega, point)?;
    check_projection([l1, l2], omega)?;
    if shifts.is_empty() {
        return Err(Error::InvalidParameter("at least one shift is required".into()));
    }
    let u = neighborhood_box(point, radius.unwrap_or(&rat(1)));
    let empty = shifts
        .iter()
        .map(|b| -> Result<bool> {
            let b = lift_shift(n, m, b)?;
            Ok(l1.translate(&b)?.intersect(l2)?.intersect_polyhedron(&u)?.is_empty())
        })
        .collect::<Result<Vec<_>>>()?;
    let tail_start = empty.iter().rposition(|e| !e).map_or(0, |i| i + 1);
    Ok(ExtremalDetection {
        extremal: tail_start < empty.len() && 2 * tail_start <= empty.len(),
        empty,
    })
}

/// One condition of a witness: satisfied when `value <= bound`. Norms enter squared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Residual {
    pub condition: String,
    pub value: Rat,
    pub bound: Rat,
}

impl Residual {
    fn new(condition: impl Into<String>, value: Rat, bound: Rat) -> Residual {
        Residual {
            condition: condition.into(),
            value,
            bound,
        }
    }

    pub fn satisfied(&self) -> bool {
        self.value <= self.bound
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessRecord {
    pub points: Vec<QVector>,
    pub covectors: Vec<QVector>,
    pub lambda: Option<Rat>,
    pub residuals: Vec<Residual>,
    pub satisfied: bool,
}

impl WitnessRecord {
    fn new(points: Vec<QVector>, covectors: Vec<QVector>, lambda: Option<Rat>, residuals: Vec<Residual>) -> WitnessRecord {
        let satisfied = residuals.iter().all(Residual::satisfied);
        WitnessRecord {
            points,
            covectors,
            lambda,
            residuals,
            satisfied,
        }
    }

    fn violation(&self) -> Rat {
        self.residuals
            .iter()
            .filter(|r| !r.satisfied())
            .map(|r| &r.value - &r.bound)
            .sum()
    }
}

/// Slack allowed in normalizations that involve irrational norms.
fn normalization_slack() -> Rat {
    Rat::new(1.into(), (1i64 << 30).into())
}

fn dist_sq_to_cone(c: &PolyCone, v: &QVector) -> Result<Rat> {
    let (_, proj) = c.project(v)?;
    Ok(v.norm_sq() - proj)
}

/// Residuals shared by both witness kinds for point `z`, covector `c` and inflation `rho²`.
#[allow(clippy::too_many_arguments)]
fn local_residuals(
    out: &mut Vec<Residual>,
    i: usize,
    set: &PLSet,
    omega: &ConvexPolyhedron,
    base: &QVector,
    z: &QVector,
    c: &QVector,
    radius_sq: &Rat,
    rho_sq: &Rat,
) -> Result<()> {
    let n = omega.dim();
    let d = z.dim();
    out.push(Residual::new(format!("point{i}.x"), (z.slice(0..n) - base.slice(0..n)).norm_sq(), radius_sq.clone()));
    out.push(Residual::new(format!("point{i}.y"), (z.slice(n..d) - base.slice(n..d)).norm_sq(), radius_sq.clone()));
    let normal = regular_normal_cone(set, z)?;
    out.push(Residual::new(format!("normal{i}"), dist_sq_to_cone(&normal, c)?, rho_sq.clone()));
    let tangent = omega.active_tangent_cone(&z.slice(0..n))?;
    out.push(Residual::new(format!("tangent{i}"), dist_sq_to_cone(&tangent, &c.slice(0..n))?, Rat::zero()));
    Ok(())
}

/// Builds points and opposite unit-sum covectors for an extremal system from the closest
/// pair of the shifted sets near the point.
#[allow(clippy::too_many_arguments)]
pub fn extremal_witness(
    l1: &PLSet,
    l2: &PLSet,
    omega: &ConvexPolyhedron,
    point: &QVector,
    shift: &QVector,
    eps: &Rat,
    radius: Option<&Rat>,
) -> Result<WitnessRecord> {
    let (n, m) = check_system(l1, l2, omega, point)?;
    if !eps.is_positive() {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let d = n + m;
    let b = lift_shift(n, m, shift)?;
    let window = neighborhood_box(point, radius.unwrap_or(&rat(1)))
        .intersect(&omega.embed(d, &(0..n).collect::<Vec<_>>())?)?;
    let near = |s: &PLSet| s.intersect_polyhedron(&window);
    let (a1, a2) = (near(l1)?, near(l2)?);
    let first: Vec<usize> = (0..d).collect();
    let second: Vec<usize> = (d..2 * d).collect();
    let ws: Vec<usize> = (2 * d..3 * d).collect();
    let mut best: Option<(Rat, QVector, ConvexPolyhedron)> = None;
    for p1 in a1.pieces() {
        for p2 in a2.pieces() {
            // (z1, z2, w) with w = z1 - z2 + b
            let link: Vec<Constraint> = (0..d)
                .map(|i| {
                    let normal = QVector::unit(3 * d, 2 * d + i) - QVector::unit(3 * d, i) + QVector::unit(3 * d, d + i);
                    Constraint::new(normal, b[i].clone())
                })
                .collect();
            let lifted = p1
                .embed(3 * d, &first)?
                .intersect(&p2.embed(3 * d, &second)?)?
                .with_constraints(Vec::new(), link)?;
            let Some((w, dist)) = lifted.eliminate(&ws)?.project_point(&QVector::zeros(d))? else {
                continue;
            };
            if best.as_ref().map_or(true, |(bd, _, _)| &dist < bd) {
                best = Some((dist, w, lifted));
            }
        }
    }
    let Some((dist, w, lifted)) = best else {
        return Err(Error::SearchFailed("no piece pair meets the neighborhood".into()));
    };
    if dist.is_zero() {
        return Err(Error::SearchFailed(
            "shifted sets meet inside the neighborhood; no unit-sum normalization exists".into(),
        ));
    }
    let fixed = lifted.slice(&ws, &w)?;
    let (pair, _) = fixed
        .project_point(&point.concat(point))?
        .ok_or_else(|| Error::SearchFailed("closest pair vanished".into()))?;
    let (z1, z2) = (pair.slice(0..d), pair.slice(d..2 * d));
    let u = rational_unit_near(&w, 60).expect("w is nonzero");
    let half = ratio(1, 2);
    let c1 = (-&u).scale(&half);
    let c2 = u.scale(&half);
    let e2 = eps * eps;
    let mut residuals = Vec::new();
    local_residuals(&mut residuals, 1, l1, omega, point, &z1, &c1, &e2, &e2)?;
    local_residuals(&mut residuals, 2, l2, omega, point, &z2, &c2, &e2, &e2)?;
    residuals.push(Residual::new("sum", (&c1 + &c2).norm_sq(), Rat::zero()));
    let quarter = ratio(1, 4);
    let norm_gap = (c1.norm_sq() - &quarter).abs() + (c2.norm_sq() - &quarter).abs();
    residuals.push(Residual::new("normalization", norm_gap, Rat::zero()));
    Ok(WitnessRecord::new(vec![z1, z2], vec![c1, c2], None, residuals))
}

/// Searches points near the base and splits of `λ(x*, y*)` into regular normals of the two sets.
#[allow(clippy::too_many_arguments)]
pub fn fuzzy_intersection_witness(
    t1: &PLSet,
    t2: &PLSet,
    omega: &ConvexPolyhedron,
    point: &QVector,
    covector: &QVector,
    eps: &Rat,
    nu: &Rat,
    budget: usize,
) -> Result<WitnessRecord> {
    let (n, m) = check_system(t1, t2, omega, point)?;
    check_dim(n + m, covector.dim())?;
    if !eps.is_positive() || eps >= &rat(1) {
        return Err(Error::InvalidParameter("eps must lie in (0, 1)".into()));
    }
    if !nu.is_positive() {
        return Err(Error::InvalidParameter("nu must be positive".into()));
    }
    check_projection([t1, t2], omega)?;
    let joint = t1.intersect(t2)?;
    let tangent = omega.active_tangent_cone(&point.slice(0..n))?;
    if !eps_regular_normal_member(&joint, point, covector, eps)? || !tangent.contains(&covector.slice(0..n))? {
        return Err(Error::HypothesesUnmet(
            "covector is not an eps-regular normal tangent to the constraint set".into(),
        ));
    }
    let length = sqrt_bounds(&covector.norm_sq(), 40).0;
    let rho = (&length + nu) * eps;
    let (rho_sq, nu_sq) = (&rho * &rho, nu * nu);
    let candidates = |s: &PLSet| -> Result<Vec<QVector>> {
        let mut pts = vec![point.clone()];
        for st in stratify_set(s, point, &[], Some(nu))?.strata {
            if st.point != *point {
                pts.push(st.point);
            }
        }
        Ok(pts)
    };
    let (c1s, c2s) = (candidates(t1)?, candidates(t2)?);
    let full_y = PolyCone::full(m);
    let cone_at = |s: &PLSet, z: &QVector| -> Result<PolyCone> {
        let t = omega.active_tangent_cone(&z.slice(0..n))?;
        regular_normal_cone(s, z)?.intersect(&t.product(&full_y)?)
    };
    let mut best: Option<WitnessRecord> = None;
    let mut tried = 0;
    'search: for z1 in &c1s {
        for z2 in &c2s {
            if tried >= budget {
                break 'search;
            }
            tried += 1;
            let (k1, k2) = (cone_at(t1, z1)?, cone_at(t2, z2)?);
            let g1 = k1.generators()?.all();
            let g2 = k2.generators()?.all();
            let gens: Vec<QVector> = g1.iter().chain(&g2).cloned().collect();
            let coeffs = nnls_coefficients(&gens, covector, n + m);
            let mut n1 = QVector::zeros(n + m);
            let mut n2 = QVector::zeros(n + m);
            for (k, (g, c)) in gens.iter().zip(&coeffs).enumerate() {
                if k < g1.len() {
                    n1 = n1.add_scaled(c, g);
                } else {
                    n2 = n2.add_scaled(c, g);
                }
            }
            let rest = covector - &(&n1 + &n2);
            for absorb in [false, true] {
                let base1 = if absorb { &n1 + &rest } else { n1.clone() };
                let big = base1.norm_sq();
                let lambda = if big > Rat::one() { sqrt_bounds(&(Rat::one() / &big), 40).0 } else { Rat::one() };
                let c1 = base1.scale(&lambda);
                let c2 = n2.scale(&lambda);
                let gap = covector.scale(&lambda) - &c1 - &c2;
                let mut residuals = Vec::new();
                local_residuals(&mut residuals, 1, t1, omega, point, z1, &c1, &nu_sq, &rho_sq)?;
                local_residuals(&mut residuals, 2, t2, omega, point, z2, &c2, &nu_sq, &rho_sq)?;
                residuals.push(Residual::new("combination", gap.norm_sq(), nu_sq.clone()));
                let top = if lambda > Rat::one() { &lambda * &lambda } else { c1.norm_sq().max(&lambda * &lambda) };
                residuals.push(Residual::new("normalization", (top - Rat::one()).abs(), normalization_slack()));
                let record = WitnessRecord::new(vec![z1.clone(), z2.clone()], vec![c1, c2], Some(lambda), residuals);
                if record.satisfied {
                    return Ok(record);
                }
                if best.as_ref().map_or(true, |b| record.violation() < b.violation()) {
                    best = Some(record);
                }
            }
        }
    }
    best.ok_or_else(|| Error::SearchFailed("no candidate points".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn v(c: &[i64]) -> QVector {
        QVector::from_ints(c)
    }

    fn half_plane(sign: i64) -> PLSet {
        PLSet::single(ConvexPolyhedron::new(2, vec![Constraint::new(v(&[0, sign]), rat(0))], Vec::new()).unwrap())
    }

    fn doubling() -> PLMultifunction {
        PLMultifunction::affine(&[v(&[2])], &v(&[0]), &ConvexPolyhedron::full(1)).unwrap()
    }

    #[test]
    fn chain_qualification_examples() {
        let o = v(&[0]);
        let id = PLMultifunction::identity(1);
        let unit = fixtures::interval(0, 1);
        assert!(chain_qualification(&id, &doubling(), &unit, &o, &o, &o).unwrap());
        assert!(chain_qualification(&id, &id, &unit, &o, &o, &o).unwrap());
        let full = ConvexPolyhedron::full(1);
        assert!(!chain_qualification(&fixtures::constant_map(), &fixtures::abs_branches(), &full, &o, &o, &o).unwrap());
    }

    #[test]
    fn strict_derivative_chain() {
        let o = v(&[0]);
        let id = PLMultifunction::identity(1);
        let r = chain_rule_check(&id, &doubling(), &fixtures::interval(0, 1), &o, &o, &o, ChainVariant::StrictDerivative, &ProbeOptions::default()).unwrap();
        assert!(r.included && r.qualification);
        let s = r.lhs.apply(&v(&[1])).unwrap();
        assert!(s.contains(&v(&[0])).unwrap() && s.contains(&v(&[2])).unwrap());
        assert!(!s.contains(&v(&[3])).unwrap() && !s.contains(&v(&[-1])).unwrap());
        assert_eq!(affine_jacobian(&doubling(), &o, &o).unwrap(), vec![v(&[2])]);
        assert!(affine_jacobian(&fixtures::abs_map(), &o, &o).is_err());
    }

    #[test]
    fn identity_outer_map_gives_equality() {
        let o = v(&[0]);
        let id = PLMultifunction::identity(1);
        for variant in [ChainVariant::Mixed, ChainVariant::Normal] {
            let r = chain_rule_check(&id, &id, &fixtures::interval(0, 1), &o, &o, &o, variant, &ProbeOptions::default()).unwrap();
            assert!(r.included && r.hypotheses_met);
            assert!(r.lhs.cones.set_eq(&r.rhs).unwrap());
        }
    }

    #[test]
    fn sum_examples() {
        let o = v(&[0]);
        let id = PLMultifunction::identity(1);
        let neg = fixtures::negation();
        let unit = fixtures::interval(0, 1);
        assert!(sum_qualification(&id, &neg, &unit, &o, &o, &o).unwrap());
        assert!(sum_qualification(&id, &id, &unit, &o, &o, &o).unwrap());
        let full = ConvexPolyhedron::full(1);
        let left = PLMultifunction::affine(&[v(&[0])], &o, &ConvexPolyhedron::boxed(&[None], &[Some(rat(0))])).unwrap();
        let right = PLMultifunction::affine(&[v(&[0])], &o, &fixtures::half_line()).unwrap();
        assert!(!sum_qualification(&left, &right, &full, &o, &o, &o).unwrap());
        assert!(sum_qualification(&right, &right, &full, &o, &o, &o).unwrap());
        let abs = fixtures::abs_branches();
        assert!(sum_qualification(&abs, &abs, &full, &o, &o, &o).unwrap());
        let r = sum_rule_check(&id, &neg, &unit, &o, &o, (&o, &o), SumVariant::Mixed, &ProbeOptions::default()).unwrap();
        assert!(r.included);
        let lhs = r.lhs.apply(&v(&[1])).unwrap();
        assert!(lhs.contains(&o).unwrap() && !lhs.contains(&v(&[1])).unwrap());
        let rhs = r.rhs.contains(&v(&[-1, 1])).unwrap() && r.rhs.contains(&v(&[0, 1])).unwrap();
        assert!(rhs && !r.rhs.contains(&v(&[1, 1])).unwrap());
        let zero = fixtures::constant_map();
        let r = sum_rule_check(&id, &zero, &unit, &o, &o, (&o, &o), SumVariant::Normal, &ProbeOptions::default()).unwrap();
        assert!(r.included && r.lhs.cones.set_eq(&r.rhs).unwrap());
        let r = sum_rule_check(&id, &id, &unit, &o, &o, (&o, &o), SumVariant::Mixed, &ProbeOptions::default()).unwrap();
        assert!(r.included);
    }

    #[test]
    fn inverse_images() {
        let unit = PLSet::single(fixtures::interval(0, 1));
        let o = v(&[0]);
        let id = PLMultifunction::identity(1);
        assert!(inverse_image_inclusion_check(&id, &unit, &o, &ratio(1, 4), 100).unwrap().holds);
        let full = PLSet::single(ConvexPolyhedron::full(1));
        assert!(inverse_image_inclusion_check(&id, &full, &o, &ratio(1, 4), 100).unwrap().holds);
        let half = PLSet::single(fixtures::half_line());
        assert!(inverse_image_inclusion_check(&doubling(), &half, &o, &ratio(1, 3), 100).unwrap().holds);
    }

    #[test]
    fn extremal_detection() {
        let (lo, hi) = (half_plane(1), half_plane(-1));
        let full = ConvexPolyhedron::full(1);
        let o = v(&[0, 0]);
        let down: Vec<QVector> = (1..=6).map(|k| QVector::new(vec![rat(0), ratio(-1, k)])).collect();
        let up: Vec<QVector> = (1..=6).map(|k| QVector::new(vec![rat(0), ratio(1, k)])).collect();
        assert!(extremal_detect(&lo, &hi, &full, &o, &down, None).unwrap().extremal);
        assert!(!extremal_detect(&lo, &hi, &full, &o, &up, None).unwrap().extremal);
        let plane = PLSet::single(ConvexPolyhedron::full(2));
        assert!(!extremal_detect(&plane, &plane, &full, &o, &down, None).unwrap().extremal);
        assert!(extremal_detect(&lo, &hi, &fixtures::interval(0, 1), &o, &down, None).is_err());
    }

    #[test]
    fn extremal_witnesses() {
        let (lo, hi) = (half_plane(1), half_plane(-1));
        let o = v(&[0, 0]);
        let b = QVector::new(vec![ratio(-1, 100)]);
        for omega in [ConvexPolyhedron::full(1), fixtures::interval(0, 1)] {
            let w = extremal_witness(&lo, &hi, &omega, &o, &b, &ratio(1, 10), None).unwrap();
            assert!(w.satisfied, "{w:?}");
            assert_eq!(w.covectors, vec![QVector::new(vec![rat(0), ratio(1, 2)]), QVector::new(vec![rat(0), ratio(-1, 2)])]);
            assert!(w.residuals.iter().all(|r| r.value.is_zero()));
        }
        let dot = PLSet::single(ConvexPolyhedron::point(&o));
        assert!(extremal_witness(&dot, &dot, &ConvexPolyhedron::full(1), &o, &v(&[0]), &ratio(1, 10), None).is_err());
    }

    #[test]
    fn fuzzy_witnesses() {
        let (lo, hi) = (half_plane(1), half_plane(-1));
        let o = v(&[0, 0]);
        let full = ConvexPolyhedron::full(1);
        let w = fuzzy_intersection_witness(&lo, &hi, &full, &o, &v(&[0, 1]), &ratio(1, 2), &ratio(1, 10), 100).unwrap();
        assert!(w.satisfied);
        assert_eq!(w.lambda, Some(rat(1)));
        assert_eq!(w.covectors, vec![v(&[0, 1]), v(&[0, 0])]);
        let w = fuzzy_intersection_witness(&lo, &hi, &full, &o, &v(&[0, 0]), &ratio(1, 2), &ratio(1, 10), 100).unwrap();
        assert!(w.satisfied);
        let bad = fuzzy_intersection_witness(&lo, &lo, &full, &o, &v(&[0, -1]), &ratio(1, 2), &ratio(1, 10), 100);
        assert!(matches!(bad, Err(Error::HypothesesUnmet(_))));
    }
}
