//! The relative Lipschitz-like property: criteria, moduli and a grid oracle.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::coderivative::{
    cone_union_norm, limiting_coderivative, stratify, stratum_piece, CoderivativeKind,
    ConstrainedPoint, SquaredBound, Stratum,
};
use crate::error::{Error, Result};
use crate::geometry::rational::{rat, ratio, sqrt_bounds, sqrt_upper};
use crate::geometry::sphere::{minimize_on_sphere, SphereMin, SphereNet};
use crate::geometry::{ConvexPolyhedron, PolyCone, QVector, Rat};
use crate::multifunction::grid_offsets;

/// Net size used when a criterion cannot be decided from finitely many directions.
pub const DEFAULT_NET_BUDGET: usize = 4000;

/// Ratios above this value are reported as unbounded by the grid oracle.
pub const ORACLE_CEILING: i64 = 1_000_000;

/// Outcome of a certified check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    True,
    False,
    Undecided,
}

impl Decision {
    pub fn from_bool(b: bool) -> Decision {
        if b {
            Decision::True
        } else {
            Decision::False
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Decision::True => Some(true),
            Decision::False => Some(false),
            Decision::Undecided => None,
        }
    }

    /// Conjunction where a definite failure dominates an undecided part.
    pub fn and(self, other: Decision) -> Decision {
        match (self, other) {
            (Decision::False, _) | (_, Decision::False) => Decision::False,
            (Decision::Undecided, _) | (_, Decision::Undecided) => Decision::Undecided,
            _ => Decision::True,
        }
    }
}

fn all_of(parts: impl IntoIterator<Item = Decision>) -> Decision {
    parts.into_iter().fold(Decision::True, Decision::and)
}

fn check_open_unit(name: &str, v: &Rat, allow_zero: bool) -> Result<()> {
    let low_ok = if allow_zero { !v.is_negative() } else { v.is_positive() };
    if low_ok && v < &rat(1) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must lie in (0, 1)")))
    }
}

/// `min |Π(x*, 0)|²` over unit `x* ∈ T(x; Ω)`, the maximum taken over tangent pieces of the graph.
pub fn stratum_criterion(s: &Stratum, n: usize, m: usize, budget: usize) -> Result<Option<SphereMin>> {
    let omega = s.omega_tangent.clone().unwrap_or_else(|| PolyCone::full(n));
    let zeros = QVector::zeros(m);
    minimize_on_sphere(&omega, &rat(1), budget, |u| {
        Ok(s.graph_model.tangent.support_on_ball(&u.concat(&zeros))?.squared)
    })
}

/// Per-stratum criterion values.
#[derive(Clone, Debug)]
pub struct CriterionProfile {
    pub strata: Vec<Stratum>,
    pub values: Vec<Option<SphereMin>>,
    pub delta: Option<Rat>,
    pub shrunk: bool,
}

impl CriterionProfile {
    pub fn new(pt: &ConstrainedPoint, delta: Option<&Rat>, budget: usize) -> Result<CriterionProfile> {
        let catalog = stratify(pt, delta)?;
        let values = catalog
            .strata
            .par_iter()
            .map(|s| stratum_criterion(s, pt.n(), pt.m(), budget))
            .collect::<Result<Vec<_>>>()?;
        Ok(CriterionProfile {
            strata: catalog.strata,
            values,
            delta: catalog.delta,
            shrunk: catalog.shrunk,
        })
    }

    /// Nonzero tangent `x*` with `(x*, 0)` an ε-regular normal exists nowhere.
    pub fn decide(&self, eps: &Rat) -> Decision {
        let e2 = eps * eps;
        all_of(self.values.iter().map(|v| match v {
            None => Decision::True,
            Some(b) if b.lo > e2 => Decision::True,
            Some(b) if b.hi <= e2 => Decision::False,
            Some(_) => Decision::Undecided,
        }))
    }

    /// Bounds on the smallest criterion value; `None` when every tangent cone of `Ω` is `{0}`.
    pub fn minimum(&self) -> Option<(Rat, Rat)> {
        let mut out: Option<(Rat, Rat)> = None;
        for b in self.values.iter().flatten() {
            out = Some(match out {
                None => (b.lo.clone(), b.hi.clone()),
                Some((lo, hi)) => (lo.min(b.lo.clone()), hi.min(b.hi.clone())),
            });
        }
        out
    }
}

/// The only tangent `x*` with `(x*, 0)` an ε-regular normal near the base point is zero.
pub fn neighborhood_criterion(pt: &ConstrainedPoint, eps: &Rat, delta: Option<&Rat>) -> Result<Decision> {
    check_open_unit("eps", eps, false)?;
    Ok(CriterionProfile::new(pt, delta, DEFAULT_NET_BUDGET)?.decide(eps))
}

/// Squared exact Lipschitz bound `1/ε*² − 1` from the smallest criterion value `ε*²`.
pub fn exact_bound_scan(pt: &ConstrainedPoint, delta: Option<&Rat>) -> Result<SquaredBound> {
    exact_bound_from(&CriterionProfile::new(pt, delta, DEFAULT_NET_BUDGET)?)
}

pub fn exact_bound_from(profile: &CriterionProfile) -> Result<SquaredBound> {
    let Some((lo, hi)) = profile.minimum() else {
        return Ok(SquaredBound::Exact(Rat::zero()));
    };
    if hi.is_zero() {
        return Ok(SquaredBound::Unbounded);
    }
    if lo.is_zero() {
        return Err(Error::Undecided("criterion value not separated from zero".into()));
    }
    let one = Rat::one();
    let upper = &one / &lo - &one;
    let lower = &one / &hi - &one;
    Ok(if lower == upper {
        SquaredBound::Exact(lower)
    } else {
        SquaredBound::Interval { lo: lower, hi: upper }
    })
}

/// `|x*| <= κ|y*|` whenever `(x*, -y*)` is a γ-regular normal and `x*` is tangent to `Ω`.
pub fn kappa_condition(pt: &ConstrainedPoint, kappa: &Rat, gamma: &Rat, delta: Option<&Rat>) -> Result<Decision> {
    kappa_condition_with(pt, kappa, gamma, delta, DEFAULT_NET_BUDGET)
}

pub fn kappa_condition_with(
    pt: &ConstrainedPoint,
    kappa: &Rat,
    gamma: &Rat,
    delta: Option<&Rat>,
    budget: usize,
) -> Result<Decision> {
    if kappa.is_negative() {
        return Err(Error::InvalidParameter("kappa must be nonnegative".into()));
    }
    check_open_unit("gamma", gamma, true)?;
    let catalog = stratify(pt, delta)?;
    let verdicts = catalog
        .strata
        .par_iter()
        .map(|s| kappa_on_stratum(pt.n(), pt.m(), s, kappa, gamma, budget))
        .collect::<Result<Vec<_>>>()?;
    Ok(all_of(verdicts))
}

fn kappa_on_stratum(n: usize, m: usize, s: &Stratum, kappa: &Rat, gamma: &Rat, budget: usize) -> Result<Decision> {
    let k2 = kappa * kappa;
    let exact = cone_union_norm(n, m, &[stratum_piece(n, n + m, s)?])?;
    match exact.lower() {
        None => return Ok(Decision::False),
        Some(lo) if lo > &k2 => return Ok(Decision::False),
        _ => {}
    }
    let upper_ok = exact.upper().is_some_and(|hi| hi <= &k2);
    if gamma.is_zero() {
        return Ok(if upper_ok { Decision::True } else { Decision::Undecided });
    }
    let omega = s.omega_tangent.clone().unwrap_or_else(|| PolyCone::full(n));
    let region = omega.product(&PolyCone::full(m))?;
    let net = SphereNet::with_budget(n + m, budget);
    let r = net.radius_upper();
    let phi_lip = sqrt_upper(&(&k2 + Rat::one()));
    let g2 = gamma * gamma;
    let cells = net
        .near_cone(&region)?
        .par_iter()
        .map(|p| -> Result<Decision> {
            let (x, y) = (p.slice(0..n), p.slice(n..n + m));
            let norm = p.norm_sq();
            let applied = x.concat(&(-&y));
            let h2 = s.graph_model.tangent.support_on_ball(&applied)?.squared;
            let (xs, ys) = (x.norm_sq(), y.norm_sq());
            if h2 <= &g2 * &norm && xs > &k2 * &ys && region.contains(p)? {
                return Ok(Decision::False);
            }
            if sqrt_bounds(&(&h2 / &norm), 40).0 - &r > *gamma {
                return Ok(Decision::True);
            }
            let phi = sqrt_upper(&(&xs / &norm)) - kappa * sqrt_bounds(&(&ys / &norm), 40).0;
            if phi + &phi_lip * &r < Rat::zero() {
                return Ok(Decision::True);
            }
            Ok(Decision::Undecided)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(all_of(cells))
}

/// `D(0) = {0}` for the limiting mixed coderivative.
pub fn pointbased_criterion(pt: &ConstrainedPoint) -> Result<bool> {
    let d = limiting_coderivative(pt, CoderivativeKind::LimitingMixed)?;
    for piece in d.zero_slice()?.pieces() {
        if !piece.is_zero()? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Grid estimate of the Lipschitz modulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleModulus {
    /// Largest squared ratio observed on the grid.
    pub lo_sq: Rat,
    pub lo: Rat,
    /// `lo` plus the discretization allowance.
    pub hi: Rat,
    pub unbounded: bool,
    /// Grid step actually used.
    pub step: Rat,
    pub radius: Rat,
    pub points: usize,
}

/// Largest `dist(y', S(x)) / |x' − x|` over grid pairs `x, x'` in `Ω` near `x̄` and vertices
/// `y'` of `S(x')` inside the box of radius `delta` around `ȳ`.
pub fn brute_force_lip(pt: &ConstrainedPoint, delta: &Rat, step: &Rat) -> Result<OracleModulus> {
    if !step.is_positive() || step >= delta {
        return Err(Error::InvalidParameter("degenerate grid: need 0 < step < delta".into()));
    }
    let n = pt.n();
    let cap = match n {
        0 | 1 => 200,
        2 => 12,
        _ => 3,
    };
    let mut k = (delta / step).floor().to_integer();
    let mut h = step.clone();
    if k > cap.into() {
        k = cap.into();
        h = delta / Rat::from_integer(k.clone());
    }
    let k: i64 = k.try_into().unwrap_or(1);
    let d2 = delta * delta;
    let xs: Vec<QVector> = grid_offsets(n, k)
        .into_iter()
        .filter(|o| &o.norm_sq() * &h * &h <= d2)
        .map(|o| &pt.x + &o.scale(&h))
        .filter(|x| pt.omega.contains(x).unwrap_or(false))
        .collect();
    let window = ConvexPolyhedron::boxed(
        &pt.y.iter().map(|c| Some(c - delta)).collect::<Vec<_>>(),
        &pt.y.iter().map(|c| Some(c + delta)).collect::<Vec<_>>(),
    );
    let values = xs
        .par_iter()
        .map(|x| pt.mapping.evaluate(x))
        .collect::<Result<Vec<_>>>()?;
    let tops = values
        .par_iter()
        .map(|v| -> Result<Vec<QVector>> {
            let mut out = Vec::new();
            for piece in v.intersect_polyhedron(&window)?.pieces() {
                out.extend(piece.vertices_and_rays()?.0);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = (0..xs.len())
        .into_par_iter()
        .map(|j| -> Result<(Rat, bool)> {
            let mut best = Rat::zero();
            for i in 0..xs.len() {
                if i == j || tops[j].is_empty() {
                    continue;
                }
                let gap = (&xs[j] - &xs[i]).norm_sq();
                for y in &tops[j] {
                    match values[i].distance_sq(y)? {
                        None => return Ok((best, true)),
                        Some(d) => {
                            let r = d / &gap;
                            if r > best {
                                best = r;
                            }
                        }
                    }
                }
            }
            Ok((best, false))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut lo_sq = Rat::zero();
    let mut unbounded = false;
    for (r, u) in rows {
        unbounded |= u;
        if r > lo_sq {
            lo_sq = r;
        }
    }
    let ceiling = Rat::from_integer(ORACLE_CEILING.into());
    unbounded |= lo_sq > &ceiling * &ceiling;
    let lo = sqrt_bounds(&lo_sq, 40).0;
    let up = sqrt_upper(&lo_sq);
    let hi = &up + (Rat::one() + &up) * &h / delta;
    Ok(OracleModulus {
        lo_sq,
        lo,
        hi,
        unbounded,
        step: h,
        radius: delta.clone(),
        points: xs.len(),
    })
}

/// Parameters for [`bound_estimates`].
#[derive(Clone, Debug)]
pub struct StabilityOptions {
    /// Neighborhood radius for the criteria; defaults to the stratification radius.
    pub delta: Option<Rat>,
    pub oracle_radius: Rat,
    pub oracle_step: Rat,
    pub eps_table: Vec<Rat>,
    pub net_budget: usize,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        StabilityOptions {
            delta: None,
            oracle_radius: ratio(1, 10),
            oracle_step: ratio(1, 100),
            eps_table: vec![ratio(1, 4), ratio(1, 2), ratio(3, 4)],
            net_budget: DEFAULT_NET_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborhoodEntry {
    pub eps: Rat,
    pub delta: Option<Rat>,
    pub verdict: Decision,
}

/// Every estimate of the Lipschitz modulus side by side.
#[derive(Clone, Debug)]
pub struct LipschitzReport {
    pub oracle: OracleModulus,
    pub neighborhood: Vec<NeighborhoodEntry>,
    pub pointbased: bool,
    /// `None` when the criterion could not be separated from zero.
    pub exact_bound: Option<SquaredBound>,
    pub norm_mixed: SquaredBound,
    pub norm_normal: SquaredBound,
    pub consistency: bool,
}

fn sq_le_root(a_sq: &Rat, b: &Rat) -> bool {
    a_sq <= &(b * b)
}

pub fn bound_estimates(pt: &ConstrainedPoint, opts: &StabilityOptions) -> Result<LipschitzReport> {
    let profile = CriterionProfile::new(pt, opts.delta.as_ref(), opts.net_budget)?;
    let neighborhood = opts
        .eps_table
        .iter()
        .map(|e| -> Result<NeighborhoodEntry> {
            check_open_unit("eps", e, false)?;
            Ok(NeighborhoodEntry {
                eps: e.clone(),
                delta: profile.delta.clone(),
                verdict: profile.decide(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let exact_bound = match exact_bound_from(&profile) {
        Ok(b) => Some(b),
        Err(Error::Undecided(_)) => None,
        Err(e) => return Err(e),
    };
    let pointbased = pointbased_criterion(pt)?;
    let norm_mixed = limiting_coderivative(pt, CoderivativeKind::LimitingMixed)?.norm()?;
    let norm_normal = limiting_coderivative(pt, CoderivativeKind::LimitingNormal)?.norm()?;
    let oracle = brute_force_lip(pt, &opts.oracle_radius, &opts.oracle_step)?;
    let consistency = if pointbased {
        let mut ok = !oracle.unbounded;
        for b in [Some(&norm_mixed), Some(&norm_normal), exact_bound.as_ref()] {
            ok &= match b.map(|b| (b.lower(), b.upper())) {
                Some((Some(lo), Some(hi))) => sq_le_root(lo, &oracle.hi) && &oracle.lo_sq <= hi,
                _ => false,
            };
        }
        ok
    } else {
        // failure shows on the grid as ratios growing with the resolution
        let growth = &oracle.radius / (rat(4) * &oracle.step);
        let grid_fails = oracle.unbounded || oracle.lo >= growth;
        grid_fails
            && !norm_mixed.is_bounded()
            && !norm_normal.is_bounded()
            && exact_bound.as_ref().map_or(true, |b| !b.is_bounded())
    };
    Ok(LipschitzReport {
        oracle,
        neighborhood,
        pointbased,
        exact_bound,
        norm_mixed,
        norm_normal,
        consistency,
    })
}

/// Verdict on metric regularity relative to `Ω`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricRegularity {
    pub regular: bool,
    /// Squared modulus of the inverse.
    pub modulus: SquaredBound,
}

/// The range `S(Ω)` as one convex polyhedron.
pub fn range_polyhedron(pt: &ConstrainedPoint) -> Result<ConvexPolyhedron> {
    let range = pt.restricted().range()?;
    for p in range.pieces() {
        let mut covers = true;
        for q in range.pieces() {
            if !q.is_subset(p)? {
                covers = false;
                break;
            }
        }
        if covers {
            return Ok(p.clone());
        }
    }
    Err(Error::Unsupported("range of the restricted map is not a single convex polyhedron".into()))
}

/// `S^{-1}` Lipschitz-like relative to `S(Ω)` around `(ȳ, x̄)`.
pub fn metric_regularity_check(pt: &ConstrainedPoint) -> Result<MetricRegularity> {
    let theta = range_polyhedron(pt)?;
    let inverse = ConstrainedPoint::new(pt.mapping.invert(), theta, pt.y.clone(), pt.x.clone())?;
    let regular = pointbased_criterion(&inverse)?;
    let modulus = if regular {
        match exact_bound_scan(&inverse, None) {
            Ok(b) => b,
            Err(Error::Undecided(_)) => limiting_coderivative(&inverse, CoderivativeKind::LimitingMixed)?.norm()?,
            Err(e) => return Err(e),
        }
    } else {
        SquaredBound::Unbounded
    };
    Ok(MetricRegularity { regular, modulus })
}
