//! Certified finite nets on the unit sphere.

use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::rational::{rat, sqrt_bounds, sqrt_upper};
use crate::geometry::{PolyCone, QVector, Rat};

/// Integer points on the surface of the cube `[-k, k]^d`.
///
/// Every unit vector lies within `sqrt(d - 1) / k` of some normalized net point.
#[derive(Clone, Debug)]
pub struct SphereNet {
    pub dim: usize,
    pub k: i64,
    pub points: Vec<QVector>,
}

impl SphereNet {
    /// Finest net with at most `budget` points (never coarser than `k = 1`).
    pub fn with_budget(dim: usize, budget: usize) -> SphereNet {
        let count = |k: i64| -> f64 {
            let d = dim as i32;
            ((2 * k + 1) as f64).powi(d) - ((2 * k - 1) as f64).powi(d)
        };
        let mut k = 1;
        while count(k + 1) <= budget as f64 && k < 1 << 20 {
            k += 1;
        }
        SphereNet::new(dim, k)
    }

    pub fn new(dim: usize, k: i64) -> SphereNet {
        let mut points = Vec::new();
        for axis in 0..dim {
            for sign in [-1, 1] {
                let mut coords = vec![-k; dim];
                coords[axis] = sign * k;
                loop {
                    // a point belongs to the first axis where it touches the surface
                    if (0..axis).all(|j| coords[j].abs() < k) {
                        points.push(QVector::from_ints(&coords));
                    }
                    let mut j = 0;
                    loop {
                        if j == dim {
                            break;
                        }
                        if j == axis {
                            j += 1;
                            continue;
                        }
                        if coords[j] < k {
                            coords[j] += 1;
                            break;
                        }
                        coords[j] = -k;
                        j += 1;
                    }
                    if j == dim {
                        break;
                    }
                }
            }
        }
        SphereNet { dim, k, points }
    }

    /// Squared covering radius.
    pub fn radius_sq(&self) -> Rat {
        Rat::new((self.dim as i64 - 1).into(), (self.k * self.k).into())
    }

    pub fn radius_upper(&self) -> Rat {
        sqrt_upper(&self.radius_sq())
    }

    /// Net points whose direction lies within the covering radius of `cone`.
    pub fn near_cone(&self, cone: &PolyCone) -> Result<Vec<QVector>> {
        let r2 = self.radius_sq();
        let kept: Vec<Option<QVector>> = self
            .points
            .par_iter()
            .map(|p| -> Result<Option<QVector>> {
                let (_, proj) = cone.project(p)?;
                let norm = p.norm_sq();
                let gap = &norm - proj;
                Ok((gap <= &r2 * &norm).then(|| p.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(kept.into_iter().flatten().collect())
    }
}

/// Bounds on `min{f(u) : u ∈ C, |u| = 1}` for a squared functional `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SphereMin {
    /// Certified lower bound of the squared minimum.
    pub lo: Rat,
    /// Attained squared value.
    pub hi: Rat,
    /// Direction in `C` attaining `hi`.
    pub witness: QVector,
}

impl SphereMin {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }
}

/// Minimizes `f` over unit vectors of `cone`.
///
/// `f(p)` is the square of a positively homogeneous function that is `lipschitz`-Lipschitz.
/// Returns `None` when the cone is `{0}`. In one dimension the result is exact.
pub fn minimize_on_sphere(
    cone: &PolyCone,
    lipschitz: &Rat,
    budget: usize,
    f: impl Fn(&QVector) -> Result<Rat> + Sync,
) -> Result<Option<SphereMin>> {
    let gens = cone.generators()?;
    let mut candidates: Vec<QVector> = gens.rays.clone();
    for l in &gens.lines {
        candidates.push(l.clone());
        candidates.push(-l);
    }
    if candidates.is_empty() {
        return Ok(None);
    }
    let value = |p: &QVector| -> Result<Rat> { Ok(f(p)? / p.norm_sq()) };
    let mut best: Option<(Rat, QVector)> = None;
    for c in &candidates {
        let v = value(c)?;
        if best.as_ref().map_or(true, |(b, _)| &v < b) {
            best = Some((v, c.clone()));
        }
    }
    if cone.dim() == 1 {
        let (hi, witness) = best.expect("candidates are nonempty");
        return Ok(Some(SphereMin { lo: hi.clone(), hi, witness }));
    }
    let net = SphereNet::with_budget(cone.dim(), budget);
    let r = net.radius_upper() * lipschitz;
    let near = net.near_cone(cone)?;
    let evaluated: Vec<(Rat, bool, QVector)> = near
        .par_iter()
        .map(|p| -> Result<(Rat, bool, QVector)> { Ok((value(p)?, cone.contains(p)?, p.clone())) })
        .collect::<Result<Vec<_>>>()?;
    let mut lo: Option<Rat> = None;
    for (v, inside, p) in evaluated {
        if inside && best.as_ref().map_or(true, |(b, _)| &v < b) {
            best = Some((v.clone(), p));
        }
        let root = sqrt_bounds(&v, 40).0 - &r;
        let bound = if root.is_positive() { &root * &root } else { Rat::zero() };
        if lo.as_ref().map_or(true, |l| &bound < l) {
            lo = Some(bound);
        }
    }
    let (hi, witness) = best.expect("candidates are nonempty");
    let lo = lo.unwrap_or_else(|| hi.clone()).min(hi.clone());
    Ok(Some(SphereMin { lo, hi, witness }))
}

/// A unit vector with rational coordinates within about `2^-bits` of the direction of `v`.
pub fn rational_unit_near(v: &QVector, bits: u32) -> Option<QVector> {
    let n2 = v.norm_sq();
    if n2.is_zero() {
        return None;
    }
    if let Some(norm) = crate::geometry::rational::sqrt_exact(&n2) {
        return Some(v.scale(&(Rat::from_integer(1.into()) / norm)));
    }
    let one = Rat::from_integer(1.into());
    let t = v.scale(&sqrt_bounds(&(&one / &n2), bits).0);
    let j = (0..t.dim())
        .max_by(|&a, &b| t[a].abs().cmp(&t[b].abs()))
        .expect("nonzero vector has coordinates");
    // inverse stereographic projection from the pole opposite to t
    let sigma = if t[j].is_positive() { -&one } else { one.clone() };
    let denom = &one - &sigma * &t[j];
    let s: Vec<Rat> = (0..t.dim()).map(|i| if i == j { Rat::zero() } else { &t[i] / &denom }).collect();
    let sum: Rat = s.iter().map(|c| c * c).sum();
    let scale = &sum + &one;
    Some(
        (0..t.dim())
            .map(|i| {
                if i == j {
                    &sigma * (&sum - &one) / &scale
                } else {
                    rat(2) * &s[i] / &scale
                }
            })
            .collect(),
    )
}
