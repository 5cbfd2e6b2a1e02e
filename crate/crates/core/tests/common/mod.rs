//! Random rational instances and the property suites shared by the test targets.

#![allow(dead_code)]

use std::path::PathBuf;

use num_traits::Zero;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, RngSeed, TestCaseError, TestRunner};

use relip_core::calculus::inverse_image_inclusion_check;
use relip_core::coderivative::{limiting_coderivative, stratify, CoderivativeKind, ConstrainedPoint};
use relip_core::geometry::rational::{rat, ratio};
use relip_core::geometry::{Constraint, ConvexPolyhedron, PolyCone, QVector, Rat};
use relip_core::io::problem::{parse_problem, Problem};
use relip_core::local::{
    contingent_cone, eps_cone_member_model, eps_normal_set_member, eps_regular_normal_member, eps_set_member_model,
    jt_stability_check, regular_normal_cone, PLSet,
};
use relip_core::multifunction::PLMultifunction;

pub const SEED: u64 = 0x5eed_1e55;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn load(name: &str) -> Problem {
    let text = std::fs::read_to_string(fixtures_dir().join(name)).expect("fixture exists");
    parse_problem(&text).expect("fixture parses")
}

pub fn corpus() -> Vec<(String, Problem)> {
    let mut names: Vec<String> = std::fs::read_dir(fixtures_dir())
        .expect("fixture directory")
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .filter(|n| n.ends_with(".json"))
        .collect();
    names.sort();
    names.into_iter().map(|n| (n.clone(), load(&n))).collect()
}

pub fn point_task(problem: &Problem) -> Option<ConstrainedPoint> {
    let t = problem.spec.tasks.point.as_ref()?;
    Some(
        ConstrainedPoint::new(
            problem.mapping(&t.mapping).ok()?.clone(),
            problem.omega.clone(),
            problem.point(&t.x).ok()?.clone(),
            problem.point(&t.y).ok()?.clone(),
        )
        .expect("fixture point is valid"),
    )
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        rng_algorithm: RngAlgorithm::ChaCha,
        rng_seed: RngSeed::Fixed(SEED),
        failure_persistence: None,
        max_shrink_iters: 256,
        ..Config::default()
    })
}

/// Runs `cases` random cases; the error names the minimal failing input.
pub fn run_suite<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

fn small_rat() -> impl Strategy<Value = Rat> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| ratio(n, d))
}

fn int_vec(dim: usize, range: i64) -> impl Strategy<Value = QVector> {
    prop::collection::vec(-range..=range, dim).prop_map(|c| QVector::from_ints(&c))
}

fn nonzero_vec(dim: usize, range: i64) -> impl Strategy<Value = QVector> {
    int_vec(dim, range).prop_filter("nonzero", |v| !v.is_zero())
}

pub fn eps_value() -> impl Strategy<Value = Rat> {
    (1i64..=15).prop_map(|k| ratio(k, 16))
}

fn positive_scale() -> impl Strategy<Value = Rat> {
    prop_oneof![Just(rat(2)), Just(ratio(1, 3)), Just(rat(7)), (1i64..=9, 1i64..=9).prop_map(|(a, b)| ratio(a, b))]
}

/// Polyhedron through `x`: halfspaces `a·(z - x) <= s` with `s >= 0`, optionally an equality.
fn polyhedron_at(x: QVector) -> impl Strategy<Value = ConvexPolyhedron> {
    let d = x.dim();
    let row = (nonzero_vec(d, 3), prop_oneof![3 => Just(0i64), 1 => 1i64..=2]);
    (prop::collection::vec(row, 1..=3), prop::option::weighted(0.2, nonzero_vec(d, 2))).prop_map(
        move |(rows, eq)| {
            let ineqs = rows
                .into_iter()
                .map(|(a, s)| {
                    let b = a.dot(&x) + rat(s);
                    Constraint::new(a, b)
                })
                .collect();
            let eqs = eq
                .into_iter()
                .map(|a| {
                    let b = a.dot(&x);
                    Constraint::new(a, b)
                })
                .collect();
            ConvexPolyhedron::new(d, ineqs, eqs).expect("rows have the right length")
        },
    )
}

/// A union of one or two polyhedra in the plane, all containing the returned point.
pub fn pl_set_at_point() -> impl Strategy<Value = (PLSet, QVector)> {
    (small_rat(), small_rat())
        .prop_map(|(a, b)| QVector::new(vec![a, b]))
        .prop_flat_map(|x| {
            let piece = polyhedron_at(x.clone());
            (prop::collection::vec(piece, 1..=2), Just(x))
        })
        .prop_map(|(pieces, x)| (PLSet::new(2, pieces).expect("pieces are planar"), x))
}

/// A random cone in dimension 2 or 3 from up to four generators.
fn random_cone() -> impl Strategy<Value = PolyCone> {
    (2usize..=3)
        .prop_flat_map(|d| prop::collection::vec(int_vec(d, 3), 1..=4).prop_map(move |g| (d, g)))
        .prop_map(|(d, gens)| PolyCone::from_generators(d, gens).expect("generators fit"))
}

/// Constraint sets on the line that contain 0.
fn omega_line() -> impl Strategy<Value = ConvexPolyhedron> {
    let bound = prop_oneof![Just(None), Just(Some(rat(0))), (1i64..=2).prop_map(|k| Some(rat(k)))];
    (bound.clone(), bound).prop_map(|(lo, hi)| {
        ConvexPolyhedron::boxed(&[lo.map(|l: Rat| -l)], &[hi])
    })
}

/// A constrained point `(0, 0)` of a multifunction on the line whose graph is a union of
/// one or two polyhedral cones.
pub fn pl_point() -> impl Strategy<Value = ConstrainedPoint> {
    let origin = QVector::zeros(2);
    let cone_piece = prop::collection::vec(nonzero_vec(2, 3), 1..=3)
        .prop_map(|rows| ConvexPolyhedron::new(2, rows.into_iter().map(|a| Constraint::new(a, rat(0))).collect(), Vec::new()).unwrap());
    let line_piece = nonzero_vec(2, 3).prop_map(|a| ConvexPolyhedron::new(2, Vec::new(), vec![Constraint::new(a, rat(0))]).unwrap());
    let piece = prop_oneof![2 => cone_piece, 1 => line_piece];
    (prop::collection::vec(piece, 1..=2), omega_line()).prop_map(move |(pieces, omega)| {
        let s = PLMultifunction::from_pieces(1, 1, pieces).unwrap();
        ConstrainedPoint::new(s, omega, origin.slice(0..1), origin.slice(1..2)).unwrap()
    })
}

fn in_cone(c: &PolyCone, v: &QVector) -> bool {
    c.contains(v).unwrap()
}

/// `v = Π_C(v) + w` with `w` in the polar and `<Π_C(v), w> = 0`, exactly.
pub fn suite_moreau(cases: u32) -> Result<(), String> {
    let strategy = random_cone().prop_flat_map(|c| {
        let d = c.dim();
        (Just(c), int_vec(d, 5))
    });
    run_suite(cases, strategy, |(c, v)| {
        let (p, norm_sq) = c.project(&v).unwrap();
        let w = &v - &p;
        prop_assert_eq!(&p.norm_sq(), &norm_sq);
        prop_assert!(in_cone(&c, &p), "projection outside the cone");
        prop_assert!(in_cone(&c.polar().unwrap(), &w), "residual outside the polar");
        prop_assert!(p.dot(&w).is_zero(), "parts not orthogonal");
        prop_assert_eq!(&(&p + &w), &v);
        Ok(())
    })
}

/// Positive homogeneity of the ε-regular normal cone and ε-monotonicity of both notions.
pub fn suite_homogeneity_monotonicity(cases: u32) -> Result<(), String> {
    let strategy = (pl_set_at_point(), int_vec(2, 4), eps_value(), eps_value(), positive_scale());
    run_suite(cases, strategy, |((s, x), v, e1, e2, lambda)| {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let model = contingent_cone(&s, &x).unwrap();
        let cone_lo = eps_cone_member_model(&model, &v, &lo).unwrap();
        let cone_hi = eps_cone_member_model(&model, &v, &hi).unwrap();
        let scaled = eps_cone_member_model(&model, &v.scale(&lambda), &lo).unwrap();
        prop_assert_eq!(cone_lo, scaled, "cone membership changed under scaling");
        prop_assert!(!cone_lo || cone_hi, "cone membership not monotone in eps");
        let set_lo = eps_set_member_model(&model, &v, &lo).unwrap();
        let set_hi = eps_set_member_model(&model, &v, &hi).unwrap();
        prop_assert!(!set_lo || set_hi, "set membership not monotone in eps");
        prop_assert_eq!(eps_regular_normal_member(&s, &x, &v, &lo).unwrap(), cone_lo);
        Ok(())
    })
}

/// At ε = 0 both notions coincide with the regular normal cone.
pub fn suite_zero_collapse(cases: u32) -> Result<(), String> {
    let strategy = (pl_set_at_point(), int_vec(2, 4));
    run_suite(cases, strategy, |((s, x), v)| {
        let zero = Rat::zero();
        let cone = eps_regular_normal_member(&s, &x, &v, &zero).unwrap();
        let set = eps_normal_set_member(&s, &x, &v, &zero).unwrap();
        let normal = regular_normal_cone(&s, &x).unwrap().contains(&v).unwrap();
        prop_assert_eq!(cone, set);
        prop_assert_eq!(cone, normal);
        Ok(())
    })
}

/// Membership of `(x*, y*)` in the union over strata of ε-normal-set conditions as ε = 2^-k
/// decreases: monotone, eventually constant, and equal to the limiting coderivative.
pub fn suite_eps_scan(cases: u32) -> Result<(), String> {
    let strategy = (pl_point(), int_vec(1, 3), int_vec(1, 3));
    run_suite(cases, strategy, |(pt, xs, ys)| {
        let catalog = stratify(&pt, None).unwrap();
        let flipped = xs.concat(&(-&ys));
        let member = |eps: &Rat, set_based: bool| -> bool {
            catalog.strata.iter().any(|s| {
                let tangent_ok = s.omega_tangent.as_ref().map_or(true, |t| t.contains(&xs).unwrap());
                let model_ok = if set_based {
                    eps_set_member_model(&s.graph_model, &flipped, eps).unwrap()
                } else {
                    eps_cone_member_model(&s.graph_model, &flipped, eps).unwrap()
                };
                tangent_ok && model_ok
            })
        };
        let limiting = limiting_coderivative(&pt, CoderivativeKind::LimitingNormal)
            .unwrap()
            .contains(&xs, &ys)
            .unwrap();
        let at_zero = member(&Rat::zero(), true);
        prop_assert_eq!(at_zero, limiting, "eps = 0 scan differs from the limiting graph");
        prop_assert_eq!(member(&Rat::zero(), false), limiting, "cone path differs from the limiting graph");
        let mut previous = true;
        let mut last = true;
        for k in [1u32, 2, 3, 8, 16, 32, 64] {
            let eps = Rat::new(1.into(), num_bigint::BigInt::from(1u8) << k);
            let now = member(&eps, true);
            prop_assert!(previous || !now, "scan not monotone at 2^-{}", k);
            previous = now;
            last = now;
        }
        prop_assert_eq!(last, at_zero, "scan did not stabilize");
        Ok(())
    })
}

/// Regular normals of an inverse image lift to regular normals of the constrained graph.
pub fn suite_inverse_image(cases: u32) -> Result<(), String> {
    let bound = prop_oneof![Just(None), (0i64..=2).prop_map(Some)];
    let affine = (1usize..=2).prop_flat_map(|n| (Just(n), int_vec(n, 3), -2i64..=2));
    let kinked = (-3i64..=3, -3i64..=3);
    let map = prop_oneof![
        affine.prop_map(|(n, row, c)| {
            let f = PLMultifunction::affine(&[row], &QVector::from_ints(&[c]), &ConvexPolyhedron::full(n)).unwrap();
            (f, n, rat(c))
        }),
        kinked.prop_map(|(a, b)| {
            // x ↦ a x on x <= 0 and b x on x >= 0
            let left = ConvexPolyhedron::new(
                2,
                vec![Constraint::new(QVector::from_ints(&[1, 0]), rat(0))],
                vec![Constraint::new(QVector::from_ints(&[a, -1]), rat(0))],
            )
            .unwrap();
            let right = ConvexPolyhedron::new(
                2,
                vec![Constraint::new(QVector::from_ints(&[-1, 0]), rat(0))],
                vec![Constraint::new(QVector::from_ints(&[b, -1]), rat(0))],
            )
            .unwrap();
            (PLMultifunction::from_pieces(1, 1, vec![left, right]).unwrap(), 1, rat(0))
        }),
    ];
    let strategy = (map, bound.clone(), bound, eps_value());
    run_suite(cases, strategy, |((f, n, value), lo, hi, eps)| {
        let theta = ConvexPolyhedron::boxed(&[lo.map(|l| &value - rat(l))], &[hi.map(|h| &value + rat(h))]);
        let check = inverse_image_inclusion_check(&f, &PLSet::single(theta), &QVector::zeros(n), &eps, 64).unwrap();
        prop_assert!(check.holds, "counterexample {:?}", check.counterexample);
        Ok(())
    })
}

/// Polyhedral sharpening of tangent stability: `T(x̄; Ω) ⊆ T(x; Ω)` near `x̄`.
pub fn suite_tangent_stability(cases: u32) -> Result<(), String> {
    let omega_at = (small_rat(), small_rat())
        .prop_map(|(a, b)| QVector::new(vec![a, b]))
        .prop_flat_map(|x| (polyhedron_at(x.clone()), Just(x)));
    let strategy = (omega_at, prop::collection::vec((nonzero_vec(2, 3), 1i64..=8), 1..=6));
    run_suite(cases, strategy, |((omega, xbar), moves)| {
        let report = jt_stability_check(&omega, &xbar, &ratio(1, 10)).unwrap();
        let t_bar = omega.active_tangent_cone(&xbar).unwrap();
        for (d, k) in moves {
            let step = match &report.delta {
                Some(delta) => delta / (rat(2) * d.norm_l1() * rat(k)),
                None => ratio(1, k),
            };
            let x = xbar.add_scaled(&step, &d);
            if !omega.contains(&x).unwrap() {
                continue;
            }
            let t = omega.active_tangent_cone(&x).unwrap();
            prop_assert!(t_bar.is_subset(&t).unwrap(), "tangent shrinks at {}", x);
        }
        Ok(())
    })
}
