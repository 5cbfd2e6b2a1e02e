//! One pass/fail line per acceptance criterion.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_traits::Zero;

use common::*;
use relip_core::calculus::{chain_rule_check, extremal_witness, fuzzy_intersection_witness, sum_rule_check, ProbeOptions};
use relip_core::coderivative::{limiting_coderivative, CoderivativeKind, SquaredBound};
use relip_core::fixtures;
use relip_core::geometry::rational::{format_rat, rat, ratio, sqrt_bounds, sqrt_exact};
use relip_core::geometry::{QVector, Rat};
use relip_core::io::commands::{run_command, Command, RunOptions};
use relip_core::local::{contingent_cone, eps_cone_member_model, eps_set_member_model};
use relip_core::stability::{
    brute_force_lip, exact_bound_scan, neighborhood_criterion, pointbased_criterion, Decision, ORACLE_CEILING,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn exact(b: &SquaredBound) -> Option<Rat> {
    match b {
        SquaredBound::Exact(v) => Some(v.clone()),
        _ => None,
    }
}

/// ε-normal set on `T(0;Ω) × {0}` is `[0, √2 ε] × {0}`; the ε-regular cone condition holds
/// exactly when `ε² < 1/2`.
fn criterion_1() -> Outcome {
    let pt = fixtures::inst_id();
    let model = contingent_cone(pt.restricted_graph(), &pt.base()).map_err(|e| e.to_string())?;
    let zero = rat(0);
    for eps in [ratio(1, 4), ratio(1, 2), ratio(3, 4)] {
        let bound_sq = rat(2) * &eps * &eps;
        let member = |a: &Rat| eps_set_member_model(&model, &QVector::new(vec![a.clone(), zero.clone()]), &eps).unwrap();
        for k in 0..=256 {
            let a = ratio(k, 64);
            ensure(member(&a) == (&a * &a <= bound_sq), format!("eps {}: a = {} misclassified", format_rat(&eps), format_rat(&a)))?;
        }
        let (below, above) = sqrt_bounds(&bound_sq, 64);
        ensure(member(&below), format!("eps {}: point just below the endpoint excluded", format_rat(&eps)))?;
        ensure(sqrt_exact(&bound_sq).is_some() || !member(&above), "point just above the endpoint included")?;
    }
    let half = ratio(1, 2);
    let cases = [ratio(1, 4), ratio(1, 2), ratio(7, 10), ratio(99, 140), ratio(5, 7), ratio(3, 4), ratio(9, 10)];
    for eps in &cases {
        let holds = !eps_cone_member_model(&model, &QVector::from_ints(&[1, 0]), eps).unwrap();
        let zero_member = eps_cone_member_model(&model, &QVector::from_ints(&[0, 0]), eps).unwrap();
        ensure(zero_member, "origin missing from the eps-regular cone")?;
        ensure(holds == (eps * eps < half), format!("cone condition at eps {} wrong", format_rat(eps)))?;
    }
    Ok(format!(
        "eps-set slice [0, sqrt(2) eps] at eps 1/4, 1/2, 3/4 on 257 grid points each; cone condition iff eps^2 < 1/2 on {} values",
        cases.len()
    ))
}

/// INST-ID: exact bound, both norms and the oracle agree on 1.
fn criterion_2() -> Outcome {
    let start = Instant::now();
    let pt = fixtures::inst_id();
    let bound = exact_bound_scan(&pt, None).map_err(|e| e.to_string())?;
    ensure(exact(&bound) == Some(rat(1)), format!("exact bound {bound:?}"))?;
    for kind in [CoderivativeKind::LimitingMixed, CoderivativeKind::LimitingNormal] {
        let norm = limiting_coderivative(&pt, kind).and_then(|g| g.norm()).map_err(|e| e.to_string())?;
        ensure(exact(&norm) == Some(rat(1)), format!("norm {norm:?}"))?;
    }
    let oracle = brute_force_lip(&pt, &ratio(1, 10), &ratio(1, 1000)).map_err(|e| e.to_string())?;
    ensure(!oracle.unbounded, "oracle unbounded")?;
    ensure(oracle.lo <= rat(1) && rat(1) <= oracle.hi, "oracle interval misses 1")?;
    let width = &oracle.hi - &oracle.lo;
    ensure(width <= ratio(1, 20), format!("oracle width {}", format_rat(&width)))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), format!("took {elapsed:?}"))?;
    Ok(format!(
        "exact bound 1, norms 1, oracle [{}, {}] width {}, {} ms",
        format_rat(&oracle.lo),
        format_rat(&oracle.hi),
        format_rat(&width),
        elapsed.as_millis()
    ))
}

/// INST-ABS is Lipschitz-like relative to [0, ∞) with modulus 1 but not relative to the line.
fn criterion_3() -> Outcome {
    let err = |e: relip_core::Error| e.to_string();
    let half = fixtures::inst_abs_half();
    ensure(pointbased_criterion(&half).map_err(err)?, "pointbased false on [0, inf)")?;
    let bound = exact_bound_scan(&half, None).map_err(err)?;
    ensure(exact(&bound) == Some(rat(1)), format!("modulus {bound:?} on [0, inf)"))?;
    let oracle = brute_force_lip(&half, &ratio(1, 10), &ratio(1, 100)).map_err(err)?;
    ensure(!oracle.unbounded && oracle.lo <= rat(1) && rat(1) <= oracle.hi, "oracle misses 1 on [0, inf)")?;
    let full = fixtures::inst_abs_full();
    ensure(!pointbased_criterion(&full).map_err(err)?, "pointbased true on the line")?;
    let oracle = brute_force_lip(&full, &ratio(1, 10), &ratio(1, 100)).map_err(err)?;
    ensure(oracle.unbounded, "oracle bounded on the line")?;
    Ok("relative [0, inf): criterion true, modulus 1; relative line: criterion false, oracle unbounded".into())
}

/// Oracle bounded, some ε with the neighborhood criterion, and the pointbased criterion agree.
fn criterion_4() -> Outcome {
    let corpus = corpus();
    let mut checked = 0;
    let mut eps_list: Vec<Rat> = (1..=12).map(|k| Rat::new(1.into(), num_bigint::BigInt::from(1u32) << k)).collect();
    eps_list.push(ratio(3, 4));
    for (name, problem) in &corpus {
        let Some(pt) = point_task(problem) else { continue };
        let oracle = brute_force_lip(&pt, &ratio(1, 10), &ratio(1, 100)).map_err(|e| format!("{name}: {e}"))?;
        let oracle_bounded = !oracle.unbounded && oracle.hi < rat(ORACLE_CEILING);
        let pointbased = pointbased_criterion(&pt).map_err(|e| format!("{name}: {e}"))?;
        let mut some_eps = false;
        for eps in &eps_list {
            match neighborhood_criterion(&pt, eps, None).map_err(|e| format!("{name}: {e}"))? {
                Decision::True => {
                    some_eps = true;
                    break;
                }
                Decision::False => {}
                Decision::Undecided => return Err(format!("{name}: undecided at eps {}", format_rat(eps))),
            }
        }
        ensure(
            oracle_bounded == some_eps && some_eps == pointbased,
            format!("{name}: oracle {oracle_bounded}, neighborhood {some_eps}, pointbased {pointbased}"),
        )?;
        checked += 1;
    }
    ensure(checked >= 8, format!("only {checked} fixtures with a point task"))?;
    Ok(format!("three-way agreement on {checked} corpus fixtures"))
}

/// Chain (strict derivative) and sum rules hold; the qualification failure is flagged.
fn criterion_5() -> Outcome {
    let probe = ProbeOptions::default();
    let chain = load("chain-doubling.json");
    let t = chain.spec.tasks.chain.as_ref().ok_or("chain task missing")?;
    let p = |n: &str| chain.point(n).unwrap().clone();
    let v = chain_rule_check(
        chain.mapping(&t.s1).unwrap(),
        chain.mapping(&t.s2).unwrap(),
        &chain.omega,
        &p(&t.x),
        &p(&t.y),
        &p(&t.z),
        t.variant,
        &probe,
    )
    .map_err(|e| e.to_string())?;
    ensure(v.included && v.qualification, format!("chain: included {}, qualification {}", v.included, v.qualification))?;
    let sum = load("sum-id-negid.json");
    let t = sum.spec.tasks.sum.as_ref().ok_or("sum task missing")?;
    let p = |n: &str| sum.point(n).unwrap().clone();
    let v = sum_rule_check(
        sum.mapping(&t.s1).unwrap(),
        sum.mapping(&t.s2).unwrap(),
        &sum.omega,
        &p(&t.x),
        &p(&t.y),
        (&p(&t.y1), &p(&t.y2)),
        t.variant,
        &probe,
    )
    .map_err(|e| e.to_string())?;
    ensure(v.included && v.qualification, format!("sum: included {}, qualification {}", v.included, v.qualification))?;
    let fail = load("chain-qc-fail.json");
    let report = run_command(Command::VerifyChain, &fail, &RunOptions::default()).map_err(|e| e.to_string())?;
    ensure(report.verdicts["qualification"] == false, "qualification-failure fixture passed the qualification")?;
    ensure(!report.hypotheses_met, "qualification failure not flagged")?;
    Ok("chain (strict derivative) and sum: included with qualification; failure fixture flagged".into())
}

/// Extremal witness ±(0, 1/2) with zero residuals; fuzzy witness with λ = 1 and zero residuals.
fn criterion_6() -> Outcome {
    let sys = load("half-plane-extremal.json");
    let e = sys.spec.tasks.extremal.as_ref().ok_or("extremal task missing")?;
    let (l1, l2) = (sys.set(&e.l1).unwrap(), sys.set(&e.l2).unwrap());
    let origin = sys.point(&e.point).unwrap();
    let shift = QVector::new(e.shifts.last().unwrap().iter().map(|q| q.0.clone()).collect());
    let w = extremal_witness(l1, l2, &sys.omega, origin, &shift, &ratio(1, 10), None).map_err(|e| e.to_string())?;
    let half = QVector::new(vec![rat(0), ratio(1, 2)]);
    ensure(w.covectors == vec![half.clone(), -&half], format!("covectors {:?}", w.covectors))?;
    ensure(w.residuals.iter().all(|r| r.value.is_zero()), "nonzero extremal residual")?;
    let norms: Option<Vec<Rat>> = w.covectors.iter().map(|c| sqrt_exact(&c.norm_sq())).collect();
    let total: Rat = norms.ok_or("irrational covector norm")?.into_iter().sum();
    ensure(total == rat(1), format!("normalization {}", format_rat(&total)))?;
    let f = sys.spec.tasks.fuzzy.as_ref().ok_or("fuzzy task missing")?;
    let w = fuzzy_intersection_witness(
        sys.set(&f.t1).unwrap(),
        sys.set(&f.t2).unwrap(),
        &sys.omega,
        sys.point(&f.point).unwrap(),
        sys.point(&f.covector).unwrap(),
        &ratio(1, 2),
        &ratio(1, 10),
        1000,
    )
    .map_err(|e| e.to_string())?;
    ensure(w.lambda == Some(rat(1)), format!("lambda {:?}", w.lambda))?;
    ensure(w.satisfied && w.residuals.iter().all(|r| r.value.is_zero()), "nonzero fuzzy residual")?;
    Ok("extremal covectors (0, 1/2) and (0, -1/2), norms sum to 1; fuzzy lambda 1; all residuals 0".into())
}

/// Property suites with a fixed seed.
fn criterion_7() -> Outcome {
    const CASES: u32 = 1000;
    let suites: [(&str, fn(u32) -> Result<(), String>); 6] = [
        ("Moreau decomposition", suite_moreau),
        ("eps-cone homogeneity and monotonicity", suite_homogeneity_monotonicity),
        ("eps = 0 collapse", suite_zero_collapse),
        ("eps-scan stabilization", suite_eps_scan),
        ("inverse-image inclusion", suite_inverse_image),
        ("polyhedral tangent stability", suite_tangent_stability),
    ];
    for (name, suite) in suites {
        suite(CASES).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(format!("{} suites x {CASES} cases, seed {SEED:#x}, zero failures", suites.len()))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("example reproduction", criterion_1),
        ("exact-bound chain", criterion_2),
        ("relativization discriminator", criterion_3),
        ("three-way equivalence", criterion_4),
        ("calculus rules", criterion_5),
        ("extremal principle", criterion_6),
        ("property suites", criterion_7),
    ];
    let mut failures = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail}", i + 1),
            Err(detail) => {
                println!("FAIL criterion {} ({name}): {detail}", i + 1);
                failures.push(i + 1);
            }
        }
    }
    assert!(failures.is_empty(), "failing criteria: {failures:?}");
}
