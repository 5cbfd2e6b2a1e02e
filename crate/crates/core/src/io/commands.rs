//! Command dispatch from a parsed problem to a report.

use std::time::Instant;

use serde_json::{json, Value};

use crate::calculus::{
    chain_rule_check, extremal_detect, extremal_witness, fuzzy_intersection_witness, sum_rule_check, ProbeOptions,
    RuleVerdict, WitnessRecord,
};
use crate::coderivative::{
    coderivative_normality_check, limiting_coderivative, psnc_verdict, regular_coderivative, stratify,
    CoderivativeKind, ConstrainedPoint,
};
use crate::error::{Error, Result};
use crate::geometry::rational::{format_rat, ratio};
use crate::geometry::{QVector, Rat};
use crate::io::problem::Problem;
use crate::io::report::{
    cone_union_value, cone_value, rat_value, vector_strings, vector_value, AnalysisReport, Modulus, ResidualEntry,
    WitnessEntry,
};
use crate::local::{contingent_cone, regular_normal_cone};
use crate::stability::{bound_estimates, metric_regularity_check, StabilityOptions, DEFAULT_NET_BUDGET};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Cone,
    Coderivative,
    Lipschitz,
    Regularity,
    VerifyChain,
    VerifySum,
    Extremal,
    Fuzzy,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Cone,
        Command::Coderivative,
        Command::Lipschitz,
        Command::Regularity,
        Command::VerifyChain,
        Command::VerifySum,
        Command::Extremal,
        Command::Fuzzy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Cone => "cone",
            Command::Coderivative => "coderivative",
            Command::Lipschitz => "lipschitz",
            Command::Regularity => "regularity",
            Command::VerifyChain => "verify-chain",
            Command::VerifySum => "verify-sum",
            Command::Extremal => "extremal",
            Command::Fuzzy => "fuzzy",
        }
    }

    pub fn from_name(name: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == name)
    }
}

/// Overrides for the parameters stored in the problem file.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub eps: Option<Rat>,
    pub delta: Option<Rat>,
    pub grid: Option<Rat>,
    pub radius: Option<Rat>,
    pub nu: Option<Rat>,
    pub budget: Option<usize>,
    pub timing: bool,
}

struct Resolved {
    eps: Option<Rat>,
    eps_table: Vec<Rat>,
    delta: Option<Rat>,
    grid: Rat,
    radius: Rat,
    nu: Rat,
    budget: Option<usize>,
}

fn resolve(problem: &Problem, opts: &RunOptions) -> Resolved {
    let p = &problem.spec.params;
    let pick = |flag: &Option<Rat>, file: &Option<crate::io::problem::Q>| {
        flag.clone().or_else(|| file.as_ref().map(|q| q.0.clone()))
    };
    let eps = pick(&opts.eps, &p.eps);
    let eps_table = match (&opts.eps, &p.eps_table) {
        (Some(e), _) => vec![e.clone()],
        (None, Some(t)) => t.iter().map(|q| q.0.clone()).collect(),
        (None, None) => match &eps {
            Some(e) => vec![e.clone()],
            None => StabilityOptions::default().eps_table,
        },
    };
    Resolved {
        eps,
        eps_table,
        delta: pick(&opts.delta, &p.delta),
        grid: pick(&opts.grid, &p.grid).unwrap_or_else(|| ratio(1, 100)),
        radius: pick(&opts.radius, &p.radius).unwrap_or_else(|| ratio(1, 10)),
        nu: pick(&opts.nu, &p.nu).unwrap_or_else(|| ratio(1, 10)),
        budget: opts.budget.or(p.budget),
    }
}

fn missing(task: &str) -> Error {
    Error::InvalidParameter(format!("problem file has no `{task}` task"))
}

fn opt_rat(q: &Option<Rat>) -> Value {
    q.as_ref().map_or(Value::Null, rat_value)
}

pub fn run_command(cmd: Command, problem: &Problem, opts: &RunOptions) -> Result<AnalysisReport> {
    let start = Instant::now();
    let r = resolve(problem, opts);
    let mut report = match cmd {
        Command::Cone => cone(problem, &r)?,
        Command::Coderivative => coderivative(problem, &r)?,
        Command::Lipschitz => lipschitz(problem, &r)?,
        Command::Regularity => regularity(problem)?,
        Command::VerifyChain => verify_chain(problem, &r)?,
        Command::VerifySum => verify_sum(problem, &r)?,
        Command::Extremal => extremal(problem, &r)?,
        Command::Fuzzy => fuzzy(problem, &r)?,
    };
    if opts.timing {
        report.timing_ms = Some(start.elapsed().as_millis() as u64);
    }
    Ok(report)
}

fn new_report(cmd: Command, problem: &Problem, task: Value) -> AnalysisReport {
    AnalysisReport::new(cmd.name(), problem.spec.name.clone(), task)
}

fn constrained_point(problem: &Problem) -> Result<(ConstrainedPoint, Value)> {
    let t = problem.spec.tasks.point.as_ref().ok_or_else(|| missing("point"))?;
    let pt = ConstrainedPoint::new(
        problem.mapping(&t.mapping)?.clone(),
        problem.omega.clone(),
        problem.point(&t.x)?.clone(),
        problem.point(&t.y)?.clone(),
    )?;
    let echo = json!({
        "mapping": t.mapping,
        "x": vector_value(&pt.x),
        "y": vector_value(&pt.y),
    });
    Ok((pt, echo))
}

fn cone(problem: &Problem, r: &Resolved) -> Result<AnalysisReport> {
    let t = problem.spec.tasks.cone.as_ref().ok_or_else(|| missing("cone"))?;
    let set = problem.any_set(&t.set)?;
    let x = problem.point(&t.point)?;
    let model = contingent_cone(&set, x)?;
    let normal = regular_normal_cone(&set, x)?;
    let mut report = new_report(
        Command::Cone,
        problem,
        json!({"set": t.set, "point": vector_value(x), "eps": opt_rat(&r.eps)}),
    );
    report.verdict("tangent", cone_union_value(&model.tangent));
    report.verdict("regular_normal", cone_value(&normal));
    report.verdict("normal_cone_is_zero", normal.is_zero()?);
    report.verdict("conical_radius", opt_rat(&model.conical_radius));
    if let Some(eps) = &r.eps {
        let gens = normal.generators()?.all();
        let members = gens
            .iter()
            .map(|g| crate::local::eps_cone_member_model(&model, g, eps))
            .collect::<Result<Vec<_>>>()?;
        report.verdict("eps_regular_normal_contains_generators", members.iter().all(|b| *b));
    }
    if model.conical_radius.is_none() {
        report.note("local cone model is exact everywhere");
    }
    Ok(report)
}

fn coderivative(problem: &Problem, r: &Resolved) -> Result<AnalysisReport> {
    let (pt, mut echo) = constrained_point(problem)?;
    echo["delta"] = opt_rat(&r.delta);
    let mut report = new_report(Command::Coderivative, problem, echo);
    let catalog = stratify(&pt, r.delta.as_ref())?;
    let mixed = limiting_coderivative(&pt, CoderivativeKind::LimitingMixed)?;
    let normal = limiting_coderivative(&pt, CoderivativeKind::LimitingNormal)?;
    let regular = regular_coderivative(&pt)?;
    let normality = coderivative_normality_check(&pt)?;
    report.verdict("strata", catalog.strata.len());
    report.verdict("delta", opt_rat(&catalog.delta));
    report.verdict("delta_shrunk", catalog.shrunk);
    report.verdict("limiting_mixed", cone_union_value(&mixed.cones));
    report.verdict("limiting_normal", cone_union_value(&normal.cones));
    report.verdict("regular", cone_union_value(&regular.cones));
    report.verdict("zero_slice", cone_union_value(&mixed.zero_slice()?));
    report.verdict("normal_equals_mixed", normality.normal);
    report.moduli.push(Modulus::from_bound("norm_mixed", &mixed.norm()?));
    report.moduli.push(Modulus::from_bound("norm_normal", &normal.norm()?));
    report.note(normality.note);
    report.note(psnc_verdict(&pt).note);
    Ok(report)
}

fn stability_options(r: &Resolved) -> StabilityOptions {
    StabilityOptions {
        delta: r.delta.clone(),
        oracle_radius: r.radius.clone(),
        oracle_step: r.grid.clone(),
        eps_table: r.eps_table.clone(),
        net_budget: r.budget.unwrap_or(DEFAULT_NET_BUDGET),
    }
}

fn lipschitz(problem: &Problem, r: &Resolved) -> Result<AnalysisReport> {
    let (pt, mut echo) = constrained_point(problem)?;
    let opts = stability_options(r);
    echo["delta"] = opt_rat(&opts.delta);
    echo["grid"] = rat_value(&opts.oracle_step);
    echo["radius"] = rat_value(&opts.oracle_radius);
    echo["eps_table"] = Value::from(opts.eps_table.iter().map(format_rat).collect::<Vec<_>>());
    echo["budget"] = Value::from(opts.net_budget);
    let est = bound_estimates(&pt, &opts)?;
    let mut report = new_report(Command::Lipschitz, problem, echo);
    report.verdict("pointbased", est.pointbased);
    report.verdict("consistency", est.consistency);
    report.verdict(
        "neighborhood",
        est.neighborhood
            .iter()
            .map(|e| json!({"eps": rat_value(&e.eps), "delta": opt_rat(&e.delta), "verdict": e.verdict}))
            .collect::<Vec<_>>(),
    );
    report.verdict("oracle_unbounded", est.oracle.unbounded);
    report.verdict("oracle_points", est.oracle.points);
    report.verdict("oracle_step", rat_value(&est.oracle.step));
    if est.oracle.unbounded {
        report.moduli.push(Modulus::unbounded("oracle"));
    } else {
        report.moduli.push(Modulus::from_squared("oracle", &est.oracle.lo_sq, &(&est.oracle.hi * &est.oracle.hi)));
    }
    report.moduli.push(Modulus::from_bound("norm_mixed", &est.norm_mixed));
    report.moduli.push(Modulus::from_bound("norm_normal", &est.norm_normal));
    match &est.exact_bound {
        Some(b) => report.moduli.push(Modulus::from_bound("exact_bound", b)),
        None => report.note("criterion values could not be separated from zero; exact bound undecided"),
    }
    report.note("criterion evaluated per stratum of the graph near the base point");
    report.note("oracle interval is the grid maximum plus the discretization allowance");
    Ok(report)
}

fn regularity(problem: &Problem) -> Result<AnalysisReport> {
    let (pt, echo) = constrained_point(problem)?;
    let mut report = new_report(Command::Regularity, problem, echo);
    let mr = metric_regularity_check(&pt)?;
    report.verdict("metrically_regular", mr.regular);
    report.moduli.push(Modulus::from_bound("inverse_modulus", &mr.modulus));
    report.note("checked as the Lipschitz-like property of the inverse relative to the range over omega");
    Ok(report)
}

fn rule_report(report: &mut AnalysisReport, v: &RuleVerdict) {
    report.hypotheses_met = v.hypotheses_met;
    report.verdict("qualification", v.qualification);
    report.verdict("included", v.included);
    if let Some(p) = &v.probe {
        report.verdict("inner_semicontinuity", p.verdict);
        report.verdict("inner_slope_sq", rat_value(&p.slope_sq));
    }
    report.verdict("lhs", cone_union_value(&v.lhs.cones));
    report.verdict("rhs", cone_union_value(&v.rhs));
    report.verdict("counterexample", v.counterexample.as_ref().map_or(Value::Null, vector_value));
    if !v.hypotheses_met {
        report.note("hypotheses unmet: inclusion reported, not asserted");
    }
    report.note("normal compactness conditions hold automatically in finite dimensions");
}

fn probe_options(r: &Resolved) -> ProbeOptions {
    ProbeOptions {
        step: ProbeOptions::default().step,
        radius: r.radius.clone(),
    }
}

fn verify_chain(problem: &Problem, r: &Resolved) -> Result<AnalysisReport> {
    let t = problem.spec.tasks.chain.as_ref().ok_or_else(|| missing("chain"))?;
    let (x, y, z) = (problem.point(&t.x)?, problem.point(&t.y)?, problem.point(&t.z)?);
    let v = chain_rule_check(
        problem.mapping(&t.s1)?,
        problem.mapping(&t.s2)?,
        &problem.omega,
        x,
        y,
        z,
        t.variant,
        &probe_options(r),
    )?;
    let echo = json!({
        "s1": t.s1, "s2": t.s2, "variant": t.variant,
        "x": vector_value(x), "y": vector_value(y), "z": vector_value(z),
    });
    let mut report = new_report(Command::VerifyChain, problem, echo);
    rule_report(&mut report, &v);
    Ok(report)
}

fn verify_sum(problem: &Problem, r: &Resolved) -> Result<AnalysisReport> {
    let t = problem.spec.tasks.sum.as_ref().ok_or_else(|| missing("sum"))?;
    let (x, y) = (problem.point(&t.x)?, problem.point(&t.y)?);
    let (y1, y2) = (problem.point(&t.y1)?, problem.point(&t.y2)?);
    let v = sum_rule_check(
        problem.mapping(&t.s1)?,
        problem.mapping(&t.s2)?,
        &problem.omega,
        x,
        y,
        (y1, y2),
        t.variant,
        &probe_options(r),
    )?;
    let echo = json!({
        "s1": t.s1, "s2": t.s2, "variant": t.variant,
        "x": vector_value(x), "y": vector_value(y), "y1": vector_value(y1), "y2": vector_value(y2),
    });
    let mut report = new_report(Command::VerifySum, problem, echo);
    rule_report(&mut report, &v);
    Ok(report)
}

fn witness_entry(kind: &str, w: &WitnessRecord) -> WitnessEntry {
    WitnessEntry {
        kind: kind.to_string(),
        satisfied: w.satisfied,
        points: w.points.iter().map(vector_strings).collect(),
        covectors: w.covectors.iter().map(vector_strings).collect(),
        lambda: w.lambda.as_ref().map(format_rat),
        residuals: w
            .residuals
            .iter()
            .map(|r| ResidualEntry {
                condition: r.condition.clone(),
                value: format_rat(&r.value),
                bound: format_rat(&r.bound),
            })
            .collect(),
    }
}

fn extremal(problem: &Problem, r: &Resolved) -> Result<AnalysisReport> {
    let t = problem.spec.tasks.extremal.as_ref().ok_or_else(|| missing("extremal"))?;
    let (l1, l2) = (problem.set(&t.l1)?, problem.set(&t.l2)?);
    let point = problem.point(&t.point)?;
    let shifts: Vec<QVector> = t.shifts.iter().map(|s| QVector::new(s.iter().map(|q| q.0.clone()).collect())).collect();
    let box_radius = t.box_radius.as_ref().map(|q| q.0.clone());
    let eps = r.eps.clone().unwrap_or_else(|| ratio(1, 10));
    let det = extremal_detect(l1, l2, &problem.omega, point, &shifts, box_radius.as_ref())?;
    let echo = json!({
        "l1": t.l1, "l2": t.l2, "point": vector_value(point),
        "shifts": shifts.iter().map(vector_value).collect::<Vec<_>>(),
        "box_radius": opt_rat(&box_radius), "eps": rat_value(&eps),
    });
    let mut report = new_report(Command::Extremal, problem, echo);
    report.verdict("extremal", det.extremal);
    report.verdict("empty", det.empty.clone());
    report.hypotheses_met = det.extremal;
    if det.extremal {
        let last = shifts.last().expect("detection needs shifts");
        let w = extremal_witness(l1, l2, &problem.omega, point, last, &eps, box_radius.as_ref())?;
        report.verdict("witness_satisfied", w.satisfied);
        report.witnesses.push(witness_entry("extremal", &w));
        report.note("witness built from the closest pair of the last shifted system");
    } else {
        report.note("not extremal on the supplied shifts; no witness computed");
    }
    Ok(report)
}

fn fuzzy(problem: &Problem, r: &Resolved) -> Result<AnalysisReport> {
    let t = problem.spec.tasks.fuzzy.as_ref().ok_or_else(|| missing("fuzzy"))?;
    let (t1, t2) = (problem.set(&t.t1)?, problem.set(&t.t2)?);
    let (point, covector) = (problem.point(&t.point)?, problem.point(&t.covector)?);
    let eps = r.eps.clone().unwrap_or_else(|| ratio(1, 2));
    let budget = r.budget.unwrap_or(1000);
    let w = fuzzy_intersection_witness(t1, t2, &problem.omega, point, covector, &eps, &r.nu, budget)?;
    let echo = json!({
        "t1": t.t1, "t2": t.t2, "point": vector_value(point), "covector": vector_value(covector),
        "eps": rat_value(&eps), "nu": rat_value(&r.nu), "budget": budget,
    });
    let mut report = new_report(Command::Fuzzy, problem, echo);
    report.verdict("witness_satisfied", w.satisfied);
    report.witnesses.push(witness_entry("fuzzy", &w));
    if !w.satisfied {
        report.note("budget exhausted before every condition was met; best record shown (undecided)");
    }
    Ok(report)
}

/// Exit status for a command outcome: 0 computed, 1 hypotheses unmet, 2 error.
pub fn exit_code(outcome: &Result<AnalysisReport>) -> i32 {
    match outcome {
        Ok(r) if r.hypotheses_met => 0,
        Ok(_) | Err(Error::HypothesesUnmet(_)) => 1,
        Err(_) => 2,
    }
}
