//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::LN_2;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use qmono_core::channels::{counterexample_map, random_cptp, MapRecipe, TraceTag};
use qmono_core::divergences::{old_renyi, relative_entropy, sandwiched_renyi};
use qmono_core::harness::counterexample::{counterexample_suite, expected_gap};
use qmono_core::harness::violation::{reverify, VIOLATION_THRESHOLD};
use qmono_core::harness::{evaluate_monotonicity, replay_monotonicity, run_suite, CheckKind};
use qmono_core::io::{float, from_json, to_canonical_json, DpiMode, MapFamily, RunConfig, SuiteName};
use qmono_core::linalg::{diagonal, PsdOperator};
use qmono_core::random::{random_density, random_unitary, trial_rng};
use qmono_core::{
    ChannelFile, ChannelRepresentation, CheckReport, DivergenceFamily, ExtendedReal, MatrixFile, MatrixKind,
    ToleranceConfig,
};
use rand::Rng;

const EXACT: f64 = 1e-10;
const MONOTONICITY_SLACK: f64 = 1e-8;
const CLASSICAL: f64 = 1e-10;
const ALPHA_TWO_SLACK: f64 = 1e-8;

struct Verdict {
    ok: bool,
    detail: String,
}

impl Verdict {
    fn new(ok: bool, detail: impl Into<String>) -> Self {
        Self { ok, detail: detail.into() }
    }

    fn from_report(r: &CheckReport, extra: &[(bool, String)]) -> Self {
        let mut ok = r.passed();
        let mut detail = format!(
            "{}: {} checks, {} failures, {} escalations",
            r.suite_name,
            r.trials,
            r.failure_count(),
            r.escalations
        );
        for (cond, text) in extra {
            ok &= cond;
            if !cond {
                detail.push_str(&format!("; {text}"));
            }
        }
        if let Some(w) = r.failures.first() {
            detail.push_str(&format!("; first failure: {} (gap {:?})", w.label, w.gap));
        }
        Self { ok, detail }
    }
}

fn err(e: qmono_core::Error) -> Verdict {
    Verdict::new(false, format!("error: {e}"))
}

fn suite(name: SuiteName) -> RunConfig {
    RunConfig::defaults(name)
}

fn c1() -> Verdict {
    let r = match counterexample_suite(&suite(SuiteName::Counterexample)) {
        Ok(r) => r,
        Err(e) => return err(e),
    };
    let v = &r.witnesses[0];
    let (lhs, rhs) = (v.lhs.to_f64(), v.rhs.to_f64());
    let phi = counterexample_map();
    let trace = phi.trace_behavior().map(|t| t.tag);
    let checks = [
        ((lhs - LN_2 / 3.0).abs() <= EXACT, format!("D(rho||sigma) = {lhs}")),
        ((rhs - LN_2 / 2.0).abs() <= EXACT, format!("D(phi rho||phi sigma) = {rhs}")),
        ((v.gap.sort_key() - expected_gap()).abs() <= EXACT, format!("gap {:?}", v.gap)),
        ((v.gap.sort_key() + 0.115525).abs() < 1e-6, "gap is not -0.115525".to_string()),
        (phi.choi_min_eigenvalue().is_ok_and(|m| m >= -1e-10), "not CP".to_string()),
        (matches!(trace, Ok(TraceTag::Nonincreasing)), format!("trace tag {trace:?}")),
    ];
    Verdict::from_report(&r, &checks)
}

fn dpi(mode: DpiMode, trials: usize) -> Verdict {
    let mut config = suite(SuiteName::Dpi).with_mode(mode);
    config.trials = trials;
    match run_suite(&config) {
        Ok(r) => {
            let extra = [
                (config.tolerance.monotonicity_slack == MONOTONICITY_SLACK, "slack changed".to_string()),
                (r.config.trials == trials, format!("{} trials", r.config.trials)),
            ];
            Verdict::from_report(&r, &extra)
        }
        Err(e) => err(e),
    }
}

fn c2() -> Verdict {
    let families = DpiMode::RelativeEntropy.default_families();
    let expected = [
        MapFamily::RandomCptp,
        MapFamily::TransposeCptp,
        MapFamily::Reduction,
        MapFamily::Pinching,
        MapFamily::Depolarizing,
    ];
    let v = dpi(DpiMode::RelativeEntropy, 1000);
    Verdict::new(v.ok && families == expected, v.detail)
}

fn c3() -> Verdict {
    let families = DpiMode::Sandwiched.default_families();
    let has_tni = families.contains(&MapFamily::Halving) && families.contains(&MapFamily::Counterexample);
    let grid = suite(SuiteName::Dpi).alpha_grid;
    let v = dpi(DpiMode::Sandwiched, 1000);
    Verdict::new(
        v.ok && has_tni && grid == [1.1, 1.25, 1.5, 2.0, 3.0, 5.0],
        v.detail,
    )
}

fn c4() -> Verdict {
    dpi(DpiMode::TraceCondition, 500)
}

fn c5() -> Verdict {
    let config = suite(SuiteName::Contraction);
    match run_suite(&config) {
        Ok(r) => {
            let ratio_checks = r.trials - 2 * config.instances;
            let extra = [
                (config.instances == 20 && config.trials == 200, "wrong instance count".to_string()),
                (config.alpha_grid == [1.5, 2.0, 3.0], "wrong alpha grid".to_string()),
                // three orders plus p = infinity per X
                (ratio_checks == 20 * 200 * 4, format!("{ratio_checks} ratio checks")),
            ];
            Verdict::from_report(&r, &extra)
        }
        Err(e) => err(e),
    }
}

fn c6() -> Verdict {
    let config = suite(SuiteName::AlphaLimit);
    match run_suite(&config) {
        Ok(r) => {
            let extra = [(
                config.trials == 50 && config.dims.iter().all(|&d| d <= 6),
                "wrong pair set".to_string(),
            )];
            Verdict::from_report(&r, &extra)
        }
        Err(e) => err(e),
    }
}

fn c7() -> Verdict {
    let config = suite(SuiteName::Step2);
    match run_suite(&config) {
        Ok(r) => {
            let extra = [(
                config.dims == [32] && config.n_sequence == [4, 8, 16, 24, 32],
                "wrong truncation schedule".to_string(),
            )];
            Verdict::from_report(&r, &extra)
        }
        Err(e) => err(e),
    }
}

// Classical formulas on probability vectors, written without the matrix code.

fn classical_relative_entropy(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return f64::INFINITY;
        }
        total += pi * (pi / qi).ln();
    }
    total
}

fn classical_renyi(p: &[f64], q: &[f64], alpha: f64) -> f64 {
    let mut total = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            if alpha > 1.0 {
                return f64::INFINITY;
            }
            continue;
        }
        total += pi.powf(alpha) * qi.powf(1.0 - alpha);
    }
    if total == 0.0 {
        return f64::INFINITY;
    }
    total.ln() / (alpha - 1.0)
}

fn probability_vector(d: usize, zeros: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
    for _ in 0..zeros {
        let k = rng.random_range(0..d);
        v[k] = 0.0;
    }
    if v.iter().all(|&x| x == 0.0) {
        v[0] = 1.0;
    }
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

fn agree(a: ExtendedReal, b: f64) -> bool {
    match a {
        ExtendedReal::Finite(x) => b.is_finite() && (x - b).abs() <= CLASSICAL,
        ExtendedReal::PositiveInfinity => b == f64::INFINITY,
    }
}

fn c8() -> Verdict {
    let cfg = ToleranceConfig::default();
    let alphas = [0.3, 0.5, 0.8, 1.1, 1.5, 2.0, 3.0, 5.0];
    let mut mismatches = Vec::new();
    let mut comparisons = 0;
    for i in 0..200u64 {
        let mut rng = trial_rng(8, i);
        let d = rng.random_range(2..=6);
        let p = probability_vector(d, rng.random_range(0..d), &mut rng);
        let q = probability_vector(d, rng.random_range(0..d), &mut rng);
        // Odd pairs are rotated by a common unitary: still commuting, no longer diagonal.
        let u = random_unitary(d, &mut rng);
        let build = |v: &[f64]| {
            let m = diagonal(v);
            let m = if i % 2 == 1 { &u * m * u.adjoint() } else { m };
            PsdOperator::new(m, &cfg).unwrap()
        };
        let (rho, sigma) = (build(&p), build(&q));
        let mut check = |name: String, got: qmono_core::Result<ExtendedReal>, want: f64| {
            comparisons += 1;
            match got {
                Ok(v) if agree(v, want) => {}
                other => mismatches.push(format!("pair {i} {name}: {other:?} vs {want}")),
            }
        };
        check("umegaki".into(), relative_entropy(&rho, &sigma, &cfg), classical_relative_entropy(&p, &q));
        for &a in &alphas {
            let want = classical_renyi(&p, &q, a);
            check(format!("sandwiched {a}"), sandwiched_renyi(&rho, &sigma, a, &cfg), want);
            check(format!("old {a}"), old_renyi(&rho, &sigma, a, &cfg), want);
        }
    }
    if std::env::var_os("ACCEPTANCE_VERBOSE").is_some() {
        for m in &mismatches {
            eprintln!("{m}");
        }
    }
    let mut detail = format!("{comparisons} comparisons, {} mismatches", mismatches.len());
    if let Some(m) = mismatches.first() {
        detail.push_str(&format!("; first: {m}"));
    }
    Verdict::new(mismatches.is_empty(), detail)
}

fn c9() -> Verdict {
    let config = suite(SuiteName::Violation);
    let cfg = config.tolerance;
    let first = match run_suite(&config) {
        Ok(r) => r,
        Err(e) => return err(e),
    };
    let Some(best) = first.witnesses.iter().find(|w| w.kind == CheckKind::Violation) else {
        return Verdict::new(false, format!("no witness with the default seed ({:?})", first.outcome));
    };
    let replayed = reverify(&to_canonical_json(best).unwrap(), &cfg);
    let reverified = matches!(replayed, Ok(g) if g.sort_key() < -VIOLATION_THRESHOLD);
    let at_two = first
        .witnesses
        .iter()
        .find(|w| w.kind == CheckKind::Monotonicity)
        .map(|w| replay_monotonicity(w, &cfg));
    let monotone_at_two = matches!(at_two, Some(Ok(g)) if g.satisfies(ALPHA_TWO_SLACK));
    let second = run_suite(&config).map(|r| to_canonical_json(&r.witnesses).unwrap());
    let deterministic = second.is_ok_and(|s| s == to_canonical_json(&first.witnesses).unwrap());
    let extra = [
        (config.alpha == 0.3 && config.trials == 100_000 && config.dims == [2], "wrong search setup".to_string()),
        (reverified, format!("re-verification gave {replayed:?}")),
        (monotone_at_two, format!("alpha = 2 replay gave {at_two:?}")),
        (deterministic, "second run differs".to_string()),
    ];
    let mut v = Verdict::from_report(&first, &extra);
    v.detail.push_str(&format!("; witness gap {:?}", best.gap));
    v
}

fn round_trip<T: serde::Serialize + serde::de::DeserializeOwned>(value: &T) -> bool {
    let a = to_canonical_json(value).unwrap();
    let back: T = from_json(&a).unwrap();
    to_canonical_json(&back).unwrap() == a
}

fn c10() -> Verdict {
    let cfg = ToleranceConfig::default();
    let mut broken = Vec::new();
    for i in 0..100u64 {
        let mut rng = trial_rng(10, i);
        let d = rng.random_range(2..=5);
        let op = MatrixFile::new(&random_density(d, &mut rng), MatrixKind::Density);
        let phi = random_cptp(d, d, rng.random_range(1..=d), i).unwrap();
        let kraus = ChannelFile::new(d, d, ChannelRepresentation::kraus(phi.kraus().unwrap()));
        let superop = ChannelFile::superop(&phi);
        let recipe = ChannelFile::from_recipe(MapRecipe::Reduction { dim: d }, &cfg).unwrap();
        let mut config = suite(SuiteName::Dpi);
        config.trials = 2;
        config.seed = i;
        let report = run_suite(&config).unwrap();
        let ok = round_trip(&op) && round_trip(&kraus) && round_trip(&superop) && round_trip(&recipe) && round_trip(&report);
        if !ok {
            broken.push(i);
        }
    }

    // Failing witnesses: the counterexample pair plus trace-increasing scalings.
    let mut witnesses = vec![counterexample_suite(&suite(SuiteName::Counterexample)).unwrap().witnesses[0].clone()];
    for i in 0..20u64 {
        let mut rng = trial_rng(11, i);
        let d = rng.random_range(2..=4);
        let recipe = MapRecipe::Scaling { dim: d, factor: 1.5 };
        let phi = recipe.build(&cfg).unwrap();
        let rho = PsdOperator::new(random_density(d, &mut rng), &cfg).unwrap();
        let sigma = PsdOperator::new(random_density(d, &mut rng), &cfg).unwrap();
        let w = evaluate_monotonicity(&phi, &rho, &sigma, &DivergenceFamily::Umegaki, &cfg)
            .unwrap()
            .with_map(ChannelRepresentation::family(recipe));
        witnesses.push(w);
    }
    let mut replay_mismatch = Vec::new();
    for w in &witnesses {
        let text = to_canonical_json(w).unwrap();
        let back: qmono_core::Witness = from_json(&text).unwrap();
        let gap = replay_monotonicity(&back, &cfg).unwrap();
        let failing = !gap.satisfies(cfg.monotonicity_slack);
        if !failing || float::format(gap.sort_key()) != float::format(w.gap.sort_key()) {
            replay_mismatch.push(format!("{}: {:?} vs {:?}", w.label, gap, w.gap));
        }
    }
    let mut detail = format!(
        "500 round-trips ({} differ); {} failing witnesses replayed ({} differ)",
        broken.len(),
        witnesses.len(),
        replay_mismatch.len()
    );
    if let Some(m) = replay_mismatch.first() {
        detail.push_str(&format!("; first: {m}"));
    }
    Verdict::new(broken.is_empty() && replay_mismatch.is_empty(), detail)
}

/// Name, check, runtime budget in seconds.
type Criterion = (&'static str, fn() -> Verdict, Option<u64>);

fn main() -> ExitCode {
    // Runtime budgets in seconds; criteria 8 and 10 have none.
    let criteria: [Criterion; 10] = [
        ("1 counterexample exactness", c1, Some(1)),
        ("2 relative-entropy monotonicity", c2, Some(60)),
        ("3 sandwiched monotonicity", c3, Some(120)),
        ("4 trace-condition mode", c4, Some(60)),
        ("5 norm contraction", c5, Some(60)),
        ("6 alpha -> 1 limit", c6, Some(30)),
        ("7 step-2 truncation", c7, Some(120)),
        ("8 classical oracle", c8, None),
        ("9 violation search", c9, None),
        ("10 serialization", c10, None),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let v = run();
        let elapsed = start.elapsed();
        let in_time = budget.is_none_or(|b| elapsed <= Duration::from_secs(b));
        let ok = v.ok && in_time;
        if !ok {
            failed += 1;
        }
        let budget = budget.map_or(String::new(), |b| format!(" / {b} s"));
        let late = if in_time { "" } else { " OVER BUDGET" };
        println!(
            "criterion {name:<34} {} ({:.2} s{budget}{late}) {}",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
