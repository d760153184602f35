//! Acceptance run: every criterion at its stated tolerance and time budget,
//! one PASS/FAIL line each. Criteria run one after another so the timings
//! are not inflated by each other.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use twistorlab::cli::{run_suite, Suite, SuiteOutcome, SuiteRun, VerificationReport};
use twistorlab::riemann::{curvature, MetricField, Point4};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn metric(s: &str) -> MetricField {
    s.parse().expect("registered metric")
}

const SQRT2: &str = "s4:1.4142135623730951";

fn run(suite: Suite, m: &str) -> Result<SuiteOutcome, String> {
    run_suite(&SuiteRun::new(suite, metric(m))).map_err(|e| e.to_string())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn passed(o: &SuiteOutcome) -> Result<(), String> {
    let failed: Vec<String> = o
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.to_string())
        .collect();
    ensure(o.report.pass, || {
        format!(
            "{}[{}] failed: max_abs={:.3e} max_rel={:.3e} {:?} {:?}",
            o.report.suite,
            o.report.metric,
            o.report.max_abs_err,
            o.report.max_rel_err,
            failed,
            o.diagnostics
        )
    })
}

fn within(t: Duration, budget_s: u64) -> Result<(), String> {
    ensure(t <= Duration::from_secs(budget_s), || {
        format!("took {t:.1?}, budget {budget_s} s")
    })
}

fn algebra() -> Verdict {
    let t = Instant::now();
    let o = run(Suite::Algebra, "flat")?;
    let t = t.elapsed();
    passed(&o)?;
    ensure(o.report.n_samples == 1000, || "expected 1000 pairs".into())?;
    ensure(o.report.max_abs_err <= 1e-12, || {
        format!("‖[u,v]‖ = {:e}", o.report.max_abs_err)
    })?;
    within(t, 1)?;
    Ok(format!(
        "max ‖[u,v]‖∞ = {:.1e} over 1000 pairs in {t:.1?}",
        o.report.max_abs_err
    ))
}

fn brackets() -> Verdict {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for m in ["flat", SQRT2, "conformal_bump:0.1"] {
        let o = run(Suite::Brackets, m)?;
        passed(&o)?;
        ensure(o.report.n_samples == 20, || "expected 20 samples".into())?;
        worst = worst.max(o.report.max_abs_err);
    }
    let t = t.elapsed();
    within(t, 30)?;
    Ok(format!(
        "max residual {worst:.1e} on flat, s4:√2, bump in {t:.1?}"
    ))
}

fn domega() -> Verdict {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for m in ["flat", SQRT2, "s4:1", "conformal_bump:0.1"] {
        let o = run(Suite::Domega, m)?;
        passed(&o)?;
        worst = worst.max(o.report.max_abs_err);
        if m == "flat" {
            let c = o
                .check("flat closed form = -U_ij")
                .ok_or("missing flat check")?;
            ensure(c.pass, || c.to_string())?;
        }
    }
    let t = t.elapsed();
    within(t, 30)?;
    Ok(format!(
        "max residual {worst:.1e}; flat value is -U_ij; {t:.1?}"
    ))
}

fn kaehler() -> Verdict {
    let x = Point4::new(0.1, -0.2, 0.15, 0.05);
    let c = curvature(&metric(SQRT2), &x).map_err(|e| e.to_string())?;
    let plus_gap = (c.plus_block() - nalgebra::Matrix3::identity() * 0.5).amax();
    ensure((c.s - 6.0).abs() <= 1e-5 && plus_gap <= 1e-5, || {
        format!("s = {}, |R|Λ+ - ½Id| = {plus_gap:e}", c.s)
    })?;
    let good = run(Suite::Kaehler, SQRT2)?;
    passed(&good)?;
    let bad = run(Suite::Kaehler, "s4:1")?;
    ensure(!bad.report.pass, || "s4:1 must not be Kähler".into())?;
    let agree = bad
        .check("closed form vs FD on (V,H,H)")
        .ok_or("missing agreement check")?;
    ensure(agree.pass, || agree.to_string())?;
    Ok(format!(
        "s4:√2 max |dω| = {:.1e} (Kähler); s4:1 max |dω| = {:.2} (not Kähler), closed/FD gap {:.1e}",
        good.report.max_abs_err, bad.report.max_abs_err, agree.value
    ))
}

fn sign_of(r: &VerificationReport) -> Result<f64, String> {
    r.calibrated_sign.ok_or_else(|| "no calibrated sign".into())
}

fn hessian_asd() -> Verdict {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    let mut sigma = 0.0;
    for m in ["flat", SQRT2] {
        let o = run(Suite::HessianAsd, m)?;
        passed(&o)?;
        ensure(o.report.n_samples >= 10, || {
            "fewer than 10 configurations".into()
        })?;
        worst = worst.max(o.report.max_abs_err);
        sigma = sign_of(&o.report)?;
    }
    let t = t.elapsed();
    within(t, 300)?;
    Ok(format!(
        "all six cases within {worst:.1e} on flat and s4:√2, σ = {sigma:+}, {t:.1?}"
    ))
}

fn hessian_hk() -> Verdict {
    let t = Instant::now();
    let o = run(Suite::HessianHk, "flat")?;
    let t = t.elapsed();
    passed(&o)?;
    within(t, 120)?;
    Ok(format!(
        "max residual {:.1e}, {t:.1?}",
        o.report.max_abs_err
    ))
}

fn nijenhuis() -> Verdict {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for m in ["flat", SQRT2] {
        let o = run(Suite::Nijenhuis, m)?;
        passed(&o)?;
        worst = worst.max(o.report.max_abs_err);
    }
    let control = run(Suite::Nijenhuis, "perturbed:0.2")?;
    let t = t.elapsed();
    ensure(!control.report.pass, || {
        "perturbed metric reported integrable".into()
    })?;
    ensure(
        control.report.max_abs_err > 10.0 * control.report.tolerance,
        || "N too small".into(),
    )?;
    for c in &control.checks {
        ensure(c.pass, || c.to_string())?;
    }
    within(t, 60)?;
    Ok(format!(
        "‖N‖ ≤ {worst:.1e} on flat, s4:√2; perturbed control ‖N‖ = {:.2e}, {t:.1?}",
        control.report.max_abs_err
    ))
}

fn cycles_vol() -> Verdict {
    let t = Instant::now();
    let o = run(Suite::CyclesVol, "flat")?;
    let t = t.elapsed();
    passed(&o)?;
    let v0 = o.report.fitted_v0.ok_or("no V0")?;
    let kappa = o.report.fitted_kappa.ok_or("no kappa")?;
    ensure(
        (v0 / (8.0 * std::f64::consts::PI) - 1.0).abs() <= 1e-4,
        || format!("V0 = {v0}"),
    )?;
    ensure(kappa > 0.0, || format!("κ = {kappa}"))?;
    ensure(o.report.max_rel_err <= 1e-4, || {
        format!("fit residual {:e}", o.report.max_rel_err)
    })?;
    let min = o.check("min vol/V₀ - 1").ok_or("missing minimum check")?;
    ensure(min.pass, || min.to_string())?;
    within(t, 120)?;
    Ok(format!(
        "V0 = {v0:.10} (8π), κ = {kappa:.10}, fit residual {:.1e}, {t:.1?}",
        o.report.max_rel_err
    ))
}

fn cycles_levi() -> Verdict {
    let t = Instant::now();
    let o = run(Suite::CyclesLevi, "flat")?;
    let t = t.elapsed();
    passed(&o)?;
    let min = o.check("min Levi form").ok_or("missing positivity check")?;
    within(t, 180)?;
    Ok(format!(
        "Levi form vs V0κΣ|·|² within {:.1e}, min over 200 = {:.3}, {t:.1?}",
        o.report.max_rel_err, min.value
    ))
}

fn strip_time(mut r: VerificationReport) -> VerificationReport {
    r.wall_time_ms = 0;
    r
}

fn determinism() -> Verdict {
    let cases: Vec<SuiteRun> = [
        (Suite::Algebra, "flat", 200),
        (Suite::Brackets, "conformal_bump:0.1", 8),
        (Suite::Dprime, SQRT2, 8),
        (Suite::Nijenhuis, "perturbed:0.2", 8),
        (Suite::HessianAsd, "s4:1", 4),
        (Suite::CyclesVol, "flat", 6),
    ]
    .into_iter()
    .map(|(s, m, n)| {
        let mut r = SuiteRun::new(s, metric(m));
        r.samples = n;
        r.seed = 7;
        r
    })
    .collect();
    for base in &cases {
        let mut reports = Vec::new();
        for threads in [Some(1), Some(1), Some(4)] {
            let mut r = base.clone();
            r.threads = threads;
            let o = run_suite(&r).map_err(|e| e.to_string())?;
            reports.push((strip_time(o.report), o.checks));
        }
        ensure(reports[0] == reports[1], || {
            format!("{} differs between repeated runs", base.suite)
        })?;
        ensure(reports[0] == reports[2], || {
            format!("{} differs between 1 and 4 workers", base.suite)
        })?;
        let bits = |r: &VerificationReport| (r.max_abs_err.to_bits(), r.max_rel_err.to_bits());
        ensure(bits(&reports[0].0) == bits(&reports[2].0), || {
            "residual bits differ".into()
        })?;
    }
    Ok(format!(
        "{} suites identical across repeats and 1 vs 4 workers",
        cases.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 algebra", algebra),
        ("2 brackets", brackets),
        ("3 domega", domega),
        ("4 kaehler", kaehler),
        ("5 hessian-asd", hessian_asd),
        ("6 hessian-hk", hessian_hk),
        ("7 nijenhuis", nijenhuis),
        ("8 cycles-vol", cycles_vol),
        ("9 cycles-levi", cycles_levi),
        ("10 determinism", determinism),
    ];
    let mut failures = 0;
    for (name, f) in criteria {
        match f() {
            Ok(msg) => println!("PASS criterion {name}: {msg}"),
            Err(msg) => {
                failures += 1;
                println!("FAIL criterion {name}: {msg}");
            }
        }
    }
    println!("acceptance: {}/10 criteria passed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
