//! The curvature-dependent Hessian cases on the unit sphere, where the
//! scalar and self-dual terms do not vanish.

use twistorlab::cli::{run_suite, Suite, SuiteRun};

#[test]
fn closed_form_matches_on_the_unit_sphere() {
    let mut run = SuiteRun::new(Suite::HessianAsd, "s4:1".parse().unwrap());
    run.samples = 10;
    let o = run_suite(&run).unwrap();
    assert!(o.report.pass, "{:?} {:?}", o.report, o.diagnostics);
    assert_eq!(o.report.calibrated_sign, Some(-1.0));
}
