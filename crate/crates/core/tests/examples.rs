//! Every cargo example runs to completion.

macro_rules! example {
    ($path:literal, $name:ident, $test:ident) => {
        #[path = $path]
        mod $name;

        #[test]
        fn $test() {
            $name::main().expect(concat!(stringify!($name), " failed"));
        }
    };
}

example!(
    "../examples/algebra_splitting.rs",
    algebra_splitting,
    algebra_splitting_runs
);
example!(
    "../examples/curvature_decomposition.rs",
    curvature_decomposition,
    curvature_decomposition_runs
);
example!(
    "../examples/twistor_brackets.rs",
    twistor_brackets,
    twistor_brackets_runs
);
example!(
    "../examples/kaehler_criterion.rs",
    kaehler_criterion,
    kaehler_criterion_runs
);
example!(
    "../examples/hessian_flat.rs",
    hessian_flat,
    hessian_flat_runs
);
example!(
    "../examples/nijenhuis_integrability.rs",
    nijenhuis_integrability,
    nijenhuis_integrability_runs
);
example!(
    "../examples/cycle_volume.rs",
    cycle_volume,
    cycle_volume_runs
);

// Its `main` reads the process arguments, which belong to the test harness here.
#[path = "../examples/run_suites.rs"]
#[allow(dead_code)]
mod run_suites;

#[test]
fn run_suites_runs() {
    run_suites::run(Vec::new()).unwrap();
    run_suites::run(["algebra", "--samples", "10"].map(String::from).to_vec()).unwrap();
    assert!(run_suites::run(vec!["nonsense".into()]).is_err());
}
