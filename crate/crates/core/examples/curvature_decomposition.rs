//! Scalar curvature and the blocks W+, W-, B of the curvature operator for
//! each built-in metric.
//!
//! ```text
//! cargo run --example curvature_decomposition
//! ```

use twistorlab::riemann::{curvature, get_metric, Point4};

pub fn main() -> twistorlab::Result<()> {
    let x = Point4::new(0.12, -0.3, 0.05, 0.2);
    let metrics = [
        ("flat", vec![]),
        ("s4", vec![1.0]),
        ("s4", vec![std::f64::consts::SQRT_2]),
        ("conformal_bump", vec![0.1]),
        ("perturbed", vec![0.2]),
    ];
    println!(
        "{:<22} {:>10} {:>10} {:>10} {:>10}",
        "metric", "s", "|W+|", "|W-|", "|B|"
    );
    for (name, params) in metrics {
        let g = get_metric(name, &params)?;
        let c = curvature(&g, &x)?;
        let label = format!("{name}{params:?}");
        println!(
            "{label:<22} {:>10.5} {:>10.2e} {:>10.2e} {:>10.2e}",
            c.s,
            c.w_plus.norm(),
            c.w_minus.norm(),
            c.b.norm()
        );
    }
    Ok(())
}
