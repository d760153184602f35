//! The Nijenhuis tensor of 𝕁 vanishes on anti-self-dual metrics and not on
//! a metric with self-dual Weyl curvature.
//!
//! ```text
//! cargo run --example nijenhuis_integrability
//! ```

use twistorlab::cli::sampling::{rng, tangent, twistor_point, Stream};
use twistorlab::riemann::{curvature, get_metric, Point4};
use twistorlab::twistor::{nijenhuis, TwistorSpace};

pub fn main() -> twistorlab::Result<()> {
    for (name, params) in [
        ("flat", vec![]),
        ("s4", vec![1.0]),
        ("conformal_bump", vec![0.1]),
        ("perturbed", vec![0.2]),
    ] {
        let space = TwistorSpace::new(get_metric(name, &params)?);
        let w_plus = curvature(&space.metric, &Point4::new(0.2, 0.3, 0.0, 0.0))?
            .w_plus
            .norm();
        let mut worst: f64 = 0.0;
        for k in 0..10 {
            let mut r = rng(1, Stream::Sample, k);
            let p = twistor_point(&mut r, &space)?;
            let (v, w) = (tangent(&mut r, &p), tangent(&mut r, &p));
            worst = worst.max(nijenhuis(&space, &p, &v, &w)?.norm_max());
        }
        println!("{name}{params:?}: |W+| = {w_plus:.2e}, max |N| over 10 samples = {worst:.2e}");
    }
    Ok(())
}
