//! `dω` vanishes exactly when the self-dual curvature is ½·Id, which singles
//! out the sphere of radius √2 among round spheres.
//!
//! ```text
//! cargo run --example kaehler_criterion
//! ```

use twistorlab::riemann::{get_metric, Point4};
use twistorlab::twistor::{DOmegaTensor, FdConfig, TwistorSpace};
use twistorlab::C64;

pub fn main() -> twistorlab::Result<()> {
    let x = Point4::new(0.05, -0.1, 0.2, 0.1);
    for radius in [0.8, 1.0, std::f64::consts::SQRT_2, 2.0] {
        let space = TwistorSpace::new(get_metric("s4", &[radius])?);
        let p = space.point(&x, C64::new(-0.2, 0.5))?;
        let c = space.curvature_at(&p)?;
        let plus = c.plus_block() - nalgebra::Matrix3::identity() * 0.5;
        let d = DOmegaTensor::at(&space, &p, FdConfig::default().h_form);
        println!(
            "radius {radius:.4}: s = {:>8.4}, |R₊ - ½Id| = {:.2e}, max |dω| = {:.2e}",
            c.s,
            plus.amax(),
            d.max_abs()
        );
    }
    Ok(())
}
