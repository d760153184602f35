//! Lie brackets of basic horizontal lifts on the twistor space: the vertical
//! part of `[𝓗θ_i, 𝓗θ_j]` carries the curvature, which scales as 1/r² on a
//! round sphere of radius r.
//!
//! ```text
//! cargo run --example twistor_brackets
//! ```

use twistorlab::riemann::{get_metric, Point4};
use twistorlab::twistor::{lie_bracket_fd, Field, TwistorSpace};
use twistorlab::C64;

pub fn main() -> twistorlab::Result<()> {
    let x = Point4::new(0.1, 0.2, -0.1, 0.05);
    let zeta = C64::new(0.3, -0.4);
    for radius in [1.0, 2.0, 4.0] {
        let space = TwistorSpace::new(get_metric("s4", &[radius])?);
        let p = space.point(&x, zeta)?;
        let br = lie_bracket_fd(&space, &Field::Basic(0), &Field::Basic(1), &p)?;
        let vert = p.vertical_part(&br);
        let j2 = p.j_apply(&p.j_apply(&br)) + br;
        println!(
            "S⁴ radius {radius}: |vert [𝓗θ₀, 𝓗θ₁]| = {:.4e}, times r² = {:.4}, |𝕁²+1| = {:.1e}",
            vert.camax(),
            vert.camax() * radius * radius,
            j2.norm_max()
        );
    }
    Ok(())
}
