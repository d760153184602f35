//! Volumes of holomorphic sections of the flat twistor space: the minimum is
//! attained on twistor lines and grows quadratically with the transverse part.
//!
//! ```text
//! cargo run --release --example cycle_volume
//! ```

use twistorlab::cycles::{levi_form, vol, Quadrature, Section};
use twistorlab::C64;

pub fn main() -> twistorlab::Result<()> {
    let q = Quadrature::new(64, 128)?;
    let line = Section::twistor_line(C64::new(0.3, -0.2), C64::new(0.1, 0.4));
    let v0 = vol(&line, &q).value;
    println!(
        "twistor line: vol = {v0:.10}, 8π = {:.10}",
        8.0 * std::f64::consts::PI
    );

    for t in [0.1, 0.2, 0.4] {
        let s = Section::new(
            C64::new(t, 0.0),
            C64::new(0.0, t),
            C64::new(0.0, 0.0),
            C64::new(-t, 0.0),
        );
        let v = vol(&s, &q);
        let (p, r) = s.transverse_part();
        let kappa = (v.value - v0) / (v0 * (p.norm_sqr() + r.norm_sqr()));
        println!(
            "t = {t}: vol = {:.10}, (vol - V0)/(V0 |transverse|²) = {kappa:.8}, coarse change {:.1e}",
            v.value, v.coarse_change
        );
    }

    let n = Section::new(
        C64::new(0.0, 1.0),
        C64::new(0.5, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
    );
    let levi = levi_form(&line, &n, 1e-2, &q)?;
    println!("Levi form at a twistor line in direction n: {levi:.8}");
    Ok(())
}
