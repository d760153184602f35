//! The Hessian `i·d(d'ω)` on flat space, finite differences against the
//! closed form, for every pattern with an even number of vertical slots.
//!
//! ```text
//! cargo run --release --example hessian_flat
//! ```

use twistorlab::algebra::{to_complex, Skew4};
use twistorlab::riemann::{MetricField, Point4};
use twistorlab::twistor::{
    calibrate_sign, hessian_closed_hk, hessian_fd, Field, HessianSlot, TwistorSpace, TypeKind,
};
use twistorlab::C64;

pub fn main() -> twistorlab::Result<()> {
    let space = TwistorSpace::new(MetricField::flat());
    let (sigma, mismatch) = calibrate_sign(space.fd)?;
    println!("calibrated sign σ = {sigma:+}, magnitude mismatch {mismatch:.1e}");

    let p = space.point(&Point4::new(0.2, -0.1, 0.3, 0.0), C64::new(0.1, 0.6))?;
    let mats = [
        [0.5, -0.2, 0.1, 0.7, 0.3, -0.4],
        [-0.3, 0.6, 0.2, -0.1, 0.5, 0.8],
        [0.9, 0.1, -0.6, 0.2, -0.2, 0.3],
        [0.1, 0.4, 0.5, -0.7, 0.6, -0.2],
    ]
    .map(|u| to_complex(Skew4::from_upper(u).matrix()));
    let kinds = [TypeKind::H, TypeKind::H, TypeKind::A, TypeKind::A];
    let idx = [0, 1, 2, 3];
    for pattern in 0u8..16 {
        if pattern.count_ones() % 2 == 1 {
            continue;
        }
        let slots: Vec<HessianSlot> = (0..4)
            .map(|m| {
                if pattern & (1 << m) != 0 {
                    HessianSlot::vertical(mats[m], kinds[m])
                } else {
                    HessianSlot::horizontal(idx[m], kinds[m])
                }
            })
            .collect();
        let fields: [Field; 4] = std::array::from_fn(|m| slots[m].field());
        let fd = hessian_fd(&space, &p, &fields, sigma)?;
        let closed = hessian_closed_hk(&p, &slots)?;
        println!(
            "vertical slots {pattern:04b}: fd = {fd:+.6}, closed = {closed:+.6}, gap {:.1e}",
            (fd - closed).norm()
        );
    }
    Ok(())
}
