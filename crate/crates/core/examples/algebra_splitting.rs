//! Compatible complex structures on R⁴ and the self-dual splitting of Λ².
//!
//! ```text
//! cargo run --example algebra_splitting
//! ```

use twistorlab::algebra::{
    bracket, make_compatible_structure, phi, phi_inv, quat_i, quat_j, quat_k, respects_orientation,
    selfdual_split, Skew4,
};

pub fn main() -> twistorlab::Result<()> {
    let (i, j, k) = (quat_i(), quat_j(), quat_k());
    println!("IJ - K = {:.1e}", (i * j - k).amax());

    let u = make_compatible_structure(0.6, -0.48, 0.64)?;
    let sq = u.matrix() * u.matrix() + twistorlab::algebra::Mat4::identity();
    println!("u = aI + bJ + cK with (a,b,c) = {:?}", u.abc().as_slice());
    println!(
        "u² + Id = {:.1e}, orientation preserved: {}",
        sq.amax(),
        respects_orientation(u.matrix())?
    );

    let a = Skew4::from_upper([0.3, -1.1, 0.4, 0.9, 0.2, -0.5]);
    let split = selfdual_split(&phi(a.matrix()));
    let minus = phi_inv(&split.minus_part());
    let plus = phi_inv(&split.plus_part());
    println!("Λ+ coordinates {:?}", split.plus.as_slice());
    println!("Λ- coordinates {:?}", split.minus.as_slice());
    println!("[u, A-] = {:.1e}", bracket(u.matrix(), &minus).amax());
    println!(
        "[u, A+] = {:.3} (self-dual parts do not commute)",
        bracket(u.matrix(), &plus).amax()
    );
    Ok(())
}
