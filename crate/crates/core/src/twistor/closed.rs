//! Closed-form values of `dω`, `d'ω` and the hessian `i d'd''ω` on pure
//! directions and pure types.

use super::fields::{directional, Field};
use super::{CVec4, SphereChart, TwistorPoint, TwistorSpace, TypeKind};
use crate::algebra::{g0_inner, phi_inv, wedge, Bivector6, CMat4};
use crate::error::{Error, Result};
use crate::riemann::{CurvatureDecomp, MetricKind};
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

fn re(v: f64) -> C64 {
    C64::new(v, 0.0)
}

fn basis(i: usize) -> CVec4 {
    CVec4::from_fn(|k, _| re(if k == i { 1.0 } else { 0.0 }))
}

fn typed_frame(p: &TwistorPoint, i: usize, kind: TypeKind) -> CVec4 {
    p.type_project_frame(&basis(i), kind)
}

/// `Ê` for a complex bivector `E`.
fn hat_bivector(p: &TwistorPoint, b: &Bivector6<C64>) -> CMat4 {
    p.hat(&phi_inv(b))
}

/// `B̂(X∧Y)` for complex frame vectors.
fn hat_b(p: &TwistorPoint, curv: &CurvatureDecomp, x: &CVec4, y: &CVec4) -> CMat4 {
    hat_bivector(p, &curv.b_apply(&wedge(x, y)))
}

/// `dω(U, 𝓗X, 𝓗Y) = 𝔾(((½ - R)(X∧Y))^, 𝕁U)` for a vertical matrix `U`
/// and frame components `X`, `Y`.
pub fn domega_closed(
    space: &TwistorSpace,
    p: &TwistorPoint,
    u: &CMat4,
    x: &CVec4,
    y: &CVec4,
) -> Result<C64> {
    let curv = space.curvature_at(p)?;
    let b = wedge(x, y);
    let rb = curv.apply(&b);
    let c = Bivector6::new(b.components * re(0.5) - rb.components);
    Ok(g0_inner(&hat_bivector(p, &c), &(p.u_matrix() * u)))
}

/// The two displayed values of `d'ω`. `u` is the full vertical matrix `U`;
/// the type parts are taken inside.
#[derive(Debug, Clone, PartialEq)]
pub enum DPrimeCase {
    /// `d'ω(Uᵃ, 𝓗θ_iʰ, 𝓗θ_jʰ) = (s/6 - 1) Uᵃ_{ij}`.
    I { u: CMat4, i: usize, j: usize },
    /// `d'ω(Uʰ, 𝓗θ_iʰ, 𝓗θ_jᵃ) = -i 𝔾(B̂(θ_iʰ∧θ_jᵃ), Uʰ)`.
    II { u: CMat4, i: usize, j: usize },
}

pub fn dprime_omega_closed(
    space: &TwistorSpace,
    p: &TwistorPoint,
    case: &DPrimeCase,
) -> Result<C64> {
    let curv = space.curvature_at(p)?;
    match case {
        DPrimeCase::I { u, i, j } => {
            check_index(&[*i, *j])?;
            let ua = p.type_project_vertical(u, TypeKind::A);
            Ok(ua[(*i, *j)] * re(curv.s / 6.0 - 1.0))
        }
        DPrimeCase::II { u, i, j } => {
            check_index(&[*i, *j])?;
            let uh = p.type_project_vertical(u, TypeKind::H);
            let bh = hat_b(
                p,
                &curv,
                &typed_frame(p, *i, TypeKind::H),
                &typed_frame(p, *j, TypeKind::A),
            );
            Ok(-I * g0_inner(&bh, &uh))
        }
    }
}

fn check_index(idx: &[usize]) -> Result<()> {
    match idx.iter().find(|&&i| i >= 4) {
        Some(i) => Err(Error::Usage(format!("frame index {i} out of range 0..4"))),
        None => Ok(()),
    }
}

/// Direction of a hessian argument: a basic lift `𝓗θ_i`, or `Â` for a
/// constant section `A` (frame components).
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum SlotDirection {
    Horizontal(usize),
    Vertical(CMat4),
}

/// A pure-direction, pure-type argument.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianSlot {
    pub dir: SlotDirection,
    pub kind: TypeKind,
}

impl HessianSlot {
    pub fn horizontal(i: usize, kind: TypeKind) -> Self {
        HessianSlot {
            dir: SlotDirection::Horizontal(i),
            kind,
        }
    }

    pub fn vertical(a: CMat4, kind: TypeKind) -> Self {
        HessianSlot {
            dir: SlotDirection::Vertical(a),
            kind,
        }
    }

    /// The vector field used for finite differences.
    pub fn field(&self) -> Field {
        let base = match &self.dir {
            SlotDirection::Horizontal(i) => Field::Basic(*i),
            SlotDirection::Vertical(a) => Field::hat(*a),
        };
        base.typed(self.kind)
    }

    fn key(&self) -> (u8, u8) {
        let t = match self.kind {
            TypeKind::H => 0,
            TypeKind::A => 1,
        };
        let d = match self.dir {
            SlotDirection::Horizontal(_) => 0,
            SlotDirection::Vertical(_) => 1,
        };
        (t, d)
    }
}

/// Sorts slots into the order `h` before `a`, horizontal before vertical,
/// returning the sign of the permutation.
fn canonical(slots: &[HessianSlot]) -> Result<(f64, Vec<HessianSlot>)> {
    if slots.len() != 4 {
        return Err(Error::Usage(format!(
            "the hessian takes 4 arguments, got {}",
            slots.len()
        )));
    }
    for s in slots {
        if let SlotDirection::Horizontal(i) = s.dir {
            check_index(&[i])?;
        }
    }
    let mut v: Vec<HessianSlot> = slots.to_vec();
    let mut sign = 1.0;
    for a in 0..v.len() {
        for b in 0..v.len() - 1 - a {
            if v[b].key() > v[b + 1].key() {
                v.swap(b, b + 1);
                sign = -sign;
            }
        }
    }
    let n_h = v.iter().filter(|s| s.kind == TypeKind::H).count();
    if n_h != 2 {
        return Err(Error::Usage(format!(
            "the hessian is a (2,2)-form; got {n_h} arguments of type (1,0)"
        )));
    }
    Ok((sign, v))
}

fn vertical_of(p: &TwistorPoint, s: &HessianSlot) -> CMat4 {
    match &s.dir {
        SlotDirection::Vertical(a) => p.type_project_vertical(&p.hat(a), s.kind),
        SlotDirection::Horizontal(_) => unreachable!("checked by pattern"),
    }
}

fn index_of(s: &HessianSlot) -> usize {
    match s.dir {
        SlotDirection::Horizontal(i) => i,
        SlotDirection::Vertical(_) => unreachable!("checked by pattern"),
    }
}

fn pattern(v: &[HessianSlot]) -> [u8; 4] {
    std::array::from_fn(|k| v[k].key().1)
}

/// The hessian on pure directions and pure types for an anti-self-dual
/// metric of constant scalar curvature. Arguments may come in any order;
/// the value is that of the canonically ordered pattern times the sign of
/// the reordering.
pub fn hessian_closed_asd(
    space: &TwistorSpace,
    p: &TwistorPoint,
    slots: &[HessianSlot],
) -> Result<C64> {
    if !matches!(
        space.metric.kind(),
        MetricKind::Flat | MetricKind::S4 { .. }
    ) {
        return Err(Error::Config(format!(
            "the hessian formulas need an anti-self-dual metric with constant scalar curvature, got {}",
            space.metric
        )));
    }
    let (sign, v) = canonical(slots)?;
    let curv = space.curvature_at(p)?;
    let s = curv.s;
    let value = match pattern(&v) {
        // (𝓗θ_iʰ, U₁ʰ, 𝓗θ_jᵃ, U₂ᵃ)
        [0, 1, 0, 1] => {
            let (i, j) = (index_of(&v[0]), index_of(&v[2]));
            let (a1, a2) = match (&v[1].dir, &v[3].dir) {
                (SlotDirection::Vertical(a1), SlotDirection::Vertical(a2)) => (*a1, *a2),
                _ => unreachable!(),
            };
            let u1h = vertical_of(p, &v[1]);
            let u2a = vertical_of(p, &v[3]);
            // U₂ᵃ · 𝔾(B̂(θ_iʰ∧θ_jᵃ), U₁ʰ), differentiated along the fibre
            let f = |chart: SphereChart, y: &nalgebra::Vector6<f64>| {
                let q = space.point_at(chart, y);
                let bq = hat_b(
                    &q,
                    &curv,
                    &typed_frame(&q, i, TypeKind::H),
                    &typed_frame(&q, j, TypeKind::A),
                );
                g0_inner(&bq, &q.type_project_vertical(&q.hat(&a1), TypeKind::H))
            };
            let w = p.to_chart(&Field::hat(a2).typed(TypeKind::A).eval(space, p));
            let deriv = directional(p.chart, &p.chart_coords(), &w, space.fd.h_form, f);
            let mut second = C64::new(0.0, 0.0);
            for m in 0..4 {
                let bm = hat_b(
                    p,
                    &curv,
                    &typed_frame(p, m, TypeKind::A),
                    &typed_frame(p, i, TypeKind::H),
                );
                second += u2a[(m, j)] * g0_inner(&bm, &u1h);
            }
            -deriv - I * 0.5 * second + (u2a * u1h)[(i, j)] * re(0.5 * (s / 6.0 - 1.0))
        }
        // (𝓗θ_iʰ, 𝓗θ_jʰ, 𝓗θ_kᵃ, 𝓗θ_lᵃ)
        [0, 0, 0, 0] => {
            let (i, j, k, l) = (
                index_of(&v[0]),
                index_of(&v[1]),
                index_of(&v[2]),
                index_of(&v[3]),
            );
            let th = |m| typed_frame(p, m, TypeKind::H);
            let ta = |m| typed_frame(p, m, TypeKind::A);
            let b_jl = hat_b(p, &curv, &th(j), &ta(l));
            let b_ik = hat_b(p, &curv, &th(i), &ta(k));
            let b_il = hat_b(p, &curv, &th(i), &ta(l));
            let b_jk = hat_b(p, &curv, &th(j), &ta(k));
            let kl = p.type_project_vertical(&hat_bivector(p, &wedge(&ta(k), &ta(l))), TypeKind::A);
            g0_inner(&b_jl, &b_ik)
                - g0_inner(&b_il, &b_jk)
                - I * (s / 6.0 - 1.0) * (s / 12.0) * kl[(i, j)]
        }
        // the remaining seven direction patterns vanish
        _ => C64::new(0.0, 0.0),
    };
    Ok(value * sign)
}

/// The hessian of the flat hyperkähler model: zero on every pure pattern
/// except `(𝓗θ_iʰ, U₁ʰ, 𝓗θ_jᵃ, U₂ᵃ) ↦ -½(U₂ᵃU₁ʰ)_{ij}`.
pub fn hessian_closed_hk(p: &TwistorPoint, slots: &[HessianSlot]) -> Result<C64> {
    let (sign, v) = canonical(slots)?;
    Ok(match pattern(&v) {
        [0, 1, 0, 1] => {
            let (i, j) = (index_of(&v[0]), index_of(&v[2]));
            let u1h = vertical_of(p, &v[1]);
            let u2a = vertical_of(p, &v[3]);
            (u2a * u1h)[(i, j)] * re(-0.5 * sign)
        }
        _ => C64::new(0.0, 0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{selfdual_split, to_complex, Skew4};
    use crate::riemann::{get_metric, MetricField, Point4};
    use proptest::prelude::*;

    fn skew(s: [f64; 6]) -> CMat4 {
        to_complex(Skew4::from_upper(s).matrix())
    }

    #[test]
    fn flat_values() {
        let space = TwistorSpace::new(MetricField::flat());
        let p = space
            .point(&Point4::new(0.1, 0.3, -0.2, 0.0), C64::new(0.4, -0.1))
            .unwrap();
        let u = p.hat(&skew([0.3, -0.5, 0.2, 0.8, 0.1, -0.4]));
        for i in 0..4 {
            for j in 0..4 {
                let d = domega_closed(&space, &p, &u, &basis(i), &basis(j)).unwrap();
                assert!((d + u[(i, j)]).norm() < 1e-14);
                let d1 = dprime_omega_closed(&space, &p, &DPrimeCase::I { u, i, j }).unwrap();
                assert!((d1 + p.type_project_vertical(&u, TypeKind::A)[(i, j)]).norm() < 1e-14);
                let d2 = dprime_omega_closed(&space, &p, &DPrimeCase::II { u, i, j }).unwrap();
                assert_eq!(d2, C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn kaehler_sphere_has_no_domega() {
        let space = TwistorSpace::new(get_metric("s4", &[2f64.sqrt()]).unwrap());
        let p = space
            .point(&Point4::new(0.1, 0.3, -0.2, 0.0), C64::new(0.4, -0.1))
            .unwrap();
        let u = p.hat(&skew([0.3, -0.5, 0.2, 0.8, 0.1, -0.4]));
        for i in 0..4 {
            for j in 0..4 {
                assert!(
                    domega_closed(&space, &p, &u, &basis(i), &basis(j))
                        .unwrap()
                        .norm()
                        < 1e-5
                );
            }
        }
    }

    #[test]
    fn hessian_patterns() {
        let space = TwistorSpace::new(MetricField::flat());
        let p = space.point(&Point4::zeros(), C64::new(0.2, 0.3)).unwrap();
        let (a1, a2) = (
            skew([0.3, -0.5, 0.2, 0.8, 0.1, -0.4]),
            skew([-0.2, 0.4, 0.6, 0.1, -0.7, 0.3]),
        );
        let slots = [
            HessianSlot::horizontal(1, TypeKind::H),
            HessianSlot::vertical(a1, TypeKind::H),
            HessianSlot::horizontal(2, TypeKind::A),
            HessianSlot::vertical(a2, TypeKind::A),
        ];
        let v = hessian_closed_asd(&space, &p, &slots).unwrap();
        assert!((v - hessian_closed_hk(&p, &slots).unwrap()).norm() < 1e-15);
        assert!(v.norm() > 1e-3);
        // swapping two slots flips the sign
        let swapped = [
            slots[2].clone(),
            slots[1].clone(),
            slots[0].clone(),
            slots[3].clone(),
        ];
        assert!((hessian_closed_hk(&p, &swapped).unwrap() + v).norm() < 1e-15);
        // wrong arity and wrong type pattern
        assert!(matches!(
            hessian_closed_hk(&p, &slots[..3]),
            Err(Error::Usage(_))
        ));
        let all_h = [
            HessianSlot::horizontal(0, TypeKind::H),
            HessianSlot::horizontal(1, TypeKind::H),
            HessianSlot::horizontal(2, TypeKind::H),
            HessianSlot::vertical(a2, TypeKind::A),
        ];
        assert!(matches!(
            hessian_closed_asd(&space, &p, &all_h),
            Err(Error::Usage(_))
        ));
        let bump = TwistorSpace::new(get_metric("conformal_bump", &[0.1]).unwrap());
        let q = bump.point(&Point4::zeros(), C64::new(0.2, 0.3)).unwrap();
        assert!(matches!(
            hessian_closed_asd(&bump, &q, &slots),
            Err(Error::Config(_))
        ));
    }

    proptest! {
        #[test]
        fn typed_wedges_split_by_type(x in prop::array::uniform4(-0.5f64..0.5), z in prop::array::uniform2(-0.9f64..0.9),
                                      i in 0usize..4, j in 0usize..4) {
            let space = TwistorSpace::new(MetricField::flat());
            let zeta = C64::new(z[0], z[1]) * 0.7;
            let p = space.point(&Point4::from_row_slice(&x), zeta).unwrap();
            let hh = selfdual_split(&wedge(&typed_frame(&p, i, TypeKind::H), &typed_frame(&p, j, TypeKind::H)));
            prop_assert!(hh.minus.iter().all(|c| c.norm() <= 1e-12));
            let ha = selfdual_split(&wedge(&typed_frame(&p, i, TypeKind::H), &typed_frame(&p, j, TypeKind::A)));
            // Λ+ part is a multiple of φ(u)
            let phu = selfdual_split(&crate::algebra::phi(&p.u_matrix())).plus;
            let coef = ha.plus.dot(&phu) / phu.dot(&phu);
            prop_assert!((ha.plus - phu * coef).iter().all(|c| c.norm() <= 1e-12));
        }
    }
}
