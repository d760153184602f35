//! Vector fields on the twistor chart and their finite-difference brackets.

use nalgebra::Vector6;

use super::{CVec4, ChartVec, SphereChart, TwistorPoint, TwistorSpace, TwistorTangent, TypeKind};
use crate::algebra::CMat4;
use crate::error::{Error, Result};
use crate::C64;

/// A smooth complexified vector field near a point of the twistor chart.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Field {
    /// The basic lift `𝓗θ_i` of a frame vector field.
    Basic(usize),
    /// `Σ h_k 𝓗θ_k` with constant frame components.
    Lift(CVec4),
    /// `Â = [u, A(x)]` for the section `A(x) = a0 + Σ x_k slope_k`, written in
    /// the frame.
    Hat {
        a0: CMat4,
        slope: [CMat4; 4],
    },
    /// The chart coordinate field `∂/∂y_k`, `y = (x, ξ₁, ξ₂)`.
    Coord(usize),
    /// A field with constant chart components.
    Chart(ChartVec),
    /// Pointwise type projection.
    Typed(TypeKind, Box<Field>),
    /// Pointwise `𝕁`.
    J(Box<Field>),
    Sum(Vec<Field>),
    Scaled(C64, Box<Field>),
}

impl Field {
    /// `Â` for a constant section.
    pub fn hat(a: CMat4) -> Self {
        Field::Hat {
            a0: a,
            slope: [CMat4::zeros(); 4],
        }
    }

    pub fn typed(self, kind: TypeKind) -> Self {
        Field::Typed(kind, Box::new(self))
    }

    pub fn j(self) -> Self {
        Field::J(Box::new(self))
    }

    /// The extension of a tangent at `p` by a basic lift plus a constant
    /// section: `h` kept as frame components, the vertical part `V` as
    /// `Â` with `A = -uV/2`.
    pub fn canonical_extension(p: &TwistorPoint, t: &TwistorTangent) -> Self {
        let vert = p.vertical_part(t);
        let a = p.u_matrix() * vert * C64::new(-0.5, 0.0);
        Field::Sum(vec![Field::Lift(t.h), Field::hat(a)])
    }

    // `space` is unused by the current variants; kept so fields can depend on the metric.
    #[allow(clippy::only_used_in_recursion)]
    pub fn eval(&self, space: &TwistorSpace, p: &TwistorPoint) -> TwistorTangent {
        match self {
            Field::Basic(i) => {
                let e = CVec4::from_fn(|k, _| {
                    if k == *i {
                        C64::new(1.0, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                });
                p.horizontal_lift_frame(&e)
            }
            Field::Lift(h) => p.horizontal_lift_frame(h),
            Field::Hat { a0, slope } => {
                let a = (0..4).fold(*a0, |acc, k| acc + slope[k] * C64::new(p.x[k], 0.0));
                p.vertical(p.hat(&a))
            }
            Field::Coord(k) => {
                let w = ChartVec::from_fn(|r, _| {
                    if r == *k {
                        C64::new(1.0, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                });
                p.from_chart(&w)
            }
            Field::Chart(w) => p.from_chart(w),
            Field::Typed(kind, inner) => p.type_project(&inner.eval(space, p), *kind),
            Field::J(inner) => p.j_apply(&inner.eval(space, p)),
            Field::Sum(parts) => parts
                .iter()
                .fold(TwistorTangent::zero(), |acc, f| acc + f.eval(space, p)),
            Field::Scaled(c, inner) => inner.eval(space, p) * *c,
        }
    }
}

/// Directional derivative at `y0` of a chart-valued quantity along a complex
/// chart vector, by central differences with step `h` (scaled to the
/// direction's size).
pub(crate) fn directional<T, F>(
    chart: SphereChart,
    y0: &Vector6<f64>,
    w: &ChartVec,
    h: f64,
    f: F,
) -> T
where
    T: std::ops::Add<Output = T>
        + std::ops::Sub<Output = T>
        + std::ops::Mul<C64, Output = T>
        + Zero,
    F: Fn(SphereChart, &Vector6<f64>) -> T,
{
    let mut out = T::zero();
    for (part, unit) in [
        (w.map(|z| z.re), C64::new(1.0, 0.0)),
        (w.map(|z| z.im), C64::new(0.0, 1.0)),
    ] {
        let size = part.amax();
        if size == 0.0 {
            continue;
        }
        let t = h / size;
        let fp = f(chart, &(y0 + part * t));
        let fm = f(chart, &(y0 - part * t));
        out = out + (fp - fm) * (unit * (0.5 / t));
    }
    out
}

pub(crate) trait Zero {
    fn zero() -> Self;
}

impl Zero for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
}

impl Zero for ChartVec {
    fn zero() -> Self {
        ChartVec::zeros()
    }
}

impl Zero for Vector6<f64> {
    fn zero() -> Self {
        Vector6::zeros()
    }
}

/// `[F1, F2](p) = DF2·F1 - DF1·F2` in chart components, by central
/// differences with step `space.fd.h_bracket`.
pub fn lie_bracket_fd(
    space: &TwistorSpace,
    f1: &Field,
    f2: &Field,
    p: &TwistorPoint,
) -> Result<TwistorTangent> {
    let h = space.fd.h_bracket;
    if !(h.is_finite() && h > 1e-10) {
        return Err(Error::Numeric(format!("bracket step {h:e} is too small")));
    }
    let y0 = p.chart_coords();
    let w1 = p.to_chart(&f1.eval(space, p));
    let w2 = p.to_chart(&f2.eval(space, p));
    let chart_of = |f: &Field, chart: SphereChart, y: &Vector6<f64>| {
        let q = space.point_at(chart, y);
        q.to_chart(&f.eval(space, &q))
    };
    let d2 = directional(p.chart, &y0, &w1, h, |c, y| chart_of(f2, c, y));
    let d1 = directional(p.chart, &y0, &w2, h, |c, y| chart_of(f1, c, y));
    let out = p.from_chart(&(d2 - d1));
    if out.norm_max().is_finite() {
        Ok(out)
    } else {
        Err(Error::Numeric("non-finite Lie bracket".into()))
    }
}

/// Nijenhuis tensor `[𝕁v,𝕁w] - 𝕁[𝕁v,w] - 𝕁[v,𝕁w] - [v,w]`, with `v, w`
/// extended by [`Field::canonical_extension`].
pub fn nijenhuis(
    space: &TwistorSpace,
    p: &TwistorPoint,
    v: &TwistorTangent,
    w: &TwistorTangent,
) -> Result<TwistorTangent> {
    let fv = Field::canonical_extension(p, v);
    let fw = Field::canonical_extension(p, w);
    let jv = fv.clone().j();
    let jw = fw.clone().j();
    let a = lie_bracket_fd(space, &jv, &jw, p)?;
    let b = lie_bracket_fd(space, &jv, &fw, p)?;
    let c = lie_bracket_fd(space, &fv, &jw, p)?;
    let d = lie_bracket_fd(space, &fv, &fw, p)?;
    Ok(a - p.j_apply(&b) - p.j_apply(&c) - d)
}
