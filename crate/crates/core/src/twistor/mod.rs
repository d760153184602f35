//! The twistor space `T = U × S²` of a chart metric.
//!
//! A point is `(x, u)` with `u` a compatible complex structure written in the
//! Gram–Schmidt frame at `x`. Tangent vectors are stored in the frame
//! trivialisation: `h` holds the frame components of `π_*`, `v` the velocity
//! of the matrix `u`. The horizontal lift of `X` is `(X, [u, η(X)])`, so the
//! vertical part in the `H ⊕ V` splitting is `v - [u, η(h)]`.
//!
//! Sphere charts are stereographic: the north coordinate `ζ` gives
//! `u = ((1-|ζ|²)I - 2 Im ζ J + 2 Re ζ K)/(1+|ζ|²)` and the south coordinate is
//! `w = 1/ζ`. Both are holomorphic for the fibre structure `V ↦ uV`.

mod closed;
mod fields;
mod forms;

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Vector3, Vector4, Vector6};

use crate::algebra::{g0_inner, quat_i, quat_j, quat_k, to_complex, CMat4, CompatStructure, Mat4};
use crate::error::{Error, Result};
use crate::riemann::{connection_unchecked, curvature, CurvatureDecomp, MetricField, Point4};
use crate::C64;

pub use closed::{
    domega_closed, dprime_omega_closed, hessian_closed_asd, hessian_closed_hk, DPrimeCase,
    HessianSlot, SlotDirection,
};
pub use fields::{lie_bracket_fd, nijenhuis, Field};
pub use forms::{
    calibrate_sign, domega_tensor, exterior_derivative_fd, hessian_fd, DOmega, DOmegaTensor,
    DPrimeOmega, ExteriorDerivative, Form, MetricForm, ScalarForm, TypeComponent,
};

pub type CVec4 = Vector4<C64>;
/// Chart components `(ẋ₁, …, ẋ₄, ξ̇₁, ξ̇₂)` of a complexified tangent vector.
pub type ChartVec = Vector6<C64>;

/// Which stereographic chart of the fibre sphere a point uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphereChart {
    North,
    South,
}

/// `(a, b, c)` of `u = aI + bJ + cK` at chart coordinate `ξ`.
pub fn stereo_coefficients(chart: SphereChart, xi: C64) -> Vector3<f64> {
    let rho = xi.norm_sqr();
    let d = 1.0 + rho;
    match chart {
        SphereChart::North => Vector3::new((1.0 - rho) / d, -2.0 * xi.im / d, 2.0 * xi.re / d),
        SphereChart::South => Vector3::new((rho - 1.0) / d, 2.0 * xi.im / d, 2.0 * xi.re / d),
    }
}

/// `∂(a, b, c)/∂ξ₁` and `∂(a, b, c)/∂ξ₂`.
fn stereo_derivatives(chart: SphereChart, xi: C64) -> [Vector3<f64>; 2] {
    let (x1, x2) = (xi.re, xi.im);
    let d = 1.0 + x1 * x1 + x2 * x2;
    let d2 = d * d;
    let sa = match chart {
        SphereChart::North => -1.0,
        SphereChart::South => 1.0,
    };
    let sb = -sa;
    // north: b = -2ξ₂/D, south: b = 2ξ₂/D; c = 2ξ₁/D in both
    let db1 = sb * 4.0 * x1 * x2 / d2;
    let db2 = -sb * (2.0 * d - 4.0 * x2 * x2) / d2;
    [
        Vector3::new(sa * 4.0 * x1 / d2, db1, (2.0 * d - 4.0 * x1 * x1) / d2),
        Vector3::new(sa * 4.0 * x2 / d2, db2, -4.0 * x1 * x2 / d2),
    ]
}

fn quaternion_combination(abc: &Vector3<f64>) -> Mat4 {
    quat_i() * abc[0] + quat_j() * abc[1] + quat_k() * abc[2]
}

/// Type of a complexified vector: `(1,0)` is `h`, `(0,1)` is `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TypeKind {
    H,
    A,
}

/// A complexified tangent vector in the frame trivialisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwistorTangent {
    pub h: CVec4,
    pub v: CMat4,
}

impl TwistorTangent {
    pub fn zero() -> Self {
        TwistorTangent {
            h: CVec4::zeros(),
            v: CMat4::zeros(),
        }
    }

    /// Largest absolute component.
    pub fn norm_max(&self) -> f64 {
        let a = self.h.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        self.v.iter().fold(a, |m, z| m.max(z.norm()))
    }
}

impl Add for TwistorTangent {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        TwistorTangent {
            h: self.h + o.h,
            v: self.v + o.v,
        }
    }
}

impl Sub for TwistorTangent {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        TwistorTangent {
            h: self.h - o.h,
            v: self.v - o.v,
        }
    }
}

impl Neg for TwistorTangent {
    type Output = Self;
    fn neg(self) -> Self {
        TwistorTangent {
            h: -self.h,
            v: -self.v,
        }
    }
}

impl Mul<C64> for TwistorTangent {
    type Output = Self;
    fn mul(self, c: C64) -> Self {
        TwistorTangent {
            h: self.h * c,
            v: self.v * c,
        }
    }
}

impl Mul<f64> for TwistorTangent {
    type Output = Self;
    fn mul(self, c: f64) -> Self {
        self * C64::new(c, 0.0)
    }
}

/// Finite-difference steps used on the twistor chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    /// First derivatives of forms (`dω`).
    pub h_form: f64,
    /// The outer derivative of nested schemes (`d(d'ω)`).
    pub h_nested: f64,
    /// Lie brackets of vector fields.
    pub h_bracket: f64,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig {
            h_form: 1e-3,
            h_nested: 5e-3,
            h_bracket: 1e-3,
        }
    }
}

/// The twistor space of a chart metric together with its FD settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistorSpace {
    pub metric: MetricField,
    pub fd: FdConfig,
}

impl TwistorSpace {
    pub fn new(metric: MetricField) -> Self {
        TwistorSpace {
            metric,
            fd: FdConfig::default(),
        }
    }

    pub fn with_fd(mut self, fd: FdConfig) -> Self {
        self.fd = fd;
        self
    }

    /// Distance to the chart boundary required by the nested stencils.
    fn margin(&self) -> f64 {
        let f = &self.fd;
        2.0 * (f.h_nested + f.h_form + f.h_bracket)
            + 4.0 * self.metric.h_g
            + 2.0 * self.metric.h_second
    }

    /// The point over `x` with fibre coordinate `ζ`, in the chart where the
    /// fibre coordinate has modulus at most one.
    pub fn point(&self, x: &Point4, zeta: C64) -> Result<TwistorPoint> {
        if !(zeta.re.is_finite() && zeta.im.is_finite()) {
            return Err(Error::Domain("fibre coordinate must be finite".into()));
        }
        if zeta.norm() <= 1.0 {
            self.point_in_chart(x, zeta, SphereChart::North)
        } else {
            self.point_in_chart(x, zeta.inv(), SphereChart::South)
        }
    }

    pub fn point_in_chart(&self, x: &Point4, xi: C64, chart: SphereChart) -> Result<TwistorPoint> {
        self.metric.check_interior(x, self.margin())?;
        if xi.norm() > 1.0 + 1e-12 {
            return Err(Error::Domain(format!(
                "fibre coordinate {xi} lies outside the unit disc of its chart"
            )));
        }
        Ok(self.point_unchecked(x, xi, chart))
    }

    pub(crate) fn point_unchecked(&self, x: &Point4, xi: C64, chart: SphereChart) -> TwistorPoint {
        let conn = connection_unchecked(&self.metric, x);
        let abc = stereo_coefficients(chart, xi);
        let u = CompatStructure::from_unit(abc);
        let du = stereo_derivatives(chart, xi).map(|d| quaternion_combination(&d));
        let eta = std::array::from_fn(|k| conn.eta_frame(k));
        TwistorPoint {
            x: *x,
            xi,
            chart,
            u,
            theta: conn.frame.theta,
            eta,
            du,
        }
    }

    /// The point at real chart coordinates `y = (x, ξ₁, ξ₂)` in `chart`.
    pub(crate) fn point_at(&self, chart: SphereChart, y: &Vector6<f64>) -> TwistorPoint {
        let x = Point4::new(y[0], y[1], y[2], y[3]);
        self.point_unchecked(&x, C64::new(y[4], y[5]), chart)
    }

    /// Curvature data at the base point of `p`.
    pub fn curvature_at(&self, p: &TwistorPoint) -> Result<CurvatureDecomp> {
        curvature(&self.metric, &p.x)
    }
}

/// A point of the twistor space with the data needed to act on tangents.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistorPoint {
    pub x: Point4,
    /// Fibre coordinate in the active chart.
    pub xi: C64,
    pub chart: SphereChart,
    pub u: CompatStructure,
    /// Frame at `x`, columns in coordinates.
    pub theta: Mat4,
    /// `η(θ_k)`.
    eta: [Mat4; 4],
    /// `∂u/∂ξ₁`, `∂u/∂ξ₂`.
    du: [Mat4; 2],
}

impl TwistorPoint {
    /// Fibre coordinate `ζ` of the north chart (infinite only at the south pole).
    pub fn zeta(&self) -> C64 {
        match self.chart {
            SphereChart::North => self.xi,
            SphereChart::South => self.xi.inv(),
        }
    }

    pub fn u_matrix(&self) -> CMat4 {
        to_complex(self.u.matrix())
    }

    /// Real chart coordinates `(x, ξ₁, ξ₂)`.
    pub fn chart_coords(&self) -> Vector6<f64> {
        Vector6::new(
            self.x[0], self.x[1], self.x[2], self.x[3], self.xi.re, self.xi.im,
        )
    }

    /// `η` on complex frame components.
    pub fn eta(&self, h: &CVec4) -> CMat4 {
        (0..4).fold(CMat4::zeros(), |acc, k| {
            acc + to_complex(&self.eta[k]) * h[k]
        })
    }

    /// The vertical vector `Â = [u, A]`.
    pub fn hat(&self, a: &CMat4) -> CMat4 {
        let u = self.u_matrix();
        u * a - a * u
    }

    /// `𝓗(X)` for `X` given by complex frame components.
    pub fn horizontal_lift_frame(&self, h: &CVec4) -> TwistorTangent {
        TwistorTangent {
            h: *h,
            v: self.hat(&self.eta(h)),
        }
    }

    /// `𝓗(X)` for a real coordinate vector `X`.
    pub fn horizontal_lift(&self, x: &Vector4<f64>, g: &MetricField) -> TwistorTangent {
        let comps = self.theta.transpose() * (g.eval(&self.x) * x);
        self.horizontal_lift_frame(&comps.map(|c| C64::new(c, 0.0)))
    }

    /// A vertical tangent with the given matrix.
    pub fn vertical(&self, v: CMat4) -> TwistorTangent {
        TwistorTangent {
            h: CVec4::zeros(),
            v,
        }
    }

    /// Vertical part `v - [u, η(h)]` of the `H ⊕ V` splitting.
    pub fn vertical_part(&self, t: &TwistorTangent) -> CMat4 {
        t.v - self.hat(&self.eta(&t.h))
    }

    /// Projection onto `H`, as a tangent.
    pub fn horizontal_projection(&self, t: &TwistorTangent) -> TwistorTangent {
        self.horizontal_lift_frame(&t.h)
    }

    /// Projection onto `V`, as a tangent.
    pub fn vertical_projection(&self, t: &TwistorTangent) -> TwistorTangent {
        self.vertical(self.vertical_part(t))
    }

    /// Frame matrix `V_{ij}` of a vertical tangent, with `V θ_j = Σ_i V_{ij} θ_i`.
    pub fn vertical_components(&self, t: &TwistorTangent) -> Result<CMat4> {
        let v = self.vertical_part(t);
        let u = self.u_matrix();
        let defect = (u * v + v * u).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let scale = v.iter().fold(1.0f64, |m, z| m.max(z.norm()));
        if defect > 1e-8 * scale {
            return Err(Error::Domain(format!(
                "vertical part does not anticommute with u (defect {defect:e})"
            )));
        }
        Ok(v)
    }

    /// `𝕁`: `h ↦ u h` on the horizontal part, `V ↦ uV` on the vertical part.
    pub fn j_apply(&self, t: &TwistorTangent) -> TwistorTangent {
        let u = self.u_matrix();
        let h = u * t.h;
        let vert = u * self.vertical_part(t);
        TwistorTangent {
            h,
            v: vert + self.hat(&self.eta(&h)),
        }
    }

    /// `𝔾`, complex-bilinear: `g` on `H` plus `g₀` on `V`.
    pub fn g_inner(&self, a: &TwistorTangent, b: &TwistorTangent) -> C64 {
        a.h.dot(&b.h) + g0_inner(&self.vertical_part(a), &self.vertical_part(b))
    }

    /// `ω(a, b) = 𝔾(𝕁a, b)`.
    pub fn omega(&self, a: &TwistorTangent, b: &TwistorTangent) -> C64 {
        self.g_inner(&self.j_apply(a), b)
    }

    /// `(1,0)` part `½(v - i𝕁v)` or `(0,1)` part `½(v + i𝕁v)`.
    pub fn type_project(&self, t: &TwistorTangent, kind: TypeKind) -> TwistorTangent {
        let jt = self.j_apply(t) * C64::new(0.0, 1.0);
        match kind {
            TypeKind::H => (*t - jt) * 0.5,
            TypeKind::A => (*t + jt) * 0.5,
        }
    }

    /// Type projection of a vertical matrix: `½(V ∓ i uV)`.
    pub fn type_project_vertical(&self, v: &CMat4, kind: TypeKind) -> CMat4 {
        let uv = self.u_matrix() * v * C64::new(0.0, 1.0);
        match kind {
            TypeKind::H => (v - uv) * C64::new(0.5, 0.0),
            TypeKind::A => (v + uv) * C64::new(0.5, 0.0),
        }
    }

    /// Type projection of a horizontal vector given by frame components.
    pub fn type_project_frame(&self, h: &CVec4, kind: TypeKind) -> CVec4 {
        let uh = self.u_matrix() * h * C64::new(0.0, 1.0);
        match kind {
            TypeKind::H => (h - uh) * C64::new(0.5, 0.0),
            TypeKind::A => (h + uh) * C64::new(0.5, 0.0),
        }
    }

    /// Chart components of a tangent.
    pub fn to_chart(&self, t: &TwistorTangent) -> ChartVec {
        let xdot = to_complex(&self.theta) * t.h;
        let d = [to_complex(&self.du[0]), to_complex(&self.du[1])];
        let gram = nalgebra::Matrix2::from_fn(|k, l| g0_inner(&self.du[k], &self.du[l]));
        let inv = gram
            .try_inverse()
            .expect("stereographic charts are immersions");
        let rhs = [g0_inner(&d[0], &t.v), g0_inner(&d[1], &t.v)];
        let mut out = ChartVec::zeros();
        for k in 0..4 {
            out[k] = xdot[k];
        }
        for k in 0..2 {
            out[4 + k] = rhs[0] * inv[(k, 0)] + rhs[1] * inv[(k, 1)];
        }
        out
    }

    /// The tangent with the given chart components.
    pub fn from_chart(&self, w: &ChartVec) -> TwistorTangent {
        let xdot = CVec4::new(w[0], w[1], w[2], w[3]);
        let inv = self
            .theta
            .try_inverse()
            .expect("orthonormal frames are invertible");
        let h = to_complex(&inv) * xdot;
        let v = to_complex(&self.du[0]) * w[4] + to_complex(&self.du[1]) * w[5];
        TwistorTangent { h, v }
    }
}
