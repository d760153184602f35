//! Chart-based Riemannian geometry on an open box of `R^4`.
//!
//! Frames are orthonormal with columns holding coordinate components. The
//! connection form is `η(X)_{ij} = g(∇_X θ_j, θ_i)` and the curvature follows
//! `R(X,Y)Z = [∇_Y, ∇_X]Z + ∇_{[X,Y]}Z`, i.e. `R = -(dη + η∧η)`. With this
//! sign the round sphere of radius `r` has curvature operator `Id/r²` on `Λ²`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Matrix6, Vector4};

use crate::algebra::{phi, selfdual_basis, Bivector6, Mat4, BIVECTOR_PAIRS};
use crate::error::{Error, Result};

pub type Point4 = Vector4<f64>;

/// `Γ[k][i][j] = Γ^k_{ij}`.
pub type Christoffel = [[[f64; 4]; 4]; 4];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricKind {
    Flat,
    /// Stereographic chart of the round sphere of radius `r`:
    /// `g = 4r⁴/(r²+|x|²)² δ`.
    S4 {
        radius: f64,
    },
    /// `g = e^{2f} δ` with `f = ε exp(-|x|²)`.
    ConformalBump {
        eps: f64,
    },
    /// `g = δ + ε x₁x₂ (e₁⊗e₂ + e₂⊗e₁)`, not conformally flat.
    Perturbed {
        eps: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffMode {
    Analytic,
    FiniteDifference,
}

/// A registered chart metric with its differentiation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    kind: MetricKind,
    half_width: f64,
    mode: DiffMode,
    /// Step for first derivatives of the metric and of the frame field.
    pub h_g: f64,
    /// Step for derivatives of Christoffel symbols and of `η`.
    pub h_second: f64,
}

impl MetricField {
    pub fn new(kind: MetricKind) -> Result<Self> {
        let half_width = match kind {
            MetricKind::Flat => 2.0,
            MetricKind::S4 { radius } => {
                if !(radius.is_finite() && radius > 0.0) {
                    return Err(Error::Config(format!(
                        "s4 radius must be positive, got {radius}"
                    )));
                }
                radius
            }
            MetricKind::ConformalBump { eps } => {
                if !eps.is_finite() || eps.abs() > 1.0 {
                    return Err(Error::Config(format!(
                        "conformal_bump amplitude must lie in [-1, 1], got {eps}"
                    )));
                }
                1.5
            }
            MetricKind::Perturbed { eps } => {
                if !eps.is_finite() || eps.abs() >= 0.5 {
                    return Err(Error::Config(format!(
                        "perturbed amplitude must lie in (-0.5, 0.5), got {eps}"
                    )));
                }
                1.0
            }
        };
        Ok(MetricField {
            kind,
            half_width,
            mode: DiffMode::Analytic,
            h_g: 1e-4,
            h_second: 1e-3,
        })
    }

    pub fn flat() -> Self {
        Self::new(MetricKind::Flat).expect("flat metric is always valid")
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn mode(&self) -> DiffMode {
        self.mode
    }

    pub fn with_mode(mut self, mode: DiffMode) -> Self {
        self.mode = mode;
        self
    }

    /// Half-width of the chart box `[-w, w]^4`.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Half-width of the box used for random sample points.
    pub fn safe_half_width(&self) -> f64 {
        0.5 * self.half_width
    }

    /// Whether the metric has constant scalar curvature on its chart.
    pub fn has_constant_scalar_curvature(&self) -> bool {
        matches!(self.kind, MetricKind::Flat | MetricKind::S4 { .. })
    }

    fn conformal_factor(&self, x: &Point4) -> Option<(f64, Vector4<f64>)> {
        let r2 = x.norm_squared();
        match self.kind {
            MetricKind::Flat => Some((1.0, Vector4::zeros())),
            MetricKind::S4 { radius } => {
                let a = radius * radius;
                let d = a + r2;
                let f = 4.0 * a * a / (d * d);
                let grad = x * (-16.0 * a * a / (d * d * d));
                Some((f, grad))
            }
            MetricKind::ConformalBump { eps } => {
                let f = eps * (-r2).exp();
                let big = (2.0 * f).exp();
                // ∂_k e^{2f} = 2 ∂_k f e^{2f}, ∂_k f = -2 x_k f
                let grad = x * (-4.0 * f * big);
                Some((big, grad))
            }
            MetricKind::Perturbed { .. } => None,
        }
    }

    /// The metric matrix at `x`.
    pub fn eval(&self, x: &Point4) -> Mat4 {
        match self.conformal_factor(x) {
            Some((f, _)) => Mat4::identity() * f,
            None => {
                let MetricKind::Perturbed { eps } = self.kind else {
                    unreachable!()
                };
                let mut g = Mat4::identity();
                g[(0, 1)] = eps * x[0] * x[1];
                g[(1, 0)] = g[(0, 1)];
                g
            }
        }
    }

    /// `[∂_0 g, ∂_1 g, ∂_2 g, ∂_3 g]` at `x`.
    pub fn derivative(&self, x: &Point4) -> [Mat4; 4] {
        match self.mode {
            DiffMode::Analytic => self.derivative_analytic(x),
            DiffMode::FiniteDifference => {
                let h = self.h_g;
                std::array::from_fn(|k| {
                    let mut xp = *x;
                    let mut xm = *x;
                    xp[k] += h;
                    xm[k] -= h;
                    (self.eval(&xp) - self.eval(&xm)) / (2.0 * h)
                })
            }
        }
    }

    fn derivative_analytic(&self, x: &Point4) -> [Mat4; 4] {
        match self.conformal_factor(x) {
            Some((_, grad)) => std::array::from_fn(|k| Mat4::identity() * grad[k]),
            None => {
                let MetricKind::Perturbed { eps } = self.kind else {
                    unreachable!()
                };
                let mut d = [Mat4::zeros(); 4];
                d[0][(0, 1)] = eps * x[1];
                d[0][(1, 0)] = eps * x[1];
                d[1][(0, 1)] = eps * x[0];
                d[1][(1, 0)] = eps * x[0];
                d
            }
        }
    }

    /// Errors unless `x` keeps distance `margin` from the chart boundary.
    pub fn check_interior(&self, x: &Point4, margin: f64) -> Result<()> {
        let limit = self.half_width - margin;
        if x.iter().all(|c| c.is_finite() && c.abs() <= limit) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "point {:?} is within {margin} of the chart boundary |x_i| = {}",
                x.as_slice(),
                self.half_width
            )))
        }
    }

    /// Largest stencil reach used by [`curvature`], for domain checks.
    fn reach(&self) -> f64 {
        2.0 * (self.h_g + self.h_second)
    }
}

impl fmt::Display for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            MetricKind::Flat => write!(f, "flat"),
            MetricKind::S4 { radius } => write!(f, "s4:{radius}"),
            MetricKind::ConformalBump { eps } => write!(f, "conformal_bump:{eps}"),
            MetricKind::Perturbed { eps } => write!(f, "perturbed:{eps}"),
        }
    }
}

impl FromStr for MetricField {
    type Err = Error;

    /// Parses `flat`, `s4:<r>`, `conformal_bump:<eps>` or `perturbed:<eps>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), p.trim()),
            None => (s.trim(), ""),
        };
        let params: Vec<f64> = if params.is_empty() {
            Vec::new()
        } else {
            params
                .split(':')
                .map(|p| {
                    p.parse::<f64>().map_err(|_| {
                        Error::Config(format!("invalid metric parameter `{p}` in `{s}`"))
                    })
                })
                .collect::<Result<_>>()?
        };
        get_metric(name, &params)
    }
}

/// Looks up a registered metric by name.
pub fn get_metric(name: &str, params: &[f64]) -> Result<MetricField> {
    let one = |what: &str| -> Result<f64> {
        match params {
            [v] => Ok(*v),
            _ => Err(Error::Config(format!(
                "metric `{name}` takes exactly one parameter ({what})"
            ))),
        }
    };
    let kind = match name {
        "flat" => {
            if !params.is_empty() {
                return Err(Error::Config("metric `flat` takes no parameters".into()));
            }
            MetricKind::Flat
        }
        "s4" => MetricKind::S4 {
            radius: one("radius")?,
        },
        "conformal_bump" => MetricKind::ConformalBump {
            eps: one("amplitude")?,
        },
        "perturbed" => MetricKind::Perturbed {
            eps: one("amplitude")?,
        },
        other => return Err(Error::Config(format!("unknown metric `{other}`"))),
    };
    MetricField::new(kind)
}

/// Levi-Civita Christoffel symbols at `x`.
pub fn christoffel(g: &MetricField, x: &Point4) -> Result<Christoffel> {
    g.check_interior(x, 2.0 * g.h_g)?;
    Ok(christoffel_unchecked(g, x))
}

fn christoffel_unchecked(g: &MetricField, x: &Point4) -> Christoffel {
    let gm = g.eval(x);
    let inv = gm
        .try_inverse()
        .expect("registered metrics are positive definite on their chart");
    let dg = g.derivative(x);
    let mut gamma = [[[0.0; 4]; 4]; 4];
    for k in 0..4 {
        for i in 0..4 {
            for j in i..4 {
                let mut acc = 0.0;
                for l in 0..4 {
                    acc += inv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                gamma[k][i][j] = 0.5 * acc;
                gamma[k][j][i] = 0.5 * acc;
            }
        }
    }
    gamma
}

/// An orthonormal frame at a point: column `i` holds `θ_i` in coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePoint {
    pub x: Point4,
    pub theta: Mat4,
}

impl FramePoint {
    pub fn vector(&self, i: usize) -> Vector4<f64> {
        self.theta.column(i).into_owned()
    }

    /// Frame components of a coordinate vector.
    pub fn components_of(&self, v: &Vector4<f64>, g: &Mat4) -> Vector4<f64> {
        self.theta.transpose() * (g * v)
    }
}

/// Gram–Schmidt of `∂_1, …, ∂_4` in that order; `θ_4` is negated if needed
/// to make the frame direct.
pub fn orthonormal_frame(g: &MetricField, x: &Point4) -> Result<FramePoint> {
    g.check_interior(x, 2.0 * g.h_g)?;
    Ok(frame_unchecked(g, x))
}

fn frame_unchecked(g: &MetricField, x: &Point4) -> FramePoint {
    let gm = g.eval(x);
    let mut theta = Mat4::zeros();
    for i in 0..4 {
        let mut v = Vector4::ith(i, 1.0);
        for j in 0..i {
            let t = theta.column(j).into_owned();
            let c = t.dot(&(gm * v));
            v -= t * c;
        }
        let n = v.dot(&(gm * v)).sqrt();
        theta.set_column(i, &(v / n));
    }
    if theta.determinant() < 0.0 {
        let c = -theta.column(3).into_owned();
        theta.set_column(3, &c);
    }
    FramePoint { x: *x, theta }
}

/// Coordinate derivatives `∂_a θ` of the frame field, by central differences.
fn frame_derivative(g: &MetricField, x: &Point4) -> [Mat4; 4] {
    let h = g.h_g;
    std::array::from_fn(|a| {
        let mut xp = *x;
        let mut xm = *x;
        xp[a] += h;
        xm[a] -= h;
        (frame_unchecked(g, &xp).theta - frame_unchecked(g, &xm).theta) / (2.0 * h)
    })
}

/// The connection form of the Gram–Schmidt frame at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    pub frame: FramePoint,
    /// `η(∂_a)` for the four coordinate directions (not antisymmetrized).
    coord: [Mat4; 4],
}

impl Connection {
    /// `η(X)` for a coordinate vector `X`.
    pub fn eta(&self, x: &Vector4<f64>) -> Mat4 {
        (0..4).fold(Mat4::zeros(), |acc, a| acc + self.coord[a] * x[a])
    }

    /// `η(θ_k)`.
    pub fn eta_frame(&self, k: usize) -> Mat4 {
        self.eta(&self.frame.vector(k))
    }

    /// `η` on a vector given by (real) frame components.
    pub fn eta_frame_components(&self, h: &Vector4<f64>) -> Mat4 {
        self.eta(&(self.frame.theta * h))
    }
}

/// Computes the frame and `η` at `x` without domain checks; callers using
/// nested stencils check the outer point once.
pub(crate) fn connection_unchecked(g: &MetricField, x: &Point4) -> Connection {
    let frame = frame_unchecked(g, x);
    let dtheta = frame_derivative(g, x);
    let gamma = christoffel_unchecked(g, x);
    let gm = g.eval(x);
    let coord = std::array::from_fn(|a| {
        // (∇_{∂a} θ_j)^k = ∂_a θ_j^k + Γ^k_{a b} θ_j^b
        let mut cov = dtheta[a];
        for j in 0..4 {
            for k in 0..4 {
                let mut acc = 0.0;
                for b in 0..4 {
                    acc += gamma[k][a][b] * frame.theta[(b, j)];
                }
                cov[(k, j)] += acc;
            }
        }
        frame.theta.transpose() * gm * cov
    });
    Connection { frame, coord }
}

/// `η(X)` in the Gram–Schmidt frame, as an antisymmetric matrix.
pub fn connection_form(
    g: &MetricField,
    x: &Point4,
    v: &Vector4<f64>,
) -> Result<crate::algebra::Skew4> {
    g.check_interior(x, 2.0 * g.h_g)?;
    let conn = connection_unchecked(g, x);
    crate::algebra::Skew4::new(conn.eta(v), 1e-6)
}

/// Full connection data at `x` (frame plus `η`).
pub fn connection(g: &MetricField, x: &Point4) -> Result<Connection> {
    g.check_interior(x, 2.0 * g.h_g)?;
    Ok(connection_unchecked(g, x))
}

/// Curvature operator on `Λ²` and its block decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureDecomp {
    pub w_plus: Matrix3<f64>,
    pub w_minus: Matrix3<f64>,
    /// Upper-right block, mapping `Λ-` into `Λ+`.
    pub b: Matrix3<f64>,
    pub s: f64,
    /// The operator in the lexicographic bivector basis:
    /// `rop · (e_i∧e_j) = φ(R(θ_i, θ_j))`.
    pub rop: Matrix6<f64>,
    /// `R(θ_i, θ_j)` as frame matrices, `[i][j]`.
    pub endo: [[Mat4; 4]; 4],
}

impl CurvatureDecomp {
    fn from_endomorphisms(endo: [[Mat4; 4]; 4]) -> Self {
        let mut rop = Matrix6::zeros();
        for (col, &(i, j)) in BIVECTOR_PAIRS.iter().enumerate() {
            let b = phi(&endo[i][j]);
            rop.set_column(col, &b.components);
        }
        let p = selfdual_basis();
        let pm = p * rop * p.transpose();
        let a = pm.fixed_view::<3, 3>(0, 0).into_owned();
        let c = pm.fixed_view::<3, 3>(3, 3).into_owned();
        let b = pm.fixed_view::<3, 3>(0, 3).into_owned();
        let s = 2.0 * rop.trace();
        let id = Matrix3::identity() * (s / 12.0);
        CurvatureDecomp {
            w_plus: a - id,
            w_minus: c - id,
            b,
            s,
            rop,
            endo,
        }
    }

    /// The operator in the unit `Λ±` basis.
    pub fn rop_selfdual_basis(&self) -> Matrix6<f64> {
        let p = selfdual_basis();
        p * self.rop * p.transpose()
    }

    /// `[[W+ + s/12, B], [Bᵀ, W- + s/12]]` in the unit `Λ±` basis.
    pub fn reassemble(&self) -> Matrix6<f64> {
        let id = Matrix3::identity() * (self.s / 12.0);
        let mut m = Matrix6::zeros();
        m.fixed_view_mut::<3, 3>(0, 0)
            .copy_from(&(self.w_plus + id));
        m.fixed_view_mut::<3, 3>(3, 3)
            .copy_from(&(self.w_minus + id));
        m.fixed_view_mut::<3, 3>(0, 3).copy_from(&self.b);
        m.fixed_view_mut::<3, 3>(3, 0)
            .copy_from(&self.b.transpose());
        m
    }

    /// `R` restricted and projected to `Λ+`.
    pub fn plus_block(&self) -> Matrix3<f64> {
        self.rop_selfdual_basis()
            .fixed_view::<3, 3>(0, 0)
            .into_owned()
    }

    /// Applies `R` to a (complex) bivector.
    pub fn apply(&self, b: &Bivector6<crate::C64>) -> Bivector6<crate::C64> {
        let r = self.rop.map(|v| crate::C64::new(v, 0.0));
        Bivector6::new(r * b.components)
    }

    /// `B(b)`: the `Λ+`-valued image of the `Λ-` component of `b`.
    pub fn b_apply(&self, b: &Bivector6<crate::C64>) -> Bivector6<crate::C64> {
        let split = crate::algebra::selfdual_split(b);
        let bm = self.b.map(|v| crate::C64::new(v, 0.0));
        crate::algebra::SelfDualSplit::from_parts(bm * split.minus, nalgebra::Vector3::zeros())
            .plus_part()
    }
}

/// Riemann tensor `R_std^a_{bcd}` in coordinates with the standard sign
/// (`R_std(∂c, ∂d)∂b = R^a_{bcd} ∂a`).
fn riemann_coordinates(g: &MetricField, x: &Point4) -> [[[[f64; 4]; 4]; 4]; 4] {
    let h = g.h_second;
    let gamma = christoffel_unchecked(g, x);
    let dgamma: [Christoffel; 4] = std::array::from_fn(|c| {
        let mut xp = *x;
        let mut xm = *x;
        xp[c] += h;
        xm[c] -= h;
        let gp = christoffel_unchecked(g, &xp);
        let gm = christoffel_unchecked(g, &xm);
        let mut d = [[[0.0; 4]; 4]; 4];
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    d[k][i][j] = (gp[k][i][j] - gm[k][i][j]) / (2.0 * h);
                }
            }
        }
        d
    });
    let mut r = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let mut v = dgamma[c][a][d][b] - dgamma[d][a][c][b];
                    for e in 0..4 {
                        v += gamma[a][c][e] * gamma[e][d][b] - gamma[a][d][e] * gamma[e][c][b];
                    }
                    r[a][b][c][d] = v;
                }
            }
        }
    }
    r
}

/// Curvature operator at `x` in the Gram–Schmidt frame, with its
/// `{W+, W-, B, s}` blocks.
pub fn curvature(g: &MetricField, x: &Point4) -> Result<CurvatureDecomp> {
    g.check_interior(x, g.reach())?;
    let r = riemann_coordinates(g, x);
    let frame = frame_unchecked(g, x);
    let gm = g.eval(x);
    let t = frame.theta;
    let proj = t.transpose() * gm;
    let endo = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            // coordinate endomorphism R_std(θ_i, θ_j)
            let mut m = Mat4::zeros();
            for a in 0..4 {
                for b in 0..4 {
                    let mut acc = 0.0;
                    for c in 0..4 {
                        for d in 0..4 {
                            acc += r[a][b][c][d] * t[(c, i)] * t[(d, j)];
                        }
                    }
                    m[(a, b)] = acc;
                }
            }
            // frame matrix of R = -R_std
            -(proj * m * t)
        })
    });
    Ok(CurvatureDecomp::from_endomorphisms(endo))
}

/// `R(θ_i, θ_j) = -(dη + η∧η)(θ_i, θ_j)` computed from finite differences
/// of the connection form along the frame. Independent of
/// [`curvature`], which goes through Christoffel derivatives.
pub fn curvature_via_connection(g: &MetricField, x: &Point4) -> Result<[[Mat4; 4]; 4]> {
    g.check_interior(x, g.reach())?;
    let h = g.h_second;
    let conn = connection_unchecked(g, x);
    let theta = conn.frame.theta;
    // ∂_a of η(θ_j) (as a field) and of θ_j
    let shifted = |a: usize, sign: f64| {
        let mut y = *x;
        y[a] += sign * h;
        connection_unchecked(g, &y)
    };
    let mut d_eta = [[Mat4::zeros(); 4]; 4]; // [a][j]
    let mut d_theta = [Mat4::zeros(); 4]; // [a]
    for a in 0..4 {
        let cp = shifted(a, 1.0);
        let cm = shifted(a, -1.0);
        for j in 0..4 {
            d_eta[a][j] = (cp.eta_frame(j) - cm.eta_frame(j)) / (2.0 * h);
        }
        d_theta[a] = (cp.frame.theta - cm.frame.theta) / (2.0 * h);
    }
    let along =
        |v: &Vector4<f64>, j: usize| (0..4).fold(Mat4::zeros(), |acc, a| acc + d_eta[a][j] * v[a]);
    let dvec = |v: &Vector4<f64>, j: usize| {
        (0..4).fold(Vector4::zeros(), |acc, a| acc + d_theta[a].column(j) * v[a])
    };
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let ti = theta.column(i).into_owned();
            let tj = theta.column(j).into_owned();
            let lie = dvec(&ti, j) - dvec(&tj, i);
            let d = along(&ti, j) - along(&tj, i) - conn.eta(&lie);
            let ei = conn.eta_frame(i);
            let ej = conn.eta_frame(j);
            -(d + ei * ej - ej * ei)
        })
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(v: [f64; 4]) -> Point4 {
        Point4::from_row_slice(&v)
    }

    #[test]
    fn registry_parses_and_rejects() {
        let g: MetricField = "flat".parse().unwrap();
        assert_eq!(g.eval(&pt([0.3, 0.1, -0.2, 0.5])), Mat4::identity());
        let g: MetricField = "s4:1".parse().unwrap();
        assert_eq!(g.eval(&Point4::zeros()), Mat4::identity() * 4.0);
        assert!("bogus".parse::<MetricField>().is_err());
        assert!("s4:-1".parse::<MetricField>().is_err());
        assert!("s4".parse::<MetricField>().is_err());
        assert!("flat:2".parse::<MetricField>().is_err());
        let bump = get_metric("conformal_bump", &[0.0]).unwrap();
        let x = pt([0.2, -0.4, 0.1, 0.3]);
        assert_eq!(bump.eval(&x), Mat4::identity());
        assert_eq!(format!("{}", get_metric("s4", &[2.0]).unwrap()), "s4:2");
    }

    #[test]
    fn flat_geometry_vanishes() {
        let g = MetricField::flat();
        let x = pt([0.3, -0.2, 0.1, 0.4]);
        let gamma = christoffel(&g, &x).unwrap();
        assert!(gamma.iter().flatten().flatten().all(|&v| v == 0.0));
        assert_eq!(orthonormal_frame(&g, &x).unwrap().theta, Mat4::identity());
        assert_eq!(
            *connection_form(&g, &x, &pt([1.0, 2.0, 3.0, 4.0]))
                .unwrap()
                .matrix(),
            Mat4::zeros()
        );
        let c = curvature(&g, &x).unwrap();
        assert_eq!(c.s, 0.0);
        assert_eq!(c.rop, Matrix6::zeros());
    }

    #[test]
    fn boundary_proximity_is_a_domain_error() {
        let g = MetricField::flat();
        assert!(matches!(
            christoffel(&g, &pt([2.0, 0.0, 0.0, 0.0])),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            curvature(&g, &pt([0.0, 0.0, 1.9995, 0.0])),
            Err(Error::Domain(_))
        ));
    }

    /// Analytic oracle for the conformal Christoffel symbols of `e^{2f}δ`.
    fn conformal_christoffel(eps: f64, x: &Point4) -> Christoffel {
        let f = eps * (-x.norm_squared()).exp();
        let df: Vec<f64> = (0..4).map(|k| -2.0 * x[k] * f).collect();
        let mut out = [[[0.0; 4]; 4]; 4];
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                    out[k][i][j] = d(k, i) * df[j] + d(k, j) * df[i] - d(i, j) * df[k];
                }
            }
        }
        out
    }

    #[test]
    fn s4_unit_scalar_curvature() {
        let g = get_metric("s4", &[1.0]).unwrap();
        let c = curvature(&g, &Point4::zeros()).unwrap();
        assert!((c.s - 12.0).abs() < 1e-4, "s = {}", c.s);
    }

    #[test]
    fn s4_kaehler_radius() {
        let g = get_metric("s4", &[2f64.sqrt()]).unwrap();
        let x = pt([0.2, -0.3, 0.1, 0.25]);
        let c = curvature(&g, &x).unwrap();
        assert!((c.s - 6.0).abs() < 1e-4);
        assert!(c.w_plus.amax() <= 1e-5 && c.w_minus.amax() <= 1e-5 && c.b.amax() <= 1e-5);
        assert!((c.plus_block() - Matrix3::identity() * 0.5).amax() <= 1e-5);
    }

    #[test]
    fn s4_scalar_curvature_is_constant() {
        let r = 1.3;
        let g = get_metric("s4", &[r]).unwrap();
        for k in 0..20 {
            let t = k as f64 / 20.0;
            let x = pt([0.6 * t - 0.3, 0.2 * (7.0 * t).sin(), -0.4 * t, 0.1]);
            let c = curvature(&g, &x).unwrap();
            assert!(((c.s - 12.0 / (r * r)) / (12.0 / (r * r))).abs() < 1e-3);
        }
    }

    #[test]
    fn perturbed_metric_has_selfdual_weyl() {
        let g = get_metric("perturbed", &[0.2]).unwrap();
        let c = curvature(&g, &pt([0.1, 0.2, -0.1, 0.0])).unwrap();
        assert!(c.w_plus.amax() > 1e-3);
    }

    #[test]
    fn fd_and_analytic_metric_derivatives_agree() {
        for spec in ["s4:1.2", "conformal_bump:0.3", "perturbed:0.2"] {
            let g: MetricField = spec.parse().unwrap();
            let gf = g.clone().with_mode(DiffMode::FiniteDifference);
            let x = pt([0.3, -0.2, 0.15, 0.05]);
            let (a, b) = (g.derivative(&x), gf.derivative(&x));
            for k in 0..4 {
                assert!((a[k] - b[k]).amax() < 1e-7, "{spec}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn christoffel_symmetry_and_conformal_oracle(c in prop::array::uniform4(-0.7f64..0.7)) {
            let x = pt(c);
            let g = get_metric("conformal_bump", &[0.1]).unwrap();
            for mode in [DiffMode::Analytic, DiffMode::FiniteDifference] {
                let gamma = christoffel(&g.clone().with_mode(mode), &x).unwrap();
                let oracle = conformal_christoffel(0.1, &x);
                for k in 0..4 { for i in 0..4 { for j in 0..4 {
                    prop_assert!((gamma[k][i][j] - gamma[k][j][i]).abs() < 1e-14);
                    prop_assert!((gamma[k][i][j] - oracle[k][i][j]).abs() < 1e-6);
                }}}
            }
        }

        #[test]
        fn frames_are_orthonormal_and_direct(c in prop::array::uniform4(-0.5f64..0.5), which in 0usize..3) {
            let x = pt(c);
            let g: MetricField = ["s4:1.1", "conformal_bump:0.1", "perturbed:0.3"][which].parse().unwrap();
            let f = orthonormal_frame(&g, &x).unwrap();
            let gram = f.theta.transpose() * g.eval(&x) * f.theta;
            prop_assert!((gram - Mat4::identity()).amax() < 1e-12);
            prop_assert!(f.theta.determinant() > 0.0);
        }

        #[test]
        fn bump_frame_is_conformally_scaled(c in prop::array::uniform4(-0.7f64..0.7)) {
            let x = pt(c);
            let g = get_metric("conformal_bump", &[0.1]).unwrap();
            let f = orthonormal_frame(&g, &x).unwrap();
            let scale = (-0.1 * (-x.norm_squared()).exp()).exp();
            prop_assert!((f.theta - Mat4::identity() * scale).amax() < 1e-10);
        }

        #[test]
        fn connection_is_metric_and_consistent(c in prop::array::uniform4(-0.5f64..0.5), v in prop::array::uniform4(-1.0f64..1.0), which in 0usize..3) {
            let x = pt(c);
            let v = pt(v);
            let g: MetricField = ["s4:1.4", "conformal_bump:0.1", "perturbed:0.3"][which].parse().unwrap();
            let conn = connection(&g, &x).unwrap();
            let eta = conn.eta(&v);
            prop_assert!((eta + eta.transpose()).amax() < 1e-8);
            // Oracle: ∇_v θ_j from Christoffels and a directional difference of the frame.
            let h = 1e-5;
            let fp = orthonormal_frame(&g, &(x + v * h)).unwrap().theta;
            let fm = orthonormal_frame(&g, &(x - v * h)).unwrap().theta;
            let dtheta = (fp - fm) / (2.0 * h);
            let gamma = christoffel(&g, &x).unwrap();
            let theta = conn.frame.theta;
            for j in 0..4 {
                let mut cov = dtheta.column(j).into_owned();
                for k in 0..4 { for a in 0..4 { for b in 0..4 {
                    cov[k] += gamma[k][a][b] * v[a] * theta[(b, j)];
                }}}
                let expansion = (0..4).fold(Vector4::zeros(), |acc, i| acc + theta.column(i) * eta[(i, j)]);
                prop_assert!((cov - expansion).amax() < 1e-6);
            }
        }

        #[test]
        fn curvature_operator_invariants(c in prop::array::uniform4(-0.4f64..0.4), which in 0usize..4) {
            let x = pt(c);
            let g: MetricField = ["flat", "s4:1.4142135623730951", "conformal_bump:0.1", "perturbed:0.2"][which].parse().unwrap();
            let cd = curvature(&g, &x).unwrap();
            prop_assert!((cd.rop - cd.rop.transpose()).amax() < 1e-6);
            prop_assert!(cd.w_plus.trace().abs() < 1e-6 && cd.w_minus.trace().abs() < 1e-6);
            prop_assert!((cd.reassemble() - cd.rop_selfdual_basis()).amax() < 1e-6);
        }

        #[test]
        fn bump_is_weyl_free(c in prop::array::uniform4(-0.6f64..0.6)) {
            let g = get_metric("conformal_bump", &[0.1]).unwrap();
            let cd = curvature(&g, &pt(c)).unwrap();
            prop_assert!(cd.w_plus.amax() <= 1e-5 && cd.w_minus.amax() <= 1e-5);
        }

        #[test]
        fn curvature_sign_convention_self_test(c in prop::array::uniform4(-0.4f64..0.4), which in 0usize..3) {
            let x = pt(c);
            let g: MetricField = ["s4:1.2", "conformal_bump:0.1", "perturbed:0.2"][which].parse().unwrap();
            let a = curvature(&g, &x).unwrap();
            let b = curvature_via_connection(&g, &x).unwrap();
            for i in 0..4 { for j in 0..4 {
                prop_assert!((a.endo[i][j] - b[i][j]).amax() < 1e-5);
            }}
        }
    }
}
