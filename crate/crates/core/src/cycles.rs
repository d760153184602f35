//! The flat model: twistor space of `R^4` as `O(1) ⊕ O(1)` over the fibre
//! sphere, its sections `(aμ + b, cμ + d)`, and the volume of the
//! corresponding cycles.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::algebra::CompatStructure;
use crate::error::{Error, Result};
use crate::riemann::{MetricField, Point4};
use crate::twistor::{
    stereo_coefficients, ChartVec, SphereChart, TwistorPoint, TwistorSpace, TwistorTangent,
};
use crate::C64;

/// A section of `O(1) ⊕ O(1)`, i.e. a point of the cycle space `C^4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Section {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Section {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Section { a, b, c, d }
    }

    pub fn zero() -> Self {
        let z = C64::new(0.0, 0.0);
        Section::new(z, z, z, z)
    }

    /// The twistor line `c = -b̄`, `d = ā`, i.e. the fibre over `(a, -b̄)`.
    pub fn twistor_line(a: C64, b: C64) -> Self {
        Section::new(a, b, -b.conj(), a.conj())
    }

    /// `(a - d̄, b̄ + c)`, which vanish exactly on twistor lines.
    pub fn transverse_part(&self) -> (C64, C64) {
        (self.a - self.d.conj(), self.b.conj() + self.c)
    }

    /// `|a - d̄|² + |b̄ + c|²`.
    pub fn defect(&self) -> f64 {
        let (p, q) = self.transverse_part();
        p.norm_sqr() + q.norm_sqr()
    }

    /// `|a|² + |b|² + |c|² + |d|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()
    }
}

impl Add for Section {
    type Output = Section;
    fn add(self, o: Section) -> Section {
        Section::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Section {
    type Output = Section;
    fn sub(self, o: Section) -> Section {
        Section::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl Mul<C64> for Section {
    type Output = Section;
    fn mul(self, t: C64) -> Section {
        Section::new(self.a * t, self.b * t, self.c * t, self.d * t)
    }
}

/// The compatible structure at stereographic coordinate `ζ`:
/// `((1-|ζ|²)I + i(ζ-ζ̄)J + (ζ+ζ̄)K)/(1+|ζ|²)`.
pub fn stereo_structure(zeta: C64) -> CompatStructure {
    CompatStructure::from_unit(stereo_coefficients(SphereChart::North, zeta))
}

/// The fibre point `(z₁, z₂)` of the section over `μ`:
/// `z₁ = (c̄μ̄ + d̄ + a|μ|² + bμ̄)/(1+|μ|²)`,
/// `z₂ = (-āμ̄ - b̄ + c|μ|² + dμ̄)/(1+|μ|²)`.
pub fn chart_map(s: &Section, mu: C64) -> (C64, C64) {
    let r = mu.norm_sqr();
    let mb = mu.conj();
    let den = 1.0 + r;
    let z1 = (s.c.conj() * mb + s.d.conj() + s.a * r + s.b * mb) / den;
    let z2 = (-s.a.conj() * mb - s.b.conj() + s.c * r + s.d * mb) / den;
    (z1, z2)
}

/// [`chart_map`] in the coordinate `w = 1/μ`, regular at `μ = ∞`.
pub fn chart_map_south(s: &Section, w: C64) -> (C64, C64) {
    let r = w.norm_sqr();
    let den = 1.0 + r;
    let z1 = (s.c.conj() * w + s.d.conj() * r + s.a + s.b * w) / den;
    let z2 = (-s.a.conj() * w - s.b.conj() * r + s.c + s.d * w) / den;
    (z1, z2)
}

/// The real point of `R^4` with complex coordinates `(z₁, z₂)`:
/// `x = (-Re z₁, Im z₁, Re z₂, -Im z₂)`.
///
/// This is the identification for which the fibres of [`chart_map`] are
/// holomorphic curves with `ζ = μ`.
pub fn to_real4(z1: C64, z2: C64) -> Point4 {
    Point4::new(-z1.re, z1.im, z2.re, -z2.im)
}

fn flat_space() -> TwistorSpace {
    TwistorSpace::new(MetricField::flat())
}

fn base_point(s: &Section, chart: SphereChart, xi: C64) -> Point4 {
    let (z1, z2) = match chart {
        SphereChart::North => chart_map(s, xi),
        SphereChart::South => chart_map_south(s, xi),
    };
    to_real4(z1, z2)
}

/// The point of the flat twistor space on the section over `μ`.
pub fn section_embed(s: &Section, mu: C64) -> TwistorPoint {
    let (chart, xi) = if mu.norm() <= 1.0 {
        (SphereChart::North, mu)
    } else {
        (SphereChart::South, mu.inv())
    };
    embed_in_chart(&flat_space(), s, chart, xi)
}

fn embed_in_chart(space: &TwistorSpace, s: &Section, chart: SphereChart, xi: C64) -> TwistorPoint {
    let x = base_point(s, chart, xi);
    let y = nalgebra::Vector6::new(x[0], x[1], x[2], x[3], xi.re, xi.im);
    space.point_at(chart, &y)
}

const EMBED_STEP: f64 = 1e-5;

/// The embedding at chart coordinate `ξ` with its derivatives along
/// `Re ξ` and `Im ξ` (base part by central differences).
pub fn embedding_tangents(
    s: &Section,
    chart: SphereChart,
    xi: C64,
) -> (TwistorPoint, TwistorTangent, TwistorTangent) {
    let space = flat_space();
    let p = embed_in_chart(&space, s, chart, xi);
    let h = EMBED_STEP;
    let tangent = |dir: C64| {
        let dx =
            (base_point(s, chart, xi + dir * h) - base_point(s, chart, xi - dir * h)) / (2.0 * h);
        let mut w = ChartVec::zeros();
        for k in 0..4 {
            w[k] = C64::new(dx[k], 0.0);
        }
        w[4] = C64::new(dir.re, 0.0);
        w[5] = C64::new(dir.im, 0.0);
        p.from_chart(&w)
    };
    let dre = tangent(C64::new(1.0, 0.0));
    let dim = tangent(C64::new(0.0, 1.0));
    (p, dre, dim)
}

/// `‖½(∂_Re F + 𝕁 ∂_Im F)‖` of the embedding `F` at `μ`.
pub fn cauchy_riemann_residual(s: &Section, mu: C64) -> f64 {
    let (chart, xi) = if mu.norm() <= 1.0 {
        (SphereChart::North, mu)
    } else {
        (SphereChart::South, mu.inv())
    };
    let (p, dre, dim) = embedding_tangents(s, chart, xi);
    ((dre + p.j_apply(&dim)) * 0.5).norm_max()
}

/// Gauss–Legendre nodes in `cos Θ` times a uniform azimuthal grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    n_theta: usize,
    n_phi: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Quadrature {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 16 || n_phi < 32 {
            return Err(Error::Config(format!(
                "quadrature needs n_theta ≥ 16 and n_phi ≥ 32, got {n_theta}×{n_phi}"
            )));
        }
        let (nodes, weights) = gauss_legendre(n_theta);
        Ok(Quadrature {
            n_theta,
            n_phi,
            nodes,
            weights,
        })
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    /// Integrates a density given on the sphere in `(t = cos Θ, φ)`.
    fn integrate<F: Fn(f64, f64) -> f64>(&self, f: F) -> f64 {
        let dphi = 2.0 * PI / self.n_phi as f64;
        let mut total = 0.0;
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            let mut ring = 0.0;
            for k in 0..self.n_phi {
                ring += f(*t, k as f64 * dphi);
            }
            total += w * ring * dphi;
        }
        total
    }
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature::new(64, 128).expect("default grid is valid")
    }
}

/// Golub–Welsch: nodes are the eigenvalues of the Jacobi matrix of the
/// Legendre recurrence.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let beta = kf / (4.0 * kf * kf - 1.0).sqrt();
        jac[(k, k - 1)] = beta;
        jac[(k - 1, k)] = beta;
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], 2.0 * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Which fibre charts the volume integral uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartMode {
    /// North chart on `cos Θ ≥ 0`, south chart on the other hemisphere.
    Split,
    North,
    South,
}

/// A volume with a flag raised when halving the grid moves the value by
/// more than `1e-6` relative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Volume {
    pub value: f64,
    pub coarse_change: f64,
    pub accuracy_warning: bool,
}

/// `ω(∂_Re F, ∂_Im F)` times the area factor `(1+|ξ|²)²/4` of `(t, φ)`.
fn density(s: &Section, chart: SphereChart, xi: C64) -> f64 {
    let (p, dre, dim) = embedding_tangents(s, chart, xi);
    p.omega(&dre, &dim).re * 0.25 * (1.0 + xi.norm_sqr()).powi(2)
}

/// `∫ σ*ω` over the fibre sphere, in the given charts.
pub fn vol_in_charts(s: &Section, q: &Quadrature, mode: ChartMode) -> f64 {
    q.integrate(|t, phi| {
        let north = match mode {
            ChartMode::Split => t >= 0.0,
            ChartMode::North => true,
            ChartMode::South => false,
        };
        if north {
            // μ = tan(Θ/2) e^{iφ}
            let r = ((1.0 - t) / (1.0 + t)).sqrt();
            density(s, SphereChart::North, C64::from_polar(r, phi))
        } else {
            // w = 1/μ = cot(Θ/2) e^{-iφ}
            let r = ((1.0 + t) / (1.0 - t)).sqrt();
            density(s, SphereChart::South, C64::from_polar(r, -phi))
        }
    })
}

/// The volume of the cycle of `s`, with a coarse-grid accuracy check.
pub fn vol(s: &Section, q: &Quadrature) -> Volume {
    let value = vol_in_charts(s, q, ChartMode::Split);
    let coarse = Quadrature::new((q.n_theta / 2).max(16), (q.n_phi / 2).max(32))
        .map(|c| vol_in_charts(s, &c, ChartMode::Split))
        .unwrap_or(value);
    let coarse_change = ((value - coarse) / value).abs();
    Volume {
        value,
        coarse_change,
        accuracy_warning: coarse_change > 1e-6,
    }
}

/// `V₀(1 + κ(|a - d̄|² + |b̄ + c|²))`.
pub fn vol_closed(s: &Section, v0: f64, kappa: f64) -> f64 {
    v0 * (1.0 + kappa * s.defect())
}

/// `κ` minimising `Σ (vol/V₀ - 1 - κ·defect)²` over the given sections.
pub fn fit_kappa(sections: &[Section], vols: &[f64], v0: f64) -> Result<f64> {
    let (num, den) = sections
        .iter()
        .zip(vols)
        .fold((0.0, 0.0), |(n, d), (s, v)| {
            let q = s.defect();
            (n + q * (v / v0 - 1.0), d + q * q)
        });
    if den <= 0.0 {
        return Err(Error::Numeric(
            "cannot fit κ: all sections are twistor lines".into(),
        ));
    }
    Ok(num / den)
}

/// Least-squares coefficients `(k₁, k₂)` of
/// `vol/V₀ - 1 = k₁|a - d̄|² + k₂|b̄ + c|²`.
pub fn fit_split_coefficients(sections: &[Section], vols: &[f64], v0: f64) -> Result<(f64, f64)> {
    let mut m = nalgebra::Matrix2::<f64>::zeros();
    let mut r = nalgebra::Vector2::<f64>::zeros();
    for (s, v) in sections.iter().zip(vols) {
        let (p, q) = s.transverse_part();
        let row = nalgebra::Vector2::new(p.norm_sqr(), q.norm_sqr());
        m += row * row.transpose();
        r += row * (v / v0 - 1.0);
    }
    let sol = m
        .lu()
        .solve(&r)
        .ok_or_else(|| Error::Numeric("degenerate two-coefficient fit".into()))?;
    Ok((sol[0], sol[1]))
}

/// `∂_t∂_t̄ vol(s + t n)` at `t = 0` by the five-point stencil
/// `(f(εn) + f(-εn) + f(iεn) + f(-iεn) - 4f(0))/(4ε²)`.
pub fn levi_form(s: &Section, n: &Section, eps: f64, q: &Quadrature) -> Result<f64> {
    if !(1e-4..=1e-1).contains(&eps) {
        return Err(Error::Config(format!(
            "Levi-form step must lie in [1e-4, 1e-1], got {eps}"
        )));
    }
    let f = |t: C64| vol_in_charts(&(*s + *n * t), q, ChartMode::Split);
    let e = C64::new(eps, 0.0);
    let ie = C64::new(0.0, eps);
    let stencil = f(e) + f(-e) + f(ie) + f(-ie) - 4.0 * f(C64::new(0.0, 0.0));
    Ok(stencil / (4.0 * eps * eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{quat_i, Mat4};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn section(v: &[f64; 8]) -> Section {
        Section::new(c(v[0], v[1]), c(v[2], v[3]), c(v[4], v[5]), c(v[6], v[7]))
    }

    #[test]
    fn stereo_structure_limits() {
        assert_eq!(*stereo_structure(c(0.0, 0.0)).matrix(), quat_i());
        let far = stereo_structure(c(3e7, -4e7));
        assert!((far.matrix() + quat_i()).amax() < 1e-7);
    }

    #[test]
    fn chart_map_examples() {
        let (a, b) = (c(0.3, -0.2), c(-0.5, 0.7));
        let line = Section::twistor_line(a, b);
        for mu in [c(0.0, 0.0), c(0.4, 0.9), c(-3.0, 2.0)] {
            let (z1, z2) = chart_map(&line, mu);
            assert!((z1 - a).norm() < 1e-15 && (z2 + b.conj()).norm() < 1e-15);
        }
        let s = section(&[0.1, 0.2, -0.3, 0.4, 0.5, -0.6, 0.7, 0.8]);
        let (z1, z2) = chart_map(&s, c(0.0, 0.0));
        assert_eq!((z1, z2), (s.d.conj(), -s.b.conj()));
        let mu = c(1.7, -0.4);
        let (n1, n2) = chart_map(&s, mu);
        let (s1, s2) = chart_map_south(&s, mu.inv());
        assert!((n1 - s1).norm() < 1e-14 && (n2 - s2).norm() < 1e-14);
    }

    #[test]
    fn zero_section_is_the_fibre_over_the_origin() {
        for mu in [c(0.0, 0.0), c(0.5, 0.5), c(4.0, 0.0)] {
            assert_eq!(section_embed(&Section::zero(), mu).x, Point4::zeros());
        }
    }

    #[test]
    fn gauss_legendre_is_exact_on_polynomials() {
        let (x, w) = gauss_legendre(16);
        for deg in 0..31 {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let want = if deg % 2 == 0 {
                2.0 / (deg as f64 + 1.0)
            } else {
                0.0
            };
            assert!((got - want).abs() < 1e-14, "degree {deg}");
        }
        assert!(Quadrature::new(8, 64).is_err());
        assert!(Quadrature::new(16, 16).is_err());
    }

    #[test]
    fn twistor_line_volume_is_the_fibre_area() {
        let q = Quadrature::default();
        let v = vol(&Section::twistor_line(c(0.3, 0.1), c(-0.2, 0.5)), &q);
        assert!((v.value / (8.0 * PI) - 1.0).abs() < 1e-10);
        assert!(!v.accuracy_warning);
        // oracle: the vertical area form of g₀ integrated directly
        let direct = q.integrate(|t, phi| {
            let r = ((1.0 - t) / (1.0 + t)).sqrt();
            let xi = C64::from_polar(r, phi);
            let p = flat_space().point_at(
                SphereChart::North,
                &nalgebra::Vector6::new(0.0, 0.0, 0.0, 0.0, xi.re, xi.im),
            );
            let d = p.from_chart(&ChartVec::from_fn(|k, _| {
                c(if k == 4 { 1.0 } else { 0.0 }, 0.0)
            }));
            let vert = p.vertical_part(&d);
            crate::algebra::g0_inner(&vert, &vert).re * 0.25 * (1.0 + r * r).powi(2)
        });
        assert!((direct / (8.0 * PI) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn twistor_lines_have_no_horizontal_velocity() {
        let s = Section::twistor_line(c(0.4, -0.3), c(0.2, 0.9));
        for xi in [c(0.1, 0.2), c(-0.7, 0.3)] {
            for chart in [SphereChart::North, SphereChart::South] {
                let (_, dre, dim) = embedding_tangents(&s, chart, xi);
                assert!(dre.h.iter().chain(dim.h.iter()).all(|z| z.norm() < 1e-9));
            }
        }
    }

    #[test]
    fn levi_form_of_zero_direction() {
        let q = Quadrature::new(16, 32).unwrap();
        let s = section(&[0.1, 0.2, -0.3, 0.4, 0.5, -0.6, 0.7, 0.8]);
        assert_eq!(levi_form(&s, &Section::zero(), 1e-2, &q).unwrap(), 0.0);
        assert!(levi_form(&s, &s, 1.0, &q).is_err());
    }

    #[test]
    fn identification_sends_i_to_minus_i_structure() {
        // multiplication by i on (z₁, z₂) acts on x as -I
        let z = (c(0.3, -0.8), c(0.6, 0.1));
        let x = to_real4(z.0, z.1);
        let xi = to_real4(z.0 * c(0.0, 1.0), z.1 * c(0.0, 1.0));
        assert!((xi + quat_i() * x).amax() < 1e-15);
        let _ = Mat4::identity();
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn sections_embed_holomorphically(v in prop::array::uniform8(-1.0f64..1.0), m in prop::array::uniform2(-2.0f64..2.0)) {
            let s = section(&v);
            prop_assert!(cauchy_riemann_residual(&s, c(m[0], m[1])) <= 1e-6);
        }

        #[test]
        fn stereo_coefficients_are_unit(z in prop::array::uniform2(-10.0f64..10.0)) {
            let u = stereo_structure(c(z[0], z[1]));
            prop_assert!((u.abc().norm_squared() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn chart_map_is_real_linear(v in prop::array::uniform8(-1.0f64..1.0), w in prop::array::uniform8(-1.0f64..1.0),
                                   t in -2.0f64..2.0, m in prop::array::uniform2(-2.0f64..2.0)) {
            let (s1, s2) = (section(&v), section(&w));
            let mu = c(m[0], m[1]);
            let sum = chart_map(&(s1 + s2 * c(t, 0.0)), mu);
            let (a, b) = (chart_map(&s1, mu), chart_map(&s2, mu));
            prop_assert!((sum.0 - a.0 - b.0 * t).norm() < 1e-13 && (sum.1 - a.1 - b.1 * t).norm() < 1e-13);
        }
    }
}
