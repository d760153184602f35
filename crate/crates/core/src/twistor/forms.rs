//! Differential forms on the twistor chart and their finite-difference
//! exterior derivatives.

use nalgebra::Vector6;

use super::fields::{directional, lie_bracket_fd, Field};
use super::{ChartVec, SphereChart, TwistorPoint, TwistorSpace, TwistorTangent, TypeKind};
use crate::error::{Error, Result};
use crate::C64;

/// A tensorial `k`-form evaluated on tangents at a point.
pub trait Form: Sync {
    fn degree(&self) -> usize;
    fn eval(&self, space: &TwistorSpace, p: &TwistorPoint, args: &[TwistorTangent]) -> C64;
}

/// The metric form `ω = 𝔾(𝕁·,·)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MetricForm;

impl Form for MetricForm {
    fn degree(&self) -> usize {
        2
    }

    fn eval(&self, _: &TwistorSpace, p: &TwistorPoint, args: &[TwistorTangent]) -> C64 {
        p.omega(&args[0], &args[1])
    }
}

/// A function on the twistor space, as a 0-form.
pub struct ScalarForm<F>(pub F);

impl<F: Fn(&TwistorPoint) -> C64 + Sync> Form for ScalarForm<F> {
    fn degree(&self) -> usize {
        0
    }

    fn eval(&self, _: &TwistorSpace, p: &TwistorPoint, _: &[TwistorTangent]) -> C64 {
        (self.0)(p)
    }
}

/// `d` of a form, evaluated by extending the arguments as constant chart
/// fields (which commute, so only derivative terms remain).
pub struct ExteriorDerivative<F> {
    pub inner: F,
    pub step: f64,
}

impl<F: Form> Form for ExteriorDerivative<F> {
    fn degree(&self) -> usize {
        self.inner.degree() + 1
    }

    fn eval(&self, space: &TwistorSpace, p: &TwistorPoint, args: &[TwistorTangent]) -> C64 {
        let y0 = p.chart_coords();
        let ws: Vec<ChartVec> = args.iter().map(|a| p.to_chart(a)).collect();
        let mut total = C64::new(0.0, 0.0);
        for i in 0..ws.len() {
            let rest: Vec<&ChartVec> = ws
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i)
                .map(|(_, w)| w)
                .collect();
            let g = |chart: SphereChart, y: &Vector6<f64>| {
                let q = space.point_at(chart, y);
                let vals: Vec<TwistorTangent> = rest.iter().map(|w| q.from_chart(w)).collect();
                self.inner.eval(space, &q, &vals)
            };
            let d = directional(p.chart, &y0, &ws[i], self.step, g);
            total += if i % 2 == 0 { d } else { -d };
        }
        total
    }
}

/// The `(p, q)`-type component of a form: each argument is split into its
/// `h` and `a` parts and the terms with exactly `p` `h`-slots are summed.
pub struct TypeComponent<F> {
    pub inner: F,
    pub p: usize,
    pub q: usize,
}

fn type_patterns(n: usize, n_h: usize) -> Vec<Vec<TypeKind>> {
    (0u32..(1 << n))
        .filter(|m| m.count_ones() as usize == n_h)
        .map(|m| {
            (0..n)
                .map(|k| {
                    if m & (1 << k) != 0 {
                        TypeKind::H
                    } else {
                        TypeKind::A
                    }
                })
                .collect()
        })
        .collect()
}

impl<F: Form> Form for TypeComponent<F> {
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    fn eval(&self, space: &TwistorSpace, pt: &TwistorPoint, args: &[TwistorTangent]) -> C64 {
        debug_assert_eq!(self.p + self.q, args.len());
        let h: Vec<_> = args
            .iter()
            .map(|a| pt.type_project(a, TypeKind::H))
            .collect();
        let a: Vec<_> = args
            .iter()
            .map(|v| pt.type_project(v, TypeKind::A))
            .collect();
        type_patterns(args.len(), self.p)
            .into_iter()
            .map(|pat| {
                let vals: Vec<_> = pat
                    .iter()
                    .enumerate()
                    .map(|(k, t)| if *t == TypeKind::H { h[k] } else { a[k] })
                    .collect();
                self.inner.eval(space, pt, &vals)
            })
            .sum()
    }
}

/// Chart components `dω_{abc}` of `dω` at `p`.
pub fn domega_tensor(space: &TwistorSpace, p: &TwistorPoint, step: f64) -> [[[f64; 6]; 6]; 6] {
    let omega_matrix = |chart: SphereChart, y: &Vector6<f64>| {
        let q = space.point_at(chart, y);
        let basis: Vec<TwistorTangent> = (0..6)
            .map(|k| {
                q.from_chart(&ChartVec::from_fn(|r, _| {
                    C64::new(if r == k { 1.0 } else { 0.0 }, 0.0)
                }))
            })
            .collect();
        let mut m = nalgebra::Matrix6::<f64>::zeros();
        for b in 0..6 {
            for c in (b + 1)..6 {
                let v = q.omega(&basis[b], &basis[c]).re;
                m[(b, c)] = v;
                m[(c, b)] = -v;
            }
        }
        m
    };
    let y0 = p.chart_coords();
    let deriv: Vec<nalgebra::Matrix6<f64>> = (0..6)
        .map(|a| {
            let mut yp = y0;
            let mut ym = y0;
            yp[a] += step;
            ym[a] -= step;
            (omega_matrix(p.chart, &yp) - omega_matrix(p.chart, &ym)) / (2.0 * step)
        })
        .collect();
    let mut t = [[[0.0; 6]; 6]; 6];
    for a in 0..6 {
        for b in 0..6 {
            for c in 0..6 {
                t[a][b][c] = deriv[a][(b, c)] - deriv[b][(a, c)] + deriv[c][(a, b)];
            }
        }
    }
    t
}

fn contract(t: &[[[f64; 6]; 6]; 6], u: &ChartVec, v: &ChartVec, w: &ChartVec) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for a in 0..6 {
        if u[a] == C64::new(0.0, 0.0) {
            continue;
        }
        for b in 0..6 {
            let ub = u[a] * v[b];
            for c in 0..6 {
                acc += ub * w[c] * t[a][b][c];
            }
        }
    }
    acc
}

/// The chart tensor of `dω` at one point, for repeated contraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DOmegaTensor(pub [[[f64; 6]; 6]; 6]);

impl DOmegaTensor {
    pub fn at(space: &TwistorSpace, p: &TwistorPoint, step: f64) -> Self {
        DOmegaTensor(domega_tensor(space, p, step))
    }

    /// `dω(a, b, c)`, extended complex-trilinearly.
    pub fn eval(
        &self,
        p: &TwistorPoint,
        a: &TwistorTangent,
        b: &TwistorTangent,
        c: &TwistorTangent,
    ) -> C64 {
        contract(&self.0, &p.to_chart(a), &p.to_chart(b), &p.to_chart(c))
    }

    /// `d'ω(a, b, c)`: the terms with two `(1,0)` slots.
    pub fn eval_dprime(
        &self,
        p: &TwistorPoint,
        a: &TwistorTangent,
        b: &TwistorTangent,
        c: &TwistorTangent,
    ) -> C64 {
        let args = [a, b, c];
        let proj = |k: usize, kind| p.to_chart(&p.type_project(args[k], kind));
        let h: Vec<_> = (0..3).map(|k| proj(k, TypeKind::H)).collect();
        let a: Vec<_> = (0..3).map(|k| proj(k, TypeKind::A)).collect();
        let t = &self.0;
        contract(t, &a[0], &h[1], &h[2])
            + contract(t, &h[0], &a[1], &h[2])
            + contract(t, &h[0], &h[1], &a[2])
    }

    /// Largest component in absolute value.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .flatten()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `dω` through [`domega_tensor`].
#[derive(Debug, Clone, Copy)]
pub struct DOmega {
    pub step: f64,
}

impl Form for DOmega {
    fn degree(&self) -> usize {
        3
    }

    fn eval(&self, space: &TwistorSpace, p: &TwistorPoint, args: &[TwistorTangent]) -> C64 {
        DOmegaTensor::at(space, p, self.step).eval(p, &args[0], &args[1], &args[2])
    }
}

/// `d'ω`, the `(2,1)` part of `dω`.
#[derive(Debug, Clone, Copy)]
pub struct DPrimeOmega {
    pub step: f64,
}

impl Form for DPrimeOmega {
    fn degree(&self) -> usize {
        3
    }

    fn eval(&self, space: &TwistorSpace, p: &TwistorPoint, args: &[TwistorTangent]) -> C64 {
        DOmegaTensor::at(space, p, self.step).eval_dprime(p, &args[0], &args[1], &args[2])
    }
}

/// `dα(F_0, …, F_k)` at `p` by the invariant formula, with directional
/// derivatives of step `step` and brackets from [`lie_bracket_fd`].
pub fn exterior_derivative_fd(
    space: &TwistorSpace,
    form: &dyn Form,
    p: &TwistorPoint,
    fields: &[Field],
    step: f64,
) -> Result<C64> {
    let k = form.degree();
    if fields.len() != k + 1 {
        return Err(Error::Usage(format!(
            "d of a {k}-form takes {} fields, got {}",
            k + 1,
            fields.len()
        )));
    }
    let y0 = p.chart_coords();
    let sign = |n: usize| if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut total = C64::new(0.0, 0.0);
    for i in 0..=k {
        let w = p.to_chart(&fields[i].eval(space, p));
        let g = |chart: SphereChart, y: &Vector6<f64>| {
            let q = space.point_at(chart, y);
            let vals: Vec<TwistorTangent> = fields
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != i)
                .map(|(_, f)| f.eval(space, &q))
                .collect();
            form.eval(space, &q, &vals)
        };
        total += directional(p.chart, &y0, &w, step, g) * sign(i);
    }
    for i in 0..=k {
        for j in (i + 1)..=k {
            let br = lie_bracket_fd(space, &fields[i], &fields[j], p)?;
            let mut vals = vec![br];
            vals.extend(
                fields
                    .iter()
                    .enumerate()
                    .filter(|&(m, _)| m != i && m != j)
                    .map(|(_, f)| f.eval(space, p)),
            );
            total += form.eval(space, p, &vals) * sign(i + j);
        }
    }
    if total.re.is_finite() && total.im.is_finite() {
        Ok(total)
    } else {
        Err(Error::Numeric("non-finite exterior derivative".into()))
    }
}

/// `σ·i·d(d'ω)(F_0, …, F_3)`.
pub fn hessian_fd(
    space: &TwistorSpace,
    p: &TwistorPoint,
    fields: &[Field; 4],
    sigma: f64,
) -> Result<C64> {
    let inner = DPrimeOmega {
        step: space.fd.h_form,
    };
    let d = exterior_derivative_fd(space, &inner, p, fields, space.fd.h_nested)?;
    Ok(d * C64::new(0.0, sigma))
}

/// Measures the sign relating `i·d(d'ω)` to the flat-space value
/// `-½(U₂ᵃU₁ʰ)_{ij}` on `(𝓗θ_iʰ, U₁ʰ, 𝓗θ_jᵃ, U₂ᵃ)`. Returns `σ` and the
/// relative mismatch of the magnitudes.
pub fn calibrate_sign(fd: super::FdConfig) -> Result<(f64, f64)> {
    use crate::algebra::{to_complex, Skew4};
    let space = TwistorSpace::new(crate::riemann::MetricField::flat()).with_fd(fd);
    let p = space.point(
        &crate::riemann::Point4::new(0.1, -0.2, 0.05, 0.3),
        C64::new(0.35, -0.25),
    )?;
    let a1 = to_complex(Skew4::from_upper([0.4, -0.7, 0.2, 0.9, -0.3, 0.5]).matrix());
    let a2 = to_complex(Skew4::from_upper([-0.6, 0.1, 0.8, -0.2, 0.7, 0.3]).matrix());
    let (i, j) = (0, 2);
    let fields = [
        Field::Basic(i).typed(TypeKind::H),
        Field::hat(a1).typed(TypeKind::H),
        Field::Basic(j).typed(TypeKind::A),
        Field::hat(a2).typed(TypeKind::A),
    ];
    let raw = hessian_fd(&space, &p, &fields, 1.0)?;
    let u1h = p.type_project_vertical(&p.hat(&a1), TypeKind::H);
    let u2a = p.type_project_vertical(&p.hat(&a2), TypeKind::A);
    let want = (u2a * u1h)[(i, j)] * C64::new(-0.5, 0.0);
    if want.norm() < 1e-3 {
        return Err(Error::Numeric(
            "degenerate calibration configuration".into(),
        ));
    }
    let ratio = want / raw;
    let sigma = if ratio.re >= 0.0 { 1.0 } else { -1.0 };
    let mismatch = (ratio - C64::new(sigma, 0.0)).norm();
    if mismatch > 1e-2 {
        return Err(Error::Numeric(format!(
            "sign calibration failed: closed/FD ratio {ratio} is not ±1"
        )));
    }
    Ok((sigma, mismatch))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{to_complex, Skew4};
    use crate::riemann::{get_metric, MetricField, Point4};

    fn skew(s: [f64; 6]) -> crate::algebra::CMat4 {
        to_complex(Skew4::from_upper(s).matrix())
    }

    #[test]
    fn d_of_df_vanishes() {
        let space = TwistorSpace::new(get_metric("s4", &[1.1]).unwrap());
        let p = space
            .point(&Point4::new(0.1, 0.2, -0.1, 0.05), C64::new(0.3, 0.2))
            .unwrap();
        let f = ScalarForm(|q: &TwistorPoint| {
            C64::new(
                (q.x[0] * q.x[1]).sin() + q.u.abc()[2] * q.x[3] + q.xi.re * q.xi.im,
                0.0,
            )
        });
        let df = ExteriorDerivative {
            inner: f,
            step: 1e-3,
        };
        let fields = [
            Field::Basic(0),
            Field::hat(skew([0.2, 0.5, -0.3, 0.1, 0.4, -0.6])),
        ];
        let v = exterior_derivative_fd(&space, &df, &p, &fields, 5e-3).unwrap();
        assert!(v.norm() < 1e-5, "{v}");
    }

    #[test]
    fn type_components_sum_to_the_form() {
        let space = TwistorSpace::new(get_metric("conformal_bump", &[0.1]).unwrap());
        let p = space
            .point(&Point4::new(0.1, 0.2, -0.1, 0.05), C64::new(-0.3, 0.6))
            .unwrap();
        let args = [
            Field::Basic(1).eval(&space, &p),
            Field::hat(skew([0.2, 0.5, -0.3, 0.1, 0.4, -0.6])).eval(&space, &p),
            Field::Basic(3).eval(&space, &p),
        ];
        let full = DOmega { step: 1e-3 }.eval(&space, &p, &args);
        let total: C64 = (0..=3)
            .map(|n_h| {
                TypeComponent {
                    inner: DOmega { step: 1e-3 },
                    p: n_h,
                    q: 3 - n_h,
                }
                .eval(&space, &p, &args)
            })
            .sum();
        assert!((full - total).norm() < 1e-12);
        // on pure-type arguments the (2,1) part is the full value
        let typed = [
            p.type_project(&args[1], TypeKind::A),
            p.type_project(&args[0], TypeKind::H),
            p.type_project(&args[2], TypeKind::H),
        ];
        let d = DOmega { step: 1e-3 }.eval(&space, &p, &typed);
        let dp = DPrimeOmega { step: 1e-3 }.eval(&space, &p, &typed);
        let generic = TypeComponent {
            inner: DOmega { step: 1e-3 },
            p: 2,
            q: 1,
        }
        .eval(&space, &p, &typed);
        assert!((d - dp).norm() < 1e-12 && (d - generic).norm() < 1e-12);
    }

    #[test]
    fn tensor_and_generic_exterior_derivative_agree() {
        let space = TwistorSpace::new(get_metric("s4", &[1.3]).unwrap());
        let p = space
            .point(&Point4::new(0.1, -0.2, 0.0, 0.2), C64::new(0.1, 0.7))
            .unwrap();
        let args = [
            Field::hat(skew([0.3, 0.1, 0.2, -0.5, 0.4, 0.1])).eval(&space, &p),
            Field::Basic(0).eval(&space, &p),
            Field::Basic(2).eval(&space, &p),
        ];
        let a = DOmega { step: 1e-3 }.eval(&space, &p, &args);
        let b = ExteriorDerivative {
            inner: MetricForm,
            step: 1e-3,
        }
        .eval(&space, &p, &args);
        // different O(h²) stencils
        assert!((a - b).norm() < 1e-6, "{}", (a - b).norm());
    }

    #[test]
    fn arity_is_checked() {
        let space = TwistorSpace::new(MetricField::flat());
        let p = space.point(&Point4::zeros(), C64::new(0.0, 0.0)).unwrap();
        let r = exterior_derivative_fd(&space, &MetricForm, &p, &[Field::Basic(0)], 1e-3);
        assert!(matches!(r, Err(Error::Usage(_))));
    }

    #[test]
    fn calibrated_sign_is_negative() {
        let (sigma, mismatch) = calibrate_sign(super::super::FdConfig::default()).unwrap();
        assert_eq!(sigma, -1.0);
        assert!(mismatch < 1e-4);
    }
}
