//! The verification suites. Each suite sweeps seeded samples, compares
//! closed-form values with independent finite-difference values and
//! returns the aggregated residuals plus named side checks.

use rand::Rng;
use rayon::prelude::*;

use super::sampling::{self, rng, Stream};
use super::{Check, Suite, SuiteRun};
use crate::algebra::{
    bracket, phi, phi_inv, respects_orientation, selfdual_basis, to_complex, Bivector6, CMat4, Mat4,
};
use crate::cycles::{self, ChartMode, Quadrature, Section};
use crate::error::{Error, Result};
use crate::riemann::{orthonormal_frame, MetricKind};
use crate::twistor::{
    domega_closed, dprime_omega_closed, hessian_closed_asd, hessian_closed_hk, hessian_fd,
    lie_bracket_fd, nijenhuis, CVec4, DOmegaTensor, DPrimeCase, Field, HessianSlot, TwistorPoint,
    TwistorSpace, TwistorTangent, TypeKind,
};
use crate::C64;

/// References smaller than this in magnitude are skipped for relative
/// errors: several closed forms vanish analytically and their computed
/// values are pure roundoff.
const REL_FLOOR: f64 = 1e-3;

/// Running maxima of absolute and relative residuals.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Residuals {
    pub max_abs: f64,
    pub max_rel: f64,
    pub non_finite: bool,
}

impl Residuals {
    pub fn add(&mut self, abs: f64, reference: f64) {
        if !abs.is_finite() {
            self.non_finite = true;
            return;
        }
        self.max_abs = self.max_abs.max(abs);
        if reference.abs() > REL_FLOOR {
            self.max_rel = self.max_rel.max(abs / reference.abs());
        }
    }

    /// `|got - want|` against `want`.
    pub fn compare(&mut self, got: C64, want: C64) {
        self.add((got - want).norm(), want.norm());
    }

    pub fn merge(&mut self, other: &Residuals) {
        self.max_abs = self.max_abs.max(other.max_abs);
        self.max_rel = self.max_rel.max(other.max_rel);
        self.non_finite |= other.non_finite;
    }
}

/// What a suite hands back to the orchestrator.
#[derive(Debug, Clone, Default)]
pub struct SuiteBody {
    pub residuals: Residuals,
    /// Judge by `max_rel` instead of `max_abs`.
    pub relative: bool,
    pub checks: Vec<Check>,
    pub diagnostics: Vec<String>,
    pub fitted: Option<(f64, f64)>,
}

impl SuiteBody {
    fn absolute() -> Self {
        SuiteBody::default()
    }

    fn relative() -> Self {
        SuiteBody {
            relative: true,
            ..SuiteBody::default()
        }
    }

    /// Folds per-sample results in sample order; failed samples become
    /// diagnostics.
    fn absorb<T>(&mut self, results: Vec<Result<T>>, mut each: impl FnMut(&mut Self, T)) {
        for (k, r) in results.into_iter().enumerate() {
            match r {
                Ok(v) => each(self, v),
                Err(e) => {
                    self.residuals.non_finite = true;
                    self.diagnostics.push(format!("sample {k}: {e}"));
                }
            }
        }
    }

    fn check_at_most(&mut self, name: &str, value: f64, bound: f64) {
        self.checks.push(Check::at_most(name, value, bound));
    }

    fn check_at_least(&mut self, name: &str, value: f64, bound: f64) {
        self.checks.push(Check::at_least(name, value, bound));
    }
}

fn sweep<T: Send>(n: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Vec<Result<T>> {
    (0..n).into_par_iter().map(f).collect()
}

fn basis(i: usize) -> CVec4 {
    CVec4::from_fn(|k, _| C64::new(if k == i { 1.0 } else { 0.0 }, 0.0))
}

fn space_for(run: &SuiteRun) -> TwistorSpace {
    TwistorSpace::new(run.metric.clone()).with_fd(run.fd)
}

pub(super) fn run(run: &SuiteRun, sigma: Option<f64>) -> Result<SuiteBody> {
    match run.suite {
        Suite::Algebra => algebra(run),
        Suite::Brackets => brackets(run),
        Suite::Domega => domega(run),
        Suite::Dprime => dprime(run),
        Suite::Kaehler => kaehler(run),
        Suite::HessianAsd => hessian(run, sigma, false),
        Suite::HessianHk => hessian(run, sigma, true),
        Suite::Nijenhuis => nijenhuis_suite(run),
        Suite::CyclesVol => cycles_vol(run),
        Suite::CyclesLevi => cycles_levi(run),
    }
}

/// Commuting of `Λ+`- and `Λ-`-side structures, with the basic algebraic
/// identities of compatible structures.
fn algebra(run: &SuiteRun) -> Result<SuiteBody> {
    let p = selfdual_basis();
    let side = |abc: nalgebra::Vector3<f64>, offset: usize| -> Mat4 {
        let comps = (0..3).fold(nalgebra::Vector6::zeros(), |acc, k| {
            acc + p.row(offset + k).transpose() * (abc[k] * 2f64.sqrt())
        });
        phi_inv(&Bivector6::new(comps))
    };
    let results = sweep(run.samples, |k| {
        let mut r = rng(run.seed, Stream::Sample, k);
        let u = side(sampling::unit3(&mut r), 0);
        let v = side(sampling::unit3(&mut r), 3);
        let comm = bracket(&u, &v).amax();
        let square = (u * u + Mat4::identity())
            .amax()
            .max((v * v + Mat4::identity()).amax());
        let orient = respects_orientation(&u)? && !respects_orientation(&v)?;
        // |φ(A)|² / g₀(A, A) for a random skew A
        let a = Mat4::from_fn(|_, _| r.random_range(-1.0..1.0));
        let a = a - a.transpose();
        let scale = phi(&a).dot(&phi(&a)) / crate::algebra::g0_inner(&a, &a);
        Ok((comm, square, orient, scale))
    });
    let mut body = SuiteBody::absolute();
    let (mut square, mut misoriented, mut lo, mut hi) =
        (0.0f64, 0usize, f64::INFINITY, f64::NEG_INFINITY);
    body.absorb(results, |b, (comm, sq, orient, scale)| {
        b.residuals.add(comm, 0.0);
        square = square.max(sq);
        misoriented += usize::from(!orient);
        lo = lo.min(scale);
        hi = hi.max(scale);
    });
    body.check_at_most("u² = -Id", square, run.tolerance);
    body.check_at_most("orientation misclassified", misoriented as f64, 0.0);
    body.check_at_most("spread of |φ(A)|²/g₀(A,A)", hi - lo, run.tolerance);
    Ok(body)
}

/// `[θ_i, θ_j]` on the base, from a direct difference of the frame field,
/// in frame components.
fn frame_bracket(run: &SuiteRun, p: &TwistorPoint, i: usize, j: usize) -> Result<CVec4> {
    let h = 1e-5;
    let dtheta = |dir: nalgebra::Vector4<f64>| -> Result<Mat4> {
        let fp = orthonormal_frame(&run.metric, &(p.x + dir * h))?.theta;
        let fm = orthonormal_frame(&run.metric, &(p.x - dir * h))?.theta;
        Ok((fp - fm) / (2.0 * h))
    };
    let ti = p.theta.column(i).into_owned();
    let tj = p.theta.column(j).into_owned();
    let lie = dtheta(ti)?.column(j) - dtheta(tj)?.column(i);
    let inv = p
        .theta
        .try_inverse()
        .ok_or_else(|| Error::Numeric("singular frame".into()))?;
    Ok((inv * lie).map(|c| C64::new(c, 0.0)))
}

/// Bracket identities for basic lifts and hatted sections, `𝕁`-linearity
/// of brackets with basic lifts, and the type of `[𝓗θ_i, Û]`.
fn brackets(run: &SuiteRun) -> Result<SuiteBody> {
    let space = space_for(run);
    let results = sweep(run.samples, |k| {
        let mut r = rng(run.seed, Stream::Sample, k);
        let p = sampling::twistor_point(&mut r, &space)?;
        let a = sampling::skew(&mut r);
        let b = sampling::skew(&mut r);
        let slope: [CMat4; 4] =
            std::array::from_fn(|_| sampling::skew(&mut r) * C64::new(0.5, 0.0));
        let (i, j) = sampling::index_pair(&mut r);
        let br = |f: &Field, g: &Field| lie_bracket_fd(&space, f, g, &p);
        let mut res = Residuals::default();
        let mut add = |got: TwistorTangent, want: TwistorTangent| {
            res.add((got - want).norm_max(), want.norm_max())
        };

        // [Â, B̂] = [A, B]^
        add(
            br(&Field::hat(a), &Field::hat(b))?,
            p.vertical(p.hat(&bracket(&a, &b))),
        );
        // [𝓗θ_i, Â] = (θ_i·A)^ + [η(θ_i), A]^ for A(x) = a + Σ x_k slope_k
        let section = Field::Hat { a0: a, slope };
        let ax = (0..4).fold(a, |acc, m| acc + slope[m] * C64::new(p.x[m], 0.0));
        let dir = (0..4).fold(CMat4::zeros(), |acc, m| {
            acc + slope[m] * C64::new(p.theta[(m, i)], 0.0)
        });
        let eta = p.eta(&basis(i));
        add(
            br(&Field::Basic(i), &section)?,
            p.vertical(p.hat(&(dir + bracket(&eta, &ax)))),
        );
        // [𝓗θ_i, 𝓗θ_j] = 𝓗[θ_i, θ_j] - R(θ_i∧θ_j)^
        let curv = space.curvature_at(&p)?;
        let lifted = p.horizontal_lift_frame(&frame_bracket(run, &p, i, j)?);
        let rhat = p.vertical(p.hat(&to_complex(&curv.endo[i][j])));
        add(br(&Field::Basic(i), &Field::Basic(j))?, lifted - rhat);

        // 𝕁-linearity
        let hi = Field::Basic(i);
        let ua = Field::hat(a);
        add(br(&hi, &ua.clone().j())?, p.j_apply(&br(&hi, &ua)?));
        let jhi = hi.clone().j();
        add(
            p.vertical_projection(&br(&jhi, &ua.clone().j())?),
            p.j_apply(&p.vertical_projection(&br(&jhi, &ua)?)),
        );
        // bracket type: 𝓗[𝓗θ_i, U] = 0, 𝓗[𝕁𝓗θ_i, U] = -U(𝓗θ_i)
        let u = p.hat(&a);
        add(
            p.horizontal_projection(&br(&hi, &ua)?),
            TwistorTangent::zero(),
        );
        add(
            p.horizontal_projection(&br(&jhi, &ua)?),
            p.horizontal_lift_frame(&(-(u * basis(i)))),
        );
        // typed refinements with factors ±i/2
        for (hk, sign) in [(TypeKind::H, 1.0), (TypeKind::A, -1.0)] {
            for uk in [TypeKind::H, TypeKind::A] {
                let got =
                    p.horizontal_projection(&br(&hi.clone().typed(hk), &ua.clone().typed(uk))?);
                let image = p.type_project_frame(&(p.type_project_vertical(&u, uk) * basis(i)), uk);
                add(
                    got,
                    p.horizontal_lift_frame(&(image * C64::new(0.0, 0.5 * sign))),
                );
            }
        }
        Ok(res)
    });
    let mut body = SuiteBody::absolute();
    body.absorb(results, |b, r| b.residuals.merge(&r));
    Ok(body)
}

/// `dω` on pure directions: the `(V, H, H)` slot against its closed form,
/// every other pure-direction triple against zero.
fn domega(run: &SuiteRun) -> Result<SuiteBody> {
    let space = space_for(run);
    let flat = run.metric.kind() == MetricKind::Flat;
    let results = sweep(run.samples, |k| {
        let mut r = rng(run.seed, Stream::Sample, k);
        let p = sampling::twistor_point(&mut r, &space)?;
        let t = DOmegaTensor::at(&space, &p, space.fd.h_form);
        let (a1, a2) = (sampling::skew(&mut r), sampling::skew(&mut r));
        let (u1, u2) = (p.hat(&a1), p.hat(&a2));
        let (v1, v2) = (p.vertical(u1), p.vertical(u2));
        let h: Vec<TwistorTangent> = (0..4).map(|i| Field::Basic(i).eval(&space, &p)).collect();
        let mut res = Residuals::default();
        let mut flat_gap = 0.0f64;
        for i in 0..4 {
            for j in (i + 1)..4 {
                let want = domega_closed(&space, &p, &u1, &basis(i), &basis(j))?;
                res.compare(t.eval(&p, &v1, &h[i], &h[j]), want);
                if flat {
                    flat_gap = flat_gap.max((want + u1[(i, j)]).norm());
                }
                for m in (j + 1)..4 {
                    res.compare(t.eval(&p, &h[i], &h[j], &h[m]), C64::new(0.0, 0.0));
                }
            }
            res.compare(t.eval(&p, &v1, &v2, &h[i]), C64::new(0.0, 0.0));
        }
        res.compare(t.eval(&p, &v1, &v2, &(v1 + v2)), C64::new(0.0, 0.0));
        Ok((res, flat_gap))
    });
    let mut body = SuiteBody::absolute();
    let mut gap = 0.0f64;
    body.absorb(results, |b, (r, g)| {
        b.residuals.merge(&r);
        gap = gap.max(g);
    });
    if flat {
        body.check_at_most("flat closed form = -U_ij", gap, 1e-12);
    }
    Ok(body)
}

/// The two displayed values of `d'ω` against the `(2,1)` projection of the
/// finite-difference `dω`.
fn dprime(run: &SuiteRun) -> Result<SuiteBody> {
    let space = space_for(run);
    let flat = run.metric.kind() == MetricKind::Flat;
    let results = sweep(run.samples, |k| {
        let mut r = rng(run.seed, Stream::Sample, k);
        let p = sampling::twistor_point(&mut r, &space)?;
        let t = DOmegaTensor::at(&space, &p, space.fd.h_form);
        let u = p.hat(&sampling::skew(&mut r));
        let v = p.vertical(u);
        let (vh, va) = (
            p.type_project(&v, TypeKind::H),
            p.type_project(&v, TypeKind::A),
        );
        let ua = p.type_project_vertical(&u, TypeKind::A);
        let typed = |i: usize, kind| p.type_project(&Field::Basic(i).eval(&space, &p), kind);
        let mut res = Residuals::default();
        let mut flat_gap = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    continue;
                }
                let first = dprime_omega_closed(&space, &p, &DPrimeCase::I { u, i, j })?;
                res.compare(
                    t.eval_dprime(&p, &va, &typed(i, TypeKind::H), &typed(j, TypeKind::H)),
                    first,
                );
                let second = dprime_omega_closed(&space, &p, &DPrimeCase::II { u, i, j })?;
                res.compare(
                    t.eval_dprime(&p, &vh, &typed(i, TypeKind::H), &typed(j, TypeKind::A)),
                    second,
                );
                if flat {
                    flat_gap = flat_gap.max((first + ua[(i, j)]).norm()).max(second.norm());
                }
            }
        }
        Ok((res, flat_gap))
    });
    let mut body = SuiteBody::absolute();
    let mut gap = 0.0f64;
    body.absorb(results, |b, (r, g)| {
        b.residuals.merge(&r);
        gap = gap.max(g);
    });
    if flat {
        body.check_at_most("flat closed forms = (-Uᵃ_ij, 0)", gap, 1e-12);
    }
    Ok(body)
}

/// The Kähler criterion: the residual is `max |dω|` together with the
/// distance of `R|Λ+` from `½ Id`; agreement of the `(V, H, H)` slot with
/// its closed form is a side check.
fn kaehler(run: &SuiteRun) -> Result<SuiteBody> {
    let space = space_for(run);
    let results = sweep(run.samples, |k| {
        let mut r = rng(run.seed, Stream::Sample, k);
        let p = sampling::twistor_point(&mut r, &space)?;
        let t = DOmegaTensor::at(&space, &p, space.fd.h_form);
        let curv = space.curvature_at(&p)?;
        let plus_gap = (curv.plus_block() - nalgebra::Matrix3::identity() * 0.5).amax();
        let u = p.hat(&sampling::skew(&mut r));
        let (i, j) = sampling::index_pair(&mut r);
        let h = |m: usize| Field::Basic(m).eval(&space, &p);
        let got = t.eval(&p, &p.vertical(u), &h(i), &h(j));
        let want = domega_closed(&space, &p, &u, &basis(i), &basis(j))?;
        Ok((t.max_abs(), plus_gap, (got - want).norm()))
    });
    let mut body = SuiteBody::absolute();
    let mut agreement = 0.0f64;
    body.absorb(results, |b, (dw, plus, agree)| {
        b.residuals.add(dw, 0.0);
        b.residuals.add(plus, 0.5);
        agreement = agreement.max(agree);
    });
    body.check_at_most("closed form vs FD on (V,H,H)", agreement, run.tolerance);
    Ok(body)
}

/// Canonical direction patterns `(h, h, a, a)` of the hessian, `false` for a
/// basic lift and `true` for a hatted section.
const PATTERNS: [[bool; 4]; 9] = [
    [true, true, true, true],
    [true, true, false, true],
    [false, true, true, true],
    [false, false, true, true],
    [true, true, false, false],
    [false, true, false, true],
    [false, false, false, true],
    [false, true, false, false],
    [false, false, false, false],
];

const KINDS: [TypeKind; 4] = [TypeKind::H, TypeKind::H, TypeKind::A, TypeKind::A];

fn slots_for(
    pattern: &[bool; 4],
    kinds: &[TypeKind; 4],
    idx: &[usize; 4],
    mats: &[CMat4; 4],
) -> Vec<HessianSlot> {
    (0..4)
        .map(|m| {
            if pattern[m] {
                HessianSlot::vertical(mats[m], kinds[m])
            } else {
                HessianSlot::horizontal(idx[m], kinds[m])
            }
        })
        .collect()
}

fn shuffle(r: &mut impl Rng, slots: &mut [HessianSlot]) {
    for m in (1..slots.len()).rev() {
        let n = r.random_range(0..=m);
        slots.swap(m, n);
    }
}

/// The hessian `σ·i·d(d'ω)` on every pure-direction `(2,2)` pattern against
/// the closed forms; the flat hyperkähler variant also checks that the
/// `(3,1)` and `(1,3)` patterns vanish.
fn hessian(run: &SuiteRun, sigma: Option<f64>, hyperkaehler: bool) -> Result<SuiteBody> {
    let sigma =
        sigma.ok_or_else(|| Error::Numeric("the hessian suites need a calibrated sign".into()))?;
    let space = space_for(run);
    let results = sweep(run.samples, |k| {
        let mut r = rng(run.seed, Stream::Sample, k);
        let p = sampling::twistor_point(&mut r, &space)?;
        let (i, j) = sampling::index_pair(&mut r);
        let (kk, l) = sampling::index_pair(&mut r);
        let idx = [i, j, kk, l];
        let mats: [CMat4; 4] = std::array::from_fn(|_| sampling::skew(&mut r));
        let mut res = Residuals::default();
        for pattern in &PATTERNS {
            let mut slots = slots_for(pattern, &KINDS, &idx, &mats);
            shuffle(&mut r, &mut slots);
            let fields: [Field; 4] = std::array::from_fn(|m| slots[m].field());
            let got = hessian_fd(&space, &p, &fields, sigma)?;
            let want = if hyperkaehler {
                hessian_closed_hk(&p, &slots)?
            } else {
                hessian_closed_asd(&space, &p, &slots)?
            };
            res.compare(got, want);
        }
        if hyperkaehler {
            for kinds in [
                [TypeKind::H, TypeKind::H, TypeKind::H, TypeKind::A],
                [TypeKind::H, TypeKind::A, TypeKind::A, TypeKind::A],
            ] {
                let pattern: [bool; 4] = std::array::from_fn(|_| r.random_bool(0.5));
                let slots = slots_for(&pattern, &kinds, &idx, &mats);
                let fields: [Field; 4] = std::array::from_fn(|m| slots[m].field());
                res.compare(hessian_fd(&space, &p, &fields, sigma)?, C64::new(0.0, 0.0));
            }
        }
        Ok(res)
    });
    let mut body = SuiteBody::absolute();
    body.absorb(results, |b, r| b.residuals.merge(&r));
    Ok(body)
}

/// Threshold on `|W+|` above which the metric counts as not anti-self-dual
/// at a sample.
const W_PLUS_FLOOR: f64 = 1e-3;

/// `|N(v, w)|` for random tangents. For metrics outside the anti-self-dual
/// registry, also checks that `N` is detected wherever `W+` is nonzero.
fn nijenhuis_suite(run: &SuiteRun) -> Result<SuiteBody> {
    let space = space_for(run);
    let results = sweep(run.samples, |k| {
        let mut r = rng(run.seed, Stream::Sample, k);
        let p = sampling::twistor_point(&mut r, &space)?;
        let v = sampling::tangent(&mut r, &p);
        let w = sampling::tangent(&mut r, &p);
        let n = nijenhuis(&space, &p, &v, &w)?.norm_max();
        let w_plus = space.curvature_at(&p)?.w_plus.amax();
        Ok((n, w_plus))
    });
    let mut body = SuiteBody::absolute();
    let (mut n_where_w, mut w_max) = (0.0f64, 0.0f64);
    body.absorb(results, |b, (n, w)| {
        b.residuals.add(n, 0.0);
        w_max = w_max.max(w);
        if w > W_PLUS_FLOOR {
            n_where_w = n_where_w.max(n);
        }
    });
    if matches!(run.metric.kind(), MetricKind::Perturbed { .. }) {
        body.check_at_least("max |W+| over samples", w_max, W_PLUS_FLOOR);
        body.check_at_least("max |N| where |W+| > 1e-3", n_where_w, 10.0 * run.tolerance);
    }
    Ok(body)
}

/// `V₀` from twistor lines and `κ` fitted on separate sections.
pub struct FittedVolume {
    pub v0: f64,
    pub kappa: f64,
    /// Largest relative spread of the twistor-line volumes around `V₀`.
    pub line_spread: f64,
    pub split: (f64, f64),
}

const FIT_SECTIONS: usize = 20;
const REFERENCE_LINES: usize = 4;

fn quadrature(run: &SuiteRun) -> Result<Quadrature> {
    Quadrature::new(run.quadrature.0, run.quadrature.1)
}

pub fn fit_volume(seed: u64, q: &Quadrature) -> Result<FittedVolume> {
    let lines: Vec<f64> = (0..REFERENCE_LINES)
        .into_par_iter()
        .map(|k| {
            let mut r = rng(seed, Stream::Reference, k);
            let (a, b) = (
                sampling::complex(&mut r, 1.0),
                sampling::complex(&mut r, 1.0),
            );
            cycles::vol_in_charts(&Section::twistor_line(a, b), q, ChartMode::Split)
        })
        .collect();
    let v0 = lines[0];
    let line_spread = lines
        .iter()
        .fold(0.0f64, |m, v| m.max((v / v0 - 1.0).abs()));
    let sections: Vec<Section> = (0..FIT_SECTIONS)
        .map(|k| sampling::section(&mut rng(seed, Stream::Fit, k), 0.5))
        .collect();
    let vols: Vec<f64> = sections
        .par_iter()
        .map(|s| cycles::vol_in_charts(s, q, ChartMode::Split))
        .collect();
    let kappa = cycles::fit_kappa(&sections, &vols, v0)?;
    let split = cycles::fit_split_coefficients(&sections, &vols, v0)?;
    Ok(FittedVolume {
        v0,
        kappa,
        line_spread,
        split,
    })
}

/// A section with prescribed transverse part `(a - d̄, b̄ + c) = (p, q)`
/// plus the twistor line `(a₀, b₀)`.
fn with_transverse(p: C64, q: C64, a0: C64, b0: C64) -> Section {
    let half = C64::new(0.5, 0.0);
    Section::twistor_line(a0, b0)
        + Section::new(p * half, q.conj() * half, q * half, -p.conj() * half)
}

/// Volumes of random sections against the fitted quadratic law.
fn cycles_vol(run: &SuiteRun) -> Result<SuiteBody> {
    let q = quadrature(run)?;
    let fit = fit_volume(run.seed, &q)?;
    let v0 = fit.v0;
    let results = sweep(run.samples, |k| {
        let mut r = rng(run.seed, Stream::Sample, k);
        let s = sampling::section(&mut r, 0.5);
        let vol = cycles::vol(&s, &q);
        // same transverse moduli, rotated phases, another twistor line
        let (p, qq) = s.transverse_part();
        let rot = |z: C64, r: &mut rand_chacha::ChaCha8Rng| {
            z * C64::from_polar(1.0, r.random_range(0.0..std::f64::consts::TAU))
        };
        let twin = with_transverse(
            rot(p, &mut r),
            rot(qq, &mut r),
            sampling::complex(&mut r, 0.5),
            sampling::complex(&mut r, 0.5),
        );
        let twin_vol = cycles::vol_in_charts(&twin, &q, ChartMode::Split);
        let charts = if k < 3 {
            let n = cycles::vol_in_charts(&s, &q, ChartMode::North);
            let so = cycles::vol_in_charts(&s, &q, ChartMode::South);
            ((n - vol.value).abs().max((so - vol.value).abs())) / vol.value
        } else {
            0.0
        };
        Ok((s, vol, twin_vol, charts))
    });
    let mut body = SuiteBody::relative();
    let (mut min_excess, mut twin_gap, mut chart_gap, mut warnings) =
        (f64::INFINITY, 0.0f64, 0.0f64, 0usize);
    body.absorb(results, |b, (s, vol, twin, charts)| {
        let closed = cycles::vol_closed(&s, v0, fit.kappa);
        b.residuals.add((vol.value - closed).abs(), vol.value);
        min_excess = min_excess.min(vol.value / v0 - 1.0);
        twin_gap = twin_gap.max((twin - vol.value).abs() / vol.value);
        chart_gap = chart_gap.max(charts);
        warnings += usize::from(vol.accuracy_warning);
    });
    let eight_pi = 8.0 * std::f64::consts::PI;
    body.check_at_most("|V₀/8π - 1|", (v0 / eight_pi - 1.0).abs(), 1e-4);
    body.check_at_most("twistor-line volume spread", fit.line_spread, 1e-4);
    body.check_at_least("κ", fit.kappa, f64::MIN_POSITIVE);
    body.check_at_least("min vol/V₀ - 1", min_excess, -1e-10);
    let (k1, k2) = fit.split;
    body.check_at_most(
        "two-coefficient fit: |k₁ - k₂|/|k₁|",
        (k1 - k2).abs() / k1.abs(),
        1e-4,
    );
    body.check_at_most("dependence beyond transverse moduli", twin_gap, 1e-6);
    body.check_at_most("north/south chart consistency", chart_gap, 1e-6);
    body.check_at_most("quadrature accuracy warnings", warnings as f64, 0.0);
    body.fitted = Some((v0, fit.kappa));
    Ok(body)
}

/// The Levi form in random directions against `V₀κ(|α|²+|β|²+|γ|²+|δ|²)`,
/// plus its sign over a larger sweep.
pub const POSITIVITY_SAMPLES: usize = 200;

fn cycles_levi(run: &SuiteRun) -> Result<SuiteBody> {
    let q = quadrature(run)?;
    let fit = fit_volume(run.seed, &q)?;
    let eps = run.fd_step.unwrap_or(1e-2);
    let levi = |s: &Section, n: &Section| cycles::levi_form(s, n, eps, &q);
    let results = sweep(run.samples, |k| {
        let mut r = rng(run.seed, Stream::Sample, k);
        let (s, n) = (
            sampling::section(&mut r, 0.5),
            sampling::section(&mut r, 0.5),
        );
        Ok((levi(&s, &n)?, fit.v0 * fit.kappa * n.norm_sqr()))
    });
    let mut body = SuiteBody::relative();
    body.absorb(results, |b, (got, want)| {
        b.residuals.add((got - want).abs(), want)
    });

    let signs = sweep(POSITIVITY_SAMPLES, |k| {
        let mut r = rng(run.seed, Stream::Positivity, k);
        let (s, n) = (
            sampling::section(&mut r, 1.0),
            sampling::section(&mut r, 1.0),
        );
        levi(&s, &n)
    });
    let mut min_levi = f64::INFINITY;
    body.absorb(signs, |_, v| min_levi = min_levi.min(v));
    body.check_at_least("min Levi form", min_levi, -1e-6);

    // the Levi form does not see the base section
    let n0 = sampling::section(&mut rng(run.seed, Stream::Auxiliary, 0), 0.5);
    let bases = sweep(5, |k| {
        levi(
            &sampling::section(&mut rng(run.seed, Stream::Auxiliary, k + 1), 1.0),
            &n0,
        )
    });
    let mut vals = Vec::new();
    body.absorb(bases, |_, v| vals.push(v));
    if let Some(first) = vals.first().copied() {
        let spread = vals.iter().fold(0.0f64, |m, v| m.max((v - first).abs())) / first.abs();
        body.check_at_most("spread over base sections", spread, 1e-3);
    }
    body.fitted = Some((fit.v0, fit.kappa));
    Ok(body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residuals_track_maxima_and_non_finite() {
        let mut r = Residuals::default();
        r.add(1e-3, 0.0);
        r.add(1e-4, 1e-2);
        assert_eq!((r.max_abs, r.max_rel), (1e-3, 1e-2));
        r.add(f64::NAN, 1.0);
        assert!(r.non_finite);
        assert_eq!(r.max_abs, 1e-3);
    }

    #[test]
    fn transverse_construction() {
        let (p, q, a0, b0) = (
            C64::new(0.3, -0.1),
            C64::new(-0.2, 0.5),
            C64::new(1.0, 2.0),
            C64::new(-0.7, 0.4),
        );
        let (pp, qq) = with_transverse(p, q, a0, b0).transverse_part();
        assert!((pp - p).norm() < 1e-15 && (qq - q).norm() < 1e-15);
    }

    #[test]
    fn patterns_cover_every_direction_split_once() {
        let mut seen: Vec<[bool; 4]> = PATTERNS.to_vec();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 9);
        for p in PATTERNS {
            // canonical order: basic lifts before sections within each type
            assert!(p[0] <= p[1] && p[2] <= p[3]);
        }
    }
}
