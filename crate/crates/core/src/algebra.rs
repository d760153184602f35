//! Exact linear algebra of `R^4`: skew matrices, bivectors, the self-dual
//! splitting `Λ² = Λ+ ⊕ Λ-` and compatible complex structures.
//!
//! Everything here is generic over real or complex scalars where the
//! complexified objects are needed (type projections of frame vectors).
//! Inner products extend complex-bilinearly, never hermitian.

use nalgebra::{ComplexField, Matrix4, Vector3, Vector4, Vector6};

use crate::error::{Error, Result};
use crate::C64;

pub type Mat4 = Matrix4<f64>;
pub type CMat4 = Matrix4<C64>;

/// Index pairs `(i, j)`, `i < j`, of the lexicographic bivector basis
/// `e1∧e2, e1∧e3, e1∧e4, e2∧e3, e2∧e4, e3∧e4`.
pub const BIVECTOR_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Position of `e_i∧e_j` in the lexicographic basis, with the sign of the
/// reordering when `i > j`. `None` on the diagonal.
pub fn bivector_index(i: usize, j: usize) -> Option<(usize, f64)> {
    if i == j {
        return None;
    }
    let (a, b, sign) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
    BIVECTOR_PAIRS
        .iter()
        .position(|&p| p == (a, b))
        .map(|k| (k, sign))
}

/// The quaternionic structure `I` (left multiplication by `i`).
pub fn quat_i() -> Mat4 {
    Mat4::new(
        0.0, -1.0, 0.0, 0.0, //
        1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, -1.0, //
        0.0, 0.0, 1.0, 0.0,
    )
}

pub fn quat_j() -> Mat4 {
    Mat4::new(
        0.0, 0.0, -1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        1.0, 0.0, 0.0, 0.0, //
        0.0, -1.0, 0.0, 0.0,
    )
}

pub fn quat_k() -> Mat4 {
    Mat4::new(
        0.0, 0.0, 0.0, -1.0, //
        0.0, 0.0, -1.0, 0.0, //
        0.0, 1.0, 0.0, 0.0, //
        1.0, 0.0, 0.0, 0.0,
    )
}

/// Real 4x4 matrix that is antisymmetric to machine precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Skew4(Mat4);

impl Skew4 {
    /// Accepts `m` if `‖m + mᵀ‖∞ ≤ tol·max(1, ‖m‖∞)` and returns its exact
    /// antisymmetric part.
    pub fn new(m: Mat4, tol: f64) -> Result<Self> {
        let scale = m.amax().max(1.0);
        let defect = (m + m.transpose()).amax();
        if !defect.is_finite() || defect > tol * scale {
            return Err(Error::Domain(format!(
                "matrix is not antisymmetric (defect {defect:e})"
            )));
        }
        Ok(Self::antisymmetrize(&m))
    }

    /// `(m - mᵀ)/2`.
    pub fn antisymmetrize(m: &Mat4) -> Self {
        Skew4((m - m.transpose()) * 0.5)
    }

    /// Builds the matrix whose strictly-upper entries `(i, j)` in
    /// [`BIVECTOR_PAIRS`] order are `upper`.
    pub fn from_upper(upper: [f64; 6]) -> Self {
        let mut m = Mat4::zeros();
        for (k, &(i, j)) in BIVECTOR_PAIRS.iter().enumerate() {
            m[(i, j)] = upper[k];
            m[(j, i)] = -upper[k];
        }
        Skew4(m)
    }

    pub fn zero() -> Self {
        Skew4(Mat4::zeros())
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn into_matrix(self) -> Mat4 {
        self.0
    }

    pub fn to_complex(&self) -> CMat4 {
        self.0.map(|v| C64::new(v, 0.0))
    }
}

/// Element of `Λ²R^4` (possibly complexified) in the lexicographic basis,
/// which is orthonormal for the induced inner product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bivector6<T: nalgebra::Scalar = f64> {
    pub components: Vector6<T>,
}

impl<T: ComplexField<RealField = f64> + Copy> Bivector6<T> {
    pub fn new(components: Vector6<T>) -> Self {
        Self { components }
    }

    pub fn zero() -> Self {
        Self {
            components: Vector6::zeros(),
        }
    }

    /// Basis element `e_i∧e_j` (signed when `i > j`).
    pub fn basis(i: usize, j: usize) -> Self {
        let mut b = Self::zero();
        if let Some((k, sign)) = bivector_index(i, j) {
            b.components[k] = T::from_real(sign);
        }
        b
    }

    /// Bilinear inner product.
    pub fn dot(&self, other: &Self) -> T {
        self.components
            .iter()
            .zip(other.components.iter())
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }
}

/// `v∧w` with components `v_i w_j - v_j w_i`.
pub fn wedge<T: ComplexField<RealField = f64> + Copy>(
    v: &Vector4<T>,
    w: &Vector4<T>,
) -> Bivector6<T> {
    let mut c = Vector6::zeros();
    for (k, &(i, j)) in BIVECTOR_PAIRS.iter().enumerate() {
        c[k] = v[i] * w[j] - v[j] * w[i];
    }
    Bivector6::new(c)
}

/// The bivector `φ(A)` defined by `⟨φ(A), V∧W⟩ = ⟨AV, W⟩`.
///
/// Expanding on basis vectors gives `φ(A)_{ij} = A_{ji}` for `i < j`.
pub fn phi<T: ComplexField<RealField = f64> + Copy>(a: &Matrix4<T>) -> Bivector6<T> {
    let mut c = Vector6::zeros();
    for (k, &(i, j)) in BIVECTOR_PAIRS.iter().enumerate() {
        c[k] = a[(j, i)];
    }
    Bivector6::new(c)
}

pub fn phi_inv<T: ComplexField<RealField = f64> + Copy>(b: &Bivector6<T>) -> Matrix4<T> {
    let mut m = Matrix4::zeros();
    for (k, &(i, j)) in BIVECTOR_PAIRS.iter().enumerate() {
        m[(j, i)] = b.components[k];
        m[(i, j)] = -b.components[k];
    }
    m
}

/// Rows are the unit vectors spanning `Λ+` (rows 0..3) then `Λ-` (rows 3..6):
///
/// `Λ+`: `e12+e34, e13-e24, e14+e23`; `Λ-`: `e12-e34, e13+e24, e14-e23`, each over `√2`.
pub fn selfdual_basis() -> nalgebra::Matrix6<f64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    #[rustfmt::skip]
    let m = nalgebra::Matrix6::new(
        r, 0.0, 0.0, 0.0, 0.0, r,
        0.0, r, 0.0, 0.0, -r, 0.0,
        0.0, 0.0, r, r, 0.0, 0.0,
        r, 0.0, 0.0, 0.0, 0.0, -r,
        0.0, r, 0.0, 0.0, r, 0.0,
        0.0, 0.0, r, -r, 0.0, 0.0,
    );
    m
}

/// Coordinates of a bivector in the unit `Λ+` and `Λ-` bases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfDualSplit<T: nalgebra::Scalar = f64> {
    pub plus: Vector3<T>,
    pub minus: Vector3<T>,
}

impl<T: ComplexField<RealField = f64> + Copy> SelfDualSplit<T> {
    pub fn recompose(&self) -> Bivector6<T> {
        Bivector6::new(self.plus_part().components + self.minus_part().components)
    }

    /// The `Λ+` component as a bivector.
    pub fn plus_part(&self) -> Bivector6<T> {
        let basis = selfdual_basis();
        let mut c = Vector6::zeros();
        for k in 0..3 {
            for m in 0..6 {
                c[m] += self.plus[k] * T::from_real(basis[(k, m)]);
            }
        }
        Bivector6::new(c)
    }

    pub fn minus_part(&self) -> Bivector6<T> {
        let basis = selfdual_basis();
        let mut c = Vector6::zeros();
        for k in 0..3 {
            for m in 0..6 {
                c[m] += self.minus[k] * T::from_real(basis[(k + 3, m)]);
            }
        }
        Bivector6::new(c)
    }

    pub fn from_parts(plus: Vector3<T>, minus: Vector3<T>) -> Self {
        Self { plus, minus }
    }
}

pub fn selfdual_split<T: ComplexField<RealField = f64> + Copy>(
    b: &Bivector6<T>,
) -> SelfDualSplit<T> {
    let basis = selfdual_basis();
    let mut plus = Vector3::zeros();
    let mut minus = Vector3::zeros();
    for k in 0..3 {
        for m in 0..6 {
            plus[k] += T::from_real(basis[(k, m)]) * b.components[m];
            minus[k] += T::from_real(basis[(k + 3, m)]) * b.components[m];
        }
    }
    SelfDualSplit { plus, minus }
}

/// Fibre metric `g0(V, W) = -tr(VW)/2`.
pub fn g0_inner<T: ComplexField<RealField = f64> + Copy>(v: &Matrix4<T>, w: &Matrix4<T>) -> T {
    let mut acc = T::zero();
    for i in 0..4 {
        for k in 0..4 {
            acc += v[(i, k)] * w[(k, i)];
        }
    }
    acc * T::from_real(-0.5)
}

pub fn bracket<T: ComplexField<RealField = f64> + Copy>(
    a: &Matrix4<T>,
    b: &Matrix4<T>,
) -> Matrix4<T> {
    a * b - b * a
}

/// A compatible complex structure `u = aI + bJ + cK` with `a²+b²+c² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompatStructure {
    abc: Vector3<f64>,
    matrix: Skew4,
}

impl CompatStructure {
    pub fn abc(&self) -> &Vector3<f64> {
        &self.abc
    }

    pub fn matrix(&self) -> &Mat4 {
        self.matrix.matrix()
    }

    pub fn skew(&self) -> &Skew4 {
        &self.matrix
    }

    /// Builds from coefficients already known to be unit up to rounding.
    pub(crate) fn from_unit(abc: Vector3<f64>) -> Self {
        let m = quat_i() * abc[0] + quat_j() * abc[1] + quat_k() * abc[2];
        CompatStructure {
            abc,
            matrix: Skew4(m),
        }
    }
}

pub fn make_compatible_structure(a: f64, b: f64, c: f64) -> Result<CompatStructure> {
    let n2 = a * a + b * b + c * c;
    if !n2.is_finite() || (n2 - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "(a, b, c) must be a unit vector, got squared norm {n2}"
        )));
    }
    Ok(CompatStructure::from_unit(Vector3::new(a, b, c)))
}

/// Whether an anti-involutive isometry respects the orientation, decided by
/// `φ(A) ∈ Λ+`.
pub fn respects_orientation(a: &Mat4) -> Result<bool> {
    let id = Mat4::identity();
    let involution_defect = (a * a + id).amax();
    let isometry_defect = (a.transpose() * a - id).amax();
    if involution_defect > 1e-9 || isometry_defect > 1e-9 {
        return Err(Error::Domain(format!(
            "not an anti-involutive isometry (A²+Id: {involution_defect:e}, AᵀA-Id: {isometry_defect:e})"
        )));
    }
    let split = selfdual_split(&phi(a));
    Ok(split.minus.norm() < split.plus.norm())
}

pub fn to_complex(m: &Mat4) -> CMat4 {
    m.map(|v| C64::new(v, 0.0))
}

pub fn to_complex_vec(v: &Vector4<f64>) -> Vector4<C64> {
    v.map(|x| C64::new(x, 0.0))
}
