//! Rotation-matrix primitives.
//!
//! Orientations live on the manifold of 3×3 matrices with orthonormal
//! columns. Near a given rotation the manifold is parametrized by three
//! numbers through a skew-symmetric matrix and its exponential,
//! `Q = Q̆ exp(X(x))`; the iterative estimators in [`crate::estimators`]
//! walk the manifold with exactly this map. This module also provides the
//! nearest-orthogonal (polar) projection used to pull arbitrary matrices
//! back onto the manifold, and the rigid body transform `S = Q C + t 1ᵀ`.

use nalgebra::{DMatrix, Matrix3, Vector3};

use crate::error::Error;
use crate::Result;

/// Frobenius tolerance on `‖QᵀQ - I‖` for a matrix to count as a rotation.
pub const UNITARITY_TOL: f64 = 1e-12;

/// Skew-symmetric tangent parameters `x = [x1, x2, x3]`.
///
/// See [`skew`] for the generator layout.
pub type SkewParams = Vector3<f64>;

/// A 3×3 matrix with orthonormal columns (`QᵀQ = QQᵀ = I`).
///
/// Construction is validated ([`RotationMatrix::try_new`]) or comes from
/// operations that are orthonormal by construction (exponential map, SVD
/// factors). Reflections (determinant −1) are allowed: the estimators
/// constrain `QᵀQ = I` only, and callers can inspect [`det`](Self::det)
/// to count reflections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Matrix3<f64>);

impl RotationMatrix {
    /// Validate `m` against the orthonormality invariant.
    pub fn try_new(m: Matrix3<f64>) -> Result<Self> {
        let defect = (m.transpose() * m - Matrix3::identity()).norm();
        if !defect.is_finite() || defect > UNITARITY_TOL {
            return Err(Error::NotOrthonormal { defect });
        }
        Ok(Self(m))
    }

    /// Wrap a matrix that is orthonormal by construction.
    pub(crate) fn new_unchecked(m: Matrix3<f64>) -> Self {
        debug_assert!(
            (m.transpose() * m - Matrix3::identity()).norm() < 1e-9,
            "matrix is not orthonormal"
        );
        Self(m)
    }

    /// The identity rotation.
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// The underlying matrix.
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Determinant, +1 for proper rotations and −1 for reflections.
    pub fn det(&self) -> f64 {
        self.0.determinant()
    }

    /// The inverse rotation `Qᵀ`.
    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }
}

impl AsRef<Matrix3<f64>> for RotationMatrix {
    fn as_ref(&self) -> &Matrix3<f64> {
        &self.0
    }
}

impl From<RotationMatrix> for Matrix3<f64> {
    fn from(q: RotationMatrix) -> Self {
        q.0
    }
}

impl std::ops::Mul for RotationMatrix {
    type Output = RotationMatrix;

    fn mul(self, rhs: RotationMatrix) -> RotationMatrix {
        RotationMatrix::new_unchecked(self.0 * rhs.0)
    }
}

/// Orientation and position of the rigid body.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose {
    pub rotation: RotationMatrix,
    /// Translation in meters.
    pub translation: Vector3<f64>,
}

impl Pose {
    pub fn new(rotation: RotationMatrix, translation: Vector3<f64>) -> Self {
        Self {
            rotation,
            translation,
        }
    }
}

/// The skew-symmetric matrix `X(x)` generated by tangent parameters `x`:
///
/// ```text
///         ⎡ 0   -x1  -x2 ⎤
/// X(x) =  ⎢ x1   0   -x3 ⎥
///         ⎣ x2   x3   0  ⎦
/// ```
///
/// `X = -Xᵀ` holds exactly by construction. Note the layout: `x1`
/// generates a rotation of the (1,2) plane, `x2` of the (1,3) plane and
/// `x3` of the (2,3) plane.
pub fn skew(x: &SkewParams) -> Matrix3<f64> {
    Matrix3::new(
        0.0, -x[0], -x[1], //
        x[0], 0.0, -x[2], //
        x[1], x[2], 0.0,
    )
}

/// Exponential map `exp(X(x))` onto the rotation manifold.
///
/// Uses the closed-form axis-angle (Rodrigues) expression; for
/// `‖x‖ < 1e-8` the truncated series `I + X + X²/2` is used instead to
/// avoid dividing by a vanishing angle. The result always has
/// determinant +1.
pub fn rotation_exp(x: &SkewParams) -> RotationMatrix {
    let theta = x.norm();
    let xm = skew(x);
    let m = if theta < 1e-8 {
        Matrix3::identity() + xm + xm * xm * 0.5
    } else {
        // exp(X) = I + (sin θ / θ) X + ((1 - cos θ) / θ²) X²  with θ = ‖x‖.
        Matrix3::identity() + xm * (theta.sin() / theta)
            + xm * xm * ((1.0 - theta.cos()) / (theta * theta))
    };
    RotationMatrix::new_unchecked(m)
}

/// Composition order for the three elementary rotations, applied left to
/// right: `Xyz` rotates about axis 1 first, then axis 2, then axis 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EulerOrder {
    #[default]
    Xyz,
    Xzy,
    Yxz,
    Yzx,
    Zxy,
    Zyx,
}

impl EulerOrder {
    /// Axis indices (0-based) in application order.
    fn axes(self) -> [usize; 3] {
        match self {
            EulerOrder::Xyz => [0, 1, 2],
            EulerOrder::Xzy => [0, 2, 1],
            EulerOrder::Yxz => [1, 0, 2],
            EulerOrder::Yzx => [1, 2, 0],
            EulerOrder::Zxy => [2, 0, 1],
            EulerOrder::Zyx => [2, 1, 0],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EulerOrder::Xyz => "xyz",
            EulerOrder::Xzy => "xzy",
            EulerOrder::Yxz => "yxz",
            EulerOrder::Yzx => "yzx",
            EulerOrder::Zxy => "zxy",
            EulerOrder::Zyx => "zyx",
        }
    }
}

impl std::str::FromStr for EulerOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "xyz" => Ok(EulerOrder::Xyz),
            "xzy" => Ok(EulerOrder::Xzy),
            "yxz" => Ok(EulerOrder::Yxz),
            "yzx" => Ok(EulerOrder::Yzx),
            "zxy" => Ok(EulerOrder::Zxy),
            "zyx" => Ok(EulerOrder::Zyx),
            other => Err(Error::UnknownEulerOrder(other.to_string())),
        }
    }
}

/// Elementary rotation by `angle` radians about coordinate axis `axis`
/// (0 = x, 1 = y, 2 = z).
fn elementary_rotation(axis: usize, angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    match axis {
        0 => Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c),
        1 => Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c),
        _ => Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
    }
}

/// Build a rotation from per-axis angles in degrees.
///
/// `angles_deg[k]` is the rotation about coordinate axis `k` (x, y, z);
/// `order` fixes the application order. `Xyz` applies the x-rotation
/// first: `Q = R_z R_y R_x`.
pub fn euler_to_rotation(angles_deg: [f64; 3], order: EulerOrder) -> RotationMatrix {
    let mut q = Matrix3::identity();
    for axis in order.axes() {
        // Applying "then" rotations means composing on the left.
        q = elementary_rotation(axis, angles_deg[axis].to_radians()) * q;
    }
    RotationMatrix::new_unchecked(q)
}

/// Nearest rotation to `m` in Frobenius norm (the polar factor).
///
/// Equals `(M Mᵀ)^{-1/2} M`, computed as `U Vᵀ` from the SVD
/// `M = U Σ Vᵀ`. Errors when `m` is singular, where the projection is
/// not unique.
pub fn nearest_orthogonal(m: &Matrix3<f64>) -> Result<RotationMatrix> {
    let svd = m.svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    if !(smin.is_finite() && smax.is_finite()) || smin <= 1e-12 * smax.max(1.0) {
        return Err(Error::SingularProjection);
    }
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᵀ");
    Ok(RotationMatrix::new_unchecked(u * v_t))
}

/// Absolute sensor positions `S = Q C + t 1ᵀ` for a topology `C` (3×N).
pub fn rigid_transform(pose: &Pose, topology: &DMatrix<f64>) -> DMatrix<f64> {
    let rotated = pose.rotation.matrix() * topology;
    let mut s = DMatrix::from_column_slice(3, topology.ncols(), rotated.as_slice());
    for mut col in s.column_iter_mut() {
        col += pose.translation;
    }
    s
}
