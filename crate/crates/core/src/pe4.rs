//! Linear algebra of the pseudo-Euclidean space E^4_2.
//!
//! The metric is `g0 = dx1^2 + dx2^2 - dx3^2 - dx4^2`. Everything here is
//! plain value arithmetic; the only subtle piece is the orientation
//! convention, see [`orientation`].

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for causal classification of inner products.
pub const CAUSAL_TOL: f64 = 1e-9;
/// Default tolerance on Gram residuals of pseudo-orthonormal frames.
pub const GRAM_TOL: f64 = 1e-8;

/// Diagonal of the ambient metric.
pub const METRIC: [f64; 4] = [1.0, 1.0, -1.0, -1.0];

/// A point or vector of E^4_2 in rectangular coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Vec4 {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub x4: f64,
}

impl Vec4 {
    pub const ZERO: Vec4 = Vec4::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(x1: f64, x2: f64, x3: f64, x4: f64) -> Self {
        Self { x1, x2, x3, x4 }
    }

    /// The `k`-th coordinate basis vector (0-based).
    pub fn basis(k: usize) -> Self {
        let mut v = Self::ZERO;
        v[k] = 1.0;
        v
    }

    pub const fn to_array(self) -> [f64; 4] {
        [self.x1, self.x2, self.x3, self.x4]
    }

    pub fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.x1, self.x2, self.x3, self.x4)
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    #[inline]
    pub fn inner(self, other: Vec4) -> f64 {
        inner(self, other)
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        inner(self, self)
    }

    /// Euclidean length of the coordinate tuple; used for scales and pivoting only.
    pub fn euclid_norm(self) -> f64 {
        self.euclid_dot(self).sqrt()
    }

    pub fn euclid_dot(self, other: Vec4) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2 + self.x3 * other.x3 + self.x4 * other.x4
    }

    pub fn max_abs(self) -> f64 {
        self.to_array().iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }
}

impl From<[f64; 4]> for Vec4 {
    fn from(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }
}

impl From<Vec4> for [f64; 4] {
    fn from(v: Vec4) -> Self {
        v.to_array()
    }
}

impl Index<usize> for Vec4 {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        match k {
            0 => &self.x1,
            1 => &self.x2,
            2 => &self.x3,
            3 => &self.x4,
            _ => panic!("Vec4 index {k} out of range"),
        }
    }
}

impl IndexMut<usize> for Vec4 {
    fn index_mut(&mut self, k: usize) -> &mut f64 {
        match k {
            0 => &mut self.x1,
            1 => &mut self.x2,
            2 => &mut self.x3,
            3 => &mut self.x4,
            _ => panic!("Vec4 index {k} out of range"),
        }
    }
}

impl Add for Vec4 {
    type Output = Vec4;
    fn add(self, o: Vec4) -> Vec4 {
        Vec4::new(self.x1 + o.x1, self.x2 + o.x2, self.x3 + o.x3, self.x4 + o.x4)
    }
}

impl AddAssign for Vec4 {
    fn add_assign(&mut self, o: Vec4) {
        *self = *self + o;
    }
}

impl Sub for Vec4 {
    type Output = Vec4;
    fn sub(self, o: Vec4) -> Vec4 {
        Vec4::new(self.x1 - o.x1, self.x2 - o.x2, self.x3 - o.x3, self.x4 - o.x4)
    }
}

impl SubAssign for Vec4 {
    fn sub_assign(&mut self, o: Vec4) {
        *self = *self - o;
    }
}

impl Neg for Vec4 {
    type Output = Vec4;
    fn neg(self) -> Vec4 {
        Vec4::new(-self.x1, -self.x2, -self.x3, -self.x4)
    }
}

impl Mul<f64> for Vec4 {
    type Output = Vec4;
    fn mul(self, s: f64) -> Vec4 {
        Vec4::new(self.x1 * s, self.x2 * s, self.x3 * s, self.x4 * s)
    }
}

impl Mul<Vec4> for f64 {
    type Output = Vec4;
    fn mul(self, v: Vec4) -> Vec4 {
        v * self
    }
}

impl fmt::Display for Vec4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.x1, self.x2, self.x3, self.x4)
    }
}

/// The indefinite inner product `a1 b1 + a2 b2 - a3 b3 - a4 b4`.
#[inline]
pub fn inner(a: Vec4, b: Vec4) -> f64 {
    a.x1 * b.x1 + a.x2 * b.x2 - a.x3 * b.x3 - a.x4 * b.x4
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CausalCharacter {
    Spacelike,
    Timelike,
    Lightlike,
    Zero,
}

impl CausalCharacter {
    pub fn as_str(self) -> &'static str {
        match self {
            CausalCharacter::Spacelike => "spacelike",
            CausalCharacter::Timelike => "timelike",
            CausalCharacter::Lightlike => "lightlike",
            CausalCharacter::Zero => "zero",
        }
    }
}

/// Classifies `v`. The null test runs before the sign test so that nearly
/// null vectors are never reported as space- or timelike.
pub fn causal_character(v: Vec4, tol: f64) -> CausalCharacter {
    if v.max_abs() <= tol {
        return CausalCharacter::Zero;
    }
    let q = v.norm_sq();
    if q.abs() <= tol {
        CausalCharacter::Lightlike
    } else if q > 0.0 {
        CausalCharacter::Spacelike
    } else {
        CausalCharacter::Timelike
    }
}

/// Plain coordinate determinant of the 4x4 matrix with columns `a, b, c, d`.
pub fn det4(a: Vec4, b: Vec4, c: Vec4, d: Vec4) -> f64 {
    Matrix4::from_columns(&[a.to_vector(), b.to_vector(), c.to_vector(), d.to_vector()])
        .determinant()
}

/// Oriented volume of `(a, b, c, d)` relative to the reference quadruple
/// `(e1, e3, e2, e4)`.
///
/// Frames in this crate are ordered (spacelike tangent, timelike tangent,
/// spacelike normal, timelike normal), so the reference is the coordinate
/// quadruple with the same causal pattern. A frame is positively oriented
/// when this value is positive. Note `det4(e1, e3, e2, e4) = -1`.
pub fn orientation(a: Vec4, b: Vec4, c: Vec4, d: Vec4) -> f64 {
    -det4(a, b, c, d)
}

/// Four vectors together with the self-products they are expected to have.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame4 {
    pub e: [Vec4; 4],
    pub signature: [f64; 4],
}

impl Frame4 {
    pub fn new(e: [Vec4; 4], signature: [f64; 4]) -> Self {
        Self { e, signature }
    }

    /// The coordinate basis with the ambient signature (1, 1, -1, -1).
    pub fn standard() -> Self {
        Self::new([0, 1, 2, 3].map(Vec4::basis), METRIC)
    }

    pub fn gram(&self) -> [[f64; 4]; 4] {
        let mut g = [[0.0; 4]; 4];
        for (i, row) in g.iter_mut().enumerate() {
            for (j, gij) in row.iter_mut().enumerate() {
                *gij = inner(self.e[i], self.e[j]);
            }
        }
        g
    }

    /// Columns are the frame vectors.
    pub fn to_matrix(&self) -> Matrix4<f64> {
        Matrix4::from_columns(&self.e.map(Vec4::to_vector))
    }

    pub fn orientation(&self) -> f64 {
        orientation(self.e[0], self.e[1], self.e[2], self.e[3])
    }
}

/// Max-norm of `Gram(frame) - diag(signature)`.
pub fn gram_residual(frame: &Frame4) -> f64 {
    let g = frame.gram();
    let mut worst = 0.0_f64;
    for (i, row) in g.iter().enumerate() {
        for (j, &gij) in row.iter().enumerate() {
            let want = if i == j { frame.signature[i] } else { 0.0 };
            worst = worst.max((gij - want).abs());
        }
    }
    worst
}

/// A rigid motion `p -> Q p + t` of E^4_2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry {
    pub q: Matrix4<f64>,
    pub t: Vec4,
}

impl Isometry {
    pub fn identity() -> Self {
        Self { q: Matrix4::identity(), t: Vec4::ZERO }
    }

    pub fn apply_point(&self, p: Vec4) -> Vec4 {
        self.apply_vector(p) + self.t
    }

    pub fn apply_vector(&self, v: Vec4) -> Vec4 {
        Vec4::from_vector(&(self.q * v.to_vector()))
    }

    /// Max-norm of `Q^T eta Q - eta`.
    pub fn pseudo_orthogonality_residual(&self) -> f64 {
        let eta = metric_matrix();
        (self.q.transpose() * eta * self.q - eta).amax()
    }
}

pub fn metric_matrix() -> Matrix4<f64> {
    Matrix4::from_diagonal(&Vector4::from(METRIC))
}

/// Finds the rigid motion taking `src` (point and frame) onto `dst`.
///
/// With frame matrices `F` (columns are frame vectors) and `S = diag(signature)`
/// the linear part is `Q = F_dst S F_src^T eta`, which is pseudo-orthogonal
/// whenever both frames are.
pub fn align_rigid(src: (Vec4, &Frame4), dst: (Vec4, &Frame4), tol: f64) -> Result<Isometry> {
    let (p_src, f_src) = src;
    let (p_dst, f_dst) = dst;
    if f_src.signature != f_dst.signature {
        return Err(Error::FrameMismatch {
            reason: format!(
                "signatures differ: {:?} vs {:?}",
                f_src.signature, f_dst.signature
            ),
        });
    }
    for (label, f) in [("source", f_src), ("target", f_dst)] {
        let r = gram_residual(f);
        if !(r <= tol) {
            return Err(Error::FrameMismatch {
                reason: format!("{label} frame Gram residual {r:e} exceeds {tol:e}"),
            });
        }
    }
    let s = Matrix4::from_diagonal(&Vector4::from(f_src.signature));
    let q = f_dst.to_matrix() * s * f_src.to_matrix().transpose() * metric_matrix();
    let t = p_dst - Vec4::from_vector(&(q * p_src.to_vector()));
    Ok(Isometry { q, t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn boost_13(phi: f64) -> Matrix4<f64> {
        let (c, s) = (phi.cosh(), phi.sinh());
        Matrix4::new(
            c, 0.0, s, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            s, 0.0, c, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        )
    }

    fn vec4() -> impl Strategy<Value = Vec4> {
        prop::array::uniform4(-10.0..10.0f64).prop_map(Vec4::from)
    }

    #[test]
    fn inner_examples() {
        let e1 = Vec4::basis(0);
        let e3 = Vec4::basis(2);
        assert_eq!(inner(e1, e1), 1.0);
        assert_eq!(inner(e3, e3), -1.0);
        assert_eq!(inner(Vec4::new(1.0, 0.0, 1.0, 0.0), Vec4::new(1.0, 0.0, -1.0, 0.0)), 2.0);
    }

    #[test]
    fn causal_examples() {
        use CausalCharacter::*;
        assert_eq!(causal_character(Vec4::basis(0), CAUSAL_TOL), Spacelike);
        assert_eq!(causal_character(Vec4::basis(2), CAUSAL_TOL), Timelike);
        assert_eq!(causal_character(Vec4::new(1.0, 0.0, 1.0, 0.0), CAUSAL_TOL), Lightlike);
        assert_eq!(causal_character(Vec4::new(1e-12, 0.0, 0.0, 0.0), CAUSAL_TOL), Zero);
        // near-null but nonzero stays lightlike
        assert_eq!(
            causal_character(Vec4::new(1.0, 0.0, 1.0 + 1e-12, 0.0), CAUSAL_TOL),
            Lightlike
        );
    }

    #[test]
    fn gram_residual_examples() {
        assert_eq!(gram_residual(&Frame4::standard()), 0.0);

        let mut f = Frame4::standard();
        f.e[0] = Vec4::new(1.0, 1e-3, 0.0, 0.0);
        // <e1,e1> = 1 + 1e-6, <e1,e2> = 1e-3
        assert!((gram_residual(&f) - 1e-3).abs() < 1e-9);

        let mut f = Frame4::standard();
        f.e[0] = Vec4::new(1.0, 0.0, 1.0, 0.0);
        // diagonal defect 1, off-diagonal <e1,e3> = -1
        assert_eq!(gram_residual(&f), 1.0);
    }

    #[test]
    fn align_identity() {
        let f = Frame4::standard();
        let p = Vec4::new(0.3, -1.0, 2.0, 0.5);
        let iso = align_rigid((p, &f), (p, &f), GRAM_TOL).unwrap();
        assert!((iso.q - Matrix4::identity()).amax() < 1e-15);
        assert!(iso.t.max_abs() < 1e-15);
    }

    #[test]
    fn align_recovers_boost() {
        let boost = boost_13(0.5);
        let iso0 = Isometry { q: boost, t: Vec4::new(1.0, 2.0, -0.5, 0.25) };
        let src = Frame4::standard();
        let p = Vec4::new(0.1, 0.2, 0.3, 0.4);
        let dst = Frame4::new(src.e.map(|v| iso0.apply_vector(v)), src.signature);
        let iso = align_rigid((p, &src), (iso0.apply_point(p), &dst), GRAM_TOL).unwrap();
        assert!((iso.q - boost).amax() < 1e-12);
        assert!((iso.t - iso0.t).max_abs() < 1e-12);
    }

    #[test]
    fn align_rejects_signature_mismatch() {
        let src = Frame4::new(
            [0, 2, 1, 3].map(Vec4::basis),
            [1.0, -1.0, 1.0, -1.0],
        );
        let dst = Frame4::standard();
        let err = align_rigid((Vec4::ZERO, &src), (Vec4::ZERO, &dst), GRAM_TOL).unwrap_err();
        assert_eq!(err.code(), "FrameMismatch");
    }

    #[test]
    fn align_rejects_bad_gram() {
        let mut f = Frame4::standard();
        f.e[0] = Vec4::new(1.0, 0.0, 1.0, 0.0);
        let err = align_rigid((Vec4::ZERO, &f), (Vec4::ZERO, &Frame4::standard()), GRAM_TOL)
            .unwrap_err();
        assert_eq!(err.code(), "FrameMismatch");
    }

    #[test]
    fn reference_orientation_is_positive() {
        let e = [0, 1, 2, 3].map(Vec4::basis);
        assert_eq!(orientation(e[0], e[2], e[1], e[3]), 1.0);
        assert_eq!(orientation(e[0], e[1], e[2], e[3]), -1.0);
    }

    proptest! {
        #[test]
        fn inner_symmetric_bilinear(a in vec4(), b in vec4(), c in vec4(), s in -5.0..5.0f64) {
            prop_assert_eq!(inner(a, b), inner(b, a));
            let lhs = inner(a * s + c, b);
            let rhs = s * inner(a, b) + inner(c, b);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }

        #[test]
        fn aligned_isometry_preserves_products(
            phi in -1.5..1.5f64, psi in -3.0..3.0f64, chi in -1.0..1.0f64,
            a in vec4(), b in vec4(), p in vec4(),
        ) {
            // boost in (x1,x3), rotation in (x1,x2), boost in (x2,x4)
            let (cr, sr) = (psi.cos(), psi.sin());
            let rot = Matrix4::new(
                cr, -sr, 0.0, 0.0,
                sr, cr, 0.0, 0.0,
                0.0, 0.0, 1.0, 0.0,
                0.0, 0.0, 0.0, 1.0,
            );
            let (cb, sb) = (chi.cosh(), chi.sinh());
            let b24 = Matrix4::new(
                1.0, 0.0, 0.0, 0.0,
                0.0, cb, 0.0, sb,
                0.0, 0.0, 1.0, 0.0,
                0.0, sb, 0.0, cb,
            );
            let q = b24 * rot * boost_13(phi);
            let moved = Isometry { q, t: Vec4::new(1.0, -1.0, 0.5, 2.0) };
            let src = Frame4::standard();
            let dst = Frame4::new(src.e.map(|v| moved.apply_vector(v)), src.signature);
            let iso = align_rigid((p, &src), (moved.apply_point(p), &dst), 1e-8).unwrap();
            prop_assert!(iso.pseudo_orthogonality_residual() < 1e-10);
            let (qa, qb) = (iso.apply_vector(a), iso.apply_vector(b));
            prop_assert!((inner(qa, qb) - inner(a, b)).abs() < 1e-10 * (1.0 + a.euclid_norm() * b.euclid_norm()) * q.amax().powi(2));
            prop_assert_eq!(causal_character(qa, 1e-6), causal_character(a, 1e-6));
        }
    }
}
