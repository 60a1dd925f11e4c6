//! Closed-form linear algebra for 2×2 real matrices.
//!
//! Everything here is exact up to floating point: singular values come from
//! the Frobenius norm and the determinant, eigenvalues from the quadratic
//! formula. The proximal / parabolic / conformal trichotomy is decided on the
//! discriminant `trace² − 4·det` with a scale-aware tolerance band.

use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::projective::Direction;

/// Relative threshold below which a determinant is treated as zero.
pub const DET_EPS: f64 = 1e-12;

/// Relative width of the discriminant band used by [`Mat2::classify`].
pub const CLASS_REL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is singular (|det| = {det:e} relative to scale {scale:e})")]
    Singular { det: f64, scale: f64 },
    #[error("matrix has a non-finite entry")]
    NonFinite,
}

/// An invertible 2×2 real matrix `[[a, b], [c, d]]` with cached determinant
/// and trace. Products and rescalings carry the determinant multiplicatively,
/// so it stays accurate where `ad − bc` would cancel.
#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct Mat2 {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    det: f64,
    trace: f64,
}

impl PartialEq for Mat2 {
    fn eq(&self, o: &Mat2) -> bool {
        [self.a, self.b, self.c, self.d] == [o.a, o.b, o.c, o.d]
    }
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

impl TryFrom<[f64; 4]> for Mat2 {
    type Error = LinalgError;

    fn try_from(e: [f64; 4]) -> Result<Self, Self::Error> {
        Mat2::new(e[0], e[1], e[2], e[3])
    }
}

impl From<Mat2> for [f64; 4] {
    fn from(m: Mat2) -> Self {
        m.entries()
    }
}

/// The trichotomy for planar matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MatrixClass {
    /// Two real eigenvalues of distinct modulus.
    Proximal,
    /// A single eigenspace.
    Parabolic,
    /// Eigenvalues of equal modulus and conjugate to a scaled orthogonal map.
    Conformal,
}

/// A classification together with a flag raised when the discriminant fell
/// inside the tolerance band, i.e. the verdict depends on the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassVerdict {
    pub class: MatrixClass,
    pub near_degenerate: bool,
}

/// Eigenvalue and singular value data of a matrix.
///
/// For real spectra `lambda_u` and `lambda_s` are the signed eigenvalues of
/// largest and smallest modulus. For a complex pair both hold the common
/// modulus `sqrt(det)` and `real` is false. Eigendirections are present only
/// for proximal matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub lambda_u: f64,
    pub lambda_s: f64,
    pub real: bool,
    pub u_dir: Option<Direction>,
    pub s_dir: Option<Direction>,
    pub sv1: f64,
    pub sv2: f64,
}

impl Mat2 {
    /// Builds a matrix from row-major entries, rejecting singular or
    /// non-finite input. Singularity is judged relative to the Frobenius
    /// scale: `|det| ≤ DET_EPS · ‖m‖_F²`.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, LinalgError> {
        if !(a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        let m = Self::raw(a, b, c, d);
        let scale = m.frobenius_sq();
        if m.det.abs() <= DET_EPS * scale || scale == 0.0 {
            return Err(LinalgError::Singular { det: m.det, scale });
        }
        Ok(m)
    }

    /// Builds a matrix without the invertibility check. Used for products and
    /// intermediate quantities whose invertibility follows from their inputs.
    pub(crate) fn raw(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 {
            a,
            b,
            c,
            d,
            det: a * d - b * c,
            trace: a + d,
        }
    }

    pub fn from_rows(rows: [[f64; 2]; 2]) -> Result<Self, LinalgError> {
        Self::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub fn identity() -> Self {
        Self::raw(1.0, 0.0, 0.0, 1.0)
    }

    pub fn scalar(c: f64) -> Result<Self, LinalgError> {
        Self::new(c, 0.0, 0.0, c)
    }

    pub fn diag(x: f64, y: f64) -> Result<Self, LinalgError> {
        Self::new(x, 0.0, 0.0, y)
    }

    /// Counterclockwise rotation by `alpha` radians.
    pub fn rotation(alpha: f64) -> Self {
        let (s, c) = alpha.sin_cos();
        Self::raw(c, -s, s, c)
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    fn with_det(mut self, det: f64) -> Self {
        self.det = det;
        self
    }

    pub fn transpose(&self) -> Self {
        Self::raw(self.a, self.c, self.b, self.d).with_det(self.det)
    }

    pub fn inverse(&self) -> Self {
        let k = 1.0 / self.det;
        Self::raw(self.d * k, -self.b * k, -self.c * k, self.a * k).with_det(k)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::raw(self.a * k, self.b * k, self.c * k, self.d * k).with_det(self.det * k * k)
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    /// Largest absolute entry difference.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let x = self.entries();
        let y = other.entries();
        (0..4).map(|i| (x[i] - y[i]).abs()).fold(0.0, f64::max)
    }

    /// Singular values `(sv1, sv2)` with `sv1 ≥ sv2 ≥ 0`.
    ///
    /// `sv1² = (‖A‖_F² + sqrt(‖A‖_F⁴ − 4 det²)) / 2` and `sv2 = |det| / sv1`;
    /// the second form avoids cancellation for nearly singular inputs.
    pub fn singular_values(&self) -> (f64, f64) {
        let f = self.frobenius_sq();
        if f == 0.0 {
            return (0.0, 0.0);
        }
        let disc = (f * f - 4.0 * self.det * self.det).max(0.0);
        let sv1 = ((f + disc.sqrt()) / 2.0).sqrt();
        (sv1, self.det.abs() / sv1)
    }

    /// Spectral (operator) norm.
    pub fn op_norm(&self) -> f64 {
        self.singular_values().0
    }

    /// `sv2 / sv1 = |det| / ‖A‖²`.
    pub fn sv_ratio(&self) -> f64 {
        let (s1, s2) = self.singular_values();
        s2 / s1
    }

    /// Spectral radius.
    pub fn spectral_radius(&self) -> f64 {
        let e = self.eigen_data();
        e.lambda_u.abs()
    }

    /// `|det|^{-1/2} · A`, which has unit absolute determinant.
    pub fn normalize_det(&self) -> Self {
        self.scale(self.det.abs().powf(-0.5))
    }

    /// `‖A x‖ / ‖x‖` for a unit vector spanning `v`.
    pub fn norm_on_direction(&self, v: Direction) -> f64 {
        let [x, y] = self.apply(v.unit_vector());
        x.hypot(y)
    }

    /// Default discriminant tolerance `1e-9 · (trace² + 4|det|)`.
    pub fn class_tolerance(&self) -> f64 {
        CLASS_REL_TOL * (self.trace * self.trace + 4.0 * self.det.abs())
    }

    pub fn discriminant(&self) -> f64 {
        self.trace * self.trace - 4.0 * self.det
    }

    /// Whether `A` is a scalar multiple of the identity, judged against a
    /// tolerance in the same (squared) units as the discriminant.
    pub fn is_scalar(&self, tol: f64) -> bool {
        let off = self.b * self.b + self.c * self.c + (self.a - self.d).powi(2);
        off <= tol
    }

    /// Trichotomy with the default relative tolerance.
    pub fn classify(&self) -> ClassVerdict {
        self.classify_with_tol(self.class_tolerance())
    }

    /// Trichotomy with an explicit discriminant tolerance.
    pub fn classify_with_tol(&self, tol: f64) -> ClassVerdict {
        let disc = self.discriminant();
        if disc > tol {
            // Real eigenvalues (tr ± √D)/2; equal modulus iff tr = 0.
            let class = if self.trace * self.trace <= tol {
                MatrixClass::Conformal
            } else {
                MatrixClass::Proximal
            };
            ClassVerdict {
                class,
                near_degenerate: false,
            }
        } else if disc < -tol {
            ClassVerdict {
                class: MatrixClass::Conformal,
                near_degenerate: false,
            }
        } else {
            let class = if self.is_scalar(tol) {
                MatrixClass::Conformal
            } else {
                MatrixClass::Parabolic
            };
            ClassVerdict {
                class,
                near_degenerate: true,
            }
        }
    }

    /// Eigenvalues, eigendirections (proximal case only) and singular values.
    pub fn eigen_data(&self) -> SpectralData {
        let (sv1, sv2) = self.singular_values();
        let disc = self.discriminant();
        let verdict = self.classify();
        if disc < 0.0 {
            let m = self.det.abs().sqrt();
            return SpectralData {
                lambda_u: m,
                lambda_s: m,
                real: false,
                u_dir: None,
                s_dir: None,
                sv1,
                sv2,
            };
        }
        let root = disc.sqrt();
        // Stable quadratic roots: the larger-modulus one first, then det/λ.
        let big = if self.trace >= 0.0 {
            (self.trace + root) / 2.0
        } else {
            (self.trace - root) / 2.0
        };
        let small = if big != 0.0 { self.det / big } else { -big };
        let (lambda_u, lambda_s) = if big.abs() >= small.abs() {
            (big, small)
        } else {
            (small, big)
        };
        let (u_dir, s_dir) = if verdict.class == MatrixClass::Proximal {
            (self.eigendirection(lambda_u), self.eigendirection(lambda_s))
        } else {
            (None, None)
        };
        SpectralData {
            lambda_u,
            lambda_s,
            real: true,
            u_dir,
            s_dir,
            sv1,
            sv2,
        }
    }

    /// Kernel direction of `A − λI`, taken from the better-conditioned row.
    pub fn eigendirection(&self, lambda: f64) -> Option<Direction> {
        let r1 = [self.b, lambda - self.a];
        let r2 = [lambda - self.d, self.c];
        let n1 = r1[0].hypot(r1[1]);
        let n2 = r2[0].hypot(r2[1]);
        let v = if n1 >= n2 { r1 } else { r2 };
        if n1.max(n2) == 0.0 {
            None
        } else {
            Some(Direction::from_vector(v[0], v[1]))
        }
    }

    /// Lines fixed by `A`: none for a complex spectrum, one for a parabolic
    /// matrix, two otherwise. Scalar matrices fix every line and are reported
    /// as `None`.
    pub fn invariant_lines(&self) -> Option<Vec<Direction>> {
        let tol = self.class_tolerance();
        if self.is_scalar(tol) {
            return None;
        }
        let disc = self.discriminant();
        if disc < -tol {
            return Some(Vec::new());
        }
        if disc <= tol {
            let lambda = self.trace / 2.0;
            return Some(self.eigendirection(lambda).into_iter().collect());
        }
        let root = disc.sqrt();
        let l1 = (self.trace + root) / 2.0;
        let l2 = (self.trace - root) / 2.0;
        Some(
            [l1, l2]
                .iter()
                .filter_map(|&l| self.eigendirection(l))
                .collect(),
        )
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::raw(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
        .with_det(self.det * o.det)
    }
}

impl Mul for &Mat2 {
    type Output = Mat2;

    fn mul(self, o: &Mat2) -> Mat2 {
        *self * *o
    }
}

/// Symmetric positive definite square root of a 2×2 SPD matrix
/// `[[p, q], [q, r]]`: `(P + √det·I) / sqrt(tr + 2√det)`.
pub fn spd_sqrt(p: f64, q: f64, r: f64) -> Mat2 {
    let sd = (p * r - q * q).max(0.0).sqrt();
    let t = (p + r + 2.0 * sd).sqrt();
    Mat2::raw((p + sd) / t, q / t, q / t, (r + sd) / t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn m(a: f64, b: f64, c: f64, d: f64) -> Mat2 {
        Mat2::new(a, b, c, d).unwrap()
    }

    #[test]
    fn products_keep_an_accurate_determinant() {
        let a = m(2.881721996928672, 2.910350871161365, 0.9324882402089175, 0.8990765371362388);
        let mut p = a;
        for _ in 1..8 {
            p = p * a;
        }
        assert!((p.det() / a.det().powi(8) - 1.0).abs() < 1e-12);
        assert_eq!(p.normalize_det().classify().class, MatrixClass::Proximal);
    }

    #[test]
    fn op_norm_examples() {
        assert_eq!(Mat2::identity().op_norm(), 1.0);
        assert!((m(0.0, 1.0, 1.0, 0.0).op_norm() - 1.0).abs() < 1e-15);
        // AᵀA = [[5,3],[3,2]], largest eigenvalue (7+√45)/2, so sv1 = (3+√5)/2.
        let golden_sq = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((m(2.0, 1.0, 1.0, 1.0).op_norm() - golden_sq).abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_rejected() {
        assert!(matches!(
            Mat2::new(1.0, 2.0, 2.0, 4.0),
            Err(LinalgError::Singular { .. })
        ));
        assert_eq!(Mat2::new(f64::NAN, 0.0, 0.0, 1.0), Err(LinalgError::NonFinite));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(m(2.0, 1.0, 1.0, 1.0).classify().class, MatrixClass::Proximal);
        assert_eq!(m(0.0, 1.0, 1.0, 0.0).classify().class, MatrixClass::Conformal);
        let par = m(1.0, 1.0, 0.0, 1.0).classify();
        assert_eq!(par.class, MatrixClass::Parabolic);
        assert!(par.near_degenerate);
        let id = Mat2::identity().classify();
        assert_eq!(id.class, MatrixClass::Conformal);
        assert!(id.near_degenerate);
        assert_eq!(Mat2::rotation(0.3).classify().class, MatrixClass::Conformal);
        assert_eq!(m(-3.0, 0.0, 0.0, 3.0).classify().class, MatrixClass::Conformal);
    }

    #[test]
    fn eigen_data_examples() {
        let e = m(1.0, 0.0, 0.0, 2.0).eigen_data();
        assert_eq!(e.lambda_u, 2.0);
        assert_eq!(e.lambda_s, 1.0);
        assert!(e.u_dir.unwrap().distance(Direction::new(FRAC_PI_2)) < 1e-15);
        assert!(e.s_dir.unwrap().distance(Direction::new(0.0)) < 1e-15);

        let e = m(2.0, 1.0, 1.0, 1.0).eigen_data();
        assert!((e.lambda_u - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-14);
        let expected = ((5f64.sqrt() - 1.0) / 2.0).atan();
        assert!(e.u_dir.unwrap().distance(Direction::new(expected)) < 1e-14);

        let e = Mat2::rotation(FRAC_PI_2).eigen_data();
        assert!(!e.real);
        assert!((e.lambda_u - 1.0).abs() < 1e-15 && (e.lambda_s - 1.0).abs() < 1e-15);
        assert!(e.u_dir.is_none() && e.s_dir.is_none());
    }

    #[test]
    fn norm_on_direction_examples() {
        let v = Direction::new(1.234);
        assert!((Mat2::identity().norm_on_direction(v) - 1.0).abs() < 1e-15);
        let e2 = Direction::new(FRAC_PI_2);
        assert!((m(1.0, 0.0, 0.0, 2.0).norm_on_direction(e2) - 2.0).abs() < 1e-15);
        let e1 = Direction::new(0.0);
        assert!((m(2.0, 1.0, 1.0, 1.0).norm_on_direction(e1) - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn normalize_det_examples() {
        assert!(Mat2::scalar(2.0).unwrap().normalize_det().max_abs_diff(&Mat2::identity()) < 1e-15);
        let n = m(1.0, 0.0, 0.0, 4.0).normalize_det();
        assert!(n.max_abs_diff(&m(0.5, 0.0, 0.0, 2.0)) < 1e-15);
        let n = m(2.0, 1.0, 1.0, 2.0).normalize_det();
        let r3 = 3f64.sqrt();
        assert!(n.max_abs_diff(&Mat2::raw(2.0 / r3, 1.0 / r3, 1.0 / r3, 2.0 / r3)) < 1e-15);
        assert!((n.det().abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn invariant_lines_counts() {
        assert!(Mat2::scalar(3.0).unwrap().invariant_lines().is_none());
        assert_eq!(Mat2::rotation(PI / 3.0).invariant_lines().unwrap().len(), 0);
        assert_eq!(m(1.0, 1.0, 0.0, 1.0).invariant_lines().unwrap().len(), 1);
        assert_eq!(m(2.0, 1.0, 1.0, 1.0).invariant_lines().unwrap().len(), 2);
    }

    #[test]
    fn spd_sqrt_squares_back() {
        let s = spd_sqrt(5.0, 2.0, 1.0);
        let sq = s * s;
        assert!(sq.max_abs_diff(&Mat2::raw(5.0, 2.0, 2.0, 1.0)) < 1e-13);
    }

    #[test]
    fn serde_row_major() {
        let a = m(2.0, 1.0, 1.0, 1.0);
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, "[2.0,1.0,1.0,1.0]");
        let back: Mat2 = serde_json::from_str(&s).unwrap();
        assert_eq!(back, a);
        assert!(serde_json::from_str::<Mat2>("[1,2,2,4]").is_err());
    }
}
