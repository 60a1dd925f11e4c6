use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use super::{enumerate::enumerate_products, MatrixTuple, Word, DEFAULT_CAP};
use crate::linalg::{spd_sqrt, Mat2, MatrixClass};

/// Bound on the number of distinct elements explored when closing ℱ.
pub const F_GROUP_CAP: usize = 1000;
/// Max-entry distance under which two ℱ elements are identified.
pub const F_GROUP_EPS: f64 = 1e-8;

const NULL_REL_TOL: f64 = 1e-14;
const RESIDUAL_TOL: f64 = 1e-8;
const WITNESS_DEPTH: usize = 3;

/// A common conjugation: `spd = [p, q, r]` encodes `P = [[p, q], [q, r]]`
/// with `det P = 1`, and `conjugator = P^{1/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConformalStructure {
    pub spd: [f64; 3],
    pub conjugator: Mat2,
}

impl ConformalStructure {
    pub fn spd_matrix(&self) -> Mat2 {
        let [p, q, r] = self.spd;
        Mat2::raw(p, q, q, r)
    }

    /// `max_i ‖A_iᵀ P A_i − |det A_i| P‖_max / ‖P‖_max`.
    pub fn residual(&self, t: &MatrixTuple) -> f64 {
        let p = self.spd_matrix();
        let scale = p.entries().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        t.matrices()
            .iter()
            .map(|a| {
                let lhs = a.transpose() * p * *a;
                lhs.max_abs_diff(&p.scale(a.det().abs())) / scale
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NonConformalWitness {
    /// A product of length at most 3 that is not conformal.
    NonConformalProduct(Word),
    /// Every short product is conformal but the generators `0..=index` admit
    /// no common definite `P`.
    InfeasibleConstraint(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StrongConformality {
    Yes(ConformalStructure),
    No(NonConformalWitness),
}

impl StrongConformality {
    pub fn is_yes(&self) -> bool {
        matches!(self, StrongConformality::Yes(_))
    }
}

/// Rows of the linear map `(p, q, r) ↦ AᵀPA − P` for normalized `A`.
fn constraint_rows(a: &Mat2) -> [[f64; 3]; 3] {
    let [a, b, c, d] = a.normalize_det().entries();
    [
        [a * a - 1.0, 2.0 * a * c, c * c],
        [a * b, a * d + b * c - 1.0, c * d],
        [b * b, 2.0 * b * d, d * d - 1.0],
    ]
}

fn definiteness(v: &Vector3<f64>) -> f64 {
    let n2 = v.norm_squared();
    if n2 == 0.0 {
        return f64::NEG_INFINITY;
    }
    (v[0] * v[2] - v[1] * v[1]) / n2
}

/// A positive definite solution for the given generators, if one exists.
fn solve_spd(ms: &[Mat2]) -> Option<ConformalStructure> {
    let mut g = Matrix3::<f64>::zeros();
    for m in ms {
        for row in constraint_rows(m) {
            let r = Vector3::from(row);
            g += r * r.transpose();
        }
    }
    let eig = SymmetricEigen::new(g);
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let null: Vec<Vector3<f64>> = (0..3)
        .filter(|&k| eig.eigenvalues[k] <= NULL_REL_TOL * lmax)
        .map(|k| eig.eigenvectors.column(k).into_owned())
        .collect();

    let candidate = match null.len() {
        0 => return None,
        1 => null[0],
        2 => {
            // Most definite member of the pencil cos·v0 + sin·v1.
            let steps = 720;
            (0..steps)
                .map(|k| {
                    let phi = std::f64::consts::PI * k as f64 / steps as f64;
                    null[0] * phi.cos() + null[1] * phi.sin()
                })
                .max_by(|x, y| definiteness(x).total_cmp(&definiteness(y)))
                .expect("nonempty scan")
        }
        _ => Vector3::new(1.0, 0.0, 1.0),
    };
    if definiteness(&candidate) <= 0.0 {
        return None;
    }
    let v = if candidate[0] < 0.0 { -candidate } else { candidate };
    let det = v[0] * v[2] - v[1] * v[1];
    let k = det.sqrt();
    let (p, q, r) = (v[0] / k, v[1] / k, v[2] / k);
    let s = ConformalStructure {
        spd: [p, q, r],
        conjugator: spd_sqrt(p, q, r),
    };
    let sub = MatrixTuple::new(ms.to_vec()).ok()?;
    (s.residual(&sub) <= RESIDUAL_TOL).then_some(s)
}

/// Decides whether every generator is conformal with respect to one common
/// conjugation matrix, by solving `A_iᵀ P A_i = |det A_i| P` for symmetric
/// positive definite `P`.
pub fn strong_conformality_check(t: &MatrixTuple) -> StrongConformality {
    if let Some(s) = solve_spd(t.matrices()) {
        return StrongConformality::Yes(s);
    }
    let depth = WITNESS_DEPTH;
    let words = enumerate_products(t, depth, true, DEFAULT_CAP).expect("depth 3 is within the cap for N ≤ 9");
    for (w, p) in words {
        if p.unit.classify().class != MatrixClass::Conformal {
            return StrongConformality::No(NonConformalWitness::NonConformalProduct(w));
        }
    }
    let index = (0..t.len())
        .find(|&i| solve_spd(&t.matrices()[..=i]).is_none())
        .unwrap_or(t.len() - 1);
    StrongConformality::No(NonConformalWitness::InfeasibleConstraint(index))
}

/// The finite semigroup ℱ generated by the det-normalized conformal
/// generators, as explicit signed matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FGroup {
    Finite(Vec<Mat2>),
    CapExceeded { explored: usize },
}

impl FGroup {
    pub fn elements(&self) -> Option<&[Mat2]> {
        match self {
            FGroup::Finite(v) => Some(v),
            FGroup::CapExceeded { .. } => None,
        }
    }

    /// Number of elements up to sign, i.e. as maps of ℝP¹.
    pub fn projective_count(&self) -> Option<usize> {
        let els = self.elements()?;
        let mut reps: Vec<Mat2> = Vec::new();
        for m in els {
            if !reps
                .iter()
                .any(|r| r.max_abs_diff(m) < F_GROUP_EPS || r.max_abs_diff(&m.scale(-1.0)) < F_GROUP_EPS)
            {
                reps.push(*m);
            }
        }
        Some(reps.len())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResult {
    pub conformal_indices: Vec<usize>,
    pub hyperbolic_indices: Vec<usize>,
    pub f_group: FGroup,
}

/// Splits the generators into conformal (`𝖠_e`) and the rest (`𝖠_h`) and
/// closes the normalized conformal generators under multiplication.
pub fn conformal_split(t: &MatrixTuple) -> DecompositionResult {
    let (conformal_indices, hyperbolic_indices): (Vec<usize>, Vec<usize>) =
        (0..t.len()).partition(|&i| t.get(i).classify().class == MatrixClass::Conformal);
    let gens: Vec<Mat2> = conformal_indices.iter().map(|&i| t.get(i).normalize_det()).collect();
    let f_group = close_group(&gens);
    DecompositionResult {
        conformal_indices,
        hyperbolic_indices,
        f_group,
    }
}

fn close_group(gens: &[Mat2]) -> FGroup {
    if gens.is_empty() {
        return FGroup::Finite(vec![Mat2::identity()]);
    }
    let known = |set: &[Mat2], m: &Mat2| set.iter().any(|x| x.max_abs_diff(m) < F_GROUP_EPS);
    let mut elems: Vec<Mat2> = Vec::new();
    for g in gens {
        if !known(&elems, g) {
            elems.push(*g);
        }
    }
    let mut frontier = 0;
    while frontier < elems.len() {
        let x = elems[frontier];
        frontier += 1;
        for g in gens {
            let y = (x * *g).normalize_det();
            if !known(&elems, &y) {
                if elems.len() >= F_GROUP_CAP {
                    return FGroup::CapExceeded { explored: elems.len() };
                }
                elems.push(y);
            }
        }
    }
    FGroup::Finite(elems)
}
