//! Finite-depth exploration of the semigroup generated by a matrix tuple.

mod conformal;
mod enumerate;
mod spectral;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{LinalgError, Mat2};

pub use conformal::{
    conformal_split, strong_conformality_check, ConformalStructure, DecompositionResult, FGroup,
    NonConformalWitness,
    StrongConformality, F_GROUP_CAP, F_GROUP_EPS,
};
pub use enumerate::{
    check_cap, enumerate_products, kappa_estimate, kappa_profile, products_by_length,
    KappaEstimate, Products, DEFAULT_CAP,
};
pub use spectral::{
    eigen_multiplicativity_check, irreducibility_check, EigenMultiplicativity, Irreducibility,
    SharedDirection,
};

/// Largest alphabet; words serialize as strings over `'1'..='9'`.
pub const MAX_SYMBOLS: usize = 9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SemigroupError {
    #[error("{count}^{depth} products exceed the enumeration cap; largest feasible depth is {max_depth}")]
    CapExceeded {
        count: usize,
        depth: usize,
        max_depth: usize,
    },
    #[error("a tuple needs between 1 and {MAX_SYMBOLS} matrices, got {0}")]
    BadSize(usize),
    #[error("matrix {index}: {source}")]
    Matrix { index: usize, source: LinalgError },
    #[error("invalid word {0:?}")]
    BadWord(String),
    #[error("depth must be at least 1")]
    ZeroDepth,
}

/// A finite word over the alphabet `{0, …, N−1}`, displayed 1-based.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn new(symbols: Vec<u8>) -> Self {
        Word(symbols)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Number of occurrences of `symbol`.
    pub fn count(&self, symbol: u8) -> usize {
        self.0.iter().filter(|&&s| s == symbol).count()
    }

    /// Position of the word among words of its length in lexicographic
    /// order, i.e. its base-`n` value with the first symbol most significant.
    pub fn index(&self, n: usize) -> usize {
        self.0.iter().fold(0, |acc, &s| acc * n + s as usize)
    }

    pub fn from_index(mut index: usize, len: usize, n: usize) -> Word {
        let mut v = vec![0u8; len];
        for slot in v.iter_mut().rev() {
            *slot = (index % n) as u8;
            index /= n;
        }
        Word(v)
    }

    /// Parses a 1-based word such as `"121"`.
    pub fn parse(s: &str) -> Result<Word, SemigroupError> {
        s.chars()
            .map(|c| match c.to_digit(10) {
                Some(d) if d >= 1 => Ok((d - 1) as u8),
                _ => Err(SemigroupError::BadWord(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{}", s + 1)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word(\"{self}\")")
    }
}

impl FromStr for Word {
    type Err = SemigroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Word::parse(s)
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Word::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// A product `e^{log_scale} · unit` whose unit part has its largest entry
/// in `[1, 2)`.
///
/// Keeping the scale in log form lets products of expanding tuples run to
/// large depth without overflow. Rescaling is by powers of two, so the unit
/// part carries all directional and singular-value-ratio information
/// without extra rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledProduct {
    pub unit: Mat2,
    pub log_scale: f64,
}

impl ScaledProduct {
    pub fn identity() -> Self {
        ScaledProduct {
            unit: Mat2::identity(),
            log_scale: 0.0,
        }
    }

    pub fn from_matrix(m: &Mat2) -> Self {
        Self::rescaled(*m, 0.0)
    }

    fn rescaled(m: Mat2, log_scale: f64) -> Self {
        let big = m.entries().iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let e = big.log2().floor() as i32;
        ScaledProduct {
            unit: m.scale(2f64.powi(-e)),
            log_scale: log_scale + e as f64 * std::f64::consts::LN_2,
        }
    }

    pub fn mul(&self, other: &ScaledProduct) -> ScaledProduct {
        Self::rescaled(self.unit * other.unit, self.log_scale + other.log_scale)
    }

    pub fn log_norm(&self) -> f64 {
        self.log_scale + self.unit.op_norm().ln()
    }

    /// `sv2 / sv1`, unaffected by the scalar factor.
    pub fn sv_ratio(&self) -> f64 {
        self.unit.sv_ratio()
    }

    /// The product as a plain matrix; overflows for very long words.
    pub fn to_matrix(&self) -> Mat2 {
        self.unit.scale(self.log_scale.exp())
    }
}

/// An ordered tuple `(A_1, …, A_N)` of invertible matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Mat2>", into = "Vec<Mat2>")]
pub struct MatrixTuple {
    matrices: Vec<Mat2>,
    #[serde(skip)]
    units: Vec<ScaledProduct>,
}

impl TryFrom<Vec<Mat2>> for MatrixTuple {
    type Error = SemigroupError;

    fn try_from(v: Vec<Mat2>) -> Result<Self, Self::Error> {
        MatrixTuple::new(v)
    }
}

impl From<MatrixTuple> for Vec<Mat2> {
    fn from(t: MatrixTuple) -> Self {
        t.matrices
    }
}

impl MatrixTuple {
    pub fn new(matrices: Vec<Mat2>) -> Result<Self, SemigroupError> {
        if matrices.is_empty() || matrices.len() > MAX_SYMBOLS {
            return Err(SemigroupError::BadSize(matrices.len()));
        }
        let units = matrices.iter().map(ScaledProduct::from_matrix).collect();
        Ok(MatrixTuple { matrices, units })
    }

    /// Builds a tuple from row-major entry quadruples, validating each matrix.
    pub fn from_entries(entries: &[[f64; 4]]) -> Result<Self, SemigroupError> {
        let ms = entries
            .iter()
            .enumerate()
            .map(|(index, e)| {
                Mat2::new(e[0], e[1], e[2], e[3]).map_err(|source| SemigroupError::Matrix { index, source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(ms)
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn matrices(&self) -> &[Mat2] {
        &self.matrices
    }

    pub fn get(&self, i: usize) -> &Mat2 {
        &self.matrices[i]
    }

    pub(crate) fn unit(&self, i: usize) -> &ScaledProduct {
        &self.units[i]
    }

    /// `A_w = A_{w_1} ⋯ A_{w_n}` in scaled form.
    pub fn product(&self, w: &Word) -> ScaledProduct {
        w.symbols()
            .iter()
            .fold(ScaledProduct::identity(), |acc, &s| acc.mul(&self.units[s as usize]))
    }

    /// `A_w` as a plain matrix.
    pub fn product_matrix(&self, w: &Word) -> Mat2 {
        w.symbols()
            .iter()
            .fold(Mat2::identity(), |acc, &s| acc * self.matrices[s as usize])
    }

    /// The sub-tuple on the given indices, in order.
    pub fn subtuple(&self, indices: &[usize]) -> Result<MatrixTuple, SemigroupError> {
        MatrixTuple::new(indices.iter().map(|&i| self.matrices[i]).collect())
    }

    /// `G A_i G⁻¹` for every `i`.
    pub fn conjugate(&self, g: &Mat2) -> MatrixTuple {
        let gi = g.inverse();
        MatrixTuple::new(self.matrices.iter().map(|a| *g * *a * gi).collect()).expect("same size")
    }

    /// Replaces every matrix by a scalar multiple.
    pub fn scaled(&self, factors: &[f64]) -> MatrixTuple {
        MatrixTuple::new(
            self.matrices
                .iter()
                .zip(factors)
                .map(|(a, &c)| a.scale(c))
                .collect(),
        )
        .expect("same size")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_round_trips() {
        let w = Word::parse("1213").unwrap();
        assert_eq!(w.symbols(), &[0, 1, 0, 2]);
        assert_eq!(w.to_string(), "1213");
        assert_eq!(w.count(0), 2);
        assert_eq!(Word::from_index(w.index(3), 4, 3), w);
        assert!(Word::parse("102").is_err());
        assert_eq!(serde_json::to_string(&w).unwrap(), "\"1213\"");
    }

    #[test]
    fn scaled_product_matches_plain_product() {
        let t = MatrixTuple::from_entries(&[[2.0, 1.0, 1.0, 1.0], [2.0, 1.0, 1.0, 2.0]]).unwrap();
        let w = Word::parse("12").unwrap();
        let expected = Mat2::new(5.0, 4.0, 3.0, 3.0).unwrap();
        assert!(t.product_matrix(&w).max_abs_diff(&expected) < 1e-14);
        assert!(t.product(&w).to_matrix().max_abs_diff(&expected) < 1e-12);
        assert!((t.product(&w).log_norm() - expected.op_norm().ln()).abs() < 1e-13);
    }

    #[test]
    fn tuple_size_limits() {
        assert_eq!(MatrixTuple::new(vec![]), Err(SemigroupError::BadSize(0)));
        assert!(MatrixTuple::new(vec![Mat2::identity(); 10]).is_err());
        let err = MatrixTuple::from_entries(&[[1.0, 0.0, 0.0, 1.0], [1.0, 2.0, 2.0, 4.0]]).unwrap_err();
        assert!(matches!(err, SemigroupError::Matrix { index: 1, .. }));
    }
}
