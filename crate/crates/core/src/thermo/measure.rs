use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize};

use super::ThermoError;
use crate::semigroup::{products_by_length, MatrixTuple, SemigroupError, Word, MAX_SYMBOLS};

/// Masses of all cylinders of length `1..=depth` over an `N`-letter
/// alphabet. `levels[L-1][Word::index]` is the mass of a word of length `L`;
/// the empty word has mass 1 implicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderMeasure {
    alphabet: usize,
    levels: Vec<Vec<f64>>,
}

impl CylinderMeasure {
    /// Builds every level from the masses of the longest words by summing
    /// children, so consistency holds by construction.
    pub fn from_top_level(alphabet: usize, depth: usize, top: Vec<f64>) -> Result<Self, ThermoError> {
        if alphabet == 0 || alphabet > MAX_SYMBOLS || depth == 0 {
            return Err(ThermoError::BadShape);
        }
        if top.len() != alphabet.pow(depth as u32) {
            return Err(ThermoError::BadShape);
        }
        let mut levels = vec![top];
        while levels.len() < depth {
            let child = levels.last().unwrap();
            let parent: Vec<f64> = child.chunks(alphabet).map(|c| c.iter().sum()).collect();
            levels.push(parent);
        }
        levels.reverse();
        Ok(CylinderMeasure { alphabet, levels })
    }

    /// Evaluates `mass` on every word of length `depth`.
    pub fn from_fn(alphabet: usize, depth: usize, mass: impl Fn(&Word) -> f64) -> Result<Self, ThermoError> {
        let count = alphabet.checked_pow(depth as u32).ok_or(ThermoError::BadShape)?;
        let top = (0..count).map(|i| mass(&Word::from_index(i, depth, alphabet))).collect();
        Self::from_top_level(alphabet, depth, top)
    }

    /// The Bernoulli measure with the given probability vector.
    pub fn bernoulli(probs: &[f64], depth: usize) -> Result<Self, ThermoError> {
        Self::from_fn(probs.len(), depth, |w| w.symbols().iter().map(|&s| probs[s as usize]).product())
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Masses of the words of length `len`, indexed by `Word::index`.
    pub fn level(&self, len: usize) -> &[f64] {
        &self.levels[len - 1]
    }

    pub fn mass(&self, w: &Word) -> f64 {
        if w.is_empty() {
            1.0
        } else {
            self.levels[w.len() - 1][w.index(self.alphabet)]
        }
    }

    /// Largest `|Σ_j μ[w·j] − μ[w]|` over words shorter than the depth,
    /// including `w` empty.
    pub fn consistency_error(&self) -> f64 {
        let n = self.alphabet;
        let root = (self.levels[0].iter().sum::<f64>() - 1.0).abs();
        self.levels
            .windows(2)
            .flat_map(|p| {
                p[1].chunks(n)
                    .zip(&p[0])
                    .map(|(c, m)| (c.iter().sum::<f64>() - m).abs())
            })
            .fold(root, f64::max)
    }

    /// Largest `|Σ_j μ[j·w] − μ[w]|` over words shorter than the depth.
    pub fn shift_invariance_error(&self) -> f64 {
        let n = self.alphabet;
        let mut err = 0.0f64;
        for len in 1..self.depth() {
            let stride = n.pow(len as u32);
            let lower = &self.levels[len - 1];
            let upper = &self.levels[len];
            for (i, m) in lower.iter().enumerate() {
                let s: f64 = (0..n).map(|j| upper[j * stride + i]).sum();
                err = err.max((s - m).abs());
            }
        }
        err
    }

    /// Drops the levels beyond `depth`.
    pub fn truncate(&mut self, depth: usize) {
        self.levels.truncate(depth.max(1));
    }

    /// Masses of words of length `len` in shortlex order with their words.
    pub fn words(&self, len: usize) -> impl Iterator<Item = (Word, f64)> + '_ {
        let n = self.alphabet;
        self.levels[len - 1]
            .iter()
            .enumerate()
            .map(move |(i, &m)| (Word::from_index(i, len, n), m))
    }
}

impl Serialize for CylinderMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            alphabet: usize,
            depth: usize,
            masses: Masses<'a>,
        }
        struct Masses<'a>(&'a CylinderMeasure);
        impl Serialize for Masses<'_> {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                let total: usize = self.0.levels.iter().map(Vec::len).sum();
                let mut map = s.serialize_map(Some(total))?;
                for len in 1..=self.0.depth() {
                    for (w, m) in self.0.words(len) {
                        map.serialize_entry(&w.to_string(), &m)?;
                    }
                }
                map.end()
            }
        }
        Wire {
            alphabet: self.alphabet,
            depth: self.depth(),
            masses: Masses(self),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CylinderMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            alphabet: usize,
            depth: usize,
            masses: std::collections::HashMap<String, f64>,
        }
        let w = Wire::deserialize(d)?;
        use serde::de::Error;
        if w.alphabet == 0 || w.alphabet > MAX_SYMBOLS || w.depth == 0 {
            return Err(D::Error::custom("bad alphabet or depth"));
        }
        let mut levels: Vec<Vec<f64>> = (1..=w.depth).map(|l| vec![f64::NAN; w.alphabet.pow(l as u32)]).collect();
        for (k, m) in w.masses {
            let word = Word::parse(&k).map_err(D::Error::custom)?;
            if word.is_empty() || word.len() > w.depth || word.symbols().iter().any(|&s| s as usize >= w.alphabet) {
                return Err(D::Error::custom(format!("word {k:?} out of range")));
            }
            levels[word.len() - 1][word.index(w.alphabet)] = m;
        }
        if levels.iter().flatten().any(|m| m.is_nan()) {
            return Err(D::Error::custom("missing cylinder masses"));
        }
        Ok(CylinderMeasure {
            alphabet: w.alphabet,
            levels,
        })
    }
}

/// Values indexed by the words of one length, serialized as a map from the
/// word string to the value.
pub(crate) struct WordValues<'a> {
    alphabet: usize,
    len: usize,
    values: &'a [f64],
}

impl<'a> WordValues<'a> {
    pub(crate) fn new(alphabet: usize, len: usize, values: &'a [f64]) -> Self {
        WordValues { alphabet, len, values }
    }
}

impl Serialize for WordValues<'_> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.values.len()))?;
        for (i, v) in self.values.iter().enumerate() {
            map.serialize_entry(&Word::from_index(i, self.len, self.alphabet).to_string(), v)?;
        }
        map.end()
    }
}

/// Finite-depth proxies for the entropy and the Lyapunov term
/// `Λ = lim (1/n) ∫ log ‖A_{i|n}‖ˢ dμ`, both evaluated at the measure's
/// depth `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyLambda {
    pub depth: usize,
    pub entropy: f64,
    pub lambda: f64,
}

pub fn entropy_and_lambda(mu: &CylinderMeasure, t: &MatrixTuple, s: f64) -> Result<EntropyLambda, SemigroupError> {
    let k = mu.depth();
    if mu.alphabet() != t.len() {
        return Err(SemigroupError::BadSize(mu.alphabet()));
    }
    let products = products_by_length(t, k, usize::MAX)?;
    let top = mu.level(k);
    let mut h = 0.0;
    let mut lam = 0.0;
    for (m, p) in top.iter().zip(&products[k - 1]) {
        if *m > 0.0 {
            h -= m * m.ln();
            lam += m * s * p.log_norm();
        }
    }
    Ok(EntropyLambda {
        depth: k,
        entropy: h / k as f64,
        lambda: lam / k as f64,
    })
}
