use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ThermoError;
use crate::semigroup::{MatrixTuple, ScaledProduct, Word};

/// A locally constant function on sequences: its value depends on the first
/// `k` symbols only. `values` is indexed by `Word::index` of that prefix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialModel {
    alphabet: usize,
    k: usize,
    values: Vec<f64>,
}

impl PotentialModel {
    pub fn new(alphabet: usize, k: usize, values: Vec<f64>) -> Result<Self, ThermoError> {
        if alphabet == 0 || k == 0 || alphabet.checked_pow(k as u32) != Some(values.len()) {
            return Err(ThermoError::BadShape);
        }
        Ok(PotentialModel { alphabet, k, values })
    }

    /// The model with the same value everywhere.
    pub fn constant(alphabet: usize, k: usize, c: f64) -> Result<Self, ThermoError> {
        let len = alphabet.checked_pow(k as u32).ok_or(ThermoError::BadShape)?;
        Self::new(alphabet, k, vec![c; len])
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn depth(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `f` at the sequence starting with `w` (padded if shorter than `k`).
    pub fn value(&self, w: &Word) -> f64 {
        let mut idx = 0;
        for i in 0..self.k {
            idx = idx * self.alphabet + w.symbols().get(i).copied().unwrap_or(0) as usize;
        }
        self.values[idx]
    }

    /// Window indices of `σʲw` for `j < |w|`. Past the end of `w` the
    /// sequence is continued by the smallest symbol.
    fn windows(&self, w: &[u8], out: &mut Vec<usize>) {
        out.clear();
        let n = self.alphabet;
        let top = n.pow(self.k as u32 - 1);
        let sym = |i: usize| w.get(i).copied().unwrap_or(0) as usize;
        let mut idx = (0..self.k).fold(0, |acc, i| acc * n + sym(i));
        for j in 0..w.len() {
            out.push(idx);
            idx = (idx % top) * n + sym(j + self.k);
        }
    }

    /// `Σ_{j<|w|} f(σʲw)` under the padding rule of `windows`.
    pub fn birkhoff_sum(&self, w: &Word) -> f64 {
        let mut idx = Vec::with_capacity(w.len());
        self.windows(w.symbols(), &mut idx);
        idx.iter().map(|&i| self.values[i]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShadowingConfig {
    /// Lengths with at most this many words are enumerated exhaustively.
    pub exhaustive_cap: usize,
    /// Uniform random words drawn per sampled length.
    pub samples: usize,
    /// Random words built from runs of a single symbol, per sampled length.
    pub run_samples: usize,
    /// Longest run in those words.
    pub max_run: usize,
    /// Longest repeated block used for periodic sample words. Periodic words
    /// `(a·eʳ·b·eʳ)^∞` with `r ≤ max_run` are added as well.
    pub max_block: usize,
    pub seed: u64,
}

impl Default for ShadowingConfig {
    fn default() -> Self {
        ShadowingConfig {
            exhaustive_cap: 1_000_000,
            samples: 4096,
            run_samples: 4096,
            max_run: 16,
            max_block: 6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthDeficit {
    pub length: usize,
    pub deficit: f64,
    pub words: usize,
    pub exhaustive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowingReport {
    pub horizon: usize,
    pub deficit: f64,
    pub argmax: Word,
    /// True when some length was sampled rather than enumerated.
    pub sampled: bool,
    pub per_length: Vec<LengthDeficit>,
}

fn word_deficit(t: &MatrixTuple, f: &PotentialModel, w: &[u8], buf: &mut Vec<usize>) -> f64 {
    f.windows(w, buf);
    let sum: f64 = buf.iter().map(|&i| f.values[i]).sum();
    let p = w.iter().fold(ScaledProduct::identity(), |acc, &s| acc.mul(t.unit(s as usize)));
    (sum - p.log_norm()).abs()
}

/// Words tested at one length: all of them when few enough, otherwise
/// periodic repetitions of short blocks and of spaced pairs `a·eʳ·b·eʳ`,
/// plus seeded random words, both uniform and made of runs of one symbol.
fn length_words(n: usize, len: usize, cfg: &ShadowingConfig) -> (Vec<Vec<u8>>, bool) {
    if let Some(count) = n.checked_pow(len as u32).filter(|&c| c <= cfg.exhaustive_cap) {
        return ((0..count).map(|i| Word::from_index(i, len, n).symbols().to_vec()).collect(), true);
    }
    let mut words = Vec::new();
    for b in 1..=cfg.max_block.min(len) {
        let Some(count) = n.checked_pow(b as u32).filter(|&c| c <= 1_000) else {
            break;
        };
        for i in 0..count {
            let block = Word::from_index(i, b, n);
            words.push((0..len).map(|j| block.symbols()[j % b]).collect());
        }
    }
    for r in 1..=cfg.max_run {
        for a in 0..n as u8 {
            for b in 0..n as u8 {
                for e in 0..n as u8 {
                    let mut block = vec![a];
                    block.extend(std::iter::repeat_n(e, r));
                    block.push(b);
                    block.extend(std::iter::repeat_n(e, r));
                    words.push((0..len).map(|j| block[j % block.len()]).collect());
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (len as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    for _ in 0..cfg.samples {
        words.push((0..len).map(|_| rng.gen_range(0..n) as u8).collect());
    }
    for _ in 0..cfg.run_samples {
        let mut w = Vec::with_capacity(len);
        while w.len() < len {
            let sym = rng.gen_range(0..n) as u8;
            let run = rng.gen_range(1..=cfg.max_run.max(1)).min(len - w.len());
            w.extend(std::iter::repeat_n(sym, run));
        }
        words.push(w);
    }
    (words, false)
}

/// `max |Σ_{j<|w|} f(σʲw) − log ‖A_w‖|` over words with `1 ≤ |w| ≤ horizon`.
///
/// The word set at each length does not depend on `horizon`, so the result
/// is nondecreasing in `horizon` for a fixed configuration.
pub fn shadowing_deficit(
    t: &MatrixTuple,
    f: &PotentialModel,
    horizon: usize,
    cfg: &ShadowingConfig,
) -> Result<ShadowingReport, ThermoError> {
    if f.alphabet != t.len() {
        return Err(ThermoError::BadShape);
    }
    if horizon == 0 {
        return Err(ThermoError::BadDepth(0));
    }
    let n = t.len();
    let mut per_length = Vec::with_capacity(horizon);
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for len in 1..=horizon {
        let (words, exhaustive) = length_words(n, len, cfg);
        let (d, w) = words
            .par_iter()
            .map_init(Vec::new, |buf, w| (word_deficit(t, f, w, buf), w))
            // Ties resolve to the earlier word so the argmax is deterministic.
            .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
            .expect("nonempty");
        per_length.push(LengthDeficit {
            length: len,
            deficit: d,
            words: words.len(),
            exhaustive,
        });
        if d > best.0 {
            best = (d, w.clone());
        }
    }
    Ok(ShadowingReport {
        horizon,
        deficit: best.0,
        argmax: Word::new(best.1),
        sampled: per_length.iter().any(|l| !l.exhaustive),
        per_length,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialFit {
    pub model: PotentialModel,
    /// Length of the words `x·u` the increments are taken over.
    pub fit_length: usize,
    pub equations: usize,
    pub rms_residual: f64,
}

const FIT_MAX_EQUATIONS: usize = 20_000_000;

/// Least-squares fit of a depth-`k` locally constant potential to the
/// one-step increments `f(w) ≈ log ‖A_w‖ − log ‖A_{σw}‖` over all words of
/// length `k + extension`. Each equation involves a single value of `f`, so
/// the solution is the mean increment over extensions of each window.
///
/// Increments telescope along a word, so a good fit keeps the Birkhoff
/// deficit bounded whenever the increments are nearly locally constant.
pub fn fit_locally_constant(t: &MatrixTuple, k: usize, extension: usize) -> Result<PotentialFit, ThermoError> {
    let n = t.len();
    let len = k + extension;
    let windows = n.checked_pow(k as u32).ok_or(ThermoError::BadDepth(k))?;
    let equations = n
        .checked_pow(len as u32)
        .filter(|&c| c <= FIT_MAX_EQUATIONS)
        .ok_or(ThermoError::BadDepth(k))?;
    if k == 0 {
        return Err(ThermoError::BadDepth(0));
    }
    let per = equations / windows;
    let (values, sq): (Vec<f64>, Vec<f64>) = (0..windows)
        .into_par_iter()
        .map(|i| {
            let incs: Vec<f64> = (0..per)
                .map(|j| {
                    let w = Word::from_index(i * per + j, len, n);
                    let tail = Word::new(w.symbols()[1..].to_vec());
                    t.product(&w).log_norm() - t.product(&tail).log_norm()
                })
                .collect();
            let mean = incs.iter().sum::<f64>() / per as f64;
            (mean, incs.iter().map(|x| (x - mean).powi(2)).sum::<f64>())
        })
        .unzip();
    Ok(PotentialFit {
        model: PotentialModel::new(n, k, values)?,
        fit_length: len,
        equations,
        rms_residual: (sq.iter().sum::<f64>() / equations as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat2;

    #[test]
    fn scalar_tuple_has_zero_deficit() {
        let t = MatrixTuple::new(vec![Mat2::scalar(2.0).unwrap()]).unwrap();
        let f = PotentialModel::constant(1, 3, 2f64.ln()).unwrap();
        let r = shadowing_deficit(&t, &f, 20, &ShadowingConfig::default()).unwrap();
        assert!(r.deficit < 1e-12);
        assert!(!r.sampled);
    }

    #[test]
    fn windows_pad_with_smallest_symbol() {
        let f = PotentialModel::new(2, 2, vec![0.0, 1.0, 10.0, 100.0]).unwrap();
        // "21" → windows "21", "11".
        assert_eq!(f.birkhoff_sum(&Word::parse("21").unwrap()), 10.0);
        assert_eq!(f.birkhoff_sum(&Word::parse("12").unwrap()), 1.0 + 10.0);
        assert_eq!(f.value(&Word::parse("2").unwrap()), 10.0);
    }

    #[test]
    fn scalar_tuple_fit_is_exact() {
        let t = MatrixTuple::new(vec![Mat2::scalar(2.0).unwrap(), Mat2::scalar(5.0).unwrap()]).unwrap();
        let fit = fit_locally_constant(&t, 2, 3).unwrap();
        assert!(fit.rms_residual < 1e-12);
        assert!((fit.model.value(&Word::parse("21").unwrap()) - 5f64.ln()).abs() < 1e-12);
        let r = shadowing_deficit(&t, &fit.model, 12, &ShadowingConfig::default()).unwrap();
        assert!(r.deficit < 1e-7);
    }

    #[test]
    fn sampling_beyond_the_cap_is_deterministic() {
        let t = MatrixTuple::from_entries(&[[2.0, 1.0, 1.0, 1.0], [2.0, 1.0, 1.0, 2.0]]).unwrap();
        let f = PotentialModel::constant(2, 2, 1.0).unwrap();
        let cfg = ShadowingConfig {
            exhaustive_cap: 100,
            samples: 64,
            ..Default::default()
        };
        let a = shadowing_deficit(&t, &f, 12, &cfg).unwrap();
        let b = shadowing_deficit(&t, &f, 12, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.sampled);
        assert!(a.per_length[5].exhaustive && !a.per_length[7].exhaustive);
    }
}
