use serde::{Deserialize, Serialize};

use super::transfer::TransferSolution;
use super::{CylinderMeasure, ThermoError};
use crate::linalg::Mat2;
use crate::semigroup::{DecompositionResult, MatrixTuple, Word};

/// Projective triviality tolerance on the det-normalized matrix.
const SCALAR_TOL: f64 = 1e-9;

/// Weights of the η construction: each scalar generator `j` contributes
/// `q_j = |c_j|ˢ e^{−Q}`, each remaining generator the factor `e^{R−Q}`
/// times the base measure, with `Q = log(Σ_j |c_j|ˢ + e^R)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaWeights {
    pub scalar_indices: Vec<usize>,
    pub hyperbolic_indices: Vec<usize>,
    pub q: Vec<f64>,
    /// Pressure of the base sub-tuple.
    pub r: f64,
    /// Pressure of the full tuple.
    pub big_q: f64,
}

impl EtaWeights {
    pub fn hyperbolic_weight(&self) -> f64 {
        (self.r - self.big_q).exp()
    }
}

/// Deletes the scalar symbols from `w` and relabels the rest to the base
/// alphabet.
pub fn kappa_map(w: &Word, hyperbolic_indices: &[usize]) -> Word {
    Word::new(
        w.symbols()
            .iter()
            .filter_map(|&s| hyperbolic_indices.iter().position(|&h| h == s as usize).map(|p| p as u8))
            .collect(),
    )
}

fn scalar_factor(m: &Mat2) -> Option<f64> {
    let u = m.normalize_det();
    let sign = if u.trace() >= 0.0 { 1.0 } else { -1.0 };
    let dev = u.max_abs_diff(&Mat2::identity().scale(sign));
    (dev <= SCALAR_TOL).then(|| m.det().abs().sqrt())
}

pub fn eta_weights(t: &MatrixTuple, split: &DecompositionResult, base: &TransferSolution) -> Result<EtaWeights, ThermoError> {
    if split.hyperbolic_indices.is_empty() {
        return Err(ThermoError::Precondition("no non-conformal generators".into()));
    }
    if base.alphabet != split.hyperbolic_indices.len() {
        return Err(ThermoError::Precondition(format!(
            "base measure has {} symbols but the split has {} non-conformal generators",
            base.alphabet,
            split.hyperbolic_indices.len()
        )));
    }
    let mut c = Vec::with_capacity(split.conformal_indices.len());
    for &j in &split.conformal_indices {
        let cj = scalar_factor(t.get(j))
            .ok_or_else(|| ThermoError::Precondition(format!("generator {} is not a scalar matrix", j + 1)))?;
        c.push(cj);
    }
    let s = base.s;
    let r = base.pressure();
    let big_q = (c.iter().map(|x| x.powf(s)).sum::<f64>() + r.exp()).ln();
    Ok(EtaWeights {
        scalar_indices: split.conformal_indices.clone(),
        hyperbolic_indices: split.hyperbolic_indices.clone(),
        q: c.iter().map(|x| (s * x.ln() - big_q).exp()).collect(),
        r,
        big_q,
    })
}

/// The measure `η[w] = Π q_{w_i} over scalar symbols · e^{(R−Q)·#h} ·
/// μ_h[κ(w)]` on cylinders up to length `k`.
pub fn eta_measure(
    t: &MatrixTuple,
    split: &DecompositionResult,
    base: &TransferSolution,
    k: usize,
) -> Result<(CylinderMeasure, EtaWeights), ThermoError> {
    let weights = eta_weights(t, split, base)?;
    let hw = weights.hyperbolic_weight();
    let mut sym_weight = vec![0.0; t.len()];
    for (&j, &q) in weights.scalar_indices.iter().zip(&weights.q) {
        sym_weight[j] = q;
    }
    for &h in &weights.hyperbolic_indices {
        sym_weight[h] = hw;
    }
    let mu = CylinderMeasure::from_fn(t.len(), k, |w| {
        let f: f64 = w.symbols().iter().map(|&s| sym_weight[s as usize]).product();
        f * base.mass(&kappa_map(w, &weights.hyperbolic_indices))
    })?;
    Ok((mu, weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::conformal_split;
    use crate::thermo::transfer::transfer_from_direction;
    use crate::projective::Direction;

    #[test]
    fn kappa_deletes_and_relabels() {
        let w = Word::parse("3132233").unwrap();
        assert_eq!(kappa_map(&w, &[0, 1]).to_string(), "122");
        assert_eq!(kappa_map(&w, &[1, 2]).to_string(), "221122");
    }

    #[test]
    fn diagonal_with_scalar_is_bernoulli() {
        // (diag(2,1), diag(3,1), 2I): the base state is Bernoulli(2/5, 3/5)
        // with R = log 5, so η is Bernoulli(2/7, 3/7, 2/7).
        let t = MatrixTuple::from_entries(&[[2.0, 0.0, 0.0, 1.0], [3.0, 0.0, 0.0, 1.0], [2.0, 0.0, 0.0, 2.0]]).unwrap();
        let split = conformal_split(&t);
        assert_eq!(split.conformal_indices, vec![2]);
        let sub = t.subtuple(&split.hyperbolic_indices).unwrap();
        let base = transfer_from_direction(&sub, 1.0, Direction::new(0.0), 4).unwrap();
        let (eta, w) = eta_measure(&t, &split, &base, 5).unwrap();
        assert!((w.big_q - 7f64.ln()).abs() < 1e-10);
        let expect = CylinderMeasure::bernoulli(&[2.0 / 7.0, 3.0 / 7.0, 2.0 / 7.0], 5).unwrap();
        for len in 1..=5 {
            for (a, b) in eta.level(len).iter().zip(expect.level(len)) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn non_scalar_conformal_generator_is_rejected() {
        let t = MatrixTuple::new(vec![Mat2::new(2.0, 1.0, 1.0, 1.0).unwrap(), Mat2::rotation(1.0)]).unwrap();
        let split = conformal_split(&t);
        let sub = t.subtuple(&split.hyperbolic_indices).unwrap();
        let base = transfer_from_direction(&sub, 1.0, Direction::new(0.5), 3).unwrap();
        assert!(matches!(eta_measure(&t, &split, &base, 3), Err(ThermoError::Precondition(_))));
    }
}
