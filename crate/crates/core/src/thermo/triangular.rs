use serde::{Deserialize, Serialize};

use super::{CylinderMeasure, ThermoError};
use crate::linalg::Mat2;
use crate::semigroup::{irreducibility_check, Irreducibility, MatrixTuple};

/// Which diagonal of the triangularized tuple weights the measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiagonalSide {
    /// The entries acting on the common invariant line.
    A,
    /// The entries acting on the quotient.
    C,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliState {
    pub side: DiagonalSide,
    pub probabilities: Vec<f64>,
    /// `log Σ |x_i|ˢ` for this side.
    pub pressure: f64,
}

impl BernoulliState {
    pub fn measure(&self, depth: usize) -> Result<CylinderMeasure, ThermoError> {
        CylinderMeasure::bernoulli(&self.probabilities, depth)
    }
}

/// Diagonals `(a_i, c_i)` of the tuple written in a basis whose first vector
/// spans the common invariant line.
pub fn triangular_diagonals(t: &MatrixTuple) -> Result<Vec<(f64, f64)>, ThermoError> {
    let v = match irreducibility_check(t) {
        Irreducibility::Irreducible => return Err(ThermoError::NotReducible),
        Irreducibility::Reducible { invariant, .. } => invariant,
    };
    let g = Mat2::rotation(-v.theta());
    let conj = t.conjugate(&g);
    Ok(conj
        .matrices()
        .iter()
        .map(|m| {
            let [a, _, _, d] = m.entries();
            (a, d)
        })
        .collect())
}

/// The Bernoulli equilibrium states of a reducible tuple: `p_i ∝ |a_i|ˢ` when
/// `Σ|a_i|ˢ` is the larger sum, `p_i ∝ |c_i|ˢ` when `Σ|c_i|ˢ` is, and both
/// when the sums agree to relative tolerance `1e-12`.
pub fn bernoulli_equilibrium_triangular(t: &MatrixTuple, s: f64) -> Result<Vec<BernoulliState>, ThermoError> {
    let diag = triangular_diagonals(t)?;
    let weights = |pick: fn(&(f64, f64)) -> f64| -> Vec<f64> { diag.iter().map(|x| pick(x).abs().powf(s)).collect() };
    let wa = weights(|x| x.0);
    let wc = weights(|x| x.1);
    let sa: f64 = wa.iter().sum();
    let sc: f64 = wc.iter().sum();
    let state = |side, w: &[f64], total: f64| BernoulliState {
        side,
        probabilities: w.iter().map(|x| x / total).collect(),
        pressure: total.ln(),
    };
    let tie = (sa - sc).abs() <= 1e-12 * sa.max(sc);
    Ok(if tie {
        vec![state(DiagonalSide::A, &wa, sa), state(DiagonalSide::C, &wc, sc)]
    } else if sa > sc {
        vec![state(DiagonalSide::A, &wa, sa)]
    } else {
        vec![state(DiagonalSide::C, &wc, sc)]
    })
}
