use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::semigroup::{check_cap, KappaEstimate, MatrixTuple, ScaledProduct, SemigroupError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LowerBoundKind {
    /// `(a_n + s log κ)/n`, valid whenever `κ` bounds the semigroup's
    /// almost-multiplicativity constant from below.
    KappaCertified,
    /// `(1/n) log Σ ρ(A_w)ˢ`; not a proven bound.
    SpectralHeuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureRow {
    pub depth: usize,
    /// `a_n = log Σ_{|w|=n} ‖A_w‖ˢ`.
    pub a_n: f64,
    pub upper: f64,
    pub lower: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureBounds {
    pub s: f64,
    pub depth: usize,
    pub upper: f64,
    pub lower: f64,
    pub lower_kind: LowerBoundKind,
    pub kappa: Option<f64>,
    pub rows: Vec<PressureRow>,
}

impl PressureBounds {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.upper + self.lower)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lower <= p && p <= self.upper
    }
}

/// `log Σ exp(x_i)` summed in slice order.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `(a_n, b_n)` for `n = 1..=depth`, where `a_n = log Σ ‖A_w‖ˢ` and
/// `b_n = log Σ ρ(A_w)ˢ` over words of length `n`. Levels are streamed, so
/// memory is bounded by the last level.
pub fn log_norm_sums(t: &MatrixTuple, s: f64, depth: usize, cap: usize) -> Result<(Vec<f64>, Vec<f64>), SemigroupError> {
    check_cap(t.len(), depth, cap)?;
    let gens: Vec<ScaledProduct> = t.matrices().iter().map(ScaledProduct::from_matrix).collect();
    let mut level = gens.clone();
    let mut a = Vec::with_capacity(depth);
    let mut b = Vec::with_capacity(depth);
    for n in 1..=depth {
        if n > 1 {
            level = level
                .par_iter()
                .flat_map_iter(|p| gens.iter().map(move |g| p.mul(g)))
                .collect();
        }
        let (norms, radii): (Vec<f64>, Vec<f64>) = level
            .par_iter()
            .map(|p| (s * p.log_norm(), s * (p.log_scale + p.unit.spectral_radius().ln())))
            .unzip();
        a.push(log_sum_exp(&norms));
        b.push(log_sum_exp(&radii));
    }
    Ok((a, b))
}

/// Upper and lower bounds for the pressure of `Φˢ` from words of length up
/// to `depth`. The upper bound `a_n/n` holds at every `n` by subadditivity.
pub fn pressure_bounds(
    t: &MatrixTuple,
    s: f64,
    depth: usize,
    kappa: Option<&KappaEstimate>,
    cap: usize,
) -> Result<PressureBounds, SemigroupError> {
    let (a, b) = log_norm_sums(t, s, depth, cap)?;
    let k = kappa.map(|e| e.kappa);
    let rows: Vec<PressureRow> = a
        .iter()
        .zip(&b)
        .enumerate()
        .map(|(i, (&an, &bn))| {
            let n = (i + 1) as f64;
            let lower = match k {
                Some(k) => (an + s * k.ln()) / n,
                None => bn / n,
            };
            PressureRow {
                depth: i + 1,
                a_n: an,
                upper: an / n,
                lower,
            }
        })
        .collect();
    let last = *rows.last().expect("depth >= 1");
    Ok(PressureBounds {
        s,
        depth,
        upper: last.upper,
        lower: last.lower,
        lower_kind: if k.is_some() {
            LowerBoundKind::KappaCertified
        } else {
            LowerBoundKind::SpectralHeuristic
        },
        kappa: k,
        rows,
    })
}
