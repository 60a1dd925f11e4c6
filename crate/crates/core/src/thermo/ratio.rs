use serde::{Deserialize, Serialize};

use super::CylinderMeasure;
use crate::semigroup::{products_by_length, MatrixTuple, SemigroupError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandRow {
    pub depth: usize,
    pub band_min: f64,
    pub band_max: f64,
}

/// Per-depth extremes of a cylinder ratio together with the running band
/// over all depths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioBands {
    pub rows: Vec<BandRow>,
    pub min: f64,
    pub max: f64,
}

impl RatioBands {
    fn from_rows(rows: Vec<BandRow>) -> Self {
        let min = rows.iter().map(|r| r.band_min).fold(f64::INFINITY, f64::min);
        let max = rows.iter().map(|r| r.band_max).fold(f64::NEG_INFINITY, f64::max);
        RatioBands { rows, min, max }
    }

    /// `max/min` at each depth.
    pub fn spreads(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.band_max / r.band_min).collect()
    }

    /// Relative variation of the per-depth spread over rows with
    /// `depth ≥ from`: `(max spread − min spread) / min spread`.
    pub fn spread_variation(&self, from: usize) -> f64 {
        let sp: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.depth >= from)
            .map(|r| r.band_max / r.band_min)
            .collect();
        let lo = sp.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = sp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo) / lo
    }
}

/// `μ[w] / (‖A_w‖ˢ e^{−|w|P})` over all words up to the measure's depth.
pub fn gibbs_type_ratio_test(
    mu: &CylinderMeasure,
    t: &MatrixTuple,
    s: f64,
    pressure: f64,
) -> Result<RatioBands, SemigroupError> {
    if mu.alphabet() != t.len() {
        return Err(SemigroupError::BadSize(mu.alphabet()));
    }
    let levels = products_by_length(t, mu.depth(), usize::MAX)?;
    let rows = levels
        .iter()
        .enumerate()
        .map(|(l, lv)| {
            let n = l + 1;
            let (lo, hi) = lv
                .iter()
                .zip(mu.level(n))
                .map(|(p, m)| (m.ln() - s * p.log_norm() + n as f64 * pressure).exp())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
            BandRow {
                depth: n,
                band_min: lo,
                band_max: hi,
            }
        })
        .collect();
    Ok(RatioBands::from_rows(rows))
}

/// `μ[uv] / (μ[u] μ[v])` over nonempty `u, v`, grouped by `|u| + |v|`, up to
/// the measure's depth.
pub fn quasi_bernoulli_ratio_test(mu: &CylinderMeasure) -> RatioBands {
    let n = mu.alphabet();
    let rows = (2..=mu.depth())
        .map(|total| {
            let joint = mu.level(total);
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for lu in 1..total {
                let lv = total - lu;
                let mv = mu.level(lv);
                let stride = n.pow(lv as u32);
                for (iu, mu_u) in mu.level(lu).iter().enumerate() {
                    for (iv, mu_v) in mv.iter().enumerate() {
                        let r = joint[iu * stride + iv] / (mu_u * mu_v);
                        lo = lo.min(r);
                        hi = hi.max(r);
                    }
                }
            }
            BandRow {
                depth: total,
                band_min: lo,
                band_max: hi,
            }
        })
        .collect();
    RatioBands::from_rows(rows)
}
