use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{MatrixTuple, ScaledProduct, SemigroupError, Word};

/// Default bound on `N^depth` for exhaustive enumeration.
pub const DEFAULT_CAP: usize = 10_000_000;

/// Fails with the largest feasible depth when `n^depth > cap`.
pub fn check_cap(n: usize, depth: usize, cap: usize) -> Result<(), SemigroupError> {
    if depth == 0 {
        return Err(SemigroupError::ZeroDepth);
    }
    let mut max_depth = 0;
    let mut acc: usize = 1;
    while let Some(next) = acc.checked_mul(n) {
        if next > cap {
            break;
        }
        acc = next;
        max_depth += 1;
        if n == 1 && max_depth >= depth {
            break;
        }
    }
    if n == 1 || max_depth >= depth {
        Ok(())
    } else {
        Err(SemigroupError::CapExceeded {
            count: n,
            depth,
            max_depth,
        })
    }
}

/// Streams every word of length `1..=depth` with its product, in shortlex
/// order (by length, then lexicographically). Prefix products are cached, so
/// each step costs one multiplication on average.
pub struct Products<'a> {
    tuple: &'a MatrixTuple,
    depth: usize,
    len: usize,
    digits: Vec<u8>,
    stack: Vec<ScaledProduct>,
    fresh: bool,
}

impl<'a> Products<'a> {
    fn new(tuple: &'a MatrixTuple, depth: usize) -> Self {
        Products {
            tuple,
            depth,
            len: 0,
            digits: Vec::new(),
            stack: Vec::new(),
            fresh: true,
        }
    }

    fn rebuild_from(&mut self, j: usize) {
        self.stack.truncate(j);
        for k in j..self.len {
            let g = self.tuple.unit(self.digits[k] as usize);
            let p = match self.stack.last() {
                Some(prev) => prev.mul(g),
                None => *g,
            };
            self.stack.push(p);
        }
    }
}

impl Iterator for Products<'_> {
    type Item = (Word, ScaledProduct);

    fn next(&mut self) -> Option<Self::Item> {
        let n = self.tuple.len() as u8;
        if self.fresh {
            self.fresh = false;
            self.len = 1;
            self.digits = vec![0];
            self.rebuild_from(0);
        } else {
            match self.digits.iter().rposition(|&d| d + 1 < n) {
                Some(j) => {
                    self.digits[j] += 1;
                    for d in &mut self.digits[j + 1..] {
                        *d = 0;
                    }
                    self.rebuild_from(j);
                }
                None => {
                    if self.len >= self.depth {
                        return None;
                    }
                    self.len += 1;
                    self.digits = vec![0; self.len];
                    self.rebuild_from(0);
                }
            }
        }
        Some((Word::new(self.digits.clone()), *self.stack.last().unwrap()))
    }
}

/// Every word of length `1..=depth` with its product, subject to the cap on
/// `N^depth`. With `normalize` unset the product carries its actual scale;
/// with it set the determinant factor is dropped (`log_scale = 0`).
pub fn enumerate_products(
    t: &MatrixTuple,
    depth: usize,
    normalize: bool,
    cap: usize,
) -> Result<impl Iterator<Item = (Word, ScaledProduct)> + '_, SemigroupError> {
    check_cap(t.len(), depth, cap)?;
    Ok(Products::new(t, depth).map(move |(w, mut p)| {
        if normalize {
            p.log_scale = 0.0;
        }
        (w, p)
    }))
}

/// Products grouped by length: `out[L-1][Word::index]` is the product of the
/// word of length `L` with that index.
pub fn products_by_length(
    t: &MatrixTuple,
    depth: usize,
    cap: usize,
) -> Result<Vec<Vec<ScaledProduct>>, SemigroupError> {
    check_cap(t.len(), depth, cap)?;
    let mut out: Vec<Vec<ScaledProduct>> = Vec::with_capacity(depth);
    let first: Vec<ScaledProduct> = (0..t.len()).map(|i| *t.unit(i)).collect();
    out.push(first);
    for _ in 1..depth {
        let prev = out.last().unwrap();
        let next = prev
            .iter()
            .flat_map(|p| (0..t.len()).map(move |i| p.mul(t.unit(i))))
            .collect();
        out.push(next);
    }
    Ok(out)
}

/// Finite-depth estimate of the almost-multiplicativity constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaEstimate {
    pub depth: usize,
    pub kappa: f64,
    pub argmin: (Word, Word),
}

/// `min ‖A_u A_v‖ / (‖A_u‖ ‖A_v‖)` over nonempty `u, v` with `|u|, |v| ≤ depth`.
pub fn kappa_estimate(t: &MatrixTuple, depth: usize, cap: usize) -> Result<KappaEstimate, SemigroupError> {
    Ok(kappa_profile(t, depth, cap)?.pop().expect("depth >= 1"))
}

/// The estimates for every depth `1..=depth`, computed in one pass over all
/// pairs. Entry `n−1` is the minimum over pairs with `max(|u|, |v|) ≤ n`, so
/// the sequence is nonincreasing.
pub fn kappa_profile(t: &MatrixTuple, depth: usize, cap: usize) -> Result<Vec<KappaEstimate>, SemigroupError> {
    let levels = products_by_length(t, depth, cap)?;
    let n = t.len();
    // (length, index, unit, norm)
    let flat: Vec<(usize, usize, ScaledProduct, f64)> = levels
        .iter()
        .enumerate()
        .flat_map(|(l, lv)| {
            lv.iter()
                .enumerate()
                .map(move |(i, p)| (l + 1, i, *p, p.unit.op_norm()))
        })
        .collect();

    // Per-u scan: best pair for each max-length class. Ties resolve to the
    // earliest pair in shortlex order, so the result is deterministic.
    type Best = (f64, usize, usize);
    let per_u: Vec<Vec<Option<Best>>> = flat
        .par_iter()
        .enumerate()
        .map(|(ui, (lu, _, pu, nu))| {
            let mut best: Vec<Option<Best>> = vec![None; depth];
            for (vi, (lv, _, pv, nv)) in flat.iter().enumerate() {
                let r = (pu.unit * pv.unit).op_norm() / (nu * nv);
                let class = (*lu).max(*lv) - 1;
                match best[class] {
                    Some((b, _, _)) if b <= r => {}
                    _ => best[class] = Some((r, ui, vi)),
                }
            }
            best
        })
        .collect();

    let mut class_best: Vec<Option<Best>> = vec![None; depth];
    for row in per_u {
        for (c, cand) in row.into_iter().enumerate() {
            if let Some(x) = cand {
                match class_best[c] {
                    Some(b) if b.0 <= x.0 => {}
                    _ => class_best[c] = Some(x),
                }
            }
        }
    }

    let word_of = |k: usize| {
        let (l, i, _, _) = flat[k];
        Word::from_index(i, l, n)
    };
    let mut out = Vec::with_capacity(depth);
    let mut running: Option<Best> = None;
    for (d, cand) in class_best.into_iter().enumerate() {
        if let Some(x) = cand {
            match running {
                Some(b) if b.0 <= x.0 => {}
                _ => running = Some(x),
            }
        }
        let (k, u, v) = running.expect("class 0 always has pairs");
        out.push(KappaEstimate {
            depth: d + 1,
            kappa: k.min(1.0),
            argmin: (word_of(u), word_of(v)),
        });
    }
    Ok(out)
}
