use serde::Serialize;

use super::measure::WordValues;
use super::shadowing::PotentialModel;
use super::{CylinderMeasure, ThermoError};
use crate::domination::MulticoneCertificate;
use crate::projective::Direction;
use crate::semigroup::{MatrixTuple, Word, MAX_SYMBOLS};

pub const POWER_TOL: f64 = 1e-12;
pub const POWER_MAX_ITER: usize = 100_000;

/// Leading eigen-data of the depth-`k` transfer operator for the potential
/// `ĥ(x_1…x_k) = s·log ‖A_{x_1}|V̂(x_2…x_k)‖` with `V̂(w) = A_w·c₀`.
///
/// States are words of length `k−1`; the state `a` moves to `b` when `b`
/// is `a` shifted left by one symbol, with weight `e^{ĥ(a·b_last)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferSolution {
    pub s: f64,
    pub cylinder_depth: usize,
    pub alphabet: usize,
    pub eigenvalue: f64,
    pub reference: Direction,
    /// `ĥ` on words of length `k`, indexed by `Word::index`.
    pub potential: Vec<f64>,
    /// Right eigenvector on states, max-normalized.
    pub right: Vec<f64>,
    /// Left eigenvector on states, scaled so that `left·right = 1`.
    pub left: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    /// `e^{ĥ} r_b / Σ_j e^{ĥ} r_{b_j}` for state `a` and symbol `j` at
    /// `a·N + j`: the Markov transitions, stochastic up to rounding.
    transitions: Vec<f64>,
    /// `left_a·right_a`, normalized to sum to one.
    stationary: Vec<f64>,
}

impl Serialize for TransferSolution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            s: f64,
            cylinder_depth: usize,
            alphabet: usize,
            eigenvalue: f64,
            pressure: f64,
            reference: Direction,
            residual: f64,
            iterations: usize,
            potential: WordValues<'a>,
            eigenfunction: WordValues<'a>,
        }
        Wire {
            s: self.s,
            cylinder_depth: self.cylinder_depth,
            alphabet: self.alphabet,
            eigenvalue: self.eigenvalue,
            pressure: self.pressure(),
            reference: self.reference,
            residual: self.residual,
            iterations: self.iterations,
            potential: WordValues::new(self.alphabet, self.cylinder_depth, &self.potential),
            eigenfunction: WordValues::new(self.alphabet, self.cylinder_depth - 1, &self.right),
        }
        .serialize(s)
    }
}

impl TransferSolution {
    /// `log` of the leading eigenvalue.
    pub fn pressure(&self) -> f64 {
        self.eigenvalue.ln()
    }

    fn state_count(&self) -> usize {
        self.alphabet.pow(self.cylinder_depth as u32 - 1)
    }

    /// Mass of the cylinder `[w]` under the invariant Markov measure.
    pub fn mass(&self, w: &Word) -> f64 {
        let n = self.alphabet;
        let k = self.cylinder_depth;
        if w.len() < k - 1 {
            // Sum over extensions to a full state.
            let extra = n.pow((k - 1 - w.len()) as u32);
            let base = w.index(n) * extra;
            return self.stationary[base..base + extra].iter().sum();
        }
        let states = self.state_count();
        let sym = w.symbols();
        let mut state = Word::new(sym[..k - 1].to_vec()).index(n);
        let mut m = self.stationary[state];
        for &x in &sym[k - 1..] {
            let idx = state * n + x as usize;
            m *= self.transitions[idx];
            state = idx % states;
        }
        m
    }

    /// The invariant measure on all cylinders of length `1..=depth`.
    pub fn measure(&self, depth: usize) -> Result<CylinderMeasure, ThermoError> {
        let n = self.alphabet;
        let k = self.cylinder_depth;
        let states = self.state_count();
        let top_len = depth.max(k - 1);
        let mut cur: Vec<f64> = self.stationary.clone();
        for _ in k - 1..top_len {
            let mut next = Vec::with_capacity(cur.len() * n);
            for (i, m) in cur.iter().enumerate() {
                let st = i % states;
                next.extend(self.transitions[st * n..st * n + n].iter().map(|p| m * p));
            }
            cur = next;
        }
        let mut mu = CylinderMeasure::from_top_level(n, top_len, cur)?;
        mu.truncate(depth);
        Ok(mu)
    }

    /// The potential divided by `s`, as a function of depth-`k` cylinders.
    pub fn potential_model(&self) -> PotentialModel {
        PotentialModel::new(
            self.alphabet,
            self.cylinder_depth,
            self.potential.iter().map(|h| h / self.s).collect(),
        )
        .expect("shape matches")
    }
}

/// `ĥ` on every word of length `k` for the reference direction `c0`.
pub fn discretized_potential(t: &MatrixTuple, s: f64, c0: Direction, k: usize) -> Vec<f64> {
    let n = t.len();
    let units: Vec<_> = t.matrices().iter().map(|m| m.normalize_det()).collect();
    // V̂ for every word of length k−1, built right to left: V̂(x·w) = A_x V̂(w).
    let mut dirs = vec![c0];
    for _ in 0..k - 1 {
        let mut next = Vec::with_capacity(dirs.len() * n);
        for u in &units {
            for d in &dirs {
                next.push(d.act(u));
            }
        }
        dirs = next;
    }
    // `dirs` is indexed by word index: first symbol most significant.
    let mut out = Vec::with_capacity(dirs.len() * n);
    for a in t.matrices() {
        for d in &dirs {
            out.push(s * a.norm_on_direction(*d).ln());
        }
    }
    out
}

fn apply_right(potw: &[f64], n: usize, states: usize, v: &[f64], out: &mut [f64]) {
    let shift = states / n;
    for (a, o) in out.iter_mut().enumerate() {
        let b0 = (a % shift) * n;
        *o = (0..n).map(|j| potw[a * n + j] * v[b0 + j]).sum();
    }
}

fn apply_left(potw: &[f64], n: usize, states: usize, v: &[f64], out: &mut [f64]) {
    let shift = states / n;
    for (b, o) in out.iter_mut().enumerate() {
        let j = b % n;
        let tail = b / n;
        *o = (0..n)
            .map(|p| {
                let a = p * shift + tail;
                v[a] * potw[a * n + j]
            })
            .sum();
    }
}

fn power_iterate(
    apply: impl Fn(&[f64], &mut [f64]),
    size: usize,
) -> Result<(f64, Vec<f64>, usize), ThermoError> {
    let mut v = vec![1.0; size];
    let mut w = vec![0.0; size];
    let mut lambda = 0.0;
    for it in 1..=POWER_MAX_ITER {
        apply(&v, &mut w);
        let m = w.iter().cloned().fold(0.0, f64::max);
        let change = w.iter().zip(&v).map(|(x, y)| (x / m - y).abs()).fold(0.0, f64::max);
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / m;
        }
        let done = (m - lambda).abs() <= POWER_TOL * m && change <= POWER_TOL;
        lambda = m;
        if done {
            return Ok((lambda, v, it));
        }
    }
    Err(ThermoError::NoConvergence {
        iterations: POWER_MAX_ITER,
    })
}

/// Solves the depth-`k` transfer operator for the potential anchored at the
/// certificate cone's reference direction.
pub fn transfer_equilibrium(
    t: &MatrixTuple,
    s: f64,
    cert: &MulticoneCertificate,
    k: usize,
) -> Result<TransferSolution, ThermoError> {
    if !cert.verify(t) {
        return Err(ThermoError::NotCertified);
    }
    transfer_from_direction(t, s, cert.cone.reference_direction(), k)
}

/// As [`transfer_equilibrium`] with an explicit reference direction.
pub fn transfer_from_direction(t: &MatrixTuple, s: f64, c0: Direction, k: usize) -> Result<TransferSolution, ThermoError> {
    if !(s > 0.0) {
        return Err(ThermoError::NonPositiveS(s));
    }
    let n = t.len();
    if k < 2 || n.checked_pow(k as u32).is_none_or(|c| c > 50_000_000) || n > MAX_SYMBOLS {
        return Err(ThermoError::BadDepth(k));
    }
    let potential = discretized_potential(t, s, c0, k);
    let states = n.pow(k as u32 - 1);
    let pmax = potential.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // Weights are rescaled by e^{-pmax} for range; the eigenvalue is restored below.
    let potw: Vec<f64> = potential.iter().map(|h| (h - pmax).exp()).collect();

    let (lam_r, right, it_r) = power_iterate(|v, o| apply_right(&potw, n, states, v, o), states)?;
    let (_, mut left, it_l) = power_iterate(|v, o| apply_left(&potw, n, states, v, o), states)?;
    let dot: f64 = left.iter().zip(&right).map(|(a, b)| a * b).sum();
    for x in &mut left {
        *x /= dot;
    }
    let mut tr = vec![0.0; states];
    apply_right(&potw, n, states, &right, &mut tr);
    let residual = tr
        .iter()
        .zip(&right)
        .map(|(x, y)| (x - lam_r * y).abs())
        .fold(0.0, f64::max)
        / lam_r;
    let shift = states / n;
    let mut transitions = Vec::with_capacity(states * n);
    for a in 0..states {
        let b0 = (a % shift) * n;
        let row: Vec<f64> = (0..n).map(|j| potw[a * n + j] * right[b0 + j]).collect();
        let total: f64 = row.iter().sum();
        transitions.extend(row.iter().map(|x| x / total));
    }
    let lr: Vec<f64> = left.iter().zip(&right).map(|(a, b)| a * b).collect();
    let lr_total: f64 = lr.iter().sum();
    let stationary = lr.iter().map(|x| x / lr_total).collect();
    Ok(TransferSolution {
        s,
        cylinder_depth: k,
        alphabet: n,
        eigenvalue: lam_r * pmax.exp(),
        reference: c0,
        potential,
        right,
        left,
        residual,
        iterations: it_r.max(it_l),
        transitions,
        stationary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domination::{domination_decide, DominationBudget};

    fn solve(entries: &[[f64; 4]], k: usize) -> (MatrixTuple, TransferSolution) {
        let t = MatrixTuple::from_entries(entries).unwrap();
        let cert = domination_decide(&t, &DominationBudget::default())
            .certificate()
            .cloned()
            .expect("dominated");
        let sol = transfer_equilibrium(&t, 1.0, &cert, k).unwrap();
        (t, sol)
    }

    #[test]
    fn single_symbol() {
        let (_, sol) = solve(&[[2.0, 0.0, 0.0, 1.0]], 3);
        assert!((sol.eigenvalue - 2.0).abs() < 1e-12);
        let mu = sol.measure(4).unwrap();
        assert!((mu.mass(&Word::parse("1111").unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_pair_matches_bernoulli() {
        let (_, sol) = solve(&[[2.0, 0.0, 0.0, 1.0], [3.0, 0.0, 0.0, 1.0]], 6);
        assert!((sol.eigenvalue - 5.0).abs() < 1e-10);
        let mu = sol.measure(6).unwrap();
        let expected = CylinderMeasure::bernoulli(&[0.4, 0.6], 6).unwrap();
        for len in 1..=6 {
            for (a, b) in mu.level(len).iter().zip(expected.level(len)) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn measure_is_consistent_and_invariant() {
        let (_, sol) = solve(&[[2.0, 1.0, 1.0, 1.0], [2.0, 1.0, 1.0, 2.0]], 6);
        assert!(sol.residual < 1e-10);
        let mu = sol.measure(9).unwrap();
        assert!(mu.consistency_error() < 1e-12);
        assert!(mu.shift_invariance_error() < 1e-9);
        for len in [2, 5, 9] {
            for (w, m) in mu.words(len) {
                assert!((sol.mass(&w) - m).abs() < 1e-12 * m.max(1e-300) + 1e-15);
            }
        }
    }
}
