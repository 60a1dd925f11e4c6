use serde::{Deserialize, Serialize};

use super::{enumerate::products_by_length, MatrixTuple, SemigroupError, Word};
use crate::linalg::MatrixClass;
use crate::projective::Direction;

/// Angular tolerance for "this line is fixed".
pub const INVARIANT_LINE_TOL: f64 = 1e-9;

const EIGEN_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Irreducibility {
    Irreducible,
    /// `invariant` is the first common invariant line found; `all` lists
    /// every common invariant line among the candidates (at most two).
    /// `every_line` is set when all matrices are scalar.
    Reducible {
        invariant: Direction,
        all: Vec<Direction>,
        every_line: bool,
    },
}

impl Irreducibility {
    pub fn is_irreducible(&self) -> bool {
        matches!(self, Irreducibility::Irreducible)
    }
}

/// Searches for a line fixed by every matrix. Candidates are the invariant
/// lines of the first non-scalar matrix.
pub fn irreducibility_check(t: &MatrixTuple) -> Irreducibility {
    let candidates = t.matrices().iter().find_map(|m| m.invariant_lines());
    let Some(candidates) = candidates else {
        let e1 = Direction::new(0.0);
        return Irreducibility::Reducible {
            invariant: e1,
            all: vec![e1],
            every_line: true,
        };
    };
    let common: Vec<Direction> = candidates
        .into_iter()
        .filter(|v| {
            t.matrices()
                .iter()
                .all(|m| v.act(m).distance(*v) <= INVARIANT_LINE_TOL)
        })
        .collect();
    match common.first() {
        Some(&v) => Irreducibility::Reducible {
            invariant: v,
            all: common,
            every_line: false,
        },
        None => Irreducibility::Irreducible,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SharedDirection {
    CommonU(Direction),
    CommonS(Direction),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EigenMultiplicativity {
    Holds(SharedDirection),
    /// `|λ_u(A_u A_v)| ≠ |λ_u(A_u)|·|λ_u(A_v)|` for this pair, or (when `u`
    /// and `v` are single letters with the moduli test passing) the
    /// generators share neither eigendirection.
    Fails { u: Word, v: Word },
    /// A product that is not proximal.
    NotApplicable { word: Word },
}

/// Tests multiplicativity of the leading eigenvalue modulus over all pairs of
/// products of length at most `depth`.
pub fn eigen_multiplicativity_check(
    t: &MatrixTuple,
    depth: usize,
    cap: usize,
) -> Result<EigenMultiplicativity, SemigroupError> {
    let levels = products_by_length(t, depth, cap)?;
    let n = t.len();
    let mut items = Vec::new();
    for (l, lv) in levels.iter().enumerate() {
        for (i, p) in lv.iter().enumerate() {
            let w = Word::from_index(i, l + 1, n);
            if p.unit.classify().class != MatrixClass::Proximal {
                return Ok(EigenMultiplicativity::NotApplicable { word: w });
            }
            items.push((w, p.unit, p.unit.eigen_data().lambda_u.abs()));
        }
    }
    for (wu, mu, lu) in &items {
        for (wv, mv, lv) in &items {
            let lhs = (*mu * *mv).eigen_data().lambda_u.abs();
            let rhs = lu * lv;
            if (lhs - rhs).abs() > EIGEN_REL_TOL * rhs {
                return Ok(EigenMultiplicativity::Fails {
                    u: wu.clone(),
                    v: wv.clone(),
                });
            }
        }
    }

    let data: Vec<_> = t.matrices().iter().map(|m| m.eigen_data()).collect();
    let shared = |pick: fn(&crate::linalg::SpectralData) -> Option<Direction>| {
        let first = pick(&data[0])?;
        data.iter()
            .all(|d| pick(d).is_some_and(|x| x.distance(first) <= INVARIANT_LINE_TOL))
            .then_some(first)
    };
    if let Some(u) = shared(|d| d.u_dir) {
        return Ok(EigenMultiplicativity::Holds(SharedDirection::CommonU(u)));
    }
    if let Some(s) = shared(|d| d.s_dir) {
        return Ok(EigenMultiplicativity::Holds(SharedDirection::CommonS(s)));
    }
    // Moduli multiply yet no direction is shared: report the first pair of
    // generators that disagree on both.
    for i in 0..n {
        for j in 0..n {
            let du = data[i].u_dir.zip(data[j].u_dir).map(|(a, b)| a.distance(b));
            let ds = data[i].s_dir.zip(data[j].s_dir).map(|(a, b)| a.distance(b));
            if du.unwrap_or(f64::INFINITY) > INVARIANT_LINE_TOL
                && ds.unwrap_or(f64::INFINITY) > INVARIANT_LINE_TOL
            {
                return Ok(EigenMultiplicativity::Fails {
                    u: Word::new(vec![i as u8]),
                    v: Word::new(vec![j as u8]),
                });
            }
        }
    }
    unreachable!("some generator pair must disagree when no direction is shared")
}
