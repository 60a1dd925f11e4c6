//! The real projective line and its multicones.
//!
//! A line through the origin is stored as an angle `θ ∈ [0, π)`. Closed
//! projective intervals are arcs `[start, start + length]` traversed in the
//! direction of increasing angle, taken modulo π. This is the doubled-angle
//! circle model with the factor of two left implicit, so arcs never straddle a
//! branch cut.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Mat2;

/// Arcs closer than this are merged during canonicalization.
pub const MERGE_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProjectiveError {
    #[error("interval length {0} is not in (0, π)")]
    BadLength(f64),
    #[error("union covers the whole projective line")]
    NotProper,
    #[error("a multicone needs at least one arc")]
    Empty,
    #[error("non-finite angle")]
    NonFinite,
}

/// Reduces an angle into `[0, π)`.
pub fn reduce(theta: f64) -> f64 {
    let r = theta.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}

/// Offset of `x` from `base` going counterclockwise, in `[0, π)`.
fn ccw_offset(base: f64, x: f64) -> f64 {
    reduce(x - base)
}

/// A point of ℝP¹.
#[derive(Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Direction {
    theta: f64,
}

impl fmt::Debug for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Direction({})", self.theta)
    }
}

impl Direction {
    pub fn new(theta: f64) -> Self {
        Direction {
            theta: reduce(theta),
        }
    }

    /// The line spanned by a nonzero vector.
    pub fn from_vector(x: f64, y: f64) -> Self {
        Self::new(y.atan2(x))
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn unit_vector(&self) -> [f64; 2] {
        let (s, c) = self.theta.sin_cos();
        [c, s]
    }

    /// Angle between the two lines, in `[0, π/2]`.
    pub fn distance(&self, other: Direction) -> f64 {
        let d = ccw_offset(self.theta, other.theta);
        d.min(PI - d)
    }

    /// The line `m·v`.
    pub fn act(&self, m: &Mat2) -> Direction {
        let [x, y] = m.apply(self.unit_vector());
        Direction::from_vector(x, y)
    }
}

/// The line `m·v`.
pub fn act_direction(m: &Mat2, v: Direction) -> Direction {
    v.act(m)
}

/// A closed arc of ℝP¹ of length in `(0, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct ProjInterval {
    start: f64,
    length: f64,
}

impl TryFrom<[f64; 2]> for ProjInterval {
    type Error = ProjectiveError;

    fn try_from(v: [f64; 2]) -> Result<Self, Self::Error> {
        ProjInterval::new(v[0], v[1])
    }
}

impl From<ProjInterval> for [f64; 2] {
    fn from(i: ProjInterval) -> Self {
        [i.start, i.length]
    }
}

impl ProjInterval {
    pub fn new(start: f64, length: f64) -> Result<Self, ProjectiveError> {
        if !start.is_finite() || !length.is_finite() {
            return Err(ProjectiveError::NonFinite);
        }
        if !(length > 0.0 && length < PI) {
            return Err(ProjectiveError::BadLength(length));
        }
        Ok(ProjInterval {
            start: reduce(start),
            length,
        })
    }

    /// The arc from `a` counterclockwise to `b`.
    pub fn between(a: Direction, b: Direction) -> Result<Self, ProjectiveError> {
        Self::new(a.theta, ccw_offset(a.theta, b.theta))
    }

    pub fn start(&self) -> Direction {
        Direction::new(self.start)
    }

    pub fn end(&self) -> Direction {
        Direction::new(self.start + self.length)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn midpoint(&self) -> Direction {
        Direction::new(self.start + self.length / 2.0)
    }

    pub fn contains(&self, v: Direction) -> bool {
        ccw_offset(self.start, v.theta) <= self.length
    }

    /// Distance from `v` to the arc (zero inside).
    pub fn distance_to(&self, v: Direction) -> f64 {
        if self.contains(v) {
            0.0
        } else {
            v.distance(self.start()).min(v.distance(self.end()))
        }
    }

    /// Image arc under `m`. The endpoints map to endpoints; which of the two
    /// complementary arcs is the image is decided by the image of the
    /// midpoint.
    pub fn act(&self, m: &Mat2) -> ProjInterval {
        let p = self.start().act(m);
        let q = self.end().act(m);
        let mid = self.midpoint().act(m);
        let pq = ccw_offset(p.theta, q.theta);
        let (start, length) = if ccw_offset(p.theta, mid.theta) <= pq {
            (p.theta, pq)
        } else {
            (q.theta, ccw_offset(q.theta, p.theta))
        };
        // A homeomorphism maps a proper arc to a proper arc; rounding can
        // only push the length to the boundary values.
        ProjInterval {
            start,
            length: length.clamp(f64::MIN_POSITIVE, PI - f64::EPSILON),
        }
    }
}

/// Image of an arc under `m`.
pub fn act_interval(m: &Mat2, i: &ProjInterval) -> ProjInterval {
    i.act(m)
}

/// Outcome of a strict containment test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Containment {
    /// Inner lies in the interior of outer; `margin` is the distance from
    /// inner to the complement of outer.
    Inside { margin: f64 },
    /// A point of inner not in the interior of outer.
    Outside { witness: Direction },
}

impl Containment {
    pub fn is_inside(&self) -> bool {
        matches!(self, Containment::Inside { .. })
    }

    pub fn margin(&self) -> Option<f64> {
        match self {
            Containment::Inside { margin } => Some(*margin),
            Containment::Outside { .. } => None,
        }
    }
}

/// A proper nonempty finite union of pairwise disjoint closed arcs, kept in
/// canonical form: sorted by start angle with positive gaps between arcs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ProjInterval>", into = "Vec<ProjInterval>")]
pub struct Multicone {
    arcs: Vec<ProjInterval>,
}

impl TryFrom<Vec<ProjInterval>> for Multicone {
    type Error = ProjectiveError;

    fn try_from(v: Vec<ProjInterval>) -> Result<Self, Self::Error> {
        Multicone::new(v)
    }
}

impl From<Multicone> for Vec<ProjInterval> {
    fn from(m: Multicone) -> Self {
        m.arcs
    }
}

impl Multicone {
    /// Canonicalizes an arbitrary collection of arcs.
    pub fn new(arcs: Vec<ProjInterval>) -> Result<Self, ProjectiveError> {
        if arcs.is_empty() {
            return Err(ProjectiveError::Empty);
        }
        let mut spans: Vec<(f64, f64)> = arcs.iter().map(|a| (a.start, a.start + a.length)).collect();
        spans.sort_by(|x, y| x.0.total_cmp(&y.0));

        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(spans.len());
        for (s, e) in spans {
            match merged.last_mut() {
                Some(last) if s <= last.1 + MERGE_EPS => last.1 = last.1.max(e),
                _ => merged.push((s, e)),
            }
        }
        // Wrap-around: the tail may reach past the first arc shifted by π.
        loop {
            if merged.len() == 1 {
                let (s, e) = merged[0];
                if e - s >= PI - MERGE_EPS {
                    return Err(ProjectiveError::NotProper);
                }
                break;
            }
            let first = merged[0];
            let last = *merged.last().unwrap();
            if last.1 + MERGE_EPS >= first.0 + PI {
                let n = merged.len();
                merged[n - 1].1 = last.1.max(first.1 + PI);
                merged.remove(0);
                continue;
            }
            break;
        }
        let mut out: Vec<ProjInterval> = merged
            .into_iter()
            .map(|(s, e)| ProjInterval {
                start: reduce(s),
                length: e - s,
            })
            .collect();
        out.sort_by(|x, y| x.start.total_cmp(&y.start));
        Ok(Multicone { arcs: out })
    }

    pub fn from_arc(start: f64, length: f64) -> Result<Self, ProjectiveError> {
        Ok(Multicone {
            arcs: vec![ProjInterval::new(start, length)?],
        })
    }

    pub fn arcs(&self) -> &[ProjInterval] {
        &self.arcs
    }

    pub fn component_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn total_length(&self) -> f64 {
        self.arcs.iter().map(|a| a.length).sum()
    }

    pub fn boundary(&self) -> Vec<Direction> {
        self.arcs.iter().flat_map(|a| [a.start(), a.end()]).collect()
    }

    pub fn contains(&self, v: Direction) -> bool {
        self.arcs.iter().any(|a| a.contains(v))
    }

    /// Whether `v` lies in the interior with at least `eps` to spare.
    pub fn contains_interior(&self, v: Direction, eps: f64) -> bool {
        self.arcs.iter().any(|a| {
            let off = ccw_offset(a.start, v.theta);
            off > eps && off < a.length - eps
        })
    }

    pub fn distance_to(&self, v: Direction) -> f64 {
        self.arcs
            .iter()
            .map(|a| a.distance_to(v))
            .fold(f64::INFINITY, f64::min)
    }

    /// Midpoint of the longest component.
    pub fn reference_direction(&self) -> Direction {
        self.arcs
            .iter()
            .max_by(|a, b| a.length.total_cmp(&b.length))
            .expect("multicone is nonempty")
            .midpoint()
    }

    /// Closure of the complement.
    pub fn complement(&self) -> Multicone {
        let n = self.arcs.len();
        let arcs = (0..n)
            .map(|i| {
                let cur = self.arcs[i];
                let next = self.arcs[(i + 1) % n];
                let start = cur.start + cur.length;
                let len = ccw_offset(reduce(start), next.start);
                let len = if n == 1 { PI - cur.length } else { len };
                ProjInterval {
                    start: reduce(start),
                    length: len,
                }
            })
            .collect::<Vec<_>>();
        let mut arcs = arcs;
        arcs.sort_by(|x, y| x.start.total_cmp(&y.start));
        Multicone { arcs }
    }

    /// Image under `m`.
    pub fn act(&self, m: &Mat2) -> Multicone {
        let arcs = self.arcs.iter().map(|a| a.act(m)).collect();
        // Images of disjoint arcs under a homeomorphism stay disjoint and
        // proper; canonicalization only re-sorts and absorbs rounding.
        Multicone::new(arcs).unwrap_or_else(|_| self.clone())
    }

    /// Closed `r`-fattening.
    pub fn fatten(&self, r: f64) -> Result<Multicone, ProjectiveError> {
        let arcs = self
            .arcs
            .iter()
            .map(|a| {
                let len = a.length + 2.0 * r;
                if len >= PI {
                    Err(ProjectiveError::NotProper)
                } else {
                    ProjInterval::new(a.start - r, len)
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Multicone::new(arcs)
    }

    /// Union of two multicones.
    pub fn union(&self, other: &Multicone) -> Result<Multicone, ProjectiveError> {
        let mut arcs = self.arcs.clone();
        arcs.extend_from_slice(&other.arcs);
        Multicone::new(arcs)
    }

    /// Same arcs up to `eps` in every endpoint.
    pub fn approx_eq(&self, other: &Multicone, eps: f64) -> bool {
        self.arcs.len() == other.arcs.len()
            && self.arcs.iter().zip(&other.arcs).all(|(a, b)| {
                a.start().distance(b.start()) <= eps && (a.length - b.length).abs() <= eps
            })
    }

    /// Non-strict containment allowing `tol` of slack at each endpoint.
    pub fn contained_in(&self, outer: &Multicone, tol: f64) -> bool {
        self.arcs.iter().all(|x| {
            outer.arcs.iter().any(|o| {
                let mut off = ccw_offset(o.start, x.start);
                if off > PI - tol {
                    off -= PI;
                }
                off >= -tol && off + x.length <= o.length + tol
            })
        })
    }
}

/// Closed `r`-neighbourhood of a finite set of directions.
pub fn neighborhood(points: &[Direction], r: f64) -> Result<Multicone, ProjectiveError> {
    if points.is_empty() {
        return Err(ProjectiveError::Empty);
    }
    if !(r > 0.0 && 2.0 * r < PI) {
        return Err(if r > 0.0 {
            ProjectiveError::NotProper
        } else {
            ProjectiveError::BadLength(2.0 * r)
        });
    }
    let arcs = points
        .iter()
        .map(|p| ProjInterval::new(p.theta - r, 2.0 * r))
        .collect::<Result<Vec<_>, _>>()?;
    Multicone::new(arcs)
}

/// Tests `inner ⊂ interior(outer)`.
pub fn strictly_inside(inner: &Multicone, outer: &Multicone) -> Containment {
    let mut margin = f64::INFINITY;
    for x in &inner.arcs {
        let mut placed = false;
        for o in &outer.arcs {
            let off = ccw_offset(o.start, x.start);
            if off < o.length {
                // x starts inside o (or on its start point).
                let tail = o.length - off - x.length;
                if off > 0.0 && tail > 0.0 {
                    margin = margin.min(off).min(tail);
                    placed = true;
                } else if off == 0.0 {
                    return Containment::Outside { witness: x.start() };
                } else {
                    return Containment::Outside { witness: o.end() };
                }
                break;
            }
        }
        if !placed {
            return Containment::Outside { witness: x.start() };
        }
    }
    Containment::Inside { margin }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn close(a: f64, b: f64) -> bool {
        Direction::new(a).distance(Direction::new(b)) < 1e-12
    }

    #[test]
    fn act_direction_examples() {
        let v = Direction::new(0.7);
        assert!(close(v.act(&Mat2::identity()).theta(), 0.7));
        assert!(close(v.act(&Mat2::rotation(1.0)).theta(), 1.7));
        let a1 = Mat2::new(2.0, 1.0, 1.0, 1.0).unwrap();
        assert!(close(Direction::new(0.0).act(&a1).theta(), 0.5f64.atan()));
    }

    #[test]
    fn act_interval_examples() {
        let i = ProjInterval::new(0.0, FRAC_PI_4).unwrap();
        assert_eq!(i.act(&Mat2::identity()), i);

        let img = i.act(&Mat2::diag(1.0, 2.0).unwrap());
        assert!(close(img.start().theta(), 0.0));
        assert!((img.length() - 2f64.atan()).abs() < 1e-12);

        let img = i.act(&Mat2::rotation(FRAC_PI_2));
        assert!(close(img.start().theta(), FRAC_PI_2));
        assert!((img.length() - FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn act_interval_with_reflection() {
        // det < 0 reverses orientation; the image is still the arc [0, π/4].
        let swap = Mat2::new(0.0, 1.0, 1.0, 0.0).unwrap();
        let i = ProjInterval::new(FRAC_PI_4, FRAC_PI_4).unwrap();
        let img = i.act(&swap);
        assert!(close(img.start().theta(), 0.0));
        assert!((img.length() - FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn strictly_inside_examples() {
        let outer = Multicone::from_arc(0.0, 0.3).unwrap();
        let inner = Multicone::from_arc(0.1, 0.1).unwrap();
        let c = strictly_inside(&inner, &outer);
        assert!((c.margin().unwrap() - 0.1).abs() < 1e-12);

        let inner = Multicone::from_arc(0.0, 0.2).unwrap();
        match strictly_inside(&inner, &outer) {
            Containment::Outside { witness } => assert!(close(witness.theta(), 0.0)),
            other => panic!("unexpected {other:?}"),
        }

        // Example pair of positive matrices against the closed first quadrant.
        let q = Multicone::from_arc(0.0, FRAC_PI_2).unwrap();
        let a1 = Mat2::new(2.0, 1.0, 1.0, 1.0).unwrap();
        let a2 = Mat2::new(2.0, 1.0, 1.0, 2.0).unwrap();
        let img = q.act(&a1).union(&q.act(&a2)).unwrap();
        let c = strictly_inside(&img, &q);
        // Images are [atan 1/2, π/4] and [atan 1/2, atan 2].
        assert!((c.margin().unwrap() - 0.5f64.atan()).abs() < 1e-12);
    }

    #[test]
    fn strictly_inside_overhang_witness() {
        let outer = Multicone::from_arc(0.0, 0.3).unwrap();
        let inner = Multicone::from_arc(0.2, 0.3).unwrap();
        match strictly_inside(&inner, &outer) {
            Containment::Outside { witness } => assert!(close(witness.theta(), 0.3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn neighborhood_examples() {
        let n = neighborhood(&[Direction::new(0.0)], 0.1).unwrap();
        assert_eq!(n.component_count(), 1);
        assert!(close(n.arcs()[0].start().theta(), -0.1));
        assert!((n.arcs()[0].length() - 0.2).abs() < 1e-12);

        let n = neighborhood(&[Direction::new(0.0), Direction::new(FRAC_PI_2)], 0.2).unwrap();
        assert_eq!(n.component_count(), 2);

        let n = neighborhood(&[Direction::new(0.0), Direction::new(0.15)], 0.1).unwrap();
        assert_eq!(n.component_count(), 1);
        assert!(close(n.arcs()[0].start().theta(), -0.1));
        assert!((n.arcs()[0].length() - 0.35).abs() < 1e-12);

        let full = neighborhood(&[Direction::new(0.0), Direction::new(FRAC_PI_2)], 0.8);
        assert_eq!(full, Err(ProjectiveError::NotProper));
    }

    #[test]
    fn canonical_wraparound_merge() {
        let arcs = vec![
            ProjInterval::new(3.0, 0.3).unwrap(),
            ProjInterval::new(0.1, 0.2).unwrap(),
            ProjInterval::new(1.0, 0.1).unwrap(),
        ];
        let m = Multicone::new(arcs).unwrap();
        assert_eq!(m.component_count(), 2);
        // [3.0, 3.3] wraps past π and swallows the start of [0.1, 0.3].
        assert!((m.total_length() - (0.3 + PI - 3.0 + 0.1)).abs() < 1e-12);
        assert!(m.contains(Direction::new(0.05)));
        assert!(m.contains(Direction::new(3.1)));
        assert!(!m.contains(Direction::new(0.5)));
    }

    #[test]
    fn complement_partitions_the_line() {
        let m = Multicone::new(vec![
            ProjInterval::new(0.2, 0.5).unwrap(),
            ProjInterval::new(2.0, 0.4).unwrap(),
        ])
        .unwrap();
        let c = m.complement();
        assert_eq!(c.component_count(), 2);
        assert!((m.total_length() + c.total_length() - PI).abs() < 1e-12);
        assert!(c.contains(Direction::new(1.0)));
        assert!(!c.contains_interior(Direction::new(0.4), 0.0));
    }

    #[test]
    fn contained_in_tolerates_shared_boundary() {
        let outer = Multicone::from_arc(0.0, 0.3).unwrap();
        let inner = Multicone::from_arc(0.0, 0.3).unwrap();
        assert!(inner.contained_in(&outer, 1e-12));
        let shifted = Multicone::from_arc(-1e-13, 0.3).unwrap();
        assert!(shifted.contained_in(&outer, 1e-12));
        let outside = Multicone::from_arc(0.25, 0.3).unwrap();
        assert!(!outside.contained_in(&outer, 1e-12));
    }

    #[test]
    fn serde_arcs() {
        let m = Multicone::from_arc(0.5, 0.25).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[0.5,0.25]]");
        assert_eq!(serde_json::from_str::<Multicone>(&s).unwrap(), m);
    }
}
