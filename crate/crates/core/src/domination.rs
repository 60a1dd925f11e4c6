//! Domination and invariant unstable multicones: direction clouds, the
//! fattened-and-saturated cone construction, strict-invariance certificates
//! and falsification witnesses.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Mat2, MatrixClass};
use crate::projective::{neighborhood, strictly_inside, Direction, Multicone, ProjectiveError, MERGE_EPS};
use crate::semigroup::{check_cap, DecompositionResult, MatrixTuple, SemigroupError, Word, DEFAULT_CAP};

/// Slack for the numeric open conditions of an unstable multicone.
pub const OPEN_EPS: f64 = 1e-6;
/// `m_n ≥ 1 − RATIO_SLACK` counts as a ratio of one.
pub const RATIO_SLACK: f64 = 1e-9;
/// Saturation aborts once the cone has more components than this.
pub const MAX_ARCS: usize = 64;
pub const N_FATTEN_SCHEDULE: [usize; 5] = [4, 8, 16, 32, 64];
pub const SATURATE_SCHEDULE: [usize; 5] = [4, 6, 8, 10, 12];
/// Widenings tried when a saturated cone is invariant but touches its own
/// boundary.
const WIDEN_SCHEDULE: [f64; 4] = [1e-3, 1e-4, 1e-5, 1e-2];
/// Product lengths whose generators the strongly invariant search is run
/// against, in order.
const BLOCK_LENGTHS: [usize; 3] = [1, 2, 3];
const INVARIANCE_TOL: f64 = 1e-9;
const DIRECTION_DEDUP: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error("direction cloud is empty")]
    EmptyCloud,
    #[error("the construction with fattening radius {radius} covers the projective line")]
    NotProper { radius: f64 },
    #[error("no fixed point after {rounds} rounds ({arcs} arcs)")]
    NotStabilized { rounds: usize, arcs: usize },
}

/// Unstable and stable directions of the proximal products up to `depth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionCloud {
    pub u_dirs: Vec<Direction>,
    pub s_dirs: Vec<Direction>,
    pub depth: usize,
    /// Products that were not proximal.
    pub skipped: usize,
}

/// Search limits shared by the decision procedures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominationBudget {
    pub depth: usize,
    pub cap: usize,
    pub eps_open: f64,
}

impl Default for DominationBudget {
    fn default() -> Self {
        DominationBudget {
            depth: 12,
            cap: DEFAULT_CAP,
            eps_open: OPEN_EPS,
        }
    }
}

fn units_of(t: &MatrixTuple) -> Vec<Mat2> {
    t.matrices().iter().map(Mat2::normalize_det).collect()
}

/// Largest `d ≤ depth` with `n^d ≤ cap`, at least 1.
pub(crate) fn feasible_depth(n: usize, depth: usize, cap: usize) -> usize {
    match check_cap(n, depth, cap) {
        Err(SemigroupError::CapExceeded { max_depth, .. }) => max_depth.max(1),
        _ => depth.max(1),
    }
}

/// Det-normalized products by length, indexed like `Word::index`.
fn unit_levels(units: &[Mat2], depth: usize) -> Vec<Vec<Mat2>> {
    let mut out: Vec<Vec<Mat2>> = vec![units.to_vec()];
    for _ in 1..depth {
        let prev = out.last().unwrap();
        let next = prev
            .par_iter()
            .flat_map_iter(|p| units.iter().map(move |g| (*p * *g).normalize_det()))
            .collect();
        out.push(next);
    }
    out
}

fn dedup_directions(mut v: Vec<Direction>) -> Vec<Direction> {
    v.sort_by(|a, b| a.theta().total_cmp(&b.theta()));
    v.dedup_by(|a, b| (a.theta() - b.theta()).abs() < DIRECTION_DEDUP);
    v
}

fn cloud_from_levels(levels: &[Vec<Mat2>]) -> DirectionCloud {
    let data: Vec<_> = levels
        .par_iter()
        .flat_map_iter(|lv| lv.iter())
        .map(|m| {
            if m.classify().class == MatrixClass::Proximal {
                let e = m.eigen_data();
                e.u_dir.zip(e.s_dir)
            } else {
                None
            }
        })
        .collect();
    let skipped = data.iter().filter(|x| x.is_none()).count();
    let (u, s): (Vec<_>, Vec<_>) = data.into_iter().flatten().unzip();
    DirectionCloud {
        u_dirs: dedup_directions(u),
        s_dirs: dedup_directions(s),
        depth: levels.len(),
        skipped,
    }
}

pub fn direction_clouds(t: &MatrixTuple, depth: usize, cap: usize) -> Result<DirectionCloud, SemigroupError> {
    check_cap(t.len(), depth, cap)?;
    Ok(cloud_from_levels(&unit_levels(&units_of(t), depth)))
}

/// `m_n = max_{|w| = n} sv2(A_w)/sv1(A_w)` with maximizers and the rates
/// `(1/n) log m_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSequence {
    pub ratios: Vec<f64>,
    pub log_rates: Vec<f64>,
    pub argmax: Vec<Word>,
}

fn ratio_from_levels(levels: &[Vec<Mat2>], n: usize) -> (RatioSequence, Vec<usize>) {
    let mut ratios = Vec::new();
    let mut idx = Vec::new();
    for lv in levels {
        let (i, r) = lv
            .iter()
            .map(Mat2::sv_ratio)
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, r)| if r > best.1 { (i, r) } else { best });
        ratios.push(r);
        idx.push(i);
    }
    let log_rates = ratios.iter().enumerate().map(|(k, r)| r.ln() / (k + 1) as f64).collect();
    let argmax = if n <= crate::semigroup::MAX_SYMBOLS {
        idx.iter().enumerate().map(|(k, &i)| Word::from_index(i, k + 1, n)).collect()
    } else {
        Vec::new()
    };
    (
        RatioSequence {
            ratios,
            log_rates,
            argmax,
        },
        idx,
    )
}

pub fn ratio_sequence(t: &MatrixTuple, depth: usize, cap: usize) -> Result<RatioSequence, SemigroupError> {
    check_cap(t.len(), depth, cap)?;
    Ok(ratio_from_levels(&unit_levels(&units_of(t), depth), t.len()).0)
}

/// Saturates `v` under the generators until one more round changes nothing.
fn saturate(units: &[Mat2], v: Multicone, rounds: usize) -> Result<Multicone, BuildError> {
    let mut u = v;
    for _ in 0..rounds {
        let mut next = u.clone();
        for g in units {
            next = next
                .union(&u.act(g))
                .map_err(|_| BuildError::NotProper { radius: f64::NAN })?;
        }
        if next.component_count() > MAX_ARCS {
            return Err(BuildError::NotStabilized {
                rounds,
                arcs: next.component_count(),
            });
        }
        if next.approx_eq(&u, MERGE_EPS) {
            return Ok(u);
        }
        u = next;
    }
    Err(BuildError::NotStabilized {
        rounds,
        arcs: u.component_count(),
    })
}

fn build_from_units(
    units: &[Mat2],
    cloud: &DirectionCloud,
    n_fatten: usize,
    saturate_depth: usize,
) -> Result<Multicone, BuildError> {
    build_with_radius(units, cloud, 1.0 / n_fatten as f64, saturate_depth)
}

fn build_with_radius(
    units: &[Mat2],
    cloud: &DirectionCloud,
    radius: f64,
    saturate_depth: usize,
) -> Result<Multicone, BuildError> {
    if cloud.u_dirs.is_empty() {
        return Err(BuildError::EmptyCloud);
    }
    let v = neighborhood(&cloud.u_dirs, radius).map_err(|_| BuildError::NotProper { radius })?;
    saturate(units, v, saturate_depth).map_err(|e| match e {
        BuildError::NotProper { .. } => BuildError::NotProper { radius },
        other => other,
    })
}

/// Fattening radii tried after the fixed schedule, as fractions of the gap
/// between the unstable and stable clouds.
const GAP_FRACTIONS: [f64; 3] = [0.9, 0.75, 0.5];

fn cloud_gap(cloud: &DirectionCloud) -> Option<f64> {
    cloud
        .u_dirs
        .par_iter()
        .map(|u| cloud.s_dirs.iter().map(|s| u.distance(*s)).fold(f64::INFINITY, f64::min))
        .reduce_with(f64::min)
        .filter(|g| g.is_finite())
}

/// Fattening radii in search order: `1/n` over the fixed schedule, then
/// fractions of the cloud gap.
fn radius_schedule(cloud: &DirectionCloud) -> Vec<f64> {
    let mut r: Vec<f64> = N_FATTEN_SCHEDULE.iter().map(|&n| 1.0 / n as f64).collect();
    if let Some(g) = cloud_gap(cloud) {
        r.extend(GAP_FRACTIONS.iter().map(|f| f * g));
    }
    r
}

/// The closed `(1/n_fatten)`-neighbourhood of the unstable cloud, saturated
/// under the generators for at most `saturate_depth` rounds.
pub fn build_unstable_multicone(
    t: &MatrixTuple,
    cloud: &DirectionCloud,
    n_fatten: usize,
    saturate_depth: usize,
) -> Result<Multicone, BuildError> {
    build_from_units(&units_of(t), cloud, n_fatten, saturate_depth)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateMode {
    /// Every generator maps the cone into its interior.
    StronglyInvariant,
    /// Every generator maps the cone into itself and the cone satisfies the
    /// unstable multicone conditions.
    InvariantUnstable,
    /// Hyperbolic generators map the cone into its interior; conformal
    /// generators (listed in `fixed_generators`) permute it.
    HyperbolicPart,
}

/// A replayable multicone certificate. Margins are angular distances in
/// radians; fixed generators carry margin 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulticoneCertificate {
    pub mode: CertificateMode,
    pub cone: Multicone,
    pub margin: f64,
    pub per_generator_margins: Vec<f64>,
    pub fixed_generators: Vec<usize>,
    pub fatten_radius: f64,
    pub saturate_depth: usize,
    pub widen: Option<f64>,
    /// The cone is checked against all products of this length, in word
    /// order; margins are indexed the same way.
    #[serde(default = "one")]
    pub block_length: usize,
}

fn one() -> usize {
    1
}

impl MulticoneCertificate {
    /// Re-checks every claim against `t`.
    pub fn verify(&self, t: &MatrixTuple) -> bool {
        if self.block_length > 1 {
            return self.mode == CertificateMode::StronglyInvariant && self.verify_blocks(t);
        }
        if self.per_generator_margins.len() != t.len() {
            return false;
        }
        t.matrices().iter().enumerate().all(|(i, a)| {
            let image = self.cone.act(a);
            let fixed = self.fixed_generators.contains(&i);
            match (self.mode, fixed) {
                (CertificateMode::InvariantUnstable, _) => image.contained_in(&self.cone, INVARIANCE_TOL),
                (CertificateMode::HyperbolicPart, true) => image.approx_eq(&self.cone, INVARIANCE_TOL),
                _ => strictly_inside(&image, &self.cone)
                    .margin()
                    .is_some_and(|m| m >= self.per_generator_margins[i] - 1e-12),
            }
        })
    }
}

impl MulticoneCertificate {
    fn verify_blocks(&self, t: &MatrixTuple) -> bool {
        let m = self.block_length;
        if check_cap(t.len(), m, DEFAULT_CAP).is_err() {
            return false;
        }
        let Some(blocks) = unit_levels(&units_of(t), m).pop() else {
            return false;
        };
        blocks.len() == self.per_generator_margins.len()
            && blocks.iter().zip(&self.per_generator_margins).all(|(a, &want)| {
                strictly_inside(&self.cone.act(a), &self.cone)
                    .margin()
                    .is_some_and(|got| got >= want - 1e-12)
            })
    }
}

fn strict_margins(units: &[Mat2], cone: &Multicone) -> Option<Vec<f64>> {
    units
        .iter()
        .map(|a| strictly_inside(&cone.act(a), cone).margin())
        .collect()
}

/// The cone itself or a slight widening of it, with per-generator margins.
fn certify_strict(units: &[Mat2], cone: &Multicone) -> Option<(Multicone, Vec<f64>, Option<f64>)> {
    if let Some(m) = strict_margins(units, cone) {
        return Some((cone.clone(), m, None));
    }
    WIDEN_SCHEDULE.iter().find_map(|&d| {
        let c = cone.fatten(d).ok()?;
        strict_margins(units, &c).map(|m| (c, m, Some(d)))
    })
}

fn strongly_invariant_search(units: &[Mat2], cloud: &DirectionCloud) -> Option<MulticoneCertificate> {
    for r in radius_schedule(cloud) {
        for &sat in &SATURATE_SCHEDULE {
            match build_with_radius(units, cloud, r, sat) {
                Ok(cone) => {
                    if let Some((cone, margins, widen)) = certify_strict(units, &cone) {
                        return Some(MulticoneCertificate {
                            mode: CertificateMode::StronglyInvariant,
                            cone,
                            margin: margins.iter().cloned().fold(f64::INFINITY, f64::min),
                            per_generator_margins: margins,
                            fixed_generators: Vec::new(),
                            fatten_radius: r,
                            saturate_depth: sat,
                            widen,
                            block_length: 1,
                        });
                    }
                    break;
                }
                Err(BuildError::NotStabilized { .. }) => continue,
                Err(_) => break,
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NotDominatedWitness {
    ConformalProduct(Word),
    ParabolicProduct(Word),
    RatioGeOne(Word),
}

impl NotDominatedWitness {
    pub fn word(&self) -> &Word {
        match self {
            NotDominatedWitness::ConformalProduct(w)
            | NotDominatedWitness::ParabolicProduct(w)
            | NotDominatedWitness::RatioGeOne(w) => w,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DominationVerdict {
    Dominated(MulticoneCertificate),
    NotDominated(NotDominatedWitness),
    Inconclusive { log_rates: Vec<f64>, max_depth: usize },
}

impl DominationVerdict {
    pub fn tag(&self) -> &'static str {
        match self {
            DominationVerdict::Dominated(_) => "Dominated",
            DominationVerdict::NotDominated(_) => "NotDominated",
            DominationVerdict::Inconclusive { .. } => "Inconclusive",
        }
    }

    pub fn certificate(&self) -> Option<&MulticoneCertificate> {
        match self {
            DominationVerdict::Dominated(c) => Some(c),
            _ => None,
        }
    }
}

/// Word-free outcome on an arbitrary generator list: `(length, index)`
/// locates a product among `unit_levels`.
enum RawVerdict {
    Conformal(usize, usize),
    Parabolic(usize, usize),
    RatioGeOne(usize, usize),
    Dominated(MulticoneCertificate),
    Inconclusive(Vec<f64>, usize),
}

fn decide_units(units: &[Mat2], budget: &DominationBudget) -> RawVerdict {
    let depth = feasible_depth(units.len(), budget.depth, budget.cap);
    let levels = unit_levels(units, depth);
    for (l, lv) in levels.iter().enumerate() {
        let hit = lv.iter().enumerate().find_map(|(i, m)| match m.classify().class {
            MatrixClass::Conformal => Some(RawVerdict::Conformal(l + 1, i)),
            MatrixClass::Parabolic => Some(RawVerdict::Parabolic(l + 1, i)),
            MatrixClass::Proximal => None,
        });
        if let Some(h) = hit {
            return h;
        }
    }
    let (seq, idx) = ratio_from_levels(&levels, units.len());
    if let Some(k) = seq.ratios.iter().position(|&r| r >= 1.0 - RATIO_SLACK) {
        return RawVerdict::RatioGeOne(k + 1, idx[k]);
    }
    let cloud = cloud_from_levels(&levels);
    let found = BLOCK_LENGTHS
        .iter()
        .filter(|&&m| m <= depth)
        .find_map(|&m| {
            strongly_invariant_search(&levels[m - 1], &cloud).map(|c| MulticoneCertificate { block_length: m, ..c })
        });
    match found {
        Some(c) => RawVerdict::Dominated(c),
        None => RawVerdict::Inconclusive(seq.log_rates, depth),
    }
}

/// Decides domination by witness search, the ratio test and, failing both, a
/// strongly invariant multicone construction.
pub fn domination_decide(t: &MatrixTuple, budget: &DominationBudget) -> DominationVerdict {
    let n = t.len();
    let w = |l: usize, i: usize| Word::from_index(i, l, n);
    match decide_units(&units_of(t), budget) {
        RawVerdict::Conformal(l, i) => DominationVerdict::NotDominated(NotDominatedWitness::ConformalProduct(w(l, i))),
        RawVerdict::Parabolic(l, i) => DominationVerdict::NotDominated(NotDominatedWitness::ParabolicProduct(w(l, i))),
        RawVerdict::RatioGeOne(l, i) => DominationVerdict::NotDominated(NotDominatedWitness::RatioGeOne(w(l, i))),
        RawVerdict::Dominated(c) => DominationVerdict::Dominated(c),
        RawVerdict::Inconclusive(log_rates, max_depth) => DominationVerdict::Inconclusive { log_rates, max_depth },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum UnstableFailure {
    NotInvariant { generator: usize },
    MeetsStable { direction: Direction },
    BoundaryNearUnstable { direction: Direction },
    ComponentWithoutUnstable { component: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum UnstableCheck {
    Yes,
    No(UnstableFailure),
}

impl UnstableCheck {
    pub fn is_yes(&self) -> bool {
        matches!(self, UnstableCheck::Yes)
    }
}

/// Checks the unstable multicone conditions for `cone`: invariance under
/// every generator, no stable direction within `eps`, no unstable direction
/// within `eps` of the boundary, and an unstable direction in every
/// component.
pub fn invariant_unstable_multicone_check(
    t: &MatrixTuple,
    cone: &Multicone,
    cloud: &DirectionCloud,
    eps: f64,
) -> UnstableCheck {
    for (i, a) in t.matrices().iter().enumerate() {
        if !cone.act(a).contained_in(cone, INVARIANCE_TOL) {
            return UnstableCheck::No(UnstableFailure::NotInvariant { generator: i });
        }
    }
    if let Some(&d) = cloud.s_dirs.iter().find(|&&s| cone.distance_to(s) <= eps) {
        return UnstableCheck::No(UnstableFailure::MeetsStable { direction: d });
    }
    for b in cone.boundary() {
        if let Some(&d) = cloud.u_dirs.iter().find(|u| u.distance(b) <= eps) {
            return UnstableCheck::No(UnstableFailure::BoundaryNearUnstable { direction: d });
        }
    }
    for (k, arc) in cone.arcs().iter().enumerate() {
        if !cloud.u_dirs.iter().any(|&u| arc.contains(u)) {
            return UnstableCheck::No(UnstableFailure::ComponentWithoutUnstable { component: k });
        }
    }
    UnstableCheck::Yes
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum UnstableSearch {
    Found(MulticoneCertificate),
    /// The last failure observed, or `None` when the cloud was empty or no
    /// candidate cone could be built.
    NotFound(Option<UnstableFailure>),
}

/// Builds candidate cones on the escalation schedule and returns the first
/// that passes `invariant_unstable_multicone_check`.
pub fn find_invariant_unstable_multicone(t: &MatrixTuple, budget: &DominationBudget) -> UnstableSearch {
    let depth = feasible_depth(t.len(), budget.depth, budget.cap);
    let units = units_of(t);
    let cloud = cloud_from_levels(&unit_levels(&units, depth));
    let mut last = None;
    for &n in &N_FATTEN_SCHEDULE {
        for &sat in &SATURATE_SCHEDULE {
            match build_from_units(&units, &cloud, n, sat) {
                Ok(cone) => {
                    match invariant_unstable_multicone_check(t, &cone, &cloud, budget.eps_open) {
                        UnstableCheck::Yes => {
                            return UnstableSearch::Found(MulticoneCertificate {
                                mode: CertificateMode::InvariantUnstable,
                                cone,
                                margin: 0.0,
                                per_generator_margins: vec![0.0; t.len()],
                                fixed_generators: Vec::new(),
                                fatten_radius: 1.0 / n as f64,
                                saturate_depth: sat,
                                widen: None,
                                block_length: 1,
                            })
                        }
                        UnstableCheck::No(f) => last = Some(f),
                    }
                    break;
                }
                Err(BuildError::NotStabilized { .. }) => continue,
                Err(_) => break,
            }
        }
    }
    UnstableSearch::NotFound(last)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HyperbolicStage {
    NoHyperbolicGenerators,
    FGroupUnavailable,
    ProductsNotDominated,
    ProductsInconclusive,
    OrbitNotProper,
    ConformalNotFixed,
    HyperbolicNotStrict,
}

#[derive(Debug, Error, Clone, PartialEq, Serialize, Deserialize)]
#[error("hyperbolic part certificate failed at {stage:?}: {detail}")]
pub struct HyperbolicFailure {
    pub stage: HyperbolicStage,
    pub detail: String,
}

impl HyperbolicFailure {
    /// Whether the failure rules the certificate out rather than reflecting
    /// a search limit.
    pub fn is_conclusive(&self) -> bool {
        matches!(
            self.stage,
            HyperbolicStage::NoHyperbolicGenerators | HyperbolicStage::ProductsNotDominated
        )
    }
}

fn fail(stage: HyperbolicStage, detail: impl Into<String>) -> HyperbolicFailure {
    HyperbolicFailure {
        stage,
        detail: detail.into(),
    }
}

/// Certifies a multicone that the hyperbolic generators map strictly inside
/// and the conformal generators permute. A strongly invariant cone `C₀` is
/// built for the products `A_h·F` (`F ∈ ℱ`) and symmetrized to `⋃_F F·C₀`.
pub fn hyperbolic_part_certificate(
    t: &MatrixTuple,
    split: &DecompositionResult,
    budget: &DominationBudget,
) -> Result<MulticoneCertificate, HyperbolicFailure> {
    if split.hyperbolic_indices.is_empty() {
        return Err(fail(HyperbolicStage::NoHyperbolicGenerators, "every generator is conformal"));
    }
    let fs = split
        .f_group
        .elements()
        .ok_or_else(|| fail(HyperbolicStage::FGroupUnavailable, "closure exceeded its cap"))?;
    let mut b: Vec<Mat2> = Vec::new();
    for &h in &split.hyperbolic_indices {
        for f in fs {
            let m = (*t.get(h) * *f).normalize_det();
            let dup = b
                .iter()
                .any(|x| x.max_abs_diff(&m) < 1e-12 || x.max_abs_diff(&m.scale(-1.0)) < 1e-12);
            if !dup {
                b.push(m);
            }
        }
    }
    let base = match decide_units(&b, budget) {
        RawVerdict::Dominated(c) => c,
        RawVerdict::Conformal(..) => {
            return Err(fail(HyperbolicStage::ProductsNotDominated, "a product of A_h·ℱ is conformal"))
        }
        RawVerdict::Parabolic(..) => {
            return Err(fail(HyperbolicStage::ProductsNotDominated, "a product of A_h·ℱ is parabolic"))
        }
        RawVerdict::RatioGeOne(..) => {
            return Err(fail(HyperbolicStage::ProductsNotDominated, "singular value ratio reaches one"))
        }
        RawVerdict::Inconclusive(..) => {
            return Err(fail(HyperbolicStage::ProductsInconclusive, "no strongly invariant cone found"))
        }
    };

    let mut last = fail(HyperbolicStage::HyperbolicNotStrict, "no candidate tried");
    for widen in std::iter::once(None).chain(WIDEN_SCHEDULE.iter().map(|&d| Some(d))) {
        let c0 = match widen {
            None => base.cone.clone(),
            Some(d) => match base.cone.fatten(d) {
                Ok(c) => c,
                Err(_) => continue,
            },
        };
        let orbit = fs.iter().try_fold(c0.clone(), |acc, f| acc.union(&c0.act(f)));
        let cone = match orbit {
            Ok(c) => c,
            Err(ProjectiveError::NotProper) | Err(_) => {
                last = fail(HyperbolicStage::OrbitNotProper, "ℱ-orbit of the cone covers ℝP¹");
                continue;
            }
        };
        if let Some(&e) = split
            .conformal_indices
            .iter()
            .find(|&&e| !cone.act(t.get(e)).approx_eq(&cone, INVARIANCE_TOL))
        {
            last = fail(HyperbolicStage::ConformalNotFixed, format!("generator {} moves the cone", e + 1));
            continue;
        }
        let mut margins = vec![0.0; t.len()];
        let mut strict = true;
        for &h in &split.hyperbolic_indices {
            match strictly_inside(&cone.act(t.get(h)), &cone).margin() {
                Some(m) => margins[h] = m,
                None => {
                    last = fail(HyperbolicStage::HyperbolicNotStrict, format!("generator {} touches the boundary", h + 1));
                    strict = false;
                    break;
                }
            }
        }
        if !strict {
            continue;
        }
        let margin = split
            .hyperbolic_indices
            .iter()
            .map(|&h| margins[h])
            .fold(f64::INFINITY, f64::min);
        return Ok(MulticoneCertificate {
            mode: CertificateMode::HyperbolicPart,
            cone,
            margin,
            per_generator_margins: margins,
            fixed_generators: split.conformal_indices.clone(),
            fatten_radius: base.fatten_radius,
            saturate_depth: base.saturate_depth,
            widen: match (base.widen, widen) {
                (a, None) => a,
                (a, Some(d)) => Some(a.unwrap_or(0.0) + d),
            },
            block_length: 1,
        });
    }
    Err(last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::conformal_split;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn tuple(entries: &[[f64; 4]]) -> MatrixTuple {
        MatrixTuple::from_entries(entries).unwrap()
    }

    fn a1a2() -> MatrixTuple {
        tuple(&[[2.0, 1.0, 1.0, 1.0], [2.0, 1.0, 1.0, 2.0]])
    }

    fn a1a2i() -> MatrixTuple {
        tuple(&[[2.0, 1.0, 1.0, 1.0], [2.0, 1.0, 1.0, 2.0], [1.0, 0.0, 0.0, 1.0]])
    }

    fn a3a4() -> MatrixTuple {
        tuple(&[[1.0, 0.0, 0.0, 2.0], [0.0, 1.0, 1.0, 0.0]])
    }

    #[test]
    fn clouds() {
        let c = direction_clouds(&tuple(&[[1.0, 0.0, 0.0, 2.0]]), 3, DEFAULT_CAP).unwrap();
        assert_eq!(c.u_dirs.len(), 1);
        assert!(c.u_dirs[0].distance(Direction::new(FRAC_PI_2)) < 1e-12);
        assert!(c.s_dirs[0].distance(Direction::new(0.0)) < 1e-12);

        let c = direction_clouds(&a1a2(), 1, DEFAULT_CAP).unwrap();
        let golden = ((5f64.sqrt() - 1.0) / 2.0).atan();
        assert_eq!(c.u_dirs.len(), 2);
        assert!(c.u_dirs[0].distance(Direction::new(golden)) < 1e-12);
        assert!(c.u_dirs[1].distance(Direction::new(FRAC_PI_4)) < 1e-12);
        assert!(c.s_dirs.iter().all(|s| s.theta() > FRAC_PI_2));

        let c = direction_clouds(&MatrixTuple::new(vec![Mat2::rotation(0.3), Mat2::rotation(1.0)]).unwrap(), 3, DEFAULT_CAP)
            .unwrap();
        assert!(c.u_dirs.is_empty() && c.s_dirs.is_empty());
        assert_eq!(c.skipped, 14);
    }

    #[test]
    fn ratios() {
        let r = ratio_sequence(&tuple(&[[1.0, 0.0, 0.0, 2.0]]), 5, DEFAULT_CAP).unwrap();
        for (k, m) in r.ratios.iter().enumerate() {
            assert!((m - 0.5f64.powi(k as i32 + 1)).abs() < 1e-14);
        }
        let r = ratio_sequence(&a3a4(), 6, DEFAULT_CAP).unwrap();
        assert!(r.ratios.iter().all(|&m| (m - 1.0).abs() < 1e-14));
        assert_eq!(r.argmax[0].to_string(), "2");
        let r = ratio_sequence(&a1a2(), 6, DEFAULT_CAP).unwrap();
        assert!(r.ratios.windows(2).all(|w| w[1] < w[0]) && r.ratios[0] < 1.0);
    }

    #[test]
    fn builder_examples() {
        let t = tuple(&[[2.0, 0.0, 0.0, 1.0]]);
        let cloud = direction_clouds(&t, 2, DEFAULT_CAP).unwrap();
        let c = build_unstable_multicone(&t, &cloud, 8, 4).unwrap();
        assert_eq!(c.component_count(), 1);
        assert!(c.contains(Direction::new(0.0)));

        let t = a1a2();
        let cloud = direction_clouds(&t, 8, DEFAULT_CAP).unwrap();
        let c = build_unstable_multicone(&t, &cloud, 8, 4).unwrap();
        assert_eq!(c.component_count(), 1);
        let arc = c.arcs()[0];
        assert!(arc.start().theta() > 0.0 && arc.start().theta() + arc.length() < FRAC_PI_2);

        let t = a3a4();
        let cloud = direction_clouds(&t, 6, DEFAULT_CAP).unwrap();
        for n in N_FATTEN_SCHEDULE {
            if let Ok(c) = build_unstable_multicone(&t, &cloud, n, 12) {
                assert!(certify_strict(&units_of(&t), &c).is_none());
            }
        }
    }

    #[test]
    fn decide_examples() {
        let budget = DominationBudget::default();
        match domination_decide(&a1a2(), &budget) {
            DominationVerdict::Dominated(c) => {
                assert!(c.verify(&a1a2()));
                for arc in c.cone.arcs() {
                    assert!(arc.start().theta() >= 0.0 && arc.start().theta() + arc.length() <= FRAC_PI_2);
                }
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            domination_decide(&a3a4(), &budget),
            DominationVerdict::NotDominated(NotDominatedWitness::ConformalProduct(Word::parse("2").unwrap()))
        );
        assert_eq!(
            domination_decide(&a1a2i(), &budget),
            DominationVerdict::NotDominated(NotDominatedWitness::ConformalProduct(Word::parse("3").unwrap()))
        );
        let t = tuple(&[[1.0, 1.0, 0.0, 1.0]]);
        assert_eq!(
            domination_decide(&t, &budget),
            DominationVerdict::NotDominated(NotDominatedWitness::ParabolicProduct(Word::parse("1").unwrap()))
        );
    }

    #[test]
    fn unstable_check_examples() {
        let budget = DominationBudget::default();
        match find_invariant_unstable_multicone(&a1a2i(), &budget) {
            UnstableSearch::Found(c) => assert!(c.verify(&a1a2i())),
            other => panic!("unexpected {other:?}"),
        }
        let t = a1a2();
        let cloud = direction_clouds(&t, 4, DEFAULT_CAP).unwrap();
        let second = Multicone::from_arc(FRAC_PI_2 + 0.1, FRAC_PI_2 - 0.2).unwrap();
        assert!(matches!(
            invariant_unstable_multicone_check(&t, &second, &cloud, OPEN_EPS),
            UnstableCheck::No(UnstableFailure::NotInvariant { .. })
        ));
        assert!(matches!(
            find_invariant_unstable_multicone(&a3a4(), &budget),
            UnstableSearch::NotFound(_)
        ));
    }

    #[test]
    fn hyperbolic_part_examples() {
        let budget = DominationBudget::default();
        let t = a1a2i();
        let c = hyperbolic_part_certificate(&t, &conformal_split(&t), &budget).unwrap();
        assert!(c.verify(&t));
        assert_eq!(c.fixed_generators, vec![2]);

        let t = tuple(&[[2.0, 1.0, 1.0, 1.0], [-1.0, 0.0, 0.0, -1.0]]);
        let c = hyperbolic_part_certificate(&t, &conformal_split(&t), &budget).unwrap();
        assert!(c.verify(&t));

        let t = a3a4();
        let err = hyperbolic_part_certificate(&t, &conformal_split(&t), &budget).unwrap_err();
        assert_eq!(err.stage, HyperbolicStage::ProductsNotDominated);
    }

    #[test]
    fn certificate_round_trips_through_json() {
        let c = domination_decide(&a1a2(), &DominationBudget::default())
            .certificate()
            .cloned()
            .unwrap();
        let s = serde_json::to_string(&c).unwrap();
        let back: MulticoneCertificate = serde_json::from_str(&s).unwrap();
        assert!(back.verify(&a1a2()));
    }

    #[test]
    fn thin_tuple_needs_length_two_blocks() {
        let t = tuple(&[
            [-0.13160995958531277, 2.6932669011795283, 2.44871875000722, 2.0612175979144842],
            [0.0, -0.614627648466794, 1.548660052008252, 2.293760974019014],
        ]);
        let g = Mat2::new(-0.9262138100072773, 0.6258706983194232, 0.6403053534238351, 0.2430921873085562).unwrap();
        let c = t.conjugate(&g);
        let budget = DominationBudget { depth: 8, ..DominationBudget::default() };
        let cert = domination_decide(&c, &budget).certificate().cloned().unwrap();
        assert_eq!(cert.block_length, 2);
        assert_eq!(cert.per_generator_margins.len(), 4);
        assert!(cert.verify(&c));
        assert!(!MulticoneCertificate { block_length: 1, ..cert.clone() }.verify(&c));
        let back: MulticoneCertificate = serde_json::from_str(&serde_json::to_string(&cert).unwrap()).unwrap();
        assert!(back.verify(&c));
    }
}
