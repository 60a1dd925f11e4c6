use std::time::{Duration, Instant};

use planar_cocycles::domination::{
    domination_decide, find_invariant_unstable_multicone, hyperbolic_part_certificate, DominationBudget,
    DominationVerdict, HyperbolicFailure, MulticoneCertificate, UnstableSearch,
};
use planar_cocycles::semigroup::{conformal_split, kappa_profile, KappaEstimate, MatrixTuple};
use planar_cocycles::thermo::{
    bernoulli_equilibrium_triangular, entropy_and_lambda, equilibrium_classify, gibbs_type_ratio_test, pressure_bounds,
    quasi_bernoulli_ratio_test, shadowing_deficit, transfer_equilibrium, Classification, CylinderMeasure, DiagonalSide,
    EntropyLambda, EquilibriumClass, PressureBounds, RatioBands, ShadowingConfig, ShadowingReport, TransferSolution,
};
use serde::Serialize;

use crate::config::{Budgets, Depths, JobConfig};
use crate::{Stage, WorkbenchError};

/// κ is estimated from words of length at most `d`, the largest depth with
/// `N^d` below this bound; the pair loop is quadratic in the word count.
pub const KAPPA_WORDS: usize = 4096;

fn budget(cfg: &JobConfig) -> DominationBudget {
    DominationBudget {
        depth: cfg.depths.enum_depth,
        cap: cfg.budgets.cap,
        eps_open: cfg.budgets.eps_open,
    }
}

pub fn kappa_depth(cfg: &JobConfig) -> usize {
    let n = cfg.n();
    (1..=cfg.depths.enum_depth)
        .take_while(|&d| n.checked_pow(d as u32).is_some_and(|c| c <= KAPPA_WORDS))
        .last()
        .unwrap_or(1)
}

/// Wall-clock time per stage. Shown in text reports only, so that JSON
/// output stays reproducible.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Timings(pub Vec<(&'static str, Duration)>);

impl Timings {
    fn time<T>(&mut self, stage: &'static str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.0.push((stage, start.elapsed()));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureReport {
    pub config: JobConfig,
    pub kappa: Vec<KappaEstimate>,
    pub bounds: PressureBounds,
    #[serde(skip)]
    pub timings: Timings,
}

fn kappa_and_pressure(cfg: &JobConfig, timings: &mut Timings) -> Result<(Vec<KappaEstimate>, PressureBounds), WorkbenchError> {
    let kappa = timings
        .time("kappa", || kappa_profile(&cfg.tuple, kappa_depth(cfg), cfg.budgets.cap))
        .map_err(|e| WorkbenchError::semigroup(Stage::Kappa, e))?;
    let bounds = timings
        .time("pressure", || {
            pressure_bounds(&cfg.tuple, cfg.s, cfg.depths.enum_depth, kappa.last(), cfg.budgets.cap)
        })
        .map_err(|e| WorkbenchError::semigroup(Stage::Pressure, e))?;
    Ok((kappa, bounds))
}

pub fn run_pressure(cfg: &JobConfig) -> Result<PressureReport, WorkbenchError> {
    let mut timings = Timings::default();
    let (kappa, bounds) = kappa_and_pressure(cfg, &mut timings)?;
    Ok(PressureReport {
        config: cfg.clone(),
        kappa,
        bounds,
        timings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StateKind {
    /// Leading eigenvector of the transfer operator anchored at a
    /// certified cone.
    Transfer,
    /// Bernoulli state read off one diagonal of a triangularized tuple.
    Triangular(DiagonalSide),
    /// Bernoulli state `p_i ∝ |det A_i|^{s/2}` of a strongly conformal tuple.
    Conformal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumState {
    pub kind: StateKind,
    pub pressure: f64,
    /// Symbol probabilities of Bernoulli states.
    pub probabilities: Option<Vec<f64>>,
    pub measure: CylinderMeasure,
    pub entropy_lambda: EntropyLambda,
    /// `μ[w] / (‖A_w‖ˢ e^{−|w|P})` by depth.
    pub gibbs_type_band: RatioBands,
    /// `μ[uv] / (μ[u] μ[v])` by total length.
    pub quasi_bernoulli_band: RatioBands,
    pub transfer: Option<TransferSolution>,
    /// Birkhoff sums of the transfer potential against `log ‖A_w‖`.
    pub shadowing: Option<ShadowingReport>,
}

fn bernoulli_state(
    cfg: &JobConfig,
    kind: StateKind,
    probabilities: Vec<f64>,
    pressure: f64,
) -> Result<EquilibriumState, WorkbenchError> {
    let measure = CylinderMeasure::bernoulli(&probabilities, cfg.depths.cylinder_depth)
        .map_err(|e| WorkbenchError::thermo(Stage::Equilibrium, e))?;
    finish_state(cfg, kind, Some(probabilities), pressure, measure, None, None)
}

fn finish_state(
    cfg: &JobConfig,
    kind: StateKind,
    probabilities: Option<Vec<f64>>,
    pressure: f64,
    measure: CylinderMeasure,
    transfer: Option<TransferSolution>,
    shadowing: Option<ShadowingReport>,
) -> Result<EquilibriumState, WorkbenchError> {
    let err = |e| WorkbenchError::semigroup(Stage::Equilibrium, e);
    Ok(EquilibriumState {
        kind,
        pressure,
        probabilities,
        entropy_lambda: entropy_and_lambda(&measure, &cfg.tuple, cfg.s).map_err(err)?,
        gibbs_type_band: gibbs_type_ratio_test(&measure, &cfg.tuple, cfg.s, pressure).map_err(err)?,
        quasi_bernoulli_band: quasi_bernoulli_ratio_test(&measure),
        measure,
        transfer,
        shadowing,
    })
}

fn transfer_state(cfg: &JobConfig, cert: &MulticoneCertificate) -> Result<EquilibriumState, WorkbenchError> {
    let sol = transfer_equilibrium(&cfg.tuple, cfg.s, cert, cfg.depths.transfer_depth)
        .map_err(|e| WorkbenchError::thermo(Stage::Equilibrium, e))?;
    let measure = sol
        .measure(cfg.depths.cylinder_depth)
        .map_err(|e| WorkbenchError::thermo(Stage::Equilibrium, e))?;
    let shadow_cfg = ShadowingConfig {
        seed: cfg.seed,
        ..ShadowingConfig::default()
    };
    let shadowing = shadowing_deficit(&cfg.tuple, &sol.potential_model(), cfg.depths.horizon, &shadow_cfg)
        .map_err(|e| WorkbenchError::thermo(Stage::Shadowing, e))?;
    finish_state(cfg, StateKind::Transfer, None, sol.pressure(), measure, Some(sol.clone()), Some(shadowing))
}

fn conformal_probabilities(t: &MatrixTuple, s: f64) -> (Vec<f64>, f64) {
    let w: Vec<f64> = t.matrices().iter().map(|m| m.det().abs().powf(s / 2.0)).collect();
    let total: f64 = w.iter().sum();
    (w.iter().map(|x| x / total).collect(), total.ln())
}

/// The equilibrium states that can be constructed for the class, with a
/// note when none can.
fn equilibrium_states(
    cfg: &JobConfig,
    class: &Classification,
) -> Result<(Vec<EquilibriumState>, Option<String>), WorkbenchError> {
    if class.strongly_conformal.is_yes() {
        let (p, pressure) = conformal_probabilities(&cfg.tuple, cfg.s);
        return Ok((vec![bernoulli_state(cfg, StateKind::Conformal, p, pressure)?], None));
    }
    if class.reducible_cone.is_some() {
        let states = bernoulli_equilibrium_triangular(&cfg.tuple, cfg.s)
            .map_err(|e| WorkbenchError::thermo(Stage::Equilibrium, e))?
            .into_iter()
            .map(|b| bernoulli_state(cfg, StateKind::Triangular(b.side), b.probabilities, b.pressure))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok((states, None));
    }
    match class.certificate() {
        Some(cert) => Ok((vec![transfer_state(cfg, cert)?], None)),
        None => Ok((
            Vec::new(),
            Some("no certified cone, so no equilibrium state is constructed".to_string()),
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub config: JobConfig,
    pub class: EquilibriumClass,
    pub conclusive: bool,
    pub states: Vec<EquilibriumState>,
    pub note: Option<String>,
    #[serde(skip)]
    pub timings: Timings,
}

impl EquilibriumReport {
    pub fn inconclusive(&self) -> bool {
        !self.conclusive
    }
}

pub fn run_equilibrium(cfg: &JobConfig) -> Result<EquilibriumReport, WorkbenchError> {
    let mut timings = Timings::default();
    let class = timings.time("classification", || equilibrium_classify(&cfg.tuple, cfg.s, &budget(cfg)));
    let (states, note) = timings.time("equilibrium", || equilibrium_states(cfg, &class))?;
    Ok(EquilibriumReport {
        config: cfg.clone(),
        class: class.class,
        conclusive: class.is_conclusive(),
        states,
        note,
        timings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Flags {
    pub irreducible: bool,
    pub strongly_conformal: bool,
    pub domination: Option<String>,
    pub invariant_unstable_multicone: bool,
    pub conformal_indices: Vec<usize>,
    pub hyperbolic_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub config: JobConfig,
    pub flags: Flags,
    pub kappa: Vec<KappaEstimate>,
    pub pressure: PressureBounds,
    pub classification: Classification,
    pub invariant_unstable: UnstableSearch,
    pub equilibrium: Vec<EquilibriumState>,
    pub note: Option<String>,
    #[serde(skip)]
    pub timings: Timings,
}

impl ClassificationReport {
    pub fn inconclusive(&self) -> bool {
        !self.classification.is_conclusive()
    }
}

pub fn run_classify(cfg: &JobConfig) -> Result<ClassificationReport, WorkbenchError> {
    let mut timings = Timings::default();
    let (kappa, pressure) = kappa_and_pressure(cfg, &mut timings)?;
    let classification = timings.time("classification", || equilibrium_classify(&cfg.tuple, cfg.s, &budget(cfg)));
    let invariant_unstable = timings.time("unstable multicone", || find_invariant_unstable_multicone(&cfg.tuple, &budget(cfg)));
    let (equilibrium, note) = timings.time("equilibrium", || equilibrium_states(cfg, &classification))?;
    let split = conformal_split(&cfg.tuple);
    let flags = Flags {
        irreducible: classification.irreducibility.is_irreducible(),
        strongly_conformal: classification.strongly_conformal.is_yes(),
        domination: classification.domination.as_ref().map(|v| v.tag().to_string()),
        invariant_unstable_multicone: matches!(invariant_unstable, UnstableSearch::Found(_)),
        conformal_indices: split.conformal_indices,
        hyperbolic_indices: split.hyperbolic_indices,
    };
    Ok(ClassificationReport {
        config: cfg.clone(),
        flags,
        kappa,
        pressure,
        classification,
        invariant_unstable,
        equilibrium,
        note,
        timings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MulticoneReport {
    pub config: JobConfig,
    pub domination: DominationVerdict,
    pub invariant_unstable: UnstableSearch,
    pub conformal_indices: Vec<usize>,
    /// Searched when the tuple has conformal generators and is not dominated.
    pub hyperbolic_part: Option<Result<MulticoneCertificate, HyperbolicFailure>>,
    #[serde(skip)]
    pub timings: Timings,
}

impl MulticoneReport {
    pub fn inconclusive(&self) -> bool {
        matches!(self.domination, DominationVerdict::Inconclusive { .. })
            || matches!(&self.hyperbolic_part, Some(Err(f)) if !f.is_conclusive())
    }

    /// Every certificate in the report, labelled.
    pub fn certificates(&self) -> Vec<(&'static str, &MulticoneCertificate)> {
        let mut out = Vec::new();
        if let Some(c) = self.domination.certificate() {
            out.push(("strongly invariant", c));
        }
        if let UnstableSearch::Found(c) = &self.invariant_unstable {
            out.push(("invariant unstable", c));
        }
        if let Some(Ok(c)) = &self.hyperbolic_part {
            out.push(("hyperbolic part", c));
        }
        out
    }
}

pub fn run_multicone(cfg: &JobConfig) -> Result<MulticoneReport, WorkbenchError> {
    let mut timings = Timings::default();
    let b = budget(cfg);
    let domination = timings.time("domination", || domination_decide(&cfg.tuple, &b));
    let invariant_unstable = timings.time("unstable multicone", || find_invariant_unstable_multicone(&cfg.tuple, &b));
    let split = conformal_split(&cfg.tuple);
    let hyperbolic_part = (!split.conformal_indices.is_empty() && domination.certificate().is_none())
        .then(|| timings.time("hyperbolic part", || hyperbolic_part_certificate(&cfg.tuple, &split, &b)));
    Ok(MulticoneReport {
        config: cfg.clone(),
        domination,
        invariant_unstable,
        conformal_indices: split.conformal_indices,
        hyperbolic_part,
        timings,
    })
}

/// The three tuples of the worked example with their expected classes.
pub fn example1_cases() -> [(&'static str, Vec<[f64; 4]>, EquilibriumClass); 3] {
    let a1 = [2.0, 1.0, 1.0, 1.0];
    let a2 = [2.0, 1.0, 1.0, 2.0];
    [
        ("(A1, A2)", vec![a1, a2], EquilibriumClass::HolderGibbs),
        ("(A1, A2, I)", vec![a1, a2, [1.0, 0.0, 0.0, 1.0]], EquilibriumClass::QuasiBernoulli),
        (
            "(diag(1,2), swap)",
            vec![[1.0, 0.0, 0.0, 2.0], [0.0, 1.0, 1.0, 0.0]],
            EquilibriumClass::GibbsTypeOnly,
        ),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example1Case {
    pub name: &'static str,
    pub expected: EquilibriumClass,
    pub matches: bool,
    pub report: ClassificationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example1Report {
    pub cases: Vec<Example1Case>,
}

impl Example1Report {
    pub fn all_match(&self) -> bool {
        self.cases.iter().all(|c| c.matches)
    }

    pub fn inconclusive(&self) -> bool {
        self.cases.iter().any(|c| c.report.inconclusive())
    }
}

/// Classifies the three example tuples with shared run parameters.
pub fn run_example1(s: f64, depths: Depths, budgets: Budgets, seed: u64) -> Result<Example1Report, WorkbenchError> {
    let mut cases = Vec::new();
    for (name, matrices, expected) in example1_cases() {
        let mut cfg = JobConfig::new(&matrices, s)?;
        cfg.depths = depths;
        cfg.budgets = budgets;
        cfg.seed = seed;
        cfg.validate()?;
        let report = run_classify(&cfg)?;
        cases.push(Example1Case {
            name,
            expected,
            matches: report.classification.class == expected,
            report,
        });
    }
    Ok(Example1Report { cases })
}
