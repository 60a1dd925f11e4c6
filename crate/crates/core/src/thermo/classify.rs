use serde::{Deserialize, Serialize};

use crate::domination::{
    direction_clouds, domination_decide, feasible_depth, hyperbolic_part_certificate, invariant_unstable_multicone_check,
    DominationBudget, DominationVerdict, HyperbolicFailure, MulticoneCertificate, UnstableCheck,
};
use crate::projective::{Direction, Multicone};
use crate::semigroup::{
    conformal_split, irreducibility_check, strong_conformality_check, DecompositionResult, Irreducibility, MatrixTuple,
    StrongConformality,
};

/// Neighbourhood radii tried around each common invariant line.
pub const REDUCIBLE_EPS_GRID: [f64; 8] = [0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.001];

/// Regularity class of the equilibrium states of `‖A_w‖ˢ`, from the
/// narrowest box that could be certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EquilibriumClass {
    /// Reducible with no invariant unstable cone around an invariant line:
    /// Bernoulli, not of Gibbs type.
    BernoulliReducibleNoCone,
    /// Bernoulli and of Gibbs type: strongly conformal, or reducible with a
    /// certified cone.
    BernoulliOther,
    HolderGibbs,
    QuasiBernoulli,
    GibbsTypeOnly,
}

impl EquilibriumClass {
    pub fn name(&self) -> &'static str {
        match self {
            EquilibriumClass::BernoulliReducibleNoCone => "BernoulliReducibleNoCone",
            EquilibriumClass::BernoulliOther => "BernoulliOther",
            EquilibriumClass::HolderGibbs => "HolderGibbs",
            EquilibriumClass::QuasiBernoulli => "QuasiBernoulli",
            EquilibriumClass::GibbsTypeOnly => "GibbsTypeOnly",
        }
    }

    pub fn is_bernoulli(&self) -> bool {
        matches!(self, EquilibriumClass::BernoulliReducibleNoCone | EquilibriumClass::BernoulliOther)
    }

    pub fn is_gibbs_type(&self) -> bool {
        !matches!(self, EquilibriumClass::BernoulliReducibleNoCone)
    }
}

/// Stages whose search ran out before reaching a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassStage {
    Domination,
    HyperbolicPart,
}

/// Which side of an invariant line carried the reducible-case cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConeSide {
    Neighbourhood,
    Complement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducibleCone {
    pub line: Direction,
    pub eps: f64,
    pub side: ConeSide,
    pub cone: Multicone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub class: EquilibriumClass,
    pub s: f64,
    pub strongly_conformal: StrongConformality,
    pub irreducibility: Irreducibility,
    pub domination: Option<DominationVerdict>,
    pub split: Option<DecompositionResult>,
    pub hyperbolic: Option<Result<MulticoneCertificate, HyperbolicFailure>>,
    /// Set on reducible tuples; `None` inside means the grid found no cone.
    pub reducible_cone: Option<Option<ReducibleCone>>,
    pub eps_grid: Vec<f64>,
    pub inconclusive: Vec<ClassStage>,
}

impl Classification {
    pub fn is_conclusive(&self) -> bool {
        self.inconclusive.is_empty()
    }

    /// The certificate backing the class, if it rests on one.
    pub fn certificate(&self) -> Option<&MulticoneCertificate> {
        match self.class {
            EquilibriumClass::HolderGibbs => self.domination.as_ref().and_then(DominationVerdict::certificate),
            EquilibriumClass::QuasiBernoulli => self.hyperbolic.as_ref().and_then(|h| h.as_ref().ok()),
            _ => None,
        }
    }
}

/// Searches the closed `ε`-neighbourhoods of each common invariant line, and
/// the closures of their complements, for an invariant unstable cone.
pub fn reducible_cone_search(t: &MatrixTuple, lines: &[Direction], budget: &DominationBudget) -> Option<ReducibleCone> {
    let depth = feasible_depth(t.len(), budget.depth, budget.cap);
    let cloud = direction_clouds(t, depth, budget.cap).ok()?;
    for &line in lines {
        for &eps in &REDUCIBLE_EPS_GRID {
            let Ok(near) = Multicone::from_arc(line.theta() - eps, 2.0 * eps) else {
                continue;
            };
            let far = near.complement();
            for (side, cone) in [(ConeSide::Neighbourhood, near), (ConeSide::Complement, far)] {
                if let UnstableCheck::Yes = invariant_unstable_multicone_check(t, &cone, &cloud, budget.eps_open) {
                    return Some(ReducibleCone { line, eps, side, cone });
                }
            }
        }
    }
    None
}

/// Runs the classification tree: strong conformality, then reducibility,
/// then domination and the conformal/hyperbolic split.
pub fn equilibrium_classify(t: &MatrixTuple, s: f64, budget: &DominationBudget) -> Classification {
    let strongly_conformal = strong_conformality_check(t);
    let irreducibility = irreducibility_check(t);
    let mut out = Classification {
        class: EquilibriumClass::GibbsTypeOnly,
        s,
        strongly_conformal,
        irreducibility,
        domination: None,
        split: None,
        hyperbolic: None,
        reducible_cone: None,
        eps_grid: REDUCIBLE_EPS_GRID.to_vec(),
        inconclusive: Vec::new(),
    };
    if out.strongly_conformal.is_yes() {
        out.class = EquilibriumClass::BernoulliOther;
        return out;
    }
    if let Irreducibility::Reducible { all, .. } = &out.irreducibility {
        let found = reducible_cone_search(t, all, budget);
        out.class = if found.is_some() {
            EquilibriumClass::BernoulliOther
        } else {
            EquilibriumClass::BernoulliReducibleNoCone
        };
        out.reducible_cone = Some(found);
        return out;
    }

    let verdict = domination_decide(t, budget);
    let dominated = matches!(verdict, DominationVerdict::Dominated(_));
    if let DominationVerdict::Inconclusive { .. } = verdict {
        out.inconclusive.push(ClassStage::Domination);
    }
    out.domination = Some(verdict);
    if dominated {
        out.class = EquilibriumClass::HolderGibbs;
        return out;
    }

    let split = conformal_split(t);
    let hyp = hyperbolic_part_certificate(t, &split, budget);
    match &hyp {
        Ok(_) => out.class = EquilibriumClass::QuasiBernoulli,
        Err(f) if !f.is_conclusive() => out.inconclusive.push(ClassStage::HyperbolicPart),
        Err(_) => {}
    }
    out.split = Some(split);
    out.hyperbolic = Some(hyp);
    out
}
