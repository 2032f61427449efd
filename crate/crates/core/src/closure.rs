//! Closure measures, verdicts and the numeric checks of the closure
//! propositions, the mutual-information lower bound and its derivation.
//!
//! Everything here is evaluated on a [`ClosureJoint`], i.e. the exact (or
//! empirical) distribution over `(S^C_n, E^O_n, S^C_{n+1})`. In the names
//! below `S` is the context state at step `n`, `E` the outer environment at
//! step `n` and `S'` the context state at step `n + 1`.

use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{raw, Bits};
use crate::model::{ClosureJoint, MarkovScenario, TimeStep};

/// Default verdict tolerance for exact pipelines.
pub const EXACT_TOLERANCE: Bits = Bits(1e-9);

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosureMeasures {
    pub step: TimeStep,
    /// I(S'; E | S)
    pub info_closure: Bits,
    /// I(S'; E)
    pub func_closure: Bits,
    /// I(S; E)
    pub env_coupling: Bits,
    /// I(S'; S)
    pub self_information: Bits,
    /// H(S')
    pub next_entropy: Bits,
    /// Number of outer-environment outcomes with positive mass at step `n`.
    pub env_support: usize,
}

impl ClosureMeasures {
    /// Copy with numerical noise below zero clamped away.
    pub fn clamped(&self) -> Self {
        Self {
            info_closure: self.info_closure.clamped(),
            func_closure: self.func_closure.clamped(),
            env_coupling: self.env_coupling.clamped(),
            self_information: self.self_information.clamped(),
            next_entropy: self.next_entropy.clamped(),
            ..*self
        }
    }

    /// `(name, value)` pairs in report order.
    pub fn named(&self) -> [(&'static str, Bits); 5] {
        [
            ("info_closure", self.info_closure),
            ("func_closure", self.func_closure),
            ("env_coupling", self.env_coupling),
            ("self_information", self.self_information),
            ("next_entropy", self.next_entropy),
        ]
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosureVerdict {
    pub informationally_closed: bool,
    pub functionally_closed_informational: bool,
    pub systems_theoretic_closed: bool,
    pub tolerance: Bits,
    /// Functional flag set without the informational one.
    pub definitions_disagree: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremCheck {
    /// I(S; E)
    pub lhs: Bits,
    /// H(S', S) - H(S', S | E)
    pub rhs: Bits,
    pub slack: Bits,
    pub satisfied: bool,
    /// Whether informational closure held, i.e. whether the bound is
    /// expected to hold at all.
    pub conditioned: bool,
}

/// Result of checking a conditional statement: either its hypothesis failed
/// or the conclusion was measured.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum PropositionCheck {
    NotApplicable,
    Checked { residual: Bits, pass: bool },
}

impl PropositionCheck {
    pub fn is_applicable(&self) -> bool {
        matches!(self, PropositionCheck::Checked { .. })
    }

    pub fn passed(&self) -> Option<bool> {
        match self {
            PropositionCheck::NotApplicable => None,
            PropositionCheck::Checked { pass, .. } => Some(*pass),
        }
    }

    pub fn residual(&self) -> Option<Bits> {
        match self {
            PropositionCheck::NotApplicable => None,
            PropositionCheck::Checked { residual, .. } => Some(*residual),
        }
    }
}

impl fmt::Display for PropositionCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropositionCheck::NotApplicable => f.write_str("n/a"),
            PropositionCheck::Checked { residual, pass } => {
                write!(f, "{} (residual {residual})", if *pass { "pass" } else { "FAIL" })
            }
        }
    }
}

const NOT_APPLICABLE: &str = "n/a";

#[derive(Serialize, Deserialize)]
struct CheckedRepr {
    residual: Bits,
    pass: bool,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PropositionRepr {
    Checked(CheckedRepr),
    Tag(String),
}

impl Serialize for PropositionCheck {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match *self {
            PropositionCheck::NotApplicable => serializer.serialize_str(NOT_APPLICABLE),
            PropositionCheck::Checked { residual, pass } => {
                CheckedRepr { residual, pass }.serialize(serializer)
            }
        }
    }
}

impl<'de> Deserialize<'de> for PropositionCheck {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match PropositionRepr::deserialize(deserializer)? {
            PropositionRepr::Checked(c) => Ok(PropositionCheck::Checked {
                residual: c.residual,
                pass: c.pass,
            }),
            PropositionRepr::Tag(t) if t == NOT_APPLICABLE => Ok(PropositionCheck::NotApplicable),
            PropositionRepr::Tag(t) => Err(de::Error::custom(format!("unexpected tag '{t}'"))),
        }
    }
}

/// Where the system-environment coupling sits relative to the lower bound
/// and a designer-chosen ceiling `delta`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaBudget {
    pub delta: Bits,
    /// The theorem's lower bound on the coupling.
    pub lower_bound: Bits,
    pub env_coupling: Bits,
    /// `lower_bound - tol <= env_coupling <= delta + tol`
    pub within_budget: bool,
    /// `env_coupling > delta + tol`
    pub over_budget: bool,
    /// `delta` lies below the lower bound, so no closed design can meet it.
    pub infeasible: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    /// `value` is `|lhs - rhs|`; passes below tolerance.
    Identity,
    /// `value` is `lhs - rhs`; passes at or above `-tolerance`. Only
    /// applicable under informational closure.
    Inequality,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivationStep {
    pub name: String,
    pub kind: StepKind,
    pub value: Bits,
    pub applicable: bool,
    pub pass: bool,
}

pub mod step {
    pub const MI_AS_ENTROPY_DIFFERENCE: &str = "mi_as_entropy_difference";
    pub const EXPANDED_CHAIN: &str = "expanded_chain";
    pub const CHAIN_VIA_CONTEXT: &str = "chain_via_context";
    pub const CHAIN_VIA_ENVIRONMENT: &str = "chain_via_environment";
    pub const SELF_INFORMATION_DOMINATES: &str = "self_information_dominates";
    pub const ENTROPY_INEQUALITY: &str = "entropy_inequality";
    pub const ENTROPY_INEQUALITY_RHS: &str = "entropy_inequality_rhs_decomposition";
    pub const CONTEXT_ENTROPY_SUBSTITUTION: &str = "context_entropy_substitution";
    pub const ENTROPY_FORMS_EQUIVALENT: &str = "entropy_forms_equivalent";
    pub const COUPLING_ENTROPY_FORM: &str = "coupling_entropy_form";
    pub const COUPLING_LOWER_BOUND: &str = "coupling_lower_bound";
}

/// All closure quantities for one closure joint.
#[derive(Clone, Debug)]
pub struct ClosureAnalysis {
    joint: ClosureJoint,
}

impl ClosureAnalysis {
    pub fn new(joint: ClosureJoint) -> Self {
        Self { joint }
    }

    pub fn joint(&self) -> &ClosureJoint {
        &self.joint
    }

    fn s(&self) -> &[usize] {
        &self.joint.current
    }

    fn e(&self) -> &[usize] {
        &self.joint.env
    }

    fn n(&self) -> &[usize] {
        &self.joint.next
    }

    fn cat(a: &[usize], b: &[usize]) -> Vec<usize> {
        a.iter().chain(b).copied().collect()
    }

    fn h(&self, x: &[usize]) -> f64 {
        raw::entropy(&self.joint.dist, x)
    }

    fn h_given(&self, y: &[usize], x: &[usize]) -> f64 {
        raw::conditional_entropy(&self.joint.dist, y, x)
    }

    fn mi(&self, x: &[usize], y: &[usize]) -> f64 {
        raw::mutual_information(&self.joint.dist, x, y)
    }

    fn cmi(&self, x: &[usize], y: &[usize], z: &[usize]) -> f64 {
        raw::conditional_mutual_information(&self.joint.dist, x, y, z)
    }

    pub fn measures(&self) -> ClosureMeasures {
        let env_support = self
            .joint
            .dist
            .marginal_table(self.e())
            .iter()
            .filter(|&&p| p > 0.0)
            .count();
        ClosureMeasures {
            step: self.joint.step,
            info_closure: Bits(self.cmi(self.n(), self.e(), self.s())),
            func_closure: Bits(self.mi(self.n(), self.e())),
            env_coupling: Bits(self.mi(self.s(), self.e())),
            self_information: Bits(self.mi(self.n(), self.s())),
            next_entropy: Bits(self.h(self.n())),
            env_support,
        }
    }

    fn informationally_closed(&self, tolerance: Bits) -> bool {
        self.cmi(self.n(), self.e(), self.s()) < tolerance.0
    }

    /// I(S; E) >= H(S', S) - H(S', S | E).
    pub fn theorem(&self, tolerance: Bits) -> TheoremCheck {
        let ns = Self::cat(self.n(), self.s());
        let lhs = self.mi(self.s(), self.e());
        let rhs = self.h(&ns) - self.h_given(&ns, self.e());
        let slack = lhs - rhs;
        TheoremCheck {
            lhs: Bits(lhs),
            rhs: Bits(rhs),
            slack: Bits(slack),
            satisfied: slack >= -tolerance.0,
            conditioned: self.informationally_closed(tolerance),
        }
    }

    /// Under informational closure, I(S'; E, S) = I(S'; S).
    pub fn proposition1(&self, tolerance: Bits) -> PropositionCheck {
        if !self.informationally_closed(tolerance) {
            return PropositionCheck::NotApplicable;
        }
        let se = Self::cat(self.s(), self.e());
        let residual = (self.mi(self.n(), &se) - self.mi(self.n(), self.s())).abs();
        PropositionCheck::Checked {
            residual: Bits(residual),
            pass: residual < tolerance.0,
        }
    }

    /// When H(S' | S) vanishes, I(S'; S) = H(S').
    pub fn proposition2(&self, tolerance: Bits) -> PropositionCheck {
        if self.h_given(self.n(), self.s()) >= tolerance.0 {
            return PropositionCheck::NotApplicable;
        }
        let residual = (self.mi(self.n(), self.s()) - self.h(self.n())).abs();
        PropositionCheck::Checked {
            residual: Bits(residual),
            pass: residual < tolerance.0,
        }
    }

    /// Each step from the chain-rule expansion of I(S'; E, S) to the
    /// coupling lower bound, evaluated numerically on this joint.
    pub fn derivation_chain(&self, tolerance: Bits) -> Vec<DerivationStep> {
        let (s, e, n) = (self.s(), self.e(), self.n());
        let se = Self::cat(s, e);
        let ns = Self::cat(n, s);
        let closed = self.informationally_closed(tolerance);

        let i_n_se = self.mi(n, &se);
        let i_n_s = self.mi(n, s);
        let i_n_e = self.mi(n, e);
        let i_n_e_given_s = self.cmi(n, e, s);
        let i_n_s_given_e = self.cmi(n, s, e);
        let i_s_e = self.mi(s, e);
        let h_n = self.h(n);
        let h_s = self.h(s);
        let h_e = self.h(e);
        let h_ns = self.h(&ns);
        let h_n_given_s = self.h_given(n, s);
        let h_n_given_se = self.h_given(n, &se);
        let h_s_given_e = self.h_given(s, e);
        let h_e_given_s = self.h_given(e, s);
        let h_ns_given_e = self.h_given(&ns, e);

        // Both sides of the entropy-form inequality and its rearrangement.
        let entropy_lhs = h_n + h_s - h_ns;
        let entropy_rhs = h_n + h_s_given_e - h_ns_given_e;
        let rearranged_lhs = h_e - h_e_given_s;
        let rearranged_rhs = h_ns - h_ns_given_e;

        let identity = |name: &str, lhs: f64, rhs: f64| {
            let value = (lhs - rhs).abs();
            DerivationStep {
                name: name.to_owned(),
                kind: StepKind::Identity,
                value: Bits(value),
                applicable: true,
                pass: value < tolerance.0,
            }
        };
        let inequality = |name: &str, lhs: f64, rhs: f64| {
            let value = lhs - rhs;
            DerivationStep {
                name: name.to_owned(),
                kind: StepKind::Inequality,
                value: Bits(value),
                applicable: closed,
                pass: !closed || value >= -tolerance.0,
            }
        };

        vec![
            identity(step::MI_AS_ENTROPY_DIFFERENCE, i_n_se, h_n - h_n_given_se),
            identity(
                step::EXPANDED_CHAIN,
                i_n_se,
                i_n_s + h_n_given_s + i_n_e_given_s - h_n_given_s,
            ),
            identity(step::CHAIN_VIA_CONTEXT, i_n_se, i_n_s + i_n_e_given_s),
            identity(step::CHAIN_VIA_ENVIRONMENT, i_n_se, i_n_e + i_n_s_given_e),
            inequality(step::SELF_INFORMATION_DOMINATES, i_n_s, i_n_s_given_e),
            inequality(step::ENTROPY_INEQUALITY, entropy_lhs, entropy_rhs),
            identity(step::ENTROPY_INEQUALITY_RHS, entropy_rhs, i_n_s_given_e + i_n_e),
            identity(
                step::CONTEXT_ENTROPY_SUBSTITUTION,
                h_s,
                h_e + h_s_given_e - h_e_given_s,
            ),
            identity(
                step::ENTROPY_FORMS_EQUIVALENT,
                entropy_lhs - entropy_rhs,
                rearranged_lhs - rearranged_rhs,
            ),
            identity(step::COUPLING_ENTROPY_FORM, rearranged_lhs, i_s_e),
            inequality(step::COUPLING_LOWER_BOUND, i_s_e, rearranged_rhs),
        ]
    }
}

/// Closure analysis of a scenario at step `n`.
pub fn analyze_step(scenario: &MarkovScenario, n: impl Into<TimeStep>) -> Result<ClosureAnalysis> {
    Ok(ClosureAnalysis::new(scenario.closure_joint(n)?))
}

pub fn measure(scenario: &MarkovScenario, n: impl Into<TimeStep>) -> Result<ClosureMeasures> {
    Ok(analyze_step(scenario, n)?.measures())
}

pub fn classify(measures: &ClosureMeasures, tolerance: Bits) -> ClosureVerdict {
    let informationally_closed = measures.info_closure.0 < tolerance.0;
    let functionally_closed = measures.func_closure.0 < tolerance.0;
    let quiet = informationally_closed && functionally_closed && measures.env_coupling.0 < tolerance.0;
    ClosureVerdict {
        informationally_closed,
        functionally_closed_informational: functionally_closed,
        systems_theoretic_closed: quiet && measures.env_support <= 1,
        tolerance,
        definitions_disagree: functionally_closed && !informationally_closed,
    }
}

pub fn check_proposition1(
    scenario: &MarkovScenario,
    n: impl Into<TimeStep>,
    tolerance: Bits,
) -> Result<PropositionCheck> {
    Ok(analyze_step(scenario, n)?.proposition1(tolerance))
}

pub fn check_proposition2(
    scenario: &MarkovScenario,
    n: impl Into<TimeStep>,
    tolerance: Bits,
) -> Result<PropositionCheck> {
    Ok(analyze_step(scenario, n)?.proposition2(tolerance))
}

pub fn check_theorem1(
    scenario: &MarkovScenario,
    n: impl Into<TimeStep>,
    tolerance: Bits,
) -> Result<TheoremCheck> {
    Ok(analyze_step(scenario, n)?.theorem(tolerance))
}

pub fn check_derivation_chain(
    scenario: &MarkovScenario,
    n: impl Into<TimeStep>,
    tolerance: Bits,
) -> Result<Vec<DerivationStep>> {
    Ok(analyze_step(scenario, n)?.derivation_chain(tolerance))
}

pub fn check_delta_budget(theorem: &TheoremCheck, delta: Bits, tolerance: Bits) -> Result<DeltaBudget> {
    if delta.0.is_nan() || delta.0 < 0.0 {
        return Err(Error::Argument(format!("delta must be non-negative, got {}", delta.0)));
    }
    let coupling = theorem.lhs.0;
    let lower = theorem.rhs.0;
    let over_budget = coupling > delta.0 + tolerance.0;
    Ok(DeltaBudget {
        delta,
        lower_bound: theorem.rhs,
        env_coupling: theorem.lhs,
        within_budget: lower - tolerance.0 <= coupling && !over_budget,
        over_budget,
        infeasible: delta.0 + tolerance.0 < lower,
    })
}
