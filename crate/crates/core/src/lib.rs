//! Exact and empirical information-theoretic closure analysis for discrete
//! stochastic systems.
//!
//! A scenario partitions a system into a system of interest, an inner
//! environment bundled with it (together the context system) and an outer
//! environment, and evolves them with time-homogeneous Markov kernels. The
//! crate propagates the exact joint distribution, measures how much the
//! outer environment informs the context's next state, checks the
//! associated bounds, and offers a Monte Carlo route for logged data.
//!
//! ```
//! use closure_core::{measure, scenarios};
//!
//! let m = measure(&scenarios::driven(), 1).unwrap();
//! assert!(m.info_closure.value() > 0.9);
//! ```

pub mod closure;
pub mod error;
pub mod estimate;
pub mod fd;
pub mod info;
pub mod model;
pub mod prob;
pub mod random;
pub mod report;
pub mod scenarios;

pub use closure::{
    analyze_step, check_delta_budget, check_derivation_chain, check_proposition1, check_proposition2,
    check_theorem1, classify, measure, ClosureAnalysis, ClosureMeasures, ClosureVerdict, DeltaBudget,
    DerivationStep, PropositionCheck, StepKind, TheoremCheck, EXACT_TOLERANCE,
};
pub use error::{Error, Result};
pub use estimate::{
    empirical_closure_joint, estimate_measures, sample, EmpiricalJoint, EstimatedMeasures, Estimator,
    TrajectorySet, EMPIRICAL_TOLERANCE, RNG_ALGORITHM,
};
pub use fd::{FunctionTable, FunctionalClosure, MinimalInputSet, Witness};
pub use info::{
    conditional_entropy, conditional_mutual_information, entropy, joint_entropy, mutual_information,
    verify_identities, Bits, IdentityReport, IdentityResidual, VariableGroup,
};
pub use model::{
    ClosureJoint, FactoredContext, Limits, MarkovScenario, ScenarioFile, StochasticMatrix, SystemPartition,
    TimeStep,
};
pub use prob::{JointDistribution, Variable};
