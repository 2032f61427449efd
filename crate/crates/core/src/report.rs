//! Report assembly and rendering for the command-line tool.
//!
//! JSON reports carry full precision and parse back into the same structs,
//! so re-serializing a parsed report reproduces it byte for byte. Text
//! reports show bits to six decimal places.

use std::fmt::Write as _;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::closure::{
    check_delta_budget, classify, ClosureAnalysis, ClosureMeasures, ClosureVerdict, DeltaBudget,
    DerivationStep, PropositionCheck, StepKind, TheoremCheck, EXACT_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::estimate::{empirical_closure_joint, estimate_measures, Estimator, TrajectorySet};
use crate::fd::{FunctionTable, FunctionalClosure, MinimalInputSet};
use crate::info::{verify_identities, Bits, VariableGroup};
use crate::model::{fingerprint_of, MarkovScenario, TimeStep};
use crate::random;
use crate::scenarios;

pub const TOOL: &str = "closure";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default seed of the identity suite.
pub const DEFAULT_VERIFY_SEED: u64 = 0;
pub const VERIFY_CASES: usize = 1000;
/// Named failures listed in a verify report; the count is always exact.
pub const MAX_LISTED_FAILURES: usize = 50;

/// Dynamics assumed by every exact analysis: next context and next
/// environment states are drawn independently given the current pair.
pub const KERNEL_MODEL: &str = "factorized: P(s',e'|s,e) = P(s'|s,e) P(e'|s,e)";

/// Scope note attached to functional-closure verdicts.
pub const FD_SCOPE: &str =
    "covers independence of the output from environment inputs; effects of the output on the environment are not encoded in a function table";

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Empirical,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Source {
    /// `scenario`, `trajectories` or `table`.
    pub kind: String,
    pub name: Option<String>,
    pub fingerprint: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Warning {
    pub code: String,
    pub message: String,
}

pub mod warning {
    pub const INFEASIBLE_DELTA: &str = "infeasible_delta";
    pub const FINGERPRINT_MISMATCH: &str = "fingerprint_mismatch";
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationInfo {
    pub estimator: Estimator,
    pub sample_size: u64,
    pub horizon: usize,
    pub seed: Option<u64>,
    pub rng_algorithm: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropositionResults {
    /// Under informational closure the environment adds nothing:
    /// `I(S'; S, E) = I(S'; S)`.
    pub environment_redundant: PropositionCheck,
    /// With deterministic self-dynamics: `I(S'; S) = H(S')`.
    pub self_determined: PropositionCheck,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRecord {
    pub step: TimeStep,
    pub measures: ClosureMeasures,
    pub verdict: ClosureVerdict,
    pub theorem: TheoremCheck,
    pub propositions: PropositionResults,
    pub delta: Option<DeltaBudget>,
    pub derivation: Vec<DerivationStep>,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureRange {
    pub min: Bits,
    pub max: Bits,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Summary {
    pub steps: usize,
    pub informationally_closed_steps: usize,
    pub info_closure: MeasureRange,
    pub func_closure: MeasureRange,
    pub env_coupling: MeasureRange,
    pub self_information: MeasureRange,
    pub next_entropy: MeasureRange,
    /// Largest derivation-chain identity residual over all steps.
    pub max_identity_residual: Bits,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosureReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub mode: Mode,
    pub source: Source,
    pub tolerance: Bits,
    pub delta: Option<Bits>,
    /// Set for exact analyses, which depend on the kernel factorization.
    pub kernel_model: Option<String>,
    pub estimation: Option<EstimationInfo>,
    pub steps: Vec<StepRecord>,
    pub summary: Summary,
    pub warnings: Vec<Warning>,
}

impl ClosureReport {
    /// Informationally closed at every reported step.
    pub fn closed(&self) -> bool {
        self.steps.iter().all(|s| s.verdict.informationally_closed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = self.write_text(&mut out);
        out
    }

    fn write_text(&self, out: &mut String) -> std::fmt::Result {
        writeln!(out, "{} {} {}", self.tool, self.version, self.command)?;
        write!(out, "{}: ", self.source.kind)?;
        if let Some(name) = &self.source.name {
            write!(out, "{name} ")?;
        }
        writeln!(out, "({})", self.source.fingerprint)?;
        let mode = match self.mode {
            Mode::Exact => "exact",
            Mode::Empirical => "empirical",
        };
        writeln!(out, "mode: {mode}  tolerance: {:e} bits", self.tolerance.0)?;
        if let Some(model) = &self.kernel_model {
            writeln!(out, "kernel: {model}")?;
        }
        if let Some(est) = &self.estimation {
            let estimator = match est.estimator {
                Estimator::PlugIn => "plug_in",
                Estimator::MillerMadow => "miller_madow",
            };
            write!(out, "estimator: {estimator}  samples: {}  horizon: {}", est.sample_size, est.horizon)?;
            if let Some(seed) = est.seed {
                write!(out, "  seed: {seed}")?;
            }
            if let Some(rng) = &est.rng_algorithm {
                write!(out, "  rng: {rng}")?;
            }
            writeln!(out)?;
        }
        if let Some(delta) = self.delta {
            writeln!(out, "delta: {delta} bits")?;
        }
        for rec in &self.steps {
            writeln!(out)?;
            writeln!(out, "step {}", rec.step.0)?;
            for (name, value) in rec.measures.named() {
                writeln!(out, "  {name:<18}{value}")?;
            }
            writeln!(out, "  {:<18}{}", "env_support", rec.measures.env_support)?;
            let v = &rec.verdict;
            writeln!(
                out,
                "  informational: {}  functional: {}  systems-theoretic: {}",
                closed_word(v.informationally_closed),
                closed_word(v.functionally_closed_informational),
                closed_word(v.systems_theoretic_closed),
            )?;
            if v.definitions_disagree {
                writeln!(out, "  note: functionally closed but informationally open")?;
            }
            let t = &rec.theorem;
            writeln!(
                out,
                "  coupling bound: I(S;E) {} >= {} (slack {}) {}",
                t.lhs,
                t.rhs,
                t.slack,
                match (t.satisfied, t.conditioned) {
                    (true, _) => "holds",
                    (false, true) => "VIOLATED",
                    (false, false) => "fails (system open, bound not implied)",
                }
            )?;
            writeln!(out, "  environment redundant: {}", rec.propositions.environment_redundant)?;
            writeln!(out, "  self determined: {}", rec.propositions.self_determined)?;
            if let Some(d) = &rec.delta {
                let flags = [
                    (d.within_budget, "within budget"),
                    (d.over_budget, "over budget"),
                    (d.infeasible, "infeasible"),
                ];
                let status = flags
                    .iter()
                    .filter(|(on, _)| *on)
                    .map(|(_, word)| *word)
                    .collect::<Vec<_>>()
                    .join(", ");
                writeln!(
                    out,
                    "  delta budget: coupling {} bound {} delta {} {status}",
                    d.env_coupling, d.lower_bound, d.delta
                )?;
            }
            let failed: Vec<&str> = rec
                .derivation
                .iter()
                .filter(|d| !d.pass)
                .map(|d| d.name.as_str())
                .collect();
            if failed.is_empty() {
                writeln!(out, "  derivation chain: {} checks pass", rec.derivation.len())?;
            } else {
                writeln!(out, "  derivation chain FAILED: {}", failed.join(", "))?;
            }
        }
        let s = &self.summary;
        if s.steps > 1 {
            writeln!(out)?;
            writeln!(
                out,
                "summary: {} steps, {} informationally closed",
                s.steps, s.informationally_closed_steps
            )?;
            for (name, r) in [
                ("info_closure", s.info_closure),
                ("func_closure", s.func_closure),
                ("env_coupling", s.env_coupling),
                ("self_information", s.self_information),
                ("next_entropy", s.next_entropy),
            ] {
                writeln!(out, "  {name:<18}min {}  max {}", r.min, r.max)?;
            }
        }
        for w in &self.warnings {
            writeln!(out, "warning[{}]: {}", w.code, w.message)?;
        }
        Ok(())
    }
}

fn closed_word(closed: bool) -> &'static str {
    if closed {
        "closed"
    } else {
        "open"
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct AnalysisOptions {
    pub tolerance: Bits,
    pub delta: Option<Bits>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            tolerance: EXACT_TOLERANCE,
            delta: None,
        }
    }
}

fn check_options(opts: &AnalysisOptions, steps: &Range<usize>) -> Result<()> {
    if !opts.tolerance.0.is_finite() || opts.tolerance.0 <= 0.0 {
        return Err(Error::Argument(format!(
            "tolerance must be positive, got {}",
            opts.tolerance.0
        )));
    }
    if let Some(d) = opts.delta {
        if !d.0.is_finite() || d.0 < 0.0 {
            return Err(Error::Argument(format!("delta must be non-negative, got {}", d.0)));
        }
    }
    if steps.is_empty() {
        return Err(Error::Argument(format!(
            "step range {}..{} is empty",
            steps.start, steps.end
        )));
    }
    Ok(())
}

fn step_record(
    analysis: &ClosureAnalysis,
    measures: ClosureMeasures,
    opts: &AnalysisOptions,
    warnings: &mut Vec<Warning>,
) -> Result<StepRecord> {
    let tol = opts.tolerance;
    let theorem = analysis.theorem(tol);
    let delta = match opts.delta {
        Some(d) => {
            let budget = check_delta_budget(&theorem, d, tol)?;
            if budget.infeasible {
                warnings.push(Warning {
                    code: warning::INFEASIBLE_DELTA.into(),
                    message: format!(
                        "step {}: delta {} lies below the coupling lower bound {}",
                        measures.step.0, d, theorem.rhs
                    ),
                });
            }
            Some(budget)
        }
        None => None,
    };
    Ok(StepRecord {
        step: measures.step,
        measures: measures.clamped(),
        verdict: classify(&measures, tol),
        theorem,
        propositions: PropositionResults {
            environment_redundant: analysis.proposition1(tol),
            self_determined: analysis.proposition2(tol),
        },
        delta,
        derivation: analysis.derivation_chain(tol),
    })
}

fn range_of(records: &[StepRecord], f: impl Fn(&ClosureMeasures) -> Bits) -> MeasureRange {
    let values = records.iter().map(|r| f(&r.measures).0);
    MeasureRange {
        min: Bits(values.clone().fold(f64::INFINITY, f64::min)),
        max: Bits(values.fold(f64::NEG_INFINITY, f64::max)),
    }
}

fn summarize(records: &[StepRecord]) -> Summary {
    let max_identity_residual = records
        .iter()
        .flat_map(|r| &r.derivation)
        .filter(|d| d.kind == StepKind::Identity)
        .map(|d| d.value.0)
        .fold(0.0, f64::max);
    Summary {
        steps: records.len(),
        informationally_closed_steps: records
            .iter()
            .filter(|r| r.verdict.informationally_closed)
            .count(),
        info_closure: range_of(records, |m| m.info_closure),
        func_closure: range_of(records, |m| m.func_closure),
        env_coupling: range_of(records, |m| m.env_coupling),
        self_information: range_of(records, |m| m.self_information),
        next_entropy: range_of(records, |m| m.next_entropy),
        max_identity_residual: Bits(max_identity_residual),
    }
}

/// Exact analysis of `scenario` at every step in `steps`. A single-step
/// range is an `analyze` report; longer ranges are sweeps.
pub fn analyze_scenario(
    scenario: &MarkovScenario,
    steps: Range<usize>,
    opts: AnalysisOptions,
) -> Result<ClosureReport> {
    check_options(&opts, &steps)?;
    if steps.end > scenario.limits().horizon {
        return Err(Error::Limit(format!(
            "step {} exceeds the horizon limit {}",
            steps.end - 1,
            scenario.limits().horizon
        )));
    }
    let command = if steps.len() == 1 { "analyze" } else { "sweep" };
    let mut warnings = Vec::new();
    let mut records = Vec::with_capacity(steps.len());
    for state in scenario.states().skip(steps.start).take(steps.len()) {
        let (step, pi) = state?;
        let analysis = ClosureAnalysis::new(scenario.closure_joint_from(step, &pi));
        let measures = analysis.measures();
        records.push(step_record(&analysis, measures, &opts, &mut warnings)?);
    }
    Ok(ClosureReport {
        tool: TOOL.into(),
        version: VERSION.into(),
        command: command.into(),
        mode: Mode::Exact,
        source: Source {
            kind: "scenario".into(),
            name: Some(scenario.name().to_owned()),
            fingerprint: scenario.fingerprint(),
        },
        tolerance: opts.tolerance,
        delta: opts.delta,
        kernel_model: Some(KERNEL_MODEL.into()),
        estimation: None,
        summary: summarize(&records),
        steps: records,
        warnings,
    })
}

/// Empirical analysis of logged or sampled trajectories. `expected` is the
/// fingerprint of the scenario the trajectories are claimed to come from.
pub fn analyze_trajectories(
    traj: &TrajectorySet,
    steps: Range<usize>,
    opts: AnalysisOptions,
    estimator: Estimator,
    expected: Option<&str>,
) -> Result<ClosureReport> {
    check_options(&opts, &steps)?;
    let command = if steps.len() == 1 { "analyze" } else { "sweep" };
    let mut warnings = Vec::new();
    if let (Some(want), Some(got)) = (expected, traj.fingerprint.as_deref()) {
        if want != got {
            warnings.push(Warning {
                code: warning::FINGERPRINT_MISMATCH.into(),
                message: format!("trajectories were sampled from {got}, not {want}"),
            });
        }
    }
    let mut records = Vec::with_capacity(steps.len());
    for n in steps {
        let emp = empirical_closure_joint(traj, n)?.with_estimator(estimator);
        let measures = estimate_measures(&emp)?.measures;
        let analysis = ClosureAnalysis::new(emp.to_closure_joint());
        records.push(step_record(&analysis, measures, &opts, &mut warnings)?);
    }
    let csv = traj.to_csv()?;
    Ok(ClosureReport {
        tool: TOOL.into(),
        version: VERSION.into(),
        command: command.into(),
        mode: Mode::Empirical,
        source: Source {
            kind: "trajectories".into(),
            name: None,
            fingerprint: fingerprint_of(&csv),
        },
        tolerance: opts.tolerance,
        delta: opts.delta,
        kernel_model: None,
        estimation: Some(EstimationInfo {
            estimator,
            sample_size: traj.count() as u64,
            horizon: traj.horizon,
            seed: traj.seed,
            rng_algorithm: traj.rng_algorithm.clone(),
        }),
        summary: summarize(&records),
        steps: records,
        warnings,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdReport {
    pub tool: String,
    pub version: String,
    pub source: Source,
    pub inputs: Vec<String>,
    pub output: String,
    pub minimal_sets: Vec<MinimalInputSet>,
    pub closure: Option<FunctionalClosure>,
    pub scope: Option<String>,
}

impl FdReport {
    pub fn build<S: AsRef<str>>(table: &FunctionTable, environment: Option<&[S]>) -> Result<Self> {
        let closure = environment.map(|env| table.is_functionally_closed(env)).transpose()?;
        let minimal_sets = match &closure {
            Some(c) => c.minimal_sets.clone(),
            None => table.minimal_input_sets()?,
        };
        Ok(Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            source: Source {
                kind: "table".into(),
                name: None,
                fingerprint: fingerprint_of(&table.to_csv()?),
            },
            inputs: table.inputs().iter().map(|v| v.name().to_owned()).collect(),
            output: table.output().name().to_owned(),
            minimal_sets,
            scope: closure.as_ref().map(|_| FD_SCOPE.to_owned()),
            closure,
        })
    }

    /// False only when an environment was given and no minimal set avoids it.
    pub fn passed(&self) -> bool {
        self.closure.as_ref().is_none_or(|c| c.closed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = self.write_text(&mut out);
        out
    }

    fn write_text(&self, out: &mut String) -> std::fmt::Result {
        writeln!(out, "{} {} fd", self.tool, self.version)?;
        writeln!(out, "table: ({})", self.source.fingerprint)?;
        writeln!(out, "output {} over inputs {}", self.output, self.inputs.join(", "))?;
        writeln!(out, "minimal input sets: {}", self.minimal_sets.len())?;
        for set in &self.minimal_sets {
            writeln!(out, "  {{{}}}", set.members.join(", "))?;
            for w in &set.necessity {
                writeln!(
                    out,
                    "    needs {}: ({}) vs ({})",
                    w.variable,
                    w.row_a.join(", "),
                    w.row_b.join(", ")
                )?;
            }
        }
        if let Some(c) = &self.closure {
            writeln!(
                out,
                "functionally closed against {{{}}}: {}",
                c.environment_inputs.join(", "),
                if c.closed { "yes" } else { "no" }
            )?;
            if let Some(e) = &c.evidence {
                writeln!(out, "  evidence: {{{}}}", e.members.join(", "))?;
            }
        }
        if let Some(scope) = &self.scope {
            writeln!(out, "note: {scope}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentitySummary {
    pub name: String,
    pub checked: usize,
    pub failed: usize,
    pub max_residual: Bits,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedFailure {
    /// `case N` for the random suite, `scenario@step` for derivation checks.
    pub case: String,
    pub name: String,
    pub value: Bits,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyReport {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub cases: usize,
    pub tolerance: Bits,
    pub identities: Vec<IdentitySummary>,
    pub derivation: Vec<IdentitySummary>,
    pub failure_count: usize,
    pub failures: Vec<NamedFailure>,
    pub passed: bool,
}

/// Identity-suite case `k`: 2-4 variables with alphabets of 2-5 symbols,
/// split into disjoint groups `x`, `y` and (with three or more variables) `z`.
pub fn identity_case(
    seed: u64,
    k: usize,
) -> (crate::prob::JointDistribution, VariableGroup, VariableGroup, Option<VariableGroup>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    let count = rng.gen_range(2..=4);
    let vars = random::variables(&mut rng, "v", count, 2..=5);
    let names: Vec<String> = vars.iter().map(|v| v.name().to_owned()).collect();
    let dist = random::distribution(&mut rng, vars);
    let group = |r: std::ops::Range<usize>| VariableGroup::new(names[r].iter().cloned()).expect("distinct names");
    match count {
        2 => (dist, group(0..1), group(1..2), None),
        3 => (dist, group(0..1), group(1..2), Some(group(2..3))),
        _ => {
            // one of the three groups holds two variables
            let (a, b) = match rng.gen_range(0..3) {
                0 => (2, 3),
                1 => (1, 3),
                _ => (1, 2),
            };
            (dist, group(0..a), group(a..b), Some(group(b..4)))
        }
    }
}

fn tally(summaries: &mut Vec<IdentitySummary>, name: &str, value: f64, pass: bool) {
    let idx = match summaries.iter().position(|s| s.name == name) {
        Some(i) => i,
        None => {
            summaries.push(IdentitySummary {
                name: name.to_owned(),
                checked: 0,
                failed: 0,
                max_residual: Bits::ZERO,
            });
            summaries.len() - 1
        }
    };
    let s = &mut summaries[idx];
    s.checked += 1;
    s.failed += usize::from(!pass);
    if value.abs() > s.max_residual.0 {
        s.max_residual = Bits(value.abs());
    }
}

/// The seeded identity suite plus derivation-chain checks on the bundled
/// `copy` and `decoupled` scenarios at steps 0 through 3.
pub fn verify(seed: u64, tolerance: Bits) -> Result<VerifyReport> {
    if tolerance.0.is_nan() || tolerance.0 <= 0.0 {
        return Err(Error::Argument(format!("tolerance must be positive, got {}", tolerance.0)));
    }
    let mut identities = Vec::new();
    let mut derivation = Vec::new();
    let mut failures = Vec::new();
    let mut failure_count = 0;
    let mut record = |failures: &mut Vec<NamedFailure>, case: String, name: &str, value: Bits| {
        failure_count += 1;
        if failures.len() < MAX_LISTED_FAILURES {
            failures.push(NamedFailure {
                case,
                name: name.to_owned(),
                value,
            });
        }
    };
    for k in 0..VERIFY_CASES {
        let (dist, x, y, z) = identity_case(seed, k);
        let report = verify_identities(&dist, &x, &y, z.as_ref(), tolerance)?;
        for r in &report.residuals {
            tally(&mut identities, &r.name, r.residual.0, r.pass);
            if !r.pass {
                record(&mut failures, format!("case {k}"), &r.name, r.residual);
            }
        }
    }
    for name in ["copy", "decoupled"] {
        let sc = scenarios::bundled(name).expect("bundled scenario");
        for n in 0..=3usize {
            let steps = ClosureAnalysis::new(sc.closure_joint(n)?).derivation_chain(tolerance);
            for d in steps.iter().filter(|d| d.applicable) {
                let residual = match d.kind {
                    StepKind::Identity => d.value.0,
                    StepKind::Inequality => (-d.value.0).max(0.0),
                };
                tally(&mut derivation, &d.name, residual, d.pass);
                if !d.pass {
                    record(&mut failures, format!("{name}@{n}"), &d.name, d.value);
                }
            }
        }
    }
    Ok(VerifyReport {
        tool: TOOL.into(),
        version: VERSION.into(),
        seed,
        cases: VERIFY_CASES,
        tolerance,
        identities,
        derivation,
        passed: failure_count == 0,
        failure_count,
        failures,
    })
}

impl VerifyReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = self.write_text(&mut out);
        out
    }

    fn write_text(&self, out: &mut String) -> std::fmt::Result {
        writeln!(out, "{} {} verify", self.tool, self.version)?;
        writeln!(
            out,
            "seed: {}  cases: {}  tolerance: {:e} bits",
            self.seed, self.cases, self.tolerance.0
        )?;
        for (title, rows) in [("identities", &self.identities), ("derivation chain", &self.derivation)] {
            writeln!(out, "{title}:")?;
            for s in rows {
                // residuals sit far below six decimals, so use scientific form
                writeln!(
                    out,
                    "  {:<50}{:>6} checked {:>6} failed  max {:.3e}",
                    s.name, s.checked, s.failed, s.max_residual.0
                )?;
            }
        }
        for f in &self.failures {
            writeln!(out, "FAIL {} {}: {:.3e}", f.case, f.name, f.value.0)?;
        }
        if self.failure_count > self.failures.len() {
            writeln!(out, "... {} more failures", self.failure_count - self.failures.len())?;
        }
        writeln!(out, "{}", if self.passed { "all checks pass" } else { "checks FAILED" })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_is_closed_at_step_five() {
        let r = analyze_scenario(&scenarios::decoupled(), 5..6, AnalysisOptions::default()).unwrap();
        assert_eq!(r.command, "analyze");
        assert!(r.closed());
        assert_eq!(r.steps[0].measures.info_closure, Bits(0.0));
    }

    #[test]
    fn driven_is_open_at_step_one() {
        let r = analyze_scenario(&scenarios::driven(), 1..2, AnalysisOptions::default()).unwrap();
        assert!(!r.closed());
        assert!(r.steps[0].measures.info_closure.0 > 0.1);
    }

    #[test]
    fn copy_delta_flags_over_budget() {
        let opts = AnalysisOptions {
            delta: Some(Bits(0.5)),
            ..Default::default()
        };
        let r = analyze_scenario(&scenarios::copy(), 1..2, opts).unwrap();
        let d = r.steps[0].delta.unwrap();
        assert!((d.env_coupling.0 - 1.0).abs() < 1e-12);
        assert!(d.over_budget);
        assert!(r.to_text().contains("over budget"));
    }

    #[test]
    fn sweep_is_ordered_and_summarized() {
        let r = analyze_scenario(&scenarios::decoupled(), 0..11, AnalysisOptions::default()).unwrap();
        assert_eq!(r.command, "sweep");
        let steps: Vec<usize> = r.steps.iter().map(|s| s.step.0).collect();
        assert_eq!(steps, (0..11).collect::<Vec<_>>());
        assert_eq!(r.summary.informationally_closed_steps, 11);
        assert!(r.summary.info_closure.max.0 < 1e-9);
        assert!(matches!(
            analyze_scenario(&scenarios::decoupled(), 3..3, AnalysisOptions::default()),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn bad_options_rejected() {
        let sc = scenarios::copy();
        for opts in [
            AnalysisOptions { tolerance: Bits(0.0), delta: None },
            AnalysisOptions { tolerance: Bits(1e-9), delta: Some(Bits(-1.0)) },
        ] {
            assert!(matches!(analyze_scenario(&sc, 0..1, opts), Err(Error::Argument(_))));
        }
        assert!(matches!(
            analyze_scenario(&sc, 0..10_001, AnalysisOptions::default()),
            Err(Error::Limit(_))
        ));
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let opts = AnalysisOptions {
            delta: Some(Bits(0.25)),
            ..Default::default()
        };
        for sc in [scenarios::copy(), scenarios::driven(), scenarios::decoupled()] {
            let json = analyze_scenario(&sc, 0..4, opts).unwrap().to_json().unwrap();
            let again = ClosureReport::from_json(&json).unwrap().to_json().unwrap();
            assert_eq!(json, again);
        }
    }

    #[test]
    fn infeasible_delta_warns() {
        // driven at step 1: lower bound I(S;E) + I(S';E|S) exceeds coupling
        let opts = AnalysisOptions {
            delta: Some(Bits(0.0)),
            ..Default::default()
        };
        let r = analyze_scenario(&scenarios::driven(), 1..2, opts).unwrap();
        assert!(r.steps[0].delta.unwrap().infeasible);
        assert_eq!(r.warnings[0].code, warning::INFEASIBLE_DELTA);
    }

    #[test]
    fn empirical_report_records_provenance() {
        let sc = scenarios::copy();
        let traj = crate::estimate::sample(&sc, 500, 3, 17).unwrap();
        let opts = AnalysisOptions {
            tolerance: crate::estimate::EMPIRICAL_TOLERANCE,
            delta: None,
        };
        let r = analyze_trajectories(&traj, 0..2, opts, Estimator::PlugIn, Some(&sc.fingerprint())).unwrap();
        let est = r.estimation.as_ref().unwrap();
        assert_eq!(est.seed, Some(17));
        assert_eq!(est.rng_algorithm.as_deref(), Some(crate::estimate::RNG_ALGORITHM));
        assert!(r.warnings.is_empty());
        let other = analyze_trajectories(&traj, 0..1, opts, Estimator::PlugIn, Some("sha256:00")).unwrap();
        assert_eq!(other.warnings[0].code, warning::FINGERPRINT_MISMATCH);
        assert!(matches!(
            analyze_trajectories(&traj, 3..4, opts, Estimator::PlugIn, None),
            Err(Error::Limit(_))
        ));
    }

    #[test]
    fn verify_default_passes() {
        let r = verify(DEFAULT_VERIFY_SEED, EXACT_TOLERANCE).unwrap();
        assert!(r.passed, "{}", r.to_text());
        assert_eq!(r.identities.len(), 9);
        assert_eq!(r.identities.iter().find(|s| s.name == "joint_entropy_symmetry").unwrap().checked, VERIFY_CASES);
    }

    #[test]
    fn verify_tiny_tolerance_names_failures() {
        let r = verify(DEFAULT_VERIFY_SEED, Bits(1e-15)).unwrap();
        assert!(!r.passed);
        assert!(r.failure_count > 0);
        assert!(!r.failures.is_empty());
    }

    #[test]
    fn verify_seed_changes_digits_not_verdict() {
        let a = verify(1, EXACT_TOLERANCE).unwrap();
        let b = verify(2, EXACT_TOLERANCE).unwrap();
        assert!(a.passed && b.passed);
        assert_ne!(a.identities, b.identities);
    }

    #[test]
    fn fd_report_orders_sets() {
        let text = "a,b,c,y\n0,0,0,0\n0,0,1,0\n0,1,0,1\n0,1,1,1\n1,0,0,1\n1,0,1,1\n1,1,0,0\n1,1,1,0\n";
        let t = FunctionTable::from_csv(text.as_bytes()).unwrap();
        let r = FdReport::build(&t, Some(&["c"])).unwrap();
        assert!(r.passed());
        assert_eq!(r.minimal_sets[0].members, ["a", "b"]);
        let open = FdReport::build(&t, Some(&["a"])).unwrap();
        assert!(!open.passed());
        assert!(open.to_text().contains("functionally closed against {a}: no"));
    }
}
