//! System/environment partition and the coupled Markov dynamics that
//! generate per-step joint distributions.
//!
//! States of the context system (system of interest plus inner
//! environment) and of the outer environment are flattened to mixed-radix
//! indices in declared variable order. The one-step transition factorizes
//! as `P(s', e' | s, e) = P(s' | s, e) * P(e' | s, e)` and is the same at
//! every step.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::prob::{
    outcome_count, resolve_outcome, sparse_to_dense, JointDistribution, MassEntry, Variable,
};

pub const DEFAULT_HORIZON_LIMIT: usize = 10_000;
pub const DEFAULT_OUTCOME_LIMIT: usize = 1_000_000;

/// Kernel rows must sum to one within this tolerance.
pub const ROW_TOLERANCE: f64 = 1e-12;

/// Propagated distributions must stay normalized within this tolerance.
pub const PROPAGATION_TOLERANCE: f64 = 1e-9;

/// Suffix marking the next-step copy of a context variable.
pub const NEXT_SUFFIX: &str = "'";

/// Discrete state index `n`.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimeStep(pub usize);

impl From<usize> for TimeStep {
    fn from(n: usize) -> Self {
        TimeStep(n)
    }
}

/// The system of interest, inner environment and outer environment.
///
/// The context system is `soi ++ inner_env`; the universe adds `outer_env`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PartitionFile", into = "PartitionFile")]
pub struct SystemPartition {
    soi: Vec<Variable>,
    inner_env: Vec<Variable>,
    outer_env: Vec<Variable>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionFile {
    #[serde(default)]
    pub soi: Vec<Variable>,
    pub inner_env: Vec<Variable>,
    #[serde(default)]
    pub outer_env: Vec<Variable>,
}

impl TryFrom<PartitionFile> for SystemPartition {
    type Error = Error;

    fn try_from(file: PartitionFile) -> Result<Self> {
        SystemPartition::new(file.soi, file.inner_env, file.outer_env)
    }
}

impl From<SystemPartition> for PartitionFile {
    fn from(p: SystemPartition) -> Self {
        PartitionFile {
            soi: p.soi,
            inner_env: p.inner_env,
            outer_env: p.outer_env,
        }
    }
}

impl SystemPartition {
    pub fn new(
        soi: Vec<Variable>,
        inner_env: Vec<Variable>,
        outer_env: Vec<Variable>,
    ) -> Result<Self> {
        if inner_env.is_empty() {
            return Err(Error::Schema(
                "partition.inner_env must name at least one variable".into(),
            ));
        }
        let mut names = HashSet::new();
        for v in soi.iter().chain(&inner_env).chain(&outer_env) {
            if !names.insert(v.name().to_owned()) {
                return Err(Error::NameCollision(format!(
                    "'{}' appears in more than one partition block",
                    v.name()
                )));
            }
        }
        for v in soi.iter().chain(&inner_env) {
            let next = format!("{}{NEXT_SUFFIX}", v.name());
            if names.contains(&next) {
                return Err(Error::NameCollision(format!(
                    "'{next}' is reserved for the next state of '{}'",
                    v.name()
                )));
            }
        }
        Ok(Self {
            soi,
            inner_env,
            outer_env,
        })
    }

    pub fn soi(&self) -> &[Variable] {
        &self.soi
    }

    pub fn inner_env(&self) -> &[Variable] {
        &self.inner_env
    }

    pub fn outer_env(&self) -> &[Variable] {
        &self.outer_env
    }

    /// Context system variables: `soi ++ inner_env`.
    pub fn context_vars(&self) -> Vec<Variable> {
        self.soi.iter().chain(&self.inner_env).cloned().collect()
    }

    /// Whole environment: `inner_env ++ outer_env`.
    pub fn environment_vars(&self) -> Vec<Variable> {
        self.inner_env.iter().chain(&self.outer_env).cloned().collect()
    }

    /// Universe: `soi ++ inner_env ++ outer_env`.
    pub fn universe_vars(&self) -> Vec<Variable> {
        self.soi
            .iter()
            .chain(&self.inner_env)
            .chain(&self.outer_env)
            .cloned()
            .collect()
    }

    pub fn context_size(&self) -> usize {
        outcome_count(&self.soi) * outcome_count(&self.inner_env)
    }

    pub fn env_size(&self) -> usize {
        outcome_count(&self.outer_env)
    }
}

/// Row-stochastic matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl StochasticMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Schema(format!(
                "kernel has {} entries, expected {rows}x{cols}",
                data.len()
            )));
        }
        for (r, row) in data.chunks(cols.max(1)).enumerate() {
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::Schema(format!("kernel row {r} has a negative entry")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::Schema(format!("kernel row {r} sums to {total}")));
            }
        }
        Ok(Self { rows, cols, data })
    }

    /// Build from a function giving each row's probability vector.
    pub fn from_rows(rows: usize, cols: usize, mut row: impl FnMut(usize) -> Vec<f64>) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let v = row(r);
            if v.len() != cols {
                return Err(Error::Schema(format!(
                    "kernel row {r} has {} entries, expected {cols}",
                    v.len()
                )));
            }
            data.extend(v);
        }
        Self::new(rows, cols, data)
    }

    /// Deterministic kernel: row `r` puts all mass on `target(r)`.
    pub fn deterministic(rows: usize, cols: usize, mut target: impl FnMut(usize) -> usize) -> Result<Self> {
        Self::from_rows(rows, cols, |r| {
            let mut v = vec![0.0; cols];
            v[target(r)] = 1.0;
            v
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn max_abs_diff(&self, other: &StochasticMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Context kernel given separately for the system of interest and the inner
/// environment: `P(s0', eI' | s0, eI, eO) = P(s0' | .) * P(eI' | .)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactoredContext {
    soi: StochasticMatrix,
    inner: StochasticMatrix,
}

impl FactoredContext {
    pub fn new(soi: StochasticMatrix, inner: StochasticMatrix) -> Result<Self> {
        if soi.rows() != inner.rows() {
            return Err(Error::Schema(
                "factored kernels must share their conditioning rows".into(),
            ));
        }
        Ok(Self { soi, inner })
    }

    pub fn soi_kernel(&self) -> &StochasticMatrix {
        &self.soi
    }

    pub fn inner_kernel(&self) -> &StochasticMatrix {
        &self.inner
    }

    /// The flat context kernel over `(s0', eI')`.
    pub fn compose(&self) -> StochasticMatrix {
        let cols = self.soi.cols() * self.inner.cols();
        let mut data = Vec::with_capacity(self.soi.rows() * cols);
        for r in 0..self.soi.rows() {
            for &a in self.soi.row(r) {
                data.extend(self.inner.row(r).iter().map(|&b| a * b));
            }
        }
        StochasticMatrix {
            rows: self.soi.rows(),
            cols,
            data,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Limits {
    pub horizon: usize,
    pub outcomes: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            horizon: DEFAULT_HORIZON_LIMIT,
            outcomes: DEFAULT_OUTCOME_LIMIT,
        }
    }
}

/// Initial distribution plus time-homogeneous kernels for the context
/// system and the outer environment.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovScenario {
    name: String,
    partition: SystemPartition,
    initial: JointDistribution,
    context: StochasticMatrix,
    env: StochasticMatrix,
    factored: Option<FactoredContext>,
    limits: Limits,
}

impl MarkovScenario {
    /// `initial` must be over the context variables followed by the outer
    /// environment variables. Kernel rows are indexed by `s * |E| + e`.
    pub fn new(
        name: impl Into<String>,
        partition: SystemPartition,
        initial: JointDistribution,
        context: StochasticMatrix,
        env: StochasticMatrix,
    ) -> Result<Self> {
        let scenario = Self {
            name: name.into(),
            partition,
            initial,
            context,
            env,
            factored: None,
            limits: Limits::default(),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn factored(
        name: impl Into<String>,
        partition: SystemPartition,
        initial: JointDistribution,
        factored: FactoredContext,
        env: StochasticMatrix,
    ) -> Result<Self> {
        let soi_size = outcome_count(partition.soi());
        let inner_size = outcome_count(partition.inner_env());
        if factored.soi.cols() != soi_size || factored.inner.cols() != inner_size {
            return Err(Error::Schema(format!(
                "factored kernels must map onto {soi_size} and {inner_size} states"
            )));
        }
        let context = factored.compose();
        let mut scenario = Self::new(name, partition, initial, context, env)?;
        scenario.factored = Some(factored);
        Ok(scenario)
    }

    /// Drop the factored view, keeping the composed context kernel.
    pub fn into_flat(mut self) -> Self {
        self.factored = None;
        self
    }

    pub fn with_limits(mut self, limits: Limits) -> Result<Self> {
        self.limits = limits;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let ns = self.partition.context_size();
        let ne = self.partition.env_size();
        let expected: Vec<Variable> = self
            .partition
            .context_vars()
            .into_iter()
            .chain(self.partition.outer_env().iter().cloned())
            .collect();
        if self.initial.variables() != expected.as_slice() {
            return Err(Error::Schema(
                "initial distribution must be over the context variables then the outer environment variables"
                    .into(),
            ));
        }
        if self.context.rows() != ns * ne || self.context.cols() != ns {
            return Err(Error::Schema(format!(
                "context kernel is {}x{}, expected {}x{}",
                self.context.rows(),
                self.context.cols(),
                ns * ne,
                ns
            )));
        }
        if self.env.rows() != ns * ne || self.env.cols() != ne {
            return Err(Error::Schema(format!(
                "environment kernel is {}x{}, expected {}x{}",
                self.env.rows(),
                self.env.cols(),
                ns * ne,
                ne
            )));
        }
        let joint_size = ns.saturating_mul(ne).saturating_mul(ns);
        if joint_size > self.limits.outcomes {
            return Err(Error::Limit(format!(
                "closure joint would have {joint_size} outcomes (limit {})",
                self.limits.outcomes
            )));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn partition(&self) -> &SystemPartition {
        &self.partition
    }

    pub fn initial(&self) -> &JointDistribution {
        &self.initial
    }

    pub fn context_kernel(&self) -> &StochasticMatrix {
        &self.context
    }

    pub fn env_kernel(&self) -> &StochasticMatrix {
        &self.env
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    pub fn context_size(&self) -> usize {
        self.partition.context_size()
    }

    pub fn env_size(&self) -> usize {
        self.partition.env_size()
    }

    /// The factored view of the context kernel, when the scenario was
    /// authored that way.
    pub fn factor_context(&self) -> Result<&FactoredContext> {
        self.factored.as_ref().ok_or_else(|| {
            Error::UnsupportedView(format!(
                "scenario '{}' was authored with a flat context kernel",
                self.name
            ))
        })
    }

    fn check_horizon(&self, n: TimeStep) -> Result<()> {
        if n.0 > self.limits.horizon {
            return Err(Error::Limit(format!(
                "step {} exceeds the horizon limit {}",
                n.0, self.limits.horizon
            )));
        }
        Ok(())
    }

    /// One application of the joint kernel to a dense state distribution.
    pub(crate) fn advance(&self, pi: &[f64]) -> Vec<f64> {
        let ne = self.env_size();
        let ns = self.context_size();
        let mut out = vec![0.0; pi.len()];
        for (row, &p) in pi.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let env_row = self.env.row(row);
            for (s_next, &c) in self.context.row(row).iter().enumerate() {
                let ps = p * c;
                if ps == 0.0 {
                    continue;
                }
                let slot = &mut out[s_next * ne..(s_next + 1) * ne];
                for (o, &v) in slot.iter_mut().zip(env_row) {
                    *o += ps * v;
                }
            }
        }
        debug_assert_eq!(out.len(), ns * ne);
        out
    }

    fn state_distribution(&self, mass: Vec<f64>) -> Result<JointDistribution> {
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > PROPAGATION_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "propagated distribution sums to {total}"
            )));
        }
        Ok(JointDistribution::from_parts(
            self.initial.variables().to_vec(),
            mass,
        ))
    }

    /// Distribution over `(S^C_n, E^O_n)`.
    pub fn propagate(&self, n: impl Into<TimeStep>) -> Result<JointDistribution> {
        let n = n.into();
        self.check_horizon(n)?;
        let mut pi = self.initial.mass().to_vec();
        for _ in 0..n.0 {
            pi = self.advance(&pi);
        }
        self.state_distribution(pi)
    }

    /// Push an arbitrary state distribution forward `steps` times.
    pub fn propagate_from(&self, start: &JointDistribution, steps: usize) -> Result<JointDistribution> {
        if start.variables() != self.initial.variables() {
            return Err(Error::Schema(
                "start distribution is not over this scenario's state variables".into(),
            ));
        }
        self.check_horizon(TimeStep(steps))?;
        let mut pi = start.mass().to_vec();
        for _ in 0..steps {
            pi = self.advance(&pi);
        }
        self.state_distribution(pi)
    }

    /// Successive state distributions starting at step 0.
    pub fn states(&self) -> States<'_> {
        States {
            scenario: self,
            next: TimeStep(0),
            pi: self.initial.mass().to_vec(),
        }
    }

    /// Variables of the closure joint: context, outer environment, next context.
    pub fn closure_variables(&self) -> Vec<Variable> {
        let context = self.partition.context_vars();
        let next = context
            .iter()
            .map(|v| v.renamed(format!("{}{NEXT_SUFFIX}", v.name())));
        self.initial
            .variables()
            .iter()
            .cloned()
            .chain(next)
            .collect()
    }

    /// Joint distribution over `(S^C_n, E^O_n, S^C_{n+1})`.
    pub fn closure_joint(&self, n: impl Into<TimeStep>) -> Result<ClosureJoint> {
        let n = n.into();
        let state = self.propagate(n)?;
        Ok(self.closure_joint_from(n, &state))
    }

    pub(crate) fn closure_joint_from(&self, step: TimeStep, state: &JointDistribution) -> ClosureJoint {
        let ns = self.context_size();
        let mut mass = Vec::with_capacity(state.len() * ns);
        for (row, &p) in state.mass().iter().enumerate() {
            mass.extend(self.context.row(row).iter().map(|&c| p * c));
        }
        ClosureJoint::new(
            step,
            JointDistribution::from_parts(self.closure_variables(), mass),
            self.partition.context_vars().len(),
            self.partition.outer_env().len(),
        )
    }

    /// Serializable form; factored scenarios keep only the factored kernels.
    pub fn to_file(&self) -> ScenarioFile {
        let context = self.partition.context_vars();
        let given: Vec<Variable> = self.initial.variables().to_vec();
        let kernel_rows = |m: &StochasticMatrix, next: &[Variable]| -> Vec<KernelRow> {
            let given_dims: Vec<usize> = given.iter().map(Variable::cardinality).collect();
            let next_dims: Vec<usize> = next.iter().map(Variable::cardinality).collect();
            (0..m.rows())
                .map(|r| KernelRow {
                    given: labels(&given, &given_dims, r),
                    next: m
                        .row(r)
                        .iter()
                        .enumerate()
                        .filter(|(_, p)| **p > 0.0)
                        .map(|(c, &p)| MassEntry {
                            outcome: labels(next, &next_dims, c),
                            p,
                        })
                        .collect(),
                })
                .collect()
        };
        let (context_kernel, factored_context) = match &self.factored {
            Some(f) => (
                None,
                Some(FactoredFile {
                    soi: kernel_rows(&f.soi, self.partition.soi()),
                    inner_env: kernel_rows(&f.inner, self.partition.inner_env()),
                }),
            ),
            None => (Some(kernel_rows(&self.context, &context)), None),
        };
        ScenarioFile {
            name: Some(self.name.clone()),
            partition: self.partition.clone().into(),
            initial: self.initial.to_file().mass,
            context_kernel,
            env_kernel: kernel_rows(&self.env, self.partition.outer_env()),
            factored_context,
        }
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        let partition = SystemPartition::try_from(file.partition)?;
        let state_vars: Vec<Variable> = partition
            .context_vars()
            .into_iter()
            .chain(partition.outer_env().iter().cloned())
            .collect();
        let mut initial_mass = sparse_to_dense(
            &state_vars,
            file.initial.into_iter().map(|e| (e.outcome, e.p)),
        )
        .map_err(|e| Error::Schema(format!("initial: {e}")))?;
        let total: f64 = initial_mass.iter().sum();
        if initial_mass.iter().any(|p| !p.is_finite() || *p < 0.0)
            || (total - 1.0).abs() > crate::prob::FILE_NORMALIZATION_TOLERANCE
        {
            return Err(Error::Schema(format!(
                "initial: not a probability distribution (sums to {total})"
            )));
        }
        crate::prob::renormalize(&mut initial_mass);
        let initial = JointDistribution::from_parts(state_vars.clone(), initial_mass);
        let env = parse_kernel(&file.env_kernel, &state_vars, partition.outer_env(), "env_kernel")?;
        let name = file.name.unwrap_or_else(|| "unnamed".to_owned());
        match (file.factored_context, file.context_kernel) {
            (Some(f), flat) => {
                let factored = FactoredContext::new(
                    parse_kernel(&f.soi, &state_vars, partition.soi(), "factored_context.soi")?,
                    parse_kernel(
                        &f.inner_env,
                        &state_vars,
                        partition.inner_env(),
                        "factored_context.inner_env",
                    )?,
                )?;
                let scenario = Self::factored(name, partition, initial, factored, env)?;
                if let Some(rows) = flat {
                    let given = parse_kernel(
                        &rows,
                        &state_vars,
                        &scenario.partition.context_vars(),
                        "context_kernel",
                    )?;
                    let diff = given.max_abs_diff(&scenario.context);
                    if diff > ROW_TOLERANCE {
                        return Err(Error::Schema(format!(
                            "context_kernel differs from the composed factored kernels by {diff}"
                        )));
                    }
                }
                Ok(scenario)
            }
            (None, Some(rows)) => {
                let context =
                    parse_kernel(&rows, &state_vars, &partition.context_vars(), "context_kernel")?;
                Self::new(name, partition, initial, context, env)
            }
            (None, None) => Err(Error::Schema(
                "scenario needs context_kernel or factored_context".into(),
            )),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text)
            .map_err(|e| Error::Schema(format!("scenario: {e}")))?;
        Self::from_file(file)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    /// `sha256:` digest of the canonical (sorted-key, compact) JSON form.
    pub fn fingerprint(&self) -> String {
        fingerprint_of(&self.to_file())
    }
}

pub(crate) fn fingerprint_of<T: Serialize>(value: &T) -> String {
    let canonical = serde_json::to_value(value)
        .and_then(|v| serde_json::to_string(&v))
        .expect("scenario files always serialize");
    format!("sha256:{}", hex::encode(Sha256::digest(canonical.as_bytes())))
}

fn labels(vars: &[Variable], dims: &[usize], flat: usize) -> Vec<String> {
    crate::prob::decode_index(dims, flat)
        .into_iter()
        .zip(vars)
        .map(|(i, v)| v.label(i).to_owned())
        .collect()
}

fn parse_kernel(
    rows: &[KernelRow],
    given: &[Variable],
    next: &[Variable],
    path: &str,
) -> Result<StochasticMatrix> {
    let given_dims: Vec<usize> = given.iter().map(Variable::cardinality).collect();
    let n_rows = outcome_count(given);
    let n_cols = outcome_count(next);
    let mut data = vec![0.0; n_rows * n_cols];
    let mut seen = vec![false; n_rows];
    for (i, row) in rows.iter().enumerate() {
        let at = |e: Error| Error::Schema(format!("{path}[{i}]: {e}"));
        let idx = resolve_outcome(given, row.given.iter().map(String::as_str)).map_err(at)?;
        let r = crate::prob::flat_index(&given_dims, &idx);
        if seen[r] {
            return Err(at(Error::Schema(format!(
                "row for {:?} listed twice",
                row.given
            ))));
        }
        seen[r] = true;
        let dense = sparse_to_dense(next, row.next.iter().map(|e| (e.outcome.iter(), e.p)))
            .map_err(at)?;
        data[r * n_cols..(r + 1) * n_cols].copy_from_slice(&dense);
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::Schema(format!(
            "{path}: no row for {:?}",
            labels(given, &given_dims, missing)
        )));
    }
    StochasticMatrix::new(n_rows, n_cols, data).map_err(|e| Error::Schema(format!("{path}: {e}")))
}

/// Iterator over `(n, π_n)`.
pub struct States<'a> {
    scenario: &'a MarkovScenario,
    next: TimeStep,
    pi: Vec<f64>,
}

impl Iterator for States<'_> {
    type Item = Result<(TimeStep, JointDistribution)>;

    fn next(&mut self) -> Option<Self::Item> {
        let n = self.next;
        if n.0 > self.scenario.limits.horizon {
            return None;
        }
        let current = std::mem::take(&mut self.pi);
        self.pi = self.scenario.advance(&current);
        self.next = TimeStep(n.0 + 1);
        Some(self.scenario.state_distribution(current).map(|d| (n, d)))
    }
}

/// A joint over `(S^C_n, E^O_n, S^C_{n+1})` with the positions of each block.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosureJoint {
    pub step: TimeStep,
    pub dist: JointDistribution,
    pub current: Vec<usize>,
    pub env: Vec<usize>,
    pub next: Vec<usize>,
}

impl ClosureJoint {
    /// Variables of `dist` must be laid out as `context ++ env ++ next context`.
    pub(crate) fn new(step: TimeStep, dist: JointDistribution, context: usize, env: usize) -> Self {
        debug_assert_eq!(dist.variables().len(), 2 * context + env);
        Self {
            step,
            dist,
            current: (0..context).collect(),
            env: (context..context + env).collect(),
            next: (context + env..2 * context + env).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelRow {
    pub given: Vec<String>,
    pub next: Vec<MassEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactoredFile {
    pub soi: Vec<KernelRow>,
    pub inner_env: Vec<KernelRow>,
}

/// On-disk scenario description.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub partition: PartitionFile,
    pub initial: Vec<MassEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_kernel: Option<Vec<KernelRow>>,
    pub env_kernel: Vec<KernelRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factored_context: Option<FactoredFile>,
}
