//! Monte Carlo trajectories and plug-in estimates of the closure measures.
//!
//! Trajectory `k` of a sampled set draws from its own ChaCha8 stream
//! (`seed_from_u64(seed)` with stream `k`), so the result does not depend
//! on the order in which trajectories are generated.

use std::collections::HashMap;
use std::f64::consts::LN_2;
use std::io::Read;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::closure::{ClosureAnalysis, ClosureMeasures};
use crate::error::{Error, Result};
use crate::info::{raw, Bits};
use crate::model::{ClosureJoint, MarkovScenario, SystemPartition, TimeStep, NEXT_SUFFIX};
use crate::prob::{decode_index, flat_index, outcome_count, JointDistribution, Variable};

/// Identifier of the sampling algorithm, recorded in reports.
pub const RNG_ALGORITHM: &str = "chacha8/seed_from_u64/stream=trajectory_index";

/// Default verdict tolerance for estimated measures.
pub const EMPIRICAL_TOLERANCE: Bits = Bits(0.01);

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    #[default]
    PlugIn,
    MillerMadow,
}

/// A set of equal-length state sequences `(S^C_t, E^O_t)` for `t = 0..=horizon`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrajectorySet {
    pub fingerprint: Option<String>,
    pub seed: Option<u64>,
    pub rng_algorithm: Option<String>,
    pub horizon: usize,
    context_vars: Vec<Variable>,
    env_vars: Vec<Variable>,
    /// Per trajectory, per step: (context state index, environment state index).
    paths: Vec<Vec<(usize, usize)>>,
}

impl TrajectorySet {
    pub fn count(&self) -> usize {
        self.paths.len()
    }

    pub fn paths(&self) -> &[Vec<(usize, usize)>] {
        &self.paths
    }

    pub fn context_vars(&self) -> &[Variable] {
        &self.context_vars
    }

    pub fn env_vars(&self) -> &[Variable] {
        &self.env_vars
    }

    /// Column names of the tabular form.
    pub fn columns(&self) -> Vec<String> {
        let mut header = vec!["trajectory_id".to_owned(), "step".to_owned()];
        header.extend(self.context_vars.iter().chain(&self.env_vars).map(|v| v.name().to_owned()));
        header
    }

    /// One row of labels per trajectory and step, matching [`Self::columns`].
    pub fn records(&self) -> impl Iterator<Item = Vec<String>> + '_ {
        let sdims: Vec<usize> = self.context_vars.iter().map(Variable::cardinality).collect();
        let edims: Vec<usize> = self.env_vars.iter().map(Variable::cardinality).collect();
        self.paths.iter().enumerate().flat_map(move |(k, path)| {
            let (sdims, edims) = (sdims.clone(), edims.clone());
            path.iter().enumerate().map(move |(t, &(s, e))| {
                let mut rec = vec![k.to_string(), t.to_string()];
                let labels = decode_index(&sdims, s)
                    .into_iter()
                    .zip(&self.context_vars)
                    .chain(decode_index(&edims, e).into_iter().zip(&self.env_vars))
                    .map(|(i, v)| v.label(i).to_owned());
                rec.extend(labels);
                rec
            })
        })
    }

    /// CSV with columns `trajectory_id, step`, then one column per context
    /// and outer-environment variable. Provenance is written as leading
    /// `# key=value` comment lines.
    pub fn to_csv(&self) -> Result<String> {
        let mut meta = String::new();
        if let Some(fp) = &self.fingerprint {
            meta += &format!("# fingerprint={fp}\n");
        }
        if let Some(seed) = self.seed {
            meta += &format!("# seed={seed}\n");
        }
        if let Some(rng) = &self.rng_algorithm {
            meta += &format!("# rng={rng}\n");
        }
        let mut wtr = csv::Writer::from_writer(meta.into_bytes());
        wtr.write_record(self.columns())?;
        for rec in self.records() {
            wtr.write_record(&rec)?;
        }
        let bytes = wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("labels are utf-8"))
    }

    /// Load logged trajectories, validating labels against the partition.
    pub fn from_csv<R: Read>(reader: R, partition: &SystemPartition) -> Result<Self> {
        let context_vars = partition.context_vars();
        let env_vars = partition.outer_env().to_vec();
        let mut text = String::new();
        let mut reader = reader;
        reader.read_to_string(&mut text)?;
        let mut meta: HashMap<&str, &str> = HashMap::new();
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            if let Some((k, v)) = line.trim_start_matches('#').trim().split_once('=') {
                meta.insert(k.trim(), v.trim());
            }
        }
        let seed = match meta.get("seed") {
            Some(s) => Some(
                s.parse::<u64>()
                    .map_err(|_| Error::Schema(format!("seed '{s}' is not a 64-bit integer")))?,
            ),
            None => None,
        };
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        let mut expected = vec!["trajectory_id".to_owned(), "step".to_owned()];
        expected.extend(context_vars.iter().chain(&env_vars).map(|v| v.name().to_owned()));
        if header != expected {
            return Err(Error::Schema(format!(
                "trajectory header {header:?} does not match {expected:?}"
            )));
        }
        let sdims: Vec<usize> = context_vars.iter().map(Variable::cardinality).collect();
        let edims: Vec<usize> = env_vars.iter().map(Variable::cardinality).collect();
        let ns = context_vars.len();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut paths: Vec<Vec<(usize, usize)>> = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let at = |msg: String| Error::Schema(format!("line {line}: {msg}"));
            let id = record.get(0).unwrap_or_default().to_owned();
            let step: usize = record
                .get(1)
                .unwrap_or_default()
                .parse()
                .map_err(|_| at("step is not a non-negative integer".into()))?;
            let labels: Vec<&str> = record.iter().skip(2).collect();
            let resolve = |vars: &[Variable], labels: &[&str]| -> Result<Vec<usize>> {
                vars.iter()
                    .zip(labels)
                    .map(|(v, l)| v.index_of(l).ok_or_else(|| at(format!("'{l}' is not a label of '{}'", v.name()))))
                    .collect()
            };
            let s = flat_index(&sdims, &resolve(&context_vars, &labels[..ns])?);
            let e = flat_index(&edims, &resolve(&env_vars, &labels[ns..])?);
            let k = *index.entry(id).or_insert_with(|| {
                paths.push(Vec::new());
                paths.len() - 1
            });
            if step != paths[k].len() {
                return Err(at(format!(
                    "expected step {} of trajectory {}, found {step}",
                    paths[k].len(),
                    k
                )));
            }
            paths[k].push((s, e));
        }
        let Some(first) = paths.first() else {
            return Err(Error::Schema("trajectory file has no rows".into()));
        };
        let len = first.len();
        if len < 2 || paths.iter().any(|p| p.len() != len) {
            return Err(Error::Schema(
                "all trajectories must share a horizon of at least one step".into(),
            ));
        }
        Ok(Self {
            fingerprint: meta.get("fingerprint").map(|s| s.to_string()),
            seed,
            rng_algorithm: meta.get("rng").map(|s| s.to_string()),
            horizon: len - 1,
            context_vars,
            env_vars,
            paths,
        })
    }
}

/// Draw `count` independent trajectories of `horizon` steps.
pub fn sample(scenario: &MarkovScenario, count: usize, horizon: usize, seed: u64) -> Result<TrajectorySet> {
    if count == 0 || horizon == 0 {
        return Err(Error::Argument("count and horizon must both be at least 1".into()));
    }
    if horizon > scenario.limits().horizon {
        return Err(Error::Limit(format!(
            "horizon {horizon} exceeds the limit {}",
            scenario.limits().horizon
        )));
    }
    let schema = |e: rand::distributions::WeightedError| Error::Schema(format!("unsampleable distribution: {e}"));
    let initial = WeightedIndex::new(scenario.initial().mass()).map_err(schema)?;
    let rows = scenario.context_size() * scenario.env_size();
    let context: Vec<WeightedIndex<f64>> = (0..rows)
        .map(|r| WeightedIndex::new(scenario.context_kernel().row(r)).map_err(schema))
        .collect::<Result<_>>()?;
    let env: Vec<WeightedIndex<f64>> = (0..rows)
        .map(|r| WeightedIndex::new(scenario.env_kernel().row(r)).map_err(schema))
        .collect::<Result<_>>()?;
    let ne = scenario.env_size();

    let paths = (0..count)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let start = initial.sample(&mut rng);
            let mut state = (start / ne, start % ne);
            let mut path = Vec::with_capacity(horizon + 1);
            path.push(state);
            for _ in 0..horizon {
                let row = state.0 * ne + state.1;
                let s = context[row].sample(&mut rng);
                let e = env[row].sample(&mut rng);
                state = (s, e);
                path.push(state);
            }
            path
        })
        .collect();
    Ok(TrajectorySet {
        fingerprint: Some(scenario.fingerprint()),
        seed: Some(seed),
        rng_algorithm: Some(RNG_ALGORITHM.to_owned()),
        horizon,
        context_vars: scenario.partition().context_vars(),
        env_vars: scenario.partition().outer_env().to_vec(),
        paths,
    })
}

/// Counts of `(S^C_n, E^O_n, S^C_{n+1})` across trajectories.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmpiricalJoint {
    pub step: TimeStep,
    pub counts: Vec<u64>,
    pub sample_size: u64,
    pub estimator: Estimator,
    context_vars: Vec<Variable>,
    env_vars: Vec<Variable>,
}

impl EmpiricalJoint {
    pub fn with_estimator(mut self, estimator: Estimator) -> Self {
        self.estimator = estimator;
        self
    }

    fn variables(&self) -> Vec<Variable> {
        let next = self
            .context_vars
            .iter()
            .map(|v| v.renamed(format!("{}{NEXT_SUFFIX}", v.name())));
        self.context_vars
            .iter()
            .chain(&self.env_vars)
            .cloned()
            .chain(next)
            .collect()
    }

    /// Relative frequencies as a closure joint.
    pub fn to_closure_joint(&self) -> ClosureJoint {
        let n = self.sample_size as f64;
        let mass = self.counts.iter().map(|&c| c as f64 / n).collect();
        ClosureJoint::new(
            self.step,
            JointDistribution::from_parts(self.variables(), mass),
            self.context_vars.len(),
            self.env_vars.len(),
        )
    }
}

pub fn empirical_closure_joint(traj: &TrajectorySet, n: impl Into<TimeStep>) -> Result<EmpiricalJoint> {
    let n = n.into();
    if n.0 + 1 > traj.horizon {
        return Err(Error::Limit(format!(
            "step {} needs step {} but the trajectories stop at {}",
            n.0,
            n.0 + 1,
            traj.horizon
        )));
    }
    let ns = outcome_count(&traj.context_vars);
    let ne = outcome_count(&traj.env_vars);
    let mut counts = vec![0u64; ns * ne * ns];
    for path in &traj.paths {
        let (s, e) = path[n.0];
        let (s_next, _) = path[n.0 + 1];
        counts[(s * ne + e) * ns + s_next] += 1;
    }
    Ok(EmpiricalJoint {
        step: n,
        counts,
        sample_size: traj.paths.len() as u64,
        estimator: Estimator::PlugIn,
        context_vars: traj.context_vars.clone(),
        env_vars: traj.env_vars.clone(),
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatedMeasures {
    pub measures: ClosureMeasures,
    pub estimator: Estimator,
    pub sample_size: u64,
}

/// Closure measures from empirical frequencies. The plug-in route uses
/// the same definitional sums as the exact pipeline; Miller-Madow adds
/// `(m - 1) / (2 N ln 2)` to every entropy term, `m` being the number of
/// occupied cells of that marginal.
pub fn estimate_measures(emp: &EmpiricalJoint) -> Result<EstimatedMeasures> {
    if emp.sample_size == 0 {
        return Err(Error::Argument("empirical joint has no samples".into()));
    }
    let joint = emp.to_closure_joint();
    let measures = match emp.estimator {
        Estimator::PlugIn => ClosureAnalysis::new(joint).measures(),
        Estimator::MillerMadow => miller_madow_measures(&joint, emp.sample_size),
    };
    Ok(EstimatedMeasures {
        measures,
        estimator: emp.estimator,
        sample_size: emp.sample_size,
    })
}

pub(crate) fn miller_madow_entropy(dist: &JointDistribution, axes: &[usize], sample_size: u64) -> f64 {
    let occupied = dist.marginal_table(axes).iter().filter(|&&p| p > 0.0).count();
    raw::entropy(dist, axes) + (occupied.saturating_sub(1)) as f64 / (2.0 * sample_size as f64 * LN_2)
}

fn miller_madow_measures(joint: &ClosureJoint, sample_size: u64) -> ClosureMeasures {
    let h = |parts: &[&[usize]]| {
        let axes: Vec<usize> = parts.iter().flat_map(|p| p.iter().copied()).collect();
        miller_madow_entropy(&joint.dist, &axes, sample_size)
    };
    let (s, e, n) = (&joint.current[..], &joint.env[..], &joint.next[..]);
    let h_n = h(&[n]);
    let h_s = h(&[s]);
    let h_e = h(&[e]);
    let env_support = joint
        .dist
        .marginal_table(e)
        .iter()
        .filter(|&&p| p > 0.0)
        .count();
    ClosureMeasures {
        step: joint.step,
        info_closure: Bits(h(&[n, s]) + h(&[e, s]) - h(&[n, e, s]) - h_s),
        func_closure: Bits(h_n + h_e - h(&[n, e])),
        env_coupling: Bits(h_s + h_e - h(&[s, e])),
        self_information: Bits(h_n + h_s - h(&[n, s])),
        next_entropy: Bits(h_n),
        env_support,
    }
}
