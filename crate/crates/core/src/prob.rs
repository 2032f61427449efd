//! Dense joint probability tables over named finite variables.
//!
//! A [`JointDistribution`] stores one probability per outcome of the
//! Cartesian product of its variables' alphabets, laid out row-major in the
//! declared variable order (the last variable varies fastest). Zero-mass
//! outcomes are kept in the table.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalization tolerance for distributions built in memory.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Normalization tolerance applied when reading distribution files.
pub const FILE_NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// A named finite random variable with an ordered alphabet of labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "VariableSpec")]
pub struct Variable {
    name: String,
    alphabet: Vec<String>,
}

#[derive(Deserialize)]
struct VariableSpec {
    name: String,
    alphabet: Vec<String>,
}

impl TryFrom<VariableSpec> for Variable {
    type Error = Error;

    fn try_from(spec: VariableSpec) -> Result<Self> {
        Variable::new(spec.name, spec.alphabet)
    }
}

impl Variable {
    pub fn new<N, I, S>(name: N, alphabet: I) -> Result<Self>
    where
        N: Into<String>,
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::Argument("variable name must not be empty".into()));
        }
        let alphabet: Vec<String> = alphabet.into_iter().map(Into::into).collect();
        if alphabet.is_empty() {
            return Err(Error::Argument(format!(
                "variable '{name}' needs at least one symbol"
            )));
        }
        let mut seen = HashSet::with_capacity(alphabet.len());
        for label in &alphabet {
            if !seen.insert(label.as_str()) {
                return Err(Error::Argument(format!(
                    "variable '{name}' repeats label '{label}'"
                )));
            }
        }
        Ok(Self { name, alphabet })
    }

    /// Variable with labels `"0"`, `"1"`, ..., `"k-1"`.
    pub fn with_cardinality(name: impl Into<String>, k: usize) -> Result<Self> {
        Self::new(name, (0..k).map(|i| i.to_string()))
    }

    pub fn binary(name: impl Into<String>) -> Self {
        Self::with_cardinality(name, 2).expect("binary alphabet is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn cardinality(&self) -> usize {
        self.alphabet.len()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.alphabet.iter().position(|l| l == label)
    }

    pub fn label(&self, index: usize) -> &str {
        &self.alphabet[index]
    }

    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            alphabet: self.alphabet.clone(),
        }
    }

    pub(crate) fn resolve(&self, label: &str) -> Result<usize> {
        self.index_of(label).ok_or_else(|| {
            Error::Name(format!(
                "label '{label}' is not in the alphabet of '{}'",
                self.name
            ))
        })
    }
}

/// Product of alphabet sizes; 1 for an empty list.
pub fn outcome_count(variables: &[Variable]) -> usize {
    variables.iter().map(Variable::cardinality).product()
}

/// Mixed-radix flat index of a tuple of symbol indices.
pub(crate) fn flat_index(dims: &[usize], digits: &[usize]) -> usize {
    debug_assert_eq!(dims.len(), digits.len());
    digits
        .iter()
        .zip(dims)
        .fold(0, |acc, (&d, &radix)| acc * radix + d)
}

pub(crate) fn decode_index(dims: &[usize], mut flat: usize) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for (slot, &radix) in digits.iter_mut().zip(dims).rev() {
        *slot = flat % radix;
        flat /= radix;
    }
    digits
}

/// One entry of a serialized mass table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassEntry {
    pub outcome: Vec<String>,
    pub p: f64,
}

/// On-disk representation of a [`JointDistribution`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistributionFile {
    pub variables: Vec<Variable>,
    pub mass: Vec<MassEntry>,
}

/// An exact joint probability table over an ordered list of variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionFile", into = "DistributionFile")]
pub struct JointDistribution {
    variables: Vec<Variable>,
    dims: Vec<usize>,
    mass: Vec<f64>,
}

impl JointDistribution {
    /// Build from a dense mass vector in row-major declared order.
    pub fn new(variables: Vec<Variable>, mass: Vec<f64>) -> Result<Self> {
        check_names(&variables)?;
        let dims: Vec<usize> = variables.iter().map(Variable::cardinality).collect();
        let size: usize = dims.iter().product();
        if mass.len() != size {
            return Err(Error::InvalidDistribution(format!(
                "expected {size} outcomes, got {}",
                mass.len()
            )));
        }
        check_mass(&mass, NORMALIZATION_TOLERANCE)?;
        Ok(Self {
            variables,
            dims,
            mass,
        })
    }

    /// Build from sparse `(labels, p)` entries; unlisted outcomes are 0.
    pub fn from_entries<I, O, S>(variables: Vec<Variable>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (O, f64)>,
        O: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mass = sparse_to_dense(&variables, entries)?;
        Self::new(variables, mass)
    }

    pub fn uniform(variables: Vec<Variable>) -> Result<Self> {
        let size = outcome_count(&variables);
        Self::new(variables, vec![1.0 / size as f64; size])
    }

    pub fn point_mass<S: AsRef<str>>(variables: Vec<Variable>, outcome: &[S]) -> Result<Self> {
        let mut mass = vec![0.0; outcome_count(&variables)];
        let idx = resolve_outcome(&variables, outcome.iter().map(AsRef::as_ref))?;
        let dims: Vec<usize> = variables.iter().map(Variable::cardinality).collect();
        mass[flat_index(&dims, &idx)] = 1.0;
        Self::new(variables, mass)
    }

    /// Crate-internal constructor for tables produced by exact arithmetic
    /// (propagation, counting) whose normalization is checked by the caller.
    pub(crate) fn from_parts(variables: Vec<Variable>, mass: Vec<f64>) -> Self {
        let dims: Vec<usize> = variables.iter().map(Variable::cardinality).collect();
        debug_assert_eq!(mass.len(), dims.iter().product::<usize>());
        Self {
            variables,
            dims,
            mass,
        }
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, name: &str) -> Result<&Variable> {
        Ok(&self.variables[self.position(name)?])
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.variables.iter().map(Variable::name)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Dense mass table, row-major in declared variable order.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.name() == name)
            .ok_or_else(|| Error::Name(format!("no variable named '{name}'")))
    }

    /// Probability of a full outcome given by labels in declared order.
    pub fn prob<S: AsRef<str>>(&self, outcome: &[S]) -> Result<f64> {
        let idx = resolve_outcome(&self.variables, outcome.iter().map(AsRef::as_ref))?;
        Ok(self.mass[flat_index(&self.dims, &idx)])
    }

    /// Iterate over every outcome as label tuples, in table order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<&str>, f64)> + '_ {
        self.mass.iter().enumerate().map(move |(flat, &p)| {
            let labels = decode_index(&self.dims, flat)
                .into_iter()
                .zip(&self.variables)
                .map(|(i, v)| v.label(i))
                .collect();
            (labels, p)
        })
    }

    /// Sum out every variable not in `keep`. The result follows the order of `keep`.
    pub fn marginalize<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::Argument("marginalize needs at least one variable".into()));
        }
        let positions = self.positions(keep)?;
        let variables = positions.iter().map(|&i| self.variables[i].clone()).collect();
        Ok(Self::from_parts(variables, self.marginal_table(&positions)))
    }

    /// Restrict to the evidence event and renormalize over the remaining variables.
    pub fn condition<N: AsRef<str>, L: AsRef<str>>(&self, evidence: &[(N, L)]) -> Result<Self> {
        let mut fixed: Vec<Option<usize>> = vec![None; self.variables.len()];
        for (name, label) in evidence {
            let pos = self.position(name.as_ref())?;
            if fixed[pos].is_some() {
                return Err(Error::Argument(format!(
                    "evidence assigns '{}' twice",
                    name.as_ref()
                )));
            }
            fixed[pos] = Some(self.variables[pos].resolve(label.as_ref())?);
        }
        if evidence.is_empty() || fixed.iter().all(Option::is_some) {
            return Err(Error::Argument(
                "evidence must assign a non-empty proper subset of the variables".into(),
            ));
        }
        let free: Vec<usize> = (0..self.variables.len()).filter(|&i| fixed[i].is_none()).collect();
        let free_dims: Vec<usize> = free.iter().map(|&i| self.dims[i]).collect();
        let mut out = vec![0.0; free_dims.iter().product()];
        for (flat, &p) in self.mass.iter().enumerate() {
            let digits = decode_index(&self.dims, flat);
            let matches = fixed
                .iter()
                .zip(&digits)
                .all(|(f, d)| f.is_none_or(|want| want == *d));
            if matches {
                let sub: Vec<usize> = free.iter().map(|&i| digits[i]).collect();
                out[flat_index(&free_dims, &sub)] += p;
            }
        }
        let z: f64 = out.iter().sum();
        if z <= 0.0 {
            let described: Vec<String> = evidence
                .iter()
                .map(|(n, l)| format!("{}={}", n.as_ref(), l.as_ref()))
                .collect();
            return Err(Error::NullEvent(described.join(", ")));
        }
        out.iter_mut().for_each(|p| *p /= z);
        let variables = free.iter().map(|&i| self.variables[i].clone()).collect();
        Ok(Self::from_parts(variables, out))
    }

    /// Independent product; variables of `self` come first.
    pub fn product(&self, other: &Self) -> Result<Self> {
        for v in &other.variables {
            if self.variables.iter().any(|w| w.name() == v.name()) {
                return Err(Error::NameCollision(v.name().to_owned()));
            }
        }
        let mut mass = Vec::with_capacity(self.mass.len() * other.mass.len());
        for &a in &self.mass {
            mass.extend(other.mass.iter().map(|&b| a * b));
        }
        let variables = self.variables.iter().chain(&other.variables).cloned().collect();
        Ok(Self::from_parts(variables, mass))
    }

    pub(crate) fn positions<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(names.len());
        for name in names {
            let pos = self.position(name.as_ref())?;
            if out.contains(&pos) {
                return Err(Error::Argument(format!(
                    "variable '{}' listed twice",
                    name.as_ref()
                )));
            }
            out.push(pos);
        }
        Ok(out)
    }

    /// Dense marginal over the variables at `positions`, in that order.
    /// An empty position list yields the single-entry table `[total]`.
    pub(crate) fn marginal_table(&self, positions: &[usize]) -> Vec<f64> {
        let n = self.dims.len();
        let mut target_stride = vec![0usize; n];
        let mut stride = 1;
        for &pos in positions.iter().rev() {
            target_stride[pos] = stride;
            stride *= self.dims[pos];
        }
        let mut out = vec![0.0; stride];
        let mut digits = vec![0usize; n];
        let mut target = 0usize;
        for &p in &self.mass {
            out[target] += p;
            for v in (0..n).rev() {
                digits[v] += 1;
                target += target_stride[v];
                if digits[v] < self.dims[v] {
                    break;
                }
                target -= target_stride[v] * self.dims[v];
                digits[v] = 0;
            }
        }
        out
    }

    pub fn to_file(&self) -> DistributionFile {
        DistributionFile::from(self.clone())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn check_names(variables: &[Variable]) -> Result<()> {
    let mut seen = HashSet::new();
    for v in variables {
        if !seen.insert(v.name()) {
            return Err(Error::NameCollision(v.name().to_owned()));
        }
    }
    Ok(())
}

fn check_mass(mass: &[f64], tolerance: f64) -> Result<()> {
    if let Some(bad) = mass.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "probability {bad} is not a finite non-negative number"
        )));
    }
    let total: f64 = mass.iter().sum();
    if (total - 1.0).abs() > tolerance {
        return Err(Error::InvalidDistribution(format!(
            "probabilities sum to {total}, not 1"
        )));
    }
    Ok(())
}

pub(crate) fn resolve_outcome<'a>(
    variables: &[Variable],
    labels: impl IntoIterator<Item = &'a str>,
) -> Result<Vec<usize>> {
    let labels: Vec<&str> = labels.into_iter().collect();
    if labels.len() != variables.len() {
        return Err(Error::Schema(format!(
            "outcome has {} labels but {} variables are declared",
            labels.len(),
            variables.len()
        )));
    }
    variables
        .iter()
        .zip(labels)
        .map(|(v, l)| v.resolve(l))
        .collect()
}

pub(crate) fn sparse_to_dense<I, O, S>(variables: &[Variable], entries: I) -> Result<Vec<f64>>
where
    I: IntoIterator<Item = (O, f64)>,
    O: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let dims: Vec<usize> = variables.iter().map(Variable::cardinality).collect();
    let mut mass = vec![0.0; dims.iter().product()];
    let mut seen = vec![false; mass.len()];
    for (outcome, p) in entries {
        let labels: Vec<S> = outcome.into_iter().collect();
        let idx = resolve_outcome(variables, labels.iter().map(AsRef::as_ref))?;
        let flat = flat_index(&dims, &idx);
        if seen[flat] {
            let shown: Vec<&str> = labels.iter().map(AsRef::as_ref).collect();
            return Err(Error::Schema(format!("outcome {shown:?} listed twice")));
        }
        seen[flat] = true;
        mass[flat] = p;
    }
    Ok(mass)
}

impl TryFrom<DistributionFile> for JointDistribution {
    type Error = Error;

    fn try_from(file: DistributionFile) -> Result<Self> {
        check_names(&file.variables)?;
        let mut mass = sparse_to_dense(
            &file.variables,
            file.mass.into_iter().map(|e| (e.outcome, e.p)),
        )?;
        check_mass(&mass, FILE_NORMALIZATION_TOLERANCE)?;
        renormalize(&mut mass);
        Ok(Self::from_parts(file.variables, mass))
    }
}

/// Rescale to unit total unless already normalized to within
/// [`NORMALIZATION_TOLERANCE`], so that written files load back bit-exact.
pub(crate) fn renormalize(mass: &mut [f64]) {
    let total: f64 = mass.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        mass.iter_mut().for_each(|p| *p /= total);
    }
}

impl From<JointDistribution> for DistributionFile {
    fn from(dist: JointDistribution) -> Self {
        let mass = dist
            .iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|(labels, p)| MassEntry {
                outcome: labels.into_iter().map(str::to_owned).collect(),
                p,
            })
            .collect();
        DistributionFile {
            variables: dist.variables.clone(),
            mass,
        }
    }
}
