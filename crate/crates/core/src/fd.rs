//! Functional dependency and minimal determinant sets over total function
//! tables.
//!
//! A [`FunctionTable`] maps every tuple of the Cartesian product of its
//! input alphabets to one output symbol. A candidate set of inputs
//! determines the output when any two rows that agree on the candidate
//! agree on the output.

use std::io::Read;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{decode_index, flat_index, outcome_count, Variable};

pub const DEFAULT_ARITY_LIMIT: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionTable {
    inputs: Vec<Variable>,
    output: Variable,
    dims: Vec<usize>,
    /// Output symbol index for each input tuple, row-major.
    rows: Vec<usize>,
}

impl FunctionTable {
    pub fn new(inputs: Vec<Variable>, output: Variable, rows: Vec<usize>) -> Result<Self> {
        let mut names: Vec<&str> = inputs.iter().map(Variable::name).collect();
        names.push(output.name());
        if let Some(dup) = names.iter().duplicates().next() {
            return Err(Error::NameCollision((*dup).to_owned()));
        }
        let size = outcome_count(&inputs);
        if rows.len() != size {
            return Err(Error::Schema(format!(
                "function table needs {size} rows, got {}",
                rows.len()
            )));
        }
        if let Some(bad) = rows.iter().find(|&&r| r >= output.cardinality()) {
            return Err(Error::Schema(format!(
                "output index {bad} outside the alphabet of '{}'",
                output.name()
            )));
        }
        let dims = inputs.iter().map(Variable::cardinality).collect();
        Ok(Self {
            inputs,
            output,
            dims,
            rows,
        })
    }

    /// Tabulate `f` over every input tuple (given as symbol indices).
    pub fn from_fn(
        inputs: Vec<Variable>,
        output: Variable,
        mut f: impl FnMut(&[usize]) -> usize,
    ) -> Result<Self> {
        let dims: Vec<usize> = inputs.iter().map(Variable::cardinality).collect();
        let rows = (0..outcome_count(&inputs))
            .map(|flat| f(&decode_index(&dims, flat)))
            .collect();
        Self::new(inputs, output, rows)
    }

    pub fn inputs(&self) -> &[Variable] {
        &self.inputs
    }

    pub fn output(&self) -> &Variable {
        &self.output
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    /// Output symbol index for an input tuple of symbol indices.
    pub fn eval(&self, input: &[usize]) -> usize {
        self.rows[flat_index(&self.dims, input)]
    }

    pub fn input_position(&self, name: &str) -> Result<usize> {
        self.inputs
            .iter()
            .position(|v| v.name() == name)
            .ok_or_else(|| Error::Name(format!("no input named '{name}'")))
    }

    fn mask_of<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.inputs.len()];
        for n in names {
            mask[self.input_position(n.as_ref())?] = true;
        }
        Ok(mask)
    }

    pub fn is_functionally_dependent<S: AsRef<str>>(&self, candidate: &[S]) -> Result<bool> {
        let members: Vec<usize> = self
            .mask_of(candidate)?
            .iter()
            .positions(|&m| m)
            .collect();
        Ok(self.find_conflict(&members).is_none())
    }

    /// Two row indices that agree on `members` but differ in output, if any.
    fn find_conflict(&self, members: &[usize]) -> Option<(usize, usize)> {
        let n = self.dims.len();
        let mut key_stride = vec![0usize; n];
        let mut stride = 1usize;
        for &m in members.iter().rev() {
            key_stride[m] = stride;
            stride *= self.dims[m];
        }
        let mut first_row: Vec<Option<usize>> = vec![None; stride];
        let mut digits = vec![0usize; n];
        let mut key = 0usize;
        for (flat, &out) in self.rows.iter().enumerate() {
            match first_row[key] {
                None => first_row[key] = Some(flat),
                Some(prev) if self.rows[prev] != out => return Some((prev, flat)),
                Some(_) => {}
            }
            for v in (0..n).rev() {
                digits[v] += 1;
                key += key_stride[v];
                if digits[v] < self.dims[v] {
                    break;
                }
                key -= key_stride[v] * self.dims[v];
                digits[v] = 0;
            }
        }
        None
    }

    fn labels_of(&self, flat: usize) -> Vec<String> {
        decode_index(&self.dims, flat)
            .into_iter()
            .zip(&self.inputs)
            .map(|(i, v)| v.label(i).to_owned())
            .collect()
    }

    fn minimal_set(&self, members: &[usize]) -> MinimalInputSet {
        let necessity = members
            .iter()
            .map(|&m| {
                let rest: Vec<usize> = members.iter().copied().filter(|&x| x != m).collect();
                let (a, b) = self
                    .find_conflict(&rest)
                    .expect("a proper subset of a minimal set cannot determine the output");
                Witness {
                    variable: self.inputs[m].name().to_owned(),
                    row_a: self.labels_of(a),
                    row_b: self.labels_of(b),
                }
            })
            .collect();
        MinimalInputSet {
            members: members.iter().map(|&m| self.inputs[m].name().to_owned()).collect(),
            excluded: (0..self.inputs.len())
                .filter(|i| !members.contains(i))
                .map(|i| self.inputs[i].name().to_owned())
                .collect(),
            rows_checked: self.rows.len(),
            necessity,
        }
    }

    /// Every inclusion-minimal determinant set, ordered lexicographically by
    /// input position.
    pub fn minimal_input_sets(&self) -> Result<Vec<MinimalInputSet>> {
        self.minimal_input_sets_with_limit(DEFAULT_ARITY_LIMIT)
    }

    pub fn minimal_input_sets_with_limit(&self, arity_limit: usize) -> Result<Vec<MinimalInputSet>> {
        Ok(self
            .minimal_positions(arity_limit)?
            .iter()
            .map(|m| self.minimal_set(m))
            .collect())
    }

    /// Breadth-first search over the subset lattice; supersets of sets that
    /// already determine the output are never tested.
    fn minimal_positions(&self, arity_limit: usize) -> Result<Vec<Vec<usize>>> {
        let n = self.inputs.len();
        if n > arity_limit {
            return Err(Error::Limit(format!(
                "{n} inputs exceeds the arity limit of {arity_limit}"
            )));
        }
        let mut found: Vec<u64> = Vec::new();
        let mut sets: Vec<Vec<usize>> = Vec::new();
        for size in 0..=n {
            for combo in (0..n).combinations(size) {
                let bits = combo.iter().fold(0u64, |acc, &i| acc | 1 << i);
                if found.iter().any(|&f| f & !bits == 0) {
                    continue;
                }
                if self.find_conflict(&combo).is_none() {
                    found.push(bits);
                    sets.push(combo);
                }
            }
        }
        sets.sort();
        Ok(sets)
    }

    /// Functionally closed against `environment_inputs` when some minimal
    /// determinant set avoids all of them.
    pub fn is_functionally_closed<S: AsRef<str>>(&self, environment_inputs: &[S]) -> Result<FunctionalClosure> {
        let env_mask = self.mask_of(environment_inputs)?;
        let sets = self.minimal_positions(DEFAULT_ARITY_LIMIT)?;
        let evidence = sets
            .iter()
            .find(|m| m.iter().all(|&i| !env_mask[i]))
            .map(|m| self.minimal_set(m));
        Ok(FunctionalClosure {
            environment_inputs: environment_inputs.iter().map(|s| s.as_ref().to_owned()).collect(),
            closed: evidence.is_some(),
            evidence,
            minimal_sets: sets.iter().map(|m| self.minimal_set(m)).collect(),
        })
    }

    /// Read a CSV table: header is the input names then the output name,
    /// one row per input tuple. Alphabets are the labels in order of first
    /// appearance.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        if header.is_empty() {
            return Err(Error::Schema("function table needs an output column".into()));
        }
        let width = header.len();
        let mut alphabets: Vec<Vec<String>> = vec![Vec::new(); width];
        let mut records: Vec<Vec<usize>> = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != width {
                return Err(Error::Schema(format!(
                    "row {}: expected {width} fields, got {}",
                    line + 2,
                    record.len()
                )));
            }
            let idx = record
                .iter()
                .zip(alphabets.iter_mut())
                .map(|(label, alphabet)| match alphabet.iter().position(|l| l == label) {
                    Some(i) => i,
                    None => {
                        alphabet.push(label.to_owned());
                        alphabet.len() - 1
                    }
                })
                .collect();
            records.push(idx);
        }
        let mut vars = header
            .into_iter()
            .zip(alphabets)
            .map(|(name, alphabet)| {
                if alphabet.is_empty() {
                    Variable::new(name, ["_"])
                } else {
                    Variable::new(name, alphabet)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let output = vars.pop().expect("header is non-empty");
        let dims: Vec<usize> = vars.iter().map(Variable::cardinality).collect();
        let mut rows: Vec<Option<usize>> = vec![None; outcome_count(&vars)];
        for (line, rec) in records.iter().enumerate() {
            let flat = flat_index(&dims, &rec[..vars.len()]);
            if rows[flat].is_some() {
                return Err(Error::Schema(format!(
                    "row {}: input tuple listed twice",
                    line + 2
                )));
            }
            rows[flat] = Some(rec[vars.len()]);
        }
        let missing = rows.iter().filter(|r| r.is_none()).count();
        if missing > 0 {
            let first = rows.iter().position(Option::is_none).unwrap();
            let labels: Vec<String> = decode_index(&dims, first)
                .into_iter()
                .zip(&vars)
                .map(|(i, v)| v.label(i).to_owned())
                .collect();
            return Err(Error::Schema(format!(
                "table is not total: {missing} input tuples missing, e.g. {labels:?}"
            )));
        }
        Self::new(vars, output, rows.into_iter().map(Option::unwrap).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = self.inputs.iter().map(Variable::name).collect();
        header.push(self.output.name());
        wtr.write_record(&header)?;
        for (flat, &out) in self.rows.iter().enumerate() {
            let mut rec = self.labels_of(flat);
            rec.push(self.output.label(out).to_owned());
            wtr.write_record(&rec)?;
        }
        let bytes = wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("labels are utf-8"))
    }
}

/// Two rows agreeing on every member except `variable` yet producing
/// different outputs: removing `variable` breaks the dependency.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub variable: String,
    pub row_a: Vec<String>,
    pub row_b: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalInputSet {
    pub members: Vec<String>,
    /// Inputs outside the set; the output was verified constant across them
    /// by checking every row.
    pub excluded: Vec<String>,
    pub rows_checked: usize,
    pub necessity: Vec<Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionalClosure {
    pub environment_inputs: Vec<String>,
    pub closed: bool,
    pub evidence: Option<MinimalInputSet>,
    pub minimal_sets: Vec<MinimalInputSet>,
}
