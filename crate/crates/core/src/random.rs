//! Seeded generators for distributions, scenarios and function tables.

use rand::Rng;

use crate::fd::FunctionTable;
use crate::model::{MarkovScenario, StochasticMatrix, SystemPartition};
use crate::prob::{outcome_count, JointDistribution, Variable};

/// Probability vector of length `n`. About one entry in five is zeroed
/// when `sparse` is set, keeping at least one positive entry.
pub fn simplex<R: Rng + ?Sized>(rng: &mut R, n: usize, sparse: bool) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| {
            if sparse && rng.gen_bool(0.2) {
                0.0
            } else {
                // exponential weights give a uniform point on the simplex
                -(1.0 - rng.gen::<f64>()).ln()
            }
        })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        let k = rng.gen_range(0..n);
        w[k] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Variables named `prefix0, prefix1, ...` with cardinalities drawn from `cards`.
pub fn variables<R: Rng + ?Sized>(
    rng: &mut R,
    prefix: &str,
    count: usize,
    cards: std::ops::RangeInclusive<usize>,
) -> Vec<Variable> {
    (0..count)
        .map(|i| {
            let k = rng.gen_range(cards.clone());
            Variable::with_cardinality(format!("{prefix}{i}"), k).expect("positive cardinality")
        })
        .collect()
}

pub fn distribution<R: Rng + ?Sized>(rng: &mut R, variables: Vec<Variable>) -> JointDistribution {
    let n = outcome_count(&variables);
    let mass = simplex(rng, n, true);
    JointDistribution::new(variables, mass).expect("simplex sums to one")
}

/// Shapes of generated scenarios.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ScenarioKind {
    /// Context rows depend on the context state only.
    Decoupled,
    /// Context rows depend on the context state only and are deterministic.
    DeterministicContext,
    /// Decoupled context, environment rows depending on the environment
    /// only, and a product initial distribution.
    FullyDecoupled,
    Arbitrary,
}

/// A small random scenario: one SOI variable of cardinality 2-3, one inner
/// variable of 1-3 and one outer variable of 2-3.
pub fn scenario<R: Rng + ?Sized>(rng: &mut R, kind: ScenarioKind) -> MarkovScenario {
    let soi = Variable::with_cardinality("s", rng.gen_range(2..=3)).unwrap();
    let inner = Variable::with_cardinality("i", rng.gen_range(1..=3)).unwrap();
    let outer = Variable::with_cardinality("e", rng.gen_range(2..=3)).unwrap();
    let partition = SystemPartition::new(vec![soi], vec![inner], vec![outer]).unwrap();
    let ns = partition.context_size();
    let ne = partition.env_size();
    let rows = ns * ne;

    let initial = if kind == ScenarioKind::FullyDecoupled {
        let ctx = distribution(rng, partition.context_vars());
        let env = distribution(rng, partition.outer_env().to_vec());
        ctx.product(&env).unwrap()
    } else {
        distribution(rng, partition.universe_vars())
    };

    let context_rows: Vec<Vec<f64>> = match kind {
        ScenarioKind::Arbitrary => (0..rows).map(|_| simplex(rng, ns, true)).collect(),
        ScenarioKind::DeterministicContext => {
            let f: Vec<usize> = (0..ns).map(|_| rng.gen_range(0..ns)).collect();
            (0..rows).map(|r| one_hot(ns, f[r / ne])).collect()
        }
        ScenarioKind::Decoupled | ScenarioKind::FullyDecoupled => {
            let by_state: Vec<Vec<f64>> = (0..ns).map(|_| simplex(rng, ns, true)).collect();
            (0..rows).map(|r| by_state[r / ne].clone()).collect()
        }
    };
    let env_rows: Vec<Vec<f64>> = if kind == ScenarioKind::FullyDecoupled {
        let by_env: Vec<Vec<f64>> = (0..ne).map(|_| simplex(rng, ne, true)).collect();
        (0..rows).map(|r| by_env[r % ne].clone()).collect()
    } else {
        (0..rows).map(|_| simplex(rng, ne, true)).collect()
    };

    let context = StochasticMatrix::from_rows(rows, ns, |r| context_rows[r].clone()).unwrap();
    let env = StochasticMatrix::from_rows(rows, ne, |r| env_rows[r].clone()).unwrap();
    MarkovScenario::new(format!("random-{kind:?}").to_lowercase(), partition, initial, context, env).unwrap()
}

fn one_hot(n: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[k] = 1.0;
    v
}

/// A total function table whose output depends on a random subset of the
/// inputs.
pub fn function_table<R: Rng + ?Sized>(
    rng: &mut R,
    arity: usize,
    cards: std::ops::RangeInclusive<usize>,
    output_card: usize,
) -> FunctionTable {
    let inputs = variables(rng, "x", arity, cards);
    let output = Variable::with_cardinality("y", output_card).unwrap();
    let relevant: Vec<bool> = (0..arity).map(|_| rng.gen_bool(0.5)).collect();
    let dims: Vec<usize> = inputs.iter().map(Variable::cardinality).collect();
    let reduced: Vec<usize> = dims
        .iter()
        .zip(&relevant)
        .map(|(&d, &r)| if r { d } else { 1 })
        .collect();
    let lookup: Vec<usize> = (0..reduced.iter().product::<usize>())
        .map(|_| rng.gen_range(0..output_card))
        .collect();
    FunctionTable::from_fn(inputs, output, |digits| {
        let mut idx = 0;
        for ((&d, &r), &k) in digits.iter().zip(&relevant).zip(&reduced) {
            idx = idx * k + if r { d } else { 0 };
        }
        lookup[idx]
    })
    .unwrap()
}
