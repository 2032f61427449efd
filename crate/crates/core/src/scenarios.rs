//! Reference scenarios shipped with the toolkit.

use crate::model::{FactoredContext, MarkovScenario, StochasticMatrix, SystemPartition};
use crate::prob::{JointDistribution, Variable};

pub const BUNDLED: [&str; 3] = ["copy", "decoupled", "driven"];

pub fn bundled(name: &str) -> Option<MarkovScenario> {
    match name {
        "copy" => Some(copy()),
        "decoupled" => Some(decoupled()),
        "driven" => Some(driven()),
        _ => None,
    }
}

fn binary_partition() -> SystemPartition {
    SystemPartition::new(
        vec![Variable::binary("s")],
        vec![Variable::binary("i")],
        vec![Variable::binary("e")],
    )
    .expect("static partition")
}

// Rows of the binary (s, i, e) scenarios are indexed s*4 + i*2 + e.
fn bits(r: usize) -> (usize, usize, usize) {
    (r >> 2, (r >> 1) & 1, r & 1)
}

fn flip(keep: usize, p_flip: f64) -> Vec<f64> {
    let mut v = vec![p_flip; 2];
    v[keep] = 1.0 - p_flip;
    v
}

/// Context dynamics ignore the outer environment and the environment
/// ignores the context; the initial distribution is a product.
///
/// `s' = s xor i`, `i'` keeps `i` with probability 0.8, `e'` keeps `e` with
/// probability 0.7. Authored in factored form.
pub fn decoupled() -> MarkovScenario {
    let partition = binary_partition();
    let s = JointDistribution::new(vec![Variable::binary("s")], vec![0.7, 0.3]).unwrap();
    let i = JointDistribution::new(vec![Variable::binary("i")], vec![0.6, 0.4]).unwrap();
    let e = JointDistribution::new(vec![Variable::binary("e")], vec![0.5, 0.5]).unwrap();
    let initial = s.product(&i).unwrap().product(&e).unwrap();
    let soi = StochasticMatrix::deterministic(8, 2, |r| {
        let (s, i, _) = bits(r);
        s ^ i
    })
    .unwrap();
    let inner = StochasticMatrix::from_rows(8, 2, |r| flip(bits(r).1, 0.2)).unwrap();
    let env = StochasticMatrix::from_rows(8, 2, |r| flip(bits(r).2, 0.3)).unwrap();
    MarkovScenario::factored(
        "decoupled",
        partition,
        initial,
        FactoredContext::new(soi, inner).unwrap(),
        env,
    )
    .unwrap()
}

/// A binary context state `s` (the inner environment is a single constant
/// symbol) and a binary outer environment `e`: `s' = s xor e`, `e' = s`.
/// Starts from `s` uniform and `e = 0`, so at step 1 the environment is an
/// exact copy of a uniform context state.
pub fn copy() -> MarkovScenario {
    let partition = SystemPartition::new(
        vec![Variable::binary("s")],
        vec![Variable::new("i", ["0"]).unwrap()],
        vec![Variable::binary("e")],
    )
    .unwrap();
    let initial = JointDistribution::from_entries(
        partition.universe_vars(),
        [(["0", "0", "0"], 0.5), (["1", "0", "0"], 0.5)],
    )
    .unwrap();
    // rows: s*2 + e
    let context = StochasticMatrix::deterministic(4, 2, |r| (r >> 1) ^ (r & 1)).unwrap();
    let env = StochasticMatrix::deterministic(4, 2, |r| r >> 1).unwrap();
    MarkovScenario::new("copy", partition, initial, context, env).unwrap()
}

/// The environment is fresh uniform noise each step and the context copies
/// it: `s' = e`, `i' = s`. Informationally open.
pub fn driven() -> MarkovScenario {
    let partition = binary_partition();
    let initial = JointDistribution::uniform(partition.universe_vars()).unwrap();
    let context = StochasticMatrix::deterministic(8, 4, |r| {
        let (s, _, e) = bits(r);
        e * 2 + s
    })
    .unwrap();
    let env = StochasticMatrix::from_rows(8, 2, |_| vec![0.5, 0.5]).unwrap();
    MarkovScenario::new("driven", partition, initial, context, env).unwrap()
}
