//! Brute-force reference computations that share no code with the crate's
//! table machinery: every quantity is summed over explicit label tuples.

#![allow(dead_code)]

use std::collections::BTreeMap;

use closure_core::JointDistribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Marginal over the variables at `positions`, keyed by label tuples.
pub fn marginal(dist: &JointDistribution, positions: &[usize]) -> BTreeMap<Vec<String>, f64> {
    let mut out = BTreeMap::new();
    for (labels, p) in dist.iter() {
        let key: Vec<String> = positions.iter().map(|&i| labels[i].to_owned()).collect();
        *out.entry(key).or_insert(0.0) += p;
    }
    out
}

pub fn h(dist: &JointDistribution, positions: &[usize]) -> f64 {
    marginal(dist, positions)
        .values()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// I(X; Y) as the expectation of log p(x,y) / (p(x) p(y)).
pub fn mi(dist: &JointDistribution, x: &[usize], y: &[usize]) -> f64 {
    let xy: Vec<usize> = x.iter().chain(y).copied().collect();
    let px = marginal(dist, x);
    let py = marginal(dist, y);
    marginal(dist, &xy)
        .iter()
        .filter(|(_, &p)| p > 0.0)
        .map(|(k, &p)| {
            let (kx, ky) = k.split_at(x.len());
            p * (p / (px[kx] * py[ky])).log2()
        })
        .sum()
}

/// I(X; Y | Z) as the expectation of log p(x,y,z) p(z) / (p(x,z) p(y,z)).
pub fn cmi(dist: &JointDistribution, x: &[usize], y: &[usize], z: &[usize]) -> f64 {
    let xyz: Vec<usize> = x.iter().chain(y).chain(z).copied().collect();
    let xz: Vec<usize> = x.iter().chain(z).copied().collect();
    let yz: Vec<usize> = y.iter().chain(z).copied().collect();
    let (pxz, pyz, pz) = (marginal(dist, &xz), marginal(dist, &yz), marginal(dist, z));
    marginal(dist, &xyz)
        .iter()
        .filter(|(_, &p)| p > 0.0)
        .map(|(k, &p)| {
            let (kx, rest) = k.split_at(x.len());
            let (ky, kz) = rest.split_at(y.len());
            let key_xz: Vec<String> = kx.iter().chain(kz).cloned().collect();
            let key_yz: Vec<String> = ky.iter().chain(kz).cloned().collect();
            p * (p * pz[kz] / (pxz[&key_xz] * pyz[&key_yz])).log2()
        })
        .sum()
}
