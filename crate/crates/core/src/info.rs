//! Exact Shannon measures in bits over a [`JointDistribution`].
//!
//! Every measure is evaluated from its definitional sum over the marginal
//! table of the variables involved, with the convention `0 log 0 = 0`.
//! The entropy-combination forms are only used by [`verify_identities`].

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::JointDistribution;

/// Negative values down to this magnitude are numerical noise and are
/// reported as zero.
pub const CLAMP_GUARD: f64 = 1e-9;

/// An information quantity in bits (log base 2).
#[derive(Copy, Clone, Debug, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bits(pub f64);

impl Bits {
    pub const ZERO: Bits = Bits(0.0);

    pub fn value(self) -> f64 {
        self.0
    }

    /// Value for reporting: tiny negative residue becomes `0.0`, anything
    /// else (including genuinely negative values) is left untouched.
    pub fn clamped(self) -> Bits {
        if self.0 <= 0.0 && self.0 >= -CLAMP_GUARD {
            Bits(0.0)
        } else {
            self
        }
    }

    pub fn abs(self) -> Bits {
        Bits(self.0.abs())
    }
}

impl Add for Bits {
    type Output = Bits;
    fn add(self, rhs: Bits) -> Bits {
        Bits(self.0 + rhs.0)
    }
}

impl Sub for Bits {
    type Output = Bits;
    fn sub(self, rhs: Bits) -> Bits {
        Bits(self.0 - rhs.0)
    }
}

impl Neg for Bits {
    type Output = Bits;
    fn neg(self) -> Bits {
        Bits(-self.0)
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}", self.0)
    }
}

/// A non-empty ordered block of variable names treated as one composite variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VariableGroup(Vec<String>);

impl VariableGroup {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::Argument("variable group must not be empty".into()));
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::Argument(format!("'{n}' appears twice in a group")));
            }
        }
        Ok(Self(names))
    }

    pub fn single(name: impl Into<String>) -> Self {
        Self(vec![name.into()])
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    /// Concatenation of two disjoint groups.
    pub fn union(&self, other: &VariableGroup) -> Result<VariableGroup> {
        ensure_disjoint(&[self, other])?;
        Ok(Self(self.0.iter().chain(&other.0).cloned().collect()))
    }

    fn resolve(&self, dist: &JointDistribution) -> Result<Vec<usize>> {
        dist.positions(&self.0)
    }
}

impl From<&str> for VariableGroup {
    fn from(name: &str) -> Self {
        Self::single(name)
    }
}

fn ensure_disjoint(groups: &[&VariableGroup]) -> Result<()> {
    for (i, a) in groups.iter().enumerate() {
        for b in &groups[i + 1..] {
            if let Some(shared) = a.0.iter().find(|n| b.0.contains(n)) {
                return Err(Error::Argument(format!(
                    "variable '{shared}' appears in more than one group"
                )));
            }
        }
    }
    Ok(())
}

/// Marginal table over `x ++ y ++ z` with each block flattened to one axis.
struct Cube {
    dy: usize,
    dz: usize,
    mass: Vec<f64>,
}

impl Cube {
    fn new(dist: &JointDistribution, x: &[usize], y: &[usize], z: &[usize]) -> Self {
        let block = |idx: &[usize]| idx.iter().map(|&i| dist.dims()[i]).product::<usize>();
        let positions: Vec<usize> = x.iter().chain(y).chain(z).copied().collect();
        Self {
            dy: block(y),
            dz: block(z),
            mass: dist.marginal_table(&positions),
        }
    }

    fn dx(&self) -> usize {
        self.mass.len() / (self.dy * self.dz)
    }

    fn at(&self, x: usize, y: usize, z: usize) -> f64 {
        self.mass[(x * self.dy + y) * self.dz + z]
    }
}

pub(crate) mod raw {
    //! Definitional measures over variable positions. Empty position lists
    //! stand for a constant variable.

    use super::Cube;
    use crate::prob::JointDistribution;

    pub(crate) fn entropy(dist: &JointDistribution, x: &[usize]) -> f64 {
        -dist
            .marginal_table(x)
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.log2())
            .sum::<f64>()
    }

    /// H(Y | X) = -Σ p(x,y) log p(y|x).
    pub(crate) fn conditional_entropy(dist: &JointDistribution, y: &[usize], x: &[usize]) -> f64 {
        let cube = Cube::new(dist, x, y, &[]);
        let mut h = 0.0;
        for xi in 0..cube.dx() {
            let px: f64 = (0..cube.dy).map(|yi| cube.at(xi, yi, 0)).sum();
            for yi in 0..cube.dy {
                let pxy = cube.at(xi, yi, 0);
                if pxy > 0.0 {
                    h -= pxy * (pxy / px).log2();
                }
            }
        }
        h
    }

    pub(crate) fn mutual_information(dist: &JointDistribution, x: &[usize], y: &[usize]) -> f64 {
        conditional_mutual_information(dist, x, y, &[])
    }

    /// I(X;Y|Z) = Σ p(x,y,z) log [p(x,y,z) p(z) / (p(x,z) p(y,z))].
    pub(crate) fn conditional_mutual_information(
        dist: &JointDistribution,
        x: &[usize],
        y: &[usize],
        z: &[usize],
    ) -> f64 {
        let cube = Cube::new(dist, x, y, z);
        let (dx, dy, dz) = (cube.dx(), cube.dy, cube.dz);
        let mut pxz = vec![0.0; dx * dz];
        let mut pyz = vec![0.0; dy * dz];
        let mut pz = vec![0.0; dz];
        for xi in 0..dx {
            for yi in 0..dy {
                for zi in 0..dz {
                    let p = cube.at(xi, yi, zi);
                    pxz[xi * dz + zi] += p;
                    pyz[yi * dz + zi] += p;
                    pz[zi] += p;
                }
            }
        }
        let mut total = 0.0;
        for xi in 0..dx {
            for yi in 0..dy {
                for zi in 0..dz {
                    let p = cube.at(xi, yi, zi);
                    if p > 0.0 {
                        total += p * (p * pz[zi] / (pxz[xi * dz + zi] * pyz[yi * dz + zi])).log2();
                    }
                }
            }
        }
        total
    }
}

/// H(X).
pub fn entropy(dist: &JointDistribution, x: &VariableGroup) -> Result<Bits> {
    Ok(Bits(raw::entropy(dist, &x.resolve(dist)?)))
}

/// H(X, Y) for disjoint groups.
pub fn joint_entropy(dist: &JointDistribution, x: &VariableGroup, y: &VariableGroup) -> Result<Bits> {
    let xy = x.union(y)?;
    entropy(dist, &xy)
}

/// H(Y | X).
pub fn conditional_entropy(
    dist: &JointDistribution,
    y: &VariableGroup,
    given_x: &VariableGroup,
) -> Result<Bits> {
    ensure_disjoint(&[y, given_x])?;
    Ok(Bits(raw::conditional_entropy(
        dist,
        &y.resolve(dist)?,
        &given_x.resolve(dist)?,
    )))
}

/// I(X; Y).
pub fn mutual_information(
    dist: &JointDistribution,
    x: &VariableGroup,
    y: &VariableGroup,
) -> Result<Bits> {
    ensure_disjoint(&[x, y])?;
    Ok(Bits(raw::mutual_information(
        dist,
        &x.resolve(dist)?,
        &y.resolve(dist)?,
    )))
}

/// I(X; Y | Z).
pub fn conditional_mutual_information(
    dist: &JointDistribution,
    x: &VariableGroup,
    y: &VariableGroup,
    z: &VariableGroup,
) -> Result<Bits> {
    ensure_disjoint(&[x, y, z])?;
    Ok(Bits(raw::conditional_mutual_information(
        dist,
        &x.resolve(dist)?,
        &y.resolve(dist)?,
        &z.resolve(dist)?,
    )))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    pub name: String,
    pub residual: Bits,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub tolerance: Bits,
    pub residuals: Vec<IdentityResidual>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.residuals.iter().all(|r| r.pass)
    }

    pub fn max_residual(&self) -> Bits {
        self.residuals
            .iter()
            .map(|r| r.residual)
            .fold(Bits::ZERO, |a, b| if b.0 > a.0 { b } else { a })
    }

    pub fn get(&self, name: &str) -> Option<&IdentityResidual> {
        self.residuals.iter().find(|r| r.name == name)
    }
}

pub mod identity {
    pub const COND_ENTROPY_Y_GIVEN_X: &str = "conditional_entropy_y_given_x";
    pub const COND_ENTROPY_X_GIVEN_Y: &str = "conditional_entropy_x_given_y";
    pub const CONDITIONAL_ENTROPY_SWAP: &str = "conditional_entropy_swap";
    pub const JOINT_ENTROPY_SYMMETRY: &str = "joint_entropy_symmetry";
    pub const MI_ENTROPY_FORM: &str = "mutual_information_entropy_form";
    pub const MI_CONDITIONAL_FORM: &str = "mutual_information_conditional_form";
    pub const CMI_ENTROPY_FORM: &str = "conditional_mutual_information_entropy_form";
    pub const CMI_CONDITIONAL_FORM: &str = "conditional_mutual_information_conditional_form";
    pub const CHAIN_RULE: &str = "mutual_information_chain_rule";
}

/// Check the entropy/information identities for groups `x`, `y` and
/// optionally `z`, reporting `|lhs - rhs|` for each one.
pub fn verify_identities(
    dist: &JointDistribution,
    x: &VariableGroup,
    y: &VariableGroup,
    z: Option<&VariableGroup>,
    tolerance: Bits,
) -> Result<IdentityReport> {
    match z {
        Some(z) => ensure_disjoint(&[x, y, z])?,
        None => ensure_disjoint(&[x, y])?,
    }
    let h_x = entropy(dist, x)?;
    let h_y = entropy(dist, y)?;
    let h_xy = joint_entropy(dist, x, y)?;
    let h_yx = joint_entropy(dist, y, x)?;
    let h_y_given_x = conditional_entropy(dist, y, x)?;
    let h_x_given_y = conditional_entropy(dist, x, y)?;
    let i_xy = mutual_information(dist, x, y)?;

    let mut pairs = vec![
        (identity::COND_ENTROPY_Y_GIVEN_X, h_y_given_x, h_yx - h_x),
        (identity::COND_ENTROPY_X_GIVEN_Y, h_x_given_y, h_yx - h_y),
        (
            identity::CONDITIONAL_ENTROPY_SWAP,
            h_y_given_x,
            h_x_given_y + h_y - h_x,
        ),
        (identity::JOINT_ENTROPY_SYMMETRY, h_xy, h_yx),
        (identity::MI_ENTROPY_FORM, i_xy, h_x + h_y - h_xy),
        (identity::MI_CONDITIONAL_FORM, i_xy, h_x - h_x_given_y),
    ];

    if let Some(z) = z {
        let xz = x.union(z)?;
        let yz = y.union(z)?;
        let xyz = x.union(&yz)?;
        let i_xy_z = conditional_mutual_information(dist, x, y, z)?;
        pairs.push((
            identity::CMI_ENTROPY_FORM,
            i_xy_z,
            entropy(dist, &xz)? + entropy(dist, &yz)? - entropy(dist, &xyz)? - entropy(dist, z)?,
        ));
        pairs.push((
            identity::CMI_CONDITIONAL_FORM,
            i_xy_z,
            conditional_entropy(dist, x, z)? - conditional_entropy(dist, x, &yz)?,
        ));
        pairs.push((
            identity::CHAIN_RULE,
            mutual_information(dist, x, &yz)?,
            mutual_information(dist, x, z)? + i_xy_z,
        ));
    }

    let residuals = pairs
        .into_iter()
        .map(|(name, lhs, rhs)| {
            let residual = (lhs - rhs).abs();
            IdentityResidual {
                name: name.to_owned(),
                residual,
                pass: residual.0 < tolerance.0,
            }
        })
        .collect();
    Ok(IdentityReport {
        tolerance,
        residuals,
    })
}
