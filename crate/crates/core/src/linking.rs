//! ℓ-linking of parametrizing classes.
//!
//! Two simple classes with the same endo-class are ℓ-linked exactly when the
//! orbits of their ℓ-regular parts agree. Chaining over the primes dividing
//! the group order links any two classes at a fixed level; across levels the
//! invariant is the semi-simple endo-class.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_traits::One;
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::characters::{self, orbit_of, CharExp, GaloisOrbit};
use crate::error::{Error, Result};
use crate::factor;
use crate::par::{self, Execution};

/// Opaque endo-class label together with its degree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ThetaId {
    pub label: String,
    pub degree: u64,
}

impl ThetaId {
    pub fn new(label: impl Into<String>, degree: u64) -> Self {
        ThetaId {
            label: label.into(),
            degree,
        }
    }
}

/// Simple inertial class: an endo-class and a parametrizing orbit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimpleParam {
    pub theta: ThetaId,
    pub orbit: GaloisOrbit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkStep {
    #[serde(with = "crate::serde_big")]
    pub ell: BigUint,
    /// The ℓ-power-order factor applied at this step.
    pub xi: CharExp,
    pub before: GaloisOrbit,
    pub after: GaloisOrbit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkChain {
    pub from: CharExp,
    pub to: CharExp,
    pub steps: Vec<LinkStep>,
}

impl LinkChain {
    /// Re-checks every step: ℓ-linked endpoints, consecutive steps sharing
    /// endpoints, and the chain running from `[from]` to `[to]`.
    pub fn verify(&self) -> Result<bool> {
        let mut current = orbit_of(&self.from);
        for step in &self.steps {
            if step.before != current || !ell_linked(&step.before, &step.after, &step.ell)? {
                return Ok(false);
            }
            let order = step.xi.order();
            if characters::split_off_prime(&order, &step.ell).1 != BigUint::one() {
                return Ok(false);
            }
            current = step.after.clone();
        }
        Ok(current == orbit_of(&self.to))
    }

    pub fn primes(&self) -> Vec<BigUint> {
        self.steps.iter().map(|s| s.ell.clone()).collect()
    }
}

/// Primes dividing `(q^n − 1)(q^{n−1} − 1)···(q − 1)`, ascending.
pub fn admissible_primes(q: u64, n: u64) -> Result<Vec<BigUint>> {
    if q < 2 || n < 1 {
        return Err(Error::OutOfRange(format!(
            "need q ≥ 2 and n ≥ 1, got q={q}, n={n}"
        )));
    }
    let base = BigUint::from(q);
    let mut primes = std::collections::BTreeSet::new();
    for i in 1..=n {
        let value = factor::pow_minus_one(&base, i);
        primes.extend(factor::prime_divisors(&value)?);
    }
    Ok(primes.into_iter().collect())
}

fn regular_orbit(orbit: &GaloisOrbit, ell: &BigUint) -> Result<GaloisOrbit> {
    Ok(orbit_of(&characters::ell_regular_part(
        &orbit.rep_char(),
        ell,
    )?))
}

pub fn ell_linked(o1: &GaloisOrbit, o2: &GaloisOrbit, ell: &BigUint) -> Result<bool> {
    if o1.level() != o2.level() {
        return Err(Error::LevelMismatch(
            "orbits live at different levels".into(),
        ));
    }
    Ok(regular_orbit(o1, ell)? == regular_orbit(o2, ell)?)
}

/// Splits `ξ = α'α^{-1}` into prime-power-order factors over the primes of
/// `M` (ascending) and multiplies them onto `α` one at a time. Trivial
/// factors are skipped.
pub fn build_link_chain(alpha: &CharExp, alpha_prime: &CharExp) -> Result<LinkChain> {
    let xi = alpha_prime.div(alpha)?;
    let mut steps = Vec::new();
    let mut current = alpha.clone();
    for ell in factor::prime_divisors(alpha.modulus())? {
        let xi_ell = characters::ell_primary_part(&xi, &ell)?;
        if xi_ell.is_trivial() {
            continue;
        }
        let next = current.mul(&xi_ell)?;
        steps.push(LinkStep {
            ell,
            xi: xi_ell,
            before: orbit_of(&current),
            after: orbit_of(&next),
        });
        current = next;
    }
    debug_assert_eq!(&current, alpha_prime);
    Ok(LinkChain {
        from: alpha.clone(),
        to: alpha_prime.clone(),
        steps,
    })
}

/// Blocks of the transitive closure of ℓ-linking over all primes dividing
/// `M`. Blocks are ordered by smallest representative, orbits inside a block
/// by representative.
pub fn linked_partition(
    level: &crate::tower::FieldLevel,
    exec: Execution,
) -> Result<Vec<Vec<GaloisOrbit>>> {
    let orbits = characters::enumerate_orbits(level)?;
    let mut uf = UnionFind::<usize>::new(orbits.len());
    for ell in factor::prime_divisors(level.order())? {
        let keys = par::try_map(&orbits, exec, |o| {
            regular_orbit(o, &ell).map(|r| r.rep().clone())
        })?;
        let mut first: HashMap<&BigUint, usize> = HashMap::new();
        for (i, key) in keys.iter().enumerate() {
            let j = *first.entry(key).or_insert(i);
            uf.union(i, j);
        }
    }
    let mut blocks: BTreeMap<usize, Vec<GaloisOrbit>> = BTreeMap::new();
    let mut root_to_block: HashMap<usize, usize> = HashMap::new();
    for (i, orbit) in orbits.iter().enumerate() {
        // Orbits come sorted by rep, so the first index seen is the block's minimum.
        let root = uf.find_mut(i);
        let block = *root_to_block.entry(root).or_insert(i);
        blocks.entry(block).or_default().push(orbit.clone());
    }
    Ok(blocks.into_values().collect())
}

/// Formal sum of endo-classes with positive multiplicities.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemiSimpleEndoClass {
    pub terms: BTreeMap<ThetaId, u64>,
}

impl SemiSimpleEndoClass {
    pub fn multiplicity(&self, theta: &ThetaId) -> u64 {
        self.terms.get(theta).copied().unwrap_or(0)
    }
}

/// One cuspidal-support component: endo-class `theta` on `GL_{m}(D)`, `D`
/// of reduced degree `d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndoComponent {
    pub theta: ThetaId,
    pub m: u64,
    pub d: u64,
}

/// `Σ (m_i·d / g_i) · Θ_i`, like terms merged.
pub fn semisimple_endoclass(components: &[EndoComponent]) -> Result<SemiSimpleEndoClass> {
    let mut out = SemiSimpleEndoClass::default();
    for c in components {
        let g = c.theta.degree;
        let md = c.m * c.d;
        if g == 0 || md % g != 0 {
            return Err(Error::DegreeMismatch(format!(
                "degree {g} of {} does not divide m·d = {md}",
                c.theta.label
            )));
        }
        if let Some((other, _)) = out
            .terms
            .iter()
            .find(|(t, _)| t.label == c.theta.label && t.degree != g)
        {
            return Err(Error::DegreeMismatch(format!(
                "{} used with degrees {} and {g}",
                c.theta.label, other.degree
            )));
        }
        *out.terms.entry(c.theta.clone()).or_insert(0) += md / g;
    }
    Ok(out)
}

pub fn linked_semisimple(a: &SemiSimpleEndoClass, b: &SemiSimpleEndoClass) -> bool {
    a == b
}
