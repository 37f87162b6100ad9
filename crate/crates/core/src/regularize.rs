//! Zsigmondy primes, the regularizing lift to a blown-up level, and the
//! descent rule that recovers the transfer of an arbitrary class from the
//! transfer of a regular one.
//!
//! Given `α` of parametric degree `f` at level `n'`, pick an odd `a ≥ 7`
//! (so `a·n' > 6f`), set `b = Q^f`, `r = a·n'/f`, and let `ℓ` be the smallest
//! primitive prime divisor of `b^r − 1`. Twisting `α* = α ∘ N` by a
//! character `ξ` of order `ℓ` yields `β = ξα*`, regular over `e` at level
//! `a·n'` and congruent to `α*` mod `ℓ`.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::characters::{self, orbit_of, CharExp, GaloisOrbit};
use crate::error::{Error, Result};
use crate::factor::{self, pow_minus_one};
use crate::tower::TowerParams;

/// Self-contained evidence for the answer of [`zsigmondy_prime`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZsigmondyCertificate {
    #[serde(with = "crate::serde_big")]
    pub b: BigUint,
    pub r: u64,
    #[serde(with = "crate::serde_big::option")]
    pub ell: Option<BigUint>,
    /// Complete factorization of `b^r − 1`.
    #[serde(with = "crate::serde_big::factors")]
    pub factorization: Vec<(BigUint, u32)>,
    /// `b^i − 1 mod ℓ` for `1 ≤ i < r` (empty when `ell` is absent).
    #[serde(with = "crate::serde_big::vec")]
    pub residues: Vec<BigUint>,
}

impl ZsigmondyCertificate {
    /// Re-derives everything the certificate claims from its own data.
    pub fn verify(&self) -> bool {
        if self.b < BigUint::from(2u32) || self.r < 2 {
            return false;
        }
        let target = pow_minus_one(&self.b, self.r);
        let product = self
            .factorization
            .iter()
            .fold(BigUint::one(), |acc, (p, e)| {
                acc * num_traits::pow(p.clone(), *e as usize)
            });
        if product != target || !self.factorization.iter().all(|(p, _)| factor::is_prime(p)) {
            return false;
        }
        let primitive = |p: &BigUint| factor::order_mod_upto(&self.b, p, self.r) == Some(self.r);
        match &self.ell {
            None => {
                self.residues.is_empty() && !self.factorization.iter().any(|(p, _)| primitive(p))
            }
            Some(ell) => {
                if !self.factorization.iter().any(|(p, _)| p == ell) {
                    return false;
                }
                if (target % ell) != BigUint::zero() || self.residues.len() as u64 != self.r - 1 {
                    return false;
                }
                let mut power = BigUint::one();
                for residue in &self.residues {
                    power = (power * &self.b) % ell;
                    let expected = (&power + ell - BigUint::one()) % ell;
                    if expected != *residue || residue.is_zero() {
                        return false;
                    }
                }
                // Nothing smaller is primitive.
                self.factorization
                    .iter()
                    .take_while(|(p, _)| p < ell)
                    .all(|(p, _)| !primitive(p))
            }
        }
    }
}

/// Builds the certificate for `(b, r)`, whether or not a primitive prime
/// exists.
pub fn zsigmondy_certificate(b: &BigUint, r: u64) -> Result<ZsigmondyCertificate> {
    if *b < BigUint::from(2u32) || r < 2 {
        return Err(Error::OutOfRange(format!(
            "Zsigmondy needs b, r ≥ 2 (b={b}, r={r})"
        )));
    }
    let mut merged: std::collections::BTreeMap<BigUint, u32> = Default::default();
    let mut top = Vec::new();
    for k in factor::divisors(r) {
        let part = factor::factorize(&factor::cyclotomic_value(k, b))?;
        if k == r {
            top = part.iter().map(|(p, _)| p.clone()).collect();
        }
        for (p, e) in part {
            *merged.entry(p).or_insert(0) += e;
        }
    }
    // Primitive primes divide Φ_r(b); only the largest prime of r can divide
    // it without being primitive, so the order test settles it.
    let ell = top
        .into_iter()
        .find(|p| factor::order_mod_upto(b, p, r) == Some(r));
    let residues = match &ell {
        None => Vec::new(),
        Some(ell) => {
            let mut power = BigUint::one();
            (1..r)
                .map(|_| {
                    power = (&power * b) % ell;
                    (&power + ell - BigUint::one()) % ell
                })
                .collect()
        }
    };
    Ok(ZsigmondyCertificate {
        b: b.clone(),
        r,
        ell,
        factorization: merged.into_iter().collect(),
        residues,
    })
}

/// Smallest prime dividing `b^r − 1` but no `b^i − 1` with `i < r`.
pub fn zsigmondy_prime(b: &BigUint, r: u64) -> Result<Option<(BigUint, ZsigmondyCertificate)>> {
    let cert = zsigmondy_certificate(b, r)?;
    Ok(cert.ell.clone().map(|ell| (ell, cert)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularizationLift {
    pub alpha: CharExp,
    /// Parametric degree of `alpha`.
    pub f: u64,
    /// Blow-up factor.
    pub a: u64,
    #[serde(with = "crate::serde_big")]
    pub ell: BigUint,
    /// `α ∘ N_{k*/k}`.
    pub alpha_star: CharExp,
    /// Character of order `ℓ` at the blown-up level.
    pub xi: CharExp,
    /// `ξ·α*`.
    pub beta: CharExp,
    pub certificate: ZsigmondyCertificate,
}

impl RegularizationLift {
    /// Checks every invariant of the lift against `p`.
    pub fn verify(&self, p: u64) -> Result<()> {
        let fail = |msg: String| Err(Error::OrderViolation(msg));
        let n_prime = self.alpha.level().deg();
        let top = self.a * n_prime;
        if top <= 6 * self.f {
            return fail(format!(
                "a·n' = {top} is not larger than 6f = {}",
                6 * self.f
            ));
        }
        if self.beta.level().deg() != top || characters::parametric_degree(&self.beta) != top {
            return fail("β is not regular over e at the blown-up level".into());
        }
        if characters::norm_inflate(&self.alpha, self.a)? != self.alpha_star {
            return fail("α* is not the norm inflation of α".into());
        }
        if self.xi.order() != self.ell {
            return fail("ξ does not have order ℓ".into());
        }
        if self.xi.mul(&self.alpha_star)? != self.beta {
            return fail("β ≠ ξ·α*".into());
        }
        let beta_reg = characters::ell_regular_part(&self.beta, &self.ell)?;
        let alpha_reg = characters::ell_regular_part(&self.alpha_star, &self.ell)?;
        if orbit_of(&beta_reg) != orbit_of(&alpha_reg) {
            return fail("β is not congruent to α* mod ℓ".into());
        }
        let q_f = pow_minus_one(
            &BigUint::from(self.alpha.level().base_cardinality()),
            self.f,
        );
        if (&q_f % &self.ell).is_zero() {
            return fail(format!("ℓ = {} divides Q^f − 1", self.ell));
        }
        if self.ell == BigUint::from(p) {
            return fail("ℓ = p".into());
        }
        if self.ell == BigUint::from(2u32) {
            return fail("ℓ = 2".into());
        }
        if !self.certificate.verify() || self.certificate.ell.as_ref() != Some(&self.ell) {
            return fail("Zsigmondy certificate does not verify".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegularizeOptions {
    /// Use this blow-up factor instead of the default; must be odd, at
    /// least 7, with `a·n' > 6f`. No retries are made.
    pub a_override: Option<u64>,
    /// Largest factor tried when stepping `a` by 2 past exceptions.
    pub max_a: u64,
}

impl Default for RegularizeOptions {
    fn default() -> Self {
        RegularizeOptions {
            a_override: None,
            max_a: 99,
        }
    }
}

/// Smallest odd `a ≥ 7` with `a·n' > 6f`.
pub fn default_blow_up(n_prime: u64, f: u64) -> u64 {
    let mut a = 7;
    while a * n_prime <= 6 * f {
        a += 2;
    }
    a
}

fn check_override(a: u64, n_prime: u64, f: u64) -> Result<()> {
    let reason = if a.is_multiple_of(2) {
        Some("must be odd".to_string())
    } else if a < 7 {
        Some("must be at least 7".to_string())
    } else if a * n_prime <= 6 * f {
        Some(format!("a·n' = {} must exceed 6f = {}", a * n_prime, 6 * f))
    } else {
        None
    };
    match reason {
        Some(reason) => Err(Error::InvalidBlowUp { a, reason }),
        None => Ok(()),
    }
}

pub fn regularize(
    alpha: &CharExp,
    params: &TowerParams,
    opts: RegularizeOptions,
) -> Result<RegularizationLift> {
    let level = alpha.level();
    if level.base_cardinality() != params.big_q || level.deg() != params.n_prime {
        return Err(Error::LevelMismatch(format!(
            "α lives at (Q={}, deg={}), expected (Q={}, deg={})",
            level.base_cardinality(),
            level.deg(),
            params.big_q,
            params.n_prime
        )));
    }
    let n_prime = params.n_prime;
    let f = characters::parametric_degree(alpha);
    let b = num_traits::pow(BigUint::from(params.big_q), f as usize);

    let (a, ell, certificate) = match opts.a_override {
        Some(a) => {
            check_override(a, n_prime, f)?;
            let r = a * n_prime / f;
            match zsigmondy_prime(&b, r)? {
                Some((ell, cert)) => (a, ell, cert),
                None => return Err(Error::ZsigmondyException { b, r }),
            }
        }
        None => {
            let mut a = default_blow_up(n_prime, f);
            loop {
                let r = a * n_prime / f;
                if let Some((ell, cert)) = zsigmondy_prime(&b, r)? {
                    break (a, ell, cert);
                }
                if a + 2 > opts.max_a {
                    return Err(Error::ZsigmondyException { b, r });
                }
                a += 2;
            }
        }
    };

    let alpha_star = characters::norm_inflate(alpha, a)?;
    let top = alpha_star.level().clone();
    let xi = CharExp::new(top.clone(), top.order() / &ell);
    let beta = xi.mul(&alpha_star)?;
    let lift = RegularizationLift {
        alpha: alpha.clone(),
        f,
        a,
        ell,
        alpha_star,
        xi,
        beta,
        certificate,
    };
    lift.verify(params.p)?;
    Ok(lift)
}

/// Result of [`descend_transfer_detailed`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Descent {
    /// Twist at the blown-up level, for the first conjugate that works.
    pub mu: CharExp,
    pub mu_regular: CharExp,
    /// `ν` with `ν* = μ_ℓ`.
    pub nu: CharExp,
    pub orbit: GaloisOrbit,
}

/// Given the transfer `[βμ]` of the regular lift, returns the transfer
/// `[αν]` of `α`, where `ν* = μ_ℓ`.
pub fn descend_transfer(
    alpha: &CharExp,
    lift: &RegularizationLift,
    beta_image: &GaloisOrbit,
) -> Result<GaloisOrbit> {
    descend_transfer_detailed(alpha, lift, beta_image).map(|d| d.orbit)
}

pub fn descend_transfer_detailed(
    alpha: &CharExp,
    lift: &RegularizationLift,
    beta_image: &GaloisOrbit,
) -> Result<Descent> {
    if &lift.alpha != alpha {
        return Err(Error::OutOfRange(format!(
            "lift was built for {}, not {alpha}",
            lift.alpha
        )));
    }
    if beta_image.level() != lift.beta.level() {
        return Err(Error::LevelMismatch(
            "image orbit is not at the blown-up level".into(),
        ));
    }
    let mut found: Option<Descent> = None;
    for candidate in beta_image.chars() {
        let mu = candidate.div(&lift.beta)?;
        let mu_regular = characters::ell_regular_part(&mu, &lift.ell)?;
        let Some(nu) = characters::is_norm_inflated(&mu_regular, alpha.level())? else {
            continue;
        };
        let orbit = orbit_of(&alpha.mul(&nu)?);
        match &found {
            None => {
                found = Some(Descent {
                    mu,
                    mu_regular,
                    nu,
                    orbit,
                })
            }
            Some(first) if first.orbit != orbit => {
                return Err(Error::AmbiguousTwist(format!(
                    "conjugates descend to [{}] and [{}]",
                    first.orbit.rep(),
                    orbit.rep()
                )))
            }
            Some(_) => {}
        }
    }
    found.ok_or_else(|| {
        Error::NotNormInflated(format!(
            "no conjugate of [{}] gives an ℓ-regular twist inflated from level {}",
            beta_image.rep(),
            alpha.level().deg()
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::FieldLevel;

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn exceptions() {
        assert!(zsigmondy_prime(&big(2), 6).unwrap().is_none());
        assert!(zsigmondy_prime(&big(3), 2).unwrap().is_none());
        assert!(zsigmondy_prime(&big(7), 2).unwrap().is_none());
        let cert = zsigmondy_certificate(&big(2), 6).unwrap();
        assert!(cert.verify());
        assert!(matches!(
            zsigmondy_prime(&big(1), 3),
            Err(Error::OutOfRange(_))
        ));
        assert!(matches!(
            zsigmondy_prime(&big(2), 1),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn two_to_the_fourteen() {
        let (ell, cert) = zsigmondy_prime(&big(2), 14).unwrap().unwrap();
        assert_eq!(ell, big(43));
        assert_eq!(
            cert.factorization,
            vec![(big(3), 1), (big(43), 1), (big(127), 1)]
        );
        assert_eq!(cert.residues.len(), 13);
        assert!(cert.verify());
    }

    #[test]
    fn three_to_the_fourteen() {
        let (ell, cert) = zsigmondy_prime(&big(3), 14).unwrap().unwrap();
        assert_eq!(ell, big(547));
        assert!(cert.verify());
    }

    #[test]
    fn tampered_certificate_is_rejected() {
        let (_, mut cert) = zsigmondy_prime(&big(2), 14).unwrap().unwrap();
        cert.ell = Some(big(127));
        assert!(!cert.verify());
        let (_, mut cert) = zsigmondy_prime(&big(2), 14).unwrap().unwrap();
        cert.factorization[0].1 = 2;
        assert!(!cert.verify());
        let mut cert = zsigmondy_certificate(&big(2), 6).unwrap();
        cert.r = 5;
        assert!(!cert.verify());
    }

    fn shape(p: u64, q: u64, e: u64, f: u64, m: u64, d: u64) -> TowerParams {
        TowerParams::new(p, q, e, f, m, d).unwrap()
    }

    #[test]
    fn lift_of_trivial_character_q2() {
        // Q = 2, n' = 2
        let params = shape(2, 2, 1, 1, 1, 2);
        let alpha = CharExp::trivial(params.top_level().unwrap());
        let lift = regularize(&alpha, &params, RegularizeOptions::default()).unwrap();
        assert_eq!((lift.a, lift.f, lift.certificate.r), (7, 1, 14));
        assert_eq!(lift.ell, big(43));
        assert_eq!(lift.beta.exponent(), &big(381));
        assert_eq!(lift.beta.order(), big(43));
        assert!(characters::is_e_regular(&lift.beta));
    }

    #[test]
    fn lift_of_trivial_character_q3() {
        let params = shape(3, 3, 2, 1, 1, 4);
        let alpha = CharExp::trivial(params.top_level().unwrap());
        let lift = regularize(&alpha, &params, RegularizeOptions::default()).unwrap();
        assert_eq!((lift.a, lift.certificate.r), (7, 14));
        assert_eq!(lift.ell, big(547));
    }

    #[test]
    fn overrides_are_validated() {
        // Q = 7, n' = 2
        let params = shape(7, 7, 1, 1, 1, 2);
        let alpha = CharExp::trivial(params.top_level().unwrap());
        for a in [1, 3, 5, 8] {
            let opts = RegularizeOptions {
                a_override: Some(a),
                ..Default::default()
            };
            assert!(matches!(
                regularize(&alpha, &params, opts),
                Err(Error::InvalidBlowUp { .. })
            ));
        }
        let opts = RegularizeOptions {
            a_override: Some(9),
            ..Default::default()
        };
        let lift = regularize(&alpha, &params, opts).unwrap();
        assert_eq!(lift.a, 9);
        assert!(lift.verify(7).is_ok());
    }

    #[test]
    fn no_prime_for_unit_blow_up_at_seven() {
        // Only ℓ | 48 = 7² − 1 avoiding 6 = 7 − 1 would do: there is none.
        let b = big(7);
        let candidates: Vec<_> = factor::prime_divisors(&big(48)).unwrap();
        assert!(candidates.iter().all(|l| (big(6) % l).is_zero()));
        assert!(zsigmondy_prime(&b, 2).unwrap().is_none());
    }

    #[test]
    fn wrong_level_is_rejected() {
        let params = shape(3, 3, 2, 1, 1, 4);
        let alpha = CharExp::trivial(FieldLevel::new(3, 3).unwrap());
        assert!(matches!(
            regularize(&alpha, &params, RegularizeOptions::default()),
            Err(Error::LevelMismatch(_))
        ));
    }

    #[test]
    fn descent_cases() {
        let params = shape(3, 3, 2, 1, 1, 4);
        let level = params.top_level().unwrap();
        let alpha = CharExp::trivial(level.clone());
        let lift = regularize(&alpha, &params, RegularizeOptions::default()).unwrap();
        let top = lift.beta.level().clone();

        // Identity transfer.
        let same = descend_transfer(&alpha, &lift, &orbit_of(&lift.beta)).unwrap();
        assert_eq!(same, orbit_of(&alpha));

        // Quadratic twist descends to exponent 4.
        let quad = CharExp::new(top.clone(), top.order() / 2u32);
        let image = orbit_of(&lift.beta.mul(&quad).unwrap());
        let d = descend_transfer_detailed(&alpha, &lift, &image).unwrap();
        assert_eq!(d.nu, CharExp::from_u64(level.clone(), 4));
        assert_eq!(d.orbit, orbit_of(&CharExp::from_u64(level.clone(), 4)));

        // An ℓ-power twist is invisible after descent.
        let xi2 = lift.xi.pow(&big(5));
        let image = orbit_of(&lift.beta.mul(&xi2).unwrap());
        assert_eq!(
            descend_transfer(&alpha, &lift, &image).unwrap(),
            orbit_of(&alpha)
        );

        // A twist that does not come from k is rejected.
        let stray = CharExp::from_u64(top.clone(), 1);
        let image = orbit_of(&lift.beta.mul(&stray).unwrap());
        assert!(matches!(
            descend_transfer(&alpha, &lift, &image),
            Err(Error::NotNormInflated(_))
        ));
    }
}
