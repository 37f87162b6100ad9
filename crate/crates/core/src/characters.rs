//! Characters of `k^×` as exponents.
//!
//! Fix a generator `ζ` of `k^×` and a primitive `M`-th root of unity. The
//! exponent `a` stands for the character sending `ζ` to that root raised to
//! `a`. Products of characters add exponents, the Frobenius `x ↦ x^Q` acts
//! by `a ↦ Q·a`, and composing with the norm from a degree-`a` extension
//! multiplies exponents by `M*/M`. Generators of the different levels are
//! taken norm-compatible, which is what makes that last rule exact.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor;
use crate::limits;
use crate::tower::FieldLevel;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CharExp {
    level: FieldLevel,
    exp: BigUint,
}

impl CharExp {
    /// The character with exponent `exp mod M`.
    pub fn new(level: FieldLevel, exp: BigUint) -> Self {
        let exp = exp % level.order();
        CharExp { level, exp }
    }

    pub fn from_u64(level: FieldLevel, exp: u64) -> Self {
        Self::new(level, BigUint::from(exp))
    }

    pub fn trivial(level: FieldLevel) -> Self {
        CharExp {
            level,
            exp: BigUint::zero(),
        }
    }

    /// A faithful character, i.e. a generator of the character group.
    pub fn generator(level: FieldLevel) -> Self {
        Self::new(level, BigUint::one())
    }

    pub fn level(&self) -> &FieldLevel {
        &self.level
    }

    pub fn exponent(&self) -> &BigUint {
        &self.exp
    }

    pub fn modulus(&self) -> &BigUint {
        self.level.order()
    }

    pub fn is_trivial(&self) -> bool {
        self.exp.is_zero()
    }

    fn same_level(&self, other: &CharExp) -> Result<()> {
        if self.level != other.level {
            return Err(Error::LevelMismatch(format!(
                "characters live at levels {} and {}",
                describe(&self.level),
                describe(&other.level)
            )));
        }
        Ok(())
    }

    /// Pointwise product.
    pub fn mul(&self, other: &CharExp) -> Result<CharExp> {
        self.same_level(other)?;
        Ok(CharExp::new(self.level.clone(), &self.exp + &other.exp))
    }

    /// `self · other^{-1}`.
    pub fn div(&self, other: &CharExp) -> Result<CharExp> {
        self.same_level(other)?;
        let m = self.modulus();
        Ok(CharExp::new(
            self.level.clone(),
            &self.exp + (m - &other.exp),
        ))
    }

    pub fn inv(&self) -> CharExp {
        let m = self.modulus();
        CharExp::new(self.level.clone(), m - &self.exp)
    }

    pub fn pow(&self, k: &BigUint) -> CharExp {
        CharExp::new(self.level.clone(), &self.exp * k)
    }

    /// `α ∘ Frob`, i.e. `α^Q`.
    pub fn frobenius(&self) -> CharExp {
        self.pow(&BigUint::from(self.level.base_cardinality()))
    }

    /// Order of the character, `M / gcd(a, M)`.
    pub fn order(&self) -> BigUint {
        char_order(self)
    }
}

impl fmt::Display for CharExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.exp, self.modulus())
    }
}

fn describe(level: &FieldLevel) -> String {
    format!("(Q={}, deg={})", level.base_cardinality(), level.deg())
}

pub fn char_order(alpha: &CharExp) -> BigUint {
    let m = alpha.modulus();
    m / alpha.exp.gcd(m)
}

/// Orbit of `exp` under repeated multiplication by `step` modulo `modulus`,
/// in discovery order. `step` must be invertible modulo `modulus`.
fn multiplier_orbit(exp: &BigUint, step: &BigUint, modulus: &BigUint) -> Vec<BigUint> {
    let mut out = vec![exp.clone()];
    if modulus.is_one() {
        return out;
    }
    let mut x = (exp * step) % modulus;
    while &x != exp {
        let next = (&x * step) % modulus;
        out.push(x);
        x = next;
    }
    out
}

/// A `Γ = Gal(k/e)`-orbit of characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GaloisOrbit {
    level: FieldLevel,
    members: Vec<BigUint>,
}

impl GaloisOrbit {
    pub fn level(&self) -> &FieldLevel {
        &self.level
    }

    /// Smallest exponent in the orbit.
    pub fn rep(&self) -> &BigUint {
        &self.members[0]
    }

    pub fn rep_char(&self) -> CharExp {
        CharExp::new(self.level.clone(), self.rep().clone())
    }

    /// Parametric degree: the orbit size.
    pub fn size(&self) -> u64 {
        self.members.len() as u64
    }

    /// Exponents of the members, ascending.
    pub fn members(&self) -> &[BigUint] {
        &self.members
    }

    pub fn contains(&self, alpha: &CharExp) -> bool {
        alpha.level == self.level && self.members.binary_search(&alpha.exp).is_ok()
    }

    pub fn chars(&self) -> impl Iterator<Item = CharExp> + '_ {
        self.members
            .iter()
            .map(|e| CharExp::new(self.level.clone(), e.clone()))
    }
}

/// `Γ`-orbit of `α`: all `Q^i·a mod M`.
pub fn orbit_of(alpha: &CharExp) -> GaloisOrbit {
    let step = BigUint::from(alpha.level.base_cardinality());
    let mut members = multiplier_orbit(&alpha.exp, &step, alpha.modulus());
    members.sort();
    debug_assert_eq!(alpha.level.deg() % members.len() as u64, 0);
    GaloisOrbit {
        level: alpha.level.clone(),
        members,
    }
}

/// Size of the `Γ`-orbit, the parametric degree `f` of `α`.
pub fn parametric_degree(alpha: &CharExp) -> u64 {
    let step = BigUint::from(alpha.level.base_cardinality());
    multiplier_orbit(&alpha.exp, &step, alpha.modulus()).len() as u64
}

/// Regular over `e`: trivial `Γ`-stabilizer.
pub fn is_e_regular(alpha: &CharExp) -> bool {
    parametric_degree(alpha) == alpha.level.deg()
}

fn check_d_prime(alpha: &CharExp, d_prime: u64) -> Result<()> {
    if d_prime == 0 || !alpha.level.deg().is_multiple_of(d_prime) {
        return Err(Error::DegreeMismatch(format!(
            "d' = {d_prime} does not divide the level degree {}",
            alpha.level.deg()
        )));
    }
    Ok(())
}

/// Orbit size under `Σ = Gal(k/d)`, generated by `a ↦ Q^{d'}·a`.
pub fn sigma_orbit_size(alpha: &CharExp, d_prime: u64) -> Result<u64> {
    check_d_prime(alpha, d_prime)?;
    let step = num_traits::pow(
        BigUint::from(alpha.level.base_cardinality()),
        d_prime as usize,
    );
    Ok(multiplier_orbit(&alpha.exp, &step, alpha.modulus()).len() as u64)
}

/// Regular over `d`: trivial `Σ`-stabilizer.
pub fn is_sigma_regular(alpha: &CharExp, d_prime: u64) -> Result<bool> {
    Ok(sigma_orbit_size(alpha, d_prime)? == alpha.level.deg() / d_prime)
}

/// `(f, u)`: degrees of `e[α]/e` and `d[α]/d`. The second is read off the
/// `Σ`-orbit and agrees with `f / gcd(f, d')`.
pub fn stabilizer_degrees(alpha: &CharExp, d_prime: u64) -> Result<(u64, u64)> {
    let f = parametric_degree(alpha);
    let u = sigma_orbit_size(alpha, d_prime)?;
    debug_assert_eq!(u, f / f.gcd(&d_prime));
    Ok((f, u))
}

/// `s(α) = d' / gcd(f, d')`.
pub fn s_invariant(alpha: &CharExp, d_prime: u64) -> Result<u64> {
    check_d_prime(alpha, d_prime)?;
    let f = parametric_degree(alpha);
    Ok(d_prime / f.gcd(&d_prime))
}

/// `M = ℓ^t · M'` with `ℓ ∤ M'`; returns `(ℓ^t, M')`.
pub fn split_off_prime(m: &BigUint, ell: &BigUint) -> (BigUint, BigUint) {
    let mut power = BigUint::one();
    let mut rest = m.clone();
    loop {
        let (q, r) = rest.div_rem(ell);
        if !r.is_zero() {
            break;
        }
        rest = q;
        power *= ell;
    }
    (power, rest)
}

/// CRT idempotent `e ≡ 0 (mod ℓ^t)`, `e ≡ 1 (mod M')`, reduced mod `M`.
fn regular_idempotent(m: &BigUint, ell: &BigUint) -> BigUint {
    let (ell_power, rest) = split_off_prime(m, ell);
    if rest.is_one() {
        return BigUint::zero();
    }
    // ℓ^t is a unit mod M' because ℓ ∤ M'.
    let inv = (&ell_power % &rest)
        .modinv(&rest)
        .expect("prime power is invertible modulo its cofactor");
    (ell_power * inv) % m
}

/// The ℓ-regular part: the unique character of order prime to `ℓ` whose
/// quotient by `α` has `ℓ`-power order.
pub fn ell_regular_part(alpha: &CharExp, ell: &BigUint) -> Result<CharExp> {
    factor::require_prime(ell)?;
    let e = regular_idempotent(alpha.modulus(), ell);
    Ok(CharExp::new(alpha.level.clone(), &alpha.exp * e))
}

/// The ℓ-primary part `α · α_ℓ^{-1}`.
pub fn ell_primary_part(alpha: &CharExp, ell: &BigUint) -> Result<CharExp> {
    alpha.div(&ell_regular_part(alpha, ell)?)
}

/// `α* = α ∘ N_{k*/k}` where `k*/k` has degree `a`.
pub fn norm_inflate(alpha: &CharExp, a: u64) -> Result<CharExp> {
    if a == 0 {
        return Err(Error::OutOfRange(
            "blow-up factor must be at least 1".into(),
        ));
    }
    let target = alpha.level.extend(a)?;
    let ratio = target.norm_ratio(&alpha.level)?;
    Ok(CharExp::new(target, &alpha.exp * ratio))
}

/// Inverse of [`norm_inflate`] onto `base`: `Some(ν)` with `ν ∘ N = χ`, or
/// `None` when `χ` is not of that form.
pub fn is_norm_inflated(chi: &CharExp, base: &FieldLevel) -> Result<Option<CharExp>> {
    let ratio = chi.level.norm_ratio(base)?;
    let (q, r) = chi.exp.div_rem(&ratio);
    Ok(r.is_zero().then(|| CharExp::new(base.clone(), q)))
}

fn enumeration_size(level: &FieldLevel) -> Result<u64> {
    let max = limits::max_enumeration();
    match level.order().to_u64() {
        Some(m) if m <= max => Ok(m),
        _ => Err(Error::EnumerationTooLarge {
            size: level.order().clone(),
            max,
        }),
    }
}

/// All `Γ`-orbits of the level, ordered by representative.
pub fn enumerate_orbits(level: &FieldLevel) -> Result<Vec<GaloisOrbit>> {
    let m = enumeration_size(level)?;
    let q = level.base_cardinality() as u128 % m as u128;
    let mut seen = vec![false; m as usize];
    let mut out = Vec::new();
    for a in 0..m {
        if seen[a as usize] {
            continue;
        }
        let mut members = Vec::new();
        let mut x = a;
        loop {
            seen[x as usize] = true;
            members.push(x);
            x = ((x as u128 * q) % m as u128) as u64;
            if x == a {
                break;
            }
        }
        members.sort_unstable();
        out.push(GaloisOrbit {
            level: level.clone(),
            members: members.into_iter().map(BigUint::from).collect(),
        });
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct CharExpRepr {
    level_deg: u64,
    #[serde(rename = "Q")]
    big_q: u64,
    #[serde(rename = "M", with = "crate::serde_big")]
    order: BigUint,
    #[serde(with = "crate::serde_big")]
    a: BigUint,
}

impl Serialize for CharExp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CharExpRepr {
            level_deg: self.level.deg(),
            big_q: self.level.base_cardinality(),
            order: self.modulus().clone(),
            a: self.exp.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CharExp {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = CharExpRepr::deserialize(d)?;
        let level = FieldLevel::new(r.big_q, r.level_deg).map_err(D::Error::custom)?;
        if level.order() != &r.order {
            return Err(D::Error::custom("M does not equal Q^deg - 1"));
        }
        if r.a >= r.order && !r.order.is_one() {
            return Err(D::Error::custom("exponent out of range"));
        }
        Ok(CharExp::new(level, r.a))
    }
}

#[derive(Serialize, Deserialize)]
struct OrbitRepr {
    level_deg: u64,
    #[serde(rename = "Q")]
    big_q: u64,
    #[serde(rename = "M", with = "crate::serde_big")]
    order: BigUint,
    #[serde(with = "crate::serde_big")]
    rep: BigUint,
    size: u64,
    #[serde(with = "crate::serde_big::vec")]
    members: Vec<BigUint>,
}

impl Serialize for GaloisOrbit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OrbitRepr {
            level_deg: self.level.deg(),
            big_q: self.level.base_cardinality(),
            order: self.level.order().clone(),
            rep: self.rep().clone(),
            size: self.size(),
            members: self.members.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GaloisOrbit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = OrbitRepr::deserialize(d)?;
        let level = FieldLevel::new(r.big_q, r.level_deg).map_err(D::Error::custom)?;
        if level.order() != &r.order {
            return Err(D::Error::custom("M does not equal Q^deg - 1"));
        }
        let orbit = orbit_of(&CharExp::new(level, r.rep.clone()));
        if orbit.rep() != &r.rep || orbit.size() != r.size || orbit.members != r.members {
            return Err(D::Error::custom("inconsistent orbit"));
        }
        Ok(orbit)
    }
}
