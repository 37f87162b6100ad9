//! Numeric shape of the groups and residue fields in play.
//!
//! A [`TowerParams`] records `(p, q, e(E/F), f(E/F), m, d)` for an endo-class
//! of degree `g = e·f` and the inner form `GL_m(D)`, `D` of reduced degree
//! `d`. Everything downstream works over the residue field `e` of `E`, of
//! cardinality `Q = q^f`, and its extensions `k` of degree `n' = n/g`.

use num_bigint::BigUint;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{self, pow_minus_one};
use crate::limits;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TowerParams {
    pub p: u64,
    pub q: u64,
    pub e_ef: u64,
    pub f_ef: u64,
    pub m: u64,
    pub d: u64,
    /// Degree of the endo-class, `e·f`.
    pub g: u64,
    pub n: u64,
    /// Cardinality of the residue field `e` of `E`.
    #[serde(rename = "Q")]
    pub big_q: u64,
    pub d_prime: u64,
    pub m_prime: u64,
    pub n_prime: u64,
}

impl TowerParams {
    pub fn new(p: u64, q: u64, e_ef: u64, f_ef: u64, m: u64, d: u64) -> Result<Self> {
        derive_tower(p, q, e_ef, f_ef, m, d)
    }

    /// Field level of degree `deg` over `e`.
    pub fn level(&self, deg: u64) -> Result<FieldLevel> {
        FieldLevel::new(self.big_q, deg)
    }

    /// The level of `k`, degree `n'` over `e`.
    pub fn top_level(&self) -> Result<FieldLevel> {
        self.level(self.n_prime)
    }

    /// Parameters for `GL_{am}(D)`.
    pub fn blow_up(&self, a: u64) -> Result<Self> {
        blow_up(self, a)
    }

    pub fn is_essentially_tame(&self) -> bool {
        !self.e_ef.is_multiple_of(self.p)
    }
}

/// Validates a shape and derives `g, n, Q, d', m', n'`.
pub fn derive_tower(p: u64, q: u64, e_ef: u64, f_ef: u64, m: u64, d: u64) -> Result<TowerParams> {
    if !factor::is_prime_u64(p) {
        return Err(Error::NotPrime(BigUint::from(p)));
    }
    if factor::prime_power_exponent(q, p).is_none() {
        return Err(Error::NotPrimePower { q, p });
    }
    for (name, v) in [("e_EF", e_ef), ("f_EF", f_ef), ("m", m), ("d", d)] {
        if v == 0 {
            return Err(Error::OutOfRange(format!("{name} must be at least 1")));
        }
    }
    let g = e_ef
        .checked_mul(f_ef)
        .ok_or_else(|| Error::OutOfRange("e_EF·f_EF overflows".into()))?;
    let n = m
        .checked_mul(d)
        .ok_or_else(|| Error::OutOfRange("m·d overflows".into()))?;
    if n % g != 0 {
        return Err(Error::DegreeMismatch(format!(
            "g = {g} does not divide n = {n}"
        )));
    }
    let gcd_dg = d.gcd(&g);
    if !(m * gcd_dg).is_multiple_of(g) {
        return Err(Error::DegreeMismatch(format!(
            "g = {g} does not divide m·gcd(d, g) = {}",
            m * gcd_dg
        )));
    }
    let big_q = u32::try_from(f_ef)
        .ok()
        .and_then(|f| q.checked_pow(f))
        .ok_or_else(|| Error::OutOfRange(format!("q^f = {q}^{f_ef} overflows")))?;
    let d_prime = d / gcd_dg;
    let m_prime = m * gcd_dg / g;
    let n_prime = n / g;
    debug_assert_eq!(m_prime * d_prime, n_prime);
    Ok(TowerParams {
        p,
        q,
        e_ef,
        f_ef,
        m,
        d,
        g,
        n,
        big_q,
        d_prime,
        m_prime,
        n_prime,
    })
}

pub fn blow_up(params: &TowerParams, a: u64) -> Result<TowerParams> {
    if a == 0 {
        return Err(Error::OutOfRange(
            "blow-up factor must be at least 1".into(),
        ));
    }
    let m = params
        .m
        .checked_mul(a)
        .ok_or_else(|| Error::OutOfRange("a·m overflows".into()))?;
    derive_tower(params.p, params.q, params.e_ef, params.f_ef, m, params.d)
}

/// Extension of `e` of degree `deg`, with multiplicative group order
/// `M = Q^deg − 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldLevel {
    deg: u64,
    big_q: u64,
    order: BigUint,
}

impl FieldLevel {
    pub fn new(big_q: u64, deg: u64) -> Result<Self> {
        if big_q < 2 {
            return Err(Error::OutOfRange(format!("base cardinality {big_q} < 2")));
        }
        if deg == 0 {
            return Err(Error::OutOfRange("level degree must be at least 1".into()));
        }
        let max = limits::max_level_degree();
        if deg > max {
            return Err(Error::LevelTooLarge { deg, max });
        }
        Ok(FieldLevel {
            deg,
            big_q,
            order: pow_minus_one(&BigUint::from(big_q), deg),
        })
    }

    pub fn deg(&self) -> u64 {
        self.deg
    }

    pub fn base_cardinality(&self) -> u64 {
        self.big_q
    }

    /// `M = Q^deg − 1`.
    pub fn order(&self) -> &BigUint {
        &self.order
    }

    /// Level of degree `deg·a` over the same base.
    pub fn extend(&self, a: u64) -> Result<FieldLevel> {
        let deg = self
            .deg
            .checked_mul(a)
            .ok_or_else(|| Error::OutOfRange("level degree overflows".into()))?;
        FieldLevel::new(self.big_q, deg)
    }

    /// The subfield level of degree `deg` (which must divide this degree).
    pub fn subfield(&self, deg: u64) -> Result<FieldLevel> {
        if deg == 0 || !self.deg.is_multiple_of(deg) {
            return Err(Error::DegreeMismatch(format!(
                "{deg} does not divide the level degree {}",
                self.deg
            )));
        }
        FieldLevel::new(self.big_q, deg)
    }

    /// `M_self / M_sub` for a subfield level; the exponent multiplier of the
    /// norm map onto that subfield.
    pub fn norm_ratio(&self, sub: &FieldLevel) -> Result<BigUint> {
        if sub.big_q != self.big_q || !self.deg.is_multiple_of(sub.deg) {
            return Err(Error::LevelMismatch(format!(
                "level ({}, {}) is not an extension of ({}, {})",
                self.big_q, self.deg, sub.big_q, sub.deg
            )));
        }
        Ok(&self.order / &sub.order)
    }
}

#[derive(Serialize, Deserialize)]
struct FieldLevelRepr {
    deg: u64,
    #[serde(rename = "Q")]
    big_q: u64,
    #[serde(rename = "M", with = "crate::serde_big")]
    order: BigUint,
}

impl Serialize for FieldLevel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FieldLevelRepr {
            deg: self.deg,
            big_q: self.big_q,
            order: self.order.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FieldLevel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = FieldLevelRepr::deserialize(d)?;
        let level = FieldLevel::new(r.big_q, r.deg).map_err(D::Error::custom)?;
        if level.order != r.order {
            return Err(D::Error::custom("M does not equal Q^deg - 1"));
        }
        Ok(level)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quaternion_shape() {
        let t = derive_tower(3, 3, 2, 1, 1, 4).unwrap();
        assert_eq!(
            (t.g, t.big_q, t.d_prime, t.m_prime, t.n_prime),
            (2, 3, 2, 1, 2)
        );
    }

    #[test]
    fn unit_degree_keeps_m_and_d() {
        let t = derive_tower(3, 3, 1, 1, 2, 2).unwrap();
        assert_eq!(
            (t.g, t.big_q, t.d_prime, t.m_prime, t.n_prime),
            (1, 3, 2, 2, 4)
        );
    }

    #[test]
    fn full_degree_endo_class() {
        let t = derive_tower(2, 2, 3, 1, 1, 3).unwrap();
        assert_eq!(
            (t.g, t.big_q, t.d_prime, t.m_prime, t.n_prime),
            (3, 2, 1, 1, 1)
        );
    }

    #[test]
    fn residual_degree_raises_q() {
        let t = derive_tower(2, 4, 1, 3, 1, 3).unwrap();
        assert_eq!(t.big_q, 64);
        assert_eq!(t.n_prime, 1);
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            derive_tower(4, 4, 1, 1, 1, 1),
            Err(Error::NotPrime(_))
        ));
        assert!(matches!(
            derive_tower(3, 6, 1, 1, 1, 1),
            Err(Error::NotPrimePower { .. })
        ));
        assert!(matches!(
            derive_tower(3, 3, 3, 1, 1, 2),
            Err(Error::DegreeMismatch(_))
        ));
        assert!(matches!(
            derive_tower(3, 3, 1, 1, 0, 2),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn levels() {
        assert_eq!(FieldLevel::new(2, 3).unwrap().order(), &BigUint::from(7u32));
        assert_eq!(FieldLevel::new(3, 2).unwrap().order(), &BigUint::from(8u32));
        assert_eq!(
            FieldLevel::new(2, 14).unwrap().order(),
            &BigUint::from(16383u32)
        );
        assert!(matches!(
            FieldLevel::new(2, 65),
            Err(Error::LevelTooLarge { .. })
        ));
        assert!(FieldLevel::new(2, 0).is_err());
    }

    #[test]
    fn blow_ups() {
        let t = derive_tower(3, 3, 2, 1, 1, 4).unwrap();
        assert_eq!(blow_up(&t, 1).unwrap(), t);
        let b = blow_up(&t, 7).unwrap();
        assert_eq!(
            (b.m, b.n_prime, b.big_q, b.d_prime, b.m_prime),
            (7, 14, 3, 2, 7)
        );
        let t = derive_tower(3, 3, 1, 1, 2, 2).unwrap();
        let b = blow_up(&t, 3).unwrap();
        assert_eq!((b.m, b.n_prime, b.m_prime), (6, 12, 6));
    }

    #[test]
    fn level_json() {
        let level = FieldLevel::new(3, 14).unwrap();
        let s = serde_json::to_string(&level).unwrap();
        assert_eq!(s, r#"{"deg":14,"Q":3,"M":"4782968"}"#);
        let back: FieldLevel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, level);
        assert!(serde_json::from_str::<FieldLevel>(r#"{"deg":14,"Q":3,"M":"5"}"#).is_err());
    }
}
