//! Traces of Green's supercuspidal representation `σ₀` of `GL_u(d)` at
//! elliptic regular elements, as formal sums of roots of unity.
//!
//! For a `d`-regular character `α₀` of `d[α]^×` and `g ∈ d[α]^×` of degree
//! `u` over `d`,
//!
//! ```text
//! tr σ₀(g) = (−1)^(u−1) · Σ_γ α₀^γ(g)
//! ```
//!
//! with `γ` running over `Gal(d[α]/d)`. Sums are kept exact, with no
//! cyclotomic relations imposed; [`CyclotomicSum::evaluate`] gives the
//! complex value.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::characters::{self, CharExp};
use crate::error::{Error, Result};
use crate::serde_big;
use crate::tower::FieldLevel;

/// `Σ c_e ζ_M^e` with finitely many nonzero `c_e`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CyclotomicSum {
    modulus: BigUint,
    terms: BTreeMap<BigUint, i64>,
}

impl CyclotomicSum {
    pub fn zero(modulus: BigUint) -> Self {
        assert!(!modulus.is_zero(), "modulus must be positive");
        CyclotomicSum {
            modulus,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(modulus: BigUint, terms: impl IntoIterator<Item = (BigUint, i64)>) -> Self {
        let mut s = Self::zero(modulus);
        for (e, c) in terms {
            s.add_term(e, c);
        }
        s
    }

    pub fn add_term(&mut self, exp: BigUint, coeff: i64) {
        let e = exp % &self.modulus;
        let c = self.terms.entry(e.clone()).or_insert(0);
        *c += coeff;
        if *c == 0 {
            self.terms.remove(&e);
        }
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BigUint, i64)> {
        self.terms.iter().map(|(e, c)| (e, *c))
    }

    pub fn coefficient(&self, exp: &BigUint) -> i64 {
        self.terms.get(&(exp % &self.modulus)).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, k: i64) -> Self {
        if k == 0 {
            return Self::zero(self.modulus.clone());
        }
        CyclotomicSum {
            modulus: self.modulus.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect(),
        }
    }

    pub fn evaluate(&self) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, &c)| root_of_unity(e, &self.modulus) * c as f64)
            .sum()
    }
}

/// `exp(2πi·e/M)`.
pub fn root_of_unity(e: &BigUint, m: &BigUint) -> Complex64 {
    let e = e % m;
    // keep 64 significant bits of the fraction
    let shift = m.bits().saturating_sub(64);
    let num = (&e >> shift).to_f64().unwrap_or(0.0);
    let den = (m >> shift).to_f64().unwrap_or(1.0);
    let (sin, cos) = (std::f64::consts::TAU * (num / den)).sin_cos();
    Complex64::new(cos, sin)
}

impl fmt::Display for CyclotomicSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            match (i, *c < 0) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mag = c.unsigned_abs();
            if mag != 1 {
                write!(f, "{mag}·")?;
            }
            write!(f, "z{}^{e}", self.modulus)?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct SumRepr {
    #[serde(rename = "M")]
    modulus: String,
    terms: Vec<(String, i64)>,
}

impl Serialize for CyclotomicSum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SumRepr {
            modulus: self.modulus.to_string(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.to_string(), *c))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CyclotomicSum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = SumRepr::deserialize(d)?;
        let modulus = serde_big::parse(&repr.modulus).map_err(D::Error::custom)?;
        if modulus.is_zero() {
            return Err(D::Error::custom("modulus must be positive"));
        }
        let mut terms = Vec::with_capacity(repr.terms.len());
        for (e, c) in repr.terms {
            let e = serde_big::parse(&e).map_err(D::Error::custom)?;
            if e >= modulus {
                return Err(D::Error::custom(format!(
                    "exponent {e} not reduced mod {modulus}"
                )));
            }
            terms.push((e, c));
        }
        Ok(CyclotomicSum::from_terms(modulus, terms))
    }
}

/// Degree over `d` of the element `g = ζ^g_exp` of `level^×`, where `d` is
/// the base of `level` and `ζ` a generator.
pub fn element_degree(level: &FieldLevel, g_exp: &BigUint) -> u64 {
    characters::parametric_degree(&CharExp::new(level.clone(), g_exp.clone()))
}

/// `tr σ₀(g)` for `σ₀` attached to `alpha0`, a character of `d[α]^×` with
/// `[d[α]:d] = u`, at `g = ζ^g_exp`.
pub fn green_trace(alpha0: &CharExp, g_exp: &BigUint, u: u64) -> Result<CyclotomicSum> {
    let level = alpha0.level();
    if level.deg() != u {
        return Err(Error::DegreeMismatch(format!(
            "character lives on an extension of degree {}, not u = {u}",
            level.deg()
        )));
    }
    let deg = characters::parametric_degree(alpha0);
    if deg != u {
        return Err(Error::NotRegularCharacter(format!(
            "{alpha0} has a Galois orbit of size {deg} < {u}"
        )));
    }
    let m = level.order();
    let g = g_exp % m;
    let g_deg = element_degree(level, &g);
    if g_deg != u {
        return Err(Error::NotRegularElement(format!(
            "g = ζ^{g} has degree {g_deg} < {u} over d"
        )));
    }
    let sign = if u % 2 == 1 { 1 } else { -1 };
    let q = BigUint::from(level.base_cardinality());
    let mut sum = CyclotomicSum::zero(m.clone());
    let mut e = alpha0.exponent() * &g % m;
    for _ in 0..u {
        sum.add_term(e.clone(), sign);
        e = e * &q % m;
    }
    Ok(sum)
}
