//! The essentially tame transfer on parametrizing orbits.
//!
//! With the β-extensions normalized so their determinants have `p`-power
//! order, the transfer permutation is `[α] ↦ [αμ]` for a character `μ` of
//! order at most 2, the rectifier. It is quadratic exactly when `p ≠ 2` and
//! `y = m(d−1) + m'(d'−1) + u(v−1)` is odd, where `w = n/e(E/F)`,
//! `v = d/gcd(d, w)` and `uv = n/w`.
//!
//! [`transfer_via_descent`] reaches the same answer the long way round:
//! lift to a blown-up level where the class becomes regular, apply the
//! rectifier there, and descend through the ℓ-regular part.

use num_bigint::BigUint;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::characters::{self, orbit_of, CharExp, GaloisOrbit};
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::regularize::{self, Descent, RegularizationLift, RegularizeOptions};
use crate::tower::{FieldLevel, TowerParams};

/// Integers entering the rectifier parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RectifierTerms {
    pub w: u64,
    pub v: u64,
    pub u: u64,
    pub y: u64,
}

pub fn rectifier_terms(params: &TowerParams) -> Result<RectifierTerms> {
    let TowerParams {
        m,
        d,
        n,
        e_ef,
        m_prime,
        d_prime,
        ..
    } = *params;
    if n % e_ef != 0 {
        return Err(Error::ShapeError(format!(
            "e(E/F) = {e_ef} does not divide n = {n}"
        )));
    }
    let w = n / e_ef;
    let v = d / d.gcd(&w);
    let uv = n / w;
    if uv % v != 0 {
        return Err(Error::ShapeError(format!("u = {uv}/{v} is not an integer")));
    }
    let u = uv / v;
    let y = m * (d - 1) + m_prime * (d_prime - 1) + u * (v - 1);
    Ok(RectifierTerms { w, v, u, y })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RectifierSpec {
    pub params: TowerParams,
    #[serde(flatten)]
    pub terms: RectifierTerms,
    /// Character of `k^×`: exponent `M/2` when nontrivial, else `0`.
    pub mu: CharExp,
    pub nontrivial: bool,
}

pub fn rectifier(params: &TowerParams) -> Result<RectifierSpec> {
    if !params.is_essentially_tame() {
        return Err(Error::NotEssentiallyTame {
            e: params.e_ef,
            p: params.p,
        });
    }
    let terms = rectifier_terms(params)?;
    let level = params.top_level()?;
    // For p = 2 the order M is odd and there is no quadratic character;
    // the parity test comes first.
    let nontrivial = params.p != 2 && terms.y % 2 == 1;
    let mu = if nontrivial {
        let half = level.order() / 2u32;
        CharExp::new(level, half)
    } else {
        CharExp::trivial(level)
    };
    Ok(RectifierSpec {
        params: params.clone(),
        terms,
        mu,
        nontrivial,
    })
}

/// `[α] ↦ [αμ]`.
pub fn apply_transfer(orbit: &GaloisOrbit, spec: &RectifierSpec) -> Result<GaloisOrbit> {
    if orbit.level() != spec.mu.level() {
        return Err(Error::LevelMismatch(
            "orbit is not at the level of the rectifier".into(),
        ));
    }
    Ok(orbit_of(&orbit.rep_char().mul(&spec.mu)?))
}

/// The transfer when the parametrizations are built from other β-extensions
/// `κ·ε` on the source and `κ'·ε'` on the target, where `ε`, `ε'` are
/// characters of `k^×` through `N_{k/e}`: `[α] ↦ [α ε^{-1} μ ε']`.
pub fn apply_transfer_renormalized(
    orbit: &GaloisOrbit,
    spec: &RectifierSpec,
    source_twist: &CharExp,
    target_twist: &CharExp,
) -> Result<GaloisOrbit> {
    for t in [source_twist, target_twist] {
        if &t.frobenius() != t {
            return Err(Error::OutOfRange(format!(
                "twist {t} is not fixed by Gal(k/e)"
            )));
        }
    }
    let shifted = orbit_of(&orbit.rep_char().div(source_twist)?);
    let image = apply_transfer(&shifted, spec)?;
    Ok(orbit_of(&image.rep_char().mul(target_twist)?))
}

/// `y` at `GL_m(D)` and at `GL_{am}(D)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlowupParity {
    pub a: u64,
    pub y: u64,
    pub y_blown: u64,
    pub holds: bool,
}

/// Computes `y` at the blown-up shape and compares its parity with that of
/// `a·y`. The values themselves differ as soon as `v > 1`, since `u(v−1)`
/// does not scale with `m`; the parity is what decides the rectifier.
pub fn blowup_parity(params: &TowerParams, a: u64) -> Result<BlowupParity> {
    let y = rectifier_terms(params)?.y;
    let y_blown = rectifier_terms(&params.blow_up(a)?)?.y;
    Ok(BlowupParity {
        a,
        y,
        y_blown,
        holds: y_blown % 2 == (a * y) % 2,
    })
}

pub fn blowup_parity_check(params: &TowerParams, a: u64) -> Result<bool> {
    Ok(blowup_parity(params, a)?.holds)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescentOutcome {
    pub lift: RegularizationLift,
    /// Rectifier of the blown-up shape.
    pub lambda: CharExp,
    pub beta_image: GaloisOrbit,
    pub descent: Descent,
    pub closed_form: GaloisOrbit,
}

impl DescentOutcome {
    pub fn orbit(&self) -> &GaloisOrbit {
        &self.descent.orbit
    }
}

pub fn transfer_via_descent(alpha: &CharExp, params: &TowerParams) -> Result<DescentOutcome> {
    let spec = rectifier(params)?;
    transfer_via_descent_against(alpha, params, &spec)
}

/// Runs the descent and compares it with `apply_transfer` under
/// `closed_form`, which normally is `rectifier(params)`.
pub fn transfer_via_descent_against(
    alpha: &CharExp,
    params: &TowerParams,
    closed_form: &RectifierSpec,
) -> Result<DescentOutcome> {
    let base = rectifier(params)?;
    let lift = regularize::regularize(alpha, params, RegularizeOptions::default())?;
    let blown = rectifier(&params.blow_up(lift.a)?)?;
    let lambda = blown.mu;
    if lambda.level() != lift.beta.level() {
        return Err(Error::LevelMismatch(
            "blown-up rectifier is not at the lift level".into(),
        ));
    }
    // With a odd, the blown-up rectifier is the pull-back of μ.
    if lambda != characters::norm_inflate(&base.mu, lift.a)? {
        return Err(Error::ShapeError(format!(
            "rectifier at a = {} is not the inflation of the base rectifier",
            lift.a
        )));
    }
    let beta_image = orbit_of(&lift.beta.mul(&lambda)?);
    let descent = regularize::descend_transfer_detailed(alpha, &lift, &beta_image)?;
    let closed = apply_transfer(&orbit_of(alpha), closed_form)?;
    if descent.orbit != closed {
        return Err(Error::MismatchAgainstRectifier {
            descent: descent.orbit.rep().clone(),
            closed_form: closed.rep().clone(),
        });
    }
    Ok(DescentOutcome {
        lift,
        lambda,
        beta_image,
        descent,
        closed_form: closed,
    })
}

/// The full permutation on `Γ\X`, ordered by source representative.
pub fn transfer_table(
    params: &TowerParams,
    exec: Execution,
) -> Result<Vec<(GaloisOrbit, GaloisOrbit)>> {
    let spec = rectifier(params)?;
    let orbits = characters::enumerate_orbits(&params.top_level()?)?;
    par::try_map(&orbits, exec, |o| {
        apply_transfer(o, &spec).map(|img| (o.clone(), img))
    })
}

/// Residual shadow of an inertial class of admissible pairs: the degree
/// `f = [L:E]` and the tame character `β` of `l^×`, `[l:e] = f`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TamePairClass {
    pub f: u64,
    pub beta: CharExp,
}

impl TamePairClass {
    pub fn new(params: &TowerParams, f: u64, beta_exp: BigUint) -> Result<Self> {
        let level = pair_level(params, f)?;
        let pair = TamePairClass {
            f,
            beta: CharExp::new(level, beta_exp),
        };
        pair.check_regular()?;
        Ok(pair)
    }

    fn check_regular(&self) -> Result<()> {
        if characters::parametric_degree(&self.beta) != self.f {
            return Err(Error::NotAdmissible(format!(
                "β = {} has a Gal(l/e)-orbit of size {} < {}",
                self.beta,
                characters::parametric_degree(&self.beta),
                self.f
            )));
        }
        Ok(())
    }

    /// Same inertial class: `Gal(l/e)`-conjugate characters.
    pub fn same_class(&self, other: &TamePairClass) -> bool {
        self.f == other.f && orbit_of(&self.beta) == orbit_of(&other.beta)
    }
}

fn pair_level(params: &TowerParams, f: u64) -> Result<FieldLevel> {
    if f == 0 || !params.n_prime.is_multiple_of(f) {
        return Err(Error::DegreeMismatch(format!(
            "f = {f} does not divide n' = {}",
            params.n_prime
        )));
    }
    params.level(f)
}

/// `[L/F, ξ] ↦ [ξ_t ∘ N_{k/l}]`.
pub fn pair_to_orbit(pair: &TamePairClass, params: &TowerParams) -> Result<GaloisOrbit> {
    let sub = pair_level(params, pair.f)?;
    if pair.beta.level() != &sub {
        return Err(Error::LevelMismatch("β is not a character of l^×".into()));
    }
    pair.check_regular()?;
    let top = params.top_level()?;
    let ratio = top.norm_ratio(&sub)?;
    let orbit = orbit_of(&CharExp::new(top, pair.beta.exponent() * ratio));
    debug_assert_eq!(orbit.size(), pair.f);
    Ok(orbit)
}

/// Inverse of [`pair_to_orbit`]: `l` is the field of degree `|[α]|` and `β`
/// the character with `α = β ∘ N_{k/l}`.
pub fn orbit_to_pair(orbit: &GaloisOrbit, params: &TowerParams) -> Result<TamePairClass> {
    let top = params.top_level()?;
    if orbit.level() != &top {
        return Err(Error::LevelMismatch("orbit is not at level n'".into()));
    }
    let f = orbit.size();
    let sub = pair_level(params, f)?;
    let beta = characters::is_norm_inflated(&orbit.rep_char(), &sub)?
        .ok_or_else(|| Error::NotInNormImage(orbit.rep().clone()))?;
    let pair = TamePairClass { f, beta };
    pair.check_regular()?;
    Ok(pair)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairTransfer {
    pub before: TamePairClass,
    /// Canonical representative of the image class.
    pub after: TamePairClass,
    /// Correction character of `l^×`; `after` is the class of `β·μ_L`.
    pub mu_l: CharExp,
    pub shifted_beta: CharExp,
}

pub fn transfer_pair(pair: &TamePairClass, params: &TowerParams) -> Result<PairTransfer> {
    let spec = rectifier(params)?;
    let image = apply_transfer(&pair_to_orbit(pair, params)?, &spec)?;
    let after = orbit_to_pair(&image, params)?;
    let mu_l = characters::is_norm_inflated(&spec.mu, pair.beta.level())?
        .ok_or_else(|| Error::NotInNormImage(spec.mu.exponent().clone()))?;
    if !mu_l.pow(&BigUint::from(2u32)).is_trivial() {
        return Err(Error::OrderViolation(format!(
            "μ_L = {mu_l} does not square to 1"
        )));
    }
    let shifted_beta = pair.beta.mul(&mu_l)?;
    if orbit_of(&shifted_beta) != orbit_of(&after.beta) {
        return Err(Error::MismatchAgainstRectifier {
            descent: shifted_beta.exponent().clone(),
            closed_form: after.beta.exponent().clone(),
        });
    }
    Ok(PairTransfer {
        before: pair.clone(),
        after,
        mu_l,
        shifted_beta,
    })
}

/// `(f, t, s, u, r)` with `t = fg`, `s = d'/gcd(f, d')`, `u = f/gcd(f, d')`
/// and `n = rst`, `m' = ur`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscreteSeriesShape {
    pub f: u64,
    pub t: u64,
    pub s: u64,
    pub u: u64,
    pub r: u64,
}

pub fn discrete_series_shape(
    orbit: &GaloisOrbit,
    params: &TowerParams,
) -> Result<DiscreteSeriesShape> {
    if orbit.level() != &params.top_level()? {
        return Err(Error::LevelMismatch("orbit is not at level n'".into()));
    }
    let f = orbit.size();
    let g = f.gcd(&params.d_prime);
    let s = params.d_prime / g;
    let u = f / g;
    let t = f * params.g;
    let st = s * t;
    if !params.n.is_multiple_of(st) {
        return Err(Error::ShapeError(format!(
            "s·t = {st} does not divide n = {}",
            params.n
        )));
    }
    let r = params.n / st;
    if u * r != params.m_prime {
        return Err(Error::ShapeError(format!(
            "u·r = {} differs from m' = {}",
            u * r,
            params.m_prime
        )));
    }
    Ok(DiscreteSeriesShape { f, t, s, u, r })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    fn quaternion() -> TowerParams {
        TowerParams::new(3, 3, 2, 1, 1, 4).unwrap()
    }

    fn unramified_d2() -> TowerParams {
        TowerParams::new(3, 3, 1, 1, 1, 2).unwrap()
    }

    fn at(params: &TowerParams, a: u64) -> CharExp {
        CharExp::from_u64(params.top_level().unwrap(), a)
    }

    #[test]
    fn rectifier_values() {
        let spec = rectifier(&quaternion()).unwrap();
        assert_eq!(
            spec.terms,
            RectifierTerms {
                w: 2,
                v: 2,
                u: 1,
                y: 5
            }
        );
        assert!(spec.nontrivial);
        assert_eq!(spec.mu.exponent(), &big(4));
        assert_eq!(spec.mu.modulus(), &big(8));

        let spec = rectifier(&unramified_d2()).unwrap();
        assert_eq!(
            spec.terms,
            RectifierTerms {
                w: 2,
                v: 1,
                u: 1,
                y: 2
            }
        );
        assert!(!spec.nontrivial);
        assert!(spec.mu.is_trivial());
    }

    #[test]
    fn rectifier_trivial_in_characteristic_two() {
        // y = 1·1 + 1·1 + 3·0 = 2 here; also try an odd-y shape.
        for params in [
            TowerParams::new(2, 2, 3, 1, 1, 3).unwrap(),
            TowerParams::new(2, 2, 1, 1, 1, 2).unwrap(),
            TowerParams::new(2, 4, 3, 1, 2, 3).unwrap(),
        ] {
            let spec = rectifier(&params).unwrap();
            assert!(!spec.nontrivial);
            assert!(spec.mu.is_trivial());
        }
        assert_eq!(
            rectifier_terms(&TowerParams::new(2, 2, 1, 1, 1, 2).unwrap())
                .unwrap()
                .y,
            2
        );
    }

    #[test]
    fn wild_shapes_are_rejected() {
        let params = TowerParams::new(2, 2, 2, 1, 1, 2).unwrap();
        assert!(matches!(
            rectifier(&params),
            Err(Error::NotEssentiallyTame { .. })
        ));
    }

    #[test]
    fn transfers() {
        let params = quaternion();
        let spec = rectifier(&params).unwrap();
        let img = apply_transfer(&orbit_of(&at(&params, 1)), &spec).unwrap();
        assert_eq!(img.members(), &[big(5), big(7)]);
        let img = apply_transfer(&orbit_of(&at(&params, 0)), &spec).unwrap();
        assert_eq!(img.members(), &[big(4)]);

        let trivial = rectifier(&unramified_d2()).unwrap();
        let o = orbit_of(&at(&unramified_d2(), 3));
        assert_eq!(apply_transfer(&o, &trivial).unwrap(), o);
        let other = TowerParams::new(3, 3, 1, 1, 2, 2).unwrap();
        assert!(apply_transfer(&orbit_of(&at(&other, 3)), &spec).is_err());
    }

    #[test]
    fn parity_under_blow_up() {
        let p = blowup_parity(&quaternion(), 3).unwrap();
        assert_eq!((p.y, p.y_blown), (5, 13));
        assert!(p.holds);
        assert!(blowup_parity_check(&quaternion(), 1).unwrap());
        let p = blowup_parity(&unramified_d2(), 7).unwrap();
        assert_eq!((p.y, p.y_blown), (2, 14));
        assert!(p.holds);
    }

    #[test]
    fn descent_matches_closed_form() {
        let params = quaternion();
        let out = transfer_via_descent(&at(&params, 0), &params).unwrap();
        assert_eq!(out.lift.ell, big(547));
        assert_eq!(out.orbit().members(), &[big(4)]);
        let out = transfer_via_descent(&at(&params, 1), &params).unwrap();
        assert_eq!(out.orbit().rep(), &big(5));

        let params = unramified_d2();
        let alpha = at(&params, 10);
        let out = transfer_via_descent(&alpha, &params).unwrap();
        assert_eq!(out.orbit(), &orbit_of(&alpha));
    }

    #[test]
    fn wrong_closed_form_is_caught() {
        let params = quaternion();
        let mut bad = rectifier(&params).unwrap();
        bad.mu = CharExp::trivial(params.top_level().unwrap());
        bad.nontrivial = false;
        assert!(matches!(
            transfer_via_descent_against(&at(&params, 0), &params, &bad),
            Err(Error::MismatchAgainstRectifier { .. })
        ));
    }

    #[test]
    fn renormalized_transfer() {
        let params = quaternion();
        let spec = rectifier(&params).unwrap();
        let level = params.top_level().unwrap();
        // exponent 4 = M/2 factors through N_{k/e}
        let eps = CharExp::from_u64(level.clone(), 4);
        let triv = CharExp::trivial(level.clone());
        let o = orbit_of(&at(&params, 1));
        let same = apply_transfer_renormalized(&o, &spec, &triv, &triv).unwrap();
        assert_eq!(same, apply_transfer(&o, &spec).unwrap());
        let both = apply_transfer_renormalized(&o, &spec, &eps, &eps).unwrap();
        assert_eq!(both, same);
        assert!(apply_transfer_renormalized(&o, &spec, &at(&params, 1), &triv).is_err());
    }

    #[test]
    fn pairs() {
        let params = quaternion();
        let pair = TamePairClass::new(&params, 1, big(1)).unwrap();
        let o = pair_to_orbit(&pair, &params).unwrap();
        assert_eq!(o.members(), &[big(4)]);
        assert_eq!(orbit_to_pair(&o, &params).unwrap(), pair);

        let o = orbit_of(&at(&params, 3));
        let p = orbit_to_pair(&o, &params).unwrap();
        assert_eq!((p.f, p.beta.exponent()), (2, &big(1)));

        let q2 = TowerParams::new(2, 2, 1, 1, 1, 3).unwrap();
        let p = TamePairClass::new(&q2, 3, big(1)).unwrap();
        assert_eq!(
            pair_to_orbit(&p, &q2).unwrap().members(),
            &[big(1), big(2), big(4)]
        );

        assert!(matches!(
            TamePairClass::new(&q2, 2, big(1)),
            Err(Error::DegreeMismatch(_))
        ));
        // β trivial on l of degree 3: not regular
        assert!(matches!(
            TamePairClass::new(&q2, 3, big(0)),
            Err(Error::NotAdmissible(_))
        ));
    }

    #[test]
    fn pair_transfers() {
        let params = quaternion();
        let pair = TamePairClass::new(&params, 1, big(1)).unwrap();
        let t = transfer_pair(&pair, &params).unwrap();
        assert!(t.after.beta.is_trivial());
        assert_eq!(t.mu_l.exponent(), &big(1));
        assert_eq!(t.mu_l.modulus(), &big(2));

        let pair = TamePairClass::new(&params, 2, big(1)).unwrap();
        let t = transfer_pair(&pair, &params).unwrap();
        assert_eq!(t.mu_l.exponent(), &big(4));
        assert_eq!(t.shifted_beta.exponent(), &big(5));

        let params = unramified_d2();
        let pair = TamePairClass::new(&params, 2, big(1)).unwrap();
        let t = transfer_pair(&pair, &params).unwrap();
        assert!(t.mu_l.is_trivial());
        assert!(t.after.same_class(&pair));
    }

    #[test]
    fn series_shapes() {
        let params = quaternion();
        let s = discrete_series_shape(&orbit_of(&at(&params, 1)), &params).unwrap();
        assert_eq!((s.t, s.s, s.r), (4, 1, 1));
        let s = discrete_series_shape(&orbit_of(&at(&params, 0)), &params).unwrap();
        assert_eq!((s.f, s.t, s.s, s.r), (1, 2, 2, 1));

        // f = 2, d' = 4, g = 1, n = 8
        let params = TowerParams::new(3, 3, 1, 1, 2, 4).unwrap();
        let level = params.top_level().unwrap();
        let alpha = CharExp::new(level.clone(), level.order() / 8u32);
        assert_eq!(characters::parametric_degree(&alpha), 2);
        let s = discrete_series_shape(&orbit_of(&alpha), &params).unwrap();
        assert_eq!((s.t, s.s, s.r), (2, 2, 2));
    }

    #[test]
    fn table_is_a_permutation() {
        let params = quaternion();
        let table = transfer_table(&params, Execution::Auto).unwrap();
        assert_eq!(table.len(), 5);
        let mut images: Vec<_> = table.iter().map(|(_, i)| i.rep().clone()).collect();
        images.sort();
        let mut sources: Vec<_> = table.iter().map(|(s, _)| s.rep().clone()).collect();
        sources.sort();
        assert_eq!(images, sources);
    }
}
