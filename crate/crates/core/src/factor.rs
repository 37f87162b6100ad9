//! Integer factorization and small number-theoretic helpers.
//!
//! Primality and factorization are delegated to `num-prime`; this module
//! fixes the output conventions (primes ascending, exponents as `u32`) and
//! turns incomplete factorizations into errors.

use num_bigint::BigUint;
use num_integer::Integer;
use num_prime::nt_funcs;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Factorization as `(prime, exponent)` pairs with primes ascending.
/// `1` factors as the empty list.
pub fn factorize(n: &BigUint) -> Result<Vec<(BigUint, u32)>> {
    if n.is_zero() {
        return Err(Error::OutOfRange("cannot factor 0".into()));
    }
    if n.is_one() {
        return Ok(Vec::new());
    }
    if let Some(small) = n.to_u64() {
        return Ok(nt_funcs::factorize64(small)
            .into_iter()
            .map(|(p, e)| (BigUint::from(p), e as u32))
            .collect());
    }
    let (found, rest) = nt_funcs::factors(n.clone(), None);
    if rest.is_some() {
        return Err(Error::FactorizationIncomplete(n.clone()));
    }
    Ok(found.into_iter().map(|(p, e)| (p, e as u32)).collect())
}

/// Distinct prime divisors, ascending.
pub fn prime_divisors(n: &BigUint) -> Result<Vec<BigUint>> {
    Ok(factorize(n)?.into_iter().map(|(p, _)| p).collect())
}

/// Primality (deterministic below 2^64, strong probable-prime above).
pub fn is_prime(n: &BigUint) -> bool {
    match n.to_u64() {
        Some(small) => nt_funcs::is_prime64(small),
        None => nt_funcs::is_prime(n, None).probably(),
    }
}

pub fn is_prime_u64(n: u64) -> bool {
    nt_funcs::is_prime64(n)
}

/// Returns `Err(NotPrime)` unless `n` is prime.
pub fn require_prime(n: &BigUint) -> Result<()> {
    if is_prime(n) {
        Ok(())
    } else {
        Err(Error::NotPrime(n.clone()))
    }
}

/// Exponent `k` with `q = p^k`, or `None` if `q` is not a power of `p`.
/// Trial division only; both arguments are expected to be small.
pub fn prime_power_exponent(q: u64, p: u64) -> Option<u32> {
    if p < 2 || q < p {
        return None;
    }
    let mut rest = q;
    let mut k = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some(k)
}

/// Positive divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut i = 1;
    while i * i <= n {
        if n.is_multiple_of(i) {
            small.push(i);
            if i * i != n {
                large.push(n / i);
            }
        }
        i += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Möbius function.
pub fn moebius(n: u64) -> i8 {
    let mut n = n;
    let mut sign = 1i8;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// `b^k - 1` for `b ≥ 1`.
pub fn pow_minus_one(b: &BigUint, k: u64) -> BigUint {
    num_traits::pow(b.clone(), k as usize) - BigUint::one()
}

/// Value of the `k`-th cyclotomic polynomial at `b ≥ 2`, via
/// `Φ_k(b) = ∏_{j | k} (b^j − 1)^{μ(k/j)}`.
pub fn cyclotomic_value(k: u64, b: &BigUint) -> BigUint {
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for j in divisors(k) {
        match moebius(k / j) {
            1 => num *= pow_minus_one(b, j),
            -1 => den *= pow_minus_one(b, j),
            _ => {}
        }
    }
    let (q, r) = num.div_rem(&den);
    debug_assert!(r.is_zero());
    q
}

/// Multiplicative order of `b` modulo a prime `l` not dividing `b`.
/// Scans `b, b², …`, so only meant for the bounded orders met here.
pub fn order_mod_upto(b: &BigUint, l: &BigUint, bound: u64) -> Option<u64> {
    let base = b % l;
    if base.is_zero() {
        return None;
    }
    let mut acc = base.clone();
    for i in 1..=bound {
        if acc.is_one() {
            return Some(i);
        }
        acc = (&acc * &base) % l;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn factors_16383() {
        let f = factorize(&big(16383)).unwrap();
        assert_eq!(f, vec![(big(3), 1), (big(43), 1), (big(127), 1)]);
    }

    #[test]
    fn factors_large_product() {
        // 3^14 - 1 = 2^3 · 547 · 1093
        let n = pow_minus_one(&big(3), 14);
        assert_eq!(
            factorize(&n).unwrap(),
            vec![(big(2), 3), (big(547), 1), (big(1093), 1)]
        );
        // 30^24 - 1 does not fit in u64
        let n = pow_minus_one(&big(30), 24);
        let f = factorize(&n).unwrap();
        let back = f.iter().fold(BigUint::one(), |acc, (p, e)| {
            acc * num_traits::pow(p.clone(), *e as usize)
        });
        assert_eq!(back, n);
        assert!(f.iter().all(|(p, _)| is_prime(p)));
    }

    #[test]
    fn one_and_zero() {
        assert!(factorize(&big(1)).unwrap().is_empty());
        assert!(factorize(&big(0)).is_err());
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power_exponent(9, 3), Some(2));
        assert_eq!(prime_power_exponent(3, 3), Some(1));
        assert_eq!(prime_power_exponent(12, 2), None);
        assert_eq!(prime_power_exponent(1, 2), None);
    }

    #[test]
    fn moebius_and_divisors() {
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(
            (1..=10).map(moebius).collect::<Vec<_>>(),
            vec![1, -1, -1, 0, -1, 1, -1, 0, 0, 1]
        );
    }

    #[test]
    fn cyclotomic_values() {
        assert_eq!(cyclotomic_value(1, &big(2)), big(1));
        assert_eq!(cyclotomic_value(6, &big(2)), big(3));
        assert_eq!(cyclotomic_value(14, &big(2)), big(43));
        assert_eq!(cyclotomic_value(12, &big(10)), big(9901));
    }

    #[test]
    fn orders() {
        assert_eq!(order_mod_upto(&big(2), &big(43), 100), Some(14));
        assert_eq!(order_mod_upto(&big(3), &big(547), 100), Some(14));
        assert_eq!(order_mod_upto(&big(3), &big(3), 100), None);
    }
}
