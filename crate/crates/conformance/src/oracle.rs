//! Brute-force reference computations, written against machine integers
//! and sharing no code paths with `jlres` beyond the factorizer backend.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

pub fn order(x: u64, m: u64) -> u64 {
    m / x.gcd(&m)
}

pub fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Orbit of `x` under multiplication by `q` modulo `m`, sorted.
pub fn orbit(x: u64, q: u64, m: u64) -> Vec<u64> {
    let mut out = vec![x % m];
    let mut y = mulmod(x, q, m);
    while y != x % m {
        out.push(y);
        y = mulmod(y, q, m);
    }
    out.sort_unstable();
    out
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn is_power_of(mut x: u64, ell: u64) -> bool {
    while x.is_multiple_of(ell) {
        x /= ell;
    }
    x == 1
}

/// Every `x` mod `m` with `ord(x)` prime to `ℓ` and `ord(a − x)` an `ℓ`-power.
pub fn regular_part_candidates(a: u64, ell: u64, m: u64) -> Vec<u64> {
    (0..m)
        .filter(|&x| {
            !order(x, m).is_multiple_of(ell) && is_power_of(order((a + m - x) % m, m), ell)
        })
        .collect()
}

/// The `ℓ`-regular part, found by walking `a + j·m'` for `m = ℓ^t·m'`.
pub fn regular_part(a: u64, ell: u64, m: u64) -> u64 {
    let mut lt = 1;
    while m.is_multiple_of(lt * ell) {
        lt *= ell;
    }
    let mp = m / lt;
    (0..lt)
        .map(|j| (a as u128 + j as u128 * mp as u128) % m as u128)
        .map(|x| x as u64)
        .find(|x| x % lt == 0)
        .expect("CRT solution exists")
}

/// `b^i − 1`.
pub fn pow_minus_one(b: u64, i: u64) -> BigUint {
    num_traits::pow(BigUint::from(b), i as usize) - BigUint::one()
}

/// Smallest prime dividing `b^r − 1` but no `b^i − 1` with `i < r`, from a
/// full factorization of `b^r − 1`. `Err` on incomplete factorization.
pub fn primitive_prime(b: u64, r: u64) -> Result<Option<BigUint>, String> {
    let n = pow_minus_one(b, r);
    let (found, rest) = num_prime::nt_funcs::factors(n.clone(), None);
    if rest.is_some() {
        return Err(format!("could not factor {b}^{r} − 1"));
    }
    let mut primes: Vec<BigUint> = found.into_keys().collect();
    primes.sort();
    Ok(primes
        .into_iter()
        .find(|p| (1..r).all(|i| !(pow_minus_one(b, i) % p).is_zero())))
}

pub fn ord_mod(b: u64, ell: u64) -> u64 {
    let mut x = b % ell;
    let mut k = 1;
    while x != 1 {
        x = mulmod(x, b, ell);
        k += 1;
    }
    k
}

/// Independent derivation of a shape: `(Q, n', m', d', y)` or `None`
/// when the shape is invalid or not essentially tame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShapeOracle {
    pub big_q: u64,
    pub n: u64,
    pub n_prime: u64,
    pub m_prime: u64,
    pub d_prime: u64,
    pub y: u64,
}

pub fn shape(p: u64, q: u64, e: u64, f: u64, m: u64, d: u64) -> Option<ShapeOracle> {
    if e.is_multiple_of(p) {
        return None;
    }
    let g = e * f;
    let n = m * d;
    let c = d.gcd(&g);
    if !n.is_multiple_of(g) || !(m * c).is_multiple_of(g) {
        return None;
    }
    let d_prime = d / c;
    let m_prime = m * c / g;
    let n_prime = n / g;
    // y = m(d−1) + m'(d'−1) + u(v−1), v = d/gcd(d, n/e), u = e/v
    let w = n / e;
    let v = d / d.gcd(&w);
    if !e.is_multiple_of(v) {
        return None;
    }
    let u = e / v;
    let y = m * (d - 1) + m_prime * (d_prime - 1) + u * (v - 1);
    Some(ShapeOracle {
        big_q: q.pow(f as u32),
        n,
        n_prime,
        m_prime,
        d_prime,
        y,
    })
}

/// Exponent of the rectifier at `Q^{n'} − 1` under the oracle's own reading
/// of the parity rule.
pub fn rectifier_exponent(p: u64, s: &ShapeOracle) -> BigUint {
    let m = pow_minus_one(s.big_q, s.n_prime);
    if p != 2 && s.y % 2 == 1 {
        m / 2u32
    } else {
        BigUint::zero()
    }
}

pub fn as_u64(x: &BigUint) -> u64 {
    x.to_u64().expect("fits in u64")
}
