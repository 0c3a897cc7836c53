//! Small number-theoretic helpers shared across the crate: primality by trial
//! division (inputs here are desk-scale), a linear Moebius sieve, factorials,
//! and the generalized binomial coefficient for integer upper argument.

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Trial-division primality for `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    // 2/3/5 wheel.
    let increments = [4u64, 2, 4, 2, 4, 6, 2, 6];
    let mut d = 7u64;
    let mut idx = 0;
    while d.checked_mul(d).map_or(false, |sq| sq <= n) {
        if n % d == 0 {
            return false;
        }
        d += increments[idx];
        idx = (idx + 1) % increments.len();
    }
    true
}

/// Moebius function values for `0..=n` (index 0 is set to 0), by linear sieve.
pub fn mobius_table(n: usize) -> Vec<i8> {
    let mut mu = vec![1i8; n + 1];
    if !mu.is_empty() {
        mu[0] = 0;
    }
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i);
            mu[i] = -1;
        }
        for &p in &primes {
            let ip = match i.checked_mul(p) {
                Some(v) if v <= n => v,
                _ => break,
            };
            composite[ip] = true;
            if i % p == 0 {
                mu[ip] = 0;
                break;
            }
            mu[ip] = -mu[i];
        }
    }
    mu
}

/// Generalized binomial coefficient `C(top, k)` for integer `top` (possibly
/// negative). Every intermediate step divides exactly.
pub fn binomial(top: &BigInt, k: usize) -> BigInt {
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * (top - BigInt::from(j)) / BigInt::from(j + 1);
    }
    acc
}

/// `C(n, k)` for machine-sized nonnegative arguments.
pub fn binomial_u64(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    binomial(&BigInt::from(n), k as usize)
}

/// Number of degree-`k` monomials in `m` variables, i.e. the dimension of the
/// k-th symmetric power of an m-dimensional space: `C(m + k - 1, k)`. Defined
/// for any integer `m` via the generalized binomial.
pub fn symmetric_power_count(m: &BigInt, k: usize) -> BigInt {
    binomial(&(m + BigInt::from(k) - BigInt::one()), k)
}

pub fn factorial(k: usize) -> BigInt {
    let mut acc = BigInt::one();
    for j in 2..=k {
        acc *= BigInt::from(j);
    }
    acc
}
