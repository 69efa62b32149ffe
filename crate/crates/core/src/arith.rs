//! Elementary number theory on machine integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}

/// Prime factorization by trial division, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn prime_divisors(n: u64) -> Vec<u64> {
    factorize(n).into_iter().map(|(p, _)| p).collect()
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n).len() == 1 && factorize(n)[0].1 == 1
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    (2..=n).filter(|&k| is_prime(k)).collect()
}

/// Returns `(p, a)` if `n = p^a` with `a ≥ 1`.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    let f = factorize(n);
    if f.len() == 1 {
        Some(f[0])
    } else {
        None
    }
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

pub fn mobius(n: u64) -> i64 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut d: Vec<u64> = (1..=n).filter(|k| n % k == 0).collect();
    d.sort_unstable();
    d
}

pub fn mod_pow(b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r: u128 = 1;
    let mut bb = (b % m) as u128;
    let mm = m as u128;
    while e > 0 {
        if e & 1 == 1 {
            r = r * bb % mm;
        }
        bb = bb * bb % mm;
        e >>= 1;
    }
    r as u64
}

pub fn mod_inv(a: u64, m: u64) -> Option<u64> {
    let e = (a as i128).extended_gcd(&(m as i128));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m as i128) as u64)
}

pub fn multiplicative_order(a: u64, m: u64) -> u64 {
    assert!(gcd(a, m) == 1, "element not a unit");
    if m == 1 {
        return 1;
    }
    let mut k = 1;
    let mut x = a % m;
    while x != 1 {
        x = (x as u128 * a as u128 % m as u128) as u64;
        k += 1;
    }
    k
}

/// `p`-adic valuation of a nonzero big integer.
pub fn valuation(n: &BigInt, p: u64) -> Option<u32> {
    if n.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut v = 0;
    let mut x = n.abs();
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        v += 1;
        x = q;
    }
}

/// Ramanujan sum `c_d(j) = Tr_{ℚ(ζ_d)/ℚ}(ζ_d^j)`.
pub fn ramanujan_sum(d: u64, j: u64) -> i64 {
    let g = gcd(d, j % d);
    let g = if j % d == 0 { d } else { g };
    let q = d / g;
    mobius(q) * (euler_phi(d) / euler_phi(q)) as i64
}

/// Exact Bernoulli numbers `B_0..=B_n` with `B_1 = -1/2`.
pub fn bernoulli_numbers(n: usize) -> Vec<num_rational::BigRational> {
    use num_rational::BigRational;
    let mut b: Vec<BigRational> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        if k == 0 {
            b.push(BigRational::one());
            continue;
        }
        // Σ_{j<k+1} C(k+1, j) B_j = 0
        let mut s = BigRational::zero();
        let mut binom = BigInt::one();
        for (j, bj) in b.iter().enumerate() {
            s += BigRational::from_integer(binom.clone()) * bj;
            binom = binom * BigInt::from(k + 1 - j) / BigInt::from(j + 1);
        }
        b.push(-s / BigRational::from_integer(BigInt::from(k + 1)));
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_and_mobius() {
        assert_eq!(euler_phi(120), 32);
        assert_eq!(euler_phi(1), 1);
        assert_eq!(mobius(30), -1);
        assert_eq!(mobius(12), 0);
    }

    #[test]
    fn ramanujan_sums_match_direct_traces() {
        // c_12(j) computed from cos sums
        for j in 0..24u64 {
            let direct: f64 = (1..=12u64)
                .filter(|a| gcd(*a, 12) == 1)
                .map(|a| (2.0 * std::f64::consts::PI * (a * j) as f64 / 12.0).cos())
                .sum();
            assert_eq!(ramanujan_sum(12, j) as f64, direct.round());
        }
    }

    #[test]
    fn bernoulli_small() {
        let b = bernoulli_numbers(6);
        assert_eq!(b[1].to_string(), "-1/2");
        assert_eq!(b[2].to_string(), "1/6");
        assert_eq!(b[4].to_string(), "-1/30");
        assert_eq!(b[6].to_string(), "1/42");
    }

    #[test]
    fn orders_and_inverses() {
        assert_eq!(multiplicative_order(2, 7), 3);
        assert_eq!(mod_inv(3, 7), Some(5));
        assert_eq!(mod_inv(2, 4), None);
    }
}
