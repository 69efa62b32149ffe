//! Dense univariate polynomials over ℤ, ℚ and prime fields (coefficients ascending).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use crate::arith::{divisors, mod_inv, mod_pow};

fn trim<T: Zero>(v: &mut Vec<T>) {
    while v.last().is_some_and(|x| x.is_zero()) {
        v.pop();
    }
}

static CYCLO: OnceLock<Mutex<HashMap<u64, Arc<Vec<BigInt>>>>> = OnceLock::new();

/// The cyclotomic polynomial Φ_m (memoized).
pub fn cyclotomic_poly(m: u64) -> Arc<Vec<BigInt>> {
    assert!(m >= 1);
    let table = CYCLO.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = table.lock().unwrap().get(&m) {
        return p.clone();
    }
    let mut num = vec![BigInt::zero(); m as usize + 1];
    num[0] = BigInt::from(-1);
    num[m as usize] = BigInt::one();
    for d in divisors(m) {
        if d < m {
            let phi_d = cyclotomic_poly(d);
            num = divide_monic_exact(&num, &phi_d);
        }
    }
    let p = Arc::new(num);
    table.lock().unwrap().insert(m, p.clone());
    p
}

/// Exact quotient of integer polynomials by a monic divisor.
pub fn divide_monic_exact(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let db = b.len() - 1;
    let mut r = a.to_vec();
    trim(&mut r);
    if r.len() <= db {
        return vec![];
    }
    let mut q = vec![BigInt::zero(); r.len() - db];
    for i in (0..q.len()).rev() {
        let c = r[i + db].clone();
        if c.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            r[i + j] -= &c * bj;
        }
        q[i] = c;
    }
    debug_assert!(r.iter().all(|x| x.is_zero()));
    q
}

/// Reduce `v` in place modulo a monic integer polynomial.
pub fn reduce_mod_monic<T>(v: &mut Vec<T>, modulus: &[BigInt])
where
    T: Clone + Zero + for<'a> std::ops::SubAssign<&'a T> + std::ops::Mul<BigInt, Output = T>,
{
    let d = modulus.len() - 1;
    if v.len() <= d {
        v.resize(d, T::zero());
        return;
    }
    for i in (d..v.len()).rev() {
        if v[i].is_zero() {
            continue;
        }
        let c = v[i].clone();
        for (j, mj) in modulus.iter().enumerate().take(d) {
            if !mj.is_zero() {
                let t = c.clone() * mj.clone();
                v[i - d + j] -= &t;
            }
        }
        v[i] = T::zero();
    }
    v.truncate(d);
}

pub type QPoly = Vec<BigRational>;

pub fn qpoly_mul(a: &[BigRational], b: &[BigRational]) -> QPoly {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    trim(&mut out);
    out
}

pub fn qpoly_divrem(a: &[BigRational], b: &[BigRational]) -> (QPoly, QPoly) {
    let mut b = b.to_vec();
    trim(&mut b);
    assert!(!b.is_empty(), "division by zero polynomial");
    let mut r = a.to_vec();
    trim(&mut r);
    if r.len() < b.len() {
        return (vec![], r);
    }
    let db = b.len() - 1;
    let lead_inv = b[db].recip();
    let mut q = vec![BigRational::zero(); r.len() - db];
    for i in (0..q.len()).rev() {
        let c = &r[i + db] * &lead_inv;
        if c.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            r[i + j] -= &c * bj;
        }
        q[i] = c;
    }
    trim(&mut r);
    trim(&mut q);
    (q, r)
}

/// Returns `(g, s)` with `g = gcd(a, b)` monic and `s·a ≡ g (mod b)`.
pub fn qpoly_gcd_inverse(a: &[BigRational], b: &[BigRational]) -> (QPoly, QPoly) {
    let mut r0 = b.to_vec();
    let mut r1 = a.to_vec();
    trim(&mut r0);
    trim(&mut r1);
    let mut s0: QPoly = vec![];
    let mut s1: QPoly = vec![BigRational::one()];
    while !r1.is_empty() {
        let (q, r) = qpoly_divrem(&r0, &r1);
        let qs = qpoly_mul(&q, &s1);
        let mut s2 = s0.clone();
        if s2.len() < qs.len() {
            s2.resize(qs.len(), BigRational::zero());
        }
        for (i, x) in qs.iter().enumerate() {
            s2[i] -= x;
        }
        trim(&mut s2);
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s2;
    }
    let lead = r0.last().cloned().unwrap_or_else(BigRational::one).recip();
    let g = r0.iter().map(|x| x * &lead).collect();
    let s = s0.iter().map(|x| x * &lead).collect();
    (g, s)
}

// ---------- polynomials over F_p ----------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpPoly {
    pub p: u64,
    pub c: Vec<u64>,
}

impl FpPoly {
    pub fn new(p: u64, mut c: Vec<u64>) -> Self {
        for x in c.iter_mut() {
            *x %= p;
        }
        trim(&mut c);
        FpPoly { p, c }
    }

    pub fn from_ints(p: u64, c: &[BigInt]) -> Self {
        let pb = BigInt::from(p);
        let v = c
            .iter()
            .map(|x| u64::try_from(x.mod_floor(&pb)).unwrap())
            .collect();
        FpPoly::new(p, v)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    fn mulmod(&self, a: u64, b: u64) -> u64 {
        (a as u128 * b as u128 % self.p as u128) as u64
    }

    pub fn mul(&self, o: &FpPoly) -> FpPoly {
        if self.is_zero() || o.is_zero() {
            return FpPoly::new(self.p, vec![]);
        }
        let mut out = vec![0u64; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                out[i + j] = (out[i + j] + self.mulmod(a, b)) % self.p;
            }
        }
        FpPoly::new(self.p, out)
    }

    pub fn sub(&self, o: &FpPoly) -> FpPoly {
        let n = self.c.len().max(o.c.len());
        let v = (0..n)
            .map(|i| {
                let a = self.c.get(i).copied().unwrap_or(0);
                let b = o.c.get(i).copied().unwrap_or(0);
                (a + self.p - b) % self.p
            })
            .collect();
        FpPoly::new(self.p, v)
    }

    pub fn divrem(&self, d: &FpPoly) -> (FpPoly, FpPoly) {
        let dd = d.degree().expect("division by zero polynomial");
        let inv = mod_inv(d.c[dd], self.p).unwrap();
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (FpPoly::new(self.p, vec![]), self.clone());
        }
        let mut q = vec![0u64; r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = self.mulmod(r[i + dd], inv);
            if c == 0 {
                continue;
            }
            for (j, &b) in d.c.iter().enumerate() {
                r[i + j] = (r[i + j] + self.p - self.mulmod(c, b)) % self.p;
            }
            q[i] = c;
        }
        (FpPoly::new(self.p, q), FpPoly::new(self.p, r))
    }

    pub fn rem(&self, d: &FpPoly) -> FpPoly {
        self.divrem(d).1
    }

    pub fn monic(&self) -> FpPoly {
        match self.c.last() {
            None => self.clone(),
            Some(&l) => {
                let inv = mod_inv(l, self.p).unwrap();
                FpPoly::new(self.p, self.c.iter().map(|&x| self.mulmod(x, inv)).collect())
            }
        }
    }

    pub fn gcd(&self, o: &FpPoly) -> FpPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn powmod(&self, mut e: u128, m: &FpPoly) -> FpPoly {
        let mut base = self.rem(m);
        let mut acc = FpPoly::new(self.p, vec![1]);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(m);
            }
            base = base.mul(&base).rem(m);
            e >>= 1;
        }
        acc
    }
}

/// Splits a squarefree monic `f` all of whose irreducible factors have degree `d`
/// (Cantor–Zassenhaus, odd `p`; trace map for `p = 2`). Factors are returned sorted.
pub fn equal_degree_factors<R: Rng>(f: &FpPoly, d: usize, rng: &mut R) -> Vec<FpPoly> {
    let n = f.degree().unwrap_or(0);
    if n == 0 {
        return vec![];
    }
    if n == d {
        return vec![f.monic()];
    }
    let p = f.p;
    loop {
        let a = FpPoly::new(p, (0..n).map(|_| rng.gen_range(0..p)).collect());
        if a.degree().unwrap_or(0) == 0 {
            continue;
        }
        let g = a.gcd(f);
        let cand = if g.degree().unwrap_or(0) > 0 {
            g
        } else if p == 2 {
            // T(a) = a + a^2 + ... + a^{2^{d-1}}
            let mut t = a.rem(f);
            let mut acc = t.clone();
            for _ in 1..d {
                t = t.mul(&t).rem(f);
                acc = FpPoly::new(p, {
                    let mut v = acc.c.clone();
                    v.resize(v.len().max(t.c.len()), 0);
                    for (i, &x) in t.c.iter().enumerate() {
                        v[i] ^= x;
                    }
                    v
                });
            }
            acc.gcd(f)
        } else {
            let e = ((p as u128).pow(d as u32) - 1) / 2;
            let b = a.powmod(e, f).sub(&FpPoly::new(p, vec![1]));
            b.gcd(f)
        };
        let dg = cand.degree().unwrap_or(0);
        if dg > 0 && dg < n {
            let other = f.divrem(&cand).0;
            let mut out = equal_degree_factors(&cand, d, rng);
            out.extend(equal_degree_factors(&other, d, rng));
            out.sort_by(|x, y| x.c.cmp(&y.c));
            return out;
        }
    }
}

/// Irreducible monic factors of Φ_{m'} mod ℓ for ℓ ∤ m'. All have degree ord_{m'}(ℓ).
pub fn cyclotomic_factors_mod(m_prime: u64, ell: u64) -> Vec<FpPoly> {
    use rand::SeedableRng;
    let f = FpPoly::from_ints(ell, &cyclotomic_poly(m_prime));
    if m_prime == 1 {
        return vec![f];
    }
    let d = crate::arith::multiplicative_order(ell % m_prime, m_prime) as usize;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(m_prime * 1_000_003 + ell);
    equal_degree_factors(&f, d, &mut rng)
}

/// `x^k mod p` helper used by residue-field arithmetic.
pub fn fp_pow(x: u64, k: u64, p: u64) -> u64 {
    mod_pow(x, k, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn small_cyclotomics() {
        assert_eq!(*cyclotomic_poly(1), ints(&[-1, 1]));
        assert_eq!(*cyclotomic_poly(4), ints(&[1, 0, 1]));
        assert_eq!(*cyclotomic_poly(6), ints(&[1, -1, 1]));
        assert_eq!(*cyclotomic_poly(12), ints(&[1, 0, -1, 0, 1]));
        // Φ_105 is the first with a coefficient -2
        assert!(cyclotomic_poly(105).contains(&BigInt::from(-2)));
    }

    #[test]
    fn factor_phi_mod_primes() {
        // Φ_7 mod 2 = (x^3+x+1)(x^3+x^2+1)
        let f = cyclotomic_factors_mod(7, 2);
        assert_eq!(f.len(), 2);
        assert_eq!(f[0].c, vec![1, 0, 1, 1]);
        assert_eq!(f[1].c, vec![1, 1, 0, 1]);
        // Φ_5 mod 11 splits into linear factors
        let f = cyclotomic_factors_mod(5, 11);
        assert_eq!(f.len(), 4);
        let prod = f.iter().fold(FpPoly::new(11, vec![1]), |a, b| a.mul(b));
        assert_eq!(prod, FpPoly::from_ints(11, &cyclotomic_poly(5)));
    }

    #[test]
    fn rational_inverse_mod() {
        let q = |v: &[i64]| -> QPoly { v.iter().map(|&x| BigRational::from_integer(x.into())).collect() };
        // (1 - x) inverse mod Φ_3 = x^2+x+1: (1-x)(x+2)/3 = (2 - x - x^2)/3 ≡ 1
        let (g, s) = qpoly_gcd_inverse(&q(&[1, -1]), &q(&[1, 1, 1]));
        assert_eq!(g, q(&[1]));
        let prod = qpoly_mul(&s, &q(&[1, -1]));
        let (_, r) = qpoly_divrem(&prod, &q(&[1, 1, 1]));
        assert_eq!(r, q(&[1]));
    }
}
