//! Exact ℚ-coordinates for products of cyclotomic numbers at a fixed level.
//!
//! The symbols are [k] = 1 − ζ_L^k (1 ≤ k < L) and a symbol per rational prime. Their relations
//! in ℚ ⊗ ℚ(ζ_L)^× are spanned by evenness, the distribution relations and the values Φ_d(1);
//! coordinates are taken in the dual of the saturated relation lattice.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::arith::{factorize, gcd, lcm, prime_divisors, prime_power};
use crate::cyclotomic::{lift_residue, CycElement, MultiUnit};
use crate::error::{Error, Result};
use crate::linalg::{left_kernel, transpose, IntMatrix};

/// Largest level accepted; the coordinate matrix has about L rows.
pub const MAX_SYMBOL_LEVEL: u64 = 512;

#[derive(Clone, Debug)]
pub struct SymbolSpace {
    level: u64,
    primes: Vec<u64>,
    /// Rows y_j with c_j(x) = ⟨y_j, x⟩.
    coords: IntMatrix,
}

impl SymbolSpace {
    /// Symbols at level `level` with prime symbols for the divisors of the level and `extra_primes`.
    pub fn new(level: u64, extra_primes: &[u64]) -> Result<Self> {
        if level == 0 || level > MAX_SYMBOL_LEVEL {
            return Err(Error::ResourceGuard(format!("symbol level {level} outside 1..={MAX_SYMBOL_LEVEL}")));
        }
        let mut primes = prime_divisors(level);
        primes.extend_from_slice(extra_primes);
        primes.sort_unstable();
        primes.dedup();
        let l = level as usize;
        let n = l.saturating_sub(1) + primes.len();
        let sym = |k: u64| (k % level) as usize - 1;
        let prime_sym = |p: u64| l - 1 + primes.binary_search(&p).unwrap();
        let mut rels: Vec<Vec<i64>> = Vec::new();
        let mut push = |r: BTreeMap<usize, i64>| {
            if r.values().any(|&c| c != 0) {
                let mut v = vec![0i64; n];
                for (i, c) in r {
                    v[i] += c;
                }
                rels.push(v);
            }
        };
        for k in 1..level {
            if k < level - k {
                push(BTreeMap::from([(sym(k), 1), (sym(level - k), -1)]));
            }
        }
        for ell in prime_divisors(level) {
            let step = level / ell;
            for k in 1..level {
                if (ell * k) % level == 0 {
                    continue;
                }
                let mut r = BTreeMap::new();
                *r.entry(sym(ell * k)).or_insert(0) += 1;
                for j in 0..ell {
                    *r.entry(sym(k + j * step)).or_insert(0) -= 1;
                }
                push(r);
            }
        }
        for d in crate::arith::divisors(level) {
            if d == 1 {
                continue;
            }
            let mut r = BTreeMap::new();
            for k in 1..level {
                if level / gcd(k, level) == d {
                    *r.entry(sym(k)).or_insert(0) += 1;
                }
            }
            if let Some((p, _)) = prime_power(d) {
                *r.entry(prime_sym(p)).or_insert(0) -= 1;
            }
            push(r);
        }
        let coords = if rels.is_empty() {
            crate::linalg::identity(n)
        } else {
            let r: IntMatrix = rels.iter().map(|v| v.iter().map(|&x| BigInt::from(x)).collect()).collect();
            left_kernel(&transpose(&r, n), r.len())
        };
        Ok(SymbolSpace { level, primes, coords })
    }

    /// A space large enough for every factor of the given units.
    pub fn for_units(units: &[&MultiUnit]) -> Result<Self> {
        let mut level = 1;
        let mut primes = Vec::new();
        for u in units {
            level = lcm(level, u.field().conductor());
            for (x, _) in u.factors() {
                level = lcm(level, x.level());
                match x {
                    CycElement::Product { scalar, .. } => primes.extend(scalar_primes(scalar)?.into_iter().map(|(p, _)| p)),
                    CycElement::Dense(_) => return Err(dense_error()),
                }
            }
        }
        Self::new(level, &primes)
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Dimension of the ℚ-span of the symbols.
    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn n_symbols(&self) -> usize {
        self.level as usize - 1 + self.primes.len()
    }

    /// Symbol vector of σ_a(x) for a product-form x whose level divides the space level; `a` is
    /// a unit modulo the space level.
    pub fn symbol_vector(&self, x: &CycElement, a: u64) -> Result<Vec<BigInt>> {
        let CycElement::Product { level, scalar, terms } = x else {
            return Err(dense_error());
        };
        if self.level % level != 0 {
            return Err(Error::InvalidArgument(format!("level {level} does not divide {}", self.level)));
        }
        if gcd(a, self.level) != 1 {
            return Err(Error::InvalidArgument(format!("{a} is not a unit modulo {}", self.level)));
        }
        let mut v = vec![BigInt::zero(); self.n_symbols()];
        let step = self.level / level;
        for (&k, &e) in terms {
            let j = (k * step % self.level) * (a % self.level) % self.level;
            v[j as usize - 1] += e;
        }
        for (p, e) in scalar_primes(scalar)? {
            let i = self
                .primes
                .binary_search(&p)
                .map_err(|_| Error::InvalidArgument(format!("no symbol for the prime {p}")))?;
            v[self.level as usize - 1 + i] += e;
        }
        Ok(v)
    }

    pub fn coordinates(&self, sym: &[BigInt]) -> Vec<BigInt> {
        self.coords
            .iter()
            .map(|y| y.iter().zip(sym).filter(|(a, _)| !a.is_zero()).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Coordinates of σ_a(x).
    pub fn element_coordinates(&self, x: &CycElement, a: u64) -> Result<Vec<BigInt>> {
        Ok(self.coordinates(&self.symbol_vector(x, a)?))
    }

    /// Coordinates of a unit whose factors are all in product form.
    pub fn unit_coordinates(&self, u: &MultiUnit) -> Result<Vec<BigRational>> {
        let e = u.field();
        let g = e.galois_group();
        let mut acc = vec![BigRational::zero(); self.rank()];
        for (x, lam) in u.factors() {
            for s in g.elements() {
                let c = lam.coeff(s);
                if c.is_zero() {
                    continue;
                }
                let a = lift_residue(e.representative(s), e.conductor(), self.level);
                for (t, y) in acc.iter_mut().zip(self.element_coordinates(x, a)?) {
                    *t += c * BigRational::from_integer(y);
                }
            }
        }
        Ok(acc)
    }
}

fn dense_error() -> Error {
    Error::Precondition("exact unit coordinates need factors in product form".into())
}

/// Prime factorization of |q| with signed exponents.
fn scalar_primes(q: &BigRational) -> Result<Vec<(u64, i64)>> {
    let mut out = Vec::new();
    for (n, sign) in [(q.numer(), 1i64), (q.denom(), -1i64)] {
        let n = n
            .abs()
            .to_u64()
            .ok_or_else(|| Error::ResourceGuard("scalar too large to factor".into()))?;
        for (p, e) in factorize(n) {
            out.push((p, sign * e as i64));
        }
    }
    Ok(out)
}

impl SymbolSpace {
    /// Whether two units agree in ℚ ⊗ E^×, compared through coordinates.
    pub fn same_unit(&self, u: &MultiUnit, v: &MultiUnit) -> Result<bool> {
        Ok(self.unit_coordinates(u)? == self.unit_coordinates(v)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::euler_phi;
    use crate::field::AbelianField;
    use num_traits::One;

    fn omega(n: u64) -> usize {
        prime_divisors(n).len()
    }

    #[test]
    fn rank_matches_cyclotomic_s_units() {
        for level in [3u64, 4, 5, 7, 8, 9, 12, 15, 16, 20, 21, 24, 30, 36] {
            let s = SymbolSpace::new(level, &[]).unwrap();
            let expected = euler_phi(level) as usize / 2 - 1 + omega(level);
            assert_eq!(s.rank(), expected, "level {level}");
        }
    }

    #[test]
    fn norm_of_one_minus_zeta_is_the_prime() {
        let s = SymbolSpace::new(5, &[]).unwrap();
        let x = CycElement::one_minus_zeta(5, 1).unwrap();
        let n = x.relative_norm(&AbelianField::rationals(), None).unwrap();
        let five = CycElement::constant(BigRational::from_integer(5.into())).unwrap();
        assert_eq!(s.element_coordinates(&n, 1).unwrap(), s.element_coordinates(&five, 1).unwrap());
    }

    #[test]
    fn extra_primes_are_free() {
        let s = SymbolSpace::new(5, &[7]).unwrap();
        assert_eq!(s.rank(), 3);
        let seven = CycElement::constant(BigRational::from_integer(7.into())).unwrap();
        assert!(s.element_coordinates(&seven, 1).unwrap().iter().any(|c| !c.is_zero()));
    }

    #[test]
    fn coordinates_agree_with_torsion_test() {
        let e = AbelianField::real_cyclotomic(12).unwrap();
        let x = CycElement::one_minus_zeta(12, 1).unwrap().relative_norm(&e, None).unwrap();
        let y = CycElement::one_minus_zeta(12, 5).unwrap().relative_norm(&e, None).unwrap();
        let u = MultiUnit::simple(&e, x, BigRational::one()).unwrap();
        let v = MultiUnit::simple(&e, y, BigRational::one()).unwrap();
        let s = SymbolSpace::for_units(&[&u, &v]).unwrap();
        assert_eq!(s.same_unit(&u, &v).unwrap(), u.equals(&v));
    }
}
