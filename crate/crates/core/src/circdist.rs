//! Circular distributions truncated at a level bound.
//!
//! A distribution stores one value f(ξ_n) ∈ ℚ(ζ_n)^× per level n ≥ 2, ξ_n = e^{2πi/n}; the value at
//! ξ_n^k is σ_k(f(ξ_{n'})) with n' the exact order, so equivariance holds by construction.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::json;

use crate::arith::{gcd, lcm, prime_divisors};
use crate::cycnum::{CycNumber, CyclicAccumulator};
use crate::cyclotomic::{radical_congruence, CycElement, MultiUnit};
use crate::error::{invalid, Error, Result};
use crate::eulersys::{EulerSystemSlice, Payload, RankedElement};
use crate::field::AbelianField;
use crate::groupring::RatGroupRing;
use crate::report::CheckReport;

#[derive(Clone, Debug)]
pub struct CircularDistribution {
    bound: u64,
    values: Vec<CycElement>,
}

fn minimal(x: CycElement) -> CycElement {
    match x {
        CycElement::Dense(d) => CycElement::Dense(d.minimal_level()),
        p => p,
    }
}

fn is_zero(x: &CycElement) -> bool {
    match x {
        CycElement::Dense(d) => d.is_zero(),
        CycElement::Product { scalar, .. } => scalar.is_zero(),
    }
}

impl CircularDistribution {
    /// Values for n = 2..=N; each must be nonzero and lie in ℚ(ζ_n).
    pub fn new(values: BTreeMap<u64, CycElement>) -> Result<Self> {
        let bound = values.keys().next_back().copied().unwrap_or(1);
        if bound < 2 || values.len() as u64 != bound - 1 || values.keys().next() != Some(&2) {
            return invalid("values must be given for every level 2..=N");
        }
        let mut out = Vec::with_capacity(values.len());
        for (n, x) in values {
            let x = minimal(x);
            if is_zero(&x) {
                return invalid(format!("the value at level {n} is zero"));
            }
            if n % x.level() != 0 {
                return invalid(format!("the value at level {n} does not lie in ℚ(ζ_{n})"));
            }
            out.push(x);
        }
        Ok(CircularDistribution { bound, values: out })
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// f(ξ_n).
    pub fn value(&self, n: u64) -> Result<&CycElement> {
        if n < 2 || n > self.bound {
            return Err(Error::LevelOutOfRange(format!("level {} exceeds the bound {}", n, self.bound)));
        }
        Ok(&self.values[(n - 2) as usize])
    }

    /// f(ξ_level^k) for k ≢ 0.
    pub fn value_at(&self, level: u64, k: u64) -> Result<CycElement> {
        let k = k % level;
        if k == 0 {
            return invalid("1 is not in μ*");
        }
        let g = gcd(k, level);
        let (d, kk) = (level / g, k / g);
        let v = self.value(d)?;
        let l = v.level();
        v.galois(if l <= 1 { 1 } else { kk % l })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.values
                .iter()
                .enumerate()
                .map(|(i, v)| json!([i as u64 + 2, v.to_json()]))
                .collect(),
        )
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let arr = v.as_array().ok_or_else(|| Error::Parse("a distribution is an array of [n, value] pairs".into()))?;
        let mut values = BTreeMap::new();
        for item in arr {
            let n = item[0].as_u64().ok_or_else(|| Error::Parse("level must be an integer".into()))?;
            if values.insert(n, CycElement::from_json(&item[1])?).is_some() {
                return Err(Error::Parse(format!("level {n} given twice")));
            }
        }
        Self::new(values)
    }
}

/// Φ(ζ) = 1 − ζ.
pub fn phi(n: u64) -> Result<CircularDistribution> {
    if n < 2 {
        return invalid("the level bound must be at least 2");
    }
    let values = (2..=n).map(|k| Ok((k, CycElement::one_minus_zeta(k, 1)?))).collect::<Result<_>>()?;
    CircularDistribution::new(values)
}

/// A set of odd primes: finite, or all of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OddPrimes {
    Finite(BTreeSet<u64>),
    All,
}

impl OddPrimes {
    fn contains(&self, p: u64) -> bool {
        match self {
            OddPrimes::Finite(s) => s.contains(&p),
            OddPrimes::All => p % 2 == 1,
        }
    }
}

/// δ_Π(ζ) = −1 when the order of ζ is divisible only by primes of Π, else 1.
pub fn delta(pi: &OddPrimes, n: u64) -> Result<CircularDistribution> {
    if let OddPrimes::Finite(s) = pi {
        if s.is_empty() || s.iter().any(|&p| p % 2 == 0 || !crate::arith::is_prime(p)) {
            return invalid("Π must be a nonempty set of odd primes");
        }
    }
    if n < 2 {
        return invalid("the level bound must be at least 2");
    }
    let values = (2..=n)
        .map(|k| {
            let s = if prime_divisors(k).iter().all(|&p| pi.contains(p)) { -1 } else { 1 };
            Ok((k, CycElement::constant(BigRational::from_integer(s.into()))?))
        })
        .collect::<Result<_>>()?;
    CircularDistribution::new(values)
}

/// Whether ∏ x_i^{e_i} = 1 exactly in ℚ(ζ_L)^×.
fn product_is_one(factors: &[(CycElement, i64)]) -> bool {
    let level = factors.iter().fold(1, |acc, (x, _)| lcm(acc, x.level()));
    let mut num = CyclicAccumulator::one(level);
    let mut den = CyclicAccumulator::one(level);
    let mut dense_num = CycNumber::one();
    let mut dense_den = CycNumber::one();
    let mut terms: BTreeMap<u64, i64> = BTreeMap::new();
    for (x, e) in factors {
        match x {
            CycElement::Product { level: l, scalar, terms: t } => {
                let step = level / l;
                for (&k, &c) in t {
                    *terms.entry(k * step % level).or_insert(0) += c * e;
                }
                let s = if *e >= 0 { scalar.clone() } else { scalar.recip() };
                let s = num_traits::pow(s, e.unsigned_abs() as usize);
                num.mul_int(s.numer());
                den.mul_int(s.denom());
            }
            CycElement::Dense(d) => {
                let p = d.pow(e.unsigned_abs());
                if *e >= 0 {
                    dense_num = dense_num.mul(&p);
                } else {
                    dense_den = dense_den.mul(&p);
                }
            }
        }
    }
    for (&k, &c) in &terms {
        let acc = if c > 0 { &mut num } else { &mut den };
        for _ in 0..c.unsigned_abs() {
            acc.mul_one_minus(k);
        }
    }
    num.to_cyc().mul(&dense_num) == den.to_cyc().mul(&dense_den)
}

/// ∏_{ζ^a = ξ_n} f(ζ) = f(ξ_n); the solutions are ξ_{na}^{1+nj}, j = 0..a−1.
pub fn check_distribution_axiom(f: &CircularDistribution, a: u64, n: u64) -> Result<bool> {
    if a == 0 || n < 2 {
        return invalid("need a ≥ 1 and n ≥ 2");
    }
    let na = n * a;
    if na > f.bound {
        return Err(Error::LevelOutOfRange(format!("level {} exceeds the bound {}", na, f.bound)));
    }
    let mut factors = Vec::with_capacity(a as usize + 1);
    for j in 0..a {
        factors.push((f.value_at(na, 1 + n * j)?, 1));
    }
    factors.push((f.value(n)?.clone(), -1));
    Ok(product_is_one(&factors))
}

/// f(εζ) ≡ f(ζ) modulo every prime above ℓ, for ε ∈ μ_ℓ and ζ ∈ μ_n primitive.
pub fn check_strict(f: &CircularDistribution, n: u64, ell: u64) -> Result<CheckReport> {
    if !crate::arith::is_prime(ell) || n % ell == 0 {
        return invalid(format!("need a prime ℓ not dividing n (n = {n}, ℓ = {ell})"));
    }
    if n < 2 {
        return invalid("n must be at least 2");
    }
    let level = n * ell;
    if level > f.bound {
        return Err(Error::LevelOutOfRange(format!("level {} exceeds the bound {}", level, f.bound)));
    }
    let subject = format!("n = {n}, ℓ = {ell}");
    let mut pairs = 0u64;
    for k in (1..n).filter(|&k| gcd(k, n) == 1) {
        let base = f.value_at(n, k)?.to_dense().lift(level);
        for j in 1..ell {
            // εζ = ξ_{nℓ}^{kℓ + jn}
            let other = f.value_at(level, k * ell + j * n)?.to_dense().lift(level);
            pairs += 1;
            if !radical_congruence(&other.sub(&base), ell)? {
                let w = json!({"zeta": format!("ξ_{n}^{k}"), "epsilon": format!("ξ_{ell}^{j}"), "pairs_checked": pairs});
                return Ok(CheckReport::new("strict", subject, false, w));
            }
        }
    }
    Ok(CheckReport::new("strict", subject, true, json!({"pairs_checked": pairs})))
}

/// c_{f,K} = N_{ℚ(ξ_m)/K}(f(ξ_m)) on real K, zero on complex K.
pub fn euler_system_of(f: &CircularDistribution, n: u64) -> Result<EulerSystemSlice> {
    if n > f.bound {
        return Err(Error::LevelOutOfRange(format!("level {} exceeds the bound {}", n, f.bound)));
    }
    EulerSystemSlice::from_fn(n, |k| euler_value(f, k))
}

pub fn euler_value(f: &CircularDistribution, k: &AbelianField) -> Result<RankedElement> {
    let payload = if k.is_real() {
        let x = f.value(k.conductor())?.relative_norm(k, None)?;
        Payload::Rank1(MultiUnit::simple(k, x, BigRational::one())?)
    } else {
        Payload::Rank0(RatGroupRing::zero(k.galois_group()))
    };
    RankedElement::new(k, payload)
}

/// λ_n ∈ ℤ[(ℤ/n)^×] for each level n ≤ N, as residue ↦ coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentFamily {
    levels: BTreeMap<u64, BTreeMap<u64, i64>>,
}

impl ExponentFamily {
    pub fn new(levels: BTreeMap<u64, BTreeMap<u64, i64>>) -> Result<Self> {
        for (&n, lam) in &levels {
            for &a in lam.keys() {
                if a >= n.max(2) || gcd(a, n) != 1 {
                    return invalid(format!("{a} is not a reduced unit modulo {n}"));
                }
            }
        }
        Ok(ExponentFamily { levels })
    }

    pub fn identity(n: u64) -> Self {
        ExponentFamily { levels: (2..=n).map(|k| (k, BTreeMap::from([(1, 1)]))).collect() }
    }

    /// σ_a at every level; `a` must be prime to every level.
    pub fn sigma(a: u64, n: u64) -> Result<Self> {
        Self::new((2..=n).map(|k| (k, BTreeMap::from([(a % k, 1)]))).collect())
    }

    /// The norm element of (ℤ/n)^× at every level.
    pub fn norm(n: u64) -> Self {
        let levels = (2..=n)
            .map(|k| (k, (1..k).filter(|&a| gcd(a, k) == 1).map(|a| (a, 1)).collect()))
            .collect();
        ExponentFamily { levels }
    }

    pub fn at(&self, n: u64) -> Option<&BTreeMap<u64, i64>> {
        self.levels.get(&n)
    }

    /// Compatibility under the projections (ℤ/n)^× → (ℤ/d)^× for d | n; returns an offending pair.
    pub fn incompatibility(&self) -> Option<(u64, u64)> {
        for (&n, lam) in &self.levels {
            for (&d, mu) in &self.levels {
                if d >= n || n % d != 0 {
                    continue;
                }
                let mut img: BTreeMap<u64, i64> = BTreeMap::new();
                for (&a, &c) in lam {
                    *img.entry(a % d).or_insert(0) += c;
                }
                img.retain(|_, c| *c != 0);
                let mu: BTreeMap<u64, i64> = mu.iter().filter(|(_, &c)| c != 0).map(|(&a, &c)| (a, c)).collect();
                if img != mu {
                    return Some((d, n));
                }
            }
        }
        None
    }
}

/// g(ξ_n) = ∏_a σ_a(f(ξ_n))^{λ_n(a)}; the family must be compatible.
pub fn apply_exponent(f: &CircularDistribution, lam: &ExponentFamily) -> Result<CircularDistribution> {
    if let Some((d, n)) = lam.incompatibility() {
        return invalid(format!("exponent family is incompatible between levels {d} and {n}"));
    }
    apply_exponent_unchecked(f, lam)
}

/// As `apply_exponent` without the compatibility requirement.
pub fn apply_exponent_unchecked(f: &CircularDistribution, lam: &ExponentFamily) -> Result<CircularDistribution> {
    let mut values = BTreeMap::new();
    for n in 2..=f.bound {
        let l = lam.at(n).ok_or_else(|| Error::InvalidArgument(format!("no exponent at level {n}")))?;
        let x = f.value(n)?;
        values.insert(n, power_combination(x, l, n)?);
    }
    CircularDistribution::new(values)
}

fn power_combination(x: &CycElement, lam: &BTreeMap<u64, i64>, n: u64) -> Result<CycElement> {
    let l = x.level();
    let red = |a: u64| if l <= 1 { 1 } else { a % l };
    if let CycElement::Product { .. } = x {
        let mut scalar = BigRational::one();
        let mut terms: BTreeMap<u64, i64> = BTreeMap::new();
        for (&a, &c) in lam {
            let CycElement::Product { scalar: s, terms: t, .. } = x.galois(red(a))? else { unreachable!() };
            let s = if c >= 0 { s } else { s.recip() };
            scalar *= num_traits::pow(s, c.unsigned_abs() as usize);
            for (k, e) in t {
                *terms.entry(k).or_insert(0) += e * c;
            }
        }
        terms.retain(|_, e| *e != 0);
        return Ok(CycElement::Product { level: l, scalar, terms });
    }
    let mut acc = CycNumber::one();
    for (&a, &c) in lam {
        let y = x.galois(red(a))?.to_dense();
        let p = y.pow(c.unsigned_abs());
        acc = if c >= 0 { acc.mul(&p) } else { acc.div(&p)? };
    }
    let _ = n;
    Ok(CycElement::Dense(acc))
}

/// Exact c_{Φ,K}² = ε_K⁴ on every real field of conductor in `from..=to`.
pub fn check_coleman_correspondence(from: u64, to: u64) -> Result<Vec<CheckReport>> {
    use rayon::prelude::*;
    let f = phi(to.max(2))?;
    let fields: Vec<AbelianField> = crate::field::enumerate_fields(to)
        .into_iter()
        .filter(|k| k.is_real() && k.conductor() >= from)
        .collect();
    fields
        .par_iter()
        .map(|k| {
            let Payload::Rank1(c) = euler_value(&f, k)?.payload().clone() else { unreachable!() };
            let Payload::Rank1(eps) = crate::eulersys::rubin_stark_element(k)?.payload().clone() else { unreachable!() };
            let two = BigRational::from_integer(BigInt::from(2));
            let four = BigRational::from_integer(BigInt::from(4));
            let ok = c.pow_rational(&two).equals(&eps.pow_rational(&four));
            Ok(CheckReport::new("coleman", k.label(), ok, json!({"conductor": k.conductor()})))
        })
        .collect()
}

#[allow(dead_code)]
fn sign_of(q: &BigRational) -> i32 {
    if q.is_negative() {
        -1
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_values() {
        let f = phi(12).unwrap();
        assert_eq!(f.value(2).unwrap().to_dense(), CycNumber::from_int(2));
        let i = CycNumber::zeta(4, 1);
        assert_eq!(f.value(4).unwrap().to_dense(), CycNumber::one().sub(&i));
        let p = f.value_at(6, 1).unwrap().to_dense().mul(&f.value_at(6, 5).unwrap().to_dense());
        assert_eq!(p, CycNumber::one());
        // non-primitive argument delegates to the lower level: ξ_12^4 = ξ_3
        assert_eq!(f.value_at(12, 4).unwrap().to_dense(), f.value(3).unwrap().to_dense());
    }

    #[test]
    fn delta_values() {
        let odd = delta(&OddPrimes::All, 15).unwrap();
        assert_eq!(odd.value(9).unwrap().to_dense(), CycNumber::from_int(-1));
        assert_eq!(odd.value(6).unwrap().to_dense(), CycNumber::from_int(1));
        let p35 = delta(&OddPrimes::Finite([3, 5].into()), 15).unwrap();
        assert_eq!(p35.value(15).unwrap().to_dense(), CycNumber::from_int(-1));
        assert!(delta(&OddPrimes::Finite([2].into()), 5).is_err());
    }

    #[test]
    fn axiom_small_cases() {
        let f = phi(20).unwrap();
        assert!(check_distribution_axiom(&f, 1, 7).unwrap());
        assert!(check_distribution_axiom(&f, 2, 2).unwrap());
        assert!(check_distribution_axiom(&f, 3, 6).unwrap());
        assert!(check_distribution_axiom(&f, 3, 7).is_err());
        let d = delta(&OddPrimes::Finite([3].into()), 27).unwrap();
        for (a, n) in [(3, 3), (2, 3), (3, 9), (5, 5)] {
            assert!(check_distribution_axiom(&d, a, n).unwrap(), "a = {a}, n = {n}");
        }
        // a nonconstant non-distribution: doubling Φ at one level breaks the relation
        let mut vals: BTreeMap<u64, CycElement> = (2..=8).map(|k| (k, f.value(k).unwrap().clone())).collect();
        vals.insert(4, CycElement::Dense(f.value(4).unwrap().to_dense().scale(&BigRational::from_integer(2.into()))));
        let g = CircularDistribution::new(vals).unwrap();
        assert!(!check_distribution_axiom(&g, 2, 2).unwrap());
    }

    #[test]
    fn strictness_examples() {
        let f = phi(20).unwrap();
        assert!(check_strict(&f, 4, 3).unwrap().passed);
        let d3 = delta(&OddPrimes::Finite([3].into()), 20).unwrap();
        assert!(!check_strict(&d3, 3, 5).unwrap().passed);
        assert!(check_strict(&d3, 5, 3).unwrap().passed);
        let odd = delta(&OddPrimes::All, 20).unwrap();
        assert!(check_strict(&odd, 3, 5).unwrap().passed);
    }

    #[test]
    fn exponent_families() {
        let f = phi(12).unwrap();
        let g = apply_exponent(&f, &ExponentFamily::identity(12)).unwrap();
        for n in 2..=12 {
            assert!(product_is_one(&[(g.value(n).unwrap().clone(), 1), (f.value(n).unwrap().clone(), -1)]));
        }
        assert!(ExponentFamily::norm(12).incompatibility().is_some());
        assert!(apply_exponent(&f, &ExponentFamily::norm(12)).is_err());
        let nf = apply_exponent_unchecked(&f, &ExponentFamily::norm(12)).unwrap();
        assert_eq!(nf.value(5).unwrap().to_dense(), CycNumber::from_int(5));
        let s = apply_exponent(&f, &ExponentFamily::sigma(13, 12).unwrap()).unwrap();
        for (a, n) in [(2, 2), (2, 3), (3, 4), (2, 6)] {
            assert!(check_distribution_axiom(&s, a, n).unwrap());
        }
    }

    #[test]
    fn json_round_trip() {
        let f = phi(10).unwrap();
        let g = CircularDistribution::from_json(&f.to_json()).unwrap();
        for n in 2..=10 {
            assert_eq!(f.value(n).unwrap(), g.value(n).unwrap());
        }
    }
}
