//! Exact elements of cyclotomic fields ℚ(ζ_m), with ζ_m ↦ e^{2πi/m} as the fixed embedding.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{euler_phi, gcd, lcm};
use crate::ball::{check_precision, ComplexBall};
use crate::error::{invalid, Error, Result};
use crate::linalg::solve_combination;
use crate::poly::{cyclotomic_poly, qpoly_gcd_inverse, reduce_mod_monic};

/// An element of ℚ(ζ_level) in the power basis `1, ζ, …, ζ^{φ(level)-1}`.
#[derive(Clone, Debug)]
pub struct CycNumber {
    level: u64,
    coeffs: Vec<BigRational>,
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
    let d: BigInt = d.parse().map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in `{s}`")));
    }
    Ok(BigRational::new(n, d))
}

pub fn format_rational(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

impl CycNumber {
    /// Builds `Σ c_i ζ_level^i`, reducing modulo Φ_level.
    pub fn new(level: u64, mut coeffs: Vec<BigRational>) -> Self {
        assert!(level >= 1);
        reduce_mod_monic(&mut coeffs, &cyclotomic_poly(level));
        CycNumber { level, coeffs }
    }

    pub fn from_ints(level: u64, coeffs: &[i64]) -> Self {
        Self::new(level, coeffs.iter().map(|&c| q(c)).collect())
    }

    pub fn zero() -> Self {
        CycNumber { level: 1, coeffs: vec![BigRational::zero()] }
    }

    pub fn one() -> Self {
        Self::from_rational(BigRational::one())
    }

    pub fn from_rational(x: BigRational) -> Self {
        CycNumber { level: 1, coeffs: vec![x] }
    }

    pub fn from_int(x: i64) -> Self {
        Self::from_rational(q(x))
    }

    /// ζ_n^k.
    pub fn zeta(n: u64, k: i64) -> Self {
        let e = k.rem_euclid(n as i64) as usize;
        let mut c = vec![BigRational::zero(); e + 1];
        c[e] = BigRational::one();
        Self::new(n, c)
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Rational value, if the element lies in ℚ.
    pub fn to_rational(&self) -> Option<BigRational> {
        let r = self.lower(1)?;
        Some(r.coeffs[0].clone())
    }

    /// The same element at level `target` (a multiple of the current level).
    pub fn lift(&self, target: u64) -> Self {
        assert!(target % self.level == 0, "lift target must be a multiple of the level");
        if target == self.level {
            return self.clone();
        }
        let step = (target / self.level) as usize;
        let mut c = vec![BigRational::zero(); (self.coeffs.len() - 1) * step + 1];
        for (i, x) in self.coeffs.iter().enumerate() {
            c[i * step] = x.clone();
        }
        Self::new(target, c)
    }

    /// Rewrites the element at level `d | level`, if it lies in ℚ(ζ_d).
    pub fn lower(&self, d: u64) -> Option<Self> {
        if self.level % d != 0 {
            return None;
        }
        if d == self.level {
            return Some(self.clone());
        }
        let basis: Vec<Vec<BigRational>> = (0..euler_phi(d) as i64)
            .map(|j| Self::zeta(d, j).lift(self.level).coeffs)
            .collect();
        let c = solve_combination(&basis, &self.coeffs)?;
        Some(CycNumber { level: d, coeffs: c })
    }

    /// Smallest level at which the element can be written.
    pub fn minimal_level(&self) -> Self {
        let mut cur = self.clone();
        loop {
            let mut improved = false;
            for p in crate::arith::prime_divisors(cur.level) {
                if let Some(l) = cur.lower(cur.level / p) {
                    cur = l;
                    improved = true;
                    break;
                }
            }
            if !improved {
                return cur;
            }
        }
    }

    fn common(&self, o: &Self) -> (Self, Self) {
        let l = lcm(self.level, o.level);
        (self.lift(l), o.lift(l))
    }

    pub fn add(&self, o: &Self) -> Self {
        let (a, b) = self.common(o);
        let c = a.coeffs.iter().zip(b.coeffs.iter()).map(|(x, y)| x + y).collect();
        CycNumber { level: a.level, coeffs: c }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let (a, b) = self.common(o);
        let c = a.coeffs.iter().zip(b.coeffs.iter()).map(|(x, y)| x - y).collect();
        CycNumber { level: a.level, coeffs: c }
    }

    pub fn neg(&self) -> Self {
        CycNumber { level: self.level, coeffs: self.coeffs.iter().map(|x| -x).collect() }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        CycNumber { level: self.level, coeffs: self.coeffs.iter().map(|x| x * r).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let (a, b) = self.common(o);
        if a.level == 1 {
            return CycNumber { level: 1, coeffs: vec![&a.coeffs[0] * &b.coeffs[0]] };
        }
        let n = a.coeffs.len();
        let mut c = vec![BigRational::zero(); 2 * n - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if !y.is_zero() {
                    c[i + j] += x * y;
                }
            }
        }
        Self::new(a.level, c)
    }

    pub fn pow(&self, e: u64) -> Self {
        let mut acc = Self::one();
        let mut b = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return invalid("inverse of zero");
        }
        if self.level == 1 {
            return Ok(Self::from_rational(self.coeffs[0].recip()));
        }
        let phi: Vec<BigRational> = cyclotomic_poly(self.level)
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect();
        let (g, s) = qpoly_gcd_inverse(&self.coeffs, &phi);
        debug_assert_eq!(g.len(), 1);
        Ok(Self::new(self.level, s))
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inv()?))
    }

    /// σ_a: ζ ↦ ζ^a.
    pub fn galois(&self, a: i64) -> Result<Self> {
        let m = self.level;
        let a = a.rem_euclid(m as i64) as u64;
        if gcd(a, m) != 1 && m > 1 {
            return invalid(format!("{a} is not a unit modulo {m}"));
        }
        if m <= 2 {
            return Ok(self.clone());
        }
        let mut c = vec![BigRational::zero(); m as usize];
        for (i, x) in self.coeffs.iter().enumerate() {
            if !x.is_zero() {
                c[(a as usize * i) % m as usize] += x;
            }
        }
        Ok(Self::new(m, c))
    }

    pub fn conj(&self) -> Self {
        self.galois(-1).expect("-1 is a unit")
    }

    /// Least common denominator of the coefficients.
    pub fn denominator(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    pub fn is_integral(&self) -> bool {
        self.denominator().is_one()
    }

    /// Integer coefficient vector of `d·x` where `d` is the denominator.
    pub fn scaled_integer_coeffs(&self) -> (BigInt, Vec<BigInt>) {
        let d = self.denominator();
        let v = self
            .coeffs
            .iter()
            .map(|c| (c * BigRational::from_integer(d.clone())).to_integer())
            .collect();
        (d, v)
    }

    /// Evaluates at ζ_level ↦ e^{2πi a/level}.
    pub fn embed(&self, a: i64, bits: u32) -> Result<ComplexBall> {
        check_precision(bits)?;
        let m = self.level;
        let ar = a.rem_euclid(m as i64) as u64;
        if m > 2 && gcd(ar, m) != 1 {
            return invalid(format!("embedding index {a} not coprime to {m}"));
        }
        let roots = roots_of_unity(m, bits);
        let mut acc = ComplexBall::zero(bits);
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let z = &roots[(ar as usize * i) % m as usize];
            acc = acc.add(&z.mul_rational(c));
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(CycNumberRepr::from(self)).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let r: CycNumberRepr =
            serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        r.try_into()
    }
}

impl PartialEq for CycNumber {
    fn eq(&self, o: &Self) -> bool {
        if self.level == o.level {
            return self.coeffs == o.coeffs;
        }
        let (a, b) = self.common(o);
        a.coeffs == b.coeffs
    }
}

impl Eq for CycNumber {}

impl fmt::Display for CycNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let c = format_rational(c);
            parts.push(match i {
                0 => c,
                1 => format!("{c}*z{}", self.level),
                _ => format!("{c}*z{}^{i}", self.level),
            });
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

#[derive(Serialize, Deserialize)]
pub struct CycNumberRepr {
    pub m: u64,
    pub coeffs: Vec<String>,
}

impl From<&CycNumber> for CycNumberRepr {
    fn from(x: &CycNumber) -> Self {
        CycNumberRepr { m: x.level, coeffs: x.coeffs.iter().map(format_rational).collect() }
    }
}

impl TryFrom<CycNumberRepr> for CycNumber {
    type Error = Error;
    fn try_from(r: CycNumberRepr) -> Result<Self> {
        if r.m == 0 {
            return Err(Error::Parse("level must be positive".into()));
        }
        let c = r.coeffs.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?;
        Ok(CycNumber::new(r.m, c))
    }
}

type RootTable = Mutex<HashMap<(u64, u32), Arc<Vec<ComplexBall>>>>;
static ROOTS: OnceLock<RootTable> = OnceLock::new();

/// e^{2πik/m} for k = 0..m (memoized per level and precision).
pub fn roots_of_unity(m: u64, bits: u32) -> Arc<Vec<ComplexBall>> {
    let t = ROOTS.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = t.lock().unwrap().get(&(m, bits)) {
        return v.clone();
    }
    let v = Arc::new((0..m as i64).map(|k| ComplexBall::root_of_unity(k, m, bits)).collect::<Vec<_>>());
    t.lock().unwrap().insert((m, bits), v.clone());
    v
}

/// Integer polynomial accumulator in ℤ[X]/(X^m − 1); multiplying by (1 − X^k) costs O(m).
#[derive(Clone, Debug)]
pub struct CyclicAccumulator {
    m: u64,
    c: Vec<BigInt>,
}

impl CyclicAccumulator {
    pub fn one(m: u64) -> Self {
        let mut c = vec![BigInt::zero(); m as usize];
        c[0] = BigInt::one();
        CyclicAccumulator { m, c }
    }

    pub fn level(&self) -> u64 {
        self.m
    }

    /// Multiply by (1 − X^k).
    pub fn mul_one_minus(&mut self, k: u64) {
        let m = self.m as usize;
        let k = (k % self.m) as usize;
        let old = self.c.clone();
        for i in 0..m {
            let src = (i + m - k) % m;
            if !old[src].is_zero() {
                self.c[i] -= &old[src];
            }
        }
    }

    pub fn mul_int(&mut self, s: &BigInt) {
        for x in self.c.iter_mut() {
            *x *= s;
        }
    }

    /// Multiply by an integer polynomial given in ℤ[X]/(X^m − 1) coordinates.
    pub fn mul_poly(&mut self, p: &[BigInt]) {
        let m = self.m as usize;
        let mut out = vec![BigInt::zero(); m];
        for (i, x) in self.c.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in p.iter().enumerate() {
                if !y.is_zero() {
                    out[(i + j) % m] += x * y;
                }
            }
        }
        self.c = out;
    }

    pub fn to_cyc(&self) -> CycNumber {
        CycNumber::new(self.m, self.c.iter().map(|x| BigRational::from_integer(x.clone())).collect())
    }
}

/// Decides whether `a = ω·b` for a root of unity ω ∈ ℚ(ζ_L); returns the exponent of ω
/// as `(k, n)` meaning ω = e^{2πik/n} with n = lcm(2, L).
pub fn equal_up_to_root_of_unity(a: &CycNumber, b: &CycNumber) -> Option<(u64, u64)> {
    let l = lcm(a.level, b.level);
    let (a, b) = (a.lift(l), b.lift(l));
    if a.is_zero() || b.is_zero() {
        return if a.is_zero() && b.is_zero() { Some((0, 1)) } else { None };
    }
    let n = lcm(2, l);
    // locate ω numerically, then confirm exactly
    let size = a
        .coeffs
        .iter()
        .chain(b.coeffs.iter())
        .map(|c| c.numer().bits() + c.denom().bits())
        .max()
        .unwrap_or(1) as u32;
    let mut bits = 96 + size + 2 * (64 - l.leading_zeros());
    let candidates: Vec<u64> = loop {
        let (Ok(za), Ok(zb)) = (a.embed(1, bits), b.embed(1, bits)) else { break (0..n).collect() };
        let (fa, fb) = ((za.re.mid_f64(), za.im.mid_f64()), (zb.re.mid_f64(), zb.im.mid_f64()));
        let ra = fa.0.hypot(fa.1);
        let rb = fb.0.hypot(fb.1);
        if za.contains_zero() || zb.contains_zero() || !ra.is_finite() || !rb.is_finite() {
            if bits > 2048 {
                break (0..n).collect();
            }
            bits *= 2;
            continue;
        }
        if (ra / rb - 1.0).abs() > 1e-6 {
            return None;
        }
        let ang = fa.1.atan2(fa.0) - fb.1.atan2(fb.0);
        let k = (ang / (2.0 * std::f64::consts::PI) * n as f64).round() as i64;
        let k = k.rem_euclid(n as i64) as u64;
        break vec![k, (k + 1) % n, (k + n - 1) % n];
    };
    for k in candidates {
        // ω = e^{2πik/n} = ±ζ_L^j
        let omega = if n == l {
            CycNumber::zeta(l, k as i64)
        } else {
            // n = 2L with L odd: e^{2πik/2L} = (-1)^k ζ_L^{k·(L+1)/2}
            let j = (k * (l + 1) / 2) % l;
            let z = CycNumber::zeta(l, j as i64);
            if k % 2 == 1 {
                z.neg()
            } else {
                z
            }
        };
        if omega.mul(&b) == a {
            return Some((k, n));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lift_and_lower_roundtrip() {
        let x = CycNumber::from_ints(5, &[1, -2, 0, 3]);
        let y = x.lift(15);
        assert_eq!(y.level(), 15);
        assert_eq!(y.lower(5).unwrap().coeffs, x.coeffs);
        assert!(CycNumber::zeta(15, 1).lower(5).is_none());
        assert_eq!(CycNumber::zeta(6, 2).minimal_level().level(), 3);
    }

    #[test]
    fn arithmetic_identities() {
        // (1 - ζ_3)(1 - ζ_3^2) = 3
        let a = CycNumber::one().sub(&CycNumber::zeta(3, 1));
        let b = CycNumber::one().sub(&CycNumber::zeta(3, 2));
        assert_eq!(a.mul(&b), CycNumber::from_int(3));
        let inv = a.inv().unwrap();
        assert_eq!(inv.mul(&a), CycNumber::one());
        // ζ_4 = i, i^2 = -1
        let i = CycNumber::zeta(4, 1);
        assert_eq!(i.mul(&i), CycNumber::from_int(-1));
    }

    #[test]
    fn galois_composition() {
        let x = CycNumber::from_ints(35, &[3, 1, 0, -4, 7, 0, 0, 2]);
        let lhs = x.galois(3).unwrap().galois(2).unwrap();
        assert_eq!(lhs, x.galois(6).unwrap());
        assert!(x.galois(5).is_err());
    }

    #[test]
    fn embedding_values() {
        let i = CycNumber::zeta(4, 1).embed(1, 64).unwrap();
        assert!(i.re.contains_zero());
        assert!(i.im.contains_rational(&BigRational::one()));
        let a = CycNumber::one().sub(&CycNumber::zeta(3, 1)).embed(1, 100).unwrap();
        assert!(a.abs_sq().contains_rational(&q(3)));
    }

    #[test]
    fn accumulator_matches_direct_product() {
        let mut acc = CyclicAccumulator::one(12);
        acc.mul_one_minus(1);
        acc.mul_one_minus(5);
        let direct = CycNumber::one()
            .sub(&CycNumber::zeta(12, 1))
            .mul(&CycNumber::one().sub(&CycNumber::zeta(12, 5)));
        assert_eq!(acc.to_cyc(), direct);
    }

    #[test]
    fn torsion_detection() {
        let a = CycNumber::one().sub(&CycNumber::zeta(4, 1));
        let b = CycNumber::one().sub(&CycNumber::zeta(4, 3));
        // (1 - i) = -i (1 + i)
        let (k, n) = equal_up_to_root_of_unity(&a, &b).unwrap();
        assert_eq!((k, n), (3, 4));
        let two = CycNumber::from_int(2);
        assert!(equal_up_to_root_of_unity(&a, &two).is_none());
        let z = CycNumber::zeta(15, 4);
        assert!(equal_up_to_root_of_unity(&z.mul(&a), &a).is_some());
    }

    #[test]
    fn json_roundtrip() {
        let x = CycNumber::new(7, vec![BigRational::new(1.into(), 3.into()), q(-2)]);
        let back = CycNumber::from_json(&x.to_json()).unwrap();
        assert_eq!(back, x);
    }
}
