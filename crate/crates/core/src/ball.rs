//! Dyadic ball arithmetic: a real number is `mid·2^-prec ± rad·2^-prec`.
//!
//! Every operation rounds outward, so each returned ball contains the exact
//! result of the operation applied to any points of the input balls.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Hard cap on requested working precision.
pub const MAX_PRECISION_BITS: u32 = 8192;
/// Guard bits added internally by transcendental functions.
pub const GUARD_BITS: u32 = 40;

pub fn check_precision(bits: u32) -> Result<()> {
    if bits > MAX_PRECISION_BITS {
        Err(Error::PrecisionCap { requested: bits, cap: MAX_PRECISION_BITS })
    } else {
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    pub mid: BigInt,
    pub rad: BigInt,
    pub prec: u32,
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_ceil(b)
}

impl Ball {
    pub fn zero(prec: u32) -> Ball {
        Ball { mid: BigInt::zero(), rad: BigInt::zero(), prec }
    }

    pub fn from_int(n: impl Into<BigInt>, prec: u32) -> Ball {
        Ball { mid: n.into() << prec, rad: BigInt::zero(), prec }
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Ball {
        let num = q.numer() << prec;
        let (mid, r) = num.div_mod_floor(q.denom());
        let rad = if r.is_zero() { BigInt::zero() } else { BigInt::one() };
        Ball { mid, rad, prec }
    }

    pub fn from_f64_exact(x: f64, prec: u32) -> Ball {
        let q = BigRational::from_float(x).expect("finite float");
        Ball::from_rational(&q, prec)
    }

    /// Change precision, rounding outward.
    pub fn with_prec(&self, prec: u32) -> Ball {
        if prec >= self.prec {
            let s = prec - self.prec;
            Ball { mid: &self.mid << s, rad: &self.rad << s, prec }
        } else {
            let s = self.prec - prec;
            let mid = &self.mid >> s;
            let rad = (&self.rad >> s) + 2;
            Ball { mid, rad, prec }
        }
    }

    fn same(&self, o: &Ball) {
        assert_eq!(self.prec, o.prec, "ball precision mismatch");
    }

    pub fn add(&self, o: &Ball) -> Ball {
        self.same(o);
        Ball { mid: &self.mid + &o.mid, rad: &self.rad + &o.rad, prec: self.prec }
    }

    pub fn sub(&self, o: &Ball) -> Ball {
        self.same(o);
        Ball { mid: &self.mid - &o.mid, rad: &self.rad + &o.rad, prec: self.prec }
    }

    pub fn neg(&self) -> Ball {
        Ball { mid: -&self.mid, rad: self.rad.clone(), prec: self.prec }
    }

    pub fn mul(&self, o: &Ball) -> Ball {
        self.same(o);
        let p = self.prec;
        let prod = &self.mid * &o.mid;
        let mid = &prod >> p;
        let err = self.mid.abs() * &o.rad + o.mid.abs() * &self.rad + &self.rad * &o.rad;
        let rad = (err >> p) + 2;
        Ball { mid, rad, prec: p }
    }

    pub fn mul_int(&self, k: &BigInt) -> Ball {
        Ball { mid: &self.mid * k, rad: &self.rad * k.abs(), prec: self.prec }
    }

    pub fn div_int(&self, k: &BigInt) -> Ball {
        assert!(!k.is_zero());
        let mid = self.mid.div_floor(k);
        let rad = ceil_div(&self.rad, &k.abs()) + 1;
        Ball { mid, rad, prec: self.prec }
    }

    pub fn mul_rational(&self, q: &BigRational) -> Ball {
        self.mul_int(q.numer()).div_int(q.denom())
    }

    /// Division by a ball not containing zero.
    pub fn div(&self, o: &Ball) -> Result<Ball> {
        self.same(o);
        let b = o.mid.abs();
        if b <= o.rad {
            return Err(Error::InsufficientPrecision("division by a ball containing zero".into()));
        }
        let p = self.prec;
        let mid = (&self.mid << p).div_floor(&o.mid);
        let num = (&self.rad * &b + self.mid.abs() * &o.rad) << p;
        let den = &b * (&b - &o.rad);
        let rad = ceil_div(&num, &den) + 1;
        Ok(Ball { mid, rad, prec: p })
    }

    pub fn contains_zero(&self) -> bool {
        self.mid.abs() <= self.rad
    }

    pub fn is_positive(&self) -> bool {
        self.mid > self.rad
    }

    pub fn overlaps(&self, o: &Ball) -> bool {
        self.same(o);
        (&self.mid - &o.mid).abs() <= &self.rad + &o.rad
    }

    pub fn intersect(&self, o: &Ball) -> Option<Ball> {
        if !self.overlaps(o) {
            return None;
        }
        let lo = (&self.mid - &self.rad).max(&o.mid - &o.rad);
        let hi = (&self.mid + &self.rad).min(&o.mid + &o.rad);
        let mid: BigInt = (&lo + &hi) >> 1;
        let rad = (&hi - &mid).max(&mid - &lo);
        Some(Ball { mid, rad, prec: self.prec })
    }

    pub fn contains_rational(&self, q: &BigRational) -> bool {
        let lhs = (q.numer() << self.prec) - &self.mid * q.denom();
        lhs.abs() <= &self.rad * q.denom()
    }

    /// True if `o` lies inside `self`.
    pub fn contains(&self, o: &Ball) -> bool {
        self.same(o);
        (&self.mid - &o.mid).abs() + &o.rad <= self.rad
    }

    pub fn union(&self, o: &Ball) -> Ball {
        self.same(o);
        let lo = (&self.mid - &self.rad).min(&o.mid - &o.rad);
        let hi = (&self.mid + &self.rad).max(&o.mid + &o.rad);
        let mid: BigInt = (&lo + &hi) >> 1;
        let rad = (&hi - &mid).max(&mid - &lo);
        Ball { mid, rad, prec: self.prec }
    }

    pub fn abs_upper(&self) -> BigRational {
        BigRational::new(self.mid.abs() + &self.rad, BigInt::one() << self.prec)
    }

    /// Width `2·rad·2^-prec` as a float.
    pub fn width(&self) -> f64 {
        scaled_f64(&(&self.rad << 1), self.prec)
    }

    pub fn mid_f64(&self) -> f64 {
        scaled_f64(&self.mid, self.prec)
    }

    pub fn lower_f64(&self) -> f64 {
        scaled_f64(&(&self.mid - &self.rad), self.prec)
    }

    pub fn upper_f64(&self) -> f64 {
        scaled_f64(&(&self.mid + &self.rad), self.prec)
    }

    /// Natural logarithm of a positive ball.
    pub fn ln(&self) -> Result<Ball> {
        if !self.is_positive() {
            return Err(Error::InsufficientPrecision("logarithm of a ball not bounded away from 0".into()));
        }
        let p = self.prec;
        let w = p + GUARD_BITS;
        let x = self.with_prec(w);
        let x0 = x.mid.clone();
        let k = x0.bits() as i64 - 1 - w as i64;
        let y = if k >= 0 { &x0 >> (k as u32) } else { &x0 << ((-k) as u32) };
        let one = BigInt::one() << w;
        let t = ((&y - &one) << w).div_floor(&(&y + &one));
        let (s, serr) = atanh_fixed(&t, w);
        let log2 = ln2(w);
        let mut out = Ball { mid: s << 1, rad: BigInt::from(2 * serr + 4), prec: w };
        out = out.add(&log2.mul_int(&BigInt::from(k)));
        // input radius: |log(x0 ± r) - log x0| ≤ r / (x0 - r)
        if !x.rad.is_zero() {
            let extra = ceil_div(&(&x.rad << w), &(&x0 - &x.rad)) + 1;
            out.rad += extra;
        }
        Ok(out.with_prec(p))
    }

    /// Exponential function.
    pub fn exp(&self) -> Ball {
        let p = self.prec;
        // reduce |x| below 1/2 by halving, then square back
        let mut halvings = 0u32;
        let bound = self.mid.abs() + &self.rad;
        let half = BigInt::one() << (p - 1);
        let mut b = bound;
        while b > half {
            b >>= 1;
            halvings += 1;
        }
        let w = p + GUARD_BITS + 2 * halvings;
        let x = self.with_prec(w);
        let x0 = &x.mid >> halvings;
        let rad_in = (&x.rad >> halvings) + 1;
        // Taylor series at x0, |x0| ≤ 1/2
        let one = BigInt::one() << w;
        let mut term = one.clone();
        let mut sum = one.clone();
        let mut k = 1u64;
        loop {
            term = (&term * &x0 >> w) / BigInt::from(k);
            if term.is_zero() {
                break;
            }
            sum += &term;
            k += 1;
        }
        let mut e = Ball { mid: sum, rad: BigInt::from(5 * k + 5), prec: w };
        // input radius: exp(x0 ± r) ⊂ exp(x0)·(1 ± 2r) for r ≤ 1/2
        let r2 = (&e.mid.abs() + &e.rad) * (&rad_in << 1) >> w;
        e.rad += r2 + 1;
        for _ in 0..halvings {
            e = e.mul(&e);
        }
        e.with_prec(p)
    }
}

fn scaled_f64(x: &BigInt, prec: u32) -> f64 {
    let bits = x.bits() as i64;
    let shift = (bits - 60).max(0);
    let top = (x >> (shift as u32)).to_f64().unwrap_or(0.0);
    top * 2f64.powi((shift - prec as i64) as i32)
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e} ± {:e}]", self.mid_f64(), self.width() / 2.0)
    }
}

/// atanh(t) for fixed-point `0 ≤ t ≤ 2^w/3`; returns (value, error bound in ulps).
fn atanh_fixed(t: &BigInt, w: u32) -> (BigInt, u64) {
    let t2 = (t * t) >> w;
    let mut pow = t.clone();
    let mut sum = t.clone();
    let mut j = 1u64;
    loop {
        pow = (&pow * &t2) >> w;
        if pow.is_zero() {
            break;
        }
        sum += &pow / BigInt::from(2 * j + 1);
        j += 1;
    }
    // per-term rounding stays below 4 ulps because t² < 1/9 damps propagated error;
    // the omitted tail is below 2 ulps.
    (sum, 4 * j + 4)
}

type ConstCache = Mutex<HashMap<u32, Ball>>;
static PI_CACHE: OnceLock<ConstCache> = OnceLock::new();
static LN2_CACHE: OnceLock<ConstCache> = OnceLock::new();

fn atan_inv_fixed(n: u64, w: u32) -> (BigInt, u64) {
    let nb = BigInt::from(n);
    let n2 = BigInt::from(n * n);
    let mut p = (BigInt::one() << w) / &nb;
    let mut sum = BigInt::zero();
    let mut j = 0u64;
    while !p.is_zero() {
        let term = &p / BigInt::from(2 * j + 1);
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        p /= &n2;
        j += 1;
    }
    (sum, 2 * j + 2)
}

/// π as a ball.
pub fn pi(prec: u32) -> Ball {
    let cache = PI_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(b) = cache.lock().unwrap().get(&prec) {
        return b.clone();
    }
    let w = prec + GUARD_BITS;
    let (a5, e5) = atan_inv_fixed(5, w);
    let (a239, e239) = atan_inv_fixed(239, w);
    let mid = a5 * 16 - a239 * 4;
    let b = Ball { mid, rad: BigInt::from(16 * e5 + 4 * e239), prec: w }.with_prec(prec);
    cache.lock().unwrap().insert(prec, b.clone());
    b
}

/// log 2 as a ball.
pub fn ln2(prec: u32) -> Ball {
    let cache = LN2_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(b) = cache.lock().unwrap().get(&prec) {
        return b.clone();
    }
    let w = prec + GUARD_BITS;
    let t = (BigInt::one() << w) / 3;
    let (s, e) = atanh_fixed(&t, w);
    let b = Ball { mid: s << 1, rad: BigInt::from(2 * e + 4), prec: w }.with_prec(prec);
    cache.lock().unwrap().insert(prec, b.clone());
    b
}

/// Taylor evaluation of (cos x, sin x) for a ball `x` with `0 ≤ x ≤ 0.8`.
fn cos_sin_small(x: &Ball) -> (Ball, Ball) {
    let w = x.prec;
    let x0 = x.mid.clone();
    let x2 = (&x0 * &x0) >> w;
    let one = BigInt::one() << w;
    let mut c = one.clone();
    let mut s = x0.clone();
    let mut tc = one;
    let mut ts = x0;
    let mut k = 1u64;
    let mut steps = 0u64;
    loop {
        tc = ((&tc * &x2) >> w) / BigInt::from((2 * k - 1) * (2 * k));
        ts = ((&ts * &x2) >> w) / BigInt::from((2 * k) * (2 * k + 1));
        steps += 1;
        if tc.is_zero() && ts.is_zero() {
            break;
        }
        if k % 2 == 1 {
            c -= &tc;
            s -= &ts;
        } else {
            c += &tc;
            s += &ts;
        }
        k += 1;
    }
    let err = BigInt::from(3 * steps + 3) + &x.rad;
    (Ball { mid: c, rad: err.clone(), prec: w }, Ball { mid: s, rad: err, prec: w })
}

/// (cos(π·num/den), sin(π·num/den)).
pub fn cos_sin_pi(num: &BigInt, den: &BigInt, prec: u32) -> (Ball, Ball) {
    assert!(den.is_positive());
    let w = prec + GUARD_BITS;
    // r = num/den mod 2, as r_num/den with 0 ≤ r_num < 2den
    let two_den: BigInt = den * 2;
    let mut r = num.mod_floor(&two_den);
    let mut sign_c = 1;
    let mut sign_s = 1;
    if r >= *den {
        r -= den;
        sign_c = -sign_c;
        sign_s = -sign_s;
    }
    // r ∈ [0, 1)
    if &r * 2 > *den {
        r = den - r;
        sign_c = -sign_c;
    }
    // r ∈ [0, 1/2]
    let swap = &r * 4 > *den;
    if swap {
        r = den - &r * 2; // π/2 − πr = π(den − 2r)/(2den)
    }
    let rr = if swap {
        BigRational::new(r, two_den.clone())
    } else {
        BigRational::new(r, den.clone())
    };
    let x = pi(w).mul_rational(&rr);
    let (mut c, mut s) = cos_sin_small(&x);
    if swap {
        std::mem::swap(&mut c, &mut s);
    }
    if sign_c < 0 {
        c = c.neg();
    }
    if sign_s < 0 {
        s = s.neg();
    }
    (c.with_prec(prec), s.with_prec(prec))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexBall {
    pub re: Ball,
    pub im: Ball,
}

impl ComplexBall {
    pub fn zero(prec: u32) -> Self {
        ComplexBall { re: Ball::zero(prec), im: Ball::zero(prec) }
    }

    pub fn from_real(re: Ball) -> Self {
        let p = re.prec;
        ComplexBall { re, im: Ball::zero(p) }
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        Self::from_real(Ball::from_rational(q, prec))
    }

    pub fn prec(&self) -> u32 {
        self.re.prec
    }

    /// e^{2πi k/n}.
    pub fn root_of_unity(k: i64, n: u64, prec: u32) -> Self {
        let (c, s) = cos_sin_pi(&BigInt::from(2 * k), &BigInt::from(n), prec);
        ComplexBall { re: c, im: s }
    }

    pub fn add(&self, o: &Self) -> Self {
        ComplexBall { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        ComplexBall { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }

    pub fn neg(&self) -> Self {
        ComplexBall { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn conj(&self) -> Self {
        ComplexBall { re: self.re.clone(), im: self.im.neg() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        ComplexBall {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }

    pub fn mul_real(&self, r: &Ball) -> Self {
        ComplexBall { re: self.re.mul(r), im: self.im.mul(r) }
    }

    pub fn mul_rational(&self, q: &BigRational) -> Self {
        ComplexBall { re: self.re.mul_rational(q), im: self.im.mul_rational(q) }
    }

    pub fn abs_sq(&self) -> Ball {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    /// log|z| for z bounded away from 0.
    pub fn ln_abs(&self) -> Result<Ball> {
        let h = self.abs_sq().ln()?;
        Ok(Ball { mid: &h.mid >> 1, rad: (&h.rad >> 1) + 1, prec: h.prec })
    }

    pub fn overlaps(&self, o: &Self) -> bool {
        self.re.overlaps(&o.re) && self.im.overlaps(&o.im)
    }

    pub fn intersect(&self, o: &Self) -> Option<Self> {
        Some(ComplexBall { re: self.re.intersect(&o.re)?, im: self.im.intersect(&o.im)? })
    }

    pub fn contains_zero(&self) -> bool {
        self.re.contains_zero() && self.im.contains_zero()
    }

    pub fn width(&self) -> f64 {
        self.re.width().max(self.im.width())
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        ComplexBall { re: self.re.with_prec(prec), im: self.im.with_prec(prec) }
    }
}

impl fmt::Display for ComplexBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + i{}", self.re, self.im)
    }
}

/// Sign helper for exponents in fixed point.
pub fn sign_of(b: &Ball) -> Option<Sign> {
    if b.contains_zero() {
        None
    } else {
        Some(b.mid.sign())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_digits() {
        let p = pi(200);
        assert!((p.mid_f64() - std::f64::consts::PI).abs() < 1e-15);
        assert!(p.width() < 1e-55);
        // contains 355/113? no: that differs at 1e-7
        assert!(!p.contains_rational(&BigRational::new(355.into(), 113.into())));
    }

    #[test]
    fn log_and_exp_invert() {
        let x = Ball::from_rational(&BigRational::new(7.into(), 3.into()), 160);
        let y = x.ln().unwrap().exp();
        assert!(y.overlaps(&x));
        assert!((x.ln().unwrap().mid_f64() - (7.0f64 / 3.0).ln()).abs() < 1e-14);
        let l10 = Ball::from_int(10, 128).ln().unwrap();
        assert!((l10.mid_f64() - 10f64.ln()).abs() < 1e-14);
        assert!(l10.width() < 1e-30);
    }

    #[test]
    fn trig_values() {
        for (n, d) in [(1, 6), (5, 7), (-3, 11), (23, 12), (1, 2), (0, 1), (3, 4)] {
            let (c, s) = cos_sin_pi(&BigInt::from(n), &BigInt::from(d), 100);
            let th = std::f64::consts::PI * n as f64 / d as f64;
            assert!((c.mid_f64() - th.cos()).abs() < 1e-14, "{n}/{d}");
            assert!((s.mid_f64() - th.sin()).abs() < 1e-14, "{n}/{d}");
            assert!(c.width() < 1e-25);
        }
        let (c, _) = cos_sin_pi(&BigInt::from(1), &BigInt::from(3), 100);
        assert!(c.contains_rational(&BigRational::new(1.into(), 2.into())));
    }

    #[test]
    fn root_of_unity_has_unit_modulus() {
        let z = ComplexBall::root_of_unity(3, 17, 128);
        let one = Ball::from_int(1, 128);
        assert!(z.abs_sq().overlaps(&one));
    }
}
