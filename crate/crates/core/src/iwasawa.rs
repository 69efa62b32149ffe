//! Truncated arithmetic in Λ = ℤ_p⟦T⟧, Weierstrass preparation, the f_n family, quotient orders
//! via resultants, and elementary Λ-modules.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde_json::json;

use crate::arith::{is_prime, valuation};
use crate::error::{invalid, Error, Result};
use crate::linalg::det_int;
use crate::report::CheckReport;

/// Largest p-adic or T-adic precision accepted.
pub const MAX_PRECISION: u32 = 512;

/// An element of ℤ/p^N[T]/(T^D): a series known modulo (p^N, T^D).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZpPowerSeries {
    p: u64,
    n: u32,
    d: u32,
    coeffs: Vec<BigInt>,
}

fn check_prime(p: u64) -> Result<()> {
    if !is_prime(p) {
        return invalid(format!("{p} is not prime"));
    }
    Ok(())
}

impl ZpPowerSeries {
    /// Coefficients are reduced modulo p^N and truncated below degree D.
    pub fn new(p: u64, n: u32, d: u32, coeffs: &[BigInt]) -> Result<Self> {
        check_prime(p)?;
        if n == 0 || d == 0 || n > MAX_PRECISION || d > MAX_PRECISION {
            return Err(Error::ResourceGuard(format!("precision (p^{n}, T^{d}) outside 1..={MAX_PRECISION}")));
        }
        let m = BigInt::from(p).pow(n);
        let coeffs = (0..d as usize)
            .map(|i| coeffs.get(i).map_or_else(BigInt::zero, |c| c.mod_floor(&m)))
            .collect();
        Ok(ZpPowerSeries { p, n, d, coeffs })
    }

    pub fn from_i64(p: u64, n: u32, d: u32, coeffs: &[i64]) -> Result<Self> {
        Self::new(p, n, d, &coeffs.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>())
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    /// p-adic precision N.
    pub fn p_precision(&self) -> u32 {
        self.n
    }

    /// T-adic precision D.
    pub fn t_precision(&self) -> u32 {
        self.d
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn modulus(&self) -> BigInt {
        BigInt::from(self.p).pow(self.n)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_unit(&self) -> bool {
        !(&self.coeffs[0] % self.p).is_zero()
    }

    /// Reduces to a coarser precision.
    pub fn truncate(&self, n: u32, d: u32) -> Result<Self> {
        if n > self.n || d > self.d {
            return Err(Error::InsufficientPrecision(format!(
                "cannot raise precision (p^{}, T^{}) to (p^{n}, T^{d})",
                self.n, self.d
            )));
        }
        Self::new(self.p, n, d, &self.coeffs)
    }

    fn common(&self, o: &Self) -> Result<(u32, u32)> {
        if self.p != o.p {
            return invalid(format!("series over ℤ_{} and ℤ_{}", self.p, o.p));
        }
        Ok((self.n.min(o.n), self.d.min(o.d)))
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        let (n, d) = self.common(o)?;
        let c: Vec<BigInt> = (0..d as usize).map(|i| &self.coeffs[i] + &o.coeffs[i]).collect();
        Self::new(self.p, n, d, &c)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        let (n, d) = self.common(o)?;
        let c: Vec<BigInt> = (0..d as usize).map(|i| &self.coeffs[i] - &o.coeffs[i]).collect();
        Self::new(self.p, n, d, &c)
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        let (n, d) = self.common(o)?;
        let d = d as usize;
        let mut c = vec![BigInt::zero(); d];
        for (i, a) in self.coeffs.iter().take(d).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().take(d - i).enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(self.p, n, d as u32, &c)
    }

    /// Multiplicative inverse of a unit.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(Error::Precondition("the constant term is not a p-adic unit".into()));
        }
        let m = self.modulus();
        let c0 = mod_inverse(&self.coeffs[0], &m);
        let d = self.d as usize;
        let mut inv = vec![BigInt::zero(); d];
        inv[0] = c0.clone();
        for k in 1..d {
            let s: BigInt = (1..=k).map(|i| &self.coeffs[i] * &inv[k - i]).sum();
            inv[k] = (-s * &c0).mod_floor(&m);
        }
        Self::new(self.p, self.n, self.d, &inv)
    }

    /// Smallest p-adic valuation of a coefficient, or None when the series is zero to precision.
    pub fn mu_visible(&self) -> Option<u32> {
        self.coeffs.iter().filter_map(|c| valuation(c, self.p)).min()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "p": self.p,
            "N": self.n,
            "D": self.d,
            "coeffs": self.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let field = |k: &str| v[k].as_u64().ok_or_else(|| Error::Parse(format!("missing integer field {k}")));
        let (p, n, d) = (field("p")?, field("N")?, field("D")?);
        let coeffs = v["coeffs"]
            .as_array()
            .ok_or_else(|| Error::Parse("missing coeffs".into()))?
            .iter()
            .map(|c| {
                c.as_str()
                    .and_then(|s| s.parse::<BigInt>().ok())
                    .ok_or_else(|| Error::Parse("coefficients are decimal strings".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        if coeffs.len() as u64 > d {
            return Err(Error::Parse("more coefficients than the T-adic precision".into()));
        }
        let to_u32 = |x: u64| u32::try_from(x).map_err(|_| Error::Parse("precision too large".into()));
        Self::new(p, to_u32(n)?, to_u32(d)?, &coeffs)
    }

    /// Uniform random series at the given precision.
    pub fn random<R: Rng>(rng: &mut R, p: u64, n: u32, d: u32) -> Result<Self> {
        let m = BigInt::from(p).pow(n);
        let bits = m.bits() + 16;
        let c: Vec<BigInt> = (0..d)
            .map(|_| {
                let words: Vec<u32> = (0..bits.div_ceil(32)).map(|_| rng.gen()).collect();
                BigInt::from_slice(num_bigint::Sign::Plus, &words) % &m
            })
            .collect();
        Self::new(p, n, d, &c)
    }
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    e.x.mod_floor(m)
}

/// f = p^μ · P · u with P distinguished and u a unit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeierstrassPrep {
    pub mu: u32,
    /// Coefficients of P, monic of degree λ; P·u reproduces f/p^μ modulo (p^{N−μ}, T^D).
    pub distinguished: Vec<BigInt>,
    /// P itself is determined modulo p^k with k = min(N − μ, ⌊D/λ⌋), since T^D ≡ 0 mod (P, p^{⌊D/λ⌋}).
    pub p_precision: u32,
    /// Known modulo (p^{N−μ}, T^D).
    pub unit: ZpPowerSeries,
}

impl WeierstrassPrep {
    pub fn lambda(&self) -> usize {
        self.distinguished.len() - 1
    }

    /// P reduced to its declared precision.
    pub fn distinguished_reduced(&self) -> Vec<BigInt> {
        let m = BigInt::from(self.unit.p).pow(self.p_precision);
        self.distinguished.iter().map(|c| c.mod_floor(&m)).collect()
    }

    /// p^μ · P · u at the precision of f.
    pub fn recombine(&self, n: u32) -> Result<ZpPowerSeries> {
        let u = &self.unit;
        let pp = ZpPowerSeries::new(u.p, n, u.d, &self.distinguished)?;
        let pm = BigInt::from(u.p).pow(self.mu);
        let lifted = ZpPowerSeries::new(u.p, n, u.d, &u.coeffs)?;
        let prod = pp.mul(&lifted)?;
        let c: Vec<BigInt> = prod.coeffs.iter().map(|c| c * &pm).collect();
        ZpPowerSeries::new(u.p, n, u.d, &c)
    }
}

pub fn weierstrass_prep(f: &ZpPowerSeries) -> Result<WeierstrassPrep> {
    let mu = f.mu_visible().ok_or_else(|| {
        Error::InsufficientPrecision(format!("every coefficient vanishes modulo p^{}", f.n))
    })?;
    let n = f.n - mu;
    let pm = BigInt::from(f.p).pow(mu);
    let g = ZpPowerSeries::new(f.p, n, f.d, &f.coeffs.iter().map(|c| c / &pm).collect::<Vec<_>>())?;
    let lambda = g
        .coeffs
        .iter()
        .position(|c| !(c % f.p).is_zero())
        .expect("a coefficient of valuation μ exists");
    if lambda + 1 >= f.d as usize {
        return Err(Error::InsufficientPrecision(format!(
            "Weierstrass degree {lambda} leaves no room below T^{}",
            f.d
        )));
    }
    let d = f.d as usize;
    let high = |h: &ZpPowerSeries| {
        let mut c = h.coeffs[lambda..].to_vec();
        c.resize(d, BigInt::zero());
        ZpPowerSeries::new(f.p, n, f.d, &c)
    };
    // v ← v·(g v div T^λ)^{-1}; each step gains a factor p in the error above degree λ.
    let mut v = high(&g)?.inverse()?;
    let one = ZpPowerSeries::new(f.p, n, f.d, &[BigInt::one()])?;
    let mut converged = false;
    for _ in 0..=n + 1 {
        let h = high(&g.mul(&v)?)?;
        if h == one {
            converged = true;
            break;
        }
        v = v.mul(&h.inverse()?)?;
    }
    if !converged {
        return Err(Error::OracleDisagreement("Weierstrass iteration did not converge".into()));
    }
    let gv = g.mul(&v)?;
    let distinguished = gv.coeffs[..=lambda].to_vec();
    let p_precision = if lambda == 0 { n } else { n.min(f.d / lambda as u32) };
    Ok(WeierstrassPrep { mu, distinguished, p_precision, unit: v.inverse()? })
}

/// Exact polynomial over ℤ, lowest degree first, without trailing zeros.
pub type IntPoly = Vec<BigInt>;

fn trim(mut a: IntPoly) -> IntPoly {
    while a.last().is_some_and(Zero::is_zero) {
        a.pop();
    }
    a
}

pub fn poly_mul(a: &[BigInt], b: &[BigInt]) -> IntPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut c = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            c[i + j] += x * y;
        }
    }
    trim(c)
}

pub fn poly_pow(a: &[BigInt], m: u32) -> IntPoly {
    (0..m).fold(vec![BigInt::one()], |acc, _| poly_mul(&acc, a))
}

fn poly_eval(a: &[BigInt], x: &BigInt) -> BigInt {
    a.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
}

/// Monic with every lower coefficient divisible by p (degree ≥ 1).
pub fn is_distinguished(a: &[BigInt], p: u64) -> bool {
    let a = trim(a.to_vec());
    a.len() >= 2 && a.last().unwrap().is_one() && a[..a.len() - 1].iter().all(|c| (c % p).is_zero())
}

fn is_p(a: &[BigInt], p: u64) -> bool {
    trim(a.to_vec()) == vec![BigInt::from(p)]
}

/// f_n = f + p^n for f = T + a_0 distinguished, and f_n = T^n + p for f = p.
pub fn fn_family(f: &[BigInt], p: u64, n: u32) -> Result<IntPoly> {
    check_prime(p)?;
    if n == 0 {
        return invalid("n must be at least 1");
    }
    if is_p(f, p) {
        let mut c = vec![BigInt::zero(); n as usize + 1];
        c[0] = BigInt::from(p);
        c[n as usize] = BigInt::one();
        return Ok(c);
    }
    let f = trim(f.to_vec());
    if f.len() == 2 && is_distinguished(&f, p) {
        return Ok(vec![&f[0] + BigInt::from(p).pow(n), BigInt::one()]);
    }
    invalid("f must be p or a linear distinguished polynomial T + a_0")
}

/// Res(g, h) via the Sylvester matrix.
pub fn resultant(g: &[BigInt], h: &[BigInt]) -> BigInt {
    let (g, h) = (trim(g.to_vec()), trim(h.to_vec()));
    if g.is_empty() || h.is_empty() {
        return BigInt::zero();
    }
    let (m, n) = (g.len() - 1, h.len() - 1);
    if m == 0 && n == 0 {
        return BigInt::one();
    }
    let size = m + n;
    let mut s = vec![vec![BigInt::zero(); size]; size];
    for i in 0..n {
        for (j, c) in g.iter().rev().enumerate() {
            s[i][i + j] = c.clone();
        }
    }
    for i in 0..m {
        for (j, c) in h.iter().rev().enumerate() {
            s[n + i][i + j] = c.clone();
        }
    }
    det_int(&s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuotientOrder {
    /// ord_p of the order.
    Finite(u32),
    Infinite,
}

impl QuotientOrder {
    pub fn finite(self) -> Option<u32> {
        match self {
            QuotientOrder::Finite(k) => Some(k),
            QuotientOrder::Infinite => None,
        }
    }
}

fn content_divisible(a: &[BigInt], p: u64) -> bool {
    a.iter().all(|c| (c % p).is_zero())
}

/// ord_p |Λ/(g, h)| read from ord_p Res(g, h). One argument must be distinguished: for such g,
/// Λ/(g) is ℤ_p-free of rank deg g and h acts on it with determinant Res(g, h).
pub fn quotient_order(g: &[BigInt], h: &[BigInt], p: u64) -> Result<QuotientOrder> {
    check_prime(p)?;
    // (g, h) ⊆ pΛ and Λ/pΛ is infinite
    if content_divisible(g, p) && content_divisible(h, p) {
        return Ok(QuotientOrder::Infinite);
    }
    if !(is_distinguished(g, p) || is_distinguished(h, p)) {
        return Err(Error::Precondition("neither argument is a distinguished polynomial".into()));
    }
    Ok(match valuation(&resultant(g, h), p) {
        Some(k) => QuotientOrder::Finite(k),
        None => QuotientOrder::Infinite,
    })
}

/// Largest p^{Kd} explored by `brute_force_quotient_order`.
pub const MAX_BRUTE_FORCE_STATES: u64 = 4_000_000;

/// ord_p |ℤ_p[T]/(a, b, p^K)| for distinguished `a`, counted by enumerating the subgroup
/// generated by b·T^i inside (ℤ/p^K)[T]/(a).
pub fn brute_force_truncated_order(a: &[BigInt], b: &[BigInt], p: u64, k: u32) -> Result<u32> {
    if !is_distinguished(a, p) {
        return Err(Error::Precondition("the modulus must be distinguished".into()));
    }
    let d = a.len() - 1;
    let states = (p as f64).powi((k as usize * d) as i32);
    if states > MAX_BRUTE_FORCE_STATES as f64 {
        return Err(Error::ResourceGuard(format!("{states} states exceed {MAX_BRUTE_FORCE_STATES}")));
    }
    let m = p.pow(k) as i64;
    let reduce = |mut v: Vec<BigInt>| -> Vec<i64> {
        for i in (d..v.len()).rev() {
            let c = v[i].clone();
            if !c.is_zero() {
                for j in 0..d {
                    v[i - d + j] -= &c * &a[j];
                }
                v[i] = BigInt::zero();
            }
        }
        v.resize(d.max(v.len()), BigInt::zero());
        v[..d].iter().map(|c| c.mod_floor(&BigInt::from(m)).to_i64().unwrap()).collect()
    };
    let gens: Vec<Vec<i64>> = (0..d)
        .map(|i| {
            let mut shifted = vec![BigInt::zero(); i];
            shifted.extend(b.iter().cloned());
            reduce(shifted)
        })
        .collect();
    let zero = vec![0i64; d];
    let mut seen: HashSet<Vec<i64>> = HashSet::from([zero.clone()]);
    let mut frontier = vec![zero];
    while let Some(x) = frontier.pop() {
        for g in &gens {
            let y: Vec<i64> = x.iter().zip(g).map(|(a, b)| (a + b).rem_euclid(m)).collect();
            if seen.insert(y.clone()) {
                frontier.push(y);
            }
        }
    }
    let sub = seen.len() as u64;
    let mut ord = k * d as u32;
    let mut s = sub;
    while s > 1 {
        s /= p;
        ord -= 1;
    }
    Ok(ord)
}

/// ord_p |Λ/(a, b)| by enumeration. The truncated orders at K and K + 1 agree exactly when
/// p^K ∈ (a, b), so the first repeated value is the order.
pub fn brute_force_quotient_order(a: &[BigInt], b: &[BigInt], p: u64) -> Result<QuotientOrder> {
    let d = (trim(a.to_vec()).len() - 1) as u32;
    let mut k = 1;
    let mut prev = brute_force_truncated_order(a, b, p, k)?;
    loop {
        if (p as f64).powi(((k + 1) * d) as i32) > MAX_BRUTE_FORCE_STATES as f64 {
            return Err(Error::ResourceGuard(format!("order not resolved below p^{}", k * d)));
        }
        k += 1;
        let o = brute_force_truncated_order(a, b, p, k)?;
        if o == prev {
            return Ok(QuotientOrder::Finite(o));
        }
        prev = o;
    }
}

/// E = ⊕ Λ/(g_j)^{m_j} ⊕ F with F = ⊕ ℤ/p^{e_i}, on which T acts as zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementaryModuleSpec {
    p: u64,
    summands: Vec<(IntPoly, u32)>,
    finite: Vec<u32>,
}

impl ElementaryModuleSpec {
    pub fn new(p: u64, summands: Vec<(IntPoly, u32)>, finite: Vec<u32>) -> Result<Self> {
        check_prime(p)?;
        let summands: Vec<(IntPoly, u32)> = summands.into_iter().map(|(g, m)| (trim(g), m)).collect();
        for (g, m) in &summands {
            if *m == 0 {
                return invalid("multiplicities are positive");
            }
            if !(is_p(g, p) || is_distinguished(g, p)) {
                return invalid("each g_j must be p or a distinguished polynomial");
            }
        }
        if finite.contains(&0) {
            return invalid("finite summands ℤ/p^e need e ≥ 1");
        }
        Ok(ElementaryModuleSpec { p, summands, finite })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn summands(&self) -> &[(IntPoly, u32)] {
        &self.summands
    }

    pub fn finite(&self) -> &[u32] {
        &self.finite
    }

    /// ord_p |F|.
    pub fn finite_order(&self) -> u32 {
        self.finite.iter().sum()
    }

    /// Random spec with up to three summands of degree ≤ 2 and up to two finite summands.
    pub fn random<R: Rng>(rng: &mut R, p: u64) -> Result<Self> {
        let pb = BigInt::from(p);
        let summands = (0..rng.gen_range(1..=3))
            .map(|_| {
                let g = if rng.gen_bool(0.2) {
                    vec![pb.clone()]
                } else {
                    let deg = rng.gen_range(1..=2);
                    let mut g: IntPoly = (0..deg).map(|_| &pb * BigInt::from(rng.gen_range(-2i64..=2))).collect();
                    g.push(BigInt::one());
                    g
                };
                (g, rng.gen_range(1..=2))
            })
            .collect();
        let finite = (0..rng.gen_range(0..=2)).map(|_| rng.gen_range(1..=3)).collect();
        Self::new(p, summands, finite)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharIdeal {
    pub generator: IntPoly,
    pub lambda: usize,
    pub mu: u32,
}

pub fn char_ideal(spec: &ElementaryModuleSpec) -> CharIdeal {
    let mut generator = vec![BigInt::one()];
    let (mut lambda, mut mu) = (0, 0);
    for (g, m) in &spec.summands {
        generator = poly_mul(&generator, &poly_pow(g, *m));
        if is_p(g, spec.p) {
            mu += m;
        } else {
            lambda += (g.len() - 1) * *m as usize;
        }
    }
    CharIdeal { generator, lambda, mu }
}

/// Sandwich ord|M/f_nM| − ord|F| ≤ ord|E/f_nE| ≤ ord|M/f_nM| for M = E ⊕ F.
pub fn check_orders_lemma(spec: &ElementaryModuleSpec, f: &[BigInt], n: u32) -> Result<CheckReport> {
    let p = spec.p;
    let fnp = fn_family(f, p, n)?;
    let f = trim(f.to_vec());
    let divides = if is_p(&f, p) {
        spec.summands.iter().any(|(g, _)| is_p(g, p))
    } else {
        let root = -&f[0];
        spec.summands.iter().any(|(g, _)| !is_p(g, p) && poly_eval(g, &root).is_zero())
    };
    if divides {
        return Err(Error::Precondition("(f) divides the characteristic ideal".into()));
    }
    let mut ord_e = 0;
    let mut per_summand = Vec::new();
    for (g, m) in &spec.summands {
        match quotient_order(&poly_pow(g, *m), &fnp, p)? {
            QuotientOrder::Finite(k) => {
                ord_e += k;
                per_summand.push(k);
            }
            QuotientOrder::Infinite => {
                return Err(Error::Precondition("f_n shares a factor with some g_j".into()));
            }
        }
    }
    // T acts as zero on F, so f_n acts as f_n(0).
    let c = valuation(&fnp[0], p).unwrap_or(u32::MAX);
    let ord_f_quot: u32 = spec.finite.iter().map(|&e| e.min(c)).sum();
    let ord_m = ord_e + ord_f_quot;
    let ord_f = spec.finite_order();
    let passed = ord_m.saturating_sub(ord_f) <= ord_e && ord_e <= ord_m;
    let witness = json!({
        "f_n": fnp.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "ord_M_mod_fn": ord_m,
        "ord_E_mod_fn": ord_e,
        "ord_F": ord_f,
        "summand_orders": per_summand,
        "slack": ord_m - ord_e,
    });
    Ok(CheckReport::new("orders_lemma", format!("p = {p}, n = {n}"), passed, witness))
}

/// Series of an exact polynomial at the given precision.
pub fn poly_series(a: &[BigInt], p: u64, n: u32, d: u32) -> Result<ZpPowerSeries> {
    if a.len() > d as usize && a[d as usize..].iter().any(|c| !c.is_zero()) {
        return Err(Error::InsufficientPrecision(format!("degree {} needs T-precision above {d}", a.len() - 1)));
    }
    ZpPowerSeries::new(p, n, d, a)
}

pub fn poly_text(a: &[BigInt]) -> String {
    let mut parts = Vec::new();
    for (i, c) in a.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mon = match i {
            0 => String::new(),
            1 => "T".into(),
            _ => format!("T^{i}"),
        };
        let coef = if c.abs().is_one() && i > 0 { if c.is_negative() { "-".into() } else { String::new() } } else { c.to_string() };
        parts.push(format!("{coef}{mon}"));
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ").replace("+ -", "- ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ip(c: &[i64]) -> IntPoly {
        c.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn prep_examples() {
        let p = 5;
        let f = ZpPowerSeries::from_i64(p, 10, 8, &[5, 1]).unwrap();
        let w = weierstrass_prep(&f).unwrap();
        assert_eq!((w.mu, w.distinguished.clone()), (0, ip(&[5, 1])));
        assert_eq!(w.unit, ZpPowerSeries::from_i64(p, 10, 8, &[1]).unwrap());
        let f = ZpPowerSeries::from_i64(p, 10, 8, &[5, 6, 1]).unwrap();
        let w = weierstrass_prep(&f).unwrap();
        assert_eq!(w.p_precision, 8);
        assert_eq!(w.distinguished_reduced(), ip(&[5, 1]));
        assert_eq!(w.recombine(10).unwrap(), f);
        assert!(w.unit.is_unit());
        let f = ZpPowerSeries::from_i64(p, 10, 8, &[25, 0, 5]).unwrap();
        let w = weierstrass_prep(&f).unwrap();
        assert_eq!((w.mu, w.distinguished.clone(), w.lambda()), (1, ip(&[5, 0, 1]), 2));
        assert!(weierstrass_prep(&ZpPowerSeries::from_i64(p, 3, 4, &[125, 0, 0, 0]).unwrap()).is_err());
    }

    #[test]
    fn fn_examples() {
        assert_eq!(fn_family(&ip(&[0, 1]), 5, 3).unwrap(), ip(&[125, 1]));
        assert_eq!(fn_family(&ip(&[5]), 5, 2).unwrap(), ip(&[5, 0, 1]));
        assert!(fn_family(&ip(&[1, 1]), 5, 2).is_err());
        assert!(fn_family(&ip(&[5, 0, 1]), 5, 2).is_err());
        for n in 1..6 {
            assert!(is_distinguished(&fn_family(&ip(&[10, 1]), 5, n).unwrap(), 5));
            assert!(is_distinguished(&fn_family(&ip(&[5]), 5, n).unwrap(), 5));
        }
    }

    #[test]
    fn quotient_examples() {
        for p in [3u64, 5, 7] {
            for m in 1..=5u32 {
                for n in 1..=5u32 {
                    let mut tm = vec![BigInt::zero(); m as usize];
                    tm.push(BigInt::one());
                    let h = vec![BigInt::from(p).pow(n), BigInt::one()];
                    assert_eq!(quotient_order(&tm, &h, p).unwrap(), QuotientOrder::Finite(n * m));
                }
            }
        }
        assert_eq!(quotient_order(&ip(&[3, 1]), &ip(&[3, 1]), 3).unwrap(), QuotientOrder::Infinite);
        assert_eq!(quotient_order(&ip(&[3, 1]), &ip(&[9, 1]), 3).unwrap(), QuotientOrder::Finite(1));
        assert_eq!(quotient_order(&ip(&[9]), &ip(&[3, 0, 1]), 3).unwrap(), QuotientOrder::Finite(4));
        assert_eq!(quotient_order(&ip(&[3]), &ip(&[3, 3]), 3).unwrap(), QuotientOrder::Infinite);
        assert_eq!(quotient_order(&ip(&[1, 1]), &ip(&[3, 0, 1]), 3).unwrap(), QuotientOrder::Finite(0));
        assert!(quotient_order(&ip(&[9]), &ip(&[1, 0, 1]), 3).is_err());
        assert!(quotient_order(&ip(&[1, 3]), &ip(&[3]), 3).is_err());
    }

    #[test]
    fn brute_force_agrees() {
        let cases = [(ip(&[0, 0, 1]), ip(&[3, 1])), (ip(&[3, 1]), ip(&[9, 1])), (ip(&[3, 0, 1]), ip(&[3]))];
        for (a, b) in cases {
            assert_eq!(brute_force_quotient_order(&a, &b, 3).unwrap(), quotient_order(&a, &b, 3).unwrap());
        }
    }

    #[test]
    fn char_ideal_examples() {
        let c = char_ideal(&ElementaryModuleSpec::new(3, vec![(ip(&[3, 1]), 2)], vec![]).unwrap());
        assert_eq!((c.generator, c.lambda, c.mu), (ip(&[9, 6, 1]), 2, 0));
        let c = char_ideal(&ElementaryModuleSpec::new(3, vec![(ip(&[3]), 3)], vec![]).unwrap());
        assert_eq!((c.lambda, c.mu), (0, 3));
        let with_f = ElementaryModuleSpec::new(3, vec![(ip(&[0, 1]), 1), (ip(&[3]), 1)], vec![2]).unwrap();
        let without = ElementaryModuleSpec::new(3, vec![(ip(&[0, 1]), 1), (ip(&[3]), 1)], vec![]).unwrap();
        let c = char_ideal(&with_f);
        assert_eq!((c.generator.clone(), c.lambda, c.mu), (ip(&[0, 3]), 1, 1));
        assert_eq!(c, char_ideal(&without));
    }

    #[test]
    fn orders_lemma_examples() {
        let p = 5;
        let spec = ElementaryModuleSpec::new(p, vec![(ip(&[0, 1]), 2)], vec![1]).unwrap();
        let r = check_orders_lemma(&spec, &ip(&[5, 1]), 2).unwrap();
        assert!(r.passed);
        assert!(r.witness["slack"].as_u64().unwrap() <= 1);
        let spec = ElementaryModuleSpec::new(p, vec![(ip(&[0, 1]), 2)], vec![]).unwrap();
        let r = check_orders_lemma(&spec, &ip(&[5, 1]), 2).unwrap();
        assert_eq!(r.witness["slack"], 0);
        assert!(check_orders_lemma(&spec, &ip(&[0, 1]), 2).is_err());
    }

    #[test]
    fn json_round_trip() {
        let f = ZpPowerSeries::from_i64(7, 5, 6, &[-1, 3, 49]).unwrap();
        assert_eq!(ZpPowerSeries::from_json(&f.to_json()).unwrap(), f);
        assert_eq!(f.to_json()["coeffs"][0], "16806");
    }
}
