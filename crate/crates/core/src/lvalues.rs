//! Dirichlet characters, L-values at s = 0, Stickelberger elements and numeric leading terms.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::json;

use crate::arith::{bernoulli_numbers, divisors, euler_phi, factorize, gcd, ramanujan_sum};
use crate::ball::{check_precision, cos_sin_pi, Ball, ComplexBall};
use crate::cyclotomic::lift_residue;
use crate::cycnum::{format_rational, CycNumber};
use crate::error::{invalid, Error, Result};
use crate::field::{AbelianField, Place, PlaceSet, UnitGroup};
use crate::groupring::{Character, FiniteAbelianGroup, RatGroupRing, RootOfUnity};

/// A Dirichlet character modulo `modulus` with values ζ_n^k stored as exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirichletChar {
    modulus: u64,
    n: u64,
    table: Arc<Vec<Option<u64>>>,
}

impl DirichletChar {
    fn from_table(modulus: u64, n: u64, table: Vec<Option<u64>>) -> Self {
        DirichletChar { modulus, n, table: Arc::new(table) }
    }

    /// The Dirichlet character a ↦ χ(σ_a) attached to a character of 𝒢_E.
    pub fn from_field_character(e: &AbelianField, chi: &Character) -> Self {
        let m = e.conductor().max(1);
        let n = chi.group.exponent();
        let table = (0..m)
            .map(|a| e.class_of(a as i64).ok().map(|c| chi.exponent_at(c)))
            .collect();
        Self::from_table(m, n, table)
    }

    /// All characters modulo m.
    pub fn all_mod(m: u64) -> Vec<Self> {
        let ug = UnitGroup::get(m.max(1));
        let n = ug.group.exponent();
        ug.group
            .all_characters()
            .into_iter()
            .map(|chi| {
                let table = (0..m.max(1)).map(|a| ug.index_of(a as i64).map(|i| chi.exponent_at(i))).collect();
                Self::from_table(m.max(1), n, table)
            })
            .collect()
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn value(&self, a: i64) -> Option<RootOfUnity> {
        let r = a.rem_euclid(self.modulus as i64) as usize;
        self.table[r].map(|k| RootOfUnity { k, n: self.n })
    }

    /// χ(a) as an element of ℚ(ζ_n), zero off the units.
    pub fn value_cyc(&self, a: i64) -> CycNumber {
        self.value(a).map_or_else(CycNumber::zero, |r| r.to_cyc())
    }

    pub fn order(&self) -> u64 {
        self.table.iter().flatten().fold(1, |acc, &k| crate::arith::lcm(acc, self.n / gcd(k, self.n)))
    }

    pub fn is_even(&self) -> bool {
        self.value(-1).is_none_or(|r| r.is_one())
    }

    /// Smallest modulus f | m through which χ factors.
    pub fn conductor(&self) -> u64 {
        let m = self.modulus;
        for d in divisors(m) {
            let ok = (0..m).all(|a| {
                if a % d != 1 % d {
                    return true;
                }
                self.table[a as usize].is_none_or(|k| k == 0)
            });
            if ok {
                return d;
            }
        }
        m
    }

    pub fn is_trivial(&self) -> bool {
        self.table.iter().flatten().all(|&k| k == 0)
    }

    /// The primitive character inducing χ.
    pub fn primitive(&self) -> DirichletChar {
        let f = self.conductor();
        let table = (0..f)
            .map(|b| {
                if gcd(b, f) != 1 && f > 1 {
                    None
                } else {
                    let a = lift_residue(b, f, self.modulus);
                    self.table[a as usize]
                }
            })
            .collect();
        Self::from_table(f, self.n, table)
    }

    pub fn pow(&self, a: i64) -> DirichletChar {
        let n = self.n as i64;
        let table = self.table.iter().map(|v| v.map(|k| ((k as i64 * a).rem_euclid(n)) as u64)).collect();
        Self::from_table(self.modulus, self.n, table)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let vals: Vec<serde_json::Value> = (0..self.modulus)
            .map(|a| match self.table[a as usize] {
                Some(k) => json!(format!("{}/{}", k, self.n)),
                None => serde_json::Value::Null,
            })
            .collect();
        json!({"modulus": self.modulus, "conductor": self.conductor(), "values": vals})
    }
}

/// Finite places in Σ other than those dividing the conductor of χ, with χ(ℓ).
fn unramified_places(chi: &DirichletChar, sigma: &PlaceSet) -> Vec<(u64, RootOfUnity)> {
    let prim = chi.primitive();
    let f = prim.modulus();
    sigma
        .iter()
        .filter_map(|p| match p {
            Place::Finite(l) if f % l != 0 || f == 1 => Some((*l, prim.value(*l as i64).unwrap())),
            _ => None,
        })
        .collect()
}

/// r_Σ(χ): for χ ≠ 1 the number of v ∈ Σ ∪ {∞} with χ trivial on the decomposition group
/// at v; for χ = 1, |Σ ∪ {∞}| − 1.
pub fn order_r_sigma(chi: &DirichletChar, sigma: &PlaceSet) -> usize {
    let finite = sigma.iter().filter(|p| matches!(p, Place::Finite(_))).count();
    if chi.is_trivial() {
        return finite;
    }
    let split = unramified_places(chi, sigma).iter().filter(|(_, v)| v.is_one()).count();
    split + chi.is_even() as usize
}

/// B_{1,χ} = f^{-1} Σ_{a=1}^{f} χ(a)·a for the primitive character of conductor f; B_{1,1} = 1/2.
pub fn bernoulli_b1(chi: &DirichletChar) -> CycNumber {
    let prim = chi.primitive();
    let f = prim.modulus();
    if f == 1 {
        return CycNumber::from_rational(BigRational::new(1.into(), 2.into()));
    }
    let mut acc = CycNumber::zero();
    for a in 1..=f {
        if let Some(r) = prim.value(a as i64) {
            acc = acc.add(&r.to_cyc().scale(&BigRational::from_integer(a.into())));
        }
    }
    acc.scale(&BigRational::new(1.into(), f.into()))
}

/// L(χ_prim, 0): −B_{1,χ} for χ ≠ 1 and ζ(0) = −1/2.
pub fn l_value_at_zero(chi: &DirichletChar) -> CycNumber {
    if chi.is_trivial() {
        return CycNumber::from_rational(BigRational::new((-1).into(), 2.into()));
    }
    bernoulli_b1(chi).neg()
}

fn euler_product_exact(chi: &DirichletChar, sigma: &PlaceSet, t: &[u64]) -> CycNumber {
    let mut acc = CycNumber::one();
    for (_, v) in unramified_places(chi, sigma) {
        if !v.is_one() {
            acc = acc.mul(&CycNumber::one().sub(&v.to_cyc()));
        }
    }
    let prim = chi.primitive();
    for &l in t {
        let v = prim.value(l as i64).map_or_else(CycNumber::zero, |r| r.to_cyc());
        acc = acc.mul(&CycNumber::one().sub(&v.scale(&BigRational::from_integer(l.into()))));
    }
    acc
}

/// Exact L_{Σ,T}(χ, 0), or `None` when r_Σ(χ) > 0.
pub fn l_sigma_t_at_zero(chi: &DirichletChar, sigma: &PlaceSet, t: &[u64]) -> Option<CycNumber> {
    if order_r_sigma(chi, sigma) > 0 {
        return None;
    }
    Some(l_value_at_zero(chi).mul(&euler_product_exact(chi, sigma, t)))
}

fn check_sigma_t(sigma: &PlaceSet, t: &[u64]) -> Result<()> {
    for &l in t {
        if sigma.contains(&Place::Finite(l)) {
            return invalid(format!("{l} lies in both Σ and T"));
        }
    }
    Ok(())
}

/// Tr_{ℚ(ζ_L)/ℚ} of an element given at level L.
pub fn trace_to_rationals(x: &CycNumber) -> BigRational {
    let l = x.level();
    x.coeffs()
        .iter()
        .enumerate()
        .fold(BigRational::zero(), |acc, (j, c)| acc + c * BigRational::from_integer(ramanujan_sum(l, j as u64).into()))
}

/// Galois orbits of characters under χ ↦ χ^a, (a, ord χ) = 1; one representative each.
pub fn character_orbits(group: &FiniteAbelianGroup) -> Vec<Character> {
    let chars = group.all_characters();
    let mut seen = std::collections::HashSet::new();
    let mut reps = Vec::new();
    for chi in chars {
        if seen.contains(&chi.k) {
            continue;
        }
        let d = chi.order();
        for a in 1..=d {
            if gcd(a, d) == 1 {
                seen.insert(chi.pow(a as i64).k);
            }
        }
        reps.push(chi);
    }
    reps
}

/// θ_{E,Σ,T}(0) = Σ_χ L_{Σ,T}(χ,0)·e_{χ^{-1}} ∈ ℚ[𝒢_E] (characters with r_Σ(χ) > 0 contribute 0).
pub fn stickelberger(e: &AbelianField, sigma: &PlaceSet, t: &[u64]) -> Result<RatGroupRing> {
    check_sigma_t(sigma, t)?;
    let g = e.galois_group();
    let n = g.exponent();
    let mut coeffs = vec![BigRational::zero(); g.order()];
    for chi in character_orbits(g) {
        let dc = DirichletChar::from_field_character(e, &chi);
        let Some(l) = l_sigma_t_at_zero(&dc, sigma, t) else { continue };
        if l.is_zero() {
            continue;
        }
        let d = chi.order();
        let l = l.lift(crate::arith::lcm(l.level(), n));
        let scale = BigRational::new(BigInt::from(euler_phi(d)), BigInt::from(euler_phi(l.level())));
        for (s, c) in coeffs.iter_mut().enumerate() {
            // orbit sum Σ_a σ_a(L·χ(σ)) = Tr_{ℚ(ζ_d)/ℚ}
            let y = l.mul(&CycNumber::zeta(n, chi.exponent_at(s) as i64));
            *c += trace_to_rationals(&y) * &scale;
        }
    }
    let inv = BigRational::new(BigInt::one(), BigInt::from(g.order()));
    let coeffs = coeffs.into_iter().map(|c| c * &inv).collect();
    RatGroupRing::from_coeffs(g, coeffs)
}

fn log_cache() -> &'static Mutex<HashMap<(u64, u32), Ball>> {
    static C: OnceLock<Mutex<HashMap<(u64, u32), Ball>>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// ln n for a positive integer, assembled from cached logarithms of its prime factors.
pub fn ln_int(n: u64, bits: u32) -> Ball {
    let mut acc = Ball::zero(bits);
    for (p, e) in factorize(n) {
        let key = (p, bits);
        let lp = {
            let cached = log_cache().lock().unwrap().get(&key).cloned();
            match cached {
                Some(b) => b,
                None => {
                    let b = Ball::from_int(p, bits).ln().expect("positive");
                    log_cache().lock().unwrap().insert(key, b.clone());
                    b
                }
            }
        };
        acc = acc.add(&lp.mul_int(&BigInt::from(e)));
    }
    acc
}

fn bernoulli_cached(n: usize) -> Arc<Vec<BigRational>> {
    static C: OnceLock<Mutex<Option<Arc<Vec<BigRational>>>>> = OnceLock::new();
    let c = C.get_or_init(|| Mutex::new(None));
    let mut g = c.lock().unwrap();
    if let Some(v) = g.as_ref() {
        if v.len() > n {
            return v.clone();
        }
    }
    let v = Arc::new(bernoulli_numbers(n.max(64) + 1));
    *g = Some(v.clone());
    v
}

/// ζ'(0, a/f) = log Γ(a/f) − ½ log 2π via the shifted Stirling series with a rigorous remainder.
pub fn hurwitz_zeta_prime_at_zero(a: u64, f: u64, bits: u32) -> Ball {
    let w = bits + 32;
    let nshift = (bits / 2 + 10) as u64;
    let lnf = ln_int(f, w);
    // z = (a + N f)/f
    let znum = a + nshift * f;
    let z = BigRational::new(znum.into(), f.into());
    let lnz = ln_int(znum, w).sub(&lnf);
    let zb = Ball::from_rational(&z, w);
    let half = BigRational::new(1.into(), 2.into());
    let mut acc = lnz.mul(&Ball::from_rational(&(&z - &half), w)).sub(&zb);
    let bn = bernoulli_cached(4 * nshift as usize);
    let zinv = z.recip();
    let target = BigRational::new(BigInt::one(), BigInt::one() << (w - 8));
    let mut zpow = zinv.clone(); // z^{1-2j}
    let mut j = 1usize;
    loop {
        let b = &bn[2 * j];
        let coef = b / BigRational::from_integer(BigInt::from((2 * j) * (2 * j - 1)));
        acc = acc.add(&Ball::from_rational(&(&coef * &zpow), w));
        zpow = &zpow * &zinv * &zinv;
        let b_next = &bn[2 * j + 2];
        let bound = (b_next / BigRational::from_integer(BigInt::from((2 * j + 2) * (2 * j + 1)))).abs() * &zpow;
        if bound < target || 2 * j + 4 >= bn.len() {
            acc.rad += (bound * BigRational::from_integer(BigInt::one() << w)).ceil().to_integer() + 1;
            break;
        }
        j += 1;
    }
    // subtract Σ_{k<N} ln((a + k f)/f)
    let mut s = Ball::zero(w);
    for k in 0..nshift {
        s = s.add(&ln_int(a + k * f, w));
    }
    s = s.sub(&lnf.mul_int(&BigInt::from(nshift)));
    acc.sub(&s).with_prec(bits)
}

/// Σ_a χ(a)·r_a for real balls r_a indexed by residues 1..f.
fn twisted_sum(prim: &DirichletChar, bits: u32, mut term: impl FnMut(u64) -> Ball) -> ComplexBall {
    let f = prim.modulus();
    let mut acc = ComplexBall::zero(bits);
    for a in 1..f {
        if let Some(r) = prim.value(a as i64) {
            let z = ComplexBall::root_of_unity(r.k as i64, r.n, bits);
            acc = acc.add(&z.mul_real(&term(a)));
        }
    }
    acc
}

/// L'(χ, 0) from −½ Σ χ(a) log|1 − ζ_f^a| (χ even, primitive, nontrivial).
pub fn lprime_log_sine(chi: &DirichletChar, bits: u32) -> Result<ComplexBall> {
    let prim = chi.primitive();
    if prim.modulus() == 1 || !prim.is_even() {
        return invalid("the log-sine formula needs a nontrivial even character");
    }
    let f = prim.modulus();
    let w = bits + 16;
    let ln2 = crate::ball::ln2(w);
    let s = twisted_sum(&prim, w, |a| {
        let (_, sn) = cos_sin_pi(&BigInt::from(a), &BigInt::from(f), w);
        sn.ln().expect("sin(πa/f) > 0").add(&ln2)
    });
    Ok(s.mul_rational(&BigRational::new((-1).into(), 2.into())).with_prec(bits))
}

/// L'(χ, 0) = B_{1,χ} log f + Σ χ(a) ζ'(0, a/f) for a nontrivial primitive χ.
pub fn lprime_hurwitz(chi: &DirichletChar, bits: u32) -> Result<ComplexBall> {
    let prim = chi.primitive();
    if prim.modulus() == 1 {
        return invalid("the trivial character has a pole-free ζ'(0) handled separately");
    }
    let f = prim.modulus();
    let w = bits + 16;
    let s = twisted_sum(&prim, w, |a| hurwitz_zeta_prime_at_zero(a, f, w));
    let b1 = bernoulli_b1(&prim).embed(1, w)?;
    Ok(s.add(&b1.mul_real(&ln_int(f, w))).with_prec(bits))
}

/// L'_Σ(χ, 0) for χ even nontrivial with r_Σ(χ) = 1, from two independent evaluations.
pub fn leading_term_numeric(chi: &DirichletChar, sigma: &PlaceSet, bits: u32) -> Result<ComplexBall> {
    check_precision(bits)?;
    if chi.is_trivial() || !chi.is_even() {
        return invalid("leading_term_numeric needs a nontrivial even character");
    }
    if order_r_sigma(chi, sigma) != 1 {
        return invalid("leading_term_numeric needs r_Σ(χ) = 1");
    }
    let a = lprime_log_sine(chi, bits)?;
    let b = lprime_hurwitz(chi, bits)?;
    let both = a
        .intersect(&b)
        .ok_or_else(|| Error::OracleDisagreement(format!("L'(χ,0): {a} vs {b}")))?;
    let ef = euler_product_exact(chi, sigma, &[]).embed(1, bits)?;
    Ok(both.mul(&ef))
}

/// Which evaluation of L'(χ, 0) feeds a leading term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LPrimeOracle {
    LogSine,
    Hurwitz,
    /// Both, intersected; disjoint intervals are an error.
    Both,
}

/// Leading coefficient of L_{Σ,T}(χ, s) at s = 0 and its order r_Σ(χ).
pub fn leading_term(chi: &DirichletChar, sigma: &PlaceSet, t: &[u64], bits: u32) -> Result<(usize, ComplexBall)> {
    leading_term_with(chi, sigma, t, bits, LPrimeOracle::Both)
}

pub fn leading_term_with(
    chi: &DirichletChar,
    sigma: &PlaceSet,
    t: &[u64],
    bits: u32,
    oracle: LPrimeOracle,
) -> Result<(usize, ComplexBall)> {
    check_precision(bits)?;
    check_sigma_t(sigma, t)?;
    let r = order_r_sigma(chi, sigma);
    let base = if !chi.is_trivial() && chi.is_even() {
        match oracle {
            LPrimeOracle::LogSine => lprime_log_sine(chi, bits)?,
            LPrimeOracle::Hurwitz => lprime_hurwitz(chi, bits)?,
            LPrimeOracle::Both => {
                let a = lprime_log_sine(chi, bits)?;
                let b = lprime_hurwitz(chi, bits)?;
                a.intersect(&b).ok_or_else(|| Error::OracleDisagreement(format!("L'(χ,0): {a} vs {b}")))?
            }
        }
    } else {
        l_value_at_zero(chi).embed(1, bits)?
    };
    let mut acc = base.mul(&euler_product_exact(chi, sigma, t).embed(1, bits)?);
    for (l, v) in unramified_places(chi, sigma) {
        if v.is_one() {
            // 1 − ℓ^{-s} = s·log ℓ + O(s²)
            acc = acc.mul_real(&ln_int(l, bits));
        }
    }
    Ok((r, acc))
}

/// One L-value record.
#[derive(Clone, Debug)]
pub struct LValueRecord {
    pub chi: DirichletChar,
    pub sigma: PlaceSet,
    pub t: Vec<u64>,
    pub order: usize,
    pub exact: Option<CycNumber>,
    pub leading: Option<ComplexBall>,
}

impl LValueRecord {
    pub fn compute(chi: &DirichletChar, sigma: &PlaceSet, t: &[u64], bits: Option<u32>) -> Result<Self> {
        check_sigma_t(sigma, t)?;
        let order = order_r_sigma(chi, sigma);
        let exact = l_sigma_t_at_zero(chi, sigma, t);
        let leading = match (order, bits) {
            (0, _) | (_, None) => None,
            (_, Some(b)) => Some(leading_term(chi, sigma, t, b)?.1),
        };
        Ok(LValueRecord { chi: chi.clone(), sigma: sigma.clone(), t: t.to_vec(), order, exact, leading })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({
            "chi": self.chi.to_json(),
            "sigma": self.sigma.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "T": self.t,
            "order": self.order,
        });
        if let Some(x) = &self.exact {
            v["exact"] = match x.to_rational() {
                Some(q) => json!(format_rational(&q)),
                None => x.to_json(),
            };
        }
        if let Some(l) = &self.leading {
            v["leading"] = json!({
                "re": [l.re.lower_f64(), l.re.upper_f64()],
                "im": [l.im.lower_f64(), l.im.upper_f64()],
            });
        }
        v
    }
}

/// Group-ring element with complex-interval coefficients.
#[derive(Clone, Debug)]
pub struct BallGroupRing {
    pub group: FiniteAbelianGroup,
    pub coeffs: Vec<ComplexBall>,
}

impl BallGroupRing {
    pub fn contains_exact(&self, x: &RatGroupRing) -> bool {
        self.coeffs.iter().zip(x.coeffs()).all(|(b, q)| b.re.contains_rational(q) && b.im.contains_rational(&BigRational::zero()))
    }
}

/// θ*_{E,Σ,T}(0) = Σ_χ L*_{Σ,T}(χ,0)·e_{χ^{-1}}; with `only_order = Some(r)` the sum runs over
/// characters with r_Σ(χ) = r, i.e. the product with e_{E,Σ,r}.
pub fn equivariant_leading_term(
    e: &AbelianField,
    sigma: &PlaceSet,
    t: &[u64],
    bits: u32,
    only_order: Option<usize>,
) -> Result<BallGroupRing> {
    equivariant_leading_term_with(e, sigma, t, bits, only_order, LPrimeOracle::Both)
}

pub fn equivariant_leading_term_with(
    e: &AbelianField,
    sigma: &PlaceSet,
    t: &[u64],
    bits: u32,
    only_order: Option<usize>,
    oracle: LPrimeOracle,
) -> Result<BallGroupRing> {
    check_precision(bits)?;
    let g = e.galois_group();
    let n = g.exponent();
    let w = bits + 16;
    let mut coeffs = vec![ComplexBall::zero(w); g.order()];
    for chi in g.all_characters() {
        let dc = DirichletChar::from_field_character(e, &chi);
        let (r, l) = leading_term_with(&dc, sigma, t, w, oracle)?;
        if only_order.is_some_and(|o| o != r) {
            continue;
        }
        for (s, c) in coeffs.iter_mut().enumerate() {
            let z = ComplexBall::root_of_unity(chi.exponent_at(s) as i64, n, w);
            *c = c.add(&l.mul(&z));
        }
    }
    let inv = BigRational::new(BigInt::one(), BigInt::from(g.order()));
    let coeffs = coeffs.into_iter().map(|c| c.mul_rational(&inv).with_prec(bits)).collect();
    Ok(BallGroupRing { group: g.clone(), coeffs })
}

/// Hurwitz ζ(s, x) for rational s with |s| < 1/2 and rational x > 0 (Euler–Maclaurin with a
/// rigorous tail bound).
pub fn hurwitz_zeta(s: &BigRational, x: &BigRational, bits: u32) -> Result<Ball> {
    let half = BigRational::new(1.into(), 2.into());
    if s.abs() >= half || !x.is_positive() {
        return invalid("hurwitz_zeta expects |s| < 1/2 and x > 0");
    }
    let w = bits + 32;
    let nshift = (bits / 2 + 10) as i64;
    let sb = Ball::from_rational(s, w);
    let pow_neg_s = |y: &BigRational| -> Ball {
        // y^{-s} = exp(−s ln y)
        let ly = Ball::from_rational(y, w).ln().expect("positive");
        ly.mul(&sb).neg().exp()
    };
    let mut acc = Ball::zero(w);
    for k in 0..nshift {
        acc = acc.add(&pow_neg_s(&(x + BigRational::from_integer(k.into()))));
    }
    let z = x + BigRational::from_integer(nshift.into());
    let zs = pow_neg_s(&z);
    let zb = Ball::from_rational(&z, w);
    // z^{1−s}/(s−1)
    acc = acc.add(&zs.mul(&zb).div(&Ball::from_rational(&(s - BigRational::one()), w))?);
    let bn = bernoulli_cached(4 * nshift as usize);
    let mut inner = Ball::from_rational(&half, w);
    let zinv = z.recip();
    let mut rising = s.clone(); // (s)_{2j−1}
    let mut zpow = zinv.clone(); // z^{1−2j}
    let mut fact = BigRational::from_integer(2.into()); // (2j)!
    let mut j = 1usize;
    let target = BigRational::new(BigInt::one(), BigInt::one() << (w - 8));
    let two_pi_hi = BigRational::new(6.into(), 1.into()); // 2π > 6
    loop {
        let term = &bn[2 * j] / &fact * &rising * &zpow;
        inner = inner.add(&Ball::from_rational(&term, w));
        // (s)_{2j+1} = (s)_{2j−1}(s+2j−1)(s+2j)
        let r_next = &rising * (s + BigRational::from_integer(BigInt::from(2 * j - 1))) * (s + BigRational::from_integer(BigInt::from(2 * j)));
        // |R| ≤ 4|(s)_{2M+1}|/(2π)^{2M+1} · z^{−σ−2M}/(σ+2M) with M = j; z^{-σ} ≤ z^{1/2}
        let m2 = BigInt::from(2 * j);
        let sigma_plus = s + BigRational::from_integer(m2.clone());
        let zneg = num_traits::pow(zinv.clone(), 2 * j) * (&z + BigRational::one());
        let bound = BigRational::from_integer(4.into()) * r_next.abs() / num_traits::pow(two_pi_hi.clone(), 2 * j + 1) * zneg / sigma_plus;
        if bound < target || 2 * j + 4 >= bn.len() {
            let rb = Ball { mid: BigInt::zero(), rad: (bound * BigRational::from_integer(BigInt::one() << w)).ceil().to_integer() + 1, prec: w };
            acc = acc.add(&zs.mul(&inner)).add(&rb);
            break;
        }
        rising = r_next;
        zpow = &zpow * &zinv * &zinv;
        fact = fact * BigRational::from_integer(BigInt::from((2 * j + 1) * (2 * j + 2)));
        j += 1;
    }
    Ok(acc.with_prec(bits))
}

/// L_Σ(χ, s) for rational s near 0 (numeric; used to observe the vanishing order).
pub fn l_sigma_numeric(chi: &DirichletChar, sigma: &PlaceSet, s: &BigRational, bits: u32) -> Result<ComplexBall> {
    let prim = chi.primitive();
    let f = prim.modulus();
    let w = bits + 16;
    let mut acc = if f == 1 {
        ComplexBall::from_real(hurwitz_zeta(s, &BigRational::one(), w)?)
    } else {
        let mut acc = ComplexBall::zero(w);
        for a in 1..f {
            if let Some(r) = prim.value(a as i64) {
                let z = ComplexBall::root_of_unity(r.k as i64, r.n, w);
                acc = acc.add(&z.mul_real(&hurwitz_zeta(s, &BigRational::new(a.into(), f.into()), w)?));
            }
        }
        // f^{-s}
        acc.mul_real(&ln_int(f, w).mul_rational(s).neg().exp())
    };
    for (l, v) in unramified_places(chi, sigma) {
        let ls = ln_int(l, w).mul_rational(s).neg().exp();
        let z = ComplexBall::root_of_unity(v.k as i64, v.n, w).mul_real(&ls);
        acc = acc.mul(&ComplexBall::from_real(Ball::from_int(1, w)).sub(&z));
    }
    Ok(acc.with_prec(bits))
}

/// Vanishing order of L_Σ(χ, s) at 0 read off from |L(h)/L(h/2)| ≈ 2^r.
pub fn observed_vanishing_order(chi: &DirichletChar, sigma: &PlaceSet, bits: u32) -> Result<usize> {
    let h = BigRational::new(1.into(), BigInt::from(1u64 << 14));
    let a = l_sigma_numeric(chi, sigma, &h, bits)?;
    let b = l_sigma_numeric(chi, sigma, &(h / BigRational::from_integer(2.into())), bits)?;
    let na = a.abs_sq().mid_f64().sqrt();
    let nb = b.abs_sq().mid_f64().sqrt();
    if !(na > 0.0 && nb > 0.0) {
        return Err(Error::InsufficientPrecision("L_Σ(χ, h) not resolved".into()));
    }
    Ok((na / nb).log2().round().max(0.0) as usize)
}

/// Partial-zeta form of θ_{E,S,∅}(0) for S the primes dividing the conductor plus ∞:
/// the image of Σ_{a mod m} (1/2 − a/m)·σ_a^{-1} under restriction to E.
pub fn stickelberger_partial_zeta(e: &AbelianField) -> RatGroupRing {
    let m = e.conductor();
    let g = e.galois_group();
    let mut coeffs = vec![BigRational::zero(); g.order()];
    if m == 1 {
        coeffs[0] = BigRational::new((-1).into(), 2.into());
    } else {
        for a in 1..m {
            if gcd(a, m) == 1 {
                let c = e.class_of(a as i64).unwrap();
                coeffs[g.inv_elem(c)] += BigRational::new(1.into(), 2.into()) - BigRational::new(a.into(), m.into());
            }
        }
    }
    RatGroupRing::from_coeffs(g, coeffs).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::places;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn quadratic(m: u64) -> DirichletChar {
        DirichletChar::all_mod(m).into_iter().find(|c| c.order() == 2 && c.conductor() == m).unwrap()
    }

    #[test]
    fn bernoulli_examples() {
        assert_eq!(bernoulli_b1(&quadratic(4)).to_rational(), Some(q(-1, 2)));
        assert_eq!(bernoulli_b1(&quadratic(3)).to_rational(), Some(q(-1, 3)));
        let triv = DirichletChar::all_mod(1).remove(0);
        assert_eq!(bernoulli_b1(&triv).to_rational(), Some(q(1, 2)));
    }

    #[test]
    fn orders_of_vanishing() {
        let s = places(&[3], true);
        let chi3 = quadratic(3);
        assert_eq!(order_r_sigma(&chi3, &s), 0);
        let triv = DirichletChar::all_mod(3).into_iter().find(|c| c.is_trivial()).unwrap();
        assert_eq!(order_r_sigma(&triv, &s), 1);
        assert_eq!(order_r_sigma(&quadratic(5), &places(&[5], true)), 1);
    }

    #[test]
    fn stickelberger_examples() {
        let e = AbelianField::cyclotomic(3).unwrap();
        let s = places(&[3], true);
        let th = stickelberger(&e, &s, &[]).unwrap();
        let g = e.galois_group();
        assert_eq!(th, RatGroupRing::parse(g, "1/6*[0] + -1/6*[1]").unwrap());
        let th5 = stickelberger(&e, &s, &[5]).unwrap();
        assert_eq!(th5, RatGroupRing::parse(g, "1*[0] + -1*[1]").unwrap());
        let e4 = AbelianField::cyclotomic(4).unwrap();
        let th4 = stickelberger(&e4, &places(&[2], true), &[]).unwrap();
        assert_eq!(th4, RatGroupRing::parse(e4.galois_group(), "1/4*[0] + -1/4*[1]").unwrap());
        let r5 = AbelianField::real_cyclotomic(5).unwrap();
        assert!(stickelberger(&r5, &places(&[5], true), &[]).unwrap().is_zero());
        assert!(stickelberger(&e, &s, &[3]).is_err());
    }

    #[test]
    fn stickelberger_matches_partial_zeta() {
        for m in [3u64, 4, 5, 7, 8, 12, 13, 15, 16, 20, 21] {
            let e = AbelianField::cyclotomic(m).unwrap();
            let s = e.s_places().into_iter().chain([Place::Infinite]).collect();
            assert_eq!(stickelberger(&e, &s, &[]).unwrap(), stickelberger_partial_zeta(&e), "m = {m}");
        }
    }

    #[test]
    fn two_derivative_oracles_agree() {
        for m in [5u64, 8, 12, 13] {
            for chi in DirichletChar::all_mod(m) {
                if chi.is_trivial() || !chi.is_even() || chi.conductor() != m {
                    continue;
                }
                let a = lprime_log_sine(&chi, 128).unwrap();
                let b = lprime_hurwitz(&chi, 128).unwrap();
                assert!(a.overlaps(&b), "m = {m}");
                assert!(a.width() < 1e-30);
            }
        }
    }

    #[test]
    fn zeta_near_zero() {
        let z = hurwitz_zeta(&BigRational::zero(), &BigRational::one(), 96).unwrap();
        assert!(z.contains_rational(&q(-1, 2)));
        // ζ'(0) = −½ log 2π
        let d = hurwitz_zeta_prime_at_zero(1, 1, 96);
        let expect = -0.5 * (2.0 * std::f64::consts::PI).ln();
        assert!((d.mid_f64() - expect).abs() < 1e-14);
    }
}
