//! Units of abelian fields as formal products with group-ring exponents, valuations at
//! primes of cyclotomic fields, complex embeddings and the Dirichlet regulator.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::json;

use crate::arith::{euler_phi, gcd, lcm, prime_divisors, prime_power};
use crate::ball::{check_precision, cos_sin_pi, Ball, ComplexBall};
use crate::cycnum::{equal_up_to_root_of_unity, CycNumber, CyclicAccumulator};
use crate::error::{invalid, Error, Result};
use crate::field::{AbelianField, Place, PlaceSet};
use crate::groupring::RatGroupRing;
use crate::linalg::{hnf, hnf_contains, IntMatrix};
use crate::poly::{cyclotomic_factors_mod, cyclotomic_poly, FpPoly};

/// Smallest `r' ≡ r (mod m)` that is a unit modulo `level` (`m | level`).
pub fn lift_residue(r: u64, m: u64, level: u64) -> u64 {
    let m = m.max(1);
    let mut x = r % m;
    if x == 0 && m == 1 {
        x = 1;
    }
    while gcd(x, level) != 1 {
        x += m;
    }
    x % level.max(1)
}

/// An element of ℚ(ζ_level)^×, either explicitly or as scalar·∏(1 − ζ_level^k)^{e_k}.
#[derive(Clone, Debug, PartialEq)]
pub enum CycElement {
    Dense(CycNumber),
    Product { level: u64, scalar: BigRational, terms: BTreeMap<u64, i64> },
}

impl CycElement {
    pub fn one_minus_zeta(level: u64, k: u64) -> Result<Self> {
        if k % level == 0 {
            return invalid("1 − ζ^0 is zero");
        }
        Ok(CycElement::Product { level, scalar: BigRational::one(), terms: BTreeMap::from([(k % level, 1)]) })
    }

    pub fn constant(q: BigRational) -> Result<Self> {
        if q.is_zero() {
            return invalid("zero is not a unit");
        }
        Ok(CycElement::Product { level: 1, scalar: q, terms: BTreeMap::new() })
    }

    pub fn level(&self) -> u64 {
        match self {
            CycElement::Dense(x) => x.level(),
            CycElement::Product { level, .. } => *level,
        }
    }

    fn lift_product(level: u64, scalar: &BigRational, terms: &BTreeMap<u64, i64>, target: u64) -> Self {
        let s = target / level;
        CycElement::Product {
            level: target,
            scalar: scalar.clone(),
            terms: terms.iter().map(|(&k, &e)| (k * s, e)).collect(),
        }
    }

    /// σ_a for a unit `a` modulo the level.
    pub fn galois(&self, a: u64) -> Result<Self> {
        match self {
            CycElement::Dense(x) => Ok(CycElement::Dense(x.galois(a as i64)?)),
            CycElement::Product { level, scalar, terms } => {
                if gcd(a, *level) != 1 && *level > 1 {
                    return invalid(format!("{a} is not a unit modulo {level}"));
                }
                let mut t = BTreeMap::new();
                for (&k, &e) in terms {
                    *t.entry(k * a % level).or_insert(0) += e;
                }
                t.retain(|_, e| *e != 0);
                Ok(CycElement::Product { level: *level, scalar: scalar.clone(), terms: t })
            }
        }
    }

    pub fn to_dense(&self) -> CycNumber {
        match self {
            CycElement::Dense(x) => x.clone(),
            CycElement::Product { level, scalar, terms } => {
                let mut num = CyclicAccumulator::one(*level);
                let mut den = CyclicAccumulator::one(*level);
                for (&k, &e) in terms {
                    let acc = if e > 0 { &mut num } else { &mut den };
                    for _ in 0..e.unsigned_abs() {
                        acc.mul_one_minus(k);
                    }
                }
                let n = num.to_cyc().scale(scalar);
                if terms.values().all(|&e| e > 0) {
                    n
                } else {
                    n.div(&den.to_cyc()).expect("nonzero product")
                }
            }
        }
    }

    /// Norm from ℚ(ζ_level) down to E (E ⊆ ℚ(ζ_level)), or from F to E when `over` is F.
    pub fn relative_norm(&self, e: &AbelianField, over: Option<&AbelianField>) -> Result<Self> {
        let level = lcm(self.level(), lcm(e.conductor(), over.map_or(1, |f| f.conductor())));
        let mut sub = e.fixing_residues(level)?;
        if let Some(f) = over {
            let big = f.fixing_residues(level)?;
            // coset representatives of (fixing E) / (fixing F)
            let bigset: BTreeSet<u64> = big.iter().copied().collect();
            let mut covered: BTreeSet<u64> = BTreeSet::new();
            let mut reps = Vec::new();
            for &a in &sub {
                if covered.contains(&a) {
                    continue;
                }
                reps.push(a);
                for &b in &bigset {
                    covered.insert(a * b % level);
                }
            }
            sub = reps;
        }
        let x = self.lift(level);
        match &x {
            CycElement::Product { scalar, terms, .. } => {
                let mut t = BTreeMap::new();
                for &a in &sub {
                    for (&k, &ex) in terms {
                        *t.entry(k * a % level).or_insert(0) += ex;
                    }
                }
                t.retain(|_, e| *e != 0);
                let s = num_traits::pow(scalar.clone(), sub.len());
                Ok(CycElement::Product { level, scalar: s, terms: t })
            }
            CycElement::Dense(d) => {
                let mut acc = CycNumber::one();
                for &a in &sub {
                    acc = acc.mul(&d.galois(a as i64)?);
                }
                Ok(CycElement::Dense(acc))
            }
        }
    }

    pub fn lift(&self, target: u64) -> Self {
        match self {
            CycElement::Dense(x) => CycElement::Dense(x.lift(target)),
            CycElement::Product { level, scalar, terms } => Self::lift_product(*level, scalar, terms, target),
        }
    }

    /// Whether every σ fixing E (at this element's level) fixes the element.
    pub fn lies_in(&self, e: &AbelianField) -> Result<bool> {
        let level = lcm(self.level(), e.conductor());
        let x = self.lift(level);
        for &h in &e.fixing_residues(level)? {
            let y = x.galois(h)?;
            let same = match (&x, &y) {
                (CycElement::Product { .. }, CycElement::Product { .. }) => x == y || x.to_dense() == y.to_dense(),
                _ => x.to_dense() == y.to_dense(),
            };
            if !same {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// log|ι_r(x)| where ι_r: ζ_level ↦ e^{2πi r/level}.
    pub fn log_abs(&self, r: u64, bits: u32) -> Result<Ball> {
        match self {
            CycElement::Dense(x) => x.embed(r as i64, bits)?.ln_abs(),
            CycElement::Product { level, scalar, terms } => {
                let w = bits;
                let mut acc = Ball::from_rational(&scalar.abs(), w).ln()?;
                let ln2 = crate::ball::ln2(w);
                for (&k, &e) in terms {
                    // |1 − e^{iθ}| = 2|sin(θ/2)|
                    let (_, s) = cos_sin_pi(&BigInt::from(k * r % level), &BigInt::from(*level), w);
                    let s = if s.mid.is_negative() { s.neg() } else { s };
                    let l = s.ln()?.add(&ln2);
                    acc = acc.add(&l.mul_int(&BigInt::from(e)));
                }
                Ok(acc)
            }
        }
    }

    /// Dense values serialize as `{m, coeffs}`; products as `{level, scalar, terms: [[k, e], ...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            CycElement::Dense(x) => x.to_json(),
            CycElement::Product { level, scalar, terms } => json!({
                "level": level,
                "scalar": crate::cycnum::format_rational(scalar),
                "terms": terms.iter().map(|(k, e)| json!([k, e])).collect::<Vec<_>>(),
            }),
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        if v.get("terms").is_none() {
            return Ok(CycElement::Dense(CycNumber::from_json(v)?));
        }
        let bad = |what: &str| Error::Parse(format!("product element: {what}"));
        let level = v["level"].as_u64().filter(|&l| l > 0).ok_or_else(|| bad("level"))?;
        let scalar = crate::cycnum::parse_rational(v["scalar"].as_str().ok_or_else(|| bad("scalar"))?)?;
        if scalar.is_zero() {
            return Err(bad("zero scalar"));
        }
        let mut terms = BTreeMap::new();
        for t in v["terms"].as_array().ok_or_else(|| bad("terms"))? {
            let k = t[0].as_u64().ok_or_else(|| bad("term index"))?;
            let e = t[1].as_i64().ok_or_else(|| bad("term exponent"))?;
            if k % level == 0 {
                return Err(bad("1 − ζ^0 is zero"));
            }
            *terms.entry(k % level).or_insert(0) += e;
        }
        terms.retain(|_, e| *e != 0);
        Ok(CycElement::Product { level, scalar, terms })
    }
}

/// The prime 𝔓 = (ℓ, g(ζ_level)) of ℤ[ζ_level] for an irreducible factor g of Φ_{m'} mod ℓ.
#[derive(Clone, Debug)]
pub struct PrimeAbove {
    pub level: u64,
    pub ell: u64,
    pub factor: FpPoly,
    /// Ramification index φ(ℓ^a).
    pub e: u64,
    /// Residue degree.
    pub f: u64,
}

/// The primes of ℤ[ζ_level] above ℓ, in a fixed order.
pub fn primes_above(level: u64, ell: u64) -> Vec<PrimeAbove> {
    let mut mp = level;
    let mut a = 0u32;
    while mp % ell == 0 {
        mp /= ell;
        a += 1;
    }
    let e = if a == 0 { 1 } else { euler_phi(ell.pow(a)) };
    cyclotomic_factors_mod(mp, ell)
        .into_iter()
        .map(|g| {
            let f = g.degree().unwrap_or(0) as u64;
            PrimeAbove { level, ell, factor: g, e, f }
        })
        .collect()
}

impl PrimeAbove {
    fn uniformizer_candidate(&self) -> CycNumber {
        let c: Vec<i64> = self.factor.c.iter().map(|&x| x as i64).collect();
        CycNumber::from_ints(self.level, &c)
    }

    /// Hermite basis of 𝔓^k in the power basis of ℤ[ζ_level].
    fn power_basis(&self, k: u64) -> IntMatrix {
        let phi = euler_phi(self.level) as usize;
        let pi = self.uniformizer_candidate();
        let top = k.div_ceil(self.e).min(k);
        let mut rows = Vec::new();
        for i in 0..=top {
            let gen = pi.pow(k - i).scale(&BigRational::from_integer(BigInt::from(self.ell).pow(i as u32)));
            for j in 0..phi {
                let y = gen.mul(&CycNumber::zeta(self.level, j as i64));
                rows.push(y.coeffs().iter().map(|c| c.to_integer()).collect());
            }
        }
        hnf(&rows)
    }

    /// ord_𝔓(x) for nonzero x.
    pub fn valuation(&self, x: &CycNumber) -> Result<i64> {
        if x.is_zero() {
            return invalid("valuation of zero");
        }
        let x = x.lift(lcm(x.level(), self.level));
        if x.level() != self.level {
            return invalid("element level exceeds the prime's level");
        }
        let (d, mut v) = x.scaled_integer_coeffs();
        let ell = BigInt::from(self.ell);
        let mut base = -(crate::arith::valuation(&d, self.ell).unwrap() as i64) * self.e as i64;
        while v.iter().all(|c| (c % &ell).is_zero()) {
            for c in v.iter_mut() {
                *c /= &ell;
            }
            base += self.e as i64;
        }
        let mut k = 0u64;
        loop {
            let b = self.power_basis(k + 1);
            if !hnf_contains(&b, &v) {
                return Ok(base + k as i64);
            }
            k += 1;
        }
    }
}

/// ord at the `which`-th prime above ℓ of ℤ[ζ_level], level = level of x.
pub fn valuation(x: &CycNumber, ell: u64, which: usize) -> Result<i64> {
    let ps = primes_above(x.level(), ell);
    let p = ps.get(which).ok_or_else(|| Error::InvalidArgument(format!("only {} primes above {ell}", ps.len())))?;
    p.valuation(x)
}

/// Whether x lies in every prime above ℓ of ℤ[ζ_m], m = level of x.
pub fn radical_congruence(x: &CycNumber, ell: u64) -> Result<bool> {
    let (d, v) = x.scaled_integer_coeffs();
    if (d % BigInt::from(ell)).is_zero() {
        return invalid(format!("{ell} divides a denominator"));
    }
    let mut mp = x.level();
    while mp % ell == 0 {
        mp /= ell;
    }
    let rad = FpPoly::from_ints(ell, &cyclotomic_poly(mp));
    Ok(FpPoly::from_ints(ell, &v).rem(&rad).is_zero())
}

/// N_{ℚ(ζ_m)/E}(x) for E inside ℚ(ζ_m), m the level of x.
pub fn norm_to_subfield(x: &CycNumber, e: &AbelianField) -> Result<CycNumber> {
    if x.level() % e.conductor() != 0 && e.conductor() != 1 {
        return Err(Error::InvalidArgument(format!(
            "{} is not a subfield of the cyclotomic field of level {}",
            e.label(),
            x.level()
        )));
    }
    let mut acc = CycNumber::one();
    for a in e.fixing_residues(x.level())? {
        acc = acc.mul(&x.galois(a as i64)?);
    }
    Ok(acc)
}

/// Absolute norm N_{ℚ(ζ_m)/ℚ}(x) as a rational number.
pub fn absolute_norm(x: &CycNumber) -> BigRational {
    let (d, v) = x.scaled_integer_coeffs();
    let m = x.level();
    let phi = euler_phi(m) as usize;
    // determinant of multiplication by the integral element d·x
    let y = CycNumber::new(m, v.iter().map(|c| BigRational::from_integer(c.clone())).collect());
    let rows: IntMatrix = (0..phi)
        .map(|j| y.mul(&CycNumber::zeta(m, j as i64)).coeffs().iter().map(|c| c.to_integer()).collect())
        .collect();
    let det = if m == 1 { v[0].clone() } else { crate::linalg::det_int(&rows) };
    BigRational::new(det, d.pow(phi as u32))
}

/// A formal product ∏ x_i^{λ_i} in ℚ ⊗ E^× with λ_i ∈ ℚ[𝒢_E]; σ ∈ 𝒢_E acts on x_i through
/// any residue representing it.
#[derive(Clone, Debug)]
pub struct MultiUnit {
    field: AbelianField,
    factors: Vec<(CycElement, RatGroupRing)>,
}

impl MultiUnit {
    pub fn one(field: &AbelianField) -> Self {
        MultiUnit { field: field.clone(), factors: vec![] }
    }

    pub fn new(field: &AbelianField, factors: Vec<(CycElement, RatGroupRing)>) -> Result<Self> {
        let mut out = Vec::new();
        for (x, lam) in factors {
            if lam.group() != field.galois_group() {
                return invalid("exponent lives in the wrong group ring");
            }
            let x = match x {
                CycElement::Dense(d) => {
                    if d.is_zero() {
                        return invalid("zero is not a unit");
                    }
                    let l = lcm(d.level(), field.conductor());
                    let low = d
                        .lift(l)
                        .lower(field.conductor())
                        .ok_or_else(|| Error::InvalidArgument("factor does not lie in the field".into()))?;
                    CycElement::Dense(low)
                }
                p => p,
            };
            if !x.lies_in(field)? {
                return invalid("factor does not lie in the field");
            }
            out.push((x, lam));
        }
        Ok(MultiUnit { field: field.clone(), factors: out })
    }

    /// x^λ with λ = c·1.
    pub fn simple(field: &AbelianField, x: CycElement, c: BigRational) -> Result<Self> {
        let g = field.galois_group();
        Self::new(field, vec![(x, RatGroupRing::one(g).scale(&c))])
    }

    pub fn field(&self) -> &AbelianField {
        &self.field
    }

    pub fn factors(&self) -> &[(CycElement, RatGroupRing)] {
        &self.factors
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.field, o.field);
        let mut f = self.factors.clone();
        f.extend(o.factors.iter().cloned());
        MultiUnit { field: self.field.clone(), factors: f }
    }

    /// u^λ.
    pub fn pow(&self, lam: &RatGroupRing) -> Self {
        let f = self.factors.iter().map(|(x, l)| (x.clone(), l.mul(lam))).collect();
        MultiUnit { field: self.field.clone(), factors: f }
    }

    pub fn pow_rational(&self, c: &BigRational) -> Self {
        let f = self.factors.iter().map(|(x, l)| (x.clone(), l.scale(c))).collect();
        MultiUnit { field: self.field.clone(), factors: f }
    }

    pub fn inverse(&self) -> Self {
        self.pow_rational(&-BigRational::one())
    }

    /// N_{F/E} for E ⊆ F = self.field.
    pub fn norm_to(&self, e: &AbelianField) -> Result<MultiUnit> {
        let table = e.restriction_table(&self.field)?;
        let mut f = Vec::new();
        for (x, lam) in &self.factors {
            let nx = x.relative_norm(e, Some(&self.field))?;
            f.push((nx, lam.restriction(e.galois_group(), &table)));
        }
        Ok(MultiUnit { field: e.clone(), factors: f })
    }

    /// Integer-exponent expansion of u^N: a single factored part plus dense factors.
    fn expand(&self) -> (BigInt, BTreeMap<u64, BigInt>, u64, BigRational, Vec<(CycNumber, BigInt)>) {
        let g = self.field.galois_group();
        let n = self
            .factors
            .iter()
            .fold(BigInt::one(), |acc, (_, l)| acc.lcm(&l.denominator()));
        let level = self.factors.iter().fold(1u64, |acc, (x, _)| lcm(acc, x.level()));
        let mut terms: BTreeMap<u64, BigInt> = BTreeMap::new();
        let mut scalar_exps: Vec<(BigRational, BigInt)> = Vec::new();
        let mut dense: Vec<(CycNumber, BigInt)> = Vec::new();
        for (x, lam) in &self.factors {
            for s in g.elements() {
                let c = lam.coeff(s);
                if c.is_zero() {
                    continue;
                }
                let k = (c * BigRational::from_integer(n.clone())).to_integer();
                let r = lift_residue(self.field.representative(s), self.field.conductor(), x.level());
                match x.galois(r).expect("unit residue") {
                    CycElement::Product { level: l, scalar, terms: t } => {
                        let step = level / l;
                        for (kk, e) in t {
                            *terms.entry(kk * step).or_insert_with(BigInt::zero) += &k * BigInt::from(e);
                        }
                        if !scalar.is_one() {
                            scalar_exps.push((scalar, k));
                        }
                    }
                    CycElement::Dense(d) => dense.push((d, k)),
                }
            }
        }
        terms.retain(|_, e| !e.is_zero());
        // combine rational scalars: keep sign parity separately (signs are torsion)
        let mut scalar = BigRational::one();
        for (q, k) in scalar_exps {
            let q = q.abs();
            let kk = k.to_i64().expect("exponent fits");
            scalar *= if kk >= 0 { num_traits::pow(q, kk as usize) } else { num_traits::pow(q.recip(), (-kk) as usize) };
        }
        (n, terms, level, scalar, dense)
    }

    /// Whether u is trivial in ℚ ⊗ E^× (a root of unity after clearing denominators).
    pub fn is_torsion(&self) -> bool {
        if self.factors.iter().all(|(_, l)| l.is_zero()) {
            return true;
        }
        let (_, terms, level, scalar, dense) = self.expand();
        let mut num = CyclicAccumulator::one(level);
        let mut den = CyclicAccumulator::one(level);
        for (&k, e) in &terms {
            let acc = if e.is_positive() { &mut num } else { &mut den };
            let cnt = e.abs().to_u64().expect("exponent fits");
            for _ in 0..cnt {
                acc.mul_one_minus(k);
            }
        }
        num.mul_int(scalar.numer());
        den.mul_int(scalar.denom());
        for (d, k) in dense {
            let (dd, v) = d.lift(level).scaled_integer_coeffs();
            let cnt = k.abs().to_u64().expect("exponent fits");
            let (acc, other) = if k.is_positive() { (&mut num, &mut den) } else { (&mut den, &mut num) };
            for _ in 0..cnt {
                acc.mul_poly(&v);
                other.mul_int(&dd);
            }
        }
        equal_up_to_root_of_unity(&num.to_cyc(), &den.to_cyc()).is_some()
    }

    /// Equality in ℚ ⊗ E^×.
    pub fn equals(&self, o: &Self) -> bool {
        self.field == o.field && self.mul(&o.inverse()).is_torsion()
    }

    /// Sum over the factors of λ·(per-σ data), i.e. the vector τ ↦ Σ_i Σ_σ λ_i(σ) h(x_i, τ^{-1}σ).
    fn convolve<T: Clone>(
        &self,
        mut h: impl FnMut(&CycElement, usize) -> Result<T>,
        zero: T,
        add: impl Fn(&T, &T) -> T,
        scale: impl Fn(&T, &BigRational) -> T,
    ) -> Result<Vec<T>> {
        let g = self.field.galois_group();
        let n = g.order();
        let mut out = vec![zero; n];
        for (x, lam) in &self.factors {
            let vals: Vec<T> = (0..n).map(|rho| h(x, rho)).collect::<Result<_>>()?;
            for tau in 0..n {
                let ti = g.inv_elem(tau);
                for s in 0..n {
                    let c = lam.coeff(s);
                    if c.is_zero() {
                        continue;
                    }
                    let rho = g.mul(ti, s);
                    out[tau] = add(&out[tau], &scale(&vals[rho], c));
                }
            }
        }
        Ok(out)
    }

    /// ord_{τ𝔭}(u) for τ ∈ 𝒢_E, where 𝔭 is the fixed prime of E above p.
    pub fn valuations_at(&self, p: u64) -> Result<Vec<BigRational>> {
        let e_field = &self.field;
        let inertia = e_field.inertia_group(p).len() as u64;
        let mut cache: HashMap<(usize, usize), BigRational> = HashMap::new();
        let factor_index: Vec<*const CycElement> = self.factors.iter().map(|(x, _)| x as *const _).collect();
        self.convolve(
            |x, rho| {
                let fi = factor_index.iter().position(|&q| std::ptr::eq(q, x)).unwrap();
                if let Some(v) = cache.get(&(fi, rho)) {
                    return Ok(v.clone());
                }
                let v = element_valuation(x, e_field, p, rho, inertia)?;
                cache.insert((fi, rho), v.clone());
                Ok(v)
            },
            BigRational::zero(),
            |a, b| a + b,
            |a, c| a * c,
        )
    }

    /// Primes at which some factor may have nonzero valuation.
    pub fn support_candidates(&self) -> BTreeSet<u64> {
        let mut s = BTreeSet::new();
        for (x, lam) in &self.factors {
            if lam.is_zero() {
                continue;
            }
            match x {
                CycElement::Product { level, scalar, terms } => {
                    for q in [scalar.numer(), scalar.denom()] {
                        let q = q.abs().to_u64().unwrap_or(u64::MAX);
                        s.extend(prime_divisors(q));
                    }
                    for &k in terms.keys() {
                        let d = level / gcd(*level, k);
                        if let Some((p, _)) = prime_power(d) {
                            s.insert(p);
                        }
                    }
                }
                CycElement::Dense(d) => {
                    let nrm = absolute_norm(d);
                    for q in [nrm.numer(), nrm.denom()] {
                        s.extend(prime_divisors(q.abs().to_u64().expect("norm fits in u64")));
                    }
                    s.extend(prime_divisors(d.denominator().to_u64().expect("denominator fits")));
                }
            }
        }
        s
    }

    /// Checks that u is an S-unit for the finite primes of `sigma`.
    pub fn check_s_unit(&self, sigma: &PlaceSet) -> Result<()> {
        for p in self.support_candidates() {
            if sigma.contains(&Place::Finite(p)) {
                continue;
            }
            let v = self.valuations_at(p)?;
            if v.iter().any(|x| !x.is_zero()) {
                return Err(Error::NotSUnit(format!("nonzero valuation above {p}")));
            }
        }
        Ok(())
    }

    /// log|ι(τ^{-1} u)| for each τ ∈ 𝒢_E.
    pub fn log_abs_vector(&self, bits: u32) -> Result<Vec<Ball>> {
        check_precision(bits)?;
        let m = self.field.conductor();
        let field = self.field.clone();
        self.convolve(
            |x, rho| {
                let r = lift_residue(field.representative(rho), m, x.level());
                x.log_abs(r, bits)
            },
            Ball::zero(bits),
            |a, b| a.add(b),
            |a, c| a.mul_rational(c),
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.factors
                .iter()
                .map(|(x, l)| json!({"base": x.to_json(), "exponent": l.to_text()}))
                .collect(),
        )
    }

    pub fn from_json(field: &AbelianField, v: &serde_json::Value) -> Result<Self> {
        let arr = v.as_array().ok_or_else(|| Error::Parse("MultiUnit must be an array".into()))?;
        let mut f = Vec::new();
        for item in arr {
            let base = CycElement::from_json(&item["base"])?;
            let e = item["exponent"].as_str().ok_or_else(|| Error::Parse("missing exponent".into()))?;
            f.push((base, RatGroupRing::parse(field.galois_group(), e)?));
        }
        Self::new(field, f)
    }
}

/// ord_{𝔭_E}(ρ x) for x ∈ E, with 𝔭_E the prime below the fixed prime of ℚ(ζ_{m_E}).
fn element_valuation(x: &CycElement, e: &AbelianField, p: u64, rho: usize, inertia: u64) -> Result<BigRational> {
    match x {
        CycElement::Product { level, scalar, terms } => {
            let (_, a_l) = split(*level, p);
            let e_l = if a_l == 0 { 1 } else { euler_phi(p.pow(a_l)) };
            let mut v = BigRational::zero();
            let vp = |q: &BigInt| crate::arith::valuation(q, p).unwrap_or(0) as i64;
            v += BigRational::from_integer(BigInt::from((vp(scalar.numer()) - vp(scalar.denom())) * e_l as i64));
            for (&k, &ex) in terms {
                let d = level / gcd(*level, k);
                if let Some((q, j)) = prime_power(d) {
                    if q == p {
                        v += BigRational::new(BigInt::from(e_l as i64 * ex), BigInt::from(euler_phi(p.pow(j))));
                    }
                }
            }
            // ord_{𝔓_L} / e(𝔓_L | 𝔭_E)
            Ok(v * BigRational::new(BigInt::from(inertia), BigInt::from(e_l)))
        }
        CycElement::Dense(d) => {
            let m = e.conductor();
            let r = e.representative(rho);
            let y = d.galois(r as i64)?;
            let prime = &primes_above(m, p)[0];
            let v = prime.valuation(&y)?;
            Ok(BigRational::new(BigInt::from(v * inertia as i64), BigInt::from(prime.e)))
        }
    }
}

fn split(m: u64, p: u64) -> (u64, u32) {
    let mut mp = m;
    let mut a = 0;
    while mp % p == 0 {
        mp /= p;
        a += 1;
    }
    (mp, a)
}

/// A coefficient vector on the places of E above a set Σ of places of ℚ. The place τ·v_E is
/// keyed by the smallest index in the coset τ·D_v.
#[derive(Clone, Debug)]
pub struct PlaceVector {
    pub field: AbelianField,
    pub entries: Vec<(Place, usize, Ball)>,
}

impl PlaceVector {
    pub fn coefficient(&self, place: Place, tau: usize) -> Option<&Ball> {
        self.entries.iter().find(|(p, t, _)| *p == place && *t == tau).map(|(_, _, b)| b)
    }

    pub fn coefficient_sum(&self) -> Option<Ball> {
        let mut it = self.entries.iter();
        let first = it.next()?.2.clone();
        Some(it.fold(first, |a, (_, _, b)| a.add(b)))
    }

    /// Coefficient sum contains 0.
    pub fn in_x_submodule(&self) -> bool {
        self.coefficient_sum().map_or(true, |s| s.contains_zero())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let g = self.field.galois_group();
        serde_json::Value::Array(
            self.entries
                .iter()
                .map(|(p, t, b)| {
                    json!({"place": p.to_string(), "tau": g.format_element(*t), "value": [b.lower_f64(), b.upper_f64()]})
                })
                .collect(),
        )
    }
}

/// Coset representatives (smallest index) of 𝒢_E / D for a subgroup D.
pub fn coset_representatives(field: &AbelianField, d: &[usize]) -> Vec<(usize, Vec<usize>)> {
    let g = field.galois_group();
    let mut seen = vec![false; g.order()];
    let mut out = Vec::new();
    for t in g.elements() {
        if seen[t] {
            continue;
        }
        let coset: Vec<usize> = d.iter().map(|&x| g.mul(t, x)).collect();
        for &c in &coset {
            seen[c] = true;
        }
        out.push((t, coset));
    }
    out
}

/// λ_{E,Σ}(u) = −Σ_w log|u|_w · w with normalized absolute values.
pub fn regulator_image(u: &MultiUnit, sigma: &PlaceSet, bits: u32) -> Result<PlaceVector> {
    check_precision(bits)?;
    u.check_s_unit(sigma)?;
    let e = u.field();
    let mut entries = Vec::new();
    for &place in sigma {
        match place {
            Place::Infinite => {
                let logs = u.log_abs_vector(bits)?;
                let d = e.decomposition_group_infinite();
                let weight = if e.is_real() { 1 } else { 2 };
                for (t, _) in coset_representatives(e, &d) {
                    entries.push((place, t, logs[t].mul_int(&BigInt::from(-weight))));
                }
            }
            Place::Finite(p) => {
                let vals = u.valuations_at(p)?;
                let f = e.residue_degree(p);
                let logp = Ball::from_int(p, bits).ln()?;
                let d = e.decomposition_group(p);
                for (t, _) in coset_representatives(e, &d) {
                    // −log|u|_{τ𝔭} = ord_{τ𝔭}(u)·log N𝔭
                    entries.push((place, t, logp.mul_rational(&(&vals[t] * BigRational::from_integer(BigInt::from(f))))));
                }
            }
        }
    }
    Ok(PlaceVector { field: e.clone(), entries })
}

/// Complex embedding of x at ζ ↦ e^{2πi a/m}.
pub fn embed_complex(x: &CycNumber, a: i64, bits: u32) -> Result<ComplexBall> {
    x.embed(a, bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn norms_of_one_minus_zeta() {
        let x = CycNumber::one().sub(&CycNumber::zeta(5, 1));
        assert_eq!(norm_to_subfield(&x, &AbelianField::rationals()).unwrap(), CycNumber::from_int(5));
        let y = CycNumber::one().sub(&CycNumber::zeta(12, 1));
        let e = AbelianField::cyclotomic(4).unwrap();
        let n = norm_to_subfield(&y, &e).unwrap();
        assert_eq!(n, CycNumber::zeta(4, 3));
        let z = CycNumber::one().sub(&CycNumber::zeta(4, 1));
        let tw = z.div(&CycNumber::one().sub(&CycNumber::zeta(4, 3))).unwrap();
        assert_eq!(n, tw);
    }

    #[test]
    fn valuations_at_ramified_and_split_primes() {
        let x = CycNumber::one().sub(&CycNumber::zeta(9, 1));
        assert_eq!(valuation(&x, 3, 0).unwrap(), 1);
        assert_eq!(primes_above(9, 3)[0].valuation(&CycNumber::from_int(3)).unwrap(), 6);
        // 11 splits completely in ℚ(ζ_5)
        let ps = primes_above(5, 11);
        assert_eq!(ps.len(), 4);
        let eleven = CycNumber::from_int(11);
        for p in &ps {
            assert_eq!(p.valuation(&eleven).unwrap(), 1);
        }
        let half = CycNumber::from_rational(BigRational::new(1.into(), 2.into()));
        assert_eq!(valuation(&half, 2, 0).unwrap(), -1);
    }

    #[test]
    fn radical_congruences() {
        assert!(radical_congruence(&CycNumber::from_int(3), 3).unwrap());
        assert!(!radical_congruence(&CycNumber::one(), 3).unwrap());
        let z3 = CycNumber::zeta(3, 1);
        let z4 = CycNumber::zeta(4, 1);
        let one = CycNumber::one();
        let d = one.sub(&z3.mul(&z4)).sub(&one.sub(&z4));
        assert!(radical_congruence(&d, 3).unwrap());
    }

    #[test]
    fn product_and_dense_agree() {
        let p = CycElement::Product {
            level: 12,
            scalar: q(-3),
            terms: BTreeMap::from([(1, 2), (5, -1)]),
        };
        let a = CycNumber::one().sub(&CycNumber::zeta(12, 1));
        let b = CycNumber::one().sub(&CycNumber::zeta(12, 5));
        let direct = a.mul(&a).div(&b).unwrap().scale(&q(-3));
        assert_eq!(p.to_dense(), direct);
        let l = p.log_abs(7, 96).unwrap();
        let d = direct.embed(7, 96).unwrap().ln_abs().unwrap();
        assert!(l.overlaps(&d));
    }

    #[test]
    fn multiunit_equality_up_to_torsion() {
        let e = AbelianField::real_cyclotomic(5).unwrap();
        let eta = CycElement::Product { level: 5, scalar: q(1), terms: BTreeMap::from([(1, 1), (4, 1)]) };
        let half = BigRational::new(1.into(), 2.into());
        let u = MultiUnit::simple(&e, eta.clone(), half.clone()).unwrap();
        let v = MultiUnit::simple(&e, CycElement::Dense(eta.to_dense()), half).unwrap();
        assert!(u.equals(&v));
        let w = MultiUnit::simple(&e, eta, q(1)).unwrap();
        assert!(!u.equals(&w));
        assert!(u.pow_rational(&q(2)).equals(&w));
        // −1 is torsion
        let m1 = MultiUnit::simple(&e, CycElement::constant(q(-1)).unwrap(), q(1)).unwrap();
        assert!(m1.is_torsion());
    }
}
