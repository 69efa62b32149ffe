//! Euler systems over ℚ truncated at a conductor bound: the cyclotomic-unit and Stickelberger
//! system and its verification suite.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::json;

use crate::arith::{divisors, prime_divisors};
use crate::ball::{Ball, ComplexBall};
use crate::cyclotomic::{regulator_image, CycElement, MultiUnit};
use crate::error::{invalid, Error, Result};
use crate::field::{enumerate_fields, AbelianField, Place, PlaceSet};
use crate::groupring::{delta_t, Character, RatGroupRing};
use crate::lattice::{exterior_bidual, GLattice};
use crate::linalg::{hnf, solve_combination, IntMatrix};
use crate::lvalues::{equivariant_leading_term_with, hurwitz_zeta, order_r_sigma, stickelberger, DirichletChar, LPrimeOracle};
use crate::report::CheckReport;
use crate::symbols::SymbolSpace;
use crate::tunits::t_congruence_lattice;

/// Conductor cap for the explicit rank-1 T-unit lattice.
pub const MAX_LATTICE_CONDUCTOR: u64 = 30;

/// c_E in ℚ⋀^{r(E)}: a group-ring element for complex E, a unit for real E.
#[derive(Clone, Debug)]
pub enum Payload {
    Rank0(RatGroupRing),
    Rank1(MultiUnit),
}

#[derive(Clone, Debug)]
pub struct RankedElement {
    field: AbelianField,
    payload: Payload,
}

impl RankedElement {
    pub fn new(field: &AbelianField, payload: Payload) -> Result<Self> {
        let r = match &payload {
            Payload::Rank0(x) => {
                if x.group() != field.galois_group() {
                    return invalid("rank-0 value lives in the wrong group ring");
                }
                0
            }
            Payload::Rank1(u) => {
                if u.field() != field {
                    return invalid("rank-1 value lives in the wrong field");
                }
                1
            }
        };
        if r != field.rank() {
            return invalid(format!("{} has rank {}, value has rank {r}", field.label(), field.rank()));
        }
        Ok(RankedElement { field: field.clone(), payload })
    }

    pub fn field(&self) -> &AbelianField {
        &self.field
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn rank(&self) -> usize {
        match self.payload {
            Payload::Rank0(_) => 0,
            Payload::Rank1(_) => 1,
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.payload {
            Payload::Rank0(x) => x.is_zero(),
            Payload::Rank1(u) => u.is_torsion(),
        }
    }

    /// λ·c.
    pub fn scale(&self, lam: &RatGroupRing) -> Self {
        let payload = match &self.payload {
            Payload::Rank0(x) => Payload::Rank0(x.mul(lam)),
            Payload::Rank1(u) => Payload::Rank1(u.pow(lam)),
        };
        RankedElement { field: self.field.clone(), payload }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let value = match &self.payload {
            Payload::Rank0(x) => json!(x.to_text()),
            Payload::Rank1(u) => u.to_json(),
        };
        json!({
            "conductor": self.field.conductor(),
            "h": self.field.subgroup_generators(),
            "rank": self.rank(),
            "value": value,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let m = v["conductor"].as_u64().ok_or_else(|| Error::Parse("missing conductor".into()))?;
        let h: Vec<u64> = v["h"]
            .as_array()
            .ok_or_else(|| Error::Parse("missing subgroup generators".into()))?
            .iter()
            .map(|x| x.as_u64().ok_or_else(|| Error::Parse("bad subgroup generator".into())))
            .collect::<Result<_>>()?;
        let field = AbelianField::new(m, &h)?;
        let payload = match v["rank"].as_u64() {
            Some(0) => {
                let s = v["value"].as_str().ok_or_else(|| Error::Parse("rank-0 value must be a string".into()))?;
                Payload::Rank0(RatGroupRing::parse(field.galois_group(), s)?)
            }
            Some(1) => Payload::Rank1(MultiUnit::from_json(&field, &v["value"])?),
            _ => return Err(Error::Parse("rank must be 0 or 1".into())),
        };
        Self::new(&field, payload)
    }
}

/// Σ = S(E) ∪ {∞}.
pub fn rubin_stark_sigma(e: &AbelianField) -> PlaceSet {
    let mut s = e.s_places();
    s.insert(Place::Infinite);
    s
}

/// e_E = Σ e_χ over characters with r_{S(E)∪∞}(χ) = r_E.
pub fn support_idempotent(e: &AbelianField) -> RatGroupRing {
    let sigma = rubin_stark_sigma(e);
    let chars: Vec<Character> = e
        .characters()
        .into_iter()
        .filter(|chi| order_r_sigma(&DirichletChar::from_field_character(e, chi), &sigma) == e.rank())
        .collect();
    crate::groupring::rational_idempotent(e.galois_group(), &chars)
}

/// (1 − e_E)·c_E = 0.
pub fn check_idempotent_support(c: &RankedElement) -> bool {
    let g = c.field.galois_group();
    let comp = RatGroupRing::one(g).sub(&support_idempotent(&c.field));
    c.scale(&comp).is_zero()
}

/// ε_{E/ℚ}: ½ ⊗ N_{ℚ(ζ_m)/E}(1 − ζ_m) for real E, θ_{E,S(E)∪∞,∅}(0) for complex E.
pub fn rubin_stark_element(e: &AbelianField) -> Result<RankedElement> {
    if e.is_rationals() {
        return invalid("the slice covers fields ramified at some finite prime");
    }
    let payload = if e.is_real() {
        let x = CycElement::one_minus_zeta(e.conductor(), 1)?.relative_norm(e, None)?;
        Payload::Rank1(MultiUnit::simple(e, x, BigRational::new(1.into(), 2.into()))?)
    } else {
        Payload::Rank0(stickelberger(e, &rubin_stark_sigma(e), &[])?)
    };
    RankedElement::new(e, payload)
}

/// Values on every abelian field of conductor ≤ `bound`.
#[derive(Clone, Debug)]
pub struct EulerSystemSlice {
    bound: u64,
    entries: Vec<RankedElement>,
    index: HashMap<AbelianField, usize>,
}

impl EulerSystemSlice {
    pub fn new(bound: u64, entries: Vec<RankedElement>) -> Result<Self> {
        let index: HashMap<AbelianField, usize> = entries.iter().enumerate().map(|(i, c)| (c.field.clone(), i)).collect();
        if index.len() != entries.len() {
            return invalid("a field appears twice in the slice");
        }
        for f in enumerate_fields(bound) {
            if !index.contains_key(&f) {
                return invalid(format!("the slice has no value on {}", f.label()));
            }
        }
        if let Some(c) = entries.iter().find(|c| c.field.conductor() > bound) {
            return invalid(format!("{} exceeds the conductor bound {bound}", c.field.label()));
        }
        Ok(EulerSystemSlice { bound, entries, index })
    }

    /// Evaluates `f` on every field of conductor ≤ `bound`.
    pub fn from_fn(bound: u64, f: impl Fn(&AbelianField) -> Result<RankedElement> + Sync) -> Result<Self> {
        let fields = enumerate_fields(bound);
        let entries = fields.par_iter().map(&f).collect::<Result<Vec<_>>>()?;
        Self::new(bound, entries)
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn get(&self, e: &AbelianField) -> Option<&RankedElement> {
        self.index.get(e).map(|&i| &self.entries[i])
    }

    pub fn entries(&self) -> &[RankedElement] {
        &self.entries
    }

    /// Pairs (E, F) with E ⊊ F, ordered by conductor pair.
    pub fn nested_pairs(&self) -> Vec<(AbelianField, AbelianField)> {
        let mut by_m: BTreeMap<u64, Vec<&AbelianField>> = BTreeMap::new();
        for c in &self.entries {
            by_m.entry(c.field.conductor()).or_default().push(&c.field);
        }
        let mut out = Vec::new();
        for (&mf, fs) in &by_m {
            for d in divisors(mf) {
                let Some(es) = by_m.get(&d) else { continue };
                for f in fs {
                    for e in es {
                        if e != f && e.is_subfield_of(f) {
                            out.push(((*e).clone(), (*f).clone()));
                        }
                    }
                }
            }
        }
        out.sort_by_key(|(e, f)| (e.conductor(), f.conductor(), e.label(), f.label()));
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "bound": self.bound,
            "entries": self.entries.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let bound = v["bound"].as_u64().ok_or_else(|| Error::Parse("missing bound".into()))?;
        let entries = v["entries"]
            .as_array()
            .ok_or_else(|| Error::Parse("missing entries".into()))?
            .iter()
            .map(RankedElement::from_json)
            .collect::<Result<Vec<_>>>()?;
        Self::new(bound, entries)
    }
}

pub fn rubin_stark_system(n: u64) -> Result<EulerSystemSlice> {
    if n < 3 {
        return invalid("the conductor bound must be at least 3");
    }
    EulerSystemSlice::from_fn(n, rubin_stark_element)
}

/// ∏_{v} (1 − Frob_v^{-1}) in ℚ[𝒢_E]; Frob_∞ is complex conjugation.
pub fn euler_factor(e: &AbelianField, extra: &PlaceSet) -> Result<RatGroupRing> {
    let g = e.galois_group();
    let mut acc = RatGroupRing::one(g);
    for &v in extra {
        let fr = match v {
            Place::Finite(p) => e.frobenius(p)?,
            Place::Infinite => e.complex_conjugation(),
        };
        let f = RatGroupRing::one(g).sub(&RatGroupRing::basis(g, g.inv_elem(fr), BigRational::one()));
        acc = acc.mul(&f);
    }
    Ok(acc)
}

fn place_list(s: &PlaceSet) -> Vec<String> {
    s.iter().map(|p| p.to_string()).collect()
}

/// The distribution relation between c_F and c_E for E ⊆ F.
pub fn check_distribution(c: &EulerSystemSlice, e: &AbelianField, f: &AbelianField) -> Result<CheckReport> {
    if !e.is_subfield_of(f) {
        return invalid(format!("{} is not a subfield of {}", e.label(), f.label()));
    }
    let ce = c.get(e).ok_or_else(|| Error::InvalidArgument(format!("{} is outside the slice", e.label())))?;
    let cf = c.get(f).ok_or_else(|| Error::InvalidArgument(format!("{} is outside the slice", f.label())))?;
    let subject = format!("{} ⊆ {}", e.label(), f.label());
    if e == f {
        return Ok(CheckReport::new("distribution", subject, true, json!({"case": "equal"})));
    }
    let se = e.s_places();
    let extra: PlaceSet = f.s_places().difference(&se).copied().collect();
    let factor = euler_factor(e, &extra)?;
    let table = e.restriction_table(f)?;
    let mut witness = json!({"extra_places": place_list(&extra), "euler_factor": factor.to_text()});
    let passed = match (&ce.payload, &cf.payload) {
        (Payload::Rank1(ue), Payload::Rank1(uf)) => {
            witness["case"] = json!("rank 1 / rank 1");
            uf.norm_to(e)?.equals(&ue.pow(&factor))
        }
        (Payload::Rank0(xe), Payload::Rank0(xf)) => {
            witness["case"] = json!("rank 0 / rank 0");
            let lhs = xf.restriction(e.galois_group(), &table);
            let rhs = factor.mul(xe);
            if lhs != rhs {
                witness["restriction"] = json!(lhs.to_text());
                witness["expected"] = json!(rhs.to_text());
            }
            lhs == rhs
        }
        (Payload::Rank1(_), Payload::Rank0(xf)) => {
            witness["case"] = json!("rank 1 / rank 0");
            let lhs = xf.restriction(e.galois_group(), &table);
            witness["restriction_vanishes"] = json!(lhs.is_zero());
            witness["factor_vanishes"] = json!(factor.is_zero());
            lhs.is_zero() && factor.is_zero()
        }
        (Payload::Rank0(_), Payload::Rank1(_)) => {
            return Err(Error::Precondition("a complex field cannot lie in a real one".into()));
        }
    };
    Ok(CheckReport::new("distribution", subject, passed, witness))
}

/// check_distribution over every nested pair, in parallel, sorted by conductor pair.
pub fn check_all_distributions(c: &EulerSystemSlice) -> Result<Vec<CheckReport>> {
    c.nested_pairs().par_iter().map(|(e, f)| check_distribution(c, e, f)).collect()
}

/// A choice of the distinguished finite place: the prime p and τ, standing for τ·𝔭_E.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlaceChoice {
    pub prime: u64,
    pub tau: usize,
}

/// Two choices of 𝔭 ∈ Σ \ {∞}: the first prime, then another prime of Σ or a conjugate of the
/// first. Returns one choice when all alternatives coincide.
pub fn place_choices(e: &AbelianField, sigma: &PlaceSet) -> Vec<PlaceChoice> {
    let primes = crate::field::finite_primes(sigma);
    let Some(&p) = primes.first() else { return vec![] };
    let mut out = vec![PlaceChoice { prime: p, tau: 0 }];
    if let Some(&q) = primes.get(1) {
        out.push(PlaceChoice { prime: q, tau: 0 });
    } else {
        let d = e.decomposition_group(p);
        if let Some(t) = e.galois_group().elements().find(|t| !d.contains(t)) {
            out.push(PlaceChoice { prime: p, tau: t });
        }
    }
    out
}

fn ball_json(b: &Ball) -> serde_json::Value {
    json!([b.lower_f64(), b.upper_f64()])
}

/// λ_{E,Σ}(ε) against e_{E,Σ,1}θ*(0)·(v_E − 𝔭_E) for each place choice and each L′ oracle.
pub fn check_rubin_stark_identity(e: &AbelianField, bits: u32) -> Result<CheckReport> {
    if e.rank() != 1 {
        return Err(Error::Precondition(format!("{} is not real", e.label())));
    }
    let sigma = rubin_stark_sigma(e);
    let Payload::Rank1(eps) = rubin_stark_element(e)?.payload else { unreachable!() };
    let lam = regulator_image(&eps, &sigma, bits)?;
    let g = e.galois_group();
    let choices = place_choices(e, &sigma);
    let mut runs = Vec::new();
    let mut passed = true;
    for oracle in [LPrimeOracle::LogSine, LPrimeOracle::Hurwitz] {
        let x = equivariant_leading_term_with(e, &sigma, &[], bits, Some(1), oracle)?;
        for ch in &choices {
            let mut ok = true;
            let mut mismatches = Vec::new();
            for (place, t, val) in &lam.entries {
                let target: ComplexBall = match place {
                    Place::Infinite => x.coeffs[*t].clone(),
                    Place::Finite(p) if *p == ch.prime => {
                        let d = e.decomposition_group(*p);
                        let coset: BTreeSet<usize> = d.iter().map(|&h| g.mul(*t, h)).collect();
                        let mut acc = ComplexBall::zero(bits);
                        for s in g.elements() {
                            if coset.contains(&g.mul(s, ch.tau)) {
                                acc = acc.sub(&x.coeffs[s]);
                            }
                        }
                        acc
                    }
                    Place::Finite(_) => ComplexBall::zero(bits),
                };
                let good = val.overlaps(&target.re) && target.im.contains_zero();
                if !good {
                    ok = false;
                    mismatches.push(json!({"place": place.to_string(), "tau": t, "lambda": ball_json(val), "target": ball_json(&target.re)}));
                }
            }
            passed &= ok;
            runs.push(json!({
                "oracle": format!("{oracle:?}"),
                "prime": ch.prime,
                "tau": g.format_element(ch.tau),
                "passed": ok,
                "mismatches": mismatches,
            }));
        }
    }
    let witness = json!({
        "sigma": place_list(&sigma),
        "bits": bits,
        "choices": choices.len(),
        "vacuous_second_choice": choices.len() < 2,
        "runs": runs,
    });
    Ok(CheckReport::new("rubin_stark_identity", e.label(), passed, witness))
}

/// N_{E/ℚ}(c_E) = 1/2 ⊗ p for real E of conductor pᵃ; the restriction of θ to ℚ vanishes for
/// complex E. Also checks c_ℚ = −ζ(0) = 1/2 numerically.
pub fn check_initial_value(c: &EulerSystemSlice, e: &AbelianField) -> Result<CheckReport> {
    let Some((p, _)) = crate::arith::prime_power(e.conductor()) else {
        return invalid(format!("conductor {} is not a prime power", e.conductor()));
    };
    let ce = c.get(e).ok_or_else(|| Error::InvalidArgument(format!("{} is outside the slice", e.label())))?;
    let half = BigRational::new(1.into(), 2.into());
    let zeta0 = hurwitz_zeta(&BigRational::zero(), &BigRational::one(), 64)?;
    let zeta_ok = zeta0.contains_rational(&-half.clone());
    let q = AbelianField::rationals();
    let (ok, witness) = match &ce.payload {
        Payload::Rank1(u) => {
            let n = u.norm_to(&q)?;
            let target = MultiUnit::simple(&q, CycElement::constant(BigRational::from_integer(p.into()))?, half)?;
            (n.equals(&target), json!({"norm": n.to_json(), "prime": p}))
        }
        Payload::Rank0(x) => {
            let r = x.norm_to_base();
            (r.is_zero(), json!({"restriction_to_Q": crate::cycnum::format_rational(&r)}))
        }
    };
    let mut witness = witness;
    witness["zeta_at_zero"] = ball_json(&zeta0);
    Ok(CheckReport::new("initial_value", e.label(), ok && zeta_ok, witness))
}

/// Order of the group of roots of unity in E.
pub fn roots_of_unity_order(e: &AbelianField) -> u64 {
    let m = e.conductor();
    let mut w = 2;
    for d in divisors(2 * m) {
        if d % 4 == 2 || d < 3 {
            continue;
        }
        if let Ok(z) = AbelianField::cyclotomic(d) {
            if z.is_subfield_of(e) {
                w = w.max(if d % 2 == 0 { d } else { 2 * d });
            }
        }
    }
    w
}

/// T is disjoint from S(E) and prime to |μ_E|.
pub fn check_admissible(e: &AbelianField, t: &[u64]) -> Result<()> {
    let w = roots_of_unity_order(e);
    for &l in t {
        if !crate::arith::is_prime(l) {
            return invalid(format!("{l} is not prime"));
        }
        if e.conductor() % l == 0 {
            return invalid(format!("{l} ramifies in {}", e.label()));
        }
        if w % l == 0 {
            return invalid(format!("{l} divides |μ_E| = {w}"));
        }
    }
    Ok(())
}

fn two_adic_clear(x: &[BigRational]) -> Option<u64> {
    let mut k = 0;
    for c in x {
        let mut d = c.denom().clone();
        let mut j = 0;
        while (&d % 2u32).is_zero() {
            d /= 2u32;
            j += 1;
        }
        if !d.is_one() {
            return None;
        }
        k = k.max(j);
    }
    Some(k)
}

/// Outcome of one T for a lattice membership test.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeOutcome {
    pub t: Vec<u64>,
    pub over_z: bool,
    pub over_z_half: bool,
}

/// δ_T·c_E in the Rubin lattice, tested for each T over ℤ and over ℤ[1/2]. Rank-1 tests use the
/// lattice of T-units generated by norms of cyclotomic units (the constructed lattice).
pub fn check_rubin_lattice(c: &RankedElement, t_list: &[Vec<u64>]) -> Result<CheckReport> {
    let e = &c.field;
    for t in t_list {
        check_admissible(e, t)?;
    }
    let mut outcomes = Vec::new();
    match &c.payload {
        Payload::Rank0(x) => {
            for t in t_list {
                let d = RatGroupRing::from_int(&delta_t(e, t)?);
                let y = d.mul(x);
                let over_z = y.to_int().is_some();
                let over_z_half = two_adic_clear(y.coeffs()).is_some();
                outcomes.push(LatticeOutcome { t: t.clone(), over_z, over_z_half });
            }
        }
        Payload::Rank1(u) => {
            if !u.is_torsion() && e.conductor() > MAX_LATTICE_CONDUCTOR {
                return Err(Error::ResourceGuard(format!(
                    "T-unit lattices are built for conductors ≤ {MAX_LATTICE_CONDUCTOR}"
                )));
            }
            for t in t_list {
                outcomes.push(rank1_membership(u, t)?);
            }
        }
    }
    let passed = outcomes.iter().all(|o| o.over_z_half);
    let witness = json!({
        "rank": c.rank(),
        "lattice": if c.rank() == 1 { "constructed" } else { "group ring" },
        "outcomes": outcomes.iter().map(|o| json!({"T": o.t, "over_Z": o.over_z, "over_Z[1/2]": o.over_z_half})).collect::<Vec<_>>(),
    });
    Ok(CheckReport::new("rubin_lattice", e.label(), passed, witness))
}

fn to_rat(v: &[BigInt]) -> Vec<BigRational> {
    v.iter().map(|x| BigRational::from_integer(x.clone())).collect()
}

fn rank1_membership(u: &MultiUnit, t: &[u64]) -> Result<LatticeOutcome> {
    let e = u.field();
    let g = e.galois_group();
    let delta = RatGroupRing::from_int(&delta_t(e, t)?);
    let target_unit = u.pow(&delta);
    if target_unit.is_torsion() {
        return Ok(LatticeOutcome { t: t.to_vec(), over_z: true, over_z_half: true });
    }
    let m = e.conductor();
    // generators N_{ℚ(ζ_m)/E}(1 − ζ_m^k), indexed so that σ_a permutes them
    let mut gens: Vec<CycElement> = Vec::new();
    let mut rep_k: Vec<u64> = Vec::new();
    let mut gen_of = vec![0usize; m as usize];
    for k in 1..m {
        let x = CycElement::one_minus_zeta(m, k)?.relative_norm(e, None)?;
        let i = gens.iter().position(|y| *y == x).unwrap_or_else(|| {
            gens.push(x);
            rep_k.push(k);
            gens.len() - 1
        });
        gen_of[k as usize] = i;
    }
    let space = SymbolSpace::for_units(&[u])?;
    let space = if space.level() % m == 0 { space } else { SymbolSpace::new(crate::arith::lcm(space.level(), m), space.primes())? };
    let coords: IntMatrix = gens.iter().map(|x| space.element_coordinates(x, 1)).collect::<Result<_>>()?;
    let cong = t_congruence_lattice(e, &gens, t)?;
    let image: IntMatrix = cong
        .iter()
        .map(|x| {
            let mut v = vec![BigInt::zero(); space.rank()];
            for (k, xk) in x.iter().enumerate() {
                if !xk.is_zero() {
                    for (a, b) in v.iter_mut().zip(&coords[k]) {
                        *a += xk * b;
                    }
                }
            }
            v
        })
        .collect();
    let basis = hnf(&image);
    let coords_q: Vec<Vec<BigRational>> = coords.iter().map(|c| to_rat(c)).collect();
    let basis_q: Vec<Vec<BigRational>> = basis.iter().map(|b| to_rat(b)).collect();
    // σ acts on the span of the generators through the permutation k ↦ a·k
    let actions = g
        .generators()
        .iter()
        .map(|&s| {
            let a = crate::cyclotomic::lift_residue(e.representative(s), m, m);
            basis
                .iter()
                .map(|b| {
                    let z = solve_combination(&coords_q, &to_rat(b)).ok_or_else(|| Error::OracleDisagreement("basis outside the generator span".into()))?;
                    let mut img = vec![BigRational::zero(); space.rank()];
                    for (i, &k) in rep_k.iter().enumerate() {
                        let zi = &z[i];
                        if zi.is_zero() {
                            continue;
                        }
                        let j = gen_of[(a * k % m) as usize];
                        for (x, y) in img.iter_mut().zip(&coords_q[j]) {
                            *x += zi * y;
                        }
                    }
                    let c = solve_combination(&basis_q, &img).ok_or_else(|| Error::OracleDisagreement("lattice not Galois-stable".into()))?;
                    c.iter()
                        .map(|x| x.is_integer().then(|| x.to_integer()).ok_or_else(|| Error::OracleDisagreement("lattice not Galois-stable".into())))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<IntMatrix>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let lat = GLattice::new(g, basis.len(), actions)?;
    let bidual = exterior_bidual(&lat, 1)?;
    let x = space.unit_coordinates(&target_unit)?;
    let Some(y) = solve_combination(&basis_q, &x) else {
        return Ok(LatticeOutcome { t: t.to_vec(), over_z: false, over_z_half: false });
    };
    let over_z = bidual.contains(&y)?;
    let over_z_half = match two_adic_clear(&y) {
        Some(k) => {
            let s = BigRational::from_integer(BigInt::one() << k);
            bidual.contains(&y.iter().map(|c| c * &s).collect::<Vec<_>>())?
        }
        None => false,
    };
    Ok(LatticeOutcome { t: t.to_vec(), over_z, over_z_half })
}

/// Solves c_E = q·ε_{E/ℚ} with q ∈ ℚ[𝒢_E]e_E and reports the primes dividing denominators of q.
pub fn check_scarcity_at_level(c: &EulerSystemSlice, e: &AbelianField) -> Result<CheckReport> {
    if e.rank() != 1 {
        return Err(Error::Precondition(format!("{} is not real", e.label())));
    }
    let ce = c.get(e).ok_or_else(|| Error::InvalidArgument(format!("{} is outside the slice", e.label())))?;
    let Payload::Rank1(cu) = &ce.payload else { unreachable!() };
    let Payload::Rank1(eps) = rubin_stark_element(e)?.payload else { unreachable!() };
    scarcity_exponent(cu, &eps).map(|res| {
        let (passed, witness) = match res {
            Some(q) => {
                let support = prime_divisors(q.denominator().to_u64().unwrap_or(0));
                (true, json!({"q": q.to_text(), "denominator_support": support}))
            }
            None => (false, json!({"q": null, "reason": "c_E is not in the ℚ[G]-span of ε"})),
        };
        CheckReport::new("scarcity", e.label(), passed, witness)
    })
}

/// q ∈ ℚ[𝒢_E]e_E with c = q·ε, or None when c is outside the span.
pub fn scarcity_exponent(c: &MultiUnit, eps: &MultiUnit) -> Result<Option<RatGroupRing>> {
    let e = eps.field();
    let g = e.galois_group();
    let space = SymbolSpace::for_units(&[c, eps])?;
    let v = space.unit_coordinates(c)?;
    let cols: Vec<Vec<BigRational>> = g
        .elements()
        .map(|s| space.unit_coordinates(&eps.pow(&RatGroupRing::basis(g, s, BigRational::one()))))
        .collect::<Result<_>>()?;
    let Some(q0) = solve_combination(&cols, &v) else { return Ok(None) };
    let q = RatGroupRing::from_coeffs(g, q0)?.mul(&support_idempotent(e));
    let back = eps.pow(&q);
    if !(space.same_unit(&back, c)? && back.equals(c)) {
        return Err(Error::OracleDisagreement("exponent solve does not reproduce c".into()));
    }
    Ok(Some(q))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn small_values() {
        let e3 = AbelianField::cyclotomic(3).unwrap();
        let Payload::Rank0(t) = rubin_stark_element(&e3).unwrap().payload else { panic!() };
        let g = e3.galois_group();
        let s2 = e3.class_of(2).unwrap();
        let expect = RatGroupRing::one(g).sub(&RatGroupRing::basis(g, s2, q(1, 1))).scale(&q(1, 6));
        assert_eq!(t, expect);
        let e4 = AbelianField::cyclotomic(4).unwrap();
        let Payload::Rank0(t4) = rubin_stark_element(&e4).unwrap().payload else { panic!() };
        let g4 = e4.galois_group();
        let expect4 = RatGroupRing::one(g4).sub(&RatGroupRing::basis(g4, e4.class_of(3).unwrap(), q(1, 1))).scale(&q(1, 4));
        assert_eq!(t4, expect4);
    }

    #[test]
    fn slice_json_round_trip() {
        let s = rubin_stark_system(12).unwrap();
        let back = EulerSystemSlice::from_json(&s.to_json()).unwrap();
        for c in s.entries() {
            let d = back.get(c.field()).unwrap();
            match (c.payload(), d.payload()) {
                (Payload::Rank0(a), Payload::Rank0(b)) => assert_eq!(a, b),
                (Payload::Rank1(a), Payload::Rank1(b)) => assert!(a.equals(b)),
                _ => panic!("rank changed"),
            }
        }
    }

    #[test]
    fn distribution_examples() {
        let s = rubin_stark_system(12).unwrap();
        let e4 = AbelianField::cyclotomic(4).unwrap();
        let f12 = AbelianField::cyclotomic(12).unwrap();
        assert!(check_distribution(&s, &e4, &f12).unwrap().passed);
        let e5 = AbelianField::real_cyclotomic(5).unwrap();
        let f5 = AbelianField::cyclotomic(5).unwrap();
        let r = check_distribution(&s, &e5, &f5).unwrap();
        assert!(r.passed);
        assert_eq!(r.witness["case"], "rank 1 / rank 0");
        assert!(check_distribution(&s, &f5, &e5).is_err());
    }

    #[test]
    fn initial_values() {
        let s = rubin_stark_system(9).unwrap();
        for e in enumerate_fields(9) {
            if crate::arith::prime_power(e.conductor()).is_some() {
                assert!(check_initial_value(&s, &e).unwrap().passed, "{}", e.label());
            }
        }
    }

    #[test]
    fn lattice_examples() {
        let e3 = AbelianField::cyclotomic(3).unwrap();
        let c = rubin_stark_element(&e3).unwrap();
        let r = check_rubin_lattice(&c, &[vec![5]]).unwrap();
        assert!(r.passed);
        assert_eq!(r.witness["outcomes"][0]["over_Z"], true);
        let e5 = AbelianField::real_cyclotomic(5).unwrap();
        let c5 = rubin_stark_element(&e5).unwrap();
        let r = check_rubin_lattice(&c5, &[vec![3], vec![11]]).unwrap();
        assert!(r.passed, "{}", r.witness);
        assert!(check_rubin_lattice(&c5, &[vec![5]]).is_err());
    }

    #[test]
    fn scarcity_examples() {
        let e = AbelianField::real_cyclotomic(7).unwrap();
        let Payload::Rank1(eps) = rubin_stark_element(&e).unwrap().payload else { panic!() };
        let g = e.galois_group();
        let one = scarcity_exponent(&eps, &eps).unwrap().unwrap();
        assert_eq!(one, support_idempotent(&e));
        let sq = scarcity_exponent(&eps.pow_rational(&q(2, 1)), &eps).unwrap().unwrap();
        assert_eq!(sq, support_idempotent(&e).scale(&q(2, 1)));
        let s2 = RatGroupRing::basis(g, e.class_of(2).unwrap(), BigRational::one());
        let tw = scarcity_exponent(&eps.pow(&s2), &eps).unwrap().unwrap();
        assert_eq!(tw, s2.mul(&support_idempotent(&e)));
    }

    #[test]
    fn idempotent_support_holds() {
        for e in enumerate_fields(16) {
            assert!(check_idempotent_support(&rubin_stark_element(&e).unwrap()), "{}", e.label());
        }
    }

    #[test]
    fn rubin_stark_identity_small() {
        // one finite place in Σ, totally ramified: a single choice of 𝔭
        let e = AbelianField::real_cyclotomic(5).unwrap();
        let r = check_rubin_stark_identity(&e, 128).unwrap();
        assert!(r.passed, "{}", r.witness);
        assert_eq!(r.witness["runs"].as_array().unwrap().len(), 2);
        assert_eq!(r.witness["vacuous_second_choice"], true);
        // Σ = {2, 3, ∞}
        let e12 = AbelianField::real_cyclotomic(12).unwrap();
        let r = check_rubin_stark_identity(&e12, 128).unwrap();
        assert!(r.passed, "{}", r.witness);
        assert_eq!(r.witness["runs"].as_array().unwrap().len(), 4);
    }
}
