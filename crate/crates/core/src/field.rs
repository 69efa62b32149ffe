//! Abelian number fields E ⊆ ℚ(ζ_m) given by their conductor m and the subgroup
//! H ≤ (ℤ/m)^× fixing E, so that 𝒢_E = (ℤ/m)^×/H with σ_a: ζ_m ↦ ζ_m^a.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::arith::{euler_phi, factorize, gcd, multiplicative_order, prime_divisors};
use crate::error::{invalid, Error, Result};
use crate::groupring::{Character, FiniteAbelianGroup, Projection};

/// (ℤ/m)^× as an abstract group with explicit discrete logarithms.
#[derive(Debug)]
pub struct UnitGroup {
    pub m: u64,
    /// Orders of the chosen cyclic generators (one or two per prime power).
    pub orders: Vec<u64>,
    /// Generator residues, aligned with `orders`.
    pub gens: Vec<u64>,
    /// Coordinates of each residue (empty for non-units).
    logs: Vec<Option<Vec<i64>>>,
    pub group: FiniteAbelianGroup,
    proj: Projection,
    index: Vec<Option<usize>>,
    residue: Vec<u64>,
}

fn crt_lift(residue: u64, modulus: u64, m: u64) -> u64 {
    // x ≡ residue mod `modulus`, x ≡ 1 mod m/modulus
    let other = m / modulus;
    (0..other)
        .map(|t| residue + t * modulus)
        .find(|x| x % other == 1 % other)
        .expect("coprime moduli")
        % m.max(1)
}

impl UnitGroup {
    fn build(m: u64) -> UnitGroup {
        let mut orders = Vec::new();
        let mut gens = Vec::new();
        let mut comps: Vec<(u64, Vec<(u64, HashMap<u64, u64>)>)> = Vec::new();
        for (p, a) in factorize(m) {
            let pa = p.pow(a);
            let mut parts = Vec::new();
            if p == 2 {
                if a >= 2 {
                    orders.push(2);
                    gens.push(crt_lift(pa - 1, pa, m));
                    parts.push((pa - 1, HashMap::new()));
                }
                if a >= 3 {
                    let ord = pa / 4;
                    orders.push(ord);
                    gens.push(crt_lift(5, pa, m));
                    let mut t = HashMap::new();
                    let mut x = 1u64;
                    for k in 0..ord {
                        t.insert(x, k);
                        x = x * 5 % pa;
                    }
                    parts.push((5, t));
                }
            } else {
                let phi = euler_phi(pa);
                let g = (2..pa).find(|&g| gcd(g, p) == 1 && multiplicative_order(g, pa) == phi).unwrap();
                orders.push(phi);
                gens.push(crt_lift(g, pa, m));
                let mut t = HashMap::new();
                let mut x = 1u64;
                for k in 0..phi {
                    t.insert(x, k);
                    x = x * g % pa;
                }
                parts.push((g, t));
            }
            comps.push((pa, parts));
        }
        let logs: Vec<Option<Vec<i64>>> = (0..m.max(1))
            .map(|x| {
                if gcd(x, m) != 1 && m > 1 {
                    return None;
                }
                let mut c = Vec::new();
                for (pa, parts) in &comps {
                    let y = x % pa;
                    if pa % 2 == 0 {
                        let mut y = y;
                        if !parts.is_empty() {
                            let s = (y % 4 == 3) as i64;
                            c.push(s);
                            if s == 1 {
                                y = pa - y;
                            }
                        }
                        if parts.len() == 2 {
                            c.push(parts[1].1[&y] as i64);
                        }
                    } else {
                        c.push(parts[0].1[&y] as i64);
                    }
                }
                Some(c)
            })
            .collect();
        let (group, proj) = Projection::quotient(&orders, &[]);
        let mut index = vec![None; m.max(1) as usize];
        let mut residue = vec![0u64; group.order()];
        for x in 0..m.max(1) {
            if let Some(c) = &logs[x as usize] {
                let i = proj.apply(c);
                index[x as usize] = Some(i);
                residue[i] = x;
            }
        }
        UnitGroup { m, orders, gens, logs, group, proj, index, residue }
    }

    pub fn get(m: u64) -> Arc<UnitGroup> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<UnitGroup>>>> = OnceLock::new();
        let c = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(u) = c.lock().unwrap().get(&m) {
            return u.clone();
        }
        let u = Arc::new(UnitGroup::build(m));
        c.lock().unwrap().insert(m, u.clone());
        u
    }

    pub fn log(&self, a: u64) -> Option<&Vec<i64>> {
        self.logs[(a % self.m.max(1)) as usize].as_ref()
    }

    /// Index of the residue in `group`.
    pub fn index_of(&self, a: i64) -> Option<usize> {
        self.index[a.rem_euclid(self.m.max(1) as i64) as usize]
    }

    pub fn residue_of(&self, idx: usize) -> u64 {
        self.residue[idx]
    }

    pub fn units(&self) -> Vec<u64> {
        (0..self.m.max(1)).filter(|&x| self.logs[x as usize].is_some()).collect()
    }

    pub fn projection(&self) -> &Projection {
        &self.proj
    }
}

/// A place of ℚ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Finite(u64),
    Infinite,
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Finite(p) => write!(f, "{p}"),
            Place::Infinite => write!(f, "inf"),
        }
    }
}

/// A finite set of places of ℚ, ordered with finite places ascending and ∞ last.
pub type PlaceSet = BTreeSet<Place>;

pub fn places(finite: &[u64], infinite: bool) -> PlaceSet {
    let mut s: PlaceSet = finite.iter().map(|&p| Place::Finite(p)).collect();
    if infinite {
        s.insert(Place::Infinite);
    }
    s
}

pub fn finite_primes(s: &PlaceSet) -> Vec<u64> {
    s.iter()
        .filter_map(|p| match p {
            Place::Finite(q) => Some(*q),
            Place::Infinite => None,
        })
        .collect()
}

#[derive(Clone)]
pub struct AbelianField {
    m: u64,
    h: Arc<Vec<u64>>,
    h_gens: Vec<u64>,
    gal: FiniteAbelianGroup,
    class_of: Arc<Vec<Option<usize>>>,
    reps: Arc<Vec<u64>>,
}

impl fmt::Debug for AbelianField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AbelianField({})", self.label())
    }
}

impl PartialEq for AbelianField {
    fn eq(&self, o: &Self) -> bool {
        self.m == o.m && self.h == o.h
    }
}

impl Eq for AbelianField {}

impl std::hash::Hash for AbelianField {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.m.hash(state);
        self.h.hash(state);
    }
}

fn closure(m: u64, gens: &[u64]) -> Vec<u64> {
    let mut set: BTreeSet<u64> = BTreeSet::new();
    set.insert(1 % m.max(1));
    let mut frontier = vec![1 % m.max(1)];
    while let Some(x) = frontier.pop() {
        for &g in gens {
            let y = x * (g % m) % m;
            if set.insert(y) {
                frontier.push(y);
            }
        }
    }
    set.into_iter().collect()
}

/// Greedy generating set: smallest residues not already in the span.
fn canonical_generators(m: u64, h: &[u64]) -> Vec<u64> {
    let mut gens = Vec::new();
    let mut span = closure(m, &gens);
    for &x in h {
        if span.binary_search(&x).is_err() {
            gens.push(x);
            span = closure(m, &gens);
        }
    }
    gens
}

impl AbelianField {
    /// The fixed field of ⟨h_generators⟩ ≤ (ℤ/m)^×; `m` must be its exact conductor.
    pub fn new(m: u64, h_generators: &[u64]) -> Result<Self> {
        if m == 0 {
            return invalid("conductor must be positive");
        }
        if m == 1 {
            return Ok(Self::rationals());
        }
        for &g in h_generators {
            if gcd(g % m, m) != 1 {
                return invalid(format!("{g} is not a unit modulo {m}"));
            }
        }
        let h = closure(m, h_generators);
        let f = Self::from_subgroup_unchecked(m, h);
        if !f.has_exact_conductor() {
            return invalid(format!("{m} is not the conductor of the fixed field of {:?}", h_generators));
        }
        Ok(f)
    }

    /// ℚ(ζ_m).
    pub fn cyclotomic(m: u64) -> Result<Self> {
        Self::new(m, &[])
    }

    /// ℚ(ζ_m)^+.
    pub fn real_cyclotomic(m: u64) -> Result<Self> {
        Self::new(m, &[m - 1])
    }

    pub fn rationals() -> Self {
        AbelianField {
            m: 1,
            h: Arc::new(vec![0]),
            h_gens: vec![],
            gal: FiniteAbelianGroup::trivial(),
            class_of: Arc::new(vec![Some(0)]),
            reps: Arc::new(vec![1]),
        }
    }

    fn from_subgroup_unchecked(m: u64, h: Vec<u64>) -> Self {
        let ug = UnitGroup::get(m);
        let rels: Vec<Vec<i64>> = h.iter().map(|&x| ug.log(x).unwrap().clone()).collect();
        let (gal, proj) = Projection::quotient(&ug.orders, &rels);
        let mut class_of = vec![None; m as usize];
        let mut reps = vec![u64::MAX; gal.order()];
        for a in 0..m {
            if let Some(c) = ug.log(a) {
                let i = proj.apply(c);
                class_of[a as usize] = Some(i);
                reps[i] = reps[i].min(a);
            }
        }
        let h_gens = canonical_generators(m, &h);
        AbelianField { m, h: Arc::new(h), h_gens, gal, class_of: Arc::new(class_of), reps: Arc::new(reps) }
    }

    fn has_exact_conductor(&self) -> bool {
        let m = self.m;
        if m % 4 == 2 {
            return false;
        }
        for p in prime_divisors(m) {
            let d = m / p;
            let contained = (0..m)
                .filter(|&x| gcd(x, m) == 1 && x % d == 1 % d)
                .all(|x| self.h.binary_search(&x).is_ok());
            if contained {
                return false;
            }
        }
        true
    }

    pub fn conductor(&self) -> u64 {
        self.m
    }

    /// Sorted residues of H.
    pub fn subgroup(&self) -> &[u64] {
        &self.h
    }

    pub fn subgroup_generators(&self) -> &[u64] {
        &self.h_gens
    }

    pub fn galois_group(&self) -> &FiniteAbelianGroup {
        &self.gal
    }

    pub fn degree(&self) -> usize {
        self.gal.order()
    }

    pub fn is_rationals(&self) -> bool {
        self.m == 1
    }

    pub fn is_real(&self) -> bool {
        self.m <= 2 || self.h.binary_search(&(self.m - 1)).is_ok()
    }

    /// r_E = |V_E|.
    pub fn rank(&self) -> usize {
        self.is_real() as usize
    }

    pub fn label(&self) -> String {
        let g: Vec<String> = self.h_gens.iter().map(|x| x.to_string()).collect();
        format!("Q({})<{}>", self.m, g.join(","))
    }

    /// Class of the residue `a` in 𝒢_E.
    pub fn class_of(&self, a: i64) -> Result<usize> {
        let r = a.rem_euclid(self.m as i64) as usize;
        self.class_of[r].ok_or_else(|| Error::InvalidArgument(format!("{a} is not a unit modulo {}", self.m)))
    }

    /// Smallest positive residue representing the class `idx`.
    pub fn representative(&self, idx: usize) -> u64 {
        self.reps[idx]
    }

    /// Arithmetic Frobenius at a prime ℓ ∤ m.
    pub fn frobenius(&self, ell: u64) -> Result<usize> {
        if self.m % ell == 0 && self.m > 1 {
            return invalid(format!("{ell} ramifies in {}", self.label()));
        }
        self.class_of(ell as i64)
    }

    pub fn complex_conjugation(&self) -> usize {
        self.class_of(-1).unwrap_or(0)
    }

    pub fn ramified_primes(&self) -> Vec<u64> {
        prime_divisors(self.m)
    }

    /// S(E): ramified finite primes, plus ∞ when E is not real.
    pub fn s_places(&self) -> PlaceSet {
        places(&self.ramified_primes(), !self.is_real())
    }

    /// Sorted element indices of the decomposition group at the prime p.
    pub fn decomposition_group(&self, p: u64) -> Vec<usize> {
        let (mp, _) = split_prime(self.m, p);
        let pm = if mp == 1 { 0 } else { p % mp };
        let pgroup: Vec<u64> = if mp == 1 { vec![0] } else { closure(mp, &[pm]) };
        self.image_of(|x| pgroup.binary_search(&(x % mp.max(1))).is_ok() || mp == 1)
    }

    /// Sorted element indices of the inertia group at the prime p.
    pub fn inertia_group(&self, p: u64) -> Vec<usize> {
        let (mp, _) = split_prime(self.m, p);
        self.image_of(|x| mp == 1 || x % mp == 1)
    }

    /// Decomposition group at the archimedean place.
    pub fn decomposition_group_infinite(&self) -> Vec<usize> {
        let c = self.complex_conjugation();
        let mut v = vec![0, c];
        v.sort_unstable();
        v.dedup();
        v
    }

    fn image_of(&self, pred: impl Fn(u64) -> bool) -> Vec<usize> {
        let mut s: Vec<usize> = (0..self.m.max(1))
            .filter(|&x| self.class_of[x as usize].is_some() && pred(x))
            .map(|x| self.class_of[x as usize].unwrap())
            .collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Residue degree of primes above p.
    pub fn residue_degree(&self, p: u64) -> usize {
        self.decomposition_group(p).len() / self.inertia_group(p).len()
    }

    /// E ⊆ F.
    pub fn is_subfield_of(&self, f: &AbelianField) -> bool {
        if f.m % self.m != 0 {
            return false;
        }
        f.h.iter().all(|&x| self.h.binary_search(&(x % self.m.max(1))).is_ok() || self.m == 1)
    }

    /// The restriction 𝒢_F → 𝒢_E as an index table.
    pub fn restriction_table(&self, f: &AbelianField) -> Result<Vec<usize>> {
        if !self.is_subfield_of(f) {
            return Err(Error::InvalidArgument(format!("{} is not a subfield of {}", self.label(), f.label())));
        }
        Ok((0..f.degree())
            .map(|i| self.class_of(f.representative(i) as i64).unwrap())
            .collect())
    }

    /// Residues mod `level` (a multiple of the conductor) whose automorphisms fix E.
    pub fn fixing_residues(&self, level: u64) -> Result<Vec<u64>> {
        if level % self.m != 0 {
            return invalid(format!("{} does not contain the field of conductor {}", level, self.m));
        }
        Ok((1..=level)
            .filter(|&x| gcd(x, level) == 1)
            .map(|x| x % level)
            .filter(|&x| self.m == 1 || self.h.binary_search(&(x % self.m)).is_ok())
            .collect())
    }

    pub fn characters(&self) -> Vec<Character> {
        self.gal.all_characters()
    }
}

fn split_prime(m: u64, p: u64) -> (u64, u32) {
    let mut mp = m;
    let mut a = 0;
    while mp % p == 0 && mp > 0 {
        mp /= p;
        a += 1;
    }
    (mp, a)
}

/// All abelian fields E ≠ ℚ with conductor ≤ `max_conductor`, ordered by conductor, then degree,
/// then subgroup.
pub fn enumerate_fields(max_conductor: u64) -> Vec<AbelianField> {
    let mut out = Vec::new();
    for m in 3..=max_conductor {
        if m % 4 == 2 {
            continue;
        }
        let mut fields: Vec<AbelianField> = subgroups_of_units(m)
            .into_iter()
            .map(|h| AbelianField::from_subgroup_unchecked(m, h))
            .filter(|f| f.has_exact_conductor())
            .collect();
        fields.sort_by(|a, b| a.degree().cmp(&b.degree()).then_with(|| a.h.cmp(&b.h)));
        out.extend(fields);
    }
    out
}

/// Every subgroup of (ℤ/m)^× as a sorted residue list.
pub fn subgroups_of_units(m: u64) -> Vec<Vec<u64>> {
    let units: Vec<u64> = (1..m).filter(|&x| gcd(x, m) == 1).collect();
    let mut cyclic: Vec<Vec<u64>> = units.iter().map(|&a| closure(m, &[a])).collect();
    cyclic.sort();
    cyclic.dedup();
    let mut all: HashSet<Vec<u64>> = cyclic.iter().cloned().collect();
    let mut frontier: Vec<Vec<u64>> = cyclic.clone();
    while let Some(a) = frontier.pop() {
        for c in &cyclic {
            if c.iter().all(|x| a.binary_search(x).is_ok()) {
                continue;
            }
            let mut prod: Vec<u64> = a.iter().flat_map(|&x| c.iter().map(move |&y| x * y % m)).collect();
            prod.sort_unstable();
            prod.dedup();
            if all.insert(prod.clone()) {
                frontier.push(prod);
            }
        }
    }
    let mut v: Vec<Vec<u64>> = all.into_iter().collect();
    v.sort();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_group_logs_are_homomorphic() {
        for m in [8u64, 9, 12, 15, 16, 40, 63] {
            let u = UnitGroup::get(m);
            let units = u.units();
            assert_eq!(units.len() as u64, euler_phi(m));
            for &a in &units {
                for &b in &units {
                    let ia = u.index_of(a as i64).unwrap();
                    let ib = u.index_of(b as i64).unwrap();
                    let iab = u.index_of((a * b % m) as i64).unwrap();
                    assert_eq!(u.group.mul(ia, ib), iab);
                }
            }
        }
    }

    #[test]
    fn basic_fields() {
        let q5p = AbelianField::real_cyclotomic(5).unwrap();
        assert_eq!(q5p.degree(), 2);
        assert!(q5p.is_real());
        assert_eq!(q5p.rank(), 1);
        let q3 = AbelianField::cyclotomic(3).unwrap();
        assert!(!q3.is_real());
        assert_eq!(q3.frobenius(5).unwrap(), q3.class_of(2).unwrap());
        assert_eq!(q3.frobenius(7).unwrap(), 0);
        // ℚ(ζ_6) = ℚ(ζ_3) has conductor 3
        assert!(AbelianField::cyclotomic(6).is_err());
        // ⟨11⟩ ≤ (ℤ/15)^× is the kernel of reduction mod 5, so its fixed field has conductor 5
        assert!(AbelianField::new(15, &[11]).is_err());
        assert_eq!(AbelianField::new(15, &[4]).unwrap().degree(), 4);
    }

    #[test]
    fn field_counts() {
        // number of abelian fields of conductor exactly m for small m
        let fs = enumerate_fields(12);
        let count = |m: u64| fs.iter().filter(|f| f.conductor() == m).count();
        assert_eq!(count(3), 1);
        assert_eq!(count(4), 1);
        assert_eq!(count(5), 2);
        assert_eq!(count(7), 3);
        assert_eq!(count(8), 3);
        assert_eq!(count(12), 2);
    }

    #[test]
    fn decomposition_and_inertia() {
        let f = AbelianField::cyclotomic(12).unwrap();
        // at 3: inertia is {x ≡ 1 mod 4} = {1, 5}
        let i3 = f.inertia_group(3);
        assert_eq!(i3.len(), 2);
        // 3 ≡ 3 mod 4 so the decomposition group is everything
        assert_eq!(f.decomposition_group(3).len(), 4);
        assert_eq!(f.residue_degree(3), 2);
        assert_eq!(f.decomposition_group(5).len(), 2);
    }

    #[test]
    fn subfield_relation() {
        let e = AbelianField::cyclotomic(4).unwrap();
        let f = AbelianField::cyclotomic(12).unwrap();
        assert!(e.is_subfield_of(&f));
        assert!(!f.is_subfield_of(&e));
        let t = e.restriction_table(&f).unwrap();
        assert_eq!(t.len(), 4);
        assert!(AbelianField::rationals().is_subfield_of(&f));
    }
}
