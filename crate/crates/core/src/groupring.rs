//! Finite abelian groups in invariant-factor form and their group rings.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::{gcd, lcm, mobius};
use crate::cycnum::{format_rational, parse_rational, CycNumber};
use crate::error::{invalid, Error, Result};
use crate::linalg::smith_column_transform;

/// ⊕ ℤ/d_i with d_1 | d_2 | … and every d_i > 1. Elements are indexed by their exponent
/// vectors in mixed radix, first coordinate most significant, so index order is lexicographic.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteAbelianGroup {
    inv: Vec<u64>,
}

impl FiniteAbelianGroup {
    pub fn new(invariants: Vec<u64>) -> Result<Self> {
        if invariants.iter().any(|&d| d < 2) {
            return invalid("invariant factors must exceed 1");
        }
        if invariants.windows(2).any(|w| w[1] % w[0] != 0) {
            return invalid("invariant factors must form a divisibility chain");
        }
        Ok(FiniteAbelianGroup { inv: invariants })
    }

    pub fn trivial() -> Self {
        FiniteAbelianGroup { inv: vec![] }
    }

    pub fn cyclic(n: u64) -> Self {
        if n <= 1 {
            Self::trivial()
        } else {
            FiniteAbelianGroup { inv: vec![n] }
        }
    }

    /// The group ∏ ℤ/n_i for arbitrary orders, in invariant-factor form, together with the
    /// coordinate projection from the given product.
    pub fn from_product(orders: &[u64]) -> (Self, Projection) {
        Projection::quotient(orders, &[])
    }

    pub fn invariants(&self) -> &[u64] {
        &self.inv
    }

    pub fn rank(&self) -> usize {
        self.inv.len()
    }

    pub fn order(&self) -> usize {
        self.inv.iter().product::<u64>() as usize
    }

    /// Exponent of the group (1 for the trivial group).
    pub fn exponent(&self) -> u64 {
        self.inv.last().copied().unwrap_or(1)
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn coords(&self, mut idx: usize) -> Vec<u64> {
        let mut c = vec![0; self.inv.len()];
        for i in (0..self.inv.len()).rev() {
            let d = self.inv[i] as usize;
            c[i] = (idx % d) as u64;
            idx /= d;
        }
        c
    }

    pub fn index(&self, coords: &[u64]) -> usize {
        let mut idx = 0usize;
        for (i, &d) in self.inv.iter().enumerate() {
            idx = idx * d as usize + (coords[i] % d) as usize;
        }
        idx
    }

    pub fn index_signed(&self, coords: &[i64]) -> usize {
        let c: Vec<u64> = coords
            .iter()
            .zip(self.inv.iter())
            .map(|(&x, &d)| x.rem_euclid(d as i64) as u64)
            .collect();
        self.index(&c)
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        let (ca, cb) = (self.coords(a), self.coords(b));
        let c: Vec<u64> = ca.iter().zip(cb.iter()).map(|(x, y)| x + y).collect();
        self.index(&c)
    }

    pub fn inv_elem(&self, a: usize) -> usize {
        let c: Vec<u64> = self.coords(a).iter().zip(self.inv.iter()).map(|(&x, &d)| (d - x) % d).collect();
        self.index(&c)
    }

    pub fn pow(&self, a: usize, k: i64) -> usize {
        let c: Vec<i64> = self.coords(a).iter().map(|&x| x as i64 * k).collect();
        self.index_signed(&c)
    }

    pub fn elem_order(&self, a: usize) -> u64 {
        self.coords(a)
            .iter()
            .zip(self.inv.iter())
            .fold(1, |acc, (&x, &d)| lcm(acc, d / gcd(x, d)))
    }

    /// Indices of the standard generators.
    pub fn generators(&self) -> Vec<usize> {
        (0..self.inv.len())
            .map(|i| {
                let mut c = vec![0; self.inv.len()];
                c[i] = 1;
                self.index(&c)
            })
            .collect()
    }

    /// Sorted element list of the subgroup generated by `gens`.
    pub fn subgroup(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order()];
        seen[0] = true;
        let mut list = vec![0usize];
        let mut i = 0;
        while i < list.len() {
            let x = list[i];
            for &g in gens {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    list.push(y);
                }
            }
            i += 1;
        }
        list.sort_unstable();
        list
    }

    /// The quotient G/⟨gens⟩ and the projection G → G/⟨gens⟩ as an index table.
    pub fn quotient(&self, gens: &[usize]) -> (FiniteAbelianGroup, Vec<usize>) {
        let rels: Vec<Vec<i64>> = gens.iter().map(|&g| self.coords(g).iter().map(|&x| x as i64).collect()).collect();
        let (q, proj) = Projection::quotient(&self.inv, &rels);
        let table = (0..self.order())
            .map(|i| {
                let c: Vec<i64> = self.coords(i).iter().map(|&x| x as i64).collect();
                proj.apply(&c)
            })
            .collect();
        (q, table)
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order()
    }

    pub fn format_element(&self, idx: usize) -> String {
        let c: Vec<String> = self.coords(idx).iter().map(|x| x.to_string()).collect();
        format!("[{}]", c.join(","))
    }

    pub fn all_characters(&self) -> Vec<Character> {
        self.elements()
            .map(|i| Character { group: self.clone(), k: self.coords(i) })
            .collect()
    }
}

/// A homomorphism ℤ^k → ⊕ℤ/d_i realizing a quotient of ∏ℤ/n_j.
#[derive(Clone, Debug)]
pub struct Projection {
    v: Vec<Vec<BigInt>>,
    keep: Vec<(usize, u64)>,
    target: FiniteAbelianGroup,
}

impl Projection {
    /// Quotient of ∏ ℤ/orders_j by the subgroup generated by `relations` (coordinate rows).
    pub fn quotient(orders: &[u64], relations: &[Vec<i64>]) -> (FiniteAbelianGroup, Projection) {
        let k = orders.len();
        let mut rel: Vec<Vec<BigInt>> = (0..k)
            .map(|i| (0..k).map(|j| BigInt::from(if i == j { orders[i] } else { 0 })).collect())
            .collect();
        for r in relations {
            rel.push(r.iter().map(|&x| BigInt::from(x)).collect());
        }
        let (d, v) = smith_column_transform(&rel, k);
        let mut keep: Vec<(usize, u64)> = d
            .iter()
            .enumerate()
            .filter_map(|(i, x)| {
                let x = u64::try_from(x).expect("finite quotient");
                (x > 1).then_some((i, x))
            })
            .collect();
        keep.sort_by_key(|&(_, x)| x);
        let target = FiniteAbelianGroup::new(keep.iter().map(|&(_, x)| x).collect())
            .expect("smith form yields a divisibility chain");
        (target.clone(), Projection { v, keep, target })
    }

    pub fn target(&self) -> &FiniteAbelianGroup {
        &self.target
    }

    pub fn apply(&self, coords: &[i64]) -> usize {
        let c: Vec<i64> = self
            .keep
            .iter()
            .map(|&(col, d)| {
                let s: BigInt = coords.iter().zip(self.v.iter()).map(|(&x, row)| BigInt::from(x) * &row[col]).sum();
                let r = s % BigInt::from(d);
                let r = if r.is_negative() { r + BigInt::from(d) } else { r };
                i64::try_from(r).unwrap()
            })
            .collect();
        self.target.index_signed(&c)
    }
}

/// A character χ with χ(g_i) = ζ_{d_i}^{k_i} on the standard generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Character {
    pub group: FiniteAbelianGroup,
    pub k: Vec<u64>,
}

/// ζ_n^k for the fixed primitive root ζ_n = e^{2πi/n}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RootOfUnity {
    pub k: u64,
    pub n: u64,
}

impl RootOfUnity {
    pub fn to_cyc(self) -> CycNumber {
        CycNumber::zeta(self.n, self.k as i64)
    }

    pub fn is_one(self) -> bool {
        self.k % self.n == 0
    }

    pub fn order(self) -> u64 {
        self.n / gcd(self.k % self.n, self.n)
    }
}

impl Character {
    pub fn trivial(group: &FiniteAbelianGroup) -> Self {
        Character { group: group.clone(), k: vec![0; group.rank()] }
    }

    /// Exponent e with χ(σ) = ζ_n^e, n = exp(G).
    pub fn exponent_at(&self, idx: usize) -> u64 {
        let n = self.group.exponent();
        let c = self.group.coords(idx);
        let mut e = 0u64;
        for i in 0..c.len() {
            let d = self.group.invariants()[i];
            e = (e + c[i] * self.k[i] % d * (n / d)) % n;
        }
        e
    }

    pub fn value(&self, idx: usize) -> RootOfUnity {
        RootOfUnity { k: self.exponent_at(idx), n: self.group.exponent() }
    }

    pub fn is_trivial(&self) -> bool {
        self.k.iter().all(|&x| x == 0)
    }

    pub fn order(&self) -> u64 {
        self.k
            .iter()
            .zip(self.group.invariants())
            .fold(1, |acc, (&x, &d)| lcm(acc, d / gcd(x, d)))
    }

    pub fn pow(&self, a: i64) -> Self {
        let k = self
            .k
            .iter()
            .zip(self.group.invariants())
            .map(|(&x, &d)| ((x as i64 * a).rem_euclid(d as i64)) as u64)
            .collect();
        Character { group: self.group.clone(), k }
    }

    pub fn inverse(&self) -> Self {
        self.pow(-1)
    }

    /// χ∘π for the projection `table` from a larger group onto this character's group.
    pub fn inflate(&self, source: &FiniteAbelianGroup, table: &[usize]) -> Character {
        // values on the generators of the source determine the character
        let gens = source.generators();
        let n = self.group.exponent();
        let k = gens
            .iter()
            .zip(source.invariants())
            .map(|(&g, &d)| {
                let e = self.exponent_at(table[g]);
                // ζ_n^e = ζ_d^{k} with k = e·d/n
                e * d / n
            })
            .collect();
        Character { group: source.clone(), k }
    }

    pub fn label(&self) -> String {
        format!("{:?}", self.k)
    }
}

/// Coefficient rings for group-ring elements.
pub trait Coeff: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn c_zero() -> Self;
    fn c_one() -> Self;
    fn c_from_i64(x: i64) -> Self;
    fn c_is_zero(&self) -> bool;
    fn c_add(&self, o: &Self) -> Self;
    fn c_sub(&self, o: &Self) -> Self;
    fn c_mul(&self, o: &Self) -> Self;
    fn c_neg(&self) -> Self;
    /// Division known to be exact (used by fraction-free elimination).
    fn c_exact_div(&self, o: &Self) -> Self;
    fn c_to_cyc(&self) -> CycNumber;
    fn c_format(&self) -> String;
}

impl Coeff for BigInt {
    fn c_zero() -> Self {
        BigInt::zero()
    }
    fn c_one() -> Self {
        BigInt::one()
    }
    fn c_from_i64(x: i64) -> Self {
        BigInt::from(x)
    }
    fn c_is_zero(&self) -> bool {
        self.is_zero()
    }
    fn c_add(&self, o: &Self) -> Self {
        self + o
    }
    fn c_sub(&self, o: &Self) -> Self {
        self - o
    }
    fn c_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn c_neg(&self) -> Self {
        -self
    }
    fn c_exact_div(&self, o: &Self) -> Self {
        self / o
    }
    fn c_to_cyc(&self) -> CycNumber {
        CycNumber::from_rational(BigRational::from_integer(self.clone()))
    }
    fn c_format(&self) -> String {
        self.to_string()
    }
}

impl Coeff for BigRational {
    fn c_zero() -> Self {
        BigRational::zero()
    }
    fn c_one() -> Self {
        BigRational::one()
    }
    fn c_from_i64(x: i64) -> Self {
        BigRational::from_integer(BigInt::from(x))
    }
    fn c_is_zero(&self) -> bool {
        self.is_zero()
    }
    fn c_add(&self, o: &Self) -> Self {
        self + o
    }
    fn c_sub(&self, o: &Self) -> Self {
        self - o
    }
    fn c_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn c_neg(&self) -> Self {
        -self
    }
    fn c_exact_div(&self, o: &Self) -> Self {
        self / o
    }
    fn c_to_cyc(&self) -> CycNumber {
        CycNumber::from_rational(self.clone())
    }
    fn c_format(&self) -> String {
        format_rational(self)
    }
}

impl Coeff for CycNumber {
    fn c_zero() -> Self {
        CycNumber::zero()
    }
    fn c_one() -> Self {
        CycNumber::one()
    }
    fn c_from_i64(x: i64) -> Self {
        CycNumber::from_int(x)
    }
    fn c_is_zero(&self) -> bool {
        self.is_zero()
    }
    fn c_add(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn c_sub(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn c_mul(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn c_neg(&self) -> Self {
        self.neg()
    }
    fn c_exact_div(&self, o: &Self) -> Self {
        self.div(o).expect("nonzero divisor")
    }
    fn c_to_cyc(&self) -> CycNumber {
        self.clone()
    }
    fn c_format(&self) -> String {
        format!("({self})")
    }
}

/// A dense element Σ c_σ σ of R[G].
#[derive(Clone, Debug, PartialEq)]
pub struct GroupRingElement<R: Coeff> {
    group: FiniteAbelianGroup,
    coeffs: Vec<R>,
}

pub type IntGroupRing = GroupRingElement<BigInt>;
pub type RatGroupRing = GroupRingElement<BigRational>;
pub type CycGroupRing = GroupRingElement<CycNumber>;

impl<R: Coeff> GroupRingElement<R> {
    pub fn zero(group: &FiniteAbelianGroup) -> Self {
        GroupRingElement { group: group.clone(), coeffs: vec![R::c_zero(); group.order()] }
    }

    pub fn one(group: &FiniteAbelianGroup) -> Self {
        Self::basis(group, 0, R::c_one())
    }

    /// c·σ for the element σ with index `idx`.
    pub fn basis(group: &FiniteAbelianGroup, idx: usize, c: R) -> Self {
        let mut x = Self::zero(group);
        x.coeffs[idx] = c;
        x
    }

    pub fn from_coeffs(group: &FiniteAbelianGroup, coeffs: Vec<R>) -> Result<Self> {
        if coeffs.len() != group.order() {
            return Err(Error::DimensionMismatch { expected: group.order(), got: coeffs.len() });
        }
        Ok(GroupRingElement { group: group.clone(), coeffs })
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn coeffs(&self) -> &[R] {
        &self.coeffs
    }

    pub fn coeff(&self, idx: usize) -> &R {
        &self.coeffs[idx]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.c_is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.group, o.group);
        let c = self.coeffs.iter().zip(o.coeffs.iter()).map(|(a, b)| a.c_add(b)).collect();
        GroupRingElement { group: self.group.clone(), coeffs: c }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!(self.group, o.group);
        let c = self.coeffs.iter().zip(o.coeffs.iter()).map(|(a, b)| a.c_sub(b)).collect();
        GroupRingElement { group: self.group.clone(), coeffs: c }
    }

    pub fn neg(&self) -> Self {
        let c = self.coeffs.iter().map(|a| a.c_neg()).collect();
        GroupRingElement { group: self.group.clone(), coeffs: c }
    }

    pub fn scale(&self, s: &R) -> Self {
        let c = self.coeffs.iter().map(|a| a.c_mul(s)).collect();
        GroupRingElement { group: self.group.clone(), coeffs: c }
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.group, o.group);
        let g = &self.group;
        let n = g.order();
        let mut out = vec![R::c_zero(); n];
        let nz: Vec<usize> = (0..n).filter(|&j| !o.coeffs[j].c_is_zero()).collect();
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.c_is_zero() {
                continue;
            }
            for &j in &nz {
                let k = g.mul(i, j);
                out[k] = out[k].c_add(&a.c_mul(&o.coeffs[j]));
            }
        }
        GroupRingElement { group: g.clone(), coeffs: out }
    }

    /// Multiplication by the group element with index `idx`.
    pub fn translate(&self, idx: usize) -> Self {
        let mut out = vec![R::c_zero(); self.coeffs.len()];
        for (i, a) in self.coeffs.iter().enumerate() {
            out[self.group.mul(i, idx)] = a.clone();
        }
        GroupRingElement { group: self.group.clone(), coeffs: out }
    }

    /// σ ↦ σ^{-1} extended linearly.
    pub fn involution(&self) -> Self {
        let mut out = vec![R::c_zero(); self.coeffs.len()];
        for (i, a) in self.coeffs.iter().enumerate() {
            out[self.group.inv_elem(i)] = a.clone();
        }
        GroupRingElement { group: self.group.clone(), coeffs: out }
    }

    pub fn map<S: Coeff>(&self, f: impl Fn(&R) -> S) -> GroupRingElement<S> {
        GroupRingElement { group: self.group.clone(), coeffs: self.coeffs.iter().map(f).collect() }
    }

    /// Image under the map induced by an index table `G → target`.
    pub fn restriction(&self, target: &FiniteAbelianGroup, table: &[usize]) -> Self {
        let mut out = vec![R::c_zero(); target.order()];
        for (i, a) in self.coeffs.iter().enumerate() {
            if !a.c_is_zero() {
                out[table[i]] = out[table[i]].c_add(a);
            }
        }
        GroupRingElement { group: target.clone(), coeffs: out }
    }

    /// χ(x) = Σ c_σ χ(σ).
    pub fn apply_character(&self, chi: &Character) -> CycNumber {
        let n = self.group.exponent();
        let mut acc = CycNumber::zero();
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.c_is_zero() {
                continue;
            }
            acc = acc.add(&a.c_to_cyc().mul(&CycNumber::zeta(n, chi.exponent_at(i) as i64)));
        }
        acc
    }

    /// Determinant of multiplication by `self` on R[G] in the group-element basis.
    pub fn norm_to_base(&self) -> R {
        let g = &self.group;
        let n = g.order();
        // column j = coordinates of self·σ_j
        let mut m: Vec<Vec<R>> = vec![vec![R::c_zero(); n]; n];
        for j in 0..n {
            for (i, a) in self.coeffs.iter().enumerate() {
                if !a.c_is_zero() {
                    m[g.mul(i, j)][j] = a.clone();
                }
            }
        }
        bareiss_det(m)
    }

    /// Canonical text form `c1*[e1] + c2*[e2] + …` over the nonzero coefficients.
    pub fn to_text(&self) -> String {
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.c_is_zero())
            .map(|(i, c)| format!("{}*{}", c.c_format(), self.group.format_element(i)))
            .collect();
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }
}

impl<R: Coeff> fmt::Display for GroupRingElement<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl RatGroupRing {
    pub fn from_int(x: &IntGroupRing) -> Self {
        x.map(|c| BigRational::from_integer(c.clone()))
    }

    /// Integer coefficients, if all coefficients are integers.
    pub fn to_int(&self) -> Option<IntGroupRing> {
        if self.coeffs.iter().all(|c| c.is_integer()) {
            Some(self.map(|c| c.to_integer()))
        } else {
            None
        }
    }

    pub fn denominator(&self) -> BigInt {
        use num_integer::Integer;
        self.coeffs.iter().fold(BigInt::one(), |a, c| a.lcm(c.denom()))
    }

    /// Parses the canonical text form.
    pub fn parse(group: &FiniteAbelianGroup, s: &str) -> Result<Self> {
        let mut x = Self::zero(group);
        let s = s.trim();
        if s == "0" {
            return Ok(x);
        }
        for term in s.split(" + ") {
            let (c, e) = term
                .split_once("*[")
                .ok_or_else(|| Error::Parse(format!("bad group-ring term `{term}`")))?;
            let e = e.strip_suffix(']').ok_or_else(|| Error::Parse(format!("bad term `{term}`")))?;
            let coords: Vec<u64> = if e.is_empty() {
                vec![]
            } else {
                e.split(',')
                    .map(|t| t.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad exponent in `{term}`"))))
                    .collect::<Result<_>>()?
            };
            if coords.len() != group.rank() || coords.iter().zip(group.invariants()).any(|(a, d)| a >= d) {
                return Err(Error::Parse(format!("exponent vector out of range in `{term}`")));
            }
            let idx = group.index(&coords);
            x.coeffs[idx] += parse_rational(c)?;
        }
        Ok(x)
    }
}

fn bareiss_det<R: Coeff>(mut a: Vec<Vec<R>>) -> R {
    let n = a.len();
    if n == 0 {
        return R::c_one();
    }
    let mut sign = false;
    let mut prev = R::c_one();
    for k in 0..n - 1 {
        if a[k][k].c_is_zero() {
            let Some(s) = (k + 1..n).find(|&i| !a[i][k].c_is_zero()) else {
                return R::c_zero();
            };
            a.swap(k, s);
            sign = !sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = a[i][j].c_mul(&a[k][k]).c_sub(&a[i][k].c_mul(&a[k][j]));
                a[i][j] = v.c_exact_div(&prev);
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign {
        d.c_neg()
    } else {
        d
    }
}

/// N_H = Σ_{σ∈H} σ for the subgroup generated by `gens`.
pub fn norm_element(group: &FiniteAbelianGroup, gens: &[usize]) -> IntGroupRing {
    let mut x = IntGroupRing::zero(group);
    for h in group.subgroup(gens) {
        x.coeffs[h] = BigInt::one();
    }
    x
}

/// e_χ = |G|^{-1} Σ χ(σ) σ^{-1}.
pub fn idempotent_char(chi: &Character) -> CycGroupRing {
    let g = &chi.group;
    let n = g.exponent();
    let inv_order = BigRational::new(BigInt::one(), BigInt::from(g.order()));
    let mut x = CycGroupRing::zero(g);
    for s in g.elements() {
        let v = CycNumber::zeta(n, chi.exponent_at(s) as i64).scale(&inv_order);
        x.coeffs[g.inv_elem(s)] = v;
    }
    x
}

/// Σ_{χ∈S} e_χ for a Galois-stable set S of characters; the result has rational coefficients.
pub fn rational_idempotent(group: &FiniteAbelianGroup, chars: &[Character]) -> RatGroupRing {
    let n = group.exponent();
    let mut x = RatGroupRing::zero(group);
    for tau in group.elements() {
        // Σ_χ χ(τ^{-1}); the count of exponents e depends only on gcd(e, n)
        let mut cnt = vec![0i64; n as usize];
        let ti = group.inv_elem(tau);
        for chi in chars {
            cnt[chi.exponent_at(ti) as usize] += 1;
        }
        let mut s = 0i64;
        for (e, &c) in cnt.iter().enumerate() {
            if c != 0 {
                let g = gcd(e as u64, n);
                let g = if e == 0 { n } else { g };
                // the φ(n/g) exponents with gcd g sum to μ(n/g)
                s += c * mobius(n / g) * (crate::arith::euler_phi(n) as i64)
                    / crate::arith::euler_phi(n / g) as i64;
            }
        }
        x.coeffs[tau] = BigRational::new(BigInt::from(s), BigInt::from(group.order() as i64 * crate::arith::euler_phi(n) as i64));
    }
    x
}

/// δ_T = ∏_{ℓ∈T} (1 − ℓ·σ_ℓ^{-1}) in ℤ[𝒢_E].
pub fn delta_t(field: &crate::field::AbelianField, t: &[u64]) -> Result<IntGroupRing> {
    let g = field.galois_group();
    let mut acc = IntGroupRing::one(g);
    for &ell in t {
        if field.conductor() % ell == 0 {
            return invalid(format!("{ell} ramifies in the field of conductor {}", field.conductor()));
        }
        let fr = field.frobenius(ell)?;
        let mut f = IntGroupRing::one(g);
        let idx = g.inv_elem(fr);
        f.coeffs[idx] = &f.coeffs[idx] - BigInt::from(ell);
        acc = acc.mul(&f);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: u64) -> FiniteAbelianGroup {
        FiniteAbelianGroup::cyclic(n)
    }

    fn zg(g: &FiniteAbelianGroup, v: &[i64]) -> IntGroupRing {
        IntGroupRing::from_coeffs(g, v.iter().map(|&x| BigInt::from(x)).collect()).unwrap()
    }

    #[test]
    fn norm_elements() {
        let g = c(2);
        assert_eq!(norm_element(&g, &[1]), zg(&g, &[1, 1]));
        assert_eq!(norm_element(&g, &[]), zg(&g, &[1, 0]));
        let g4 = c(4);
        assert_eq!(norm_element(&g4, &[2]), zg(&g4, &[1, 0, 1, 0]));
    }

    #[test]
    fn c2_idempotents() {
        let g = c(2);
        let chars = g.all_characters();
        let e0 = idempotent_char(&chars[0]);
        let e1 = idempotent_char(&chars[1]);
        assert_eq!(e0.to_text(), "(1/2)*[0] + (1/2)*[1]");
        assert_eq!(e1.to_text(), "(1/2)*[0] + (-1/2)*[1]");
    }

    #[test]
    fn c3_idempotent_squares() {
        let g = c(3);
        for chi in g.all_characters() {
            let e = idempotent_char(&chi);
            assert_eq!(e.mul(&e), e);
        }
    }

    #[test]
    fn quotient_c4_to_c2() {
        let g = c(4);
        let (q, t) = g.quotient(&[2]);
        assert_eq!(q.order(), 2);
        let x = zg(&g, &[1, 0, 1, 0]);
        assert_eq!(x.restriction(&q, &t), zg(&q, &[2, 0]));
    }

    #[test]
    fn regular_determinants() {
        let g = c(2);
        assert_eq!(zg(&g, &[2, 1]).norm_to_base(), BigInt::from(3));
        assert_eq!(zg(&g, &[1, 0]).norm_to_base(), BigInt::from(1));
        assert_eq!(zg(&g, &[1, 1]).norm_to_base(), BigInt::from(0));
    }

    #[test]
    fn text_roundtrip() {
        let g = FiniteAbelianGroup::new(vec![2, 4]).unwrap();
        let x = RatGroupRing::parse(&g, "1/6*[0,0] + -1/6*[1,3]").unwrap();
        assert_eq!(x.to_text(), "1/6*[0,0] + -1/6*[1,3]");
        assert_eq!(RatGroupRing::parse(&g, &x.to_text()).unwrap(), x);
    }

    #[test]
    fn rational_idempotent_of_all_characters_is_one() {
        let g = FiniteAbelianGroup::new(vec![2, 6]).unwrap();
        let e = rational_idempotent(&g, &g.all_characters());
        assert_eq!(e, RatGroupRing::one(&g));
        let triv = rational_idempotent(&g, &[Character::trivial(&g)]);
        let n = norm_element(&g, &g.generators());
        assert_eq!(triv, RatGroupRing::from_int(&n).scale(&BigRational::new(1.into(), 12.into())));
    }
}
