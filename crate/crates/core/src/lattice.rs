//! ℤ-lattices with an action of a finite abelian group: Hom into ℤ[G], exterior biduals,
//! invariants, the injection lemma for biduals, and Fitting ideals over group rings.
//!
//! Vectors are rows and g acts by `x ↦ x·A_g`. For s ≥ 1 the bidual ⋂ˢ_{ℤ[G]} M is realized
//! inside ∧ˢ_ℤ M as the alternating tensors W with (σ⊗1⊗…)W = (1⊗σ⊗…)W (the "balanced"
//! tensors), σ acting on the first slot; this is the image of Hom_{ℤ[G]}(∧ˢ M*, ℤ[G]) under
//! f ↦ coefficient of 1.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::groupring::{FiniteAbelianGroup, IntGroupRing};
use crate::linalg::{det_int, hnf, hnf_contains, hnf_index, identity, left_kernel, mat_mul, solve_combination, vec_mat, IntMatrix};

pub const MAX_GROUP_ORDER: usize = 24;
pub const MAX_RANK: usize = 12;
/// Rank cap for s ≤ 1, where no tensor powers are formed.
pub const MAX_RANK_LINEAR: usize = 48;
pub const MAX_WEDGE: usize = 3;

fn guard(g: &FiniteAbelianGroup, rank: usize, s: usize) -> Result<()> {
    let cap = if s <= 1 { MAX_RANK_LINEAR } else { MAX_RANK };
    if g.order() > MAX_GROUP_ORDER || rank > cap || s > MAX_WEDGE {
        return Err(Error::ResourceGuard(format!(
            "|G| = {}, rank = {rank}, s = {s} exceeds the limits |G| ≤ {MAX_GROUP_ORDER}, rank ≤ {cap}, s ≤ {MAX_WEDGE}",
            g.order()
        )));
    }
    Ok(())
}

fn to_rat(v: &[BigInt]) -> Vec<BigRational> {
    v.iter().map(|x| BigRational::from_integer(x.clone())).collect()
}

/// Integer coordinates of `v` in the ℤ-span of `basis` (linearly independent rows).
pub fn coordinates(basis: &IntMatrix, v: &[BigInt]) -> Option<Vec<BigInt>> {
    let b: Vec<Vec<BigRational>> = basis.iter().map(|r| to_rat(r)).collect();
    let c = solve_combination(&b, &to_rat(v))?;
    c.iter().map(|x| x.is_integer().then(|| x.to_integer())).collect()
}

/// A ℤ-lattice ℤ^n with commuting automorphisms, one per invariant-factor generator of G.
#[derive(Clone, Debug, PartialEq)]
pub struct GLattice {
    group: FiniteAbelianGroup,
    rank: usize,
    actions: Vec<IntMatrix>,
}

impl GLattice {
    pub fn new(group: &FiniteAbelianGroup, rank: usize, actions: Vec<IntMatrix>) -> Result<Self> {
        if actions.len() != group.rank() {
            return Err(Error::DimensionMismatch { expected: group.rank(), got: actions.len() });
        }
        for a in &actions {
            if a.len() != rank || a.iter().any(|r| r.len() != rank) {
                return invalid("action matrix has the wrong size");
            }
            if rank > 0 && det_int(a).abs() != BigInt::one() {
                return invalid("action matrix is not invertible over ℤ");
            }
        }
        for (i, a) in actions.iter().enumerate() {
            let d = group.invariants()[i];
            let mut p = identity(rank);
            for _ in 0..d {
                p = mat_mul(&p, a);
            }
            if p != identity(rank) {
                return invalid("action matrix does not satisfy the generator order");
            }
            for b in &actions[i + 1..] {
                if mat_mul(a, b) != mat_mul(b, a) {
                    return invalid("action matrices do not commute");
                }
            }
        }
        Ok(GLattice { group: group.clone(), rank, actions })
    }

    /// ℤ[G] with basis the group elements, σ acting by left translation.
    pub fn regular(group: &FiniteAbelianGroup) -> Self {
        let n = group.order();
        let actions = group
            .generators()
            .iter()
            .map(|&g| {
                let mut a = vec![vec![BigInt::zero(); n]; n];
                for t in 0..n {
                    a[t][group.mul(g, t)] = BigInt::one();
                }
                a
            })
            .collect();
        GLattice { group: group.clone(), rank: n, actions }
    }

    pub fn trivial(group: &FiniteAbelianGroup, n: usize) -> Self {
        GLattice { group: group.clone(), rank: n, actions: vec![identity(n); group.rank()] }
    }

    pub fn direct_sum(&self, o: &Self) -> Self {
        assert_eq!(self.group, o.group);
        let n = self.rank + o.rank;
        let actions = self
            .actions
            .iter()
            .zip(&o.actions)
            .map(|(a, b)| {
                let mut m = vec![vec![BigInt::zero(); n]; n];
                for i in 0..self.rank {
                    m[i][..self.rank].clone_from_slice(&a[i]);
                }
                for i in 0..o.rank {
                    m[self.rank + i][self.rank..].clone_from_slice(&b[i]);
                }
                m
            })
            .collect();
        GLattice { group: self.group.clone(), rank: n, actions }
    }

    /// The augmentation ideal of ℤ[G] with basis σ − 1, σ ≠ 1.
    pub fn augmentation_ideal(group: &FiniteAbelianGroup) -> Self {
        let reg = Self::regular(group);
        let n = group.order();
        let gens: IntMatrix = (1..n)
            .map(|t| {
                let mut v = vec![BigInt::zero(); n];
                v[t] = BigInt::one();
                v[0] = -BigInt::one();
                v
            })
            .collect();
        reg.sublattice(&gens).0
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn generator_actions(&self) -> &[IntMatrix] {
        &self.actions
    }

    /// Matrix of the group element with index `idx`.
    pub fn action(&self, idx: usize) -> IntMatrix {
        let c = self.group.coords(idx);
        let mut m = identity(self.rank);
        for (i, &k) in c.iter().enumerate() {
            for _ in 0..k {
                m = mat_mul(&m, &self.actions[i]);
            }
        }
        m
    }

    pub fn apply(&self, x: &[BigInt], idx: usize) -> Vec<BigInt> {
        vec_mat(x, &self.action(idx))
    }

    /// The G-stable sublattice generated by `gens`, with its Hermite basis (rows in the
    /// coordinates of `self`).
    pub fn sublattice(&self, gens: &IntMatrix) -> (GLattice, IntMatrix) {
        let mut span = Vec::new();
        let mats: Vec<IntMatrix> = self.group.elements().map(|s| self.action(s)).collect();
        for g in gens {
            for m in &mats {
                span.push(vec_mat(g, m));
            }
        }
        let basis = hnf(&span);
        let sub = self.restrict_to(&basis).expect("G-stable span");
        (sub, basis)
    }

    /// The lattice structure on a G-stable sublattice with the given basis.
    pub fn restrict_to(&self, basis: &IntMatrix) -> Result<GLattice> {
        let actions = self
            .actions
            .iter()
            .map(|a| {
                basis
                    .iter()
                    .map(|b| coordinates(basis, &vec_mat(b, a)).ok_or_else(|| Error::Precondition("sublattice is not G-stable".into())))
                    .collect::<Result<IntMatrix>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GLattice { group: self.group.clone(), rank: basis.len(), actions })
    }

    /// Change of ℤ-basis by a unimodular matrix `u` (new basis rows = rows of u).
    pub fn conjugate(&self, u: &IntMatrix) -> Result<GLattice> {
        self.restrict_to(u)
    }

    /// Hom_{ℤ[G]}(self, N) as G-equivariant integer matrices X (x ↦ x·X), with G acting by
    /// X ↦ X·B_σ. Returned as a lattice together with its basis of flattened matrices.
    pub fn hom(&self, n: &GLattice) -> (GLattice, IntMatrix) {
        assert_eq!(self.group, n.group);
        let (r, c) = (self.rank, n.rank);
        let dim = r * c;
        // rows: basis matrices E_{ij}; columns: entries of A_g X − X B_g
        let mut rows = Vec::with_capacity(dim);
        for i in 0..r {
            for j in 0..c {
                let mut row = Vec::new();
                for (a, b) in self.actions.iter().zip(&n.actions) {
                    // (A E_ij)_{kl} = A_ki δ_jl ; (E_ij B)_{kl} = δ_ik B_jl
                    for k in 0..r {
                        for l in 0..c {
                            let mut v = BigInt::zero();
                            if l == j {
                                v += &a[k][i];
                            }
                            if k == i {
                                v -= &b[j][l];
                            }
                            row.push(v);
                        }
                    }
                }
                rows.push(row);
            }
        }
        let ncols = rows.first().map_or(0, |x| x.len());
        let basis = if ncols == 0 { identity(dim) } else { left_kernel(&rows, ncols) };
        // action X ↦ X B_g on flattened matrices
        let flat_action: Vec<IntMatrix> = n
            .actions
            .iter()
            .map(|b| {
                (0..dim)
                    .map(|e| {
                        let (i, j) = (e / c, e % c);
                        let mut out = vec![BigInt::zero(); dim];
                        for l in 0..c {
                            out[i * c + l] = b[j][l].clone();
                        }
                        out
                    })
                    .collect()
            })
            .collect();
        let ambient = GLattice { group: self.group.clone(), rank: dim, actions: flat_action };
        let lat = ambient.restrict_to(&basis).expect("Hom is G-stable");
        (lat, basis)
    }

    /// M* = Hom_{ℤ[G]}(M, ℤ[G]).
    pub fn dual(&self) -> GLattice {
        self.hom(&GLattice::regular(&self.group)).0
    }

    /// M^H for the subgroup generated by `h_gens`, with the induced action of G/H.
    pub fn invariants(&self, h_gens: &[usize]) -> Invariants {
        let (q, table) = self.group.quotient(h_gens);
        let n = self.rank;
        let basis = if h_gens.is_empty() || n == 0 {
            identity(n)
        } else {
            let mut cols: IntMatrix = vec![Vec::new(); n];
            for &h in h_gens {
                let a = self.action(h);
                for i in 0..n {
                    for j in 0..n {
                        let d = &a[i][j] - BigInt::from((i == j) as i64);
                        cols[i].push(d);
                    }
                }
            }
            left_kernel(&cols, h_gens.len() * n)
        };
        let lifts: Vec<usize> = q
            .generators()
            .iter()
            .map(|&g| (0..self.group.order()).find(|&x| table[x] == g).unwrap())
            .collect();
        let actions = lifts
            .iter()
            .map(|&g| {
                let a = self.action(g);
                basis.iter().map(|b| coordinates(&basis, &vec_mat(b, &a)).expect("invariants are G-stable")).collect()
            })
            .collect();
        Invariants { lattice: GLattice { group: q, rank: basis.len(), actions }, basis, table }
    }

    /// Random G-stable sublattice of ℤ[G]^r (r·|G| ≤ `max_rank`), in a random ℤ-basis.
    pub fn random<R: Rng>(rng: &mut R, group: &FiniteAbelianGroup, max_rank: usize) -> GLattice {
        let n = group.order();
        let r = rng.gen_range(1..=(max_rank / n).clamp(1, 3));
        let mut free = GLattice::regular(group);
        for _ in 1..r {
            free = free.direct_sum(&GLattice::regular(group));
        }
        let k = rng.gen_range(1..=2);
        let gens: IntMatrix = (0..k)
            .map(|_| (0..free.rank).map(|_| BigInt::from(rng.gen_range(-3i64..=3))).collect())
            .collect();
        let (sub, _) = free.sublattice(&gens);
        if sub.rank == 0 {
            return GLattice::trivial(group, 1);
        }
        // scramble the basis with a random unimodular matrix
        let mut u = identity(sub.rank);
        for _ in 0..3 * sub.rank {
            let i = rng.gen_range(0..sub.rank);
            let j = rng.gen_range(0..sub.rank);
            if i != j {
                let c = BigInt::from(rng.gen_range(-2i64..=2));
                let rj = u[j].clone();
                for (x, y) in u[i].iter_mut().zip(rj) {
                    *x += &c * y;
                }
            }
        }
        sub.conjugate(&u).expect("unimodular change of basis")
    }
}

/// M^H with its basis in M and the projection G → G/H.
#[derive(Clone, Debug)]
pub struct Invariants {
    pub lattice: GLattice,
    pub basis: IntMatrix,
    pub table: Vec<usize>,
}

/// Sorted s-subsets of {0..n}.
pub fn subsets(n: usize, s: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, s: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == s {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, s, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, s, &mut Vec::new(), &mut out);
    out
}

fn small_det(m: &[Vec<BigInt>]) -> BigInt {
    match m.len() {
        0 => BigInt::one(),
        1 => m[0][0].clone(),
        2 => &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0],
        _ => det_int(m),
    }
}

/// Coordinates of v_1 ∧ … ∧ v_s in the basis e_I of ∧ˢ ℤ^n.
pub fn wedge(vectors: &[Vec<BigInt>], subs: &[Vec<usize>]) -> Vec<BigInt> {
    subs.iter()
        .map(|idx| {
            let m: Vec<Vec<BigInt>> = vectors.iter().map(|v| idx.iter().map(|&i| v[i].clone()).collect()).collect();
            small_det(&m)
        })
        .collect()
}

fn permutations(s: usize) -> Vec<(Vec<usize>, i64)> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<(Vec<usize>, i64)>) {
        let s = used.len();
        if cur.len() == s {
            let mut sign = 1;
            for i in 0..s {
                for j in i + 1..s {
                    if cur[i] > cur[j] {
                        sign = -sign;
                    }
                }
            }
            out.push((cur.clone(), sign));
            return;
        }
        for i in 0..s {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; s], &mut out);
    out
}

fn tuple_index(t: &[usize], n: usize) -> usize {
    t.iter().fold(0, |acc, &i| acc * n + i)
}

/// (σ acting on slot `slot`) applied to the alternating tensor of e_I, as a dense tensor.
fn slot_action(a: &IntMatrix, subset: &[usize], slot: usize, n: usize, perms: &[(Vec<usize>, i64)]) -> Vec<BigInt> {
    let s = subset.len();
    let mut out = vec![BigInt::zero(); n.pow(s as u32)];
    for (p, sign) in perms {
        let t: Vec<usize> = p.iter().map(|&k| subset[k]).collect();
        let row = &a[t[slot]];
        let mut tt = t.clone();
        for (j, c) in row.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            tt[slot] = j;
            out[tuple_index(&tt, n)] += c * BigInt::from(*sign);
        }
    }
    out
}

/// First-slot action on ∧ˢ coordinates (exact on balanced tensors).
fn first_slot_on_wedge(a: &IntMatrix, w: &[BigInt], subs: &[Vec<usize>], n: usize, perms: &[(Vec<usize>, i64)]) -> Vec<BigInt> {
    let s = subs.first().map_or(0, |x| x.len());
    let mut tensor = vec![BigInt::zero(); n.pow(s as u32)];
    for (c, sub) in w.iter().zip(subs) {
        if c.is_zero() {
            continue;
        }
        for (t, x) in tensor.iter_mut().zip(slot_action(a, sub, 0, n, perms)) {
            if !x.is_zero() {
                *t += c * x;
            }
        }
    }
    subs.iter().map(|sub| tensor[tuple_index(sub, n)].clone()).collect()
}

/// ⋂ˢ_{ℤ[G]} M realized in ℚ ⊗ ∧ˢ_ℤ M.
#[derive(Clone, Debug)]
pub struct Bidual {
    pub s: usize,
    /// The bidual with its G-action, in the basis `basis`.
    pub lattice: GLattice,
    /// Basis rows in the coordinates e_I of ∧ˢ_ℤ M (for s = 0: coordinates in ℤ[G]).
    pub basis: IntMatrix,
    /// Hermite basis of the image of ∧ˢ_{ℤ[G]} M.
    pub wedge_image: IntMatrix,
    pub subsets: Vec<Vec<usize>>,
}

impl Bidual {
    /// [⋂ˢ M : image of ∧ˢ M], when finite.
    pub fn wedge_index(&self) -> Option<BigInt> {
        hnf_index(&self.wedge_image, &hnf(&self.basis)).map(|x| x.abs())
    }

    pub fn contains(&self, x: &[BigRational]) -> Result<bool> {
        membership(x, &self.basis)
    }
}

/// The image of x_1 ∧ … ∧ x_s under ∧ˢ_{ℤ[G]} M → ⋂ˢ M: Σ_{σ_1⋯σ_s = 1} σ_1x_1 ∧ … ∧ σ_sx_s.
pub fn canonical_wedge(m: &GLattice, xs: &[Vec<BigInt>], subs: &[Vec<usize>]) -> Vec<BigInt> {
    let g = &m.group;
    let s = xs.len();
    let mats: Vec<IntMatrix> = g.elements().map(|x| m.action(x)).collect();
    let mut out = vec![BigInt::zero(); subs.len()];
    let total = g.order().pow(s.saturating_sub(1) as u32);
    for code in 0..total {
        let mut rest = code;
        let mut prod = g.identity();
        let mut idx = Vec::with_capacity(s);
        for _ in 0..s - 1 {
            let e = rest % g.order();
            rest /= g.order();
            idx.push(e);
            prod = g.mul(prod, e);
        }
        idx.push(g.inv_elem(prod));
        let vs: Vec<Vec<BigInt>> = xs.iter().zip(&idx).map(|(x, &e)| vec_mat(x, &mats[e])).collect();
        for (o, w) in out.iter_mut().zip(wedge(&vs, subs)) {
            *o += w;
        }
    }
    out
}

/// ⋂ˢ_{ℤ[G]} M = (∧ˢ_{ℤ[G]} M*)*.
pub fn exterior_bidual(m: &GLattice, s: usize) -> Result<Bidual> {
    guard(&m.group, m.rank, s)?;
    let g = &m.group;
    if s == 0 {
        let reg = GLattice::regular(g);
        let b = identity(g.order());
        return Ok(Bidual { s, lattice: reg, basis: b.clone(), wedge_image: b, subsets: vec![vec![]] });
    }
    let n = m.rank;
    let subs = subsets(n, s);
    let perms = permutations(s);
    let basis = if subs.is_empty() {
        Vec::new()
    } else if s == 1 {
        identity(n)
    } else {
        let rows: IntMatrix = subs
            .iter()
            .map(|sub| {
                let mut row = Vec::new();
                for a in &m.actions {
                    let x = slot_action(a, sub, 0, n, &perms);
                    let y = slot_action(a, sub, 1, n, &perms);
                    row.extend(x.into_iter().zip(y).map(|(p, q)| p - q));
                }
                row
            })
            .collect();
        let ncols = rows[0].len();
        if ncols == 0 {
            identity(subs.len())
        } else {
            left_kernel(&rows, ncols)
        }
    };
    let actions = m
        .actions
        .iter()
        .map(|a| {
            basis
                .iter()
                .map(|b| coordinates(&basis, &first_slot_on_wedge(a, b, &subs, n, &perms)).expect("bidual is G-stable"))
                .collect()
        })
        .collect();
    let lattice = GLattice { group: g.clone(), rank: basis.len(), actions };
    let e = identity(n);
    let mut images = Vec::new();
    for sub in &subs {
        let xs: Vec<Vec<BigInt>> = sub.iter().map(|&i| e[i].clone()).collect();
        images.push(canonical_wedge(m, &xs, &subs));
    }
    let wedge_image = hnf(&images);
    Ok(Bidual { s, lattice, basis, wedge_image, subsets: subs })
}

/// x ∈ L for a rational vector x and a lattice with integer basis rows.
pub fn membership(x: &[BigRational], basis: &IntMatrix) -> Result<bool> {
    if let Some(b) = basis.first() {
        if b.len() != x.len() {
            return Err(Error::DimensionMismatch { expected: b.len(), got: x.len() });
        }
    }
    if x.iter().all(|c| c.is_zero()) {
        return Ok(true);
    }
    let b: Vec<Vec<BigRational>> = basis.iter().map(|r| to_rat(r)).collect();
    Ok(solve_combination(&b, x).is_some_and(|c| c.iter().all(|q| q.is_integer())))
}

/// Outcome of comparing the two sides of the bidual injection lemma.
#[derive(Clone, Debug)]
pub struct LemmaAReport {
    pub isomorphic: bool,
    pub left_rank: usize,
    pub right_rank: usize,
    pub s: usize,
    pub h_order: usize,
}

/// Compares ⋂ˢ_{ℤ[G/H]}(M^H), transported by the map induced by N_H^s a ↦ N_H a, with
/// (⋂ˢ_{ℤ[G]} M)^H inside ℚ ⊗ ∧ˢ_ℤ M.
pub fn check_lemma_a(m: &GLattice, h_gens: &[usize], s: usize) -> Result<LemmaAReport> {
    guard(&m.group, m.rank, s)?;
    let g = &m.group;
    let h_order = g.subgroup(h_gens).len();
    if s == 0 {
        // both sides are ℤ[G/H]; N_H^0 a ↦ N_H a identifies ℤ[G/H] with N_H·ℤ[G] = ℤ[G]^H
        let reg = GLattice::regular(g);
        let right = reg.invariants(h_gens);
        let (q, table) = g.quotient(h_gens);
        let left: IntMatrix = q
            .elements()
            .map(|t| (0..g.order()).map(|x| BigInt::from((table[x] == t) as i64)).collect())
            .collect();
        let iso = hnf(&left) == hnf(&right.basis);
        return Ok(LemmaAReport { isomorphic: iso, left_rank: left.len(), right_rank: right.basis.len(), s, h_order });
    }
    // right side
    let big = exterior_bidual(m, s)?;
    let inv = big.lattice.invariants(h_gens);
    let right: IntMatrix = inv.basis.iter().map(|c| vec_mat(c, &big.basis)).collect();
    // left side, computed over G/H on M^H
    let mh = m.invariants(h_gens);
    let small = exterior_bidual(&mh.lattice, s)?;
    // spanning set: wedges y^J of basis vectors of M^H
    let nh = mh.lattice.rank;
    let e = identity(nh);
    let mut kappa_small = Vec::new();
    let mut kappa_big = Vec::new();
    let scale = BigRational::new(BigInt::one(), BigInt::from(h_order).pow((s - 1) as u32));
    for sub in subsets(nh, s) {
        let ys: Vec<Vec<BigInt>> = sub.iter().map(|&i| e[i].clone()).collect();
        kappa_small.push(to_rat(&canonical_wedge(&mh.lattice, &ys, &small.subsets)));
        let ys_big: Vec<Vec<BigInt>> = ys.iter().map(|y| vec_mat(y, &mh.basis)).collect();
        let kb: Vec<BigRational> = to_rat(&canonical_wedge(m, &ys_big, &big.subsets)).into_iter().map(|x| x * &scale).collect();
        kappa_big.push(kb);
    }
    let mut left = Vec::new();
    for b in &small.basis {
        let c = solve_combination(&kappa_small, &to_rat(b))
            .ok_or_else(|| Error::Precondition("bidual element outside the rational span".into()))?;
        let mut img = vec![BigRational::zero(); big.subsets.len()];
        for (cj, kj) in c.iter().zip(&kappa_big) {
            if cj.is_zero() {
                continue;
            }
            for (o, x) in img.iter_mut().zip(kj) {
                *o += cj * x;
            }
        }
        if img.iter().any(|x| !x.is_integer()) {
            return Ok(LemmaAReport { isomorphic: false, left_rank: small.basis.len(), right_rank: right.len(), s, h_order });
        }
        left.push(img.into_iter().map(|x| x.to_integer()).collect::<Vec<_>>());
    }
    let iso = hnf(&left) == hnf(&right);
    Ok(LemmaAReport { isomorphic: iso, left_rank: small.basis.len(), right_rank: right.len(), s, h_order })
}

/// (rank of ⋂ˢ M, [⋂ˢ M : image of ∧ˢ M]) computed directly as Hom_{ℤ[G]}(∧ˢ_{ℤ[G]} M*, ℤ[G])
/// from the Hom lattice M*, for s ∈ {1, 2}.
pub fn bidual_index_via_hom(m: &GLattice, s: usize) -> Result<(usize, Option<BigInt>)> {
    guard(&m.group, m.rank, s)?;
    if !(1..=2).contains(&s) {
        return invalid("direct computation supports s ∈ {1, 2}");
    }
    let g = &m.group;
    let n_g = g.order();
    let reg = GLattice::regular(g);
    let (dual, dual_basis) = m.hom(&reg);
    let r = m.rank;
    let d = dual.rank;
    // φ_j(x) = x·X_j ∈ ℤ[G]
    let phi = |j: usize, x: &[BigInt]| -> IntGroupRing {
        let xm: Vec<Vec<BigInt>> = (0..r).map(|i| dual_basis[j][i * n_g..(i + 1) * n_g].to_vec()).collect();
        IntGroupRing::from_coeffs(g, vec_mat(x, &xm)).unwrap()
    };
    let subs = subsets(d, s);
    let nw = subs.len();
    // unknown F: ∧ˢ_ℤ M* → ℤ[G] as an nw × |G| matrix; constraints R·F = 0 (balanced relations)
    // and S_σ F = F·R_σ (equivariance for the first-slot action)
    let mut cols: IntMatrix = vec![Vec::new(); nw * n_g];
    let push_constraint = |cols: &mut IntMatrix, coeff: &dyn Fn(usize, usize) -> BigInt| {
        for (u, col) in cols.iter_mut().enumerate() {
            col.push(coeff(u / n_g, u % n_g));
        }
    };
    let reg_mats: Vec<IntMatrix> = reg.actions.clone();
    let eye = identity(d);
    for (a, rm) in dual.actions.iter().zip(&reg_mats) {
        if s == 2 {
            for i in 0..d {
                for j in i..d {
                    let si = vec_mat(&eye[i], a);
                    let sj = vec_mat(&eye[j], a);
                    let x = wedge(&[si, eye[j].clone()], &subs);
                    let y = wedge(&[eye[i].clone(), sj], &subs);
                    let relw: Vec<BigInt> = x.into_iter().zip(y).map(|(p, q)| p - q).collect();
                    for k in 0..n_g {
                        push_constraint(&mut cols, &|w, kk| if kk == k { relw[w].clone() } else { BigInt::zero() });
                    }
                }
            }
        }
        for (wi, sub) in subs.iter().enumerate() {
            let mut vs: Vec<Vec<BigInt>> = sub.iter().map(|&i| eye[i].clone()).collect();
            vs[0] = vec_mat(&vs[0], a);
            let sw = wedge(&vs, &subs);
            for k in 0..n_g {
                // (S_σ F)[wi][k] − (F R_σ)[wi][k]
                push_constraint(&mut cols, &|w, kk| {
                    let mut v = if kk == k { sw[w].clone() } else { BigInt::zero() };
                    if w == wi {
                        v -= &rm[kk][k];
                    }
                    v
                });
            }
        }
    }
    let ncols = cols.first().map_or(0, |c| c.len());
    let ker = if ncols == 0 { identity(nw * n_g) } else { left_kernel(&cols, ncols) };
    // image of the basis wedges e_I of M: F(φ_J) = det(φ_{j_a}(e_{i_b}))
    let e = identity(r);
    let mut images = Vec::new();
    for isub in subsets(r, s) {
        let mut f = Vec::with_capacity(nw * n_g);
        for jsub in &subs {
            let val = if s == 1 {
                phi(jsub[0], &e[isub[0]])
            } else {
                let a = phi(jsub[0], &e[isub[0]]).mul(&phi(jsub[1], &e[isub[1]]));
                let b = phi(jsub[0], &e[isub[1]]).mul(&phi(jsub[1], &e[isub[0]]));
                a.sub(&b)
            };
            f.extend(val.coeffs().iter().cloned());
        }
        images.push(f);
    }
    let img = hnf(&images);
    Ok((ker.len(), hnf_index(&img, &hnf(&ker)).map(|x| x.abs())))
}

/// An ideal of ℤ[G] (or of ℤ/p^N[G] when `modulus` is set) given by generators.
#[derive(Clone, Debug)]
pub struct IdealOverGroupRing {
    pub group: FiniteAbelianGroup,
    pub generators: Vec<IntGroupRing>,
    pub modulus: Option<BigInt>,
}

impl IdealOverGroupRing {
    pub fn new(group: &FiniteAbelianGroup, generators: Vec<IntGroupRing>, modulus: Option<BigInt>) -> Self {
        IdealOverGroupRing { group: group.clone(), generators, modulus }
    }

    /// Hermite basis of the ℤ-lattice of the ideal (containing p^N·ℤ[G] when reduced).
    pub fn lattice(&self) -> IntMatrix {
        let g = &self.group;
        let mut span = Vec::new();
        for x in &self.generators {
            for s in g.elements() {
                span.push(x.translate(s).coeffs().to_vec());
            }
        }
        if let Some(q) = &self.modulus {
            for s in g.elements() {
                let mut v = vec![BigInt::zero(); g.order()];
                v[s] = q.clone();
                span.push(v);
            }
        }
        hnf(&span)
    }

    pub fn contains(&self, x: &IntGroupRing) -> bool {
        hnf_contains(&self.lattice(), x.coeffs())
    }

    pub fn is_zero(&self) -> bool {
        self.lattice().is_empty()
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut gens = Vec::new();
        for a in &self.generators {
            for b in &o.generators {
                gens.push(a.mul(b));
            }
        }
        IdealOverGroupRing { group: self.group.clone(), generators: gens, modulus: self.modulus.clone().or(o.modulus.clone()) }
    }
}

impl PartialEq for IdealOverGroupRing {
    fn eq(&self, o: &Self) -> bool {
        self.group == o.group && self.modulus == o.modulus && self.lattice() == o.lattice()
    }
}

/// Determinant over the commutative ring ℤ[G] by permutation expansion.
pub fn group_ring_det(m: &[Vec<IntGroupRing>], group: &FiniteAbelianGroup) -> IntGroupRing {
    let n = m.len();
    let mut acc = IntGroupRing::zero(group);
    for (p, sign) in permutations(n) {
        let mut t = IntGroupRing::one(group);
        for (i, &j) in p.iter().enumerate() {
            t = t.mul(&m[i][j]);
        }
        acc = if sign > 0 { acc.add(&t) } else { acc.sub(&t) };
    }
    acc
}

pub const MAX_FITTING_GENERATORS: usize = 6;

/// Fitt⁰ of the module with `n_generators` generators and relations the columns of
/// `presentation` (n_generators rows): the ideal of all maximal minors.
pub fn fitting_ideal(
    group: &FiniteAbelianGroup,
    presentation: &[Vec<IntGroupRing>],
    n_generators: usize,
    modulus: Option<BigInt>,
) -> Result<IdealOverGroupRing> {
    if presentation.len() != n_generators {
        return Err(Error::DimensionMismatch { expected: n_generators, got: presentation.len() });
    }
    if n_generators > MAX_FITTING_GENERATORS {
        return Err(Error::ResourceGuard(format!("at most {MAX_FITTING_GENERATORS} generators")));
    }
    let ncols = presentation.first().map_or(0, |r| r.len());
    if n_generators == 0 {
        return Ok(IdealOverGroupRing::new(group, vec![IntGroupRing::one(group)], modulus));
    }
    let mut gens = Vec::new();
    for cols in subsets(ncols, n_generators) {
        let minor: Vec<Vec<IntGroupRing>> = presentation.iter().map(|row| cols.iter().map(|&c| row[c].clone()).collect()).collect();
        let d = group_ring_det(&minor, group);
        if !d.is_zero() {
            gens.push(d);
        }
    }
    Ok(IdealOverGroupRing::new(group, gens, modulus))
}

/// Set of distinct elements of a subgroup, for callers building H from generators.
pub fn subgroup_elements(g: &FiniteAbelianGroup, gens: &[usize]) -> BTreeSet<usize> {
    g.subgroup(gens).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn zg(g: &FiniteAbelianGroup, v: &[i64]) -> IntGroupRing {
        IntGroupRing::from_coeffs(g, v.iter().map(|&x| BigInt::from(x)).collect()).unwrap()
    }

    #[test]
    fn duals_of_small_lattices() {
        let c2 = FiniteAbelianGroup::cyclic(2);
        let reg = GLattice::regular(&c2);
        assert_eq!(reg.dual().rank(), 2);
        let t = GLattice::trivial(&c2, 1);
        let d = t.dual();
        assert_eq!(d.rank(), 1);
        assert_eq!(d.dual().rank(), 1);
    }

    #[test]
    fn invariants_of_regular_c2() {
        let c2 = FiniteAbelianGroup::cyclic(2);
        let inv = GLattice::regular(&c2).invariants(&[1]);
        assert_eq!(inv.basis, vec![vec![BigInt::one(), BigInt::one()]]);
    }

    #[test]
    fn free_bidual_is_exterior_power() {
        let c3 = FiniteAbelianGroup::cyclic(3);
        let f = GLattice::regular(&c3).direct_sum(&GLattice::regular(&c3));
        let b = exterior_bidual(&f, 2).unwrap();
        assert_eq!(b.wedge_index(), Some(BigInt::one()));
        assert_eq!(b.lattice.rank(), 3);
        let b0 = exterior_bidual(&f, 0).unwrap();
        assert_eq!(b0.lattice.rank(), 3);
    }

    #[test]
    fn lemma_a_examples() {
        let c4 = FiniteAbelianGroup::cyclic(4);
        let m = GLattice::regular(&c4);
        assert!(check_lemma_a(&m, &[2], 1).unwrap().isomorphic);
        assert!(check_lemma_a(&m, &[2], 0).unwrap().isomorphic);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let c2 = FiniteAbelianGroup::cyclic(2);
        for _ in 0..5 {
            let m = GLattice::random(&mut rng, &c2, 6);
            assert!(check_lemma_a(&m, &[1], 2).unwrap().isomorphic);
        }
    }

    #[test]
    fn hom_oracle_matches_balanced_model() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in [2u64, 3] {
            let g = FiniteAbelianGroup::cyclic(n);
            for _ in 0..3 {
                let m = GLattice::random(&mut rng, &g, 6);
                for s in 1..=2 {
                    let b = exterior_bidual(&m, s).unwrap();
                    let (rank, idx) = bidual_index_via_hom(&m, s).unwrap();
                    assert_eq!(rank, b.lattice.rank());
                    assert_eq!(idx, b.wedge_index());
                }
            }
        }
    }

    #[test]
    fn fitting_examples() {
        let c2 = FiniteAbelianGroup::cyclic(2);
        let f = fitting_ideal(&c2, &[vec![zg(&c2, &[1, 1])]], 1, None).unwrap();
        assert_eq!(f, IdealOverGroupRing::new(&c2, vec![zg(&c2, &[1, 1])], None));
        let z = fitting_ideal(&c2, &[vec![], vec![]], 2, None).unwrap();
        assert!(z.is_zero());
        let d = fitting_ideal(
            &c2,
            &[vec![zg(&c2, &[2, 0]), zg(&c2, &[0, 0])], vec![zg(&c2, &[0, 0]), zg(&c2, &[1, 1])]],
            2,
            None,
        )
        .unwrap();
        assert_eq!(d, IdealOverGroupRing::new(&c2, vec![zg(&c2, &[2, 2])], None));
    }

    #[test]
    fn membership_examples() {
        let b = vec![vec![BigInt::from(1), BigInt::from(1)], vec![BigInt::from(0), BigInt::from(2)]];
        let q = |a: i64, d: i64| BigRational::new(a.into(), d.into());
        assert!(membership(&[q(0, 1), q(0, 1)], &b).unwrap());
        assert!(membership(&[q(1, 1), q(1, 1)], &b).unwrap());
        assert!(!membership(&[q(1, 2), q(1, 2)], &b).unwrap());
        assert!(membership(&[q(1, 1)], &b).is_err());
    }
}
