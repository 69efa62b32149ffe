//! Integer and rational matrix normal forms. Matrices are row-major `Vec<Vec<_>>`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;
pub type RatMatrix = Vec<Vec<BigRational>>;

pub fn int_matrix(rows: &[Vec<i64>]) -> IntMatrix {
    rows.iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}

pub fn identity(n: usize) -> IntMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| BigInt::from((i == j) as i64)).collect())
        .collect()
}

pub fn mat_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    a.iter()
        .map(|row| {
            let mut out = vec![BigInt::zero(); cols];
            for k in 0..inner {
                if row[k].is_zero() {
                    continue;
                }
                for (j, o) in out.iter_mut().enumerate() {
                    if !b[k][j].is_zero() {
                        *o += &row[k] * &b[k][j];
                    }
                }
            }
            out
        })
        .collect()
}

pub fn vec_mat(v: &[BigInt], m: &IntMatrix) -> Vec<BigInt> {
    let cols = if m.is_empty() { 0 } else { m[0].len() };
    let mut out = vec![BigInt::zero(); cols];
    for (k, x) in v.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, o) in out.iter_mut().enumerate() {
            if !m[k][j].is_zero() {
                *o += x * &m[k][j];
            }
        }
    }
    out
}

pub fn transpose<T: Clone>(m: &[Vec<T>], ncols: usize) -> Vec<Vec<T>> {
    (0..ncols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

fn sub_scaled(target: &mut [BigInt], src: &[BigInt], q: &BigInt, from: usize) {
    for j in from..target.len() {
        if !src[j].is_zero() {
            target[j] -= q * &src[j];
        }
    }
}

/// Row echelon form over ℤ using only the first `pivot_cols` columns for pivots;
/// operations are applied to whole rows. Rows above each pivot are reduced into
/// `[0, pivot)`. Returns the pivot columns; the first `pivots.len()` rows are the
/// nonzero part, the rest are zero on the pivot block.
pub fn echelon(rows: &mut IntMatrix, pivot_cols: usize) -> Vec<usize> {
    let n = rows.len();
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..pivot_cols {
        if r == n {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for i in r..n {
                if !rows[i][c].is_zero()
                    && best.map_or(true, |b| rows[i][c].abs() < rows[b][c].abs())
                {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            rows.swap(r, b);
            let mut clean = true;
            let (head, tail) = rows.split_at_mut(r + 1);
            let prow = &head[r];
            for row in tail.iter_mut() {
                if row[c].is_zero() {
                    continue;
                }
                let q = row[c].div_floor(&prow[c]);
                sub_scaled(row, prow, &q, c);
                if !row[c].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if r < n && !rows[r][c].is_zero() {
            if rows[r][c].is_negative() {
                for x in rows[r].iter_mut() {
                    *x = -&*x;
                }
            }
            let (head, tail) = rows.split_at_mut(r);
            let prow = &tail[0];
            for row in head.iter_mut() {
                if !row[c].is_zero() {
                    let q = row[c].div_floor(&prow[c]);
                    sub_scaled(row, prow, &q, c);
                }
            }
            pivots.push(c);
            r += 1;
        }
    }
    pivots
}

/// Hermite normal form of the ℤ-span of `rows` (zero rows dropped).
pub fn hnf(rows: &[Vec<BigInt>]) -> IntMatrix {
    if rows.is_empty() {
        return Vec::new();
    }
    let ncols = rows[0].len();
    let mut m = rows.to_vec();
    let piv = echelon(&mut m, ncols);
    m.truncate(piv.len());
    m
}

/// Basis (in Hermite form) of `{x ∈ ℤ^r : x·A = 0}` where `A` has `r` rows and `ncols` columns.
pub fn left_kernel(a: &[Vec<BigInt>], ncols: usize) -> IntMatrix {
    // zero columns and columns equal up to sign do not change the kernel
    let mut seen = std::collections::HashSet::new();
    let mut keep = Vec::new();
    for c in 0..ncols {
        let mut col: Vec<BigInt> = a.iter().map(|row| row[c].clone()).collect();
        let Some(first) = col.iter().find(|x| !x.is_zero()) else {
            continue;
        };
        if first.is_negative() {
            col.iter_mut().for_each(|x| *x = -x.clone());
        }
        if seen.insert(col) {
            keep.push(c);
        }
    }
    let a: IntMatrix = a.iter().map(|row| keep.iter().map(|&c| row[c].clone()).collect()).collect();
    let ncols = keep.len();
    if let Some(ker) = left_kernel_modular(&a, ncols) {
        return ker;
    }
    left_kernel_exact(&a, ncols)
}

/// Kernel from pivots chosen modulo a prime, a rational solve, and saturation. Returns `None`
/// when the exact check against all of `a` fails (an unlucky prime).
fn left_kernel_modular(a: &[Vec<BigInt>], ncols: usize) -> Option<IntMatrix> {
    let r = a.len();
    let sel = independent_columns_mod_p(a, ncols);
    let k = sel.len();
    // row j of `at` is column sel[j] of a
    let at: IntMatrix = sel.iter().map(|&c| a.iter().map(|row| row[c].clone()).collect()).collect();
    let prow = independent_columns_mod_p(&at, r);
    if prow.len() != k {
        return None;
    }
    let free: Vec<usize> = (0..r).filter(|i| !prow.contains(i)).collect();
    let d = free.len();
    if d == 0 {
        return Some(Vec::new());
    }
    // solve X·B = −A_F with B = A[prow, sel], via the rows of Bᵀ | −A_Fᵀ
    let mut m: IntMatrix = (0..k)
        .map(|j| {
            let mut row: Vec<BigInt> = prow.iter().map(|&i| at[j][i].clone()).collect();
            row.extend(free.iter().map(|&f| -at[j][f].clone()));
            row
        })
        .collect();
    let det = gauss_jordan_fraction_free(&mut m, k)?;
    // X[f][j] = m[j][k+f] / det, reduced to a common denominator
    let mut g = det.abs();
    for row in &m {
        for x in &row[k..] {
            g = g.gcd(x);
        }
    }
    let sign = if det.is_negative() { -BigInt::one() } else { BigInt::one() };
    let den = det.abs() / &g;
    let num: IntMatrix = (0..d).map(|f| (0..k).map(|j| &m[j][k + f] / &g * &sign).collect()).collect();
    // {y ∈ ℤ^d : y·num ≡ 0 mod den}
    let mut lat = identity(d);
    if !den.is_one() {
        for j in 0..k {
            let col: Vec<BigInt> = num.iter().map(|row| row[j].clone()).collect();
            let v: Vec<BigInt> = lat.iter().map(|b| dot(b, &col).mod_floor(&den)).collect();
            if v.iter().all(|x| x.is_zero()) {
                continue;
            }
            let mut small: IntMatrix = v.iter().map(|x| vec![x.clone()]).collect();
            small.push(vec![den.clone()]);
            let w: IntMatrix = left_kernel_exact(&small, 1).into_iter().map(|row| row[..d].to_vec()).collect();
            lat = hnf(&mat_mul(&w, &lat));
            reduce_mod(&mut lat, &den);
        }
    }
    let ker: IntMatrix = lat
        .iter()
        .map(|y| {
            let mut x = vec![BigInt::zero(); r];
            for (f, yf) in free.iter().zip(y) {
                x[*f] = yf.clone();
            }
            for (j, &i) in prow.iter().enumerate() {
                let col: Vec<BigInt> = num.iter().map(|row| row[j].clone()).collect();
                x[i] = dot(y, &col) / &den;
            }
            x
        })
        .collect();
    let ok = ker.iter().all(|x| (0..ncols).all(|c| x.iter().zip(a).fold(BigInt::zero(), |acc, (xi, row)| acc + xi * &row[c]).is_zero()));
    ok.then(|| hnf(&ker))
}

/// Fraction-free Gauss–Jordan on the first `k` columns of a `k`-row matrix. On success the
/// left block becomes det·I and the right block det·B⁻¹-transformed; returns det.
fn gauss_jordan_fraction_free(m: &mut IntMatrix, k: usize) -> Option<BigInt> {
    let mut prev = BigInt::one();
    for c in 0..k {
        let p = (c..k).find(|&i| !m[i][c].is_zero())?;
        m.swap(c, p);
        let prow = m[c].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == c {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&prow) {
                *x = (&prow[c] * &*x - &f * y) / &prev;
            }
        }
        prev = prow[c].clone();
    }
    Some(prev)
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).fold(BigInt::zero(), |acc, (x, y)| acc + x * y)
}

/// Reduces a full-rank Hermite basis of a lattice containing `q`·ℤ^d so entries stay below `q`.
fn reduce_mod(lat: &mut IntMatrix, q: &BigInt) {
    for row in lat.iter_mut() {
        for x in row.iter_mut() {
            *x = x.mod_floor(q);
        }
    }
    let d = lat.len();
    let mut rows = lat.clone();
    rows.extend((0..d).map(|i| {
        let mut e = vec![BigInt::zero(); d];
        e[i] = q.clone();
        e
    }));
    *lat = hnf(&rows);
}

const MOD_P: u64 = 2_305_843_009_213_693_951; // 2^61 - 1

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % MOD_P as u128) as u64
}

fn powmod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    r
}

/// Greedy set of columns of `a` that are linearly independent modulo 2^61 − 1.
fn independent_columns_mod_p(a: &[Vec<BigInt>], ncols: usize) -> Vec<usize> {
    let p = BigInt::from(MOD_P);
    let r = a.len();
    // reduced basis of chosen columns, each with its pivot row
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut chosen = Vec::new();
    for c in 0..ncols {
        if basis.len() == r {
            break;
        }
        let mut v: Vec<u64> = a.iter().map(|row| row[c].mod_floor(&p).try_into().unwrap()).collect();
        for (piv, b) in &basis {
            let f = v[*piv];
            if f != 0 {
                for (x, y) in v.iter_mut().zip(b) {
                    *x = (*x + MOD_P - mulmod(f, *y)) % MOD_P;
                }
            }
        }
        if let Some(piv) = v.iter().position(|&x| x != 0) {
            let inv = powmod(v[piv], MOD_P - 2);
            v.iter_mut().for_each(|x| *x = mulmod(*x, inv));
            for (_, b) in basis.iter_mut() {
                let f = b[piv];
                if f != 0 {
                    for (x, y) in b.iter_mut().zip(&v) {
                        *x = (*x + MOD_P - mulmod(f, *y)) % MOD_P;
                    }
                }
            }
            basis.push((piv, v));
            chosen.push(c);
        }
    }
    chosen
}

fn left_kernel_exact(a: &[Vec<BigInt>], ncols: usize) -> IntMatrix {
    let r = a.len();
    let mut aug: IntMatrix = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut v = row.clone();
            v.extend((0..r).map(|j| BigInt::from((i == j) as i64)));
            v
        })
        .collect();
    let piv = echelon(&mut aug, ncols);
    let ker: IntMatrix = aug[piv.len()..].iter().map(|row| row[ncols..].to_vec()).collect();
    hnf(&ker)
}

/// Whether `v` lies in the ℤ-span of an echelon basis produced by [`hnf`].
pub fn hnf_contains(basis: &[Vec<BigInt>], v: &[BigInt]) -> bool {
    let mut w = v.to_vec();
    for row in basis {
        let Some(c) = row.iter().position(|x| !x.is_zero()) else {
            continue;
        };
        if w[..c].iter().any(|x| !x.is_zero()) {
            return false;
        }
        if w[c].is_zero() {
            continue;
        }
        let (q, rem) = w[c].div_rem(&row[c]);
        if !rem.is_zero() {
            return false;
        }
        sub_scaled(&mut w, row, &q, c);
    }
    w.iter().all(|x| x.is_zero())
}

/// Absolute value of the index `[ℤ-span(b) : ℤ-span(a)]` for full-rank lattices of equal rank
/// given by Hermite bases, when `a ⊆ b`.
pub fn hnf_index(sub: &[Vec<BigInt>], sup: &[Vec<BigInt>]) -> Option<BigInt> {
    if sub.len() != sup.len() {
        return None;
    }
    let prod = |m: &[Vec<BigInt>]| -> BigInt {
        m.iter()
            .map(|r| r.iter().find(|x| !x.is_zero()).cloned().unwrap_or_default())
            .fold(BigInt::one(), |a, b| a * b)
    };
    let (p, q) = (prod(sub), prod(sup));
    if q.is_zero() || !(&p % &q).is_zero() {
        return None;
    }
    Some(p / q)
}

/// Fraction-free determinant (Bareiss).
pub fn det_int(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(s) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, s);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

/// Reduced row echelon form over ℚ; returns pivot columns.
pub fn rref(rows: &mut RatMatrix, ncols: usize) -> Vec<usize> {
    let n = rows.len();
    let mut r = 0;
    let mut piv = Vec::new();
    for c in 0..ncols {
        if r == n {
            break;
        }
        let Some(s) = (r..n).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, s);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        let prow = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for j in c..ncols.max(row.len()) {
                if !prow[j].is_zero() {
                    row[j] -= &f * &prow[j];
                }
            }
        }
        piv.push(c);
        r += 1;
    }
    piv
}

pub fn rank_q(rows: &[Vec<BigRational>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut m = rows.to_vec();
    let nc = m[0].len();
    rref(&mut m, nc).len()
}

/// Some `c` with `Σ c_i · basis_i = v`, or `None`.
pub fn solve_combination(basis: &[Vec<BigRational>], v: &[BigRational]) -> Option<Vec<BigRational>> {
    let k = basis.len();
    let d = v.len();
    // columns = basis vectors, last column = v
    let mut m: RatMatrix = (0..d)
        .map(|i| {
            let mut row: Vec<BigRational> = basis.iter().map(|b| b[i].clone()).collect();
            row.push(v[i].clone());
            row
        })
        .collect();
    let piv = rref(&mut m, k + 1);
    if piv.last() == Some(&k) {
        return None;
    }
    let mut c = vec![BigRational::zero(); k];
    for (r, &p) in piv.iter().enumerate() {
        c[p] = m[r][k].clone();
    }
    Some(c)
}

/// Smith form data for a relation matrix `R` (rows are relations on `k` generators):
/// returns the diagonal `d` (length `k`, zeros for free directions) and a unimodular
/// `V` with `ℤ^k / rowspace(R) ≅ ⊕ ℤ/d_i` via `x ↦ x·V`.
pub fn smith_column_transform(rel: &[Vec<BigInt>], k: usize) -> (Vec<BigInt>, IntMatrix) {
    let mut a: IntMatrix = rel.to_vec();
    let mut v = identity(k);
    let nr = a.len();
    let mut t = 0;
    while t < k.min(nr) {
        // pick the smallest nonzero entry in the lower-right block
        let mut best: Option<(usize, usize)> = None;
        for i in t..nr {
            for j in t..k {
                if !a[i][j].is_zero()
                    && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        a.swap(t, bi);
        for row in a.iter_mut() {
            row.swap(t, bj);
        }
        for row in v.iter_mut() {
            row.swap(t, bj);
        }
        let mut dirty = false;
        for i in t + 1..nr {
            if !a[i][t].is_zero() {
                let q = a[i][t].div_floor(&a[t][t]);
                let prow = a[t].clone();
                sub_scaled(&mut a[i], &prow, &q, 0);
                if !a[i][t].is_zero() {
                    dirty = true;
                }
            }
        }
        for j in t + 1..k {
            if !a[t][j].is_zero() {
                let q = a[t][j].div_floor(&a[t][t]);
                for row in a.iter_mut() {
                    let s = &q * &row[t];
                    row[j] -= s;
                }
                for row in v.iter_mut() {
                    let s = &q * &row[t];
                    row[j] -= s;
                }
                if !a[t][j].is_zero() {
                    dirty = true;
                }
            }
        }
        if dirty {
            continue;
        }
        // divisibility condition on the remaining block
        let piv = a[t][t].clone();
        let mut fix = None;
        'outer: for i in t + 1..nr {
            for j in t + 1..k {
                if !(&a[i][j] % &piv).is_zero() {
                    fix = Some(i);
                    break 'outer;
                }
            }
        }
        if let Some(i) = fix {
            let row = a[i].clone();
            for (x, y) in a[t].iter_mut().zip(row.iter()) {
                *x += y;
            }
            continue;
        }
        t += 1;
    }
    let mut d = vec![BigInt::zero(); k];
    for (i, di) in d.iter_mut().enumerate().take(k.min(nr)) {
        *di = a[i][i].abs();
    }
    (d, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(rows: &[Vec<i64>]) -> IntMatrix {
        int_matrix(rows)
    }

    #[test]
    fn hnf_of_simple_lattice() {
        let h = hnf(&bi(&[vec![2, 4], vec![3, 5]]));
        assert_eq!(h, bi(&[vec![1, 1], vec![0, 2]]));
    }

    #[test]
    fn kernel_is_saturated() {
        let a = bi(&[vec![2], vec![4], vec![6]]);
        let k = left_kernel(&a, 1);
        assert_eq!(k.len(), 2);
        for row in &k {
            let s: BigInt = row.iter().zip(a.iter()).map(|(x, r)| x * &r[0]).sum();
            assert!(s.is_zero());
        }
        // (2,-1,0) must be in the kernel lattice, and (1, 0, ...) combos like (-2,1,0)
        assert!(hnf_contains(&k, &[BigInt::from(2), BigInt::from(-1), BigInt::from(0)]));
        assert!(hnf_contains(&k, &[BigInt::from(1), BigInt::from(1), BigInt::from(-1)]));
    }

    #[test]
    fn bareiss_matches_cofactor() {
        let m = bi(&[vec![2, 1, 3], vec![0, -1, 4], vec![5, 2, 1]]);
        // 2(-1-8) - 1(0-20) + 3(0+5) = -18 + 20 + 15
        assert_eq!(det_int(&m), BigInt::from(17));
    }

    #[test]
    fn smith_of_cyclic_product() {
        let (d, v) = smith_column_transform(&bi(&[vec![2, 0], vec![0, 3]]), 2);
        let mut ds: Vec<i64> = d.iter().map(|x| i64::try_from(x).unwrap()).collect();
        ds.sort();
        assert_eq!(ds, vec![1, 6]);
        assert_eq!(det_int(&v).abs(), BigInt::one());
    }
}
