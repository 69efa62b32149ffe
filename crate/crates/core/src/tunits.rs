//! T-congruence conditions on cyclotomic units: reduction modulo primes above ℓ ∤ m and
//! discrete logarithms in the residue fields.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::arith::{factorize, gcd, lcm, mod_inv};
use crate::cyclotomic::{coset_representatives, lift_residue, CycElement};
use crate::error::{Error, Result};
use crate::field::AbelianField;
use crate::linalg::{hnf, identity, left_kernel, IntMatrix};
use crate::poly::{cyclotomic_factors_mod, FpPoly};

/// Largest prime factor of a residue-field group order handled by baby-step giant-step.
pub const MAX_DLOG_PRIME: u64 = 1_000_000_000_000;

/// ℤ[ζ_level]/𝔏 for the prime 𝔏 = (ℓ, g(ζ)) with g the first factor of Φ_level mod ℓ.
#[derive(Clone, Debug)]
pub struct ResidueField {
    ell: u64,
    level: u64,
    modulus: FpPoly,
}

impl ResidueField {
    pub fn new(level: u64, ell: u64) -> Result<Self> {
        if level % ell == 0 {
            return Err(Error::InvalidArgument(format!("{ell} divides the level {level}")));
        }
        let g = cyclotomic_factors_mod(level, ell)
            .into_iter()
            .next()
            .ok_or_else(|| Error::InvalidArgument("empty factorization".into()))?;
        Ok(ResidueField { ell, level, modulus: g })
    }

    pub fn degree(&self) -> usize {
        self.modulus.degree().unwrap_or(0)
    }

    fn one(&self) -> FpPoly {
        FpPoly::new(self.ell, vec![1])
    }

    fn zeta_pow(&self, k: u64) -> FpPoly {
        FpPoly::new(self.ell, vec![0, 1]).powmod(k as u128, &self.modulus)
    }

    fn mul(&self, a: &FpPoly, b: &FpPoly) -> FpPoly {
        a.mul(b).rem(&self.modulus)
    }

    fn pow(&self, a: &FpPoly, e: u128) -> FpPoly {
        a.powmod(e, &self.modulus)
    }

    /// σ_a(x) mod 𝔏 for a product-form x of level dividing the field level.
    pub fn reduce(&self, x: &CycElement, a: u64) -> Result<FpPoly> {
        let CycElement::Product { level, scalar, terms } = x else {
            return Err(Error::Precondition("reduction needs a product-form element".into()));
        };
        if self.level % level != 0 {
            return Err(Error::InvalidArgument(format!("level {level} does not divide {}", self.level)));
        }
        let step = self.level / level;
        let mut num = self.one();
        let mut den = self.one();
        for (&k, &e) in terms {
            let j = k * step % self.level * (a % self.level) % self.level;
            let f = self.one().sub(&self.zeta_pow(j));
            if f.is_zero() {
                return Err(Error::InvalidArgument(format!("1 − ζ^{j} vanishes modulo a prime above {}", self.ell)));
            }
            let fe = self.pow(&f, e.unsigned_abs() as u128);
            if e > 0 {
                num = self.mul(&num, &fe);
            } else {
                den = self.mul(&den, &fe);
            }
        }
        let l = BigInt::from(self.ell);
        let (n, d) = (scalar.numer() % &l, scalar.denom() % &l);
        if n.is_zero() || d.is_zero() {
            return Err(Error::InvalidArgument(format!("{} is not an {}-unit", scalar, self.ell)));
        }
        let to_fp = |v: BigInt| ((v % &l + &l) % &l).to_u64().unwrap();
        num = self.mul(&num, &FpPoly::new(self.ell, vec![to_fp(n)]));
        den = self.mul(&den, &FpPoly::new(self.ell, vec![to_fp(d)]));
        // den^{-1} = den^{q−2}
        let q = (self.ell as u128).pow(self.degree() as u32);
        Ok(self.mul(&num, &self.pow(&den, q - 2)))
    }

    /// Order of y in a group whose order divides `r^e`.
    fn order_in_p_group(&self, y: &FpPoly, r: u64, e: u32) -> u32 {
        let one = self.one();
        let mut z = y.clone();
        for j in 0..=e {
            if z == one {
                return j;
            }
            z = self.pow(&z, r as u128);
        }
        e
    }

    /// d with γ^d = h, γ of prime order r.
    fn bsgs(&self, gamma: &FpPoly, h: &FpPoly, r: u64) -> Result<u64> {
        if r > MAX_DLOG_PRIME {
            return Err(Error::ResourceGuard(format!("discrete logarithm in a group of prime order {r}")));
        }
        let m = (r as f64).sqrt().ceil() as u64 + 1;
        let mut baby: HashMap<Vec<u64>, u64> = HashMap::new();
        let mut cur = self.one();
        for j in 0..m {
            baby.entry(cur.c.clone()).or_insert(j);
            cur = self.mul(&cur, gamma);
        }
        // γ^{-m}
        let step = self.pow(gamma, ((r - m % r) % r) as u128);
        let mut y = h.clone();
        for i in 0..=m {
            if let Some(&j) = baby.get(&y.c) {
                return Ok((i * m + j) % r);
            }
            y = self.mul(&y, &step);
        }
        Err(Error::OracleDisagreement("element outside the cyclic subgroup".into()))
    }

    /// log_z(y) for z of order r^e and y ∈ ⟨z⟩ (Pohlig–Hellman).
    fn dlog_p_group(&self, z: &FpPoly, y: &FpPoly, r: u64, e: u32) -> Result<u128> {
        if e == 0 {
            return Ok(0);
        }
        let re = (r as u128).pow(e);
        let gamma = self.pow(z, (r as u128).pow(e - 1));
        let z_inv = self.pow(z, re - 1);
        let mut x: u128 = 0;
        let mut rk: u128 = 1;
        for k in 0..e {
            let t = self.mul(y, &self.pow(&z_inv, x));
            let h = self.pow(&t, (r as u128).pow(e - 1 - k));
            let d = self.bsgs(&gamma, &h, r)?;
            x += d as u128 * rk;
            rk *= r as u128;
        }
        Ok(x % re)
    }
}

/// A congruence Σ a_i x_i ≡ 0 (mod n) on integer vectors.
struct Congruence {
    coeffs: Vec<BigInt>,
    modulus: BigInt,
}

/// Integer vectors x with every congruence satisfied, as a Hermite basis.
fn congruence_lattice(n: usize, conds: &[Congruence]) -> IntMatrix {
    if conds.is_empty() {
        return identity(n);
    }
    let c = conds.len();
    let mut rows: IntMatrix = (0..n).map(|i| conds.iter().map(|k| k.coeffs[i].clone()).collect()).collect();
    for (j, k) in conds.iter().enumerate() {
        let mut r = vec![BigInt::zero(); c];
        r[j] = k.modulus.clone();
        rows.push(r);
    }
    let ker = left_kernel(&rows, c);
    hnf(&ker.into_iter().map(|v| v[..n].to_vec()).collect::<Vec<_>>())
}

/// The exponent vectors x with ∏ gens_k^{x_k} ≡ 1 modulo every prime above every ℓ ∈ T, up to
/// one global sign ±1 (the elements lie in the real field E, so only ±1 is torsion).
///
/// `gens` are product-form elements of E. Sign ambiguity is resolved by an auxiliary unknown s:
/// at each prime, the 2-part condition reads log ≡ s·2^{e−1}.
pub fn t_congruence_lattice(e: &AbelianField, gens: &[CycElement], t: &[u64]) -> Result<IntMatrix> {
    let ng = gens.len();
    let level = gens.iter().fold(e.conductor(), |acc, x| lcm(acc, x.level()));
    let g = e.galois_group();
    let mut conds: Vec<Congruence> = Vec::new();
    let nv = ng + 1;
    for &ell in t {
        if ell == 2 || level % ell == 0 {
            return Err(Error::InvalidArgument(format!("{ell} is not admissible here")));
        }
        let rf = ResidueField::new(level, ell)?;
        let f_e = g.elem_order(e.frobenius(ell)?) as u32;
        let big_n = (ell as u128)
            .checked_pow(f_e)
            .filter(|&q| q < (1u128 << 63))
            .ok_or_else(|| Error::ResourceGuard(format!("residue field of size {ell}^{f_e}")))?
            - 1;
        let fac = factorize(big_n as u64);
        let d = e.decomposition_group(ell);
        for (tau, _) in coset_representatives(e, &d) {
            let r = lift_residue(e.representative(tau), e.conductor(), level);
            let a = mod_inv(r, level).expect("unit residue");
            debug_assert_eq!(gcd(a, level), 1);
            let ys: Vec<FpPoly> = gens.iter().map(|x| rf.reduce(x, a)).collect::<Result<_>>()?;
            for y in &ys {
                if rf.pow(y, big_n) != rf.one() {
                    return Err(Error::Precondition(format!("generator does not reduce into the residue field of E at {ell}")));
                }
            }
            for &(p, ex) in &fac {
                let cof = big_n / (p as u128).pow(ex);
                let proj: Vec<FpPoly> = ys.iter().map(|y| rf.pow(y, cof)).collect();
                let orders: Vec<u32> = proj.iter().map(|y| rf.order_in_p_group(y, p, ex)).collect();
                let (best, &emax) = orders.iter().enumerate().max_by_key(|(_, &o)| o).unwrap_or((0, &0));
                let mut coeffs = vec![BigInt::zero(); nv];
                if emax > 0 {
                    for (k, y) in proj.iter().enumerate() {
                        coeffs[k] = BigInt::from(rf.dlog_p_group(&proj[best], y, p, emax)?);
                    }
                }
                let modulus = BigInt::from((p as u128).pow(emax));
                if p == 2 {
                    if emax == 0 {
                        let mut c = vec![BigInt::zero(); nv];
                        c[ng] = BigInt::from(1);
                        conds.push(Congruence { coeffs: c, modulus: BigInt::from(2) });
                        continue;
                    }
                    coeffs[ng] = -BigInt::from(1u64 << (emax - 1));
                }
                if emax > 0 {
                    conds.push(Congruence { coeffs, modulus });
                }
            }
        }
    }
    let full = congruence_lattice(nv, &conds);
    Ok(hnf(&full.into_iter().map(|v| v[..ng].to_vec()).collect::<Vec<_>>()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_matches_direct_arithmetic() {
        // ℤ[ζ_4]/(3) = F_9; (1 − i)(1 + i) = 2
        let rf = ResidueField::new(4, 3).unwrap();
        let x = CycElement::one_minus_zeta(4, 1).unwrap();
        let y = CycElement::one_minus_zeta(4, 3).unwrap();
        let p = rf.mul(&rf.reduce(&x, 1).unwrap(), &rf.reduce(&y, 1).unwrap());
        assert_eq!(p, FpPoly::new(3, vec![2]));
    }

    #[test]
    fn dlog_round_trip() {
        let rf = ResidueField::new(5, 11).unwrap();
        assert_eq!(rf.degree(), 1);
        // F_11^×: 2 is a generator of order 10; work in the 5-part
        let z = rf.pow(&FpPoly::new(11, vec![2]), 2);
        for k in 0..5u128 {
            let y = rf.pow(&z, k);
            assert_eq!(rf.dlog_p_group(&z, &y, 5, 1).unwrap(), k);
        }
    }

    #[test]
    fn golden_ratio_congruences() {
        // η = (1 − ζ_5)(1 − ζ_5^4) ∈ ℚ(√5); 11 splits, so both primes above it are checked
        let e = AbelianField::real_cyclotomic(5).unwrap();
        let eta = CycElement::one_minus_zeta(5, 1).unwrap().relative_norm(&e, None).unwrap();
        let lat = t_congruence_lattice(&e, &[eta.clone()], &[11]).unwrap();
        assert_eq!(lat.len(), 1);
        let k = lat[0][0].to_u64().unwrap();
        assert!(k > 0);
        let rf = ResidueField::new(5, 11).unwrap();
        let vals: Vec<FpPoly> = [1, 2].iter().map(|&a| rf.pow(&rf.reduce(&eta, a).unwrap(), k as u128)).collect();
        assert!(vals[0] == rf.one() || vals[0] == FpPoly::new(11, vec![10]));
        assert_eq!(vals[0], vals[1]);
        // no proper divisor of k works
        for j in 1..k {
            let v: Vec<FpPoly> = [1, 2].iter().map(|&a| rf.pow(&rf.reduce(&eta, a).unwrap(), j as u128)).collect();
            let ok = (v[0] == rf.one() || v[0] == FpPoly::new(11, vec![10])) && v[0] == v[1];
            assert!(!ok, "exponent {j} already satisfies the congruence");
        }
    }
}
