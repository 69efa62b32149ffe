//! Acceptance suite: one PASS/FAIL line per criterion on stderr, then a single assertion.
//!
//! Pinned tolerances: every check is exact except criterion 2, which compares 128-bit
//! interval enclosures (intersection of balls).

use std::io::Write;
use std::time::Instant;

use euler_workbench::arith::{prime_power, primes_up_to};
use euler_workbench::circdist::*;
use euler_workbench::eulersys::*;
use euler_workbench::field::{enumerate_fields, AbelianField};
use euler_workbench::groupring::{FiniteAbelianGroup, IntGroupRing, RatGroupRing};
use euler_workbench::iwasawa::*;
use euler_workbench::lattice::{check_lemma_a, fitting_ideal, GLattice};
use euler_workbench::report::CheckReport;
use euler_workbench::Result;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const RS_BITS: u32 = 128;
const SEED: u64 = 20_240_601;

struct Outcome {
    passed: bool,
    detail: String,
}

fn tally(reports: &[CheckReport]) -> (usize, usize) {
    (reports.len(), reports.iter().filter(|r| !r.passed).count())
}

fn first_failure(reports: &[CheckReport]) -> String {
    reports
        .iter()
        .find(|r| !r.passed)
        .map(|r| format!("; first failure {}: {}", r.subject, r.witness))
        .unwrap_or_default()
}

fn criterion_1() -> Result<Outcome> {
    let s = rubin_stark_system(120)?;
    let reports = check_all_distributions(&s)?;
    let (n, fails) = tally(&reports);
    let cross = reports.iter().filter(|r| r.witness["case"] == "rank 1 / rank 0").count();
    Ok(Outcome {
        passed: fails == 0 && n == s.nested_pairs().len() && cross > 0,
        detail: format!(
            "{n} nested pairs over {} fields of conductor ≤ 120 ({cross} cross-rank), {fails} failures, exact{}",
            s.entries().len(),
            first_failure(&reports)
        ),
    })
}

fn criterion_2() -> Result<Outcome> {
    let fields: Vec<AbelianField> = enumerate_fields(50).into_iter().filter(|e| e.is_real()).collect();
    let reports: Vec<CheckReport> = fields.par_iter().map(|e| check_rubin_stark_identity(e, RS_BITS)).collect::<Result<_>>()?;
    let (n, fails) = tally(&reports);
    let runs: usize = reports.iter().map(|r| r.witness["runs"].as_array().map_or(0, |a| a.len())).sum();
    let all_oracles = reports.iter().all(|r| {
        let runs = r.witness["runs"].as_array().cloned().unwrap_or_default();
        ["LogSine", "Hurwitz"].iter().all(|o| runs.iter().any(|x| x["oracle"] == *o))
    });
    let vacuous = reports.iter().filter(|r| r.witness["vacuous_second_choice"] == true).count();
    Ok(Outcome {
        passed: fails == 0 && all_oracles,
        detail: format!(
            "{n} real fields of conductor ≤ 50, {runs} (oracle, 𝔭-choice) runs, {vacuous} with a single 𝔭-choice, {fails} failures, {RS_BITS}-bit balls{}",
            first_failure(&reports)
        ),
    })
}

fn t_sets(e: &AbelianField) -> Vec<Vec<u64>> {
    let ok: Vec<u64> = [3u64, 5, 7, 11, 13].into_iter().filter(|&l| check_admissible(e, &[l]).is_ok()).collect();
    let mut out: Vec<Vec<u64>> = ok.iter().map(|&l| vec![l]).collect();
    for (i, &a) in ok.iter().enumerate() {
        for &b in &ok[i + 1..] {
            out.push(vec![a, b]);
        }
    }
    out
}

fn criterion_3() -> Result<Outcome> {
    let fields: Vec<AbelianField> = enumerate_fields(100).into_iter().filter(|e| !e.is_real()).collect();
    let per_field: Vec<(usize, usize, Option<String>)> = fields
        .par_iter()
        .map(|e| {
            let ts = t_sets(e);
            let r = check_rubin_lattice(&rubin_stark_element(e)?, &ts)?;
            let outcomes = r.witness["outcomes"].as_array().cloned().unwrap_or_default();
            let bad: Vec<_> = outcomes.iter().filter(|o| o["over_Z"] != true).collect();
            let first = bad.first().map(|o| format!("{} T = {}", e.label(), o["T"]));
            Ok((outcomes.len(), bad.len(), first))
        })
        .collect::<Result<_>>()?;
    let checks: usize = per_field.iter().map(|x| x.0).sum();
    let fails: usize = per_field.iter().map(|x| x.1).sum();
    let first = per_field.iter().find_map(|x| x.2.clone()).map(|s| format!("; first failure {s}")).unwrap_or_default();
    Ok(Outcome {
        passed: fails == 0 && checks > 0,
        detail: format!("{} complex fields of conductor ≤ 100, {checks} (E, T) pairs, {fails} non-integral, exact{first}", fields.len()),
    })
}

fn criterion_4() -> Result<Outcome> {
    let s = rubin_stark_system(128)?;
    let fields: Vec<&AbelianField> = s.entries().iter().map(|c| c.field()).filter(|e| prime_power(e.conductor()).is_some()).collect();
    let reports: Vec<CheckReport> = fields.par_iter().map(|e| check_initial_value(&s, e)).collect::<Result<_>>()?;
    let (n, fails) = tally(&reports);
    let plus = fields.iter().filter(|e| e.is_real() && **e == &AbelianField::real_cyclotomic(e.conductor()).unwrap()).count();
    Ok(Outcome {
        passed: fails == 0,
        detail: format!("{n} fields of prime-power conductor ≤ 128 ({plus} maximal real subfields ℚ(pᵃ)⁺), {fails} failures, exact{}", first_failure(&reports)),
    })
}

fn criterion_5() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let groups = [
        FiniteAbelianGroup::cyclic(2),
        FiniteAbelianGroup::cyclic(3),
        FiniteAbelianGroup::cyclic(4),
        FiniteAbelianGroup::new(vec![2, 2])?,
        FiniteAbelianGroup::cyclic(5),
        FiniteAbelianGroup::cyclic(6),
    ];
    let mut fails = Vec::new();
    for trial in 0..100 {
        let g = &groups[trial % groups.len()];
        let m = GLattice::random(&mut rng, g, 12);
        let h = rng.gen_range(1..g.order());
        let s = rng.gen_range(0..=2);
        if !check_lemma_a(&m, &[h], s)?.isomorphic {
            fails.push(format!("trial {trial}: |G| = {}, rank {}, h = {h}, s = {s}", g.order(), m.rank()));
        }
    }
    Ok(Outcome {
        passed: fails.is_empty(),
        detail: format!("100 seeded lattices (seed {SEED}), |G| ≤ 6, ℤ[G]-rank ≤ 3, s ≤ 2, {} failures, exact{}", fails.len(), fails.first().map(|f| format!("; {f}")).unwrap_or_default()),
    })
}

fn criterion_6() -> Result<Outcome> {
    let f = phi(400)?;
    let pairs: Vec<(u64, u64)> = (2..=400u64).flat_map(|n| (1..=400 / n).map(move |a| (a, n))).collect();
    let axiom: Vec<bool> = pairs.par_iter().map(|&(a, n)| check_distribution_axiom(&f, a, n)).collect::<Result<_>>()?;
    let axiom_fails = axiom.iter().filter(|x| !**x).count();
    let strict_range: Vec<(u64, u64)> = primes_up_to(13)
        .into_iter()
        .flat_map(|l| (2..=30u64).filter(move |n| n % l != 0).map(move |n| (n, l)))
        .collect();
    let d_odd = delta(&OddPrimes::All, 400)?;
    let phi_strict: Vec<CheckReport> = strict_range.par_iter().map(|&(n, l)| check_strict(&f, n, l)).collect::<Result<_>>()?;
    let odd_strict: Vec<CheckReport> = strict_range.par_iter().map(|&(n, l)| check_strict(&d_odd, n, l)).collect::<Result<_>>()?;
    let d3 = delta(&OddPrimes::Finite([3].into()), 15)?;
    let witness = check_strict(&d3, 3, 5)?;
    let (ns, pf) = tally(&phi_strict);
    let (_, of) = tally(&odd_strict);
    Ok(Outcome {
        passed: axiom_fails == 0 && pf == 0 && of == 0 && !witness.passed,
        detail: format!(
            "Φ axiom on {} pairs (a, n) with na ≤ 400: {axiom_fails} failures; strictness on {ns} pairs (n ≤ 30, ℓ ≤ 13): Φ {pf} failures, δ_odd {of} failures; δ_{{3}} counterexample at n = 3, ℓ = 5: {}",
            pairs.len(),
            witness.witness
        ),
    })
}

fn criterion_7() -> Result<Outcome> {
    let coleman = check_coleman_correspondence(5, 120)?;
    let (nc, cf) = tally(&coleman);
    let a = 127;
    let f = apply_exponent(&phi(120)?, &ExponentFamily::sigma(a, 120)?)?;
    let half = BigRational::new(1.into(), 2.into());
    let slice = EulerSystemSlice::from_fn(120, |k| {
        let c = euler_value(&f, k)?;
        Ok(c.scale(&RatGroupRing::one(k.galois_group()).scale(&half)))
    })?;
    let fields: Vec<AbelianField> = enumerate_fields(120).into_iter().filter(|e| e.is_real() && e.conductor() >= 5).collect();
    let mismatches: Vec<String> = fields
        .par_iter()
        .map(|e| {
            let r = check_scarcity_at_level(&slice, e)?;
            let g = e.galois_group();
            let expect = RatGroupRing::basis(g, e.class_of(a as i64)?, BigRational::one()).mul(&support_idempotent(e));
            let got = r.witness["q"].as_str().map(|q| RatGroupRing::parse(g, q)).transpose()?;
            Ok((r.passed && got.as_ref() == Some(&expect)).then_some(String::new()).unwrap_or_else(|| e.label()))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|s| !s.is_empty())
        .collect();
    Ok(Outcome {
        passed: cf == 0 && nc > 0 && mismatches.is_empty(),
        detail: format!(
            "c_Φ² = ε⁴ on {nc} real fields of conductor 5..120: {cf} failures; q = σ_{a}·e_E recovered from ½ ⊗ c_{{Φ^σ_{a}}} on {} fields: {} mismatches, exact{}",
            fields.len(),
            mismatches.len(),
            mismatches.first().map(|m| format!("; first {m}")).unwrap_or_default()
        ),
    })
}

fn criterion_8() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut prep_fails = 0;
    for i in 0..200 {
        let p = [3u64, 5, 7][i % 3];
        let f = ZpPowerSeries::random(&mut rng, p, 20, 30)?;
        let w = weierstrass_prep(&f)?;
        let ok = w.recombine(20)? == f && w.unit.is_unit() && (w.lambda() == 0 || is_distinguished(&w.distinguished, p));
        prep_fails += usize::from(!ok);
    }
    let mut order_fails = 0;
    for p in [3u64, 5, 7] {
        for m in 1..=5u32 {
            for n in 1..=5u32 {
                let mut tm = vec![BigInt::zero(); m as usize];
                tm.push(BigInt::one());
                let h = fn_family(&[BigInt::zero(), BigInt::one()], p, n)?;
                order_fails += usize::from(quotient_order(&tm, &h, p)? != QuotientOrder::Finite(n * m));
            }
        }
    }
    let mut lemma_fails = 0;
    let mut brute_checked = 0;
    let mut specs = 0;
    while specs < 50 {
        let p = [3u64, 5, 7][specs % 3];
        let spec = ElementaryModuleSpec::random(&mut rng, p)?;
        let f: Vec<BigInt> = if rng.gen_bool(0.3) {
            vec![BigInt::from(p)]
        } else {
            vec![BigInt::from(p as i64 * rng.gen_range(-2i64..=2)), BigInt::one()]
        };
        let n = rng.gen_range(1..=5);
        let Ok(r) = check_orders_lemma(&spec, &f, n) else { continue };
        specs += 1;
        let mut ok = r.passed;
        if p == 3 {
            let fnp = fn_family(&f, p, n)?;
            let summands = r.witness["summand_orders"].as_array().cloned().unwrap_or_default();
            for ((g, m), k) in spec.summands().iter().zip(summands) {
                if let Ok(b) = brute_force_quotient_order(&fnp, &poly_pow(g, *m), p) {
                    brute_checked += 1;
                    ok &= b == QuotientOrder::Finite(k.as_u64().unwrap_or(u64::MAX) as u32);
                }
            }
        }
        lemma_fails += usize::from(!ok);
    }
    Ok(Outcome {
        passed: prep_fails == 0 && order_fails == 0 && lemma_fails == 0,
        detail: format!(
            "Weierstrass round trip on 200 series at (p²⁰, T³⁰): {prep_fails} failures; quotient_order(Tᵐ, T+pⁿ) = nm for m, n ≤ 5, p ∈ {{3,5,7}}: {order_fails} failures; orders lemma on 50 seeded specs ({brute_checked} summand orders cross-checked by enumeration): {lemma_fails} failures"
        ),
    })
}

fn random_element<R: Rng>(rng: &mut R, g: &FiniteAbelianGroup) -> IntGroupRing {
    let c = (0..g.order()).map(|_| BigInt::from(rng.gen_range(-2i64..=2))).collect();
    IntGroupRing::from_coeffs(g, c).expect("length matches")
}

/// One random row or column operation on a presentation (rows = generators, columns = relations).
fn elementary_move<R: Rng>(rng: &mut R, g: &FiniteAbelianGroup, pres: &mut [Vec<IntGroupRing>]) {
    let (rows, cols) = (pres.len(), pres[0].len());
    match rng.gen_range(0..4) {
        0 if cols > 1 => {
            let (i, j) = (rng.gen_range(0..cols), rng.gen_range(0..cols));
            if i != j {
                let r = random_element(rng, g);
                for row in pres.iter_mut() {
                    row[j] = row[j].add(&row[i].mul(&r));
                }
            }
        }
        1 if rows > 1 => {
            let (i, j) = (rng.gen_range(0..rows), rng.gen_range(0..rows));
            if i != j {
                let r = random_element(rng, g);
                let src = pres[i].clone();
                for (x, y) in pres[j].iter_mut().zip(&src) {
                    *x = x.add(&y.mul(&r));
                }
            }
        }
        2 => {
            let u = IntGroupRing::basis(g, rng.gen_range(0..g.order()), BigInt::from(if rng.gen_bool(0.5) { 1 } else { -1 }));
            let j = rng.gen_range(0..cols);
            for row in pres.iter_mut() {
                row[j] = row[j].mul(&u);
            }
        }
        _ => {
            let (i, j) = (rng.gen_range(0..cols), rng.gen_range(0..cols));
            for row in pres.iter_mut() {
                row.swap(i, j);
            }
        }
    }
}

fn criterion_9() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let groups = [FiniteAbelianGroup::cyclic(2), FiniteAbelianGroup::cyclic(3), FiniteAbelianGroup::new(vec![2, 2])?, FiniteAbelianGroup::cyclic(4)];
    let mut move_fails = 0;
    for t in 0..100 {
        let g = &groups[t % groups.len()];
        let mut pres: Vec<Vec<IntGroupRing>> = (0..2).map(|_| (0..3).map(|_| random_element(&mut rng, g)).collect()).collect();
        let before = fitting_ideal(g, &pres, 2, None)?;
        elementary_move(&mut rng, g, &mut pres);
        move_fails += usize::from(fitting_ideal(g, &pres, 2, None)? != before);
    }
    let mut mult_fails = 0;
    for t in 0..20 {
        let g = &groups[t % groups.len()];
        let xs: Vec<IntGroupRing> = (0..3).map(|_| random_element(&mut rng, g)).collect();
        let zero = IntGroupRing::zero(g);
        let diag: Vec<Vec<IntGroupRing>> = (0..3).map(|i| (0..3).map(|j| if i == j { xs[i].clone() } else { zero.clone() }).collect()).collect();
        let f = fitting_ideal(g, &diag, 3, None)?;
        let product = xs.iter().map(|x| fitting_ideal(g, &[vec![x.clone()]], 1, None)).collect::<Result<Vec<_>>>()?;
        let expect = product[1..].iter().fold(product[0].clone(), |acc, x| acc.mul(x));
        mult_fails += usize::from(f != expect);
    }
    let mut free_fails = 0;
    for g in &groups {
        for n in 1..=3 {
            let empty: Vec<Vec<IntGroupRing>> = vec![Vec::new(); n];
            let zeros: Vec<Vec<IntGroupRing>> = vec![vec![IntGroupRing::zero(g); 2]; n];
            free_fails += usize::from(!fitting_ideal(g, &empty, n, None)?.is_zero());
            free_fails += usize::from(!fitting_ideal(g, &zeros, n, None)?.is_zero());
        }
    }
    Ok(Outcome {
        passed: move_fails == 0 && mult_fails == 0 && free_fails == 0,
        detail: format!(
            "invariance under 100 random elementary moves: {move_fails} failures; multiplicativity on 20 cyclic direct sums: {mult_fails} failures; free presentations give 0: {free_fails} failures; exact"
        ),
    })
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Result<Outcome>); 9] = [
        ("distribution relations", criterion_1),
        ("Rubin–Stark identity", criterion_2),
        ("Stickelberger integrality", criterion_3),
        ("initial value condition", criterion_4),
        ("bidual injection lemma", criterion_5),
        ("circular distributions", criterion_6),
        ("Coleman correspondence and scarcity", criterion_7),
        ("Iwasawa suite", criterion_8),
        ("Fitting-ideal plumbing", criterion_9),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = run().unwrap_or_else(|e| Outcome { passed: false, detail: format!("error: {e}") });
        let line = format!(
            "criterion {} {} {name}: {} [{:.1}s]\n",
            i + 1,
            if outcome.passed { "PASS" } else { "FAIL" },
            outcome.detail,
            t.elapsed().as_secs_f64()
        );
        // written directly so the lines survive the test harness's output capture
        let _ = std::io::stderr().write_all(line.as_bytes());
        if !outcome.passed {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
