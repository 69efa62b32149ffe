//! Command-line orchestration of the verification suites.

pub mod cache;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use euler_workbench::arith::{gcd, prime_power};
use euler_workbench::circdist::{self, CircularDistribution, ExponentFamily, OddPrimes};
use euler_workbench::eulersys::{self, EulerSystemSlice};
use euler_workbench::field::{enumerate_fields, AbelianField};
use euler_workbench::groupring::FiniteAbelianGroup;
use euler_workbench::iwasawa::{self, ElementaryModuleSpec, QuotientOrder, ZpPowerSeries};
use euler_workbench::lattice::{check_lemma_a, GLattice};
use euler_workbench::report::CheckReport;
use euler_workbench::Error;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use cache::Cache;

pub const SCHEMA: u64 = 1;
pub const EMBEDDING: &str = "ξ_n = exp(2πi/n); σ_a acts by ξ_n ↦ ξ_n^a";

#[derive(Parser, Debug)]
#[command(name = "euler-workbench", version, about = "Verify the cyclotomic-unit and Stickelberger Euler systems over ℚ")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Report path (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Cache directory (default: $EULER_WORKBENCH_CACHE, then the user cache directory).
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Disable the result cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Distribution relations on every nested pair of fields of conductor ≤ M.
    Distribution {
        #[arg(long)]
        max_conductor: u64,
    },
    /// Rubin–Stark regulator identity on the real fields of conductor m.
    RubinStark {
        #[arg(long)]
        conductor: u64,
        #[arg(long, default_value_t = 128)]
        bits: u32,
    },
    /// δ_T·θ integrality on complex fields of conductor ≤ M.
    Stickelberger {
        #[arg(long)]
        max_conductor: u64,
        /// Primes of T; primes that ramify or divide |μ_E| are dropped per field.
        #[arg(long = "T", value_delimiter = ',', required = true)]
        t: Vec<u64>,
    },
    /// Initial value condition on fields of prime-power conductor ≤ M.
    InitialValue {
        #[arg(long)]
        max_prime_power: u64,
    },
    /// Bidual injection lemma on seeded random lattices.
    LatticeLemma {
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Distribution axiom and strictness of a circular distribution.
    Circular(CircularArgs),
    /// Λ = ℤ_p⟦T⟧ suites.
    Iwasawa {
        #[arg(long, value_enum)]
        suite: IwasawaSuite,
        #[arg(long, default_value_t = 5)]
        p: u64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Solve c_E = q·ε_E on the real fields of conductor m of a stored slice.
    Scarcity {
        #[arg(long)]
        conductor: u64,
        #[arg(long)]
        input: PathBuf,
    },
    /// Write an Euler system slice as JSON.
    Slice {
        #[arg(long, value_enum)]
        system: SliceKind,
        #[arg(long)]
        max_conductor: u64,
        /// Exponent a of Φ^{σ_a} (for `--system phi`); must be prime to every conductor.
        #[arg(long)]
        sigma: Option<u64>,
        /// Multiply every entry by ½ (for scarcity inputs).
        #[arg(long)]
        half: bool,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false, id = "source")]
pub struct CircularSource {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub builtin: Option<Builtin>,
}

#[derive(Args, Debug)]
pub struct CircularArgs {
    #[command(flatten)]
    pub source: CircularSource,
    #[arg(long)]
    pub max_level: u64,
    /// Prime ℓ for the strictness check.
    #[arg(long)]
    pub strict_l: Option<u64>,
    /// Π for `--builtin delta`: comma-separated odd primes, or `odd`.
    #[arg(long, default_value = "odd")]
    pub pi: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Builtin {
    Phi,
    Delta,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum IwasawaSuite {
    Prep,
    Orders,
    Lemma,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SliceKind {
    RubinStark,
    Phi,
}

/// A usage or resource failure (exit 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl From<Error> for UsageError {
    fn from(e: Error) -> Self {
        UsageError(e.to_string())
    }
}

impl From<std::io::Error> for UsageError {
    fn from(e: std::io::Error) -> Self {
        UsageError(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, UsageError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(UsageError(msg.into()))
}

/// One work item of a suite: stable id, cache parameters and the computation.
struct Item<F> {
    id: String,
    params: Value,
    run: F,
}

struct Runner {
    cache: Option<Cache>,
}

impl Runner {
    /// Runs items in parallel, in input order, consulting the cache per item.
    fn run<F>(&self, operation: &str, items: Vec<Item<F>>) -> CliResult<Vec<Value>>
    where
        F: Fn() -> euler_workbench::Result<(bool, Value)> + Send + Sync,
    {
        items
            .par_iter()
            .map(|item| {
                let t = Instant::now();
                let key = Cache::key(operation, &json!({"id": item.id, "params": item.params, "version": env!("CARGO_PKG_VERSION")}));
                let cached = self.cache.as_ref().and_then(|c| c.get(&key));
                let (value, hit) = match cached {
                    Some(v) => (v, true),
                    None => {
                        let (passed, witness) = match (item.run)() {
                            Ok(x) => x,
                            Err(Error::OracleDisagreement(m)) => (false, json!({"error": m})),
                            Err(e) => return Err(UsageError(format!("{}: {e}", item.id))),
                        };
                        let v = json!({"passed": passed, "witness": witness});
                        if let Some(c) = &self.cache {
                            c.put(&key, operation, &v)?;
                        }
                        (v, false)
                    }
                };
                Ok(json!({
                    "id": item.id,
                    "passed": value["passed"],
                    "witness": value["witness"],
                    "timing": {"elapsed_ms": t.elapsed().as_secs_f64() * 1e3, "cache_hit": hit},
                }))
            })
            .collect()
    }
}

fn from_report(r: CheckReport) -> (bool, Value) {
    (r.passed, r.witness)
}

fn build_report(command: &str, parameters: Value, precision_bits: Option<u32>, items: Vec<Value>) -> Value {
    let passed = items.iter().filter(|i| i["passed"] == true).count();
    json!({
        "schema": SCHEMA,
        "command": command,
        "parameters": parameters,
        "environment": {
            "version": env!("CARGO_PKG_VERSION"),
            "precision_bits": precision_bits,
            "embedding": EMBEDDING,
        },
        "items": items,
        "summary": {"total": items.len(), "passed": passed, "failed": items.len() - passed},
    })
}

/// Removes timing fields, for determinism comparisons.
pub fn strip_timing(report: &Value) -> Value {
    let mut r = report.clone();
    if let Some(items) = r["items"].as_array_mut() {
        for i in items {
            if let Some(o) = i.as_object_mut() {
                o.remove("timing");
            }
        }
    }
    r
}

fn real_fields_of_conductor(m: u64) -> Vec<AbelianField> {
    enumerate_fields(m).into_iter().filter(|e| e.conductor() == m && e.is_real()).collect()
}

fn read_json(path: &PathBuf) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

fn parse_pi(s: &str) -> CliResult<OddPrimes> {
    if s == "odd" {
        return Ok(OddPrimes::All);
    }
    let set: BTreeSet<u64> = s
        .split(',')
        .map(|x| x.trim().parse::<u64>().map_err(|_| UsageError(format!("bad prime in --pi: {x}"))))
        .collect::<CliResult<_>>()?;
    Ok(OddPrimes::Finite(set))
}

fn int_poly(c: &[i64]) -> Vec<BigInt> {
    c.iter().map(|&x| BigInt::from(x)).collect()
}

/// Executes one report-producing command.
fn execute(cli: &Cli, runner: &Runner) -> CliResult<Value> {
    match &cli.command {
        Command::Distribution { max_conductor } => {
            let n = *max_conductor;
            let slice: OnceLock<euler_workbench::Result<EulerSystemSlice>> = OnceLock::new();
            let get = || slice.get_or_init(|| eulersys::rubin_stark_system(n)).as_ref().map_err(|e| e.clone());
            let pairs = {
                let s = get()?;
                s.nested_pairs()
            };
            let items = pairs
                .into_iter()
                .map(|(e, f)| Item {
                    id: format!("{} ⊂ {}", e.label(), f.label()),
                    params: json!({"max_conductor": n}),
                    run: move || Ok(from_report(eulersys::check_distribution(get()?, &e, &f)?)),
                })
                .collect();
            let items = runner.run("distribution", items)?;
            Ok(build_report("distribution", json!({"max_conductor": n}), None, items))
        }
        Command::RubinStark { conductor, bits } => {
            let fields = real_fields_of_conductor(*conductor);
            if fields.is_empty() {
                return usage(format!("no real (rank-1) field has conductor {conductor}"));
            }
            euler_workbench::ball::check_precision(*bits)?;
            let bits = *bits;
            let items = fields
                .into_iter()
                .map(|e| Item {
                    id: e.label(),
                    params: json!({"bits": bits}),
                    run: move || Ok(from_report(eulersys::check_rubin_stark_identity(&e, bits)?)),
                })
                .collect();
            let items = runner.run("rubin-stark", items)?;
            Ok(build_report("rubin-stark", json!({"conductor": conductor, "bits": bits}), Some(bits), items))
        }
        Command::Stickelberger { max_conductor, t } => {
            let mut items = Vec::new();
            let mut skipped = Vec::new();
            for e in enumerate_fields(*max_conductor).into_iter().filter(|e| !e.is_real()) {
                let te: Vec<u64> = t.iter().copied().filter(|&l| eulersys::check_admissible(&e, &[l]).is_ok()).collect();
                if te.is_empty() {
                    skipped.push(e.label());
                    continue;
                }
                items.push(Item {
                    id: e.label(),
                    params: json!({"T": te}),
                    run: move || {
                        let r = eulersys::check_rubin_lattice(&eulersys::rubin_stark_element(&e)?, &[te.clone()])?;
                        let ok = r.witness["outcomes"].as_array().is_some_and(|o| o.iter().all(|x| x["over_Z"] == true));
                        Ok((ok, r.witness))
                    },
                });
            }
            let items = runner.run("stickelberger", items)?;
            Ok(build_report(
                "stickelberger",
                json!({"max_conductor": max_conductor, "T": t, "skipped_fields": skipped}),
                None,
                items,
            ))
        }
        Command::InitialValue { max_prime_power } => {
            let n = *max_prime_power;
            let slice: OnceLock<euler_workbench::Result<EulerSystemSlice>> = OnceLock::new();
            let get = || slice.get_or_init(|| eulersys::rubin_stark_system(n)).as_ref().map_err(|e| e.clone());
            let items = enumerate_fields(n)
                .into_iter()
                .filter(|e| prime_power(e.conductor()).is_some())
                .map(|e| Item {
                    id: e.label(),
                    params: json!({}),
                    run: move || Ok(from_report(eulersys::check_initial_value(get()?, &e)?)),
                })
                .collect();
            let items = runner.run("initial-value", items)?;
            Ok(build_report("initial-value", json!({"max_prime_power": n}), None, items))
        }
        Command::LatticeLemma { trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let groups = [
                FiniteAbelianGroup::cyclic(2),
                FiniteAbelianGroup::cyclic(3),
                FiniteAbelianGroup::cyclic(4),
                FiniteAbelianGroup::new(vec![2, 2])?,
                FiniteAbelianGroup::cyclic(5),
                FiniteAbelianGroup::cyclic(6),
            ];
            let mut items = Vec::new();
            for k in 0..*trials {
                let g = groups[k % groups.len()].clone();
                let m = GLattice::random(&mut rng, &g, 12);
                let h = rng.gen_range(1..g.order());
                let s = rng.gen_range(0..=2usize);
                items.push(Item {
                    id: format!("trial {k}"),
                    params: json!({"seed": seed, "trial": k}),
                    run: move || {
                        let r = check_lemma_a(&m, &[h], s)?;
                        let w = json!({
                            "group": g.invariants(), "rank": m.rank(), "h": g.format_element(h), "s": s,
                            "h_order": r.h_order, "left_rank": r.left_rank, "right_rank": r.right_rank,
                        });
                        Ok((r.isomorphic, w))
                    },
                });
            }
            let items = runner.run("lattice-lemma", items)?;
            Ok(build_report("lattice-lemma", json!({"trials": trials, "seed": seed}), None, items))
        }
        Command::Circular(args) => circular(args, runner),
        Command::Iwasawa { suite, p, trials, seed } => iwasawa_suite(*suite, *p, *trials, *seed, runner),
        Command::Scarcity { conductor, input } => {
            let slice = EulerSystemSlice::from_json(&read_json(input)?)?;
            if *conductor > slice.bound() {
                return usage(format!("conductor {conductor} exceeds the slice bound {}", slice.bound()));
            }
            let fields = real_fields_of_conductor(*conductor);
            if fields.is_empty() {
                return usage(format!("no real (rank-1) field has conductor {conductor}"));
            }
            let slice = &slice;
            let items = fields
                .into_iter()
                .map(|e| Item {
                    id: e.label(),
                    // the slice content is part of the key
                    params: json!({"value": slice.get(&e).map(|c| c.to_json())}),
                    run: move || Ok(from_report(eulersys::check_scarcity_at_level(slice, &e)?)),
                })
                .collect();
            let items = runner.run("scarcity", items)?;
            Ok(build_report("scarcity", json!({"conductor": conductor, "input": input.display().to_string()}), None, items))
        }
        Command::Slice { .. } => unreachable!("handled before execution"),
    }
}

fn circular(args: &CircularArgs, runner: &Runner) -> CliResult<Value> {
    let n = args.max_level;
    let (f, source) = match (&args.source.input, args.source.builtin) {
        (Some(path), _) => (CircularDistribution::from_json(&read_json(path)?)?, json!({"input": path.display().to_string()})),
        (None, Some(Builtin::Phi)) => (circdist::phi(n)?, json!({"builtin": "phi"})),
        (None, Some(Builtin::Delta)) => (circdist::delta(&parse_pi(&args.pi)?, n)?, json!({"builtin": "delta", "pi": args.pi})),
        (None, None) => return usage("one of --input or --builtin is required"),
    };
    if n > f.bound() {
        return usage(format!("--max-level {n} exceeds the distribution bound {}", f.bound()));
    }
    let f = &f;
    let key = json!({"distribution": f.to_json()});
    let mut items = Vec::new();
    for m in 2..=n {
        for a in 1..=n / m {
            let key = key.clone();
            items.push(Item {
                id: format!("axiom a = {a}, n = {m}"),
                params: key,
                run: Box::new(move || Ok((circdist::check_distribution_axiom(f, a, m)?, json!({"a": a, "n": m}))))
                    as Box<dyn Fn() -> euler_workbench::Result<(bool, Value)> + Send + Sync>,
            });
        }
    }
    if let Some(l) = args.strict_l {
        if !euler_workbench::arith::is_prime(l) {
            return usage(format!("--strict-l {l} is not prime"));
        }
        for m in (2..=n / l).filter(|m| m % l != 0) {
            let key = key.clone();
            items.push(Item {
                id: format!("strict n = {m}, ℓ = {l}"),
                params: key,
                run: Box::new(move || Ok(from_report(circdist::check_strict(f, m, l)?))),
            });
        }
    }
    let items = runner.run("circular", items)?;
    let mut params = json!({"max_level": n, "strict_l": args.strict_l});
    params["source"] = source;
    Ok(build_report("circular", params, None, items))
}

type BoxedRun<'a> = Box<dyn Fn() -> euler_workbench::Result<(bool, Value)> + Send + Sync + 'a>;

fn iwasawa_suite(suite: IwasawaSuite, p: u64, trials: usize, seed: u64, runner: &Runner) -> CliResult<Value> {
    if !euler_workbench::arith::is_prime(p) {
        return usage(format!("{p} is not prime"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items: Vec<Item<BoxedRun>> = Vec::new();
    let name = match suite {
        IwasawaSuite::Prep => "prep",
        IwasawaSuite::Orders => "orders",
        IwasawaSuite::Lemma => "lemma",
    };
    for k in 0..trials {
        let params = json!({"suite": name, "p": p, "seed": seed, "trial": k});
        let run: BoxedRun = match suite {
            IwasawaSuite::Prep => {
                let f = ZpPowerSeries::random(&mut rng, p, 20, 30)?;
                Box::new(move || {
                    let w = iwasawa::weierstrass_prep(&f)?;
                    let ok = w.recombine(20)? == f && w.unit.is_unit();
                    Ok((ok, json!({"mu": w.mu, "lambda": w.lambda(), "P": iwasawa::poly_text(&w.distinguished_reduced()), "P_precision": w.p_precision})))
                })
            }
            IwasawaSuite::Orders => {
                let (m, n) = (rng.gen_range(1..=5u32), rng.gen_range(1..=5u32));
                Box::new(move || {
                    let mut tm = vec![BigInt::zero(); m as usize];
                    tm.push(BigInt::one());
                    let h = iwasawa::fn_family(&int_poly(&[0, 1]), p, n)?;
                    let got = iwasawa::quotient_order(&tm, &h, p)?;
                    let w = json!({"m": m, "n": n, "ord_p": got.finite(), "expected": n * m});
                    Ok((got == QuotientOrder::Finite(n * m), w))
                })
            }
            IwasawaSuite::Lemma => {
                let (spec, f, n) = loop {
                    let spec = ElementaryModuleSpec::random(&mut rng, p)?;
                    let f = if rng.gen_bool(0.3) { int_poly(&[p as i64]) } else { int_poly(&[p as i64 * rng.gen_range(-2i64..=2), 1]) };
                    let n = rng.gen_range(1..=5u32);
                    if iwasawa::check_orders_lemma(&spec, &f, n).is_ok() {
                        break (spec, f, n);
                    }
                };
                Box::new(move || {
                    let r = iwasawa::check_orders_lemma(&spec, &f, n)?;
                    let mut w = r.witness;
                    w["spec"] = json!(spec.summands().iter().map(|(g, m)| json!([iwasawa::poly_text(g), m])).collect::<Vec<_>>());
                    w["finite"] = json!(spec.finite());
                    w["f"] = json!(iwasawa::poly_text(&f));
                    Ok((r.passed, w))
                })
            }
        };
        items.push(Item { id: format!("{name} trial {k}"), params, run });
    }
    let items = runner.run("iwasawa", items)?;
    Ok(build_report("iwasawa", json!({"suite": name, "p": p, "trials": trials, "seed": seed}), None, items))
}

fn slice_json(kind: SliceKind, n: u64, sigma: Option<u64>, half: bool) -> CliResult<Value> {
    let slice = match kind {
        SliceKind::RubinStark => {
            if sigma.is_some() {
                return usage("--sigma applies to --system phi");
            }
            eulersys::rubin_stark_system(n)?
        }
        SliceKind::Phi => {
            let mut f = circdist::phi(n.max(2))?;
            if let Some(a) = sigma {
                if (2..=n).any(|m| gcd(a, m) != 1) {
                    return usage(format!("σ_{a} needs a prime to every conductor ≤ {n}"));
                }
                f = circdist::apply_exponent(&f, &ExponentFamily::sigma(a, n.max(2))?)?;
            }
            circdist::euler_system_of(&f, n)?
        }
    };
    let slice = if half {
        let h = num_rational::BigRational::new(1.into(), 2.into());
        EulerSystemSlice::new(
            n,
            slice
                .entries()
                .iter()
                .map(|c| c.scale(&euler_workbench::groupring::RatGroupRing::one(c.field().galois_group()).scale(&h)))
                .collect(),
        )?
    } else {
        slice
    };
    Ok(slice.to_json())
}

/// Parses arguments, runs the command and writes the report; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run_cli(&cli) {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn emit(cli: &Cli, value: &Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    match &cli.out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

fn run_cli(cli: &Cli) -> CliResult<i32> {
    let threads = cli.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if threads == 0 {
        return usage("--jobs must be positive");
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| UsageError(e.to_string()))?;
    if let Command::Slice { system, max_conductor, sigma, half } = &cli.command {
        let v = pool.install(|| slice_json(*system, *max_conductor, *sigma, *half))?;
        emit(cli, &v)?;
        return Ok(0);
    }
    let cache = if cli.no_cache { None } else { cli.cache_dir.clone().or_else(Cache::default_root).map(Cache::new) };
    let runner = Runner { cache };
    let report = pool.install(|| execute(cli, &runner))?;
    emit(cli, &report)?;
    Ok(if report["summary"]["failed"] == 0 { 0 } else { 1 })
}
