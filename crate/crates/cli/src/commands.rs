use std::fmt::Write as _;
use std::path::Path;

use envybench::analysis::generators::{gen_one_vs_n, gen_opera_house, random_downward_closed, random_matroid, random_multi_unit};
use envybench::analysis::stats::sig6;
use envybench::analysis::{benchmark_bounds, default_workers, ratio_experiment, rsem_factor, rsem_prime_factor, Benchmark, Mode};
use envybench::curves::curve_table;
use envybench::envyfree::{brute_force_efo, efo_benchmark2, efo_with, Expectation, BRUTE_FORCE_LIMIT};
use envybench::incentive::{check_truthful_mechanism, compare_ic_ef, TruthMode};
use envybench::instance::{EnvSpec, Instance};
use envybench::mechanisms::{build_mechanism, characteristic_weights, decompose_majorized, vcgr_benchmark, WeightMode, MECHANISMS};
use envybench::rational::{int, parse, Rational};
use envybench::{Environment, Error, ValuationProfile};

use crate::{CheckArgs, CliError, CliResult, DecomposeArgs, EfoArgs, GenArgs, Generator, ModeArg, OutArg, RunArgs, SeedArg, WeightsArgs};

/// Truthfulness probes are enumerated over all coins up to this many agents.
const TRUTH_LIMIT: usize = 5;

fn load(path: &Path) -> CliResult<(Instance, Environment, ValuationProfile)> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let inst = Instance::from_json(&text).map_err(|e| CliError::Schema(e.to_string()))?;
    let env = inst.environment().map_err(|e| CliError::Schema(e.to_string()))?;
    let v = inst.profile().map_err(|e| CliError::Schema(e.to_string()))?;
    Ok((inst, env, v))
}

fn emit(out: &OutArg, text: &str) -> CliResult<()> {
    match &out.out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn require_seed(seed: &SeedArg, what: &str) -> CliResult<u64> {
    seed.seed.ok_or_else(|| CliError::Usage(format!("{what} is randomized: pass --seed or set {}", envybench::seed::SEED_ENV)))
}

fn rationals(list: &str) -> CliResult<Vec<Rational>> {
    list.split(',').map(|s| parse(s).map_err(|e| CliError::Usage(e.to_string()))).collect()
}

fn opt(x: &Option<Rational>) -> String {
    x.as_ref().map(ToString::to_string).unwrap_or_default()
}

pub fn efo(a: &EfoArgs) -> CliResult<()> {
    let (_, env, v) = load(&a.instance)?;
    let mut s = String::new();
    if a.curve {
        s.push_str("i,R,IR,phi,phiBar\n");
        for row in curve_table(&v) {
            let _ = writeln!(s, "{},{},{},{},{}", row.i, row.r, row.ir, opt(&row.phi), opt(&row.phi_bar));
        }
        return emit(&a.out, &s);
    }
    let mode = match a.mode {
        ModeArg::Exact => Expectation::Exact,
        ModeArg::Mc => Expectation::MonteCarlo { trials: a.trials, seed: require_seed(&a.seed, "mc mode")? },
    };
    let e = efo_with(&env, &v, mode)?;
    let efo2 = match mode {
        Expectation::Exact => efo_benchmark2(&env, &v)?,
        _ => efo_with(&env, &v.second_price_profile(), mode)?.revenue,
    };
    let _ = write!(s, "EFO={} EFO2={} VCGr={}", e.revenue, efo2, vcgr_benchmark(&env, &v)?);
    if let Some(se) = e.stderr {
        let _ = write!(s, " EFO_stderr={}", sig6(se));
    }
    s.push('\n');
    s.push_str("agent,value,allocation,payment\n");
    for (rank, &id) in v.ids().iter().enumerate() {
        let _ = writeln!(
            s,
            "{id},{},{},{}",
            v.values()[rank],
            e.outcome.allocation.probs()[rank],
            e.outcome.payments[rank]
        );
    }
    emit(&a.out, &s)
}

/// Factor a mechanism is guaranteed to reach against EFO2.
fn guarantee(mechanism: &str) -> Option<Rational> {
    match mechanism {
        "rsem" => Some(rsem_factor()),
        "rsem-prime" => Some(rsem_prime_factor()),
        _ => None,
    }
}

pub fn run(a: &RunArgs) -> CliResult<()> {
    if !MECHANISMS.contains(&a.mechanism.as_str()) {
        return Err(CliError::Usage(format!("unknown mechanism {:?} (known: {})", a.mechanism, MECHANISMS.join(", "))));
    }
    let benchmark: Benchmark = a.benchmark.parse().map_err(|e: Error| CliError::Usage(e.to_string()))?;
    let (inst, env, v) = load(&a.instance)?;
    let mode = match a.mode {
        ModeArg::Exact => Mode::Exact,
        ModeArg::Mc => Mode::MonteCarlo { trials: a.trials, seed: require_seed(&a.seed, "mc mode")? },
    };
    let mech = build_mechanism(&a.mechanism, &env, &v)?;
    let workers = a.workers.unwrap_or_else(default_workers).max(1);
    let r = ratio_experiment(mech.as_ref(), &env, &v, benchmark, mode, workers)?;
    let verdict = match guarantee(&a.mechanism) {
        Some(f) if benchmark == Benchmark::Efo2 => {
            if r.clears(&f) {
                "pass"
            } else {
                "fail"
            }
        }
        _ => "n/a",
    };
    let revenue = r.exact_revenue.as_ref().map(ToString::to_string).unwrap_or_else(|| sig6(r.mean_revenue));
    let trials = if r.exact_revenue.is_some() { "exact".to_string() } else { r.trials.to_string() };
    let mut s = String::from("instance,mechanism,benchmark,benchmark_value,trials,revenue,mean,stderr,verdict\n");
    let _ = writeln!(
        s,
        "{},{},{},{},{},{},{},{},{}",
        inst.id,
        a.mechanism,
        benchmark,
        r.benchmark_value,
        trials,
        revenue,
        sig6(r.ratio),
        sig6(r.stderr),
        verdict
    );
    emit(&a.out, &s)
}

fn instance_for(id: String, env: &Environment, v: &ValuationProfile) -> CliResult<Instance> {
    let spec = EnvSpec::describe(env).ok_or_else(|| CliError::Precondition("environment has no file form".into()))?;
    Ok(Instance { id, environment: spec, permuted: env.is_permuted(), values: v.by_id(), distribution: None })
}

fn need_n(a: &GenArgs) -> CliResult<usize> {
    a.n.ok_or_else(|| CliError::Usage(format!("{:?} needs --n", a.generator)))
}

pub fn gen(a: &GenArgs) -> CliResult<()> {
    let inst = match a.generator {
        Generator::OneVsN => {
            let n = need_n(a)?;
            let (base, eps) = (parse(&a.v)?, parse(&a.eps)?);
            let (_, v) = gen_one_vs_n(n, &base, &eps)?;
            Instance {
                id: a.id.clone().unwrap_or_else(|| format!("one-vs-n-{n}")),
                environment: EnvSpec::OneVsN { n },
                permuted: true,
                values: v.by_id(),
                distribution: None,
            }
        }
        Generator::OperaHouse => {
            let seed = require_seed(&a.seed, "opera-house values")?;
            let house = gen_opera_house(a.m)?;
            let f = &house.distribution;
            let cum = f.cumulative_f64();
            let mut rng = envybench::seed::rng(seed);
            let values: Vec<Rational> = (0..house.env.n()).map(|_| f.values()[f.sample_index(&cum, &mut rng)].clone()).collect();
            let v = ValuationProfile::from_unsorted(values)?;
            let mut inst = instance_for(a.id.clone().unwrap_or_else(|| format!("opera-house-{}", a.m)), &house.env, &v)?;
            inst.distribution = Some(f.clone());
            if let Some(p) = &a.out.out {
                let dist = p.with_extension("distribution.json");
                let mut text = serde_json::to_string_pretty(f).expect("distributions serialize");
                text.push('\n');
                std::fs::write(&dist, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", dist.display())))?;
            }
            inst
        }
        Generator::KUnit | Generator::DownwardClosed | Generator::Matroid => {
            let n = need_n(a)?;
            let seed = require_seed(&a.seed, "random instances")?;
            let (env, v) = match a.generator {
                Generator::KUnit => random_multi_unit(n, a.max, seed)?,
                Generator::DownwardClosed => random_downward_closed(n, a.max, seed)?,
                _ => random_matroid(n, a.max, seed)?,
            };
            let name = format!("{:?}", a.generator).to_lowercase();
            instance_for(a.id.clone().unwrap_or_else(|| format!("{name}-{n}-{seed}")), &env, &v)?
        }
    };
    emit(&a.out, &inst.to_json())
}

pub fn decompose(a: &DecomposeArgs) -> CliResult<()> {
    let w = rationals(&a.weights)?;
    let x = rationals(&a.target)?;
    let d = decompose_majorized(&w, &x)?;
    let mut s = String::from("probability,assignment\n");
    for (r, perm) in &d.terms {
        let cells: Vec<String> = perm.iter().map(ToString::to_string).collect();
        let _ = writeln!(s, "{r},{}", cells.join(" "));
    }
    emit(&a.out, &s)
}

pub fn weights(a: &WeightsArgs) -> CliResult<()> {
    let (_, env, _) = load(&a.instance)?;
    let mode = match a.mode {
        ModeArg::Exact => WeightMode::Exact,
        ModeArg::Mc => WeightMode::MonteCarlo { trials: a.trials, seed: require_seed(&a.seed, "mc mode")? },
    };
    let cw = characteristic_weights(&env, mode)?;
    let mut s = String::from("rank,weight,stderr\n");
    for (r, w) in cw.weights.iter().enumerate() {
        let se = cw.stderr.as_ref().map(|e| sig6(e[r])).unwrap_or_else(|| "0".into());
        let _ = writeln!(s, "{},{w},{se}", r + 1);
    }
    emit(&a.out, &s)
}

enum Verdict {
    Pass,
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail(detail.into())
    }
}

/// A size limit turns into a skip, any other error into a failure.
fn guarded(r: Result<Verdict, Error>) -> Verdict {
    match r {
        Ok(v) => v,
        Err(e @ Error::SizeLimit { .. }) | Err(e @ Error::Asymmetric) => Verdict::Skip(e.to_string()),
        Err(e) => Verdict::Fail(e.to_string()),
    }
}

pub fn check(a: &CheckArgs) -> CliResult<()> {
    let (_, env, v) = load(&a.instance)?;
    let values = v.by_id();
    let mut results: Vec<(String, Verdict)> = Vec::new();

    let efo = efo_with(&env, &v, Expectation::Exact);
    results.push((
        "efo-envy-free".into(),
        guarded(efo.clone().map(|e| verdict(e.outcome.is_envy_free(v.values()) && e.outcome.revenue() == e.revenue, "EFO outcome has envy"))),
    ));
    results.push((
        "efo-beats-grid".into(),
        if v.n() > BRUTE_FORCE_LIMIT {
            Verdict::Skip(format!("more than {BRUTE_FORCE_LIMIT} agents"))
        } else {
            guarded(efo.clone().and_then(|e| {
                let b = brute_force_efo(&env, &v, a.grid)?;
                Ok(verdict(b.revenue <= e.revenue, format!("grid revenue {} above EFO {}", b.revenue, e.revenue)))
            }))
        },
    ));
    let splits = if a.seed.seed.is_some() { a.splits } else { 0 };
    results.push((
        "benchmark-bounds".into(),
        guarded(benchmark_bounds(&env, &v, splits, a.seed.seed.unwrap_or(0)).map(|b| {
            let ok = b.subadditive && b.efo2_above_second_value && b.efo_within_twice_vcgr != Some(false) && b.efo2 <= b.efo;
            verdict(ok, format!("EFO={} EFO2={} VCGr={} subadditive={}", b.efo, b.efo2, b.vcgr, b.subadditive))
        })),
    ));
    results.push((
        "ic-vs-ef".into(),
        if !env.is_matroid() {
            Verdict::Skip("not a matroid".into())
        } else {
            guarded(compare_ic_ef(&env, &v, &[]).map(|c| {
                let ok = c.ic.iter().zip(&c.ef).all(|(ic, ef)| ic <= ef && ef <= &(int(2) * ic));
                verdict(ok, format!("IC={} EF={}", c.ic_total(), c.ef_total()))
            }))
        },
    ));
    for name in MECHANISMS {
        let label = format!("truthful-{name}");
        let m = match build_mechanism(name, &env, &v) {
            Ok(m) => m,
            Err(e) => {
                results.push((label, Verdict::Skip(e.to_string())));
                continue;
            }
        };
        if v.n() > TRUTH_LIMIT {
            results.push((label, Verdict::Skip(format!("more than {TRUTH_LIMIT} agents"))));
            continue;
        }
        let r = check_truthful_mechanism(m.as_ref(), &values, a.grid, TruthMode::InExpectation)
            .map(|c| match c {
                Ok(()) => Verdict::Pass,
                Err(cx) => Verdict::Fail(format!("{cx:?}")),
            });
        results.push((label, guarded(r)));
    }

    let mut s = String::new();
    let mut failed = 0;
    for (name, r) in &results {
        let _ = match r {
            Verdict::Pass => writeln!(s, "PASS {name}"),
            Verdict::Fail(d) => {
                failed += 1;
                writeln!(s, "FAIL {name}: {d}")
            }
            Verdict::Skip(d) => writeln!(s, "SKIP {name}: {d}"),
        };
    }
    emit(&a.out, &s)?;
    if failed > 0 {
        return Err(CliError::CheckFailed(failed));
    }
    Ok(())
}
