//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use common::{entropy_by_enumeration, float_markov, q, rational_markov, rational_row};
use kscert::certifier::{
    certify, remark_grid, Certificate, ScenarioSpec, Settings, Stage, Verdict,
};
use kscert::comparison::{aggregate_closeness, check_lemma1, epsilon_star, flip_epsilon, Method};
use kscert::scenarios::{build_scenario, Direction, EpsPolicy, PerturbationFamily};
use kscert::schema::render_scenario;
use kscert::shiftspace::StochasticMatrix;
use kscert::{
    block_entropy, entropy_rate_profile, ks_entropy_closed_form, BigRational, CylinderWord,
    Extended, ProbVector, Scalar, ShiftMeasure,
};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const BUDGET: u64 = 1 << 22;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:.2?}, limit {limit:?}"))
}

fn entropy_of(p: &[f64]) -> f64 {
    p.iter().filter(|x| **x > 0.0).map(|x| -x * x.ln()).sum()
}

fn comparison_bound_fuzz() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let ln3 = 3f64.ln();
    let (mut accepted, mut drawn, mut min_slack) = (0usize, 0usize, f64::INFINITY);
    while accepted < 10_000 {
        drawn += 1;
        let d = rng.gen_range(2..=50);
        let raw: Vec<f64> = (0..d)
            .map(|_| {
                if rng.gen_bool(0.05) {
                    0.0
                } else {
                    rng.gen_range(1e-4..1.0)
                }
            })
            .collect();
        let total: f64 = raw.iter().sum();
        if total == 0.0 {
            continue;
        }
        let qv: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let size = rng.gen_range(0.0..0.4);
        let tilted: Vec<f64> = qv
            .iter()
            .map(|x| x * (1.0 + size * rng.gen_range(-1.0..1.0)))
            .collect();
        let t: f64 = tilted.iter().sum();
        let pv: Vec<f64> = tilted.iter().map(|x| x / t).collect();
        let (Ok(p), Ok(qq)) = (ProbVector::new(pv.clone()), ProbVector::new(qv.clone())) else {
            continue;
        };
        let check = check_lemma1(&p, &qq).map_err(|e| e.to_string())?;
        if !check.applicable {
            continue;
        }
        accepted += 1;
        let c = check.c_star.to_f64();
        let slack = (1.0 + c) * entropy_of(&qv) + c * ln3 - entropy_of(&pv);
        min_slack = min_slack.min(slack);
        ensure(slack >= -1e-9, || {
            format!("slack {slack} at p = {pv:?}, q = {qv:?}")
        })?;
        ensure(check.holds == Some(true), || {
            format!("library check disagrees at c = {c}")
        })?;
    }
    within(start, Duration::from_secs(10))?;
    Ok(format!(
        "{accepted} pairs with c* < 1/3 ({drawn} drawn), min slack {min_slack:.3e}"
    ))
}

fn union_closeness() -> Outcome {
    let start = Instant::now();
    let mu0 = ShiftMeasure::markov(
        vec![vec![q(9, 10), q(1, 10)], vec![q(2, 10), q(8, 10)]],
        None,
    )
    .unwrap();
    let mun = ShiftMeasure::markov(
        vec![vec![q(17, 20), q(3, 20)], vec![q(1, 4), q(3, 4)]],
        None,
    )
    .unwrap();
    let atoms: Vec<CylinderWord> = (0..4)
        .map(|i| CylinderWord::new(vec![i / 2, i % 2]))
        .collect();
    let star = match epsilon_star(&mu0, &mun, 1, Method::Brute, BUDGET)
        .unwrap()
        .c_star
    {
        Extended::Finite(c) => c,
        Extended::Infinite => return Err("eps* infinite".into()),
    };
    for mask in 0u32..16 {
        let subset: Vec<CylinderWord> = (0..4)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| atoms[i].clone())
            .collect();
        let check =
            aggregate_closeness(&mu0, &mun, 1, &subset, BUDGET).map_err(|e| e.to_string())?;
        let a: BigRational = subset
            .iter()
            .map(|w| mu0.cylinder_measure(w).unwrap())
            .sum();
        let b: BigRational = subset
            .iter()
            .map(|w| mun.cylinder_measure(w).unwrap())
            .sum();
        let exact = (a - b.clone()).abs() <= star.clone() * b;
        ensure(check.holds && exact, || {
            format!("union {mask:04b} violates the bound")
        })?;
        ensure(check.epsilon == Extended::Finite(star.clone()), || {
            "epsilon mismatch".into()
        })?;
    }
    within(start, Duration::from_secs(1))?;
    Ok(format!("16 unions hold exactly with eps* = {star}"))
}

fn flip_step() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    for _ in 0..10_000 {
        let b = q(rng.gen_range(1..=1000), rng.gen_range(1..=1000));
        let eps = q(rng.gen_range(0..=500), 1000);
        let u = q(rng.gen_range(-1000..=1000), 1000);
        let a = b.clone() + eps.clone() * b.clone() * u;
        let diff = (a.clone() - b.clone()).abs();
        ensure(diff <= eps.clone() * b.clone(), || {
            "generator broke the premise".into()
        })?;
        let two_eps = flip_epsilon(&eps).map_err(|e| e.to_string())?;
        ensure(diff <= two_eps * a.clone(), || {
            format!("a = {a}, b = {b}, eps = {eps}")
        })?;
    }
    Ok("10000 exact cases".into())
}

fn dp_matches_brute() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let mut pairs = 0;
    let mut infinite = 0;
    for i in 0..120 {
        let k = 2 + i % 2;
        let r = i % 9;
        let zeros = i % 3 != 0;
        let mu0 = rational_markov(&mut rng, k, zeros);
        let mun = rational_markov(&mut rng, k, zeros);
        let dp = epsilon_star(&mu0, &mun, r, Method::Dp, BUDGET).map_err(|e| e.to_string())?;
        let brute =
            epsilon_star(&mu0, &mun, r, Method::Brute, BUDGET).map_err(|e| e.to_string())?;
        ensure(dp.c_star == brute.c_star, || {
            format!("pair {i}: {} vs {}", dp.c_star, brute.c_star)
        })?;
        ensure(
            dp.ratio_max == brute.ratio_max && dp.ratio_min == brute.ratio_min,
            || format!("pair {i}: ratio extremes differ"),
        )?;
        ensure(dp.witness() == brute.witness(), || {
            format!("pair {i}: witnesses differ")
        })?;
        infinite += usize::from(dp.c_star.is_infinite());
        pairs += 1;
    }
    within(start, Duration::from_secs(30))?;
    Ok(format!(
        "{pairs} pairs equal exactly ({infinite} with infinite eps*)"
    ))
}

fn closed_forms() -> Outcome {
    let fair = ShiftMeasure::bernoulli(vec![0.5, 0.5]).unwrap();
    let h = ks_entropy_closed_form(&fair).unwrap();
    ensure((h - 2f64.ln()).abs() <= 1e-12, || format!("fair coin {h}"))?;
    let chain = ShiftMeasure::markov(vec![vec![0.9, 0.1], vec![0.2, 0.8]], None).unwrap();
    let rate = ks_entropy_closed_form(&chain).unwrap();
    let mut worst: f64 = 0.0;
    for r in 1..=6 {
        let inc = entropy_by_enumeration(&chain, r + 1) - entropy_by_enumeration(&chain, r);
        worst = worst.max((inc - rate).abs());
        ensure((inc - rate).abs() <= 1e-10, || {
            format!("r = {r}: increment {inc} vs {rate}")
        })?;
    }
    Ok(format!(
        "ln 2 exact; Markov rate {rate:.12}, worst increment gap {worst:.1e}"
    ))
}

fn monotone_averages() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    for i in 0..50 {
        let k = 2 + i % 3;
        let mu = float_markov(&mut rng, k);
        let report = entropy_rate_profile(&mu, 8, BUDGET).map_err(|e| e.to_string())?;
        if let Some(r) = report.first_average_increase(1e-9) {
            return Err(format!(
                "measure {i}: H_r/r increases at r = {r}: {:?}",
                report.averages
            ));
        }
    }
    Ok("50 measures, r = 1..8".into())
}

struct Generated {
    specs: Vec<ScenarioSpec<BigRational>>,
    certs: Vec<Certificate>,
}

fn generated() -> &'static Generated {
    static CELL: OnceLock<Generated> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
        let mut specs = Vec::new();
        for i in 0..20 {
            let k = 2 + i % 2;
            let base = if i % 5 == 4 {
                ShiftMeasure::bernoulli(rational_row(&mut rng, k, 6, false)).unwrap()
            } else {
                rational_markov(&mut rng, k, false)
            };
            let direction = if i % 5 == 4 {
                Direction::Weights(ProbVector::new(rational_row(&mut rng, k, 6, true)).unwrap())
            } else {
                Direction::Matrix(
                    StochasticMatrix::new(
                        (0..k).map(|_| rational_row(&mut rng, k, 6, true)).collect(),
                    )
                    .unwrap(),
                )
            };
            let t0 = q(1, rng.gen_range(8..=40));
            let family = PerturbationFamily::geometric(base, direction, t0, i % 2, 4).unwrap();
            let h = ks_entropy_closed_form(&family.base).unwrap();
            let target = match i % 4 {
                0 => h,
                1 => 0.9 * h,
                2 => h + 0.05,
                _ => 0.5 * h,
            };
            let policy = if i % 3 == 0 {
                EpsPolicy::Declared { margin: q(1, 200) }
            } else {
                EpsPolicy::Computed
            };
            specs.push(build_scenario(&family, 4, &policy, Some(target), BUDGET).unwrap());
        }
        let certs = specs
            .iter()
            .map(|s| certify(s, &Settings::default()).unwrap())
            .collect();
        Generated { specs, certs }
    })
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let g = generated();
    let mut counts = [0usize; 3];
    for (i, (spec, cert)) in g.specs.iter().zip(&g.certs).enumerate() {
        let h = ks_entropy_closed_form(&spec.mu0).unwrap();
        counts[cert.verdict as usize] += 1;
        if cert.verdict == Verdict::Pass {
            ensure(h >= spec.target_h - 1e-9, || {
                format!(
                    "scenario {i}: PASS with rate {h} < target {}",
                    spec.target_h
                )
            })?;
        }
        if spec.target_h > h + 1e-6 {
            ensure(cert.verdict == Verdict::Fail, || {
                format!("scenario {i}: unreachable target not rejected")
            })?;
        }
    }
    ensure(counts[0] > 0, || "no generated scenario passed".into())?;

    let settings = Settings::default();
    let mu0 = ShiftMeasure::bernoulli(vec![q(1, 2), q(1, 4), q(1, 4)]).unwrap();
    let missing = ShiftMeasure::bernoulli(vec![q(1, 2), q(1, 2), q(0, 1)]).unwrap();
    let support = ScenarioSpec {
        mu0: mu0.clone(),
        stages: vec![Stage {
            mun: missing.clone(),
            r: 2,
            eps: None,
        }],
        target_h: 0.5,
        generator: kscert::certifier::GeneratorDeclaration {
            value: true,
            justification: "full shift".into(),
        },
        coarsen_m: None,
    };
    let cert = certify(&support, &settings).map_err(|e| e.to_string())?;
    let failure = cert
        .failure
        .clone()
        .ok_or("support violation not rejected")?;
    let step = &cert.steps[0];
    let mass0 = mu0.cylinder_measure(&step.witness).unwrap();
    let massn = missing.cylinder_measure(&step.witness).unwrap();
    ensure(
        cert.verdict == Verdict::Fail && failure.check == "closeness",
        || format!("{cert:?}"),
    )?;
    ensure(massn.is_zero() && mass0.is_positive(), || {
        format!("witness {} is not a support gap", step.witness)
    })?;

    let too_high = ScenarioSpec {
        stages: vec![Stage {
            mun: mu0.clone(),
            r: 2,
            eps: None,
        }],
        target_h: ks_entropy_closed_form(&mu0).unwrap() + 0.1,
        ..support
    };
    let cert = certify(&too_high, &settings).map_err(|e| e.to_string())?;
    let target_failure = cert.failure.clone().ok_or("high target not rejected")?;
    ensure(
        cert.verdict == Verdict::Fail
            && target_failure.check == "target"
            && target_failure.witness.is_some(),
        || format!("{cert:?}"),
    )?;
    within(start, Duration::from_secs(60))?;
    Ok(format!(
        "20 scenarios: {} PASS, {} FAIL, {} INCONCLUSIVE, all sound; support gap witness {} and high target rejected",
        counts[0], counts[1], counts[2], failure.witness.unwrap_or_default()
    ))
}

fn chain_audit() -> Outcome {
    let g = generated();
    let ln3 = 3f64.ln();
    let (mut checked, mut min_slack) = (0, f64::INFINITY);
    for (spec, cert) in g.specs.iter().zip(&g.certs) {
        for step in cert.steps.iter().filter(|s| s.usable) {
            let stage = &spec.stages[step.n - 1];
            let eps = stage.eps.clone().unwrap().to_f64();
            let h_n = entropy_by_enumeration(&stage.mun, stage.r);
            let h_0 = entropy_by_enumeration(&spec.mu0, stage.r);
            let slack = (1.0 + 2.0 * eps) * h_0 + 2.0 * eps * ln3 - h_n;
            ensure(slack >= -1e-9, || {
                format!("stage {}: slack {slack}", step.n)
            })?;
            ensure((step.chain_lhs - h_n).abs() < 1e-9, || {
                format!("stage {}: H_mun {} vs {h_n}", step.n, step.chain_lhs)
            })?;
            min_slack = min_slack.min(slack);
            checked += 1;
        }
    }
    ensure(checked > 0, || "no usable stages".into())?;
    Ok(format!(
        "{checked} usable stages recomputed, min slack {min_slack:.3e}"
    ))
}

fn coarsening_grid() -> Outcome {
    let base = ShiftMeasure::bernoulli(vec![q(1, 2), q(1, 3), q(1, 6)]).unwrap();
    let uniform = Direction::Weights(ProbVector::new(vec![q(1, 3); 3]).unwrap());
    let family = PerturbationFamily::geometric(base, uniform, q(1, 2), 0, 3).unwrap();
    let spec = build_scenario(&family, 3, &EpsPolicy::Computed, None, BUDGET)
        .map_err(|e| e.to_string())?;
    let grid = remark_grid(&spec, &[1, 2, 3], 6, BUDGET).map_err(|e| e.to_string())?;
    let measures: Vec<&ShiftMeasure<BigRational>> = std::iter::once(&spec.mu0)
        .chain(spec.stages.iter().map(|s| &s.mun))
        .collect();
    for (row, mu) in grid.rows.iter().zip(measures) {
        ensure(row.values[0] == 0.0, || {
            format!("row {}: m = 1 gives {}", row.n, row.values[0])
        })?;
        ensure(row.values.windows(2).all(|w| w[0] <= w[1]), || {
            format!("row {}: {:?}", row.n, row.values)
        })?;
        let full = block_entropy(mu, 6, BUDGET).unwrap() / 6.0;
        ensure((row.values[2] - full).abs() <= 1e-12, || {
            format!("row {}: {} vs {full}", row.n, row.values[2])
        })?;
    }
    Ok(format!(
        "{} rows, m = 1 zero, non-decreasing, m = 3 matches",
        grid.rows.len()
    ))
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let argv: Vec<String> = std::iter::once("kscert")
        .chain(args.iter().copied())
        .map(String::from)
        .collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = kscert::cli::run(&argv, &mut out, &mut err);
    (code, out)
}

fn determinism() -> Outcome {
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR"));
    let g = generated();
    let mut files = vec![];
    let exact = dir.join("acceptance_determinism_exact.json");
    std::fs::write(&exact, render_scenario(&g.specs[1], None)).map_err(|e| e.to_string())?;
    files.push(exact);

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0010);
    let base = float_markov(&mut rng, 3);
    let float_spec = ScenarioSpec {
        mu0: base.clone(),
        stages: (1..=4)
            .map(|r| Stage {
                mun: float_markov(&mut rng, 3),
                r: r + 4,
                eps: None,
            })
            .collect(),
        target_h: 0.2,
        generator: kscert::certifier::GeneratorDeclaration {
            value: true,
            justification: "full shift".into(),
        },
        coarsen_m: None,
    };
    let floats = dir.join("acceptance_determinism_float.json");
    std::fs::write(&floats, render_scenario(&float_spec, None)).map_err(|e| e.to_string())?;
    files.push(floats);

    for file in &files {
        let path = file.to_str().unwrap();
        let runs: Vec<(i32, Vec<u8>)> = vec![
            run_cli(&["--output", "json", "certify", path]),
            run_cli(&["--output", "json", "certify", path]),
            run_cli(&["--output", "json", "certify", path]),
            run_cli(&["--output", "json", "--jobs", "1", "certify", path]),
            run_cli(&["--output", "json", "--jobs", "8", "certify", path]),
        ];
        ensure(!runs[0].1.is_empty(), || "empty output".into())?;
        for (i, run) in runs.iter().enumerate() {
            ensure(run == &runs[0], || format!("{path}: run {i} differs"))?;
        }
    }
    Ok("3 repeated runs and --jobs 1 vs 8 byte-identical (exact and float scenarios)".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        (
            "entropy comparison bound on random distributions",
            comparison_bound_fuzz,
        ),
        ("closeness on unions of depth-1 cylinders", union_closeness),
        ("flip step", flip_step),
        ("eps* path recursion equals enumeration", dp_matches_brute),
        ("closed-form entropy rates", closed_forms),
        ("block entropy averages non-increasing", monotone_averages),
        ("end-to-end certificate soundness", end_to_end),
        ("entropy comparison audit on usable stages", chain_audit),
        ("coarsening grid", coarsening_grid),
        ("deterministic certificate output", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.2}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
