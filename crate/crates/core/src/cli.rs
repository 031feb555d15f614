//! Command-line front end.
//!
//! Exit codes: 0 certificate PASS or success, 1 certificate FAIL or
//! INCONCLUSIVE, 2 invalid input, 3 resource budget exceeded.

use std::fmt::Write as _;
use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;

use crate::certifier::{
    self, remark_grid, Certificate, ScenarioSpec, Settings, Verdict, DEFAULT_TOLERANCE,
};
use crate::comparison::{check_lemma1, epsilon_star, Method, Witness};
use crate::entropy::{entropy_rate_profile, ProbVector};
use crate::error::{Error, Result};
use crate::numeric::{canonical, Quantity, Scalar};
use crate::scenarios::{build_scenario, Direction, EpsPolicy, PerturbationFamily};
use crate::schema::{parse_matrix, parse_scenario, parse_vector, render_scenario, LoadedSpec};
use crate::shiftspace::{ShiftMeasure, StochasticMatrix, DEFAULT_BUDGET};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Dp,
    Brute,
    Auto,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Dp => Method::Dp,
            MethodArg::Brute => Method::Brute,
            MethodArg::Auto => Method::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Rational,
    Float,
}

#[derive(Debug, Parser)]
#[command(
    name = "kscert",
    version,
    about = "Finite-stage certificates for entropy lower bounds on shift spaces"
)]
struct Cli {
    #[arg(long, global = true, value_enum, default_value = "table")]
    output: Output,
    /// Absolute tolerance in nats for verdicts.
    #[arg(long, global = true, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// Maximum number of enumerated words [default: the file's budget, else 4194304].
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check every stage of a scenario and emit a certificate.
    Certify { file: String },
    /// Least closeness constant between mu0 and one stage.
    EpsilonStar {
        file: String,
        #[arg(long)]
        stage: usize,
        #[arg(long, value_enum, default_value = "auto")]
        method: MethodArg,
    },
    /// Block entropies and averages of one measure.
    Entropy {
        file: String,
        /// `mu0` or a stage number.
        #[arg(long, default_value = "mu0")]
        measure: String,
        #[arg(long)]
        max_depth: usize,
        /// Report in bits instead of nats (display only).
        #[arg(long)]
        bits: bool,
    },
    /// Entropy comparison for two distributions at their least closeness constant.
    Lemma1Check {
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        /// Exact rational arithmetic for the closeness constant.
        #[arg(long)]
        exact: bool,
    },
    /// Average block entropies under partitions into m atoms.
    RemarkGrid {
        file: String,
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<usize>,
        /// Word length; defaults to the last stage's r.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Write a perturbation scenario file to stdout.
    Generate {
        /// Transition matrix `a,b;c,d`, or one row for Bernoulli weights.
        #[arg(long)]
        base: String,
        /// `uniform` or a matrix / weight row like `--base`.
        #[arg(long, default_value = "uniform")]
        direction: String,
        #[arg(long, default_value = "1/2")]
        t0: String,
        #[arg(long, default_value_t = 0)]
        r0: usize,
        #[arg(long, default_value_t = 4)]
        stages: usize,
        /// Declare eps_n = eps* + margin instead of eps*.
        #[arg(long)]
        margin: Option<String>,
        /// Defaults to the base's entropy rate.
        #[arg(long)]
        target: Option<f64>,
        #[arg(long, value_enum, default_value = "rational")]
        mode: ModeArg,
    },
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit code. Reports go to `out`, diagnostics to `err`.
pub fn run(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_INVALID
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match cli.jobs {
        Some(0) => Err(Error::Validation("--jobs must be positive".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(Error::Validation(format!(
                "cannot start {n} worker threads: {e}"
            ))),
        },
        None => dispatch(&cli),
    };
    match result {
        Ok((text, code)) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_resource() {
                EXIT_RESOURCE
            } else {
                EXIT_INVALID
            }
        }
    }
}

type Outcome = Result<(String, i32)>;

fn read(path: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Validation(format!("cannot read {path}: {e}")))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Lemma1Check { p, q, exact } => {
            if *exact {
                comparison_check::<BigRational>(cli, p, q)
            } else {
                comparison_check::<f64>(cli, p, q)
            }
        }
        Command::Generate {
            base,
            direction,
            t0,
            r0,
            stages,
            margin,
            target,
            mode,
        } => {
            let g = GenerateArgs {
                base,
                direction,
                t0,
                r0: *r0,
                stages: *stages,
                margin: margin.as_deref(),
                target: *target,
            };
            match mode {
                ModeArg::Rational => generate::<BigRational>(cli, &g),
                ModeArg::Float => generate::<f64>(cli, &g),
            }
        }
        Command::Certify { file }
        | Command::EpsilonStar { file, .. }
        | Command::Entropy { file, .. }
        | Command::RemarkGrid { file, .. } => {
            let loaded = parse_scenario(&read(file)?).map_err(|e| e.at(file))?;
            let budget = cli.budget.or(loaded.budget).unwrap_or(DEFAULT_BUDGET);
            match &loaded.spec {
                LoadedSpec::Rational(spec) => with_spec(cli, spec, budget),
                LoadedSpec::Float(spec) => with_spec(cli, spec, budget),
            }
        }
    }
}

fn with_spec<F: Scalar>(cli: &Cli, spec: &ScenarioSpec<F>, budget: u64) -> Outcome {
    let settings = Settings {
        budget,
        tolerance: cli.tolerance,
    };
    match &cli.command {
        Command::Certify { .. } => {
            let cert = certifier::certify(spec, &settings)?;
            Ok((
                render_certificate(&cert, cli.output),
                verdict_code(cert.verdict),
            ))
        }
        Command::EpsilonStar { stage, method, .. } => {
            epsilon(cli, spec, *stage, (*method).into(), budget)
        }
        Command::Entropy {
            measure,
            max_depth,
            bits,
            ..
        } => entropy(cli, spec, measure, *max_depth, *bits, budget),
        Command::RemarkGrid { m, depth, .. } => {
            let depth = depth.unwrap_or_else(|| spec.stages.last().map_or(1, |s| s.r));
            let grid = remark_grid(spec, m, depth, budget)?;
            let text = match cli.output {
                Output::Json => json(&grid),
                Output::Table => {
                    let mut s = format!("average block entropy H(r)/r at r = {depth}\n");
                    let _ = write!(s, "{:>6}", "n");
                    for m in &grid.m_values {
                        let _ = write!(s, " {:>22}", format!("m={m}"));
                    }
                    s.push('\n');
                    for row in &grid.rows {
                        let label = if row.n == 0 {
                            "mu0".to_string()
                        } else {
                            row.n.to_string()
                        };
                        let _ = write!(s, "{label:>6}");
                        for v in &row.values {
                            let _ = write!(s, " {v:>22}");
                        }
                        s.push('\n');
                    }
                    s
                }
            };
            Ok((text, EXIT_OK))
        }
        _ => unreachable!("file commands only"),
    }
}

pub fn render_certificate(cert: &Certificate, output: Output) -> String {
    match output {
        Output::Json => {
            let mut s = certifier::to_json(cert);
            s.push('\n');
            s
        }
        Output::Table => certifier::render_table(cert),
    }
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Pass => EXIT_OK,
        Verdict::Fail | Verdict::Inconclusive => EXIT_FAIL,
    }
}

#[derive(Serialize)]
struct EpsilonReport {
    stage: usize,
    depth: usize,
    method: Method,
    eps_star: Quantity,
    ratio_max: Quantity,
    ratio_min: Quantity,
    witness: Witness,
    witness_label: String,
}

fn epsilon<F: Scalar>(
    cli: &Cli,
    spec: &ScenarioSpec<F>,
    stage: usize,
    method: Method,
    budget: u64,
) -> Outcome {
    let st = spec.stages.get(stage.wrapping_sub(1)).ok_or_else(|| {
        Error::Validation(format!(
            "--stage must be between 1 and {}",
            spec.stages.len()
        ))
    })?;
    let mu0 = spec.on_partition(&spec.mu0)?;
    let mun = spec.on_partition(&st.mun)?;
    let report = epsilon_star(&mu0, &mun, st.r, method, budget).map_err(|e| Error::Stage {
        stage,
        source: Box::new(e),
    })?;
    let witness = report.witness().clone();
    let witness_label = match &witness {
        Witness::Word(w) => mu0.alphabet().render(w),
        Witness::Index(i) => mu0.alphabet().labels()[*i].clone(),
    };
    let method = match method {
        Method::Auto if mu0.as_chain().is_some() && mun.as_chain().is_some() => Method::Dp,
        Method::Auto => Method::Brute,
        m => m,
    };
    let r = EpsilonReport {
        stage,
        depth: st.r,
        method,
        eps_star: report.c_star.to_quantity().canonical(),
        ratio_max: report.ratio_max.to_quantity().canonical(),
        ratio_min: report.ratio_min.to_quantity().canonical(),
        witness,
        witness_label,
    };
    let text = match cli.output {
        Output::Json => json(&r),
        Output::Table => format!(
            "stage {} depth {} method {:?}\neps* = {}\nratio max = {}\nratio min = {}\nwitness = {}\n",
            r.stage, r.depth, r.method, r.eps_star, r.ratio_max, r.ratio_min, r.witness_label
        ),
    };
    Ok((text, EXIT_OK))
}

fn entropy<F: Scalar>(
    cli: &Cli,
    spec: &ScenarioSpec<F>,
    which: &str,
    max_depth: usize,
    bits: bool,
    budget: u64,
) -> Outcome {
    let mu: &ShiftMeasure<F> = if which == "mu0" {
        &spec.mu0
    } else {
        let n: usize = which.parse().map_err(|_| {
            Error::Validation(format!(
                "--measure must be mu0 or a stage number, got {which}"
            ))
        })?;
        &spec
            .stages
            .get(n.wrapping_sub(1))
            .ok_or_else(|| {
                Error::Validation(format!(
                    "--measure must be between 1 and {}",
                    spec.stages.len()
                ))
            })?
            .mun
    };
    let mut report = entropy_rate_profile(mu, max_depth, budget)?;
    let unit = if bits { std::f64::consts::LN_2 } else { 1.0 };
    for v in report
        .block_entropies
        .iter_mut()
        .chain(&mut report.averages)
        .chain(&mut report.increments)
    {
        *v = canonical(*v / unit);
    }
    report.ks_exact = report.ks_exact.map(|h| canonical(h / unit));
    let text = match cli.output {
        Output::Json => json(&report),
        Output::Table => {
            let mut s = format!("entropies in {}\n", if bits { "bits" } else { "nats" });
            let _ = writeln!(
                s,
                "{:>4} {:>22} {:>22} {:>22}",
                "r", "H_r", "H_r/r", "H_r - H_(r-1)"
            );
            for r in 1..=max_depth {
                let inc = if r == 1 {
                    "-".to_string()
                } else {
                    report.increments[r - 2].to_string()
                };
                let _ = writeln!(
                    s,
                    "{r:>4} {:>22} {:>22} {inc:>22}",
                    report.block_entropies[r - 1],
                    report.averages[r - 1]
                );
            }
            match report.ks_exact {
                Some(h) => {
                    let _ = writeln!(s, "entropy rate (closed form): {h}");
                }
                None => s.push_str("entropy rate (closed form): unavailable\n"),
            }
            s
        }
    };
    Ok((text, EXIT_OK))
}

#[derive(Serialize)]
struct ComparisonCheckReport {
    c_star: Quantity,
    applicable: bool,
    lhs: f64,
    rhs: Option<f64>,
    slack: Option<f64>,
    holds: Option<bool>,
}

fn comparison_check<F: Scalar>(cli: &Cli, p: &str, q: &str) -> Outcome {
    let p =
        ProbVector::new(parse_vector::<F>(p).map_err(|e| e.at("--p"))?).map_err(|e| e.at("--p"))?;
    let q =
        ProbVector::new(parse_vector::<F>(q).map_err(|e| e.at("--q"))?).map_err(|e| e.at("--q"))?;
    let c = check_lemma1(&p, &q)?;
    let r = ComparisonCheckReport {
        c_star: c.c_star.to_quantity().canonical(),
        applicable: c.applicable,
        lhs: canonical(c.lhs),
        rhs: c.rhs.map(canonical),
        slack: c.slack.map(canonical),
        holds: c.holds,
    };
    let code = if r.holds == Some(false) {
        EXIT_FAIL
    } else {
        EXIT_OK
    };
    let text = match cli.output {
        Output::Json => json(&r),
        Output::Table => {
            let opt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| v.to_string());
            format!(
                "c* = {}\napplicable = {}\nlhs H(p) = {}\nrhs (1+c)H(q) + c ln 3 = {}\nslack = {}\nholds = {}\n",
                r.c_star,
                r.applicable,
                r.lhs,
                opt(r.rhs),
                opt(r.slack),
                r.holds.map_or_else(|| "-".to_string(), |b| b.to_string())
            )
        }
    };
    Ok((text, code))
}

struct GenerateArgs<'a> {
    base: &'a str,
    direction: &'a str,
    t0: &'a str,
    r0: usize,
    stages: usize,
    margin: Option<&'a str>,
    target: Option<f64>,
}

fn generate<F: Scalar>(cli: &Cli, g: &GenerateArgs<'_>) -> Outcome {
    let rows = parse_matrix::<F>(g.base).map_err(|e| e.at("--base"))?;
    let base = if rows.len() == 1 {
        ShiftMeasure::bernoulli(rows.into_iter().next().expect("one row"))
    } else {
        ShiftMeasure::markov(rows, None)
    }
    .map_err(|e| e.at("--base"))?;
    let k = base.symbols();
    let bernoulli = matches!(base.kind(), crate::shiftspace::MeasureKind::Bernoulli(_));
    let direction = if g.direction == "uniform" {
        let row = vec![F::from_ratio(1, k as i64); k];
        if bernoulli {
            Direction::Weights(ProbVector::new(row)?)
        } else {
            Direction::Matrix(StochasticMatrix::new(vec![row; k])?)
        }
    } else {
        let rows = parse_matrix::<F>(g.direction).map_err(|e| e.at("--direction"))?;
        if rows.len() == 1 {
            Direction::Weights(
                ProbVector::new(rows.into_iter().next().expect("one row"))
                    .map_err(|e| e.at("--direction"))?,
            )
        } else {
            Direction::Matrix(StochasticMatrix::new(rows).map_err(|e| e.at("--direction"))?)
        }
    };
    let t0 = F::parse_literal(g.t0).map_err(|e| e.at("--t0"))?;
    let family = PerturbationFamily::geometric(base, direction, t0, g.r0, g.stages)?;
    let policy = match g.margin {
        None => EpsPolicy::Computed,
        Some(m) => EpsPolicy::Declared {
            margin: F::parse_literal(m).map_err(|e| e.at("--margin"))?,
        },
    };
    let budget = cli.budget.unwrap_or(DEFAULT_BUDGET);
    let spec = build_scenario(&family, g.stages, &policy, g.target, budget)?;
    let mut text = render_scenario(&spec, cli.budget);
    text.push('\n');
    Ok((text, EXIT_OK))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Mode;

    fn scenario_mode(text: &str) -> Mode {
        match parse_scenario(text).unwrap().spec {
            LoadedSpec::Rational(_) => Mode::Rational,
            LoadedSpec::Float(_) => Mode::Float,
        }
    }

    fn call(args: &[&str]) -> (i32, String, String) {
        let argv: Vec<String> = std::iter::once("kscert")
            .chain(args.iter().copied())
            .map(String::from)
            .collect();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(&argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn comparison_check_example() {
        let (code, out, _) = call(&["lemma1-check", "--p", "0.55,0.45", "--q", "0.5,0.5"]);
        assert_eq!(code, 0);
        assert!(out.contains("c* = 0.1\n"), "{out}");
        assert!(out.contains("applicable = true"));
        assert!(out.contains("holds = true"));
        assert!(out.contains("0.688138813713588"), "{out}");
        assert!(out.contains("0.872323127482751"), "{out}");
        let (_, out, _) = call(&[
            "lemma1-check",
            "--exact",
            "--p",
            "0.55,0.45",
            "--q",
            "0.5,0.5",
        ]);
        assert!(out.contains("c* = 1/10"), "{out}");
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(call(&["certify"]).0, EXIT_INVALID);
        assert_eq!(
            call(&["certify", "/nonexistent/scenario.json"]).0,
            EXIT_INVALID
        );
        assert_eq!(
            call(&["lemma1-check", "--p", "0.5,0.6", "--q", "0.5,0.5"]).0,
            EXIT_INVALID
        );
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn generate_is_valid_scenario() {
        let (code, out, err) = call(&[
            "generate",
            "--base",
            "0.9,0.1;0.2,0.8",
            "--stages",
            "3",
            "--r0",
            "1",
        ]);
        assert_eq!(code, 0, "{err}");
        assert_eq!(scenario_mode(&out), Mode::Rational);
        let (_, out, err) = call(&[
            "generate", "--base", "0.5,0.5", "--mode", "float", "--stages", "2", "--margin", "0.01",
        ]);
        assert_eq!(scenario_mode(&out), Mode::Float, "{err}");
    }
}
