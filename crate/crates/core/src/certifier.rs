//! Stage-by-stage certificates for entropy lower bounds.
//!
//! A scenario pairs a reference measure `mu0` with approximating measures
//! `mun`, cylinder depths `r_n` and closeness constants `eps_n`. For each
//! stage the certifier
//!
//! 1. computes `eps*`, the least constant with
//!    `|mu0(A) - mun(A)| <= eps* mun(A)` on depth-`r_n` cylinders, and checks
//!    it against the declared `eps_n`;
//! 2. flips the condition to `|mu0(A) - mun(A)| <= c_n mu0(A)` with
//!    `c_n = 2 eps_n` (needs `eps_n <= 1/2`);
//! 3. when `c_n < 1/3`, checks the entropy comparison
//!    `H_mun(r_n) <= (1 + c_n) H_mu0(r_n) + c_n ln 3` on words of length
//!    `r_n`, and records the stage bound
//!    `L_n = (H_mun(r_n) / r_n - c_n ln 3 / r_n) / (1 + c_n)`, which never
//!    exceeds `H_mu0(r_n) / r_n`.
//!
//! The lower bound itself is a statement about the limit of the stages.
//! When `mu0` has a closed-form entropy rate the certificate compares it to
//! the target directly (exact mode); otherwise it reports only the finite
//! facts it checked (finite-evidence mode).

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comparison::{comparison_bound, epsilon_star, Method, Witness, LN_3};
use crate::entropy::{block_entropy, coarsen, ks_entropy_closed_form};
use crate::error::{Error, Result};
use crate::numeric::{canonical, two, Extended, Mode, Quantity, Scalar};
use crate::shiftspace::{CylinderWord, ShiftMeasure, DEFAULT_BUDGET};

/// Absolute tolerance on nats used in verdicts.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorDeclaration {
    pub value: bool,
    pub justification: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage<F> {
    pub mun: ShiftMeasure<F>,
    pub r: usize,
    /// Declared closeness constant; `None` uses the computed `eps*`.
    pub eps: Option<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec<F> {
    pub mu0: ShiftMeasure<F>,
    pub stages: Vec<Stage<F>>,
    pub target_h: f64,
    pub generator: GeneratorDeclaration,
    /// Work with the partition into `m` atoms: the first `m - 1` symbols and
    /// the union of the rest.
    pub coarsen_m: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub budget: u64,
    pub tolerance: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

/// Measure restricted to the partition into `atoms` cells: symbols
/// `0..atoms-1` kept and the rest merged. `None` for the one-cell partition.
pub fn coarsen_to_atoms<F: Scalar>(
    mu: &ShiftMeasure<F>,
    atoms: usize,
) -> Result<Option<ShiftMeasure<F>>> {
    let k = mu.symbols();
    if atoms == 0 || atoms > k {
        return Err(Error::validation(format!(
            "partition size must be between 1 and {k}, got {atoms}"
        )));
    }
    if atoms == 1 {
        return Ok(None);
    }
    coarsen(mu, atoms - 1).map(Some)
}

impl<F: Scalar> ScenarioSpec<F> {
    fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::validation("scenario has no stages"));
        }
        if !self.target_h.is_finite() || self.target_h < 0.0 {
            return Err(Error::validation(format!(
                "target_h must be a finite nonnegative number, got {}",
                self.target_h
            )));
        }
        let k = self.mu0.symbols();
        for (i, stage) in self.stages.iter().enumerate() {
            let n = i + 1;
            if stage.mun.symbols() != k {
                return Err(Error::validation(format!(
                    "stage {n}: measure has {} symbols but mu0 has {k}",
                    stage.mun.symbols()
                )));
            }
            if stage.r == 0 {
                return Err(Error::validation(format!("stage {n}: r must be positive")));
            }
            if stage.eps.as_ref().is_some_and(|e| e.is_negative()) {
                return Err(Error::validation(format!(
                    "stage {n}: eps must be nonnegative"
                )));
            }
        }
        if let Some(m) = self.coarsen_m {
            if m < 2 || m > k {
                return Err(Error::validation(format!(
                    "coarsen_m must be between 2 and {k}, got {m}"
                )));
            }
        }
        Ok(())
    }

    /// `mu` on the partition the stages are checked against.
    pub fn on_partition(&self, mu: &ShiftMeasure<F>) -> Result<ShiftMeasure<F>> {
        match self.coarsen_m {
            Some(m) => Ok(coarsen_to_atoms(mu, m)?.expect("coarsen_m >= 2")),
            None => Ok(mu.clone()),
        }
    }
}

/// Where a stage's `eps_n` came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpsSource {
    Declared,
    Computed,
}

/// Every quantity checked at one stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateStep {
    pub n: usize,
    pub r: usize,
    pub eps_n: Quantity,
    pub eps_source: EpsSource,
    pub eps_star: Quantity,
    pub ratio_max: Quantity,
    pub ratio_min: Quantity,
    pub method: Method,
    /// Cylinder attaining `eps_star`.
    pub witness: CylinderWord,
    pub witness_label: String,
    /// `eps_star <= eps_n`.
    pub eps_ok: bool,
    /// `2 eps_n`.
    pub c_n: Quantity,
    /// `c_n < 1/3`.
    pub lemma_applicable: bool,
    pub usable: bool,
    pub h_mun: f64,
    pub h_mu0: f64,
    /// `H_mun / r`.
    pub h_mun_upper: f64,
    /// `H_mu0 / r`.
    pub h_mu0_average: f64,
    pub chain_lhs: f64,
    pub chain_rhs: Option<f64>,
    pub chain_slack: Option<f64>,
    pub chain_holds: Option<bool>,
    pub stage_bound: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Satisfied,
    Warning,
    Declared,
    NotDeclared,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisStatus {
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisReport {
    /// Finite surrogate for `r_n -> inf`, `eps_n -> 0`.
    pub limits: HypothesisStatus,
    /// The time-zero partition generates under every measure.
    pub generator: HypothesisStatus,
    /// `eps* <= eps_n` at every stage.
    pub closeness: HypothesisStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConclusionMode {
    Exact,
    FiniteEvidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// First failed check, for reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub check: String,
    pub stage: Option<usize>,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub stage: Option<usize>,
    pub quantity: String,
    pub formula: String,
    pub value: String,
    pub role: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub mode: Mode,
    pub alphabet_size: usize,
    pub coarsen_m: Option<usize>,
    pub target_h: f64,
    pub tolerance: f64,
    pub steps: Vec<CertificateStep>,
    pub hypotheses: HypothesisReport,
    pub conclusion_mode: ConclusionMode,
    pub h_mu0_exact: Option<f64>,
    pub verdict: Verdict,
    pub reason: String,
    pub failure: Option<Failure>,
    pub notes: Vec<String>,
    pub audit: Vec<AuditEntry>,
}

/// Checks stage `n` (1-based) of the scenario.
pub fn verify_step<F: Scalar>(
    spec: &ScenarioSpec<F>,
    n: usize,
    settings: &Settings,
) -> Result<CertificateStep> {
    spec.validate()?;
    verify_stage(spec, n, settings).map_err(|e| match e {
        Error::Stage { .. } => e,
        other => Error::Stage {
            stage: n,
            source: Box::new(other),
        },
    })
}

fn verify_stage<F: Scalar>(
    spec: &ScenarioSpec<F>,
    n: usize,
    settings: &Settings,
) -> Result<CertificateStep> {
    let stage = spec.stages.get(n.wrapping_sub(1)).ok_or_else(|| {
        Error::validation(format!(
            "no stage {n}; stages are 1..={}",
            spec.stages.len()
        ))
    })?;
    let mu0 = spec.on_partition(&spec.mu0)?;
    let mun = spec.on_partition(&stage.mun)?;
    let r = stage.r;

    let report = epsilon_star(&mu0, &mun, r, Method::Auto, settings.budget)?;
    let method = if mu0.as_chain().is_some() && mun.as_chain().is_some() {
        Method::Dp
    } else {
        Method::Brute
    };
    let (eps_n, eps_source) = match &stage.eps {
        Some(e) => (Extended::Finite(e.clone()), EpsSource::Declared),
        None => (report.c_star.clone(), EpsSource::Computed),
    };
    let eps_ok = match (&report.c_star, &eps_n) {
        (_, Extended::Infinite) => false,
        (star, Extended::Finite(e)) => star.le(e),
    };
    let c_n = match &eps_n {
        Extended::Finite(e) => Extended::Finite(two::<F>() * e.clone()),
        Extended::Infinite => Extended::Infinite,
    };
    let lemma_applicable = c_n.finite().is_some_and(|c| c < &F::from_ratio(1, 3));

    let h_mun = block_entropy(&mun, r, settings.budget)?;
    let h_mu0 = block_entropy(&mu0, r, settings.budget)?;
    let rf = r as f64;
    let (chain_rhs, chain_slack, chain_holds, stage_bound) = if lemma_applicable {
        let c = c_n.to_f64();
        let rhs = comparison_bound(h_mu0, c);
        let bound = (h_mun / rf - c * LN_3 / rf) / (1.0 + c);
        (
            Some(rhs),
            Some(rhs - h_mun),
            Some(h_mun <= rhs + settings.tolerance),
            Some(bound),
        )
    } else {
        (None, None, None, None)
    };
    let witness = match report.witness() {
        Witness::Word(w) => w.clone(),
        Witness::Index(i) => CylinderWord::new(vec![*i]),
    };

    Ok(CertificateStep {
        n,
        r,
        eps_n: eps_n.to_quantity().canonical(),
        eps_source,
        eps_star: report.c_star.to_quantity().canonical(),
        ratio_max: report.ratio_max.to_quantity().canonical(),
        ratio_min: report.ratio_min.to_quantity().canonical(),
        method,
        witness_label: mu0.alphabet().render(&witness),
        witness,
        eps_ok,
        c_n: c_n.to_quantity().canonical(),
        lemma_applicable,
        usable: eps_ok && lemma_applicable,
        h_mun: canonical(h_mun),
        h_mu0: canonical(h_mu0),
        h_mun_upper: canonical(h_mun / rf),
        h_mu0_average: canonical(h_mu0 / rf),
        chain_lhs: canonical(h_mun),
        chain_rhs: chain_rhs.map(canonical),
        chain_slack: chain_slack.map(canonical),
        chain_holds,
        stage_bound: stage_bound.map(canonical),
    })
}

fn closeness_failure(s: &CertificateStep) -> String {
    if s.eps_star == Quantity::Infinite {
        format!(
            "stage {}: mun vanishes on cylinder {} where mu0 is positive, so no finite eps works",
            s.n, s.witness_label
        )
    } else {
        format!(
            "stage {}: eps* = {} exceeds eps_n = {} on cylinder {}",
            s.n, s.eps_star, s.eps_n, s.witness_label
        )
    }
}

fn limits_status<F: Scalar>(spec: &ScenarioSpec<F>, steps: &[CertificateStep]) -> HypothesisStatus {
    let mut problems = Vec::new();
    for w in spec.stages.windows(2).zip(1..) {
        let ([a, b], n) = w else { unreachable!() };
        if b.r <= a.r {
            problems.push(format!(
                "r does not increase from stage {n} ({}) to {} ({})",
                a.r,
                n + 1,
                b.r
            ));
        }
    }
    for (w, n) in steps.windows(2).zip(1..) {
        let (a, b) = (w[0].eps_n.to_f64(), w[1].eps_n.to_f64());
        let increases = match (&w[0].eps_n, &w[1].eps_n) {
            (Quantity::Rational(x), Quantity::Rational(y)) => y > x,
            _ => b > a,
        };
        if increases {
            problems.push(format!("eps increases from stage {n} to {}", n + 1));
        }
    }
    if problems.is_empty() {
        HypothesisStatus {
            status: Status::Satisfied,
            detail: format!(
                "r_n strictly increasing and eps_n non-increasing over {} stage(s)",
                steps.len()
            ),
        }
    } else {
        HypothesisStatus {
            status: Status::Warning,
            detail: problems.join("; "),
        }
    }
}

/// Runs every stage and assembles the certificate.
pub fn certify<F: Scalar>(spec: &ScenarioSpec<F>, settings: &Settings) -> Result<Certificate> {
    spec.validate()?;
    let tol = settings.tolerance;
    let steps = (1..=spec.stages.len())
        .into_par_iter()
        .map(|n| verify_step(spec, n, settings))
        .collect::<Result<Vec<_>>>()?;

    let limits = limits_status(spec, &steps);
    let generator = if spec.generator.value {
        HypothesisStatus {
            status: Status::Declared,
            detail: format!("declared, not verified: {}", spec.generator.justification),
        }
    } else {
        HypothesisStatus {
            status: Status::NotDeclared,
            detail: "the time-zero partition is not declared a generator".to_string(),
        }
    };
    let bad_closeness = steps.iter().find(|s| !s.eps_ok);
    let closeness = match bad_closeness {
        None => HypothesisStatus {
            status: Status::Satisfied,
            detail: format!("eps* <= eps_n at all {} stage(s)", steps.len()),
        },
        Some(s) => HypothesisStatus {
            status: Status::Failed,
            detail: closeness_failure(s),
        },
    };

    let h_mu0_exact = ks_entropy_closed_form(&spec.mu0).map(canonical);
    let conclusion_mode = if h_mu0_exact.is_some() {
        ConclusionMode::Exact
    } else {
        ConclusionMode::FiniteEvidence
    };
    let usable: Vec<&CertificateStep> = steps.iter().filter(|s| s.usable).collect();
    let broken_chain = usable.iter().find(|s| s.chain_holds == Some(false));
    let average_below_target = steps.iter().find(|s| spec.target_h > s.h_mu0_average + tol);

    let fail = |check: &str, stage: Option<usize>, witness: Option<String>, reason: String| {
        (
            Verdict::Fail,
            reason,
            Some(Failure {
                check: check.to_string(),
                stage,
                witness,
            }),
        )
    };
    let (verdict, reason, failure) = if let Some(s) = bad_closeness {
        fail(
            "closeness",
            Some(s.n),
            Some(s.witness_label.clone()),
            format!("closeness condition fails at {}", closeness_failure(s)),
        )
    } else if let Some(s) = broken_chain {
        fail(
            "entropy comparison",
            Some(s.n),
            None,
            format!(
                "entropy comparison fails at stage {}: {} > {}",
                s.n,
                s.chain_lhs,
                s.chain_rhs.unwrap_or(f64::NAN)
            ),
        )
    } else if let Some(h) = h_mu0_exact.filter(|h| *h < spec.target_h - tol) {
        fail(
            "target",
            None,
            Some(format!("exact entropy rate of mu0 = {h}")),
            format!(
                "target h = {} exceeds the exact entropy rate of mu0 = {h}",
                spec.target_h
            ),
        )
    } else if let Some(s) = average_below_target.filter(|_| h_mu0_exact.is_none()) {
        fail(
            "target",
            Some(s.n),
            Some(format!("H_mu0(r)/r = {} at r = {}", s.h_mu0_average, s.r)),
            format!(
                "target h = {} exceeds H_mu0(r)/r = {} at stage {}, an upper bound on the entropy rate of mu0",
                spec.target_h, s.h_mu0_average, s.n
            ),
        )
    } else if !spec.generator.value {
        (
            Verdict::Inconclusive,
            "generator hypothesis not declared".to_string(),
            None,
        )
    } else if let Some(h) = h_mu0_exact {
        (
            Verdict::Pass,
            format!(
                "all stage checks hold and the exact entropy rate of mu0 = {h} >= target h = {}",
                spec.target_h
            ),
            None,
        )
    } else {
        match usable.last() {
            None => (
                Verdict::Inconclusive,
                "no stage has eps_n < 1/6, so no entropy comparison was available".to_string(),
                None,
            ),
            Some(s) if s.stage_bound.is_some_and(|b| b >= spec.target_h - tol) => (
                Verdict::Pass,
                format!(
                    "all finite-stage hypotheses and entropy comparisons verified; stage bound L_{} = {} >= target h = {}",
                    s.n,
                    s.stage_bound.unwrap_or(f64::NAN),
                    spec.target_h
                ),
                None,
            ),
            Some(s) => (
                Verdict::Inconclusive,
                format!(
                    "all finite-stage checks hold but the last stage bound L_{} = {} is below target h = {}",
                    s.n,
                    s.stage_bound.unwrap_or(f64::NAN),
                    spec.target_h
                ),
                None,
            ),
        }
    };

    let mut notes = vec![
        "The entropy lower bound is a statement about the limit of the stages; the certificate lists the finite-stage facts that were checked.".to_string(),
        "The entropy of each approximating measure is represented by the upper bound H_mun(r_n)/r_n.".to_string(),
        "Passing from the partition entropy h(mun, xi) to h(mun) relies on the declared generator hypothesis, which is not checked.".to_string(),
    ];
    if conclusion_mode == ConclusionMode::FiniteEvidence {
        notes.push(
            "Stage bounds L_n lower-bound H_mu0(r_n)/r_n, which decreases to the entropy rate of mu0; they are not themselves lower bounds on that rate.".to_string(),
        );
    }
    if let Some(m) = spec.coarsen_m {
        notes.push(format!(
            "Stages use the partition into {m} atoms: symbols 0..{} kept, the rest merged.",
            m - 1
        ));
    }
    let skipped: Vec<String> = steps
        .iter()
        .filter(|s| !s.lemma_applicable)
        .map(|s| s.n.to_string())
        .collect();
    if !skipped.is_empty() {
        notes.push(format!(
            "Stages {} have eps_n >= 1/6 and are excluded from the entropy comparison.",
            skipped.join(", ")
        ));
    }

    let mut cert = Certificate {
        mode: F::MODE,
        alphabet_size: spec.mu0.symbols(),
        coarsen_m: spec.coarsen_m,
        target_h: spec.target_h,
        tolerance: tol,
        steps,
        hypotheses: HypothesisReport {
            limits,
            generator,
            closeness,
        },
        conclusion_mode,
        h_mu0_exact,
        verdict,
        reason,
        failure,
        notes,
        audit: Vec::new(),
    };
    cert.audit = audit_entries(&cert);
    Ok(cert)
}

fn audit_entries(cert: &Certificate) -> Vec<AuditEntry> {
    let mut out = Vec::new();
    let mut push =
        |stage: Option<usize>, quantity: &str, formula: &str, value: String, role: &str| {
            out.push(AuditEntry {
                stage,
                quantity: quantity.to_string(),
                formula: formula.to_string(),
                value,
                role: role.to_string(),
            })
        };
    for s in &cert.steps {
        let n = Some(s.n);
        push(
            n,
            "eps_star",
            "max over |A|=r+1 of |mu0(A)/mun(A) - 1|",
            s.eps_star.to_string(),
            "least closeness constant on cylinders",
        );
        push(
            n,
            "eps_ok",
            "eps_star <= eps_n",
            format!("{} <= {}: {}", s.eps_star, s.eps_n, s.eps_ok),
            "closeness condition on cylinders",
        );
        push(
            n,
            "c_n",
            "2 * eps_n",
            s.c_n.to_string(),
            "flip step |a-b| <= eps b => |a-b| <= 2 eps a",
        );
        push(
            n,
            "lemma_applicable",
            "c_n < 1/3",
            s.lemma_applicable.to_string(),
            "hypothesis of the entropy comparison",
        );
        push(
            n,
            "H_mun",
            "-sum over |w|=r of mun(w) ln mun(w)",
            s.h_mun.to_string(),
            "block entropy of the approximating measure",
        );
        push(
            n,
            "H_mu0",
            "-sum over |w|=r of mu0(w) ln mu0(w)",
            s.h_mu0.to_string(),
            "block entropy of the reference measure",
        );
        push(
            n,
            "h_mun_upper",
            "H_mun / r",
            s.h_mun_upper.to_string(),
            "upper bound on the entropy of the approximating measure",
        );
        if let (Some(rhs), Some(slack)) = (s.chain_rhs, s.chain_slack) {
            push(
                n,
                "chain",
                "H_mun <= (1 + c_n) H_mu0 + c_n ln 3",
                format!("{} <= {rhs} (slack {slack})", s.chain_lhs),
                "entropy comparison under multiplicative closeness",
            );
        }
        if let Some(b) = s.stage_bound {
            push(
                n,
                "stage_bound",
                "(H_mun / r - c_n ln 3 / r) / (1 + c_n)",
                b.to_string(),
                "per-stage consequence of the comparison",
            );
        }
    }
    if let Some(h) = cert.h_mu0_exact {
        push(
            None,
            "h_mu0_exact",
            "closed-form entropy rate of mu0",
            h.to_string(),
            "conclusion compared against target",
        );
    }
    push(
        None,
        "target_h",
        "declared",
        cert.target_h.to_string(),
        "lower bound to certify",
    );
    out
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Satisfied => "satisfied",
        Status::Warning => "warning",
        Status::Declared => "declared",
        Status::NotDeclared => "not declared",
        Status::Failed => "FAILED",
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| v.to_string())
}

/// Human-readable report. Numbers are printed exactly as stored, so the
/// table and the JSON carry the same values.
pub fn render_table(cert: &Certificate) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "verdict: {:?}", cert.verdict);
    let _ = writeln!(s, "reason: {}", cert.reason);
    if let Some(f) = &cert.failure {
        let _ = writeln!(
            s,
            "first failing check: {}{}{}",
            f.check,
            f.stage
                .map(|n| format!(" at stage {n}"))
                .unwrap_or_default(),
            f.witness
                .as_ref()
                .map(|w| format!(", witness: {w}"))
                .unwrap_or_default()
        );
    }
    let mode = match cert.conclusion_mode {
        ConclusionMode::Exact => "exact",
        ConclusionMode::FiniteEvidence => "finite-evidence",
    };
    let _ = writeln!(
        s,
        "mode: {mode} ({:?} arithmetic), alphabet size {}",
        cert.mode, cert.alphabet_size
    );
    let _ = writeln!(s, "target h: {}", cert.target_h);
    if let Some(h) = cert.h_mu0_exact {
        let _ = writeln!(s, "exact entropy rate of mu0: {h}");
    }
    let h = &cert.hypotheses;
    let _ = writeln!(s, "hypotheses:");
    let _ = writeln!(
        s,
        "  limits     {}: {}",
        status_word(h.limits.status),
        h.limits.detail
    );
    let _ = writeln!(
        s,
        "  generator  {}: {}",
        status_word(h.generator.status),
        h.generator.detail
    );
    let _ = writeln!(
        s,
        "  closeness  {}: {}",
        status_word(h.closeness.status),
        h.closeness.detail
    );
    let _ = writeln!(s, "stages:");
    for st in &cert.steps {
        let chain = match (st.chain_rhs, st.chain_slack) {
            (Some(rhs), Some(slack)) => format!("{} <= {rhs} slack {slack}", st.chain_lhs),
            _ => "not applicable (c_n >= 1/3)".to_string(),
        };
        let _ = writeln!(
            s,
            "  n={} r={} eps*={} eps_n={} ok={} c_n={} witness={} H_mun={} H_mu0={} chain: {} L={}",
            st.n,
            st.r,
            st.eps_star,
            st.eps_n,
            st.eps_ok,
            st.c_n,
            st.witness_label,
            st.h_mun,
            st.h_mu0,
            chain,
            opt(st.stage_bound)
        );
    }
    let _ = writeln!(s, "audit:");
    for a in &cert.audit {
        let stage = a.stage.map(|n| format!("[{n}] ")).unwrap_or_default();
        let _ = writeln!(
            s,
            "  {stage}{} = {}  ({}; {})",
            a.quantity, a.value, a.formula, a.role
        );
    }
    let _ = writeln!(s, "notes:");
    for n in &cert.notes {
        let _ = writeln!(s, "  - {n}");
    }
    s
}

pub fn to_json(cert: &Certificate) -> String {
    serde_json::to_string_pretty(cert).expect("certificate serializes")
}

pub fn from_json(text: &str) -> Result<Certificate> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("certificate: {e}")))
}

/// One row of the coarsening grid: a measure's entropy estimates at each
/// partition size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemarkRow {
    /// 0 for `mu0`, otherwise the stage index.
    pub n: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemarkGrid {
    pub depth: usize,
    pub m_values: Vec<usize>,
    pub rows: Vec<RemarkRow>,
}

/// `(1/r) H(r)` of every measure in the scenario, under the partition into
/// `m` atoms for each requested `m`.
pub fn remark_grid<F: Scalar>(
    spec: &ScenarioSpec<F>,
    m_values: &[usize],
    depth: usize,
    budget: u64,
) -> Result<RemarkGrid> {
    if depth == 0 {
        return Err(Error::validation("depth must be positive"));
    }
    let measures: Vec<&ShiftMeasure<F>> = std::iter::once(&spec.mu0)
        .chain(spec.stages.iter().map(|s| &s.mun))
        .collect();
    let rows = measures
        .par_iter()
        .enumerate()
        .map(|(n, mu)| {
            let values = m_values
                .iter()
                .map(|&m| match coarsen_to_atoms(mu, m)? {
                    None => Ok(0.0),
                    Some(c) => Ok(canonical(block_entropy(&c, depth, budget)? / depth as f64)),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(RemarkRow { n, values })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RemarkGrid {
        depth,
        m_values: m_values.to_vec(),
        rows,
    })
}
