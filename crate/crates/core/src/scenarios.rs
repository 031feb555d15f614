//! Perturbation families with known ground truth.
//!
//! A family moves a base measure toward a direction `Q` by
//! `(1 - t_n) P + t_n Q` along a schedule `t_n -> 0`, checked at depths
//! `r_n -> inf`. The base is `mu0`, so its closed-form entropy rate is the
//! truth every certificate can be compared against.

use rayon::prelude::*;

use crate::certifier::{GeneratorDeclaration, ScenarioSpec, Stage};
use crate::comparison::{epsilon_star, Method};
use crate::entropy::{ks_entropy_closed_form, ProbVector};
use crate::error::{Error, Result};
use crate::numeric::{Extended, Scalar};
use crate::shiftspace::{MeasureKind, ShiftMeasure, StochasticMatrix};

/// What the base is pushed toward.
#[derive(Debug, Clone, PartialEq)]
pub enum Direction<F> {
    Matrix(StochasticMatrix<F>),
    Weights(ProbVector<F>),
}

impl<F: Scalar> Direction<F> {
    fn dim(&self) -> usize {
        match self {
            Direction::Matrix(q) => q.dim(),
            Direction::Weights(w) => w.len(),
        }
    }

    fn as_matrix(&self) -> StochasticMatrix<F> {
        match self {
            Direction::Matrix(q) => q.clone(),
            Direction::Weights(w) => StochasticMatrix::repeated_row(w),
        }
    }
}

/// `(1 - t) base + t Q`. Bernoulli bases with a weight direction stay
/// Bernoulli; everything else becomes a Markov measure with a recomputed
/// stationary distribution.
pub fn perturb<F: Scalar>(
    base: &ShiftMeasure<F>,
    direction: &Direction<F>,
    t: &F,
) -> Result<ShiftMeasure<F>> {
    if t.is_negative() || *t > F::one() {
        return Err(Error::validation(format!(
            "perturbation size must lie in [0, 1], got {t}"
        )));
    }
    if direction.dim() != base.symbols() {
        return Err(Error::validation(format!(
            "direction has dimension {} but the base has {} symbols",
            direction.dim(),
            base.symbols()
        )));
    }
    if t.is_zero() {
        return Ok(base.clone());
    }
    let measure = match (base.kind(), direction) {
        (MeasureKind::Bernoulli(p), Direction::Weights(q)) => {
            ShiftMeasure::bernoulli(p.mix(q, t)?.weights().to_vec())?
        }
        (MeasureKind::Lumped(_), _) => {
            return Err(Error::Unsupported("perturbation of lumped measures".into()));
        }
        _ => {
            let p = base
                .as_chain()
                .expect("Bernoulli or Markov")
                .transition()
                .clone();
            let mixed = p.mix(&direction.as_matrix(), t)?;
            ShiftMeasure::markov(mixed.rows().to_vec(), None)?
        }
    };
    measure.with_alphabet(base.alphabet().clone())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationFamily<F> {
    pub base: ShiftMeasure<F>,
    pub direction: Direction<F>,
    /// Perturbation sizes `t_1 > t_2 > ... > 0`.
    pub schedule: Vec<F>,
    /// Cylinder depths `r_1 < r_2 < ...`.
    pub depth_schedule: Vec<usize>,
}

impl<F: Scalar> PerturbationFamily<F> {
    pub fn new(
        base: ShiftMeasure<F>,
        direction: Direction<F>,
        schedule: Vec<F>,
        depth_schedule: Vec<usize>,
    ) -> Result<Self> {
        if schedule.len() != depth_schedule.len() {
            return Err(Error::validation(format!(
                "schedule has {} entries but depth schedule has {}",
                schedule.len(),
                depth_schedule.len()
            )));
        }
        if schedule.iter().any(|t| !t.is_positive() || *t > F::one()) {
            return Err(Error::validation("perturbation sizes must lie in (0, 1]"));
        }
        if schedule.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::validation(
                "perturbation sizes must strictly decrease",
            ));
        }
        if depth_schedule.first() == Some(&0) || depth_schedule.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation(
                "depths must be positive and strictly increase",
            ));
        }
        Ok(Self {
            base,
            direction,
            schedule,
            depth_schedule,
        })
    }

    /// `t_n = t0 2^-n` and `r_n = r0 + n` for `n = 1..=len`.
    pub fn geometric(
        base: ShiftMeasure<F>,
        direction: Direction<F>,
        t0: F,
        r0: usize,
        len: usize,
    ) -> Result<Self> {
        let mut schedule = Vec::with_capacity(len);
        let mut t = t0;
        for _ in 0..len {
            t = t / F::from_ratio(2, 1);
            schedule.push(t.clone());
        }
        let depths = (1..=len).map(|n| r0 + n).collect();
        Self::new(base, direction, schedule, depths)
    }

    pub fn len(&self) -> usize {
        self.schedule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schedule.is_empty()
    }

    /// The `n`-th measure, 1-based.
    pub fn measure(&self, n: usize) -> Result<ShiftMeasure<F>> {
        let t = self.schedule.get(n.wrapping_sub(1)).ok_or_else(|| {
            Error::validation(format!("no stage {n} in a family of length {}", self.len()))
        })?;
        perturb(&self.base, &self.direction, t)
    }
}

/// How declared `eps_n` are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum EpsPolicy<F> {
    /// Exactly the computed `eps*`.
    Computed,
    /// `eps* + margin`.
    Declared { margin: F },
}

/// Scenario with `mu0` = base and `stages` perturbed measures. The target
/// defaults to the base's closed-form entropy rate.
pub fn build_scenario<F: Scalar>(
    family: &PerturbationFamily<F>,
    stages: usize,
    policy: &EpsPolicy<F>,
    target_h: Option<f64>,
    budget: u64,
) -> Result<ScenarioSpec<F>> {
    if stages == 0 || stages > family.len() {
        return Err(Error::validation(format!(
            "requested {stages} stages from a family of length {}",
            family.len()
        )));
    }
    if let EpsPolicy::Declared { margin } = policy {
        if margin.is_negative() {
            return Err(Error::validation("eps margin must be nonnegative"));
        }
    }
    let target_h = match target_h {
        Some(h) => h,
        None => ks_entropy_closed_form(&family.base).ok_or_else(|| {
            Error::Unsupported("no closed-form entropy rate for the base; give a target".into())
        })?,
    };
    let built = (1..=stages)
        .into_par_iter()
        .map(|n| {
            let stage = || -> Result<Stage<F>> {
                let mun = family.measure(n)?;
                let r = family.depth_schedule[n - 1];
                let report = epsilon_star(&family.base, &mun, r, Method::Auto, budget)?;
                let star = match report.c_star {
                    Extended::Finite(c) => c,
                    Extended::Infinite => {
                        return Err(Error::validation(format!(
                            "support mismatch: the perturbed measure vanishes on a cylinder charged by the base, so eps* is infinite at depth {r}"
                        )));
                    }
                };
                let eps = match policy {
                    EpsPolicy::Computed => star,
                    EpsPolicy::Declared { margin } => star + margin.clone(),
                };
                Ok(Stage { mun, r, eps: Some(eps) })
            };
            stage().map_err(|e| Error::Stage { stage: n, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScenarioSpec {
        mu0: family.base.clone(),
        stages: built,
        target_h,
        generator: GeneratorDeclaration {
            value: true,
            justification:
                "the time-zero partition generates the full shift for every invariant measure"
                    .into(),
        },
        coarsen_m: None,
    })
}
