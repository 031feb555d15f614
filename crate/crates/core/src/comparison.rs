//! Multiplicative closeness between measures and the entropy comparison it
//! buys.
//!
//! Two distributions are `c`-close when `|p_i - q_i| <= c q_i` for every
//! atom. Closeness is read off the extremes of the likelihood ratio
//! `p_i / q_i`: the least admissible `c` is
//! `max(ratio_max - 1, 1 - ratio_min)`. Atoms where both sides vanish are
//! ignored; an atom with `q_i = 0 < p_i` makes the constant infinite.
//!
//! For cylinder partitions of Bernoulli and Markov measures the ratio of a
//! word is a product along a path in the transition graph, so its extremes
//! come from a max/min path recursion in `O(k^2 r)` instead of `k^(r+1)`
//! enumeration.

use std::cmp::Ordering;
use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{shannon_entropy, ProbVector};
use crate::error::{Error, Result};
use crate::numeric::{half, sum, third, two, Extended, Scalar};
use crate::shiftspace::{CylinderWord, MarkovChain, ShiftMeasure};

/// `ln 3`, the constant in the entropy comparison bound.
pub const LN_3: f64 = 1.098_612_288_668_109_7;

/// Slack allowed when checking the entropy comparison bound numerically.
pub const COMPARISON_TOL: f64 = 1e-9;

/// Where an extremal ratio is attained.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Index(usize),
    Word(CylinderWord),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport<F> {
    /// Least `c` with `|p_i - q_i| <= c q_i` on every atom.
    pub c_star: Extended<F>,
    pub ratio_max: Extended<F>,
    pub ratio_min: F,
    pub witness_max: Witness,
    pub witness_min: Witness,
    /// Cylinder depth `r` (words of length `r + 1`), when comparing measures.
    pub depth: Option<usize>,
}

impl<F: Scalar> ComparisonReport<F> {
    fn from_extremes(ext: RatioExtremes<F>, depth: Option<usize>) -> Result<Self> {
        let (ratio_max, witness_max) = ext.max.ok_or_else(|| {
            Error::Domain("no atom carries mass under the reference measure".into())
        })?;
        let (ratio_min, witness_min) = ext.min.ok_or_else(|| {
            Error::Domain("no atom carries mass under the reference measure".into())
        })?;
        let c_star = match &ratio_max {
            Extended::Infinite => Extended::Infinite,
            Extended::Finite(hi) => {
                let up = hi.clone() - F::one();
                let down = F::one() - ratio_min.clone();
                Extended::Finite(if up >= down { up } else { down })
            }
        };
        Ok(Self {
            c_star,
            ratio_max,
            ratio_min,
            witness_max,
            witness_min,
            depth,
        })
    }

    /// The atom attaining `c_star`; lexicographically least on ties.
    pub fn witness(&self) -> &Witness {
        let Extended::Finite(hi) = &self.ratio_max else {
            return &self.witness_max;
        };
        let up = hi.clone() - F::one();
        let down = F::one() - self.ratio_min.clone();
        match up.partial_cmp(&down) {
            Some(Ordering::Greater) => &self.witness_max,
            Some(Ordering::Less) => &self.witness_min,
            _ => (&self.witness_max).min(&self.witness_min),
        }
    }
}

/// Running extremes of `a / b`. Ties keep the earlier witness, so feeding
/// atoms in lexicographic order yields lexicographically least witnesses.
struct RatioExtremes<F> {
    max: Option<(Extended<F>, Witness)>,
    min: Option<(F, Witness)>,
}

impl<F: Scalar> RatioExtremes<F> {
    fn new() -> Self {
        Self {
            max: None,
            min: None,
        }
    }

    fn observe(&mut self, a: &F, b: &F, witness: impl Fn() -> Witness) {
        let ratio = if b.is_zero() {
            if a.is_zero() {
                return;
            }
            Extended::Infinite
        } else {
            Extended::Finite(a.clone() / b.clone())
        };
        let raise = match (&self.max, &ratio) {
            (None, _) => true,
            (Some((Extended::Infinite, _)), _) => false,
            (Some(_), Extended::Infinite) => true,
            (Some((Extended::Finite(m), _)), Extended::Finite(x)) => x > m,
        };
        if let Extended::Finite(x) = &ratio {
            let lower = match &self.min {
                None => true,
                Some((m, _)) => x < m,
            };
            if lower {
                self.min = Some((x.clone(), witness()));
            }
        }
        if raise {
            self.max = Some((ratio, witness()));
        }
    }

    /// Combines with extremes over atoms that come later in order.
    fn merge(mut self, later: Self) -> Self {
        if let Some((x, w)) = later.max {
            let raise = match &self.max {
                None => true,
                Some((Extended::Infinite, _)) => false,
                Some((Extended::Finite(m), _)) => match &x {
                    Extended::Infinite => true,
                    Extended::Finite(x) => x > m,
                },
            };
            if raise {
                self.max = Some((x, w));
            }
        }
        if let Some((x, w)) = later.min {
            if self.min.as_ref().is_none_or(|(m, _)| &x < m) {
                self.min = Some((x, w));
            }
        }
        self
    }
}

/// Least `c` with `|p_i - q_i| <= c q_i` for all `i`, using `0/0 -> 0`
/// and `positive/0 -> +inf`.
pub fn minimal_c<F: Scalar>(p: &ProbVector<F>, q: &ProbVector<F>) -> Result<ComparisonReport<F>> {
    if p.len() != q.len() {
        return Err(Error::validation(format!(
            "length mismatch: p has {} entries, q has {}",
            p.len(),
            q.len()
        )));
    }
    let mut ext = RatioExtremes::new();
    for (i, (a, b)) in p.weights().iter().zip(q.weights()).enumerate() {
        ext.observe(a, b, || Witness::Index(i));
    }
    ComparisonReport::from_extremes(ext, None)
}

/// `(1 + c) H(q) + c ln 3`, valid for `0 < c < 1/3`; `c = 0` gives `H(q)`.
pub fn lemma1_upper_bound(hq: f64, c: f64) -> Result<f64> {
    if hq.is_nan() || hq < 0.0 {
        return Err(Error::Domain(format!(
            "entropy must be nonnegative, got {hq}"
        )));
    }
    if c.is_nan() || c < 0.0 {
        return Err(Error::Domain(format!(
            "closeness constant must be nonnegative, got {c}"
        )));
    }
    if c >= 1.0 / 3.0 {
        return Err(Error::OutOfHypothesis(format!(
            "entropy comparison needs c < 1/3, got c = {c}"
        )));
    }
    Ok(comparison_bound(hq, c))
}

pub(crate) fn comparison_bound(hq: f64, c: f64) -> f64 {
    if c == 0.0 {
        hq
    } else {
        (1.0 + c) * hq + c * LN_3
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma1Check<F> {
    pub c_star: Extended<F>,
    /// `c_star < 1/3`.
    pub applicable: bool,
    /// `H(p)`.
    pub lhs: f64,
    /// `(1 + c_star) H(q) + c_star ln 3`, when applicable.
    pub rhs: Option<f64>,
    pub slack: Option<f64>,
    pub holds: Option<bool>,
}

/// Evaluates both sides of the entropy comparison bound at the minimal
/// closeness constant of `(p, q)`.
pub fn check_lemma1<F: Scalar>(p: &ProbVector<F>, q: &ProbVector<F>) -> Result<Lemma1Check<F>> {
    let report = minimal_c(p, q)?;
    let lhs = shannon_entropy(p);
    let applicable = report.c_star.finite().is_some_and(|c| c < &third::<F>());
    let (rhs, slack, holds) = if applicable {
        let c = report.c_star.to_f64();
        let rhs = comparison_bound(shannon_entropy(q), c);
        (
            Some(rhs),
            Some(rhs - lhs),
            Some(lhs <= rhs + COMPARISON_TOL),
        )
    } else {
        (None, None, None)
    };
    Ok(Lemma1Check {
        c_star: report.c_star,
        applicable,
        lhs,
        rhs,
        slack,
        holds,
    })
}

/// Turns `|a - b| <= eps b` into `|a - b| <= 2 eps a`, valid for
/// `eps <= 1/2`. Returns `2 eps`.
pub fn flip_epsilon<F: Scalar>(eps: &F) -> Result<F> {
    if eps.is_negative() {
        return Err(Error::Domain(format!(
            "epsilon must be nonnegative, got {eps}"
        )));
    }
    if eps > &half::<F>() {
        return Err(Error::OutOfHypothesis(format!(
            "flipping the closeness condition needs epsilon <= 1/2, got {eps}"
        )));
    }
    Ok(two::<F>() * eps.clone())
}

/// Outcome of checking closeness on a union of cylinders.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCheck<F> {
    /// Closeness constant of the atoms at this depth.
    pub epsilon: Extended<F>,
    pub mu_mass: F,
    pub nu_mass: F,
    /// `|mu(B) - nu(B)| / nu(B)`, zero when both masses vanish.
    pub achieved: Extended<F>,
    pub holds: bool,
}

/// Checks `|mu(B) - nu(B)| <= eps nu(B)` for `B` the union of `subset`,
/// with `eps` the atom-level closeness constant at `depth`.
pub fn aggregate_closeness<F: Scalar>(
    mu: &ShiftMeasure<F>,
    nu: &ShiftMeasure<F>,
    depth: usize,
    subset: &[CylinderWord],
    budget: u64,
) -> Result<AggregateCheck<F>> {
    let mut seen = HashSet::with_capacity(subset.len());
    for w in subset {
        if w.len() != depth + 1 {
            return Err(Error::validation(format!(
                "word {w} has length {}, expected {}",
                w.len(),
                depth + 1
            )));
        }
        if !seen.insert(w) {
            return Err(Error::validation(format!("duplicate word {w} in subset")));
        }
    }
    let epsilon = epsilon_star(mu, nu, depth, Method::Auto, budget)?.c_star;
    let mu_mass = sum(subset
        .iter()
        .map(|w| mu.cylinder_measure(w))
        .collect::<Result<Vec<_>>>()?);
    let nu_mass = sum(subset
        .iter()
        .map(|w| nu.cylinder_measure(w))
        .collect::<Result<Vec<_>>>()?);
    let diff = (mu_mass.clone() - nu_mass.clone()).abs();
    let achieved = if nu_mass.is_zero() {
        if diff.is_zero() {
            Extended::Finite(F::zero())
        } else {
            Extended::Infinite
        }
    } else {
        Extended::Finite(diff.clone() / nu_mass.clone())
    };
    let holds = match &epsilon {
        Extended::Infinite => true,
        Extended::Finite(e) => diff <= e.clone() * nu_mass.clone(),
    };
    Ok(AggregateCheck {
        epsilon,
        mu_mass,
        nu_mass,
        achieved,
        holds,
    })
}

/// How [`epsilon_star`] finds the ratio extremes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Path recursion; Bernoulli and Markov measures only.
    Dp,
    /// Enumerates every cylinder.
    Brute,
    /// `Dp` when both measures support it, otherwise `Brute`.
    Auto,
}

/// Least `eps` with `|mu0(A) - mun(A)| <= eps mun(A)` for every cylinder
/// `A` on coordinates `0..=depth`.
pub fn epsilon_star<F: Scalar>(
    mu0: &ShiftMeasure<F>,
    mun: &ShiftMeasure<F>,
    depth: usize,
    method: Method,
    budget: u64,
) -> Result<ComparisonReport<F>> {
    if mu0.symbols() != mun.symbols() {
        return Err(Error::validation(format!(
            "measures live on alphabets of different sizes ({} and {})",
            mu0.symbols(),
            mun.symbols()
        )));
    }
    let chains = mu0.as_chain().zip(mun.as_chain());
    match (method, chains) {
        (Method::Dp | Method::Auto, Some((a, b))) => ratio_extremes_dp(&a, &b, depth),
        (Method::Dp, None) => Err(Error::Unsupported(
            "the path recursion needs Bernoulli or Markov measures; use brute force for lumped measures"
                .into(),
        )),
        (Method::Brute | Method::Auto, _) => ratio_extremes_brute(mu0, mun, depth, budget),
    }
}

fn ratio_extremes_brute<F: Scalar>(
    mu0: &ShiftMeasure<F>,
    mun: &ShiftMeasure<F>,
    depth: usize,
    budget: u64,
) -> Result<ComparisonReport<F>> {
    let len = depth + 1;
    crate::shiftspace::check_budget(mu0.symbols(), len, budget)?;
    let shards: Vec<Result<RatioExtremes<F>>> = (0..mu0.symbols())
        .into_par_iter()
        .map(|s| {
            let mut a = mu0.cylinders_with_prefix(len, &[s], budget)?;
            let mut b = mun.cylinders_with_prefix(len, &[s], budget)?;
            let mut ext = RatioExtremes::new();
            while let (Some((w, pa)), Some((_, pb))) = (a.next_ref(), b.next_ref()) {
                ext.observe(&pa, &pb, || Witness::Word(CylinderWord::from(w)));
            }
            Ok(ext)
        })
        .collect();
    let mut ext = RatioExtremes::new();
    for shard in shards {
        ext = ext.merge(shard?);
    }
    ComparisonReport::from_extremes(ext, Some(depth))
}

/// A factor `a / b` of a path ratio, classified by which side vanishes.
#[derive(Debug, Clone)]
enum Factor<F> {
    Ratio(F),
    /// `a = 0 < b`: the word has ratio 0.
    Zero,
    /// `a > 0 = b`: the word has ratio `+inf`.
    Inf,
    /// Both vanish: the word is ignored.
    Null,
}

impl<F: Scalar> Factor<F> {
    fn of(a: &F, b: &F) -> Self {
        match (a.is_zero(), b.is_zero()) {
            (false, false) => Factor::Ratio(a.clone() / b.clone()),
            (true, false) => Factor::Zero,
            (false, true) => Factor::Inf,
            (true, true) => Factor::Null,
        }
    }

    fn then(&self, next: &Factor<F>) -> Factor<F> {
        match (self, next) {
            (Factor::Null, _) | (_, Factor::Null) => Factor::Null,
            (Factor::Ratio(x), Factor::Ratio(y)) => Factor::Ratio(x.clone() * y.clone()),
            (Factor::Zero, Factor::Inf) | (Factor::Inf, Factor::Zero) => Factor::Null,
            (Factor::Zero, _) | (_, Factor::Zero) => Factor::Zero,
            (Factor::Inf, _) | (_, Factor::Inf) => Factor::Inf,
        }
    }
}

/// What the suffixes leaving one state can produce: extremes over
/// all-positive paths, and whether a zero-ratio or infinite-ratio path
/// exists.
#[derive(Debug, Clone)]
struct Reach<F> {
    max: Option<F>,
    min: Option<F>,
    zero: bool,
    inf: bool,
}

impl<F: Scalar> Reach<F> {
    fn empty() -> Self {
        Self {
            max: None,
            min: None,
            zero: false,
            inf: false,
        }
    }

    fn unit() -> Self {
        Self {
            max: Some(F::one()),
            min: Some(F::one()),
            zero: false,
            inf: false,
        }
    }

    fn after(factor: &Factor<F>, s: &Reach<F>) -> Self {
        let positive = s.max.is_some();
        match factor {
            Factor::Ratio(e) => Self {
                max: s.max.as_ref().map(|m| e.clone() * m.clone()),
                min: s.min.as_ref().map(|m| e.clone() * m.clone()),
                zero: s.zero,
                inf: s.inf,
            },
            Factor::Zero => Self {
                zero: positive || s.zero,
                ..Self::empty()
            },
            Factor::Inf => Self {
                inf: positive || s.inf,
                ..Self::empty()
            },
            Factor::Null => Self::empty(),
        }
    }

    fn union(mut self, other: Self) -> Self {
        self.max = match (self.max, other.max) {
            (Some(a), Some(b)) => Some(if b > a { b } else { a }),
            (a, b) => a.or(b),
        };
        self.min = match (self.min, other.min) {
            (Some(a), Some(b)) => Some(if b < a { b } else { a }),
            (a, b) => a.or(b),
        };
        self.zero |= other.zero;
        self.inf |= other.inf;
        self
    }
}

#[derive(Debug, Clone)]
enum Target<F> {
    Max(F),
    Min(F),
    Zero,
    Inf,
}

impl<F: Scalar> Target<F> {
    fn reachable(&self, prefix: &Factor<F>, suffix: &Reach<F>) -> bool {
        match (self, prefix) {
            (Target::Max(v), Factor::Ratio(x)) => suffix
                .max
                .as_ref()
                .is_some_and(|m| (x.clone() * m.clone()).matches(v)),
            (Target::Min(v), Factor::Ratio(x)) => suffix
                .min
                .as_ref()
                .is_some_and(|m| (x.clone() * m.clone()).matches(v)),
            (Target::Zero, Factor::Ratio(_)) => suffix.zero,
            (Target::Zero, Factor::Zero) => suffix.max.is_some() || suffix.zero,
            (Target::Inf, Factor::Ratio(_)) => suffix.inf,
            (Target::Inf, Factor::Inf) => suffix.max.is_some() || suffix.inf,
            _ => false,
        }
    }
}

struct PathTables<'a, F> {
    mu0: &'a MarkovChain<F>,
    mun: &'a MarkovChain<F>,
    /// `suffix[t][s]`: paths over positions `t..=depth` starting in `s`.
    suffix: Vec<Vec<Reach<F>>>,
}

impl<F: Scalar> PathTables<'_, F> {
    fn initial(&self, s: usize) -> Factor<F> {
        Factor::of(&self.mu0.pi().weights()[s], &self.mun.pi().weights()[s])
    }

    fn edge(&self, i: usize, j: usize) -> Factor<F> {
        Factor::of(
            self.mu0.transition().get(i, j),
            self.mun.transition().get(i, j),
        )
    }

    /// Lexicographically least word whose ratio meets `target`.
    fn witness(&self, target: &Target<F>) -> Result<CylinderWord> {
        let k = self.mu0.states();
        let mut word = Vec::with_capacity(self.suffix.len());
        let mut prefix: Option<Factor<F>> = None;
        for t in 0..self.suffix.len() {
            let found = (0..k).find_map(|s| {
                let f = match (&prefix, word.last()) {
                    (None, _) => self.initial(s),
                    (Some(p), Some(&last)) => p.then(&self.edge(last, s)),
                    (Some(_), None) => unreachable!(),
                };
                target.reachable(&f, &self.suffix[t][s]).then_some((s, f))
            });
            let Some((s, f)) = found else {
                return Err(Error::Domain(format!(
                    "could not reconstruct an extremal word at position {t}"
                )));
            };
            word.push(s);
            prefix = Some(f);
        }
        Ok(CylinderWord::new(word))
    }
}

fn ratio_extremes_dp<F: Scalar>(
    mu0: &MarkovChain<F>,
    mun: &MarkovChain<F>,
    depth: usize,
) -> Result<ComparisonReport<F>> {
    let k = mu0.states();
    let mut tables = PathTables {
        mu0,
        mun,
        suffix: Vec::with_capacity(depth + 1),
    };
    let mut next: Vec<Reach<F>> = vec![Reach::unit(); k];
    let mut rev = vec![next.clone()];
    for _ in 0..depth {
        let cur: Vec<Reach<F>> = (0..k)
            .map(|i| {
                (0..k).fold(Reach::empty(), |acc, j| {
                    acc.union(Reach::after(&tables.edge(i, j), &next[j]))
                })
            })
            .collect();
        rev.push(cur.clone());
        next = cur;
    }
    rev.reverse();
    tables.suffix = rev;
    let total = (0..k).fold(Reach::empty(), |acc, s| {
        acc.union(Reach::after(&tables.initial(s), &tables.suffix[0][s]))
    });

    let (ratio_max, max_target) = if total.inf {
        (Extended::Infinite, Target::Inf)
    } else if let Some(m) = total.max.clone() {
        (Extended::Finite(m.clone()), Target::Max(m))
    } else if total.zero {
        (Extended::Finite(F::zero()), Target::Zero)
    } else {
        return Err(Error::Domain(
            "no cylinder carries mass under the reference measure".into(),
        ));
    };
    let (ratio_min, min_target) = if total.zero {
        (F::zero(), Target::Zero)
    } else if let Some(m) = total.min.clone() {
        (m.clone(), Target::Min(m))
    } else {
        return Err(Error::Domain(
            "no cylinder carries mass under the reference measure".into(),
        ));
    };
    let ext = RatioExtremes {
        max: Some((ratio_max, Witness::Word(tables.witness(&max_target)?))),
        min: Some((ratio_min, Witness::Word(tables.witness(&min_target)?))),
    };
    ComparisonReport::from_extremes(ext, Some(depth))
}
