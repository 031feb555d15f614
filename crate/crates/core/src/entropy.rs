//! Shannon and block entropies, closed-form entropy rates, and partition
//! coarsening. All entropies are in nats.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{sum, CompensatedSum, Scalar, PROB_SUM_TOL};
use crate::shiftspace::{lump_onto, Alphabet, MeasureKind, ShiftMeasure};

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector<F> {
    weights: Vec<F>,
}

impl<F: Scalar> ProbVector<F> {
    /// Exact unit sum in rational mode, within [`PROB_SUM_TOL`] for floats.
    pub fn new(weights: Vec<F>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::validation("probability vector is empty"));
        }
        if let Some(i) = weights.iter().position(|w| w.is_negative()) {
            return Err(Error::validation(format!(
                "probability vector has negative entry {} at index {i}",
                weights[i]
            )));
        }
        let total = sum(weights.iter().cloned());
        if !(total.clone() - F::one()).negligible(PROB_SUM_TOL) {
            return Err(Error::validation(format!(
                "probability vector sums to {total}, not 1"
            )));
        }
        Ok(Self { weights })
    }

    pub(crate) fn from_trusted(weights: Vec<F>) -> Self {
        Self { weights }
    }

    pub fn weights(&self) -> &[F] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `(1 - t) self + t other`.
    pub fn mix(&self, other: &Self, t: &F) -> Result<Self> {
        if other.len() != self.len() {
            return Err(Error::validation(format!(
                "dimension mismatch: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        let s = F::one() - t.clone();
        Self::new(
            self.weights
                .iter()
                .zip(&other.weights)
                .map(|(a, b)| s.clone() * a.clone() + t.clone() * b.clone())
                .collect(),
        )
    }
}

/// `-t ln t`, with `phi(0) = 0`.
pub fn phi(t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain(format!("phi is defined for t >= 0, got {t}")));
    }
    Ok(phi_unchecked(t))
}

#[inline]
pub(crate) fn phi_unchecked(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        -t * t.ln()
    }
}

/// `H(p) = sum phi(p_i)`.
pub fn shannon_entropy<F: Scalar>(p: &ProbVector<F>) -> f64 {
    p.weights
        .iter()
        .map(|w| phi_unchecked(w.to_f64()))
        .collect::<CompensatedSum>()
        .value()
}

/// Entropy of the distribution of words of length `len` (the partition
/// generated by coordinates `0..len`).
///
/// Summation is sharded by first symbol, each shard compensated and the
/// shards combined in symbol order, so the value does not depend on how
/// many threads run.
pub fn block_entropy<F: Scalar>(mu: &ShiftMeasure<F>, len: usize, budget: u64) -> Result<f64> {
    if len == 0 {
        return Ok(0.0);
    }
    crate::shiftspace::check_budget(mu.symbols(), len, budget)?;
    let shards: Vec<Result<f64>> = (0..mu.symbols())
        .into_par_iter()
        .map(|s| {
            let mut it = mu.cylinders_with_prefix(len, &[s], budget)?;
            let mut acc = CompensatedSum::new();
            while let Some((_, p)) = it.next_ref() {
                acc.add(phi_unchecked(p.to_f64()));
            }
            Ok(acc.value())
        })
        .collect();
    let mut total = CompensatedSum::new();
    for shard in shards {
        total.add(shard?);
    }
    Ok(total.value())
}

/// Entropy rate in closed form: Bernoulli `H(w)`, Markov
/// `-sum_i pi_i sum_j P_ij ln P_ij`, injective relabelings of a chain
/// inherit the chain's rate. `None` for genuinely lumped measures.
pub fn ks_entropy_closed_form<F: Scalar>(mu: &ShiftMeasure<F>) -> Option<f64> {
    match mu.kind() {
        MeasureKind::Bernoulli(w) => Some(shannon_entropy(w)),
        MeasureKind::Markov(c) => Some(markov_rate(c)),
        MeasureKind::Lumped(l) if l.is_injective() => Some(markov_rate(l.base())),
        MeasureKind::Lumped(_) => None,
    }
}

fn markov_rate<F: Scalar>(c: &crate::shiftspace::MarkovChain<F>) -> f64 {
    let mut acc = CompensatedSum::new();
    for (i, row) in c.transition().rows().iter().enumerate() {
        let pi = c.pi().weights()[i].to_f64();
        for p in row {
            acc.add(pi * phi_unchecked(p.to_f64()));
        }
    }
    acc.value()
}

/// Block entropies `H_r`, averages `H_r / r` and increments for
/// `r = 1..=R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub block_entropies: Vec<f64>,
    pub averages: Vec<f64>,
    /// `H_{r+1} - H_r` for `r = 1..R`.
    pub increments: Vec<f64>,
    pub ks_exact: Option<f64>,
}

impl EntropyReport {
    /// First `r` (1-based) where the average rises by more than `tol`.
    pub fn first_average_increase(&self, tol: f64) -> Option<usize> {
        self.averages
            .windows(2)
            .position(|w| w[1] > w[0] + tol)
            .map(|i| i + 2)
    }

    /// Depths whose average falls below the closed-form rate by more than `tol`.
    pub fn below_rate(&self, tol: f64) -> Vec<usize> {
        match self.ks_exact {
            Some(h) => (1..=self.averages.len())
                .filter(|&r| self.averages[r - 1] < h - tol)
                .collect(),
            None => Vec::new(),
        }
    }
}

pub fn entropy_rate_profile<F: Scalar>(
    mu: &ShiftMeasure<F>,
    max_depth: usize,
    budget: u64,
) -> Result<EntropyReport> {
    if max_depth == 0 {
        return Err(Error::validation("max depth must be at least 1"));
    }
    crate::shiftspace::check_budget(mu.symbols(), max_depth, budget)?;
    let block_entropies = (1..=max_depth)
        .map(|r| block_entropy(mu, r, budget))
        .collect::<Result<Vec<_>>>()?;
    let averages = block_entropies
        .iter()
        .enumerate()
        .map(|(i, h)| h / (i + 1) as f64)
        .collect();
    let increments = block_entropies.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(EntropyReport {
        block_entropies,
        averages,
        increments,
        ks_exact: ks_entropy_closed_form(mu),
    })
}

/// Keeps symbols `0..keep` and merges every symbol with index `>= keep`
/// into one `TAIL` symbol. `keep` equal to the alphabet size returns the
/// measure unchanged.
pub fn coarsen<F: Scalar>(mu: &ShiftMeasure<F>, keep: usize) -> Result<ShiftMeasure<F>> {
    let k = mu.symbols();
    if keep == 0 || keep > k {
        return Err(Error::validation(format!(
            "coarsening must keep between 1 and {k} symbols, got {keep}"
        )));
    }
    if keep == k {
        return Ok(mu.clone());
    }
    let mut labels: Vec<String> = mu.alphabet().labels()[..keep].to_vec();
    let mut tail = String::from("TAIL");
    while labels.contains(&tail) {
        tail.push('*');
    }
    labels.push(tail);
    let alphabet = Alphabet::new(labels)?;
    match mu.kind() {
        MeasureKind::Bernoulli(w) => {
            let mut merged = w.weights()[..keep].to_vec();
            merged.push(sum(w.weights()[keep..].iter().cloned()));
            ShiftMeasure::bernoulli(merged)?.with_alphabet(alphabet)
        }
        _ => lump_onto(mu, (0..k).map(|s| s.min(keep)).collect(), alphabet),
    }
}
