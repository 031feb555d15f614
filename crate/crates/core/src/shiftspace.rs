//! Finite-alphabet shift spaces and stationary measures on them.
//!
//! The shift acts on sequences over an [`Alphabet`]; the partition into
//! time-zero symbols generates the cylinder partitions. A cylinder is named
//! by a [`CylinderWord`] on coordinates `0..len`.

use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::entropy::ProbVector;
use crate::error::{Error, Result};
use crate::numeric::{sum, Scalar, VALIDATION_TOL};

/// Default cap on the number of words any enumeration may visit.
pub const DEFAULT_BUDGET: u64 = 1 << 22;

/// Ordered, distinct symbol labels. Label order fixes enumeration order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    labels: Vec<String>,
}

impl Alphabet {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::validation(format!(
                "alphabet needs at least 2 symbols, got {}",
                labels.len()
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::validation(format!("duplicate symbol label {l:?}")));
            }
        }
        Ok(Self { labels })
    }

    /// Labels `"0"`, `"1"`, ..., `"k-1"`.
    pub fn numeric(size: usize) -> Result<Self> {
        Self::new((0..size).map(|i| i.to_string()).collect())
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Concatenated labels when every label is one character, otherwise
    /// dot-separated.
    pub fn render(&self, word: &CylinderWord) -> String {
        let compact = self.labels.iter().all(|l| l.chars().count() == 1);
        let parts = word
            .symbols()
            .iter()
            .map(|&s| self.labels.get(s).map(String::as_str).unwrap_or("?"));
        if compact {
            parts.collect()
        } else {
            parts.collect::<Vec<_>>().join(".")
        }
    }

    /// Inverse of [`Alphabet::render`].
    pub fn parse_word(&self, text: &str) -> Result<CylinderWord> {
        if text.is_empty() {
            return Ok(CylinderWord::empty());
        }
        let compact = self.labels.iter().all(|l| l.chars().count() == 1);
        let lookup = |piece: &str| {
            self.labels
                .iter()
                .position(|l| l == piece)
                .ok_or_else(|| Error::validation(format!("unknown symbol {piece:?}")))
        };
        let symbols = if compact {
            text.chars()
                .map(|c| lookup(c.encode_utf8(&mut [0; 4])))
                .collect::<Result<Vec<_>>>()?
        } else {
            text.split('.').map(lookup).collect::<Result<Vec<_>>>()?
        };
        Ok(CylinderWord::new(symbols))
    }
}

/// A finite word of symbol indices; names the cylinder set fixing
/// coordinates `0..len`. The empty word is the whole space.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CylinderWord(Vec<usize>);

impl CylinderWord {
    pub fn new(symbols: Vec<usize>) -> Self {
        Self(symbols)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `len - 1`; `None` for the empty word.
    pub fn depth(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn extended(&self, symbol: usize) -> Self {
        let mut s = self.0.clone();
        s.push(symbol);
        Self(s)
    }

    pub fn prepended(&self, symbol: usize) -> Self {
        let mut s = Vec::with_capacity(self.0.len() + 1);
        s.push(symbol);
        s.extend_from_slice(&self.0);
        Self(s)
    }
}

impl fmt::Display for CylinderWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        if self.0.iter().all(|&s| s < 10) {
            f.write_str(&parts.concat())
        } else {
            f.write_str(&parts.join("."))
        }
    }
}

impl From<&[usize]> for CylinderWord {
    fn from(s: &[usize]) -> Self {
        Self(s.to_vec())
    }
}

/// Square matrix with nonnegative entries and unit row sums.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix<F> {
    rows: Vec<Vec<F>>,
}

impl<F: Scalar> StochasticMatrix<F> {
    /// Validates shape, signs and row sums (exact in rational mode,
    /// within [`VALIDATION_TOL`] per row otherwise).
    pub fn new(rows: Vec<Vec<F>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::validation("transition matrix is empty"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::validation(format!(
                    "transition matrix is not square: row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|x| x.is_negative()) {
                return Err(Error::validation(format!(
                    "row {i} has negative entry at column {j}: {}",
                    row[j]
                )));
            }
            let total = sum(row.iter().cloned());
            if !(total.clone() - F::one()).negligible(VALIDATION_TOL) {
                return Err(Error::validation(format!(
                    "row {i} is not stochastic: sums to {total}"
                )));
            }
        }
        Ok(Self { rows })
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<F>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> &F {
        &self.rows[i][j]
    }

    /// Every row equal to `weights`.
    pub fn repeated_row(weights: &ProbVector<F>) -> Self {
        Self {
            rows: vec![weights.weights().to_vec(); weights.len()],
        }
    }

    /// Row vector times matrix.
    pub fn left_mul(&self, v: &[F]) -> Vec<F> {
        let n = self.dim();
        (0..n)
            .map(|j| sum((0..n).map(|i| v[i].clone() * self.rows[i][j].clone())))
            .collect()
    }

    /// `(1 - t) self + t other`.
    pub fn mix(&self, other: &Self, t: &F) -> Result<Self> {
        if other.dim() != self.dim() {
            return Err(Error::validation(format!(
                "dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        let s = F::one() - t.clone();
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| s.clone() * x.clone() + t.clone() * y.clone())
                    .collect()
            })
            .collect();
        Self::new(rows)
    }

    /// Communicating classes of the support graph, each sorted, listed in
    /// order of their smallest state, and whether each is closed.
    pub fn communicating_classes(&self) -> Vec<(Vec<usize>, bool)> {
        let n = self.dim();
        let mut graph = DiGraph::<(), ()>::with_capacity(n, n * n);
        let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
        for i in 0..n {
            for j in 0..n {
                if !self.rows[i][j].is_zero() {
                    graph.add_edge(nodes[i], nodes[j], ());
                }
            }
        }
        let mut class_of = vec![0; n];
        let mut classes: Vec<Vec<usize>> = tarjan_scc(&graph)
            .into_iter()
            .map(|c| {
                let mut c: Vec<usize> = c.into_iter().map(|v| v.index()).collect();
                c.sort_unstable();
                c
            })
            .collect();
        classes.sort();
        for (k, c) in classes.iter().enumerate() {
            for &s in c {
                class_of[s] = k;
            }
        }
        classes
            .into_iter()
            .enumerate()
            .map(|(k, c)| {
                let closed = c
                    .iter()
                    .all(|&i| (0..n).all(|j| self.rows[i][j].is_zero() || class_of[j] == k));
                (c, closed)
            })
            .collect()
    }
}

/// Unique stationary distribution of `p`.
///
/// Fails with [`Error::Reducible`] when more than one closed class exists.
/// A chain with a single closed class and transient states has a unique
/// stationary law supported on the closed class and is accepted.
pub fn stationary_distribution<F: Scalar>(p: &StochasticMatrix<F>) -> Result<ProbVector<F>> {
    let classes = p.communicating_classes();
    let closed: Vec<Vec<usize>> = classes
        .iter()
        .filter(|(_, c)| *c)
        .map(|(c, _)| c.clone())
        .collect();
    if closed.len() != 1 {
        return Err(Error::Reducible {
            classes: classes.into_iter().map(|(c, _)| c).collect(),
            closed,
        });
    }
    let n = p.dim();
    // Rows 0..n: (P^T - I) pi = 0; row n: sum(pi) = 1. Rank n when unique.
    let mut a: Vec<Vec<F>> = (0..=n)
        .map(|j| {
            let mut row: Vec<F> = if j < n {
                (0..n)
                    .map(|i| {
                        let mut x = p.get(i, j).clone();
                        if i == j {
                            x = x - F::one();
                        }
                        x
                    })
                    .collect()
            } else {
                vec![F::one(); n]
            };
            row.push(if j == n { F::one() } else { F::zero() });
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..=n)
            .max_by(|&x, &y| {
                a[x][col]
                    .abs()
                    .partial_cmp(&a[y][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(y.cmp(&x))
            })
            .expect("nonempty pivot range");
        if a[pivot][col].is_zero() {
            return Err(Error::Domain(format!(
                "stationary system is singular at column {col}"
            )));
        }
        a.swap(col, pivot);
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone() / pivot_row[col].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row).skip(col) {
                *x = x.clone() - factor.clone() * y.clone();
            }
        }
    }
    let mut pi: Vec<F> = (0..n).map(|i| a[i][n].clone() / a[i][i].clone()).collect();
    if !F::EXACT {
        for x in &mut pi {
            if x.is_negative() {
                *x = F::zero();
            }
        }
        let total = sum(pi.iter().cloned());
        for x in &mut pi {
            *x = x.clone() / total.clone();
        }
    }
    ProbVector::new(pi)
}

/// A Markov chain in its stationary regime.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain<F> {
    pi: ProbVector<F>,
    transition: StochasticMatrix<F>,
}

impl<F: Scalar> MarkovChain<F> {
    /// With `pi = None` the stationary distribution is computed; a supplied
    /// `pi` must satisfy `pi P = pi` (within [`VALIDATION_TOL`] for floats).
    pub fn new(transition: StochasticMatrix<F>, pi: Option<ProbVector<F>>) -> Result<Self> {
        let pi = match pi {
            None => stationary_distribution(&transition)?,
            Some(pi) => {
                if pi.len() != transition.dim() {
                    return Err(Error::validation(format!(
                        "pi has {} entries but P is {}x{}",
                        pi.len(),
                        transition.dim(),
                        transition.dim()
                    )));
                }
                let image = transition.left_mul(pi.weights());
                for (j, (x, y)) in image.iter().zip(pi.weights()).enumerate() {
                    if !(x.clone() - y.clone()).negligible(VALIDATION_TOL) {
                        return Err(Error::validation(format!(
                            "pi is not stationary for P: (pi P)[{j}] = {x} but pi[{j}] = {y}"
                        )));
                    }
                }
                pi
            }
        };
        Ok(Self { pi, transition })
    }

    pub fn pi(&self) -> &ProbVector<F> {
        &self.pi
    }

    pub fn transition(&self) -> &StochasticMatrix<F> {
        &self.transition
    }

    pub fn states(&self) -> usize {
        self.transition.dim()
    }
}

/// A Markov chain observed through a symbol map.
#[derive(Debug, Clone, PartialEq)]
pub struct LumpedChain<F> {
    base: MarkovChain<F>,
    map: Vec<usize>,
}

impl<F: Scalar> LumpedChain<F> {
    pub fn base(&self) -> &MarkovChain<F> {
        &self.base
    }

    /// `map[base_state] = observed_symbol`.
    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = self.map.clone();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureKind<F> {
    Bernoulli(ProbVector<F>),
    Markov(MarkovChain<F>),
    Lumped(LumpedChain<F>),
}

/// A shift-invariant probability measure on a finite-alphabet shift.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftMeasure<F> {
    alphabet: Alphabet,
    kind: MeasureKind<F>,
}

impl<F: Scalar> ShiftMeasure<F> {
    pub fn bernoulli(weights: Vec<F>) -> Result<Self> {
        let weights = ProbVector::new(weights)?;
        Ok(Self {
            alphabet: Alphabet::numeric(weights.len())?,
            kind: MeasureKind::Bernoulli(weights),
        })
    }

    pub fn markov(rows: Vec<Vec<F>>, pi: Option<Vec<F>>) -> Result<Self> {
        let p = StochasticMatrix::new(rows)?;
        let pi = pi.map(ProbVector::new).transpose()?;
        Self::from_chain(MarkovChain::new(p, pi)?)
    }

    pub fn from_chain(chain: MarkovChain<F>) -> Result<Self> {
        Ok(Self {
            alphabet: Alphabet::numeric(chain.states())?,
            kind: MeasureKind::Markov(chain),
        })
    }

    /// Replaces the labels, keeping the alphabet size.
    pub fn with_alphabet(mut self, alphabet: Alphabet) -> Result<Self> {
        if alphabet.size() != self.alphabet.size() {
            return Err(Error::validation(format!(
                "alphabet of size {} does not fit a measure on {} symbols",
                alphabet.size(),
                self.alphabet.size()
            )));
        }
        self.alphabet = alphabet;
        Ok(self)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn kind(&self) -> &MeasureKind<F> {
        &self.kind
    }

    pub fn symbols(&self) -> usize {
        self.alphabet.size()
    }

    /// Bernoulli and Markov measures as a Markov chain; `None` for lumped.
    pub fn as_chain(&self) -> Option<MarkovChain<F>> {
        match &self.kind {
            MeasureKind::Bernoulli(w) => Some(MarkovChain {
                pi: w.clone(),
                transition: StochasticMatrix::repeated_row(w),
            }),
            MeasureKind::Markov(c) => Some(c.clone()),
            MeasureKind::Lumped(_) => None,
        }
    }

    /// Marginal law of the time-zero symbol.
    pub fn marginal(&self) -> ProbVector<F> {
        match &self.kind {
            MeasureKind::Bernoulli(w) => w.clone(),
            MeasureKind::Markov(c) => c.pi.clone(),
            MeasureKind::Lumped(l) => {
                let mut out = vec![F::zero(); self.symbols()];
                for (s, p) in l.map.iter().zip(l.base.pi.weights()) {
                    out[*s] = out[*s].clone() + p.clone();
                }
                ProbVector::from_trusted(out)
            }
        }
    }

    fn check_word(&self, word: &[usize]) -> Result<()> {
        match word.iter().position(|&s| s >= self.symbols()) {
            Some(i) => Err(Error::validation(format!(
                "symbol {} at position {i} is out of range for an alphabet of size {}",
                word[i],
                self.symbols()
            ))),
            None => Ok(()),
        }
    }

    fn start(&self, s: usize) -> Prefix<F> {
        match &self.kind {
            MeasureKind::Bernoulli(w) => Prefix::Mass(w.weights()[s].clone()),
            MeasureKind::Markov(c) => Prefix::Mass(c.pi.weights()[s].clone()),
            MeasureKind::Lumped(l) => Prefix::Forward(
                l.map
                    .iter()
                    .zip(l.base.pi.weights())
                    .map(|(&m, p)| if m == s { p.clone() } else { F::zero() })
                    .collect(),
            ),
        }
    }

    fn step(&self, prefix: &Prefix<F>, last: usize, s: usize) -> Prefix<F> {
        match (&self.kind, prefix) {
            (MeasureKind::Bernoulli(w), Prefix::Mass(m)) => {
                Prefix::Mass(m.clone() * w.weights()[s].clone())
            }
            (MeasureKind::Markov(c), Prefix::Mass(m)) => {
                Prefix::Mass(m.clone() * c.transition.get(last, s).clone())
            }
            (MeasureKind::Lumped(l), Prefix::Forward(v)) => {
                let p = &l.base.transition;
                let n = p.dim();
                Prefix::Forward(
                    (0..n)
                        .map(|j| {
                            if l.map[j] != s {
                                return F::zero();
                            }
                            sum((0..n)
                                .filter(|&i| !v[i].is_zero())
                                .map(|i| v[i].clone() * p.get(i, j).clone()))
                        })
                        .collect(),
                )
            }
            _ => unreachable!("prefix state matches measure kind"),
        }
    }

    /// Probability of the cylinder named by `word`.
    pub fn cylinder_measure(&self, word: &CylinderWord) -> Result<F> {
        let w = word.symbols();
        self.check_word(w)?;
        let Some((&first, rest)) = w.split_first() else {
            return Ok(F::one());
        };
        let mut prefix = self.start(first);
        let mut last = first;
        for &s in rest {
            prefix = self.step(&prefix, last, s);
            last = s;
        }
        Ok(prefix.mass())
    }

    /// All words of length `depth + 1` with their probabilities, in
    /// lexicographic label order.
    pub fn enumerate_cylinders(&self, depth: usize, budget: u64) -> Result<Cylinders<'_, F>> {
        Cylinders::new(self, depth + 1, &[], budget)
    }

    /// Words of length `len` that begin with `prefix`, in lexicographic
    /// order. The budget applies to the whole level, `k^len`.
    pub fn cylinders_with_prefix(
        &self,
        len: usize,
        prefix: &[usize],
        budget: u64,
    ) -> Result<Cylinders<'_, F>> {
        Cylinders::new(self, len, prefix, budget)
    }
}

/// `k^len` if it fits the budget, otherwise a resource error.
pub fn check_budget(alphabet: usize, len: usize, budget: u64) -> Result<u64> {
    let count = u32::try_from(len)
        .ok()
        .and_then(|l| (alphabet as u128).checked_pow(l));
    match count {
        Some(c) if c <= budget as u128 => Ok(c as u64),
        other => Err(Error::Budget {
            alphabet,
            length: len,
            words: other.map_or_else(|| "overflow".to_string(), |c| c.to_string()),
            budget,
        }),
    }
}

#[derive(Debug, Clone)]
enum Prefix<F> {
    Mass(F),
    Forward(Vec<F>),
}

impl<F: Scalar> Prefix<F> {
    fn mass(&self) -> F {
        match self {
            Prefix::Mass(m) => m.clone(),
            Prefix::Forward(v) => sum(v.iter().cloned()),
        }
    }
}

/// Odometer over the words of one length. Each step recomputes prefix
/// states only from the first changed coordinate.
pub struct Cylinders<'a, F> {
    measure: &'a ShiftMeasure<F>,
    word: Vec<usize>,
    states: Vec<Prefix<F>>,
    fixed: usize,
    started: bool,
    done: bool,
}

impl<'a, F: Scalar> Cylinders<'a, F> {
    fn new(
        measure: &'a ShiftMeasure<F>,
        len: usize,
        prefix: &[usize],
        budget: u64,
    ) -> Result<Self> {
        check_budget(measure.symbols(), len, budget)?;
        if prefix.len() > len {
            return Err(Error::validation(format!(
                "prefix of length {} is longer than the words ({len})",
                prefix.len()
            )));
        }
        measure.check_word(prefix)?;
        let mut word = prefix.to_vec();
        word.resize(len, 0);
        let mut it = Self {
            measure,
            word,
            states: Vec::with_capacity(len),
            fixed: prefix.len(),
            started: false,
            done: false,
        };
        it.rebuild_from(0);
        Ok(it)
    }

    fn rebuild_from(&mut self, from: usize) {
        self.states.truncate(from);
        for i in from..self.word.len() {
            let state = if i == 0 {
                self.measure.start(self.word[0])
            } else {
                self.measure
                    .step(&self.states[i - 1], self.word[i - 1], self.word[i])
            };
            self.states.push(state);
        }
    }

    fn advance(&mut self) -> bool {
        let k = self.measure.symbols();
        let mut pos = self.word.len();
        while pos > self.fixed {
            pos -= 1;
            if self.word[pos] + 1 < k {
                self.word[pos] += 1;
                for x in &mut self.word[pos + 1..] {
                    *x = 0;
                }
                self.rebuild_from(pos);
                return true;
            }
        }
        false
    }

    /// Next word and its probability, borrowing the word buffer.
    pub fn next_ref(&mut self) -> Option<(&[usize], F)> {
        if self.started {
            if !self.advance() {
                self.done = true;
            }
        } else {
            self.started = true;
        }
        if self.done {
            return None;
        }
        let mass = self.states.last().map_or_else(F::one, Prefix::mass);
        Some((&self.word, mass))
    }
}

impl<F: Scalar> Iterator for Cylinders<'_, F> {
    type Item = (CylinderWord, F);

    fn next(&mut self) -> Option<Self::Item> {
        self.next_ref().map(|(w, m)| (CylinderWord::from(w), m))
    }
}

/// Image of `base` under the symbol map `map[base_symbol] = observed_symbol`,
/// onto the observed alphabet `0..=max(map)`.
pub fn lump<F: Scalar>(base: &ShiftMeasure<F>, map: Vec<usize>) -> Result<ShiftMeasure<F>> {
    let observed = map.iter().max().map_or(0, |m| m + 1);
    lump_onto(base, map, Alphabet::numeric(observed)?)
}

/// [`lump`] onto an explicit observed alphabet. The map must be total on
/// the base alphabet and hit every observed symbol.
pub fn lump_onto<F: Scalar>(
    base: &ShiftMeasure<F>,
    map: Vec<usize>,
    alphabet: Alphabet,
) -> Result<ShiftMeasure<F>> {
    if map.len() != base.symbols() {
        return Err(Error::validation(format!(
            "symbol map has {} entries but the base alphabet has {} symbols",
            map.len(),
            base.symbols()
        )));
    }
    if let Some((i, &s)) = map.iter().enumerate().find(|(_, &s)| s >= alphabet.size()) {
        return Err(Error::validation(format!(
            "symbol map sends {i} to {s}, outside an observed alphabet of size {}",
            alphabet.size()
        )));
    }
    let unhit: Vec<usize> = (0..alphabet.size()).filter(|s| !map.contains(s)).collect();
    if !unhit.is_empty() {
        return Err(Error::validation(format!(
            "symbol map is not surjective; unhit observed symbols {unhit:?}"
        )));
    }
    let (chain, map) = match &base.kind {
        MeasureKind::Lumped(l) => (l.base.clone(), l.map.iter().map(|&s| map[s]).collect()),
        _ => (
            base.as_chain().expect("non-lumped measure has a chain"),
            map,
        ),
    };
    Ok(ShiftMeasure {
        alphabet,
        kind: MeasureKind::Lumped(LumpedChain { base: chain, map }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        <BigRational as Scalar>::from_ratio(n, d)
    }

    fn example_chain() -> ShiftMeasure<BigRational> {
        ShiftMeasure::markov(
            vec![vec![q(9, 10), q(1, 10)], vec![q(2, 10), q(8, 10)]],
            None,
        )
        .unwrap()
    }

    fn word(s: &[usize]) -> CylinderWord {
        CylinderWord::new(s.to_vec())
    }

    #[test]
    fn stationary_examples() {
        let p = StochasticMatrix::new(vec![vec![q(9, 10), q(1, 10)], vec![q(2, 10), q(8, 10)]])
            .unwrap();
        assert_eq!(
            stationary_distribution(&p).unwrap().weights(),
            &[q(2, 3), q(1, 3)]
        );

        let p =
            StochasticMatrix::new(vec![vec![q(1, 2), q(1, 2)], vec![q(1, 2), q(1, 2)]]).unwrap();
        assert_eq!(
            stationary_distribution(&p).unwrap().weights(),
            &[q(1, 2), q(1, 2)]
        );

        let pf = StochasticMatrix::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let pi = stationary_distribution(&pf).unwrap();
        let image = pf.left_mul(pi.weights());
        assert!((pi.weights()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!(image
            .iter()
            .zip(pi.weights())
            .all(|(a, b)| (a - b).abs() < 1e-15));
    }

    #[test]
    fn identity_chain_is_reducible() {
        let p =
            StochasticMatrix::new(vec![vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(1, 1)]]).unwrap();
        match stationary_distribution(&p) {
            Err(Error::Reducible { closed, classes }) => {
                assert_eq!(closed, vec![vec![0], vec![1]]);
                assert_eq!(classes, vec![vec![0], vec![1]]);
            }
            other => panic!("expected reducible error, got {other:?}"),
        }
    }

    #[test]
    fn transient_states_get_zero_mass() {
        let p = StochasticMatrix::new(vec![
            vec![q(1, 2), q(1, 2), q(0, 1)],
            vec![q(0, 1), q(1, 2), q(1, 2)],
            vec![q(0, 1), q(1, 2), q(1, 2)],
        ])
        .unwrap();
        assert_eq!(
            stationary_distribution(&p).unwrap().weights(),
            &[q(0, 1), q(1, 2), q(1, 2)]
        );
    }

    #[test]
    fn non_stochastic_row_names_the_row() {
        let err = StochasticMatrix::new(vec![vec![0.5, 0.5], vec![0.3, 0.6]]).unwrap_err();
        assert!(err.to_string().contains("row 1"), "{err}");
        let err = StochasticMatrix::new(vec![vec![1.5, -0.5], vec![0.5, 0.5]]).unwrap_err();
        assert!(err.to_string().contains("row 0"), "{err}");
    }

    #[test]
    fn supplied_pi_must_be_stationary() {
        let rows = vec![vec![q(9, 10), q(1, 10)], vec![q(2, 10), q(8, 10)]];
        assert!(ShiftMeasure::markov(rows.clone(), Some(vec![q(1, 2), q(1, 2)])).is_err());
        assert!(ShiftMeasure::markov(rows, Some(vec![q(2, 3), q(1, 3)])).is_ok());
    }

    #[test]
    fn cylinder_measure_examples() {
        let b = ShiftMeasure::bernoulli(vec![q(1, 2), q(1, 2)]).unwrap();
        assert_eq!(b.cylinder_measure(&word(&[0, 1])).unwrap(), q(1, 4));
        let m = example_chain();
        assert_eq!(m.cylinder_measure(&word(&[0, 1])).unwrap(), q(1, 15));
        assert_eq!(m.cylinder_measure(&CylinderWord::empty()).unwrap(), q(1, 1));
        let total: BigRational = m.enumerate_cylinders(1, 16).unwrap().map(|(_, p)| p).sum();
        assert_eq!(total, q(1, 1));
        assert!(m.cylinder_measure(&word(&[0, 2])).is_err());
    }

    #[test]
    fn enumeration_order_and_values() {
        let b = ShiftMeasure::bernoulli(vec![q(6, 10), q(4, 10)]).unwrap();
        let got: Vec<(String, BigRational)> = b
            .enumerate_cylinders(1, 100)
            .unwrap()
            .map(|(w, p)| (w.to_string(), p))
            .collect();
        assert_eq!(
            got,
            vec![
                ("00".into(), q(36, 100)),
                ("01".into(), q(24, 100)),
                ("10".into(), q(24, 100)),
                ("11".into(), q(16, 100)),
            ]
        );
        let half = ShiftMeasure::bernoulli(vec![q(1, 2), q(1, 2)]).unwrap();
        let got: Vec<_> = half.enumerate_cylinders(0, 100).unwrap().collect();
        assert_eq!(got, vec![(word(&[0]), q(1, 2)), (word(&[1]), q(1, 2))]);
    }

    #[test]
    fn enumeration_budget() {
        let b = ShiftMeasure::bernoulli(vec![0.5, 0.5]).unwrap();
        match b.enumerate_cylinders(10, 1024) {
            Err(Error::Budget {
                alphabet: 2,
                length: 11,
                words,
                budget: 1024,
            }) => {
                assert_eq!(words, "2048")
            }
            Err(other) => panic!("unexpected {other:?}"),
            Ok(_) => panic!("expected budget error"),
        }
        assert!(b.enumerate_cylinders(9, 1024).is_ok());
        assert!(b.enumerate_cylinders(usize::MAX - 1, 1024).is_err());
    }

    #[test]
    fn prefix_enumeration() {
        let m = example_chain();
        let words: Vec<String> = m
            .cylinders_with_prefix(3, &[1], 100)
            .unwrap()
            .map(|(w, _)| w.to_string())
            .collect();
        assert_eq!(words, ["100", "101", "110", "111"]);
        let total: BigRational = m
            .cylinders_with_prefix(3, &[1], 100)
            .unwrap()
            .map(|(_, p)| p)
            .sum();
        assert_eq!(total, q(1, 3));
    }

    #[test]
    fn lump_identity_matches_base() {
        let base = example_chain();
        let lumped = lump(&base, vec![0, 1]).unwrap();
        for len in 0..=7 {
            let a: Vec<_> = base
                .cylinders_with_prefix(len, &[], 1 << 10)
                .unwrap()
                .collect();
            let b: Vec<_> = lumped
                .cylinders_with_prefix(len, &[], 1 << 10)
                .unwrap()
                .collect();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn lump_three_states() {
        let base = ShiftMeasure::markov(
            vec![
                vec![q(1, 2), q(1, 4), q(1, 4)],
                vec![q(1, 3), q(1, 3), q(1, 3)],
                vec![q(1, 5), q(3, 5), q(1, 5)],
            ],
            None,
        )
        .unwrap();
        let lumped = lump(&base, vec![0, 0, 1]).unwrap();
        let MeasureKind::Markov(c) = base.kind() else {
            unreachable!()
        };
        let (pi, p) = (c.pi().weights(), c.transition());
        assert_eq!(
            lumped.cylinder_measure(&word(&[0])).unwrap(),
            pi[0].clone() + pi[1].clone()
        );
        assert_eq!(
            lumped.cylinder_measure(&word(&[0, 1])).unwrap(),
            pi[0].clone() * p.get(0, 2).clone() + pi[1].clone() * p.get(1, 2).clone()
        );
    }

    #[test]
    fn lump_rejects_bad_maps() {
        let base = example_chain();
        let err = lump_onto(&base, vec![0, 0], Alphabet::numeric(3).unwrap()).unwrap_err();
        assert!(err.to_string().contains("[1, 2]"), "{err}");
        assert!(lump(&base, vec![0]).is_err());
        assert!(lump(&base, vec![0, 0]).is_err());
    }

    #[test]
    fn words_render_and_parse() {
        let a = Alphabet::new(vec!["a".into(), "b".into()]).unwrap();
        let w = word(&[0, 1, 1]);
        assert_eq!(a.render(&w), "abb");
        assert_eq!(a.parse_word("abb").unwrap(), w);
        let t = Alphabet::new(vec!["0".into(), "TAIL".into()]).unwrap();
        assert_eq!(t.render(&w), "0.TAIL.TAIL");
        assert_eq!(t.parse_word("0.TAIL.TAIL").unwrap(), w);
        assert!(Alphabet::new(vec!["x".into(), "x".into()]).is_err());
        assert!(Alphabet::numeric(1).is_err());
    }
}
