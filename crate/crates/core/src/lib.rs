//! Finite-stage certificates for lower bounds on the Kolmogorov-Sinai
//! entropy of shift-invariant measures.
//!
//! A measure `mu0` on a finite-alphabet shift is compared against a sequence
//! of approximating measures `mun`. If every depth-`r_n` cylinder satisfies
//! `|mu0(A) - mun(A)| <= eps_n mun(A)`, the block entropies of the two
//! measures are related by
//!
//! ```text
//! H_mun(r_n) <= (1 + 2 eps_n) H_mu0(r_n) + 2 eps_n ln 3        (eps_n < 1/6)
//! ```
//!
//! and the entropy of `mu0` is bounded below by the entropies of the `mun`.
//! The [`certifier`] checks these facts stage by stage and records every
//! number in a [`certifier::Certificate`].
//!
//! ```
//! use kscert::certifier::GeneratorDeclaration;
//! use kscert::{certify, BigRational, Scalar, ScenarioSpec, Settings, ShiftMeasure, Stage, Verdict};
//!
//! # fn main() -> kscert::Result<()> {
//! let q = |n, d| <BigRational as Scalar>::from_ratio(n, d);
//! let mu0 = ShiftMeasure::markov(vec![vec![q(9, 10), q(1, 10)], vec![q(1, 5), q(4, 5)]], None)?;
//! let spec = ScenarioSpec {
//!     mu0: mu0.clone(),
//!     stages: vec![Stage { mun: mu0, r: 4, eps: None }],
//!     target_h: 0.38,
//!     generator: GeneratorDeclaration { value: true, justification: "full shift".into() },
//!     coarsen_m: None,
//! };
//! let cert = certify(&spec, &Settings::default())?;
//! assert_eq!(cert.verdict, Verdict::Pass);
//! # Ok(())
//! # }
//! ```
//!
//! | module | contents |
//! |--------|----------|
//! | [`shiftspace`] | alphabets, cylinder words, Bernoulli / Markov / lumped measures |
//! | [`entropy`] | Shannon, block and closed-form entropies, coarsening |
//! | [`comparison`] | closeness constants, entropy comparison, `eps*` |
//! | [`certifier`] | scenarios, certificates, the coarsening grid |
//! | [`scenarios`] | perturbation families with known ground truth |
//! | [`schema`] | scenario file format |
//! | [`cli`] | command-line front end |

pub mod certifier;
pub mod cli;
pub mod comparison;
pub mod entropy;
pub mod error;
pub mod numeric;
pub mod scenarios;
pub mod schema;
pub mod shiftspace;

pub use certifier::{
    certify, remark_grid, verify_step, Certificate, ScenarioSpec, Settings, Stage, Verdict,
};
pub use comparison::{
    aggregate_closeness, check_lemma1, epsilon_star, flip_epsilon, lemma1_upper_bound, minimal_c,
    ComparisonReport, Method, Witness,
};
pub use entropy::{
    block_entropy, coarsen, entropy_rate_profile, ks_entropy_closed_form, phi, shannon_entropy,
    EntropyReport, ProbVector,
};
pub use error::{Error, Result};
pub use numeric::{Extended, Mode, Quantity, Scalar};
pub use shiftspace::{
    lump, stationary_distribution, Alphabet, CylinderWord, ShiftMeasure, StochasticMatrix,
    DEFAULT_BUDGET,
};

pub use num_rational::BigRational;
