//! Scenario file format.
//!
//! ```json
//! {
//!   "mu0": {"markov": {"P": [[0.9, 0.1], [0.2, 0.8]]}},
//!   "stages": [{"mun": {"bernoulli": ["2/3", "1/3"]}, "r": 3, "eps": "1/10"}],
//!   "target_h": 0.3,
//!   "generator_declared": {"value": true, "justification": "full shift"},
//!   "coarsen_m": 2,
//!   "mode": "rational",
//!   "budget": 4194304
//! }
//! ```
//!
//! Numbers are JSON numbers or strings (`"1/3"`, `"0.25"`, `"1e-3"`).
//! Measures are `{"bernoulli": [..]}`, `{"markov": {"P": [[..]], "pi": [..]}}`
//! (`pi` optional) or `{"lumped": {"base": <measure>, "map": [..]}}`.
//! Unknown keys are rejected.

use std::fmt;

use num_rational::BigRational;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::certifier::{GeneratorDeclaration, ScenarioSpec, Stage};
use crate::error::{Error, Result};
use crate::numeric::{Mode, Quantity, Scalar};
use crate::shiftspace::{lump, MeasureKind, ShiftMeasure};

/// A number as written in the file.
#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Number(f64),
    Text(String),
}

impl Literal {
    fn to_scalar<F: Scalar>(&self) -> Result<F> {
        match self {
            Literal::Number(x) => F::from_json_number(*x),
            Literal::Text(s) => F::parse_literal(s),
        }
    }

    fn from_scalar<F: Scalar>(x: &F) -> Self {
        match x.to_quantity() {
            Quantity::Float(v) => Literal::Number(v),
            q => Literal::Text(q.to_string()),
        }
    }
}

impl Serialize for Literal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Literal::Number(x) => s.serialize_f64(*x),
            Literal::Text(t) => s.serialize_str(t),
        }
    }
}

impl<'de> Deserialize<'de> for Literal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct LiteralVisitor;

        impl Visitor<'_> for LiteralVisitor {
            type Value = Literal;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or a numeric string such as \"1/3\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Literal, E> {
                Ok(Literal::Text(v.to_string()))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Literal, E> {
                Ok(Literal::Text(v.to_string()))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Literal, E> {
                Ok(Literal::Number(v))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Literal, E> {
                Ok(Literal::Text(v.to_string()))
            }
        }

        d.deserialize_any(LiteralVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkovFile {
    #[serde(rename = "P")]
    pub p: Vec<Vec<Literal>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<Vec<Literal>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LumpedFile {
    pub base: MeasureFile,
    pub map: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum MeasureFile {
    Bernoulli(Vec<Literal>),
    Markov(MarkovFile),
    Lumped(Box<LumpedFile>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageFile {
    pub mun: MeasureFile,
    pub r: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Literal>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorFile {
    pub value: bool,
    #[serde(default)]
    pub justification: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub mu0: MeasureFile,
    pub stages: Vec<StageFile>,
    pub target_h: Literal,
    pub generator_declared: GeneratorFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coarsen_m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
}

/// A parsed scenario in the arithmetic its file asked for.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedSpec {
    Rational(ScenarioSpec<BigRational>),
    Float(ScenarioSpec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Loaded {
    pub spec: LoadedSpec,
    pub budget: Option<u64>,
}

fn literals<F: Scalar>(values: &[Literal], at: &str) -> Result<Vec<F>> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| v.to_scalar().map_err(|e| e.at(&format!("{at}[{i}]"))))
        .collect()
}

fn build_measure<F: Scalar>(file: &MeasureFile, at: &str) -> Result<ShiftMeasure<F>> {
    match file {
        MeasureFile::Bernoulli(w) => {
            let at = format!("{at}.bernoulli");
            ShiftMeasure::bernoulli(literals(w, &at)?).map_err(|e| e.at(&at))
        }
        MeasureFile::Markov(m) => {
            let at = format!("{at}.markov");
            let rows =
                m.p.iter()
                    .enumerate()
                    .map(|(i, row)| literals(row, &format!("{at}.P[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
            let pi =
                m.pi.as_ref()
                    .map(|pi| literals(pi, &format!("{at}.pi")))
                    .transpose()?;
            ShiftMeasure::markov(rows, pi).map_err(|e| e.at(&at))
        }
        MeasureFile::Lumped(l) => {
            let at = format!("{at}.lumped");
            let base = build_measure(&l.base, &format!("{at}.base"))?;
            lump(&base, l.map.clone()).map_err(|e| e.at(&at))
        }
    }
}

impl ScenarioFile {
    pub fn to_spec<F: Scalar>(&self) -> Result<ScenarioSpec<F>> {
        let mu0 = build_measure(&self.mu0, "mu0")?;
        let stages = self
            .stages
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let at = format!("stages[{i}]");
                Ok(Stage {
                    mun: build_measure(&s.mun, &format!("{at}.mun"))?,
                    r: s.r,
                    eps: s
                        .eps
                        .as_ref()
                        .map(|e| e.to_scalar())
                        .transpose()
                        .map_err(|e| e.at(&format!("{at}.eps")))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let target_h = match &self.target_h {
            Literal::Number(x) => *x,
            Literal::Text(t) => BigRational::parse_literal(t)
                .map_err(|e| e.at("target_h"))?
                .to_f64(),
        };
        Ok(ScenarioSpec {
            mu0,
            stages,
            target_h,
            generator: GeneratorDeclaration {
                value: self.generator_declared.value,
                justification: self.generator_declared.justification.clone(),
            },
            coarsen_m: self.coarsen_m,
        })
    }

    pub fn load(&self) -> Result<Loaded> {
        let spec = match self.mode.unwrap_or(Mode::Rational) {
            Mode::Rational => LoadedSpec::Rational(self.to_spec()?),
            Mode::Float => LoadedSpec::Float(self.to_spec()?),
        };
        Ok(Loaded {
            spec,
            budget: self.budget,
        })
    }
}

/// Parses the JSON text of a scenario file; errors carry the key path and
/// line/column of the offending value.
pub fn parse_scenario_file(text: &str) -> Result<ScenarioFile> {
    let mut de = serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.inner();
        Error::Parse(format!(
            "at `{path}` (line {}, column {}): {inner}",
            inner.line(),
            inner.column()
        ))
    })?;
    de.end()
        .map_err(|e| Error::Parse(format!("trailing input: {e}")))?;
    Ok(file)
}

pub fn parse_scenario(text: &str) -> Result<Loaded> {
    parse_scenario_file(text)?.load()
}

fn measure_file<F: Scalar>(mu: &ShiftMeasure<F>) -> MeasureFile {
    let lits = |v: &[F]| v.iter().map(Literal::from_scalar).collect::<Vec<_>>();
    let markov = |c: &crate::shiftspace::MarkovChain<F>| {
        MeasureFile::Markov(MarkovFile {
            p: c.transition().rows().iter().map(|r| lits(r)).collect(),
            pi: Some(lits(c.pi().weights())),
        })
    };
    match mu.kind() {
        MeasureKind::Bernoulli(w) => MeasureFile::Bernoulli(lits(w.weights())),
        MeasureKind::Markov(c) => markov(c),
        MeasureKind::Lumped(l) => MeasureFile::Lumped(Box::new(LumpedFile {
            base: markov(l.base()),
            map: l.map().to_vec(),
        })),
    }
}

impl ScenarioFile {
    pub fn from_spec<F: Scalar>(spec: &ScenarioSpec<F>, budget: Option<u64>) -> Self {
        ScenarioFile {
            mu0: measure_file(&spec.mu0),
            stages: spec
                .stages
                .iter()
                .map(|s| StageFile {
                    mun: measure_file(&s.mun),
                    r: s.r,
                    eps: s.eps.as_ref().map(Literal::from_scalar),
                })
                .collect(),
            target_h: Literal::Number(spec.target_h),
            generator_declared: GeneratorFile {
                value: spec.generator.value,
                justification: spec.generator.justification.clone(),
            },
            coarsen_m: spec.coarsen_m,
            mode: Some(F::MODE),
            budget,
        }
    }
}

pub fn render_scenario<F: Scalar>(spec: &ScenarioSpec<F>, budget: Option<u64>) -> String {
    serde_json::to_string_pretty(&ScenarioFile::from_spec(spec, budget))
        .expect("scenario serializes")
}

/// `"0.5,0.5"` or `"1/3, 2/3"`.
pub fn parse_vector<F: Scalar>(text: &str) -> Result<Vec<F>> {
    if text.trim().is_empty() {
        return Err(Error::Parse("empty vector".into()));
    }
    text.split(',')
        .enumerate()
        .map(|(i, part)| F::parse_literal(part.trim()).map_err(|e| e.at(&format!("entry {i}"))))
        .collect()
}

/// Rows separated by `;`, entries by `,`: `"0.9,0.1;0.2,0.8"`.
pub fn parse_matrix<F: Scalar>(text: &str) -> Result<Vec<Vec<F>>> {
    text.split(';')
        .enumerate()
        .map(|(i, row)| parse_vector(row).map_err(|e| e.at(&format!("row {i}"))))
        .collect()
}
