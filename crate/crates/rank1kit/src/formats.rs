//! JSON and CSV representations of core types.
//!
//! Complex numbers are written as a bare number when the imaginary part is
//! zero and as `[re, im]` otherwise; both forms are accepted on input.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use num_complex::Complex64 as C;
use rank1kit_core::algebra::{AlgebraElement, AlgebraKind};
use rank1kit_core::ballmodel::BallPoint;
use rank1kit_core::isometry::NormalIsometry;
use rank1kit_core::linalg::RankReport;
use rank1kit_core::nilboundary::{NilPoint, SpaceConfig};
use rank1kit_core::sl2::{Sl2, Sl2Rep, Word};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexDto {
    Real(f64),
    Pair([f64; 2]),
}

impl From<C> for ComplexDto {
    fn from(z: C) -> Self {
        if z.im == 0.0 {
            ComplexDto::Real(z.re)
        } else {
            ComplexDto::Pair([z.re, z.im])
        }
    }
}

impl From<ComplexDto> for C {
    fn from(z: ComplexDto) -> Self {
        match z {
            ComplexDto::Real(re) => C::new(re, 0.0),
            ComplexDto::Pair([re, im]) => C::new(re, im),
        }
    }
}

/// Generators as row-major `[a, b, c, d]` entry lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepDto {
    pub generators: Vec<[ComplexDto; 4]>,
}

impl RepDto {
    pub fn from_rep(rep: &Sl2Rep) -> Self {
        Self {
            generators: rep
                .generators()
                .iter()
                .map(|g| g.entries().map(ComplexDto::from))
                .collect(),
        }
    }

    pub fn to_rep(&self) -> Result<Sl2Rep, CliError> {
        if self.generators.is_empty() {
            return Err(CliError::field("generators", "at least one generator is required"));
        }
        let gens = self
            .generators
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let [a, b, c, d] = e.map(C::from);
                Sl2::new(a, b, c, d).map_err(|err| CliError::field(format!("generators[{i}]"), err))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Sl2Rep::new(gens))
    }
}

/// Space configuration `{"kind": "H", "m": 2}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceDto {
    pub kind: KindDto,
    pub m: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KindDto {
    R,
    C,
    H,
    O,
}

impl From<KindDto> for AlgebraKind {
    fn from(k: KindDto) -> Self {
        match k {
            KindDto::R => AlgebraKind::R,
            KindDto::C => AlgebraKind::C,
            KindDto::H => AlgebraKind::H,
            KindDto::O => AlgebraKind::O,
        }
    }
}

impl SpaceDto {
    pub fn to_config(self) -> Result<SpaceConfig, CliError> {
        SpaceConfig::new(self.kind.into(), self.m).map_err(|e| CliError::field("space", e))
    }
}

fn element(kind: AlgebraKind, coeffs: &[f64], field: &str) -> Result<AlgebraElement, CliError> {
    AlgebraElement::new(kind, coeffs).map_err(|e| CliError::field(field, e))
}

/// A boundary point: `"infinity"` or `{"center": [...], "horizontal": [[...], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NilPointDto {
    Infinity(Infinity),
    Finite {
        center: Vec<f64>,
        horizontal: Vec<Vec<f64>>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Infinity {
    Infinity,
}

impl NilPointDto {
    pub fn from_point(g: &NilPoint) -> Self {
        if g.is_infinity() {
            return NilPointDto::Infinity(Infinity::Infinity);
        }
        NilPointDto::Finite {
            center: g.center().coeffs().to_vec(),
            horizontal: g.horizontal().iter().map(|k| k.coeffs().to_vec()).collect(),
        }
    }

    pub fn to_point(&self, config: SpaceConfig, field: &str) -> Result<NilPoint, CliError> {
        match self {
            NilPointDto::Infinity(_) => Ok(NilPoint::infinity(config)),
            NilPointDto::Finite { center, horizontal } => {
                let kind = config.kind();
                let c = element(kind, center, &format!("{field}.center"))?;
                let k = horizontal
                    .iter()
                    .enumerate()
                    .map(|(i, h)| element(kind, h, &format!("{field}.horizontal[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                NilPoint::new(config, c, k).map_err(|e| CliError::field(field, e))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallPointDto {
    pub w1: Vec<Vec<f64>>,
    pub w2: Vec<f64>,
}

impl BallPointDto {
    pub fn from_point(x: &BallPoint) -> Self {
        Self {
            w1: x.w1().iter().map(|e| e.coeffs().to_vec()).collect(),
            w2: x.w2().coeffs().to_vec(),
        }
    }
}

/// Normal-form isometry `(M, ν, s)`; `M` defaults to the identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsometryDto {
    #[serde(default)]
    pub rotation: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default)]
    pub nu: Option<Vec<f64>>,
    pub s: f64,
}

impl IsometryDto {
    pub fn to_isometry(&self, config: SpaceConfig) -> Result<NormalIsometry, CliError> {
        let kind = config.kind();
        let n = config.horizontal_len();
        let m = match &self.rotation {
            None => (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| AlgebraElement::from_real(kind, if i == j { 1.0 } else { 0.0 }))
                        .collect()
                })
                .collect(),
            Some(rows) => rows
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(j, e)| element(kind, e, &format!("isometry.rotation[{i}][{j}]")))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?,
        };
        let nu = match &self.nu {
            None => AlgebraElement::from_real(kind, 1.0),
            Some(c) => element(kind, c, "isometry.nu")?,
        };
        NormalIsometry::new(config, m, nu, self.s).map_err(|e| CliError::field("isometry", e))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankDto {
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub tolerance: f64,
    pub kernel_dim: usize,
}

impl RankDto {
    pub fn new(report: &RankReport, cols: usize) -> Self {
        Self {
            singular_values: report.singular_values.clone(),
            rank: report.rank,
            tolerance: report.tolerance,
            kernel_dim: report.kernel_dim(cols),
        }
    }
}

pub fn word_letters(w: &Word) -> Vec<i32> {
    w.letters().to_vec()
}

#[derive(Debug, Serialize, Deserialize)]
struct LengthRow {
    word: String,
    length: f64,
}

/// Reads a `word,length` table; words are written `[1,-2,1]`.
pub fn read_length_table<R: Read>(reader: R) -> Result<BTreeMap<Word, f64>, CliError> {
    let mut out = BTreeMap::new();
    for (i, row) in csv::Reader::from_reader(reader).deserialize::<LengthRow>().enumerate() {
        let row = row.map_err(|e| CliError::field(format!("row {}", i + 1), e))?;
        let w: Word = row
            .word
            .parse()
            .map_err(|e| CliError::field(format!("row {}: word", i + 1), e))?;
        if !row.length.is_finite() || row.length < 0.0 {
            return Err(CliError::field(
                format!("row {}: length", i + 1),
                "must be finite and nonnegative",
            ));
        }
        out.insert(w, row.length);
    }
    Ok(out)
}

pub fn write_length_table<W: Write>(writer: W, rows: &[(Word, f64)]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(writer);
    for (word, length) in rows {
        w.serialize(LengthRow {
            word: word.to_string(),
            length: *length,
        })
        .map_err(CliError::io)?;
    }
    w.flush().map_err(CliError::io)
}

pub fn read_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::field(what, e))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("DTOs serialize");
    s.push('\n');
    s
}
