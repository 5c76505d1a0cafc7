use std::collections::BTreeMap;
use std::fmt;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldModel;
use crate::interval::Interval;
use crate::linalg::{rat_parse, rat_to_string, RatMatrix, Rational};

/// Bumped whenever the serialized layout changes.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformTag {
    Cosine,
    Radon,
    Fourier,
    Pullback,
    Pushforward,
}

impl fmt::Display for TransformTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TransformTag::Cosine => "cosine",
            TransformTag::Radon => "radon",
            TransformTag::Fourier => "fourier",
            TransformTag::Pullback => "pullback",
            TransformTag::Pushforward => "pushforward",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for TransformTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(TransformTag::Cosine),
            "radon" => Ok(TransformTag::Radon),
            "fourier" => Ok(TransformTag::Fourier),
            "pullback" => Ok(TransformTag::Pullback),
            "pushforward" => Ok(TransformTag::Pushforward),
            other => Err(Error::Parse(format!("unknown transform {other:?}"))),
        }
    }
}

/// Grassmannian on one side of an operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SideMeta {
    pub n: usize,
    pub k: usize,
    pub r: u32,
    pub dual: bool,
}

/// Exact matrix of a transform; rows index the codomain, columns the domain.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    pub tag: TransformTag,
    pub model: FieldModel,
    pub domain: SideMeta,
    pub codomain: SideMeta,
    pub entries: RatMatrix,
    /// Row-major enclosures, present for quadrature-produced entries.
    pub intervals: Option<Vec<Interval>>,
    pub uncertified: bool,
    /// Free-form evidence carried into reports: chain scalars, depths.
    pub evidence: BTreeMap<String, String>,
}

impl OperatorMatrix {
    pub fn new(tag: TransformTag, model: FieldModel, domain: SideMeta, codomain: SideMeta, entries: RatMatrix) -> Self {
        OperatorMatrix {
            tag,
            model,
            domain,
            codomain,
            entries,
            intervals: None,
            uncertified: false,
            evidence: BTreeMap::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.entries.rows()
    }

    pub fn cols(&self) -> usize {
        self.entries.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        self.entries.get(i, j)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.entries.data().iter().all(|x| !x.is_negative())
    }

    pub fn row_sums(&self) -> Vec<Rational> {
        (0..self.rows()).map(|i| self.entries.row(i).iter().sum()).collect()
    }

    /// Content address: transform, field and both sides.
    pub fn cache_key(&self, depth_tag: &str) -> String {
        format!(
            "{}-{}{}-n{}-k{}to{}-r{}-{}",
            self.tag,
            match self.model {
                FieldModel::EquiChar { .. } => "equi",
                FieldModel::MixedChar { .. } => "mixed",
            },
            self.model.q(),
            self.domain.n,
            self.domain.k,
            self.codomain.k,
            self.domain.r,
            depth_tag
        )
    }

    pub fn to_json(&self) -> OperatorMatrixJson {
        OperatorMatrixJson {
            format_version: FORMAT_VERSION,
            tag: self.tag,
            model: self.model,
            domain: self.domain,
            codomain: self.codomain,
            rows: self.rows(),
            cols: self.cols(),
            entries: self.entries.data().iter().map(rat_to_string).collect(),
            intervals: self
                .intervals
                .as_ref()
                .map(|v| v.iter().map(|x| [rat_to_string(&x.lo), rat_to_string(&x.hi)]).collect()),
            uncertified: self.uncertified,
            evidence: self.evidence.clone(),
        }
    }

    pub fn from_json(json: &OperatorMatrixJson) -> Result<Self> {
        if json.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "operator format version {} (expected {FORMAT_VERSION})",
                json.format_version
            )));
        }
        if json.entries.len() != json.rows * json.cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {}x{} matrix",
                json.entries.len(),
                json.rows,
                json.cols
            )));
        }
        let parse = |s: &String| rat_parse(s).ok_or_else(|| Error::Parse(format!("bad rational {s:?}")));
        let data = json.entries.iter().map(parse).collect::<Result<Vec<_>>>()?;
        let entries = RatMatrix::from_fn(json.rows, json.cols, |i, j| data[i * json.cols + j].clone());
        let intervals = match &json.intervals {
            None => None,
            Some(v) => Some(
                v.iter()
                    .map(|[lo, hi]| {
                        let (lo, hi) = (parse(lo)?, parse(hi)?);
                        if lo > hi {
                            return Err(Error::Parse("interval with lo > hi".into()));
                        }
                        Ok(Interval::new(lo, hi))
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        Ok(OperatorMatrix {
            tag: json.tag,
            model: json.model,
            domain: json.domain,
            codomain: json.codomain,
            entries,
            intervals,
            uncertified: json.uncertified,
            evidence: json.evidence.clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorMatrixJson {
    pub format_version: u32,
    pub tag: TransformTag,
    pub model: FieldModel,
    pub domain: SideMeta,
    pub codomain: SideMeta,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Vec<[String; 2]>>,
    pub uncertified: bool,
    #[serde(default)]
    pub evidence: BTreeMap<String, String>,
}
