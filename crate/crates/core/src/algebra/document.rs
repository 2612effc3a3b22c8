//! Text serialization of [`OperatorSpec`] (TOML).
//!
//! ```toml
//! n = 2
//!
//! [convex]
//! kind = "trace"            # "trace" | "laplacian" | "zero"
//! A = [2.0, 0.5, 0.5, 1.0]  # row-major, only for kind = "trace"
//!
//! [[terms]]
//! k = 2
//! weight = 1.0
//! B = [1.0, 0.0, 0.0, 1.0]  # row-major, SPD
//!
//! [transform]
//! kind = "power_root"       # "power_root" | "affine" | "chain"
//! params = { p = 2.0, shift = 0.0 }
//! ```
//!
//! Chains nest: `params = { links = [ { kind = "power_root", params = { p = 2.0 } }, ... ] }`.
//! Floats are written in shortest round-trip form, so a write/read cycle is exact.

use serde::{Deserialize, Serialize};

use crate::algebra::matrix::SymMatrix;
use crate::algebra::operator::{ConcaveTerm, ConvexPart, OperatorSpec};
use crate::concavity::transform::{ScalarTransform, TransformKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorDoc {
    pub n: usize,
    pub convex: ConvexDoc,
    #[serde(default)]
    pub terms: Vec<TermDoc>,
    pub transform: TransformDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvexDoc {
    pub kind: ConvexKind,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexKind {
    Trace,
    Laplacian,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub k: usize,
    pub weight: f64,
    #[serde(rename = "B")]
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransformDoc {
    PowerRoot {
        p: f64,
        #[serde(default)]
        shift: f64,
    },
    Affine {
        slope: f64,
        #[serde(default)]
        intercept: f64,
    },
    Chain {
        links: Vec<TransformDoc>,
    },
}

impl TransformDoc {
    pub fn build(&self) -> Result<ScalarTransform<f64>> {
        match self {
            TransformDoc::PowerRoot { p, shift } => ScalarTransform::shifted_root(*p, *shift),
            TransformDoc::Affine { slope, intercept } => ScalarTransform::affine(*slope, *intercept),
            TransformDoc::Chain { links } => {
                ScalarTransform::chain(links.iter().map(|l| l.build()).collect::<Result<_>>()?)
            }
        }
    }

    pub fn describe(g: &ScalarTransform<f64>) -> Self {
        match g.kind() {
            TransformKind::PowerRoot { p, shift } => TransformDoc::PowerRoot { p: *p, shift: *shift },
            TransformKind::Affine { slope, intercept } => TransformDoc::Affine {
                slope: *slope,
                intercept: *intercept,
            },
            TransformKind::Chain(links) => TransformDoc::Chain {
                links: links.iter().map(Self::describe).collect(),
            },
        }
    }
}

impl OperatorDoc {
    pub fn build(&self) -> Result<OperatorSpec<f64>> {
        let n = self.n;
        let convex = match (self.convex.kind, &self.convex.a) {
            (ConvexKind::Trace, Some(a)) => ConvexPart::Trace(SymMatrix::from_row_major(n, a)?),
            (ConvexKind::Trace, None) => {
                return Err(Error::config("convex.kind = \"trace\" requires convex.A"))
            }
            (ConvexKind::Laplacian, None) => ConvexPart::Laplacian,
            (ConvexKind::Zero, None) => ConvexPart::Zero,
            (_, Some(_)) => {
                return Err(Error::config("convex.A is only allowed with kind = \"trace\""))
            }
        };
        let terms = self
            .terms
            .iter()
            .map(|t| {
                Ok(ConcaveTerm {
                    k: t.k,
                    weight: t.weight,
                    b: SymMatrix::from_row_major(n, &t.b)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        OperatorSpec::new(n, convex, terms, self.transform.build()?)
    }

    pub fn describe(spec: &OperatorSpec<f64>) -> Self {
        let n = spec.dim();
        let convex = match spec.convex() {
            ConvexPart::Trace(a) => ConvexDoc {
                kind: ConvexKind::Trace,
                a: Some(a.to_row_major()),
            },
            ConvexPart::Laplacian => ConvexDoc {
                kind: ConvexKind::Laplacian,
                a: None,
            },
            ConvexPart::Zero => ConvexDoc {
                kind: ConvexKind::Zero,
                a: None,
            },
        };
        Self {
            n,
            convex,
            terms: spec
                .terms()
                .iter()
                .map(|t| TermDoc {
                    k: t.k,
                    weight: t.weight,
                    b: t.b.to_row_major(),
                })
                .collect(),
            transform: TransformDoc::describe(spec.transform()),
        }
    }
}

impl OperatorSpec<f64> {
    pub fn from_toml(text: &str) -> Result<Self> {
        let doc: OperatorDoc = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        doc.build()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&OperatorDoc::describe(self)).expect("operator document serializes")
    }
}
