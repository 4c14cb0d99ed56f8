use std::cmp::Ordering;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::rational::{serde_rational, Rational};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub point: Vec<f64>,
}

/// A sub-interval of one unit edge, traversed from offset `from` to `to`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgePiece {
    pub edge: usize,
    #[serde(with = "serde_rational")]
    pub from: Rational,
    #[serde(with = "serde_rational")]
    pub to: Rational,
}

impl EdgePiece {
    pub fn length(&self) -> Rational {
        (&self.to - &self.from).abs()
    }

    fn reversed(&self) -> Self {
        Self { edge: self.edge, from: self.to.clone(), to: self.from.clone() }
    }

    fn cmp_key(&self, other: &Self) -> Ordering {
        self.edge
            .cmp(&other.edge)
            .then_with(|| self.from.cmp(&other.from))
            .then_with(|| self.to.cmp(&other.to))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RayPath {
    /// Straight segment in a flat cover, exact endpoints.
    ExactSegment {
        #[serde(with = "serde_rational::vec")]
        start: Vec<Rational>,
        #[serde(with = "serde_rational::vec")]
        end: Vec<Rational>,
    },
    /// Projection of a tree geodesic: consecutive edge pieces.
    TreePath { pieces: Vec<EdgePiece> },
    /// Numerically integrated path, samples at increasing parameter.
    SampledPath { samples: Vec<Sample> },
}

/// A geodesic segment between two marked points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LightRay {
    pub id: String,
    pub space: String,
    pub source: String,
    pub target: String,
    pub length: f64,
    /// Exact squared length when the path is exact.
    #[serde(with = "serde_rational::option", default)]
    pub length_sq: Option<Rational>,
    pub path: RayPath,
}

impl LightRay {
    pub fn is_exact(&self) -> bool {
        !matches!(self.path, RayPath::SampledPath { .. })
    }

    /// Length first (exactly when both squared lengths are known), then path
    /// data lexicographically, then id.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        let by_length = match (&self.length_sq, &other.length_sq) {
            (Some(a), Some(b)) => a.cmp(b),
            _ => self.length.total_cmp(&other.length),
        };
        by_length
            .then_with(|| cmp_paths(&self.path, &other.path))
            .then_with(|| self.id.cmp(&other.id))
    }

    /// The same geodesic traversed from target to source.
    pub fn reversed(&self) -> LightRay {
        let path = match &self.path {
            RayPath::ExactSegment { start, end } => RayPath::ExactSegment { start: end.clone(), end: start.clone() },
            RayPath::TreePath { pieces } => RayPath::TreePath {
                pieces: pieces.iter().rev().map(EdgePiece::reversed).collect(),
            },
            RayPath::SampledPath { samples } => RayPath::SampledPath {
                samples: samples
                    .iter()
                    .rev()
                    .map(|s| Sample { t: self.length - s.t, point: s.point.clone() })
                    .collect(),
            },
        };
        LightRay {
            id: format!("rev({})", self.id),
            space: self.space.clone(),
            source: self.target.clone(),
            target: self.source.clone(),
            length: self.length,
            length_sq: self.length_sq.clone(),
            path,
        }
    }

    /// Structural checks: positive length, increasing sample parameters.
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) {
            return Err(Error::Invalid(format!("ray `{}` has nonpositive length", self.id)));
        }
        if let RayPath::SampledPath { samples } = &self.path {
            let first = samples.first().ok_or_else(|| Error::Invalid(format!("ray `{}` has no samples", self.id)))?;
            let last = samples.last().unwrap();
            if first.t != 0.0 || (last.t - self.length).abs() > 1e-9 * self.length.max(1.0) {
                return Err(Error::Invalid(format!("ray `{}` samples do not span [0, length]", self.id)));
            }
            if samples.windows(2).any(|w| !(w[1].t > w[0].t)) {
                return Err(Error::Invalid(format!("ray `{}` sample parameters not increasing", self.id)));
            }
        }
        Ok(())
    }
}

fn cmp_paths(a: &RayPath, b: &RayPath) -> Ordering {
    use RayPath::*;
    match (a, b) {
        (ExactSegment { start: s1, end: e1 }, ExactSegment { start: s2, end: e2 }) => {
            e1.cmp(e2).then_with(|| s1.cmp(s2))
        }
        (TreePath { pieces: p1 }, TreePath { pieces: p2 }) => {
            for (x, y) in p1.iter().zip(p2) {
                let o = x.cmp_key(y);
                if o != Ordering::Equal {
                    return o;
                }
            }
            p1.len().cmp(&p2.len())
        }
        (SampledPath { samples: s1 }, SampledPath { samples: s2 }) => {
            // Initial direction, then endpoint.
            let dir = |s: &[Sample]| s.get(1).map(|x| x.point.clone()).unwrap_or_default();
            let end = |s: &[Sample]| s.last().map(|x| x.point.clone()).unwrap_or_default();
            cmp_f64_slices(&dir(s1), &dir(s2)).then_with(|| cmp_f64_slices(&end(s1), &end(s2)))
        }
        _ => variant_rank(a).cmp(&variant_rank(b)),
    }
}

fn variant_rank(p: &RayPath) -> u8 {
    match p {
        RayPath::ExactSegment { .. } => 0,
        RayPath::TreePath { .. } => 1,
        RayPath::SampledPath { .. } => 2,
    }
}

fn cmp_f64_slices(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.total_cmp(y);
        if o != Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}
