//! Mixed continuous / integer / categorical search spaces and their
//! encoding into the unit hypercube used by the surrogate models.

use crate::error::{Error, Result};
use ndarray::prelude::*;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// One dimension of a search space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dimension {
    /// Real interval [lo, hi].
    Continuous { lo: f64, hi: f64 },
    /// Integer range lo..=hi.
    Integer { lo: i64, hi: i64 },
    /// Unordered choice among `n` alternatives, one-hot encoded.
    Categorical { n: usize },
}

impl Dimension {
    /// Number of encoded columns this dimension occupies.
    pub fn encoded_width(&self) -> usize {
        match self {
            Dimension::Categorical { n } => *n,
            _ => 1,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Dimension::Continuous { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::invalid(format!(
                        "continuous bounds must be finite with lo < hi, got [{lo}, {hi}]"
                    )));
                }
            }
            Dimension::Integer { lo, hi } => {
                if lo > hi {
                    return Err(Error::invalid(format!(
                        "integer bounds must satisfy lo <= hi, got [{lo}, {hi}]"
                    )));
                }
            }
            Dimension::Categorical { n } => {
                if *n < 1 {
                    return Err(Error::invalid("categorical dimension needs n >= 1"));
                }
            }
        }
        Ok(())
    }
}

/// A value along one dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coord {
    Real(f64),
    Int(i64),
    Cat(usize),
}

/// A point in a search space: one coordinate per dimension.
pub type Point = Vec<Coord>;

/// An ordered collection of dimensions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    dims: Vec<Dimension>,
}

impl SearchSpace {
    pub fn new(dims: Vec<Dimension>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::invalid("search space needs at least one dimension"));
        }
        for d in &dims {
            d.validate()?;
        }
        Ok(SearchSpace { dims })
    }

    pub fn dims(&self) -> &[Dimension] {
        &self.dims
    }

    pub fn n_dims(&self) -> usize {
        self.dims.len()
    }

    /// Total number of encoded columns.
    pub fn encoded_dim(&self) -> usize {
        self.dims.iter().map(|d| d.encoded_width()).sum()
    }

    /// Check that `point` has the right arity, kinds, and in-range values.
    pub fn validate(&self, point: &Point) -> Result<()> {
        if point.len() != self.dims.len() {
            return Err(Error::dims(format!(
                "point has {} coordinates for {} dimensions",
                point.len(),
                self.dims.len()
            )));
        }
        for (i, (coord, dim)) in point.iter().zip(&self.dims).enumerate() {
            let ok = match (coord, dim) {
                (Coord::Real(v), Dimension::Continuous { lo, hi }) => {
                    v.is_finite() && *v >= *lo && *v <= *hi
                }
                (Coord::Int(v), Dimension::Integer { lo, hi }) => *v >= *lo && *v <= *hi,
                (Coord::Cat(v), Dimension::Categorical { n }) => *v < *n,
                _ => false,
            };
            if !ok {
                return Err(Error::invalid(format!(
                    "coordinate {i} ({coord:?}) does not fit dimension {dim:?}"
                )));
            }
        }
        Ok(())
    }

    /// Map a point into the unit hypercube: continuous and integer values
    /// scale affinely, categoricals expand to a one-hot block.
    pub fn encode(&self, point: &Point) -> Result<Array1<f64>> {
        self.validate(point)?;
        let mut out = Array1::zeros(self.encoded_dim());
        let mut j = 0;
        for (coord, dim) in point.iter().zip(&self.dims) {
            match (coord, dim) {
                (Coord::Real(v), Dimension::Continuous { lo, hi }) => {
                    out[j] = (v - lo) / (hi - lo);
                    j += 1;
                }
                (Coord::Int(v), Dimension::Integer { lo, hi }) => {
                    out[j] = if hi > lo {
                        (v - lo) as f64 / (hi - lo) as f64
                    } else {
                        0.5
                    };
                    j += 1;
                }
                (Coord::Cat(v), Dimension::Categorical { n }) => {
                    out[j + v] = 1.0;
                    j += n;
                }
                _ => unreachable!("validate checked kinds"),
            }
        }
        Ok(out)
    }

    /// Encode several points as rows of a matrix.
    pub fn encode_batch(&self, points: &[Point]) -> Result<Array2<f64>> {
        let mut out = Array2::zeros((points.len(), self.encoded_dim()));
        for (i, p) in points.iter().enumerate() {
            out.row_mut(i).assign(&self.encode(p)?);
        }
        Ok(out)
    }

    /// Inverse of [`encode`](Self::encode) for arbitrary unit-cube vectors:
    /// values are clamped to [0, 1], integers round to nearest (half away
    /// from zero), categoricals pick the largest one-hot column (first on
    /// ties). Every input decodes to a valid point.
    pub fn decode(&self, enc: &ArrayView1<f64>) -> Result<Point> {
        if enc.len() != self.encoded_dim() {
            return Err(Error::dims(format!(
                "encoded vector has {} entries, expected {}",
                enc.len(),
                self.encoded_dim()
            )));
        }
        let mut out = Vec::with_capacity(self.dims.len());
        let mut j = 0;
        for dim in &self.dims {
            match dim {
                Dimension::Continuous { lo, hi } => {
                    let u = enc[j].clamp(0.0, 1.0);
                    out.push(Coord::Real(lo + u * (hi - lo)));
                    j += 1;
                }
                Dimension::Integer { lo, hi } => {
                    let u = enc[j].clamp(0.0, 1.0);
                    let raw = *lo as f64 + u * (hi - lo) as f64;
                    let v = (raw + 0.5).floor() as i64;
                    out.push(Coord::Int(v.clamp(*lo, *hi)));
                    j += 1;
                }
                Dimension::Categorical { n } => {
                    let block = enc.slice(s![j..j + n]);
                    let mut arg = 0;
                    for (k, &v) in block.iter().enumerate() {
                        if v > block[arg] {
                            arg = k;
                        }
                    }
                    out.push(Coord::Cat(arg));
                    j += n;
                }
            }
        }
        Ok(out)
    }

    /// Uniform random point.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        self.dims
            .iter()
            .map(|d| match d {
                Dimension::Continuous { lo, hi } => Coord::Real(rng.random_range(*lo..*hi)),
                Dimension::Integer { lo, hi } => Coord::Int(rng.random_range(*lo..=*hi)),
                Dimension::Categorical { n } => Coord::Cat(rng.random_range(0..*n)),
            })
            .collect()
    }
}
