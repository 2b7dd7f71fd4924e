use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One named slice of a [`ParamVector`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub name: String,
    pub offset: usize,
    pub shape: Vec<usize>,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// Flat parameter vector with a per-layer layout table.
///
/// Everything that constrains or projects weights (anchors, importances,
/// reference gradients) works on this flat form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub values: Vec<f64>,
    pub layout: Vec<Segment>,
}

impl ParamVector {
    /// Builds a vector from named tensors laid end to end.
    pub fn flatten(parts: &[(String, Vec<usize>, Vec<f64>)]) -> Result<Self> {
        let mut values = Vec::new();
        let mut layout = Vec::with_capacity(parts.len());
        for (name, shape, data) in parts {
            let n: usize = shape.iter().product();
            if n != data.len() {
                return Err(Error::Shape(format!(
                    "segment {name}: shape {shape:?} holds {n} values, got {}",
                    data.len()
                )));
            }
            layout.push(Segment {
                name: name.clone(),
                offset: values.len(),
                shape: shape.clone(),
            });
            values.extend_from_slice(data);
        }
        Ok(Self { values, layout })
    }

    pub fn unflatten(&self) -> Vec<(String, Vec<usize>, Vec<f64>)> {
        self.layout
            .iter()
            .map(|s| {
                (
                    s.name.clone(),
                    s.shape.clone(),
                    self.values[s.range()].to_vec(),
                )
            })
            .collect()
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            values: vec![0.0; self.values.len()],
            layout: self.layout.clone(),
        }
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::Shape(format!(
                "{} values for a layout of {}",
                values.len(),
                self.values.len()
            )));
        }
        Ok(Self {
            values,
            layout: self.layout.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn segment(&self, name: &str) -> Option<&[f64]> {
        self.layout
            .iter()
            .find(|s| s.name == name)
            .map(|s| &self.values[s.range()])
    }

    /// Checks that the layout is contiguous and covers the values exactly.
    pub fn check_layout(&self) -> Result<()> {
        let mut next = 0;
        for s in &self.layout {
            if s.offset != next {
                return Err(Error::Shape(format!(
                    "segment {} starts at {}, expected {next}",
                    s.name, s.offset
                )));
            }
            next += s.len();
        }
        if next != self.values.len() {
            return Err(Error::Shape(format!(
                "layout covers {next} values, vector holds {}",
                self.values.len()
            )));
        }
        Ok(())
    }

    pub fn same_layout(&self, other: &ParamVector) -> Result<()> {
        if self.values.len() != other.values.len() || self.layout != other.layout {
            return Err(Error::Shape(format!(
                "parameter layouts differ ({} vs {} values)",
                self.values.len(),
                other.values.len()
            )));
        }
        Ok(())
    }

    pub fn dot(&self, other: &ParamVector) -> f64 {
        dot(&self.values, &other.values)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Feed-forward classifier shape: input, ReLU hidden layers, linear head.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub input_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub output_dim: usize,
}

impl ModelSpec {
    pub fn new(input_dim: usize, hidden_dims: Vec<usize>, output_dim: usize) -> Result<Self> {
        let spec = Self {
            input_dim,
            hidden_dims,
            output_dim,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.output_dim < 2 {
            return Err(Error::InvalidArgument(format!(
                "output dim must be at least 2, got {}",
                self.output_dim
            )));
        }
        if self.input_dim == 0 || self.hidden_dims.contains(&0) {
            return Err(Error::InvalidArgument(
                "all layer dims must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// (fan_in, fan_out) for each affine layer in order.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden_dims.len() + 1);
        let mut prev = self.input_dim;
        for &h in &self.hidden_dims {
            dims.push((prev, h));
            prev = h;
        }
        dims.push((prev, self.output_dim));
        dims
    }

    pub fn param_count(&self) -> usize {
        self.layer_dims().iter().map(|(i, o)| i * o + o).sum()
    }

    /// Layout with `w{l}` as (out, in) row-major followed by `b{l}`.
    pub fn layout(&self) -> Vec<Segment> {
        let mut offset = 0;
        let mut out = Vec::new();
        for (l, (fan_in, fan_out)) in self.layer_dims().into_iter().enumerate() {
            out.push(Segment {
                name: format!("w{l}"),
                offset,
                shape: vec![fan_out, fan_in],
            });
            offset += fan_in * fan_out;
            out.push(Segment {
                name: format!("b{l}"),
                offset,
                shape: vec![fan_out],
            });
            offset += fan_out;
        }
        out
    }

    pub fn zeros(&self) -> ParamVector {
        ParamVector {
            values: vec![0.0; self.param_count()],
            layout: self.layout(),
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init(&self, seed: u64) -> ParamVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = self.zeros();
        for seg in p.layout.clone() {
            if seg.shape.len() == 2 {
                let (fan_out, fan_in) = (seg.shape[0], seg.shape[1]);
                let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
                for v in &mut p.values[seg.range()] {
                    *v = rng.random_range(-bound..=bound);
                }
            }
        }
        p
    }

    pub fn check_params(&self, params: &ParamVector) -> Result<()> {
        if params.values.len() != self.param_count() || params.layout != self.layout() {
            return Err(Error::Shape(format!(
                "parameters ({} values) do not match model spec ({} values)",
                params.values.len(),
                self.param_count()
            )));
        }
        Ok(())
    }
}
