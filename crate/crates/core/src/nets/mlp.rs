use serde::{Deserialize, Serialize};

use crate::autodiff::Real;
use crate::{Error, Result};

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Softplus,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply<T: Real>(self, z: T) -> T {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Softplus => z.softplus(),
            Activation::Identity => z,
        }
    }

    /// `(σ, σ', σ'', σ''')` at `z`.
    #[inline]
    pub fn derivatives(self, z: f64) -> [f64; 4] {
        match self {
            Activation::Tanh => {
                let t = z.tanh();
                let d1 = 1.0 - t * t;
                [t, d1, -2.0 * t * d1, d1 * (6.0 * t * t - 2.0)]
            }
            Activation::Softplus => {
                let s = crate::autodiff::real::sigmoid_f64(z);
                let d2 = s * (1.0 - s);
                [
                    crate::autodiff::real::softplus_f64(z),
                    s,
                    d2,
                    d2 * (1.0 - 2.0 * s),
                ]
            }
            Activation::Identity => [z, 1.0, 0.0, 0.0],
        }
    }
}

/// Shape of a fully connected network: `hidden_layers` layers of `width`
/// units with a shared activation, followed by an affine output layer.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub output_dim: usize,
    pub hidden_layers: usize,
    pub width: usize,
    pub activation: Activation,
}

impl MlpSpec {
    pub fn new(input_dim: usize, output_dim: usize, hidden_layers: usize, width: usize) -> Self {
        MlpSpec {
            input_dim,
            output_dim,
            hidden_layers,
            width,
            activation: Activation::Tanh,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden_layers == 0 || self.width == 0 {
            return Err(Error::InvalidArgument(
                "an MLP needs at least one hidden layer of width >= 1".into(),
            ));
        }
        if self.input_dim == 0 || self.output_dim == 0 {
            return Err(Error::InvalidArgument("MLP dimensions must be >= 1".into()));
        }
        Ok(())
    }

    pub fn layers(&self) -> Vec<LayerShape> {
        let mut layers = Vec::with_capacity(self.hidden_layers + 1);
        let mut fan_in = self.input_dim;
        for _ in 0..self.hidden_layers {
            layers.push(LayerShape {
                outputs: self.width,
                inputs: fan_in,
                activation: self.activation,
            });
            fan_in = self.width;
        }
        layers.push(LayerShape {
            outputs: self.output_dim,
            inputs: fan_in,
            activation: Activation::Identity,
        });
        layers
    }

    pub fn param_count(&self) -> usize {
        self.layers().iter().map(LayerShape::param_count).sum()
    }
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerShape {
    pub outputs: usize,
    pub inputs: usize,
    pub activation: Activation,
}

impl LayerShape {
    pub fn param_count(&self) -> usize {
        self.outputs * (self.inputs + 1)
    }
}

/// Flat parameter vector of a dense network.
///
/// Each layer stores its `outputs × inputs` weight matrix column-major,
/// followed by its bias.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct NetworkParams {
    pub values: Vec<f64>,
    pub layers: Vec<LayerShape>,
}

impl NetworkParams {
    pub fn zeros(spec: &MlpSpec) -> Self {
        NetworkParams {
            values: vec![0.0; spec.param_count()],
            layers: spec.layers(),
        }
    }

    pub fn from_values(spec: &MlpSpec, values: Vec<f64>) -> Result<Self> {
        let expected = spec.param_count();
        if values.len() != expected {
            return Err(Error::dim("network parameters", expected, values.len()));
        }
        Ok(NetworkParams {
            values,
            layers: spec.layers(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.outputs)
    }

    /// Offsets of `(weights, bias)` for every layer.
    pub fn offsets(&self) -> Vec<(usize, usize)> {
        let mut off = 0;
        self.layers
            .iter()
            .map(|l| {
                let w = off;
                let b = w + l.outputs * l.inputs;
                off = b + l.outputs;
                (w, b)
            })
            .collect()
    }

    /// `self += scale · grad`
    pub fn accumulate(&mut self, grad: &[f64], scale: f64) {
        assert_eq!(grad.len(), self.values.len());
        for (p, g) in self.values.iter_mut().zip(grad) {
            *p += scale * g;
        }
    }

    pub fn weight(&self, layer: usize, row: usize, col: usize) -> f64 {
        let (w, _) = self.offsets()[layer];
        self.values[w + col * self.layers[layer].outputs + row]
    }

    pub fn weight_mut(&mut self, layer: usize, row: usize, col: usize) -> &mut f64 {
        let (w, _) = self.offsets()[layer];
        let rows = self.layers[layer].outputs;
        &mut self.values[w + col * rows + row]
    }

    pub fn bias_mut(&mut self, layer: usize, row: usize) -> &mut f64 {
        let (_, b) = self.offsets()[layer];
        &mut self.values[b + row]
    }
}

/// Forward pass at `f64`.
pub fn mlp_forward(params: &NetworkParams, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != params.input_dim() {
        return Err(Error::dim("MLP input", params.input_dim(), x.len()));
    }
    Ok(mlp_eval(&params.layers, &params.values, x))
}

/// Forward pass at any scalar type; `params` follows the [`NetworkParams`]
/// layout.
pub fn mlp_eval<T: Real>(layers: &[LayerShape], params: &[T], x: &[T]) -> Vec<T> {
    let mut h: Vec<T> = x.to_vec();
    let mut off = 0;
    for l in layers {
        let w = &params[off..off + l.outputs * l.inputs];
        let b = &params[off + l.outputs * l.inputs..off + l.param_count()];
        off += l.param_count();
        let mut z: Vec<T> = b.to_vec();
        for (c, &hc) in h.iter().enumerate() {
            let col = &w[c * l.outputs..(c + 1) * l.outputs];
            for (zr, &wrc) in z.iter_mut().zip(col) {
                *zr = *zr + wrc * hc;
            }
        }
        h = z.into_iter().map(|v| l.activation.apply(v)).collect();
    }
    h
}

/// An MLP viewed as a [`ParamFn`](crate::autodiff::ParamFn) with one output
/// selected.
pub struct MlpOutput<'a> {
    pub layers: &'a [LayerShape],
    pub output: usize,
}

impl crate::autodiff::ParamFn for MlpOutput<'_> {
    fn eval<T: Real>(&self, params: &[T], x: &[T]) -> T {
        mlp_eval(self.layers, params, x)[self.output]
    }
}
