use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mlp::{MlpSpec, NetworkParams};
use crate::{Error, Result};

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum InitScheme {
    /// Weights uniform in `±√(6/(fan_in + fan_out))`, zero biases.
    UniformFan,
    /// `UniformFan` with the output layer scaled by 0.1.
    Lagrangian,
}

impl InitScheme {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "uniform_fan" => Ok(InitScheme::UniformFan),
            "lagrangian" => Ok(InitScheme::Lagrangian),
            other => Err(Error::Unknown {
                kind: "init scheme",
                name: other.to_string(),
            }),
        }
    }
}

pub const OUTPUT_LAYER_SCALE: f64 = 0.1;

pub fn init_params(spec: &MlpSpec, scheme: InitScheme, seed: u64) -> Result<NetworkParams> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = NetworkParams::zeros(spec);
    let offsets = p.offsets();
    let last = p.layers.len() - 1;
    for (li, layer) in p.layers.clone().iter().enumerate() {
        let bound = (6.0 / (layer.inputs + layer.outputs) as f64).sqrt();
        let scale = if li == last && scheme == InitScheme::Lagrangian {
            OUTPUT_LAYER_SCALE
        } else {
            1.0
        };
        let (w, b) = offsets[li];
        for v in &mut p.values[w..b] {
            *v = scale * rng.random_range(-bound..bound);
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let spec = MlpSpec::new(4, 2, 2, 16);
        let a = init_params(&spec, InitScheme::UniformFan, 5).unwrap();
        let b = init_params(&spec, InitScheme::UniformFan, 5).unwrap();
        let c = init_params(&spec, InitScheme::UniformFan, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn weights_within_fan_bound() {
        let spec = MlpSpec::new(4, 2, 1, 16);
        let p = init_params(&spec, InitScheme::UniformFan, 1).unwrap();
        let bound = (6.0f64 / 20.0).sqrt();
        assert!(p.values[..64].iter().all(|w| w.abs() <= bound));
        assert!(p.values[64..80].iter().all(|b| *b == 0.0));
    }

    #[test]
    fn lagrangian_scales_output_layer() {
        let spec = MlpSpec::new(4, 2, 1, 16);
        let a = init_params(&spec, InitScheme::UniformFan, 3).unwrap();
        let b = init_params(&spec, InitScheme::Lagrangian, 3).unwrap();
        let (w, _) = a.offsets()[1];
        assert_eq!(a.values[..w], b.values[..w]);
        for k in w..a.len() {
            assert!((b.values[k] - OUTPUT_LAYER_SCALE * a.values[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn unknown_scheme_is_an_error() {
        assert!(InitScheme::parse("xavier_normal").is_err());
        assert_eq!(
            InitScheme::parse("lagrangian").unwrap(),
            InitScheme::Lagrangian
        );
    }
}
