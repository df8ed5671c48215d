use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct Moments {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl Moments {
    pub fn zeros(n: usize) -> Self {
        Moments {
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }
}

/// One bias-corrected Adam update; `step` counts from 1.
pub fn adam_step(
    params: &mut [f64],
    grads: &[f64],
    moments: &mut Moments,
    cfg: &AdamConfig,
    step: u64,
) {
    assert_eq!(params.len(), grads.len());
    assert_eq!(params.len(), moments.m.len());
    assert!(step >= 1, "adam steps count from 1");
    let c1 = 1.0 - cfg.beta1.powf(step as f64);
    let c2 = 1.0 - cfg.beta2.powf(step as f64);
    for k in 0..params.len() {
        let g = grads[k];
        moments.m[k] = cfg.beta1 * moments.m[k] + (1.0 - cfg.beta1) * g;
        moments.v[k] = cfg.beta2 * moments.v[k] + (1.0 - cfg.beta2) * g * g;
        let m_hat = moments.m[k] / c1;
        let v_hat = moments.v[k] / c2;
        params[k] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
    }
}
