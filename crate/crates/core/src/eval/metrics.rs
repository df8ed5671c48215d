use serde::{Deserialize, Serialize};

use crate::data::{Normalization, TrajectorySample};
use crate::dynamics::JointState;
use crate::nets::Predictor;
use crate::{Error, Result};

/// Units in which errors are reported.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    #[default]
    Normalized,
    Physical,
}

impl Units {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "normalized" => Ok(Units::Normalized),
            "physical" => Ok(Units::Physical),
            _ => Err(Error::Unknown {
                kind: "units",
                name: s.to_string(),
            }),
        }
    }
}

pub fn states_of(samples: &[TrajectorySample]) -> Vec<JointState> {
    samples
        .iter()
        .map(|s| JointState::new(s.q.clone(), s.qd.clone(), s.qdd.clone()))
        .collect()
}

/// Per-sample residual `y − ŷ`.
pub fn residuals(
    model: &dyn Predictor,
    samples: &[TrajectorySample],
    norm: &Normalization,
    units: Units,
) -> Result<Vec<Vec<f64>>> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("empty evaluation slice".into()));
    }
    let preds = model.predict_many(&states_of(samples))?;
    Ok(samples
        .iter()
        .zip(preds)
        .map(|(s, p)| match units {
            Units::Physical => s.y.iter().zip(&p).map(|(y, p)| y - p).collect(),
            Units::Normalized => {
                let (y, p) = (norm.y.normalize(&s.y), norm.y.normalize(&p));
                y.iter().zip(&p).map(|(y, p)| y - p).collect()
            }
        })
        .collect())
}

/// Root mean square of each column.
pub fn rmse_from_residuals(res: &[Vec<f64>]) -> Vec<f64> {
    let n = res.first().map_or(0, Vec::len);
    let mut acc = vec![0.0; n];
    for r in res {
        for (a, e) in acc.iter_mut().zip(r) {
            *a += e * e;
        }
    }
    acc.iter().map(|s| (s / res.len() as f64).sqrt()).collect()
}

pub fn rmse_per_joint(
    model: &dyn Predictor,
    samples: &[TrajectorySample],
    norm: &Normalization,
    units: Units,
) -> Result<Vec<f64>> {
    Ok(rmse_from_residuals(&residuals(
        model, samples, norm, units,
    )?))
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Quantile of sorted data by linear interpolation between order
/// statistics at position `(N − 1)·p`.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

/// Absolute-error statistics of one joint.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct JointSummary {
    pub rmse: f64,
    pub mean_abs: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    /// Most extreme data points inside `[q25 − 1.5·IQR, q75 + 1.5·IQR]`.
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: usize,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ErrorSummary {
    pub joints: Vec<JointSummary>,
}

impl ErrorSummary {
    pub fn from_residuals(res: &[Vec<f64>]) -> Result<Self> {
        if res.is_empty() {
            return Err(Error::InvalidArgument("no residuals to summarize".into()));
        }
        let rmse = rmse_from_residuals(res);
        let joints = (0..rmse.len())
            .map(|j| {
                let mut abs: Vec<f64> = res.iter().map(|r| r[j].abs()).collect();
                abs.sort_by(f64::total_cmp);
                let (q25, q50, q75) = (
                    quantile(&abs, 0.25),
                    quantile(&abs, 0.5),
                    quantile(&abs, 0.75),
                );
                let iqr = q75 - q25;
                let (lo, hi) = (q25 - 1.5 * iqr, q75 + 1.5 * iqr);
                let inside = || abs.iter().copied().filter(|&e| e >= lo && e <= hi);
                JointSummary {
                    rmse: rmse[j],
                    mean_abs: mean(&abs),
                    q25,
                    median: q50,
                    q75,
                    whisker_low: inside().fold(f64::INFINITY, f64::min),
                    whisker_high: inside().fold(f64::NEG_INFINITY, f64::max),
                    outliers: abs.iter().filter(|&&e| e < lo || e > hi).count(),
                }
            })
            .collect();
        Ok(ErrorSummary { joints })
    }

    pub fn mean_rmse(&self) -> f64 {
        mean(&self.joints.iter().map(|j| j.rmse).collect::<Vec<_>>())
    }
}

pub fn abs_error_distribution(
    model: &dyn Predictor,
    samples: &[TrajectorySample],
    norm: &Normalization,
    units: Units,
) -> Result<ErrorSummary> {
    ErrorSummary::from_residuals(&residuals(model, samples, norm, units)?)
}
