use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// What the torque observation `y` measures.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TargetKind {
    /// Joint-side rigid-body torque τ.
    #[serde(rename = "tau")]
    JointTorque,
    /// Motor-side torque τ_u, including motor inertia and friction.
    #[serde(rename = "tau_u")]
    MotorTorque,
}

impl TargetKind {
    pub fn tag(self) -> &'static str {
        match self {
            TargetKind::JointTorque => "tau",
            TargetKind::MotorTorque => "tau_u",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "tau" => Ok(TargetKind::JointTorque),
            "tau_u" => Ok(TargetKind::MotorTorque),
            other => Err(Error::Unknown {
                kind: "target kind",
                name: other.to_string(),
            }),
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub q: Vec<f64>,
    pub qd: Vec<f64>,
    pub qdd: Vec<f64>,
    pub y: Vec<f64>,
}

/// Per-dimension min/max of one channel group and the induced map onto
/// `[−1, 1]`.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ChannelStats {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ChannelStats {
    fn from_rows<'a>(rows: impl Iterator<Item = &'a [f64]>, n: usize) -> Self {
        let mut min = vec![f64::INFINITY; n];
        let mut max = vec![f64::NEG_INFINITY; n];
        for r in rows {
            for i in 0..n {
                min[i] = min[i].min(r[i]);
                max[i] = max[i].max(r[i]);
            }
        }
        ChannelStats { min, max }
    }

    pub fn is_constant(&self, i: usize) -> bool {
        self.max[i] == self.min[i]
    }

    /// `a = 2 / (max − min)`, zero for a constant channel.
    pub fn scale(&self, i: usize) -> f64 {
        if self.is_constant(i) {
            0.0
        } else {
            2.0 / (self.max[i] - self.min[i])
        }
    }

    /// `b = −1 − a·min`, zero for a constant channel.
    pub fn offset(&self, i: usize) -> f64 {
        if self.is_constant(i) {
            0.0
        } else {
            -1.0 - self.scale(i) * self.min[i]
        }
    }

    pub fn scales(&self) -> Vec<f64> {
        (0..self.min.len()).map(|i| self.scale(i)).collect()
    }

    pub fn offsets(&self) -> Vec<f64> {
        (0..self.min.len()).map(|i| self.offset(i)).collect()
    }

    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, &v)| {
                if self.is_constant(i) {
                    0.0
                } else {
                    2.0 * (v - self.min[i]) / (self.max[i] - self.min[i]) - 1.0
                }
            })
            .collect()
    }

    /// Inverse map; a constant channel returns its single value.
    pub fn denormalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, &v)| {
                if self.is_constant(i) {
                    self.min[i]
                } else {
                    (v + 1.0) * 0.5 * (self.max[i] - self.min[i]) + self.min[i]
                }
            })
            .collect()
    }
}

/// Statistics of every channel, taken from the training slice only.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct Normalization {
    pub q: ChannelStats,
    pub qd: ChannelStats,
    pub qdd: ChannelStats,
    pub y: ChannelStats,
}

impl Normalization {
    pub fn from_samples(samples: &[TrajectorySample]) -> Self {
        let n = samples.first().map_or(0, |s| s.q.len());
        Normalization {
            q: ChannelStats::from_rows(samples.iter().map(|s| s.q.as_slice()), n),
            qd: ChannelStats::from_rows(samples.iter().map(|s| s.qd.as_slice()), n),
            qdd: ChannelStats::from_rows(samples.iter().map(|s| s.qdd.as_slice()), n),
            y: ChannelStats::from_rows(samples.iter().map(|s| s.y.as_slice()), n),
        }
    }

    pub fn dof(&self) -> usize {
        self.q.min.len()
    }

    fn groups(&self) -> [(&'static str, &ChannelStats); 4] {
        [
            ("q", &self.q),
            ("qd", &self.qd),
            ("qdd", &self.qdd),
            ("y", &self.y),
        ]
    }

    /// Names of channels with `max = min`, e.g. `qd_2`.
    pub fn constant_channels(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, g) in self.groups() {
            for i in 0..g.min.len() {
                if g.is_constant(i) {
                    out.push(format!("{name}_{}", i + 1));
                }
            }
        }
        out
    }
}

/// Ordered samples, optionally with a chronological train/test split and
/// training-slice normalization.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct Dataset {
    pub samples: Vec<TrajectorySample>,
    pub target: TargetKind,
    pub dt: f64,
    #[serde(default)]
    pub normalization: Option<Normalization>,
    /// Number of leading samples in the training slice.
    #[serde(default)]
    pub split: Option<usize>,
}

/// Size of the training slice for `n` samples: `⌊7n/10⌋`.
pub fn train_size(n: usize) -> usize {
    7 * n / 10
}

pub const MIN_SAMPLES: usize = 10;

impl Dataset {
    pub fn new(samples: Vec<TrajectorySample>, target: TargetKind, dt: f64) -> Self {
        Dataset {
            samples,
            target,
            dt,
            normalization: None,
            split: None,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dof(&self) -> usize {
        self.samples.first().map_or(0, |s| s.q.len())
    }

    pub fn train(&self) -> &[TrajectorySample] {
        &self.samples[..self.split.unwrap_or(self.samples.len())]
    }

    pub fn test(&self) -> &[TrajectorySample] {
        &self.samples[self.split.unwrap_or(self.samples.len())..]
    }

    pub fn normalization(&self) -> Result<&Normalization> {
        self.normalization
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("dataset is not normalized".into()))
    }

    pub fn is_prepared(&self) -> bool {
        self.normalization.is_some() && self.split.is_some()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dof();
        for (k, s) in self.samples.iter().enumerate() {
            for (what, v) in [("q", &s.q), ("qd", &s.qd), ("qdd", &s.qdd), ("y", &s.y)] {
                if v.len() != n {
                    return Err(Error::InvalidArgument(format!(
                        "sample {k}: {what} has {} entries, expected {n}",
                        v.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Chronological 70/30 split and per-dimension scaling onto `[−1, 1]`
/// using training-slice statistics only.
pub fn normalize_split(raw: &Dataset) -> Result<Dataset> {
    raw.validate()?;
    let n = raw.len();
    if n < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_SAMPLES} samples to split, got {n}"
        )));
    }
    let split = train_size(n);
    let norm = Normalization::from_samples(&raw.samples[..split]);
    for ch in norm.constant_channels() {
        log::warn!("constant channel {ch} in the training slice; mapped to 0");
    }
    Ok(Dataset {
        samples: raw.samples.clone(),
        target: raw.target,
        dt: raw.dt,
        normalization: Some(norm),
        split: Some(split),
    })
}
