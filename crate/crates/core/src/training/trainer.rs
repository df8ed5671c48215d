use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, Moments};
use super::config::TrainConfig;
use crate::data::{Dataset, Normalization, TargetKind, TrajectorySample};
use crate::dynamics::RobotModel;
use crate::nets::{rnea_lq_fit, Features, IdModel, Variant};
use crate::{Error, Result};

/// Read access to the training slice of a prepared dataset. The trainer
/// goes through this interface only, so it cannot see test samples.
pub trait SampleAccess {
    fn normalization(&self) -> Result<&Normalization>;
    fn target(&self) -> TargetKind;
    fn train_len(&self) -> usize;
    fn train_sample(&self, k: usize) -> &TrajectorySample;
}

impl SampleAccess for Dataset {
    fn normalization(&self) -> Result<&Normalization> {
        Dataset::normalization(self)
    }

    fn target(&self) -> TargetKind {
        self.target
    }

    fn train_len(&self) -> usize {
        if self.split.is_some() {
            self.train().len()
        } else {
            0
        }
    }

    fn train_sample(&self, k: usize) -> &TrajectorySample {
        &self.train()[k]
    }
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum TrainStatus {
    Completed,
    EarlyStopped,
    Diverged,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub variant: Variant,
    pub seed: u64,
    pub lr: f64,
    /// Mean minibatch loss of every epoch run.
    pub epoch_losses: Vec<f64>,
    /// Epoch whose parameters were kept (0-based).
    pub best_epoch: usize,
    pub best_loss: f64,
    /// Per-joint test RMSE, normalized units; filled in by the caller.
    #[serde(default)]
    pub test_rmse: Vec<f64>,
    /// Wall-clock time; not persisted, so written reports are reproducible.
    #[serde(skip)]
    pub seconds: f64,
    pub status: TrainStatus,
    pub converged: bool,
}

fn seed_shuffle(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed_0000_0001)
}

/// Trains one model with one seed on the training slice.
pub fn train(
    data: &impl SampleAccess,
    robot: Option<&RobotModel>,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<(IdModel, TrainReport)> {
    cfg.validate()?;
    let start = Instant::now();
    let norm = data.normalization()?;
    let target = data.target();
    let n_train = data.train_len();
    if n_train == 0 {
        return Err(Error::InvalidArgument(
            "dataset has no training slice".into(),
        ));
    }
    let samples: Vec<TrajectorySample> =
        (0..n_train).map(|k| data.train_sample(k).clone()).collect();
    let mut model = IdModel::new(cfg.variant, &cfg.model, norm, target, robot, seed)?;
    let feats = model.features_for(&samples)?;
    let all: Vec<usize> = (0..n_train).collect();

    if cfg.variant == Variant::RneaLq {
        let r = robot.expect("checked by IdModel::new");
        model.viscous = rnea_lq_fit(r, &samples, target)?.friction.viscous;
        let loss = model.mse_and_grad(&feats, &all, None)?;
        let ok = loss.is_finite();
        return Ok((
            model,
            TrainReport {
                variant: cfg.variant,
                seed,
                lr: cfg.lr,
                epoch_losses: vec![loss],
                best_epoch: 0,
                best_loss: loss,
                test_rmse: Vec::new(),
                seconds: start.elapsed().as_secs_f64(),
                status: if ok {
                    TrainStatus::Completed
                } else {
                    TrainStatus::Diverged
                },
                converged: ok,
            },
        ));
    }

    let adam = cfg.adam();
    let mut params = model.params();
    let mut moments = Moments::zeros(params.len());
    let mut grad = vec![0.0; params.len()];
    let mut rng = seed_shuffle(seed);
    let mut order = all.clone();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best = (f64::INFINITY, 0usize, params.clone());
    let mut step = 0u64;
    let mut status = TrainStatus::Completed;
    'epochs: for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let loss = model.mse_and_grad(&feats, batch, Some(&mut grad))?;
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                log::warn!(
                    "{} seed {seed}: non-finite loss at epoch {epoch}",
                    cfg.variant
                );
                status = TrainStatus::Diverged;
                history.push(f64::NAN);
                break 'epochs;
            }
            total += loss * batch.len() as f64;
            step += 1;
            adam_step(&mut params, &grad, &mut moments, &adam, step);
            model.set_params(&params);
        }
        let epoch_loss = total / n_train as f64;
        history.push(epoch_loss);
        if epoch_loss < best.0 {
            best = (epoch_loss, epoch, params.clone());
        } else if let Some(p) = cfg.patience {
            if epoch - best.1 >= p {
                status = TrainStatus::EarlyStopped;
                break;
            }
        }
    }
    model.set_params(&best.2);
    let converged = status != TrainStatus::Diverged;
    Ok((
        model,
        TrainReport {
            variant: cfg.variant,
            seed,
            lr: cfg.lr,
            epoch_losses: history,
            best_epoch: best.1,
            best_loss: best.0,
            test_rmse: Vec::new(),
            seconds: start.elapsed().as_secs_f64(),
            status,
            converged,
        },
    ))
}

/// One run per seed in `cfg.seeds`.
pub fn train_seeds(
    data: &impl SampleAccess,
    robot: Option<&RobotModel>,
    cfg: &TrainConfig,
) -> Result<Vec<(IdModel, TrainReport)>> {
    cfg.seeds
        .iter()
        .map(|&s| train(data, robot, cfg, s))
        .collect()
}

/// Result of a learning-rate sweep.
pub struct LrSelection {
    pub lr: f64,
    /// `(lr, best training loss)` for every grid point.
    pub losses: Vec<(f64, f64)>,
    pub model: IdModel,
    pub report: TrainReport,
}

/// Trains `seed` once per grid point and keeps the run with the lowest
/// training loss; the test slice plays no part.
pub fn select_learning_rate(
    data: &impl SampleAccess,
    robot: Option<&RobotModel>,
    cfg: &TrainConfig,
    grid: &[f64],
    seed: u64,
) -> Result<LrSelection> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty learning-rate grid".into()));
    }
    let mut best: Option<LrSelection> = None;
    let mut losses = Vec::with_capacity(grid.len());
    for &lr in grid {
        let mut c = cfg.clone();
        c.lr = lr;
        let (model, report) = train(data, robot, &c, seed)?;
        log::info!(
            "{} lr {lr}: best train loss {:.3e}",
            cfg.variant,
            report.best_loss
        );
        losses.push((lr, report.best_loss));
        let better = match &best {
            None => true,
            Some(b) => {
                report.converged && (!b.report.converged || report.best_loss < b.report.best_loss)
            }
        };
        if better {
            best = Some(LrSelection {
                lr,
                losses: Vec::new(),
                model,
                report,
            });
        }
    }
    let mut sel = best.expect("grid is not empty");
    sel.losses = losses;
    Ok(sel)
}

/// Mean squared error of `model` on prepared features.
pub fn mse_loss(model: &IdModel, feats: &Features, idx: &[usize]) -> Result<f64> {
    model.mse_and_grad(feats, idx, None)
}
