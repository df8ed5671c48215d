//! Manifest-driven pipeline: synthesize, train, compare.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{
    load_csv, normalize_split, preprocess, save_csv, synthesize_dataset, Dataset,
    FourierTrajectory, NoiseConfig, PreprocessConfig, TargetKind,
};
use crate::dynamics::{FrictionCoefficients, RobotModel};
use crate::eval::{
    check_ordering, decompose_contributions, dissipative_for_samples, gnuplot_script, mean, median,
    rank, residuals, rmse_from_residuals, true_dissipative, write_boxplot_csv,
    write_decomposition_csv, write_dissipative_csv, write_ranking, write_rmse_csv, ErrorSummary,
    OrderingCheck, Units,
};
use crate::nets::{IdModel, Variant};
use crate::training::{select_learning_rate, train, TrainConfig, TrainReport};
use crate::{Error, Result};

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    /// Robot description, relative to the manifest file.
    pub robot: PathBuf,
    /// Excitation trajectory, relative to the manifest file.
    pub trajectory: PathBuf,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub preprocess: PreprocessConfig,
    pub target: TargetKind,
    /// Replace the robot's friction by zero before generating data.
    #[serde(default)]
    pub frictionless: bool,
    pub variants: Vec<TrainConfig>,
    /// Learning rates tried per variant; the lowest training loss wins.
    #[serde(default)]
    pub lr_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub units: Units,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl ExperimentManifest {
    pub fn validate(&self) -> Result<()> {
        if self.variants.is_empty() {
            return Err(Error::InvalidArgument("manifest lists no variants".into()));
        }
        for v in &self.variants {
            v.validate()?;
        }
        if let Some(g) = &self.lr_grid {
            if g.is_empty() || g.iter().any(|&lr| !(lr > 0.0 && lr.is_finite())) {
                return Err(Error::InvalidArgument(
                    "lr_grid must hold positive learning rates".into(),
                ));
            }
        }
        Ok(())
    }
}

/// One variant's results across seeds.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct VariantResult {
    pub variant: Variant,
    /// `(seed, per-joint RMSE)`.
    pub seeds: Vec<(u64, Vec<f64>)>,
    /// Per-joint median over seeds.
    pub median_rmse: Vec<f64>,
    /// Median over seeds of the mean RMSE across joints.
    pub median_mean_rmse: f64,
    /// Seed whose mean RMSE is the median; used for the error distribution.
    pub representative_seed: u64,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct Comparison {
    pub units: Units,
    pub results: Vec<VariantResult>,
    pub ranking: Vec<(String, f64)>,
    pub ordering: OrderingCheck,
}

impl Comparison {
    pub fn get(&self, v: Variant) -> Option<&VariantResult> {
        self.results.iter().find(|r| r.variant == v)
    }
}

/// A loaded manifest with its robot and trajectory.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub manifest: ExperimentManifest,
    pub robot: RobotModel,
    pub trajectory: FourierTrajectory,
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path, format!("cannot read manifest: {e}")))?;
        let mut m: ExperimentManifest =
            serde_json::from_str(&text).map_err(|e| Error::config(path, e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        m.robot = base.join(&m.robot);
        m.trajectory = base.join(&m.trajectory);
        m.out_dir = base.join(&m.out_dir);
        m.validate()
            .map_err(|e| Error::config(path, e.to_string()))?;
        let robot = RobotModel::load(&m.robot)?;
        let trajectory = FourierTrajectory::load(&m.trajectory)?;
        Self::new(m, robot, trajectory)
    }

    pub fn new(
        manifest: ExperimentManifest,
        robot: RobotModel,
        trajectory: FourierTrajectory,
    ) -> Result<Self> {
        manifest.validate()?;
        let robot = if manifest.frictionless {
            robot.with_friction(FrictionCoefficients::zero(robot.dof()))?
        } else {
            robot
        };
        if trajectory.dof() != robot.dof() {
            return Err(Error::dim(
                "trajectory joints",
                robot.dof(),
                trajectory.dof(),
            ));
        }
        Ok(Experiment {
            manifest,
            robot,
            trajectory,
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.manifest.out_dir
    }

    pub fn dataset_path(&self) -> PathBuf {
        self.out_dir().join("dataset.csv")
    }

    pub fn checkpoint_path(&self, v: Variant, seed: u64) -> PathBuf {
        self.out_dir()
            .join("models")
            .join(format!("{}_seed{seed}.json", v.tag()))
    }

    pub fn report_path(&self, v: Variant, seed: u64) -> PathBuf {
        self.out_dir()
            .join("reports")
            .join(format!("{}_seed{seed}.json", v.tag()))
    }

    /// Training seed of run `k`, derived from the manifest seed.
    pub fn run_seed(&self, k: u64) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.manifest.seed);
        rng.set_stream(k + 1);
        rng.next_u64()
    }

    /// Generates, pre-processes, normalizes and splits the dataset in memory.
    pub fn synthesize(&self) -> Result<Dataset> {
        let m = &self.manifest;
        let raw = synthesize_dataset(&self.robot, &self.trajectory, &m.noise, m.seed, m.target)?;
        normalize_split(&preprocess(&raw, &m.preprocess)?)
    }

    /// [`synthesize`](Self::synthesize) and write the CSV with its sidecar.
    pub fn write_dataset(&self) -> Result<Dataset> {
        std::fs::create_dir_all(self.out_dir())?;
        let ds = self.synthesize()?;
        save_csv(&self.dataset_path(), &ds, Some(self.manifest.seed))?;
        Ok(ds)
    }

    /// The dataset written by [`write_dataset`](Self::write_dataset),
    /// generated first if absent.
    pub fn dataset(&self) -> Result<Dataset> {
        let path = self.dataset_path();
        if !path.exists() {
            return self.write_dataset();
        }
        let (ds, _) = load_csv(&path)?;
        if !ds.is_prepared() {
            return Err(Error::config(
                &path,
                "dataset has no split or normalization",
            ));
        }
        if ds.dof() != self.robot.dof() || ds.target != self.manifest.target {
            return Err(Error::config(
                &path,
                "dataset does not match the manifest; rerun synth",
            ));
        }
        Ok(ds)
    }

    pub fn variant_config(&self, v: Variant) -> Result<&TrainConfig> {
        self.manifest
            .variants
            .iter()
            .find(|c| c.variant == v)
            .ok_or_else(|| {
                Error::InvalidArgument(format!("variant `{}` is not in the manifest", v.tag()))
            })
    }

    pub fn variants(&self) -> Vec<Variant> {
        self.manifest.variants.iter().map(|c| c.variant).collect()
    }

    /// Trains every seed of `v`, writing checkpoints, reports and
    /// `results.csv` rows. A learning-rate grid is swept on the first seed.
    pub fn train_variant(
        &self,
        ds: &Dataset,
        v: Variant,
        lr_grid: Option<&[f64]>,
    ) -> Result<Vec<TrainReport>> {
        let cfg = self.variant_config(v)?.clone();
        std::fs::create_dir_all(self.out_dir().join("models"))?;
        std::fs::create_dir_all(self.out_dir().join("reports"))?;
        let robot = v.needs_robot().then_some(&self.robot);
        let grid = lr_grid
            .or(self.manifest.lr_grid.as_deref())
            .filter(|_| v.is_trainable());
        let mut cfg_run = cfg.clone();
        let mut reports = Vec::with_capacity(cfg.seeds.len());
        for (k, &s) in cfg.seeds.iter().enumerate() {
            let seed = self.run_seed(s);
            let (model, mut report) = match grid {
                Some(g) if k == 0 => {
                    let sel = select_learning_rate(ds, robot, &cfg, g, seed)?;
                    log::info!("{v}: selected lr {} from {:?}", sel.lr, sel.losses);
                    cfg_run.lr = sel.lr;
                    (sel.model, sel.report)
                }
                _ => train(ds, robot, &cfg_run, seed)?,
            };
            let res = residuals(&model, ds.test(), ds.normalization()?, self.manifest.units)?;
            report.test_rmse = rmse_from_residuals(&res);
            model.save(&self.checkpoint_path(v, s))?;
            std::fs::write(
                self.report_path(v, s),
                serde_json::to_string_pretty(&report)? + "\n",
            )?;
            log::info!(
                "{v} seed {s}: {:?} after {} epochs, mean test RMSE {:.4e}",
                report.status,
                report.epoch_losses.len(),
                mean(&report.test_rmse)
            );
            reports.push(report);
        }
        self.update_results_csv(v, &cfg.seeds, &reports)?;
        Ok(reports)
    }

    fn update_results_csv(&self, v: Variant, seeds: &[u64], reports: &[TrainReport]) -> Result<()> {
        let path = self.out_dir().join("results.csv");
        let mut rows: Vec<Vec<String>> = Vec::new();
        if path.exists() {
            let mut r = csv::Reader::from_path(&path)?;
            for rec in r.records() {
                let rec = rec?;
                if rec.get(0) != Some(v.tag()) {
                    rows.push(rec.iter().map(str::to_string).collect());
                }
            }
        }
        for (s, rep) in seeds.iter().zip(reports) {
            for (j, e) in rep.test_rmse.iter().enumerate() {
                rows.push(vec![
                    v.tag().into(),
                    s.to_string(),
                    (j + 1).to_string(),
                    e.to_string(),
                ]);
            }
        }
        // manifest order, so the file does not depend on training order
        let order = self.variants();
        rows.sort_by_key(|r| {
            order
                .iter()
                .position(|v| v.tag() == r[0])
                .unwrap_or(order.len())
        });
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["variant", "seed", "joint", "rmse"])?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load_model(&self, v: Variant, seed: u64) -> Result<IdModel> {
        let path = self.checkpoint_path(v, seed);
        if !path.exists() {
            return Err(Error::InvalidArgument(format!(
                "missing checkpoint for variant `{}` (seed {seed}): {}",
                v.tag(),
                path.display()
            )));
        }
        IdModel::load(&path, Some(&self.robot))
    }

    /// Evaluates every manifest variant on the test slice and writes the
    /// comparison files.
    pub fn compare(&self, ds: &Dataset, units: Units) -> Result<Comparison> {
        let norm = ds.normalization()?;
        let test = ds.test();
        let out = self.out_dir();
        std::fs::create_dir_all(out)?;
        let mut results = Vec::new();
        let mut summaries = Vec::new();
        let mut representatives = Vec::new();
        for cfg in &self.manifest.variants {
            let v = cfg.variant;
            let mut seeds = Vec::new();
            let mut models = Vec::new();
            for &s in &cfg.seeds {
                let model = self.load_model(v, s)?;
                let res = residuals(&model, test, norm, units)?;
                seeds.push((s, rmse_from_residuals(&res)));
                models.push((model, res));
            }
            let n = seeds[0].1.len();
            let median_rmse: Vec<f64> = (0..n)
                .map(|j| median(&seeds.iter().map(|(_, r)| r[j]).collect::<Vec<_>>()))
                .collect();
            let means: Vec<f64> = seeds.iter().map(|(_, r)| mean(r)).collect();
            let mut order: Vec<usize> = (0..means.len()).collect();
            order.sort_by(|&a, &b| means[a].total_cmp(&means[b]));
            let rep = order[(order.len() - 1) / 2];
            let (model, res) = models.swap_remove(rep);
            summaries.push((v.label().to_string(), ErrorSummary::from_residuals(&res)?));
            results.push(VariantResult {
                variant: v,
                representative_seed: seeds[rep].0,
                median_mean_rmse: median(&means),
                median_rmse,
                seeds,
            });
            representatives.push(model);
        }
        let rows: Vec<(String, Vec<f64>)> = results
            .iter()
            .map(|r| (r.variant.label().to_string(), r.median_rmse.clone()))
            .collect();
        write_rmse_csv(&out.join("rmse.csv"), &rows)?;
        write_boxplot_csv(&out.join("boxplot.csv"), &summaries)?;
        let ranking = rank(
            &results
                .iter()
                .map(|r| (r.variant.label().to_string(), vec![r.median_mean_rmse]))
                .collect::<Vec<_>>(),
        );
        write_ranking(&out.join("ranking.txt"), &ranking)?;
        let labels: Vec<String> = representatives
            .iter()
            .map(|m| m.variant.tag().to_string())
            .collect();
        if ds.target == TargetKind::MotorTorque {
            write_decomposition_csv(
                &out.join("decomposition.csv"),
                &decompose_contributions(&self.robot, test)?,
            )?;
            let times: Vec<f64> = test.iter().map(|s| s.t).collect();
            let estimates = representatives
                .iter()
                .map(|m| {
                    Ok((
                        m.variant.tag().to_string(),
                        dissipative_for_samples(m, &self.robot, test)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            write_dissipative_csv(
                &out.join("dissipative.csv"),
                &times,
                &true_dissipative(&self.robot, test),
                &estimates,
            )?;
            std::fs::write(out.join("plot.gp"), gnuplot_script(ds.dof(), &labels))?;
        }
        let score: BTreeMap<Variant, f64> = results
            .iter()
            .map(|r| (r.variant, r.median_mean_rmse))
            .collect();
        let ordering = check_ordering(|v| score.get(&v).copied());
        let cmp = Comparison {
            units,
            results,
            ranking,
            ordering,
        };
        std::fs::write(
            out.join("comparison.json"),
            serde_json::to_string_pretty(&cmp)? + "\n",
        )?;
        Ok(cmp)
    }
}
