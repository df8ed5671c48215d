use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use idnets::data::{Dataset, TargetKind};
use idnets::dynamics::RobotModel;
use idnets::eval::{ranking_text, Units};
use idnets::experiment::Experiment;
use idnets::nets::Variant;
use idnets::training::TrainStatus;

const EXIT_CONFIG: u8 = 1;
const EXIT_DIVERGED: u8 = 2;
const EXIT_ORDERING: u8 = 3;

#[derive(Parser)]
#[command(
    name = "idnets",
    about = "Inverse-dynamics experiments with Newtonian and Lagrangian networks"
)]
#[command(disable_version_flag = true)]
struct Cli {
    /// Print the version and the robot-config hash embedded in checkpoints.
    #[arg(long, global = true)]
    version: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate, filter, normalize and split the dataset.
    Synth(Common),
    /// Train one variant, or every variant with `--all`.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long, required_unless_present = "all")]
        variant: Option<String>,
        #[arg(long, conflicts_with = "variant")]
        all: bool,
        /// Comma-separated learning rates swept on the first seed.
        #[arg(long, value_delimiter = ',')]
        lr_grid: Option<Vec<f64>>,
    },
    /// Evaluate every trained variant on the test slice.
    Compare {
        #[command(flatten)]
        common: Common,
        /// `normalized` or `physical`; defaults to the manifest setting.
        #[arg(long)]
        units: Option<String>,
        /// Exit with code 3 unless the expected ordering holds.
        #[arg(long)]
        assert_ordering: bool,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    manifest: PathBuf,
    /// Overrides the manifest seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the manifest output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the manifest target: `tau` or `tau_u`.
    #[arg(long)]
    target: Option<String>,
}

impl Common {
    fn experiment(&self) -> idnets::Result<Experiment> {
        let mut exp = Experiment::load(&self.manifest)?;
        if let Some(s) = self.seed {
            exp.manifest.seed = s;
        }
        if let Some(o) = &self.out {
            exp.manifest.out_dir = o.clone();
        }
        if let Some(t) = &self.target {
            exp.manifest.target = TargetKind::parse(t)?;
        }
        Ok(exp)
    }
}

fn summarize(ds: &Dataset) -> idnets::Result<()> {
    let norm = ds.normalization()?;
    println!(
        "samples {}  train {}  test {}  target {}",
        ds.len(),
        ds.train().len(),
        ds.test().len(),
        ds.target.tag()
    );
    for (name, stats) in [
        ("q", &norm.q),
        ("qd", &norm.qd),
        ("qdd", &norm.qdd),
        ("y", &norm.y),
    ] {
        for (j, (lo, hi)) in stats.min.iter().zip(&stats.max).enumerate() {
            println!("  {name}_{} [{lo:.6}, {hi:.6}]", j + 1);
        }
    }
    Ok(())
}

fn run(cli: Cli) -> idnets::Result<u8> {
    if cli.version {
        let robot = match &cli.command {
            Some(Command::Synth(c))
            | Some(Command::Train { common: c, .. })
            | Some(Command::Compare { common: c, .. }) => c.experiment()?.robot,
            None => RobotModel::surrogate(),
        };
        println!(
            "idnets {} robot {}",
            env!("CARGO_PKG_VERSION"),
            robot.config_hash()
        );
        return Ok(0);
    }
    match cli.command {
        None => Err(idnets::Error::InvalidArgument(
            "a subcommand is required; see --help".into(),
        )),
        Some(Command::Synth(c)) => {
            let exp = c.experiment()?;
            let ds = exp.write_dataset()?;
            println!("wrote {}", exp.dataset_path().display());
            summarize(&ds)?;
            Ok(0)
        }
        Some(Command::Train {
            common,
            variant,
            all,
            lr_grid,
        }) => {
            let exp = common.experiment()?;
            let ds = exp.dataset()?;
            let variants = if all {
                exp.variants()
            } else {
                vec![Variant::parse(variant.as_deref().unwrap_or_default())?]
            };
            let mut diverged = false;
            for v in variants {
                for r in exp.train_variant(&ds, v, lr_grid.as_deref())? {
                    println!(
                        "{} seed {}: {:?}, {} epochs, lr {}, test RMSE {:?}, {:.1} s",
                        v.label(),
                        r.seed,
                        r.status,
                        r.epoch_losses.len(),
                        r.lr,
                        r.test_rmse,
                        r.seconds
                    );
                    diverged |= r.status == TrainStatus::Diverged;
                }
            }
            Ok(if diverged { EXIT_DIVERGED } else { 0 })
        }
        Some(Command::Compare {
            common,
            units,
            assert_ordering,
        }) => {
            let exp = common.experiment()?;
            let ds = exp.dataset()?;
            let units = match units {
                Some(u) => Units::parse(&u)?,
                None => exp.manifest.units,
            };
            let cmp = exp.compare(&ds, units)?;
            print!("{}", ranking_text(&cmp.ranking));
            if assert_ordering && !cmp.ordering.holds {
                for f in &cmp.ordering.failures {
                    eprintln!("ordering: {f}");
                }
                return Ok(EXIT_ORDERING);
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
