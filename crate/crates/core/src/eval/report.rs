use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::decomposition::Decomposition;
use super::metrics::{mean, ErrorSummary};
use crate::nets::Variant;
use crate::Result;

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

/// One row per model, one column per joint.
pub fn write_rmse_csv(path: &Path, rows: &[(String, Vec<f64>)]) -> Result<()> {
    let n = rows.first().map_or(0, |r| r.1.len());
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["variant".to_string()];
    header.extend((1..=n).map(|j| format!("joint_{j}")));
    header.push("mean".into());
    w.write_record(&header)?;
    for (label, rmse) in rows {
        let mut rec = vec![label.clone()];
        rec.extend(rmse.iter().map(f64::to_string));
        rec.push(mean(rmse).to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_boxplot_csv(path: &Path, rows: &[(String, ErrorSummary)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "variant",
        "joint",
        "rmse",
        "mean_abs",
        "q25",
        "median",
        "q75",
        "whisker_low",
        "whisker_high",
        "outliers",
    ])?;
    for (label, s) in rows {
        for (j, js) in s.joints.iter().enumerate() {
            w.write_record([
                label.clone(),
                (j + 1).to_string(),
                js.rmse.to_string(),
                js.mean_abs.to_string(),
                js.q25.to_string(),
                js.median.to_string(),
                js.q75.to_string(),
                js.whisker_low.to_string(),
                js.whisker_high.to_string(),
                js.outliers.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_decomposition_csv(path: &Path, d: &Decomposition) -> Result<()> {
    let n = d.rows.first().map_or(0, |r| r.total.len());
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["t".to_string()];
    for part in ["mass", "inertia", "motor_inertia", "friction", "y"] {
        header.extend((1..=n).map(|j| format!("{part}_{j}")));
    }
    w.write_record(&header)?;
    for r in &d.rows {
        let mut rec = vec![r.t.to_string()];
        for part in [&r.mass, &r.inertia, &r.motor_inertia, &r.friction, &r.total] {
            rec.extend(part.iter().map(f64::to_string));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// `t`, the generator's dissipative torque, then one block per model.
pub fn write_dissipative_csv(
    path: &Path,
    times: &[f64],
    truth: &[Vec<f64>],
    estimates: &[(String, Vec<Vec<f64>>)],
) -> Result<()> {
    let n = truth.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|j| format!("true_{j}")));
    for (label, _) in estimates {
        header.extend((1..=n).map(|j| format!("{label}_{j}")));
    }
    w.write_record(&header)?;
    for (k, t) in times.iter().enumerate() {
        let mut rec = vec![t.to_string()];
        rec.extend(truth[k].iter().map(f64::to_string));
        for (_, est) in estimates {
            rec.extend(est[k].iter().map(f64::to_string));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Models sorted by mean RMSE across joints, best first.
pub fn rank(rows: &[(String, Vec<f64>)]) -> Vec<(String, f64)> {
    let mut r: Vec<(String, f64)> = rows.iter().map(|(l, v)| (l.clone(), mean(v))).collect();
    r.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    r
}

pub fn ranking_text(ranking: &[(String, f64)]) -> String {
    let mut s = String::new();
    for (k, (label, v)) in ranking.iter().enumerate() {
        let _ = writeln!(s, "{}. {label} {v:.6e}", k + 1);
    }
    s
}

pub fn write_ranking(path: &Path, ranking: &[(String, f64)]) -> Result<()> {
    write_text(path, &ranking_text(ranking))
}

/// Outcome of checking the expected qualitative ordering.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct OrderingCheck {
    pub holds: bool,
    pub failures: Vec<String>,
}

/// Checks `RNEA+MLP < LNN+MLP < min(LNN, DeLaN)` and
/// `RNEA+MLP ≤ 0.5 · LNN` on per-variant scores (lower is better).
pub fn check_ordering(score: impl Fn(Variant) -> Option<f64>) -> OrderingCheck {
    let mut failures = Vec::new();
    let get = |v: Variant, failures: &mut Vec<String>| {
        let s = score(v);
        if s.is_none() {
            failures.push(format!("missing result for {}", v.label()));
        }
        s
    };
    let rm = get(Variant::RneaMlp, &mut failures);
    let lm = get(Variant::LnnMlp, &mut failures);
    let l = get(Variant::Lnn, &mut failures);
    let d = get(Variant::Delan, &mut failures);
    if let (Some(rm), Some(lm)) = (rm, lm) {
        if !(rm < lm) {
            failures.push(format!("RNEA+MLP {rm:.4e} is not below LNN+MLP {lm:.4e}"));
        }
    }
    if let (Some(lm), Some(l), Some(d)) = (lm, l, d) {
        if !(lm < l.min(d)) {
            failures.push(format!(
                "LNN+MLP {lm:.4e} is not below min(LNN {l:.4e}, DeLaN {d:.4e})"
            ));
        }
    }
    if let (Some(rm), Some(l)) = (rm, l) {
        if !(rm <= 0.5 * l) {
            failures.push(format!("RNEA+MLP {rm:.4e} exceeds half of LNN {l:.4e}"));
        }
    }
    OrderingCheck {
        holds: failures.is_empty(),
        failures,
    }
}

/// Gnuplot script drawing the emitted CSV files.
pub fn gnuplot_script(dof: usize, labels: &[String]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set terminal pngcairo size 1200,{}", 400 * dof);
    let _ = writeln!(s, "set output 'decomposition.png'");
    let _ = writeln!(s, "set multiplot layout {dof},1");
    for j in 1..=dof {
        let cols = ["mass", "inertia", "motor_inertia", "friction", "y"];
        let plots: Vec<String> = cols
            .iter()
            .enumerate()
            .map(|(p, name)| {
                format!(
                    "'decomposition.csv' using 1:{} with lines title '{name}'",
                    2 + p * dof + j - 1
                )
            })
            .collect();
        let _ = writeln!(s, "plot {}", plots.join(", "));
    }
    let _ = writeln!(s, "unset multiplot");
    let _ = writeln!(s, "set output 'dissipative.png'");
    let _ = writeln!(s, "set multiplot layout {dof},1");
    for j in 1..=dof {
        let mut plots = vec![format!(
            "'dissipative.csv' using 1:{} with lines title 'true'",
            1 + j
        )];
        for (m, label) in labels.iter().enumerate() {
            plots.push(format!(
                "'dissipative.csv' using 1:{} with lines title '{label}'",
                1 + dof * (m + 1) + j
            ));
        }
        let _ = writeln!(s, "plot {}", plots.join(", "));
    }
    let _ = writeln!(s, "unset multiplot");
    s
}
