use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Normalization, TargetKind, TrajectorySample};
use crate::{Error, Result};

/// Metadata written next to a dataset CSV.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct DatasetMeta {
    pub dof: usize,
    pub samples: usize,
    pub dt: f64,
    pub target: TargetKind,
    #[serde(default)]
    pub seed: Option<u64>,
    pub units: BTreeMap<String, String>,
    #[serde(default)]
    pub split: Option<usize>,
    #[serde(default)]
    pub normalization: Option<Normalization>,
}

impl DatasetMeta {
    pub fn describe(ds: &Dataset, seed: Option<u64>) -> Self {
        let torque = match ds.target {
            TargetKind::JointTorque => "N·m (joint side)",
            TargetKind::MotorTorque => "N·m (motor side)",
        };
        let units = [
            ("t", "s"),
            ("q", "rad"),
            ("qd", "rad/s"),
            ("qdd", "rad/s^2"),
            ("y", torque),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
        DatasetMeta {
            dof: ds.dof(),
            samples: ds.len(),
            dt: ds.dt,
            target: ds.target,
            seed,
            units,
            split: ds.split,
            normalization: ds.normalization.clone(),
        }
    }
}

/// `data.csv` → `data.meta.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

/// `t,q_1..q_n,qd_1..qd_n,qdd_1..qdd_n,y_1..y_n`
pub fn csv_header(n: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for group in ["q", "qd", "qdd", "y"] {
        h.extend((1..=n).map(|i| format!("{group}_{i}")));
    }
    h
}

/// Writes the samples as CSV plus the metadata sidecar.
pub fn save_csv(path: &Path, ds: &Dataset, seed: Option<u64>) -> Result<()> {
    ds.validate()?;
    let n = ds.dof();
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    w.write_record(csv_header(n))?;
    let mut row = Vec::with_capacity(1 + 4 * n);
    for s in &ds.samples {
        row.clear();
        row.push(s.t.to_string());
        for v in s.q.iter().chain(&s.qd).chain(&s.qdd).chain(&s.y) {
            row.push(v.to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    let meta = DatasetMeta::describe(ds, seed);
    std::fs::write(
        sidecar_path(path),
        serde_json::to_string_pretty(&meta)? + "\n",
    )?;
    Ok(())
}

/// Reads a dataset CSV and, when present, its sidecar.
pub fn load_csv(path: &Path) -> Result<(Dataset, Option<DatasetMeta>)> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(|s| s.trim().to_string()).collect();
    let n = header
        .iter()
        .filter(|h| {
            h.strip_prefix("q_")
                .is_some_and(|i| i.parse::<usize>().is_ok())
        })
        .count();
    if n == 0 {
        return Err(Error::Parse {
            row: 1,
            column: "q_1".into(),
            message: "missing column".into(),
        });
    }
    let expected = csv_header(n);
    for (k, name) in expected.iter().enumerate() {
        match header.get(k) {
            Some(h) if h == name => {}
            Some(h) if header.contains(name) => {
                return Err(Error::Parse {
                    row: 1,
                    column: name.clone(),
                    message: format!("expected at position {}, found `{h}` there", k + 1),
                })
            }
            _ => {
                return Err(Error::Parse {
                    row: 1,
                    column: name.clone(),
                    message: "missing column".into(),
                })
            }
        }
    }
    if header.len() != expected.len() {
        return Err(Error::Parse {
            row: 1,
            column: header[expected.len()].clone(),
            message: "unexpected extra column".into(),
        });
    }
    let mut samples = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = k + 2;
        if rec.len() != expected.len() {
            return Err(Error::Parse {
                row,
                column: expected
                    .get(rec.len())
                    .cloned()
                    .unwrap_or_else(|| "-".into()),
                message: format!("row has {} fields, expected {}", rec.len(), expected.len()),
            });
        }
        let mut vals = Vec::with_capacity(rec.len());
        for (c, field) in rec.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                row,
                column: expected[c].clone(),
                message: format!("not a number: `{field}`"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: expected[c].clone(),
                    message: format!("non-finite value `{field}`"),
                });
            }
            vals.push(v);
        }
        let group = |g: usize| vals[1 + g * n..1 + (g + 1) * n].to_vec();
        samples.push(TrajectorySample {
            t: vals[0],
            q: group(0),
            qd: group(1),
            qdd: group(2),
            y: group(3),
        });
    }
    let side = sidecar_path(path);
    let meta: Option<DatasetMeta> = if side.exists() {
        let text = std::fs::read_to_string(&side)?;
        Some(serde_json::from_str(&text).map_err(|e| Error::config(&side, e.to_string()))?)
    } else {
        None
    };
    let dt = match &meta {
        Some(m) => m.dt,
        None if samples.len() >= 2 => samples[1].t - samples[0].t,
        None => 0.0,
    };
    let mut ds = Dataset::new(
        samples,
        meta.as_ref().map_or(TargetKind::MotorTorque, |m| m.target),
        dt,
    );
    if let Some(m) = &meta {
        if m.dof != n {
            return Err(Error::config(
                &side,
                format!("dof {} does not match CSV ({n})", m.dof),
            ));
        }
        ds.split = m.split;
        ds.normalization = m.normalization.clone();
    }
    Ok((ds, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_for_two_joints() {
        assert_eq!(
            csv_header(2).join(","),
            "t,q_1,q_2,qd_1,qd_2,qdd_1,qdd_2,y_1,y_2"
        );
    }

    #[test]
    fn missing_column_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "t,q_1,q_2,qd_1,qd_2,qdd_1,qdd_2,y_1\n0,1,2,3,4,5,6,7\n").unwrap();
        match load_csv(&p) {
            Err(Error::Parse { column, .. }) => assert_eq!(column, "y_2"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_value_names_row_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "t,q_1,qd_1,qdd_1,y_1\n0,1,2,3,4\n0.1,1,NaN,3,4\n").unwrap();
        match load_csv(&p) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!((row, column.as_str()), (3, "qd_1"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        std::fs::write(&p, "t,q_1,qd_1,qdd_1,y_1\n0,1,2,3\n").unwrap();
        assert!(matches!(load_csv(&p), Err(Error::Parse { row: 2, .. })));
    }
}
