//! CSV and JSON output. Floats are written with 17 significant digits so
//! every value reads back to the same bits.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chemostat_core::integrators::{Scheme, Trajectory};
use chemostat_core::models::State3;
use chemostat_core::noise::{NoiseKind, NoisePath};
use chemostat_core::TimeGrid;
use serde::{Deserialize, Serialize};

use crate::config::Format;
use crate::ensemble::EnsembleSummary;
use crate::error::{HarnessError, Result};

pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    Ok(BufWriter::new(
        File::create(path).map_err(|e| HarnessError::io(path, e))?,
    ))
}

/// Serialized form of a trajectory. Optional columns are present only for
/// O-U driven runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub scheme: Option<Scheme>,
    pub seed: Option<u64>,
    pub t: Vec<f64>,
    pub s: Vec<f64>,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dilution: Option<Vec<f64>>,
}

impl TrajectoryRecord {
    /// `noise` contributes `z` and `dilution` columns when it is an O-U path.
    pub fn new(
        traj: &Trajectory<State3>,
        noise: Option<&NoisePath>,
        alpha: f64,
        dilution: f64,
    ) -> Result<Self> {
        let t: Vec<f64> = traj.grid().times().collect();
        let z = match noise {
            Some(n) if n.kind() == NoiseKind::OrnsteinUhlenbeck => Some(
                t.iter()
                    .map(|&t| n.value_at(t))
                    .collect::<chemostat_core::Result<Vec<_>>>()?,
            ),
            _ => None,
        };
        let dil = z
            .as_ref()
            .map(|z| z.iter().map(|v| dilution + alpha * v).collect());
        Ok(Self {
            scheme: Some(traj.scheme()),
            seed: traj.noise().map(|n| n.seed),
            s: traj.states().iter().map(|y| y.s).collect(),
            x1: traj.states().iter().map(|y| y.x1).collect(),
            x2: traj.states().iter().map(|y| y.x2).collect(),
            t,
            z,
            dilution: dil,
        })
    }

    pub fn states(&self) -> Vec<State3> {
        self.s
            .iter()
            .zip(&self.x1)
            .zip(&self.x2)
            .map(|((&s, &x1), &x2)| State3::new(s, x1, x2))
            .collect()
    }

    /// Uniform grid through the first and last times.
    pub fn grid(&self) -> Result<TimeGrid> {
        let n = self.t.len().saturating_sub(1);
        let (first, last) = (
            self.t.first().copied().unwrap_or(0.0),
            self.t.last().copied().unwrap_or(0.0),
        );
        Ok(TimeGrid::new(first, (last - first) / n as f64, n)?)
    }

    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        let extras = self.z.is_some() && self.dilution.is_some();
        writeln!(
            w,
            "{}",
            if extras {
                "t,s,x1,x2,z,dilution"
            } else {
                "t,s,x1,x2"
            }
        )?;
        for k in 0..self.t.len() {
            write!(
                w,
                "{},{},{},{}",
                fmt17(self.t[k]),
                fmt17(self.s[k]),
                fmt17(self.x1[k]),
                fmt17(self.x2[k])
            )?;
            if let (Some(z), Some(d)) = (&self.z, &self.dilution) {
                write!(w, ",{},{}", fmt17(z[k]), fmt17(d[k]))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_csv(path: &Path, r: impl BufRead) -> Result<Self> {
        let bad = |message: String| HarnessError::Import {
            path: path.to_path_buf(),
            message,
        };
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| bad("empty file".into()))?
            .map_err(|e| HarnessError::io(path, e))?;
        let cols: Vec<&str> = header.trim().split(',').collect();
        let extras = match cols.as_slice() {
            ["t", "s", "x1", "x2"] => false,
            ["t", "s", "x1", "x2", "z", "dilution"] => true,
            _ => return Err(bad(format!("unexpected header `{header}`"))),
        };
        let mut rec = Self {
            scheme: None,
            seed: None,
            t: vec![],
            s: vec![],
            x1: vec![],
            x2: vec![],
            z: extras.then(Vec::new),
            dilution: extras.then(Vec::new),
        };
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| HarnessError::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let vals = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| bad(format!("line {}: {e}", i + 2)))?;
            if vals.len() != cols.len() {
                return Err(bad(format!(
                    "line {}: expected {} fields, found {}",
                    i + 2,
                    cols.len(),
                    vals.len()
                )));
            }
            rec.t.push(vals[0]);
            rec.s.push(vals[1]);
            rec.x1.push(vals[2]);
            rec.x2.push(vals[3]);
            if extras {
                rec.z.as_mut().unwrap().push(vals[4]);
                rec.dilution.as_mut().unwrap().push(vals[5]);
            }
        }
        Ok(rec)
    }
}

pub fn export_trajectory(
    record: &TrajectoryRecord,
    path: impl AsRef<Path>,
    format: Format,
) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    match format {
        Format::Csv => record
            .write_csv(&mut w)
            .map_err(|e| HarnessError::io(path, e))?,
        Format::Json => serde_json::to_writer(&mut w, record)?,
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn import_trajectory(path: impl AsRef<Path>, format: Format) -> Result<TrajectoryRecord> {
    let path = path.as_ref();
    let r = BufReader::new(File::open(path).map_err(|e| HarnessError::io(path, e))?);
    match format {
        Format::Csv => TrajectoryRecord::read_csv(path, r),
        Format::Json => Ok(serde_json::from_reader(r)?),
    }
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(|e| HarnessError::io(path, e))
}

/// Mean/min/max series of an ensemble as CSV.
pub fn write_summary_csv(summary: &EnsembleSummary, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let io = |e| HarnessError::io(path, e);
    writeln!(
        w,
        "t,s_mean,s_min,s_max,x1_mean,x1_min,x1_max,x2_mean,x2_min,x2_max"
    )
    .map_err(io)?;
    let s = &summary.series;
    for k in 0..s.t.len() {
        write!(w, "{}", fmt17(s.t[k])).map_err(io)?;
        for i in 0..3 {
            write!(
                w,
                ",{},{},{}",
                fmt17(s.mean[k][i]),
                fmt17(s.min[k][i]),
                fmt17(s.max[k][i])
            )
            .map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// `<dir>/<prefix>_<tag>.<ext>`
pub fn output_path(dir: &Path, prefix: &str, tag: &str, format: Format) -> PathBuf {
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    dir.join(format!("{prefix}_{tag}.{ext}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chemostat_core::integrators::{integrate_deterministic, DeterministicScheme};
    use chemostat_core::models::rhs_deterministic;

    fn toy() -> Trajectory<State3> {
        let p = crate::presets::load_preset("fig4").unwrap().params;
        let grid = TimeGrid::new(0.0, 0.1, 3).unwrap();
        integrate_deterministic(
            |y: &State3| rhs_deterministic(y, &p),
            State3::new(2.5, 2.0, 2.0),
            grid,
            DeterministicScheme::Rk4,
        )
        .unwrap()
    }

    #[test]
    fn csv_has_header_and_one_row_per_time() {
        let rec = TrajectoryRecord::new(&toy(), None, 0.0, 2.0).unwrap();
        let mut buf = Vec::new();
        rec.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "t,s,x1,x2");
        // 17 significant digits
        assert!(
            lines[1].starts_with("0.0000000000000000e0,2.5000000000000000e0"),
            "{}",
            lines[1]
        );
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let rec = TrajectoryRecord::new(&toy(), None, 0.0, 2.0).unwrap();
        for format in [Format::Csv, Format::Json] {
            let path = dir.path().join(format!("toy.{format:?}"));
            export_trajectory(&rec, &path, format).unwrap();
            let back = import_trajectory(&path, format).unwrap();
            let (a, b) = (rec.states(), back.states());
            assert!(a.iter().zip(&b).all(|(u, v)| u.s.to_bits() == v.s.to_bits()
                && u.x1.to_bits() == v.x1.to_bits()
                && u.x2.to_bits() == v.x2.to_bits()));
            assert_eq!(back.t, rec.t);
        }
    }

    #[test]
    fn io_errors_name_the_path() {
        let err = import_trajectory("/nonexistent/dir/x.csv", Format::Csv).unwrap_err();
        assert!(
            err.to_string().starts_with("/nonexistent/dir/x.csv: "),
            "{err}"
        );
    }

    #[test]
    fn malformed_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "t,s,x1,x2\n0,1,2\n").unwrap();
        let err = import_trajectory(&path, Format::Csv).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }
}
