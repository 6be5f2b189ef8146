//! CSV series for external plotting, read back from trace files.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::mstar::{Event, Trace};

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("no trace files under {0}")]
    MissingTrace(PathBuf),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed trace {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlotData {
    /// `trace,n,time_m,t_fast,ratio`; `t_fast` is the best proven bound
    /// value at the halt, so for a single-reference run it is `t_{p'}(x)`.
    pub ratio_csv: String,
    /// `trace,tick,t_fast`, starting from the infinity sentinel.
    pub t_fast_csv: String,
}

fn csv_string(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
}

/// `t_fast` in force at the halt, if finite.
fn t_fast_at_halt(t: &Trace) -> Option<u128> {
    let halt = t.time_m()?;
    t.t_fast_series()
        .into_iter()
        .rfind(|(tick, _)| *tick <= halt)
        .and_then(|(_, v)| v.parse().ok())
}

pub fn plot_rows(named: &[(String, Trace)]) -> PlotData {
    let mut ratio = Vec::new();
    let mut fast = Vec::new();
    for (name, t) in named {
        let n = match t.header() {
            Some(Event::Header { n, .. }) => *n,
            _ => continue,
        };
        if let (Some(tm), Some(tf)) = (t.time_m(), t_fast_at_halt(t)) {
            ratio.push(vec![
                name.clone(),
                n.to_string(),
                tm.to_string(),
                tf.to_string(),
                format!("{:.6}", tm as f64 / tf as f64),
            ]);
        }
        for (tick, v) in t.t_fast_series() {
            fast.push(vec![name.clone(), tick.to_string(), v]);
        }
    }
    PlotData {
        ratio_csv: csv_string(&["trace", "n", "time_m", "t_fast", "ratio"], ratio),
        t_fast_csv: csv_string(&["trace", "tick", "t_fast"], fast),
    }
}

/// Reads every `*.jsonl` file under `dir` (recursively, sorted by path).
pub fn emit_plot_data(dir: &Path) -> Result<PlotData, PlotError> {
    let mut files = Vec::new();
    collect(dir, &mut files)?;
    if files.is_empty() {
        return Err(PlotError::MissingTrace(dir.to_path_buf()));
    }
    files.sort();
    let mut named = Vec::new();
    for f in files {
        let file = std::fs::File::open(&f).map_err(|source| PlotError::Io {
            path: f.clone(),
            source,
        })?;
        let t = Trace::read_jsonl(std::io::BufReader::new(file)).map_err(|source| {
            PlotError::Parse {
                path: f.clone(),
                source,
            }
        })?;
        let name = f
            .strip_prefix(dir)
            .unwrap_or(&f)
            .to_string_lossy()
            .into_owned();
        named.push((name, t));
    }
    Ok(plot_rows(&named))
}

fn collect(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), PlotError> {
    let rd = std::fs::read_dir(dir).map_err(|source| PlotError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    for e in rd {
        let p = e
            .map_err(|source| PlotError::Io {
                path: dir.to_path_buf(),
                source,
            })?
            .path();
        if p.is_dir() {
            collect(&p, out)?;
        } else if p.extension().is_some_and(|x| x == "jsonl") {
            out.push(p);
        }
    }
    Ok(())
}
