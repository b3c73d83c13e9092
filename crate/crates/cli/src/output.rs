//! JSON encoding of library results and atomic file output.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};
use tempfile::NamedTempFile;
use trace_core::bounds::Interval;
use trace_core::sensitivity::{CombinedRegion, CurveRow};

use crate::error::{CliError, CliResult};

/// Finite reals as JSON numbers, infinities as `"inf"`/`"-inf"`, NaN as null.
pub fn real(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        Value::Null
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn opt_real(v: Option<f64>) -> Value {
    v.map_or(Value::Null, real)
}

pub fn interval(iv: &Interval) -> Value {
    let mut v = json!({
        "kind": iv.kind,
        "lo": real(iv.lo),
        "hi": real(iv.hi),
    });
    if let (Some(lo), Some(hi)) = (iv.ci_lo, iv.ci_hi) {
        v["ci_lo"] = real(lo);
        v["ci_hi"] = real(hi);
    }
    v
}

pub fn skipped(e: &trace_core::Error) -> Value {
    json!({ "skipped": e.to_string(), "reason": e.kind() })
}

/// A library result as a number, or the reason it is unavailable.
pub fn real_or_reason(r: &trace_core::Result<f64>) -> Value {
    match r {
        Ok(v) => real(*v),
        Err(e) => json!({ "unavailable": e.to_string(), "reason": e.kind() }),
    }
}

pub fn combined(c: &CombinedRegion) -> Value {
    match c {
        CombinedRegion::Region(iv) => interval(iv),
        CombinedRegion::Infeasible => json!("INFEASIBLE"),
    }
}

pub const TABLE_HEADER: &str = "trace0,trace_hat,ci_lo,ci_hi,within_trim_bounds";

pub fn curve_table(rows: &[CurveRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(TABLE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.trace0, r.trace_hat, r.ci_lo, r.ci_hi, r.within_trim_bounds
        ));
    }
    out
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Writes to `path`, or to standard output when absent.
pub fn emit(path: Option<&Path>, contents: &str) -> CliResult<()> {
    match path {
        Some(p) => write_atomic(p, contents.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(contents.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use trace_core::bounds::IntervalKind;

    #[test]
    fn reals_round_trip() {
        for v in [
            0.1,
            -1.0 / 3.0,
            1e-300,
            123456789.12345679,
            f64::MIN_POSITIVE,
        ] {
            let text = real(v).to_string();
            assert_eq!(text.parse::<f64>().unwrap(), v);
        }
        assert_eq!(real(f64::INFINITY), json!("inf"));
        assert_eq!(real(f64::NEG_INFINITY), json!("-inf"));
        assert_eq!(real(f64::NAN), Value::Null);
    }

    #[test]
    fn interval_encoding() {
        let iv = Interval::new(f64::NEG_INFINITY, -0.59, IntervalKind::PresetImplied);
        assert_eq!(
            interval(&iv),
            json!({"kind": "PRESET_IMPLIED", "lo": "-inf", "hi": -0.59})
        );
        let iv = Interval::new(1.0, 2.0, IntervalKind::NoAssumption).with_ci(0.5, 2.5);
        assert_eq!(interval(&iv)["ci_hi"], json!(2.5));
        assert_eq!(combined(&CombinedRegion::Infeasible), json!("INFEASIBLE"));
    }

    #[test]
    fn table_layout() {
        let rows = [CurveRow {
            trace0: -0.1,
            trace_hat: 1.5,
            ci_lo: 1.0,
            ci_hi: 2.0,
            within_trim_bounds: true,
        }];
        assert_eq!(
            curve_table(&rows),
            format!("{TABLE_HEADER}\n-0.1,1.5,1,2,true\n")
        );
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.txt");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"second");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        let err = write_atomic(&dir.path().join("missing/out.txt"), b"x").unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }
}
