//! Line-delimited JSON input files.

use std::path::Path;

use curvegrid::index_file::CurveRecord;
use curvegrid::{Curve, Error, Result, StampedPoint};
use serde_json::Value;

fn records<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str(l).map_err(|e| Error::Format(format!("{}:{}: {e}", path.display(), n + 1)))
        })
        .collect()
}

pub fn curves(path: &Path) -> Result<Vec<Curve>> {
    let curves = records::<CurveRecord>(path)?
        .into_iter()
        .map(Curve::try_from)
        .collect::<Result<Vec<_>>>()
        .map_err(|e| match e {
            Error::DimensionMismatch { .. } | Error::EmptyInput(_) | Error::InvalidParameter(_) => {
                Error::Format(format!("{}: {e}", path.display()))
            }
            e => e,
        })?;
    if let Some(first) = curves.first() {
        if let Some(c) = curves.iter().find(|c| c.dim() != first.dim()) {
            return Err(Error::Format(format!(
                "{}: curve {:?} has dimension {}, expected {}",
                path.display(),
                c.id(),
                c.dim(),
                first.dim()
            )));
        }
    }
    Ok(curves)
}

pub fn points(path: &Path) -> Result<Vec<StampedPoint>> {
    records(path)
}

/// Time windows, one per line, as `[from, to]` or `{"from": .., "to": ..}`.
pub fn windows(path: &Path) -> Result<Vec<(f64, f64)>> {
    records::<Value>(path)?
        .into_iter()
        .map(|v| {
            let pair = match &v {
                Value::Array(a) if a.len() == 2 => (a[0].as_f64(), a[1].as_f64()),
                Value::Object(o) => (o.get("from").and_then(Value::as_f64), o.get("to").and_then(Value::as_f64)),
                _ => (None, None),
            };
            match pair {
                (Some(a), Some(b)) => Ok((a, b)),
                _ => Err(Error::Format(format!("{}: malformed window {v}", path.display()))),
            }
        })
        .collect()
}
