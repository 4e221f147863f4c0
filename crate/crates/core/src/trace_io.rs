//! JSONL trace files: one `{"t_us": .., "la": [x,y,z], "g": [x,y,z]}` per line.

use std::io::{BufRead, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sensor_model::SensorSample;

/// Reads a trace, rejecting malformed lines, non-finite components and
/// non-increasing timestamps. Blank lines are skipped. Line numbers in errors
/// are 1-based.
pub fn read_trace<T: Scalar, R: BufRead>(reader: R) -> Result<Vec<SensorSample<T>>> {
    let mut out: Vec<SensorSample<T>> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let sample: SensorSample<T> = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        sample.validate().map_err(|e| Error::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        if let Some(prev) = out.last() {
            if sample.t <= prev.t {
                return Err(Error::Parse {
                    line: line_no,
                    msg: Error::NonMonotonic {
                        prev: prev.t,
                        next: sample.t,
                    }
                    .to_string(),
                });
            }
        }
        out.push(sample);
    }
    Ok(out)
}

/// Writes any serializable records as JSON lines.
pub fn write_jsonl<S: Serialize, W: Write>(mut writer: W, records: &[S]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut writer, r)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}
