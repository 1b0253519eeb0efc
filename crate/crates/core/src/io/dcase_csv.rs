//! DCASE-style strong-label CSV: `frame,class,track,azimuth,elevation[,distance]`.
//!
//! Integer fields only, no header, LF line endings. The distance column
//! (integer centimeters) is auto-detected on read.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// One strong label: an active `(class, track)` at a 100 ms frame index,
/// with its direction and distance from the microphone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct AnnotationFrame {
    /// 100 ms frame index.
    pub frame: u32,
    pub class_index: u32,
    /// Per-event identity within the file.
    pub track_index: u32,
    /// Degrees in `[-180, 180)`.
    pub azimuth: i32,
    /// Degrees in `[-90, 90]`.
    pub elevation: i32,
    /// Integer centimeters; `None` when the file uses the 5-column format.
    pub distance_cm: Option<u32>,
}

/// Duration of one annotation frame, seconds.
pub const FRAME_SECONDS: f64 = 0.1;

/// Read a DCASE CSV. Column count (5 or 6) is detected from the first row
/// and enforced for the rest of the file.
pub fn read_dcase_csv(path: impl AsRef<Path>) -> Result<Vec<AnnotationFrame>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut frames = Vec::new();
    let mut columns: Option<usize> = None;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let ncols = *columns.get_or_insert(fields.len());
        if fields.len() != ncols || !(ncols == 5 || ncols == 6) {
            return Err(Error::CsvParse {
                path: path.to_path_buf(),
                line: line_no,
                message: format!(
                    "expected {} comma-separated integer fields, found {}",
                    if ncols == 5 || ncols == 6 { ncols } else { 5 },
                    fields.len()
                ),
            });
        }
        let int = |idx: usize| -> Result<i64> {
            fields[idx].trim().parse::<i64>().map_err(|_| Error::CsvParse {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("field {} is not an integer: '{}'", idx + 1, fields[idx]),
            })
        };
        frames.push(AnnotationFrame {
            frame: int(0)? as u32,
            class_index: int(1)? as u32,
            track_index: int(2)? as u32,
            azimuth: int(3)? as i32,
            elevation: int(4)? as i32,
            distance_cm: if ncols == 6 { Some(int(5)? as u32) } else { None },
        });
    }
    Ok(frames)
}

/// Write frames as DCASE CSV. Callers hand in frames already sorted by
/// `(frame, class, track)`; output bytes are deterministic for a given list.
pub fn write_dcase_csv(
    path: impl AsRef<Path>,
    frames: &[AnnotationFrame],
    with_distance: bool,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for f in frames {
        out.push_str(&format!(
            "{},{},{},{},{}",
            f.frame, f.class_index, f.track_index, f.azimuth, f.elevation
        ));
        if with_distance {
            out.push_str(&format!(",{}", f.distance_cm.unwrap_or(0)));
        }
        out.push('\n');
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    w.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))?;
    Ok(())
}
