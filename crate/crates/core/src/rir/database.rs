//! Databases of measured RIRs indexed by recording position.
//!
//! On-disk layout: a directory holding `meta.json` with
//! `{room_id, sample_rate, format, positions: [[x, y, z], ...]}` and one
//! `rir_<index>.wav` per position (float32; channel count is the capsule
//! count, or 4 for FOA). Index order matches `positions`.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::float::Float;
use crate::geometry::Vec3;
use crate::rir::{Rir, RirFormat};

/// A read-only set of measured RIRs for one room.
#[derive(Debug, Clone)]
pub struct RirDatabase<T> {
    pub room_id: String,
    pub sample_rate: u32,
    pub format: RirFormat,
    /// Microphone position the recordings were made at; entry positions are
    /// in the same coordinate frame. Labels measure directions from here.
    pub mic_center: Vec3<T>,
    /// `(recording position, response)` pairs.
    pub entries: Vec<(Vec3<T>, Rir<T>)>,
}

impl<T: Float> RirDatabase<T> {
    pub fn new(
        room_id: String,
        sample_rate: u32,
        format: RirFormat,
        entries: Vec<(Vec3<T>, Rir<T>)>,
    ) -> Result<Self> {
        Self::with_mic_center(room_id, sample_rate, format, Vec3::splat(T::zero()), entries)
    }

    pub fn with_mic_center(
        room_id: String,
        sample_rate: u32,
        format: RirFormat,
        mic_center: Vec3<T>,
        entries: Vec<(Vec3<T>, Rir<T>)>,
    ) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Layout("RIR database has no entries".into()));
        }
        let channels = entries[0].1.channels();
        for (i, (_, rir)) in entries.iter().enumerate() {
            if rir.sample_rate != sample_rate {
                return Err(Error::Layout(format!(
                    "entry {i} sample rate {} differs from database rate {sample_rate}",
                    rir.sample_rate
                )));
            }
            if rir.channels() != channels {
                return Err(Error::Layout(format!(
                    "entry {i} has {} channels, expected {channels}",
                    rir.channels()
                )));
            }
            if rir.format != format {
                return Err(Error::Layout(format!("entry {i} format mismatch")));
            }
        }
        Ok(RirDatabase {
            room_id,
            sample_rate,
            format,
            mic_center,
            entries,
        })
    }

    pub fn channels(&self) -> usize {
        self.entries[0].1.channels()
    }
}

#[derive(Deserialize)]
struct Meta {
    room_id: String,
    sample_rate: u32,
    format: String,
    /// Optional; recordings are assumed mic-relative when absent.
    #[serde(default)]
    mic_center: Option<[f64; 3]>,
    positions: Vec<[f64; 3]>,
}

/// Load a measured-RIR database from `path`.
pub fn load_rir_database<T: Float>(path: impl AsRef<Path>) -> Result<RirDatabase<T>> {
    let dir = path.as_ref();
    let meta_path = dir.join("meta.json");
    let text = std::fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: Meta = serde_json::from_str(&text).map_err(|e| {
        Error::Layout(format!("{}: invalid meta.json: {e}", meta_path.display()))
    })?;
    let format = match meta.format.as_str() {
        "capsules" => RirFormat::Capsules,
        "foa" => RirFormat::Foa,
        other => {
            return Err(Error::Layout(format!(
                "{}: unknown format '{other}' (expected 'capsules' or 'foa')",
                meta_path.display()
            )))
        }
    };
    if meta.positions.is_empty() {
        return Err(Error::Layout(format!(
            "{}: positions list is empty",
            meta_path.display()
        )));
    }

    let mic = meta.mic_center.unwrap_or([0.0; 3]);
    let mic_center = Vec3::new(T::cast(mic[0]), T::cast(mic[1]), T::cast(mic[2]));
    let mut entries = Vec::with_capacity(meta.positions.len());
    for (i, pos) in meta.positions.iter().enumerate() {
        let wav_path = dir.join(format!("rir_{i}.wav"));
        let clip = crate::io::read_wav::<T>(&wav_path)?;
        if clip.sample_rate != meta.sample_rate {
            return Err(Error::Layout(format!(
                "{}: sample rate {} differs from meta.json rate {}",
                wav_path.display(),
                clip.sample_rate,
                meta.sample_rate
            )));
        }
        let position = Vec3::new(T::cast(pos[0]), T::cast(pos[1]), T::cast(pos[2]));
        let rir = Rir::new(
            clip.sample_rate,
            clip.samples,
            position,
            mic_center,
            format,
        )?;
        entries.push((position, rir));
    }
    RirDatabase::with_mic_center(meta.room_id, meta.sample_rate, format, mic_center, entries)
}

/// The database entry closest to `pos` (Euclidean), together with the
/// snapped position. Ties break toward the lowest entry index.
pub fn nearest_rir<T: Float>(db: &RirDatabase<T>, pos: Vec3<T>) -> (&Rir<T>, Vec3<T>) {
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for (i, (p, _)) in db.entries.iter().enumerate() {
        let d = p.distance(pos).as_f64();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    let (p, rir) = &db.entries[best];
    (rir, *p)
}
