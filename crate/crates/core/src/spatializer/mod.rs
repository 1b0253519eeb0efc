//! Rendering machinery: convolution, moving sources, levels, and mixing.

mod convolve;
mod vocoder;

pub use convolve::{convolve, convolve_direct};
pub use vocoder::{pitch_shift, time_stretch};

use std::collections::HashMap;

use crate::audio::{db_to_linear, AudioClip};
use crate::error::{Error, Result};
use crate::float::Float;
use crate::geometry::{sample_trajectory, MicArray, RoomSpec, Trajectory, Vec3};
use crate::rir::{
    default_max_order, nearest_rir, synth_foa_rir, synth_rir, Rir, RirDatabase, RirFormat,
};

/// Where the RIR for a source position comes from.
pub enum RirSource<'a, T> {
    /// Synthesize in a virtual room. `max_order` of `None` picks the default
    /// order for the room.
    Virtual {
        room: &'a RoomSpec<T>,
        array: &'a MicArray<T>,
        format: RirFormat,
        max_order: Option<usize>,
    },
    /// Snap to the nearest measured response.
    Database(&'a RirDatabase<T>),
}

impl<'a, T: Float> RirSource<'a, T> {
    fn rir_at(&self, pos: Vec3<T>, sample_rate: u32) -> Result<(Rir<T>, Vec3<T>)> {
        match self {
            RirSource::Virtual {
                room,
                array,
                format,
                max_order,
            } => {
                let order =
                    max_order.unwrap_or_else(|| default_max_order(room, pos, array.center));
                let rir = match format {
                    RirFormat::Foa => {
                        synth_foa_rir(room, pos, array.center, sample_rate, order)?
                    }
                    RirFormat::Capsules => synth_rir(room, pos, array, sample_rate, order)?,
                };
                Ok((rir, pos))
            }
            RirSource::Database(db) => {
                if db.sample_rate != sample_rate {
                    return Err(Error::Format(format!(
                        "database sample rate {} differs from signal rate {sample_rate}",
                        db.sample_rate
                    )));
                }
                let (rir, snapped) = nearest_rir(db, pos);
                Ok((rir.clone(), snapped))
            }
        }
    }
}

/// Render a mono signal moving along `traj` into multichannel room audio.
///
/// The trajectory is sampled once per `hop` seconds at segment midpoints; the
/// signal is cut into hop-length segments under complementary linear ramps of
/// half a hop, each segment convolved with the RIR for its position, and the
/// results overlap-added. Returns the rendered audio and the per-segment
/// `(time, effective position)` pairs used for labeling; with a database
/// source the effective position is the snapped recording position.
pub fn render_moving<T: Float>(
    signal: &AudioClip<T>,
    traj: &Trajectory<T>,
    rir_source: &RirSource<'_, T>,
    hop: f64,
) -> Result<(AudioClip<T>, Vec<(f64, Vec3<T>)>)> {
    if signal.channels() != 1 {
        return Err(Error::Format(format!(
            "moving-source input must be mono, got {} channels",
            signal.channels()
        )));
    }
    if !(hop > 0.0) {
        return Err(Error::Range {
            what: "render hop",
            value: hop,
            min: f64::MIN_POSITIVE,
            max: f64::INFINITY,
        });
    }
    let fs = signal.sample_rate as f64;
    let len = signal.len();
    let sig_dur = len as f64 / fs;
    let traj_dur = traj.duration.as_f64();
    let moving = !matches!(traj.mode, crate::geometry::TrajectoryMode::Static);
    if moving && (traj_dur - sig_dur).abs() > 1.0 / fs {
        return Err(Error::Format(format!(
            "trajectory duration {traj_dur:.6} s does not match signal duration {sig_dur:.6} s"
        )));
    }
    if len == 0 {
        return Ok((AudioClip::silence(signal.sample_rate, 1, 0), Vec::new()));
    }

    let hop_samples = ((hop * fs).round() as usize).max(1);
    let fade = hop_samples / 2;
    let n_segments = len.div_ceil(hop_samples);

    // One RIR per distinct effective position; segments reference them by
    // index, so static stretches and database snaps synthesize only once.
    let mut rirs: Vec<Rir<T>> = Vec::new();
    let mut by_pos: HashMap<[i64; 3], usize> = HashMap::new();
    let mut seg_rir = Vec::with_capacity(n_segments);
    let mut marks = Vec::with_capacity(n_segments);
    for k in 0..n_segments {
        let t = ((k as f64 + 0.5) * hop).min(sig_dur);
        let pos = sample_trajectory(traj, T::cast(t.min(traj_dur)))?;
        let effective = match rir_source {
            RirSource::Database(db) => nearest_rir(db, pos).1,
            _ => pos,
        };
        let key = [
            (effective.x.as_f64() * 1e4).round() as i64,
            (effective.y.as_f64() * 1e4).round() as i64,
            (effective.z.as_f64() * 1e4).round() as i64,
        ];
        let idx = match by_pos.get(&key) {
            Some(&i) => i,
            None => {
                let (rir, _) = rir_source.rir_at(effective, signal.sample_rate)?;
                rirs.push(rir);
                by_pos.insert(key, rirs.len() - 1);
                rirs.len() - 1
            }
        };
        seg_rir.push(idx);
        marks.push((t, effective));
    }

    let channels = rirs[0].channels();
    let max_rir_len = rirs.iter().map(|r| r.len()).max().unwrap();
    if rirs.iter().any(|r| r.channels() != channels) {
        return Err(Error::Format("RIR channel count varies across segments".into()));
    }
    let out_len = len + max_rir_len - 1;
    let mut out = vec![vec![T::zero(); out_len]; channels];

    // Complementary linear ramps of `fade` samples centered on each segment
    // boundary; they sum to exactly 1 everywhere, so identical RIRs make the
    // overlap-add collapse to a single convolution.
    let ramp = |r: usize| (r as f64 + 0.5) / fade as f64;
    let sig = &signal.samples[0];
    let mut windowed: Vec<T> = Vec::new();
    for k in 0..n_segments {
        let b0 = k * hop_samples;
        let b1 = (k + 1) * hop_samples;
        let start = if k == 0 { 0 } else { b0 - fade / 2 };
        let end = if k == n_segments - 1 {
            len
        } else {
            (b1 - fade / 2 + fade).min(len)
        };
        if start >= end {
            continue;
        }
        windowed.clear();
        windowed.extend(sig[start..end].iter().copied());
        if fade > 0 {
            for (j, w) in windowed.iter_mut().enumerate() {
                let n = start + j;
                let mut g = 1.0f64;
                if k > 0 {
                    let r = n - (b0 - fade / 2);
                    if r < fade {
                        g *= ramp(r);
                    }
                }
                if k < n_segments - 1 {
                    let fall_start = b1 - fade / 2;
                    if n >= fall_start {
                        let r = n - fall_start;
                        g *= if r < fade { 1.0 - ramp(r) } else { 0.0 };
                    }
                }
                *w *= T::cast(g);
            }
        }
        let rendered = convolve::convolve_channels(&windowed, &rirs[seg_rir[k]].taps)?;
        for (ch, seg_out) in rendered.iter().enumerate() {
            let dst = &mut out[ch][start..];
            for (d, &s) in dst.iter_mut().zip(seg_out.iter()) {
                *d += s;
            }
        }
    }

    Ok((AudioClip::new(signal.sample_rate, out)?, marks))
}

/// Scale a clip so its active-extent RMS sits at
/// `reference_rms_db + snr_db` dBFS.
pub fn scale_to_snr<T: Float>(
    event: &AudioClip<T>,
    reference_rms_db: f64,
    snr_db: f64,
) -> Result<AudioClip<T>> {
    if event.rms() <= 0.0 {
        return Err(Error::DegenerateSignal(
            "cannot scale a silent clip to a target level".into(),
        ));
    }
    let current_db = event.active_rms_db();
    let gain = db_to_linear(reference_rms_db + snr_db - current_db);
    Ok(event.scaled(T::cast(gain)))
}

/// Sample-accurate sum of `(clip, onset seconds)` tracks into a buffer of
/// `duration` seconds. Tracks running past the end are truncated; no
/// normalization is applied.
pub fn mix<T: Float>(tracks: &[(AudioClip<T>, f64)], duration: f64) -> Result<AudioClip<T>> {
    let first = tracks
        .first()
        .ok_or_else(|| Error::Format("mix needs at least one track".into()))?;
    let sample_rate = first.0.sample_rate;
    let channels = first.0.channels();
    for (clip, onset) in tracks {
        if clip.sample_rate != sample_rate {
            return Err(Error::Format(format!(
                "mixed track sample rate {} differs from {}",
                clip.sample_rate, sample_rate
            )));
        }
        if clip.channels() != channels {
            return Err(Error::Format(format!(
                "mixed track has {} channels, expected {channels}",
                clip.channels()
            )));
        }
        if *onset < 0.0 {
            return Err(Error::Range {
                what: "track onset",
                value: *onset,
                min: 0.0,
                max: f64::INFINITY,
            });
        }
    }
    let out_len = (duration * sample_rate as f64).round() as usize;
    let mut out = vec![vec![T::zero(); out_len]; channels];
    for (clip, onset) in tracks {
        let offset = (onset * sample_rate as f64).round() as usize;
        if offset >= out_len {
            continue;
        }
        let n = clip.len().min(out_len - offset);
        for (ch, src) in clip.samples.iter().enumerate() {
            let dst = &mut out[ch][offset..offset + n];
            for (d, &s) in dst.iter_mut().zip(src.iter()) {
                *d += s;
            }
        }
    }
    AudioClip::new(sample_rate, out)
}
