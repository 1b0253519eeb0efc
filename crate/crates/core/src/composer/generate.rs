//! End-to-end soundscape generation: audio, strong labels, and provenance.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::audio::{db_to_linear, AudioClip};
use crate::composer::scene::{
    instantiate, ConcreteScene, Placement, RoomModel, Sample, SceneSpec,
};
use crate::error::{Error, Result};
use crate::geometry::{
    cartesian_to_spherical, Trajectory, TrajectoryMode, Vec3,
};
use crate::io::{write_dcase_csv, write_wav, AnnotationFrame, WavEncoding, FRAME_SECONDS};
use crate::rir::{load_rir_database, nearest_rir, RirDatabase, RirFormat};
use crate::spatializer::{
    convolve, mix, pitch_shift, render_moving, scale_to_snr, time_stretch, RirSource,
};

/// Loop-seam crossfade length, seconds.
const LOOP_FADE_SECONDS: f64 = 0.05;

/// Peak ceiling applied only when a mix clips, dBFS.
const NORMALIZE_CEILING_DB: f64 = -1.0;

/// Paths and bookkeeping produced by [`generate`].
#[derive(Debug, Clone, Serialize)]
pub struct GenerateOutput {
    pub wav_path: PathBuf,
    pub csv_path: PathBuf,
    pub provenance_path: PathBuf,
    /// Gain applied to keep the peak under the ceiling; 1.0 when untouched.
    pub normalization_gain: f64,
    pub annotation_rows: usize,
}

#[derive(Serialize)]
struct Provenance<'a> {
    scene: &'a ConcreteScene,
    normalization_gain: f64,
}

enum RoomContext {
    Virtual {
        room: crate::geometry::RoomSpec<Sample>,
        array: crate::geometry::MicArray<Sample>,
    },
    Database(RirDatabase<Sample>),
}

impl RoomContext {
    fn load(scene: &ConcreteScene) -> Result<Self> {
        match &scene.room {
            RoomModel::Virtual { room, array, .. } => {
                array.validate_in_room(room)?;
                Ok(RoomContext::Virtual {
                    room: *room,
                    array: array.clone(),
                })
            }
            RoomModel::Database { path } => {
                let db = load_rir_database::<Sample>(path)?;
                if db.sample_rate != scene.sample_rate {
                    return Err(Error::Format(format!(
                        "database sample rate {} differs from scene rate {}",
                        db.sample_rate, scene.sample_rate
                    )));
                }
                if (scene.format == RirFormat::Foa) != (db.format == RirFormat::Foa) {
                    return Err(Error::Format(
                        "database format does not match the requested output format".into(),
                    ));
                }
                Ok(RoomContext::Database(db))
            }
        }
    }

    fn channels(&self, format: RirFormat) -> usize {
        match self {
            RoomContext::Virtual { array, .. } => match format {
                RirFormat::Foa => 4,
                RirFormat::Capsules => array.capsules.len(),
            },
            RoomContext::Database(db) => db.channels(),
        }
    }

    fn mic_center(&self) -> Vec3<Sample> {
        match self {
            RoomContext::Virtual { array, .. } => array.center,
            RoomContext::Database(db) => db.mic_center,
        }
    }

    fn rir_source(&self, format: RirFormat) -> RirSource<'_, Sample> {
        match self {
            RoomContext::Virtual { room, array } => RirSource::Virtual {
                room,
                array,
                format,
                max_order: None,
            },
            RoomContext::Database(db) => RirSource::Database(db),
        }
    }
}

fn load_mono(path: &Path, sample_rate: u32) -> Result<AudioClip<Sample>> {
    let clip = crate::io::read_wav::<Sample>(path)?;
    if clip.sample_rate != sample_rate {
        return Err(Error::Format(format!(
            "{}: sample rate {} does not match the scene rate {sample_rate}",
            path.display(),
            clip.sample_rate
        )));
    }
    Ok(clip.to_mono())
}

/// Loop `samples` (starting at `source_time`) out to `target_len`, blending
/// each seam with an equal-power crossfade.
fn loop_to_length(
    samples: &[Sample],
    source_time: f64,
    sample_rate: u32,
    target_len: usize,
) -> Result<Vec<Sample>> {
    if samples.is_empty() {
        return Err(Error::DegenerateSignal("background file is empty".into()));
    }
    let start = ((source_time * sample_rate as f64).round() as usize).min(samples.len() - 1);
    let body = &samples[start..];
    let body = if body.is_empty() { samples } else { body };

    let fade = ((LOOP_FADE_SECONDS * sample_rate as f64).round() as usize)
        .min(body.len() / 2);
    let mut out: Vec<Sample> = Vec::with_capacity(target_len + body.len());
    out.extend_from_slice(body);
    while out.len() < target_len {
        if fade == 0 {
            out.extend_from_slice(body);
            continue;
        }
        let seam = out.len() - fade;
        for j in 0..fade {
            let theta = (j as f64 + 0.5) / fade as f64 * std::f64::consts::FRAC_PI_2;
            out[seam + j] = out[seam + j] * theta.cos() + body[j] * theta.sin();
        }
        out.extend_from_slice(&body[fade..]);
    }
    out.truncate(target_len);
    Ok(out)
}

struct RenderedScene {
    audio: AudioClip<Sample>,
    labels: Vec<AnnotationFrame>,
    normalization_gain: f64,
    /// The concrete scene with post-render effective event extents.
    scene: ConcreteScene,
}

fn render_scene(concrete: &ConcreteScene) -> Result<RenderedScene> {
    let ctx = RoomContext::load(concrete)?;
    let fs = concrete.sample_rate;
    let channels = ctx.channels(concrete.format);
    let scene_len = (concrete.duration * fs as f64).round() as usize;
    let mic_center = ctx.mic_center();

    let mut tracks: Vec<(AudioClip<Sample>, f64)> = Vec::new();
    let mut labels: Vec<AnnotationFrame> = Vec::new();
    let mut effective = concrete.clone();

    for bg in &concrete.backgrounds {
        let mono = load_mono(&bg.file, fs)?;
        let looped = loop_to_length(&mono.samples[0], bg.source_time, fs, scene_len)?;
        let rendered = match &bg.placement {
            Placement::Diffuse => AudioClip::new(fs, vec![looped; channels])?,
            Placement::Localized(pos) => {
                let sig = AudioClip::from_mono(fs, looped);
                let out = match &ctx {
                    RoomContext::Virtual { room, array } => {
                        let order = crate::rir::default_max_order(room, *pos, array.center);
                        let rir = match concrete.format {
                            RirFormat::Foa => crate::rir::synth_foa_rir(
                                room,
                                *pos,
                                array.center,
                                fs,
                                order,
                            )?,
                            RirFormat::Capsules => {
                                crate::rir::synth_rir(room, *pos, array, fs, order)?
                            }
                        };
                        convolve(&sig, &rir)?
                    }
                    RoomContext::Database(db) => {
                        let (rir, _) = nearest_rir(db, *pos);
                        convolve(&sig, rir)?
                    }
                };
                out.slice(0, scene_len)
            }
        };
        let leveled = scale_to_snr(&rendered, concrete.ref_db, 0.0)?;
        tracks.push((leveled, 0.0));
    }

    for (ei, event) in concrete.events.iter().enumerate() {
        let mono = load_mono(&event.file, fs)?;
        let start = ((event.source_time * fs as f64).round() as usize).min(mono.len());
        let want = (event.duration * fs as f64).round() as usize;
        let mut sig = mono.slice(start, start + want);

        if let Some(semitones) = event.pitch_shift {
            if semitones != 0.0 {
                sig = pitch_shift(&sig, semitones)?;
            }
        }
        if let Some(factor) = event.time_stretch {
            if factor != 1.0 {
                sig = time_stretch(&sig, factor)?;
            }
        }
        // Clamp the post-effect extent back into the scene.
        let room_left = ((concrete.duration - event.onset) * fs as f64).floor() as usize;
        if sig.len() > room_left {
            sig = sig.slice(0, room_left);
        }
        let dur_eff = sig.len() as f64 / fs as f64;
        effective.events[ei].duration = dur_eff;
        if sig.is_empty() {
            continue;
        }

        let traj = match event.mode {
            TrajectoryMode::Static => Trajectory::stationary(event.waypoints[0]),
            mode => Trajectory::new(event.waypoints.clone(), mode, dur_eff)?,
        };
        let traj = match &ctx {
            RoomContext::Virtual { room, .. } => traj.bounded_by(room),
            RoomContext::Database(_) => traj,
        };
        let (rendered, marks) =
            render_moving(&sig, &traj, &ctx.rir_source(concrete.format), FRAME_SECONDS)?;
        let leveled = scale_to_snr(&rendered, concrete.ref_db, event.snr)?;
        tracks.push((leveled, event.onset));

        labels.extend(annotate_event(
            event.class_index,
            event.track_index,
            event.onset,
            dur_eff,
            &marks,
            mic_center,
        )?);
    }

    let audio = if tracks.is_empty() {
        AudioClip::silence(fs, channels, scene_len)
    } else {
        mix(&tracks, concrete.duration)?
    };

    // Peak-normalize only when the mix clips, preserving level relations
    // otherwise; the applied gain lands in the provenance record.
    let peak = audio.peak();
    let (audio, gain) = if peak > 1.0 {
        let gain = db_to_linear(NORMALIZE_CEILING_DB) / peak;
        (audio.scaled(gain), gain)
    } else {
        (audio, 1.0)
    };

    labels.sort();
    Ok(RenderedScene {
        audio,
        labels,
        normalization_gain: gain,
        scene: effective,
    })
}

/// Label rows for one event: every 100 ms frame overlapping
/// `[onset, onset + duration)`, with direction and distance taken from the
/// effective render position at the frame midpoint.
fn annotate_event(
    class_index: u32,
    track_index: u32,
    onset: f64,
    duration: f64,
    marks: &[(f64, Vec3<Sample>)],
    mic_center: Vec3<Sample>,
) -> Result<Vec<AnnotationFrame>> {
    if duration <= 0.0 || marks.is_empty() {
        return Ok(Vec::new());
    }
    let eps = 1e-9;
    let first = (onset / FRAME_SECONDS + eps).floor() as i64;
    let last = ((onset + duration) / FRAME_SECONDS - eps).ceil() as i64 - 1;
    let mut rows = Vec::new();
    for frame in first..=last.max(first) {
        let t_mid = (frame as f64 + 0.5) * FRAME_SECONDS;
        let rel = (t_mid - onset).clamp(0.0, duration);
        let idx = ((rel / FRAME_SECONDS).floor() as usize).min(marks.len() - 1);
        let pos = marks[idx].1;
        let (az, el, dist) = cartesian_to_spherical(pos, mic_center)?;
        rows.push(AnnotationFrame {
            frame: frame.max(0) as u32,
            class_index,
            track_index,
            azimuth: wrap_round_azimuth(az),
            elevation: el.round().clamp(-90.0, 90.0) as i32,
            distance_cm: Some((dist * 100.0).round().max(0.0) as u32),
        });
    }
    Ok(rows)
}

fn wrap_round_azimuth(az: f64) -> i32 {
    let r = az.round();
    if r >= 180.0 {
        (r - 360.0) as i32
    } else if r < -180.0 {
        (r + 360.0) as i32
    } else {
        r as i32
    }
}

/// Instantiate `scene` and write `<dest>.wav` (float32), `<dest>.csv`
/// (DCASE rows), and `<dest>.json` (the resolved scene plus any
/// normalization gain).
pub fn generate(scene: &SceneSpec, dest_path: impl AsRef<Path>) -> Result<GenerateOutput> {
    let concrete = instantiate(scene)?;
    generate_concrete(&concrete, dest_path)
}

/// [`generate`] for an already-instantiated scene.
pub fn generate_concrete(
    concrete: &ConcreteScene,
    dest_path: impl AsRef<Path>,
) -> Result<GenerateOutput> {
    let rendered = render_scene(concrete)?;

    let dest = dest_path.as_ref();
    let base = dest.with_extension("");
    let wav_path = base.with_extension("wav");
    let csv_path = base.with_extension("csv");
    let provenance_path = base.with_extension("json");
    if let Some(parent) = wav_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }

    write_wav(&wav_path, &rendered.audio, WavEncoding::Float32)?;
    write_dcase_csv(&csv_path, &rendered.labels, concrete.with_distance)?;
    let provenance = Provenance {
        scene: &rendered.scene,
        normalization_gain: rendered.normalization_gain,
    };
    let json = serde_json::to_string_pretty(&provenance)
        .map_err(|e| Error::Format(format!("provenance serialization failed: {e}")))?;
    std::fs::write(&provenance_path, json).map_err(|e| Error::io(&provenance_path, e))?;

    Ok(GenerateOutput {
        wav_path,
        csv_path,
        provenance_path,
        normalization_gain: rendered.normalization_gain,
        annotation_rows: rendered.labels.len(),
    })
}
