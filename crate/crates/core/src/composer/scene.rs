//! Scene descriptions and their seeded instantiation.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::composer::distribution::{
    sample_distribution, sample_f64, sample_string, DistributionSpec,
};
use crate::error::{Error, Result};
use crate::geometry::{MicArray, RoomSpec, TrajectoryMode, Vec3, TRAJECTORY_WALL_MARGIN};
use crate::rir::{RirFormat, DEFAULT_SAMPLE_RATE};

/// Scalar used by the scene pipeline.
pub type Sample = f64;

/// The room a scene is rendered in: a parametric virtual room or a database
/// of measured responses.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RoomModel {
    Virtual {
        room: RoomSpec<Sample>,
        array: MicArray<Sample>,
        /// Preset name or "custom"; retained for provenance.
        mic_type: String,
    },
    Database { path: PathBuf },
}

/// Where a background sits in the room.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Localized(Vec3<Sample>),
    /// Added equally to all output channels, carrying no direction.
    Diffuse,
}

/// Declarative background noise: looped for the whole scene at `ref_db`.
#[derive(Debug, Clone)]
pub struct BackgroundSpec {
    pub label: DistributionSpec,
    pub source_file: DistributionSpec,
    /// Seconds into the source file.
    pub source_time: DistributionSpec,
    pub placement: Placement,
}

/// How an event's waypoints are described.
#[derive(Debug, Clone)]
pub enum TrajectorySpec {
    /// One spec resolving to a waypoint list (or a single position).
    Whole(DistributionSpec),
    /// One spec per waypoint, each resolving to a position.
    PerWaypoint(Vec<DistributionSpec>),
}

/// Declarative foreground event.
#[derive(Debug, Clone)]
pub struct EventSpec {
    pub label: DistributionSpec,
    pub source_file: DistributionSpec,
    pub source_time: DistributionSpec,
    /// Onset in the soundscape, seconds.
    pub event_time: DistributionSpec,
    pub event_duration: DistributionSpec,
    /// dB relative to the scene reference level.
    pub snr: DistributionSpec,
    pub event_xyz: TrajectorySpec,
    /// Default: static for one waypoint, linear otherwise.
    pub trajectory_mode: Option<TrajectoryMode>,
    pub pitch_shift: Option<DistributionSpec>,
    pub time_stretch: Option<DistributionSpec>,
}

/// A distribution-parameterized soundscape description.
#[derive(Debug, Clone)]
pub struct SceneSpec {
    /// Seconds.
    pub duration: f64,
    pub room: RoomModel,
    pub format: RirFormat,
    pub sample_rate: u32,
    pub fg_path: PathBuf,
    pub bg_path: PathBuf,
    /// Reference RMS level in dBFS anchoring background loudness.
    pub ref_db: f64,
    pub seed: u64,
    pub backgrounds: Vec<BackgroundSpec>,
    pub events: Vec<EventSpec>,
    /// Explicit label-to-class-index map; discovered labels rank
    /// alphabetically when absent.
    pub class_map: Option<BTreeMap<String, u32>>,
    /// Emit the distance column in label CSVs.
    pub with_distance: bool,
}

impl SceneSpec {
    pub fn new(duration: f64, room: RoomModel, fg_path: PathBuf, bg_path: PathBuf) -> Self {
        SceneSpec {
            duration,
            room,
            format: RirFormat::Foa,
            sample_rate: DEFAULT_SAMPLE_RATE,
            fg_path,
            bg_path,
            ref_db: -50.0,
            seed: 0,
            backgrounds: Vec::new(),
            events: Vec::new(),
            class_map: None,
            with_distance: true,
        }
    }
}

/// A background with every parameter resolved.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcreteBackground {
    pub label: String,
    pub file: PathBuf,
    pub source_time: f64,
    pub placement: Placement,
}

/// An event with every parameter resolved.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcreteEvent {
    pub label: String,
    pub class_index: u32,
    pub track_index: u32,
    pub file: PathBuf,
    pub source_time: f64,
    pub onset: f64,
    pub duration: f64,
    pub snr: f64,
    pub waypoints: Vec<Vec3<Sample>>,
    pub mode: TrajectoryMode,
    pub pitch_shift: Option<f64>,
    pub time_stretch: Option<f64>,
}

/// A fully resolved scene: the provenance record and the rendering input.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcreteScene {
    pub duration: f64,
    pub room: RoomModel,
    pub format: RirFormat,
    pub sample_rate: u32,
    pub ref_db: f64,
    pub seed: u64,
    pub class_map: BTreeMap<String, u32>,
    pub backgrounds: Vec<ConcreteBackground>,
    pub events: Vec<ConcreteEvent>,
    pub with_distance: bool,
}

/// Deterministic per-event RNG stream: events keep their draws regardless of
/// how many backgrounds or sibling events exist.
pub(crate) fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(
        seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15),
    ))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn corpus_values(files: &[PathBuf]) -> Vec<Value> {
    files
        .iter()
        .map(|p| Value::from(p.to_string_lossy().into_owned()))
        .collect()
}

fn parse_positions(v: &Value) -> Result<Vec<Vec3<Sample>>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Sampling(format!("positions must be an array, got {v}")))?;
    let triple = |a: &[Value]| -> Option<Vec3<Sample>> {
        if a.len() != 3 {
            return None;
        }
        Some(Vec3::new(a[0].as_f64()?, a[1].as_f64()?, a[2].as_f64()?))
    };
    // Either one [x, y, z] or a list of them.
    if let Some(p) = triple(arr) {
        return Ok(vec![p]);
    }
    let mut out = Vec::with_capacity(arr.len());
    for item in arr {
        let inner = item
            .as_array()
            .and_then(|a| triple(a))
            .ok_or_else(|| Error::Sampling(format!("bad waypoint in {v}")))?;
        out.push(inner);
    }
    if out.is_empty() {
        return Err(Error::Sampling("waypoint list is empty".into()));
    }
    Ok(out)
}

/// Resolve every distribution in `scene` with an RNG seeded from
/// `scene.seed`. Onsets and durations are clamped into the scene; waypoint
/// positions are clamped into virtual rooms with a 1 cm wall margin.
pub fn instantiate(scene: &SceneSpec) -> Result<ConcreteScene> {
    let fg = crate::io::scan_corpus(&scene.fg_path)?;
    let fg_labels: Vec<Value> = fg.keys().map(|k| Value::from(k.as_str())).collect();
    if fg.is_empty() {
        return Err(Error::Corpus(format!(
            "foreground corpus {} has no class subdirectories",
            scene.fg_path.display()
        )));
    }

    let class_map: BTreeMap<String, u32> = match &scene.class_map {
        Some(map) => map.clone(),
        None => fg
            .keys()
            .enumerate()
            .map(|(i, k)| (k.clone(), i as u32))
            .collect(),
    };

    let room_clamp: Option<RoomSpec<Sample>> = match &scene.room {
        RoomModel::Virtual { room, .. } => Some(*room),
        RoomModel::Database { .. } => None,
    };
    let clamp_pos = |p: Vec3<Sample>| -> Vec3<Sample> {
        match &room_clamp {
            Some(room) => room.clamp_inside(p, TRAJECTORY_WALL_MARGIN),
            None => p,
        }
    };

    // Backgrounds draw from the scene-level stream; events from per-index
    // substreams.
    let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
    let bg = if scene.backgrounds.is_empty() {
        BTreeMap::new()
    } else {
        crate::io::scan_corpus(&scene.bg_path)?
    };
    let bg_labels: Vec<Value> = bg.keys().map(|k| Value::from(k.as_str())).collect();

    let mut backgrounds = Vec::with_capacity(scene.backgrounds.len());
    for (i, spec) in scene.backgrounds.iter().enumerate() {
        let label = sample_string(&spec.label, &mut rng, Some(&bg_labels), "background label")?;
        let files = bg.get(&label).ok_or_else(|| {
            Error::Corpus(format!(
                "background label '{label}' has no subdirectory under {}",
                scene.bg_path.display()
            ))
        })?;
        if files.is_empty() {
            return Err(Error::Corpus(format!(
                "background label '{label}' has no WAV files"
            )));
        }
        let file = PathBuf::from(sample_string(
            &spec.source_file,
            &mut rng,
            Some(&corpus_values(files)),
            "background source file",
        )?);
        let source_time = sample_f64(&spec.source_time, &mut rng, "background source time")?
            .max(0.0);
        let placement = match spec.placement {
            Placement::Localized(p) => Placement::Localized(clamp_pos(p)),
            Placement::Diffuse => Placement::Diffuse,
        };
        backgrounds.push(ConcreteBackground {
            label,
            file,
            source_time,
            placement,
        });
        let _ = i;
    }

    let mut events = Vec::with_capacity(scene.events.len());
    for (i, spec) in scene.events.iter().enumerate() {
        let mut rng = substream(scene.seed, i as u64);
        let label = sample_string(&spec.label, &mut rng, Some(&fg_labels), "event label")?;
        let files = fg.get(&label).ok_or_else(|| {
            Error::Corpus(format!(
                "event label '{label}' has no subdirectory under {}",
                scene.fg_path.display()
            ))
        })?;
        if files.is_empty() {
            return Err(Error::Corpus(format!("event label '{label}' has no WAV files")));
        }
        let class_index = *class_map.get(&label).ok_or_else(|| {
            Error::Corpus(format!("label '{label}' is missing from the class map"))
        })?;
        let file = PathBuf::from(sample_string(
            &spec.source_file,
            &mut rng,
            Some(&corpus_values(files)),
            "event source file",
        )?);
        let source_time = sample_f64(&spec.source_time, &mut rng, "event source time")?.max(0.0);
        let onset = sample_f64(&spec.event_time, &mut rng, "event time")?
            .clamp(0.0, scene.duration);
        let duration = sample_f64(&spec.event_duration, &mut rng, "event duration")?
            .max(0.0)
            .min(scene.duration - onset);
        let snr = sample_f64(&spec.snr, &mut rng, "event snr")?;

        let waypoints: Vec<Vec3<Sample>> = match &spec.event_xyz {
            TrajectorySpec::Whole(d) => {
                parse_positions(&sample_distribution(d, &mut rng, None)?)?
            }
            TrajectorySpec::PerWaypoint(list) => {
                let mut out = Vec::with_capacity(list.len());
                for d in list {
                    let v = sample_distribution(d, &mut rng, None)?;
                    let mut p = parse_positions(&v)?;
                    if p.len() != 1 {
                        return Err(Error::Sampling(
                            "per-waypoint specs must each resolve to one position".into(),
                        ));
                    }
                    out.push(p.remove(0));
                }
                out
            }
        };
        let waypoints: Vec<Vec3<Sample>> = waypoints.into_iter().map(clamp_pos).collect();
        let mode = match spec.trajectory_mode {
            Some(TrajectoryMode::RandomWalk { .. }) => TrajectoryMode::RandomWalk {
                seed: rng.gen::<u64>(),
            },
            Some(m) => m,
            None if waypoints.len() == 1 => TrajectoryMode::Static,
            None => TrajectoryMode::Linear,
        };
        if mode == TrajectoryMode::Static && waypoints.len() > 1 {
            return Err(Error::Geometry(
                "static trajectory given several waypoints".into(),
            ));
        }

        let pitch_shift = spec
            .pitch_shift
            .as_ref()
            .map(|d| sample_f64(d, &mut rng, "pitch shift"))
            .transpose()?;
        let time_stretch = spec
            .time_stretch
            .as_ref()
            .map(|d| sample_f64(d, &mut rng, "time stretch"))
            .transpose()?;

        events.push(ConcreteEvent {
            label,
            class_index,
            track_index: i as u32,
            file,
            source_time,
            onset,
            duration,
            snr,
            waypoints,
            mode,
            pitch_shift,
            time_stretch,
        });
    }

    Ok(ConcreteScene {
        duration: scene.duration,
        room: scene.room.clone(),
        format: scene.format,
        sample_rate: scene.sample_rate,
        ref_db: scene.ref_db,
        seed: scene.seed,
        class_map,
        backgrounds,
        events,
        with_distance: scene.with_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_noise_wav(path: &std::path::Path, seed: u64, secs: f64) {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        let n = (24000.0 * secs) as usize;
        let mut state = seed.max(1);
        let samples: Vec<f64> = (0..n)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                ((state as f64 / u64::MAX as f64) * 2.0 - 1.0) * 0.25
            })
            .collect();
        crate::io::write_wav(
            path,
            &crate::audio::AudioClip::from_mono(24000, samples),
            crate::io::WavEncoding::Float32,
        )
        .unwrap();
    }

    fn corpus(name: &str) -> (PathBuf, PathBuf) {
        let root = std::env::temp_dir().join(format!("roomscape-scene-{name}"));
        let _ = std::fs::remove_dir_all(&root);
        let fg = root.join("fg");
        let bg = root.join("bg");
        write_noise_wav(&fg.join("dog/d1.wav"), 1, 1.0);
        write_noise_wav(&fg.join("dog/d2.wav"), 2, 1.0);
        write_noise_wav(&fg.join("dog/d3.wav"), 5, 1.0);
        write_noise_wav(&fg.join("music/m1.wav"), 3, 1.0);
        write_noise_wav(&bg.join("back/b1.wav"), 4, 2.0);
        (fg, bg)
    }

    fn base_scene(fg: PathBuf, bg: PathBuf) -> SceneSpec {
        let room = RoomSpec::new(Vec3::new(5.0, 3.0, 2.0), 0.5).unwrap();
        let array = MicArray::single_omni(Vec3::new(2.5, 1.5, 1.0));
        SceneSpec::new(
            10.0,
            RoomModel::Virtual {
                room,
                array,
                mic_type: "custom".into(),
            },
            fg,
            bg,
        )
    }

    fn const_event(label: &str) -> EventSpec {
        EventSpec {
            label: DistributionSpec::constant(label),
            source_file: DistributionSpec::Choose(vec![]),
            source_time: DistributionSpec::constant(0.0),
            event_time: DistributionSpec::constant(2.0),
            event_duration: DistributionSpec::constant(1.0),
            snr: DistributionSpec::constant(10.0),
            event_xyz: TrajectorySpec::Whole(DistributionSpec::constant(serde_json::json!([
                [4.0, 0.1, 0.2],
                [4.5, 0.1, 1.9]
            ]))),
            trajectory_mode: None,
            pitch_shift: None,
            time_stretch: None,
        }
    }

    #[test]
    fn const_specs_resolve_literally() {
        let (fg, bg) = corpus("literal");
        let mut scene = base_scene(fg, bg);
        scene.events.push(const_event("dog"));
        let concrete = instantiate(&scene).unwrap();
        let ev = &concrete.events[0];
        assert_eq!(ev.label, "dog");
        assert_eq!(ev.onset, 2.0);
        assert_eq!(ev.duration, 1.0);
        assert_eq!(ev.snr, 10.0);
        assert_eq!(ev.mode, TrajectoryMode::Linear);
        assert_eq!(ev.waypoints.len(), 2);
        assert_eq!(ev.class_index, 0); // "dog" < "music"
        assert_eq!(concrete.class_map["music"], 1);
    }

    #[test]
    fn same_seed_is_deterministic() {
        let (fg, bg) = corpus("determinism");
        let mut scene = base_scene(fg, bg);
        scene.seed = 1234;
        let mut ev = const_event("dog");
        ev.event_time = DistributionSpec::Uniform { lo: 0.0, hi: 8.0 };
        ev.snr = DistributionSpec::Normal {
            mean: 10.0,
            std: 3.0,
            bounds: Some((0.0, 20.0)),
        };
        scene.events.push(ev);
        let a = instantiate(&scene).unwrap();
        let b = instantiate(&scene).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        scene.seed = 1235;
        let c = instantiate(&scene).unwrap();
        assert_ne!(a.events[0].onset, c.events[0].onset);
    }

    #[test]
    fn corpus_choose_is_roughly_uniform() {
        let (fg, bg) = corpus("uniform-choice");
        let mut counts: BTreeMap<PathBuf, usize> = BTreeMap::new();
        for seed in 0..300u64 {
            let mut scene = base_scene(fg.clone(), bg.clone());
            scene.seed = seed;
            scene.events.push(const_event("dog"));
            let concrete = instantiate(&scene).unwrap();
            *counts.entry(concrete.events[0].file.clone()).or_default() += 1;
        }
        assert_eq!(counts.len(), 3);
        for (file, n) in counts {
            assert!(
                (65..=135).contains(&n),
                "{}: {n} draws out of 300",
                file.display()
            );
        }
    }

    #[test]
    fn onset_and_duration_clamped() {
        let (fg, bg) = corpus("clamp");
        let mut scene = base_scene(fg, bg);
        let mut ev = const_event("dog");
        ev.event_time = DistributionSpec::constant(9.5);
        ev.event_duration = DistributionSpec::constant(5.0);
        scene.events.push(ev);
        let concrete = instantiate(&scene).unwrap();
        assert_eq!(concrete.events[0].onset, 9.5);
        assert!((concrete.events[0].duration - 0.5).abs() < 1e-12);
    }

    #[test]
    fn waypoints_clamped_into_room() {
        let (fg, bg) = corpus("clamp-pos");
        let mut scene = base_scene(fg, bg);
        let mut ev = const_event("dog");
        ev.event_xyz = TrajectorySpec::Whole(DistributionSpec::constant(serde_json::json!([
            [-1.0, 0.0, 5.0]
        ])));
        scene.events.push(ev);
        let concrete = instantiate(&scene).unwrap();
        let p = concrete.events[0].waypoints[0];
        assert_eq!(p, Vec3::new(0.01, 0.01, 1.99));
        assert_eq!(concrete.events[0].mode, TrajectoryMode::Static);
    }

    #[test]
    fn class_map_override_wins() {
        let (fg, bg) = corpus("class-map");
        let mut scene = base_scene(fg, bg);
        scene.class_map = Some(
            [("dog".to_string(), 7u32), ("music".to_string(), 2u32)]
                .into_iter()
                .collect(),
        );
        scene.events.push(const_event("dog"));
        let concrete = instantiate(&scene).unwrap();
        assert_eq!(concrete.events[0].class_index, 7);
        assert_eq!(concrete.class_map["music"], 2);
    }

    #[test]
    fn unresolvable_label_is_a_corpus_error() {
        let (fg, bg) = corpus("bad-label");
        let mut scene = base_scene(fg, bg);
        scene.events.push(const_event("cat"));
        assert!(matches!(instantiate(&scene), Err(Error::Corpus(_))));
    }

    #[test]
    fn per_waypoint_specs_resolve_independently() {
        let (fg, bg) = corpus("per-waypoint");
        let mut scene = base_scene(fg, bg);
        let mut ev = const_event("dog");
        ev.event_xyz = TrajectorySpec::PerWaypoint(vec![
            DistributionSpec::constant(serde_json::json!([1.0, 1.0, 1.0])),
            DistributionSpec::constant(serde_json::json!([4.0, 2.0, 1.5])),
        ]);
        scene.events.push(ev);
        let concrete = instantiate(&scene).unwrap();
        assert_eq!(concrete.events[0].waypoints.len(), 2);
        assert_eq!(concrete.events[0].mode, TrajectoryMode::Linear);
    }
}
