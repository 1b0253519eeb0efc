//! Scene config parsing with exhaustive validation.
//!
//! The config document mirrors [`SceneSpec`](crate::composer::SceneSpec)
//! field for field; distribution values use the tagged-array encoding of
//! [`DistributionSpec`](crate::composer::DistributionSpec). Validation
//! collects every violation before failing, each tagged with a JSON pointer.

use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::composer::{
    BackgroundSpec, DistributionSpec, EventSpec, Placement, RoomModel, SceneSpec, TrajectorySpec,
};
use crate::error::{Error, Result, SchemaViolation};
use crate::geometry::{Capsule, Directivity, MicArray, RoomSpec, TrajectoryMode, Vec3};
use crate::rir::{RirFormat, DEFAULT_SAMPLE_RATE};

struct Checker {
    violations: Vec<SchemaViolation>,
}

impl Checker {
    fn flag(&mut self, pointer: impl Into<String>, message: impl Into<String>) {
        self.violations.push(SchemaViolation {
            pointer: pointer.into(),
            message: message.into(),
        });
    }

    fn number(&mut self, v: Option<&Value>, ptr: &str) -> Option<f64> {
        match v {
            Some(x) => match x.as_f64() {
                Some(n) => Some(n),
                None => {
                    self.flag(ptr, format!("expected a number, got {x}"));
                    None
                }
            },
            None => {
                self.flag(ptr, "missing required number");
                None
            }
        }
    }

    fn string(&mut self, v: Option<&Value>, ptr: &str) -> Option<String> {
        match v {
            Some(x) => match x.as_str() {
                Some(s) => Some(s.to_string()),
                None => {
                    self.flag(ptr, format!("expected a string, got {x}"));
                    None
                }
            },
            None => {
                self.flag(ptr, "missing required string");
                None
            }
        }
    }

    fn dist(&mut self, v: Option<&Value>, ptr: &str) -> Option<DistributionSpec> {
        match v {
            Some(x) => match DistributionSpec::from_json(x) {
                Ok(d) => Some(d),
                Err(e) => {
                    self.flag(ptr, e.to_string());
                    None
                }
            },
            None => {
                self.flag(ptr, "missing required distribution spec");
                None
            }
        }
    }

    fn vec3(&mut self, v: Option<&Value>, ptr: &str) -> Option<Vec3<f64>> {
        let arr = v.and_then(Value::as_array);
        match arr {
            Some(a) if a.len() == 3 => {
                let mut out = [0.0; 3];
                for (i, item) in a.iter().enumerate() {
                    match item.as_f64() {
                        Some(n) => out[i] = n,
                        None => {
                            self.flag(format!("{ptr}/{i}"), "expected a number");
                            return None;
                        }
                    }
                }
                Some(Vec3::new(out[0], out[1], out[2]))
            }
            Some(a) => {
                self.flag(ptr, format!("expected 3 coordinates, got {}", a.len()));
                None
            }
            None => {
                self.flag(ptr, "expected an [x, y, z] array");
                None
            }
        }
    }
}

fn parse_mic(
    c: &mut Checker,
    room: &Value,
    room_spec: Option<&RoomSpec<f64>>,
) -> Option<(MicArray<f64>, String)> {
    let center = c.vec3(room.get("mic_loc"), "/room/mic_loc")?;
    match room.get("mic_type") {
        Some(Value::String(name)) => match MicArray::preset(name, center) {
            Ok(array) => Some((array, name.clone())),
            Err(e) => {
                c.flag("/room/mic_type", e.to_string());
                None
            }
        },
        Some(Value::Array(caps)) => {
            let mut capsules = Vec::new();
            for (i, cap) in caps.iter().enumerate() {
                let ptr = format!("/room/mic_type/{i}");
                let offset = c.vec3(cap.get("offset"), &format!("{ptr}/offset"))?;
                let directivity = match cap.get("directivity") {
                    None | Some(Value::String(_))
                        if cap.get("directivity").and_then(Value::as_str) == Some("omni")
                            || cap.get("directivity").is_none() =>
                    {
                        Directivity::Omni
                    }
                    Some(Value::Object(o)) if o.contains_key("cardioid") => {
                        let look =
                            c.vec3(o.get("cardioid"), &format!("{ptr}/directivity/cardioid"))?;
                        Directivity::Cardioid {
                            look: look.normalized(),
                        }
                    }
                    Some(other) => {
                        c.flag(
                            format!("{ptr}/directivity"),
                            format!("expected \"omni\" or {{\"cardioid\": [x,y,z]}}, got {other}"),
                        );
                        return None;
                    }
                    None => Directivity::Omni,
                };
                capsules.push(Capsule { offset, directivity });
            }
            match MicArray::new(center, capsules) {
                Ok(array) => Some((array, "custom".into())),
                Err(e) => {
                    c.flag("/room/mic_type", e.to_string());
                    None
                }
            }
        }
        Some(other) => {
            c.flag(
                "/room/mic_type",
                format!("expected a preset name or capsule list, got {other}"),
            );
            None
        }
        None => {
            c.flag("/room/mic_type", "missing microphone definition");
            None
        }
    }
    .and_then(|(array, name)| {
        if let Some(rs) = room_spec {
            if let Err(e) = array.validate_in_room(rs) {
                c.flag("/room/mic_loc", e.to_string());
                return None;
            }
        }
        Some((array, name))
    })
}

fn parse_room(c: &mut Checker, v: Option<&Value>) -> Option<RoomModel> {
    let room = match v {
        Some(Value::Object(_)) => v.unwrap(),
        Some(other) => {
            c.flag("/room", format!("expected an object, got {other}"));
            return None;
        }
        None => {
            c.flag("/room", "missing room definition");
            return None;
        }
    };
    match room.get("kind").and_then(Value::as_str) {
        Some("virtual") | None => {
            let dims = c.vec3(room.get("dims"), "/room/dims");
            let decay = c.number(room.get("decay"), "/room/decay");
            let speed = match room.get("speed_of_sound") {
                Some(v) => c.number(Some(v), "/room/speed_of_sound"),
                None => Some(crate::geometry::DEFAULT_SPEED_OF_SOUND),
            };
            let (dims, decay, speed) = (dims?, decay?, speed?);
            let spec = match RoomSpec::with_speed_of_sound(dims, decay, speed) {
                Ok(s) => s,
                Err(e) => {
                    c.flag("/room", e.to_string());
                    return None;
                }
            };
            let (array, mic_type) = parse_mic(c, room, Some(&spec))?;
            Some(RoomModel::Virtual {
                room: spec,
                array,
                mic_type,
            })
        }
        Some("database") => {
            let path = c.string(room.get("path"), "/room/path")?;
            Some(RoomModel::Database {
                path: PathBuf::from(path),
            })
        }
        Some(other) => {
            c.flag("/room/kind", format!("unknown room kind '{other}'"));
            None
        }
    }
}

fn parse_background(c: &mut Checker, v: &Value, ptr: &str) -> Option<BackgroundSpec> {
    let label = c.dist(v.get("label"), &format!("{ptr}/label"));
    let source_file = c.dist(v.get("source_file"), &format!("{ptr}/source_file"));
    let source_time = match v.get("source_time") {
        Some(st) => c.dist(Some(st), &format!("{ptr}/source_time")),
        None => Some(DistributionSpec::constant(0.0)),
    };
    let placement = match v.get("placement") {
        None => Some(Placement::Diffuse),
        Some(Value::String(s)) if s == "diffuse" => Some(Placement::Diffuse),
        Some(arr @ Value::Array(_)) => c
            .vec3(Some(arr), &format!("{ptr}/placement"))
            .map(Placement::Localized),
        Some(other) => {
            c.flag(
                format!("{ptr}/placement"),
                format!("expected \"diffuse\" or [x, y, z], got {other}"),
            );
            None
        }
    };
    Some(BackgroundSpec {
        label: label?,
        source_file: source_file?,
        source_time: source_time?,
        placement: placement?,
    })
}

fn parse_event(c: &mut Checker, v: &Value, ptr: &str) -> Option<EventSpec> {
    let label = c.dist(v.get("label"), &format!("{ptr}/label"));
    let source_file = c.dist(v.get("source_file"), &format!("{ptr}/source_file"));
    let source_time = match v.get("source_time") {
        Some(st) => c.dist(Some(st), &format!("{ptr}/source_time")),
        None => Some(DistributionSpec::constant(0.0)),
    };
    let event_time = c.dist(v.get("event_time"), &format!("{ptr}/event_time"));
    let event_duration = c.dist(v.get("event_duration"), &format!("{ptr}/event_duration"));
    let snr = match v.get("snr") {
        Some(s) => c.dist(Some(s), &format!("{ptr}/snr")),
        None => Some(DistributionSpec::constant(0.0)),
    };
    let event_xyz = match v.get("event_xyz") {
        Some(x @ Value::Array(items)) => {
            // A tagged spec starts with a string; otherwise treat the array
            // as one spec per waypoint.
            if items.first().is_some_and(Value::is_string) {
                c.dist(Some(x), &format!("{ptr}/event_xyz"))
                    .map(TrajectorySpec::Whole)
            } else {
                let mut list = Vec::new();
                for (i, item) in items.iter().enumerate() {
                    list.push(c.dist(Some(item), &format!("{ptr}/event_xyz/{i}"))?);
                }
                Some(TrajectorySpec::PerWaypoint(list))
            }
        }
        Some(other) => {
            c.flag(format!("{ptr}/event_xyz"), format!("expected an array, got {other}"));
            None
        }
        None => {
            c.flag(format!("{ptr}/event_xyz"), "missing event position spec");
            None
        }
    };
    let trajectory_mode = match v.get("trajectory_mode") {
        None => None,
        Some(Value::String(s)) => match s.as_str() {
            "static" => Some(TrajectoryMode::Static),
            "linear" => Some(TrajectoryMode::Linear),
            "spline" => Some(TrajectoryMode::Spline),
            "random_walk" => Some(TrajectoryMode::RandomWalk { seed: 0 }),
            other => {
                c.flag(
                    format!("{ptr}/trajectory_mode"),
                    format!("unknown trajectory mode '{other}'"),
                );
                None
            }
        },
        Some(other) => {
            c.flag(
                format!("{ptr}/trajectory_mode"),
                format!("expected a string, got {other}"),
            );
            None
        }
    };
    let pitch_shift = v
        .get("pitch_shift")
        .and_then(|p| c.dist(Some(p), &format!("{ptr}/pitch_shift")));
    let time_stretch = v
        .get("time_stretch")
        .and_then(|p| c.dist(Some(p), &format!("{ptr}/time_stretch")));
    Some(EventSpec {
        label: label?,
        source_file: source_file?,
        source_time: source_time?,
        event_time: event_time?,
        event_duration: event_duration?,
        snr: snr?,
        event_xyz: event_xyz?,
        trajectory_mode,
        pitch_shift,
        time_stretch,
    })
}

/// Parse and validate a scene config document, reporting every violation.
pub fn parse_scene_config(path: impl AsRef<Path>) -> Result<SceneSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| {
        Error::Schema(vec![SchemaViolation {
            pointer: "/".into(),
            message: format!("invalid JSON: {e}"),
        }])
    })?;
    parse_scene_value(&doc)
}

/// [`parse_scene_config`] over an in-memory document.
pub fn parse_scene_value(doc: &Value) -> Result<SceneSpec> {
    let mut c = Checker {
        violations: Vec::new(),
    };

    if !doc.is_object() {
        c.flag("/", "config must be a JSON object");
        return Err(Error::Schema(c.violations));
    }

    let duration = c.number(doc.get("duration"), "/duration");
    if let Some(d) = duration {
        if d <= 0.0 {
            c.flag("/duration", format!("must be positive, got {d}"));
        }
    }
    let ref_db = c.number(doc.get("ref_db"), "/ref_db");
    let seed = match doc.get("seed") {
        None => Some(0),
        Some(v) => match v.as_u64() {
            Some(s) => Some(s),
            None => {
                c.flag("/seed", format!("expected a non-negative integer, got {v}"));
                None
            }
        },
    };
    let sample_rate = match doc.get("sample_rate") {
        None => Some(DEFAULT_SAMPLE_RATE),
        Some(v) => match v.as_u64() {
            Some(s) if s > 0 => Some(s as u32),
            _ => {
                c.flag("/sample_rate", format!("expected a positive integer, got {v}"));
                None
            }
        },
    };
    let format = match doc.get("format") {
        None => Some(RirFormat::Foa),
        Some(Value::String(s)) => match s.as_str() {
            "foa" => Some(RirFormat::Foa),
            "mic" => Some(RirFormat::Capsules),
            other => {
                c.flag("/format", format!("expected \"foa\" or \"mic\", got \"{other}\""));
                None
            }
        },
        Some(other) => {
            c.flag("/format", format!("expected a string, got {other}"));
            None
        }
    };
    let fg_path = c.string(doc.get("fg_path"), "/fg_path");
    let bg_path = match doc.get("bg_path") {
        None => fg_path.clone(),
        Some(v) => c.string(Some(v), "/bg_path"),
    };
    let room = parse_room(&mut c, doc.get("room"));

    let mut backgrounds = Vec::new();
    if let Some(v) = doc.get("backgrounds") {
        match v.as_array() {
            Some(items) => {
                for (i, item) in items.iter().enumerate() {
                    if let Some(bg) = parse_background(&mut c, item, &format!("/backgrounds/{i}"))
                    {
                        backgrounds.push(bg);
                    }
                }
            }
            None => c.flag("/backgrounds", "expected an array"),
        }
    }
    let mut events = Vec::new();
    if let Some(v) = doc.get("events") {
        match v.as_array() {
            Some(items) => {
                for (i, item) in items.iter().enumerate() {
                    if let Some(ev) = parse_event(&mut c, item, &format!("/events/{i}")) {
                        events.push(ev);
                    }
                }
            }
            None => c.flag("/events", "expected an array"),
        }
    }

    let class_map = match doc.get("class_map") {
        None => None,
        Some(Value::Object(map)) => {
            let mut out = std::collections::BTreeMap::new();
            for (k, v) in map {
                match v.as_u64() {
                    Some(idx) => {
                        out.insert(k.clone(), idx as u32);
                    }
                    None => c.flag(
                        format!("/class_map/{k}"),
                        format!("expected a non-negative integer, got {v}"),
                    ),
                }
            }
            Some(out)
        }
        Some(other) => {
            c.flag("/class_map", format!("expected an object, got {other}"));
            None
        }
    };
    let with_distance = match doc.get("with_distance") {
        None => Some(true),
        Some(Value::Bool(b)) => Some(*b),
        Some(other) => {
            c.flag("/with_distance", format!("expected a boolean, got {other}"));
            None
        }
    };

    if !c.violations.is_empty() {
        return Err(Error::Schema(c.violations));
    }
    Ok(SceneSpec {
        duration: duration.unwrap(),
        room: room.unwrap(),
        format: format.unwrap(),
        sample_rate: sample_rate.unwrap(),
        fg_path: PathBuf::from(fg_path.unwrap()),
        bg_path: PathBuf::from(bg_path.unwrap()),
        ref_db: ref_db.unwrap(),
        seed: seed.unwrap(),
        backgrounds,
        events,
        class_map,
        with_distance: with_distance.unwrap(),
    })
}
