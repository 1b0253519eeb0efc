//! Shared fixtures for CLI integration tests.
#![allow(dead_code)] // each test target uses a different subset

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use roomscape::ambisonics::sh_gains;
use roomscape::audio::AudioClip;
use roomscape::io::{write_dcase_csv, write_wav, AnnotationFrame, WavEncoding};

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_roomscape")
}

pub fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn workspace(name: &str) -> PathBuf {
    let root = std::env::temp_dir().join(format!("roomscape-cli-{name}"));
    let _ = std::fs::remove_dir_all(&root);
    std::fs::create_dir_all(&root).unwrap();
    root
}

pub fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut state = seed.max(1);
    (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            ((state as f64 / u64::MAX as f64) * 2.0 - 1.0) * 0.25
        })
        .collect()
}

pub fn write_noise_wav(path: &Path, seed: u64, secs: f64) {
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    let clip = AudioClip::from_mono(24000, noise((24000.0 * secs) as usize, seed));
    write_wav(path, &clip, WavEncoding::Float32).unwrap();
}

/// fg corpus with two classes and a bg corpus with one label.
pub fn make_corpora(root: &Path) -> (PathBuf, PathBuf) {
    let fg = root.join("fg");
    let bg = root.join("bg");
    write_noise_wav(&fg.join("dog/d1.wav"), 1, 4.0);
    write_noise_wav(&fg.join("dog/d2.wav"), 2, 4.0);
    write_noise_wav(&fg.join("music/m1.wav"), 3, 4.0);
    write_noise_wav(&bg.join("back/b1.wav"), 4, 3.0);
    (fg, bg)
}

/// A small FOA SELD dataset of plane-wave files with matching labels.
pub fn make_foa_dataset(root: &Path, sources: &[(&str, f64, f64)]) {
    for (i, (basename, az, el)) in sources.iter().enumerate() {
        let g = sh_gains(*az, *el).to_array();
        let sig = noise(24000, 90 + i as u64);
        let audio = AudioClip::new(
            24000,
            g.iter()
                .map(|&gain| sig.iter().map(|&s| s * gain).collect())
                .collect::<Vec<Vec<f64>>>(),
        )
        .unwrap();
        let wav = root.join(format!("foa/{basename}.wav"));
        std::fs::create_dir_all(wav.parent().unwrap()).unwrap();
        write_wav(&wav, &audio, WavEncoding::Float32).unwrap();
        let labels: Vec<AnnotationFrame> = (0..10)
            .map(|f| AnnotationFrame {
                frame: f,
                class_index: i as u32,
                track_index: 0,
                azimuth: *az as i32,
                elevation: *el as i32,
                distance_cm: Some(150),
            })
            .collect();
        let csv = root.join(format!("metadata/{basename}.csv"));
        std::fs::create_dir_all(csv.parent().unwrap()).unwrap();
        write_dcase_csv(&csv, &labels, true).unwrap();
    }
}

pub fn scene_config(
    fg: &Path,
    bg: &Path,
    duration: f64,
    extra_events: serde_json::Value,
    backgrounds: serde_json::Value,
) -> serde_json::Value {
    serde_json::json!({
        "duration": duration,
        "ref_db": -50,
        "seed": 0,
        "room": {
            "kind": "virtual",
            "dims": [5.0, 3.0, 2.0],
            "decay": 0.0,
            "mic_type": "tetra",
            "mic_loc": [2.5, 1.5, 1.0]
        },
        "format": "foa",
        "fg_path": fg,
        "bg_path": bg,
        "backgrounds": backgrounds,
        "events": extra_events,
    })
}

pub fn write_config(path: &Path, config: &serde_json::Value) {
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    std::fs::write(path, serde_json::to_string_pretty(config).unwrap()).unwrap();
}

/// Collect `(relative path, bytes)` of all files under `dir` except
/// manifests, sorted.
pub fn dir_contents(dir: &Path, skip: &[&str]) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                if skip.iter().any(|s| rel.ends_with(s)) {
                    continue;
                }
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}
