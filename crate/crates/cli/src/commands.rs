//! Subcommand implementations.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use rayon::prelude::*;

use roomscape::augment::{apply_augmentation, AugmentKind, AugmentParams};
use roomscape::composer::{generate as generate_scene, RoomModel, SceneSpec};
use roomscape::geometry::Vec3;
use roomscape::io::parse_scene_config;
use roomscape::rir::{default_max_order, estimate_t60, synth_foa_rir, synth_rir, RirFormat};

use crate::manifest::{checksum_file, ManifestFile, RunManifest};
use crate::{AugArg, FormatArg};

impl From<FormatArg> for RirFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Foa => RirFormat::Foa,
            FormatArg::Mic => RirFormat::Capsules,
        }
    }
}

/// Resolve relative corpus paths against the corpus-root env var, when set.
fn resolve_corpus_paths(scene: &mut SceneSpec) {
    if let Ok(root) = std::env::var(crate::CORPUS_ENV) {
        let root = PathBuf::from(root);
        for p in [&mut scene.fg_path, &mut scene.bg_path] {
            if p.is_relative() {
                *p = root.join(&*p);
            }
        }
    }
}

fn ensure_writable(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let probe = dir.join(".write-probe");
    std::fs::write(&probe, b"")
        .with_context(|| format!("output directory {} is not writable", dir.display()))?;
    let _ = std::fs::remove_file(&probe);
    Ok(())
}

pub fn generate(
    config: &Path,
    out: &Path,
    count: u64,
    seed: Option<u64>,
    format: Option<FormatArg>,
    json: bool,
) -> anyhow::Result<ExitCode> {
    let started = Instant::now();
    let mut scene = parse_scene_config(config)?;
    resolve_corpus_paths(&mut scene);
    if let Some(s) = seed {
        scene.seed = s;
    }
    if let Some(f) = format {
        scene.format = f.into();
    }
    let base_seed = scene.seed;
    ensure_writable(out)?;

    // One soundscape per index, seeded base + i; files are independent so
    // the rayon pool cannot affect their bytes.
    let results: Vec<(u64, Result<roomscape::composer::GenerateOutput, String>)> = (0..count)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&i| {
            let mut s = scene.clone();
            s.seed = base_seed + i;
            let dest = out.join(format!("mix{i:03}"));
            let r = generate_scene(&s, &dest).map_err(|e| e.to_string());
            if r.is_ok() {
                eprintln!("generated mix{i:03} (seed {})", base_seed + i);
            }
            (i, r)
        })
        .collect();

    let mut manifest = RunManifest::new(base_seed);
    for (i, result) in &results {
        match result {
            Ok(output) => {
                for path in [&output.wav_path, &output.csv_path, &output.provenance_path] {
                    manifest.files.push(ManifestFile {
                        path: path.clone(),
                        checksum: Some(checksum_file(path)?),
                        status: "ok".into(),
                    });
                }
            }
            Err(e) => {
                eprintln!("mix{i:03} failed: {e}");
                manifest.files.push(ManifestFile {
                    path: out.join(format!("mix{i:03}.wav")),
                    checksum: None,
                    status: format!("error: {e}"),
                });
            }
        }
    }
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    let manifest_path = out.join("manifest.json");
    manifest.write(&manifest_path)?;

    let ok = manifest.all_ok();
    if json {
        println!("{}", serde_json::to_string_pretty(&manifest)?);
    } else {
        eprintln!(
            "wrote {} file(s) + {} in {:.2} s",
            manifest.files.len(),
            manifest_path.display(),
            manifest.wall_clock_seconds
        );
    }
    Ok(ExitCode::from(if ok { 0 } else { 1 }))
}

#[allow(clippy::too_many_arguments)]
pub fn augment(
    input: &Path,
    aug: AugArg,
    seed: u64,
    patterns: Option<Vec<u8>>,
    yaw: Option<f64>,
    time_masks: usize,
    freq_masks: usize,
    max_time: f64,
    max_freq: f64,
    track_limit: usize,
    json: bool,
) -> anyhow::Result<ExitCode> {
    let kind = match aug {
        AugArg::ChannelSwap => AugmentKind::ChannelSwap,
        AugArg::Rotate => AugmentKind::Rotate,
        AugArg::TfMask => AugmentKind::TfMask,
        AugArg::Remix => AugmentKind::Remix,
    };
    let mut params = AugmentParams::new(kind);
    params.seed = seed;
    if let Some(p) = patterns {
        for &k in &p {
            if k > 15 {
                bail!("swap pattern index {k} out of range 0..=15");
            }
        }
        params.patterns = p;
    }
    params.yaw = yaw;
    params.n_time_masks = time_masks;
    params.n_freq_masks = freq_masks;
    params.max_time = max_time;
    params.max_freq = max_freq;
    params.track_limit = track_limit;

    let summary = apply_augmentation(input, &params)?;
    for (path, reason) in &summary.skipped {
        eprintln!("skipped {}: {reason}", path.display());
    }
    if json {
        println!(
            "{}",
            serde_json::json!({
                "output_root": summary.output_root,
                "processed": summary.processed,
                "written": summary.written,
                "skipped": summary.skipped.iter().map(|(p, r)| {
                    serde_json::json!({"path": p, "reason": r})
                }).collect::<Vec<_>>(),
            })
        );
    } else {
        println!(
            "{} processed, {} skipped; wrote {} pair(s) under {}",
            summary.processed,
            summary.skipped.len(),
            summary.written,
            summary.output_root.display()
        );
    }
    Ok(ExitCode::from(if summary.skipped.is_empty() { 0 } else { 1 }))
}

pub fn rir(
    room_path: &Path,
    source: &[f64],
    out: &Path,
    order: Option<usize>,
    sample_rate: u32,
    format: FormatArg,
    json: bool,
) -> anyhow::Result<ExitCode> {
    let text = std::fs::read_to_string(room_path)
        .with_context(|| format!("cannot read {}", room_path.display()))?;
    let room_doc: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("{} is not valid JSON", room_path.display()))?;
    // Reuse the scene validator on a minimal wrapper document.
    let scene = roomscape::io::parse_scene_value(&serde_json::json!({
        "duration": 1.0,
        "ref_db": -50,
        "fg_path": ".",
        "room": room_doc,
    }))?;
    let RoomModel::Virtual { room, array, .. } = scene.room else {
        bail!("cmd rir synthesizes virtual rooms; got a database reference");
    };
    if source.len() != 3 {
        bail!("--source needs x,y,z");
    }
    let source = Vec3::new(source[0], source[1], source[2]);
    let order = order.unwrap_or_else(|| default_max_order(&room, source, array.center));
    let rir = match format {
        FormatArg::Foa => synth_foa_rir(&room, source, array.center, sample_rate, order)?,
        FormatArg::Mic => synth_rir(&room, source, &array, sample_rate, order)?,
    };
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let clip = roomscape::audio::AudioClip::new(sample_rate, rir.taps.clone())?;
    roomscape::io::write_wav(out, &clip, roomscape::io::WavEncoding::Float32)?;

    let distance = source.distance(array.center);
    let delay_ms = distance / room.speed_of_sound * 1000.0;
    let t60 = estimate_t60(&rir);
    let t60_text = match &t60 {
        Ok(s) => format!("{s:.4} s"),
        Err(_) => "anechoic (insufficient decay)".to_string(),
    };
    if json {
        println!(
            "{}",
            serde_json::json!({
                "out": out,
                "order": order,
                "channels": rir.channels(),
                "length": rir.len(),
                "direct_delay_ms": delay_ms,
                "distance_m": distance,
                "t60_seconds": t60.ok(),
            })
        );
    } else {
        println!("wrote {} ({} ch, {} taps, order {order})", out.display(), rir.channels(), rir.len());
        println!("direct-path delay: {delay_ms:.4} ms ({distance:.4} m)");
        println!("estimated T60: {t60_text}");
    }
    Ok(ExitCode::from(0))
}

pub fn inspect(input: &Path, json: bool) -> anyhow::Result<ExitCode> {
    let index = roomscape::io::scan_dataset(input)?;
    let mut class_events: std::collections::BTreeMap<u32, usize> = Default::default();
    let mut activity_hist: std::collections::BTreeMap<usize, usize> = Default::default();
    for (csv, _, _) in &index.pairs {
        let mut rows = roomscape::io::read_dcase_csv(csv)?;
        rows.sort();
        // An event is a maximal run of consecutive frames per (class, track).
        let mut last: std::collections::BTreeMap<(u32, u32), u32> = Default::default();
        for r in &rows {
            let key = (r.class_index, r.track_index);
            let is_new = match last.get(&key) {
                Some(&prev) => r.frame > prev + 1,
                None => true,
            };
            if is_new {
                *class_events.entry(r.class_index).or_default() += 1;
            }
            last.insert(key, r.frame);
        }
        let mut per_frame: std::collections::BTreeMap<u32, usize> = Default::default();
        for r in &rows {
            *per_frame.entry(r.frame).or_default() += 1;
        }
        for (_, n) in per_frame {
            *activity_hist.entry(n).or_default() += 1;
        }
    }

    if json {
        println!(
            "{}",
            serde_json::json!({
                "pairs": index.pairs.len(),
                "unmatched_csvs": index.unmatched_csvs,
                "events_per_class": class_events,
                "active_track_histogram": activity_hist,
            })
        );
    } else {
        println!("pairs: {}", index.pairs.len());
        if !index.unmatched_csvs.is_empty() {
            println!("unmatched CSVs ({}):", index.unmatched_csvs.len());
            for p in &index.unmatched_csvs {
                println!("  {}", p.display());
            }
        }
        println!("events per class:");
        if class_events.is_empty() {
            println!("  (none)");
        }
        for (class, n) in &class_events {
            println!("  class {class}: {n}");
        }
        println!("frames by active-track count:");
        if activity_hist.is_empty() {
            println!("  (none)");
        }
        for (active, frames) in &activity_hist {
            println!("  {active} active: {frames} frames");
        }
    }
    Ok(ExitCode::from(0))
}
