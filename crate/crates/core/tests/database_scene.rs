//! End-to-end generation against a measured-RIR database.

use std::path::{Path, PathBuf};

use roomscape::audio::AudioClip;
use roomscape::composer::{
    generate, DistributionSpec, EventSpec, RoomModel, SceneSpec, TrajectorySpec,
};
use roomscape::geometry::{RoomSpec, Vec3};
use roomscape::io::{read_dcase_csv, write_wav, WavEncoding};
use roomscape::rir::{load_rir_database, nearest_rir, synth_foa_rir};

fn workspace(name: &str) -> PathBuf {
    let root = std::env::temp_dir().join(format!("roomscape-dbscene-{name}"));
    let _ = std::fs::remove_dir_all(&root);
    std::fs::create_dir_all(&root).unwrap();
    root
}

fn write_noise_wav(path: &Path, seed: u64, secs: f64) {
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
    write_wav(path, &AudioClip::from_mono(24000, samples), WavEncoding::Float32).unwrap();
}

/// Anechoic FOA responses on a 3-point grid, measured from a fixed mic.
fn build_database(dir: &Path, mic: Vec3<f64>, grid: &[[f64; 3]]) {
    std::fs::create_dir_all(dir).unwrap();
    let room = RoomSpec::new(Vec3::new(6.0, 4.0, 3.0), 0.0).unwrap();
    for (i, pos) in grid.iter().enumerate() {
        let rir = synth_foa_rir(
            &room,
            Vec3::new(pos[0], pos[1], pos[2]),
            mic,
            24000,
            0,
        )
        .unwrap();
        let clip = AudioClip::new(24000, rir.taps).unwrap();
        write_wav(dir.join(format!("rir_{i}.wav")), &clip, WavEncoding::Float32).unwrap();
    }
    let meta = serde_json::json!({
        "room_id": "grid3",
        "sample_rate": 24000,
        "format": "foa",
        "mic_center": [mic.x, mic.y, mic.z],
        "positions": grid,
    });
    std::fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta).unwrap()).unwrap();
}

#[test]
fn database_scene_snaps_trajectories() {
    let root = workspace("snap");
    let mic = Vec3::new(3.0, 2.0, 1.5);
    let grid = [[1.0, 1.0, 1.5], [5.0, 1.0, 1.5], [3.0, 3.5, 1.5]];
    let db_dir = root.join("rirs");
    build_database(&db_dir, mic, &grid);

    // Database loads and nearest-neighbor snapping works on its own.
    let db = load_rir_database::<f64>(&db_dir).unwrap();
    assert_eq!(db.entries.len(), 3);
    assert_eq!(db.mic_center, mic);
    let (_, snapped) = nearest_rir(&db, Vec3::new(1.2, 1.1, 1.4));
    assert_eq!(snapped, Vec3::new(1.0, 1.0, 1.5));

    let fg = root.join("fg");
    write_noise_wav(&fg.join("dog/d1.wav"), 3, 3.0);

    let mut scene = SceneSpec::new(
        3.0,
        RoomModel::Database { path: db_dir },
        fg.clone(),
        fg,
    );
    scene.seed = 5;
    scene.events.push(EventSpec {
        label: DistributionSpec::constant("dog"),
        source_file: DistributionSpec::Choose(vec![]),
        source_time: DistributionSpec::constant(0.0),
        event_time: DistributionSpec::constant(0.0),
        event_duration: DistributionSpec::constant(2.5),
        snr: DistributionSpec::constant(10.0),
        event_xyz: TrajectorySpec::Whole(DistributionSpec::constant(serde_json::json!([
            [1.0, 1.0, 1.5],
            [5.0, 1.2, 1.5]
        ]))),
        trajectory_mode: None,
        pitch_shift: None,
        time_stretch: None,
    });

    let out = generate(&scene, root.join("out/mix")).unwrap();
    let rows = read_dcase_csv(&out.csv_path).unwrap();
    assert_eq!(rows.len(), 25);
    // Every labeled position is one of the grid points, expressed relative
    // to the database mic.
    let expected: Vec<(i32, i32, u32)> = grid
        .iter()
        .map(|p| {
            let (az, el, d) = roomscape::geometry::cartesian_to_spherical(
                Vec3::new(p[0], p[1], p[2]),
                mic,
            )
            .unwrap();
            (
                az.round() as i32,
                el.round() as i32,
                (d * 100.0).round() as u32,
            )
        })
        .collect();
    for r in &rows {
        assert!(
            expected
                .iter()
                .any(|&(az, el, d)| az == r.azimuth && el == r.elevation
                    && d == r.distance_cm.unwrap()),
            "row {r:?} not on the grid {expected:?}"
        );
    }
    // The trajectory moves from the first grid point toward the second, so
    // both must appear.
    assert!(rows.iter().any(|r| r.azimuth == expected[0].0));
    assert!(rows.iter().any(|r| r.azimuth == expected[1].0));
}

#[test]
fn database_format_mismatch_is_rejected() {
    let root = workspace("mismatch");
    let mic = Vec3::new(3.0, 2.0, 1.5);
    let db_dir = root.join("rirs");
    build_database(&db_dir, mic, &[[1.0, 1.0, 1.5]]);
    let fg = root.join("fg");
    write_noise_wav(&fg.join("dog/d1.wav"), 3, 1.0);

    let mut scene = SceneSpec::new(
        1.0,
        RoomModel::Database { path: db_dir },
        fg.clone(),
        fg,
    );
    scene.format = roomscape::rir::RirFormat::Capsules;
    scene.events.push(EventSpec {
        label: DistributionSpec::constant("dog"),
        source_file: DistributionSpec::Choose(vec![]),
        source_time: DistributionSpec::constant(0.0),
        event_time: DistributionSpec::constant(0.0),
        event_duration: DistributionSpec::constant(0.5),
        snr: DistributionSpec::constant(0.0),
        event_xyz: TrajectorySpec::Whole(DistributionSpec::constant(serde_json::json!([[
            1.0, 1.0, 1.5
        ]]))),
        trajectory_mode: None,
        pitch_shift: None,
        time_stretch: None,
    });
    assert!(matches!(
        generate(&scene, root.join("out/mix")),
        Err(roomscape::Error::Format(_))
    ));
}
