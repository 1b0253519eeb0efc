//! Dataset-level augmentation: walk a SELD dataset, transform every
//! WAV/CSV pair, and write an augmented sibling dataset.

use std::path::{Path, PathBuf};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::augment::{channel_swap, remix, rotate_soundscape, tf_mask, SwapPattern};
use crate::error::{Error, Result};
use crate::io::{
    read_dcase_csv, read_wav, scan_dataset, write_dcase_csv, write_wav, AnnotationFrame,
    WavEncoding,
};

/// Which augmentation a run applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugmentKind {
    ChannelSwap,
    Rotate,
    TfMask,
    Remix,
}

impl AugmentKind {
    /// Output-directory suffix appended to the dataset root.
    pub fn suffix(&self) -> &'static str {
        match self {
            AugmentKind::ChannelSwap => "swapped",
            AugmentKind::Rotate => "rotated",
            AugmentKind::TfMask => "tfmasked",
            AugmentKind::Remix => "remixed",
        }
    }
}

/// Tunables for [`apply_augmentation`].
#[derive(Debug, Clone)]
pub struct AugmentParams {
    pub kind: AugmentKind,
    pub seed: u64,
    /// Channel-swap patterns to emit; defaults to all 15 non-identity ones.
    pub patterns: Vec<u8>,
    /// Fixed rotation; `None` draws a per-file yaw uniformly in [0, 360).
    pub yaw: Option<f64>,
    pub n_time_masks: usize,
    pub n_freq_masks: usize,
    /// Longest time mask, seconds.
    pub max_time: f64,
    /// Widest frequency mask, Hz.
    pub max_freq: f64,
    /// Most simultaneous tracks a remixed frame may carry.
    pub track_limit: usize,
}

impl AugmentParams {
    pub fn new(kind: AugmentKind) -> Self {
        AugmentParams {
            kind,
            seed: 0,
            patterns: (1..=15).collect(),
            yaw: None,
            n_time_masks: 2,
            n_freq_masks: 2,
            max_time: 0.5,
            max_freq: 2000.0,
            track_limit: 5,
        }
    }
}

/// Outcome of one augmentation run.
#[derive(Debug, Clone)]
pub struct AugmentSummary {
    pub output_root: PathBuf,
    /// Input pairs successfully processed.
    pub processed: usize,
    /// Output WAV/CSV pairs written.
    pub written: usize,
    /// `(path, reason)` for every input that could not be processed.
    pub skipped: Vec<(PathBuf, String)>,
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

fn file_rng(seed: u64, basename: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ fnv1a64(basename.as_bytes()))
}

struct LoadedPair {
    audio: crate::audio::AudioClip<f64>,
    labels: Vec<AnnotationFrame>,
    with_distance: bool,
    wav_rel: PathBuf,
    csv_rel: PathBuf,
}

fn load_pair(root: &Path, csv: &Path, wav: &Path) -> Result<LoadedPair> {
    let audio = read_wav::<f64>(wav)?;
    let labels = read_dcase_csv(csv)?;
    let with_distance = labels.first().is_none_or(|l| l.distance_cm.is_some());
    Ok(LoadedPair {
        audio,
        labels,
        with_distance,
        wav_rel: wav.strip_prefix(root).unwrap_or(wav).to_path_buf(),
        csv_rel: csv.strip_prefix(root).unwrap_or(csv).to_path_buf(),
    })
}

fn write_pair(
    out_root: &Path,
    pair: &LoadedPair,
    suffixed: Option<&str>,
    audio: &crate::audio::AudioClip<f64>,
    labels: &[AnnotationFrame],
) -> Result<()> {
    let rename = |rel: &Path| -> PathBuf {
        match suffixed {
            None => rel.to_path_buf(),
            Some(sfx) => {
                let stem = rel.file_stem().unwrap_or_default().to_string_lossy();
                let ext = rel.extension().unwrap_or_default().to_string_lossy();
                rel.with_file_name(format!("{stem}{sfx}.{ext}"))
            }
        }
    };
    let wav_path = out_root.join(rename(&pair.wav_rel));
    let csv_path = out_root.join(rename(&pair.csv_rel));
    for p in [&wav_path, &csv_path] {
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    write_wav(&wav_path, audio, WavEncoding::Float32)?;
    write_dcase_csv(&csv_path, labels, pair.with_distance)?;
    Ok(())
}

/// Apply one augmentation to every matched WAV/CSV pair under
/// `dataset_path`, writing the results to `<dataset_path>_<suffix>`.
///
/// Unmatched CSVs and per-file failures are reported in the summary rather
/// than aborting the run. Per-file randomness is seeded from the base seed
/// and the file name, so outputs do not depend on walk order.
pub fn apply_augmentation(
    dataset_path: impl AsRef<Path>,
    params: &AugmentParams,
) -> Result<AugmentSummary> {
    let root = dataset_path.as_ref();
    let index = scan_dataset(root)?;
    let out_root = {
        let name = root
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into());
        root.with_file_name(format!("{name}_{}", params.kind.suffix()))
    };

    let mut summary = AugmentSummary {
        output_root: out_root.clone(),
        processed: 0,
        written: 0,
        skipped: index
            .unmatched_csvs
            .iter()
            .map(|p| (p.clone(), "no matching WAV under the dataset root".into()))
            .collect(),
    };

    if params.kind == AugmentKind::Remix {
        return remix_dataset(root, &out_root, &index, params, summary);
    }

    let results: Vec<(usize, std::result::Result<usize, (PathBuf, String)>)> = index
        .pairs
        .par_iter()
        .enumerate()
        .map(|(i, (csv, wav, basename))| {
            let work = || -> Result<usize> {
                let pair = load_pair(root, csv, wav)?;
                let mut rng = file_rng(params.seed, basename);
                match params.kind {
                    AugmentKind::ChannelSwap => {
                        let mut written = 0;
                        for &k in &params.patterns {
                            let pattern = SwapPattern::new(k)?;
                            let (audio, labels) =
                                channel_swap(&pair.audio, &pair.labels, &pattern)?;
                            write_pair(
                                &out_root,
                                &pair,
                                Some(&format!("_aug{k}")),
                                &audio,
                                &labels,
                            )?;
                            written += 1;
                        }
                        Ok(written)
                    }
                    AugmentKind::Rotate => {
                        let yaw = params.yaw.unwrap_or_else(|| {
                            use rand::Rng;
                            rng.gen_range(0.0..360.0)
                        });
                        let (audio, labels) =
                            rotate_soundscape(&pair.audio, &pair.labels, yaw)?;
                        write_pair(&out_root, &pair, None, &audio, &labels)?;
                        Ok(1)
                    }
                    AugmentKind::TfMask => {
                        let (audio, labels) = tf_mask(
                            &pair.audio,
                            &pair.labels,
                            params.n_time_masks,
                            params.n_freq_masks,
                            params.max_time,
                            params.max_freq,
                            &mut rng,
                        )?;
                        write_pair(&out_root, &pair, None, &audio, &labels)?;
                        Ok(1)
                    }
                    AugmentKind::Remix => unreachable!("handled above"),
                }
            };
            (i, work().map_err(|e| (csv.clone(), e.to_string())))
        })
        .collect();

    for (_, result) in results {
        match result {
            Ok(written) => {
                summary.processed += 1;
                summary.written += written;
            }
            Err(skip) => summary.skipped.push(skip),
        }
    }
    Ok(summary)
}

/// Remix pairs files two at a time after a seeded shuffle; an odd file out
/// is skipped with a note.
fn remix_dataset(
    root: &Path,
    out_root: &Path,
    index: &crate::io::DatasetIndex,
    params: &AugmentParams,
    mut summary: AugmentSummary,
) -> Result<AugmentSummary> {
    use rand::seq::SliceRandom;
    let mut order: Vec<usize> = (0..index.pairs.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    order.shuffle(&mut rng);

    let pairs: Vec<(usize, usize)> = order.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    if order.len() % 2 == 1 {
        let (csv, _, _) = &index.pairs[order[order.len() - 1]];
        summary
            .skipped
            .push((csv.clone(), "odd file out: remix needs pairs".into()));
    }

    let results: Vec<std::result::Result<(), (PathBuf, String)>> = pairs
        .par_iter()
        .map(|&(ia, ib)| {
            let (csv_a, wav_a, _) = &index.pairs[ia];
            let (csv_b, wav_b, base_b) = &index.pairs[ib];
            let work = || -> Result<()> {
                let pa = load_pair(root, csv_a, wav_a)?;
                let pb = load_pair(root, csv_b, wav_b)?;
                let (audio, labels) = remix(
                    (&pa.audio, &pa.labels),
                    (&pb.audio, &pb.labels),
                    params.track_limit,
                )?;
                write_pair(
                    out_root,
                    &pa,
                    Some(&format!("_remix_{base_b}")),
                    &audio,
                    &labels,
                )?;
                Ok(())
            };
            work().map_err(|e| (csv_a.clone(), e.to_string()))
        })
        .collect();

    for result in results {
        match result {
            Ok(()) => {
                summary.processed += 2;
                summary.written += 1;
            }
            Err(skip) => summary.skipped.push(skip),
        }
    }
    Ok(summary)
}
