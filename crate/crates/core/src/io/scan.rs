//! Corpus and dataset discovery.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Paired label CSVs and audio files of a SELD dataset.
#[derive(Debug, Clone, Default)]
pub struct DatasetIndex {
    /// `(csv_path, wav_path, basename)`, sorted by basename.
    pub pairs: Vec<(PathBuf, PathBuf, String)>,
    /// CSVs with no matching WAV anywhere under the dataset root.
    pub unmatched_csvs: Vec<PathBuf>,
}

/// Recursively collect files under `dir` with the given lowercase extension,
/// sorted for deterministic ordering.
pub(crate) fn collect_files(dir: &Path, extension: &str) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        let entries = std::fs::read_dir(&d).map_err(|e| Error::io(&d, e))?;
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(&d, e))?;
            let path = entry.path();
            if path.is_dir() {
                stack.push(path);
            } else if path
                .extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| e.eq_ignore_ascii_case(extension))
            {
                out.push(path);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Scan a corpus directory: immediate subdirectories are class labels and
/// WAV files are collected recursively beneath each.
pub fn scan_corpus(path: impl AsRef<Path>) -> Result<BTreeMap<String, Vec<PathBuf>>> {
    let root = path.as_ref();
    if !root.is_dir() {
        return Err(Error::Corpus(format!(
            "corpus path {} is not a directory",
            root.display()
        )));
    }
    let mut map = BTreeMap::new();
    let entries = std::fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    for dir in dirs {
        let label = dir
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default()
            .to_string();
        if label.is_empty() {
            continue;
        }
        let files = collect_files(&dir, "wav")?;
        map.insert(label, files);
    }
    Ok(map)
}

/// Index a SELD dataset: CSVs live under `<root>/metadata`, each pairing
/// with a same-basename WAV anywhere else under the root.
pub fn scan_dataset(path: impl AsRef<Path>) -> Result<DatasetIndex> {
    let root = path.as_ref();
    let metadata = root.join("metadata");
    if !metadata.is_dir() {
        return Err(Error::Layout(format!(
            "dataset {} has no metadata subdirectory",
            root.display()
        )));
    }
    let csvs = collect_files(&metadata, "csv")?;
    let mut wav_by_basename: BTreeMap<String, PathBuf> = BTreeMap::new();
    for wav in collect_files(root, "wav")? {
        if wav.starts_with(&metadata) {
            continue;
        }
        if let Some(stem) = wav.file_stem().and_then(|s| s.to_str()) {
            // First match in sorted order wins.
            wav_by_basename.entry(stem.to_string()).or_insert(wav);
        }
    }

    let mut index = DatasetIndex::default();
    let mut seen = std::collections::BTreeSet::new();
    for csv in csvs {
        let stem = csv
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        if !seen.insert(stem.clone()) {
            return Err(Error::Layout(format!(
                "duplicate metadata basename '{stem}'"
            )));
        }
        match wav_by_basename.get(&stem) {
            Some(wav) => index.pairs.push((csv, wav.clone(), stem)),
            None => index.unmatched_csvs.push(csv),
        }
    }
    index.pairs.sort_by(|a, b| a.2.cmp(&b.2));
    Ok(index)
}
