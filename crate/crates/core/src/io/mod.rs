//! File interchange: WAV audio, DCASE label CSVs, scene configs, and
//! directory scanning.

mod config;
mod dcase_csv;
mod scan;
mod wav;

pub use config::{parse_scene_config, parse_scene_value};
pub use dcase_csv::{read_dcase_csv, write_dcase_csv, AnnotationFrame, FRAME_SECONDS};
pub use scan::{scan_corpus, scan_dataset, DatasetIndex};
pub use wav::{read_wav, write_wav, WavEncoding};
