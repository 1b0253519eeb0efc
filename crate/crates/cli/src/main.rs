//! `roomscape`: batch soundscape generation, dataset augmentation, RIR
//! synthesis, and dataset inspection.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error. Progress goes to
//! stderr; `--json` puts a machine-readable summary on stdout.

mod commands;
mod manifest;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// Environment variable naming the default corpus root; relative `fg_path` /
/// `bg_path` values in scene configs resolve against it.
pub const CORPUS_ENV: &str = "ROOMSCAPE_CORPUS";

#[derive(Parser)]
#[command(
    name = "roomscape",
    version,
    about = "Spatial soundscape synthesis and augmentation for SELD datasets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit a machine-readable JSON summary on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for batch jobs (default: available cores). Parallelism
    /// is across files only, never within one.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Foa,
    Mic,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AugArg {
    ChannelSwap,
    Rotate,
    TfMask,
    Remix,
}

#[derive(Subcommand)]
enum Command {
    /// Generate soundscapes from a scene config.
    Generate {
        /// Scene config JSON.
        #[arg(long)]
        config: std::path::PathBuf,
        /// Output directory for mix<i>.wav/.csv/.json and manifest.json.
        #[arg(long)]
        out: std::path::PathBuf,
        /// Number of soundscapes; file i uses seed `seed + i`.
        #[arg(long, default_value_t = 1)]
        count: u64,
        /// Base seed (overrides the config's seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Output format (overrides the config).
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Augment an existing SELD dataset into a sibling directory.
    Augment {
        /// Dataset root (must contain a metadata subdirectory of CSVs).
        #[arg(long)]
        input: std::path::PathBuf,
        /// Which augmentation to apply.
        #[arg(long, value_enum)]
        aug: AugArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Channel-swap pattern indices (1..=15), comma separated.
        #[arg(long, value_delimiter = ',')]
        patterns: Option<Vec<u8>>,
        /// Fixed rotation in degrees; omit for a random per-file yaw.
        #[arg(long)]
        yaw: Option<f64>,
        /// Number of random time masks per file.
        #[arg(long, default_value_t = 2)]
        time_masks: usize,
        /// Number of random frequency masks per file.
        #[arg(long, default_value_t = 2)]
        freq_masks: usize,
        /// Longest time mask, seconds.
        #[arg(long, default_value_t = 0.5)]
        max_time: f64,
        /// Widest frequency mask, Hz.
        #[arg(long, default_value_t = 2000.0)]
        max_freq: f64,
        /// Most simultaneous tracks a remixed frame may carry.
        #[arg(long, default_value_t = 5)]
        track_limit: usize,
    },
    /// Synthesize a room impulse response and report its properties.
    Rir {
        /// Room JSON: {dims, decay, mic_type, mic_loc[, speed_of_sound]}.
        #[arg(long)]
        room: std::path::PathBuf,
        /// Source position as x,y,z meters.
        #[arg(long, value_delimiter = ',')]
        source: Vec<f64>,
        /// Output WAV path.
        #[arg(long)]
        out: std::path::PathBuf,
        /// Reflection order (default: automatic for the room).
        #[arg(long)]
        order: Option<usize>,
        #[arg(long, default_value_t = 24000)]
        sample_rate: u32,
        /// Output format.
        #[arg(long, value_enum, default_value_t = FormatArg::Mic)]
        format: FormatArg,
    },
    /// Report per-class event counts, frame activity, and file pairing.
    Inspect {
        /// Dataset root.
        #[arg(long)]
        input: std::path::PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
        {
            eprintln!("roomscape: could not size the worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Generate {
            config,
            out,
            count,
            seed,
            format,
        } => commands::generate(&config, &out, count, seed, format, cli.json),
        Command::Augment {
            input,
            aug,
            seed,
            patterns,
            yaw,
            time_masks,
            freq_masks,
            max_time,
            max_freq,
            track_limit,
        } => commands::augment(
            &input,
            aug,
            seed,
            patterns,
            yaw,
            time_masks,
            freq_masks,
            max_time,
            max_freq,
            track_limit,
            cli.json,
        ),
        Command::Rir {
            room,
            source,
            out,
            order,
            sample_rate,
            format,
        } => commands::rir(&room, &source, &out, order, sample_rate, format, cli.json),
        Command::Inspect { input } => commands::inspect(&input, cli.json),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("roomscape: {e:#}");
            ExitCode::from(1)
        }
    }
}
