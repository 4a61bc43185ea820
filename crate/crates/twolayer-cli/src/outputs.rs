//! Artifact layout: frame files, manifests, resolved configs.
//!
//! Every command writes under one output root, resolved in order from the
//! `--out` flag, the `TWOLAYER_OUT` environment variable, and the default
//! `./out`. Each run owns a subdirectory named after its scenario.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Duration;

use twolayer::driver::StepStats;
use twolayer::frame::{write_stacked, SolutionFrame};
use twolayer::scenarios::ScenarioSpec;

/// Environment variable overriding the default output root.
pub const OUT_ENV: &str = "TWOLAYER_OUT";

pub fn resolve_out_root(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Write numbered frame CSVs plus the time-stacked contour CSV.
pub fn write_frames(dir: &Path, frames: &[SolutionFrame]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for (k, f) in frames.iter().enumerate() {
        let mut w = io::BufWriter::new(fs::File::create(dir.join(format!("frame_{k:04}.csv")))?);
        f.write_csv(&mut w)?;
    }
    let mut w = io::BufWriter::new(fs::File::create(dir.join("stacked.csv"))?);
    write_stacked(frames, &mut w)
}

/// Write `manifest.txt` (run record) and `config.kv` (the fully resolved
/// scenario, rerunnable via `--config`). The manifest repeats the solver
/// knobs that determine the numbers, then the run outcome; wall clock is
/// its only nondeterministic line.
pub fn write_manifest(
    dir: &Path,
    spec: &ScenarioSpec,
    stats: &StepStats,
    wall: Duration,
    frames_written: usize,
) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut s = String::new();
    let _ = writeln!(s, "scenario = {}", spec.name);
    let _ = writeln!(s, "n_cells = {}", spec.n_cells);
    let _ = writeln!(s, "eigen = {}", spec.eigen_method.name());
    let _ = writeln!(s, "inundation = {}", spec.inundation_method.name());
    let _ = writeln!(s, "limiter = {}", spec.limiter.name());
    let _ = writeln!(s, "dry_tolerance = {:e}", spec.dry_tolerance);
    let _ = writeln!(s, "cfl_target = {}", spec.cfl);
    let _ = writeln!(s, "t_final = {}", spec.t_final);
    let _ = writeln!(s, "frames = {frames_written}");
    let _ = writeln!(s, "steps = {}", stats.steps);
    let _ = writeln!(s, "steps_rejected = {}", stats.rejected);
    let _ = writeln!(s, "max_cfl = {:.6}", stats.max_cfl);
    let _ = writeln!(s, "clipped_mass = {:e}", stats.clipped_mass);
    let _ = writeln!(s, "wall_clock_s = {:.3}", wall.as_secs_f64());
    fs::write(dir.join("manifest.txt"), s)?;
    fs::write(dir.join("config.kv"), spec.to_kv())
}
