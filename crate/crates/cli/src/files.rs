//! File plumbing: atomic output, track discovery and metadata sidecars.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use fuelburn::trajectory::{clean_track, parse_track, AircraftMeta, CleaningConfig, FlightTrack, TrackFormat};
use serde::de::DeserializeOwned;

use crate::error::{CliError, CliResult};

/// Write to `path` through a temporary file in the same directory, renamed
/// into place only once `body` succeeds. `None` or `-` means stdout.
pub fn write_output<F>(path: Option<&Path>, body: F) -> CliResult<()>
where
    F: FnOnce(&mut dyn Write) -> CliResult<()>,
{
    match path {
        None => write_stdout(body),
        Some(p) if p == Path::new("-") => write_stdout(body),
        Some(p) => {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(p, e))?;
            {
                let mut w = BufWriter::new(tmp.as_file());
                body(&mut w)?;
                w.flush().map_err(|e| CliError::io(p, e))?;
            }
            tmp.persist(p).map_err(|e| CliError::io(p, e.error))?;
            Ok(())
        }
    }
}

fn write_stdout<F>(body: F) -> CliResult<()>
where
    F: FnOnce(&mut dyn Write) -> CliResult<()>,
{
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    body(&mut lock)?;
    lock.flush().map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

pub fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    serde_json::from_reader(open(path)?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn track_format(path: &Path) -> CliResult<TrackFormat> {
    path.extension()
        .and_then(|e| e.to_str())
        .and_then(TrackFormat::from_extension)
        .ok_or_else(|| CliError::Usage(format!("{}: expected a .csv or .jsonl track", path.display())))
}

/// `<dir>/<stem>.meta.json` next to a track file.
pub fn sidecar(path: &Path) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("track");
    path.with_file_name(format!("{stem}.meta.json"))
}

/// Parse and clean a track. Metadata comes from `meta` if given, else a
/// sidecar file, else the JSONL header line.
pub fn load_track(path: &Path, meta: Option<&AircraftMeta>) -> CliResult<FlightTrack> {
    let format = track_format(path)?;
    let meta = match meta {
        Some(m) => Some(m.clone()),
        None => {
            let side = sidecar(path);
            if side.exists() {
                Some(read_json(&side)?)
            } else {
                None
            }
        }
    };
    let raw = parse_track(open(path)?, format, meta)?;
    let (track, _) = clean_track(&raw, &CleaningConfig::default())?;
    Ok(track)
}

/// Track files named directly or found (non-recursively) in directories,
/// sorted by path.
pub fn track_paths(inputs: &[PathBuf]) -> CliResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            for entry in std::fs::read_dir(input).map_err(|e| CliError::io(input, e))? {
                let p = entry.map_err(|e| CliError::io(input, e))?.path();
                if p.is_file() && track_format(&p).is_ok() {
                    out.push(p);
                }
            }
        } else {
            out.push(input.clone());
        }
    }
    out.sort();
    if out.is_empty() {
        return Err(CliError::Usage("no track files found".into()));
    }
    Ok(out)
}

pub fn stem(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("track").to_string()
}
