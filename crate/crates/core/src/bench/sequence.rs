//! EuRoC-style monocular sequences: `mav0/cam0/data.csv` plus images under
//! `mav0/cam0/data/`. Only 8-bit PGM frames are decoded; an index entry
//! naming `X.png` is served from `X.pgm` next to it.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::BenchError;
use crate::image::{load_pgm, save_pgm, Image};

#[derive(Clone, Debug)]
pub struct Frame {
    pub timestamp_ns: u64,
    pub path: PathBuf,
    pub image: Image,
}

/// Fully preloaded image sequence, sorted by timestamp.
#[derive(Clone, Debug)]
pub struct SequenceSource {
    pub root: PathBuf,
    frames: Vec<Frame>,
    loaded_at: Instant,
}

impl SequenceSource {
    /// Builds a sequence from frames already in memory; rejects unsorted or
    /// duplicate timestamps.
    pub fn from_frames(root: impl Into<PathBuf>, mut frames: Vec<Frame>) -> Result<Self, BenchError> {
        frames.sort_by_key(|f| f.timestamp_ns);
        if let Some(pair) = frames.windows(2).find(|p| p[0].timestamp_ns >= p[1].timestamp_ns) {
            return Err(BenchError::NonMonotonicTimestamps(pair[1].timestamp_ns));
        }
        Ok(Self { root: root.into(), frames, loaded_at: Instant::now() })
    }

    /// In-memory sequence at 20 Hz starting from timestamp 0.
    pub fn from_images(images: Vec<Image>) -> Self {
        let frames = images
            .into_iter()
            .enumerate()
            .map(|(i, image)| Frame { timestamp_ns: i as u64 * 50_000_000, path: PathBuf::new(), image })
            .collect();
        Self::from_frames(PathBuf::new(), frames).expect("timestamps strictly increasing")
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Instant at which every frame was resident in memory.
    pub fn loaded_at(&self) -> Instant {
        self.loaded_at
    }
}

pub fn index_path(root: &Path) -> PathBuf {
    root.join("mav0").join("cam0").join("data.csv")
}

pub fn data_dir(root: &Path) -> PathBuf {
    root.join("mav0").join("cam0").join("data")
}

fn resolve_frame(dir: &Path, name: &str) -> Result<PathBuf, BenchError> {
    let direct = dir.join(name);
    let is_pgm = Path::new(name).extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    if is_pgm {
        return Ok(direct);
    }
    let mirror = direct.with_extension("pgm");
    if mirror.exists() {
        return Ok(mirror);
    }
    Err(BenchError::UnreadableFrame {
        path: direct.display().to_string(),
        reason: format!(
            "only binary PGM frames are decoded; convert it to {} (same directory, same stem, .pgm)",
            mirror.display()
        ),
    })
}

/// Loads and fully decodes a sequence before returning.
pub fn load_euroc_sequence(root: impl AsRef<Path>) -> Result<SequenceSource, BenchError> {
    let root = root.as_ref();
    let index = index_path(root);
    let text = fs::read_to_string(&index).map_err(|_| BenchError::MissingIndex(index.display().to_string()))?;
    let dir = data_dir(root);
    let mut frames = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let malformed = |reason: &str| BenchError::MalformedIndex { line: i + 1, reason: reason.to_string() };
        let (ts, name) = line.split_once(',').ok_or_else(|| malformed("expected `timestamp,filename`"))?;
        let timestamp_ns: u64 = ts.trim().parse().map_err(|_| malformed("timestamp is not an integer"))?;
        let path = resolve_frame(&dir, name.trim())?;
        let image = load_pgm(&path)
            .map_err(|e| BenchError::UnreadableFrame { path: path.display().to_string(), reason: e.to_string() })?;
        frames.push(Frame { timestamp_ns, path, image });
    }
    SequenceSource::from_frames(root, frames)
}

/// Writes frames as PGM files plus a `data.csv` index.
pub fn write_euroc_sequence(root: impl AsRef<Path>, frames: &[(u64, &Image)]) -> Result<(), BenchError> {
    let root = root.as_ref();
    let dir = data_dir(root);
    fs::create_dir_all(&dir)?;
    let mut index = String::from("#timestamp [ns],filename\n");
    for (ts, img) in frames {
        let name = format!("{ts}.pgm");
        save_pgm(img, dir.join(&name))?;
        index.push_str(&format!("{ts},{name}\n"));
    }
    fs::write(index_path(root), index)?;
    Ok(())
}
