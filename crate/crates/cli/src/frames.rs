//! Frame sequences on disk: a directory of numbered PNG/JPEG files or a
//! manifest listing one image path per line.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use diverid_core::pipeline::FrameSource;
use diverid_core::{Error, ImageBuffer, Result};

const EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

/// Frame index to image file. Decoding happens on request.
#[derive(Debug, Clone)]
pub struct DiskFrames {
    paths: BTreeMap<u64, PathBuf>,
}

fn is_image(p: &Path) -> bool {
    p.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// Trailing run of digits in the file stem, e.g. `frame_000123.png` -> 123.
fn stem_index(p: &Path) -> Option<u64> {
    let stem = p.file_stem()?.to_str()?;
    let digits: String = stem
        .chars()
        .rev()
        .take_while(char::is_ascii_digit)
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    digits.parse().ok()
}

impl DiskFrames {
    /// A directory is scanned for numbered images; any other path is read
    /// as a manifest whose n-th entry is frame n. Manifest entries are
    /// relative to the manifest's directory, `#` starts a comment.
    pub fn open(path: &Path) -> Result<Self> {
        if path.is_dir() {
            Self::scan_dir(path)
        } else {
            Self::read_manifest(path)
        }
    }

    fn scan_dir(dir: &Path) -> Result<Self> {
        let mut paths = BTreeMap::new();
        for entry in fs::read_dir(dir)? {
            let p = entry?.path();
            if !p.is_file() || !is_image(&p) {
                continue;
            }
            let index = stem_index(&p).ok_or_else(|| {
                Error::FrameMismatch(format!("{} has no frame number in its name", p.display()))
            })?;
            if let Some(prev) = paths.insert(index, p.clone()) {
                return Err(Error::FrameMismatch(format!(
                    "{} and {} both claim frame {index}",
                    prev.display(),
                    p.display()
                )));
            }
        }
        Ok(Self { paths })
    }

    fn read_manifest(file: &Path) -> Result<Self> {
        let text = fs::read_to_string(file)?;
        let base = file.parent().unwrap_or(Path::new("."));
        let paths = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .enumerate()
            .map(|(i, l)| (i as u64, base.join(l)))
            .collect();
        Ok(Self { paths })
    }
}

impl FrameSource for DiskFrames {
    fn frame(&self, index: u64) -> Result<ImageBuffer> {
        let path = self
            .paths
            .get(&index)
            .ok_or_else(|| Error::FrameMismatch(format!("no image for frame {index}")))?;
        let img = image::open(path)
            .map_err(|e| Error::Io(io::Error::other(format!("{}: {e}", path.display()))))?
            .to_rgb8();
        let (w, h) = img.dimensions();
        ImageBuffer::from_rgb8(w, h, img.into_raw())
    }
}

/// Write an RGB8 buffer as PNG.
pub fn save_png(img: &ImageBuffer, path: &Path) -> Result<()> {
    let data = img
        .u8_samples()
        .ok_or_else(|| Error::Invariant("only 8-bit images can be saved".into()))?;
    image::save_buffer(path, data, img.width(), img.height(), image::ExtendedColorType::Rgb8)
        .map_err(|e| Error::Io(io::Error::other(format!("{}: {e}", path.display()))))
}

/// Zero-padded frame file name.
pub fn frame_name(index: u64) -> String {
    format!("{index:06}.png")
}
