//! Detector output and its CSV form (`x,y,score,level`).

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

/// A detected feature point.
///
/// `score` is the maximum-threshold value for FAST (always integral) and the
/// Harris response for the Harris detectors. Coordinates are in the pixel grid
/// of pyramid `level`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    pub x: u32,
    pub y: u32,
    pub score: f64,
    pub level: u32,
}

impl Corner {
    pub fn new(x: u32, y: u32, score: f64, level: u32) -> Self {
        Self { x, y, score, level }
    }
}

pub const CSV_HEADER: &str = "x,y,score,level";

/// Sort key used by every detector: row-major `(y, x)`, then level.
pub fn sort_corners(corners: &mut [Corner]) {
    corners.sort_by_key(|c| (c.level, c.y, c.x));
}

pub fn write_corners_csv<W: Write>(mut out: W, corners: &[Corner]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for c in corners {
        // `{}` on f64 is the shortest round-trip form: integral scores print bare.
        writeln!(out, "{},{},{},{}", c.x, c.y, c.score, c.level)?;
    }
    Ok(())
}

pub fn corners_to_csv(corners: &[Corner]) -> String {
    let mut buf = Vec::new();
    write_corners_csv(&mut buf, corners).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("ascii")
}

pub fn read_corners_csv<R: BufRead>(input: R) -> io::Result<Vec<Corner>> {
    let bad = |line: usize, msg: &str| io::Error::new(io::ErrorKind::InvalidData, format!("line {line}: {msg}"));
    let mut lines = input.lines();
    let header = lines.next().transpose()?;
    if header.as_deref().map(str::trim) != Some(CSV_HEADER) {
        return Err(bad(1, "missing `x,y,score,level` header"));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 4 {
            return Err(bad(i + 2, "expected 4 fields"));
        }
        let parsed = (|| {
            Some(Corner {
                x: fields[0].parse().ok()?,
                y: fields[1].parse().ok()?,
                score: fields[2].parse().ok()?,
                level: fields[3].parse().ok()?,
            })
        })();
        out.push(parsed.ok_or_else(|| bad(i + 2, "unparseable field"))?);
    }
    Ok(out)
}
