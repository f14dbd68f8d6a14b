//! Binary snapshots of the perturbation field.
//!
//! Layout, little-endian throughout:
//!
//! | bytes | field |
//! |-------|-------|
//! | 4     | magic `KPI1` |
//! | 4     | version (u32, currently 1) |
//! | 4 + 4 | nx, ny (u32) |
//! | 8 × 8 | lx, ly, t, c, α, β, δ, frame speed (f64) |
//! | 8·nx·ny | samples of v, row-major with x fastest (f64) |
//!
//! The background is recovered from `(c, α, β, δ)`: α > 0 selects the
//! Zaitsev wave, otherwise c > 0 selects the line soliton, otherwise none.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::profiles::BackgroundSpec;
use crate::solver::SimState;
use crate::spectral::{Grid, RealField};

pub const MAGIC: [u8; 4] = *b"KPI1";
pub const VERSION: u32 = 1;
pub const HEADER_BYTES: usize = 4 + 4 + 8 + 8 * 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotHeader {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub t: f64,
    /// `(c, α, β, δ)` of the background.
    pub background: [f64; 4],
    pub frame_speed: f64,
}

impl SnapshotHeader {
    pub fn payload_bytes(&self) -> usize {
        8 * self.nx * self.ny
    }
}

/// Writes `state` with the co-moving frame speed of its background.
pub fn write_snapshot(state: &SimState, path: &Path) -> Result<()> {
    write_snapshot_in_frame(state, state.background.speed(), path)
}

/// Writes `state` recorded in a frame moving with `frame_speed`. The file
/// appears atomically: it is written to a sibling temporary and renamed.
pub fn write_snapshot_in_frame(state: &SimState, frame_speed: f64, path: &Path) -> Result<()> {
    let g = state.v.grid();
    let header = SnapshotHeader {
        nx: g.nx(),
        ny: g.ny(),
        lx: g.lx(),
        ly: g.ly(),
        t: state.t,
        background: state.background.parameters(),
        frame_speed,
    };
    let bytes = encode(&header, state.v.samples())?;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(&bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn encode(header: &SnapshotHeader, samples: &[f64]) -> Result<Vec<u8>> {
    if samples.len() != header.nx * header.ny {
        return Err(Error::ShapeMismatch {
            expected: header.nx * header.ny,
            actual: samples.len(),
        });
    }
    let dim = |n: usize| {
        u32::try_from(n).map_err(|_| Error::Snapshot(format!("dimension {n} exceeds u32")))
    };
    let mut out = Vec::with_capacity(HEADER_BYTES + header.payload_bytes());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&dim(header.nx)?.to_le_bytes());
    out.extend_from_slice(&dim(header.ny)?.to_le_bytes());
    let [c, alpha, beta, delta] = header.background;
    for x in [
        header.lx,
        header.ly,
        header.t,
        c,
        alpha,
        beta,
        delta,
        header.frame_speed,
    ] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    for x in samples {
        out.extend_from_slice(&x.to_le_bytes());
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<(SnapshotHeader, Vec<f64>)> {
    if bytes.len() < HEADER_BYTES {
        return Err(Error::Snapshot(format!(
            "truncated header: expected {HEADER_BYTES} bytes, got {}",
            bytes.len()
        )));
    }
    if bytes[..4] != MAGIC {
        return Err(Error::Snapshot(format!(
            "magic mismatch: expected {:?}, found {:?}",
            MAGIC,
            &bytes[..4]
        )));
    }
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
    let f64_at = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes"));
    let version = u32_at(4);
    if version != VERSION {
        return Err(Error::Snapshot(format!(
            "version mismatch: file has {version}, reader supports {VERSION}"
        )));
    }
    let f: Vec<f64> = (0..8).map(|k| f64_at(16 + 8 * k)).collect();
    let header = SnapshotHeader {
        nx: u32_at(8) as usize,
        ny: u32_at(12) as usize,
        lx: f[0],
        ly: f[1],
        t: f[2],
        background: [f[3], f[4], f[5], f[6]],
        frame_speed: f[7],
    };
    let expected = HEADER_BYTES + header.payload_bytes();
    if bytes.len() != expected {
        return Err(Error::Snapshot(format!(
            "payload size: expected {expected} bytes, got {}",
            bytes.len()
        )));
    }
    let samples = bytes[HEADER_BYTES..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((header, samples))
}

pub fn read_snapshot(path: &Path) -> Result<SimState> {
    read_snapshot_with_header(path).map(|(_, s)| s)
}

pub fn read_snapshot_with_header(path: &Path) -> Result<(SnapshotHeader, SimState)> {
    let (header, samples) = decode(&std::fs::read(path)?)?;
    let grid = Grid::new(header.nx, header.ny, header.lx, header.ly)?;
    let state = SimState {
        t: header.t,
        v: RealField::from_samples(grid, samples)?,
        background: BackgroundSpec::from_parameters(header.background)?,
    };
    Ok((header, state))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state() -> SimState {
        let g = Grid::new(8, 16, 10.0, 6.0).unwrap();
        let v = RealField::from_fn(g, |x, y| (x * 0.3).sin() * (y + 0.1).cos() / 7.0);
        SimState {
            t: 0.5,
            v,
            background: BackgroundSpec::kdv_line(1.5).unwrap(),
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.kpi");
        let s = state();
        write_snapshot(&s, &path).unwrap();
        let (h, back) = read_snapshot_with_header(&path).unwrap();
        assert_eq!(back.t.to_bits(), 0.5f64.to_bits());
        assert_eq!(h.frame_speed, 1.5);
        let same =
            s.v.samples()
                .iter()
                .zip(back.v.samples())
                .all(|(a, b)| a.to_bits() == b.to_bits());
        assert!(same);
        assert_eq!(back.background, s.background);
    }

    #[test]
    fn truncation_names_byte_counts() {
        let s = state();
        let h = SnapshotHeader {
            nx: 8,
            ny: 16,
            lx: 10.0,
            ly: 6.0,
            t: 0.5,
            background: s.background.parameters(),
            frame_speed: 0.0,
        };
        let bytes = encode(&h, s.v.samples()).unwrap();
        let err = decode(&bytes[..bytes.len() - 8]).unwrap_err().to_string();
        assert!(err.contains(&format!("expected {}", bytes.len())), "{err}");
        assert!(err.contains(&format!("got {}", bytes.len() - 8)), "{err}");
    }

    #[test]
    fn rejects_magic_and_version() {
        let s = state();
        let h = SnapshotHeader {
            nx: 8,
            ny: 16,
            lx: 10.0,
            ly: 6.0,
            t: 0.0,
            background: [0.0; 4],
            frame_speed: 0.0,
        };
        let mut bytes = encode(&h, s.v.samples()).unwrap();
        bytes[4] = 2;
        assert!(decode(&bytes).unwrap_err().to_string().contains("version"));
        bytes[0] = b'X';
        assert!(decode(&bytes).unwrap_err().to_string().contains("magic"));
    }
}
