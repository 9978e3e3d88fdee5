//! Bit-exact snapshot I/O.
//!
//! Layout: magic "MCFPF1\0\0" (8 bytes), little-endian u64 d, N, n,
//! little-endian f64 box length, epsilon, time, then N * n^d little-endian
//! f64 values in row-major order (x fastest), component-major.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Grid, PhaseField};
use crate::error::{Error, Result};

pub const MAGIC: [u8; 8] = *b"MCFPF1\0\0";

/// Writes a snapshot; the round trip through `load_snapshot` is bit-exact.
pub fn save_snapshot(field: &PhaseField, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    w.write_all(&MAGIC).map_err(io)?;
    w.write_all(&(field.grid.dim() as u64).to_le_bytes()).map_err(io)?;
    w.write_all(&(field.num_components() as u64).to_le_bytes()).map_err(io)?;
    w.write_all(&(field.grid.n() as u64).to_le_bytes()).map_err(io)?;
    w.write_all(&field.grid.box_len().to_le_bytes()).map_err(io)?;
    w.write_all(&field.epsilon.to_le_bytes()).map_err(io)?;
    w.write_all(&field.time.to_le_bytes()).map_err(io)?;
    for comp in &field.components {
        for v in comp {
            w.write_all(&v.to_le_bytes()).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

fn read_exact_or_truncated(
    r: &mut impl Read,
    buf: &mut [u8],
    expected: u64,
    consumed: &mut u64,
    path: &Path,
) -> Result<()> {
    let mut filled = 0;
    while filled < buf.len() {
        let got = r.read(&mut buf[filled..]).map_err(|e| Error::io(path, e))?;
        if got == 0 {
            return Err(Error::SnapshotTruncated { expected, found: *consumed + filled as u64 });
        }
        filled += got;
    }
    *consumed += buf.len() as u64;
    Ok(())
}

/// Loads a snapshot, distinguishing header errors from truncation.
pub fn load_snapshot(path: &Path) -> Result<PhaseField> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);

    let mut magic = [0u8; 8];
    let mut consumed = 0u64;
    // Until the header is parsed we do not know the full size; use the
    // header size as the expectation for early truncation reports.
    let header_bytes = 8 + 3 * 8 + 3 * 8;
    read_exact_or_truncated(&mut r, &mut magic, header_bytes, &mut consumed, path)?;
    if magic != MAGIC {
        return Err(Error::SnapshotHeader(format!("bad magic bytes {magic:02x?}")));
    }

    let mut u64buf = [0u8; 8];
    let mut read_u64 = |r: &mut BufReader<File>, consumed: &mut u64| -> Result<u64> {
        read_exact_or_truncated(r, &mut u64buf, header_bytes, consumed, path)?;
        Ok(u64::from_le_bytes(u64buf))
    };
    let dim = read_u64(&mut r, &mut consumed)? as usize;
    let ncomp = read_u64(&mut r, &mut consumed)? as usize;
    let n = read_u64(&mut r, &mut consumed)? as usize;

    let mut f64buf = [0u8; 8];
    let mut read_f64 = |r: &mut BufReader<File>, consumed: &mut u64, expected: u64| -> Result<f64> {
        read_exact_or_truncated(r, &mut f64buf, expected, consumed, path)?;
        Ok(f64::from_le_bytes(f64buf))
    };
    let box_len = read_f64(&mut r, &mut consumed, header_bytes)?;
    let epsilon = read_f64(&mut r, &mut consumed, header_bytes)?;
    let time = read_f64(&mut r, &mut consumed, header_bytes)?;

    if !(1..=3).contains(&dim) {
        return Err(Error::SnapshotHeader(format!("dimension {dim} out of range")));
    }
    if ncomp == 0 || ncomp > 64 {
        return Err(Error::SnapshotHeader(format!("component count {ncomp} out of range")));
    }
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::SnapshotHeader(format!("cells per axis {n} not a power of two >= 8")));
    }
    if !(box_len.is_finite() && box_len > 0.0) {
        return Err(Error::SnapshotHeader(format!("box length {box_len} invalid")));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::SnapshotHeader(format!("epsilon {epsilon} invalid")));
    }

    let grid = Grid::new(dim, n, box_len)?;
    let cells = grid.cells();
    let total = header_bytes + (ncomp * cells * 8) as u64;
    let mut components = Vec::with_capacity(ncomp);
    for _ in 0..ncomp {
        let mut comp = vec![0.0f64; cells];
        for v in &mut comp {
            read_exact_or_truncated(&mut r, &mut f64buf, total, &mut consumed, path)?;
            *v = f64::from_le_bytes(f64buf);
        }
        components.push(comp);
    }
    PhaseField::new(grid, components, epsilon, time)
}
