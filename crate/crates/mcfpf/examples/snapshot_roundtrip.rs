//! Snapshot I/O: the binary format round-trips bit-exactly, and header
//! corruption is reported distinctly from truncation.
//!
//! ```
//! cargo run --release --example snapshot_roundtrip
//! ```

use mcfpf::field::snapshot::{load_snapshot, save_snapshot};
use mcfpf::field::{Grid, PhaseField};

fn main() -> mcfpf::Result<()> {
    let grid = Grid::new(2, 32, 1.0)?;
    let comps: Vec<Vec<f64>> = (0..1)
        .map(|_| (0..grid.cells()).map(|i| ((i as f64) * 0.137).sin()).collect())
        .collect();
    let field = PhaseField::new(grid, comps, 0.0625, 1.5)?;

    let dir = std::env::temp_dir().join("mcfpf_snapshot_example");
    std::fs::create_dir_all(&dir).map_err(|e| mcfpf::Error::io(&dir, e))?;
    let path = dir.join("state.bin");
    save_snapshot(&field, &path)?;
    let loaded = load_snapshot(&path)?;
    let bitwise = loaded.components[0]
        .iter()
        .zip(&field.components[0])
        .all(|(a, b)| a.to_bits() == b.to_bits());
    println!("round trip bit-exact: {bitwise}");
    println!(
        "metadata: d = {}, n = {}, box = {}, eps = {}, t = {}",
        loaded.grid.dim(),
        loaded.grid.n(),
        loaded.grid.box_len(),
        loaded.epsilon,
        loaded.time
    );

    // Corrupt the magic: a header error, not a truncation.
    let mut bytes = std::fs::read(&path).map_err(|e| mcfpf::Error::io(&path, e))?;
    bytes[3] ^= 0x01;
    let bad = dir.join("bad_magic.bin");
    std::fs::write(&bad, &bytes).map_err(|e| mcfpf::Error::io(&bad, e))?;
    println!("corrupted magic -> {}", load_snapshot(&bad).unwrap_err());

    // Truncate the payload (with the magic restored).
    bytes[3] ^= 0x01;
    let short = dir.join("short.bin");
    std::fs::write(&short, &bytes[..bytes.len() - 64]).map_err(|e| mcfpf::Error::io(&short, e))?;
    println!("short payload   -> {}", load_snapshot(&short).unwrap_err());
    Ok(())
}
