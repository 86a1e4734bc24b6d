//! Binary and CSV grid snapshots.
//!
//! Binary layout: a 16-byte header (4-byte magic, little-endian `u32` size,
//! two little-endian `u32` reserved words = 0) followed by the row-major
//! values as little-endian `f64`. Wigner grids use magic `WGRD` and store `N` (the grid
//! side is `2N`); classical grids use `CGRD` and store the side `G`.

use std::io::{Read, Write};

use crate::classical::ClassicalDensity;
use crate::kinematics::PhaseSpaceSpec;
use crate::wigner::WignerGrid;
use crate::{Error, Result};

pub const WIGNER_MAGIC: [u8; 4] = *b"WGRD";
pub const CLASSICAL_MAGIC: [u8; 4] = *b"CGRD";
pub const HEADER_LEN: usize = 16;

fn write_grid<W: Write>(out: &mut W, magic: [u8; 4], size: usize, values: &[f64]) -> Result<()> {
    let size = u32::try_from(size).map_err(|_| Error::Format(format!("grid size {size} exceeds u32")))?;
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * values.len());
    buf.extend_from_slice(&magic);
    buf.extend_from_slice(&size.to_le_bytes());
    buf.extend_from_slice(&[0u8; 8]);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

fn read_grid<R: Read>(input: &mut R, magic: [u8; 4], side_of: impl Fn(usize) -> usize) -> Result<(usize, Vec<f64>)> {
    let mut header = [0u8; HEADER_LEN];
    input.read_exact(&mut header)?;
    if header[..4] != magic {
        return Err(Error::Format(format!(
            "expected magic {:?}, found {:?}",
            String::from_utf8_lossy(&magic),
            String::from_utf8_lossy(&header[..4])
        )));
    }
    let size = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes")) as usize;
    if header[8..].iter().any(|b| *b != 0) {
        return Err(Error::Format("reserved header bytes are not zero".into()));
    }
    let side = side_of(size);
    let mut body = Vec::new();
    input.read_to_end(&mut body)?;
    if body.len() != 8 * side * side {
        return Err(Error::Format(format!(
            "payload has {} bytes, expected {} for a {side}x{side} grid",
            body.len(),
            8 * side * side
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((size, values))
}

pub fn write_wigner<W: Write>(out: &mut W, grid: &WignerGrid) -> Result<()> {
    write_grid(out, WIGNER_MAGIC, grid.spec().n(), grid.values())
}

/// Reads a Wigner grid; the spec is antiperiodic with the stored `N`.
pub fn read_wigner<R: Read>(input: &mut R) -> Result<WignerGrid> {
    let (n, values) = read_grid(input, WIGNER_MAGIC, |n| 2 * n)?;
    WignerGrid::new(&PhaseSpaceSpec::new(n)?, values)
}

pub fn write_classical<W: Write>(out: &mut W, rho: &ClassicalDensity) -> Result<()> {
    write_grid(out, CLASSICAL_MAGIC, rho.grid(), rho.values())
}

pub fn read_classical<R: Read>(input: &mut R) -> Result<ClassicalDensity> {
    let (g, values) = read_grid(input, CLASSICAL_MAGIC, |g| g)?;
    ClassicalDensity::new(g, values)
}

/// `q,p,value` rows with a header, values to 17 significant digits.
pub fn write_grid_csv<W: Write>(out: &mut W, side: usize, values: &[f64]) -> Result<()> {
    let mut text = String::from("q,p,value\n");
    for (k, v) in values.iter().enumerate() {
        text.push_str(&format!("{},{},{:.16e}\n", k / side, k % side, v));
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}
