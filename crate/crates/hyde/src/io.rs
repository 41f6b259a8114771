//! The `.hyde` container: a single-line JSON header followed by the raw BSQ
//! payload of little-endian 32-bit floats. A bare `.bsq` payload with a
//! sibling `.json` header (same fields) is accepted on load.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cube::HsiCube;
use crate::error::{HydeError, Result};

pub const MAGIC: &str = "HYDE1";

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    magic: String,
    rows: usize,
    cols: usize,
    bands: usize,
    dtype: String,
    interleave: String,
    byte_order: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    wavelengths: Option<Vec<f64>>,
}

impl Header {
    fn for_cube(cube: &HsiCube) -> Self {
        Header {
            magic: MAGIC.to_string(),
            rows: cube.rows(),
            cols: cube.cols(),
            bands: cube.bands(),
            dtype: "f32".to_string(),
            interleave: "bsq".to_string(),
            byte_order: "little".to_string(),
            wavelengths: cube.wavelengths().map(|w| w.to_vec()),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.magic != MAGIC {
            return Err(HydeError::Format(format!(
                "bad magic {:?}, expected {MAGIC:?}",
                self.magic
            )));
        }
        if self.dtype != "f32" {
            return Err(HydeError::Format(format!(
                "unsupported dtype {:?}",
                self.dtype
            )));
        }
        if self.interleave != "bsq" {
            return Err(HydeError::Format(format!(
                "unsupported interleave {:?}",
                self.interleave
            )));
        }
        if self.byte_order != "little" {
            return Err(HydeError::Format(format!(
                "unsupported byte order {:?}",
                self.byte_order
            )));
        }
        Ok(())
    }
}

fn is_bsq_path(path: &Path) -> bool {
    path.extension()
        .map(|e| e.eq_ignore_ascii_case("bsq"))
        .unwrap_or(false)
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    path.with_extension("json")
}

/// Load a cube from a `.hyde` container or a `.bsq` payload with JSON sidecar.
/// Values are read verbatim (no scaling).
pub fn load_cube(path: impl AsRef<Path>) -> Result<HsiCube> {
    let path = path.as_ref();
    let (header, payload) = if is_bsq_path(path) {
        let sidecar = sidecar_path(path);
        let text = fs::read_to_string(&sidecar).map_err(|e| HydeError::io(sidecar.clone(), e))?;
        let header: Header = serde_json::from_str(&text)
            .map_err(|e| HydeError::Format(format!("sidecar {}: {e}", sidecar.display())))?;
        let payload = fs::read(path).map_err(|e| HydeError::io(path, e))?;
        (header, payload)
    } else {
        let mut file = fs::File::open(path).map_err(|e| HydeError::io(path, e))?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes)
            .map_err(|e| HydeError::io(path, e))?;
        let newline = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| HydeError::Format("missing newline-terminated header".into()))?;
        let header_text = std::str::from_utf8(&bytes[..newline])
            .map_err(|_| HydeError::Format("header is not UTF-8".into()))?;
        let header: Header = serde_json::from_str(header_text)
            .map_err(|e| HydeError::Format(format!("header: {e}")))?;
        (header, bytes[newline + 1..].to_vec())
    };

    header.validate()?;
    let expected = header
        .rows
        .checked_mul(header.cols)
        .and_then(|n| n.checked_mul(header.bands))
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| HydeError::Format("header dimensions overflow".into()))?;
    if payload.len() != expected {
        return Err(HydeError::Integrity(format!(
            "payload is {} bytes but header {}x{}x{} f32 needs {}",
            payload.len(),
            header.rows,
            header.cols,
            header.bands,
            expected
        )));
    }
    let data: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let cube = HsiCube::from_bsq(header.rows, header.cols, header.bands, data)?;
    match header.wavelengths {
        Some(w) => cube.with_wavelengths(w),
        None => Ok(cube),
    }
}

/// Save a cube. Paths ending in `.bsq` get a bare payload plus `.json`
/// sidecar; anything else gets the inline `.hyde` container. `load(save(c))`
/// is bit-identical either way.
pub fn save_cube(cube: &HsiCube, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let header = Header::for_cube(cube);
    let header_json = serde_json::to_string(&header).expect("header serialization cannot fail");

    let write_payload = |w: &mut dyn Write| -> std::io::Result<()> {
        let mut buf = Vec::with_capacity(cube.num_values() * 4);
        for v in cube.as_bsq_slice() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)
    };

    if is_bsq_path(path) {
        let sidecar = sidecar_path(path);
        fs::write(&sidecar, format!("{header_json}\n")).map_err(|e| HydeError::io(sidecar, e))?;
        let file = fs::File::create(path).map_err(|e| HydeError::io(path, e))?;
        let mut w = BufWriter::new(file);
        write_payload(&mut w).map_err(|e| HydeError::io(path, e))?;
        w.flush().map_err(|e| HydeError::io(path, e))?;
    } else {
        let file = fs::File::create(path).map_err(|e| HydeError::io(path, e))?;
        let mut w = BufWriter::new(file);
        w.write_all(header_json.as_bytes())
            .and_then(|_| w.write_all(b"\n"))
            .map_err(|e| HydeError::io(path, e))?;
        write_payload(&mut w).map_err(|e| HydeError::io(path, e))?;
        w.flush().map_err(|e| HydeError::io(path, e))?;
    }
    Ok(())
}
