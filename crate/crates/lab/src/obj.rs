//! Wavefront-style OBJ export and the matching round-trip import subset:
//! `v x y z` lines with 9 significant decimal digits, then 1-indexed
//! `f i j k` lines, in deterministic grid order.

use crate::mesh::{MeshError, Result, SurfaceMesh};
use std::io::Write;
use std::path::Path;

/// Formats with 9 significant digits in plain decimal.
pub fn fmt_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0.00000000".to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    let decimals = (8 - exp).max(0) as usize;
    format!("{:.*}", decimals, v)
}

pub fn export_obj(mesh: &SurfaceMesh, path: &Path) -> Result<()> {
    if mesh.is_empty() {
        return Err(MeshError::Empty);
    }
    let mut out = String::with_capacity(mesh.vertices.len() * 40);
    for v in &mesh.vertices {
        out.push_str(&format!(
            "v {} {} {}\n",
            fmt_sig9(v[0]),
            fmt_sig9(v[1]),
            fmt_sig9(v[2])
        ));
    }
    for t in &mesh.triangles {
        out.push_str(&format!("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1));
    }
    let mut f = std::fs::File::create(path).map_err(|e| MeshError::Io(e.to_string()))?;
    f.write_all(out.as_bytes())
        .map_err(|e| MeshError::Io(e.to_string()))?;
    Ok(())
}

/// Reads back the `v`/`f` subset written by [`export_obj`].
pub fn import_obj(path: &Path) -> Result<(Vec<[f64; 3]>, Vec<[u32; 3]>)> {
    let text = std::fs::read_to_string(path).map_err(|e| MeshError::Io(e.to_string()))?;
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for line in text.lines() {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let mut v = [0.0; 3];
                for c in v.iter_mut() {
                    *c = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| MeshError::Io(format!("bad vertex line: {line}")))?;
                }
                vertices.push(v);
            }
            Some("f") => {
                let mut t = [0u32; 3];
                for c in t.iter_mut() {
                    let idx: u32 = parts
                        .next()
                        .and_then(|s| s.split('/').next())
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| MeshError::Io(format!("bad face line: {line}")))?;
                    *c = idx - 1;
                }
                triangles.push(t);
            }
            _ => {}
        }
    }
    Ok((vertices, triangles))
}
