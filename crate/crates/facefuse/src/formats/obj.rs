//! Wavefront OBJ subset: `v x y z [r g b]` and polygonal `f` records.
//!
//! Faces are fan-triangulated. Indices are 1-based; negative indices count
//! back from the last vertex read. `vn`, `vt`, `o`, `g`, `s` and comments are
//! skipped; `mtllib` / `usemtl` are skipped with a warning.

use std::path::Path;

use facefuse_core::viewsynth::Mesh;

use crate::error::{Error, Result};

pub fn parse(path: &Path, text: &str) -> Result<Mesh> {
    let mut vertices: Vec<[f64; 3]> = Vec::new();
    let mut colors: Vec<Option<[f64; 3]>> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let mut warned_material = false;

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut tokens = content.split_whitespace();
        let Some(tag) = tokens.next() else { continue };
        let args: Vec<&str> = tokens.collect();
        match tag {
            "v" => {
                let nums = args
                    .iter()
                    .map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite()))
                    .collect::<Option<Vec<f64>>>()
                    .ok_or_else(|| Error::format(path, line, format!("malformed vertex record {content:?}")))?;
                match nums.len() {
                    3 | 4 => colors.push(None),
                    6 | 7 => {
                        let c = [nums[3], nums[4], nums[5]];
                        if c.iter().any(|v| !(0.0..=1.0).contains(v)) {
                            return Err(Error::format(path, line, "vertex color outside [0, 1]"));
                        }
                        colors.push(Some(c));
                    }
                    k => return Err(Error::format(path, line, format!("vertex record has {k} numbers"))),
                }
                vertices.push([nums[0], nums[1], nums[2]]);
            }
            "f" => {
                if args.len() < 3 {
                    return Err(Error::format(path, line, "face needs at least 3 vertices"));
                }
                let idx = args
                    .iter()
                    .map(|t| resolve_index(t, vertices.len()).map_err(|m| Error::format(path, line, m)))
                    .collect::<Result<Vec<usize>>>()?;
                for k in 1..idx.len() - 1 {
                    let t = [idx[0], idx[k], idx[k + 1]];
                    if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                        return Err(Error::format(path, line, format!("degenerate face {content:?}")));
                    }
                    triangles.push(t);
                }
            }
            "vn" | "vt" | "vp" | "o" | "g" | "s" | "l" => {}
            "mtllib" | "usemtl" => {
                if !warned_material {
                    log::warn!("{}:{line}: materials are not supported; ignoring {tag}", path.display());
                    warned_material = true;
                }
            }
            other => log::warn!("{}:{line}: ignoring unsupported record {other:?}", path.display()),
        }
    }
    if triangles.is_empty() {
        return Err(Error::format(path, text.lines().count().max(1), "mesh has no faces"));
    }
    let colors = if colors.iter().all(Option::is_some) {
        Some(colors.into_iter().map(Option::unwrap).collect())
    } else {
        if colors.iter().any(Option::is_some) {
            log::warn!(
                "{}: only some vertices carry colors; ignoring vertex colors",
                path.display()
            );
        }
        None
    };
    Ok(Mesh::new(vertices, triangles, colors)?)
}

fn resolve_index(token: &str, n_vertices: usize) -> Result<usize, String> {
    let head = token.split('/').next().unwrap_or("");
    let i: i64 = head.parse().map_err(|_| format!("malformed face index {token:?}"))?;
    let resolved = match i {
        0 => return Err("face index 0 is invalid (OBJ indices are 1-based)".into()),
        i if i > 0 => i - 1,
        i => n_vertices as i64 + i,
    };
    if resolved < 0 || resolved >= n_vertices as i64 {
        return Err(format!(
            "face index {i} out of range ({n_vertices} vertices defined so far)"
        ));
    }
    Ok(resolved as usize)
}

pub fn load(path: &Path) -> Result<Mesh> {
    parse(path, &crate::fs::read_to_string(path)?)
}

/// Unit cube centered on the origin as quad faces.
pub const UNIT_CUBE: &str = "\
# unit cube
v -0.5 -0.5 -0.5
v -0.5 -0.5  0.5
v -0.5  0.5 -0.5
v -0.5  0.5  0.5
v  0.5 -0.5 -0.5
v  0.5 -0.5  0.5
v  0.5  0.5 -0.5
v  0.5  0.5  0.5
f 1 2 4 3
f 5 7 8 6
f 1 5 6 2
f 3 4 8 7
f 1 3 7 5
f 2 6 8 4
";
