use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Triangle mesh with optional per-vertex RGB color.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 3]>,
    triangles: Vec<[usize; 3]>,
    colors: Option<Vec<[f64; 3]>>,
}

impl Mesh {
    pub fn new(vertices: Vec<[f64; 3]>, triangles: Vec<[usize; 3]>, colors: Option<Vec<[f64; 3]>>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::Empty("mesh triangle list"));
        }
        if let Some(v) = vertices.iter().flatten().find(|c| !c.is_finite()) {
            return Err(Error::InvalidValue {
                what: "vertex coordinate",
                value: *v,
            });
        }
        for (n, t) in triangles.iter().enumerate() {
            if let Some(&i) = t.iter().find(|&&i| i >= vertices.len()) {
                return Err(Error::Invalid(format!(
                    "triangle {n} references vertex {i} but the mesh has {} vertices",
                    vertices.len()
                )));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::Invalid(format!("triangle {n} is degenerate: {t:?}")));
            }
        }
        if let Some(c) = &colors {
            if c.len() != vertices.len() {
                return Err(Error::DimensionMismatch {
                    left: vertices.len(),
                    right: c.len(),
                });
            }
            if let Some(v) = c.iter().flatten().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::InvalidValue {
                    what: "vertex color (must lie in [0, 1])",
                    value: *v,
                });
            }
        }
        Ok(Mesh {
            vertices,
            triangles,
            colors,
        })
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn colors(&self) -> Option<&[[f64; 3]]> {
        self.colors.as_deref()
    }

    pub fn centroid(&self) -> [f64; 3] {
        let n = self.vertices.len() as f64;
        let mut c = [0.0; 3];
        for v in &self.vertices {
            for k in 0..3 {
                c[k] += v[k];
            }
        }
        c.map(|x| x / n)
    }

    /// Largest distance from the centroid to a vertex.
    pub fn bounding_radius(&self) -> f64 {
        let c = self.centroid();
        self.vertices
            .iter()
            .map(|v| libm::sqrt((0..3).map(|k| (v[k] - c[k]) * (v[k] - c[k])).sum::<f64>()))
            .fold(0.0, f64::max)
    }
}

/// Centers the vertex centroid at the origin and scales the bounding radius to 1.
pub fn normalize_mesh(m: &Mesh) -> Result<Mesh> {
    let c = m.centroid();
    let r = m.bounding_radius();
    if !(r > 0.0) {
        return Err(Error::Invalid(format!(
            "cannot normalize a mesh whose vertices all coincide at {c:?}"
        )));
    }
    let vertices = m
        .vertices
        .iter()
        .map(|v| [(v[0] - c[0]) / r, (v[1] - c[1]) / r, (v[2] - c[2]) / r])
        .collect();
    Ok(Mesh {
        vertices,
        triangles: m.triangles.clone(),
        colors: m.colors.clone(),
    })
}
