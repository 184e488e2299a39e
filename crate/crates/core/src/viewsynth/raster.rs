use alloc::vec;
use alloc::vec::Vec;

use super::camera::{project_vertices, rotate, Camera, ProjectedVertex, Projection};
use super::mesh::Mesh;
use super::pose::{pose_grid, Pose, PoseGridParams};
use crate::error::Result;

/// Gray level of meshes without vertex colors.
pub const DEFAULT_ALBEDO: f64 = 0.8;

/// Both modes light the surface with a headlight along the view axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Shading {
    /// One normal per triangle.
    Flat,
    /// Vertex normals interpolated across each triangle.
    #[default]
    Lambert,
}

/// A rendered view. Background pixels are 0 and have infinite depth.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewImage {
    pub pose: Pose,
    pub width: usize,
    pub height: usize,
    /// 1 (gray) or 3 (RGB).
    pub channels: usize,
    /// Row-major, channel-interleaved intensities in `[0, 1]`.
    pub pixels: Vec<f32>,
    pub depth: Option<Vec<f32>>,
}

impl ViewImage {
    /// True where some triangle covers the pixel center.
    pub fn coverage(&self) -> Vec<bool> {
        match &self.depth {
            Some(d) => d.iter().map(|z| z.is_finite()).collect(),
            None => self
                .pixels
                .chunks(self.channels)
                .map(|px| px.iter().any(|&v| v > 0.0))
                .collect(),
        }
    }

    /// 8-bit samples, rounded.
    pub fn to_u8(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .map(|&v| libm::roundf(v.clamp(0.0, 1.0) * 255.0) as u8)
            .collect()
    }
}

/// Everything needed to rasterize one pose, computed once and shared by
/// any number of row bands.
#[derive(Debug, Clone)]
pub struct PreparedView<'a> {
    mesh: &'a Mesh,
    pose: Pose,
    cam: Camera,
    shading: Shading,
    projected: Vec<ProjectedVertex>,
    face_normals: Vec<[f64; 3]>,
    vertex_normals: Vec<[f64; 3]>,
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalized(v: [f64; 3]) -> [f64; 3] {
    let n = libm::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if n > 0.0 {
        v.map(|c| c / n)
    } else {
        [0.0, 0.0, 1.0]
    }
}

fn edge(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
}

impl<'a> PreparedView<'a> {
    pub fn new(mesh: &'a Mesh, pose: Pose, cam: Camera, shading: Shading) -> Self {
        let rotated: Vec<[f64; 3]> = mesh.vertices().iter().map(|&v| rotate(v, &pose)).collect();
        let mut face_normals = Vec::with_capacity(mesh.triangles().len());
        // area-weighted accumulation
        let mut vertex_normals = vec![[0.0; 3]; rotated.len()];
        for t in mesh.triangles() {
            let n = cross(sub(rotated[t[1]], rotated[t[0]]), sub(rotated[t[2]], rotated[t[0]]));
            for &i in t {
                for k in 0..3 {
                    vertex_normals[i][k] += n[k];
                }
            }
            face_normals.push(normalized(n));
        }
        let vertex_normals = vertex_normals.into_iter().map(normalized).collect();
        PreparedView {
            mesh,
            pose,
            cam,
            shading,
            projected: project_vertices(mesh, &pose, &cam),
            face_normals,
            vertex_normals,
        }
    }

    pub fn camera(&self) -> &Camera {
        &self.cam
    }

    pub fn channels(&self) -> usize {
        if self.mesh.colors().is_some() {
            3
        } else {
            1
        }
    }

    /// Renders rows `y0..y1` into buffers that hold exactly those rows.
    ///
    /// Triangles are visited in mesh order and a pixel is overwritten only by
    /// a strictly nearer surface, so any split into bands yields the same
    /// image as one full pass.
    pub fn render_rows(&self, y0: usize, y1: usize, pixels: &mut [f32], depth: &mut [f32]) {
        let (w, ch) = (self.cam.width, self.channels());
        debug_assert_eq!(depth.len(), (y1 - y0) * w);
        debug_assert_eq!(pixels.len(), (y1 - y0) * w * ch);
        let perspective = self.cam.projection == Projection::Perspective;

        for (ti, t) in self.mesh.triangles().iter().enumerate() {
            let v = t.map(|i| self.projected[i]);
            if v.iter().any(|p| p.behind_camera) {
                continue;
            }
            let [p0, p1, p2] = v.map(|p| p.position);
            let area = edge(p0, p1, p2);
            if area == 0.0 || !area.is_finite() {
                continue;
            }
            let min_x = p0[0].min(p1[0]).min(p2[0]);
            let max_x = p0[0].max(p1[0]).max(p2[0]);
            let min_y = p0[1].min(p1[1]).min(p2[1]);
            let max_y = p0[1].max(p1[1]).max(p2[1]);
            // pixel centers at i + 0.5
            let xs = libm::ceil(min_x - 0.5).max(0.0) as usize;
            let xe = (libm::floor(max_x - 0.5) + 1.0).clamp(0.0, w as f64) as usize;
            let ys = (libm::ceil(min_y - 0.5).max(y0 as f64)) as usize;
            let ye = (libm::floor(max_y - 0.5) + 1.0).clamp(0.0, y1 as f64) as usize;
            if xs >= xe || ys >= ye {
                continue;
            }
            let inv_z = v.map(|p| 1.0 / p.depth);
            let z = v.map(|p| p.depth);

            for py in ys..ye {
                for px in xs..xe {
                    let c = [px as f64 + 0.5, py as f64 + 0.5];
                    let b = [edge(p1, p2, c) / area, edge(p2, p0, c) / area, edge(p0, p1, c) / area];
                    if b[0] < 0.0 || b[1] < 0.0 || b[2] < 0.0 {
                        continue;
                    }
                    // perspective-correct weights
                    let (weights, d) = if perspective {
                        let q = [b[0] * inv_z[0], b[1] * inv_z[1], b[2] * inv_z[2]];
                        let s = q[0] + q[1] + q[2];
                        (q.map(|x| x / s), 1.0 / s)
                    } else {
                        (b, b[0] * z[0] + b[1] * z[1] + b[2] * z[2])
                    };
                    let idx = (py - y0) * w + px;
                    let d32 = d as f32;
                    if !(d32 < depth[idx]) {
                        continue;
                    }
                    depth[idx] = d32;
                    let light = self.light(ti, t, weights);
                    let out = &mut pixels[idx * ch..(idx + 1) * ch];
                    match self.mesh.colors() {
                        Some(colors) => {
                            for k in 0..3 {
                                let c = weights[0] * colors[t[0]][k]
                                    + weights[1] * colors[t[1]][k]
                                    + weights[2] * colors[t[2]][k];
                                out[k] = (c * light) as f32;
                            }
                        }
                        None => out[0] = (DEFAULT_ALBEDO * light) as f32,
                    }
                }
            }
        }
    }

    fn light(&self, ti: usize, t: &[usize; 3], weights: [f64; 3]) -> f64 {
        let n = match self.shading {
            Shading::Flat => self.face_normals[ti],
            Shading::Lambert => {
                let vn = t.map(|i| self.vertex_normals[i]);
                normalized([0, 1, 2].map(|k| weights[0] * vn[0][k] + weights[1] * vn[1][k] + weights[2] * vn[2][k]))
            }
        };
        // two-sided headlight along +z
        n[2].abs().min(1.0)
    }

    pub fn render(&self) -> ViewImage {
        let (w, h, ch) = (self.cam.width, self.cam.height, self.channels());
        let mut pixels = vec![0.0f32; w * h * ch];
        let mut depth = vec![f32::INFINITY; w * h];
        self.render_rows(0, h, &mut pixels, &mut depth);
        ViewImage {
            pose: self.pose,
            width: w,
            height: h,
            channels: ch,
            pixels,
            depth: Some(depth),
        }
    }
}

/// Z-buffered render of a normalized mesh at one pose, sampled at pixel centers.
pub fn rasterize(m: &Mesh, pose: &Pose, cam: &Camera, shading: Shading) -> ViewImage {
    PreparedView::new(m, *pose, *cam, shading).render()
}

/// One view per pose of the grid, in grid order.
pub fn enlarge_gallery(m: &Mesh, p: &PoseGridParams, cam: &Camera, shading: Shading) -> Result<Vec<ViewImage>> {
    cam.validate()?;
    Ok(pose_grid(p)?
        .iter()
        .map(|pose| rasterize(m, pose, cam, shading))
        .collect())
}
