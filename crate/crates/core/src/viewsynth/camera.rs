use alloc::vec::Vec;

use super::mesh::Mesh;
use super::pose::Pose;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    Perspective,
    Orthographic,
}

/// Pinhole or parallel camera on the +z axis looking at the origin.
///
/// `fov_deg` is the vertical field of view. The orthographic camera uses the
/// magnification the perspective camera has at the origin plane, so both
/// frame a normalized mesh the same way.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub projection: Projection,
    pub fov_deg: f64,
    /// In units of the normalized mesh radius.
    pub subject_distance: f64,
    pub width: usize,
    pub height: usize,
}

impl Default for Camera {
    fn default() -> Self {
        Camera {
            projection: Projection::Perspective,
            fov_deg: 20.0,
            subject_distance: 8.0,
            width: 128,
            height: 128,
        }
    }
}

impl Camera {
    pub fn new(
        projection: Projection,
        fov_deg: f64,
        subject_distance: f64,
        width: usize,
        height: usize,
    ) -> Result<Self> {
        let c = Camera {
            projection,
            fov_deg,
            subject_distance,
            width,
            height,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_size(mut self, width: usize, height: usize) -> Self {
        self.width = width;
        self.height = height;
        self
    }

    pub fn with_projection(mut self, projection: Projection) -> Self {
        self.projection = projection;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fov_deg > 0.0 && self.fov_deg < 180.0) {
            return Err(Error::InvalidValue {
                what: "field of view (degrees, in ]0, 180[)",
                value: self.fov_deg,
            });
        }
        if !(self.subject_distance > 1.0) || !self.subject_distance.is_finite() {
            return Err(Error::InvalidValue {
                what: "subject distance (must exceed 1)",
                value: self.subject_distance,
            });
        }
        if self.width < 16 || self.height < 16 {
            return Err(Error::Invalid(alloc::format!(
                "image size {}x{} is below the 16x16 minimum",
                self.width,
                self.height
            )));
        }
        Ok(())
    }

    /// Focal length in pixels.
    pub fn focal_px(&self) -> f64 {
        0.5 * self.height as f64 / libm::tan(0.5 * self.fov_deg.to_radians())
    }

    /// Pixel position and camera-space depth of a rotated model point.
    /// `None` when the point is not in front of the camera.
    pub fn project(&self, p: [f64; 3]) -> Option<([f64; 2], f64)> {
        let depth = self.subject_distance - p[2];
        let (cx, cy) = (0.5 * self.width as f64, 0.5 * self.height as f64);
        let f = self.focal_px();
        let scale = match self.projection {
            Projection::Perspective => {
                if depth <= NEAR_PLANE {
                    return None;
                }
                f / depth
            }
            Projection::Orthographic => f / self.subject_distance,
        };
        Some(([cx + scale * p[0], cy - scale * p[1]], depth))
    }
}

const NEAR_PLANE: f64 = 1e-6;

/// Azimuth about the vertical axis, then elevation about the horizontal
/// camera axis, both extrinsic.
pub fn rotate(p: [f64; 3], pose: &Pose) -> [f64; 3] {
    let (sa, ca) = libm::sincos(pose.azimuth_deg.to_radians());
    let (se, ce) = libm::sincos(pose.elevation_deg.to_radians());
    let [x, y, z] = p;
    let (x1, z1) = (ca * x + sa * z, -sa * x + ca * z);
    [x1, ce * y - se * z1, se * y + ce * z1]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedVertex {
    /// Pixel coordinates, origin top-left, +y down.
    pub position: [f64; 2],
    /// Distance along the viewing axis.
    pub depth: f64,
    /// Set when the vertex lies on or behind the camera plane; `position`
    /// is then meaningless.
    pub behind_camera: bool,
}

pub fn project_vertices(m: &Mesh, pose: &Pose, cam: &Camera) -> Vec<ProjectedVertex> {
    m.vertices()
        .iter()
        .map(|&v| {
            let r = rotate(v, pose);
            match cam.project(r) {
                Some((position, depth)) => ProjectedVertex {
                    position,
                    depth,
                    behind_camera: false,
                },
                None => ProjectedVertex {
                    position: [f64::NAN; 2],
                    depth: cam.subject_distance - r[2],
                    behind_camera: true,
                },
            }
        })
        .collect()
}
