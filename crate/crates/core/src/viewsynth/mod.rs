//! Gallery enlargement: render a reconstructed face template over a grid of
//! azimuth/elevation poses.

mod camera;
mod mesh;
mod pose;
mod raster;

pub use camera::{project_vertices, rotate, Camera, ProjectedVertex, Projection};
pub use mesh::{normalize_mesh, Mesh};
pub use pose::{pose_grid, Pose, PoseGridParams};
pub use raster::{enlarge_gallery, rasterize, PreparedView, Shading, ViewImage, DEFAULT_ALBEDO};
