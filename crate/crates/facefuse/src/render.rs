//! Multi-threaded gallery rendering with output independent of thread count.

use std::num::NonZeroUsize;

use facefuse_core::viewsynth::{pose_grid, Camera, Mesh, Pose, PoseGridParams, PreparedView, Shading, ViewImage};

use crate::error::Result;

/// Renders one view, splitting rows into `threads` bands.
pub fn rasterize_parallel(
    mesh: &Mesh,
    pose: &Pose,
    cam: &Camera,
    shading: Shading,
    threads: NonZeroUsize,
) -> ViewImage {
    let view = PreparedView::new(mesh, *pose, *cam, shading);
    let (w, h, ch) = (cam.width, cam.height, view.channels());
    let mut pixels = vec![0.0f32; w * h * ch];
    let mut depth = vec![f32::INFINITY; w * h];
    let rows_per = h.div_ceil(threads.get().min(h));
    std::thread::scope(|scope| {
        let bands = pixels
            .chunks_mut(rows_per * w * ch)
            .zip(depth.chunks_mut(rows_per * w))
            .enumerate();
        for (i, (px, dp)) in bands {
            let view = &view;
            scope.spawn(move || {
                let y0 = i * rows_per;
                view.render_rows(y0, y0 + dp.len() / w, px, dp);
            });
        }
    });
    ViewImage {
        pose: *pose,
        width: w,
        height: h,
        channels: ch,
        pixels,
        depth: Some(depth),
    }
}

/// Renders every pose of the grid, distributing poses over `threads` workers.
pub fn enlarge_gallery_parallel(
    mesh: &Mesh,
    params: &PoseGridParams,
    cam: &Camera,
    shading: Shading,
    threads: NonZeroUsize,
) -> Result<Vec<ViewImage>> {
    cam.validate()?;
    let poses = pose_grid(params)?;
    let workers = threads.get().min(poses.len()).max(1);
    let mut out: Vec<Option<ViewImage>> = vec![None; poses.len()];
    std::thread::scope(|scope| {
        for (k, slots) in out.chunks_mut(poses.len().div_ceil(workers)).enumerate() {
            let start = k * poses.len().div_ceil(workers);
            let poses = &poses;
            scope.spawn(move || {
                for (j, slot) in slots.iter_mut().enumerate() {
                    let pose = &poses[start + j];
                    *slot = Some(facefuse_core::viewsynth::rasterize(mesh, pose, cam, shading));
                }
            });
        }
    });
    Ok(out.into_iter().map(|v| v.expect("every slot rendered")).collect())
}
