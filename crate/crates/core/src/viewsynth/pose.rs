use alloc::vec::Vec;

use crate::error::{Error, Result};

/// View angle in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
}

impl Pose {
    pub const FRONTAL: Pose = Pose {
        azimuth_deg: 0.0,
        elevation_deg: 0.0,
    };

    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Result<Self> {
        for (what, v) in [("azimuth", azimuth_deg), ("elevation", elevation_deg)] {
            if !v.is_finite() || !(-180.0..=180.0).contains(&v) {
                return Err(Error::InvalidValue { what, value: v });
            }
        }
        Ok(Pose {
            azimuth_deg,
            elevation_deg,
        })
    }
}

/// Bounds and step of the pose sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseGridParams {
    pub max_azimuth_deg: f64,
    pub max_elevation_deg: f64,
    pub offset_deg: f64,
}

impl Default for PoseGridParams {
    fn default() -> Self {
        PoseGridParams {
            max_azimuth_deg: 30.0,
            max_elevation_deg: 30.0,
            offset_deg: 10.0,
        }
    }
}

impl PoseGridParams {
    pub fn new(max_azimuth_deg: f64, max_elevation_deg: f64, offset_deg: f64) -> Result<Self> {
        let p = PoseGridParams {
            max_azimuth_deg,
            max_elevation_deg,
            offset_deg,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.offset_deg > 0.0) || !self.offset_deg.is_finite() {
            return Err(Error::InvalidValue {
                what: "angle offset (must be > 0)",
                value: self.offset_deg,
            });
        }
        for (what, v) in [
            ("maximum azimuth", self.max_azimuth_deg),
            ("maximum elevation", self.max_elevation_deg),
        ] {
            if !(0.0..=180.0).contains(&v) {
                return Err(Error::InvalidValue { what, value: v });
            }
        }
        Ok(())
    }
}

/// Steps `-max, -max + offset, ...` while the value stays `<= max`.
fn sweep(max: f64, offset: f64) -> impl Iterator<Item = f64> {
    // slack absorbs accumulated rounding for fractional offsets
    let slack = 1e-9 * offset;
    (0..)
        .map(move |k| -max + k as f64 * offset)
        .take_while(move |&v| v <= max + slack)
}

/// Poses in row-major order: elevation outer, azimuth inner, both ascending.
pub fn pose_grid(p: &PoseGridParams) -> Result<Vec<Pose>> {
    p.validate()?;
    let mut out = Vec::new();
    for el in sweep(p.max_elevation_deg, p.offset_deg) {
        for az in sweep(p.max_azimuth_deg, p.offset_deg) {
            out.push(Pose {
                azimuth_deg: az,
                elevation_deg: el,
            });
        }
    }
    Ok(out)
}
