use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub const CAMERA_IDS: [&str; 5] = ["cam1", "cam2", "cam3", "cam4", "cam5"];
pub const DISTANCES_M: [f64; 3] = [1.0, 2.6, 4.2];

/// One acquisition configuration: a surveillance camera at a fixed distance.
///
/// The textual id is `<camera>_<meters>m<decimeters>`, e.g. `cam3_2m6`, so
/// it never contains a dot.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingDescriptor {
    pub camera_id: String,
    pub distance_m: f64,
}

impl SettingDescriptor {
    pub fn new(camera_id: &str, distance_m: f64) -> Result<Self> {
        if !CAMERA_IDS.contains(&camera_id) {
            return Err(Error::Invalid(format!("unknown camera id {camera_id:?}")));
        }
        if !DISTANCES_M.contains(&distance_m) {
            return Err(Error::InvalidValue {
                what: "acquisition distance (m)",
                value: distance_m,
            });
        }
        Ok(SettingDescriptor {
            camera_id: String::from(camera_id),
            distance_m,
        })
    }

    /// All 15 camera × distance combinations.
    pub fn universe() -> Vec<SettingDescriptor> {
        CAMERA_IDS
            .iter()
            .flat_map(|c| {
                DISTANCES_M.iter().map(move |&d| SettingDescriptor {
                    camera_id: String::from(*c),
                    distance_m: d,
                })
            })
            .collect()
    }

    pub fn id(&self) -> String {
        let dm = libm::round(self.distance_m * 10.0) as u32;
        format!("{}_{}m{}", self.camera_id, dm / 10, dm % 10)
    }

    pub fn distance_label(&self) -> String {
        format!("{:.1}m", self.distance_m)
    }

    pub fn parse(id: &str) -> Option<SettingDescriptor> {
        let (cam, dist) = id.split_once('_')?;
        let (m, dm) = dist.split_once('m')?;
        if dm.len() != 1 {
            return None;
        }
        let d = m.parse::<u32>().ok()? as f64 + dm.parse::<u32>().ok()? as f64 / 10.0;
        SettingDescriptor::new(cam, d).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CrossKind {
    /// Same distance, different camera.
    Camera,
    /// Same camera, different distance.
    Distance,
    /// Both differ.
    Both,
}

impl CrossKind {
    pub const ALL: [CrossKind; 3] = [CrossKind::Camera, CrossKind::Distance, CrossKind::Both];

    pub fn as_str(self) -> &'static str {
        match self {
            CrossKind::Camera => "cross-camera",
            CrossKind::Distance => "cross-distance",
            CrossKind::Both => "cross-both",
        }
    }
}

/// `None` for identical settings.
pub fn classify_cross(train: &SettingDescriptor, test: &SettingDescriptor) -> Option<CrossKind> {
    match (train.camera_id == test.camera_id, train.distance_m == test.distance_m) {
        (true, true) => None,
        (false, true) => Some(CrossKind::Camera),
        (true, false) => Some(CrossKind::Distance),
        (false, false) => Some(CrossKind::Both),
    }
}

/// Every ordered `(train, test)` pair of distinct settings, sorted.
pub fn cross_pairs(settings: &[String]) -> Vec<(String, String)> {
    let mut s = settings.to_vec();
    s.sort();
    s.dedup();
    s.iter()
        .flat_map(|a| s.iter().filter(move |b| *b != a).map(move |b| (a.clone(), b.clone())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    #[test]
    fn universe_and_ids() {
        let u = SettingDescriptor::universe();
        assert_eq!(u.len(), 15);
        let ids: BTreeSet<String> = u.iter().map(SettingDescriptor::id).collect();
        assert_eq!(ids.len(), 15);
        assert!(ids.contains("cam3_2m6") && ids.contains("cam1_1m0") && ids.contains("cam5_4m2"));
        for d in &u {
            assert_eq!(SettingDescriptor::parse(&d.id()).as_ref(), Some(d));
            assert!(!d.id().contains('.'));
        }
        assert!(SettingDescriptor::parse("cam6_1m0").is_none());
        assert!(SettingDescriptor::parse("cam1_3m0").is_none());
        assert!(SettingDescriptor::parse("synthetic").is_none());
    }

    #[test]
    fn pair_counts() {
        assert_eq!(cross_pairs(&[String::from("a"), String::from("b")]).len(), 2);
        let ids: Vec<String> = SettingDescriptor::universe()
            .iter()
            .map(SettingDescriptor::id)
            .collect();
        let pairs = cross_pairs(&ids);
        assert_eq!(pairs.len(), 210);
        let mut counts = [0usize; 3];
        for (a, b) in &pairs {
            let k = classify_cross(
                &SettingDescriptor::parse(a).unwrap(),
                &SettingDescriptor::parse(b).unwrap(),
            )
            .unwrap();
            counts[k as usize] += 1;
        }
        // 5 cameras at 3 distances: 3*5*4 cross-camera, 5*3*2 cross-distance
        assert_eq!(counts, [60, 30, 120]);
        assert_eq!(counts.iter().sum::<usize>(), 210);
        assert_eq!(classify_cross(&u(0), &u(0)), None);
    }

    fn u(i: usize) -> SettingDescriptor {
        SettingDescriptor::universe()[i].clone()
    }
}
