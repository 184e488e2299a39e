//! Correlated synthetic scores from a one-factor Gaussian copula.
//!
//! For every trial a latent `L ~ N(0, 1)` is shared by all systems; system
//! `i` draws `raw = mu + sigma * (sqrt(rho) L + sqrt(1 - rho) e_i)` with
//! independent `e_i ~ N(0, 1)`, using the class-specific `mu` and `sigma`.
//! Raw values are mapped into `]0, 1]` by treating `exp(-raw)` as a distance
//! and applying `1 / (d + 1)`, i.e. the logistic function.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::scores::{ScoreRecord, ScoreSet, TrialKey};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassParams {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub system_id: String,
    pub genuine: ClassParams,
    pub impostor: ClassParams,
}

impl SystemParams {
    /// Places the genuine mean so the pre-squash AUC equals `target_auc`
    /// (a fraction), given the impostor distribution and the genuine spread.
    pub fn for_auc(system_id: &str, target_auc: f64, impostor: ClassParams, genuine_std: f64) -> Result<Self> {
        if !(target_auc > 0.0 && target_auc < 1.0) {
            return Err(Error::InvalidValue {
                what: "target AUC (fraction)",
                value: target_auc,
            });
        }
        let spread = libm::sqrt(genuine_std * genuine_std + impostor.std * impostor.std);
        let mean = impostor.mean + spread * normal_quantile(target_auc);
        Ok(SystemParams {
            system_id: String::from(system_id),
            genuine: ClassParams { mean, std: genuine_std },
            impostor,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthGenParams {
    pub systems: Vec<SystemParams>,
    /// Latent correlation in `[0, 1)`.
    pub rho: f64,
    pub n_genuine: usize,
    pub n_impostor: usize,
    pub seed: u64,
    pub setting_id: String,
}

impl SynthGenParams {
    pub fn validate(&self) -> Result<()> {
        if self.systems.is_empty() {
            return Err(Error::Empty("synthetic system list"));
        }
        let mut ids: Vec<&str> = self.systems.iter().map(|s| s.system_id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Invalid(String::from("synthetic system ids must be distinct")));
        }
        for s in &self.systems {
            for c in [s.genuine, s.impostor] {
                if !(c.std > 0.0) || !c.std.is_finite() || !c.mean.is_finite() {
                    return Err(Error::Invalid(format!(
                        "system {}: class parameters need a finite mean and std > 0",
                        s.system_id
                    )));
                }
            }
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::InvalidValue {
                what: "latent correlation rho (in [0, 1))",
                value: self.rho,
            });
        }
        if self.n_genuine < 2 || self.n_impostor < 2 {
            return Err(Error::Invalid(String::from(
                "need at least 2 genuine and 2 impostor trials",
            )));
        }
        Ok(())
    }
}

/// Strictly increasing map from the real line onto `]0, 1]`.
pub fn squash(raw: f64) -> f64 {
    // exp overflows past ~709; the clamp keeps the result strictly positive
    let d = libm::exp(-raw.clamp(-700.0, 700.0));
    1.0 / (d + 1.0)
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// Inverse of [`normal_cdf`] by bisection; accurate to ~1e-15 in `x`.
pub fn normal_quantile(p: f64) -> f64 {
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// AUC (fraction) of the pre-squash Gaussian scores of one system.
pub fn analytic_auc(s: &SystemParams) -> f64 {
    let spread = libm::sqrt(s.genuine.std * s.genuine.std + s.impostor.std * s.impostor.std);
    normal_cdf((s.genuine.mean - s.impostor.mean) / spread)
}

/// One score set per system over identical trial keys.
pub fn synth_scores(p: &SynthGenParams) -> Result<Vec<ScoreSet>> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let shared = libm::sqrt(p.rho);
    let own = libm::sqrt(1.0 - p.rho);
    let mut records: Vec<Vec<ScoreRecord>> = p
        .systems
        .iter()
        .map(|_| Vec::with_capacity(p.n_genuine + p.n_impostor))
        .collect();

    let mut trial = |key: TrialKey, genuine: bool, rng: &mut ChaCha8Rng| {
        let latent: f64 = StandardNormal.sample(rng);
        for (sys, out) in p.systems.iter().zip(records.iter_mut()) {
            let noise: f64 = StandardNormal.sample(rng);
            let c = if genuine { sys.genuine } else { sys.impostor };
            let raw = c.mean + c.std * (shared * latent + own * noise);
            out.push(ScoreRecord::new(sys.system_id.as_str(), key.clone(), squash(raw))?);
        }
        Ok::<(), Error>(())
    };
    for k in 0..p.n_genuine {
        let subject = format!("s{k:06}");
        trial(
            TrialKey::new(p.setting_id.as_str(), subject.as_str(), subject.as_str(), "g"),
            true,
            &mut rng,
        )?;
    }
    for k in 0..p.n_impostor {
        let key = TrialKey::new(p.setting_id.as_str(), format!("s{k:06}"), format!("s{:06}", k + 1), "i");
        trial(key, false, &mut rng)?;
    }
    p.systems
        .iter()
        .zip(records)
        .map(|(s, r)| {
            let mut set = ScoreSet::new(s.system_id.as_str(), r)?;
            set.setting_filter = Some(p.setting_id.clone());
            Ok(set)
        })
        .collect()
}
