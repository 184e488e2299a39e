//! Verification metrics: error rates, ROC, AUC, EER, operating-point errors,
//! Cohen's d and Pearson correlation.
//!
//! Decision rule throughout: a trial is accepted as a match iff
//! `score >= threshold`. Rates are derived from integer counts so every
//! metric except Cohen's d depends only on the rank order of the scores.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fusion::TrialMatrix;
use crate::scores::ClassScores;

/// `(fmr, fnmr)` at `threshold`, as fractions.
pub fn confusion_rates(s: &ClassScores, threshold: f64) -> Result<(f64, f64)> {
    s.require_both()?;
    let accepted = s.impostor.iter().filter(|&&v| v >= threshold).count();
    let rejected = s.genuine.iter().filter(|&&v| v < threshold).count();
    Ok((
        accepted as f64 / s.impostor.len() as f64,
        rejected as f64 / s.genuine.len() as f64,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub fmr: f64,
    pub fnmr: f64,
    pub impostors_accepted: usize,
    pub genuines_rejected: usize,
}

/// Error rates at every distinct score plus the `-inf` and `+inf` sentinels,
/// in increasing threshold order.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    points: Vec<RocPoint>,
    n_genuine: usize,
    n_impostor: usize,
}

impl RocCurve {
    pub fn points(&self) -> &[RocPoint] {
        &self.points
    }

    pub fn n_genuine(&self) -> usize {
        self.n_genuine
    }

    pub fn n_impostor(&self) -> usize {
        self.n_impostor
    }

    /// Trapezoidal area under `(fmr, 1 - fnmr)` as a fraction in `[0, 1]`.
    ///
    /// Summed in integer units of `1 / (2 n_g n_i)`, which makes it equal to
    /// the Mann–Whitney statistic with ties counted one half.
    pub fn area(&self) -> f64 {
        let ng = self.n_genuine as u128;
        let twice_area: u128 = self
            .points
            .windows(2)
            .map(|w| {
                let dx = (w[0].impostors_accepted - w[1].impostors_accepted) as u128;
                let tpr_sum = (ng - w[0].genuines_rejected as u128) + (ng - w[1].genuines_rejected as u128);
                dx * tpr_sum
            })
            .sum();
        twice_area as f64 / (2 * ng * self.n_impostor as u128) as f64
    }

    /// Equal error rate as a fraction.
    pub fn equal_error_rate(&self) -> f64 {
        // sign of fmr - fnmr, compared exactly on counts
        let (ng, ni) = (self.n_genuine as i128, self.n_impostor as i128);
        let gap = |p: &RocPoint| p.impostors_accepted as i128 * ng - p.genuines_rejected as i128 * ni;
        let j = self
            .points
            .iter()
            .position(|p| gap(p) <= 0)
            .expect("upper sentinel always has fmr <= fnmr");
        let b = &self.points[j];
        if gap(b) == 0 || j == 0 {
            return b.fmr;
        }
        let a = &self.points[j - 1];
        let (da, db) = (a.fmr - a.fnmr, b.fmr - b.fnmr);
        let t = da / (da - db);
        let fmr = a.fmr + t * (b.fmr - a.fmr);
        let fnmr = a.fnmr + t * (b.fnmr - a.fnmr);
        0.5 * (fmr + fnmr)
    }

    /// Error at an operating point, conservative step convention.
    ///
    /// Among thresholds whose `fixed` rate does not exceed `target_pct`, picks
    /// the largest such rate (ties broken by the smaller complementary error)
    /// and returns the complementary error in percent.
    pub fn operating_point(&self, fixed: FixedRate, target_pct: f64) -> Result<OperatingPoint> {
        if !(target_pct > 0.0 && target_pct < 100.0) {
            return Err(Error::InvalidValue {
                what: "target rate percent (must lie in ]0, 100[)",
                value: target_pct,
            });
        }
        let (n_fixed, n_other) = match fixed {
            FixedRate::Fmr => (self.n_impostor, self.n_genuine),
            FixedRate::Fnmr => (self.n_genuine, self.n_impostor),
        };
        let counts = |p: &RocPoint| match fixed {
            FixedRate::Fmr => (p.impostors_accepted, p.genuines_rejected),
            FixedRate::Fnmr => (p.genuines_rejected, p.impostors_accepted),
        };
        let limit = target_pct * n_fixed as f64;
        let best = self
            .points
            .iter()
            .filter(|p| counts(p).0 as f64 * 100.0 <= limit)
            .min_by(|a, b| {
                let (fa, oa) = counts(a);
                let (fb, ob) = counts(b);
                fb.cmp(&fa).then(oa.cmp(&ob))
            })
            .expect("a sentinel always has a zero fixed rate");
        let other = counts(best).1;
        Ok(OperatingPoint {
            error_pct: 100.0 * other as f64 / n_other as f64,
            threshold: best.threshold,
            degenerate: other == n_other,
        })
    }
}

/// Builds the ROC curve by one sweep over the sorted scores.
pub fn roc_curve(s: &ClassScores) -> Result<RocCurve> {
    s.require_both()?;
    let mut gen = s.genuine.clone();
    let mut imp = s.impostor.clone();
    gen.sort_by(f64::total_cmp);
    imp.sort_by(f64::total_cmp);
    let (ng, ni) = (gen.len(), imp.len());

    let point = |threshold: f64, below_g: usize, below_i: usize| RocPoint {
        threshold,
        fmr: (ni - below_i) as f64 / ni as f64,
        fnmr: below_g as f64 / ng as f64,
        impostors_accepted: ni - below_i,
        genuines_rejected: below_g,
    };

    let mut points = Vec::with_capacity(ng + ni + 2);
    points.push(point(f64::NEG_INFINITY, 0, 0));
    let (mut ig, mut ii) = (0, 0);
    while ig < ng || ii < ni {
        let v = match (gen.get(ig), imp.get(ii)) {
            (Some(&g), Some(&i)) => g.min(i),
            (Some(&g), None) => g,
            (None, Some(&i)) => i,
            (None, None) => unreachable!(),
        };
        // counts strictly below v are the rejected ones at threshold v
        points.push(point(v, ig, ii));
        while ig < ng && gen[ig] == v {
            ig += 1;
        }
        while ii < ni && imp[ii] == v {
            ii += 1;
        }
    }
    points.push(point(f64::INFINITY, ng, ni));
    Ok(RocCurve {
        points,
        n_genuine: ng,
        n_impostor: ni,
    })
}

/// Area under the ROC curve in percent.
pub fn auc(s: &ClassScores) -> Result<f64> {
    Ok(100.0 * roc_curve(s)?.area())
}

/// Equal error rate in percent.
pub fn eer(s: &ClassScores) -> Result<f64> {
    Ok(100.0 * roc_curve(s)?.equal_error_rate())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedRate {
    Fmr,
    Fnmr,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub error_pct: f64,
    pub threshold: f64,
    /// No finite threshold meets the target without rejecting (or accepting)
    /// every trial of the other class.
    pub degenerate: bool,
}

pub fn error_at_operating_point(s: &ClassScores, fixed: FixedRate, target_pct: f64) -> Result<OperatingPoint> {
    roc_curve(s)?.operating_point(fixed, target_pct)
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let ss = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, ss / (n - 1.0))
}

/// Standardized mean difference with pooled, Bessel-corrected deviation.
pub fn cohens_d(s: &ClassScores) -> Result<f64> {
    let (ng, ni) = (s.genuine.len(), s.impostor.len());
    if ng < 2 || ni < 2 {
        return Err(Error::Invalid(alloc::format!(
            "Cohen's d needs at least 2 scores per class (got {ng} genuine, {ni} impostor)"
        )));
    }
    let (mg, vg) = mean_var(&s.genuine);
    let (mi, vi) = mean_var(&s.impostor);
    let pooled = ((ng as f64 - 1.0) * vg + (ni as f64 - 1.0) * vi) / (ng + ni - 2) as f64;
    if !(pooled > 0.0) {
        return Err(Error::Undefined("Cohen's d (pooled variance is zero)"));
    }
    Ok((mg - mi) / libm::sqrt(pooled))
}

/// Sample Pearson correlation of two aligned sequences.
pub fn pearson_corr(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::Invalid(String::from(
            "correlation needs at least 2 aligned values",
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if !(sxx > 0.0) || !(syy > 0.0) {
        return Err(Error::Undefined("correlation of a constant sequence"));
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Pairwise correlations between the columns of a trial matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub systems: Vec<String>,
    /// `None` where a column is constant.
    pub values: Vec<Vec<Option<f64>>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.systems.iter().position(|s| s == a)?;
        let j = self.systems.iter().position(|s| s == b)?;
        self.values[i][j]
    }

    /// Largest defined off-diagonal coefficient.
    pub fn max_off_diagonal(&self) -> Option<f64> {
        let n = self.systems.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter_map(|(i, j)| self.values[i][j])
            .reduce(f64::max)
    }
}

pub fn correlation_matrix(m: &TrialMatrix) -> CorrelationMatrix {
    let n = m.systems().len();
    let columns: Vec<Vec<f64>> = (0..n).map(|i| m.column(i)).collect();
    let mut values = vec![vec![None; n]; n];
    for i in 0..n {
        values[i][i] = Some(1.0);
        for j in i + 1..n {
            let r = pearson_corr(&columns[i], &columns[j]).ok();
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    CorrelationMatrix {
        systems: m.systems().to_vec(),
        values,
    }
}

/// The five summary metrics over one score set, in table units.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub auc_pct: f64,
    pub eer_pct: f64,
    /// `None` when undefined (fewer than two scores per class or zero spread).
    pub cohens_d: Option<f64>,
    pub fmr_at_fnmr1_pct: f64,
    pub fnmr_at_fmr1_pct: f64,
    pub fmr_at_fnmr1_degenerate: bool,
    pub fnmr_at_fmr1_degenerate: bool,
    pub n_genuine: usize,
    pub n_impostor: usize,
}

/// Operating-point target used by the summary report.
pub const STRINGENT_TARGET_PCT: f64 = 1.0;

impl MetricsReport {
    pub fn compute(s: &ClassScores) -> Result<Self> {
        let roc = roc_curve(s)?;
        let at_fnmr = roc.operating_point(FixedRate::Fnmr, STRINGENT_TARGET_PCT)?;
        let at_fmr = roc.operating_point(FixedRate::Fmr, STRINGENT_TARGET_PCT)?;
        Ok(MetricsReport {
            auc_pct: 100.0 * roc.area(),
            eer_pct: 100.0 * roc.equal_error_rate(),
            cohens_d: cohens_d(s).ok(),
            fmr_at_fnmr1_pct: at_fnmr.error_pct,
            fnmr_at_fmr1_pct: at_fmr.error_pct,
            fmr_at_fnmr1_degenerate: at_fnmr.degenerate,
            fnmr_at_fmr1_degenerate: at_fmr.degenerate,
            n_genuine: roc.n_genuine(),
            n_impostor: roc.n_impostor(),
        })
    }
}
