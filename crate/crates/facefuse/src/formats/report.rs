//! CSV reports: the method table, per-setting breakdowns, metric rows per
//! score set, ROC points, correlation matrices and the gallery manifest.

use std::path::Path;

use facefuse_core::harness::{AggregateRow, DistanceGroup, UnitResult};
use facefuse_core::metrics::{CorrelationMatrix, MetricsReport, RocCurve};
use facefuse_core::viewsynth::Pose;

use crate::error::{Error, Result};
use crate::numfmt::{num, opt, parse_opt};

pub const TABLE_HEADER: [&str; 6] = [
    "method",
    "auc_pct",
    "eer_pct",
    "cohens_d",
    "fmr_at_fnmr1",
    "fnmr_at_fmr1",
];

/// One row of the method table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub method: String,
    pub auc_pct: f64,
    pub eer_pct: f64,
    pub cohens_d: Option<f64>,
    pub fmr_at_fnmr1: f64,
    pub fnmr_at_fmr1: f64,
}

impl TableRow {
    pub fn new(method: &str, r: &MetricsReport) -> Self {
        TableRow {
            method: method.to_string(),
            auc_pct: r.auc_pct,
            eer_pct: r.eer_pct,
            cohens_d: r.cohens_d,
            fmr_at_fnmr1: r.fmr_at_fnmr1_pct,
            fnmr_at_fmr1: r.fnmr_at_fmr1_pct,
        }
    }

    fn fields(&self) -> [String; 5] {
        [
            num(self.auc_pct),
            num(self.eer_pct),
            opt(self.cohens_d),
            num(self.fmr_at_fnmr1),
            num(self.fnmr_at_fmr1),
        ]
    }
}

impl From<&AggregateRow> for TableRow {
    fn from(r: &AggregateRow) -> Self {
        TableRow::new(&r.method, &r.report)
    }
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| Error::Internal(e.to_string()))
}

fn put<I, T>(w: &mut csv::Writer<Vec<u8>>, rec: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: AsRef<[u8]>,
{
    w.write_record(rec).map_err(|e| Error::Internal(e.to_string()))
}

pub fn table_to_csv(rows: &[TableRow]) -> Result<Vec<u8>> {
    if rows.is_empty() {
        return Err(Error::Validation("cannot write an empty metrics table".into()));
    }
    let mut w = writer();
    put(&mut w, TABLE_HEADER)?;
    for r in rows {
        let mut rec = vec![r.method.clone()];
        rec.extend(r.fields());
        put(&mut w, rec)?;
    }
    finish(w)
}

pub fn parse_table(path: &Path, bytes: &[u8]) -> Result<Vec<TableRow>> {
    let mut rdr = csv::Reader::from_reader(bytes);
    let header = rdr.headers().map_err(|e| Error::format(path, 1, e.to_string()))?;
    if header.iter().ne(TABLE_HEADER) {
        return Err(Error::format(
            path,
            1,
            format!("header must be {}", TABLE_HEADER.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let line = n + 2;
        let rec = rec.map_err(|e| Error::format(path, line, e.to_string()))?;
        let f = |i: usize| -> Result<f64> {
            rec[i]
                .parse()
                .map_err(|_| Error::format(path, line, format!("bad {} value {:?}", TABLE_HEADER[i], &rec[i])))
        };
        rows.push(TableRow {
            method: rec[0].to_string(),
            auc_pct: f(1)?,
            eer_pct: f(2)?,
            cohens_d: parse_opt(&rec[3]).ok_or_else(|| Error::format(path, line, "bad cohens_d value"))?,
            fmr_at_fnmr1: f(4)?,
            fnmr_at_fmr1: f(5)?,
        });
    }
    Ok(rows)
}

pub const EVAL_HEADER: [&str; 11] = [
    "system_id",
    "setting_id",
    "auc_pct",
    "eer_pct",
    "cohens_d",
    "fmr_at_fnmr1",
    "fnmr_at_fmr1",
    "n_genuine",
    "n_impostor",
    "fmr_at_fnmr1_degenerate",
    "fnmr_at_fmr1_degenerate",
];

/// Rows of `(system_id, setting_id, report)`.
pub fn eval_to_csv(rows: &[(String, String, MetricsReport)]) -> Result<Vec<u8>> {
    let mut w = writer();
    put(&mut w, EVAL_HEADER)?;
    for (sys, setting, r) in rows {
        let mut rec = vec![sys.clone(), setting.clone()];
        rec.extend(TableRow::new(sys, r).fields());
        rec.extend([
            r.n_genuine.to_string(),
            r.n_impostor.to_string(),
            r.fmr_at_fnmr1_degenerate.to_string(),
            r.fnmr_at_fmr1_degenerate.to_string(),
        ]);
        put(&mut w, rec)?;
    }
    finish(w)
}

pub const BREAKDOWN_HEADER: [&str; 10] = [
    "train_setting",
    "test_setting",
    "method",
    "auc_pct",
    "eer_pct",
    "cohens_d",
    "fmr_at_fnmr1",
    "fnmr_at_fmr1",
    "n_genuine",
    "n_impostor",
];

pub fn breakdown_to_csv(units: &[UnitResult]) -> Result<Vec<u8>> {
    let mut w = writer();
    put(&mut w, BREAKDOWN_HEADER)?;
    for u in units {
        let mut rec = vec![u.train_setting.clone(), u.test_setting.clone(), u.method.clone()];
        rec.extend(TableRow::new(&u.method, &u.report).fields());
        rec.extend([u.report.n_genuine.to_string(), u.report.n_impostor.to_string()]);
        put(&mut w, rec)?;
    }
    finish(w)
}

pub fn by_distance_to_csv(groups: &[DistanceGroup]) -> Result<Vec<u8>> {
    let mut w = writer();
    put(&mut w, ["distance", "method", "auc_pct", "n_settings"])?;
    for g in groups {
        put(
            &mut w,
            [
                g.distance.clone(),
                g.method.clone(),
                num(g.auc_pct),
                g.n_settings.to_string(),
            ],
        )?;
    }
    finish(w)
}

pub fn roc_to_csv(roc: &RocCurve) -> Result<Vec<u8>> {
    let mut w = writer();
    put(&mut w, ["threshold", "fmr", "fnmr"])?;
    for p in roc.points() {
        put(&mut w, [num(p.threshold), num(p.fmr), num(p.fnmr)])?;
    }
    finish(w)
}

/// Square matrix; the header row and first column hold the system ids,
/// undefined coefficients are `NA`.
pub fn correlation_to_csv(c: &CorrelationMatrix) -> Result<Vec<u8>> {
    let mut w = writer();
    let mut header = vec![String::new()];
    header.extend(c.systems.iter().cloned());
    put(&mut w, header)?;
    for (sys, row) in c.systems.iter().zip(&c.values) {
        let mut rec = vec![sys.clone()];
        rec.extend(row.iter().map(|v| opt(*v)));
        put(&mut w, rec)?;
    }
    finish(w)
}

pub fn parse_correlation(path: &Path, bytes: &[u8]) -> Result<CorrelationMatrix> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(bytes);
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| Error::format(path, 1, "empty file"))?
        .map_err(|e| Error::format(path, 1, e.to_string()))?;
    let systems: Vec<String> = header.iter().skip(1).map(String::from).collect();
    let mut values = Vec::new();
    for (n, rec) in records.enumerate() {
        let line = n + 2;
        let rec = rec.map_err(|e| Error::format(path, line, e.to_string()))?;
        if rec.get(0) != systems.get(n).map(String::as_str) || rec.len() != systems.len() + 1 {
            return Err(Error::format(
                path,
                line,
                "row label or width does not match the header",
            ));
        }
        values.push(
            rec.iter()
                .skip(1)
                .map(|v| parse_opt(v).ok_or_else(|| Error::format(path, line, format!("bad coefficient {v:?}"))))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    if values.len() != systems.len() {
        return Err(Error::format(path, values.len() + 1, "matrix is not square"));
    }
    Ok(CorrelationMatrix { systems, values })
}

pub const MANIFEST_HEADER: [&str; 4] = ["pose_index", "azimuth_deg", "elevation_deg", "filename"];

fn angle_tag(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    if v.fract() == 0.0 {
        format!("{:+03}", v as i64)
    } else {
        format!("{v:+.1}").replace('.', "p")
    }
}

/// `view_az{±DD}_el{±DD}.png`
pub fn view_filename(pose: &Pose) -> String {
    format!(
        "view_az{}_el{}.png",
        angle_tag(pose.azimuth_deg),
        angle_tag(pose.elevation_deg)
    )
}

pub fn manifest_to_csv(poses: &[Pose]) -> Result<Vec<u8>> {
    let mut w = writer();
    put(&mut w, MANIFEST_HEADER)?;
    for (i, p) in poses.iter().enumerate() {
        put(
            &mut w,
            [
                i.to_string(),
                format!("{}", p.azimuth_deg),
                format!("{}", p.elevation_deg),
                view_filename(p),
            ],
        )?;
    }
    finish(w)
}
