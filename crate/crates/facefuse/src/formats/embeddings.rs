//! Embedding files: CSV (`subject_id,sample_id,setting_id,dim,v0,...`) or
//! the binary `FEV1` layout, detected by its magic bytes.
//!
//! Binary layout, all integers little-endian:
//! `b"FEV1"`, `u32 dim`, `u32 count`, then `count` records of three
//! length-prefixed (`u16`) UTF-8 strings `subject_id`, `sample_id`,
//! `setting_id` (empty = none) followed by `dim` `f32` components.

use std::path::Path;

use facefuse_core::scores::Embedding;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"FEV1";

pub fn parse(path: &Path, bytes: &[u8]) -> Result<Vec<Embedding>> {
    if bytes.starts_with(MAGIC) {
        parse_binary(path, bytes)
    } else {
        parse_csv(path, bytes)
    }
}

pub fn load(path: &Path) -> Result<Vec<Embedding>> {
    parse(path, &crate::fs::read(path)?)
}

pub fn parse_csv(path: &Path, bytes: &[u8]) -> Result<Vec<Embedding>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(bytes);
    let header = rdr
        .headers()
        .map_err(|e| Error::format(path, 1, e.to_string()))?
        .clone();
    let fixed = ["subject_id", "sample_id", "setting_id", "dim"];
    if header.len() < 5 || header.iter().take(4).ne(fixed) {
        return Err(Error::format(
            path,
            1,
            "header must start with subject_id,sample_id,setting_id,dim,v0",
        ));
    }
    for (i, h) in header.iter().skip(4).enumerate() {
        if h != format!("v{i}") {
            return Err(Error::format(path, 1, format!("expected column v{i}, found {h:?}")));
        }
    }
    let header_dim = header.len() - 4;
    let mut out = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let line = n + 2;
        let rec = rec.map_err(|e| Error::format(path, line, e.to_string()))?;
        let dim: usize = rec
            .get(3)
            .and_then(|d| d.trim().parse().ok())
            .ok_or_else(|| Error::format(path, line, "dim is not a non-negative integer"))?;
        if dim != header_dim || rec.len() != 4 + dim {
            return Err(Error::format(
                path,
                line,
                format!(
                    "row has dim {dim} and {} values; header declares {header_dim}",
                    rec.len().saturating_sub(4)
                ),
            ));
        }
        let vector = rec
            .iter()
            .skip(4)
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::format(path, line, format!("bad component {v:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let setting = Some(rec[2].to_string()).filter(|s| !s.is_empty());
        out.push(
            Embedding::new(&rec[0], &rec[1], setting, vector).map_err(|e| Error::format(path, line, e.to_string()))?,
        );
    }
    if out.is_empty() {
        return Err(Error::format(path, 1, "no embeddings"));
    }
    Ok(out)
}

pub fn to_csv(items: &[Embedding]) -> Result<Vec<u8>> {
    let dim = facefuse_core::scores::uniform_dim(items)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "subject_id".to_string(),
        "sample_id".into(),
        "setting_id".into(),
        "dim".into(),
    ];
    header.extend((0..dim).map(|i| format!("v{i}")));
    w.write_record(&header).map_err(|e| Error::Internal(e.to_string()))?;
    for e in items {
        let mut row = vec![
            e.subject_id.clone(),
            e.sample_id.clone(),
            e.setting_id.clone().unwrap_or_default(),
            dim.to_string(),
        ];
        // shortest representation that parses back exactly
        row.extend(e.vector.iter().map(|v| format!("{v:?}")));
        w.write_record(&row).map_err(|e| Error::Internal(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Internal(e.to_string()))
}

struct Cursor<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| {
                Error::format(
                    self.path,
                    0,
                    format!("truncated binary embedding file at byte {}", self.pos),
                )
            })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u16()? as usize;
        let at = self.pos;
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| Error::format(self.path, 0, format!("invalid UTF-8 string at byte {at}")))
    }
}

pub fn parse_binary(path: &Path, bytes: &[u8]) -> Result<Vec<Embedding>> {
    let mut c = Cursor { path, bytes, pos: 0 };
    if c.take(4)? != MAGIC {
        return Err(Error::format(path, 0, "missing FEV1 magic"));
    }
    let dim = c.u32()? as usize;
    let count = c.u32()? as usize;
    let mut out = Vec::with_capacity(count.min(1 << 20));
    for i in 0..count {
        let subject = c.string()?;
        let sample = c.string()?;
        let setting = Some(c.string()?).filter(|s| !s.is_empty());
        let raw = c.take(4 * dim)?;
        let vector = raw
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
            .collect();
        out.push(
            Embedding::new(subject, sample, setting, vector)
                .map_err(|e| Error::format(path, 0, format!("record {i}: {e}")))?,
        );
    }
    if c.pos != bytes.len() {
        return Err(Error::format(
            path,
            0,
            format!("{} trailing bytes after {count} records", bytes.len() - c.pos),
        ));
    }
    Ok(out)
}

/// Components are stored as `f32`.
pub fn to_binary(items: &[Embedding]) -> Result<Vec<u8>> {
    let dim = facefuse_core::scores::uniform_dim(items)?;
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    out.extend_from_slice(&(items.len() as u32).to_le_bytes());
    for e in items {
        for s in [
            e.subject_id.as_str(),
            e.sample_id.as_str(),
            e.setting_id.as_deref().unwrap_or(""),
        ] {
            let len = u16::try_from(s.len()).map_err(|_| Error::Validation(format!("identifier too long: {s:?}")))?;
            out.extend_from_slice(&len.to_le_bytes());
            out.extend_from_slice(s.as_bytes());
        }
        for &v in &e.vector {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    Ok(out)
}
