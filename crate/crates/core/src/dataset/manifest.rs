use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::label::Label;

pub const MANIFEST_HEADER: [&str; 7] = [
    "output_path",
    "label",
    "source_ids",
    "alpha",
    "transform",
    "pns_applied",
    "padded",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    /// Relative to the output directory, `/`-separated.
    pub output_path: String,
    pub label: Label,
    pub source_ids: Vec<String>,
    pub alpha: Option<f64>,
    pub transform: String,
    pub pns_applied: bool,
    pub padded: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    pub rows: Vec<ManifestRow>,
}

impl Manifest {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.rows.iter().filter(|r| r.label == label).count()
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.rows.len());
        for row in &self.rows {
            if !seen.insert(row.output_path.as_str()) {
                return Err(Error::InvalidData(format!(
                    "duplicate output path {}",
                    row.output_path
                )));
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(MANIFEST_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.output_path.as_str(),
                r.label.as_str(),
                &r.source_ids.join("+"),
                &r.alpha.map(|a| format!("{a:.6}")).unwrap_or_default(),
                &r.transform,
                if r.pns_applied { "true" } else { "false" },
                if r.padded { "true" } else { "false" },
            ])?;
        }
        w.into_inner()
            .map_err(|e| Error::InvalidData(e.to_string()))
    }

    pub fn from_csv(bytes: &[u8]) -> Result<Self> {
        let mut r = csv::Reader::from_reader(bytes);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header != MANIFEST_HEADER {
            return Err(Error::Parse(format!("unexpected manifest header {header:?}")));
        }
        let flag = |s: &str| match s {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(Error::Parse(format!("bad flag '{other}'"))),
        };
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let alpha = match &rec[3] {
                "" => None,
                s => Some(s.parse().map_err(|_| Error::Parse(format!("bad alpha '{s}'")))?),
            };
            rows.push(ManifestRow {
                output_path: rec[0].to_string(),
                label: rec[1].parse()?,
                source_ids: rec[2].split('+').filter(|s| !s.is_empty()).map(str::to_string).collect(),
                alpha,
                transform: rec[4].to_string(),
                pns_applied: flag(&rec[5])?,
                padded: flag(&rec[6])?,
            });
        }
        Ok(Manifest { rows })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }
}
