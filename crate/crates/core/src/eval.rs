//! Detection metrics over labeled scores.
//!
//! Convention: a higher score is more morph-like, and a sample is flagged
//! as an attack when `score >= threshold`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::label::Label;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreSet {
    pub bona_fide: Vec<f64>,
    pub attack: Vec<f64>,
}

/// One row of a scores CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub label: Label,
    pub score: f64,
    pub group_id: Option<String>,
}

impl ScoreSet {
    pub fn new(bona_fide: Vec<f64>, attack: Vec<f64>) -> Result<Self> {
        if bona_fide.iter().chain(&attack).any(|s| !s.is_finite()) {
            return Err(Error::InvalidData("scores must be finite".into()));
        }
        Ok(ScoreSet { bona_fide, attack })
    }

    pub fn from_records(records: &[ScoreRecord]) -> Result<Self> {
        let pick = |l: Label| records.iter().filter(|r| r.label == l).map(|r| r.score).collect();
        ScoreSet::new(pick(Label::Genuine), pick(Label::Morphed))
    }

    fn require_both(&self) -> Result<()> {
        if self.bona_fide.is_empty() || self.attack.is_empty() {
            return Err(Error::InvalidData(format!(
                "need both classes, got {} bona fide and {} attack scores",
                self.bona_fide.len(),
                self.attack.len()
            )));
        }
        Ok(())
    }

    /// Maps every score through `f`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScoreSet {
        ScoreSet {
            bona_fide: self.bona_fide.iter().map(|&s| f(s)).collect(),
            attack: self.attack.iter().map(|&s| f(s)).collect(),
        }
    }

    /// Exchanges the classes and negates every score.
    pub fn swapped_negated(&self) -> ScoreSet {
        ScoreSet {
            bona_fide: self.attack.iter().map(|s| -s).collect(),
            attack: self.bona_fide.iter().map(|s| -s).collect(),
        }
    }
}

fn fraction(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 / total as f64
    }
}

/// `(apcer, bpcer)` at threshold `t`. Empty classes contribute a rate of 0.
pub fn rates_at(ss: &ScoreSet, t: f64) -> (f64, f64) {
    let accepted = ss.attack.iter().filter(|&&s| s < t).count();
    let rejected = ss.bona_fide.iter().filter(|&&s| s >= t).count();
    (fraction(accepted, ss.attack.len()), fraction(rejected, ss.bona_fide.len()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetPoint {
    pub threshold: f64,
    pub apcer: f64,
    pub bpcer: f64,
}

/// Operating points ordered by decreasing threshold: starts at `+inf`
/// `(1, 0)` and ends at `-inf` `(0, 1)`.
///
/// The lowest distinct score is represented by the `-inf` sentinel, so `n`
/// distinct scores give `n + 1` points.
#[derive(Debug, Clone, PartialEq)]
pub struct DetCurve {
    pub points: Vec<DetPoint>,
}

impl DetCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,apcer,bpcer\n");
        for p in &self.points {
            let t = if p.threshold.is_infinite() {
                if p.threshold > 0.0 { "inf".to_string() } else { "-inf".to_string() }
            } else {
                format!("{:.6}", p.threshold)
            };
            writeln!(out, "{t},{:.6},{:.6}", p.apcer, p.bpcer).expect("write to String");
        }
        out
    }
}

/// Sweep in increasing threshold order, computed with one pass over the
/// merged sorted scores.
fn sweep(ss: &ScoreSet) -> Vec<DetPoint> {
    let mut merged: Vec<(f64, bool)> = ss
        .bona_fide
        .iter()
        .map(|&s| (s, false))
        .chain(ss.attack.iter().map(|&s| (s, true)))
        .collect();
    merged.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (na, nb) = (ss.attack.len(), ss.bona_fide.len());

    let mut points = vec![DetPoint {
        threshold: f64::NEG_INFINITY,
        apcer: fraction(0, na),
        bpcer: fraction(nb, nb),
    }];
    let (mut below_attack, mut below_bona) = (0usize, 0usize);
    let mut i = 0;
    while i < merged.len() {
        let value = merged[i].0;
        if i > 0 {
            points.push(DetPoint {
                threshold: value,
                apcer: fraction(below_attack, na),
                bpcer: fraction(nb - below_bona, nb),
            });
        }
        while i < merged.len() && merged[i].0 == value {
            if merged[i].1 {
                below_attack += 1;
            } else {
                below_bona += 1;
            }
            i += 1;
        }
    }
    points.push(DetPoint {
        threshold: f64::INFINITY,
        apcer: fraction(na, na),
        bpcer: fraction(0, nb),
    });
    points
}

pub fn det_curve(ss: &ScoreSet) -> Result<DetCurve> {
    ss.require_both()?;
    let mut points = sweep(ss);
    points.reverse();
    Ok(DetCurve { points })
}

/// Equal error rate, linearly interpolated between adjacent sweep points.
pub fn eer(ss: &ScoreSet) -> Result<f64> {
    ss.require_both()?;
    let points = sweep(ss);
    // apcer - bpcer rises from -1 at -inf to +1 at +inf.
    let k = points
        .iter()
        .position(|p| p.apcer - p.bpcer >= 0.0)
        .expect("the +inf sentinel has apcer - bpcer = 1");
    let cur = points[k];
    let d1 = cur.apcer - cur.bpcer;
    if d1 == 0.0 {
        return Ok(cur.apcer);
    }
    let prev = points[k - 1];
    let d0 = prev.apcer - prev.bpcer;
    let f = -d0 / (d1 - d0);
    let a = prev.apcer + f * (cur.apcer - prev.apcer);
    let b = prev.bpcer + f * (cur.bpcer - prev.bpcer);
    Ok((0.5 * (a + b)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingRate {
    pub bpcer: f64,
    /// False when only the trivial reject-everything threshold meets the
    /// APCER bound; `bpcer` is then 1.
    pub attainable: bool,
}

/// Lowest BPCER over thresholds with `APCER <= p / 100`.
pub fn bpcer_at_apcer(ss: &ScoreSet, p: f64) -> Result<OperatingRate> {
    ss.require_both()?;
    if !(p > 0.0 && p < 100.0) {
        return Err(Error::InvalidParameter(format!("p must be in (0, 100), got {p}")));
    }
    let limit = p / 100.0;
    let bpcer = sweep(ss)
        .iter()
        .filter(|pt| pt.apcer <= limit)
        .map(|pt| pt.bpcer)
        .fold(1.0, f64::min);
    Ok(OperatingRate {
        bpcer,
        attainable: bpcer < 1.0,
    })
}

/// Percentage of samples on the correct side of `t`.
pub fn accuracy(ss: &ScoreSet, t: f64) -> Result<f64> {
    let total = ss.bona_fide.len() + ss.attack.len();
    if total == 0 {
        return Err(Error::InvalidData("empty score set".into()));
    }
    let correct = ss.bona_fide.iter().filter(|&&s| s < t).count() + ss.attack.iter().filter(|&&s| s >= t).count();
    Ok(100.0 * correct as f64 / total as f64)
}

pub const SUMMARY_APCER_LEVELS: [f64; 3] = [10.0, 5.0, 1.0];

/// The fixed-order `key=value` report; unattainable operating points print as `-`.
pub fn summary(ss: &ScoreSet, threshold: f64) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "accuracy={:.6}", accuracy(ss, threshold)?).expect("write to String");
    writeln!(out, "eer={:.6}", eer(ss)?).expect("write to String");
    for p in SUMMARY_APCER_LEVELS {
        let r = bpcer_at_apcer(ss, p)?;
        let value = if r.attainable { format!("{:.6}", r.bpcer) } else { "-".into() };
        writeln!(out, "bpcer@apcer{p}={value}").expect("write to String");
    }
    Ok(out)
}

pub const SCORES_HEADER: [&str; 3] = ["label", "score", "group_id"];

/// Reads `label,score[,group_id]` rows; a leading header row is optional.
pub fn read_scores(bytes: &[u8]) -> Result<Vec<ScoreRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        if i == 0 && rec.get(0) == Some("label") {
            continue;
        }
        if !(2..=3).contains(&rec.len()) {
            return Err(Error::Parse(format!("scores row {i}: expected 2 or 3 fields")));
        }
        let score: f64 = rec[1]
            .parse()
            .map_err(|_| Error::Parse(format!("scores row {i}: bad score '{}'", &rec[1])))?;
        if !score.is_finite() {
            return Err(Error::InvalidData(format!("scores row {i}: non-finite score")));
        }
        out.push(ScoreRecord {
            label: rec[0].parse()?,
            score,
            group_id: rec.get(2).filter(|g| !g.is_empty()).map(str::to_string),
        });
    }
    Ok(out)
}

pub fn write_scores(records: &[ScoreRecord]) -> String {
    let mut out = SCORES_HEADER.join(",");
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{:.6},{}",
            r.label.presentation(),
            r.score,
            r.group_id.as_deref().unwrap_or("")
        )
        .expect("write to String");
    }
    out
}

pub fn load_scores(path: impl AsRef<Path>) -> Result<Vec<ScoreRecord>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::NotFound(path.to_path_buf()),
        _ => Error::io(path, e),
    })?;
    read_scores(&bytes)
}

/// Averages the scores of records sharing a group id, in order of first
/// appearance. Ungrouped records pass through unchanged.
pub fn fuse(records: &[ScoreRecord]) -> Result<Vec<ScoreRecord>> {
    let mut slots: Vec<(ScoreRecord, usize)> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for r in records {
        let Some(g) = r.group_id.as_deref() else {
            slots.push((r.clone(), 1));
            continue;
        };
        match index.get(g) {
            Some(&i) => {
                let (acc, n) = &mut slots[i];
                if acc.label != r.label {
                    return Err(Error::InvalidData(format!("group '{g}' mixes labels")));
                }
                acc.score += r.score;
                *n += 1;
            }
            None => {
                index.insert(g, slots.len());
                slots.push((r.clone(), 1));
            }
        }
    }
    Ok(slots
        .into_iter()
        .map(|(mut r, n)| {
            r.score /= n as f64;
            r
        })
        .collect())
}
