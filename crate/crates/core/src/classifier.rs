//! Linear SVM and collaborative-representation classifiers over externally
//! extracted feature vectors.
//!
//! Scores follow the evaluation convention: higher means more morph-like.

use std::path::Path;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::label::Label;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    dim: usize,
    vectors: Vec<Vec<f64>>,
    labels: Vec<Label>,
    groups: Vec<Option<String>>,
}

impl FeatureSet {
    pub fn new(vectors: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<Self> {
        let groups = vec![None; vectors.len()];
        FeatureSet::with_groups(vectors, labels, groups)
    }

    pub fn with_groups(vectors: Vec<Vec<f64>>, labels: Vec<Label>, groups: Vec<Option<String>>) -> Result<Self> {
        if vectors.len() != labels.len() || vectors.len() != groups.len() {
            return Err(Error::InvalidData(format!(
                "{} vectors, {} labels, {} groups",
                vectors.len(),
                labels.len(),
                groups.len()
            )));
        }
        let dim = vectors.first().map_or(0, Vec::len);
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} features, expected {dim}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidData(format!("row {i} has non-finite features")));
            }
        }
        Ok(FeatureSet {
            dim,
            vectors,
            labels,
            groups,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn groups(&self) -> &[Option<String>] {
        &self.groups
    }

    fn require_both_classes(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidData("feature set is empty".into()));
        }
        for label in Label::ALL {
            if !self.labels.contains(&label) {
                return Err(Error::InvalidData(format!("no {label} samples")));
            }
        }
        Ok(())
    }

    /// Parses CSV rows of `label, f1, f2, ...`.
    ///
    /// An optional header row is recognized when its first field is not a
    /// label; a header column named `group_id` is carried through as the
    /// sample's group instead of being read as a feature.
    pub fn from_csv(bytes: &[u8]) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(bytes);
        let mut records = reader.records().peekable();
        let mut group_col = None;
        if let Some(Ok(first)) = records.peek() {
            if first.get(0).is_some_and(|f| f.parse::<Label>().is_err()) {
                group_col = first.iter().position(|h| h == "group_id");
                records.next();
            }
        }
        let (mut vectors, mut labels, mut groups) = (Vec::new(), Vec::new(), Vec::new());
        for (line, rec) in records.enumerate() {
            let rec = rec?;
            let mut fields = rec.iter().enumerate();
            let (_, label) = fields
                .next()
                .ok_or_else(|| Error::Parse(format!("row {line}: empty")))?;
            labels.push(label.parse()?);
            let mut v = Vec::with_capacity(rec.len());
            let mut group = None;
            for (i, f) in fields {
                if Some(i) == group_col {
                    group = Some(f.to_string());
                    continue;
                }
                v.push(
                    f.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("row {line}: bad feature '{f}'")))?,
                );
            }
            vectors.push(v);
            groups.push(group);
        }
        FeatureSet::with_groups(vectors, labels, groups)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::NotFound(path.to_path_buf()),
            _ => Error::io(path, e),
        })?;
        FeatureSet::from_csv(&bytes)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmConfig {
    pub c: f64,
    pub epochs: usize,
    /// Stop when the relative epoch-over-epoch objective change drops below this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            epochs: 1000,
            tol: 1e-4,
            seed: 0,
        }
    }
}

/// `s(x) = <w, x> + b`; positive means genuine.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }

    /// `(1/2)|w|^2 + C * sum(hinge)`.
    pub fn objective(&self, fs: &FeatureSet, c: f64) -> f64 {
        let hinge: f64 = fs
            .vectors
            .iter()
            .zip(&fs.labels)
            .map(|(x, y)| (1.0 - y.sign() * self.decision(x)).max(0.0))
            .sum();
        0.5 * dot(&self.weights, &self.weights) + c * hinge
    }
}

/// Stochastic sub-gradient descent on the primal hinge-loss objective.
///
/// Step size `1 / (lambda t)` with `lambda = 1 / (C n)`; the bias is not
/// regularized. Each epoch visits the samples in a seeded random order and
/// the best iterate seen at an epoch boundary is returned.
pub fn train_svm(fs: &FeatureSet, cfg: &SvmConfig) -> Result<LinearModel> {
    fs.require_both_classes()?;
    if !(cfg.c > 0.0 && cfg.c.is_finite()) || cfg.epochs == 0 || cfg.tol.is_nan() || cfg.tol < 0.0 {
        return Err(Error::InvalidParameter(format!("invalid SVM config {cfg:?}")));
    }
    let n = fs.len();
    let lambda = 1.0 / (cfg.c * n as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();

    let mut model = LinearModel {
        weights: vec![0.0; fs.dim],
        bias: 0.0,
    };
    let mut best = (model.objective(fs, cfg.c), model.clone());
    let mut previous = best.0;
    let mut t = 0usize;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let y = fs.labels[i].sign();
            let x = &fs.vectors[i];
            let margin = y * model.decision(x);
            let shrink = 1.0 - eta * lambda;
            model.weights.iter_mut().for_each(|w| *w *= shrink);
            if margin < 1.0 {
                for (w, xi) in model.weights.iter_mut().zip(x) {
                    *w += eta * y * xi;
                }
                model.bias += eta * y / n as f64;
            }
        }
        let objective = model.objective(fs, cfg.c);
        if objective < best.0 {
            best = (objective, model.clone());
        }
        let change = (previous - objective).abs() / previous.abs().max(1.0);
        log::trace!("epoch {epoch}: objective {objective:.6} (change {change:.2e})");
        if change < cfg.tol {
            break;
        }
        previous = objective;
    }
    Ok(best.1)
}

/// Ridge-regularized collaborative coding over a column-normalized dictionary.
///
/// Every vector, training and query alike, gets one extra coordinate holding
/// a constant `offset` (the mean training feature norm). Without it, two
/// classes that are mirror images through the origin have the same second
/// moments and no residual rule can separate them.
#[derive(Debug, Clone)]
pub struct CrcModel {
    dictionary: DMatrix<f64>,
    labels: Vec<Label>,
    lambda: f64,
    offset: f64,
    gram: Cholesky<f64, Dyn>,
}

pub const DEFAULT_CRC_LAMBDA: f64 = 1e-3;

fn factorize(dictionary: &DMatrix<f64>, lambda: f64) -> Result<Cholesky<f64, Dyn>> {
    let n = dictionary.ncols();
    let gram = dictionary.transpose() * dictionary + DMatrix::identity(n, n) * lambda;
    Cholesky::new(gram).ok_or_else(|| Error::Degenerate("regularized Gram matrix is not positive definite".into()))
}

pub fn train_crc(fs: &FeatureSet, lambda: f64) -> Result<CrcModel> {
    fs.require_both_classes()?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
    }
    let norms: Vec<f64> = fs.vectors.iter().map(|v| dot(v, v).sqrt()).collect();
    if let Some(j) = norms.iter().position(|&n| n == 0.0) {
        return Err(Error::InvalidData(format!("sample {j} has a zero-norm feature vector")));
    }
    let offset = norms.iter().sum::<f64>() / norms.len() as f64;
    let mut dictionary = DMatrix::zeros(fs.dim + 1, fs.len());
    for (j, v) in fs.vectors.iter().enumerate() {
        let norm = (norms[j] * norms[j] + offset * offset).sqrt();
        for (i, &x) in v.iter().enumerate() {
            dictionary[(i, j)] = x / norm;
        }
        dictionary[(fs.dim, j)] = offset / norm;
    }
    CrcModel::from_parts(dictionary, fs.labels.clone(), lambda, offset)
}

impl CrcModel {
    fn from_parts(dictionary: DMatrix<f64>, labels: Vec<Label>, lambda: f64, offset: f64) -> Result<Self> {
        if dictionary.nrows() == 0 || dictionary.ncols() != labels.len() {
            return Err(Error::InvalidData("dictionary and labels disagree".into()));
        }
        let gram = factorize(&dictionary, lambda)?;
        Ok(CrcModel {
            dictionary,
            labels,
            lambda,
            offset,
            gram,
        })
    }

    pub fn dim(&self) -> usize {
        self.dictionary.nrows() - 1
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// The same dictionary with every class tag flipped.
    pub fn with_swapped_classes(&self) -> CrcModel {
        CrcModel {
            labels: self.labels.iter().map(|l| l.other()).collect(),
            ..self.clone()
        }
    }

    fn augment(&self, x: &[f64]) -> Result<DVector<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "feature vector has {} entries, model expects {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(DVector::from_iterator(x.len() + 1, x.iter().copied().chain([self.offset])))
    }

    /// Coefficients `(D^T D + lambda I)^-1 D^T x` of the augmented query.
    pub fn code(&self, x: &[f64]) -> Result<DVector<f64>> {
        let x = self.augment(x)?;
        Ok(self.gram.solve(&(self.dictionary.transpose() * x)))
    }

    /// Reconstruction residual of `x` from each class's atoms: `(genuine, morphed)`.
    pub fn class_residuals(&self, x: &[f64]) -> Result<(f64, f64)> {
        let coef = self.code(x)?;
        let x = self.augment(x)?;
        let mut residual = [x.clone(), x];
        for (j, label) in self.labels.iter().enumerate() {
            let slot = &mut residual[label.code() as usize];
            slot.axpy(-coef[j], &self.dictionary.column(j), 1.0);
        }
        Ok((residual[0].norm(), residual[1].norm()))
    }
}

/// `r_genuine / (r_genuine + r_morphed)`, evaluated so that swapping the two
/// residuals yields exactly `1 - score`.
///
/// The smaller share is snapped to a multiple of 2^-53; on that grid both it
/// and its complement are exact in f64.
pub fn residual_ratio(r_genuine: f64, r_morphed: f64) -> f64 {
    const GRID: f64 = (1u64 << 53) as f64;
    let total = r_genuine + r_morphed;
    if total == 0.0 {
        return 0.5;
    }
    let share = (r_genuine.min(r_morphed) / total * GRID).round() / GRID;
    if r_genuine <= r_morphed {
        share
    } else {
        1.0 - share
    }
}

#[derive(Debug, Clone)]
pub enum Model {
    Linear(LinearModel),
    Crc(CrcModel),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub label: Label,
    /// Morph-likeness in `[0, 1]`.
    pub score: f64,
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::Linear(m) => m.weights.len(),
            Model::Crc(m) => m.dim(),
        }
    }

    pub fn classify(&self, x: &[f64]) -> Result<Classification> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "feature vector has {} entries, model expects {}",
                x.len(),
                self.dim()
            )));
        }
        let score = match self {
            Model::Linear(m) => 1.0 / (1.0 + m.decision(x).exp()),
            Model::Crc(m) => {
                let (g, a) = m.class_residuals(x)?;
                residual_ratio(g, a)
            }
        };
        let label = if score >= 0.5 { Label::Morphed } else { Label::Genuine };
        Ok(Classification { label, score })
    }

    pub fn accuracy(&self, fs: &FeatureSet) -> Result<f64> {
        let mut correct = 0usize;
        for (x, &y) in fs.vectors.iter().zip(&fs.labels) {
            if self.classify(x)?.label == y {
                correct += 1;
            }
        }
        Ok(correct as f64 / fs.len().max(1) as f64)
    }
}

const MODEL_MAGIC: &[u8; 8] = b"MKMODEL\0";
const MODEL_VERSION: u32 = 1;
const KIND_SVM: u8 = 1;
const KIND_CRC: u8 = 2;

impl Model {
    /// Binary layout (little-endian): magic, `u32` version, `u8` kind, `u64` dim,
    /// then for SVM `bias, weights[dim]`; for CRC `lambda, offset, u64 n,
    /// labels[n] as u8, columns[n][dim + 1]` of the normalized dictionary.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MODEL_MAGIC);
        out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
        let put = |out: &mut Vec<u8>, v: f64| out.extend_from_slice(&v.to_le_bytes());
        match self {
            Model::Linear(m) => {
                out.push(KIND_SVM);
                out.extend_from_slice(&(m.weights.len() as u64).to_le_bytes());
                put(&mut out, m.bias);
                m.weights.iter().for_each(|&w| put(&mut out, w));
            }
            Model::Crc(m) => {
                out.push(KIND_CRC);
                out.extend_from_slice(&(m.dim() as u64).to_le_bytes());
                put(&mut out, m.lambda);
                put(&mut out, m.offset);
                out.extend_from_slice(&(m.labels.len() as u64).to_le_bytes());
                out.extend(m.labels.iter().map(|l| l.code() as u8));
                m.dictionary.iter().for_each(|&v| put(&mut out, v));
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader { bytes, pos: 0 };
        if r.take(8)? != MODEL_MAGIC {
            return Err(Error::Parse("not a model file (bad magic)".into()));
        }
        let version = u32::from_le_bytes(r.take(4)?.try_into().expect("4 bytes"));
        if version != MODEL_VERSION {
            return Err(Error::Parse(format!("unsupported model version {version}")));
        }
        let kind = r.take(1)?[0];
        let dim = r.u64()? as usize;
        let model = match kind {
            KIND_SVM => {
                let bias = r.f64()?;
                let weights = (0..dim).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
                Model::Linear(LinearModel { weights, bias })
            }
            KIND_CRC => {
                let lambda = r.f64()?;
                let offset = r.f64()?;
                let n = r.u64()? as usize;
                let labels = r
                    .take(n)?
                    .iter()
                    .map(|&b| match b {
                        0 => Ok(Label::Genuine),
                        1 => Ok(Label::Morphed),
                        other => Err(Error::Parse(format!("bad class tag {other}"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                let count = n
                    .checked_mul(dim + 1)
                    .ok_or_else(|| Error::Parse("model size overflows".into()))?;
                let values = (0..count).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
                Model::Crc(CrcModel::from_parts(
                    DMatrix::from_column_slice(dim + 1, n, &values),
                    labels,
                    lambda,
                    offset,
                )?)
            }
            other => return Err(Error::Parse(format!("unknown model kind {other}"))),
        };
        if r.pos != bytes.len() {
            return Err(Error::Parse("trailing bytes after model".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::NotFound(path.to_path_buf()),
            _ => Error::io(path, e),
        })?;
        Model::from_bytes(&bytes)
    }
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Parse("truncated model file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn unit(dim: usize, i: usize, s: f64) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        v[i] = s;
        v
    }

    #[test]
    fn one_point_per_class() {
        let fs = FeatureSet::new(vec![unit(3, 0, 1.0), unit(3, 0, -1.0)], vec![Label::Genuine, Label::Morphed]).unwrap();
        let m = train_svm(&fs, &SvmConfig::default()).unwrap();
        assert!(m.weights[0] > 0.0);
        let model = Model::Linear(m);
        assert_eq!(model.accuracy(&fs).unwrap(), 1.0);
    }

    #[test]
    fn inseparable_stays_bounded() {
        let x = vec![0.3, -0.2];
        let fs = FeatureSet::new(vec![x.clone(); 10], [Label::Genuine, Label::Morphed].repeat(5)).unwrap();
        let cfg = SvmConfig::default();
        let m = train_svm(&fs, &cfg).unwrap();
        let obj = m.objective(&fs, cfg.c);
        assert!(obj.is_finite() && obj <= 10.0 + 1e-9, "objective {obj}");
        assert_abs_diff_eq!(Model::Linear(m).accuracy(&fs).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn single_class_rejected() {
        let fs = FeatureSet::new(vec![vec![1.0], vec![2.0]], vec![Label::Genuine; 2]).unwrap();
        assert!(train_svm(&fs, &SvmConfig::default()).is_err());
        assert!(train_crc(&fs, 1e-3).is_err());
    }

    #[test]
    fn non_finite_features_rejected() {
        assert!(FeatureSet::new(vec![vec![f64::NAN]], vec![Label::Genuine]).is_err());
        assert!(FeatureSet::new(vec![vec![1.0], vec![1.0, 2.0]], vec![Label::Genuine; 2]).is_err());
    }

    #[test]
    fn logistic_score_of_confident_genuine() {
        let m = Model::Linear(LinearModel {
            weights: unit(4, 0, 1.0),
            bias: 0.0,
        });
        let c = m.classify(&unit(4, 0, 10.0)).unwrap();
        assert_eq!(c.label, Label::Genuine);
        assert!(c.score < 0.001);
        assert!(m.classify(&[1.0]).is_err());
    }

    #[test]
    fn svm_labels_invariant_to_rescaling() {
        let m = LinearModel {
            weights: vec![0.5, -1.5, 2.0],
            bias: -0.25,
        };
        let scaled = LinearModel {
            weights: m.weights.iter().map(|w| w * 7.0).collect(),
            bias: m.bias * 7.0,
        };
        for x in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.2], [0.1, 0.1, 0.1], [-1.0, 2.0, 3.0]] {
            assert_eq!(
                Model::Linear(m.clone()).classify(&x).unwrap().label,
                Model::Linear(scaled.clone()).classify(&x).unwrap().label
            );
        }
    }

    #[test]
    fn orthonormal_dictionary_codes_its_columns() {
        let fs = FeatureSet::new(
            (0..4).map(|i| unit(4, i, 1.0)).collect(),
            vec![Label::Genuine, Label::Genuine, Label::Morphed, Label::Morphed],
        )
        .unwrap();
        let m = train_crc(&fs, 1e-12).unwrap();
        assert_eq!(m.offset(), 1.0);
        // Augmented columns have norm sqrt(2).
        let coef = m.code(&unit(4, 2, 1.0)).unwrap();
        for (j, &c) in coef.iter().enumerate() {
            assert_abs_diff_eq!(c, if j == 2 { 2f64.sqrt() } else { 0.0 }, epsilon = 1e-6);
        }
        let c = Model::Crc(m).classify(&unit(4, 0, 1.0)).unwrap();
        assert_eq!(c.label, Label::Genuine);
        assert!(c.score < 1e-6);
    }

    #[test]
    fn large_lambda_shrinks_coefficients() {
        let fs = FeatureSet::new(
            vec![vec![1.0, 0.2], vec![0.1, 1.0], vec![0.5, 0.5]],
            vec![Label::Genuine, Label::Morphed, Label::Morphed],
        )
        .unwrap();
        let x = [0.7, 0.3];
        let a = train_crc(&fs, 1e6).unwrap().code(&x).unwrap();
        let b = train_crc(&fs, 1e7).unwrap().code(&x).unwrap();
        for j in 0..3 {
            assert!(a[j].abs() < 1e-5);
            assert_abs_diff_eq!(a[j] / b[j], 10.0, epsilon = 1e-3);
        }
    }

    #[test]
    fn duplicate_columns_still_factorize() {
        let v = vec![0.3, 0.4, 0.5];
        let fs = FeatureSet::new(vec![v.clone(), v.clone(), vec![1.0, 0.0, 0.0]], vec![Label::Genuine, Label::Genuine, Label::Morphed]).unwrap();
        let m = train_crc(&fs, 1e-3).unwrap();
        assert!(m.code(&v).unwrap().iter().all(|c| c.is_finite()));
        let zero = FeatureSet::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![Label::Genuine, Label::Morphed]).unwrap();
        assert!(train_crc(&zero, 1e-3).is_err());
    }

    #[test]
    fn equidistant_sample_scores_half() {
        let fs = FeatureSet::new(vec![unit(2, 0, 1.0), unit(2, 1, 1.0)], vec![Label::Genuine, Label::Morphed]).unwrap();
        let m = Model::Crc(train_crc(&fs, 1e-3).unwrap());
        assert_abs_diff_eq!(m.classify(&[1.0, 1.0]).unwrap().score, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn model_files_round_trip() {
        let fs = FeatureSet::new(vec![vec![1.0, 0.5], vec![-1.0, 0.2], vec![0.3, -0.9]], vec![Label::Genuine, Label::Morphed, Label::Morphed]).unwrap();
        let svm = Model::Linear(train_svm(&fs, &SvmConfig::default()).unwrap());
        let crc = Model::Crc(train_crc(&fs, 1e-3).unwrap());
        for m in [svm, crc] {
            let back = Model::from_bytes(&m.to_bytes()).unwrap();
            for x in fs.vectors() {
                assert_eq!(back.classify(x).unwrap(), m.classify(x).unwrap());
            }
        }
        let mut bad = Model::Linear(LinearModel { weights: vec![1.0], bias: 0.0 }).to_bytes();
        assert!(Model::from_bytes(&bad[..bad.len() - 1]).is_err());
        bad[0] = b'X';
        assert!(Model::from_bytes(&bad).is_err());
    }

    #[test]
    fn csv_with_header_and_groups() {
        let text = "label,group_id,f1,f2\ngenuine,img1,0.5,1.0\nmorphed,img2,-1,2\n";
        let fs = FeatureSet::from_csv(text.as_bytes()).unwrap();
        assert_eq!(fs.dim(), 2);
        assert_eq!(fs.labels(), &[Label::Genuine, Label::Morphed]);
        assert_eq!(fs.groups()[1].as_deref(), Some("img2"));
        let bare = FeatureSet::from_csv(b"1,0.5,1.0\n-1,3,4\n").unwrap();
        assert_eq!(bare.vectors()[1], vec![3.0, 4.0]);
        assert!(FeatureSet::from_csv(b"1,0.5,x\n").is_err());
    }

    proptest! {
        #[test]
        fn residual_ratio_swaps_exactly(a in 0.0f64..1e6, b in 0.0f64..1e6) {
            let s = residual_ratio(a, b);
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert_eq!(residual_ratio(b, a), 1.0 - s);
        }
    }
}
