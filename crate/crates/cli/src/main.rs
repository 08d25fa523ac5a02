//! `morphkit` command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage or input errors, 2 for internal
//! failures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use morphkit::classifier::{train_crc, train_svm, FeatureSet, Model, SvmConfig, DEFAULT_CRC_LAMBDA};
use morphkit::dataset::{
    augment_each, build_training_set, load_landmarks, normalize, sidecar_path, AugmentationPlan, BuildOptions,
    FaceAnnotation, Scheme, NOSE_ANCHOR, TARGET_EYE_DISTANCE,
};
use morphkit::eval::{det_curve, fuse, load_scores, summary, write_scores, ScoreRecord, ScoreSet};
use morphkit::io::{load_image, save_image};
use morphkit::morph::{morph, MorphSpec};
use morphkit::pns::{simulate_pns, PnsParams};
use morphkit::spectral::{magnitude_spectrum, spectral_angle, spectral_correlation};
use morphkit::{Error, Label, Point2, Result};

#[derive(Parser, Debug)]
#[command(name = "morphkit", version, about = "Face morph generation, print-and-scan simulation and detector evaluation")]
#[command(arg_required_else_help = true)]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for every stochastic step.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Blend two aligned faces at weight alpha.
    Morph(MorphArgs),
    /// Simulate printing and scanning an image.
    Pns(PnsArgs),
    /// Scale and crop a face to the 350x400 frame.
    Normalize(NormalizeArgs),
    /// Expand one normalized face into its augmented variants.
    Augment(AugmentArgs),
    /// Normalize, optionally print-and-scan, augment and record a manifest.
    BuildSet(BuildSetArgs),
    /// Write the centred magnitude spectrum as CSV.
    Spectrum(SpectrumArgs),
    /// Spectral angle and correlation between two images.
    SpectrumCompare(CompareArgs),
    /// Fit a classifier on a feature CSV.
    Train(TrainArgs),
    /// Score a feature CSV with a trained model.
    Score(ScoreArgs),
    /// Average scores that share a group id.
    Fuse(FuseArgs),
    /// Print accuracy, EER and BPCER at fixed APCER levels.
    Evaluate(EvaluateArgs),
    /// Write the DET curve as CSV.
    Det(DetArgs),
}

#[derive(Args, Debug)]
struct MorphArgs {
    #[arg(long)]
    i0: PathBuf,
    #[arg(long)]
    i1: PathBuf,
    /// Landmark sidecar for i0.
    #[arg(long)]
    lm0: PathBuf,
    #[arg(long)]
    lm1: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    out: PathBuf,
    /// Blend only inside the landmark hull; keep the warped i0 elsewhere.
    #[arg(long)]
    inner_only: bool,
    /// Do not add frame anchors to the mesh.
    #[arg(long)]
    no_padding: bool,
    /// Accept alpha of exactly 0 or 1.
    #[arg(long)]
    allow_endpoints: bool,
}

#[derive(Args, Debug)]
struct PnsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// key=value parameter file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    beta_x: Option<f64>,
    #[arg(long)]
    beta_k: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    k1: Option<usize>,
    #[arg(long)]
    k2: Option<usize>,
    #[arg(long)]
    sigma1: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long)]
    edge_noise: Option<f64>,
    #[arg(long)]
    dark_noise: Option<f64>,
    #[arg(long)]
    jitter: Option<f64>,
}

#[derive(Args, Debug)]
struct NormalizeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Defaults to the sidecar next to the input.
    #[arg(long)]
    annotation: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct AugmentArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Defaults to the sidecar next to the input, or a nose tip at the frame anchor.
    #[arg(long)]
    annotation: Option<PathBuf>,
    #[arg(long, default_value = "au")]
    scheme: Scheme,
    #[arg(long, default_value = "224x224", value_parser = parse_size)]
    crop_size: (usize, usize),
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct BuildSetArgs {
    #[arg(long)]
    genuine: PathBuf,
    #[arg(long)]
    morphed: PathBuf,
    #[arg(long, default_value = "au")]
    scheme: Scheme,
    #[arg(long, default_value = "224x224", value_parser = parse_size)]
    crop_size: (usize, usize),
    /// Apply print-and-scan with these parameters before augmenting.
    #[arg(long)]
    pns_config: Option<PathBuf>,
    /// Apply print-and-scan with the default parameters.
    #[arg(long, conflicts_with = "pns_config")]
    pns: bool,
    #[arg(long)]
    out_dir: PathBuf,
    /// Defaults to `<out-dir>/manifest.csv`.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out_csv: PathBuf,
    /// Write ln(1 + magnitude) instead of the magnitude.
    #[arg(long)]
    log_display: bool,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum Kind {
    Svm,
    Crc,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    model_out: PathBuf,
    /// SVM hinge-loss weight.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1000)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// CRC ridge weight.
    #[arg(long, default_value_t = DEFAULT_CRC_LAMBDA)]
    lambda: f64,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    scores_out: PathBuf,
}

#[derive(Args, Debug)]
struct FuseArgs {
    #[arg(long)]
    scores: PathBuf,
    /// Column holding the group key.
    #[arg(long, default_value = "group_id")]
    group_by: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    scores: PathBuf,
    /// Operating threshold for accuracy.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
}

#[derive(Args, Debug)]
struct DetArgs {
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn parse_size(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got '{s}'"))?;
    let num = |v: &str| v.trim().parse::<usize>().map_err(|_| format!("bad size '{s}'"));
    Ok((num(w)?, num(h)?))
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn run_morph(a: &MorphArgs) -> Result<()> {
    let i0 = load_image(&a.i0)?;
    let i1 = load_image(&a.i1)?;
    let p0 = load_landmarks(&a.lm0)?;
    let p1 = load_landmarks(&a.lm1)?;
    let spec = MorphSpec {
        alpha: a.alpha,
        composite_inner_only: a.inner_only,
        boundary_padding: !a.no_padding,
        allow_endpoints: a.allow_endpoints,
    };
    save_image(&morph(&i0, &i1, &p0, &p1, &spec)?, &a.out)
}

fn pns_params(a: &PnsArgs, seed: Option<u64>) -> Result<PnsParams> {
    let mut p = match &a.config {
        Some(path) => PnsParams::from_config_file(path)?,
        None => PnsParams::default(),
    };
    let set = |field: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *field = v;
        }
    };
    set(&mut p.omega, a.omega);
    set(&mut p.beta_x, a.beta_x);
    set(&mut p.beta_k, a.beta_k);
    set(&mut p.gamma, a.gamma);
    set(&mut p.sigma1, a.sigma1);
    set(&mut p.sigma2, a.sigma2);
    set(&mut p.edge_noise_std, a.edge_noise);
    set(&mut p.dark_noise_scale, a.dark_noise);
    set(&mut p.jitter, a.jitter);
    p.k1 = a.k1.unwrap_or(p.k1);
    p.k2 = a.k2.unwrap_or(p.k2);
    p.seed = seed.unwrap_or(p.seed);
    p.validate()?;
    Ok(p)
}

fn run_pns(a: &PnsArgs, seed: Option<u64>) -> Result<()> {
    let params = pns_params(a, seed)?;
    log::info!("print-and-scan parameters:\n{}", params.to_config());
    save_image(&simulate_pns(&load_image(&a.input)?, &params)?, &a.out)
}

fn annotation_for(image: &Path, explicit: Option<&PathBuf>) -> Result<FaceAnnotation> {
    FaceAnnotation::load(explicit.cloned().unwrap_or_else(|| sidecar_path(image)))
}

fn run_normalize(a: &NormalizeArgs) -> Result<()> {
    let img = load_image(&a.input)?;
    let n = normalize(&img, &annotation_for(&a.input, a.annotation.as_ref())?)?;
    save_image(&n.image, &a.out)?;
    n.annotation.save(sidecar_path(&a.out))?;
    println!("padded={}", n.padded);
    Ok(())
}

fn run_augment(a: &AugmentArgs) -> Result<()> {
    let img = load_image(&a.input)?;
    let ann = match &a.annotation {
        Some(p) => FaceAnnotation::load(p)?,
        None if sidecar_path(&a.input).is_file() => FaceAnnotation::load(sidecar_path(&a.input))?,
        None => {
            let half = TARGET_EYE_DISTANCE / 2.0;
            let eye_y = NOSE_ANCHOR.y - half;
            FaceAnnotation::new(
                Point2::new(NOSE_ANCHOR.x - half, eye_y),
                Point2::new(NOSE_ANCHOR.x + half, eye_y),
                NOSE_ANCHOR,
            )
        }
    };
    create_dir(&a.out_dir)?;
    let stem = a
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".into());
    let plan = AugmentationPlan::for_scheme(a.scheme, a.crop_size);
    let mut count = 0usize;
    augment_each(&img, &ann, &plan, |out| {
        let path = a.out_dir.join(format!("{stem}__{}.png", out.transform.file_tag()));
        save_image(&out.image, &path)?;
        count += 1;
        Ok(())
    })?;
    println!("images={count}");
    Ok(())
}

fn run_build_set(a: &BuildSetArgs, seed: Option<u64>) -> Result<()> {
    let pns = match (&a.pns_config, a.pns) {
        (Some(path), _) => Some(PnsParams::from_config_file(path)?),
        (None, true) => Some(PnsParams::default()),
        (None, false) => None,
    };
    let opts = BuildOptions {
        plan: AugmentationPlan::for_scheme(a.scheme, a.crop_size),
        pns,
        seed: seed.unwrap_or(0),
        out_dir: a.out_dir.clone(),
    };
    let manifest = build_training_set(&a.genuine, &a.morphed, &opts)?;
    let path = a.manifest.clone().unwrap_or_else(|| a.out_dir.join("manifest.csv"));
    manifest.write(&path)?;
    println!("rows={}", manifest.len());
    for label in Label::ALL {
        println!("{}={}", label.as_str(), manifest.count(label));
    }
    Ok(())
}

fn run_spectrum(a: &SpectrumArgs) -> Result<()> {
    let s = magnitude_spectrum(&load_image(&a.input)?);
    write_file(&a.out_csv, s.to_csv(a.log_display))
}

fn run_compare(a: &CompareArgs) -> Result<()> {
    let sa = magnitude_spectrum(&load_image(&a.a)?);
    let sb = magnitude_spectrum(&load_image(&a.b)?);
    let angle = spectral_angle(&sa, &sb)?;
    let corr = spectral_correlation(&sa, &sb)?;
    println!("angle={angle:.6} correlation={corr:.6}");
    Ok(())
}

fn run_train(a: &TrainArgs, seed: Option<u64>) -> Result<()> {
    let fs = FeatureSet::load(&a.features)?;
    let model = match a.kind {
        Kind::Svm => Model::Linear(train_svm(
            &fs,
            &SvmConfig {
                c: a.c,
                epochs: a.epochs,
                tol: a.tol,
                seed: seed.unwrap_or(0),
            },
        )?),
        Kind::Crc => Model::Crc(train_crc(&fs, a.lambda)?),
    };
    model.save(&a.model_out)?;
    println!("samples={} dim={}", fs.len(), fs.dim());
    println!("training_accuracy={:.6}", 100.0 * model.accuracy(&fs)?);
    Ok(())
}

fn run_score(a: &ScoreArgs) -> Result<()> {
    let model = Model::load(&a.model)?;
    let fs = FeatureSet::load(&a.features)?;
    let mut records = Vec::with_capacity(fs.len());
    for ((x, &label), group) in fs.vectors().iter().zip(fs.labels()).zip(fs.groups()) {
        records.push(ScoreRecord {
            label,
            score: model.classify(x)?.score,
            group_id: group.clone(),
        });
    }
    write_file(&a.scores_out, write_scores(&records))
}

fn run_fuse(a: &FuseArgs) -> Result<()> {
    if a.group_by != "group_id" {
        return Err(Error::InvalidParameter(format!(
            "scores files carry one grouping column, 'group_id'; got '{}'",
            a.group_by
        )));
    }
    let fused = fuse(&load_scores(&a.scores)?)?;
    write_file(&a.out, write_scores(&fused))?;
    println!("rows={}", fused.len());
    Ok(())
}

fn run_evaluate(a: &EvaluateArgs) -> Result<()> {
    let ss = ScoreSet::from_records(&load_scores(&a.scores)?)?;
    print!("{}", summary(&ss, a.threshold)?);
    Ok(())
}

fn run_det(a: &DetArgs) -> Result<()> {
    let ss = ScoreSet::from_records(&load_scores(&a.scores)?)?;
    let det = det_curve(&ss)?;
    write_file(&a.out, det.to_csv())?;
    println!("points={}", det.points.len());
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    let seed = cli.seed;
    match &cli.command {
        Command::Morph(a) => run_morph(a),
        Command::Pns(a) => run_pns(a, seed),
        Command::Normalize(a) => run_normalize(a),
        Command::Augment(a) => run_augment(a),
        Command::BuildSet(a) => run_build_set(a, seed),
        Command::Spectrum(a) => run_spectrum(a),
        Command::SpectrumCompare(a) => run_compare(a),
        Command::Train(a) => run_train(a, seed),
        Command::Score(a) => run_score(a),
        Command::Fuse(a) => run_fuse(a),
        Command::Evaluate(a) => run_evaluate(a),
        Command::Det(a) => run_det(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new().filter_level(level).init();

    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(2);
        }
    }

    match std::panic::catch_unwind(|| dispatch(&cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_user_error() { 1 } else { 2 })
        }
        Err(_) => ExitCode::from(2),
    }
}
