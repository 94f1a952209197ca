//! Command-line front end: `gen-data`, `fit`, `eval` and `kernel`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::{KernelKind, ModeKind, RunConfig};
use crate::dataset::{generate_gaussian_stages, generate_quantum_labeled, Dataset};
use crate::error::{Error, Result};
use crate::featuremap::{Entanglement, FeatureBounds, FeatureMapSpec, PhiFamily};
use crate::kernel::{default_rbf_gamma, gram, KernelMode, KernelSpec};
use crate::pipeline::{self, ModelBundle};

#[derive(Debug, Parser)]
#[command(name = "qkernel", version, about = "Quantum-kernel SVM classification on simulated feature maps")]
pub struct Cli {
    /// Flat TOML config file; command-line flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Seed for data generation, splitting and shot sampling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic labeled dataset.
    GenData(GenDataArgs),
    /// Fit PCA, rescaling and a one-vs-one kernel SVM; write a model bundle.
    Fit(FitArgs),
    /// Evaluate a bundle on a labeled dataset and write reports.
    Eval(EvalArgs),
    /// Compute the Gram matrix of a dataset.
    Kernel(KernelArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Generator {
    /// Six Gaussian clusters centred on a scaled regular simplex.
    Gaussian,
    /// Binary labels from fidelities to two random anchor states.
    Quantum,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    pub generator: Generator,
    /// Samples per class (gaussian).
    #[arg(long, default_value_t = 30)]
    pub per_class: usize,
    /// Feature dimension (gaussian, at least 5).
    #[arg(long, default_value_t = 16)]
    pub dim: usize,
    /// Distance of each class mean from the origin (gaussian).
    #[arg(long, default_value_t = 3.0)]
    pub sep: f64,
    /// Total samples (quantum).
    #[arg(long, default_value_t = 300)]
    pub count: usize,
    /// Qubits of the labeling feature map (quantum).
    #[arg(long, default_value_t = 4)]
    pub qubits: usize,
    /// Minimum fidelity gap between anchors (quantum).
    #[arg(long, default_value_t = 0.1)]
    pub margin: f64,
    #[command(flatten)]
    pub map: MapFlags,
    /// Output CSV path; metadata goes to `<out>.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Training CSV (or full dataset when `--test-out` is given).
    #[arg(long)]
    pub data: PathBuf,
    /// Bundle output path.
    #[arg(long)]
    pub out: PathBuf,
    /// Hold out a stratified test split and write it here.
    #[arg(long)]
    pub test_out: Option<PathBuf>,
    #[command(flatten)]
    pub flags: ConfigFlags,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Directory for `confusion_counts.csv`, `confusion_percent.csv` and `metrics.json`.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Gram CSV output; metadata goes to `<out>.json`.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub flags: ConfigFlags,
}

/// Feature-map flags shared by `gen-data` and the config-driven commands.
#[derive(Debug, Default, Args)]
pub struct MapFlags {
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub entanglement: Option<Entanglement>,
    #[arg(long)]
    pub phi: Option<PhiFamily>,
    /// Encoder input interval, e.g. `--feature-range 0 3.14159`.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub feature_range: Option<Vec<f64>>,
}

/// One flag per config-file key.
#[derive(Debug, Default, Args)]
pub struct ConfigFlags {
    #[arg(long)]
    pub kernel: Option<KernelKind>,
    #[command(flatten)]
    pub map: MapFlags,
    #[arg(long)]
    pub qubits: Option<usize>,
    /// PCA output dimension, 0 disables PCA.
    #[arg(long)]
    pub pca_dim: Option<usize>,
    /// Number of trailing columns appended after PCA.
    #[arg(long)]
    pub demographics: Option<usize>,
    #[arg(long)]
    pub rescale: Option<bool>,
    #[arg(long)]
    pub mode: Option<ModeKind>,
    #[arg(long)]
    pub shots: Option<u64>,
    /// SVM box constraint.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_passes: Option<usize>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
}

impl clap::ValueEnum for KernelKind {
    fn value_variants<'a>() -> &'a [Self] {
        &[KernelKind::Quantum, KernelKind::Rbf]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            KernelKind::Quantum => "quantum",
            KernelKind::Rbf => "rbf",
        }))
    }
}

impl clap::ValueEnum for ModeKind {
    fn value_variants<'a>() -> &'a [Self] {
        &[ModeKind::Exact, ModeKind::Shots]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            ModeKind::Exact => "exact",
            ModeKind::Shots => "shots",
        }))
    }
}

impl MapFlags {
    fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        if let Some(v) = self.reps {
            cfg.reps = v;
        }
        if let Some(v) = self.entanglement {
            cfg.entanglement = v;
        }
        if let Some(v) = self.phi {
            cfg.phi = v;
        }
        if let Some(v) = &self.feature_range {
            cfg.feature_range = <[f64; 2]>::try_from(v.as_slice())
                .map_err(|_| Error::config("--feature-range takes two values"))?;
        }
        Ok(())
    }
}

impl ConfigFlags {
    fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        self.map.apply(cfg)?;
        if let Some(v) = self.kernel {
            cfg.kernel = v;
        }
        if self.qubits.is_some() {
            cfg.qubits = self.qubits;
        }
        if let Some(v) = self.pca_dim {
            cfg.pca_dim = v;
        }
        if let Some(v) = self.demographics {
            cfg.demographics = v;
        }
        if let Some(v) = self.rescale {
            cfg.rescale = v;
        }
        if let Some(v) = self.mode {
            cfg.mode = v;
        }
        if let Some(v) = self.shots {
            cfg.shots = v;
        }
        if let Some(v) = self.c {
            cfg.c = v;
        }
        if let Some(v) = self.tol {
            cfg.tol = v;
        }
        if let Some(v) = self.max_passes {
            cfg.max_passes = v;
        }
        if self.gamma.is_some() {
            cfg.gamma = self.gamma;
        }
        if let Some(v) = self.test_fraction {
            cfg.test_fraction = v;
        }
        Ok(())
    }
}

/// Metadata written next to every dataset CSV as `<csv>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSidecar {
    pub generator_id: String,
    pub seed: u64,
    pub params: serde_json::Value,
    pub class_names: Vec<String>,
    pub rows: usize,
    pub checksum: String,
}

/// Metadata written next to a Gram CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramSidecar {
    pub kernel_id: String,
    pub mode: String,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub size: usize,
    pub checksum: String,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Tracks files written by a command so they can be removed on failure.
#[derive(Default)]
struct Outputs {
    written: Vec<PathBuf>,
}

impl Outputs {
    fn write(&mut self, path: &Path, contents: &str) -> Result<()> {
        self.written.push(path.to_path_buf());
        std::fs::write(path, contents).map_err(|e| Error::io(path, e))
    }

    fn write_json<T: Serialize>(&mut self, path: &Path, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(path, &text)
    }

    fn discard(self) {
        for path in self.written {
            let _ = std::fs::remove_file(path);
        }
    }
}

fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(threads) = cli.threads {
        cfg.threads = threads;
    }
    Ok(cfg)
}

/// Loads a dataset CSV, taking class names from its sidecar when present.
pub fn load_dataset(path: &Path, class_names: Option<Vec<String>>) -> Result<Dataset> {
    let names = match class_names {
        Some(names) => Some(names),
        None => {
            let meta = sidecar_path(path);
            if meta.exists() {
                let text = std::fs::read_to_string(&meta).map_err(|e| Error::io(&meta, e))?;
                let sidecar: DatasetSidecar = serde_json::from_str(&text)?;
                Some(sidecar.class_names)
            } else {
                None
            }
        }
    };
    Dataset::read_csv(path, names)
}

fn write_dataset(
    out: &mut Outputs,
    path: &Path,
    data: &Dataset,
    generator_id: &str,
    seed: u64,
    params: serde_json::Value,
) -> Result<()> {
    out.write(path, &data.to_csv_string())?;
    let sidecar = DatasetSidecar {
        generator_id: generator_id.to_string(),
        seed,
        params,
        class_names: data.class_names().to_vec(),
        rows: data.len(),
        checksum: data.checksum(),
    };
    out.write_json(&sidecar_path(path), &sidecar)
}

/// Runs a parsed command line. Output files are removed if any step fails.
pub fn run(cli: &Cli) -> Result<()> {
    let cfg = resolve_config(cli).map_err(|e| e.in_stage("config"))?;
    if cfg.threads > 0 {
        // Fails only if a pool already exists, e.g. when called twice in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    let mut out = Outputs::default();
    let result = match &cli.command {
        Command::GenData(args) => gen_data(args, cfg, &mut out),
        Command::Fit(args) => fit(args, cfg, &mut out),
        Command::Eval(args) => eval(args, &mut out),
        Command::Kernel(args) => kernel(args, cfg, &mut out),
    };
    if result.is_err() {
        out.discard();
    }
    result
}

fn gen_data(args: &GenDataArgs, mut cfg: RunConfig, out: &mut Outputs) -> Result<()> {
    args.map.apply(&mut cfg).map_err(|e| e.in_stage("config"))?;
    let seed = cfg.seed;
    let (data, generator_id, params) = match args.generator {
        Generator::Gaussian => {
            let data = generate_gaussian_stages(seed, args.per_class, args.dim, args.sep);
            let params = json!({ "per_class": args.per_class, "dim": args.dim, "sep": args.sep });
            (data, crate::dataset::GAUSSIAN_GENERATOR, params)
        }
        Generator::Quantum => {
            let spec =
                FeatureMapSpec::new(args.qubits, cfg.reps, cfg.entanglement, cfg.phi, cfg.feature_range)
                    .map_err(|e| e.in_stage("config"))?;
            let data = generate_quantum_labeled(seed, args.count, &spec, args.margin);
            let params = json!({ "count": args.count, "margin": args.margin, "feature_map": spec });
            (data, crate::dataset::QUANTUM_GENERATOR, params)
        }
    };
    let data = data.map_err(|e| e.in_stage("generate"))?;
    write_dataset(out, &args.out, &data, generator_id, seed, params).map_err(|e| e.in_stage("write"))?;
    println!("wrote {} rows ({} classes) to {}", data.len(), data.num_classes(), args.out.display());
    Ok(())
}

fn fit(args: &FitArgs, mut cfg: RunConfig, out: &mut Outputs) -> Result<()> {
    args.flags.apply(&mut cfg).map_err(|e| e.in_stage("config"))?;
    cfg.validate().map_err(|e| e.in_stage("config"))?;
    let data = load_dataset(&args.data, None).map_err(|e| e.in_stage("load"))?;
    let train = match &args.test_out {
        Some(test_path) => {
            let (train, test) = data.split(cfg.test_fraction, cfg.seed).map_err(|e| e.in_stage("split"))?;
            let params = json!({ "test_fraction": cfg.test_fraction, "source_checksum": data.checksum() });
            write_dataset(out, test_path, &test, "stratified-split", cfg.seed, params)
                .map_err(|e| e.in_stage("write"))?;
            train
        }
        None => data,
    };
    let bundle = pipeline::fit(&train, &cfg)?;
    let mut text = bundle.to_json().map_err(|e| e.in_stage("write"))?;
    text.push('\n');
    out.write(&args.out, &text).map_err(|e| e.in_stage("write"))?;
    println!(
        "fitted {} on {} samples ({} classes, jitter {:.2e}); bundle written to {}",
        bundle.svm.kernel_id(),
        train.len(),
        bundle.class_names.len(),
        bundle.svm.jitter(),
        args.out.display()
    );
    Ok(())
}

fn eval(args: &EvalArgs, out: &mut Outputs) -> Result<()> {
    let text =
        std::fs::read_to_string(&args.bundle).map_err(|e| Error::io(&args.bundle, e).in_stage("load"))?;
    let bundle = ModelBundle::from_json(&text).map_err(|e| e.in_stage("load"))?;
    let test = load_dataset(&args.data, Some(bundle.class_names.clone())).map_err(|e| e.in_stage("load"))?;
    let evaluation = pipeline::evaluate(&bundle, &test)?;

    std::fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e).in_stage("write"))?;
    let write = |out: &mut Outputs| -> Result<()> {
        out.write(&args.out_dir.join("confusion_counts.csv"), &evaluation.confusion.counts_csv())?;
        out.write(&args.out_dir.join("confusion_percent.csv"), &evaluation.confusion.percent_csv())?;
        out.write_json(&args.out_dir.join("metrics.json"), &evaluation.metrics)
    };
    write(out).map_err(|e| e.in_stage("write"))?;

    let m = &evaluation.metrics;
    println!("accuracy: {:.4}", m.accuracy);
    match m.macro_f1 {
        Some(f1) => println!("macro-F1: {f1:.4}"),
        None => println!("macro-F1: undefined"),
    }
    Ok(())
}

fn kernel(args: &KernelArgs, mut cfg: RunConfig, out: &mut Outputs) -> Result<()> {
    args.flags.apply(&mut cfg).map_err(|e| e.in_stage("config"))?;
    cfg.validate().map_err(|e| e.in_stage("config"))?;
    let data = load_dataset(&args.data, None).map_err(|e| e.in_stage("load"))?;
    let rows = if cfg.rescale {
        let bounds = FeatureBounds::from_rows(data.features()).map_err(|e| e.in_stage("preprocess"))?;
        data.features()
            .iter()
            .map(|r| bounds.rescale(r, cfg.feature_range))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.in_stage("preprocess"))?
    } else {
        data.features().to_vec()
    };
    let spec = match cfg.kernel {
        KernelKind::Quantum => {
            if let Some(q) = cfg.qubits {
                if q != data.dim() {
                    return Err(Error::config(format!("qubits = {q} but data has {} columns", data.dim()))
                        .in_stage("config"));
                }
            }
            KernelSpec::quantum(cfg.feature_map(data.dim()).map_err(|e| e.in_stage("config"))?)
        }
        KernelKind::Rbf => {
            let gamma = match cfg.gamma {
                Some(g) => Ok(g),
                None => default_rbf_gamma(&rows),
            };
            KernelSpec::rbf(gamma.map_err(|e| e.in_stage("kernel"))?).map_err(|e| e.in_stage("config"))?
        }
    };
    let mode = cfg.kernel_mode();
    let gram = gram(&spec, &rows, mode).map_err(|e| e.in_stage("kernel"))?;

    let mut csv = String::new();
    for i in 0..gram.size() {
        let line: Vec<String> = gram.row(i).iter().map(|v| v.to_string()).collect();
        csv.push_str(&line.join(","));
        csv.push('\n');
    }
    let (mode_name, shots, seed) = match mode {
        KernelMode::Exact => ("exact", None, None),
        KernelMode::Shots { shots, seed } => ("shots", Some(shots), Some(seed)),
    };
    let sidecar = GramSidecar {
        kernel_id: spec.kernel_id(),
        mode: mode_name.to_string(),
        shots,
        seed,
        size: gram.size(),
        checksum: hex::encode(Sha256::digest(csv.as_bytes())),
    };
    let write = |out: &mut Outputs| -> Result<()> {
        out.write(&args.out, &csv)?;
        out.write_json(&sidecar_path(&args.out), &sidecar)
    };
    write(out).map_err(|e| e.in_stage("write"))?;
    println!("wrote {0}x{0} Gram matrix ({1}) to {2}", gram.size(), sidecar.kernel_id, args.out.display());
    Ok(())
}
