//! The `pcx` command line.
//!
//! Exit codes: 0 success, 2 configuration or spec error, 3 data or IO error,
//! 4 evaluation-input error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pcx_core::expansion::{dataset_stats, CountMode, DatasetStats};
use pcx_core::metrics::evaluate;
use pcx_core::synthesis::{GeneratorSpec, ObjectBank, Shape};
use pcx_core::SemanticClass;

use crate::bank::{generate_into, load_bank};
use crate::config::{GeneratorEntry, PipelineConfig};
use crate::error::Error;
use crate::io::json::{from_slice, read_predictions, write_manifest, write_report, write_stats};
use crate::io::s3dis::import_s3dis_room;
use crate::io::{read_file, write_atomic};
use crate::pipeline::{expand_parallel, pool, read_scenes, worker_count, write_bundle_atomic, write_scenes};

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_EVAL_INPUT: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "pcx", version, about = "Point-cloud dataset expansion by object insertion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate procedural assets into a bank directory.
    Gen(GenArgs),
    /// Insert bank objects into every scene of a dataset.
    Expand(ExpandArgs),
    /// Summarize a dataset of scene bundles.
    Stats(StatsArgs),
    /// Score instance predictions against ground-truth bundles.
    Eval(EvalArgs),
    /// Convert an external scene format to a bundle.
    Convert(ConvertArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ShapeKind {
    Sphere,
    Box,
    Perlin,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Bank directory to write assets and `bank.json` into.
    #[arg(long)]
    pub out: PathBuf,
    /// Generate every entry of a pipeline configuration.
    #[arg(long, conflicts_with_all = ["spec", "shape"])]
    pub config: Option<PathBuf>,
    /// A single generator spec as JSON.
    #[arg(long, conflicts_with = "shape")]
    pub spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub shape: Option<ShapeKind>,
    #[arg(long)]
    pub class: Option<String>,
    #[arg(long)]
    pub prompt: Option<String>,
    #[arg(long, default_value_t = 1000)]
    pub n_points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Full box side lengths, `x,y,z`.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [1.0, 1.0, 1.0])]
    pub extents: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 1.0)]
    pub frequency: f64,
    #[arg(long, default_value_t = 4)]
    pub octaves: u32,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub scenes: Option<PathBuf>,
    /// Bank directories; replaces the configured list when given.
    #[arg(long)]
    pub bank: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to `<out>/manifest.json`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_per_scene: Option<u32>,
    /// Switches to exact-budget mode with this many insertions.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub dataset_id: Option<String>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub scenes: PathBuf,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SourceFormat {
    S3dis,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long, value_enum)]
    pub from: SourceFormat,
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Bundle directory to create.
    #[arg(long)]
    pub out: PathBuf,
}

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: Error,
}

trait Classify<T> {
    fn or_exit(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<Error>> Classify<T> for Result<T, E> {
    fn or_exit(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code,
            error: e.into(),
        })
    }
}

fn config_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        error: Error::Config(message.into()),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Errors are reported on standard error.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.error);
            f.code
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Gen(a) => gen(a, out),
        Command::Expand(a) => expand(a, out),
        Command::Stats(a) => stats(a, out),
        Command::Eval(a) => eval(a, out),
        Command::Convert(a) => convert(a, out),
    }
}

fn say(out: &mut dyn Write, line: &str) -> Result<(), Failure> {
    writeln!(out, "{line}").map_err(Error::io("<stdout>")).or_exit(EXIT_DATA)
}

fn gen_entries(a: &GenArgs) -> Result<Vec<GeneratorEntry>, Failure> {
    if let Some(path) = &a.config {
        let config = PipelineConfig::load(path).or_exit(EXIT_CONFIG)?;
        if config.generators.is_empty() {
            return Err(config_error(format!("{} lists no generators", path.display())));
        }
        return Ok(config.generators);
    }
    let class = a
        .class
        .as_deref()
        .ok_or_else(|| config_error("--class is required with --spec or --shape"))?;
    let class = SemanticClass::new(class).or_exit(EXIT_CONFIG)?;
    let spec: GeneratorSpec = if let Some(path) = &a.spec {
        let bytes = read_file(path).or_exit(EXIT_CONFIG)?;
        from_slice(&bytes).or_exit(EXIT_CONFIG)?
    } else {
        let shape = match a.shape.ok_or_else(|| config_error("one of --config, --spec or --shape is required"))? {
            ShapeKind::Sphere => Shape::SphereSurface { radius: a.radius },
            ShapeKind::Box => Shape::BoxSurface {
                extents: [a.extents[0], a.extents[1], a.extents[2]],
            },
            ShapeKind::Perlin => Shape::PerlinBlob {
                radius: a.radius,
                amplitude: a.amplitude,
                frequency: a.frequency,
                octaves: a.octaves,
            },
        };
        GeneratorSpec {
            n_points: a.n_points,
            seed: a.seed,
            shape,
        }
    };
    spec.validate().or_exit(EXIT_CONFIG)?;
    Ok(vec![GeneratorEntry {
        class,
        prompt: a.prompt.clone(),
        spec,
    }])
}

fn gen(a: GenArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let entries = gen_entries(&a)?;
    let added = generate_into(&a.out, &entries).or_exit(EXIT_DATA)?;
    for e in &added {
        log::info!("generated {} ({})", e.file, e.class);
    }
    say(out, &format!("generated={} bank={}", added.len(), a.out.display()))
}

fn expand(a: ExpandArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let mut config = match &a.config {
        Some(path) => PipelineConfig::load(path).or_exit(EXIT_CONFIG)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = a.seed {
        config.expansion.master_seed = s;
    }
    if let Some(m) = a.max_per_scene {
        config.expansion.max_per_scene = m;
    }
    if let Some(b) = a.budget {
        config.expansion.count_mode = CountMode::ExactBudget { budget: b };
    }
    if let Some(id) = a.dataset_id {
        config.dataset_id = id;
    }
    if !a.bank.is_empty() {
        config.bank.dirs = a.bank;
    }
    config.validate().or_exit(EXIT_CONFIG)?;
    let scenes_dir = a
        .scenes
        .or(config.scenes_dir)
        .ok_or_else(|| config_error("no scenes directory (--scenes or scenes_dir)"))?;
    let out_dir = a
        .out
        .or(config.out_dir)
        .ok_or_else(|| config_error("no output directory (--out or out_dir)"))?;
    let manifest_path = a
        .manifest
        .or(config.manifest)
        .unwrap_or_else(|| out_dir.join("manifest.json"));
    let workers = worker_count(a.workers).or_exit(EXIT_CONFIG)?;
    let pool = pool(workers).or_exit(EXIT_CONFIG)?;
    log::info!("expanding with {workers} workers");

    let bank = if config.bank.dirs.is_empty() {
        ObjectBank::new(Vec::new(), config.bank.mix).or_exit(EXIT_CONFIG)?
    } else {
        load_bank(&config.bank.dirs, config.bank.mix).or_exit(EXIT_DATA)?
    };
    let scenes = read_scenes(&scenes_dir, &pool).or_exit(EXIT_DATA)?;
    let (expanded, manifest) = expand_parallel(&config.dataset_id, &scenes, &bank, &config.expansion, &pool)
        .map_err(|error| {
            let code = match error {
                Error::Core(pcx_core::Error::InfeasibleBudget { .. } | pcx_core::Error::InvalidConfig(_)) => EXIT_CONFIG,
                _ => EXIT_DATA,
            };
            Failure { code, error }
        })?;
    let manifest_bytes = write_manifest(&manifest).or_exit(EXIT_DATA)?;

    write_scenes(&expanded, &out_dir, &pool).or_exit(EXIT_DATA)?;
    write_atomic(&manifest_path, &manifest_bytes).or_exit(EXIT_DATA)?;
    let t = &manifest.totals;
    say(
        out,
        &format!(
            "scenes={} before={} after={} added={}",
            t.scenes, t.instances_before, t.instances_after, t.instances_added
        ),
    )
}

pub fn format_stats(s: &DatasetStats) -> String {
    let mut text = format!(
        "scenes     {}\ninstances  {}\npoints     {}\nper scene  min {} / mean {:.3} / max {}\n",
        s.scenes, s.total_instances, s.total_points, s.min_instances, s.mean_instances, s.max_instances
    );
    if !s.per_class.is_empty() {
        let width = s.per_class.keys().map(String::len).max().unwrap_or(0).max(5);
        text.push_str(&format!("{:<width$}  instances\n", "class"));
        for (class, n) in &s.per_class {
            text.push_str(&format!("{class:<width$}  {n}\n"));
        }
    }
    text
}

fn stats(a: StatsArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let pool = pool(worker_count(None).or_exit(EXIT_CONFIG)?).or_exit(EXIT_CONFIG)?;
    let scenes = read_scenes(&a.scenes, &pool).or_exit(EXIT_DATA)?;
    let s = dataset_stats(&scenes);
    if let Some(path) = &a.json {
        write_atomic(path, &write_stats(&s).or_exit(EXIT_DATA)?).or_exit(EXIT_DATA)?;
    }
    write!(out, "{}", format_stats(&s)).map_err(Error::io("<stdout>")).or_exit(EXIT_DATA)
}

fn eval(a: EvalArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let pool = pool(worker_count(None).or_exit(EXIT_CONFIG)?).or_exit(EXIT_CONFIG)?;
    let scenes = read_scenes(&a.gt, &pool).or_exit(EXIT_DATA)?;
    let preds = read_file(&a.pred)
        .and_then(|b| read_predictions(&b))
        .or_exit(EXIT_EVAL_INPUT)?;
    let report = evaluate(&preds, &scenes).or_exit(EXIT_EVAL_INPUT)?;
    for class in &report.excluded_classes {
        log::warn!("class {class} has predictions but no ground truth; excluded from means");
    }
    if let Some(path) = &a.report {
        write_atomic(path, &write_report(&report).or_exit(EXIT_DATA)?).or_exit(EXIT_DATA)?;
    }
    say(
        out,
        &format!("AP={:.4} AP50={:.4} AP25={:.4}", report.ap, report.ap50, report.ap25),
    )
}

fn convert(a: ConvertArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let scene = match a.from {
        SourceFormat::S3dis => import_s3dis_room(&a.input).or_exit(EXIT_DATA)?,
    };
    write_bundle_atomic(&scene, &a.out).or_exit(EXIT_DATA)?;
    say(
        out,
        &format!("scene={} points={} instances={}", scene.scene_id, scene.cloud.len(), scene.instance_count()),
    )
}
