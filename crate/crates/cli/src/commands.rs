//! Argument definitions and command implementations.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use cosenet::formatting::check_throughput;
use cosenet::merge::MergeConfig;
use cosenet::metrics::MetricReport;
use cosenet::pipeline::{evaluate, segment, PipelineConfig};
use cosenet::regressor::{load_model, save_model, train_ridge, RidgeModel, Split, TrainingMeta, TrainingSet};
use cosenet::scaling::ScalingParams;
use cosenet::synth::{generate_dataset, SynthSpec};
use cosenet::tuner::{tune, AlgoChoice, GaConfig, ModelBank, PsoConfig, TuningCandidate, TuningReport, THROUGHPUTS};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::formats::{
    format_dataset_file, format_matrix, read_dataset, read_matrix, split_path, to_json_text, write_text,
    SegmentationOutput, DATASET_MANIFEST, SPLITS,
};
use crate::manifest::{manifest_path, ManifestBuilder};

#[derive(Debug, Parser)]
#[command(name = "cosenet", version, about = "Segmentation of noisy correlation matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset (train/validation/test record files).
    Synth(SynthArgs),
    /// Train a ridge model on a dataset's train split.
    Train(TrainArgs),
    /// Segment one correlation matrix.
    Segment(SegmentArgs),
    /// Score a model through the full pipeline on one dataset split.
    Eval(EvalArgs),
    /// Tune scaling weights, threshold and throughput with GA and/or PSO.
    Tune(TuneArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long)]
    pub size: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub noise_mean: f64,
    #[arg(long)]
    pub noise_var: f64,
    #[arg(long)]
    pub groups_mean: f64,
    #[arg(long)]
    pub groups_var: f64,
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the first N test matrices as matrix files under `<out>/matrices/`.
    #[arg(long, default_value_t = 0)]
    pub export_matrices: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    /// Dataset directory written by `synth`.
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub throughput: usize,
    #[arg(long, default_value_t = cosenet::regressor::DEFAULT_LAMBDA)]
    pub lambda: f64,
    #[arg(long)]
    pub standardize: bool,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_scale(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected A,B,OMEGA, got {s:?}"));
    }
    let mut out = [0.0; 3];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|_| format!("cannot parse {p:?} as a number"))?;
    }
    Ok(out)
}

#[derive(Debug, Args, Serialize)]
pub struct PipelineArgs {
    /// Rescaling weights `A,B,OMEGA` (default: identity 1,0,0).
    #[arg(long, value_parser = parse_scale, value_name = "A,B,OMEGA")]
    pub scale: Option<[f64; 3]>,
    #[arg(long, default_value_t = cosenet::merge::DEFAULT_THRESHOLD)]
    pub threshold: f64,
}

impl PipelineArgs {
    fn config<'m>(&self, model: &'m RidgeModel) -> CliResult<PipelineConfig<'m>> {
        let scaling = match self.scale {
            Some([a, b, omega]) => ScalingParams::new(a, b, omega)?,
            None => ScalingParams::IDENTITY,
        };
        Ok(PipelineConfig::new(scaling, MergeConfig::new(self.threshold)?, model))
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SegmentArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Matrix file: comma-separated rows, `#` comment lines ignored.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Segmentation JSON to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the denoised block matrix in matrix-file format.
    #[arg(long)]
    pub emit_matrix: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Validation,
    Test,
}

impl SplitName {
    fn as_str(self) -> &'static str {
        SPLITS[self as usize]
    }
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub dataset: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long, value_enum, default_value_t = SplitName::Test)]
    pub split: SplitName,
    /// Metric report JSON to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgoArg {
    Ga,
    Pso,
    Both,
}

impl From<AlgoArg> for AlgoChoice {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Ga => AlgoChoice::Ga,
            AlgoArg::Pso => AlgoChoice::Pso,
            AlgoArg::Both => AlgoChoice::Both,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct TuneArgs {
    /// Model files, one per throughput (8, 16, 32); comma-separated or repeated.
    #[arg(long, required = true, num_args = 1.., value_delimiter = ',')]
    pub models: Vec<PathBuf>,
    /// Dataset directory; its validation split drives the fitness.
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_enum, default_value_t = AlgoArg::Both)]
    pub algo: AlgoArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tuning report JSON to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Best-candidate JSON (default: `<out stem>.best.json`).
    #[arg(long)]
    pub best: Option<PathBuf>,
    /// Use only the first N validation records.
    #[arg(long)]
    pub validation_limit: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub offspring: Option<usize>,
    #[arg(long)]
    pub particles: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
}

pub fn execute(cmd: &Command, out: &mut dyn Write) -> CliResult<()> {
    match cmd {
        Command::Synth(a) => synth(a, out),
        Command::Train(a) => train(a, out),
        Command::Segment(a) => segment_cmd(a, out),
        Command::Eval(a) => eval(a, out),
        Command::Tune(a) => tune_cmd(a, out),
    }
}

fn say(out: &mut dyn Write, text: &str) -> CliResult<()> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
}

fn synth(a: &SynthArgs, out: &mut dyn Write) -> CliResult<()> {
    let spec = SynthSpec::new(
        a.size,
        a.noise_mean,
        a.noise_var,
        a.groups_mean,
        a.groups_var,
        a.count,
        a.seed,
    );
    spec.validate()?;
    let mut manifest = ManifestBuilder::start("synth", spec, Some(a.seed));
    let data = generate_dataset(&spec)?;
    for (name, records) in SPLITS.iter().zip([&data.train, &data.validation, &data.test]) {
        let path = split_path(&a.out, name);
        write_text(&path, &format_dataset_file(records))?;
        manifest.output(&path);
    }
    for (i, rec) in data.test.iter().take(a.export_matrices).enumerate() {
        let path = a.out.join("matrices").join(format!("test-{i:05}.csv"));
        let bits: Vec<String> = rec.segmentation.to_u8().iter().map(u8::to_string).collect();
        let text = format!(
            "# segmentation: {}\n{}",
            bits.join(","),
            format_matrix(rec.matrix.values())
        );
        write_text(&path, &text)?;
        manifest.output(&path);
    }
    manifest.finish(&a.out.join(DATASET_MANIFEST))?;
    say(
        out,
        &format!(
            "wrote {} / {} / {} train/validation/test records of size {} to {}\n",
            data.train.len(),
            data.validation.len(),
            data.test.len(),
            a.size,
            a.out.display()
        ),
    )
}

fn metric_table(rows: &[(&str, MetricReport)]) -> String {
    let mut s = format!(
        "{:<11}{:>8}{:>12}{:>12}{:>12}{:>12}\n",
        "split", "n", "MSE", "MAE", "R2", "WD"
    );
    for (name, r) in rows {
        let r2 = r.r2.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6}"));
        writeln!(
            s,
            "{name:<11}{:>8}{:>12.6}{:>12.6}{:>12}{:>12.6}",
            r.n, r.mse, r.mae, r2, r.wd
        )
        .unwrap();
    }
    s
}

fn train(a: &TrainArgs, out: &mut dyn Write) -> CliResult<()> {
    check_throughput(a.throughput)?;
    let data = read_dataset(&a.dataset)?;
    if data.size != a.throughput {
        return Err(CliError::Validation(format!(
            "dataset matrices are {0}x{0} but --throughput is {1}; training needs matrices of exactly the throughput size",
            data.size, a.throughput
        )));
    }
    let mut manifest = ManifestBuilder::start("train", a, data.spec.map(|s| s.seed));
    for split in SPLITS {
        manifest.input(&split_path(&a.dataset, split));
    }
    let mut ts = TrainingSet::from_records(&data.train, a.throughput, Split::Train)?;
    if let Some(spec) = data.spec {
        ts.meta = TrainingMeta {
            samples: ts.len(),
            source_size: Some(spec.size),
            noise_mean: Some(spec.noise_mean),
            noise_var: Some(spec.noise_var),
            groups_mean: Some(spec.groups_mean),
            groups_var: Some(spec.groups_var),
            seed: Some(spec.seed),
        };
    }
    let model = train_ridge(&ts, a.lambda, a.standardize)?;
    save_model(&model, &a.out).map_err(|e| CliError::lib(&a.out, e))?;
    manifest.output(&a.out);

    let cfg = PipelineConfig::with_defaults(&model);
    let mut rows = vec![("train", evaluate(&data.train, &cfg)?)];
    if !data.test.is_empty() {
        rows.push(("test", evaluate(&data.test, &cfg)?));
    }
    manifest.finish(&manifest_path(&a.out))?;
    say(
        out,
        &format!(
            "trained T={} ridge (lambda {}) on {} windows\n",
            a.throughput,
            a.lambda,
            ts.len()
        ),
    )?;
    say(out, &metric_table(&rows))
}

fn load(path: &Path) -> CliResult<RidgeModel> {
    load_model(path).map_err(|e| CliError::lib(path, e))
}

fn segment_cmd(a: &SegmentArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut manifest = ManifestBuilder::start("segment", a, None);
    let model = load(&a.model)?;
    let matrix = read_matrix(&a.input)?;
    manifest.input(&a.model);
    manifest.input(&a.input);
    let result = segment(&matrix, &a.pipeline.config(&model)?)?;
    let doc = SegmentationOutput {
        segmentation: result.segmentation.to_u8(),
        group_starts: result.segmentation.group_starts(),
        probabilities: result.probabilities.into_vec(),
        size: matrix.size(),
    };
    write_text(&a.out, &to_json_text(&doc))?;
    manifest.output(&a.out);
    if let Some(path) = &a.emit_matrix {
        write_text(path, &format_matrix(result.denoised.view()))?;
        manifest.output(path);
    }
    manifest.finish(&manifest_path(&a.out))?;
    let bits: Vec<String> = doc.segmentation.iter().map(u8::to_string).collect();
    say(out, &format!("{} groups: {}\n", doc.group_starts.len(), bits.join(",")))
}

#[derive(Serialize)]
struct EvalOutput<'a> {
    model: &'a Path,
    dataset: &'a Path,
    split: SplitName,
    scale: [f64; 3],
    threshold: f64,
    report: MetricReport,
}

fn eval(a: &EvalArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut manifest = ManifestBuilder::start("eval", a, None);
    let model = load(&a.model)?;
    let data = read_dataset(&a.dataset)?;
    manifest.input(&a.model);
    manifest.input(&split_path(&a.dataset, a.split.as_str()));
    let cfg = a.pipeline.config(&model)?;
    let records = data.split(a.split.as_str());
    if records.is_empty() {
        return Err(CliError::Validation(format!("{} split is empty", a.split.as_str())));
    }
    let report = evaluate(records, &cfg)?;
    if let Some(path) = &a.out {
        let doc = EvalOutput {
            model: &a.model,
            dataset: &a.dataset,
            split: a.split,
            scale: [cfg.scaling.a, cfg.scaling.b, cfg.scaling.omega],
            threshold: cfg.merge.threshold,
            report,
        };
        write_text(path, &to_json_text(&doc))?;
        manifest.output(path);
        manifest.finish(&manifest_path(path))?;
    }
    say(out, &metric_table(&[(a.split.as_str(), report)]))
}

#[derive(Serialize)]
struct TuneOutput<'a> {
    algo: AlgoArg,
    seed: u64,
    validation_samples: usize,
    ga: Option<GaConfig>,
    pso: Option<PsoConfig>,
    #[serde(flatten)]
    report: &'a TuningReport,
}

/// Ranked table with the columns rank, algorithm, WD (%), A, B, ω, th, throughput.
pub fn ranking_table(ranking: &[TuningCandidate]) -> String {
    let mut s = format!(
        "{:>4}  {:<9}{:>9}{:>10}{:>10}{:>10}{:>10}{:>12}\n",
        "Rank", "Algorithm", "WD (%)", "A", "B", "omega", "th", "Throughput"
    );
    for (i, c) in ranking.iter().enumerate() {
        writeln!(
            s,
            "{:>4}  {:<9}{:>9.2}{:>10.5}{:>10.5}{:>10.5}{:>10.5}{:>12}",
            i + 1,
            c.algorithm.to_string(),
            c.fitness * 100.0,
            c.a,
            c.b,
            c.omega,
            c.threshold,
            c.throughput
        )
        .unwrap();
    }
    s
}

fn tune_cmd(a: &TuneArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut manifest = ManifestBuilder::start("tune", a, Some(a.seed));
    let mut bank = ModelBank::new();
    let mut sources: BTreeMap<usize, &Path> = BTreeMap::new();
    for path in &a.models {
        let model = load(path)?;
        let t = model.throughput();
        if !THROUGHPUTS.contains(&t) {
            return Err(CliError::Validation(format!(
                "{}: throughput {t} is not one of {THROUGHPUTS:?}",
                path.display()
            )));
        }
        if let Some(prev) = sources.insert(t, path) {
            return Err(CliError::Validation(format!(
                "{} and {} both have throughput {t}",
                prev.display(),
                path.display()
            )));
        }
        bank.insert(t, model);
        manifest.input(path);
    }
    let data = read_dataset(&a.dataset)?;
    manifest.input(&split_path(&a.dataset, "validation"));
    let mut validation = data.validation;
    if let Some(limit) = a.validation_limit {
        validation.truncate(limit);
    }
    if validation.is_empty() {
        return Err(CliError::Validation("validation split is empty".into()));
    }

    let defaults = GaConfig::default();
    let ga = GaConfig {
        epochs: a.epochs.unwrap_or(defaults.epochs),
        population: a.population.unwrap_or(defaults.population),
        offspring_per_epoch: a.offspring.unwrap_or(defaults.offspring_per_epoch),
        seed: a.seed,
        ..defaults
    };
    let pso_defaults = PsoConfig::default();
    let pso = PsoConfig {
        particles: a.particles.unwrap_or(pso_defaults.particles),
        iterations: a.iterations.unwrap_or(a.epochs.unwrap_or(pso_defaults.iterations)),
        seed: a.seed,
        ..pso_defaults
    };
    let report = tune(&bank, &validation, a.algo.into(), &ga, &pso)?;

    let uses_ga = !matches!(a.algo, AlgoArg::Pso);
    let uses_pso = !matches!(a.algo, AlgoArg::Ga);
    let doc = TuneOutput {
        algo: a.algo,
        seed: a.seed,
        validation_samples: validation.len(),
        ga: uses_ga.then_some(ga),
        pso: uses_pso.then_some(pso),
        report: &report,
    };
    write_text(&a.out, &to_json_text(&doc))?;
    manifest.output(&a.out);
    let best_path = a.best.clone().unwrap_or_else(|| a.out.with_extension("best.json"));
    write_text(&best_path, &to_json_text(&report.best))?;
    manifest.output(&best_path);
    manifest.finish(&manifest_path(&a.out))?;

    let mut text = ranking_table(&report.ranking);
    let b = &report.best;
    writeln!(
        text,
        "best: {} T={} A={} B={} omega={} th={} (validation WD {:.2}%)",
        b.algorithm,
        b.throughput,
        b.a,
        b.b,
        b.omega,
        b.threshold,
        b.fitness * 100.0
    )
    .unwrap();
    say(out, &text)
}
