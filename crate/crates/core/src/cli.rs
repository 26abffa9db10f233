//! `rfselect` command line: `synth`, `select`, `classify`.
//!
//! Exit codes: 0 on success, 1 on data or validation errors, 2 on usage errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{RunConfig, SYNTH_K, SYNTH_LAMBDA1};
use crate::error::{Error, Result};
use crate::io::{load_image, Manifest};
use crate::pipeline::{
    classify_queries, load_category, pools_from_selections, select_category, SelectionFile, SELECT_LAMBDA1,
};
use crate::synth::{self, DemoParams};

#[derive(Debug, Parser)]
#[command(name = "rfselect", version, about = "Collaborative receptive-field selection")]
pub struct Cli {
    /// Flat `key = value` config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the three-cluster synthetic demo.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Select receptive fields for one or more categories of a manifest.
    Select {
        #[arg(long)]
        manifest: PathBuf,
        /// Category to process; repeat for several. Defaults to all.
        #[arg(long)]
        category: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Classify the manifest's queries against selected receptive fields.
    Classify {
        #[arg(long)]
        manifest: PathBuf,
        /// `selection.json` written by `select`.
        #[arg(long)]
        selections: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Debug, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub lambda2: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub sigma_c: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub knn_k: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub m_keep: Option<u64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub d_empty: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated window scales.
    #[arg(long, value_delimiter = ',')]
    pub scales: Option<Vec<f64>>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub anchors: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub per_cluster: Option<u64>,
    #[arg(long)]
    pub std: Option<f64>,
    #[arg(long)]
    pub gain_trace: Option<bool>,
    #[arg(long)]
    pub kd_tree: Option<bool>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = self.$field.clone() { cfg.$field = v; } )* };
        }
        set!(tau, lambda2, sigma, sigma_c, d_empty, seed, scales, std, gain_trace, kd_tree);
        if self.lambda1.is_some() {
            cfg.lambda1 = self.lambda1;
        }
        if self.eps.is_some() {
            cfg.eps = self.eps;
        }
        if let Some(k) = self.k {
            cfg.k = Some(k as usize);
        }
        if let Some(k) = self.knn_k {
            cfg.knn_k = Some(k as usize);
        }
        if let Some(m) = self.m_keep {
            cfg.m_keep = m as usize;
        }
        if let Some(a) = self.anchors {
            cfg.anchors = a as usize;
        }
        if let Some(p) = self.per_cluster {
            cfg.per_cluster = p as usize;
        }
    }
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

fn resolve_config(file: Option<&Path>, overrides: &Overrides) -> std::result::Result<RunConfig, Failure> {
    let mut cfg = match file {
        Some(p) => RunConfig::load(p).map_err(|e| Failure::Usage(e.to_string()))?,
        None => RunConfig::default(),
    };
    overrides.apply(&mut cfg);
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write(path, text)
}

fn prepare_out(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

#[derive(Serialize)]
struct SynthPick {
    rank: usize,
    point_id: usize,
    cluster: usize,
    x: f64,
    y: f64,
    gain: f64,
    objective: f64,
}

#[derive(Serialize)]
struct SynthRecord {
    seed: u64,
    num_points: usize,
    k: usize,
    evaluations: usize,
    selected: Vec<SynthPick>,
}

/// Writes `points.csv`, `selection.json`, `gain_trace.csv` and `config.toml`.
pub fn cmd_synth(cfg: &RunConfig, out: &Path) -> Result<()> {
    let mut cfg = cfg.clone();
    cfg.lambda1 = Some(cfg.lambda1.unwrap_or(SYNTH_LAMBDA1));
    cfg.k = Some(cfg.k.unwrap_or(SYNTH_K));
    cfg.validate()?;
    let instance = synth::generate(cfg.seed, cfg.per_cluster, cfg.std)?;
    let params = DemoParams {
        k: cfg.k.unwrap(),
        tau: cfg.tau,
        lambda1: cfg.lambda1.unwrap(),
        sigma: cfg.sigma,
        gain_field: cfg.gain_trace,
    };
    let demo = synth::run_demo(&instance, &params)?;
    let sel = &demo.selection;
    let record = SynthRecord {
        seed: cfg.seed,
        num_points: instance.len(),
        k: params.k,
        evaluations: sel.evaluations,
        selected: sel
            .chosen
            .iter()
            .enumerate()
            .map(|(rank, &p)| SynthPick {
                rank,
                point_id: p,
                cluster: instance.clusters.group_of(p),
                x: instance.points[p].0,
                y: instance.points[p].1,
                gain: sel.gains[rank],
                objective: sel.objective_trace[rank],
            })
            .collect(),
    };
    prepare_out(out)?;
    write(&out.join("points.csv"), synth::points_csv(&instance))?;
    write_json(&out.join("selection.json"), &record)?;
    if let Some(rows) = &demo.gain_field {
        write(&out.join("gain_trace.csv"), synth::gain_trace_csv(&instance, rows))?;
    }
    write(&out.join("config.toml"), cfg.to_toml_string())
}

/// Writes `selection.json` and `config.toml`.
pub fn cmd_select(cfg: &RunConfig, manifest: &Manifest, categories: &[String], out: &Path) -> Result<SelectionFile> {
    let mut cfg = cfg.clone();
    cfg.lambda1 = Some(cfg.lambda1.unwrap_or(SELECT_LAMBDA1));
    let names: Vec<String> = if categories.is_empty() {
        manifest.categories.iter().map(|c| c.name.clone()).collect()
    } else {
        categories.to_vec()
    };
    if names.is_empty() {
        return Err(Error::Manifest("manifest lists no categories".into()));
    }
    let mut file = SelectionFile::default();
    for name in &names {
        let images = load_category(manifest, name)?;
        file.categories.push(select_category(name, &images, &cfg)?.selection);
    }
    prepare_out(out)?;
    write_json(&out.join("selection.json"), &file)?;
    write(&out.join("config.toml"), cfg.to_toml_string())?;
    Ok(file)
}

#[derive(Serialize)]
struct ClassifySummary {
    queries: usize,
    labeled: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    accuracy: Option<f64>,
}

/// Writes `predictions.jsonl`, `summary.json` and `config.toml`.
pub fn cmd_classify(cfg: &RunConfig, manifest: &Manifest, selections: &SelectionFile, out: &Path) -> Result<()> {
    let mut categories = Vec::with_capacity(selections.categories.len());
    for sel in &selections.categories {
        categories.push((sel.category.clone(), load_category(manifest, &sel.category)?));
    }
    let pools = pools_from_selections(&categories, selections)?;
    let queries = manifest.queries.iter().map(load_image).collect::<Result<Vec<_>>>()?;
    let labels: Vec<Option<String>> = manifest.queries.iter().map(|q| q.label.clone()).collect();
    let result = classify_queries(&pools, &queries, &labels, cfg)?;

    let mut lines = String::new();
    for p in &result.predictions {
        lines.push_str(&serde_json::to_string(p).expect("serializable"));
        lines.push('\n');
    }
    prepare_out(out)?;
    write(&out.join("predictions.jsonl"), lines)?;
    let summary =
        ClassifySummary { queries: result.predictions.len(), labeled: result.labeled, accuracy: result.accuracy };
    write_json(&out.join("summary.json"), &summary)?;
    write(&out.join("config.toml"), cfg.to_toml_string())
}

fn read_selections(path: &Path) -> Result<SelectionFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        msg: e.to_string(),
    })
}

fn dispatch(cli: &Cli) -> std::result::Result<(), Failure> {
    match &cli.command {
        Command::Synth { out, overrides } => {
            let cfg = resolve_config(cli.config.as_deref(), overrides)?;
            cmd_synth(&cfg, out)?;
        }
        Command::Select { manifest, category, out, overrides } => {
            let cfg = resolve_config(cli.config.as_deref(), overrides)?;
            let manifest = Manifest::load(manifest)?;
            cmd_select(&cfg, &manifest, category, out)?;
        }
        Command::Classify { manifest, selections, out, overrides } => {
            let cfg = resolve_config(cli.config.as_deref(), overrides)?;
            let manifest = Manifest::load(manifest)?;
            let selections = read_selections(selections)?;
            cmd_classify(&cfg, &manifest, &selections, out)?;
        }
    }
    Ok(())
}

/// Parses `std::env::args` and runs the requested command.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
