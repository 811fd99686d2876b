use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use cidnet::datasets::{self, summary_stats, DATASETS};
use cidnet::error::{Error, Result};
use cidnet::estimation::{fit, FitResult, McmcConfig, ModelSpec, Priors};
use cidnet::graph::{degrees, parse_edge_list, Network, ParseOptions};
use cidnet::models::{sample_network, LinkKind, ModelParams, ModelTag};
use cidnet::sampling::{child_seed, seeded};
use cidnet::scv::{run_experiment_with_jobs, PredictionMode, ScvConfig, ScvReport};

/// Network models, MCMC fits and stratified-sampling cross-validation.
#[derive(Parser, Debug)]
#[command(name = "cidnet", version)]
struct Cli {
    /// Master random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory holding manifest.txt and the bundled edge lists.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    /// Where output files are written.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Maximum number of concurrent SCV iterations.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// key=value file supplying defaults for any long flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print nodes, edges, density and reciprocity.
    Stats {
        /// Dataset names or edge-list paths; all bundled datasets if empty.
        networks: Vec<String>,
        #[command(flatten)]
        source: SourceArgs,
    },
    /// Run stratified-sampling cross-validation for one or more models.
    Scv {
        network: String,
        /// Model spec such as `er`, `sbm:3`, `sr`, `lsm:2:logistic`; repeatable.
        #[arg(long = "model", short)]
        models: Vec<String>,
        #[arg(long)]
        fraction: Option<f64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        iterations: Option<usize>,
        /// `stratified`, `naive` or `latin:K`.
        #[arg(long)]
        sampler: Option<String>,
        /// `bernoulli` or `expected`.
        #[arg(long)]
        prediction: Option<String>,
        #[command(flatten)]
        mcmc: McmcArgs,
        #[command(flatten)]
        source: SourceArgs,
    },
    /// Fit one model and export its parameters.
    Fit {
        network: String,
        /// `er`, `sbm`, `sr` or `lsm`, optionally with `:k` / `:d` / `:link`.
        model: String,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        /// `probit` or `logistic`.
        #[arg(long)]
        link: Option<String>,
        #[command(flatten)]
        mcmc: McmcArgs,
        #[command(flatten)]
        source: SourceArgs,
    },
    /// Sample networks from model parameters or a saved fit.
    Generate {
        /// JSON file holding model parameters or a fit result.
        params: PathBuf,
        #[arg(long)]
        count: Option<usize>,
        /// Node count; required for ER parameters.
        #[arg(long)]
        nodes: Option<usize>,
        /// Network whose density and reciprocity samples are compared with.
        #[arg(long)]
        compare: Option<String>,
        #[command(flatten)]
        source: SourceArgs,
    },
}

#[derive(Args, Debug, Default)]
struct SourceArgs {
    /// Treat an edge-list path as directed.
    #[arg(long)]
    directed: bool,
}

#[derive(Args, Debug, Default)]
struct McmcArgs {
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    metropolis_step: Option<f64>,
    #[arg(long)]
    coefficient_step: Option<f64>,
}

/// Values from the config file, consumed as flags fall back to them.
struct FileConfig(HashMap<String, String>);

const CONFIG_KEYS: &[&str] = &[
    "seed",
    "data_dir",
    "output_dir",
    "jobs",
    "models",
    "fraction",
    "trials",
    "iterations",
    "sampler",
    "prediction",
    "burn_in",
    "draws",
    "thin",
    "metropolis_step",
    "coefficient_step",
    "k",
    "d",
    "link",
    "count",
    "nodes",
];

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        let mut map = HashMap::new();
        let Some(path) = path else {
            return Ok(FileConfig(map));
        };
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("{}:{}: expected key=value", path.display(), idx + 1)))?;
            let key = key.trim().replace('-', "_");
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!("{}:{}: unknown key `{key}`", path.display(), idx + 1)));
            }
            map.insert(key, value.trim().to_string());
        }
        Ok(FileConfig(map))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.0
            .get(key)
            .map(|v| v.parse().map_err(|_| Error::Config(format!("invalid value `{v}` for `{key}`"))))
            .transpose()
    }

    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}

struct Context {
    seed: u64,
    data_dir: PathBuf,
    output_dir: PathBuf,
    jobs: usize,
    file: FileConfig,
}

impl Context {
    fn network(&self, spec: &str, source: &SourceArgs) -> Result<(String, Network)> {
        if datasets::descriptor(spec).is_ok() {
            return Ok((spec.to_string(), datasets::load_bundled_from(&self.data_dir, spec)?));
        }
        let path = Path::new(spec);
        if !path.is_file() {
            return Err(Error::UnknownDataset(spec.to_string()));
        }
        let text = fs::read_to_string(path)?;
        let net = parse_edge_list(&text, &ParseOptions::directed(source.directed))?;
        let name = path.file_stem().map_or_else(|| spec.to_string(), |s| s.to_string_lossy().into_owned());
        Ok((name, net))
    }

    fn mcmc(&self, args: &McmcArgs) -> Result<McmcConfig> {
        let d = McmcConfig::default();
        let f = &self.file;
        Ok(McmcConfig {
            burn_in: f.pick(args.burn_in, "burn_in")?.unwrap_or(d.burn_in),
            draws: f.pick(args.draws, "draws")?.unwrap_or(d.draws),
            thin: f.pick(args.thin, "thin")?.unwrap_or(d.thin),
            seed: self.seed,
            metropolis_step: f.pick(args.metropolis_step, "metropolis_step")?.unwrap_or(d.metropolis_step),
            coefficient_step: f.pick(args.coefficient_step, "coefficient_step")?.unwrap_or(d.coefficient_step),
        })
    }

    fn output_dir(&self) -> Result<&Path> {
        fs::create_dir_all(&self.output_dir)?;
        Ok(&self.output_dir)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::UnknownDataset(_) | Error::Json(_) => 2,
        Error::Iteration { source, .. } => exit_code(source),
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let ctx = Context {
        seed: file.pick(cli.seed, "seed")?.unwrap_or(0),
        data_dir: file.pick(cli.data_dir, "data_dir")?.unwrap_or_else(datasets::default_data_dir),
        output_dir: file.pick(cli.output_dir, "output_dir")?.unwrap_or_else(|| PathBuf::from("cidnet-out")),
        jobs: file.pick(cli.jobs, "jobs")?.unwrap_or(1),
        file,
    };
    if ctx.jobs == 0 {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }
    match cli.command {
        Command::Stats { networks, source } => cmd_stats(&ctx, networks, &source),
        Command::Scv { network, models, fraction, trials, iterations, sampler, prediction, mcmc, source } => {
            let f = &ctx.file;
            let models = if models.is_empty() {
                f.get::<String>("models")?
                    .map(|m| m.split_whitespace().map(String::from).collect())
                    .unwrap_or_default()
            } else {
                models
            };
            if models.is_empty() {
                return Err(Error::Config("scv needs at least one --model".into()));
            }
            let d = ScvConfig::default();
            let base = ScvConfig {
                fraction: f.pick(fraction, "fraction")?.unwrap_or(d.fraction),
                iterations_per_trial: f.pick(iterations, "iterations")?.unwrap_or(d.iterations_per_trial),
                trials: f.pick(trials, "trials")?.unwrap_or(d.trials),
                sampler: f.pick(sampler, "sampler")?.map_or(Ok(d.sampler), |s: String| s.parse())?,
                prediction_mode: f
                    .pick(prediction, "prediction")?
                    .map_or(Ok(d.prediction_mode), |s: String| s.parse::<PredictionMode>())?,
                mcmc: ctx.mcmc(&mcmc)?,
                master_seed: ctx.seed,
                ..d
            };
            let specs = models.iter().map(|m| m.parse()).collect::<Result<Vec<ModelSpec>>>()?;
            for spec in &specs {
                ScvConfig { model: *spec, ..base.clone() }.validate()?;
            }
            let (name, net) = ctx.network(&network, &source)?;
            cmd_scv(&ctx, &name, &net, &specs, base)
        }
        Command::Fit { network, model, k, d, link, mcmc, source } => {
            let f = &ctx.file;
            let spec = model_spec(
                &model,
                f.pick(k, "k")?,
                f.pick(d, "d")?,
                f.pick(link, "link")?.map(|l: String| l.parse()).transpose()?,
            )?;
            let cfg = ctx.mcmc(&mcmc)?;
            cfg.validate()?;
            let (name, net) = ctx.network(&network, &source)?;
            cmd_fit(&ctx, &name, &net, &spec, &cfg)
        }
        Command::Generate { params, count, nodes, compare, source } => {
            let count = ctx.file.pick(count, "count")?.unwrap_or(1);
            let nodes = ctx.file.pick(nodes, "nodes")?;
            cmd_generate(&ctx, &params, count, nodes, compare.as_deref(), &source)
        }
    }
}

/// Combines a positional model (`sbm`, `sbm:3`, ...) with `--k`, `--d` and `--link`.
fn model_spec(model: &str, k: Option<usize>, d: Option<usize>, link: Option<LinkKind>) -> Result<ModelSpec> {
    let mut spec = match model.parse::<ModelSpec>() {
        Ok(spec) => spec,
        Err(e) => {
            let tag: ModelTag = model.parse().map_err(|_| e)?;
            ModelSpec { tag, k: None, d: None, link: LinkKind::Probit }
        }
    };
    match spec.tag {
        ModelTag::Sbm => spec.k = k.or(spec.k),
        ModelTag::Lsm => spec.d = d.or(spec.d).or(Some(2)),
        _ => {}
    }
    if let Some(link) = link {
        spec.link = link;
    }
    spec.validate()?;
    Ok(spec)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::Writer::from_path(path)?)
}

fn cmd_stats(ctx: &Context, networks: Vec<String>, source: &SourceArgs) -> Result<()> {
    let names = if networks.is_empty() {
        DATASETS.iter().map(|d| d.name.to_string()).collect()
    } else {
        networks
    };
    let mut rows = Vec::new();
    let mut failures = 0;
    for spec in &names {
        match ctx.network(spec, source).and_then(|(name, net)| Ok((name, summary_stats(&net)?))) {
            Ok((name, stats)) => {
                println!("{}", stats.row(&name));
                rows.push((name, stats));
            }
            Err(e) => {
                eprintln!("error: {spec}: {e}");
                failures += 1;
            }
        }
    }
    let mut w = csv_writer(&ctx.output_dir()?.join("stats.csv"))?;
    w.write_record(["network", "nodes", "edges", "density", "reciprocity"])?;
    for (name, s) in &rows {
        w.write_record([
            name.clone(),
            s.nodes.to_string(),
            s.edges.to_string(),
            format!("{:.3}", s.density),
            format!("{:.3}", s.reciprocity),
        ])?;
    }
    w.flush()?;
    if failures > 0 {
        return Err(Error::Domain(format!("{failures} of {} networks failed to load", names.len())));
    }
    Ok(())
}

fn cmd_scv(ctx: &Context, name: &str, net: &Network, specs: &[ModelSpec], base: ScvConfig) -> Result<()> {
    let out = ctx.output_dir()?;
    let mut reports: Vec<ScvReport> = Vec::new();
    let mut last_err = None;
    for spec in specs {
        let cfg = ScvConfig { model: *spec, ..base.clone() };
        match run_experiment_with_jobs(net, &cfg, ctx.jobs) {
            Ok(report) => {
                let fmt = |m: Option<f64>, s: Option<f64>| match (m, s) {
                    (Some(m), Some(s)) => format!("{m:.3} ± {s:.3}"),
                    (Some(m), None) => format!("{m:.3}"),
                    _ => "n/a".into(),
                };
                println!(
                    "{name} {}: edge {}  non-edge {}",
                    report.model,
                    fmt(report.mean_edge_accuracy, report.sd_edge_accuracy),
                    fmt(report.mean_nonedge_accuracy, report.sd_nonedge_accuracy)
                );
                let file = fs::File::create(out.join(format!("{name}_{}.csv", report.model)))?;
                report.write_csv(name, file)?;
                reports.push(report);
            }
            Err(e) => {
                eprintln!("error: {name} {}: {e}", spec.label());
                last_err = Some(e);
            }
        }
    }
    if reports.is_empty() {
        return Err(last_err.unwrap_or_else(|| Error::Config("no models".into())));
    }
    fs::write(out.join(format!("{name}_scv.json")), serde_json::to_string_pretty(&reports)?)?;
    Ok(())
}

fn cmd_fit(ctx: &Context, name: &str, net: &Network, spec: &ModelSpec, cfg: &McmcConfig) -> Result<()> {
    let result = fit(net, spec, &Priors::default(), cfg)?;
    let out = ctx.output_dir()?;
    fs::write(out.join(format!("{name}_{}.json", spec.label())), result.to_json()?)?;
    match &result.posterior_mean {
        ModelParams::Sbm(p) => write_blocks(out, net, &result, p.k)?,
        ModelParams::Sr(p) => {
            let deg = degrees(net);
            let mut w = csv_writer(&out.join("effects.csv"))?;
            w.write_record(["node", "beta_send", "beta_recv", "in_degree", "out_degree"])?;
            for i in 0..net.node_count() {
                w.write_record([
                    net.label(i),
                    p.beta_send[i].to_string(),
                    p.beta_recv[i].to_string(),
                    deg.in_degree[i].to_string(),
                    deg.out_degree[i].to_string(),
                ])?;
            }
            w.flush()?;
        }
        ModelParams::Lsm(p) => {
            let mut w = csv_writer(&out.join("positions.csv"))?;
            let mut header = vec!["node".to_string()];
            header.extend((1..=p.d).map(|k| format!("dim{k}")));
            w.write_record(&header)?;
            for (i, pos) in p.positions.iter().enumerate() {
                let mut row = vec![net.label(i)];
                row.extend(pos.iter().map(f64::to_string));
                w.write_record(&row)?;
            }
            w.flush()?;
            let mut w = csv_writer(&out.join("edges.csv"))?;
            w.write_record(["source", "target"])?;
            for e in net.edges() {
                w.write_record([net.label(e.i), net.label(e.j)])?;
            }
            w.flush()?;
        }
        ModelParams::Er(p) => println!("{name} er: p = {:.4}", p.p),
    }
    println!("{name} {}: final log-likelihood {:.3}", spec.label(), result.final_loglik);
    Ok(())
}

fn write_blocks(out: &Path, net: &Network, result: &FitResult, k: usize) -> Result<()> {
    let ModelParams::Sbm(p) = &result.posterior_mean else {
        return Ok(());
    };
    let membership = result.membership_probability.as_deref().unwrap_or_default();
    let mut w = csv_writer(&out.join("blocks.csv"))?;
    let mut header = vec!["node".to_string(), "block".to_string()];
    header.extend((1..=k).map(|b| format!("p_block{b}")));
    w.write_record(&header)?;
    for i in 0..net.node_count() {
        let mut row = vec![net.label(i), (p.z[i] + 1).to_string()];
        if let Some(probs) = membership.get(i) {
            row.extend(probs.iter().map(f64::to_string));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_generate(
    ctx: &Context,
    params_path: &Path,
    count: usize,
    nodes: Option<usize>,
    compare: Option<&str>,
    source: &SourceArgs,
) -> Result<()> {
    let text = fs::read_to_string(params_path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let (params, fit_n, directed) = match value.get("posterior_mean") {
        Some(inner) => (
            serde_json::from_value::<ModelParams>(inner.clone())?,
            value.get("node_count").and_then(serde_json::Value::as_u64).map(|n| n as usize),
            value.get("directed").and_then(serde_json::Value::as_bool).unwrap_or(source.directed),
        ),
        None => (serde_json::from_value::<ModelParams>(value)?, None, source.directed),
    };
    params.validate().map_err(|e| Error::Config(e.to_string()))?;
    let n = nodes
        .or(params.node_count())
        .or(fit_n)
        .ok_or_else(|| Error::Config("ER parameters need --nodes".into()))?;

    let reference = compare
        .map(|spec| ctx.network(spec, source).and_then(|(_, net)| summary_stats(&net)))
        .transpose()?;
    let out = ctx.output_dir()?;
    let mut stats = csv_writer(&out.join("samples.csv"))?;
    stats.write_record(["sample", "nodes", "edges", "density", "reciprocity", "source_density", "source_reciprocity"])?;
    let width = count.to_string().len().max(3);
    for c in 0..count {
        let mut rng = seeded(child_seed(ctx.seed, &[c as u64]));
        let net = sample_network(&params, n, directed, &mut rng)?;
        let file = format!("sample_{:0width$}.csv", c + 1);
        let mut w = csv_writer(&out.join(&file))?;
        w.write_record(["source", "target"])?;
        for e in net.edges() {
            w.write_record([(e.i + 1).to_string(), (e.j + 1).to_string()])?;
        }
        w.flush()?;
        let dens = cidnet::graph::density(&net)?;
        let recip = cidnet::graph::reciprocity(&net).map(|r| r.to_string()).unwrap_or_default();
        stats.write_record([
            file,
            n.to_string(),
            net.edge_count().to_string(),
            dens.to_string(),
            recip,
            reference.map(|s| s.density.to_string()).unwrap_or_default(),
            reference.map(|s| s.reciprocity.to_string()).unwrap_or_default(),
        ])?;
    }
    stats.flush()?;
    println!("wrote {count} samples to {}", out.display());
    Ok(())
}
