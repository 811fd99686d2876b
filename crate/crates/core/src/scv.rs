//! Stratified-sampling cross-validation.
//!
//! Each iteration hides a fraction of the edges and the same fraction of the
//! non-edges, fits a model to what is left and scores its predictions on the
//! hidden dyads, keeping edge and non-edge accuracy separate. Naive uniform
//! masking and Latin-square folds are provided for comparison.

use std::io::Write;

use rand::seq::index;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{fit, FitResult, McmcConfig, ModelSpec, Priors};
use crate::graph::{apply_mask, dyad_universe, Dyad, DyadSet, Network};
use crate::sampling::{child_seed, seeded};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampler {
    #[default]
    Stratified,
    Naive,
    /// Latin-square folds; each fold in turn is the mask.
    Latin(usize),
}

impl std::str::FromStr for Sampler {
    type Err = Error;

    /// `stratified`, `naive` or `latin:K`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "stratified" => Ok(Sampler::Stratified),
            None if s == "naive" => Ok(Sampler::Naive),
            Some(("latin", k)) => k
                .parse()
                .map(Sampler::Latin)
                .map_err(|_| Error::Config(format!("invalid fold count in `{s}`"))),
            _ => Err(Error::Config(format!("unknown sampler `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictionMode {
    /// Draw a Bernoulli(p) prediction for every held-out dyad.
    #[default]
    Bernoulli,
    /// Score the expectation of the Bernoulli rule.
    Expected,
}

impl std::str::FromStr for PredictionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bernoulli" => Ok(PredictionMode::Bernoulli),
            "expected" => Ok(PredictionMode::Expected),
            _ => Err(Error::Config(format!("unknown prediction mode `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScvConfig {
    pub fraction: f64,
    pub iterations_per_trial: usize,
    pub trials: usize,
    pub sampler: Sampler,
    pub prediction_mode: PredictionMode,
    pub model: ModelSpec,
    pub priors: Priors,
    pub mcmc: McmcConfig,
    pub master_seed: u64,
}

impl Default for ScvConfig {
    fn default() -> Self {
        ScvConfig {
            fraction: 0.2,
            iterations_per_trial: 10,
            trials: 5,
            sampler: Sampler::Stratified,
            prediction_mode: PredictionMode::Bernoulli,
            model: ModelSpec::er(),
            priors: Priors::default(),
            mcmc: McmcConfig::default(),
            master_seed: 0,
        }
    }
}

impl ScvConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fraction > 0.0 && self.fraction < 1.0) {
            return Err(Error::Config(format!("fraction {} must lie in (0, 1)", self.fraction)));
        }
        if self.iterations_per_trial == 0 || self.trials == 0 {
            return Err(Error::Config("trials and iterations must be positive".into()));
        }
        if let Sampler::Latin(k) = self.sampler {
            if k < 2 {
                return Err(Error::Config("latin sampler needs at least 2 folds".into()));
            }
        }
        self.model.validate()?;
        self.priors.validate()?;
        self.mcmc.validate()
    }

    /// Iterations per trial; for Latin folds this is the fold count.
    pub fn effective_iterations(&self) -> usize {
        match self.sampler {
            Sampler::Latin(k) => k,
            _ => self.iterations_per_trial,
        }
    }
}

/// Accuracy on one held-out set. `None` marks an empty stratum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub edge: Option<f64>,
    pub nonedge: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationResult {
    pub trial: usize,
    pub iteration: usize,
    pub edge_accuracy: Option<f64>,
    pub nonedge_accuracy: Option<f64>,
    pub held_out_edges: usize,
    pub held_out_nonedges: usize,
    /// Mean log-likelihood of the retained draws on the masked network.
    pub fit_loglik: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub iterations: Vec<IterationResult>,
    pub mean_edge_accuracy: Option<f64>,
    pub mean_nonedge_accuracy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScvReport {
    pub model: String,
    pub config: ScvConfig,
    pub trials: Vec<TrialSummary>,
    /// Mean and sample standard deviation over every iteration.
    pub mean_edge_accuracy: Option<f64>,
    pub sd_edge_accuracy: Option<f64>,
    pub mean_nonedge_accuracy: Option<f64>,
    pub sd_nonedge_accuracy: Option<f64>,
}

impl ScvReport {
    pub fn iterations(&self) -> impl Iterator<Item = &IterationResult> {
        self.trials.iter().flat_map(|t| &t.iterations)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Flat one-row-per-iteration CSV with a header row.
    pub fn write_csv<W: Write>(&self, network: &str, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "network",
            "model",
            "trial",
            "iteration",
            "edge_acc",
            "nonedge_acc",
            "held_edges",
            "held_nonedges",
            "loglik",
        ])?;
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        for r in self.iterations() {
            w.write_record([
                network.to_string(),
                self.model.clone(),
                (r.trial + 1).to_string(),
                (r.iteration + 1).to_string(),
                opt(r.edge_accuracy),
                opt(r.nonedge_accuracy),
                r.held_out_edges.to_string(),
                r.held_out_nonedges.to_string(),
                r.fit_loglik.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn require_fully_observed(net: &Network) -> Result<()> {
    if net.is_fully_observed() {
        Ok(())
    } else {
        Err(Error::domain("cross-validation needs a fully observed network"))
    }
}

fn held_count(fraction: f64, size: usize) -> usize {
    ((fraction * size as f64).floor() as usize).max(1)
}

fn check_fraction(fraction: f64) -> Result<()> {
    if fraction > 0.0 && fraction < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("fraction {fraction} must lie in (0, 1)")))
    }
}

fn pick<R: Rng + ?Sized>(pool: &[Dyad], count: usize, rng: &mut R) -> Vec<Dyad> {
    index::sample(rng, pool.len(), count).into_iter().map(|k| pool[k]).collect()
}

/// Holds out `max(1, floor(fraction * E))` edges and
/// `max(1, floor(fraction * N))` non-edges, uniformly within each stratum.
pub fn stratified_sample<R: Rng + ?Sized>(net: &Network, fraction: f64, rng: &mut R) -> Result<DyadSet> {
    check_fraction(fraction)?;
    require_fully_observed(net)?;
    let (edges, nonedges): (Vec<Dyad>, Vec<Dyad>) = net.dyads().partition(|d| net.is_edge(d.i, d.j));
    if edges.is_empty() || nonedges.is_empty() {
        return Err(Error::domain("stratified sampling needs at least one edge and one non-edge"));
    }
    let mut held = pick(&edges, held_count(fraction, edges.len()), rng);
    held.extend(pick(&nonedges, held_count(fraction, nonedges.len()), rng));
    DyadSet::from_network(net, held)
}

/// Holds out `max(1, floor(fraction * |universe|))` dyads uniformly.
pub fn naive_sample<R: Rng + ?Sized>(net: &Network, fraction: f64, rng: &mut R) -> Result<DyadSet> {
    check_fraction(fraction)?;
    require_fully_observed(net)?;
    let universe = dyad_universe(net);
    if universe.is_empty() {
        return Err(Error::domain("empty dyad universe"));
    }
    let held = pick(&universe, held_count(fraction, universe.len()).min(universe.len()), rng);
    DyadSet::from_network(net, held)
}

/// Cyclic Latin-square fold matrix of side `size`: cell `(r, c)` holds
/// fold `(r + c) mod k`. With `k | size` every row has each fold `size / k`
/// times.
pub fn latin_fold_matrix(size: usize, k: usize) -> Vec<Vec<usize>> {
    (0..size).map(|r| (0..size).map(|c| (r + c) % k).collect()).collect()
}

/// Partitions the dyad universe into `k` folds through a Latin square with
/// randomly permuted rows and columns. When `k` does not divide `n` the
/// square is built at the next multiple of `k` and the extra cells dropped.
pub fn latin_sample<R: Rng + ?Sized>(net: &Network, k: usize, rng: &mut R) -> Result<Vec<DyadSet>> {
    require_fully_observed(net)?;
    let n = net.node_count();
    if k < 2 {
        return Err(Error::domain("latin sampling needs at least 2 folds"));
    }
    if k > n {
        return Err(Error::domain(format!("{k} folds exceed {n} nodes")));
    }
    let size = n.div_ceil(k) * k;
    let square = latin_fold_matrix(size, k);
    let mut rows: Vec<usize> = (0..size).collect();
    let mut cols: Vec<usize> = (0..size).collect();
    rows.shuffle(rng);
    cols.shuffle(rng);
    let mut folds: Vec<Vec<Dyad>> = vec![Vec::new(); k];
    for d in net.dyads() {
        folds[square[rows[d.i]][cols[d.j]]].push(d);
    }
    folds.into_iter().map(|f| DyadSet::from_network(net, f)).collect()
}

/// Scores the fit's predictive probabilities on the held-out dyads.
pub fn predict_mask<R: Rng + ?Sized>(
    fit: &FitResult,
    mask: &DyadSet,
    mode: PredictionMode,
    rng: &mut R,
) -> Result<Accuracy> {
    // Expected scores use a running mean so a constant p is reproduced exactly.
    let (mut edge_mean, mut nonedge_mean) = (0.0, 0.0);
    let (mut edge_hits, mut nonedge_hits) = (0usize, 0usize);
    let (mut seen_edges, mut seen_nonedges) = (0usize, 0usize);
    for ld in mask.dyads() {
        let Dyad { i, j } = ld.dyad;
        if i >= fit.node_count || j >= fit.node_count || i == j {
            return Err(Error::UnknownDyad(i, j));
        }
        let p = fit.predictive(i, j);
        let (mean, hits, seen, score) = if ld.edge {
            (&mut edge_mean, &mut edge_hits, &mut seen_edges, p)
        } else {
            (&mut nonedge_mean, &mut nonedge_hits, &mut seen_nonedges, 1.0 - p)
        };
        *seen += 1;
        match mode {
            PredictionMode::Expected => *mean += (score - *mean) / *seen as f64,
            PredictionMode::Bernoulli => {
                if (rng.random::<f64>() < p) == ld.edge {
                    *hits += 1;
                }
            }
        }
    }
    let finish = |mean: f64, hits: usize, seen: usize| {
        (seen > 0).then(|| match mode {
            PredictionMode::Expected => mean,
            PredictionMode::Bernoulli => hits as f64 / seen as f64,
        })
    };
    Ok(Accuracy {
        edge: finish(edge_mean, edge_hits, seen_edges),
        nonedge: finish(nonedge_mean, nonedge_hits, seen_nonedges),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroImputation {
    pub edge_accuracy: f64,
    pub nonedge_accuracy: f64,
    pub overall_accuracy: f64,
}

/// Accuracy of predicting every held-out dyad as a non-edge.
pub fn zero_imputation_baseline(mask: &DyadSet) -> Result<ZeroImputation> {
    if mask.is_empty() {
        return Err(Error::domain("empty mask"));
    }
    Ok(ZeroImputation {
        edge_accuracy: 0.0,
        nonedge_accuracy: 1.0,
        overall_accuracy: mask.nonedge_count() as f64 / mask.len() as f64,
    })
}

fn mean_sd(values: impl Iterator<Item = Option<f64>>) -> (Option<f64>, Option<f64>) {
    let xs: Vec<f64> = values.flatten().collect();
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() > 1 {
        Some((xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
    } else {
        None
    };
    (Some(mean), sd)
}

fn run_iteration(net: &Network, cfg: &ScvConfig, trial: usize, iteration: usize) -> Result<IterationResult> {
    let mask = match cfg.sampler {
        Sampler::Latin(k) => {
            // All folds of a trial share one partition.
            let mut rng = seeded(child_seed(cfg.master_seed, &[trial as u64]));
            latin_sample(net, k, &mut rng)?.swap_remove(iteration)
        }
        Sampler::Stratified => {
            let mut rng = seeded(child_seed(cfg.master_seed, &[trial as u64, iteration as u64, 0]));
            stratified_sample(net, cfg.fraction, &mut rng)?
        }
        Sampler::Naive => {
            let mut rng = seeded(child_seed(cfg.master_seed, &[trial as u64, iteration as u64, 0]));
            naive_sample(net, cfg.fraction, &mut rng)?
        }
    };
    let masked = apply_mask(net, &mask)?;
    let mcmc = McmcConfig {
        seed: child_seed(cfg.master_seed, &[trial as u64, iteration as u64, 1]),
        ..cfg.mcmc.clone()
    };
    let fitted = fit(&masked, &cfg.model, &cfg.priors, &mcmc)?;
    let mut rng = seeded(child_seed(cfg.master_seed, &[trial as u64, iteration as u64, 2]));
    let acc = predict_mask(&fitted, &mask, cfg.prediction_mode, &mut rng)?;
    Ok(IterationResult {
        trial,
        iteration,
        edge_accuracy: acc.edge,
        nonedge_accuracy: acc.nonedge,
        held_out_edges: mask.edge_count(),
        held_out_nonedges: mask.nonedge_count(),
        fit_loglik: fitted.mean_draw_loglik,
    })
}

/// Runs every (trial, iteration) job on the current rayon pool.
pub fn run_experiment(net: &Network, cfg: &ScvConfig) -> Result<ScvReport> {
    cfg.validate()?;
    require_fully_observed(net)?;
    let per_trial = cfg.effective_iterations();
    let jobs: Vec<(usize, usize)> = (0..cfg.trials)
        .flat_map(|t| (0..per_trial).map(move |i| (t, i)))
        .collect();
    let results: Vec<IterationResult> = jobs
        .par_iter()
        .map(|&(trial, iteration)| {
            run_iteration(net, cfg, trial, iteration).map_err(|e| Error::Iteration {
                trial: trial + 1,
                iteration: iteration + 1,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let trials: Vec<TrialSummary> = results
        .chunks(per_trial)
        .map(|chunk| TrialSummary {
            mean_edge_accuracy: mean_sd(chunk.iter().map(|r| r.edge_accuracy)).0,
            mean_nonedge_accuracy: mean_sd(chunk.iter().map(|r| r.nonedge_accuracy)).0,
            iterations: chunk.to_vec(),
        })
        .collect();
    let (mean_edge_accuracy, sd_edge_accuracy) = mean_sd(results.iter().map(|r| r.edge_accuracy));
    let (mean_nonedge_accuracy, sd_nonedge_accuracy) = mean_sd(results.iter().map(|r| r.nonedge_accuracy));
    Ok(ScvReport {
        model: cfg.model.label(),
        config: cfg.clone(),
        trials,
        mean_edge_accuracy,
        sd_edge_accuracy,
        mean_nonedge_accuracy,
        sd_nonedge_accuracy,
    })
}

/// [`run_experiment`] on a dedicated pool of at most `jobs` threads.
pub fn run_experiment_with_jobs(net: &Network, cfg: &ScvConfig, jobs: usize) -> Result<ScvReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_experiment(net, cfg))
}
