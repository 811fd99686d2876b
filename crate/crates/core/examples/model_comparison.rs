//! Stratified cross-validation of every model family on one network.
//!
//! `cargo run --release --example model_comparison -- divorce`

use cidnet::datasets::load_bundled;
use cidnet::estimation::{McmcConfig, ModelSpec};
use cidnet::models::LinkKind;
use cidnet::scv::{run_experiment_with_jobs, ScvConfig};

fn main() -> cidnet::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "karate".into());
    let net = load_bundled(&name)?;
    let models = [ModelSpec::er(), ModelSpec::sbm(3), ModelSpec::sr(LinkKind::Probit), ModelSpec::lsm(2, LinkKind::Probit)];
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());

    for model in models {
        let cfg = ScvConfig {
            model,
            trials: 3,
            iterations_per_trial: 5,
            mcmc: McmcConfig { burn_in: 200, draws: 400, ..Default::default() },
            master_seed: 11,
            ..Default::default()
        };
        let r = run_experiment_with_jobs(&net, &cfg, jobs)?;
        let show = |m: Option<f64>, s: Option<f64>| match (m, s) {
            (Some(m), Some(s)) => format!("{m:.3} ± {s:.3}"),
            (Some(m), None) => format!("{m:.3}"),
            _ => "n/a".into(),
        };
        println!(
            "{name} {:<5} edge {}  non-edge {}",
            r.model,
            show(r.mean_edge_accuracy, r.sd_edge_accuracy),
            show(r.mean_nonedge_accuracy, r.sd_nonedge_accuracy)
        );
    }
    Ok(())
}
