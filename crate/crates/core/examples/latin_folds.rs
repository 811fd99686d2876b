//! Latin-square folds: every dyad is held out exactly once per trial.

use cidnet::datasets::load_bundled;
use cidnet::estimation::{McmcConfig, ModelSpec};
use cidnet::scv::{latin_fold_matrix, latin_sample, run_experiment, Sampler, ScvConfig};
use cidnet::sampling::seeded;

fn main() -> cidnet::Result<()> {
    for row in latin_fold_matrix(5, 5) {
        println!("{row:?}");
    }

    let net = load_bundled("karate")?;
    let folds = latin_sample(&net, 5, &mut seeded(3))?;
    let sizes: Vec<usize> = folds.iter().map(|f| f.len()).collect();
    println!("fold sizes {sizes:?}, total {} of {}", sizes.iter().sum::<usize>(), net.dyad_count());

    let cfg = ScvConfig {
        sampler: Sampler::Latin(5),
        trials: 2,
        model: ModelSpec::sbm(2),
        mcmc: McmcConfig { burn_in: 100, draws: 200, ..Default::default() },
        ..Default::default()
    };
    let report = run_experiment(&net, &cfg)?;
    for it in report.iterations() {
        println!(
            "trial {} fold {}: held {} edges, edge acc {:?}",
            it.trial + 1,
            it.iteration + 1,
            it.held_out_edges,
            it.edge_accuracy
        );
    }
    Ok(())
}
