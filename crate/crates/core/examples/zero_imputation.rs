//! Predicting "no edge" everywhere earns high overall accuracy on a sparse
//! network while missing every edge, hence separate edge and non-edge scores.

use cidnet::datasets::load_bundled;
use cidnet::scv::{naive_sample, stratified_sample, zero_imputation_baseline};
use cidnet::sampling::seeded;

fn main() -> cidnet::Result<()> {
    let net = load_bundled("karate")?;
    let mut rng = seeded(5);
    let naive = naive_sample(&net, 0.2, &mut rng)?;
    let strat = stratified_sample(&net, 0.2, &mut rng)?;

    for (name, mask) in [("naive", &naive), ("stratified", &strat)] {
        let z = zero_imputation_baseline(mask)?;
        println!(
            "{name:>10}: {} edges / {} non-edges held, all-zero overall accuracy {:.3}, edge accuracy {}",
            mask.edge_count(),
            mask.nonedge_count(),
            z.overall_accuracy,
            z.edge_accuracy
        );
    }
    Ok(())
}
