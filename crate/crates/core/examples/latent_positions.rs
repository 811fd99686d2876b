//! Fit a two-dimensional latent space model and print node positions.

use cidnet::datasets::load_bundled;
use cidnet::estimation::{fit, McmcConfig, ModelSpec, Priors};
use cidnet::models::{LinkKind, ModelParams};

fn main() -> cidnet::Result<()> {
    let net = load_bundled("karate")?;
    let f = fit(&net, &ModelSpec::lsm(2, LinkKind::Probit), &Priors::default(), &McmcConfig::default())?;
    let ModelParams::Lsm(est) = &f.posterior_mean else { unreachable!() };

    println!("mu {:.3}, log-likelihood {:.1} -> {:.1}", est.mu, f.initial_loglik, f.mean_draw_loglik);
    for (i, z) in est.positions.iter().enumerate() {
        println!("{:>3} {:>7.3} {:>7.3}", net.label(i), z[0], z[1]);
    }
    // Distances drive the predictive, so 1-34 (rival leaders) sits low.
    println!("p(1,2) = {:.3}  p(1,34) = {:.3}", f.predictive(0, 1), f.predictive(0, 33));
    Ok(())
}
