//! Recover a planted two-block partition with the SBM Gibbs sampler.

use cidnet::estimation::{fit, McmcConfig, ModelSpec, Priors};
use cidnet::models::{sample_network, ModelParams, SbmParams};
use cidnet::sampling::seeded;

fn main() -> cidnet::Result<()> {
    let n = 30;
    let truth: Vec<usize> = (0..n).map(|i| usize::from(i >= n / 2)).collect();
    let planted = ModelParams::Sbm(SbmParams { k: 2, z: truth.clone(), m: vec![vec![0.6, 0.05], vec![0.05, 0.6]] });
    let net = sample_network(&planted, n, false, &mut seeded(1))?;

    let f = fit(&net, &ModelSpec::sbm(2), &Priors::default(), &McmcConfig { seed: 2, ..Default::default() })?;
    let ModelParams::Sbm(est) = &f.posterior_mean else { unreachable!() };

    // Labels are only defined up to a swap.
    let agree = est.z.iter().zip(&truth).filter(|(a, b)| a == b).count();
    println!("recovered {} of {n} memberships", agree.max(n - agree));
    for row in &est.m {
        println!("  {}", row.iter().map(|p| format!("{p:.3}")).collect::<Vec<_>>().join(" "));
    }
    Ok(())
}
