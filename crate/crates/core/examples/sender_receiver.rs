//! Sender and receiver effects on Karate, compared with node degree.

use cidnet::datasets::load_bundled;
use cidnet::estimation::{fit, McmcConfig, ModelSpec, Priors};
use cidnet::graph::degrees;
use cidnet::models::{LinkKind, ModelParams};

fn main() -> cidnet::Result<()> {
    let net = load_bundled("karate")?;
    let f = fit(&net, &ModelSpec::sr(LinkKind::Probit), &Priors::default(), &McmcConfig::default())?;
    let ModelParams::Sr(est) = &f.posterior_mean else { unreachable!() };
    let deg = degrees(&net);

    println!("intercept {:.3}", est.beta0);
    let mut order: Vec<usize> = (0..net.node_count()).collect();
    order.sort_by(|&a, &b| est.beta_send[b].total_cmp(&est.beta_send[a]));
    println!("node  effect  degree");
    for &i in order.iter().take(5).chain(order.iter().rev().take(3)) {
        println!("{:>4}  {:>6.3}  {:>6}", net.label(i), est.beta_send[i], deg.out_degree[i]);
    }
    Ok(())
}
