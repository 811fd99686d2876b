//! Draw synthetic networks from each model family with a fixed seed.

use cidnet::graph::{density, reciprocity};
use cidnet::models::{sample_network, ErParams, LinkKind, LsmParams, ModelParams, SbmParams, SrParams};
use cidnet::sampling::seeded;

fn main() -> cidnet::Result<()> {
    let n = 40;
    let families = [
        ("er", ModelParams::Er(ErParams { p: 0.1 })),
        (
            "sbm",
            ModelParams::Sbm(SbmParams {
                k: 2,
                z: (0..n).map(|i| i % 2).collect(),
                m: vec![vec![0.4, 0.02], vec![0.02, 0.4]],
            }),
        ),
        (
            "sr",
            ModelParams::Sr(SrParams {
                beta0: -1.3,
                beta_send: (0..n).map(|i| i as f64 / n as f64 - 0.5).collect(),
                beta_recv: vec![0.0; n],
                link: LinkKind::Probit,
            }),
        ),
        (
            "lsm",
            ModelParams::Lsm(LsmParams {
                d: 2,
                mu: 0.5,
                positions: (0..n).map(|i| {
                    let a = i as f64 * std::f64::consts::TAU / n as f64;
                    vec![2.0 * a.cos(), 2.0 * a.sin()]
                }).collect(),
                link: LinkKind::Probit,
            }),
        ),
    ];

    let mut rng = seeded(7);
    for (name, params) in &families {
        let net = sample_network(params, n, true, &mut rng)?;
        println!(
            "{name:>4}: {} edges, density {:.3}, reciprocity {:.3}",
            net.edge_count(),
            density(&net)?,
            reciprocity(&net)?
        );
    }
    Ok(())
}
