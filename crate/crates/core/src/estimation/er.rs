use crate::error::{Error, Result};
use crate::graph::Network;
use crate::models::{log_likelihood, ErParams, ModelParams, ModelTag};

use super::{FitResult, McmcConfig, ParamSummary, Priors};

/// Conjugate Beta posterior for the ER edge probability. Exact; the MCMC
/// configuration is only validated, never used.
pub fn fit_er(net: &Network, priors: &Priors, cfg: &McmcConfig) -> Result<FitResult> {
    priors.validate()?;
    cfg.validate()?;
    let (edges, nonedges) = net.observed_counts();
    let observed = edges + nonedges;
    if observed == 0 {
        return Err(Error::fit("er", "no observed dyads"));
    }
    let (a, b) = priors.er_beta;
    let post_a = a + edges as f64;
    let post_b = b + nonedges as f64;
    let total = post_a + post_b;
    let p = post_a / total;
    let sd = (post_a * post_b / (total * total * (total + 1.0))).sqrt();

    let params = ModelParams::Er(ErParams { p });
    let loglik = log_likelihood(&params, net)?;
    Ok(FitResult {
        model: ModelTag::Er,
        node_count: net.node_count(),
        directed: net.is_directed(),
        predictive: FitResult::predictive_from_fn(net, |_, _| p),
        posterior_mean: params,
        draws_summary: vec![ParamSummary { name: "p".into(), mean: p, sd }],
        final_loglik: loglik,
        initial_loglik: loglik,
        mean_draw_loglik: loglik,
        membership_probability: None,
        trace: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{apply_mask, DyadSet};
    use crate::models::sample_network;
    use crate::sampling::seeded;

    fn p_hat(fit: &FitResult) -> f64 {
        match &fit.posterior_mean {
            ModelParams::Er(p) => p.p,
            _ => unreachable!(),
        }
    }

    #[test]
    fn closed_form_examples() {
        let net = Network::from_edges(3, false, [(0, 1)]).unwrap();
        let fit = fit_er(&net, &Priors::default(), &McmcConfig::default()).unwrap();
        assert!((p_hat(&fit) - 0.4).abs() < 1e-15);
        assert!((fit.predictive(2, 1) - 0.4).abs() < 1e-15);

        // Only the single edge observed: (1 + 1) / (2 + 1).
        let mask = DyadSet::from_network(&net, [(0, 2), (1, 2)].map(|(i, j)| crate::graph::Dyad::new(i, j))).unwrap();
        let masked = apply_mask(&net, &mask).unwrap();
        let fit = fit_er(&masked, &Priors::default(), &McmcConfig::default()).unwrap();
        assert!((p_hat(&fit) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn no_observed_dyads_is_an_error() {
        let net = Network::from_edges(2, false, [(0, 1)]).unwrap();
        let mask = DyadSet::from_network(&net, net.dyads()).unwrap();
        let masked = apply_mask(&net, &mask).unwrap();
        assert!(fit_er(&masked, &Priors::default(), &McmcConfig::default()).is_err());
    }

    #[test]
    fn missing_at_random_barely_moves_the_estimate() {
        let mut rng = seeded(21);
        let net = sample_network(&ModelParams::Er(ErParams { p: 0.1 }), 200, false, &mut rng).unwrap();
        let full = p_hat(&fit_er(&net, &Priors::default(), &McmcConfig::default()).unwrap());
        let held = crate::scv::naive_sample(&net, 0.2, &mut rng).unwrap();
        let masked = apply_mask(&net, &held).unwrap();
        let part = p_hat(&fit_er(&masked, &Priors::default(), &McmcConfig::default()).unwrap());
        assert!((full - part).abs() <= 0.02, "{full} vs {part}");
    }
}
