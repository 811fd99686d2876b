//! Latent space model via Metropolis-within-Gibbs.
//!
//! The intercept is drawn through probit data augmentation (or a random walk
//! under the logistic link); each node's position gets a spherical
//! random-walk proposal scored against the observed-dyad likelihood and an
//! isotropic normal prior. Positions start from classical MDS of hop
//! distances and are recentred at the origin after every sweep.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Network;
use crate::models::{dyad_log_likelihood, euclidean, LinkKind, LsmParams, ModelParams, ModelTag};
use crate::sampling::{probit_latent, seeded, std_normal};

use super::mds::{classical_mds, shortest_path_distances};
use super::{observed_dyads, require_both_outcomes, FitResult, McmcConfig, ParamSummary, Priors, Trace};

/// Retained draws: intercepts and `n x d` position matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct LsmTrace {
    pub mu: Vec<f64>,
    pub positions: Vec<Vec<Vec<f64>>>,
}

/// Posterior-mean edge probabilities implied by a trace, as a dense
/// row-major `n x n` matrix with a zero diagonal. Depends on positions only
/// through pairwise distances.
pub fn lsm_predictive(trace: &LsmTrace, link: LinkKind) -> Vec<f64> {
    let n = trace.positions.first().map_or(0, Vec::len);
    let mut out = vec![0.0; n * n];
    for (mu, pos) in trace.mu.iter().zip(&trace.positions) {
        for i in 0..n {
            for j in (i + 1)..n {
                let p = link.apply(mu - euclidean(&pos[i], &pos[j]));
                out[i * n + j] += p;
                out[j * n + i] += p;
            }
        }
    }
    let r = trace.mu.len() as f64;
    out.iter_mut().for_each(|x| *x /= r);
    out
}

struct Design {
    dyads: Vec<(usize, usize, bool)>,
    /// Dyad indices touching each node, as either endpoint.
    touching: Vec<Vec<usize>>,
}

fn loglik(mu: f64, pos: &[Vec<f64>], design: &Design, link: LinkKind) -> f64 {
    design
        .dyads
        .iter()
        .map(|&(i, j, e)| dyad_log_likelihood(link.apply(mu - euclidean(&pos[i], &pos[j])), e))
        .sum()
}

fn node_loglik(node: usize, at: &[f64], mu: f64, pos: &[Vec<f64>], design: &Design, link: LinkKind) -> f64 {
    design.touching[node]
        .iter()
        .map(|&idx| {
            let (i, j, e) = design.dyads[idx];
            let other = if i == node { j } else { i };
            dyad_log_likelihood(link.apply(mu - euclidean(at, &pos[other])), e)
        })
        .sum()
}

fn recentre(pos: &mut [Vec<f64>]) {
    let n = pos.len() as f64;
    let d = pos.first().map_or(0, Vec::len);
    for k in 0..d {
        let mean = pos.iter().map(|p| p[k]).sum::<f64>() / n;
        pos.iter_mut().for_each(|p| p[k] -= mean);
    }
}

/// Intercept that matches the mean predicted probability to the observed
/// edge fraction for fixed positions.
fn matching_intercept(pos: &[Vec<f64>], design: &Design, link: LinkKind) -> f64 {
    let target = design.dyads.iter().filter(|d| d.2).count() as f64;
    let expected = |mu: f64| -> f64 {
        design
            .dyads
            .iter()
            .map(|&(i, j, _)| link.apply(mu - euclidean(&pos[i], &pos[j])))
            .sum()
    };
    let (mut lo, mut hi) = (-50.0, 50.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if expected(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Rotation/reflection that best maps `x` onto `y` (orthogonal Procrustes).
fn procrustes(x: &[Vec<f64>], y: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = x.len();
    let d = x.first().map_or(0, Vec::len);
    let xm = DMatrix::from_fn(n, d, |i, k| x[i][k]);
    let ym = DMatrix::from_fn(n, d, |i, k| y[i][k]);
    let svd = (xm.transpose() * &ym).svd(true, true);
    let rotation = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => u * v_t,
        _ => DMatrix::identity(d, d),
    };
    let aligned = xm * rotation;
    (0..n).map(|i| (0..d).map(|k| aligned[(i, k)]).collect()).collect()
}

pub fn fit_lsm(net: &Network, d: usize, link: LinkKind, priors: &Priors, cfg: &McmcConfig) -> Result<FitResult> {
    priors.validate()?;
    cfg.validate()?;
    if d == 0 {
        return Err(Error::fit("lsm", "latent dimension must be at least 1"));
    }
    require_both_outcomes(net, "lsm")?;
    let n = net.node_count();

    let dyads = observed_dyads(net);
    let mut touching = vec![Vec::new(); n];
    for (idx, &(i, j, _)) in dyads.iter().enumerate() {
        touching[i].push(idx);
        touching[j].push(idx);
    }
    let design = Design { dyads, touching };

    let mut pos = classical_mds(&shortest_path_distances(net), d);
    recentre(&mut pos);
    let mut mu = matching_intercept(&pos, &design, link);
    let initial_loglik = loglik(mu, &pos, &design, link);

    let mut rng = seeded(cfg.seed);
    let mut latent = vec![0.0; design.dyads.len()];
    let intercept_prec = 1.0 / (priors.intercept_sd * priors.intercept_sd);
    let pos_var = priors.position_sd * priors.position_sd;
    let mut trace = LsmTrace { mu: Vec::with_capacity(cfg.draws), positions: Vec::with_capacity(cfg.draws) };
    let mut loglik_sum = 0.0;
    let mut final_loglik = initial_loglik;
    let mut proposal = vec![0.0; d];

    for t in 0..cfg.iterations() {
        mu = match link {
            LinkKind::Probit => {
                let mut sum = 0.0;
                for (idx, &(i, j, e)) in design.dyads.iter().enumerate() {
                    let dist = euclidean(&pos[i], &pos[j]);
                    latent[idx] = probit_latent(mu - dist, e, &mut rng);
                    sum += latent[idx] + dist;
                }
                let var = 1.0 / (design.dyads.len() as f64 + intercept_prec);
                sum * var + var.sqrt() * std_normal(&mut rng)
            }
            LinkKind::Logistic => {
                let cand = mu + cfg.coefficient_step * std_normal(&mut rng);
                let log_ratio = loglik(cand, &pos, &design, link) - loglik(mu, &pos, &design, link)
                    + (mu * mu - cand * cand) * intercept_prec / 2.0;
                if rng.random::<f64>().ln() < log_ratio { cand } else { mu }
            }
        };

        for node in 0..n {
            for (k, x) in proposal.iter_mut().enumerate() {
                *x = pos[node][k] + cfg.metropolis_step * std_normal(&mut rng);
            }
            let sq = |p: &[f64]| p.iter().map(|x| x * x).sum::<f64>();
            let log_ratio = node_loglik(node, &proposal, mu, &pos, &design, link)
                - node_loglik(node, &pos[node], mu, &pos, &design, link)
                + (sq(&pos[node]) - sq(&proposal)) / (2.0 * pos_var);
            if rng.random::<f64>().ln() < log_ratio {
                pos[node].copy_from_slice(&proposal);
            }
        }
        recentre(&mut pos);

        if cfg.retains(t) {
            trace.mu.push(mu);
            trace.positions.push(pos.clone());
            final_loglik = loglik(mu, &pos, &design, link);
            loglik_sum += final_loglik;
        }
    }

    let dense = lsm_predictive(&trace, link);
    let r = trace.mu.len() as f64;
    let reference = trace.positions[0].clone();
    let aligned: Vec<Vec<Vec<f64>>> = trace.positions.iter().map(|p| procrustes(p, &reference)).collect();
    let mean_pos: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..d).map(|k| aligned.iter().map(|p| p[i][k]).sum::<f64>() / r).collect())
        .collect();

    let mut summary = vec![ParamSummary::from_draws("mu", trace.mu.iter().copied())];
    for i in 0..n {
        for k in 0..d {
            summary.push(ParamSummary::from_draws(
                format!("z[{},{}]", i + 1, k + 1),
                aligned.iter().map(|p| p[i][k]),
            ));
        }
    }

    Ok(FitResult {
        model: ModelTag::Lsm,
        node_count: n,
        directed: net.is_directed(),
        posterior_mean: ModelParams::Lsm(LsmParams {
            d,
            mu: trace.mu.iter().sum::<f64>() / r,
            positions: mean_pos,
            link,
        }),
        predictive: FitResult::predictive_from_fn(net, |i, j| dense[i * n + j]),
        draws_summary: summary,
        final_loglik,
        initial_loglik,
        mean_draw_loglik: loglik_sum / r,
        membership_probability: None,
        trace: Some(Trace::Lsm(trace)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::sample_network;

    fn quick() -> McmcConfig {
        McmcConfig { burn_in: 300, draws: 500, ..Default::default() }
    }

    #[test]
    fn path_graph_prefers_observed_edges() {
        let net = Network::from_edges(3, false, [(0, 1), (1, 2)]).unwrap();
        let fit = fit_lsm(&net, 2, LinkKind::Probit, &Priors::default(), &quick()).unwrap();
        assert!(fit.predictive(0, 1) > fit.predictive(0, 2));
        assert_eq!(fit.predictive(0, 1), fit.predictive(1, 0));
    }

    #[test]
    fn clusters_sit_apart_in_latent_space() {
        let mut rng = seeded(17);
        let positions: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let centre = if i < 20 { -1.5 } else { 1.5 };
                vec![centre + 0.3 * std_normal(&mut rng), 0.3 * std_normal(&mut rng)]
            })
            .collect();
        let truth = ModelParams::Lsm(LsmParams { d: 2, mu: 1.0, positions, link: LinkKind::Probit });
        let net = sample_network(&truth, 40, false, &mut rng).unwrap();
        for link in [LinkKind::Probit, LinkKind::Logistic] {
            let fit = fit_lsm(&net, 2, link, &Priors::default(), &quick()).unwrap();
            let ModelParams::Lsm(est) = &fit.posterior_mean else { unreachable!() };
            let (mut within, mut between) = ((0.0, 0.0), (0.0, 0.0));
            for i in 0..40 {
                for j in (i + 1)..40 {
                    let dist = euclidean(&est.positions[i], &est.positions[j]);
                    let slot = if (i < 20) == (j < 20) { &mut within } else { &mut between };
                    slot.0 += dist;
                    slot.1 += 1.0;
                }
            }
            assert!(within.0 / within.1 < between.0 / between.1, "{link:?}");
        }
    }

    #[test]
    fn procrustes_undoes_rotation() {
        let y = vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![-1.0, -2.0]];
        let (s, c) = 0.7f64.sin_cos();
        let x: Vec<Vec<f64>> = y.iter().map(|p| vec![c * p[0] - s * p[1], s * p[0] + c * p[1]]).collect();
        let back = procrustes(&x, &y);
        for (a, b) in back.iter().zip(&y) {
            assert!(euclidean(a, b) < 1e-12);
        }
    }

    #[test]
    fn separation_is_rejected() {
        let net = Network::empty(5, false);
        assert!(fit_lsm(&net, 2, LinkKind::Probit, &Priors::default(), &quick()).is_err());
    }
}
