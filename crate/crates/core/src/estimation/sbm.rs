//! Gibbs sampler for the stochastic block model.
//!
//! Alternates single-site updates of every block assignment (with block
//! proportions integrated out under a symmetric Dirichlet prior) and
//! conjugate Beta draws of the block matrix. Predictive probabilities are
//! averaged per draw, so they are unaffected by label switching; reported
//! memberships are relabelled against the running modal assignment.

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};
use crate::graph::{DyadState, Network};
use crate::models::{dyad_log_likelihood, ModelParams, ModelTag, SbmParams, PROBABILITY_FLOOR};
use crate::sampling::{seeded, SeededRng};

use super::relabel::best_permutation;
use super::{FitResult, McmcConfig, ParamSummary, Priors};

const EDGE: i8 = 1;
const NON_EDGE: i8 = 0;
const MISSING: i8 = -1;

struct Observed {
    n: usize,
    directed: bool,
    cells: Vec<i8>,
}

impl Observed {
    fn new(net: &Network) -> Self {
        let n = net.node_count();
        let mut cells = vec![MISSING; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    cells[i * n + j] = match net.state(i, j) {
                        DyadState::Edge => EDGE,
                        DyadState::NonEdge => NON_EDGE,
                        DyadState::Missing => MISSING,
                    };
                }
            }
        }
        Observed { n, directed: net.is_directed(), cells }
    }

    fn get(&self, i: usize, j: usize) -> i8 {
        self.cells[i * self.n + j]
    }

    fn dyads(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (n, directed) = (self.n, self.directed);
        (0..n).flat_map(move |i| {
            let start = if directed { 0 } else { i + 1 };
            (start..n).filter(move |&j| j != i).map(move |j| (i, j))
        })
    }
}

fn draw_beta(a: f64, b: f64, rng: &mut SeededRng) -> f64 {
    let x = Beta::new(a, b).expect("positive Beta parameters").sample(rng);
    x.clamp(PROBABILITY_FLOOR, 1.0 - PROBABILITY_FLOOR)
}

/// Draws the block matrix from its full conditional. Block pairs without
/// observed dyads fall back to the prior.
fn draw_block_matrix(
    obs: &Observed,
    z: &[usize],
    k: usize,
    prior: (f64, f64),
    rng: &mut SeededRng,
) -> Vec<Vec<f64>> {
    let mut edges = vec![vec![0.0; k]; k];
    let mut nonedges = vec![vec![0.0; k]; k];
    for (i, j) in obs.dyads() {
        let (mut a, mut b) = (z[i], z[j]);
        if !obs.directed && a > b {
            std::mem::swap(&mut a, &mut b);
        }
        match obs.get(i, j) {
            EDGE => edges[a][b] += 1.0,
            NON_EDGE => nonedges[a][b] += 1.0,
            _ => {}
        }
    }
    let mut m = vec![vec![0.0; k]; k];
    for a in 0..k {
        let start = if obs.directed { 0 } else { a };
        for b in start..k {
            let v = draw_beta(prior.0 + edges[a][b], prior.1 + nonedges[a][b], rng);
            m[a][b] = v;
            if !obs.directed {
                m[b][a] = v;
            }
        }
    }
    m
}

fn update_assignments(
    obs: &Observed,
    z: &mut [usize],
    m: &[Vec<f64>],
    k: usize,
    concentration: f64,
    rng: &mut SeededRng,
) {
    let n = obs.n;
    let log_m: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|x| x.ln()).collect()).collect();
    let log_1m: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|x| (1.0 - x).ln()).collect()).collect();
    let mut sizes = vec![0usize; k];
    for &b in z.iter() {
        sizes[b] += 1;
    }
    let mut out_counts = vec![(0.0f64, 0.0f64); k];
    let mut in_counts = vec![(0.0f64, 0.0f64); k];
    let mut weights = vec![0.0; k];
    for i in 0..n {
        sizes[z[i]] -= 1;
        out_counts.iter_mut().for_each(|c| *c = (0.0, 0.0));
        in_counts.iter_mut().for_each(|c| *c = (0.0, 0.0));
        for j in 0..n {
            if j == i {
                continue;
            }
            match obs.get(i, j) {
                EDGE => out_counts[z[j]].0 += 1.0,
                NON_EDGE => out_counts[z[j]].1 += 1.0,
                _ => {}
            }
            if obs.directed {
                match obs.get(j, i) {
                    EDGE => in_counts[z[j]].0 += 1.0,
                    NON_EDGE => in_counts[z[j]].1 += 1.0,
                    _ => {}
                }
            }
        }
        for a in 0..k {
            let mut w = (sizes[a] as f64 + concentration).ln();
            for b in 0..k {
                let (e, ne) = out_counts[b];
                w += e * log_m[a][b] + ne * log_1m[a][b];
                let (e, ne) = in_counts[b];
                w += e * log_m[b][a] + ne * log_1m[b][a];
            }
            weights[a] = w;
        }
        let max = weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = weights.iter().map(|w| (w - max).exp()).sum();
        let mut u = rng.random::<f64>() * total;
        let mut choice = k - 1;
        for (a, w) in weights.iter().enumerate() {
            u -= (w - max).exp();
            if u <= 0.0 {
                choice = a;
                break;
            }
        }
        z[i] = choice;
        sizes[choice] += 1;
    }
}

fn draw_log_likelihood(obs: &Observed, z: &[usize], m: &[Vec<f64>]) -> f64 {
    obs.dyads()
        .filter_map(|(i, j)| match obs.get(i, j) {
            MISSING => None,
            s => Some(dyad_log_likelihood(m[z[i]][z[j]], s == EDGE)),
        })
        .sum()
}

pub fn fit_sbm(net: &Network, k: usize, priors: &Priors, cfg: &McmcConfig) -> Result<FitResult> {
    priors.validate()?;
    cfg.validate()?;
    let n = net.node_count();
    if k == 0 {
        return Err(Error::fit("sbm", "k must be at least 1"));
    }
    if k > n {
        return Err(Error::fit("sbm", format!("k = {k} exceeds the node count {n}")));
    }
    if net.observed_count() == 0 {
        return Err(Error::fit("sbm", "no observed dyads"));
    }

    let obs = Observed::new(net);
    let mut rng = seeded(cfg.seed);
    let mut z: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
    let mut m = draw_block_matrix(&obs, &z, k, priors.block_beta, &mut rng);
    let initial_loglik = draw_log_likelihood(&obs, &z, &m);

    let mut counts = vec![vec![0usize; k]; n];
    let mut m_sum = vec![vec![0.0; k]; k];
    let mut m_draws: Vec<Vec<Vec<f64>>> = Vec::with_capacity(cfg.draws);
    let mut pred_sum = vec![0.0; n * n];
    let mut loglik_sum = 0.0;
    let mut final_loglik = initial_loglik;
    let mut retained = 0usize;

    for t in 0..cfg.iterations() {
        update_assignments(&obs, &mut z, &m, k, priors.block_concentration, &mut rng);
        m = draw_block_matrix(&obs, &z, k, priors.block_beta, &mut rng);
        if !cfg.retains(t) {
            continue;
        }
        retained += 1;

        let reference: Vec<usize> = if retained == 1 {
            z.clone()
        } else {
            counts.iter().map(|row| argmax_lowest(row)).collect()
        };
        let perm = best_permutation(&z, &reference, k);
        for (i, &b) in z.iter().enumerate() {
            counts[i][perm[b]] += 1;
        }
        let mut permuted = vec![vec![0.0; k]; k];
        for a in 0..k {
            for b in 0..k {
                permuted[perm[a]][perm[b]] = m[a][b];
            }
        }
        for a in 0..k {
            for b in 0..k {
                m_sum[a][b] += permuted[a][b];
            }
        }
        m_draws.push(permuted);

        for (i, j) in obs.dyads() {
            pred_sum[i * n + j] += m[z[i]][z[j]];
        }
        final_loglik = draw_log_likelihood(&obs, &z, &m);
        loglik_sum += final_loglik;
    }

    let r = retained as f64;
    let membership: Vec<Vec<f64>> = counts
        .iter()
        .map(|row| row.iter().map(|&c| c as f64 / r).collect())
        .collect();
    let z_hat: Vec<usize> = counts.iter().map(|row| argmax_lowest(row)).collect();
    let m_hat: Vec<Vec<f64>> = m_sum
        .iter()
        .map(|row| row.iter().map(|s| s / r).collect())
        .collect();
    let mut summary = Vec::with_capacity(k * k);
    for a in 0..k {
        for b in 0..k {
            summary.push(ParamSummary::from_draws(
                format!("M[{},{}]", a + 1, b + 1),
                m_draws.iter().map(|d| d[a][b]),
            ));
        }
    }

    let predictive = FitResult::predictive_from_fn(net, |i, j| pred_sum[i * n + j] / r);
    Ok(FitResult {
        model: ModelTag::Sbm,
        node_count: n,
        directed: net.is_directed(),
        posterior_mean: ModelParams::Sbm(SbmParams { k, z: z_hat, m: m_hat }),
        predictive,
        draws_summary: summary,
        final_loglik,
        initial_loglik,
        mean_draw_loglik: loglik_sum / r,
        membership_probability: Some(membership),
        trace: None,
    })
}

/// Index of the largest entry; ties go to the lowest index.
fn argmax_lowest<T: PartialOrd + Copy>(row: &[T]) -> usize {
    let mut best = 0;
    for (idx, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = idx;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::fit_er;
    use crate::models::sample_network;

    fn planted(n_per_block: usize, within: f64, between: f64, seed: u64) -> (Network, Vec<usize>) {
        let truth: Vec<usize> = (0..2 * n_per_block).map(|i| i / n_per_block).collect();
        let params = ModelParams::Sbm(SbmParams {
            k: 2,
            z: truth.clone(),
            m: vec![vec![within, between], vec![between, within]],
        });
        let net = sample_network(&params, truth.len(), false, &mut seeded(seed)).unwrap();
        (net, truth)
    }

    fn quick() -> McmcConfig {
        McmcConfig { burn_in: 200, draws: 300, ..Default::default() }
    }

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        assert_eq!(argmax_lowest(&[1, 3, 3]), 1);
        assert_eq!(argmax_lowest(&[0.5, 0.5]), 0);
    }

    #[test]
    fn rejects_bad_block_counts() {
        let net = Network::from_edges(3, false, [(0, 1)]).unwrap();
        assert!(fit_sbm(&net, 0, &Priors::default(), &quick()).is_err());
        assert!(fit_sbm(&net, 4, &Priors::default(), &quick()).is_err());
    }

    #[test]
    fn memberships_are_distributions_and_agree_with_z() {
        let (net, _) = planted(10, 0.8, 0.1, 3);
        let fit = fit_sbm(&net, 3, &Priors::default(), &quick()).unwrap();
        let membership = fit.membership_probability.as_ref().unwrap();
        let ModelParams::Sbm(params) = &fit.posterior_mean else { unreachable!() };
        for (row, &z) in membership.iter().zip(&params.z) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert_eq!(z, argmax_lowest(row));
        }
    }

    #[test]
    fn single_block_matches_er() {
        let (net, _) = planted(15, 0.5, 0.2, 8);
        let er = fit_er(&net, &Priors::default(), &quick()).unwrap();
        let sbm = fit_sbm(&net, 1, &Priors::default(), &quick()).unwrap();
        let ModelParams::Er(p) = &er.posterior_mean else { unreachable!() };
        assert!((sbm.predictive(0, 1) - p.p).abs() < 0.01);
    }

    #[test]
    fn directed_planted_partition_is_recovered() {
        let truth: Vec<usize> = (0..30).map(|i| i / 15).collect();
        let params = ModelParams::Sbm(SbmParams {
            k: 2,
            z: truth.clone(),
            m: vec![vec![0.7, 0.05], vec![0.3, 0.6]],
        });
        let net = sample_network(&params, 30, true, &mut seeded(2)).unwrap();
        let fit = fit_sbm(&net, 2, &Priors::default(), &quick()).unwrap();
        let ModelParams::Sbm(est) = &fit.posterior_mean else { unreachable!() };
        let agree = est.z.iter().zip(&truth).filter(|(a, b)| a == b).count();
        assert!(agree.max(30 - agree) >= 28, "agreement {agree}");
    }

    #[test]
    fn deterministic_given_seed() {
        let (net, _) = planted(8, 0.7, 0.1, 5);
        let a = fit_sbm(&net, 2, &Priors::default(), &quick()).unwrap();
        let b = fit_sbm(&net, 2, &Priors::default(), &quick()).unwrap();
        assert_eq!(a, b);
    }
}
