//! Sender-receiver model.
//!
//! Probit link: Albert-Chib data augmentation with one truncated-normal
//! latent per observed dyad and conjugate normal updates for the intercept
//! and node effects. Logistic link: component-wise random-walk Metropolis.
//! Undirected networks tie sender and receiver effects into one sociality
//! effect per node.

use rand::Rng;

use crate::error::Result;
use crate::graph::Network;
use crate::models::{dyad_log_likelihood, probit_quantile, LinkKind, ModelParams, ModelTag, SrParams};
use crate::sampling::{probit_latent, seeded, std_normal, SeededRng};

use super::{observed_dyads, require_both_outcomes, FitResult, McmcConfig, ParamSummary, Priors, Trace};

/// Retained draws of the SR coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SrTrace {
    pub beta0: Vec<f64>,
    pub beta_send: Vec<Vec<f64>>,
    pub beta_recv: Vec<Vec<f64>>,
}

struct State {
    beta0: f64,
    send: Vec<f64>,
    recv: Vec<f64>,
}

/// Observed dyads with incidence lists: `out[i]` and `inc[j]` hold dyad indices.
struct Design {
    directed: bool,
    dyads: Vec<(usize, usize, bool)>,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
}

impl Design {
    fn new(net: &Network) -> Self {
        let n = net.node_count();
        let dyads = observed_dyads(net);
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        for (idx, &(i, j, _)) in dyads.iter().enumerate() {
            out[i].push(idx);
            inc[j].push(idx);
        }
        Design { directed: net.is_directed(), dyads, out, inc }
    }

    /// Dyads touching `i` in the tied undirected parameterization.
    fn incident(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.out[i].iter().chain(&self.inc[i]).copied()
    }
}

impl State {
    fn eta(&self, d: &Design, idx: usize) -> f64 {
        let (i, j, _) = d.dyads[idx];
        if d.directed {
            self.beta0 + self.send[i] + self.recv[j]
        } else {
            self.beta0 + self.send[i] + self.send[j]
        }
    }

    fn recentre(&mut self, directed: bool) {
        let n = self.send.len() as f64;
        let s_mean = self.send.iter().sum::<f64>() / n;
        self.send.iter_mut().for_each(|x| *x -= s_mean);
        if directed {
            let r_mean = self.recv.iter().sum::<f64>() / n;
            self.recv.iter_mut().for_each(|x| *x -= r_mean);
            self.beta0 += s_mean + r_mean;
        } else {
            self.beta0 += 2.0 * s_mean;
            self.recv.clone_from(&self.send);
        }
    }

    fn params(&self, link: LinkKind) -> SrParams {
        SrParams {
            beta0: self.beta0,
            beta_send: self.send.clone(),
            beta_recv: self.recv.clone(),
            link,
        }
    }
}

fn loglik(state: &State, d: &Design, link: LinkKind) -> f64 {
    (0..d.dyads.len())
        .map(|idx| dyad_log_likelihood(link.apply(state.eta(d, idx)), d.dyads[idx].2))
        .sum()
}

fn normal_draw(precision: f64, weighted_sum: f64, rng: &mut SeededRng) -> f64 {
    let var = 1.0 / precision;
    weighted_sum * var + var.sqrt() * std_normal(rng)
}

fn probit_sweep(state: &mut State, d: &Design, latent: &mut [f64], priors: &Priors, rng: &mut SeededRng) {
    for idx in 0..d.dyads.len() {
        latent[idx] = probit_latent(state.eta(d, idx), d.dyads[idx].2, rng);
    }

    let node_prec = 1.0 / (priors.node_effect_sd * priors.node_effect_sd);
    let intercept_prec = 1.0 / (priors.intercept_sd * priors.intercept_sd);

    let resid: f64 = (0..d.dyads.len())
        .map(|idx| latent[idx] - (state.eta(d, idx) - state.beta0))
        .sum();
    state.beta0 = normal_draw(d.dyads.len() as f64 + intercept_prec, resid, rng);

    let n = state.send.len();
    if d.directed {
        for i in 0..n {
            let sum: f64 = d.out[i]
                .iter()
                .map(|&idx| latent[idx] - state.beta0 - state.recv[d.dyads[idx].1])
                .sum();
            state.send[i] = normal_draw(d.out[i].len() as f64 + node_prec, sum, rng);
        }
        for j in 0..n {
            let sum: f64 = d.inc[j]
                .iter()
                .map(|&idx| latent[idx] - state.beta0 - state.send[d.dyads[idx].0])
                .sum();
            state.recv[j] = normal_draw(d.inc[j].len() as f64 + node_prec, sum, rng);
        }
    } else {
        for i in 0..n {
            let (mut sum, mut count) = (0.0, 0.0);
            for idx in d.incident(i) {
                let (a, b, _) = d.dyads[idx];
                let other = if a == i { b } else { a };
                sum += latent[idx] - state.beta0 - state.send[other];
                count += 1.0;
            }
            state.send[i] = normal_draw(count + node_prec, sum, rng);
        }
    }
}

/// Metropolis step on one coefficient; `affected` lists the dyads whose
/// linear predictor moves with it.
fn metropolis_update(
    state: &mut State,
    d: &Design,
    link: LinkKind,
    step: f64,
    prior_sd: f64,
    which: Coefficient,
    affected: &[usize],
    rng: &mut SeededRng,
) {
    let current = which.get(state);
    let proposal = current + step * std_normal(rng);
    let delta = proposal - current;
    let mut log_ratio = (current * current - proposal * proposal) / (2.0 * prior_sd * prior_sd);
    for &idx in affected {
        let eta = state.eta(d, idx);
        let edge = d.dyads[idx].2;
        log_ratio += dyad_log_likelihood(link.apply(eta + delta), edge)
            - dyad_log_likelihood(link.apply(eta), edge);
    }
    if rng.random::<f64>().ln() < log_ratio {
        which.set(state, proposal);
    }
}

#[derive(Clone, Copy)]
enum Coefficient {
    Intercept,
    Send(usize),
    Recv(usize),
}

impl Coefficient {
    fn get(self, s: &State) -> f64 {
        match self {
            Coefficient::Intercept => s.beta0,
            Coefficient::Send(i) => s.send[i],
            Coefficient::Recv(j) => s.recv[j],
        }
    }

    fn set(self, s: &mut State, v: f64) {
        match self {
            Coefficient::Intercept => s.beta0 = v,
            Coefficient::Send(i) => s.send[i] = v,
            Coefficient::Recv(j) => s.recv[j] = v,
        }
    }
}

fn logistic_sweep(state: &mut State, d: &Design, priors: &Priors, cfg: &McmcConfig, rng: &mut SeededRng) {
    let all: Vec<usize> = (0..d.dyads.len()).collect();
    let step = cfg.coefficient_step;
    metropolis_update(state, d, LinkKind::Logistic, step, priors.intercept_sd, Coefficient::Intercept, &all, rng);
    let n = state.send.len();
    for i in 0..n {
        if d.directed {
            metropolis_update(state, d, LinkKind::Logistic, step, priors.node_effect_sd, Coefficient::Send(i), &d.out[i], rng);
        } else {
            let incident: Vec<usize> = d.incident(i).collect();
            metropolis_update(state, d, LinkKind::Logistic, step, priors.node_effect_sd, Coefficient::Send(i), &incident, rng);
        }
    }
    if d.directed {
        for j in 0..n {
            metropolis_update(state, d, LinkKind::Logistic, step, priors.node_effect_sd, Coefficient::Recv(j), &d.inc[j], rng);
        }
    }
}

pub fn fit_sr(net: &Network, link: LinkKind, priors: &Priors, cfg: &McmcConfig) -> Result<FitResult> {
    priors.validate()?;
    cfg.validate()?;
    require_both_outcomes(net, "sr")?;
    let n = net.node_count();
    let directed = net.is_directed();
    let design = Design::new(net);
    let mut rng = seeded(cfg.seed);

    let (edges, nonedges) = net.observed_counts();
    let frac = (edges as f64 + 0.5) / (edges + nonedges + 1) as f64;
    let start = match link {
        LinkKind::Probit => probit_quantile(frac),
        LinkKind::Logistic => (frac / (1.0 - frac)).ln(),
    };
    let mut state = State { beta0: start, send: vec![0.0; n], recv: vec![0.0; n] };
    let initial_loglik = loglik(&state, &design, link);

    let mut latent = vec![0.0; design.dyads.len()];
    let mut trace = SrTrace {
        beta0: Vec::with_capacity(cfg.draws),
        beta_send: Vec::with_capacity(cfg.draws),
        beta_recv: Vec::with_capacity(cfg.draws),
    };
    let mut loglik_sum = 0.0;
    let mut final_loglik = initial_loglik;

    for t in 0..cfg.iterations() {
        match link {
            LinkKind::Probit => probit_sweep(&mut state, &design, &mut latent, priors, &mut rng),
            LinkKind::Logistic => logistic_sweep(&mut state, &design, priors, cfg, &mut rng),
        }
        state.recentre(directed);
        if cfg.retains(t) {
            trace.beta0.push(state.beta0);
            trace.beta_send.push(state.send.clone());
            trace.beta_recv.push(state.recv.clone());
            final_loglik = loglik(&state, &design, link);
            loglik_sum += final_loglik;
        }
    }

    let r = trace.beta0.len() as f64;
    let mean_vec = |draws: &[Vec<f64>]| -> Vec<f64> {
        (0..n).map(|i| draws.iter().map(|d| d[i]).sum::<f64>() / r).collect()
    };
    let posterior = State {
        beta0: trace.beta0.iter().sum::<f64>() / r,
        send: mean_vec(&trace.beta_send),
        recv: mean_vec(&trace.beta_recv),
    };

    let mut pred_sum = vec![0.0; n * n];
    for ((b0, send), recv) in trace.beta0.iter().zip(&trace.beta_send).zip(&trace.beta_recv) {
        for d in net.dyads() {
            let eta = b0 + send[d.i] + recv[d.j];
            pred_sum[d.i * n + d.j] += link.apply(eta);
        }
    }

    let mut summary = vec![ParamSummary::from_draws("beta0", trace.beta0.iter().copied())];
    for i in 0..n {
        summary.push(ParamSummary::from_draws(format!("beta_send[{}]", i + 1), trace.beta_send.iter().map(|d| d[i])));
    }
    for i in 0..n {
        summary.push(ParamSummary::from_draws(format!("beta_recv[{}]", i + 1), trace.beta_recv.iter().map(|d| d[i])));
    }

    Ok(FitResult {
        model: ModelTag::Sr,
        node_count: n,
        directed,
        posterior_mean: ModelParams::Sr(posterior.params(link)),
        predictive: FitResult::predictive_from_fn(net, |i, j| pred_sum[i * n + j] / r),
        draws_summary: summary,
        final_loglik,
        initial_loglik,
        mean_draw_loglik: loglik_sum / r,
        membership_probability: None,
        trace: Some(Trace::Sr(trace)),
    })
}
