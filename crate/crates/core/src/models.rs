//! The four conditionally independent dyad models: parameters, edge
//! probabilities, the observed-data likelihood and generative sampling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DyadState, Network};

/// Inside the likelihood, probabilities are kept this far from 0 and 1.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkKind {
    #[default]
    Probit,
    Logistic,
}

impl LinkKind {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            LinkKind::Probit => std_normal_cdf(x),
            LinkKind::Logistic => logistic(x),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LinkKind::Probit => "probit",
            LinkKind::Logistic => "logistic",
        }
    }
}

impl std::str::FromStr for LinkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "probit" => Ok(LinkKind::Probit),
            "logistic" | "logit" => Ok(LinkKind::Logistic),
            other => Err(Error::Config(format!("unknown link `{other}`"))),
        }
    }
}

/// Standard Gaussian CDF through `erfc`, accurate in both tails.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Inverse of [`std_normal_cdf`]: Acklam's rational approximation refined
/// by one Halley step.
pub fn probit_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383577518672690e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    let low = 0.02425;
    let x = if p < low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = std_normal_cdf(x) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErParams {
    pub p: f64,
}

/// Blocks are 0-based in memory and 1-based in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbmParams {
    pub k: usize,
    #[serde(with = "one_based")]
    pub z: Vec<usize>,
    /// `m[a][b]`: probability of an edge from block `a` to block `b`.
    pub m: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SrParams {
    pub beta0: f64,
    pub beta_send: Vec<f64>,
    pub beta_recv: Vec<f64>,
    #[serde(default)]
    pub link: LinkKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LsmParams {
    pub d: usize,
    pub mu: f64,
    /// One row of `d` coordinates per node.
    pub positions: Vec<Vec<f64>>,
    #[serde(default)]
    pub link: LinkKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelParams {
    Er(ErParams),
    Sbm(SbmParams),
    Sr(SrParams),
    Lsm(LsmParams),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelTag {
    Er,
    Sbm,
    Sr,
    Lsm,
}

impl ModelTag {
    pub fn name(self) -> &'static str {
        match self {
            ModelTag::Er => "er",
            ModelTag::Sbm => "sbm",
            ModelTag::Sr => "sr",
            ModelTag::Lsm => "lsm",
        }
    }
}

impl std::str::FromStr for ModelTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "er" => Ok(ModelTag::Er),
            "sbm" => Ok(ModelTag::Sbm),
            "sr" => Ok(ModelTag::Sr),
            "lsm" => Ok(ModelTag::Lsm),
            other => Err(Error::Config(format!("unknown model `{other}`"))),
        }
    }
}

impl ModelParams {
    pub fn tag(&self) -> ModelTag {
        match self {
            ModelParams::Er(_) => ModelTag::Er,
            ModelParams::Sbm(_) => ModelTag::Sbm,
            ModelParams::Sr(_) => ModelTag::Sr,
            ModelParams::Lsm(_) => ModelTag::Lsm,
        }
    }

    /// Number of nodes the parameters are dimensioned for; `None` for ER.
    pub fn node_count(&self) -> Option<usize> {
        match self {
            ModelParams::Er(_) => None,
            ModelParams::Sbm(p) => Some(p.z.len()),
            ModelParams::Sr(p) => Some(p.beta_send.len()),
            ModelParams::Lsm(p) => Some(p.positions.len()),
        }
    }

    /// Checks the record's internal invariants.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let is_prob = |x: f64| (0.0..=1.0).contains(&x);
        match self {
            ModelParams::Er(p) if !is_prob(p.p) => bad(format!("ER p = {} outside [0, 1]", p.p)),
            ModelParams::Er(_) => Ok(()),
            ModelParams::Sbm(p) => {
                if p.k == 0 {
                    return bad("SBM needs k >= 1".into());
                }
                if p.m.len() != p.k || p.m.iter().any(|r| r.len() != p.k) {
                    return bad(format!("SBM block matrix must be {0}x{0}", p.k));
                }
                if p.m.iter().flatten().any(|&x| !is_prob(x)) {
                    return bad("SBM block matrix entries must lie in [0, 1]".into());
                }
                if let Some(&b) = p.z.iter().find(|&&b| b >= p.k) {
                    return bad(format!("block {} exceeds k = {}", b + 1, p.k));
                }
                Ok(())
            }
            ModelParams::Sr(p) => {
                if p.beta_send.len() != p.beta_recv.len() {
                    return bad("sender and receiver vectors differ in length".into());
                }
                let finite = p.beta0.is_finite()
                    && p.beta_send.iter().chain(&p.beta_recv).all(|x| x.is_finite());
                if !finite {
                    return bad("SR coefficients must be finite".into());
                }
                Ok(())
            }
            ModelParams::Lsm(p) => {
                if p.d == 0 {
                    return bad("LSM needs d >= 1".into());
                }
                if p.positions.iter().any(|r| r.len() != p.d) {
                    return bad(format!("every latent position needs {} coordinates", p.d));
                }
                if !p.mu.is_finite() || p.positions.iter().flatten().any(|x| !x.is_finite()) {
                    return bad("LSM parameters must be finite".into());
                }
                Ok(())
            }
        }
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Probability of an edge from `i` to `j`. For undirected networks callers
/// pass the canonical `i < j` order.
pub fn edge_probability(params: &ModelParams, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(Error::domain(format!(
            "edge probability of self-dyad ({i}, {i}) is not a model quantity"
        )));
    }
    if let Some(n) = params.node_count() {
        if i >= n || j >= n {
            return Err(Error::UnknownDyad(i, j));
        }
    }
    Ok(edge_probability_unchecked(params, i, j))
}

pub(crate) fn edge_probability_unchecked(params: &ModelParams, i: usize, j: usize) -> f64 {
    match params {
        ModelParams::Er(p) => p.p,
        ModelParams::Sbm(p) => p.m[p.z[i]][p.z[j]],
        ModelParams::Sr(p) => p.link.apply(p.beta0 + p.beta_send[i] + p.beta_recv[j]),
        ModelParams::Lsm(p) => p
            .link
            .apply(p.mu - euclidean(&p.positions[i], &p.positions[j])),
    }
}

/// Log-likelihood contribution of one observed dyad.
pub(crate) fn dyad_log_likelihood(p: f64, edge: bool) -> f64 {
    match (p, edge) {
        (x, true) if x == 0.0 => f64::NEG_INFINITY,
        (x, false) if x == 1.0 => f64::NEG_INFINITY,
        (x, _) if x == 0.0 || x == 1.0 => 0.0,
        (x, true) => x.clamp(PROBABILITY_FLOOR, 1.0 - PROBABILITY_FLOOR).ln(),
        (x, false) => (1.0 - x.clamp(PROBABILITY_FLOOR, 1.0 - PROBABILITY_FLOOR)).ln(),
    }
}

fn check_dimensions(params: &ModelParams, net: &Network) -> Result<()> {
    match params.node_count() {
        Some(n) if n != net.node_count() => Err(Error::domain(format!(
            "parameters are dimensioned for {n} nodes, network has {}",
            net.node_count()
        ))),
        _ => Ok(()),
    }
}

/// Sum of Bernoulli log-likelihood terms over observed dyads. Returns
/// `-inf` when an exact 0/1 probability contradicts an observation.
pub fn log_likelihood(params: &ModelParams, net: &Network) -> Result<f64> {
    check_dimensions(params, net)?;
    Ok(net
        .dyad_states()
        .filter(|(_, s)| s.is_observed())
        .map(|(d, s)| {
            dyad_log_likelihood(
                edge_probability_unchecked(params, d.i, d.j),
                s == DyadState::Edge,
            )
        })
        .sum())
}

/// Draws a fully observed network with independent Bernoulli dyads.
pub fn sample_network<R: Rng + ?Sized>(
    params: &ModelParams,
    n: usize,
    directed: bool,
    rng: &mut R,
) -> Result<Network> {
    params.validate()?;
    if n < 2 {
        return Err(Error::domain("sampling needs at least two nodes"));
    }
    if let Some(m) = params.node_count() {
        if m != n {
            return Err(Error::domain(format!(
                "parameters are dimensioned for {m} nodes, requested {n}"
            )));
        }
    }
    let mut net = Network::empty(n, directed);
    let dyads: Vec<_> = net.dyads().collect();
    for d in dyads {
        let p = edge_probability_unchecked(params, d.i, d.j);
        if rng.random::<f64>() < p {
            net.set(d.i, d.j, DyadState::Edge);
        }
    }
    Ok(net)
}

mod one_based {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(z: &[usize], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(z.iter().map(|b| b + 1))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<usize>, D::Error> {
        let raw = Vec::<usize>::deserialize(d)?;
        raw.into_iter()
            .map(|b| {
                b.checked_sub(1)
                    .ok_or_else(|| D::Error::custom("block labels start at 1"))
            })
            .collect()
    }
}
