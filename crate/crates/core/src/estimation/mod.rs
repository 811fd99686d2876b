//! Bayesian estimation of the four models on partially observed networks.
//!
//! Every fit returns a [`FitResult`] whose predictive probabilities are the
//! posterior mean of `p_ij` over retained draws. ER is conjugate and needs no
//! sampler; SBM uses Gibbs sampling; SR and LSM use probit data augmentation
//! (or random-walk Metropolis for the logistic link).

mod er;
mod lsm;
mod mds;
mod relabel;
mod sbm;
mod sr;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{DyadState, Network};
use crate::models::{LinkKind, ModelParams, ModelTag};

pub use er::fit_er;
pub use lsm::{fit_lsm, lsm_predictive, LsmTrace};
pub use mds::classical_mds;
pub use relabel::{best_permutation, permutations};
pub use sbm::fit_sbm;
pub use sr::{fit_sr, SrTrace};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcConfig {
    pub burn_in: usize,
    pub draws: usize,
    pub thin: usize,
    pub seed: u64,
    /// Proposal scale of the latent-position random walk.
    pub metropolis_step: f64,
    /// Proposal scale for coefficients under the logistic link.
    pub coefficient_step: f64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            burn_in: 500,
            draws: 1000,
            thin: 1,
            seed: 0,
            metropolis_step: 0.1,
            coefficient_step: 0.25,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.draws < 10 {
            return Err(Error::Config(format!("draws = {} (need >= 10)", self.draws)));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be >= 1".into()));
        }
        if !(self.metropolis_step > 0.0 && self.coefficient_step > 0.0) {
            return Err(Error::Config("proposal steps must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn iterations(&self) -> usize {
        self.burn_in + self.draws * self.thin
    }

    /// Whether iteration `t` (0-based) is kept.
    pub(crate) fn retains(&self, t: usize) -> bool {
        t >= self.burn_in && (t - self.burn_in + 1) % self.thin == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Priors {
    /// Beta prior on the ER edge probability.
    pub er_beta: (f64, f64),
    /// Beta prior on every SBM block-matrix entry.
    pub block_beta: (f64, f64),
    /// Symmetric Dirichlet concentration over block proportions.
    pub block_concentration: f64,
    pub intercept_sd: f64,
    pub node_effect_sd: f64,
    pub position_sd: f64,
}

impl Default for Priors {
    fn default() -> Self {
        Priors {
            er_beta: (1.0, 1.0),
            block_beta: (1.0, 1.0),
            block_concentration: 1.0,
            intercept_sd: 10.0,
            node_effect_sd: 1.0,
            position_sd: 1.0,
        }
    }
}

impl Priors {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.er_beta.0,
            self.er_beta.1,
            self.block_beta.0,
            self.block_beta.1,
            self.block_concentration,
            self.intercept_sd,
            self.node_effect_sd,
            self.position_sd,
        ];
        if all.iter().all(|&x| x > 0.0 && x.is_finite()) {
            Ok(())
        } else {
            Err(Error::Config("all prior hyperparameters must be positive".into()))
        }
    }
}

/// Which model to fit, with its hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub tag: ModelTag,
    /// Block count, SBM only.
    pub k: Option<usize>,
    /// Latent dimension, LSM only.
    pub d: Option<usize>,
    #[serde(default)]
    pub link: LinkKind,
}

impl ModelSpec {
    pub fn er() -> Self {
        ModelSpec { tag: ModelTag::Er, k: None, d: None, link: LinkKind::Probit }
    }

    pub fn sbm(k: usize) -> Self {
        ModelSpec { tag: ModelTag::Sbm, k: Some(k), ..ModelSpec::er() }
    }

    pub fn sr(link: LinkKind) -> Self {
        ModelSpec { tag: ModelTag::Sr, link, ..ModelSpec::er() }
    }

    pub fn lsm(d: usize, link: LinkKind) -> Self {
        ModelSpec { tag: ModelTag::Lsm, d: Some(d), link, ..ModelSpec::er() }
    }

    pub fn validate(&self) -> Result<()> {
        match self.tag {
            ModelTag::Sbm if self.k.is_none() => Err(Error::Config("SBM needs --k".into())),
            ModelTag::Lsm if self.d.is_none() => Err(Error::Config("LSM needs --d".into())),
            _ => Ok(()),
        }
    }

    /// Short label such as `sbm3`, `lsm2` or `sr`.
    pub fn label(&self) -> String {
        let base = self.tag.name();
        let suffix = match self.tag {
            ModelTag::Sbm => self.k.map(|k| k.to_string()).unwrap_or_default(),
            ModelTag::Lsm => self.d.map(|d| d.to_string()).unwrap_or_default(),
            _ => String::new(),
        };
        let link = match (self.tag, self.link) {
            (ModelTag::Sr | ModelTag::Lsm, LinkKind::Logistic) => "_logistic",
            _ => "",
        };
        format!("{base}{suffix}{link}")
    }
}

impl std::str::FromStr for ModelSpec {
    type Err = Error;

    /// Parses `er`, `sbm:3`, `sr`, `sr:logistic`, `lsm:2`, `lsm:2:logistic`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let tag: ModelTag = parts[0].parse()?;
        let int = |p: Option<&&str>, what: &str| -> Result<usize> {
            p.ok_or_else(|| Error::Config(format!("`{s}`: missing {what}")))?
                .parse()
                .map_err(|_| Error::Config(format!("`{s}`: invalid {what}")))
        };
        let spec = match tag {
            ModelTag::Er if parts.len() == 1 => ModelSpec::er(),
            ModelTag::Sbm if parts.len() == 2 => ModelSpec::sbm(int(parts.get(1), "k")?),
            ModelTag::Sr if parts.len() <= 2 => {
                ModelSpec::sr(parts.get(1).map_or(Ok(LinkKind::Probit), |l| l.parse())?)
            }
            ModelTag::Lsm if (2..=3).contains(&parts.len()) => ModelSpec::lsm(
                int(parts.get(1), "d")?,
                parts.get(2).map_or(Ok(LinkKind::Probit), |l| l.parse())?,
            ),
            _ => return Err(Error::Config(format!("cannot parse model spec `{s}`"))),
        };
        Ok(spec)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
}

impl ParamSummary {
    pub(crate) fn from_draws(name: impl Into<String>, draws: impl IntoIterator<Item = f64>) -> Self {
        let (mut n, mut mean, mut m2) = (0.0, 0.0, 0.0);
        for x in draws {
            n += 1.0;
            let delta = x - mean;
            mean += delta / n;
            m2 += delta * (x - mean);
        }
        let sd = if n > 1.0 { (m2 / (n - 1.0)).sqrt() } else { 0.0 };
        ParamSummary { name: name.into(), mean, sd }
    }
}

/// Per-draw parameter traces kept for post-processing. Not serialized.
#[derive(Clone, Debug, PartialEq)]
pub enum Trace {
    Sr(SrTrace),
    Lsm(LsmTrace),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub model: ModelTag,
    pub node_count: usize,
    pub directed: bool,
    pub posterior_mean: ModelParams,
    /// Dense `n x n` posterior-mean edge probabilities; the diagonal is unused.
    pub(crate) predictive: Vec<f64>,
    pub draws_summary: Vec<ParamSummary>,
    /// Log-likelihood of the last retained draw.
    pub final_loglik: f64,
    /// Log-likelihood of the sampler's starting state.
    pub initial_loglik: f64,
    /// Average log-likelihood over retained draws.
    pub mean_draw_loglik: f64,
    /// Row `i` holds the posterior block probabilities of node `i` (SBM only).
    pub membership_probability: Option<Vec<Vec<f64>>>,
    pub trace: Option<Trace>,
}

impl FitResult {
    pub(crate) fn predictive_from_fn(
        net: &Network,
        mut p: impl FnMut(usize, usize) -> f64,
    ) -> Vec<f64> {
        let n = net.node_count();
        let mut out = vec![0.0; n * n];
        for d in net.dyads() {
            let v = p(d.i, d.j);
            out[d.i * n + d.j] = v;
            if !net.is_directed() {
                out[d.j * n + d.i] = v;
            }
        }
        out
    }

    /// Posterior-mean probability of an edge from `i` to `j`.
    pub fn predictive(&self, i: usize, j: usize) -> f64 {
        self.predictive[i * self.node_count + j]
    }

    /// Every universe dyad with its predictive probability.
    pub fn predictive_list(&self) -> Vec<(usize, usize, f64)> {
        let n = self.node_count;
        (0..n)
            .flat_map(|i| {
                let start = if self.directed { 0 } else { i + 1 };
                (start..n).filter(move |&j| j != i).map(move |j| (i, j))
            })
            .map(|(i, j)| (i, j, self.predictive(i, j)))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl Serialize for FitResult {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry {
            i: usize,
            j: usize,
            p: f64,
        }
        let list: Vec<Entry> = self
            .predictive_list()
            .into_iter()
            .map(|(i, j, p)| Entry { i: i + 1, j: j + 1, p })
            .collect();
        let mut st = s.serialize_struct("FitResult", 10)?;
        st.serialize_field("model", &self.model)?;
        st.serialize_field("node_count", &self.node_count)?;
        st.serialize_field("directed", &self.directed)?;
        st.serialize_field("posterior_mean", &self.posterior_mean)?;
        st.serialize_field("predictive", &list)?;
        st.serialize_field("membership_probability", &self.membership_probability)?;
        st.serialize_field("draws_summary", &self.draws_summary)?;
        st.serialize_field("final_loglik", &self.final_loglik)?;
        st.serialize_field("initial_loglik", &self.initial_loglik)?;
        st.serialize_field("mean_draw_loglik", &self.mean_draw_loglik)?;
        st.end()
    }
}

/// Stored posterior-mean `p_ij`; symmetric for undirected fits.
pub fn predictive_edge_probability(fit: &FitResult, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(Error::domain(format!("self-dyad ({i}, {i}) has no predictive probability")));
    }
    if i >= fit.node_count || j >= fit.node_count {
        return Err(Error::UnknownDyad(i, j));
    }
    Ok(fit.predictive(i, j))
}

/// Fits the model described by `spec`.
pub fn fit(net: &Network, spec: &ModelSpec, priors: &Priors, cfg: &McmcConfig) -> Result<FitResult> {
    spec.validate()?;
    match spec.tag {
        ModelTag::Er => fit_er(net, priors, cfg),
        ModelTag::Sbm => fit_sbm(net, spec.k.unwrap_or(1), priors, cfg),
        ModelTag::Sr => fit_sr(net, spec.link, priors, cfg),
        ModelTag::Lsm => fit_lsm(net, spec.d.unwrap_or(2), spec.link, priors, cfg),
    }
}

/// Observed dyads as `(i, j, is_edge)` in universe order.
pub(crate) fn observed_dyads(net: &Network) -> Vec<(usize, usize, bool)> {
    net.dyad_states()
        .filter(|(_, s)| s.is_observed())
        .map(|(d, s)| (d.i, d.j, s == DyadState::Edge))
        .collect()
}

/// SR and LSM need both outcomes among the observed dyads.
pub(crate) fn require_both_outcomes(net: &Network, model: &'static str) -> Result<()> {
    match net.observed_counts() {
        (0, 0) => Err(Error::fit(model, "no observed dyads")),
        (0, _) => Err(Error::fit(model, "no observed edges (complete separation)")),
        (_, 0) => Err(Error::fit(model, "no observed non-edges (complete separation)")),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_spec_parsing() {
        assert_eq!("er".parse::<ModelSpec>().unwrap(), ModelSpec::er());
        assert_eq!("sbm:3".parse::<ModelSpec>().unwrap(), ModelSpec::sbm(3));
        assert_eq!("sr".parse::<ModelSpec>().unwrap(), ModelSpec::sr(LinkKind::Probit));
        assert_eq!(
            "lsm:2:logistic".parse::<ModelSpec>().unwrap(),
            ModelSpec::lsm(2, LinkKind::Logistic)
        );
        assert!("sbm".parse::<ModelSpec>().is_err());
        assert!("sbm:x".parse::<ModelSpec>().is_err());
        assert!("foo".parse::<ModelSpec>().is_err());
        assert_eq!(ModelSpec::sbm(3).label(), "sbm3");
        assert_eq!(ModelSpec::lsm(2, LinkKind::Logistic).label(), "lsm2_logistic");
    }

    #[test]
    fn config_validation() {
        assert!(McmcConfig::default().validate().is_ok());
        assert!(McmcConfig { draws: 9, ..Default::default() }.validate().is_err());
        assert!(McmcConfig { thin: 0, ..Default::default() }.validate().is_err());
        assert!(Priors { intercept_sd: 0.0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn retained_iterations() {
        let cfg = McmcConfig { burn_in: 3, draws: 4, thin: 2, ..Default::default() };
        let kept: Vec<_> = (0..cfg.iterations()).filter(|&t| cfg.retains(t)).collect();
        assert_eq!(kept, vec![4, 6, 8, 10]);
    }

    #[test]
    fn summary_statistics() {
        let s = ParamSummary::from_draws("x", [1.0, 2.0, 3.0, 4.0]);
        assert!((s.mean - 2.5).abs() < 1e-15);
        assert!((s.sd - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
