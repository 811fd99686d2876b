//! Adjacency-matrix networks with missing-dyad support.
//!
//! A [`Network`] stores one state per dyad: an edge, a non-edge, or
//! missing. Undirected networks key every dyad on `i < j`; the matrix is kept
//! symmetric so lookups never need to canonicalize.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DyadState {
    NonEdge,
    Edge,
    Missing,
}

impl DyadState {
    pub fn is_observed(self) -> bool {
        self != DyadState::Missing
    }
}

/// A pair of distinct nodes. For undirected networks `i < j` always holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Dyad {
    pub i: usize,
    pub j: usize,
}

impl Dyad {
    pub fn new(i: usize, j: usize) -> Self {
        Dyad { i, j }
    }

    /// Orders the pair as `i < j`.
    pub fn canonical(self) -> Self {
        if self.i <= self.j {
            self
        } else {
            Dyad::new(self.j, self.i)
        }
    }
}

impl fmt::Display for Dyad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.i, self.j)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    n: usize,
    directed: bool,
    states: Vec<DyadState>,
    labels: Option<Vec<String>>,
}

impl Network {
    /// An edgeless, fully observed network on `n` nodes.
    pub fn empty(n: usize, directed: bool) -> Self {
        Network {
            n,
            directed,
            states: vec![DyadState::NonEdge; n * n],
            labels: None,
        }
    }

    /// Builds a fully observed network from an edge list of 0-based indices.
    pub fn from_edges(
        n: usize,
        directed: bool,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut net = Network::empty(n, directed);
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::UnknownDyad(i, j));
            }
            if i == j {
                return Err(Error::domain(format!("self-loop on node {i}")));
            }
            net.set(i, j, DyadState::Edge);
        }
        Ok(net)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::domain(format!(
                "{} labels supplied for {} nodes",
                labels.len(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of node `i`, or its 1-based index when the network is unlabelled.
    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(l) => l[i].clone(),
            None => (i + 1).to_string(),
        }
    }

    /// State of the dyad `(i, j)`. Panics when `i == j` or an index is out of range.
    pub fn state(&self, i: usize, j: usize) -> DyadState {
        assert!(i != j, "self-dyad ({i}, {i}) has no state");
        self.states[i * self.n + j]
    }

    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.states[i * self.n + j] == DyadState::Edge
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, state: DyadState) {
        self.states[i * self.n + j] = state;
        if !self.directed {
            self.states[j * self.n + i] = state;
        }
    }

    pub fn contains_dyad(&self, d: Dyad) -> bool {
        d.i < self.n && d.j < self.n && d.i != d.j && (self.directed || d.i < d.j)
    }

    /// Number of dyads in the universe: `n(n-1)` directed, `n(n-1)/2` undirected.
    pub fn dyad_count(&self) -> usize {
        let ordered = self.n * self.n.saturating_sub(1);
        if self.directed {
            ordered
        } else {
            ordered / 2
        }
    }

    /// Every dyad in lexicographic order.
    pub fn dyads(&self) -> impl Iterator<Item = Dyad> + '_ {
        let n = self.n;
        let directed = self.directed;
        (0..n).flat_map(move |i| {
            let start = if directed { 0 } else { i + 1 };
            (start..n).filter(move |&j| j != i).map(move |j| Dyad::new(i, j))
        })
    }

    pub fn dyad_states(&self) -> impl Iterator<Item = (Dyad, DyadState)> + '_ {
        self.dyads().map(move |d| (d, self.state(d.i, d.j)))
    }

    pub fn edges(&self) -> impl Iterator<Item = Dyad> + '_ {
        self.dyad_states()
            .filter(|(_, s)| *s == DyadState::Edge)
            .map(|(d, _)| d)
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    pub fn missing_count(&self) -> usize {
        self.dyad_states()
            .filter(|(_, s)| *s == DyadState::Missing)
            .count()
    }

    pub fn observed_count(&self) -> usize {
        self.dyad_count() - self.missing_count()
    }

    pub fn is_fully_observed(&self) -> bool {
        !self.states.contains(&DyadState::Missing)
    }

    /// Observed (edges, non-edges).
    pub fn observed_counts(&self) -> (usize, usize) {
        self.dyad_states().fold((0, 0), |(e, ne), (_, s)| match s {
            DyadState::Edge => (e + 1, ne),
            DyadState::NonEdge => (e, ne + 1),
            DyadState::Missing => (e, ne),
        })
    }

    /// Neighbours of `i` over observed edges, ignoring direction.
    pub(crate) fn undirected_neighbours(&self, i: usize) -> Vec<usize> {
        (0..self.n)
            .filter(|&j| j != i && (self.is_edge(i, j) || self.is_edge(j, i)))
            .collect()
    }
}

/// Every dyad of `net` in deterministic lexicographic order.
pub fn dyad_universe(net: &Network) -> Vec<Dyad> {
    net.dyads().collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledDyad {
    pub dyad: Dyad,
    pub edge: bool,
}

/// Held-out dyads together with their true labels.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DyadSet {
    dyads: Vec<LabeledDyad>,
    edge_count: usize,
    nonedge_count: usize,
}

impl DyadSet {
    pub fn new(dyads: Vec<LabeledDyad>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(dyads.len());
        for d in &dyads {
            if !seen.insert(d.dyad) {
                return Err(Error::domain(format!("duplicate dyad {}", d.dyad)));
            }
        }
        let edge_count = dyads.iter().filter(|d| d.edge).count();
        Ok(DyadSet {
            nonedge_count: dyads.len() - edge_count,
            edge_count,
            dyads,
        })
    }

    /// Labels each dyad from a fully observed network.
    pub fn from_network(net: &Network, dyads: impl IntoIterator<Item = Dyad>) -> Result<Self> {
        let labeled = dyads
            .into_iter()
            .map(|d| {
                if !net.contains_dyad(d) {
                    return Err(Error::UnknownDyad(d.i, d.j));
                }
                match net.state(d.i, d.j) {
                    DyadState::Missing => Err(Error::AlreadyMissing(d.i, d.j)),
                    s => Ok(LabeledDyad {
                        dyad: d,
                        edge: s == DyadState::Edge,
                    }),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        DyadSet::new(labeled)
    }

    pub fn dyads(&self) -> &[LabeledDyad] {
        &self.dyads
    }

    pub fn len(&self) -> usize {
        self.dyads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dyads.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn nonedge_count(&self) -> usize {
        self.nonedge_count
    }
}

/// Copy of `net` with every dyad of `mask` set to missing.
pub fn apply_mask(net: &Network, mask: &DyadSet) -> Result<Network> {
    let mut out = net.clone();
    for ld in mask.dyads() {
        let d = ld.dyad;
        if !net.contains_dyad(d) {
            return Err(Error::UnknownDyad(d.i, d.j));
        }
        if out.state(d.i, d.j) == DyadState::Missing {
            return Err(Error::AlreadyMissing(d.i, d.j));
        }
        out.set(d.i, d.j, DyadState::Missing);
    }
    Ok(out)
}

/// Inverse of [`apply_mask`]: fills masked dyads back in from their labels.
pub fn restore_mask(net: &Network, mask: &DyadSet) -> Result<Network> {
    let mut out = net.clone();
    for ld in mask.dyads() {
        let d = ld.dyad;
        if !net.contains_dyad(d) {
            return Err(Error::UnknownDyad(d.i, d.j));
        }
        let state = if ld.edge {
            DyadState::Edge
        } else {
            DyadState::NonEdge
        };
        out.set(d.i, d.j, state);
    }
    Ok(out)
}

fn require_observed(net: &Network, stat: &str) -> Result<()> {
    if net.is_fully_observed() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{stat} is defined only for fully observed networks"
        )))
    }
}

/// `2|E| / n(n-1)` for undirected networks, `|E| / n(n-1)` for directed ones.
pub fn density(net: &Network) -> Result<f64> {
    if net.node_count() < 2 {
        return Err(Error::domain("density needs at least two nodes"));
    }
    require_observed(net, "density")?;
    Ok(net.edge_count() as f64 / net.dyad_count() as f64)
}

/// Share of directed edges whose reverse edge also exists. Undirected
/// networks are expanded into their symmetric ordered form.
pub fn reciprocity(net: &Network) -> Result<f64> {
    require_observed(net, "reciprocity")?;
    if !net.is_directed() {
        return if net.edge_count() == 0 {
            Err(Error::domain("reciprocity of an edgeless network"))
        } else {
            Ok(1.0)
        };
    }
    let (mut mutual, mut total) = (0usize, 0usize);
    for d in net.edges() {
        total += 1;
        if net.is_edge(d.j, d.i) {
            mutual += 1;
        }
    }
    if total == 0 {
        return Err(Error::domain("reciprocity of an edgeless network"));
    }
    Ok(mutual as f64 / total as f64)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Degrees {
    pub in_degree: Vec<usize>,
    pub out_degree: Vec<usize>,
}

/// Row and column sums of the adjacency matrix. Missing dyads count as absent.
pub fn degrees(net: &Network) -> Degrees {
    let n = net.node_count();
    let mut in_degree = vec![0; n];
    let mut out_degree = vec![0; n];
    for i in 0..n {
        for j in 0..n {
            if net.is_edge(i, j) {
                out_degree[i] += 1;
                in_degree[j] += 1;
            }
        }
    }
    Degrees {
        in_degree,
        out_degree,
    }
}

/// Accepts or rejects an edge by its weight.
pub type WeightFilter = Box<dyn Fn(f64) -> bool + Send + Sync>;

#[derive(Default)]
pub struct ParseOptions {
    pub directed: bool,
    pub weight_filter: Option<WeightFilter>,
    /// Total node count, including isolated nodes absent from the edge list.
    pub node_count_hint: Option<usize>,
    /// Explicit node order; overrides the hint.
    pub node_labels: Option<Vec<String>>,
}

impl ParseOptions {
    pub fn directed(directed: bool) -> Self {
        ParseOptions {
            directed,
            ..Default::default()
        }
    }
}

/// Parses `source,target[,weight]` records. Lines starting with `#`, blank
/// lines and a leading `source,target` header are skipped; weights only
/// decide whether an edge is kept.
pub fn parse_edge_list(text: &str, options: &ParseOptions) -> Result<Network> {
    let mut records: Vec<(usize, String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if records.is_empty() && fields.starts_with(&["source", "target"]) {
            continue;
        }
        if !(2..=3).contains(&fields.len()) || fields[0].is_empty() || fields[1].is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected `source,target[,weight]`, got `{line}`"),
            });
        }
        let weight = match fields.get(2) {
            Some(w) => w.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid weight `{w}`"),
            })?,
            None => 1.0,
        };
        if fields[0] == fields[1] {
            return Err(Error::SelfLoop {
                line: line_no,
                node: fields[0].to_string(),
            });
        }
        if let Some(filter) = &options.weight_filter {
            if !filter(weight) {
                continue;
            }
        }
        records.push((line_no, fields[0].to_string(), fields[1].to_string()));
    }

    let labels = node_order(&records, options)?;
    let index: HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let mut net = Network::empty(labels.len(), options.directed);
    for (line, s, t) in &records {
        let lookup = |id: &String| {
            index.get(id.as_str()).copied().ok_or_else(|| Error::Parse {
                line: *line,
                message: format!("node `{id}` is not in the node list"),
            })
        };
        let (i, j) = (lookup(s)?, lookup(t)?);
        net.set(i, j, DyadState::Edge);
    }
    net.labels = Some(labels);
    Ok(net)
}

fn node_order(records: &[(usize, String, String)], options: &ParseOptions) -> Result<Vec<String>> {
    if let Some(list) = &options.node_labels {
        let mut seen = HashSet::new();
        for l in list {
            if !seen.insert(l.as_str()) {
                return Err(Error::domain(format!("duplicate node `{l}` in node list")));
            }
        }
        return Ok(list.clone());
    }

    let mut order: Vec<String> = Vec::new();
    let mut seen = HashSet::new();
    for (_, s, t) in records {
        for id in [s, t] {
            if seen.insert(id.clone()) {
                order.push(id.clone());
            }
        }
    }

    let numeric: Option<Vec<i64>> = order.iter().map(|s| s.parse::<i64>().ok()).collect();
    match (numeric, options.node_count_hint) {
        (Some(mut ids), hint) => {
            ids.sort_unstable();
            let Some(hint) = hint else {
                return Ok(ids.iter().map(i64::to_string).collect());
            };
            // Integer identifiers are read as a contiguous range starting at
            // 1 (or 0 when a zero id appears).
            let base = if ids.first() == Some(&0) { 0 } else { 1 };
            let last = base + hint as i64 - 1;
            if let Some(bad) = ids.iter().find(|&&id| id < base || id > last) {
                return Err(Error::domain(format!(
                    "node {bad} lies outside the hinted range {base}..={last}"
                )));
            }
            Ok((base..=last).map(|id| id.to_string()).collect())
        }
        (None, Some(hint)) if hint != order.len() => Err(Error::domain(
            "a node count hint with non-integer identifiers needs an explicit node list",
        )),
        (None, _) => Ok(order),
    }
}
