//! The bundled network corpus.
//!
//! Layout under the data directory:
//!
//! ```text
//! manifest.txt            name,file,sha256,nodes,edges,density,reciprocity,directed,preprocess
//! <name>/edges.csv        source,target[,weight]
//! <name>/nodes.txt        optional node order, one label per line
//! ```
//!
//! A checksum of `-` skips verification. Loaded networks are compared with
//! the published summary statistics and rejected if they disagree.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{density, parse_edge_list, reciprocity, Network, ParseOptions};

pub const DATA_DIR_ENV: &str = "CIDNET_DATA_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preprocess {
    AsIs,
    /// Drop weights, keeping every edge.
    Flatten,
    /// Keep only edges whose weight is in the list.
    KeepWeights(&'static [u32]),
}

impl Preprocess {
    pub fn tag(self) -> &'static str {
        match self {
            Preprocess::AsIs => "as_is",
            Preprocess::Flatten => "flatten",
            Preprocess::KeepWeights([1, 2, 3]) => "keep_weights_1_2_3",
            Preprocess::KeepWeights([4, 5]) => "keep_weights_4_5",
            Preprocess::KeepWeights(_) => "keep_weights",
        }
    }
}

/// Published summary statistics. Density and reciprocity are kept as printed
/// so comparisons can honour the printed precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ExpectedStats {
    pub nodes: usize,
    pub edges: usize,
    pub density: &'static str,
    pub reciprocity: &'static str,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DatasetDescriptor {
    pub name: &'static str,
    pub directed: bool,
    pub preprocessing: Preprocess,
    pub expected: ExpectedStats,
}

const fn d(
    name: &'static str,
    directed: bool,
    preprocessing: Preprocess,
    nodes: usize,
    edges: usize,
    density: &'static str,
    reciprocity: &'static str,
) -> DatasetDescriptor {
    DatasetDescriptor {
        name,
        directed,
        preprocessing,
        expected: ExpectedStats { nodes, edges, density, reciprocity },
    }
}

/// The six main networks followed by the four supplementary ones.
pub const DATASETS: [DatasetDescriptor; 10] = [
    d("highschool", true, Preprocess::Flatten, 70, 366, "0.076", "0.503"),
    d("karate", false, Preprocess::AsIs, 34, 78, "0.139", "1"),
    d("oxford", true, Preprocess::Flatten, 19, 41, "0.120", "0.195"),
    d("freshmen", true, Preprocess::KeepWeights(&[1, 2, 3]), 29, 282, "0.347", "0.567"),
    d("dolphins", false, Preprocess::AsIs, 62, 159, "0.084", "1"),
    d("twitter", false, Preprocess::AsIs, 96, 117, "0.026", "1"),
    d("enron", true, Preprocess::AsIs, 151, 266, "0.012", "0.075"),
    d("students_coop", false, Preprocess::AsIs, 185, 360, "0.021", "1"),
    d("residence_hall", true, Preprocess::KeepWeights(&[4, 5]), 209, 900, "0.0207", "0.529"),
    d("divorce", false, Preprocess::AsIs, 59, 225, "0.132", "1"),
];

pub fn descriptor(name: &str) -> Result<&'static DatasetDescriptor> {
    DATASETS
        .iter()
        .find(|d| d.name == name)
        .ok_or_else(|| Error::UnknownDataset(name.to_string()))
}

/// `CIDNET_DATA_DIR` if set, otherwise the repository's `data/` directory.
pub fn default_data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data")))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub name: String,
    pub file: String,
    pub sha256: Option<String>,
    pub nodes: usize,
    pub edges: usize,
    pub density: String,
    pub reciprocity: String,
    pub directed: bool,
    pub preprocess: String,
}

pub fn read_manifest(data_dir: &Path) -> Result<HashMap<String, ManifestEntry>> {
    let path = data_dir.join("manifest.txt");
    let text = fs::read_to_string(&path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::DatasetMissing { name: "manifest".into(), path: path.clone() },
        _ => Error::Io(e),
    })?;
    let mut out = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| Error::Parse { line: idx + 1, message };
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 9 {
            return Err(bad(format!("manifest row needs 9 fields, got {}", f.len())));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("invalid count `{s}`")));
        let entry = ManifestEntry {
            name: f[0].to_string(),
            file: f[1].to_string(),
            sha256: (f[2] != "-").then(|| f[2].to_lowercase()),
            nodes: int(f[3])?,
            edges: int(f[4])?,
            density: f[5].to_string(),
            reciprocity: f[6].to_string(),
            directed: f[7].parse().map_err(|_| bad(format!("invalid flag `{}`", f[7])))?,
            preprocess: f[8].to_string(),
        };
        out.insert(entry.name.clone(), entry);
    }
    Ok(out)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Whether `value` agrees with a printed figure, at the printed precision
/// but never coarser than three decimals.
pub fn matches_printed(value: f64, printed: &str) -> bool {
    let decimals = printed.split_once('.').map_or(0, |(_, frac)| frac.len()).max(3);
    let Ok(target) = printed.parse::<f64>() else {
        return false;
    };
    format!("{value:.decimals$}") == format!("{target:.decimals$}")
}

/// Loads a bundled dataset from the default data directory.
pub fn load_bundled(name: &str) -> Result<Network> {
    load_bundled_from(&default_data_dir(), name)
}

pub fn load_bundled_from(data_dir: &Path, name: &str) -> Result<Network> {
    let desc = descriptor(name)?;
    let integrity = |message: String| Error::DatasetIntegrity { name: name.to_string(), message };
    let manifest = read_manifest(data_dir)?;
    let entry = manifest
        .get(name)
        .ok_or_else(|| integrity("no manifest entry".into()))?;
    if entry.directed != desc.directed
        || entry.nodes != desc.expected.nodes
        || entry.edges != desc.expected.edges
        || entry.density != desc.expected.density
        || entry.reciprocity != desc.expected.reciprocity
        || entry.preprocess != desc.preprocessing.tag()
    {
        return Err(integrity("manifest row disagrees with the dataset descriptor".into()));
    }

    let path = data_dir.join(&entry.file);
    let bytes = fs::read(&path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::DatasetMissing { name: name.to_string(), path: path.clone() },
        _ => Error::Io(e),
    })?;
    if let Some(expected) = &entry.sha256 {
        let actual = sha256_hex(&bytes);
        if &actual != expected {
            return Err(integrity(format!("checksum mismatch: expected {expected}, found {actual}")));
        }
    }
    let text = String::from_utf8(bytes).map_err(|_| integrity("edge list is not UTF-8".into()))?;

    let nodes_path = path.with_file_name("nodes.txt");
    let node_labels = match fs::read_to_string(&nodes_path) {
        Ok(t) => Some(
            t.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(String::from)
                .collect(),
        ),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(e.into()),
    };
    let weight_filter: Option<crate::graph::WeightFilter> = match desc.preprocessing {
        Preprocess::KeepWeights(keep) => Some(Box::new(move |w: f64| keep.iter().any(|&k| f64::from(k) == w))),
        Preprocess::AsIs | Preprocess::Flatten => None,
    };
    let options = ParseOptions {
        directed: desc.directed,
        weight_filter,
        node_count_hint: Some(desc.expected.nodes),
        node_labels,
    };
    let net = parse_edge_list(&text, &options)?;

    let stats = summary_stats(&net)?;
    let ok = stats.nodes == desc.expected.nodes
        && stats.edges == desc.expected.edges
        && matches_printed(stats.density, desc.expected.density)
        && matches_printed(stats.reciprocity, desc.expected.reciprocity);
    if !ok {
        return Err(integrity(format!(
            "loaded stats {} differ from expected ({}, {}, {}, {})",
            stats.row(name),
            desc.expected.nodes,
            desc.expected.edges,
            desc.expected.density,
            desc.expected.reciprocity
        )));
    }
    Ok(net)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SummaryStats {
    pub nodes: usize,
    pub edges: usize,
    pub density: f64,
    pub reciprocity: f64,
}

impl SummaryStats {
    /// `name,nodes,edges,density,reciprocity` with three decimals.
    pub fn row(&self, name: &str) -> String {
        format!("{name},{},{},{:.3},{:.3}", self.nodes, self.edges, self.density, self.reciprocity)
    }
}

pub fn summary_stats(net: &Network) -> Result<SummaryStats> {
    Ok(SummaryStats {
        nodes: net.node_count(),
        edges: net.edge_count(),
        density: density(net)?,
        reciprocity: reciprocity(net)?,
    })
}

/// Association strength `X / (X + (Ya + Yb) / 2)`: `x` sightings together,
/// `ya` and `yb` sightings of each animal apart.
pub fn half_weight_index(x: u64, ya: u64, yb: u64) -> Result<f64> {
    if x + ya + yb == 0 {
        return Err(Error::domain("half-weight index of three zero counts"));
    }
    let x = x as f64;
    Ok(x / (x + 0.5 * (ya + yb) as f64))
}
