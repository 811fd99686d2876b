//! Conditionally independent dyad network models.
//!
//! * [`graph`]: dense partially observed networks, masking and summary statistics.
//! * [`models`]: Erdős–Rényi, stochastic block, sender–receiver and latent space
//!   models with their edge probabilities, likelihoods and samplers.
//! * [`estimation`]: Bayesian fits on partially observed networks.
//! * [`scv`]: stratified-sampling cross-validation and reference samplers.
//! * [`datasets`]: the bundled network corpus.
//!
//! ```
//! use cidnet::graph::{density, Network};
//!
//! let net = Network::from_edges(4, false, [(0, 1), (1, 2), (2, 3)]).unwrap();
//! assert_eq!(density(&net).unwrap(), 0.5);
//! ```

pub mod datasets;
pub mod error;
pub mod estimation;
pub mod graph;
pub mod models;
pub mod sampling;
pub mod scv;

pub use error::{Error, Result};
