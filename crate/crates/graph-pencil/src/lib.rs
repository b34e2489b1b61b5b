//! Exact subgraph densities for stochastic block models, fast injective
//! subgraph counting on observed graphs, and recovery of block-model
//! parameters from densities via matrix pencils.
//!
//! Module map:
//! - [`glyph`]: the bistar glyph family and its gluing algebra.
//! - [`graph`]: bit-packed undirected graphs and edge-list I/O.
//! - [`sbm`]: model parameters and reproducible sampling.
//! - [`forward`]: exact density evaluation, closed form and brute force.
//! - [`counting`]: injective-homomorphism counting by recursion, with a
//!   jackknife variance estimate.
//! - [`pencil`]: the inference pipeline from densities to parameters.
//! - [`experiment`]: the accuracy-versus-size benchmark harness.

pub mod counting;
pub mod error;
pub mod experiment;
pub mod forward;
pub mod glyph;
pub mod graph;
pub mod pencil;
pub mod sbm;

pub use error::{Error, Result};
pub use glyph::{BistarGlyph, GlyphCombo, Rooting};
pub use graph::UndirectedGraph;
pub use pencil::{infer_sbm, PencilOptions, PencilSolution};
pub use sbm::{sample_graph, SampleConfig, SampledGraph, SbmParams};
