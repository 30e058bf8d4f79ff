//! Random graphs with a given degree sequence in the subcritical regime.
//!
//! The crate provides samplers for the configuration model and for uniform
//! simple graphs, the two exploration processes used to bound component sizes,
//! exact lattice-distribution machinery (tilting, convolution, local limit
//! bounds) and an experiment harness that checks the largest-component bounds
//! on finite instances.
//!
//! ```
//! use graphlab::degseq::DegreeSequence;
//!
//! let d = DegreeSequence::new(vec![1, 1, 1, 1, 1, 1, 1, 3]).unwrap();
//! assert_eq!(d.m(), 10);
//! assert!((d.q_value() + 0.4).abs() < 1e-12);
//! assert!((d.r_value() - 1.0).abs() < 1e-12);
//! ```

pub mod cm;
pub mod degseq;
pub mod experiment;
pub mod graph;
pub mod latdist;
pub mod rng;
pub mod um;
pub mod walks;

pub use degseq::DegreeSequence;
pub use graph::{ComponentSummary, MultiGraph};
pub use latdist::LatticeDistribution;

/// Chapters of the guide in `book/`, compiled as doc-tests so the snippets stay in sync.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/degree-sequences.md")]
    pub mod degree_sequences {}
    #[doc = include_str!("../../../book/src/lattice-distributions.md")]
    pub mod lattice_distributions {}
    #[doc = include_str!("../../../book/src/local-limit.md")]
    pub mod local_limit {}
    #[doc = include_str!("../../../book/src/walks.md")]
    pub mod walks {}
    #[doc = include_str!("../../../book/src/configuration-model.md")]
    pub mod configuration_model {}
    #[doc = include_str!("../../../book/src/uniform-model.md")]
    pub mod uniform_model {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    pub mod experiments {}
}
