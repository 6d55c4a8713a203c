//! Exact finite laboratory for interpretable Hilbert spaces built over
//! layered equivalence structures.
//!
//! The crate instantiates four families of structures at finite truncation
//! (refining, coarsening, pure set, mixed-depth kernel), embeds them into
//! exact-rational inner-product spaces and computes:
//!
//! * weak closures and their canonical bases ([`weakclosure`]),
//! * the projection order, its mirror order of forking extensions and the
//!   parallelism-class relation,
//! * foundation, V- and Shelah Δ-ranks,
//! * one-basedness via commuting projections, asymptotic freeness,
//!   scatteredness and chain probes.
//!
//! Nothing in the core uses floating point. Infinite behaviour is read off
//! as growth across truncation parameters; see [`runner::sweep`].
//!
//! Start with the runnable programs in `examples/`:
//!
//! ```text
//! cargo run --example refining_closure
//! cargo run --example mixed_kernel_ranks
//! cargo run --example angled_lines
//! ```

pub mod error;
pub mod hilbert;
pub mod matrix;
pub mod runner;
pub mod scalar;
pub mod structures;
pub mod subspaces;
pub mod weakclosure;

pub use error::{Error, Result};
pub use hilbert::{psd_check, GeneratorId, HilbertModel, InnerSpace, PsdVerdict, Vector};
pub use matrix::Matrix;
pub use scalar::Scalar;
pub use structures::{ClassId, CommonLevel, Family, LayeredStructure, PointId, Seed};
pub use subspaces::{alternate, commute_check, Alternation, Subspace};
pub use weakclosure::{Poset, Provenance, RankMap, TypeDef, TypeKind, WeakClosure};
