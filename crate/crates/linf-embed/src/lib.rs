//! Exact isometric embeddings of finite metric spaces into `l∞^k`.
//!
//! Everything here runs on exact rational arithmetic (`BigRational`); no
//! comparison ever goes through floating point. The crate provides:
//!
//! - [`metric`]: validated finite metric spaces, a computable genericity
//!   check (distinct pair-sums within every quadruple), seeded perturbation
//!   and generators for monochromatic spaces;
//! - [`lipschitz`]: 1-Lipschitz functions, their tight graphs, extension to
//!   supersets, edge covers of the complete graph, and the classical
//!   baseline embedding into `l∞^{n-1}`;
//! - [`trees`]: diameter-≤4 trees with a center / main / peripheral
//!   structure, compiled to 1-Lipschitz functions, and the four-path
//!   admissibility criterion;
//! - [`coloring`]: quadruple colors (the strict order of the three pair
//!   sums), monochromatic subset search, and the five-point impossibility
//!   certificate for colors 213 and 312;
//! - [`constructions`]: per-color combinatorial tree covers achieving
//!   dimension gain;
//! - [`embedder`]: the end-to-end pipeline producing verified embeddings
//!   with `k ≤ n − c` coordinates;
//! - [`oracle`]: exact minimal embedding dimension for tiny spaces by
//!   edge-partition enumeration with difference-constraint feasibility;
//! - [`files`]: the line-based file formats used by the CLI.

#![forbid(unsafe_code)]
// Errors here carry exact rational witnesses (tied sums, Lipschitz excesses)
// by design; boxing them would complicate every construction site for no
// benefit at the sizes this crate targets.
#![allow(clippy::result_large_err)]

pub mod coloring;
pub mod constructions;
pub mod embedder;
pub mod files;
pub mod lipschitz;
pub mod metric;
pub mod oracle;
pub mod trees;

pub use num_rational::BigRational;

pub use coloring::QuadColor;
pub use lipschitz::{EdgeCover, Embedding, LipschitzFn};
pub use metric::MetricSpace;

/// Shorthand for building an exact rational from small integers.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}
