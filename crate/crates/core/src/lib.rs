//! Receptive, effective receptive and projective fields of convolutional chains.
//!
//! The crate computes, for every layer of a linear chain of conv/pool layers,
//! the effective receptive field (bottom-up in one pass, or top-down per
//! layer) and the set of projective-field sizes, and checks all of them
//! against a brute-force connectivity oracle.
//!
//! ```
//! use fieldscope::{calc, parser};
//!
//! let net = parser::parse_dsl("conv 3 s1\nconv 3 s1").unwrap();
//! let trace = calc::erf_bottom_up(&net).unwrap();
//! assert_eq!(trace.network_erf().h, 5);
//! ```

pub mod arch;
pub mod calc;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod oracle;
pub mod par;
pub mod parser;
pub mod random;
pub mod report;

pub use arch::{Axes, Axis, Direction, LayerKind, LayerShape, LayerSpec, NetworkSpec, ValidationReport};
pub use calc::{deconv_view, erf_bottom_up, layer_increment, pf_size_set, rf_top_down};
pub use error::FieldError;
pub use oracle::{backward_influence, check_equivalence, erf_oracle, pf_counts_oracle};
