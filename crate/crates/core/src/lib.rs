//! Exact decomposition of tripartite prime-power qudit stabilizer states
//! into `p`-level GHZ states, EPR pairs and unentangled qudits, with a dense
//! oracle that replays every decomposition.
//!
//! ```
//! use qudit_extract::decompose::{run, EngineConfig};
//! use qudit_extract::groupfile::parse_group;
//!
//! let s = parse_group("d = 9\nparty a = 0\nparty b = 1\nparty c = 2\n\
//!                      gen = X0 X1 X2\ngen = Z0 Z1^8\ngen = Z0 Z2^8\n")?;
//! let report = run(&s, &EngineConfig::default())?;
//! assert_eq!(report.counts.n_ghz, 2);
//! assert!(report.verified_ok());
//! # Ok::<(), qudit_extract::Error>(())
//! ```

pub mod clifford;
pub mod decompose;
pub mod error;
pub mod fixtures;
pub mod groupfile;
pub mod linalg;
pub mod oracle;
pub mod pauli;
pub mod spm;
pub mod stabilizer;

pub use error::{Error, Result};
pub use oracle::{DenseState, DenseState64};
