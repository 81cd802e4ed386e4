//! Spectral conditions for a positive partial transpose under every tensor
//! decomposition.
//!
//! A PSD operator on an `nm`-dimensional space is PPT for every split into
//! `n ⊗ m` factors iff, for each ordering pair in the finite set
//! [`orderings::enumerate_sigma`], the `p x p` matrix `Λ + Λᵀ` built from its
//! eigenvalues is PSD (`p = min(n, m)`). [`lmi::certify_abs_ppt`] runs that
//! test; [`oracle`] holds independent checks and explicit counterexamples.
//!
//! ```
//! use absppt::{certify_abs_ppt, Spectrum, Status};
//!
//! let s = Spectrum::new(&[0.4, 0.3, 0.2, 0.1], 2, 2).unwrap();
//! assert_eq!(certify_abs_ppt(&s, 1e-9).unwrap().status, Status::AbsPpt);
//! ```

pub mod cli;
pub mod error;
pub mod exec;
pub mod feasibility;
pub mod linalg;
pub mod lmi;
pub mod oracle;
pub mod orderings;

pub use error::{Error, Result};
pub use exec::Execution;
pub use linalg::{HermitianMatrix, RectMatrix, Spectrum};
pub use lmi::{certify_abs_ppt, lambda_matrix, quadratic_form, LambdaMatrix, Status, Verdict};
pub use orderings::{enumerate_sigma, IndexPair, OrderingPair, SigmaSet};
