//! Feigenbaum constants to high precision by Chebyshev collocation.
//!
//! [`gsolver`] finds the even Chebyshev model of the universal function `g`
//! and with it α; [`deltasolver`] gets δ from the linearized operator;
//! [`oracle`] is an independent brute-force check and [`pipeline`] ties the
//! pieces into reportable runs.

pub mod chebyshev;
pub mod checkpoint;
pub mod deltasolver;
pub mod error;
pub mod gsolver;
pub mod linalg;
pub mod mpnum;
pub mod oracle;
pub mod pipeline;
pub mod report;

pub use error::{Error, Result};
pub use mpnum::{BigReal, PrecisionContext};
pub use pipeline::{run, RunConfig};
pub use report::{digit_agreement, Constant, RunReport};
