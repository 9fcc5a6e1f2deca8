//! Transport potentials `u` and transport densities `lambda` for variational
//! problems under a fractional-gradient constraint `|D^s u| <= g`.
//!
//! The library is organised bottom-up:
//!
//! - [`grid`]: the periodic computational box, masks and lattice fields;
//! - [`riesz`]: Riesz kernel constants, spectral and quadrature `D^s`, and the kernel checks;
//! - [`forms`]: the bilinear form, the data functional and coercivity diagnostics;
//! - [`penalty`]: the penalized problem, its Newton solver, continuation and KKT diagnostics;
//! - [`oracle`]: PDHG, a dual QP and closed-form benchmarks;
//! - [`experiment`]: run configs, sweeps and run directories, used by the `fracmk` binary.
//!
//! ```no_run
//! use fracmk::experiment::{run_solve, RunConfig};
//!
//! let cfg = RunConfig::torsion_1d(256).unwrap();
//! let out = run_solve(&cfg, None).unwrap();
//! println!("final violation {}", out.last().kkt.violation_sup);
//! ```

pub mod error;
pub mod experiment;
pub mod forms;
pub mod grid;
pub mod oracle;
pub mod penalty;
pub mod quadrature;
pub mod riesz;
pub mod special;

pub use error::{Error, Result};
