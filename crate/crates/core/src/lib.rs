//! Static and kinetic Ising models for daily stock-movement panels.
//!
//! Each stock's open-to-close move is encoded as a spin `s_i(t) = ±1`. The
//! crate fits two complementary models to such a panel:
//!
//! * a static pairwise model `p(s) ∝ exp(Σ h_i s_i + Σ_{i<j} J_ij s_i s_j)`,
//!   trained by Monte Carlo maximum likelihood with a Gibbs sampler (or the
//!   exact enumeration oracle for small panels);
//! * a synchronous kinetic model whose transition law is
//!   `Π_i exp(s_i(t+1) θ_i(t)) / 2cosh θ_i(t)` with a hat-basis time-varying
//!   field, self-memory and directed couplings, trained by penalized
//!   conditional maximum likelihood.
//!
//! The [`network`] module turns fitted couplings into interaction graphs and
//! computes clustering, path length, small-world and sector diagnostics.
//! The [`app`] module wires everything into the `market-ising` command.
//!
//! Runnable walkthroughs of every capability live in the crate's
//! `examples/` directory:
//!
//! ```bash
//! cargo run --release -p market-ising --example static_exact_oracle
//! cargo run --release -p market-ising --example fit_kinetic
//! ```

pub mod app;
pub mod error;
pub mod kinetic;
pub mod network;
pub mod panel;
pub mod rng;
pub mod sector;
pub mod static_model;
pub mod stats;

pub use error::{Error, Result};
pub use panel::{MomentSet, SpinPanel};
pub use sector::{Sector, SectorTable};
