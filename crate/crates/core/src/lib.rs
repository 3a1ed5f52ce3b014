//! Last-success optimal stopping with Poisson arrivals and the
//! Karamata-Stirling success profile `p_k = θ/(θ + k - 1)`.
//!
//! ```
//! use ks_stopping::policy::cutoffs;
//! use ks_stopping::roots::root_table_covering;
//!
//! let table = root_table_covering(1.0, 1e-10, 5.0).unwrap();
//! let spec = cutoffs(5.0, &table).unwrap();
//! assert!(spec.cutoff(1) > spec.cutoff(2));
//! ```

pub mod bounds;
pub mod error;
pub mod poisson;
pub mod policy;
pub mod profile;
mod quadrature;
pub mod roots;
pub mod signs;
pub mod simulator;
pub mod special;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};

#[cfg(doctest)]
mod guide {
    macro_rules! chapter {
        ($name:ident, $file:literal) => {
            #[doc = include_str!(concat!("../../../book/src/", $file))]
            pub struct $name;
        };
    }
    chapter!(Introduction, "introduction.md");
    chapter!(Kummer, "kummer.md");
    chapter!(Rewards, "rewards.md");
    chapter!(Roots, "roots.md");
    chapter!(Bounds, "bounds.md");
    chapter!(Policy, "policy.md");
    chapter!(Simulation, "simulation.md");
    chapter!(Verification, "verification.md");
    chapter!(Cli, "cli.md");

    #[doc = include_str!("../../../README.md")]
    pub struct Readme;
}
