pub mod basis;
pub mod classical;
pub mod config;
pub mod domain;
pub mod error;
pub mod evolve;
pub mod experiment;
pub mod krylov;
pub mod model;
pub mod observables;
pub mod presets;
pub mod pump;
pub mod sparse;
pub mod state;
pub mod topology;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/qxp.md")]
    mod qxp {}
    #[doc = include_str!("../../../book/src/domain.md")]
    mod domain {}
    #[doc = include_str!("../../../book/src/evolution.md")]
    mod evolution {}
    #[doc = include_str!("../../../book/src/ssh.md")]
    mod ssh {}
    #[doc = include_str!("../../../book/src/pump.md")]
    mod pump {}
    #[doc = include_str!("../../../book/src/rydberg.md")]
    mod rydberg {}
    #[doc = include_str!("../../../book/src/classical.md")]
    mod classical {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
