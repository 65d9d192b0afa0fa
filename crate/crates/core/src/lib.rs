//! Numerical checks for variational convexity, variational strong convexity,
//! prox-regularity, tilt stability and second-order sufficiency.
//!
//! The crate is `no_std` (with `alloc`). Every check returns a [`Verdict`];
//! failures carry a replayable witness, while `Holds` means that no violation
//! was found at the stated sampling.

#![no_std]

extern crate alloc;

pub mod composite;
pub mod domain;
pub mod error;
pub mod gallery;
pub mod linalg;
pub mod moreau;
pub mod nlp;
pub mod oracles;
pub mod polyhedral;
pub mod poly;
pub mod varconv;

pub use domain::{
    sample_neighborhood, validate_refpair, ExtValue, ExtendedFn, NeighborhoodSpec, Objective, RefPair,
    SamplingScheme, Status, SubgradientGraph, Verdict, Witness,
};
pub use error::{Error, Result};
pub use linalg::Matrix;
