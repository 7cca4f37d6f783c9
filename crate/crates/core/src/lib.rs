//! Noise characterisation of fermionic linear-optics gates by averaged circuit eigenvalue sampling.
//!
//! The crate is `no_std` with `alloc`; enable the default `std` feature for the standard library.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod fermion;
pub mod design;
pub mod estimate;
pub mod kravchuk;
pub mod linalg;
pub mod noise;
pub mod oracle;
pub mod simulate;

pub use error::{FacesError, Result};
