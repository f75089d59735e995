//! Exact machinery for counting perfect `r`-th power values of polynomials.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs: power-residue characters and finite fields,
//! sparse integer polynomials, smooth bump weights and box counts, the
//! `r`-th power sieve, van der Corput differencing of character sums,
//! complete exponential sums and point counts of singular loci.
//!
//! IO, configuration and report files live in the `powersieve` crate.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod arith;
pub mod budget;
pub mod character;
pub mod charsum;
pub mod counting;
pub mod error;
pub mod ext_field;
pub mod field;
pub mod geometry;
pub mod lattice;
pub mod poly;
pub mod rng;
pub mod rootsum;
pub mod sieve;
pub mod vdc;
pub mod weight;

pub use budget::Budget;
pub use character::{CharValue, CompositeCharacter, PowerCharacter, Turn};
pub use error::{Error, Result};
pub use ext_field::ExtField;
pub use field::PrimeField;
pub use poly::MultiPoly;
pub use weight::{BumpWeight, Weight};
