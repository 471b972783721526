//! A laboratory for random walks on free groups and their quotients.
//!
//! The crate computes entropy, drift, growth and cogrowth of random walks on
//! `F_d`, evaluates Furstenberg entropy exactly on the boundary of the free
//! group, and models sub-σ-algebra lattices on finite probability spaces.

pub mod boundary_calc;
pub mod entropy_lab;
pub mod free_words;
pub mod group_measures;
pub mod growth_cogrowth;
pub mod quotients;
pub mod rng;
pub mod sigma_lattice;

pub use free_words::{Letter, ReducedWord, WordError};
pub use group_measures::{srw, Distribution, FreeGroup, Group, MeasureError};
pub use quotients::{QuotientElement, QuotientRep, QuotientSpec};
