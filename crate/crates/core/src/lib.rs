//! Finite-model duality between commutative C*-categories and spaceoids.
//!
//! A commutative C*-category with finite-dimensional Hom-sets is stored by
//! its structure constants ([`cstarcat::FiniteCStarCategory`]). Its spectrum
//! is a [`spaceoid::FiniteSpaceoid`]: a groupoid of partial bijections between
//! the Gel'fand spectra of the diagonal algebras, carrying a unit-modulus
//! line-bundle cocycle. [`functors`] implements the section functor and the
//! spectrum functor on objects and morphisms; [`duality`] implements the two
//! natural isomorphisms between them and the bimodule spectral theorem.

#![allow(clippy::needless_range_loop)]

pub mod cstarcat;
pub mod duality;
pub mod functors;
pub mod harness;
pub mod numlin;
pub mod par;
pub mod report;
pub mod spaceoid;

pub use cstarcat::{FiniteCStarCategory, HilbertBimodule, StarFunctor};
pub use numlin::{CMatrix, Tolerance, C64};
pub use report::ValidationReport;
pub use spaceoid::{FiniteSpaceoid, SpaceoidMorphism};
