//! Discrete coarse geometry over banded ray-spaces and finite sets.
//!
//! Infinite objects are described symbolically: subsets of a ray are
//! ultimately periodic ([`upset::UpSet`]), relations are finite unions of
//! bands and rectangles ([`entourage::Relation`]), maps are eventually
//! affine ([`coarsemap::EAMap`]), and coarse structures are descriptor trees
//! with membership procedures ([`structures::Structure`]).

pub mod category;
pub mod coarsemap;
pub mod entourage;
pub mod error;
pub mod finite;
pub mod ground;
pub mod upset;
pub mod structures;
pub mod verdict;
pub mod window;

pub use error::{CoarseError, Result};
