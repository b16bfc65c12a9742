//! Desk-scale hereditarily finite set theory.
//!
//! The crate computes, on concrete finite inputs, the constructions of a set
//! theory with a collapsing axiom: Mostowski collapse of well-founded
//! relations, bisimulations of trees, truth-value trees deciding satisfaction
//! in `(a,∈)`, Δ0 transfinite recursion, clopen games, a relativized Veblen
//! notation system, primitive recursive set functions and finite constructible
//! levels.  Every construction comes with an independent brute-force oracle.

pub mod bisim;
pub mod cli;
pub mod collapse;
pub mod constructible;
pub mod error;
pub mod formula;
pub mod games;
pub mod gen;
pub mod hf;
pub mod prs;
pub mod sexpr;
pub mod tr;
pub mod tree;
pub mod truth;
pub mod veblen;

pub use error::{Error, Result};
pub use hf::HFSet;
