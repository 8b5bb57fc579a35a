//! Degree-by-degree geometry of homogeneous submodules of the finite-rank
//! d-shift Hilbert module (Drury–Arveson space tensored with ℂ^r).
//!
//! A homogeneous submodule decomposes into finite-dimensional degree slices,
//! so angles between submodules, perpendicularity certificates, stable
//! division constants, and essential-normality diagnostics all reduce to
//! dense linear algebra one degree at a time. This crate provides:
//!
//! - [`poly`]: multi-index combinatorics, homogeneous polynomial arithmetic,
//!   and the ambient inner product `⟨z^α, z^β⟩ = δ_{αβ} α!/|α|!`;
//! - [`groebner`]: a small exact-arithmetic Buchberger algorithm;
//! - [`slices`]: degree slices of submodules, projections, shift blocks, and
//!   lattice operations;
//! - [`angles`]: the multi-subspace cosine in three formulations and stable
//!   division constants with minimal-norm decomposition witnesses;
//! - [`perp`]: perpendicularity certificates via commuting projections, frame
//!   operators, the Guo–Wang identity, and syntactic criteria;
//! - [`essnorm`]: commutator blocks, Schatten partial sums, decay fits, and
//!   the decomposition certification pipeline;
//! - [`specfile`], [`report`], [`runner`]: the `dshift` CLI surface.
//!
//! See the book under `book/` for a guided tour; its code snippets are
//! compiled as doc-tests.

pub mod angles;
pub mod essnorm;
pub mod groebner;
pub mod linalg;
pub mod multiindex;
pub mod parse;
pub mod perp;
pub mod poly;
pub mod report;
pub mod runner;
pub mod slices;
pub mod specfile;

mod book;

pub use multiindex::{enumerate_monomials, slice_dimension, MonomialOrder, MonomialOrderKind, MultiIndex};
pub use poly::{da_inner, da_norm, da_weight, da_weight_f64, gram_schmidt_da, HomogPoly, VectorPoly};
pub use slices::{GradedSubmodule, SubspaceSlice};
