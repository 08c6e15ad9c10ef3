//! A (1+ε)-approximation scheme for the traveling-salesman problem on points
//! in the plane, built around a randomly shifted dissection of a bounding
//! square, a compressed quadtree over that dissection, and a dynamic program
//! that stitches portal-respecting tour fragments across quadtree cells.
//!
//! The crate exposes the full pipeline as a library (see [`run`]) plus the
//! individual stages for testing and experimentation:
//!
//! * [`geometry`] — input snapping onto a power-of-two integer grid,
//!   distances, tours.
//! * [`baseline`] — a constant-factor start tour (spanning-tree doubling)
//!   whose cost calibrates the dynamic program's pruning bounds.
//! * [`quadtree`] — shifted dissection, Morton-order construction of the
//!   compressed quadtree, dummy-vertex normalization.
//! * [`portals`] — power-of-two portal grids on cell sides and the
//!   crossing-dependent portal sets the dynamic program draws from.
//! * [`crossing`] — for every (cell, side) pair, a crossing point of the
//!   start tour with that side, found by two tree passes.
//! * [`dp`] — the dynamic program over portal configurations and its
//!   tour extraction.
//! * [`oracle`] — exact solvers for small instances (used for validation).
//! * [`io`] / [`svg`] — instance parsing and diagram output.

pub mod baseline;
pub mod crossing;
pub mod dp;
pub mod geometry;
pub mod io;
pub mod num;
pub mod oracle;
pub mod portals;
pub mod quadtree;
pub mod run;
pub mod svg;

pub use run::{run, Mode, RunConfig, RunError, RunStats};
