//! Square lattices, polyominoes and region layouts.
//!
//! A [`Lattice`] fixes a frame (origin, axis angle, width). Cells are the
//! half-open squares `[i w, (i+1) w) x [j w, (j+1) w)` in that frame, so every
//! point of the plane belongs to exactly one [`Cell`]. The first index `i`
//! runs along the axis and the second index `j` runs along its left normal;
//! a "row" is a fixed `j`, a "column" a fixed `i`.

mod clip;
mod lattice;
mod layout;
mod polyomino;

pub use clip::{clip_convex, polygon_area};
pub use lattice::{Cell, Lattice, Point, Rect};
pub use layout::{symmetric_difference_area, Region, RegionLayout, SymDiffReport};
pub use polyomino::{fill_gaps, is_edge_connected, min_inscribed_square_side, Polyomino};
