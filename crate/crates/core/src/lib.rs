//! Finite-scale workbench for limit sketches and their models, net-convergence
//! topology, the finite fragment of the sketch of `Top`, frame/CABA duality and
//! the correspondence between truncated Lawvere theories and monads.
//!
//! Every construction is cross-checked against brute-force oracles in the
//! test suites; the `sketchlab` binary runs the acceptance suites.

pub mod cli;
pub mod fincat;
pub mod finsetlim;
pub mod framedual;
pub mod lawmonad;
pub mod nettop;
pub mod order;
pub mod par;
pub mod sketch;
pub mod sketchlib;

pub use par::Exec;
