//! Exact piecewise-linear dynamics on finite metric trees.

pub mod cli;
pub mod config;
pub mod equicontinuity;
pub mod error;
pub mod examples;
pub mod grid;
pub mod limits;
pub mod map;
pub mod orbit;
pub mod rational;
pub mod report;
pub mod region;
pub mod tree;

pub use error::{Error, Result};
pub use rational::Rational;
pub use region::{FixedSet, Piece, Region, Subtree};
pub use tree::{MetricTree, TreePoint};
pub use map::{EdgePlan, PLSelfMap};
