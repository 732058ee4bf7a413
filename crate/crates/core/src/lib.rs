#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geom;
pub mod linprog;
pub mod quantile;
pub mod depth;
pub mod metric;
pub mod distr;
pub mod bounds;
pub mod io;
pub mod experiments;

pub use error::{Error, Result};
pub use geom::{Direction, HPolytope, Halfspace, PointCloud, SphereNet};
pub use quantile::LevelSpec;
