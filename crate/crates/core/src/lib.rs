//! calab-core: an exact verification bench for filtered modules over finite
//! metric spaces.
//!
//! The crate realizes finite metric spaces with integer word metrics, colored
//! R-disjoint decompositions and their game engine, filtered modules with
//! lean/split/insular constants, controlled and bicontrolled maps with
//! constructive kernel decompositions, and admissible presentations and
//! resolutions — all over exact coefficient rings (ℚ, 𝔽_p, ℤ), so every
//! reported constant and containment is computed, never approximated.

pub mod decomp;
pub mod exec;
pub mod filtered;
pub mod gen;
pub mod linalg;
pub mod metric;
pub mod morphism;
pub mod pointset;
pub mod resolution;
pub mod ring;
pub mod scenario;
pub mod suite;

pub use linalg::{Matrix, Submodule, Vector};
pub use metric::FiniteMetricSpace;
pub use pointset::PointSet;
pub use ring::{Ring, Scalar};
