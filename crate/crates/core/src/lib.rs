//! Conditional sampling of heavy-tailed variates by tiling the unit square
//! of a two-uniform transform map.
//!
//! A transform map `(u, v) -> X` turns two independent uniforms into a
//! stable or Mittag-Leffler variate. To sample `X` conditioned on a region of
//! the real line, the unit square is refined into tiles classified as inside,
//! outside or on the boundary of the pre-image of the region; sampling then
//! only draws from tiles that can produce an accepted value.

// `!(x > 0.0)` style guards deliberately reject NaN along with the range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod oracle;
pub mod region;
pub mod rng;
pub mod sampler;
pub mod tiler;
pub mod transforms;
pub mod validate;

pub use oracle::{LowerTailCdf, OracleError, QuadratureSpec, TabulatedCdf};
pub use region::{Interval, RegionError, RegionSpec};
pub use tiler::{build_tile_table, TileTable, TilerConfig, TilerError, LEVEL_LIMIT};
pub use sampler::{ConditionalSampler, Counters, NaiveConditionalSampler, SampleError, UnconditionalSampler, VariateStream};
pub use rng::{Shr3, UniformSource, DEFAULT_SEED};
pub use transforms::{MlParams, ParamError, Singular, StableParams, TransformMap, UnitPair};
