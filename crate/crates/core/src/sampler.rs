//! Production loop: unconditional transform sampling and conditional
//! sampling from a tile table.

use std::sync::Arc;

use thiserror::Error;

use crate::region::RegionSpec;
use crate::rng::UniformSource;
use crate::tiler::{build_tile_table, TileTable, TilerConfig, TilerError};
use crate::transforms::{TransformMap, UnitPair};

/// Consecutive failed candidates tolerated before giving up.
pub const MAX_CONSECUTIVE_REJECTIONS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SampleError {
    #[error("no acceptable variate after {0} consecutive candidates")]
    Starved(u64),
}

/// Event counts since construction.
///
/// `accepts + rejects` is the number of region tests and
/// `accepts + direct_accepts` the number of emitted variates. `draws` counts
/// every candidate point, including singular ones.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub draws: u64,
    pub accepts: u64,
    pub rejects: u64,
    pub direct_accepts: u64,
    pub singular_redraws: u64,
}

impl Counters {
    pub fn emitted(&self) -> u64 {
        self.accepts + self.direct_accepts
    }

    /// `rejects / (rejects + accepts + direct_accepts)`, zero before any
    /// draw.
    pub fn rejection_rate(&self) -> f64 {
        let all = self.rejects + self.accepts + self.direct_accepts;
        if all == 0 {
            0.0
        } else {
            self.rejects as f64 / all as f64
        }
    }
}

/// Anything that produces a stream of variates.
pub trait VariateStream {
    fn next_variate(&mut self) -> Result<f64, SampleError>;

    fn counters(&self) -> Counters;

    fn fill(&mut self, out: &mut [f64]) -> Result<(), SampleError> {
        for slot in out {
            *slot = self.next_variate()?;
        }
        Ok(())
    }
}

/// One unconditional variate: `u` then `v` from `src`, mapped through
/// `map`. Singular points are redrawn; the number of redraws is returned
/// alongside the value.
pub fn sample_unconditional<S: UniformSource>(map: &TransformMap, src: &mut S) -> Result<(f64, u64), SampleError> {
    let mut redraws = 0;
    loop {
        let u = src.next_unit();
        let v = src.next_unit();
        match map.eval(UnitPair::clamped(u, v)) {
            Ok(x) => return Ok((x, redraws)),
            Err(_) => {
                redraws += 1;
                if redraws >= MAX_CONSECUTIVE_REJECTIONS {
                    return Err(SampleError::Starved(redraws));
                }
            }
        }
    }
}

/// Plain transform sampling over the whole unit square.
#[derive(Debug, Clone)]
pub struct UnconditionalSampler<S> {
    map: TransformMap,
    src: S,
    counters: Counters,
}

impl<S: UniformSource> UnconditionalSampler<S> {
    pub fn new(map: TransformMap, src: S) -> Self {
        Self {
            map,
            src,
            counters: Counters::default(),
        }
    }

    pub fn map(&self) -> &TransformMap {
        &self.map
    }
}

impl<S: UniformSource> VariateStream for UnconditionalSampler<S> {
    #[inline]
    fn next_variate(&mut self) -> Result<f64, SampleError> {
        let (x, redraws) = sample_unconditional(&self.map, &mut self.src)?;
        self.counters.draws += redraws + 1;
        self.counters.singular_redraws += redraws;
        self.counters.direct_accepts += 1;
        Ok(x)
    }

    fn counters(&self) -> Counters {
        self.counters
    }
}

/// Conditional sampling by drawing unconditionally until the region test
/// passes. The baseline the tile table is measured against.
#[derive(Debug, Clone)]
pub struct NaiveConditionalSampler<S> {
    map: TransformMap,
    region: RegionSpec,
    src: S,
    counters: Counters,
}

impl<S: UniformSource> NaiveConditionalSampler<S> {
    pub fn new(map: TransformMap, region: RegionSpec, src: S) -> Self {
        Self {
            map,
            region,
            src,
            counters: Counters::default(),
        }
    }
}

impl<S: UniformSource> VariateStream for NaiveConditionalSampler<S> {
    fn next_variate(&mut self) -> Result<f64, SampleError> {
        let mut streak = 0;
        loop {
            let (x, redraws) = sample_unconditional(&self.map, &mut self.src)?;
            self.counters.draws += redraws + 1;
            self.counters.singular_redraws += redraws;
            if self.region.contains(x) {
                self.counters.accepts += 1;
                return Ok(x);
            }
            self.counters.rejects += 1;
            streak += 1;
            if streak >= MAX_CONSECUTIVE_REJECTIONS {
                return Err(SampleError::Starved(streak));
            }
        }
    }

    fn counters(&self) -> Counters {
        self.counters
    }
}

/// Draws variates conditioned on the table's region.
///
/// Each candidate picks a finest-level tile uniformly, then a uniform point
/// inside it. Points from tiles known to lie inside the region are emitted
/// without a region test; points from intersected tiles are tested and
/// rejected when outside.
#[derive(Debug, Clone)]
pub struct ConditionalSampler<S> {
    table: Arc<TileTable>,
    src: S,
    counters: Counters,
}

impl<S: UniformSource> ConditionalSampler<S> {
    pub fn new(table: Arc<TileTable>, src: S) -> Self {
        Self {
            table,
            src,
            counters: Counters::default(),
        }
    }

    /// Builds the table for `region` and wraps it.
    pub fn for_region(
        map: &TransformMap,
        region: &RegionSpec,
        config: &TilerConfig,
        src: S,
    ) -> Result<Self, TilerError> {
        Ok(Self::new(Arc::new(build_tile_table(map, region, config)?), src))
    }

    pub fn table(&self) -> &Arc<TileTable> {
        &self.table
    }

    #[inline]
    pub fn sample(&mut self) -> Result<f64, SampleError> {
        let map = *self.table.map();
        let mut streak = 0;
        loop {
            let tile = self.table.draw_tile(&mut self.src);
            let pt = self.table.draw_point(tile, &mut self.src);
            self.counters.draws += 1;
            match map.eval(pt) {
                Ok(x) if !tile.intersected => {
                    debug_assert!(
                        self.table.region().contains(x),
                        "direct acceptance of {x} outside {} at ({}, {})",
                        self.table.region(),
                        pt.u(),
                        pt.v()
                    );
                    self.counters.direct_accepts += 1;
                    return Ok(x);
                }
                Ok(x) if self.table.region().contains(x) => {
                    self.counters.accepts += 1;
                    return Ok(x);
                }
                Ok(_) => self.counters.rejects += 1,
                Err(_) => self.counters.singular_redraws += 1,
            }
            streak += 1;
            if streak >= MAX_CONSECUTIVE_REJECTIONS {
                return Err(SampleError::Starved(streak));
            }
        }
    }
}

impl<S: UniformSource> VariateStream for ConditionalSampler<S> {
    #[inline]
    fn next_variate(&mut self) -> Result<f64, SampleError> {
        self.sample()
    }

    fn counters(&self) -> Counters {
        self.counters
    }
}
