//! Setup stage: a table of equal square tiles covering the part of the unit
//! square that a transform map sends into a region.
//!
//! Tiles at level `L` are `[i, i+1] x [j, j+1] / 2^L`, with `i` along `u`
//! and `j` along `v`. Refinement starts from a coarse level and splits only
//! boundary tiles. A tile found entirely inside the region is not split
//! further; it is stored once as a block that stands for all of its
//! finest-level descendants. Selection is uniform over those descendants, so
//! sampling behaves exactly as with a flat list of equal tiles while memory
//! stays proportional to the boundary.

mod format;

pub use format::{read_table, write_table, FormatError, FORMAT_MAGIC, FORMAT_VERSION};

use rayon::prelude::*;
use thiserror::Error;

use crate::region::RegionSpec;
use crate::rng::UniformSource;
use crate::transforms::{Singular, TransformMap, UnitPair};

/// Deepest level the table layout supports (`4^31` tiles fit in a `u64`).
pub const LEVEL_LIMIT: u32 = 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TileClass {
    Inside,
    Outside,
    Boundary,
}

/// A finest-level tile of a table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Tile {
    pub i: u32,
    pub j: u32,
    /// Set when draws from this tile must be tested against the region.
    pub intersected: bool,
}

/// `(u0, u1, v0, v1)` of tile `(i, j)` at `level`.
pub fn tile_bounds(level: u32, i: u32, j: u32) -> (f64, f64, f64, f64) {
    let s = (-(level as f64)).exp2();
    (i as f64 * s, (i + 1) as f64 * s, j as f64 * s, (j + 1) as f64 * s)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TilerError {
    #[error("region is unreachable: no tile of the unit square maps into it")]
    EmptyRegion,
    #[error("invalid tiler configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TilerConfig {
    /// Refinement stops once the boundary share of the kept area is at most
    /// this value.
    pub target_rejection: f64,
    pub max_level: u32,
    pub start_level: u32,
    /// Lines of constant `v` probed per tile in the first pass, both ends
    /// included. Tiles that agree are checked again on
    /// `2 * (probes_per_edge - 1) + 1` lines.
    pub probes_per_edge: u32,
    /// Refinement also stops when the boundary grows beyond this many tiles.
    pub max_boundary_tiles: usize,
}

impl TilerConfig {
    pub fn new(target_rejection: f64, max_level: u32) -> Self {
        Self {
            target_rejection,
            max_level,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), TilerError> {
        if !(self.target_rejection > 0.0 && self.target_rejection < 1.0) {
            return Err(TilerError::InvalidConfig("target_rejection must lie in (0, 1)"));
        }
        if self.max_level < 2 || self.max_level > LEVEL_LIMIT {
            return Err(TilerError::InvalidConfig("max_level must lie in [2, 31]"));
        }
        if self.start_level < 1 || self.start_level > self.max_level {
            return Err(TilerError::InvalidConfig("start_level must lie in [1, max_level]"));
        }
        if self.probes_per_edge < 2 {
            return Err(TilerError::InvalidConfig("probes_per_edge must be at least 2"));
        }
        Ok(())
    }
}

impl Default for TilerConfig {
    fn default() -> Self {
        Self {
            target_rejection: 0.01,
            max_level: 20,
            start_level: 2,
            probes_per_edge: 3,
            max_boundary_tiles: 1 << 24,
        }
    }
}

/// Progress of one refinement level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelStats {
    pub level: u32,
    pub boundary_tiles: usize,
    /// Area of all inside blocks found so far.
    pub inside_area: f64,
    pub est_rejection: f64,
}

/// Which connected piece of the line `x` falls in: `2k + 1` for the `k`-th
/// interval, `2k` for the gap below it.
fn component(region: &RegionSpec, x: f64) -> usize {
    for (k, iv) in region.intervals().iter().enumerate() {
        if iv.contains(x) {
            return 2 * k + 1;
        }
        let (lo, _) = iv.endpoints();
        if x <= lo {
            return 2 * k;
        }
    }
    2 * region.intervals().len()
}

#[derive(Debug, Clone, Copy)]
struct Probed {
    class: TileClass,
    any_in: bool,
}

/// Running agreement of probe values with a single region component.
#[derive(Debug, Clone, Copy, Default)]
struct Agreement {
    first: Option<usize>,
    mixed: bool,
    any_in: bool,
}

impl Agreement {
    fn add<'a>(&mut self, region: &RegionSpec, values: impl IntoIterator<Item = &'a Result<f64, Singular>>) {
        for value in values {
            match value {
                Ok(x) => {
                    let c = component(region, *x);
                    self.any_in |= c % 2 == 1;
                    match self.first {
                        None => self.first = Some(c),
                        Some(f) => self.mixed |= f != c,
                    }
                }
                Err(_) => self.mixed = true,
            }
        }
    }

    fn probed(&self, quarantined: bool) -> Probed {
        let class = match self.first {
            _ if self.mixed || quarantined => TileClass::Boundary,
            Some(c) if c % 2 == 1 => TileClass::Inside,
            _ => TileClass::Outside,
        };
        Probed {
            class,
            any_in: self.any_in,
        }
    }
}

/// Values of the map on the lattice `us x vs`, with `vs` given as
/// fractions of one tile height above row `j`.
fn lattice(
    map: &TransformMap,
    level: u32,
    us: &[f64],
    j: u32,
    fractions: impl Iterator<Item = f64>,
) -> (usize, Vec<Result<f64, Singular>>) {
    let s = (-(level as f64)).exp2();
    let vs: Vec<f64> = fractions.map(|f| (j as f64 + f) * s).collect();
    let mut values = Vec::with_capacity(us.len() * vs.len());
    map.eval_lattice(us, &vs, &mut values);
    (vs.len(), values)
}

/// Probes the four children of tile `(pi, pj)` at `level - 1`, returned in
/// the order `(2pi, 2pj)`, `(2pi+1, 2pj)`, `(2pi, 2pj+1)`, `(2pi+1, 2pj+1)`.
///
/// Each child is probed on both of its `u` edges along `lines` equally spaced
/// lines of constant `v`; siblings share edges and lines. Every map is
/// monotone in `u` for fixed `v`, so the two edge values bound the map on the
/// whole segment of each line inside the tile. Children that agree are
/// probed again on `2 * (lines - 1) + 1` lines.
fn probe_family(map: &TransformMap, region: &RegionSpec, level: u32, pi: u32, pj: u32, lines: u32) -> [Probed; 4] {
    let s = (-(level as f64)).exp2();
    let us = [(2 * pi) as f64 * s, (2 * pi + 1) as f64 * s, (2 * pi + 2) as f64 * s];
    let n = (lines - 1) as usize;
    let (nv, coarse) = lattice(map, level, &us, 2 * pj, (0..=2 * n).map(|m| m as f64 / n as f64));
    let mut acc = [Agreement::default(); 4];
    let mut quarantined = [false; 4];
    for (c, (da, db)) in [(0, 0), (1, 0), (0, 1), (1, 1)].into_iter().enumerate() {
        quarantined[c] = map.touches_singularity(level, 2 * pi + da as u32, 2 * pj + db as u32);
        for a in [da, da + 1] {
            acc[c].add(region, &coarse[a * nv + db * n..=a * nv + (db + 1) * n]);
        }
    }
    let needs_fine: [bool; 4] = std::array::from_fn(|c| !acc[c].mixed && !quarantined[c]);
    for db in 0..2 {
        let (left, right) = (2 * db, 2 * db + 1);
        if !needs_fine[left] && !needs_fine[right] {
            continue;
        }
        let between = (0..n).map(|k| (2 * k + 1) as f64 / (2 * n) as f64);
        let (nf, fine) = lattice(map, level, &us, 2 * pj + db as u32, between);
        for (c, da) in [(left, 0), (right, 1)] {
            if needs_fine[c] {
                for a in [da, da + 1] {
                    acc[c].add(region, &fine[a * nf..(a + 1) * nf]);
                }
            }
        }
    }
    std::array::from_fn(|c| acc[c].probed(quarantined[c]))
}

/// Classifies tile `(i, j)` at `level` from probes on both `u` edges along
/// `probes_per_edge` equally spaced lines of constant `v`, corners included.
/// Since the map is monotone in `u`, these bound every value on those lines.
///
/// Inside and Outside require every probe to land in the same interval
/// (respectively the same gap) of the region, no singular evaluation, and a
/// tile clear of the map's singular points. Anything else is Boundary.
pub fn classify_tile(
    map: &TransformMap,
    region: &RegionSpec,
    level: u32,
    i: u32,
    j: u32,
    probes_per_edge: u32,
) -> TileClass {
    assert!(probes_per_edge >= 2, "probes_per_edge must be at least 2");
    let s = (-(level as f64)).exp2();
    let us = [i as f64 * s, (i + 1) as f64 * s];
    let last = (probes_per_edge - 1) as f64;
    let (_, values) = lattice(map, level, &us, j, (0..probes_per_edge).map(|k| k as f64 / last));
    let mut acc = Agreement::default();
    acc.add(region, &values);
    acc.probed(map.touches_singularity(level, i, j)).class
}

/// Refines until the estimated rejection rate meets `config.target_rejection`
/// or `config.max_level` is reached; in the latter case the table is
/// returned with [`TileTable::converged`] unset.
///
/// A tile is accepted as Inside or Outside only when its probes agree on
/// `2 * (probes_per_edge - 1) + 1` lines; the first `probes_per_edge` of
/// them are checked alone first so that most boundary tiles are rejected
/// cheaply.
pub fn build_tile_table(
    map: &TransformMap,
    region: &RegionSpec,
    config: &TilerConfig,
) -> Result<TileTable, TilerError> {
    config.validate()?;
    let per_edge = config.probes_per_edge;
    let mut level = config.start_level;
    let n0 = 1u32 << (level - 1);
    // Tiles one level up whose children are probed next.
    let mut parents: Vec<(u32, u32)> = (0..n0).flat_map(|i| (0..n0).map(move |j| (i, j))).collect();
    let mut blocks: Vec<(u32, u32, u32)> = Vec::new();
    let mut inside_area = 0.0;
    let mut saw_in = false;
    let mut history = Vec::new();
    loop {
        let probed: Vec<[Probed; 4]> = parents
            .par_iter()
            .map(|&(pi, pj)| probe_family(map, region, level, pi, pj, per_edge))
            .collect();
        let tile_area = (-2.0 * level as f64).exp2();
        let mut boundary = Vec::new();
        for (&(pi, pj), family) in parents.iter().zip(&probed) {
            for (c, p) in family.iter().enumerate() {
                let (i, j) = (2 * pi + (c as u32 & 1), 2 * pj + (c as u32 >> 1));
                saw_in |= p.any_in;
                match p.class {
                    TileClass::Inside => {
                        blocks.push((level, i, j));
                        inside_area += tile_area;
                    }
                    TileClass::Boundary => boundary.push((i, j)),
                    TileClass::Outside => {}
                }
            }
        }
        let boundary_area = boundary.len() as f64 * tile_area;
        let kept = boundary_area + inside_area;
        let est = if kept > 0.0 { boundary_area / kept } else { 1.0 };
        history.push(LevelStats {
            level,
            boundary_tiles: boundary.len(),
            inside_area,
            est_rejection: est,
        });
        let converged = kept > 0.0 && est <= config.target_rejection;
        let out_of_room = 4 * boundary.len() > config.max_boundary_tiles;
        if converged || level >= config.max_level || out_of_room || kept == 0.0 {
            if inside_area == 0.0 && !saw_in {
                return Err(TilerError::EmptyRegion);
            }
            let mut all: Vec<Block> = blocks
                .iter()
                .map(|&(l, i, j)| Block {
                    depth: level - l,
                    i,
                    j,
                    intersected: false,
                })
                .collect();
            all.extend(boundary.iter().map(|&(i, j)| Block {
                depth: 0,
                i,
                j,
                intersected: true,
            }));
            // Refinement never revisits a tile, so blocks are disjoint by construction.
            let mut table = TileTable::assemble(*map, region.clone(), level, est, converged, all)
                .expect("refinement produces a consistent table");
            table.history = history;
            return Ok(table);
        }
        parents = boundary;
        level += 1;
    }
}

/// A square of `4^depth` finest-level tiles sharing one flag; `(i, j)` are
/// coordinates at level `table level - depth`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Block {
    pub depth: u32,
    pub i: u32,
    pub j: u32,
    pub intersected: bool,
}

#[derive(Debug, Clone, Copy)]
struct Group {
    depth: u32,
    intersected: bool,
    start: usize,
    len: usize,
    first_tile: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TableError {
    #[error("table level {0} exceeds the supported maximum")]
    Level(u32),
    #[error("block {0:?} lies outside the unit square or below the table level")]
    Block(Block),
    #[error("blocks overlap or repeat")]
    Overlap,
    #[error("table has no tiles")]
    Empty,
}

/// Immutable output of [`build_tile_table`]; cheap to share between
/// threads.
#[derive(Debug, Clone)]
pub struct TileTable {
    map: TransformMap,
    region: RegionSpec,
    level: u32,
    est_rejection: f64,
    converged: bool,
    groups: Vec<Group>,
    coords: Vec<(u32, u32)>,
    total_tiles: u64,
    history: Vec<LevelStats>,
}

impl TileTable {
    /// Assembles a table from blocks, checking that they lie in the unit
    /// square and do not overlap.
    pub fn from_blocks(
        map: TransformMap,
        region: RegionSpec,
        level: u32,
        est_rejection: f64,
        converged: bool,
        blocks: Vec<Block>,
    ) -> Result<Self, TableError> {
        let table = Self::assemble(map, region, level, est_rejection, converged, blocks)?;
        if !table.blocks_disjoint() {
            return Err(TableError::Overlap);
        }
        Ok(table)
    }

    /// As [`TileTable::from_blocks`] without the overlap check.
    fn assemble(
        map: TransformMap,
        region: RegionSpec,
        level: u32,
        est_rejection: f64,
        converged: bool,
        mut blocks: Vec<Block>,
    ) -> Result<Self, TableError> {
        if level > LEVEL_LIMIT {
            return Err(TableError::Level(level));
        }
        if blocks.is_empty() {
            return Err(TableError::Empty);
        }
        for b in &blocks {
            if b.depth > level || u64::from(b.i.max(b.j)) >> (level - b.depth) != 0 {
                return Err(TableError::Block(*b));
            }
        }
        blocks.sort_unstable_by_key(|b| (b.depth, b.intersected, b.i, b.j));
        let mut groups: Vec<Group> = Vec::new();
        let mut coords = Vec::with_capacity(blocks.len());
        let mut total: u64 = 0;
        for b in &blocks {
            match groups.last_mut() {
                Some(g) if g.depth == b.depth && g.intersected == b.intersected => g.len += 1,
                _ => groups.push(Group {
                    depth: b.depth,
                    intersected: b.intersected,
                    start: coords.len(),
                    len: 1,
                    first_tile: total,
                }),
            }
            coords.push((b.i, b.j));
            total += 1u64 << (2 * b.depth);
        }
        Ok(Self {
            map,
            region,
            level,
            est_rejection,
            converged,
            groups,
            coords,
            total_tiles: total,
            history: Vec::new(),
        })
    }

    fn blocks_disjoint(&self) -> bool {
        // Every block must be absent from, and not contained in, any block
        // of the same or a larger depth.
        for (gi, g) in self.groups.iter().enumerate() {
            let own = &self.coords[g.start..g.start + g.len];
            if own.windows(2).any(|w| w[0] == w[1]) {
                return false;
            }
            for &(i, j) in own {
                for (hi, h) in self.groups.iter().enumerate() {
                    if hi == gi || h.depth < g.depth {
                        continue;
                    }
                    let shift = h.depth - g.depth;
                    if self.group_contains(h, i >> shift, j >> shift) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn group_contains(&self, g: &Group, i: u32, j: u32) -> bool {
        self.coords[g.start..g.start + g.len].binary_search(&(i, j)).is_ok()
    }

    pub fn map(&self) -> &TransformMap {
        &self.map
    }

    pub fn region(&self) -> &RegionSpec {
        &self.region
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Boundary share of the kept area: an upper bound on the rejection
    /// rate of the sampler.
    pub fn est_rejection(&self) -> f64 {
        self.est_rejection
    }

    /// False when refinement stopped before reaching the target.
    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Per-level refinement record; empty for tables read from disk.
    pub fn history(&self) -> &[LevelStats] {
        &self.history
    }

    /// Number of finest-level tiles.
    pub fn tile_count(&self) -> u64 {
        self.total_tiles
    }

    pub fn intersected_count(&self) -> u64 {
        self.groups
            .iter()
            .filter(|g| g.intersected)
            .map(|g| (g.len as u64) << (2 * g.depth))
            .sum()
    }

    pub fn block_count(&self) -> usize {
        self.coords.len()
    }

    pub fn blocks(&self) -> impl Iterator<Item = Block> + '_ {
        self.groups.iter().flat_map(move |g| {
            self.coords[g.start..g.start + g.len].iter().map(move |&(i, j)| Block {
                depth: g.depth,
                i,
                j,
                intersected: g.intersected,
            })
        })
    }

    /// Area of the unit square covered by the table.
    pub fn kept_area(&self) -> f64 {
        self.total_tiles as f64 * (-2.0 * self.level as f64).exp2()
    }

    /// The `k`-th finest-level tile, `0 <= k < tile_count()`.
    #[inline]
    pub fn tile(&self, k: u64) -> Tile {
        debug_assert!(k < self.total_tiles);
        let mut g = &self.groups[0];
        for next in &self.groups[1..] {
            if next.first_tile > k {
                break;
            }
            g = next;
        }
        let off = k - g.first_tile;
        let d = g.depth;
        let (bi, bj) = self.coords[g.start + (off >> (2 * d)) as usize];
        let sub = off & ((1u64 << (2 * d)) - 1);
        let mask = (1u64 << d) - 1;
        Tile {
            i: (bi << d) | (sub & mask) as u32,
            j: (bj << d) | (sub >> d) as u32,
            intersected: g.intersected,
        }
    }

    /// All finest-level tiles, in index order.
    pub fn tiles(&self) -> impl Iterator<Item = Tile> + '_ {
        (0..self.total_tiles).map(move |k| self.tile(k))
    }

    /// Uniformly chosen tile. Uses one 64-bit draw; the modulo bias is below
    /// `tile_count / 2^64`.
    #[inline]
    pub fn draw_tile<S: UniformSource>(&self, src: &mut S) -> Tile {
        self.tile(src.next_u64() % self.total_tiles)
    }

    /// Uniform point inside `tile`, from two fresh unit draws.
    #[inline]
    pub fn draw_point<S: UniformSource>(&self, tile: Tile, src: &mut S) -> UnitPair {
        let s = (-(self.level as f64)).exp2();
        let u = (tile.i as f64 + src.next_unit()) * s;
        let v = (tile.j as f64 + src.next_unit()) * s;
        UnitPair::clamped(u, v)
    }

    /// The kept tile containing `(u, v)`, if any.
    pub fn lookup(&self, u: f64, v: f64) -> Option<Tile> {
        let n = (1u64 << self.level) as f64;
        let fi = ((u * n) as u64).min((1u64 << self.level) - 1) as u32;
        let fj = ((v * n) as u64).min((1u64 << self.level) - 1) as u32;
        self.groups
            .iter()
            .find(|g| self.group_contains(g, fi >> g.depth, fj >> g.depth))
            .map(|g| Tile {
                i: fi,
                j: fj,
                intersected: g.intersected,
            })
    }
}

/// Monte Carlo estimate of a region probability from a table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Estimates `P(X ∈ region)` as kept area times the fraction of uniform
/// points in kept tiles whose image lies in the region. Every point is
/// tested, including those in inside blocks.
pub fn table_area_estimate<S: UniformSource>(table: &TileTable, samples: u64, src: &mut S) -> AreaEstimate {
    assert!(samples >= 1, "samples must be at least 1");
    let mut hits = 0u64;
    for _ in 0..samples {
        let tile = table.draw_tile(src);
        let pt = table.draw_point(tile, src);
        if let Ok(x) = table.map.eval(pt) {
            hits += u64::from(table.region.contains(x));
        }
    }
    let p = hits as f64 / samples as f64;
    let area = table.kept_area();
    AreaEstimate {
        value: area * p,
        std_error: area * (p * (1.0 - p) / samples as f64).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Shr3;
    use crate::transforms::{MlParams, StableParams};
    use std::collections::HashSet;

    fn stable(alpha: f64, beta: f64) -> TransformMap {
        TransformMap::Stable(StableParams::standard(alpha, beta).unwrap())
    }

    fn below(x: f64) -> RegionSpec {
        RegionSpec::below(x).unwrap()
    }

    #[test]
    fn component_indices() {
        let r: RegionSpec = "(-inf,-1] U [1,2) U (3,inf)".parse().unwrap();
        assert_eq!(component(&r, -5.0), 1);
        assert_eq!(component(&r, 0.0), 2);
        assert_eq!(component(&r, 1.0), 3);
        assert_eq!(component(&r, 2.0), 4);
        assert_eq!(component(&r, 3.0), 4);
        assert_eq!(component(&r, 3.5), 5);
    }

    #[test]
    fn inside_tile_is_inside_everywhere() {
        let map = stable(1.8, 0.0);
        let region = below(-1.0);
        let level = 5;
        let n = 1u32 << level;
        let mut found = 0;
        for i in 0..n {
            for j in 0..n {
                if classify_tile(&map, &region, level, i, j, 3) != TileClass::Inside {
                    continue;
                }
                found += 1;
                let (u0, u1, v0, v1) = tile_bounds(level, i, j);
                for a in 0..=40 {
                    for b in 0..=40 {
                        let u = u0 + (u1 - u0) * a as f64 / 40.0;
                        let v = v0 + (v1 - v0) * b as f64 / 40.0;
                        let x = map.eval(UnitPair::clamped(u, v)).unwrap();
                        assert!(x <= -1.0, "tile ({i},{j}) point ({u},{v}) -> {x}");
                    }
                }
            }
        }
        assert!(found > 0);
    }

    #[test]
    fn singular_corner_tile_is_boundary() {
        let map = stable(1.5, 0.0);
        let region = below(-1.0);
        for level in [2, 6, 12] {
            let last = (1u32 << level) - 1;
            assert_eq!(classify_tile(&map, &region, level, 0, last, 3), TileClass::Boundary);
            assert_eq!(classify_tile(&map, &region, level, last, last, 3), TileClass::Boundary);
        }
    }

    #[test]
    fn tile_straddling_isoline_is_boundary() {
        let map = stable(1.8, 0.0);
        let u = 0.5;
        let f = |v: f64| map.eval(UnitPair::clamped(u, v)).unwrap() + 1.0;
        // F is increasing in v at fixed u; bisect for F = -1.
        let (mut lo, mut hi) = (1e-6, 0.5);
        assert!(f(lo) < 0.0 && f(hi) > 0.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let level = 10;
        let n = (1u32 << level) as f64;
        let (i, j) = ((u * n) as u32, (lo * n) as u32);
        assert_eq!(classify_tile(&map, &below(-1.0), level, i, j, 3), TileClass::Boundary);
    }

    #[test]
    fn box_muller_half_plane_keeps_half() {
        let t = build_tile_table(&stable(2.0, 0.0), &below(0.0), &TilerConfig::new(0.01, 16)).unwrap();
        assert!(t.converged());
        // X <= 0 exactly when v <= 1/2; the boundary row sits on v = 1/2.
        let boundary = t.intersected_count() as f64 * (-2.0 * t.level() as f64).exp2();
        assert!((t.kept_area() - 0.5).abs() <= boundary + 1e-12, "{}", t.kept_area());
    }

    #[test]
    fn refinement_is_monotone_and_meets_target() {
        let t = build_tile_table(&stable(1.8, 0.0), &below(-1.0), &TilerConfig::new(0.05, 20)).unwrap();
        assert!(t.converged());
        assert!(t.est_rejection() <= 0.05);
        let h = t.history();
        assert!(h.windows(2).all(|w| w[1].est_rejection <= w[0].est_rejection));
        assert_eq!(h.last().unwrap().est_rejection, t.est_rejection());
    }

    #[test]
    fn tile_indexing_is_a_bijection() {
        let t = build_tile_table(&stable(1.3, 0.2), &below(-2.0), &TilerConfig::new(0.2, 7)).unwrap();
        let tiles: Vec<Tile> = t.tiles().collect();
        assert_eq!(tiles.len() as u64, t.tile_count());
        let set: HashSet<(u32, u32)> = tiles.iter().map(|t| (t.i, t.j)).collect();
        assert_eq!(set.len(), tiles.len());
        for tile in &tiles {
            let (u0, _, v0, _) = tile_bounds(t.level(), tile.i, tile.j);
            let s = (-(t.level() as f64)).exp2();
            assert_eq!(t.lookup(u0 + 0.5 * s, v0 + 0.5 * s), Some(*tile));
        }
        assert_eq!(tiles.iter().filter(|t| t.intersected).count() as u64, t.intersected_count());
    }

    #[test]
    fn built_tables_have_disjoint_blocks() {
        for (map, region) in [
            (stable(1.8, 0.0), RegionSpec::below(-12.0).unwrap()),
            (stable(0.7, 0.6), "(-inf,-3] U [-0.5,0.5] U (4,inf)".parse().unwrap()),
        ] {
            let t = build_tile_table(&map, &region, &TilerConfig::new(0.01, 16)).unwrap();
            assert!(t.blocks_disjoint());
        }
    }

    #[test]
    fn kept_tiles_cover_the_region() {
        let map = stable(1.5, 0.0);
        let region: RegionSpec = "(-inf,-3] U [0.5,1]".parse().unwrap();
        let t = build_tile_table(&map, &region, &TilerConfig::new(0.02, 18)).unwrap();
        let mut src = Shr3::new(99).unwrap();
        for _ in 0..200_000 {
            let pt = UnitPair::clamped(src.next_unit(), src.next_unit());
            let x = map.eval(pt).unwrap();
            let hit = t.lookup(pt.u(), pt.v());
            if region.contains(x) {
                assert!(hit.is_some(), "missed ({}, {}) -> {x}", pt.u(), pt.v());
            }
            if let Some(tile) = hit {
                if !tile.intersected {
                    assert!(region.contains(x));
                }
            }
        }
    }

    #[test]
    fn cauchy_area_estimate() {
        let t = build_tile_table(&stable(1.0, 0.0), &below(1.0), &TilerConfig::new(0.01, 16)).unwrap();
        let mut src = Shr3::new(5).unwrap();
        let est = table_area_estimate(&t, 200_000, &mut src);
        assert!((est.value - 0.75).abs() < 4.0 * est.std_error + 1e-9, "{est:?}");
    }

    #[test]
    fn mittag_leffler_rows_are_quarantined() {
        let map = TransformMap::MittagLeffler(MlParams::new(0.9).unwrap());
        let region = RegionSpec::above(10.0).unwrap();
        let t = build_tile_table(&map, &region, &TilerConfig::new(0.01, 18)).unwrap();
        assert!(t.converged());
        let last = (1u32 << t.level()) - 1;
        for i in [0, 7, last] {
            for j in [0, last] {
                let s = (-(t.level() as f64)).exp2();
                let tile = t.lookup((i as f64 + 0.5) * s, (j as f64 + 0.5) * s).unwrap();
                assert!(tile.intersected);
            }
        }
    }

    #[test]
    fn unreachable_region_is_an_error() {
        let r = build_tile_table(&stable(1.9, 0.0), &below(-1e200), &TilerConfig::new(0.01, 10));
        assert_eq!(r.unwrap_err(), TilerError::EmptyRegion);
        let ml = TransformMap::MittagLeffler(MlParams::new(0.5).unwrap());
        let r = build_tile_table(&ml, &below(-1.0), &TilerConfig::new(0.01, 8));
        assert_eq!(r.unwrap_err(), TilerError::EmptyRegion);
    }

    #[test]
    fn unconverged_table_is_flagged() {
        let t = build_tile_table(&stable(1.8, 0.0), &below(-12.0), &TilerConfig::new(0.01, 8)).unwrap();
        assert!(!t.converged());
        assert!(t.est_rejection() > 0.01);
    }

    #[test]
    fn bad_config_is_rejected() {
        let m = stable(1.5, 0.0);
        let r = below(0.0);
        for c in [
            TilerConfig::new(0.0, 10),
            TilerConfig::new(1.0, 10),
            TilerConfig::new(0.1, 1),
            TilerConfig::new(0.1, 40),
        ] {
            assert!(matches!(build_tile_table(&m, &r, &c), Err(TilerError::InvalidConfig(_))));
        }
    }

    #[test]
    fn overlapping_blocks_are_rejected() {
        let m = stable(1.5, 0.0);
        let r = below(0.0);
        let blocks = vec![
            Block { depth: 1, i: 0, j: 0, intersected: false },
            Block { depth: 0, i: 1, j: 1, intersected: true },
        ];
        let e = TileTable::from_blocks(m, r.clone(), 3, 0.1, true, blocks).unwrap_err();
        assert_eq!(e, TableError::Overlap);
        let blocks = vec![Block { depth: 0, i: 8, j: 0, intersected: true }];
        assert!(matches!(TileTable::from_blocks(m, r, 3, 0.1, true, blocks), Err(TableError::Block(_))));
    }
}
