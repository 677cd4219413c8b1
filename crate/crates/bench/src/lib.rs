//! Benchmark fixtures.

use std::sync::Arc;

use tailforge::{build_tile_table, MlParams, RegionSpec, StableParams, TileTable, TilerConfig, TransformMap};

/// A named map and region pair.
pub struct Case {
    pub name: &'static str,
    pub map: TransformMap,
    pub region: RegionSpec,
}

impl Case {
    pub fn table(&self) -> Arc<TileTable> {
        Arc::new(build_tile_table(&self.map, &self.region, &TilerConfig::default()).expect("fixture region is reachable"))
    }
}

fn stable(alpha: f64, beta: f64) -> TransformMap {
    TransformMap::Stable(StableParams::standard(alpha, beta).expect("fixture parameters are valid"))
}

/// Representative tail and interval conditions.
pub fn cases() -> Vec<Case> {
    let region = |s: &str| s.parse::<RegionSpec>().expect("fixture region parses");
    vec![
        Case { name: "stable_1.8_below_-12", map: stable(1.8, 0.0), region: region("(-inf,-12]") },
        Case { name: "stable_0.8_below_-3", map: stable(0.8, 0.0), region: region("(-inf,-3]") },
        Case { name: "stable_1.3_two_tails", map: stable(1.3, -0.4), region: region("(-inf,-2] U [5,inf)") },
        Case {
            name: "ml_0.7_between_3_4",
            map: TransformMap::MittagLeffler(MlParams::new(0.7).expect("fixture parameters are valid")),
            region: region("[3,4]"),
        },
    ]
}
