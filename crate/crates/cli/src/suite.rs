//! `validate` and `bench`: checks reported as `key=value` lines.

use std::sync::Arc;

use tailforge::oracle::{reference_cdf, transform_law};
use tailforge::validate::{ks_one_sample, measure_rejection, measure_throughput, Report, WallClock};
use tailforge::{
    ConditionalSampler, NaiveConditionalSampler, QuadratureSpec, RegionSpec, Shr3, TileTable, TilerConfig, TransformMap, UnconditionalSampler,
    VariateStream, LEVEL_LIMIT,
};

use crate::setup::{self, Failure};
use crate::{Suite, SuiteArgs};

/// Relative spread allowed between throughputs at two refinement levels.
const THROUGHPUT_SPREAD: f64 = 0.25;
/// Measured rejection may exceed the target by this factor.
const REJECTION_SLACK: f64 = 1.5;
/// Timing runs per throughput figure; the best is kept.
const TIMING_RUNS: usize = 3;

fn failure(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

struct Context {
    map: TransformMap,
    region: RegionSpec,
    seed: u32,
    n: u64,
    target: f64,
    table: Option<Arc<TileTable>>,
}

impl Context {
    fn stream(&self, table: Option<&Arc<TileTable>>) -> Result<Box<dyn VariateStream>, Failure> {
        let src = Shr3::new(self.seed).map_err(failure)?;
        Ok(match table {
            None => Box::new(UnconditionalSampler::new(self.map, src)),
            Some(t) => Box::new(ConditionalSampler::new(t.clone(), src)),
        })
    }
}

fn ks(cx: &Context, r: &mut Report) -> Result<bool, Failure> {
    let mut xs = vec![0.0; cx.n as usize];
    cx.stream(cx.table.as_ref())?.fill(&mut xs).map_err(failure)?;
    xs.sort_by(f64::total_cmp);
    if let TransformMap::Stable(p) = &cx.map {
        let law = transform_law(p);
        r.push("ks.law_beta", law.beta());
        r.push("ks.law_gamma", law.gamma());
    }
    let cdf = reference_cdf(&cx.map, &cx.region, &QuadratureSpec::default()).map_err(failure)?;
    let res = ks_one_sample(&xs, cdf).map_err(failure)?;
    r.push("ks.n", res.n);
    r.push("ks.d", res.d);
    r.push("ks.critical_1pct", res.critical_1pct);
    r.push("ks.pass", res.pass);
    Ok(res.pass)
}

fn rejection(cx: &Context, r: &mut Report) -> Result<bool, Failure> {
    let Some(table) = &cx.table else {
        r.push("rejection.rate", 0.0);
        r.push("rejection.pass", true);
        return Ok(true);
    };
    let mut s = ConditionalSampler::new(table.clone(), Shr3::new(cx.seed).map_err(failure)?);
    let rate = measure_rejection(&mut s, cx.n).map_err(failure)?;
    let pass = rate < REJECTION_SLACK * cx.target;
    r.push("rejection.level", table.level());
    r.push("rejection.est", table.est_rejection());
    r.push("rejection.rate", rate);
    r.push("rejection.limit", REJECTION_SLACK * cx.target);
    r.push("rejection.pass", pass);
    Ok(pass)
}

fn best_throughput(cx: &Context, table: Option<&Arc<TileTable>>, n: u64) -> Result<f64, Failure> {
    let mut best: f64 = 0.0;
    for _ in 0..TIMING_RUNS {
        let mut s = cx.stream(table)?;
        best = best.max(measure_throughput(&mut *s, n, &WallClock::start()).map_err(failure)?);
    }
    Ok(best)
}

fn throughput(cx: &Context, r: &mut Report) -> Result<bool, Failure> {
    let Some(table) = &cx.table else {
        r.push("throughput.unconditional", best_throughput(cx, None, cx.n)?);
        r.push("throughput.pass", true);
        return Ok(true);
    };
    let deeper_level = (table.level() + 2).min(LEVEL_LIMIT);
    // An unreachable target forces refinement down to the deeper level.
    let config = TilerConfig::new(f64::MIN_POSITIVE, deeper_level);
    let deeper = Arc::new(setup::build_quiet(&cx.map, &cx.region, &config)?);
    let base_rate = best_throughput(cx, Some(table), cx.n)?;
    let deep_rate = best_throughput(cx, Some(&deeper), cx.n)?;
    let ratio = deep_rate / base_rate;
    let pass = (ratio - 1.0).abs() <= THROUGHPUT_SPREAD;
    let naive_n = (cx.n / 100).max(100);
    let mut naive = NaiveConditionalSampler::new(cx.map, cx.region.clone(), Shr3::new(cx.seed).map_err(failure)?);
    let naive_rate = measure_throughput(&mut naive, naive_n, &WallClock::start()).map_err(failure)?;
    r.push("throughput.level", table.level());
    r.push("throughput.tiles", table.tile_count());
    r.push("throughput.rate", base_rate);
    r.push("throughput.deeper_level", deeper.level());
    r.push("throughput.deeper_tiles", deeper.tile_count());
    r.push("throughput.deeper_rate", deep_rate);
    r.push("throughput.ratio", ratio);
    r.push("throughput.naive_rate", naive_rate);
    r.push("throughput.speedup", base_rate / naive_rate);
    r.push("throughput.pass", pass);
    Ok(pass)
}

pub fn run(args: &SuiteArgs, default: Suite) -> Result<(), Failure> {
    let map = args.dist.map()?;
    let region = setup::region(args.region.as_deref())?;
    let seed = setup::seed(&args.seed)?;
    let table = if region.is_full_line() {
        None
    } else {
        Some(setup::table(&map, &region, &args.tiler, args.table.as_deref())?)
    };
    let cx = Context {
        map,
        region,
        seed,
        n: args.n,
        target: args.tiler.target_rejection,
        table,
    };
    let suite = args.suite.unwrap_or(default);
    let mut r = Report::new();
    r.push("map", setup::describe(&cx.map));
    r.push("region", &cx.region);
    r.push("seed", cx.seed);
    let mut failed = Vec::new();
    type Check = fn(&Context, &mut Report) -> Result<bool, Failure>;
    let checks: [(Suite, &str, Check); 3] = [
        (Suite::Ks, "ks", ks),
        (Suite::Rejection, "rejection", rejection),
        (Suite::Throughput, "throughput", throughput),
    ];
    for (which, name, check) in checks {
        if (suite == which || suite == Suite::All) && !check(&cx, &mut r)? {
            failed.push(name.to_string());
        }
    }
    print!("{r}");
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Checks(failed))
    }
}
