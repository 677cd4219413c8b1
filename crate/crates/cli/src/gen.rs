//! `gen`: write variates.

use std::io::Write;
use std::thread;

use tailforge::rng::derive_seed;
use tailforge::{ConditionalSampler, Shr3, UnconditionalSampler, VariateStream};

use crate::setup::{self, Failure};
use crate::{Format, GenArgs};

const CHUNK: usize = 1 << 16;

fn write_values(w: &mut dyn Write, xs: &[f64], format: Format) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            for x in xs {
                writeln!(w, "{x:.16e}")?;
            }
        }
        Format::F64le => {
            for x in xs {
                w.write_all(&x.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

fn sample_failure(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(format!("sampling failed: {e}"))
}

pub fn run(args: &GenArgs) -> Result<(), Failure> {
    let map = args.dist.map()?;
    let region = setup::region(args.region.as_deref())?;
    let seed = setup::seed(&args.seed)?;
    let table = if region.is_full_line() {
        None
    } else {
        Some(setup::table(&map, &region, &args.tiler, args.table.as_deref())?)
    };
    let stream = |k: u32| -> Result<Box<dyn VariateStream + Send>, Failure> {
        let src = Shr3::new(derive_seed(seed, k)).map_err(|e| Failure::Invalid(e.to_string()))?;
        Ok(match &table {
            None => Box::new(UnconditionalSampler::new(map, src)),
            Some(t) => Box::new(ConditionalSampler::new(t.clone(), src)),
        })
    };
    let mut out = setup::output(args.out.as_ref())?;
    let threads = args.threads as u64;
    if threads == 1 {
        let mut s = stream(0)?;
        let mut buf = vec![0.0; CHUNK];
        let mut left = args.n;
        while left > 0 {
            let k = left.min(CHUNK as u64) as usize;
            s.fill(&mut buf[..k]).map_err(sample_failure)?;
            write_values(&mut out, &buf[..k], args.format)?;
            left -= k as u64;
        }
    } else {
        let streams = (0..args.threads).map(stream).collect::<Result<Vec<_>, _>>()?;
        let parts = thread::scope(|scope| {
            let handles: Vec<_> = streams
                .into_iter()
                .enumerate()
                .map(|(k, mut s)| {
                    let count = args.n / threads + u64::from((k as u64) < args.n % threads);
                    scope.spawn(move || {
                        let mut xs = vec![0.0; count as usize];
                        s.fill(&mut xs).map(|()| xs)
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("sampler thread panicked")).collect::<Vec<_>>()
        });
        for part in parts {
            write_values(&mut out, &part.map_err(sample_failure)?, args.format)?;
        }
    }
    out.flush()?;
    Ok(())
}
