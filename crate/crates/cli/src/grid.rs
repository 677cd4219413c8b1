//! `map`: the transform map on a grid of cell centers.
//!
//! Row `i` holds `u = (i + 1/2) / N`, column `j` holds `v = (j + 1/2) / N`.

use std::io::Write;

use crate::setup::{self, Failure};
use crate::MapArgs;

pub fn run(args: &MapArgs) -> Result<(), Failure> {
    let map = args.dist.map()?;
    let n = args.grid as usize;
    let centers: Vec<f64> = (0..n).map(|k| (k as f64 + 0.5) / n as f64).collect();
    let mut out = setup::output(args.out.as_ref())?;
    writeln!(out, "# tailforge map {} grid={n} rows=u cols=v", setup::describe(&map))?;
    let mut values = Vec::with_capacity(n);
    let mut line = String::new();
    for &u in &centers {
        map.eval_lattice(&[u], &centers, &mut values);
        line.clear();
        for (j, value) in values.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            match value {
                Ok(x) => line.push_str(&format!("{x:.16e}")),
                Err(_) => line.push_str("nan"),
            }
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}
