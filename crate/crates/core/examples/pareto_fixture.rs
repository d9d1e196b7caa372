//! Writes seeded standard Pareto block data as `block_id,value` CSV.
//!
//! ```text
//! cargo run -p zce-core --example pareto_fixture -- <out.csv> <seed> [xi] [blocks] [per_block]
//! ```

use std::error::Error;
use std::fmt::Write as _;

use zce_core::{sample, DistributionSpec, RandomStream};

fn main() -> Result<(), Box<dyn Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let [path, seed, rest @ ..] = args.as_slice() else {
        return Err("usage: pareto_fixture <out.csv> <seed> [xi] [blocks] [per_block]".into());
    };
    let xi: f64 = rest.first().map_or(Ok(0.3), |s| s.parse())?;
    let blocks: usize = rest.get(1).map_or(Ok(50), |s| s.parse())?;
    let per_block: usize = rest.get(2).map_or(Ok(100), |s| s.parse())?;

    let spec = DistributionSpec::StandardPareto { xi, u: 1.0 };
    let mut rng = RandomStream::new(seed.parse()?);
    let mut out = format!("# stdpar(xi={xi},u=1) blocks={blocks} per_block={per_block} seed={seed}\nblock_id,value\n");
    for block in 1..=blocks {
        for x in sample(&spec, per_block, &mut rng)? {
            writeln!(out, "{block},{x:?}")?;
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}
