//! Sample files: columns `b,i,q_star` under a `#` provenance header.

use std::io::{Read, Write};

use super::{CycleStats, ExcursionCycle};
use crate::csvio::{fmt_f64, parse_f64, read_table, write_table};
use crate::error::{Error, Result};

pub fn write_samples_csv<W: Write>(out: W, stats: &CycleStats) -> Result<()> {
    let p = &stats.provenance;
    let prov = [
        ("model", p.model.clone()),
        ("seed", p.seed.to_string()),
        ("epsilon", fmt_f64(p.epsilon)),
        ("n_cycles", p.n_cycles.to_string()),
        ("censored", stats.censored.to_string()),
        ("version", p.version.clone()),
    ];
    let rows: Vec<Vec<String>> = stats
        .samples
        .iter()
        .map(|c| vec![fmt_f64(c.b), fmt_f64(c.i), fmt_f64(c.q_star)])
        .collect();
    write_table(out, &prov, &["b", "i", "q_star"], &rows)
}

pub fn read_samples_csv<R: Read>(input: R) -> Result<Vec<ExcursionCycle>> {
    let (header, rows) = read_table(input)?;
    if header != ["b", "i", "q_star"] {
        return Err(Error::Domain(format!("expected columns b,i,q_star, got {}", header.join(","))));
    }
    rows.iter()
        .map(|r| {
            Ok(ExcursionCycle {
                b: parse_f64(&r[0])?,
                i: parse_f64(&r[1])?,
                q_star: parse_f64(&r[2])?,
            })
        })
        .collect()
}
