//! Writes the first N zero heights (default 100000) to a table file.
//!
//! cargo run --release -p chaoslab --example zero_table -- data/zeros_100k.txt 100000

use std::io::Write;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "data/zeros_100k.txt".into());
    let count: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(100_000);
    let zeros = chaoslab::zeros::compute_zeros(count, 0.02)?;
    let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
    writeln!(out, "# first {count} nontrivial zeta zeros, Riemann-Siegel with four remainder terms")?;
    for z in &zeros {
        writeln!(out, "{z:.10}")?;
    }
    eprintln!("wrote {count} zeros to {path}, last {:.10}", zeros[count - 1]);
    Ok(())
}
