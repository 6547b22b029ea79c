//! Rank a data set: `cargo run --example ranks_from_data [data.csv]`.
//! Without an argument the bundled 20-pair loss table is used.

use std::error::Error;
use std::fs::File;

use pucopula::ranks::{compute_ranks, read_data_csv, write_ranks_csv};
use pucopula::fixtures;

fn main() -> Result<(), Box<dyn Error>> {
    let rows = match std::env::args().nth(1) {
        Some(path) => read_data_csv(File::open(path)?)?,
        None => fixtures::loss_pairs(),
    };
    let ranks = compute_ranks(&rows)?;
    println!("{} observations in {} dimensions", ranks.n(), ranks.dim());
    write_ranks_csv(&ranks, std::io::stdout().lock())?;

    println!("\nempirical copula points r/(n+1):");
    for (i, point) in ranks.relative_ranks().iter().enumerate().take(5) {
        println!("  {:2}: {:?}", i + 1, point);
    }
    Ok(())
}
