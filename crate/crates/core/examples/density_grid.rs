//! Evaluates the copula density on a coarse grid and prints it as a table.

use pucopula::{compute_ranks, fixtures, CellCopulaKind, PartitionFamily, PatchworkCopula, PuCopula};

fn main() -> pucopula::Result<()> {
    let ranks = compute_ranks(&fixtures::loss_pairs())?;
    let cop = PuCopula::new(
        vec![PartitionFamily::poisson(17.0)?, PartitionFamily::poisson(22.0)?],
        PatchworkCopula::new(ranks, CellCopulaKind::Rook)?,
    )?;
    let table = cop.compute_pij()?;
    let m = 9;
    let axis: Vec<f64> = (1..=m).map(|i| i as f64 / (m + 1) as f64).collect();
    let grid = cop.density_grid(&table, &axis, &axis)?;

    print!("  v\\u ");
    for u in &axis {
        print!("{u:>6.1}");
    }
    println!();
    // rows from the top so the picture reads like the unit square
    for (b, v) in axis.iter().enumerate().rev() {
        print!("{v:>6.1}");
        for a in 0..m {
            print!("{:>6.2}", grid[a * m + b]);
        }
        println!();
    }
    Ok(())
}
