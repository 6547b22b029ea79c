//! Upper tail dependence of the upper-shuffle copula for each family.

use pucopula::{
    compute_ranks, fixtures, sim, tail_dependence_estimate, CellCopulaKind, PartitionFamily, PatchworkCopula, PuCopula,
};

fn main() -> pucopula::Result<()> {
    let ranks = compute_ranks(&fixtures::loss_pairs())?;
    let configs = [
        ("bernstein 22/27", PartitionFamily::bernstein(22)?, PartitionFamily::bernstein(27)?),
        ("negbinomial 17/22", PartitionFamily::neg_binomial(17.0)?, PartitionFamily::neg_binomial(22.0)?),
        ("poisson 17/22", PartitionFamily::poisson(17.0)?, PartitionFamily::poisson(22.0)?),
    ];
    let n = 2_000_000;
    for (name, f, g) in configs {
        let cop = PuCopula::new(vec![f, g], PatchworkCopula::new(ranks.clone(), CellCopulaKind::UpperFrechet)?)?;
        let points = sim::draw(&cop, n, 2024);
        print!("{name:>18}:");
        for t in [0.9, 0.99, 0.999] {
            print!("  t={t}: {:.3}", tail_dependence_estimate(points.chunks_exact(2), t)?);
        }
        println!();
    }
    Ok(())
}
