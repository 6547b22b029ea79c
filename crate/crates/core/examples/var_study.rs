//! Value-at-Risk of the summed losses: one million simulations, with the
//! quantile curve over the largest 10% of sums.

use pucopula::risk::{self, fit_marginal, MarginalKind};
use pucopula::{compute_ranks, fixtures, CellCopulaKind, PartitionFamily, PatchworkCopula, PuCopula};

fn main() -> pucopula::Result<()> {
    let data = fixtures::loss_pairs();
    let ranks = compute_ranks(&data)?;
    let sims = 1_000_000;
    let levels = [0.9, 0.95, 0.99, 0.995, 0.999];

    for kind in [MarginalKind::Empirical, MarginalKind::Lognormal] {
        let margins = (0..2)
            .map(|k| fit_marginal(kind, &data.iter().map(|r| r[k]).collect::<Vec<_>>()))
            .collect::<pucopula::Result<Vec<_>>>()?;
        println!("{kind} margins");
        for shuffle in [CellCopulaKind::UpperFrechet, CellCopulaKind::LowerFrechet, CellCopulaKind::Rook] {
            let cop = PuCopula::new(
                vec![PartitionFamily::neg_binomial(17.0)?, PartitionFamily::neg_binomial(22.0)?],
                PatchworkCopula::new(ranks.clone(), shuffle)?,
            )?;
            let sums = risk::simulate_portfolio(&cop, &margins, sims, 1)?;
            let curve = risk::empirical_quantiles(&sums, &levels)?;
            let tail = risk::empirical_quantiles(&sums, &risk::tail_levels(sims, 0.1))?;
            print!("  {shuffle:>5}:");
            for (p, q) in curve.iter() {
                print!("  VaR{p} = {q:.3}");
            }
            println!("  ({} tail points)", tail.len());
        }
    }
    Ok(())
}
