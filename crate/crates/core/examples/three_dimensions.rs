//! A three-dimensional copula with mixed families.

use pucopula::gof::ks_uniform;
use pucopula::{compute_ranks, sim, CellCopulaKind, PartitionFamily, PatchworkCopula, PuCopula};

fn main() -> pucopula::Result<()> {
    let rows: Vec<Vec<f64>> = (0..20)
        .map(|i| {
            let x = f64::from(i);
            vec![x.sin() + 0.1 * x, x.cos(), (0.3 * x).sin() * x]
        })
        .collect();
    let ranks = compute_ranks(&rows)?;
    let families = vec![
        PartitionFamily::bernstein(22)?,
        PartitionFamily::neg_binomial(17.0)?,
        PartitionFamily::poisson(22.0)?,
    ];
    for kind in [CellCopulaKind::Rook, CellCopulaKind::UpperFrechet] {
        let cop = PuCopula::new(families.clone(), PatchworkCopula::new(ranks.clone(), kind)?)?;
        let points = sim::draw(&cop, 100_000, 3);
        let ks: Vec<f64> = (0..3)
            .map(|k| ks_uniform(&points.iter().skip(k).step_by(3).copied().collect::<Vec<_>>()).p_value)
            .collect();
        println!("{kind:>5}: marginal KS p-values {ks:.3?}");
    }
    if let Err(e) = PatchworkCopula::new(ranks, CellCopulaKind::LowerFrechet) {
        println!("lower: {e}");
    }
    Ok(())
}
