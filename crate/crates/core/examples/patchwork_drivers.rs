//! Patchwork copulas built from the loss ranks with each cell copula.

use pucopula::{compute_ranks, fixtures, CellCopulaKind, PatchworkCopula};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> pucopula::Result<()> {
    let ranks = compute_ranks(&fixtures::loss_pairs())?;
    let points = [[0.25, 0.25], [0.5, 0.5], [0.9, 0.8]];
    for kind in [CellCopulaKind::UpperFrechet, CellCopulaKind::LowerFrechet, CellCopulaKind::Rook] {
        let driver = PatchworkCopula::new(ranks.clone(), kind)?;
        print!("{kind:>5}: ");
        for p in &points {
            print!("C{p:?} = {:.4}  ", driver.cdf(p)?);
        }
        println!();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws: Vec<Vec<f64>> = (0..3).map(|_| driver.sample(&mut rng)).collect();
        println!("       draws {draws:.3?}");
        match driver.density(&[0.5, 0.5]) {
            Ok(c) => println!("       density at the center {c}"),
            Err(e) => println!("       {e}"),
        }
    }
    Ok(())
}
