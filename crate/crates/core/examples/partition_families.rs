//! The three partition-of-unity families side by side.

use pucopula::{FamilyKind, PartitionFamily};

fn main() -> pucopula::Result<()> {
    let families = [
        PartitionFamily::new(FamilyKind::Bernstein, 22.0)?,
        PartitionFamily::new(FamilyKind::NegBinomial, 17.0)?,
        PartitionFamily::new(FamilyKind::Poisson, 17.0)?,
    ];
    let u = 0.3;
    for fam in &families {
        println!("{} a = {}", fam.kind(), fam.a());
        let total: f64 = (0..2000).map(|i| fam.phi(i, u).unwrap()).sum();
        println!("  sum of phi(i, {u}) over i: {total:.15}");
        for i in 0..4 {
            println!(
                "  i = {i}: phi = {:.6}  alpha = {:.6}  cell = [{:.4}, {:.4})",
                fam.phi(i, u)?,
                fam.alpha(i)?,
                fam.lower_edge(i),
                fam.upper_edge(i),
            );
        }
        let m = fam.truncation_index(1e-6);
        println!("  indices needed for tail mass <= 1e-6: {}", m + 1);
        println!("  u = {u} falls in cell {}\n", fam.discretize(u)?);
    }
    Ok(())
}
