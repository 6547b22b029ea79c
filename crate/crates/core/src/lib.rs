//! Data-driven partition-of-unity copulas.
//!
//! The pipeline runs from observations to risk figures:
//!
//! 1. [`ranks::compute_ranks`] turns an `n x d` sample into rank vectors.
//! 2. [`patchwork::PatchworkCopula`] places a cell copula (upper Fréchet,
//!    lower Fréchet or rook) in each rank cell.
//! 3. [`copula::PuCopula`] couples one [`families::PartitionFamily`] per
//!    coordinate (Bernstein, negative binomial, Poisson) through the
//!    patchwork: it builds the discrete joint table ([`table::SparseProbTable`]),
//!    evaluates the copula density, and samples.
//! 4. [`risk`] pushes samples through marginal quantile functions and
//!    reports Value-at-Risk curves.
//!
//! ```
//! use pucopula::{fixtures, ranks, CellCopulaKind, PartitionFamily, PatchworkCopula, PuCopula};
//! use rand::SeedableRng;
//!
//! let ranks = ranks::compute_ranks(&fixtures::loss_pairs()).unwrap();
//! let driver = PatchworkCopula::new(ranks, CellCopulaKind::Rook).unwrap();
//! let families = vec![
//!     PartitionFamily::bernstein(22).unwrap(),
//!     PartitionFamily::bernstein(27).unwrap(),
//! ];
//! let cop = PuCopula::new(families, driver).unwrap();
//! let table = cop.compute_pij().unwrap();
//! assert!((table.total_mass() - 1.0).abs() < 1e-12);
//!
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
//! let u = cop.sample(&mut rng);
//! assert!(cop.density(&table, &u).unwrap() >= 0.0);
//! ```

pub mod cli;
pub mod copula;
pub mod error;
pub mod families;
pub mod fixtures;
pub mod gof;
pub mod patchwork;
mod pmf;
pub mod quad;
pub mod ranks;
pub mod risk;
pub mod sim;
pub mod table;

pub use copula::{tail_dependence_estimate, PuCopula, TableConfig};
pub use error::{CopulaError, Result};
pub use families::{FamilyKind, PartitionFamily};
pub use patchwork::{CellCopula, CellCopulaKind, PatchworkCopula};
pub use ranks::{compute_ranks, RankData};
pub use sim::CopulaSampler;
pub use table::SparseProbTable;

/// Largest double below 1.
pub(crate) const ONE_MINUS: f64 = 1.0 - f64::EPSILON / 2.0;

pub(crate) fn check_open(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(CopulaError::Domain { value: u })
    }
}

/// Pulls a value that rounded onto 0 or 1 back into the open interval.
#[inline]
pub(crate) fn clamp_open(u: f64) -> f64 {
    u.clamp(f64::MIN_POSITIVE, ONE_MINUS)
}
