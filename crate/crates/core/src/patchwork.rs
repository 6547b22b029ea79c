//! Patchwork copulas over the rank grid.
//!
//! Observation `k` with rank tuple `(r_1k, ..., r_dk)` owns the cell
//! `prod_j ((r_jk - 1)/n, r_jk/n]`, and a rescaled cell copula `C_k` is
//! placed inside it. Choosing the cell uniformly and then drawing from `C_k`
//! gives a copula whose CDF is
//!
//! ```text
//! C(u) = (1/n) sum_k C_k(clamp(n u_1 - r_1k + 1), ..., clamp(n u_d - r_dk + 1))
//! ```
//!
//! Every cell uses the same [`CellCopulaKind`] here.

use std::fmt;

use rand::Rng;
use rand_distr::Open01;
use serde::{Deserialize, Serialize};

use crate::error::{CopulaError, Result};
use crate::families::ceil_product;
use crate::ranks::RankData;
use crate::{check_open, clamp_open};

/// The copula placed in each cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellCopulaKind {
    /// Comonotone cells: all coordinates share one offset.
    #[serde(rename = "upper")]
    UpperFrechet,
    /// Countermonotone cells (two dimensions only).
    #[serde(rename = "lower")]
    LowerFrechet,
    /// Independent cells.
    Rook,
}

impl fmt::Display for CellCopulaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            CellCopulaKind::UpperFrechet => "upper",
            CellCopulaKind::LowerFrechet => "lower",
            CellCopulaKind::Rook => "rook",
        })
    }
}

impl std::str::FromStr for CellCopulaKind {
    type Err = CopulaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "upper" | "upper-frechet" | "comonotone" => Ok(CellCopulaKind::UpperFrechet),
            "lower" | "lower-frechet" | "countermonotone" => Ok(CellCopulaKind::LowerFrechet),
            "rook" | "independence" => Ok(CellCopulaKind::Rook),
            other => Err(CopulaError::InvalidParameter(format!(
                "unknown shuffle '{other}' (expected upper, lower or rook)"
            ))),
        }
    }
}

/// What a cell copula has to provide: its CDF on `[0,1]^d` and a way to turn
/// standard uniforms into a draw.
pub trait CellCopula {
    /// Number of standard uniforms consumed per draw in `d` dimensions.
    fn uniforms_needed(&self, d: usize) -> usize;

    fn cdf(&self, x: &[f64]) -> f64;

    /// Maps standard uniforms `z` to within-cell offsets `out`.
    fn offsets(&self, z: &[f64], out: &mut [f64]);

    /// Mass of the box `(lo, hi]` by inclusion-exclusion over its corners.
    fn rect_mass(&self, lo: &[f64], hi: &[f64]) -> f64 {
        inclusion_exclusion(lo, hi, |x| self.cdf(x))
    }
}

impl CellCopula for CellCopulaKind {
    fn uniforms_needed(&self, d: usize) -> usize {
        match self {
            CellCopulaKind::Rook => d,
            _ => 1,
        }
    }

    fn cdf(&self, x: &[f64]) -> f64 {
        match self {
            CellCopulaKind::UpperFrechet => x.iter().copied().fold(1.0, f64::min),
            CellCopulaKind::LowerFrechet => (x[0] + x[1] - 1.0).max(0.0),
            CellCopulaKind::Rook => x.iter().product(),
        }
    }

    fn offsets(&self, z: &[f64], out: &mut [f64]) {
        match self {
            CellCopulaKind::UpperFrechet => out.fill(z[0]),
            CellCopulaKind::LowerFrechet => {
                out[0] = z[0];
                out[1] = 1.0 - z[0];
            }
            CellCopulaKind::Rook => out.copy_from_slice(&z[..out.len()]),
        }
    }
}

/// Sums `sign * f(corner)` over the `2^d` corners of `(lo, hi]`.
pub(crate) fn inclusion_exclusion(lo: &[f64], hi: &[f64], mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let d = lo.len();
    let mut corner = vec![0.0; d];
    let mut total = 0.0;
    for mask in 0u32..(1 << d) {
        let mut lows = 0;
        for (j, c) in corner.iter_mut().enumerate() {
            if mask & (1 << j) != 0 {
                *c = lo[j];
                lows += 1;
            } else {
                *c = hi[j];
            }
        }
        let v = f(&corner);
        if lows % 2 == 0 {
            total += v;
        } else {
            total -= v;
        }
    }
    total
}

/// A patchwork copula with the same cell copula in every cell.
#[derive(Debug, Clone)]
pub struct PatchworkCopula {
    ranks: RankData,
    kind: CellCopulaKind,
    /// observation index owning each rank of the first coordinate
    by_first_rank: Vec<usize>,
}

impl PatchworkCopula {
    pub fn new(ranks: RankData, kind: CellCopulaKind) -> Result<Self> {
        if kind == CellCopulaKind::LowerFrechet && ranks.dim() != 2 {
            return Err(CopulaError::LowerFrechetDimension { dim: ranks.dim() });
        }
        let mut by_first_rank = vec![0; ranks.n()];
        for (k, &r) in ranks.ranks(0).iter().enumerate() {
            by_first_rank[r as usize - 1] = k;
        }
        Ok(Self { ranks, kind, by_first_rank })
    }

    pub fn ranks(&self) -> &RankData {
        &self.ranks
    }

    pub fn kind(&self) -> CellCopulaKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.ranks.n()
    }

    pub fn dim(&self) -> usize {
        self.ranks.dim()
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(CopulaError::DimensionMismatch { expected: self.dim(), found: len });
        }
        Ok(())
    }

    /// Density at an interior point. Only the rook patchwork has one: it is
    /// `n^(d-1)` on the occupied cells and 0 elsewhere.
    pub fn density(&self, u: &[f64]) -> Result<f64> {
        self.check_dim(u.len())?;
        for &x in u {
            check_open(x)?;
        }
        if self.kind != CellCopulaKind::Rook {
            return Err(CopulaError::Singular { kind: self.kind });
        }
        let n = self.n() as f64;
        let first = ceil_product(u[0], n) as usize;
        let k = self.by_first_rank[first - 1];
        let occupied = (1..self.dim()).all(|j| ceil_product(u[j], n) == u64::from(self.ranks.ranks(j)[k]));
        Ok(if occupied { n.powi(self.dim() as i32 - 1) } else { 0.0 })
    }

    /// The copula CDF at a point of the closed cube.
    pub fn cdf(&self, u: &[f64]) -> Result<f64> {
        self.check_dim(u.len())?;
        if let Some(&bad) = u.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(CopulaError::Domain { value: bad });
        }
        let n = self.n() as f64;
        let scaled: Vec<f64> = u.iter().map(|x| x * n).collect();
        Ok(self.cdf_scaled(&scaled))
    }

    /// CDF with arguments already multiplied by `n`.
    pub(crate) fn cdf_scaled(&self, scaled: &[f64]) -> f64 {
        let mut local = vec![0.0; scaled.len()];
        let mut total = 0.0;
        for k in 0..self.n() {
            for (j, x) in local.iter_mut().enumerate() {
                *x = self.local_coord(j, k, scaled[j]);
            }
            total += self.kind.cdf(&local);
        }
        total / self.n() as f64
    }

    /// Position of scaled coordinate `s` inside cell `k` along axis `j`,
    /// clamped to `[0, 1]`.
    #[inline]
    pub(crate) fn local_coord(&self, j: usize, k: usize, s: f64) -> f64 {
        (s - f64::from(self.ranks.ranks(j)[k] - 1)).clamp(0.0, 1.0)
    }

    /// Mass the copula puts on the box `(lo, hi]`.
    pub fn rect_mass(&self, lo: &[f64], hi: &[f64]) -> Result<f64> {
        self.check_dim(lo.len())?;
        self.check_dim(hi.len())?;
        let n = self.n() as f64;
        let lo: Vec<f64> = lo.iter().map(|x| x.clamp(0.0, 1.0) * n).collect();
        let hi: Vec<f64> = hi.iter().map(|x| x.clamp(0.0, 1.0) * n).collect();
        Ok(inclusion_exclusion(&lo, &hi, |x| self.cdf_scaled(x)))
    }

    /// The point produced by cell `cell` (0-based observation index) from
    /// the standard uniforms `z`.
    pub fn point(&self, cell: usize, z: &[f64]) -> Result<Vec<f64>> {
        if cell >= self.n() {
            return Err(CopulaError::InvalidParameter(format!("cell {cell} out of range")));
        }
        let needed = self.kind.uniforms_needed(self.dim());
        if z.len() != needed {
            return Err(CopulaError::DimensionMismatch { expected: needed, found: z.len() });
        }
        let mut out = vec![0.0; self.dim()];
        self.place(cell, z, &mut out);
        Ok(out)
    }

    fn place(&self, cell: usize, z: &[f64], out: &mut [f64]) {
        self.kind.offsets(z, out);
        let n = self.n() as f64;
        for (j, x) in out.iter_mut().enumerate() {
            *x = clamp_open((f64::from(self.ranks.ranks(j)[cell] - 1) + *x) / n);
        }
    }

    /// One draw: pick a cell uniformly, then draw inside it.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.sample_into(rng, &mut out);
        out
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let cell = rng.random_range(0..self.n());
        let mut z = [0.0; 8];
        let needed = self.kind.uniforms_needed(self.dim());
        if needed <= z.len() {
            for v in &mut z[..needed] {
                *v = rng.sample(Open01);
            }
            self.place(cell, &z[..needed], out);
        } else {
            let z: Vec<f64> = (0..needed).map(|_| rng.sample(Open01)).collect();
            self.place(cell, &z, out);
        }
    }
}
