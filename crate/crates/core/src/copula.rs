//! Partition-of-unity copulas driven by a patchwork copula.
//!
//! Each coordinate `k` has a partition family with weights `alpha_k(i)` and
//! cell edges `A_k(i) = sum_{m <= i} alpha_k(m)`. The joint weights are the
//! patchwork masses of the boxes
//!
//! ```text
//! p(i_1, ..., i_d) = C~( prod_k (A_k(i_k - 1), A_k(i_k)] )
//! ```
//!
//! and the copula density is `c(u) = sum_i p(i) prod_k f_k(i_k, u_k)` with
//! `f_k(i, .) = phi_k(i, .) / alpha_k(i)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CopulaError, Result};
use crate::families::PartitionFamily;
use crate::patchwork::{CellCopula, CellCopulaKind, PatchworkCopula};
use crate::sim::CopulaSampler;
use crate::table::SparseProbTable;
use crate::check_open;

/// Controls how much of the (possibly infinite) joint table is built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableConfig {
    /// Total weight allowed beyond the per-coordinate truncation indices,
    /// split evenly across coordinates.
    pub eps: f64,
    /// Hard cap on the largest index kept per coordinate. Negative binomial
    /// tails decay like `a / i`, so `eps` alone would ask for about `a / eps`
    /// indices; this cap wins and the excess shows up as residual mass.
    pub max_index: u64,
    /// Merged entries below this are dropped and counted as pruned mass.
    pub prune_below: f64,
    /// Refuse to build tables expected to exceed this many entries.
    pub max_entries: usize,
    /// Rescale the stored entries to total mass 1.
    pub renormalize: bool,
}

impl Default for TableConfig {
    fn default() -> Self {
        Self {
            eps: 1e-10,
            max_index: 2048,
            prune_below: 1e-15,
            max_entries: 20_000_000,
            renormalize: false,
        }
    }
}

impl TableConfig {
    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(CopulaError::InvalidParameter(format!("truncation eps must be in (0, 1), got {}", self.eps)));
        }
        if self.prune_below.is_nan() || self.prune_below < 0.0 {
            return Err(CopulaError::InvalidParameter("prune threshold must be nonnegative".into()));
        }
        Ok(())
    }
}

/// A partition-of-unity copula: one family per coordinate plus a patchwork
/// driver supplying the joint weights.
#[derive(Debug, Clone)]
pub struct PuCopula {
    families: Vec<PartitionFamily>,
    driver: PatchworkCopula,
    config: TableConfig,
}

impl PuCopula {
    pub fn new(families: Vec<PartitionFamily>, driver: PatchworkCopula) -> Result<Self> {
        Self::with_config(families, driver, TableConfig::default())
    }

    pub fn with_config(families: Vec<PartitionFamily>, driver: PatchworkCopula, config: TableConfig) -> Result<Self> {
        if families.len() != driver.dim() {
            return Err(CopulaError::DimensionMismatch { expected: driver.dim(), found: families.len() });
        }
        config.validate()?;
        Ok(Self { families, driver, config })
    }

    pub fn families(&self) -> &[PartitionFamily] {
        &self.families
    }

    pub fn driver(&self) -> &PatchworkCopula {
        &self.driver
    }

    pub fn config(&self) -> &TableConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.families.len()
    }

    /// Largest index kept along each coordinate.
    pub fn index_limits(&self) -> Vec<u64> {
        let per_coord = self.config.eps / self.dim() as f64;
        self.families
            .iter()
            .map(|f| f.truncation_index(per_coord).min(self.config.max_index))
            .collect()
    }

    /// Builds the joint weight table by patchwork inclusion-exclusion over
    /// each index box, cell by cell.
    pub fn compute_pij(&self) -> Result<SparseProbTable> {
        let d = self.dim();
        let n = self.driver.n();
        let limits = self.index_limits();
        let kind = self.driver.kind();

        // per coordinate, per rank r (0-based r-1): indices meeting ((r-1)/n, r/n]
        let spans: Vec<Vec<Span>> = (0..d)
            .map(|j| (1..=n).map(|r| Span::new(&self.families[j], r, n, limits[j])).collect())
            .collect();

        let estimate: u128 = (0..n)
            .map(|k| {
                let lens = (0..d).map(|j| spans[j][self.rank(j, k) - 1].len() as u128);
                match kind {
                    CellCopulaKind::Rook => lens.product::<u128>(),
                    _ => lens.sum::<u128>(),
                }
            })
            .sum();
        if estimate > self.config.max_entries as u128 {
            return Err(CopulaError::TableTooLarge { estimate, budget: self.config.max_entries });
        }

        let mut keys: Vec<u32> = Vec::with_capacity(estimate as usize * d);
        let mut values: Vec<f64> = Vec::with_capacity(estimate as usize);
        let scale = 1.0 / n as f64;
        for k in 0..n {
            let cell: Vec<CellEdges> = (0..d)
                .map(|j| CellEdges::new(&self.families[j], &spans[j][self.rank(j, k) - 1], &self.driver, j, k))
                .collect();
            if cell.iter().any(|c| c.lo.is_empty()) {
                continue;
            }
            let mut push = |tuple: &[u32], lo: &[f64], hi: &[f64]| {
                let mass = kind.rect_mass(lo, hi) * scale;
                if mass != 0.0 {
                    keys.extend_from_slice(tuple);
                    values.push(mass);
                }
            };
            match kind {
                CellCopulaKind::Rook => for_each_box(&cell, &mut push),
                CellCopulaKind::UpperFrechet | CellCopulaKind::LowerFrechet => {
                    let reflected: Vec<bool> =
                        (0..d).map(|j| kind == CellCopulaKind::LowerFrechet && j == 1).collect();
                    for_each_segment(&cell, &reflected, &mut push);
                }
            }
        }

        let table = SparseProbTable::from_contributions(d, keys, values, self.config.prune_below);
        Ok(if self.config.renormalize { table.renormalized() } else { table })
    }

    fn rank(&self, j: usize, k: usize) -> usize {
        self.driver.ranks().ranks(j)[k] as usize
    }

    fn check_point(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(CopulaError::DimensionMismatch { expected: self.dim(), found: u.len() });
        }
        u.iter().try_for_each(|&x| check_open(x))
    }

    fn check_table(&self, table: &SparseProbTable) -> Result<()> {
        if table.dim() != self.dim() {
            return Err(CopulaError::DimensionMismatch { expected: self.dim(), found: table.dim() });
        }
        for (k, fam) in self.families.iter().enumerate() {
            if let (Some(size), Some(max)) = (fam.support_size(), table.max_index(k)) {
                if u64::from(max) >= size {
                    return Err(CopulaError::Index { index: u64::from(max), a: size as u32 });
                }
            }
        }
        Ok(())
    }

    /// Component densities `f_k(i, u)` for `i = 0..=max`.
    fn component_row(&self, k: usize, max: Option<u32>, u: f64) -> Vec<f64> {
        let fam = &self.families[k];
        match max {
            Some(m) => (0..=u64::from(m)).map(|i| fam.component_density_unchecked(i, u)).collect(),
            None => Vec::new(),
        }
    }

    /// Copula density at an interior point, summed over the table.
    pub fn density(&self, table: &SparseProbTable, u: &[f64]) -> Result<f64> {
        self.check_point(u)?;
        self.check_table(table)?;
        let rows: Vec<Vec<f64>> = (0..self.dim())
            .map(|k| self.component_row(k, table.max_index(k), u[k]))
            .collect();
        Ok(table
            .iter()
            .map(|(idx, p)| {
                idx.iter()
                    .enumerate()
                    .fold(p, |acc, (k, &i)| acc * rows[k][i as usize])
            })
            .sum())
    }

    /// Bivariate density on the grid `us x vs`, row-major with `u` outer.
    pub fn density_grid(&self, table: &SparseProbTable, us: &[f64], vs: &[f64]) -> Result<Vec<f64>> {
        if self.dim() != 2 {
            return Err(CopulaError::DimensionMismatch { expected: 2, found: self.dim() });
        }
        self.check_table(table)?;
        us.iter().chain(vs).try_for_each(|&x| check_open(x))?;
        let max_j = table.max_index(1);
        let g: Vec<Vec<f64>> = vs.iter().map(|&v| self.component_row(1, max_j, v)).collect();
        let width = max_j.map_or(0, |m| m as usize + 1);
        let mut out = Vec::with_capacity(us.len() * vs.len());
        let mut weights = vec![0.0; width];
        for &u in us {
            let f = self.component_row(0, table.max_index(0), u);
            weights.fill(0.0);
            for (idx, p) in table.iter() {
                weights[idx[1] as usize] += p * f[idx[0] as usize];
            }
            for gv in &g {
                out.push(weights.iter().zip(gv).map(|(w, g)| w * g).sum());
            }
        }
        Ok(out)
    }

    /// One draw: a patchwork point, discretized per coordinate, then each
    /// coordinate redrawn from its component density.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.sample_into(rng, &mut out);
        out
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        self.driver.sample_into(rng, out);
        for (fam, x) in self.families.iter().zip(out.iter_mut()) {
            let i = fam.discretize_unchecked(*x);
            *x = fam.sample_component_unchecked(i, rng);
        }
    }
}

impl CopulaSampler for PuCopula {
    fn dim(&self) -> usize {
        self.families.len()
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        PuCopula::sample_into(self, rng, out);
    }
}

/// Indices along one axis whose cells overlap one rank slab.
#[derive(Debug, Clone, Copy)]
struct Span {
    first: u64,
    /// inclusive; `first > last` means empty
    last: u64,
    /// the slab extends past the index limit
    truncated: bool,
}

impl Span {
    fn new(fam: &PartitionFamily, r: usize, n: usize, limit: u64) -> Self {
        let first = fam
            .first_index_scaled_above((r - 1) as f64, n, false)
            .expect("slab below the top always starts at a finite index");
        let natural_last = fam.first_index_scaled_above(r as f64, n, true);
        let (last, truncated) = match natural_last {
            Some(l) if l <= limit => (l, false),
            _ => (limit, true),
        };
        Self { first, last, truncated }
    }

    fn len(&self) -> u64 {
        if self.first > self.last {
            0
        } else {
            self.last - self.first + 1
        }
    }
}

/// Local (within-cell) edges of the indices in a span.
struct CellEdges {
    first: u32,
    lo: Vec<f64>,
    hi: Vec<f64>,
    truncated: bool,
}

impl CellEdges {
    fn new(fam: &PartitionFamily, span: &Span, driver: &PatchworkCopula, j: usize, k: usize) -> Self {
        let n = driver.n();
        let mut lo = Vec::with_capacity(span.len() as usize);
        let mut hi = Vec::with_capacity(span.len() as usize);
        for i in span.first..=span.last {
            if span.first > span.last {
                break;
            }
            lo.push(driver.local_coord(j, k, fam.scaled_lower_edge(i, n)));
            hi.push(driver.local_coord(j, k, fam.scaled_upper_edge(i, n)));
        }
        Self { first: span.first as u32, lo, hi, truncated: span.truncated }
    }
}

/// Visits every index box of a rook cell.
fn for_each_box(cell: &[CellEdges], push: &mut impl FnMut(&[u32], &[f64], &[f64])) {
    let d = cell.len();
    let mut pos = vec![0usize; d];
    let mut tuple: Vec<u32> = cell.iter().map(|c| c.first).collect();
    let mut lo: Vec<f64> = cell.iter().map(|c| c.lo[0]).collect();
    let mut hi: Vec<f64> = cell.iter().map(|c| c.hi[0]).collect();
    loop {
        push(&tuple, &lo, &hi);
        let mut j = d;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            pos[j] += 1;
            if pos[j] < cell[j].lo.len() {
                break;
            }
            pos[j] = 0;
        }
        for (m, c) in cell.iter().enumerate().skip(j) {
            tuple[m] = c.first + pos[m] as u32;
            lo[m] = c.lo[pos[m]];
            hi[m] = c.hi[pos[m]];
        }
    }
}

/// Walks the diagonal of a Fréchet cell. Along the parameter `z` the local
/// coordinate is `z`, or `1 - z` on reflected axes; between consecutive
/// edge crossings the index tuple is constant.
fn for_each_segment(cell: &[CellEdges], reflected: &[bool], push: &mut impl FnMut(&[u32], &[f64], &[f64])) {
    let mut breaks = vec![0.0, 1.0];
    for (c, &refl) in cell.iter().zip(reflected) {
        for &h in &c.hi {
            if h > 0.0 && h < 1.0 {
                breaks.push(if refl { 1.0 - h } else { h });
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let d = cell.len();
    let mut tuple = vec![0u32; d];
    let mut lo = vec![0.0; d];
    let mut hi = vec![0.0; d];
    'segments: for w in breaks.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        for (j, (c, &refl)) in cell.iter().zip(reflected).enumerate() {
            let x = if refl { 1.0 - mid } else { mid };
            let pos = c.hi.partition_point(|&h| h < x);
            if pos == c.hi.len() {
                debug_assert!(c.truncated);
                continue 'segments;
            }
            tuple[j] = c.first + pos as u32;
            lo[j] = c.lo[pos];
            hi[j] = c.hi[pos];
        }
        push(&tuple, &lo, &hi);
    }
}

/// Empirical upper tail dependence at threshold `t`: among points whose
/// first coordinate exceeds `t`, the fraction whose second does too. Returns
/// 0 when no first coordinate exceeds `t`.
pub fn tail_dependence_estimate<'a, I>(points: I, t: f64) -> Result<f64>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    check_open(t)?;
    let mut seen = 0usize;
    let mut above_u = 0usize;
    let mut joint = 0usize;
    for p in points {
        if p.len() < 2 {
            return Err(CopulaError::DimensionMismatch { expected: 2, found: p.len() });
        }
        seen += 1;
        if p[0] > t {
            above_u += 1;
            if p[1] > t {
                joint += 1;
            }
        }
    }
    if seen == 0 {
        return Err(CopulaError::InvalidParameter("no samples for tail dependence".into()));
    }
    Ok(if above_u == 0 { 0.0 } else { (joint as f64 / above_u as f64).clamp(0.0, 1.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::ranks::{compute_ranks, RankData};

    fn fixture_ranks() -> RankData {
        compute_ranks(&fixtures::loss_pairs()).unwrap()
    }

    fn cop(fams: [PartitionFamily; 2], kind: CellCopulaKind) -> PuCopula {
        PuCopula::new(fams.to_vec(), PatchworkCopula::new(fixture_ranks(), kind).unwrap()).unwrap()
    }

    #[test]
    fn aligned_bernstein_reproduces_rank_cells() {
        for kind in [CellCopulaKind::Rook, CellCopulaKind::UpperFrechet, CellCopulaKind::LowerFrechet] {
            let b = PartitionFamily::bernstein(20).unwrap();
            let table = cop([b, b], kind).compute_pij().unwrap();
            assert_eq!(table.len(), 20, "{kind}");
            let ranks = fixture_ranks();
            for k in 0..20 {
                let idx = [ranks.ranks(0)[k] - 1, ranks.ranks(1)[k] - 1];
                assert_eq!(table.get(&idx), 0.05, "{kind} {idx:?}");
            }
            assert_eq!(table.pruned_mass(), 0.0);
        }
    }

    #[test]
    fn bernstein_marginals_are_exact() {
        for kind in [CellCopulaKind::Rook, CellCopulaKind::UpperFrechet, CellCopulaKind::LowerFrechet] {
            let c = cop([PartitionFamily::bernstein(22).unwrap(), PartitionFamily::bernstein(27).unwrap()], kind);
            let table = c.compute_pij().unwrap();
            assert!((table.total_mass() - 1.0).abs() < 1e-13);
            for (k, a) in [(0, 22.0), (1, 27.0)] {
                let m = table.marginal(k);
                assert_eq!(m.len(), a as usize);
                for x in m {
                    assert!((x - 1.0 / a).abs() < 1e-14, "{kind} coordinate {k}: {x}");
                }
            }
        }
    }

    #[test]
    fn truncated_tables_report_residual() {
        let nb = |a| PartitionFamily::neg_binomial(a).unwrap();
        let c = PuCopula::with_config(
            vec![nb(17.0), nb(22.0)],
            PatchworkCopula::new(fixture_ranks(), CellCopulaKind::Rook).unwrap(),
            TableConfig { max_index: 300, ..TableConfig::default() },
        )
        .unwrap();
        assert_eq!(c.index_limits(), vec![300, 300]);
        let table = c.compute_pij().unwrap();
        let expected_loss_bound = nb(17.0).tail_mass(300) + nb(22.0).tail_mass(300);
        assert!(table.residual() > 0.0 && table.residual() <= expected_loss_bound + 1e-12);
        assert!(table.max_index(0).unwrap() <= 300);
    }

    #[test]
    fn table_budget_is_enforced() {
        let nb = PartitionFamily::neg_binomial(17.0).unwrap();
        let c = PuCopula::with_config(
            vec![nb, nb],
            PatchworkCopula::new(fixture_ranks(), CellCopulaKind::Rook).unwrap(),
            TableConfig { max_index: 100_000, max_entries: 1000, ..TableConfig::default() },
        )
        .unwrap();
        assert!(matches!(c.compute_pij(), Err(CopulaError::TableTooLarge { .. })));
    }

    #[test]
    fn family_count_must_match_dimension() {
        let driver = PatchworkCopula::new(fixture_ranks(), CellCopulaKind::Rook).unwrap();
        let b = PartitionFamily::bernstein(3).unwrap();
        assert!(matches!(
            PuCopula::new(vec![b], driver),
            Err(CopulaError::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn density_matches_brute_force_double_sum() {
        // a = b = n with identity ranks and rook cells: p is diagonal 1/n
        let n = 5u32;
        let ranks = RankData::from_ranks(vec![(1..=n).collect(), (1..=n).collect()]).unwrap();
        let b = PartitionFamily::bernstein(n).unwrap();
        let c = PuCopula::new(vec![b, b], PatchworkCopula::new(ranks, CellCopulaKind::Rook).unwrap()).unwrap();
        let table = c.compute_pij().unwrap();
        let (u, v) = (0.5 / f64::from(n), 0.5 / f64::from(n));
        let mut brute = 0.0;
        for i in 0..u64::from(n) {
            for j in 0..u64::from(n) {
                let p = if i == j { 1.0 / f64::from(n) } else { 0.0 };
                brute += p * b.component_density(i, u).unwrap() * b.component_density(j, v).unwrap();
            }
        }
        let got = c.density(&table, &[u, v]).unwrap();
        assert!((got - brute).abs() < 1e-12 * brute, "{got} vs {brute}");
    }

    #[test]
    fn density_grid_matches_pointwise_density() {
        let c = cop(
            [PartitionFamily::poisson(17.0).unwrap(), PartitionFamily::neg_binomial(5.0).unwrap()],
            CellCopulaKind::LowerFrechet,
        );
        let table = c.compute_pij().unwrap();
        let us = [0.1, 0.5, 0.93];
        let vs = [0.02, 0.6];
        let grid = c.density_grid(&table, &us, &vs).unwrap();
        for (a, &u) in us.iter().enumerate() {
            for (b, &v) in vs.iter().enumerate() {
                let direct = c.density(&table, &[u, v]).unwrap();
                assert!((grid[a * vs.len() + b] - direct).abs() < 1e-10 * direct.max(1.0));
            }
        }
    }

    #[test]
    fn density_checks_inputs() {
        let c = cop([PartitionFamily::bernstein(3).unwrap(), PartitionFamily::bernstein(3).unwrap()], CellCopulaKind::Rook);
        let table = c.compute_pij().unwrap();
        assert!(matches!(c.density(&table, &[0.0, 0.5]), Err(CopulaError::Domain { .. })));
        assert!(matches!(c.density(&table, &[0.5]), Err(CopulaError::DimensionMismatch { .. })));
        let wide = SparseProbTable::from_entries(2, vec![(vec![5, 0], 1.0)]).unwrap();
        assert!(matches!(c.density(&wide, &[0.5, 0.5]), Err(CopulaError::Index { .. })));
    }

    #[test]
    fn tail_dependence_examples() {
        let diag: Vec<[f64; 2]> = (1..=1000).map(|i| [i as f64 / 1001.0; 2]).collect();
        for t in [0.5, 0.9, 0.99, 0.998] {
            assert_eq!(tail_dependence_estimate(diag.iter().map(|p| &p[..]), t).unwrap(), 1.0);
        }
        assert_eq!(tail_dependence_estimate(diag.iter().map(|p| &p[..]), 0.9995).unwrap(), 0.0);
        let anti: Vec<[f64; 2]> = (1..=1000).map(|i| [i as f64 / 1001.0, 1.0 - i as f64 / 1001.0]).collect();
        assert_eq!(tail_dependence_estimate(anti.iter().map(|p| &p[..]), 0.9).unwrap(), 0.0);
        let empty: Vec<&[f64]> = Vec::new();
        assert!(tail_dependence_estimate(empty, 0.9).is_err());
        assert!(tail_dependence_estimate(diag.iter().map(|p| &p[..]), 1.0).is_err());
    }
}
