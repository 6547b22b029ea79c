//! Sparse storage for the discrete joint distribution `p_i` over index tuples.

use std::cmp::Ordering;
use std::io::{Read, Write};

use crate::error::{CopulaError, Result};
use crate::ranks::read_data_csv;

/// Probabilities at or below this are round-off noise and clamp to zero.
pub(crate) const NEGATIVE_TOLERANCE: f64 = -1e-14;

/// Index tuple -> probability, sorted lexicographically by index.
///
/// Built by [`crate::PuCopula::compute_pij`]. Mass that was not stored
/// (beyond the per-coordinate index limits, or pruned as negligible) is
/// reported by [`residual`](Self::residual), never silently redistributed.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseProbTable {
    dim: usize,
    indices: Vec<u32>,
    probs: Vec<f64>,
    total_mass: f64,
    pruned_mass: f64,
}

impl SparseProbTable {
    /// Builds a table from raw contributions, summing duplicates. Entries
    /// whose merged mass is below `prune_below` are dropped and counted in
    /// [`pruned_mass`](Self::pruned_mass).
    ///
    /// Duplicates are summed in ascending order of value, so the result does
    /// not depend on the order contributions arrive in.
    pub(crate) fn from_contributions(dim: usize, keys: Vec<u32>, values: Vec<f64>, prune_below: f64) -> Self {
        debug_assert_eq!(keys.len(), values.len() * dim);
        let key = |i: usize| &keys[i * dim..(i + 1) * dim];
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_unstable_by(|&x, &y| match key(x).cmp(key(y)) {
            Ordering::Equal => values[x].total_cmp(&values[y]),
            other => other,
        });

        let mut indices = Vec::new();
        let mut probs = Vec::new();
        let mut pruned_mass = 0.0;
        let mut pos = 0;
        while pos < order.len() {
            let head = order[pos];
            let mut sum = 0.0;
            while pos < order.len() && key(order[pos]) == key(head) {
                sum += values[order[pos]];
                pos += 1;
            }
            debug_assert!(sum >= NEGATIVE_TOLERANCE, "negative mass {sum} at {:?}", key(head));
            let p = sum.max(0.0);
            if p < prune_below || p == 0.0 {
                pruned_mass += p;
                continue;
            }
            indices.extend_from_slice(key(head));
            probs.push(p);
        }
        let total_mass = probs.iter().sum();
        Self { dim, indices, probs, total_mass, pruned_mass }
    }

    /// Builds a table from explicit entries. Probabilities must be
    /// nonnegative; duplicate tuples are summed.
    pub fn from_entries<I>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let mut keys = Vec::new();
        let mut values = Vec::new();
        for (idx, p) in entries {
            if idx.len() != dim {
                return Err(CopulaError::DimensionMismatch { expected: dim, found: idx.len() });
            }
            if !p.is_finite() || p < 0.0 {
                return Err(CopulaError::InvalidParameter(format!("invalid probability {p} at {idx:?}")));
            }
            keys.extend(idx);
            values.push(p);
        }
        Ok(Self::from_contributions(dim, keys, values, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Sum of stored probabilities.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// `1 - total_mass`: everything not represented in the table.
    pub fn residual(&self) -> f64 {
        (1.0 - self.total_mass).max(0.0)
    }

    /// Part of the residual that came from pruning tiny entries.
    pub fn pruned_mass(&self) -> f64 {
        self.pruned_mass
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (&[u32], f64)> + '_ {
        self.indices.chunks_exact(self.dim).zip(self.probs.iter().copied())
    }

    /// Probability stored at `index`, 0 when absent.
    pub fn get(&self, index: &[u32]) -> f64 {
        let mut lo = 0;
        let mut hi = self.probs.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.key(mid).cmp(index) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return self.probs[mid],
            }
        }
        0.0
    }

    fn key(&self, i: usize) -> &[u32] {
        &self.indices[i * self.dim..(i + 1) * self.dim]
    }

    /// Largest stored index along coordinate `k`.
    pub fn max_index(&self, k: usize) -> Option<u32> {
        self.indices.iter().skip(k).step_by(self.dim).copied().max()
    }

    /// Row sums along coordinate `k`: entry `i` is the stored mass with
    /// `index[k] == i`.
    pub fn marginal(&self, k: usize) -> Vec<f64> {
        let len = self.max_index(k).map_or(0, |m| m as usize + 1);
        let mut out = vec![0.0; len];
        for (idx, p) in self.iter() {
            out[idx[k] as usize] += p;
        }
        out
    }

    /// A copy scaled to total mass 1.
    pub fn renormalized(&self) -> Self {
        let mut out = self.clone();
        if self.total_mass > 0.0 {
            for p in &mut out.probs {
                *p /= self.total_mass;
            }
            out.total_mass = out.probs.iter().sum();
        }
        out
    }

    /// Writes `i,j,p` rows (`i1,...,id,p` beyond two dimensions) with a
    /// header, probabilities to 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        if self.dim == 2 {
            writeln!(out, "i,j,p")?;
        } else {
            let cols: Vec<String> = (1..=self.dim).map(|k| format!("i{k}")).collect();
            writeln!(out, "{},p", cols.join(","))?;
        }
        let mut line = String::new();
        for (idx, p) in self.iter() {
            line.clear();
            for i in idx {
                line.push_str(&i.to_string());
                line.push(',');
            }
            line.push_str(&format!("{p:.16e}"));
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let rows = read_data_csv(reader)?;
        let dim = rows[0].len() - 1;
        if dim == 0 {
            return Err(CopulaError::Parse { line: 1, message: "expected index columns and a probability".into() });
        }
        let mut entries = Vec::with_capacity(rows.len());
        for (line, row) in rows.into_iter().enumerate() {
            let (idx, p) = row.split_at(dim);
            let idx: Option<Vec<u32>> = idx
                .iter()
                .map(|&v| (v >= 0.0 && v.fract() == 0.0 && v <= f64::from(u32::MAX)).then_some(v as u32))
                .collect();
            let idx = idx.ok_or_else(|| CopulaError::Parse { line: line + 1, message: "bad index".into() })?;
            entries.push((idx, p[0]));
        }
        Self::from_entries(dim, entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_merged_and_sorted() {
        let t = SparseProbTable::from_entries(
            2,
            vec![(vec![1, 0], 0.25), (vec![0, 1], 0.5), (vec![1, 0], 0.25)],
        )
        .unwrap();
        let entries: Vec<_> = t.iter().map(|(i, p)| (i.to_vec(), p)).collect();
        assert_eq!(entries, vec![(vec![0, 1], 0.5), (vec![1, 0], 0.5)]);
        assert_eq!(t.get(&[1, 0]), 0.5);
        assert_eq!(t.get(&[1, 1]), 0.0);
        assert_eq!(t.total_mass(), 1.0);
        assert_eq!(t.marginal(0), vec![0.5, 0.5]);
        assert_eq!(t.marginal(1), vec![0.5, 0.5]);
    }

    #[test]
    fn pruning_is_reported() {
        let t = SparseProbTable::from_contributions(1, vec![0, 1, 2], vec![0.5, 1e-17, 0.25], 1e-15);
        assert_eq!(t.len(), 2);
        assert_eq!(t.pruned_mass(), 1e-17);
        assert_eq!(t.residual(), 0.25);
        assert!((t.renormalized().total_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(SparseProbTable::from_entries(2, vec![(vec![0], 0.5)]).is_err());
        assert!(SparseProbTable::from_entries(2, vec![(vec![0, 0], -0.5)]).is_err());
        assert!(SparseProbTable::from_entries(2, vec![(vec![0, 0], f64::NAN)]).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = SparseProbTable::from_entries(
            3,
            vec![(vec![0, 2, 1], 0.1), (vec![4, 0, 0], 1.0 / 3.0), (vec![0, 0, 7], 0.05)],
        )
        .unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("i1,i2,i3,p\n0,0,7,5.0000000000000003e-2\n"), "{text}");
        assert_eq!(SparseProbTable::read_csv(buf.as_slice()).unwrap(), t);
    }
}
