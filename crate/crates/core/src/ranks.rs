//! Rank vectors and the empirical copula.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{CopulaError, Result};

/// How to handle tied values within a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiePolicy {
    /// Reject the data with [`CopulaError::Ties`].
    #[default]
    Reject,
    /// Break ties by input order (earlier row gets the lower rank). This is
    /// not a continuous-marginal model; use only when the caller accepts it.
    InputOrder,
}

/// `d` rank vectors of length `n`, each a permutation of `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankData {
    n: usize,
    ranks: Vec<Vec<u32>>,
}

impl RankData {
    /// Wraps precomputed rank vectors (one per coordinate), checking that
    /// each is a permutation of `1..=n`.
    pub fn from_ranks(ranks: Vec<Vec<u32>>) -> Result<Self> {
        if ranks.len() < 2 {
            return Err(CopulaError::InvalidRanks(format!(
                "need at least 2 coordinates, got {}",
                ranks.len()
            )));
        }
        let n = ranks[0].len();
        if n == 0 {
            return Err(CopulaError::InvalidRanks("no observations".into()));
        }
        for (k, column) in ranks.iter().enumerate() {
            if column.len() != n {
                return Err(CopulaError::InvalidRanks(format!(
                    "coordinate {k} has {} ranks, expected {n}",
                    column.len()
                )));
            }
            let mut seen = vec![false; n];
            for &r in column {
                let r = r as usize;
                if r == 0 || r > n || std::mem::replace(&mut seen[r - 1], true) {
                    return Err(CopulaError::InvalidRanks(format!(
                        "coordinate {k} is not a permutation of 1..={n}"
                    )));
                }
            }
        }
        Ok(Self { n, ranks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.ranks.len()
    }

    /// Rank vector of coordinate `k`.
    pub fn ranks(&self, k: usize) -> &[u32] {
        &self.ranks[k]
    }

    pub fn columns(&self) -> &[Vec<u32>] {
        &self.ranks
    }

    /// The rank tuple of observation `i`.
    pub fn observation(&self, i: usize) -> Vec<u32> {
        self.ranks.iter().map(|c| c[i]).collect()
    }

    /// Relative ranks `r / (n + 1)`, one point per observation.
    pub fn relative_ranks(&self) -> Vec<Vec<f64>> {
        let scale = (self.n + 1) as f64;
        (0..self.n)
            .map(|i| self.ranks.iter().map(|c| f64::from(c[i]) / scale).collect())
            .collect()
    }

    /// Reorders the observations; the copula built on the result is unchanged.
    pub fn permute_observations(&self, order: &[usize]) -> Result<Self> {
        let ranks = self
            .ranks
            .iter()
            .map(|c| order.iter().map(|&i| c[i]).collect())
            .collect();
        Self::from_ranks(ranks)
    }
}

/// Ranks each column of an `n x d` row-major data set; the smallest value in
/// a column gets rank 1.
pub fn compute_ranks(rows: &[Vec<f64>]) -> Result<RankData> {
    compute_ranks_with(rows, TiePolicy::Reject)
}

pub fn compute_ranks_with(rows: &[Vec<f64>], ties: TiePolicy) -> Result<RankData> {
    let n = rows.len();
    if n == 0 {
        return Err(CopulaError::InvalidRanks("no observations".into()));
    }
    let d = rows[0].len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != d {
            return Err(CopulaError::Parse {
                line: i + 1,
                message: format!("row has {} columns, expected {d}", row.len()),
            });
        }
        if let Some(v) = row.iter().find(|v| !v.is_finite()) {
            return Err(CopulaError::Parse { line: i + 1, message: format!("non-finite value {v}") });
        }
    }
    let ranks = (0..d)
        .map(|k| {
            let key = |i: usize| rows[i][k];
            let mut order: Vec<usize> = (0..n).collect();
            // stable sort keeps input order among ties
            order.sort_by(|&x, &y| key(x).total_cmp(&key(y)));
            if ties == TiePolicy::Reject {
                if let Some(w) = order.windows(2).find(|w| key(w[0]) == key(w[1])) {
                    return Err(CopulaError::Ties { column: k, value: key(w[0]) });
                }
            }
            let mut column = vec![0u32; n];
            for (rank, &i) in order.iter().enumerate() {
                column[i] = rank as u32 + 1;
            }
            Ok(column)
        })
        .collect::<Result<Vec<_>>>()?;
    RankData::from_ranks(ranks)
}

/// Reads comma-separated numeric rows. A first line that does not parse as
/// numbers is taken as a header and skipped.
pub fn read_data_csv<R: Read>(reader: R) -> Result<Vec<Vec<f64>>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows = Vec::new();
    let mut width = None;
    for (idx, record) in csv.records().enumerate() {
        let line = idx + 1;
        let record = record.map_err(|e| CopulaError::Parse { line, message: e.to_string() })?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if rows.is_empty() && width.is_none() => {
                width = Some(record.len());
                continue;
            }
            Err(e) => return Err(CopulaError::Parse { line, message: e.to_string() }),
        };
        if let Some(w) = width {
            if row.len() != w {
                return Err(CopulaError::Parse {
                    line,
                    message: format!("expected {w} columns, found {}", row.len()),
                });
            }
        }
        width = Some(row.len());
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CopulaError::Parse { line: 0, message: "no data rows".into() });
    }
    Ok(rows)
}

/// Writes ranks as `i,r1,...,rd` rows with a header.
pub fn write_ranks_csv<W: std::io::Write>(ranks: &RankData, mut out: W) -> Result<()> {
    let header: Vec<String> = (1..=ranks.dim()).map(|k| format!("r{k}")).collect();
    writeln!(out, "i,{}", header.join(","))?;
    for i in 0..ranks.n() {
        let row: Vec<String> = ranks.observation(i).iter().map(u32::to_string).collect();
        writeln!(out, "{},{}", i + 1, row.join(","))?;
    }
    Ok(())
}

/// Reads the output of [`write_ranks_csv`].
pub fn read_ranks_csv<R: Read>(reader: R) -> Result<RankData> {
    let rows = read_data_csv(reader)?;
    let d = rows[0].len().saturating_sub(1);
    let mut columns = vec![Vec::with_capacity(rows.len()); d];
    for (line, row) in rows.iter().enumerate() {
        for (k, &v) in row[1..].iter().enumerate() {
            if v.fract() != 0.0 || v < 1.0 {
                return Err(CopulaError::Parse { line: line + 1, message: format!("bad rank {v}") });
            }
            columns[k].push(v as u32);
        }
    }
    RankData::from_ranks(columns)
}
