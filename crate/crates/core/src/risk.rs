//! Monte Carlo aggregation of losses coupled by a copula.

use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{CopulaError, Result};
use crate::ranks::read_data_csv;
use crate::sim::{draw_map, CopulaSampler};

/// How a marginal loss distribution is represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MarginalKind {
    /// Piecewise-linear quantile through the order statistics.
    #[default]
    Empirical,
    /// Lognormal with maximum-likelihood parameters.
    Lognormal,
}

impl std::fmt::Display for MarginalKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(match self {
            MarginalKind::Empirical => "empirical",
            MarginalKind::Lognormal => "lognormal",
        })
    }
}

impl FromStr for MarginalKind {
    type Err = CopulaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "empirical" | "empirical-interp" | "empiricalinterp" => Ok(MarginalKind::Empirical),
            "lognormal" | "lognormal-mle" | "lognormalmle" => Ok(MarginalKind::Lognormal),
            other => Err(CopulaError::InvalidParameter(format!("unknown marginal model '{other}'"))),
        }
    }
}

/// A fitted marginal quantile function.
#[derive(Debug, Clone, PartialEq)]
pub enum MarginalModel {
    /// Sorted data; `Q(i/(n+1))` is the `i`-th order statistic, linear in
    /// between and flat beyond the first and last plotting positions.
    EmpiricalInterp { sorted: Vec<f64> },
    /// `Q(u) = exp(mu + sigma * z_u)`.
    LognormalMle { mu: f64, sigma: f64 },
}

pub fn fit_marginal(kind: MarginalKind, data: &[f64]) -> Result<MarginalModel> {
    if data.is_empty() {
        return Err(CopulaError::InvalidParameter("cannot fit a marginal to no data".into()));
    }
    if let Some(bad) = data.iter().find(|x| !x.is_finite()) {
        return Err(CopulaError::InvalidParameter(format!("non-finite observation {bad}")));
    }
    match kind {
        MarginalKind::Empirical => {
            let mut sorted = data.to_vec();
            sorted.sort_by(f64::total_cmp);
            Ok(MarginalModel::EmpiricalInterp { sorted })
        }
        MarginalKind::Lognormal => {
            if let Some(bad) = data.iter().find(|&&x| x <= 0.0) {
                return Err(CopulaError::InvalidParameter(format!(
                    "lognormal fit needs positive data, found {bad}"
                )));
            }
            let n = data.len() as f64;
            let logs: Vec<f64> = data.iter().map(|x| x.ln()).collect();
            let mu = logs.iter().sum::<f64>() / n;
            let var = logs.iter().map(|l| (l - mu).powi(2)).sum::<f64>() / n;
            Ok(MarginalModel::LognormalMle { mu, sigma: var.sqrt() })
        }
    }
}

impl MarginalModel {
    pub fn kind(&self) -> MarginalKind {
        match self {
            MarginalModel::EmpiricalInterp { .. } => MarginalKind::Empirical,
            MarginalModel::LognormalMle { .. } => MarginalKind::Lognormal,
        }
    }

    /// Quantile at `u`; `u` outside (0,1) is clamped to the open interval.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = crate::clamp_open(u);
        match self {
            MarginalModel::EmpiricalInterp { sorted } => {
                let n = sorted.len();
                // position on the 1-based order-statistic scale
                let pos = u * (n + 1) as f64;
                if pos <= 1.0 {
                    return sorted[0];
                }
                if pos >= n as f64 {
                    return sorted[n - 1];
                }
                let lo = pos.floor();
                let w = pos - lo;
                let i = lo as usize - 1;
                sorted[i] + w * (sorted[i + 1] - sorted[i])
            }
            MarginalModel::LognormalMle { mu, sigma } => {
                if *sigma == 0.0 {
                    return mu.exp();
                }
                let z = Normal::standard().inverse_cdf(u);
                (mu + sigma * z).exp()
            }
        }
    }
}

/// Quantile levels and matching values, both nondecreasing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuantileCurve {
    pub levels: Vec<f64>,
    pub values: Vec<f64>,
}

impl QuantileCurve {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.levels.iter().copied().zip(self.values.iter().copied())
    }

    pub fn is_monotone(&self) -> bool {
        self.levels.windows(2).all(|w| w[0] <= w[1]) && self.values.windows(2).all(|w| w[0] <= w[1])
    }

    /// Writes `level,quantile` rows in shortest round-trip notation.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "level,quantile")?;
        for (l, q) in self.iter() {
            writeln!(out, "{l:?},{q:?}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let rows = read_data_csv(reader)?;
        if rows[0].len() != 2 {
            return Err(CopulaError::Parse { line: 1, message: "expected two columns: level,quantile".into() });
        }
        Ok(Self {
            levels: rows.iter().map(|r| r[0]).collect(),
            values: rows.iter().map(|r| r[1]).collect(),
        })
    }
}

/// The 1-based order-statistic index `ceil(n p)`, clamped to `[1, n]`.
/// Products within 1e-9 of an integer snap to it, so `0.95 * 100` is 95
/// however it rounds.
pub fn order_index(n: usize, p: f64) -> usize {
    let x = n as f64 * p;
    let r = x.round();
    let k = if (x - r).abs() <= 1e-9 * r.max(1.0) { r } else { x.ceil() };
    (k.max(1.0) as usize).min(n)
}

/// Quantiles of `sums` at `levels` using the `ceil(n p)`-th order statistic.
pub fn empirical_quantiles(sums: &[f64], levels: &[f64]) -> Result<QuantileCurve> {
    if sums.is_empty() {
        return Err(CopulaError::InvalidParameter("no values to take quantiles of".into()));
    }
    let mut sorted = sums.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantiles_of_sorted(&sorted, levels)
}

pub fn quantiles_of_sorted(sorted: &[f64], levels: &[f64]) -> Result<QuantileCurve> {
    let mut levels = levels.to_vec();
    if let Some(bad) = levels.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(CopulaError::InvalidParameter(format!("quantile level {bad} is outside (0,1)")));
    }
    levels.sort_by(f64::total_cmp);
    let values = levels.iter().map(|&p| sorted[order_index(sorted.len(), p) - 1]).collect();
    Ok(QuantileCurve { levels, values })
}

/// Levels `k/(n+1)` selecting each of the largest `ceil(fraction n)` order
/// statistics exactly once.
pub fn tail_levels(n: usize, fraction: f64) -> Vec<f64> {
    let m = ((fraction.clamp(0.0, 1.0) * n as f64).ceil() as usize).min(n);
    (n - m + 1..=n).map(|k| k as f64 / (n + 1) as f64).collect()
}

/// Portfolio sums `S = sum_k Q_k(u_k)` over `n_sims` seeded draws, in draw
/// order. The result depends only on the seed and `n_sims`.
pub fn simulate_portfolio<S>(sampler: &S, margins: &[MarginalModel], n_sims: usize, seed: u64) -> Result<Vec<f64>>
where
    S: CopulaSampler + Sync,
{
    if margins.len() != sampler.dim() {
        return Err(CopulaError::DimensionMismatch { expected: sampler.dim(), found: margins.len() });
    }
    Ok(draw_map(sampler, n_sims, seed, |u| {
        u.iter().zip(margins).map(|(&x, m)| m.quantile(x)).sum()
    }))
}

/// Writes a single `sum` column.
pub fn write_sums_csv<W: Write>(sums: &[f64], mut out: W) -> Result<()> {
    writeln!(out, "sum")?;
    for s in sums {
        writeln!(out, "{s:?}")?;
    }
    Ok(())
}

pub fn read_sums_csv<R: Read>(reader: R) -> Result<Vec<f64>> {
    let rows = read_data_csv(reader)?;
    if rows[0].len() != 1 {
        return Err(CopulaError::Parse { line: 1, message: "expected a single column".into() });
    }
    Ok(rows.into_iter().map(|r| r[0]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn lognormal_on_constant_data() {
        let e = std::f64::consts::E;
        let m = fit_marginal(MarginalKind::Lognormal, &[e, e, e]).unwrap();
        match m {
            MarginalModel::LognormalMle { mu, sigma } => {
                assert!((mu - 1.0).abs() < 1e-15);
                assert_eq!(sigma, 0.0);
            }
            _ => unreachable!(),
        }
        assert!((m.quantile(0.3) - e).abs() < 1e-15);
        assert!(fit_marginal(MarginalKind::Lognormal, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn lognormal_median_is_exp_mu() {
        let m = fit_marginal(MarginalKind::Lognormal, &[1.0, 4.0]).unwrap();
        assert!((m.quantile(0.5) - 2.0).abs() < 1e-12);
        assert!(m.quantile(0.9) > 2.0);
    }

    #[test]
    fn empirical_hits_order_statistics() {
        let m = fit_marginal(MarginalKind::Empirical, &[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(m.quantile(0.5), 2.0);
        assert_eq!(m.quantile(0.25), 1.0);
        assert_eq!(m.quantile(0.375), 1.5);
        assert_eq!(m.quantile(0.01), 1.0);
        assert_eq!(m.quantile(0.99), 3.0);

        let xs: Vec<f64> = fixtures::loss_pairs().iter().map(|r| r[0]).collect();
        let m = fit_marginal(MarginalKind::Empirical, &xs).unwrap();
        assert_eq!(m.quantile(4.0 / 21.0), 0.468);
        let mut sorted = xs.clone();
        sorted.sort_by(f64::total_cmp);
        for (i, x) in sorted.iter().enumerate() {
            assert!((m.quantile((i + 1) as f64 / 21.0) - x).abs() < 1e-12);
        }
    }

    #[test]
    fn order_statistic_convention() {
        let sums: Vec<f64> = (1..=100).map(f64::from).collect();
        let c = empirical_quantiles(&sums, &[0.95, 0.5, 0.999]).unwrap();
        assert_eq!(c.levels, vec![0.5, 0.95, 0.999]);
        assert_eq!(c.values, vec![50.0, 95.0, 100.0]);
        let one = empirical_quantiles(&[7.5], &[0.01, 0.5, 0.99]).unwrap();
        assert!(one.values.iter().all(|&v| v == 7.5));
        assert!(empirical_quantiles(&sums, &[1.0]).is_err());
        assert!(empirical_quantiles(&[], &[0.5]).is_err());
    }

    #[test]
    fn tail_levels_pick_each_top_statistic() {
        let sums: Vec<f64> = (1..=50).map(f64::from).collect();
        let levels = tail_levels(50, 0.1);
        assert_eq!(levels.len(), 5);
        let c = empirical_quantiles(&sums, &levels).unwrap();
        assert_eq!(c.values, vec![46.0, 47.0, 48.0, 49.0, 50.0]);
    }

    #[test]
    fn csv_round_trips() {
        let c = QuantileCurve { levels: vec![0.9, 0.99], values: vec![1.0 / 3.0, 2.5e10] };
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        assert_eq!(QuantileCurve::read_csv(buf.as_slice()).unwrap(), c);
        let sums = vec![0.1, 1e-300, 12345.678];
        let mut buf = Vec::new();
        write_sums_csv(&sums, &mut buf).unwrap();
        assert_eq!(read_sums_csv(buf.as_slice()).unwrap(), sums);
    }
}
