//! The three discrete partition-of-unity families.
//!
//! A family is a sequence of probabilities `phi(i, u)` over `i = 0, 1, 2, ...`
//! indexed by `u` in `(0, 1)`. Integrating out `u` gives the mixture weights
//! `alpha(i)`, and `phi / alpha` is a Lebesgue density on `(0, 1)`:
//!
//! | family        | `phi(i, u)`                            | `alpha(i)`                   | density of index `i`        |
//! |---------------|----------------------------------------|------------------------------|-----------------------------|
//! | Bernstein     | `C(a-1, i) u^i (1-u)^(a-1-i)`          | `1/a`                        | `Beta(i+1, a-i)`            |
//! | NegBinomial   | `C(a+i-1, i) u^i (1-u)^a`              | `a / ((a+i)(a+i+1))`         | `Beta(i+1, a+1)`            |
//! | Poisson       | `(1-u)^a (a L)^i / i!`, `L = -ln(1-u)` | `a^i / (a+1)^(i+1)`          | `1 - exp(-Y)`, `Y ~ Gamma(i+1, rate a+1)` |
//!
//! All indices are 0-based. Bernstein cells `((k-1)/a, k/a]` with labels
//! `k = 1..=a` map to index `k - 1`.

use std::fmt;

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::gamma_lr;

use crate::error::{CopulaError, Result};
use crate::pmf::{ln_dbinom_raw, ln_dpois_raw};
use crate::{clamp_open, check_open};

/// Indices below this use closed-form products; above it the saddle-point
/// formulas take over.
const DIRECT_MAX_INDEX: u64 = 16;
/// Largest Bernstein `a` for which the direct product path is used.
const DIRECT_MAX_BERNSTEIN: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Bernstein,
    NegBinomial,
    Poisson,
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            FamilyKind::Bernstein => "bernstein",
            FamilyKind::NegBinomial => "negbinomial",
            FamilyKind::Poisson => "poisson",
        })
    }
}

impl std::str::FromStr for FamilyKind {
    type Err = CopulaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bernstein" | "binomial" => Ok(FamilyKind::Bernstein),
            "negbinomial" | "negative-binomial" | "negbin" | "nb" => Ok(FamilyKind::NegBinomial),
            "poisson" => Ok(FamilyKind::Poisson),
            other => Err(CopulaError::InvalidParameter(format!(
                "unknown family '{other}' (expected bernstein, negbinomial or poisson)"
            ))),
        }
    }
}

/// One coordinate's partition family, immutable after construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionFamily {
    kind: FamilyKind,
    a: f64,
}

impl PartitionFamily {
    /// Validates the parameter: Bernstein needs an integer `a >= 2`, the
    /// other two any finite `a > 0`.
    pub fn new(kind: FamilyKind, a: f64) -> Result<Self> {
        if !a.is_finite() || a <= 0.0 {
            return Err(CopulaError::InvalidParameter(format!(
                "{kind} parameter must be a positive finite number, got {a}"
            )));
        }
        if kind == FamilyKind::Bernstein && (a.fract() != 0.0 || a < 2.0 || a > f64::from(u32::MAX)) {
            return Err(CopulaError::InvalidParameter(format!(
                "bernstein parameter must be an integer >= 2, got {a}"
            )));
        }
        Ok(Self { kind, a })
    }

    pub fn bernstein(a: u32) -> Result<Self> {
        Self::new(FamilyKind::Bernstein, f64::from(a))
    }

    pub fn neg_binomial(a: f64) -> Result<Self> {
        Self::new(FamilyKind::NegBinomial, a)
    }

    pub fn poisson(a: f64) -> Result<Self> {
        Self::new(FamilyKind::Poisson, a)
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Number of indices with positive weight, `None` for infinite support.
    pub fn support_size(&self) -> Option<u64> {
        match self.kind {
            FamilyKind::Bernstein => Some(self.a as u64),
            _ => None,
        }
    }

    fn check_index(&self, i: u64) -> Result<()> {
        if self.kind == FamilyKind::Bernstein && i >= self.a as u64 {
            return Err(CopulaError::Index { index: i, a: self.a as u32 });
        }
        Ok(())
    }

    /// `phi(i, u)`. Bernstein returns exactly 0 for `i >= a`.
    pub fn phi(&self, i: u64, u: f64) -> Result<f64> {
        check_open(u)?;
        if self.kind == FamilyKind::Bernstein && i >= self.a as u64 {
            return Ok(0.0);
        }
        Ok(self.phi_unchecked(i, u))
    }

    pub(crate) fn phi_unchecked(&self, i: u64, u: f64) -> f64 {
        if i < DIRECT_MAX_INDEX
            && (self.kind != FamilyKind::Bernstein || self.a as u32 <= DIRECT_MAX_BERNSTEIN)
        {
            self.phi_direct(i, u)
        } else {
            self.ln_phi_saddle(i, u).exp()
        }
    }

    fn phi_direct(&self, i: u64, u: f64) -> f64 {
        let a = self.a;
        let ln_q = (-u).ln_1p();
        match self.kind {
            FamilyKind::Bernstein => {
                let m = a as u64 - 1;
                let mut coef = 1.0;
                for k in 0..i {
                    coef = coef * (m - k) as f64 / (k + 1) as f64;
                }
                coef * u.powi(i as i32) * ((m - i) as f64 * ln_q).exp()
            }
            FamilyKind::NegBinomial => {
                let mut coef = 1.0;
                for k in 0..i {
                    coef = coef * (a + k as f64) / (k + 1) as f64;
                }
                coef * u.powi(i as i32) * (a * ln_q).exp()
            }
            FamilyKind::Poisson => {
                let lambda = -a * ln_q;
                let mut term = 1.0;
                for k in 0..i {
                    term = term * lambda / (k + 1) as f64;
                }
                term * (a * ln_q).exp()
            }
        }
    }

    pub(crate) fn ln_phi_saddle(&self, i: u64, u: f64) -> f64 {
        let x = i as f64;
        let a = self.a;
        match self.kind {
            FamilyKind::Bernstein => ln_dbinom_raw(x, a - 1.0, u, 1.0 - u),
            FamilyKind::NegBinomial => (a / (a + x)).ln() + ln_dbinom_raw(a, x + a, 1.0 - u, u),
            FamilyKind::Poisson => ln_dpois_raw(x, -a * (-u).ln_1p()),
        }
    }

    /// Mixture weight `alpha(i) = integral of phi(i, u) over (0, 1)`.
    ///
    /// Bernstein rejects `i >= a` instead of returning 0.
    pub fn alpha(&self, i: u64) -> Result<f64> {
        self.check_index(i)?;
        Ok(self.alpha_unchecked(i))
    }

    pub(crate) fn alpha_unchecked(&self, i: u64) -> f64 {
        let a = self.a;
        let x = i as f64;
        match self.kind {
            FamilyKind::Bernstein => 1.0 / a,
            FamilyKind::NegBinomial => a / ((a + x) * (a + x + 1.0)),
            FamilyKind::Poisson => self.poisson_ratio().powf(x) / (a + 1.0),
        }
    }

    fn ln_alpha(&self, i: u64) -> f64 {
        let a = self.a;
        let x = i as f64;
        match self.kind {
            FamilyKind::Bernstein => -a.ln(),
            FamilyKind::NegBinomial => a.ln() - (a + x).ln() - (a + x + 1.0).ln(),
            FamilyKind::Poisson => -x * (1.0 / a).ln_1p() - (a + 1.0).ln(),
        }
    }

    fn poisson_ratio(&self) -> f64 {
        self.a / (self.a + 1.0)
    }

    /// `1 - sum_{k <= m} alpha(k)`: the weight beyond index `m`.
    pub fn tail_mass(&self, m: u64) -> f64 {
        let a = self.a;
        let next = (m + 1) as f64;
        match self.kind {
            FamilyKind::Bernstein => ((a - next) / a).max(0.0),
            FamilyKind::NegBinomial => a / (a + next),
            FamilyKind::Poisson => self.poisson_ratio().powf(next),
        }
    }

    /// Upper edge of index `m`'s discretization cell: `A(m) = sum_{k <= m} alpha(k)`.
    pub fn upper_edge(&self, m: u64) -> f64 {
        let a = self.a;
        let next = (m + 1) as f64;
        match self.kind {
            FamilyKind::Bernstein => (next / a).min(1.0),
            FamilyKind::NegBinomial => next / (a + next),
            FamilyKind::Poisson => 1.0 - self.poisson_ratio().powf(next),
        }
    }

    /// Lower edge of index `i`'s cell, 0 for `i = 0`.
    pub fn lower_edge(&self, i: u64) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.upper_edge(i - 1)
        }
    }

    /// `n * upper_edge(m)` rounded once where the edge is rational, so that
    /// Bernstein edges landing on a multiple of `1/n` come out as exact integers.
    pub(crate) fn scaled_upper_edge(&self, m: u64, n: usize) -> f64 {
        let a = self.a;
        let next = m + 1;
        match self.kind {
            FamilyKind::Bernstein => {
                if next as f64 >= a {
                    n as f64
                } else {
                    (next as f64 * n as f64) / a
                }
            }
            FamilyKind::NegBinomial => (next as f64 * n as f64) / (a + next as f64),
            FamilyKind::Poisson => n as f64 * self.upper_edge(m),
        }
    }

    /// Scaled edge below index `i` (0 for `i = 0`).
    pub(crate) fn scaled_lower_edge(&self, i: u64, n: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.scaled_upper_edge(i - 1, n)
        }
    }

    /// Smallest index `i` with `n * A(i) > target` (or `>=` when `inclusive`).
    /// `None` when no such index exists, which only happens for infinite
    /// families with `target >= n`.
    pub(crate) fn first_index_scaled_above(&self, target: f64, n: usize, inclusive: bool) -> Option<u64> {
        let nf = n as f64;
        let passes = |i: u64| {
            let s = self.scaled_upper_edge(i, n);
            if inclusive {
                s >= target
            } else {
                s > target
            }
        };
        if target >= nf && !(inclusive && target == nf && self.kind == FamilyKind::Bernstein) {
            return None;
        }
        if target < 0.0 {
            return Some(0);
        }
        let x = target / nf;
        let estimate = match self.kind {
            FamilyKind::Bernstein => (self.a * x).ceil() - 1.0,
            FamilyKind::NegBinomial => self.a * x / (1.0 - x) - 1.0,
            FamilyKind::Poisson => (-x).ln_1p() / self.poisson_ratio().ln() - 1.0,
        };
        let mut i = if estimate.is_finite() && estimate > 0.0 {
            estimate.floor() as u64
        } else {
            0
        };
        if let Some(size) = self.support_size() {
            i = i.min(size - 1);
        }
        while i > 0 && passes(i - 1) {
            i -= 1;
        }
        while !passes(i) {
            i += 1;
        }
        Some(i)
    }

    /// Smallest `m` whose tail weight beyond `m` is at most `eps`.
    pub fn truncation_index(&self, eps: f64) -> u64 {
        if let Some(size) = self.support_size() {
            return size - 1;
        }
        let a = self.a;
        let estimate = match self.kind {
            FamilyKind::NegBinomial => a / eps - a - 1.0,
            FamilyKind::Poisson => eps.ln() / self.poisson_ratio().ln() - 1.0,
            FamilyKind::Bernstein => unreachable!(),
        };
        let mut m = if estimate > 0.0 { estimate.ceil() as u64 } else { 0 };
        while m > 0 && self.tail_mass(m - 1) <= eps {
            m -= 1;
        }
        while self.tail_mass(m) > eps {
            m += 1;
        }
        m
    }

    /// Lebesgue density `phi(i, u) / alpha(i)` of component `i`.
    pub fn component_density(&self, i: u64, u: f64) -> Result<f64> {
        check_open(u)?;
        self.check_index(i)?;
        Ok(self.component_density_unchecked(i, u))
    }

    pub(crate) fn component_density_unchecked(&self, i: u64, u: f64) -> f64 {
        let alpha = self.alpha_unchecked(i);
        if alpha > 1e-280 && i < DIRECT_MAX_INDEX {
            self.phi_unchecked(i, u) / alpha
        } else {
            (self.ln_phi_saddle(i, u) - self.ln_alpha(i)).exp()
        }
    }

    /// Distribution function of component `i`, defined on all of `[0, 1]`.
    pub fn component_cdf(&self, i: u64, u: f64) -> Result<f64> {
        self.check_index(i)?;
        if u.is_nan() {
            return Err(CopulaError::Domain { value: u });
        }
        if u <= 0.0 {
            return Ok(0.0);
        }
        if u >= 1.0 {
            return Ok(1.0);
        }
        let x = i as f64;
        let a = self.a;
        Ok(match self.kind {
            FamilyKind::Bernstein => beta_reg(x + 1.0, a - x, u),
            FamilyKind::NegBinomial => beta_reg(x + 1.0, a + 1.0, u),
            FamilyKind::Poisson => gamma_lr(x + 1.0, -(a + 1.0) * (-u).ln_1p()),
        })
    }

    /// Draws from the component density of index `i`; the result is kept
    /// strictly inside `(0, 1)`.
    pub fn sample_component<R: Rng + ?Sized>(&self, i: u64, rng: &mut R) -> Result<f64> {
        self.check_index(i)?;
        Ok(self.sample_component_unchecked(i, rng))
    }

    pub(crate) fn sample_component_unchecked<R: Rng + ?Sized>(&self, i: u64, rng: &mut R) -> f64 {
        let x = i as f64;
        let a = self.a;
        let draw = match self.kind {
            FamilyKind::Bernstein => Beta::new(x + 1.0, a - x)
                .expect("valid beta parameters")
                .sample(rng),
            FamilyKind::NegBinomial => Beta::new(x + 1.0, a + 1.0)
                .expect("valid beta parameters")
                .sample(rng),
            FamilyKind::Poisson => {
                let y: f64 = Gamma::new(x + 1.0, 1.0 / (a + 1.0))
                    .expect("valid gamma parameters")
                    .sample(rng);
                -(-y).exp_m1()
            }
        };
        clamp_open(draw)
    }

    /// Index of the discretization cell containing `u`.
    ///
    /// Bernstein uses right-closed cells `(i/a, (i+1)/a]`; the infinite
    /// families use left-closed cells `[A(i-1), A(i))`.
    pub fn discretize(&self, u: f64) -> Result<u64> {
        check_open(u)?;
        Ok(self.discretize_unchecked(u))
    }

    pub(crate) fn discretize_unchecked(&self, u: f64) -> u64 {
        let a = self.a;
        match self.kind {
            FamilyKind::Bernstein => {
                let label = ceil_product(u, a);
                (label.max(1) - 1).min(a as u64 - 1)
            }
            FamilyKind::NegBinomial => {
                let mut k = (a * u / (1.0 - u)).floor().max(0.0) as u64;
                // [k/(a+k), (k+1)/(a+k+1)) is equivalent to k <= (a+k) u < k + 1 - u
                while k > 0 && self.lower_edge(k) > u {
                    k -= 1;
                }
                while u >= self.upper_edge(k) {
                    k += 1;
                }
                k
            }
            FamilyKind::Poisson => {
                let l = -(-u).ln_1p();
                let mut k = (l / (1.0 / a).ln_1p()).floor().max(0.0) as u64;
                while k > 0 && self.lower_edge(k) > u {
                    k -= 1;
                }
                while u >= self.upper_edge(k) {
                    k += 1;
                }
                k
            }
        }
    }
}

/// Exact `ceil(u * m)` for `u` in `(0, 1)` and integral `m < 2^53`.
pub(crate) fn ceil_product(u: f64, m: f64) -> u64 {
    let p = u * m;
    // exact product is p + err; a non-integer p is at least one ulp from any integer
    let err = u.mul_add(m, -p);
    if p == p.ceil() && err > 0.0 {
        p as u64 + 1
    } else {
        p.ceil() as u64
    }
}
