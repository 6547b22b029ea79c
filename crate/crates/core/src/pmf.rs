//! Saddle-point evaluation of binomial and Poisson probabilities.
//!
//! Catherine Loader's formulation: the probability is written as
//! `exp(-stirlerr - bd0) / sqrt(2 pi x)`, which keeps full relative accuracy
//! for large counts where `ln Gamma` differences cancel badly.
#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// `stirlerr(k/2)` for `k = 0..=30`.
const STIRLERR_HALVES: [f64; 31] = [
    0.0,
    0.153_426_409_720_027_345_291_383_9,
    0.081_061_466_795_327_258_219_670_26,
    0.054_814_121_051_917_653_896_138_7,
    0.041_340_695_955_409_294_093_822_08,
    0.033_162_873_519_936_287_485_110_51,
    0.027_677_925_684_998_339_148_789_29,
    0.023_746_163_656_297_495_971_330_28,
    0.020_790_672_103_765_093_111_522_77,
    0.018_488_450_532_673_185_230_779_36,
    0.016_644_691_189_821_192_163_194_87,
    0.015_134_973_221_917_378_873_513_84,
    0.013_876_128_823_070_747_998_745_73,
    0.012_810_465_242_920_226_924_250_66,
    0.011_896_709_945_891_770_095_055_72,
    0.011_104_559_758_206_917_326_630_76,
    0.010_411_265_261_972_096_497_478_57,
    0.009_799_416_126_158_803_298_390_373,
    0.009_255_462_182_712_732_917_728_637,
    0.008_768_700_134_139_385_462_955_047,
    0.008_330_563_433_362_871_256_469_319,
    0.007_934_114_564_314_020_547_249_562,
    0.007_573_675_487_951_840_794_972_024,
    0.007_244_554_301_320_383_179_546_197,
    0.006_942_840_107_209_529_865_664_153,
    0.006_665_247_032_707_682_442_356_181,
    0.006_408_994_188_004_207_068_439_631,
    0.006_171_712_263_039_457_647_534_605,
    0.005_951_370_112_758_847_735_624_416,
    0.005_746_216_513_010_115_682_026_102,
    0.005_554_733_551_962_801_371_038_69,
];

/// `ln(x!) - ln(sqrt(2 pi x) (x/e)^x)`.
pub(crate) fn stirlerr(x: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;

    if x <= 15.0 {
        let twice = x + x;
        if twice == twice.floor() {
            return STIRLERR_HALVES[twice as usize];
        }
        return ln_gamma(x + 1.0) - (x + 0.5) * x.ln() + x - LN_SQRT_2PI;
    }
    let xx = x * x;
    if x > 500.0 {
        (S0 - S1 / xx) / x
    } else if x > 80.0 {
        (S0 - (S1 - S2 / xx) / xx) / x
    } else if x > 35.0 {
        (S0 - (S1 - (S2 - S3 / xx) / xx) / xx) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / xx) / xx) / xx) / xx) / x
    }
}

/// Deviance term `x ln(x/np) + np - x`, evaluated without cancellation.
pub(crate) fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        if s.abs() < f64::MIN_POSITIVE {
            return s;
        }
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / f64::from(2 * j + 1);
            if s1 == s {
                return s1;
            }
            s = s1;
        }
    }
    x * (x / np).ln() + np - x
}

/// `ln P(X = x)` for `X ~ Binomial(n, p)`, with `q = 1 - p` passed explicitly.
///
/// `n` may be non-integer (negative binomial callers use `x + size`).
pub(crate) fn ln_dbinom_raw(x: f64, n: f64, p: f64, q: f64) -> f64 {
    if p == 0.0 {
        return if x == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 0.0 {
        return if x == n { 0.0 } else { f64::NEG_INFINITY };
    }
    if x == 0.0 {
        if n == 0.0 {
            return 0.0;
        }
        return if p < 0.1 {
            -bd0(n, n * q) - n * p
        } else {
            n * q.ln()
        };
    }
    if x == n {
        return if q < 0.1 {
            -bd0(n, n * p) - n * q
        } else {
            n * p.ln()
        };
    }
    if x < 0.0 || x > n {
        return f64::NEG_INFINITY;
    }
    let lc = stirlerr(n) - stirlerr(x) - stirlerr(n - x) - bd0(x, n * p) - bd0(n - x, n * q);
    let lf = LN_2PI + x.ln() + (-x / n).ln_1p();
    lc - 0.5 * lf
}

/// `ln P(X = x)` for `X ~ Poisson(lambda)`.
pub(crate) fn ln_dpois_raw(x: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return if x == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if x == 0.0 {
        return -lambda;
    }
    if x < 0.0 {
        return f64::NEG_INFINITY;
    }
    -stirlerr(x) - bd0(x, lambda) - 0.5 * (2.0 * PI * x).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stirlerr_matches_ln_gamma_definition() {
        for &x in &[0.5, 3.0, 7.5, 15.0, 15.5, 20.0, 40.0, 100.0, 600.0] {
            let direct = ln_gamma(x + 1.0) - (x + 0.5) * f64::ln(x) + x - LN_SQRT_2PI;
            let err = (stirlerr(x) - direct).abs();
            // ln_gamma itself carries absolute error proportional to its size
            assert!(err < 1e-13 * (1.0 + ln_gamma(x + 1.0).abs()), "x={x}: {err}");
        }
    }

    #[test]
    fn bd0_agrees_with_naive_form_away_from_cancellation() {
        let naive = |x: f64, np: f64| x * (x / np).ln() + np - x;
        assert!((bd0(10.0, 3.0) - naive(10.0, 3.0)).abs() < 1e-13);
        assert!((bd0(100.0, 99.0) - naive(100.0, 99.0)).abs() < 1e-12);
        assert_eq!(bd0(5.0, 5.0), 0.0);
    }

    #[test]
    fn binomial_small_cases_are_exact_rationals() {
        // Binomial(4, 1/2): 1, 4, 6, 4, 1 over 16
        let expected = [1.0, 4.0, 6.0, 4.0, 1.0];
        for (k, &c) in expected.iter().enumerate() {
            let p = ln_dbinom_raw(k as f64, 4.0, 0.5, 0.5).exp();
            assert!((p - c / 16.0).abs() < 1e-15, "k={k}: {p}");
        }
    }

    #[test]
    fn poisson_matches_direct_formula() {
        let lambda: f64 = 3.7;
        let mut direct = (-lambda).exp();
        for k in 0..30 {
            if k > 0 {
                direct *= lambda / k as f64;
            }
            let p = ln_dpois_raw(k as f64, lambda).exp();
            // the recurrence itself accumulates one rounding per step
            assert!((p - direct).abs() <= 3e-14 * direct, "k={k} rel={}", (p - direct).abs() / direct);
        }
    }
}
