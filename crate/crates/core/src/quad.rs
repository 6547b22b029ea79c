//! Adaptive Gauss-Kronrod (7/15) quadrature.
#![allow(clippy::excessive_precision)]

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of an integration: value and error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Estimate {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Estimate { value: kronrod * half, error: ((kronrod - gauss) * half).abs() }
}

/// The 15 Kronrod nodes and weights mapped onto `[a, b]`, for callers that
/// evaluate an integrand on a tensor grid themselves.
pub fn kronrod_nodes(a: f64, b: f64) -> [(f64, f64); 15] {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut out = [(center, WGK[7] * half); 15];
    for j in 0..7 {
        let dx = half * XGK[j];
        out[2 * j] = (center - dx, WGK[j] * half);
        out[2 * j + 1] = (center + dx, WGK[j] * half);
    }
    out
}

/// Integrates `f` over `[a, b]` by bisecting the interval with the largest
/// error estimate until the total error is below `max(abs_tol, rel_tol * |I|)`
/// or `max_intervals` is reached. Nodes never touch the endpoints.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Estimate {
    integrate_limit(&mut f, a, b, abs_tol, rel_tol, 2000)
}

pub fn integrate_limit<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Estimate {
    if a == b {
        return Estimate { value: 0.0, error: 0.0 };
    }
    let first = gk15(f, a, b);
    let mut parts = vec![(a, b, first)];
    let mut total = first;
    while total.error > abs_tol.max(rel_tol * total.value.abs()) && parts.len() < max_intervals {
        let (worst, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2.error.total_cmp(&y.1 .2.error))
            .expect("nonempty");
        let (lo, hi, est) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            parts.push((lo, hi, est));
            break;
        }
        let left = gk15(f, lo, mid);
        let right = gk15(f, mid, hi);
        parts.push((lo, mid, left));
        parts.push((mid, hi, right));
        total = parts.iter().fold(Estimate { value: 0.0, error: 0.0 }, |acc, p| Estimate {
            value: acc.value + p.2.value,
            error: acc.error + p.2.error,
        });
    }
    total
}

/// Integrates over consecutive pieces `[points[i], points[i+1]]`, which lets
/// callers split at known kinks or jumps.
pub fn integrate_pieces<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], abs_tol: f64, rel_tol: f64) -> Estimate {
    let mut out = Estimate { value: 0.0, error: 0.0 };
    let pieces = points.len().saturating_sub(1).max(1);
    for w in points.windows(2) {
        let e = integrate_limit(&mut f, w[0], w[1], abs_tol / pieces as f64, rel_tol, 2000);
        out.value += e.value;
        out.error += e.error;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let e = integrate(|x| 3.0 * x * x, 0.0, 2.0, 1e-14, 0.0);
        assert!((e.value - 8.0).abs() < 1e-13);
    }

    #[test]
    fn peaked_and_singular_integrands() {
        let e = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10, 1e-12);
        assert!((e.value - 2.0).abs() < 1e-8, "{e:?}");
        let sigma: f64 = 1e-3;
        let gauss = |x: f64| (-(x - 0.7) * (x - 0.7) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        let e = integrate(gauss, 0.0, 1.0, 1e-12, 1e-12);
        assert!((e.value - 1.0).abs() < 1e-10, "{e:?}");
    }

    #[test]
    fn kronrod_nodes_integrate_polynomials() {
        let s: f64 = kronrod_nodes(1.0, 3.0).iter().map(|(x, w)| w * x.powi(20)).sum();
        let exact = (3f64.powi(21) - 1.0) / 21.0;
        assert!((s - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn pieces_handle_jumps() {
        let step = |x: f64| if x < 0.3 { 1.0 } else { 5.0 };
        let e = integrate_pieces(step, &[0.0, 0.3, 1.0], 1e-14, 0.0);
        assert!((e.value - (0.3 + 3.5)).abs() < 1e-13);
    }
}
