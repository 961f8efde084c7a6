//! Adaptive Gauss-Kronrod (7/15) quadrature.

// Node and weight tables are quoted to the digits they are usually published with.
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

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

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Single 15-point Kronrod panel; returns (integral, error estimate).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Settings for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_panels: 2000,
        }
    }
}

/// Globally adaptive integration of `f` over `[a, b]`.
///
/// The panel with the largest error estimate is bisected until the summed
/// estimate is below `max(abs_tol, rel_tol * |I|)`. Reversed limits give the
/// negated integral.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate(f, b, a, opts).map(|x| -x);
    }
    let (i0, e0) = gk15(&f, a, b);
    let mut panels = vec![(a, b, i0, e0)];
    let mut total = i0;
    let mut err = e0;
    loop {
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::Quadrature { a, b, error: f64::INFINITY });
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            break;
        }
        if panels.len() >= opts.max_panels {
            return Err(Error::Quadrature { a, b, error: err });
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty panel list");
        let (pa, pb, pi, pe) = panels.swap_remove(idx);
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            return Err(Error::Quadrature { a, b, error: err });
        }
        let (il, el) = gk15(&f, pa, mid);
        let (ir, er) = gk15(&f, mid, pb);
        total += il + ir - pi;
        err += el + er - pe;
        panels.push((pa, mid, il, el));
        panels.push((mid, pb, ir, er));
    }
    // Re-sum to avoid drift from the incremental updates.
    let mut sorted: Vec<_> = panels.iter().map(|p| (p.0, p.2)).collect();
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(sorted.iter().map(|p| p.1).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(|x| x.powi(7) - 3.0 * x * x, 0.0, 2.0, QuadOptions::default()).unwrap();
        assert!((v - (32.0 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn reversed_limits_negate() {
        let f = |x: f64| x.exp();
        let fwd = integrate(f, 0.0, 1.0, QuadOptions::default()).unwrap();
        let rev = integrate(f, 1.0, 0.0, QuadOptions::default()).unwrap();
        assert_eq!(fwd, -rev);
        assert!((fwd - (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn handles_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let v = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, QuadOptions { max_panels: 10_000, ..Default::default() })
            .unwrap();
        assert!((v - 2.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        let r = integrate(|_| f64::NAN, 0.0, 1.0, QuadOptions::default());
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
