//! Globally adaptive Gauss–Kronrod (7/15 point) quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SEGMENTS: usize = 4000;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel: 1e-8,
            abs: 1e-14,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let pair = f(c - x) + f(c + x);
        k += WGK[i] * pair;
        if i % 2 == 1 {
            g += WG[i / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: k * h,
        error: ((k - g) * h).abs(),
    }
}

/// `∫ₐᵇ f`, refining the worst segment until the summed error estimate is
/// below `max(tol.abs, tol.rel · |value|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    integrate_with_breaks(f, &[a, b], tol)
}

/// Like [`integrate`] over `[points[0], points[last]]`, with the initial
/// partition at the given (sorted or unsorted) points so that kinks never fall
/// inside a segment.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    tol: Tolerance,
) -> Result<f64> {
    let (lo, hi) = (points[0], points[points.len() - 1]);
    if hi == lo {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if hi > lo {
        (lo, hi, 1.0)
    } else {
        (hi, lo, -1.0)
    };
    let mut cuts: Vec<f64> = points
        .iter()
        .copied()
        .filter(|p| *p > lo && *p < hi)
        .collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut segs: Vec<Segment> = cuts.windows(2).map(|w| kronrod(&f, w[0], w[1])).collect();
    loop {
        let value: f64 = segs.iter().map(|s| s.value).sum();
        let error: f64 = segs.iter().map(|s| s.error).sum();
        if !value.is_finite() {
            return Err(Error::QuadratureFailure {
                a: lo,
                b: hi,
                error: f64::INFINITY,
            });
        }
        if error <= tol.abs.max(tol.rel * value.abs()) {
            return Ok(sign * value);
        }
        if segs.len() >= MAX_SEGMENTS {
            return Err(Error::QuadratureFailure {
                a: lo,
                b: hi,
                error,
            });
        }
        let worst = (0..segs.len())
            .max_by(|&i, &j| segs[i].error.total_cmp(&segs[j].error))
            .expect("nonempty");
        let s = segs.swap_remove(worst);
        let m = 0.5 * (s.a + s.b);
        if m <= s.a || m >= s.b {
            return Err(Error::QuadratureFailure {
                a: lo,
                b: hi,
                error,
            });
        }
        segs.push(kronrod(&f, s.a, m));
        segs.push(kronrod(&f, m, s.b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(|x| x.powi(6) - 3.0 * x * x, -1.0, 2.0, Tolerance::default()).unwrap();
        assert_relative_eq!(v, (128.0 + 1.0) / 7.0 - 9.0, max_relative = 1e-14);
    }

    #[test]
    fn smooth_and_kinked() {
        let v = integrate(f64::exp, 0.0, 3.0, Tolerance::default()).unwrap();
        assert_relative_eq!(v, 3f64.exp() - 1.0, max_relative = 1e-12);
        let v = integrate_with_breaks(
            |x: f64| (x - 0.3).abs(),
            &[0.0, 0.3, 1.0],
            Tolerance::default(),
        )
        .unwrap();
        assert_relative_eq!(v, 0.045 + 0.245, max_relative = 1e-13);
        let v = integrate(|x: f64| x.sqrt(), 0.0, 1.0, Tolerance::default()).unwrap();
        assert_relative_eq!(v, 2.0 / 3.0, max_relative = 1e-8);
    }

    #[test]
    fn reversed_limits() {
        let v = integrate(|x| x, 1.0, 0.0, Tolerance::default()).unwrap();
        assert_relative_eq!(v, -0.5);
    }

    #[test]
    fn divergent_integrand_fails() {
        let r = integrate(|x: f64| 1.0 / x, 0.0, 1.0, Tolerance::default());
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
    }
}
