//! Closed forms and quadrature for spheres and sphere pairs.

pub mod quadrature;

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::Result;
use crate::kernel::Kernel;
use quadrature::{integrate_with_breaks, Tolerance};

pub fn sphere_volume(r: f64) -> f64 {
    4.0 * PI * r * r * r / 3.0
}

pub fn sphere_surface(r: f64) -> f64 {
    4.0 * PI * r * r
}

/// Volume shared by a ball of radius `r` and its translate by `d`.
pub fn sphere_covariogram(r: f64, d: f64) -> f64 {
    if d >= 2.0 * r {
        0.0
    } else {
        PI / 12.0 * (4.0 * r + d) * (2.0 * r - d).powi(2)
    }
}

/// Volume of the intersection of balls of radii `r1`, `r2` with centers `d` apart.
pub fn lens_volume(r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        0.0
    } else if d <= (r1 - r2).abs() {
        sphere_volume(r1.min(r2))
    } else {
        let s = r1 + r2 - d;
        PI * s * s * (d * d + 2.0 * d * (r1 + r2) - 3.0 * (r1 - r2).powi(2)) / (12.0 * d)
    }
}

fn tolerance(scale: f64) -> Tolerance {
    Tolerance {
        rel: 1e-8,
        abs: 1e-14 * scale,
    }
}

/// Cross-correlation `γ₁₂(l)` of balls with radii `r1`, `r2` and center
/// distance `big_d`: the intersection volume of the first ball with the second
/// translated by `l`, averaged over translation directions.
pub fn pair_cross_gamma(r1: f64, r2: f64, big_d: f64, l: f64) -> Result<f64> {
    let scale = sphere_volume(r1) * sphere_volume(r2);
    let lo = (big_d - l).abs();
    let hi = big_d + l;
    if lo >= r1 + r2 {
        return Ok(0.0);
    }
    if big_d <= 1e-12 * (r1 + r2) {
        return Ok(lens_volume(r1, r2, l));
    }
    if l <= 1e-12 * (r1 + r2) {
        return Ok(lens_volume(r1, r2, big_d));
    }
    let top = hi.min(r1 + r2);
    let breaks = [lo, (r1 - r2).abs(), top];
    let integral =
        integrate_with_breaks(|s| lens_volume(r1, r2, s) * s, &breaks, tolerance(scale))?;
    Ok(integral / (2.0 * big_d * l))
}

/// Support `[lo, hi]` of `γ₁₂` and the points where it is not smooth.
pub fn pair_cross_breaks(r1: f64, r2: f64, big_d: f64) -> Vec<f64> {
    let sum = r1 + r2;
    let diff = (r1 - r2).abs();
    let lo = (big_d - sum).max(0.0);
    let hi = big_d + sum;
    let mut pts = vec![lo, hi];
    for p in [big_d - diff, big_d + diff, big_d, diff - big_d] {
        if p > lo && p < hi {
            pts.push(p);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Transfer integral between two balls as `∫ γ₁₂(l) φ(l) dl`.
pub fn sphere_pair_transfer(r1: f64, r2: f64, big_d: f64, kernel: &Kernel) -> Result<f64> {
    let scale = sphere_volume(r1) * sphere_volume(r2);
    let pts = pair_cross_breaks(r1, r2, big_d);
    // Inner quadrature errors surface as NaN and are reported by the outer one.
    integrate_with_breaks(
        |l| pair_cross_gamma(r1, r2, big_d, l).unwrap_or(f64::NAN) * kernel.phi(l),
        &pts,
        tolerance(scale * kernel.phi1(pts[pts.len() - 1]).abs().max(1.0)),
    )
}

/// Transfer integral of a ball with itself, `∫ γ(l) φ(l) dl`.
pub fn sphere_self_transfer(r: f64, kernel: &Kernel) -> Result<f64> {
    let v = sphere_volume(r);
    integrate_with_breaks(
        |l| sphere_covariogram(r, l) * kernel.phi(l),
        &[0.0, 2.0 * r],
        tolerance(v * v),
    )
}

/// Single-ball distributions at distance `l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereDensities {
    pub eta: f64,
    pub iota: f64,
    pub mu: f64,
    /// Second derivative of the unnormalized covariogram.
    pub gamma_dd: f64,
}

/// Covariogram normalized to one at the origin.
pub fn sphere_gamma_bar(r: f64, l: f64) -> f64 {
    if l >= 2.0 * r {
        0.0
    } else {
        let x = l / r;
        1.0 - 0.75 * x + x * x * x / 16.0
    }
}

pub fn sphere_signed_densities(r: f64, l: f64) -> SphereDensities {
    if l >= 2.0 * r {
        return SphereDensities {
            eta: 0.0,
            iota: 0.0,
            mu: 0.0,
            gamma_dd: 0.0,
        };
    }
    let r3 = r * r * r;
    SphereDensities {
        eta: 3.0 * l * l / r3 * sphere_gamma_bar(r, l),
        iota: 0.75 / r - 3.0 * l * l / (16.0 * r3),
        mu: l / (2.0 * r * r),
        gamma_dd: sphere_volume(r) * 3.0 * l / (8.0 * r3),
    }
}

/// Integrals of the distance, radii and chord densities over `[0, l]`.
pub fn sphere_cumulative(r: f64, l: f64) -> SphereDensities {
    let x = (l / r).min(2.0);
    SphereDensities {
        eta: x.powi(3) - 9.0 * x.powi(4) / 16.0 + x.powi(6) / 32.0,
        iota: 0.75 * x - x.powi(3) / 16.0,
        mu: x * x / 4.0,
        gamma_dd: sphere_volume(r) * 3.0 * x * x / (16.0 * r),
    }
}

/// Averages of the single-ball densities over `[a, b]`.
pub fn sphere_bin_average(r: f64, a: f64, b: f64) -> SphereDensities {
    let (ca, cb) = (sphere_cumulative(r, a), sphere_cumulative(r, b));
    let w = b - a;
    SphereDensities {
        eta: (cb.eta - ca.eta) / w,
        iota: (cb.iota - ca.iota) / w,
        mu: (cb.mu - ca.mu) / w,
        gamma_dd: (cb.gamma_dd - ca.gamma_dd) / w,
    }
}
