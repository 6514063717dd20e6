//! Transfer integrals `J_ij(φ) = ∫_{B_i} ∫_{B_j} φ(R) / (4πR²)` by six routes:
//! direct point pairs, the binned distance distribution, quadrature of the
//! sphere-pair correlation function, signed radii, signed chords and
//! λ-chords, plus a mass-weighted direct route.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::analytic::{sphere_pair_transfer, sphere_self_transfer};
use crate::error::{Error, Result};
use crate::estimators::{
    estimate_chords, estimate_eta, estimate_radii, for_each_segment, lambda_from_mu, line_measure,
    Binning, UNRELIABLE_GAMMA_BINS,
};
use crate::geometry::{enclosing_ball, random_direction, random_line, Shape};
use crate::kernel::Kernel;
use crate::rng::{run_chunked, RandomStream};
use crate::scene::Scene;
use crate::signed_hist::MatrixDensity;
use crate::stats::{Estimate, RunningStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Direct,
    Eta,
    Gamma,
    Radii,
    Chords,
    Lambda,
}

impl Route {
    pub const ALL: [Route; 6] = [
        Route::Direct,
        Route::Eta,
        Route::Gamma,
        Route::Radii,
        Route::Chords,
        Route::Lambda,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Route::Direct => "direct",
            Route::Eta => "eta",
            Route::Gamma => "gamma",
            Route::Radii => "radii",
            Route::Chords => "chords",
            Route::Lambda => "lambda",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Route> {
        Route::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown route '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferResult {
    pub route: Route,
    pub value: f64,
    pub stderr: f64,
    pub n_samples: u64,
    /// Not serialized, so that reports are reproducible byte for byte.
    #[serde(skip)]
    pub wall_time: f64,
    /// Second evaluation of the same quantity, such as the binned form of a
    /// streaming route.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alternate: Option<Estimate>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl TransferResult {
    fn new(route: Route, estimate: Estimate, n_samples: u64, start: Instant) -> Self {
        TransferResult {
            route,
            value: estimate.value,
            stderr: estimate.stderr,
            n_samples,
            wall_time: start.elapsed().as_secs_f64(),
            alternate: None,
            warnings: Vec::new(),
        }
    }

    pub fn estimate(&self) -> Estimate {
        Estimate::new(self.value, self.stderr)
    }
}

fn require_separated(scene: &Scene, i: usize, j: usize) -> Result<()> {
    scene.check_pair_disjoint(i, j)
}

fn mean_estimate(parts: Vec<Result<RunningStats>>) -> Result<Estimate> {
    let mut total = RunningStats::new();
    for p in parts {
        total.merge(&p?);
    }
    Ok(total.estimate())
}

/// Mean of `f(r, r')` over independent uniform points of `B_i` and `B_j`.
fn pair_average<F>(
    scene: &Scene,
    i: usize,
    j: usize,
    n: u64,
    stream: &RandomStream,
    f: F,
) -> Result<Estimate>
where
    F: Fn(&crate::geometry::Vec3, &crate::geometry::Vec3) -> f64 + Sync + Send,
{
    if n == 0 {
        return Err(Error::InvalidArgument(
            "at least one sample is required".into(),
        ));
    }
    let (a, b) = (scene.body(i), scene.body(j));
    mean_estimate(run_chunked(stream, n, |rng, count| {
        let mut s = RunningStats::new();
        for _ in 0..count {
            let p = a.sample_point(rng)?;
            let q = b.sample_point(rng)?;
            s.push(f(&p, &q));
        }
        Ok(s)
    }))
}

/// `V_i V_j` times the mean point kernel over uniform point pairs. Diagonal
/// and overlapping pairs are refused for kernels singular at zero distance,
/// whose point estimates have unbounded variance.
pub fn transfer_direct(
    scene: &Scene,
    i: usize,
    j: usize,
    kernel: &Kernel,
    n: u64,
    stream: &RandomStream,
) -> Result<TransferResult> {
    let start = Instant::now();
    scene.check_index(i)?;
    scene.check_index(j)?;
    if kernel.singular_at_origin() {
        if i == j {
            return Err(Error::SingularDiagonal(kernel.to_string()));
        }
        require_separated(scene, i, j)?;
    }
    let mean = pair_average(scene, i, j, n, stream, |p, q| {
        kernel.point_kernel((p - q).norm())
    })?;
    Ok(TransferResult::new(
        Route::Direct,
        mean.scaled(scene.volume(i) * scene.volume(j)),
        n,
        start,
    ))
}

fn binning_warnings(m: &MatrixDensity, i: usize, j: usize) -> Result<Vec<String>> {
    let cell = m.cell(i, j)?;
    let mut w = Vec::new();
    if cell.overflow_weight() != 0.0 {
        w.push(format!("weight {} beyond l_max", cell.overflow_weight()));
    }
    if cell.raw_sums().iter().all(|&s| s == 0.0) {
        w.push("empty cell: no events within l_max".into());
    }
    Ok(w)
}

/// `V∪² Σ η̌_ij(l_c) φ(l_c)/(4πl_c²) Δl`, skipping the leading bins where the
/// point kernel is not resolved. The skipped mass is reported as a warning.
pub fn transfer_via_eta(
    _scene: &Scene,
    i: usize,
    j: usize,
    kernel: &Kernel,
    eta: &MatrixDensity,
) -> Result<TransferResult> {
    let start = Instant::now();
    let cell = eta.cell(i, j)?;
    let v2 = eta.norm.v_union.powi(2);
    let skip = UNRELIABLE_GAMMA_BINS.min(cell.n_bins());
    let est = cell.integrate_bins_with(skip, |l| v2 * kernel.point_kernel(l));
    let mut r = TransferResult::new(Route::Eta, est, cell.n_events().unwrap_or(0), start);
    r.warnings = binning_warnings(eta, i, j)?;
    let skipped: f64 = (0..skip).map(|b| cell.density(b) * cell.width()).sum();
    if skipped != 0.0 {
        r.warnings
            .push(format!("skipped leading-bin probability {skipped:.3e}"));
    }
    Ok(r)
}

/// Radius and center of a sphere body.
fn sphere_of(scene: &Scene, i: usize) -> Result<(crate::geometry::Vec3, f64)> {
    match &scene.body(i).shape {
        Shape::Sphere { center, radius } => Ok((*center, *radius)),
        _ => Err(Error::UnsupportedGeometry(format!(
            "body `{}` is not a sphere",
            scene.id(i)
        ))),
    }
}

/// `∫ γ_ij(l) φ(l) dl` by quadrature, for sphere pairs only.
pub fn transfer_via_gamma(
    scene: &Scene,
    i: usize,
    j: usize,
    kernel: &Kernel,
) -> Result<TransferResult> {
    let start = Instant::now();
    scene.check_index(i)?;
    scene.check_index(j)?;
    let (c1, r1) = sphere_of(scene, i)?;
    let (c2, r2) = sphere_of(scene, j)?;
    let value = if i == j {
        sphere_self_transfer(r1, kernel)?
    } else {
        sphere_pair_transfer(r1, r2, (c1 - c2).norm(), kernel)?
    };
    Ok(TransferResult::new(
        Route::Gamma,
        Estimate::exact(value),
        0,
        start,
    ))
}

/// `V_i` times the mean over rays from uniform points of `B_i` of
/// `Σ (Φ₁(exit) − Φ₁(entry))` over the intervals of `B_j`.
pub fn transfer_radii_streaming(
    scene: &Scene,
    i: usize,
    j: usize,
    kernel: &Kernel,
    n_rays: u64,
    stream: &RandomStream,
) -> Result<Estimate> {
    require_separated(scene, i, j)?;
    if n_rays == 0 {
        return Err(Error::InvalidArgument(
            "at least one ray is required".into(),
        ));
    }
    let (a, b) = (scene.body(i), scene.body(j));
    let mean = mean_estimate(run_chunked(stream, n_rays, |rng, count| {
        let mut s = RunningStats::new();
        for _ in 0..count {
            let origin = a.sample_point(rng)?;
            let dir = random_direction(rng);
            let sum: f64 = b
                .ray_intervals(&origin, &dir)
                .iter()
                .map(|iv| kernel.phi1(iv.exit) - kernel.phi1(iv.enter))
                .sum();
            s.push(sum);
        }
        Ok(s)
    }))?;
    Ok(mean.scaled(scene.volume(i)))
}

/// `V∪ Σ ι̌_ij(l_c) Φ₁(l_c) Δl`.
pub fn transfer_radii_binned(
    kernel: &Kernel,
    iota: &MatrixDensity,
    i: usize,
    j: usize,
) -> Result<Estimate> {
    let v = iota.norm.v_union;
    Ok(iota.cell(i, j)?.integrate_with(|l| v * kernel.phi1(l)))
}

/// Radii route: the streaming estimate, with the binned form of an
/// independent radii matrix as `alternate` when one is supplied.
pub fn transfer_via_radii(
    scene: &Scene,
    i: usize,
    j: usize,
    kernel: &Kernel,
    n_rays: u64,
    stream: &RandomStream,
    iota: Option<&MatrixDensity>,
) -> Result<TransferResult> {
    let start = Instant::now();
    let est = transfer_radii_streaming(scene, i, j, kernel, n_rays, stream)?;
    let mut r = TransferResult::new(Route::Radii, est, n_rays, start);
    if let Some(m) = iota {
        r.alternate = Some(transfer_radii_binned(kernel, m, i, j)?);
        r.warnings = binning_warnings(m, i, j)?;
    }
    r.wall_time = start.elapsed().as_secs_f64();
    Ok(r)
}

/// `πR²/2` times the mean over isotropic lines through a ball holding both
/// bodies of the signed `Φ₂` sum over interval pairs, `k ∈ B_i`, `m ∈ B_j`.
pub fn transfer_chords_streaming(
    scene: &Scene,
    i: usize,
    j: usize,
    kernel: &Kernel,
    n_lines: u64,
    stream: &RandomStream,
) -> Result<Estimate> {
    require_separated(scene, i, j)?;
    if n_lines == 0 {
        return Err(Error::InvalidArgument(
            "at least one line is required".into(),
        ));
    }
    let (a, b) = (scene.body(i), scene.body(j));
    let (center, radius) = enclosing_ball(a.bounding_sphere(), b.bounding_sphere());
    let mean = mean_estimate(run_chunked(stream, n_lines, |rng, count| {
        let mut s = RunningStats::new();
        for _ in 0..count {
            let (p, d) = random_line(rng, &center, radius);
            let la = a.line_intervals(&p, &d);
            let lb = if i == j {
                la.clone()
            } else {
                b.line_intervals(&p, &d)
            };
            let mut sum = 0.0;
            for (k, x) in la.iter().enumerate() {
                for (m, y) in lb.iter().enumerate() {
                    for_each_segment(x, y, i == j && k == m, |len, sign| {
                        sum += sign * kernel.phi2(len);
                        Ok(())
                    })?;
                }
            }
            s.push(sum);
        }
        Ok(s)
    }))?;
    Ok(mean.scaled(line_measure(radius)))
}

/// `(S∪/4) Σ μ̌_ij(l_c) Φ₂(l_c) Δl`.
pub fn transfer_chords_binned(
    kernel: &Kernel,
    mu: &MatrixDensity,
    i: usize,
    j: usize,
) -> Result<Estimate> {
    let s = mu.norm.s_union / 4.0;
    Ok(mu.cell(i, j)?.integrate_with(|l| s * kernel.phi2(l)))
}

/// Chord route: the streaming estimate, with the binned form of an
/// independent chord matrix as `alternate` when one is supplied.
pub fn transfer_via_chords(
    scene: &Scene,
    i: usize,
    j: usize,
    kernel: &Kernel,
    n_lines: u64,
    stream: &RandomStream,
    mu: Option<&MatrixDensity>,
) -> Result<TransferResult> {
    let start = Instant::now();
    let est = transfer_chords_streaming(scene, i, j, kernel, n_lines, stream)?;
    let mut r = TransferResult::new(Route::Chords, est, n_lines, start);
    if let Some(m) = mu {
        r.alternate = Some(transfer_chords_binned(kernel, m, i, j)?);
        r.warnings = binning_warnings(m, i, j)?;
    }
    r.wall_time = start.elapsed().as_secs_f64();
    Ok(r)
}

/// `C^λ_ij = 3 V_i V_j / π`.
pub fn lambda_constant(v_i: f64, v_j: f64) -> f64 {
    3.0 * v_i * v_j / std::f64::consts::PI
}

/// `C^λ_ij Σ λ_ij(x_c) Φ₂(x_c) / x_c⁴ Δx`.
pub fn transfer_via_lambda(
    i: usize,
    j: usize,
    kernel: &Kernel,
    lambda: &MatrixDensity,
) -> Result<TransferResult> {
    let start = Instant::now();
    let cell = lambda.cell(i, j)?;
    let c = lambda_constant(lambda.norm.volumes[i], lambda.norm.volumes[j]);
    let est = cell.integrate_with(|x| c * kernel.phi2(x) / x.powi(4));
    let mut r = TransferResult::new(Route::Lambda, est, cell.n_events().unwrap_or(0), start);
    r.warnings = binning_warnings(lambda, i, j)?;
    Ok(r)
}

/// Mass-weighted transfer and the λ normalization of the weighted chords.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonuniformTransfer {
    pub transfer: TransferResult,
    /// `3/π` times the ball-kernel weighted transfer of the same points.
    pub c_lambda: Estimate,
    /// `3 M_i M_j / π` from the body masses.
    pub c_lambda_expected: f64,
}

/// `V_i V_j` times the mean of `ρ_i(r) ρ_j(r') φ(R)/(4πR²)` over uniform
/// points. Draws the same points as [`transfer_direct`] on the same stream.
pub fn transfer_nonuniform(
    scene: &Scene,
    i: usize,
    j: usize,
    kernel: &Kernel,
    n: u64,
    stream: &RandomStream,
) -> Result<NonuniformTransfer> {
    let start = Instant::now();
    scene.check_index(i)?;
    scene.check_index(j)?;
    for k in [i, j] {
        if scene.mass(k).partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::ZeroMass(scene.id(k).into()));
        }
    }
    if kernel.singular_at_origin() {
        if i == j {
            return Err(Error::SingularDiagonal(kernel.to_string()));
        }
        require_separated(scene, i, j)?;
    }
    let (a, b) = (scene.body(i), scene.body(j));
    let parts = run_chunked(
        stream,
        n.max(1),
        |rng, count| -> Result<(RunningStats, RunningStats)> {
            let mut s = RunningStats::new();
            let mut ball = RunningStats::new();
            for _ in 0..count {
                let p = a.sample_point(rng)?;
                let q = b.sample_point(rng)?;
                let w = a.density.eval(&p) * b.density.eval(&q);
                s.push(w * kernel.point_kernel((p - q).norm()));
                ball.push(w);
            }
            Ok((s, ball))
        },
    );
    let (mut s, mut ball) = (RunningStats::new(), RunningStats::new());
    for p in parts {
        let (x, y) = p?;
        s.merge(&x);
        ball.merge(&y);
    }
    let vv = scene.volume(i) * scene.volume(j);
    let transfer = TransferResult::new(Route::Direct, s.estimate().scaled(vv), n, start);
    Ok(NonuniformTransfer {
        transfer,
        c_lambda: ball.estimate().scaled(3.0 * vv / std::f64::consts::PI),
        c_lambda_expected: lambda_constant(scene.mass(i), scene.mass(j)),
    })
}

/// Sample and binning budget for a set of routes.
#[derive(Debug, Clone, Copy)]
pub struct RouteConfig {
    pub samples: u64,
    pub binning: Binning,
}

/// Runs the requested routes on pair `(i, j)`; each route uses its own
/// substream and the binned routes share one estimator run per matrix.
/// Returns one entry per route, with errors for routes that do not apply.
pub fn run_routes(
    scene: &Scene,
    i: usize,
    j: usize,
    kernel: &Kernel,
    routes: &[Route],
    config: &RouteConfig,
    stream: &RandomStream,
) -> Result<Vec<(Route, Result<TransferResult>)>> {
    scene.check_index(i)?;
    scene.check_index(j)?;
    let n = config.samples;
    let needs = |r: Route| routes.contains(&r);
    let separated = scene.check_disjoint();
    let eta = if needs(Route::Eta) {
        Some(estimate_eta(scene, n, &stream.fork(11), &config.binning))
    } else {
        None
    };
    let mu = if needs(Route::Chords) || needs(Route::Lambda) {
        Some(separated.and_then(|_| estimate_chords(scene, n, &stream.fork(12), &config.binning)))
    } else {
        None
    };
    let iota = if needs(Route::Radii) {
        scene
            .check_disjoint()
            .ok()
            .and_then(|_| estimate_radii(scene, n, &stream.fork(13), &config.binning).ok())
    } else {
        None
    };
    let mut out = Vec::new();
    for &route in routes {
        let sub = stream.fork(route as u64 + 1);
        let res = match route {
            Route::Direct => transfer_direct(scene, i, j, kernel, n, &sub),
            Route::Eta => match eta.as_ref().expect("computed") {
                Ok(e) => transfer_via_eta(scene, i, j, kernel, &e.matrix),
                Err(e) => Err(Error::InvalidArgument(e.to_string())),
            },
            Route::Gamma => transfer_via_gamma(scene, i, j, kernel),
            Route::Radii => transfer_via_radii(
                scene,
                i,
                j,
                kernel,
                n,
                &sub,
                iota.as_ref().map(|o| &o.matrix),
            ),
            Route::Chords => match mu.as_ref().expect("computed") {
                Ok(m) => transfer_via_chords(scene, i, j, kernel, n, &sub, Some(&m.matrix)),
                Err(_) => transfer_via_chords(scene, i, j, kernel, n, &sub, None),
            },
            Route::Lambda => match mu.as_ref().expect("computed") {
                Ok(m) => transfer_via_lambda(i, j, kernel, &lambda_from_mu(&m.matrix)),
                Err(e) => Err(Error::InvalidArgument(e.to_string())),
            },
        };
        out.push((route, res));
    }
    Ok(out)
}
