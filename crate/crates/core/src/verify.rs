//! Cross-checks tying the estimators, transfer routes and closed forms
//! together.
//!
//! Each check is either exact (same events relabelled, or pure algebra) or
//! statistical. Statistical checks report a z-score; bin-wise checks collapse
//! their per-bin deviates into one family-level z first. A report passes its
//! statistical checks against a Bonferroni-corrected three-sigma threshold
//! over all statistical checks it contains.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::analytic::{pair_cross_gamma, quadrature, sphere_bin_average};
use crate::error::{Error, Result};
use crate::estimators::{
    estimate_chords, estimate_eta, estimate_eta_weighted, estimate_radii, eta_pair_density,
    gamma_from_eta, lambda_from_mu, Binning, EstimatorOutput, QUADRUPLET_TOL,
    UNRELIABLE_GAMMA_BINS,
};
use crate::format::{round9, sig9};
use crate::geometry::Shape;
use crate::kernel::Kernel;
use crate::rng::RandomStream;
use crate::scene::{PairStatus, Scene};
use crate::signed_hist::{linear_combine, SignedHistogram};
use crate::stats::{bonferroni_z, family_z, z_score, Estimate};
use crate::transfer::{
    run_routes, transfer_chords_binned, transfer_chords_streaming, transfer_direct,
    transfer_nonuniform, transfer_radii_binned, transfer_radii_streaming, transfer_via_gamma,
    transfer_via_lambda, Route, RouteConfig,
};

/// Relative allowance for binning bias in route comparisons.
pub const BINNING_ALLOWANCE: f64 = 0.01;

/// Relative tolerance of algebraic identities evaluated in floating point.
pub const ALGEBRAIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    ExactPass,
    StatPass,
    Fail,
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::ExactPass => "EXACT_PASS",
            Status::StatPass => "STAT_PASS",
            Status::Fail => "FAIL",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub identity: String,
    pub status: Status,
    pub z: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub stderr: f64,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<IdentityCheck>,
    /// Threshold applied to every statistical z-score.
    pub z_threshold: f64,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn get(&self, identity: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.identity == identity)
    }

    /// Copy with every number rounded to nine significant digits.
    pub fn rounded(&self) -> VerificationReport {
        let checks = self
            .checks
            .iter()
            .map(|c| IdentityCheck {
                z: c.z.map(round9),
                lhs: round9(c.lhs),
                rhs: round9(c.rhs),
                stderr: round9(c.stderr),
                ..c.clone()
            })
            .collect();
        VerificationReport {
            checks,
            z_threshold: round9(self.z_threshold),
        }
    }

    /// JSON array of checks with values rounded to nine significant digits.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.rounded().checks).expect("serializable report")
    }

    pub fn to_table(&self) -> String {
        let width = self
            .checks
            .iter()
            .map(|c| c.identity.len())
            .max()
            .unwrap_or(8)
            .max(8);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:<10}  {:>12}  {:>16}  {:>16}  {:>12}",
            "identity", "status", "z", "lhs", "rhs", "stderr"
        );
        for c in &self.checks {
            let z = c.z.map(sig9).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "{:<width$}  {:<10}  {:>12}  {:>16}  {:>16}  {:>12}",
                c.identity,
                c.status.label(),
                z,
                sig9(c.lhs),
                sig9(c.rhs),
                sig9(c.stderr)
            );
        }
        let _ = writeln!(
            out,
            "z threshold {} over {} checks",
            sig9(self.z_threshold),
            self.checks.len()
        );
        out
    }

    fn append(&mut self, other: VerificationReport, prefix: &str) {
        for mut c in other.checks {
            c.identity = format!("{prefix}{}", c.identity);
            self.checks.push(c);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Oracles,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        match s {
            "identities" => Ok(Suite::Identities),
            "oracles" => Ok(Suite::Oracles),
            "all" => Ok(Suite::All),
            _ => Err(Error::InvalidArgument(format!("unknown suite '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    pub samples: u64,
    pub bins: usize,
    pub l_max: Option<f64>,
    pub kernel: Kernel,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            samples: 1_000_000,
            bins: 200,
            l_max: None,
            kernel: Kernel::Exp { sigma: 1.0 },
        }
    }
}

enum Outcome {
    Exact(bool),
    /// z-score, and an absolute allowance added to the threshold band.
    Stat {
        z: f64,
        allowance: f64,
    },
}

struct Pending {
    identity: String,
    outcome: Outcome,
    lhs: f64,
    rhs: f64,
    stderr: f64,
    detail: String,
}

#[derive(Default)]
struct Builder {
    pending: Vec<Pending>,
}

impl Builder {
    fn exact(&mut self, identity: String, ok: bool, lhs: f64, rhs: f64, detail: String) {
        self.pending.push(Pending {
            identity,
            outcome: Outcome::Exact(ok),
            lhs,
            rhs,
            stderr: 0.0,
            detail,
        });
    }

    fn compare(&mut self, identity: String, lhs: Estimate, rhs: Estimate, allowance: f64) {
        let stderr = lhs.stderr.hypot(rhs.stderr);
        let z = z_score(lhs.value - rhs.value, stderr);
        self.pending.push(Pending {
            identity,
            outcome: Outcome::Stat { z, allowance },
            lhs: lhs.value,
            rhs: rhs.value,
            stderr,
            detail: String::new(),
        });
    }

    fn family(&mut self, identity: String, bins: &BinwiseSummary, detail: String) {
        self.pending.push(Pending {
            identity,
            outcome: Outcome::Stat {
                z: bins.family_z,
                allowance: 0.0,
            },
            lhs: bins.max_abs_z,
            rhs: 0.0,
            stderr: bins.bins as f64,
            detail,
        });
    }

    fn finish(self) -> VerificationReport {
        let m = self
            .pending
            .iter()
            .filter(|p| matches!(p.outcome, Outcome::Stat { .. }))
            .count();
        let threshold = bonferroni_z(m);
        let checks = self
            .pending
            .into_iter()
            .map(|p| {
                let (status, z) = match p.outcome {
                    Outcome::Exact(true) => (Status::ExactPass, None),
                    Outcome::Exact(false) => (Status::Fail, None),
                    Outcome::Stat { z, allowance } => {
                        let ok = (p.lhs - p.rhs).abs() <= threshold * p.stderr + allowance
                            || z.abs() <= threshold;
                        (if ok { Status::StatPass } else { Status::Fail }, Some(z))
                    }
                };
                IdentityCheck {
                    identity: p.identity,
                    status,
                    z,
                    lhs: p.lhs,
                    rhs: p.rhs,
                    stderr: p.stderr,
                    detail: p.detail,
                }
            })
            .collect();
        VerificationReport {
            checks,
            z_threshold: threshold,
        }
    }
}

/// Per-bin deviates of a histogram that should vanish, or of a histogram
/// against expected values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinwiseSummary {
    pub bins: usize,
    pub max_abs_z: f64,
    pub family_z: f64,
    /// Largest absolute deviation.
    pub max_deviation: f64,
}

/// Compares `h` with `expected(bin)` over bins `from..`, skipping bins where
/// both the deviation and its error vanish.
///
/// A bin that received no events has no error estimate of its own. Its
/// variance is floored at `|expected| · q`, with `q` the variance-to-mean
/// ratio of the nearest populated bin, so that an empty bin where a few
/// events were expected is judged by Poisson-like counting.
pub fn binwise<F: Fn(usize) -> f64>(
    h: &SignedHistogram,
    from: usize,
    expected: F,
) -> BinwiseSummary {
    let ratio: Vec<Option<f64>> = (0..h.n_bins())
        .map(|b| {
            (h.density(b) != 0.0 && h.stderr(b) > 0.0)
                .then(|| h.stderr(b).powi(2) / h.density(b).abs())
        })
        .collect();
    let nearest = |b: usize| {
        (0..h.n_bins())
            .filter_map(|k| ratio[k].map(|q| (k.abs_diff(b), q)))
            .min_by_key(|&(d, _)| d)
            .map(|(_, q)| q)
    };
    let mut max_abs_z: f64 = 0.0;
    let mut max_dev: f64 = 0.0;
    let mut bins = 0;
    for (b, r) in ratio.iter().enumerate().skip(from) {
        let e = expected(b);
        let dev = h.density(b) - e;
        let mut var = h.stderr(b).powi(2);
        if r.is_none() {
            var = var.max(e.abs() * nearest(b).unwrap_or(0.0));
        }
        if dev == 0.0 && var == 0.0 {
            continue;
        }
        bins += 1;
        max_abs_z = max_abs_z.max(z_score(dev, var.sqrt()).abs());
        max_dev = max_dev.max(dev.abs());
    }
    BinwiseSummary {
        bins,
        max_abs_z,
        family_z: family_z(max_abs_z, bins),
        max_deviation: max_dev,
    }
}

fn pair_label(scene: &Scene, i: usize, j: usize) -> String {
    format!("[{},{}]", scene.id(i), scene.id(j))
}

fn upper_pairs(n: usize, diagonal: bool) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| ((if diagonal { i } else { i + 1 })..n).map(move |j| (i, j)))
        .collect()
}

/// Bit-exact comparison of the matrix sum with the unlabelled histogram from
/// bin `from` on. Bodies sharing boundary patches leave a point mass at zero
/// length in the chord sum, so that bin is excluded for them.
fn exact_sum_check(b: &mut Builder, name: &str, out: &EstimatorOutput, from: usize) {
    let sum = out.matrix.matrix_sum();
    let same = sum.densities()[from..] == out.union.densities()[from..]
        && sum.overflow_weight() == out.union.overflow_weight();
    let lhs = sum.integrate_bins_with(from, |_| 1.0).value;
    let rhs = out.union.integrate_bins_with(from, |_| 1.0).value;
    let detail = if from > 0 {
        format!("bins from {from}")
    } else {
        String::new()
    };
    b.exact(name.into(), same, lhs, rhs, detail);
}

/// Least-squares constant `C` in `lhs(l) ≈ C x(l)` and the per-bin residuals.
fn constancy(
    lhs: &SignedHistogram,
    x: &SignedHistogram,
    from: usize,
) -> (Estimate, BinwiseSummary) {
    let fit = |c: f64| {
        let (mut num, mut den) = (0.0, 0.0);
        for b in from..lhs.n_bins() {
            let var = lhs.stderr(b).powi(2) + (c * x.stderr(b)).powi(2);
            if var == 0.0 {
                continue;
            }
            num += lhs.density(b) * x.density(b) / var;
            den += x.density(b).powi(2) / var;
        }
        if den == 0.0 {
            Estimate::new(0.0, f64::INFINITY)
        } else {
            Estimate::new(num / den, den.sqrt().recip())
        }
    };
    let c = fit(fit(0.0).value);
    let mut max_abs_z: f64 = 0.0;
    let mut bins = 0;
    let mut max_dev: f64 = 0.0;
    for b in from..lhs.n_bins() {
        let var = lhs.stderr(b).powi(2) + (c.value * x.stderr(b)).powi(2);
        let dev = lhs.density(b) - c.value * x.density(b);
        if var == 0.0 && dev == 0.0 {
            continue;
        }
        bins += 1;
        max_abs_z = max_abs_z.max(z_score(dev, var.sqrt()).abs());
        max_dev = max_dev.max(dev.abs());
    }
    (
        c,
        BinwiseSummary {
            bins,
            max_abs_z,
            family_z: family_z(max_abs_z, bins),
            max_deviation: max_dev,
        },
    )
}

/// Runs the union, decomposition, matrix-sum, zero-law and normalization
/// identities that apply to `scene`. Overlapping scenes are checked through
/// their decomposition, whose identities are appended with a `pieces:` prefix.
pub fn verify_identities(
    scene: &Scene,
    cfg: &VerifyConfig,
    stream: &RandomStream,
) -> Result<VerificationReport> {
    let mut b = Builder::default();
    if !scene.is_disjoint() {
        let pieces = scene.decompose_overlaps()?;
        overlap_checks(&mut b, scene, &pieces, cfg, &stream.fork(90))?;
        let mut report = b.finish();
        let mut inner = Builder::default();
        disjoint_checks(&mut inner, &pieces, cfg, &stream.fork(91), true)?;
        report.append(inner.finish(), "pieces:");
        return Ok(rethreshold(report));
    }
    disjoint_checks(&mut b, scene, cfg, stream, false)?;
    Ok(b.finish())
}

/// Re-applies the family-wise threshold after merging reports.
fn rethreshold(report: VerificationReport) -> VerificationReport {
    let mut b = Builder::default();
    for c in report.checks {
        let outcome = match c.z {
            None => Outcome::Exact(c.status != Status::Fail),
            Some(z) => Outcome::Stat {
                z,
                allowance: allowance_of(&c),
            },
        };
        b.pending.push(Pending {
            identity: c.identity,
            outcome,
            lhs: c.lhs,
            rhs: c.rhs,
            stderr: c.stderr,
            detail: c.detail,
        });
    }
    b.finish()
}

fn allowance_of(c: &IdentityCheck) -> f64 {
    if c.identity.contains("route-agreement")
        || c.identity.contains("streaming-vs-binned")
        || c.identity.contains("ball-universality")
    {
        BINNING_ALLOWANCE * c.rhs.abs()
    } else {
        0.0
    }
}

fn overlap_checks(
    b: &mut Builder,
    scene: &Scene,
    pieces: &Scene,
    cfg: &VerifyConfig,
    stream: &RandomStream,
) -> Result<()> {
    let k = &cfg.kernel;
    for (i, j) in upper_pairs(scene.len(), false) {
        if scene.pair_status(i, j) == PairStatus::Disjoint {
            continue;
        }
        let name = format!("overlap-decomposition{}", pair_label(scene, i, j));
        let whole = match transfer_via_gamma(scene, i, j, k) {
            Ok(r) => r.estimate(),
            Err(Error::UnsupportedGeometry(_)) if !k.singular_at_origin() => transfer_direct(
                scene,
                i,
                j,
                k,
                cfg.samples,
                &stream.fork(i as u64 * 1000 + j as u64),
            )?
            .estimate(),
            Err(Error::UnsupportedGeometry(_)) => continue,
            Err(e) => return Err(e),
        };
        let find = |id: String| {
            (0..pieces.len())
                .find(|&p| pieces.id(p) == id)
                .ok_or(Error::InvalidArgument(id))
        };
        let (a, bb) = (scene.id(i), scene.id(j));
        let only_a = find(format!("{a}\\{bb}"))?;
        let only_b = find(format!("{bb}\\{a}"))?;
        let both = find(format!("{a}&{bb}"))?;
        let mut value = 0.0;
        let mut var = 0.0;
        for (t, (p, q)) in [
            (only_a, only_b),
            (only_a, both),
            (both, only_b),
            (both, both),
        ]
        .into_iter()
        .enumerate()
        {
            let e = transfer_chords_streaming(
                pieces,
                p,
                q,
                k,
                cfg.samples,
                &stream.fork(100 + t as u64),
            )?;
            value += e.value;
            var += e.stderr * e.stderr;
        }
        b.compare(name, whole, Estimate::new(value, var.sqrt()), 0.0);
    }
    Ok(())
}

fn disjoint_checks(
    b: &mut Builder,
    scene: &Scene,
    cfg: &VerifyConfig,
    stream: &RandomStream,
    shared_boundaries: bool,
) -> Result<()> {
    let n = cfg.samples;
    let k = &cfg.kernel;
    let binning = Binning::for_scene(scene, cfg.bins, cfg.l_max)?;
    let v_union = scene.v_union();
    let eta = estimate_eta(scene, n, &stream.fork(1), &binning)?;
    let radii = estimate_radii(scene, n, &stream.fork(2), &binning)?;
    let chords = estimate_chords(scene, n, &stream.fork(3), &binning)?;
    exact_sum_check(b, "eta-matrix-sum", &eta, 0);
    exact_sum_check(b, "radii-matrix-sum", &radii, 0);
    exact_sum_check(
        b,
        "chords-matrix-sum",
        &chords,
        usize::from(shared_boundaries),
    );

    let gamma = gamma_from_eta(&eta.matrix);
    let g_sum = gamma.matrix_sum().densities();
    let g_union = gamma
        .total
        .as_ref()
        .expect("unlabelled histogram")
        .densities();
    let worst = g_sum
        .iter()
        .zip(&g_union)
        .map(|(a, u)| (a - u).abs() / u.abs().max(f64::MIN_POSITIVE))
        .filter(|r| r.is_finite())
        .fold(0.0, f64::max);
    let ok = g_sum
        .iter()
        .zip(&g_union)
        .all(|(a, u)| (a - u).abs() <= ALGEBRAIC_TOL * u.abs());
    b.exact(
        "gamma-matrix-sum".into(),
        ok,
        worst,
        0.0,
        "largest relative bin difference".into(),
    );

    let rb = &radii.balance;
    b.exact(
        "radii-event-balance".into(),
        rb.unbalanced_events == 0,
        rb.unbalanced_events as f64,
        0.0,
        String::new(),
    );
    let cb = &chords.balance;
    b.exact(
        "chords-event-balance".into(),
        cb.unbalanced_events == 0,
        cb.unbalanced_events as f64,
        0.0,
        String::new(),
    );
    b.exact(
        "quadruplet-lengths".into(),
        cb.max_quadruplet_defect <= QUADRUPLET_TOL,
        cb.max_quadruplet_defect,
        0.0,
        format!("{} quadruplets", cb.quadruplets),
    );

    for (i, j) in upper_pairs(scene.len(), true) {
        let label = pair_label(scene, i, j);
        let p = eta.matrix.cell(i, j)?.integral();
        b.compare(
            format!("pair-probability{label}"),
            p,
            Estimate::exact(scene.volume(i) * scene.volume(j) / v_union.powi(2)),
            0.0,
        );
    }
    for i in 0..scene.len() {
        let label = pair_label(scene, i, i);
        let r = radii.matrix.cell(i, i)?.integral();
        b.compare(
            format!("radii-diagonal-integral{label}"),
            r,
            Estimate::exact(scene.volume(i) / v_union),
            0.0,
        );
    }
    for (i, j) in upper_pairs(scene.len(), false) {
        let label = pair_label(scene, i, j);
        let zero = Estimate::exact(0.0);
        b.compare(
            format!("radii-cross-integral-zero{label}"),
            radii.matrix.cell(i, j)?.integral(),
            zero,
            0.0,
        );
        b.compare(
            format!("chords-cross-integral-zero{label}"),
            chords.matrix.cell(i, j)?.integral(),
            zero,
            0.0,
        );
        b.compare(
            format!("chords-cross-mean-zero{label}"),
            chords.matrix.cell(i, j)?.moment(1),
            zero,
            0.0,
        );
        for (name, out) in [("eta", &eta), ("radii", &radii)] {
            let (a, c) = (
                out.ordered(i, j).expect("ordered"),
                out.ordered(j, i).expect("ordered"),
            );
            let diff = linear_combine(&[1.0, -1.0], &[a, c])?;
            let s = binwise(&diff, 0, |_| 0.0);
            b.family(format!("{name}-order-symmetry{label}"), &s, String::new());
        }
    }

    let lambda = lambda_from_mu(&chords.matrix);
    for (i, j) in upper_pairs(scene.len(), true) {
        let label = pair_label(scene, i, j);
        b.compare(
            format!("lambda-normalization{label}"),
            lambda.cell(i, j)?.integral(),
            Estimate::exact(1.0),
            0.0,
        );
        let via_lambda = transfer_via_lambda(i, j, k, &lambda)?.value;
        let via_mu = transfer_chords_binned(k, &chords.matrix, i, j)?.value;
        let ok = (via_lambda - via_mu).abs() <= ALGEBRAIC_TOL * via_mu.abs().max(f64::MIN_POSITIVE);
        b.exact(
            format!("lambda-equals-chords{label}"),
            ok,
            via_lambda,
            via_mu,
            String::new(),
        );

        let seed = 10 + (i * scene.len() + j) as u64 * 16;
        let ball = transfer_chords_streaming(scene, i, j, &Kernel::Ball, n, &stream.fork(seed))?;
        b.compare(
            format!("chords-ball-calibration{label}"),
            ball,
            Estimate::exact(scene.volume(i) * scene.volume(j)),
            0.0,
        );

        let radii_stream = transfer_radii_streaming(scene, i, j, k, n, &stream.fork(seed + 1))?;
        let radii_binned = transfer_radii_binned(k, &radii.matrix, i, j)?;
        b.compare(
            format!("radii-streaming-vs-binned{label}"),
            radii_binned,
            radii_stream,
            BINNING_ALLOWANCE * radii_stream.value.abs(),
        );
        let chords_stream = transfer_chords_streaming(scene, i, j, k, n, &stream.fork(seed + 2))?;
        let chords_binned = transfer_chords_binned(k, &chords.matrix, i, j)?;
        b.compare(
            format!("chords-streaming-vs-binned{label}"),
            chords_binned,
            chords_stream,
            BINNING_ALLOWANCE * chords_stream.value.abs(),
        );
    }

    union_checks(b, scene, cfg, &binning, &eta, &radii, &chords, stream)?;
    mass_checks(b, scene, cfg, &binning, stream)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn union_checks(
    b: &mut Builder,
    scene: &Scene,
    cfg: &VerifyConfig,
    binning: &Binning,
    eta: &EstimatorOutput,
    radii: &EstimatorOutput,
    chords: &EstimatorOutput,
    stream: &RandomStream,
) -> Result<()> {
    let n = cfg.samples;
    let k = &cfg.kernel;
    let gamma = gamma_from_eta(&eta.matrix);
    let singles: Vec<Scene> = (0..scene.len())
        .map(|i| scene.sub_scene(&[i]))
        .collect::<Result<_>>()?;
    let single = |f: &dyn Fn(&Scene, &RandomStream) -> Result<EstimatorOutput>,
                  label: u64|
     -> Result<Vec<SignedHistogram>> {
        singles
            .iter()
            .enumerate()
            .map(|(i, s)| {
                Ok(f(s, &stream.fork(label + i as u64))?
                    .matrix
                    .cell(0, 0)?
                    .clone())
            })
            .collect()
    };
    let eta_single = single(&|s, r| estimate_eta(s, n, r, binning), 1000)?;
    let radii_single = single(&|s, r| estimate_radii(s, n, r, binning), 2000)?;
    let chords_single = single(&|s, r| estimate_chords(s, n, r, binning), 3000)?;

    for (i, j) in upper_pairs(scene.len(), false) {
        let label = pair_label(scene, i, j);
        let seed = 4000 + 16 * (i * scene.len() + j) as u64;
        let merged = scene.sub_scene(&[i, j])?.merged()?;
        let (vi, vj) = (scene.volume(i), scene.volume(j));
        let (si, sj) = (scene.surface(i), scene.surface(j));

        let direct = transfer_chords_streaming(scene, i, j, k, n, &stream.fork(seed))?.scaled(2.0);
        let whole = transfer_chords_streaming(&merged, 0, 0, k, n, &stream.fork(seed + 1))?;
        let own_i = transfer_chords_streaming(scene, i, i, k, n, &stream.fork(seed + 2))?;
        let own_j = transfer_chords_streaming(scene, j, j, k, n, &stream.fork(seed + 3))?;
        let rhs = Estimate::new(
            whole.value - own_i.value - own_j.value,
            (whole.stderr.powi(2) + own_i.stderr.powi(2) + own_j.stderr.powi(2)).sqrt(),
        );
        b.compare(format!("pair-from-union{label}"), direct, rhs, 0.0);

        let eta_u = estimate_eta(&merged, n, &stream.fork(seed + 4), binning)?.matrix;
        let eta_ij = eta_pair_density(&eta.matrix, i, j)?;
        let dist = linear_combine(
            &[(vi + vj).powi(2), -vi * vi, -vj * vj, -2.0 * vi * vj],
            &[eta_u.cell(0, 0)?, &eta_single[i], &eta_single[j], &eta_ij],
        )?;
        let s = binwise(&dist, UNRELIABLE_GAMMA_BINS, |_| 0.0);
        b.family(format!("distance-union{label}"), &s, String::new());

        let g_u = gamma_from_eta(&eta_u);
        let g_single = |h: &SignedHistogram, v: f64| h.map_bins(|l| v * v / (4.0 * PI * l * l));
        let corr = linear_combine(
            &[1.0, -1.0, -1.0, -2.0],
            &[
                g_u.cell(0, 0)?,
                &g_single(&eta_single[i], vi),
                &g_single(&eta_single[j], vj),
                gamma.cell(i, j)?,
            ],
        )?;
        let s = binwise(&corr, UNRELIABLE_GAMMA_BINS, |_| 0.0);
        b.family(format!("correlation-union{label}"), &s, String::new());

        let iota_u = estimate_radii(&merged, n, &stream.fork(seed + 5), binning)?.matrix;
        let lhs = linear_combine(
            &[vi + vj, -vi, -vj],
            &[iota_u.cell(0, 0)?, &radii_single[i], &radii_single[j]],
        )?;
        let x = radii.matrix.cell(i, j)?.scaled(2.0);
        let (c, s) = constancy(&lhs, &x, 0);
        b.family(
            format!("radii-constant-constancy{label}"),
            &s,
            format!(
                "constant {} ± {} (V∪ = {})",
                sig9(c.value),
                sig9(c.stderr),
                sig9(scene.v_union())
            ),
        );

        let mu_u = estimate_chords(&merged, n, &stream.fork(seed + 6), binning)?.matrix;
        let lhs = linear_combine(
            &[si + sj, -si, -sj],
            &[mu_u.cell(0, 0)?, &chords_single[i], &chords_single[j]],
        )?;
        let x = chords.matrix.cell(i, j)?.scaled(2.0);
        let (c, s) = constancy(&lhs, &x, 0);
        b.family(
            format!("chords-constant-constancy{label}"),
            &s,
            format!(
                "constant {} ± {} (S∪ = {})",
                sig9(c.value),
                sig9(c.stderr),
                sig9(scene.s_union())
            ),
        );
    }
    Ok(())
}

fn mass_checks(
    b: &mut Builder,
    scene: &Scene,
    cfg: &VerifyConfig,
    binning: &Binning,
    stream: &RandomStream,
) -> Result<()> {
    if (0..scene.len())
        .any(|i| scene.mass(i).partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater))
    {
        return Ok(());
    }
    let weighted = estimate_eta_weighted(scene, cfg.samples, &stream.fork(5000), binning)?;
    for (i, j) in upper_pairs(scene.len(), true) {
        let label = pair_label(scene, i, j);
        let m = weighted
            .matrix
            .cell(i, j)?
            .integrate_with(|l| 4.0 * PI * l * l);
        let expected = scene.mass(i) * scene.mass(j);
        let mm = weighted.matrix.norm.masses[i] * weighted.matrix.norm.masses[j];
        debug_assert_eq!(mm, expected);
        b.compare(
            format!("mass-normalization{label}"),
            m,
            Estimate::new(expected, mass_stderr(scene, i, j)),
            0.0,
        );
        let nu = transfer_nonuniform(
            scene,
            i,
            j,
            &Kernel::Ball,
            cfg.samples,
            &stream.fork(5001 + (i * scene.len() + j) as u64),
        )?;
        b.compare(
            format!("weighted-lambda-constant{label}"),
            nu.c_lambda,
            Estimate::new(nu.c_lambda_expected, 3.0 / PI * mass_stderr(scene, i, j)),
            0.0,
        );
    }
    Ok(())
}

fn mass_stderr(scene: &Scene, i: usize, j: usize) -> f64 {
    let (a, b) = (scene.measures(i).mass, scene.measures(j).mass);
    (a.value * b.stderr).hypot(b.value * a.stderr)
}

/// Sphere-specific oracles: closed-form single-ball distributions, the
/// mean-chord relation for convex primitives, the pair cross-correlation
/// against quadrature, and every transfer route against the quadrature route.
pub fn verify_oracles(
    scene: &Scene,
    cfg: &VerifyConfig,
    stream: &RandomStream,
) -> Result<VerificationReport> {
    let mut b = Builder::default();
    let n = cfg.samples;
    for i in 0..scene.len() {
        let single = scene.sub_scene(&[i])?;
        let id = scene.id(i);
        let seed = 100 + 8 * i as u64;
        match scene.body(i).shape {
            Shape::Sphere { radius, .. } => {
                let bins = Binning::new(2.0 * radius, cfg.bins)?;
                let eta = estimate_eta(&single, n, &stream.fork(seed), &bins)?.matrix;
                let iota = estimate_radii(&single, n, &stream.fork(seed + 1), &bins)?.matrix;
                let mu = estimate_chords(&single, n, &stream.fork(seed + 2), &bins)?.matrix;
                let avg = |h: &SignedHistogram, b: usize| {
                    sphere_bin_average(radius, h.bin_left(b), h.bin_right(b))
                };
                let e = eta.cell(0, 0)?;
                b.family(
                    format!("sphere-eta-oracle[{id}]"),
                    &binwise(e, 0, |k| avg(e, k).eta),
                    String::new(),
                );
                let r = iota.cell(0, 0)?;
                b.family(
                    format!("sphere-radii-oracle[{id}]"),
                    &binwise(r, 0, |k| avg(r, k).iota),
                    String::new(),
                );
                let m = mu.cell(0, 0)?;
                b.family(
                    format!("sphere-chords-oracle[{id}]"),
                    &binwise(m, 0, |k| avg(m, k).mu),
                    String::new(),
                );
                b.compare(
                    format!("mean-chord[{id}]"),
                    m.moment(1),
                    Estimate::exact(4.0 * radius / 3.0),
                    0.0,
                );
            }
            Shape::AxisBox { .. } => {
                let bins = Binning::for_scene(&single, cfg.bins, None)?;
                let mu = estimate_chords(&single, n, &stream.fork(seed + 2), &bins)?.matrix;
                let expected = 4.0 * scene.volume(i) / scene.surface(i);
                b.compare(
                    format!("mean-chord[{id}]"),
                    mu.cell(0, 0)?.moment(1),
                    Estimate::exact(expected),
                    0.0,
                );
            }
            Shape::Csg { .. } => {}
        }
    }

    let spheres: Vec<usize> = (0..scene.len())
        .filter(|&i| matches!(scene.body(i).shape, Shape::Sphere { .. }))
        .collect();
    if scene.is_disjoint() && spheres.len() >= 2 {
        let binning = Binning::for_scene(scene, cfg.bins, cfg.l_max)?;
        let eta = estimate_eta(scene, n, &stream.fork(7), &binning)?;
        let gamma = gamma_from_eta(&eta.matrix);
        for (a, &i) in spheres.iter().enumerate() {
            for &j in &spheres[a + 1..] {
                let (s, detail) = cross_correlation_oracle(scene, i, j, gamma.cell(i, j)?)?;
                b.family(
                    format!("cross-correlation-oracle{}", pair_label(scene, i, j)),
                    &s,
                    detail,
                );
            }
        }
    }

    if scene.is_disjoint() {
        let binning = Binning::for_scene(scene, cfg.bins, cfg.l_max)?;
        let config = RouteConfig {
            samples: n,
            binning,
        };
        for (a, &i) in spheres.iter().enumerate() {
            for &j in &spheres[a..] {
                let label = pair_label(scene, i, j);
                let seed = 200 + 32 * (i * scene.len() + j) as u64;
                for (kernel, name, reference) in [
                    (
                        Kernel::Ball,
                        "ball-universality",
                        Some(scene.volume(i) * scene.volume(j)),
                    ),
                    (cfg.kernel, "route-agreement", None),
                ] {
                    let results = run_routes(
                        scene,
                        i,
                        j,
                        &kernel,
                        &Route::ALL,
                        &config,
                        &stream.fork(seed + kernel_tag(&kernel)),
                    )?;
                    let gamma_ref = results
                        .iter()
                        .find(|(r, _)| *r == Route::Gamma)
                        .and_then(|(_, r)| r.as_ref().ok())
                        .map(|r| r.value)
                        .ok_or_else(|| {
                            Error::UnsupportedGeometry("gamma route unavailable".into())
                        })?;
                    let expected = reference.unwrap_or(gamma_ref);
                    for (route, res) in results {
                        let Ok(r) = res else { continue };
                        // The distance route drops the leading bins, where a singular
                        // kernel on a body with itself carries most of its weight.
                        if route == Route::Eta && i == j && kernel.singular_at_origin() {
                            continue;
                        }
                        let id = format!("{name}{label}:{route}");
                        if route == Route::Gamma {
                            if let Some(v) = reference {
                                b.exact(
                                    id,
                                    (r.value - v).abs() <= 1e-6 * v,
                                    r.value,
                                    v,
                                    String::new(),
                                );
                            }
                            continue;
                        }
                        b.compare(
                            id,
                            r.estimate(),
                            Estimate::exact(expected),
                            BINNING_ALLOWANCE * expected.abs(),
                        );
                    }
                }
            }
        }
    }
    Ok(b.finish())
}

fn kernel_tag(k: &Kernel) -> u64 {
    match k {
        Kernel::Ball => 0,
        Kernel::Exp { .. } => 1,
        Kernel::Const => 2,
    }
}

/// Bin average of the cross-correlation as the distance estimator sees it:
/// `∫ l² γ₁₂ / (Δl · l_c²)` over the bin.
pub fn cross_gamma_bin_oracle(r1: f64, r2: f64, big_d: f64, left: f64, right: f64) -> Result<f64> {
    let center = 0.5 * (left + right);
    let mut pts = vec![left, right];
    for p in crate::analytic::pair_cross_breaks(r1, r2, big_d) {
        if p > left && p < right {
            pts.push(p);
        }
    }
    pts.sort_by(f64::total_cmp);
    let tol = quadrature::Tolerance {
        rel: 1e-10,
        abs: 1e-15,
    };
    let integral = quadrature::integrate_with_breaks(
        |l| l * l * pair_cross_gamma(r1, r2, big_d, l).unwrap_or(f64::NAN),
        &pts,
        tol,
    )?;
    Ok(integral / ((right - left) * center * center))
}

/// MC `γ_ij` against quadrature over bins starting two widths above the gap.
pub fn cross_correlation_oracle(
    scene: &Scene,
    i: usize,
    j: usize,
    gamma: &SignedHistogram,
) -> Result<(BinwiseSummary, String)> {
    let (c1, r1) = match scene.body(i).shape {
        Shape::Sphere { center, radius } => (center, radius),
        _ => return Err(Error::UnsupportedGeometry("sphere pair required".into())),
    };
    let (c2, r2) = match scene.body(j).shape {
        Shape::Sphere { center, radius } => (center, radius),
        _ => return Err(Error::UnsupportedGeometry("sphere pair required".into())),
    };
    let d = (c1 - c2).norm();
    let gap = (d - r1 - r2).max(0.0);
    let from = ((gap / gamma.width()).floor() as usize + 2).max(UNRELIABLE_GAMMA_BINS);
    let expected: Vec<f64> = (0..gamma.n_bins())
        .map(|b| {
            if b < from {
                Ok(0.0)
            } else {
                cross_gamma_bin_oracle(r1, r2, d, gamma.bin_left(b), gamma.bin_right(b))
            }
        })
        .collect::<Result<_>>()?;
    let peak = expected.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let s = binwise(gamma, from, |b| expected[b]);
    let detail = format!("max deviation {} of peak", sig9(s.max_deviation / peak));
    Ok((s, detail))
}

/// Runs the requested suites and merges them under one threshold.
pub fn verify(
    scene: &Scene,
    suite: Suite,
    cfg: &VerifyConfig,
    stream: &RandomStream,
) -> Result<VerificationReport> {
    let mut report = VerificationReport {
        checks: Vec::new(),
        z_threshold: 3.0,
    };
    if matches!(suite, Suite::Identities | Suite::All) {
        report.append(verify_identities(scene, cfg, &stream.fork(1))?, "");
    }
    if matches!(suite, Suite::Oracles | Suite::All) {
        report.append(verify_oracles(scene, cfg, &stream.fork(2))?, "");
    }
    Ok(rethreshold(report))
}
