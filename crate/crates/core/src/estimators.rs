//! Monte Carlo estimators of the matrix distributions: point pairs for the
//! distance distribution and correlation functions, rays for signed radii,
//! isotropic lines for signed chords.
//!
//! Every estimator splits its events into fixed chunks with their own random
//! substreams, so results are bit-identical for any number of worker threads.
//! Deposits carry raw weights (`±1` or density products) and normalizations
//! live in histogram scales. Each estimator also bins the same events without
//! body labels, which must reproduce the matrix sum exactly.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    enclosing_ball, interval_bool, random_direction, random_line, Body, BoolOp, Interval,
    IntervalList, Vec3,
};
use crate::rng::{run_chunked, RandomStream, StreamRng};
use crate::scene::Scene;
use crate::signed_hist::{
    packed_index, DensityKind, EventBuffer, MatrixDensity, Normalization, SignedHistogram,
};
use crate::stats::Estimate;

pub const DEFAULT_BINS: usize = 200;

/// Leading bins excluded from correlation-function comparisons.
pub const UNRELIABLE_GAMMA_BINS: usize = 2;

/// Tolerance of the per-quadruplet length balance.
pub const QUADRUPLET_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Binning {
    pub l_max: f64,
    pub n_bins: usize,
}

impl Binning {
    pub fn new(l_max: f64, n_bins: usize) -> Result<Self> {
        SignedHistogram::new(l_max, n_bins)?;
        Ok(Binning { l_max, n_bins })
    }

    /// `n_bins` over `[0, l_max]`, with `l_max` defaulting to the scene span.
    pub fn for_scene(scene: &Scene, n_bins: usize, l_max: Option<f64>) -> Result<Self> {
        Binning::new(l_max.unwrap_or_else(|| scene.default_l_max()), n_bins)
    }

    fn histogram(&self) -> SignedHistogram {
        SignedHistogram::new(self.l_max, self.n_bins).expect("validated binning")
    }
}

/// Counts of positive and negative deposits per ordered body pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventBalance {
    pub n: usize,
    pub plus: Vec<u64>,
    pub minus: Vec<u64>,
    /// Events whose deposits for a pair of distinct bodies did not pair up.
    pub unbalanced_events: u64,
    /// Largest `|(ℓ₁ + ℓ₂) − (ℓ₃ + ℓ₄)|` over chord quadruplets.
    pub max_quadruplet_defect: f64,
    pub quadruplets: u64,
}

impl EventBalance {
    fn new(n: usize) -> Self {
        EventBalance {
            n,
            plus: vec![0; n * n],
            minus: vec![0; n * n],
            unbalanced_events: 0,
            max_quadruplet_defect: 0.0,
            quadruplets: 0,
        }
    }

    pub fn plus(&self, i: usize, j: usize) -> u64 {
        self.plus[i * self.n + j]
    }

    pub fn minus(&self, i: usize, j: usize) -> u64 {
        self.minus[i * self.n + j]
    }

    /// `N₊ − N₋` for the ordered pair.
    pub fn net(&self, i: usize, j: usize) -> i64 {
        self.plus(i, j) as i64 - self.minus(i, j) as i64
    }

    fn merge(&mut self, other: &EventBalance) {
        for (a, b) in self.plus.iter_mut().zip(&other.plus) {
            *a += b;
        }
        for (a, b) in self.minus.iter_mut().zip(&other.minus) {
            *a += b;
        }
        self.unbalanced_events += other.unbalanced_events;
        self.max_quadruplet_defect = self.max_quadruplet_defect.max(other.max_quadruplet_defect);
        self.quadruplets += other.quadruplets;
    }
}

/// Result of one estimator run.
#[derive(Debug, Clone)]
pub struct EstimatorOutput {
    pub matrix: MatrixDensity,
    pub balance: EventBalance,
    /// Ordered accumulators `(i, j)` at `i * n + j`, each normalized like an
    /// off-diagonal cell, for estimators that distinguish the two orders.
    pub ordered: Option<Vec<SignedHistogram>>,
    /// The same events binned without body labels.
    pub union: SignedHistogram,
    pub n_events: u64,
}

impl EstimatorOutput {
    pub fn ordered(&self, i: usize, j: usize) -> Option<&SignedHistogram> {
        self.ordered.as_ref().map(|o| &o[i * self.matrix.n + j])
    }
}

/// Per-chunk accumulation state.
struct Accumulator {
    n: usize,
    slots: Vec<SignedHistogram>,
    bufs: Vec<EventBuffer>,
    touched: Vec<usize>,
    union: SignedHistogram,
    union_buf: EventBuffer,
    balance: EventBalance,
    event_plus: Vec<u64>,
    event_minus: Vec<u64>,
}

impl Accumulator {
    /// `slots` accumulators (ordered pairs or packed cells).
    fn new(n: usize, slots: usize, binning: &Binning) -> Self {
        Accumulator {
            n,
            slots: vec![binning.histogram(); slots],
            bufs: vec![EventBuffer::new(); slots],
            touched: Vec::new(),
            union: binning.histogram(),
            union_buf: EventBuffer::new(),
            balance: EventBalance::new(n),
            event_plus: vec![0; n * n],
            event_minus: vec![0; n * n],
        }
    }

    /// Stages `weight` at `value` into `slot`; `pair` is the ordered pair used
    /// for the sign bookkeeping.
    fn stage(&mut self, slot: usize, pair: (usize, usize), value: f64, weight: f64) -> Result<()> {
        if self.bufs[slot].is_empty() {
            self.touched.push(slot);
        }
        self.slots[slot].stage(&mut self.bufs[slot], value, weight)?;
        let k = pair.0 * self.n + pair.1;
        if weight > 0.0 {
            self.event_plus[k] += 1;
        } else if weight < 0.0 {
            self.event_minus[k] += 1;
        }
        Ok(())
    }

    fn stage_union(&mut self, value: f64, weight: f64) -> Result<()> {
        self.union.stage(&mut self.union_buf, value, weight)
    }

    fn end_event(&mut self) {
        for slot in self.touched.drain(..) {
            self.slots[slot].commit(&mut self.bufs[slot]);
        }
        self.union.commit(&mut self.union_buf);
        for i in 0..self.n {
            for j in 0..self.n {
                let k = i * self.n + j;
                let (p, m) = (self.event_plus[k], self.event_minus[k]);
                if p == 0 && m == 0 {
                    continue;
                }
                if i != j && p != m {
                    self.balance.unbalanced_events += 1;
                }
                self.balance.plus[k] += p;
                self.balance.minus[k] += m;
                self.event_plus[k] = 0;
                self.event_minus[k] = 0;
            }
        }
    }

    fn merge(&mut self, other: &Accumulator) -> Result<()> {
        for (a, b) in self.slots.iter_mut().zip(&other.slots) {
            a.merge(b)?;
        }
        self.union.merge(&other.union)?;
        self.balance.merge(&other.balance);
        Ok(())
    }
}

fn run_accumulators<F>(
    stream: &RandomStream,
    n_events: u64,
    make: impl Fn() -> Accumulator + Sync + Send,
    event: F,
) -> Result<Accumulator>
where
    F: Fn(&mut StreamRng, &mut Accumulator) -> Result<()> + Sync + Send,
{
    if n_events == 0 {
        return Err(Error::InvalidArgument(
            "at least one sample is required".into(),
        ));
    }
    let chunks = run_chunked(stream, n_events, |rng, count| -> Result<Accumulator> {
        let mut acc = make();
        for _ in 0..count {
            event(rng, &mut acc)?;
            acc.end_event();
        }
        Ok(acc)
    });
    let mut iter = chunks.into_iter();
    let mut total = iter.next().expect("at least one chunk")?;
    for c in iter {
        total.merge(&c?)?;
    }
    for h in total
        .slots
        .iter_mut()
        .chain(std::iter::once(&mut total.union))
    {
        h.add_silent_events(n_events);
    }
    Ok(total)
}

fn normalization(scene: &Scene) -> Normalization {
    Normalization {
        v_union: scene.v_union(),
        s_union: scene.s_union(),
        volumes: scene.volumes(),
        surfaces: scene.surfaces(),
        masses: (0..scene.len()).map(|i| scene.mass(i)).collect(),
    }
}

/// Builds symmetric cells from ordered accumulators: diagonal cells take
/// `base`, off-diagonal cells the average of both orders.
fn symmetrize(
    kind: DensityKind,
    scene: &Scene,
    mut acc: Accumulator,
    base: f64,
    seed: u64,
    n_events: u64,
) -> Result<EstimatorOutput> {
    let n = scene.len();
    let mut cells = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            let mut c = acc.slots[i * n + j].clone();
            if i == j {
                c.set_scale(base);
            } else {
                c.merge_disjoint_events(&acc.slots[j * n + i])?;
                c.set_scale(base * 0.5);
            }
            cells.push(c);
        }
    }
    for h in acc.slots.iter_mut() {
        h.set_scale(base);
    }
    acc.union.set_scale(base);
    let mut matrix = MatrixDensity::new(kind, n, cells, normalization(scene), seed, base)?;
    matrix.total = Some(acc.union.clone());
    Ok(EstimatorOutput {
        matrix,
        balance: acc.balance,
        ordered: Some(acc.slots),
        union: acc.union,
        n_events,
    })
}

fn sample_pair(scene: &Scene, rng: &mut StreamRng) -> Result<(usize, Vec3, usize, Vec3)> {
    let i = scene.pick_body(rng);
    let p = scene.body(i).sample_point(rng)?;
    let j = scene.pick_body(rng);
    let q = scene.body(j).sample_point(rng)?;
    Ok((i, p, j, q))
}

fn pair_estimator<W>(
    scene: &Scene,
    n_pairs: u64,
    stream: &RandomStream,
    binning: &Binning,
    weight: W,
) -> Result<Accumulator>
where
    W: Fn(usize, &Vec3, usize, &Vec3) -> f64 + Sync + Send,
{
    let n = scene.len();
    run_accumulators(
        stream,
        n_pairs,
        || Accumulator::new(n, n * n, binning),
        |rng, acc| {
            let (i, p, j, q) = sample_pair(scene, rng)?;
            let d = (p - q).norm();
            let w = weight(i, &p, j, &q);
            acc.stage(i * n + j, (i, j), d, w)?;
            acc.stage_union(d, w)
        },
    )
}

/// Distance distribution matrix `η̌`: point pairs uniform over the union,
/// each deposited into the cell of the bodies containing its points.
/// `η̌_ij` integrates to `V_i V_j / V∪²` for each order of the pair.
pub fn estimate_eta(
    scene: &Scene,
    n_pairs: u64,
    stream: &RandomStream,
    binning: &Binning,
) -> Result<EstimatorOutput> {
    let acc = pair_estimator(scene, n_pairs, stream, binning, |_, _, _, _| 1.0)?;
    symmetrize(
        DensityKind::Eta,
        scene,
        acc,
        1.0 / n_pairs as f64,
        stream.seed,
        n_pairs,
    )
}

/// Pair distance density `η_ij = V∪² / (V_i V_j) · η̌_ij`, integrating to one.
pub fn eta_pair_density(m: &MatrixDensity, i: usize, j: usize) -> Result<SignedHistogram> {
    let f = m.norm.v_union.powi(2) / (m.norm.volumes[i] * m.norm.volumes[j]);
    Ok(m.cell(i, j)?.scaled(f))
}

fn gamma_map(v_union: f64) -> impl Fn(f64) -> f64 {
    let c = v_union * v_union / (4.0 * PI);
    move |l| c / (l * l)
}

/// Unnormalized correlation functions `γ_ij(l) = V∪² η̌_ij(l) / (4πl²)` at
/// bin centers. The first bins are flagged unreliable.
pub fn gamma_from_eta(m: &MatrixDensity) -> MatrixDensity {
    let f = gamma_map(m.norm.v_union);
    let mut out = m.map_cells(DensityKind::Gamma, |_, _, l| f(l));
    out.total = m.total.as_ref().map(|t| t.map_bins(&f));
    out.unreliable_bins = UNRELIABLE_GAMMA_BINS;
    out
}

/// Signed radii matrix `ι̌`: ray origins uniform over the union, directions
/// isotropic. Along each ray every body contributes `−1` at entries and `+1`
/// at exits; the exit of the origin's own interval is kept and its entry at
/// distance zero is skipped.
pub fn estimate_radii(
    scene: &Scene,
    n_rays: u64,
    stream: &RandomStream,
    binning: &Binning,
) -> Result<EstimatorOutput> {
    scene.check_disjoint()?;
    let n = scene.len();
    let acc = run_accumulators(
        stream,
        n_rays,
        || Accumulator::new(n, n * n, binning),
        |rng, acc| {
            let i = scene.pick_body(rng);
            let origin = scene.body(i).sample_point(rng)?;
            let dir = random_direction(rng);
            let mut all = IntervalList::empty();
            for j in 0..n {
                let ivs = scene.body(j).ray_intervals(&origin, &dir);
                for iv in ivs.iter() {
                    if iv.enter > 0.0 {
                        acc.stage(i * n + j, (i, j), iv.enter, -1.0)?;
                    }
                    acc.stage(i * n + j, (i, j), iv.exit, 1.0)?;
                }
                all = interval_bool(BoolOp::Union, &all, &ivs);
            }
            for iv in all.iter() {
                if iv.enter > 0.0 {
                    acc.stage_union(iv.enter, -1.0)?;
                }
                acc.stage_union(iv.exit, 1.0)?;
            }
            Ok(())
        },
    )?;
    symmetrize(
        DensityKind::Iota,
        scene,
        acc,
        1.0 / n_rays as f64,
        stream.seed,
        n_rays,
    )
}

/// The four signed segments of the interval pair `[a, b]`, `[c, d]`:
/// `+|d − a|`, `+|c − b|`, `−|c − a|`, `−|d − b|`.
pub fn quadruplet(first: &Interval, second: &Interval) -> [(f64, f64); 4] {
    let (a, b, c, d) = (first.enter, first.exit, second.enter, second.exit);
    [
        ((d - a).abs(), 1.0),
        ((c - b).abs(), 1.0),
        ((c - a).abs(), -1.0),
        ((d - b).abs(), -1.0),
    ]
}

/// Calls `f(length, sign)` for every signed segment of the ordered interval
/// pair `(k, m)`. For `k = m` this is the chord itself, twice with `+`.
pub fn for_each_segment<F: FnMut(f64, f64) -> Result<()>>(
    first: &Interval,
    second: &Interval,
    same: bool,
    mut f: F,
) -> Result<()> {
    if same {
        let l = first.length();
        f(l, 1.0)?;
        f(l, 1.0)
    } else {
        for (len, sign) in quadruplet(first, second) {
            f(len, sign)?;
        }
        Ok(())
    }
}

/// `πR²/2`: measure of isotropic lines through a ball of radius `R` for
/// unoriented lines whose interval pairs are enumerated in both orders.
pub fn line_measure(radius: f64) -> f64 {
    0.5 * PI * radius * radius
}

pub(crate) fn scene_line_intervals(scene: &Scene, point: &Vec3, dir: &Vec3) -> Vec<IntervalList> {
    (0..scene.len())
        .map(|k| scene.body(k).line_intervals(point, dir))
        .collect()
}

/// Signed chord matrix `μ̌`: isotropic lines through the scene's bounding
/// ball. Every ordered pair of intervals on a line contributes its quadruplet,
/// normalized so that `μ̌ = (4/S∪) γ''`.
pub fn estimate_chords(
    scene: &Scene,
    n_lines: u64,
    stream: &RandomStream,
    binning: &Binning,
) -> Result<EstimatorOutput> {
    scene.check_disjoint()?;
    let n = scene.len();
    let (center, radius) = scene.bounding_sphere();
    let acc = run_accumulators(
        stream,
        n_lines,
        || Accumulator::new(n, n * (n + 1) / 2, binning),
        |rng, acc| {
            let (point, dir) = random_line(rng, &center, radius);
            let lists = scene_line_intervals(scene, &point, &dir);
            let mut defect: f64 = 0.0;
            let mut quads = 0;
            for i in 0..n {
                for j in i..n {
                    let slot = packed_index(n, i, j);
                    for (k, a) in lists[i].iter().enumerate() {
                        for (m, b) in lists[j].iter().enumerate() {
                            let same = i == j && k == m;
                            if !same {
                                let q = quadruplet(a, b);
                                defect = defect.max(((q[0].0 + q[1].0) - (q[2].0 + q[3].0)).abs());
                                quads += 1;
                            }
                            for_each_segment(a, b, same, |len, sign| {
                                acc.stage(slot, (i, j), len, sign)
                            })?;
                        }
                    }
                }
            }
            acc.balance.max_quadruplet_defect = acc.balance.max_quadruplet_defect.max(defect);
            acc.balance.quadruplets += quads;
            let all = lists.iter().fold(IntervalList::empty(), |u, l| {
                interval_bool(BoolOp::Union, &u, l)
            });
            for (k, a) in all.iter().enumerate() {
                for (m, b) in all.iter().enumerate() {
                    for_each_segment(a, b, k == m, |len, sign| acc.stage_union(len, sign))?;
                }
            }
            Ok(())
        },
    )?;
    let base = line_measure(radius) * 4.0 / scene.s_union() / n_lines as f64;
    let mut acc = acc;
    let mut cells = std::mem::take(&mut acc.slots);
    for c in cells.iter_mut() {
        c.set_scale(base);
    }
    acc.union.set_scale(base);
    let mut matrix = MatrixDensity::new(
        DensityKind::Mu,
        n,
        cells,
        normalization(scene),
        stream.seed,
        base,
    )?;
    matrix.total = Some(acc.union.clone());
    Ok(EstimatorOutput {
        matrix,
        balance: acc.balance,
        ordered: None,
        union: acc.union,
        n_events: n_lines,
    })
}

/// `λ_ij(x) = π x⁴ S∪ μ̌_ij(x) / (12 V_i V_j)`, which integrates to one for
/// every pair.
pub fn lambda_from_mu(m: &MatrixDensity) -> MatrixDensity {
    let s = m.norm.s_union;
    let v = m.norm.volumes.clone();
    let mut out = m.map_cells(DensityKind::Lambda, |i, j, x| {
        PI * x.powi(4) * s / (12.0 * v[i] * v[j])
    });
    out.unreliable_bins = 0;
    out
}

/// Mass-weighted correlation functions `γ̇_ij`: the point-pair stream of
/// [`estimate_eta`] with each pair weighted by `ρ_i(r) ρ_j(r')`, mapped like
/// [`gamma_from_eta`]. Integrates as `∫ 4πl² γ̇_ij dl = M_i M_j`.
pub fn estimate_eta_weighted(
    scene: &Scene,
    n_pairs: u64,
    stream: &RandomStream,
    binning: &Binning,
) -> Result<EstimatorOutput> {
    for k in 0..scene.len() {
        if scene.mass(k).partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::ZeroMass(scene.id(k).into()));
        }
    }
    let acc = pair_estimator(scene, n_pairs, stream, binning, |i, p, j, q| {
        scene.body(i).density.eval(p) * scene.body(j).density.eval(q)
    })?;
    let mut out = symmetrize(
        DensityKind::Eta,
        scene,
        acc,
        1.0 / n_pairs as f64,
        stream.seed,
        n_pairs,
    )?;
    let f = gamma_map(scene.v_union());
    let mut gamma = out
        .matrix
        .map_cells(DensityKind::GammaWeighted, |_, _, l| f(l));
    gamma.total = out.matrix.total.as_ref().map(|t| t.map_bins(&f));
    gamma.unreliable_bins = UNRELIABLE_GAMMA_BINS;
    out.matrix = gamma;
    Ok(out)
}

/// `πR² ×` the fraction of isotropic lines through the joint bounding ball
/// that hit both bodies. For a convex body with itself this is the mean
/// projected area.
pub fn mutual_projection_area(
    a: &Body,
    b: &Body,
    n_lines: u64,
    stream: &RandomStream,
) -> Result<Estimate> {
    if n_lines == 0 {
        return Err(Error::InvalidArgument(
            "at least one line is required".into(),
        ));
    }
    let (center, radius) = enclosing_ball(a.bounding_sphere(), b.bounding_sphere());
    let hits: u64 = run_chunked(stream, n_lines, |rng, count| {
        (0..count)
            .filter(|_| {
                let (p, d) = random_line(rng, &center, radius);
                !a.line_intervals(&p, &d).is_empty() && !b.line_intervals(&p, &d).is_empty()
            })
            .count() as u64
    })
    .into_iter()
    .sum();
    let f = hits as f64 / n_lines as f64;
    let area = PI * radius * radius;
    Ok(Estimate::new(
        area * f,
        area * (f * (1.0 - f) / n_lines as f64).sqrt(),
    ))
}
