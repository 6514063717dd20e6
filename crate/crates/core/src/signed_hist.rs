//! Histograms that accept signed weights, and the symmetric matrix containers
//! built from them.
//!
//! A histogram keeps raw per-bin sums of event weights together with a common
//! `scale`; the reported density of bin `b` is `scale * sum[b] / width`.
//! Estimators deposit small integer weights (`±1`) and fold every
//! normalization into `scale`, so raw sums are exact and any permutation of the
//! same deposits gives bit-identical bins. Arbitrary real weights are summed in
//! plain floating point and agree across orderings to rounding only.
//!
//! Uncertainties are event based: each event (one point pair, one ray, one
//! line) may touch several bins, and its contributions to a bin are added up
//! before the square is accumulated. The variance of a bin total is then
//! `sumsq - sum² / N` in raw units.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::sig9;
use crate::stats::Estimate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Spread {
    /// Per-bin sum of squared per-event totals, and the number of events.
    Events { sumsq: Vec<f64>, n_events: u64 },
    /// Per-bin variance of the raw bin total.
    Variance(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedHistogram {
    l_max: f64,
    n_bins: usize,
    scale: f64,
    sum: Vec<f64>,
    spread: Spread,
    overflow: f64,
}

/// Deposits of a single event, aggregated per bin on commit.
#[derive(Debug, Clone, Default)]
pub struct EventBuffer {
    entries: Vec<(usize, f64)>,
    overflow: f64,
}

impl EventBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty() && self.overflow == 0.0
    }

    pub fn clear(&mut self) {
        self.entries.clear();
        self.overflow = 0.0;
    }
}

impl SignedHistogram {
    pub fn new(l_max: f64, n_bins: usize) -> Result<Self> {
        if !(l_max.is_finite() && l_max > 0.0) {
            return Err(Error::InvalidBinning(format!(
                "l_max must be positive, got {l_max}"
            )));
        }
        if n_bins == 0 {
            return Err(Error::InvalidBinning("at least one bin is required".into()));
        }
        Ok(SignedHistogram {
            l_max,
            n_bins,
            scale: 1.0,
            sum: vec![0.0; n_bins],
            spread: Spread::Events {
                sumsq: vec![0.0; n_bins],
                n_events: 0,
            },
            overflow: 0.0,
        })
    }

    /// Empty histogram with the binning of `self`.
    pub fn empty_like(&self) -> Self {
        let mut h = SignedHistogram::new(self.l_max, self.n_bins).expect("valid binning");
        h.scale = self.scale;
        h
    }

    pub fn l_max(&self) -> f64 {
        self.l_max
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn width(&self) -> f64 {
        self.l_max / self.n_bins as f64
    }

    pub fn bin_left(&self, b: usize) -> f64 {
        self.l_max * b as f64 / self.n_bins as f64
    }

    pub fn bin_right(&self, b: usize) -> f64 {
        self.l_max * (b + 1) as f64 / self.n_bins as f64
    }

    pub fn bin_center(&self, b: usize) -> f64 {
        self.l_max * (b as f64 + 0.5) / self.n_bins as f64
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Sets the factor applied to raw sums.
    pub fn set_scale(&mut self, scale: f64) {
        self.scale = scale;
    }

    /// Same histogram with every density multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut h = self.clone();
        h.scale *= factor;
        h
    }

    pub fn raw_sums(&self) -> &[f64] {
        &self.sum
    }

    /// Number of events, if the histogram still tracks them.
    pub fn n_events(&self) -> Option<u64> {
        match &self.spread {
            Spread::Events { n_events, .. } => Some(*n_events),
            Spread::Variance(_) => None,
        }
    }

    /// Records events that deposited nothing here.
    pub fn add_silent_events(&mut self, k: u64) {
        if let Spread::Events { n_events, .. } = &mut self.spread {
            *n_events += k;
        }
    }

    /// Bin receiving `value`, `None` for overflow.
    pub fn bin_of(&self, value: f64) -> Result<Option<usize>> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::NegativeValue(value));
        }
        let b = (value * self.n_bins as f64 / self.l_max) as usize;
        Ok((b < self.n_bins && value < self.l_max).then_some(b))
    }

    /// Deposits `weight` at `value` as one complete event.
    pub fn deposit(&mut self, value: f64, weight: f64) -> Result<()> {
        let bin = self.bin_of(value)?;
        match bin {
            Some(b) => {
                self.sum[b] += weight;
                if let Spread::Events { sumsq, .. } = &mut self.spread {
                    sumsq[b] += weight * weight;
                }
            }
            None => self.overflow += weight,
        }
        self.add_silent_events(1);
        Ok(())
    }

    /// Adds `weight` at `value` to the event being built in `buf`.
    pub fn stage(&self, buf: &mut EventBuffer, value: f64, weight: f64) -> Result<()> {
        match self.bin_of(value)? {
            Some(b) => buf.entries.push((b, weight)),
            None => buf.overflow += weight,
        }
        Ok(())
    }

    /// Folds one staged event into the sums and clears the buffer. The event
    /// count is not touched; see [`SignedHistogram::add_silent_events`].
    pub fn commit(&mut self, buf: &mut EventBuffer) {
        buf.entries.sort_unstable_by_key(|e| e.0);
        let mut k = 0;
        while k < buf.entries.len() {
            let b = buf.entries[k].0;
            let mut total = 0.0;
            while k < buf.entries.len() && buf.entries[k].0 == b {
                total += buf.entries[k].1;
                k += 1;
            }
            self.sum[b] += total;
            if let Spread::Events { sumsq, .. } = &mut self.spread {
                sumsq[b] += total * total;
            }
        }
        self.overflow += buf.overflow;
        buf.clear();
    }

    pub fn same_binning(&self, other: &SignedHistogram) -> bool {
        self.l_max == other.l_max && self.n_bins == other.n_bins
    }

    fn check_binning(&self, other: &SignedHistogram) -> Result<()> {
        if self.same_binning(other) {
            Ok(())
        } else {
            Err(Error::BinningMismatch)
        }
    }

    /// Bin-wise merge of an independent partition of the same experiment
    /// (for example another worker's chunk). Associative and commutative up to
    /// floating rounding, exact for integer weights.
    pub fn merge(&mut self, other: &SignedHistogram) -> Result<()> {
        self.check_binning(other)?;
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        self.overflow += other.overflow;
        match (&mut self.spread, &other.spread) {
            (
                Spread::Events { sumsq, n_events },
                Spread::Events {
                    sumsq: s2,
                    n_events: n2,
                },
            ) => {
                for (a, b) in sumsq.iter_mut().zip(s2) {
                    *a += b;
                }
                *n_events += n2;
            }
            _ => {
                return Err(Error::InvalidArgument(
                    "merge needs event-tracking histograms".into(),
                ))
            }
        }
        Ok(())
    }

    /// Adds another accumulator fed by the same events, where no event
    /// deposited into both. Event counts must agree and stay unchanged.
    pub fn merge_disjoint_events(&mut self, other: &SignedHistogram) -> Result<()> {
        if self.n_events() != other.n_events() {
            return Err(Error::InvalidArgument("event counts differ".into()));
        }
        let n = self.n_events().unwrap_or(0);
        self.merge(other)?;
        if let Spread::Events { n_events, .. } = &mut self.spread {
            *n_events = n;
        }
        Ok(())
    }

    /// Multiplies bin `b` by `factor(center_b)`. Event tracking is preserved.
    pub fn map_bins<F: Fn(f64) -> f64>(&self, factor: F) -> Self {
        let mut h = self.clone();
        for b in 0..h.n_bins {
            let f = factor(h.bin_center(b));
            h.sum[b] *= f;
            match &mut h.spread {
                Spread::Events { sumsq, .. } => sumsq[b] *= f * f,
                Spread::Variance(v) => v[b] *= f * f,
            }
        }
        h
    }

    fn raw_variance(&self, b: usize) -> f64 {
        match &self.spread {
            Spread::Events { sumsq, n_events } => {
                if *n_events == 0 {
                    0.0
                } else {
                    (sumsq[b] - self.sum[b] * self.sum[b] / *n_events as f64).max(0.0)
                }
            }
            Spread::Variance(v) => v[b],
        }
    }

    pub fn density(&self, b: usize) -> f64 {
        self.scale * self.sum[b] / self.width()
    }

    pub fn stderr(&self, b: usize) -> f64 {
        self.scale.abs() * self.raw_variance(b).sqrt() / self.width()
    }

    pub fn densities(&self) -> Vec<f64> {
        (0..self.n_bins).map(|b| self.density(b)).collect()
    }

    pub fn stderrs(&self) -> Vec<f64> {
        (0..self.n_bins).map(|b| self.stderr(b)).collect()
    }

    /// Scaled weight that fell beyond `l_max`.
    pub fn overflow_weight(&self) -> f64 {
        self.scale * self.overflow
    }

    /// `Σ density · width` over the bins, overflow excluded. The error adds
    /// bin variances as if independent; deposits of one event into different
    /// bins are usually of opposite sign, which makes this conservative.
    pub fn integral(&self) -> Estimate {
        self.moment(0)
    }

    /// `Σ center^k · density · width`, with the same error convention as
    /// [`SignedHistogram::integral`].
    pub fn moment(&self, k: i32) -> Estimate {
        let mut value = 0.0;
        let mut var = 0.0;
        for b in 0..self.n_bins {
            let c = if k == 0 {
                1.0
            } else {
                self.bin_center(b).powi(k)
            };
            value += c * self.sum[b];
            var += c * c * self.raw_variance(b);
        }
        Estimate::new(self.scale * value, self.scale.abs() * var.sqrt())
    }

    /// `Σ f(center) · density · width` with independent-bin error.
    pub fn integrate_with<F: Fn(f64) -> f64>(&self, f: F) -> Estimate {
        self.integrate_bins_with(0, f)
    }

    /// Like [`SignedHistogram::integrate_with`], skipping the first `skip` bins.
    pub fn integrate_bins_with<F: Fn(f64) -> f64>(&self, skip: usize, f: F) -> Estimate {
        let mut value = 0.0;
        let mut var = 0.0;
        for b in skip..self.n_bins {
            let c = f(self.bin_center(b));
            if c == 0.0 {
                continue;
            }
            value += c * self.sum[b];
            var += c * c * self.raw_variance(b);
        }
        Estimate::new(self.scale * value, self.scale.abs() * var.sqrt())
    }

    /// Writes the `bin_left,bin_right,density,stderr` table.
    pub fn write_csv<W: Write>(&self, mut w: W, header: &str) -> std::io::Result<()> {
        writeln!(w, "{header}")?;
        writeln!(w, "bin_left,bin_right,density,stderr")?;
        for b in 0..self.n_bins {
            writeln!(
                w,
                "{},{},{},{}",
                sig9(self.bin_left(b)),
                sig9(self.bin_right(b)),
                sig9(self.density(b)),
                sig9(self.stderr(b))
            )?;
        }
        Ok(())
    }
}

/// Bin-wise `Σ c_k · h_k`. Variances are added as if the inputs were
/// independent. Inputs that share a sample stream are correlated, so the
/// reported error can be too large or too small; for `h - h` the value is
/// exactly zero while the error is not.
pub fn linear_combine(coeffs: &[f64], hists: &[&SignedHistogram]) -> Result<SignedHistogram> {
    if coeffs.len() != hists.len() || hists.is_empty() {
        return Err(Error::InvalidArgument(
            "one coefficient per histogram is required".into(),
        ));
    }
    let first = hists[0];
    for h in hists {
        first.check_binning(h)?;
    }
    let n = first.n_bins;
    let mut sum = vec![0.0; n];
    let mut var = vec![0.0; n];
    let mut overflow = 0.0;
    for (c, h) in coeffs.iter().zip(hists) {
        let f = c * h.scale;
        for b in 0..n {
            sum[b] += f * h.sum[b];
            var[b] += f * f * h.raw_variance(b);
        }
        overflow += f * h.overflow;
    }
    Ok(SignedHistogram {
        l_max: first.l_max,
        n_bins: n,
        scale: 1.0,
        sum,
        spread: Spread::Variance(var),
        overflow,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    Eta,
    Iota,
    Mu,
    Gamma,
    Lambda,
    GammaWeighted,
}

impl DensityKind {
    pub fn name(&self) -> &'static str {
        match self {
            DensityKind::Eta => "eta",
            DensityKind::Iota => "iota",
            DensityKind::Mu => "mu",
            DensityKind::Gamma => "gamma",
            DensityKind::Lambda => "lambda",
            DensityKind::GammaWeighted => "gamma_weighted",
        }
    }
}

impl fmt::Display for DensityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Scene aggregates needed to convert between normalizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub v_union: f64,
    pub s_union: f64,
    pub volumes: Vec<f64>,
    pub surfaces: Vec<f64>,
    pub masses: Vec<f64>,
}

/// Symmetric `n × n` matrix of histograms stored as its upper triangle.
///
/// Off-diagonal cells describe one ordered pair, so sums over the full matrix
/// count them twice.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixDensity {
    pub kind: DensityKind,
    pub n: usize,
    cells: Vec<SignedHistogram>,
    pub norm: Normalization,
    pub seed: u64,
    /// Leading bins excluded from comparisons.
    pub unreliable_bins: usize,
    /// Scale of a histogram collecting every event of the underlying stream
    /// with unit multiplicity.
    pub base_scale: f64,
    /// Histogram of the same events without body labels, when available.
    pub total: Option<SignedHistogram>,
}

pub fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    a * (2 * n - a - 1) / 2 + b
}

impl MatrixDensity {
    /// `cells` holds the upper triangle row by row.
    pub fn new(
        kind: DensityKind,
        n: usize,
        cells: Vec<SignedHistogram>,
        norm: Normalization,
        seed: u64,
        base_scale: f64,
    ) -> Result<Self> {
        if cells.len() != n * (n + 1) / 2 || cells.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "expected {} cells, got {}",
                n * (n + 1) / 2,
                cells.len()
            )));
        }
        for c in &cells {
            cells[0].check_binning(c)?;
        }
        Ok(MatrixDensity {
            kind,
            n,
            cells,
            norm,
            seed,
            unreliable_bins: 0,
            base_scale,
            total: None,
        })
    }

    pub fn cell(&self, i: usize, j: usize) -> Result<&SignedHistogram> {
        for k in [i, j] {
            if k >= self.n {
                return Err(Error::IndexOutOfRange {
                    index: k,
                    n: self.n,
                });
            }
        }
        Ok(&self.cells[packed_index(self.n, i, j)])
    }

    pub fn cells(&self) -> &[SignedHistogram] {
        &self.cells
    }

    /// Pairs `(i, j)` with `i ≤ j` in storage order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| (i..self.n).map(move |j| (i, j)))
            .collect()
    }

    pub fn l_max(&self) -> f64 {
        self.cells[0].l_max
    }

    pub fn n_bins(&self) -> usize {
        self.cells[0].n_bins
    }

    /// Cell with every density multiplied by `f(i, j, center)`.
    pub fn map_cells<F: Fn(usize, usize, f64) -> f64>(
        &self,
        kind: DensityKind,
        f: F,
    ) -> MatrixDensity {
        let mut out = self.clone();
        out.kind = kind;
        for (i, j) in self.pairs() {
            let k = packed_index(self.n, i, j);
            out.cells[k] = self.cells[k].map_bins(|c| f(i, j, c));
        }
        out.total = None;
        out
    }

    /// Sum over all `(i, j)` including both orders of every off-diagonal
    /// pair. Raw sums are rescaled to `base_scale` by factors that are small
    /// integers for the built-in estimators, so the result equals a direct
    /// histogram of the unlabelled events exactly. Errors come from that
    /// direct histogram when present.
    pub fn matrix_sum(&self) -> SignedHistogram {
        let first = &self.cells[0];
        let n_bins = first.n_bins;
        let mut sum = vec![0.0; n_bins];
        let mut var = vec![0.0; n_bins];
        let mut overflow = 0.0;
        for (i, j) in self.pairs() {
            let cell = &self.cells[packed_index(self.n, i, j)];
            let mult = if i == j { 1.0 } else { 2.0 };
            let f = mult * cell.scale / self.base_scale;
            for b in 0..n_bins {
                sum[b] += f * cell.sum[b];
                var[b] += f * f * cell.raw_variance(b);
            }
            overflow += f * cell.overflow;
        }
        let spread = match &self.total {
            Some(t) if t.same_binning(first) && t.scale == self.base_scale => t.spread.clone(),
            _ => Spread::Variance(var),
        };
        SignedHistogram {
            l_max: first.l_max,
            n_bins,
            scale: self.base_scale,
            sum,
            spread,
            overflow,
        }
    }

    /// CSV header line for cell `(i, j)`.
    pub fn csv_header(&self, i: usize, j: usize) -> String {
        format!(
            "# kind={} pair={},{} l_max={} bins={} seed={}",
            self.kind,
            i,
            j,
            sig9(self.l_max()),
            self.n_bins(),
            self.seed
        )
    }

    pub fn write_cell_csv<W: Write>(&self, w: W, i: usize, j: usize) -> Result<()> {
        let cell = self.cell(i, j)?;
        cell.write_csv(w, &self.csv_header(i, j))
            .map_err(|e| Error::InvalidArgument(e.to_string()))
    }
}
