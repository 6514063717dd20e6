//! Sorted parameter intervals of a line or ray inside a body, and the
//! boolean algebra that composes them for CSG nodes.

use serde::{Deserialize, Serialize};

/// Intervals shorter than this are dropped and gaps shorter than this merged.
pub const MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub enter: f64,
    pub exit: f64,
}

impl Interval {
    pub fn new(enter: f64, exit: f64) -> Self {
        Self { enter, exit }
    }

    pub fn length(&self) -> f64 {
        self.exit - self.enter
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.enter + self.exit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoolOp {
    Union,
    Intersect,
    Subtract,
}

impl BoolOp {
    fn keeps(self, in_a: bool, in_b: bool) -> bool {
        match self {
            BoolOp::Union => in_a || in_b,
            BoolOp::Intersect => in_a && in_b,
            BoolOp::Subtract => in_a && !in_b,
        }
    }
}

/// Strictly increasing, non-overlapping intervals.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalList(Vec<Interval>);

impl IntervalList {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Builds a valid list from arbitrary pairs: sorts, drops degenerate
    /// intervals and merges overlapping or touching ones.
    pub fn normalized(mut pairs: Vec<Interval>) -> Self {
        pairs.retain(|iv| iv.length() > MERGE_TOL);
        pairs.sort_by(|a, b| a.enter.total_cmp(&b.enter));
        let mut out: Vec<Interval> = Vec::with_capacity(pairs.len());
        for iv in pairs {
            match out.last_mut() {
                Some(last) if iv.enter <= last.exit + MERGE_TOL => {
                    last.exit = last.exit.max(iv.exit)
                }
                _ => out.push(iv),
            }
        }
        Self(out)
    }

    pub(crate) fn single(enter: f64, exit: f64) -> Self {
        if exit - enter > MERGE_TOL {
            Self(vec![Interval::new(enter, exit)])
        } else {
            Self::empty()
        }
    }

    pub fn as_slice(&self) -> &[Interval] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interval> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.0.iter().map(Interval::length).sum()
    }

    /// Restricts a line list to the ray `t >= 0`.
    pub fn clip_to_ray(&self) -> IntervalList {
        let mut out = Vec::with_capacity(self.0.len());
        for iv in &self.0 {
            if iv.exit <= 0.0 {
                continue;
            }
            let enter = iv.enter.max(0.0);
            if iv.exit - enter > MERGE_TOL {
                out.push(Interval::new(enter, iv.exit));
            }
        }
        Self(out)
    }

    /// Every boundary crossing in increasing order.
    pub fn crossings(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().flat_map(|iv| [iv.enter, iv.exit])
    }

    pub fn is_valid(&self) -> bool {
        self.0.iter().all(|iv| iv.enter < iv.exit)
            && self.0.windows(2).all(|w| w[0].exit < w[1].enter)
    }
}

impl FromIterator<(f64, f64)> for IntervalList {
    fn from_iter<I: IntoIterator<Item = (f64, f64)>>(iter: I) -> Self {
        Self::normalized(iter.into_iter().map(|(a, b)| Interval::new(a, b)).collect())
    }
}

impl<'a> IntoIterator for &'a IntervalList {
    type Item = &'a Interval;
    type IntoIter = std::slice::Iter<'a, Interval>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Boolean combination of two interval lists by a boundary sweep.
pub fn interval_bool(op: BoolOp, a: &IntervalList, b: &IntervalList) -> IntervalList {
    // (t, from_a, entering)
    let mut events: Vec<(f64, bool, bool)> = Vec::with_capacity(2 * (a.len() + b.len()));
    events.extend(
        a.iter()
            .flat_map(|iv| [(iv.enter, true, true), (iv.exit, true, false)]),
    );
    events.extend(
        b.iter()
            .flat_map(|iv| [(iv.enter, false, true), (iv.exit, false, false)]),
    );
    events.sort_by(|x, y| x.0.total_cmp(&y.0));

    let (mut in_a, mut in_b) = (false, false);
    let mut start = None;
    let mut out = Vec::new();
    for (t, from_a, entering) in events {
        if from_a {
            in_a = entering;
        } else {
            in_b = entering;
        }
        match (start, op.keeps(in_a, in_b)) {
            (None, true) => start = Some(t),
            (Some(s), false) => {
                out.push(Interval::new(s, t));
                start = None;
            }
            _ => {}
        }
    }
    IntervalList::normalized(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn list(p: &[(f64, f64)]) -> IntervalList {
        p.iter().copied().collect()
    }

    #[test]
    fn intersect_overlap() {
        assert_eq!(
            interval_bool(
                BoolOp::Intersect,
                &list(&[(0.0, 2.0)]),
                &list(&[(1.0, 3.0)])
            ),
            list(&[(1.0, 2.0)])
        );
    }

    #[test]
    fn subtract_inner() {
        assert_eq!(
            interval_bool(BoolOp::Subtract, &list(&[(0.0, 3.0)]), &list(&[(1.0, 2.0)])),
            list(&[(0.0, 1.0), (2.0, 3.0)])
        );
    }

    #[test]
    fn touching_union_merges() {
        let u = interval_bool(BoolOp::Union, &list(&[(0.0, 1.0)]), &list(&[(1.0, 2.0)]));
        assert_eq!(u.as_slice(), &[Interval::new(0.0, 2.0)]);
    }

    #[test]
    fn touching_intersection_is_empty() {
        assert!(interval_bool(
            BoolOp::Intersect,
            &list(&[(0.0, 1.0)]),
            &list(&[(1.0, 2.0)])
        )
        .is_empty());
    }

    #[test]
    fn clip_to_ray_sets_origin() {
        let l = list(&[(-1.0, 1.0), (2.0, 3.0)]).clip_to_ray();
        assert_eq!(
            l.as_slice(),
            &[Interval::new(0.0, 1.0), Interval::new(2.0, 3.0)]
        );
        assert!(list(&[(-3.0, -1.0)]).clip_to_ray().is_empty());
    }

    #[test]
    fn normalized_is_valid() {
        let l = list(&[(3.0, 4.0), (0.0, 1.0), (0.5, 2.0), (5.0, 5.0)]);
        assert!(l.is_valid());
        assert_eq!(
            l.as_slice(),
            &[Interval::new(0.0, 2.0), Interval::new(3.0, 4.0)]
        );
    }
}
