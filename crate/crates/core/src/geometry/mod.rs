//! Bodies: spheres, axis-aligned boxes and CSG trees over them, with density
//! fields, containment, ray/line intervals, sampling and measures.

mod interval;

pub use interval::{interval_bool, BoolOp, Interval, IntervalList, MERGE_TOL};

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, UnitDisc, UnitSphere};

use crate::error::{Error, Result};
use crate::rng::{run_chunked, RandomStream};
use crate::stats::{Estimate, RunningStats};

pub type Vec3 = nalgebra::Vector3<f64>;

/// CSG operator; same semantics as the interval boolean it maps to.
pub type CsgOp = BoolOp;

/// Discriminants below this fraction of `r²` are grazing misses.
const GRAZING_TOL: f64 = 1e-12;

/// Consecutive rejections tolerated by [`Body::sample_point`].
pub const MAX_REJECTIONS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Sphere {
        center: Vec3,
        radius: f64,
    },
    AxisBox {
        min: Vec3,
        max: Vec3,
    },
    Csg {
        op: CsgOp,
        left: Box<Shape>,
        right: Box<Shape>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn volume(&self) -> f64 {
        let d = self.max - self.min;
        if d.iter().any(|&x| x <= 0.0) {
            0.0
        } else {
            d.x * d.y * d.z
        }
    }

    fn hull(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    fn meet(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.sup(&other.min),
            max: self.max.inf(&other.max),
        }
    }
}

/// Smallest ball containing two balls.
pub fn enclosing_ball(a: (Vec3, f64), b: (Vec3, f64)) -> (Vec3, f64) {
    let d = (b.0 - a.0).norm();
    if d + b.1 <= a.1 {
        return a;
    }
    if d + a.1 <= b.1 {
        return b;
    }
    let radius = 0.5 * (d + a.1 + b.1);
    let center = a.0 + (b.0 - a.0) * ((radius - a.1) / d);
    (center, radius)
}

impl Shape {
    pub fn sphere(center: Vec3, radius: f64) -> Result<Shape> {
        let s = Shape::Sphere { center, radius };
        s.validate()?;
        Ok(s)
    }

    pub fn axis_box(min: Vec3, max: Vec3) -> Result<Shape> {
        let s = Shape::AxisBox { min, max };
        s.validate()?;
        Ok(s)
    }

    pub fn csg(op: CsgOp, left: Shape, right: Shape) -> Shape {
        Shape::Csg {
            op,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Shape::Sphere { center, radius } => {
                if !(radius.is_finite() && *radius > 0.0) || center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidBody(format!(
                        "sphere radius must be positive, got {radius}"
                    )));
                }
            }
            Shape::AxisBox { min, max } => {
                if min.iter().chain(max.iter()).any(|c| !c.is_finite())
                    || (0..3).any(|k| min[k] >= max[k])
                {
                    return Err(Error::InvalidBody(
                        "box requires min < max componentwise".into(),
                    ));
                }
            }
            Shape::Csg { left, right, .. } => {
                left.validate()?;
                right.validate()?;
            }
        }
        Ok(())
    }

    pub fn is_primitive(&self) -> bool {
        !matches!(self, Shape::Csg { .. })
    }

    /// Interior membership; boundary points may go either way.
    pub fn contains(&self, p: &Vec3) -> bool {
        match self {
            Shape::Sphere { center, radius } => (p - center).norm_squared() < radius * radius,
            Shape::AxisBox { min, max } => (0..3).all(|k| p[k] > min[k] && p[k] < max[k]),
            Shape::Csg { op, left, right } => match op {
                BoolOp::Union => left.contains(p) || right.contains(p),
                BoolOp::Intersect => left.contains(p) && right.contains(p),
                BoolOp::Subtract => left.contains(p) && !right.contains(p),
            },
        }
    }

    /// Intervals of the full line `origin + t * dir`, `t` over all reals.
    pub fn line_intervals(&self, origin: &Vec3, dir: &Vec3) -> IntervalList {
        match self {
            Shape::Sphere { center, radius } => {
                let oc = origin - center;
                let b = oc.dot(dir);
                let c = oc.norm_squared() - radius * radius;
                let disc = b * b - c;
                if disc <= GRAZING_TOL * radius * radius {
                    return IntervalList::empty();
                }
                // Stable roots of t² + 2bt + c = 0.
                let q = -(b + b.signum() * disc.sqrt());
                let (t1, t2) = (q, c / q);
                IntervalList::single(t1.min(t2), t1.max(t2))
            }
            Shape::AxisBox { min, max } => {
                let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
                for k in 0..3 {
                    if dir[k] == 0.0 {
                        if origin[k] <= min[k] || origin[k] >= max[k] {
                            return IntervalList::empty();
                        }
                        continue;
                    }
                    let inv = 1.0 / dir[k];
                    let (a, b) = ((min[k] - origin[k]) * inv, (max[k] - origin[k]) * inv);
                    lo = lo.max(a.min(b));
                    hi = hi.min(a.max(b));
                }
                IntervalList::single(lo, hi)
            }
            Shape::Csg { op, left, right } => interval_bool(
                *op,
                &left.line_intervals(origin, dir),
                &right.line_intervals(origin, dir),
            ),
        }
    }

    pub fn ray_intervals(&self, origin: &Vec3, dir: &Vec3) -> IntervalList {
        self.line_intervals(origin, dir).clip_to_ray()
    }

    pub fn bounding_box(&self) -> Aabb {
        match self {
            Shape::Sphere { center, radius } => {
                let r = Vec3::repeat(*radius);
                Aabb {
                    min: center - r,
                    max: center + r,
                }
            }
            Shape::AxisBox { min, max } => Aabb {
                min: *min,
                max: *max,
            },
            Shape::Csg { op, left, right } => {
                let (l, r) = (left.bounding_box(), right.bounding_box());
                match op {
                    BoolOp::Union => l.hull(&r),
                    BoolOp::Intersect => l.meet(&r),
                    BoolOp::Subtract => l,
                }
            }
        }
    }

    /// A ball containing the shape: exact for primitives, composed from the
    /// children's balls for CSG nodes.
    pub fn bounding_sphere(&self) -> (Vec3, f64) {
        match self {
            Shape::Sphere { center, radius } => (*center, *radius),
            Shape::AxisBox { min, max } => (0.5 * (min + max), 0.5 * (max - min).norm()),
            Shape::Csg { op, left, right } => {
                let (l, r) = (left.bounding_sphere(), right.bounding_sphere());
                match op {
                    BoolOp::Union => enclosing_ball(l, r),
                    BoolOp::Intersect => {
                        if l.1 <= r.1 {
                            l
                        } else {
                            r
                        }
                    }
                    BoolOp::Subtract => l,
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityField {
    Constant(f64),
    /// `max(0, a + b·|r − center|)`
    RadialLinear {
        center: Vec3,
        a: f64,
        b: f64,
    },
}

impl Default for DensityField {
    fn default() -> Self {
        DensityField::Constant(1.0)
    }
}

impl DensityField {
    pub fn eval(&self, p: &Vec3) -> f64 {
        match *self {
            DensityField::Constant(v) => v,
            DensityField::RadialLinear { center, a, b } => (a + b * (p - center).norm()).max(0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DensityField::Constant(v) if !(v.is_finite() && v >= 0.0) => Err(Error::InvalidBody(
                format!("constant density must be nonnegative, got {v}"),
            )),
            DensityField::RadialLinear { center, a, b }
                if !(a.is_finite() && b.is_finite() && center.iter().all(|c| c.is_finite())) =>
            {
                Err(Error::InvalidBody(
                    "radial density parameters must be finite".into(),
                ))
            }
            _ => Ok(()),
        }
    }
}

/// `∫₀ᴿ max(0, a + b r) 4πr² dr`.
pub fn radial_ball_mass(a: f64, b: f64, radius: f64) -> f64 {
    let antiderivative = |r: f64| 4.0 * PI * (a * r.powi(3) / 3.0 + b * r.powi(4) / 4.0);
    let (lo, hi) = if b == 0.0 {
        if a <= 0.0 {
            return 0.0;
        }
        (0.0, radius)
    } else {
        let root = (-a / b).clamp(0.0, radius);
        if b > 0.0 {
            (root, radius)
        } else {
            (0.0, root)
        }
    };
    antiderivative(hi) - antiderivative(lo)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureConfig {
    /// Points for volume and mass, and lines for surface, on CSG bodies.
    pub samples: u64,
    pub seed: u64,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            seed: 0x00C0_FFEE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measures {
    pub volume: Estimate,
    pub surface: Estimate,
    pub mass: Estimate,
}

/// Uniform direction on the unit sphere.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    let [x, y, z]: [f64; 3] = UnitSphere.sample(rng);
    Vec3::new(x, y, z)
}

fn orthonormal_pair(u: &Vec3) -> (Vec3, Vec3) {
    let helper = if u.x.abs() < 0.9 {
        Vec3::x()
    } else {
        Vec3::y()
    };
    let e1 = helper.cross(u).normalize();
    let e2 = u.cross(&e1);
    (e1, e2)
}

/// Isotropic uniform line through the ball `(center, radius)`: uniform
/// direction, foot point uniform on the perpendicular disk through the center.
pub fn random_line<R: Rng + ?Sized>(rng: &mut R, center: &Vec3, radius: f64) -> (Vec3, Vec3) {
    let dir = random_direction(rng);
    let [dx, dy]: [f64; 2] = UnitDisc.sample(rng);
    let (e1, e2) = orthonormal_pair(&dir);
    (center + radius * (dx * e1 + dy * e2), dir)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Body {
    pub shape: Shape,
    pub density: DensityField,
}

impl Body {
    pub fn new(shape: Shape) -> Self {
        Self {
            shape,
            density: DensityField::default(),
        }
    }

    pub fn with_density(shape: Shape, density: DensityField) -> Self {
        Self { shape, density }
    }

    pub fn validate(&self) -> Result<()> {
        self.shape.validate()?;
        self.density.validate()
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        self.shape.contains(p)
    }

    pub fn ray_intervals(&self, origin: &Vec3, dir: &Vec3) -> IntervalList {
        self.shape.ray_intervals(origin, dir)
    }

    pub fn line_intervals(&self, origin: &Vec3, dir: &Vec3) -> IntervalList {
        self.shape.line_intervals(origin, dir)
    }

    pub fn bounding_sphere(&self) -> (Vec3, f64) {
        self.shape.bounding_sphere()
    }

    /// Uniform interior point by rejection from the bounding box.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec3> {
        let bb = self.shape.bounding_box();
        let span = bb.max - bb.min;
        for _ in 0..MAX_REJECTIONS {
            let p = bb.min
                + Vec3::new(
                    rng.random::<f64>() * span.x,
                    rng.random::<f64>() * span.y,
                    rng.random::<f64>() * span.z,
                );
            if self.shape.contains(&p) {
                return Ok(p);
            }
        }
        Err(Error::RejectionOverflow(MAX_REJECTIONS))
    }

    pub fn measures(&self) -> Result<Measures> {
        self.measures_with(&MeasureConfig::default())
    }

    /// Volume, surface area and mass.
    ///
    /// Primitives use closed forms. CSG volume and mass come from containment
    /// sampling over the bounding box. CSG surface area uses the Crofton
    /// crossing count: for isotropic lines through a ball of radius `R`,
    /// `S = 2πR²·E[boundary crossings]`, which for convex bodies reduces to
    /// four times the mean projected area.
    pub fn measures_with(&self, cfg: &MeasureConfig) -> Result<Measures> {
        self.validate()?;
        let (volume, surface) = match &self.shape {
            Shape::Sphere { radius, .. } => (
                Estimate::exact(4.0 / 3.0 * PI * radius.powi(3)),
                Estimate::exact(4.0 * PI * radius * radius),
            ),
            Shape::AxisBox { min, max } => {
                let d = max - min;
                (
                    Estimate::exact(d.x * d.y * d.z),
                    Estimate::exact(2.0 * (d.x * d.y + d.y * d.z + d.z * d.x)),
                )
            }
            Shape::Csg { .. } => (self.mc_volume_and_mass(cfg)?.0, self.mc_surface(cfg)),
        };
        if volume.value <= 3.0 * volume.stderr {
            return Err(Error::EmptyBody {
                volume: volume.value,
                stderr: volume.stderr,
            });
        }
        let mass = match (&self.shape, self.density) {
            (_, DensityField::Constant(c)) => volume.scaled(c),
            (Shape::Sphere { center: sc, radius }, DensityField::RadialLinear { center, a, b })
                if (sc - center).norm() <= 1e-12 * radius =>
            {
                Estimate::exact(radial_ball_mass(a, b, *radius))
            }
            _ => self.mc_volume_and_mass(cfg)?.1,
        };
        Ok(Measures {
            volume,
            surface,
            mass,
        })
    }

    fn mc_volume_and_mass(&self, cfg: &MeasureConfig) -> Result<(Estimate, Estimate)> {
        let bb = self.shape.bounding_box();
        let box_volume = bb.volume();
        if box_volume == 0.0 {
            return Ok((Estimate::exact(0.0), Estimate::exact(0.0)));
        }
        let span = bb.max - bb.min;
        let stream = RandomStream::new(cfg.seed).fork(1);
        let chunks = run_chunked(&stream, cfg.samples, |rng, n| {
            let (mut vol, mut mass) = (RunningStats::new(), RunningStats::new());
            for _ in 0..n {
                let p = bb.min
                    + Vec3::new(
                        rng.random::<f64>() * span.x,
                        rng.random::<f64>() * span.y,
                        rng.random::<f64>() * span.z,
                    );
                let inside = self.shape.contains(&p);
                vol.push(if inside { 1.0 } else { 0.0 });
                mass.push(if inside { self.density.eval(&p) } else { 0.0 });
            }
            (vol, mass)
        });
        let (mut vol, mut mass) = (RunningStats::new(), RunningStats::new());
        for (v, m) in &chunks {
            vol.merge(v);
            mass.merge(m);
        }
        Ok((
            vol.estimate().scaled(box_volume),
            mass.estimate().scaled(box_volume),
        ))
    }

    fn mc_surface(&self, cfg: &MeasureConfig) -> Estimate {
        let (center, radius) = self.shape.bounding_sphere();
        let stream = RandomStream::new(cfg.seed).fork(2);
        let chunks = run_chunked(&stream, cfg.samples, |rng, n| {
            let mut crossings = RunningStats::new();
            for _ in 0..n {
                let (foot, dir) = random_line(rng, &center, radius);
                crossings.push(2.0 * self.shape.line_intervals(&foot, &dir).len() as f64);
            }
            crossings
        });
        let mut all = RunningStats::new();
        chunks.iter().for_each(|c| all.merge(c));
        all.estimate().scaled(2.0 * PI * radius * radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_sphere() -> Shape {
        Shape::sphere(Vec3::zeros(), 1.0).unwrap()
    }

    fn unit_box() -> Shape {
        Shape::axis_box(Vec3::zeros(), Vec3::repeat(1.0)).unwrap()
    }

    #[test]
    fn containment_examples() {
        let s = unit_sphere();
        assert!(s.contains(&Vec3::zeros()));
        assert!(!s.contains(&Vec3::new(2.0, 0.0, 0.0)));
        let shell = Shape::csg(
            BoolOp::Subtract,
            unit_sphere(),
            Shape::sphere(Vec3::zeros(), 0.5).unwrap(),
        );
        assert!(!shell.contains(&Vec3::new(0.0, 0.0, 0.25)));
        assert!(shell.contains(&Vec3::new(0.0, 0.0, 0.75)));
    }

    #[test]
    fn ray_through_center() {
        let iv = unit_sphere().ray_intervals(&Vec3::new(-3.0, 0.0, 0.0), &Vec3::x());
        assert_eq!(iv.len(), 1);
        assert_relative_eq!(iv.as_slice()[0].enter, 2.0, epsilon = 1e-12);
        assert_relative_eq!(iv.as_slice()[0].exit, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn ray_from_interior_starts_at_zero() {
        let iv = unit_sphere().ray_intervals(&Vec3::zeros(), &Vec3::x());
        assert_eq!(iv.as_slice(), &[Interval::new(0.0, 1.0)]);
    }

    #[test]
    fn union_of_two_spheres_along_axis() {
        let u = Shape::csg(
            BoolOp::Union,
            unit_sphere(),
            Shape::sphere(Vec3::new(3.0, 0.0, 0.0), 1.0).unwrap(),
        );
        let origin = Vec3::new(-3.0, 0.0, 0.0);
        let iv = u.ray_intervals(&origin, &Vec3::x());
        let got: Vec<(f64, f64)> = iv.iter().map(|i| (i.enter, i.exit)).collect();
        // brute-force midpoint scan along the ray
        let step = 1e-4;
        let mut scanned = Vec::new();
        let mut start: Option<f64> = None;
        for k in 0..100_000 {
            let t = (k as f64 + 0.5) * step;
            let inside = u.contains(&(origin + t * Vec3::x()));
            match (start, inside) {
                (None, true) => start = Some(t - 0.5 * step),
                (Some(s), false) => {
                    scanned.push((s, t - 0.5 * step));
                    start = None;
                }
                _ => {}
            }
        }
        assert_eq!(got.len(), scanned.len());
        for ((a, b), (c, d)) in got.iter().zip(&scanned) {
            assert!((a - c).abs() <= step && (b - d).abs() <= step);
        }
        assert_relative_eq!(got[0].0, 2.0, epsilon = 1e-12);
        assert_relative_eq!(got[1].1, 7.0, epsilon = 1e-12);
    }

    #[test]
    fn line_examples() {
        let s = unit_sphere();
        let iv = s.line_intervals(&Vec3::zeros(), &Vec3::z());
        assert_relative_eq!(iv.as_slice()[0].enter, -1.0, epsilon = 1e-12);
        assert_relative_eq!(iv.as_slice()[0].exit, 1.0, epsilon = 1e-12);
        assert!(s
            .line_intervals(&Vec3::new(0.0, 2.0, 0.0), &Vec3::x())
            .is_empty());
        let b = unit_box().line_intervals(&Vec3::new(-0.25, 0.5, 0.5), &Vec3::x());
        assert_relative_eq!(b.as_slice()[0].enter, 0.25, epsilon = 1e-12);
        assert_relative_eq!(b.as_slice()[0].exit, 1.25, epsilon = 1e-12);
    }

    #[test]
    fn grazing_ray_misses() {
        let iv = unit_sphere().line_intervals(&Vec3::new(-3.0, 1.0, 0.0), &Vec3::x());
        assert!(iv.is_empty());
    }

    #[test]
    fn primitive_measures() {
        let m = Body::new(unit_sphere()).measures().unwrap();
        assert_relative_eq!(m.volume.value, 4.0 * PI / 3.0, max_relative = 1e-14);
        assert_relative_eq!(m.surface.value, 4.0 * PI, max_relative = 1e-14);
        let m = Body::new(unit_box()).measures().unwrap();
        assert_eq!((m.volume.value, m.surface.value), (1.0, 6.0));
    }

    #[test]
    fn lens_volume_by_containment() {
        let lens = Shape::csg(
            BoolOp::Intersect,
            unit_sphere(),
            Shape::sphere(Vec3::new(1.0, 0.0, 0.0), 1.0).unwrap(),
        );
        let m = Body::new(lens).measures().unwrap();
        let expected = 5.0 * PI / 12.0;
        assert!(
            (m.volume.value - expected).abs() < 3.0 * m.volume.stderr,
            "{:?}",
            m.volume
        );
        // lens surface: two spherical caps of height 1/2 on unit spheres
        let cap = 2.0 * PI * 0.5;
        assert!(
            (m.surface.value - 2.0 * cap).abs() < 3.0 * m.surface.stderr,
            "{:?}",
            m.surface
        );
    }

    #[test]
    fn crofton_surface_of_sphere_as_csg() {
        // a union of a sphere with itself forces the sampled path
        let s = Shape::csg(BoolOp::Union, unit_sphere(), unit_sphere());
        let m = Body::new(s).measures().unwrap();
        assert!((m.surface.value / (4.0 * PI) - 1.0).abs() < 0.01);
    }

    #[test]
    fn shell_surface_counts_inner_boundary() {
        let shell = Shape::csg(
            BoolOp::Subtract,
            unit_sphere(),
            Shape::sphere(Vec3::zeros(), 0.5).unwrap(),
        );
        let m = Body::new(shell).measures().unwrap();
        let expected = 4.0 * PI * (1.0 + 0.25);
        assert!((m.surface.value - expected).abs() < 3.0 * m.surface.stderr);
        assert!((m.volume.value - 4.0 * PI / 3.0 * 0.875).abs() < 3.0 * m.volume.stderr);
    }

    #[test]
    fn empty_csg_is_rejected() {
        let s = Shape::csg(
            BoolOp::Subtract,
            unit_sphere(),
            Shape::sphere(Vec3::zeros(), 2.0).unwrap(),
        );
        assert!(matches!(
            Body::new(s).measures(),
            Err(Error::EmptyBody { .. })
        ));
    }

    #[test]
    fn radial_mass_closed_form() {
        let body = Body::with_density(
            unit_sphere(),
            DensityField::RadialLinear {
                center: Vec3::zeros(),
                a: 2.0,
                b: -1.0,
            },
        );
        let m = body.measures().unwrap();
        assert_relative_eq!(
            m.mass.value,
            4.0 * PI / 3.0 * 2.0 - PI,
            max_relative = 1e-12
        );
        // clipped profile: density vanishes beyond r = 0.5
        assert_relative_eq!(
            radial_ball_mass(1.0, -2.0, 1.0),
            radial_ball_mass(1.0, -2.0, 0.5),
            max_relative = 1e-14
        );
    }

    #[test]
    fn offset_radial_mass_falls_back_to_sampling() {
        let body = Body::with_density(
            unit_box(),
            DensityField::RadialLinear {
                center: Vec3::zeros(),
                a: 0.0,
                b: 1.0,
            },
        );
        let m = body.measures().unwrap();
        // ∫ |r| over the unit cube ≈ 0.960591956
        assert!((m.mass.value - 0.960_591_956).abs() < 3.0 * m.mass.stderr + 1e-3);
        assert!(m.mass.stderr > 0.0);
    }

    #[test]
    fn sampling_is_uniform() {
        let body = Body::new(unit_sphere());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 200_000;
        let mut inner = 0usize;
        let mut mean = Vec3::zeros();
        for _ in 0..n {
            let p = body.sample_point(&mut rng).unwrap();
            mean += p;
            if p.norm() < 0.5 {
                inner += 1;
            }
        }
        mean /= n as f64;
        let se = (0.2f64 / n as f64).sqrt(); // Var(x) = 1/5 in the unit ball
        assert!(mean.iter().all(|c| c.abs() < 3.0 * se));
        let f = inner as f64 / n as f64;
        assert!((f - 0.125).abs() < 3.0 * (0.125 * 0.875 / n as f64).sqrt());
    }

    #[test]
    fn box_sampling_mean() {
        let body = Body::new(unit_box());
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| body.sample_point(&mut rng).unwrap())
            .sum::<Vec3>()
            / n as f64;
        let se = (1.0f64 / 12.0 / n as f64).sqrt();
        assert!(mean.iter().all(|c| (c - 0.5).abs() < 3.0 * se));
    }

    #[test]
    fn rejection_overflow_on_degenerate_csg() {
        let thin = Shape::csg(
            BoolOp::Intersect,
            Shape::axis_box(Vec3::zeros(), Vec3::repeat(1.0)).unwrap(),
            Shape::sphere(Vec3::new(5.0, 5.0, 5.0), 1.0).unwrap(),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            Body::new(thin).sample_point(&mut rng),
            Err(Error::RejectionOverflow(_))
        ));
    }

    #[test]
    fn bounding_spheres() {
        assert_eq!(unit_sphere().bounding_sphere(), (Vec3::zeros(), 1.0));
        let (c, r) = unit_box().bounding_sphere();
        assert_relative_eq!(c, Vec3::repeat(0.5));
        assert_relative_eq!(r, 3f64.sqrt() / 2.0);
        let u = Shape::csg(
            BoolOp::Union,
            unit_sphere(),
            Shape::sphere(Vec3::new(3.0, 0.0, 0.0), 1.0).unwrap(),
        );
        let (c, r) = u.bounding_sphere();
        assert_relative_eq!(c, Vec3::new(1.5, 0.0, 0.0));
        assert_relative_eq!(r, 2.5);
    }

    #[test]
    fn invalid_primitives() {
        assert!(Shape::sphere(Vec3::zeros(), 0.0).is_err());
        assert!(Shape::axis_box(Vec3::zeros(), Vec3::new(1.0, 0.0, 1.0)).is_err());
    }
}
