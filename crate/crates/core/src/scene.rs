//! Validated collections of bodies, union aggregates and the decomposition of
//! overlapping pairs into disjoint pieces.

use std::collections::HashSet;

use rand::Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    enclosing_ball, Body, BoolOp, DensityField, MeasureConfig, Measures, Shape, Vec3,
};
use crate::rng::{run_chunked, RandomStream};
use crate::stats::Estimate;

/// Points used by the sampled overlap test for non-primitive pairs.
const OVERLAP_TEST_SAMPLES: u64 = 200_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub bodies: Vec<BodySpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySpec {
    pub id: String,
    pub shape: ShapeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensitySpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Sphere {
        center: [f64; 3],
        radius: f64,
    },
    Box {
        min: [f64; 3],
        max: [f64; 3],
    },
    Csg {
        op: BoolOp,
        left: Box<ShapeSpec>,
        right: Box<ShapeSpec>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    Constant { value: f64 },
    RadialLinear { center: [f64; 3], a: f64, b: f64 },
}

impl ShapeSpec {
    pub fn to_shape(&self) -> Result<Shape> {
        Ok(match self {
            ShapeSpec::Sphere { center, radius } => Shape::sphere(Vec3::from(*center), *radius)?,
            ShapeSpec::Box { min, max } => Shape::axis_box(Vec3::from(*min), Vec3::from(*max))?,
            ShapeSpec::Csg { op, left, right } => {
                Shape::csg(*op, left.to_shape()?, right.to_shape()?)
            }
        })
    }
}

impl DensitySpec {
    pub fn to_field(&self) -> DensityField {
        match self {
            DensitySpec::Constant { value } => DensityField::Constant(*value),
            DensitySpec::RadialLinear { center, a, b } => DensityField::RadialLinear {
                center: Vec3::from(*center),
                a: *a,
                b: *b,
            },
        }
    }
}

impl SceneSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairStatus {
    Disjoint,
    Overlapping,
    Identical,
}

#[derive(Debug, Clone)]
pub struct SceneBody {
    pub id: String,
    pub body: Body,
    pub measures: Measures,
}

#[derive(Debug, Clone)]
pub struct Scene {
    bodies: Vec<SceneBody>,
    v_union: f64,
    s_union: f64,
    pair_status: Vec<PairStatus>,
    bound: (Vec3, f64),
    picker: WeightedIndex<f64>,
    config: MeasureConfig,
}

pub fn build_scene(spec: &SceneSpec) -> Result<Scene> {
    Scene::from_spec(spec, MeasureConfig::default())
}

impl Scene {
    pub fn from_spec(spec: &SceneSpec, config: MeasureConfig) -> Result<Scene> {
        let bodies = spec
            .bodies
            .iter()
            .map(|b| {
                let density = b
                    .density
                    .as_ref()
                    .map(DensitySpec::to_field)
                    .unwrap_or_default();
                Ok((
                    b.id.clone(),
                    Body::with_density(b.shape.to_shape()?, density),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Scene::from_bodies(bodies, config)
    }

    pub fn from_json(text: &str) -> Result<Scene> {
        build_scene(&SceneSpec::from_json(text)?)
    }

    /// Measures every body and classifies every pair.
    pub fn from_bodies(bodies: Vec<(String, Body)>, config: MeasureConfig) -> Result<Scene> {
        let measured = bodies
            .into_iter()
            .map(|(id, body)| {
                let measures = body.measures_with(&config)?;
                Ok(SceneBody { id, body, measures })
            })
            .collect::<Result<Vec<_>>>()?;
        Scene::assemble(measured, config, None)
    }

    fn assemble(
        bodies: Vec<SceneBody>,
        config: MeasureConfig,
        status: Option<Vec<PairStatus>>,
    ) -> Result<Scene> {
        if bodies.is_empty() {
            return Err(Error::EmptyScene);
        }
        let mut seen = HashSet::new();
        for b in &bodies {
            if !seen.insert(b.id.as_str()) {
                return Err(Error::DuplicateId(b.id.clone()));
            }
        }
        let v_union = bodies.iter().map(|b| b.measures.volume.value).sum();
        let s_union = bodies.iter().map(|b| b.measures.surface.value).sum();
        let bound = bodies
            .iter()
            .map(|b| b.body.bounding_sphere())
            .reduce(enclosing_ball)
            .expect("nonempty");
        let picker = WeightedIndex::new(bodies.iter().map(|b| b.measures.volume.value))
            .map_err(|e| Error::InvalidBody(e.to_string()))?;
        let n = bodies.len();
        let pair_status = match status {
            Some(s) => s,
            None => {
                let tol = 1e-9 * 2.0 * bound.1;
                let mut s = vec![PairStatus::Identical; n * n];
                for i in 0..n {
                    for j in i + 1..n {
                        let st = classify(&bodies[i], &bodies[j], tol, &config)?;
                        s[i * n + j] = st;
                        s[j * n + i] = st;
                    }
                }
                s
            }
        };
        Ok(Scene {
            bodies,
            v_union,
            s_union,
            pair_status,
            bound,
            picker,
            config,
        })
    }

    pub fn len(&self) -> usize {
        self.bodies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bodies.is_empty()
    }

    pub fn bodies(&self) -> &[SceneBody] {
        &self.bodies
    }

    pub fn body(&self, i: usize) -> &Body {
        &self.bodies[i].body
    }

    pub fn id(&self, i: usize) -> &str {
        &self.bodies[i].id
    }

    pub fn measures(&self, i: usize) -> &Measures {
        &self.bodies[i].measures
    }

    pub fn volume(&self, i: usize) -> f64 {
        self.bodies[i].measures.volume.value
    }

    pub fn surface(&self, i: usize) -> f64 {
        self.bodies[i].measures.surface.value
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.bodies[i].measures.mass.value
    }

    pub fn volumes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.volume(i)).collect()
    }

    pub fn surfaces(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.surface(i)).collect()
    }

    pub fn v_union(&self) -> f64 {
        self.v_union
    }

    /// Uncertainty of `V∪` from sampled body volumes.
    pub fn v_union_estimate(&self) -> Estimate {
        let var: f64 = self
            .bodies
            .iter()
            .map(|b| b.measures.volume.stderr.powi(2))
            .sum();
        Estimate::new(self.v_union, var.sqrt())
    }

    pub fn s_union(&self) -> f64 {
        self.s_union
    }

    pub fn measure_config(&self) -> &MeasureConfig {
        &self.config
    }

    pub fn pair_status(&self, i: usize, j: usize) -> PairStatus {
        self.pair_status[i * self.len() + j]
    }

    /// Ball enclosing every body's bounding ball.
    pub fn bounding_sphere(&self) -> (Vec3, f64) {
        self.bound
    }

    /// Upper end of every distance distribution: the largest farthest-point
    /// separation allowed by the bounding balls, plus a 5% margin.
    pub fn default_l_max(&self) -> f64 {
        let balls: Vec<_> = self
            .bodies
            .iter()
            .map(|b| b.body.bounding_sphere())
            .collect();
        let mut span: f64 = 0.0;
        for (i, a) in balls.iter().enumerate() {
            for b in &balls[i..] {
                span = span.max((a.0 - b.0).norm() + a.1 + b.1);
            }
        }
        1.05 * span
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i,
                n: self.len(),
            })
        }
    }

    pub fn check_pair_disjoint(&self, i: usize, j: usize) -> Result<()> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i != j && self.pair_status(i, j) != PairStatus::Disjoint {
            return Err(Error::OverlappingScene(
                self.id(i).into(),
                self.id(j).into(),
            ));
        }
        Ok(())
    }

    pub fn check_disjoint(&self) -> Result<()> {
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                self.check_pair_disjoint(i, j)?;
            }
        }
        Ok(())
    }

    pub fn is_disjoint(&self) -> bool {
        self.check_disjoint().is_ok()
    }

    /// Index `k` with probability `V_k / V∪`.
    pub fn pick_body<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if self.len() == 1 {
            0
        } else {
            self.picker.sample(rng)
        }
    }

    /// Scene restricted to `indices`, reusing measures and pair statuses.
    pub fn sub_scene(&self, indices: &[usize]) -> Result<Scene> {
        for &i in indices {
            self.check_index(i)?;
        }
        let n = indices.len();
        let bodies = indices.iter().map(|&i| self.bodies[i].clone()).collect();
        let mut status = vec![PairStatus::Identical; n * n];
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                if a != b {
                    status[a * n + b] = self.pair_status(i, j);
                }
            }
        }
        Scene::assemble(bodies, self.config, Some(status))
    }

    /// One body holding the union of all bodies of a disjoint scene. Volume,
    /// surface and mass are the sums of the parts.
    pub fn merged(&self) -> Result<Scene> {
        self.check_disjoint()?;
        let shape = self
            .bodies
            .iter()
            .map(|b| b.body.shape.clone())
            .reduce(|a, b| Shape::csg(BoolOp::Union, a, b))
            .expect("nonempty");
        let sum = |f: fn(&Measures) -> Estimate| {
            let (v, var) = self
                .bodies
                .iter()
                .map(|b| f(&b.measures))
                .fold((0.0, 0.0), |(v, var), e| {
                    (v + e.value, var + e.stderr * e.stderr)
                });
            Estimate::new(v, var.sqrt())
        };
        let measures = Measures {
            volume: sum(|m| m.volume),
            surface: sum(|m| m.surface),
            mass: sum(|m| m.mass),
        };
        let id = self
            .bodies
            .iter()
            .map(|b| b.id.as_str())
            .collect::<Vec<_>>()
            .join("+");
        let density = if self
            .bodies
            .iter()
            .all(|b| b.body.density == self.bodies[0].body.density)
        {
            self.bodies[0].body.density
        } else {
            DensityField::default()
        };
        Scene::assemble(
            vec![SceneBody {
                id,
                body: Body::with_density(shape, density),
                measures,
            }],
            self.config,
            None,
        )
    }

    /// Replaces every overlapping pair `(V₁, V₂)` with the disjoint pieces
    /// `V₁∖V₂`, `V₂∖V₁` and `V₁∩V₂`, in that order, at the position of `V₁`.
    /// The intersection piece takes the density of `V₁`.
    pub fn decompose_overlaps(&self) -> Result<Scene> {
        let n = self.len();
        let mut partner = vec![None; n];
        for i in 0..n {
            for j in i + 1..n {
                if self.pair_status(i, j) != PairStatus::Disjoint {
                    for (a, b) in [(i, j), (j, i)] {
                        if partner[a].is_some() {
                            return Err(Error::UnsupportedOverlapChain(self.id(a).into()));
                        }
                        partner[a] = Some(b);
                    }
                }
            }
        }
        if partner.iter().all(Option::is_none) {
            return Ok(self.clone());
        }
        let mut out = Vec::new();
        for (i, this) in self.bodies.iter().enumerate() {
            match partner[i] {
                None => out.push((this.id.clone(), this.body.clone())),
                Some(j) if j > i => {
                    let other = &self.bodies[j];
                    let (s1, s2) = (this.body.shape.clone(), other.body.shape.clone());
                    out.push((
                        format!("{}\\{}", this.id, other.id),
                        Body::with_density(
                            Shape::csg(BoolOp::Subtract, s1.clone(), s2.clone()),
                            this.body.density,
                        ),
                    ));
                    out.push((
                        format!("{}\\{}", other.id, this.id),
                        Body::with_density(
                            Shape::csg(BoolOp::Subtract, s2.clone(), s1.clone()),
                            other.body.density,
                        ),
                    ));
                    out.push((
                        format!("{}&{}", this.id, other.id),
                        Body::with_density(
                            Shape::csg(BoolOp::Intersect, s1, s2),
                            this.body.density,
                        ),
                    ));
                }
                Some(_) => {}
            }
        }
        Scene::from_bodies(out, self.config)
    }
}

fn classify(a: &SceneBody, b: &SceneBody, tol: f64, config: &MeasureConfig) -> Result<PairStatus> {
    let shared = || Error::SharedBoundary(a.id.clone(), b.id.clone());
    if a.body.shape == b.body.shape {
        return Ok(PairStatus::Identical);
    }
    match (&a.body.shape, &b.body.shape) {
        (
            Shape::Sphere {
                center: c1,
                radius: r1,
            },
            Shape::Sphere {
                center: c2,
                radius: r2,
            },
        ) => {
            let d = (c1 - c2).norm();
            if (d - (r1 + r2)).abs() <= tol || (d - (r1 - r2).abs()).abs() <= tol {
                Err(shared())
            } else if d > r1 + r2 {
                Ok(PairStatus::Disjoint)
            } else {
                Ok(PairStatus::Overlapping)
            }
        }
        (Shape::AxisBox { min: a0, max: a1 }, Shape::AxisBox { min: b0, max: b1 }) => {
            let gap = (0..3)
                .map(|k| (a0[k] - b1[k]).max(b0[k] - a1[k]))
                .fold(f64::NEG_INFINITY, f64::max);
            if gap > tol {
                Ok(PairStatus::Disjoint)
            } else if gap >= -tol {
                Err(shared())
            } else {
                Ok(PairStatus::Overlapping)
            }
        }
        (Shape::Sphere { center, radius }, Shape::AxisBox { min, max })
        | (Shape::AxisBox { min, max }, Shape::Sphere { center, radius }) => {
            let nearest = center.sup(min).inf(max);
            let d = (center - nearest).norm();
            if (d - radius).abs() <= tol {
                Err(shared())
            } else if d > *radius {
                Ok(PairStatus::Disjoint)
            } else {
                Ok(PairStatus::Overlapping)
            }
        }
        _ => sampled_overlap(a, b, config),
    }
}

/// Overlapping iff the sampled intersection volume exceeds three sigma.
fn sampled_overlap(a: &SceneBody, b: &SceneBody, config: &MeasureConfig) -> Result<PairStatus> {
    let (ca, ra) = a.body.bounding_sphere();
    let (cb, rb) = b.body.bounding_sphere();
    if (ca - cb).norm() > ra + rb {
        return Ok(PairStatus::Disjoint);
    }
    let (ba, bb) = (a.body.shape.bounding_box(), b.body.shape.bounding_box());
    let (lo, hi) = (ba.min.sup(&bb.min), ba.max.inf(&bb.max));
    let span = hi - lo;
    if span.iter().any(|&s| s <= 0.0) {
        return Ok(PairStatus::Disjoint);
    }
    let stream = RandomStream::new(config.seed).fork(3);
    let hits: u64 = run_chunked(&stream, OVERLAP_TEST_SAMPLES, |rng, n| {
        (0..n)
            .filter(|_| {
                let p = lo
                    + Vec3::new(
                        rng.random::<f64>() * span.x,
                        rng.random::<f64>() * span.y,
                        rng.random::<f64>() * span.z,
                    );
                a.body.contains(&p) && b.body.contains(&p)
            })
            .count() as u64
    })
    .into_iter()
    .sum();
    let p = hits as f64 / OVERLAP_TEST_SAMPLES as f64;
    let sigma = (p * (1.0 - p) / OVERLAP_TEST_SAMPLES as f64).sqrt();
    Ok(if hits > 0 && p > 3.0 * sigma {
        PairStatus::Overlapping
    } else {
        PairStatus::Disjoint
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn two_spheres(d: f64) -> String {
        format!(
            r#"{{"bodies":[{{"id":"a","shape":{{"type":"sphere","center":[0,0,0],"radius":1}}}},
                {{"id":"b","shape":{{"type":"sphere","center":[{d},0,0],"radius":1}},"density":{{"type":"constant","value":1.0}}}}]}}"#
        )
    }

    #[test]
    fn disjoint_pair() {
        let s = Scene::from_json(&two_spheres(3.0)).unwrap();
        assert_eq!(s.pair_status(0, 1), PairStatus::Disjoint);
        assert_relative_eq!(s.v_union(), 8.0 * PI / 3.0, max_relative = 1e-14);
        assert_relative_eq!(s.s_union(), 8.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(s.default_l_max(), 5.25, max_relative = 1e-14);
    }

    #[test]
    fn overlapping_pair() {
        let s = Scene::from_json(&two_spheres(1.0)).unwrap();
        assert_eq!(s.pair_status(0, 1), PairStatus::Overlapping);
        assert!(matches!(
            s.check_disjoint(),
            Err(Error::OverlappingScene(..))
        ));
    }

    #[test]
    fn tangent_pair_rejected() {
        assert!(matches!(
            Scene::from_json(&two_spheres(2.0)),
            Err(Error::SharedBoundary(..))
        ));
    }

    #[test]
    fn touching_boxes_rejected() {
        let json = r#"{"bodies":[{"id":"a","shape":{"type":"box","min":[0,0,0],"max":[1,1,1]}},
                       {"id":"b","shape":{"type":"box","min":[1,0,0],"max":[2,1,1]}}]}"#;
        assert!(matches!(
            Scene::from_json(json),
            Err(Error::SharedBoundary(..))
        ));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            Scene::from_json("{\"bodies\":["),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            Scene::from_json(r#"{"bodies":[]}"#),
            Err(Error::EmptyScene)
        ));
        let dup = r#"{"bodies":[{"id":"a","shape":{"type":"sphere","center":[0,0,0],"radius":1}},
                      {"id":"a","shape":{"type":"sphere","center":[5,0,0],"radius":1}}]}"#;
        assert!(matches!(Scene::from_json(dup), Err(Error::DuplicateId(_))));
        let bad = r#"{"bodies":[{"id":"a","shape":{"type":"cone","center":[0,0,0]}}]}"#;
        assert!(matches!(Scene::from_json(bad), Err(Error::Parse(_))));
    }

    #[test]
    fn csg_spec_parses() {
        let json = r#"{"bodies":[{"id":"lens","shape":{"type":"csg","op":"intersect",
            "left":{"type":"sphere","center":[0,0,0],"radius":1},
            "right":{"type":"sphere","center":[1,0,0],"radius":1}},
            "density":{"type":"radial_linear","center":[0,0,0],"a":1.0,"b":0.5}}]}"#;
        let s = Scene::from_json(json).unwrap();
        let v = s.measures(0).volume;
        assert!((v.value - 5.0 * PI / 12.0).abs() < 3.0 * v.stderr);
    }

    #[test]
    fn decomposition_of_overlapping_spheres() {
        let s = Scene::from_json(&two_spheres(1.0)).unwrap();
        let d = s.decompose_overlaps().unwrap();
        assert_eq!(d.len(), 3);
        assert!(d.is_disjoint());
        let lens = d.measures(2).volume;
        assert!((lens.value - 5.0 * PI / 12.0).abs() < 3.0 * lens.stderr);
        let a = d.measures(0).volume;
        let sum = a.value + lens.value;
        let sigma = a.stderr.hypot(lens.stderr);
        assert!((sum - 4.0 * PI / 3.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn decomposition_of_identical_pair_is_empty() {
        let json = r#"{"bodies":[{"id":"a","shape":{"type":"sphere","center":[0,0,0],"radius":1}},
                       {"id":"b","shape":{"type":"sphere","center":[0,0,0],"radius":1}}]}"#;
        let s = Scene::from_json(json).unwrap();
        assert_eq!(s.pair_status(0, 1), PairStatus::Identical);
        assert!(matches!(
            s.decompose_overlaps(),
            Err(Error::EmptyBody { .. })
        ));
    }

    #[test]
    fn disjoint_decomposition_is_identity() {
        let s = Scene::from_json(&two_spheres(3.0)).unwrap();
        let d = s.decompose_overlaps().unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.id(1), "b");
    }

    #[test]
    fn overlap_chain_rejected() {
        let json = r#"{"bodies":[{"id":"a","shape":{"type":"sphere","center":[0,0,0],"radius":1}},
                       {"id":"b","shape":{"type":"sphere","center":[1,0,0],"radius":1}},
                       {"id":"c","shape":{"type":"sphere","center":[2,0,0],"radius":1.2}}]}"#;
        let s = Scene::from_json(json).unwrap();
        assert!(matches!(
            s.decompose_overlaps(),
            Err(Error::UnsupportedOverlapChain(_))
        ));
    }

    #[test]
    fn pick_body_frequencies() {
        let json = r#"{"bodies":[{"id":"a","shape":{"type":"box","min":[0,0,0],"max":[1,1,1]}},
                       {"id":"b","shape":{"type":"box","min":[2,0,0],"max":[5,1,1]}}]}"#;
        let s = Scene::from_json(json).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 1_000_000;
        let hits = (0..n).filter(|_| s.pick_body(&mut rng) == 0).count() as f64 / n as f64;
        assert!((hits - 0.25).abs() < 3.0 * (0.25 * 0.75 / n as f64).sqrt());

        let eq = Scene::from_json(&two_spheres(3.0)).unwrap();
        let hits = (0..n).filter(|_| eq.pick_body(&mut rng) == 0).count() as f64 / n as f64;
        assert!((hits - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt());

        let single = eq.sub_scene(&[1]).unwrap();
        assert!((0..100).all(|_| single.pick_body(&mut rng) == 0));
    }

    #[test]
    fn pair_probabilities_match_volume_products() {
        let json = r#"{"bodies":[{"id":"a","shape":{"type":"box","min":[0,0,0],"max":[1,1,1]}},
                       {"id":"b","shape":{"type":"box","min":[2,0,0],"max":[4,1,1]}}]}"#;
        let s = Scene::from_json(json).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 600_000;
        let mut counts = [[0u64; 2]; 2];
        for _ in 0..n {
            counts[s.pick_body(&mut rng)][s.pick_body(&mut rng)] += 1;
        }
        let v = [1.0, 2.0];
        for i in 0..2 {
            for j in 0..2 {
                let p = v[i] * v[j] / 9.0;
                let f = counts[i][j] as f64 / n as f64;
                assert!((f - p).abs() < 3.0 * (p * (1.0 - p) / n as f64).sqrt());
            }
        }
    }

    #[test]
    fn merged_scene_sums_measures() {
        let s = Scene::from_json(&two_spheres(3.0)).unwrap();
        let m = s.merged().unwrap();
        assert_eq!(m.len(), 1);
        assert_relative_eq!(m.volume(0), s.v_union());
        assert_relative_eq!(m.surface(0), s.s_union());
        assert!(m.body(0).contains(&Vec3::new(3.0, 0.2, 0.0)));
    }
}
