//! Procedural object generators.
//!
//! These stand in for text-to-3D model output: each produces an
//! [`ObjectAsset`] with the same contract an ingested point cloud has. All
//! generators are pure functions of their [`GeneratorSpec`].

mod bank;
mod ifs;
mod noise;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::TAU;

pub use bank::{MixWeights, ObjectBank};
pub use ifs::AffineMap;
pub use noise::{perlin_displace, LatticeNoise, NOISE_SALT};

use crate::geometry::{Point3, PointCloud};
use crate::rng::Stream;
use crate::scene::{ObjectAsset, SemanticClass};
use crate::{Error, Result};

pub const DEFAULT_BURN_IN: u32 = 20;

#[cfg(feature = "serde")]
fn default_burn_in() -> u32 {
    DEFAULT_BURN_IN
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct GeneratorSpec {
    pub n_points: usize,
    pub seed: u64,
    pub shape: Shape,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum Shape {
    /// Uniform samples on a sphere centered at the origin.
    SphereSurface { radius: f64 },
    /// Area-uniform samples on the surface of an origin-centered box with the
    /// given full side lengths.
    BoxSurface { extents: [f64; 3] },
    /// Sphere of `radius` pushed in and out radially by lattice noise.
    PerlinBlob {
        radius: f64,
        amplitude: f64,
        frequency: f64,
        octaves: u32,
    },
    IfsFractal {
        maps: Vec<AffineMap>,
        #[cfg_attr(feature = "serde", serde(default = "default_burn_in"))]
        burn_in: u32,
    },
}

impl Shape {
    pub fn name(&self) -> &'static str {
        match self {
            Shape::SphereSurface { .. } => "sphere_surface",
            Shape::BoxSurface { .. } => "box_surface",
            Shape::PerlinBlob { .. } => "perlin_blob",
            Shape::IfsFractal { .. } => "ifs_fractal",
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("{name} must be positive and finite, got {v}")))
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_points == 0 {
            return Err(Error::InvalidSpec("n_points must be at least 1".into()));
        }
        match &self.shape {
            Shape::SphereSurface { radius } => positive("radius", *radius),
            Shape::BoxSurface { extents } => {
                for (axis, e) in ["x", "y", "z"].iter().zip(extents) {
                    positive(&format!("extent {axis}"), *e)?;
                }
                Ok(())
            }
            Shape::PerlinBlob {
                radius,
                amplitude,
                frequency,
                octaves,
            } => {
                positive("radius", *radius)?;
                positive("frequency", *frequency)?;
                if !(*amplitude >= 0.0 && amplitude < radius) {
                    return Err(Error::InvalidSpec(format!(
                        "amplitude must lie in [0, radius), got {amplitude}"
                    )));
                }
                if !(1..=16).contains(octaves) {
                    return Err(Error::InvalidSpec(format!(
                        "octaves must lie in 1..=16, got {octaves}"
                    )));
                }
                Ok(())
            }
            Shape::IfsFractal { maps, .. } => ifs::validate_maps(maps),
        }
    }

    pub fn points(&self) -> Result<PointCloud> {
        self.validate()?;
        let mut stream = Stream::new(self.seed);
        let n = self.n_points;
        let points = match &self.shape {
            Shape::SphereSurface { radius } => sphere_points(n, *radius, &mut stream),
            Shape::BoxSurface { extents } => box_points(n, *extents, &mut stream),
            Shape::PerlinBlob {
                radius,
                amplitude,
                frequency,
                octaves,
            } => {
                let base = PointCloud::new(sphere_points(n, *radius, &mut stream))?;
                return perlin_displace(&base, *amplitude, *frequency, *octaves, self.seed);
            }
            Shape::IfsFractal { maps, burn_in } => ifs::chaos_game(maps, n, *burn_in, &mut stream),
        };
        PointCloud::new(points)
    }
}

fn sphere_points(n: usize, radius: f64, stream: &mut Stream) -> Vec<Point3> {
    (0..n)
        .map(|_| {
            let z = 2.0 * stream.next_f64() - 1.0;
            let (s, c) = libm::sincos(TAU * stream.next_f64());
            let r = libm::sqrt((1.0 - z * z).max(0.0));
            Point3::new(r * c, r * s, z) * radius
        })
        .collect()
}

fn box_points(n: usize, extents: [f64; 3], stream: &mut Stream) -> Vec<Point3> {
    let [ex, ey, ez] = extents;
    // Face pairs normal to x, y, z.
    let areas = [ey * ez, ex * ez, ex * ey];
    let total: f64 = areas.iter().sum();
    (0..n)
        .map(|_| {
            let pick = stream.next_f64() * total;
            let axis = if pick < areas[0] {
                0
            } else if pick < areas[0] + areas[1] {
                1
            } else {
                2
            };
            let side = if stream.next_f64() < 0.5 { -0.5 } else { 0.5 };
            let mut c = [0.0; 3];
            for (i, ci) in c.iter_mut().enumerate() {
                *ci = if i == axis {
                    side * extents[i]
                } else {
                    (stream.next_f64() - 0.5) * extents[i]
                };
            }
            Point3::from(c)
        })
        .collect()
}

/// Runs `spec` and wraps the result as a generated asset.
pub fn generate(spec: &GeneratorSpec, class: SemanticClass, prompt: &str) -> Result<ObjectAsset> {
    let cloud = spec.points()?;
    ObjectAsset::generated(cloud, class, spec.shape.name(), spec.seed, prompt)
}

/// Uniform scale about the centroid so the longest bounding-box side equals
/// `target`.
pub fn normalize_to_extent(cloud: &PointCloud, target: f64) -> Result<PointCloud> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::InvalidScale(target));
    }
    let longest = cloud.aabb()?.longest_dimension();
    if longest == 0.0 {
        return Err(Error::DegenerateCloud);
    }
    if longest == target {
        return Ok(cloud.clone());
    }
    cloud.scale_about_centroid(target / longest)
}

/// Editable default sizes (longest dimension, meters) for common indoor
/// classes.
pub fn default_target_sizes() -> BTreeMap<SemanticClass, f64> {
    [
        ("chair", 0.9),
        ("table", 1.6),
        ("sofa", 2.0),
        ("bookcase", 1.8),
        ("board", 1.2),
        ("bed", 2.0),
        ("desk", 1.4),
        ("lamp", 0.6),
        ("cabinet", 1.0),
    ]
    .into_iter()
    .map(|(c, s)| (SemanticClass::new(c).expect("static class name"), s))
    .collect()
}
