//! 3D value types and the rigid/scale transforms used by every stage.
//!
//! Coordinates are `f64` throughout, even when the source file stored `f32`.
//! Centroids use plain summation; clouds above 10^8 points are outside the
//! supported range.

use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use crate::{Error, Result};

/// A point (or displacement) in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn axis(&self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("axis index {axis} out of range"),
        }
    }

    pub fn dot(self, other: Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    pub fn distance(self, other: Point3) -> f64 {
        (self - other).norm()
    }

    fn zip(self, other: Point3, f: impl Fn(f64, f64) -> f64) -> Point3 {
        Point3::new(f(self.x, other.x), f(self.y, other.y), f(self.z, other.z))
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(a: [f64; 3]) -> Self {
        Point3::new(a[0], a[1], a[2])
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, rhs: Point3) -> Point3 {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, rhs: Point3) -> Point3 {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, rhs: f64) -> Point3 {
        Point3::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

/// 8-bit RGB color.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Rgb(pub [u8; 3]);

impl Rgb {
    pub const FILL: Rgb = Rgb([128, 128, 128]);
}

/// Axis-aligned bounding box with `min <= max` on every axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn extent(&self) -> Point3 {
        self.max - self.min
    }

    pub fn half_extent(&self) -> Point3 {
        self.extent() * 0.5
    }

    pub fn longest_dimension(&self) -> f64 {
        let e = self.extent();
        e.x.max(e.y).max(e.z)
    }

    pub fn contains(&self, p: Point3) -> bool {
        (0..3).all(|c| self.min.axis(c) <= p.axis(c) && p.axis(c) <= self.max.axis(c))
    }
}

/// Ordered points with an optional per-point color channel.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    points: Vec<Point3>,
    colors: Option<Vec<Rgb>>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>) -> Result<Self> {
        check_finite(&points)?;
        Ok(Self {
            points,
            colors: None,
        })
    }

    pub fn with_colors(points: Vec<Point3>, colors: Vec<Rgb>) -> Result<Self> {
        check_finite(&points)?;
        if colors.len() != points.len() {
            return Err(Error::ColorLengthMismatch {
                points: points.len(),
                colors: colors.len(),
            });
        }
        Ok(Self {
            points,
            colors: Some(colors),
        })
    }

    pub fn from_parts(points: Vec<Point3>, colors: Option<Vec<Rgb>>) -> Result<Self> {
        match colors {
            Some(c) => Self::with_colors(points, c),
            None => Self::new(points),
        }
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn colors(&self) -> Option<&[Rgb]> {
        self.colors.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_parts(self) -> (Vec<Point3>, Option<Vec<Rgb>>) {
        (self.points, self.colors)
    }

    /// Unweighted mean of all points (the cloud's center of gravity).
    pub fn centroid(&self) -> Result<Point3> {
        if self.points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let sum = self
            .points
            .iter()
            .fold(Point3::ORIGIN, |acc, &p| acc + p);
        let n = self.points.len() as f64;
        Ok(Point3::new(sum.x / n, sum.y / n, sum.z / n))
    }

    pub fn aabb(&self) -> Result<Aabb> {
        let (first, rest) = self.points.split_first().ok_or(Error::EmptyCloud)?;
        let mut min = *first;
        let mut max = *first;
        for p in rest {
            min = min.zip(*p, f64::min);
            max = max.zip(*p, f64::max);
        }
        Ok(Aabb { min, max })
    }

    /// Applies `f` to every point, keeping order and colors.
    fn map_points(&self, f: impl Fn(Point3) -> Point3) -> PointCloud {
        PointCloud {
            points: self.points.iter().map(|&p| f(p)).collect(),
            colors: self.colors.clone(),
        }
    }

    pub fn translate(&self, offset: Point3) -> PointCloud {
        self.map_points(|p| p + offset)
    }

    pub fn scale_about_centroid(&self, factor: f64) -> Result<PointCloud> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidScale(factor));
        }
        let c = self.centroid()?;
        Ok(self.map_points(|p| c + (p - c) * factor))
    }

    /// Rotation about the vertical axis through the centroid. `z` is copied
    /// through untouched.
    pub fn rotate_yaw_about_centroid(&self, angle: f64) -> Result<PointCloud> {
        let c = self.centroid()?;
        let (sin, cos) = libm::sincos(angle);
        Ok(self.map_points(|p| {
            let dx = p.x - c.x;
            let dy = p.y - c.y;
            Point3::new(c.x + cos * dx - sin * dy, c.y + sin * dx + cos * dy, p.z)
        }))
    }

    /// Appends `other`. When exactly one side carries colors the other side is
    /// filled with `fill`.
    pub fn concat(&self, other: &PointCloud, fill: Rgb) -> PointCloud {
        let mut points = Vec::with_capacity(self.len() + other.len());
        points.extend_from_slice(&self.points);
        points.extend_from_slice(&other.points);
        let colors = match (&self.colors, &other.colors) {
            (None, None) => None,
            (a, b) => {
                let mut c = Vec::with_capacity(points.len());
                match a {
                    Some(a) => c.extend_from_slice(a),
                    None => c.resize(self.len(), fill),
                }
                match b {
                    Some(b) => c.extend_from_slice(b),
                    None => c.resize(points.len(), fill),
                }
                Some(c)
            }
        };
        PointCloud { points, colors }
    }
}

fn check_finite(points: &[Point3]) -> Result<()> {
    match points.iter().position(|p| !p.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}
