//! Seeded random scenes and assets shared by integration suites.

#![allow(dead_code)]

use std::collections::BTreeMap;

use pcx_core::expansion::{place_object, ExpansionConfig, Sizing};
use pcx_core::{LabeledScene, ObjectAsset, Point3, PointCloud, Rgb, SemanticClass, Stream};

pub const CLASSES: [&str; 4] = ["chair", "table", "sofa", "lamp"];

pub fn class(name: &str) -> SemanticClass {
    SemanticClass::new(name).unwrap()
}

fn coord(s: &mut Stream, scale: f64) -> f64 {
    (s.next_f64() * 2.0 - 1.0) * scale
}

pub fn random_points(s: &mut Stream, n: usize, scale: f64) -> Vec<Point3> {
    (0..n)
        .map(|_| Point3::new(coord(s, scale), coord(s, scale), coord(s, scale * 0.5)))
        .collect()
}

pub fn random_colors(s: &mut Stream, n: usize) -> Vec<Rgb> {
    (0..n)
        .map(|_| {
            let v = s.next_u64().to_le_bytes();
            Rgb([v[0], v[1], v[2]])
        })
        .collect()
}

/// A scene with up to `max_instances` labeled objects of at most
/// `max_points` points each, plus a non-empty background chunk.
pub fn random_scene(s: &mut Stream, id: &str, max_instances: u32, max_points: usize, colored: bool) -> LabeledScene {
    let instances = s.below(u64::from(max_instances) + 1) as u32;
    let points_per = 1 + s.below(max_points as u64) as usize;
    let background = 1 + s.below(points_per as u64) as usize;
    let n = background + instances as usize * points_per;
    let scale = 1.0 + 4.0 * s.next_f64();
    let points = random_points(s, n, scale);
    let mut labels = vec![0; background];
    let mut classes = BTreeMap::new();
    for k in 1..=instances {
        labels.extend(std::iter::repeat_n(k, points_per));
        classes.insert(k, class(CLASSES[s.below(CLASSES.len() as u64) as usize]));
    }
    let cloud = if colored {
        let colors = random_colors(s, n);
        PointCloud::with_colors(points, colors).unwrap()
    } else {
        PointCloud::new(points).unwrap()
    };
    LabeledScene::new(id, cloud, labels, classes).unwrap()
}

/// An external asset of `1..=max_points` points far from the origin.
pub fn random_asset(s: &mut Stream, max_points: usize) -> ObjectAsset {
    let n = 1 + s.below(max_points as u64) as usize;
    let offset = Point3::new(coord(s, 20.0), coord(s, 20.0), coord(s, 20.0));
    let pts = random_points(s, n, 0.5).into_iter().map(|p| p + offset).collect();
    let cls = class(CLASSES[s.below(CLASSES.len() as u64) as usize]);
    ObjectAsset::external(PointCloud::new(pts).unwrap(), cls).unwrap()
}

#[derive(Debug, Default)]
pub struct PlacementSummary {
    pub placements: usize,
    /// Largest per-axis |centroid(inserted) - (centroid(scene) + noise)|.
    pub max_centroid_error: f64,
    /// Placements whose recorded noise exceeds eta * half_extent on any axis.
    pub bound_violations: usize,
}

/// Runs `n` independent seeded placements with the given noise fractions and
/// measures the inserted centroid against the scene centroid.
pub fn placement_trials(n: usize, eta: [f64; 3], seed: u64) -> PlacementSummary {
    let config = ExpansionConfig {
        noise_fraction: eta,
        sizing: Sizing::Off,
        ..ExpansionConfig::default()
    };
    let mut s = Stream::new(seed);
    let mut out = PlacementSummary::default();
    for trial in 0..n {
        let scene = random_scene(&mut s, &format!("s{trial}"), 3, 30, trial % 2 == 0);
        let asset = random_asset(&mut s, 50);
        let mut stream = Stream::new(s.next_u64());
        let (placed, rec) = place_object(&scene, &asset, &config, &mut stream).unwrap();

        let inserted = &placed.cloud.points()[scene.cloud.len()..];
        let m = inserted.len() as f64;
        let sum = inserted.iter().fold(Point3::ORIGIN, |a, &p| a + p);
        let got = sum * (1.0 / m);
        let c = scene.cloud.centroid().unwrap();
        let half = scene.cloud.aabb().unwrap().half_extent();
        for axis in 0..3 {
            let err = (got.axis(axis) - (c.axis(axis) + rec.noise.axis(axis))).abs();
            out.max_centroid_error = out.max_centroid_error.max(err);
        }
        let within = (0..3).all(|a| rec.noise.axis(a).abs() <= eta[a] * half.axis(a));
        if !within || !rec.noise_within_bound() {
            out.bound_violations += 1;
        }
        out.placements += 1;
    }
    out
}
