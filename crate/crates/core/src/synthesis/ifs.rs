//! Iterated function systems of affine contractions.

use alloc::vec::Vec;

use crate::geometry::Point3;
use crate::rng::Stream;
use crate::{Error, Result};

/// `x -> linear * x + translation`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct AffineMap {
    /// Row-major 3x3 matrix.
    pub linear: [[f64; 3]; 3],
    pub translation: [f64; 3],
}

impl AffineMap {
    /// Uniform contraction by `ratio` toward `fixed`.
    pub fn toward(fixed: Point3, ratio: f64) -> Self {
        let f = fixed.to_array();
        let mut linear = [[0.0; 3]; 3];
        let mut translation = [0.0; 3];
        for i in 0..3 {
            linear[i][i] = ratio;
            translation[i] = (1.0 - ratio) * f[i];
        }
        Self {
            linear,
            translation,
        }
    }

    pub fn apply(&self, p: Point3) -> Point3 {
        let v = p.to_array();
        let row = |r: usize| {
            let m = &self.linear[r];
            m[0] * v[0] + m[1] * v[1] + m[2] * v[2] + self.translation[r]
        };
        Point3::new(row(0), row(1), row(2))
    }

    /// Lipschitz constant of the map: the spectral norm of `linear`.
    pub fn contraction_factor(&self) -> f64 {
        let a = &self.linear;
        // Gram matrix A^T A.
        let mut g = [[0.0; 3]; 3];
        for (i, gi) in g.iter_mut().enumerate() {
            for (j, gij) in gi.iter_mut().enumerate() {
                *gij = (0..3).map(|k| a[k][i] * a[k][j]).sum();
            }
        }
        libm::sqrt(largest_symmetric_eigenvalue(&g).max(0.0))
    }

    /// The unique point with `apply(p) == p`, when `I - linear` is invertible.
    pub fn fixed_point(&self) -> Option<Point3> {
        let a = &self.linear;
        let m = [
            [1.0 - a[0][0], -a[0][1], -a[0][2]],
            [-a[1][0], 1.0 - a[1][1], -a[1][2]],
            [-a[2][0], -a[2][1], 1.0 - a[2][2]],
        ];
        solve3(&m, self.translation).map(Point3::from)
    }

    fn is_finite(&self) -> bool {
        self.linear.iter().flatten().all(|v| v.is_finite())
            && self.translation.iter().all(|v| v.is_finite())
    }
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Cramer's rule.
fn solve3(m: &[[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let d = det3(m);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let mut x = [0.0; 3];
    for (col, xc) in x.iter_mut().enumerate() {
        let mut mc = *m;
        for row in 0..3 {
            mc[row][col] = b[row];
        }
        *xc = det3(&mc) / d;
    }
    Some(x)
}

/// Closed-form largest eigenvalue of a symmetric 3x3 matrix (trigonometric
/// solution of the characteristic cubic).
fn largest_symmetric_eigenvalue(a: &[[f64; 3]; 3]) -> f64 {
    let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    if p1 == 0.0 {
        return a[0][0].max(a[1][1]).max(a[2][2]);
    }
    let sq = |v: f64| v * v;
    let p2 = sq(a[0][0] - q) + sq(a[1][1] - q) + sq(a[2][2] - q) + 2.0 * p1;
    let p = libm::sqrt(p2 / 6.0);
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { q } else { 0.0 };
            b[i][j] = (a[i][j] - delta) / p;
        }
    }
    let r = (det3(&b) / 2.0).clamp(-1.0, 1.0);
    let phi = libm::acos(r) / 3.0;
    q + 2.0 * p * libm::cos(phi)
}

pub(crate) fn validate_maps(maps: &[AffineMap]) -> Result<()> {
    if maps.is_empty() {
        return Err(Error::InvalidSpec("ifs_fractal needs at least one map".into()));
    }
    for (i, m) in maps.iter().enumerate() {
        if !m.is_finite() {
            return Err(Error::InvalidSpec(alloc::format!("ifs map {i} is not finite")));
        }
        let c = m.contraction_factor();
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::InvalidSpec(alloc::format!(
                "ifs map {i} has contraction factor {c}, expected (0, 1)"
            )));
        }
    }
    Ok(())
}

/// Chaos-game sampling. Iteration starts from the fixed point of the first
/// map, which already lies on the attractor; `burn_in` further steps are
/// discarded before emitting `n` points.
pub(crate) fn chaos_game(maps: &[AffineMap], n: usize, burn_in: u32, stream: &mut Stream) -> Vec<Point3> {
    let mut p = maps[0].fixed_point().unwrap_or(Point3::ORIGIN);
    let k = maps.len() as u64;
    for _ in 0..burn_in {
        p = maps[stream.below(k) as usize].apply(p);
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        p = maps[stream.below(k) as usize].apply(p);
        out.push(p);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contraction_of_scaled_identity() {
        let m = AffineMap::toward(Point3::new(1.0, 2.0, 3.0), 0.5);
        assert!((m.contraction_factor() - 0.5).abs() < 1e-12);
        let f = m.fixed_point().unwrap();
        assert!(f.distance(Point3::new(1.0, 2.0, 3.0)) < 1e-12);
    }

    #[test]
    fn contraction_of_anisotropic_map() {
        // diag(0.3, 0.9, 0.1) rotated about z keeps singular values.
        let (s, c) = libm::sincos(0.4);
        let m = AffineMap {
            linear: [[0.3 * c, -0.9 * s, 0.0], [0.3 * s, 0.9 * c, 0.0], [0.0, 0.0, 0.1]],
            translation: [0.0; 3],
        };
        assert!((m.contraction_factor() - 0.9).abs() < 1e-12);
        // Shear: singular values of [[1, 1], [0, 1]] scaled by 0.4.
        let m = AffineMap {
            linear: [[0.4, 0.4, 0.0], [0.0, 0.4, 0.0], [0.0, 0.0, 0.4]],
            translation: [0.0; 3],
        };
        let expected = 0.4 * (1.0 + libm::sqrt(5.0)) / 2.0;
        assert!((m.contraction_factor() - expected).abs() < 1e-12);
    }

    #[test]
    fn rejects_expansive_maps() {
        let m = AffineMap::toward(Point3::ORIGIN, 1.5);
        assert!(validate_maps(&[m]).is_err());
        assert!(validate_maps(&[]).is_err());
        assert!(validate_maps(&[AffineMap::toward(Point3::ORIGIN, 0.0)]).is_err());
    }
}
