//! Seeded gradient lattice noise.
//!
//! This is improved Perlin noise (quintic fade, 16-entry gradient switch)
//! with the reference permutation replaced by a seeded one: start from the
//! identity on `0..256` and apply a Fisher-Yates shuffle driven by
//! `Stream::new(mix64(seed ^ NOISE_SALT))`, walking `i` from 255 down to 1
//! and swapping `perm[i]` with `perm[below(i + 1)]`. The table is then
//! doubled to 512 entries. Octaves use lacunarity 2 and persistence 0.5,
//! are normalized by the summed amplitudes and clamped to `[-1, 1]`.

use crate::geometry::{Point3, PointCloud};
use crate::rng::{mix64, Stream};
use crate::Result;

pub const NOISE_SALT: u64 = 0x4E4F_4953_455F_5442; // "NOISE_TB"

#[derive(Clone)]
pub struct LatticeNoise {
    perm: [u8; 512],
}

impl core::fmt::Debug for LatticeNoise {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("LatticeNoise").finish_non_exhaustive()
    }
}

impl LatticeNoise {
    pub fn new(seed: u64) -> Self {
        let mut base = [0u8; 256];
        for (i, b) in base.iter_mut().enumerate() {
            *b = i as u8;
        }
        Stream::new(mix64(seed ^ NOISE_SALT)).shuffle(&mut base);
        let mut perm = [0u8; 512];
        for (i, p) in perm.iter_mut().enumerate() {
            *p = base[i & 255];
        }
        Self { perm }
    }

    pub fn permutation(&self) -> &[u8; 512] {
        &self.perm
    }

    /// Single-octave noise.
    pub fn sample(&self, p: Point3) -> f64 {
        let (xf, yf, zf) = (libm::floor(p.x), libm::floor(p.y), libm::floor(p.z));
        let xi = (xf as i64 & 255) as usize;
        let yi = (yf as i64 & 255) as usize;
        let zi = (zf as i64 & 255) as usize;
        let (x, y, z) = (p.x - xf, p.y - yf, p.z - zf);
        let (u, v, w) = (fade(x), fade(y), fade(z));

        let perm = &self.perm;
        let a = perm[xi] as usize + yi;
        let aa = perm[a] as usize + zi;
        let ab = perm[a + 1] as usize + zi;
        let b = perm[xi + 1] as usize + yi;
        let ba = perm[b] as usize + zi;
        let bb = perm[b + 1] as usize + zi;

        lerp(
            w,
            lerp(
                v,
                lerp(u, grad(perm[aa], x, y, z), grad(perm[ba], x - 1.0, y, z)),
                lerp(u, grad(perm[ab], x, y - 1.0, z), grad(perm[bb], x - 1.0, y - 1.0, z)),
            ),
            lerp(
                v,
                lerp(
                    u,
                    grad(perm[aa + 1], x, y, z - 1.0),
                    grad(perm[ba + 1], x - 1.0, y, z - 1.0),
                ),
                lerp(
                    u,
                    grad(perm[ab + 1], x, y - 1.0, z - 1.0),
                    grad(perm[bb + 1], x - 1.0, y - 1.0, z - 1.0),
                ),
            ),
        )
    }

    /// Octave sum in `[-1, 1]`.
    pub fn fractal(&self, p: Point3, octaves: u32) -> f64 {
        let mut total = 0.0;
        let mut norm = 0.0;
        let mut amplitude = 1.0;
        let mut scale = 1.0;
        for _ in 0..octaves.max(1) {
            total += amplitude * self.sample(p * scale);
            norm += amplitude;
            amplitude *= 0.5;
            scale *= 2.0;
        }
        (total / norm).clamp(-1.0, 1.0)
    }
}

fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

fn lerp(t: f64, a: f64, b: f64) -> f64 {
    a + t * (b - a)
}

fn grad(hash: u8, x: f64, y: f64, z: f64) -> f64 {
    let h = hash & 15;
    let u = if h < 8 { x } else { y };
    let v = if h < 4 {
        y
    } else if h == 12 || h == 14 {
        x
    } else {
        z
    };
    (if h & 1 == 0 { u } else { -u }) + (if h & 2 == 0 { v } else { -v })
}

/// Moves every point radially by `amplitude * noise(p * frequency)`.
///
/// Points at the origin have no radial direction and are left in place.
pub fn perlin_displace(
    base: &PointCloud,
    amplitude: f64,
    frequency: f64,
    octaves: u32,
    seed: u64,
) -> Result<PointCloud> {
    if amplitude == 0.0 {
        return Ok(base.clone());
    }
    let noise = LatticeNoise::new(seed);
    let points = base
        .points()
        .iter()
        .map(|&p| {
            let r = p.norm();
            if r == 0.0 {
                return p;
            }
            let n = noise.fractal(p * frequency, octaves);
            p * ((r + amplitude * n) / r)
        })
        .collect();
    PointCloud::from_parts(points, base.colors().map(<[_]>::to_vec))
}
