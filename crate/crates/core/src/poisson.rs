//! Grid-accelerated Poisson disk sampling of an oriented box.
//!
//! Sampling runs in the box frame on a background grid of cell size `h/√d`,
//! so each cell holds at most one sample and every sample closer than `h` to
//! a candidate lies within two cells of it. Each step picks a random active
//! sample, throws `k_hat` candidates into the annulus `[h, 2h]` around it and
//! keeps every candidate that is inside the box and at least `h` from all
//! samples so far. A sample with no surviving candidate is retired.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::obb::OrientedBox;
use crate::points::PointSet;
use crate::rng::Rng;

pub const DEFAULT_K_HAT: usize = 15;
const EMPTY: u32 = u32::MAX;
const REACH: i64 = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub h: f64,
    pub k_hat: usize,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(h: f64) -> Self {
        Self {
            h,
            k_hat: DEFAULT_K_HAT,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "spacing must be positive, got {}",
                self.h
            )));
        }
        if self.k_hat == 0 {
            return Err(Error::InvalidArgument("k_hat must be at least 1".into()));
        }
        Ok(())
    }
}

/// Uniform (by area or volume) sample of the annulus `h ≤ r ≤ 2h` around
/// `center`.
pub fn annulus_sample(center: &[f64], h: f64, rng: &mut Rng) -> Vec<f64> {
    annulus_point(center, h, rng)[..center.len()].to_vec()
}

fn annulus_point(center: &[f64], h: f64, rng: &mut Rng) -> [f64; 3] {
    let mut y = [0.0; 3];
    if center.len() == 2 {
        let r = h * (1.0 + 3.0 * rng.uniform()).sqrt();
        let (s, c) = (2.0 * PI * rng.uniform()).sin_cos();
        y[0] = center[0] + r * c;
        y[1] = center[1] + r * s;
    } else {
        let r = h * (1.0 + 7.0 * rng.uniform()).cbrt();
        let z = 2.0 * rng.uniform() - 1.0;
        let rho = (1.0 - z * z).max(0.0).sqrt();
        let (s, c) = (2.0 * PI * rng.uniform()).sin_cos();
        y[0] = center[0] + r * rho * c;
        y[1] = center[1] + r * rho * s;
        y[2] = center[2] + r * z;
    }
    y
}

struct Grid {
    origin: Vec<f64>,
    cell: f64,
    shape: Vec<i64>,
    slots: Vec<u32>,
}

impl Grid {
    fn new(lo: &[f64], hi: &[f64], cell: f64) -> Result<Self> {
        let shape: Vec<i64> = lo
            .iter()
            .zip(hi)
            .map(|(a, b)| (((b - a) / cell).ceil() as i64).max(1))
            .collect();
        let total = shape
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n as usize))
            .filter(|&t| t < u32::MAX as usize)
            .ok_or_else(|| {
                Error::InvalidArgument("background grid too large for this spacing".into())
            })?;
        Ok(Self {
            origin: lo.to_vec(),
            cell,
            shape,
            slots: vec![EMPTY; total],
        })
    }

    fn coords(&self, y: &[f64]) -> [i64; 3] {
        let mut c = [0i64; 3];
        for j in 0..y.len() {
            let k = ((y[j] - self.origin[j]) / self.cell).floor() as i64;
            c[j] = k.clamp(0, self.shape[j] - 1);
        }
        c
    }

    fn flat(&self, c: &[i64; 3]) -> usize {
        let mut f = 0i64;
        for j in (0..self.shape.len()).rev() {
            f = f * self.shape[j] + c[j];
        }
        f as usize
    }
}

/// Poisson disk samples of `bbox`, returned in world coordinates.
pub fn sample_box(bbox: &OrientedBox, cfg: &SamplerConfig) -> Result<PointSet> {
    cfg.validate()?;
    let frame = sample_frame(bbox.min(), bbox.max(), cfg)?;
    let d = bbox.dim();
    let mut out = PointSet::with_capacity(d, frame.len());
    for y in frame.iter() {
        out.push(&bbox.from_frame(y));
    }
    Ok(out)
}

/// Poisson disk samples of the axis-aligned box `[lo, hi]`.
pub fn sample_frame(lo: &[f64], hi: &[f64], cfg: &SamplerConfig) -> Result<PointSet> {
    cfg.validate()?;
    let d = lo.len();
    if d != 2 && d != 3 || hi.len() != d {
        return Err(Error::Dimension {
            expected: 3,
            found: d,
        });
    }
    let h = cfg.h;
    let h2 = h * h;
    let mut grid = Grid::new(lo, hi, h / (d as f64).sqrt())?;
    let mut rng = Rng::new(cfg.seed);
    let inside = |y: &[f64]| (0..d).all(|j| y[j] >= lo[j] && y[j] <= hi[j]);

    let mut samples = PointSet::new(d);
    let first: Vec<f64> = (0..d)
        .map(|j| lo[j] + (hi[j] - lo[j]) * rng.uniform())
        .collect();
    let c = grid.coords(&first);
    let f = grid.flat(&c);
    grid.slots[f] = 0;
    samples.push(&first);
    let mut active = vec![0usize];

    while !active.is_empty() {
        let slot = rng.below(active.len());
        let mut center = [0.0; 3];
        center[..d].copy_from_slice(samples.point(active[slot]));
        let mut placed = false;
        for _ in 0..cfg.k_hat {
            let y = &annulus_point(&center[..d], h, &mut rng)[..d];
            if !inside(y) {
                continue;
            }
            let c = grid.coords(y);
            let f = grid.flat(&c);
            if grid.slots[f] != EMPTY || crowded(&grid, &samples, &c, y, h2) {
                continue;
            }
            grid.slots[f] = samples.len() as u32;
            active.push(samples.len());
            samples.push(y);
            placed = true;
        }
        if !placed {
            active.swap_remove(slot);
        }
    }
    Ok(samples)
}

/// Whether any stored sample is closer than `h` to `y`.
fn crowded(grid: &Grid, samples: &PointSet, c: &[i64; 3], y: &[f64], h2: f64) -> bool {
    let d = y.len();
    let range = |j: usize| (c[j] - REACH).max(0)..=(c[j] + REACH).min(grid.shape[j] - 1);
    let z_range = if d == 3 { range(2) } else { 0..=0 };
    for k in z_range {
        for jj in range(1) {
            for ii in range(0) {
                let f = grid.flat(&[ii, jj, k]);
                let s = grid.slots[f];
                if s != EMPTY {
                    let p = samples.point(s as usize);
                    let dd: f64 = p.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                    if dd < h2 {
                        return true;
                    }
                }
            }
        }
    }
    false
}
