//! Monte Carlo tube volumes for point clouds.
//!
//! Samples are drawn uniformly from the cloud's bounding box padded by ε.
//! Sample `i` reads its coordinates from a fixed position of a ChaCha8
//! stream keyed by the seed, so the estimate does not depend on how the
//! samples are split across threads.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Measurement, PointCloud, TubeFunction, TubeKind};
use crate::error::{Error, Result};
use crate::par::Exec;

pub const MAX_MC_DIM: usize = 6;
const CHUNK: usize = 4096;

type CellKey = [i64; MAX_MC_DIM];

struct SpatialHash<'a> {
    cloud: &'a PointCloud,
    origin: Vec<f64>,
    cell: f64,
    cells: HashMap<CellKey, Vec<u32>>,
}

impl<'a> SpatialHash<'a> {
    fn new(cloud: &'a PointCloud, origin: Vec<f64>, cell: f64) -> Self {
        let mut cells: HashMap<CellKey, Vec<u32>> = HashMap::new();
        for (i, p) in cloud.points().enumerate() {
            let key = Self::key_of(&origin, cell, p);
            cells.entry(key).or_default().push(i as u32);
        }
        SpatialHash {
            cloud,
            origin,
            cell,
            cells,
        }
    }

    fn key_of(origin: &[f64], cell: f64, x: &[f64]) -> CellKey {
        let mut key = [0i64; MAX_MC_DIM];
        for d in 0..x.len() {
            key[d] = ((x[d] - origin[d]) / cell).floor() as i64;
        }
        key
    }

    /// Whether some cloud point lies within distance `cell` of `x`.
    fn hit(&self, x: &[f64]) -> bool {
        let n = x.len();
        let center = Self::key_of(&self.origin, self.cell, x);
        let r2 = self.cell * self.cell;
        for code in 0..3usize.pow(n as u32) {
            let mut key = center;
            let mut c = code;
            for k in key.iter_mut().take(n) {
                *k += (c % 3) as i64 - 1;
                c /= 3;
            }
            if let Some(ids) = self.cells.get(&key) {
                for &id in ids {
                    let p = self.cloud.point(id as usize);
                    let d2: f64 = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                    if d2 <= r2 {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// Monte Carlo estimate of the ε-neighborhood volume of `cloud`, returning
/// `(estimate, standard error)`.
pub fn mc_tube_measure(
    cloud: &PointCloud,
    eps: f64,
    n_samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<(f64, f64)> {
    let n = cloud.ambient_n();
    if n > MAX_MC_DIM {
        return Err(Error::Unsupported(format!(
            "Monte Carlo backend supports ambient dimension up to {MAX_MC_DIM}, got {n}"
        )));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::domain(format!("eps must be positive, got {eps}")));
    }
    if n_samples < 1000 {
        return Err(Error::domain(format!(
            "need at least 1000 samples, got {n_samples}"
        )));
    }
    let (lo, hi) = cloud.bounds();
    let origin: Vec<f64> = lo.iter().map(|v| v - eps).collect();
    let extent: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| h - l + 2.0 * eps).collect();
    let box_volume: f64 = extent.iter().product();
    let hash = SpatialHash::new(cloud, origin.clone(), eps);

    let chunks = n_samples.div_ceil(CHUNK);
    let hits = exec.sum_u64(chunks, |c| {
        let start = c * CHUNK;
        let end = (start + CHUNK).min(n_samples);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Two 32-bit words per coordinate.
        rng.set_word_pos((start * n * 2) as u128);
        let mut x = [0.0f64; MAX_MC_DIM];
        let mut count = 0u64;
        for _ in start..end {
            for d in 0..n {
                x[d] = origin[d] + extent[d] * rng.random::<f64>();
            }
            if hash.hit(&x[..n]) {
                count += 1;
            }
        }
        count
    });

    let p = hits as f64 / n_samples as f64;
    let estimate = box_volume * p;
    let stderr = box_volume * (p * (1.0 - p) / n_samples as f64).sqrt();
    Ok((estimate, stderr))
}

/// Monte Carlo tube of a point cloud. The same seed is used at every ε so a
/// schedule is evaluated with common random numbers.
#[derive(Debug, Clone)]
pub struct MonteCarloTube {
    cloud: PointCloud,
    n_samples: usize,
    seed: u64,
    exec: Exec,
}

impl MonteCarloTube {
    pub fn new(cloud: PointCloud, n_samples: usize, seed: u64) -> Self {
        MonteCarloTube {
            cloud,
            n_samples,
            seed,
            exec: Exec::default(),
        }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }
}

impl TubeFunction for MonteCarloTube {
    fn ambient_n(&self) -> usize {
        self.cloud.ambient_n()
    }

    fn kind(&self) -> TubeKind {
        TubeKind::MonteCarlo
    }

    fn eval(&self, eps: f64) -> Result<Measurement> {
        let (value, stderr) =
            mc_tube_measure(&self.cloud, eps, self.n_samples, self.seed, self.exec)?;
        Ok(Measurement {
            value,
            abs_err: stderr,
        })
    }
}
