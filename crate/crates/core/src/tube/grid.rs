//! Grid tube volumes through an exact Euclidean distance transform.
//!
//! Points are snapped to the cell containing them, the squared distance
//! transform is computed one axis at a time with the lower envelope of
//! parabolas, and cells are counted by their center's distance. Snapping moves
//! each point by at most half a cell diagonal, which with the cell's own half
//! diagonal gives rigorous bounds: cells within `ε - diag` lie entirely in
//! the tube, and cells beyond `ε + diag` lie entirely outside it.

use super::{Measurement, PointCloud, TubeFunction, TubeKind};
use crate::error::{Error, Result};
use crate::par::Exec;

pub const DEFAULT_CELL_BUDGET: usize = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridEstimate {
    pub estimate: f64,
    /// Half-width of the rigorous bracket around the true measure, measured
    /// from `estimate`.
    pub bound: f64,
    pub lower: f64,
    pub upper: f64,
    pub cells: usize,
}

/// One-dimensional squared distance transform of a sampled function (lower
/// envelope of the parabolas `(q - p)² + f(p)`). Infinite samples are
/// ignored; an all-infinite input stays infinite.
fn dt1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k: usize = 0;
    let mut any = false;
    for q in 0..n {
        if f[q].is_infinite() {
            continue;
        }
        if !any {
            any = true;
            k = 0;
            v[0] = q;
            z[0] = f64::NEG_INFINITY;
            z[1] = f64::INFINITY;
            continue;
        }
        let fq = f[q] + (q * q) as f64;
        let intersect = |p: usize| (fq - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
        // z[0] = -inf stops the scan before k underflows.
        let mut s = intersect(v[k]);
        while s <= z[k] {
            k -= 1;
            s = intersect(v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    if !any {
        out.fill(f64::INFINITY);
        return;
    }
    let mut j = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[j + 1] < q as f64 {
            j += 1;
        }
        let d = q as f64 - v[j] as f64;
        *o = d * d + f[v[j]];
    }
}

/// In-place squared EDT (in cell units) of a row-major grid.
fn squared_edt(grid: &mut [f64], shape: &[usize], exec: Exec) {
    let total = grid.len();
    for axis in 0..shape.len() {
        let len = shape[axis];
        let stride: usize = shape[axis + 1..].iter().product();
        let lines = total / len;
        // Line `l` starts at the offset of its (outer, inner) index pair.
        let start = |l: usize| {
            let outer = l / stride;
            let inner = l % stride;
            outer * len * stride + inner
        };
        let source: &[f64] = grid;
        let transformed: Vec<Vec<f64>> = exec.map(lines, |l| {
            let s = start(l);
            let f: Vec<f64> = (0..len).map(|i| source[s + i * stride]).collect();
            let mut out = vec![0.0; len];
            let mut v = vec![0usize; len];
            let mut z = vec![0.0; len + 1];
            dt1d(&f, &mut out, &mut v, &mut z);
            out
        });
        for (l, line) in transformed.into_iter().enumerate() {
            let s = start(l);
            for (i, value) in line.into_iter().enumerate() {
                grid[s + i * stride] = value;
            }
        }
    }
}

/// Grid estimate of the ε-neighborhood volume of `cloud` in `R^2` or `R^3`.
pub fn grid_tube_measure(
    cloud: &PointCloud,
    eps: f64,
    resolution: f64,
    cell_budget: usize,
    exec: Exec,
) -> Result<GridEstimate> {
    let n = cloud.ambient_n();
    if !(2..=3).contains(&n) {
        return Err(Error::Unsupported(format!(
            "grid backend supports dimensions 2 and 3, got {n}"
        )));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::domain(format!("eps must be positive, got {eps}")));
    }
    if !(resolution > 0.0 && resolution <= eps / 8.0) {
        return Err(Error::domain(format!(
            "resolution {resolution} must be positive and at most eps/8 = {}",
            eps / 8.0
        )));
    }
    let h = resolution;
    let diag = h * (n as f64).sqrt();
    let pad = eps + diag + h;
    let (lo, hi) = cloud.bounds();
    let origin: Vec<f64> = lo.iter().map(|v| v - pad).collect();
    let mut shape = Vec::with_capacity(n);
    let mut cells = 1usize;
    for d in 0..n {
        let count = ((hi[d] - lo[d] + 2.0 * pad) / h).ceil() as usize + 1;
        shape.push(count);
        cells = cells.saturating_mul(count);
    }
    if cells > cell_budget {
        return Err(Error::Resolution(format!(
            "grid of {cells} cells exceeds the budget of {cell_budget}"
        )));
    }

    let mut grid = vec![f64::INFINITY; cells];
    for p in cloud.points() {
        let mut idx = 0;
        for d in 0..n {
            let i = ((p[d] - origin[d]) / h).floor() as usize;
            idx = idx * shape[d] + i.min(shape[d] - 1);
        }
        grid[idx] = 0.0;
    }
    squared_edt(&mut grid, &shape, exec);

    let limit = |r: f64| if r <= 0.0 { -1.0 } else { (r / h) * (r / h) };
    let (inner, mid, outer) = (limit(eps - diag), limit(eps), limit(eps + diag));
    let counts = exec.map(grid.len().div_ceil(1 << 16), |c| {
        let chunk = &grid[c << 16..((c + 1) << 16).min(grid.len())];
        let mut k = [0u64; 3];
        for &d2 in chunk {
            k[0] += (d2 <= inner) as u64;
            k[1] += (d2 <= mid) as u64;
            k[2] += (d2 <= outer) as u64;
        }
        k
    });
    let k = counts
        .iter()
        .fold([0u64; 3], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
    let cell_volume = h.powi(n as i32);
    let lower = k[0] as f64 * cell_volume;
    let estimate = k[1] as f64 * cell_volume;
    let upper = k[2] as f64 * cell_volume;
    Ok(GridEstimate {
        estimate,
        bound: (estimate - lower).max(upper - estimate),
        lower,
        upper,
        cells,
    })
}

/// Grid tube of a point cloud with resolution proportional to ε.
#[derive(Debug, Clone)]
pub struct GridTube {
    cloud: PointCloud,
    /// Resolution as a fraction of ε, at most 1/8.
    relative_resolution: f64,
    cell_budget: usize,
    exec: Exec,
}

impl GridTube {
    pub fn new(cloud: PointCloud, relative_resolution: f64) -> Self {
        GridTube {
            cloud,
            relative_resolution,
            cell_budget: DEFAULT_CELL_BUDGET,
            exec: Exec::default(),
        }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }
}

impl TubeFunction for GridTube {
    fn ambient_n(&self) -> usize {
        self.cloud.ambient_n()
    }

    fn kind(&self) -> TubeKind {
        TubeKind::Grid
    }

    fn eval(&self, eps: f64) -> Result<Measurement> {
        let g = grid_tube_measure(
            &self.cloud,
            eps,
            eps * self.relative_resolution,
            self.cell_budget,
            self.exec,
        )?;
        Ok(Measurement {
            value: g.estimate,
            abs_err: g.bound,
        })
    }
}
