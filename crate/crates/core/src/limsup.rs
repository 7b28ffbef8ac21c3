//! Random rectangle placement, box counting on a grid adapted to the group,
//! and the block coefficients used to average random point masses.
//!
//! # The grid
//!
//! A Euclidean grid is useless for box counting in the gauge metric: away from
//! the vertical axis an axis-aligned cube of side `δ` is sheared by the group
//! law and has metric diameter of order `sqrt(|x| δ)`. Instead the cells are
//! left translates of one box:
//!
//! ```text
//! cell(i, j, k) = (x_i, y_j, 0) · ([-δ/2, δ/2]² × [o_z + kδ², o_z + (k+1)δ²])
//! ```
//!
//! where `(x_i, y_j)` is the centre of planar square `(i, j)`. A point
//! `(X, Y, Z)` of column `(i, j)` lies in layer `k` of the adapted vertical
//! coordinate `w = Z - 2(x_i Y - y_j X)`. Cells tile space, have volume `δ⁴`
//! and metric diameter at most `8^{1/4} δ`.

use alloc::vec::Vec;

use rand::Rng;

use crate::exec::{map_chunks, CHUNK};
use crate::group::{HeisPoint, HeisRect};
use crate::math::{ceil, floor, ln, sqrt};
use crate::rng::SeedStream;
use crate::stats::{fit_line, CompensatedSum};
use crate::svf::PowerLawSeq;
use crate::{Error, Result};

/// Axis-aligned box `[lo, hi]` in coordinates `(x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    lo: [f64; 3],
    hi: [f64; 3],
}

impl Window {
    pub fn new(lo: [f64; 3], hi: [f64; 3]) -> Result<Self> {
        if lo.iter().chain(&hi).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "window bound",
            });
        }
        if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
            return Err(Error::Precondition(
                "window needs lo < hi in every coordinate",
            ));
        }
        Ok(Self { lo, hi })
    }

    pub fn unit() -> Self {
        Self {
            lo: [0.0; 3],
            hi: [1.0; 3],
        }
    }

    pub fn lo(&self) -> [f64; 3] {
        self.lo
    }
    pub fn hi(&self) -> [f64; 3] {
        self.hi
    }

    pub fn volume(&self) -> f64 {
        (0..3).map(|a| self.hi[a] - self.lo[a]).product()
    }

    pub fn contains(&self, p: &HeisPoint) -> bool {
        p.coords()
            .iter()
            .enumerate()
            .all(|(a, v)| *v >= self.lo[a] && *v <= self.hi[a])
    }
}

/// `n` i.i.d. points uniform on the window. Lebesgue measure is the Haar
/// measure of the group, so these are Haar-uniform centres.
pub fn sample_centers(window: &Window, n: usize, stream: SeedStream) -> Vec<HeisPoint> {
    let chunks = map_chunks(n, CHUNK, |c, range| {
        let mut rng = stream.child(c as u64).rng();
        range
            .map(|_| {
                let mut v = [0.0; 3];
                for (a, slot) in v.iter_mut().enumerate() {
                    let u: f64 = rng.random();
                    *slot = window.lo[a] + u * (window.hi[a] - window.lo[a]);
                }
                HeisPoint::raw(v[0], v[1], v[2])
            })
            .collect::<Vec<_>>()
    });
    chunks.into_iter().flatten().collect()
}

/// Grid of left-translated boxes of planar side `δ` and height `δ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeisGrid {
    delta: f64,
    offset: [f64; 3],
}

/// A run `k_lo..=k_hi` of cells in column `(i, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellRun {
    pub i: i64,
    pub j: i64,
    pub k_lo: i64,
    pub k_hi: i64,
}

impl CellRun {
    pub fn len(&self) -> u64 {
        (self.k_hi - self.k_lo + 1).max(0) as u64
    }

    pub fn is_empty(&self) -> bool {
        self.k_hi < self.k_lo
    }
}

impl HeisGrid {
    /// Grid with offsets at irrational fractions of a cell, so that
    /// coordinate axes and other special sets do not sit on cell faces.
    pub fn new(delta: f64) -> Result<Self> {
        Self::with_offset(
            delta,
            [
                0.381_966_011_25 * delta,
                0.236_067_977_5 * delta,
                0.141_592_653_6 * delta * delta,
            ],
        )
    }

    pub fn with_offset(delta: f64, offset: [f64; 3]) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Precondition("grid step must be positive and finite"));
        }
        if offset.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "grid offset",
            });
        }
        Ok(Self { delta, offset })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Analytic bound `8^{1/4} δ` on the metric diameter of a cell.
    pub fn cell_diameter_bound(&self) -> f64 {
        libm::pow(8.0, 0.25) * self.delta
    }

    fn column_center(&self, i: i64, j: i64) -> (f64, f64) {
        (
            self.offset[0] + (i as f64 + 0.5) * self.delta,
            self.offset[1] + (j as f64 + 0.5) * self.delta,
        )
    }

    pub fn cell_of(&self, p: &HeisPoint) -> (i64, i64, i64) {
        let i = floor((p.x() - self.offset[0]) / self.delta) as i64;
        let j = floor((p.y() - self.offset[1]) / self.delta) as i64;
        let (xc, yc) = self.column_center(i, j);
        let w = p.z() - 2.0 * (xc * p.y() - yc * p.x());
        let k = floor((w - self.offset[2]) / (self.delta * self.delta)) as i64;
        (i, j, k)
    }

    /// The point of cell `(i, j, k)` with local coordinates `(u, v, s)`,
    /// `u, v ∈ [-1/2, 1/2]`, `s ∈ [0, 1]`.
    pub fn cell_point(&self, cell: (i64, i64, i64), u: f64, v: f64, s: f64) -> HeisPoint {
        let (xc, yc) = self.column_center(cell.0, cell.1);
        let d2 = self.delta * self.delta;
        let local = HeisPoint::raw(
            u * self.delta,
            v * self.delta,
            self.offset[2] + (cell.2 as f64 + s) * d2,
        );
        HeisPoint::raw(xc, yc, 0.0).mul(&local)
    }

    pub fn cell_center(&self, cell: (i64, i64, i64)) -> HeisPoint {
        self.cell_point(cell, 0.0, 0.0, 0.5)
    }

    /// Layers of column `(i, j)` whose centre lies in the window, if any.
    fn window_layers(&self, window: &Window, i: i64, j: i64) -> Option<(i64, i64)> {
        let (xc, yc) = self.column_center(i, j);
        if xc < window.lo[0] || xc > window.hi[0] || yc < window.lo[1] || yc > window.hi[1] {
            return None;
        }
        // Cell centres are (x_i, y_j, o_z + (k + 1/2)δ²).
        let d2 = self.delta * self.delta;
        let lo = ceil((window.lo[2] - self.offset[2]) / d2 - 0.5) as i64;
        let hi = floor((window.hi[2] - self.offset[2]) / d2 - 0.5) as i64;
        (lo <= hi).then_some((lo, hi))
    }

    fn column_range(&self, lo: f64, hi: f64, axis: usize) -> (i64, i64) {
        (
            floor((lo - self.offset[axis]) / self.delta) as i64,
            floor((hi - self.offset[axis]) / self.delta) as i64,
        )
    }

    /// Number of cells whose centre lies in the window.
    pub fn window_cell_count(&self, window: &Window) -> u64 {
        let (i0, i1) = self.column_range(window.lo[0], window.hi[0], 0);
        let (j0, j1) = self.column_range(window.lo[1], window.hi[1], 1);
        let mut total = 0u64;
        for i in i0..=i1 {
            for j in j0..=j1 {
                if let Some((lo, hi)) = self.window_layers(window, i, j) {
                    total += (hi - lo + 1) as u64;
                }
            }
        }
        total
    }

    /// Runs of cells meeting `rect`, optionally restricted to cells whose
    /// centre lies in `window`. Exact: a cell is reported iff it intersects
    /// the closed rectangle.
    pub fn rect_runs(&self, rect: &HeisRect, window: Option<&Window>, out: &mut Vec<CellRun>) {
        let (px, py, pz) = (rect.center.x(), rect.center.y(), rect.center.z());
        let (r1, r2) = (rect.radii.r1(), rect.radii.r2());
        let d2 = self.delta * self.delta;
        let (i0, i1) = self.column_range(px - r1, px + r1, 0);
        let (j0, j1) = self.column_range(py - r1, py + r1, 1);
        for i in i0..=i1 {
            for j in j0..=j1 {
                let (xc, yc) = self.column_center(i, j);
                let h = 0.5 * self.delta;
                // In this column the rectangle is r2²-close in w to
                // L(X, Y) = z_p + 2((x_p - x_i) Y - (y_p - y_j) X).
                let (cx, cy) = (-2.0 * (py - yc), 2.0 * (px - xc));
                let Some((lmin, lmax)) = linear_range_on_disk_box(
                    cx,
                    cy,
                    (px, py),
                    r1,
                    (xc - h, xc + h),
                    (yc - h, yc + h),
                ) else {
                    continue;
                };
                let (lmin, lmax) = (pz + lmin - r2 * r2, pz + lmax + r2 * r2);
                let mut k_lo = ceil((lmin - self.offset[2]) / d2) as i64 - 1;
                let mut k_hi = floor((lmax - self.offset[2]) / d2) as i64;
                // Exclude a layer that only touches at its top face when
                // the division lands exactly on an integer.
                if self.offset[2] + (k_lo as f64 + 1.0) * d2 < lmin {
                    k_lo += 1;
                }
                if let Some(w) = window {
                    match self.window_layers(w, i, j) {
                        Some((lo, hi)) => {
                            k_lo = k_lo.max(lo);
                            k_hi = k_hi.min(hi);
                        }
                        None => continue,
                    }
                }
                if k_lo <= k_hi {
                    out.push(CellRun { i, j, k_lo, k_hi });
                }
            }
        }
    }
}

/// Range of `cx·X + cy·Y` over the intersection of the closed disk of radius
/// `r` about `c` and the box `xs × ys`; `None` if they are disjoint.
fn linear_range_on_disk_box(
    cx: f64,
    cy: f64,
    c: (f64, f64),
    r: f64,
    xs: (f64, f64),
    ys: (f64, f64),
) -> Option<(f64, f64)> {
    let in_disk = |x: f64, y: f64| (x - c.0) * (x - c.0) + (y - c.1) * (y - c.1) <= r * r;
    let in_box = |x: f64, y: f64| x >= xs.0 && x <= xs.1 && y >= ys.0 && y <= ys.1;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut take = |x: f64, y: f64| {
        let v = cx * x + cy * y;
        lo = lo.min(v);
        hi = hi.max(v);
    };
    for x in [xs.0, xs.1] {
        for y in [ys.0, ys.1] {
            if in_disk(x, y) {
                take(x, y);
            }
        }
    }
    let norm = libm::hypot(cx, cy);
    if norm > 0.0 {
        for s in [-1.0, 1.0] {
            let (x, y) = (c.0 + s * r * cx / norm, c.1 + s * r * cy / norm);
            if in_box(x, y) {
                take(x, y);
            }
        }
    } else if in_box(c.0, c.1) {
        take(c.0, c.1);
    }
    // Circle against the four box edges.
    for x in [xs.0, xs.1] {
        let dx = x - c.0;
        let rem = r * r - dx * dx;
        if rem >= 0.0 {
            let dy = sqrt(rem);
            for y in [c.1 - dy, c.1 + dy] {
                if y >= ys.0 && y <= ys.1 {
                    take(x, y);
                }
            }
        }
    }
    for y in [ys.0, ys.1] {
        let dy = y - c.1;
        let rem = r * r - dy * dy;
        if rem >= 0.0 {
            let dx = sqrt(rem);
            for x in [c.0 - dx, c.0 + dx] {
                if x >= xs.0 && x <= xs.1 {
                    take(x, y);
                }
            }
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Total length of the union of runs. Sorts `runs` in place.
pub fn count_union(runs: &mut [CellRun]) -> u64 {
    runs.sort_unstable();
    let mut total = 0u64;
    let mut cur: Option<CellRun> = None;
    for r in runs.iter() {
        match cur.as_mut() {
            Some(c) if c.i == r.i && c.j == r.j && r.k_lo <= c.k_hi + 1 => {
                c.k_hi = c.k_hi.max(r.k_hi);
            }
            _ => {
                if let Some(c) = cur {
                    total += c.len();
                }
                cur = Some(*r);
            }
        }
    }
    if let Some(c) = cur {
        total += c.len();
    }
    total
}

/// Number of grid cells meeting at least one of `rects`, counting only cells
/// whose centre lies in `window` when one is given.
pub fn occupied_cells_of_rects(
    rects: &[HeisRect],
    grid: &HeisGrid,
    window: Option<&Window>,
) -> u64 {
    let chunks = map_chunks(rects.len(), CHUNK, |_, range| {
        let mut runs = Vec::new();
        for rect in &rects[range] {
            grid.rect_runs(rect, window, &mut runs);
        }
        runs
    });
    let mut all: Vec<CellRun> = chunks.into_iter().flatten().collect();
    count_union(&mut all)
}

/// Cells of `grid` meeting `⋃_{n = n_lo}^{n_hi} R(p_n, r_n)` with centres
/// `p_n = centers[n - 1]`, clipped to the window.
pub fn occupied_cells(
    centers: &[HeisPoint],
    seq: &PowerLawSeq,
    n_lo: usize,
    n_hi: usize,
    grid: &HeisGrid,
    window: &Window,
) -> Result<u64> {
    if n_lo == 0 || n_lo > n_hi || n_hi > centers.len() {
        return Err(Error::Precondition(
            "need 1 <= n_lo <= n_hi <= number of centres",
        ));
    }
    let rects: Vec<HeisRect> = (n_lo..=n_hi)
        .map(|n| HeisRect::new(centers[n - 1], seq.radii(n as u64)))
        .collect();
    Ok(occupied_cells_of_rects(&rects, grid, Some(window)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Box-counting slope: least squares of `log N(δ)` against `log(1/δ)`.
/// Needs at least three scales spanning at least two octaves.
pub fn dimension_estimate(counts: &[(f64, f64)]) -> Result<DimensionFit> {
    if counts.len() < 3 {
        return Err(Error::DegenerateScales("need at least three scales"));
    }
    if counts
        .iter()
        .any(|&(d, n)| !(d > 0.0 && n > 0.0 && d.is_finite() && n.is_finite()))
    {
        return Err(Error::DegenerateScales(
            "scales and counts must be positive and finite",
        ));
    }
    let dmax = counts.iter().map(|c| c.0).fold(0.0, f64::max);
    let dmin = counts.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    if dmax / dmin < 4.0 {
        return Err(Error::DegenerateScales(
            "scales must span at least two octaves",
        ));
    }
    let xs: Vec<f64> = counts.iter().map(|c| -ln(c.0)).collect();
    let ys: Vec<f64> = counts.iter().map(|c| ln(c.1)).collect();
    let fit = fit_line(&xs, &ys)?;
    Ok(DimensionFit {
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
    })
}

/// Block `n` of the coefficient table: `a_{n,k} = a_n / b_k` for
/// `start <= k <= end` (1-based), zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientBlock {
    pub n: usize,
    pub start: u64,
    pub end: u64,
    /// `1 / Σ_{k=start}^{end} 1/b_k`.
    pub a_n: f64,
    /// `Σ_k a_{n,k} = a_n Σ_k 1/b_k`, from the compensated block sum.
    pub row_sum: f64,
    /// `Σ_k a_{n,k}²`.
    pub sum_sq: f64,
    /// `Σ_k a_{n,k}² b_k`.
    pub sum_sq_b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockCoefficients {
    pub blocks: Vec<CoefficientBlock>,
    /// `sup_k 1/b_k` over the used prefix.
    pub inv_b_sup: f64,
}

impl BlockCoefficients {
    /// Non-zero entries `(k, a_{n,k})` of row `n` (1-based).
    pub fn row<F: Fn(u64) -> f64>(&self, n: usize, b: F) -> Vec<(u64, f64)> {
        match self.blocks.get(n.wrapping_sub(1)) {
            Some(blk) => (blk.start..=blk.end).map(|k| (k, blk.a_n / b(k))).collect(),
            None => Vec::new(),
        }
    }
}

const RUN: usize = 256;
const GROUP: usize = 8;

/// Consecutive blocks `[M_n, N_n]`, `M_1 = 1`, `M_{n+1} = N_n + 1`, with
/// `N_n` minimal so that `Σ_{k=M_n}^{N_n} 1/b_k >= 2^n`. Then
/// `a_n <= 2^{-n}`, every row sums to one, `Σ_k a_{n,k}² b_k = a_n`, and the
/// supports move off to infinity.
///
/// `b` is evaluated at `k = 1..=horizon`; fails if the harmonic mass in the
/// horizon runs out before `n_blocks` blocks are complete.
pub fn block_coefficients<F: Fn(u64) -> f64>(
    b: F,
    horizon: u64,
    n_blocks: usize,
) -> Result<BlockCoefficients> {
    let mut blocks = Vec::with_capacity(n_blocks);
    let mut k = 1u64;
    let mut inv_b_sup = 0.0f64;
    for n in 1..=n_blocks {
        let target = libm::ldexp(1.0, n as i32);
        let start = k;
        // Short runs are summed plainly and folded into compensated totals.
        let mut mass = CompensatedSum::new();
        let mut mass_sq = CompensatedSum::new();
        let (mut base, mut run, mut run_sq, mut run_len) = (0.0, 0.0, 0.0, 0);
        'scan: loop {
            // Terms are read in groups; the crossing is located term by term
            // only inside the group where it happens.
            let len = (horizon + 1).saturating_sub(k).min(GROUP as u64) as usize;
            if len == 0 {
                return Err(Error::InsufficientHorizon {
                    horizon: horizon as usize,
                    block: n,
                    needed: target,
                    shortfall: target - base - run,
                });
            }
            let mut inv = [0.0; GROUP];
            for (i, slot) in inv[..len].iter_mut().enumerate() {
                let bk = b(k + i as u64);
                if !(bk > 0.0 && bk.is_finite()) {
                    return Err(Error::Precondition(
                        "weights b_k must be positive and finite",
                    ));
                }
                *slot = 1.0 / bk;
            }
            let group: f64 = inv[..len].iter().sum();
            let take = if base + run + group < target {
                len
            } else {
                let mut acc = base + run;
                let mut m = 0;
                while m < len && acc < target {
                    acc += inv[m];
                    m += 1;
                }
                m
            };
            for &v in &inv[..take] {
                inv_b_sup = inv_b_sup.max(v);
                run += v;
                run_sq += v * v;
            }
            run_len += take;
            k += take as u64;
            if run_len >= RUN {
                mass.add(run);
                mass_sq.add(run_sq);
                base = mass.value();
                (run, run_sq, run_len) = (0.0, 0.0, 0);
            }
            if take < len || base + run >= target {
                break 'scan;
            }
        }
        mass.add(run);
        mass_sq.add(run_sq);
        let (s1, s2) = (mass.value(), mass_sq.value());
        let a_n = 1.0 / s1;
        blocks.push(CoefficientBlock {
            n,
            start,
            end: k - 1,
            a_n,
            row_sum: a_n * s1,
            sum_sq: a_n * a_n * s2,
            sum_sq_b: a_n * (a_n * s1),
        });
    }
    Ok(BlockCoefficients { blocks, inv_b_sup })
}

/// `b_k = 1 + log k`, the slowly growing weights used in the gadget checks.
pub fn log_weights(k: u64) -> f64 {
    1.0 + ln(k as f64)
}
