//! Independent verification of volume functions: a deterministic
//! counter-based Monte-Carlo estimator, conservative grid bounds, and a
//! harness that compares an engine-produced V against both.
//!
//! Inside a convex body the distance to the boundary is the minimum of the
//! facet signed distances, so shell membership reduces to one sweep over
//! the facets per point.

use serde::Serialize;

use nalgebra::DVector;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::piecewise::PiecewisePoly;
use crate::polytope::Polytope;

/// SplitMix64 finalizer: a counter-based generator. Every sample index is
/// hashed independently, so results are reproducible bit-for-bit for a
/// given seed regardless of iteration order or parallel splitting.
#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Uniform f64 in [0, 1) from sample index and coordinate slot.
#[inline]
fn uniform01(seed: u64, index: u64, slot: u64) -> f64 {
    let h = splitmix64(seed ^ splitmix64(index.wrapping_mul(0x9E3779B97F4A7C15) ^ slot));
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Monte-Carlo estimate of the inner r-neighborhood volume.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub hits: u64,
    pub samples: u64,
}

/// Sample the bounding box uniformly; a point counts when it lies in `p`
/// and within distance `r` of the boundary. The standard error gets a
/// plus-one floor so it stays positive at hit fractions 0 and 1.
pub fn mc_inner_volume(
    p: &Polytope,
    r: f64,
    samples: u64,
    seed: u64,
    tol: &Tolerances,
) -> Result<McEstimate> {
    if r < 0.0 {
        return Err(Error::InvalidInput("radius must be nonnegative".into()));
    }
    if samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let d = p.dim();
    let (lo, hi) = p.bounding_box(tol)?;
    let box_volume: f64 = (0..d).map(|k| hi[k] - lo[k]).product();
    let mut hits: u64 = 0;
    let mut q = DVector::zeros(d);
    for i in 0..samples {
        for k in 0..d {
            q[k] = lo[k] + (hi[k] - lo[k]) * uniform01(seed, i, k as u64);
        }
        let dist = p.boundary_distance(&q);
        if dist >= 0.0 && dist < r {
            hits += 1;
        }
    }
    let n = samples as f64;
    let p_hat = hits as f64 / n;
    let p_floor = (hits as f64 + 0.5) / (n + 1.0);
    let stderr = box_volume * (p_floor * (1.0 - p_floor) / n).sqrt();
    Ok(McEstimate {
        estimate: box_volume * p_hat,
        stderr,
        hits,
        samples,
    })
}

/// Guaranteed bracket of the inner r-neighborhood volume from a uniform
/// grid over the bounding box.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridBracket {
    pub lower: f64,
    pub upper: f64,
    pub cells: u64,
}

const GRID_CELL_CAP: u64 = 1 << 27;

/// Classify grid cells by the center distance plus/minus the half
/// diagonal: cells certainly inside the shell count toward the lower
/// bound, cells possibly meeting it toward the upper bound. Both bounds
/// are conservative because the facet distance is 1-Lipschitz.
pub fn grid_inner_volume(
    p: &Polytope,
    r: f64,
    resolution: usize,
    tol: &Tolerances,
) -> Result<GridBracket> {
    if resolution < 8 {
        return Err(Error::InvalidInput(
            "grid resolution must be at least 8 cells per axis".into(),
        ));
    }
    if r < 0.0 {
        return Err(Error::InvalidInput("radius must be nonnegative".into()));
    }
    let d = p.dim();
    let cells = (resolution as u64).pow(d as u32);
    if cells > GRID_CELL_CAP {
        return Err(Error::MemoryBudget(cells as usize));
    }
    let (lo, hi) = p.bounding_box(tol)?;
    let steps: Vec<f64> = (0..d).map(|k| (hi[k] - lo[k]) / resolution as f64).collect();
    let cell_volume: f64 = steps.iter().product();
    let half_diagonal = 0.5 * steps.iter().map(|s| s * s).sum::<f64>().sqrt();

    let mut lower = 0.0;
    let mut upper = 0.0;
    let mut index = vec![0usize; d];
    let mut center = DVector::zeros(d);
    loop {
        for k in 0..d {
            center[k] = lo[k] + steps[k] * (index[k] as f64 + 0.5);
        }
        let dist = p.boundary_distance(&center);
        // Entirely inside P and entirely within r of the boundary.
        if dist >= half_diagonal && dist + half_diagonal <= r {
            lower += cell_volume;
        }
        // Possibly meets P within r of the boundary.
        if dist >= -half_diagonal && dist - half_diagonal < r {
            upper += cell_volume;
        }
        // Advance the multi-index.
        let mut k = 0;
        loop {
            if k == d {
                return Ok(GridBracket {
                    lower,
                    upper,
                    cells,
                });
            }
            index[k] += 1;
            if index[k] < resolution {
                break;
            }
            index[k] = 0;
            k += 1;
        }
    }
}

/// One row of a verification report.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VerifyRow {
    pub r: f64,
    pub engine: f64,
    pub mc: f64,
    pub stderr: f64,
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub z: f64,
}

/// Outcome of [`verify_volume_function`].
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
    pub max_z: f64,
    pub bracket_violations: usize,
    pub passed: bool,
}

/// Verification parameters.
#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    pub mc_samples: u64,
    pub grid_resolution: usize,
    pub seed: u64,
    /// Total stratified sample count across the phases of V.
    pub r_values: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            mc_samples: 1_000_000,
            grid_resolution: 48,
            seed: 0x5EED,
            r_values: 20,
        }
    }
}

/// Compare `v` (a candidate inner-neighborhood volume function of `p`)
/// against both oracles on r values stratified across every phase, plus
/// two-sided probes at each interior breakpoint and around the g-value.
///
/// Passes when every Monte-Carlo z-score is at most 4 and the engine value
/// never leaves the guaranteed grid bracket by more than a numerical
/// margin.
pub fn verify_volume_function(
    p: &Polytope,
    v: &PiecewisePoly,
    cfg: &VerifyConfig,
    tol: &Tolerances,
) -> Result<VerifyReport> {
    let bps = v.breakpoints();
    let g = *bps.last().unwrap();
    let mut rs: Vec<f64> = Vec::new();
    let phases = bps.len() - 1;
    let per_phase = (cfg.r_values / phases.max(1)).max(2);
    for w in bps.windows(2) {
        for i in 0..per_phase {
            let frac = (i as f64 + 0.5) / per_phase as f64;
            rs.push(w[0] + frac * (w[1] - w[0]));
        }
    }
    // Two-sided neighborhoods of the interior breakpoints and the
    // stabilization point.
    let h = 1e-4 * g.max(1.0);
    for &b in &bps[1..bps.len() - 1] {
        rs.push((b - h).max(0.0));
        rs.push(b + h);
    }
    rs.push((g - h).max(0.0));
    rs.push(g + h);
    rs.push(0.0);
    rs.push(1.25 * g);
    rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    rs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let d = p.dim();
    // Keep the grid affordable in higher dimensions; the bracket just
    // widens, it never lies.
    let resolution = match d {
        0..=2 => cfg.grid_resolution,
        3 => cfg.grid_resolution.min(48),
        _ => cfg.grid_resolution.clamp(8, 14),
    };

    let mut rows = Vec::with_capacity(rs.len());
    let mut max_z = 0.0f64;
    let mut bracket_violations = 0usize;
    let margin = 1e-7 * v.evaluate(g)?.abs().max(1.0);
    for (i, &r) in rs.iter().enumerate() {
        let engine = v.evaluate(r)?;
        let mc = mc_inner_volume(p, r, cfg.mc_samples, cfg.seed.wrapping_add(i as u64), tol)?;
        let grid = grid_inner_volume(p, r, resolution, tol)?;
        let z = (engine - mc.estimate).abs() / mc.stderr;
        if engine < grid.lower - margin || engine > grid.upper + margin {
            bracket_violations += 1;
        }
        max_z = max_z.max(z);
        rows.push(VerifyRow {
            r,
            engine,
            mc: mc.estimate,
            stderr: mc.stderr,
            grid_lo: grid.lower,
            grid_hi: grid.upper,
            z,
        });
    }
    Ok(VerifyReport {
        rows,
        max_z,
        bracket_violations,
        passed: max_z <= 4.0 && bracket_violations == 0,
    })
}
