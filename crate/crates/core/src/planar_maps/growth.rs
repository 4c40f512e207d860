//! Ensemble statistics of hull growth on random quadrangulations.

use alloc::vec::Vec;

use crate::error::{ensure, Result};
use crate::path::{McEstimate, Moments};
use crate::rng::{stream, Lane};

use super::hull::{hull_series, HullSeries};
use super::quad::{schaeffer, Quadrangulation};
use super::tree::{default_attempts, sample_labeled_tree_with, LabeledTree, TreeVariant};

/// Largest size for which maps come from well-labeled rejection; larger maps
/// use free-pointed labels.
pub const REJECTION_LIMIT: usize = 20_000;

pub fn variant_for(n_faces: usize) -> TreeVariant {
    if n_faces <= REJECTION_LIMIT {
        TreeVariant::WellLabeled
    } else {
        TreeVariant::FreePointed
    }
}

/// Replicate `index` of a uniform quadrangulation with `n_faces` faces.
pub fn sample_map(n_faces: usize, seed: u64, index: u64) -> Result<(LabeledTree, Quadrangulation)> {
    let mut rng = stream(seed, Lane::Tree, index);
    let tree = sample_labeled_tree_with(
        &mut rng,
        n_faces,
        variant_for(n_faces),
        default_attempts(n_faces),
    )?;
    let q = schaeffer(&tree)?;
    Ok((tree, q))
}

pub fn sample_hull_series(n_faces: usize, k_max: u32, seed: u64, index: u64) -> Result<HullSeries> {
    let (_, q) = sample_map(n_faces, seed, index)?;
    hull_series(&q, k_max)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GrowthRow {
    pub k: u32,
    pub ball_faces: McEstimate,
    pub hull_faces: McEstimate,
    pub hull_vertices: McEstimate,
    pub boundary_edges: McEstimate,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GrowthStats {
    pub rows: Vec<GrowthRow>,
    /// Least-squares slope of `log mean hull_faces` against `log k`, when the
    /// grid has at least two radii.
    pub slope: Option<f64>,
    /// Boundary lengths at each radius divided by their sample mean.
    pub rescaled_boundary: Vec<(u32, Vec<f64>)>,
}

fn moments(values: impl Iterator<Item = u64>) -> McEstimate {
    values.map(|v| v as f64).collect::<Moments>().estimate()
}

/// Aggregates per-map series at the radii in `k_grid`.
pub fn growth_stats_from(series: &[HullSeries], k_grid: &[u32]) -> Result<GrowthStats> {
    ensure!(!series.is_empty(), Degenerate, "no samples");
    ensure!(!k_grid.is_empty(), Config, "empty radius grid");
    let mut rows = Vec::with_capacity(k_grid.len());
    let mut rescaled_boundary = Vec::with_capacity(k_grid.len());
    for &k in k_grid {
        let picked: Vec<_> = series
            .iter()
            .map(|s| s.row(k).copied())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| {
                crate::Error::Domain(alloc::format!("radius {k} missing from a series"))
            })?;
        let row = GrowthRow {
            k,
            ball_faces: moments(picked.iter().map(|r| r.ball_faces)),
            hull_faces: moments(picked.iter().map(|r| r.hull_faces)),
            hull_vertices: moments(picked.iter().map(|r| r.hull_vertices)),
            boundary_edges: moments(picked.iter().map(|r| r.boundary_edges)),
        };
        let mean = row.boundary_edges.mean;
        let scaled = if mean > 0.0 {
            picked
                .iter()
                .map(|r| r.boundary_edges as f64 / mean)
                .collect()
        } else {
            Vec::new()
        };
        rescaled_boundary.push((k, scaled));
        rows.push(row);
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.hull_faces.mean > 0.0)
        .map(|r| (libm::log(r.k as f64), libm::log(r.hull_faces.mean)))
        .collect();
    let slope = if pts.len() >= 2 {
        least_squares_slope(&pts)
    } else {
        None
    };
    Ok(GrowthStats {
        rows,
        slope,
        rescaled_boundary,
    })
}

pub fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Sequential ensemble over `samples` maps.
pub fn growth_stats(
    samples: u64,
    n_faces: usize,
    k_grid: &[u32],
    seed: u64,
) -> Result<GrowthStats> {
    ensure!(samples > 0, Config, "need at least one sample");
    let k_max = k_grid.iter().copied().max().unwrap_or(0);
    let series = (0..samples)
        .map(|i| sample_hull_series(n_faces, k_max, seed, i))
        .collect::<Result<Vec<_>>>()?;
    growth_stats_from(&series, k_grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_radius_has_no_fit() {
        let g = growth_stats(4, 500, &[1], 3).unwrap();
        assert!(g.slope.is_none());
        assert!(g.rows[0].hull_faces.mean > 0.0);
    }

    #[test]
    fn slope_is_recovered_from_exact_powers() {
        let pts: Vec<(f64, f64)> = (1..6)
            .map(|k| ((k as f64).ln(), 4.0 * (k as f64).ln() + 0.3))
            .collect();
        assert!((least_squares_slope(&pts).unwrap() - 4.0).abs() < 1e-12);
    }
}
