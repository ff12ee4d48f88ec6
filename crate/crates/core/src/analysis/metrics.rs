use serde::{Deserialize, Serialize};

use super::junction::{junction_angles, DEFAULT_WINDOW_RADIUS};
use super::mask::{threshold_mask, BinaryMask};
use super::skeleton::{prune_spurs, skeletonize};
use super::topology::{components_and_cycles, label_components, nodes_connected};
use crate::error::{Error, Result};
use crate::model::{Boundary, SimulationState, TrailField};

/// Default relative threshold for trail masks.
pub const DEFAULT_THRESHOLD: f64 = 0.1;
/// Default longest skeleton spur removed before measuring.
pub const DEFAULT_SPUR_LENGTH: usize = 4;
/// Default number of smoothing passes before thresholding.
pub const DEFAULT_SMOOTHING: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub threshold: f64,
    pub window_radius: usize,
    pub spur_length: usize,
    /// 3x3 box-mean passes applied to a copy of the trail before
    /// thresholding; suppresses single-cell speckle in the mask.
    pub smoothing: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            window_radius: DEFAULT_WINDOW_RADIUS,
            spur_length: DEFAULT_SPUR_LENGTH,
            smoothing: DEFAULT_SMOOTHING,
        }
    }
}

/// One sample of network measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct NetworkMetrics {
    pub step: u64,
    pub coverage: f64,
    pub skeleton_length: f64,
    pub component_count: usize,
    pub cycle_count: usize,
    pub nodes_connected: bool,
    pub top_decile_mass_share: f64,
    pub junction_count: usize,
    pub junction_angle_mean: f64,
    pub junction_angle_stddev: f64,
    pub population: usize,
}

/// Share of total trail mass held by the largest 10% of cells
/// (`ceil(n / 10)` cells; ties broken by lower cell index). Zero for a
/// massless field.
pub fn top_decile_mass_share(trail: &TrailField) -> f64 {
    let values = trail.values();
    let total: f64 = values.iter().sum();
    if values.is_empty() || total <= 0.0 {
        return 0.0;
    }
    let k = values.len().div_ceil(10);
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.select_nth_unstable_by(k - 1, |&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let top: f64 = idx[..k].iter().map(|&i| values[i]).sum();
    (top / total).clamp(0.0, 1.0)
}

/// Whether the occupied cells form one 8-connected blob, and how far the
/// farthest occupied cell lies from the centroid relative to the radius of
/// a disc of equal area (1.0 for a perfect disc).
pub fn blob_circularity(occupancy: &BinaryMask) -> Result<(bool, f64)> {
    let n = occupancy.count();
    if n == 0 {
        return Err(Error::Undefined("blob circularity of an empty occupancy"));
    }
    let (_, components) = label_components(occupancy);
    let (mut sx, mut sy) = (0.0, 0.0);
    for (x, y) in occupancy.foreground() {
        sx += x as f64 + 0.5;
        sy += y as f64 + 0.5;
    }
    let (cx, cy) = (sx / n as f64, sy / n as f64);
    let max_r = occupancy
        .foreground()
        .map(|(x, y)| (x as f64 + 0.5 - cx).hypot(y as f64 + 0.5 - cy))
        .fold(0.0, f64::max);
    let equal_area_r = (n as f64 / std::f64::consts::PI).sqrt();
    Ok((components == 1, max_r / equal_area_r))
}

pub fn occupancy_mask(state: &SimulationState) -> BinaryMask {
    BinaryMask::from_bits(
        state.params.width,
        state.params.height,
        state.occupancy().to_vec(),
    )
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// The thresholded (optionally pre-smoothed) mask used for measurement.
pub fn analysis_mask(trail: &TrailField, cfg: &AnalysisConfig) -> BinaryMask {
    if cfg.smoothing == 0 {
        return threshold_mask(trail, cfg.threshold);
    }
    let mut smooth = trail.clone();
    for _ in 0..cfg.smoothing {
        smooth.diffuse(0.0, Boundary::Fixed);
    }
    threshold_mask(&smooth, cfg.threshold)
}

/// Measure a trail field (and optionally the state it came from).
pub fn measure_trail(
    trail: &TrailField,
    nodes: &[crate::model::NodeSource],
    cfg: &AnalysisConfig,
) -> NetworkMetrics {
    let mask = analysis_mask(trail, cfg);
    let (component_count, cycle_count) = components_and_cycles(&mask);
    let skeleton = prune_spurs(&skeletonize(&mask), cfg.spur_length);
    let angles = junction_angles(&skeleton, cfg.window_radius);
    let (junction_angle_mean, junction_angle_stddev) = mean_std(&angles);
    NetworkMetrics {
        step: 0,
        coverage: mask.coverage(),
        skeleton_length: skeleton.length(),
        component_count,
        cycle_count,
        nodes_connected: !nodes.is_empty() && nodes_connected(&mask, nodes),
        top_decile_mass_share: top_decile_mass_share(trail),
        junction_count: count_junction_clusters(&skeleton),
        junction_angle_mean,
        junction_angle_stddev,
        population: 0,
    }
}

fn count_junction_clusters(skeleton: &super::skeleton::Skeleton) -> usize {
    let mut m = BinaryMask::new(skeleton.mask.width(), skeleton.mask.height());
    for &(x, y) in &skeleton.junctions {
        m.set(x, y, true);
    }
    label_components(&m).1
}

pub fn measure_state(state: &SimulationState, cfg: &AnalysisConfig) -> NetworkMetrics {
    let mut m = measure_trail(&state.trail, &state.nodes, cfg);
    m.step = state.step;
    m.population = state.population();
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decile_share_examples() {
        assert!((top_decile_mass_share(&TrailField::from_values(10, 10, vec![1.0; 100])) - 0.1).abs() < 1e-12);
        let mut single = TrailField::new(10, 10);
        single.add(3, 4, 7.0);
        assert_eq!(top_decile_mass_share(&single), 1.0);
        let vals: Vec<f64> = (0..100).map(|i| if i % 10 == 0 { 2.0 } else { 0.0 }).collect();
        assert_eq!(top_decile_mass_share(&TrailField::from_values(10, 10, vals)), 1.0);
        assert_eq!(top_decile_mass_share(&TrailField::new(4, 4)), 0.0);
    }

    #[test]
    fn disc_is_circular() {
        // Rasterisation oracle: cells whose centres fall inside radius r.
        for r in [5.0f64, 10.0, 20.0] {
            let size = (2.0 * r) as usize + 6;
            let c = size as f64 / 2.0;
            let mut m = BinaryMask::new(size, size);
            for y in 0..size {
                for x in 0..size {
                    let d = (x as f64 + 0.5 - c).hypot(y as f64 + 0.5 - c);
                    m.set(x, y, d <= r);
                }
            }
            let (single, ratio) = blob_circularity(&m).unwrap();
            assert!(single);
            assert!((ratio - 1.0).abs() <= 0.1, "r={r} ratio={ratio}");
        }
    }

    #[test]
    fn line_is_not_circular() {
        let mut m = BinaryMask::new(60, 3);
        for x in 5..55 {
            m.set(x, 1, true);
        }
        let (single, ratio) = blob_circularity(&m).unwrap();
        assert!(single);
        let n = 50.0f64;
        let expected = (n / 2.0 - 0.5) / (n / std::f64::consts::PI).sqrt();
        assert!((ratio - expected).abs() < 1e-9);
        assert!(ratio > 3.0);
    }

    #[test]
    fn empty_occupancy_is_undefined() {
        assert!(blob_circularity(&BinaryMask::new(5, 5)).is_err());
    }
}
