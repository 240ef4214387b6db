//! Per-scene (global) and per-band (local) morphology metrics.

pub mod global;
pub mod local;

pub use global::{
    compute_global, facade_density, facade_heterogeneity, global_metrics, normalize_profiles, population_sigma,
    street_canyon, street_elevation, street_width, width_between, GlobalMetrics, MetricProfile,
};
pub use local::{
    band_layout, band_metrics, band_planes, band_support, compute_local, compute_local_all, slice_bands, Band,
    BandLayout, BandRecord, LocalParams,
};

/// Values normalized by their maximum, with absent values left absent.
#[derive(Clone, Debug, PartialEq)]
pub struct Normalized {
    pub values: Vec<Option<f64>>,
    /// Largest present raw value.
    pub max: Option<f64>,
    /// Set when negative raw values forced a min-max rescale instead of a
    /// plain division by the maximum.
    pub shifted: bool,
}

/// Divides every present value by the maximum present value. A zero
/// maximum maps everything to 0; if any value is negative the column is
/// rescaled as `(v - min) / (max - min)` so results stay in `[0, 1]`.
pub fn normalize(values: &[Option<f64>]) -> Normalized {
    let present = values.iter().flatten();
    let max = present.clone().copied().reduce(f64::max);
    let min = present.copied().reduce(f64::min);
    let (Some(max), Some(min)) = (max, min) else {
        return Normalized {
            values: vec![None; values.len()],
            max: None,
            shifted: false,
        };
    };
    let shifted = min < 0.0;
    let map = |v: f64| {
        if shifted {
            if max > min {
                (v - min) / (max - min)
            } else {
                1.0
            }
        } else if max > 0.0 {
            v / max
        } else {
            0.0
        }
    };
    Normalized {
        values: values.iter().map(|v| v.map(map)).collect(),
        max: Some(max),
        shifted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_division() {
        let n = normalize(&[Some(2.0), Some(4.0)]);
        assert_eq!(n.values, vec![Some(0.5), Some(1.0)]);
        assert_eq!(n.max, Some(4.0));
        assert!(!n.shifted);
    }

    #[test]
    fn absent_values_stay_absent() {
        let n = normalize(&[Some(3.0), None, Some(6.0)]);
        assert_eq!(n.values, vec![Some(0.5), None, Some(1.0)]);
        assert_eq!(normalize(&[None, None]).values, vec![None, None]);
    }

    #[test]
    fn zero_and_negative_columns() {
        assert_eq!(normalize(&[Some(0.0), Some(0.0)]).values, vec![Some(0.0), Some(0.0)]);
        let n = normalize(&[Some(-2.0), Some(0.0), Some(2.0)]);
        assert!(n.shifted);
        assert_eq!(n.values, vec![Some(0.0), Some(0.5), Some(1.0)]);
    }
}
