use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::statistics::{Data, OrderStatistics};

use super::SweepRow;

/// Largest accepted gap between the fitted and predicted log-log slopes
/// (pilot calibration at 30 seeds per point).
pub const SLOPE_TOLERANCE: f64 = 0.15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub n: usize,
    pub count: usize,
    pub ratio_median: f64,
    pub ratio_q25: f64,
    pub ratio_q75: f64,
    pub achieved_median: f64,
    pub predicted_median: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub k: usize,
    pub regime: String,
    pub points: Vec<PointSummary>,
    /// Largest over smallest per-`n` median ratio.
    pub ratio_spread: Option<f64>,
    /// Least-squares slope of `log(median achieved)` against `log n`.
    pub slope: Option<f64>,
    /// The same fit applied to the predicted order.
    pub predicted_slope: Option<f64>,
    pub slope_deviation: Option<f64>,
    pub flagged: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScalingSummary {
    pub groups: Vec<GroupSummary>,
    pub notices: Vec<String>,
}

fn median(values: &[f64]) -> f64 {
    Data::new(values.to_vec()).median()
}

fn quantile(values: &[f64], tau: f64) -> f64 {
    Data::new(values.to_vec()).quantile(tau)
}

/// Least-squares slope of `y` on `x`.
pub(crate) fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let m = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| {
        (a + (x - mx) * (y - my), b + (x - mx) * (x - mx))
    });
    num / den
}

/// Per `(k, regime)`: ratio medians and quartiles by `n`, and the log-log slope of
/// the median achieved value against the predicted order's slope.
pub fn scaling_report(rows: &[SweepRow]) -> ScalingSummary {
    let mut summary = ScalingSummary::default();
    let mut groups: BTreeMap<(usize, String), BTreeMap<usize, Vec<&SweepRow>>> = BTreeMap::new();
    let mut skipped = 0;
    for r in rows {
        match (r.error.is_empty(), r.achieved, r.predicted, r.ratio) {
            (true, Some(a), Some(p), Some(q))
                if a.is_finite() && p.is_finite() && q.is_finite() =>
            {
                groups
                    .entry((r.k, r.regime.clone()))
                    .or_default()
                    .entry(r.n)
                    .or_default()
                    .push(r);
            }
            _ => skipped += 1,
        }
    }
    if skipped > 0 {
        summary.notices.push(format!(
            "{skipped} rows without a finite ratio were skipped"
        ));
    }
    for ((k, regime), by_n) in groups {
        let points: Vec<PointSummary> = by_n
            .into_iter()
            .map(|(n, rs)| {
                let ratios: Vec<f64> = rs.iter().filter_map(|r| r.ratio).collect();
                let achieved: Vec<f64> = rs.iter().filter_map(|r| r.achieved).collect();
                let predicted: Vec<f64> = rs.iter().filter_map(|r| r.predicted).collect();
                PointSummary {
                    n,
                    count: rs.len(),
                    ratio_median: median(&ratios),
                    ratio_q25: quantile(&ratios, 0.25),
                    ratio_q75: quantile(&ratios, 0.75),
                    achieved_median: median(&achieved),
                    predicted_median: median(&predicted),
                }
            })
            .collect();
        let medians: Vec<f64> = points.iter().map(|p| p.ratio_median).collect();
        let lo = medians.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = medians.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ratio_spread = (lo > 0.0).then_some(hi / lo);
        let usable: Vec<&PointSummary> = points
            .iter()
            .filter(|p| p.achieved_median > 0.0 && p.predicted_median > 0.0)
            .collect();
        let (slope, predicted_slope) = if usable.len() < 3 {
            summary.notices.push(format!(
                "k={k} {regime}: {} usable distinct n (need 3), slope omitted",
                usable.len()
            ));
            (None, None)
        } else {
            let log = |f: fn(&PointSummary) -> f64| -> Vec<(f64, f64)> {
                usable
                    .iter()
                    .map(|p| ((p.n as f64).ln(), f(p).ln()))
                    .collect()
            };
            (
                Some(fit_slope(&log(|p| p.achieved_median))),
                Some(fit_slope(&log(|p| p.predicted_median))),
            )
        };
        let slope_deviation = slope.zip(predicted_slope).map(|(a, b)| a - b);
        summary.groups.push(GroupSummary {
            k,
            regime,
            points,
            ratio_spread,
            slope,
            predicted_slope,
            slope_deviation,
            flagged: slope_deviation.is_some_and(|d| d.abs() > SLOPE_TOLERANCE),
        });
    }
    summary
}
