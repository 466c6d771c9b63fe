//! Trajectory statistics: empirical anomalous-jump rates, time-weighted
//! photon-count histograms, and residence-time summaries.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::einstein::JumpKind;
use crate::error::{Error, Result};
use crate::mode::ClassifiedJumpEvent;
use crate::physics::{PhysicalParams, SelectedMode};
use crate::rates::{bose_einstein_pmf, photon_jump_rates};

/// Empirical Poisson rate estimate: `events / total_time` with standard
/// error `sqrt(events) / total_time`. With zero events the rate is zero and
/// `upper_bound_95` carries the rule-of-three bound `3 / total_time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalRate {
    pub rate: f64,
    pub std_err: f64,
    pub events: u64,
    pub upper_bound_95: Option<f64>,
    pub low_statistics: bool,
}

impl EmpiricalRate {
    pub fn from_counts(events: u64, total_time: f64) -> Self {
        if events == 0 {
            EmpiricalRate {
                rate: 0.0,
                std_err: 0.0,
                events: 0,
                upper_bound_95: Some(3.0 / total_time),
                low_statistics: true,
            }
        } else {
            EmpiricalRate {
                rate: events as f64 / total_time,
                std_err: (events as f64).sqrt() / total_time,
                events,
                upper_bound_95: None,
                low_statistics: false,
            }
        }
    }
}

/// Aggregate empirical anomalous rates over a set of event lists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalRates {
    pub up: EmpiricalRate,
    pub down: EmpiricalRate,
    pub total_time: f64,
}

/// Counts anomalous up-up and down-down events across records and divides by
/// the aggregate observation time.
pub fn classify_and_count(
    records: &[Vec<ClassifiedJumpEvent>],
    total_time: f64,
) -> Result<EmpiricalRates> {
    if total_time <= 0.0 || !total_time.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "total_time must be finite and > 0, got {total_time}"
        )));
    }
    let mut up = 0u64;
    let mut down = 0u64;
    for record in records {
        for e in record {
            if e.anomalous {
                match e.kind {
                    JumpKind::Up => up += 1,
                    JumpKind::Down => down += 1,
                }
            }
        }
    }
    Ok(EmpiricalRates {
        up: EmpiricalRate::from_counts(up, total_time),
        down: EmpiricalRate::from_counts(down, total_time),
        total_time,
    })
}

/// Time-weighted photon-count histogram with its total-variation distance to
/// the Bose-Einstein distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhotonHistogram {
    /// Occupation time per integer photon count.
    pub occupation: BTreeMap<i64, f64>,
    pub total_time: f64,
    pub tv_distance: f64,
}

/// Merges per-trajectory occupancy lists and computes
/// `TV = (1/2) sum_N |p_hat(N) - p_BE(N)|`, including the analytic tail of
/// the reference distribution beyond the largest observed count.
pub fn photon_histogram(occupancies: &[Vec<(i64, f64)>], nbar: f64) -> Result<PhotonHistogram> {
    let mut occupation: BTreeMap<i64, f64> = BTreeMap::new();
    let mut total_time = 0.0;
    for occ in occupancies {
        for &(n, t) in occ {
            if n < 0 {
                return Err(Error::InvalidParameter(format!("negative photon count {n}")));
            }
            *occupation.entry(n).or_insert(0.0) += t;
            total_time += t;
        }
    }
    if total_time <= 0.0 || total_time.is_nan() {
        return Err(Error::EmptyInput("photon_histogram needs nonzero occupation time"));
    }
    let n_max = *occupation.keys().max().expect("nonempty map");
    let mut tv = 0.0;
    let mut reference_mass = 0.0;
    for n in 0..=n_max {
        let p_hat = occupation.get(&n).copied().unwrap_or(0.0) / total_time;
        let p_ref = bose_einstein_pmf(nbar, n as u64);
        reference_mass += p_ref;
        tv += (p_hat - p_ref).abs();
    }
    // reference tail beyond the observed support
    tv += 1.0 - reference_mass;
    Ok(PhotonHistogram { occupation, total_time, tv_distance: 0.5 * tv })
}

/// Per-count empirical anomalous rates compared against the analytic
/// photon-number jump rates: occupation time and event counts are binned by
/// the integer count before the event, so counts with different rates are
/// never mixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NResolvedRate {
    pub n: i64,
    pub occupation_time: f64,
    pub up: EmpiricalRate,
    pub down: EmpiricalRate,
    pub gamma_up_analytic: f64,
    pub gamma_down_analytic: f64,
}

pub fn n_resolved_rates(
    occupancies: &[Vec<(i64, f64)>],
    records: &[Vec<ClassifiedJumpEvent>],
    params: &PhysicalParams,
    mode: &SelectedMode,
) -> Result<Vec<NResolvedRate>> {
    let mut time_at: BTreeMap<i64, f64> = BTreeMap::new();
    for occ in occupancies {
        for &(n, t) in occ {
            *time_at.entry(n).or_insert(0.0) += t;
        }
    }
    let mut up_at: BTreeMap<i64, u64> = BTreeMap::new();
    let mut down_at: BTreeMap<i64, u64> = BTreeMap::new();
    for record in records {
        for e in record.iter().filter(|e| e.anomalous) {
            match e.kind {
                JumpKind::Up => *up_at.entry(e.n_before).or_insert(0) += 1,
                JumpKind::Down => *down_at.entry(e.n_before).or_insert(0) += 1,
            }
        }
    }
    n_resolved_from_counts(&time_at, &up_at, &down_at, params, mode)
}

/// Builds the per-count comparison rows from already-binned occupation times
/// and anomalous-event counts.
pub fn n_resolved_from_counts(
    time_at: &BTreeMap<i64, f64>,
    up_at: &BTreeMap<i64, u64>,
    down_at: &BTreeMap<i64, u64>,
    params: &PhysicalParams,
    mode: &SelectedMode,
) -> Result<Vec<NResolvedRate>> {
    let mut out = Vec::new();
    for (&n, &t) in time_at {
        if t <= 0.0 || t.is_nan() || n < 0 {
            continue;
        }
        let analytic = photon_jump_rates(params, mode, n as u64)?;
        out.push(NResolvedRate {
            n,
            occupation_time: t,
            up: EmpiricalRate::from_counts(up_at.get(&n).copied().unwrap_or(0), t),
            down: EmpiricalRate::from_counts(down_at.get(&n).copied().unwrap_or(0), t),
            gamma_up_analytic: analytic.gamma_up,
            gamma_down_analytic: analytic.gamma_down,
        });
    }
    Ok(out)
}

/// Mean and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleStats {
    pub mean: f64,
    pub std_err: f64,
    pub count: u64,
}

impl SampleStats {
    pub fn from_sums(sum: f64, sum_sq: f64, count: u64) -> Option<Self> {
        if count == 0 {
            return None;
        }
        let n = count as f64;
        let mean = sum / n;
        let var = if count > 1 { ((sum_sq - sum * sum / n) / (n - 1.0)).max(0.0) } else { 0.0 };
        Some(SampleStats { mean, std_err: (var / n).sqrt(), count })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn event(kind: JumpKind, n_before: i64, anomalous: bool) -> ClassifiedJumpEvent {
        let n_after = if anomalous {
            n_before + if kind == JumpKind::Up { 1 } else { -1 }
        } else {
            n_before
        };
        ClassifiedJumpEvent { time: 0.0, kind, n_before, n_after, anomalous }
    }

    #[test]
    fn empty_record_gives_bounded_zero_rate() {
        let rates = classify_and_count(&[vec![]], 100.0).unwrap();
        assert_eq!(rates.up.rate, 0.0);
        assert!(rates.up.low_statistics);
        assert_eq!(rates.up.upper_bound_95, Some(0.03));
    }

    #[test]
    fn synthetic_counts_give_expected_rate() {
        let events: Vec<_> = (0..100).map(|_| event(JumpKind::Up, 1, true)).collect();
        let rates = classify_and_count(&[events], 1e6).unwrap();
        assert_eq!(rates.up.events, 100);
        assert!((rates.up.rate - 1.0e-4).abs() < 1e-18);
        assert!((rates.up.std_err - 1.0e-5).abs() < 1e-18);
        assert!(!rates.up.low_statistics);
        // alternating events never count
        let alt = vec![event(JumpKind::Up, 1, false); 50];
        let rates = classify_and_count(&[alt], 1e6).unwrap();
        assert_eq!(rates.up.events, 0);
    }

    #[test]
    fn histogram_identity_and_delta() {
        // synthetic occupancy exactly matching the reference pmf
        let occ: Vec<(i64, f64)> =
            (0..60).map(|n| (n, bose_einstein_pmf(1.0, n as u64))).collect();
        let h = photon_histogram(&[occ], 1.0).unwrap();
        // only the truncated tail contributes
        assert!(h.tv_distance < 1e-15, "tv = {}", h.tv_distance);

        // a record pinned at N = 0 vs the vacuum distribution
        let h = photon_histogram(&[vec![(0, 42.0)]], 0.0).unwrap();
        assert_eq!(h.tv_distance, 0.0);

        assert!(photon_histogram(&[vec![]], 1.0).is_err());
    }

    #[test]
    fn histogram_mass_sums_to_total() {
        let h = photon_histogram(&[vec![(0, 1.0), (2, 3.0)], vec![(0, 2.0)]], 1.0).unwrap();
        assert_eq!(h.total_time, 6.0);
        assert_eq!(h.occupation[&0], 3.0);
        assert_eq!(h.occupation[&2], 3.0);
    }

    #[test]
    fn n_resolved_bins_do_not_mix() {
        let params = PhysicalParams::new(1.0, 1.0, 0.0).unwrap();
        let mode = SelectedMode::new(0.01, 0.0, 0.0).unwrap();
        let occ = vec![vec![(0, 10.0), (1, 20.0)]];
        let recs = vec![vec![
            event(JumpKind::Up, 1, true),
            event(JumpKind::Up, 1, true),
            event(JumpKind::Down, 0, false),
        ]];
        let rows = n_resolved_rates(&occ, &recs, &params, &mode).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].n, 0);
        assert_eq!(rows[0].up.events, 0);
        assert_eq!(rows[1].n, 1);
        assert_eq!(rows[1].up.events, 2);
        assert!((rows[1].up.rate - 0.1).abs() < 1e-15);
        assert!((rows[1].gamma_up_analytic - 8.0e-4 / 9.0).abs() < 1e-18);
        assert_eq!(rows[0].gamma_down_analytic, 0.0);
    }

    #[test]
    fn sample_stats_basics() {
        let s = SampleStats::from_sums(10.0, 30.0, 4).unwrap();
        assert!((s.mean - 2.5).abs() < 1e-15);
        assert!(s.std_err > 0.0);
        assert!(SampleStats::from_sums(0.0, 0.0, 0).is_none());
    }
}
