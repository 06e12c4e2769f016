use std::collections::BTreeSet;

use proptest::prelude::*;

use sensorsniff::causality::{granger_sweep, granger_test_slices, SweepConfig};
use sensorsniff::detect::{active_detect, DetectConfig, DiscoveryLog, Observation, OuiDatabase};
use sensorsniff::localize::{
    apply_outcome, localize, map_coverage, GridRegion, LocalizeConfig, OracleWorld, DEFAULT_CELL_M,
};
use sensorsniff::sim::presets::{localization_case, s5_in_coverage};
use sensorsniff::sim::{apply_countermeasure, generate, Countermeasure, Modality, Point, Polygon};
use sensorsniff::trace::{deduplicate, windowize, DeviceTrace, Mac, PacketRecord, Span, TimeSeries};

fn mac() -> Mac {
    "02:00:00:00:00:42".parse().unwrap()
}

fn trace_strategy() -> impl Strategy<Value = DeviceTrace> {
    prop::collection::vec((0u64..20_000_000, prop::option::of(0u16..64), 1u32..1500), 0..300).prop_map(|rows| {
        let recs = rows
            .into_iter()
            .map(|(t, s, p)| PacketRecord::new(t, mac(), s, p, 6))
            .collect();
        DeviceTrace::new(mac(), recs).unwrap()
    })
}

fn noisy(len: usize, vals: &[f64], coupling: f64) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; len];
    let mut y = vec![0.0; len];
    for t in 0..len {
        x[t] = vals[(t * 13 + 5) % vals.len()] + (t as f64 * 0.71).cos();
        let prev = if t > 0 { y[t - 1] } else { 0.0 };
        let xl = if t > 0 { x[t - 1] } else { 0.0 };
        y[t] = 0.3 * prev + coupling * xl + vals[(t * 7 + 1) % vals.len()];
    }
    (y, x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn deduplicate_is_idempotent_and_keeps_order(t in trace_strategy()) {
        let once = deduplicate(&t);
        let twice = deduplicate(&once);
        prop_assert_eq!(once.records(), twice.records());
        prop_assert!(once.len() <= t.len());
        prop_assert!(once.records().windows(2).all(|w| w[0].timestamp_us <= w[1].timestamp_us));
    }

    #[test]
    fn windowize_conserves_bytes(t in trace_strategy(), w_ms in 10u64..1000) {
        let span = Span::new(0, 20_000_000);
        let s = windowize::<f64>(&t, span, w_ms * 1000).unwrap();
        let inside: u64 = t.records().iter().filter(|r| r.timestamp_us < span.end).map(|r| r.payload as u64).sum();
        prop_assert_eq!(s.values.iter().sum::<f64>() as u64, inside);
        prop_assert_eq!(s.len(), span.window_count(w_ms * 1000));
        prop_assert!(s.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn granger_statistics_are_well_formed(
        len in 40usize..200,
        lag in 1usize..6,
        coupling in -1.0f64..1.0,
        vals in prop::collection::vec(-1.0f64..1.0, 50..80),
    ) {
        let (y, x) = noisy(len, &vals, coupling);
        let r = granger_test_slices(&y, &x, lag, lag).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.p_value));
        prop_assert!(r.f_stat >= 0.0);
        prop_assert!(r.rss_augmented <= r.rss_restricted * (1.0 + 1e-9));
        prop_assert_eq!(r.coeffs_restricted.len(), lag + 1);
        prop_assert_eq!(r.coeffs_augmented.len(), 2 * lag + 1);
    }

    #[test]
    fn single_precision_tracks_double(
        len in 60usize..200,
        lag in 1usize..4,
        vals in prop::collection::vec(-1.0f64..1.0, 50..80),
    ) {
        let (y, x) = noisy(len, &vals, 0.6);
        let r64 = granger_test_slices(&y, &x, lag, lag).unwrap();
        let y32: Vec<f32> = y.iter().map(|&v| v as f32).collect();
        let x32: Vec<f32> = x.iter().map(|&v| v as f32).collect();
        let r32 = granger_test_slices(&y32, &x32, lag, lag).unwrap();
        prop_assert!((r32.f_stat as f64 - r64.f_stat).abs() <= 1e-2 * r64.f_stat.max(1.0), "{} vs {}", r32.f_stat, r64.f_stat);
    }

    #[test]
    fn sweep_verdict_follows_min_p(
        len in 80usize..200,
        coupling in -1.0f64..1.0,
        vals in prop::collection::vec(-1.0f64..1.0, 50..80),
    ) {
        let (y, x) = noisy(len, &vals, coupling);
        let ys = TimeSeries::new(0, 100_000, y).unwrap();
        let axes = [0.0, 0.5, 1.0].map(|k| TimeSeries::new(0, 100_000, x.iter().map(|v| v * (1.0 + k) + k).collect()).unwrap());
        let cfg = SweepConfig { max_lag: 5, ..SweepConfig::default() };
        let v = granger_sweep(&ys, &axes, &cfg).unwrap();
        let min = v.per_axis.iter().map(|r| r.p_value).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(v.min_p, min);
        prop_assert_eq!(v.monitoring, v.min_p < cfg.p_threshold);
        prop_assert!((1..=5).contains(&v.best_lag));
    }

    #[test]
    fn region_set_operations(a in prop::collection::vec(any::<bool>(), 80), b in prop::collection::vec(any::<bool>(), 80)) {
        let room = Polygon::new(vec![Point::new(0.0, 0.0), Point::new(5.0, 0.0), Point::new(5.0, 4.0), Point::new(0.0, 4.0)]).unwrap();
        let g = GridRegion::from_room(&room, 0.5).unwrap();
        let ra = g.filter(|i| a[i]);
        let rb = g.filter(|i| b[i]);
        let both = ra.intersection(&rb);
        let only = ra.difference(&rb);
        prop_assert!(both.is_subset(&ra) && both.is_subset(&rb));
        prop_assert_eq!(both.count() + only.count(), ra.count());
        prop_assert!(only.intersection(&rb).is_empty());
        prop_assert!((ra.area() - ra.count() as f64 * 0.25).abs() < 1e-12);
    }

    #[test]
    fn trial_updates_only_shrink(
        mask in prop::collection::vec(any::<bool>(), 80),
        fx in 0.0f64..5.0,
        fy in 0.0f64..4.0,
        heading in 0.0f64..360.0,
        outcome: bool,
    ) {
        let room = Polygon::new(vec![Point::new(0.0, 0.0), Point::new(5.0, 0.0), Point::new(5.0, 4.0), Point::new(0.0, 4.0)]).unwrap();
        let g = GridRegion::from_room(&room, 0.5).unwrap();
        let c = g.filter(|i| mask[i]);
        let next = apply_outcome(&c, Point::new(fx, fy), heading, outcome);
        prop_assert!(next.is_subset(&c));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_localization_is_sound(seed in 1000u64..100_000) {
        let case = localization_case(seed);
        let mut w = OracleWorld { room: case.room.clone(), sensor: case.sensor.clone() };
        let Ok(mut st) = map_coverage(&mut w, &case.probes, DEFAULT_CELL_M) else {
            return Ok(());
        };
        let loc = localize(&mut w, &mut st, &LocalizeConfig::default()).unwrap();
        let cell = loc.candidates.cell_of(case.sensor.position);
        prop_assert!(loc.candidates.contains_cell(cell), "seed {seed}");
        prop_assert!(loc.candidates.is_subset(&loc.initial));
        prop_assert!(loc.trials.len() < loc.initial.count().max(1));
        let mut prev = loc.initial.area();
        for t in &loc.trials {
            prop_assert!(t.area_after <= prev + 1e-12);
            prev = t.area_after;
        }
        prop_assert!(!loc.inconsistent);
    }

    #[test]
    fn simulation_is_deterministic(seed in any::<u64>(), camera: bool) {
        let m = if camera { Modality::Camera } else { Modality::Rf };
        let a = generate(&s5_in_coverage(seed, m)).unwrap();
        let b = generate(&s5_in_coverage(seed, m)).unwrap();
        prop_assert_eq!(&a.traces, &b.traces);
        prop_assert_eq!(&a.imu, &b.imu);
        prop_assert_eq!(&a.path, &b.path);
    }

    #[test]
    fn report_lists_every_device_once(seed in 0u64..10_000) {
        let w = generate(&s5_in_coverage(seed, Modality::Camera)).unwrap();
        let obs = Observation { traces: &w.traces, imu: &w.imu, audio: None };
        let r = active_detect(&obs, &OuiDatabase::builtin(), &mut DiscoveryLog::default(), &DetectConfig::default()).unwrap();
        let macs: BTreeSet<Mac> = r.devices.iter().map(|d| d.mac).collect();
        prop_assert_eq!(macs.len(), r.devices.len());
        prop_assert_eq!(macs, w.traces.keys().copied().collect::<BTreeSet<_>>());
    }

    #[test]
    fn padding_flattens_the_window_series(seed in 0u64..10_000) {
        let w = generate(&s5_in_coverage(seed, Modality::Rf)).unwrap();
        let t = w.traces.values().next().unwrap();
        let padded = apply_countermeasure(t, &Countermeasure::Padding { target_bytes: None }, w.span, seed).unwrap();
        let s = windowize::<f64>(&deduplicate(&padded), w.span, 100_000).unwrap();
        let orig = windowize::<f64>(&deduplicate(t), w.span, 100_000).unwrap();
        let max = orig.values.iter().copied().fold(0.0, f64::max);
        prop_assert!(s.values.iter().all(|&v| v >= max));
        prop_assert!(padded.total_bytes() >= t.total_bytes());
    }
}
