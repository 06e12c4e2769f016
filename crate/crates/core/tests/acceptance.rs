//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use sensorsniff::eval::{
    audio_checks, detection_rate, false_positive_rates, has_status_upload, localization_check, oracle_equivalence,
    padding_rate, performance_check, tape_delay_rates, timeout_recovery, TIMEOUTS_S,
};
use sensorsniff::sim::presets::motion_timeout;
use sensorsniff::sim::ModalityParams;

type Outcome = Result<(bool, String), String>;

fn c1() -> Outcome {
    let c = oracle_equivalence(0, 20).map_err(|e| e.to_string())?;
    let ok = c.max_f_rel_err <= 1e-6 && c.max_cdf_abs_err <= 1e-8 && c.elapsed < Duration::from_secs(5);
    Ok((
        ok,
        format!(
            "20 pairs: F rel err {:.2e}, CDF abs err {:.2e}, {:.3} s",
            c.max_f_rel_err,
            c.max_cdf_abs_err,
            c.elapsed.as_secs_f64()
        ),
    ))
}

fn c2() -> Outcome {
    let t = Instant::now();
    let r = detection_rate(0..100, None).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    Ok((
        r.hits >= 90 && secs < 60.0,
        format!("detected {r} in {secs:.1} s (need >= 90, < 60 s)"),
    ))
}

fn c3() -> Outcome {
    let (a, b) = false_positive_rates(0..50).map_err(|e| e.to_string())?;
    Ok((
        a.fraction() <= 0.04 && b.fraction() <= 0.20,
        format!("active FP {a} (<= 4%), background FP {b} (<= 20%)"),
    ))
}

fn c4() -> Outcome {
    let r = timeout_recovery(0..25).map_err(|e| e.to_string())?;
    let injected = (0..25u64)
        .enumerate()
        .filter(|&(i, s)| {
            let sc = motion_timeout(s, TIMEOUTS_S[i % 4], has_status_upload(s));
            matches!(&sc.sensors[0].params, ModalityParams::Motion(m) if !m.status_times_s.is_empty())
        })
        .count();
    Ok((
        r.hits >= 22 && injected == 3,
        format!("recovered {r} (need >= 22/25), status uploads in {injected} seeds (need 3)"),
    ))
}

fn c5() -> Outcome {
    let c = audio_checks(0..35).map_err(|e| e.to_string())?;
    Ok((
        c.four == (4, 4) && c.phrases.hits == 35 && c.phrases.total == 35 && c.drop_ins == 3,
        format!(
            "4 utterances -> {} matched / {} bursts, phrases {}, drop-ins -> {} intervals",
            c.four.0, c.four.1, c.phrases, c.drop_ins
        ),
    ))
}

fn c6() -> Outcome {
    let c = localization_check(0..200).map_err(|e| e.to_string())?;
    let ok = c.runs == 200
        && c.not_localizable == 0
        && c.small == 200
        && c.contained == 200
        && c.within_budget == 200
        && c.fig8_area <= 4.0
        && c.fig8_trials <= 6
        && c.fig8_contained;
    Ok((
        ok,
        format!(
            "area <= 10% in {}/200 (worst {:.1}%), contained {}/200, within budget {}/200; \
             walk-through {:.2} m2 after {} trials",
            c.small,
            100.0 * c.worst_area_fraction,
            c.contained,
            c.within_budget,
            c.fig8_area,
            c.fig8_trials
        ),
    ))
}

fn c7() -> Outcome {
    let pad = padding_rate(0..100).map_err(|e| e.to_string())?;
    let (plain, shifted) = tape_delay_rates(0..20).map_err(|e| e.to_string())?;
    Ok((
        pad.fraction() <= 0.10 && plain.fraction() <= 0.10 && shifted.fraction() >= 0.90,
        format!("padded {pad} (<= 10%), delayed {plain} at default lags, {shifted} with offset lags"),
    ))
}

fn c8() -> Outcome {
    let c = performance_check(0).map_err(|e| e.to_string())?;
    Ok((
        c.elapsed < Duration::from_secs(1) && c.identical && c.devices == 10,
        format!(
            "{} devices, {} packets: {:.3} s, identical reports {}",
            c.devices,
            c.packets,
            c.elapsed.as_secs_f64(),
            c.identical
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [(u8, fn() -> Outcome); 8] = [(1, c1), (2, c2), (3, c3), (4, c4), (5, c5), (6, c6), (7, c7), (8, c8)];
    let mut failed = 0;
    for (n, f) in criteria {
        match f() {
            Ok((true, msg)) => println!("criterion {n}: PASS  {msg}"),
            Ok((false, msg)) => {
                failed += 1;
                println!("criterion {n}: FAIL  {msg}");
            }
            Err(e) => {
                failed += 1;
                println!("criterion {n}: FAIL  error: {e}");
            }
        }
    }
    println!("acceptance: {}/8 criteria passed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
