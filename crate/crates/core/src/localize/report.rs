//! Plain-text localization reports.

use std::fmt::Write;

use super::algo::{AudioLocalization, BBoxState, Localization};
use super::grid::GridRegion;
use crate::trace::Mac;

fn cells(out: &mut String, g: &GridRegion) {
    for (i, j) in g.cell_list() {
        let _ = writeln!(out, "cell,{i},{j}");
    }
}

/// Renders a trial-based localization.
///
/// Lines are `key=value` headers followed by `probe`, `trial` and `cell`
/// records. Cells are `column,row` indices on a grid anchored at the room's
/// lower-left bounding-box corner.
pub fn format_localization(mac: Mac, state: &BBoxState, loc: &Localization) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "#localize mac={mac} status={} inconsistent={}",
        loc.status.name(),
        loc.inconsistent
    );
    let _ = writeln!(out, "cell_m={}", state.room_grid.cell_size());
    let _ = writeln!(out, "room_area_m2={:.3}", loc.room_area);
    let _ = writeln!(out, "coverage_area_m2={:.3}", state.included.area());
    let _ = writeln!(out, "initial_area_m2={:.3}", loc.initial_area());
    let _ = writeln!(out, "final_area_m2={:.3}", loc.final_area());
    match &loc.mle {
        Some(p) => {
            let _ = writeln!(out, "mle={p}");
        }
        None => {
            let _ = writeln!(out, "mle=none");
        }
    }
    for p in &state.positives {
        let _ = writeln!(out, "probe,{:.3},{:.3},1", p.x, p.y);
    }
    for p in &state.negatives {
        let _ = writeln!(out, "probe,{:.3},{:.3},0", p.x, p.y);
    }
    for (n, t) in loc.trials.iter().enumerate() {
        let _ = writeln!(
            out,
            "trial,{},{:.3},{:.3},{:.1},{},{},{:.3},{}",
            n + 1,
            t.spec.position.x,
            t.spec.position.y,
            t.spec.heading,
            t.spec.stimulus.name(),
            u8::from(t.outcome),
            t.area_after,
            u8::from(t.rolled_back)
        );
    }
    cells(&mut out, &loc.candidates);
    out
}

/// Renders a volume-descent localization.
pub fn format_audio_localization(mac: Mac, loc: &AudioLocalization) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "#localize mac={mac} status=converged inconsistent=false");
    let _ = writeln!(out, "cell_m={}", loc.region.cell_size());
    let _ = writeln!(out, "room_area_m2={:.3}", loc.room_area);
    let _ = writeln!(out, "final_area_m2={:.3}", loc.region.area());
    for (level, area) in &loc.passes {
        let _ = writeln!(out, "pass,{level},{area:.3}");
    }
    cells(&mut out, &loc.region);
    out
}
