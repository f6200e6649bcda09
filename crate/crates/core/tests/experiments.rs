use proptest::prelude::*;
use vrabi::effective::{interference_amplitude, resonance_detuning};
use vrabi::experiments::{damping_sweep, envelope_compare, resonance_report_with, scan_two_photon, ResonanceScan, SweepAxis, SweepSpec};
use vrabi::linalg::C64;
use vrabi::unitary::two_photon_series;
use vrabi::{ModelParams, SystemKind};

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|k| lo + k as f64 * step).collect()
}

fn argmax(kind: SystemKind, p: ModelParams, values: Vec<f64>, horizon: f64) -> (f64, f64) {
    let r = scan_two_photon(&SweepSpec::new(kind, p, SweepAxis::DeltaSmall, values, horizon)).unwrap();
    let best = r.best_row().unwrap();
    (best.axis_value, best.peak_value)
}

#[test]
fn stark_approximation_improves_with_detuning() {
    let mut gaps = Vec::new();
    for dc in [-10.0, -20.0, -40.0] {
        let p = ModelParams::new(1.0, 1.5, dc, 0.0);
        let root = resonance_detuning(SystemKind::BimodalIdentical, &p, (-dc - 2.0, -dc + 2.0)).unwrap();
        gaps.push((root.delta_small - root.stark_approximation.unwrap()).abs());
    }
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn scan_argmax_is_stable_under_grid_refinement() {
    let p = ModelParams::new(1.0, 1.5, -5.0, 0.0);
    let kind = SystemKind::BimodalIdentical;
    let (coarse, peak) = argmax(kind, p, grid(2.5, 4.5, 0.05), 25.0);
    let (fine, _) = argmax(kind, p, grid(2.5, 4.5, 0.025), 25.0);
    assert!((coarse - fine).abs() <= 0.05, "{coarse} vs {fine}");
    assert!(peak > 0.85, "{peak}");
}

#[test]
fn single_mode_resonance_sits_below_minus_delta() {
    let p = ModelParams::new(1.0, 2.0, -5.0, 0.0);
    let (at, _) = argmax(SystemKind::SingleModeNonidentical, p, grid(2.0, 6.0, 0.05), 25.0);
    assert!(at < 5.0, "{at}");
}

#[test]
fn moderate_detuning_has_no_analytic_root() {
    let p = ModelParams::new(1.0, 1.5, -5.0, 0.0);
    let scan = ResonanceScan { output_step: 0.05, ..ResonanceScan::default() };
    let r = resonance_report_with(SystemKind::BimodalIdentical, &p, (2.5, 4.5), scan).unwrap();
    assert!(r.delta_omega.is_none());
    assert_eq!(r.authoritative, "scan");
    assert!((r.delta_scan - 3.55).abs() < 0.05, "{}", r.delta_scan);
}

#[test]
fn equal_couplings_put_both_roots_at_minus_delta_and_suppress_it() {
    let p = ModelParams::new(1.0, 1.0, -10.0, 0.0);
    let kind = SystemKind::BimodalIdentical;
    let scan = ResonanceScan { horizon: Some(100.0), output_step: 0.05, ..ResonanceScan::default() };
    let r = resonance_report_with(kind, &p, (8.0, 12.0), scan).unwrap();
    assert!((r.delta_omega.unwrap() - 10.0).abs() < 1e-9);
    assert!((r.delta_text.unwrap() - 10.0).abs() < 1e-9);
    let (_, at_root) = argmax(kind, p, vec![10.0], 100.0);
    assert!(at_root < 1e-2, "{at_root}");
}

#[test]
fn default_report_carries_all_three_positions() {
    let p = ModelParams::new(1.0, 1.5, -10.0, 0.0);
    let scan = ResonanceScan { horizon: Some(600.0), output_step: 0.05, ..ResonanceScan::default() };
    let r = resonance_report_with(SystemKind::BimodalIdentical, &p, (9.2, 9.8), scan).unwrap();
    assert_eq!(r.authoritative, "analytic");
    assert!((r.omega_minus_scan.unwrap()).abs() < 0.05);
    assert!(r.omega_minus_text.unwrap().abs() > 1e-3);
}

#[test]
fn closed_form_peak_within_ten_percent() {
    let p = ModelParams::new(1.0, 1.5, -10.0, 9.470);
    let cmp = envelope_compare(SystemKind::BimodalIdentical, &p, 600.0).unwrap();
    assert!(cmp.peak_value_error <= 0.10, "{}", cmp.peak_value_error);
    assert!(cmp.warnings.is_empty(), "{:?}", cmp.warnings);
}

#[test]
fn undamped_row_of_damping_sweep_is_unitary() {
    let p = ModelParams::new(1.0, 1.5, -5.0, 3.5);
    let kind = SystemKind::BimodalIdentical;
    let d = damping_sweep(kind, &p, &[0.0, 0.1], 20.0, 10.0).unwrap();
    let unitary = two_photon_series(kind, &p, 20.0, d.sweep.spec.output_step).unwrap();
    let row = &d.sweep.rows[0].series;
    assert_eq!(row.times.len(), unitary.times.len());
    let diff = row.values.iter().zip(&unitary.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff <= 1e-6, "{diff:e}");
    assert!(d.ratios[1] < d.ratios[0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn two_paths_cancel_on_the_shell(w1 in -50.0..50.0f64, w2 in -50.0..50.0f64, re in -3.0..3.0f64, im in -3.0..3.0f64) {
        let w = 0.5 * (w1 + w2);
        prop_assume!((w1 - w).abs() > 1e-6);
        let m = interference_amplitude(w1, w2, w, C64::new(re, im), C64::new(im, re)).unwrap();
        prop_assert_eq!(m, C64::new(0.0, 0.0));
    }

    #[test]
    fn off_shell_amplitude_matches_two_path_sum(w1 in 1.0..5.0f64, w2 in -5.0..-1.0f64, w in -0.5..0.5f64, d in 0.1..2.0f64) {
        let m = interference_amplitude(w1, w2, w, C64::new(d, 0.0), C64::new(1.0, d)).unwrap();
        let direct = C64::new(d, 0.0) * C64::new(1.0, d) * (1.0 / (w1 - w) + 1.0 / (w2 - w));
        prop_assert!((m - direct).norm() <= 1e-12 * (1.0 + direct.norm()));
    }
}
