//! Parameter sweeps and comparison studies built on the dynamics modules.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{Basis, BasisState};
use crate::effective::{effective_hamiltonian, resonance_detuning, stark_resonance_detuning, EffectiveTwoLevel};
use crate::error::{Error, Result};
use crate::lindblad::{evolve_density, population_series, DensityMatrix};
use crate::params::{ModelParams, Sector, SystemKind};
use crate::unitary::{evolve_amplitudes, uniform_grid, AmplitudeState, IntegratorSettings, TimeSeries};

pub const ENGINE_VERSION: &str = concat!("vrabi ", env!("CARGO_PKG_VERSION"));

/// Output-grid step used for peak detection.
pub const DEFAULT_OUTPUT_STEP: f64 = 0.01;

/// Horizon used outside the dispersive regime.
pub const SHORT_HORIZON: f64 = 25.0;

/// Upper bound on automatically chosen horizons.
pub const MAX_HORIZON: f64 = 2000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    DeltaSmall,
    DeltaCap,
    /// `κ_a = κ_b = κ`; runs the master equation.
    Kappa,
    /// One trajectory sampled at the grid times.
    Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Observable {
    TwoPhotonProbability,
    /// Population of the basis state whose label matches `state`, e.g. `"|g1,g2,1,1>"`.
    Population {
        state: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub kind: SystemKind,
    pub fixed: ModelParams,
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    pub horizon: f64,
    pub observable: Observable,
    #[serde(default = "default_output_step")]
    pub output_step: f64,
}

fn default_output_step() -> f64 {
    DEFAULT_OUTPUT_STEP
}

impl SweepSpec {
    pub fn new(kind: SystemKind, fixed: ModelParams, axis: SweepAxis, grid: Vec<f64>, horizon: f64) -> Self {
        SweepSpec { kind, fixed, axis, grid, horizon, observable: Observable::TwoPhotonProbability, output_step: DEFAULT_OUTPUT_STEP }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        if self.grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("sweep grid contains a non-finite value".into()));
        }
        let up = self.grid.windows(2).all(|w| w[1] > w[0]);
        let down = self.grid.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::Config("sweep grid must be strictly monotone".into()));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Config(format!("horizon must be positive (got {})", self.horizon)));
        }
        if !(self.output_step > 0.0 && self.output_step <= self.horizon) {
            return Err(Error::Config(format!("output step must lie in (0, horizon] (got {})", self.output_step)));
        }
        match self.axis {
            SweepAxis::Kappa if self.grid.iter().any(|&k| k < 0.0) => {
                return Err(Error::Config("damping constants must be non-negative".into()));
            }
            SweepAxis::Time if self.grid.iter().any(|&t| t < 0.0 || t > self.horizon) => {
                return Err(Error::Config("time grid must lie within [0, horizon]".into()));
            }
            _ => {}
        }
        self.fixed.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.resolve_observable(self.uses_master_equation(&self.fixed))?;
        Ok(())
    }

    /// Parameters of the row at `value` on the sweep axis.
    pub fn params_at(&self, value: f64) -> ModelParams {
        match self.axis {
            SweepAxis::DeltaSmall => self.fixed.with_delta_small(value),
            SweepAxis::DeltaCap => self.fixed.with_delta_cap(value),
            SweepAxis::Kappa => self.fixed.with_kappa(value, value),
            SweepAxis::Time => self.fixed,
        }
    }

    fn uses_master_equation(&self, p: &ModelParams) -> bool {
        self.axis == SweepAxis::Kappa || p.kappa_a != 0.0 || p.kappa_b != 0.0
    }

    fn resolve_observable(&self, master: bool) -> Result<BasisState> {
        let sector = if master { Sector::Dissipative } else { Sector::Unitary };
        let basis = Basis::new(self.kind, sector);
        match &self.observable {
            Observable::TwoPhotonProbability => Ok(basis.two_photon_state()),
            Observable::Population { state } => basis.states.iter().find(|s| s.label() == *state).copied().ok_or_else(|| {
                Error::Config(format!("no state labelled {state} in the {} {sector:?} basis; known: {:?}", self.kind, basis.labels()))
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub peak_value: f64,
    pub peak_time: f64,
    pub settings: IntegratorSettings,
    pub series: TimeSeries<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub engine: String,
    pub output_step: f64,
    pub substep_rule: String,
    pub peak_rule: String,
}

impl Provenance {
    fn new(output_step: f64) -> Self {
        Provenance {
            engine: ENGINE_VERSION.to_string(),
            output_step,
            substep_rule: "RK4, h = min(0.001, 0.01 / max(|Delta|, |delta|, 1))".into(),
            peak_rule: "raw grid maximum, earliest time on ties".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
    pub provenance: Provenance,
}

impl SweepResult {
    /// Row with the largest peak value; ties resolve to the first row.
    pub fn best_row(&self) -> Option<&SweepRow> {
        self.rows.iter().fold(None, |best: Option<&SweepRow>, r| match best {
            Some(b) if b.peak_value >= r.peak_value => Some(b),
            _ => Some(r),
        })
    }
}

/// Observable series for one parameter set.
pub fn observable_series(spec: &SweepSpec, params: &ModelParams) -> Result<TimeSeries<f64>> {
    let grid = uniform_grid(spec.horizon, spec.output_step)?;
    let master = spec.uses_master_equation(params);
    let state = spec.resolve_observable(master)?;
    if master {
        let out = evolve_density(spec.kind, params, &grid, &DensityMatrix::initial(spec.kind))?;
        population_series(&out, &state)
    } else {
        let init = AmplitudeState::initial(spec.kind);
        let series = evolve_amplitudes(spec.kind, params, &grid, &init)?;
        let idx = init.basis.index_of(&state)?;
        Ok(series.map(|s| s.amplitudes[idx].norm_sqr()))
    }
}

fn make_row(axis_value: f64, params: &ModelParams, series: TimeSeries<f64>) -> Result<SweepRow> {
    let (peak_time, peak_value) = series.peak().ok_or_else(|| Error::InvalidGrid("empty observable series".into()))?;
    Ok(SweepRow { axis_value, peak_value, peak_time, settings: IntegratorSettings::for_params(params), series })
}

/// Runs every row of `spec` (in parallel) and records the observable peak.
pub fn scan_two_photon(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let rows = if spec.axis == SweepAxis::Time {
        let series = observable_series(spec, &spec.fixed)?;
        spec.grid
            .iter()
            .map(|&t| {
                let k = nearest_index(&series.times, t);
                let v = series.values[k];
                let s = TimeSeries::new(vec![series.times[k]], vec![v])?;
                Ok(SweepRow {
                    axis_value: t,
                    peak_value: v,
                    peak_time: series.times[k],
                    settings: IntegratorSettings::for_params(&spec.fixed),
                    series: s,
                })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        spec.grid
            .par_iter()
            .map(|&x| {
                let p = spec.params_at(x);
                make_row(x, &p, observable_series(spec, &p)?)
            })
            .collect::<Result<Vec<_>>>()?
    };
    Ok(SweepResult { spec: spec.clone(), rows, provenance: Provenance::new(spec.output_step) })
}

fn nearest_index(times: &[f64], t: f64) -> usize {
    let mut best = 0;
    for (k, &s) in times.iter().enumerate() {
        if (s - t).abs() < (times[best] - t).abs() {
            best = k;
        }
    }
    best
}

/// `25`, or `10π/G` (capped at [`MAX_HORIZON`]) in the dispersive regime,
/// where the two-photon transfer is slow.
pub fn default_horizon(kind: SystemKind, params: &ModelParams) -> f64 {
    if !params.is_dispersive() {
        return SHORT_HORIZON;
    }
    match effective_hamiltonian(kind, params) {
        Ok(e) if e.big_g > 0.0 => (10.0 * std::f64::consts::PI / e.big_g).clamp(SHORT_HORIZON, MAX_HORIZON),
        _ => SHORT_HORIZON,
    }
}

/// Exact dynamics against the closed-form effective model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeComparison {
    pub effective: EffectiveTwoLevel,
    pub exact: TimeSeries<f64>,
    pub closed_form: TimeSeries<f64>,
    /// `(time, value)` grid maxima.
    pub exact_peak: (f64, f64),
    pub closed_form_peak: (f64, f64),
    pub peak_value_error: f64,
    pub peak_time_error: f64,
    pub warnings: Vec<String>,
}

/// Compares peak metrics only: the closed form is periodic, the exact
/// series is not.
pub fn envelope_compare(kind: SystemKind, params: &ModelParams, horizon: f64) -> Result<EnvelopeComparison> {
    let mut warnings = Vec::new();
    if !params.is_dispersive() {
        let w = format!(
            "outside the dispersive regime: need |Delta|, |delta| >= {} (got {}, {})",
            5.0 * params.max_coupling(),
            params.delta_cap,
            params.delta_small
        );
        warn!("{w}");
        warnings.push(w);
    }
    let spec = SweepSpec::new(kind, *params, SweepAxis::Time, vec![0.0], horizon);
    spec.validate()?;
    let exact = observable_series(&spec, params)?;
    let effective = effective_hamiltonian(kind, params)?;
    let closed_form = TimeSeries::new(exact.times.clone(), exact.times.iter().map(|&t| effective.probability(t)).collect())?;
    let exact_peak = exact.peak().expect("nonempty grid");
    let closed_form_peak = closed_form.peak().expect("nonempty grid");
    let rel =
        |approx: f64, reference: f64| if reference == 0.0 { (approx - reference).abs() } else { ((approx - reference) / reference).abs() };
    Ok(EnvelopeComparison {
        peak_value_error: rel(closed_form_peak.1, exact_peak.1),
        peak_time_error: rel(closed_form_peak.0, exact_peak.0),
        effective,
        exact,
        closed_form,
        exact_peak,
        closed_form_peak,
        warnings,
    })
}

/// A damping ladder with the late-window/first-window peak ratio per row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DampingSweep {
    pub sweep: SweepResult,
    /// First window is `[0, split]`, late window `(split, horizon]`.
    pub split: f64,
    pub first_peaks: Vec<f64>,
    pub late_peaks: Vec<f64>,
    pub ratios: Vec<f64>,
}

/// Master-equation runs at `κ_a = κ_b = κ` for each entry of `kappas`.
pub fn damping_sweep(kind: SystemKind, params: &ModelParams, kappas: &[f64], horizon: f64, split: f64) -> Result<DampingSweep> {
    if !(split > 0.0 && split < horizon) {
        return Err(Error::Config(format!("window split must lie in (0, horizon) (got {split})")));
    }
    let spec = SweepSpec::new(kind, *params, SweepAxis::Kappa, kappas.to_vec(), horizon);
    let sweep = scan_two_photon(&spec)?;
    let mut first_peaks = Vec::new();
    let mut late_peaks = Vec::new();
    for row in &sweep.rows {
        first_peaks.push(row.series.peak_in(0.0, split).map_or(0.0, |p| p.1));
        late_peaks.push(row.series.times.iter().zip(&row.series.values).filter(|(t, _)| **t > split).map(|(_, v)| *v).fold(0.0, f64::max));
    }
    let ratios = first_peaks.iter().zip(&late_peaks).map(|(f, l)| if *f > 0.0 { l / f } else { 0.0 }).collect();
    Ok(DampingSweep { sweep, split, first_peaks, late_peaks, ratios })
}

/// How the resonance scan is run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceScan {
    pub coarse_step: f64,
    pub fine_step: f64,
    /// Defaults to [`default_horizon`] at the analytic root (or interval midpoint).
    pub horizon: Option<f64>,
    pub output_step: f64,
}

impl Default for ResonanceScan {
    fn default() -> Self {
        ResonanceScan { coarse_step: 0.05, fine_step: 0.005, horizon: None, output_step: DEFAULT_OUTPUT_STEP }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceReport {
    pub kind: SystemKind,
    pub params: ModelParams,
    pub interval: (f64, f64),
    /// Root of `Ω`; absent when `Ω` has no sign change on the interval.
    pub delta_omega: Option<f64>,
    /// Root of the large-detuning condition.
    pub delta_text: Option<f64>,
    /// Argmax of the peak two-photon probability.
    pub delta_scan: f64,
    pub scan_peak: f64,
    pub horizon: f64,
    pub omega_minus_scan: Option<f64>,
    pub text_minus_scan: Option<f64>,
    pub omega_minus_text: Option<f64>,
    /// `"analytic"` when the analytic root exists, `"scan"` otherwise.
    pub authoritative: String,
}

fn grid_between(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round().max(0.0) as usize;
    (0..=n).map(|k| lo + k as f64 * step).collect()
}

/// Analytic, large-detuning and scan-based resonance positions on `interval`.
pub fn resonance_report(kind: SystemKind, params: &ModelParams, interval: (f64, f64)) -> Result<ResonanceReport> {
    resonance_report_with(kind, params, interval, ResonanceScan::default())
}

pub fn resonance_report_with(kind: SystemKind, params: &ModelParams, interval: (f64, f64), scan: ResonanceScan) -> Result<ResonanceReport> {
    let (lo, hi) = if interval.0 <= interval.1 { interval } else { (interval.1, interval.0) };
    if !(hi > lo && scan.coarse_step > 0.0 && scan.fine_step > 0.0 && scan.fine_step <= scan.coarse_step) {
        return Err(Error::Config(format!("bad resonance interval or steps: {interval:?}, {scan:?}")));
    }
    let delta_omega = match resonance_detuning(kind, params, (lo, hi)) {
        Ok(r) => Some(r.delta_small),
        Err(Error::NoRootInInterval { .. }) | Err(Error::Singularity(_)) => None,
        Err(e) => return Err(e),
    };
    let delta_text = stark_resonance_detuning(kind, params, (lo, hi)).ok();
    let horizon = scan.horizon.unwrap_or_else(|| default_horizon(kind, &params.with_delta_small(delta_omega.unwrap_or(0.5 * (lo + hi)))));

    let run = |grid: Vec<f64>| -> Result<SweepResult> {
        let mut spec = SweepSpec::new(kind, *params, SweepAxis::DeltaSmall, grid, horizon);
        spec.output_step = scan.output_step;
        scan_two_photon(&spec)
    };
    let coarse = run(grid_between(lo, hi, scan.coarse_step))?;
    let centre = coarse.best_row().expect("nonempty grid").axis_value;
    let fine_lo = (centre - scan.coarse_step).max(lo);
    let fine_hi = (centre + scan.coarse_step).min(hi);
    let fine = run(grid_between(fine_lo, fine_hi, scan.fine_step))?;
    let best = fine.best_row().expect("nonempty grid");
    let delta_scan = best.axis_value;

    Ok(ResonanceReport {
        kind,
        params: *params,
        interval: (lo, hi),
        delta_omega,
        delta_text,
        delta_scan,
        scan_peak: best.peak_value,
        horizon,
        omega_minus_scan: delta_omega.map(|d| d - delta_scan),
        text_minus_scan: delta_text.map(|d| d - delta_scan),
        omega_minus_text: delta_omega.zip(delta_text).map(|(a, b)| a - b),
        authoritative: if delta_omega.is_some() { "analytic".into() } else { "scan".into() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unitary::two_photon_series;

    const B: SystemKind = SystemKind::BimodalIdentical;

    #[test]
    fn spec_validation() {
        let p = ModelParams::default();
        let ok = SweepSpec::new(B, p, SweepAxis::DeltaSmall, vec![3.0, 3.5], 5.0);
        assert!(ok.validate().is_ok());
        assert!(SweepSpec::new(B, p, SweepAxis::DeltaSmall, vec![4.0, 3.5, 3.0], 5.0).validate().is_ok());
        for bad in [
            SweepSpec::new(B, p, SweepAxis::DeltaSmall, vec![], 5.0),
            SweepSpec::new(B, p, SweepAxis::DeltaSmall, vec![3.0, 3.0], 5.0),
            SweepSpec::new(B, p, SweepAxis::DeltaSmall, vec![3.0, 4.0, 3.5], 5.0),
            SweepSpec::new(B, p, SweepAxis::DeltaSmall, vec![3.0], 0.0),
            SweepSpec::new(B, p, SweepAxis::Kappa, vec![-0.1, 0.0], 5.0),
            SweepSpec::new(B, p, SweepAxis::Time, vec![1.0, 6.0], 5.0),
            SweepSpec { observable: Observable::Population { state: "|nope>".into() }, ..ok.clone() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))), "{bad:?}");
        }
    }

    #[test]
    fn rows_match_direct_runs() {
        let p = ModelParams::default();
        let spec = SweepSpec::new(B, p, SweepAxis::DeltaSmall, vec![3.0, 3.5], 5.0);
        let r = scan_two_photon(&spec).unwrap();
        for row in &r.rows {
            let direct = two_photon_series(B, &p.with_delta_small(row.axis_value), 5.0, DEFAULT_OUTPUT_STEP).unwrap();
            assert_eq!(row.series, direct);
            assert_eq!(Some((row.peak_time, row.peak_value)), direct.peak());
            assert!((0.0..=1.0).contains(&row.peak_value) && (0.0..=5.0).contains(&row.peak_time));
        }
        assert_eq!(r.provenance.engine, ENGINE_VERSION);
    }

    #[test]
    fn population_observable_by_label() {
        let p = ModelParams::default();
        let mut spec = SweepSpec::new(B, p, SweepAxis::Time, vec![0.0, 2.0], 2.0);
        spec.observable = Observable::Population { state: "|e1,e2,0,0>".into() };
        let r = scan_two_photon(&spec).unwrap();
        assert_eq!(r.rows[0].peak_value, 1.0);
        assert!(r.rows[1].peak_value < 1.0);
    }

    #[test]
    fn horizon_defaults() {
        assert_eq!(default_horizon(B, &ModelParams::default()), SHORT_HORIZON);
        let disp = ModelParams::new(1.0, 1.5, -10.0, 9.47);
        let e = effective_hamiltonian(B, &disp).unwrap();
        let h = default_horizon(B, &disp);
        assert_eq!(h, (10.0 * std::f64::consts::PI / e.big_g).min(MAX_HORIZON));
    }

    #[test]
    fn envelope_warns_outside_dispersive_regime() {
        let c = envelope_compare(B, &ModelParams::default(), 5.0).unwrap();
        assert_eq!(c.warnings.len(), 1);
        assert_eq!(c.exact.times, c.closed_form.times);
    }

    #[test]
    fn report_without_analytic_root_uses_scan() {
        let p = ModelParams::default();
        let scan = ResonanceScan { coarse_step: 0.25, fine_step: 0.05, horizon: Some(25.0), output_step: 0.05 };
        let r = resonance_report_with(B, &p, (2.5, 4.5), scan).unwrap();
        assert!(r.delta_omega.is_none());
        assert_eq!(r.authoritative, "scan");
        assert!(r.omega_minus_scan.is_none());
        assert!(r.delta_scan > 2.5 && r.delta_scan < 4.5);
    }

    #[test]
    fn damping_split_is_validated() {
        assert!(matches!(damping_sweep(B, &ModelParams::default(), &[0.0], 10.0, 10.0), Err(Error::Config(_))));
    }
}
