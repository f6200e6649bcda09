//! Pure-state dynamics: fixed-step RK4 integration of the amplitude
//! equations and an eigendecomposition propagator used as an oracle.

use std::sync::Arc;

use serde::Serialize;

use crate::basis::{Basis, BasisState};
use crate::error::{Error, Result};
use crate::hamiltonian::build_hamiltonian;
use crate::linalg::{c, hermitian_eigen, CMatrix, CVector, Rk4Propagator, C64, I};
use crate::params::{ModelParams, Sector, SystemKind};

/// Norm drift above this aborts an amplitude integration.
pub const NORM_ABORT: f64 = 1e-6;

/// Fixed RK4 substep in units of `1/g1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorSettings {
    pub substep: f64,
}

impl IntegratorSettings {
    /// `h = min(3e-4, 3e-3 / max(|Δ|, |δ|, 2 g1, 2 g2, 1))`.
    ///
    /// The coupling terms matter: at `g2 ≈ 3 g1` a detuning-only rule leaves
    /// RK4 phase errors above `1e-8` within `g1 t = 20`.
    pub fn for_params(p: &ModelParams) -> Self {
        let scale = [p.delta_cap.abs(), p.delta_small.abs(), 2.0 * p.g1.abs(), 2.0 * p.g2.abs(), 1.0].into_iter().fold(0.0, f64::max);
        IntegratorSettings { substep: (3e-3 / scale).min(3e-4) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeState {
    pub basis: Arc<Basis>,
    pub amplitudes: CVector,
    pub time: f64,
}

impl AmplitudeState {
    /// Both atoms excited, cavity empty, at `t = 0`.
    pub fn initial(kind: SystemKind) -> Self {
        let basis = Arc::new(Basis::new(kind, Sector::Unitary));
        let mut amplitudes = CVector::zeros(basis.len());
        amplitudes[0] = c(1.0);
        AmplitudeState { basis, amplitudes, time: 0.0 }
    }

    pub fn new(basis: Arc<Basis>, amplitudes: CVector, time: f64) -> Result<Self> {
        if basis.sector != Sector::Unitary {
            return Err(Error::Config("amplitude states live on the unitary basis".into()));
        }
        if amplitudes.len() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), found: amplitudes.len() });
        }
        Ok(AmplitudeState { basis, amplitudes, time })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn probability(&self, state: &BasisState) -> Result<f64> {
        Ok(self.amplitudes[self.basis.index_of(state)?].norm_sqr())
    }
}

/// Values sampled on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries<T> {
    pub times: Vec<f64>,
    pub values: Vec<T>,
}

impl<T> TimeSeries<T> {
    pub fn new(times: Vec<f64>, values: Vec<T>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), found: values.len() });
        }
        check_grid(&times)?;
        Ok(TimeSeries { times, values })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> TimeSeries<U> {
        TimeSeries { times: self.times.clone(), values: self.values.iter().map(f).collect() }
    }
}

impl TimeSeries<f64> {
    /// Raw grid maximum as `(time, value)`; ties resolve to the earliest time.
    pub fn peak(&self) -> Option<(f64, f64)> {
        self.peak_in(f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Maximum over grid points with `lo <= t <= hi`.
    pub fn peak_in(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64)> = None;
        for (&t, &v) in self.times.iter().zip(&self.values) {
            if t < lo || t > hi {
                continue;
            }
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((t, v));
            }
        }
        best
    }
}

pub fn check_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidGrid("empty time grid".into()));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidGrid("non-finite time".into()));
    }
    if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(format!("times not strictly increasing at {} -> {}", w[0], w[1])));
    }
    Ok(())
}

/// `0, dt, 2 dt, ..., horizon` (last point rounded to the nearest multiple of `dt`).
pub fn uniform_grid(horizon: f64, dt: f64) -> Result<Vec<f64>> {
    if !(horizon > 0.0 && dt > 0.0 && horizon.is_finite() && dt.is_finite()) {
        return Err(Error::InvalidGrid(format!("need horizon > 0 and dt > 0 (got {horizon}, {dt})")));
    }
    let n = (horizon / dt).round() as usize;
    Ok((0..=n).map(|k| k as f64 * dt).collect())
}

fn unitary_hamiltonian(kind: SystemKind, params: &ModelParams) -> Result<CMatrix> {
    params.validate()?;
    build_hamiltonian(kind, params, &Basis::new(kind, Sector::Unitary))
}

/// `dc/dt = -i H c` on the unitary basis of `kind`.
pub fn amplitude_rhs(kind: SystemKind, params: &ModelParams, amplitudes: &CVector) -> Result<CVector> {
    let h = unitary_hamiltonian(kind, params)?;
    if amplitudes.len() != h.nrows() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), found: amplitudes.len() });
    }
    Ok((h * amplitudes) * (-I))
}

/// Integrates `dc/dt = -i H c` for an arbitrary Hermitian `h` onto `t_grid`.
///
/// Each grid interval is split into the smallest number of equal substeps
/// not longer than `settings.substep`.
pub fn evolve_with_hamiltonian(
    h: &CMatrix,
    t_grid: &[f64],
    initial: &AmplitudeState,
    settings: IntegratorSettings,
) -> Result<TimeSeries<AmplitudeState>> {
    check_grid(t_grid)?;
    if h.nrows() != initial.amplitudes.len() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), found: initial.amplitudes.len() });
    }
    if t_grid[0] < initial.time {
        return Err(Error::InvalidGrid(format!("grid starts at {} before the initial time {}", t_grid[0], initial.time)));
    }
    if !(settings.substep > 0.0 && settings.substep.is_finite()) {
        return Err(Error::InvalidGrid(format!("substep must be positive (got {})", settings.substep)));
    }
    let norm0 = initial.norm_sqr();
    if (norm0 - 1.0).abs() > 1e-12 {
        return Err(Error::Config(format!("initial state not normalized (|c|^2 = {norm0})")));
    }

    let mut prop = Rk4Propagator::new(h * (-I), settings.substep);
    let mut y = initial.amplitudes.clone();
    let mut t = initial.time;
    let mut values = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        // `t` is the time actually integrated; it tracks the grid to rounding
        let span = target - t;
        if span > 0.0 {
            let (m, covered) = prop.interval(span);
            y = m * &y;
            t += covered;
        }
        let norm = y.norm_squared();
        if (norm - 1.0).abs() > NORM_ABORT {
            return Err(Error::NormDrift { time: target, drift: norm - 1.0 });
        }
        values.push(AmplitudeState { basis: Arc::clone(&initial.basis), amplitudes: y.clone(), time: target });
    }
    Ok(TimeSeries { times: t_grid.to_vec(), values })
}

/// Fixed-step RK4 evolution of the amplitude equations of `kind`.
pub fn evolve_amplitudes(
    kind: SystemKind,
    params: &ModelParams,
    t_grid: &[f64],
    initial: &AmplitudeState,
) -> Result<TimeSeries<AmplitudeState>> {
    evolve_amplitudes_with(kind, params, t_grid, initial, IntegratorSettings::for_params(params))
}

pub fn evolve_amplitudes_with(
    kind: SystemKind,
    params: &ModelParams,
    t_grid: &[f64],
    initial: &AmplitudeState,
    settings: IntegratorSettings,
) -> Result<TimeSeries<AmplitudeState>> {
    if initial.basis.kind != kind {
        return Err(Error::Config(format!("initial state belongs to {}, not {kind}", initial.basis.kind)));
    }
    let h = unitary_hamiltonian(kind, params)?;
    evolve_with_hamiltonian(&h, t_grid, initial, settings)
}

/// `exp(-i H t)` through a single Hermitian eigendecomposition.
#[derive(Debug, Clone)]
pub struct EigenPropagator {
    pub energies: Vec<f64>,
    vectors: CMatrix,
}

impl EigenPropagator {
    pub fn new(h: &CMatrix) -> Result<Self> {
        let (energies, vectors) = hermitian_eigen(h)?;
        Ok(EigenPropagator { energies, vectors })
    }

    /// `exp(-i H dt) c0`.
    pub fn apply(&self, dt: f64, c0: &CVector) -> CVector {
        let mut coeffs = self.vectors.adjoint() * c0;
        for (z, &e) in coeffs.iter_mut().zip(&self.energies) {
            *z *= C64::from_polar(1.0, -e * dt);
        }
        &self.vectors * coeffs
    }
}

/// Exact propagation of `initial` to time `t` by diagonalizing `H`.
pub fn expm_reference(kind: SystemKind, params: &ModelParams, t: f64, initial: &AmplitudeState) -> Result<AmplitudeState> {
    if initial.basis.kind != kind {
        return Err(Error::Config(format!("initial state belongs to {}, not {kind}", initial.basis.kind)));
    }
    let h = unitary_hamiltonian(kind, params)?;
    let prop = EigenPropagator::new(&h)?;
    Ok(AmplitudeState { basis: Arc::clone(&initial.basis), amplitudes: prop.apply(t - initial.time, &initial.amplitudes), time: t })
}

/// `|c4(t)|^2`: population of the cooperative two-photon state.
pub fn two_photon_probability(series: &TimeSeries<AmplitudeState>) -> Result<TimeSeries<f64>> {
    let Some(first) = series.values.first() else {
        return Ok(TimeSeries { times: vec![], values: vec![] });
    };
    let basis = &first.basis;
    let target = basis.two_photon_state();
    let idx = basis.index_of(&target)?;
    Ok(series.map(|s| s.amplitudes[idx].norm_sqr()))
}

/// Convenience: `|c4|^2` on a uniform grid from the default initial state.
pub fn two_photon_series(kind: SystemKind, params: &ModelParams, horizon: f64, dt: f64) -> Result<TimeSeries<f64>> {
    let grid = uniform_grid(horizon, dt)?;
    let series = evolve_amplitudes(kind, params, &grid, &AmplitudeState::initial(kind))?;
    two_photon_probability(&series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Atom;

    fn headline() -> ModelParams {
        ModelParams::new(1.0, 1.5, -5.0, 3.5)
    }

    #[test]
    fn substep_policy() {
        assert_eq!(IntegratorSettings::for_params(&headline()).substep, 3e-4);
        assert!((IntegratorSettings::for_params(&ModelParams::new(1.0, 1.0, -20.0, 5.0)).substep - 1.5e-4).abs() < 1e-18);
        assert!((IntegratorSettings::for_params(&ModelParams::new(1.0, 7.5, -2.0, 5.0)).substep - 2e-4).abs() < 1e-18);
    }

    #[test]
    fn rhs_initial_columns() {
        let p = ModelParams::new(1.0, 1.5, -5.0, 3.5);
        let s2 = 2f64.sqrt();
        let d = amplitude_rhs(SystemKind::BimodalIdentical, &p, &AmplitudeState::initial(SystemKind::BimodalIdentical).amplitudes).unwrap();
        let want = [c(0.0), -I * s2, -I * s2 * 1.5, c(0.0), c(0.0), c(0.0)];
        assert!(d.iter().zip(want).all(|(a, b)| (a - b).norm() < 1e-14));

        let p = ModelParams::new(1.0, 2.0, -5.0, 3.0);
        let d =
            amplitude_rhs(SystemKind::SingleModeNonidentical, &p, &AmplitudeState::initial(SystemKind::SingleModeNonidentical).amplitudes)
                .unwrap();
        let want = [c(0.0), -I * 2.0, -I * 1.0, c(0.0)];
        assert!(d.iter().zip(want).all(|(a, b)| (a - b).norm() < 1e-14));
    }

    #[test]
    fn rhs_dimension_mismatch() {
        let r = amplitude_rhs(SystemKind::SingleModeNonidentical, &headline(), &CVector::zeros(6));
        assert!(matches!(r, Err(Error::DimensionMismatch { expected: 4, found: 6 })));
    }

    #[test]
    fn grid_validation() {
        let init = AmplitudeState::initial(SystemKind::BimodalIdentical);
        for bad in [vec![], vec![0.0, 0.0], vec![0.0, 2.0, 1.0], vec![0.0, f64::NAN]] {
            assert!(matches!(evolve_amplitudes(SystemKind::BimodalIdentical, &headline(), &bad, &init), Err(Error::InvalidGrid(_))));
        }
        let mut late = init.clone();
        late.time = 1.0;
        assert!(evolve_amplitudes(SystemKind::BimodalIdentical, &headline(), &[0.5, 2.0], &late).is_err());
        let bad_settings = IntegratorSettings { substep: 0.0 };
        assert!(evolve_amplitudes_with(SystemKind::BimodalIdentical, &headline(), &[0.0, 1.0], &init, bad_settings).is_err());
    }

    #[test]
    fn unnormalized_initial_rejected() {
        let mut init = AmplitudeState::initial(SystemKind::BimodalIdentical);
        init.amplitudes[0] = c(1.1);
        assert!(evolve_amplitudes(SystemKind::BimodalIdentical, &headline(), &[0.0, 1.0], &init).is_err());
    }

    #[test]
    fn time_zero_returns_initial() {
        for kind in SystemKind::ALL {
            let init = AmplitudeState::initial(kind);
            let s = evolve_amplitudes(kind, &headline(), &[0.0], &init).unwrap();
            assert_eq!(s.values[0].amplitudes, init.amplitudes);
            let e = expm_reference(kind, &headline(), 0.0, &init).unwrap();
            assert!((e.amplitudes - &init.amplitudes).norm() < 1e-14);
            assert_eq!(two_photon_probability(&s).unwrap().values[0], 0.0);
        }
    }

    #[test]
    fn norm_drift_aborts_with_diagnostics() {
        // a huge step makes RK4 amplify the fast components
        let init = AmplitudeState::initial(SystemKind::BimodalIdentical);
        let r = evolve_amplitudes_with(SystemKind::BimodalIdentical, &headline(), &[0.0, 50.0], &init, IntegratorSettings { substep: 0.5 });
        match r {
            Err(Error::NormDrift { time, drift }) => {
                assert_eq!(time, 50.0);
                assert!(drift.abs() > NORM_ABORT);
            }
            other => panic!("expected norm drift, got {other:?}"),
        }
    }

    #[test]
    fn expm_is_unitary() {
        let init = AmplitudeState::initial(SystemKind::BimodalIdentical);
        for t in [0.3, 7.0, 55.5, 400.0] {
            let s = expm_reference(SystemKind::BimodalIdentical, &headline(), t, &init).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn probability_lookup() {
        let init = AmplitudeState::initial(SystemKind::SingleModeNonidentical);
        assert_eq!(init.probability(&init.basis.initial_state()).unwrap(), 1.0);
        assert!(init.probability(&BasisState::single_mode(Atom::Ground, Atom::Ground, 0)).is_err());
    }

    #[test]
    fn peak_picks_earliest_maximum() {
        let s = TimeSeries::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.1, 0.5, 0.5, 0.2]).unwrap();
        assert_eq!(s.peak(), Some((1.0, 0.5)));
        assert_eq!(s.peak_in(2.5, 10.0), Some((3.0, 0.2)));
        assert_eq!(s.peak_in(10.0, 11.0), None);
    }
}
