//! Master-equation dynamics with cavity photon loss:
//!
//! `dρ/dt = -i[H, ρ] - Σ_m κ_m (L_m†L_m ρ - 2 L_m ρ L_m† + ρ L_m†L_m)`
//!
//! so that mode `m` loses photons at rate `2κ_m` per photon.

use std::sync::Arc;

use crate::basis::{Basis, BasisState};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, build_jump_operators, JumpOperator};
use crate::linalg::{c, hermitian_eigenvalues, hermiticity_defect, CMatrix, CVector, Rk4Propagator, SparseMatrix, C64, I};
use crate::params::{ModelParams, Sector, SystemKind};
use crate::unitary::{check_grid, IntegratorSettings, TimeSeries};

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub basis: Arc<Basis>,
    pub rho: CMatrix,
    pub time: f64,
}

impl DensityMatrix {
    /// `|e1,e2,0(,0)><e1,e2,0(,0)|` at `t = 0`.
    pub fn initial(kind: SystemKind) -> Self {
        let basis = Arc::new(Basis::new(kind, Sector::Dissipative));
        let state = basis.initial_state();
        Self::pure(basis, &state).expect("initial state is in the basis")
    }

    pub fn pure(basis: Arc<Basis>, state: &BasisState) -> Result<Self> {
        let k = basis.index_of(state)?;
        let mut rho = CMatrix::zeros(basis.len(), basis.len());
        rho[(k, k)] = c(1.0);
        Ok(DensityMatrix { basis, rho, time: 0.0 })
    }

    pub fn new(basis: Arc<Basis>, rho: CMatrix, time: f64) -> Result<Self> {
        if basis.sector != Sector::Dissipative {
            return Err(Error::Config("density matrices live on the dissipative basis".into()));
        }
        if rho.nrows() != basis.len() || rho.ncols() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), found: rho.nrows() });
        }
        Ok(DensityMatrix { basis, rho, time })
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.rho)
    }

    /// Smallest eigenvalue of the Hermitian part of `ρ`.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let herm = (&self.rho + self.rho.adjoint()) * c(0.5);
        Ok(hermitian_eigenvalues(&herm)?[0])
    }

    pub fn invariant_defects(&self) -> Result<InvariantDefects> {
        Ok(InvariantDefects {
            trace: (self.trace() - c(1.0)).norm(),
            hermiticity: self.hermiticity_defect(),
            min_eigenvalue: self.min_eigenvalue()?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantDefects {
    pub trace: f64,
    pub hermiticity: f64,
    pub min_eigenvalue: f64,
}

/// Bounds on the density-matrix invariants; a breach aborts the run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityTolerances {
    pub trace: f64,
    pub hermiticity: f64,
    pub min_eigenvalue: f64,
}

impl DensityTolerances {
    pub const EVOLUTION: DensityTolerances = DensityTolerances { trace: 1e-8, hermiticity: 1e-8, min_eigenvalue: -1e-6 };
    pub const INITIAL: DensityTolerances = DensityTolerances { trace: 1e-10, hermiticity: 1e-10, min_eigenvalue: -1e-10 };

    fn check(&self, d: &InvariantDefects, time: f64) -> Result<()> {
        if d.trace > self.trace || d.hermiticity > self.hermiticity || d.min_eigenvalue < self.min_eigenvalue {
            return Err(Error::DensityInvariant {
                time,
                trace_defect: d.trace,
                hermiticity_defect: d.hermiticity,
                min_eigenvalue: d.min_eigenvalue,
            });
        }
        Ok(())
    }
}

struct Channel {
    rate: f64,
    op: SparseMatrix,
    op_dag: SparseMatrix,
    number: SparseMatrix,
}

/// The master-equation generator, stored as sparse operator factors.
pub struct Liouvillian {
    dim: usize,
    hamiltonian: SparseMatrix,
    channels: Vec<Channel>,
}

impl Liouvillian {
    pub fn new(h: &CMatrix, jumps: &[JumpOperator]) -> Self {
        let channels = jumps
            .iter()
            .filter(|j| j.rate != 0.0)
            .map(|j| {
                let dag = j.matrix.adjoint();
                Channel {
                    rate: j.rate,
                    op: SparseMatrix::from_dense(&j.matrix),
                    number: SparseMatrix::from_dense(&(&dag * &j.matrix)),
                    op_dag: SparseMatrix::from_dense(&dag),
                }
            })
            .collect();
        Liouvillian { dim: h.nrows(), hamiltonian: SparseMatrix::from_dense(h), channels }
    }

    pub fn for_model(kind: SystemKind, params: &ModelParams) -> Result<Self> {
        params.validate()?;
        let basis = Basis::new(kind, Sector::Dissipative);
        let h = build_hamiltonian(kind, params, &basis)?;
        let jumps = build_jump_operators(kind, params, &basis)?;
        Ok(Self::new(&h, &jumps))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn apply_into(&self, rho: &CMatrix, out: &mut CMatrix, s1: &mut CMatrix, s2: &mut CMatrix) {
        self.hamiltonian.mul_dense(rho, s1);
        self.hamiltonian.dense_mul(rho, s2);
        out.copy_from(&(&*s1 - &*s2));
        *out *= -I;
        for ch in &self.channels {
            ch.number.mul_dense(rho, s1);
            ch.number.dense_mul(rho, s2);
            *out -= (&*s1 + &*s2) * c(ch.rate);
            ch.op.mul_dense(rho, s1);
            ch.op_dag.dense_mul(s1, s2);
            *out += &*s2 * c(2.0 * ch.rate);
        }
    }

    /// Matrix of the generator acting on column-major `vec(ρ)`.
    pub fn superoperator(&self) -> CMatrix {
        let n = self.dim;
        let mut s = CMatrix::zeros(n * n, n * n);
        let mut unit = CMatrix::zeros(n, n);
        for j in 0..n * n {
            unit[(j % n, j / n)] = c(1.0);
            let col = self.apply(&unit);
            s.column_mut(j).copy_from_slice(col.as_slice());
            unit[(j % n, j / n)] = c(0.0);
        }
        s
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let n = self.dim;
        let (mut out, mut s1, mut s2) = (CMatrix::zeros(n, n), CMatrix::zeros(n, n), CMatrix::zeros(n, n));
        self.apply_into(rho, &mut out, &mut s1, &mut s2);
        out
    }
}

/// Time derivative of `ρ` under the master equation of `kind`.
pub fn lindblad_rhs(kind: SystemKind, params: &ModelParams, rho: &DensityMatrix) -> Result<CMatrix> {
    if rho.basis.kind != kind || rho.basis.sector != Sector::Dissipative {
        return Err(Error::Config(format!("density matrix basis does not match the {kind} dissipative basis")));
    }
    Ok(Liouvillian::for_model(kind, params)?.apply(&rho.rho))
}

/// RK4 evolution of `rho0` under an arbitrary generator, checking the
/// density-matrix invariants at every grid point.
pub fn evolve_density_with(
    liouvillian: &Liouvillian,
    t_grid: &[f64],
    rho0: &DensityMatrix,
    settings: IntegratorSettings,
    tolerances: DensityTolerances,
) -> Result<Vec<DensityMatrix>> {
    check_grid(t_grid)?;
    if rho0.rho.nrows() != liouvillian.dim {
        return Err(Error::DimensionMismatch { expected: liouvillian.dim, found: rho0.rho.nrows() });
    }
    if t_grid[0] < rho0.time {
        return Err(Error::InvalidGrid(format!("grid starts at {} before the initial time {}", t_grid[0], rho0.time)));
    }
    if !(settings.substep > 0.0 && settings.substep.is_finite()) {
        return Err(Error::InvalidGrid(format!("substep must be positive (got {})", settings.substep)));
    }
    let initial = rho0.invariant_defects()?;
    if DensityTolerances::INITIAL.check(&initial, rho0.time).is_err() {
        return Err(Error::Config(format!("initial density matrix violates its invariants: {initial:?}")));
    }

    let n = liouvillian.dim;
    let mut prop = Rk4Propagator::new(liouvillian.superoperator(), settings.substep);
    let mut v = CVector::from_column_slice(rho0.rho.as_slice());
    let mut t = rho0.time;
    let mut out = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        // `t` is the time actually integrated; it tracks the grid to rounding
        let span = target - t;
        if span > 0.0 {
            let (m, covered) = prop.interval(span);
            v = m * &v;
            t += covered;
        }
        let state = DensityMatrix { basis: Arc::clone(&rho0.basis), rho: CMatrix::from_column_slice(n, n, v.as_slice()), time: target };
        tolerances.check(&state.invariant_defects()?, target)?;
        out.push(state);
    }
    Ok(out)
}

/// Fixed-step RK4 master-equation evolution for `kind`.
pub fn evolve_density(kind: SystemKind, params: &ModelParams, t_grid: &[f64], rho0: &DensityMatrix) -> Result<Vec<DensityMatrix>> {
    if rho0.basis.kind != kind || rho0.basis.sector != Sector::Dissipative {
        return Err(Error::Config(format!("initial density matrix does not live on the {kind} dissipative basis")));
    }
    let l = Liouvillian::for_model(kind, params)?;
    evolve_density_with(&l, t_grid, rho0, IntegratorSettings::for_params(params), DensityTolerances::EVOLUTION)
}

/// Diagonal element `<s|ρ|s>`.
pub fn population(rho: &DensityMatrix, state: &BasisState) -> Result<f64> {
    let k = rho.basis.index_of(state)?;
    let z = rho.rho[(k, k)];
    debug_assert!(z.im.abs() <= 1e-10, "population has imaginary part {}", z.im);
    Ok(z.re)
}

pub fn population_series(series: &[DensityMatrix], state: &BasisState) -> Result<TimeSeries<f64>> {
    let times = series.iter().map(|r| r.time).collect();
    let values = series.iter().map(|r| population(r, state)).collect::<Result<Vec<_>>>()?;
    TimeSeries::new(times, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Atom;
    use crate::linalg::max_abs;
    use crate::unitary::uniform_grid;

    const B: SystemKind = SystemKind::BimodalIdentical;

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut x = seed;
        let mut next = move || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let a = CMatrix::from_fn(n, n, |_, _| C64::new(next(), next()));
        let h = &a + a.adjoint();
        let tr = h.trace();
        h / tr
    }

    #[test]
    fn unitary_limit_is_a_commutator() {
        let p = ModelParams::new(1.0, 1.5, -5.0, 3.5);
        let basis = Arc::new(Basis::new(B, Sector::Dissipative));
        let h = build_hamiltonian(B, &p, &basis).unwrap();
        let psi = nalgebra::DVector::from_fn(13, |i, _| C64::new(0.1 * i as f64, 0.05 * (13 - i) as f64)).normalize();
        let rho = &psi * psi.adjoint();
        let d = lindblad_rhs(B, &p, &DensityMatrix::new(basis, rho.clone(), 0.0).unwrap()).unwrap();
        let want = (&h * &rho - &rho * &h) * (-I);
        assert!(max_abs(&(d - want)) < 1e-13);
    }

    #[test]
    fn superoperator_matches_direct_application() {
        let p = ModelParams::new(1.0, 1.5, -5.0, 3.5).with_kappa(0.1, 0.07);
        for kind in SystemKind::ALL {
            let l = Liouvillian::for_model(kind, &p).unwrap();
            let n = l.dim();
            let s = l.superoperator();
            let rho = random_hermitian(n, 11);
            let direct = l.apply(&rho);
            let via = &s * CVector::from_column_slice(rho.as_slice());
            assert!(max_abs(&(direct - CMatrix::from_column_slice(n, n, via.as_slice()))) < 1e-14);
        }
    }

    #[test]
    fn derivative_is_traceless() {
        let p = ModelParams::new(1.0, 1.5, -5.0, 3.5).with_kappa(0.1, 0.07);
        for kind in SystemKind::ALL {
            let basis = Arc::new(Basis::new(kind, Sector::Dissipative));
            for seed in 0..5 {
                let rho = random_hermitian(basis.len(), seed);
                let d = lindblad_rhs(kind, &p, &DensityMatrix::new(Arc::clone(&basis), rho, 0.0).unwrap()).unwrap();
                assert!(d.trace().norm() <= 1e-12);
                assert!(hermiticity_defect(&d) <= 1e-12);
            }
        }
    }

    /// Dissipator on the maximally mixed state, computed element by element
    /// from photon-number labels.
    #[test]
    fn pure_damping_of_the_mixed_state() {
        let (ka, kb) = (0.1, 0.04);
        let p = ModelParams::new(1.0, 1.5, -5.0, 3.5).with_kappa(ka, kb);
        let basis = Basis::new(B, Sector::Dissipative);
        let jumps = build_jump_operators(B, &p, &basis).unwrap();
        let l = Liouvillian::new(&CMatrix::zeros(13, 13), &jumps);
        let n = basis.len() as f64;
        let d = l.apply(&(CMatrix::identity(13, 13) / c(n)));
        for (i, s) in basis.states.iter().enumerate() {
            let (na, nb) = (s.n_a as f64, s.n_b.unwrap() as f64);
            // feeding from the state with one more photon, if it is in the basis
            let up_a = basis.index_of(&BasisState { n_a: s.n_a + 1, ..*s }).map(|_| na + 1.0).unwrap_or(0.0);
            let up_b = basis.index_of(&BasisState { n_b: Some(s.n_b.unwrap() + 1), ..*s }).map(|_| nb + 1.0).unwrap_or(0.0);
            let want = (-2.0 * ka * na - 2.0 * kb * nb + 2.0 * ka * up_a + 2.0 * kb * up_b) / n;
            assert!((d[(i, i)] - c(want)).norm() < 1e-15, "{s}");
        }
        let off = CMatrix::from_fn(13, 13, |i, j| if i == j { c(0.0) } else { d[(i, j)] });
        assert_eq!(max_abs(&off), 0.0);
        let vac = basis.index_of(&basis.ground_vacuum_state()).unwrap();
        assert!(d[(vac, vac)].re > 0.0);
    }

    #[test]
    fn two_photon_state_decays_monotonically_without_coupling() {
        let kappa = 0.1;
        let p = ModelParams::new(1.0, 1.5, -5.0, 3.5).with_kappa(kappa, kappa);
        let basis = Arc::new(Basis::new(B, Sector::Dissipative));
        let jumps = build_jump_operators(B, &p, &basis).unwrap();
        let l = Liouvillian::new(&CMatrix::zeros(13, 13), &jumps);
        let s = basis.two_photon_state();
        let rho0 = DensityMatrix::pure(Arc::clone(&basis), &s).unwrap();
        let grid = uniform_grid(10.0, 0.5).unwrap();
        let out = evolve_density_with(&l, &grid, &rho0, IntegratorSettings { substep: 1e-3 }, DensityTolerances::EVOLUTION).unwrap();
        let pops = population_series(&out, &s).unwrap();
        for w in pops.values.windows(2) {
            assert!(w[1] < w[0]);
        }
        for (t, v) in pops.times.iter().zip(&pops.values) {
            assert!((v - (-4.0 * kappa * t).exp()).abs() < 1e-12);
        }
        let excited: Vec<f64> =
            out.iter().map(|r| population(r, &BasisState::bimodal(Atom::Ground, Atom::Ground, 1, 0)).unwrap()).collect();
        assert!(excited[0] == 0.0 && excited[1] > 0.0);
    }

    #[test]
    fn population_of_pure_states() {
        let rho = DensityMatrix::initial(SystemKind::SingleModeNonidentical);
        let total: f64 = rho.basis.states.iter().map(|s| population(&rho, s).unwrap()).sum();
        assert_eq!(total, 1.0);
        assert_eq!(population(&rho, &rho.basis.initial_state()).unwrap(), 1.0);
        assert!(matches!(population(&rho, &BasisState::single_mode(Atom::Ground, Atom::Ground, 3)), Err(Error::UnknownState(_))));
    }

    #[test]
    fn rejects_bad_initial_state() {
        let p = ModelParams::new(1.0, 1.5, -5.0, 3.5);
        let mut rho = DensityMatrix::initial(B);
        rho.rho[(0, 0)] = c(0.9);
        assert!(matches!(evolve_density(B, &p, &[0.0, 1.0], &rho), Err(Error::Config(_))));
        let wrong = DensityMatrix::initial(SystemKind::SingleModeNonidentical);
        assert!(evolve_density(B, &p, &[0.0, 1.0], &wrong).is_err());
        assert!(lindblad_rhs(B, &p, &wrong).is_err());
    }

    #[test]
    fn breach_reports_time_and_defects() {
        let p = ModelParams::new(1.0, 1.5, -5.0, 3.5).with_kappa(0.1, 0.1);
        let l = Liouvillian::for_model(B, &p).unwrap();
        let rho0 = DensityMatrix::initial(B);
        let r = evolve_density_with(&l, &[0.0, 5.0], &rho0, IntegratorSettings { substep: 1.0 }, DensityTolerances::EVOLUTION);
        match r {
            Err(Error::DensityInvariant { time, .. }) => assert_eq!(time, 5.0),
            other => panic!("expected an invariant breach, got {:?}", other.map(|v| v.len())),
        }
    }
}
