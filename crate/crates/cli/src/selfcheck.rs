//! Quick oracle-equivalence and invariant checks of the installed engine.

use vrabi::effective::{fourth_order_polynomial, interference_amplitude, resolvent_effective_hamiltonian};
use vrabi::hamiltonian::{build_hamiltonian, excitation_operator, hamiltonian_leakage};
use vrabi::linalg::{c, commutator, hermiticity_defect, max_abs, C64};
use vrabi::lindblad::{evolve_density, population_series, DensityMatrix};
use vrabi::unitary::{evolve_amplitudes, expm_reference, two_photon_probability, uniform_grid, AmplitudeState};
use vrabi::{Basis, ModelParams, Result, Sector, SystemKind};

pub struct Check {
    pub name: &'static str,
    pub detail: String,
    pub passed: bool,
}

fn check(name: &'static str, value: f64, bound: f64) -> Check {
    Check { name, detail: format!("{value:.3e} <= {bound:.0e}"), passed: value <= bound }
}

const DRAWS: [(f64, f64, f64); 4] = [(1.5, -5.0, 3.5), (2.0, -5.0, 2.75), (0.7, 3.0, -2.2), (1.2, -8.0, 8.0)];

fn oracle_equivalence() -> Result<Vec<Check>> {
    let mut worst_amp = 0.0_f64;
    let mut worst_norm = 0.0_f64;
    for kind in SystemKind::ALL {
        for &(g2, dc, ds) in &DRAWS {
            let p = ModelParams::new(1.0, g2, dc, ds);
            let init = AmplitudeState::initial(kind);
            let series = evolve_amplitudes(kind, &p, &uniform_grid(10.0, 1.0)?, &init)?;
            for s in &series.values {
                let exact = expm_reference(kind, &p, s.time, &init)?;
                worst_amp = worst_amp.max((&s.amplitudes - &exact.amplitudes).iter().map(|z| z.norm()).fold(0.0, f64::max));
                worst_norm = worst_norm.max((s.norm_sqr() - 1.0).abs());
            }
        }
    }
    Ok(vec![check("rk4 vs eigendecomposition", worst_amp, 1e-8), check("norm drift", worst_norm, 1e-9)])
}

fn hamiltonian_structure() -> Result<Vec<Check>> {
    let mut herm = 0.0_f64;
    let mut leak = 0.0_f64;
    let mut comm = 0.0_f64;
    for kind in SystemKind::ALL {
        for sector in [Sector::Unitary, Sector::Dissipative] {
            let b = Basis::new(kind, sector);
            for &(g2, dc, ds) in &DRAWS {
                let p = ModelParams::new(1.0, g2, dc, ds);
                let h = build_hamiltonian(kind, &p, &b)?;
                herm = herm.max(hermiticity_defect(&h));
                leak = leak.max(hamiltonian_leakage(kind, &p, &b)?);
                comm = comm.max(max_abs(&commutator(&h, &excitation_operator(&b))));
            }
        }
    }
    Ok(vec![
        check("hamiltonian hermiticity", herm, 1e-12),
        check("truncation closure", leak, 1e-12),
        check("excitation conservation", comm, 1e-12),
    ])
}

fn master_equation() -> Result<Vec<Check>> {
    let mut worst = 0.0_f64;
    let grid = uniform_grid(10.0, 0.5)?;
    for kind in SystemKind::ALL {
        let p = ModelParams::new(1.0, 1.5, -5.0, 3.5);
        let unitary = two_photon_probability(&evolve_amplitudes(kind, &p, &grid, &AmplitudeState::initial(kind))?)?;
        let rho0 = DensityMatrix::initial(kind);
        let out = evolve_density(kind, &p, &grid, &rho0)?;
        let damped = population_series(&out, &rho0.basis.two_photon_state())?;
        let diff = unitary.values.iter().zip(&damped.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(diff);
        // evolve_density aborts on any invariant breach
        evolve_density(kind, &p.with_kappa(0.1, 0.1), &grid, &rho0)?;
    }
    Ok(vec![
        check("zero damping equals unitary run", worst, 1e-6),
        Check { name: "density invariants under damping", detail: "no breach".into(), passed: true },
    ])
}

fn algebra() -> Result<Vec<Check>> {
    let mut shell = 0.0_f64;
    for k in 0..50 {
        let w1 = 1.0 + 0.37 * k as f64;
        let w2 = 2.0 + 0.11 * k as f64;
        let d = C64::new(0.3 + 0.01 * k as f64, -0.2);
        shell = shell.max(interference_amplitude(w1, w2, 0.5 * (w1 + w2), d, c(0.9))?.norm());
    }
    let mut a16 = 0.0_f64;
    for &(g2, dc, _) in &DRAWS {
        let p = ModelParams::new(1.0, g2, dc, -dc);
        let (_, eff) = resolvent_effective_hamiltonian(&p)?;
        a16 = a16.max(max_abs(&(eff.h_eff - fourth_order_polynomial(&p)?)));
    }
    Ok(vec![check("two-path cancellation on shell", shell, 0.0), check("resolvent vs fourth-order polynomial", a16, 1e-12)])
}

type Group = (&'static str, fn() -> Result<Vec<Check>>);

pub fn run() -> Vec<Check> {
    let groups: [Group; 4] = [
        ("oracle equivalence", oracle_equivalence),
        ("hamiltonian structure", hamiltonian_structure),
        ("master equation", master_equation),
        ("effective-model algebra", algebra),
    ];
    let mut checks = Vec::new();
    for (name, f) in groups {
        match f() {
            Ok(c) => checks.extend(c),
            Err(e) => checks.push(Check { name, detail: e.to_string(), passed: false }),
        }
    }
    checks
}
