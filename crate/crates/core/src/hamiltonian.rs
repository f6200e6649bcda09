//! Rotating-frame Hamiltonians, photon-loss operators and the bare spectrum.
//!
//! Both Hamiltonians are assembled from their action on labeled product
//! states, so the same code fills the symmetrized 6-state sector and the
//! 13-state product sector of the bimodal system.
//!
//! Bimodal (frame rotating at the atomic frequency):
//! `H = -Δ a†a - δ b†b + Σ_i [ σ_i⁺ (g1 a + g2 b) + h.c. ]`.
//!
//! Single mode (frame rotating with the total excitation number):
//! `H = -Δ |g1><g1| - δ |g2><g2| + g1 (σ_1⁺ a + h.c.) + g2 (σ_2⁺ a + h.c.)`.

use std::collections::HashMap;

use serde::Serialize;

use crate::basis::{Atom, Basis, BasisState, ProductState};
use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigenvalues, CMatrix};
use crate::params::{ModelParams, Sector, SystemKind};

/// Action of `H` on a product state, as a list of (target, amplitude).
pub(crate) fn apply_hamiltonian(kind: SystemKind, p: &ModelParams, s: &ProductState) -> Vec<(ProductState, f64)> {
    let mut out = Vec::with_capacity(9);
    let diag = match kind {
        SystemKind::BimodalIdentical => -p.delta_cap * s.n[0] as f64 - p.delta_small * s.n[1] as f64,
        SystemKind::SingleModeNonidentical => {
            let mut e = 0.0;
            if s.atoms[0] == Atom::Ground {
                e -= p.delta_cap;
            }
            if s.atoms[1] == Atom::Ground {
                e -= p.delta_small;
            }
            e
        }
    };
    if diag != 0.0 {
        out.push((*s, diag));
    }
    // (atom, mode, coupling) channels
    let channels: &[(usize, usize, f64)] = match kind {
        SystemKind::BimodalIdentical => &[(0, 0, p.g1), (0, 1, p.g2), (1, 0, p.g1), (1, 1, p.g2)],
        SystemKind::SingleModeNonidentical => &[(0, 0, p.g1), (1, 0, p.g2)],
    };
    for &(atom, mode, g) in channels {
        let mut t = *s;
        match s.atoms[atom] {
            Atom::Excited => {
                t.atoms[atom] = Atom::Ground;
                t.n[mode] += 1;
                out.push((t, g * (t.n[mode] as f64).sqrt()));
            }
            Atom::Ground if s.n[mode] > 0 => {
                t.atoms[atom] = Atom::Excited;
                t.n[mode] -= 1;
                out.push((t, g * (s.n[mode] as f64).sqrt()));
            }
            Atom::Ground => {}
        }
    }
    out
}

/// Photon annihilation in `mode` (0 = a, 1 = b).
pub(crate) fn apply_lowering(mode: usize, s: &ProductState) -> Option<(ProductState, f64)> {
    if s.n[mode] == 0 {
        return None;
    }
    let mut t = *s;
    t.n[mode] -= 1;
    Some((t, (s.n[mode] as f64).sqrt()))
}

type ProductVector = HashMap<ProductState, f64>;

fn apply_to_basis_state<F>(state: &BasisState, op: F) -> ProductVector
where
    F: Fn(&ProductState) -> Vec<(ProductState, f64)>,
{
    let mut out = ProductVector::new();
    for (comp, w) in state.components() {
        for (t, v) in op(&comp) {
            *out.entry(t).or_insert(0.0) += w * v;
        }
    }
    out
}

/// Matrix of `op` on `basis` plus the norm of the part of `op|j>` that
/// leaves the span of the basis (maximized over `j`).
fn matrix_with_leakage<F>(basis: &Basis, op: F) -> (CMatrix, f64)
where
    F: Fn(&ProductState) -> Vec<(ProductState, f64)>,
{
    let n = basis.len();
    let mut m = CMatrix::zeros(n, n);
    let mut leak = 0.0_f64;
    for (j, sj) in basis.states.iter().enumerate() {
        let mut image = apply_to_basis_state(sj, &op);
        for (i, si) in basis.states.iter().enumerate() {
            let overlap: f64 = si.components().iter().map(|(p, w)| w * image.get(p).copied().unwrap_or(0.0)).sum();
            m[(i, j)] = c(overlap);
            for (p, w) in si.components() {
                if let Some(v) = image.get_mut(&p) {
                    *v -= overlap * w;
                }
            }
        }
        let residual: f64 = image.values().map(|v| v * v).sum::<f64>().sqrt();
        leak = leak.max(residual);
    }
    (m, leak)
}

fn check_kind(kind: SystemKind, basis: &Basis) -> Result<()> {
    if basis.kind != kind {
        return Err(Error::Config(format!("basis built for {} used with {kind}", basis.kind)));
    }
    Ok(())
}

/// Rotating-frame Hamiltonian on `basis`, in units of `hbar * g1`.
pub fn build_hamiltonian(kind: SystemKind, params: &ModelParams, basis: &Basis) -> Result<CMatrix> {
    check_kind(kind, basis)?;
    Ok(matrix_with_leakage(basis, |s| apply_hamiltonian(kind, params, s)).0)
}

/// Largest norm of `H|j>` outside the span of `basis`; zero for a closed basis.
pub fn hamiltonian_leakage(kind: SystemKind, params: &ModelParams, basis: &Basis) -> Result<f64> {
    check_kind(kind, basis)?;
    Ok(matrix_with_leakage(basis, |s| apply_hamiltonian(kind, params, s)).1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CavityMode {
    A,
    B,
}

/// A photon-loss channel entering the dissipator as
/// `-rate (L†L ρ - 2 L ρ L† + ρ L†L)`.
#[derive(Debug, Clone)]
pub struct JumpOperator {
    pub mode: CavityMode,
    pub rate: f64,
    pub matrix: CMatrix,
}

/// Annihilation operators for every cavity mode with their decay constants.
pub fn build_jump_operators(kind: SystemKind, params: &ModelParams, basis: &Basis) -> Result<Vec<JumpOperator>> {
    check_kind(kind, basis)?;
    if basis.sector != Sector::Dissipative {
        return Err(Error::Config("jump operators need the dissipative basis".into()));
    }
    let modes: &[(CavityMode, f64)] = match kind {
        SystemKind::BimodalIdentical => &[(CavityMode::A, params.kappa_a), (CavityMode::B, params.kappa_b)],
        SystemKind::SingleModeNonidentical => &[(CavityMode::A, params.kappa_a)],
    };
    Ok(modes
        .iter()
        .enumerate()
        .map(|(k, &(mode, rate))| JumpOperator {
            mode,
            rate,
            matrix: matrix_with_leakage(basis, |s| apply_lowering(k, s).into_iter().collect()).0,
        })
        .collect())
}

/// Largest out-of-basis norm produced by any photon-loss operator.
pub fn jump_leakage(kind: SystemKind, basis: &Basis) -> f64 {
    (0..kind.mode_count()).map(|k| matrix_with_leakage(basis, |s| apply_lowering(k, s).into_iter().collect()).1).fold(0.0, f64::max)
}

/// Diagonal excitation-number operator on `basis`.
pub fn excitation_operator(basis: &Basis) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(basis.len(), basis.states.iter().map(|s| c(s.excitation() as f64))))
}

/// Columns are the unitary-sector states written in the dissipative
/// product basis of the same kind.
pub fn unitary_embedding(kind: SystemKind) -> CMatrix {
    let unitary = Basis::new(kind, Sector::Unitary);
    let product = Basis::new(kind, Sector::Dissipative);
    let mut w = CMatrix::zeros(product.len(), unitary.len());
    for (j, s) in unitary.states.iter().enumerate() {
        for (p, amp) in s.components() {
            let i = product.product_index(&p).expect("unitary states live inside the dissipative basis");
            w[(i, j)] = c(amp);
        }
    }
    w
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumLines {
    /// Eigenvalues of the bimodal 6x6 Hamiltonian, ascending.
    pub eigenvalues: Vec<f64>,
    /// All pairwise positive differences, ascending.
    pub lines: Vec<f64>,
}

/// The six dressed energies of the bimodal unitary sector and the fifteen
/// transition frequencies between them.
pub fn spectrum_lines(params: &ModelParams) -> Result<SpectrumLines> {
    let kind = SystemKind::BimodalIdentical;
    let basis = Basis::new(kind, Sector::Unitary);
    let h = build_hamiltonian(kind, params, &basis)?;
    let eigenvalues = hermitian_eigenvalues(&h)?;
    let mut lines = Vec::with_capacity(15);
    for i in 0..eigenvalues.len() {
        for j in (i + 1)..eigenvalues.len() {
            lines.push((eigenvalues[j] - eigenvalues[i]).abs());
        }
    }
    lines.sort_by(f64::total_cmp);
    Ok(SpectrumLines { eigenvalues, lines })
}
