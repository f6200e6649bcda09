//! Labeled atom–photon states and the closed bases the dynamics runs on.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Sector, SystemKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Atom {
    Excited,
    Ground,
}

impl Atom {
    /// Index used for density-matrix I/O: 0 is excited, 1 is ground.
    pub fn io_index(self) -> u8 {
        match self {
            Atom::Excited => 0,
            Atom::Ground => 1,
        }
    }

    fn letter(self) -> char {
        match self {
            Atom::Excited => 'e',
            Atom::Ground => 'g',
        }
    }
}

/// One basis vector. `symmetrized` marks the symmetric atomic combination
/// `(|e1,g2> + |g1,e2>)/sqrt(2)`, in which case `atom1`/`atom2` are stored as
/// `Excited`/`Ground`. `n_b` is `None` for the single-mode system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisState {
    pub atom1: Atom,
    pub atom2: Atom,
    pub symmetrized: bool,
    pub n_a: u8,
    pub n_b: Option<u8>,
}

/// A plain product state; single-mode states keep `n[1] == 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) struct ProductState {
    pub atoms: [Atom; 2],
    pub n: [u8; 2],
}

impl BasisState {
    pub fn bimodal(atom1: Atom, atom2: Atom, n_a: u8, n_b: u8) -> Self {
        BasisState { atom1, atom2, symmetrized: false, n_a, n_b: Some(n_b) }
    }

    pub fn single_mode(atom1: Atom, atom2: Atom, n: u8) -> Self {
        BasisState { atom1, atom2, symmetrized: false, n_a: n, n_b: None }
    }

    /// `(|e1,g2> + |g1,e2>)/sqrt(2) |n_a, n_b>`.
    pub fn symmetric(n_a: u8, n_b: u8) -> Self {
        BasisState { atom1: Atom::Excited, atom2: Atom::Ground, symmetrized: true, n_a, n_b: Some(n_b) }
    }

    /// Excited-atom count plus total photon number.
    pub fn excitation(&self) -> u32 {
        let atoms = [self.atom1, self.atom2].iter().filter(|a| **a == Atom::Excited).count() as u32;
        let atoms = if self.symmetrized { 1 } else { atoms };
        atoms + self.n_a as u32 + self.n_b.unwrap_or(0) as u32
    }

    pub(crate) fn components(&self) -> Vec<(ProductState, f64)> {
        let n = [self.n_a, self.n_b.unwrap_or(0)];
        if self.symmetrized {
            let w = std::f64::consts::FRAC_1_SQRT_2;
            vec![
                (ProductState { atoms: [Atom::Excited, Atom::Ground], n }, w),
                (ProductState { atoms: [Atom::Ground, Atom::Excited], n }, w),
            ]
        } else {
            vec![(ProductState { atoms: [self.atom1, self.atom2], n }, 1.0)]
        }
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.symmetrized {
            write!(f, "|S12,{}", self.n_a)?;
        } else {
            write!(f, "|{}1,{}2,{}", self.atom1.letter(), self.atom2.letter(), self.n_a)?;
        }
        match self.n_b {
            Some(nb) => write!(f, ",{nb}>"),
            None => write!(f, ">"),
        }
    }
}

/// An ordered closed basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Basis {
    pub kind: SystemKind,
    pub sector: Sector,
    pub states: Vec<BasisState>,
}

use Atom::{Excited as E, Ground as G};

/// Returns the ordered closed basis for a system kind and sector.
///
/// * bimodal, unitary: `|e1,e2,0,0>`, `S|1,0>`, `S|0,1>`, `|g1,g2,1,1>`,
///   `|g1,g2,2,0>`, `|g1,g2,0,2>` with `S` the symmetric atomic combination;
/// * single mode, unitary: `|e1,e2,0>`, `|e1,g2,1>`, `|g1,e2,1>`, `|g1,g2,2>`;
/// * bimodal, dissipative: the 13 product states reachable by the Hamiltonian
///   and photon loss, starting from `|e1,e2,0,0>`;
/// * single mode, dissipative: the 8 analogous states, ordered by descending
///   excitation.
pub fn enumerate_basis(kind: SystemKind, sector: Sector) -> Basis {
    let states = match (kind, sector) {
        (SystemKind::BimodalIdentical, Sector::Unitary) => vec![
            BasisState::bimodal(E, E, 0, 0),
            BasisState::symmetric(1, 0),
            BasisState::symmetric(0, 1),
            BasisState::bimodal(G, G, 1, 1),
            BasisState::bimodal(G, G, 2, 0),
            BasisState::bimodal(G, G, 0, 2),
        ],
        (SystemKind::SingleModeNonidentical, Sector::Unitary) => vec![
            BasisState::single_mode(E, E, 0),
            BasisState::single_mode(E, G, 1),
            BasisState::single_mode(G, E, 1),
            BasisState::single_mode(G, G, 2),
        ],
        (SystemKind::BimodalIdentical, Sector::Dissipative) => vec![
            BasisState::bimodal(E, E, 0, 0),
            BasisState::bimodal(G, E, 0, 0),
            BasisState::bimodal(G, E, 1, 0),
            BasisState::bimodal(G, E, 0, 1),
            BasisState::bimodal(E, G, 0, 0),
            BasisState::bimodal(E, G, 1, 0),
            BasisState::bimodal(E, G, 0, 1),
            BasisState::bimodal(G, G, 0, 0),
            BasisState::bimodal(G, G, 0, 1),
            BasisState::bimodal(G, G, 1, 0),
            BasisState::bimodal(G, G, 0, 2),
            BasisState::bimodal(G, G, 1, 1),
            BasisState::bimodal(G, G, 2, 0),
        ],
        (SystemKind::SingleModeNonidentical, Sector::Dissipative) => vec![
            BasisState::single_mode(E, E, 0),
            BasisState::single_mode(E, G, 1),
            BasisState::single_mode(G, E, 1),
            BasisState::single_mode(G, G, 2),
            BasisState::single_mode(E, G, 0),
            BasisState::single_mode(G, E, 0),
            BasisState::single_mode(G, G, 1),
            BasisState::single_mode(G, G, 0),
        ],
    };
    Basis { kind, sector, states }
}

impl Basis {
    pub fn new(kind: SystemKind, sector: Sector) -> Self {
        enumerate_basis(kind, sector)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, state: &BasisState) -> Result<usize> {
        self.states.iter().position(|s| s == state).ok_or_else(|| Error::UnknownState(state.label()))
    }

    /// `|e1,e2,0,0>` or `|e1,e2,0>`; always the first state.
    pub fn initial_state(&self) -> BasisState {
        self.states[0]
    }

    /// The cooperative two-photon state: `|g1,g2,1,1>` or `|g1,g2,2>`.
    pub fn two_photon_state(&self) -> BasisState {
        match self.kind {
            SystemKind::BimodalIdentical => BasisState::bimodal(G, G, 1, 1),
            SystemKind::SingleModeNonidentical => BasisState::single_mode(G, G, 2),
        }
    }

    /// `|g1,g2,0,0>` or `|g1,g2,0>`.
    pub fn ground_vacuum_state(&self) -> BasisState {
        match self.kind {
            SystemKind::BimodalIdentical => BasisState::bimodal(G, G, 0, 0),
            SystemKind::SingleModeNonidentical => BasisState::single_mode(G, G, 0),
        }
    }

    pub(crate) fn product_index(&self, p: &ProductState) -> Option<usize> {
        self.states.iter().position(|s| !s.symmetrized && s.components()[0].0 == *p)
    }

    pub fn labels(&self) -> Vec<String> {
        self.states.iter().map(BasisState::label).collect()
    }
}
