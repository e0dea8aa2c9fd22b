//! Conserved-sector basis and the effective Hamiltonian.
//!
//! Energies are measured in units of `ħδ`. In the sector with total number
//! `N` (even) and imbalance `D = n0 - n2 = 0`, a basis state is fixed by the
//! mode-0 occupation `m`, with occupations `(m, N - 2m, m)`. The effective
//! Hamiltonian
//!
//! ```text
//! E = n0 + (g/δ) n0² + (G/δ) a0† a2† a1² + (G*/δ) a0 a2 a1†²
//! ```
//!
//! is tridiagonal in `m`. The phase of `G` is a gauge choice in this sector,
//! so the tridiagonal form keeps only `|G|`; [`dense_oracle`] keeps the phase
//! and builds the matrix directly from ladder-operator action.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest `N` accepted by [`dense_oracle`].
pub const ORACLE_MAX_N: u32 = 64;

/// Dimensionless model definition in units `ħδ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    n_total: u32,
    g_ratio: f64,
    big_g_ratio: f64,
    big_g_phase: f64,
}

impl ModelParams {
    pub fn new(n_total: u32, g_ratio: f64, big_g_ratio: f64) -> Result<Self> {
        Self::with_phase(n_total, g_ratio, big_g_ratio, 0.0)
    }

    pub fn with_phase(n_total: u32, g_ratio: f64, big_g_ratio: f64, big_g_phase: f64) -> Result<Self> {
        check_n_total(n_total)?;
        if !g_ratio.is_finite() {
            return Err(invalid(format!("g/delta must be finite, got {g_ratio}")));
        }
        if !big_g_ratio.is_finite() || big_g_ratio < 0.0 {
            return Err(invalid(format!("|G|/delta must be finite and >= 0, got {big_g_ratio}")));
        }
        if !big_g_phase.is_finite() {
            return Err(invalid(format!("phase of G must be finite, got {big_g_phase}")));
        }
        Ok(Self { n_total, g_ratio, big_g_ratio, big_g_phase })
    }

    pub fn n_total(&self) -> u32 {
        self.n_total
    }

    /// `g/δ`.
    pub fn g_ratio(&self) -> f64 {
        self.g_ratio
    }

    /// `|G|/δ`.
    pub fn big_g_ratio(&self) -> f64 {
        self.big_g_ratio
    }

    pub fn big_g_phase(&self) -> f64 {
        self.big_g_phase
    }

    /// Dimension of the `(N, D = 0)` sector.
    pub fn dim(&self) -> usize {
        self.n_total as usize / 2 + 1
    }

    pub fn with_coupling(&self, big_g_ratio: f64) -> Result<Self> {
        Self::with_phase(self.n_total, self.g_ratio, big_g_ratio, self.big_g_phase)
    }
}

fn check_n_total(n_total: u32) -> Result<()> {
    if n_total < 2 || !n_total.is_multiple_of(2) {
        return Err(invalid(format!("N must be even and >= 2, got {n_total}")));
    }
    Ok(())
}

/// A state of the `(N, D = 0)` sector, labelled by the mode-0 occupation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    pub m: u32,
    n_total: u32,
}

impl BasisState {
    /// Occupations `(n0, n1, n2)`.
    pub fn occupations(&self) -> (u32, u32, u32) {
        (self.m, self.n_total - 2 * self.m, self.m)
    }
}

/// Basis of the `(N, D = 0)` sector in ascending `m`.
pub fn build_basis(n_total: u32) -> Result<Vec<BasisState>> {
    check_n_total(n_total)?;
    Ok((0..=n_total / 2).map(|m| BasisState { m, n_total }).collect())
}

/// Real symmetric tridiagonal form of the effective Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalHamiltonian {
    pub n_total: u32,
    /// `m + (g/δ) m²`, length `N/2 + 1`.
    pub diag: Vec<f64>,
    /// `(|G|/δ)(m + 1) sqrt((N - 2m)(N - 2m - 1))`, length `N/2`.
    pub offdiag: Vec<f64>,
}

impl TridiagonalHamiltonian {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Mat-vec `H v`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        apply_hamiltonian(self, v)
    }

    /// Dense Hermitian matrix with `G = |G| e^{iθ}` restored on the
    /// off-diagonals: `H[m+1][m] = e^{iθ} t_m`, `H[m][m+1] = e^{-iθ} t_m`.
    pub fn to_dense_with_phase(&self, phase: f64) -> DMatrix<Complex64> {
        let n = self.dim();
        let gauge = Complex64::from_polar(1.0, phase);
        let mut out = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for (m, &d) in self.diag.iter().enumerate() {
            out[(m, m)] = Complex64::new(d, 0.0);
        }
        for (m, &t) in self.offdiag.iter().enumerate() {
            out[(m + 1, m)] = gauge * t;
            out[(m, m + 1)] = gauge.conj() * t;
        }
        out
    }

    /// Sum of the diagonal, equal to the sum of eigenvalues.
    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }
}

pub fn build_hamiltonian(p: &ModelParams) -> TridiagonalHamiltonian {
    let n = p.n_total as f64;
    let half = p.n_total / 2;
    let diag = (0..=half)
        .map(|m| {
            let m = m as f64;
            m + p.g_ratio * m * m
        })
        .collect();
    let offdiag = (0..half)
        .map(|m| {
            let m = m as f64;
            let n1 = n - 2.0 * m;
            p.big_g_ratio * (m + 1.0) * (n1 * (n1 - 1.0)).sqrt()
        })
        .collect();
    TridiagonalHamiltonian { n_total: p.n_total, diag, offdiag }
}

pub fn apply_hamiltonian(h: &TridiagonalHamiltonian, v: &[f64]) -> Result<Vec<f64>> {
    let n = h.dim();
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: v.len() });
    }
    let mut out: Vec<f64> = h.diag.iter().zip(v).map(|(d, x)| d * x).collect();
    for (i, &t) in h.offdiag.iter().enumerate() {
        out[i] += t * v[i + 1];
        out[i + 1] += t * v[i];
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Dense oracle from explicit ladder-operator action on Fock states

type Fock = [u32; 3];

/// `amplitude · |state>`; `None` for the zero vector.
type Ket = Option<(f64, Fock)>;

fn lower(mode: usize, ket: Ket) -> Ket {
    let (amp, mut s) = ket?;
    if s[mode] == 0 {
        return None;
    }
    let factor = (s[mode] as f64).sqrt();
    s[mode] -= 1;
    Some((amp * factor, s))
}

fn raise(mode: usize, ket: Ket) -> Ket {
    let (amp, mut s) = ket?;
    s[mode] += 1;
    Some((amp * (s[mode] as f64).sqrt(), s))
}

fn number(mode: usize, ket: Ket) -> Ket {
    let (amp, s) = ket?;
    Some((amp * s[mode] as f64, s))
}

/// Every Fock state with `n0 + n1 + n2 = N`, indexed.
fn full_sector(n_total: u32) -> HashMap<Fock, usize> {
    let mut index = HashMap::new();
    for n0 in 0..=n_total {
        for n2 in 0..=(n_total - n0) {
            let next = index.len();
            index.insert([n0, n_total - n0 - n2, n2], next);
        }
    }
    index
}

/// Brute-force matrix of the effective Hamiltonian over the reduced basis,
/// with the complex phase of `G` kept.
///
/// Each reduced basis state is embedded in the full fixed-`N` Fock sector,
/// acted on term by term with `n0`, `n0²`, `a0† a2† a1²` and `a0 a2 a1†²`,
/// and the results are projected back. Any amplitude leaving the `D = 0`
/// sector is reported as an invalid-parameter error (it cannot happen for
/// this Hamiltonian).
pub fn dense_oracle(p: &ModelParams) -> Result<DMatrix<Complex64>> {
    if p.n_total > ORACLE_MAX_N {
        return Err(Error::OracleScale { n_total: p.n_total, max: ORACLE_MAX_N });
    }
    let basis = build_basis(p.n_total)?;
    let sector = full_sector(p.n_total);
    let dim = basis.len();
    let coupling = Complex64::from_polar(p.big_g_ratio, p.big_g_phase);
    let mut h = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));

    for (col, state) in basis.iter().enumerate() {
        let (n0, n1, n2) = state.occupations();
        let ket: Ket = Some((1.0, [n0, n1, n2]));

        let terms: [(Complex64, Ket); 4] = [
            (Complex64::new(1.0, 0.0), number(0, ket)),
            (Complex64::new(p.g_ratio, 0.0), number(0, number(0, ket))),
            (coupling, raise(0, raise(2, lower(1, lower(1, ket))))),
            (coupling.conj(), lower(0, lower(2, raise(1, raise(1, ket))))),
        ];
        for (prefactor, out) in terms {
            let Some((amp, s)) = out else { continue };
            debug_assert!(sector.contains_key(&s));
            if s[0] != s[2] {
                return Err(invalid(format!("operator left the D = 0 sector: {s:?}")));
            }
            let row = s[0] as usize;
            h[(row, col)] += prefactor * amp;
        }
    }
    Ok(h)
}
