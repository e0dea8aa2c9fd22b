//! Relative-index phase diagram: for each coupling, the share of eigenstates
//! below the lower and above the upper maximal-density energy, from the
//! exact spectrum and from classical phase-space areas.

use rayon::prelude::*;
use serde::Serialize;

use crate::classical::{region_fractions, rescale};
use crate::error::{invalid, Result};
use crate::model::{build_hamiltonian, ModelParams};
use crate::spectral::{classify_energies, eigenvalues, MarginRule, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseRow {
    pub coupling: f64,
    pub frac_below: f64,
    pub frac_above: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseDiagram {
    pub n_total: u32,
    pub g_ratio: f64,
    pub rows: Vec<PhaseRow>,
}

impl PhaseDiagram {
    /// `frac_below` per coupling.
    pub fn lower_curve(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.frac_below).collect()
    }

    /// `1 - frac_above` per coupling; MST states lie between the curves.
    pub fn upper_curve(&self) -> Vec<f64> {
        self.rows.iter().map(|r| 1.0 - r.frac_above).collect()
    }

    /// First coupling with `frac_below > 0`.
    pub fn lower_onset(&self) -> Option<f64> {
        self.rows.iter().find(|r| r.frac_below > 0.0).map(|r| r.coupling)
    }

    /// First coupling with `frac_above > 0`.
    pub fn upper_onset(&self) -> Option<f64> {
        self.rows.iter().find(|r| r.frac_above > 0.0).map(|r| r.coupling)
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    match grid.windows(2).find(|w| !(w[1] > w[0])) {
        Some(w) => Err(invalid(format!("coupling grid must be strictly ascending ({} then {})", w[0], w[1]))),
        None => Ok(()),
    }
}

pub fn boundary_curves(n_total: u32, g_ratio: f64, grid: &[f64]) -> Result<PhaseDiagram> {
    boundary_curves_with(n_total, g_ratio, grid, MarginRule::default())
}

pub fn boundary_curves_with(n_total: u32, g_ratio: f64, grid: &[f64], rule: MarginRule) -> Result<PhaseDiagram> {
    let base = ModelParams::new(n_total, g_ratio, 0.0)?;
    check_grid(grid)?;
    let rows = grid
        .par_iter()
        .map(|&coupling| {
            let p = base.with_coupling(coupling)?;
            let e = eigenvalues(&build_hamiltonian(&p), DEFAULT_TOL)?;
            let c = classify_energies(&e, &p, rule.margins(&p));
            Ok(PhaseRow { coupling, frac_below: c.frac_below, frac_above: c.frac_above })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseDiagram { n_total, g_ratio, rows })
}

/// Same table from classical area fractions at `resolution²` quadrature
/// points per coupling.
pub fn semiclassical_curves(n_total: u32, g_ratio: f64, grid: &[f64], resolution: usize) -> Result<PhaseDiagram> {
    let base = ModelParams::new(n_total, g_ratio, 0.0)?;
    check_grid(grid)?;
    let rows = grid
        .iter()
        .map(|&coupling| {
            let f = region_fractions(&rescale(&base.with_coupling(coupling)?), resolution)?;
            Ok(PhaseRow { coupling, frac_below: f[0], frac_above: f[2] })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseDiagram { n_total, g_ratio, rows })
}
