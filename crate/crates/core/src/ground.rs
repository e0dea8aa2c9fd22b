//! Ground-state observables along coupling sweeps, finite-difference
//! derivatives, and location of the transition from the linear-entropy
//! derivative peak.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::model::{build_hamiltonian, ModelParams};
use crate::spectral::{ground_pair, populations_of, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroundReport {
    /// Lowest eigenvalue, units `ħδ`.
    pub energy: f64,
    pub n0_mean: f64,
    /// `1 - Σ_m |c_m|⁴`: the mode-0 reduced state is diagonal in the
    /// number basis because `m` fixes all three occupations.
    pub linear_entropy: f64,
}

pub fn ground_observables(p: &ModelParams) -> Result<GroundReport> {
    let h = build_hamiltonian(p);
    let (energy, v) = ground_pair(&h, DEFAULT_TOL)?;
    let n0_mean = populations_of(&v, p.n_total()).n0;
    let purity: f64 = v.iter().map(|c| c.powi(4)).sum();
    Ok(GroundReport { energy, n0_mean, linear_entropy: 1.0 - purity })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Column {
    Energy,
    N0Mean,
    LinearEntropy,
}

impl Column {
    pub const ALL: [Column; 3] = [Column::Energy, Column::N0Mean, Column::LinearEntropy];

    pub fn name(&self) -> &'static str {
        match self {
            Column::Energy => "energy",
            Column::N0Mean => "n0_mean",
            Column::LinearEntropy => "linear_entropy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub coupling: f64,
    pub energy: f64,
    pub n0_mean: f64,
    pub linear_entropy: f64,
}

impl SweepRow {
    pub fn get(&self, c: Column) -> f64 {
        match c {
            Column::Energy => self.energy,
            Column::N0Mean => self.n0_mean,
            Column::LinearEntropy => self.linear_entropy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub n_total: u32,
    pub g_ratio: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn couplings(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.coupling).collect()
    }

    pub fn column(&self, c: Column) -> Vec<f64> {
        self.rows.iter().map(|r| r.get(c)).collect()
    }
}

/// Ground state at every `G/δ` of `grid` (strictly ascending). Points are
/// evaluated in parallel and assembled in grid order.
pub fn coupling_sweep(n_total: u32, g_ratio: f64, grid: &[f64]) -> Result<SweepTable> {
    let base = ModelParams::new(n_total, g_ratio, 0.0)?;
    if let Some(w) = grid.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(invalid(format!("coupling grid must be strictly ascending ({} then {})", w[0], w[1])));
    }
    let rows = grid
        .par_iter()
        .map(|&coupling| {
            let r = ground_observables(&base.with_coupling(coupling)?)?;
            Ok(SweepRow { coupling, energy: r.energy, n0_mean: r.n0_mean, linear_entropy: r.linear_entropy })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { n_total, g_ratio, rows })
}

// ---------------------------------------------------------------------------
// Derivatives

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeTable {
    pub column: Column,
    pub order: u8,
    pub step: f64,
    pub couplings: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn finite_difference(t: &SweepTable, column: Column, order: u8) -> Result<DerivativeTable> {
    let x = t.couplings();
    let values = differentiate(&x, &t.column(column), order)?;
    Ok(DerivativeTable { column, order, step: x[1] - x[0], couplings: x, values })
}

/// Second-order accurate derivative of `y(x)` on a uniform grid: central
/// stencils inside, one-sided three- (first order) or four-point (second
/// order) stencils at the ends.
pub fn differentiate(x: &[f64], y: &[f64], order: u8) -> Result<Vec<f64>> {
    if !(order == 1 || order == 2) {
        return Err(invalid(format!("derivative order must be 1 or 2, got {order}")));
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    let n = x.len();
    let needed = order as usize + 2;
    if n < needed {
        return Err(Error::TooFewRows { needed, found: n });
    }
    let h = uniform_step(x)?;
    let mut d = vec![0.0; n];
    if order == 1 {
        for i in 1..n - 1 {
            d[i] = (y[i + 1] - y[i - 1]) / (2.0 * h);
        }
        d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
        d[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
    } else {
        let h2 = h * h;
        for i in 1..n - 1 {
            d[i] = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / h2;
        }
        d[0] = (2.0 * y[0] - 5.0 * y[1] + 4.0 * y[2] - y[3]) / h2;
        d[n - 1] = (2.0 * y[n - 1] - 5.0 * y[n - 2] + 4.0 * y[n - 3] - y[n - 4]) / h2;
    }
    Ok(d)
}

fn uniform_step(x: &[f64]) -> Result<f64> {
    let h = x[1] - x[0];
    if !(h > 0.0) {
        return Err(Error::NonUniformGrid { row: 1, expected: h, found: h });
    }
    for (i, w) in x.windows(2).enumerate().skip(1) {
        let step = w[1] - w[0];
        if (step - h).abs() > 1e-12 * h.abs().max(w[1].abs()) {
            return Err(Error::NonUniformGrid { row: i + 1, expected: h, found: step });
        }
    }
    Ok(h)
}

// ---------------------------------------------------------------------------
// Critical coupling

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalEstimate {
    /// Peak of `|dS/d(G/δ)|`, refined by a parabola through the maximum and
    /// its neighbours.
    pub coupling: f64,
    pub peak_height: f64,
    /// Grid index of the raw maximum.
    pub grid_index: usize,
    /// First grid coupling where `<n0>` reaches one boson.
    pub n0_departure: Option<f64>,
}

pub fn critical_coupling(n_total: u32, g_ratio: f64, grid: &[f64]) -> Result<CriticalEstimate> {
    critical_from_table(&coupling_sweep(n_total, g_ratio, grid)?)
}

pub fn critical_from_table(t: &SweepTable) -> Result<CriticalEstimate> {
    let d = finite_difference(t, Column::LinearEntropy, 1)?;
    let (x_peak, height, index) = refine_peak(&d.couplings, &d.values)?;
    let n0_departure = t.rows.iter().find(|r| r.n0_mean >= 1.0).map(|r| r.coupling);
    Ok(CriticalEstimate { coupling: x_peak, peak_height: height, grid_index: index, n0_departure })
}

/// Location and height of the maximum of `|y|`, refined by a three-point
/// parabola.
fn refine_peak(x: &[f64], y: &[f64]) -> Result<(f64, f64, usize)> {
    let abs: Vec<f64> = y.iter().map(|v| v.abs()).collect();
    let index = abs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .ok_or(Error::TooFewRows { needed: 3, found: 0 })?;
    if index == 0 || index + 1 == abs.len() {
        return Err(Error::InconclusivePeak { index });
    }
    let (l, c, r) = (abs[index - 1], abs[index], abs[index + 1]);
    let curvature = l - 2.0 * c + r;
    let offset = if curvature < 0.0 { 0.5 * (l - r) / curvature } else { 0.0 };
    let h = x[index + 1] - x[index];
    Ok((x[index] + offset * h, c - 0.25 * (l - r) * offset, index))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n_total: u32,
    /// Maximum of `|dS/d(G'/δ')|`.
    pub peak_height: f64,
    /// Peak position in `G'/δ'`.
    pub peak_location: f64,
}

/// Entropy-derivative peak for each size on a common `G'/δ'` grid, with
/// `g/δ` chosen per size so that `g'/δ' = gp` stays fixed.
pub fn finite_size_scaling(sizes: &[u32], gp: f64, gp_grid: &[f64]) -> Result<Vec<ScalingRow>> {
    if let Some(w) = sizes.windows(2).find(|w| w[1] <= w[0]) {
        return Err(invalid(format!("sizes must be strictly ascending ({} then {})", w[0], w[1])));
    }
    sizes
        .iter()
        .map(|&n| {
            let scale = n as f64 / 4.0;
            let grid: Vec<f64> = gp_grid.iter().map(|x| x / scale).collect();
            let est = critical_coupling(n, gp / scale, &grid)?;
            Ok(ScalingRow { n_total: n, peak_height: est.peak_height / scale, peak_location: est.coupling * scale })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Transition order

/// Discontinuity of a derivative column at one grid point, measured by
/// extrapolating from each side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpEstimate {
    /// `|R - L|` between the quadratic extrapolations from the right and
    /// from the left.
    pub jump: f64,
    /// Disagreement between quadratic and linear extrapolation, summed over
    /// both sides.
    pub stencil_error: f64,
}

impl JumpEstimate {
    pub fn ratio(&self) -> f64 {
        self.jump / self.stencil_error
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionOrder {
    pub grid_index: usize,
    pub first: JumpEstimate,
    pub second: JumpEstimate,
}

/// Compares the one-sided limits of `dE/dG` and `d²E/dG²` at the grid point
/// nearest `critical`. Each side is extrapolated from the samples `w`, `2w`
/// and `3w` steps away, so stencils that straddle the kink are skipped.
pub fn transition_order(t: &SweepTable, critical: f64, window: usize) -> Result<TransitionOrder> {
    if window == 0 {
        return Err(invalid("jump window must be at least one step"));
    }
    let x = t.couplings();
    let e = t.column(Column::Energy);
    let d1 = differentiate(&x, &e, 1)?;
    let d2 = differentiate(&x, &e, 2)?;
    let kc = x
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - critical).abs().total_cmp(&(b.1 - critical).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let reach = 3 * window;
    if kc < reach || kc + reach >= x.len() {
        return Err(Error::TooFewRows { needed: 2 * reach + 1, found: x.len() });
    }
    let jump = |d: &[f64]| {
        let side = |a: f64, b: f64, c: f64| (3.0 * a - 3.0 * b + c, 2.0 * a - b);
        let (lq, ll) = side(d[kc - window], d[kc - 2 * window], d[kc - reach]);
        let (rq, rl) = side(d[kc + window], d[kc + 2 * window], d[kc + reach]);
        JumpEstimate { jump: (rq - lq).abs(), stencil_error: (rq - rl).abs() + (lq - ll).abs() }
    };
    Ok(TransitionOrder { grid_index: kc, first: jump(&d1), second: jump(&d2) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(start: f64, step: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| start + step * i as f64).collect()
    }

    #[test]
    fn uncoupled_ground_state() {
        for (n, g) in [(2, 0.0), (10, 0.3), (500, 0.003)] {
            let r = ground_observables(&ModelParams::new(n, g, 0.0).unwrap()).unwrap();
            assert_eq!((r.energy, r.n0_mean), (0.0, 0.0));
            assert!(r.linear_entropy.abs() < 1e-15);
        }
    }

    #[test]
    fn weak_coupling_population_is_negligible() {
        let r = ground_observables(&ModelParams::new(500, 0.0, 0.0008).unwrap()).unwrap();
        assert!(r.n0_mean < 2.0, "{r:?}");
        assert!(r.linear_entropy < 0.5, "{r:?}");
    }

    #[test]
    fn strong_coupling_energy_matches_classical_minimum() {
        let r = ground_observables(&ModelParams::new(500, 0.0, 0.002).unwrap()).unwrap();
        assert!((r.energy / 125.0 + 0.25).abs() < 0.02, "{}", r.energy / 125.0);
    }

    #[test]
    fn sweep_single_point_and_order() {
        let t = coupling_sweep(500, 0.0, &[0.0]).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].energy, 0.0);
        let g = grid(0.0, 0.0001, 31);
        let t = coupling_sweep(500, 0.0, &g).unwrap();
        assert_eq!(t.couplings(), g);
        assert!(coupling_sweep(500, 0.0, &[0.002, 0.001]).is_err());
    }

    #[test]
    fn n0_and_entropy_across_transition() {
        let t = coupling_sweep(500, 0.0, &grid(0.0005, 0.0001, 26)).unwrap();
        for w in t.rows.windows(2) {
            assert!(w[1].n0_mean >= w[0].n0_mean - 1e-9);
        }
        let after: Vec<_> = t.rows.iter().filter(|r| r.coupling > 0.00105).collect();
        for w in after.windows(2) {
            assert!(w[1].linear_entropy > w[0].linear_entropy);
        }
        let before = t.rows.iter().find(|r| (r.coupling - 0.0008).abs() < 1e-12).unwrap();
        let late = t.rows.last().unwrap();
        assert!(late.n0_mean > 20.0 * before.n0_mean.max(1.0));
    }

    #[test]
    fn ground_vector_bounds() {
        for big_g in [0.0, 0.0005, 0.001, 0.004] {
            let r = ground_observables(&ModelParams::new(200, 0.01, big_g).unwrap()).unwrap();
            assert!(r.linear_entropy >= -1e-15 && r.linear_entropy <= 1.0 - 1.0 / 101.0);
            assert!(r.n0_mean >= 0.0 && r.n0_mean <= 100.0);
        }
    }

    #[test]
    fn derivative_of_constant_and_linear() {
        let x = grid(0.1, 0.01, 12);
        let c = vec![4.2; 12];
        for order in [1, 2] {
            assert!(differentiate(&x, &c, order).unwrap().iter().all(|d| d.abs() < 1e-10));
        }
        let lin: Vec<f64> = x.iter().map(|v| 3.5 * v - 1.0).collect();
        assert!(differentiate(&x, &lin, 1).unwrap().iter().all(|d| (d - 3.5).abs() < 1e-8));
        assert!(differentiate(&x, &lin, 2).unwrap().iter().all(|d| d.abs() < 1e-6));
    }

    #[test]
    fn stencils_are_exact_on_low_polynomials() {
        let x = grid(-1.0, 0.25, 9);
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v * v - v + 0.5).collect();
        for (xi, d) in x.iter().zip(differentiate(&x, &y, 1).unwrap()) {
            assert!((d - (4.0 * xi - 1.0)).abs() < 1e-12);
        }
        let cubic: Vec<f64> = x.iter().map(|v| v * v * v).collect();
        for (xi, d) in x.iter().zip(differentiate(&x, &cubic, 2).unwrap()) {
            assert!((d - 6.0 * xi).abs() < 1e-10, "{xi}: {d}");
        }
    }

    #[test]
    fn derivative_preconditions() {
        let x = [0.0, 0.1, 0.25, 0.3];
        assert!(matches!(differentiate(&x, &[0.0; 4], 1), Err(Error::NonUniformGrid { row: 2, .. })));
        assert!(matches!(differentiate(&[0.0, 1.0, 2.0], &[0.0; 3], 2), Err(Error::TooFewRows { .. })));
        assert!(differentiate(&[0.0, 1.0, 2.0], &[0.0; 3], 1).is_ok());
        assert!(differentiate(&[0.0, 1.0, 2.0], &[0.0; 3], 3).is_err());
    }

    #[test]
    fn second_derivative_consistent_away_from_transition() {
        let t = coupling_sweep(500, 0.0, &grid(0.0015, 0.00005, 21)).unwrap();
        let x = t.couplings();
        let d1 = finite_difference(&t, Column::Energy, 1).unwrap();
        let d2 = finite_difference(&t, Column::Energy, 2).unwrap();
        let dd1 = differentiate(&x, &d1.values, 1).unwrap();
        for (i, (a, b)) in dd1.iter().zip(&d2.values).enumerate().take(x.len() - 2).skip(2) {
            assert!((a - b).abs() / b.abs() < 1e-2, "i = {i}: {a} vs {b}");
        }
    }

    #[test]
    fn peak_refinement() {
        let x = grid(0.0, 0.1, 11);
        let y: Vec<f64> = x.iter().map(|v| 2.0 - (v - 0.43).powi(2)).collect();
        let (xp, h, i) = refine_peak(&x, &y).unwrap();
        assert_eq!(i, 4);
        assert!((xp - 0.43).abs() < 1e-12);
        assert!((h - 2.0).abs() < 1e-12);
        let rising: Vec<f64> = x.clone();
        assert!(matches!(refine_peak(&x, &rising), Err(Error::InconclusivePeak { index: 10 })));
    }

    #[test]
    fn critical_coupling_shifts_with_size() {
        let est = critical_coupling(200, 0.0, &grid(0.0015, 0.0001, 21)).unwrap();
        assert!((est.coupling - 0.0025).abs() <= 0.0001, "{est:?}");
    }

    #[test]
    fn scaling_single_size() {
        let gp_grid = grid(0.05, 0.005, 41);
        let rows = finite_size_scaling(&[200], 0.0, &gp_grid).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].peak_location - 0.125).abs() < 0.01);
        assert!(finite_size_scaling(&[500, 200], 0.0, &gp_grid).is_err());
    }

    proptest! {
        #[test]
        fn quadratic_sweeps_give_exact_second_derivative(
            a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0, n in 4usize..30,
        ) {
            let x = grid(0.0, 0.05, n);
            let y: Vec<f64> = x.iter().map(|v| a * v * v + b * v + c).collect();
            for d in differentiate(&x, &y, 2).unwrap() {
                prop_assert!((d - 2.0 * a).abs() < 1e-8);
            }
            for (xi, d) in x.iter().zip(differentiate(&x, &y, 1).unwrap()) {
                prop_assert!((d - (2.0 * a * xi + b)).abs() < 1e-10);
            }
        }

        #[test]
        fn ground_vector_normalized(n in 1u32..60, g in -0.05f64..0.05, big_g in 0.0f64..0.05) {
            let p = ModelParams::new(2 * n, g, big_g).unwrap();
            let (_, v) = ground_pair(&build_hamiltonian(&p), DEFAULT_TOL).unwrap();
            let norm: f64 = v.iter().map(|c| c * c).sum();
            prop_assert!((norm - 1.0).abs() < 1e-12);
            let r = ground_observables(&p).unwrap();
            prop_assert!(r.linear_entropy >= -1e-15);
            prop_assert!(r.linear_entropy <= 1.0 - 1.0 / (n as f64 + 1.0) + 1e-12);
        }
    }
}
