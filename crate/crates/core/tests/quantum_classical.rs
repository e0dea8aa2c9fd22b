//! Finite-N quantum results against the classical phase-space picture.

use threemode_core::classical::{
    classical_ground_energy, critical_points, region_fractions, rescale, rescale_ratios, separatrix_thresholds,
};
use threemode_core::grid::linspace;
use threemode_core::ground::coupling_sweep;
use threemode_core::model::{build_hamiltonian, ModelParams};
use threemode_core::phase_diagram::{boundary_curves, semiclassical_curves};
use threemode_core::spectral::{classify_states, diagonalize, inflection_energies, spacings, DEFAULT_TOL};

/// Index `j` of the spacing `E_{j+1} - E_j` that straddles `level`.
fn crossing(energies: &[f64], level: f64) -> Option<usize> {
    energies.windows(2).position(|w| w[0] < level && level <= w[1])
}

#[test]
fn spacing_minima_sit_at_separatrix_energies() {
    for &(g, big_g) in &[(0.0, 0.002), (0.0, 0.003), (0.003, 0.003), (-0.003, 0.002)] {
        let p = ModelParams::new(500, g, big_g).unwrap();
        let cp = rescale(&p);
        let set = critical_points(&cp).unwrap();
        let s = diagonalize(&build_hamiltonian(&p), DEFAULT_TOL).unwrap();
        let prof = spacings(&s);
        let (e_low, e_up) = inflection_energies(&p);
        for (exists, level) in [(set.lower_saddle().exists, e_low), (set.upper_saddle().exists, e_up)] {
            if !exists {
                continue;
            }
            let j = crossing(&s.eigenvalues, level).unwrap();
            let near = prof.minima_indices.iter().any(|&i| i.abs_diff(j) <= 2);
            assert!(near, "g = {g}, G = {big_g}: no minimum within 2 of {j} ({:?})", prof.minima_indices);
        }
    }
}

#[test]
fn lower_fraction_matches_phase_space_area() {
    for big_gp in [0.25, 0.375] {
        let big_g = big_gp / 125.0;
        let p = ModelParams::new(500, 0.0, big_g).unwrap();
        let s = diagonalize(&build_hamiltonian(&p), DEFAULT_TOL).unwrap();
        let quantum = classify_states(&s, &p).frac_below;
        let classical = region_fractions(&rescale(&p), 512).unwrap()[0];
        assert!((quantum - classical).abs() < 0.02, "G' = {big_gp}: {quantum} vs {classical}");
    }
}

#[test]
fn ground_energy_tracks_classical_minimum() {
    let grid = linspace(0.0, 0.003, 61).unwrap();
    for g in [0.0, 0.003, -0.003] {
        let t = coupling_sweep(500, g, &grid).unwrap();
        for r in &t.rows {
            let cl = classical_ground_energy(&rescale_ratios(500, g, r.coupling));
            assert!((r.energy / 125.0 - cl).abs() <= 5.0 / 500.0, "g = {g}, G = {}", r.coupling);
        }
    }
}

#[test]
fn n0_non_decreasing_across_transition() {
    let t = coupling_sweep(500, 0.0, &linspace(0.0005, 0.003, 51).unwrap()).unwrap();
    for w in t.rows.windows(2) {
        assert!(w[1].n0_mean >= w[0].n0_mean - 1e-9, "{:?}", w);
    }
}

#[test]
fn phase_diagram_onsets_follow_lower_threshold() {
    let grid = linspace(0.0, 0.004, 81).unwrap();
    let step = grid[1] - grid[0];
    let target = 4.0 / 500.0 * separatrix_thresholds(0.0).0;
    for g in [0.003, 0.0, -0.002, -0.003] {
        let pd = boundary_curves(500, g, &grid).unwrap();
        let onset = pd.lower_onset().unwrap();
        assert!((onset - target).abs() <= step + 1e-15, "g = {g}: onset {onset}");
        let sc = semiclassical_curves(500, g, &grid, 512).unwrap();
        for (q, c) in pd.rows.iter().zip(&sc.rows).filter(|(q, _)| q.coupling >= onset) {
            assert!((q.frac_below - c.frac_below).abs() <= 0.03, "g = {g}: {q:?} vs {c:?}");
            assert!((q.frac_above - c.frac_above).abs() <= 0.03, "g = {g}: {q:?} vs {c:?}");
        }
        for r in &pd.rows {
            assert!(r.frac_below + r.frac_above <= 1.0);
        }
    }
}

#[test]
fn upper_onset_follows_upper_threshold_for_positive_g() {
    let grid = linspace(0.0, 0.004, 81).unwrap();
    let pd = boundary_curves(500, 0.003, &grid).unwrap();
    let target = 4.0 / 500.0 * separatrix_thresholds(0.375).1;
    let onset = pd.upper_onset().unwrap();
    // The half-spacing margin above the uncoupled top level delays the
    // finite-N onset by a few grid steps.
    assert!(onset >= target && onset - target <= 0.0003, "onset {onset}, target {target}");
}

#[test]
fn lower_curve_monotone_and_upper_dip_for_negative_g() {
    // For g < 0 the upper region first shrinks as G grows and then recovers.
    // The classical area does the same, so only the lower curve is monotone
    // for every g.
    let grid = linspace(0.0, 0.004, 81).unwrap();
    for g in [0.003, 0.0, -0.002, -0.003] {
        let pd = boundary_curves(500, g, &grid).unwrap();
        let lower = pd.lower_curve();
        assert!(lower.windows(2).all(|w| w[1] >= w[0] - 1e-9), "g = {g}");
    }
    let pd = boundary_curves(500, -0.003, &grid).unwrap();
    let sc = semiclassical_curves(500, -0.003, &grid, 256).unwrap();
    for rows in [&pd.rows, &sc.rows] {
        let (early, mid, late) = (rows[5].frac_above, rows[40].frac_above, rows[80].frac_above);
        assert!(mid < early && mid < late, "{early} {mid} {late}");
    }
}
