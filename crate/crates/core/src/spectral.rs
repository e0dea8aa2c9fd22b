//! Exact spectrum of the reduced Hamiltonian and its transition signatures:
//! level spacings and their minima, near-degenerate pairs, mode populations
//! and the MST / RO labelling of eigenstates.

use serde::Serialize;

use crate::eigen::{inverse_iteration, tridiagonal_eigen};
use crate::error::{invalid, Error, Result};
use crate::model::{ModelParams, TridiagonalHamiltonian};

/// Default relative deflation tolerance of the eigensolver.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Default degeneracy tolerance, relative to the spectral width.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub n_total: u32,
    /// Ascending, units `ħδ`.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[i]` pairs with `eigenvalues[i]`; unit norm, first
    /// component above the noise floor positive.
    pub eigenvectors: Vec<Vec<f64>>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `E_max - E_min`.
    pub fn width(&self) -> f64 {
        match (self.eigenvalues.first(), self.eigenvalues.last()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }
}

pub fn diagonalize(h: &TridiagonalHamiltonian, tol: f64) -> Result<Spectrum> {
    check_tol(tol)?;
    let n = h.dim();
    let dec = tridiagonal_eigen(&h.diag, &h.offdiag, tol, true)?;
    let flat = dec.vectors.unwrap_or_default();
    let eigenvectors = flat.chunks_exact(n.max(1)).map(<[f64]>::to_vec).collect();
    Ok(Spectrum { n_total: h.n_total, eigenvalues: dec.values, eigenvectors })
}

/// Eigenvalues only, `O(n²)`.
pub fn eigenvalues(h: &TridiagonalHamiltonian, tol: f64) -> Result<Vec<f64>> {
    check_tol(tol)?;
    Ok(tridiagonal_eigen(&h.diag, &h.offdiag, tol, false)?.values)
}

/// Lowest eigenpair without forming the full eigenvector matrix.
pub fn ground_pair(h: &TridiagonalHamiltonian, tol: f64) -> Result<(f64, Vec<f64>)> {
    let values = eigenvalues(h, tol)?;
    let e0 = values[0];
    let v = if h.dim() == 1 { vec![1.0] } else { inverse_iteration(&h.diag, &h.offdiag, e0) };
    Ok((e0, v))
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(invalid(format!("solver tolerance must be positive, got {tol}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Spacings

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpacingProfile {
    /// `E_{i+1} - E_i`.
    pub spacings: Vec<f64>,
    /// Interior local minima of `spacings`.
    pub minima_indices: Vec<usize>,
}

impl SpacingProfile {
    /// Groups minima whose indices are at most `max_gap` apart.
    pub fn minimum_clusters(&self, max_gap: usize) -> Vec<Vec<usize>> {
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for &i in &self.minima_indices {
            match clusters.last_mut() {
                Some(c) if i - c[c.len() - 1] <= max_gap => c.push(i),
                _ => clusters.push(vec![i]),
            }
        }
        clusters
    }
}

pub fn spacings(s: &Spectrum) -> SpacingProfile {
    let spacings: Vec<f64> = s.eigenvalues.windows(2).map(|w| w[1] - w[0]).collect();
    let minima_indices = interior_minima(&spacings);
    SpacingProfile { spacings, minima_indices }
}

/// Strict interior local minima. A flat run (equal within `1e-12` of the
/// largest magnitude) lower than both neighbours counts once, at its left
/// edge.
pub fn interior_minima(values: &[f64]) -> Vec<usize> {
    let scale = values.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let eq = |a: f64, b: f64| (a - b).abs() <= 1e-12 * scale;
    let n = values.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        let mut j = i;
        while j + 1 < n && eq(values[j + 1], values[i]) {
            j += 1;
        }
        if j + 1 < n && values[i - 1] > values[i] && !eq(values[i - 1], values[i]) && values[j + 1] > values[j] {
            out.push(i);
        }
        i = j + 1;
    }
    out
}

/// Energies of maximal level density, `(0, N/2 + (g/δ)(N/2)²)`.
pub fn inflection_energies(p: &ModelParams) -> (f64, f64) {
    let half = p.n_total() as f64 / 2.0;
    (0.0, half + p.g_ratio() * half * half)
}

// ---------------------------------------------------------------------------
// Degeneracies

/// Adjacent pair `(lower, lower + 1)` and its splitting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelPair {
    pub lower: usize,
    pub splitting: f64,
}

/// Pairs with `E_{i+1} - E_i < rel_tol · width`.
pub fn detect_degeneracies(s: &Spectrum, rel_tol: f64) -> Vec<LevelPair> {
    let threshold = rel_tol * s.width();
    s.eigenvalues
        .windows(2)
        .enumerate()
        .filter_map(|(i, w)| {
            let splitting = w[1] - w[0];
            (splitting < threshold).then_some(LevelPair { lower: i, splitting })
        })
        .collect()
}

/// Closest adjacent pair with both levels inside `[lo, hi]`.
pub fn closest_pair_in(s: &Spectrum, lo: f64, hi: f64) -> Option<LevelPair> {
    s.eigenvalues
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] >= lo && w[1] <= hi)
        .map(|(i, w)| LevelPair { lower: i, splitting: w[1] - w[0] })
        .min_by(|a, b| a.splitting.total_cmp(&b.splitting))
}

// ---------------------------------------------------------------------------
// Populations and labels

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Populations {
    pub n0: f64,
    pub n1: f64,
    pub n2: f64,
}

pub fn mode_populations(s: &Spectrum, i: usize) -> Result<Populations> {
    let v = s.eigenvectors.get(i).ok_or(Error::IndexOutOfRange { index: i, len: s.len() })?;
    Ok(populations_of(v, s.n_total))
}

pub(crate) fn populations_of(v: &[f64], n_total: u32) -> Populations {
    let n0: f64 = v.iter().enumerate().map(|(m, c)| c * c * m as f64).sum();
    Populations { n0, n1: n_total as f64 - 2.0 * n0, n2: n0 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StateLabel {
    #[serde(rename = "MST")]
    Mst,
    #[serde(rename = "RO_BELOW")]
    RoBelow,
    #[serde(rename = "RO_ABOVE")]
    RoAbove,
}

impl StateLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            StateLabel::Mst => "MST",
            StateLabel::RoBelow => "RO_BELOW",
            StateLabel::RoAbove => "RO_ABOVE",
        }
    }
}

/// How far outside `(0, E_up)` a level must sit to count as RO.
///
/// For any `G > 0` the lowest level is pushed below zero by second-order
/// mixing, `E_0 ≈ -(G N)²`, even far below the classical threshold. The
/// default margins absorb that shift: half the unperturbed level spacing at
/// each edge of the band, `|1 + g/δ|/2` at the bottom and
/// `|1 + (g/δ)(N - 1)|/2` at the top.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryMargins {
    pub lower: f64,
    pub upper: f64,
}

impl BoundaryMargins {
    pub fn strict() -> Self {
        Self { lower: 0.0, upper: 0.0 }
    }

    pub fn half_level_spacing(p: &ModelParams) -> Self {
        let g = p.g_ratio();
        let n = p.n_total() as f64;
        Self { lower: 0.5 * (1.0 + g).abs(), upper: 0.5 * (1.0 + g * (n - 1.0)).abs() }
    }
}

/// Selects the [`BoundaryMargins`] for a parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum MarginRule {
    #[default]
    HalfLevelSpacing,
    Strict,
}

impl MarginRule {
    pub fn margins(&self, p: &ModelParams) -> BoundaryMargins {
        match self {
            MarginRule::HalfLevelSpacing => BoundaryMargins::half_level_spacing(p),
            MarginRule::Strict => BoundaryMargins::strict(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub labels: Vec<StateLabel>,
    pub frac_below: f64,
    pub frac_above: f64,
}

/// Labels with the default [`BoundaryMargins::half_level_spacing`].
pub fn classify_states(s: &Spectrum, p: &ModelParams) -> Classification {
    classify_energies(&s.eigenvalues, p, BoundaryMargins::half_level_spacing(p))
}

pub fn classify_states_with(s: &Spectrum, p: &ModelParams, margins: BoundaryMargins) -> Classification {
    classify_energies(&s.eigenvalues, p, margins)
}

pub fn classify_energies(energies: &[f64], p: &ModelParams, margins: BoundaryMargins) -> Classification {
    let (low, up) = inflection_energies(p);
    let labels: Vec<StateLabel> = energies
        .iter()
        .map(|&e| {
            if e < low - margins.lower {
                StateLabel::RoBelow
            } else if e > up + margins.upper {
                StateLabel::RoAbove
            } else {
                StateLabel::Mst
            }
        })
        .collect();
    let total = p.dim() as f64;
    let count = |l: StateLabel| labels.iter().filter(|&&x| x == l).count() as f64 / total;
    Classification { frac_below: count(StateLabel::RoBelow), frac_above: count(StateLabel::RoAbove), labels }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_hamiltonian;

    fn spectrum(n: u32, g: f64, big_g: f64) -> Spectrum {
        let p = ModelParams::new(n, g, big_g).unwrap();
        diagonalize(&build_hamiltonian(&p), DEFAULT_TOL).unwrap()
    }

    #[test]
    fn diagonal_case_is_exact() {
        let s = spectrum(500, 0.0, 0.0);
        for (i, e) in s.eigenvalues.iter().enumerate() {
            assert_eq!(*e, i as f64);
        }
        let prof = spacings(&s);
        assert!(prof.spacings.iter().all(|&d| d == 1.0));
        assert!(prof.minima_indices.is_empty());
    }

    #[test]
    fn trace_of_small_case() {
        let s = spectrum(4, 0.0, 0.1);
        let sum: f64 = s.eigenvalues.iter().sum();
        assert!((sum - 3.0).abs() < 1e-13);
    }

    #[test]
    fn lowest_level_negative_with_coupling() {
        let s = spectrum(500, 0.0, 0.002);
        assert!(s.eigenvalues[0] < 0.0);
    }

    #[test]
    fn spectrum_invariants() {
        for &(g, big_g) in &[(0.0, 0.002), (0.003, 0.0025), (-0.003, 0.0004)] {
            let p = ModelParams::new(500, g, big_g).unwrap();
            let h = build_hamiltonian(&p);
            let s = diagonalize(&h, DEFAULT_TOL).unwrap();
            assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            for (e, v) in s.eigenvalues.iter().zip(&s.eigenvectors) {
                let norm: f64 = v.iter().map(|x| x * x).sum();
                assert!((norm - 1.0).abs() < 1e-12);
                let hv = h.apply(v).unwrap();
                let res: f64 = hv.iter().zip(v).map(|(a, b)| (a - e * b).powi(2)).sum::<f64>().sqrt();
                assert!(res <= 1e-9 * e.abs().max(1.0), "residual {res} at E = {e}");
                let floor = f64::EPSILON * v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                let first = v.iter().find(|x| x.abs() > floor).unwrap();
                assert!(*first > 0.0);
            }
        }
    }

    #[test]
    fn eigenvectors_orthonormal() {
        let s = spectrum(200, 0.003, 0.004);
        let n = s.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let dot: f64 = s.eigenvectors[i].iter().zip(&s.eigenvectors[j]).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        assert!(worst <= 1e-9, "gram deviation {worst}");
    }

    #[test]
    fn ground_pair_matches_full_decomposition() {
        let p = ModelParams::new(300, -0.001, 0.0031).unwrap();
        let h = build_hamiltonian(&p);
        let s = diagonalize(&h, DEFAULT_TOL).unwrap();
        let (e0, v) = ground_pair(&h, DEFAULT_TOL).unwrap();
        assert!((e0 - s.eigenvalues[0]).abs() < 1e-10);
        for (a, b) in v.iter().zip(&s.eigenvectors[0]) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn bad_tolerance_rejected() {
        let h = build_hamiltonian(&ModelParams::new(4, 0.0, 0.1).unwrap());
        assert!(diagonalize(&h, 0.0).is_err());
        assert!(diagonalize(&h, f64::NAN).is_err());
    }

    #[test]
    fn minima_plateau_rule() {
        assert_eq!(interior_minima(&[3.0, 1.0, 3.0]), vec![1]);
        assert_eq!(interior_minima(&[3.0, 1.0, 1.0, 1.0, 2.0]), vec![1]);
        // Descending into the right edge is not interior.
        assert!(interior_minima(&[3.0, 2.0, 1.0]).is_empty());
        assert!(interior_minima(&[3.0, 1.0, 1.0]).is_empty());
        assert!(interior_minima(&[1.0, 1.0, 1.0]).is_empty());
        assert_eq!(interior_minima(&[2.0, 1.0, 2.0, 0.5, 2.0]), vec![1, 3]);
    }

    #[test]
    fn spacing_minima_two_clusters() {
        let s = spectrum(500, 0.0, 0.002);
        let prof = spacings(&s);
        let clusters = prof.minimum_clusters(3);
        assert_eq!(clusters.len(), 2, "{:?}", prof.minima_indices);
    }

    #[test]
    fn asymmetric_minima_for_positive_g() {
        let s = spectrum(500, 0.003, 0.002);
        let prof = spacings(&s);
        assert!(!prof.minima_indices.is_empty());
        let n = prof.spacings.len();
        let mirrored: Vec<usize> = prof.minima_indices.iter().map(|i| n - 1 - i).rev().collect();
        assert_ne!(mirrored, prof.minima_indices);
    }

    #[test]
    fn inflection_values() {
        let e = |g| inflection_energies(&ModelParams::new(500, g, 0.0).unwrap());
        assert_eq!(e(0.0), (0.0, 250.0));
        assert!((e(0.003).1 - 437.5).abs() < 1e-12);
        assert!((e(-0.003).1 - 62.5).abs() < 1e-12);
    }

    #[test]
    fn degeneracies_absent_above_saddle_threshold() {
        let s = spectrum(500, -0.003, 0.001);
        assert!(detect_degeneracies(&s, 1e-6).is_empty());
        let s = spectrum(500, 0.0, 0.002);
        assert!(detect_degeneracies(&s, DEFAULT_DEGENERACY_TOL).is_empty());
    }

    #[test]
    fn degeneracy_detection_on_constructed_spectrum() {
        let s = Spectrum { n_total: 6, eigenvalues: vec![0.0, 1.0, 1.0 + 1e-12, 3.0], eigenvectors: vec![vec![]; 4] };
        let pairs = detect_degeneracies(&s, 1e-8);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].lower, 1);
        assert!(pairs[0].splitting > 0.0);
    }

    #[test]
    fn population_inversion_across_closest_pair() {
        // Two ladders of states coexist between E_up = 62.5 and the top of
        // the spectrum; the closest pair there belongs to different ladders.
        let s = spectrum(500, -0.003, 0.0002);
        let pair = closest_pair_in(&s, 62.5, 75.0).unwrap();
        let a = mode_populations(&s, pair.lower).unwrap();
        let b = mode_populations(&s, pair.lower + 1).unwrap();
        assert!((a.n0 > a.n1) != (b.n0 > b.n1), "{a:?} {b:?}");
    }

    #[test]
    fn populations_conserve_n() {
        let s = spectrum(100, 0.01, 0.01);
        for i in 0..s.len() {
            let p = mode_populations(&s, i).unwrap();
            assert!((p.n0 + p.n1 + p.n2 - 100.0).abs() < 1e-10);
            assert_eq!(p.n0, p.n2);
        }
        let s0 = spectrum(100, 0.0, 0.0);
        let p = mode_populations(&s0, 0).unwrap();
        assert_eq!((p.n0, p.n1, p.n2), (0.0, 100.0, 0.0));
        assert!(matches!(mode_populations(&s, 51), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn classification_examples() {
        let p = ModelParams::new(500, 0.0, 0.0005).unwrap();
        let s = diagonalize(&build_hamiltonian(&p), DEFAULT_TOL).unwrap();
        let c = classify_states(&s, &p);
        assert_eq!((c.frac_below, c.frac_above), (0.0, 0.0));
        // The second-order shift puts the lowest level just below zero.
        let strict = classify_states_with(&s, &p, BoundaryMargins::strict());
        assert_eq!(strict.labels[0], StateLabel::RoBelow);

        let p = ModelParams::new(500, 0.0, 0.002).unwrap();
        let s = diagonalize(&build_hamiltonian(&p), DEFAULT_TOL).unwrap();
        let c = classify_states(&s, &p);
        assert!(c.frac_below > 0.0 && c.frac_above > 0.0);
        assert!((c.frac_below - c.frac_above).abs() <= 1.0 / 251.0 + 1e-15);

        let p = ModelParams::new(40, 0.2, 0.0).unwrap();
        let s = diagonalize(&build_hamiltonian(&p), DEFAULT_TOL).unwrap();
        assert!(classify_states(&s, &p).labels.iter().all(|&l| l == StateLabel::Mst));
        assert!(classify_states_with(&s, &p, BoundaryMargins::strict()).labels.iter().all(|&l| l == StateLabel::Mst));
    }

    #[test]
    fn approximate_reflection_symmetry_at_zero_g() {
        // Exact only in the classical limit; at finite N the mirrored levels
        // agree to well within one unperturbed level spacing.
        for big_g in [0.0005, 0.001, 0.002] {
            let s = spectrum(500, 0.0, big_g);
            let n = s.len();
            for i in 0..n {
                let dev = s.eigenvalues[i] + s.eigenvalues[n - 1 - i] - 250.0;
                assert!(dev.abs() < 0.5, "G = {big_g}, i = {i}, deviation {dev}");
            }
        }
    }
}
