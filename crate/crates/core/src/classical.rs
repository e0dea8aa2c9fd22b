//! Classical limit of the reduced model on the `(j_z, φ)` cylinder,
//!
//! `h(j_z, φ) = (j_z + 1) + g'(j_z + 1)² + 4G'(1 - j_z²) cos φ`,
//!
//! in units of `δ'`, with `g' = (N/4) g/δ` and `G' = (N/4) G/δ`.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalParams {
    /// `g'/δ'`
    pub gp: f64,
    /// `G'/δ'`
    pub big_gp: f64,
}

impl ClassicalParams {
    pub fn new(gp: f64, big_gp: f64) -> Result<Self> {
        if !gp.is_finite() || !big_gp.is_finite() {
            return Err(invalid("classical parameters must be finite"));
        }
        if big_gp < 0.0 {
            return Err(invalid(format!("G'/delta' must be non-negative, got {big_gp}")));
        }
        Ok(Self { gp, big_gp })
    }

    /// `h` on the `j_z = 1` edge.
    pub fn upper_boundary_energy(&self) -> f64 {
        2.0 + 4.0 * self.gp
    }
}

pub fn rescale(p: &ModelParams) -> ClassicalParams {
    rescale_ratios(p.n_total(), p.g_ratio(), p.big_g_ratio())
}

pub fn rescale_ratios(n_total: u32, g_ratio: f64, big_g_ratio: f64) -> ClassicalParams {
    let s = n_total as f64 / 4.0;
    ClassicalParams { gp: s * g_ratio, big_gp: s * big_g_ratio }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub jz: f64,
    pub phi: f64,
}

impl PhasePoint {
    pub fn new(jz: f64, phi: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&jz) || !(0.0..TAU).contains(&phi) {
            return Err(Error::OutOfBounds { jz, phi });
        }
        Ok(Self { jz, phi })
    }

    /// Reduces `phi` into `[0, 2π)`; `jz` must still be in `[-1, 1]`.
    pub fn wrapped(jz: f64, phi: f64) -> Result<Self> {
        let mut phi = phi.rem_euclid(TAU);
        if phi >= TAU {
            phi = 0.0;
        }
        Self::new(jz, phi)
    }
}

pub fn energy(pt: PhasePoint, cp: &ClassicalParams) -> f64 {
    h(pt.jz, pt.phi.cos(), cp)
}

fn h(jz: f64, cos_phi: f64, cp: &ClassicalParams) -> f64 {
    let x = jz + 1.0;
    x + cp.gp * x * x + 4.0 * cp.big_gp * (1.0 - jz * jz) * cos_phi
}

/// `(∂h/∂j_z, ∂h/∂φ)`.
pub fn gradient(pt: PhasePoint, cp: &ClassicalParams) -> (f64, f64) {
    let (s, c) = pt.phi.sin_cos();
    (1.0 + 2.0 * cp.gp * (pt.jz + 1.0) - 8.0 * cp.big_gp * pt.jz * c, -4.0 * cp.big_gp * (1.0 - pt.jz * pt.jz) * s)
}

// ---------------------------------------------------------------------------
// Critical points

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExtremumKind {
    Max,
    Min,
    /// Indefinite Hessian. Occurs on the `φ = π` line for `g' < 0` and small
    /// `G'`, where it organises the degenerate orbits near the top of the
    /// band.
    Saddle,
}

/// Interior critical point on the `φ = 0` or `φ = π` line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InteriorPoint {
    pub phi: f64,
    /// Candidate position from the stationarity condition; `NaN` when the
    /// denominator vanishes.
    pub jz: f64,
    pub exists: bool,
    pub energy: Option<f64>,
    /// `None` when the point does not exist or the Hessian is singular.
    pub kind: Option<ExtremumKind>,
    pub note: Option<&'static str>,
}

impl InteriorPoint {
    pub fn point(&self) -> Option<PhasePoint> {
        self.exists.then_some(PhasePoint { jz: self.jz, phi: self.phi })
    }
}

/// Saddle on the `j_z = ±1` edge at `φ = arccos(argument)` (mirror point
/// `2π - φ` implied).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundarySaddle {
    pub jz: f64,
    pub argument: f64,
    pub exists: bool,
    pub energy: f64,
}

impl BoundarySaddle {
    pub fn point(&self) -> Option<PhasePoint> {
        self.exists.then(|| PhasePoint { jz: self.jz, phi: self.argument.acos() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPointSet {
    /// `[φ = 0, φ = π]`
    pub interior: [InteriorPoint; 2],
    /// `[j_z = 1, j_z = -1]`
    pub saddles: [BoundarySaddle; 2],
}

impl CriticalPointSet {
    pub fn upper_saddle(&self) -> &BoundarySaddle {
        &self.saddles[0]
    }

    pub fn lower_saddle(&self) -> &BoundarySaddle {
        &self.saddles[1]
    }

    pub fn existing_interior(&self) -> impl Iterator<Item = &InteriorPoint> {
        self.interior.iter().filter(|p| p.exists)
    }

    pub fn existing_saddles(&self) -> impl Iterator<Item = &BoundarySaddle> {
        self.saddles.iter().filter(|s| s.exists)
    }
}

pub fn critical_points(cp: &ClassicalParams) -> Result<CriticalPointSet> {
    if cp.big_gp == 0.0 {
        return Err(Error::DegenerateCoupling);
    }
    let interior = interior_candidates(cp);
    let saddle =
        |jz: f64, argument: f64, energy: f64| BoundarySaddle { jz, argument, exists: argument.abs() <= 1.0, energy };
    let g8 = 8.0 * cp.big_gp;
    Ok(CriticalPointSet {
        interior,
        saddles: [saddle(1.0, (1.0 + 4.0 * cp.gp) / g8, cp.upper_boundary_energy()), saddle(-1.0, -1.0 / g8, 0.0)],
    })
}

fn interior_candidates(cp: &ClassicalParams) -> [InteriorPoint; 2] {
    let (gp, gg) = (cp.gp, cp.big_gp);
    let candidate = |phi: f64, cos_phi: f64| {
        // ∂h/∂j_z = 0 with cos φ = ±1.
        let denom = 8.0 * gg * cos_phi - 2.0 * gp;
        if denom == 0.0 {
            return InteriorPoint {
                phi,
                jz: f64::NAN,
                exists: false,
                energy: None,
                kind: None,
                note: Some("stationarity condition degenerate (8G' cos phi = 2g')"),
            };
        }
        let jz = (1.0 + 2.0 * gp) / denom;
        if !(jz.abs() < 1.0) {
            return InteriorPoint { phi, jz, exists: false, energy: None, kind: None, note: None };
        }
        let h_jj = 2.0 * gp - 8.0 * gg * cos_phi;
        let h_pp = -4.0 * gg * (1.0 - jz * jz) * cos_phi;
        let kind = if h_jj > 0.0 && h_pp > 0.0 {
            Some(ExtremumKind::Min)
        } else if h_jj < 0.0 && h_pp < 0.0 {
            Some(ExtremumKind::Max)
        } else if h_jj * h_pp < 0.0 {
            Some(ExtremumKind::Saddle)
        } else {
            None
        };
        InteriorPoint {
            phi,
            jz,
            exists: true,
            energy: Some(h(jz, cos_phi, cp)),
            kind,
            note: kind.is_none().then_some("singular Hessian"),
        }
    };
    [candidate(0.0, 1.0), candidate(PI, -1.0)]
}

/// `(G'_lower, G'_upper)`: couplings at which the saddles on the `j_z = -1`
/// and `j_z = 1` edges appear.
pub fn separatrix_thresholds(gp: f64) -> (f64, f64) {
    (0.125, (1.0 + 4.0 * gp).abs() / 8.0)
}

/// Exact `(min h, max h)` over the cylinder.
pub fn energy_range(cp: &ClassicalParams) -> (f64, f64) {
    let mut lo = 0.0f64.min(cp.upper_boundary_energy());
    let mut hi = 0.0f64.max(cp.upper_boundary_energy());
    for p in interior_candidates(cp).iter().filter(|p| p.exists) {
        let e = p.energy.unwrap_or(0.0);
        lo = lo.min(e);
        hi = hi.max(e);
    }
    (lo, hi)
}

pub fn classical_ground_energy(cp: &ClassicalParams) -> f64 {
    energy_range(cp).0
}

// ---------------------------------------------------------------------------
// Orbits

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum OrbitClass {
    #[serde(rename = "CLOSED_LOWER")]
    ClosedLower,
    #[serde(rename = "OPEN")]
    Open,
    #[serde(rename = "CLOSED_UPPER")]
    ClosedUpper,
}

impl OrbitClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            OrbitClass::ClosedLower => "CLOSED_LOWER",
            OrbitClass::Open => "OPEN",
            OrbitClass::ClosedUpper => "CLOSED_UPPER",
        }
    }
}

fn orbit_class(e: f64, cp: &ClassicalParams) -> OrbitClass {
    if e < 0.0 {
        OrbitClass::ClosedLower
    } else if e > cp.upper_boundary_energy() {
        OrbitClass::ClosedUpper
    } else {
        OrbitClass::Open
    }
}

pub fn classify_energy(e: f64, cp: &ClassicalParams) -> Result<OrbitClass> {
    check_attainable(e, cp)?;
    Ok(orbit_class(e, cp))
}

fn energy_tolerance(cp: &ClassicalParams) -> f64 {
    1e-12 * (1.0 + cp.gp.abs() + cp.big_gp)
}

fn check_attainable(e: f64, cp: &ClassicalParams) -> Result<()> {
    let (min, max) = energy_range(cp);
    let tol = energy_tolerance(cp);
    if !(e >= min - tol && e <= max + tol) {
        return Err(Error::UnattainableEnergy { energy: e, min, max });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub points: Vec<PhasePoint>,
    /// Contractible loop (libration). Orbits winding around the cylinder in
    /// `φ` and curves ending on a `j_z = ±1` edge are not closed.
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum LevelSet {
    Curves(Vec<Curve>),
    /// `G' = 0`: `h` does not depend on `φ`, so every level set is a union of
    /// lines `j_z = const`.
    VerticalLines {
        jz: Vec<f64>,
    },
}

/// End of an admissible `j_z` interval.
#[derive(Debug, Clone, Copy)]
enum End {
    /// Interior turning point where `cos φ = ±1` and the two branches meet.
    Turning { jz: f64, cos_phi: f64 },
    /// The interval reaches a `j_z = ±1` edge with finite `cos φ`.
    Edge { jz: f64, cos_phi: f64 },
}

/// Contour `h = e` traced on `n_samples` midpoint `j_z` samples.
pub fn level_set(e: f64, cp: &ClassicalParams, n_samples: usize) -> Result<LevelSet> {
    if n_samples < 16 {
        return Err(invalid(format!("level set needs at least 16 samples, got {n_samples}")));
    }
    check_attainable(e, cp)?;
    if cp.big_gp == 0.0 {
        return Ok(LevelSet::VerticalLines { jz: vertical_lines(e, cp.gp) });
    }
    let tol = energy_tolerance(cp);
    for p in interior_candidates(cp).iter().filter(|p| p.exists) {
        let extremum = matches!(p.kind, Some(ExtremumKind::Min | ExtremumKind::Max));
        if extremum && (p.energy.unwrap_or(f64::NAN) - e).abs() <= tol {
            let pt = PhasePoint { jz: p.jz, phi: p.phi };
            return Ok(LevelSet::Curves(vec![Curve { points: vec![pt], closed: true }]));
        }
    }

    let cos_at = |jz: f64| {
        let x = jz + 1.0;
        (e - x - cp.gp * x * x) / (4.0 * cp.big_gp * (1.0 - jz * jz))
    };
    // Finite limits of cos φ at the edges when the level passes through them.
    let lower_limit = (e.abs() <= tol).then(|| -1.0 / (8.0 * cp.big_gp));
    let upper_limit = ((e - cp.upper_boundary_energy()).abs() <= tol).then(|| (1.0 + 4.0 * cp.gp) / (8.0 * cp.big_gp));

    let step = 2.0 / n_samples as f64;
    let samples: Vec<(f64, f64)> = (0..n_samples)
        .map(|k| {
            let jz = -1.0 + (k as f64 + 0.5) * step;
            (jz, cos_at(jz))
        })
        .collect();
    let admissible = |c: f64| c.abs() <= 1.0;

    let turning = |inside: (f64, f64), outside_jz: f64| {
        let (mut a, mut b) = (inside.0, outside_jz);
        for _ in 0..60 {
            let mid = 0.5 * (a + b);
            if admissible(cos_at(mid)) {
                a = mid;
            } else {
                b = mid;
            }
        }
        End::Turning { jz: a, cos_phi: cos_at(a).clamp(-1.0, 1.0).signum() }
    };

    let mut curves = Vec::new();
    let mut k = 0;
    while k < n_samples {
        if !admissible(samples[k].1) {
            k += 1;
            continue;
        }
        let start = k;
        while k + 1 < n_samples && admissible(samples[k + 1].1) {
            k += 1;
        }
        let stop = k;
        k += 1;

        let left = if start > 0 {
            turning(samples[start], samples[start - 1].0)
        } else {
            match lower_limit {
                Some(c) if admissible(c) => End::Edge { jz: -1.0, cos_phi: c },
                _ => turning(samples[start], -1.0),
            }
        };
        let right = if stop + 1 < n_samples {
            turning(samples[stop], samples[stop + 1].0)
        } else {
            match upper_limit {
                Some(c) if admissible(c) => End::Edge { jz: 1.0, cos_phi: c },
                _ => turning(samples[stop], 1.0),
            }
        };
        curves.push(assemble(left, &samples[start..=stop], right)?);
    }
    Ok(LevelSet::Curves(curves))
}

/// Walks the `φ = arccos c` branch upward in `j_z`, then the
/// `φ = 2π - arccos c` branch back down.
fn assemble(left: End, run: &[(f64, f64)], right: End) -> Result<Curve> {
    let end_point = |end: End| match end {
        End::Turning { jz, cos_phi } | End::Edge { jz, cos_phi } => (jz, cos_phi),
    };
    let (l_jz, l_c) = end_point(left);
    let (r_jz, r_c) = end_point(right);
    let mut upper: Vec<(f64, f64)> = Vec::with_capacity(run.len() + 2);
    upper.push((l_jz, l_c));
    upper.extend(run.iter().map(|&(jz, c)| (jz, c.clamp(-1.0, 1.0))));
    upper.push((r_jz, r_c));

    let mut points = Vec::with_capacity(2 * upper.len());
    for &(jz, c) in &upper {
        points.push(PhasePoint::wrapped(jz, c.acos())?);
    }
    // Skip the shared turning points so they appear once.
    let skip_last = matches!(right, End::Turning { .. });
    let skip_first = matches!(left, End::Turning { .. });
    let lower = &upper[usize::from(skip_first)..upper.len() - usize::from(skip_last)];
    for &(jz, c) in lower.iter().rev() {
        points.push(PhasePoint::wrapped(jz, TAU - c.acos())?);
    }
    let closed = match (left, right) {
        (End::Turning { cos_phi: a, .. }, End::Turning { cos_phi: b, .. }) => a == b,
        _ => false,
    };
    Ok(Curve { points, closed })
}

fn vertical_lines(e: f64, gp: f64) -> Vec<f64> {
    // (jz + 1) + g'(jz + 1)² = e
    let mut roots = Vec::new();
    if gp == 0.0 {
        roots.push(e - 1.0);
    } else {
        let disc = 1.0 + 4.0 * gp * e;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            // Cancellation-free pair of roots in x = jz + 1.
            let q = -0.5 * (1.0 + sq);
            roots.push(q / gp - 1.0);
            if q != 0.0 {
                roots.push(-e / q - 1.0);
            }
        }
    }
    let mut jz: Vec<f64> = roots.into_iter().filter(|j| (-1.0..=1.0).contains(j)).collect();
    jz.sort_by(f64::total_cmp);
    jz.dedup();
    jz
}

/// Share of the uniform `(j_z, φ)` measure whose energy falls in `cls`,
/// by `resolution × resolution` midpoint quadrature.
pub fn region_fraction(cp: &ClassicalParams, cls: OrbitClass, resolution: usize) -> Result<f64> {
    Ok(region_fractions(cp, resolution)?[cls as usize])
}

/// Fractions for `[ClosedLower, Open, ClosedUpper]` from one quadrature
/// pass; they sum to one.
pub fn region_fractions(cp: &ClassicalParams, resolution: usize) -> Result<[f64; 3]> {
    if resolution < 64 {
        return Err(invalid(format!("quadrature resolution must be at least 64, got {resolution}")));
    }
    let cosines: Vec<f64> = (0..resolution).map(|j| ((j as f64 + 0.5) * TAU / resolution as f64).cos()).collect();
    let counts = (0..resolution)
        .into_par_iter()
        .map(|i| {
            let jz = -1.0 + (i as f64 + 0.5) * 2.0 / resolution as f64;
            let mut row = [0u64; 3];
            for &c in &cosines {
                row[orbit_class(h(jz, c, cp), cp) as usize] += 1;
            }
            row
        })
        .reduce(|| [0; 3], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
    let total = (resolution * resolution) as f64;
    Ok(counts.map(|c| c as f64 / total))
}
