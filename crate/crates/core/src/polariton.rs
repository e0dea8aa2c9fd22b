//! Lower-polariton microcavity mapped onto the three-mode model: signal at
//! `k = 0`, pump at `k_p` and idler at `2k_p` on the parametric resonance.
//!
//! Units: energies in meV, wavevectors in µm⁻¹, lengths in µm. Coupling
//! coefficients are kept as energies (`ħG`), so every ratio handed to the
//! model is dimensionless.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::rescale_ratios;
use crate::error::{invalid, Error, Result};
use crate::model::ModelParams;

/// `e²/(4πε₀)` in meV·µm.
pub const COULOMB_MEV_UM: f64 = 1.439_964_547;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MicrocavityParams {
    /// Cavity photon energy at `k = 0`.
    pub e_cav0: f64,
    /// Exciton energy, flat in `k`.
    pub e_exc: f64,
    /// Rabi splitting `ħΩ_R`.
    pub rabi: f64,
    /// Parabolic cavity dispersion coefficient, meV·µm².
    pub cavity_curvature: f64,
    /// Exciton Bohr radius `a_exc`.
    pub bohr_radius: f64,
    /// Relative dielectric constant.
    pub dielectric: f64,
    /// Quantization area, µm².
    pub area: f64,
    /// Elementary charge in √(meV·µm), so that `charge²` is `e²/(4πε₀)`.
    pub charge: f64,
    /// Optional two-column CSV `(k, E_LP)` replacing the parabolic cavity
    /// branch. Relative paths resolve against the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dispersion_file: Option<PathBuf>,
    #[serde(skip)]
    pub dispersion: Dispersion,
}

/// Source of the cavity photon energy `E_cav(k)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Dispersion {
    /// `e_cav0 + cavity_curvature · k²`.
    #[default]
    Parabolic,
    Tabulated(Arc<DispersionTable>),
}

/// Cavity branch reconstructed from a measured lower-polariton branch,
/// `E_cav = E_LP + Ω²/(4(E_exc - E_LP))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionTable {
    pub k: Vec<f64>,
    pub e_cav: Vec<f64>,
    /// `e_cav0` at load time; later detuning changes shift the whole branch.
    pub reference_e_cav0: f64,
}

impl DispersionTable {
    /// Linear interpolation, extended linearly beyond the last row.
    fn e_cav(&self, k: f64) -> f64 {
        let n = self.k.len();
        let i = self.k.partition_point(|&x| x <= k).clamp(1, n - 1);
        let (k0, k1) = (self.k[i - 1], self.k[i]);
        let t = (k - k0) / (k1 - k0);
        self.e_cav[i - 1] + t * (self.e_cav[i] - self.e_cav[i - 1])
    }

    pub fn k_max(&self) -> f64 {
        self.k[self.k.len() - 1]
    }
}

impl Default for MicrocavityParams {
    /// GaAs-like planar cavity, zero detuning. Matches
    /// `data/microcavity_default.toml`.
    fn default() -> Self {
        Self {
            e_cav0: 1500.0,
            e_exc: 1500.0,
            rabi: 5.0,
            cavity_curvature: 1.27,
            bohr_radius: 0.01,
            dielectric: 12.9,
            area: 100.0,
            charge: COULOMB_MEV_UM.sqrt(),
            dispersion_file: None,
            dispersion: Dispersion::Parabolic,
        }
    }
}

/// Text of the default configuration file.
pub const DEFAULT_CONFIG: &str = include_str!("../data/microcavity_default.toml");

impl MicrocavityParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("e_cav0", self.e_cav0),
            ("e_exc", self.e_exc),
            ("rabi", self.rabi),
            ("cavity_curvature", self.cavity_curvature),
            ("bohr_radius", self.bohr_radius),
            ("dielectric", self.dielectric),
            ("area", self.area),
            ("charge", self.charge),
        ];
        if let Some((name, v)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(invalid(format!("{name} must be finite, got {v}")));
        }
        for (name, v) in [
            ("rabi", self.rabi),
            ("area", self.area),
            ("bohr_radius", self.bohr_radius),
            ("dielectric", self.dielectric),
        ] {
            if v <= 0.0 {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.cavity_curvature < 0.0 {
            return Err(invalid("cavity_curvature must be non-negative"));
        }
        Ok(())
    }

    /// Parses TOML text; `base_dir` resolves a relative `dispersion_file`.
    pub fn from_toml_str(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut mc: Self = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        mc.validate()?;
        if let Some(file) = mc.dispersion_file.clone() {
            let path = match base_dir {
                Some(dir) if file.is_relative() => dir.join(file),
                _ => file,
            };
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            mc = mc.with_table(&text)?;
        }
        Ok(mc)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text, path.parent())
    }

    /// Replaces the parabolic cavity branch by one reconstructed from a
    /// `(k, E_LP)` CSV table (ascending `k`, `#` comments allowed).
    pub fn with_table(mut self, csv_text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(csv_text.as_bytes());
        let (mut k, mut e_cav) = (Vec::new(), Vec::new());
        for (row, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Config(format!("dispersion table: {e}")))?;
            let parse = |i: usize| rec.get(i).and_then(|s| s.parse::<f64>().ok());
            let (Some(ki), Some(lp)) = (parse(0), parse(1)) else {
                if row == 0 {
                    continue; // header line
                }
                return Err(Error::Config(format!("dispersion table: bad row {}", row + 1)));
            };
            if !(lp < self.e_exc) {
                return Err(Error::Config(format!("dispersion table: E_LP = {lp} not below e_exc")));
            }
            k.push(ki);
            e_cav.push(lp + self.rabi * self.rabi / (4.0 * (self.e_exc - lp)));
        }
        if k.len() < 2 {
            return Err(Error::Config("dispersion table needs at least two rows".into()));
        }
        if k[0] < 0.0 || k.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("dispersion table: k must be non-negative and strictly ascending".into()));
        }
        self.e_cav0 = DispersionTable { k: k.clone(), e_cav: e_cav.clone(), reference_e_cav0: 0.0 }.e_cav(0.0);
        self.dispersion = Dispersion::Tabulated(Arc::new(DispersionTable { k, e_cav, reference_e_cav0: self.e_cav0 }));
        Ok(self)
    }

    /// Same cavity with `e_cav0 - e_exc = delta0`.
    pub fn with_detuning(&self, delta0: f64) -> Self {
        Self { e_cav0: self.e_exc + delta0, ..self.clone() }
    }

    pub fn detuning0(&self) -> f64 {
        self.e_cav0 - self.e_exc
    }

    pub fn cavity_energy(&self, k: f64) -> f64 {
        match &self.dispersion {
            Dispersion::Parabolic => self.e_cav0 + self.cavity_curvature * k * k,
            Dispersion::Tabulated(t) => t.e_cav(k) + (self.e_cav0 - t.reference_e_cav0),
        }
    }

    /// `V₀ = 6 e² a_exc / (ε A)`.
    pub fn v0(&self) -> f64 {
        6.0 * self.charge * self.charge * self.bohr_radius / (self.dielectric * self.area)
    }
}

/// Exciton amplitude of the lower polariton,
/// `u = √[(Δ + √(Δ² + Ω²)) / (2√(Δ² + Ω²))]`.
pub fn hopfield_u(detuning: f64, rabi: f64) -> Result<f64> {
    if !(rabi > 0.0) {
        return Err(invalid(format!("Rabi splitting must be positive, got {rabi}")));
    }
    let s = detuning.hypot(rabi);
    // Avoid the cancellation in Δ + s for strongly negative detuning.
    let num = if detuning >= 0.0 { detuning + s } else { rabi * rabi / (s - detuning) };
    Ok((num / (2.0 * s)).sqrt())
}

pub fn lp_energy(k: f64, mc: &MicrocavityParams) -> f64 {
    lp_from_cavity(mc.cavity_energy(k), mc)
}

fn lp_from_cavity(e_cav: f64, mc: &MicrocavityParams) -> f64 {
    let d = e_cav - mc.e_exc;
    let s = d.hypot(mc.rabi);
    let r2 = mc.rabi * mc.rabi;
    if d >= 0.0 {
        mc.e_exc - r2 / (2.0 * (d + s))
    } else {
        e_cav - r2 / (2.0 * (s - d))
    }
}

fn hopfield_at(k: f64, mc: &MicrocavityParams) -> f64 {
    hopfield_u(mc.cavity_energy(k) - mc.e_exc, mc.rabi).expect("validated Rabi splitting")
}

/// Search window for the parametric resonance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MagicSearch {
    pub k_max: f64,
    pub samples: usize,
}

impl Default for MagicSearch {
    fn default() -> Self {
        Self { k_max: 10.0, samples: 2000 }
    }
}

/// `f(k) = 2E_LP(k) - E_LP(0) - E_LP(2k)`.
pub fn resonance_mismatch(k: f64, mc: &MicrocavityParams) -> f64 {
    2.0 * lp_energy(k, mc) - lp_energy(0.0, mc) - lp_energy(2.0 * k, mc)
}

pub fn magic_wavevector(mc: &MicrocavityParams) -> Result<f64> {
    magic_wavevector_in(mc, MagicSearch::default())
}

/// First sign change of the resonance mismatch on `(0, k_max]`, refined by
/// bisection to `1e-10` relative.
pub fn magic_wavevector_in(mc: &MicrocavityParams, search: MagicSearch) -> Result<f64> {
    mc.validate()?;
    if search.samples < 2 || !(search.k_max > 0.0) {
        return Err(invalid("magic-angle search needs k_max > 0 and at least 2 samples"));
    }
    let k_max = match &mc.dispersion {
        Dispersion::Tabulated(t) => search.k_max.min(t.k_max() / 2.0),
        Dispersion::Parabolic => search.k_max,
    };
    let f = |k: f64| resonance_mismatch(k, mc);
    let dk = k_max / search.samples as f64;
    let mut a = dk;
    let mut fa = f(a);
    for i in 2..=search.samples {
        let b = dk * i as f64;
        let fb = f(b);
        if (fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0) {
            return Ok(bisect(f, a, b, fa));
        }
        a = b;
        fa = fb;
    }
    Err(Error::NoMagicAngle { k_max })
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    while b - a > 1e-10 * b.abs() {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeSet {
    /// `[0, k_p, 2k_p]`
    pub k: [f64; 3],
    pub energy: [f64; 3],
    pub hopfield: [f64; 3],
}

pub fn mode_set(mc: &MicrocavityParams, k_p: f64) -> ModeSet {
    let k = [0.0, k_p, 2.0 * k_p];
    ModeSet { k, energy: k.map(|q| lp_energy(q, mc)), hopfield: k.map(|q| hopfield_at(q, mc)) }
}

/// `G_ijkl` (energy units) for `a_i† a_j† a_k a_l`, indices in units of `k_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingTable {
    pub g: [[[[f64; 3]; 3]; 3]; 3],
}

impl CouplingTable {
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.g[i][j][k][l]
    }

    /// Nonzero entries as `((i, j, k, l), value)`.
    pub fn entries(&self) -> impl Iterator<Item = ([usize; 4], f64)> + '_ {
        (0..81).filter_map(move |n| {
            let idx = [n / 27, (n / 9) % 3, (n / 3) % 3, n % 3];
            let v = self.g[idx[0]][idx[1]][idx[2]][idx[3]];
            (v != 0.0).then_some((idx, v))
        })
    }
}

pub fn coupling_table(mc: &MicrocavityParams, k_p: f64) -> CouplingTable {
    coupling_table_from(mode_set(mc, k_p).hopfield, mc.v0())
}

/// Every scattering `(k, k') → (k + q, k' - q)` that keeps all momenta in
/// `{0, k_p, 2k_p}` adds `½ V₀ u_{k+q} u_{k'-q} u_k u_{k'}` to the
/// normal-ordered coefficient.
pub fn coupling_table_from(u: [f64; 3], v0: f64) -> CouplingTable {
    let mut g = [[[[0.0; 3]; 3]; 3]; 3];
    for a in 0..3usize {
        for b in 0..3 {
            for i in 0..3 {
                let Some(j) = (a + b).checked_sub(i).filter(|&j| j < 3) else { continue };
                g[i][j][a][b] += 0.5 * v0 * u[i] * u[j] * u[a] * u[b];
            }
        }
    }
    CouplingTable { g }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveParams {
    pub delta: f64,
    pub g: f64,
    pub big_g: f64,
    pub g_ratio: f64,
    pub big_g_ratio: f64,
}

impl EffectiveParams {
    pub fn to_model(&self, n_total: u32) -> Result<ModelParams> {
        ModelParams::new(n_total, self.g_ratio, self.big_g_ratio)
    }
}

pub fn effective_params(t: &CouplingTable, energies: [f64; 3], n_total: u32) -> Result<EffectiveParams> {
    let c = |i, j, k, l| t.get(i, j, k, l);
    let n = n_total as f64;
    let [e0, e1, e2] = energies;
    let delta = e0 + e2 - 2.0 * e1 - c(0, 0, 0, 0) - c(2, 2, 2, 2)
        + 2.0 * c(1, 1, 1, 1)
        + 4.0 * n * (c(1, 2, 1, 2) + c(0, 1, 0, 1) - c(1, 1, 1, 1));
    let g = -8.0 * c(1, 2, 1, 2) + c(0, 0, 0, 0) + 4.0 * c(0, 2, 0, 2) - 8.0 * c(0, 1, 0, 1)
        + 4.0 * c(1, 1, 1, 1)
        + c(2, 2, 2, 2);
    let big_g = 2.0 * c(1, 1, 0, 2);
    if delta == 0.0 {
        return Err(Error::DegenerateDetuning);
    }
    Ok(EffectiveParams { delta, g, big_g, g_ratio: g / delta, big_g_ratio: big_g.abs() / delta })
}

/// `G/δ = (4/N) · 0.125`, where `G'/δ'` reaches the lower threshold.
pub fn critical_ratio(n_total: u32) -> f64 {
    0.5 / n_total as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SweepOptions {
    /// Keep the pump wavevector solved at the base detuning instead of
    /// re-solving the resonance at every point.
    pub freeze_kp: bool,
    pub search: MagicSearch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetuningRow {
    pub delta0: f64,
    pub k_p: Option<f64>,
    pub params: Option<EffectiveParams>,
    /// `G'/δ' > 0.125`.
    pub supercritical: Option<bool>,
    /// Why the point has no result.
    pub gap: Option<String>,
}

/// Full pipeline per detuning: resonance, Hopfield factors, couplings and
/// model ratios. Points without a resonance are kept as gaps.
pub fn detuning_sweep(
    base: &MicrocavityParams,
    delta0_grid: &[f64],
    n_total: u32,
    opts: SweepOptions,
) -> Result<Vec<DetuningRow>> {
    base.validate()?;
    ModelParams::new(n_total, 0.0, 0.0)?;
    let frozen = if opts.freeze_kp { Some(magic_wavevector_in(base, opts.search)?) } else { None };
    delta0_grid
        .par_iter()
        .map(|&delta0| {
            let mc = base.with_detuning(delta0);
            let k_p = match frozen {
                Some(k) => k,
                None => match magic_wavevector_in(&mc, opts.search) {
                    Ok(k) => k,
                    Err(e @ Error::NoMagicAngle { .. }) => return Ok(gap_row(delta0, None, e)),
                    Err(e) => return Err(e),
                },
            };
            let modes = mode_set(&mc, k_p);
            let table = coupling_table_from(modes.hopfield, mc.v0());
            match effective_params(&table, modes.energy, n_total) {
                Ok(p) => Ok(DetuningRow {
                    delta0,
                    k_p: Some(k_p),
                    supercritical: Some(rescale_ratios(n_total, 0.0, p.big_g_ratio).big_gp > 0.125),
                    params: Some(p),
                    gap: None,
                }),
                Err(e @ Error::DegenerateDetuning) => Ok(gap_row(delta0, Some(k_p), e)),
                Err(e) => Err(e),
            }
        })
        .collect()
}

fn gap_row(delta0: f64, k_p: Option<f64>, e: Error) -> DetuningRow {
    DetuningRow { delta0, k_p, params: None, supercritical: None, gap: Some(e.to_string()) }
}
