use threemode_core::classical::{
    classical_ground_energy, critical_points, energy_range, level_set, region_fractions, separatrix_thresholds,
    ClassicalParams, LevelSet,
};
use threemode_core::error::Error;
use threemode_core::grid::linspace;
use threemode_core::ground::{
    coupling_sweep, critical_from_table, differentiate, finite_size_scaling, Column, SweepTable,
};
use threemode_core::model::{build_hamiltonian, ModelParams};
use threemode_core::phase_diagram::{boundary_curves_with, semiclassical_curves};
use threemode_core::polariton::{critical_ratio, detuning_sweep, MagicSearch, MicrocavityParams, SweepOptions};
use threemode_core::spectral::{
    classify_states_with, detect_degeneracies, diagonalize, inflection_energies, mode_populations, spacings, MarginRule,
};

use crate::args::{
    ClassicalArgs, Command, GridSpec, GroundSweepArgs, Margin, ModelArgs, PhaseDiagramArgs, PolaritonArgs,
    SpacingsArgs, SpectrumArgs,
};
use crate::output::{Artifact, Value};
use crate::Failure;

pub fn run(command: &Command) -> Result<Artifact, Failure> {
    match command {
        Command::Spectrum(a) => spectrum(a),
        Command::Spacings(a) => spacing_table(a),
        Command::GroundSweep(a) => ground_sweep(a),
        Command::Classical(a) => classical(a),
        Command::PhaseDiagram(a) => phase_diagram(a),
        Command::Polariton(a) => polariton(a),
    }
}

fn grid(range: &GridSpec) -> Result<Vec<f64>, Failure> {
    Ok(linspace(range.start, range.stop, range.count)?)
}

fn rule(m: Margin) -> MarginRule {
    match m {
        Margin::HalfSpacing => MarginRule::HalfLevelSpacing,
        Margin::Strict => MarginRule::Strict,
    }
}

fn margin_name(m: Margin) -> &'static str {
    match m {
        Margin::HalfSpacing => "half-spacing",
        Margin::Strict => "strict",
    }
}

fn model(a: &ModelArgs) -> Result<ModelParams, Failure> {
    Ok(ModelParams::with_phase(a.n, a.g, a.big_g, a.phase)?)
}

fn model_meta(art: &mut Artifact, a: &ModelArgs) {
    art.meta("n_total", a.n);
    art.meta("g_ratio", a.g);
    art.meta("G_ratio", a.big_g);
    art.meta("G_phase", a.phase);
    art.meta("tol", a.tol);
}

fn spectrum(a: &SpectrumArgs) -> Result<Artifact, Failure> {
    let p = model(&a.model)?;
    let s = diagonalize(&build_hamiltonian(&p), a.model.tol)?;
    let margins = rule(a.margin).margins(&p);
    let c = classify_states_with(&s, &p, margins);
    let (e_low, e_up) = inflection_energies(&p);

    let mut art = Artifact::new("spectrum", vec!["index", "energy", "n0_mean", "n1_mean", "n2_mean", "label"]);
    model_meta(&mut art, &a.model);
    art.meta("margin", margin_name(a.margin));
    art.meta("margin_lower", margins.lower);
    art.meta("margin_upper", margins.upper);
    art.meta("E_low", e_low);
    art.meta("E_up", e_up);
    art.meta("frac_below", c.frac_below);
    art.meta("frac_above", c.frac_above);
    for (i, (e, label)) in s.eigenvalues.iter().zip(&c.labels).enumerate() {
        let pop = mode_populations(&s, i)?;
        art.push(vec![i.into(), (*e).into(), pop.n0.into(), pop.n1.into(), pop.n2.into(), label.as_str().into()]);
    }
    Ok(art)
}

fn spacing_table(a: &SpacingsArgs) -> Result<Artifact, Failure> {
    if !(a.degeneracy_tol > 0.0) {
        return Err(Failure::Invalid("degeneracy tolerance must be positive".into()));
    }
    let p = model(&a.model)?;
    let s = diagonalize(&build_hamiltonian(&p), a.model.tol)?;
    let prof = spacings(&s);
    let degenerate = detect_degeneracies(&s, a.degeneracy_tol);
    let (e_low, e_up) = inflection_energies(&p);
    let clusters = prof
        .minimum_clusters(3)
        .iter()
        .map(|c| c.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("; ");

    let mut art = Artifact::new("spacings", vec!["index", "energy_lower", "spacing", "local_minimum", "degenerate"]);
    model_meta(&mut art, &a.model);
    art.meta("degeneracy_tol", a.degeneracy_tol);
    art.meta("E_low", e_low);
    art.meta("E_up", e_up);
    art.meta("minimum_clusters", clusters);
    art.meta("degenerate_pairs", degenerate.len());
    art.meta("smallest_spacing", prof.spacings.iter().copied().reduce(f64::min));
    for (i, d) in prof.spacings.iter().enumerate() {
        art.push(vec![
            i.into(),
            s.eigenvalues[i].into(),
            (*d).into(),
            prof.minima_indices.binary_search(&i).is_ok().into(),
            degenerate.iter().any(|pair| pair.lower == i).into(),
        ]);
    }
    Ok(art)
}

fn ground_sweep(a: &GroundSweepArgs) -> Result<Artifact, Failure> {
    if let Some(sizes) = &a.sizes {
        let range = a.gp_grid.ok_or_else(|| Failure::Invalid("--sizes needs --Gp-grid".into()))?;
        let rows = finite_size_scaling(sizes, a.g, &grid(&range)?)?;
        let mut art = Artifact::new("ground-sweep", vec!["n_total", "peak_height", "peak_location"]);
        art.meta("gp", a.g);
        art.meta("Gp_grid", range.to_string());
        for r in rows {
            art.push(vec![r.n_total.into(), r.peak_height.into(), r.peak_location.into()]);
        }
        return Ok(art);
    }
    let (n, range) = match (a.n, a.grid) {
        (Some(n), Some(range)) => (n, range),
        _ => return Err(Failure::Invalid("ground-sweep needs --n and --G-grid".into())),
    };
    let t = coupling_sweep(n, a.g, &grid(&range)?)?;
    let mut art = Artifact::new(
        "ground-sweep",
        vec!["G_ratio", "energy", "n0_mean", "linear_entropy", "d_energy", "d2_energy", "d_entropy"],
    );
    art.meta("n_total", n);
    art.meta("g_ratio", a.g);
    art.meta("G_grid", range.to_string());
    let derivs = derivatives(&t);
    match &derivs {
        Some(_) => match critical_from_table(&t) {
            Ok(c) => {
                art.meta("critical_coupling", c.coupling);
                art.meta("entropy_derivative_peak", c.peak_height);
                art.meta("n0_departure", c.n0_departure);
            }
            Err(e) => art.meta("critical_coupling", format!("inconclusive: {e}")),
        },
        None => art.meta("critical_coupling", "grid too short for derivatives"),
    }
    for (i, r) in t.rows.iter().enumerate() {
        let d = |k: usize| derivs.as_ref().map_or(Value::Missing, |d| Value::Float(d[k][i]));
        art.push(vec![r.coupling.into(), r.energy.into(), r.n0_mean.into(), r.linear_entropy.into(), d(0), d(1), d(2)]);
    }
    Ok(art)
}

fn derivatives(t: &SweepTable) -> Option<[Vec<f64>; 3]> {
    let x = t.couplings();
    let e = t.column(Column::Energy);
    let s = t.column(Column::LinearEntropy);
    Some([differentiate(&x, &e, 1).ok()?, differentiate(&x, &e, 2).ok()?, differentiate(&x, &s, 1).ok()?])
}

fn classical(a: &ClassicalArgs) -> Result<Artifact, Failure> {
    let cp = ClassicalParams::new(a.gp, a.big_gp)?;
    let (lo, up) = separatrix_thresholds(a.gp);
    let (e_min, e_max) = energy_range(&cp);
    let f = region_fractions(&cp, a.resolution)?;
    let header = |art: &mut Artifact| {
        art.meta("gp", a.gp);
        art.meta("Gp", a.big_gp);
        art.meta("Gp_lower", lo);
        art.meta("Gp_upper", up);
        art.meta("ground_energy", classical_ground_energy(&cp));
        art.meta("energy_min", e_min);
        art.meta("energy_max", e_max);
        art.meta("resolution", a.resolution);
        art.meta("fraction_closed_lower", f[0]);
        art.meta("fraction_open", f[1]);
        art.meta("fraction_closed_upper", f[2]);
    };

    if let Some(e) = a.level {
        let mut art = Artifact::new("classical", vec!["curve", "point", "jz", "phi", "closed"]);
        header(&mut art);
        art.meta("level", e);
        art.meta("samples", a.samples);
        match level_set(e, &cp, a.samples)? {
            LevelSet::Curves(curves) => {
                for (ci, c) in curves.iter().enumerate() {
                    for (pi, p) in c.points.iter().enumerate() {
                        art.push(vec![ci.into(), pi.into(), p.jz.into(), p.phi.into(), c.closed.into()]);
                    }
                }
            }
            LevelSet::VerticalLines { jz } => {
                art.meta("degenerate", "G' = 0: level set is a union of lines j_z = const");
                for (ci, j) in jz.iter().enumerate() {
                    art.push(vec![ci.into(), 0usize.into(), (*j).into(), Value::Missing, false.into()]);
                }
            }
        }
        return Ok(art);
    }

    let set = critical_points(&cp)?;
    let mut art = Artifact::new("classical", vec!["name", "jz", "phi", "energy", "exists", "kind"]);
    header(&mut art);
    for (name, p) in ["interior_phi_0", "interior_phi_pi"].iter().zip(&set.interior) {
        let kind = p.kind.map(|k| format!("{k:?}").to_lowercase());
        art.push(vec![(*name).into(), p.jz.into(), p.phi.into(), p.energy.into(), p.exists.into(), kind.into()]);
    }
    for (name, s) in ["saddle_jz_plus", "saddle_jz_minus"].iter().zip(&set.saddles) {
        let phi = s.exists.then(|| s.argument.acos());
        art.push(vec![(*name).into(), s.jz.into(), phi.into(), s.energy.into(), s.exists.into(), "saddle".into()]);
    }
    Ok(art)
}

fn phase_diagram(a: &PhaseDiagramArgs) -> Result<Artifact, Failure> {
    let couplings = grid(&a.grid)?;
    let mut columns = vec!["g_ratio", "G_ratio", "frac_below", "frac_above"];
    if a.semiclassical.is_some() {
        columns.extend(["semiclassical_below", "semiclassical_above"]);
    }
    let mut art = Artifact::new("phase-diagram", columns);
    art.meta("n_total", a.n);
    art.meta("G_grid", a.grid.to_string());
    art.meta("margin", margin_name(a.margin));
    art.meta("semiclassical_resolution", a.semiclassical);
    for &g in &a.g {
        let pd = boundary_curves_with(a.n, g, &couplings, rule(a.margin))?;
        let sc = a.semiclassical.map(|res| semiclassical_curves(a.n, g, &couplings, res)).transpose()?;
        art.meta(&format!("onset_below[g={g}]"), pd.lower_onset());
        art.meta(&format!("onset_above[g={g}]"), pd.upper_onset());
        for (i, r) in pd.rows.iter().enumerate() {
            let mut row = vec![g.into(), r.coupling.into(), r.frac_below.into(), r.frac_above.into()];
            if let Some(sc) = &sc {
                row.extend([sc.rows[i].frac_below.into(), sc.rows[i].frac_above.into()]);
            }
            art.push(row);
        }
    }
    Ok(art)
}

fn polariton(a: &PolaritonArgs) -> Result<Artifact, Failure> {
    let mc = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
            MicrocavityParams::from_toml_str(&text, path.parent())?
        }
        None => MicrocavityParams::default(),
    };
    let opts =
        SweepOptions { freeze_kp: a.freeze_kp, search: MagicSearch { k_max: a.k_max, ..MagicSearch::default() } };
    let rows = detuning_sweep(&mc, &grid(&a.grid)?, a.n, opts)?;

    let mut art = Artifact::new(
        "polariton",
        vec!["delta0", "k_p", "delta", "g", "G", "g_ratio", "G_ratio", "supercritical", "gap"],
    );
    art.meta("n_total", a.n);
    art.meta("critical_G_ratio", critical_ratio(a.n));
    art.meta("delta0_grid", a.grid.to_string());
    art.meta("freeze_kp", a.freeze_kp);
    art.meta("k_max", a.k_max);
    art.meta("config", a.config.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "built-in default".into()));
    for (k, v) in [
        ("e_cav0", mc.e_cav0),
        ("e_exc", mc.e_exc),
        ("rabi", mc.rabi),
        ("cavity_curvature", mc.cavity_curvature),
        ("bohr_radius", mc.bohr_radius),
        ("dielectric", mc.dielectric),
        ("area", mc.area),
        ("charge", mc.charge),
        ("V0", mc.v0()),
    ] {
        art.meta(k, v);
    }
    art.meta("dispersion_file", mc.dispersion_file.as_ref().map(|p| p.display().to_string()));
    for r in rows {
        let p = r.params;
        art.push(vec![
            r.delta0.into(),
            r.k_p.into(),
            p.map(|p| p.delta).into(),
            p.map(|p| p.g).into(),
            p.map(|p| p.big_g).into(),
            p.map(|p| p.g_ratio).into(),
            p.map(|p| p.big_g_ratio).into(),
            r.supercritical.into(),
            r.gap.into(),
        ]);
    }
    Ok(art)
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence { .. }
            | Error::InconclusivePeak { .. }
            | Error::NoMagicAngle { .. }
            | Error::DegenerateDetuning
            | Error::IndexOutOfRange { .. } => Failure::Compute(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}
