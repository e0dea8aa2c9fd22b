use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "threemode", version, about = "Exact and classical analysis of the three-mode boson model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; written atomically. Standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Leave the generation time out of the header.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues with mode populations and MST/RO labels.
    Spectrum(SpectrumArgs),
    /// Adjacent-level spacings, their minima and near-degenerate pairs.
    Spacings(SpacingsArgs),
    /// Ground-state energy, <n0> and linear entropy along a coupling grid.
    GroundSweep(GroundSweepArgs),
    /// Critical points or a level set of the classical energy surface.
    Classical(ClassicalArgs),
    /// Relative-index phase boundaries for one or more g/delta values.
    PhaseDiagram(PhaseDiagramArgs),
    /// G/delta of a microcavity along a detuning sweep.
    Polariton(PolaritonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Total boson number (even).
    #[arg(long = "n")]
    pub n: u32,

    /// g/delta
    #[arg(long = "g", allow_negative_numbers = true)]
    pub g: f64,

    /// |G|/delta
    #[arg(long = "G", allow_negative_numbers = true)]
    pub big_g: f64,

    /// Phase of G in radians; does not change the spectrum.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phase: f64,

    /// Relative deflation tolerance of the eigensolver.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Margin {
    /// Half the unperturbed level spacing at each band edge.
    HalfSpacing,
    /// Labels by the sign of E and E - E_up alone.
    Strict,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    #[arg(long, value_enum, default_value_t = Margin::HalfSpacing)]
    pub margin: Margin,
}

#[derive(Debug, Args)]
pub struct SpacingsArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Degeneracy threshold relative to the spectral width.
    #[arg(long, default_value_t = 1e-8)]
    pub degeneracy_tol: f64,
}

#[derive(Debug, Args)]
pub struct GroundSweepArgs {
    /// Total boson number; ignored when --sizes is given.
    #[arg(long = "n", required_unless_present = "sizes")]
    pub n: Option<u32>,

    /// g/delta, or g'/delta' with --sizes.
    #[arg(long = "g", default_value_t = 0.0, allow_negative_numbers = true)]
    pub g: f64,

    /// Coupling grid `start:stop:count` in G/delta.
    #[arg(long = "G-grid", required_unless_present = "sizes")]
    pub grid: Option<GridSpec>,

    /// Finite-size scaling over these sizes on the --Gp-grid.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<u32>>,

    /// Coupling grid `start:stop:count` in G'/delta' for --sizes.
    #[arg(long = "Gp-grid", requires = "sizes")]
    pub gp_grid: Option<GridSpec>,
}

#[derive(Debug, Args)]
pub struct ClassicalArgs {
    /// g'/delta'
    #[arg(long = "gp", allow_negative_numbers = true)]
    pub gp: f64,

    /// G'/delta'
    #[arg(long = "Gp")]
    pub big_gp: f64,

    /// Trace the level set h = E instead of listing critical points.
    #[arg(long, allow_negative_numbers = true)]
    pub level: Option<f64>,

    /// j_z samples for --level.
    #[arg(long, default_value_t = 400)]
    pub samples: usize,

    /// Quadrature points per axis for the phase-space fractions.
    #[arg(long, default_value_t = 256)]
    pub resolution: usize,
}

#[derive(Debug, Args)]
pub struct PhaseDiagramArgs {
    #[arg(long = "n")]
    pub n: u32,

    /// Comma-separated g/delta values.
    #[arg(long = "g", value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub g: Vec<f64>,

    /// Coupling grid `start:stop:count` in G/delta.
    #[arg(long = "G-grid")]
    pub grid: GridSpec,

    #[arg(long, value_enum, default_value_t = Margin::HalfSpacing)]
    pub margin: Margin,

    /// Add classical area fractions at this quadrature resolution.
    #[arg(long)]
    pub semiclassical: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PolaritonArgs {
    /// TOML microcavity description; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Detuning grid `start:stop:count` in meV.
    #[arg(long = "delta0-grid", default_value = "-10:4:57", allow_hyphen_values = true)]
    pub grid: GridSpec,

    #[arg(long = "n", default_value_t = 10_000)]
    pub n: u32,

    /// Keep the pump wavevector from the configured detuning.
    #[arg(long)]
    pub freeze_kp: bool,

    /// Upper end of the resonance search, 1/um.
    #[arg(long, default_value_t = 10.0)]
    pub k_max: f64,
}

/// `start:stop:count`, both ends included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, count] = parts[..] else {
            return Err(format!("expected start:stop:count, got '{s}'"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}"));
        Ok(GridSpec {
            start: num(start)?,
            stop: num(stop)?,
            count: count.trim().parse().map_err(|e| format!("count '{count}': {e}"))?,
        })
    }
}

impl std::fmt::Display for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec_parses() {
        let g: GridSpec = "0:0.004:81".parse().unwrap();
        assert_eq!(g, GridSpec { start: 0.0, stop: 0.004, count: 81 });
        let g: GridSpec = "-10:4:15".parse().unwrap();
        assert_eq!(g.start, -10.0);
        assert!("0:1".parse::<GridSpec>().is_err());
        assert!("0:1:x".parse::<GridSpec>().is_err());
        assert!("0:1:2:3".parse::<GridSpec>().is_err());
    }

    #[test]
    fn parses_phase_diagram_list() {
        let cli = Cli::try_parse_from([
            "threemode",
            "phase-diagram",
            "--n",
            "500",
            "--g",
            "0.003,0,-0.002,-0.003",
            "--G-grid",
            "0:0.004:81",
        ])
        .unwrap();
        let Command::PhaseDiagram(a) = cli.command else { panic!() };
        assert_eq!(a.g, vec![0.003, 0.0, -0.002, -0.003]);
    }

    #[test]
    fn negative_scalars_accepted() {
        let cli = Cli::try_parse_from(["threemode", "spectrum", "--n", "20", "--g", "-0.003", "--G", "0.01"]).unwrap();
        let Command::Spectrum(a) = cli.command else { panic!() };
        assert_eq!(a.model.g, -0.003);
    }

    #[test]
    fn verify_definition() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
