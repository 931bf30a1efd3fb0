//! Run configuration: figure-anchored defaults, TOML file layering, and
//! semantic validation.
//!
//! Precedence, lowest to highest: built-in defaults, `--preset`, `--config`
//! file, `PTLAT_SEED` / `PTLAT_WORKERS` environment variables, explicit
//! flags. The fully resolved configuration is echoed into every run's
//! manifest and `config.toml`, so any run can be repeated exactly.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use ptlat::model::{DisorderKind, Distribution};
use ptlat::{DisorderSpec, GainLossSpec, LatticeSpec};

use crate::error::{cfg_err, CliError};

/// Which pipeline a run executes; doubles as the output subdirectory name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Threshold,
    PhaseDiagram,
    Pdf,
    Evolve,
    Asymmetry,
    Parity,
    Bpm,
}

impl Experiment {
    pub fn dir_name(self) -> &'static str {
        match self {
            Experiment::Threshold => "threshold",
            Experiment::PhaseDiagram => "phase-diagram",
            Experiment::Pdf => "pdf",
            Experiment::Evolve => "evolve",
            Experiment::Asymmetry => "asymmetry",
            Experiment::Parity => "parity",
            Experiment::Bpm => "bpm",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.dir_name())
    }
}

/// CLI/TOML-facing mirror of [`DisorderKind`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    Tunneling,
    Onsite,
}

impl KindArg {
    pub fn to_kind(self) -> DisorderKind {
        match self {
            KindArg::Tunneling => DisorderKind::Tunneling,
            KindArg::Onsite => DisorderKind::OnSite,
        }
    }
}

/// CLI/TOML-facing mirror of [`Distribution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DistArg {
    Gaussian,
    Uniform,
}

impl DistArg {
    pub fn to_distribution(self) -> Distribution {
        match self {
            DistArg::Gaussian => Distribution::Gaussian,
            DistArg::Uniform => Distribution::Uniform,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DistArg::Gaussian => "gaussian",
            DistArg::Uniform => "uniform",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeConfig {
    /// Number of sites N.
    pub n: usize,
    /// Tunneling energy J; every energy-valued output is reported in units
    /// of J, so 1.0 is the natural choice.
    pub j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisorderConfig {
    pub kind: KindArg,
    /// λ (tunneling) or Δ (on-site), dimensionless.
    pub strength: f64,
    /// Repeat period p of the disorder pattern.
    pub period: usize,
    pub distribution: DistArg,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainConfig {
    /// Gain site m0 (1-based, left half); loss sits at the mirror site.
    pub m0: usize,
    /// Gain/loss rate γ in units of J.
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdConfig {
    /// Compute every gain site 1..=N/2 instead of just `gain.m0`.
    pub sweep_m0: bool,
    /// Upper end of the bisection bracket, units of J.
    pub gamma_max: f64,
    /// Bisection stopping width, units of J.
    pub tol: f64,
    /// Disorder realization index (stream of the seeded generator).
    pub index: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleConfig {
    /// Realization count M.
    pub m: usize,
    /// Histogram bin count over [0, gamma_max].
    pub bins: usize,
    /// Upper end of the per-realization bisection bracket, units of J.
    pub gamma_max: f64,
    /// Per-realization bisection tolerance, units of J.
    pub tol: f64,
    /// Run the same ensemble under both draw distributions and emit the
    /// overlay (plus their Kolmogorov–Smirnov distance).
    pub compare_distributions: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolveConfig {
    /// Final time in units of 1/J (the CSV time column is Jt).
    pub t_max: f64,
    /// Number of uniform time steps (the trace holds steps + 1 frames).
    pub steps: usize,
    /// Initially excited site k0 (1-based).
    pub initial_site: usize,
    /// Disorder realizations averaged (forced to 1 when strength = 0).
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymmetryConfig {
    /// Realizations aggregated per period.
    pub m: usize,
    /// Disorder periods to compare (each gets its own CSV block).
    pub periods: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParityConfig {
    /// Disorder realization index (stream of the seeded generator).
    pub index: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BpmConfig {
    pub guides: usize,
    /// Guide width W (μm).
    pub width_um: f64,
    /// Center-to-center separation d (μm).
    pub separation_um: f64,
    pub cladding_index: f64,
    /// Vacuum wavelength (nm).
    pub wavelength_nm: f64,
    /// Real index contrasts, tiled periodically across the guides.
    pub contrast_pattern: Vec<f64>,
    /// Target amplitude gain rate (cm⁻¹) realized in the gain guide; the
    /// imaginary contrast is calibrated so an isolated guide grows at this
    /// rate. 0 = passive array.
    pub gamma_cm: f64,
    /// Amplifying guide (1-based); its mirror guide absorbs. 0 = passive.
    pub gain_guide: usize,
    /// Guide receiving the Gaussian launch spot (σ = W/2).
    pub launch_guide: usize,
    /// Transverse step (μm); must resolve the guides (dx ≤ W/20).
    pub dx_um: f64,
    /// Longitudinal step (μm).
    pub dz_um: f64,
    /// Propagation length (cm).
    pub z_extent_cm: f64,
    /// Absorbing strip width at each transverse edge (μm).
    pub absorber_width_um: f64,
    /// Clear margin between the outer guides and the absorbers (μm).
    pub x_margin_um: f64,
}

/// Everything a run depends on. Defaults reproduce meaningful panels on
/// their own: the lattice block matches the N = 17 disorder studies, the
/// waveguide block the 8-guide array scenarios.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub output_dir: PathBuf,
    /// Master seed; drives every disorder stream of the run.
    pub seed: u64,
    /// Worker thread count; absent = one per core. Never affects results.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    pub lattice: LatticeConfig,
    pub disorder: DisorderConfig,
    pub gain: GainConfig,
    pub threshold: ThresholdConfig,
    pub ensemble: EnsembleConfig,
    pub evolution: EvolveConfig,
    pub asymmetry: AsymmetryConfig,
    pub parity: ParityConfig,
    pub bpm: BpmConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment: Experiment::PhaseDiagram,
            output_dir: PathBuf::from("runs"),
            seed: 42,
            workers: None,
            lattice: LatticeConfig { n: 17, j: 1.0 },
            disorder: DisorderConfig {
                kind: KindArg::Tunneling,
                strength: 1.0,
                period: 3,
                distribution: DistArg::Gaussian,
            },
            gain: GainConfig { m0: 3, gamma: 0.05 },
            threshold: ThresholdConfig {
                sweep_m0: false,
                gamma_max: 2.0,
                tol: 1e-6,
                index: 0,
            },
            ensemble: EnsembleConfig {
                m: 5000,
                bins: 100,
                gamma_max: 2.0,
                tol: 1e-6,
                compare_distributions: false,
            },
            evolution: EvolveConfig { t_max: 100.0, steps: 500, initial_site: 9, m: 100 },
            asymmetry: AsymmetryConfig { m: 100, periods: vec![3, 8] },
            parity: ParityConfig { index: 0 },
            bpm: BpmConfig {
                guides: 8,
                width_um: 10.0,
                separation_um: 16.9586,
                cladding_index: 1.45,
                wavelength_nm: 633.0,
                contrast_pattern: vec![5.15e-4, 4.85e-4, 5.00e-4],
                gamma_cm: 0.7,
                gain_guide: 1,
                launch_guide: 4,
                dx_um: ptlat::bpm::DEFAULT_DX_UM,
                dz_um: ptlat::bpm::DEFAULT_DZ_UM,
                z_extent_cm: ptlat::bpm::DEFAULT_Z_EXTENT_CM,
                absorber_width_um: ptlat::bpm::DEFAULT_ABSORBER_WIDTH_UM,
                x_margin_um: 200.0,
            },
        }
    }
}

impl RunConfig {
    /// Library spec for the lattice block (validated).
    pub fn lattice_spec(&self) -> Result<LatticeSpec, CliError> {
        LatticeSpec::new(self.lattice.n, self.lattice.j).map_err(cfg_err)
    }

    /// Library spec for the disorder block, seeded with the run seed.
    pub fn disorder_spec(&self) -> Result<DisorderSpec, CliError> {
        DisorderSpec::new(
            self.disorder.kind.to_kind(),
            self.disorder.strength,
            self.disorder.period,
            self.disorder.distribution.to_distribution(),
            self.seed,
        )
        .map_err(cfg_err)
    }

    /// Library spec for the gain block (γ converted from units of J).
    pub fn gain_spec(&self) -> Result<GainLossSpec, CliError> {
        GainLossSpec::new(self.gain.m0, self.gain.gamma * self.lattice.j).map_err(cfg_err)
    }
}

// ---------------------------------------------------------------------------
// Partial configuration: the shape of a TOML config file. Every field is
// optional; present keys override the running configuration. Unknown keys
// are rejected so typos cannot silently fall back to defaults.
// ---------------------------------------------------------------------------

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialRunConfig {
    pub experiment: Option<Experiment>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    #[serde(default)]
    pub lattice: PartialLattice,
    #[serde(default)]
    pub disorder: PartialDisorder,
    #[serde(default)]
    pub gain: PartialGain,
    #[serde(default)]
    pub threshold: PartialThreshold,
    #[serde(default)]
    pub ensemble: PartialEnsemble,
    #[serde(default)]
    pub evolution: PartialEvolve,
    #[serde(default)]
    pub asymmetry: PartialAsymmetry,
    #[serde(default)]
    pub parity: PartialParity,
    #[serde(default)]
    pub bpm: PartialBpm,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialLattice {
    pub n: Option<usize>,
    pub j: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialDisorder {
    pub kind: Option<KindArg>,
    pub strength: Option<f64>,
    pub period: Option<usize>,
    pub distribution: Option<DistArg>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialGain {
    pub m0: Option<usize>,
    pub gamma: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialThreshold {
    pub sweep_m0: Option<bool>,
    pub gamma_max: Option<f64>,
    pub tol: Option<f64>,
    pub index: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialEnsemble {
    pub m: Option<usize>,
    pub bins: Option<usize>,
    pub gamma_max: Option<f64>,
    pub tol: Option<f64>,
    pub compare_distributions: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialEvolve {
    pub t_max: Option<f64>,
    pub steps: Option<usize>,
    pub initial_site: Option<usize>,
    pub m: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialAsymmetry {
    pub m: Option<usize>,
    pub periods: Option<Vec<usize>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialParity {
    pub index: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialBpm {
    pub guides: Option<usize>,
    pub width_um: Option<f64>,
    pub separation_um: Option<f64>,
    pub cladding_index: Option<f64>,
    pub wavelength_nm: Option<f64>,
    pub contrast_pattern: Option<Vec<f64>>,
    pub gamma_cm: Option<f64>,
    pub gain_guide: Option<usize>,
    pub launch_guide: Option<usize>,
    pub dx_um: Option<f64>,
    pub dz_um: Option<f64>,
    pub z_extent_cm: Option<f64>,
    pub absorber_width_um: Option<f64>,
    pub x_margin_um: Option<f64>,
}

macro_rules! set_if_some {
    ($target:expr, $src:expr, $($field:ident),+ $(,)?) => {
        $(if let Some(v) = $src.$field.clone() {
            $target.$field = v;
        })+
    };
}

impl PartialRunConfig {
    /// Overwrites `cfg` with every key present in the file.
    pub fn apply(&self, cfg: &mut RunConfig) {
        set_if_some!(*cfg, self, experiment, output_dir, seed);
        if let Some(w) = self.workers {
            cfg.workers = Some(w);
        }
        set_if_some!(cfg.lattice, self.lattice, n, j);
        set_if_some!(cfg.disorder, self.disorder, kind, strength, period, distribution);
        set_if_some!(cfg.gain, self.gain, m0, gamma);
        set_if_some!(cfg.threshold, self.threshold, sweep_m0, gamma_max, tol, index);
        set_if_some!(cfg.ensemble, self.ensemble, m, bins, gamma_max, tol, compare_distributions);
        set_if_some!(cfg.evolution, self.evolution, t_max, steps, initial_site, m);
        set_if_some!(cfg.asymmetry, self.asymmetry, m, periods);
        set_if_some!(cfg.parity, self.parity, index);
        set_if_some!(
            cfg.bpm,
            self.bpm,
            guides,
            width_um,
            separation_um,
            cladding_index,
            wavelength_nm,
            contrast_pattern,
            gamma_cm,
            gain_guide,
            launch_guide,
            dx_um,
            dz_um,
            z_extent_cm,
            absorber_width_um,
            x_margin_um,
        );
    }
}

/// Parses a TOML config file into its partial form.
pub fn load_partial(path: &Path) -> Result<PartialRunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Semantic checks beyond what individual library constructors see. Runs
/// after all layering so error messages describe the effective values.
pub fn check(cfg: &RunConfig) -> Result<(), CliError> {
    let lat = cfg.lattice_spec()?;
    cfg.disorder_spec()?;
    if cfg.workers == Some(0) {
        return Err(CliError::Config("workers must be >= 1".into()));
    }

    let half = lat.n / 2;
    let gain_site_required = match cfg.experiment {
        Experiment::Threshold => !cfg.threshold.sweep_m0,
        Experiment::Pdf => true,
        Experiment::Evolve | Experiment::Parity => cfg.gain.gamma > 0.0,
        _ => false,
    };
    if gain_site_required {
        cfg.gain_spec()?;
        if cfg.gain.m0 > half {
            return Err(CliError::Config(format!(
                "gain site m0 = {} must satisfy 1 <= m0 <= floor(N/2) = {half}",
                cfg.gain.m0
            )));
        }
    }

    let bracket = |gamma_max: f64, tol: f64| -> Result<(), CliError> {
        if !(gamma_max > 0.0) || !gamma_max.is_finite() {
            return Err(CliError::Config(format!(
                "gamma_max must be a positive number of J, got {gamma_max}"
            )));
        }
        if !(tol > 0.0) || tol >= gamma_max {
            return Err(CliError::Config(format!(
                "tol must satisfy 0 < tol < gamma_max, got tol = {tol}, gamma_max = {gamma_max}"
            )));
        }
        Ok(())
    };

    match cfg.experiment {
        Experiment::Threshold => bracket(cfg.threshold.gamma_max, cfg.threshold.tol)?,
        Experiment::PhaseDiagram => {}
        Experiment::Pdf => {
            bracket(cfg.ensemble.gamma_max, cfg.ensemble.tol)?;
            if cfg.ensemble.m < 4 {
                return Err(CliError::Config(format!(
                    "ensemble needs m >= 4 for moment estimates, got {}",
                    cfg.ensemble.m
                )));
            }
            if cfg.ensemble.bins == 0 {
                return Err(CliError::Config("histogram needs bins >= 1".into()));
            }
        }
        Experiment::Evolve => {
            let ev = &cfg.evolution;
            if ev.initial_site == 0 || ev.initial_site > lat.n {
                return Err(CliError::Config(format!(
                    "initial site k0 = {} outside 1..={}",
                    ev.initial_site, lat.n
                )));
            }
            if ev.steps == 0 || !(ev.t_max > 0.0) || ev.m == 0 {
                return Err(CliError::Config(format!(
                    "evolution needs t_max > 0, steps >= 1, m >= 1; \
                     got t_max = {}, steps = {}, m = {}",
                    ev.t_max, ev.steps, ev.m
                )));
            }
            if cfg.gain.gamma < 0.0 {
                return Err(CliError::Config(format!(
                    "gamma must be >= 0, got {}",
                    cfg.gain.gamma
                )));
            }
        }
        Experiment::Asymmetry => {
            let a = &cfg.asymmetry;
            if a.m == 0 {
                return Err(CliError::Config("asymmetry needs m >= 1 realizations".into()));
            }
            if a.periods.is_empty() || a.periods.contains(&0) {
                return Err(CliError::Config(
                    "asymmetry needs a non-empty list of periods >= 1".into(),
                ));
            }
        }
        Experiment::Parity => {}
        Experiment::Bpm => {
            let b = &cfg.bpm;
            if b.guides == 0 {
                return Err(CliError::Config("waveguide array needs at least one guide".into()));
            }
            if b.contrast_pattern.is_empty()
                || b.contrast_pattern.iter().any(|&c| !(c > 0.0) || !c.is_finite())
            {
                return Err(CliError::Config(
                    "contrast pattern needs at least one positive, finite entry".into(),
                ));
            }
            if b.launch_guide == 0 || b.launch_guide > b.guides {
                return Err(CliError::Config(format!(
                    "launch guide {} outside 1..={}",
                    b.launch_guide, b.guides
                )));
            }
            if b.gain_guide > b.guides {
                return Err(CliError::Config(format!(
                    "gain guide {} outside 0..={} (0 = passive)",
                    b.gain_guide, b.guides
                )));
            }
            if !b.gamma_cm.is_finite() {
                return Err(CliError::Config(format!(
                    "gamma_cm must be finite, got {}",
                    b.gamma_cm
                )));
            }
        }
    }
    Ok(())
}
