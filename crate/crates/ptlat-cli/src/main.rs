//! `ptlat` — reproducible experiments on tight-binding lattices with
//! balanced gain and loss, and on their waveguide-array realizations.
//!
//! Every run resolves a full configuration (defaults → preset → config file
//! → environment → flags), executes one experiment, and leaves a
//! self-describing run directory: CSV data, the resolved `config.toml`, and
//! a `manifest.json` with artifact hashes. Exit codes: 0 success, 2 bad
//! configuration, 3 failure during computation or output.

// Validation guards are written as `!(x > 0.0)` rather than `x <= 0.0` so
// that NaN fails them too; the negated form is the whole point.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod experiments;
mod manifest;
mod presets;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{DistArg, Experiment, KindArg, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "ptlat",
    version,
    about = "Gain/loss lattice simulations: breaking thresholds, disorder ensembles, \
             wave-packet dynamics, and waveguide-array beam propagation",
    after_help = "Environment: PTLAT_SEED overrides the configured seed, PTLAT_WORKERS \
                  the worker count; explicit flags override both. Results never depend \
                  on the worker count."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Locate the symmetry-breaking threshold gamma_PT of one lattice
    Threshold(ThresholdArgs),
    /// Map gamma_PT over every (gain site, disorder period) cell
    PhaseDiagram(PhaseDiagramArgs),
    /// Histogram gamma_PT over a disorder ensemble
    Pdf(PdfArgs),
    /// Evolve a single-site excitation into a disorder-averaged intensity map
    Evolve(EvolveArgs),
    /// Aggregate the site-resolved eigenbasis asymmetry A(k) over realizations
    Asymmetry(AsymmetryArgs),
    /// Build the generalized reflection operator of one disorder realization
    Parity(ParityArgs),
    /// Propagate a beam through the configured waveguide array
    Bpm(BpmArgs),
    /// Check a configuration and report warnings without running anything
    Validate(ValidateArgs),
    /// Run a bundled example configuration (`preset --list` shows them)
    Preset(PresetArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML config file; explicit flags override file keys
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Start from a bundled example configuration (see `ptlat preset --list`)
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Root directory for run outputs
    #[arg(long, value_name = "DIR")]
    output_dir: Option<PathBuf>,
    /// Master seed for every disorder stream of the run
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: one per core)
    #[arg(long)]
    workers: Option<usize>,
}

impl CommonArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(dir) = &self.output_dir {
            cfg.output_dir = dir.clone();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(workers) = self.workers {
            cfg.workers = Some(workers);
        }
    }
}

#[derive(Args)]
struct PhysicsArgs {
    /// Lattice sites N
    #[arg(long)]
    n: Option<usize>,
    /// Tunneling energy J (the unit of every reported energy)
    #[arg(long)]
    j: Option<f64>,
    /// Disorder kind
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    /// Disorder strength (lambda for tunneling, Delta for on-site)
    #[arg(long)]
    strength: Option<f64>,
    /// Disorder period p
    #[arg(long = "p", value_name = "PERIOD")]
    period: Option<usize>,
    /// Draw distribution (zero mean, unit variance either way)
    #[arg(long, value_enum)]
    dist: Option<DistArg>,
    /// Gain site m0 (1-based, left half; loss mirrors it)
    #[arg(long)]
    m0: Option<usize>,
    /// Gain/loss rate gamma in units of J
    #[arg(long)]
    gamma: Option<f64>,
}

impl PhysicsArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(n) = self.n {
            cfg.lattice.n = n;
        }
        if let Some(j) = self.j {
            cfg.lattice.j = j;
        }
        if let Some(kind) = self.kind {
            cfg.disorder.kind = kind;
        }
        if let Some(s) = self.strength {
            cfg.disorder.strength = s;
        }
        if let Some(p) = self.period {
            cfg.disorder.period = p;
        }
        if let Some(d) = self.dist {
            cfg.disorder.distribution = d;
        }
        if let Some(m0) = self.m0 {
            cfg.gain.m0 = m0;
        }
        if let Some(g) = self.gamma {
            cfg.gain.gamma = g;
        }
    }
}

#[derive(Args)]
struct ThresholdArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    physics: PhysicsArgs,
    /// Sweep every gain site 1..=N/2 instead of just --m0
    #[arg(long)]
    sweep_m0: bool,
    /// Upper end of the bisection bracket (units of J)
    #[arg(long)]
    gamma_max: Option<f64>,
    /// Bisection stopping width (units of J)
    #[arg(long)]
    tol: Option<f64>,
    /// Disorder realization index (stream number)
    #[arg(long)]
    index: Option<u64>,
}

impl ThresholdArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        self.physics.apply(cfg);
        if self.sweep_m0 {
            cfg.threshold.sweep_m0 = true;
        }
        if let Some(g) = self.gamma_max {
            cfg.threshold.gamma_max = g;
        }
        if let Some(t) = self.tol {
            cfg.threshold.tol = t;
        }
        if let Some(i) = self.index {
            cfg.threshold.index = i;
        }
    }
}

#[derive(Args)]
struct PhaseDiagramArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    physics: PhysicsArgs,
}

#[derive(Args)]
struct PdfArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    physics: PhysicsArgs,
    /// Disorder realizations M
    #[arg(long)]
    m: Option<usize>,
    /// Histogram bins over [0, gamma-max]
    #[arg(long)]
    bins: Option<usize>,
    /// Upper end of the per-realization bracket (units of J)
    #[arg(long)]
    gamma_max: Option<f64>,
    /// Per-realization bisection tolerance (units of J)
    #[arg(long)]
    tol: Option<f64>,
    /// Overlay gaussian and uniform draws and report their KS distance
    #[arg(long)]
    compare_distributions: bool,
}

impl PdfArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        self.physics.apply(cfg);
        if let Some(m) = self.m {
            cfg.ensemble.m = m;
        }
        if let Some(b) = self.bins {
            cfg.ensemble.bins = b;
        }
        if let Some(g) = self.gamma_max {
            cfg.ensemble.gamma_max = g;
        }
        if let Some(t) = self.tol {
            cfg.ensemble.tol = t;
        }
        if self.compare_distributions {
            cfg.ensemble.compare_distributions = true;
        }
    }
}

#[derive(Args)]
struct EvolveArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    physics: PhysicsArgs,
    /// Final time in units of 1/J (the CSV time column is Jt)
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of uniform time steps
    #[arg(long)]
    steps: Option<usize>,
    /// Initially excited site k0 (1-based)
    #[arg(long = "k0", value_name = "SITE")]
    initial_site: Option<usize>,
    /// Disorder realizations averaged
    #[arg(long)]
    m: Option<usize>,
}

impl EvolveArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        self.physics.apply(cfg);
        if let Some(t) = self.t_max {
            cfg.evolution.t_max = t;
        }
        if let Some(s) = self.steps {
            cfg.evolution.steps = s;
        }
        if let Some(k) = self.initial_site {
            cfg.evolution.initial_site = k;
        }
        if let Some(m) = self.m {
            cfg.evolution.m = m;
        }
    }
}

#[derive(Args)]
struct AsymmetryArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    physics: PhysicsArgs,
    /// Disorder realizations per period
    #[arg(long)]
    m: Option<usize>,
    /// Comma-separated disorder periods to compare
    #[arg(long, value_delimiter = ',', value_name = "P1,P2,...")]
    periods: Option<Vec<usize>>,
}

impl AsymmetryArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        self.physics.apply(cfg);
        if let Some(m) = self.m {
            cfg.asymmetry.m = m;
        }
        if let Some(ps) = &self.periods {
            cfg.asymmetry.periods = ps.clone();
        }
    }
}

#[derive(Args)]
struct ParityArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    physics: PhysicsArgs,
    /// Disorder realization index (stream number)
    #[arg(long)]
    index: Option<u64>,
}

impl ParityArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        self.physics.apply(cfg);
        if let Some(i) = self.index {
            cfg.parity.index = i;
        }
    }
}

#[derive(Args)]
struct BpmArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of waveguides
    #[arg(long)]
    guides: Option<usize>,
    /// Guide width W (micrometers)
    #[arg(long)]
    width_um: Option<f64>,
    /// Center-to-center separation d (micrometers)
    #[arg(long)]
    separation_um: Option<f64>,
    /// Cladding refractive index
    #[arg(long = "n0", value_name = "INDEX")]
    cladding_index: Option<f64>,
    /// Vacuum wavelength (nanometers)
    #[arg(long)]
    wavelength_nm: Option<f64>,
    /// Comma-separated real index contrasts, tiled across the guides
    #[arg(long = "contrast", value_delimiter = ',', value_name = "C1,C2,...")]
    contrast_pattern: Option<Vec<f64>>,
    /// Amplitude gain rate realized in the gain guide (1/cm); 0 = passive
    #[arg(long)]
    gamma_cm: Option<f64>,
    /// Amplifying guide (1-based; its mirror absorbs); 0 = passive
    #[arg(long)]
    gain_guide: Option<usize>,
    /// Guide receiving the Gaussian launch spot
    #[arg(long)]
    launch_guide: Option<usize>,
    /// Transverse step (micrometers)
    #[arg(long)]
    dx_um: Option<f64>,
    /// Longitudinal step (micrometers)
    #[arg(long)]
    dz_um: Option<f64>,
    /// Propagation length (centimeters)
    #[arg(long)]
    z_extent_cm: Option<f64>,
    /// Absorbing strip width at each transverse edge (micrometers)
    #[arg(long)]
    absorber_width_um: Option<f64>,
    /// Margin between the outer guides and the absorbers (micrometers)
    #[arg(long)]
    x_margin_um: Option<f64>,
}

impl BpmArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let b = &mut cfg.bpm;
        if let Some(v) = self.guides {
            b.guides = v;
        }
        if let Some(v) = self.width_um {
            b.width_um = v;
        }
        if let Some(v) = self.separation_um {
            b.separation_um = v;
        }
        if let Some(v) = self.cladding_index {
            b.cladding_index = v;
        }
        if let Some(v) = self.wavelength_nm {
            b.wavelength_nm = v;
        }
        if let Some(v) = &self.contrast_pattern {
            b.contrast_pattern = v.clone();
        }
        if let Some(v) = self.gamma_cm {
            b.gamma_cm = v;
        }
        if let Some(v) = self.gain_guide {
            b.gain_guide = v;
        }
        if let Some(v) = self.launch_guide {
            b.launch_guide = v;
        }
        if let Some(v) = self.dx_um {
            b.dx_um = v;
        }
        if let Some(v) = self.dz_um {
            b.dz_um = v;
        }
        if let Some(v) = self.z_extent_cm {
            b.z_extent_cm = v;
        }
        if let Some(v) = self.absorber_width_um {
            b.absorber_width_um = v;
        }
        if let Some(v) = self.x_margin_um {
            b.x_margin_um = v;
        }
    }
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    physics: PhysicsArgs,
    /// Which experiment's requirements to check
    #[arg(long, value_enum)]
    experiment: Option<Experiment>,
}

#[derive(Args)]
struct PresetArgs {
    /// Preset name (omit together with --list)
    name: Option<String>,
    /// List the available presets and exit
    #[arg(long)]
    list: bool,
    #[command(flatten)]
    common: CommonArgs,
}

fn main() -> ExitCode {
    // Library warnings (e.g. "ensemble cell is unprotected") go to stderr.
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Threshold(a) => run_experiment(Experiment::Threshold, &a.common, |c| a.apply(c)),
        Command::PhaseDiagram(a) => {
            run_experiment(Experiment::PhaseDiagram, &a.common, |c| a.physics.apply(c))
        }
        Command::Pdf(a) => run_experiment(Experiment::Pdf, &a.common, |c| a.apply(c)),
        Command::Evolve(a) => run_experiment(Experiment::Evolve, &a.common, |c| a.apply(c)),
        Command::Asymmetry(a) => run_experiment(Experiment::Asymmetry, &a.common, |c| a.apply(c)),
        Command::Parity(a) => run_experiment(Experiment::Parity, &a.common, |c| a.apply(c)),
        Command::Bpm(a) => run_experiment(Experiment::Bpm, &a.common, |c| a.apply(c)),
        Command::Validate(a) => run_validate(&a),
        Command::Preset(a) => run_preset(&a),
    }
}

/// Layers one experiment's configuration and executes it.
fn run_experiment(
    experiment: Experiment,
    common: &CommonArgs,
    apply_flags: impl FnOnce(&mut RunConfig),
) -> Result<(), CliError> {
    let (mut cfg, notes) = resolve(experiment, common)?;
    apply_flags(&mut cfg);
    config::check(&cfg)?;
    init_workers(&cfg)?;
    experiments::run(&cfg, &notes)
}

/// Defaults → preset → config file → environment; flags come afterwards.
fn resolve(
    experiment: Experiment,
    common: &CommonArgs,
) -> Result<(RunConfig, Vec<String>), CliError> {
    let mut cfg = RunConfig { experiment, ..RunConfig::default() };
    let mut notes = Vec::new();
    if let Some(name) = &common.preset {
        let p = presets::lookup(name)?;
        if p.config.experiment != experiment {
            return Err(CliError::Config(format!(
                "preset '{name}' configures the {} experiment, not {experiment}",
                p.config.experiment
            )));
        }
        cfg = p.config;
        notes = p.notes;
        notes.insert(0, format!("preset {name}: {}", p.about));
    }
    if let Some(path) = &common.config {
        config::load_partial(path)?.apply(&mut cfg);
        // The subcommand, not the file, picks the pipeline.
        cfg.experiment = experiment;
    }
    apply_env(&mut cfg)?;
    common.apply(&mut cfg);
    Ok((cfg, notes))
}

fn apply_env(cfg: &mut RunConfig) -> Result<(), CliError> {
    if let Ok(v) = std::env::var("PTLAT_SEED") {
        cfg.seed = v.parse().map_err(|_| {
            CliError::Config(format!("PTLAT_SEED must be an unsigned integer, got '{v}'"))
        })?;
    }
    if let Ok(v) = std::env::var("PTLAT_WORKERS") {
        let w = v.parse().map_err(|_| {
            CliError::Config(format!("PTLAT_WORKERS must be a positive integer, got '{v}'"))
        })?;
        cfg.workers = Some(w);
    }
    Ok(())
}

fn init_workers(cfg: &RunConfig) -> Result<(), CliError> {
    if let Some(w) = cfg.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("worker pool: {e}")))?;
    }
    Ok(())
}

fn run_validate(a: &ValidateArgs) -> Result<(), CliError> {
    let mut cfg = RunConfig::default();
    if let Some(name) = &a.common.preset {
        let p = presets::lookup(name)?;
        cfg = p.config;
    }
    if let Some(path) = &a.common.config {
        config::load_partial(path)?.apply(&mut cfg);
    }
    apply_env(&mut cfg)?;
    a.common.apply(&mut cfg);
    a.physics.apply(&mut cfg);
    if let Some(exp) = a.experiment {
        cfg.experiment = exp;
    }
    // Report-only: semantic rejects become part of the report, not an error.
    match config::check(&cfg) {
        Err(e) => {
            println!("experiment: {}", cfg.experiment);
            println!("warning: configuration invalid: {e}");
            println!("1 warning(s)");
        }
        Ok(()) => validate::report(&cfg),
    }
    Ok(())
}

fn run_preset(a: &PresetArgs) -> Result<(), CliError> {
    if a.list {
        for p in presets::all() {
            println!("{:<8} {}", p.name, p.about);
        }
        return Ok(());
    }
    let name = a
        .name
        .as_deref()
        .ok_or_else(|| CliError::Config("pass a preset name, or --list to see them".into()))?;
    if a.common.preset.is_some() {
        return Err(CliError::Config(
            "pass the preset name as the positional argument, not via --preset".into(),
        ));
    }
    let p = presets::lookup(name)?;
    let mut cfg = p.config;
    let experiment = cfg.experiment;
    let mut notes = p.notes;
    notes.insert(0, format!("preset {name}: {}", p.about));
    if let Some(path) = &a.common.config {
        config::load_partial(path)?.apply(&mut cfg);
        cfg.experiment = experiment;
    }
    apply_env(&mut cfg)?;
    a.common.apply(&mut cfg);
    config::check(&cfg)?;
    init_workers(&cfg)?;
    experiments::run(&cfg, &notes)
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        super::Cli::command().debug_assert();
    }
}
