//! Split-step beam propagation for waveguide arrays with complex index
//! contrast.
//!
//! The continuum analog of the gain/loss lattice: `N` slab waveguides of
//! width `W` and center spacing `d` embedded in a cladding of index `n0`.
//! The envelope obeys the paraxial equation
//!
//! ```text
//! i ∂_z ψ = −(1/(2 k0 n0)) ∂²_x ψ − (k0 Δn(x)/n0) ψ
//! ```
//!
//! with `k0 = 2π/λ` the vacuum wavenumber and `Δn(x)` the (complex) index
//! contrast: its real part guides, a negative imaginary part amplifies.
//! Propagation uses symmetric operator splitting — half potential step,
//! full kinetic step in Fourier space, half potential step — with raised-
//! cosine absorbing strips at the grid edges so radiated light leaves
//! instead of wrapping around.
//!
//! Internal units are micrometers throughout; `z` positions in public
//! outputs are reported in centimeters and gain rates γ in cm⁻¹. The
//! γ ↔ Im(Δn) mapping is defined operationally by [`calibrate_gain`]: the
//! imaginary contrast is tuned until an isolated guide's fundamental mode
//! grows as `exp(γ·z)`.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::dynamics::Phase;
use crate::error::{PtError, Result};

/// Default transverse step (μm): 40 samples across a 10 μm guide.
pub const DEFAULT_DX_UM: f64 = 0.25;
/// Default longitudinal step (μm).
pub const DEFAULT_DZ_UM: f64 = 10.0;
/// Default propagation length (cm).
pub const DEFAULT_Z_EXTENT_CM: f64 = 15.0;
/// Default absorbing-strip width per side (μm).
pub const DEFAULT_ABSORBER_WIDTH_UM: f64 = 100.0;
/// Default transverse margin beyond the array, per side, absorber included
/// (μm).
pub const DEFAULT_X_MARGIN_UM: f64 = 200.0;
/// Peak absorption rate of the boundary strips (1/μm).
pub const ABSORBER_SIGMA_MAX: f64 = 0.05;
/// Maximum number of full-intensity frames kept in an [`IntensityMap`]
/// (per-guide powers are always recorded at every step).
pub const FRAME_BUDGET: usize = 240;

/// Geometry and material of a slab-waveguide array.
#[derive(Debug, Clone)]
pub struct WaveguideArraySpec {
    pub n_guides: usize,
    /// Guide width W (μm).
    pub width_um: f64,
    /// Center-to-center separation d (μm).
    pub separation_um: f64,
    /// Cladding refractive index.
    pub n0: f64,
    /// Vacuum wavelength (nm).
    pub vacuum_wavelength_nm: f64,
    /// Per-guide complex index contrast: Re > 0 guides, Im < 0 amplifies.
    pub contrast: Vec<Complex64>,
}

impl WaveguideArraySpec {
    pub fn new(
        n_guides: usize,
        width_um: f64,
        separation_um: f64,
        n0: f64,
        vacuum_wavelength_nm: f64,
        contrast: Vec<Complex64>,
    ) -> Result<Self> {
        if n_guides == 0 {
            return Err(PtError::InvalidSpec("array needs at least one guide".into()));
        }
        if !(width_um > 0.0) || !(n0 > 0.0) || !(vacuum_wavelength_nm > 0.0) {
            return Err(PtError::InvalidSpec(
                "guide width, cladding index, and wavelength must be positive".into(),
            ));
        }
        if n_guides > 1 && separation_um < width_um {
            return Err(PtError::InvalidSpec(format!(
                "guides overlap: separation {separation_um} μm < width {width_um} μm"
            )));
        }
        if contrast.len() != n_guides {
            return Err(PtError::DimensionMismatch(format!(
                "{} contrast values for {} guides",
                contrast.len(),
                n_guides
            )));
        }
        for (i, c) in contrast.iter().enumerate() {
            if !(c.re > 0.0) || c.im.abs() >= c.re {
                return Err(PtError::InvalidSpec(format!(
                    "guide {}: contrast must satisfy Re > 0 and |Im| ≪ Re, got {c}",
                    i + 1
                )));
            }
        }
        Ok(Self { n_guides, width_um, separation_um, n0, vacuum_wavelength_nm, contrast })
    }

    /// Vacuum wavenumber k0 = 2π/λ (rad/μm).
    pub fn k0_per_um(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.vacuum_wavelength_nm * 1e-3)
    }

    /// Guide centers (μm), array centered at x = 0, guide 1 leftmost.
    pub fn centers(&self) -> Vec<f64> {
        let offset = (self.n_guides as f64 - 1.0) / 2.0;
        (0..self.n_guides).map(|i| (i as f64 - offset) * self.separation_um).collect()
    }

    /// Outer-edge-to-outer-edge width of the array (μm).
    pub fn span_um(&self) -> f64 {
        (self.n_guides as f64 - 1.0) * self.separation_um + self.width_um
    }

    /// Mean real contrast — the index step of the "average" guide, used for
    /// isolated-guide calibration runs.
    pub fn mean_re_contrast(&self) -> f64 {
        self.contrast.iter().map(|c| c.re).sum::<f64>() / self.n_guides as f64
    }

    /// The guide carrying gain (most negative Im contrast), 1-based; `None`
    /// when no guide amplifies.
    pub fn gain_guide(&self) -> Option<usize> {
        let (mut best, mut best_im) = (None, 0.0f64);
        for (i, c) in self.contrast.iter().enumerate() {
            if c.im < best_im {
                best_im = c.im;
                best = Some(i + 1);
            }
        }
        best
    }

    /// A single isolated guide with this array's geometry and mean contrast.
    fn isolated_guide(&self, contrast: Complex64) -> Result<WaveguideArraySpec> {
        WaveguideArraySpec::new(
            1,
            self.width_um,
            self.separation_um,
            self.n0,
            self.vacuum_wavelength_nm,
            vec![contrast],
        )
    }
}

/// Discretization of the propagation window.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub dx_um: f64,
    pub x_extent_um: f64,
    pub dz_um: f64,
    pub z_extent_cm: f64,
    pub absorber_width_um: f64,
}

impl GridSpec {
    /// Defaults sized for `spec`: dx = 0.25 μm, dz = 10 μm, 15 cm of
    /// propagation, 200 μm transverse margin per side with a 100 μm absorber.
    pub fn for_array(spec: &WaveguideArraySpec) -> Self {
        Self {
            dx_um: DEFAULT_DX_UM,
            x_extent_um: spec.span_um() + 2.0 * DEFAULT_X_MARGIN_UM,
            dz_um: DEFAULT_DZ_UM,
            z_extent_cm: DEFAULT_Z_EXTENT_CM,
            absorber_width_um: DEFAULT_ABSORBER_WIDTH_UM,
        }
    }

    /// Rejects grids too coarse or too narrow for the array: the contract is
    /// dx ≤ W/20 and the array must clear both absorbing strips.
    pub fn validate_for(&self, spec: &WaveguideArraySpec) -> Result<()> {
        if !(self.dx_um > 0.0) || !(self.dz_um > 0.0) || !(self.z_extent_cm > 0.0) {
            return Err(PtError::InvalidSpec("grid steps and extents must be positive".into()));
        }
        if self.absorber_width_um < 0.0 {
            return Err(PtError::InvalidSpec("absorber width must be non-negative".into()));
        }
        if self.dx_um > spec.width_um / 20.0 {
            return Err(PtError::InvalidSpec(format!(
                "dx = {} μm too coarse for W = {} μm (need dx ≤ W/20)",
                self.dx_um, spec.width_um
            )));
        }
        if self.x_extent_um < spec.span_um() + 2.0 * self.absorber_width_um {
            return Err(PtError::InvalidSpec(format!(
                "x extent {} μm cannot hold array span {} μm plus absorbers",
                self.x_extent_um,
                spec.span_um()
            )));
        }
        Ok(())
    }
}

/// The realized transverse grid: `n` points centered on x = 0. `n` is
/// rounded up to the next 5-smooth integer so the FFT stays on fast sizes.
#[derive(Debug, Clone)]
struct XGrid {
    n: usize,
    dx: f64,
}

impl XGrid {
    fn from_grid(grid: &GridSpec) -> Self {
        let raw = (grid.x_extent_um / grid.dx_um).ceil() as usize;
        Self { n: next_smooth(raw.max(16)), dx: grid.dx_um }
    }

    fn x(&self, i: usize) -> f64 {
        (i as f64 - (self.n as f64 - 1.0) / 2.0) * self.dx
    }

    fn axis(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    fn half_width(&self) -> f64 {
        (self.n as f64 - 1.0) / 2.0 * self.dx
    }

    /// FFT wavenumber of bin i (rad/μm), standard wrap-around ordering.
    fn k(&self, i: usize) -> f64 {
        let f = if i <= self.n / 2 { i as f64 } else { i as f64 - self.n as f64 };
        2.0 * std::f64::consts::PI * f / (self.n as f64 * self.dx)
    }
}

/// Smallest integer ≥ `n` whose prime factors are all in {2, 3, 5}.
fn next_smooth(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2usize, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// The transverse axis (μm) the solver will use for `grid` — needed to
/// interpret profiles and intensity maps, since the point count is rounded
/// to an FFT-friendly size.
pub fn x_axis(grid: &GridSpec) -> Vec<f64> {
    XGrid::from_grid(grid).axis()
}

/// A transverse field snapshot.
#[derive(Debug, Clone)]
pub struct FieldFrame {
    pub psi: Vec<Complex64>,
    pub z_cm: f64,
}

impl FieldFrame {
    /// L2 norm on the grid: √(Σ|ψ|² dx).
    pub fn norm(&self, dx_um: f64) -> f64 {
        (self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx_um).sqrt()
    }
}

/// Piecewise-constant index contrast on the solver grid: `contrast[j]`
/// inside guide j, zero in the cladding.
pub fn build_index_profile(
    spec: &WaveguideArraySpec,
    grid: &GridSpec,
) -> Result<Vec<Complex64>> {
    grid.validate_for(spec)?;
    let xg = XGrid::from_grid(grid);
    let centers = spec.centers();
    let outer = centers[spec.n_guides - 1] + spec.width_um / 2.0;
    if outer > xg.half_width() - grid.absorber_width_um {
        return Err(PtError::InvalidSpec(
            "array overlaps the absorbing boundary; widen x_extent".into(),
        ));
    }
    let mut profile = vec![Complex64::new(0.0, 0.0); xg.n];
    for (j, &c) in centers.iter().enumerate() {
        for (i, slot) in profile.iter_mut().enumerate() {
            if (xg.x(i) - c).abs() <= spec.width_um / 2.0 {
                *slot = spec.contrast[j];
            }
        }
    }
    Ok(profile)
}

/// Normalized Gaussian launch field of width σ = W/2 centered on
/// `center_guide` (1-based).
pub fn gaussian_initial_state(
    spec: &WaveguideArraySpec,
    grid: &GridSpec,
    center_guide: usize,
) -> Result<FieldFrame> {
    grid.validate_for(spec)?;
    if center_guide == 0 || center_guide > spec.n_guides {
        return Err(PtError::InvalidSpec(format!(
            "launch guide {center_guide} outside 1..={}",
            spec.n_guides
        )));
    }
    let xg = XGrid::from_grid(grid);
    let c = spec.centers()[center_guide - 1];
    let sigma = spec.width_um / 2.0;
    let mut psi: Vec<Complex64> = (0..xg.n)
        .map(|i| {
            let u = (xg.x(i) - c) / sigma;
            Complex64::new((-0.5 * u * u).exp(), 0.0)
        })
        .collect();
    let norm = (psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * xg.dx).sqrt();
    for z in &mut psi {
        *z /= norm;
    }
    Ok(FieldFrame { psi, z_cm: 0.0 })
}

/// One split-step integrator instance: precomputed phase factors bound to a
/// profile and grid.
struct Stepper {
    xg: XGrid,
    /// exp(+i U(x) dz/2) with U = (k0/n0)·Δn — complex when Δn is.
    half_potential: Vec<Complex64>,
    /// exp(−i k² dz/(2 k0 n0)) in FFT ordering.
    kinetic: Vec<Complex64>,
    /// Raised-cosine edge absorption, applied once per full step.
    absorber: Vec<f64>,
    fft_fwd: std::sync::Arc<dyn rustfft::Fft<f64>>,
    fft_inv: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl Stepper {
    fn new(spec: &WaveguideArraySpec, grid: &GridSpec, profile: &[Complex64]) -> Self {
        let xg = XGrid::from_grid(grid);
        let k0 = spec.k0_per_um();
        let dz = grid.dz_um;
        let half_potential: Vec<Complex64> = profile
            .iter()
            .map(|&dn| (Complex64::i() * (k0 / spec.n0) * dn * (dz / 2.0)).exp())
            .collect();
        let kinetic: Vec<Complex64> = (0..xg.n)
            .map(|i| {
                let k = xg.k(i);
                (-Complex64::i() * k * k * dz / (2.0 * k0 * spec.n0)).exp()
            })
            .collect();
        let edge = xg.half_width();
        let inner = edge - grid.absorber_width_um;
        let absorber: Vec<f64> = (0..xg.n)
            .map(|i| {
                let depth = xg.x(i).abs() - inner;
                if depth <= 0.0 || grid.absorber_width_um == 0.0 {
                    1.0
                } else {
                    let u = (depth / grid.absorber_width_um).min(1.0);
                    let sigma = ABSORBER_SIGMA_MAX
                        * (0.5 - 0.5 * (std::f64::consts::PI * u).cos());
                    (-sigma * dz).exp()
                }
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft_fwd = planner.plan_fft_forward(xg.n);
        let fft_inv = planner.plan_fft_inverse(xg.n);
        Self { xg, half_potential, kinetic, absorber, fft_fwd, fft_inv }
    }

    /// Advances ψ by one dz: half potential, kinetic, half potential,
    /// absorber.
    fn step(&self, psi: &mut [Complex64]) {
        let n = self.xg.n as f64;
        for (z, &p) in psi.iter_mut().zip(&self.half_potential) {
            *z *= p;
        }
        self.fft_fwd.process(psi);
        for (z, &k) in psi.iter_mut().zip(&self.kinetic) {
            *z *= k;
        }
        self.fft_inv.process(psi);
        for ((z, &p), &a) in psi.iter_mut().zip(&self.half_potential).zip(&self.absorber) {
            *z = *z / n * p * a;
        }
    }
}

/// Site-resolved output of a propagation run.
#[derive(Debug, Clone)]
pub struct IntensityMap {
    /// Transverse axis (μm).
    pub x_um: Vec<f64>,
    /// z positions (cm) of the stored intensity frames (strided; at most
    /// [`FRAME_BUDGET`] plus endpoints).
    pub frame_z_cm: Vec<f64>,
    /// `|ψ(x, z)|²` per stored frame: row = frame, column = x index.
    pub intensity: Array2<f64>,
    /// z positions (cm) of the per-guide power records (every step).
    pub power_z_cm: Vec<f64>,
    /// Integrated power over each guide's core, per z record.
    pub guide_power: Array2<f64>,
    /// Σ over guides of `guide_power`, per z record.
    pub total_power: Vec<f64>,
    /// Gain guide of the run (1-based), if any guide amplifies.
    pub gain_guide: Option<usize>,
}

impl IntensityMap {
    pub fn n_guides(&self) -> usize {
        self.guide_power.ncols()
    }

    /// Mean power of each guide over the trailing quarter of z.
    pub fn final_quarter_guide_average(&self) -> Vec<f64> {
        let n = self.power_z_cm.len();
        let lo = n - (n / 4).max(1);
        (0..self.n_guides())
            .map(|g| self.guide_power.column(g).iter().skip(lo).sum::<f64>() / (n - lo) as f64)
            .collect()
    }
}

/// Integrates the paraxial equation from `frame` over the full z extent.
/// Per-guide powers are recorded at every step; full frames are strided to
/// at most [`FRAME_BUDGET`]. Aborts with diagnostics if the field stops
/// being finite (instability or overflow).
pub fn propagate(
    frame: &FieldFrame,
    spec: &WaveguideArraySpec,
    grid: &GridSpec,
) -> Result<IntensityMap> {
    let profile = build_index_profile(spec, grid)?;
    let stepper = Stepper::new(spec, grid, &profile);
    let xg = &stepper.xg;
    if frame.psi.len() != xg.n {
        return Err(PtError::DimensionMismatch(format!(
            "field has {} samples, grid has {}",
            frame.psi.len(),
            xg.n
        )));
    }
    let steps = ((grid.z_extent_cm * 1e4) / grid.dz_um).round() as usize;
    if steps == 0 {
        return Err(PtError::InvalidSpec("z extent shorter than one step".into()));
    }
    let stride = (steps / FRAME_BUDGET).max(1);

    // per-guide integration windows (grid indices inside each core)
    let centers = spec.centers();
    let windows: Vec<Vec<usize>> = centers
        .iter()
        .map(|&c| {
            (0..xg.n).filter(|&i| (xg.x(i) - c).abs() <= spec.width_um / 2.0).collect()
        })
        .collect();

    let mut psi = frame.psi.clone();
    let mut frames: Vec<Vec<f64>> = Vec::new();
    let mut frame_z = Vec::new();
    let mut power_z = Vec::with_capacity(steps + 1);
    let mut powers: Vec<f64> = Vec::with_capacity((steps + 1) * spec.n_guides);

    for s in 0..=steps {
        let z_cm = frame.z_cm + (s as f64 * grid.dz_um) * 1e-4;
        let mut total = 0.0;
        for w in &windows {
            let p: f64 = w.iter().map(|&i| psi[i].norm_sqr()).sum::<f64>() * xg.dx;
            powers.push(p);
            total += p;
        }
        if !total.is_finite() {
            return Err(PtError::Numerical(format!(
                "field became non-finite at z = {z_cm:.3} cm (step {s}); reduce dz or check \
                 the gain configuration"
            )));
        }
        power_z.push(z_cm);
        if s % stride == 0 || s == steps {
            frames.push(psi.iter().map(|z| z.norm_sqr()).collect());
            frame_z.push(z_cm);
        }
        if s < steps {
            stepper.step(&mut psi);
        }
    }

    let n_frames = frames.len();
    let mut intensity = Array2::<f64>::zeros((n_frames, xg.n));
    for (r, f) in frames.into_iter().enumerate() {
        for (i, v) in f.into_iter().enumerate() {
            intensity[[r, i]] = v;
        }
    }
    let guide_power =
        Array2::from_shape_vec((steps + 1, spec.n_guides), powers).expect("row-major powers");
    let total_power: Vec<f64> = (0..=steps).map(|r| guide_power.row(r).sum()).collect();
    Ok(IntensityMap {
        x_um: xg.axis(),
        frame_z_cm: frame_z,
        intensity,
        power_z_cm: power_z,
        guide_power,
        total_power,
        gain_guide: spec.gain_guide(),
    })
}

/// Internal step (μm) for imaginary-distance mode relaxation. Deliberately
/// decoupled from the propagation grid's dz: the relaxed mode's deviation
/// from the true bound mode is O(step²), and a fine fixed step keeps launch
/// transients far below the invariants the mode is used to test.
const RELAX_STEP_UM: f64 = 1.0;

/// Relaxes toward the lowest bound mode of `profile_re` by imaginary-
/// distance propagation: diffusion plus potential amplification filters out
/// everything but the fundamental mode. Returns the normalized mode and its
/// propagation-constant offset β (rad/μm relative to the cladding).
fn relax_fundamental(
    spec: &WaveguideArraySpec,
    grid: &GridSpec,
    profile_re: &[f64],
) -> Result<(FieldFrame, f64)> {
    let xg = XGrid::from_grid(grid);
    let k0 = spec.k0_per_um();
    let dz = RELAX_STEP_UM;
    let gain: Vec<f64> =
        profile_re.iter().map(|&dn| ((k0 / spec.n0) * dn * (dz / 2.0)).exp()).collect();
    let kinetic: Vec<f64> = (0..xg.n)
        .map(|i| {
            let k = xg.k(i);
            (-k * k * dz / (2.0 * k0 * spec.n0)).exp()
        })
        .collect();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(xg.n);
    let inv = planner.plan_fft_inverse(xg.n);

    // seed: wide Gaussian over the profile's support
    let support: Vec<f64> = (0..xg.n)
        .filter(|&i| profile_re[i] > 0.0)
        .map(|i| xg.x(i))
        .collect();
    if support.is_empty() {
        return Err(PtError::InvalidSpec("profile has no guiding region".into()));
    }
    let c = support.iter().sum::<f64>() / support.len() as f64;
    let w = (support[support.len() - 1] - support[0]).max(spec.width_um);
    let mut psi: Vec<Complex64> = (0..xg.n)
        .map(|i| {
            let u = (xg.x(i) - c) / w;
            Complex64::new((-0.5 * u * u).exp(), 0.0)
        })
        .collect();

    // Convergence on block-averaged β: per-iteration deltas sit at the
    // floating-point noise floor of the norm computation, and for
    // multi-guide profiles the nearest bound contaminant separates slowly
    // (supermode splittings are ~1e-4 of the confinement scale), so a
    // single-step criterion either never fires or fires while the mode is
    // still dirty. Comparing means over 500-iteration blocks integrates the
    // contamination signal and averages the noise away; the tolerance keeps
    // residual bound contamination below ~1e-4 in amplitude.
    const BLOCK: usize = 500;
    const MAX_ITERS: usize = 300_000;
    let nf = xg.n as f64;
    let mut block_sum = 0.0;
    let mut mean_prev = f64::NAN;
    for iter in 1..=MAX_ITERS {
        for (z, &g) in psi.iter_mut().zip(&gain) {
            *z *= g;
        }
        fwd.process(&mut psi);
        for (z, &k) in psi.iter_mut().zip(&kinetic) {
            *z *= k;
        }
        inv.process(&mut psi);
        for (z, &g) in psi.iter_mut().zip(&gain) {
            *z = *z / nf * g;
        }
        let norm = (psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * xg.dx).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(PtError::Numerical("mode relaxation diverged".into()));
        }
        for z in &mut psi {
            *z /= norm;
        }
        block_sum += norm.ln() / dz;
        if iter % BLOCK == 0 {
            let mean = block_sum / BLOCK as f64;
            block_sum = 0.0;
            if (mean - mean_prev).abs() <= 1e-13 * (1.0 + mean.abs()) {
                return Ok((FieldFrame { psi, z_cm: 0.0 }, mean));
            }
            mean_prev = mean;
        }
    }
    Err(PtError::Numerical(format!(
        "mode relaxation did not converge in {MAX_ITERS} iterations"
    )))
}

/// Fundamental mode of guide `guide` (1-based) *in isolation*, computed on
/// the array's grid so it can be launched directly into a multi-guide run.
pub fn fundamental_mode(
    spec: &WaveguideArraySpec,
    grid: &GridSpec,
    guide: usize,
) -> Result<(FieldFrame, f64)> {
    grid.validate_for(spec)?;
    if guide == 0 || guide > spec.n_guides {
        return Err(PtError::InvalidSpec(format!(
            "guide {guide} outside 1..={}",
            spec.n_guides
        )));
    }
    let xg = XGrid::from_grid(grid);
    let c = spec.centers()[guide - 1];
    let re = spec.contrast[guide - 1].re;
    let profile: Vec<f64> = (0..xg.n)
        .map(|i| if (xg.x(i) - c).abs() <= spec.width_um / 2.0 { re } else { 0.0 })
        .collect();
    relax_fundamental(spec, grid, &profile)
}

/// Fundamental supermode of the whole (real part of the) array profile.
pub fn array_fundamental_mode(
    spec: &WaveguideArraySpec,
    grid: &GridSpec,
) -> Result<(FieldFrame, f64)> {
    let profile: Vec<f64> =
        build_index_profile(spec, grid)?.iter().map(|c| c.re).collect();
    relax_fundamental(spec, grid, &profile)
}

/// Least-squares slope of ln‖ψ‖ vs z (per μm) from a norm series sampled
/// every `dz_um`.
fn growth_rate_per_um(norms: &[f64], dz_um: f64) -> f64 {
    let n = norms.len();
    let ts: Vec<f64> = (0..n).map(|i| i as f64 * dz_um).collect();
    let ys: Vec<f64> = norms.iter().map(|&v| v.ln()).collect();
    let tb = ts.iter().sum::<f64>() / n as f64;
    let yb = ys.iter().sum::<f64>() / n as f64;
    let num: f64 = ts.iter().zip(&ys).map(|(t, y)| (t - tb) * (y - yb)).sum();
    let den: f64 = ts.iter().map(|t| (t - tb) * (t - tb)).sum();
    num / den
}

/// Measured L2 growth rate (cm⁻¹) of launch state `mode` in an isolated
/// guide with imaginary contrast `im`.
fn isolated_growth_cm(
    spec: &WaveguideArraySpec,
    grid: &GridSpec,
    mode: &FieldFrame,
    re_contrast: f64,
    im: f64,
) -> Result<f64> {
    let single = spec.isolated_guide(Complex64::new(re_contrast, im))?;
    let profile = build_index_profile(&single, grid)?;
    let stepper = Stepper::new(&single, grid, &profile);
    let steps = ((grid.z_extent_cm * 1e4) / grid.dz_um).round() as usize;
    let mut psi = mode.psi.clone();
    let mut norms = Vec::with_capacity(steps + 1);
    for s in 0..=steps {
        let norm = (psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.dx_um).sqrt();
        if !norm.is_finite() {
            return Err(PtError::Numerical(format!(
                "calibration run diverged at step {s}"
            )));
        }
        norms.push(norm);
        if s < steps {
            stepper.step(&mut psi);
        }
    }
    Ok(growth_rate_per_um(&norms, grid.dz_um) * 1e4)
}

/// Finds the imaginary contrast realizing gain rate `gamma_cm` (cm⁻¹, in
/// L2 norm) in an isolated guide of this array's geometry and mean real
/// contrast. Positive γ means gain and maps to a *negative* Im(Δn). The fit
/// runs over 5 cm; the secant iteration stops once the measured rate matches
/// γ to 0.1% (well inside the 1% contract).
pub fn calibrate_gain(gamma_cm: f64, spec: &WaveguideArraySpec) -> Result<f64> {
    if gamma_cm == 0.0 {
        return Ok(0.0);
    }
    let re = spec.mean_re_contrast();
    let single = spec.isolated_guide(Complex64::new(re, 0.0))?;
    let mut grid = GridSpec::for_array(&single);
    grid.z_extent_cm = 5.0;
    let (mode, _beta) = fundamental_mode(&single, &grid, 1)?;
    // first-order confined-mode estimate: |Im Δn| ≈ γ n0 / k0
    let im0 = -gamma_cm * 1e-4 * spec.n0 / spec.k0_per_um();
    let mut im_a = im0;
    let mut g_a = isolated_growth_cm(spec, &grid, &mode, re, im_a)?;
    if (g_a - gamma_cm).abs() <= 1e-3 * gamma_cm.abs() {
        return Ok(im_a);
    }
    let mut im_b = im0 * gamma_cm / g_a; // proportional correction
    for _ in 0..12 {
        let g_b = isolated_growth_cm(spec, &grid, &mode, re, im_b)?;
        if (g_b - gamma_cm).abs() <= 1e-3 * gamma_cm.abs() {
            return Ok(im_b);
        }
        let denom = g_b - g_a;
        if denom == 0.0 {
            break;
        }
        let im_next = im_b - (g_b - gamma_cm) * (im_b - im_a) / denom;
        im_a = im_b;
        g_a = g_b;
        im_b = im_next;
    }
    Err(PtError::Numerical(format!(
        "gain calibration did not reach {gamma_cm} cm⁻¹ within 0.1%"
    )))
}

/// Nearest-neighbor coupling constant J (cm⁻¹) of two identical guides at
/// this array's spacing: the fundamental mode of guide 1 transfers fully to
/// guide 2 after the coupling length z_c, and J = π/(2 z_c).
pub fn two_guide_coupling(spec: &WaveguideArraySpec) -> Result<f64> {
    two_guide_coupling_at(spec, DEFAULT_DZ_UM)
}

fn two_guide_coupling_at(spec: &WaveguideArraySpec, dz_um: f64) -> Result<f64> {
    let re = Complex64::new(spec.mean_re_contrast(), 0.0);
    let pair = WaveguideArraySpec::new(
        2,
        spec.width_um,
        spec.separation_um,
        spec.n0,
        spec.vacuum_wavelength_nm,
        vec![re, re],
    )?;
    let mut grid = GridSpec::for_array(&pair);
    grid.dz_um = dz_um;
    grid.z_extent_cm = 20.0;
    let (mode, _beta) = fundamental_mode(&pair, &grid, 1)?;
    let profile = build_index_profile(&pair, &grid)?;
    let stepper = Stepper::new(&pair, &grid, &profile);
    let xg = XGrid::from_grid(&grid);
    let centers = pair.centers();
    let window: Vec<usize> = (0..xg.n)
        .filter(|&i| (xg.x(i) - centers[0]).abs() <= pair.width_um / 2.0)
        .collect();
    let steps = ((grid.z_extent_cm * 1e4) / grid.dz_um).round() as usize;
    let mut psi = mode.psi;
    let mut p1 = Vec::with_capacity(steps + 1);
    for s in 0..=steps {
        let p: f64 = window.iter().map(|&i| psi[i].norm_sqr()).sum::<f64>() * xg.dx;
        if !p.is_finite() {
            return Err(PtError::Numerical("coupling run diverged".into()));
        }
        p1.push(p);
        // stop early once the first transfer minimum is clearly behind us
        if s > 20 {
            let imin = argmin(&p1);
            if imin + 200 < p1.len() && p1[imin] < 0.5 * p1[0] {
                break;
            }
        }
        if s < steps {
            stepper.step(&mut psi);
        }
    }
    let imin = argmin(&p1);
    if imin == 0 || imin + 1 >= p1.len() || p1[imin] > 0.5 * p1[0] {
        return Err(PtError::Numerical(
            "no power-transfer minimum found within 20 cm; guides too far apart".into(),
        ));
    }
    let z_c_cm = (imin as f64 * grid.dz_um) * 1e-4;
    Ok(std::f64::consts::PI / (2.0 * z_c_cm))
}

fn argmin(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in xs.iter().enumerate() {
        if v < xs[best] {
            best = i;
        }
    }
    best
}

/// Classifies a propagation run: Broken iff the final total power exceeds
/// ten times the launch power **and** the gain guide holds the largest
/// average per-guide power over the final quarter of z.
pub fn classify_phase_bpm(map: &IntensityMap) -> Phase {
    let gain = match map.gain_guide {
        Some(g) => g,
        None => return Phase::Symmetric,
    };
    let launch = map.total_power[0];
    let last = map.total_power[map.total_power.len() - 1];
    if !(launch > 0.0) || last <= 10.0 * launch {
        return Phase::Symmetric;
    }
    let avg = map.final_quarter_guide_average();
    let dominant = avg
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i + 1)
        .expect("non-empty guide set");
    if dominant == gain {
        Phase::Broken
    } else {
        Phase::Symmetric
    }
}
