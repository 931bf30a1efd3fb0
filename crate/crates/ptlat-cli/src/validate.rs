//! `ptlat validate`: report-only inspection of a resolved configuration.
//!
//! Prints one `warning:` line per issue that would make the run vacuous
//! (unprotected disorder geometry), fail (grid too coarse, sites out of
//! range), or behave surprisingly. Always exits 0 — the point is the
//! report, not a gate.

use num_complex::Complex64;

use ptlat::model::DisorderKind;
use ptlat::symmetry::{protection_predicate, DEFAULT_GAP_FLOOR};
use ptlat::{GridSpec, WaveguideArraySpec};

use crate::config::{Experiment, RunConfig};

/// Collects every warning for `cfg`. Pure so tests can assert on it.
pub fn warnings(cfg: &RunConfig) -> Vec<String> {
    let mut out = Vec::new();
    match cfg.experiment {
        Experiment::Bpm => bpm_warnings(cfg, &mut out),
        _ => lattice_warnings(cfg, &mut out),
    }
    out
}

/// Runs the report against stdout.
pub fn report(cfg: &RunConfig) {
    println!("experiment: {}", cfg.experiment);
    let ws = warnings(cfg);
    for w in &ws {
        println!("warning: {w}");
    }
    if ws.is_empty() {
        println!("ok: no warnings");
    } else {
        println!("{} warning(s)", ws.len());
    }
}

/// Why `(n, p, m0)` fails the commensurability rule, spelled out.
fn unprotected_reason(n: usize, p: usize, m0: usize) -> String {
    if !(n + 1).is_multiple_of(p) {
        format!("{} mod {} = {} ≠ 0", n + 1, p, (n + 1) % p)
    } else {
        format!("m0 = {m0} is not a multiple of p = {p}")
    }
}

/// Can a tunneling-disorder realization flip a bond sign (J(1 + λr) < 0)?
/// Uniform draws are bounded by √3, so below 1/√3 flips are impossible;
/// gaussian draws are unbounded, but flips are vanishingly rare below 0.2.
fn sign_flips_possible(cfg: &RunConfig) -> bool {
    if cfg.disorder.kind.to_kind() != DisorderKind::Tunneling {
        return false;
    }
    match cfg.disorder.distribution.to_distribution() {
        ptlat::model::Distribution::Uniform => {
            cfg.disorder.strength * ptlat::ensemble::UNIFORM_HALF_WIDTH >= 1.0
        }
        ptlat::model::Distribution::Gaussian => cfg.disorder.strength >= 0.2,
    }
}

fn lattice_warnings(cfg: &RunConfig, out: &mut Vec<String>) {
    let n = cfg.lattice.n;
    let p = cfg.disorder.period;
    let m0 = cfg.gain.m0;
    let kind = cfg.disorder.kind.to_kind();
    let disordered = cfg.disorder.strength > 0.0;

    // Threshold-style experiments on an unprotected cell: γ_PT collapses.
    let wants_threshold = matches!(
        cfg.experiment,
        Experiment::Threshold | Experiment::Pdf | Experiment::Evolve
    );
    let uses_gain = match cfg.experiment {
        Experiment::Threshold => !cfg.threshold.sweep_m0,
        Experiment::Pdf => true,
        Experiment::Evolve => cfg.gain.gamma > 0.0,
        _ => false,
    };
    if wants_threshold && uses_gain && disordered && !protection_predicate(n, p, m0, kind) {
        out.push(format!(
            "(N = {n}, p = {p}, m0 = {m0}) is unprotected: {}; expect γ_PT = 0 for typical \
             disorder",
            unprotected_reason(n, p, m0)
        ));
    }

    match cfg.experiment {
        Experiment::Asymmetry => {
            for &pp in &cfg.asymmetry.periods {
                if pp > 0 && disordered && !(n + 1).is_multiple_of(pp) {
                    out.push(format!(
                        "period p = {pp} does not divide N + 1 = {}: A(k) has no guaranteed \
                         zeros at multiples of p",
                        n + 1
                    ));
                }
            }
            if disordered && sign_flips_possible(cfg) {
                out.push(format!(
                    "tunneling strength {} with {} draws can flip bond signs in some \
                     realizations, breaking the exact zeros of A(k); uniform draws below \
                     1/√3 ≈ 0.577 keep all bonds positive",
                    cfg.disorder.strength,
                    cfg.disorder.distribution.name(),
                ));
            }
        }
        Experiment::Parity => {
            if disordered && cfg.gain.gamma > 0.0 && !protection_predicate(n, p, m0, kind) {
                out.push(format!(
                    "(N = {n}, p = {p}, m0 = {m0}) is unprotected: {}; [ΠT, H] will not vanish",
                    unprotected_reason(n, p, m0)
                ));
            } else if disordered && !(n + 1).is_multiple_of(p) {
                out.push(format!(
                    "period p = {p} does not divide N + 1 = {}: the antidiagonal of Π loses \
                     its exact ±1 entries",
                    n + 1
                ));
            }
            // The construction itself needs a clean gap; probe the actual
            // realization so the warning matches what the run would see.
            if let (Ok(lat), Ok(d)) = (cfg.lattice_spec(), cfg.disorder_spec()) {
                let base = ptlat::ensemble::sample_base(
                    d.distribution,
                    d.period,
                    d.seed,
                    cfg.parity.index,
                );
                let target = match d.kind {
                    DisorderKind::Tunneling => lat.n - 1,
                    DisorderKind::OnSite => lat.n,
                };
                if let Ok(rz) = ptlat::DisorderRealization::from_base(base, target) {
                    if let Ok(h) = ptlat::model::assemble_hermitian(&lat, &d, &rz) {
                        if let Ok(spec) = ptlat::spectral::eig_hermitian(&h) {
                            let gap = spec.min_gap();
                            if gap < 1e-6 * lat.j {
                                out.push(format!(
                                    "eigenvalue spectrum is nearly degenerate (min gap {gap:.2e}); \
                                     Π construction aborts below a gap of {DEFAULT_GAP_FLOOR:e}"
                                ));
                            }
                        }
                    }
                }
            }
        }
        Experiment::Evolve if cfg.evolution.initial_site > n => {
            out.push(format!(
                "initial site k0 = {} lies outside the {n}-site chain",
                cfg.evolution.initial_site
            ));
        }
        _ => {}
    }

    if m0 > n / 2 && uses_gain {
        out.push(format!(
            "gain site m0 = {m0} exceeds floor(N/2) = {}: the gain member of the pair must \
             sit in the left half",
            n / 2
        ));
    }
}

fn bpm_warnings(cfg: &RunConfig, out: &mut Vec<String>) {
    let b = &cfg.bpm;
    if b.contrast_pattern.is_empty() {
        out.push("contrast pattern is empty".into());
        return;
    }
    let contrast: Vec<Complex64> = (0..b.guides)
        .map(|i| Complex64::new(b.contrast_pattern[i % b.contrast_pattern.len()], 0.0))
        .collect();
    let spec = match WaveguideArraySpec::new(
        b.guides,
        b.width_um,
        b.separation_um,
        b.cladding_index,
        b.wavelength_nm,
        contrast,
    ) {
        Ok(s) => s,
        Err(e) => {
            out.push(format!("waveguide geometry is invalid: {e}"));
            return;
        }
    };
    let grid = GridSpec {
        dx_um: b.dx_um,
        x_extent_um: spec.span_um() + 2.0 * b.x_margin_um,
        dz_um: b.dz_um,
        z_extent_cm: b.z_extent_cm,
        absorber_width_um: b.absorber_width_um,
    };
    if let Err(e) = grid.validate_for(&spec) {
        out.push(format!("grid rejected: {e}"));
    }
    if b.gain_guide > 0 && b.guides > 1 && b.gain_guide == b.guides + 1 - b.gain_guide {
        out.push(format!(
            "gain guide {} is its own mirror: gain and loss would overlap",
            b.gain_guide
        ));
    }
    if b.gamma_cm < 0.0 {
        out.push(format!(
            "negative gain rate {} puts absorption on the nominal gain guide",
            b.gamma_cm
        ));
    }
}

#[cfg(test)]
#[allow(clippy::field_reassign_with_default)]
mod tests {
    use super::*;
    use crate::config::{DistArg, KindArg};

    #[test]
    fn unprotected_pdf_cell_is_flagged_with_the_failing_divisor() {
        let mut cfg = RunConfig::default();
        cfg.experiment = Experiment::Pdf;
        cfg.lattice.n = 17;
        cfg.disorder.period = 5;
        cfg.gain.m0 = 5;
        let ws = warnings(&cfg);
        assert_eq!(ws.len(), 1, "{ws:?}");
        assert!(ws[0].contains("18 mod 5"), "{}", ws[0]);
        assert!(ws[0].contains("γ_PT = 0"), "{}", ws[0]);
    }

    #[test]
    fn onsite_period_two_odd_chain_is_protected() {
        let mut cfg = RunConfig::default();
        cfg.experiment = Experiment::Pdf;
        cfg.lattice.n = 17;
        cfg.disorder.kind = KindArg::Onsite;
        cfg.disorder.period = 2;
        cfg.gain.m0 = 3;
        assert!(warnings(&cfg).is_empty());
    }

    #[test]
    fn protected_cell_produces_no_warning() {
        let mut cfg = RunConfig::default();
        cfg.experiment = Experiment::Pdf;
        cfg.lattice.n = 17;
        cfg.disorder.period = 3;
        cfg.gain.m0 = 3;
        assert!(warnings(&cfg).is_empty());
    }

    #[test]
    fn mismatched_gain_site_is_flagged() {
        let mut cfg = RunConfig::default();
        cfg.experiment = Experiment::Pdf;
        cfg.disorder.period = 3;
        cfg.gain.m0 = 4; // 18 % 3 == 0, but 4 is not a multiple of 3
        let ws = warnings(&cfg);
        assert_eq!(ws.len(), 1, "{ws:?}");
        assert!(ws[0].contains("m0 = 4 is not a multiple of p = 3"), "{}", ws[0]);
    }

    #[test]
    fn coarse_bpm_grid_is_flagged() {
        let mut cfg = RunConfig::default();
        cfg.experiment = Experiment::Bpm;
        cfg.bpm.dx_um = 1.0; // W/20 = 0.5
        let ws = warnings(&cfg);
        assert_eq!(ws.len(), 1, "{ws:?}");
        assert!(ws[0].contains("dx"), "{}", ws[0]);
    }

    #[test]
    fn default_bpm_config_is_clean() {
        let mut cfg = RunConfig::default();
        cfg.experiment = Experiment::Bpm;
        assert!(warnings(&cfg).is_empty());
    }

    #[test]
    fn tunneling_asymmetry_at_full_strength_warns_about_sign_flips() {
        let mut cfg = RunConfig::default();
        cfg.experiment = Experiment::Asymmetry;
        cfg.lattice.n = 23;
        cfg.disorder.strength = 1.0;
        cfg.disorder.distribution = DistArg::Gaussian;
        cfg.asymmetry.periods = vec![8, 3];
        let ws = warnings(&cfg);
        assert!(ws.iter().any(|w| w.contains("flip bond signs")), "{ws:?}");
    }
}
