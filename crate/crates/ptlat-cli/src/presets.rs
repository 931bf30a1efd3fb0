//! Bundled example configurations ("presets"), one per headline result.
//!
//! Each preset is a complete [`RunConfig`] plus notes recording every choice
//! the target panel leaves open (seeds, realization counts scaled for
//! desktop runtimes, pinned strengths). The notes are echoed into the run's
//! manifest so the provenance of those choices travels with the data.

// Presets tweak a handful of deeply nested fields; sequential assignment
// keeps each pinned value on its own line instead of nesting struct-update
// syntax three levels deep.
#![allow(clippy::field_reassign_with_default)]

use crate::config::{DistArg, Experiment, KindArg, RunConfig};
use crate::error::CliError;

#[derive(Debug)]
pub struct Preset {
    pub name: &'static str,
    pub about: &'static str,
    pub config: RunConfig,
    pub notes: Vec<String>,
}

pub const NAMES: [&str; 11] = [
    "fig1e", "fig1f", "fig2e", "fig2f", "fig3a", "fig3b", "fig3cde", "fig4a", "fig4b", "fig4c",
    "fig4d",
];

/// Returns the preset, or a config error naming the valid choices.
pub fn lookup(name: &str) -> Result<Preset, CliError> {
    let preset = match name {
        "fig1e" => fig1(KindArg::Tunneling),
        "fig1f" => fig1(KindArg::Onsite),
        "fig2e" => fig2(KindArg::Tunneling),
        "fig2f" => fig2(KindArg::Onsite),
        "fig3a" => fig3_pdf(KindArg::Onsite),
        "fig3b" => fig3_pdf(KindArg::Tunneling),
        "fig3cde" => fig3_evolve(),
        "fig4a" => fig4("fig4a", 0.7, 1, "broken (gain guide lases)"),
        "fig4b" => fig4("fig4b", 0.7, 2, "broken (gain guide lases)"),
        "fig4c" => fig4("fig4c", 0.7, 3, "symmetric (bounded oscillation)"),
        "fig4d" => fig4("fig4d", 1.4, 3, "broken (threshold exceeded)"),
        _ => {
            return Err(CliError::Config(format!(
                "unknown preset '{name}'; available: {}",
                NAMES.join(", ")
            )))
        }
    };
    Ok(preset)
}

pub fn all() -> Vec<Preset> {
    NAMES.iter().map(|n| lookup(n).expect("static preset table")).collect()
}

fn fig1(kind: KindArg) -> Preset {
    let mut config = RunConfig::default();
    config.experiment = Experiment::PhaseDiagram;
    config.lattice.n = 17;
    config.disorder.kind = kind;
    config.disorder.strength = 1.0;
    config.disorder.distribution = DistArg::Gaussian;
    let (name, about, label) = match kind {
        KindArg::Tunneling => (
            "fig1e",
            "threshold map over gain site and period, tunneling disorder (N = 17, lambda = 1)",
            "lambda",
        ),
        KindArg::Onsite => (
            "fig1f",
            "threshold map over gain site and period, on-site disorder (N = 17, Delta = 1)",
            "Delta",
        ),
    };
    Preset {
        name,
        about,
        config,
        notes: vec![
            format!(
                "gamma_PT/J on the (m0, p) grid at unit disorder strength {label} = 1; \
                 finite cells appear only where p divides both N + 1 and m0"
            ),
            "single gaussian realization per period column; seed 42 (the support of the \
             finite cells, not their exact heights, is the reproducible feature)"
                .into(),
        ],
    }
}

fn fig2(kind: KindArg) -> Preset {
    let mut config = RunConfig::default();
    config.experiment = Experiment::Asymmetry;
    config.lattice.n = 23;
    config.disorder.kind = kind;
    config.asymmetry.m = 100;
    config.asymmetry.periods = vec![8, 3];
    let (name, about) = match kind {
        KindArg::Tunneling => {
            config.disorder.strength = 0.5;
            config.disorder.distribution = DistArg::Uniform;
            ("fig2e", "eigenbasis asymmetry A(k) under tunneling disorder (N = 23, p = 8 and 3)")
        }
        KindArg::Onsite => {
            config.disorder.strength = 1.0;
            config.disorder.distribution = DistArg::Gaussian;
            ("fig2f", "eigenbasis asymmetry A(k) under on-site disorder (N = 23, p = 8 and 3)")
        }
    };
    let mut notes = vec![
        "A(k) vanishes exactly at sites k = 0 mod p for all 100 realizations; the CSV \
         records min/mean/max over realizations per site"
            .into(),
    ];
    if kind == KindArg::Tunneling {
        notes.push(
            "strength pinned to 0.5 with uniform (bounded) draws so every realization keeps \
             all bonds positive; at nominal strength 1 a fraction of realizations flips a \
             bond sign and loses the exact zeros"
                .into(),
        );
    } else {
        notes.push(
            "on-site disorder cannot flip bond signs, so full strength Delta = 1 with \
             gaussian draws retains the exact zeros"
                .into(),
        );
    }
    Preset { name, about, config, notes }
}

fn fig3_pdf(kind: KindArg) -> Preset {
    let mut config = RunConfig::default();
    config.experiment = Experiment::Pdf;
    config.lattice.n = 17;
    config.disorder.kind = kind;
    config.disorder.period = 3;
    config.gain.m0 = 3;
    config.ensemble.m = 5000;
    config.ensemble.compare_distributions = true;
    let (name, about) = match kind {
        KindArg::Tunneling => {
            config.disorder.strength = 0.75;
            (
                "fig3b",
                "threshold PDF under tunneling disorder, gaussian vs uniform draws \
                 (N = 17, p = 3)",
            )
        }
        KindArg::Onsite => {
            config.disorder.strength = 1.0;
            (
                "fig3a",
                "threshold PDF under on-site disorder, gaussian vs uniform draws \
                 (N = 17, p = 3)",
            )
        }
    };
    let mut notes = vec![
        "realization count reduced to 5000 per distribution for desktop runtimes; the \
         histogram shape is already stable at this size"
            .into(),
    ];
    match kind {
        KindArg::Onsite => notes.push(
            "strength pinned to Delta = 1.0, where the insensitivity to the draw \
             distribution is cleanest: the two histograms collapse (KS distance a few \
             percent); rerun with --strength to overlay other values"
                .into(),
        ),
        KindArg::Tunneling => notes.push(
            "strength pinned to lambda = 0.75, where the memory of the draw distribution \
             is starkest despite matched first moments (KS distance above 0.1); rerun \
             with --strength to overlay other values"
                .into(),
        ),
    }
    Preset { name, about, config, notes }
}

fn fig3_evolve() -> Preset {
    let mut config = RunConfig::default();
    config.experiment = Experiment::Evolve;
    config.lattice.n = 39;
    config.disorder.kind = KindArg::Onsite;
    config.disorder.strength = 1.0;
    config.disorder.period = 10;
    config.disorder.distribution = DistArg::Gaussian;
    config.gain.m0 = 10;
    config.gain.gamma = 0.05;
    config.evolution.t_max = 100.0;
    config.evolution.steps = 500;
    config.evolution.initial_site = 20;
    config.evolution.m = 500;
    Preset {
        name: "fig3cde",
        about: "disorder-averaged wave-packet intensity with a weak amplifier at site 10 \
                (N = 39, p = 10)",
        config,
        notes: vec![
            "CSV holds both the passive baseline (gamma block 0) and the driven run \
             (gamma block 0.05) for direct comparison"
                .into(),
            "satellite peaks form at the period multiples k = 10, 20, 30; the amplifier \
             at k = 10 raises its satellite without destabilizing the dynamics"
                .into(),
            "realization count reduced to 500 for desktop runtimes".into(),
        ],
    }
}

fn fig4(name: &'static str, gamma_cm: f64, gain_guide: usize, expected: &str) -> Preset {
    let mut config = RunConfig::default();
    config.experiment = Experiment::Bpm;
    config.bpm.gamma_cm = gamma_cm;
    config.bpm.gain_guide = gain_guide;
    let about = match name {
        "fig4a" => "8-guide array, gain 0.7 1/cm on guide 1 (edge pair): symmetry broken",
        "fig4b" => "8-guide array, gain 0.7 1/cm on guide 2 (unprotected pair): symmetry broken",
        "fig4c" => "8-guide array, gain 0.7 1/cm on guide 3 (protected pair): symmetric",
        _ => "8-guide array, gain 1.4 1/cm on guide 3: threshold exceeded, symmetry broken",
    };
    Preset {
        name,
        about,
        config,
        notes: vec![
            format!("expected classification: {expected}"),
            "contrast pattern (5.15, 4.85, 5.00)e-4 tiles across 8 guides; launch spot on \
             guide 4; imaginary contrast calibrated so an isolated guide grows at the \
             target rate"
                .into(),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::check;

    #[test]
    fn every_preset_passes_semantic_checks() {
        for p in all() {
            check(&p.config).unwrap_or_else(|e| panic!("preset {}: {e}", p.name));
            assert!(!p.notes.is_empty(), "preset {} has no notes", p.name);
        }
    }

    #[test]
    fn lookup_rejects_unknown_names() {
        let err = lookup("fig9z").unwrap_err();
        assert!(err.to_string().contains("fig1e"));
    }

    #[test]
    fn scenario_presets_differ_only_in_gain_placement() {
        let a = lookup("fig4a").unwrap().config;
        let c = lookup("fig4c").unwrap().config;
        assert_eq!(a.bpm.gamma_cm, c.bpm.gamma_cm);
        assert_ne!(a.bpm.gain_guide, c.bpm.gain_guide);
        let d = lookup("fig4d").unwrap().config;
        assert_eq!(d.bpm.gain_guide, c.bpm.gain_guide);
        assert!(d.bpm.gamma_cm > c.bpm.gamma_cm);
    }
}
