//! Dispatch of one configured scenario to the matching integrator, followed
//! by the pathwise analysis of every seed.

use chemostat_core::analysis::{
    attractor_bounds, check_envelopes, classify_with_bounds, positivity_diagnostics, BoundsReport,
    DilutionBand, EnvelopeReport, EnvelopeTolerances, PositivityReport, RegimeClassification,
};
use chemostat_core::integrators::{
    integrate_deterministic, integrate_em_ito, integrate_heun_stratonovich, integrate_pathwise,
    DeterministicScheme, Trajectory,
};
use chemostat_core::models::{
    diffusion, drift_diffusion_ito, drift_stratonovich, rhs_deterministic, rhs_random, State3,
};
use chemostat_core::noise::{
    perturbed_dilution, sample_ou_path, sample_wiener_path, NoiseKind, NoisePath,
};
use serde::Serialize;

use crate::config::{ModelKind, ScenarioConfig};
use crate::error::{HarnessError, Result};

/// Everything produced by one seed.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub trajectory: Trajectory<State3>,
    /// Driving path on the noise grid: O-U values or the Wiener path.
    pub noise: Option<NoisePath>,
    /// `D + alpha z` on the noise grid (O-U model only).
    pub dilution: Option<NoisePath>,
    pub envelopes: Option<EnvelopeReport>,
    pub positivity: PositivityReport,
}

/// A seed whose integration stopped early.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedFailure {
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub band: Option<DilutionBand>,
    pub bounds: Option<BoundsReport>,
    pub classification: Option<RegimeClassification>,
    /// Why no bounds are available, if so.
    pub analysis_error: Option<String>,
    /// One entry per configured seed, in configuration order.
    pub runs: Vec<std::result::Result<SeedRun, SeedFailure>>,
}

impl ScenarioResult {
    pub fn completed(&self) -> impl Iterator<Item = &SeedRun> {
        self.runs.iter().filter_map(|r| r.as_ref().ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = &SeedFailure> {
        self.runs.iter().filter_map(|r| r.as_ref().err())
    }
}

/// Band, bounds and verdict for a configuration. Bound failures (e.g. a band
/// reaching below zero) are reported, not raised.
pub struct Analysis {
    pub band: Option<DilutionBand>,
    pub bounds: Option<BoundsReport>,
    pub classification: Option<RegimeClassification>,
    pub error: Option<String>,
}

pub fn analyse(cfg: &ScenarioConfig) -> Analysis {
    let band = match cfg.dilution_band() {
        Ok(b) => b,
        Err(e) => {
            return Analysis {
                band: None,
                bounds: None,
                classification: None,
                error: Some(e.to_string()),
            }
        }
    };
    match attractor_bounds(&cfg.params, &band) {
        Ok(bounds) => Analysis {
            band: Some(band),
            bounds: Some(bounds),
            classification: Some(classify_with_bounds(&cfg.params, &bounds)),
            error: None,
        },
        Err(e) => Analysis {
            band: Some(band),
            bounds: None,
            classification: None,
            error: Some(e.to_string()),
        },
    }
}

/// Integrates and analyses one seed.
pub fn run_seed(cfg: &ScenarioConfig, analysis: &Analysis, seed: u64) -> Result<SeedRun> {
    let p = cfg.params;
    let init = cfg.init;
    let grid = cfg.grid;
    let (trajectory, noise, dilution) = match cfg.model {
        ModelKind::Deterministic => {
            let tr = integrate_deterministic(
                |y: &State3| rhs_deterministic(y, &p),
                init,
                grid,
                DeterministicScheme::Rk4,
            )?;
            let flat = NoisePath::from_values(
                grid,
                vec![p.dilution; grid.len()],
                NoiseKind::OrnsteinUhlenbeck,
                seed,
            )?;
            (tr, None, Some(flat))
        }
        ModelKind::RandomOu => {
            let ou = cfg
                .noise
                .ok_or_else(|| HarnessError::Config("random_ou without noise parameters".into()))?;
            let z = sample_ou_path(ou, seed, cfg.noise_grid()?);
            let tr = integrate_pathwise(|y: &State3, v| rhs_random(y, &p, v), &z, init, grid)?;
            let d = perturbed_dilution(&z, p.dilution, p.alpha)?;
            (tr, Some(z), Some(d))
        }
        ModelKind::StochasticIto => {
            let w = sample_wiener_path(seed, cfg.noise_grid()?);
            let tr = integrate_em_ito(|y: &State3| drift_diffusion_ito(y, &p), &w, init, grid)?;
            (tr, Some(w), None)
        }
        ModelKind::StochasticStratonovich => {
            let w = sample_wiener_path(seed, cfg.noise_grid()?);
            let tr = integrate_heun_stratonovich(
                |y: &State3| drift_stratonovich(y, &p),
                |y: &State3| diffusion(y, &p),
                &w,
                init,
                grid,
            )?;
            (tr, Some(w), None)
        }
    };
    let envelopes = match (&dilution, &analysis.band, &analysis.bounds) {
        (Some(d), Some(band), Some(bounds)) => Some(check_envelopes(
            &trajectory,
            &p,
            bounds,
            band,
            d,
            &EnvelopeTolerances::default(),
        )?),
        _ => None,
    };
    let positivity = positivity_diagnostics(&trajectory, &p);
    Ok(SeedRun {
        seed,
        trajectory,
        noise,
        dilution,
        envelopes,
        positivity,
    })
}

/// Runs every configured seed. A failing seed is recorded and the others
/// still run.
pub fn run_scenario(cfg: &ScenarioConfig) -> ScenarioResult {
    let analysis = analyse(cfg);
    let seeds: &[u64] = if cfg.model == ModelKind::Deterministic {
        &cfg.seeds[..1]
    } else {
        &cfg.seeds
    };
    let runs = seeds
        .iter()
        .map(|&seed| {
            run_seed(cfg, &analysis, seed).map_err(|e| SeedFailure {
                seed,
                message: e.to_string(),
            })
        })
        .collect();
    ScenarioResult {
        band: analysis.band,
        bounds: analysis.bounds,
        classification: analysis.classification,
        analysis_error: analysis.error,
        runs,
    }
}

/// Per-seed digest without the trajectory itself.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedReport {
    pub seed: u64,
    pub terminal: Option<State3>,
    pub failure: Option<String>,
    pub envelopes: Option<EnvelopeReport>,
    pub positivity: Option<PositivityReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub name: Option<String>,
    pub model: ModelKind,
    pub band: Option<DilutionBand>,
    pub bounds: Option<BoundsReport>,
    pub classification: Option<RegimeClassification>,
    pub analysis_error: Option<String>,
    pub seeds: Vec<SeedReport>,
    pub notes: Vec<String>,
}

impl ScenarioResult {
    pub fn report(&self, cfg: &ScenarioConfig) -> ScenarioReport {
        let seeds = self
            .runs
            .iter()
            .map(|r| match r {
                Ok(run) => SeedReport {
                    seed: run.seed,
                    terminal: Some(run.trajectory.terminal()),
                    failure: None,
                    envelopes: run.envelopes,
                    positivity: Some(run.positivity.clone()),
                },
                Err(f) => SeedReport {
                    seed: f.seed,
                    terminal: None,
                    failure: Some(f.message.clone()),
                    envelopes: None,
                    positivity: None,
                },
            })
            .collect();
        ScenarioReport {
            name: cfg.name.clone(),
            model: cfg.model,
            band: self.band,
            bounds: self.bounds,
            classification: self.classification,
            analysis_error: self.analysis_error.clone(),
            seeds,
            notes: cfg.notes.clone(),
        }
    }
}
