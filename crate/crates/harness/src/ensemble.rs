//! Monte-Carlo ensembles over seeds split from one master seed.

use chemostat_core::analysis::{BoundsReport, DilutionBand, RegimeClassification};
use chemostat_core::integrators::StateVector;
use chemostat_core::models::State3;
use chemostat_core::split_seed;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ModelKind, ScenarioConfig};
use crate::error::{HarnessError, Result};
use crate::scenario::{analyse, run_seed};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TerminalEntry {
    pub index: u64,
    pub seed: u64,
    pub terminal: Option<State3>,
    pub failure: Option<String>,
}

/// Pointwise statistics over completed trajectories, one entry per grid time.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct SeriesStats {
    pub t: Vec<f64>,
    pub mean: Vec<[f64; 3]>,
    pub min: Vec<[f64; 3]>,
    pub max: Vec<[f64; 3]>,
}

/// Fractions over band-certified runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct EnvelopeRates {
    pub evaluated: usize,
    pub band_certified: usize,
    pub p_bound: f64,
    pub xi_envelopes: f64,
    pub xi_tail: f64,
    pub z_tail: f64,
    /// Fraction whose floors settle before the end; `None` when the floors
    /// do not apply (non-positive `x_tilde`).
    pub floors: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub name: Option<String>,
    pub model: ModelKind,
    pub master_seed: u64,
    pub n: usize,
    pub completed: usize,
    pub failed: usize,
    pub band: Option<DilutionBand>,
    pub bounds: Option<BoundsReport>,
    pub classification: Option<RegimeClassification>,
    pub terminal: Vec<TerminalEntry>,
    pub series: SeriesStats,
    pub envelope_rates: Option<EnvelopeRates>,
    /// `band_certified / evaluated`
    pub band_certification_rate: Option<f64>,
    /// Completed runs whose nutrient went negative at some time.
    pub negative_nutrient_runs: usize,
    pub min_s: Option<f64>,
}

struct Digest {
    states: Option<Vec<State3>>,
    entry: TerminalEntry,
    envelopes: Option<chemostat_core::analysis::EnvelopeReport>,
    negative: bool,
    min_s: f64,
}

/// Seed of ensemble member `index`.
pub fn member_seed(master: u64, index: u64) -> u64 {
    split_seed(master, index)
}

/// Runs `n` members in parallel. Members are aggregated in index order, so
/// the summary does not depend on scheduling.
pub fn run_ensemble(cfg: &ScenarioConfig, n: usize, master_seed: u64) -> Result<EnsembleSummary> {
    if n == 0 {
        return Err(HarnessError::Config(
            "ensemble size must be at least 1".into(),
        ));
    }
    let analysis = analyse(cfg);
    let digests: Vec<Digest> = (0..n as u64)
        .into_par_iter()
        .map(|index| {
            let seed = member_seed(master_seed, index);
            match run_seed(cfg, &analysis, seed) {
                Ok(run) => Digest {
                    entry: TerminalEntry {
                        index,
                        seed,
                        terminal: Some(run.trajectory.terminal()),
                        failure: None,
                    },
                    envelopes: run.envelopes,
                    negative: !run.positivity.clean(),
                    min_s: run.positivity.min_s,
                    states: Some(run.trajectory.states().to_vec()),
                },
                Err(e) => Digest {
                    entry: TerminalEntry {
                        index,
                        seed,
                        terminal: None,
                        failure: Some(e.to_string()),
                    },
                    envelopes: None,
                    negative: false,
                    min_s: f64::INFINITY,
                    states: None,
                },
            }
        })
        .collect();

    let completed: Vec<&Vec<State3>> = digests.iter().filter_map(|d| d.states.as_ref()).collect();
    let series = if completed.is_empty() {
        SeriesStats::default()
    } else {
        let len = cfg.grid.len();
        let count = completed.len() as f64;
        let mut mean = vec![[0.0; 3]; len];
        let mut min = vec![[f64::INFINITY; 3]; len];
        let mut max = vec![[f64::NEG_INFINITY; 3]; len];
        for states in &completed {
            for (k, st) in states.iter().enumerate() {
                for (i, v) in st.components().into_iter().enumerate() {
                    mean[k][i] += v;
                    min[k][i] = min[k][i].min(v);
                    max[k][i] = max[k][i].max(v);
                }
            }
        }
        for m in &mut mean {
            m.iter_mut().for_each(|v| *v /= count);
        }
        SeriesStats {
            t: cfg.grid.times().collect(),
            mean,
            min,
            max,
        }
    };

    let reports: Vec<_> = digests.iter().filter_map(|d| d.envelopes).collect();
    let envelope_rates = (!reports.is_empty()).then(|| {
        let certified: Vec<_> = reports.iter().filter(|r| r.band_certified).collect();
        let frac = |f: &dyn Fn(&&chemostat_core::analysis::EnvelopeReport) -> bool| {
            if certified.is_empty() {
                f64::NAN
            } else {
                certified.iter().filter(|r| f(r)).count() as f64 / certified.len() as f64
            }
        };
        let floors_apply = certified.first().is_some_and(|r| r.floors_applicable);
        EnvelopeRates {
            evaluated: reports.len(),
            band_certified: certified.len(),
            p_bound: frac(&|r| r.p_bound_ok),
            xi_envelopes: frac(&|r| r.xi_envelopes_ok),
            xi_tail: frac(&|r| r.xi_tail_ok),
            z_tail: frac(&|r| r.z_tail_ok),
            floors: floors_apply.then(|| frac(&|r| r.floors_ok_after.is_some())),
        }
    });

    let min_s = digests
        .iter()
        .filter(|d| d.states.is_some())
        .map(|d| d.min_s)
        .fold(None, |acc: Option<f64>, v| {
            Some(acc.map_or(v, |a| a.min(v)))
        });

    Ok(EnsembleSummary {
        name: cfg.name.clone(),
        model: cfg.model,
        master_seed,
        n,
        completed: completed.len(),
        failed: n - completed.len(),
        band: analysis.band,
        bounds: analysis.bounds,
        classification: analysis.classification,
        band_certification_rate: envelope_rates
            .map(|r| r.band_certified as f64 / r.evaluated as f64),
        envelope_rates,
        negative_nutrient_runs: digests.iter().filter(|d| d.negative).count(),
        min_s,
        terminal: digests.into_iter().map(|d| d.entry).collect(),
        series,
    })
}
