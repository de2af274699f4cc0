//! Side-by-side runs of the four model variants on one seed.

use std::io::Write;
use std::path::Path;

use chemostat_core::integrators::{
    integrate_deterministic, integrate_em_ito, integrate_heun_stratonovich, integrate_pathwise,
    DeterministicScheme,
};
use chemostat_core::models::{
    diffusion, drift_diffusion_ito, drift_stratonovich, rhs_deterministic, rhs_random,
    ChemostatParams, State3,
};
use chemostat_core::noise::{sample_ou_path, sample_wiener_path, OUParams};
use serde::Serialize;

use crate::config::{ModelKind, ScenarioConfig};
use crate::error::{HarnessError, Result};
use crate::export::fmt17;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonColumn {
    pub label: String,
    pub model: ModelKind,
    pub beta: Option<f64>,
    pub alpha: f64,
    pub states: Option<Vec<State3>>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub seed: u64,
    pub t: Vec<f64>,
    pub columns: Vec<ComparisonColumn>,
}

fn same_except_alpha(a: &ChemostatParams, b: &ChemostatParams) -> bool {
    let mut b = *b;
    b.alpha = a.alpha;
    *a == b
}

fn column(
    label: String,
    model: ModelKind,
    beta: Option<f64>,
    alpha: f64,
    run: chemostat_core::Result<chemostat_core::integrators::Trajectory<State3>>,
) -> ComparisonColumn {
    let (states, failure) = match run {
        Ok(tr) => (Some(tr.states().to_vec()), None),
        Err(e) => (None, Some(e.to_string())),
    };
    ComparisonColumn {
        label,
        model,
        beta,
        alpha,
        states,
        failure,
    }
}

/// Runs the deterministic model, the O-U model at each comparison `beta`
/// (one shared innovation sequence), and both white-noise interpretations
/// (one shared Wiener path). The two configurations must agree on grid,
/// initial state and every parameter except `alpha`.
pub fn compare_models(
    cfg_random: &ScenarioConfig,
    cfg_stochastic: &ScenarioConfig,
    seed: u64,
) -> Result<Comparison> {
    if cfg_random.model != ModelKind::RandomOu {
        return Err(HarnessError::Config(format!(
            "first configuration must be random_ou, found {}",
            cfg_random.model
        )));
    }
    if !cfg_stochastic.model.is_white_noise() {
        return Err(HarnessError::Config(format!(
            "second configuration must be ito or stratonovich, found {}",
            cfg_stochastic.model
        )));
    }
    if cfg_random.grid != cfg_stochastic.grid {
        return Err(HarnessError::Config(
            "configurations use different time grids".into(),
        ));
    }
    if cfg_random.init != cfg_stochastic.init {
        return Err(HarnessError::Config(
            "configurations use different initial states".into(),
        ));
    }
    if !same_except_alpha(&cfg_random.params, &cfg_stochastic.params) {
        return Err(HarnessError::Config(
            "configurations differ in parameters other than alpha".into(),
        ));
    }
    let grid = cfg_random.grid;
    let init = cfg_random.init;
    let ou = cfg_random
        .noise
        .ok_or_else(|| HarnessError::Config("random_ou without noise parameters".into()))?;
    let betas = if cfg_random.compare_betas.is_empty() {
        vec![ou.beta()]
    } else {
        cfg_random.compare_betas.clone()
    };

    let pd = cfg_random.params;
    let mut columns = vec![column(
        "deterministic".into(),
        ModelKind::Deterministic,
        None,
        0.0,
        integrate_deterministic(
            |y: &State3| rhs_deterministic(y, &pd),
            init,
            grid,
            DeterministicScheme::Rk4,
        ),
    )];

    let noise_grid = cfg_random.noise_grid()?;
    for beta in betas {
        let params = OUParams::new(beta, ou.gamma())?;
        let z = sample_ou_path(params, seed, noise_grid);
        columns.push(column(
            format!("ou_beta{beta}"),
            ModelKind::RandomOu,
            Some(beta),
            pd.alpha,
            integrate_pathwise(|y: &State3, v| rhs_random(y, &pd, v), &z, init, grid),
        ));
    }

    let ps = cfg_stochastic.params;
    let w = sample_wiener_path(seed, cfg_stochastic.noise_grid()?);
    columns.push(column(
        "ito".into(),
        ModelKind::StochasticIto,
        None,
        ps.alpha,
        integrate_em_ito(|y: &State3| drift_diffusion_ito(y, &ps), &w, init, grid),
    ));
    columns.push(column(
        "stratonovich".into(),
        ModelKind::StochasticStratonovich,
        None,
        ps.alpha,
        integrate_heun_stratonovich(
            |y: &State3| drift_stratonovich(y, &ps),
            |y: &State3| diffusion(y, &ps),
            &w,
            init,
            grid,
        ),
    ));

    Ok(Comparison {
        seed,
        t: grid.times().collect(),
        columns,
    })
}

impl Comparison {
    pub fn column(&self, label: &str) -> Option<&ComparisonColumn> {
        self.columns.iter().find(|c| c.label == label)
    }

    /// One row per time; a failed run leaves its cells empty.
    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        write!(w, "t")?;
        for c in &self.columns {
            write!(w, ",{0}_s,{0}_x1,{0}_x2", c.label)?;
        }
        writeln!(w)?;
        for (k, t) in self.t.iter().enumerate() {
            write!(w, "{}", fmt17(*t))?;
            for c in &self.columns {
                match &c.states {
                    Some(st) => write!(
                        w,
                        ",{},{},{}",
                        fmt17(st[k].s),
                        fmt17(st[k].x1),
                        fmt17(st[k].x2)
                    )?,
                    None => write!(w, ",,,")?,
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn export_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        }
        let file = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| HarnessError::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{load_preset, white_noise_twin};
    use chemostat_core::TimeGrid;

    fn pair() -> (ScenarioConfig, ScenarioConfig) {
        let mut a = load_preset("fig12").unwrap();
        a.grid = TimeGrid::spanning(0.0, 1.0, 1e-3).unwrap();
        let b = white_noise_twin(&a);
        (a, b)
    }

    #[test]
    fn five_columns_on_one_grid() {
        let (a, b) = pair();
        let c = compare_models(&a, &b, 3).unwrap();
        let labels: Vec<&str> = c.columns.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(
            labels,
            [
                "deterministic",
                "ou_beta1",
                "ou_beta2",
                "ito",
                "stratonovich"
            ]
        );
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), a.grid.len() + 1);
        assert!(text.lines().all(|l| l.split(',').count() == 16));
    }

    #[test]
    fn mismatches_are_rejected() {
        let (a, b) = pair();
        let mut other = b.clone();
        other.grid = TimeGrid::spanning(0.0, 2.0, 1e-3).unwrap();
        assert!(compare_models(&a, &other, 0).is_err());
        let mut other = b.clone();
        other.params.m += 0.1;
        assert!(compare_models(&a, &other, 0).is_err());
        let mut other = b.clone();
        other.init = State3::new(1.0, 1.0, 1.0);
        assert!(compare_models(&a, &other, 0).is_err());
        assert!(compare_models(&b, &a, 0).is_err());
    }

    #[test]
    fn failed_column_leaves_blank_cells() {
        let c = Comparison {
            seed: 0,
            t: vec![0.0, 1.0],
            columns: vec![ComparisonColumn {
                label: "ito".into(),
                model: ModelKind::StochasticIto,
                beta: None,
                alpha: 1.0,
                states: None,
                failure: Some("singular".into()),
            }],
        };
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap().lines().nth(1).unwrap(),
            "0.0000000000000000e0,,,"
        );
    }
}
