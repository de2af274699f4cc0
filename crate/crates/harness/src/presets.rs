//! Named scenarios reproducing the published figures. Each preset is config
//! text in the same format users write, so `preset = fig4` followed by
//! overrides behaves exactly like copying the block.

use crate::config::RawConfig;
use crate::config::{parse_config, ScenarioConfig};
use crate::error::{HarnessError, Result};

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub text: &'static str,
    pub notes: &'static [&'static str],
}

const HORIZON: &str = "horizon T = 20 is a default, the source does not state it";

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig4",
        summary: "O-U perturbed input, both species persist",
        text: "
[model]
kind = random_ou
s_in = 4
d = 2
a = 1.6
m = 2
b = 0.5
nu = 1.2
c = 3
r1 = 0.2
r2 = 0.4
alpha = 0.5
[noise]
beta = 1
gamma = 0.2
seeds = 0..20
[init]
s = 2.5
x1 = 2
x2 = 2
",
        notes: &[
            HORIZON,
            "c = 3 > m = 2 breaks the standing assumption c <= m",
        ],
    },
    Preset {
        name: "fig5",
        summary: "fig4 with stronger, faster noise",
        text: "
[model]
preset = fig4
alpha = 2
[noise]
beta = 4
gamma = 0.7
",
        notes: &[],
    },
    Preset {
        name: "fig6",
        summary: "O-U perturbed input, both species die out",
        text: "
[model]
kind = random_ou
s_in = 4
d = 1.5
a = 1.6
m = 2
b = 1
nu = 1.7
c = 2.4
r1 = 0.6
r2 = 0.4
alpha = 0.5
[noise]
beta = 1
gamma = 0.2
seeds = 0..20
[init]
s = 2.5
x1 = 2
x2 = 2
",
        notes: &[
            HORIZON,
            "c = 2.4 > m = 2 breaks the standing assumption c <= m",
        ],
    },
    Preset {
        name: "fig7",
        summary: "fig6 with stronger, faster noise",
        text: "
[model]
preset = fig6
alpha = 2
[noise]
beta = 4
gamma = 0.7
",
        notes: &[],
    },
    Preset {
        name: "fig8",
        summary: "white noise (Stratonovich), alpha = 0.5, high recycling",
        text: "
[model]
kind = stratonovich
s_in = 1
d = 3
a = 0.6
m = 3
b = 2
nu = 0.2
c = 1.5
r1 = 0.6
r2 = 0.4
alpha = 0.5
[noise]
seeds = 0..50
[init]
s = 5
x1 = 2.5
x2 = 2.5
",
        notes: &[HORIZON, "b = 2 > 1 breaks the standing assumption b <= 1"],
    },
    Preset {
        name: "fig9",
        summary: "fig8 with alpha = 1.5; the nutrient turns negative",
        text: "
[model]
preset = fig8
alpha = 1.5
",
        notes: &[],
    },
    Preset {
        name: "fig10",
        summary: "white noise, b = 0.5, nu = 1.2, alpha = 0.5",
        text: "
[model]
preset = fig8
b = 0.5
nu = 1.2
alpha = 0.5
",
        notes: &["c = 1.5 carried over from the previous white-noise runs (not restated)"],
    },
    Preset {
        name: "fig11",
        summary: "fig10 with alpha = 1.5",
        text: "
[model]
preset = fig10
alpha = 1.5
",
        notes: &[],
    },
    Preset {
        name: "fig12",
        summary: "model comparison on the fig4 set: deterministic, O-U (beta 1 and 2), white noise",
        text: "
[model]
preset = fig4
alpha = 0.8
[noise]
beta = 1
gamma = 0.7
compare_betas = 1, 2
",
        notes: &[],
    },
    Preset {
        name: "fig13",
        summary: "model comparison on the fig6 set with alpha = 1.5",
        text: "
[model]
preset = fig6
alpha = 1.5
[noise]
beta = 1
gamma = 0.7
compare_betas = 1, 2
",
        notes: &[],
    },
];

pub fn find(name: &str) -> Result<&'static Preset> {
    PRESETS
        .iter()
        .find(|p| p.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| HarnessError::UnknownPreset(name.to_string()))
}

pub(crate) fn raw(name: &str) -> Result<RawConfig> {
    RawConfig::parse(find(name)?.text)
}

pub(crate) fn notes(name: &str) -> Result<&'static [&'static str]> {
    Ok(find(name)?.notes)
}

pub fn load_preset(name: &str) -> Result<ScenarioConfig> {
    parse_config("", Some(name))
}

/// White-noise counterpart of a comparison preset: same parameters, initial
/// state and grid, Itô/Stratonovich columns come from this config.
pub fn white_noise_twin(cfg: &ScenarioConfig) -> ScenarioConfig {
    ScenarioConfig {
        model: crate::config::ModelKind::StochasticStratonovich,
        noise: Some(
            chemostat_core::noise::OUParams::new(1.0, 1.0).expect("unit O-U parameters are valid"),
        ),
        ..cfg.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ModelKind;

    #[test]
    fn every_preset_loads() {
        for p in PRESETS {
            let cfg = load_preset(p.name).unwrap_or_else(|e| panic!("{}: {e}", p.name));
            assert_eq!(cfg.name.as_deref(), Some(p.name));
            assert!(!cfg.seeds.is_empty());
        }
    }

    #[test]
    fn fig4_expansion() {
        let cfg = load_preset("fig4").unwrap();
        let p = cfg.params;
        assert_eq!(
            (p.s_in, p.dilution, p.a, p.m, p.b, p.nu, p.c, p.r1, p.r2, p.alpha),
            (4.0, 2.0, 1.6, 2.0, 0.5, 1.2, 3.0, 0.2, 0.4, 0.5)
        );
        let ou = cfg.noise.unwrap();
        assert_eq!((ou.beta(), ou.gamma()), (1.0, 0.2));
        assert_eq!((cfg.init.s, cfg.init.x1, cfg.init.x2), (2.5, 2.0, 2.0));
        assert_eq!(cfg.model, ModelKind::RandomOu);
        assert!(!cfg.warnings.is_empty());
    }

    #[test]
    fn noisier_variants_apply_deltas() {
        for (base, var) in [("fig4", "fig5"), ("fig6", "fig7")] {
            let b = load_preset(base).unwrap();
            let v = load_preset(var).unwrap();
            assert_eq!(v.params.alpha, 2.0);
            let ou = v.noise.unwrap();
            assert_eq!((ou.beta(), ou.gamma()), (4.0, 0.7));
            assert_eq!(v.params.nu, b.params.nu);
            assert_eq!(v.init, b.init);
        }
    }

    #[test]
    fn white_noise_presets() {
        let f9 = load_preset("fig9").unwrap();
        assert_eq!(f9.model, ModelKind::StochasticStratonovich);
        assert_eq!((f9.params.alpha, f9.params.a, f9.params.b), (1.5, 0.6, 2.0));
        assert_eq!(f9.seeds.len(), 50);
        let f11 = load_preset("fig11").unwrap();
        assert_eq!(
            (f11.params.b, f11.params.nu, f11.params.c, f11.params.alpha),
            (0.5, 1.2, 1.5, 1.5)
        );
        assert!(f11.notes.iter().any(|n| n.contains("c = 1.5")));
    }

    #[test]
    fn comparison_presets() {
        let f12 = load_preset("fig12").unwrap();
        assert_eq!(f12.compare_betas, vec![1.0, 2.0]);
        assert_eq!(f12.params.alpha, 0.8);
        assert_eq!(f12.noise.unwrap().gamma(), 0.7);
        let f13 = load_preset("fig13").unwrap();
        assert_eq!((f13.params.alpha, f13.params.nu), (1.5, 1.7));
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(
            load_preset("fig99"),
            Err(HarnessError::UnknownPreset(_))
        ));
    }
}
