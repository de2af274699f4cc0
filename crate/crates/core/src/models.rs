//! Chemostat with wall growth: parameters, right-hand sides and coordinate
//! transforms.
//!
//! State `(s, x1, x2)` holds the nutrient, the planktonic biomass and the
//! wall-attached biomass. Dilution may be constant (`D`), perturbed by an O-U
//! value (`D + alpha z`), or driven by white noise (Itô / Stratonovich form).

use alloc::vec::Vec;

use crate::{Error, ParamViolation, Result};

/// Biological and operational constants plus the noise amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChemostatParams {
    /// Input nutrient concentration.
    pub s_in: f64,
    /// Dilution rate `D`.
    pub dilution: f64,
    /// Half-saturation constant.
    pub a: f64,
    /// Maximal consumption rate.
    pub m: f64,
    /// Fraction of dead biomass recycled into nutrient.
    pub b: f64,
    /// Collective death rate.
    pub nu: f64,
    /// Growth rate.
    pub c: f64,
    /// Wall attachment rate.
    pub r1: f64,
    /// Wall detachment rate.
    pub r2: f64,
    /// Noise amplitude.
    pub alpha: f64,
}

/// A standing modelling assumption that the parameter set breaks. The
/// published figure parameter sets do this, so reproduction runs continue.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum AssumptionWarning {
    /// `c > m`
    GrowthExceedsConsumption { c: f64, m: f64 },
    /// `b > 1`
    RecyclingAboveOne { b: f64 },
}

impl ChemostatParams {
    fn hard_violations(&self) -> Vec<ParamViolation> {
        let positive = [
            ("s_in", self.s_in),
            ("dilution", self.dilution),
            ("a", self.a),
            ("m", self.m),
            ("b", self.b),
            ("nu", self.nu),
            ("c", self.c),
            ("r1", self.r1),
            ("r2", self.r2),
        ];
        let mut out: Vec<ParamViolation> = positive
            .into_iter()
            .filter(|(_, v)| !(*v > 0.0 && v.is_finite()))
            .map(|(field, value)| ParamViolation {
                field,
                value,
                rule: "> 0",
            })
            .collect();
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            out.push(ParamViolation {
                field: "alpha",
                value: self.alpha,
                rule: ">= 0",
            });
        }
        out
    }

    /// Assumption-level problems (`c <= m`, `b <= 1`).
    pub fn warnings(&self) -> Vec<AssumptionWarning> {
        let mut out = Vec::new();
        if self.c > self.m {
            out.push(AssumptionWarning::GrowthExceedsConsumption {
                c: self.c,
                m: self.m,
            });
        }
        if self.b > 1.0 {
            out.push(AssumptionWarning::RecyclingAboveOne { b: self.b });
        }
        out
    }

    /// Strict validation: every rate positive, `0 < b <= 1`, `0 < c <= m`,
    /// `alpha >= 0`. Returns the parameters unchanged when all hold.
    pub fn validate(self) -> Result<Self> {
        let mut violations = self.hard_violations();
        for w in self.warnings() {
            violations.push(match w {
                AssumptionWarning::GrowthExceedsConsumption { c, .. } => ParamViolation {
                    field: "c",
                    value: c,
                    rule: "c <= m",
                },
                AssumptionWarning::RecyclingAboveOne { b } => ParamViolation {
                    field: "b",
                    value: b,
                    rule: "b <= 1",
                },
            });
        }
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidParams(violations))
        }
    }

    /// Lenient validation for reproduction runs: positivity is enforced, the
    /// `c <= m` and `b <= 1` assumptions only produce warnings.
    pub fn validate_lenient(&self) -> Result<Vec<AssumptionWarning>> {
        let violations = self.hard_violations();
        if violations.is_empty() {
            Ok(self.warnings())
        } else {
            Err(Error::InvalidParams(violations))
        }
    }

    /// `D + alpha^2 / 2`, the dilution of the Stratonovich drift.
    pub fn stratonovich_dilution(&self) -> f64 {
        self.dilution + 0.5 * self.alpha * self.alpha
    }

    /// `s / (a + s)`; singular for `s <= -a`.
    pub fn monod(&self, s: f64) -> Result<f64> {
        let denom = self.a + s;
        if !(denom > 0.0) {
            return Err(Error::Singular { s });
        }
        Ok(s / denom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct State3 {
    pub s: f64,
    pub x1: f64,
    pub x2: f64,
}

/// Nutrient, total biomass `x = x1 + x2` and planktonic proportion `xi = x1 / x`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StateBP {
    pub s: f64,
    pub x: f64,
    pub xi: f64,
}

/// `sigma = (s - s_in) e^{alpha z}`, `kappa1 = x1 e^{alpha z}`, `kappa2 = x2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StateSK {
    pub sigma: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

impl State3 {
    pub const fn new(s: f64, x1: f64, x2: f64) -> Self {
        Self { s, x1, x2 }
    }

    pub fn biomass(&self) -> f64 {
        self.x1 + self.x2
    }
}

impl StateBP {
    pub const fn new(s: f64, x: f64, xi: f64) -> Self {
        Self { s, x, xi }
    }
}

impl StateSK {
    pub const fn new(sigma: f64, kappa1: f64, kappa2: f64) -> Self {
        Self {
            sigma,
            kappa1,
            kappa2,
        }
    }
}

/// Right-hand side with an arbitrary (possibly time-varying) dilution value.
pub fn rhs_with_dilution(state: &State3, p: &ChemostatParams, dilution: f64) -> Result<State3> {
    let State3 { s, x1, x2 } = *state;
    let monod = p.monod(s)?;
    let growth = p.c * monod;
    Ok(State3 {
        s: dilution * (p.s_in - s) - p.m * monod * x1 - p.m * monod * x2 + p.b * p.nu * x1,
        x1: -(p.nu + dilution) * x1 + growth * x1 - p.r1 * x1 + p.r2 * x2,
        x2: -p.nu * x2 + growth * x2 + p.r1 * x1 - p.r2 * x2,
    })
}

/// Unperturbed system with constant dilution `D`.
pub fn rhs_deterministic(state: &State3, p: &ChemostatParams) -> Result<State3> {
    rhs_with_dilution(state, p, p.dilution)
}

/// Random system: dilution `D + alpha z` for the current O-U value `z`.
pub fn rhs_random(state: &State3, p: &ChemostatParams, z: f64) -> Result<State3> {
    rhs_with_dilution(state, p, p.dilution + p.alpha * z)
}

/// Random system in biomass/proportion coordinates. The `xi` equation does
/// not involve `s` or `x`.
pub fn rhs_random_bp(state: &StateBP, p: &ChemostatParams, z: f64) -> Result<StateBP> {
    let StateBP { s, x, xi } = *state;
    let d = p.dilution + p.alpha * z;
    let monod = p.monod(s)?;
    Ok(StateBP {
        s: d * (p.s_in - s) - p.m * monod * x + p.b * p.nu * xi * x,
        x: -p.nu * x - d * xi * x + p.c * monod * x,
        xi: -d * xi * (1.0 - xi) - p.r1 * xi + p.r2 * (1.0 - xi),
    })
}

/// Diffusion column `(alpha (s_in - s), -alpha x1, 0)` shared by the Itô and
/// Stratonovich forms.
pub fn diffusion(state: &State3, p: &ChemostatParams) -> State3 {
    State3 {
        s: p.alpha * (p.s_in - state.s),
        x1: -p.alpha * state.x1,
        x2: 0.0,
    }
}

/// Itô drift and diffusion of the white-noise model.
pub fn drift_diffusion_ito(state: &State3, p: &ChemostatParams) -> Result<(State3, State3)> {
    Ok((rhs_deterministic(state, p)?, diffusion(state, p)))
}

/// Stratonovich drift: `D` replaced by `D + alpha^2 / 2` in the nutrient and
/// planktonic equations.
pub fn drift_stratonovich(state: &State3, p: &ChemostatParams) -> Result<State3> {
    rhs_with_dilution(state, p, p.stratonovich_dilution())
}

pub fn to_biomass_proportion(state: &State3) -> Result<StateBP> {
    let x = state.x1 + state.x2;
    if x == 0.0 {
        return Err(Error::ProportionUndefined);
    }
    Ok(StateBP {
        s: state.s,
        x,
        xi: state.x1 / x,
    })
}

pub fn from_biomass_proportion(state: &StateBP) -> State3 {
    State3 {
        s: state.s,
        x1: state.xi * state.x,
        x2: (1.0 - state.xi) * state.x,
    }
}

pub fn to_sigma_kappa(state: &State3, z: f64, alpha: f64, s_in: f64) -> StateSK {
    let scale = libm::exp(alpha * z);
    StateSK {
        sigma: (state.s - s_in) * scale,
        kappa1: state.x1 * scale,
        kappa2: state.x2,
    }
}

pub fn from_sigma_kappa(state: &StateSK, z: f64, alpha: f64, s_in: f64) -> State3 {
    let inv = libm::exp(-alpha * z);
    State3 {
        s: s_in + state.sigma * inv,
        x1: state.kappa1 * inv,
        x2: state.kappa2,
    }
}
