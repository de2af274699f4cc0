//! Closed-form attracting-set bounds, regime classification and pathwise
//! verification of the bounds on simulated trajectories.
//!
//! All bounds assume the perturbed dilution stays inside a band `(b1, b2)`.
//! A Gaussian path is unbounded, so every pathwise check first certifies the
//! band on the actual dilution samples and reports the outcome.

use alloc::vec::Vec;

use crate::integrators::{StateVector, Trajectory};
use crate::models::{from_biomass_proportion, ChemostatParams, State3, StateBP, StateSK};
use crate::noise::{check_dilution_band, NoisePath, OUParams};
use crate::{Error, Result, TimeGrid};

/// Two-sided 99.9% quantile of `|N(0, 1)|`.
pub const STATIONARY_QUANTILE_999: f64 = 3.290_526_731_491_926;

/// Half-width of the band used when there is no noise at all.
pub const DEGENERATE_HALF_WIDTH: f64 = 1e-9;

/// Interval `(b1, b2)` assumed to contain the perturbed dilution at all times.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DilutionBand {
    b1: f64,
    b2: f64,
}

impl DilutionBand {
    pub fn new(b1: f64, b2: f64) -> Result<Self> {
        if !(b1 > 0.0) || !(b1 < b2) || !b2.is_finite() {
            return Err(Error::InvalidBand { b1, b2 });
        }
        Ok(Self { b1, b2 })
    }

    /// `D -/+ alpha q sigma`, where `sigma` is the stationary O-U standard
    /// deviation and `q` the 99.9% quantile of `|N(0,1)|`. Without noise the
    /// band collapses to `D -/+ 1e-9`.
    pub fn auto(p: &ChemostatParams, ou: Option<OUParams>) -> Result<Self> {
        let half = match ou {
            Some(ou) => p.alpha * STATIONARY_QUANTILE_999 * ou.stationary_sd(),
            None => 0.0,
        };
        let half = if half > 0.0 {
            half
        } else {
            DEGENERATE_HALF_WIDTH
        };
        Self::new(p.dilution - half, p.dilution + half)
    }

    pub fn b1(&self) -> f64 {
        self.b1
    }

    pub fn b2(&self) -> f64 {
        self.b2
    }

    /// Whether `D` itself lies strictly inside the band.
    pub fn brackets(&self, dilution: f64) -> bool {
        self.b1 < dilution && dilution < self.b2
    }
}

/// Deterministic constants bounding the long-run dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundsReport {
    pub b1: f64,
    pub b2: f64,
    /// `min(b1, nu)`
    pub vartheta: f64,
    /// Radius of the attracting set for `p = s + (m/c)(x1 + x2)`: `s_in b2 / vartheta`.
    pub p_radius: f64,
    pub xi_l: f64,
    pub xi_u: f64,
    /// Band for `z = c s + m x`.
    pub z_l: f64,
    pub z_u: f64,
    /// Lower bound on total biomass (positive only in the persistence regime).
    pub x_tilde: f64,
    /// Lower bound on the nutrient.
    pub s_tilde: f64,
    /// `xi_l * x_tilde`
    pub x1_floor: f64,
    /// `(1 - xi_u) * x_tilde`
    pub x2_floor: f64,
    pub sharpening_n: Option<u32>,
    pub x_tilde_n: Option<f64>,
    pub s_tilde_n: Option<f64>,
}

impl BoundsReport {
    /// `x_tilde` and `s_tilde` computed with the tolerance shrunk by `1/n`.
    pub fn sharpened(&self, p: &ChemostatParams, n: u32) -> (f64, f64) {
        let n = n as f64;
        let numer = self.z_l - (p.nu + self.b2) * (p.a + self.z_u / p.c);
        let x_n = numer / (p.m + p.c / n);
        let s_n = self.b1 * p.s_in / (self.b2 + self.z_u / p.a * (1.0 + 1.0 / n));
        (x_n, s_n)
    }
}

pub fn attractor_bounds(p: &ChemostatParams, band: &DilutionBand) -> Result<BoundsReport> {
    let (b1, b2) = (band.b1, band.b2);
    let vartheta = b1.min(p.nu);
    let xi_l = p.r2 / (b2 + p.r1 + p.r2);
    let xi_u = (b1 + p.r2) / (b1 + p.r1 + p.r2);
    let lower_rate = b2 + p.nu - p.c * p.b * p.nu / p.m * xi_l;
    if !(lower_rate > 0.0) {
        return Err(Error::DegenerateBound {
            b1,
            b2,
            denominator: lower_rate,
        });
    }
    let z_l = p.c * p.s_in * b1 / lower_rate;
    let z_u = p.c * p.s_in * b2 / (xi_l * b1);
    let x_tilde = (z_l - (p.nu + b2) * (p.a + z_u / p.c)) / (p.m + p.c);
    let s_tilde = b1 * p.s_in / (b2 + 2.0 * z_u / p.a);
    Ok(BoundsReport {
        b1,
        b2,
        vartheta,
        p_radius: p.s_in * b2 / vartheta,
        xi_l,
        xi_u,
        z_l,
        z_u,
        x_tilde,
        s_tilde,
        x1_floor: xi_l * x_tilde,
        x2_floor: (1.0 - xi_u) * x_tilde,
        sharpening_n: None,
        x_tilde_n: None,
        s_tilde_n: None,
    })
}

/// [`attractor_bounds`] plus the sharpened lower bounds for `n >= 1`.
pub fn attractor_bounds_sharpened(
    p: &ChemostatParams,
    band: &DilutionBand,
    n: u32,
) -> Result<BoundsReport> {
    if n == 0 {
        return Err(Error::InvalidGrid("sharpening index must be at least 1"));
    }
    let mut r = attractor_bounds(p, band)?;
    let (x_n, s_n) = r.sharpened(p, n);
    r.sharpening_n = Some(n);
    r.x_tilde_n = Some(x_n);
    r.s_tilde_n = Some(s_n);
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Verdict {
    Extinction,
    Persistence,
    /// Neither sufficient condition holds.
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegimeClassification {
    pub verdict: Verdict,
    /// `nu + D xi_l`; extinction when it exceeds `c`.
    pub extinction_lhs: f64,
    pub extinction_rhs: f64,
    /// `nu + b2`; persistence when below `z_l / (a + z_u / c)`.
    pub persistence_lhs: f64,
    pub persistence_rhs: f64,
}

impl RegimeClassification {
    pub fn extinction_holds(&self) -> bool {
        self.extinction_lhs > self.extinction_rhs
    }

    pub fn persistence_condition_holds(&self) -> bool {
        self.persistence_lhs < self.persistence_rhs
    }
}

pub fn classify_regime(p: &ChemostatParams, band: &DilutionBand) -> Result<RegimeClassification> {
    let bounds = attractor_bounds(p, band)?;
    Ok(classify_with_bounds(p, &bounds))
}

pub fn classify_with_bounds(p: &ChemostatParams, bounds: &BoundsReport) -> RegimeClassification {
    let extinction_lhs = p.nu + p.dilution * bounds.xi_l;
    let persistence_lhs = p.nu + bounds.b2;
    let persistence_rhs = bounds.z_l / (p.a + bounds.z_u / p.c);
    let verdict = if extinction_lhs > p.c {
        Verdict::Extinction
    } else if persistence_lhs < persistence_rhs {
        Verdict::Persistence
    } else {
        Verdict::Indeterminate
    };
    RegimeClassification {
        verdict,
        extinction_lhs,
        extinction_rhs: p.c,
        persistence_lhs,
        persistence_rhs,
    }
}

/// Tolerances for [`check_envelopes`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeTolerances {
    /// Absolute slack for the explicit exponential envelopes.
    pub formula_abs: f64,
    /// Slack for the asymptotic statements: absolute for `xi`, relative for
    /// `z` and the floors.
    pub asymptotic: f64,
    /// "For t large enough" is read as "over this trailing fraction of the horizon".
    pub tail_fraction: f64,
}

impl Default for EnvelopeTolerances {
    fn default() -> Self {
        Self {
            formula_abs: 1e-6,
            asymptotic: 1e-3,
            tail_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnvelopeReport {
    /// The dilution stayed strictly inside the band at every sample. The
    /// remaining fields only carry meaning when this holds.
    pub band_certified: bool,
    pub band_inside_fraction: f64,
    /// `max_t p(t) - envelope(t)`
    pub p_max_violation: f64,
    pub p_bound_ok: bool,
    /// Largest excursion of `xi` outside its two exponential envelopes;
    /// `None` when the initial biomass is zero.
    pub xi_max_violation: Option<f64>,
    pub xi_envelopes_ok: bool,
    /// First time after which `xi` stays in `[xi_l - tol, xi_u + tol]`.
    pub xi_band_entry_time: Option<f64>,
    pub xi_tail_ok: bool,
    /// First time `z = c s + m x` enters its band.
    pub z_band_entry_time: Option<f64>,
    /// `z` never leaves the band after entering it.
    pub z_band_remains: bool,
    pub z_tail_ok: bool,
    /// Only meaningful when `x_tilde > 0`.
    pub floors_applicable: bool,
    /// First time after which `x >= x_tilde`, `s >= s_tilde` and both species
    /// floors hold for the rest of the run.
    pub floors_ok_after: Option<f64>,
    /// `max_t x(t) / (x0 exp(-(nu - c) t - xi_l int_0^t (D + alpha z)))`.
    pub extinction_envelope_max_ratio: f64,
}

/// States that can be mapped back to `(s, x1, x2)` without the noise value.
pub trait PhysicalState: StateVector {
    fn physical(&self) -> Result<State3>;
}

impl PhysicalState for State3 {
    fn physical(&self) -> Result<State3> {
        Ok(*self)
    }
}

impl PhysicalState for StateBP {
    fn physical(&self) -> Result<State3> {
        Ok(from_biomass_proportion(self))
    }
}

impl PhysicalState for StateSK {
    fn physical(&self) -> Result<State3> {
        Err(Error::CoordinateMismatch(
            "sigma-kappa states need the noise value to map back; use from_sigma_kappa",
        ))
    }
}

/// Index of the first point from which `pred` holds through the end.
fn permanent_from(ok: impl DoubleEndedIterator<Item = bool> + ExactSizeIterator) -> Option<usize> {
    let n = ok.len();
    let tail = ok.rev().take_while(|b| *b).count();
    (tail > 0).then(|| n - tail)
}

/// Linear interpolation of per-point values on `src` at time `t`.
fn sample_on(src: &TimeGrid, values: &[f64], t: f64) -> f64 {
    let pos = ((t - src.t0()) / src.dt()).clamp(0.0, src.n_steps() as f64);
    let k = (libm::floor(pos) as usize).min(src.n_steps() - 1);
    let w = pos - k as f64;
    values[k] + w * (values[k + 1] - values[k])
}

/// Verifies every pathwise envelope on one trajectory. `dilution` must be the
/// `D + alpha z` path that drove the trajectory.
pub fn check_envelopes<S: PhysicalState>(
    traj: &Trajectory<S>,
    p: &ChemostatParams,
    bounds: &BoundsReport,
    band: &DilutionBand,
    dilution: &NoisePath,
    tol: &EnvelopeTolerances,
) -> Result<EnvelopeReport> {
    let grid = *traj.grid();
    if !dilution.grid().covers(&grid) {
        return Err(Error::NoiseMismatch(
            "dilution path does not cover the trajectory",
        ));
    }
    let phys: Vec<State3> = traj
        .states()
        .iter()
        .map(|s| s.physical())
        .collect::<Result<_>>()?;
    let band_report = check_dilution_band(dilution, band.b1, band.b2)?;
    let t0 = grid.t0();
    let ratio = p.m / p.c;

    // Absorbing bound for p.
    let p0 = phys[0].s + ratio * phys[0].biomass();
    let p_max_violation = grid
        .times()
        .zip(&phys)
        .map(|(t, st)| {
            let decay = libm::exp(-bounds.vartheta * (t - t0));
            let env = p0 * decay + bounds.p_radius * (1.0 - decay);
            st.s + ratio * st.biomass() - env
        })
        .fold(f64::NEG_INFINITY, f64::max);

    // Proportion envelopes.
    let x0 = phys[0].biomass();
    let xi_max_violation = (x0 > 0.0).then(|| {
        let xi0 = phys[0].x1 / x0;
        let up_rate = bounds.b1 + p.r1 + p.r2;
        let lo_rate = bounds.b2 + p.r1 + p.r2;
        grid.times()
            .zip(&phys)
            .filter(|(_, st)| st.biomass() > 0.0)
            .map(|(t, st)| {
                let xi = st.x1 / st.biomass();
                let (eu, el) = (
                    libm::exp(-up_rate * (t - t0)),
                    libm::exp(-lo_rate * (t - t0)),
                );
                let upper = xi0 * eu + bounds.xi_u * (1.0 - eu);
                let lower = xi0 * el + bounds.xi_l * (1.0 - el);
                (xi - upper).max(lower - xi)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    });

    let tail_start = grid.t0() + (1.0 - tol.tail_fraction) * grid.horizon();
    let in_tail = |t: f64| t >= tail_start - 1e-12;

    let xi_ok: Vec<bool> = phys
        .iter()
        .map(|st| {
            let x = st.biomass();
            x > 0.0 && {
                let xi = st.x1 / x;
                xi >= bounds.xi_l - tol.asymptotic && xi <= bounds.xi_u + tol.asymptotic
            }
        })
        .collect();
    let xi_band_entry_time = permanent_from(xi_ok.iter().copied()).map(|k| grid.t(k));
    let xi_tail_ok = grid
        .times()
        .zip(&xi_ok)
        .filter(|(t, _)| in_tail(*t))
        .all(|(_, ok)| *ok);

    let z_lo = bounds.z_l * (1.0 - tol.asymptotic);
    let z_hi = bounds.z_u * (1.0 + tol.asymptotic);
    let z_ok: Vec<bool> = phys
        .iter()
        .map(|st| {
            let z = p.c * st.s + p.m * st.biomass();
            z >= z_lo && z <= z_hi
        })
        .collect();
    let z_first = z_ok.iter().position(|b| *b);
    let z_band_entry_time = z_first.map(|k| grid.t(k));
    let z_band_remains = z_first.is_some_and(|k| z_ok[k..].iter().all(|b| *b));
    let z_tail_ok = grid
        .times()
        .zip(&z_ok)
        .filter(|(t, _)| in_tail(*t))
        .all(|(_, ok)| *ok);

    let floors_applicable = bounds.x_tilde > 0.0;
    let floors_ok_after = if floors_applicable {
        let slack = 1.0 - tol.asymptotic;
        permanent_from(phys.iter().map(|st| {
            st.biomass() >= bounds.x_tilde * slack
                && st.s >= bounds.s_tilde * slack
                && st.x1 >= bounds.x1_floor * slack
                && st.x2 >= bounds.x2_floor * slack
        }))
        .map(|k| grid.t(k))
    } else {
        None
    };

    // Extinction decay envelope, re-evaluated along the stored dilution path.
    let cumulative = dilution.cumulative_integral();
    let d_grid = *dilution.grid();
    let int_at_t0 = sample_on(&d_grid, &cumulative, t0);
    let extinction_envelope_max_ratio = if x0 > 0.0 {
        grid.times()
            .zip(&phys)
            .map(|(t, st)| {
                let int_d = sample_on(&d_grid, &cumulative, t) - int_at_t0;
                let env = x0 * libm::exp(-(p.nu - p.c) * (t - t0) - bounds.xi_l * int_d);
                st.biomass() / env
            })
            .fold(0.0, f64::max)
    } else {
        0.0
    };

    Ok(EnvelopeReport {
        band_certified: band_report.certified(),
        band_inside_fraction: band_report.inside_fraction,
        p_max_violation,
        p_bound_ok: p_max_violation <= tol.formula_abs,
        xi_max_violation,
        xi_envelopes_ok: xi_max_violation.is_none_or(|v| v <= tol.formula_abs),
        xi_band_entry_time,
        xi_tail_ok,
        z_band_entry_time,
        z_band_remains,
        z_tail_ok,
        floors_applicable,
        floors_ok_after,
        extinction_envelope_max_ratio,
    })
}

/// Sign diagnostics for the nutrient of a (typically white-noise) run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PositivityReport {
    /// Maximal runs of grid times with `s < 0`, as `(first, last)`.
    pub negative_intervals: Vec<(f64, f64)>,
    pub min_s: f64,
    pub min_s_time: f64,
    /// Smallest biomass component over the run.
    pub min_biomass: f64,
    /// `min s > -a`
    pub above_singularity: bool,
}

impl PositivityReport {
    pub fn clean(&self) -> bool {
        self.negative_intervals.is_empty()
    }
}

pub fn positivity_diagnostics(traj: &Trajectory<State3>, p: &ChemostatParams) -> PositivityReport {
    let mut negative_intervals = Vec::new();
    let mut open: Option<(f64, f64)> = None;
    let (mut min_s, mut min_s_time, mut min_biomass) =
        (f64::INFINITY, traj.grid().t0(), f64::INFINITY);
    for (t, st) in traj.iter() {
        if st.s < min_s {
            min_s = st.s;
            min_s_time = t;
        }
        min_biomass = min_biomass.min(st.x1).min(st.x2);
        if st.s < 0.0 {
            open = Some(open.map_or((t, t), |(a, _)| (a, t)));
        } else if let Some(iv) = open.take() {
            negative_intervals.push(iv);
        }
    }
    negative_intervals.extend(open);
    PositivityReport {
        negative_intervals,
        min_s,
        min_s_time,
        min_biomass,
        above_singularity: min_s > -p.a,
    }
}

/// How often the sufficient condition for `sigma` to stay nonnegative,
/// `e^{alpha z} <= (b nu xi (a + s_in) / (m s_in) - xi) / (1 - xi)`,
/// fails along a run. `sigma = 0` is the line `s = s_in`. Points with
/// `xi = 1` or zero biomass are skipped.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SigmaConditionReport {
    pub checked: usize,
    pub violations: usize,
    pub first_violation: Option<f64>,
}

pub fn sigma_condition_report(
    traj: &Trajectory<StateSK>,
    z: &NoisePath,
    p: &ChemostatParams,
) -> Result<SigmaConditionReport> {
    if !z.grid().covers(traj.grid()) {
        return Err(Error::NoiseMismatch(
            "noise path does not cover the trajectory",
        ));
    }
    let mut report = SigmaConditionReport {
        checked: 0,
        violations: 0,
        first_violation: None,
    };
    let gain = p.b * p.nu * (p.a + p.s_in) / (p.m * p.s_in);
    for (t, st) in traj.iter() {
        let kappa = st.kappa1 + st.kappa2;
        if kappa <= 0.0 {
            continue;
        }
        let xi = st.kappa1 / kappa;
        if xi >= 1.0 {
            continue;
        }
        report.checked += 1;
        let rhs = (gain * xi - xi) / (1.0 - xi);
        if libm::exp(p.alpha * z.value_at(t)?) > rhs {
            report.violations += 1;
            report.first_violation.get_or_insert(t);
        }
    }
    Ok(report)
}

/// Exponent rate of the extinction envelope, `nu + D xi_l - c`.
pub fn extinction_rate(p: &ChemostatParams, bounds: &BoundsReport) -> f64 {
    p.nu + p.dilution * bounds.xi_l - p.c
}
