//! Fixed-step integrators.
//!
//! * [`integrate_pathwise`]: classical RK4 for a random ODE along one fixed
//!   noise path. Stage times between noise samples use linear interpolation.
//! * [`integrate_em_ito`]: Euler-Maruyama for the Itô form.
//! * [`integrate_heun_stratonovich`]: stochastic Heun (trapezoidal
//!   predictor-corrector) for the Stratonovich form.
//! * [`integrate_deterministic`]: the noise-free counterparts (RK4, forward
//!   Euler, Heun) used as references.
//!
//! Integrators never clamp. A state that stops being finite, hits the Monod
//! singularity or (for pathwise runs) leaves the admissible region by more
//! than [`ADMISSIBILITY_TOL`] aborts the run with [`Error::Integration`].

use alloc::vec::Vec;

use crate::error::StepFailure;
use crate::models::{State3, StateBP, StateSK};
use crate::noise::{NoiseKind, NoisePath, OUParams};
use crate::{Error, Result, TimeGrid};

/// Slack below zero (and above one for proportions) tolerated before a
/// pathwise run is declared inadmissible.
pub const ADMISSIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Coords {
    Original,
    BiomassProportion,
    SigmaKappa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Scheme {
    Rk4Pathwise,
    EulerMaruyama,
    HeunStratonovich,
    Rk4,
    ForwardEuler,
    Heun,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeterministicScheme {
    Rk4,
    ForwardEuler,
    Heun,
}

/// Which noise realization produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NoiseRef {
    pub seed: u64,
    pub kind: NoiseKind,
    pub ou: Option<OUParams>,
}

impl NoiseRef {
    pub fn of(path: &NoisePath) -> Self {
        Self {
            seed: path.seed(),
            kind: path.kind(),
            ou: path.ou_params(),
        }
    }
}

/// Three-component state types the integrators can advance.
pub trait StateVector: Copy {
    const COORDS: Coords;
    const LABELS: [&'static str; 3];

    fn from_components(c: [f64; 3]) -> Self;
    fn components(&self) -> [f64; 3];

    /// First component outside the admissible region by more than `tol`.
    fn inadmissible(&self, _tol: f64) -> Option<(&'static str, f64)> {
        None
    }
}

impl StateVector for State3 {
    const COORDS: Coords = Coords::Original;
    const LABELS: [&'static str; 3] = ["s", "x1", "x2"];

    fn from_components([s, x1, x2]: [f64; 3]) -> Self {
        State3 { s, x1, x2 }
    }

    fn components(&self) -> [f64; 3] {
        [self.s, self.x1, self.x2]
    }

    fn inadmissible(&self, tol: f64) -> Option<(&'static str, f64)> {
        Self::LABELS
            .into_iter()
            .zip(self.components())
            .find(|(_, v)| *v < -tol)
    }
}

impl StateVector for StateBP {
    const COORDS: Coords = Coords::BiomassProportion;
    const LABELS: [&'static str; 3] = ["s", "x", "xi"];

    fn from_components([s, x, xi]: [f64; 3]) -> Self {
        StateBP { s, x, xi }
    }

    fn components(&self) -> [f64; 3] {
        [self.s, self.x, self.xi]
    }

    fn inadmissible(&self, tol: f64) -> Option<(&'static str, f64)> {
        if self.s < -tol {
            Some(("s", self.s))
        } else if self.x < -tol {
            Some(("x", self.x))
        } else if self.xi < -tol || self.xi > 1.0 + tol {
            Some(("xi", self.xi))
        } else {
            None
        }
    }
}

impl StateVector for StateSK {
    const COORDS: Coords = Coords::SigmaKappa;
    const LABELS: [&'static str; 3] = ["sigma", "kappa1", "kappa2"];

    fn from_components([sigma, kappa1, kappa2]: [f64; 3]) -> Self {
        StateSK {
            sigma,
            kappa1,
            kappa2,
        }
    }

    fn components(&self) -> [f64; 3] {
        [self.sigma, self.kappa1, self.kappa2]
    }
}

#[inline]
fn axpy<S: StateVector>(y: S, h: f64, d: S) -> S {
    let (y, d) = (y.components(), d.components());
    S::from_components([y[0] + h * d[0], y[1] + h * d[1], y[2] + h * d[2]])
}

#[inline]
fn add<S: StateVector>(a: S, b: S) -> S {
    let (a, b) = (a.components(), b.components());
    S::from_components([a[0] + b[0], a[1] + b[1], a[2] + b[2]])
}

/// `y + h (k1 + 2 k2 + 2 k3 + k4) / 6`
#[inline]
fn rk4_update<S: StateVector>(y: S, h: f64, k: [S; 4]) -> S {
    let [k1, k2, k3, k4] = k.map(|k| k.components());
    let y = y.components();
    S::from_components(core::array::from_fn(|i| {
        y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    }))
}

/// Time-indexed states of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    grid: TimeGrid,
    states: Vec<S>,
    noise: Option<NoiseRef>,
    scheme: Scheme,
}

impl<S: StateVector> Trajectory<S> {
    /// Assembles a trajectory from stored states (e.g. after import).
    pub fn from_parts(
        grid: TimeGrid,
        states: Vec<S>,
        noise: Option<NoiseRef>,
        scheme: Scheme,
    ) -> Result<Self> {
        if states.len() != grid.len() {
            return Err(Error::InvalidGrid(
                "trajectory needs one state per grid point",
            ));
        }
        Ok(Self {
            grid,
            states,
            noise,
            scheme,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn noise(&self) -> Option<NoiseRef> {
        self.noise
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn coords(&self) -> Coords {
        S::COORDS
    }

    pub fn initial(&self) -> S {
        self.states[0]
    }

    pub fn terminal(&self) -> S {
        self.states[self.states.len() - 1]
    }

    /// `(t_k, state_k)` pairs.
    pub fn iter(&self) -> impl ExactSizeIterator<Item = (f64, &S)> + '_ {
        self.grid.times().zip(self.states.iter())
    }

    /// Applies `f` to every `(t, state)` pair, keeping grid, noise and scheme.
    pub fn map_states<T, F>(&self, mut f: F) -> Result<Trajectory<T>>
    where
        F: FnMut(f64, &S) -> Result<T>,
    {
        let states = self
            .iter()
            .map(|(t, s)| f(t, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Trajectory {
            grid: self.grid,
            states,
            noise: self.noise,
            scheme: self.scheme,
        })
    }

    /// Smallest value of each component over the grid.
    pub fn component_min(&self) -> [f64; 3] {
        self.states.iter().fold([f64::INFINITY; 3], |mut m, s| {
            for (mi, v) in m.iter_mut().zip(s.components()) {
                *mi = mi.min(v);
            }
            m
        })
    }
}

struct Stepper<S> {
    grid: TimeGrid,
    states: Vec<S>,
    admissibility: Option<f64>,
}

impl<S: StateVector> Stepper<S> {
    fn new(grid: TimeGrid, init: S, admissibility: Option<f64>) -> Result<Self> {
        let mut states = Vec::with_capacity(grid.len());
        states.push(init);
        let mut st = Self {
            grid,
            states: Vec::new(),
            admissibility,
        };
        st.check(0, init)?;
        st.states = states;
        Ok(st)
    }

    fn failure(&self, k: usize, reason: StepFailure) -> Error {
        Error::Integration {
            t: self.grid.t(k),
            last_valid: self.grid.t(k.saturating_sub(1)),
            reason,
        }
    }

    /// Converts a right-hand-side error raised while computing point `k`.
    fn lift(&self, k: usize, e: Error) -> Error {
        match e {
            Error::Singular { s } => self.failure(k, StepFailure::Singular { s }),
            other => other,
        }
    }

    fn check(&self, k: usize, y: S) -> Result<()> {
        if y.components().iter().any(|v| !v.is_finite()) {
            return Err(self.failure(k, StepFailure::NonFinite));
        }
        if let Some(tol) = self.admissibility {
            if let Some((component, value)) = y.inadmissible(tol) {
                return Err(self.failure(k, StepFailure::Inadmissible { component, value }));
            }
        }
        Ok(())
    }

    fn push(&mut self, y: S) -> Result<()> {
        let k = self.states.len();
        self.check(k, y)?;
        self.states.push(y);
        Ok(())
    }

    fn last(&self) -> S {
        self.states[self.states.len() - 1]
    }

    fn finish(self, noise: Option<NoiseRef>, scheme: Scheme) -> Trajectory<S> {
        Trajectory {
            grid: self.grid,
            states: self.states,
            noise,
            scheme,
        }
    }
}

/// Classical RK4 on a random ODE `y' = f(y, z(t))` along the sampled path
/// `noise`, which must cover `grid`. Stage values of `z` at `t + h/2` are
/// linearly interpolated, so a noise grid twice as fine as `grid` makes every
/// stage land on a sample.
pub fn integrate_pathwise<S, F>(
    mut rhs: F,
    noise: &NoisePath,
    init: S,
    grid: TimeGrid,
) -> Result<Trajectory<S>>
where
    S: StateVector,
    F: FnMut(&S, f64) -> Result<S>,
{
    if !noise.grid().covers(&grid) {
        return Err(Error::NoiseMismatch(
            "noise path does not cover the integration grid",
        ));
    }
    let h = grid.dt();
    let mut st = Stepper::new(grid, init, Some(ADMISSIBILITY_TOL))?;
    for k in 0..grid.n_steps() {
        let (t0, t1) = (grid.t(k), grid.t(k + 1));
        let z0 = noise.value_at(t0)?;
        let zh = noise.value_at(0.5 * (t0 + t1))?;
        let z1 = noise.value_at(t1)?;
        let y = st.last();
        let stage = |r: Result<S>| r.map_err(|e| st.lift(k + 1, e));
        let k1 = stage(rhs(&y, z0))?;
        let k2 = stage(rhs(&axpy(y, 0.5 * h, k1), zh))?;
        let k3 = stage(rhs(&axpy(y, 0.5 * h, k2), zh))?;
        let k4 = stage(rhs(&axpy(y, h, k3), z1))?;
        st.push(rk4_update(y, h, [k1, k2, k3, k4]))?;
    }
    Ok(st.finish(Some(NoiseRef::of(noise)), Scheme::Rk4Pathwise))
}

/// Noise-free reference integrators. All three check admissibility like the
/// pathwise scheme.
pub fn integrate_deterministic<S, F>(
    mut rhs: F,
    init: S,
    grid: TimeGrid,
    scheme: DeterministicScheme,
) -> Result<Trajectory<S>>
where
    S: StateVector,
    F: FnMut(&S) -> Result<S>,
{
    let h = grid.dt();
    let mut st = Stepper::new(grid, init, Some(ADMISSIBILITY_TOL))?;
    for k in 0..grid.n_steps() {
        let y = st.last();
        let stage = |r: Result<S>| r.map_err(|e| st.lift(k + 1, e));
        let next = match scheme {
            DeterministicScheme::ForwardEuler => axpy(y, h, stage(rhs(&y))?),
            DeterministicScheme::Heun => {
                let f0 = stage(rhs(&y))?;
                let pred = axpy(y, h, f0);
                let f1 = stage(rhs(&pred))?;
                axpy(y, 0.5 * h, add(f0, f1))
            }
            DeterministicScheme::Rk4 => {
                let k1 = stage(rhs(&y))?;
                let k2 = stage(rhs(&axpy(y, 0.5 * h, k1)))?;
                let k3 = stage(rhs(&axpy(y, 0.5 * h, k2)))?;
                let k4 = stage(rhs(&axpy(y, h, k3)))?;
                rk4_update(y, h, [k1, k2, k3, k4])
            }
        };
        st.push(next)?;
    }
    let scheme = match scheme {
        DeterministicScheme::Rk4 => Scheme::Rk4,
        DeterministicScheme::ForwardEuler => Scheme::ForwardEuler,
        DeterministicScheme::Heun => Scheme::Heun,
    };
    Ok(st.finish(None, scheme))
}

fn wiener_increments<'a>(
    wiener: &'a NoisePath,
    grid: &TimeGrid,
) -> Result<impl Fn(usize) -> f64 + 'a> {
    if wiener.kind() != NoiseKind::Wiener {
        return Err(Error::NoiseMismatch(
            "stochastic schemes need a Wiener path",
        ));
    }
    let (offset, stride) = wiener.grid().embedding_of(grid)?;
    let w = wiener.values();
    Ok(move |k: usize| w[offset + (k + 1) * stride] - w[offset + k * stride])
}

/// Euler-Maruyama: `y_{k+1} = y_k + f(y_k) dt + g(y_k) dW_k`. The Wiener path
/// may be finer than `grid` as long as the steps nest.
pub fn integrate_em_ito<S, F>(
    mut drift_diffusion: F,
    wiener: &NoisePath,
    init: S,
    grid: TimeGrid,
) -> Result<Trajectory<S>>
where
    S: StateVector,
    F: FnMut(&S) -> Result<(S, S)>,
{
    let dw = wiener_increments(wiener, &grid)?;
    let h = grid.dt();
    let mut st = Stepper::new(grid, init, None)?;
    for k in 0..grid.n_steps() {
        let y = st.last();
        let (f, g) = drift_diffusion(&y).map_err(|e| st.lift(k + 1, e))?;
        st.push(axpy(axpy(y, h, f), dw(k), g))?;
    }
    Ok(st.finish(Some(NoiseRef::of(wiener)), Scheme::EulerMaruyama))
}

/// Stochastic Heun for a Stratonovich SDE:
///
/// ```text
/// y* = y + f(y) dt + g(y) dW
/// y' = y + (f(y) + f(y*)) dt / 2 + (g(y) + g(y*)) dW / 2
/// ```
pub fn integrate_heun_stratonovich<S, F, G>(
    mut drift: F,
    mut diffusion: G,
    wiener: &NoisePath,
    init: S,
    grid: TimeGrid,
) -> Result<Trajectory<S>>
where
    S: StateVector,
    F: FnMut(&S) -> Result<S>,
    G: FnMut(&S) -> S,
{
    let dw = wiener_increments(wiener, &grid)?;
    let h = grid.dt();
    let mut st = Stepper::new(grid, init, None)?;
    for k in 0..grid.n_steps() {
        let y = st.last();
        let dw = dw(k);
        let f0 = drift(&y).map_err(|e| st.lift(k + 1, e))?;
        let g0 = diffusion(&y);
        let pred = axpy(axpy(y, h, f0), dw, g0);
        st.check(k + 1, pred)?;
        let f1 = drift(&pred).map_err(|e| st.lift(k + 1, e))?;
        let g1 = diffusion(&pred);
        st.push(axpy(axpy(y, 0.5 * h, add(f0, f1)), 0.5 * dw, add(g0, g1)))?;
    }
    Ok(st.finish(Some(NoiseRef::of(wiener)), Scheme::HeunStratonovich))
}
