//! Six-dimensional hyperchaotic flow and its diagnostics.
//!
//! The flow is a Lorenz core (x1, x2, x3) extended with three controller
//! states (x4, x5, x6). [`SystemParams`] holds the six coefficients and the
//! coupling [`Form`]; everything else in this module is generic over
//! [`VectorField`] so the Lyapunov and bifurcation machinery can be checked
//! against simple linear systems.

mod bifurcation;
mod lyapunov;

use std::io::{self, Write};
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bifurcation::{bifurcation_scan, BifurcationScan, ScanSettings};
pub use lyapunov::{lyapunov_spectrum, LyapunovReport, LyapunovSettings};

pub const DIM: usize = 6;

pub type Jacobian = [[f64; DIM]; DIM];

/// A point in the six-dimensional phase space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChaoticState(pub [f64; DIM]);

impl ChaoticState {
    pub const ORIGIN: ChaoticState = ChaoticState([0.0; DIM]);
    pub const ONES: ChaoticState = ChaoticState([1.0; DIM]);

    pub fn new(x: [f64; DIM]) -> Self {
        ChaoticState(x)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn as_array(&self) -> &[f64; DIM] {
        &self.0
    }
}

impl Index<usize> for ChaoticState {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<[f64; DIM]> for ChaoticState {
    fn from(x: [f64; DIM]) -> Self {
        ChaoticState(x)
    }
}

/// Right-hand side of an autonomous ODE on R^6 with an analytic Jacobian.
pub trait VectorField {
    fn derivative(&self, x: &[f64; DIM]) -> [f64; DIM];
    fn jacobian(&self, x: &[f64; DIM]) -> Jacobian;
}

/// Coupling arrangement of the controller states.
///
/// Both forms share the Lorenz core, `ẋ2`, `ẋ3`, `ẋ6 = r·x1` and the constant
/// Jacobian trace `-a - 1 - b + d`. They differ in how x4, x5, x6 feed back
/// into `ẋ1` and in the product driving `ẋ4`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    /// `ẋ1 = a(x2-x1) + x4 - x5 + x6`, `ẋ4 = d·x4 - x1·x3`, `ẋ5 = e·x6 + x2·x3`.
    ///
    /// The x5/x6 loop through x1 is oscillatory, and trajectories stay on a
    /// bounded attractor with two positive Lyapunov exponents.
    #[default]
    Bounded,
    /// `ẋ1 = a(x2-x1) + x4 + x5 - x6`, `ẋ4 = d·x4 - x2·x3`, `ẋ5 = e·x6 + x2·x3`.
    ///
    /// The x5 → x1 → x6 → x5 loop has positive gain (origin eigenvalue ≈ +11.8
    /// at default coefficients), so every trajectory escapes to infinity
    /// within a few time units.
    Divergent,
}

/// Coefficients of the flow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub r: f64,
    #[serde(default)]
    pub form: Form,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            a: 10.0,
            b: 8.0 / 3.0,
            c: 28.0,
            d: -1.0,
            e: 8.0,
            r: 3.0,
            form: Form::Bounded,
        }
    }
}

impl SystemParams {
    pub const NAMES: [&'static str; 6] = ["a", "b", "c", "d", "e", "r"];

    pub fn with_form(mut self, form: Form) -> Self {
        self.form = form;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.a, self.b, self.c, self.d, self.e, self.r];
        if all.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Config("system coefficients must be finite".into()))
        }
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        Ok(*self.slot(name)?)
    }

    /// Overwrite the named coefficient (`"a"` … `"r"`).
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        *self.slot_mut(name)? = value;
        Ok(())
    }

    /// Trace of the Jacobian, identical at every state.
    pub fn divergence(&self) -> f64 {
        -self.a - 1.0 - self.b + self.d
    }

    fn slot(&self, name: &str) -> Result<&f64> {
        Ok(match name {
            "a" => &self.a,
            "b" => &self.b,
            "c" => &self.c,
            "d" => &self.d,
            "e" => &self.e,
            "r" => &self.r,
            _ => return Err(unknown_param(name)),
        })
    }

    fn slot_mut(&mut self, name: &str) -> Result<&mut f64> {
        Ok(match name {
            "a" => &mut self.a,
            "b" => &mut self.b,
            "c" => &mut self.c,
            "d" => &mut self.d,
            "e" => &mut self.e,
            "r" => &mut self.r,
            _ => return Err(unknown_param(name)),
        })
    }
}

fn unknown_param(name: &str) -> Error {
    Error::Unknown {
        kind: "parameter",
        name: name.to_string(),
    }
}

impl VectorField for SystemParams {
    fn derivative(&self, x: &[f64; DIM]) -> [f64; DIM] {
        let &SystemParams {
            a, b, c, d, e, r, ..
        } = self;
        let [x1, x2, x3, x4, x5, x6] = *x;
        match self.form {
            Form::Bounded => [
                a * (x2 - x1) + x4 - x5 + x6,
                c * x1 - x2 - x1 * x3,
                -b * x3 + x1 * x2,
                d * x4 - x1 * x3,
                e * x6 + x2 * x3,
                r * x1,
            ],
            Form::Divergent => [
                a * (x2 - x1) + x4 + x5 - x6,
                c * x1 - x2 - x1 * x3,
                -b * x3 + x1 * x2,
                d * x4 - x2 * x3,
                e * x6 + x3 * x2,
                r * x1,
            ],
        }
    }

    fn jacobian(&self, x: &[f64; DIM]) -> Jacobian {
        let &SystemParams {
            a, b, c, d, e, r, ..
        } = self;
        let [x1, x2, x3, _, _, _] = *x;
        match self.form {
            Form::Bounded => [
                [-a, a, 0.0, 1.0, -1.0, 1.0],
                [c - x3, -1.0, -x1, 0.0, 0.0, 0.0],
                [x2, x1, -b, 0.0, 0.0, 0.0],
                [-x3, 0.0, -x1, d, 0.0, 0.0],
                [0.0, x3, x2, 0.0, 0.0, e],
                [r, 0.0, 0.0, 0.0, 0.0, 0.0],
            ],
            Form::Divergent => [
                [-a, a, 0.0, 1.0, 1.0, -1.0],
                [c - x3, -1.0, -x1, 0.0, 0.0, 0.0],
                [x2, x1, -b, 0.0, 0.0, 0.0],
                [0.0, -x3, -x2, d, 0.0, 0.0],
                [0.0, x3, x2, 0.0, 0.0, e],
                [r, 0.0, 0.0, 0.0, 0.0, 0.0],
            ],
        }
    }
}

/// Fixed-step integrator settings. Only classical RK4 is provided.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { step: 0.001 }
    }
}

impl IntegratorConfig {
    pub fn new(step: f64) -> Result<Self> {
        let cfg = IntegratorConfig { step };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.step.is_finite() && self.step > 0.0 {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "integration step must be positive and finite, got {}",
                self.step
            )))
        }
    }
}

#[inline]
fn axpy(x: &[f64; DIM], h: f64, k: &[f64; DIM]) -> [f64; DIM] {
    std::array::from_fn(|i| x[i] + h * k[i])
}

/// One classical RK4 step. No finiteness checks.
pub fn rk4_step<F: VectorField + ?Sized>(field: &F, x: &[f64; DIM], h: f64) -> [f64; DIM] {
    let k1 = field.derivative(x);
    let k2 = field.derivative(&axpy(x, 0.5 * h, &k1));
    let k3 = field.derivative(&axpy(x, 0.5 * h, &k2));
    let k4 = field.derivative(&axpy(x, h, &k3));
    std::array::from_fn(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Evaluate the flow at `state`.
pub fn derivative(state: &ChaoticState, params: &SystemParams) -> Result<ChaoticState> {
    if !state.is_finite() {
        return Err(Error::InvalidState);
    }
    Ok(ChaoticState(params.derivative(&state.0)))
}

/// Advance `state` by one RK4 step of size `cfg.step`.
pub fn integrate_step(
    state: &ChaoticState,
    params: &SystemParams,
    cfg: &IntegratorConfig,
) -> Result<ChaoticState> {
    let mut traj = Trajectory::new(params, *state, cfg)?;
    traj.advance()
}

/// Stepping iterator over an RK4 trajectory.
///
/// Each call to [`Trajectory::advance`] performs one step and fails with
/// [`Error::Divergence`] (carrying the 1-based step index) as soon as the
/// state stops being finite.
pub struct Trajectory<'a, F: VectorField + ?Sized> {
    field: &'a F,
    state: [f64; DIM],
    step: f64,
    index: usize,
}

impl<'a, F: VectorField + ?Sized> Trajectory<'a, F> {
    pub fn new(field: &'a F, init: ChaoticState, cfg: &IntegratorConfig) -> Result<Self> {
        cfg.validate()?;
        if !init.is_finite() {
            return Err(Error::InvalidState);
        }
        Ok(Trajectory {
            field,
            state: init.0,
            step: cfg.step,
            index: 0,
        })
    }

    pub fn advance(&mut self) -> Result<ChaoticState> {
        self.index += 1;
        let next = rk4_step(self.field, &self.state, self.step);
        if !next.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence { step: self.index });
        }
        self.state = next;
        Ok(ChaoticState(next))
    }

    /// Advance `n` steps, discarding the intermediate states.
    pub fn skip(&mut self, n: usize) -> Result<()> {
        for _ in 0..n {
            self.advance()?;
        }
        Ok(())
    }

    pub fn state(&self) -> ChaoticState {
        ChaoticState(self.state)
    }

    pub fn steps_taken(&self) -> usize {
        self.index
    }
}

/// States after 1, 2, …, `n_steps` RK4 steps from `init`.
pub fn generate_trajectory(
    init: &ChaoticState,
    params: &SystemParams,
    cfg: &IntegratorConfig,
    n_steps: usize,
) -> Result<Vec<ChaoticState>> {
    if n_steps == 0 {
        return Err(Error::Config("trajectory needs at least one step".into()));
    }
    params.validate()?;
    let mut traj = Trajectory::new(params, *init, cfg)?;
    (0..n_steps).map(|_| traj.advance()).collect()
}

/// Write `step,x1,…,x6` rows. Step numbering starts at 1.
pub fn write_trajectory_csv<W: Write>(out: &mut W, states: &[ChaoticState]) -> io::Result<()> {
    writeln!(out, "step,x1,x2,x3,x4,x5,x6")?;
    for (i, s) in states.iter().enumerate() {
        let [x1, x2, x3, x4, x5, x6] = s.0;
        writeln!(out, "{},{x1},{x2},{x3},{x4},{x5},{x6}", i + 1)?;
    }
    Ok(())
}
