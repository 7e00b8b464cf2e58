//! Nondimensional equations of motion and trajectory integration.
//!
//! The glider's velocity `(v_x, v_z)` evolves under quasi-steady lift and
//! drag evaluated at the angle of attack `α = γ + θ`, where `γ` is the glide
//! angle (clockwise from horizontal, so `v_z = −v sin γ`) and `θ` the pitch.
//! All production right-hand sides are written in inertial coordinates with
//! polar quantities computed on the fly, which keeps the `v = 0` free-fall
//! state regular; the polar form is retained for cross-checks.

use std::ops::ControlFlow;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions, Status};
use crate::profiles::CoefficientProfile;

/// Escape threshold: figure-scale structures live within |v| ≤ 2.5, so 10 is
/// safely outside all of them.
pub const V_ESCAPE: f64 = 10.0;
/// Acceleration magnitude below which the state counts as at a fixed point…
pub const FIXED_POINT_ACCEL_TOL: f64 = 1e-10;
/// …provided it holds this long (nondimensional time).
pub const FIXED_POINT_HOLD: f64 = 1.0;
/// Central finite-difference step for Jacobians and flow-map gradients.
pub const FD_STEP: f64 = 1e-6;
/// Below this speed the polar form is treated as singular.
pub const V_MIN_POLAR: f64 = 1e-8;

/// Inertial velocity state. `vz < 0` is downward motion.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct VelocityState {
    pub vx: f64,
    pub vz: f64,
}

impl VelocityState {
    pub fn new(vx: f64, vz: f64) -> Self {
        Self { vx, vz }
    }

    pub fn speed(&self) -> f64 {
        self.vx.hypot(self.vz)
    }

    /// Glide angle `γ = atan2(−v_z, v_x)`, clockwise from horizontal.
    pub fn glide_angle(&self) -> f64 {
        (-self.vz).atan2(self.vx)
    }

    pub fn to_polar(&self) -> PolarVelocity {
        PolarVelocity {
            v: self.speed(),
            gamma: self.glide_angle(),
        }
    }

    pub fn distance(&self, other: VelocityState) -> f64 {
        (self.vx - other.vx).hypot(self.vz - other.vz)
    }
}

impl From<[f64; 2]> for VelocityState {
    fn from(y: [f64; 2]) -> Self {
        Self { vx: y[0], vz: y[1] }
    }
}

impl From<VelocityState> for [f64; 2] {
    fn from(s: VelocityState) -> [f64; 2] {
        [s.vx, s.vz]
    }
}

/// Velocity in polar form: speed and glide angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarVelocity {
    pub v: f64,
    pub gamma: f64,
}

impl PolarVelocity {
    pub fn new(v: f64, gamma: f64) -> Self {
        Self { v, gamma }
    }

    pub fn to_state(&self) -> VelocityState {
        VelocityState {
            vx: self.v * self.gamma.cos(),
            vz: -self.v * self.gamma.sin(),
        }
    }
}

/// Body pitch, fixed with respect to the ground.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, serde::Serialize, serde::Deserialize)]
pub struct PitchAngle(f64);

impl PitchAngle {
    pub fn from_radians(theta: f64) -> Self {
        Self(theta)
    }

    pub fn from_degrees(theta_deg: f64) -> Self {
        Self(theta_deg.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }
}

impl From<f64> for PitchAngle {
    fn from(radians: f64) -> Self {
        Self(radians)
    }
}

/// Acceleration `(v̇_x, v̇_z)` with the right-hand side in polar quantities.
/// At `v = 0` gravity is the only force: returns `(0, −1)` exactly.
pub fn acceleration(
    state: VelocityState,
    theta: PitchAngle,
    profile: &CoefficientProfile,
) -> (f64, f64) {
    let v2 = state.vx * state.vx + state.vz * state.vz;
    if v2 == 0.0 {
        return (0.0, -1.0);
    }
    let gamma = state.glide_angle();
    let (cl, cd) = profile.evaluate((gamma + theta.radians()).into());
    let (sg, cg) = gamma.sin_cos();
    (
        v2 * (cl * sg - cd * cg),
        v2 * (cl * cg + cd * sg) - 1.0,
    )
}

/// Algebraically identical form written directly in inertial components;
/// kept as a cross-check on [`acceleration`].
pub fn acceleration_inertial_form(
    state: VelocityState,
    theta: PitchAngle,
    profile: &CoefficientProfile,
) -> (f64, f64) {
    let v = state.speed();
    if v == 0.0 {
        return (0.0, -1.0);
    }
    let gamma = state.glide_angle();
    let (cl, cd) = profile.evaluate((gamma + theta.radians()).into());
    (
        v * (-cl * state.vz - cd * state.vx),
        v * (cl * state.vx - cd * state.vz) - 1.0,
    )
}

/// Polar rates `(v̇, γ̇)`; singular at zero speed.
pub fn polar_rates(
    polar: PolarVelocity,
    theta: PitchAngle,
    profile: &CoefficientProfile,
) -> Result<(f64, f64)> {
    if polar.v <= V_MIN_POLAR {
        return Err(Error::SingularAtZeroSpeed { v: polar.v });
    }
    let (cl, cd) = profile.evaluate((polar.gamma + theta.radians()).into());
    let v_dot = -cd * polar.v * polar.v + polar.gamma.sin();
    let gamma_dot = -cl * polar.v + polar.gamma.cos() / polar.v;
    Ok((v_dot, gamma_dot))
}

/// Central finite-difference Jacobian of [`acceleration`].
pub fn jacobian(
    state: VelocityState,
    theta: PitchAngle,
    profile: &CoefficientProfile,
) -> [[f64; 2]; 2] {
    let h = FD_STEP.max(FD_STEP * state.speed());
    let mut jac = [[0.0; 2]; 2];
    for (j, axis) in [(0, true), (1, false)] {
        let mut plus = state;
        let mut minus = state;
        if axis {
            plus.vx += h;
            minus.vx -= h;
        } else {
            plus.vz += h;
            minus.vz -= h;
        }
        let ap = acceleration(plus, theta, profile);
        let am = acceleration(minus, theta, profile);
        jac[0][j] = (ap.0 - am.0) / (2.0 * h);
        jac[1][j] = (ap.1 - am.1) / (2.0 * h);
    }
    jac
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// Reached the end of the requested time span.
    Completed,
    /// Speed exceeded the escape threshold.
    Escaped,
    /// Acceleration stayed below tolerance for the hold window.
    NearFixedPoint,
    /// Left the configured state-space box.
    LeftDomain,
    /// Adaptive step collapsed; the trajectory is truncated.
    StepSizeUnderflow,
}

#[derive(Debug, Clone, Copy)]
pub struct IntegrateOptions {
    pub ode: OdeOptions,
    pub v_escape: f64,
    /// Set to 0 to disable near-fixed-point termination.
    pub fixed_point_accel_tol: f64,
    pub fixed_point_hold: f64,
    /// Optional `[vx_min, vx_max, vz_min, vz_max]` termination box.
    pub domain: Option<[f64; 4]>,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            ode: OdeOptions::default(),
            v_escape: V_ESCAPE,
            fixed_point_accel_tol: FIXED_POINT_ACCEL_TOL,
            fixed_point_hold: FIXED_POINT_HOLD,
            domain: None,
        }
    }
}

impl IntegrateOptions {
    /// Options for flow maps that must cover an exact window: no
    /// fixed-point shortcut, escape still caps runaway backward growth.
    pub fn exact_window() -> Self {
        Self {
            fixed_point_accel_tol: 0.0,
            ..Self::default()
        }
    }
}

/// An integrated velocity trajectory with dense output.
#[derive(Debug, Clone)]
pub struct Trajectory {
    solution: ode::Solution<2, Termination>,
    pub theta: PitchAngle,
    pub termination: Termination,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.solution.times
    }

    pub fn states(&self) -> impl Iterator<Item = VelocityState> + '_ {
        self.solution.states.iter().map(|&y| y.into())
    }

    pub fn len(&self) -> usize {
        self.solution.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solution.times.is_empty()
    }

    pub fn state_at(&self, index: usize) -> VelocityState {
        self.solution.states[index].into()
    }

    pub fn final_time(&self) -> f64 {
        self.solution.final_time()
    }

    pub fn final_state(&self) -> VelocityState {
        self.solution.final_state().into()
    }

    /// Dense-output sample at time `t` (clamped to the solved span).
    pub fn sample(&self, t: f64) -> VelocityState {
        self.solution.sample(t).into()
    }
}

/// Integrates the velocity dynamics over `t_span` (backward when
/// `t_span.1 < t_span.0`), stopping early on escape, on a sustained
/// near-fixed-point window, or on leaving the optional domain box.
pub fn integrate(
    initial: VelocityState,
    theta: PitchAngle,
    profile: &CoefficientProfile,
    t_span: (f64, f64),
    options: &IntegrateOptions,
) -> Trajectory {
    let rhs = |_t: f64, y: &[f64; 2]| {
        let (ax, az) = acceleration((*y).into(), theta, profile);
        [ax, az]
    };
    let mut monitor = TerminationMonitor::new(theta, profile, options);
    let solution = ode::integrate(rhs, t_span.0, t_span.1, initial.into(), &options.ode, |t, y| {
        monitor.check(t, (*y).into())
    });
    let termination = termination_from_status(&solution.status);
    Trajectory {
        solution,
        theta,
        termination,
    }
}

/// Velocity trajectory augmented with integrated position `(x, z)`.
#[derive(Debug, Clone)]
pub struct PositionTrajectory {
    solution: ode::Solution<4, Termination>,
    pub theta: PitchAngle,
    pub termination: Termination,
}

impl PositionTrajectory {
    pub fn times(&self) -> &[f64] {
        &self.solution.times
    }

    /// Rows of `(x, z, vx, vz)`.
    pub fn rows(&self) -> &[[f64; 4]] {
        &self.solution.states
    }

    pub fn sample(&self, t: f64) -> [f64; 4] {
        self.solution.sample(t)
    }
}

/// As [`integrate`], also carrying nondimensional position via
/// `ẋ = v_x`, `ż = v_z`.
pub fn integrate_with_position(
    initial: VelocityState,
    initial_position: (f64, f64),
    theta: PitchAngle,
    profile: &CoefficientProfile,
    t_span: (f64, f64),
    options: &IntegrateOptions,
) -> PositionTrajectory {
    let rhs = |_t: f64, y: &[f64; 4]| {
        let (ax, az) = acceleration(VelocityState::new(y[2], y[3]), theta, profile);
        [y[2], y[3], ax, az]
    };
    let mut monitor = TerminationMonitor::new(theta, profile, options);
    let y0 = [initial_position.0, initial_position.1, initial.vx, initial.vz];
    let solution = ode::integrate(rhs, t_span.0, t_span.1, y0, &options.ode, |t, y| {
        monitor.check(t, VelocityState::new(y[2], y[3]))
    });
    let termination = termination_from_status(&solution.status);
    PositionTrajectory {
        solution,
        theta,
        termination,
    }
}

pub(crate) struct TerminationMonitor<'a> {
    theta: PitchAngle,
    profile: &'a CoefficientProfile,
    v_escape: f64,
    accel_tol: f64,
    hold: f64,
    domain: Option<[f64; 4]>,
    quiet_since: Option<f64>,
}

impl<'a> TerminationMonitor<'a> {
    pub(crate) fn new(
        theta: PitchAngle,
        profile: &'a CoefficientProfile,
        options: &IntegrateOptions,
    ) -> Self {
        Self {
            theta,
            profile,
            v_escape: options.v_escape,
            accel_tol: options.fixed_point_accel_tol,
            hold: options.fixed_point_hold,
            domain: options.domain,
            quiet_since: None,
        }
    }

    pub(crate) fn check(&mut self, t: f64, state: VelocityState) -> ControlFlow<Termination> {
        if state.speed() > self.v_escape {
            return ControlFlow::Break(Termination::Escaped);
        }
        if let Some([vx0, vx1, vz0, vz1]) = self.domain {
            if state.vx < vx0 || state.vx > vx1 || state.vz < vz0 || state.vz > vz1 {
                return ControlFlow::Break(Termination::LeftDomain);
            }
        }
        if self.accel_tol > 0.0 {
            let (ax, az) = acceleration(state, self.theta, self.profile);
            if ax.hypot(az) < self.accel_tol {
                let since = *self.quiet_since.get_or_insert(t);
                if (t - since).abs() >= self.hold {
                    return ControlFlow::Break(Termination::NearFixedPoint);
                }
            } else {
                self.quiet_since = None;
            }
        }
        ControlFlow::Continue(())
    }
}

fn termination_from_status(status: &Status<Termination>) -> Termination {
    match status {
        Status::ReachedEnd => Termination::Completed,
        Status::Stopped(reason) => *reason,
        Status::StepSizeUnderflow | Status::MaxSteps => Termination::StepSizeUnderflow,
    }
}

/// How to compute the flow-map gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMethod {
    /// Central differences over four perturbed trajectories.
    FiniteDifference,
    /// Variational equation integrated alongside the state.
    Variational,
}

/// Flow map `F_T(x0)` and its gradient `∂F_T/∂x0` over the signed window
/// `[0, T]`. Errors if any required trajectory escapes inside the window.
pub fn flow_map_gradient(
    x0: VelocityState,
    theta: PitchAngle,
    profile: &CoefficientProfile,
    t_final: f64,
    method: GradientMethod,
    ode: &OdeOptions,
) -> Result<(VelocityState, [[f64; 2]; 2])> {
    match method {
        GradientMethod::FiniteDifference => {
            let end = flow_endpoint(x0, theta, profile, t_final, ode)?;
            let mut grad = [[0.0; 2]; 2];
            for (j, axis) in [(0, true), (1, false)] {
                let mut plus = x0;
                let mut minus = x0;
                if axis {
                    plus.vx += FD_STEP;
                    minus.vx -= FD_STEP;
                } else {
                    plus.vz += FD_STEP;
                    minus.vz -= FD_STEP;
                }
                // The realized perturbation, not 2·FD_STEP: cancels the
                // representation error of the offsets.
                let span = if axis {
                    plus.vx - minus.vx
                } else {
                    plus.vz - minus.vz
                };
                let yp = flow_endpoint(plus, theta, profile, t_final, ode)?;
                let ym = flow_endpoint(minus, theta, profile, t_final, ode)?;
                grad[0][j] = (yp.vx - ym.vx) / span;
                grad[1][j] = (yp.vz - ym.vz) / span;
            }
            Ok((end, grad))
        }
        GradientMethod::Variational => {
            let rhs = |_t: f64, y: &[f64; 6]| {
                let state = VelocityState::new(y[0], y[1]);
                let (ax, az) = acceleration(state, theta, profile);
                let j = jacobian(state, theta, profile);
                // Columns of the variational matrix, stored column-major.
                [
                    ax,
                    az,
                    j[0][0] * y[2] + j[0][1] * y[3],
                    j[1][0] * y[2] + j[1][1] * y[3],
                    j[0][0] * y[4] + j[0][1] * y[5],
                    j[1][0] * y[4] + j[1][1] * y[5],
                ]
            };
            let y0 = [x0.vx, x0.vz, 1.0, 0.0, 0.0, 1.0];
            let solution = ode::integrate(rhs, 0.0, t_final, y0, ode, |_t, y| {
                if y[0].hypot(y[1]) > V_ESCAPE {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            });
            match solution.status {
                Status::ReachedEnd => {
                    let y = solution.final_state();
                    Ok((
                        VelocityState::new(y[0], y[1]),
                        [[y[2], y[4]], [y[3], y[5]]],
                    ))
                }
                _ => Err(Error::EscapeDuringWindow { v_escape: V_ESCAPE }),
            }
        }
    }
}

fn flow_endpoint(
    x0: VelocityState,
    theta: PitchAngle,
    profile: &CoefficientProfile,
    t_final: f64,
    ode_options: &OdeOptions,
) -> Result<VelocityState> {
    let rhs = |_t: f64, y: &[f64; 2]| {
        let (ax, az) = acceleration((*y).into(), theta, profile);
        [ax, az]
    };
    let solution = ode::integrate(rhs, 0.0, t_final, x0.into(), ode_options, |_t, y| {
        if y[0].hypot(y[1]) > V_ESCAPE {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    match solution.status {
        Status::ReachedEnd => Ok(solution.final_state().into()),
        _ => Err(Error::EscapeDuringWindow { v_escape: V_ESCAPE }),
    }
}

/// Dimensional glider parameters.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct DimensionalParams {
    /// Mass.
    pub m: f64,
    /// Gravitational acceleration.
    pub g: f64,
    /// Fluid density.
    pub rho: f64,
    /// Chord length.
    pub c: f64,
    /// Span length.
    pub s: f64,
}

impl DimensionalParams {
    /// Spanwise cross-sectional area `S = c·s`.
    pub fn area(&self) -> f64 {
        self.c * self.s
    }
}

/// The universal glide scaling and the factors that map nondimensional
/// results back to dimensional ones.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct GlideScaling {
    /// `ε = ρ c S / (2 m)`.
    pub epsilon: f64,
    /// Multiply nondimensional velocity by `√(g c / ε)`.
    pub velocity_scale: f64,
    /// Multiply nondimensional time by `√(c / (g ε))`.
    pub time_scale: f64,
}

pub fn epsilon_from_dimensional(p: &DimensionalParams) -> Result<GlideScaling> {
    for (name, value) in [("m", p.m), ("g", p.g), ("rho", p.rho), ("c", p.c), ("s", p.s)] {
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::NonPositiveParam { name, value });
        }
    }
    let epsilon = p.rho * p.c * p.area() / (2.0 * p.m);
    Ok(GlideScaling {
        epsilon,
        velocity_scale: (p.g * p.c / epsilon).sqrt(),
        time_scale: (p.c / (p.g * epsilon)).sqrt(),
    })
}

/// One-dimensional terminal velocity `v_T = √(1/C_D)` for constant drag.
pub fn terminal_velocity_1d(drag: f64) -> Result<f64> {
    if drag <= 0.0 {
        return Err(Error::NonPositiveDrag {
            context: format!("constant drag coefficient {drag}"),
        });
    }
    Ok((1.0 / drag).sqrt())
}

/// Integrates the 1D vertical-descent model `v̇_z = C_D v_z² − 1` and returns
/// the sampled `(t, v_z)` trajectory.
pub fn vertical_descent_trajectory(
    drag: f64,
    vz0: f64,
    t_end: f64,
    ode_options: &OdeOptions,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if drag <= 0.0 {
        return Err(Error::NonPositiveDrag {
            context: format!("constant drag coefficient {drag}"),
        });
    }
    let solution = ode::integrate(
        |_t, y: &[f64; 1]| [drag * y[0] * y[0] - 1.0],
        0.0,
        t_end,
        [vz0],
        ode_options,
        |_, _| ControlFlow::<()>::Continue(()),
    );
    let vz = solution.states.iter().map(|y| y[0]).collect();
    Ok((solution.times, vz))
}

/// Eigenvalues of a real 2×2 matrix.
pub fn eigenvalues_2x2(m: &[[f64; 2]; 2]) -> [Complex64; 2] {
    let trace = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = trace * trace - 4.0 * det;
    if disc >= 0.0 {
        let root = disc.sqrt();
        [
            Complex64::new((trace - root) / 2.0, 0.0),
            Complex64::new((trace + root) / 2.0, 0.0),
        ]
    } else {
        let imag = (-disc).sqrt() / 2.0;
        [
            Complex64::new(trace / 2.0, -imag),
            Complex64::new(trace / 2.0, imag),
        ]
    }
}

/// Real eigenvector for a real eigenvalue of a 2×2 matrix, unit norm.
pub(crate) fn real_eigenvector(m: &[[f64; 2]; 2], lambda: f64) -> [f64; 2] {
    // (m − λI) v = 0: pick the larger row for conditioning.
    let r0 = [m[0][0] - lambda, m[0][1]];
    let r1 = [m[1][0], m[1][1] - lambda];
    let v = if r0[0].hypot(r0[1]) >= r1[0].hypot(r1[1]) {
        [-r0[1], r0[0]]
    } else {
        [-r1[1], r1[0]]
    };
    let norm = v[0].hypot(v[1]);
    if norm == 0.0 {
        [1.0, 0.0]
    } else {
        [v[0] / norm, v[1] / norm]
    }
}

#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn mat_mul_2x2(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub(crate) fn mat_vec_2x2(a: &[[f64; 2]; 2], v: [f64; 2]) -> [f64; 2] {
    [
        a[0][0] * v[0] + a[0][1] * v[1],
        a[1][0] * v[0] + a[1][1] * v[1],
    ]
}
