//! Pitch-controlled glide and flutter simulations on the extended TVM.
//!
//! Pitch is injected as a known function of time rather than a dynamical
//! state: the standing assumption is that `θ̇` is slow enough that the
//! forces it would generate are negligible. When the pitch kinematics are
//! slower than the collapse onto the manifold, all motion after an initial
//! transient rides the pitch-extended TVM: a slow linear ramp reproduces the
//! accelerate–shallow–flare stages of an animal glide, and slow sinusoidal
//! pitch produces a fluttering limit cycle.

use std::ops::ControlFlow;

use crate::dynamics::{self, IntegrateOptions, PitchAngle, Termination, VelocityState};
use crate::error::{Error, Result};
use crate::manifold::TvmSurface;
use crate::ode;
use crate::profiles::CoefficientProfile;

/// Distance to the surface below which the transient counts as over.
pub const TRANSIENT_DISTANCE: f64 = 0.05;
/// Successive stroboscopic returns closer than this mean the flutter loop
/// has converged.
pub const RETURN_TOL: f64 = 1e-3;

/// Prescribed pitch kinematics.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PitchSchedule {
    Constant {
        theta0: PitchAngle,
    },
    /// Linear sweep from `theta_start` to `theta_end` over `duration`,
    /// holding the end value afterwards.
    LinearRamp {
        theta_start: PitchAngle,
        theta_end: PitchAngle,
        duration: f64,
    },
    /// `θ(t) = mean + amplitude · sin(ω t + phase)`.
    Sinusoid {
        theta_mean: PitchAngle,
        amplitude: f64,
        omega: f64,
        phase: f64,
    },
}

impl PitchSchedule {
    pub fn theta_at(&self, t: f64) -> PitchAngle {
        match *self {
            PitchSchedule::Constant { theta0 } => theta0,
            PitchSchedule::LinearRamp {
                theta_start,
                theta_end,
                duration,
            } => {
                let s = (t / duration).clamp(0.0, 1.0);
                PitchAngle::from_radians(
                    theta_start.radians() + s * (theta_end.radians() - theta_start.radians()),
                )
            }
            PitchSchedule::Sinusoid {
                theta_mean,
                amplitude,
                omega,
                phase,
            } => PitchAngle::from_radians(theta_mean.radians() + amplitude * (omega * t + phase).sin()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PitchSchedule::Constant { .. } => Ok(()),
            PitchSchedule::LinearRamp { duration, .. } => {
                if duration > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Config {
                        field: "duration".to_string(),
                        message: format!("ramp duration must be positive, got {duration}"),
                    })
                }
            }
            PitchSchedule::Sinusoid { omega, .. } => {
                if omega > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Config {
                        field: "omega".to_string(),
                        message: format!("sinusoid frequency must be positive, got {omega}"),
                    })
                }
            }
        }
    }

    /// Forcing period, for periodic schedules.
    pub fn forcing_period(&self) -> Option<f64> {
        match self {
            PitchSchedule::Sinusoid { omega, .. } => Some(std::f64::consts::TAU / omega),
            _ => None,
        }
    }
}

/// One sampled instant of a controlled simulation.
#[derive(Debug, Clone, Copy)]
pub struct SimSample {
    pub t: f64,
    pub x: f64,
    pub z: f64,
    pub state: VelocityState,
    pub theta: PitchAngle,
}

impl SimSample {
    pub fn speed(&self) -> f64 {
        self.state.speed()
    }

    pub fn glide_angle(&self) -> f64 {
        self.state.glide_angle()
    }
}

/// Output of [`simulate_controlled`]: a dense `(x, z, v_x, v_z)` solution
/// with the pitch schedule attached.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    solution: ode::Solution<4, Termination>,
    pub schedule: PitchSchedule,
    pub termination: Termination,
}

impl SimulationResult {
    pub fn times(&self) -> &[f64] {
        &self.solution.times
    }

    pub fn final_time(&self) -> f64 {
        self.solution.final_time()
    }

    pub fn sample(&self, t: f64) -> SimSample {
        let y = self.solution.sample(t);
        SimSample {
            t,
            x: y[0],
            z: y[1],
            state: VelocityState::new(y[2], y[3]),
            theta: self.schedule.theta_at(t),
        }
    }

    /// Samples at the integrator's accepted steps.
    pub fn steps(&self) -> impl Iterator<Item = SimSample> + '_ {
        self.solution
            .times
            .iter()
            .zip(&self.solution.states)
            .map(|(&t, y)| SimSample {
                t,
                x: y[0],
                z: y[1],
                state: VelocityState::new(y[2], y[3]),
                theta: self.schedule.theta_at(t),
            })
    }

    /// Uniformly spaced samples across the solved span.
    pub fn resample(&self, n: usize) -> Vec<SimSample> {
        let t0 = self.solution.times[0];
        let t1 = self.final_time();
        (0..n.max(2))
            .map(|i| self.sample(t0 + (t1 - t0) * i as f64 / (n.max(2) - 1) as f64))
            .collect()
    }
}

/// Integrates the velocity dynamics with `θ = θ(t)` injected, coupled with
/// the kinematic position `ẋ = v_x`, `ż = v_z`, in one adaptive solve.
pub fn simulate_controlled(
    initial: VelocityState,
    schedule: PitchSchedule,
    profile: &CoefficientProfile,
    t_span: (f64, f64),
    options: &IntegrateOptions,
) -> Result<SimulationResult> {
    schedule.validate()?;
    let rhs = |t: f64, y: &[f64; 4]| {
        let theta = schedule.theta_at(t);
        let (ax, az) = dynamics::acceleration(VelocityState::new(y[2], y[3]), theta, profile);
        [y[2], y[3], ax, az]
    };
    let v_escape = options.v_escape;
    let solution = ode::integrate(
        rhs,
        t_span.0,
        t_span.1,
        [0.0, 0.0, initial.vx, initial.vz],
        &options.ode,
        |_t, y| {
            if y[2].hypot(y[3]) > v_escape {
                ControlFlow::Break(Termination::Escaped)
            } else {
                ControlFlow::Continue(())
            }
        },
    );
    let termination = match solution.status {
        ode::Status::ReachedEnd => Termination::Completed,
        ode::Status::Stopped(reason) => reason,
        _ => Termination::StepSizeUnderflow,
    };
    Ok(SimulationResult {
        solution,
        schedule,
        termination,
    })
}

/// Stroboscopic analysis of a flutter simulation.
#[derive(Debug, Clone)]
pub struct LimitCycleCheck {
    /// True when the last two period-returns differ by less than
    /// [`RETURN_TOL`] and at least ten forcing periods were simulated.
    pub converged: bool,
    /// Distance between the final two stroboscopic returns.
    pub return_distance: f64,
    /// The final period's path in velocity space.
    pub loop_points: Vec<VelocityState>,
}

/// Period-map check that a sinusoidally forced simulation has settled onto a
/// closed loop.
pub fn limit_cycle_check(
    result: &SimulationResult,
    schedule: &PitchSchedule,
) -> Result<LimitCycleCheck> {
    let period = schedule.forcing_period().ok_or(Error::NotPeriodicSchedule)?;
    let t0 = result.times()[0];
    let t_end = result.final_time();
    let whole_periods = ((t_end - t0) / period).floor() as usize;
    if whole_periods < 2 {
        return Err(Error::Config {
            field: "t_span".to_string(),
            message: format!(
                "need at least two forcing periods, span covers {whole_periods}"
            ),
        });
    }

    let returns: Vec<VelocityState> = (0..=whole_periods)
        .map(|k| result.sample(t0 + k as f64 * period).state)
        .collect();
    let return_distance = returns[whole_periods - 1].distance(returns[whole_periods]);
    let converged = whole_periods >= 10 && return_distance < RETURN_TOL;

    let loop_start = t0 + (whole_periods - 1) as f64 * period;
    let loop_points = (0..=200)
        .map(|i| result.sample(loop_start + period * i as f64 / 200.0).state)
        .collect();
    Ok(LimitCycleCheck {
        converged,
        return_distance,
        loop_points,
    })
}

/// Distance statistics of a simulation against the extended TVM surface.
#[derive(Debug, Clone)]
pub struct AdherenceStats {
    /// First sample time with distance below [`TRANSIENT_DISTANCE`].
    pub transient_end: Option<f64>,
    pub post_transient_max: f64,
    pub post_transient_mean: f64,
    /// `(t, distance)` at every evaluated sample.
    pub distances: Vec<(f64, f64)>,
}

/// Per-sample distance from the simulated velocity to the TVM slice at the
/// nearest pitch, with post-transient statistics.
pub fn tvm_adherence(
    result: &SimulationResult,
    surface: &TvmSurface,
    samples: usize,
) -> Result<AdherenceStats> {
    let (lo, hi) = surface.theta_range().ok_or(Error::EmptyBranch)?;
    let rows = result.resample(samples.max(16));
    for sample in &rows {
        let theta = sample.theta.radians();
        if theta < lo - 1e-9 || theta > hi + 1e-9 {
            return Err(Error::ThetaOutOfSurfaceRange {
                theta_deg: theta.to_degrees(),
                lo_deg: lo.to_degrees(),
                hi_deg: hi.to_degrees(),
            });
        }
    }

    let distances: Vec<(f64, f64)> = rows
        .iter()
        .map(|sample| {
            let slice = surface
                .slice_nearest(sample.theta)
                .expect("surface has slices");
            (sample.t, slice.distance_to(sample.state))
        })
        .collect();

    let transient_end = distances
        .iter()
        .find(|(_, d)| *d < TRANSIENT_DISTANCE)
        .map(|(t, _)| *t);
    let post: Vec<f64> = match transient_end {
        Some(t_star) => distances
            .iter()
            .filter(|(t, _)| *t >= t_star)
            .map(|(_, d)| *d)
            .collect(),
        None => distances.iter().map(|(_, d)| *d).collect(),
    };
    let post_transient_max = post.iter().copied().fold(0.0, f64::max);
    let post_transient_mean = post.iter().sum::<f64>() / post.len().max(1) as f64;
    Ok(AdherenceStats {
        transient_end,
        post_transient_max,
        post_transient_mean,
        distances,
    })
}

/// Integration options suited to prescribed-pitch runs: no near-fixed-point
/// shortcut, since the forcing keeps moving the equilibria.
pub fn scenario_options() -> IntegrateOptions {
    IntegrateOptions {
        fixed_point_accel_tol: 0.0,
        ..IntegrateOptions::default()
    }
}
